use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Matrix;
use crate::scalar::Real;

use super::{LeakMode, ReservoirConfig, ReservoirError};

const REDRAW_ATTEMPTS: u64 = 4;

/// Largest eigenvalue modulus, from the real Schur form.
pub fn spectral_radius<T: Real>(m: &Matrix<T>) -> f64 {
    let n = m.rows();
    if n == 0 {
        return 0.0;
    }
    let d = DMatrix::from_row_iterator(n, n, m.as_slice().iter().map(|v| v.as_f64()));
    d.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Random reservoir: input weights `a` (nodes × mux width) and recurrent
/// weights `b` rescaled to the configured spectral radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Esn<T> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub n_sensors: usize,
    pub lags: usize,
    pub leak: T,
    pub leak_mode: LeakMode,
    pub input_scale: T,
}

fn uniform_column(seed: u64, stream: u64, n: usize) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..n).map(move |_| rng.random_range(-0.5..0.5))
}

impl<T: Real> Esn<T> {
    /// Draws the weights. Each input column comes from its own stream keyed
    /// by `(sensor, lag)`, so widening the mux keeps earlier columns fixed.
    pub fn new(config: &ReservoirConfig, n_sensors: usize, lags: usize) -> Result<Self, ReservoirError> {
        let n = config.n_nodes;
        let width = n_sensors * lags;
        let mut a = Matrix::zeros(n, width);
        for s in 0..n_sensors {
            for j in 0..lags {
                let stream = ((s as u64 + 1) << 32) | j as u64;
                for (i, v) in uniform_column(config.seed, stream, n).enumerate() {
                    a[(i, s * lags + j)] = T::lit(v);
                }
            }
        }
        let mut b = None;
        for attempt in 0..REDRAW_ATTEMPTS {
            let stream = if attempt == 0 { 0 } else { u64::MAX - attempt };
            let raw: Vec<f64> = uniform_column(config.seed, stream, n * n).collect();
            let m = Matrix::from_vec(n, n, raw);
            let rho = spectral_radius(&m);
            if rho > 1e-12 {
                let k = config.spectral_radius / rho;
                b = Some(Matrix::from_vec(
                    n,
                    n,
                    m.as_slice().iter().map(|&v| T::lit(v * k)).collect(),
                ));
                break;
            }
            if n == 0 {
                b = Some(Matrix::zeros(0, 0));
                break;
            }
        }
        Ok(Self {
            a,
            b: b.ok_or(ReservoirError::SeedCollapse)?,
            n_sensors,
            lags,
            leak: T::lit(config.leak),
            leak_mode: config.leak_mode,
            input_scale: T::lit(config.input_scale),
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.b.rows()
    }

    pub fn width(&self) -> usize {
        self.a.cols()
    }

    /// One update. `u_leak` carries the integrated input between calls;
    /// `scratch` must hold `n_nodes` values.
    pub fn step(&self, x: &mut [T], u_leak: &mut [T], u: &[T], scratch: &mut [T]) {
        let lam = self.leak;
        let one = T::one();
        match self.leak_mode {
            LeakMode::Input => {
                for (l, &v) in u_leak.iter_mut().zip(u) {
                    *l = lam * *l + (one - lam) * v;
                }
            }
            LeakMode::State => u_leak.copy_from_slice(u),
        }
        let n = self.n_nodes();
        for i in 0..n {
            let ar = self.a.row(i);
            let br = self.b.row(i);
            let mut s = T::zero();
            for (w, &v) in ar.iter().zip(u_leak.iter()) {
                s += *w * v;
            }
            s *= self.input_scale;
            for (w, &v) in br.iter().zip(x.iter()) {
                s += *w * v;
            }
            scratch[i] = s.tanh();
        }
        match self.leak_mode {
            LeakMode::Input => x.copy_from_slice(&scratch[..n]),
            LeakMode::State => {
                for (xi, &s) in x.iter_mut().zip(scratch.iter()) {
                    *xi = lam * *xi + (one - lam) * s;
                }
            }
        }
    }

    /// Drives the reservoir with each row of `u`; row `T` of the result is
    /// the state `X(T+1)` reached after consuming `U(T)`.
    pub fn run(&self, u: &Matrix<T>, x0: Option<&[T]>) -> Result<Matrix<T>, ReservoirError> {
        if u.cols() != self.width() {
            return Err(ReservoirError::WidthMismatch {
                expected: self.width(),
                got: u.cols(),
            });
        }
        let n = self.n_nodes();
        let mut x = x0.map_or_else(|| vec![T::zero(); n], <[T]>::to_vec);
        let mut u_leak = vec![T::zero(); self.width()];
        let mut scratch = vec![T::zero(); n];
        let mut out = Matrix::zeros(u.rows(), n);
        for t in 0..u.rows() {
            self.step(&mut x, &mut u_leak, u.row(t), &mut scratch);
            out.row_mut(t).copy_from_slice(&x);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64) -> ReservoirConfig {
        ReservoirConfig {
            seed,
            ..Default::default()
        }
    }

    /// Gelfand: ‖Bᵏ‖^(1/k) → ρ(B). Repeated squaring with renormalization.
    fn gelfand_radius(m: &Matrix<f64>) -> f64 {
        let mut p = m.clone();
        let mut log_scale = 0.0f64;
        let mut k = 1.0f64;
        for _ in 0..30 {
            let norm = p.max_abs();
            p.scale(1.0 / norm);
            log_scale += norm.ln() / k;
            p = p.matmul(&p);
            k *= 2.0;
        }
        (log_scale + p.max_abs().ln() / k).exp()
    }

    #[test]
    fn spectral_radius_is_rescaled() {
        for seed in 0..3 {
            let e = Esn::<f64>::new(&cfg(seed), 4, 21).unwrap();
            assert!((spectral_radius(&e.b) - 0.35).abs() < 1e-9);
            assert!((gelfand_radius(&e.b) - 0.35).abs() < 1e-6, "{}", gelfand_radius(&e.b));
            assert!(e.a.as_slice().iter().all(|v| v.abs() <= 0.5));
        }
    }

    #[test]
    fn zero_input_keeps_zero_state() {
        let e = Esn::<f64>::new(&cfg(1), 2, 1).unwrap();
        let x = e.run(&Matrix::zeros(50, 2), None).unwrap();
        assert!(x.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn same_seed_same_weights() {
        assert_eq!(
            Esn::<f64>::new(&cfg(7), 3, 5).unwrap(),
            Esn::<f64>::new(&cfg(7), 3, 5).unwrap()
        );
    }

    #[test]
    fn widening_mux_keeps_existing_columns() {
        let narrow = Esn::<f64>::new(&cfg(3), 2, 3).unwrap();
        let wide = Esn::<f64>::new(&cfg(3), 2, 5).unwrap();
        for s in 0..2 {
            for j in 0..3 {
                assert_eq!(narrow.a.column(s * 3 + j), wide.a.column(s * 5 + j));
            }
        }
        assert_eq!(narrow.b, wide.b);
    }

    #[test]
    fn input_leak_converges_geometrically() {
        let mut c = cfg(2);
        c.leak = 0.5;
        let e = Esn::<f64>::new(&c, 1, 1).unwrap();
        let mut x = vec![0.0; 100];
        let mut ul = vec![0.0];
        let mut scratch = vec![0.0; 100];
        for k in 1..=10 {
            e.step(&mut x, &mut ul, &[0.8], &mut scratch);
            assert!((0.8 - ul[0] - 0.8 * 0.5f64.powi(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn states_forget_initial_conditions() {
        let e = Esn::<f64>::new(&cfg(4), 1, 1).unwrap();
        let u = Matrix::from_fn(1000, 1, |t, _| (t as f64 * 0.1).sin() * 0.5);
        let xa = e.run(&u, Some(&vec![0.9; 100])).unwrap();
        let xb = e.run(&u, Some(&vec![-0.9; 100])).unwrap();
        let d = xa
            .row(999)
            .iter()
            .zip(xb.row(999))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(d < 1e-6);
    }
}
