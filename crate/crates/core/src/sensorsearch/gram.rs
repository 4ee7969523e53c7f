use crate::linalg::{cholesky, qr_lstsq, Matrix};
use crate::scalar::Real;

use super::{SearchError, SearchTask, SensorPool};

/// Second moments of every sensor, the bias and every task target over
/// the post-washout rows. Sensors and targets are centred first, which
/// leaves the fitted values unchanged and keeps the moments well scaled.
#[derive(Debug, Clone)]
pub struct GramSystem {
    n_sensors: usize,
    dim: usize,
    g: Vec<f64>,
    c: Vec<f64>,
    sst: Vec<f64>,
}

impl GramSystem {
    pub fn new<T: Real>(pool: &SensorPool<T>, tasks: &[SearchTask<T>], washout: usize) -> Result<Self, SearchError> {
        let n = pool.samples();
        let ns = pool.len();
        for t in tasks {
            if t.target.len() != n {
                return Err(SearchError::LengthMismatch(t.name.clone()));
            }
        }
        let rows = n.saturating_sub(washout);
        if rows < ns + 2 {
            return Err(SearchError::TooShort { rows, min: ns + 2 });
        }
        let center = |x: &[T]| -> Vec<f64> {
            let x: Vec<f64> = x[washout..].iter().map(|v| v.as_f64()).collect();
            let m = x.iter().sum::<f64>() / x.len() as f64;
            x.into_iter().map(|v| v - m).collect()
        };
        let s: Vec<Vec<f64>> = pool.data.iter().map(|d| center(d)).collect();
        let dim = ns + 1;
        let mut g = vec![0.0; dim * dim];
        for i in 0..ns {
            for j in i..ns {
                let v: f64 = s[i].iter().zip(&s[j]).map(|(a, b)| a * b).sum();
                g[i * dim + j] = v;
                g[j * dim + i] = v;
            }
        }
        // Centred columns are orthogonal to the bias.
        g[ns * dim + ns] = rows as f64;
        let mut c = vec![0.0; tasks.len() * dim];
        let mut sst = Vec::with_capacity(tasks.len());
        for (ti, task) in tasks.iter().enumerate() {
            let y = center(&task.target);
            let yy: f64 = y.iter().map(|v| v * v).sum();
            let scale = task.target[washout..]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.as_f64().abs()));
            if !(yy > scale * scale * f64::EPSILON * rows as f64) {
                return Err(SearchError::DegenerateTask(task.name.clone()));
            }
            sst.push(yy);
            for (i, si) in s.iter().enumerate() {
                c[ti * dim + i] = si.iter().zip(&y).map(|(a, b)| a * b).sum();
            }
        }
        Ok(Self {
            n_sensors: ns,
            dim,
            g,
            c,
            sst,
        })
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    pub fn n_tasks(&self) -> usize {
        self.sst.len()
    }

    pub fn bias_index(&self) -> usize {
        self.n_sensors
    }

    #[inline]
    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.dim + j]
    }

    #[inline]
    pub fn c(&self, task: usize, i: usize) -> f64 {
        self.c[task * self.dim + i]
    }

    /// R² given the explained sum of squares `cᵀG⁻¹c` of a subset.
    #[inline]
    pub fn r2_from_explained(&self, task: usize, explained: f64) -> f64 {
        explained / self.sst[task]
    }

    /// Solves the subset's block of the normal equations from scratch.
    /// `None` if the block is singular.
    pub fn subset_r2(&self, subset: &[usize], task: usize) -> Option<f64> {
        let idx: Vec<usize> = subset.iter().copied().chain([self.bias_index()]).collect();
        let k = idx.len();
        let block = Matrix::from_fn(k, k, |r, q| self.g(idx[r], idx[q]));
        let l = cholesky(&block)?;
        // Forward substitution only: explained = |L⁻¹c|².
        let mut z = vec![0.0; k];
        for r in 0..k {
            let mut s = self.c(task, idx[r]);
            for m in 0..r {
                s -= l[(r, m)] * z[m];
            }
            z[r] = s / l[(r, r)];
        }
        Some(self.r2_from_explained(task, z.iter().map(|v| v * v).sum()))
    }
}

/// R² of an ordinary least-squares fit with bias on the raw post-washout
/// rows, by QR. Reference for the Gram-based scores.
pub fn direct_subset_r2<T: Real>(pool: &SensorPool<T>, target: &[T], subset: &[usize], washout: usize) -> Option<f64> {
    let n = target.len();
    let rows = n.checked_sub(washout)?;
    let a = Matrix::from_fn(rows, subset.len() + 1, |r, q| {
        if q < subset.len() {
            pool.data[subset[q]][washout + r].as_f64()
        } else {
            1.0
        }
    });
    let y: Vec<f64> = target[washout..].iter().map(|v| v.as_f64()).collect();
    let w = qr_lstsq(&a, &y)?;
    let m = y.iter().sum::<f64>() / rows as f64;
    let mut sse = 0.0;
    let mut sst = 0.0;
    for (r, &yr) in y.iter().enumerate() {
        let p: f64 = a.row(r).iter().zip(&w).map(|(x, c)| x * c).sum();
        sse += (yr - p) * (yr - p);
        sst += (yr - m) * (yr - m);
    }
    Some(1.0 - sse / sst)
}
