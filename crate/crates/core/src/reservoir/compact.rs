//! Little-endian model blob and a single-precision evaluator that runs
//! one step at a time from buffers sized at load.
//!
//! Layout: magic, eight `u32` dimensions (version, nodes, sensors, lags,
//! stride, outputs, channels, horizons), architecture and leak-mode bytes
//! plus two padding bytes, four `f32` scalars (ρ, λ, input scale, mux
//! scale), then `A`, `B` and `W` row-major as `f32`.

use crate::scalar::Real;

use super::model::ReservoirModel;
use super::{Architecture, LeakMode, ReservoirError};

pub const BLOB_MAGIC: [u8; 4] = *b"MDSA";
pub const HEADER_LEN: usize = 4 + 8 * 4 + 4 + 4 * 4;
const VERSION: u32 = 1;

fn arch_code(a: Architecture) -> u8 {
    match a {
        Architecture::Esn => 0,
        Architecture::Prc => 1,
        Architecture::Hybrid => 2,
    }
}

pub fn export_compact<T: Real>(model: &ReservoirModel<T>) -> Vec<u8> {
    let n_nodes = model.esn.as_ref().map_or(0, |e| e.n_nodes());
    let n_sensors = model.sensor_names.len();
    let w = &model.readout.w;
    let mut out =
        Vec::with_capacity(HEADER_LEN + 4 * (model.esn.as_ref().map_or(0, |e| e.a.len() + e.b.len()) + w.len()));
    out.extend_from_slice(&BLOB_MAGIC);
    for d in [
        VERSION,
        n_nodes as u32,
        n_sensors as u32,
        model.lags as u32,
        model.config.mux_stride as u32,
        w.cols() as u32,
        model.readout.n_channels as u32,
        model.readout.horizons.len() as u32,
    ] {
        out.extend_from_slice(&d.to_le_bytes());
    }
    let leak_mode = match model.config.leak_mode {
        LeakMode::Input => 0u8,
        LeakMode::State => 1,
    };
    out.extend_from_slice(&[arch_code(model.config.architecture), leak_mode, 0, 0]);
    for v in [
        model.config.spectral_radius as f32,
        model.config.leak as f32,
        model.config.input_scale as f32,
        model.mux_scale.as_f64() as f32,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut put = |xs: &[T]| {
        for v in xs {
            out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
        }
    };
    if let Some(e) = &model.esn {
        put(e.a.as_slice());
        put(e.b.as_slice());
    }
    put(w.as_slice());
    out
}

/// Streaming evaluator. Every buffer is allocated in [`CompactEvaluator::from_blob`];
/// [`CompactEvaluator::step`] only reads and writes them.
#[derive(Debug, Clone)]
pub struct CompactEvaluator {
    arch: Architecture,
    leak_mode: LeakMode,
    n_nodes: usize,
    n_sensors: usize,
    lags: usize,
    stride: usize,
    n_out: usize,
    pub n_channels: usize,
    pub n_horizons: usize,
    pub spectral_radius: f32,
    leak: f32,
    input_scale: f32,
    mux_scale: f32,
    a: Vec<f32>,
    b: Vec<f32>,
    w: Vec<f32>,
    // Ring buffer of raw sensor samples, `hist_len` rows of `n_sensors`.
    history: Vec<f32>,
    hist_len: usize,
    head: usize,
    filled: usize,
    u: Vec<f32>,
    u_leak: Vec<f32>,
    x: Vec<f32>,
    scratch: Vec<f32>,
    out: Vec<f32>,
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], ReservoirError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| ReservoirError::BlobCorrupt(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, ReservoirError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f32(&mut self) -> Result<f32, ReservoirError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>, ReservoirError> {
        let bytes = n
            .checked_mul(4)
            .ok_or_else(|| ReservoirError::BlobCorrupt("dimension overflow".into()))?;
        Ok(self
            .take(bytes)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }
}

impl CompactEvaluator {
    pub fn from_blob(blob: &[u8]) -> Result<Self, ReservoirError> {
        let corrupt = |m: &str| ReservoirError::BlobCorrupt(m.to_string());
        let mut r = Reader { buf: blob, pos: 0 };
        if r.take(4)? != BLOB_MAGIC {
            return Err(corrupt("bad magic"));
        }
        if r.u32()? != VERSION {
            return Err(corrupt("unknown version"));
        }
        let mut dims = [0usize; 7];
        for d in &mut dims {
            *d = r.u32()? as usize;
        }
        let [n_nodes, n_sensors, lags, stride, n_out, n_channels, n_horizons] = dims;
        let codes = r.take(4)?;
        let arch = match codes[0] {
            0 => Architecture::Esn,
            1 => Architecture::Prc,
            2 => Architecture::Hybrid,
            _ => return Err(corrupt("unknown architecture")),
        };
        let leak_mode = match codes[1] {
            0 => LeakMode::Input,
            1 => LeakMode::State,
            _ => return Err(corrupt("unknown leak mode")),
        };
        let spectral_radius = r.f32()?;
        let leak = r.f32()?;
        let input_scale = r.f32()?;
        let mux_scale = r.f32()?;
        if lags == 0 || stride == 0 || n_out != n_channels * n_horizons {
            return Err(corrupt("inconsistent dimensions"));
        }
        if arch.uses_states() != (n_nodes > 0) {
            return Err(corrupt("node count does not match architecture"));
        }
        let width = n_sensors * lags;
        let a = r.f32s(n_nodes * width)?;
        let b = r.f32s(n_nodes * n_nodes)?;
        let n_feat = n_nodes + if arch.uses_inputs() { width } else { 0 } + 1;
        let w = r.f32s(n_feat * n_out)?;
        if r.pos != blob.len() {
            return Err(corrupt("trailing bytes"));
        }
        let hist_len = (lags - 1) * stride + 1;
        Ok(Self {
            arch,
            leak_mode,
            n_nodes,
            n_sensors,
            lags,
            stride,
            n_out,
            n_channels,
            n_horizons,
            spectral_radius,
            leak,
            input_scale,
            mux_scale,
            a,
            b,
            w,
            history: vec![0.0; hist_len * n_sensors],
            hist_len,
            head: 0,
            filled: 0,
            u: vec![0.0; width],
            u_leak: vec![0.0; width],
            x: vec![0.0; n_nodes],
            scratch: vec![0.0; n_nodes],
            out: vec![0.0; n_out],
        })
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    pub fn n_outputs(&self) -> usize {
        self.n_out
    }

    /// Bytes held by weights and state buffers.
    pub fn working_set_bytes(&self) -> usize {
        4 * (self.a.len()
            + self.b.len()
            + self.w.len()
            + self.history.len()
            + self.u.len()
            + self.u_leak.len()
            + self.x.len()
            + self.scratch.len()
            + self.out.len())
    }

    /// Back to rest, as if no sample had been seen.
    pub fn reset(&mut self) {
        self.history.fill(0.0);
        self.u_leak.fill(0.0);
        self.x.fill(0.0);
        self.out.fill(0.0);
        self.head = 0;
        self.filled = 0;
    }

    /// Consumes one sensor sample and returns the readout outputs, laid
    /// out like the 64-bit model's prediction rows.
    ///
    /// # Panics
    /// If `sample` does not hold one value per sensor.
    pub fn step(&mut self, sample: &[f32]) -> &[f32] {
        assert_eq!(sample.len(), self.n_sensors, "one value per sensor");
        let ns = self.n_sensors;
        self.history[self.head * ns..(self.head + 1) * ns].copy_from_slice(sample);
        self.filled = (self.filled + 1).min(self.hist_len);
        for j in 0..self.lags {
            let back = j * self.stride;
            let present = back < self.filled;
            let slot = (self.head + self.hist_len - back % self.hist_len) % self.hist_len;
            for s in 0..ns {
                self.u[s * self.lags + j] = if present {
                    self.history[slot * ns + s] * self.mux_scale
                } else {
                    0.0
                };
            }
        }
        self.head = (self.head + 1) % self.hist_len;

        let n = self.n_nodes;
        if n > 0 {
            let width = self.u.len();
            let lam = self.leak;
            match self.leak_mode {
                LeakMode::Input => {
                    for (l, &v) in self.u_leak.iter_mut().zip(&self.u) {
                        *l = lam * *l + (1.0 - lam) * v;
                    }
                }
                LeakMode::State => self.u_leak.copy_from_slice(&self.u),
            }
            for i in 0..n {
                let ar = &self.a[i * width..(i + 1) * width];
                let br = &self.b[i * n..(i + 1) * n];
                let mut s = ar.iter().zip(&self.u_leak).map(|(w, v)| w * v).sum::<f32>() * self.input_scale;
                s += br.iter().zip(&self.x).map(|(w, v)| w * v).sum::<f32>();
                self.scratch[i] = s.tanh();
            }
            match self.leak_mode {
                LeakMode::Input => self.x.copy_from_slice(&self.scratch),
                LeakMode::State => {
                    for (xi, &s) in self.x.iter_mut().zip(&self.scratch) {
                        *xi = lam * *xi + (1.0 - lam) * s;
                    }
                }
            }
        }

        // Features are [x, u, 1]; W is row-major features × outputs.
        let m = self.n_out;
        self.out.fill(0.0);
        let mut row = 0;
        for &xi in &self.x {
            for (o, w) in self.out.iter_mut().zip(&self.w[row * m..(row + 1) * m]) {
                *o += xi * w;
            }
            row += 1;
        }
        if self.arch.uses_inputs() {
            for &ui in &self.u {
                for (o, w) in self.out.iter_mut().zip(&self.w[row * m..(row + 1) * m]) {
                    *o += ui * w;
                }
                row += 1;
            }
        }
        for (o, w) in self.out.iter_mut().zip(&self.w[row * m..(row + 1) * m]) {
            *o += w;
        }
        &self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir::{ReservoirConfig, TargetSeries};

    fn model(arch: Architecture, leak_mode: LeakMode) -> (ReservoirModel<f64>, Vec<Vec<f64>>) {
        let n = 1500;
        let s: Vec<Vec<f64>> = (0..2)
            .map(|k| (0..n).map(|t| ((t as f64) * (0.05 + 0.03 * k as f64)).sin()).collect())
            .collect();
        let y = TargetSeries {
            names: vec!["y".into()],
            data: vec![(0..n).map(|t| (t as f64 * 0.05).cos()).collect()],
        };
        let cfg = ReservoirConfig {
            n_nodes: 20,
            mux_horizon_s: 0.5,
            architecture: arch,
            leak: 0.3,
            leak_mode,
            ..Default::default()
        };
        let names = vec!["a".to_string(), "b".to_string()];
        (
            ReservoirModel::fit(&cfg, 60.0, &names, &s, &y, &[0.0, 0.5], 200).unwrap(),
            s,
        )
    }

    #[test]
    fn round_trip_matches_reference() {
        for arch in [Architecture::Esn, Architecture::Prc, Architecture::Hybrid] {
            for lm in [LeakMode::Input, LeakMode::State] {
                let (m, s) = model(arch, lm);
                let blob = export_compact(&m);
                let esn_len = m.esn.as_ref().map_or(0, |e| e.a.len() + e.b.len());
                assert_eq!(blob.len(), HEADER_LEN + 4 * (esn_len + m.readout.w.len()));
                let mut ev = CompactEvaluator::from_blob(&blob).unwrap();
                let reference = m.predict(&s).unwrap().data;
                for t in 0..600 {
                    let sample = [s[0][t] as f32, s[1][t] as f32];
                    let out = ev.step(&sample);
                    for (o, &r) in out.iter().zip(reference.row(t)) {
                        assert!(
                            (*o as f64 - r).abs() <= 1e-4 * r.abs().max(1.0),
                            "{arch:?} {lm:?} t={t}"
                        );
                    }
                }
                ev.reset();
                let first = ev.step(&[s[0][0] as f32, s[1][0] as f32])[0];
                assert!((first as f64 - reference[(0, 0)]).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn corrupt_blobs_rejected() {
        let (m, _) = model(Architecture::Hybrid, LeakMode::Input);
        let blob = export_compact(&m);
        let mut bad = blob.clone();
        bad[0] = b'X';
        assert!(matches!(
            CompactEvaluator::from_blob(&bad),
            Err(ReservoirError::BlobCorrupt(_))
        ));
        assert!(matches!(
            CompactEvaluator::from_blob(&blob[..blob.len() - 4]),
            Err(ReservoirError::BlobCorrupt(_))
        ));
        let mut extra = blob.clone();
        extra.push(0);
        assert!(matches!(
            CompactEvaluator::from_blob(&extra),
            Err(ReservoirError::BlobCorrupt(_))
        ));
        let mut dims = blob;
        dims[8..12].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(
            CompactEvaluator::from_blob(&dims),
            Err(ReservoirError::BlobCorrupt(_))
        ));
    }
}
