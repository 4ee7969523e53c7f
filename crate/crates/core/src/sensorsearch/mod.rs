//! Exhaustive best-subset search over candidate sensors for linear
//! (physical-reservoir) readouts.
//!
//! All subsets share one Gram matrix of the sensors plus a bias column.
//! The search walks subsets depth first and extends a Cholesky factor by
//! one row per added sensor, so each subset costs `O(k²)` per task.

mod gram;

use std::collections::HashSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ingest::TrialRecording;
use crate::kinematics::{body_frame, lowpass_3hz, pairwise_lengths, standardize, KinematicsError};
use crate::scalar::Real;

pub use gram::{direct_subset_r2, GramSystem};

/// Subsets whose scores differ by less than this are ties.
pub const TIE_TOLERANCE: f64 = 1e-10;
/// Largest subset size searched by default.
pub const DEFAULT_K_MAX: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("subset size {k_max} outside 1..={pool}")]
    InvalidKMax { k_max: usize, pool: usize },
    #[error("task {0:?} has a constant target")]
    DegenerateTask(String),
    #[error("series lengths differ ({0})")]
    LengthMismatch(String),
    #[error("{rows} rows after washout, need at least {min}")]
    TooShort { rows: usize, min: usize },
    #[error("sensor names are not unique")]
    DuplicateName,
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// Named candidate sensors, channel-major and aligned in time.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorPool<T> {
    pub names: Vec<String>,
    pub data: Vec<Vec<T>>,
}

impl<T: Real> SensorPool<T> {
    pub fn new(names: Vec<String>, data: Vec<Vec<T>>) -> Result<Self, SearchError> {
        if names.iter().collect::<HashSet<_>>().len() != names.len() {
            return Err(SearchError::DuplicateName);
        }
        let n = data.first().map_or(0, Vec::len);
        if names.len() != data.len() || data.iter().any(|d| d.len() != n) {
            return Err(SearchError::LengthMismatch("sensor pool".into()));
        }
        Ok(Self { names, data })
    }

    /// The 28 marker-to-marker lengths and both ring radii, each low-passed
    /// at 3 Hz and standardized.
    pub fn from_trial(trial: &TrialRecording<T>) -> Result<Self, SearchError> {
        let lengths = pairwise_lengths(trial);
        let pose = body_frame(trial)?;
        let mut names = lengths.names.clone();
        let mut raw = lengths.data;
        names.push("inner_radius".into());
        raw.push(pose.inner_radius);
        names.push("outer_radius".into());
        raw.push(pose.outer_radius);
        let data = raw
            .iter()
            .map(|c| lowpass_3hz(c, trial.frame_rate).and_then(|f| standardize(&f)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(names, data)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn samples(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Channels by name, in the order asked for.
    pub fn select(&self, names: &[&str]) -> Option<Vec<Vec<T>>> {
        names
            .iter()
            .map(|n| self.index_of(n).map(|i| self.data[i].clone()))
            .collect()
    }
}

/// All non-empty subsets of `0..pool_size` with at most `k_max` members,
/// in lexicographic order (`[0], [0,1], [0,1,2], …, [1], …`).
pub fn enumerate_subsets(pool_size: usize, k_max: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut stack: Vec<usize> = Vec::with_capacity(k_max);
    let mut started = false;
    std::iter::from_fn(move || {
        if k_max == 0 || pool_size == 0 {
            return None;
        }
        if !started {
            started = true;
            stack.push(0);
            return Some(stack.clone());
        }
        // Descend if possible, otherwise advance the deepest index that can move.
        let last = *stack.last().expect("non-empty while iterating");
        if stack.len() < k_max && last + 1 < pool_size {
            stack.push(last + 1);
            return Some(stack.clone());
        }
        while let Some(top) = stack.pop() {
            if top + 1 < pool_size {
                stack.push(top + 1);
                return Some(stack.clone());
            }
        }
        None
    })
}

/// `Σ_{k=1..k_max} C(n, k)`.
pub fn subset_count(pool_size: usize, k_max: usize) -> u64 {
    let mut total = 0u64;
    let mut c = 1u64;
    for k in 1..=k_max.min(pool_size) {
        c = c * (pool_size - k + 1) as u64 / k as u64;
        total += c;
    }
    total
}

#[derive(Debug, Clone)]
pub struct SearchTask<T> {
    pub name: String,
    pub target: Vec<T>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskBest {
    pub task: String,
    pub subset: Vec<usize>,
    pub sensors: Vec<String>,
    pub r2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SensorSearchReport {
    pub sensor_names: Vec<String>,
    pub k_max: usize,
    pub washout: usize,
    pub best: Vec<TaskBest>,
    /// Per pool sensor: how many task winners contain it.
    pub tally: Vec<usize>,
    pub subsets_evaluated: u64,
    /// Subsets skipped because a sensor was collinear with the others.
    pub subsets_degenerate: u64,
    /// Size of the shared Gram matrix (sensors plus bias).
    pub gram_dim: usize,
    /// Factor rows appended; one per visited subset.
    pub cholesky_extensions: u64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone)]
struct Candidate {
    r2: f64,
    subset: Vec<usize>,
}

/// True if `a` beats `b`: higher score, or a tie broken by fewer sensors
/// and then by lexicographic order.
fn better(a: &Candidate, b: &Candidate) -> bool {
    if a.r2 > b.r2 + TIE_TOLERANCE {
        return true;
    }
    if a.r2 < b.r2 - TIE_TOLERANCE {
        return false;
    }
    (a.subset.len(), &a.subset) < (b.subset.len(), &b.subset)
}

struct Walker<'a> {
    sys: &'a GramSystem,
    k_max: usize,
    // Factor of the bias plus the current subset, row-major, stride `k_max + 1`.
    l: Vec<f64>,
    // Forward-solved cross moments per task, stride `k_max + 1`.
    z: Vec<f64>,
    // Running Σz² per task per depth.
    zz: Vec<f64>,
    subset: Vec<usize>,
    best: Vec<Option<Candidate>>,
    evaluated: u64,
    degenerate: u64,
}

impl<'a> Walker<'a> {
    fn new(sys: &'a GramSystem, k_max: usize) -> Self {
        let dim = k_max + 1;
        let nt = sys.n_tasks();
        let mut w = Self {
            sys,
            k_max,
            l: vec![0.0; dim * dim],
            z: vec![0.0; nt * dim],
            zz: vec![0.0; nt * dim],
            subset: Vec::with_capacity(k_max),
            best: vec![None; nt],
            evaluated: 0,
            degenerate: 0,
        };
        // Row 0 is the bias alone.
        let b = sys.bias_index();
        let d = sys.g(b, b).sqrt();
        w.l[0] = d;
        for t in 0..nt {
            let z0 = sys.c(t, b) / d;
            w.z[t * dim] = z0;
            w.zz[t * dim] = z0 * z0;
        }
        w
    }

    /// Appends sensor `j` as factor row `k = subset.len() + 1`. False if
    /// it is collinear with the rows already present.
    fn push(&mut self, j: usize) -> bool {
        let dim = self.k_max + 1;
        let k = self.subset.len() + 1;
        let sys = self.sys;
        let cols = |i: usize| if i == 0 { sys.bias_index() } else { self.subset[i - 1] };
        let mut norm = 0.0;
        for i in 0..k {
            let mut s = sys.g(j, cols(i));
            for m in 0..i {
                s -= self.l[k * dim + m] * self.l[i * dim + m];
            }
            let v = s / self.l[i * dim + i];
            self.l[k * dim + i] = v;
            norm += v * v;
        }
        let gjj = sys.g(j, j);
        let d2 = gjj - norm;
        if !(d2 > gjj * 1e-10) {
            return false;
        }
        let d = d2.sqrt();
        self.l[k * dim + k] = d;
        for t in 0..sys.n_tasks() {
            let mut s = sys.c(t, j);
            for m in 0..k {
                s -= self.l[k * dim + m] * self.z[t * dim + m];
            }
            let zk = s / d;
            self.z[t * dim + k] = zk;
            self.zz[t * dim + k] = self.zz[t * dim + k - 1] + zk * zk;
        }
        self.subset.push(j);
        true
    }

    fn score(&mut self) {
        self.evaluated += 1;
        let dim = self.k_max + 1;
        let k = self.subset.len();
        for t in 0..self.sys.n_tasks() {
            let r2 = self.sys.r2_from_explained(t, self.zz[t * dim + k]);
            let cand = Candidate {
                r2,
                subset: self.subset.clone(),
            };
            if self.best[t].as_ref().is_none_or(|b| better(&cand, b)) {
                self.best[t] = Some(cand);
            }
        }
    }

    fn descend(&mut self) {
        let start = self.subset.last().map_or(0, |&s| s + 1);
        for j in start..self.sys.n_sensors() {
            if self.push(j) {
                self.score();
                if self.subset.len() < self.k_max {
                    self.descend();
                }
                self.subset.pop();
            } else {
                self.degenerate += subset_count(self.sys.n_sensors() - j - 1, self.k_max - self.subset.len() - 1) + 1;
            }
        }
    }
}

/// Best subset per task by post-washout R² of a linear readout with bias.
pub fn search_best<T: Real>(
    pool: &SensorPool<T>,
    tasks: &[SearchTask<T>],
    k_max: usize,
    washout: usize,
) -> Result<SensorSearchReport, SearchError> {
    let started = Instant::now();
    if k_max == 0 || k_max > pool.len() {
        return Err(SearchError::InvalidKMax {
            k_max,
            pool: pool.len(),
        });
    }
    let sys = GramSystem::new(pool, tasks, washout)?;
    let roots: Vec<(Vec<Option<Candidate>>, u64, u64)> = (0..pool.len())
        .into_par_iter()
        .map(|root| {
            let mut w = Walker::new(&sys, k_max);
            if w.push(root) {
                w.score();
                if k_max > 1 {
                    w.descend();
                }
            } else {
                w.degenerate += subset_count(pool.len() - root - 1, k_max - 1) + 1;
            }
            (w.best, w.evaluated, w.degenerate)
        })
        .collect();

    let mut best: Vec<Option<Candidate>> = vec![None; tasks.len()];
    let (mut evaluated, mut degenerate) = (0, 0);
    for (b, e, d) in roots {
        evaluated += e;
        degenerate += d;
        for (slot, cand) in best.iter_mut().zip(b) {
            if let Some(c) = cand {
                if slot.as_ref().is_none_or(|s| better(&c, s)) {
                    *slot = Some(c);
                }
            }
        }
    }
    let mut tally = vec![0; pool.len()];
    let best: Vec<TaskBest> = best
        .into_iter()
        .zip(tasks)
        .map(|(c, task)| {
            let c = c.unwrap_or(Candidate {
                r2: f64::NEG_INFINITY,
                subset: Vec::new(),
            });
            for &s in &c.subset {
                tally[s] += 1;
            }
            TaskBest {
                task: task.name.clone(),
                sensors: c.subset.iter().map(|&s| pool.names[s].clone()).collect(),
                subset: c.subset,
                r2: c.r2,
            }
        })
        .collect();
    Ok(SensorSearchReport {
        sensor_names: pool.names.clone(),
        k_max,
        washout,
        best,
        tally,
        subsets_evaluated: evaluated,
        subsets_degenerate: degenerate,
        gram_dim: pool.len() + 1,
        cholesky_extensions: evaluated,
        elapsed_s: started.elapsed().as_secs_f64(),
    })
}

/// The `n` most frequent sensors across task winners, ties by name.
pub fn top_sensors(report: &SensorSearchReport, n: usize) -> Vec<String> {
    let mut order: Vec<usize> = (0..report.sensor_names.len()).collect();
    order.sort_by(|&a, &b| {
        report.tally[b]
            .cmp(&report.tally[a])
            .then_with(|| report.sensor_names[a].cmp(&report.sensor_names[b]))
    });
    order
        .into_iter()
        .take(n)
        .map(|i| report.sensor_names[i].clone())
        .collect()
}
