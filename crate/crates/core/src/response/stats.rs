use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use super::ResponseError;

pub const DEFAULT_PERMUTATIONS: usize = 10_000;
const PERMUTATION_CHUNK: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnovaResult {
    pub f: f64,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseResult {
    pub i: usize,
    pub j: usize,
    pub mean_diff: f64,
    pub t: f64,
    pub df: f64,
    /// Two-sided Welch t-test, unadjusted.
    pub p_welch: f64,
    /// Tukey–Kramer studentized range statistic.
    pub q: f64,
    /// Familywise p from the permutation null of the maximum `q`.
    pub p_tukey: f64,
}

fn moments(g: &[f64]) -> (f64, f64) {
    let n = g.len() as f64;
    let m = g.iter().sum::<f64>() / n;
    let ss = g.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    (m, ss)
}

fn check(groups: &[Vec<f64>]) -> Result<(), ResponseError> {
    if groups.len() < 2 || groups.iter().any(|g| g.len() < 2) {
        return Err(ResponseError::TooFewSamples);
    }
    Ok(())
}

/// Classical one-way ANOVA with the p-value from the F distribution.
pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<AnovaResult, ResponseError> {
    check(groups)?;
    let n: usize = groups.iter().map(Vec::len).sum();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let (mut ssb, mut ssw) = (0.0, 0.0);
    for g in groups {
        let (m, ss) = moments(g);
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += ss;
    }
    let scale = groups.iter().flatten().fold(0.0f64, |a, x| a.max((x - grand).abs()));
    if ssw <= (scale * 1e-12).powi(2) * n as f64 {
        return Err(ResponseError::DegenerateGroups);
    }
    let (dfb, dfw) = (groups.len() - 1, n - groups.len());
    let f = (ssb / dfb as f64) / (ssw / dfw as f64);
    let dist = FisherSnedecor::new(dfb as f64, dfw as f64).expect("positive degrees of freedom");
    Ok(AnovaResult {
        f,
        p: dist.sf(f),
        df_between: dfb,
        df_within: dfw,
    })
}

fn welch(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let (ma, ssa) = moments(a);
    let (mb, ssb) = moments(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (ssa / (na - 1.0) / na, ssb / (nb - 1.0) / nb);
    let se2 = va + vb;
    if se2 == 0.0 {
        let t = if ma == mb { 0.0 } else { f64::INFINITY.copysign(ma - mb) };
        return (t, na + nb - 2.0, if ma == mb { 1.0 } else { 0.0 });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (t, df, 2.0 * dist.sf(t.abs()))
}

/// Tukey–Kramer `q` for every pair, given group sizes and a pooled sample.
fn range_stats(values: &[f64], sizes: &[usize], out: &mut Vec<f64>) {
    out.clear();
    let mut means = Vec::with_capacity(sizes.len());
    let mut ssw = 0.0;
    let mut start = 0;
    for &s in sizes {
        let (m, ss) = moments(&values[start..start + s]);
        means.push(m);
        ssw += ss;
        start += s;
    }
    let msw = ssw / (values.len() - sizes.len()) as f64;
    for i in 0..sizes.len() {
        for j in (i + 1)..sizes.len() {
            let se = (msw / 2.0 * (1.0 / sizes[i] as f64 + 1.0 / sizes[j] as f64)).sqrt();
            out.push((means[i] - means[j]).abs() / se);
        }
    }
}

/// Welch t-tests for every pair plus Tukey-style familywise p-values from
/// `permutations` random relabelings of the pooled samples.
///
/// The permutations are split into fixed chunks, each with its own ChaCha
/// stream derived from `seed`, so the result does not depend on the thread
/// count.
pub fn pairwise_tests(
    groups: &[Vec<f64>],
    permutations: usize,
    seed: u64,
) -> Result<Vec<PairwiseResult>, ResponseError> {
    check(groups)?;
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    let ssw: f64 = groups.iter().map(|g| moments(g).1).sum();
    if ssw == 0.0 {
        return Err(ResponseError::DegenerateGroups);
    }
    let mut observed = Vec::new();
    range_stats(&pooled, &sizes, &mut observed);

    let chunks = permutations.div_ceil(PERMUTATION_CHUNK);
    let exceed: Vec<usize> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut perm = pooled.clone();
            let mut qs = Vec::with_capacity(observed.len());
            let mut counts = vec![0usize; observed.len()];
            let todo = PERMUTATION_CHUNK.min(permutations - c * PERMUTATION_CHUNK);
            for _ in 0..todo {
                perm.shuffle(&mut rng);
                range_stats(&perm, &sizes, &mut qs);
                let max = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                for (k, &q) in observed.iter().enumerate() {
                    if max >= q - 1e-12 * q.abs() {
                        counts[k] += 1;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0usize; observed.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let mut out = Vec::with_capacity(observed.len());
    let mut k = 0;
    for i in 0..groups.len() {
        for j in (i + 1)..groups.len() {
            let (t, df, p_welch) = welch(&groups[i], &groups[j]);
            let mean_diff = moments(&groups[i]).0 - moments(&groups[j]).0;
            out.push(PairwiseResult {
                i,
                j,
                mean_diff,
                t,
                df,
                p_welch,
                q: observed[k],
                p_tukey: (1 + exceed[k]) as f64 / (1 + permutations) as f64,
            });
            k += 1;
        }
    }
    Ok(out)
}
