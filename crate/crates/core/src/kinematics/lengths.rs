use crate::ingest::{MarkerId, TrialRecording};
use crate::scalar::Real;

/// Outer–inner pairs on the same spoke.
pub const RADIAL: [(MarkerId, MarkerId); 4] = [
    (MarkerId::R1, MarkerId::R2),
    (MarkerId::Y1, MarkerId::Y2),
    (MarkerId::O1, MarkerId::O2),
    (MarkerId::B1, MarkerId::B2),
];

/// Adjacent outer pairs around the bell margin.
pub const CORONAL: [(MarkerId, MarkerId); 4] = [
    (MarkerId::R1, MarkerId::Y1),
    (MarkerId::Y1, MarkerId::O1),
    (MarkerId::O1, MarkerId::B1),
    (MarkerId::R1, MarkerId::B1),
];

/// Channel name of an unordered pair, lower marker index first.
pub fn pair_name(a: MarkerId, b: MarkerId) -> String {
    let (p, q) = if a.index() <= b.index() { (a, b) } else { (b, a) };
    format!("{}-{}", p.name(), q.name())
}

/// All 28 pairwise marker distances over time (mm), channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthSeries<T> {
    pub names: Vec<String>,
    pub pairs: Vec<(MarkerId, MarkerId)>,
    pub data: Vec<Vec<T>>,
}

impl<T: Real> LengthSeries<T> {
    pub fn len(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index_of(&self, a: MarkerId, b: MarkerId) -> usize {
        let name = pair_name(a, b);
        self.names
            .iter()
            .position(|n| *n == name)
            .expect("every pair is present")
    }

    pub fn channel(&self, a: MarkerId, b: MarkerId) -> &[T] {
        &self.data[self.index_of(a, b)]
    }

    pub fn by_name(&self, name: &str) -> Option<&[T]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.data[i].as_slice())
    }

    pub fn radial(&self) -> Vec<&[T]> {
        RADIAL.iter().map(|&(a, b)| self.channel(a, b)).collect()
    }

    pub fn coronal(&self) -> Vec<&[T]> {
        CORONAL.iter().map(|&(a, b)| self.channel(a, b)).collect()
    }
}

/// Euclidean distances for every unordered marker pair on every frame;
/// invalid frames yield `NaN`.
pub fn pairwise_lengths<T: Real>(trial: &TrialRecording<T>) -> LengthSeries<T> {
    let mut pairs = Vec::with_capacity(28);
    for i in 0..8 {
        for j in (i + 1)..8 {
            pairs.push((MarkerId::ALL[i], MarkerId::ALL[j]));
        }
    }
    let names = pairs.iter().map(|&(a, b)| pair_name(a, b)).collect();
    let data = pairs
        .iter()
        .map(|&(a, b)| {
            trial
                .frames
                .iter()
                .zip(&trial.valid)
                .map(|(fr, &ok)| {
                    if ok {
                        fr[a.index()].distance(fr[b.index()])
                    } else {
                        T::nan()
                    }
                })
                .collect()
        })
        .collect();
    LengthSeries { names, pairs, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;
    use crate::ingest::Condition;

    fn trial_of(frames: Vec<[Vec3<f64>; 8]>) -> TrialRecording<f64> {
        let n = frames.len();
        TrialRecording {
            animal_id: "t".into(),
            condition: Condition::Spontaneous,
            frame_rate: 60.0,
            frames,
            stimulus: vec![false; n],
            valid: vec![true; n],
        }
    }

    #[test]
    fn twenty_eight_disjoint_named_channels() {
        let l = pairwise_lengths(&trial_of(vec![[Vec3::zero(); 8]]));
        assert_eq!(l.names.len(), 28);
        let radial: Vec<String> = RADIAL.iter().map(|&(a, b)| pair_name(a, b)).collect();
        let coronal: Vec<String> = CORONAL.iter().map(|&(a, b)| pair_name(a, b)).collect();
        assert!(radial.iter().all(|r| !coronal.contains(r)));
        assert_eq!(coronal[3], "R1-B1");
        assert!(l.data.iter().all(|c| c[0] == 0.0));
    }

    #[test]
    fn unit_cube_lengths() {
        let mut fr = [Vec3::zero(); 8];
        for (i, p) in fr.iter_mut().enumerate() {
            *p = Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64);
        }
        let l = pairwise_lengths(&trial_of(vec![fr]));
        let allowed = [1.0, 2f64.sqrt(), 3f64.sqrt()];
        for c in &l.data {
            assert!(allowed.iter().any(|a| (a - c[0]).abs() < 1e-12), "{}", c[0]);
        }
    }

    #[test]
    fn invalid_frames_give_nan() {
        let mut t = trial_of(vec![[Vec3::zero(); 8]; 2]);
        t.valid[1] = false;
        let l = pairwise_lengths(&t);
        assert!(l.data[0][1].is_nan());
        assert_eq!(l.data[0][0], 0.0);
    }
}
