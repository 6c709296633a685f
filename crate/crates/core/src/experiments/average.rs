use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean and standard error of a vector observable over realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Averaged {
    pub mean: Vec<f64>,
    /// `None` when only one realization was run.
    pub stderr: Option<Vec<f64>>,
    pub samples: usize,
}

impl Averaged {
    /// Reduce samples in the order given (Welford).
    pub fn from_samples(samples: &[Vec<f64>]) -> Result<Self> {
        let first = samples.first().ok_or_else(|| Error::domain("no samples to average"))?;
        let dim = first.len();
        let mut mean = vec![0.0; dim];
        let mut m2 = vec![0.0; dim];
        for (k, s) in samples.iter().enumerate() {
            if s.len() != dim {
                return Err(Error::domain("observable length changed between realizations"));
            }
            let n = (k + 1) as f64;
            for j in 0..dim {
                let d = s[j] - mean[j];
                mean[j] += d / n;
                m2[j] += d * (s[j] - mean[j]);
            }
        }
        let n = samples.len();
        let stderr = (n > 1).then(|| m2.iter().map(|v| (v / ((n - 1) * n) as f64).sqrt()).collect());
        Ok(Self {
            mean,
            stderr,
            samples: n,
        })
    }

    pub fn stderr_or_nan(&self, j: usize) -> f64 {
        self.stderr.as_ref().map_or(f64::NAN, |s| s[j])
    }
}

/// Run `task(point, realization)` over the full grid in parallel and average
/// each point over realizations 0..n in realization order. The result is
/// independent of the number of threads.
pub fn average_grid<F>(n_points: usize, n_realizations: usize, task: F) -> Result<Vec<Averaged>>
where
    F: Fn(usize, u64) -> Result<Vec<f64>> + Sync,
{
    if n_realizations == 0 {
        return Err(Error::domain("need at least one realization"));
    }
    let results: Vec<Result<Vec<f64>>> = (0..n_points * n_realizations)
        .into_par_iter()
        .map(|idx| task(idx / n_realizations, (idx % n_realizations) as u64))
        .collect();
    let mut flat = Vec::with_capacity(results.len());
    for r in results {
        flat.push(r?);
    }
    flat.chunks(n_realizations).map(Averaged::from_samples).collect()
}

/// Mean and standard error of `runner(seed, realization)` over
/// `n_realizations` independently seeded realizations.
pub fn disorder_average<F>(runner: F, n_realizations: usize, seed: u64) -> Result<Averaged>
where
    F: Fn(u64, u64) -> Result<Vec<f64>> + Sync,
{
    let mut v = average_grid(1, n_realizations, |_, r| runner(seed, r))?;
    Ok(v.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::realization_rng;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian(seed: u64, r: u64) -> Result<Vec<f64>> {
        let mut rng = realization_rng(seed, r);
        Ok(vec![rng.sample::<f64, _>(StandardNormal)])
    }

    #[test]
    fn single_realization_has_no_error_bar() {
        let a = disorder_average(gaussian, 1, 3).unwrap();
        assert!(a.stderr.is_none());
        assert!(a.stderr_or_nan(0).is_nan());
    }

    #[test]
    fn constant_observable_has_zero_spread() {
        let a = disorder_average(|_, _| Ok(vec![0.3, 1.0]), 10, 0).unwrap();
        assert_eq!(a.mean, vec![0.3, 1.0]);
        assert!(a.stderr.unwrap().iter().all(|&s| s.abs() < 1e-15));
    }

    #[test]
    fn error_scales_as_inverse_sqrt_n() {
        let a = disorder_average(gaussian, 400, 11).unwrap();
        let b = disorder_average(gaussian, 1600, 11).unwrap();
        let ratio = a.stderr.unwrap()[0] / b.stderr.unwrap()[0];
        assert!((ratio - 2.0).abs() < 0.6, "{ratio}");
    }

    #[test]
    fn matches_two_pass_statistics() {
        let samples: Vec<Vec<f64>> = (0..7).map(|k| vec![(k * k) as f64 * 0.1]).collect();
        let a = Averaged::from_samples(&samples).unwrap();
        let m = samples.iter().map(|s| s[0]).sum::<f64>() / 7.0;
        let v = samples.iter().map(|s| (s[0] - m).powi(2)).sum::<f64>() / 6.0;
        assert!((a.mean[0] - m).abs() < 1e-14);
        assert!((a.stderr.unwrap()[0] - (v / 7.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| average_grid(5, 37, |p, r| Ok(vec![gaussian(p as u64, r)?[0].sin()])).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn errors_propagate() {
        let r = average_grid(3, 2, |p, _| if p == 1 { Err(Error::Singular) } else { Ok(vec![0.0]) });
        assert!(matches!(r, Err(Error::Singular)));
    }
}
