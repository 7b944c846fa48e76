//! Residual reports and reproducible sample-point generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// One evaluated sample.
#[derive(Clone, Debug, Serialize)]
pub struct Sample {
    pub point: Vec<f64>,
    pub residual: f64,
}

/// The universal output of a verification run: per-sample residual norms,
/// max/mean statistics, and the tolerance verdict.
#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub samples: Vec<Sample>,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub verdict: bool,
}

impl ResidualReport {
    /// Builds a report; the verdict is `max_residual <= tolerance`. Samples
    /// with non-finite residuals fail the verdict unconditionally.
    pub fn new(samples: Vec<Sample>, tolerance: f64) -> Self {
        let finite = samples.iter().all(|s| s.residual.is_finite());
        let max_residual = samples
            .iter()
            .map(|s| s.residual)
            .fold(f64::NEG_INFINITY, f64::max);
        let mean_residual = if samples.is_empty() {
            0.0
        } else {
            samples.iter().map(|s| s.residual).sum::<f64>() / samples.len() as f64
        };
        let verdict = finite && !samples.is_empty() && max_residual <= tolerance;
        Self {
            samples,
            max_residual,
            mean_residual,
            tolerance,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict
    }
}

/// Deterministic points in the annulus `r_min <= |x| <= r_max` of R^dim.
/// Directions come from normalized Gaussian draws (Box-Muller), radii from a
/// uniform draw; the stream is fixed by `seed`.
pub fn annulus_points(
    dim: usize,
    count: usize,
    r_min: f64,
    r_max: f64,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let dir: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
        let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n < 1e-8 {
            continue;
        }
        let r = if r_max > r_min {
            rng.gen_range(r_min..r_max)
        } else {
            r_min
        };
        out.push(dir.into_iter().map(|v| v / n * r).collect());
    }
    out
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller from two uniform draws.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
