//! Averages of the pair correlation over observers drawn from a disc.

use std::f64::consts::PI;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::{pair_correlation_fast, CorrelationSpec};
use crate::error::{invalid, Error, Result};
use crate::lattice::Observer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub x0: f64,
    pub y0: f64,
    pub r0: f64,
}

impl Disc {
    pub fn new(x0: f64, y0: f64, r0: f64) -> Result<Self> {
        if !((0.0..1.0).contains(&x0) && (0.0..1.0).contains(&y0)) {
            return Err(invalid(format!("disc centre ({x0}, {y0}) must lie in [0,1)^2")));
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(invalid(format!("disc radius {r0} must be positive")));
        }
        Ok(Self { x0, y0, r0 })
    }

    /// Whether part of the disc lies outside the unit square.
    pub fn spills_over(&self) -> bool {
        self.x0 - self.r0 < 0.0 || self.y0 - self.r0 < 0.0 || self.x0 + self.r0 >= 1.0 || self.y0 + self.r0 >= 1.0
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.x0, y - self.y0);
        dx * dx + dy * dy <= self.r0 * self.r0
    }

    pub fn area(&self) -> f64 {
        PI * self.r0 * self.r0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageReport {
    pub radius: u64,
    pub lambda: f64,
    pub sample_count: usize,
    pub mean: f64,
    pub standard_error: f64,
    /// The limiting constant `2πλ/3`.
    pub theory: f64,
    /// `None` for grid averages.
    pub seed: Option<u64>,
}

impl AverageReport {
    pub fn abs_error(&self) -> f64 {
        (self.mean - self.theory).abs()
    }
}

pub fn limiting_average(lambda: f64) -> f64 {
    2.0 * PI * lambda / 3.0
}

/// Uniform points of the disc by rejection from its bounding square.
///
/// Observers outside `[0,1)^2` are kept as they are; a spill-over disc is logged.
pub fn sample_disc(disc: &Disc, count: usize, seed: u64) -> Result<Vec<Observer>> {
    if disc.spills_over() {
        warn!("disc ({}, {}, {}) extends outside the unit square; observers are used as drawn", disc.x0, disc.y0, disc.r0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = disc.x0 + disc.r0 * (2.0 * rng.gen::<f64>() - 1.0);
        let y = disc.y0 + disc.r0 * (2.0 * rng.gen::<f64>() - 1.0);
        if disc.contains(x, y) {
            out.push(Observer::anywhere(x, y)?);
        }
    }
    Ok(out)
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Pair correlation at each observer, in input order.
pub fn pair_correlation_at(observers: &[Observer], radius: u64, lambda: f64) -> Result<Vec<f64>> {
    observers
        .par_iter()
        .map(|&obs| Ok(pair_correlation_fast(&CorrelationSpec::pair(radius, lambda, obs)?)?.value))
        .collect()
}

/// Monte Carlo mean of the pair correlation over `samples` uniform observers.
///
/// Evaluations run in parallel but are reduced in sample order, so a fixed
/// seed reproduces the report bit for bit.
pub fn average_pair_correlation(disc: &Disc, radius: u64, lambda: f64, samples: usize, seed: u64) -> Result<AverageReport> {
    if samples < 2 {
        return Err(invalid("at least 2 samples are needed for a standard error"));
    }
    let observers = sample_disc(disc, samples, seed)?;
    let values = pair_correlation_at(&observers, radius, lambda)?;
    let (mean, standard_error) = mean_and_stderr(&values);
    Ok(AverageReport {
        radius,
        lambda,
        sample_count: samples,
        mean,
        standard_error,
        theory: limiting_average(lambda),
        seed: Some(seed),
    })
}

/// Grid points `(x0 + i h, y0 + j h)` inside the disc; the grid is anchored at the centre.
pub fn disc_grid(disc: &Disc, step: f64) -> Result<Vec<Observer>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid(format!("grid step {step} must be positive")));
    }
    let k = (disc.r0 / step).floor() as i64;
    let mut out = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            let (x, y) = (disc.x0 + i as f64 * step, disc.y0 + j as f64 * step);
            if disc.contains(x, y) {
                out.push(Observer::anywhere(x, y)?);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Empty("grid has no points inside the disc".into()));
    }
    Ok(out)
}

/// Equal-weight mean over the grid cells centred inside the disc.
pub fn grid_average_pair_correlation(disc: &Disc, radius: u64, lambda: f64, grid_step: f64) -> Result<AverageReport> {
    let observers = disc_grid(disc, grid_step)?;
    let values = pair_correlation_at(&observers, radius, lambda)?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(AverageReport {
        radius,
        lambda,
        sample_count: values.len(),
        mean,
        standard_error: 0.0,
        theory: limiting_average(lambda),
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc() -> Disc {
        Disc::new(0.5, 0.5, 0.25).unwrap()
    }

    #[test]
    fn disc_validation() {
        assert!(Disc::new(1.0, 0.5, 0.1).is_err());
        assert!(Disc::new(0.5, 0.5, 0.0).is_err());
        assert!(!disc().spills_over());
        assert!(Disc::new(0.1, 0.5, 0.25).unwrap().spills_over());
    }

    #[test]
    fn sampling_is_deterministic_and_inside() {
        assert!(sample_disc(&disc(), 0, 3).unwrap().is_empty());
        let a = sample_disc(&disc(), 10, 3).unwrap();
        assert_eq!(a, sample_disc(&disc(), 10, 3).unwrap());
        assert_ne!(a, sample_disc(&disc(), 10, 4).unwrap());
        assert!(a.iter().all(|o| disc().contains(o.x, o.y)));
    }

    #[test]
    fn sample_mean_near_centre() {
        let pts = sample_disc(&disc(), 100_000, 9).unwrap();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|o| o.x).sum::<f64>() / n;
        let my = pts.iter().map(|o| o.y).sum::<f64>() / n;
        // Each coordinate has variance r0^2 / 4 under the uniform law.
        let sigma = 0.25 / 2.0 / n.sqrt();
        assert!((mx - 0.5).abs() < 3.0 * sigma && (my - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn theory_and_reproducibility() {
        let a = average_pair_correlation(&disc(), 20, 1.0, 8, 1).unwrap();
        assert_eq!(a.theory, 2.0 * PI / 3.0);
        let b = average_pair_correlation(&disc(), 20, 1.0, 8, 1).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert!(a.standard_error >= 0.0);
        assert!(average_pair_correlation(&disc(), 20, 1.0, 1, 1).is_err());
    }

    #[test]
    fn coarse_grid_is_the_centre() {
        let r = grid_average_pair_correlation(&disc(), 15, 1.0, 1.0).unwrap();
        let centre = pair_correlation_fast(&CorrelationSpec::pair(15, 1.0, Observer::new(0.5, 0.5).unwrap()).unwrap()).unwrap();
        assert_eq!(r.sample_count, 1);
        assert_eq!(r.mean, centre.value);
        assert_eq!(r.standard_error, 0.0);
    }

    #[test]
    fn empty_grid_is_an_error() {
        assert!(matches!(disc_grid(&disc(), -1.0), Err(Error::Invalid(_))));
        let tiny = Disc::new(0.5, 0.5, 1e-3).unwrap();
        // The centre always survives, so a non-empty grid is guaranteed.
        assert_eq!(disc_grid(&tiny, 1.0).unwrap().len(), 1);
    }
}
