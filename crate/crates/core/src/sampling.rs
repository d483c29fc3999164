//! Reproducible sample points.
//!
//! Sample `i` of a run with seed `s` draws from `ChaCha8` seeded with
//! `seed_from_u64(s)` on stream `i`; uniforms are `(next_u64 >> 11) * 2^-53`.
//! Points are produced by rejection only, so another implementation of the
//! same generator reproduces them exactly.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::catalog::ChartSpec;
use crate::error::{Error, Result};
use crate::riemann::{AlphaBeta, ProjectiveChart};

/// Name recorded in reports.
pub const RNG_NAME: &str = "chacha8-stream-per-sample/u53";

/// Draws allowed per sample before giving up.
pub const MAX_ATTEMPTS: usize = 10_000;

/// Flag directions must make at least this sine with `y`.
const FLAG_SINE: f64 = 0.1;

pub struct SampleRng(ChaCha8Rng);

impl SampleRng {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(index);
        SampleRng(r)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[-1, 1)`.
    fn symmetric(&mut self) -> f64 {
        2.0 * self.uniform() - 1.0
    }

    /// Uniform in the ball of radius `r`.
    pub fn ball(&mut self, n: usize, r: f64) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| self.symmetric()).collect();
            if norm2(&v) <= 1.0 {
                return v.into_iter().map(|t| t * r).collect();
            }
        }
    }

    /// Uniform on the unit sphere.
    pub fn sphere(&mut self, n: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..n).map(|_| self.symmetric()).collect();
            let m = norm2(&v);
            if m <= 1.0 && m > 1e-4 {
                let m = m.sqrt();
                return v.into_iter().map(|t| t / m).collect();
            }
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum()
}

/// A point `x`, flagpole `y` (unit Euclidean) and transverse `u` (unit).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub index: u64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    /// Draws rejected before this one was accepted.
    pub rejected: usize,
}

/// Draws sample `index`; `accept(x, y)` rejects points outside the domain of
/// the object under test.
pub fn draw(
    spec: &ChartSpec,
    chart: &ProjectiveChart,
    seed: u64,
    index: u64,
    accept: impl Fn(&[f64], &[f64]) -> bool,
) -> Result<Sample> {
    let n = chart.n;
    let mut rng = SampleRng::new(seed, index);
    for rejected in 0..MAX_ATTEMPTS {
        let x = rng.ball(n, spec.x_radius);
        let y = rng.sphere(n);
        let u = rng.sphere(n);
        let c: f64 = u.iter().zip(&y).map(|(a, b)| a * b).sum();
        if 1.0 - c * c < FLAG_SINE * FLAG_SINE || chart.admissible(&x).is_err() {
            continue;
        }
        let b = chart.b_squared(&x).sqrt();
        if b < spec.b_min || b > spec.b_max || !accept(&x, &y) {
            continue;
        }
        return Ok(Sample {
            index,
            x,
            y,
            u,
            rejected,
        });
    }
    Err(Error::DomainViolation(format!(
        "no admissible point after {MAX_ATTEMPTS} draws (sample {index})"
    )))
}
