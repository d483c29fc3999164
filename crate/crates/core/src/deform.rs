//! Deformations `(alpha, beta) -> (abar, bbar)` that flatten a space-form
//! `alpha` carrying a closed conformal `beta`.
//!
//! * `kappa != 0`: `abar^2 = |mu|/D (alpha^2 + mu/D beta^2)`,
//!   `bbar = |mu|^{3/2} / D^{3/2} beta`, `D = kappa - mu b^2`; then `abar` is
//!   flat and `bbar` is conformal with constant factor `+-sqrt|mu|`.
//! * `kappa = 0`, `mu < 0`: `abar = alpha / b`, `bbar = beta / b^2`; then
//!   `abar` is flat, `bbar` is parallel and has unit length.
//!
//! The deformed pairs are evaluators over the original chart; their
//! curvature goes through the same generic pipeline as any other pair.

use serde::{Deserialize, Serialize};

use crate::diff::DiffConfig;
use crate::error::{Error, Result};
use crate::riemann::{alpha_riemann, alpha_tensors, beta_data_with, AlphaBeta, ProjectiveChart};
use crate::scalar::Scalar;

pub use crate::phi::phi_transfer;

/// Smallest accepted `kappa - mu b^2` (resp. `b`) for the deformations.
pub const DEFORM_MARGIN: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Deformation {
    /// `kappa > 0`, `mu != 0`.
    Conformal,
    /// `kappa = 0`, `mu < 0`.
    Parallel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeformedPair {
    pub chart: ProjectiveChart,
    pub kind: Deformation,
}

/// The deformation for `kappa != 0`.
pub fn deform_nonzero(chart: &ProjectiveChart) -> Result<DeformedPair> {
    let kappa = chart.kappa();
    if chart.mu == 0.0 {
        return Err(Error::InvalidArgument("the deformation needs mu != 0".into()));
    }
    if kappa.abs() <= 1e-12 {
        return Err(Error::InvalidArgument(
            "kappa = 0: use the parallel deformation instead".into(),
        ));
    }
    if kappa < 0.0 {
        return Err(Error::UnsupportedSignature(format!(
            "kappa = {kappa} < 0 leads to a pseudo-Riemannian deformation"
        )));
    }
    Ok(DeformedPair {
        chart: chart.clone(),
        kind: Deformation::Conformal,
    })
}

/// The deformation for `kappa = 0`, `mu < 0`.
pub fn deform_zero(chart: &ProjectiveChart) -> Result<DeformedPair> {
    let kappa = chart.kappa();
    if kappa.abs() > 1e-12 || chart.mu >= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "the parallel deformation needs kappa = 0 and mu < 0 (kappa = {kappa}, mu = {})",
            chart.mu
        )));
    }
    Ok(DeformedPair {
        chart: chart.clone(),
        kind: Deformation::Parallel,
    })
}

impl AlphaBeta for DeformedPair {
    fn dim(&self) -> usize {
        self.chart.n
    }

    fn alpha_sq<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let c = &self.chart;
        let b2 = c.b_squared(x);
        match self.kind {
            Deformation::Conformal => {
                let d = -b2 * c.mu + c.kappa();
                let beta = c.beta(x, y);
                (c.alpha_sq(x, y) + beta * beta * c.mu / d) * c.mu.abs() / d
            }
            Deformation::Parallel => c.alpha_sq(x, y) / b2,
        }
    }

    fn beta<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let c = &self.chart;
        let b2 = c.b_squared(x);
        match self.kind {
            Deformation::Conformal => {
                let d = -b2 * c.mu + c.kappa();
                c.beta(x, y) * c.mu.abs().powf(1.5) / (d * d.sqrt())
            }
            Deformation::Parallel => c.beta(x, y) / b2,
        }
    }

    fn admissible(&self, x: &[f64]) -> Result<()> {
        self.chart.admissible(x)?;
        let b2: f64 = self.chart.b_squared(x);
        match self.kind {
            Deformation::Conformal => {
                let d = self.chart.kappa() - self.chart.mu * b2;
                if d > DEFORM_MARGIN {
                    Ok(())
                } else {
                    Err(Error::DomainViolation(format!("kappa - mu b^2 = {d:e}")))
                }
            }
            Deformation::Parallel => {
                if b2.sqrt() > DEFORM_MARGIN {
                    Ok(())
                } else {
                    Err(Error::DomainViolation(format!("b = {:e}", b2.sqrt())))
                }
            }
        }
    }
}

/// `abar(x, y)`, `bbar(x, y)` and `bbar^2(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeformedValues {
    pub abar: f64,
    pub bbar: f64,
    pub bbar2: f64,
}

impl DeformedPair {
    pub fn values(&self, x: &[f64], y: &[f64]) -> Result<DeformedValues> {
        self.admissible(x)?;
        let a2 = self.alpha_sq(x, y);
        if !(a2 > 0.0) {
            return Err(Error::DomainViolation(format!("abar^2 = {a2:e}")));
        }
        Ok(DeformedValues {
            abar: a2.sqrt(),
            bbar: self.beta(x, y),
            bbar2: crate::riemann::b_squared(self, x),
        })
    }

    /// Recovers `(alpha^2, beta)` from the deformed pair with the reversed
    /// formulas; only the `kappa != 0` deformation is reversible.
    pub fn reverse(&self, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
        if self.kind != Deformation::Conformal {
            return Err(Error::InvalidArgument(
                "the parallel deformation is not reversible".into(),
            ));
        }
        let v = self.values(x, y)?;
        let (mu, kappa) = (self.chart.mu, self.chart.kappa());
        let e = 1.0 / kappa + v.bbar2 / mu;
        let a2 = (v.abar * v.abar - v.bbar * v.bbar / (mu * e)) / (mu.abs() * e);
        let beta = v.bbar / (mu.abs().powf(1.5) * e.powf(1.5));
        Ok((a2, beta))
    }
}

/// Numerical evidence for the outcome of a deformation at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeformCertificate {
    /// `max |Rbar^i_j|`.
    pub curvature: f64,
    /// Conformal: `max |bbar_{i|j} - sign(c) sqrt|mu| abar_ij|`;
    /// parallel: `max |bbar_{i|j}|`.
    pub covariant: f64,
    /// Conformal: `|(kappa - mu b^2)(1/kappa + bbar^2/mu) - 1|`;
    /// parallel: `|bbar - 1|`.
    pub identity: f64,
    /// Conformal only: max error of the reversed deformation.
    pub round_trip: Option<f64>,
}

pub fn certify(pair: &DeformedPair, x: &[f64], y: &[f64], cfg: &DiffConfig) -> Result<DeformCertificate> {
    let v = pair.values(x, y)?;
    let curvature = alpha_riemann(pair, x, y, cfg)?.amax();
    let at = alpha_tensors(pair, x, y, cfg)?;
    let bd = beta_data_with(pair, x, y, &at, cfg)?;
    let c = &pair.chart;
    Ok(match pair.kind {
        Deformation::Conformal => {
            let sign = c.conformal_factor(x).signum();
            let factor = sign * c.mu.abs().sqrt();
            let b2: f64 = c.b_squared(x);
            let identity = ((c.kappa() - c.mu * b2) * (1.0 / c.kappa() + v.bbar2 / c.mu) - 1.0).abs();
            let (a2, beta) = pair.reverse(x, y)?;
            let rt = (a2 - c.alpha_sq(x, y)).abs().max((beta - c.beta(x, y)).abs());
            DeformCertificate {
                curvature,
                covariant: (&bd.bij - &at.a * factor).amax(),
                identity,
                round_trip: Some(rt),
            }
        }
        Deformation::Parallel => DeformCertificate {
            curvature,
            covariant: bd.bij.amax(),
            identity: (v.bbar2.sqrt() - 1.0).abs(),
            round_trip: None,
        },
    })
}
