//! General (alpha, beta)-metrics `F = alpha phi(b^2, beta/alpha)` on a
//! projective chart, and the independent routes to their curvature.
//!
//! * the spray from the variational formula on `F^2` versus the closed
//!   expression in terms of `phi` and the covariant data of `beta`;
//! * the flag curvature from the Riemann tensor, from the projective factor
//!   `P`, and from `psi`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::diff::{DiffConfig, DiffMode};
use crate::error::{Error, Result};
use crate::geometry::{self, CurvatureFit, FinslerFunction, SprayRoute};
use crate::phi::{eval_phi, phi_jet, psi_jet, PhiFamily};
use crate::riemann::{alpha_eval, alpha_tensors, beta_data_with, AlphaBeta, ProjectiveChart};
use crate::scalar::Scalar;

/// How `phi - s phi2` and `phi - s phi2 + (b^2 - s^2) phi22` behave.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularity {
    /// Both positive: `F` is a regular Finsler metric.
    Regular,
    /// `phi - s phi2` vanishes at `s = +-b`; those directions are excluded.
    SingularPmB,
    /// `F` is only positive semi-definite; `g` is singular everywhere.
    Degenerate,
}

/// Directions with `|s| > (1 - PM_B_MARGIN) b` are rejected for
/// [`Regularity::SingularPmB`] metrics.
pub const PM_B_MARGIN: f64 = 0.05;
/// Smallest `b` accepted for [`Regularity::SingularPmB`] metrics.
pub const PM_B_FLOOR: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralABMetric {
    pub chart: ProjectiveChart,
    pub family: PhiFamily,
    pub expected_k: Option<f64>,
    pub regularity: Regularity,
}

impl FinslerFunction for GeneralABMetric {
    fn dim(&self) -> usize {
        self.chart.n
    }
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let a = self.chart.alpha_sq(x, y).sqrt();
        let b2 = self.chart.b_squared(x);
        a * self.family.eval(b2, self.chart.beta(x, y) / a)
    }
}

/// Scalar data of `F` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointData {
    pub alpha: f64,
    pub beta: f64,
    pub b2: f64,
    pub s: f64,
    pub phi: f64,
}

impl GeneralABMetric {
    pub fn new(
        chart: ProjectiveChart,
        family: PhiFamily,
        expected_k: Option<f64>,
        regularity: Regularity,
    ) -> Self {
        Self {
            chart,
            family,
            expected_k,
            regularity,
        }
    }

    /// Checks every precondition at `(x, y)` and returns the scalar data.
    pub fn point(&self, x: &[f64], y: &[f64]) -> Result<PointData> {
        if y.len() != self.chart.n {
            return Err(Error::InvalidArgument("y has the wrong dimension".into()));
        }
        let alpha = alpha_eval(&self.chart, x, y)?;
        let beta = self.chart.beta(x, y);
        let b2: f64 = self.chart.b_squared(x);
        let s = beta / alpha;
        if self.regularity == Regularity::SingularPmB {
            let b = b2.sqrt();
            if b < PM_B_FLOOR || s.abs() > (1.0 - PM_B_MARGIN) * b {
                return Err(Error::SingularDirection { s, b });
            }
        }
        let phi = eval_phi(&self.family, b2, s)?;
        Ok(PointData {
            alpha,
            beta,
            b2,
            s,
            phi,
        })
    }

    fn spray_route(&self) -> SprayRoute {
        if self.regularity == Regularity::Degenerate {
            SprayRoute::Projective
        } else {
            SprayRoute::Direct
        }
    }
}

pub fn metric_eval(m: &GeneralABMetric, x: &[f64], y: &[f64]) -> Result<f64> {
    let p = m.point(x, y)?;
    Ok(p.alpha * p.phi)
}

pub fn fundamental_tensor(
    m: &GeneralABMetric,
    x: &[f64],
    y: &[f64],
    cfg: &DiffConfig,
) -> Result<DMatrix<f64>> {
    m.point(x, y)?;
    geometry::fundamental_tensor(m, x, y, cfg)
}

/// Spray from `G^i = 1/4 g^{il}([F^2]_{x^k y^l} y^k - [F^2]_{x^l})`.
pub fn spray_direct(
    m: &GeneralABMetric,
    x: &[f64],
    y: &[f64],
    cfg: &DiffConfig,
) -> Result<DVector<f64>> {
    m.point(x, y)?;
    geometry::spray(m, x, y, cfg)
}

/// Spray from the closed expression in `phi`, the spray of `alpha` and the
/// covariant derivative of `beta`.
pub fn spray_formula(
    m: &GeneralABMetric,
    x: &[f64],
    y: &[f64],
    cfg: &DiffConfig,
) -> Result<DVector<f64>> {
    let pt = m.point(x, y)?;
    let j = phi_jet(&m.family, pt.b2, pt.s, cfg)?;
    let at = alpha_tensors(&m.chart, x, y, cfg)?;
    let bd = beta_data_with(&m.chart, x, y, &at, cfg)?;
    let (a, s, b2) = (pt.alpha, pt.s, bd.b2);
    let d1 = j.phi - s * j.phi2;
    let d2 = d1 + (b2 - s * s) * j.phi22;
    if d1 == 0.0 || d2 == 0.0 {
        return Err(Error::SingularMetric(format!(
            "phi - s phi2 = {d1:e}, phi - s phi2 + (b^2 - s^2) phi22 = {d2:e}"
        )));
    }
    let q = j.phi2 / d1;
    let r = j.phi1 / d1;
    let theta = (d1 * j.phi2 - s * j.phi * j.phi22) / (2.0 * j.phi * d2);
    let psi = j.phi22 / (2.0 * d2);
    let pi = (d1 * j.phi12 - s * j.phi1 * j.phi22) / (d1 * d2);
    let omega = 2.0 * j.phi1 / j.phi - (s * j.phi + (b2 - s * s) * j.phi2) / j.phi * pi;
    let e = -2.0 * a * q * bd.s0 + bd.r00 + 2.0 * a * a * r * bd.r;
    let rs = bd.r0 + bd.s0;
    let yv = DVector::from_column_slice(y);
    let g = &at.spray
        + &bd.s_up0 * (a * q)
        + &yv * ((theta * e + a * omega * rs) / a)
        + &bd.b_up * (psi * e + a * pi * rs)
        - (&bd.r_up + &bd.s_up) * (a * a * r);
    if g.iter().all(|v| v.is_finite()) {
        Ok(g)
    } else {
        Err(Error::NonFiniteValue("spray formula".into()))
    }
}

/// `R^i_j`; degenerate metrics use the projective spray `G = P y`.
pub fn riemann_tensor(
    m: &GeneralABMetric,
    x: &[f64],
    y: &[f64],
    cfg: &DiffConfig,
) -> Result<DMatrix<f64>> {
    m.point(x, y)?;
    geometry::riemann(m, x, y, m.spray_route(), cfg)
}

pub fn flag_curvature(
    m: &GeneralABMetric,
    x: &[f64],
    y: &[f64],
    u: &[f64],
    cfg: &DiffConfig,
) -> Result<f64> {
    let g = fundamental_tensor(m, x, y, cfg)?;
    let r = riemann_tensor(m, x, y, cfg)?;
    geometry::flag_curvature_from(&r, &g, y, u)
}

/// Least-squares `K` with `R = K F^2 (delta - F^{-1} F_{y^j} y^i)`.
pub fn constant_k_fit(
    m: &GeneralABMetric,
    x: &[f64],
    y: &[f64],
    cfg: &DiffConfig,
) -> Result<CurvatureFit> {
    let r = riemann_tensor(m, x, y, cfg)?;
    fit_from_riemann(m, x, y, &r, cfg)
}

pub fn fit_from_riemann(
    m: &GeneralABMetric,
    x: &[f64],
    y: &[f64],
    r: &DMatrix<f64>,
    cfg: &DiffConfig,
) -> Result<CurvatureFit> {
    let j = geometry::y_jet(m, x, y, cfg)?;
    let t = geometry::isotropic_projector(j.value, &j.grad, y);
    Ok(geometry::fit_constant_curvature(r, &t, j.value))
}

/// Residual of a fit under the convention of the metric: relative when a
/// non-zero curvature is expected, absolute (`|R - K T| / (F^2 n)`) otherwise.
pub fn fit_residual(m: &GeneralABMetric, fit: &CurvatureFit) -> f64 {
    match m.expected_k {
        Some(0.0) => fit.absolute_residual,
        _ => fit.relative_residual,
    }
}

/// Tolerance on Hamel's condition for the projective route.
pub fn hamel_tolerance(cfg: &DiffConfig) -> f64 {
    match cfg.mode {
        DiffMode::ForwardJet => 1e-7,
        DiffMode::CentralFd => 1e-5,
    }
}

/// `K = (P^2 - P_{x^k} y^k) / F^2`, after confirming projective flatness.
pub fn projective_k(m: &GeneralABMetric, x: &[f64], y: &[f64], cfg: &DiffConfig) -> Result<f64> {
    m.point(x, y)?;
    let (defect, scale) = geometry::hamel_defect(m, x, y, cfg)?;
    if defect > hamel_tolerance(cfg) * (1.0 + scale) {
        return Err(Error::NotProjectivelyFlat { residual: defect });
    }
    geometry::projective_curvature(m, x, y, cfg)
}

/// `K = {mu + mu s psi + c^2 [psi^2 - (psi2 + 2 s psi1)]} / phi^2`.
pub fn psi_k(m: &GeneralABMetric, x: &[f64], y: &[f64], cfg: &DiffConfig) -> Result<f64> {
    let pt = m.point(x, y)?;
    let (psi, psi1, psi2) = psi_jet(&m.family, pt.b2, pt.s, cfg)?;
    let at = alpha_tensors(&m.chart, x, y, cfg)?;
    let bd = beta_data_with(&m.chart, x, y, &at, cfg)?;
    let mu = m.chart.mu;
    let c2 = bd.c * bd.c;
    Ok((mu + mu * pt.s * psi + c2 * (psi * psi - (psi2 + 2.0 * pt.s * psi1))) / (pt.phi * pt.phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::Sign;

    fn funk(n: usize) -> GeneralABMetric {
        let mut a = vec![0.0; n];
        a[0] = 0.2;
        GeneralABMetric::new(
            ProjectiveChart::new(n, 0.0, 1.0, a).unwrap(),
            PhiFamily::Funk {
                sigma: -0.25,
                c: 1.0,
                sign: Sign::Plus,
            },
            Some(-0.25),
            Regularity::Regular,
        )
    }

    #[test]
    fn funk_curvature_on_every_route() {
        let m = funk(3);
        let x = [0.1, -0.2, 0.15];
        let y = [0.3, 0.7, -0.2];
        let u = [1.0, 0.0, 0.5];
        let cfg = DiffConfig::jet();
        let gd = spray_direct(&m, &x, &y, &cfg).unwrap();
        let gf = spray_formula(&m, &x, &y, &cfg).unwrap();
        assert!((&gd - &gf).amax() < 1e-12 * (1.0 + gd.amax()));
        let k = flag_curvature(&m, &x, &y, &u, &cfg).unwrap();
        assert!((k + 0.25).abs() < 1e-10, "{k}");
        let fit = constant_k_fit(&m, &x, &y, &cfg).unwrap();
        assert!((fit.k + 0.25).abs() < 1e-10);
        assert!(fit_residual(&m, &fit) < 1e-10);
        assert!((projective_k(&m, &x, &y, &cfg).unwrap() + 0.25).abs() < 1e-11);
        assert!((psi_k(&m, &x, &y, &cfg).unwrap() + 0.25).abs() < 1e-11);
    }

    #[test]
    fn fd_mode_agrees() {
        let m = funk(3);
        let x = [0.1, -0.2, 0.15];
        let y = [0.3, 0.7, -0.2];
        let cfg = DiffConfig::fd();
        let fit = constant_k_fit(&m, &x, &y, &cfg).unwrap();
        assert!((fit.k + 0.25).abs() < 1e-5, "{}", fit.k);
        assert!((projective_k(&m, &x, &y, &cfg).unwrap() + 0.25).abs() < 1e-5);
        assert!((psi_k(&m, &x, &y, &cfg).unwrap() + 0.25).abs() < 1e-6);
        let gd = spray_direct(&m, &x, &y, &cfg).unwrap();
        let gf = spray_formula(&m, &x, &y, &cfg).unwrap();
        assert!((&gd - &gf).amax() < 1e-6);
    }

    #[test]
    fn square_b_excludes_pm_b() {
        let m = GeneralABMetric::new(
            ProjectiveChart::new(3, -1.0, 1.0, vec![1.0, 0.0, 0.0]).unwrap(),
            PhiFamily::SquareB,
            Some(0.0),
            Regularity::SingularPmB,
        );
        let x = [0.0; 3];
        // beta = y_1 and b = 1 at the origin
        assert!(matches!(
            metric_eval(&m, &x, &[1.0, 0.0, 0.0]).unwrap_err(),
            Error::SingularDirection { .. }
        ));
        let y = [0.3, 0.8, 0.1];
        let v = metric_eval(&m, &x, &y).unwrap();
        let a = (0.09f64 + 0.64 + 0.01).sqrt();
        assert!((v - a * (1.0 + 0.3 / a).powi(2)).abs() < 1e-14);
        let cfg = DiffConfig::jet();
        let fit = constant_k_fit(&m, &[0.1, 0.2, -0.1], &y, &cfg).unwrap();
        assert!(fit.k.abs() < 1e-10 && fit_residual(&m, &fit) < 1e-10);
    }

    #[test]
    fn non_projectively_flat_is_detected() {
        let mut m = funk(3);
        m.family = PhiFamily::custom("1 + s^2").unwrap();
        let e = projective_k(&m, &[0.1, 0.0, 0.2], &[0.3, 0.5, 0.1], &DiffConfig::jet());
        assert!(matches!(e, Err(Error::NotProjectivelyFlat { .. })), "{e:?}");
    }
}
