//! Riemannian data of a pair `(alpha, beta)`.
//!
//! [`ProjectiveChart`] is the standard chart in which `alpha` has constant
//! sectional curvature `mu` with straight-line geodesics and `beta` is
//! closed and conformal, `b_{i|j} = c(x) a_ij`. Everything downstream
//! (Christoffel symbols, covariant derivatives, curvature) is computed
//! generically from the values of `alpha^2` and `beta`, so the same code
//! serves deformed pairs.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::diff::{jet2, jet2_vec, DiffConfig, Field, VectorField};
use crate::error::{Error, Result};
use crate::geometry::{self, FinslerFunction, SprayRoute};
use crate::linalg::inverse_quadratic_form;
use crate::scalar::{dot, lift, Scalar};

/// A Riemannian metric `alpha` together with a one-form `beta`.
pub trait AlphaBeta: Sync + Sized {
    fn dim(&self) -> usize;
    fn alpha_sq<S: Scalar>(&self, x: &[S], y: &[S]) -> S;
    fn beta<S: Scalar>(&self, x: &[S], y: &[S]) -> S;
    /// Rejects base points outside the domain of the pair.
    fn admissible(&self, x: &[f64]) -> Result<()>;
    /// `b^2 = |beta|_alpha^2` at `x`; by default from the coefficients.
    fn b_squared<S: Scalar>(&self, x: &[S]) -> S {
        b_squared(self, x)
    }
}

/// `a_ij(x)` by polarization of `alpha^2`, row-major.
pub fn metric_coeffs<S: Scalar, P: AlphaBeta>(p: &P, x: &[S]) -> Vec<S> {
    let n = p.dim();
    let e = |i: usize| -> Vec<S> {
        (0..n)
            .map(|k| if k == i { S::one() } else { S::zero() })
            .collect()
    };
    let diag: Vec<S> = (0..n).map(|i| p.alpha_sq(x, &e(i))).collect();
    let mut a = vec![S::zero(); n * n];
    for i in 0..n {
        a[i * n + i] = diag[i];
        for j in (i + 1)..n {
            let v: Vec<S> = (0..n)
                .map(|k| {
                    if k == i || k == j {
                        S::one()
                    } else {
                        S::zero()
                    }
                })
                .collect();
            let aij = (p.alpha_sq(x, &v) - diag[i] - diag[j]) * 0.5;
            a[i * n + j] = aij;
            a[j * n + i] = aij;
        }
    }
    a
}

/// `b_i(x)`.
pub fn one_form_coeffs<S: Scalar, P: AlphaBeta>(p: &P, x: &[S]) -> Vec<S> {
    let n = p.dim();
    (0..n)
        .map(|i| {
            let e: Vec<S> = (0..n)
                .map(|k| if k == i { S::one() } else { S::zero() })
                .collect();
            p.beta(x, &e)
        })
        .collect()
}

/// `b^2 = a^{ij} b_i b_j`; NaN where `a` is singular.
pub fn b_squared<S: Scalar, P: AlphaBeta>(p: &P, x: &[S]) -> S {
    let a = metric_coeffs(p, x);
    let b = one_form_coeffs(p, x);
    inverse_quadratic_form(&a, &b, p.dim()).unwrap_or(S::cst(f64::NAN))
}

/// Projectively flat chart of constant curvature `mu` carrying the closed
/// conformal one-form determined by `(lambda, a)`:
///
/// ```text
/// alpha = sqrt((1 + mu|x|^2)|y|^2 - mu<x,y>^2) / (1 + mu|x|^2)
/// beta  = (lambda<x,y> + (1 + mu|x|^2)<a,y> - mu<a,x><x,y>) / (1 + mu|x|^2)^{3/2}
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveChart {
    pub n: usize,
    pub mu: f64,
    pub lambda: f64,
    pub a: Vec<f64>,
}

/// Smallest admissible value of `1 + mu|x|^2`.
pub const CHART_MARGIN: f64 = 1e-3;

impl ProjectiveChart {
    pub fn new(n: usize, mu: f64, lambda: f64, a: Vec<f64>) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(Error::InvalidArgument(format!(
                "dimension must be 2, 3 or 4, got {n}"
            )));
        }
        if a.len() != n {
            return Err(Error::InvalidArgument(format!(
                "vector a has {} components, expected {n}",
                a.len()
            )));
        }
        if !mu.is_finite() || !lambda.is_finite() || a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("chart parameters must be finite".into()));
        }
        Ok(Self { n, mu, lambda, a })
    }

    /// `kappa = lambda^2 + mu|a|^2`, so that `c^2 = kappa - mu b^2`.
    pub fn kappa(&self) -> f64 {
        self.lambda * self.lambda + self.mu * self.a.iter().map(|v| v * v).sum::<f64>()
    }

    /// Conformal factor `c(x) = (lambda - mu<a,x>) / sqrt(1 + mu|x|^2)`.
    pub fn conformal_factor(&self, x: &[f64]) -> f64 {
        let w = 1.0 + self.mu * x.iter().map(|v| v * v).sum::<f64>();
        let ax: f64 = self.a.iter().zip(x).map(|(p, q)| p * q).sum();
        (self.lambda - self.mu * ax) / w.sqrt()
    }

    /// Closed forms of `a_ij` and `a^{ij}`; used as an independent check.
    pub fn closed_form_metric(&self, x: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n;
        let xv = DVector::from_column_slice(x);
        let w = 1.0 + self.mu * xv.norm_squared();
        let id = DMatrix::<f64>::identity(n, n);
        let xx = &xv * xv.transpose();
        let a = (&id * w - &xx * self.mu) / (w * w);
        let ainv = (id + xx * self.mu) * w;
        (a, ainv)
    }
}

impl AlphaBeta for ProjectiveChart {
    fn dim(&self) -> usize {
        self.n
    }

    fn alpha_sq<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let w = dot(x, x) * self.mu + 1.0;
        let xy = dot(x, y);
        (w * dot(y, y) - xy * xy * self.mu) / (w * w)
    }

    fn beta<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        let w = dot(x, x) * self.mu + 1.0;
        let xy = dot(x, y);
        let av = lift::<S>(&self.a);
        let ay = dot(&av, y);
        let ax = dot(&av, x);
        (xy * self.lambda + w * ay - ax * xy * self.mu) / (w * w.sqrt())
    }

    /// Closed form `w (|b|^2 + mu <x, b>^2)` with `b_i = beta(x, e_i)`.
    fn b_squared<S: Scalar>(&self, x: &[S]) -> S {
        let w = dot(x, x) * self.mu + 1.0;
        let av = lift::<S>(&self.a);
        let ax = dot(&av, x);
        let scale = (w * w.sqrt()).recip();
        let b: Vec<S> = (0..self.n)
            .map(|i| (x[i] * self.lambda + w * av[i] - ax * x[i] * self.mu) * scale)
            .collect();
        let xb = dot(x, &b);
        w * (dot(&b, &b) + xb * xb * self.mu)
    }

    fn admissible(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "x has {} components, expected {}",
                x.len(),
                self.n
            )));
        }
        let w = 1.0 + self.mu * x.iter().map(|v| v * v).sum::<f64>();
        if w > CHART_MARGIN {
            Ok(())
        } else {
            Err(Error::DomainViolation(format!(
                "1 + mu|x|^2 = {w:e} is not positive"
            )))
        }
    }
}

/// `alpha = sqrt(alpha^2)` as a Finsler function.
pub struct AlphaNorm<'a, P>(pub &'a P);

impl<P: AlphaBeta> FinslerFunction for AlphaNorm<'_, P> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
        self.0.alpha_sq(x, y).sqrt()
    }
}

pub fn alpha_eval<P: AlphaBeta>(p: &P, x: &[f64], y: &[f64]) -> Result<f64> {
    p.admissible(x)?;
    let a2 = p.alpha_sq(x, y);
    if a2 > 0.0 && a2.is_finite() {
        Ok(a2.sqrt())
    } else {
        Err(Error::DomainViolation(format!("alpha^2 = {a2:e} at y = {y:?}")))
    }
}

pub fn beta_eval<P: AlphaBeta>(p: &P, x: &[f64], y: &[f64]) -> Result<f64> {
    p.admissible(x)?;
    let b = p.beta(x, y);
    if b.is_finite() {
        Ok(b)
    } else {
        Err(Error::NonFiniteValue("beta".into()))
    }
}

struct HalfAlphaSqInY<'a, P> {
    p: &'a P,
    x: &'a [f64],
}

impl<P: AlphaBeta> Field for HalfAlphaSqInY<'_, P> {
    fn dim(&self) -> usize {
        self.p.dim()
    }
    fn eval<S: Scalar>(&self, y: &[S]) -> S {
        self.p.alpha_sq(&lift::<S>(self.x), y) * 0.5
    }
}

struct MetricInX<'a, P>(&'a P);

impl<P: AlphaBeta> VectorField for MetricInX<'_, P> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        metric_coeffs(self.0, x)
    }
}

struct OneFormInX<'a, P>(&'a P);

impl<P: AlphaBeta> VectorField for OneFormInX<'_, P> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        one_form_coeffs(self.0, x)
    }
}

/// Riemannian quantities of `alpha` at `(x, y)`.
#[derive(Clone, Debug)]
pub struct AlphaTensors {
    pub n: usize,
    pub a: DMatrix<f64>,
    pub a_inv: DMatrix<f64>,
    /// `Gamma^i_jk` stored at `(i * n + j) * n + k`.
    pub gamma: Vec<f64>,
    /// `alpha G^i = 1/2 Gamma^i_jk y^j y^k`.
    pub spray: DVector<f64>,
    /// Best `theta` with `alpha G^i = theta y^i`.
    pub theta: f64,
    /// `|alpha G - theta y|_inf`; zero when `alpha` is projectively flat in
    /// this chart.
    pub collinearity: f64,
}

impl AlphaTensors {
    pub fn gamma(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[(i * self.n + j) * self.n + k]
    }
}

pub fn alpha_tensors<P: AlphaBeta>(
    p: &P,
    x: &[f64],
    y: &[f64],
    cfg: &DiffConfig,
) -> Result<AlphaTensors> {
    p.admissible(x)?;
    let n = p.dim();
    if y.len() != n {
        return Err(Error::InvalidArgument("y has the wrong dimension".into()));
    }
    let a = jet2(&HalfAlphaSqInY { p, x }, y, cfg)?.hess;
    let a = (&a + a.transpose()) * 0.5;
    if a.clone().cholesky().is_none() {
        return Err(Error::SingularMetric("alpha is not positive definite".into()));
    }
    let a_inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularMetric("alpha".into()))?;
    let da = jet2_vec(&MetricInX(p), x, cfg)?;
    // d_k a_ij
    let d = |i: usize, j: usize, k: usize| da[i * n + j].grad[k];
    let mut gamma = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut v = 0.0;
                for l in 0..n {
                    v += a_inv[(i, l)] * (d(l, k, j) + d(j, l, k) - d(j, k, l));
                }
                gamma[(i * n + j) * n + k] = 0.5 * v;
            }
        }
    }
    let spray = DVector::from_fn(n, |i, _| {
        let mut v = 0.0;
        for j in 0..n {
            for k in 0..n {
                v += gamma[(i * n + j) * n + k] * y[j] * y[k];
            }
        }
        0.5 * v
    });
    let yv = DVector::from_column_slice(y);
    let theta = spray.dot(&yv) / yv.norm_squared();
    let collinearity = (&spray - &yv * theta).amax();
    Ok(AlphaTensors {
        n,
        a,
        a_inv,
        gamma,
        spray,
        theta,
        collinearity,
    })
}

/// Covariant data of `beta` with respect to `alpha`.
#[derive(Clone, Debug)]
pub struct BetaData {
    pub b_low: DVector<f64>,
    pub b_up: DVector<f64>,
    pub b2: f64,
    /// `b_{i|j}`.
    pub bij: DMatrix<f64>,
    pub r_ij: DMatrix<f64>,
    pub s_ij: DMatrix<f64>,
    pub r00: f64,
    pub r0: f64,
    pub s0: f64,
    pub r: f64,
    pub r_up: DVector<f64>,
    pub s_up: DVector<f64>,
    /// `s^i_0`.
    pub s_up0: DVector<f64>,
    /// Measured conformal factor `tr(a^{-1} b_{|})/n`.
    pub c: f64,
    /// `|b_{i|j} - c a_ij|_inf`.
    pub conformal_defect: f64,
}

pub fn beta_data<P: AlphaBeta>(
    p: &P,
    x: &[f64],
    y: &[f64],
    cfg: &DiffConfig,
) -> Result<BetaData> {
    let at = alpha_tensors(p, x, y, cfg)?;
    beta_data_with(p, x, y, &at, cfg)
}

pub fn beta_data_with<P: AlphaBeta>(
    p: &P,
    x: &[f64],
    y: &[f64],
    at: &AlphaTensors,
    cfg: &DiffConfig,
) -> Result<BetaData> {
    let n = p.dim();
    let db = jet2_vec(&OneFormInX(p), x, cfg)?;
    let b_low = DVector::from_fn(n, |i, _| db[i].value);
    let bij = DMatrix::from_fn(n, n, |i, j| {
        let mut v = db[i].grad[j];
        for k in 0..n {
            v -= at.gamma(k, i, j) * b_low[k];
        }
        v
    });
    let r_ij = (&bij + bij.transpose()) * 0.5;
    let s_ij = (&bij - bij.transpose()) * 0.5;
    let yv = DVector::from_column_slice(y);
    let b_up = &at.a_inv * &b_low;
    let b2 = b_low.dot(&b_up);
    let r00 = yv.dot(&(&r_ij * &yv));
    let r_low = r_ij.transpose() * &b_up; // r_j = b^i r_ij
    let s_low = s_ij.transpose() * &b_up; // s_j = b^i s_ij
    let r0 = r_low.dot(&yv);
    let s0 = s_low.dot(&yv);
    let r = b_up.dot(&r_low);
    let r_up = &at.a_inv * &r_low;
    let s_up = &at.a_inv * &s_low;
    let s_up0 = &at.a_inv * (&s_ij * &yv);
    let c = (&at.a_inv * &bij).trace() / n as f64;
    let conformal_defect = (&bij - &at.a * c).amax();
    Ok(BetaData {
        b_low,
        b_up,
        b2,
        bij,
        r_ij,
        s_ij,
        r00,
        r0,
        s0,
        r,
        r_up,
        s_up,
        s_up0,
        c,
        conformal_defect,
    })
}

/// Riemann curvature `R^i_j` of `alpha` at `(x, y)`.
pub fn alpha_riemann<P: AlphaBeta>(
    p: &P,
    x: &[f64],
    y: &[f64],
    cfg: &DiffConfig,
) -> Result<DMatrix<f64>> {
    p.admissible(x)?;
    geometry::riemann(&AlphaNorm(p), x, y, SprayRoute::Direct, cfg)
}

/// `|beta|_alpha = |lambda - mu<a,x>| / (sqrt(-mu) sqrt(1 + mu|x|^2))` on a
/// chart with `kappa = 0`.
pub fn kappa_zero_b_length(chart: &ProjectiveChart, x: &[f64]) -> Result<f64> {
    chart.admissible(x)?;
    if chart.kappa().abs() > 1e-12 || chart.mu >= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "requires kappa = 0 and mu < 0 (kappa = {}, mu = {})",
            chart.kappa(),
            chart.mu
        )));
    }
    Ok(chart.conformal_factor(x).abs() / (-chart.mu).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart(mu: f64, lambda: f64, a: &[f64]) -> ProjectiveChart {
        ProjectiveChart::new(a.len(), mu, lambda, a.to_vec()).unwrap()
    }

    #[test]
    fn metric_matches_closed_form() {
        for mu in [-1.0, 0.0, 0.7] {
            let c = chart(mu, 1.0, &[0.2, -0.1, 0.3]);
            let x = [0.3, 0.1, -0.4];
            let at = alpha_tensors(&c, &x, &[0.2, 0.5, -0.3], &DiffConfig::jet()).unwrap();
            let (a, ainv) = c.closed_form_metric(&x);
            assert!((&at.a - a).amax() < 1e-14);
            assert!((&at.a_inv - ainv).amax() < 1e-13);
        }
    }

    #[test]
    fn alpha_has_constant_curvature_mu_and_flat_geodesics() {
        let y = [0.6, -0.3, 0.5];
        let x = [0.2, 0.3, -0.1];
        for mu in [-1.0, 0.0, 1.5] {
            let c = chart(mu, 0.5, &[0.1, 0.0, 0.2]);
            let cfg = DiffConfig::jet();
            let at = alpha_tensors(&c, &x, &y, &cfg).unwrap();
            assert!(at.collinearity < 1e-14);
            let r = alpha_riemann(&c, &x, &y, &cfg).unwrap();
            let a2 = c.alpha_sq(&x, &y);
            let yv = DVector::from_column_slice(&y);
            let ay = &at.a * &yv;
            let expected = DMatrix::from_fn(3, 3, |i, j| {
                let d = if i == j { 1.0 } else { 0.0 };
                mu * (a2 * d - y[i] * ay[j])
            });
            assert!((r - expected).amax() < 1e-11, "mu = {mu}");
        }
    }

    #[test]
    fn beta_is_closed_and_conformal() {
        let c = chart(-1.0, 2.0, &[0.5, 0.3, 0.0]);
        let x = [0.1, -0.2, 0.3];
        let y = [1.0, 0.2, -0.4];
        for cfg in [DiffConfig::jet(), DiffConfig::fd()] {
            let bd = beta_data(&c, &x, &y, &cfg).unwrap();
            let tol = if cfg.mode == crate::diff::DiffMode::ForwardJet { 1e-13 } else { 1e-7 };
            assert!(bd.s_ij.amax() < tol);
            assert!(bd.conformal_defect < tol);
            assert!((bd.c - c.conformal_factor(&x)).abs() < tol);
            // c^2 = kappa - mu b^2
            assert!((bd.c * bd.c - (c.kappa() - c.mu * bd.b2)).abs() < 10.0 * tol);
        }
    }

    #[test]
    fn b_length_on_kappa_zero_chart() {
        let c = chart(-1.0, 1.0, &[1.0, 0.0, 0.0]);
        assert!(c.kappa().abs() < 1e-15);
        let x = [0.2, -0.1, 0.3];
        let b = kappa_zero_b_length(&c, &x).unwrap();
        let b2: f64 = b_squared(&c, &x[..]);
        assert!((b * b - b2).abs() < 1e-13);
        assert!((c.b_squared(&x[..]) - b2).abs() < 1e-13);
        assert!(kappa_zero_b_length(&chart(-1.0, 2.0, &[1.0, 0.0, 0.0]), &x).is_err());
    }

    #[test]
    fn rejects_points_outside_the_chart() {
        let c = chart(-1.0, 1.0, &[0.0, 0.0]);
        let e = alpha_eval(&c, &[1.0, 0.5], &[1.0, 0.0]).unwrap_err();
        assert!(matches!(e, Error::DomainViolation(_)));
        assert!(ProjectiveChart::new(5, 0.0, 1.0, vec![0.0; 5]).is_err());
    }
}
