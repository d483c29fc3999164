//! Derivatives of `phi` and the residuals of the equations it must satisfy.

use serde::Serialize;

use super::{check_domain, PhiFamily};
use crate::diff::{jet2, DiffConfig, Field, Taylor2};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `phi` and its derivatives up to order two at `(b^2, s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhiJet {
    pub phi: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi11: f64,
    pub phi12: f64,
    pub phi22: f64,
    /// `(phi2 + 2 s phi1) / (2 phi)`.
    pub psi: f64,
}

struct PhiField<'a>(&'a PhiFamily);

impl Field for PhiField<'_> {
    fn dim(&self) -> usize {
        2
    }
    fn eval<S: Scalar>(&self, z: &[S]) -> S {
        self.0.eval(z[0], z[1])
    }
}

fn psi_of<S: Scalar>(fam: &PhiFamily, b2: S, s: S) -> S {
    let t = Taylor2::seed(&[b2, s]);
    let v = fam.eval(t[0], t[1]);
    (v.grad(1) + s * v.grad(0) * 2.0) / (v.value() * 2.0)
}

struct PsiField<'a>(&'a PhiFamily);

impl Field for PsiField<'_> {
    fn dim(&self) -> usize {
        2
    }
    fn eval<S: Scalar>(&self, z: &[S]) -> S {
        psi_of(self.0, z[0], z[1])
    }
}

/// `(psi, psi1, psi2)` at `(b^2, s)`.
pub(crate) fn psi_jet(
    family: &PhiFamily,
    b2: f64,
    s: f64,
    cfg: &DiffConfig,
) -> Result<(f64, f64, f64)> {
    super::eval_phi(family, b2, s)?;
    let pj = jet2(&PsiField(family), &[b2, s], cfg)?;
    Ok((pj.value, pj.grad[0], pj.grad[1]))
}

/// `f = phi^{-1/2}` as a function of `(u, v)`.
struct InvSqrtUv<'a>(&'a PhiFamily);

impl Field for InvSqrtUv<'_> {
    fn dim(&self) -> usize {
        2
    }
    fn eval<S: Scalar>(&self, z: &[S]) -> S {
        let (u, v) = (z[0], z[1]);
        self.0.eval(u + v * v, v).sqrt().recip()
    }
}

pub fn phi_jet(family: &PhiFamily, b2: f64, s: f64, cfg: &DiffConfig) -> Result<PhiJet> {
    super::eval_phi(family, b2, s)?;
    let j = jet2(&PhiField(family), &[b2, s], cfg)?;
    let phi = j.value;
    let (phi1, phi2) = (j.grad[0], j.grad[1]);
    Ok(PhiJet {
        phi,
        phi1,
        phi2,
        phi11: j.hess[(0, 0)],
        phi12: j.hess[(0, 1)],
        phi22: j.hess[(1, 1)],
        psi: (phi2 + 2.0 * s * phi1) / (2.0 * phi),
    })
}

/// `phi22 - 2 (phi1 - s phi12)`.
pub fn residual_pde(family: &PhiFamily, b2: f64, s: f64, cfg: &DiffConfig) -> Result<f64> {
    let j = phi_jet(family, b2, s, cfg)?;
    Ok(j.phi22 - 2.0 * (j.phi1 - s * j.phi12))
}

/// `(kappa - mu b^2)[psi^2 - (psi2 + 2 s psi1)] + mu s psi + mu - K phi^2`.
pub fn residual_pde2(
    family: &PhiFamily,
    b2: f64,
    s: f64,
    (kappa, mu, k): (f64, f64, f64),
    cfg: &DiffConfig,
) -> Result<f64> {
    let phi = super::eval_phi(family, b2, s)?;
    let (psi, psi1, psi2) = psi_jet(family, b2, s, cfg)?;
    Ok((kappa - mu * b2) * (psi * psi - (psi2 + 2.0 * s * psi1)) + mu * s * psi + mu
        - k * phi * phi)
}

fn uv_jet(family: &PhiFamily, u: f64, v: f64, cfg: &DiffConfig) -> Result<(f64, f64, f64)> {
    let b2 = u + v * v;
    check_domain(family, b2, v)?;
    let j = jet2(&InvSqrtUv(family), &[u, v], cfg)?;
    Ok((j.value, j.grad[1], j.hess[(1, 1)]))
}

/// `[kappa - mu(u + v^2)] f_vv - mu v f_v + mu f - K f^{-3}` with `f = phi^{-1/2}`.
pub fn residual_pde5(
    family: &PhiFamily,
    u: f64,
    v: f64,
    (kappa, mu, k): (f64, f64, f64),
    cfg: &DiffConfig,
) -> Result<f64> {
    let (f, fv, fvv) = uv_jet(family, u, v, cfg)?;
    Ok((kappa - mu * (u + v * v)) * fvv - mu * v * fv + mu * f - k / f.powi(3))
}

/// `(u + v^2) f_vv + v f_v - f - tau f^{-3}`, the kappa = 0 reduction.
pub fn residual_pde6(family: &PhiFamily, u: f64, v: f64, tau: f64, cfg: &DiffConfig) -> Result<f64> {
    let (f, fv, fvv) = uv_jet(family, u, v, cfg)?;
    Ok((u + v * v) * fvv + v * fv - f - tau / f.powi(3))
}

/// `f_vv - sigma f^{-3}`, the mu = 0 reduction.
pub fn eval_eqn01_residual(
    family: &PhiFamily,
    u: f64,
    v: f64,
    sigma: f64,
    cfg: &DiffConfig,
) -> Result<f64> {
    let (f, _, fvv) = uv_jet(family, u, v, cfg)?;
    Ok(fvv - sigma / f.powi(3))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularityReport {
    /// `min (phi - s phi2)` over the grid.
    pub min_first: f64,
    /// `min (phi - s phi2 + (b^2 - s^2) phi22)` over the grid.
    pub min_second: f64,
    /// First grid point `(b, s)` where either quantity is not positive.
    pub first_violation: Option<(f64, f64)>,
    /// `phi - s phi2` vanishes at `s = +-b` for some sampled `b`.
    pub singular_at_pm_b: bool,
    pub points: usize,
    pub skipped: usize,
}

/// Samples the two regularity quantities on `b in b_range`, `|s| <= b`.
pub fn regularity_check(
    family: &PhiFamily,
    b_range: (f64, f64),
    grid: usize,
    cfg: &DiffConfig,
) -> Result<RegularityReport> {
    let (lo, hi) = b_range;
    if !(lo >= 0.0 && hi >= lo) || grid < 2 {
        return Err(Error::InvalidArgument(format!(
            "bad b range ({lo}, {hi}) or grid {grid}"
        )));
    }
    let mut rep = RegularityReport {
        min_first: f64::INFINITY,
        min_second: f64::INFINITY,
        first_violation: None,
        singular_at_pm_b: false,
        points: 0,
        skipped: 0,
    };
    for ib in 0..grid {
        let b = lo + (hi - lo) * ib as f64 / (grid - 1) as f64;
        let mut edge_min = f64::INFINITY;
        let mut edge_scale = 0.0f64;
        for is in 0..grid {
            let s = b * (-1.0 + 2.0 * is as f64 / (grid - 1) as f64);
            let edge = is == 0 || is == grid - 1;
            // endpoints may be branch points; approach them from inside
            let candidates = if edge {
                vec![s, s * (1.0 - 1e-9)]
            } else {
                vec![s]
            };
            let mut done = false;
            for s in candidates {
                if let Ok(j) = phi_jet(family, b * b, s, cfg) {
                    let first = j.phi - s * j.phi2;
                    let second = first + (b * b - s * s) * j.phi22;
                    rep.points += 1;
                    rep.min_first = rep.min_first.min(first);
                    rep.min_second = rep.min_second.min(second);
                    if rep.first_violation.is_none() && (first <= 0.0 || second <= 0.0) {
                        rep.first_violation = Some((b, s));
                    }
                    if edge {
                        edge_min = edge_min.min(first.abs());
                        edge_scale = edge_scale.max(j.phi.abs());
                    }
                    done = true;
                    break;
                }
            }
            if !done {
                rep.skipped += 1;
            }
        }
        if b > 0.0 && edge_min <= 1e-7 * edge_scale.max(1.0) {
            rep.singular_at_pm_b = true;
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::{PqPair, Sign};

    fn funk() -> PhiFamily {
        PhiFamily::Funk {
            sigma: -0.25,
            c: 1.0,
            sign: Sign::Plus,
        }
    }

    #[test]
    fn square_b_jet() {
        let j = phi_jet(&PhiFamily::SquareB, 0.25, 0.1, &DiffConfig::jet()).unwrap();
        assert!((j.phi2 - 1.2).abs() < 1e-14);
        assert!((j.phi1 - 1.2).abs() < 1e-14);
        assert!((j.psi - 2.0).abs() < 1e-14);
        let f = phi_jet(&PhiFamily::SquareB, 0.25, 0.1, &DiffConfig::fd()).unwrap();
        assert!((f.phi1 - 1.2).abs() < 1e-8 && (f.phi2 - 1.2).abs() < 1e-8);
        let one = PhiFamily::custom("1").unwrap();
        assert_eq!(phi_jet(&one, 0.3, 0.1, &DiffConfig::jet()).unwrap().psi, 0.0);
    }

    #[test]
    fn residuals_of_known_solutions() {
        let cfg = DiffConfig::jet();
        for (b2, s) in [(0.1, 0.2), (0.5, -0.6), (0.7, 0.1)] {
            assert!(residual_pde(&funk(), b2, s, &cfg).unwrap().abs() < 1e-12);
            let r = residual_pde2(&funk(), b2, s, (1.0, 0.0, -0.25), &cfg).unwrap();
            assert!(r.abs() < 1e-12);
            assert!(residual_pde(&PhiFamily::SquareB, b2, s, &cfg).unwrap().abs() < 1e-12);
            let r = residual_pde2(&PhiFamily::SquareB, b2, s, (0.0, -1.0, 0.0), &cfg).unwrap();
            assert!(r.abs() < 1e-12);
        }
        let witness = PhiFamily::custom("1 + s^2").unwrap();
        assert!((residual_pde(&witness, 0.5, 0.3, &cfg).unwrap() - 2.0).abs() < 1e-14);
        let one = PhiFamily::custom("1").unwrap();
        assert_eq!(residual_pde2(&one, 0.5, 0.3, (0.0, 0.0, 0.0), &cfg).unwrap(), 0.0);
    }

    #[test]
    fn uv_forms_agree() {
        let cfg = DiffConfig::jet();
        let (u, v) = (0.3, 0.2);
        let r = residual_pde5(&funk(), u, v, (1.0, 0.0, -0.25), &cfg).unwrap();
        assert!(r.abs() < 1e-12);
        let r = eval_eqn01_residual(&funk(), u, v, -0.25, &cfg).unwrap();
        assert!(r.abs() < 1e-12);
        // kappa = 0, mu = -1: pde5 = -mu * pde6 = pde6
        let fam = PhiFamily::KappaZero {
            pair: PqPair::explicit(-1.0, "sqrt(1 + u)", "1/(sqrt(1 + u) + 1)").unwrap(),
            sign: Sign::Minus,
        };
        let a = residual_pde5(&fam, u, v, (0.0, -1.0, -1.0), &cfg).unwrap();
        let b = residual_pde6(&fam, u, v, -1.0, &cfg).unwrap();
        assert!(a.abs() < 1e-11 && b.abs() < 1e-11, "{a} {b}");
        let sq = PhiFamily::SquareB;
        let a = residual_pde5(&sq, 0.2, 0.1, (0.0, -1.0, 0.3), &cfg).unwrap();
        let b = residual_pde6(&sq, 0.2, 0.1, 0.3, &cfg).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn inverse_forms_solve_the_reduced_equation() {
        let cfg = DiffConfig::jet();
        let lin = PhiFamily::InverseLinear {
            sigma: -1.0,
            p: crate::expr::Expr::parse("1", &["u"]).unwrap(),
            sign: Sign::Plus,
        };
        assert!(eval_eqn01_residual(&lin, 0.2, 0.1, -1.0, &cfg).unwrap().abs() < 1e-9);
        let quad = PhiFamily::InverseQuadratic {
            sigma: 1.0,
            p: crate::expr::Expr::parse("0", &["u"]).unwrap(),
            q: crate::expr::Expr::parse("1", &["u"]).unwrap(),
        };
        assert!(eval_eqn01_residual(&quad, 0.2, 0.1, 1.0, &cfg).unwrap().abs() < 1e-9);
    }

    #[test]
    fn regularity_reports() {
        let cfg = DiffConfig::jet();
        let r = regularity_check(&funk(), (0.0, 0.9), 12, &cfg).unwrap();
        assert!(r.min_first > 0.0 && r.min_second > 0.0);
        assert!(!r.singular_at_pm_b);
        let r = regularity_check(&PhiFamily::SquareB, (0.1, 0.9), 12, &cfg).unwrap();
        assert!(r.singular_at_pm_b);
        assert!(r.min_first.abs() < 1e-12);
        let one = PhiFamily::custom("1").unwrap();
        let r = regularity_check(&one, (0.0, 0.9), 5, &cfg).unwrap();
        assert_eq!((r.min_first, r.min_second), (1.0, 1.0));
    }
}
