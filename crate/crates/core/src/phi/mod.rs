//! Families of `phi(b^2, s)` defining general (alpha, beta)-metrics
//! `F = alpha phi(b^2, beta/alpha)`, plus the residual checkers that decide
//! whether a family yields projectively flat metrics of constant flag
//! curvature.
//!
//! Subscript 1 denotes `d/d(b^2)`, subscript 2 denotes `d/ds`. The auxiliary
//! variables `u = b^2 - s^2`, `v = s` are used by the kappa = 0 families.

mod general;
pub mod pq;
mod residual;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::scalar::Scalar;

pub use general::general_solution;
pub use pq::{eval_solution3, family3_pq, residual_ode_system, solve_q_quartic, PqPair};
pub(crate) use residual::psi_jet;
pub use residual::{
    eval_eqn01_residual, phi_jet, regularity_check, residual_pde, residual_pde2, residual_pde5,
    residual_pde6, PhiJet, RegularityReport,
};

/// A choice of sign, written as `1` or `-1` in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(format!("sign must be 1 or -1, got {v}")),
        }
    }
}

/// Variables available to custom `phi` expressions.
pub const PHI_VARS: [&str; 5] = ["b2", "s", "b", "u", "v"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhiFamily {
    /// `1/(2 sqrt(-sigma)) / (sqrt(C - b^2 + s^2) - sign s)`; curvature
    /// `sigma kappa` on a flat chart.
    Funk { sigma: f64, c: f64, sign: Sign },
    /// `q / (q^2 (D q + s)^2 + sigma)` where `q(u)` is a real root of
    /// `D^2 q^4 + (u - C) q^2 - sigma = 0`.
    SolvedQ {
        sigma: f64,
        c: f64,
        d: f64,
        root: Sign,
        q_sign: Sign,
    },
    /// `Re 1/(sqrt(1 + 2i + b^2 - s^2) + i s)`, principal square root.
    Bryant,
    /// Difference of two Funk-type terms with parameter `eps`. With
    /// `literal = true` the second denominator reads `1 - eps b^2` instead of
    /// `1 - eps^2 b^2`; that variant does not solve the curvature equation
    /// and is kept as a negative control.
    ShenEps { eps: f64, literal: bool },
    /// `(b + s)^2`.
    SquareB,
    /// `2 q W / ((q W + p)^2 + tau)` with `W = (sqrt(u + v^2) + sign v)^2`.
    KappaZero { pair: PqPair, sign: Sign },
    /// `1 / (p(u) + sign 2 sqrt(-sigma) v)`.
    InverseLinear { sigma: f64, p: Expr, sign: Sign },
    /// `q(u) / ((p(u) + q(u) v)^2 + sigma)`.
    InverseQuadratic { sigma: f64, p: Expr, q: Expr },
    /// `f(b^2 - s^2) + 2 s int_0^s f'(b^2 - t^2) dt + g(b^2) s`.
    General { f: Expr, g: Expr },
    /// Carries a solution for `(mu, kappa) = (0, 1)` over to a chart with the
    /// given `mu != 0`, `kappa > 0`.
    Transfer {
        base: Box<PhiFamily>,
        mu: f64,
        kappa: f64,
    },
    /// Any expression in `b2, s, b, u, v`.
    Custom { expr: Expr },
}

impl PhiFamily {
    pub fn custom(src: &str) -> Result<Self> {
        Ok(PhiFamily::Custom {
            expr: Expr::parse(src, &PHI_VARS)?,
        })
    }

    /// Binds expression variables after deserialization and validates
    /// parameters.
    pub fn prepare(&mut self) -> Result<()> {
        match self {
            PhiFamily::Funk { sigma, c, .. } => {
                if !(*sigma < 0.0) || !c.is_finite() {
                    return Err(Error::Config("funk family needs sigma < 0".into()));
                }
            }
            PhiFamily::SolvedQ { d, c, sigma, .. } => {
                if ![*d, *c, *sigma].iter().all(|v| v.is_finite()) {
                    return Err(Error::Config("solved-q parameters must be finite".into()));
                }
            }
            PhiFamily::ShenEps { eps, .. } => {
                if !(eps.abs() < 1.0) {
                    return Err(Error::Config("shen family needs |eps| < 1".into()));
                }
            }
            PhiFamily::KappaZero { pair, .. } => pair.prepare()?,
            PhiFamily::InverseLinear { sigma, p, .. } => {
                if *sigma > 0.0 {
                    return Err(Error::Config("inverse-linear family needs sigma <= 0".into()));
                }
                p.rebind(&["u"])?;
            }
            PhiFamily::InverseQuadratic { p, q, .. } => {
                p.rebind(&["u"])?;
                q.rebind(&["u"])?;
            }
            PhiFamily::General { f, g } => {
                f.rebind(&["u"])?;
                g.rebind(&["b2"])?;
            }
            PhiFamily::Transfer { base, mu, kappa } => {
                if *mu == 0.0 || !(*kappa > 0.0) {
                    return Err(Error::Config("transfer needs mu != 0 and kappa > 0".into()));
                }
                base.prepare()?;
            }
            PhiFamily::Custom { expr } => expr.rebind(&PHI_VARS)?,
            PhiFamily::Bryant | PhiFamily::SquareB => {}
        }
        Ok(())
    }

    pub fn label(&self) -> &'static str {
        match self {
            PhiFamily::Funk { .. } => "funk",
            PhiFamily::SolvedQ { .. } => "solved-q",
            PhiFamily::Bryant => "bryant",
            PhiFamily::ShenEps { .. } => "shen-eps",
            PhiFamily::SquareB => "square-b",
            PhiFamily::KappaZero { .. } => "kappa-zero",
            PhiFamily::InverseLinear { .. } => "inverse-linear",
            PhiFamily::InverseQuadratic { .. } => "inverse-quadratic",
            PhiFamily::General { .. } => "general",
            PhiFamily::Transfer { .. } => "transfer",
            PhiFamily::Custom { .. } => "custom",
        }
    }

    /// Unchecked evaluation on any scalar; produces NaN outside the domain.
    pub fn eval<S: Scalar>(&self, b2: S, s: S) -> S {
        match self {
            PhiFamily::Funk { sigma, c, sign } => {
                let r = (-b2 + s * s + *c).sqrt();
                (r - s * sign.value()).recip() / (2.0 * (-sigma).sqrt())
            }
            PhiFamily::SolvedQ {
                sigma,
                c,
                d,
                root,
                q_sign,
            } => {
                let u = b2 - s * s;
                let q2 = if *d == 0.0 {
                    (-u + *c).recip() * *sigma
                } else {
                    let w = u - *c;
                    let disc = w * w + 4.0 * d * d * sigma;
                    (-w + disc.sqrt() * root.value()) / (2.0 * d * d)
                };
                let q = q2.sqrt() * q_sign.value();
                let t = q * *d + s;
                q / (q2 * t * t + *sigma)
            }
            PhiFamily::Bryant => {
                let a = b2 - s * s + 1.0;
                let r = (a * a + 4.0).sqrt();
                let wr = ((r + a) * 0.5).sqrt();
                let wi = ((r - a) * 0.5).sqrt() + s;
                wr / (wr * wr + wi * wi)
            }
            PhiFamily::ShenEps { eps, literal } => {
                let e = *eps;
                let first = ((-b2 + s * s + 1.0).sqrt() + s) / (-b2 + 1.0);
                let inner = ((-b2 + s * s) * (e * e) + 1.0).sqrt() * e + s * (e * e);
                let den = if *literal { -b2 * e + 1.0 } else { -b2 * (e * e) + 1.0 };
                (first - inner / den) * 0.5
            }
            PhiFamily::SquareB => {
                let t = b2.sqrt() + s;
                t * t
            }
            PhiFamily::KappaZero { pair, sign } => {
                let u = b2 - s * s;
                let (p, q) = pair.eval(u);
                pq::solution3_value(p, q, pair.tau(), u, s, *sign)
            }
            PhiFamily::InverseLinear { sigma, p, sign } => {
                let u = b2 - s * s;
                (p.eval(&[u]) + s * (sign.value() * 2.0 * (-sigma).sqrt())).recip()
            }
            PhiFamily::InverseQuadratic { sigma, p, q } => {
                let u = b2 - s * s;
                let qv = q.eval(&[u]);
                let t = p.eval(&[u]) + qv * s;
                qv / (t * t + *sigma)
            }
            PhiFamily::General { f, g } => general::eval(f, g, b2, s),
            PhiFamily::Transfer { base, mu, kappa } => {
                let d = -b2 * *mu + *kappa;
                let e = d + s * s * *mu;
                let bb2 = b2 * (mu * mu / kappa) / d;
                let bs = s * mu.abs() / (d.sqrt() * e.sqrt());
                e.sqrt() / d * mu.abs().sqrt() * base.eval(bb2, bs)
            }
            PhiFamily::Custom { expr } => {
                let u = b2 - s * s;
                let b = if expr.uses(2) { b2.sqrt() } else { S::zero() };
                expr.eval(&[b2, s, b, u, s])
            }
        }
    }

    /// Family-specific radicand and branch checks at `(b2, s)`.
    fn check_branches(&self, b2: f64, s: f64) -> Result<()> {
        let dom = |what: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(Error::DomainViolation(format!("{what} = {v:e} is not positive")))
            }
        };
        match self {
            PhiFamily::Funk { c, sign, .. } => {
                dom("C - b^2 + s^2", c - b2 + s * s)?;
                let den = (c - b2 + s * s).sqrt() - sign.value() * s;
                dom("funk denominator", den.abs())
            }
            PhiFamily::SolvedQ { sigma, c, d, .. } => {
                let u = b2 - s * s;
                solve_q_quartic(u, *sigma, *c, *d).map(|_| ())
            }
            PhiFamily::ShenEps { eps, literal } => {
                let e = *eps;
                dom("1 - b^2 + s^2", 1.0 - b2 + s * s)?;
                dom("1 - b^2", 1.0 - b2)?;
                dom("1 - eps^2 (b^2 - s^2)", 1.0 - e * e * (b2 - s * s))?;
                let den = if *literal { 1.0 - e * b2 } else { 1.0 - e * e * b2 };
                dom("second denominator", den.abs())
            }
            PhiFamily::KappaZero { pair, .. } => {
                dom("u + v^2", b2)?;
                pair.check(b2 - s * s)
            }
            PhiFamily::General { f, .. } => general::check(f, b2, s),
            PhiFamily::Transfer { base, mu, kappa } => {
                let d = kappa - mu * b2;
                dom("kappa - mu b^2", d)?;
                dom("kappa - mu b^2 + mu s^2", d + mu * s * s)?;
                let bb2 = mu * mu * b2 / (kappa * d);
                let bs = mu.abs() * s / (d.sqrt() * (d + mu * s * s).sqrt());
                base.check_branches(bb2, bs)
            }
            _ => Ok(()),
        }
    }
}

/// Checked evaluation: `|s| <= b`, branch radicands, and `phi > 0`.
pub fn eval_phi(family: &PhiFamily, b2: f64, s: f64) -> Result<f64> {
    check_domain(family, b2, s)?;
    let v = family.eval(b2, s);
    if !v.is_finite() {
        return Err(Error::NonFiniteValue(format!("{} at ({b2}, {s})", family.label())));
    }
    if v <= 0.0 {
        return Err(Error::DomainViolation(format!(
            "phi = {v:e} is not positive at (b^2, s) = ({b2}, {s})"
        )));
    }
    Ok(v)
}

fn check_domain(family: &PhiFamily, b2: f64, s: f64) -> Result<()> {
    if !(b2 >= 0.0) || !s.is_finite() || !b2.is_finite() {
        return Err(Error::DomainViolation(format!("invalid (b^2, s) = ({b2}, {s})")));
    }
    if s * s > b2 * (1.0 + 1e-12) {
        return Err(Error::DomainViolation(format!(
            "|s| = {} exceeds b = {}",
            s.abs(),
            b2.sqrt()
        )));
    }
    family.check_branches(b2, s)
}

/// `phi` for a chart with `(mu, kappa)` obtained from `phibar`, a solution on
/// a chart with `(0, 1)`.
pub fn phi_transfer(phibar: &PhiFamily, mu: f64, kappa: f64, b2: f64, s: f64) -> Result<f64> {
    if mu == 0.0 || !(kappa > 0.0) {
        return Err(Error::UnsupportedSignature(format!(
            "transfer needs mu != 0 and kappa > 0 (mu = {mu}, kappa = {kappa})"
        )));
    }
    let fam = PhiFamily::Transfer {
        base: Box::new(phibar.clone()),
        mu,
        kappa,
    };
    eval_phi(&fam, b2, s)
}
