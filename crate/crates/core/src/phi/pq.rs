//! The `(p(u), q(u))` pairs behind the kappa = 0 families and the quartic
//! that defines the solved-`q` families.
//!
//! A pair yields constant flag curvature `K = -tau mu` exactly when
//!
//! ```text
//! r1 = u q^2 p' + (p^2 + tau) q'             = 0
//! r2 = q p' - 2 p q' - u q q' - 2 q^2        = 0
//! ```
//!
//! and then also `r3 = u^2 p' q^2 - 2(p^2 + tau - u p p') q + (p^2 + tau) p' = 0`.

use serde::{Deserialize, Serialize};

use super::Sign;
use crate::diff::Dual;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::scalar::Scalar;

/// Relative size below which the discriminant in the `q` formula is taken
/// to vanish identically (it does for whole sub-families, where a square
/// root of zero would poison derivatives).
const DOUBLE_ROOT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PqPair {
    /// `p = p_sign sqrt(-tau)`, `q = q_sign (C + root_sign sqrt(C^2 + 8 p u))^2 / (4 u^2)`.
    ConstP {
        tau: f64,
        c: f64,
        p_sign: Sign,
        q_sign: Sign,
        root_sign: Sign,
    },
    /// `p` from `u = C (p^2 + tau) +- sqrt(D) p sqrt(p^2 + tau)` solved for
    /// `p`, and `q` from the quadratic `r3 = 0`.
    Quadratic {
        tau: f64,
        c: f64,
        d: f64,
        p_sign: Sign,
        inner_sign: Sign,
        q_sign: Sign,
    },
    /// Pair given by expressions in `u`.
    Explicit { tau: f64, p: Expr, q: Expr },
}

impl PqPair {
    pub fn explicit(tau: f64, p: &str, q: &str) -> Result<Self> {
        Ok(PqPair::Explicit {
            tau,
            p: Expr::parse(p, &["u"])?,
            q: Expr::parse(q, &["u"])?,
        })
    }

    pub fn tau(&self) -> f64 {
        match self {
            PqPair::ConstP { tau, .. }
            | PqPair::Quadratic { tau, .. }
            | PqPair::Explicit { tau, .. } => *tau,
        }
    }

    pub(crate) fn prepare(&mut self) -> Result<()> {
        match self {
            PqPair::Explicit { p, q, .. } => {
                p.rebind(&["u"])?;
                q.rebind(&["u"])?;
            }
            PqPair::Quadratic { c, d, .. } => {
                if *c * *c == *d {
                    return Err(Error::Config("quadratic pair needs C^2 != D".into()));
                }
            }
            PqPair::ConstP { tau, .. } => {
                if *tau > 0.0 {
                    return Err(Error::Config("constant-p pair needs tau <= 0".into()));
                }
            }
        }
        Ok(())
    }

    /// Unchecked `(p(u), q(u))` on any scalar.
    pub fn eval<S: Scalar>(&self, u: S) -> (S, S) {
        match self {
            PqPair::ConstP {
                tau,
                c,
                p_sign,
                q_sign,
                root_sign,
            } => {
                let p = p_sign.value() * (-tau).sqrt();
                let t = (u * (8.0 * p) + c * c).sqrt() * root_sign.value() + *c;
                let q = t * t / (u * u * 4.0) * q_sign.value();
                (S::cst(p), q)
            }
            PqPair::Quadratic {
                tau,
                c,
                d,
                p_sign,
                inner_sign,
                q_sign,
            } => {
                let pd = quadratic_p(Dual::var(u), *tau, *c, *d, *p_sign, *inner_sign);
                let (p, dp) = (pd.v, pd.d);
                let a = p * p + *tau - u * p * dp;
                let disc = a * a - (p * p + *tau) * u * u * dp * dp;
                let root = if disc.re().abs() <= DOUBLE_ROOT * a.re() * a.re() {
                    S::zero()
                } else {
                    disc.sqrt() * q_sign.value()
                };
                (p, (a + root) / (u * u * dp))
            }
            PqPair::Explicit { p, q, .. } => (p.eval(&[u]), q.eval(&[u])),
        }
    }

    /// Verifies the radicands of the pair at `u`.
    pub fn check(&self, u: f64) -> Result<()> {
        let undefined = |what: &str, v: f64| {
            Err(Error::BranchUndefined(format!("{what} = {v:e} at u = {u}")))
        };
        if u == 0.0 {
            return undefined("u", u);
        }
        match self {
            PqPair::ConstP { tau, c, p_sign, .. } => {
                if *tau > 0.0 {
                    return undefined("-tau", -tau);
                }
                let p = p_sign.value() * (-tau).sqrt();
                let r = c * c + 8.0 * p * u;
                if r < 0.0 {
                    return undefined("C^2 + 8pu", r);
                }
            }
            PqPair::Quadratic {
                tau,
                c,
                d,
                inner_sign,
                ..
            } => {
                let k = c * tau - 2.0 * u;
                let inner = d * k * k - d * (c * c - d) * tau * tau;
                if inner < 0.0 {
                    return undefined("D(C tau - 2u)^2 - D(C^2 - D) tau^2", inner);
                }
                let p2 = (-(c * c - d) * tau - c * k + inner_sign.value() * inner.sqrt())
                    / (2.0 * (c * c - d));
                if p2 < 0.0 {
                    return undefined("p^2", p2);
                }
                let (p, dp) = {
                    let pd = quadratic_p(
                        Dual::var(u),
                        *tau,
                        *c,
                        *d,
                        Sign::Plus,
                        *inner_sign,
                    );
                    (pd.v, pd.d)
                };
                if dp == 0.0 || !dp.is_finite() {
                    return undefined("p'", dp);
                }
                let a = p * p + tau - u * p * dp;
                let disc = a * a - (p * p + tau) * u * u * dp * dp;
                if disc < -DOUBLE_ROOT * a * a {
                    return undefined("(p^2 + tau - u p p')^2 - (p^2 + tau) u^2 p'^2", disc);
                }
            }
            PqPair::Explicit { .. } => {}
        }
        let (p, q) = self.eval(u);
        if !p.is_finite() || !q.is_finite() {
            return undefined("p, q", if p.is_finite() { q } else { p });
        }
        Ok(())
    }
}

fn quadratic_p<S: Scalar>(u: S, tau: f64, c: f64, d: f64, p_sign: Sign, inner_sign: Sign) -> S {
    let e = c * c - d;
    let k = -u * 2.0 + c * tau;
    let mut num = -k * c - e * tau;
    if d != 0.0 {
        let inner = k * k * d - d * e * tau * tau;
        num = num + inner.sqrt() * inner_sign.value();
    }
    (num / (2.0 * e)).sqrt() * p_sign.value()
}

/// Checked `(p(u), q(u))`.
pub fn family3_pq(pair: &PqPair, u: f64) -> Result<(f64, f64)> {
    pair.check(u)?;
    Ok(pair.eval(u))
}

/// `(r1, r2, r3)` of the pair at `u`, derivatives by dual numbers.
pub fn residual_ode_system(pair: &PqPair, u: f64) -> Result<(f64, f64, f64)> {
    pair.check(u)?;
    let (p, q) = pair.eval(Dual::var(u));
    let tau = pair.tau();
    let (p, dp, q, dq) = (p.v, p.d, q.v, q.d);
    let r1 = u * q * q * dp + (p * p + tau) * dq;
    let r2 = q * dp - 2.0 * p * dq - u * q * dq - 2.0 * q * q;
    let r3 = u * u * dp * q * q - 2.0 * (p * p + tau - u * p * dp) * q + (p * p + tau) * dp;
    if [r1, r2, r3].iter().all(|v| v.is_finite()) {
        Ok((r1, r2, r3))
    } else {
        Err(Error::NonFiniteValue(format!("ode residuals at u = {u}")))
    }
}

pub(crate) fn solution3_value<S: Scalar>(p: S, q: S, tau: f64, u: S, v: S, sign: Sign) -> S {
    let t = (u + v * v).sqrt() + v * sign.value();
    let w = t * t;
    let den = q * w + p;
    q * w * 2.0 / (den * den + tau)
}

/// `2 q W / ((q W + p)^2 + tau)`, `W = (sqrt(u + v^2) + sign v)^2`.
pub fn eval_solution3(pair: &PqPair, u: f64, v: f64, sign: Sign) -> Result<f64> {
    if !(u + v * v > 0.0) {
        return Err(Error::DomainViolation(format!("u + v^2 = {} <= 0", u + v * v)));
    }
    let (p, q) = family3_pq(pair, u)?;
    let t = (u + v * v).sqrt() + sign.value() * v;
    let w = t * t;
    let den = (q * w + p).powi(2) + pair.tau();
    if den == 0.0 || !den.is_finite() {
        return Err(Error::DomainViolation("vanishing denominator".into()));
    }
    Ok(2.0 * q * w / den)
}

/// Real non-zero roots of `D^2 q^4 + (u - C) q^2 - sigma = 0`, ascending.
pub fn solve_q_quartic(u: f64, sigma: f64, c: f64, d: f64) -> Result<Vec<f64>> {
    let w = u - c;
    let mut squares = Vec::new();
    if d == 0.0 {
        if w != 0.0 {
            squares.push(sigma / -w);
        }
    } else {
        let disc = w * w + 4.0 * d * d * sigma;
        if disc >= 0.0 {
            let r = disc.sqrt();
            squares.push((-w + r) / (2.0 * d * d));
            if r > 0.0 {
                squares.push((-w - r) / (2.0 * d * d));
            }
        }
    }
    let mut roots: Vec<f64> = squares
        .into_iter()
        .filter(|&t| t > 0.0)
        .flat_map(|t| [t.sqrt(), -t.sqrt()])
        .collect();
    if roots.is_empty() {
        return Err(Error::NoRealRoot { u });
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}
