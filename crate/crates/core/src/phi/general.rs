//! The two-function family `f(b^2 - s^2) + 2 s int_0^s f'(b^2 - t^2) dt + g(b^2) s`,
//! which is the general solution of the projective flatness equation for
//! `phi`. The integral is computed as `s int_0^1 f'(b^2 - s^2 t^2) dt`.

use super::PhiFamily;
use crate::diff::Dual;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quad::{integrate, integrate_on};
use crate::scalar::Scalar;

pub const QUAD_TOL: f64 = 1e-10;

/// Builds the family from source expressions for `f(u)` and `g(b2)`.
pub fn general_solution(f: &str, g: &str) -> Result<PhiFamily> {
    Ok(PhiFamily::General {
        f: Expr::parse(f, &["u"])?,
        g: Expr::parse(g, &["b2"])?,
    })
}

fn fprime<S: Scalar>(f: &Expr, w: S) -> S {
    f.eval(&[Dual::var(w)]).d
}

fn partition(f: &Expr, b2: f64, s: f64) -> Result<Vec<(f64, f64)>> {
    let q = integrate(|t| fprime(f, b2 - s * s * t * t), 0.0, 1.0, QUAD_TOL)?;
    Ok(q.partition)
}

pub(super) fn check(f: &Expr, b2: f64, s: f64) -> Result<()> {
    partition(f, b2, s).map(|_| ())
}

pub(super) fn eval<S: Scalar>(f: &Expr, g: &Expr, b2: S, s: S) -> S {
    let part = match partition(f, b2.re(), s.re()) {
        Ok(p) => p,
        Err(Error::QuadratureFailure { .. }) | Err(_) => return S::cst(f64::NAN),
    };
    let integral = integrate_on(|t| fprime(f, b2 - s * s * (t * t)), &part);
    f.eval(&[b2 - s * s]) + s * s * integral * 2.0 + g.eval(&[b2]) * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::{eval_phi, residual_pde};
    use crate::diff::DiffConfig;

    #[test]
    fn constant_and_linear_f() {
        let one = general_solution("1", "0").unwrap();
        assert_eq!(eval_phi(&one, 0.4, 0.3).unwrap(), 1.0);
        let lin = general_solution("u", "0").unwrap();
        let (b2, s) = (0.5, 0.3);
        assert!((eval_phi(&lin, b2, s).unwrap() - (b2 + s * s)).abs() < 1e-14);
        let r = residual_pde(&lin, b2, s, &DiffConfig::jet()).unwrap();
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn inverse_root_reproduces_degenerate_member() {
        let fam = general_solution("u^(-1/2)", "0").unwrap();
        for (b2, s) in [(0.5, 0.3), (0.8, -0.5), (0.3, 0.0)] {
            let want = (b2 - s * s).sqrt() / b2;
            assert!((eval_phi(&fam, b2, s).unwrap() - want).abs() < 1e-9);
            let r = residual_pde(&fam, b2, s, &DiffConfig::jet()).unwrap();
            assert!(r.abs() < 1e-7, "{r}");
        }
    }

    #[test]
    fn g_adds_a_linear_term() {
        let fam = general_solution("1", "b2").unwrap();
        assert!((eval_phi(&fam, 0.5, 0.2).unwrap() - 1.1).abs() < 1e-15);
    }
}
