//! Differentiation engine.
//!
//! Two independent routes produce the same [`Jet2`] (value, gradient,
//! Hessian) of a scalar field:
//!
//! * `ForwardJet` pushes [`Taylor2`] through the generic field definition and
//!   is exact to rounding for arithmetic, `sqrt`, `exp`/`ln` and rational
//!   compositions.
//! * `CentralFd` evaluates the field on `f64` only, using central stencils
//!   with optional one-level Richardson extrapolation. It exists as an oracle
//!   for the jet route.
//!
//! Third derivatives come from `Taylor2<Dual<f64>>`; higher orders are reached
//! elsewhere by nesting jets.

pub mod dual;
pub mod taylor;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use dual::{derivative, Dual};
pub use taylor::{Taylor2, MAX_VARS};

/// Scalar field on `R^m`, written once and evaluated on any [`Scalar`].
pub trait Field: Sync {
    fn dim(&self) -> usize;
    fn eval<S: Scalar>(&self, x: &[S]) -> S;
}

/// Vector-valued counterpart of [`Field`].
pub trait VectorField: Sync {
    fn dim(&self) -> usize;
    fn eval<S: Scalar>(&self, x: &[S]) -> Vec<S>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffMode {
    ForwardJet,
    CentralFd,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffConfig {
    pub mode: DiffMode,
    /// Base relative step; the default is `eps^(1/3)`. Per-order steps are
    /// derived from it (see [`DiffConfig::steps`]).
    pub fd_step: f64,
    pub richardson: bool,
}

impl Default for DiffConfig {
    fn default() -> Self {
        Self {
            mode: DiffMode::ForwardJet,
            fd_step: f64::EPSILON.cbrt(),
            richardson: true,
        }
    }
}

impl DiffConfig {
    pub fn jet() -> Self {
        Self::default()
    }

    pub fn fd() -> Self {
        Self {
            mode: DiffMode::CentralFd,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode == DiffMode::CentralFd && !(self.fd_step > 0.0 && self.fd_step < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "fd_step must lie in (0, 1), got {}",
                self.fd_step
            )));
        }
        Ok(())
    }

    /// Relative steps for first, second and third derivatives.
    ///
    /// `fd_step` plays the role of `eps^(1/3)`; each order uses the step that
    /// balances truncation against rounding for its stencil, with or without
    /// Richardson extrapolation.
    pub fn steps(&self) -> (f64, f64, f64) {
        let t = self.fd_step;
        if self.richardson {
            (t.powf(0.6), t.powf(0.5), t.powf(3.0 / 7.0))
        } else {
            (t, t.powf(0.75), t.powf(0.6))
        }
    }
}

/// Value, gradient and Hessian of a scalar field at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl Jet2 {
    pub fn from_taylor(t: &Taylor2<f64>, m: usize) -> Self {
        Self {
            value: t.value(),
            grad: DVector::from_fn(m, |i, _| t.grad(i)),
            hess: DMatrix::from_fn(m, m, |i, j| t.hess(i, j)),
        }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    fn ensure_finite(self, what: &str) -> Result<Self> {
        let ok = self.value.is_finite()
            && self.grad.iter().all(|v| v.is_finite())
            && self.hess.iter().all(|v| v.is_finite());
        if ok {
            Ok(self)
        } else {
            Err(Error::NonFiniteValue(what.to_string()))
        }
    }
}

fn check_dim(m: usize, x: &[f64]) -> Result<()> {
    if x.len() != m {
        return Err(Error::InvalidArgument(format!(
            "point has {} coordinates, field expects {m}",
            x.len()
        )));
    }
    if m > MAX_VARS {
        return Err(Error::InvalidArgument(format!(
            "at most {MAX_VARS} variables are supported, got {m}"
        )));
    }
    Ok(())
}

/// Value, gradient and Hessian of `f` at `x`.
pub fn jet2<F: Field>(f: &F, x: &[f64], cfg: &DiffConfig) -> Result<Jet2> {
    check_dim(f.dim(), x)?;
    cfg.validate()?;
    match cfg.mode {
        DiffMode::ForwardJet => {
            let t = f.eval(&Taylor2::seed(x));
            Jet2::from_taylor(&t, x.len()).ensure_finite("jet2")
        }
        DiffMode::CentralFd => {
            let mut jets = fd_jet2_with(|z| Ok(vec![f.eval(z)]), x, cfg)?;
            Ok(jets.remove(0))
        }
    }
}

/// Componentwise [`jet2`] of a vector field.
pub fn jet2_vec<F: VectorField>(f: &F, x: &[f64], cfg: &DiffConfig) -> Result<Vec<Jet2>> {
    check_dim(f.dim(), x)?;
    cfg.validate()?;
    match cfg.mode {
        DiffMode::ForwardJet => f
            .eval(&Taylor2::seed(x))
            .iter()
            .map(|t| Jet2::from_taylor(t, x.len()).ensure_finite("jet2_vec"))
            .collect(),
        DiffMode::CentralFd => fd_jet2_with(|z| Ok(f.eval(z)), x, cfg),
    }
}

/// Mixed third partial `d^3 f / dx_i dx_j dx_k`.
pub fn partial3<F: Field>(
    f: &F,
    x: &[f64],
    (i, j, k): (usize, usize, usize),
    cfg: &DiffConfig,
) -> Result<f64> {
    let m = f.dim();
    check_dim(m, x)?;
    cfg.validate()?;
    if i >= m || j >= m || k >= m {
        return Err(Error::InvalidArgument(format!(
            "index ({i},{j},{k}) out of range for dimension {m}"
        )));
    }
    let v = match cfg.mode {
        DiffMode::ForwardJet => {
            let seeds: Vec<Taylor2<Dual<f64>>> = x
                .iter()
                .enumerate()
                .map(|(l, &xl)| {
                    let d = if l == k { 1.0 } else { 0.0 };
                    Taylor2::var(Dual::new(xl, d), l, m)
                })
                .collect();
            f.eval(&seeds).hess(i, j).d
        }
        DiffMode::CentralFd => {
            let (_, _, rel) = cfg.steps();
            let stencil = |h: f64| -> f64 {
                // product of three central differences
                let mut acc = 0.0;
                let mut z = x.to_vec();
                for a in [1.0, -1.0] {
                    for b in [1.0, -1.0] {
                        for c in [1.0, -1.0] {
                            z.copy_from_slice(x);
                            z[i] += a * h * x[i].abs().max(1.0);
                            z[j] += b * h * x[j].abs().max(1.0);
                            z[k] += c * h * x[k].abs().max(1.0);
                            acc += a * b * c * f.eval(&z);
                        }
                    }
                }
                let si = h * x[i].abs().max(1.0);
                let sj = h * x[j].abs().max(1.0);
                let sk = h * x[k].abs().max(1.0);
                acc / (8.0 * si * sj * sk)
            };
            if cfg.richardson {
                (4.0 * stencil(rel / 2.0) - stencil(rel)) / 3.0
            } else {
                stencil(rel)
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteValue("partial3".into()))
    }
}

/// Central-difference jets of a fallible vector function evaluated on `f64`.
pub fn fd_jet2_with(
    eval: impl Fn(&[f64]) -> Result<Vec<f64>>,
    x: &[f64],
    cfg: &DiffConfig,
) -> Result<Vec<Jet2>> {
    let (r1, r2, _) = cfg.steps();
    let pass = |s1: f64, s2: f64| fd_pass(&eval, x, s1, s2);
    let jets = if cfg.richardson {
        let coarse = pass(r1, r2)?;
        let fine = pass(r1 / 2.0, r2 / 2.0)?;
        coarse
            .into_iter()
            .zip(fine)
            .map(|(c, f)| Jet2 {
                value: f.value,
                grad: (&f.grad * 4.0 - &c.grad) / 3.0,
                hess: (&f.hess * 4.0 - &c.hess) / 3.0,
            })
            .collect()
    } else {
        pass(r1, r2)?
    };
    jets.into_iter()
        .map(|j| j.ensure_finite("central-fd"))
        .collect()
}

fn fd_pass(
    eval: &impl Fn(&[f64]) -> Result<Vec<f64>>,
    x: &[f64],
    rel1: f64,
    rel2: f64,
) -> Result<Vec<Jet2>> {
    let m = x.len();
    let f0 = eval(x)?;
    let nout = f0.len();
    let mut grad = vec![DVector::zeros(m); nout];
    let mut hess = vec![DMatrix::zeros(m, m); nout];
    let mut z = x.to_vec();
    let step = |i: usize, rel: f64| {
        let h = rel * x[i].abs().max(1.0);
        // representable step
        (x[i] + h) - x[i]
    };
    let at = |z: &mut Vec<f64>, moves: &[(usize, f64)]| -> Result<Vec<f64>> {
        z.copy_from_slice(x);
        for &(i, d) in moves {
            z[i] += d;
        }
        eval(z)
    };
    for i in 0..m {
        let h1 = step(i, rel1);
        let fp = at(&mut z, &[(i, h1)])?;
        let fm = at(&mut z, &[(i, -h1)])?;
        let h2 = step(i, rel2);
        let fp2 = at(&mut z, &[(i, h2)])?;
        let fm2 = at(&mut z, &[(i, -h2)])?;
        for o in 0..nout {
            grad[o][i] = (fp[o] - fm[o]) / (2.0 * h1);
            hess[o][(i, i)] = (fp2[o] - 2.0 * f0[o] + fm2[o]) / (h2 * h2);
        }
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let (hi, hj) = (step(i, rel2), step(j, rel2));
            let fpp = at(&mut z, &[(i, hi), (j, hj)])?;
            let fpm = at(&mut z, &[(i, hi), (j, -hj)])?;
            let fmp = at(&mut z, &[(i, -hi), (j, hj)])?;
            let fmm = at(&mut z, &[(i, -hi), (j, -hj)])?;
            for o in 0..nout {
                let v = (fpp[o] - fpm[o] - fmp[o] + fmm[o]) / (4.0 * hi * hj);
                hess[o][(i, j)] = v;
                hess[o][(j, i)] = v;
            }
        }
    }
    Ok(f0
        .into_iter()
        .zip(grad.into_iter().zip(hess))
        .map(|(value, (grad, hess))| Jet2 { value, grad, hess })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Monomial;
    impl Field for Monomial {
        fn dim(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0] * x[0] * x[1]
        }
    }

    struct NormSq;
    impl Field for NormSq {
        fn dim(&self) -> usize {
            3
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            crate::scalar::dot(x, x)
        }
    }

    struct Triple;
    impl Field for Triple {
        fn dim(&self) -> usize {
            3
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0] * x[1] * x[2] + x[0].powi(3)
        }
    }

    struct Bad;
    impl Field for Bad {
        fn dim(&self) -> usize {
            1
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            (x[0] - 2.0).sqrt()
        }
    }

    #[test]
    fn monomial_jet_is_exact() {
        let j = jet2(&Monomial, &[2.0, 3.0], &DiffConfig::jet()).unwrap();
        assert_eq!(j.value, 12.0);
        assert_eq!(j.grad.as_slice(), &[12.0, 4.0]);
        assert_eq!(j.hess[(0, 0)], 6.0);
        assert_eq!(j.hess[(0, 1)], 4.0);
        assert_eq!(j.hess[(1, 0)], 4.0);
    }

    #[test]
    fn norm_squared_has_identity_hessian() {
        let j = jet2(&NormSq, &[1.0, 2.0, 3.0], &DiffConfig::jet()).unwrap();
        assert_eq!(j.grad.as_slice(), &[2.0, 4.0, 6.0]);
        assert_eq!(j.hess, DMatrix::identity(3, 3) * 2.0);
    }

    #[test]
    fn fd_matches_jet_on_monomial() {
        let a = jet2(&Monomial, &[2.0, 3.0], &DiffConfig::jet()).unwrap();
        let b = jet2(&Monomial, &[2.0, 3.0], &DiffConfig::fd()).unwrap();
        assert!((&a.grad - &b.grad).amax() < 1e-9);
        assert!((&a.hess - &b.hess).amax() < 1e-7);
    }

    #[test]
    fn third_partials() {
        let cfg = DiffConfig::jet();
        let x = [2.0, 1.0, 1.0];
        assert!((partial3(&Triple, &x, (0, 0, 0), &cfg).unwrap() - 6.0).abs() < 1e-14);
        let p = partial3(&Triple, &[1.0, 1.0, 1.0], (0, 1, 2), &cfg).unwrap();
        assert!((p - 1.0).abs() < 1e-14);
        let fd = partial3(&Triple, &[1.0, 1.0, 1.0], (0, 1, 2), &DiffConfig::fd()).unwrap();
        assert!((fd - 1.0).abs() < 1e-6);
        let fd = partial3(&Triple, &x, (0, 0, 0), &DiffConfig::fd()).unwrap();
        assert!((fd - 6.0).abs() < 1e-5);
    }

    #[test]
    fn domain_violation_surfaces_as_non_finite() {
        let e = jet2(&Bad, &[1.0], &DiffConfig::jet()).unwrap_err();
        assert!(matches!(e, Error::NonFiniteValue(_)));
        assert!(jet2(&Bad, &[1.0], &DiffConfig::fd()).is_err());
    }

    #[test]
    fn rejects_bad_step_and_dimension() {
        let cfg = DiffConfig {
            fd_step: -1.0,
            ..DiffConfig::fd()
        };
        assert!(jet2(&Monomial, &[1.0, 1.0], &cfg).is_err());
        assert!(jet2(&Monomial, &[1.0], &DiffConfig::jet()).is_err());
    }
}
