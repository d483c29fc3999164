//! Geometry of an arbitrary Finsler function `F(x, y)` on a chart.
//!
//! Everything here is derived from a single generic evaluation of `F`:
//! the fundamental tensor, the geodesic spray, the Riemann curvature and the
//! flag curvature. Metrics of special form ((alpha, beta)-metrics, deformed
//! Riemannian metrics) only need to implement [`FinslerFunction`].

use nalgebra::{DMatrix, DVector};

use crate::diff::{fd_jet2_with, jet2, DiffConfig, DiffMode, Field, Jet2, Taylor2, VectorField};
use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::scalar::{lift, Scalar};

/// A Finsler function on an open set of `R^n`, positively homogeneous of
/// degree one in `y`.
pub trait FinslerFunction: Sync {
    fn dim(&self) -> usize;
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S;
}

/// How the geodesic spray is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SprayRoute {
    /// `G^i = 1/4 g^{il} ([F^2]_{x^k y^l} y^k - [F^2]_{x^l})`.
    Direct,
    /// `G^i = P y^i` with `P = F_{x^k} y^k / (2F)`; valid for projectively
    /// flat metrics and usable even where `g` degenerates.
    Projective,
}

/// Direct spray evaluated on any scalar. Returns NaNs where `g` is singular.
pub fn spray_generic<S: Scalar, F: FinslerFunction>(f: &F, x: &[S], y: &[S]) -> Vec<S> {
    let n = f.dim();
    let mut z = Vec::with_capacity(2 * n);
    z.extend_from_slice(x);
    z.extend_from_slice(y);
    let t = Taylor2::seed(&z);
    let v = f.eval(&t[..n], &t[n..]);
    let f2 = v * v;
    let g: Vec<S> = (0..n * n)
        .map(|k| f2.hess(n + k / n, n + k % n) * 0.5)
        .collect();
    let rhs: Vec<S> = (0..n)
        .map(|l| {
            let mut acc = -f2.grad(l);
            for k in 0..n {
                acc = acc + f2.hess(k, n + l) * y[k];
            }
            acc * 0.25
        })
        .collect();
    solve(&g, &rhs, n).unwrap_or_else(|| vec![S::cst(f64::NAN); n])
}

/// Projective factor `P = F_{x^k} y^k / (2F)` on any scalar.
pub fn projective_factor_generic<S: Scalar, F: FinslerFunction>(f: &F, x: &[S], y: &[S]) -> S {
    let n = f.dim();
    let t = Taylor2::seed(x);
    let ty: Vec<Taylor2<S>> = y.iter().map(|&v| Taylor2::constant(v)).collect();
    let v = f.eval(&t, &ty);
    let mut acc = S::zero();
    for k in 0..n {
        acc = acc + v.grad(k) * y[k];
    }
    acc / (v.value() * 2.0)
}

fn projective_spray_generic<S: Scalar, F: FinslerFunction>(f: &F, x: &[S], y: &[S]) -> Vec<S> {
    let p = projective_factor_generic(f, x, y);
    y.iter().map(|&v| p * v).collect()
}

struct SprayField<'a, F> {
    f: &'a F,
    route: SprayRoute,
}

impl<F: FinslerFunction> VectorField for SprayField<'_, F> {
    fn dim(&self) -> usize {
        2 * self.f.dim()
    }
    fn eval<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        let n = self.f.dim();
        match self.route {
            SprayRoute::Direct => spray_generic(self.f, &z[..n], &z[n..]),
            SprayRoute::Projective => projective_spray_generic(self.f, &z[..n], &z[n..]),
        }
    }
}

/// `F(x, .)` as a field in `y`.
struct InY<'a, F> {
    f: &'a F,
    x: &'a [f64],
}

impl<F: FinslerFunction> Field for InY<'_, F> {
    fn dim(&self) -> usize {
        self.f.dim()
    }
    fn eval<S: Scalar>(&self, y: &[S]) -> S {
        self.f.eval(&lift::<S>(self.x), y)
    }
}

/// `F` as a field in `(x, y)`.
struct InXY<'a, F> {
    f: &'a F,
}

impl<F: FinslerFunction> Field for InXY<'_, F> {
    fn dim(&self) -> usize {
        2 * self.f.dim()
    }
    fn eval<S: Scalar>(&self, z: &[S]) -> S {
        let n = self.f.dim();
        self.f.eval(&z[..n], &z[n..])
    }
}

fn check_point(n: usize, x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != n || y.len() != n {
        return Err(Error::InvalidArgument(format!(
            "expected points in R^{n}, got |x| = {}, |y| = {}",
            x.len(),
            y.len()
        )));
    }
    if y.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidArgument("y must be non-zero".into()));
    }
    Ok(())
}

/// `F`, `F_y` and `F_{yy}` at `(x, y)`.
pub fn y_jet<F: FinslerFunction>(f: &F, x: &[f64], y: &[f64], cfg: &DiffConfig) -> Result<Jet2> {
    check_point(f.dim(), x, y)?;
    jet2(&InY { f, x }, y, cfg)
}

/// Relative eigenvalue floor below which `g` is declared singular.
pub const SINGULAR_RATIO: f64 = 1e-10;

/// Fundamental tensor `g_ij = 1/2 [F^2]_{y^i y^j}`.
pub fn fundamental_tensor<F: FinslerFunction>(
    f: &F,
    x: &[f64],
    y: &[f64],
    cfg: &DiffConfig,
) -> Result<DMatrix<f64>> {
    let j = y_jet(f, x, y, cfg)?;
    let n = f.dim();
    let g = DMatrix::from_fn(n, n, |i, k| {
        j.grad[i] * j.grad[k] + j.value * j.hess[(i, k)]
    });
    let eig = g.clone().symmetric_eigen().eigenvalues;
    let max = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(min > SINGULAR_RATIO * max) {
        return Err(Error::SingularMetric(format!(
            "fundamental tensor eigenvalues {:?}",
            eig.as_slice()
        )));
    }
    Ok(g)
}

/// Smallest eigenvalue of `g` divided by the largest in magnitude.
pub fn definiteness_ratio(g: &DMatrix<f64>) -> f64 {
    let eig = g.clone().symmetric_eigen().eigenvalues;
    let max = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    eig.min() / max
}

/// Spray from the variational formula on `F^2`.
pub fn spray<F: FinslerFunction>(
    f: &F,
    x: &[f64],
    y: &[f64],
    cfg: &DiffConfig,
) -> Result<DVector<f64>> {
    fundamental_tensor(f, x, y, cfg)?;
    let n = f.dim();
    let g = match cfg.mode {
        DiffMode::ForwardJet => spray_generic::<f64, F>(f, x, y),
        DiffMode::CentralFd => spray_fd(f, x, y, cfg)?,
    };
    let g = DVector::from_vec(g);
    debug_assert_eq!(g.len(), n);
    if g.iter().all(|v| v.is_finite()) {
        Ok(g)
    } else {
        Err(Error::NonFiniteValue("spray".into()))
    }
}

fn spray_fd<F: FinslerFunction>(
    f: &F,
    x: &[f64],
    y: &[f64],
    cfg: &DiffConfig,
) -> Result<Vec<f64>> {
    let n = f.dim();
    let mut z = x.to_vec();
    z.extend_from_slice(y);
    let j = jet2(&InXY { f }, &z, cfg)?;
    let fv = j.value;
    // derivatives of F^2 from those of F
    let g = DMatrix::from_fn(n, n, |i, k| {
        j.grad[n + i] * j.grad[n + k] + fv * j.hess[(n + i, n + k)]
    });
    let mut rhs = DVector::zeros(n);
    for l in 0..n {
        let mut acc = -2.0 * fv * j.grad[l];
        for k in 0..n {
            acc += 2.0 * (j.grad[k] * j.grad[n + l] + fv * j.hess[(k, n + l)]) * y[k];
        }
        rhs[l] = 0.25 * acc;
    }
    let sol = g
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularMetric("fundamental tensor".into()))?;
    Ok(sol.as_slice().to_vec())
}

/// Riemann curvature `R^i_j` (row `i`, column `j`) from the spray:
/// `2 G^i_{x^j} - y^k G^i_{x^k y^j} + 2 G^k G^i_{y^k y^j} - G^i_{y^k} G^k_{y^j}`.
pub fn riemann<F: FinslerFunction>(
    f: &F,
    x: &[f64],
    y: &[f64],
    route: SprayRoute,
    cfg: &DiffConfig,
) -> Result<DMatrix<f64>> {
    check_point(f.dim(), x, y)?;
    let n = f.dim();
    if route == SprayRoute::Direct {
        fundamental_tensor(f, x, y, cfg)?;
    }
    let field = SprayField { f, route };
    let mut z = x.to_vec();
    z.extend_from_slice(y);
    let jets = match cfg.mode {
        DiffMode::ForwardJet => crate::diff::jet2_vec(&field, &z, cfg)?,
        DiffMode::CentralFd => {
            // inner derivatives exact, outer ones by differences
            let inner = DiffConfig::jet();
            fd_jet2_with(
                |w| {
                    let g = match route {
                        SprayRoute::Direct => spray(f, &w[..n], &w[n..], &inner)?,
                        SprayRoute::Projective => DVector::from_vec(projective_spray_generic(
                            f,
                            &w[..n],
                            &w[n..],
                        )),
                    };
                    Ok(g.as_slice().to_vec())
                },
                &z,
                cfg,
            )?
        }
    };
    Ok(riemann_from_spray_jets(&jets, y))
}

/// Assembles `R^i_j` from second-order jets of `G^i` in `(x, y)`.
pub fn riemann_from_spray_jets(jets: &[Jet2], y: &[f64]) -> DMatrix<f64> {
    let n = y.len();
    DMatrix::from_fn(n, n, |i, j| {
        let gi = &jets[i];
        let mut v = 2.0 * gi.grad[j];
        for k in 0..n {
            v -= y[k] * gi.hess[(k, n + j)];
            v += 2.0 * jets[k].value * gi.hess[(n + k, n + j)];
            v -= gi.grad[n + k] * jets[k].grad[n + j];
        }
        v
    })
}

/// Flag curvature of the flag `span{y, u}` with flagpole `y`.
pub fn flag_curvature_from(
    r: &DMatrix<f64>,
    g: &DMatrix<f64>,
    y: &[f64],
    u: &[f64],
) -> Result<f64> {
    let y = DVector::from_column_slice(y);
    let u = DVector::from_column_slice(u);
    let gyy = y.dot(&(g * &y));
    let guu = u.dot(&(g * &u));
    let gyu = y.dot(&(g * &u));
    let den = gyy * guu - gyu * gyu;
    if !(den > 1e-10 * gyy * guu) {
        return Err(Error::DegenerateFlag);
    }
    let ru = r * &u;
    Ok(u.dot(&(g * ru)) / den)
}

/// The tensor `F^2 (delta^i_j - F^{-1} F_{y^j} y^i)` that `R` is proportional
/// to when the flag curvature is constant.
pub fn isotropic_projector(fv: f64, fy: &DVector<f64>, y: &[f64]) -> DMatrix<f64> {
    let n = y.len();
    DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        fv * fv * d - fv * fy[j] * y[i]
    })
}

/// Least-squares constant-curvature fit `R ~ K T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureFit {
    pub k: f64,
    /// `|R - K T| / |R|` (Frobenius).
    pub relative_residual: f64,
    /// `|R - K T| / (F^2 n)`, meaningful when `R` itself vanishes.
    pub absolute_residual: f64,
}

pub fn fit_constant_curvature(r: &DMatrix<f64>, t: &DMatrix<f64>, fv: f64) -> CurvatureFit {
    let n = r.nrows() as f64;
    let k = r.dot(t) / t.dot(t);
    let res = (r - t * k).norm();
    let rn = r.norm();
    CurvatureFit {
        k,
        relative_residual: if rn > 0.0 { res / rn } else { 0.0 },
        absolute_residual: res / (fv * fv * n),
    }
}

/// Hamel's condition `F_{x^k y^l} y^k = F_{x^l}`; returns the max violation
/// and the max of `|F_x|` for scaling.
pub fn hamel_defect<F: FinslerFunction>(
    f: &F,
    x: &[f64],
    y: &[f64],
    cfg: &DiffConfig,
) -> Result<(f64, f64)> {
    check_point(f.dim(), x, y)?;
    let n = f.dim();
    let mut z = x.to_vec();
    z.extend_from_slice(y);
    let j = jet2(&InXY { f }, &z, cfg)?;
    let mut defect = 0.0f64;
    let mut scale = 0.0f64;
    for l in 0..n {
        let mut lhs = 0.0;
        for k in 0..n {
            lhs += j.hess[(k, n + l)] * y[k];
        }
        defect = defect.max((lhs - j.grad[l]).abs());
        scale = scale.max(j.grad[l].abs());
    }
    Ok((defect, scale))
}

/// Flag curvature of a projectively flat metric: `K = (P^2 - P_{x^k} y^k)/F^2`.
pub fn projective_curvature<F: FinslerFunction>(
    f: &F,
    x: &[f64],
    y: &[f64],
    cfg: &DiffConfig,
) -> Result<f64> {
    check_point(f.dim(), x, y)?;
    let n = f.dim();
    struct PField<'a, F> {
        f: &'a F,
        y: &'a [f64],
    }
    impl<F: FinslerFunction> Field for PField<'_, F> {
        fn dim(&self) -> usize {
            self.f.dim()
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            projective_factor_generic(self.f, x, &lift::<S>(self.y))
        }
    }
    let pj = jet2(&PField { f, y }, x, cfg)?;
    let fv = f.eval(x, y);
    let p = pj.value;
    let px: f64 = (0..n).map(|k| pj.grad[k] * y[k]).sum();
    let k = (p * p - px) / (fv * fv);
    if k.is_finite() {
        Ok(k)
    } else {
        Err(Error::NonFiniteValue("projective curvature".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Euclidean norm.
    struct Flat(usize);
    impl FinslerFunction for Flat {
        fn dim(&self) -> usize {
            self.0
        }
        fn eval<S: Scalar>(&self, _x: &[S], y: &[S]) -> S {
            crate::scalar::dot(y, y).sqrt()
        }
    }

    /// Round sphere of curvature 1 in gnomonic coordinates.
    struct Sphere;
    impl FinslerFunction for Sphere {
        fn dim(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> S {
            let xx = crate::scalar::dot(x, x);
            let yy = crate::scalar::dot(y, y);
            let xy = crate::scalar::dot(x, y);
            let w = xx + 1.0;
            ((w * yy - xy * xy) / (w * w)).sqrt()
        }
    }

    #[test]
    fn flat_space_has_no_spray_or_curvature() {
        let x = [0.1, 0.2, -0.3];
        let y = [0.3, -0.5, 0.8];
        let cfg = DiffConfig::jet();
        let g = spray(&Flat(3), &x, &y, &cfg).unwrap();
        assert!(g.amax() < 1e-15);
        let r = riemann(&Flat(3), &x, &y, SprayRoute::Direct, &cfg).unwrap();
        assert!(r.amax() < 1e-14);
    }

    #[test]
    fn sphere_has_unit_curvature_on_every_route() {
        let x = [0.2, -0.1];
        let y = [0.6, 0.8];
        let u = [1.0, 0.3];
        for cfg in [DiffConfig::jet(), DiffConfig::fd()] {
            let tol = if cfg.mode == DiffMode::ForwardJet { 1e-12 } else { 1e-6 };
            let g = fundamental_tensor(&Sphere, &x, &y, &cfg).unwrap();
            for route in [SprayRoute::Direct, SprayRoute::Projective] {
                let r = riemann(&Sphere, &x, &y, route, &cfg).unwrap();
                let k = flag_curvature_from(&r, &g, &y, &u).unwrap();
                assert!((k - 1.0).abs() < tol, "{route:?} {cfg:?}: {k}");
            }
            let k = projective_curvature(&Sphere, &x, &y, &cfg).unwrap();
            assert!((k - 1.0).abs() < tol);
        }
    }

    #[test]
    fn parallel_flag_is_degenerate() {
        let g = DMatrix::identity(2, 2);
        let r = DMatrix::zeros(2, 2);
        let e = flag_curvature_from(&r, &g, &[1.0, 0.0], &[2.0, 0.0]).unwrap_err();
        assert_eq!(e, Error::DegenerateFlag);
    }

    #[test]
    fn hamel_holds_for_projectively_flat_sphere() {
        let (d, s) = hamel_defect(&Sphere, &[0.3, 0.1], &[1.0, -0.4], &DiffConfig::jet()).unwrap();
        assert!(d < 1e-14 * (1.0 + s));
    }
}
