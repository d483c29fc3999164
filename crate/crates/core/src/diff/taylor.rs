use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Scalar;

/// Maximum number of independent variables a [`Taylor2`] can carry.
///
/// Tangent-bundle fields of an `n`-manifold use `2n` variables, so this caps
/// the manifold dimension at 4.
pub const MAX_VARS: usize = 8;
const MAX_PAIRS: usize = MAX_VARS * (MAX_VARS + 1) / 2;

#[inline]
fn pair(i: usize, j: usize) -> usize {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    hi * (hi + 1) / 2 + lo
}

/// Second-order truncated multivariate Taylor polynomial.
///
/// Stores value, gradient and the packed upper triangle of the Hessian, so
/// symmetry of the Hessian holds by construction. Coefficients are generic,
/// which lets jets nest: `Taylor2<Taylor2<f64>>` carries derivatives up to
/// fourth order in total.
#[derive(Clone, Copy, Debug)]
pub struct Taylor2<T> {
    nv: u8,
    v: T,
    g: [T; MAX_VARS],
    h: [T; MAX_PAIRS],
}

impl<T: Scalar> Taylor2<T> {
    pub fn constant(v: T) -> Self {
        Self {
            nv: 0,
            v,
            g: [T::zero(); MAX_VARS],
            h: [T::zero(); MAX_PAIRS],
        }
    }

    /// The `idx`-th independent variable, evaluated at `v`.
    pub fn var(v: T, idx: usize, nv: usize) -> Self {
        assert!(nv <= MAX_VARS && idx < nv, "taylor variable out of range");
        let mut t = Self::constant(v);
        t.nv = nv as u8;
        t.g[idx] = T::one();
        t
    }

    /// Seeds every coordinate of `x` as an independent variable.
    pub fn seed(x: &[T]) -> Vec<Self> {
        let n = x.len();
        x.iter().enumerate().map(|(i, &v)| Self::var(v, i, n)).collect()
    }

    pub fn nvars(&self) -> usize {
        self.nv as usize
    }

    pub fn value(&self) -> T {
        self.v
    }

    pub fn grad(&self, i: usize) -> T {
        self.g[i]
    }

    pub fn hess(&self, i: usize, j: usize) -> T {
        self.h[pair(i, j)]
    }

    /// Applies a scalar function given its value and first two derivatives at `self.v`.
    #[inline]
    fn chain(self, f0: T, f1: T, f2: T) -> Self {
        let n = self.nvars();
        let mut out = Self::constant(f0);
        out.nv = self.nv;
        for i in 0..n {
            out.g[i] = f1 * self.g[i];
        }
        for j in 0..n {
            for i in 0..=j {
                let k = pair(i, j);
                out.h[k] = f1 * self.h[k] + f2 * self.g[i] * self.g[j];
            }
        }
        out
    }
}

impl<T: Scalar> Add for Taylor2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        let n = self.nv.max(o.nv);
        let mut out = self;
        out.nv = n;
        out.v = self.v + o.v;
        let n = n as usize;
        for i in 0..n {
            out.g[i] = self.g[i] + o.g[i];
        }
        for k in 0..n * (n + 1) / 2 {
            out.h[k] = self.h[k] + o.h[k];
        }
        out
    }
}

impl<T: Scalar> Sub for Taylor2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Scalar> Neg for Taylor2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<T: Scalar> Mul for Taylor2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let n = self.nv.max(o.nv);
        let mut out = Self::constant(self.v * o.v);
        out.nv = n;
        let n = n as usize;
        for i in 0..n {
            out.g[i] = self.v * o.g[i] + self.g[i] * o.v;
        }
        for j in 0..n {
            for i in 0..=j {
                let k = pair(i, j);
                out.h[k] = self.v * o.h[k]
                    + self.h[k] * o.v
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i];
            }
        }
        out
    }
}

impl<T: Scalar> Div for Taylor2<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<T: Scalar> Add<f64> for Taylor2<T> {
    type Output = Self;
    #[inline]
    fn add(mut self, c: f64) -> Self {
        self.v = self.v + c;
        self
    }
}

impl<T: Scalar> Sub<f64> for Taylor2<T> {
    type Output = Self;
    #[inline]
    fn sub(mut self, c: f64) -> Self {
        self.v = self.v - c;
        self
    }
}

impl<T: Scalar> Mul<f64> for Taylor2<T> {
    type Output = Self;
    #[inline]
    fn mul(mut self, c: f64) -> Self {
        let n = self.nvars();
        self.v = self.v * c;
        for i in 0..n {
            self.g[i] = self.g[i] * c;
        }
        for k in 0..n * (n + 1) / 2 {
            self.h[k] = self.h[k] * c;
        }
        self
    }
}

impl<T: Scalar> Div<f64> for Taylor2<T> {
    type Output = Self;
    #[inline]
    fn div(self, c: f64) -> Self {
        self * c.recip()
    }
}

impl<T: Scalar> Scalar for Taylor2<T> {
    fn cst(v: f64) -> Self {
        Self::constant(T::cst(v))
    }

    fn re(&self) -> f64 {
        self.v.re()
    }

    fn all_finite(&self) -> bool {
        let n = self.nvars();
        self.v.all_finite()
            && self.g[..n].iter().all(Scalar::all_finite)
            && self.h[..n * (n + 1) / 2].iter().all(Scalar::all_finite)
    }

    fn sqrt(self) -> Self {
        let f0 = self.v.sqrt();
        let f1 = f0.recip() * 0.5;
        let f2 = -(f1 / self.v) * 0.5;
        self.chain(f0, f1, f2)
    }

    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    fn ln(self) -> Self {
        let r = self.v.recip();
        self.chain(self.v.ln(), r, -(r * r))
    }

    fn sin(self) -> Self {
        let s = self.v.sin();
        self.chain(s, self.v.cos(), -s)
    }

    fn cos(self) -> Self {
        let c = self.v.cos();
        self.chain(c, -self.v.sin(), -c)
    }

    fn recip(self) -> Self {
        let r = self.v.recip();
        let r2 = r * r;
        self.chain(r, -r2, r2 * r * 2.0)
    }

    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::constant(T::one()),
            1 => self,
            2 => self * self,
            _ => {
                let nf = n as f64;
                let f0 = self.v.powi(n);
                let f1 = self.v.powi(n - 1) * nf;
                let f2 = self.v.powi(n - 2) * (nf * (nf - 1.0));
                self.chain(f0, f1, f2)
            }
        }
    }

    fn powf(self, p: f64) -> Self {
        let f0 = self.v.powf(p);
        let f1 = self.v.powf(p - 1.0) * p;
        let f2 = self.v.powf(p - 2.0) * (p * (p - 1.0));
        self.chain(f0, f1, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_on_monomial() {
        let x = Taylor2::seed(&[2.0, 3.0]);
        let f = x[0] * x[0] * x[1];
        assert_eq!(f.value(), 12.0);
        assert_eq!(f.grad(0), 12.0);
        assert_eq!(f.grad(1), 4.0);
        assert_eq!(f.hess(0, 0), 6.0);
        assert_eq!(f.hess(0, 1), 4.0);
        assert_eq!(f.hess(1, 0), 4.0);
        assert_eq!(f.hess(1, 1), 0.0);
    }

    #[test]
    fn sqrt_and_recip_match_closed_forms() {
        let x = Taylor2::var(4.0, 0, 1);
        let r = x.sqrt();
        assert!((r.grad(0) - 0.25).abs() < 1e-15);
        assert!((r.hess(0, 0) + 1.0 / 32.0).abs() < 1e-15);
        let q = x.recip();
        assert!((q.grad(0) + 1.0 / 16.0).abs() < 1e-15);
        assert!((q.hess(0, 0) - 2.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn nested_jets_reach_fourth_order() {
        // f(x) = x^4 at x = 1.5; outer hess of inner hess is f'''' = 24.
        let outer = Taylor2::var(1.5, 0, 1);
        let inner = Taylor2::var(outer, 0, 1);
        let f = inner.powi(4);
        assert!((f.hess(0, 0).hess(0, 0) - 24.0).abs() < 1e-12);
        assert!((f.hess(0, 0).grad(0) - 24.0 * 1.5).abs() < 1e-12);
    }

    #[test]
    fn constants_mix_with_variables() {
        let x = Taylor2::seed(&[1.0, 2.0, 3.0]);
        let c = Taylor2::<f64>::cst(5.0);
        let f = c * x[2] + x[0];
        assert_eq!(f.nvars(), 3);
        assert_eq!(f.grad(2), 5.0);
        assert_eq!(f.grad(0), 1.0);
    }
}
