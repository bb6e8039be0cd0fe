//! Forward-mode differentiation with truncated multivariate Taylor jets.
//!
//! A [`Jet`] carries a value together with all partial derivatives up to
//! third order in at most [`MAX_VARS`] variables. Arithmetic propagates the
//! derivatives exactly (no truncation error), so connection and curvature
//! formulas that need second and third derivatives of chart expressions stay
//! free of finite-difference noise.
//!
//! The `order` field records how many derivative orders are meaningful. A
//! seeded variable carries the order it was seeded with, a constant is exact to
//! every order, and binary operations keep the smaller of the two. Taking a
//! [`Jet::partial`] lowers the order by one.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::{lit, Real, Scalar};

/// Maximum number of independent variables a jet can track.
pub const MAX_VARS: usize = 4;
/// Highest derivative order a jet can carry.
pub const MAX_ORDER: u8 = 3;

type V<T> = [T; MAX_VARS];
type M<T> = [[T; MAX_VARS]; MAX_VARS];
type C<T> = [[[T; MAX_VARS]; MAX_VARS]; MAX_VARS];

#[derive(Clone, Copy, Debug)]
pub struct Jet<T> {
    order: u8,
    nvars: u8,
    v: T,
    g: V<T>,
    h: M<T>,
    t: C<T>,
}

impl<T: Real> Jet<T> {
    pub fn constant(v: T) -> Self {
        let z = T::zero();
        Jet {
            order: MAX_ORDER,
            nvars: 0,
            v,
            g: [z; MAX_VARS],
            h: [[z; MAX_VARS]; MAX_VARS],
            t: [[[z; MAX_VARS]; MAX_VARS]; MAX_VARS],
        }
    }

    /// The `index`-th of `nvars` independent variables, with value `v`,
    /// tracked to derivative order `order`.
    pub fn variable(v: T, index: usize, nvars: usize, order: u8) -> Self {
        assert!(nvars <= MAX_VARS, "at most {MAX_VARS} variables");
        assert!(index < nvars);
        assert!(order <= MAX_ORDER);
        let mut j = Jet::constant(v);
        j.order = order;
        j.nvars = nvars as u8;
        j.g[index] = T::one();
        j
    }

    /// Seeds a whole point: one variable per coordinate.
    pub fn seed(q: &[T], order: u8) -> Vec<Self> {
        q.iter()
            .enumerate()
            .map(|(i, &x)| Jet::variable(x, i, q.len(), order))
            .collect()
    }

    #[inline]
    pub fn order(&self) -> u8 {
        self.order
    }

    #[inline]
    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    #[inline]
    pub fn val(&self) -> T {
        self.v
    }

    #[inline]
    pub fn d1(&self, i: usize) -> T {
        debug_assert!(self.order >= 1);
        self.g[i]
    }

    #[inline]
    pub fn d2(&self, i: usize, j: usize) -> T {
        debug_assert!(self.order >= 2);
        self.h[i][j]
    }

    #[inline]
    pub fn d3(&self, i: usize, j: usize, k: usize) -> T {
        debug_assert!(self.order >= 3);
        self.t[i][j][k]
    }

    /// Partial derivative with respect to variable `j`, one order lower.
    pub fn partial(&self, j: usize) -> Self {
        assert!(self.order >= 1, "jet carries no derivative information");
        let n = self.nvars();
        let mut r = Jet::constant(if j < n { self.g[j] } else { T::zero() });
        r.order = self.order - 1;
        r.nvars = self.nvars;
        if j >= n {
            r.v = T::zero();
            return r;
        }
        for a in 0..n {
            r.g[a] = self.h[j][a];
            for b in 0..n {
                r.h[a][b] = self.t[j][a][b];
            }
        }
        r
    }

    /// `f(self)` given `f` and its first three derivatives at `self.val()`.
    fn compose(&self, f0: T, f1: T, f2: T, f3: T) -> Self {
        let n = self.nvars();
        let mut r = Jet::constant(f0);
        r.order = self.order;
        r.nvars = self.nvars;
        if self.order == 0 {
            return r;
        }
        let g = &self.g;
        for i in 0..n {
            r.g[i] = f1 * g[i];
        }
        if self.order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    r.h[i][j] = f1 * self.h[i][j] + f2 * g[i] * g[j];
                }
            }
        }
        if self.order >= 3 {
            let h = &self.h;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        r.t[i][j][k] = f1 * self.t[i][j][k]
                            + f2 * (g[i] * h[j][k] + g[j] * h[i][k] + g[k] * h[i][j])
                            + f3 * g[i] * g[j] * g[k];
                    }
                }
            }
        }
        r
    }

    fn combine_shape(a: &Self, b: &Self) -> (u8, u8) {
        (a.order.min(b.order), a.nvars.max(b.nvars))
    }

    pub fn recip(&self) -> Self {
        let x = self.v;
        let r = T::one() / x;
        self.compose(r, -r * r, lit::<T>(2.0) * r * r * r, lit::<T>(-6.0) * r * r * r * r)
    }
}

impl<T: Real> Add for Jet<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (order, nvars) = Jet::combine_shape(&self, &o);
        let n = nvars as usize;
        let mut r = Jet::constant(self.v + o.v);
        r.order = order;
        r.nvars = nvars;
        for i in 0..n {
            r.g[i] = self.g[i] + o.g[i];
            for j in 0..n {
                r.h[i][j] = self.h[i][j] + o.h[i][j];
                for k in 0..n {
                    r.t[i][j][k] = self.t[i][j][k] + o.t[i][j][k];
                }
            }
        }
        r
    }
}

impl<T: Real> Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        let n = self.nvars();
        let mut r = self;
        r.v = -r.v;
        for i in 0..n {
            r.g[i] = -r.g[i];
            for j in 0..n {
                r.h[i][j] = -r.h[i][j];
                for k in 0..n {
                    r.t[i][j][k] = -r.t[i][j][k];
                }
            }
        }
        r
    }
}

impl<T: Real> Sub for Jet<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Real> Mul for Jet<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (order, nvars) = Jet::combine_shape(&self, &o);
        let n = nvars as usize;
        let (a, b) = (&self, &o);
        let mut r = Jet::constant(a.v * b.v);
        r.order = order;
        r.nvars = nvars;
        if order == 0 {
            return r;
        }
        for i in 0..n {
            r.g[i] = a.v * b.g[i] + b.v * a.g[i];
        }
        if order >= 2 {
            for i in 0..n {
                for j in 0..n {
                    r.h[i][j] = a.v * b.h[i][j]
                        + b.v * a.h[i][j]
                        + a.g[i] * b.g[j]
                        + a.g[j] * b.g[i];
                }
            }
        }
        if order >= 3 {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        r.t[i][j][k] = a.v * b.t[i][j][k]
                            + b.v * a.t[i][j][k]
                            + a.g[i] * b.h[j][k]
                            + a.g[j] * b.h[i][k]
                            + a.g[k] * b.h[i][j]
                            + b.g[i] * a.h[j][k]
                            + b.g[j] * a.h[i][k]
                            + b.g[k] * a.h[i][j];
                    }
                }
            }
        }
        r
    }
}

impl<T: Real> Div for Jet<T> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<T: Real> Scalar for Jet<T> {
    type Base = T;

    fn constant(c: T) -> Self {
        Jet::constant(c)
    }

    fn value(&self) -> T {
        self.v
    }

    fn sin(&self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(s, c, -s, -c)
    }

    fn cos(&self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(c, -s, -c, s)
    }

    fn exp(&self) -> Self {
        let e = self.v.exp();
        self.compose(e, e, e, e)
    }

    fn ln(&self) -> Self {
        let x = self.v;
        let r = T::one() / x;
        self.compose(x.ln(), r, -r * r, lit::<T>(2.0) * r * r * r)
    }

    fn sqrt(&self) -> Self {
        let s = self.v.sqrt();
        let half = lit::<T>(0.5);
        let d1 = half / s;
        let d2 = -half * d1 / self.v;
        let d3 = lit::<T>(-1.5) * d2 / self.v;
        self.compose(s, d1, d2, d3)
    }

    fn atan2(&self, x: &Self) -> Self {
        // atan2(y, x) = θ0 + atan(w) with w = (x0 y − y0 x)/(x0 x + y0 y),
        // which has zero value at the expansion point.
        let (y0, x0) = (self.v, x.v);
        let theta = y0.atan2(x0);
        let cy = Jet::constant(y0);
        let cx = Jet::constant(x0);
        let w = (cx * *self - cy * *x) / (cx * *x + cy * *self);
        let mut a = w.compose(T::zero(), T::one(), T::zero(), lit::<T>(-2.0));
        a.v = theta;
        a
    }

    fn powi(&self, n: i32) -> Self {
        let x = self.v;
        let nf = lit::<T>(n as f64);
        let f0 = x.powi(n);
        let f1 = if n == 0 { T::zero() } else { nf * x.powi(n - 1) };
        let f2 = if n == 0 || n == 1 {
            T::zero()
        } else {
            nf * (nf - T::one()) * x.powi(n - 2)
        };
        let f3 = if (0..=2).contains(&n) {
            T::zero()
        } else {
            nf * (nf - T::one()) * (nf - lit::<T>(2.0)) * x.powi(n - 3)
        };
        self.compose(f0, f1, f2, f3)
    }

    fn powf(&self, p: T) -> Self {
        let x = self.v;
        let one = T::one();
        let two = lit::<T>(2.0);
        self.compose(
            x.powf(p),
            p * x.powf(p - one),
            p * (p - one) * x.powf(p - two),
            p * (p - one) * (p - two) * x.powf(p - two - one),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd<F: Fn(f64, f64) -> f64>(f: &F, x: f64, y: f64, i: usize) -> f64 {
        let h = 1e-5;
        if i == 0 {
            (f(x + h, y) - f(x - h, y)) / (2.0 * h)
        } else {
            (f(x, y + h) - f(x, y - h)) / (2.0 * h)
        }
    }

    #[test]
    fn product_rule_third_order() {
        // f = x^2 y^3, f_xxy = 2 * 3 y^2 = 6 y^2
        let q = Jet::seed(&[1.3, 0.7], 3);
        let f = q[0].powi(2) * q[1].powi(3);
        assert!((f.d3(0, 0, 1) - 6.0 * 0.7f64.powi(2)).abs() < 1e-12);
        assert!((f.d3(0, 1, 0) - 6.0 * 0.7f64.powi(2)).abs() < 1e-12);
        assert!((f.d2(1, 1) - 1.3f64.powi(2) * 6.0 * 0.7).abs() < 1e-12);
    }

    #[test]
    fn atan2_matches_gradient_of_angle() {
        let (x, y): (f64, f64) = (-0.4, 0.9);
        let q = Jet::seed(&[x, y], 3);
        let phi = q[1].atan2(&q[0]);
        let r2 = x * x + y * y;
        assert!((phi.val() - y.atan2(x)).abs() < 1e-15);
        assert!((phi.d1(0) + y / r2).abs() < 1e-14);
        assert!((phi.d1(1) - x / r2).abs() < 1e-14);
        // angle is harmonic
        assert!((phi.d2(0, 0) + phi.d2(1, 1)).abs() < 1e-13);
        // d/dx (x/r^2) = (r^2 - 2x^2)/r^4
        assert!((phi.d2(1, 0) - (r2 - 2.0 * x * x) / (r2 * r2)).abs() < 1e-13);
    }

    #[test]
    fn partial_lowers_order() {
        let q = Jet::seed(&[0.5, 2.0], 3);
        let f = q[0].sin() * q[1].exp();
        let fx = f.partial(0);
        assert_eq!(fx.order(), 2);
        assert!((fx.val() - 0.5f64.cos() * 2.0f64.exp()).abs() < 1e-14);
        assert!((fx.d2(0, 1) - f.d3(0, 0, 1)).abs() < 1e-14);
    }

    #[test]
    fn elementary_functions_agree_with_central_differences() {
        let f = |x: f64, y: f64| (x * y).sqrt() * (x / y).ln() + (x - y).cos().powf(1.5);
        let (x, y) = (1.7, 0.6);
        let q = Jet::seed(&[x, y], 3);
        let j = (q[0] * q[1]).sqrt() * (q[0] / q[1]).ln() + (q[0] - q[1]).cos().powf(1.5);
        for i in 0..2 {
            let fdv = fd(&f, x, y, i);
            assert!((j.d1(i) - fdv).abs() < 1e-8 * fdv.abs().max(1.0));
        }
        let gx = |x: f64, y: f64| fd(&f, x, y, 0);
        let fxy = fd(&gx, x, y, 1);
        assert!((j.d2(0, 1) - fxy).abs() < 1e-5);
    }

    #[test]
    fn constants_are_exact_to_all_orders() {
        let c = Jet::<f64>::constant(3.0);
        let q = Jet::seed(&[2.0], 1);
        let p = c * q[0];
        assert_eq!(p.order(), 1);
        assert_eq!(c.order(), MAX_ORDER);
    }
}
