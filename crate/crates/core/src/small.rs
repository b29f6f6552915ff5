//! Fixed-size 2-D vectors and matrices.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Unit vector `(cos θ, sin θ)`.
    #[inline]
    pub fn polar_unit(theta: T) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    /// Outer product `self ⊗ o`, i.e. entry `(i, j) = self_i o_j`.
    #[inline]
    pub fn outer(self, o: Self) -> Mat2<T> {
        Mat2::new(self.x * o.x, self.x * o.y, self.y * o.x, self.y * o.y)
    }

    #[inline]
    pub fn max_abs(self) -> T {
        self.x.abs().max(self.y.abs())
    }
}

impl<T: Real> Add for Vec2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> AddAssign for Vec2<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl<T: Real> Sub for Vec2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Neg for Vec2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Row-major 2×2 matrix `[[xx, xy], [yx, yy]]`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat2<T> {
    pub xx: T,
    pub xy: T,
    pub yx: T,
    pub yy: T,
}

impl<T: Real> Mat2<T> {
    #[inline]
    pub fn new(xx: T, xy: T, yx: T, yy: T) -> Self {
        Self { xx, xy, yx, yy }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    #[inline]
    pub fn diag(a: T, b: T) -> Self {
        Self::new(a, T::zero(), T::zero(), b)
    }

    /// Symmetric matrix from its three independent entries.
    #[inline]
    pub fn sym(xx: T, xy: T, yy: T) -> Self {
        Self::new(xx, xy, xy, yy)
    }

    #[inline]
    pub fn from_cols(c0: Vec2<T>, c1: Vec2<T>) -> Self {
        Self::new(c0.x, c1.x, c0.y, c1.y)
    }

    #[inline]
    pub fn transpose(self) -> Self {
        Self::new(self.xx, self.yx, self.xy, self.yy)
    }

    #[inline]
    pub fn trace(self) -> T {
        self.xx + self.yy
    }

    #[inline]
    pub fn det(self) -> T {
        self.xx * self.yy - self.xy * self.yx
    }

    pub fn inverse(self) -> Option<Self> {
        let d = self.det();
        if d == T::zero() || !d.is_finite() {
            return None;
        }
        Some(Self::new(self.yy / d, -self.xy / d, -self.yx / d, self.xx / d))
    }

    #[inline]
    pub fn mul_vec(self, v: Vec2<T>) -> Vec2<T> {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.yx * v.x + self.yy * v.y)
    }

    #[inline]
    pub fn scale(self, s: T) -> Self {
        Self::new(self.xx * s, self.xy * s, self.yx * s, self.yy * s)
    }

    /// Bilinear form `pᵀ M q`.
    #[inline]
    pub fn bilinear(self, p: Vec2<T>, q: Vec2<T>) -> T {
        p.dot(self.mul_vec(q))
    }

    #[inline]
    pub fn max_abs(self) -> T {
        self.xx.abs().max(self.xy.abs()).max(self.yx.abs()).max(self.yy.abs())
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn sym_eigenvalues(self) -> (T, T) {
        let two = T::lit(2.0);
        let a = self.xx;
        let d = self.yy;
        let b = (self.xy + self.yx) / two;
        let mean = (a + d) / two;
        let rad = (((a - d) / two).powi(2) + b * b).sqrt();
        (mean - rad, mean + rad)
    }
}

impl<T: Real> Add for Mat2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.xx + o.xx, self.xy + o.xy, self.yx + o.yx, self.yy + o.yy)
    }
}

impl<T: Real> AddAssign for Mat2<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.xx - o.xx, self.xy - o.xy, self.yx - o.yx, self.yy - o.yy)
    }
}

impl<T: Real> Neg for Mat2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.xx * o.xx + self.xy * o.yx,
            self.xx * o.xy + self.xy * o.yy,
            self.yx * o.xx + self.yy * o.yx,
            self.yx * o.xy + self.yy * o.yy,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = Mat2::new(2.0, 1.0, -0.5, 3.0);
        let p = m * m.inverse().unwrap();
        assert!((p - Mat2::identity()).max_abs() < 1e-15);
    }

    #[test]
    fn sym_eigenvalues_of_diagonal() {
        let (lo, hi) = Mat2::diag(3.0_f64, -1.0).sym_eigenvalues();
        assert_eq!((lo, hi), (-1.0, 3.0));
    }
}
