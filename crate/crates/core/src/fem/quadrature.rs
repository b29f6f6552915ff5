//! Symmetric triangle quadrature in barycentric coordinates. Weights sum to 1
//! and multiply the element area.

use crate::Real;

#[derive(Clone, Debug)]
pub struct Rule<T> {
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
}

impl<T: Real> Rule<T> {
    /// Three interior points, exact for quadratics.
    pub fn order2() -> Self {
        let a = T::lit(2.0 / 3.0);
        let b = T::lit(1.0 / 6.0);
        let w = T::lit(1.0 / 3.0);
        Self { points: vec![[a, b, b], [b, a, b], [b, b, a]], weights: vec![w; 3] }
    }

    /// Six-point Dunavant rule, exact for quartics.
    pub fn order4() -> Self {
        let a1 = T::lit(0.445_948_490_915_965);
        let w1 = T::lit(0.223_381_589_678_011);
        let a2 = T::lit(0.091_576_213_509_771);
        let w2 = T::lit(0.109_951_743_655_322);
        let b1 = T::one() - a1 - a1;
        let b2 = T::one() - a2 - a2;
        Self {
            points: vec![[b1, a1, a1], [a1, b1, a1], [a1, a1, b1], [b2, a2, a2], [a2, b2, a2], [a2, a2, b2]],
            weights: vec![w1, w1, w1, w2, w2, w2],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}
