use core::ops::{Add, Mul, Sub};

/// Arithmetic needed to evaluate the polynomial formulas of this crate.
///
/// The same shape-function code runs on plain numbers (point values), on
/// [`Dual`] numbers (values plus gradients) and on
/// [`LocalPolynomial`](super::LocalPolynomial) (symbolic expansion in a frame).
pub trait Ring: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self> {
    /// The constant `c` in the same family as `self`.
    fn constant_like(&self, c: f64) -> Self;

    /// `self * a + b`, where `b` is a scalar constant.
    fn affine(&self, a: f64, b: f64) -> Self {
        self.clone() * a + self.constant_like(b)
    }
}

impl Ring for f64 {
    fn constant_like(&self, c: f64) -> Self {
        c
    }
}

/// Value with its gradient in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub value: f64,
    pub grad: [f64; 2],
}

impl Dual {
    pub fn new(value: f64, grad: [f64; 2]) -> Self {
        Self { value, grad }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.value + o.value, [self.grad[0] + o.grad[0], self.grad[1] + o.grad[1]])
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.value - o.value, [self.grad[0] - o.grad[0], self.grad[1] - o.grad[1]])
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(
            self.value * o.value,
            [self.grad[0] * o.value + self.value * o.grad[0], self.grad[1] * o.value + self.value * o.grad[1]],
        )
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, s: f64) -> Dual {
        Dual::new(self.value * s, [self.grad[0] * s, self.grad[1] * s])
    }
}

impl Ring for Dual {
    fn constant_like(&self, c: f64) -> Self {
        Dual::new(c, [0.0, 0.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_product_rule() {
        let x = Dual::new(2.0, [1.0, 0.0]);
        let y = Dual::new(3.0, [0.0, 1.0]);
        let f = x * x * y + x.affine(2.0, 1.0);
        assert_eq!(f.value, 12.0 + 5.0);
        assert_eq!(f.grad, [2.0 * 2.0 * 3.0 + 2.0, 4.0]);
    }
}
