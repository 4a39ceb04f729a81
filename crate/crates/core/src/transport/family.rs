use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// One-parameter description of `𝒯(p, s)` for `p = (a, 1−a)`, `s = (b, 1−b)`:
/// every member is `A(x) = [[x, a−x], [b−x, 1−a−b+x]]` with `x ∈ [lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Family2x2 {
    pub a: f64,
    pub b: f64,
    pub lo: f64,
    pub hi: f64,
    /// Unconstrained minimizer of `M(A(x))`.
    pub x_star: f64,
    /// `x_star` projected onto `[lo, hi]`.
    pub x_min: f64,
}

pub fn family_2x2(a: f64, b: f64) -> Result<Family2x2> {
    for (name, v) in [("a", a), ("b", b)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::OutOfRange(format!(
                "{name} = {v} must lie in (0, 1)"
            )));
        }
    }
    let lo = (a + b - 1.0).max(0.0);
    let hi = a.min(b);
    let x_star = 0.5 * (a + b) - 0.25;
    Ok(Family2x2 {
        a,
        b,
        lo,
        hi,
        x_star,
        x_min: x_star.clamp(lo, hi),
    })
}

impl Family2x2 {
    pub fn matrix(&self, x: f64) -> Matrix {
        let (a, b) = (self.a, self.b);
        Matrix::from_rows(&[[x, a - x], [b - x, 1.0 - a - b + x]]).expect("2x2")
    }

    /// `M(A(x)) = x² + (a−x)² + (b−x)² + (1−a−b+x)²`.
    pub fn micro_at(&self, x: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        x * x + (a - x).powi(2) + (b - x).powi(2) + (1.0 - a - b + x).powi(2)
    }

    pub fn min_micro(&self) -> f64 {
        self.micro_at(self.x_min)
    }

    /// The proportional benchmark sits at `x = ab`.
    pub fn product_micro(&self) -> f64 {
        self.micro_at(self.a * self.b)
    }
}
