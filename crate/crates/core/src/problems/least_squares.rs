use crate::convex::{LossFamily, SmoothLoss};
use crate::ext_real::ExtReal;
use crate::linalg;

/// `f(z) = ½‖y − z‖²`, `α = 1`.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    y: Vec<f64>,
}

impl LeastSquares {
    pub fn new(y: Vec<f64>) -> Self {
        LeastSquares { y }
    }

    pub fn target(&self) -> &[f64] {
        &self.y
    }
}

impl SmoothLoss for LeastSquares {
    fn dim(&self) -> usize {
        self.y.len()
    }

    fn alpha(&self) -> f64 {
        1.0
    }

    fn value(&self, z: &[f64]) -> f64 {
        0.5 * linalg::dist(&self.y, z).powi(2)
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        linalg::sub(z, &self.y)
    }

    /// `½‖v‖² + ⟨v | y⟩`
    fn conjugate(&self, v: &[f64]) -> ExtReal {
        ExtReal::finite(0.5 * linalg::norm_sq(v) + linalg::dot(v, &self.y))
    }

    fn hessian_diag(&self, z: &[f64]) -> Option<Vec<f64>> {
        Some(vec![1.0; z.len()])
    }

    fn family(&self) -> LossFamily<'_> {
        LossFamily::LeastSquares { y: &self.y }
    }
}
