use std::sync::Arc;

use crate::convex::SmoothLoss;
use crate::ext_real::ExtReal;
use crate::linalg;

/// `c·f` for `c > 0`: gradient `c∇f`, conjugate `c·f*(·/c)`, modulus `α/c`.
#[derive(Clone, Debug)]
pub struct ScaledLoss {
    inner: Arc<dyn SmoothLoss>,
    factor: f64,
}

impl ScaledLoss {
    pub fn new(inner: Arc<dyn SmoothLoss>, factor: f64) -> Self {
        assert!(factor > 0.0 && factor.is_finite());
        ScaledLoss { inner, factor }
    }
}

impl SmoothLoss for ScaledLoss {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn alpha(&self) -> f64 {
        self.inner.alpha() / self.factor
    }

    fn value(&self, z: &[f64]) -> f64 {
        self.factor * self.inner.value(z)
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        linalg::scale(self.factor, &self.inner.gradient(z))
    }

    fn conjugate(&self, v: &[f64]) -> ExtReal {
        self.inner
            .conjugate(&linalg::scale(1.0 / self.factor, v))
            .scale(self.factor)
    }

    fn hessian_diag(&self, z: &[f64]) -> Option<Vec<f64>> {
        self.inner
            .hessian_diag(z)
            .map(|h| linalg::scale(self.factor, &h))
    }
}
