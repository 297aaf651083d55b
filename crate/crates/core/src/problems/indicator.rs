use std::sync::Arc;

use crate::convex::{Regularizer, LINKAGE_RTOL};
use crate::ext_real::ExtReal;

const CONE_TOL: f64 = 1e-12;

/// Indicator of the nonnegative orthant. Mostly useful as an example of a
/// regularizer with a proper, non-full domain.
#[derive(Clone, Debug)]
pub struct NonNegative {
    n: usize,
}

impl NonNegative {
    pub fn new(n: usize) -> Self {
        NonNegative { n }
    }
}

impl Regularizer for NonNegative {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> ExtReal {
        if x.iter().all(|&v| v >= 0.0) {
            ExtReal::ZERO
        } else {
            ExtReal::PosInf
        }
    }

    /// Indicator of the nonpositive orthant.
    fn conjugate(&self, w: &[f64]) -> ExtReal {
        if w.iter().all(|&v| v <= CONE_TOL) {
            ExtReal::ZERO
        } else {
            ExtReal::PosInf
        }
    }

    fn is_linked(&self, x: &[f64], w: &[f64]) -> bool {
        x.iter().zip(w).all(|(&xj, &wj)| {
            xj >= 0.0 && wj <= CONE_TOL && (xj * wj).abs() <= LINKAGE_RTOL * (1.0 + xj.abs())
        })
    }

    fn prox(&self, v: &[f64], _step: f64) -> Vec<f64> {
        v.iter().map(|&t| t.max(0.0)).collect()
    }

    fn dual_scale_factor(&self, w: &[f64]) -> f64 {
        if w.iter().all(|&v| v <= CONE_TOL) {
            1.0
        } else {
            0.0
        }
    }

    fn restrict(&self, keep: &[usize]) -> Arc<dyn Regularizer> {
        Arc::new(NonNegative::new(keep.len()))
    }

    fn name(&self) -> &'static str {
        "nonnegative"
    }
}
