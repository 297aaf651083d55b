use std::sync::Arc;

use crate::convex::{Regularizer, SupportModel, DUAL_FEASIBILITY_RTOL, LINKAGE_RTOL};
use crate::ext_real::ExtReal;
use crate::linalg;

use super::norms::soft_threshold_unchecked;

/// `g(x) = λ₁‖x‖₁ + (λ₂/2)‖x‖²`.
#[derive(Clone, Debug)]
pub struct ElasticNet {
    n: usize,
    l1: f64,
    l2: f64,
}

impl ElasticNet {
    pub fn new(n: usize, l1: f64, l2: f64) -> Self {
        ElasticNet { n, l1, l2 }
    }
}

impl Regularizer for ElasticNet {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> ExtReal {
        ExtReal::finite(self.l1 * linalg::norm_l1(x) + 0.5 * self.l2 * linalg::norm_sq(x))
    }

    /// `Σⱼ max(|wⱼ| − λ₁, 0)² / (2λ₂)`, finite everywhere.
    fn conjugate(&self, w: &[f64]) -> ExtReal {
        let s: f64 = w
            .iter()
            .map(|wj| (wj.abs() - self.l1).max(0.0).powi(2))
            .sum();
        ExtReal::finite(s / (2.0 * self.l2))
    }

    /// `w − λ₂x ∈ λ₁∂‖x‖₁`, coordinatewise.
    fn is_linked(&self, x: &[f64], w: &[f64]) -> bool {
        x.iter().zip(w).all(|(&xj, &wj)| {
            if xj == 0.0 {
                wj.abs() <= self.l1 * (1.0 + DUAL_FEASIBILITY_RTOL)
            } else {
                let r = wj - self.l2 * xj - self.l1 * xj.signum();
                r.abs() <= LINKAGE_RTOL * (1.0 + self.l1 + wj.abs())
            }
        })
    }

    fn prox(&self, v: &[f64], step: f64) -> Vec<f64> {
        let shrink = 1.0 / (1.0 + step * self.l2);
        soft_threshold_unchecked(v, step * self.l1)
            .into_iter()
            .map(|t| t * shrink)
            .collect()
    }

    fn dual_scale_factor(&self, _w: &[f64]) -> f64 {
        1.0
    }

    fn l1_threshold(&self) -> Option<f64> {
        Some(self.l1)
    }

    fn support_model(&self) -> Option<SupportModel> {
        Some(SupportModel {
            l1: self.l1,
            l2: self.l2,
        })
    }

    fn restrict(&self, keep: &[usize]) -> Arc<dyn Regularizer> {
        Arc::new(ElasticNet::new(keep.len(), self.l1, self.l2))
    }

    fn name(&self) -> &'static str {
        "elastic-net"
    }
}
