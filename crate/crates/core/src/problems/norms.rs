use std::sync::Arc;

use crate::convex::{
    Norm, NormPenaltyView, Regularizer, SupportModel, DUAL_FEASIBILITY_RTOL, LINKAGE_RTOL,
};
use crate::ext_real::ExtReal;
use crate::linalg;

#[derive(Clone, Copy, Debug, Default)]
pub struct L1Norm;

#[derive(Clone, Copy, Debug, Default)]
pub struct L2Norm;

impl Norm for L1Norm {
    fn norm(&self, x: &[f64]) -> f64 {
        linalg::norm_l1(x)
    }

    fn dual_norm(&self, w: &[f64]) -> f64 {
        linalg::norm_inf(w)
    }

    fn prox(&self, v: &[f64], t: f64) -> Vec<f64> {
        soft_threshold_unchecked(v, t)
    }

    fn is_l1(&self) -> bool {
        true
    }

    fn name(&self) -> &'static str {
        "l1"
    }
}

impl Norm for L2Norm {
    fn norm(&self, x: &[f64]) -> f64 {
        linalg::norm(x)
    }

    fn dual_norm(&self, w: &[f64]) -> f64 {
        linalg::norm(w)
    }

    /// Block soft-thresholding `v · max(0, 1 − t/‖v‖)`.
    fn prox(&self, v: &[f64], t: f64) -> Vec<f64> {
        let nv = linalg::norm(v);
        if nv <= t {
            vec![0.0; v.len()]
        } else {
            linalg::scale(1.0 - t / nv, v)
        }
    }

    fn name(&self) -> &'static str {
        "l2"
    }
}

pub(crate) fn soft_threshold_unchecked(v: &[f64], t: f64) -> Vec<f64> {
    v.iter()
        .map(|&vj| vj.signum() * (vj.abs() - t).max(0.0))
        .collect()
}

/// `g(x) = λ‖x‖` for a norm `‖·‖`; `g*` is the indicator of `{‖w‖_* ≤ λ}`.
#[derive(Clone, Debug)]
pub struct NormPenalty {
    n: usize,
    lambda: f64,
    norm: Arc<dyn Norm>,
}

impl NormPenalty {
    pub fn new(n: usize, lambda: f64, norm: Arc<dyn Norm>) -> Self {
        NormPenalty { n, lambda, norm }
    }

    pub fn l1(n: usize, lambda: f64) -> Self {
        NormPenalty::new(n, lambda, Arc::new(L1Norm))
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn within_dual_ball(&self, w: &[f64]) -> bool {
        self.norm.dual_norm(w) <= self.lambda * (1.0 + DUAL_FEASIBILITY_RTOL)
    }
}

impl Regularizer for NormPenalty {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> ExtReal {
        ExtReal::finite(self.lambda * self.norm.norm(x))
    }

    fn conjugate(&self, w: &[f64]) -> ExtReal {
        if self.within_dual_ball(w) {
            ExtReal::ZERO
        } else {
            ExtReal::PosInf
        }
    }

    /// `w ∈ ∂(λ‖·‖)(x)` iff `⟨w | x⟩ = λ‖x‖` and `‖w‖_* ≤ λ`.
    fn is_linked(&self, x: &[f64], w: &[f64]) -> bool {
        let target = self.lambda * self.norm.norm(x);
        (linalg::dot(w, x) - target).abs() <= LINKAGE_RTOL * (1.0 + target)
            && self.within_dual_ball(w)
    }

    fn prox(&self, v: &[f64], step: f64) -> Vec<f64> {
        self.norm.prox(v, step * self.lambda)
    }

    fn dual_scale_factor(&self, w: &[f64]) -> f64 {
        let d = self.norm.dual_norm(w);
        if d <= self.lambda {
            1.0
        } else {
            self.lambda / d
        }
    }

    fn l1_threshold(&self) -> Option<f64> {
        self.norm.is_l1().then_some(self.lambda)
    }

    fn norm_penalty(&self) -> Option<NormPenaltyView<'_>> {
        Some(NormPenaltyView {
            lambda: self.lambda,
            norm: self.norm.as_ref(),
        })
    }

    fn support_model(&self) -> Option<SupportModel> {
        self.norm.is_l1().then_some(SupportModel {
            l1: self.lambda,
            l2: 0.0,
        })
    }

    fn restrict(&self, keep: &[usize]) -> Arc<dyn Regularizer> {
        Arc::new(NormPenalty::new(
            keep.len(),
            self.lambda,
            Arc::clone(&self.norm),
        ))
    }

    fn name(&self) -> &'static str {
        if self.norm.is_l1() {
            "l1"
        } else {
            self.norm.name()
        }
    }
}
