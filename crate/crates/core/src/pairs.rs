//! Primal-dual pairs fed to the ball constructors.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::convex::Problem;
use crate::error::{Error, Result};
use crate::linalg;
use crate::problems::ScaledLoss;
use crate::solver::{prox_grad_solve, SolveOptions};

/// Tolerance on `u = −γ⁻¹∇f(Ax)` for sequential pairs.
pub const SEQUENTIAL_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimalDualPair {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// `Aᵀu ∈ ∂g(x)` was verified.
    pub linked: bool,
    /// Set for pairs built by [`sequential_pair`].
    pub gamma: Option<f64>,
}

impl PrimalDualPair {
    /// Pair with the linkage flag computed from the problem.
    pub fn new(p: &Problem, x: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        let linked = verify_linkage(p, &x, &u)?;
        Ok(PrimalDualPair {
            x,
            u,
            linked,
            gamma: None,
        })
    }
}

/// `u = s·(−∇f(Ax))` with `s = g.dual_scale_factor(−Aᵀ∇f(Ax))`.
pub(crate) fn scaled_dual(p: &Problem, ax: &[f64]) -> Vec<f64> {
    let w = linalg::scale(-1.0, &p.loss().gradient(ax));
    let atw = p.design().rmatvec(&w).expect("w has length m");
    let s = p.regularizer().dual_scale_factor(&atw);
    if s == 1.0 {
        w
    } else {
        linalg::scale(s, &w)
    }
}

/// Feasible dual point from an arbitrary primal iterate by shrinking
/// `−∇f(Ax)` into the dual domain.
///
/// The pair is flagged `linked` only at `x = 0`, where linkage holds exactly.
/// Elsewhere it can pass the tolerance test of [`verify_linkage`] while the
/// residual is still large relative to a tiny gap, and balls that rely on
/// exact linkage would then lose safeness.
pub fn dual_scaling(p: &Problem, x: &[f64]) -> Result<PrimalDualPair> {
    p.check_primal(x)?;
    let ax = p.design().matvec(x)?;
    let u = scaled_dual(p, &ax);
    let linked = x.iter().all(|&v| v == 0.0) && verify_linkage(p, x, &u)?;
    Ok(PrimalDualPair {
        x: x.to_vec(),
        u,
        linked,
        gamma: None,
    })
}

/// Whether `u` is dual-feasible and `Aᵀu ∈ ∂g(x)`. For `g = λ‖·‖₁` this is
/// `⟨u | Ax⟩ = λ‖x‖₁` together with `‖Aᵀu‖∞ ≤ λ`.
pub fn verify_linkage(p: &Problem, x: &[f64], u: &[f64]) -> Result<bool> {
    p.check_primal(x)?;
    if !p.dual_feasible(u)? || !p.regularizer().value(x).is_finite() {
        return Ok(false);
    }
    let atu = p.design().rmatvec(u)?;
    Ok(p.regularizer().is_linked(x, &atu))
}

fn regularization_level(p: &Problem) -> Result<f64> {
    let g = p.regularizer();
    g.norm_penalty()
        .map(|v| v.lambda)
        .or_else(|| g.l1_threshold())
        .ok_or(Error::WrongFamily {
            expected: "a regularizer with a level λ (norm or elastic net)",
        })
}

/// `(x*_γ, −γ⁻¹∇f(Ax*_γ))` with `x*_γ ∈ argmin f(Ax) + γg(x)` and `γ = λ₀/λ`.
/// The subproblem is solved in the equivalent form `γ⁻¹f(Ax) + g(x)` to a
/// duality gap of `tol`.
pub fn sequential_pair(p: &Problem, lambda0: f64, tol: f64) -> Result<PrimalDualPair> {
    let opts = SolveOptions {
        gap_tolerance: tol,
        ..SolveOptions::reference()
    };
    sequential_pair_with(p, lambda0, &opts)
}

pub fn sequential_pair_with(
    p: &Problem,
    lambda0: f64,
    opts: &SolveOptions,
) -> Result<PrimalDualPair> {
    if !(lambda0 > 0.0 && lambda0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda0 must be positive, got {lambda0}"
        )));
    }
    let gamma = lambda0 / regularization_level(p)?;
    let sub = if gamma == 1.0 {
        p.clone()
    } else {
        p.with_loss(Arc::new(ScaledLoss::new(Arc::clone(p.loss()), 1.0 / gamma)))?
    };
    let res = prox_grad_solve(&sub, opts)?;
    let x = res.x;
    let ax = p.design().matvec(&x)?;
    let u = linalg::scale(-1.0 / gamma, &p.loss().gradient(&ax));
    if !p.dual_feasible(&u)? {
        return Err(Error::InfeasiblePair);
    }
    if !verify_linkage(p, &x, &u)? {
        return Err(Error::LinkageViolated(format!(
            "sequential pair at gamma = {gamma} failed the linkage check"
        )));
    }
    Ok(PrimalDualPair {
        x,
        u,
        linked: true,
        gamma: Some(gamma),
    })
}
