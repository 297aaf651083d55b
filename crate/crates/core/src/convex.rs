//! Function interfaces for the composite problem `min_x f(Ax) + g(x)`
//! and the primal/dual quantities built from them.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::ext_real::{DualValue, ExtReal};
use crate::linalg;
use crate::matrix::Design;

/// Relative slack used when testing `‖Aᵀu‖_* ≤ λ`.
pub const DUAL_FEASIBILITY_RTOL: f64 = 1e-9;
/// Relative slack used when testing `⟨w|x⟩ = λ‖x‖`.
pub const LINKAGE_RTOL: f64 = 1e-8;

/// Closed-form families the specialised ball constructions need to recognise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LossFamily<'a> {
    /// `f(z) = ½‖y − z‖²`
    LeastSquares {
        y: &'a [f64],
    },
    /// `f(z) = Σ log(1 + e^{−zᵢ})`
    Logistic,
    Other,
}

/// Smooth part `f : Rᵐ → R` with `α⁻¹`-Lipschitz gradient.
pub trait SmoothLoss: Send + Sync + Debug {
    fn dim(&self) -> usize;
    /// Strong-convexity modulus of `f*`; `∇f` is `1/alpha`-Lipschitz.
    fn alpha(&self) -> f64;
    fn value(&self, z: &[f64]) -> f64;
    fn gradient(&self, z: &[f64]) -> Vec<f64>;
    /// `f*(v)`
    fn conjugate(&self, v: &[f64]) -> ExtReal;
    /// Diagonal Hessian for separable `f`. Used by the solver's support polish.
    fn hessian_diag(&self, _z: &[f64]) -> Option<Vec<f64>> {
        None
    }
    fn family(&self) -> LossFamily<'_> {
        LossFamily::Other
    }
}

/// A norm together with its dual norm and the proximity operator of `t‖·‖`.
pub trait Norm: Send + Sync + Debug {
    fn norm(&self, x: &[f64]) -> f64;
    fn dual_norm(&self, w: &[f64]) -> f64;
    /// `argmin_x t‖x‖ + ½‖x − v‖²`
    fn prox(&self, v: &[f64], t: f64) -> Vec<f64>;
    /// True for the coordinate-separable ℓ1 norm.
    fn is_l1(&self) -> bool {
        false
    }
    fn name(&self) -> &'static str;
}

/// `λ₁ Σ|xⱼ| + (λ₂/2)‖x‖²` restricted to a support in closed form; lets the
/// solver refine an iterate by Newton steps on the identified support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportModel {
    pub l1: f64,
    pub l2: f64,
}

/// View of a regularizer of the form `λ‖·‖`.
#[derive(Clone, Copy, Debug)]
pub struct NormPenaltyView<'a> {
    pub lambda: f64,
    pub norm: &'a dyn Norm,
}

/// Regularizer `g : Rⁿ → R ∪ {+∞}`.
pub trait Regularizer: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> ExtReal;
    /// `g*(w)`, with the feasibility slack of [`DUAL_FEASIBILITY_RTOL`] for
    /// indicator-valued conjugates.
    fn conjugate(&self, w: &[f64]) -> ExtReal;
    /// Decides `w ∈ ∂g(x)` up to tolerance.
    fn is_linked(&self, x: &[f64], w: &[f64]) -> bool;
    /// `argmin_x step·g(x) + ½‖x − v‖²`
    fn prox(&self, v: &[f64], step: f64) -> Vec<f64>;
    /// Largest `s ∈ [0, 1]` with `g*(s·w) < +∞`.
    fn dual_scale_factor(&self, w: &[f64]) -> f64;
    /// Level `λ` of a separable ℓ1 term, if any: `xⱼ* = 0` whenever `|aⱼᵀu*| < λ`.
    fn l1_threshold(&self) -> Option<f64> {
        None
    }
    fn norm_penalty(&self) -> Option<NormPenaltyView<'_>> {
        None
    }
    fn support_model(&self) -> Option<SupportModel> {
        None
    }
    /// The same regularizer on the kept coordinates.
    fn restrict(&self, keep: &[usize]) -> Arc<dyn Regularizer>;
    fn name(&self) -> &'static str;
}

/// `min_x f(Ax) + g(x)`.
#[derive(Clone, Debug)]
pub struct Problem {
    a: Arc<Design>,
    f: Arc<dyn SmoothLoss>,
    g: Arc<dyn Regularizer>,
}

impl Problem {
    pub fn new(a: Design, f: Arc<dyn SmoothLoss>, g: Arc<dyn Regularizer>) -> Result<Self> {
        Problem::from_shared(Arc::new(a), f, g)
    }

    pub fn from_shared(
        a: Arc<Design>,
        f: Arc<dyn SmoothLoss>,
        g: Arc<dyn Regularizer>,
    ) -> Result<Self> {
        check_len("smooth part dimension", a.rows(), f.dim())?;
        check_len("regularizer dimension", a.cols(), g.dim())?;
        if !(f.alpha() > 0.0 && f.alpha().is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {}",
                f.alpha()
            )));
        }
        Ok(Problem { a, f, g })
    }

    pub fn design(&self) -> &Design {
        &self.a
    }

    pub fn shared_design(&self) -> Arc<Design> {
        Arc::clone(&self.a)
    }

    pub fn loss(&self) -> &Arc<dyn SmoothLoss> {
        &self.f
    }

    pub fn regularizer(&self) -> &Arc<dyn Regularizer> {
        &self.g
    }

    pub fn with_loss(&self, f: Arc<dyn SmoothLoss>) -> Result<Problem> {
        Problem::from_shared(Arc::clone(&self.a), f, Arc::clone(&self.g))
    }

    pub fn with_regularizer(&self, g: Arc<dyn Regularizer>) -> Result<Problem> {
        Problem::from_shared(Arc::clone(&self.a), Arc::clone(&self.f), g)
    }

    /// Number of rows of `A` (dual dimension).
    pub fn m(&self) -> usize {
        self.a.rows()
    }

    /// Number of columns of `A` (primal dimension).
    pub fn n(&self) -> usize {
        self.a.cols()
    }

    pub fn alpha(&self) -> f64 {
        self.f.alpha()
    }

    pub(crate) fn check_primal(&self, x: &[f64]) -> Result<()> {
        check_len("primal vector", self.n(), x.len())
    }

    pub(crate) fn check_dual(&self, u: &[f64]) -> Result<()> {
        check_len("dual vector", self.m(), u.len())
    }

    /// `(y, λ)` when `f = ½‖y − ·‖²` and `g = λ‖·‖₁`.
    pub fn lasso_parts(&self) -> Option<(&[f64], f64)> {
        match (self.f.family(), self.g.norm_penalty()) {
            (LossFamily::LeastSquares { y }, Some(v)) if v.norm.is_l1() => Some((y, v.lambda)),
            _ => None,
        }
    }

    /// `(y, λ, ‖·‖)` when `f = ½‖y − ·‖²` and `g = λ‖·‖` for some norm.
    pub fn norm_least_squares_parts(&self) -> Option<(&[f64], NormPenaltyView<'_>)> {
        match (self.f.family(), self.g.norm_penalty()) {
            (LossFamily::LeastSquares { y }, Some(v)) => Some((y, v)),
            _ => None,
        }
    }

    /// `λ` when `f` is logistic and `g = λ‖·‖₁`.
    pub fn logistic_l1_lambda(&self) -> Option<f64> {
        match (self.f.family(), self.g.norm_penalty()) {
            (LossFamily::Logistic, Some(v)) if v.norm.is_l1() => Some(v.lambda),
            _ => None,
        }
    }

    /// `‖Aᵀ∇f(0)‖∞`, the smallest ℓ1 level at which `0` is optimal.
    pub fn lambda_max(&self) -> f64 {
        let grad = self.f.gradient(&vec![0.0; self.m()]);
        linalg::norm_inf(&self.a.rmatvec(&grad).expect("gradient has length m"))
    }

    /// `P(x) = f(Ax) + g(x)`
    pub fn primal_objective(&self, x: &[f64]) -> Result<ExtReal> {
        self.check_primal(x)?;
        let ax = self.a.matvec(x)?;
        Ok(self.g.value(x) + self.f.value(&ax))
    }

    /// `D(u) = −f*(−u) − g*(Aᵀu)`
    pub fn dual_objective(&self, u: &[f64]) -> Result<DualValue> {
        self.check_dual(u)?;
        let neg_u = linalg::scale(-1.0, u);
        let fc = self.f.conjugate(&neg_u);
        if !fc.is_finite() {
            return Ok(DualValue::NegInf);
        }
        let atu = self.a.rmatvec(u)?;
        Ok(DualValue::from_negated(fc + self.g.conjugate(&atu)))
    }

    /// `P(x) − D(u)`; `+∞` outside `dom(P) × dom(−D)`.
    pub fn duality_gap(&self, x: &[f64], u: &[f64]) -> Result<ExtReal> {
        let p = self.primal_objective(x)?;
        let d = self.dual_objective(u)?;
        Ok(match p.minus_dual(d) {
            // weak duality; only rounding can push it below zero
            ExtReal::Finite(v) => ExtReal::Finite(v.max(0.0)),
            inf => inf,
        })
    }

    pub fn dual_feasible(&self, u: &[f64]) -> Result<bool> {
        Ok(self.dual_objective(u)?.is_finite())
    }

    /// `Fen(x, u) = f(Ax) + f*(−u) + ⟨u | Ax⟩`
    pub fn fenchel_divergence(&self, x: &[f64], u: &[f64]) -> Result<ExtReal> {
        self.check_primal(x)?;
        self.check_dual(u)?;
        let ax = self.a.matvec(x)?;
        let fc = self.f.conjugate(&linalg::scale(-1.0, u));
        Ok(fc + (self.f.value(&ax) + linalg::dot(u, &ax)))
    }

    /// `Breg(x, u) = f*(−u) − f*(∇f(Ax)) + ⟨Ax | u + ∇f(Ax)⟩`
    pub fn bregman_divergence(&self, x: &[f64], u: &[f64]) -> Result<ExtReal> {
        self.check_primal(x)?;
        self.check_dual(u)?;
        let ax = self.a.matvec(x)?;
        let grad = self.f.gradient(&ax);
        let at_grad = match self.f.conjugate(&grad) {
            ExtReal::Finite(v) => v,
            // ∇f(Ax) always lies in dom(f*); reaching this means a broken conjugate
            ExtReal::PosInf => {
                return Err(Error::InvalidParameter(
                    "conjugate is infinite at the gradient".into(),
                ))
            }
        };
        let fc = self.f.conjugate(&linalg::scale(-1.0, u));
        let shift = linalg::add(u, &grad);
        Ok(fc + (linalg::dot(&ax, &shift) - at_grad))
    }

    /// `g(x) + g*(Aᵀu) − ⟨Aᵀu | x⟩`, the part of the gap that linkage removes.
    pub fn regularizer_slack(&self, x: &[f64], u: &[f64]) -> Result<ExtReal> {
        self.check_primal(x)?;
        self.check_dual(u)?;
        let atu = self.a.rmatvec(u)?;
        Ok(self.g.value(x) + self.g.conjugate(&atu) + (-linalg::dot(&atu, x)))
    }
}
