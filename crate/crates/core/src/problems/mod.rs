//! Concrete problem families: least squares with a norm or elastic-net
//! penalty, and ℓ1-regularised logistic regression.

mod elastic_net;
mod indicator;
mod least_squares;
mod logistic;
mod norms;
mod scaled;

use std::sync::Arc;

pub use elastic_net::ElasticNet;
pub use indicator::NonNegative;
pub use least_squares::LeastSquares;
pub use logistic::{sigmoid, softplus, Logistic};
pub use norms::{L1Norm, L2Norm, NormPenalty};
pub use scaled::ScaledLoss;

use crate::convex::{Norm, Problem};
use crate::error::{check_len, Error, Result};
use crate::matrix::Design;

#[derive(Clone, Debug)]
pub enum NormKind {
    L1,
    L2,
    Custom(Arc<dyn Norm>),
}

impl NormKind {
    fn into_norm(self) -> Arc<dyn Norm> {
        match self {
            NormKind::L1 => Arc::new(L1Norm),
            NormKind::L2 => Arc::new(L2Norm),
            NormKind::Custom(n) => n,
        }
    }
}

/// `½‖y − Ax‖² + λ‖x‖`
#[derive(Clone, Debug)]
pub struct LassoSpec {
    pub a: Design,
    pub y: Vec<f64>,
    pub lambda: f64,
    pub norm: NormKind,
}

impl LassoSpec {
    pub fn l1(a: Design, y: Vec<f64>, lambda: f64) -> Self {
        LassoSpec {
            a,
            y,
            lambda,
            norm: NormKind::L1,
        }
    }
}

/// `Σ log(1 + e^{−(Ax)ᵢ}) + λ‖x‖₁`, labels already multiplied into the rows of `A`.
#[derive(Clone, Debug)]
pub struct LogisticL1Spec {
    pub a: Design,
    pub lambda: f64,
}

/// `½‖y − Ax‖² + λ₁‖x‖₁ + (λ₂/2)‖x‖²`
#[derive(Clone, Debug)]
pub struct ElasticNetSpec {
    pub a: Design,
    pub y: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn check_nonempty(a: &Design) -> Result<()> {
    if a.rows() == 0 || a.cols() == 0 {
        Err(Error::InvalidParameter(format!(
            "design matrix is empty ({}x{})",
            a.rows(),
            a.cols()
        )))
    } else {
        Ok(())
    }
}

fn check_finite(name: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|t| t.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} has non-finite entries"
        )))
    }
}

pub fn make_lasso(spec: LassoSpec) -> Result<Problem> {
    check_positive("lambda", spec.lambda)?;
    check_nonempty(&spec.a)?;
    check_len("response", spec.a.rows(), spec.y.len())?;
    check_finite("response", &spec.y)?;
    let n = spec.a.cols();
    Problem::new(
        spec.a,
        Arc::new(LeastSquares::new(spec.y)),
        Arc::new(NormPenalty::new(n, spec.lambda, spec.norm.into_norm())),
    )
}

pub fn make_logistic(spec: LogisticL1Spec) -> Result<Problem> {
    check_positive("lambda", spec.lambda)?;
    check_nonempty(&spec.a)?;
    let (m, n) = (spec.a.rows(), spec.a.cols());
    Problem::new(
        spec.a,
        Arc::new(Logistic::new(m)),
        Arc::new(NormPenalty::l1(n, spec.lambda)),
    )
}

pub fn make_elastic_net(spec: ElasticNetSpec) -> Result<Problem> {
    check_positive("lambda1", spec.lambda1)?;
    check_positive("lambda2", spec.lambda2)?;
    check_nonempty(&spec.a)?;
    check_len("response", spec.a.rows(), spec.y.len())?;
    check_finite("response", &spec.y)?;
    let n = spec.a.cols();
    Problem::new(
        spec.a,
        Arc::new(LeastSquares::new(spec.y)),
        Arc::new(ElasticNet::new(n, spec.lambda1, spec.lambda2)),
    )
}

/// Same problem with the ℓ1 level (or norm level) replaced. Works for
/// [`NormPenalty`] and [`ElasticNet`] (where `λ₁` is replaced).
pub fn with_lambda(p: &Problem, lambda: f64) -> Result<Problem> {
    check_positive("lambda", lambda)?;
    let g = p.regularizer();
    if let Some(view) = g.norm_penalty() {
        let norm: Arc<dyn Norm> = if view.norm.is_l1() {
            Arc::new(L1Norm)
        } else if view.norm.name() == "l2" {
            Arc::new(L2Norm)
        } else {
            return Err(Error::WrongFamily {
                expected: "a built-in norm penalty",
            });
        };
        return p.with_regularizer(Arc::new(NormPenalty::new(p.n(), lambda, norm)));
    }
    match g.support_model() {
        Some(model) if model.l2 > 0.0 => {
            p.with_regularizer(Arc::new(ElasticNet::new(p.n(), lambda, model.l2)))
        }
        _ => Err(Error::WrongFamily {
            expected: "a norm or elastic-net penalty",
        }),
    }
}
