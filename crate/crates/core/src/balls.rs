//! Safe balls: Euclidean balls guaranteed to contain the dual optimum `u*`.
//!
//! [`ryu_ball`] is valid for any feasible pair of any problem; the other
//! constructors reproduce the classical balls, several of which coincide with
//! a RYU ball at a particular pair. The DPP ball is not provided; it is known
//! to contain the EDPP ball.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::convex::{Problem, LINKAGE_RTOL};
use crate::error::{check_len, Error, Result};
use crate::ext_real::ExtReal;
use crate::linalg;
use crate::pairs::{verify_linkage, PrimalDualPair};

/// Radicands in `[-RADICAND_CLAMP, 0)` are treated as rounding noise.
pub const RADICAND_CLAMP: f64 = 1e-10;
/// Relative slack for [`Ball::contains`] and [`Ball::is_subset_of`].
pub const MEMBERSHIP_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallKind {
    Ryu,
    Gap,
    XGap,
    DynamicEdpp,
    Fne,
    Sasvi,
    Edpp,
    Safe,
    Slores,
    Sfer,
}

impl BallKind {
    pub const ALL: [BallKind; 10] = [
        BallKind::Ryu,
        BallKind::Gap,
        BallKind::XGap,
        BallKind::DynamicEdpp,
        BallKind::Fne,
        BallKind::Sasvi,
        BallKind::Edpp,
        BallKind::Safe,
        BallKind::Slores,
        BallKind::Sfer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BallKind::Ryu => "ryu",
            BallKind::Gap => "gap",
            BallKind::XGap => "x-gap",
            BallKind::DynamicEdpp => "dynamic-edpp",
            BallKind::Fne => "fne",
            BallKind::Sasvi => "sasvi",
            BallKind::Edpp => "edpp",
            BallKind::Safe => "safe",
            BallKind::Slores => "slores",
            BallKind::Sfer => "sfer",
        }
    }

    pub fn parse(s: &str) -> Option<BallKind> {
        BallKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for BallKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `B(c, r) = {u : ‖u − c‖₂ ≤ r}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub tag: BallKind,
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// `‖v − c‖ ≤ r + 1e−9·(1 + r)`
    pub fn contains(&self, v: &[f64]) -> Result<bool> {
        check_len("point", self.dim(), v.len())?;
        Ok(linalg::dist(v, &self.center) <= self.radius + MEMBERSHIP_RTOL * (1.0 + self.radius))
    }

    /// `‖c_self − c_other‖ + r_self ≤ r_other + 1e−9·(1 + r_other)`
    pub fn is_subset_of(&self, other: &Ball) -> Result<bool> {
        Ok(self.inclusion_slack(other)? >= -MEMBERSHIP_RTOL * (1.0 + other.radius))
    }

    /// `r_other − ‖c_self − c_other‖ − r_self`; nonnegative iff `self ⊆ other`.
    pub fn inclusion_slack(&self, other: &Ball) -> Result<f64> {
        check_len("ball center", self.dim(), other.dim())?;
        Ok(other.radius - linalg::dist(&self.center, &other.center) - self.radius)
    }
}

pub fn contains(b: &Ball, v: &[f64]) -> Result<bool> {
    b.contains(v)
}

pub fn is_subset(a: &Ball, b: &Ball) -> Result<bool> {
    a.is_subset_of(b)
}

fn clamp_radicand(r2: f64) -> Result<f64> {
    if r2 >= 0.0 {
        Ok(r2)
    } else if r2 >= -RADICAND_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::NegativeRadicand(r2))
    }
}

fn finite_gap(p: &Problem, x: &[f64], u: &[f64]) -> Result<f64> {
    p.duality_gap(x, u)?.value().ok_or(Error::InfeasiblePair)
}

fn require_feasible_dual(p: &Problem, u: &[f64]) -> Result<()> {
    if p.dual_feasible(u)? {
        Ok(())
    } else {
        Err(Error::InfeasiblePair)
    }
}

fn lasso(p: &Problem) -> Result<(&[f64], f64)> {
    p.lasso_parts().ok_or(Error::WrongFamily {
        expected: "f = ½‖y − ·‖² and g = λ‖·‖₁",
    })
}

fn logistic_l1(p: &Problem) -> Result<f64> {
    p.logistic_l1_lambda().ok_or(Error::WrongFamily {
        expected: "logistic f and g = λ‖·‖₁",
    })
}

fn sequential_gamma(pair: &PrimalDualPair) -> Result<f64> {
    pair.gamma.ok_or_else(|| {
        Error::LinkageViolated("pair was not produced by the sequential construction".into())
    })
}

/// Relative size of the rounding bound added to radicands.
///
/// A pair whose true gap is below machine resolution would otherwise get
/// radius 0 while `u*` sits up to `√ε` away. Every ball adds the same bound
/// `s(x, u)` (scaled as its radicand requires), so the equalities and
/// inclusions between balls hold exactly in the presence of the bound.
pub const ROUNDING_RTOL: f64 = 16.0 * f64::EPSILON;

/// Quantities shared by the gap-based constructions.
struct GapParts {
    gap: f64,
    grad: Vec<f64>,
    /// `‖u + ∇f(Ax)‖²`
    shift_sq: f64,
    /// Rounding bound on the RYU radicand.
    slack: f64,
}

fn gap_parts(p: &Problem, x: &[f64], u: &[f64]) -> Result<GapParts> {
    let gap = finite_gap(p, x, u)?;
    let ax = p.design().matvec(x)?;
    let grad = p.loss().gradient(&ax);
    let shift_sq = linalg::norm_sq(&linalg::add(u, &grad));
    let atu = p.design().rmatvec(u)?;
    let magnitude = p.loss().value(&ax).abs()
        + p.regularizer().value(x).to_f64().abs()
        + p.loss().conjugate(&linalg::scale(-1.0, u)).to_f64().abs()
        + p.regularizer().conjugate(&atu).to_f64().abs()
        + linalg::norm(&ax) * (linalg::norm(u) + linalg::norm(&grad))
        + linalg::norm_sq(u)
        + linalg::norm_sq(&grad);
    let slack = ROUNDING_RTOL * (magnitude / p.alpha() + 0.25 * shift_sq);
    Ok(GapParts {
        gap,
        grad,
        shift_sq,
        slack,
    })
}

/// Rounding bound added to the RYU radicand at `(x, u)`.
pub fn rounding_slack(p: &Problem, x: &[f64], u: &[f64]) -> Result<f64> {
    Ok(gap_parts(p, x, u)?.slack)
}

/// Center `½(u − ∇f(Ax))`, radius `√(GAP/α − ¼‖u + ∇f(Ax)‖²)`.
pub fn ryu_ball(p: &Problem, x: &[f64], u: &[f64]) -> Result<Ball> {
    let g = gap_parts(p, x, u)?;
    let r2 = clamp_radicand(g.gap / p.alpha() - 0.25 * g.shift_sq)? + g.slack;
    Ok(Ball {
        tag: BallKind::Ryu,
        center: linalg::scale(0.5, &linalg::sub(u, &g.grad)),
        radius: r2.sqrt(),
    })
}

fn gap_radius(p: &Problem, g: &GapParts) -> f64 {
    (2.0 * (g.gap / p.alpha() + g.slack)).sqrt()
}

/// Center `u`, radius `√(2·GAP/α)`.
pub fn gap_ball(p: &Problem, x: &[f64], u: &[f64]) -> Result<Ball> {
    let g = gap_parts(p, x, u)?;
    Ok(Ball {
        tag: BallKind::Gap,
        center: u.to_vec(),
        radius: gap_radius(p, &g),
    })
}

/// Center `−∇f(Ax)`, radius `√(2·GAP/α)`.
pub fn xgap_ball(p: &Problem, x: &[f64], u: &[f64]) -> Result<Ball> {
    let g = gap_parts(p, x, u)?;
    Ok(Ball {
        tag: BallKind::XGap,
        radius: gap_radius(p, &g),
        center: linalg::scale(-1.0, &g.grad),
    })
}

/// Rescaling `t ≥ 0` of `x` minimising the RYU radius at `(t·x, u)` for
/// norm-regularised least squares:
/// `max(0, (⟨Ax | y + u⟩ − 2λ‖x‖) / ‖Ax‖²)`, and `0` when `Ax = 0`.
pub fn t_star(p: &Problem, x: &[f64], u: &[f64]) -> Result<f64> {
    let (y, pen) = p.norm_least_squares_parts().ok_or(Error::WrongFamily {
        expected: "f = ½‖y − ·‖² and g = λ‖·‖",
    })?;
    p.check_dual(u)?;
    let ax = p.design().matvec(x)?;
    let ax_sq = linalg::norm_sq(&ax);
    if ax_sq == 0.0 {
        return Ok(0.0);
    }
    let num = linalg::dot(&ax, &linalg::add(y, u)) - 2.0 * pen.lambda * pen.norm.norm(x);
    Ok((num / ax_sq).max(0.0))
}

/// Center `½(y + u − t*Ax)`, radius `½√(‖y − u‖² − ‖t*Ax‖²)`.
pub fn dynamic_edpp_ball(p: &Problem, x: &[f64], u: &[f64]) -> Result<Ball> {
    let t = t_star(p, x, u)?;
    require_feasible_dual(p, u)?;
    let (y, _) = p.norm_least_squares_parts().expect("checked by t_star");
    let tax = linalg::scale(t, &p.design().matvec(x)?);
    let mut center = linalg::sub(&linalg::add(y, u), &tax);
    center.iter_mut().for_each(|c| *c *= 0.5);
    let slack = rounding_slack(p, &linalg::scale(t, x), u)?;
    let r2 = clamp_radicand(0.25 * (linalg::dist(y, u).powi(2) - linalg::norm_sq(&tax)))? + slack;
    Ok(Ball {
        tag: BallKind::DynamicEdpp,
        center,
        radius: r2.sqrt(),
    })
}

/// Center `u + ½(y − Ax − u)`, radius `½‖y − Ax − u‖`. Safe only when
/// `⟨u | Ax⟩ = λ‖x‖₁`, which is enforced.
pub fn fne_ball(p: &Problem, x: &[f64], u: &[f64]) -> Result<Ball> {
    let (y, lambda) = lasso(p)?;
    p.check_primal(x)?;
    require_feasible_dual(p, u)?;
    let ax = p.design().matvec(x)?;
    let target = lambda * linalg::norm_l1(x);
    let lhs = linalg::dot(u, &ax);
    if (lhs - target).abs() > LINKAGE_RTOL * (1.0 + target) {
        return Err(Error::LinkageViolated(format!(
            "⟨u|Ax⟩ = {lhs} but λ‖x‖₁ = {target}"
        )));
    }
    let resid = linalg::sub(&linalg::sub(y, &ax), u);
    let mut center = u.to_vec();
    linalg::axpy(0.5, &resid, &mut center);
    let slack = rounding_slack(p, x, u)?;
    Ok(Ball {
        tag: BallKind::Fne,
        center,
        radius: (0.25 * linalg::norm_sq(&resid) + slack).sqrt(),
    })
}

/// Center `½(y + u)`, radius `½‖y − u‖`.
pub fn sasvi_ball(p: &Problem, u: &[f64]) -> Result<Ball> {
    let (y, _) = lasso(p)?;
    require_feasible_dual(p, u)?;
    let slack = rounding_slack(p, &vec![0.0; p.n()], u)?;
    Ok(Ball {
        tag: BallKind::Sasvi,
        center: linalg::scale(0.5, &linalg::add(y, u)),
        radius: (0.25 * linalg::dist(y, u).powi(2) + slack).sqrt(),
    })
}

/// FNE ball evaluated at a sequential pair.
pub fn edpp_ball(p: &Problem, pair: &PrimalDualPair) -> Result<Ball> {
    sequential_gamma(pair)?;
    let mut b = fne_ball(p, &pair.x, &pair.u)?;
    b.tag = BallKind::Edpp;
    Ok(b)
}

/// Center `y`, radius `‖y − u‖`.
pub fn safe_ball(p: &Problem, u: &[f64]) -> Result<Ball> {
    let (y, _) = lasso(p)?;
    require_feasible_dual(p, u)?;
    let slack = rounding_slack(p, &vec![0.0; p.n()], u)?;
    Ok(Ball {
        tag: BallKind::Safe,
        center: y.to_vec(),
        radius: (linalg::dist(y, u).powi(2) + 2.0 * slack).sqrt(),
    })
}

/// `(γ, Breg, rounding bound)` for a logistic sequential pair.
fn logistic_breg(p: &Problem, pair: &PrimalDualPair) -> Result<(f64, f64, f64)> {
    logistic_l1(p)?;
    let gamma = sequential_gamma(pair)?;
    if !verify_linkage(p, &pair.x, &pair.u)? {
        return Err(Error::LinkageViolated(
            "Aᵀu ∉ ∂g(x) for the supplied pair".into(),
        ));
    }
    let breg = match p.bregman_divergence(&pair.x, &pair.u)? {
        ExtReal::Finite(v) => v.max(0.0),
        ExtReal::PosInf => return Err(Error::InfeasiblePair),
    };
    Ok((gamma, breg, rounding_slack(p, &pair.x, &pair.u)?))
}

/// Center `γu`, radius `√(½·Breg(x, u))`.
pub fn slores_ball(p: &Problem, pair: &PrimalDualPair) -> Result<Ball> {
    let (gamma, breg, slack) = logistic_breg(p, pair)?;
    Ok(Ball {
        tag: BallKind::Slores,
        center: linalg::scale(gamma, &pair.u),
        radius: (0.5 * breg + 2.0 * slack).sqrt(),
    })
}

/// Center `½(1 + γ)u`, radius `√(¼Breg − ¼‖(1 − γ)u‖²)`.
pub fn sfer_ball(p: &Problem, pair: &PrimalDualPair) -> Result<Ball> {
    let (gamma, breg, slack) = logistic_breg(p, pair)?;
    let q = 0.25 * (1.0 - gamma).powi(2) * linalg::norm_sq(&pair.u);
    let r2 = clamp_radicand(0.25 * breg - q)? + slack;
    Ok(Ball {
        tag: BallKind::Sfer,
        center: linalg::scale(0.5 * (1.0 + gamma), &pair.u),
        radius: r2.sqrt(),
    })
}

/// Builds the ball of the given kind from a pair; the kind decides which
/// parts of the pair are used.
pub fn build_ball(kind: BallKind, p: &Problem, pair: &PrimalDualPair) -> Result<Ball> {
    match kind {
        BallKind::Ryu => ryu_ball(p, &pair.x, &pair.u),
        BallKind::Gap => gap_ball(p, &pair.x, &pair.u),
        BallKind::XGap => xgap_ball(p, &pair.x, &pair.u),
        BallKind::DynamicEdpp => dynamic_edpp_ball(p, &pair.x, &pair.u),
        BallKind::Fne => fne_ball(p, &pair.x, &pair.u),
        BallKind::Sasvi => sasvi_ball(p, &pair.u),
        BallKind::Edpp => edpp_ball(p, pair),
        BallKind::Safe => safe_ball(p, &pair.u),
        BallKind::Slores => slores_ball(p, pair),
        BallKind::Sfer => sfer_ball(p, pair),
    }
}

/// Ball kinds whose preconditions hold for this problem and pair.
pub fn applicable_kinds(p: &Problem, pair: &PrimalDualPair) -> Vec<BallKind> {
    let mut kinds = vec![BallKind::Ryu, BallKind::Gap, BallKind::XGap];
    if p.norm_least_squares_parts().is_some() {
        kinds.push(BallKind::DynamicEdpp);
    }
    if p.lasso_parts().is_some() {
        if pair.linked {
            kinds.push(BallKind::Fne);
        }
        kinds.push(BallKind::Sasvi);
        if pair.gamma.is_some() && pair.linked {
            kinds.push(BallKind::Edpp);
        }
        kinds.push(BallKind::Safe);
    }
    if p.logistic_l1_lambda().is_some() && pair.gamma.is_some() && pair.linked {
        kinds.push(BallKind::Slores);
        kinds.push(BallKind::Sfer);
    }
    kinds
}
