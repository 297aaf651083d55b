use crate::convex::{LossFamily, SmoothLoss};
use crate::ext_real::ExtReal;

/// Slack on the box `[0, 1]` accepted by the conjugate before clamping.
pub const BOX_TOL: f64 = 1e-12;

/// `f(z) = Σ log(1 + e^{−zᵢ})`, `α = 4`. Labels are folded into the rows of `A`.
#[derive(Clone, Debug)]
pub struct Logistic {
    m: usize,
}

impl Logistic {
    pub fn new(m: usize) -> Self {
        Logistic { m }
    }
}

/// `log(1 + eˣ)` without overflow.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `1 / (1 + e^{−x})`
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `t log t` with `0 log 0 = 0`.
fn xlogx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

impl SmoothLoss for Logistic {
    fn dim(&self) -> usize {
        self.m
    }

    fn alpha(&self) -> f64 {
        4.0
    }

    fn value(&self, z: &[f64]) -> f64 {
        z.iter().map(|&zi| softplus(-zi)).sum()
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        z.iter().map(|&zi| -sigmoid(-zi)).collect()
    }

    /// `Σ tᵢ log tᵢ + (1 − tᵢ) log(1 − tᵢ)` with `t = −v ∈ [0, 1]ᵐ`, else `+∞`.
    fn conjugate(&self, v: &[f64]) -> ExtReal {
        let mut total = 0.0;
        for &vi in v {
            let t = -vi;
            if !(-BOX_TOL..=1.0 + BOX_TOL).contains(&t) {
                return ExtReal::PosInf;
            }
            let t = t.clamp(0.0, 1.0);
            total += xlogx(t) + xlogx(1.0 - t);
        }
        ExtReal::finite(total)
    }

    fn hessian_diag(&self, z: &[f64]) -> Option<Vec<f64>> {
        Some(z.iter().map(|&zi| sigmoid(zi) * sigmoid(-zi)).collect())
    }

    fn family(&self) -> LossFamily<'_> {
        LossFamily::Logistic
    }
}
