//! Newton refinement on an identified support.
//!
//! For `g = λ₁‖·‖₁ + (λ₂/2)‖·‖²` and a separable twice-differentiable `f`,
//! the problem restricted to a fixed support `S` with fixed signs `s` is
//! smooth: `φ(z) = f(A_S z) + λ₁sᵀz + (λ₂/2)‖z‖²`. Damped Newton on `φ`
//! reaches machine precision in a handful of steps when `S` is right.

use nalgebra::{DMatrix, DVector};

use crate::convex::{Problem, SupportModel};
use crate::linalg;

const MAX_NEWTON: usize = 60;

fn phi(p: &Problem, model: SupportModel, support: &[usize], signs: &[f64], z: &[f64]) -> f64 {
    let a = p.design();
    let mut az = vec![0.0; p.m()];
    for (k, &j) in support.iter().enumerate() {
        let col = a.column(j);
        linalg::axpy(z[k], &col, &mut az);
    }
    p.loss().value(&az) + model.l1 * linalg::dot(signs, z) + 0.5 * model.l2 * linalg::norm_sq(z)
}

/// Returns the refined full-length iterate, or `None` when the support model
/// is unavailable, the Hessian is singular, or a sign flips.
pub(crate) fn polish(p: &Problem, x: &[f64]) -> Option<Vec<f64>> {
    let model = p.regularizer().support_model()?;
    let support: Vec<usize> = (0..x.len()).filter(|&j| x[j] != 0.0).collect();
    if support.is_empty() {
        return None;
    }
    let signs: Vec<f64> = support.iter().map(|&j| x[j].signum()).collect();
    let a = p.design();
    let m = p.m();
    let k = support.len();
    if k > m && model.l2 == 0.0 {
        return None;
    }
    let cols: Vec<Vec<f64>> = support.iter().map(|&j| a.column(j)).collect();
    let a_s = DMatrix::from_fn(m, k, |i, c| cols[c][i]);

    let mut z: Vec<f64> = support.iter().map(|&j| x[j]).collect();
    let mut val = phi(p, model, &support, &signs, &z);
    for _ in 0..MAX_NEWTON {
        let az = &a_s * DVector::from_column_slice(&z);
        let az = az.as_slice();
        let gf = p.loss().gradient(az);
        let h = p.loss().hessian_diag(az)?;
        let mut grad = a_s.transpose() * DVector::from_vec(gf);
        for c in 0..k {
            grad[c] += model.l1 * signs[c] + model.l2 * z[c];
        }
        let mut hess = a_s.transpose() * DMatrix::from_fn(m, k, |i, c| h[i] * a_s[(i, c)]);
        for c in 0..k {
            hess[(c, c)] += model.l2;
        }
        let chol = hess.cholesky()?;
        let step = chol.solve(&grad);
        let decrement = grad.dot(&step);
        if !decrement.is_finite() {
            return None;
        }
        if decrement <= 1e-30 * (1.0 + val.abs()) {
            break;
        }
        if decrement <= 1e-12 * (1.0 + val.abs()) {
            // inside the quadratic region the decrease is below what φ can
            // resolve, so a line search would reject the exact step
            z = z.iter().zip(step.iter()).map(|(zi, si)| zi - si).collect();
            val = phi(p, model, &support, &signs, &z);
            if step.norm() <= 1e-15 * (1.0 + linalg::norm(&z)) {
                break;
            }
            continue;
        }
        // backtracking on φ
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand: Vec<f64> = z
                .iter()
                .zip(step.iter())
                .map(|(zi, si)| zi - t * si)
                .collect();
            let cv = phi(p, model, &support, &signs, &cand);
            if cv <= val - 0.25 * t * decrement || (cv <= val && t < 1.0) {
                z = cand;
                val = cv;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || t * step.norm() <= 1e-16 * (1.0 + linalg::norm(&z)) {
            break;
        }
    }
    if z.iter().zip(&signs).any(|(zi, si)| zi * si <= 0.0) {
        return None;
    }
    let mut out = vec![0.0; x.len()];
    for (&j, &v) in support.iter().zip(&z) {
        out[j] = v;
    }
    Some(out)
}
