//! Safe feature elimination for regularizers with a separable ℓ1 term.
//!
//! If `B(c, r)` contains `u*` then `|aⱼᵀu*| ≤ |aⱼᵀc| + r‖aⱼ‖`, and a strict
//! `< λ` forces `xⱼ* = 0` through `Aᵀu* ∈ ∂g(x*)`.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::balls::{Ball, BallKind};
use crate::convex::Problem;
use crate::error::{check_len, Error, Result};

/// Relative guard on the screening threshold; ties are never screened.
pub const SCREEN_RTOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ScreenMask {
    /// `true` marks a coordinate certified to be zero at every solution.
    pub flags: Vec<bool>,
    pub ball_tag: BallKind,
}

impl ScreenMask {
    pub fn empty(n: usize, ball_tag: BallKind) -> Self {
        ScreenMask {
            flags: vec![false; n],
            ball_tag,
        }
    }

    pub fn n(&self) -> usize {
        self.flags.len()
    }

    pub fn screened(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn screened_indices(&self) -> Vec<usize> {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(j, &f)| f.then_some(j))
            .collect()
    }

    pub fn kept_indices(&self) -> Vec<usize> {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(j, &f)| (!f).then_some(j))
            .collect()
    }
}

impl Serialize for ScreenMask {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ScreenMask", 3)?;
        st.serialize_field("ball_tag", &self.ball_tag)?;
        st.serialize_field("screened_indices", &self.screened_indices())?;
        st.serialize_field("n", &self.n())?;
        st.end()
    }
}

/// `flags[j] = |aⱼᵀc| + r‖aⱼ‖ < λ(1 − 1e−9)`.
pub fn screen_l1(p: &Problem, b: &Ball) -> Result<ScreenMask> {
    let lambda = p.regularizer().l1_threshold().ok_or(Error::WrongFamily {
        expected: "a regularizer with a separable ℓ1 term",
    })?;
    check_len("ball center", p.m(), b.dim())?;
    let a = p.design();
    let bound = lambda * (1.0 - SCREEN_RTOL);
    let flags = (0..p.n())
        .map(|j| a.col_dot(j, &b.center).abs() + b.radius * a.col_norm(j) < bound)
        .collect();
    Ok(ScreenMask {
        flags,
        ball_tag: b.tag,
    })
}

/// Problem restricted to the unscreened columns.
#[derive(Clone, Debug)]
pub struct ReducedProblem {
    pub problem: Problem,
    /// Indices into the original columns, increasing.
    pub kept: Vec<usize>,
    pub n_full: usize,
}

impl ReducedProblem {
    /// Full-length vector with zeros at screened coordinates.
    pub fn inflate(&self, x_reduced: &[f64]) -> Result<Vec<f64>> {
        check_len("reduced solution", self.kept.len(), x_reduced.len())?;
        let mut x = vec![0.0; self.n_full];
        for (&j, &v) in self.kept.iter().zip(x_reduced) {
            x[j] = v;
        }
        Ok(x)
    }

    pub fn restrict(&self, x_full: &[f64]) -> Result<Vec<f64>> {
        check_len("full vector", self.n_full, x_full.len())?;
        Ok(self.kept.iter().map(|&j| x_full[j]).collect())
    }
}

/// Removes the flagged columns. When every column is flagged the result has
/// `n = 0` and re-inflates to `0ₙ`.
pub fn reduce_problem(p: &Problem, mask: &ScreenMask) -> Result<ReducedProblem> {
    check_len("screen mask", p.n(), mask.n())?;
    let kept = mask.kept_indices();
    let problem = if kept.len() == p.n() {
        p.clone()
    } else {
        Problem::new(
            p.design().select_columns(&kept),
            std::sync::Arc::clone(p.loss()),
            p.regularizer().restrict(&kept),
        )?
    };
    Ok(ReducedProblem {
        problem,
        kept,
        n_full: p.n(),
    })
}
