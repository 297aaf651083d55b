//! Accelerated proximal gradient with monotone restart, gap-based stopping,
//! optional support polishing and optional dynamic screening.

mod polish;

use serde::{Deserialize, Serialize};

use crate::balls::{build_ball, BallKind};
use crate::convex::Problem;
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::linalg;
use crate::pairs::{scaled_dual, PrimalDualPair};
use crate::problems::L1Norm;
use crate::screening::{reduce_problem, screen_l1, ReducedProblem, ScreenMask};

use crate::convex::Norm;

/// Number of power iterations used by [`estimate_step`].
pub const POWER_ITERS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicScreening {
    pub ball: BallKind,
    /// Screen every `period` iterations.
    pub period: usize,
    /// Also count what this ball would screen on the same pair, for comparisons.
    pub shadow: Option<BallKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub gap_tolerance: f64,
    pub dynamic_screening: Option<DynamicScreening>,
    /// Newton refinement on the identified support, when the problem allows it.
    pub polish: bool,
    pub x0: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 100_000,
            gap_tolerance: 1e-8,
            dynamic_screening: None,
            polish: true,
            x0: None,
        }
    }
}

impl SolveOptions {
    /// Settings for reference solutions: gap ≤ 1e−12 within 10⁶ iterations.
    pub fn reference() -> Self {
        SolveOptions {
            max_iters: 1_000_000,
            gap_tolerance: 1e-12,
            ..SolveOptions::default()
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if !(self.gap_tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gap tolerance must be positive, got {}",
                self.gap_tolerance
            )));
        }
        if let Some(ds) = &self.dynamic_screening {
            if ds.period == 0 {
                return Err(Error::InvalidParameter(
                    "screening period must be >= 1".into(),
                ));
            }
            for kind in std::iter::once(ds.ball).chain(ds.shadow) {
                if !matches!(
                    kind,
                    BallKind::Ryu
                        | BallKind::Gap
                        | BallKind::XGap
                        | BallKind::DynamicEdpp
                        | BallKind::Sasvi
                        | BallKind::Safe
                ) {
                    return Err(Error::InvalidParameter(format!(
                        "{kind} needs a special pair and cannot drive dynamic screening"
                    )));
                }
            }
        }
        if let Some(x0) = &self.x0 {
            crate::error::check_len("initial point", n, x0.len())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeningEvent {
    pub iteration: usize,
    pub ball: BallKind,
    pub newly_screened: usize,
    pub total_screened: usize,
    pub shadow_screened: Option<usize>,
    /// Gap of the (reduced) pair the ball was built from.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub x: Vec<f64>,
    /// Dual-scaled from `x`.
    pub u: Vec<f64>,
    pub gap: ExtReal,
    pub primal: ExtReal,
    /// Best gap seen up to each iteration.
    pub gap_trace: Vec<f64>,
    pub screening: Vec<ScreeningEvent>,
    /// Coordinates removed by dynamic screening, in increasing order.
    pub screened: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    pub lipschitz: f64,
}

impl SolveResult {
    pub fn pair(&self, p: &Problem) -> Result<PrimalDualPair> {
        PrimalDualPair::new(p, self.x.clone(), self.u.clone())
    }
}

/// `v ↦ sign(v)·max(|v| − t, 0)`
pub fn soft_threshold(v: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold must be nonnegative, got {t}"
        )));
    }
    Ok(L1Norm.prox(v, t))
}

/// Lipschitz constant `σ_max(A)²/α` of `x ↦ Aᵀ∇f(Ax)`, from power iteration.
pub fn estimate_lipschitz(p: &Problem) -> f64 {
    p.design().spectral_norm_sq(POWER_ITERS) / p.alpha()
}

/// `1/L`. An all-zero design has `L = 0` and returns `+∞`.
pub fn estimate_step(p: &Problem) -> f64 {
    1.0 / estimate_lipschitz(p)
}

struct Smooth<'a> {
    p: &'a Problem,
}

impl Smooth<'_> {
    fn value_at(&self, ax: &[f64]) -> f64 {
        self.p.loss().value(ax)
    }

    fn grad_from_ax(&self, ax: &[f64]) -> Vec<f64> {
        self.p
            .design()
            .rmatvec(&self.p.loss().gradient(ax))
            .expect("gradient has length m")
    }
}

fn gap_of(p: &Problem, x: &[f64], ax: &[f64]) -> (Vec<f64>, f64) {
    let u = scaled_dual(p, ax);
    let gap = p
        .duality_gap(x, &u)
        .expect("dimensions are consistent")
        .to_f64();
    (u, gap)
}

fn primal_of(p: &Problem, x: &[f64], ax: &[f64]) -> f64 {
    (p.regularizer().value(x) + p.loss().value(ax)).to_f64()
}

/// Iterations between polish attempts once the gap is small.
const POLISH_EVERY: usize = 25;

pub fn prox_grad_solve(p: &Problem, opts: &SolveOptions) -> Result<SolveResult> {
    opts.validate(p.n())?;
    let n_full = p.n();
    let mut reduced = ReducedProblem {
        problem: p.clone(),
        kept: (0..n_full).collect(),
        n_full,
    };
    let mut lipschitz = estimate_lipschitz(p).max(1e-12);

    let mut x = opts.x0.clone().unwrap_or_else(|| vec![0.0; n_full]);
    if !p.regularizer().value(&x).is_finite() {
        x = p.regularizer().prox(&x, 1.0);
    }
    let mut yk = x.clone();
    let mut t = 1.0_f64;

    let mut best_gap = f64::INFINITY;
    let mut gap_trace = Vec::new();
    let mut events: Vec<ScreeningEvent> = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut last_polish_support: Option<Vec<usize>> = None;

    let mut ax = reduced.problem.design().matvec(&x)?;
    let mut obj = primal_of(&reduced.problem, &x, &ax);

    for k in 1..=opts.max_iters.max(1) {
        iterations = k;
        let sub = &reduced.problem;
        let (u, gap) = gap_of(sub, &x, &ax);
        best_gap = best_gap.min(gap);
        gap_trace.push(best_gap);

        let scale = 1.0 + obj.abs();
        if opts.polish && gap > opts.gap_tolerance && gap <= 1e-3 * scale && k % POLISH_EVERY == 1 {
            let support: Vec<usize> = (0..x.len()).filter(|&j| x[j] != 0.0).collect();
            if last_polish_support.as_ref() != Some(&support) {
                if let Some(xp) = polish::polish(sub, &x) {
                    let axp = sub.design().matvec(&xp)?;
                    let (_, gp) = gap_of(sub, &xp, &axp);
                    if gp < gap {
                        x = xp;
                        ax = axp;
                        obj = primal_of(sub, &x, &ax);
                        yk = x.clone();
                        t = 1.0;
                        best_gap = best_gap.min(gp);
                        *gap_trace.last_mut().unwrap() = best_gap;
                        last_polish_support = Some(support);
                        continue;
                    }
                }
                last_polish_support = Some(support);
            }
        }

        if gap <= opts.gap_tolerance {
            if reduced.kept.len() == n_full {
                converged = true;
                break;
            }
            let x_full = reduced.inflate(&x)?;
            let ax_full = p.design().matvec(&x_full)?;
            if gap_of(p, &x_full, &ax_full).1 <= opts.gap_tolerance {
                converged = true;
                break;
            }
        }

        if let Some(ds) = &opts.dynamic_screening {
            if k % ds.period == 0 && sub.n() > 0 {
                let pair = PrimalDualPair {
                    x: x.clone(),
                    u: u.clone(),
                    linked: false,
                    gamma: None,
                };
                let mask = build_ball(ds.ball, sub, &pair).and_then(|b| screen_l1(sub, &b))?;
                let shadow = match ds.shadow {
                    Some(kind) => Some(
                        build_ball(kind, sub, &pair)
                            .and_then(|b| screen_l1(sub, &b))?
                            .screened()
                            + (n_full - sub.n()),
                    ),
                    None => None,
                };
                let newly = mask.screened();
                if newly > 0 {
                    let next = reduce_problem(sub, &mask)?;
                    let kept: Vec<usize> = next.kept.iter().map(|&i| reduced.kept[i]).collect();
                    let (xr, yr) = (next.restrict(&x)?, next.restrict(&yk)?);
                    reduced = ReducedProblem {
                        problem: next.problem,
                        kept,
                        n_full,
                    };
                    x = xr;
                    yk = yr;
                    ax = reduced.problem.design().matvec(&x)?;
                    obj = primal_of(&reduced.problem, &x, &ax);
                }
                events.push(ScreeningEvent {
                    iteration: k,
                    ball: ds.ball,
                    newly_screened: newly,
                    total_screened: n_full - reduced.problem.n(),
                    shadow_screened: shadow,
                    gap,
                });
                if reduced.problem.n() == 0 {
                    continue;
                }
            }
        }

        let sub = &reduced.problem;
        if sub.n() == 0 {
            // nothing left to optimise; the gap check above decides convergence
            continue;
        }
        let smooth = Smooth { p: sub };
        let step_from = |base: &[f64], lip: &mut f64| -> Result<(Vec<f64>, Vec<f64>)> {
            let a_base = sub.design().matvec(base)?;
            let f_base = smooth.value_at(&a_base);
            let g_base = smooth.grad_from_ax(&a_base);
            loop {
                let step = 1.0 / *lip;
                let mut v = base.to_vec();
                linalg::axpy(-step, &g_base, &mut v);
                let cand = sub.regularizer().prox(&v, step);
                let a_cand = sub.design().matvec(&cand)?;
                let d = linalg::sub(&cand, base);
                let model = f_base + linalg::dot(&g_base, &d) + 0.5 * *lip * linalg::norm_sq(&d);
                let f_cand = smooth.value_at(&a_cand);
                if f_cand <= model + 4.0 * f64::EPSILON * (1.0 + f_cand.abs()) || *lip > 1e300 {
                    return Ok((cand, a_cand));
                }
                *lip *= 2.0;
            }
        };

        let (mut x_new, mut ax_new) = step_from(&yk, &mut lipschitz)?;
        let mut obj_new = primal_of(sub, &x_new, &ax_new);
        // near the optimum the objective moves below its own rounding error
        // while the gap still has room, so equal-at-rounding steps are kept
        let obj_floor = obj + 4.0 * f64::EPSILON * (1.0 + obj.abs());
        if obj_new > obj_floor {
            // monotone restart from the current iterate
            t = 1.0;
            let (xr, axr) = step_from(&x, &mut lipschitz)?;
            x_new = xr;
            ax_new = axr;
            obj_new = primal_of(sub, &x_new, &ax_new);
            if obj_new > obj_floor {
                x_new = x.clone();
                ax_new = ax.clone();
                obj_new = obj;
            }
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_new;
        yk = x_new
            .iter()
            .zip(&x)
            .map(|(a, b)| a + beta * (a - b))
            .collect();
        x = x_new;
        ax = ax_new;
        obj = obj_new;
        t = t_new;
    }

    let mut screened = Vec::with_capacity(n_full - reduced.kept.len());
    let mut kept = reduced.kept.iter().peekable();
    for j in 0..n_full {
        if kept.peek() == Some(&&j) {
            kept.next();
        } else {
            screened.push(j);
        }
    }
    let mut x_full = reduced.inflate(&x)?;
    let mut ax_full = p.design().matvec(&x_full)?;
    if converged && opts.polish {
        // a final refinement makes the returned pair accurate well beyond
        // what the gap certifies when the support is identified
        if let Some(xp) = polish::polish(p, &x_full) {
            let axp = p.design().matvec(&xp)?;
            let before = gap_of(p, &x_full, &ax_full).1;
            // both gaps may sit at rounding level, where comparing them is noise
            if gap_of(p, &xp, &axp).1 <= before.max(opts.gap_tolerance) {
                x_full = xp;
                ax_full = axp;
            }
        }
    }
    let u_full = scaled_dual(p, &ax_full);
    let gap = p.duality_gap(&x_full, &u_full)?;
    let primal = p.primal_objective(&x_full)?;
    let result = SolveResult {
        x: x_full,
        u: u_full,
        gap,
        primal,
        gap_trace,
        screening: events,
        screened,
        iterations,
        converged,
        lipschitz,
    };
    if converged {
        Ok(result)
    } else {
        Err(Error::SolverFailed {
            tolerance: opts.gap_tolerance,
            best_gap,
            iterations,
            partial: Box::new(result),
        })
    }
}

/// Screening mask of the given ball kind on the pair from [`SolveResult`].
pub fn screen_with(p: &Problem, kind: BallKind, pair: &PrimalDualPair) -> Result<ScreenMask> {
    screen_l1(p, &build_ball(kind, p, pair)?)
}
