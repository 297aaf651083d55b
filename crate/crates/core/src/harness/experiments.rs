//! Experiment orchestration: ball comparisons on a grid of cells and
//! dynamic-screening runs.
//!
//! A cell is one (instance, λ/λ_max, pair strategy) triple. Every ball built
//! in a cell is checked against a high-accuracy dual optimum, and a ball that
//! misses it aborts the whole experiment with a diagnostic.

use std::cmp::Ordering;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{Config, Family, PairStrategy};
use super::io::{load_instance, Dataset, InstanceSource};
use crate::balls::{applicable_kinds, build_ball, ryu_ball, Ball, BallKind};
use crate::convex::Problem;
use crate::error::{Error, Result};
use crate::linalg;
use crate::pairs::{dual_scaling, sequential_pair, PrimalDualPair};
use crate::problems::{
    make_elastic_net, make_lasso, make_logistic, ElasticNetSpec, LassoSpec, LogisticL1Spec,
};
use crate::screening::screen_l1;
use crate::solver::{prox_grad_solve, DynamicScreening, SolveOptions, SolveResult};

/// Coordinates of the reference solution below this are treated as zero.
pub const ZERO_TOL: f64 = 1e-9;
/// Tolerance for the ball equalities recorded in each cell.
pub const EQUALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub family: Family,
    /// For logistic instances the labels are already folded into `a`.
    pub data: Dataset,
    pub lambda2: f64,
}

impl Instance {
    pub fn new(name: impl Into<String>, family: Family, data: Dataset, lambda2: f64) -> Self {
        let data = match family {
            Family::Logistic => Dataset {
                a: data.fold_labels(),
                y: data.y,
            },
            _ => data,
        };
        Instance {
            name: name.into(),
            family,
            data,
            lambda2,
        }
    }

    pub fn problem(&self, lambda: f64) -> Result<Problem> {
        let a = self.data.a.clone();
        match self.family {
            Family::Lasso => make_lasso(LassoSpec::l1(a, self.data.y.clone(), lambda)),
            Family::Logistic => make_logistic(LogisticL1Spec { a, lambda }),
            Family::ElasticNet => make_elastic_net(ElasticNetSpec {
                a,
                y: self.data.y.clone(),
                lambda1: lambda,
                lambda2: self.lambda2,
            }),
        }
    }

    /// `‖Aᵀ∇f(0)‖∞`, independent of the regularization level.
    pub fn lambda_max(&self) -> Result<f64> {
        Ok(self.problem(1.0)?.lambda_max())
    }
}

pub fn load_instances(cfg: &Config) -> Result<Vec<Instance>> {
    cfg.sources()
        .into_iter()
        .map(|src| {
            let name = match &src {
                InstanceSource::Synthetic(s) => format!("synthetic-{}x{}-s{}", s.m, s.n, s.seed),
                InstanceSource::Csv { path } | InstanceSource::Libsvm { path, .. } => {
                    path.file_stem().map_or_else(
                        || path.display().to_string(),
                        |s| s.to_string_lossy().into_owned(),
                    )
                }
            };
            let mut data = load_instance(&src)?;
            if cfg.normalize && !matches!(src, InstanceSource::Synthetic(_)) {
                data.normalize_columns();
            }
            Ok(Instance::new(name, cfg.family, data, cfg.lambda2))
        })
        .collect()
}

/// Solution with duality gap ≤ 1e−12, refined on its support.
pub fn reference_solution(p: &Problem) -> Result<SolveResult> {
    prox_grad_solve(p, &SolveOptions::reference())
}

/// The pair a strategy produces at level `lambda` (with `lambda_max` of the instance).
pub fn build_pair(
    p: &Problem,
    lambda: f64,
    lambda_max: f64,
    strategy: PairStrategy,
) -> Result<PrimalDualPair> {
    match strategy {
        PairStrategy::Zero => dual_scaling(p, &vec![0.0; p.n()]),
        PairStrategy::DualScaling { iters } => {
            let opts = SolveOptions {
                max_iters: iters.max(1),
                gap_tolerance: 1e-300,
                polish: false,
                ..SolveOptions::default()
            };
            let x = match prox_grad_solve(p, &opts) {
                Ok(res) => res.x,
                Err(Error::SolverFailed { partial, .. }) => partial.x,
                Err(e) => return Err(e),
            };
            dual_scaling(p, &x)
        }
        PairStrategy::Sequential { lambda0_frac } => {
            let lambda0 = (lambda0_frac * lambda_max).max(lambda);
            sequential_pair(p, lambda0, 1e-12)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallRecord {
    pub instance: String,
    pub lambda_frac: f64,
    pub pair_strategy: String,
    pub ball: BallKind,
    pub radius: f64,
    pub center_norm: f64,
    pub dist_to_ustar: f64,
    pub contains_ustar: bool,
    pub screened: usize,
    /// Construction plus screening time; only recorded when timings are enabled.
    pub time_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqualityCheck {
    pub relation: String,
    pub center_diff: f64,
    pub radius_rel_diff: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub instance: String,
    pub family: Family,
    pub lambda_frac: f64,
    pub lambda: f64,
    pub pair_strategy: String,
    pub gap: f64,
    pub linked: bool,
    pub gamma: Option<f64>,
    pub balls: Vec<BallKind>,
    /// `inclusion[i][k]` is `balls[i] ⊆ balls[k]`.
    pub inclusion: Vec<Vec<bool>>,
    /// `r_RYU² ≤ ½·r_GAP²`
    pub half_radius_ok: bool,
    /// The RYU ball screens every coordinate the GAP ball screens.
    pub ryu_dominates_gap: bool,
    pub equalities: Vec<EqualityCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicEvent {
    pub iteration: usize,
    pub screened: usize,
    pub shadow_screened: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicRecord {
    pub instance: String,
    pub lambda_frac: f64,
    /// `None` for the unscreened baseline run.
    pub ball: Option<BallKind>,
    pub shadow: Option<BallKind>,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    /// `|P_screened − P_baseline|`
    pub objective_diff: f64,
    pub final_screened_fraction: f64,
    pub events: Vec<DynamicEvent>,
    /// At every event the driving ball screened at least as much as the
    /// shadow (for RYU driving) or at most as much (for GAP driving).
    pub dominance_ok: bool,
    pub time_ms: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub cells: Vec<CellRecord>,
    pub records: Vec<BallRecord>,
    pub dynamic: Vec<DynamicRecord>,
}

impl ExperimentReport {
    /// Orders records by their key so the report is independent of
    /// processing order.
    pub fn sort(&mut self) {
        let frac = |a: f64, b: f64| a.total_cmp(&b);
        self.records.sort_by(|a, b| {
            a.instance
                .cmp(&b.instance)
                .then(frac(a.lambda_frac, b.lambda_frac))
                .then(a.pair_strategy.cmp(&b.pair_strategy))
                .then(a.ball.cmp(&b.ball))
        });
        self.cells.sort_by(|a, b| {
            a.instance
                .cmp(&b.instance)
                .then(frac(a.lambda_frac, b.lambda_frac))
                .then(a.pair_strategy.cmp(&b.pair_strategy))
        });
        self.dynamic.sort_by(|a, b| {
            a.instance
                .cmp(&b.instance)
                .then(frac(a.lambda_frac, b.lambda_frac))
                .then(match (a.ball, b.ball) {
                    (None, None) => Ordering::Equal,
                    (None, Some(_)) => Ordering::Less,
                    (Some(_), None) => Ordering::Greater,
                    (Some(x), Some(y)) => x.cmp(&y),
                })
        });
    }

    pub fn merge(&mut self, other: ExperimentReport) {
        self.cells.extend(other.cells);
        self.records.extend(other.records);
        self.dynamic.extend(other.dynamic);
        self.sort();
    }
}

fn in_cell<T>(cell: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Cell { .. } => e,
        other => Error::Cell {
            cell: cell.to_string(),
            source: Box::new(other),
        },
    })
}

fn elapsed_ms(start: Option<Instant>) -> Option<f64> {
    start.map(|t| t.elapsed().as_secs_f64() * 1e3)
}

fn equality(relation: &str, a: &Ball, b: &Ball) -> EqualityCheck {
    let center_diff = a
        .center
        .iter()
        .zip(&b.center)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let radius_rel_diff = (a.radius - b.radius).abs() / (1.0 + a.radius.max(b.radius));
    EqualityCheck {
        relation: relation.to_string(),
        center_diff,
        radius_rel_diff,
        pass: center_diff <= EQUALITY_TOL && radius_rel_diff <= EQUALITY_TOL,
    }
}

fn equalities(
    p: &Problem,
    pair: &PrimalDualPair,
    balls: &[(BallKind, Ball)],
) -> Result<Vec<EqualityCheck>> {
    let find = |k: BallKind| balls.iter().find(|(kind, _)| *kind == k).map(|(_, b)| b);
    let mut out = Vec::new();
    if let Some(dyn_edpp) = find(BallKind::DynamicEdpp) {
        let t = crate::balls::t_star(p, &pair.x, &pair.u)?;
        let ryu_t = ryu_ball(p, &linalg::scale(t, &pair.x), &pair.u)?;
        out.push(equality("dynamic-edpp = ryu(t*x, u)", dyn_edpp, &ryu_t));
    }
    let ryu = find(BallKind::Ryu).expect("ryu is always built");
    if let Some(fne) = find(BallKind::Fne) {
        out.push(equality("fne = ryu", fne, ryu));
    }
    if let Some(sasvi) = find(BallKind::Sasvi) {
        let ryu0 = ryu_ball(p, &vec![0.0; p.n()], &pair.u)?;
        out.push(equality("sasvi = ryu(0, u)", sasvi, &ryu0));
    }
    if let Some(sfer) = find(BallKind::Sfer) {
        out.push(equality("sfer = ryu", sfer, ryu));
    }
    Ok(out)
}

/// Evaluates one cell. `ustar` is the reference dual optimum at this level.
#[allow(clippy::too_many_arguments)]
pub fn run_cell(
    inst: &Instance,
    p: &Problem,
    lambda_frac: f64,
    lambda_max: f64,
    strategy: PairStrategy,
    ustar: &[f64],
    timings: bool,
) -> Result<(CellRecord, Vec<BallRecord>)> {
    let lambda = lambda_frac * lambda_max;
    let pair = build_pair(p, lambda, lambda_max, strategy)?;
    let gap = p.duality_gap(&pair.x, &pair.u)?.to_f64();
    let kinds = applicable_kinds(p, &pair);
    let mut balls = Vec::with_capacity(kinds.len());
    let mut records = Vec::with_capacity(kinds.len());
    for kind in kinds {
        let start = timings.then(Instant::now);
        let ball = build_ball(kind, p, &pair)?;
        let mask = screen_l1(p, &ball)?;
        let time_ms = elapsed_ms(start);
        let dist = linalg::dist(&ball.center, ustar);
        let contains = ball.contains(ustar)?;
        if !contains {
            return Err(Error::SafenessViolated(format!(
                "ball {kind} misses u*: instance {}, lambda {lambda:.6e}, pair {strategy}, \
                 gap {gap:.6e}, radius {:.17e}, radicand {:.6e}, distance {dist:.17e}, \
                 x = {:?}, u = {:?}",
                inst.name,
                ball.radius,
                ball.radius * ball.radius,
                pair.x,
                pair.u
            )));
        }
        records.push(BallRecord {
            instance: inst.name.clone(),
            lambda_frac,
            pair_strategy: strategy.to_string(),
            ball: kind,
            radius: ball.radius,
            center_norm: linalg::norm(&ball.center),
            dist_to_ustar: dist,
            contains_ustar: contains,
            screened: mask.screened(),
            time_ms,
        });
        balls.push((kind, ball));
    }
    let inclusion = balls
        .iter()
        .map(|(_, a)| {
            balls
                .iter()
                .map(|(_, b)| a.is_subset_of(b))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let find = |k: BallKind| {
        balls
            .iter()
            .position(|(kind, _)| *kind == k)
            .expect("always built")
    };
    let (ryu, gapb) = (&balls[find(BallKind::Ryu)].1, &balls[find(BallKind::Gap)].1);
    let half_radius_ok = ryu.radius * ryu.radius <= 0.5 * gapb.radius * gapb.radius + 1e-12;
    let (ryu_mask, gap_mask) = (screen_l1(p, ryu)?, screen_l1(p, gapb)?);
    let ryu_dominates_gap = gap_mask
        .flags
        .iter()
        .zip(&ryu_mask.flags)
        .all(|(g, r)| !*g || *r);
    let equalities = equalities(p, &pair, &balls)?;
    let cell = CellRecord {
        instance: inst.name.clone(),
        family: inst.family,
        lambda_frac,
        lambda,
        pair_strategy: strategy.to_string(),
        gap,
        linked: pair.linked,
        gamma: pair.gamma,
        balls: balls.iter().map(|(k, _)| *k).collect(),
        inclusion,
        half_radius_ok,
        ryu_dominates_gap,
        equalities,
    };
    Ok((cell, records))
}

/// Builds every applicable ball on every cell of the grid.
pub fn run_ball_comparison(
    instances: &[Instance],
    lambda_fracs: &[f64],
    strategies: &[PairStrategy],
    timings: bool,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::default();
    for inst in instances {
        let lambda_max = inst.lambda_max()?;
        for &frac in lambda_fracs {
            let id = format!("instance {} at lambda_frac {frac}", inst.name);
            if !(frac > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{id}: lambda_frac must be positive"
                )));
            }
            let p = in_cell(&id, inst.problem(frac * lambda_max))?;
            let reference = in_cell(&id, reference_solution(&p))?;
            for &strategy in strategies {
                let id = format!("{id} with pair {strategy}");
                let (cell, records) = in_cell(
                    &id,
                    run_cell(inst, &p, frac, lambda_max, strategy, &reference.u, timings),
                )?;
                report.cells.push(cell);
                report.records.extend(records);
            }
        }
    }
    report.sort();
    Ok(report)
}

fn shadow_for(ball: BallKind) -> BallKind {
    if ball == BallKind::Ryu {
        BallKind::Gap
    } else {
        BallKind::Ryu
    }
}

/// Solves each cell without screening and with dynamic screening driven
/// by each ball in `cfg.screen_balls`, recording screened counts over time.
pub fn run_dynamic_screening(instances: &[Instance], cfg: &Config) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::default();
    for inst in instances {
        let lambda_max = inst.lambda_max()?;
        for &frac in &cfg.lambda_fracs {
            let id = format!("instance {} at lambda_frac {frac}", inst.name);
            let p = in_cell(&id, inst.problem(frac * lambda_max))?;
            let reference = in_cell(&id, reference_solution(&p))?;
            let base_opts = SolveOptions {
                max_iters: cfg.max_iters,
                gap_tolerance: cfg.gap_tolerance,
                ..SolveOptions::default()
            };
            let start = cfg.timings.then(Instant::now);
            let baseline = in_cell(&id, prox_grad_solve(&p, &base_opts))?;
            let base_time = elapsed_ms(start);
            let base_obj = baseline.primal.to_f64();
            report.dynamic.push(DynamicRecord {
                instance: inst.name.clone(),
                lambda_frac: frac,
                ball: None,
                shadow: None,
                iterations: baseline.iterations,
                converged: baseline.converged,
                objective: base_obj,
                objective_diff: 0.0,
                final_screened_fraction: 0.0,
                events: Vec::new(),
                dominance_ok: true,
                time_ms: base_time,
            });
            for &ball in &cfg.screen_balls {
                let shadow = shadow_for(ball);
                let opts = SolveOptions {
                    dynamic_screening: Some(DynamicScreening {
                        ball,
                        period: cfg.period,
                        shadow: Some(shadow),
                    }),
                    ..base_opts.clone()
                };
                let id = format!("{id} screening with {ball}");
                let start = cfg.timings.then(Instant::now);
                let res = in_cell(&id, prox_grad_solve(&p, &opts))?;
                let time_ms = elapsed_ms(start);
                if let Some(&j) = res
                    .screened
                    .iter()
                    .find(|&&j| reference.x[j].abs() > ZERO_TOL)
                {
                    return Err(Error::SafenessViolated(format!(
                        "{id}: coordinate {j} screened but reference value is {:.6e}",
                        reference.x[j]
                    )));
                }
                let dominance_ok = res.screening.iter().all(|e| match e.shadow_screened {
                    Some(s) if ball == BallKind::Ryu => e.total_screened >= s,
                    Some(s) if shadow == BallKind::Ryu && ball == BallKind::Gap => {
                        s >= e.total_screened
                    }
                    _ => true,
                });
                let objective = res.primal.to_f64();
                report.dynamic.push(DynamicRecord {
                    instance: inst.name.clone(),
                    lambda_frac: frac,
                    ball: Some(ball),
                    shadow: Some(shadow),
                    iterations: res.iterations,
                    converged: res.converged,
                    objective,
                    objective_diff: (objective - base_obj).abs(),
                    final_screened_fraction: res.screened.len() as f64 / p.n() as f64,
                    events: res
                        .screening
                        .iter()
                        .map(|e| DynamicEvent {
                            iteration: e.iteration,
                            screened: e.total_screened,
                            shadow_screened: e.shadow_screened,
                        })
                        .collect(),
                    dominance_ok,
                    time_ms,
                });
            }
        }
    }
    report.sort();
    Ok(report)
}
