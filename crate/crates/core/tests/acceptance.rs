//! Property-based acceptance run over random desk-scale instances.
//!
//! Every check compares library output against values recomputed here from
//! the problem definitions, and prints one line per criterion. The process
//! exits with a failure status if any criterion fails for a reason other than
//! double-precision resolution; those are still printed as failures.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use safeball::harness::{
    build_pair, generate, reference_solution, Dataset, Family, Instance, PairStrategy,
    SyntheticSpec,
};
use safeball::problems::{LeastSquares, Logistic};
use safeball::{
    applicable_kinds, build_ball, dual_scaling, is_subset, prox_grad_solve, rounding_slack,
    ryu_ball, screen_l1, sequential_pair, t_star, Ball, BallKind, Design, DynamicScreening, Error,
    PrimalDualPair, Problem, SmoothLoss, SolveOptions,
};

/// Independent evaluation of the three problem families from their definitions.
mod oracle {
    use safeball::harness::{Family, Instance};

    pub fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    pub fn norm_sq(a: &[f64]) -> f64 {
        dot(a, a)
    }

    pub fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    pub fn soft(v: f64, t: f64) -> f64 {
        v.signum() * (v.abs() - t).max(0.0)
    }

    #[derive(Clone)]
    pub enum Loss {
        /// `½‖z − y‖²`
        LeastSquares(Vec<f64>),
        /// `Σ log(1 + e^{−zᵢ})`
        Logistic,
    }

    #[derive(Clone)]
    pub enum Reg {
        L1(f64),
        ElasticNet(f64, f64),
    }

    #[derive(Clone)]
    pub struct Oracle {
        pub cols: Vec<Vec<f64>>,
        pub m: usize,
        pub loss: Loss,
        pub reg: Reg,
    }

    impl Oracle {
        pub fn new(inst: &Instance, lambda: f64) -> Oracle {
            let a = &inst.data.a;
            let cols = (0..a.cols()).map(|j| a.column(j)).collect();
            let loss = match inst.family {
                Family::Logistic => Loss::Logistic,
                _ => Loss::LeastSquares(inst.data.y.clone()),
            };
            let reg = match inst.family {
                Family::ElasticNet => Reg::ElasticNet(lambda, inst.lambda2),
                _ => Reg::L1(lambda),
            };
            Oracle {
                cols,
                m: a.rows(),
                loss,
                reg,
            }
        }

        pub fn y(&self) -> Option<&[f64]> {
            match &self.loss {
                Loss::LeastSquares(y) => Some(y),
                Loss::Logistic => None,
            }
        }

        pub fn alpha(&self) -> f64 {
            match self.loss {
                Loss::LeastSquares(_) => 1.0,
                Loss::Logistic => 4.0,
            }
        }

        pub fn ax(&self, x: &[f64]) -> Vec<f64> {
            let mut out = vec![0.0; self.m];
            for (col, &xj) in self.cols.iter().zip(x) {
                if xj != 0.0 {
                    for (o, c) in out.iter_mut().zip(col) {
                        *o += xj * c;
                    }
                }
            }
            out
        }

        pub fn atu(&self, u: &[f64]) -> Vec<f64> {
            self.cols.iter().map(|c| dot(c, u)).collect()
        }

        pub fn f(&self, z: &[f64]) -> f64 {
            match &self.loss {
                Loss::LeastSquares(y) => {
                    0.5 * z.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
                }
                Loss::Logistic => z
                    .iter()
                    .map(|&t| {
                        if t > 0.0 {
                            (-t).exp().ln_1p()
                        } else {
                            -t + t.exp().ln_1p()
                        }
                    })
                    .sum(),
            }
        }

        pub fn grad(&self, z: &[f64]) -> Vec<f64> {
            match &self.loss {
                Loss::LeastSquares(y) => z.iter().zip(y).map(|(a, b)| a - b).collect(),
                Loss::Logistic => z
                    .iter()
                    .map(|&t| {
                        if t > 0.0 {
                            let e = (-t).exp();
                            -e / (1.0 + e)
                        } else {
                            -1.0 / (1.0 + t.exp())
                        }
                    })
                    .collect(),
            }
        }

        /// `f*(v)`, `+∞` outside the domain.
        pub fn fstar(&self, v: &[f64]) -> f64 {
            match &self.loss {
                Loss::LeastSquares(y) => 0.5 * norm_sq(v) + dot(v, y),
                Loss::Logistic => {
                    let mut s = 0.0;
                    for &vi in v {
                        let t = -vi;
                        if !(-1e-12..=1.0 + 1e-12).contains(&t) {
                            return f64::INFINITY;
                        }
                        let t = t.clamp(0.0, 1.0);
                        let xl = |a: f64| if a == 0.0 { 0.0 } else { a * a.ln() };
                        s += xl(t) + xl(1.0 - t);
                    }
                    s
                }
            }
        }

        pub fn g(&self, x: &[f64]) -> f64 {
            let l1: f64 = x.iter().map(|v| v.abs()).sum();
            match self.reg {
                Reg::L1(l) => l * l1,
                Reg::ElasticNet(l1w, l2w) => l1w * l1 + 0.5 * l2w * norm_sq(x),
            }
        }

        pub fn gstar(&self, w: &[f64]) -> f64 {
            match self.reg {
                Reg::L1(l) => {
                    if w.iter().all(|v| v.abs() <= l * (1.0 + 1e-9)) {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                }
                Reg::ElasticNet(l1, l2) => {
                    w.iter()
                        .map(|v| (v.abs() - l1).max(0.0).powi(2))
                        .sum::<f64>()
                        / (2.0 * l2)
                }
            }
        }

        pub fn primal(&self, x: &[f64]) -> f64 {
            self.f(&self.ax(x)) + self.g(x)
        }

        pub fn dual(&self, u: &[f64]) -> f64 {
            let neg: Vec<f64> = u.iter().map(|v| -v).collect();
            -self.fstar(&neg) - self.gstar(&self.atu(u))
        }

        pub fn feasible(&self, u: &[f64]) -> bool {
            self.dual(u).is_finite()
        }

        pub fn gap(&self, x: &[f64], u: &[f64]) -> f64 {
            self.primal(x) - self.dual(u)
        }

        /// Center and unclamped squared radius of the RYU ball.
        pub fn ryu(&self, x: &[f64], u: &[f64]) -> (Vec<f64>, f64) {
            let gf = self.grad(&self.ax(x));
            let c = u.iter().zip(&gf).map(|(a, b)| 0.5 * (a - b)).collect();
            let q: f64 = u.iter().zip(&gf).map(|(a, b)| (a + b) * (a + b)).sum();
            (c, self.gap(x, u) / self.alpha() - 0.25 * q)
        }

        pub fn fenchel(&self, x: &[f64], u: &[f64]) -> f64 {
            let ax = self.ax(x);
            let neg: Vec<f64> = u.iter().map(|v| -v).collect();
            self.f(&ax) + self.fstar(&neg) + dot(u, &ax)
        }

        pub fn bregman(&self, x: &[f64], u: &[f64]) -> f64 {
            let ax = self.ax(x);
            let gf = self.grad(&ax);
            let neg: Vec<f64> = u.iter().map(|v| -v).collect();
            let shift: Vec<f64> = u.iter().zip(&gf).map(|(a, b)| a + b).collect();
            self.fstar(&neg) - self.fstar(&gf) + dot(&ax, &shift)
        }

        /// Lasso or elastic net on a square orthonormal design.
        pub fn orthonormal_solution(&self) -> (Vec<f64>, Vec<f64>) {
            let y = self.y().expect("least-squares family").to_vec();
            let b = self.atu(&y);
            let x: Vec<f64> = match self.reg {
                Reg::L1(l) => b.iter().map(|&v| soft(v, l)).collect(),
                Reg::ElasticNet(l1, l2) => b.iter().map(|&v| soft(v, l1) / (1.0 + l2)).collect(),
            };
            let ax = self.ax(&x);
            let u = y.iter().zip(&ax).map(|(a, b)| a - b).collect();
            (x, u)
        }
    }
}

use oracle::{dist, dot, norm_sq, Oracle};

const FAMILIES: [Family; 3] = [Family::Lasso, Family::Logistic, Family::ElasticNet];

struct Outcome {
    pass: bool,
    /// Every failure is explained by double-precision resolution alone.
    at_precision_floor: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome {
            pass,
            at_precision_floor: false,
            detail,
        }
    }
}

/// Keeps the first few failure descriptions for the report line.
#[derive(Default)]
struct Failures {
    count: usize,
    examples: Vec<String>,
}

impl Failures {
    fn record(&mut self, what: String) {
        self.count += 1;
        if self.examples.len() < 3 {
            self.examples.push(what);
        }
    }

    fn suffix(&self) -> String {
        if self.count == 0 {
            String::new()
        } else {
            format!(
                "; {} failures, e.g. {}",
                self.count,
                self.examples.join(" | ")
            )
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_instance(rng: &mut ChaCha8Rng, family: Family) -> Instance {
    let spec = SyntheticSpec {
        m: rng.random_range(5..=50),
        n: rng.random_range(5..=100),
        density: rng.random_range(0.05..0.3),
        noise: rng.random_range(0.01..0.5),
        seed: rng.random(),
        normalize: true,
    };
    let data = generate(&spec).expect("synthetic generation");
    let lambda2 = if family == Family::ElasticNet {
        rng.random_range(0.05..1.0)
    } else {
        0.0
    };
    Instance::new(
        format!("{family:?}-{}x{}-s{}", spec.m, spec.n, spec.seed),
        family,
        data,
        lambda2,
    )
}

/// Square design with orthonormal columns from Gram-Schmidt on a Gaussian matrix.
fn orthonormal_instance(rng: &mut ChaCha8Rng, family: Family, m: usize) -> Instance {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    while cols.len() < m {
        let mut v: Vec<f64> = (0..m).map(|_| gaussian(rng)).collect();
        for _ in 0..2 {
            for c in &cols {
                let d = dot(c, &v);
                v.iter_mut().zip(c).for_each(|(vi, ci)| *vi -= d * ci);
            }
        }
        let nv = norm_sq(&v).sqrt();
        if nv > 1e-6 {
            cols.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    let data: Vec<f64> = cols.concat();
    let y = (0..m).map(|_| 2.0 * gaussian(rng)).collect();
    let a = Design::dense(m, m, data).expect("finite entries");
    let lambda2 = if family == Family::ElasticNet {
        rng.random_range(0.05..1.0)
    } else {
        0.0
    };
    Instance::new(
        format!("{family:?}-orth{m}"),
        family,
        Dataset { a, y },
        lambda2,
    )
}

fn find<'a>(balls: &'a [Ball], kind: BallKind) -> Option<&'a Ball> {
    balls.iter().find(|b| b.tag == kind)
}

struct Cell {
    name: String,
    problem: Problem,
    oracle: Oracle,
    pair: PrimalDualPair,
    strategy: PairStrategy,
    gap: f64,
    balls: Vec<Ball>,
}

fn strategies(rng: &mut ChaCha8Rng, frac: f64) -> [PairStrategy; 3] {
    [
        PairStrategy::Zero,
        PairStrategy::DualScaling {
            iters: rng.random_range(1..=10),
        },
        PairStrategy::Sequential {
            lambda0_frac: (frac + rng.random_range(0.05..0.3)).min(1.0),
        },
    ]
}

fn c1_safeness(rng: &mut ChaCha8Rng, cells: &mut Vec<Cell>) -> Result<Outcome, Error> {
    let mut fails = Failures::default();
    let (mut balls_checked, mut orthonormal) = (0, 0);
    for i in 0..500 {
        let family = FAMILIES[i % 3];
        let orth = family != Family::Logistic && i % 10 < 2;
        let inst = if orth {
            orthonormal += 1;
            let m = rng.random_range(5..=40);
            orthonormal_instance(rng, family, m)
        } else {
            random_instance(rng, family)
        };
        let lmax = inst.lambda_max()?;
        let frac = rng.random_range(0.1..0.95);
        let lambda = frac * lmax;
        let p = inst.problem(lambda)?;
        let orc = Oracle::new(&inst, lambda);
        let ustar = if orth {
            orc.orthonormal_solution().1
        } else {
            let r = reference_solution(&p)?;
            let g = orc.gap(&r.x, &r.u);
            if g > 1e-12 {
                fails.record(format!("{}: reference gap {g:e}", inst.name));
            }
            r.u
        };
        for strategy in strategies(rng, frac) {
            let pair = build_pair(&p, lambda, lmax, strategy)?;
            let mut balls = Vec::new();
            for kind in applicable_kinds(&p, &pair) {
                let b = build_ball(kind, &p, &pair)?;
                balls_checked += 1;
                let d = dist(&b.center, &ustar);
                let inside = d <= b.radius + 1e-9 * (1.0 + b.radius);
                if !inside || !b.contains(&ustar)? {
                    fails.record(format!(
                        "{} {strategy} {}: |c-u*| = {d:e}, r = {:e}",
                        inst.name,
                        kind.as_str(),
                        b.radius
                    ));
                }
                balls.push(b);
            }
            // the library RYU ball against the closed formula
            let (c, r2) = orc.ryu(&pair.x, &pair.u);
            let ryu = find(&balls, BallKind::Ryu).expect("always applicable");
            let scale = 1.0 + orc.gap(&pair.x, &pair.u) / orc.alpha();
            let cdiff = ryu
                .center
                .iter()
                .zip(&c)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if cdiff > 1e-10 * (1.0 + c.iter().fold(0.0, |a: f64, b| a.max(b.abs())))
                || (ryu.radius.powi(2) - r2.max(0.0)).abs() > 1e-10 * scale
            {
                fails.record(format!(
                    "{} {strategy}: RYU differs from the formula",
                    inst.name
                ));
            }
            cells.push(Cell {
                name: inst.name.clone(),
                problem: p.clone(),
                oracle: orc.clone(),
                gap: orc.gap(&pair.x, &pair.u),
                pair,
                strategy,
                balls,
            });
        }
    }
    Ok(Outcome::new(
        fails.count == 0,
        format!(
            "{}/{balls_checked} balls contain u* over 500 instances ({orthonormal} orthonormal with closed-form u*), {} cells{}",
            balls_checked - fails.count.min(balls_checked),
            cells.len(),
            fails.suffix()
        ),
    ))
}

fn c2_inclusion(cells: &[Cell]) -> Result<Outcome, Error> {
    let mut fails = Failures::default();
    let (mut checks, mut strict_checks, mut tangent) = (0, 0, 0);
    let mut check = |name: &str,
                     what: &str,
                     a: &Ball,
                     b: &Ball,
                     gap: f64,
                     fails: &mut Failures|
     -> Result<(), Error> {
        checks += 1;
        if !is_subset(a, b)? {
            fails.record(format!("{name} {what}: not a subset"));
        }
        if gap > 1e-6 {
            strict_checks += 1;
            if b.radius - a.radius <= 1e-8 {
                fails.record(format!(
                    "{name} {what}: radius gap {:e}",
                    b.radius - a.radius
                ));
            }
            if b.radius - (dist(&a.center, &b.center) + a.radius) <= 1e-8 {
                tangent += 1;
            }
        }
        Ok(())
    };
    for cell in cells {
        let ryu = find(&cell.balls, BallKind::Ryu).unwrap();
        let label = format!("{} {}", cell.name, cell.strategy);
        check(
            &label,
            "ryu in gap",
            ryu,
            find(&cell.balls, BallKind::Gap).unwrap(),
            cell.gap,
            &mut fails,
        )?;
        check(
            &label,
            "ryu in x-gap",
            ryu,
            find(&cell.balls, BallKind::XGap).unwrap(),
            cell.gap,
            &mut fails,
        )?;
        if let Some(safe) = find(&cell.balls, BallKind::Safe) {
            let zero = vec![0.0; cell.problem.n()];
            let ryu0 = ryu_ball(&cell.problem, &zero, &cell.pair.u)?;
            let gap0 = cell.oracle.gap(&zero, &cell.pair.u);
            check(&label, "ryu(0,u) in safe", &ryu0, safe, gap0, &mut fails)?;
        }
        if let (Some(sfer), Some(slores)) = (
            find(&cell.balls, BallKind::Sfer),
            find(&cell.balls, BallKind::Slores),
        ) {
            check(&label, "sfer in slores", sfer, slores, cell.gap, &mut fails)?;
        }
    }
    Ok(Outcome::new(
        fails.count == 0,
        format!(
            "{checks} inclusions hold, {strict_checks} strict by radius (> 1e-8 when gap > 1e-6); \
             {tangent} of those are internally tangent{}",
            fails.suffix()
        ),
    ))
}

fn same_ball(a: &Ball, b: &Ball) -> (f64, f64) {
    let cdiff = a
        .center
        .iter()
        .zip(&b.center)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let rdiff = (a.radius - b.radius).abs() / (1.0 + a.radius.max(b.radius));
    (cdiff, rdiff)
}

fn c3_equality(cells: &[Cell]) -> Result<Outcome, Error> {
    let mut fails = Failures::default();
    let mut off_floor = 0usize;
    let mut counts = [0usize; 4];
    let (mut worst_c, mut worst_r) = (0.0f64, 0.0f64);
    for cell in cells {
        let p = &cell.problem;
        let (x, u) = (&cell.pair.x, &cell.pair.u);
        let ryu = find(&cell.balls, BallKind::Ryu).unwrap();
        let mut pairs: Vec<(usize, &str, &Ball, Ball)> = Vec::new();
        let mut floor = rounding_slack(p, x, u)?.max(rounding_slack(p, &vec![0.0; p.n()], u)?);
        if let Some(d) = find(&cell.balls, BallKind::DynamicEdpp) {
            let t = t_star(p, x, u)?;
            let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
            floor = floor.max(rounding_slack(p, &tx, u)?);
            pairs.push((0, "dynamic-edpp = ryu(t*x,u)", d, ryu_ball(p, &tx, u)?));
        }
        if let Some(f) = find(&cell.balls, BallKind::Fne) {
            pairs.push((1, "fne = ryu", f, ryu.clone()));
        }
        if let Some(s) = find(&cell.balls, BallKind::Sasvi) {
            pairs.push((2, "sasvi = ryu(0,u)", s, ryu_ball(p, &vec![0.0; p.n()], u)?));
        }
        if let Some(s) = find(&cell.balls, BallKind::Sfer) {
            pairs.push((3, "sfer = ryu", s, ryu.clone()));
        }
        for (k, what, a, b) in pairs {
            counts[k] += 1;
            let (c, r) = same_ball(a, &b);
            worst_c = worst_c.max(c);
            worst_r = worst_r.max(r);
            if c > 1e-10 || r > 1e-10 {
                // a radius whose square is within a few rounding bounds of zero
                // cannot be resolved to 1e-10 after the square root
                if c > 1e-10 || a.radius.max(b.radius).powi(2) > 4.0 * floor {
                    off_floor += 1;
                }
                fails.record(format!(
                    "{} {} {what}: center {c:e}, radius {r:e}, gap {:e}, r {:e}",
                    cell.name, cell.strategy, cell.gap, a.radius
                ));
            }
        }
    }
    let covered = counts.iter().all(|&c| c > 0);
    let floor_note = if fails.count > 0 {
        format!(
            "; {} of {} failures are off the rounding floor",
            off_floor, fails.count
        )
    } else {
        String::new()
    };
    Ok(Outcome {
        pass: fails.count == 0 && covered,
        at_precision_floor: fails.count > 0 && off_floor == 0 && covered,
        detail: format!(
            "dynamic-edpp {}, fne {}, sasvi {}, sfer {} equalities; worst center {worst_c:.1e}, radius {worst_r:.1e}{floor_note}{}",
            counts[0],
            counts[1],
            counts[2],
            counts[3],
            fails.suffix()
        ),
    })
}

fn c4_half_radius(cells: &[Cell]) -> Outcome {
    let mut fails = Failures::default();
    let mut worst = f64::NEG_INFINITY;
    for cell in cells {
        let r = find(&cell.balls, BallKind::Ryu).unwrap().radius;
        let g = find(&cell.balls, BallKind::Gap).unwrap().radius;
        if r.is_finite() && g.is_finite() {
            let excess = r * r - 0.5 * g * g;
            worst = worst.max(excess);
            if excess > 1e-12 {
                fails.record(format!(
                    "{} {}: excess {excess:e}",
                    cell.name, cell.strategy
                ));
            }
        }
    }
    Outcome::new(
        fails.count == 0,
        format!(
            "{} cells, max r_ryu^2 - r_gap^2/2 = {worst:.2e}{}",
            cells.len(),
            fails.suffix()
        ),
    )
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn c5_divergences(rng: &mut ChaCha8Rng) -> Result<Outcome, Error> {
    let mut fails = Failures::default();
    let mut worst_seq = 0.0f64;
    for i in 0..200 {
        let family = if i % 2 == 0 {
            Family::Lasso
        } else {
            Family::Logistic
        };
        let inst = random_instance(rng, family);
        let lmax = inst.lambda_max()?;
        let frac = rng.random_range(0.1..0.8);
        let lambda = frac * lmax;
        let p = inst.problem(lambda)?;
        let orc = Oracle::new(&inst, lambda);
        let pair = sequential_pair(&p, (frac + rng.random_range(0.05..0.2)) * lmax, 1e-12)?;
        let (x, u) = (&pair.x, &pair.u);
        let gap = p.duality_gap(x, u)?.to_f64();
        let fen = p.fenchel_divergence(x, u)?.to_f64();
        let breg = p.bregman_divergence(x, u)?.to_f64();
        let d = (gap - fen).abs().max((gap - breg).abs()) / (1.0 + gap);
        worst_seq = worst_seq.max(d);
        if d > 1e-10 {
            fails.record(format!(
                "{}: gap {gap:e}, fen {fen:e}, breg {breg:e}",
                inst.name
            ));
        }
        let og = orc.gap(x, u);
        if rel(gap, og) > 1e-10
            || rel(fen, orc.fenchel(x, u)) > 1e-10
            || rel(breg, orc.bregman(x, u)) > 1e-10
        {
            fails.record(format!(
                "{}: library divergences differ from the definitions",
                inst.name
            ));
        }
    }
    let mut worst_any = 0.0f64;
    for i in 0..200 {
        let family = if i % 2 == 0 {
            Family::Lasso
        } else {
            Family::Logistic
        };
        let inst = random_instance(rng, family);
        let lambda = rng.random_range(0.1..1.2) * inst.lambda_max()?;
        let p = inst.problem(lambda)?;
        let orc = Oracle::new(&inst, lambda);
        let n = p.n();
        let x: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.3) {
                    gaussian(rng)
                } else {
                    0.0
                }
            })
            .collect();
        let v: Vec<f64> = match family {
            Family::Logistic => (0..p.m()).map(|_| rng.random_range(0.0..1.0)).collect(),
            _ => (0..p.m()).map(|_| gaussian(rng)).collect(),
        };
        let peak = orc.atu(&v).iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let s = rng.random_range(0.2..1.0) * if peak > lambda { lambda / peak } else { 1.0 };
        let u: Vec<f64> = v.iter().map(|t| s * t).collect();
        if !p.dual_feasible(&u)? || !orc.feasible(&u) {
            fails.record(format!("{}: sampled dual point infeasible", inst.name));
            continue;
        }
        let fen = p.fenchel_divergence(&x, &u)?.to_f64();
        let breg = p.bregman_divergence(&x, &u)?.to_f64();
        let d = rel(fen, breg);
        worst_any = worst_any.max(d);
        if d > 1e-10 || rel(fen, orc.fenchel(&x, &u)) > 1e-10 {
            fails.record(format!("{}: fen {fen:e} vs breg {breg:e}", inst.name));
        }
    }
    Ok(Outcome::new(
        fails.count == 0,
        format!(
            "200 sequential pairs: max |gap - div|/(1+gap) = {worst_seq:.1e}; 200 arbitrary pairs: max rel |fen - breg| = {worst_any:.1e}{}",
            fails.suffix()
        ),
    ))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Branch {
    AxZero,
    Interior,
    Clamped,
}

fn c6_t_star(rng: &mut ChaCha8Rng) -> Result<Outcome, Error> {
    const GRID: usize = 10_000;
    let mut fails = Failures::default();
    let mut branches = [0usize; 3];
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let inst = random_instance(rng, Family::Lasso);
        let lambda = rng.random_range(0.1..0.9) * inst.lambda_max()?;
        let p = inst.problem(lambda)?;
        let orc = Oracle::new(&inst, lambda);
        let y = orc.y().unwrap().to_vec();
        let iters = rng.random_range(1..=30);
        let opts = SolveOptions {
            max_iters: iters,
            gap_tolerance: 1e-300,
            polish: false,
            ..SolveOptions::default()
        };
        let xk = match prox_grad_solve(&p, &opts) {
            Ok(r) => r.x,
            Err(Error::SolverFailed { partial, .. }) => partial.x,
            Err(e) => return Err(e),
        };
        let uk = dual_scaling(&p, &xk)?.u;
        let zero = vec![0.0; p.n()];
        let u0 = dual_scaling(&p, &zero)?.u;
        let flipped: Vec<f64> = xk.iter().map(|v| -v).collect();
        for (x, u) in [(&zero, &u0), (&xk, &uk), (&flipped, &uk)] {
            let ax = orc.ax(x);
            let ax_sq = norm_sq(&ax);
            let l1: f64 = x.iter().map(|v| v.abs()).sum();
            let dual = orc.dual(u);
            let (branch, t_oracle) = if ax_sq == 0.0 {
                (Branch::AxZero, 0.0)
            } else {
                let yu: Vec<f64> = y.iter().zip(u.iter()).map(|(a, b)| a + b).collect();
                let tt = (dot(&ax, &yu) - 2.0 * lambda * l1) / ax_sq;
                if tt >= 0.0 {
                    (Branch::Interior, tt)
                } else {
                    (Branch::Clamped, 0.0)
                }
            };
            branches[branch as usize] += 1;
            // r²(t) = GAP(t·x, u) − ¼‖u − y + t·Ax‖², evaluated on a uniform grid
            let r2 = |t: f64| -> f64 {
                let mut res = 0.0;
                let mut shifted = 0.0;
                for i in 0..ax.len() {
                    res += (y[i] - t * ax[i]).powi(2);
                    shifted += (u[i] - y[i] + t * ax[i]).powi(2);
                }
                0.5 * res + t * lambda * l1 - dual - 0.25 * shifted
            };
            let t_hi = 2.0f64.max(2.0 * t_oracle);
            let grid_min = (0..GRID)
                .map(|k| r2(t_hi * k as f64 / (GRID - 1) as f64))
                .fold(f64::INFINITY, f64::min)
                .max(0.0)
                .sqrt();
            let t_lib = t_star(&p, x, u)?;
            let tx: Vec<f64> = x.iter().map(|v| t_lib * v).collect();
            let r_lib = ryu_ball(&p, &tx, u)?.radius;
            worst = worst.max(r_lib - grid_min);
            if r_lib > grid_min + 1e-8 || (t_lib - t_oracle).abs() > 1e-10 * (1.0 + t_oracle) {
                fails.record(format!(
                    "{}: t* = {t_lib:e} (oracle {t_oracle:e}), r = {r_lib:e}, grid {grid_min:e}",
                    inst.name
                ));
            }
        }
    }
    Ok(Outcome::new(
        fails.count == 0 && branches.iter().all(|&b| b > 0),
        format!(
            "300 pairs on 100 lasso instances (Ax=0: {}, interior: {}, clamped: {}), max r(t*) - grid min = {worst:.1e}{}",
            branches[0],
            branches[1],
            branches[2],
            fails.suffix()
        ),
    ))
}

fn c7_fenchel_young(rng: &mut ChaCha8Rng) -> Outcome {
    let mut fails = Failures::default();
    let mut worst = [f64::INFINITY; 2];
    for (k, name) in ["least squares", "logistic"].iter().enumerate() {
        for _ in 0..10_000 {
            let m = rng.random_range(1..=50);
            let sigma = [0.1, 1.0, 10.0][rng.random_range(0..3)];
            let zs: Vec<f64> = (0..m).map(|_| sigma * gaussian(rng)).collect();
            let (loss, orc): (Box<dyn SmoothLoss>, Oracle) = if k == 0 {
                let y: Vec<f64> = (0..m).map(|_| gaussian(rng)).collect();
                let orc = Oracle {
                    cols: vec![],
                    m,
                    loss: oracle::Loss::LeastSquares(y.clone()),
                    reg: oracle::Reg::L1(1.0),
                };
                (Box::new(LeastSquares::new(y)), orc)
            } else {
                let orc = Oracle {
                    cols: vec![],
                    m,
                    loss: oracle::Loss::Logistic,
                    reg: oracle::Reg::L1(1.0),
                };
                (Box::new(Logistic::new(m)), orc)
            };
            // z must lie in dom f*, which is the box [-1, 0]^m for the logistic loss
            let z: Vec<f64> = if k == 0 {
                (0..m).map(|_| sigma * gaussian(rng)).collect()
            } else {
                (0..m)
                    .map(|_| match rng.random_range(0..10) {
                        0 => -1.0,
                        1 => 0.0,
                        _ => -rng.random_range(0.0..1.0),
                    })
                    .collect()
            };
            let alpha = loss.alpha();
            let residual = |fstar: f64, f: f64, grad: &[f64]| {
                let gap: f64 = z.iter().zip(grad).map(|(a, b)| (a - b) * (a - b)).sum();
                fstar + f - dot(&zs, &z) - 0.5 * alpha * gap
            };
            let lib = residual(
                loss.conjugate(&z).to_f64(),
                loss.value(&zs),
                &loss.gradient(&zs),
            );
            let orc_res = residual(orc.fstar(&z), orc.f(&zs), &orc.grad(&zs));
            worst[k] = worst[k].min(lib);
            if lib < -1e-10 || orc_res < -1e-10 || (lib - orc_res).abs() > 1e-10 * (1.0 + lib.abs())
            {
                fails.record(format!(
                    "{name} m={m}: residual {lib:e} (oracle {orc_res:e})"
                ));
            }
        }
    }
    Outcome::new(
        fails.count == 0,
        format!(
            "10^4 samples per loss, min residual {:.1e} (least squares), {:.1e} (logistic){}",
            worst[0],
            worst[1],
            fails.suffix()
        ),
    )
}

fn c8_gap_bounds(rng: &mut ChaCha8Rng) -> Result<Outcome, Error> {
    let mut fails = Failures::default();
    let mut sampled = 0usize;
    let mut worst = [f64::NEG_INFINITY; 4];
    let tol = |v: f64| 1e-10 * (1.0 + v.abs());
    for i in 0..100 {
        let family = FAMILIES[i % 3];
        let inst = random_instance(rng, family);
        let lambda = rng.random_range(0.1..0.9) * inst.lambda_max()?;
        let p = inst.problem(lambda)?;
        let orc = Oracle::new(&inst, lambda);
        let alpha = orc.alpha();
        let reference = reference_solution(&p)?;
        let (xr, ur) = (&reference.x, &reference.u);
        let grad_ref = orc.grad(&orc.ax(xr));
        let (p_ref, d_ref) = (orc.primal(xr), orc.dual(ur));
        let mut made = 0;
        while made < 100 {
            let spread = 10f64.powf(rng.random_range(-6.0..0.0));
            let keep_support = rng.random_bool(0.5);
            let x: Vec<f64> = xr
                .iter()
                .map(|&v| {
                    if keep_support && v == 0.0 {
                        0.0
                    } else {
                        v + spread * gaussian(rng)
                    }
                })
                .collect();
            let u_ds = dual_scaling(&p, &x)?.u;
            let theta = if rng.random_bool(0.2) {
                1.0
            } else {
                10f64.powf(rng.random_range(-6.0..0.0))
            };
            let u: Vec<f64> = ur
                .iter()
                .zip(&u_ds)
                .map(|(a, b)| (1.0 - theta) * a + theta * b)
                .collect();
            if !orc.feasible(&u) {
                continue;
            }
            made += 1;
            sampled += 1;
            let gf = orc.grad(&orc.ax(&x));
            let gap = orc.primal(&x) - orc.dual(&u);
            let bound = 2.0 * gap / alpha;
            let sq =
                |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(s, t)| (s + t) * (s + t)).sum::<f64>();
            let neg_ur: Vec<f64> = ur.iter().map(|v| -v).collect();
            // ‖u + ∇f(Ax)‖² ≤ 2GAP(x, u)/α
            let grad_bound = sq(&u, &gf) - bound;
            // ‖u* − u‖² + ‖u* + ∇f(Ax)‖² ≤ 2GAP(x, u)/α, the reference dual standing in for u*
            let two_sided = sq(&u, &neg_ur) + sq(ur, &gf) - bound;
            // the two applications: at (x_ref, u) and at (x, u_ref)
            let at_ref_primal = sq(&u, &grad_ref) - 2.0 * (p_ref - orc.dual(&u)) / alpha;
            let at_ref_dual = sq(ur, &gf) - 2.0 * (orc.primal(&x) - d_ref) / alpha;
            for (k, (v, scale)) in [
                (grad_bound, bound),
                (two_sided, bound),
                (at_ref_primal, bound),
                (at_ref_dual, bound),
            ]
            .into_iter()
            .enumerate()
            {
                worst[k] = worst[k].max(v / (1.0 + scale));
                if v > tol(scale) {
                    let which = [
                        "gradient bound",
                        "two-sided bound",
                        "at reference primal",
                        "at reference dual",
                    ][k];
                    fails.record(format!(
                        "{} {which}: excess {v:e} over bound {scale:e}",
                        inst.name
                    ));
                }
            }
        }
    }
    Ok(Outcome::new(
        fails.count == 0 && sampled >= 10_000,
        format!(
            "{sampled} feasible pairs on 100 instances; max relative excess: gradient bound {:.1e}, two-sided {:.1e}, \
             reference primal {:.1e}, reference dual {:.1e}{}",
            worst[0],
            worst[1],
            worst[2],
            worst[3],
            fails.suffix()
        ),
    ))
}

fn c9_screening(rng: &mut ChaCha8Rng) -> Result<Outcome, Error> {
    let mut fails = Failures::default();
    let (mut cells, mut screened, mut ryu_total, mut gap_total) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..200 {
        let family = FAMILIES[i % 3];
        let inst = random_instance(rng, family);
        let lmax = inst.lambda_max()?;
        for frac in [0.3, 0.5, 0.8] {
            let lambda = frac * lmax;
            let p = inst.problem(lambda)?;
            let reference = reference_solution(&p)?;
            let strategies = [
                PairStrategy::Zero,
                PairStrategy::DualScaling { iters: 10 },
                PairStrategy::Sequential {
                    lambda0_frac: frac + 0.1,
                },
            ];
            for strategy in strategies {
                cells += 1;
                let pair = build_pair(&p, lambda, lmax, strategy)?;
                let mut sets = Vec::new();
                for kind in applicable_kinds(&p, &pair) {
                    let ball = build_ball(kind, &p, &pair)?;
                    let mask = screen_l1(&p, &ball)?;
                    let idx = mask.screened_indices();
                    screened += idx.len();
                    for &j in &idx {
                        if reference.x[j].abs() > 1e-9 {
                            fails.record(format!(
                                "{} {frac} {strategy} {}: screened j={j} with x*_j = {:e}",
                                inst.name,
                                kind.as_str(),
                                reference.x[j]
                            ));
                        }
                    }
                    sets.push((kind, idx));
                }
                let get = |k: BallKind| {
                    sets.iter()
                        .find(|(kind, _)| *kind == k)
                        .map(|(_, s)| s.clone())
                        .unwrap()
                };
                let (ryu, gap) = (get(BallKind::Ryu), get(BallKind::Gap));
                ryu_total += ryu.len();
                gap_total += gap.len();
                if ryu.len() < gap.len() || gap.iter().any(|j| !ryu.contains(j)) {
                    fails.record(format!(
                        "{} {frac} {strategy}: RYU screens {} vs GAP {}",
                        inst.name,
                        ryu.len(),
                        gap.len()
                    ));
                }
            }
        }
    }
    Ok(Outcome::new(
        fails.count == 0,
        format!(
            "{cells} cells on 200 instances, {screened} screenings all zero in the reference; \
             RYU screens {ryu_total} vs GAP {gap_total}{}",
            fails.suffix()
        ),
    ))
}

fn c10_solver(rng: &mut ChaCha8Rng) -> Result<Outcome, Error> {
    let mut fails = Failures::default();
    let mut worst_x = 0.0f64;
    for _ in 0..25 {
        let m = rng.random_range(5..=40);
        let inst = orthonormal_instance(rng, Family::Lasso, m);
        let lambda = rng.random_range(0.05..0.95) * inst.lambda_max()?;
        let p = inst.problem(lambda)?;
        let (x_star, _) = Oracle::new(&inst, lambda).orthonormal_solution();
        let res = prox_grad_solve(
            &p,
            &SolveOptions {
                gap_tolerance: 1e-12,
                ..SolveOptions::default()
            },
        )?;
        let err = res
            .x
            .iter()
            .zip(&x_star)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst_x = worst_x.max(err);
        if err > 1e-8 {
            fails.record(format!("{}: max coordinate error {err:e}", inst.name));
        }
    }
    let tol = 1e-8;
    let mut worst_obj = 0.0f64;
    let mut runs = 0;
    for i in 0..30 {
        let family = FAMILIES[i % 3];
        let inst = random_instance(rng, family);
        let lambda = [0.3, 0.5, 0.8][i % 3] * inst.lambda_max()?;
        let p = inst.problem(lambda)?;
        let orc = Oracle::new(&inst, lambda);
        let base = SolveOptions {
            gap_tolerance: tol,
            ..SolveOptions::default()
        };
        let off = prox_grad_solve(&p, &base)?;
        let mut kinds = vec![BallKind::Ryu, BallKind::Gap, BallKind::XGap];
        if family == Family::Lasso {
            kinds.extend([BallKind::DynamicEdpp, BallKind::Sasvi, BallKind::Safe]);
        }
        for ball in kinds {
            let opts = SolveOptions {
                dynamic_screening: Some(DynamicScreening {
                    ball,
                    period: 10,
                    shadow: None,
                }),
                ..base.clone()
            };
            let on = prox_grad_solve(&p, &opts)?;
            runs += 1;
            let d = (on.primal.to_f64() - off.primal.to_f64()).abs();
            let d_orc = (orc.primal(&on.x) - orc.primal(&off.x)).abs();
            worst_obj = worst_obj.max(d);
            if d > 2.0 * tol || d_orc > 2.0 * tol {
                fails.record(format!(
                    "{} {}: objectives differ by {d:e}",
                    inst.name,
                    ball.as_str()
                ));
            }
        }
    }
    Ok(Outcome::new(
        fails.count == 0,
        format!(
            "orthonormal lasso max error {worst_x:.1e} on 25 instances; {runs} screened runs, max objective difference {worst_obj:.1e}{}",
            fails.suffix()
        ),
    ))
}

fn main() -> ExitCode {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let started = Instant::now();
    let mut cells = Vec::new();
    // failures fully explained by floating-point resolution are reported but
    // do not fail the run; anything else does
    let mut hard_failure = false;
    let mut report = |id: usize, name: &str, t0: Instant, outcome: Result<Outcome, Error>| {
        let outcome = outcome.unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        hard_failure |= !outcome.pass && !outcome.at_precision_floor;
        println!(
            "criterion {id:>2} {name:<22} {}  {} [{:.1}s]",
            match (outcome.pass, outcome.at_precision_floor) {
                (true, _) => "PASS",
                (false, true) => "FAIL (precision floor)",
                (false, false) => "FAIL",
            },
            outcome.detail,
            t0.elapsed().as_secs_f64()
        );
    };

    let t = Instant::now();
    let c1 = c1_safeness(&mut rng, &mut cells);
    report(1, "safeness", t, c1);
    let t = Instant::now();
    report(2, "inclusion", t, c2_inclusion(&cells));
    let t = Instant::now();
    report(3, "equality", t, c3_equality(&cells));
    let t = Instant::now();
    report(4, "half squared radius", t, Ok(c4_half_radius(&cells)));
    let t = Instant::now();
    report(5, "divergence identity", t, c5_divergences(&mut rng));
    let t = Instant::now();
    report(6, "t* variational", t, c6_t_star(&mut rng));
    let t = Instant::now();
    report(
        7,
        "refined fenchel-young",
        t,
        Ok(c7_fenchel_young(&mut rng)),
    );
    let t = Instant::now();
    report(8, "gap bounds", t, c8_gap_bounds(&mut rng));
    let t = Instant::now();
    report(9, "screening soundness", t, c9_screening(&mut rng));
    let t = Instant::now();
    report(10, "solver sanity", t, c10_solver(&mut rng));

    println!(
        "acceptance finished in {:.1}s",
        started.elapsed().as_secs_f64()
    );
    if !hard_failure {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
