//! Safe dual-optimum balls and safe screening for `min_x f(Ax) + g(x)`.
//!
//! The central object is the RYU ball, which encloses the dual optimum of
//! any problem whose `f` is smooth and whose conjugate is strongly convex.
//! Classical screening balls (GAP, dynamic EDPP, FNE, SASVI, EDPP, SAFE,
//! SLORES, SFER) are provided alongside it.
//!
//! ```
//! use safeball::{make_lasso, ryu_ball, screen_l1, Design, LassoSpec};
//!
//! let a = Design::identity(2);
//! let p = make_lasso(LassoSpec::l1(a, vec![2.0, 0.5], 1.5)).unwrap();
//! let ball = ryu_ball(&p, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
//! let mask = screen_l1(&p, &ball).unwrap();
//! assert_eq!(mask.screened_indices(), vec![1]);
//! ```

pub mod balls;
pub mod convex;
pub mod error;
pub mod ext_real;
pub mod harness;
pub mod linalg;
pub mod matrix;
pub mod pairs;
pub mod problems;
pub mod screening;
pub mod solver;

pub use balls::{
    applicable_kinds, build_ball, contains, dynamic_edpp_ball, edpp_ball, fne_ball, gap_ball,
    is_subset, rounding_slack, ryu_ball, safe_ball, sasvi_ball, sfer_ball, slores_ball, t_star,
    xgap_ball, Ball, BallKind,
};
pub use convex::{Norm, Problem, Regularizer, SmoothLoss};
pub use error::{Error, Result};
pub use ext_real::{DualValue, ExtReal};
pub use matrix::{CscMatrix, Design};
pub use pairs::{
    dual_scaling, sequential_pair, sequential_pair_with, verify_linkage, PrimalDualPair,
};
pub use problems::{
    make_elastic_net, make_lasso, make_logistic, with_lambda, ElasticNetSpec, LassoSpec,
    LogisticL1Spec, NormKind,
};
pub use screening::{reduce_problem, screen_l1, ReducedProblem, ScreenMask};
pub use solver::{
    estimate_lipschitz, estimate_step, prox_grad_solve, soft_threshold, DynamicScreening,
    ScreeningEvent, SolveOptions, SolveResult,
};
