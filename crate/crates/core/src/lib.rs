// `!(x < y)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod error;
pub mod family;
pub mod grid;
pub mod prox;
pub mod run;
pub mod scenario;
pub mod schedule;
pub mod solver;
pub mod svg;
pub mod variation;
pub mod vector;

pub use error::{Error, Result};
pub use grid::{anticipate, TimeGrid};
pub use prox::{NormalResidualReport, ProxSet, Region, Shape};
pub use vector::Vector;
pub use family::{
    compute_tau, estimate_modulus, excess, ExcessEstimate, ExcessMethod, InnerBallCert, Modulus, MovingFamily,
    SamplingParams,
};
pub use schedule::{build_schedule, build_schedule_with, EpsTemplate, GridSpec, RefinementSchedule};
pub use solver::{certify_steps, solve, solve_level, variation, DiscreteTrajectory, StepCertificate};
pub use variation::{
    ball_variation_bound, choose_cone_params, cone_variation_bound, converge_study, BallBoundParams, ConeBoundParams,
    ConvergenceReport,
};
pub use scenario::{builtin, list_builtins, load_scenario, parse_scenario, Check, Scenario};
pub use run::{run, verify, BoundStatus, RunOptions, RunOutput, RunReport, Verdict, VerifyReport, SEED_ENV};
