//! Affine normal descent: level-set geometry based search directions,
//! line searches, baselines and experiment drivers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod direction;
pub mod error;
pub mod experiments;
pub mod invariance;
pub mod line_search;
pub mod numerics;
pub mod objective;
pub mod optimizer;
pub mod problems;
pub mod slice_centroid;

pub use config::{fmt_sig17, Config};
pub use direction::{
    affine_normal_direction, descent_direction, newton_direction, DirectionCase, DirectionResult,
    PointClass, PointTag, EPS_ORTH,
};
pub use error::{Result, YandError};
pub use invariance::{run_invariance, InvarianceReport};
pub use line_search::{LineSearchResult, LineSearchSpec, LineSearchStatus};
pub use numerics::{Frame, RealMatrix, RealVector};
pub use objective::{verify_derivatives, DerivativeReport, Objective};
pub use optimizer::{
    empirical_rates, gradient_descent_run, newton_run, yand_run, yand_run_with, DirectionScaling,
    IterateRecord, Method, RunReport, RunStatus, StepRule, StepTag, StoppingSpec, YandOptions,
};
pub use problems::{catalog, make_affine_scaled, Problem};
