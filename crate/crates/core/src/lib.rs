//! Rate-distortion functions for a uniform binary source whose side
//! information is the output of a binary asymmetric channel.
//!
//! * [`predictive`]: side information at encoder and decoder, closed form.
//! * [`wz`]: side information at the decoder only, via a binary auxiliary
//!   channel and a lower convex envelope.
//! * [`ba`]: Blahut-Arimoto style solvers used as numerical cross-checks.
//! * [`analysis`]: rate loss, crossover sweeps, symmetric-channel closed
//!   forms and Monte-Carlo validation.

// Probability tables are indexed by symbol; negated comparisons reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod ba;
pub mod channel;
pub mod curve;
pub mod error;
pub mod joint;
pub mod predictive;
pub mod prob;
pub mod rule;
pub mod search;
pub mod wz;

pub use analysis::{
    bsc_predictive_oracle, bsc_sweep, bsc_wz_oracle, fixed_dmax_sweep, monte_carlo_distortion,
    rate_loss, refine_bsc_peak, McEstimate, RateLossReport, SweepResult, SweepRow,
};
pub use ba::{ba_conditional_curve, ba_wz_curve, ba_wz_point, BaConfig, BaPoint, BaResult};
pub use channel::{
    canonicalize_correlation, canonicalize_pair, d_max, invert_channel, AuxChannel,
    CorrelationChannel, InverseChannel, LabelTransform,
};
pub use curve::{lower_convex_hull, RdCurve, RdPoint};
pub use error::{RdError, Result};
pub use joint::{joint_pxyu, p_u_given_y, JointPXYU};
pub use predictive::{
    predictive_achievability, predictive_curve, predictive_rate, PredictiveAchievability,
    PredictiveRule,
};
pub use prob::{binary_entropy, Probability};
pub use rule::{DecoderTable, ReconstructionRule};
pub use wz::{
    classify_region, min_rate_at_distortion, optimal_pq_trajectory, region_thresholds, wz_bound,
    wz_distortion, wz_rate, PqTrajectory, Region, RegionClassification, TimeShare, WzBound,
};
