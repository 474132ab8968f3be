//! Capacity bounds for a Gaussian relay channel with one full-duplex relay.
//!
//! The crate covers the path-loss link model, the max-flow cutset bound with
//! its optimal source/relay correlation, amplify-and-forward and maximal
//! ratio combining rates, two-hop power allocation, relay-position sweeps,
//! and a Gaussian covariance oracle used to cross-check the closed forms.
//!
//! Rates are in bits per channel use, `C(x) = 0.5 * log2(1 + x)`.
//!
//! ```
//! use relaycap_core::{cutset_bound, LinkGains, PowerBudget};
//!
//! let gains = LinkGains::uniform(1.0).unwrap();
//! let budget = PowerBudget::new(1.0, 1.0, 1.0).unwrap();
//! let bound = cutset_bound(&gains, &budget).unwrap();
//! assert_eq!(bound.rho_star, 0.0);
//! assert!((bound.rate - 0.5 * 3f64.log2()).abs() < 1e-12);
//! ```

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod gaussian;
pub mod link;
pub mod power;
pub mod search;
pub mod sweep;
pub mod verify;

pub use bounds::{
    af_at_max_beta, af_beta_max, af_capacity, af_mrc_predicates, cutset_bound, cutset_terms,
    direct_capacity, mrc_capacity, rho_numeric_search, rho_star, AfMrcPredicates, AfResult,
    Binding, CutsetResult,
};
pub use error::{Error, Result};
pub use gaussian::{
    assemble_covariance, conditional_covariance, gaussian_mutual_information, JointGaussianSystem,
    LabeledCovariance, Var,
};
pub use link::{
    capacity_of_snr, gains_from_geometry, path_gain, snr, LinkGains, NodeGeometry, PathLossParams,
    PowerBudget,
};
pub use power::{two_hop_allocate, two_hop_brute_force, AllocationResult};
pub use sweep::{
    analyze_sweep, emit_csv, evaluate_gains, preset, preset_scenarios, run_sweep, BetaPolicy,
    ShapeReport, SweepOutput, SweepRow, SweepSpec,
};
