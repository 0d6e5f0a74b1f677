//! Branch-and-bound for production-cost (unit commitment) MILPs with a
//! learned variable-selection policy.

pub mod bnb_engine;
pub mod branching_rules;
pub mod error;
pub mod harness;
pub mod lp_simplex;
pub mod milp_builder;
pub mod pcm_model;
pub mod policy;
pub mod training;

pub use error::{Error, Result};
