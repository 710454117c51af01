//! Entropies in general probabilistic theories.
//!
//! This crate evaluates the measurement entropy S1, the preparation
//! information S2 and the decomposition entropy S3 on three GPT models
//! (classical simplex, squared model, qubit), applies the induction
//! operator that builds S' from any entropy, computes accessible
//! information, and reports generalized Holevo bounds
//! `I_acc <= S'(mix) - sum_x p_x S(s_x)`.
//!
//! Numerical values come from seeded multi-start pattern search and are
//! one-sided: sup-type quantities are lower bounds, inf-type quantities are
//! upper bounds. The squared model carries closed forms
//! (`min/max[h(c1), h(c2)]`, `h(c1) + h(c2)`) and the qubit carries the von
//! Neumann entropy, used as oracles by the verification suites.

pub mod cli;
pub mod entropy;
pub mod error;
pub mod gpt;
pub mod info;
pub mod models;
pub mod optimize;
pub mod suites;

pub use entropy::{
    accessible_information, closed_form, evaluate, BoundKind, Certificate, EntropyBase,
    EntropyFunctional, EvalConfig, EvalResult, Evaluator, HolevoReport,
};
pub use error::{Error, Result};
pub use gpt::{
    effect_value, measurement_probs, mix, validate_state, Effect, Ensemble, Measurement, Model,
    State,
};
pub use info::{
    binary_entropy, joint_distribution, mutual_information, shannon_entropy, JointDistribution,
    ProbVector,
};
