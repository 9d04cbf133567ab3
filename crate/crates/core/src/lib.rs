//! Information cost of semi-device-independent assumptions in
//! prepare-and-measure scenarios.
//!
//! The guessing probability `P_g` of a uniformly chosen input from the prepared
//! states determines the accessible information `log2 n + log2 P_g`. This crate
//! computes `P_g` numerically (with a dual certificate), evaluates closed-form
//! upper bounds on it under various physical assumptions, and checks how those
//! bounds behave under shared randomness.

#![forbid(unsafe_code)]

pub mod bounds;
pub mod discrimination;
pub mod ensembles;
pub mod error;
pub mod io;
pub mod matcore;
pub mod randomness;
pub mod sampling;
pub mod search;

pub use bounds::{BoundResult, Validity};
pub use discrimination::{
    accessible_information, optimize_discrimination, DualCertificate, GuessingResult,
    OracleOptions, Povm,
};
pub use ensembles::{check_assumption, Assumption, CheckContext, MembershipReport, StateEnsemble};
pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, Ket, C64};
