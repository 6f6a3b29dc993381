//! Numerical exploration of Hardy–Littlewood-type summability inequalities
//! for m-linear forms on ℓ_pⁿ.
//!
//! * [`forms`]: coefficient access, evaluation, blocked-index power sums.
//! * [`norms`]: operator norms (alternating ascent, exact sup-norm, bounds).
//! * [`witnesses`]: diagonal forms, lifts along block patterns, random sign forms.
//! * [`theory`]: predicted growth exponents in exact rational arithmetic.
//! * [`experiments`]: growth runs over dimension grids and log-log fits.
//! * [`io`]: JSON form files.

pub mod error;
pub mod experiments;
pub mod exponent;
pub mod forms;
pub mod io;
pub mod norms;
mod seed;
pub mod theory;
pub mod witnesses;

pub use error::{Error, Result};
pub use exponent::{holder_dual, ExtendedExponent};
pub use forms::{BlockPattern, MultilinearForm};
pub use norms::{NormEstimate, NormKind};
