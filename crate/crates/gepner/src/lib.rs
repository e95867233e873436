//! Exact computations for Gepner type stability conditions on categories of
//! graded matrix factorizations.

pub mod classify;
pub mod cli;
pub mod exactmath;
pub mod extcalc;
pub mod geomcharge;
pub mod hearts;
pub mod mfcore;
pub mod poly;
pub mod quiverrep;
