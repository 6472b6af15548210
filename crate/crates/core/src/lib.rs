//! Robust selection problems: instance samplers, hard-instance generation,
//! compact MILP formulations, exact evaluation oracles and a built-in 0-1
//! branch-and-bound solver.

pub mod bench;
pub mod error;
pub mod formulations;
pub mod hiro;
pub mod io;
pub mod milp;
pub mod model;
pub mod rational;
pub mod samplers;

pub use error::{Error, Result};
