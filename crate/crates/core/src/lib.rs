//! Local, hybrid and no-signaling decompositions of multipartite correlation
//! tables, plus exact stabilizer certificates of full nonlocality.

pub mod error;
pub mod par;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};
pub use par::Execution;
pub use scalar::{Rational, Scalar};
pub use scenario::{bipartitions, Behavior, Bipartition, Scenario};
pub mod lp;
pub mod polytope;
pub mod epr2;
pub mod quantum;
pub mod stabilizer;
pub mod certify;
pub mod io;
pub mod fixtures;
pub mod sample;
pub mod checks;
