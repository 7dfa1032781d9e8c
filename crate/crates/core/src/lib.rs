//! Black-box adversarial example generation as constrained multi-objective
//! optimization.
//!
//! - [`imaging`]: images, PNM I/O, rotation and perturbation application
//! - [`encoding`]: genotype layouts (direct blocks and DCT patterns)
//! - [`oracle`]: classifier backends, caching and query accounting
//! - [`scenarios`]: attack objectives and constraints
//! - [`moead`]: the optimizer

pub mod encoding;
pub mod imaging;
pub mod moead;
pub mod oracle;
pub mod scenarios;
