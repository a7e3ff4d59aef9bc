//! Statistical-query sampling laboratory.
//!
//! The crate models algorithms that must produce an element of a hidden
//! positive set while only ever seeing noisy expectations of query functions
//! over that set. It provides:
//!
//! - [`domain`]: finite input spaces (boolean cubes, punctured `Z_p` spaces),
//!   predicates and predicate classes, with exact enumeration;
//! - [`fourier`]: Walsh–Hadamard analysis, correlated-basis
//!   orthonormalization and dependent-predicate counting;
//! - [`oracles`]: honest and adversarial statistical-query oracles with
//!   budgets and transcripts;
//! - [`samplers`]: the random baseline, the bit-fixing prefix walk and the
//!   learn-then-sample reduction;
//! - [`learners`]: the concrete statistical-query learners used to exercise
//!   the reduction;
//! - [`crypto`]: a toy signature scheme and the oracle-simulating breaker
//!   with its testable claims;
//! - [`quantum`]: classical models of period-finding and hidden-XOR
//!   post-processing (order finding, continued fractions, GF(2) elimination);
//! - [`stats`]: Hoeffding tails, sample-size planning and statistical
//!   distance;
//! - [`harness`]: JSON-configured experiments, deterministic seeding, CSV
//!   reports and the lemma verification suites.

pub mod crypto;
pub mod domain;
pub mod fourier;
pub mod harness;
pub mod learners;
pub mod oracles;
pub mod quantum;
pub mod samplers;
pub mod stats;

mod bitset;
mod error;

pub use error::{Error, Result};

/// Counter-based generator used for every seeded computation in the crate.
pub type TrialRng = rand_chacha::ChaCha8Rng;
