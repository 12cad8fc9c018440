//! Simulation and analysis of the probabilistic multi-key
//! Bernstein–Vazirani problem.
//!
//! A probabilistic oracle holds `k` secret `n`-bit keys and answers each
//! query with `s_i · x mod 2` for a uniformly chosen `i`. The quantum
//! circuit built in [`simulator`] returns one of the keys per oracle call;
//! [`analytics`] gives the exact probabilities of recovering all of them and
//! the classical guessing odds, and [`adversary`] runs the classical
//! baselines against the same oracle.

pub mod adversary;
pub mod analytics;
pub mod cli;
pub mod error;
pub mod exact;
pub mod keyspace;
pub mod rng;
pub mod simulator;

pub use error::{Error, Result};
pub use exact::ExactProbability;
pub use keyspace::{dot_mod2, multiplicity, rq_profile, BitString, KeyMultiplicity, KeySet, RqProfile, SecretKey};
