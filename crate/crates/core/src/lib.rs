//! Thompson Sampling with an exponent `h` on Bernoulli bandits.
//!
//! - [`posterior`]: Beta/Binomial distribution functions and the exact
//!   probability that one Beta draw exceeds another.
//! - [`bandit`]: environment, posterior counts and seeded random streams.
//! - [`policy`]: the `P_i^h` selection rule and the draw-argmax baseline.
//! - [`theory`]: closed-form regret-analysis quantities, the logarithmic-regret
//!   range of `h`, the regime classifier and numeric lemma checks.
//! - [`harness`]: Monte Carlo runner, regret curves and growth-rate fits.
//!
//! Data-parallel loops (runs of an experiment, verification grids) use rayon
//! when the `parallel` feature is on, and plain iterators otherwise. Both
//! paths produce identical results.

pub mod bandit;
pub mod error;
pub mod harness;
pub mod policy;
pub mod posterior;
pub mod theory;

pub use error::{Error, Result};

/// Whether a data-parallel loop may fan out across threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

pub(crate) mod exec {
    use super::Execution;

    /// Order-preserving map over `0..len`.
    pub fn map_indexed<T, F>(len: usize, mode: Execution, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match mode {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }
}
