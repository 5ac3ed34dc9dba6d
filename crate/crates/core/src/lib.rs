//! Simulation and verification of max-choice preferential attachment trees.
//!
//! A tree grows one vertex at a time. Each new vertex samples `d` existing
//! vertices independently with probability proportional to degree and
//! attaches to the sampled vertex of largest degree. The largest degree
//! `M_1(n)` grows linearly, while each lower rank `M_k(n)` grows like
//! `n^alpha` with `alpha = c^(d-1) d / 2` (see [`theory`]).
//!
//! * [`sampler`]: degree-proportional sampling in O(1).
//! * [`process`]: the step rule (max, min or plain) and trajectory runner.
//! * [`stats`]: top-`k` degrees, hub persistence, checkpoint series.
//! * [`theory`]: fixed point, exponent and the analytic checks.
//! * [`harness`]: ensembles, the exact oracle, slope fits, reports.
//! * [`cli`]: the `maxchoice` command.
//!
//! ```
//! use maxchoice::process::{run, ModelConfig, Rule};
//!
//! let config = ModelConfig { rule: Rule::Max, d: 3, horizon: 10_000, k: 3, seed: 7 };
//! let series = run(&config, &mut []).unwrap();
//! let last = series.last().unwrap();
//! assert_eq!(last.n, 10_000);
//! assert!(last.m[0] > last.m[1]);
//! ```

// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod harness;
pub mod process;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};

// Book chapters are compiled as doctests so their snippets stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/theory.md")]
    mod theory {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
