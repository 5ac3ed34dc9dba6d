//! The evolving tree and its attachment rules.
//!
//! The tree starts as a single edge between vertices 0 and 1. Each step adds
//! one vertex and one edge. The endpoint of the new edge is picked from `d`
//! candidates drawn independently, with replacement, with probability
//! proportional to degree:
//!
//! * [`Rule::Max`] attaches to a candidate of largest degree,
//! * [`Rule::Min`] attaches to a candidate of smallest degree,
//! * [`Rule::Plain`] is ordinary preferential attachment (a single candidate).
//!
//! When several sampled candidates share the extreme degree, one of them is
//! picked uniformly, counting repeated draws of the same vertex with
//! multiplicity. For two tied candidates this is a fair coin toss.

use std::fmt;
use std::str::FromStr;

use rand_core::RngCore;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rng::{self, bounded};
use crate::sampler::{DegreeSampler, RepeatedEntryList, VertexId};
use crate::stats::{CheckpointRecorder, CheckpointSchedule, CheckpointSeries};

/// Largest supported sample count.
pub const MAX_D: u32 = 64;

/// Largest horizon representable with 32-bit vertex ids.
pub const MAX_HORIZON: u64 = (1 << 31) - 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Max,
    Min,
    Plain,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Max => "max",
            Rule::Min => "min",
            Rule::Plain => "plain",
        })
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Rule::Max),
            "min" => Ok(Rule::Min),
            "plain" => Ok(Rule::Plain),
            other => Err(Error::Config(format!(
                "unknown rule {other:?} (expected max, min or plain)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelConfig {
    pub rule: Rule,
    /// Number of candidates drawn per step.
    pub d: u32,
    /// Final step count.
    pub horizon: u64,
    /// Number of tracked degree ranks.
    pub k: usize,
    pub seed: u64,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < 1 || self.d > MAX_D {
            return Err(Error::Config(format!("d must be in 1..={MAX_D}, got {}", self.d)));
        }
        if self.horizon < 1 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.horizon > MAX_HORIZON {
            return Err(Error::Config(format!("horizon must not exceed {MAX_HORIZON}")));
        }
        if self.k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(())
    }

    /// Candidates actually drawn per step: the plain rule always draws one.
    pub fn effective_d(&self) -> u32 {
        match self.rule {
            Rule::Plain => 1,
            _ => self.d,
        }
    }
}

/// The tree after `n` steps: `n + 1` vertices, `n` edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeState<S = RepeatedEntryList> {
    pub n: u64,
    pub sampler: S,
    pub next_vertex: VertexId,
}

impl TreeState<RepeatedEntryList> {
    /// The one-edge tree.
    pub fn init() -> Self {
        Self::init_with(RepeatedEntryList::new())
    }

    /// The one-edge tree with storage reserved for `horizon` steps.
    pub fn init_for_horizon(horizon: u64) -> Result<Self> {
        let sampler = RepeatedEntryList::try_with_capacity(horizon as usize)
            .map_err(|e| Error::Resource(format!("degree sampler for {horizon} steps: {e}")))?;
        Ok(Self::init_with(sampler))
    }
}

impl<S: DegreeSampler> TreeState<S> {
    /// The one-edge tree on top of an empty sampler.
    pub fn init_with(mut sampler: S) -> Self {
        sampler.record_edge(1, 0);
        TreeState {
            n: 1,
            sampler,
            next_vertex: 2,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.next_vertex as usize
    }

    pub fn degree(&self, v: VertexId) -> Result<u32> {
        self.sampler.degree(v)
    }
}

/// What happened during one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttachmentRecord {
    /// Step count before the attachment.
    pub n: u64,
    /// The vertex the new edge was attached to.
    pub chosen: VertexId,
    /// Degree of `chosen` after the attachment.
    pub chosen_degree: u32,
    pub new_vertex: VertexId,
    pub candidates: SmallVec<[VertexId; 8]>,
    /// Number of candidates, counted with multiplicity, that attained the extreme degree.
    pub tie_size: u32,
}

/// Performs one step of `config.rule` on `state`.
pub fn step<S: DegreeSampler, R: RngCore + ?Sized>(
    state: &mut TreeState<S>,
    config: &ModelConfig,
    rng: &mut R,
) -> Result<AttachmentRecord> {
    let d = config.effective_d();
    let mut candidates: SmallVec<[VertexId; 8]> = SmallVec::with_capacity(d as usize);
    let mut degrees: SmallVec<[u32; 8]> = SmallVec::with_capacity(d as usize);
    for _ in 0..d {
        let v = state.sampler.sample(rng)?;
        candidates.push(v);
        degrees.push(state.sampler.degree(v)?);
    }

    let extreme = match config.rule {
        Rule::Max | Rule::Plain => *degrees.iter().max().expect("d >= 1"),
        Rule::Min => *degrees.iter().min().expect("d >= 1"),
    };
    let tie_size = degrees.iter().filter(|&&g| g == extreme).count() as u32;
    let pick = if tie_size == 1 {
        0
    } else {
        bounded(rng, tie_size as u64) as usize
    };
    let chosen = candidates
        .iter()
        .zip(&degrees)
        .filter(|(_, &g)| g == extreme)
        .nth(pick)
        .map(|(&v, _)| v)
        .expect("pick < tie_size");

    let new_vertex = state.next_vertex;
    state.sampler.record_edge(chosen, new_vertex);
    let record = AttachmentRecord {
        n: state.n,
        chosen,
        chosen_degree: extreme + 1,
        new_vertex,
        candidates,
        tie_size,
    };
    state.n += 1;
    state.next_vertex += 1;
    Ok(record)
}

/// Hook invoked by [`run`] as the trajectory unfolds.
pub trait StepObserver<S = RepeatedEntryList> {
    /// Called once on the initial one-edge tree.
    fn start(&mut self, _state: &TreeState<S>) -> Result<()> {
        Ok(())
    }

    /// Called after every step.
    fn observe(&mut self, state: &TreeState<S>, record: &AttachmentRecord) -> Result<()>;
}

/// Runs `config` from the one-edge tree to `config.horizon` with the default
/// checkpoint spacing.
pub fn run(config: &ModelConfig, observers: &mut [&mut dyn StepObserver]) -> Result<CheckpointSeries> {
    let schedule = CheckpointSchedule::new(crate::stats::DEFAULT_CHECKPOINT_RATIO, config.horizon)?;
    run_with_schedule(config, schedule, observers)
}

/// Runs `config` recording the top-k statistics at the checkpoints of
/// `schedule`. The RNG stream is seeded from `config.seed` alone.
pub fn run_with_schedule(
    config: &ModelConfig,
    schedule: CheckpointSchedule,
    observers: &mut [&mut dyn StepObserver],
) -> Result<CheckpointSeries> {
    config.validate()?;
    let mut rng = rng::from_seed(config.seed);
    let mut state = TreeState::init_for_horizon(config.horizon)?;
    let mut recorder = CheckpointRecorder::new(config.k, schedule);

    recorder.start(&state)?;
    for obs in observers.iter_mut() {
        obs.start(&state)?;
    }
    while state.n < config.horizon {
        let record = step(&mut state, config, &mut rng)?;
        recorder.observe(&state, &record)?;
        for obs in observers.iter_mut() {
            obs.observe(&state, &record)?;
        }
    }
    Ok(recorder.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::PrefixSumTree;

    fn config(rule: Rule, d: u32) -> ModelConfig {
        ModelConfig {
            rule,
            d,
            horizon: 10,
            k: 3,
            seed: 1,
        }
    }

    #[test]
    fn init_is_the_one_edge_tree() {
        let s = TreeState::init();
        assert_eq!(s.n, 1);
        assert_eq!(s.degree(0).unwrap(), 1);
        assert_eq!(s.degree(1).unwrap(), 1);
        assert_eq!(s.sampler.total_weight(), 2);
        assert_eq!(s, TreeState::init());
    }

    #[test]
    fn config_validation() {
        assert!(config(Rule::Max, 3).validate().is_ok());
        assert!(config(Rule::Max, 0).validate().is_err());
        assert!(config(Rule::Max, 65).validate().is_err());
        let mut c = config(Rule::Max, 3);
        c.horizon = 0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.horizon = 5;
        c.k = 0;
        assert!(c.validate().is_err());
        assert_eq!(config(Rule::Plain, 5).effective_d(), 1);
    }

    #[test]
    fn rule_parsing() {
        assert_eq!("max".parse::<Rule>().unwrap(), Rule::Max);
        assert_eq!("plain".parse::<Rule>().unwrap(), Rule::Plain);
        assert!("biggest".parse::<Rule>().is_err());
        assert_eq!(Rule::Min.to_string(), "min");
    }

    #[test]
    fn step_keeps_tree_invariants() {
        for rule in [Rule::Max, Rule::Min, Rule::Plain] {
            let cfg = config(rule, 3);
            let mut rng = rng::from_seed(5);
            let mut s = TreeState::init();
            for _ in 0..500 {
                let rec = step(&mut s, &cfg, &mut rng).unwrap();
                assert_eq!(s.vertex_count() as u64, s.n + 1);
                assert_eq!(s.sampler.total_weight(), 2 * s.n);
                assert_eq!(s.degree(rec.new_vertex).unwrap(), 1);
                assert!(rec.candidates.contains(&rec.chosen));
                assert!(rec.tie_size >= 1);
                assert_eq!(s.degree(rec.chosen).unwrap(), rec.chosen_degree);
            }
        }
    }

    #[test]
    fn step_works_over_prefix_sum_tree() {
        let cfg = config(Rule::Max, 3);
        let mut rng = rng::from_seed(5);
        let mut s = TreeState::init_with(PrefixSumTree::new());
        for _ in 0..200 {
            step(&mut s, &cfg, &mut rng).unwrap();
        }
        assert_eq!(s.n, 201);
        assert_eq!(s.sampler.total_weight(), 402);
    }

    #[test]
    fn horizon_two_gives_a_degree_two_vertex() {
        for seed in 0..50 {
            let cfg = ModelConfig {
                rule: Rule::Max,
                d: 3,
                horizon: 2,
                k: 1,
                seed,
            };
            let series = run(&cfg, &mut []).unwrap();
            assert_eq!(series.rows.last().unwrap().m[0], 2);
        }
    }

    #[test]
    fn run_rejects_zero_horizon() {
        let cfg = ModelConfig {
            rule: Rule::Max,
            d: 3,
            horizon: 0,
            k: 1,
            seed: 0,
        };
        assert!(matches!(run(&cfg, &mut []), Err(Error::Config(_))));
    }
}
