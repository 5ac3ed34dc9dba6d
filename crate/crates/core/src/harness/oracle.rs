//! Exact law of the small-`n` tree by brute-force enumeration.
//!
//! A state is the multiset of vertex degrees, kept as a descending vector.
//! From each state every ordered `d`-tuple of candidate vertices is
//! enumerated with its exact probability `prod deg / (2n)^d`; the tuple's
//! extreme-degree positions share that probability equally. Probabilities
//! are exact rationals, so each state's outgoing mass sums to exactly one.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::process::{step, ModelConfig, Rule, TreeState};
use crate::sampler::RepeatedEntryList;
use crate::stats::top_k_sorted;

pub const ORACLE_MAX_N: u64 = 8;
pub const ORACLE_MAX_D: u32 = 4;

/// Degree multiset, descending.
pub type DegreeState = Vec<u32>;

/// `(M_1..M_k, L_1..L_k)` of a degree multiset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    pub m: Vec<u32>,
    pub l: Vec<u32>,
}

impl Signature {
    pub fn of(degrees: &[u32], k: usize) -> Self {
        let m = top_k_sorted(degrees, k);
        let l = m
            .iter()
            .map(|&g| degrees.iter().filter(|&&x| x == g).count() as u32)
            .collect();
        Signature { m, l }
    }

    /// The `(M_1..M_k, L_j)` projection used for comparisons; `j` is 1-based.
    pub fn with_l(&self, j: usize) -> (Vec<u32>, u32) {
        (self.m.clone(), self.l[j - 1])
    }
}

/// Exact distribution of the degree multiset after `n_max` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    pub rule: Rule,
    pub d: u32,
    pub n_max: u64,
    pub k: usize,
    pub states: BTreeMap<DegreeState, BigRational>,
}

fn ratio(num: u128, den: u128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn lcm_upto(d: u32) -> u128 {
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    (1..=d as u128).fold(1, |acc, x| acc / gcd(acc, x) * x)
}

/// Exact one-step transitions from `state` (descending degrees, `n` edges).
pub fn transitions(state: &[u32], rule: Rule, d: u32) -> Vec<(DegreeState, BigRational)> {
    let d = if rule == Rule::Plain { 1 } else { d };
    let vertices = state.len();
    let two_n: u128 = state.iter().map(|&g| g as u128).sum();
    let tie_lcm = lcm_upto(d);
    // mass[v] * tie_lcm^-1 * (2n)^-d = P(attach to v)
    let mut mass = vec![0u128; vertices];
    let mut tuple = vec![0usize; d as usize];
    loop {
        let weight: u128 = tuple.iter().map(|&v| state[v] as u128).product();
        let degs = tuple.iter().map(|&v| state[v]);
        let extreme = match rule {
            Rule::Max | Rule::Plain => degs.max(),
            Rule::Min => degs.min(),
        }
        .expect("d >= 1");
        let tied: Vec<usize> = tuple.iter().copied().filter(|&v| state[v] == extreme).collect();
        let share = weight * tie_lcm / tied.len() as u128;
        for v in tied {
            mass[v] += share;
        }
        // next tuple in lexicographic order
        let mut pos = tuple.len();
        loop {
            if pos == 0 {
                return collect(state, &mass, two_n.pow(d) * tie_lcm);
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < vertices {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

fn collect(state: &[u32], mass: &[u128], den: u128) -> Vec<(DegreeState, BigRational)> {
    let mut out: BTreeMap<DegreeState, u128> = BTreeMap::new();
    for (v, &m) in mass.iter().enumerate() {
        if m == 0 {
            continue;
        }
        let mut next = state.to_vec();
        next[v] += 1;
        next.push(1);
        next.sort_unstable_by(|a, b| b.cmp(a));
        *out.entry(next).or_insert(0) += m;
    }
    out.into_iter().map(|(s, m)| (s, ratio(m, den))).collect()
}

/// Exact law of the tree after `n_max` steps.
pub fn exact_enumeration(rule: Rule, d: u32, n_max: u64, k: usize) -> Result<ExactDistribution> {
    if !(1..=ORACLE_MAX_N).contains(&n_max) {
        return Err(Error::Domain(format!(
            "oracle n_max must be in 1..={ORACLE_MAX_N}, got {n_max}"
        )));
    }
    if !(1..=ORACLE_MAX_D).contains(&d) {
        return Err(Error::Domain(format!(
            "oracle d must be in 1..={ORACLE_MAX_D}, got {d}"
        )));
    }
    if k < 1 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let mut states: BTreeMap<DegreeState, BigRational> = BTreeMap::new();
    states.insert(vec![1, 1], BigRational::one());
    for _ in 1..n_max {
        let mut next: BTreeMap<DegreeState, BigRational> = BTreeMap::new();
        for (state, p) in &states {
            for (to, q) in transitions(state, rule, d) {
                let e = next.entry(to).or_insert_with(BigRational::zero);
                *e += p * q;
            }
        }
        states = next;
    }
    Ok(ExactDistribution {
        rule,
        d,
        n_max,
        k,
        states,
    })
}

impl ExactDistribution {
    pub fn total(&self) -> BigRational {
        self.states.values().fold(BigRational::zero(), |acc, p| acc + p)
    }

    /// Law of `(M_1..M_k, L_1..L_k)`.
    pub fn signatures(&self) -> BTreeMap<Signature, BigRational> {
        self.marginal(|s| Signature::of(s, self.k))
    }

    /// Law of `key(state)`.
    pub fn marginal<K: Ord, F: Fn(&[u32]) -> K>(&self, key: F) -> BTreeMap<K, BigRational> {
        let mut out = BTreeMap::new();
        for (s, p) in &self.states {
            *out.entry(key(s)).or_insert_with(BigRational::zero) += p;
        }
        out
    }

    /// `P(M_1 = g)`.
    pub fn p_m1(&self, g: u32) -> BigRational {
        self.states
            .iter()
            .filter(|(s, _)| s[0] == g)
            .fold(BigRational::zero(), |acc, (_, p)| acc + p)
    }
}

/// Empirical law of `key(degrees)` over `replicas` simulated trees of
/// `n_max` steps, all drawn from one stream. As for the exact states,
/// `degrees` is sorted in descending order.
pub fn simulate_counts<K: Ord, F: Fn(&[u32]) -> K, R: RngCore>(
    rule: Rule,
    d: u32,
    n_max: u64,
    replicas: u64,
    rng: &mut R,
    key: F,
) -> Result<BTreeMap<K, u64>> {
    let config = ModelConfig {
        rule,
        d,
        horizon: n_max,
        k: 1,
        seed: 0,
    };
    config.validate()?;
    let mut counts = BTreeMap::new();
    for _ in 0..replicas {
        let mut state = TreeState::init_with(RepeatedEntryList::with_capacity(n_max as usize));
        while state.n < n_max {
            step(&mut state, &config, rng)?;
        }
        let mut degrees = state.sampler.degrees().to_vec();
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        *counts.entry(key(&degrees)).or_insert(0) += 1;
    }
    Ok(counts)
}
