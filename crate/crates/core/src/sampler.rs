//! Degree-proportional vertex sampling.
//!
//! Two interchangeable implementations back the same contract:
//!
//! * [`RepeatedEntryList`] stores each vertex id once per unit of degree, so
//!   a uniform position draw is a degree-proportional vertex draw. Sampling
//!   and updating are O(1). Degrees only ever grow by one, which is what
//!   makes this layout exact.
//! * [`PrefixSumTree`] keeps a Fenwick tree of per-vertex weights and finds
//!   the sampled vertex by descending the tree. It is slower (O(log n)) and
//!   exists to cross-check the first one.
//!
//! Vertex ids are dense `u32` values in arrival order.

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::rng::bounded;

pub type VertexId = u32;

/// A multiset of vertices weighted by degree.
pub trait DegreeSampler {
    /// Draws a vertex with probability `degree(v) / total_weight()`.
    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<VertexId>;

    /// Adds the edge `{u, v}`: both endpoint degrees grow by one.
    fn record_edge(&mut self, u: VertexId, v: VertexId);

    /// Current degree of `v`. Ids that were never touched are an error.
    fn degree(&self, v: VertexId) -> Result<u32>;

    /// Sum of all degrees, i.e. twice the number of recorded edges.
    fn total_weight(&self) -> u64;

    /// Number of vertex ids known to the sampler.
    fn vertex_count(&self) -> usize;

    /// Bytes of heap memory held.
    fn heap_bytes(&self) -> usize;
}

/// Id list in which vertex `i` appears exactly `degree(i)` times.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RepeatedEntryList {
    entries: Vec<VertexId>,
    degrees: Vec<u32>,
}

impl RepeatedEntryList {
    pub fn new() -> Self {
        Self::default()
    }

    /// Preallocates room for a tree with `edges` edges.
    pub fn with_capacity(edges: usize) -> Self {
        RepeatedEntryList {
            entries: Vec::with_capacity(2 * edges),
            degrees: Vec::with_capacity(edges + 1),
        }
    }

    /// Like [`RepeatedEntryList::with_capacity`], reporting allocation failure.
    pub fn try_with_capacity(edges: usize) -> std::result::Result<Self, std::collections::TryReserveError> {
        let mut entries = Vec::new();
        entries.try_reserve_exact(2 * edges)?;
        let mut degrees = Vec::new();
        degrees.try_reserve_exact(edges + 1)?;
        Ok(RepeatedEntryList { entries, degrees })
    }

    pub fn entries(&self) -> &[VertexId] {
        &self.entries
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    #[inline]
    fn bump(&mut self, v: VertexId) {
        let idx = v as usize;
        if idx >= self.degrees.len() {
            self.degrees.resize(idx + 1, 0);
        }
        self.degrees[idx] += 1;
        self.entries.push(v);
    }
}

impl DegreeSampler for RepeatedEntryList {
    #[inline]
    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<VertexId> {
        if self.entries.is_empty() {
            return Err(Error::Usage("sampling from an empty sampler".into()));
        }
        let pos = bounded(rng, self.entries.len() as u64);
        Ok(self.entries[pos as usize])
    }

    #[inline]
    fn record_edge(&mut self, u: VertexId, v: VertexId) {
        debug_assert_ne!(u, v, "self loops are not part of the model");
        self.bump(u);
        self.bump(v);
    }

    #[inline]
    fn degree(&self, v: VertexId) -> Result<u32> {
        self.degrees
            .get(v as usize)
            .copied()
            .ok_or_else(|| Error::Usage(format!("vertex {v} out of range")))
    }

    fn total_weight(&self) -> u64 {
        self.entries.len() as u64
    }

    fn vertex_count(&self) -> usize {
        self.degrees.len()
    }

    fn heap_bytes(&self) -> usize {
        self.entries.capacity() * std::mem::size_of::<VertexId>()
            + self.degrees.capacity() * std::mem::size_of::<u32>()
    }
}

/// Fenwick tree over per-vertex integer weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixSumTree {
    // 1-based Fenwick array; tree[0] unused.
    tree: Vec<u64>,
    degrees: Vec<u32>,
    total: u64,
}

impl PrefixSumTree {
    pub fn new() -> Self {
        PrefixSumTree {
            tree: vec![0],
            degrees: Vec::new(),
            total: 0,
        }
    }

    /// Sum of the weights of vertices `0..len`.
    fn prefix(&self, len: usize) -> u64 {
        let mut i = len;
        let mut sum = 0;
        while i > 0 {
            sum += self.tree[i];
            i &= i - 1;
        }
        sum
    }

    fn grow_to(&mut self, len: usize) {
        while self.degrees.len() < len {
            // A new zero-weight slot i covers (i - lowbit(i), i], whose sum
            // is available from the existing prefix sums.
            let i = self.degrees.len() + 1;
            let low = i & i.wrapping_neg();
            let covered = self.prefix(i - 1) - self.prefix(i - low);
            self.tree.push(covered);
            self.degrees.push(0);
        }
    }

    fn add(&mut self, v: VertexId, delta: u64) {
        let idx = v as usize;
        self.grow_to(idx + 1);
        self.degrees[idx] += delta as u32;
        self.total += delta;
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Smallest vertex whose inclusive prefix sum exceeds `target`.
    fn find(&self, mut target: u64) -> VertexId {
        let n = self.tree.len() - 1;
        let mut pos = 0usize;
        let mut step = if n == 0 {
            0
        } else {
            1usize << (usize::BITS - 1 - n.leading_zeros())
        };
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos as VertexId
    }
}

impl Default for PrefixSumTree {
    fn default() -> Self {
        Self::new()
    }
}

impl DegreeSampler for PrefixSumTree {
    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<VertexId> {
        if self.total == 0 {
            return Err(Error::Usage("sampling from an empty sampler".into()));
        }
        Ok(self.find(bounded(rng, self.total)))
    }

    fn record_edge(&mut self, u: VertexId, v: VertexId) {
        debug_assert_ne!(u, v, "self loops are not part of the model");
        self.add(u, 1);
        self.add(v, 1);
    }

    fn degree(&self, v: VertexId) -> Result<u32> {
        self.degrees
            .get(v as usize)
            .copied()
            .ok_or_else(|| Error::Usage(format!("vertex {v} out of range")))
    }

    fn total_weight(&self) -> u64 {
        self.total
    }

    fn vertex_count(&self) -> usize {
        self.degrees.len()
    }

    fn heap_bytes(&self) -> usize {
        self.tree.capacity() * std::mem::size_of::<u64>()
            + self.degrees.capacity() * std::mem::size_of::<u32>()
    }
}
