//! Extreme-degree statistics.
//!
//! [`TopKTracker`] follows the `k` largest degrees `M_1(n) >= ... >= M_k(n)`
//! as unit increments arrive, together with `L_k(n)`, the number of vertices
//! whose degree equals `M_k(n)`. When fewer than `k` vertices exist the
//! missing ranks read as degree 1.
//!
//! [`HubTimeline`] remembers, for every rank, the last step at which the
//! holder of that rank changed or the strict order `M_l > M_{l+1}` toggled.
//! Observed at a finite horizon this is only a lower bound for the time after
//! which a rank is held forever.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::process::{AttachmentRecord, StepObserver, TreeState};
use crate::sampler::{DegreeSampler, VertexId};

pub const DEFAULT_CHECKPOINT_RATIO: f64 = 1.05;

/// Number of vertices whose degree equals the `k`-th largest degree.
///
/// Scans and sorts `degrees`; [`TopKTracker::l_k`] is the incremental
/// equivalent.
pub fn l_count(degrees: &[u32], k: usize) -> Result<u32> {
    if degrees.is_empty() {
        return Err(Error::Usage("l_count needs at least one vertex".into()));
    }
    if k < 1 {
        return Err(Error::Usage("rank must be at least 1".into()));
    }
    let m_k = top_k_sorted(degrees, k)[k - 1];
    Ok(degrees.iter().filter(|&&g| g == m_k).count() as u32)
}

/// The `k` largest entries of `degrees`, descending, padded with 1.
pub fn top_k_sorted(degrees: &[u32], k: usize) -> Vec<u32> {
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    sorted.resize(k.max(sorted.len()), 1);
    sorted.truncate(k);
    sorted
}

/// `1 - (M_1 + ... + M_{l-1}) / 2n`, the share of degree mass below the top
/// `l - 1` vertices.
pub fn c_hat(m: &[u32], n: u64, l: usize) -> Result<f64> {
    if l < 1 {
        return Err(Error::Usage("c_hat rank must be at least 1".into()));
    }
    if l - 1 > m.len() {
        return Err(Error::Usage(format!(
            "c_hat rank {l} exceeds {} tracked degrees",
            m.len()
        )));
    }
    if n < 1 {
        return Err(Error::Usage("c_hat needs n >= 1".into()));
    }
    let mass: u64 = m[..l - 1].iter().map(|&g| g as u64).sum();
    Ok(1.0 - mass as f64 / (2 * n) as f64)
}

/// Probability that one max-choice step raises the degree of a vertex of
/// degree `M_k`: `c^d - (c - M_k L_k / 2n)^d` with `c = c_hat(m, n, k)`.
///
/// This is the probability that `M_k` grows when `M_{k-1} > M_k`.
pub fn p_increase(m: &[u32], l_k: u32, n: u64, k: usize, d: u32) -> Result<f64> {
    if k < 1 || k > m.len() {
        return Err(Error::Usage(format!("rank {k} outside 1..={}", m.len())));
    }
    let c = c_hat(m, n, k)?;
    let share = m[k - 1] as f64 * l_k as f64 / (2 * n) as f64;
    let mut base = c - share;
    if base < 0.0 {
        if base > -1e-12 {
            base = 0.0;
        } else {
            return Err(Error::Usage(format!(
                "inconsistent state: c_hat {c} below degree share {share}"
            )));
        }
    }
    Ok(c.powi(d as i32) - base.powi(d as i32))
}

/// Incrementally maintained top-`k` degrees.
#[derive(Debug, Clone)]
pub struct TopKTracker {
    k: usize,
    // (vertex, degree), degree descending then id ascending.
    top: Vec<(VertexId, u32)>,
    histogram: DegreeHistogram,
}

/// Number of vertices of each degree. Small degrees are dense; the few
/// large ones are kept sorted.
#[derive(Debug, Clone, Default)]
struct DegreeHistogram {
    dense: Vec<u32>,
    sparse: Vec<(u32, u32)>,
}

const DENSE_DEGREES: usize = 1 << 12;

impl DegreeHistogram {
    fn get(&self, g: u32) -> u32 {
        if (g as usize) < DENSE_DEGREES {
            return self.dense.get(g as usize).copied().unwrap_or(0);
        }
        match self.sparse.binary_search_by_key(&g, |e| e.0) {
            Ok(i) => self.sparse[i].1,
            Err(_) => 0,
        }
    }

    fn increment(&mut self, g: u32) {
        if (g as usize) < DENSE_DEGREES {
            if self.dense.len() <= g as usize {
                self.dense.resize(g as usize + 1, 0);
            }
            self.dense[g as usize] += 1;
            return;
        }
        match self.sparse.binary_search_by_key(&g, |e| e.0) {
            Ok(i) => self.sparse[i].1 += 1,
            Err(i) => self.sparse.insert(i, (g, 1)),
        }
    }

    /// Returns false if no vertex has degree `g`.
    fn decrement(&mut self, g: u32) -> bool {
        if (g as usize) < DENSE_DEGREES {
            return match self.dense.get_mut(g as usize) {
                Some(c) if *c > 0 => {
                    *c -= 1;
                    true
                }
                _ => false,
            };
        }
        match self.sparse.binary_search_by_key(&g, |e| e.0) {
            Ok(i) => {
                self.sparse[i].1 -= 1;
                if self.sparse[i].1 == 0 {
                    self.sparse.remove(i);
                }
                true
            }
            Err(_) => false,
        }
    }
}

impl TopKTracker {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "k must be at least 1");
        TopKTracker {
            k,
            top: Vec::with_capacity(k),
            histogram: DegreeHistogram::default(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Records that `vertex` now has degree `new_degree`, one more than
    /// before. A new vertex enters with `new_degree == 1`.
    pub fn update(&mut self, vertex: VertexId, new_degree: u32) -> Result<()> {
        if new_degree == 0 {
            return Err(Error::Usage("degrees start at 1".into()));
        }
        if new_degree > 1 && !self.histogram.decrement(new_degree - 1) {
            return Err(Error::Usage(format!(
                "vertex {vertex}: no vertex of degree {} to increment",
                new_degree - 1
            )));
        }
        self.histogram.increment(new_degree);

        let full = self.top.len() == self.k;
        if full {
            let (last_vertex, threshold) = self.top[self.k - 1];
            if new_degree < threshold || (new_degree == threshold && vertex > last_vertex) {
                // not listed, and cannot enter
                return Ok(());
            }
        }
        let pos = match self.top.iter().position(|&(v, _)| v == vertex) {
            Some(pos) => {
                if self.top[pos].1 + 1 != new_degree {
                    return Err(Error::Usage(format!(
                        "vertex {vertex}: degree {} -> {new_degree} is not a unit increment",
                        self.top[pos].1
                    )));
                }
                self.top[pos].1 = new_degree;
                pos
            }
            None if !full => {
                self.top.push((vertex, new_degree));
                self.top.len() - 1
            }
            None => {
                // enters by passing the last entry or tying it with a smaller id
                let threshold = self.top[self.k - 1].1;
                if new_degree > threshold + 1 {
                    return Err(Error::Usage(format!(
                        "vertex {vertex}: jump to {new_degree} past threshold {threshold}"
                    )));
                }
                self.top[self.k - 1] = (vertex, new_degree);
                self.k - 1
            }
        };
        self.bubble_up(pos);
        Ok(())
    }

    fn bubble_up(&mut self, mut pos: usize) {
        let key = |e: &(VertexId, u32)| (std::cmp::Reverse(e.1), e.0);
        while pos > 0 && key(&self.top[pos]) < key(&self.top[pos - 1]) {
            self.top.swap(pos, pos - 1);
            pos -= 1;
        }
    }

    /// `M_l(n)` for `1 <= l <= k`.
    pub fn m(&self, l: usize) -> u32 {
        assert!(l >= 1 && l <= self.k, "rank {l} outside 1..={}", self.k);
        self.top.get(l - 1).map_or(1, |e| e.1)
    }

    /// `M_1(n), ..., M_k(n)`, padded with 1.
    pub fn m_values(&self) -> Vec<u32> {
        (1..=self.k).map(|l| self.m(l)).collect()
    }

    /// Vertex holding rank `l`; `None` while fewer than `l` vertices exist.
    pub fn holder(&self, l: usize) -> Option<VertexId> {
        self.top.get(l - 1).map(|e| e.0)
    }

    pub fn holders(&self) -> Vec<Option<VertexId>> {
        (1..=self.k).map(|l| self.holder(l)).collect()
    }

    /// Number of vertices with degree `g`.
    pub fn count_with_degree(&self, g: u32) -> u32 {
        self.histogram.get(g)
    }

    /// `L_k(n)`.
    pub fn l_k(&self) -> u32 {
        self.count_with_degree(self.m(self.k))
    }

    /// `L_l(n)` for any tracked rank.
    pub fn l(&self, l: usize) -> u32 {
        self.count_with_degree(self.m(l))
    }

    /// Whether `M_l(n) > M_{l+1}(n)`.
    pub fn strict(&self, l: usize) -> bool {
        if l > self.top.len() {
            return false;
        }
        if l < self.k {
            return self.m(l) > self.m(l + 1);
        }
        // rank k: every vertex at degree >= M_k must be listed
        let m_k = self.m(self.k);
        let above = self.top.iter().filter(|e| e.1 > m_k).count() as u32;
        above + self.l_k() == self.k as u32
    }
}

/// Last change per rank.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct HubTimeline {
    pub holders: Vec<Option<VertexId>>,
    pub strict: Vec<bool>,
    /// Last step at which the holder changed or strictness toggled.
    pub last_change: Vec<u64>,
    /// Last step at which the holder identity changed.
    pub last_holder_change: Vec<u64>,
}

impl HubTimeline {
    pub fn new(n: u64, tracker: &TopKTracker) -> Self {
        let k = tracker.k();
        HubTimeline {
            holders: tracker.holders(),
            strict: (1..=k).map(|l| tracker.strict(l)).collect(),
            last_change: vec![n; k],
            last_holder_change: vec![n; k],
        }
    }

    /// Compares the tracker with the previous step and stamps changes with `n`.
    pub fn record_rank_change(&mut self, n: u64, tracker: &TopKTracker) {
        for l in 1..=tracker.k() {
            let i = l - 1;
            let holder = tracker.holder(l);
            let strict = tracker.strict(l);
            if holder != self.holders[i] {
                self.holders[i] = holder;
                self.last_holder_change[i] = n;
                self.last_change[i] = n;
            }
            if strict != self.strict[i] {
                self.strict[i] = strict;
                self.last_change[i] = n;
            }
        }
    }
}

/// One checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointRow {
    pub n: u64,
    /// `M_1..M_k`.
    pub m: Vec<u32>,
    pub l_k: u32,
    pub holders: Vec<Option<VertexId>>,
    pub last_change: Vec<u64>,
}

impl CheckpointRow {
    /// `ĉ_l(n)` for `1 <= l <= k`.
    pub fn c_hat(&self, l: usize) -> f64 {
        c_hat(&self.m, self.n, l).expect("row ranks are valid")
    }
}

/// Checkpoints of one trajectory, `n` strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointSeries {
    pub k: usize,
    pub rows: Vec<CheckpointRow>,
    /// Final rank timeline; absent when the series was read back from CSV.
    pub timeline: Option<HubTimeline>,
}

impl CheckpointSeries {
    pub fn new(k: usize) -> Self {
        CheckpointSeries {
            k,
            rows: Vec::new(),
            timeline: None,
        }
    }

    pub fn last(&self) -> Option<&CheckpointRow> {
        self.rows.last()
    }

    pub fn header(k: usize) -> Vec<String> {
        let mut cols = vec!["n".to_string()];
        cols.extend((1..=k).map(|l| format!("M_{l}")));
        cols.push(format!("L_{k}"));
        cols.push(format!("c_hat_{k}"));
        cols.extend((1..=k).map(|l| format!("holder_{l}")));
        cols.extend((1..=k).map(|l| format!("last_change_{l}")));
        cols
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(Self::header(self.k))?;
        for row in &self.rows {
            let mut rec: Vec<String> = Vec::with_capacity(3 * self.k + 3);
            rec.push(row.n.to_string());
            rec.extend(row.m.iter().map(u32::to_string));
            rec.push(row.l_k.to_string());
            rec.push(format_float(row.c_hat(self.k)));
            rec.extend(
                row.holders
                    .iter()
                    .map(|h| h.map_or_else(String::new, |v| v.to_string())),
            );
            rec.extend(row.last_change.iter().map(u64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header.len() < 6 || !(header.len() - 3).is_multiple_of(3) {
            return Err(Error::Usage(format!("unexpected checkpoint header {header:?}")));
        }
        let k = (header.len() - 3) / 3;
        if header != Self::header(k) {
            return Err(Error::Usage(format!("unexpected checkpoint header {header:?}")));
        }
        let bad = |what: &str, v: &str| Error::Usage(format!("bad {what} value {v:?}"));
        let mut series = CheckpointSeries::new(k);
        for rec in r.records() {
            let rec = rec?;
            let int = |i: usize| -> Result<u64> { rec[i].parse().map_err(|_| bad(&header[i], &rec[i])) };
            let n = int(0)?;
            let m = (1..=k)
                .map(|i| int(i).map(|v| v as u32))
                .collect::<Result<Vec<_>>>()?;
            let l_k = int(k + 1)? as u32;
            let holders = (k + 3..2 * k + 3)
                .map(|i| {
                    if rec[i].is_empty() {
                        Ok(None)
                    } else {
                        int(i).map(|v| Some(v as u32))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let last_change = (2 * k + 3..3 * k + 3).map(int).collect::<Result<Vec<_>>>()?;
            if let Some(prev) = series.rows.last() {
                if prev.n >= n {
                    return Err(Error::Usage(format!("checkpoint n not increasing at {n}")));
                }
            }
            series.rows.push(CheckpointRow {
                n,
                m,
                l_k,
                holders,
                last_change,
            });
        }
        Ok(series)
    }
}

/// Formats a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Geometrically spaced checkpoint steps `1 = n_0 < n_1 < ... <= horizon`,
/// `n_{j+1} = max(n_j + 1, ceil(n_j * ratio))`, with `horizon` always included.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointSchedule {
    ratio: f64,
    horizon: u64,
    next: u64,
}

impl CheckpointSchedule {
    pub fn new(ratio: f64, horizon: u64) -> Result<Self> {
        if !(ratio > 1.0) || !ratio.is_finite() {
            return Err(Error::Config(format!(
                "checkpoint ratio must exceed 1, got {ratio}"
            )));
        }
        if horizon < 1 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        Ok(CheckpointSchedule {
            ratio,
            horizon,
            next: 1,
        })
    }

    /// Returns whether `n` is a checkpoint; must be called for every `n` in order.
    pub fn due(&mut self, n: u64) -> bool {
        if n == self.horizon {
            return true;
        }
        if n < self.next {
            return false;
        }
        let grown = (self.next as f64 * self.ratio).ceil() as u64;
        self.next = grown.max(self.next + 1);
        true
    }

    /// All checkpoint steps.
    pub fn steps(mut self) -> Vec<u64> {
        (1..=self.horizon).filter(|&n| self.due(n)).collect()
    }
}

/// Observer maintaining the tracker, the timeline and the checkpoint rows.
#[derive(Debug, Clone)]
pub struct CheckpointRecorder {
    tracker: TopKTracker,
    timeline: Option<HubTimeline>,
    schedule: CheckpointSchedule,
    series: CheckpointSeries,
}

impl CheckpointRecorder {
    pub fn new(k: usize, schedule: CheckpointSchedule) -> Self {
        CheckpointRecorder {
            tracker: TopKTracker::new(k),
            timeline: None,
            schedule,
            series: CheckpointSeries::new(k),
        }
    }

    pub fn tracker(&self) -> &TopKTracker {
        &self.tracker
    }

    fn checkpoint(&mut self, n: u64) {
        if !self.schedule.due(n) {
            return;
        }
        let timeline = self.timeline.as_ref().expect("started");
        self.series.rows.push(CheckpointRow {
            n,
            m: self.tracker.m_values(),
            l_k: self.tracker.l_k(),
            holders: self.tracker.holders(),
            last_change: timeline.last_change.clone(),
        });
    }

    pub fn finish(mut self) -> CheckpointSeries {
        self.series.timeline = self.timeline;
        self.series
    }
}

impl<S: DegreeSampler> StepObserver<S> for CheckpointRecorder {
    fn start(&mut self, state: &TreeState<S>) -> Result<()> {
        for v in 0..state.next_vertex {
            for g in 1..=state.degree(v)? {
                self.tracker.update(v, g)?;
            }
        }
        self.timeline = Some(HubTimeline::new(state.n, &self.tracker));
        self.checkpoint(state.n);
        Ok(())
    }

    fn observe(&mut self, state: &TreeState<S>, record: &AttachmentRecord) -> Result<()> {
        self.tracker.update(record.chosen, record.chosen_degree)?;
        self.tracker.update(record.new_vertex, 1)?;
        self.timeline
            .as_mut()
            .expect("started")
            .record_rank_change(state.n, &self.tracker);
        self.checkpoint(state.n);
        Ok(())
    }
}
