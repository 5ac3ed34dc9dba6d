use maxchoice::harness::compare::quantile;
use maxchoice::process::{run, step, ModelConfig, Rule, StepObserver, TreeState};
use maxchoice::rng;
use maxchoice::sampler::{DegreeSampler, RepeatedEntryList, VertexId};
use maxchoice::stats::{
    c_hat, l_count, p_increase, top_k_sorted, CheckpointRecorder, CheckpointSchedule, CheckpointSeries,
    HubTimeline, TopKTracker,
};
use maxchoice::theory::f_eval;
use proptest::prelude::*;

/// Full-sort reference: `(vertex, degree)` by degree descending, id ascending.
fn sorted_ranks(degrees: &[u32]) -> Vec<(VertexId, u32)> {
    let mut all: Vec<(VertexId, u32)> = degrees
        .iter()
        .enumerate()
        .map(|(v, &g)| (v as VertexId, g))
        .collect();
    all.sort_by_key(|&(v, g)| (std::cmp::Reverse(g), v));
    all
}

fn tree(edges: &[(VertexId, VertexId)]) -> TreeState {
    let mut s = RepeatedEntryList::new();
    for &(u, v) in edges {
        s.record_edge(u, v);
    }
    let n = edges.len() as u64;
    TreeState {
        n,
        sampler: s,
        next_vertex: n as VertexId + 1,
    }
}

#[test]
fn l_count_examples() {
    assert_eq!(l_count(&[2, 1, 1], 2).unwrap(), 2);
    assert_eq!(l_count(&[2, 1, 1], 1).unwrap(), 1);
    assert_eq!(l_count(&[3, 3, 2, 1, 1], 2).unwrap(), 2);
    assert_eq!(top_k_sorted(&[1, 2, 1], 2), vec![2, 1]);
}

#[test]
fn c_hat_examples() {
    assert_eq!(c_hat(&[2, 1], 2, 1).unwrap(), 1.0);
    assert_eq!(c_hat(&[2, 1], 2, 2).unwrap(), 0.5);
}

#[test]
fn p_increase_examples() {
    assert!((p_increase(&[2], 1, 2, 1, 3).unwrap() - 7.0 / 8.0).abs() < 1e-15);
    assert!((p_increase(&[2, 1], 2, 2, 2, 3).unwrap() - 1.0 / 8.0).abs() < 1e-15);
    // one candidate: the chance of hitting one of the L_k vertices of degree M_k
    let (m, l, n) = ([9, 4, 3], 2, 40);
    let p = p_increase(&m, l, n, 3, 1).unwrap();
    assert!((p - 3.0 * 2.0 / 80.0).abs() < 1e-15);
}

#[test]
fn tracker_small_examples() {
    let mut t = TopKTracker::new(2);
    for (v, g) in [(0, 1), (1, 1), (0, 2), (2, 1)] {
        t.update(v, g).unwrap();
    }
    assert_eq!(t.m_values(), vec![2, 1]);
    t.update(0, 3).unwrap();
    assert_eq!(t.m_values(), vec![3, 1]);
}

#[test]
fn strictness_change_is_recorded() {
    // (2, 2, 1, 1): vertices 0 and 1 tie for the top
    let mut t = TopKTracker::new(2);
    for (v, g) in [(0, 1), (1, 1), (0, 2), (2, 1), (1, 2), (3, 1)] {
        t.update(v, g).unwrap();
    }
    assert!(!t.strict(1));
    let mut timeline = HubTimeline::new(3, &t);
    t.update(0, 3).unwrap();
    timeline.record_rank_change(4, &t);
    assert!(t.strict(1));
    assert_eq!(timeline.last_change[0], 4);
    assert_eq!(timeline.holders[0], Some(0));
}

/// One step from a fixed state, repeated: how often does the degree-`M_k`
/// vertex gain an edge?
fn empirical_increase(state: &TreeState, m_k: u32, trials: u64, seed: u64) -> f64 {
    let cfg = ModelConfig {
        rule: Rule::Max,
        d: 3,
        horizon: state.n + 1,
        k: 3,
        seed,
    };
    let mut rng = rng::from_seed(seed);
    let hits = (0..trials)
        .filter(|_| {
            let mut s = state.clone();
            step(&mut s, &cfg, &mut rng).unwrap().chosen_degree == m_k + 1
        })
        .count();
    hits as f64 / trials as f64
}

#[test]
fn increase_probability_matches_replayed_steps() {
    // 0 has leaves 1..=5, 1 has leaves 6 and 7, 2 has leaf 8: degrees 5, 3, 2
    let state = tree(&[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 6), (1, 7), (2, 8)]);
    let m = top_k_sorted(state.sampler.degrees(), 3);
    assert_eq!(m, vec![5, 3, 2]);
    let trials = 200_000;
    for k in 2..=3 {
        let l_k = l_count(state.sampler.degrees(), k).unwrap();
        assert_eq!(l_k, 1);
        let p = p_increase(&m, l_k, state.n, k, 3).unwrap();
        let emp = empirical_increase(&state, m[k - 1], trials, 30 + k as u64);
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(
            (emp - p).abs() <= 3.0 * sigma,
            "k = {k}: p = {p}, empirical {emp}"
        );
    }
    // hand values: c_hat_3 = 1/2, share 2/16; c_hat_2 = 11/16, share 3/16
    let p3 = 0.125 - 0.375f64.powi(3);
    assert!((p_increase(&m, 1, 8, 3, 3).unwrap() - p3).abs() < 1e-15);
    assert!((p_increase(&m, 1, 8, 2, 3).unwrap() - 819.0 / 4096.0).abs() < 1e-15);
}

#[test]
fn tracker_agrees_with_the_final_tree() {
    let cfg = ModelConfig {
        rule: Rule::Max,
        d: 3,
        horizon: 50_000,
        k: 4,
        seed: 3,
    };
    let mut rng = rng::from_seed(cfg.seed);
    let mut state = TreeState::init();
    let mut rec = CheckpointRecorder::new(cfg.k, CheckpointSchedule::new(1.05, cfg.horizon).unwrap());
    rec.start(&state).unwrap();
    while state.n < cfg.horizon {
        let r = step(&mut state, &cfg, &mut rng).unwrap();
        rec.observe(&state, &r).unwrap();
    }
    let reference = sorted_ranks(state.sampler.degrees());
    let t = rec.tracker();
    for l in 1..=cfg.k {
        assert_eq!(t.m(l), reference[l - 1].1);
        assert_eq!(t.holder(l), Some(reference[l - 1].0));
        assert_eq!(state.degree(t.holder(l).unwrap()).unwrap(), t.m(l));
    }
    let series = rec.finish();
    for row in &series.rows {
        assert!(row.last_change.iter().all(|&c| c <= row.n));
    }
    assert!(series.rows.windows(2).all(|w| w[0].n < w[1].n));
}

#[test]
fn csv_round_trip_and_validation() {
    let series = run(
        &ModelConfig {
            rule: Rule::Min,
            d: 2,
            horizon: 3_000,
            k: 2,
            seed: 4,
        },
        &mut [],
    )
    .unwrap();
    let mut bytes = Vec::new();
    series.write_csv(&mut bytes).unwrap();
    let back = CheckpointSeries::read_csv(bytes.as_slice()).unwrap();
    assert_eq!(back.k, 2);
    assert_eq!(back.rows, series.rows);

    let text = String::from_utf8(bytes).unwrap();
    assert!(CheckpointSeries::read_csv(text.replacen("M_1", "M_one", 1).as_bytes()).is_err());
    let mut lines: Vec<&str> = text.lines().collect();
    lines.swap(1, 2);
    assert!(CheckpointSeries::read_csv(lines.join("\n").as_bytes()).is_err());
}

#[test]
fn plain_hubs_change_later_than_max_choice_hubs() {
    let median_last_change = |rule| {
        let fractions: Vec<f64> = (0..15)
            .map(|seed| {
                let cfg = ModelConfig {
                    rule,
                    d: 3,
                    horizon: 100_000,
                    k: 1,
                    seed,
                };
                let series = run(&cfg, &mut []).unwrap();
                let last = series.last().unwrap();
                last.last_change[0] as f64 / last.n as f64
            })
            .collect();
        quantile(&fractions, 0.5)
    };
    let plain = median_last_change(Rule::Plain);
    let max = median_last_change(Rule::Max);
    assert!(plain > max, "plain {plain}, max {max}");
}

fn degree_sequences() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(1u32..40, 2..30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn tracker_matches_full_sort(
        k in 1usize..5,
        picks in prop::collection::vec((any::<bool>(), any::<u32>()), 1..60),
    ) {
        let mut t = TopKTracker::new(k);
        let mut degrees: Vec<u32> = Vec::new();
        for (new_vertex, r) in picks {
            let v = if new_vertex || degrees.is_empty() {
                degrees.push(0);
                degrees.len() - 1
            } else {
                r as usize % degrees.len()
            };
            degrees[v] += 1;
            t.update(v as VertexId, degrees[v]).unwrap();

            let reference = sorted_ranks(&degrees);
            prop_assert_eq!(t.m_values(), top_k_sorted(&degrees, k));
            for l in 1..=k {
                prop_assert_eq!(t.holder(l), reference.get(l - 1).map(|e| e.0));
                let m = t.m(l);
                let count = degrees.iter().filter(|&&g| g == m).count() as u32;
                prop_assert_eq!(t.l(l), count);
            }
            prop_assert_eq!(t.l_k(), l_count(&degrees, k).unwrap());
        }
    }
}

proptest! {
    #[test]
    fn increase_probability_factorises_through_f(degrees in degree_sequences(), k in 1usize..4, d in 1u32..8) {
        // only the degree sum matters here, not whether a tree realises it
        let two_n: u32 = degrees.iter().sum();
        prop_assume!(two_n.is_multiple_of(2) && k <= degrees.len());
        let n = two_n as u64 / 2;
        let m = top_k_sorted(&degrees, k);
        let c = c_hat(&m, n, k).unwrap();
        let p = p_increase(&m, 1, n, k, d).unwrap();
        let via_f = m[k - 1] as f64 / two_n as f64 * 2.0 * f_eval(m[k - 1] as f64 / n as f64, c, d);
        prop_assert!((p - via_f).abs() <= 1e-12 * p.abs().max(1e-300), "{} vs {}", p, via_f);
    }

    #[test]
    fn c_hat_is_non_increasing_in_rank(degrees in degree_sequences(), k in 1usize..6) {
        let two_n: u32 = degrees.iter().sum();
        prop_assume!(k <= degrees.len());
        let n = (two_n as u64).div_ceil(2);
        let m = top_k_sorted(&degrees, k);
        let values: Vec<f64> = (1..=k).map(|l| c_hat(&m, n, l).unwrap()).collect();
        prop_assert!(values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(values.iter().all(|&c| c >= 0.0));
    }
}
