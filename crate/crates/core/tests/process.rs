use maxchoice::process::{run, step, ModelConfig, Rule, TreeState};
use maxchoice::rng;
use maxchoice::sampler::{DegreeSampler, RepeatedEntryList, VertexId};
use proptest::prelude::*;

fn config(rule: Rule, d: u32, horizon: u64, seed: u64) -> ModelConfig {
    ModelConfig {
        rule,
        d,
        horizon,
        k: 3,
        seed,
    }
}

/// The path 1 - 0 - 2: degrees (2, 1, 1).
fn p2() -> TreeState {
    let mut s = RepeatedEntryList::new();
    s.record_edge(1, 0);
    s.record_edge(0, 2);
    TreeState {
        n: 2,
        sampler: s,
        next_vertex: 3,
    }
}

fn binomial_within_3_sigma(hits: u64, trials: u64, p: f64) -> bool {
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    (hits as f64 / trials as f64 - p).abs() <= 3.0 * sigma
}

#[test]
fn init_is_deterministic() {
    let a = TreeState::init();
    assert_eq!(a, TreeState::init());
    assert_eq!(a.sampler.degrees(), &[1, 1]);
    assert_eq!(a.sampler.total_weight(), 2);
}

#[test]
fn first_step_picks_either_endpoint_evenly() {
    let trials = 100_000;
    let mut rng = rng::from_seed(10);
    for d in [1, 2, 3, 5] {
        let cfg = config(Rule::Max, d, 2, 0);
        let hits = (0..trials)
            .filter(|_| step(&mut TreeState::init(), &cfg, &mut rng).unwrap().chosen == 0)
            .count() as u64;
        assert!(binomial_within_3_sigma(hits, trials, 0.5), "d = {d}: {hits}");
    }
}

#[test]
fn hub_of_p2_is_chosen_seven_times_in_eight() {
    let trials = 100_000;
    let cfg = config(Rule::Max, 3, 3, 0);
    let mut rng = rng::from_seed(11);
    let hits = (0..trials)
        .filter(|_| step(&mut p2(), &cfg, &mut rng).unwrap().chosen == 0)
        .count() as u64;
    assert!(binomial_within_3_sigma(hits, trials, 7.0 / 8.0), "{hits}");
}

#[test]
fn plain_rule_attaches_proportionally_to_degree() {
    let trials = 100_000;
    let cfg = config(Rule::Plain, 3, 3, 0);
    let mut rng = rng::from_seed(12);
    let hits = (0..trials)
        .filter(|_| step(&mut p2(), &cfg, &mut rng).unwrap().chosen == 0)
        .count() as u64;
    assert!(binomial_within_3_sigma(hits, trials, 0.5), "{hits}");
}

#[test]
fn horizon_three_over_many_seeds() {
    let seeds = 100_000u64;
    let hits = (0..seeds)
        .filter(|&seed| {
            let series = run(&config(Rule::Max, 3, 3, seed), &mut []).unwrap();
            series.last().unwrap().m[0] == 3
        })
        .count() as u64;
    assert!(binomial_within_3_sigma(hits, seeds, 7.0 / 8.0), "{hits}");
}

#[test]
fn horizon_two_always_has_a_degree_two_vertex() {
    for seed in 0..200 {
        let series = run(&config(Rule::Max, 3, 2, seed), &mut []).unwrap();
        assert_eq!(series.last().unwrap().m[0], 2);
    }
}

#[test]
fn plain_and_max_with_one_candidate_replay_identically() {
    for seed in 0..20 {
        let plain = run(&config(Rule::Plain, 7, 20_000, seed), &mut []).unwrap();
        let max1 = run(&config(Rule::Max, 1, 20_000, seed), &mut []).unwrap();
        assert_eq!(plain, max1);
    }
}

#[test]
fn same_seed_gives_identical_csv_bytes() {
    let bytes = |seed| {
        let series = run(&config(Rule::Max, 3, 100_000, seed), &mut []).unwrap();
        let mut out = Vec::new();
        series.write_csv(&mut out).unwrap();
        out
    };
    assert_eq!(bytes(21), bytes(21));
    assert_ne!(bytes(21), bytes(22));
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(run(&config(Rule::Max, 0, 10, 0), &mut []).is_err());
    assert!(run(&config(Rule::Max, 3, 0, 0), &mut []).is_err());
    let mut cfg = config(Rule::Max, 3, 10, 0);
    cfg.k = 0;
    assert!(run(&cfg, &mut []).is_err());
}

fn rules() -> impl Strategy<Value = Rule> {
    prop_oneof![Just(Rule::Max), Just(Rule::Min), Just(Rule::Plain)]
}

proptest! {
    #[test]
    fn steps_keep_the_tree_shape_and_honour_the_rule(
        rule in rules(),
        d in 1u32..6,
        steps in 1usize..300,
        seed in any::<u64>(),
    ) {
        let cfg = config(rule, d, steps as u64 + 1, seed);
        let mut rng = rng::from_seed(seed);
        let mut state = TreeState::init();
        for _ in 0..steps {
            let before = state.sampler.degrees().to_vec();
            let rec = step(&mut state, &cfg, &mut rng).unwrap();

            prop_assert_eq!(rec.candidates.len() as u32, cfg.effective_d());
            prop_assert!(rec.candidates.contains(&rec.chosen));
            let chosen_before = before[rec.chosen as usize];
            prop_assert_eq!(rec.chosen_degree, chosen_before + 1);
            for &c in &rec.candidates {
                match rule {
                    Rule::Max | Rule::Plain => prop_assert!(chosen_before >= before[c as usize]),
                    Rule::Min => prop_assert!(chosen_before <= before[c as usize]),
                }
            }
            let tied = rec.candidates.iter().filter(|&&c| before[c as usize] == chosen_before).count();
            prop_assert_eq!(rec.tie_size as usize, tied);

            // exactly one new leaf, everything else unchanged but the chosen vertex
            prop_assert_eq!(state.vertex_count() as u64, state.n + 1);
            prop_assert_eq!(state.sampler.total_weight(), 2 * state.n);
            prop_assert_eq!(state.degree(rec.new_vertex).unwrap(), 1);
            for (v, &g) in before.iter().enumerate() {
                let expected = if v as VertexId == rec.chosen { g + 1 } else { g };
                prop_assert_eq!(state.degree(v as VertexId).unwrap(), expected);
            }
        }
    }
}
