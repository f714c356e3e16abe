//! Randomized invariants across the model, dynamics, identification, and
//! episode layers. Networks come from the truth-table generator seeded by
//! proptest, so every case is reproducible from the printed seed.

use bnctrl::agent::{Action, ControlEnvironment};
use bnctrl::bn::parse_bnet;
use bnctrl::BoolExpr;
use bnctrl::config::RunConfig;
use bnctrl::dynamics::{async_step, async_successors, perturb, reach_set, simulate, RecordMode};
use bnctrl::exact::{attractors_exact, ExplicitStg, StationaryDistribution, DEFAULT_STATE_CAP};
use bnctrl::pasip::{pa_size_bound, PaRegistry, PasipConfig, Provenance};
use bnctrl::testsupport::random_network;
use bnctrl::{BooleanNetwork, NetworkState, PartialAssignment, RngStream};
use proptest::prelude::*;

fn net_from(seed: u64, n: usize, k: usize) -> BooleanNetwork {
    random_network(n, k, &mut RngStream::new(seed, "propnet"))
}

fn state_from(n: usize, bits: u64) -> NetworkState {
    NetworkState::from_fn(n, |i| (bits >> (i % 64)) & 1 == 1)
}

proptest! {
    #[test]
    fn bnet_text_roundtrip_is_stable_and_semantics_preserving(
        seed in any::<u64>(),
        n in 1usize..=8,
        k in 1usize..=3,
    ) {
        let net = net_from(seed, n, k);
        let text = net.serialize_bnet();
        let back = parse_bnet(&text).unwrap();
        prop_assert_eq!(back.names(), net.names());
        prop_assert_eq!(back.serialize_bnet(), text);
        for v in 0..n {
            prop_assert_eq!(back.parents(v), net.parents(v));
            prop_assert_eq!(back.is_input(v), net.is_input(v));
        }
        for bits in 0..(1u64 << n) {
            let s = NetworkState::from_u64(n, bits);
            for v in 0..n {
                prop_assert_eq!(back.eval_node(v, &s), net.eval_node(v, &s));
            }
        }
    }

    #[test]
    fn flipping_a_non_parent_never_changes_a_predictor(
        seed in any::<u64>(),
        n in 1usize..=8,
        k in 1usize..=3,
        bits in any::<u64>(),
    ) {
        let net = net_from(seed, n, k);
        let s = state_from(n, bits);
        for v in 0..n {
            let base = net.eval_node(v, &s);
            for u in 0..n {
                if !net.parents(v).contains(&u) {
                    prop_assert_eq!(net.eval_node(v, &perturb(&s, &[u])), base);
                }
            }
        }
    }

    #[test]
    fn perturb_is_an_involution_and_hamming_counts_odd_flips(
        n in 1usize..=70,
        bits in prop::collection::vec(any::<bool>(), 70),
        flips in prop::collection::vec(0usize..70, 0..12),
    ) {
        let flips: Vec<usize> = flips.into_iter().filter(|&f| f < n).collect();
        let s = NetworkState::from_fn(n, |i| bits[i]);
        let once = perturb(&s, &flips);
        prop_assert_eq!(perturb(&once, &flips), s.clone());
        let mut parity = std::collections::BTreeMap::new();
        for &f in &flips {
            *parity.entry(f).or_insert(0u32) ^= 1;
        }
        prop_assert_eq!(once.hamming(&s), parity.values().sum::<u32>());
    }

    #[test]
    fn hex_encoding_roundtrips(
        n in 1usize..=70,
        bits in prop::collection::vec(any::<bool>(), 70),
    ) {
        let s = NetworkState::from_fn(n, |i| bits[i]);
        prop_assert_eq!(NetworkState::from_hex(n, &s.to_hex()).unwrap(), s);
    }

    #[test]
    fn an_async_step_lands_in_the_successor_set(
        seed in any::<u64>(),
        n in 1usize..=8,
        k in 1usize..=3,
        bits in any::<u64>(),
        step_seed in any::<u64>(),
    ) {
        let net = net_from(seed, n, k);
        let s = state_from(n, bits);
        let succ = async_successors(&net, &s);
        let mut rng = RngStream::new(step_seed, "step");
        for _ in 0..8 {
            let t = async_step(&net, &s, &mut rng);
            prop_assert!(succ.binary_search(&t).is_ok());
            prop_assert!(t.hamming(&s) <= 1);
        }
    }

    #[test]
    fn simulation_is_deterministic_and_counts_every_visit(
        seed in any::<u64>(),
        n in 1usize..=8,
        k in 1usize..=3,
        bits in any::<u64>(),
        steps in 0usize..300,
        sim_seed in any::<u64>(),
    ) {
        let net = net_from(seed, n, k);
        let s0 = state_from(n, bits);
        let a = simulate(&net, &s0, steps, &mut RngStream::new(sim_seed, "sim"), RecordMode::Full);
        let b = simulate(&net, &s0, steps, &mut RngStream::new(sim_seed, "sim"), RecordMode::Full);
        prop_assert_eq!(&a.states, &b.states);
        prop_assert_eq!(a.states.len(), steps + 1);
        prop_assert_eq!(a.counts.values().sum::<u64>(), steps as u64 + 1);
        prop_assert_eq!(&a.end, a.states.last().unwrap());
        for w in a.states.windows(2) {
            prop_assert!(w[0].hamming(&w[1]) <= 1);
        }
    }

    #[test]
    fn restriction_pins_inputs_and_preserves_free_dynamics(
        seed in any::<u64>(),
        n in 2usize..=8,
        k in 1usize..=3,
        n_inputs in 1usize..=4,
        pin_mask in any::<u64>(),
        pin_vals in any::<u64>(),
        bits in any::<u64>(),
    ) {
        // Only input nodes may be pinned, so force an identity prefix.
        let base = net_from(seed, n, k);
        let n_inputs = n_inputs.min(n);
        let predictors: Vec<BoolExpr> = (0..n)
            .map(|v| if v < n_inputs { BoolExpr::Var(v) } else { base.predictor(v).clone() })
            .collect();
        let net = BooleanNetwork::from_parts(base.names().to_vec(), predictors).unwrap();
        let pairs: Vec<(usize, bool)> = (0..n_inputs)
            .filter(|i| (pin_mask >> i) & 1 == 1)
            .map(|i| (i, (pin_vals >> i) & 1 == 1))
            .collect();
        let env = PartialAssignment::from_pairs(pairs).unwrap();
        let restricted = net.restrict(&env).unwrap();
        prop_assert_eq!(restricted.n_nodes(), net.n_nodes());
        let mut s = state_from(n, bits);
        for (v, pin) in env.iter() {
            prop_assert_eq!(restricted.eval_node(v, &s), pin);
        }
        env.force(&mut s);
        prop_assert!(env.matches(&s));
        for v in 0..n {
            if env.pin_of(v).is_none() {
                prop_assert_eq!(restricted.eval_node(v, &s), net.eval_node(v, &s));
            }
        }
    }

    #[test]
    fn reach_sets_contain_the_start_and_close_under_successors(
        seed in any::<u64>(),
        n in 1usize..=7,
        k in 1usize..=3,
        bits in any::<u64>(),
    ) {
        let net = net_from(seed, n, k);
        let s = state_from(n, bits);
        let r = reach_set(&net, &s, 1 << 10).unwrap();
        prop_assert!(r.binary_search(&s).is_ok());
        for m in &r {
            for t in async_successors(&net, m) {
                prop_assert!(r.binary_search(&t).is_ok());
            }
        }
    }

    #[test]
    fn threshold_census_of_any_positive_distribution_respects_the_bound(
        weights in prop::collection::vec(0.05f64..1.0, 1..64),
        k in 1u32..=100,
    ) {
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let m = probs.len() as u64;
        let dist = StationaryDistribution::from_parts((0..probs.len() as u32).collect(), probs);
        let census = dist.states_at_threshold(k).len() as u64;
        prop_assert!(
            census <= pa_size_bound(k, Some(m)),
            "census {} exceeds bound {} at k={} m={}",
            census,
            pa_size_bound(k, Some(m)),
            k,
            m
        );
    }

    #[test]
    fn config_text_roundtrips_through_dump_and_parse(
        path in "[a-zA-Z0-9_./-]{0,24}",
        env in "[a-zA-Z0-9_=,]{0,16}",
        out in "[a-zA-Z0-9_./-]{0,24}",
        seed in any::<u64>(),
        cap in any::<usize>(),
        allow_overlap in any::<bool>(),
        steps in any::<u64>(),
        batch in 1usize..100_000,
        gamma in 0.0f64..1.0,
        lr in 1e-9f64..10.0,
        per_alpha in 0.0f64..4.0,
        eps_horizon in any::<u64>(),
        include_inputs in any::<bool>(),
        trajectories in 1u32..100_000,
        burn_in in any::<u64>(),
        dominance_pct in 1u32..=100,
        max_flips in 0usize..64,
        repeats in any::<u32>(),
        with_oracle in any::<bool>(),
    ) {
        let mut cfg = RunConfig::default();
        cfg.model.path = path;
        cfg.model.env = env;
        cfg.model.allow_overlap = allow_overlap;
        cfg.run.seed = seed;
        cfg.run.out = out;
        cfg.run.cap = cap;
        cfg.pasip.trajectories = trajectories;
        cfg.pasip.burn_in = burn_in;
        cfg.pasip.dominance_pct = dominance_pct;
        cfg.train.steps = steps;
        cfg.train.batch = batch;
        cfg.train.gamma = gamma;
        cfg.train.lr = lr;
        cfg.train.per_alpha = per_alpha;
        cfg.train.eps_horizon = eps_horizon;
        cfg.train.include_inputs = include_inputs;
        cfg.oracle.max_flips = max_flips;
        cfg.evaluate.repeats = repeats;
        cfg.evaluate.with_oracle = with_oracle;
        let parsed = RunConfig::parse(&cfg.dump()).unwrap();
        prop_assert_eq!(parsed, cfg);
    }
}

// Episode rollouts settle through the online detector, so keep the case
// count low; the contract checks per case are exhaustive.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn episode_steps_stay_inside_the_reward_and_flip_contract(
        seed in any::<u64>(),
        n in 4usize..=6,
        action_seed in any::<u64>(),
    ) {
        let net = net_from(seed, n, 3);
        let stg = ExplicitStg::build(&net, &PartialAssignment::empty(), DEFAULT_STATE_CAP).unwrap();
        let atts = attractors_exact(&stg);
        let mut registry = PaRegistry::new();
        for a in &atts {
            registry.insert(stg.unpack(a.states[0]), Provenance::Exact, 1.0, 0);
        }
        let anchor = stg.unpack(atts[0].states[0]);
        let target = PartialAssignment::from_pairs([(0usize, !anchor.get(0))]).unwrap();
        let mut env = ControlEnvironment::new(
            net,
            target.clone(),
            registry,
            &PasipConfig::default(),
            true,
            5,
        )
        .unwrap();
        let mut rng = RngStream::new(action_seed, "episode");
        let start = env.reset(&mut rng).unwrap();
        prop_assert!(!target.matches(&start));
        let branches = env.space().branches();
        let options = env.space().n_options();
        for _ in 0..12 {
            let action = Action {
                choices: (0..branches).map(|_| rng.index(options)).collect(),
            };
            let flips = env.space().decode(&action);
            prop_assert!(flips.len() <= branches);
            for &f in &flips {
                prop_assert!(target.pin_of(f).is_none());
            }
            let out = env.step(&action, &mut rng).unwrap();
            let base = out.reward - if out.aligned { 100.0 } else { 0.0 };
            prop_assert!((16.0..=21.0).contains(&base));
            prop_assert_eq!(out.reward.fract(), 0.0);
            prop_assert_eq!(out.reward, 21.0 + if out.aligned { 100.0 } else { 0.0 } - flips.len() as f64);
            prop_assert!(env.registry().contains(&out.next));
            prop_assert_eq!(out.done, out.aligned || env.actions_taken() >= env.max_actions());
            if out.done {
                break;
            }
        }
    }
}

#[test]
fn pa_size_bound_is_monotone_and_tracks_the_reciprocal() {
    for m in [1u64, 2, 5, 19, 20, 21, 64, 1000] {
        let mut prev = u64::MAX;
        for k in 1u32..=100 {
            let b = pa_size_bound(k, Some(m));
            let q = (100 / k) as u64;
            assert!(b == q || b + 1 == q, "k={k} m={m} bound={b}");
            assert!(b <= prev, "bound rose from {prev} to {b} at k={k} m={m}");
            prev = b;
        }
    }
    // Unknown attractor size gets the same refinement as a large one.
    for k in 1u32..=100 {
        let q = (100 / k) as u64;
        let want = if 100 % k == 0 { q - 1 } else { q };
        assert_eq!(pa_size_bound(k, None), want);
        assert_eq!(pa_size_bound(k, Some(u64::MAX)), want);
    }
}
