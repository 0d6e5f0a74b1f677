use super::*;
use crate::milp_builder::{build_milp, FlowModel, Sense};
use crate::pcm_model::random_small;
use crate::policy::{choose, forward, grad_log_prob, SelectMode, N_FEATURES};
use rand::Rng;

fn small_problems(n: u64) -> Vec<(String, MilpProblem)> {
    (0..n)
        .map(|s| (format!("small-{s}"), build_milp(&random_small(s, 2, 3), FlowModel::Transport).unwrap()))
        .collect()
}

/// One decision between two fixed rows; action 0 costs nothing, action 1
/// twice the baseline, so the returns are +1 and -1.
struct Bandit {
    feats: CandidateFeatures,
    cost: [u64; 2],
}

impl Bandit {
    fn new(cost: [u64; 2]) -> Self {
        let mut a = [0.0; N_FEATURES];
        let mut b = [0.0; N_FEATURES];
        a[0] = 0.8;
        a[5] = -0.3;
        b[1] = 0.6;
        b[7] = 0.4;
        Self {
            feats: CandidateFeatures::from_rows(&[a, b]),
            cost,
        }
    }
}

impl Environment for Bandit {
    fn n_problems(&self) -> usize {
        4
    }

    fn baseline(&self, _problem: usize) -> f64 {
        1000.0
    }

    fn rollout(&self, _problem: usize, net: &Arc<PolicyNetwork>, seed: u64) -> Result<Rollout> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = choose(&forward(net, &self.feats), SelectMode::Sample(&mut rng));
        Ok(Rollout {
            steps: vec![Step {
                features: self.feats.clone(),
                action: a,
            }],
            work_units: self.cost[a],
            truncated: false,
        })
    }
}

#[test]
fn root_solved_problem_has_empty_trajectory() {
    let prob = MilpProblem::from_parts(
        vec![1.0, 2.0],
        vec![0.0, 0.0],
        vec![1.0, 5.0],
        vec![true, false],
        vec![(vec![(0, 1.0)], Sense::Ge, 1.0)],
    )
    .unwrap();
    let store = collect_expert(&[("root".into(), prob)], ExpertRelpscost::default(), Limits::default()).unwrap();
    let t = &store.trajectories[0];
    assert!(t.steps.is_empty());
    assert!(t.optimal);
    assert_eq!(t.baseline, t.work_units as f64);
    assert!(t.baseline > 0.0);
}

#[test]
fn recorded_actions_replay_within_candidate_counts() {
    let store = collect_expert(&small_problems(6), ExpertRelpscost::default(), Limits::default()).unwrap();
    assert!(store.trajectories.iter().any(|t| !t.steps.is_empty()));
    for t in &store.trajectories {
        t.validate().unwrap();
        for s in &t.steps {
            assert!(s.action < s.features.n_rows());
        }
    }
}

#[test]
fn collection_is_byte_reproducible_and_round_trips() {
    let problems = small_problems(4);
    let a = collect_expert(&problems, ExpertRelpscost::default(), Limits::default()).unwrap();
    let b = collect_expert(&problems, ExpertRelpscost::default(), Limits::default()).unwrap();
    assert_eq!(a.to_jsonl().unwrap(), b.to_jsonl().unwrap());
    assert_eq!(a.digest(), b.digest());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.jsonl");
    a.save(&path).unwrap();
    assert_eq!(TrajectoryStore::load(&path).unwrap(), a);
}

#[test]
fn malformed_store_line_is_rejected() {
    let bad = r#"{"problem_id":"x","steps":[{"features":{"data":[0.0]},"action":0}],"work_units":1,"baseline":1.0,"optimal":true}"#;
    assert!(TrajectoryStore::from_jsonl(bad).is_err());
    assert!(TrajectoryStore::from_jsonl("not json").is_err());
}

fn synthetic_store(n: usize, seed: u64) -> TrajectoryStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = (0..n)
        .map(|_| {
            let rows = rng.random_range(2..6);
            let data: Vec<f64> = (0..rows * N_FEATURES).map(|_| rng.random_range(-1.0..1.0)).collect();
            // The "expert" picks the row with the largest first feature.
            let action = (0..rows)
                .max_by(|&a, &b| data[a * N_FEATURES].total_cmp(&data[b * N_FEATURES]))
                .unwrap();
            Step {
                features: CandidateFeatures { data },
                action,
            }
        })
        .collect();
    TrajectoryStore {
        trajectories: vec![Trajectory {
            problem_id: "synthetic".into(),
            steps,
            work_units: 100,
            baseline: 100.0,
            optimal: true,
        }],
    }
}

#[test]
fn memorizes_a_single_repeated_pair() {
    let one = synthetic_store(1, 1).trajectories[0].steps[0].clone();
    let store = TrajectoryStore {
        trajectories: vec![Trajectory {
            problem_id: "one".into(),
            steps: vec![one; 32],
            work_units: 1,
            baseline: 1.0,
            optimal: true,
        }],
    };
    let cfg = IlConfig {
        epochs: 200,
        lr: 0.05,
        ..IlConfig::default()
    };
    let (_, curve) = train_il(&store, &cfg).unwrap();
    assert!(*curve.last().unwrap() < 0.01, "{:?}", curve.last());
}

#[test]
fn default_learning_rate_descends() {
    let store = synthetic_store(200, 2);
    let (_, curve) = train_il(&store, &IlConfig::default()).unwrap();
    assert_eq!(curve.len(), 50);
    assert!(curve.last().unwrap() <= &curve[0]);
}

#[test]
fn il_gradient_is_negative_mean_score() {
    let store = synthetic_store(12, 3);
    let net = PolicyNetwork::init(4);
    let pairs = store.pairs(false);
    let (_, g) = il_loss_and_grad(&net, &pairs).unwrap();
    let mut mean = vec![0.0; g.len()];
    for &(f, a) in &pairs {
        for (m, v) in mean.iter_mut().zip(grad_log_prob(&net, f, a).unwrap()) {
            *m += v / pairs.len() as f64;
        }
    }
    for (x, y) in g.iter().zip(&mean) {
        assert!((x + y).abs() <= 1e-12 * y.abs().max(1.0));
    }
}

#[test]
fn empty_store_and_bad_config_are_errors() {
    assert!(matches!(train_il(&TrajectoryStore::default(), &IlConfig::default()), Err(Error::EmptyStore)));
    let cfg = IlConfig {
        lr: 0.0,
        ..IlConfig::default()
    };
    assert!(matches!(train_il(&synthetic_store(3, 0), &cfg), Err(Error::InvalidConfig(_))));
}

#[test]
fn reward_examples_and_scaling() {
    assert_eq!(rl_reward(1000.0, 1000.0, 1.0), 0.0);
    assert_eq!(rl_reward(500.0, 1000.0, 1.0), 0.5);
    assert_eq!(rl_reward(1500.0, 1000.0, 1.0), -0.5);
    assert_eq!(rl_reward(700.0, 1000.0, 2.0), 2.0 * rl_reward(700.0, 1000.0, 1.0));
}

#[test]
fn zero_returns_leave_weights_bit_identical() {
    let env = Bandit::new([1000, 1000]);
    let init = PolicyNetwork::init(5);
    let (net, curve) = train_rl(&env, &init, &RlConfig { step: 0.1, ..RlConfig::default() }).unwrap();
    assert_eq!(net.params.iter().map(|p| p.to_bits()).collect::<Vec<_>>(), init.params.iter().map(|p| p.to_bits()).collect::<Vec<_>>());
    assert!(curve.iter().all(|c| c.mean_return == 0.0));
}

#[test]
fn bandit_probability_rises_monotonically() {
    let env = Bandit::new([0, 2000]);
    let mut net = PolicyNetwork::init(6);
    let cfg = RlConfig {
        epochs: 1,
        iterations: 1,
        batch_size: 4,
        step: 0.05,
        ..RlConfig::default()
    };
    let mut p = forward(&net, &env.feats)[0];
    let start = p;
    for i in 0..50 {
        let (next, _) = train_rl(&env, &net, &RlConfig { seed: i, ..cfg }).unwrap();
        net = next;
        let q = forward(&net, &env.feats)[0];
        assert!(q > p, "iteration {i}: {q} <= {p}");
        p = q;
    }
    assert!(p > start + 0.1);
}

#[test]
fn equal_returns_give_scaled_il_direction() {
    // Every episode returns +0.5 with a fixed step list.
    struct Fixed(Vec<Step>);
    impl Environment for Fixed {
        fn n_problems(&self) -> usize {
            1
        }
        fn baseline(&self, _: usize) -> f64 {
            1000.0
        }
        fn rollout(&self, _: usize, _: &Arc<PolicyNetwork>, _: u64) -> Result<Rollout> {
            Ok(Rollout {
                steps: self.0.clone(),
                work_units: 500,
                truncated: false,
            })
        }
    }
    let store = synthetic_store(5, 7);
    let env = Fixed(store.trajectories[0].steps.clone());
    let init = PolicyNetwork::init(8);
    let cfg = RlConfig {
        epochs: 1,
        iterations: 1,
        batch_size: 1,
        step: 1e-3,
        ..RlConfig::default()
    };
    let (net, _) = train_rl(&env, &init, &cfg).unwrap();
    let (_, il) = il_loss_and_grad(&init, &store.pairs(false)).unwrap();
    for ((after, before), g) in net.params.iter().zip(&init.params).zip(&il) {
        let expect = -0.5 * cfg.step * g;
        assert!((after - before - expect).abs() <= 1e-12);
    }
}

#[test]
fn recycle_schedule_contract() {
    let mut all = recycle_schedule(8, 0, 0, 8, 1);
    all.sort_unstable();
    assert_eq!(all, (0..8).collect::<Vec<_>>());

    let e0: Vec<usize> = (0..4).flat_map(|i| recycle_schedule(12, 0, i, 3, 9)).collect();
    let e1: Vec<usize> = (0..4).flat_map(|i| recycle_schedule(12, 1, i, 3, 9)).collect();
    assert_ne!(e0, e1);
    for e in [&e0, &e1] {
        let mut s = e.clone();
        s.sort_unstable();
        assert_eq!(s, (0..12).collect::<Vec<_>>());
    }

    // Counts per epoch are within one of each other.
    for (pool, iters, batch) in [(5, 3, 4), (7, 2, 3), (10, 7, 3)] {
        let mut counts = vec![0usize; pool];
        for i in 0..iters {
            for p in recycle_schedule(pool, 2, i, batch, 4) {
                counts[p] += 1;
            }
        }
        let lo = iters * batch / pool;
        let hi = (iters * batch).div_ceil(pool);
        assert!(counts.iter().all(|&c| c == lo || c == hi), "{counts:?}");
    }
}

#[test]
fn rl_training_is_reproducible() {
    let problems = small_problems(3);
    let store = collect_expert(&problems, ExpertRelpscost::default(), Limits::default()).unwrap();
    let env = PcmEnvironment::new(&problems, &store, Limits::with_work(20_000)).unwrap();
    let init = PolicyNetwork::init(11);
    let cfg = RlConfig {
        epochs: 1,
        iterations: 2,
        batch_size: 3,
        step: 1e-2,
        ..RlConfig::default()
    };
    let (a, ca) = train_rl(&env, &init, &cfg).unwrap();
    let (b, cb) = train_rl(&env, &init, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(ca, cb);
    assert!(matches!(train_rl(&env, &init, &RlConfig { gamma: 0.9, ..cfg }), Err(Error::InvalidConfig(_))));
}
