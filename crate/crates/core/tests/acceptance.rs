//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcmbranch::bnb_engine::{solve, BranchingRule, Limits, SolveState, SolveStatus};
use pcmbranch::branching_rules::{ExpertRelpscost, MostFractional, Pseudocost, StrongBranching};
use pcmbranch::harness::{bench, bound_trace_csv, race, RaceMode, RuleSpec, DEFAULT_QUANTUM};
use pcmbranch::milp_builder::{build_milp, check_feasibility, write_mps, FlowModel, MilpProblem};
use pcmbranch::pcm_model::{generate_instance, ieee118_template, pjm5_base, random_small, PcmInstance};
use pcmbranch::policy::{
    choose, forward, grad_log_prob, softmax, to_bytes, CandidateFeatures, PolicyNetwork, PolicyRule, SelectMode, Step,
    LAYERS, N_FEATURES,
};
use pcmbranch::training::{
    collect_expert, imitation_accuracy, train_il, train_rl, Environment, IlConfig, PcmEnvironment, RlConfig, Rollout,
    TrajectoryStore,
};

use common::{close, enumerate_optimum};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Every incumbent produced during the run, for the feasibility check.
#[derive(Default)]
struct Incumbents(Vec<(String, PcmInstance, SolveState)>);

impl Incumbents {
    fn add(&mut self, label: String, inst: &PcmInstance, st: &SolveState) {
        if st.incumbent.is_some() {
            self.0.push((label, inst.clone(), st.clone()));
        }
    }
}

fn five_rules(net: &Arc<PolicyNetwork>) -> Vec<(&'static str, Box<dyn BranchingRule>)> {
    vec![
        ("mostfrac", Box::new(MostFractional)),
        ("pscost", Box::new(Pseudocost)),
        ("strong", Box::new(StrongBranching::default())),
        ("expert", Box::new(ExpertRelpscost::default())),
        ("policy", Box::new(PolicyRule::greedy(Arc::clone(net)))),
    ]
}

fn c1_oracle(inc: &mut Incumbents) -> Outcome {
    let net = Arc::new(PolicyNetwork::init(0));
    let mut solves = 0;
    let mut feasible = 0;
    for seed in 0..50u64 {
        let n_gen = 2 + (seed % 2) as usize;
        let horizon = 2 + (seed % 3) as usize;
        let inst = random_small(seed, n_gen, horizon);
        let prob = build_milp(&inst, FlowModel::Transport).map_err(|e| e.to_string())?;
        check(prob.n_binary() <= 14, format!("seed {seed}: {} binaries", prob.n_binary()))?;
        let oracle = enumerate_optimum(&prob);
        feasible += usize::from(oracle.is_some());
        for (name, mut rule) in five_rules(&net) {
            let st = solve(&prob, rule.as_mut(), Limits::default()).map_err(|e| e.to_string())?;
            solves += 1;
            match oracle {
                Some(z) => {
                    check(st.is_optimal(), format!("seed {seed} {name}: status {}", st.status.as_str()))?;
                    let got = st.objective().unwrap_or(f64::NAN);
                    check(close(got, z, 1e-6), format!("seed {seed} {name}: {got} vs enumeration {z}"))?;
                }
                None => check(
                    st.status == SolveStatus::Infeasible,
                    format!("seed {seed} {name}: enumeration infeasible, solver {}", st.status.as_str()),
                )?,
            }
            inc.add(format!("small-{seed}/{name}"), &inst, &st);
        }
    }
    Ok(format!("{solves} solves on 50 instances ({feasible} feasible) match enumeration"))
}

fn c2_sizing() -> Outcome {
    let mut parts = Vec::new();
    for (t, cont, bin) in [(336, 5040, 1680), (720, 10800, 3600), (1440, 21600, 7200)] {
        let p = build_milp(&pjm5_base(t).map_err(|e| e.to_string())?, FlowModel::Transport).map_err(|e| e.to_string())?;
        check(
            (p.n_continuous(), p.n_binary()) == (cont, bin),
            format!("T={t}: ({}, {}) != ({cont}, {bin})", p.n_continuous(), p.n_binary()),
        )?;
        // 5T balance + 10T capacity + 20(T-1) ramp/min-time + 2T reserve + 2T renewable
        let rows = 39 * t - 20;
        check(p.n_rows() == rows, format!("T={t}: {} rows, expected {rows}", p.n_rows()))?;
        parts.push(format!("T={t}:({cont},{bin},{rows} rows)"));
    }
    let p = build_milp(&ieee118_template(48).map_err(|e| e.to_string())?, FlowModel::DcAngle).map_err(|e| e.to_string())?;
    check(
        (p.n_continuous(), p.n_binary()) == (17376, 2592),
        format!("118-bus T=48: ({}, {})", p.n_continuous(), p.n_binary()),
    )?;
    // 118*48 balance + 2*54*48 capacity + 4*54*47 + 2*48 reserve + 2*48 renewable
    // + 48 angle references + 186*48 flow definitions
    let rows = 118 * 48 + 2 * 54 * 48 + 4 * 54 * 47 + 2 * 48 + 2 * 48 + 48 + 186 * 48;
    check(p.n_rows() == rows, format!("118-bus: {} rows, expected {rows}", p.n_rows()))?;
    parts.push(format!("118-bus T=48:(17376,2592,{rows} rows)"));
    Ok(parts.join(" "))
}

fn c3_feasibility(inc: &Incumbents) -> Outcome {
    check(!inc.0.is_empty(), "no incumbents collected")?;
    let mut worst: f64 = 0.0;
    for (label, inst, st) in &inc.0 {
        let sched = st.incumbent.as_ref().unwrap();
        let rep = check_feasibility(inst, sched, 1e-6).map_err(|e| e.to_string())?;
        worst = worst.max(rep.max_violation());
        check(rep.passed(), format!("{label}: {:?}", rep.worst_family()))?;
    }
    Ok(format!("{} incumbents feasible, max violation {worst:.2e}", inc.0.len()))
}

/// Forward pass written out from the layer table, independent of the crate's.
/// Also returns the smallest |pre-activation| over hidden units.
fn reference_log_prob(params: &[f64], feats: &CandidateFeatures, action: usize) -> (f64, f64) {
    let mut margin = f64::INFINITY;
    let logits: Vec<f64> = (0..feats.n_rows())
        .map(|r| {
            let mut x = feats.row(r).to_vec();
            let mut off = 0;
            for l in 0..3 {
                let (n_in, n_out) = (LAYERS[l], LAYERS[l + 1]);
                let (w, b) = (&params[off..off + n_in * n_out], &params[off + n_in * n_out..]);
                x = (0..n_out)
                    .map(|o| {
                        let s = (0..n_in).map(|k| w[o * n_in + k] * x[k]).sum::<f64>() + b[o];
                        if l < 2 {
                            margin = margin.min(s.abs());
                            s.max(0.0)
                        } else {
                            s
                        }
                    })
                    .collect();
                off += n_in * n_out + n_out;
            }
            x[0]
        })
        .collect();
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (logits[action] - m - logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln(), margin)
}

fn random_net(rng: &mut ChaCha8Rng) -> PolicyNetwork {
    let mut net = PolicyNetwork::init(rng.random());
    for p in &mut net.params {
        *p += rng.random_range(-0.1..0.1);
    }
    net
}

fn random_feats(rng: &mut ChaCha8Rng, rows: usize) -> CandidateFeatures {
    CandidateFeatures {
        data: (0..rows * N_FEATURES).map(|_| rng.random_range(-1.0..1.0)).collect(),
    }
}

fn c4_gradient() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut redrawn = 0;
    let mut checked = 0;
    while checked < 20 {
        let net = random_net(&mut rng);
        let n = rng.random_range(2..7);
        let feats = random_feats(&mut rng, n);
        let a = rng.random_range(0..n);
        // Central differences are meaningless across a ReLU corner.
        if reference_log_prob(&net.params, &feats, a).1 < 1e-4 {
            redrawn += 1;
            continue;
        }
        checked += 1;
        let g = grad_log_prob(&net, &feats, a).map_err(|e| e.to_string())?;
        let mut p = net.params.clone();
        let mut num = vec![0.0; p.len()];
        for k in 0..p.len() {
            let orig = p[k];
            p[k] = orig + h;
            let up = reference_log_prob(&p, &feats, a).0;
            p[k] = orig - h;
            let down = reference_log_prob(&p, &feats, a).0;
            p[k] = orig;
            num[k] = (up - down) / (2.0 * h);
        }
        let diff = g.iter().zip(&num).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let scale = num.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-8);
        worst = worst.max(diff / scale);
    }
    check(worst < 1e-4, format!("relative error {worst:.2e}"))?;

    let mut score_worst: f64 = 0.0;
    for _ in 0..20 {
        let net = random_net(&mut rng);
        let n = rng.random_range(1..8);
        let feats = random_feats(&mut rng, n);
        let probs = forward(&net, &feats);
        let mut total = vec![0.0; net.params.len()];
        for (a, &pa) in probs.iter().enumerate() {
            for (t, g) in total.iter_mut().zip(grad_log_prob(&net, &feats, a).map_err(|e| e.to_string())?) {
                *t += pa * g;
            }
        }
        score_worst = total.iter().fold(score_worst, |m, v| m.max(v.abs()));
    }
    check(score_worst <= 1e-8, format!("expected score {score_worst:.2e}"))?;
    Ok(format!(
        "max relative FD error {worst:.2e} over 20 triples ({redrawn} redrawn near a ReLU corner), max |E[score]| {score_worst:.2e}"
    ))
}

fn c5_softmax() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..200 {
        let n = rng.random_range(1..20);
        let scale = [1.0, 30.0, 700.0][trial % 3];
        let logits: Vec<f64> = (0..n).map(|_| rng.random_range(-scale..scale)).collect();
        let p = softmax(&logits);
        check((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9, "probabilities do not sum to 1")?;
        check(p.iter().all(|v| v.is_finite() && *v >= 0.0), "non-finite probability")?;
        let c = rng.random_range(-100.0..100.0);
        let shifted = softmax(&logits.iter().map(|l| l + c).collect::<Vec<_>>());
        check(p.iter().zip(&shifted).all(|(a, b)| (a - b).abs() <= 1e-12), "not shift invariant")?;

        let net = random_net(&mut rng);
        let feats = random_feats(&mut rng, n);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let permuted = CandidateFeatures {
            data: perm.iter().flat_map(|&i| feats.row(i).to_vec()).collect(),
        };
        let (pa, pb) = (forward(&net, &feats), forward(&net, &permuted));
        check(
            perm.iter().enumerate().all(|(k, &i)| (pb[k] - pa[i]).abs() <= 1e-12),
            "policy not permutation equivariant",
        )?;
    }
    Ok("200 random cases: sum, shift invariance, permutation equivariance".into())
}

fn pjm_family(seeds: std::ops::Range<u64>, horizon: usize) -> Vec<(String, PcmInstance, MilpProblem)> {
    let base = pjm5_base(horizon).unwrap();
    seeds
        .map(|s| {
            let inst = generate_instance(&base, 0.05, s).unwrap();
            let prob = build_milp(&inst, FlowModel::Transport).unwrap();
            (format!("pjm24-{s}"), inst, prob)
        })
        .collect()
}

struct IlArtifacts {
    train: Vec<(String, MilpProblem)>,
    store: TrajectoryStore,
    net: PolicyNetwork,
}

fn c6_imitation(out: &mut Option<IlArtifacts>) -> Outcome {
    let fam = pjm_family(100..104, 24);
    let problems: Vec<(String, MilpProblem)> = fam.iter().map(|(id, _, p)| (id.clone(), p.clone())).collect();
    let store = collect_expert(&problems, ExpertRelpscost::default(), Limits::default()).map_err(|e| e.to_string())?;
    // Train on the first three solves, evaluate on the last.
    let (train_t, test_t) = store.trajectories.split_at(3);
    let train_store = TrajectoryStore {
        trajectories: train_t.to_vec(),
    };
    let test_store = TrajectoryStore {
        trajectories: test_t.to_vec(),
    };
    let n_train = train_store.n_pairs();
    check(n_train >= 200, format!("only {n_train} training pairs"))?;
    let (net, curve) = train_il(&train_store, &IlConfig::default()).map_err(|e| e.to_string())?;
    let test = test_store.pairs(false);
    check(!test.is_empty(), "empty held-out set")?;
    let acc = imitation_accuracy(&net, &test);
    let mean_cands = test.iter().map(|(f, _)| f.n_rows() as f64).sum::<f64>() / test.len() as f64;
    let random = 1.0 / mean_cands;
    let (first, last) = (curve[0], *curve.last().unwrap());
    let msg = format!(
        "{n_train} train / {} held-out pairs, accuracy {acc:.3} vs random {random:.3} ({:.1}x), loss {first:.3} -> {last:.3}",
        test.len(),
        acc / random
    );
    *out = Some(IlArtifacts {
        train: problems[..3].to_vec(),
        store: train_store,
        net,
    });
    check(acc >= 3.0 * random && last < first, msg.clone())?;
    Ok(msg)
}

/// Two fixed candidate rows; row 0 costs nothing, row 1 twice the baseline.
struct Bandit {
    feats: CandidateFeatures,
}

impl Environment for Bandit {
    fn n_problems(&self) -> usize {
        4
    }
    fn baseline(&self, _: usize) -> f64 {
        1000.0
    }
    fn rollout(&self, _: usize, net: &Arc<PolicyNetwork>, seed: u64) -> pcmbranch::Result<Rollout> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = choose(&forward(net, &self.feats), SelectMode::Sample(&mut rng));
        Ok(Rollout {
            steps: vec![Step {
                features: self.feats.clone(),
                action: a,
            }],
            work_units: [0, 2000][a],
            truncated: false,
        })
    }
}

fn c7_bandit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let env = Bandit {
        feats: random_feats(&mut rng, 2),
    };
    let cfg = RlConfig {
        epochs: 1,
        iterations: 1,
        batch_size: 4,
        step: 0.05,
        ..RlConfig::default()
    };
    let mut net = PolicyNetwork::init(12);
    let start = forward(&net, &env.feats)[0];
    let mut p = start;
    for i in 0..50u64 {
        net = train_rl(&env, &net, &RlConfig { seed: i, ..cfg }).map_err(|e| e.to_string())?.0;
        let q = forward(&net, &env.feats)[0];
        check(q > p, format!("iteration {i}: p fell from {p} to {q}"))?;
        p = q;
    }

    struct Flat(CandidateFeatures);
    impl Environment for Flat {
        fn n_problems(&self) -> usize {
            2
        }
        fn baseline(&self, _: usize) -> f64 {
            500.0
        }
        fn rollout(&self, _: usize, net: &Arc<PolicyNetwork>, seed: u64) -> pcmbranch::Result<Rollout> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = choose(&forward(net, &self.0), SelectMode::Sample(&mut rng));
            Ok(Rollout {
                steps: vec![Step {
                    features: self.0.clone(),
                    action: a,
                }],
                work_units: 500,
                truncated: false,
            })
        }
    }
    let init = PolicyNetwork::init(13);
    let (after, _) = train_rl(&Flat(env.feats.clone()), &init, &RlConfig { step: 0.5, ..RlConfig::default() })
        .map_err(|e| e.to_string())?;
    let bits = |n: &PolicyNetwork| n.params.iter().map(|p| p.to_bits()).collect::<Vec<_>>();
    check(bits(&after) == bits(&init), "zero returns moved the weights")?;
    Ok(format!("favored probability {start:.3} -> {p:.3}, strictly increasing; zero-return update bit-identical"))
}

fn c8_race(il: &IlArtifacts, inc: &mut Incumbents) -> Outcome {
    let eval = pjm_family(1000..1020, 24);
    let alpha = Arc::new(il.net.clone());
    let env = PcmEnvironment::new(&il.train, &il.store, Limits::with_work(400_000)).map_err(|e| e.to_string())?;
    let cfg = RlConfig {
        epochs: 1,
        iterations: 2,
        batch_size: 3,
        ..RlConfig::default()
    };
    let (beta, curve) = train_rl(&env, &alpha, &cfg).map_err(|e| e.to_string())?;
    let beta = Arc::new(beta);

    let problems: Vec<(String, MilpProblem)> = eval.iter().map(|(id, _, p)| (id.clone(), p.clone())).collect();
    let rules = vec![
        RuleSpec::Expert,
        RuleSpec::Policy {
            label: "alpha".into(),
            net: Arc::clone(&alpha),
        },
        RuleSpec::Race {
            label: "race".into(),
            alpha: Arc::clone(&alpha),
            beta: Arc::clone(&beta),
        },
    ];
    let rep = bench(&problems, &rules, Limits::default(), None).map_err(|e| e.to_string())?;
    check(rep.rows.iter().all(|r| r.status == "optimal"), "a solve did not reach optimality")?;
    check(rep.max_objective_spread() <= 1e-6 * 1e5, format!("objective spread {}", rep.max_objective_spread()))?;

    // Race winners again in both modes for the objective and feasibility checks.
    let mut max_rel: f64 = 0.0;
    for (k, (id, inst, prob)) in eval.iter().enumerate() {
        let expert_obj = rep.rows[3 * k].objective.unwrap();
        for mode in [RaceMode::default(), RaceMode::Concurrent] {
            let r = race(prob, &alpha, &beta, Limits::default(), mode).map_err(|e| e.to_string())?;
            let obj = r.objective().ok_or("race without incumbent")?;
            max_rel = max_rel.max((obj - expert_obj).abs() / expert_obj.abs().max(1.0));
            inc.add(format!("{id}/race"), inst, r.winner_state());
        }
    }
    check(max_rel <= 1e-6, format!("race objective differs from expert by {max_rel:.2e}"))?;
    for (id, inst, prob) in eval.iter().take(5) {
        let st = solve(prob, &mut ExpertRelpscost::default(), Limits::default()).map_err(|e| e.to_string())?;
        inc.add(format!("{id}/expert"), inst, &st);
    }

    let s = |i: usize| &rep.summary[i];
    let (expert, greedy, raced) = (s(0).mean_work, s(1).mean_work, s(2).mean_work);
    let msg = format!(
        "mean work: race {raced:.0}, greedy alpha {greedy:.0}, expert {expert:.0}; race speedup vs expert mean {:.2} \
         (min {:.2}, median {:.2}, max {:.2}), variance ratio {:.3}; RL mean return {:.3}",
        s(2).mean_speedup.unwrap_or(f64::NAN),
        s(2).min_speedup.unwrap_or(f64::NAN),
        s(2).median_speedup.unwrap_or(f64::NAN),
        s(2).max_speedup.unwrap_or(f64::NAN),
        s(2).variance_ratio.unwrap_or(f64::NAN),
        curve.iter().map(|c| c.mean_return).sum::<f64>() / curve.len() as f64,
    );
    check(raced <= greedy + DEFAULT_QUANTUM as f64, msg.clone())?;
    check(raced <= 1.10 * expert, msg.clone())?;
    Ok(msg)
}

/// Every artifact of a small end-to-end pipeline, as bytes.
fn pipeline_bytes() -> Vec<(&'static str, Vec<u8>)> {
    let fam = pjm_family(40..43, 6);
    let problems: Vec<(String, MilpProblem)> = fam.iter().map(|(id, _, p)| (id.clone(), p.clone())).collect();
    let store = collect_expert(&problems, ExpertRelpscost::default(), Limits::default()).unwrap();
    let (il, _) = train_il(&store, &IlConfig { epochs: 5, ..IlConfig::default() }).unwrap();
    let env = PcmEnvironment::new(&problems, &store, Limits::with_work(100_000)).unwrap();
    let (rl, curve) = train_rl(&env, &il, &RlConfig { epochs: 1, iterations: 2, batch_size: 2, step: 1e-2, ..RlConfig::default() }).unwrap();
    let (il, rl) = (Arc::new(il), Arc::new(rl));

    let mut traces = String::new();
    for spec in [RuleSpec::MostFrac, RuleSpec::Pscost, RuleSpec::Strong, RuleSpec::Expert] {
        traces.push_str(&bound_trace_csv(&spec.run(&problems[0].1, Limits::default()).unwrap(), false));
    }
    let r = race(&problems[1].1, &il, &rl, Limits::default(), RaceMode::default()).unwrap();
    traces.push_str(&bound_trace_csv(r.winner_state(), false));

    let rules = vec![
        RuleSpec::Expert,
        RuleSpec::Pscost,
        RuleSpec::Policy {
            label: "il".into(),
            net: Arc::clone(&il),
        },
        RuleSpec::Race {
            label: "race".into(),
            alpha: il.clone(),
            beta: rl.clone(),
        },
    ];
    let rep = bench(&problems, &rules, Limits::default(), None).unwrap();
    vec![
        ("store", store.to_jsonl().unwrap().into_bytes()),
        ("il weights", to_bytes(&il)),
        ("rl weights", to_bytes(&rl)),
        ("rl curve", format!("{curve:?}").into_bytes()),
        ("traces", traces.into_bytes()),
        ("bench report", (rep.report_csv() + &rep.summary_csv()).into_bytes()),
    ]
}

fn c9_determinism() -> Outcome {
    let a = pipeline_bytes();
    let b = pipeline_bytes();
    for ((name, x), (_, y)) in a.iter().zip(&b) {
        check(x == y, format!("{name} differs between runs"))?;
    }
    let sizes: Vec<String> = a.iter().map(|(n, x)| format!("{n} {}B", x.len())).collect();
    Ok(format!("byte-identical: {}", sizes.join(", ")))
}

const HIGHS_SCRIPT: &str = r#"
import sys, highspy
for path in sys.argv[1:]:
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 0.0)
    h.readModel(path)
    h.run()
    print(h.modelStatusToString(h.getModelStatus()), repr(h.getInfo().objective_function_value))
"#;

fn c10_cross_solver() -> Outcome {
    let available = Command::new("python3")
        .args(["-c", "import highspy"])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false);
    if !available {
        return Ok("SKIP: no external MILP solver (python3 + highspy) available".into());
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut ours = Vec::new();
    let mut paths = Vec::new();
    let mut seed = 0;
    while ours.len() < 5 {
        let prob = build_milp(&random_small(seed, 3, 3), FlowModel::Transport).unwrap();
        seed += 1;
        let st = solve(&prob, &mut ExpertRelpscost::default(), Limits::default()).map_err(|e| e.to_string())?;
        let Some(z) = st.objective() else { continue };
        let path = dir.path().join(format!("tiny{seed}.mps"));
        std::fs::write(&path, write_mps(&prob, &format!("TINY{seed}"))).map_err(|e| e.to_string())?;
        ours.push(z);
        paths.push(path);
    }
    let out = Command::new("python3")
        .arg("-c")
        .arg(HIGHS_SCRIPT)
        .args(&paths)
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), String::from_utf8_lossy(&out.stderr).into_owned())?;
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    check(lines.len() == 5, format!("unexpected solver output: {text}"))?;
    let mut worst: f64 = 0.0;
    for (line, z) in lines.iter().zip(&ours) {
        let (status, val) = line.rsplit_once(' ').ok_or("bad line")?;
        check(status == "Optimal", format!("external status {status}"))?;
        let theirs: f64 = val.parse().map_err(|_| format!("bad objective {val}"))?;
        let d = (theirs - z).abs();
        worst = worst.max(d / z.abs().max(1.0));
        check(close(theirs, *z, 1e-5), format!("external {theirs} vs ours {z}"))?;
    }
    Ok(format!("5 MPS files re-solved by HiGHS, max relative difference {worst:.2e}"))
}

fn run(f: impl FnOnce() -> Outcome) -> (Outcome, f64) {
    let t = Instant::now();
    let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    (r, t.elapsed().as_secs_f64())
}

fn main() {
    let mut inc = Incumbents::default();
    let mut il = None;
    let mut results: Vec<(u32, &str, (Outcome, f64))> = Vec::new();
    results.push((1, "oracle optimality", run(|| c1_oracle(&mut inc))));
    results.push((2, "sizing fidelity", run(c2_sizing)));
    results.push((4, "gradient correctness", run(c4_gradient)));
    results.push((5, "softmax contract", run(c5_softmax)));
    results.push((6, "imitation efficacy", run(|| c6_imitation(&mut il))));
    results.push((7, "policy-gradient sanity", run(c7_bandit)));
    let c8 = match &il {
        Some(a) => run(|| c8_race(a, &mut inc)),
        None => (Err("no imitation policy to race".into()), 0.0),
    };
    results.push((8, "racing non-degradation", c8));
    results.push((3, "incumbent feasibility", run(|| c3_feasibility(&inc))));
    results.push((9, "determinism", run(c9_determinism)));
    results.push((10, "cross-solver check", run(c10_cross_solver)));
    results.sort_by_key(|r| r.0);

    let mut failed = Vec::new();
    for (id, name, (outcome, secs)) in &results {
        match outcome {
            Ok(msg) => println!("criterion {id:>2} PASS {name} [{secs:.1}s]: {msg}"),
            Err(msg) => {
                println!("criterion {id:>2} FAIL {name} [{secs:.1}s]: {msg}");
                failed.push(*id);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
