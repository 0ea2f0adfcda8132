//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

use std::fs;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reachguard::abstraction::{is_valid_transition, SymbolicState};
use reachguard::domains::{domain_by_name, microwave_domain, microwave_trajectory, DOMAINS};
use reachguard::dtmc::model_distance;
use reachguard::monitor::build_cache;
use reachguard::pctl::{
    bounded_until_probability, parse, pretty, reach_probability, solver_invocations, Bound,
    Labeling, PathFormula, StateSet,
};
use reachguard::trace_sim::write_traces;
use reachguard::{
    count_transitions, enumerate_state_space, learn_dtmc, pac_requirement, run_stream, sample,
    AbstractionSpec, ConcreteState, CountMatrix, Dtmc, GroundTruthChain, Monitor, MonitorConfig,
    MonitorDecision, StateFormula, StateSpace, Strategy,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Random chain over three predicates with two to five valid states, one
/// terminal, and some forbidden transitions. Rows are multiples of 1/8.
struct RandomChain {
    spec: AbstractionSpec,
    weights: Vec<Vec<u32>>,
    chain: GroundTruthChain,
}

fn minterm(mask: u32, primed: bool) -> String {
    let tick = if primed { "'" } else { "" };
    (0..3)
        .map(|i| format!("{}p{i}{tick}", if mask >> i & 1 == 1 { "" } else { "!" }))
        .collect::<Vec<_>>()
        .join(" & ")
}

fn random_chain(rng: &mut ChaCha8Rng) -> RandomChain {
    let mut masks: Vec<u32> = (0..8).collect();
    masks.shuffle(rng);
    masks.truncate(rng.random_range(2..=5));
    let ring: Vec<(u32, u32)> = (0..masks.len())
        .map(|i| (masks[i], masks[(i + 1) % masks.len()]))
        .collect();

    let mut b = AbstractionSpec::builder();
    for i in 0..3 {
        b = b
            .variable(&format!("v{i}"), reachguard::VarKind::Bool)
            .predicate(&format!("p{i}"), &format!("v{i}"));
    }
    let valid_rule = masks
        .iter()
        .map(|&m| format!("({})", minterm(m, false)))
        .collect::<Vec<_>>()
        .join(" | ");
    b = b.state_rule(&valid_rule).terminal("done");
    for &a in &masks {
        for &c in &masks {
            if a != c && !ring.contains(&(a, c)) && rng.random_bool(0.25) {
                b = b.transition_rule(&format!(
                    "!(({}) & ({}))",
                    minterm(a, false),
                    minterm(c, true)
                ));
            }
        }
    }
    let spec = b.build().unwrap();
    let space = enumerate_state_space(&spec).unwrap();
    let n = space.len();
    let done = n - 1;
    let mut weights = vec![vec![0u32; n]; n];
    weights[done][done] = 8;
    for &(a, c) in &ring {
        let p = space
            .index_of(&SymbolicState::Bits { mask: a, width: 3 })
            .unwrap();
        let q = space
            .index_of(&SymbolicState::Bits { mask: c, width: 3 })
            .unwrap();
        let allowed: Vec<usize> = (0..n)
            .filter(|&t| is_valid_transition(&space.state(p), &space.state(t), &spec))
            .collect();
        weights[p][q] += 1;
        weights[p][done] += 1;
        for _ in 0..6 {
            weights[p][allowed[rng.random_range(0..allowed.len())]] += 1;
        }
    }
    let dense = weights
        .iter()
        .map(|r| r.iter().map(|&w| w as f64 / 8.0).collect())
        .collect();
    let generator = Dtmc::from_dense(space.clone(), dense).unwrap();
    let emissions = space
        .states()
        .iter()
        .map(|s| {
            (!s.is_terminal()).then(|| {
                (0..3).fold(ConcreteState::new(), |c, i| {
                    c.with(&format!("v{i}"), s.bit(i))
                })
            })
        })
        .collect();
    RandomChain {
        spec,
        weights,
        chain: GroundTruthChain {
            name: "random".into(),
            generator,
            initial: 0,
            emissions,
            actions: Default::default(),
        },
    }
}

fn random_chains() -> Vec<RandomChain> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    (0..50).map(|_| random_chain(&mut rng)).collect()
}

/// Exact reachability by Gaussian elimination over the rationals.
fn exact_reach(weights: &[Vec<u32>], target: &StateSet) -> Vec<BigRational> {
    let n = weights.len();
    let mut can = target.clone();
    loop {
        let before = can.len();
        for p in 0..n {
            if (0..n).any(|q| weights[p][q] > 0 && can.contains(&q)) {
                can.insert(p);
            }
        }
        if can.len() == before {
            break;
        }
    }
    let unknown: Vec<usize> = (0..n)
        .filter(|p| can.contains(p) && !target.contains(p))
        .collect();
    let k = unknown.len();
    let pos = |s: usize| unknown.iter().position(|&u| u == s);
    let eighth = |w: u32| BigRational::new(BigInt::from(w), BigInt::from(8));
    let mut a = vec![vec![BigRational::zero(); k + 1]; k];
    for (r, &p) in unknown.iter().enumerate() {
        a[r][r] = BigRational::one();
        for q in 0..n {
            if target.contains(&q) {
                a[r][k] = &a[r][k] + eighth(weights[p][q]);
            } else if let Some(c) = pos(q) {
                a[r][c] = &a[r][c] - eighth(weights[p][q]);
            }
        }
    }
    for col in 0..k {
        let piv = (col..k)
            .find(|&r| !a[r][col].is_zero())
            .expect("nonsingular system");
        a.swap(col, piv);
        let lead = a[col][col].clone();
        for c in col..=k {
            a[col][c] = &a[col][c] / &lead;
        }
        for r in 0..k {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=k {
                    let d = &f * &a[col][c];
                    a[r][c] = &a[r][c] - d;
                }
            }
        }
    }
    (0..n)
        .map(|s| {
            if target.contains(&s) {
                BigRational::one()
            } else {
                pos(s).map_or_else(BigRational::zero, |r| a[r][k].clone())
            }
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let space = StateSpace::anonymous(10);
    let mut counts = CountMatrix::new(10);
    for q in 1..=5 {
        counts.add(0, q, 80);
    }
    let start = Instant::now();
    let report = pac_requirement(&counts, &space, 0.05, 0.01).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let s = &report.per_state[0];
    ensure(s.n_p == 400 && (s.max_ratio - 0.2).abs() < 1e-12, || {
        format!("unexpected row {s:?}")
    })?;
    ensure((1086.0..=1089.0).contains(&s.required), || {
        format!("required {}", s.required)
    })?;
    ensure(!s.sufficient, || "reported sufficient".into())?;
    ensure(elapsed < Duration::from_millis(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("required {:.2}, sufficient=false", s.required))
}

fn microwave_monitor(d: &reachguard::domains::Domain, property: &str) -> Monitor {
    let labeling = Labeling::resolve(&d.labels, d.chain.generator.space()).unwrap();
    Monitor::new(
        MonitorConfig::new(
            parse(property).unwrap(),
            labeling,
            Strategy::Stop,
            d.spec.clone(),
            d.chain.generator.clone(),
        )
        .unwrap(),
    )
    .unwrap()
}

fn criterion_2() -> Outcome {
    let d = microwave_domain();
    let space = d.chain.generator.space();
    let s0 = space.resolve("s0").unwrap();
    let s2 = space.resolve("s2").unwrap();
    let s3 = space.resolve("s3").unwrap();
    let labeling = Labeling::resolve(&d.labels, space).unwrap();
    let reach = reach_probability(&d.chain.generator, labeling.get("unsafe").unwrap())
        .map_err(|e| e.to_string())?;
    ensure((reach[s0] - 0.04).abs() <= 0.005, || {
        format!("reach(s0) = {}", reach[s0])
    })?;
    ensure((reach[s2] - 0.34).abs() <= 0.005, || {
        format!("reach(s2) = {}", reach[s2])
    })?;

    let property = "P<0.1 [ F unsafe ]";
    let at = |index: usize| {
        microwave_monitor(&d, property)
            .step(d.chain.emissions[index].as_ref().unwrap())
            .unwrap()
    };
    ensure(at(s0) == MonitorDecision::Continue, || {
        "s0 not Continue".into()
    })?;
    ensure(at(s2).is_enforce(), || "s2 not Enforce".into())?;

    let trace = microwave_trajectory();
    let states = trace
        .to_symbolic(&d.spec, false)
        .map_err(|e| e.to_string())?;
    let entered_s2 = states
        .iter()
        .position(|s| space.index_of(s) == Some(s2))
        .unwrap();
    let entered_s3 = states
        .iter()
        .position(|s| space.index_of(s) == Some(s3))
        .unwrap();
    let mut monitor = microwave_monitor(&d, property);
    let mut tripped = None;
    for (i, step) in trace.steps.iter().enumerate() {
        let decision = match &step.terminal {
            Some(tag) => monitor.step_symbolic(&step.state, d.spec.terminal(tag).unwrap()),
            None => monitor.step(&step.state),
        }
        .unwrap();
        if decision.is_enforce() {
            tripped = Some(i);
            break;
        }
    }
    ensure(tripped == Some(entered_s2), || {
        format!("tripped at {tripped:?}, s2 entered at {entered_s2}")
    })?;
    ensure(entered_s3 - entered_s2 == 2, || {
        "s3 is not two steps after s2".into()
    })?;
    Ok(format!(
        "reach(s0)={:.4} reach(s2)={:.4}, trips at step {entered_s2}, hazard at step {entered_s3}",
        reach[s0], reach[s2]
    ))
}

fn criterion_3(chains: &[RandomChain]) -> Outcome {
    let mut close = 0;
    let mut worst = 0.0f64;
    for (i, c) in chains.iter().enumerate() {
        let space = c.chain.generator.space();
        let traces: Vec<Vec<SymbolicState>> = sample(&c.chain, 10_000, 200, 1_000 + i as u64)
            .iter()
            .map(|t| t.to_symbolic(&c.spec, false).unwrap())
            .collect();
        let counts = count_transitions(&traces, space, &c.spec).map_err(|e| e.to_string())?;
        let learned = learn_dtmc(&counts, space, &c.spec, 0.0).map_err(|e| e.to_string())?;
        let dist = model_distance(&learned, &c.chain.generator).map_err(|e| e.to_string())?;
        worst = worst.max(dist);
        if dist <= 0.05 {
            close += 1;
        }
        let smoothed = learn_dtmc(&counts, space, &c.spec, 1.0).map_err(|e| e.to_string())?;
        for p in 0..space.len() {
            for q in 0..space.len() {
                let valid = is_valid_transition(&space.state(p), &space.state(q), &c.spec);
                let v = smoothed.prob(p, q);
                if !valid {
                    ensure(v == 0.0, || format!("chain {i}: invalid {p}->{q} has {v}"))?;
                } else if !smoothed.sinks().contains(&p) {
                    ensure(v > 0.0, || {
                        format!("chain {i}: valid {p}->{q} has zero mass")
                    })?;
                }
            }
        }
    }
    ensure(close >= 45, || {
        format!("only {close}/50 chains within 0.05")
    })?;
    Ok(format!(
        "{close}/50 within 0.05 (worst {worst:.4}); smoothing floor holds"
    ))
}

fn criterion_4(chains: &[RandomChain]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for (i, c) in chains.iter().enumerate() {
        let n = c.weights.len();
        let mut target: StateSet = (0..n - 1).filter(|_| rng.random_bool(0.3)).collect();
        if target.is_empty() {
            target.insert(rng.random_range(0..n - 1));
        }
        let got = reach_probability(&c.chain.generator, &target).map_err(|e| e.to_string())?;
        let want = exact_reach(&c.weights, &target);
        for s in 0..n {
            let err = (got[s] - want[s].to_f64().unwrap()).abs();
            worst = worst.max(err);
            ensure(err <= 1e-8, || {
                format!("chain {i} state {s}: error {err:e}")
            })?;
        }
    }
    let geometric: Dtmc = Dtmc::from_dense(
        StateSpace::anonymous(3),
        vec![
            vec![0.5, 0.25, 0.25],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ],
    )
    .unwrap();
    let g = reach_probability(&geometric, &[1].into()).map_err(|e| e.to_string())?[0];
    ensure((g - 0.5).abs() <= 1e-9, || {
        format!("geometric chain gave {g}")
    })?;
    for i in 0..1000 {
        let m = &chains[i % chains.len()].chain.generator;
        let n = m.len();
        let left: StateSet = (0..n).filter(|_| rng.random_bool(0.7)).collect();
        let right: StateSet = (0..n).filter(|_| rng.random_bool(0.3)).collect();
        let k = rng.random_range(0..40);
        let a = bounded_until_probability(m, &left, &right, k);
        let b = bounded_until_probability(m, &left, &right, k + 1);
        ensure((0..n).all(|s| b[s] >= a[s]), || {
            format!("instance {i}: not monotone at k={k}")
        })?;
    }
    Ok(format!(
        "max error {worst:.1e} vs exact solve; geometric {g}; 1000 bounded instances monotone"
    ))
}

fn random_formula(rng: &mut ChaCha8Rng, depth: usize) -> StateFormula {
    const ATOMS: &[&str] = &[
        "a",
        "unsafe",
        "microwave_hazard",
        "goal_2",
        "x.y",
        "Fx",
        "Ux",
        "trueish",
    ];
    if depth == 0 || rng.random_bool(0.25) {
        return if rng.random_bool(0.15) {
            StateFormula::True
        } else {
            StateFormula::atom(ATOMS[rng.random_range(0..ATOMS.len())])
        };
    }
    match rng.random_range(0..3) {
        0 => StateFormula::not(random_formula(rng, depth - 1)),
        1 => StateFormula::and(
            random_formula(rng, depth - 1),
            random_formula(rng, depth - 1),
        ),
        _ => {
            let bound = [Bound::Lt, Bound::Le, Bound::Ge, Bound::Gt][rng.random_range(0..4)];
            let theta = if rng.random_bool(0.5) {
                rng.random_range(0..=100) as f64 / 100.0
            } else {
                rng.random::<f64>()
            };
            let path = match rng.random_range(0..4) {
                0 => PathFormula::Next(random_formula(rng, depth - 1)),
                1 => PathFormula::Eventually(random_formula(rng, depth - 1)),
                2 => PathFormula::Globally(random_formula(rng, depth - 1)),
                _ => PathFormula::Until {
                    left: random_formula(rng, depth - 1),
                    right: random_formula(rng, depth - 1),
                    bound: rng.random_bool(0.5).then(|| rng.random_range(0..100)),
                },
            };
            StateFormula::prob(bound, theta, path)
        }
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..10_000 {
        let f = random_formula(&mut rng, 6);
        let text = pretty(&f);
        let back = parse(&text).map_err(|e| format!("#{i} `{text}`: {e}"))?;
        ensure(back == f, || format!("#{i} `{text}` parsed differently"))?;
    }
    let safety = StateFormula::prob(
        Bound::Le,
        0.05,
        PathFormula::Eventually(StateFormula::atom("microwave_hazard")),
    );
    let liveness = StateFormula::prob(
        Bound::Ge,
        0.95,
        PathFormula::Eventually(StateFormula::atom("destination_reached")),
    );
    ensure(
        parse("P<=0.05 [ F microwave_hazard ]").ok() == Some(safety),
        || "safety property AST".into(),
    )?;
    ensure(
        parse("P>=0.95 [ F destination_reached ]").ok() == Some(liveness),
        || "liveness property AST".into(),
    )?;
    Ok("10000 random formulas round-trip; both documented properties parse".into())
}

fn criterion_6() -> Outcome {
    let properties = [
        "P<0.1 [ F unsafe ]",
        "P<=0.3 [ F violation ]",
        "P<0.2 [ F dry_heating ]",
    ];
    let mut setups = Vec::new();
    for (name, property) in DOMAINS.iter().zip(properties) {
        let d = domain_by_name(name).unwrap();
        let labeling = Labeling::resolve(&d.labels, d.chain.generator.space()).unwrap();
        let config = MonitorConfig::new(
            parse(property).unwrap(),
            labeling,
            Strategy::Stop,
            d.spec.clone(),
            d.chain.generator.clone(),
        )
        .map_err(|e| e.to_string())?;
        let n = config.model.len();
        let uncached: Vec<bool> = (0..n)
            .map(|i| {
                !config
                    .bound()
                    .holds(&config.uncached_probability(i).unwrap(), &config.theta())
            })
            .collect();
        let cache = build_cache(&config).map_err(|e| e.to_string())?;
        setups.push((Arc::new(config), Arc::new(cache), uncached));
    }
    let warm = solver_invocations();
    let mut calls = 0usize;
    while calls < 100_000 {
        for (config, cache, uncached) in &setups {
            let space = config.model.space();
            for (i, expect) in uncached.iter().enumerate() {
                let mut m = Monitor::with_cache(config.clone(), cache.clone());
                let decision = m
                    .step_symbolic(&ConcreteState::new(), space.state(i))
                    .map_err(|e| e.to_string())?;
                calls += 1;
                ensure(decision.is_enforce() == *expect, || {
                    format!("state {} decision differs", space.label(i))
                })?;
            }
        }
    }
    let solves = solver_invocations() - warm;
    ensure(solves == 0, || {
        format!("{solves} solver calls after warm-up")
    })?;
    Ok(format!(
        "{calls} cached steps over 3 models match uncached decisions; 0 solver calls"
    ))
}

fn criterion_7(chains: &[RandomChain]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (i, c) in chains.iter().enumerate() {
        let space = c.chain.generator.space();
        let n = space.len();
        let bad: Vec<usize> = (0..n - 1).filter(|_| rng.random_bool(0.4)).collect();
        for bound in ["<", "<="] {
            let enforced: Vec<Vec<usize>> = [0.1, 0.3, 0.5, 0.7]
                .iter()
                .map(|theta| {
                    let config = MonitorConfig::new(
                        parse(&format!("P{bound}{theta} [ F bad ]")).unwrap(),
                        Labeling::new().with("bad", bad.iter().copied()),
                        Strategy::Stop,
                        c.spec.clone(),
                        c.chain.generator.clone(),
                    )
                    .unwrap();
                    let config = Arc::new(config);
                    let cache = Arc::new(build_cache(&config).unwrap());
                    (0..n)
                        .filter(|&s| {
                            Monitor::with_cache(config.clone(), cache.clone())
                                .step_symbolic(&ConcreteState::new(), space.state(s))
                                .unwrap()
                                .is_enforce()
                        })
                        .collect()
                })
                .collect();
            for w in enforced.windows(2) {
                ensure(w[1].iter().all(|s| w[0].contains(s)), || {
                    format!("chain {i} ({bound}): sets not nested")
                })?;
            }
        }
    }
    Ok("enforced sets nested for θ = 0.1 ⊇ 0.3 ⊇ 0.5 ⊇ 0.7 on 50 models".into())
}

fn reachguard(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_reachguard"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())
}

fn stage(name: &str, args: &[&str], expect: i32) -> Result<Vec<u8>, String> {
    let o = reachguard(args)?;
    ensure(o.status.code() == Some(expect), || {
        format!(
            "{name} exited {:?}: {}",
            o.status.code(),
            String::from_utf8_lossy(&o.stderr)
        )
    })?;
    Ok(o.stdout)
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let (traces, spec, labels, abs, model) = (
        p("traces.jsonl"),
        p("spec.json"),
        p("labels.json"),
        p("abs.jsonl"),
        p("model.json"),
    );
    let (n, seed) = (20_000usize, 8u64);
    let n_text = n.to_string();
    let seed_text = seed.to_string();
    stage(
        "simulate",
        &[
            "simulate",
            "--domain",
            "microwave",
            "--n",
            &n_text,
            "--seed",
            &seed_text,
            "--out",
            &traces,
            "--spec-out",
            &spec,
            "--labels-out",
            &labels,
        ],
        0,
    )?;
    stage(
        "abstract",
        &[
            "abstract", "--spec", &spec, "--traces", &traces, "--out", &abs,
        ],
        0,
    )?;
    stage(
        "pac",
        &[
            "pac",
            "--spec",
            &spec,
            "--abs",
            &abs,
            "--epsilon",
            "0.05",
            "--delta",
            "0.01",
        ],
        0,
    )?;
    stage(
        "learn",
        &[
            "learn", "--spec", &spec, "--abs", &abs, "--alpha", "1.0", "--out", &model,
        ],
        0,
    )?;
    let prop = "P<0.1 [ F unsafe ]";
    let check_s0 = stage(
        "check",
        &[
            "check", "--model", &model, "--labels", &labels, "--prop", prop, "--state", "s0",
        ],
        0,
    )?;
    let check_s2 = stage(
        "check",
        &[
            "check", "--model", &model, "--labels", &labels, "--prop", prop, "--state", "s2",
        ],
        0,
    )?;

    // the same pipeline through the library
    let d = microwave_domain();
    let library_traces = sample(&d.chain, n, reachguard::trace_sim::DEFAULT_MAX_LEN, seed);
    let mut bytes = Vec::new();
    write_traces(&library_traces, &mut bytes).unwrap();
    ensure(fs::read(&traces).unwrap() == bytes, || {
        "simulated traces differ from library".into()
    })?;
    let space = enumerate_state_space(&d.spec).unwrap();
    let symbolic: Vec<_> = library_traces
        .iter()
        .map(|t| t.to_symbolic(&d.spec, false).unwrap())
        .collect();
    let counts = count_transitions(&symbolic, &space, &d.spec).unwrap();
    let learned = learn_dtmc(&counts, &space, &d.spec, 1.0)
        .unwrap()
        .with_spec_hash(d.spec.hash());
    ensure(
        fs::read_to_string(&model).unwrap() == format!("{}\n", learned.to_json()),
        || "model file differs from library".into(),
    )?;

    let labeling = Labeling::resolve(&d.labels, learned.space()).unwrap();
    let reach = reach_probability(&learned, labeling.get("unsafe").unwrap()).unwrap();
    let cli_prob = |out: &[u8]| {
        serde_json::from_slice::<serde_json::Value>(out).unwrap()["probability"]
            .as_f64()
            .unwrap()
    };
    let (s0, s2) = (space.resolve("s0").unwrap(), space.resolve("s2").unwrap());
    ensure(
        cli_prob(&check_s0) == reach[s0] && cli_prob(&check_s2) == reach[s2],
        || "check probabilities differ".into(),
    )?;

    // monitor: a safe stream ends cleanly, the trajectory trips at s2
    let trajectory = microwave_trajectory();
    let stream = |steps: &[reachguard::TraceStep]| -> String {
        steps
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut v = serde_json::json!({ "step": i, "variables": s.state });
                if let Some(t) = &s.terminal {
                    v = serde_json::json!({ "step": i, "terminal": t });
                }
                format!("{v}\n")
            })
            .collect()
    };
    let safe_steps: Vec<_> = trajectory.steps[..5]
        .iter()
        .chain(trajectory.steps.last())
        .cloned()
        .collect();
    let mut results = Vec::new();
    for (name, steps, code) in [
        ("safe", safe_steps.as_slice(), 0),
        ("trajectory", trajectory.steps.as_slice(), 3),
    ] {
        let input = p(&format!("{name}.jsonl"));
        fs::write(&input, stream(steps)).unwrap();
        let out = stage(
            "monitor",
            &[
                "monitor",
                "--model",
                &model,
                "--spec",
                &spec,
                "--labels",
                &labels,
                "--prop",
                prop,
                "--strategy",
                "reflect",
                "--input",
                &input,
            ],
            code,
        )?;
        let config = MonitorConfig::new(
            parse(prop).unwrap(),
            labeling.clone(),
            Strategy::Reflect,
            d.spec.clone(),
            learned.clone(),
        )
        .unwrap();
        let mut monitor = Monitor::new(config).unwrap();
        let mut expected = Vec::new();
        let tripped = run_stream(&mut monitor, stream(steps).as_bytes(), &mut expected).unwrap();
        ensure(tripped == (code == 3), || {
            format!("{name}: library tripped={tripped}")
        })?;
        ensure(out == expected, || {
            format!("{name}: monitor output differs from library")
        })?;
        let first_enforce = String::from_utf8(out)
            .unwrap()
            .lines()
            .position(|l| l.contains("\"decision\":\"enforce\""));
        results.push(first_enforce);
    }
    ensure(results[0].is_none(), || "safe stream enforced".into())?;
    ensure(results[1] == Some(5), || {
        format!("trajectory tripped at {:?}", results[1])
    })?;
    Ok(format!(
        "all stages ran; CLI output matches library byte for byte; learned reach(s0)={:.4} reach(s2)={:.4}; monitor trips at step 5",
        reach[s0], reach[s2]
    ))
}

fn main() {
    let chains = random_chains();
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Outcome>)> = vec![
        (
            "PAC worked example",
            Duration::from_secs(1),
            Box::new(criterion_1),
        ),
        (
            "microwave decision boundary",
            Duration::from_secs(1),
            Box::new(criterion_2),
        ),
        (
            "learning matches generator",
            Duration::from_secs(60),
            Box::new(|| criterion_3(&chains)),
        ),
        (
            "reachability solver",
            Duration::from_secs(30),
            Box::new(|| criterion_4(&chains)),
        ),
        (
            "parser robustness",
            Duration::from_secs(10),
            Box::new(criterion_5),
        ),
        (
            "cache contract",
            Duration::from_secs(30),
            Box::new(criterion_6),
        ),
        (
            "threshold monotonicity",
            Duration::from_secs(10),
            Box::new(|| criterion_7(&chains)),
        ),
        (
            "end-to-end pipeline",
            Duration::from_secs(120),
            Box::new(criterion_8),
        ),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if elapsed <= *limit {
                Ok(msg)
            } else {
                Err(format!("{msg}; took {elapsed:.2?}, limit {limit:?}"))
            }
        });
        match outcome {
            Ok(msg) => println!("PASS criterion {} ({name}) in {elapsed:.2?}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {} ({name}) in {elapsed:.2?}: {msg}", i + 1)
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
