//! Bundled example domains with hand-built generator chains.
//!
//! Each domain returns its abstraction spec, a generator with observation
//! emissions, and a labeling file for the atoms its properties use.

use std::collections::BTreeMap;

use crate::abstraction::{enumerate_state_space, AbstractionSpec, ConcreteState};
use crate::dtmc::Dtmc;
use crate::expr::VarKind;
use crate::pctl::{LabelDef, LabelingFile};
use crate::trace_sim::{GroundTruthChain, Trace, TraceMeta, TraceStep};

/// Everything needed to simulate, learn and monitor one domain.
pub struct Domain {
    pub spec: AbstractionSpec,
    pub chain: GroundTruthChain,
    pub labels: LabelingFile,
}

/// Bundled domain names accepted by [`domain_by_name`].
pub const DOMAINS: &[&str] = &["microwave", "yellow_light", "stove"];

pub fn domain_by_name(name: &str) -> Option<Domain> {
    match name {
        "microwave" => Some(microwave_domain()),
        "yellow_light" => Some(yellow_light_domain()),
        "stove" => Some(stove_domain()),
        _ => None,
    }
}

fn expr_label(text: &str) -> LabelDef {
    LabelDef {
        expr: Some(text.to_string()),
        states: None,
    }
}

/// Source id and its `(target id, weight, action)` successors.
type WeightedRow<'a> = (u64, &'a [(u64, u32, &'a str)]);

/// Builds a generator from integer weights keyed by state id.
fn weighted_chain(
    name: &str,
    spec: &AbstractionSpec,
    initial_id: u64,
    rows: &[WeightedRow],
    emit: impl Fn(&[bool]) -> ConcreteState,
) -> GroundTruthChain {
    let space = enumerate_state_space(spec).expect("bundled spec is small");
    let n = space.len();
    let mut dense = vec![vec![0.0; n]; n];
    let mut actions = BTreeMap::new();
    for (p, row) in dense.iter_mut().enumerate() {
        if space.state(p).is_terminal() {
            row[p] = 1.0;
        }
    }
    for (from, succ) in rows {
        let p = space.index_of_id(*from).expect("bundled id");
        let total: u32 = succ.iter().map(|(_, w, _)| w).sum();
        for (to, w, action) in succ.iter() {
            let q = space.index_of_id(*to).expect("bundled id");
            dense[p][q] = *w as f64 / total as f64;
            actions.insert((p, q), action.to_string());
        }
    }
    let emissions = space
        .states()
        .iter()
        .map(|s| (!s.is_terminal()).then(|| emit(&s.bits())))
        .collect();
    GroundTruthChain {
        name: name.to_string(),
        generator: Dtmc::from_dense(space.clone(), dense)
            .expect("bundled rows are stochastic")
            .with_spec_hash(spec.hash()),
        initial: space.index_of_id(initial_id).expect("bundled id"),
        emissions,
        actions,
    }
}

pub fn microwave_spec() -> AbstractionSpec {
    AbstractionSpec::builder()
        .variable("fork.parentReceptacle", VarKind::Str)
        .variable("microwave.isToggled", VarKind::Bool)
        .predicate(
            "is_inside(fork,microwave)",
            "fork.parentReceptacle == \"Microwave\"",
        )
        .predicate("is_toggled(microwave)", "microwave.isToggled == true")
        .terminal("finished")
        // a running microwave cannot receive the fork in a single step
        .transition_rule(
            "!(!is_inside(fork,microwave) & is_toggled(microwave) \
             & is_inside(fork,microwave)' & is_toggled(microwave)')",
        )
        .label(0, "s0")
        .label(1, "s2")
        .label(2, "s1")
        .label(3, "s3")
        .label(4, "s_f")
        .build()
        .expect("microwave spec is valid")
}

fn microwave_observation(inside: bool, toggled: bool) -> ConcreteState {
    ConcreteState::new()
        .with(
            "fork.parentReceptacle",
            if inside { "Microwave" } else { "CounterTop" },
        )
        .with("microwave.isToggled", toggled)
}

/// Probability of moving from the idle state straight to "microwave on, fork
/// outside".
pub const MICROWAVE_IDLE_TO_TOGGLED: f64 = 31.0 / 184.0;
/// Target probability of eventually reaching the hazard from the idle state.
pub const MICROWAVE_REACH_IDLE: f64 = 0.04;
/// Target probability of eventually reaching the hazard once the fork is in.
pub const MICROWAVE_REACH_INSIDE: f64 = 0.34;

/// Fork/microwave household domain.
///
/// State ids (bit 0 = fork inside, bit 1 = microwave on) and labels:
/// `0 = s0` idle, `1 = s2` fork inside, `2 = s1` microwave on,
/// `3 = s3` hazard, `4 = s_f` finished.
///
/// The generator fixes every entry except idle → fork-inside, which is
/// solved for so that the hazard is eventually reached with probability
/// [`MICROWAVE_REACH_IDLE`] from `s0` and [`MICROWAVE_REACH_INSIDE`] from `s2`:
///
/// ```text
/// s2: s0 .25  s2 .50  s3 .16  s_f .09   ⇒ x2 = (.25·x0 + .16) / .5 = .34
/// s1: s0 .50  s1 .30  s_f .20           ⇒ x1 = .5·x0 / .7
/// s0: s0 .60  s1 31/184  s2 b  s_f rest ⇒ b = (.4·x0 − (31/184)·x1) / x2
/// s3: s_f 1
/// ```
pub fn microwave_domain() -> Domain {
    let spec = microwave_spec();
    let space = enumerate_state_space(&spec).expect("small space");
    let idx = |label: &str| space.resolve(label).expect("bundled label");
    let (s0, s1, s2, s3, sf) = (idx("s0"), idx("s1"), idx("s2"), idx("s3"), idx("s_f"));

    let x0 = MICROWAVE_REACH_IDLE;
    let x1 = 0.5 * x0 / 0.7;
    let x2 = MICROWAVE_REACH_INSIDE;
    let stay = 0.6;
    let to_inside = (x0 * (1.0 - stay) - MICROWAVE_IDLE_TO_TOGGLED * x1) / x2;
    let to_finish = 1.0 - stay - MICROWAVE_IDLE_TO_TOGGLED - to_inside;

    let mut dense = vec![vec![0.0; space.len()]; space.len()];
    dense[s0][s0] = stay;
    dense[s0][s1] = MICROWAVE_IDLE_TO_TOGGLED;
    dense[s0][s2] = to_inside;
    dense[s0][sf] = to_finish;
    dense[s2][s0] = 0.25;
    dense[s2][s2] = 0.5;
    dense[s2][s3] = 0.16;
    dense[s2][sf] = 0.09;
    dense[s1][s0] = 0.5;
    dense[s1][s1] = 0.3;
    dense[s1][sf] = 0.2;
    dense[s3][sf] = 1.0;
    dense[sf][sf] = 1.0;

    let actions: BTreeMap<(usize, usize), String> = [
        ((s0, s0), "find object"),
        ((s0, s1), "turn on microwave"),
        ((s0, s2), "put fork in microwave"),
        ((s0, sf), "done"),
        ((s2, s0), "take fork out"),
        ((s2, s2), "close microwave"),
        ((s2, s3), "turn on microwave"),
        ((s2, sf), "done"),
        ((s1, s0), "turn off microwave"),
        ((s1, s1), "wait"),
        ((s1, sf), "done"),
        ((s3, sf), "done"),
    ]
    .into_iter()
    .map(|(k, v)| (k, v.to_string()))
    .collect();

    let emissions = space
        .states()
        .iter()
        .map(|s| (!s.is_terminal()).then(|| microwave_observation(s.bit(0), s.bit(1))))
        .collect();

    let chain = GroundTruthChain {
        name: "microwave".into(),
        generator: Dtmc::from_dense(space, dense)
            .expect("microwave generator is stochastic")
            .with_spec_hash(spec.hash()),
        initial: s0,
        emissions,
        actions,
    };
    let hazard = "is_inside(fork,microwave) & is_toggled(microwave)";
    let labels = [
        ("unsafe", expr_label(hazard)),
        ("microwave_hazard", expr_label(hazard)),
        ("finished", expr_label("finished")),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Domain {
        spec,
        chain,
        labels,
    }
}

/// The "heat the fork inside the microwave" run: five idle steps, two with
/// the fork inside, the hazard, then completion.
pub fn microwave_trajectory() -> Trace {
    let idle = microwave_observation(false, false);
    let inside = microwave_observation(true, false);
    let hazard = microwave_observation(true, true);
    Trace {
        id: "heat-fork".into(),
        meta: TraceMeta {
            instruction: "heat the fork inside the microwave".into(),
            env: "kitchen".into(),
            seed: 0,
        },
        steps: vec![
            TraceStep::new("start", idle.clone()),
            TraceStep::new("find fork", idle.clone()),
            TraceStep::new("pick fork", idle.clone()),
            TraceStep::new("find microwave", idle.clone()),
            TraceStep::new("open microwave", idle),
            TraceStep::new("put fork in microwave", inside.clone()),
            TraceStep::new("close microwave", inside),
            TraceStep::new("turn on microwave", hazard),
            TraceStep::terminal("done", "finished"),
        ],
        outcome: Some("finished".into()),
    }
}

/// Yellow-light approach: the vehicle must be nearly stopped when the light
/// ahead is yellow and the stop line is within 2 m.
pub fn yellow_light_domain() -> Domain {
    let spec = AbstractionSpec::builder()
        .variable("trafficLightAhead.color", VarKind::Str)
        .variable("stoplineAhead", VarKind::Real)
        .variable("speed", VarKind::Real)
        .predicate("light_yellow", "trafficLightAhead.color == \"yellow\"")
        .predicate("stopline_near", "stoplineAhead <= 2")
        .predicate("slow", "speed < 0.5")
        .terminal("arrived")
        .build()
        .expect("yellow light spec is valid");
    // id = yellow + 2·near + 4·slow; 8 = arrived
    let chain = weighted_chain(
        "yellow_light",
        &spec,
        0,
        &[
            (
                0,
                &[
                    (0, 5, "cruise"),
                    (1, 2, "light changes"),
                    (2, 2, "approach"),
                    (6, 1, "brake"),
                ],
            ),
            (
                1,
                &[(3, 3, "approach"), (5, 4, "brake"), (0, 1, "light changes")],
            ),
            (
                2,
                &[
                    (0, 2, "pass junction"),
                    (8, 2, "arrive"),
                    (3, 1, "light changes"),
                    (6, 1, "brake"),
                ],
            ),
            (3, &[(0, 1, "run light"), (8, 1, "arrive")]),
            (
                4,
                &[(0, 3, "accelerate"), (4, 1, "crawl"), (6, 1, "approach")],
            ),
            (
                5,
                &[
                    (7, 3, "approach"),
                    (5, 1, "crawl"),
                    (4, 1, "light changes"),
                    (3, 1, "accelerate"),
                ],
            ),
            (
                6,
                &[
                    (0, 1, "accelerate"),
                    (8, 2, "arrive"),
                    (7, 1, "light changes"),
                ],
            ),
            (
                7,
                &[
                    (7, 1, "wait"),
                    (6, 2, "light changes"),
                    (3, 1, "accelerate"),
                ],
            ),
        ],
        |bits| {
            ConcreteState::new()
                .with(
                    "trafficLightAhead.color",
                    if bits[0] { "yellow" } else { "green" },
                )
                .with("stoplineAhead", if bits[1] { 1.5 } else { 30.0 })
                .with("speed", if bits[2] { 0.2 } else { 12.0 })
        },
    );
    let labels = [
        (
            "violation",
            expr_label("light_yellow & stopline_near & !slow"),
        ),
        ("destination_reached", expr_label("arrived")),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Domain {
        spec,
        chain,
        labels,
    }
}

/// Stove domain: heating an empty pan is the hazard. A pan off the burner
/// is never reported empty-and-heated, so that combination is invalid.
pub fn stove_domain() -> Domain {
    let spec = AbstractionSpec::builder()
        .variable("stove.isToggled", VarKind::Bool)
        .variable("pan.parentReceptacle", VarKind::Str)
        .variable("pan.isFilled", VarKind::Bool)
        .predicate("is_toggled(stove)", "stove.isToggled")
        .predicate(
            "is_on(pan,stove)",
            "pan.parentReceptacle == \"StoveBurner\"",
        )
        .predicate("is_empty(pan)", "!pan.isFilled")
        .terminal("finished")
        .state_rule("!(is_empty(pan) & !is_on(pan,stove) & is_toggled(stove))")
        .build()
        .expect("stove spec is valid");
    // id = on + 2·pan_on_stove + 4·empty; 5 is invalid; 8 = finished
    let chain = weighted_chain(
        "stove",
        &spec,
        4,
        &[
            (
                4,
                &[
                    (4, 2, "find pan"),
                    (6, 3, "put pan on stove"),
                    (0, 2, "fill pan"),
                ],
            ),
            (
                6,
                &[
                    (2, 4, "fill pan"),
                    (7, 1, "turn on stove"),
                    (4, 1, "take pan"),
                ],
            ),
            (0, &[(2, 3, "put pan on stove"), (0, 1, "wait")]),
            (2, &[(3, 4, "turn on stove"), (6, 1, "empty pan")]),
            (
                3,
                &[
                    (3, 2, "cook"),
                    (1, 1, "take pan"),
                    (2, 1, "turn off stove"),
                    (7, 1, "pour out"),
                ],
            ),
            (1, &[(0, 2, "turn off stove"), (8, 1, "done")]),
            (
                7,
                &[(6, 2, "turn off stove"), (3, 1, "fill pan"), (8, 1, "done")],
            ),
        ],
        |bits| {
            ConcreteState::new()
                .with("stove.isToggled", bits[0])
                .with(
                    "pan.parentReceptacle",
                    if bits[1] { "StoveBurner" } else { "CounterTop" },
                )
                .with("pan.isFilled", !bits[2])
        },
    );
    let labels = [
        (
            "dry_heating",
            expr_label("is_toggled(stove) & is_on(pan,stove) & is_empty(pan)"),
        ),
        ("finished", expr_label("finished")),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Domain {
        spec,
        chain,
        labels,
    }
}
