use proptest::prelude::*;
use reachguard::abstraction::{
    atoms_of_unsafe_condition, is_valid_state, is_valid_transition, SymbolicState,
};
use reachguard::expr::Expr;
use reachguard::{
    abstract_state, enumerate_state_space, AbstractionSpec, ConcreteState, Value, VarKind,
};

#[derive(Debug, Clone)]
enum Tree {
    Leaf(usize, bool),
    Not(Box<Tree>),
    And(Box<Tree>, Box<Tree>),
    Or(Box<Tree>, Box<Tree>),
}

impl Tree {
    fn render(&self, name: &dyn Fn(usize, bool) -> String) -> String {
        match self {
            Tree::Leaf(i, primed) => name(*i, *primed),
            Tree::Not(t) => format!("!({})", t.render(name)),
            Tree::And(a, b) => format!("({}) & ({})", a.render(name), b.render(name)),
            Tree::Or(a, b) => format!("({}) | ({})", a.render(name), b.render(name)),
        }
    }

    fn eval(&self, leaf: &dyn Fn(usize, bool) -> bool) -> bool {
        match self {
            Tree::Leaf(i, primed) => leaf(*i, *primed),
            Tree::Not(t) => !t.eval(leaf),
            Tree::And(a, b) => a.eval(leaf) & b.eval(leaf),
            Tree::Or(a, b) => a.eval(leaf) | b.eval(leaf),
        }
    }
}

fn tree(leaves: usize, primes: bool) -> impl Strategy<Value = Tree> {
    let leaf = (0..leaves, any::<bool>()).prop_map(move |(i, p)| Tree::Leaf(i, p && primes));
    leaf.prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Tree::Not(Box::new(t))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Tree::Or(Box::new(a), Box::new(b))),
        ]
    })
}

fn bool_spec(k: usize, state_rules: &[String], transition_rules: &[String]) -> AbstractionSpec {
    let mut b = AbstractionSpec::builder();
    for i in 0..k {
        b = b
            .variable(&format!("v{i}"), VarKind::Bool)
            .predicate(&format!("p{i}"), &format!("v{i} == true"));
    }
    for r in state_rules {
        b = b.state_rule(r);
    }
    for r in transition_rules {
        b = b.transition_rule(r);
    }
    b.terminal("done").build().unwrap()
}

fn pred_name(i: usize, primed: bool) -> String {
    format!("p{i}{}", if primed { "'" } else { "" })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn enumeration_matches_brute_force(
        k in 1usize..6,
        rules in proptest::collection::vec(tree(5, false), 0..3),
    ) {
        let rules: Vec<Tree> = rules.into_iter().map(|t| clamp(t, k)).collect();
        let texts: Vec<String> = rules.iter().map(|t| t.render(&pred_name)).collect();
        let spec = bool_spec(k, &texts, &[]);
        let space = enumerate_state_space(&spec).unwrap();
        let mut want: Vec<u64> = (0..1u64 << k)
            .filter(|mask| rules.iter().all(|t| t.eval(&|i, _| mask >> i & 1 == 1)))
            .collect();
        want.push(1 << k);
        let got: Vec<u64> = space.states().iter().map(|s| s.id()).collect();
        prop_assert_eq!(got, want);
        for s in space.states() {
            prop_assert!(is_valid_state(s, &spec));
        }
    }

    #[test]
    fn transition_rules_match_brute_force(
        k in 1usize..4,
        rule in tree(3, true),
    ) {
        let rule = clamp(rule, k);
        let spec = bool_spec(k, &[], &[rule.render(&pred_name)]);
        let space = enumerate_state_space(&spec).unwrap();
        for a in space.states() {
            for b in space.states() {
                let want = match (a.is_terminal(), b.is_terminal()) {
                    (true, _) => a == b,
                    (false, true) => true,
                    (false, false) => rule.eval(&|i, primed| if primed { b.bit(i) } else { a.bit(i) }),
                };
                prop_assert_eq!(is_valid_transition(a, b, &spec), want);
            }
        }
    }

    #[test]
    fn abstraction_bits_follow_predicates(values in proptest::collection::vec(any::<bool>(), 1..8)) {
        let spec = bool_spec(values.len(), &[], &[]);
        let c = values
            .iter()
            .enumerate()
            .fold(ConcreteState::new(), |c, (i, v)| c.with(&format!("v{i}"), *v));
        let s = abstract_state(&c, &spec).unwrap();
        prop_assert_eq!(s, SymbolicState::from_bits(&values));
        let id: u64 = values.iter().enumerate().map(|(i, &b)| (b as u64) << i).sum();
        prop_assert_eq!(s.id(), id);
    }

    #[test]
    fn atoms_reproduce_the_condition(
        t in tree(5, false),
        x in -5i64..10,
        y in prop_oneof![Just("a"), Just("b")],
        z in any::<bool>(),
        w in -3.0f64..3.0,
        open in any::<bool>(),
    ) {
        const ATOMS: [&str; 5] = ["x > 3", "y == \"a\"", "z", "w <= 1.5", "is_open(door)"];
        let condition = t.render(&|i, _| ATOMS[i].to_string());
        let atoms = atoms_of_unsafe_condition(&condition).unwrap();
        let used: std::collections::BTreeSet<usize> = leaves(&t).into_iter().collect();
        prop_assert_eq!(atoms.len(), used.len());

        let state = ConcreteState::new()
            .with("x", x)
            .with("y", y)
            .with("z", z)
            .with("w", w)
            .with("is_open.door", open);
        let lookup = |key: &str, _| state.get(key).cloned().ok_or_else(|| reachguard::expr::ExprError::UnknownVariable(key.into()));
        let truth: Vec<(String, bool)> = atoms
            .iter()
            .map(|a| (a.expr.canonical(), a.expr.eval_bool(&lookup).unwrap()))
            .collect();
        let direct = Expr::parse(&condition).unwrap().eval_bool(&lookup).unwrap();
        let via_atoms = t.eval(&|i, _| {
            let c = Expr::parse(ATOMS[i]).unwrap().canonical();
            truth.iter().find(|(k, _)| *k == c).unwrap().1
        });
        prop_assert_eq!(direct, via_atoms);
        let expected = [x > 3, y == "a", z, w <= 1.5, open];
        prop_assert_eq!(direct, t.eval(&|i, _| expected[i]));
    }
}

fn clamp(t: Tree, k: usize) -> Tree {
    match t {
        Tree::Leaf(i, p) => Tree::Leaf(i % k, p),
        Tree::Not(a) => Tree::Not(Box::new(clamp(*a, k))),
        Tree::And(a, b) => Tree::And(Box::new(clamp(*a, k)), Box::new(clamp(*b, k))),
        Tree::Or(a, b) => Tree::Or(Box::new(clamp(*a, k)), Box::new(clamp(*b, k))),
    }
}

fn leaves(t: &Tree) -> Vec<usize> {
    match t {
        Tree::Leaf(i, _) => vec![*i],
        Tree::Not(a) => leaves(a),
        Tree::And(a, b) | Tree::Or(a, b) => [leaves(a), leaves(b)].concat(),
    }
}

#[test]
fn unknown_and_mistyped_variables_are_reported() {
    let spec = bool_spec(2, &[], &[]);
    assert!(abstract_state(&ConcreteState::new().with("v0", true), &spec).is_err());
    let wrong = ConcreteState::new()
        .with("v0", true)
        .with("v1", Value::Int(3));
    assert!(abstract_state(&wrong, &spec).is_err());
}
