use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    Lt,
    Le,
    Ge,
    Gt,
}

impl Bound {
    pub fn symbol(self) -> &'static str {
        match self {
            Bound::Lt => "<",
            Bound::Le => "<=",
            Bound::Ge => ">=",
            Bound::Gt => ">",
        }
    }

    /// Exact comparison `value ⋈ theta`.
    pub fn holds<T: PartialOrd>(self, value: &T, theta: &T) -> bool {
        match self {
            Bound::Lt => value < theta,
            Bound::Le => value <= theta,
            Bound::Ge => value >= theta,
            Bound::Gt => value > theta,
        }
    }

    /// True for `<` and `<=`, which cap the probability from above.
    pub fn is_upper(self) -> bool {
        matches!(self, Bound::Lt | Bound::Le)
    }

    /// The bound `⋈'` with `p ⋈ θ ⟺ 1−p ⋈' 1−θ`.
    pub fn flip(self) -> Bound {
        match self {
            Bound::Lt => Bound::Gt,
            Bound::Le => Bound::Ge,
            Bound::Ge => Bound::Le,
            Bound::Gt => Bound::Lt,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateFormula {
    True,
    Atom(String),
    Not(Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    Prob {
        bound: Bound,
        theta: f64,
        path: Box<PathFormula>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathFormula {
    Next(StateFormula),
    Until {
        left: StateFormula,
        right: StateFormula,
        bound: Option<u64>,
    },
    Eventually(StateFormula),
    Globally(StateFormula),
}

impl StateFormula {
    pub fn atom(name: &str) -> Self {
        StateFormula::Atom(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: StateFormula) -> Self {
        StateFormula::Not(Box::new(f))
    }

    pub fn and(a: StateFormula, b: StateFormula) -> Self {
        StateFormula::And(Box::new(a), Box::new(b))
    }

    pub fn prob(bound: Bound, theta: f64, path: PathFormula) -> Self {
        StateFormula::Prob {
            bound,
            theta,
            path: Box::new(path),
        }
    }

    /// Rewrites sugar: `F φ` becomes `true U φ`, and `P⋈θ [G φ]` becomes
    /// `P⋈'(1−θ) [true U !φ]`.
    pub fn normalize(&self) -> StateFormula {
        match self {
            StateFormula::True | StateFormula::Atom(_) => self.clone(),
            StateFormula::Not(f) => StateFormula::not(f.normalize()),
            StateFormula::And(a, b) => StateFormula::and(a.normalize(), b.normalize()),
            StateFormula::Prob { bound, theta, path } => match path.as_ref() {
                PathFormula::Globally(f) => StateFormula::prob(
                    bound.flip(),
                    1.0 - theta,
                    PathFormula::Until {
                        left: StateFormula::True,
                        right: StateFormula::not(f.normalize()),
                        bound: None,
                    },
                ),
                other => StateFormula::prob(*bound, *theta, other.normalize()),
            },
        }
    }

    /// Atom names in first-occurrence order.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            StateFormula::True => {}
            StateFormula::Atom(a) => {
                if !out.contains(&a.as_str()) {
                    out.push(a)
                }
            }
            StateFormula::Not(f) => f.collect_atoms(out),
            StateFormula::And(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            StateFormula::Prob { path, .. } => match path.as_ref() {
                PathFormula::Next(f) | PathFormula::Eventually(f) | PathFormula::Globally(f) => {
                    f.collect_atoms(out)
                }
                PathFormula::Until { left, right, .. } => {
                    left.collect_atoms(out);
                    right.collect_atoms(out);
                }
            },
        }
    }

    fn write(&self, out: &mut String, tight: bool) {
        match self {
            StateFormula::True => out.push_str("true"),
            StateFormula::Atom(a) => out.push_str(a),
            StateFormula::Not(f) => {
                out.push('!');
                f.write(out, true);
            }
            StateFormula::And(a, b) => {
                if tight {
                    out.push('(');
                }
                a.write(out, false);
                out.push_str(" & ");
                b.write(out, true);
                if tight {
                    out.push(')');
                }
            }
            StateFormula::Prob { bound, theta, path } => {
                out.push('P');
                out.push_str(bound.symbol());
                out.push_str(&theta.to_string());
                out.push_str(" [ ");
                path.write(out);
                out.push_str(" ]");
            }
        }
    }
}

impl PathFormula {
    pub fn normalize(&self) -> PathFormula {
        match self {
            PathFormula::Next(f) => PathFormula::Next(f.normalize()),
            PathFormula::Until { left, right, bound } => PathFormula::Until {
                left: left.normalize(),
                right: right.normalize(),
                bound: *bound,
            },
            PathFormula::Eventually(f) => PathFormula::Until {
                left: StateFormula::True,
                right: f.normalize(),
                bound: None,
            },
            // only reachable outside a Prob node; left as is
            PathFormula::Globally(f) => PathFormula::Globally(f.normalize()),
        }
    }

    fn write(&self, out: &mut String) {
        match self {
            PathFormula::Next(f) => {
                out.push_str("X ");
                f.write(out, true);
            }
            PathFormula::Eventually(f) => {
                out.push_str("F ");
                f.write(out, true);
            }
            PathFormula::Globally(f) => {
                out.push_str("G ");
                f.write(out, true);
            }
            PathFormula::Until { left, right, bound } => {
                left.write(out, false);
                match bound {
                    Some(k) => out.push_str(&format!(" U<={k} ")),
                    None => out.push_str(" U "),
                }
                right.write(out, false);
            }
        }
    }
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s, false);
        f.write_str(&s)
    }
}

impl fmt::Display for PathFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s);
        f.write_str(&s)
    }
}

/// Canonical text of a formula.
pub fn pretty(formula: &StateFormula) -> String {
    formula.to_string()
}
