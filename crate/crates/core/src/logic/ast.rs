use std::collections::BTreeSet;
use std::fmt;

use crate::zones::CmpOp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Mu,
    Nu,
}

impl Parity {
    pub fn keyword(self) -> &'static str {
        match self {
            Parity::Mu => "mu",
            Parity::Nu => "nu",
        }
    }
}

/// Basic formulas. Negation is only available on propositions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Prop(String),
    NegProp(String),
    Constraint { clock: String, op: CmpOp, value: i64 },
    Var(String),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    DiamondAct(String, Box<Formula>),
    BoxAct(String, Box<Formula>),
    DiamondAll(Box<Formula>),
    BoxAll(Box<Formula>),
    ExistsTime(Box<Formula>),
    ForallTime(Box<Formula>),
    ExistsRel(Box<Formula>, Box<Formula>),
    ForallRel(Box<Formula>, Box<Formula>),
    Freeze(String, Box<Formula>),
    /// `∃ z.∀(z < 1)`: time cannot advance by a full unit from some
    /// reachable delay, i.e. the invariant forces an action.
    MustAct,
    /// `∀ z.∃(z ≥ 1)`: time can always advance by one more unit.
    CanDiverge,
}

/// Freeze clock name used when the markers are expanded. The leading
/// underscore keeps it out of the user-facing identifier space.
pub const MARKER_CLOCK: &str = "_z";

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn prop(p: &str) -> Formula {
        Formula::Prop(p.to_string())
    }

    pub fn neg_prop(p: &str) -> Formula {
        Formula::NegProp(p.to_string())
    }

    pub fn var(v: &str) -> Formula {
        Formula::Var(v.to_string())
    }

    pub fn constraint(clock: &str, op: CmpOp, value: i64) -> Formula {
        Formula::Constraint {
            clock: clock.to_string(),
            op,
            value,
        }
    }

    pub fn exists(f: Formula) -> Formula {
        Formula::ExistsTime(Box::new(f))
    }

    pub fn forall(f: Formula) -> Formula {
        Formula::ForallTime(Box::new(f))
    }

    pub fn exists_rel(a: Formula, b: Formula) -> Formula {
        Formula::ExistsRel(Box::new(a), Box::new(b))
    }

    pub fn forall_rel(a: Formula, b: Formula) -> Formula {
        Formula::ForallRel(Box::new(a), Box::new(b))
    }

    pub fn box_all(f: Formula) -> Formula {
        Formula::BoxAll(Box::new(f))
    }

    pub fn dia_all(f: Formula) -> Formula {
        Formula::DiamondAll(Box::new(f))
    }

    pub fn box_act(a: &str, f: Formula) -> Formula {
        Formula::BoxAct(a.to_string(), Box::new(f))
    }

    pub fn dia_act(a: &str, f: Formula) -> Formula {
        Formula::DiamondAct(a.to_string(), Box::new(f))
    }

    pub fn freeze(z: &str, f: Formula) -> Formula {
        Formula::Freeze(z.to_string(), Box::new(f))
    }

    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            True | False | Prop(_) | NegProp(_) | Constraint { .. } | Var(_) | MustAct | CanDiverge => vec![],
            And(a, b) | Or(a, b) | ExistsRel(a, b) | ForallRel(a, b) => vec![a, b],
            DiamondAct(_, f) | BoxAct(_, f) | DiamondAll(f) | BoxAll(f) | ExistsTime(f) | ForallTime(f)
            | Freeze(_, f) => vec![f],
        }
    }

    /// Rebuilds the node with `f` applied to each direct child.
    pub fn map_children(&self, f: &mut impl FnMut(&Formula) -> Formula) -> Formula {
        use Formula::*;
        let b = |x: Formula| Box::new(x);
        match self {
            True | False | Prop(_) | NegProp(_) | Constraint { .. } | Var(_) | MustAct | CanDiverge => self.clone(),
            And(x, y) => And(b(f(x)), b(f(y))),
            Or(x, y) => Or(b(f(x)), b(f(y))),
            ExistsRel(x, y) => ExistsRel(b(f(x)), b(f(y))),
            ForallRel(x, y) => ForallRel(b(f(x)), b(f(y))),
            DiamondAct(a, x) => DiamondAct(a.clone(), b(f(x))),
            BoxAct(a, x) => BoxAct(a.clone(), b(f(x))),
            DiamondAll(x) => DiamondAll(b(f(x))),
            BoxAll(x) => BoxAll(b(f(x))),
            ExistsTime(x) => ExistsTime(b(f(x))),
            ForallTime(x) => ForallTime(b(f(x))),
            Freeze(z, x) => Freeze(z.clone(), b(f(x))),
        }
    }

    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |g| {
            if let Formula::Var(v) = g {
                out.insert(v.clone());
            }
        });
        out
    }

    /// Whether the formula is built from propositions, their negations,
    /// `true`, `false`, `&&` and `||` only.
    pub fn is_prop_lattice(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Prop(_) | Formula::NegProp(_) => true,
            Formula::And(a, b) | Formula::Or(a, b) => a.is_prop_lattice() && b.is_prop_lattice(),
            _ => false,
        }
    }

    /// Dual of a proposition lattice formula (pushes negation to literals).
    pub fn negate_prop_lattice(&self) -> Option<Formula> {
        Some(match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Prop(p) => Formula::NegProp(p.clone()),
            Formula::NegProp(p) => Formula::Prop(p.clone()),
            Formula::And(a, b) => Formula::or(a.negate_prop_lattice()?, b.negate_prop_lattice()?),
            Formula::Or(a, b) => Formula::and(a.negate_prop_lattice()?, b.negate_prop_lattice()?),
            _ => return None,
        })
    }

    /// Replaces every `∀_rel(ψ1, ψ2)` by `∀ψ2 ∨ ∃_rel(ψ2, ψ1 ∧ ψ2)`.
    pub fn rewrite_forall_rel(&self) -> Formula {
        match self {
            Formula::ForallRel(a, b) => {
                let a = a.rewrite_forall_rel();
                let b = b.rewrite_forall_rel();
                Formula::or(Formula::forall(b.clone()), Formula::exists_rel(b.clone(), Formula::and(a, b)))
            }
            other => other.map_children(&mut |c| c.rewrite_forall_rel()),
        }
    }

    /// Expands the two special operators into their freeze forms.
    pub fn desugar_markers(&self) -> Formula {
        let one = |op| Formula::constraint(MARKER_CLOCK, op, 1);
        match self {
            Formula::MustAct => Formula::exists(Formula::freeze(MARKER_CLOCK, Formula::forall(one(CmpOp::Lt)))),
            Formula::CanDiverge => Formula::forall(Formula::freeze(MARKER_CLOCK, Formula::exists(one(CmpOp::Ge)))),
            other => other.map_children(&mut |c| c.desugar_markers()),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Or(..) => 0,
            Formula::And(..) => 1,
            _ => 2,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Formula, min: u8) -> fmt::Result {
    if child.prec() < min {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Formula::*;
        match self {
            True => f.write_str("true"),
            False => f.write_str("false"),
            Prop(p) => f.write_str(p),
            NegProp(p) => write!(f, "!{p}"),
            Constraint { clock, op, value } => write!(f, "{clock} {op} {value}"),
            Var(v) => f.write_str(v),
            // Right operands get a strictly higher floor so that printing
            // preserves the tree shape under left-associative parsing.
            And(a, b) => {
                write_child(f, a, 1)?;
                f.write_str(" && ")?;
                write_child(f, b, 2)
            }
            Or(a, b) => {
                write_child(f, a, 0)?;
                f.write_str(" || ")?;
                write_child(f, b, 1)
            }
            DiamondAct(a, x) => write!(f, "dia {a} ({x})"),
            BoxAct(a, x) => write!(f, "box {a} ({x})"),
            DiamondAll(x) => write!(f, "diaall({x})"),
            BoxAll(x) => write!(f, "boxall({x})"),
            ExistsTime(x) => write!(f, "exists({x})"),
            ForallTime(x) => write!(f, "forall({x})"),
            ExistsRel(a, b) => write!(f, "existsrel({a}; {b})"),
            ForallRel(a, b) => write!(f, "forallrel({a}; {b})"),
            Freeze(z, x) => write!(f, "freeze {z} ({x})"),
            MustAct => f.write_str("exists(freeze z (forall(z < 1)))"),
            CanDiverge => f.write_str("forall(freeze z (exists(z >= 1)))"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub var: String,
    pub parity: Parity,
    pub rhs: Formula,
}

/// Ordered equation system; the first equation is the entry point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mes {
    pub equations: Vec<Equation>,
}

impl Mes {
    pub fn new(equations: Vec<Equation>) -> Mes {
        Mes { equations }
    }

    pub fn single(var: &str, parity: Parity, rhs: Formula) -> Mes {
        Mes::new(vec![Equation {
            var: var.to_string(),
            parity,
            rhs,
        }])
    }

    pub fn entry(&self) -> &str {
        &self.equations[0].var
    }

    pub fn index_of(&self, var: &str) -> Option<usize> {
        self.equations.iter().position(|e| e.var == var)
    }

    pub fn map_rhs(&self, f: impl Fn(&Formula) -> Formula) -> Mes {
        Mes::new(
            self.equations
                .iter()
                .map(|e| Equation {
                    var: e.var.clone(),
                    parity: e.parity,
                    rhs: f(&e.rhs),
                })
                .collect(),
        )
    }

    pub fn rewrite_forall_rel(&self) -> Mes {
        self.map_rhs(Formula::rewrite_forall_rel)
    }

    pub fn desugar_markers(&self) -> Mes {
        self.map_rhs(Formula::desugar_markers)
    }

    /// Freeze clock names bound anywhere in the system, in first-seen order.
    pub fn freeze_clocks(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in &self.equations {
            e.rhs.visit(&mut |g| {
                if let Formula::Freeze(z, _) = g {
                    if !out.contains(z) {
                        out.push(z.clone());
                    }
                }
            });
        }
        out
    }

    /// Constants compared against each named clock.
    pub fn clock_constants(&self) -> Vec<(String, i64)> {
        let mut out: Vec<(String, i64)> = Vec::new();
        for e in &self.equations {
            e.rhs.visit(&mut |g| match g {
                Formula::Constraint { clock, value, .. } => match out.iter_mut().find(|(c, _)| c == clock) {
                    Some(entry) => entry.1 = entry.1.max(*value),
                    None => out.push((clock.clone(), *value)),
                },
                _ => {}
            });
        }
        out
    }

    /// Propositions mentioned anywhere.
    pub fn props(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for e in &self.equations {
            e.rhs.visit(&mut |g| {
                if let Formula::Prop(p) | Formula::NegProp(p) = g {
                    out.insert(p.clone());
                }
            });
        }
        out
    }
}

impl fmt::Display for Mes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.equations.iter().enumerate() {
            if i > 0 {
                f.write_str(";\n")?;
            }
            write!(f, "{} ={} {}", e.var, e.parity.keyword(), e.rhs)?;
        }
        Ok(())
    }
}
