use std::collections::BTreeSet;
use std::fmt;

use super::ast::{Equation, Formula, Mes, Parity};

/// The unnested TCTL shapes with proposition-lattice operands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TctlSpec {
    AG(Formula),
    AF(Formula),
    EF(Formula),
    EG(Formula),
    /// `AG(p → AF q)`.
    LeadsTo(Formula, Formula),
}

impl fmt::Display for TctlSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TctlSpec::AG(p) => write!(f, "AG({p})"),
            TctlSpec::AF(p) => write!(f, "AF({p})"),
            TctlSpec::EF(p) => write!(f, "EF({p})"),
            TctlSpec::EG(p) => write!(f, "EG({p})"),
            TctlSpec::LeadsTo(p, q) => write!(f, "{p} --> {q}"),
        }
    }
}

fn props_of(fs: &[&Formula]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for f in fs {
        f.visit(&mut |g| {
            if let Formula::Prop(p) | Formula::NegProp(p) = g {
                out.insert(p.clone());
            }
        });
    }
    out
}

/// A variable name that does not clash with any proposition.
fn fresh(base: &str, taken: &BTreeSet<String>) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('_');
    }
    name
}

fn eq(var: &str, parity: Parity, rhs: Formula) -> Equation {
    Equation {
        var: var.to_string(),
        parity,
        rhs,
    }
}

impl TctlSpec {
    fn operands(&self) -> Vec<&Formula> {
        match self {
            TctlSpec::AG(p) | TctlSpec::AF(p) | TctlSpec::EF(p) | TctlSpec::EG(p) => vec![p],
            TctlSpec::LeadsTo(p, q) => vec![p, q],
        }
    }

    fn names(&self) -> (String, String) {
        let taken = props_of(&self.operands());
        (fresh("Y", &taken), fresh("Y2", &taken))
    }

    /// The simplified equation systems.
    pub fn compile(&self) -> Mes {
        use Formula as F;
        let (y, y2) = self.names();
        let yv = || F::var(&y);
        match self {
            TctlSpec::AG(p) => Mes::new(vec![eq(&y, Parity::Nu, F::and(p.clone(), F::forall(F::box_all(yv()))))]),
            TctlSpec::AF(p) => Mes::new(vec![eq(&y, Parity::Mu, af_body(p, &y))]),
            TctlSpec::EF(p) => Mes::new(vec![eq(&y, Parity::Mu, F::or(p.clone(), F::exists(F::dia_all(yv()))))]),
            TctlSpec::EG(p) => Mes::new(vec![eq(
                &y,
                Parity::Nu,
                F::and(p.clone(), F::or(F::exists(F::dia_all(yv())), F::CanDiverge)),
            )]),
            TctlSpec::LeadsTo(p, q) => {
                let not_p = p.negate_prop_lattice().expect("proposition lattice");
                Mes::new(vec![
                    eq(&y, Parity::Nu, F::and(F::or(not_p, F::var(&y2)), F::forall(F::box_all(yv())))),
                    eq(&y2, Parity::Mu, af_body(q, &y2)),
                ])
            }
        }
    }

    /// The relativized formulations the simplified systems are derived from.
    pub fn compile_unsimplified(&self) -> Mes {
        use Formula as F;
        let (y, y2) = self.names();
        let yv = || F::var(&y);
        match self {
            TctlSpec::AG(p) => Mes::new(vec![eq(&y, Parity::Nu, F::forall(F::and(p.clone(), F::box_all(yv()))))]),
            TctlSpec::AF(p) => Mes::new(vec![eq(&y, Parity::Mu, af_relativized(p, &y))]),
            TctlSpec::EF(p) => Mes::new(vec![eq(
                &y,
                Parity::Mu,
                F::exists_rel(F::True, F::or(p.clone(), F::dia_all(yv()))),
            )]),
            TctlSpec::EG(p) => Mes::new(vec![eq(
                &y,
                Parity::Nu,
                F::or(
                    F::exists_rel(p.clone(), F::and(p.clone(), F::dia_all(yv()))),
                    F::and(F::forall(p.clone()), F::CanDiverge),
                ),
            )]),
            TctlSpec::LeadsTo(p, q) => {
                let not_p = p.negate_prop_lattice().expect("proposition lattice");
                Mes::new(vec![
                    eq(&y, Parity::Nu, F::forall(F::and(F::or(not_p, F::var(&y2)), F::box_all(yv())))),
                    eq(&y2, Parity::Mu, af_relativized(q, &y2)),
                ])
            }
        }
    }
}

fn af_body(p: &Formula, y: &str) -> Formula {
    use Formula as F;
    F::or(p.clone(), F::and(F::forall(F::box_all(F::var(y))), F::MustAct))
}

fn af_relativized(p: &Formula, y: &str) -> Formula {
    use Formula as F;
    F::and(
        F::forall_rel(p.clone(), F::or(p.clone(), F::box_all(F::var(y)))),
        F::or(F::MustAct, F::exists(p.clone())),
    )
}

pub fn compile_tctl(spec: &TctlSpec) -> Mes {
    spec.compile()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{check_alternation_free, parse_mes, parse_tctl};

    #[test]
    fn ag_matches_safety_equation() {
        let m = compile_tctl(&parse_tctl("AG(!broke)").unwrap());
        let expected = parse_mes("Y =nu !broke && forall(boxall(Y))").unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn af_has_inevitability_shape() {
        let m = compile_tctl(&parse_tctl("AF(!far)").unwrap());
        let expected = parse_mes("Y =mu !far || (forall(boxall(Y)) && exists(freeze z (forall(z < 1))))").unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn leads_to_has_two_equations() {
        let m = compile_tctl(&parse_tctl("near --> in").unwrap());
        assert_eq!(m.equations.len(), 2);
        assert_eq!(m.equations[1].parity, Parity::Mu);
        let af = compile_tctl(&TctlSpec::AF(Formula::prop("in")));
        let renamed = af.equations[0].rhs.to_string().replace('Y', "Y2");
        assert_eq!(m.equations[1].rhs.to_string(), renamed);
        assert!(check_alternation_free(&m).is_ok());
        // The obligation is re-checked after every step, not only where `near` holds.
        assert_eq!(m.equations[0].rhs.to_string(), "(!near || Y2) && forall(boxall(Y))");
    }

    #[test]
    fn variable_names_avoid_propositions() {
        let m = compile_tctl(&TctlSpec::EF(Formula::prop("Y")));
        assert_eq!(m.entry(), "Y_");
    }

    #[test]
    fn unsimplified_forms_are_alternation_free() {
        for s in ["AG(a)", "AF(a && !b)", "EF(a || b)", "EG(!a)", "a --> b"] {
            let spec = parse_tctl(s).unwrap();
            assert!(check_alternation_free(&spec.compile_unsimplified()).is_ok());
        }
    }
}
