use std::fmt::Write as _;

use super::arena::{Node, NodeId};
use super::{rules, Guarded, Prover};
use crate::zones::Federation;

/// One rule application: the conclusion `(loc, zone) ⊢ formula` and the
/// placeholder it established.
#[derive(Clone, Debug)]
pub struct ProofNode {
    pub rule: &'static str,
    pub loc: usize,
    pub location: String,
    pub formula: NodeId,
    pub formula_text: String,
    pub zone: Federation,
    pub result: Federation,
    pub children: Vec<ProofNode>,
    /// Edge indices of the premises of action rules.
    pub edges: Vec<usize>,
    /// Variable key of unfold, leaf and memo nodes.
    pub key: Option<usize>,
}

impl ProofNode {
    pub fn is_valid(&self) -> bool {
        self.zone.is_subset(&self.result)
    }

    pub fn status(&self) -> String {
        if self.is_valid() {
            "valid".into()
        } else if self.result.is_empty() {
            "invalid".into()
        } else {
            format!("partial {}", self.result)
        }
    }

    /// One line per node, children indented by two spaces.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        let _ = writeln!(
            out,
            "{:indent$}RULE {} | {} | {} | {} | {}",
            "",
            self.rule,
            self.location,
            self.zone,
            self.formula_text,
            self.status(),
            indent = 2 * depth
        );
        for c in &self.children {
            c.render_into(out, depth + 1);
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(ProofNode::size).sum::<usize>()
    }

    /// Depth-first search for a node.
    pub fn find(&self, pred: &impl Fn(&ProofNode) -> bool) -> Option<&ProofNode> {
        if pred(self) {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(pred))
    }
}

impl Prover<'_> {
    fn expected(&self, loc: usize, kind: Guarded, x: NodeId) -> NodeId {
        if self.cfg.use_invariant_specialization || self.ta.locations[loc].invariant.is_trivial() {
            x
        } else {
            self.inv_nodes.get(&(loc, kind, x)).copied().unwrap_or(usize::MAX)
        }
    }

    /// Replays every node of `proof` against its premises.
    pub fn validate_proof(&self, proof: &ProofNode) -> Result<(), String> {
        self.check_node(proof)?;
        proof.children.iter().try_for_each(|c| self.validate_proof(c))
    }

    fn check_node(&self, n: &ProofNode) -> Result<(), String> {
        let fail = |why: &str| Err(format!("{} at {} | {} | {}: {why}", n.rule, n.location, n.zone, n.formula_text));
        let zone = &n.zone;
        let c = &n.children;
        let eq = |a: &Federation, b: &Federation| a.set_eq(b);
        let arity = |k: usize| c.len() == k;
        let premise = |i: usize, loc: usize, f: NodeId, z: &Federation| -> bool {
            c.get(i).is_some_and(|p| p.loc == loc && p.formula == f && p.zone.set_eq(z))
        };
        if !n.result.is_subset(zone) {
            return fail("placeholder exceeds the zone");
        }
        if n.rule == rules::EMPTY {
            return if zone.is_empty() && arity(0) { Ok(()) } else { fail("zone is not empty") };
        }
        if matches!(n.rule, rules::LEAF_NU | rules::LEAF_MU | rules::MEMO) {
            let k = n.key.ok_or("leaf without key")?;
            let (Some(v), Some(kz)) = (self.key_value(k), self.key_zone(k)) else {
                return fail("unknown key");
            };
            return if arity(0) && zone.is_subset(kz) && eq(&n.result, &zone.intersect(v)) {
                Ok(())
            } else {
                fail("leaf disagrees with its key")
            };
        }
        if n.rule == rules::UNFOLD {
            let Node::Var(v) = *self.arena.node(n.formula) else {
                return fail("unfold of a non-variable");
            };
            return match c.first() {
                Some(p) if arity(1) && p.formula == self.rhs[v] && p.loc == n.loc && zone.is_subset(&p.zone) => {
                    if eq(&n.result, &zone.intersect(&p.result)) {
                        Ok(())
                    } else {
                        fail("unfold result differs from its body")
                    }
                }
                _ => fail("malformed unfolding"),
            };
        }
        let node = self.arena.node(n.formula).clone();
        let none = Federation::empty(zone.clocks());
        let ok = match node {
            Node::True => arity(0) && eq(&n.result, zone),
            Node::False => arity(0) && n.result.is_empty(),
            Node::Prop(p) => arity(0) && eq(&n.result, if self.ta.has_label(n.loc, &p) { zone } else { &none }),
            Node::NegProp(p) => arity(0) && eq(&n.result, if self.ta.has_label(n.loc, &p) { &none } else { zone }),
            Node::Cc(a) => arity(0) && eq(&n.result, &zone.intersect_atoms(&[a])),
            Node::Var(_) => {
                let mut zs = Federation::empty(zone.clocks());
                let mut rs = Federation::empty(zone.clocks());
                for p in c {
                    if p.formula != n.formula || p.loc != n.loc {
                        return fail("variable premise mismatch");
                    }
                    zs = zs.union(&p.zone);
                    rs = rs.union(&p.result);
                }
                n.rule == rules::VAR && eq(&zs, zone) && eq(&rs, &n.result)
            }
            Node::And(a, b) => {
                arity(2) && premise(0, n.loc, a, zone) && premise(1, n.loc, b, &c[0].result) && eq(&n.result, &c[1].result)
            }
            Node::Or(a, b) => {
                let rest = if n.rule == rules::OR_S && arity(2) { zone.subtract(&c[0].result) } else { zone.clone() };
                arity(2)
                    && premise(0, n.loc, a, zone)
                    && premise(1, n.loc, b, &rest)
                    && eq(&n.result, &c[0].result.union(&c[1].result))
            }
            Node::DiaAct(act, x) => self.check_action(n, Some(act), x, true),
            Node::BoxAct(act, x) => self.check_action(n, Some(act), x, false),
            Node::DiaAll(x) => self.check_action(n, None, x, true),
            Node::BoxAll(x) => self.check_action(n, None, x, false),
            Node::Exists(x) => {
                let s = self.time_frame(n.loc, zone);
                arity(1)
                    && premise(0, n.loc, self.expected(n.loc, Guarded::InvAnd, x), &s)
                    && eq(&n.result, &zone.intersect(&c[0].result.pred()))
            }
            Node::Forall(x) => {
                let s = self.time_frame(n.loc, zone);
                arity(1)
                    && premise(0, n.loc, self.expected(n.loc, Guarded::NotInvOr, x), &s)
                    && eq(&n.result, &zone.subtract(&s.subtract(&c[0].result).pred()))
            }
            Node::ExistsRel(a, b) => {
                let s = self.time_frame(n.loc, zone);
                if !(arity(2) && premise(0, n.loc, self.expected(n.loc, Guarded::InvAnd, b), &s)) {
                    return fail("malformed premises");
                }
                let before = s.intersect(&c[0].result.pred_strict());
                premise(1, n.loc, a, &before)
                    && eq(
                        &n.result,
                        &zone.intersect(&Federation::timed_until(&c[0].result, &before.subtract(&c[1].result))),
                    )
            }
            Node::ForallRel(a, b) => {
                let s = self.time_frame(n.loc, zone);
                if !(arity(2) && premise(0, n.loc, self.expected(n.loc, Guarded::NotInvOr, b), &s)) {
                    return fail("malformed premises");
                }
                let (p2, p1) = (&c[0].result, &c[1].result);
                let always = zone.subtract(&s.subtract(p2).pred());
                let expected = if p1.is_empty() || s.is_subset(p2) {
                    (rules::FORALL_RO1, always)
                } else if zone.intersect(&self.inv[n.loc]).is_subset(p1) {
                    (rules::FORALL_RO2, zone.clone())
                } else {
                    let released = zone.intersect(&Federation::timed_until(p1, &s.subtract(p2)));
                    (rules::FORALL_RO3, always.union(&released))
                };
                premise(1, n.loc, self.expected(n.loc, Guarded::InvAnd, a), p2)
                    && n.rule == expected.0
                    && eq(&n.result, &expected.1)
            }
            Node::Freeze(z, x) => {
                arity(1)
                    && premise(0, n.loc, x, &zone.reset_unchecked(&[z]))
                    && eq(&n.result, &zone.intersect(&c[0].result.reset_preimage_unchecked(&[z])))
            }
            Node::MustAct => arity(0) && eq(&n.result, &self.must_act_within_one(n.loc, zone)),
            Node::CanDiverge => arity(0) && eq(&n.result, &self.elapse_forever(n.loc, zone)),
        };
        if ok {
            Ok(())
        } else {
            fail("conclusion does not follow from the premises")
        }
    }

    fn check_action(&self, n: &ProofNode, act: Option<usize>, x: NodeId, diamond: bool) -> bool {
        let succ = self.successors(n.loc, &n.zone, act);
        if succ.len() != n.children.len() || succ.iter().map(|s| s.0).ne(n.edges.iter().copied()) {
            return false;
        }
        let mut acc = Federation::empty(n.zone.clocks());
        for ((i, enabled, target), p) in succ.iter().zip(&n.children) {
            let e = &self.ta.edges[*i];
            if p.loc != e.target || p.formula != x || !p.zone.set_eq(target) {
                return false;
            }
            let pre = if diamond { p.result.clone() } else { target.subtract(&p.result) };
            acc = acc.union(&enabled.intersect(&pre.reset_preimage_unchecked(&e.resets)));
        }
        let expected = if diamond { acc } else { n.zone.subtract(&acc) };
        n.result.set_eq(&expected)
    }
}
