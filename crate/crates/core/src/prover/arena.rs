use std::collections::HashMap;

use crate::automaton::TimedAutomaton;
use crate::logic::{Formula, LogicError, Mes};
use crate::zones::{Atom, ClockSet};

pub type NodeId = usize;

/// A hash-consed formula node with names resolved to indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    True,
    False,
    Prop(String),
    NegProp(String),
    Cc(Atom),
    Var(usize),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    DiaAct(usize, NodeId),
    BoxAct(usize, NodeId),
    DiaAll(NodeId),
    BoxAll(NodeId),
    Exists(NodeId),
    Forall(NodeId),
    ExistsRel(NodeId, NodeId),
    ForallRel(NodeId, NodeId),
    Freeze(usize, NodeId),
    MustAct,
    CanDiverge,
}

pub struct Arena {
    nodes: Vec<Node>,
    source: Vec<Formula>,
    index: HashMap<Node, NodeId>,
}

impl Arena {
    pub fn new() -> Arena {
        Arena {
            nodes: Vec::new(),
            source: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn formula(&self, id: NodeId) -> &Formula {
        &self.source[id]
    }

    /// The id of an already interned formula.
    pub fn find(&self, f: &Formula, ctx: &Context<'_>) -> Option<NodeId> {
        let node = match f {
            Formula::True => Node::True,
            Formula::False => Node::False,
            Formula::Prop(p) => Node::Prop(p.clone()),
            Formula::NegProp(p) => Node::NegProp(p.clone()),
            Formula::Constraint { clock, op, value } => Node::Cc(Atom::new(ctx.clock(clock).ok()?, *op, *value)),
            Formula::Var(v) => Node::Var(ctx.mes.index_of(v)?),
            Formula::And(a, b) => Node::And(self.find(a, ctx)?, self.find(b, ctx)?),
            Formula::Or(a, b) => Node::Or(self.find(a, ctx)?, self.find(b, ctx)?),
            Formula::DiamondAct(a, x) => Node::DiaAct(ctx.ta.action_index(a)?, self.find(x, ctx)?),
            Formula::BoxAct(a, x) => Node::BoxAct(ctx.ta.action_index(a)?, self.find(x, ctx)?),
            Formula::DiamondAll(x) => Node::DiaAll(self.find(x, ctx)?),
            Formula::BoxAll(x) => Node::BoxAll(self.find(x, ctx)?),
            Formula::ExistsTime(x) => Node::Exists(self.find(x, ctx)?),
            Formula::ForallTime(x) => Node::Forall(self.find(x, ctx)?),
            Formula::ExistsRel(a, b) => Node::ExistsRel(self.find(a, ctx)?, self.find(b, ctx)?),
            Formula::ForallRel(a, b) => Node::ForallRel(self.find(a, ctx)?, self.find(b, ctx)?),
            Formula::Freeze(z, x) => Node::Freeze(ctx.clock(z).ok()?, self.find(x, ctx)?),
            Formula::MustAct => Node::MustAct,
            Formula::CanDiverge => Node::CanDiverge,
        };
        self.index.get(&node).copied()
    }

    pub fn intern(&mut self, f: &Formula, ctx: &Context<'_>) -> Result<NodeId, LogicError> {
        let node = match f {
            Formula::True => Node::True,
            Formula::False => Node::False,
            Formula::Prop(p) => Node::Prop(p.clone()),
            Formula::NegProp(p) => Node::NegProp(p.clone()),
            Formula::Constraint { clock, op, value } => Node::Cc(Atom::new(ctx.clock(clock)?, *op, *value)),
            Formula::Var(v) => Node::Var(ctx.mes.index_of(v).ok_or_else(|| LogicError::Unbound(v.clone()))?),
            Formula::And(a, b) => Node::And(self.intern(a, ctx)?, self.intern(b, ctx)?),
            Formula::Or(a, b) => Node::Or(self.intern(a, ctx)?, self.intern(b, ctx)?),
            Formula::DiamondAct(a, x) => Node::DiaAct(ctx.action(a)?, self.intern(x, ctx)?),
            Formula::BoxAct(a, x) => Node::BoxAct(ctx.action(a)?, self.intern(x, ctx)?),
            Formula::DiamondAll(x) => Node::DiaAll(self.intern(x, ctx)?),
            Formula::BoxAll(x) => Node::BoxAll(self.intern(x, ctx)?),
            Formula::ExistsTime(x) => Node::Exists(self.intern(x, ctx)?),
            Formula::ForallTime(x) => Node::Forall(self.intern(x, ctx)?),
            Formula::ExistsRel(a, b) => Node::ExistsRel(self.intern(a, ctx)?, self.intern(b, ctx)?),
            Formula::ForallRel(a, b) => Node::ForallRel(self.intern(a, ctx)?, self.intern(b, ctx)?),
            Formula::Freeze(z, x) => Node::Freeze(ctx.clock(z)?, self.intern(x, ctx)?),
            Formula::MustAct => Node::MustAct,
            Formula::CanDiverge => Node::CanDiverge,
        };
        if let Some(&id) = self.index.get(&node) {
            return Ok(id);
        }
        let id = self.nodes.len();
        self.index.insert(node.clone(), id);
        self.nodes.push(node);
        self.source.push(f.clone());
        Ok(id)
    }
}

/// Name resolution for interning.
pub struct Context<'a> {
    pub ta: &'a TimedAutomaton,
    pub mes: &'a Mes,
    pub clocks: &'a ClockSet,
}

impl Context<'_> {
    fn clock(&self, name: &str) -> Result<usize, LogicError> {
        self.clocks
            .lookup(name)
            .map(|c| c.index)
            .ok_or_else(|| LogicError::Invalid(format!("undeclared clock `{name}`")))
    }

    fn action(&self, name: &str) -> Result<usize, LogicError> {
        self.ta
            .action_index(name)
            .ok_or_else(|| LogicError::Invalid(format!("undeclared action `{name}`")))
    }
}
