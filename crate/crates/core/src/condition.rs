//! Nested graph conditions and constraints.

use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::TypedGraph;
use crate::matching::{for_each_extension, MatchError};
use crate::morphism::GraphMorphism;

/// A nested graph condition. `∀(a, d)` is represented as `¬∃(a, ¬d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Condition {
    True,
    Exists { a: GraphMorphism, sub: Box<Condition> },
    Not(Box<Condition>),
    And(Box<Condition>, Box<Condition>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConditionError {
    #[error("condition is anchored at a different graph than the morphism's domain")]
    AnchorMismatch,
    #[error("condition morphism is not total and injective")]
    NotInjective,
    #[error(transparent)]
    Match(#[from] MatchError),
}

impl Condition {
    pub fn ff() -> Condition {
        Condition::Not(Box::new(Condition::True))
    }

    pub fn exists(a: GraphMorphism, sub: Condition) -> Condition {
        Condition::Exists { a, sub: Box::new(sub) }
    }

    /// `∃(a, true)`.
    pub fn exists_plain(a: GraphMorphism) -> Condition {
        Condition::exists(a, Condition::True)
    }

    /// Negation; collapses double negation.
    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Condition) -> Condition {
        match c {
            Condition::Not(inner) => *inner,
            other => Condition::Not(Box::new(other)),
        }
    }

    pub fn forall(a: GraphMorphism, sub: Condition) -> Condition {
        Condition::not(Condition::exists(a, Condition::not(sub)))
    }

    pub fn and(l: Condition, r: Condition) -> Condition {
        Condition::And(Box::new(l), Box::new(r))
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Condition::Not(inner) if **inner == Condition::True)
    }

    pub fn nesting_level(&self) -> usize {
        match self {
            Condition::True => 0,
            Condition::Exists { sub, .. } => sub.nesting_level() + 1,
            Condition::Not(sub) => sub.nesting_level(),
            Condition::And(l, r) => l.nesting_level().max(r.nesting_level()),
        }
    }

    /// Whether every outermost morphism starts at `anchor` and every nested
    /// condition is anchored at its parent's codomain.
    pub fn is_anchored_at(&self, anchor: &TypedGraph) -> bool {
        match self {
            Condition::True => true,
            Condition::Exists { a, sub } => **a.domain() == *anchor && sub.is_anchored_at(a.codomain()),
            Condition::Not(sub) => sub.is_anchored_at(anchor),
            Condition::And(l, r) => l.is_anchored_at(anchor) && r.is_anchored_at(anchor),
        }
    }

    /// Checks morphism well-formedness throughout the tree.
    pub fn check(&self, anchor: &TypedGraph) -> Result<(), ConditionError> {
        match self {
            Condition::True => Ok(()),
            Condition::Exists { a, sub } => {
                if **a.domain() != *anchor {
                    return Err(ConditionError::AnchorMismatch);
                }
                if !a.is_total() || !a.is_injective() {
                    return Err(ConditionError::NotInjective);
                }
                sub.check(a.codomain())
            }
            Condition::Not(sub) => sub.check(anchor),
            Condition::And(l, r) => {
                l.check(anchor)?;
                r.check(anchor)
            }
        }
    }
}

/// Whether `p` satisfies `cond`. `cond` must be anchored at the domain of `p`.
pub fn satisfies(p: &GraphMorphism, cond: &Condition) -> Result<bool, ConditionError> {
    if !cond.is_anchored_at(p.domain()) {
        return Err(ConditionError::AnchorMismatch);
    }
    eval(p, cond)
}

fn eval(p: &GraphMorphism, cond: &Condition) -> Result<bool, ConditionError> {
    Ok(match cond {
        Condition::True => true,
        Condition::Exists { a, sub } => {
            let mut found = false;
            let mut err = None;
            for_each_extension(a, p, |q| match eval(&q, sub) {
                Ok(true) => {
                    found = true;
                    ControlFlow::Break(())
                }
                Ok(false) => ControlFlow::Continue(()),
                Err(e) => {
                    err = Some(e);
                    ControlFlow::Break(())
                }
            })?;
            if let Some(e) = err {
                return Err(e);
            }
            found
        }
        Condition::Not(sub) => !eval(p, sub)?,
        Condition::And(l, r) => eval(p, l)? && eval(p, r)?,
    })
}

/// A named condition over the empty graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    root: Arc<TypedGraph>,
    pub condition: Condition,
}

impl Constraint {
    pub fn new(name: impl Into<String>, root: Arc<TypedGraph>, condition: Condition) -> Result<Constraint, ConditionError> {
        if !root.is_empty() {
            return Err(ConditionError::AnchorMismatch);
        }
        condition.check(&root)?;
        Ok(Constraint { name: name.into(), root, condition })
    }

    /// The empty graph the constraint is anchored at.
    pub fn root(&self) -> &Arc<TypedGraph> {
        &self.root
    }

    pub fn nesting_level(&self) -> usize {
        self.condition.nesting_level()
    }
}

/// Whether the empty morphism into `g` satisfies the constraint.
pub fn graph_satisfies(g: &Arc<TypedGraph>, c: &Constraint) -> Result<bool, ConditionError> {
    if !c.root.same_type_graph(g) {
        return Err(MatchError::TypeGraphMismatch.into());
    }
    let p = GraphMorphism::from_empty(c.root.clone(), g.clone()).map_err(|_| ConditionError::AnchorMismatch)?;
    satisfies(&p, &c.condition)
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::True => f.write_str("true"),
            c if c.is_false() => f.write_str("false"),
            Condition::Not(inner) => match &**inner {
                Condition::Exists { a, sub } => write!(f, "∀({}, {})", a.codomain(), Condition::not((**sub).clone())),
                other => write!(f, "¬{other}"),
            },
            Condition::Exists { a, sub } => {
                if **sub == Condition::True {
                    write!(f, "∃{}", a.codomain())
                } else {
                    write!(f, "∃({}, {})", a.codomain(), sub)
                }
            }
            Condition::And(l, r) => write!(f, "({l} ∧ {r})"),
        }
    }
}
