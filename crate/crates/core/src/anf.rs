//! Alternating quantifier normal form: validation and chain evaluation.

use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::condition::{Condition, Constraint};
use crate::graph::TypedGraph;
use crate::matching::for_each_extension;
use crate::morphism::GraphMorphism;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Quantifier {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Exists => "∃",
            Quantifier::Forall => "∀",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Existential,
    Universal,
}

/// Why a constraint is not in ANF. `level` is the 0-based chain position.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnfError {
    #[error("nesting level is 0")]
    NoQuantifier,
    #[error("conjunction at level {level}")]
    InnerAnd { level: usize },
    #[error("quantifier {quantifier} at level {level} repeats the previous one")]
    NonAlternating { level: usize, quantifier: Quantifier },
    #[error("morphism at level {level} is an isomorphism")]
    Isomorphism { level: usize },
    #[error("morphism at level {level} is not total and injective")]
    NotInjective { level: usize },
}

/// The quantifier chain of an ANF constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnfShape {
    pub polarity: Polarity,
    pub chain: Vec<(Quantifier, GraphMorphism)>,
    pub ends_with_false: bool,
}

pub fn validate_anf(c: &Constraint) -> Result<AnfShape, AnfError> {
    let mut chain: Vec<(Quantifier, GraphMorphism)> = Vec::new();
    let mut negated = false;
    let mut cur = &c.condition;
    loop {
        match cur {
            Condition::True => break,
            Condition::Not(inner) => {
                negated = !negated;
                cur = inner;
            }
            Condition::And(..) => return Err(AnfError::InnerAnd { level: chain.len() }),
            Condition::Exists { a, sub } => {
                let level = chain.len();
                let q = if negated { Quantifier::Forall } else { Quantifier::Exists };
                if chain.last().is_some_and(|(prev, _)| *prev == q) {
                    return Err(AnfError::NonAlternating { level, quantifier: q });
                }
                if !a.is_total() || !a.is_injective() {
                    return Err(AnfError::NotInjective { level });
                }
                if a.is_isomorphism() {
                    return Err(AnfError::Isomorphism { level });
                }
                chain.push((q, a.clone()));
                cur = sub;
            }
        }
    }
    let Some((first, _)) = chain.first() else {
        return Err(AnfError::NoQuantifier);
    };
    let polarity = match first {
        Quantifier::Exists => Polarity::Existential,
        Quantifier::Forall => Polarity::Universal,
    };
    Ok(AnfShape { polarity, chain, ends_with_false: negated })
}

impl AnfShape {
    /// The outermost graph C.
    pub fn outer_graph(&self) -> &Arc<TypedGraph> {
        self.chain[0].1.codomain()
    }

    pub fn nesting_level(&self) -> usize {
        self.chain.len()
    }

    /// Evaluates the chain suffix starting at `level`, where `p` maps the
    /// domain of `chain[level]` into the host.
    pub fn eval_from(&self, level: usize, p: &GraphMorphism) -> bool {
        let Some((q, a)) = self.chain.get(level) else {
            return !self.ends_with_false;
        };
        let mut hit = false;
        let want = *q == Quantifier::Exists;
        for_each_extension(a, p, |ext| {
            if self.eval_from(level + 1, &ext) == want {
                hit = true;
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .expect("chain morphisms and host share a type graph");
        if want {
            hit
        } else {
            !hit
        }
    }

    /// Whether an occurrence `p` of the outer graph satisfies the rest of the
    /// chain, i.e. the body `d` of `Q(C, d)`.
    pub fn occurrence_valid(&self, p: &GraphMorphism) -> bool {
        self.eval_from(1, p)
    }

    /// `¬∃C`.
    pub fn is_negative(&self) -> bool {
        self.chain.len() == 1 && self.polarity == Polarity::Universal && self.ends_with_false
    }

    /// `∀(C, ∃C′)`.
    pub fn is_forall_exists(&self) -> bool {
        self.chain.len() == 2 && self.polarity == Polarity::Universal && !self.ends_with_false
    }

    /// `∀(C1, ∃(C2, ¬∃C3))`.
    pub fn is_forall_exists_not(&self) -> bool {
        self.chain.len() == 3 && self.polarity == Polarity::Universal && self.ends_with_false
    }
}

impl fmt::Display for AnfShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, a) in &self.chain {
            write!(f, "{q}({}, ", a.codomain())?;
        }
        f.write_str(if self.ends_with_false { "false" } else { "true" })?;
        for _ in &self.chain {
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::graph_satisfies;
    use crate::graph::{EdgeType, TypeGraph};

    fn types() -> Arc<TypeGraph> {
        Arc::new(
            TypeGraph::new(
                ["Class", "Feature"],
                [EdgeType { name: "isAssigned".into(), src: "Feature".into(), tgt: "Class".into() }],
            )
            .unwrap(),
        )
    }

    struct Fx {
        empty: Arc<TypedGraph>,
        c: Arc<TypedGraph>,
        cf: Arc<TypedGraph>,
    }

    fn fx() -> Fx {
        let t = types();
        let empty = Arc::new(TypedGraph::new(t.clone()));
        let c = Arc::new(TypedGraph::new(t).with_node("c", "Class"));
        let cf = Arc::new((*c).clone().with_node("f", "Feature").with_edge("e", "isAssigned", "f", "c"));
        Fx { empty, c, cf }
    }

    fn a1(x: &Fx) -> GraphMorphism {
        GraphMorphism::from_empty(x.empty.clone(), x.c.clone()).unwrap()
    }

    fn a2(x: &Fx) -> GraphMorphism {
        GraphMorphism::inclusion(x.c.clone(), x.cf.clone()).unwrap()
    }

    #[test]
    fn negative_constraint_is_universal_with_one_level() {
        let x = fx();
        let c = Constraint::new("n", x.empty.clone(), Condition::not(Condition::exists_plain(a1(&x)))).unwrap();
        let s = validate_anf(&c).unwrap();
        assert_eq!(s.polarity, Polarity::Universal);
        assert_eq!(s.chain.len(), 1);
        assert!(s.ends_with_false);
        assert!(s.is_negative());
    }

    #[test]
    fn forall_exists_shape() {
        let x = fx();
        let c = Constraint::new("u", x.empty.clone(), Condition::forall(a1(&x), Condition::exists_plain(a2(&x)))).unwrap();
        let s = validate_anf(&c).unwrap();
        assert_eq!(s.polarity, Polarity::Universal);
        assert_eq!(s.chain.iter().map(|(q, _)| *q).collect::<Vec<_>>(), [Quantifier::Forall, Quantifier::Exists]);
        assert!(!s.ends_with_false);
        assert!(s.is_forall_exists());
    }

    #[test]
    fn rejects_exists_exists() {
        let x = fx();
        let c = Constraint::new("e", x.empty.clone(), Condition::exists(a1(&x), Condition::exists_plain(a2(&x)))).unwrap();
        assert_eq!(
            validate_anf(&c).unwrap_err(),
            AnfError::NonAlternating { level: 1, quantifier: Quantifier::Exists }
        );
    }

    #[test]
    fn rejects_isomorphism_and_and_and_true() {
        let x = fx();
        let iso = GraphMorphism::identity(x.c.clone());
        let c = Constraint::new("i", x.empty.clone(), Condition::forall(a1(&x), Condition::exists_plain(iso))).unwrap();
        assert_eq!(validate_anf(&c).unwrap_err(), AnfError::Isomorphism { level: 1 });
        let t = Constraint::new("t", x.empty.clone(), Condition::True).unwrap();
        assert_eq!(validate_anf(&t).unwrap_err(), AnfError::NoQuantifier);
        let and = Condition::and(Condition::exists_plain(a1(&x)), Condition::True);
        let a = Constraint::new("a", x.empty.clone(), and).unwrap();
        assert_eq!(validate_anf(&a).unwrap_err(), AnfError::InnerAnd { level: 0 });
    }

    #[test]
    fn chain_evaluation_agrees_with_satisfies() {
        let x = fx();
        let t = x.empty.type_graph().clone();
        let c = Constraint::new("u", x.empty.clone(), Condition::forall(a1(&x), Condition::exists_plain(a2(&x)))).unwrap();
        let s = validate_anf(&c).unwrap();
        let hosts = [
            TypedGraph::new(t.clone()),
            TypedGraph::new(t.clone()).with_node("k", "Class"),
            TypedGraph::new(t)
                .with_node("k", "Class")
                .with_node("g", "Feature")
                .with_edge("x", "isAssigned", "g", "k"),
        ];
        for h in hosts {
            let h = Arc::new(h);
            let p = GraphMorphism::from_empty(x.empty.clone(), h.clone()).unwrap();
            assert_eq!(s.eval_from(0, &p), graph_satisfies(&h, &c).unwrap());
        }
    }
}
