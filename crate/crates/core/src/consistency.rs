//! Occurrences, violations and the consistency index.

use std::sync::Arc;

use num_rational::Ratio;

use crate::anf::{validate_anf, AnfError, AnfShape, Polarity};
use crate::condition::Constraint;
use crate::graph::TypedGraph;
use crate::matching::enumerate_monomorphisms;
use crate::morphism::GraphMorphism;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub polarity: Polarity,
    /// Number of occurrences of the outermost graph.
    pub occ: usize,
    /// Relevant occurrences: `occ` for universal constraints, 1 for existential.
    pub ro: usize,
    /// Number of constraint violations.
    pub ncv: usize,
    pub ci: Ratio<u64>,
    /// Violating occurrences in canonical order; empty for existential constraints.
    pub violating_occurrences: Vec<GraphMorphism>,
}

impl ConsistencyReport {
    pub fn satisfied(&self) -> bool {
        self.ncv == 0
    }

    pub fn ci_f64(&self) -> f64 {
        *self.ci.numer() as f64 / *self.ci.denom() as f64
    }
}

/// `1 − ncv/ro` with `0/0 = 0`.
pub fn consistency_index(ncv: usize, ro: usize) -> Ratio<u64> {
    if ro == 0 {
        Ratio::from_integer(1)
    } else {
        Ratio::from_integer(1) - Ratio::new(ncv as u64, ro as u64)
    }
}

pub fn consistency_report(g: &Arc<TypedGraph>, c: &Constraint) -> Result<ConsistencyReport, AnfError> {
    let shape = validate_anf(c)?;
    Ok(report_for_shape(g, &shape))
}

pub fn report_for_shape(g: &Arc<TypedGraph>, shape: &AnfShape) -> ConsistencyReport {
    let occurrences = enumerate_monomorphisms(shape.outer_graph(), g).expect("constraint and host share a type graph");
    let occ = occurrences.len();
    match shape.polarity {
        Polarity::Universal => {
            let violating: Vec<GraphMorphism> =
                occurrences.into_iter().filter(|p| !shape.occurrence_valid(p)).collect();
            let ncv = violating.len();
            ConsistencyReport {
                polarity: shape.polarity,
                occ,
                ro: occ,
                ncv,
                ci: consistency_index(ncv, occ),
                violating_occurrences: violating,
            }
        }
        Polarity::Existential => {
            let ok = occurrences.iter().any(|p| shape.occurrence_valid(p));
            let ncv = usize::from(!ok);
            ConsistencyReport {
                polarity: shape.polarity,
                occ,
                ro: 1,
                ncv,
                ci: consistency_index(ncv, 1),
                violating_occurrences: Vec::new(),
            }
        }
    }
}

pub fn is_partially_consistent(g: &Arc<TypedGraph>, c: &Constraint) -> Result<bool, AnfError> {
    Ok(consistency_report(g, c)?.ci > Ratio::from_integer(0))
}
