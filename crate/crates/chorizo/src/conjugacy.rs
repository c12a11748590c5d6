//! The conjugacy invariant triple and the comparison verdict.
//!
//! The triple consists of the generalized quotient, the weighted quotient
//! graph, and the decorated action on the refined partition graph. The
//! members are compared in that order; the first mismatch names the verdict.
//! Equality of all three is reported as conjugacy, with the caveat that the
//! action class stands in for the cohomological invariant it represents.

use serde::Serialize;
use thiserror::Error;

use crate::canon::Rat;
use crate::chains::ChainBounds;
use crate::graphs::{self, DecoratedAction, PgVertex, WeightedGraph};
use crate::model::Validated;
use crate::quotient::{self, BuildError, NumericalChorizo};

/// Vertex decoration: the per-orbit body data, or a midpoint marker.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum VertexDec {
    Body {
        quotient_genus: u64,
        return_order: u64,
        cones: Vec<(u64, u64)>,
    },
    Midpoint,
}

impl crate::canon::CanonLabel for VertexDec {
    fn write_canon(&self, out: &mut String) {
        match self {
            VertexDec::Body { quotient_genus, return_order, cones } => {
                out.push_str(&format!("B{quotient_genus}.{return_order}."));
                for (l, s) in cones {
                    out.push_str(&format!("{l}:{s};"));
                }
            }
            VertexDec::Midpoint => out.push('M'),
        }
    }
}

/// Edge decoration: the screw number and amphidromy of the underlying curve.
pub type EdgeDec = (Rat, bool);
/// End decoration: the boundary valency of the slot orbit at that end, absent
/// on the midpoint side of a half-edge.
pub type EndDec = Option<(u64, u64)>;

pub type Action = DecoratedAction<VertexDec, EdgeDec, EndDec>;

/// The three conjugacy invariants, with canonical encodings.
pub struct InvariantTriple {
    pub genus: u64,
    pub chorizo: NumericalChorizo,
    pub chorizo_encoding: String,
    pub weighted: WeightedGraph,
    pub weighted_encoding: String,
    pub action: Action,
    pub action_encoding: String,
}

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("collapsing labels are inconsistent: component {component:?} labels to missing {label:?}")]
    LabelInconsistent { component: String, label: String },
}

/// Decorate the refined partition graph with the complete per-orbit input
/// data: body quotient data on vertices, screw number and amphidromy on
/// edges, boundary valencies on edge ends.
pub fn decorated_action(v: &Validated) -> Action {
    let res = v.resolution();
    let (graph, action) = graphs::refined_with_action(v);
    let vdec: Vec<VertexDec> = graph
        .verts
        .iter()
        .map(|vert| match vert {
            PgVertex::Body(id) => {
                let bo = &res.body_orbits[res.body_orbit_of[res.body_index[id]]];
                VertexDec::Body {
                    quotient_genus: bo.quotient_genus,
                    return_order: bo.return_order,
                    cones: bo.cone_points.iter().map(|c| (c.lambda, c.sigma)).collect(),
                }
            }
            PgVertex::Midpoint(_) => VertexDec::Midpoint,
        })
        .collect();
    let mut edec: Vec<EdgeDec> = Vec::with_capacity(graph.edges.len());
    let mut enddec: Vec<[EndDec; 2]> = Vec::with_capacity(graph.edges.len());
    for e in &graph.edges {
        let ci = res.curve_index[&e.curve];
        let co = &res.curve_orbits[res.curve_orbit_of[ci]];
        edec.push((Rat(co.screw.clone()), co.amphidrome));
        let valency_at = |slot: &str| -> EndDec {
            let so = &res.slot_orbits[res.slot_orbit_of[res.slot_index[slot]]];
            Some((so.valency.lambda, so.valency.sigma))
        };
        let curve = &v.data().curves[ci];
        match e.part {
            graphs::EdgePart::Whole => {
                enddec.push([valency_at(&curve.ends[0]), valency_at(&curve.ends[1])]);
            }
            graphs::EdgePart::Half(side) => {
                enddec.push([valency_at(&curve.ends[side as usize]), None]);
            }
        }
    }
    DecoratedAction { graph, action, vdec, edec, enddec }
}

/// Compute all three invariants and enforce label consistency between the
/// chorizo and the weighted quotient graph.
pub fn invariants(v: &Validated, bounds: &ChainBounds) -> Result<InvariantTriple, InvariantError> {
    let chorizo = quotient::build_generalized_quotient(v, bounds)?;
    let (g, a) = graphs::refined_with_action(v);
    let weighted = graphs::quotient_weighted_graph(&g, &a);
    for c in &chorizo.components {
        let ok = if c.label.starts_with("v:") {
            weighted.verts.iter().any(|w| w.id == c.label)
        } else {
            weighted.edges.iter().any(|e| e.id == c.label)
        };
        if !ok {
            return Err(InvariantError::LabelInconsistent { component: c.id.clone(), label: c.label.clone() });
        }
    }
    let action = decorated_action(v);
    Ok(InvariantTriple {
        genus: v.genus(),
        chorizo_encoding: quotient::canonical_encoding(&chorizo),
        weighted_encoding: graphs::weighted_encoding(&weighted),
        action_encoding: graphs::action_encoding(&action),
        chorizo,
        weighted,
        action,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "DISTINCT_S")]
    DistinctS,
    #[serde(rename = "DISTINCT_Y")]
    DistinctY,
    #[serde(rename = "DISTINCT_ACTION")]
    DistinctAction,
    #[serde(rename = "INVARIANTS_EQUAL")]
    InvariantsEqual,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::DistinctS => "DISTINCT_S",
            Verdict::DistinctY => "DISTINCT_Y",
            Verdict::DistinctAction => "DISTINCT_ACTION",
            Verdict::InvariantsEqual => "INVARIANTS_EQUAL",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub verdict: Verdict,
    pub witness: String,
}

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("genus mismatch: {0} vs {1}")]
    GenusMismatch(u64, u64),
    #[error(transparent)]
    Invariants(#[from] InvariantError),
}

/// Compare two inputs through the invariant triple. Checks run in order
/// (quotient, weighted graph, action) and the first failure is reported.
pub fn conjugate(a: &Validated, b: &Validated, bounds: &ChainBounds) -> Result<Comparison, CompareError> {
    if a.genus() != b.genus() {
        return Err(CompareError::GenusMismatch(a.genus(), b.genus()));
    }
    let ta = invariants(a, bounds)?;
    let tb = invariants(b, bounds)?;
    Ok(compare_triples(&ta, &tb))
}

pub fn compare_triples(ta: &InvariantTriple, tb: &InvariantTriple) -> Comparison {
    if !quotient::chorizo_isomorphic(&ta.chorizo, &tb.chorizo) {
        return Comparison {
            verdict: Verdict::DistinctS,
            witness: format!(
                "generalized quotients differ: multiplicities {:?} vs {:?}",
                ta.chorizo.multiplicity_multiset(),
                tb.chorizo.multiplicity_multiset()
            ),
        };
    }
    if !graphs::weighted_isomorphic(&ta.weighted, &tb.weighted) {
        return Comparison {
            verdict: Verdict::DistinctY,
            witness: format!(
                "weighted quotient graphs differ: {} vertices / {} edges vs {} / {}",
                ta.weighted.verts.len(),
                ta.weighted.edges.len(),
                tb.weighted.verts.len(),
                tb.weighted.edges.len()
            ),
        };
    }
    if !graphs::equivariant_isomorphic(&ta.action, &tb.action) {
        return Comparison {
            verdict: Verdict::DistinctAction,
            witness: "quotient and weighted graph agree, but the actions on the refined partition graph are not conjugate".into(),
        };
    }
    Comparison {
        verdict: Verdict::InvariantsEqual,
        witness: "all three invariants agree (the action class stands in for the cohomological invariant)".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::model::{self, Validated};

    fn validated(name: &str) -> Validated {
        Validated::new(catalog::builtin_get(name).unwrap().data).unwrap()
    }

    fn bounds() -> ChainBounds {
        ChainBounds::default()
    }

    #[test]
    fn triple_for_nielsen_pair() {
        let t1 = invariants(&validated("nielsen-f1"), &bounds()).unwrap();
        let t2 = invariants(&validated("nielsen-f2"), &bounds()).unwrap();
        assert_eq!(t1.chorizo_encoding, t2.chorizo_encoding);
        assert_eq!(t1.weighted_encoding, t2.weighted_encoding);
        assert_ne!(t1.action_encoding, t2.action_encoding);
        assert_eq!(t1.chorizo.components.len(), 1);
        assert_eq!(t1.weighted.verts.len(), 1);
        assert_eq!(t1.weighted.edges.len(), 1);
    }

    #[test]
    fn nielsen_counterexample_verdict() {
        let c = conjugate(&validated("nielsen-f1"), &validated("nielsen-f2"), &bounds()).unwrap();
        assert_eq!(c.verdict, Verdict::DistinctAction);
    }

    #[test]
    fn relabeled_copy_is_conjugate() {
        let f1 = validated("nielsen-f1");
        let relabeled = model::relabel(
            f1.data(),
            &|b| format!("body-{b}"),
            &|s| format!("slot-{s}"),
            &|c| format!("curve-{c}"),
        );
        let r = Validated::new(relabeled).unwrap();
        let c = conjugate(&f1, &r, &bounds()).unwrap();
        assert_eq!(c.verdict, Verdict::InvariantsEqual);
    }

    #[test]
    fn inverse_rotation_is_conjugate() {
        // Shifting the cycle by 4 is the inverse of shifting by 1; a
        // reflection of the cycle conjugates one into the other. Likewise
        // for shifts 2 and 3. Shift 1 vs shift 2 stays distinct.
        let f = |k: usize| Validated::new(catalog::nielsen_shift(k)).unwrap();
        assert_eq!(conjugate(&f(1), &f(4), &bounds()).unwrap().verdict, Verdict::InvariantsEqual);
        assert_eq!(conjugate(&f(2), &f(3), &bounds()).unwrap().verdict, Verdict::InvariantsEqual);
        assert_eq!(conjugate(&f(1), &f(2), &bounds()).unwrap().verdict, Verdict::DistinctAction);
    }

    #[test]
    fn relabeling_one_side_keeps_the_verdict() {
        let f1 = validated("nielsen-f1");
        let f2 = validated("nielsen-f2");
        let relabeled = Validated::new(model::relabel(
            f2.data(),
            &|b| format!("w{b}"),
            &|s| format!("x{s}"),
            &|c| format!("y{c}"),
        ))
        .unwrap();
        assert_eq!(conjugate(&f1, &relabeled, &bounds()).unwrap().verdict, Verdict::DistinctAction);
    }

    #[test]
    fn distinct_quotients_detected() {
        let c = conjugate(&validated("kodaira-II*"), &validated("kodaira-I0*"), &bounds()).unwrap();
        assert_eq!(c.verdict, Verdict::DistinctS);
    }

    #[test]
    fn genus_mismatch_is_an_error() {
        let e = conjugate(&validated("identity-genus2"), &validated("kodaira-I0*"), &bounds());
        assert!(matches!(e, Err(CompareError::GenusMismatch(2, 1))));
    }

    #[test]
    fn self_comparison_and_symmetry() {
        for name in catalog::builtin_list() {
            let v = validated(name);
            let c = conjugate(&v, &v, &bounds()).unwrap();
            assert_eq!(c.verdict, Verdict::InvariantsEqual, "{name}");
        }
        let a = validated("nielsen-f1");
        let b = validated("nielsen-f2");
        let ab = conjugate(&a, &b, &bounds()).unwrap();
        let ba = conjugate(&b, &a, &bounds()).unwrap();
        assert_eq!(ab.verdict, ba.verdict);
    }

    #[test]
    fn shuffled_input_same_verdict_and_encodings() {
        for name in ["nielsen-f1", "amphidrome-genus2", "kodaira-III*"] {
            let v = validated(name);
            let t = invariants(&v, &bounds()).unwrap();
            for seed in 0..4 {
                let shuffled = Validated::new(model::shuffled(v.data(), seed)).unwrap();
                let ts = invariants(&shuffled, &bounds()).unwrap();
                assert_eq!(t.chorizo_encoding, ts.chorizo_encoding, "{name} seed {seed}");
                assert_eq!(t.weighted_encoding, ts.weighted_encoding, "{name} seed {seed}");
                assert_eq!(t.action_encoding, ts.action_encoding, "{name} seed {seed}");
                let c = conjugate(&v, &shuffled, &bounds()).unwrap();
                assert_eq!(c.verdict, Verdict::InvariantsEqual);
            }
        }
    }
}
