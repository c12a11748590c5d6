//! The generalized quotient: a numerical chorizo space.
//!
//! Each body orbit contributes one component carrying the quotient genus and
//! multiplicity `orbit size * return order`, with a sphere chain per cone
//! point. Each curve orbit contributes a sphere chain joining the adjacent
//! body components (non-amphidrome), or a chain ending in a two-sphere fork
//! (amphidrome). The attachment disks of the chains are absorbed into the
//! body components; their multiplicities match by the validation checks.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::canon;
use crate::chains::{self, ChainBounds};
use crate::model::Validated;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Component {
    pub id: String,
    pub genus: u64,
    pub multiplicity: u64,
    /// Collapsing label: the vertex or edge of the weighted quotient graph
    /// this component is squashed onto.
    pub label: String,
}

/// Dual-graph model of a Riemann surface with nodes: components with genus
/// and multiplicity, nodes as unordered id pairs (self-nodes allowed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumericalChorizo {
    /// Sorted by id.
    pub components: Vec<Component>,
    /// Normalized pairs (first <= second), sorted; a multiset.
    pub nodes: Vec<(String, String)>,
}

impl NumericalChorizo {
    fn normalize(&mut self) {
        self.components.sort_by(|a, b| a.id.cmp(&b.id));
        for n in &mut self.nodes {
            if n.0 > n.1 {
                std::mem::swap(&mut n.0, &mut n.1);
            }
        }
        self.nodes.sort();
    }

    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn multiplicity_multiset(&self) -> Vec<u64> {
        let mut m: Vec<u64> = self.components.iter().map(|c| c.multiplicity).collect();
        m.sort();
        m
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("chain construction failed for curve orbit {orbit:?}: {source}")]
    Chain {
        orbit: String,
        #[source]
        source: chains::ChainError,
    },
}

#[derive(Debug, Error)]
#[error("component {component:?}: node degree sum {degree} is not divisible by multiplicity {multiplicity}")]
pub struct MultiplicityMismatch {
    pub component: String,
    pub degree: String,
    pub multiplicity: u64,
}

/// Body-orbit fragment: the body component, its cone chains, and one open
/// attachment stub per boundary slot orbit.
#[derive(Debug, Clone)]
pub struct BodyFragment {
    pub components: Vec<Component>,
    pub nodes: Vec<(String, String)>,
    /// slot orbit index -> (component id, multiplicity) of the stub.
    pub stubs: BTreeMap<usize, (String, u64)>,
}

pub fn body_component_id(v: &Validated, body_orbit: usize) -> String {
    format!("B.{}", v.resolution().body_orbits[body_orbit].rep)
}

fn y_vertex_label(v: &Validated, body_orbit: usize) -> String {
    format!("v:{}", v.resolution().body_orbits[body_orbit].rep)
}

fn y_midpoint_label(v: &Validated, curve_orbit: usize) -> String {
    format!("v:mid:{}", v.resolution().curve_orbits[curve_orbit].rep)
}

fn y_edge_label(v: &Validated, curve_orbit: usize) -> String {
    format!("e:{}", v.resolution().curve_orbits[curve_orbit].rep)
}

/// One component of genus `quotient_genus` and multiplicity `m_B * n_B`, plus
/// a chain of `l` spheres per cone point with multiplicities `m * n_i`
/// (`m = N_B / λ`); the chain's head disk is absorbed into the body component.
pub fn build_body_chorizo(v: &Validated, body_orbit: usize) -> BodyFragment {
    let bo = &v.resolution().body_orbits[body_orbit];
    let n_b = bo.multiplicity();
    let body_id = body_component_id(v, body_orbit);
    let label = y_vertex_label(v, body_orbit);
    let mut components = vec![Component {
        id: body_id.clone(),
        genus: bo.quotient_genus,
        multiplicity: n_b,
        label: label.clone(),
    }];
    let mut nodes = Vec::new();
    for (k, cone) in bo.cone_points.iter().enumerate() {
        let chain = chains::cone_chain(cone).expect("validated cone points have order >= 2");
        debug_assert_eq!(n_b % cone.lambda, 0);
        let m = n_b / cone.lambda;
        let mults = chain.with_multiplier(m).multiplicities();
        let mut prev = body_id.clone();
        debug_assert_eq!(mults[0], n_b);
        for (i, &mult) in mults.iter().enumerate().skip(1) {
            let id = format!("{body_id}.cone{k}.{i}");
            components.push(Component { id: id.clone(), genus: 0, multiplicity: mult, label: label.clone() });
            nodes.push((prev.clone(), id.clone()));
            prev = id;
        }
    }
    let stubs = bo
        .slot_orbits
        .iter()
        .map(|&so| (so, (body_id.clone(), n_b)))
        .collect();
    BodyFragment { components, nodes, stubs }
}

/// Curve-orbit fragment: components and nodes, with attachments expressed
/// directly against the adjacent body component ids.
#[derive(Debug, Clone)]
pub struct CurvePart {
    pub components: Vec<Component>,
    pub nodes: Vec<(String, String)>,
    /// Chain length `l` of the underlying sequence `n_0..n_l`.
    pub chain_len: usize,
}

/// Non-amphidrome annulus: `l - 1` spheres of multiplicities `m*n_1 ..
/// m*n_{l-1}` joining the two adjacent body components; for `l = 1` just a
/// node (possibly a self-node).
pub fn build_nonamph_part(v: &Validated, curve_orbit: usize, bounds: &ChainBounds) -> Result<CurvePart, BuildError> {
    let res = v.resolution();
    let co = &res.curve_orbits[curve_orbit];
    debug_assert!(!co.amphidrome);
    let side1 = &res.slot_orbits[co.sides[0]];
    let side2 = &res.slot_orbits[co.sides[1]];
    let m = co.alpha;
    let s_abs = -co.screw.clone();
    let chain = chains::nonamph_chain(&side1.valency, &side2.valency, &s_abs, bounds)
        .map_err(|source| BuildError::Chain { orbit: co.rep.clone(), source })?;
    let mults = chain.clone().with_multiplier(m).multiplicities();
    let l = chain.l();
    let end1 = body_component_id(v, side1.body_orbit);
    let end2 = body_component_id(v, side2.body_orbit);
    debug_assert_eq!(mults[0], res.body_orbits[side1.body_orbit].multiplicity());
    debug_assert_eq!(mults[l], res.body_orbits[side2.body_orbit].multiplicity());
    let label = y_edge_label(v, curve_orbit);
    let mut components = Vec::new();
    let mut nodes = Vec::new();
    let mut prev = end1;
    for (i, &mult) in mults.iter().enumerate().take(l).skip(1) {
        let id = format!("A.{}.{}", co.rep, i);
        components.push(Component { id: id.clone(), genus: 0, multiplicity: mult, label: label.clone() });
        nodes.push((prev.clone(), id.clone()));
        prev = id;
    }
    nodes.push((prev, end2));
    Ok(CurvePart { components, nodes, chain_len: l })
}

/// Amphidrome annulus: `l` spheres of multiplicities `2m*n_1 .. 2m*n_l`
/// hanging off the adjacent body component, the last carrying a fork of two
/// spheres of multiplicity `m`.
pub fn build_amph_part(v: &Validated, curve_orbit: usize, bounds: &ChainBounds) -> Result<CurvePart, BuildError> {
    let res = v.resolution();
    let co = &res.curve_orbits[curve_orbit];
    debug_assert!(co.amphidrome);
    let side = &res.slot_orbits[co.sides[0]];
    let two_m = co.alpha;
    let m = two_m / 2;
    let s_abs = -co.screw.clone();
    let chain = chains::amph_chain(&side.valency, &s_abs, bounds)
        .map_err(|source| BuildError::Chain { orbit: co.rep.clone(), source })?;
    let mults = chain.clone().with_multiplier(two_m).multiplicities();
    let l = chain.l();
    let body = body_component_id(v, side.body_orbit);
    debug_assert_eq!(mults[0], res.body_orbits[side.body_orbit].multiplicity());
    let label = y_midpoint_label(v, curve_orbit);
    let mut components = Vec::new();
    let mut nodes = Vec::new();
    let mut prev = body;
    for (i, &mult) in mults.iter().enumerate().skip(1) {
        let id = format!("A.{}.{}", co.rep, i);
        components.push(Component { id: id.clone(), genus: 0, multiplicity: mult, label: label.clone() });
        nodes.push((prev.clone(), id.clone()));
        prev = id;
    }
    debug_assert_eq!(mults[l], two_m);
    for fork in 0..2 {
        let id = format!("A.{}.fork{}", co.rep, fork);
        components.push(Component { id: id.clone(), genus: 0, multiplicity: m, label: label.clone() });
        nodes.push((prev.clone(), id.clone()));
    }
    Ok(CurvePart { components, nodes, chain_len: l })
}

/// Union of the body fragments and the curve-orbit fragments.
pub fn build_generalized_quotient(v: &Validated, bounds: &ChainBounds) -> Result<NumericalChorizo, BuildError> {
    let res = v.resolution();
    let mut ch = NumericalChorizo { components: Vec::new(), nodes: Vec::new() };
    for k in 0..res.body_orbits.len() {
        let frag = build_body_chorizo(v, k);
        ch.components.extend(frag.components);
        ch.nodes.extend(frag.nodes);
    }
    for k in 0..res.curve_orbits.len() {
        let part = if res.curve_orbits[k].amphidrome {
            build_amph_part(v, k, bounds)?
        } else {
            build_nonamph_part(v, k, bounds)?
        };
        ch.components.extend(part.components);
        ch.nodes.extend(part.nodes);
    }
    ch.normalize();
    Ok(ch)
}

// ---------------------------------------------------------------------------
// Fiber-configuration checks

fn degree_sums(ch: &NumericalChorizo) -> Vec<BigInt> {
    let index: BTreeMap<&str, usize> = ch.components.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();
    let mut d = vec![BigInt::zero(); ch.components.len()];
    for (a, b) in &ch.nodes {
        let i = index[a.as_str()];
        let j = index[b.as_str()];
        d[i] += BigInt::from(ch.components[j].multiplicity);
        d[j] += BigInt::from(ch.components[i].multiplicity);
    }
    d
}

/// Self-intersection of the smooth model of each component: `-d_i / m_i`
/// where `d_i` sums the multiplicities across all nodes on the component,
/// self-nodes counting twice. Order follows `ch.components`.
pub fn self_intersections(ch: &NumericalChorizo) -> Result<Vec<i64>, MultiplicityMismatch> {
    let d = degree_sums(ch);
    let mut out = Vec::with_capacity(d.len());
    for (c, di) in ch.components.iter().zip(d) {
        let m = BigInt::from(c.multiplicity);
        if (&di % &m) != BigInt::zero() {
            return Err(MultiplicityMismatch {
                component: c.id.clone(),
                degree: di.to_string(),
                multiplicity: c.multiplicity,
            });
        }
        let q: BigInt = -(&di / &m);
        out.push(i64::try_from(&q).expect("self-intersections are small"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SemidefiniteReport {
    pub semidefinite: bool,
    /// The multiplicity vector when it spans the radical, in component order.
    pub radical: Option<Vec<u64>>,
}

/// Negative semidefiniteness of the intersection form with radical spanned
/// exactly by the multiplicity vector, in exact arithmetic. The diagonal is
/// the divisor self-intersection (smooth-model value plus twice the
/// self-node count); divisibility failures report `false`.
pub fn intersection_form_semidefinite(ch: &NumericalChorizo) -> SemidefiniteReport {
    let Ok(e) = self_intersections(ch) else {
        return SemidefiniteReport { semidefinite: false, radical: None };
    };
    let n = ch.components.len();
    let index: BTreeMap<&str, usize> = ch.components.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();
    let mut q = vec![vec![BigRational::zero(); n]; n];
    for (i, &ei) in e.iter().enumerate() {
        q[i][i] = BigRational::from(BigInt::from(ei));
    }
    for (a, b) in &ch.nodes {
        let i = index[a.as_str()];
        let j = index[b.as_str()];
        if i == j {
            q[i][i] += BigRational::from(BigInt::from(2));
        } else {
            q[i][j] += BigRational::one();
            q[j][i] += BigRational::one();
        }
    }

    // Q * m = 0.
    let m: Vec<BigRational> =
        ch.components.iter().map(|c| BigRational::from(BigInt::from(c.multiplicity))).collect();
    for row in &q {
        let s: BigRational = row.iter().zip(&m).map(|(a, b)| a * b).sum();
        if !s.is_zero() {
            return SemidefiniteReport { semidefinite: false, radical: None };
        }
    }

    // -Q must be positive semidefinite with rank n-1: repeatedly pivot on a
    // positive diagonal entry and take the Schur complement. A nonzero PSD
    // matrix with no positive diagonal entry does not exist.
    let mut a: Vec<Vec<BigRational>> = q.iter().map(|row| row.iter().map(|x| -x).collect()).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut rank = 0usize;
    loop {
        if active.iter().all(|&i| active.iter().all(|&j| a[i][j].is_zero())) {
            break;
        }
        let Some(&p) = active.iter().find(|&&i| a[i][i].is_positive()) else {
            return SemidefiniteReport { semidefinite: false, radical: None };
        };
        if active.iter().any(|&i| a[i][i].is_negative()) {
            return SemidefiniteReport { semidefinite: false, radical: None };
        }
        let pivot = a[p][p].clone();
        let remaining: Vec<usize> = active.iter().copied().filter(|&i| i != p).collect();
        for &i in &remaining {
            for &j in &remaining {
                let delta = &a[i][p] * &a[p][j] / &pivot;
                a[i][j] -= delta;
            }
        }
        active = remaining;
        rank += 1;
    }
    if rank != n.saturating_sub(1) {
        return SemidefiniteReport { semidefinite: false, radical: None };
    }
    SemidefiniteReport {
        semidefinite: true,
        radical: Some(ch.components.iter().map(|c| c.multiplicity).collect()),
    }
}

/// `Σ m_i (2 - 2 g_i - node points on C_i) = 2 - 2g`, self-nodes counting two
/// points.
pub fn euler_balance(ch: &NumericalChorizo, genus: u64) -> bool {
    let index: BTreeMap<&str, usize> = ch.components.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();
    let mut points = vec![0i64; ch.components.len()];
    for (a, b) in &ch.nodes {
        points[index[a.as_str()]] += 1;
        points[index[b.as_str()]] += 1;
    }
    let total: i64 = ch
        .components
        .iter()
        .zip(&points)
        .map(|(c, &p)| c.multiplicity as i64 * (2 - 2 * c.genus as i64 - p))
        .sum();
    total == 2 - 2 * genus as i64
}

// ---------------------------------------------------------------------------
// Isomorphism and canonical encoding

fn to_cgraph(ch: &NumericalChorizo) -> canon::CGraph<(u64, u64), (), ()> {
    let index: BTreeMap<&str, usize> = ch.components.iter().enumerate().map(|(i, c)| (c.id.as_str(), i)).collect();
    canon::CGraph {
        verts: ch.components.iter().map(|c| (c.genus, c.multiplicity)).collect(),
        edges: ch
            .nodes
            .iter()
            .map(|(a, b)| canon::CEdge { u: index[a.as_str()], v: index[b.as_str()], lu: (), lv: (), core: () })
            .collect(),
        action: None,
    }
}

/// Component bijection preserving genus, multiplicity and the node multiset;
/// collapsing labels are ignored.
pub fn chorizo_isomorphic(a: &NumericalChorizo, b: &NumericalChorizo) -> bool {
    canon::isomorphic(&to_cgraph(a), &to_cgraph(b))
}

/// Canonical form: equal exactly for isomorphic chorizos, stable across runs
/// and relabelings.
pub fn canonical_encoding(ch: &NumericalChorizo) -> String {
    canon::canonical_encoding(&to_cgraph(ch))
}

// ---------------------------------------------------------------------------
// Serialization

#[derive(Debug, Serialize)]
pub struct ChorizoJson {
    pub genus: u64,
    pub components: Vec<Component>,
    pub nodes: Vec<(String, String)>,
    pub checks: ChecksJson,
}

#[derive(Debug, Serialize)]
pub struct ChecksJson {
    pub euler_balance: bool,
    pub semidefinite: bool,
    /// Aligned with `components`.
    pub self_intersections: Option<Vec<i64>>,
}

pub fn chorizo_json(ch: &NumericalChorizo, genus: u64) -> ChorizoJson {
    ChorizoJson {
        genus,
        components: ch.components.clone(),
        nodes: ch.nodes.clone(),
        checks: ChecksJson {
            euler_balance: euler_balance(ch, genus),
            semidefinite: intersection_form_semidefinite(ch).semidefinite,
            self_intersections: self_intersections(ch).ok(),
        },
    }
}

/// DOT rendering: one node per component labeled with genus and multiplicity,
/// one edge per node pair, self-nodes as loops.
pub fn chorizo_dot(ch: &NumericalChorizo) -> String {
    let mut out = String::from("graph chorizo {\n");
    for c in &ch.components {
        out.push_str(&format!("  \"{}\" [label=\"g={}, m={}\"];\n", c.id, c.genus, c.multiplicity));
    }
    for (a, b) in &ch.nodes {
        out.push_str(&format!("  \"{a}\" -- \"{b}\";\n"));
    }
    out.push_str("}\n");
    out
}
