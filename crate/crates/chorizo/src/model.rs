//! Input data model for a pseudoperiodic homeomorphism of negative twist.
//!
//! The surface is cut along a curve system into bodies; each body lists its
//! boundary slots and each curve joins two slots. The map is given as a
//! permutation of bodies, slots and curves, and each orbit of bodies/curves
//! carries quotient data (return order, quotient genus, cone points, boundary
//! valencies, screw number). [`validate`] checks every consistency condition
//! the rest of the pipeline relies on; [`Validated`] wraps data that passed,
//! together with the resolved orbit tables.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chains;

/// Rotation data `(λ, σ)` of a cone point or boundary curve of the periodic
/// quotient: `λ` is the local rotation order and `σ` the inverse mod `λ` of
/// the rotation amount `δ`. The trivial rotation is `(1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Valency {
    pub lambda: u64,
    pub sigma: u64,
}

impl Valency {
    pub fn new(lambda: u64, sigma: u64) -> Result<Self, String> {
        let v = Valency { lambda, sigma };
        v.check()?;
        Ok(v)
    }

    pub fn trivial() -> Self {
        Valency { lambda: 1, sigma: 0 }
    }

    pub fn check(&self) -> Result<(), String> {
        if self.lambda == 0 {
            return Err("rotation order must be positive".into());
        }
        if self.lambda == 1 {
            if self.sigma != 0 {
                return Err("order 1 requires sigma = 0".into());
            }
        } else {
            if self.sigma == 0 || self.sigma >= self.lambda {
                return Err(format!("sigma must satisfy 0 < {} < {}", self.sigma, self.lambda));
            }
            if num_integer::gcd(self.lambda, self.sigma) != 1 {
                return Err(format!("gcd({}, {}) != 1", self.sigma, self.lambda));
            }
        }
        Ok(())
    }

    /// The unique `δ` in `(0, λ)` with `δσ ≡ 1 (mod λ)`; 0 when `λ = 1`.
    pub fn delta(&self) -> u64 {
        modular_inverse_delta(self)
    }

    /// `δ/λ` as an exact rational.
    pub fn delta_frac(&self) -> BigRational {
        BigRational::new(BigInt::from(self.delta()), BigInt::from(self.lambda))
    }
}

/// Modular inverse of `σ` mod `λ` (extended Euclid); 0 for the trivial valency.
pub fn modular_inverse_delta(v: &Valency) -> u64 {
    if v.lambda == 1 {
        return 0;
    }
    let (mut t, mut new_t): (i128, i128) = (0, 1);
    let (mut r, mut new_r): (i128, i128) = (v.lambda as i128, v.sigma as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    debug_assert_eq!(r, 1, "precondition: gcd(sigma, lambda) = 1");
    let m = v.lambda as i128;
    (((t % m) + m) % m) as u64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Body {
    pub id: String,
    pub genus: u64,
    pub slots: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Curve {
    pub id: String,
    pub ends: [String; 2],
}

/// The permutation induced by the map on bodies, slots and curves. Each curve
/// image carries a `reverses` flag: whether the oriented curve maps to its
/// image with reversed orientation (equivalently, with the two annulus sides
/// exchanged).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MapAction {
    pub bodies: BTreeMap<String, String>,
    pub slots: BTreeMap<String, String>,
    pub curves: BTreeMap<String, (String, bool)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BodyOrbitData {
    pub rep: String,
    /// Order of the periodic return map on the representative body.
    pub return_order: u64,
    pub quotient_genus: u64,
    pub cone_points: Vec<Valency>,
    /// One valency per orbit of boundary slots, keyed by any slot in the orbit.
    pub boundary_valencies: BTreeMap<String, Valency>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveOrbitData {
    pub rep: String,
    pub screw: BigRational,
}

/// Full combinatorial description of a pseudoperiodic homeomorphism of
/// negative twist. Construct via [`PseudoPeriodicData::from_json`] or the
/// builders in [`crate::catalog`], then call [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoPeriodicData {
    pub genus: u64,
    pub bodies: Vec<Body>,
    pub curves: Vec<Curve>,
    pub action: MapAction,
    pub body_orbits: Vec<BodyOrbitData>,
    pub curve_orbits: Vec<CurveOrbitData>,
}

// ---------------------------------------------------------------------------
// JSON schema

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputDoc {
    genus: u64,
    bodies: Vec<InputBody>,
    curves: Vec<InputCurve>,
    map: InputMap,
    body_orbits: Vec<InputBodyOrbit>,
    curve_orbits: Vec<InputCurveOrbit>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputBody {
    id: String,
    genus: u64,
    boundaries: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputCurve {
    id: String,
    ends: [String; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputMap {
    bodies: BTreeMap<String, String>,
    slots: BTreeMap<String, String>,
    curves: BTreeMap<String, InputCurveImage>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputCurveImage {
    to: String,
    reverses: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputBodyOrbit {
    rep: String,
    order: u64,
    quotient_genus: u64,
    cone_points: Vec<InputValency>,
    boundary_valencies: BTreeMap<String, InputValency>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputValency {
    lambda: u64,
    sigma: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputCurveOrbit {
    rep: String,
    /// Exact rational written as "p" or "p/q".
    screw: String,
}

/// Error for inputs that are malformed before validation can even start
/// (JSON syntax, unknown keys, unparsable rationals).
#[derive(Debug, Error)]
pub enum InputError {
    #[error("malformed input: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed screw number {0:?}: expected an exact rational like \"-4/5\"")]
    Screw(String),
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::from(1)),
    };
    if den.is_zero() {
        return None;
    }
    Some(BigRational::new(num, den))
}

fn format_rational(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl PseudoPeriodicData {
    pub fn from_json(text: &str) -> Result<Self, InputError> {
        let doc: InputDoc = serde_json::from_str(text)?;
        let mut curve_orbits = Vec::new();
        for o in &doc.curve_orbits {
            let screw = parse_rational(&o.screw).ok_or_else(|| InputError::Screw(o.screw.clone()))?;
            curve_orbits.push(CurveOrbitData { rep: o.rep.clone(), screw });
        }
        Ok(PseudoPeriodicData {
            genus: doc.genus,
            bodies: doc
                .bodies
                .into_iter()
                .map(|b| Body { id: b.id, genus: b.genus, slots: b.boundaries })
                .collect(),
            curves: doc.curves.into_iter().map(|c| Curve { id: c.id, ends: c.ends }).collect(),
            action: MapAction {
                bodies: doc.map.bodies,
                slots: doc.map.slots,
                curves: doc.map.curves.into_iter().map(|(k, v)| (k, (v.to, v.reverses))).collect(),
            },
            body_orbits: doc
                .body_orbits
                .into_iter()
                .map(|o| BodyOrbitData {
                    rep: o.rep,
                    return_order: o.order,
                    quotient_genus: o.quotient_genus,
                    cone_points: o.cone_points.iter().map(|v| Valency { lambda: v.lambda, sigma: v.sigma }).collect(),
                    boundary_valencies: o
                        .boundary_valencies
                        .into_iter()
                        .map(|(k, v)| (k, Valency { lambda: v.lambda, sigma: v.sigma }))
                        .collect(),
                })
                .collect(),
            curve_orbits,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = InputDoc {
            genus: self.genus,
            bodies: self
                .bodies
                .iter()
                .map(|b| InputBody { id: b.id.clone(), genus: b.genus, boundaries: b.slots.clone() })
                .collect(),
            curves: self.curves.iter().map(|c| InputCurve { id: c.id.clone(), ends: c.ends.clone() }).collect(),
            map: InputMap {
                bodies: self.action.bodies.clone(),
                slots: self.action.slots.clone(),
                curves: self
                    .action
                    .curves
                    .iter()
                    .map(|(k, (to, rev))| (k.clone(), InputCurveImage { to: to.clone(), reverses: *rev }))
                    .collect(),
            },
            body_orbits: self
                .body_orbits
                .iter()
                .map(|o| InputBodyOrbit {
                    rep: o.rep.clone(),
                    order: o.return_order,
                    quotient_genus: o.quotient_genus,
                    cone_points: o.cone_points.iter().map(|v| InputValency { lambda: v.lambda, sigma: v.sigma }).collect(),
                    boundary_valencies: o
                        .boundary_valencies
                        .iter()
                        .map(|(k, v)| (k.clone(), InputValency { lambda: v.lambda, sigma: v.sigma }))
                        .collect(),
                })
                .collect(),
            curve_orbits: self
                .curve_orbits
                .iter()
                .map(|o| InputCurveOrbit { rep: o.rep.clone(), screw: format_rational(&o.screw) })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
    }
}

// ---------------------------------------------------------------------------
// Validation

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateId { kind: &'static str, id: String },
    UnknownId { kind: &'static str, id: String, context: String },
    SlotUsage { slot: String, uses: usize },
    CurveEndsEqual { curve: String },
    NotAPermutation { kind: &'static str, detail: String },
    Disconnected,
    NonNegativeEuler { body: String, chi: i64 },
    TotalEulerMismatch { total: i64, expected: i64 },
    SlotBodyIncompatible { slot: String, expected_body: String, got_body: String },
    CurveNotInduced { curve: String, detail: String },
    ReversesInconsistent { curve: String, expected: bool },
    OrbitCoverage { kind: &'static str, detail: String },
    ValencyInvalid { context: String, lambda: u64, sigma: u64, reason: String },
    ConeOrderInvalid { body_orbit: String, lambda: u64, order: u64 },
    RiemannHurwitz { body_orbit: String, lhs: String, rhs: String },
    BoundaryValencyMismatch { slot: String, lambda: u64, slot_return: u64, expected: u64 },
    SideReturnMismatch { curve_orbit: String, side: u8, side_return: u64, alpha: u64 },
    AmphidromeSides { curve_orbit: String, detail: String },
    ScrewIncompatible { curve_orbit: String, detail: String },
    ScrewNotNegative { curve_orbit: String, screw: String },
    GenusUnsupported { genus: u64, curve_count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateId { kind, id } => write!(f, "duplicate {kind} id {id:?}"),
            UnknownId { kind, id, context } => write!(f, "unknown {kind} id {id:?} ({context})"),
            SlotUsage { slot, uses } => write!(f, "slot {slot:?} is used by {uses} curve ends (expected exactly 1)"),
            CurveEndsEqual { curve } => write!(f, "curve {curve:?} has both ends on the same slot"),
            NotAPermutation { kind, detail } => write!(f, "map on {kind} is not a permutation: {detail}"),
            Disconnected => write!(f, "the surface described by bodies and curves is not connected"),
            NonNegativeEuler { body, chi } => {
                write!(f, "body {body:?} has Euler characteristic {chi} (admissibility needs < 0)")
            }
            TotalEulerMismatch { total, expected } => {
                write!(f, "total Euler characteristic {total} does not match 2-2g = {expected}")
            }
            SlotBodyIncompatible { slot, expected_body, got_body } => write!(
                f,
                "slot {slot:?} maps into body {got_body:?} but its body maps to {expected_body:?}"
            ),
            CurveNotInduced { curve, detail } => write!(f, "curve {curve:?} image is not induced by the slot map: {detail}"),
            ReversesInconsistent { curve, expected } => {
                write!(f, "curve {curve:?} has a wrong `reverses` flag (slot map implies {expected})")
            }
            OrbitCoverage { kind, detail } => write!(f, "{kind} orbit data does not cover each orbit exactly once: {detail}"),
            ValencyInvalid { context, lambda, sigma, reason } => {
                write!(f, "invalid valency ({lambda},{sigma}) at {context}: {reason}")
            }
            ConeOrderInvalid { body_orbit, lambda, order } => write!(
                f,
                "cone point of order {lambda} in body orbit {body_orbit:?} does not divide the return order {order}"
            ),
            RiemannHurwitz { body_orbit, lhs, rhs } => write!(
                f,
                "Riemann-Hurwitz fails for body orbit {body_orbit:?}: chi = {lhs} but order * orbifold chi = {rhs}"
            ),
            BoundaryValencyMismatch { slot, lambda, slot_return, expected } => write!(
                f,
                "boundary valency at slot {slot:?}: lambda*return = {lambda}*{slot_return} != {expected} = order*orbit size"
            ),
            SideReturnMismatch { curve_orbit, side, side_return, alpha } => write!(
                f,
                "curve orbit {curve_orbit:?} side {side}: boundary return time {side_return} != alpha = {alpha}"
            ),
            AmphidromeSides { curve_orbit, detail } => write!(f, "amphidrome orbit {curve_orbit:?}: {detail}"),
            ScrewIncompatible { curve_orbit, detail } => {
                write!(f, "screw number of curve orbit {curve_orbit:?} incompatible with valencies: {detail}")
            }
            ScrewNotNegative { curve_orbit, screw } => {
                write!(f, "screw number {screw} of curve orbit {curve_orbit:?} must be strictly negative")
            }
            GenusUnsupported { genus, curve_count } => write!(
                f,
                "genus {genus} with {curve_count} curves is unsupported (need g >= 2, or g = 1 with an empty curve system)"
            ),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            writeln!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Resolution: orbit tables derived from the permutation data

#[derive(Debug, Clone)]
pub struct ResolvedBodyOrbit {
    /// Smallest body id in the orbit.
    pub rep: String,
    /// Members in map-iteration order starting from `rep`.
    pub members: Vec<usize>,
    pub orbit_size: u64,
    pub return_order: u64,
    pub quotient_genus: u64,
    /// Sorted.
    pub cone_points: Vec<Valency>,
    /// Indices into `Resolution::slot_orbits`, sorted by orbit rep.
    pub slot_orbits: Vec<usize>,
}

impl ResolvedBodyOrbit {
    /// Multiplicity of the body component of the generalized quotient.
    pub fn multiplicity(&self) -> u64 {
        self.orbit_size * self.return_order
    }
}

#[derive(Debug, Clone)]
pub struct ResolvedSlotOrbit {
    /// Smallest slot id in the orbit.
    pub rep: String,
    /// Members in map-iteration order starting from `rep`.
    pub members: Vec<usize>,
    pub orbit_size: u64,
    pub body_orbit: usize,
    pub valency: Valency,
}

#[derive(Debug, Clone)]
pub struct ResolvedCurveOrbit {
    /// Smallest curve id in the orbit.
    pub rep: String,
    /// Members in map-iteration order starting from `rep`.
    pub members: Vec<usize>,
    /// Setwise orbit size.
    pub orbit_size: u64,
    pub amphidrome: bool,
    /// Oriented return time: orbit size, doubled when amphidrome.
    pub alpha: u64,
    pub screw: BigRational,
    /// Slot orbits of the two ends of the representative curve.
    pub sides: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct Resolution {
    pub body_index: HashMap<String, usize>,
    pub slot_index: HashMap<String, usize>,
    pub curve_index: HashMap<String, usize>,
    pub slot_ids: Vec<String>,
    /// Owning body index per slot.
    pub slot_body: Vec<usize>,
    /// Sorted by rep id.
    pub body_orbits: Vec<ResolvedBodyOrbit>,
    pub slot_orbits: Vec<ResolvedSlotOrbit>,
    pub curve_orbits: Vec<ResolvedCurveOrbit>,
    pub body_orbit_of: Vec<usize>,
    pub slot_orbit_of: Vec<usize>,
    pub curve_orbit_of: Vec<usize>,
}

/// Data that passed [`validate`], with its orbit tables.
#[derive(Debug, Clone)]
pub struct Validated {
    data: PseudoPeriodicData,
    res: Resolution,
}

impl Validated {
    pub fn new(data: PseudoPeriodicData) -> Result<Validated, ValidationReport> {
        let report = validate(&data);
        if !report.is_valid() {
            return Err(report);
        }
        let res = resolve(&data).expect("validated data must resolve");
        Ok(Validated { data, res })
    }

    pub fn data(&self) -> &PseudoPeriodicData {
        &self.data
    }

    pub fn resolution(&self) -> &Resolution {
        &self.res
    }

    pub fn genus(&self) -> u64 {
        self.data.genus
    }
}

fn perm_check<'a>(
    kind: &'static str,
    keys: impl Iterator<Item = &'a String>,
    map: &BTreeMap<String, String>,
    out: &mut Vec<Violation>,
) {
    let domain: BTreeSet<&String> = keys.collect();
    let mut seen = BTreeSet::new();
    for (k, v) in map {
        if !domain.contains(k) {
            out.push(Violation::UnknownId { kind, id: k.clone(), context: "map key".into() });
        }
        if !domain.contains(v) {
            out.push(Violation::UnknownId { kind, id: v.clone(), context: format!("image of {k:?}") });
        }
        if !seen.insert(v.clone()) {
            out.push(Violation::NotAPermutation { kind, detail: format!("{v:?} hit twice") });
        }
    }
    for d in &domain {
        if !map.contains_key(*d) {
            out.push(Violation::NotAPermutation { kind, detail: format!("{d:?} has no image") });
        }
    }
}

/// Structural pass: ids, slot usage, permutations, equivariance, connectivity.
/// Returns violations; if empty the data can be resolved into orbit tables.
fn structural_violations(data: &PseudoPeriodicData) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut body_ids = BTreeSet::new();
    let mut slot_owner: BTreeMap<&String, &String> = BTreeMap::new();
    for b in &data.bodies {
        if !body_ids.insert(&b.id) {
            out.push(Violation::DuplicateId { kind: "body", id: b.id.clone() });
        }
        for s in &b.slots {
            if slot_owner.insert(s, &b.id).is_some() {
                out.push(Violation::DuplicateId { kind: "slot", id: s.clone() });
            }
        }
    }
    let mut curve_ids = BTreeSet::new();
    let mut slot_uses: BTreeMap<&String, usize> = BTreeMap::new();
    for c in &data.curves {
        if !curve_ids.insert(&c.id) {
            out.push(Violation::DuplicateId { kind: "curve", id: c.id.clone() });
        }
        if c.ends[0] == c.ends[1] {
            out.push(Violation::CurveEndsEqual { curve: c.id.clone() });
        }
        for e in &c.ends {
            if !slot_owner.contains_key(e) {
                out.push(Violation::UnknownId { kind: "slot", id: e.clone(), context: format!("end of curve {:?}", c.id) });
            }
            *slot_uses.entry(e).or_insert(0) += 1;
        }
    }
    for slot in slot_owner.keys() {
        let uses = slot_uses.get(slot).copied().unwrap_or(0);
        if uses != 1 {
            out.push(Violation::SlotUsage { slot: (*slot).clone(), uses });
        }
    }
    if !out.is_empty() {
        return out;
    }

    perm_check("bodies", data.bodies.iter().map(|b| &b.id), &data.action.bodies, &mut out);
    perm_check("slots", data.bodies.iter().flat_map(|b| b.slots.iter()), &data.action.slots, &mut out);
    {
        let domain: BTreeSet<&String> = data.curves.iter().map(|c| &c.id).collect();
        let mut seen = BTreeSet::new();
        for (k, (v, _)) in &data.action.curves {
            if !domain.contains(k) {
                out.push(Violation::UnknownId { kind: "curve", id: k.clone(), context: "map key".into() });
            }
            if !domain.contains(v) {
                out.push(Violation::UnknownId { kind: "curve", id: v.clone(), context: format!("image of {k:?}") });
            }
            if !seen.insert(v.clone()) {
                out.push(Violation::NotAPermutation { kind: "curves", detail: format!("{v:?} hit twice") });
            }
        }
        for d in &domain {
            if !data.action.curves.contains_key(*d) {
                out.push(Violation::NotAPermutation { kind: "curves", detail: format!("{d:?} has no image") });
            }
        }
    }
    if !out.is_empty() {
        return out;
    }

    // Slot map compatible with body map.
    for b in &data.bodies {
        let image_body = &data.action.bodies[&b.id];
        for s in &b.slots {
            let image_slot = &data.action.slots[s];
            let got = slot_owner[image_slot];
            if got != image_body {
                out.push(Violation::SlotBodyIncompatible {
                    slot: s.clone(),
                    expected_body: image_body.clone(),
                    got_body: got.clone(),
                });
            }
        }
    }

    // Curve map induced by the slot map; `reverses` must agree with it.
    let curve_by_id: BTreeMap<&String, &Curve> = data.curves.iter().map(|c| (&c.id, c)).collect();
    for c in &data.curves {
        let (to, reverses) = &data.action.curves[&c.id];
        let image = curve_by_id[to];
        let s0 = &data.action.slots[&c.ends[0]];
        let s1 = &data.action.slots[&c.ends[1]];
        if *s0 == image.ends[0] && *s1 == image.ends[1] {
            if *reverses {
                out.push(Violation::ReversesInconsistent { curve: c.id.clone(), expected: false });
            }
        } else if *s0 == image.ends[1] && *s1 == image.ends[0] {
            if !*reverses {
                out.push(Violation::ReversesInconsistent { curve: c.id.clone(), expected: true });
            }
        } else {
            out.push(Violation::CurveNotInduced {
                curve: c.id.clone(),
                detail: format!("slot images ({s0:?}, {s1:?}) are not the ends of {to:?}"),
            });
        }
    }

    // Connectivity of the body/curve adjacency graph (the surface is closed
    // and connected).
    if !data.bodies.is_empty() {
        let idx: HashMap<&String, usize> = data.bodies.iter().enumerate().map(|(i, b)| (&b.id, i)).collect();
        let slot_body: HashMap<&String, usize> =
            data.bodies.iter().enumerate().flat_map(|(i, b)| b.slots.iter().map(move |s| (s, i))).collect();
        let mut dsu: Vec<usize> = (0..data.bodies.len()).collect();
        fn find(dsu: &mut Vec<usize>, x: usize) -> usize {
            if dsu[x] != x {
                let r = find(dsu, dsu[x]);
                dsu[x] = r;
            }
            dsu[x]
        }
        for c in &data.curves {
            let a = find(&mut dsu, slot_body[&c.ends[0]]);
            let b = find(&mut dsu, slot_body[&c.ends[1]]);
            dsu[a] = b;
        }
        let root = find(&mut dsu, 0);
        if (0..data.bodies.len()).any(|i| find(&mut dsu, i) != root) {
            out.push(Violation::Disconnected);
        }
        let _ = idx;
    }

    out
}

fn orbit_of(start: usize, next: &[usize]) -> Vec<usize> {
    let mut members = vec![start];
    let mut cur = next[start];
    while cur != start {
        members.push(cur);
        cur = next[cur];
    }
    members
}

/// Build the orbit tables. Requires the structural pass to be clean.
fn resolve(data: &PseudoPeriodicData) -> Result<Resolution, Vec<Violation>> {
    let mut out = Vec::new();

    let body_index: HashMap<String, usize> = data.bodies.iter().enumerate().map(|(i, b)| (b.id.clone(), i)).collect();
    let slot_ids: Vec<String> = data.bodies.iter().flat_map(|b| b.slots.iter().cloned()).collect();
    let slot_index: HashMap<String, usize> = slot_ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let curve_index: HashMap<String, usize> = data.curves.iter().enumerate().map(|(i, c)| (c.id.clone(), i)).collect();
    let slot_body: Vec<usize> = data
        .bodies
        .iter()
        .enumerate()
        .flat_map(|(i, b)| b.slots.iter().map(move |_| i))
        .collect();

    let body_next: Vec<usize> = data.bodies.iter().map(|b| body_index[&data.action.bodies[&b.id]]).collect();
    let slot_next: Vec<usize> = slot_ids.iter().map(|s| slot_index[&data.action.slots[s]]).collect();
    let curve_next: Vec<usize> = data.curves.iter().map(|c| curve_index[&data.action.curves[&c.id].0]).collect();
    let curve_rev: Vec<bool> = data.curves.iter().map(|c| data.action.curves[&c.id].1).collect();

    // Orbits with canonical (smallest-id) representatives, sorted by rep.
    fn orbits(n: usize, next: &[usize], ids: &dyn Fn(usize) -> String) -> (Vec<Vec<usize>>, Vec<usize>) {
        let mut seen = vec![false; n];
        let mut all = Vec::new();
        for i in 0..n {
            if seen[i] {
                continue;
            }
            let mut members = orbit_of(i, next);
            for &m in &members {
                seen[m] = true;
            }
            let best = members
                .iter()
                .enumerate()
                .min_by_key(|(_, &m)| ids(m))
                .map(|(pos, _)| pos)
                .unwrap();
            members.rotate_left(best);
            all.push(members);
        }
        all.sort_by_key(|m| ids(m[0]));
        let mut of = vec![0; n];
        for (k, m) in all.iter().enumerate() {
            for &x in m {
                of[x] = k;
            }
        }
        (all, of)
    }

    let body_id = |i: usize| data.bodies[i].id.clone();
    let slot_id = |i: usize| slot_ids[i].clone();
    let curve_id = |i: usize| data.curves[i].id.clone();
    let (body_orbit_members, body_orbit_of) = orbits(data.bodies.len(), &body_next, &body_id);
    let (slot_orbit_members, slot_orbit_of) = orbits(slot_ids.len(), &slot_next, &slot_id);
    let (curve_orbit_members, curve_orbit_of) = orbits(data.curves.len(), &curve_next, &curve_id);

    // Match listed body orbit data against computed orbits: exactly one entry
    // per orbit.
    let mut body_entry: Vec<Option<&BodyOrbitData>> = vec![None; body_orbit_members.len()];
    for o in &data.body_orbits {
        let Some(&bi) = body_index.get(&o.rep) else {
            out.push(Violation::UnknownId { kind: "body", id: o.rep.clone(), context: "body orbit rep".into() });
            continue;
        };
        let k = body_orbit_of[bi];
        if body_entry[k].is_some() {
            out.push(Violation::OrbitCoverage {
                kind: "body",
                detail: format!("orbit of {:?} listed more than once", o.rep),
            });
        }
        body_entry[k] = Some(o);
    }
    for (k, e) in body_entry.iter().enumerate() {
        if e.is_none() {
            out.push(Violation::OrbitCoverage {
                kind: "body",
                detail: format!("orbit of {:?} has no data", data.bodies[body_orbit_members[k][0]].id),
            });
        }
    }

    let mut curve_entry: Vec<Option<&CurveOrbitData>> = vec![None; curve_orbit_members.len()];
    for o in &data.curve_orbits {
        let Some(&ci) = curve_index.get(&o.rep) else {
            out.push(Violation::UnknownId { kind: "curve", id: o.rep.clone(), context: "curve orbit rep".into() });
            continue;
        };
        let k = curve_orbit_of[ci];
        if curve_entry[k].is_some() {
            out.push(Violation::OrbitCoverage {
                kind: "curve",
                detail: format!("orbit of {:?} listed more than once", o.rep),
            });
        }
        curve_entry[k] = Some(o);
    }
    for (k, e) in curve_entry.iter().enumerate() {
        if e.is_none() {
            out.push(Violation::OrbitCoverage {
                kind: "curve",
                detail: format!("orbit of {:?} has no data", data.curves[curve_orbit_members[k][0]].id),
            });
        }
    }

    // Boundary valencies: each body orbit's entries must cover exactly the
    // slot orbits sitting on that body orbit.
    let mut slot_orbit_valency: Vec<Option<Valency>> = vec![None; slot_orbit_members.len()];
    for (k, entry) in body_entry.iter().enumerate() {
        let Some(o) = entry else { continue };
        let mut covered: BTreeSet<usize> = BTreeSet::new();
        for (slot, val) in &o.boundary_valencies {
            let Some(&si) = slot_index.get(slot) else {
                out.push(Violation::UnknownId { kind: "slot", id: slot.clone(), context: "boundary valency key".into() });
                continue;
            };
            let so = slot_orbit_of[si];
            if body_orbit_of[slot_body[si]] != k {
                out.push(Violation::OrbitCoverage {
                    kind: "boundary",
                    detail: format!("slot {slot:?} does not sit on body orbit {:?}", o.rep),
                });
                continue;
            }
            if !covered.insert(so) {
                out.push(Violation::OrbitCoverage {
                    kind: "boundary",
                    detail: format!("slot orbit of {slot:?} listed more than once"),
                });
                continue;
            }
            if let Err(reason) = val.check() {
                out.push(Violation::ValencyInvalid {
                    context: format!("boundary valency at {slot:?}"),
                    lambda: val.lambda,
                    sigma: val.sigma,
                    reason,
                });
                continue;
            }
            slot_orbit_valency[so] = Some(*val);
        }
        let expected: BTreeSet<usize> = slot_orbit_members
            .iter()
            .enumerate()
            .filter(|(_, m)| body_orbit_of[slot_body[m[0]]] == k)
            .map(|(i, _)| i)
            .collect();
        for missing in expected.difference(&covered) {
            out.push(Violation::OrbitCoverage {
                kind: "boundary",
                detail: format!(
                    "slot orbit of {:?} on body orbit {:?} has no valency",
                    slot_ids[slot_orbit_members[*missing][0]], o.rep
                ),
            });
        }
    }

    // Cone point valencies.
    for (k, entry) in body_entry.iter().enumerate() {
        let Some(o) = entry else { continue };
        let _ = k;
        for v in &o.cone_points {
            if let Err(reason) = v.check() {
                out.push(Violation::ValencyInvalid {
                    context: format!("cone point of body orbit {:?}", o.rep),
                    lambda: v.lambda,
                    sigma: v.sigma,
                    reason,
                });
            } else if v.lambda < 2 {
                out.push(Violation::ValencyInvalid {
                    context: format!("cone point of body orbit {:?}", o.rep),
                    lambda: v.lambda,
                    sigma: v.sigma,
                    reason: "a cone point needs rotation order at least 2".into(),
                });
            }
        }
    }

    if !out.is_empty() {
        return Err(out);
    }

    let body_orbits: Vec<ResolvedBodyOrbit> = body_orbit_members
        .iter()
        .enumerate()
        .map(|(k, members)| {
            let o = body_entry[k].unwrap();
            let mut cones = o.cone_points.clone();
            cones.sort();
            let mut slot_orbits: Vec<usize> = slot_orbit_members
                .iter()
                .enumerate()
                .filter(|(_, m)| body_orbit_of[slot_body[m[0]]] == k)
                .map(|(i, _)| i)
                .collect();
            slot_orbits.sort_by_key(|&i| slot_ids[slot_orbit_members[i][0]].clone());
            ResolvedBodyOrbit {
                rep: data.bodies[members[0]].id.clone(),
                members: members.clone(),
                orbit_size: members.len() as u64,
                return_order: o.return_order,
                quotient_genus: o.quotient_genus,
                cone_points: cones,
                slot_orbits,
            }
        })
        .collect();

    let slot_orbits: Vec<ResolvedSlotOrbit> = slot_orbit_members
        .iter()
        .enumerate()
        .map(|(k, members)| ResolvedSlotOrbit {
            rep: slot_ids[members[0]].clone(),
            members: members.clone(),
            orbit_size: members.len() as u64,
            body_orbit: body_orbit_of[slot_body[members[0]]],
            valency: slot_orbit_valency[k].unwrap(),
        })
        .collect();

    let curve_orbits: Vec<ResolvedCurveOrbit> = curve_orbit_members
        .iter()
        .enumerate()
        .map(|(k, members)| {
            let o = curve_entry[k].unwrap();
            let rev: bool = members.iter().fold(false, |acc, &c| acc ^ curve_rev[c]);
            let t = members.len() as u64;
            let alpha = if rev { 2 * t } else { t };
            let rep_curve = &data.curves[members[0]];
            let sides = [
                slot_orbit_of[slot_index[&rep_curve.ends[0]]],
                slot_orbit_of[slot_index[&rep_curve.ends[1]]],
            ];
            ResolvedCurveOrbit {
                rep: rep_curve.id.clone(),
                members: members.clone(),
                orbit_size: t,
                amphidrome: rev,
                alpha,
                screw: o.screw.clone(),
                sides,
            }
        })
        .collect();

    Ok(Resolution {
        body_index,
        slot_index,
        curve_index,
        slot_ids,
        slot_body,
        body_orbits,
        slot_orbits,
        curve_orbits,
        body_orbit_of,
        slot_orbit_of,
        curve_orbit_of,
    })
}

fn chi(genus: u64, boundary: usize) -> i64 {
    2 - 2 * genus as i64 - boundary as i64
}

/// Run every consistency check. An empty report means the data is valid.
pub fn validate(data: &PseudoPeriodicData) -> ValidationReport {
    let mut out = structural_violations(data);
    if !out.is_empty() {
        return ValidationReport { violations: out };
    }
    let res = match resolve(data) {
        Ok(res) => res,
        Err(violations) => return ValidationReport { violations },
    };

    // (j) Genus support: g >= 2, or g = 1 with an empty curve system.
    if data.genus == 0 || (data.genus == 1 && !data.curves.is_empty()) {
        out.push(Violation::GenusUnsupported { genus: data.genus, curve_count: data.curves.len() });
    }

    // (a) Admissibility: every piece of the cut surface has negative Euler
    // characteristic. Vacuous for an empty curve system, where the single
    // body is the whole closed surface.
    if !data.curves.is_empty() {
        for b in &data.bodies {
            let c = chi(b.genus, b.slots.len());
            if c >= 0 {
                out.push(Violation::NonNegativeEuler { body: b.id.clone(), chi: c });
            }
        }
    }

    // (b) Total Euler characteristic.
    let total: i64 = data.bodies.iter().map(|b| chi(b.genus, b.slots.len())).sum();
    let expected = 2 - 2 * data.genus as i64;
    if total != expected {
        out.push(Violation::TotalEulerMismatch { total, expected });
    }

    // (e) Riemann-Hurwitz per body orbit, in exact rationals, plus cone order
    // divisibility.
    for bo in &res.body_orbits {
        for cp in &bo.cone_points {
            if bo.return_order % cp.lambda != 0 {
                out.push(Violation::ConeOrderInvalid {
                    body_orbit: bo.rep.clone(),
                    lambda: cp.lambda,
                    order: bo.return_order,
                });
            }
        }
        let body = &data.bodies[bo.members[0]];
        let lhs = BigRational::from(BigInt::from(chi(body.genus, body.slots.len())));
        let r_bar = bo.slot_orbits.len() as i64;
        let mut orb = BigRational::from(BigInt::from(2 - 2 * bo.quotient_genus as i64 - r_bar));
        for cp in &bo.cone_points {
            orb -= BigRational::from(BigInt::from(1))
                - BigRational::new(BigInt::from(1), BigInt::from(cp.lambda));
        }
        let rhs = BigRational::from(BigInt::from(bo.return_order)) * orb;
        if lhs != rhs {
            out.push(Violation::RiemannHurwitz {
                body_orbit: bo.rep.clone(),
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
            });
        }
    }

    // (f) Boundary valency consistency: lambda * slot return = order * orbit size.
    for so in &res.slot_orbits {
        let bo = &res.body_orbits[so.body_orbit];
        if so.valency.lambda * so.orbit_size != bo.return_order * bo.orbit_size {
            out.push(Violation::BoundaryValencyMismatch {
                slot: so.rep.clone(),
                lambda: so.valency.lambda,
                slot_return: so.orbit_size,
                expected: bo.return_order * bo.orbit_size,
            });
        }
    }

    // (g) Side return times against alpha; amphidrome orbits must have both
    // ends in a single slot orbit.
    for co in &res.curve_orbits {
        if co.amphidrome {
            if co.sides[0] != co.sides[1] {
                out.push(Violation::AmphidromeSides {
                    curve_orbit: co.rep.clone(),
                    detail: "the two ends are in different slot orbits".into(),
                });
                continue;
            }
            let so = &res.slot_orbits[co.sides[0]];
            if so.orbit_size != co.alpha {
                out.push(Violation::SideReturnMismatch {
                    curve_orbit: co.rep.clone(),
                    side: 0,
                    side_return: so.orbit_size,
                    alpha: co.alpha,
                });
            }
        } else {
            for (i, &side) in co.sides.iter().enumerate() {
                let so = &res.slot_orbits[side];
                if so.orbit_size != co.alpha {
                    out.push(Violation::SideReturnMismatch {
                        curve_orbit: co.rep.clone(),
                        side: i as u8,
                        side_return: so.orbit_size,
                        alpha: co.alpha,
                    });
                }
            }
        }
    }

    // (i) Screw numbers strictly negative.
    for co in &res.curve_orbits {
        if !co.screw.is_negative() {
            out.push(Violation::ScrewNotNegative { curve_orbit: co.rep.clone(), screw: co.screw.to_string() });
        }
    }

    // (h) Screw compatibility with the side valencies.
    for co in &res.curve_orbits {
        if !co.screw.is_negative() {
            continue;
        }
        let s_abs = -co.screw.clone();
        if co.amphidrome {
            let v = res.slot_orbits[co.sides[0]].valency;
            let (_, head_sum) = chains::amph_head(&v);
            let half = &s_abs / BigRational::from(BigInt::from(2));
            let diff = &half - &head_sum;
            if !diff.is_integer() || diff.is_negative() {
                out.push(Violation::ScrewIncompatible {
                    curve_orbit: co.rep.clone(),
                    detail: format!("|s|/2 - {head_sum} = {diff} is not a nonnegative integer"),
                });
            }
        } else {
            let v1 = res.slot_orbits[co.sides[0]].valency;
            let v2 = res.slot_orbits[co.sides[1]].valency;
            let frac = v1.delta_frac() + v2.delta_frac();
            if !(&s_abs - &frac).is_integer() {
                out.push(Violation::ScrewIncompatible {
                    curve_orbit: co.rep.clone(),
                    detail: format!("|s| - {frac} is not an integer"),
                });
            }
        }
    }

    ValidationReport { violations: out }
}

// ---------------------------------------------------------------------------
// Derived quantities

#[derive(Debug, Clone, Copy)]
pub enum OrbitObject<'a> {
    Body(&'a str),
    Slot(&'a str),
    Curve(&'a str),
}

#[derive(Debug, Error)]
#[error("unknown {kind} id {id:?}")]
pub struct UnknownId {
    pub kind: &'static str,
    pub id: String,
}

/// Return time of an object under the map: orbit size for a body, orbit size
/// for a slot, and the oriented return time for a curve (doubled when the
/// first setwise return reverses orientation).
pub fn return_time(v: &Validated, obj: OrbitObject<'_>) -> Result<u64, UnknownId> {
    let res = v.resolution();
    match obj {
        OrbitObject::Body(id) => {
            let &i = res.body_index.get(id).ok_or(UnknownId { kind: "body", id: id.into() })?;
            Ok(res.body_orbits[res.body_orbit_of[i]].orbit_size)
        }
        OrbitObject::Slot(id) => {
            let &i = res.slot_index.get(id).ok_or(UnknownId { kind: "slot", id: id.into() })?;
            Ok(res.slot_orbits[res.slot_orbit_of[i]].orbit_size)
        }
        OrbitObject::Curve(id) => {
            let &i = res.curve_index.get(id).ok_or(UnknownId { kind: "curve", id: id.into() })?;
            Ok(res.curve_orbits[res.curve_orbit_of[i]].alpha)
        }
    }
}

/// Multiplicity `orbit size * return order` of the body component the given
/// body contributes to.
pub fn body_multiplicity(v: &Validated, body: &str) -> Result<u64, UnknownId> {
    let res = v.resolution();
    let &i = res.body_index.get(body).ok_or(UnknownId { kind: "body", id: body.into() })?;
    Ok(res.body_orbits[res.body_orbit_of[i]].multiplicity())
}

// ---------------------------------------------------------------------------
// Relabeling helpers (used by tests and the conjugacy regression suite)

/// Apply an id renaming to every piece of the data. The three closures must
/// be injective on the respective id sets.
pub fn relabel(
    data: &PseudoPeriodicData,
    body_name: &dyn Fn(&str) -> String,
    slot_name: &dyn Fn(&str) -> String,
    curve_name: &dyn Fn(&str) -> String,
) -> PseudoPeriodicData {
    PseudoPeriodicData {
        genus: data.genus,
        bodies: data
            .bodies
            .iter()
            .map(|b| Body {
                id: body_name(&b.id),
                genus: b.genus,
                slots: b.slots.iter().map(|s| slot_name(s)).collect(),
            })
            .collect(),
        curves: data
            .curves
            .iter()
            .map(|c| Curve { id: curve_name(&c.id), ends: [slot_name(&c.ends[0]), slot_name(&c.ends[1])] })
            .collect(),
        action: MapAction {
            bodies: data.action.bodies.iter().map(|(k, v)| (body_name(k), body_name(v))).collect(),
            slots: data.action.slots.iter().map(|(k, v)| (slot_name(k), slot_name(v))).collect(),
            curves: data
                .action
                .curves
                .iter()
                .map(|(k, (v, r))| (curve_name(k), (curve_name(v), *r)))
                .collect(),
        },
        body_orbits: data
            .body_orbits
            .iter()
            .map(|o| BodyOrbitData {
                rep: body_name(&o.rep),
                return_order: o.return_order,
                quotient_genus: o.quotient_genus,
                cone_points: o.cone_points.clone(),
                boundary_valencies: o.boundary_valencies.iter().map(|(k, v)| (slot_name(k), *v)).collect(),
            })
            .collect(),
        curve_orbits: data
            .curve_orbits
            .iter()
            .map(|o| CurveOrbitData { rep: curve_name(&o.rep), screw: o.screw.clone() })
            .collect(),
    }
}

/// Reorder the body/curve arrays and replace each orbit representative by
/// another member of its orbit, keeping ids intact. Deterministic in `seed`.
pub fn shuffled(data: &PseudoPeriodicData, seed: u64) -> PseudoPeriodicData {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = data.clone();
    out.bodies.shuffle(&mut rng);
    out.curves.shuffle(&mut rng);
    out.body_orbits.shuffle(&mut rng);
    out.curve_orbits.shuffle(&mut rng);
    if let Ok(v) = Validated::new(data.clone()) {
        let res = v.resolution();
        for o in &mut out.body_orbits {
            let i = res.body_index[&o.rep];
            let orbit = &res.body_orbits[res.body_orbit_of[i]];
            let pick = orbit.members[rng.gen_range(0..orbit.members.len())];
            o.rep = data.bodies[pick].id.clone();
        }
        for o in &mut out.curve_orbits {
            let i = res.curve_index[&o.rep];
            let orbit = &res.curve_orbits[res.curve_orbit_of[i]];
            let pick = orbit.members[rng.gen_range(0..orbit.members.len())];
            o.rep = data.curves[pick].id.clone();
        }
        // Boundary valency keys may also move to other orbit members.
        for o in &mut out.body_orbits {
            let keys: Vec<String> = o.boundary_valencies.keys().cloned().collect();
            for k in keys {
                let i = res.slot_index[&k];
                let orbit = &res.slot_orbits[res.slot_orbit_of[i]];
                let pick = orbit.members[rng.gen_range(0..orbit.members.len())];
                let new_key = res.slot_ids[pick].clone();
                if new_key != k {
                    let val = o.boundary_valencies.remove(&k).unwrap();
                    o.boundary_valencies.insert(new_key, val);
                }
            }
        }
    }
    out
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn modular_inverse_examples() {
        assert_eq!(modular_inverse_delta(&Valency::new(5, 3).unwrap()), 2);
        assert_eq!(modular_inverse_delta(&Valency::new(2, 1).unwrap()), 1);
        assert_eq!(modular_inverse_delta(&Valency::trivial()), 0);
    }

    #[test]
    fn modular_inverse_against_brute_force() {
        for lambda in 2..60u64 {
            for sigma in 1..lambda {
                if num_integer::gcd(lambda, sigma) != 1 {
                    continue;
                }
                let v = Valency::new(lambda, sigma).unwrap();
                let delta = modular_inverse_delta(&v);
                let brute = (1..lambda).find(|d| (d * sigma) % lambda == 1).unwrap();
                assert_eq!(delta, brute);
            }
        }
    }

    #[test]
    fn modular_inverse_round_trips() {
        for lambda in 2..40u64 {
            for sigma in 1..lambda {
                if num_integer::gcd(lambda, sigma) != 1 {
                    continue;
                }
                let v = Valency::new(lambda, sigma).unwrap();
                let w = Valency::new(lambda, v.delta()).unwrap();
                assert_eq!(w.delta(), sigma);
            }
        }
    }

    #[test]
    fn nielsen_data_is_valid() {
        let data = catalog::builtin_get("nielsen-f1").unwrap().data;
        let report = validate(&data);
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn return_times_on_catalog_data() {
        let v = Validated::new(catalog::builtin_get("nielsen-f1").unwrap().data).unwrap();
        assert_eq!(return_time(&v, OrbitObject::Curve("c1")).unwrap(), 5);
        assert_eq!(return_time(&v, OrbitObject::Body("b1")).unwrap(), 5);
        assert_eq!(body_multiplicity(&v, "b3").unwrap(), 5);

        let id = Validated::new(catalog::builtin_get("identity-genus2").unwrap().data).unwrap();
        assert_eq!(return_time(&id, OrbitObject::Body("b")).unwrap(), 1);
        assert_eq!(body_multiplicity(&id, "b").unwrap(), 1);

        let amph = Validated::new(catalog::builtin_get("amphidrome-genus2").unwrap().data).unwrap();
        assert_eq!(return_time(&amph, OrbitObject::Curve("c")).unwrap(), 2);
        assert_eq!(return_time(&amph, OrbitObject::Slot("s1")).unwrap(), 2);

        let torus = Validated::new(catalog::builtin_get("kodaira-II*").unwrap().data).unwrap();
        assert_eq!(body_multiplicity(&torus, "b").unwrap(), 6);
    }

    #[test]
    fn annulus_complement_fails_admissibility() {
        // A torus cut along one curve: single genus-0 body with two slots
        // (an annulus), whose Euler characteristic is 0.
        let data = PseudoPeriodicData {
            genus: 2,
            bodies: vec![Body { id: "b".into(), genus: 0, slots: vec!["s1".into(), "s2".into()] }],
            curves: vec![Curve { id: "c".into(), ends: ["s1".into(), "s2".into()] }],
            action: MapAction {
                bodies: [("b".into(), "b".into())].into(),
                slots: [("s1".into(), "s1".into()), ("s2".into(), "s2".into())].into(),
                curves: [("c".into(), ("c".into(), false))].into(),
            },
            body_orbits: vec![BodyOrbitData {
                rep: "b".into(),
                return_order: 1,
                quotient_genus: 0,
                cone_points: vec![],
                boundary_valencies: [("s1".into(), Valency::trivial()), ("s2".into(), Valency::trivial())].into(),
            }],
            curve_orbits: vec![CurveOrbitData { rep: "c".into(), screw: rat(-1, 1) }],
        };
        let report = validate(&data);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::NonNegativeEuler { .. })), "{report}");
    }

    #[test]
    fn incompatible_screw_is_reported() {
        // Sides (2,1) and (1,0) force |s| ≡ 1/2 (mod 1); |s| = 1/3 fails.
        let mut data = catalog::two_body_chain_example();
        data.curve_orbits[0].screw = rat(-1, 3);
        let report = validate(&data);
        assert!(
            report.violations.iter().any(|v| matches!(v, Violation::ScrewIncompatible { .. })),
            "{report}"
        );
    }

    #[test]
    fn zero_screw_rejected() {
        let mut data = catalog::builtin_get("nielsen-f1").unwrap().data;
        data.curve_orbits[0].screw = rat(0, 1);
        let report = validate(&data);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::ScrewNotNegative { .. })));
    }

    #[test]
    fn torus_with_curves_rejected() {
        // Periodic torus data is fine...
        let data = catalog::builtin_get("kodaira-I0*").unwrap().data;
        assert!(validate(&data).is_valid());
        // ...but genus 1 with a nonempty curve system is not supported.
        let mut with_curves = catalog::two_body_chain_example();
        with_curves.genus = 1;
        let report = validate(&with_curves);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::GenusUnsupported { .. })), "{report}");
    }

    #[test]
    fn validation_invariant_under_relabeling_and_shuffling() {
        for name in catalog::builtin_list() {
            let data = catalog::builtin_get(name).unwrap().data;
            let relabeled = relabel(
                &data,
                &|b| format!("X{b}X"),
                &|s| format!("Y{s}"),
                &|c| format!("Z{c}"),
            );
            assert!(validate(&relabeled).is_valid(), "{name} relabeled");
            for seed in 0..3 {
                let shuf = shuffled(&data, seed);
                assert!(validate(&shuf).is_valid(), "{name} shuffled {seed}");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        for name in catalog::builtin_list() {
            let data = catalog::builtin_get(name).unwrap().data;
            let text = data.to_json();
            let back = PseudoPeriodicData::from_json(&text).unwrap();
            assert_eq!(data, back, "{name}");
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"genus": 2, "bodies": [], "curves": [], "map": {"bodies": {}, "slots": {}, "curves": {}}, "body_orbits": [], "curve_orbits": [], "extra": 1}"#;
        assert!(PseudoPeriodicData::from_json(text).is_err());
    }
}
