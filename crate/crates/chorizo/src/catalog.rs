//! Built-in example inputs used by tests, docs, and the CLI.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::model::{Body, BodyOrbitData, Curve, CurveOrbitData, MapAction, PseudoPeriodicData, Valency};

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub data: PseudoPeriodicData,
    /// Expected multiplicity multiset of the generalized quotient, when pinned.
    pub expected_multiplicities: Option<Vec<u64>>,
}

const NAMES: [&str; 8] = [
    "amphidrome-genus2",
    "identity-genus2",
    "kodaira-I0*",
    "kodaira-II*",
    "kodaira-III*",
    "kodaira-IV*",
    "nielsen-f1",
    "nielsen-f2",
];

/// Stable list of built-in input names.
pub fn builtin_list() -> Vec<&'static str> {
    NAMES.to_vec()
}

pub fn builtin_get(name: &str) -> Option<CatalogEntry> {
    let entry = match name {
        "amphidrome-genus2" => CatalogEntry {
            name: "amphidrome-genus2",
            data: amphidrome_genus2(),
            expected_multiplicities: Some(vec![1, 1, 1, 1, 1, 1, 2, 2]),
        },
        "identity-genus2" => CatalogEntry {
            name: "identity-genus2",
            data: identity_genus2(),
            expected_multiplicities: Some(vec![1]),
        },
        "kodaira-I0*" => CatalogEntry {
            name: "kodaira-I0*",
            data: periodic_torus(2, &[(2, 1), (2, 1), (2, 1), (2, 1)]),
            expected_multiplicities: Some(vec![1, 1, 1, 1, 2]),
        },
        "kodaira-IV*" => CatalogEntry {
            name: "kodaira-IV*",
            data: periodic_torus(3, &[(3, 1), (3, 1), (3, 1)]),
            expected_multiplicities: Some(vec![1, 1, 1, 2, 2, 2, 3]),
        },
        "kodaira-III*" => CatalogEntry {
            name: "kodaira-III*",
            data: periodic_torus(4, &[(4, 1), (4, 1), (2, 1)]),
            expected_multiplicities: Some(vec![1, 1, 2, 2, 2, 3, 3, 4]),
        },
        "kodaira-II*" => CatalogEntry {
            name: "kodaira-II*",
            data: periodic_torus(6, &[(6, 1), (3, 1), (2, 1)]),
            expected_multiplicities: Some(vec![1, 2, 2, 3, 3, 4, 4, 5, 6]),
        },
        "nielsen-f1" => CatalogEntry { name: "nielsen-f1", data: nielsen(1), expected_multiplicities: Some(vec![5]) },
        "nielsen-f2" => CatalogEntry { name: "nielsen-f2", data: nielsen(2), expected_multiplicities: Some(vec![5]) },
        _ => return None,
    };
    Some(entry)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn val(lambda: u64, sigma: u64) -> Valency {
    Valency::new(lambda, sigma).expect("catalog valencies are valid")
}

/// The identity class on a closed genus-2 surface: no curves, trivial action.
fn identity_genus2() -> PseudoPeriodicData {
    PseudoPeriodicData {
        genus: 2,
        bodies: vec![Body { id: "b".into(), genus: 2, slots: vec![] }],
        curves: vec![],
        action: MapAction {
            bodies: [("b".into(), "b".into())].into(),
            slots: [].into(),
            curves: [].into(),
        },
        body_orbits: vec![BodyOrbitData {
            rep: "b".into(),
            return_order: 1,
            quotient_genus: 2,
            cone_points: vec![],
            boundary_valencies: [].into(),
        }],
        curve_orbits: vec![],
    }
}

/// A periodic map of the given order on the torus, described by the cone
/// points of its quotient orbifold.
fn periodic_torus(order: u64, cones: &[(u64, u64)]) -> PseudoPeriodicData {
    PseudoPeriodicData {
        genus: 1,
        bodies: vec![Body { id: "b".into(), genus: 1, slots: vec![] }],
        curves: vec![],
        action: MapAction {
            bodies: [("b".into(), "b".into())].into(),
            slots: [].into(),
            curves: [].into(),
        },
        body_orbits: vec![BodyOrbitData {
            rep: "b".into(),
            return_order: order,
            quotient_genus: 0,
            cone_points: cones.iter().map(|&(l, s)| val(l, s)).collect(),
            boundary_valencies: [].into(),
        }],
        curve_orbits: vec![],
    }
}

/// Five genus-1 bodies in a cycle joined by five curves; the map shifts the
/// cycle by `k` and the fifth power is isotopic to the identity away from the
/// curves. Every screw number is -1. Shifts 1 and 2 are the catalog entries
/// nielsen-f1 and nielsen-f2; other shifts are exposed for tests.
pub fn nielsen_shift(k: usize) -> PseudoPeriodicData {
    nielsen(k)
}

fn nielsen(k: usize) -> PseudoPeriodicData {
    let n = 5usize;
    let body_id = |i: usize| format!("b{}", i % n + 1);
    let left = |i: usize| format!("s{}l", i % n + 1);
    let right = |i: usize| format!("s{}r", i % n + 1);
    let curve_id = |j: usize| format!("c{}", j % n + 1);

    let bodies = (0..n)
        .map(|i| Body { id: body_id(i), genus: 1, slots: vec![left(i), right(i)] })
        .collect();
    // Curve j joins the right slot of body j to the left slot of body j+1.
    let curves = (0..n)
        .map(|j| Curve { id: curve_id(j), ends: [right(j), left(j + 1)] })
        .collect();
    let action = MapAction {
        bodies: (0..n).map(|i| (body_id(i), body_id(i + k))).collect(),
        slots: (0..n)
            .flat_map(|i| [(left(i), left(i + k)), (right(i), right(i + k))])
            .collect(),
        curves: (0..n).map(|j| (curve_id(j), (curve_id(j + k), false))).collect(),
    };
    PseudoPeriodicData {
        genus: 6,
        bodies,
        curves,
        action,
        body_orbits: vec![BodyOrbitData {
            rep: "b1".into(),
            return_order: 1,
            quotient_genus: 1,
            cone_points: vec![],
            boundary_valencies: [("s1l".into(), Valency::trivial()), ("s1r".into(), Valency::trivial())].into(),
        }],
        curve_orbits: vec![CurveOrbitData { rep: "c1".into(), screw: rat(-1, 1) }],
    }
}

/// One genus-1 body whose order-2 return map swaps the two ends of a single
/// amphidrome curve; the quotient is a sphere with four cone points of order
/// 2 and one boundary.
fn amphidrome_genus2() -> PseudoPeriodicData {
    PseudoPeriodicData {
        genus: 2,
        bodies: vec![Body { id: "b".into(), genus: 1, slots: vec!["s1".into(), "s2".into()] }],
        curves: vec![Curve { id: "c".into(), ends: ["s1".into(), "s2".into()] }],
        action: MapAction {
            bodies: [("b".into(), "b".into())].into(),
            slots: [("s1".into(), "s2".into()), ("s2".into(), "s1".into())].into(),
            curves: [("c".into(), ("c".into(), true))].into(),
        },
        body_orbits: vec![BodyOrbitData {
            rep: "b".into(),
            return_order: 2,
            quotient_genus: 0,
            cone_points: vec![val(2, 1), val(2, 1), val(2, 1), val(2, 1)],
            boundary_valencies: [("s1".into(), Valency::trivial())].into(),
        }],
        curve_orbits: vec![CurveOrbitData { rep: "c".into(), screw: rat(-2, 1) }],
    }
}

/// Two fixed bodies joined by one fixed curve with side valencies (2,1) and
/// (1,0). Not part of the public catalog; used by validation tests.
pub fn two_body_chain_example() -> PseudoPeriodicData {
    PseudoPeriodicData {
        genus: 2,
        bodies: vec![
            Body { id: "a".into(), genus: 1, slots: vec!["a1".into()] },
            Body { id: "b".into(), genus: 1, slots: vec!["b1".into()] },
        ],
        curves: vec![Curve { id: "c".into(), ends: ["a1".into(), "b1".into()] }],
        action: MapAction {
            bodies: [("a".into(), "a".into()), ("b".into(), "b".into())].into(),
            slots: [("a1".into(), "a1".into()), ("b1".into(), "b1".into())].into(),
            curves: [("c".into(), ("c".into(), false))].into(),
        },
        body_orbits: vec![
            BodyOrbitData {
                rep: "a".into(),
                return_order: 2,
                quotient_genus: 0,
                cone_points: vec![val(2, 1), val(2, 1), val(2, 1)],
                boundary_valencies: [("a1".into(), val(2, 1))].into(),
            },
            BodyOrbitData {
                rep: "b".into(),
                return_order: 1,
                quotient_genus: 1,
                cone_points: vec![],
                boundary_valencies: [("b1".into(), Valency::trivial())].into(),
            },
        ],
        curve_orbits: vec![CurveOrbitData { rep: "c".into(), screw: rat(-1, 2) }],
    }
}
