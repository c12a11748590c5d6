//! Canonical forms and isomorphism for small labeled multigraphs.
//!
//! Two independent routes are provided on purpose: [`canonical_encoding`]
//! computes a relabeling-invariant byte string by individualization and
//! refinement, while [`isomorphic`] decides isomorphism directly by
//! backtracking. Tests play them against each other.
//!
//! Graphs are undirected multigraphs with loops. Every edge carries a label
//! for each end plus a core label, so asymmetric data (like a boundary
//! valency sitting on one side of an annulus) survives canonicalization. An
//! optional finite-order action can be attached; it permutes vertices and
//! half-edges, encodings include it, and isomorphism is then required to be
//! equivariant (a conjugacy of the two actions).

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_rational::BigRational;

/// Label values that can be ordered and written into a canonical encoding.
pub trait CanonLabel: Ord + Clone + Debug {
    fn write_canon(&self, out: &mut String);
}

impl CanonLabel for () {
    fn write_canon(&self, out: &mut String) {
        out.push('_');
    }
}

impl CanonLabel for u64 {
    fn write_canon(&self, out: &mut String) {
        out.push_str(&self.to_string());
    }
}

impl CanonLabel for bool {
    fn write_canon(&self, out: &mut String) {
        out.push(if *self { 't' } else { 'f' });
    }
}

impl CanonLabel for String {
    fn write_canon(&self, out: &mut String) {
        out.push_str(&self.len().to_string());
        out.push(':');
        out.push_str(self);
    }
}

impl<T: CanonLabel> CanonLabel for Option<T> {
    fn write_canon(&self, out: &mut String) {
        match self {
            None => out.push('-'),
            Some(t) => {
                out.push('+');
                t.write_canon(out);
            }
        }
    }
}

impl<A: CanonLabel, B: CanonLabel> CanonLabel for (A, B) {
    fn write_canon(&self, out: &mut String) {
        out.push('(');
        self.0.write_canon(out);
        out.push(',');
        self.1.write_canon(out);
        out.push(')');
    }
}

impl<A: CanonLabel, B: CanonLabel, C: CanonLabel> CanonLabel for (A, B, C) {
    fn write_canon(&self, out: &mut String) {
        out.push('(');
        self.0.write_canon(out);
        out.push(',');
        self.1.write_canon(out);
        out.push(',');
        self.2.write_canon(out);
        out.push(')');
    }
}

impl<T: CanonLabel> CanonLabel for Vec<T> {
    fn write_canon(&self, out: &mut String) {
        out.push('[');
        for t in self {
            t.write_canon(out);
            out.push(';');
        }
        out.push(']');
    }
}

/// Exact rational as a canonical label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rat(pub BigRational);

impl CanonLabel for Rat {
    fn write_canon(&self, out: &mut String) {
        out.push_str(&self.0.numer().to_string());
        out.push('/');
        out.push_str(&self.0.denom().to_string());
    }
}

/// Edge between `u` and `v` with an end label on each side and a core label.
#[derive(Debug, Clone)]
pub struct CEdge<E, F> {
    pub u: usize,
    pub v: usize,
    pub lu: F,
    pub lv: F,
    pub core: E,
}

/// Finite-order action: a vertex permutation plus an edge permutation where
/// `emap[e] = (e', flip)` sends the half-edge `(e, side)` to `(e', side ^ flip)`.
#[derive(Debug, Clone)]
pub struct CAction {
    pub vmap: Vec<usize>,
    pub emap: Vec<(usize, bool)>,
}

#[derive(Debug, Clone)]
pub struct CGraph<V, E, F> {
    pub verts: Vec<V>,
    pub edges: Vec<CEdge<E, F>>,
    pub action: Option<CAction>,
}

impl<V: CanonLabel, E: CanonLabel, F: CanonLabel> CGraph<V, E, F> {
    fn check(&self) {
        for e in &self.edges {
            debug_assert!(e.u < self.verts.len() && e.v < self.verts.len());
        }
        if let Some(a) = &self.action {
            debug_assert_eq!(a.vmap.len(), self.verts.len());
            debug_assert_eq!(a.emap.len(), self.edges.len());
            for (i, e) in self.edges.iter().enumerate() {
                let (j, flip) = a.emap[i];
                let img = &self.edges[j];
                let (iu, iv) = if flip { (img.v, img.u) } else { (img.u, img.v) };
                debug_assert_eq!(a.vmap[e.u], iu, "action does not preserve incidence");
                debug_assert_eq!(a.vmap[e.v], iv, "action does not preserve incidence");
            }
        }
    }
}

fn inverse_perm(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

// ---------------------------------------------------------------------------
// Color refinement

type Color = u32;

/// Iterated refinement of vertex colors by incident edge data, neighbor
/// colors, and (when present) action image/preimage colors. Invariant under
/// relabeling by construction: every signature is built from colors and
/// labels only.
fn refine<V: CanonLabel, E: CanonLabel, F: CanonLabel>(g: &CGraph<V, E, F>, colors: &mut Vec<Color>) {
    let vinv = g.action.as_ref().map(|a| inverse_perm(&a.vmap));
    loop {
        let mut sigs: Vec<Sig<E, F>> = Vec::with_capacity(g.verts.len());
        for v in 0..g.verts.len() {
            let mut inc = Vec::new();
            for e in &g.edges {
                if e.u == v {
                    inc.push((e.lu.clone(), e.core.clone(), e.lv.clone(), colors[e.v]));
                }
                if e.v == v {
                    inc.push((e.lv.clone(), e.core.clone(), e.lu.clone(), colors[e.u]));
                }
            }
            inc.sort();
            let act = g.action.as_ref().map(|a| (colors[a.vmap[v]], colors[vinv.as_ref().unwrap()[v]]));
            sigs.push((colors[v], inc, act));
        }
        let mut order: Vec<usize> = (0..g.verts.len()).collect();
        order.sort_by(|&a, &b| sigs[a].cmp(&sigs[b]));
        let mut new_colors = vec![0 as Color; g.verts.len()];
        let mut c = 0;
        for i in 0..order.len() {
            if i > 0 && sigs[order[i]] != sigs[order[i - 1]] {
                c += 1;
            }
            new_colors[order[i]] = c;
        }
        if new_colors == *colors {
            return;
        }
        *colors = new_colors;
    }
}

fn initial_colors<V: CanonLabel, E: CanonLabel, F: CanonLabel>(g: &CGraph<V, E, F>) -> Vec<Color> {
    let mut order: Vec<usize> = (0..g.verts.len()).collect();
    order.sort_by(|&a, &b| g.verts[a].cmp(&g.verts[b]));
    let mut colors = vec![0 as Color; g.verts.len()];
    let mut c = 0;
    for i in 0..order.len() {
        if i > 0 && g.verts[order[i]] != g.verts[order[i - 1]] {
            c += 1;
        }
        colors[order[i]] = c;
    }
    colors
}

// ---------------------------------------------------------------------------
// Canonical encoding

/// Relabeling-invariant encoding: equal encodings exactly when the graphs
/// (with actions, if any) are isomorphic.
pub fn canonical_encoding<V: CanonLabel, E: CanonLabel, F: CanonLabel>(g: &CGraph<V, E, F>) -> String {
    g.check();
    if g.verts.is_empty() {
        return "V0".into();
    }
    let mut colors = initial_colors(g);
    refine(g, &mut colors);
    search_min(g, &colors).expect("canonical search always yields an encoding")
}

fn search_min<V: CanonLabel, E: CanonLabel, F: CanonLabel>(
    g: &CGraph<V, E, F>,
    colors: &[Color],
) -> Option<String> {
    // Find the smallest color with more than one member.
    let mut class: Option<(Color, Vec<usize>)> = None;
    let mut counts: BTreeMap<Color, Vec<usize>> = BTreeMap::new();
    for (v, &c) in colors.iter().enumerate() {
        counts.entry(c).or_default().push(v);
    }
    for (c, members) in &counts {
        if members.len() > 1 {
            class = Some((*c, members.clone()));
            break;
        }
    }
    let Some((c, members)) = class else {
        return Some(encode(g, colors));
    };

    let members = if g.action.is_none() { dedup_twins(g, members) } else { members };
    let mut best: Option<String> = None;
    for v in members {
        let mut child: Vec<Color> = colors.iter().map(|&x| if x > c { x + 1 } else { x }).collect();
        child[v] = c;
        for (w, &x) in colors.iter().enumerate() {
            if x == c && w != v {
                child[w] = c + 1;
            }
        }
        refine(g, &mut child);
        if let Some(cand) = search_min(g, &child) {
            best = match best {
                None => Some(cand),
                Some(b) => Some(b.min(cand)),
            };
        }
    }
    best
}

/// Keep one representative per group of mutually swappable vertices. Two
/// vertices are swappable when exchanging them (fixing everything else) is an
/// automorphism; branching on both can only repeat the same encoding.
fn dedup_twins<V: CanonLabel, E: CanonLabel, F: CanonLabel>(g: &CGraph<V, E, F>, members: Vec<usize>) -> Vec<usize> {
    let mut keep: Vec<usize> = Vec::new();
    'outer: for &v in &members {
        for &w in &keep {
            if are_twins(g, v, w) {
                continue 'outer;
            }
        }
        keep.push(v);
    }
    keep
}

fn are_twins<V: CanonLabel, E: CanonLabel, F: CanonLabel>(g: &CGraph<V, E, F>, a: usize, b: usize) -> bool {
    if g.verts[a] != g.verts[b] {
        return false;
    }
    // Edge data towards each third vertex, loops, and the a-b bundle.
    let bundle = |x: usize, y: usize| -> Vec<(F, E, F)> {
        let mut out = Vec::new();
        for e in &g.edges {
            if e.u == x && e.v == y {
                out.push((e.lu.clone(), e.core.clone(), e.lv.clone()));
            } else if e.v == x && e.u == y {
                out.push((e.lv.clone(), e.core.clone(), e.lu.clone()));
            }
        }
        out.sort();
        out
    };
    for x in 0..g.verts.len() {
        if x == a || x == b {
            continue;
        }
        if bundle(a, x) != bundle(b, x) {
            return false;
        }
    }
    if bundle(a, a) != bundle(b, b) {
        return false;
    }
    // The a-b bundle must be closed under flipping.
    let ab = bundle(a, b);
    let ba = bundle(b, a);
    ab == ba
}

fn encode<V: CanonLabel, E: CanonLabel, F: CanonLabel>(g: &CGraph<V, E, F>, colors: &[Color]) -> String {
    let n = g.verts.len();
    let pos: Vec<usize> = colors.iter().map(|&c| c as usize).collect();
    let vert_at = inverse_perm(&pos);

    let mut out = String::new();
    out.push('V');
    out.push_str(&n.to_string());
    out.push('|');
    for &v in &vert_at {
        g.verts[v].write_canon(&mut out);
        out.push('|');
    }

    // Normalized edge tuples; orientation puts the smaller position first,
    // and sorts the end labels on loops.
    #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
    struct Tup<E: Ord, F: Ord>(usize, usize, F, F, E);
    let mut tuples: Vec<(Tup<E, F>, usize, bool)> = Vec::new(); // (tuple, edge index, side0-is-first)
    let mut ambiguous: Vec<usize> = Vec::new(); // positions in `tuples` with free orientation
    for (i, e) in g.edges.iter().enumerate() {
        let (pu, pv) = (pos[e.u], pos[e.v]);
        let t = if pu < pv {
            (Tup(pu, pv, e.lu.clone(), e.lv.clone(), e.core.clone()), i, true)
        } else if pu > pv {
            (Tup(pv, pu, e.lv.clone(), e.lu.clone(), e.core.clone()), i, false)
        } else if e.lu <= e.lv {
            (Tup(pu, pu, e.lu.clone(), e.lv.clone(), e.core.clone()), i, true)
        } else {
            (Tup(pu, pu, e.lv.clone(), e.lu.clone(), e.core.clone()), i, false)
        };
        tuples.push(t);
    }
    tuples.sort();
    for (k, (t, e, _)) in tuples.iter().enumerate() {
        if t.0 == t.1 && g.edges[*e].lu == g.edges[*e].lv {
            ambiguous.push(k);
        }
    }

    out.push('E');
    out.push_str(&tuples.len().to_string());
    out.push('|');
    for (t, _, _) in &tuples {
        out.push_str(&t.0.to_string());
        out.push('-');
        out.push_str(&t.1.to_string());
        out.push(':');
        t.2.write_canon(&mut out);
        out.push(',');
        t.3.write_canon(&mut out);
        out.push(',');
        t.4.write_canon(&mut out);
        out.push('|');
    }

    let Some(action) = &g.action else {
        return out;
    };

    // The action block depends on the order within classes of identical edge
    // tuples, and on the side orientation of symmetric loops; minimize over
    // those residual choices.
    let mut tie_classes: Vec<Vec<usize>> = Vec::new();
    let mut k = 0;
    while k < tuples.len() {
        let mut j = k + 1;
        while j < tuples.len() && tuples[j].0 == tuples[k].0 {
            j += 1;
        }
        if j - k > 1 {
            tie_classes.push((k..j).collect());
        }
        k = j;
    }

    out.push('P');
    for &v in &vert_at {
        out.push_str(&pos[action.vmap[v]].to_string());
        out.push(',');
    }
    out.push('|');

    let base_eidx: Vec<usize> = {
        let mut m = vec![0; g.edges.len()];
        for (slot, (_, e, _)) in tuples.iter().enumerate() {
            m[*e] = slot;
        }
        m
    };
    let base_orient: Vec<bool> = {
        let mut m = vec![true; g.edges.len()];
        for (_, e, side0_first) in tuples.iter() {
            m[*e] = *side0_first;
        }
        m
    };

    // Residual-choice budget: tie classes and symmetric loops stay tiny for
    // the graphs this crate builds.
    assert!(ambiguous.len() <= 12, "too many symmetric loops for canonical encoding");
    assert!(tie_classes.iter().all(|c| c.len() <= 8), "parallel-edge tie class too large for canonical encoding");

    let mut best: Option<String> = None;
    let mut tie_perm: Vec<Vec<usize>> = tie_classes.to_vec();
    enumerate_action_blocks(
        g,
        action,
        &tuples,
        &base_eidx,
        &base_orient,
        &tie_classes,
        &mut tie_perm,
        0,
        &ambiguous,
        &mut best,
    );
    out.push_str(&best.expect("at least one action block"));
    out
}

#[allow(clippy::too_many_arguments)]
fn enumerate_action_blocks<V: CanonLabel, E: CanonLabel, F: CanonLabel>(
    g: &CGraph<V, E, F>,
    action: &CAction,
    tuples: &[(impl Ord, usize, bool)],
    base_eidx: &[usize],
    base_orient: &[bool],
    tie_classes: &[Vec<usize>],
    tie_perm: &mut Vec<Vec<usize>>,
    class_i: usize,
    ambiguous: &[usize],
    best: &mut Option<String>,
) {
    if class_i < tie_classes.len() {
        let mut perm = tie_classes[class_i].clone();
        permutations(&mut perm, 0, &mut |p| {
            tie_perm[class_i] = p.to_vec();
            enumerate_action_blocks(
                g, action, tuples, base_eidx, base_orient, tie_classes, tie_perm, class_i + 1, ambiguous, best,
            );
        });
        return;
    }

    // Slot assignment after tie permutations: slot -> slot.
    let mut slot_of: Vec<usize> = (0..tuples.len()).collect();
    for (ci, class) in tie_classes.iter().enumerate() {
        for (a, b) in class.iter().zip(tie_perm[ci].iter()) {
            slot_of[*a] = *b;
        }
    }
    let eidx: Vec<usize> = base_eidx.iter().map(|&s| slot_of[s]).collect();

    // Orientation choices for symmetric loops.
    let amb = ambiguous.len();
    for mask in 0u32..(1 << amb) {
        let mut orient = base_orient.to_vec();
        for (bit, &slot) in ambiguous.iter().enumerate() {
            if mask & (1 << bit) != 0 {
                let e = tuples[slot].1;
                orient[e] = !orient[e];
            }
        }
        let mut block = String::from("H|");
        // Canonical half-edge index of (edge, original side).
        let half = |e: usize, side: usize| -> usize {
            let canon_side = if orient[e] { side } else { 1 - side };
            2 * eidx[e] + canon_side
        };
        let mut table = vec![0usize; 2 * g.edges.len()];
        for e in 0..g.edges.len() {
            let (img, flip) = action.emap[e];
            for side in 0..2 {
                table[half(e, side)] = half(img, side ^ (flip as usize));
            }
        }
        for t in &table {
            block.push_str(&t.to_string());
            block.push(',');
        }
        if best.as_ref().is_none_or(|b| block < *b) {
            *best = Some(block);
        }
    }
}

fn permutations<T: Clone>(items: &mut Vec<T>, k: usize, f: &mut impl FnMut(&[T])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, f);
        items.swap(k, i);
    }
}

// ---------------------------------------------------------------------------
// Backtracking isomorphism

/// Decide isomorphism (equivariant isomorphism when actions are attached)
/// directly, independently of the canonical encoding.
pub fn isomorphic<V: CanonLabel, E: CanonLabel, F: CanonLabel>(
    g1: &CGraph<V, E, F>,
    g2: &CGraph<V, E, F>,
) -> bool {
    g1.check();
    g2.check();
    if g1.verts.len() != g2.verts.len() || g1.edges.len() != g2.edges.len() {
        return false;
    }
    if g1.action.is_some() != g2.action.is_some() {
        return false;
    }
    {
        let mut l1: Vec<&V> = g1.verts.iter().collect();
        let mut l2: Vec<&V> = g2.verts.iter().collect();
        l1.sort();
        l2.sort();
        if l1 != l2 {
            return false;
        }
    }

    // Joint refinement so colors mean the same thing in both graphs.
    let (c1, c2) = joint_refine(g1, g2);
    let (Some(c1), Some(c2)) = (c1, c2) else { return false };

    let mut state = IsoState {
        g1,
        g2,
        c1,
        c2,
        vmap: vec![usize::MAX; g1.verts.len()],
        used: vec![false; g2.verts.len()],
        vinv1: g1.action.as_ref().map(|a| inverse_perm(&a.vmap)),
        vinv2: g2.action.as_ref().map(|a| inverse_perm(&a.vmap)),
    };
    state.assign_vertices()
}

fn joint_refine<V: CanonLabel, E: CanonLabel, F: CanonLabel>(
    g1: &CGraph<V, E, F>,
    g2: &CGraph<V, E, F>,
) -> (Option<Vec<Color>>, Option<Vec<Color>>) {
    // Refine the disjoint union but forbid signatures from mixing; a color
    // histogram mismatch means non-isomorphic.
    let (mut colors1, mut colors2) = initial_colors_joint(g1, g2);
    loop {
        let s1 = signatures(g1, &colors1);
        let s2 = signatures(g2, &colors2);
        let mut all: Vec<&Sig<E, F>> = s1.iter().chain(s2.iter()).collect();
        all.sort();
        all.dedup();
        let rank = |s: &Sig<E, F>| all.binary_search_by(|x| (*x).cmp(s)).unwrap() as Color;
        let n1: Vec<Color> = s1.iter().map(&rank).collect();
        let n2: Vec<Color> = s2.iter().map(rank).collect();
        if n1 == colors1 && n2 == colors2 {
            break;
        }
        colors1 = n1;
        colors2 = n2;
    }
    let mut h1: BTreeMap<Color, usize> = BTreeMap::new();
    let mut h2: BTreeMap<Color, usize> = BTreeMap::new();
    for &c in &colors1 {
        *h1.entry(c).or_default() += 1;
    }
    for &c in &colors2 {
        *h2.entry(c).or_default() += 1;
    }
    if h1 != h2 {
        return (None, None);
    }
    (Some(colors1), Some(colors2))
}

type Sig<E, F> = (Color, Vec<(F, E, F, Color)>, Option<(Color, Color)>);

fn signatures<V: CanonLabel, E: CanonLabel, F: CanonLabel>(g: &CGraph<V, E, F>, colors: &[Color]) -> Vec<Sig<E, F>> {
    let vinv = g.action.as_ref().map(|a| inverse_perm(&a.vmap));
    (0..g.verts.len())
        .map(|v| {
            let mut inc = Vec::new();
            for e in &g.edges {
                if e.u == v {
                    inc.push((e.lu.clone(), e.core.clone(), e.lv.clone(), colors[e.v]));
                }
                if e.v == v {
                    inc.push((e.lv.clone(), e.core.clone(), e.lu.clone(), colors[e.u]));
                }
            }
            inc.sort();
            let act = g.action.as_ref().map(|a| (colors[a.vmap[v]], colors[vinv.as_ref().unwrap()[v]]));
            (colors[v], inc, act)
        })
        .collect()
}

fn initial_colors_joint<V: CanonLabel, E: CanonLabel, F: CanonLabel>(
    g1: &CGraph<V, E, F>,
    g2: &CGraph<V, E, F>,
) -> (Vec<Color>, Vec<Color>) {
    let mut all: Vec<&V> = g1.verts.iter().chain(g2.verts.iter()).collect();
    all.sort();
    all.dedup();
    let rank = |v: &V| all.binary_search_by(|x| (*x).cmp(v)).unwrap() as Color;
    (g1.verts.iter().map(&rank).collect(), g2.verts.iter().map(&rank).collect())
}

struct IsoState<'a, V: CanonLabel, E: CanonLabel, F: CanonLabel> {
    g1: &'a CGraph<V, E, F>,
    g2: &'a CGraph<V, E, F>,
    c1: Vec<Color>,
    c2: Vec<Color>,
    vmap: Vec<usize>,
    used: Vec<bool>,
    vinv1: Option<Vec<usize>>,
    vinv2: Option<Vec<usize>>,
}

impl<V: CanonLabel, E: CanonLabel, F: CanonLabel> IsoState<'_, V, E, F> {
    fn assign_vertices(&mut self) -> bool {
        let Some(v) = (0..self.vmap.len()).find(|&v| self.vmap[v] == usize::MAX) else {
            return self.assign_edges();
        };
        for w in 0..self.used.len() {
            if self.used[w] || self.c2[w] != self.c1[v] {
                continue;
            }
            let chosen = self.try_map(v, w);
            if let Some(chosen) = chosen {
                if self.assign_vertices() {
                    return true;
                }
                for &(a, b) in &chosen {
                    self.vmap[a] = usize::MAX;
                    self.used[b] = false;
                }
            }
        }
        false
    }

    /// Map v -> w, propagating along the actions when present. Returns the
    /// assignments made, or None on conflict (nothing kept in that case).
    fn try_map(&mut self, v: usize, w: usize) -> Option<Vec<(usize, usize)>> {
        let mut made = Vec::new();
        let mut queue = vec![(v, w)];
        while let Some((a, b)) = queue.pop() {
            if self.vmap[a] != usize::MAX {
                if self.vmap[a] == b {
                    continue;
                }
                self.rollback(&made);
                return None;
            }
            if self.used[b] || self.c1[a] != self.c2[b] || !self.compatible(a, b) {
                self.rollback(&made);
                return None;
            }
            self.vmap[a] = b;
            self.used[b] = true;
            made.push((a, b));
            if let (Some(a1), Some(a2)) = (&self.g1.action, &self.g2.action) {
                queue.push((a1.vmap[a], a2.vmap[b]));
                queue.push((self.vinv1.as_ref().unwrap()[a], self.vinv2.as_ref().unwrap()[b]));
            }
        }
        Some(made)
    }

    fn rollback(&mut self, made: &[(usize, usize)]) {
        for &(a, b) in made {
            self.vmap[a] = usize::MAX;
            self.used[b] = false;
        }
    }

    /// Edge bundles between `a` and every already-mapped vertex must match
    /// the bundles between `b` and the images.
    fn compatible(&self, a: usize, b: usize) -> bool {
        let bundle1 = |x: usize, y: usize| bundle(self.g1, x, y);
        let bundle2 = |x: usize, y: usize| bundle(self.g2, x, y);
        if bundle1(a, a) != bundle2(b, b) {
            return false;
        }
        for (x, &y) in self.vmap.iter().enumerate() {
            if y == usize::MAX || x == a {
                continue;
            }
            if bundle1(a, x) != bundle2(b, y) {
                return false;
            }
        }
        true
    }

    fn assign_edges(&mut self) -> bool {
        if self.g1.action.is_none() {
            // Vertex bundles were checked incrementally; verify globally.
            for x in 0..self.g1.verts.len() {
                for y in x..self.g1.verts.len() {
                    if bundle(self.g1, x, y) != bundle(self.g2, self.vmap[x], self.vmap[y]) {
                        return false;
                    }
                }
            }
            return true;
        }
        let a1 = self.g1.action.clone().unwrap();
        let a2 = self.g2.action.clone().unwrap();
        let h = HalfState {
            g1: self.g1,
            g2: self.g2,
            vmap: &self.vmap,
            sigma1: half_perm(&a1),
            sigma2: half_perm(&a2),
            map: vec![usize::MAX; 2 * self.g1.edges.len()],
            used: vec![false; 2 * self.g2.edges.len()],
        };
        let mut h = h;
        h.assign()
    }
}

fn bundle<V: CanonLabel, E: CanonLabel, F: CanonLabel>(
    g: &CGraph<V, E, F>,
    x: usize,
    y: usize,
) -> Vec<(F, E, F)> {
    let mut out = Vec::new();
    for e in &g.edges {
        if e.u == x && e.v == y {
            out.push((e.lu.clone(), e.core.clone(), e.lv.clone()));
        } else if e.u == y && e.v == x && x != y {
            out.push((e.lv.clone(), e.core.clone(), e.lu.clone()));
        }
    }
    if x == y {
        // Loops: normalize the two sides.
        out = out
            .into_iter()
            .map(|(a, c, b)| if a <= b { (a, c, b) } else { (b, c, a) })
            .collect();
    }
    out.sort();
    out
}

fn half_perm(a: &CAction) -> Vec<usize> {
    let mut p = vec![0; 2 * a.emap.len()];
    for (e, &(img, flip)) in a.emap.iter().enumerate() {
        for side in 0..2 {
            p[2 * e + side] = 2 * img + (side ^ (flip as usize));
        }
    }
    p
}

struct HalfState<'a, V: CanonLabel, E: CanonLabel, F: CanonLabel> {
    g1: &'a CGraph<V, E, F>,
    g2: &'a CGraph<V, E, F>,
    vmap: &'a [usize],
    sigma1: Vec<usize>,
    sigma2: Vec<usize>,
    map: Vec<usize>,
    used: Vec<bool>,
}

fn half_vertex<V, E, F>(g: &CGraph<V, E, F>, h: usize) -> usize {
    let e = &g.edges[h / 2];
    if h.is_multiple_of(2) {
        e.u
    } else {
        e.v
    }
}

fn half_label<V, E, F>(g: &CGraph<V, E, F>, h: usize) -> (&F, &E) {
    let e = &g.edges[h / 2];
    if h.is_multiple_of(2) {
        (&e.lu, &e.core)
    } else {
        (&e.lv, &e.core)
    }
}

impl<V: CanonLabel, E: CanonLabel, F: CanonLabel> HalfState<'_, V, E, F> {
    fn assign(&mut self) -> bool {
        let Some(h) = (0..self.map.len()).find(|&h| self.map[h] == usize::MAX) else {
            return true;
        };
        for h2 in 0..self.used.len() {
            if self.used[h2] || !self.candidate_ok(h, h2) {
                continue;
            }
            if let Some(made) = self.try_map(h, h2) {
                if self.assign() {
                    return true;
                }
                for &(a, b) in &made {
                    self.map[a] = usize::MAX;
                    self.used[b] = false;
                }
            }
        }
        false
    }

    fn candidate_ok(&self, h1: usize, h2: usize) -> bool {
        if self.vmap[half_vertex(self.g1, h1)] != half_vertex(self.g2, h2) {
            return false;
        }
        let (f1, e1) = half_label(self.g1, h1);
        let (f2, e2) = half_label(self.g2, h2);
        if f1 != f2 || e1 != e2 {
            return false;
        }
        // Partner side must also line up.
        let p1 = h1 ^ 1;
        let p2 = h2 ^ 1;
        if self.vmap[half_vertex(self.g1, p1)] != half_vertex(self.g2, p2) {
            return false;
        }
        let (pf1, _) = half_label(self.g1, p1);
        let (pf2, _) = half_label(self.g2, p2);
        pf1 == pf2
    }

    /// Map h -> h2 and close under partner-exchange and the two actions.
    fn try_map(&mut self, h: usize, h2: usize) -> Option<Vec<(usize, usize)>> {
        let mut made = Vec::new();
        let mut queue = vec![(h, h2)];
        while let Some((a, b)) = queue.pop() {
            if self.map[a] != usize::MAX {
                if self.map[a] == b {
                    continue;
                }
                for &(x, y) in &made {
                    self.map[x] = usize::MAX;
                    self.used[y] = false;
                }
                return None;
            }
            if self.used[b] || !self.candidate_ok(a, b) {
                for &(x, y) in &made {
                    self.map[x] = usize::MAX;
                    self.used[y] = false;
                }
                return None;
            }
            self.map[a] = b;
            self.used[b] = true;
            made.push((a, b));
            queue.push((a ^ 1, b ^ 1));
            queue.push((self.sigma1[a], self.sigma2[b]));
        }
        Some(made)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    type G = CGraph<u64, u64, u64>;

    fn cycle(n: usize, shift: usize) -> G {
        // n-cycle with edges i -> i+1, action = rotation by `shift`.
        let verts = vec![0u64; n];
        let edges = (0..n)
            .map(|i| CEdge { u: i, v: (i + 1) % n, lu: 0, lv: 0, core: 0 })
            .collect();
        let vmap: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        // Edge i = (i, i+1) maps to (i+shift, i+shift+1) = edge i+shift, no flip.
        let emap: Vec<(usize, bool)> = (0..n).map(|i| ((i + shift) % n, false)).collect();
        CGraph { verts, edges, action: Some(CAction { vmap, emap }) }
    }

    fn relabel_graph(g: &G, seed: u64) -> G {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = g.verts.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut eperm: Vec<usize> = (0..g.edges.len()).collect();
        eperm.shuffle(&mut rng);
        let mut inv_e = vec![0; eperm.len()];
        for (i, &j) in eperm.iter().enumerate() {
            inv_e[j] = i;
        }
        let mut edges: Vec<CEdge<u64, u64>> = vec![];
        for &old in inv_e.iter() {
            let e = &g.edges[old];
            // Also randomly flip stored orientation.
            if rng.gen_bool(0.5) {
                edges.push(CEdge { u: perm[e.v], v: perm[e.u], lu: e.lv, lv: e.lu, core: e.core });
            } else {
                edges.push(CEdge { u: perm[e.u], v: perm[e.v], lu: e.lu, lv: e.lv, core: e.core });
            }
        }
        // Rebuild action under the relabeling.
        let action = g.action.as_ref().map(|a| {
            let mut vmap = vec![0; n];
            for v in 0..n {
                vmap[perm[v]] = perm[a.vmap[v]];
            }
            let mut emap = vec![(0, false); edges.len()];
            for e in 0..g.edges.len() {
                let (img, flip) = a.emap[e];
                // Position of e and img in the new edge list.
                let ne = eperm[e];
                let nimg = eperm[img];
                // Compare stored orientations to fix the flip bit.
                let flipped_store_e = edges[ne].u != perm[g.edges[e].u]
                    || (g.edges[e].u == g.edges[e].v && edges[ne].lu != g.edges[e].lu);
                let flipped_store_img = edges[nimg].u != perm[g.edges[img].u]
                    || (g.edges[img].u == g.edges[img].v && edges[nimg].lu != g.edges[img].lu);
                emap[ne] = (nimg, flip ^ flipped_store_e ^ flipped_store_img);
            }
            CAction { vmap, emap }
        });
        let mut verts = vec![0u64; n];
        for v in 0..n {
            verts[perm[v]] = g.verts[v];
        }
        CGraph { verts, edges, action }
    }

    #[test]
    fn cycle_rotations() {
        let r1 = cycle(5, 1);
        let r2 = cycle(5, 2);
        let r4 = cycle(5, 4);
        assert!(isomorphic(&r1, &r4), "rotation and its inverse are conjugate by a reflection");
        assert!(!isomorphic(&r1, &r2), "rotation by 1 and 2 are not conjugate in the dihedral group");
        assert_eq!(canonical_encoding(&r1), canonical_encoding(&r4));
        assert_ne!(canonical_encoding(&r1), canonical_encoding(&r2));
    }

    #[test]
    fn encoding_invariant_under_relabeling() {
        for shift in [0usize, 1, 2] {
            let g = cycle(6, shift);
            let base = canonical_encoding(&g);
            for seed in 0..30 {
                let h = relabel_graph(&g, seed);
                assert_eq!(canonical_encoding(&h), base, "shift {shift} seed {seed}");
                assert!(isomorphic(&g, &h));
            }
        }
    }

    #[test]
    fn star_twins() {
        // A star with 6 identical leaves exercises the twin pruning.
        let mut verts = vec![10u64];
        verts.extend(std::iter::repeat_n(1, 6));
        let edges = (1..=6).map(|i| CEdge { u: 0, v: i, lu: 0, lv: 0, core: 0 }).collect();
        let g: G = CGraph { verts, edges, action: None };
        let enc = canonical_encoding(&g);
        for seed in 0..10 {
            assert_eq!(canonical_encoding(&relabel_graph(&g, seed)), enc);
        }
    }

    #[test]
    fn loops_and_parallels() {
        let a: G = CGraph {
            verts: vec![1, 1],
            edges: vec![
                CEdge { u: 0, v: 1, lu: 0, lv: 0, core: 7 },
                CEdge { u: 0, v: 1, lu: 0, lv: 0, core: 7 },
                CEdge { u: 0, v: 0, lu: 3, lv: 4, core: 9 },
            ],
            action: None,
        };
        let b: G = CGraph {
            verts: vec![1, 1],
            edges: vec![
                CEdge { u: 1, v: 1, lu: 4, lv: 3, core: 9 },
                CEdge { u: 1, v: 0, lu: 0, lv: 0, core: 7 },
                CEdge { u: 0, v: 1, lu: 0, lv: 0, core: 7 },
            ],
            action: None,
        };
        assert!(isomorphic(&a, &b));
        assert_eq!(canonical_encoding(&a), canonical_encoding(&b));

        let c: G = CGraph {
            verts: vec![1, 1],
            edges: vec![
                CEdge { u: 0, v: 1, lu: 0, lv: 0, core: 7 },
                CEdge { u: 0, v: 1, lu: 0, lv: 0, core: 7 },
                CEdge { u: 0, v: 0, lu: 3, lv: 3, core: 9 },
            ],
            action: None,
        };
        assert!(!isomorphic(&a, &c));
        assert_ne!(canonical_encoding(&a), canonical_encoding(&c));
    }

    #[test]
    fn action_flip_on_loop_is_detected() {
        let base = |flip: bool| -> G {
            CGraph {
                verts: vec![5],
                edges: vec![CEdge { u: 0, v: 0, lu: 2, lv: 2, core: 1 }],
                action: Some(CAction { vmap: vec![0], emap: vec![(0, flip)] }),
            }
        };
        let fixed = base(false);
        let swapped = base(true);
        assert!(!isomorphic(&fixed, &swapped));
        assert_ne!(canonical_encoding(&fixed), canonical_encoding(&swapped));
        assert!(isomorphic(&swapped, &relabel_graph(&swapped, 3)));
    }

    #[test]
    fn action_on_parallel_edges() {
        // Two identical parallel edges; one action swaps them, the other
        // fixes both. Any conjugating automorphism would have to permute the
        // pair, which cannot turn a transposition into the identity.
        let base = |emap: Vec<(usize, bool)>| -> G {
            CGraph {
                verts: vec![3, 4],
                edges: vec![
                    CEdge { u: 0, v: 1, lu: 0, lv: 0, core: 0 },
                    CEdge { u: 0, v: 1, lu: 0, lv: 0, core: 0 },
                ],
                action: Some(CAction { vmap: vec![0, 1], emap }),
            }
        };
        let swapping = base(vec![(1, false), (0, false)]);
        let fixing = base(vec![(0, false), (1, false)]);
        assert!(!isomorphic(&swapping, &fixing));
        assert_ne!(canonical_encoding(&swapping), canonical_encoding(&fixing));
        for seed in 0..10 {
            let r = relabel_graph(&swapping, seed);
            assert!(isomorphic(&swapping, &r));
            assert_eq!(canonical_encoding(&swapping), canonical_encoding(&r));
        }
    }

    #[test]
    fn vertex_labels_matter() {
        let a: G = CGraph { verts: vec![1, 2], edges: vec![CEdge { u: 0, v: 1, lu: 0, lv: 0, core: 0 }], action: None };
        let b: G = CGraph { verts: vec![1, 1], edges: vec![CEdge { u: 0, v: 1, lu: 0, lv: 0, core: 0 }], action: None };
        assert!(!isomorphic(&a, &b));
        assert_ne!(canonical_encoding(&a), canonical_encoding(&b));
    }

    #[test]
    fn end_labels_orient_edges() {
        // A path with an asymmetric end label on one edge: flipping it yields
        // a different graph unless the whole graph is symmetric.
        let a: G = CGraph {
            verts: vec![1, 1, 2],
            edges: vec![
                CEdge { u: 0, v: 1, lu: 9, lv: 0, core: 0 },
                CEdge { u: 1, v: 2, lu: 0, lv: 0, core: 0 },
            ],
            action: None,
        };
        let b: G = CGraph {
            verts: vec![1, 1, 2],
            edges: vec![
                CEdge { u: 0, v: 1, lu: 0, lv: 9, core: 0 },
                CEdge { u: 1, v: 2, lu: 0, lv: 0, core: 0 },
            ],
            action: None,
        };
        assert!(!isomorphic(&a, &b));
        assert_ne!(canonical_encoding(&a), canonical_encoding(&b));
    }

    #[test]
    fn iso_agrees_with_encoding_on_random_graphs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let n = rng.gen_range(1..7usize);
            let m = rng.gen_range(0..10usize);
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| -> G {
                CGraph {
                    verts: (0..n).map(|_| rng.gen_range(0..3u64)).collect(),
                    edges: (0..m)
                        .map(|_| CEdge {
                            u: rng.gen_range(0..n),
                            v: rng.gen_range(0..n),
                            lu: rng.gen_range(0..2u64),
                            lv: rng.gen_range(0..2u64),
                            core: rng.gen_range(0..2u64),
                        })
                        .collect(),
                    action: None,
                }
            };
            let a = mk(&mut rng);
            let b = mk(&mut rng);
            assert_eq!(isomorphic(&a, &b), canonical_encoding(&a) == canonical_encoding(&b));
            let ar = relabel_graph(&a, rng.gen());
            assert!(isomorphic(&a, &ar));
            assert_eq!(canonical_encoding(&a), canonical_encoding(&ar));
        }
    }
}
