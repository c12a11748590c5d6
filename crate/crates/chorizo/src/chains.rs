//! Integer chains attached to cone points and annuli.
//!
//! Three kinds of sequences drive the multiplicity layout of the generalized
//! quotient: the strictly decreasing chain of a cone point, the unique chain
//! joining the two boundary valencies of a non-amphidrome annulus, and the
//! non-increasing chain of an amphidrome annulus. Entries are positive
//! integers; screw-number budgets are exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::model::Valency;

/// Search limits for the non-amphidrome chain search and amphidrome padding.
#[derive(Debug, Clone)]
pub struct ChainBounds {
    pub max_len: usize,
    pub max_entry: u64,
}

impl Default for ChainBounds {
    fn default() -> Self {
        ChainBounds { max_len: 64, max_entry: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    Cone,
    NonAmphidrome,
    Amphidrome,
}

/// A chain `n_0, ..., n_l` together with the multiplier `m`; the chorizo
/// pieces built from the chain carry multiplicities `m * n_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainSeq {
    pub entries: Vec<u64>,
    pub multiplier: u64,
    pub kind: ChainKind,
}

impl ChainSeq {
    /// Number of middle indices: `l` where the chain is `n_0..n_l`.
    pub fn l(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn with_multiplier(mut self, m: u64) -> Self {
        self.multiplier = m;
        self
    }

    /// Multiplicities `m * n_i` for the whole chain.
    pub fn multiplicities(&self) -> Vec<u64> {
        self.entries.iter().map(|n| n * self.multiplier).collect()
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("valency ({lambda},{sigma}) has no chain: {reason}")]
    InvalidValency { lambda: u64, sigma: u64, reason: String },
    #[error("screw number {screw} is incompatible with the boundary valencies")]
    IncompatibleScrew { screw: String },
    #[error("no chain found within bounds (max length {max_len}, max entry {max_entry})")]
    SearchBoundExceeded { max_len: usize, max_entry: u64 },
}

/// Requirements a chain must meet, used by [`chain_check`].
#[derive(Debug, Clone)]
pub enum ChainRequirement {
    Cone(Valency),
    NonAmphidrome(Valency, Valency, BigRational),
    Amphidrome(Valency, BigRational),
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Least positive residue of `-a` modulo `b`.
fn neg_residue(a: u64, b: u64) -> u64 {
    let r = a % b;
    if r == 0 {
        b
    } else {
        b - r
    }
}

/// The strictly decreasing chain of a cone point with rotation data `(λ, σ)`:
/// `n_0 = λ`, `n_1 = λ - σ`, then the least-positive-residue recurrence down
/// to `n_l = 1`.
pub fn cone_chain(v: &Valency) -> Result<ChainSeq, ChainError> {
    if v.lambda < 2 {
        return Err(ChainError::InvalidValency {
            lambda: v.lambda,
            sigma: v.sigma,
            reason: "a cone point needs rotation order at least 2".into(),
        });
    }
    let mut entries = vec![v.lambda, v.lambda - v.sigma];
    while *entries.last().unwrap() != 1 {
        let a = entries[entries.len() - 2];
        let b = entries[entries.len() - 1];
        entries.push(neg_residue(a, b));
    }
    Ok(ChainSeq { entries, multiplier: 1, kind: ChainKind::Cone })
}

/// Forced head of the amphidrome chain for `(λ, σ)`: `[λ, σ, ...]` descending
/// to 1 by least positive residues, or `[1]` when `λ = 1`. Returns the head
/// and its partial sum; the head does not depend on the screw number.
pub fn amph_head(v: &Valency) -> (Vec<u64>, BigRational) {
    if v.lambda == 1 {
        return (vec![1], BigRational::zero());
    }
    let mut entries = vec![v.lambda, v.sigma];
    while *entries.last().unwrap() != 1 {
        let a = entries[entries.len() - 2];
        let b = entries[entries.len() - 1];
        entries.push(neg_residue(a, b));
    }
    let mut sum = BigRational::zero();
    for w in entries.windows(2) {
        sum += ratio(1, w[0] * w[1]);
    }
    (entries, sum)
}

/// Chain of an amphidrome annulus: the forced head padded with trailing 1's
/// until the sum reaches `|s|/2`. Fails when `|s|/2` minus the head sum is
/// not a nonnegative integer.
pub fn amph_chain(v: &Valency, s_abs: &BigRational, bounds: &ChainBounds) -> Result<ChainSeq, ChainError> {
    let (mut entries, head_sum) = amph_head(v);
    let half = s_abs / BigRational::from(BigInt::from(2));
    let pad = &half - &head_sum;
    if !pad.is_integer() || pad.is_negative() {
        return Err(ChainError::IncompatibleScrew { screw: s_abs.to_string() });
    }
    let pad: BigInt = pad.to_integer();
    let pad: u64 = u64::try_from(&pad).map_err(|_| ChainError::SearchBoundExceeded {
        max_len: bounds.max_len,
        max_entry: bounds.max_entry,
    })?;
    if entries.len() as u64 + pad > bounds.max_len as u64 + 1 {
        return Err(ChainError::SearchBoundExceeded {
            max_len: bounds.max_len,
            max_entry: bounds.max_entry,
        });
    }
    entries.extend(std::iter::repeat_n(1, pad as usize));
    if entries.len() < 2 {
        // λ = 1 with |s|/2 = 0 cannot happen for a genuine (negative) screw,
        // but guard anyway: a chain needs l ≥ 1.
        return Err(ChainError::IncompatibleScrew { screw: s_abs.to_string() });
    }
    Ok(ChainSeq { entries, multiplier: 1, kind: ChainKind::Amphidrome })
}

/// Exact value of `Σ 1/(n_i · n_{i+1})` over consecutive pairs.
pub fn chain_sum(c: &ChainSeq) -> BigRational {
    let mut sum = BigRational::zero();
    for w in c.entries.windows(2) {
        sum += ratio(1, w[0] * w[1]);
    }
    sum
}

fn sum_of(entries: &[u64]) -> BigRational {
    let mut sum = BigRational::zero();
    for w in entries.windows(2) {
        sum += ratio(1, w[0] * w[1]);
    }
    sum
}

/// The unique chain joining two boundary valencies of a non-amphidrome
/// annulus with twist budget `|s|`.
///
/// Depth-first search: `n_1` runs over `σ1 + k·λ1`, each later entry over the
/// residue class of `-n_{i-1} (mod n_i)`, subject to the convexity condition
/// `(n_{i-1}+n_{i+1})/n_i ≥ 2`, the remaining budget, and the configured
/// bounds. A candidate above both its predecessor and `λ2` is cut: by the
/// convexity condition an increase can never be followed by a decrease, so
/// such a branch can never terminate at `λ2`.
pub fn nonamph_chain(
    v1: &Valency,
    v2: &Valency,
    s_abs: &BigRational,
    bounds: &ChainBounds,
) -> Result<ChainSeq, ChainError> {
    if !s_abs.is_positive() {
        return Err(ChainError::IncompatibleScrew { screw: s_abs.to_string() });
    }
    let frac = ratio(v1.delta(), v1.lambda) + ratio(v2.delta(), v2.lambda);
    if !(s_abs - &frac).is_integer() {
        return Err(ChainError::IncompatibleScrew { screw: s_abs.to_string() });
    }

    let mut entries = vec![v1.lambda];
    let found = extend(&mut entries, &BigRational::zero(), v1, v2, s_abs, bounds);
    match found {
        Some(entries) => Ok(ChainSeq { entries, multiplier: 1, kind: ChainKind::NonAmphidrome }),
        None => Err(ChainError::SearchBoundExceeded {
            max_len: bounds.max_len,
            max_entry: bounds.max_entry,
        }),
    }
}

fn extend(
    entries: &mut Vec<u64>,
    sum: &BigRational,
    v1: &Valency,
    v2: &Valency,
    target: &BigRational,
    bounds: &ChainBounds,
) -> Option<Vec<u64>> {
    if entries.len() > bounds.max_len {
        return None;
    }
    let last = *entries.last().unwrap();
    let remaining = target - sum;

    // Candidates for the next entry: the residue class, starting at the
    // smallest admissible value.
    let (step, mut cand) = if entries.len() == 1 {
        // n_1 ≡ σ1 (mod λ1); any positive integer when λ1 = 1.
        let start = if v1.lambda == 1 { 1 } else { v1.sigma };
        (v1.lambda.max(1), start)
    } else {
        let prev = entries[entries.len() - 2];
        let r = (prev % last + last) % last; // prev mod last
        let r = (last - r) % last; // -prev mod last, in [0, last)
        let lower = (2 * last).saturating_sub(prev).max(1);
        let mut c = if r == 0 { last } else { r };
        while c < lower {
            c += last;
        }
        (last, c)
    };

    loop {
        if cand > bounds.max_entry {
            return None;
        }
        // Once the chain stops decreasing it can never decrease again, so any
        // candidate at or above both `last` and `λ2` is hopeless.
        if cand >= last && cand > v2.lambda {
            return None;
        }
        let term = ratio(1, last * cand);
        if term <= remaining {
            entries.push(cand);
            let new_sum = sum + &term;
            if cand == v2.lambda && new_sum == *target && entries.len() >= 2 {
                let prev = entries[entries.len() - 2];
                if prev % v2.lambda == v2.sigma % v2.lambda {
                    return Some(entries.clone());
                }
            }
            if new_sum < *target {
                if let Some(sol) = extend(entries, &new_sum, v1, v2, target, bounds) {
                    return Some(sol);
                }
            }
            entries.pop();
        }
        cand += step;
    }
}

/// Re-verify every condition for the chain's kind, independently of the
/// constructors. Used as the oracle in the constructors' property tests.
pub fn chain_check(c: &ChainSeq, req: &ChainRequirement) -> bool {
    let e = &c.entries;
    if e.len() < 2 || e.contains(&0) {
        return false;
    }
    let recurrence = |e: &[u64]| {
        e.windows(3).all(|w| (w[0] + w[2]) % w[1] == 0)
    };
    match req {
        ChainRequirement::Cone(v) => {
            v.lambda >= 2
                && e[0] == v.lambda
                && e[1] == v.lambda - v.sigma
                && *e.last().unwrap() == 1
                && e.windows(2).all(|w| w[0] > w[1])
                && e.windows(2).all(|w| gcd(w[0], w[1]) == 1)
                && recurrence(e)
        }
        ChainRequirement::NonAmphidrome(v1, v2, s_abs) => {
            let l = e.len() - 1;
            e[0] == v1.lambda
                && e[l] == v2.lambda
                && e[1] % v1.lambda == v1.sigma % v1.lambda
                && e[l - 1] % v2.lambda == v2.sigma % v2.lambda
                && recurrence(e)
                && e.windows(3).all(|w| w[0] + w[2] >= 2 * w[1])
                && sum_of(e) == *s_abs
        }
        ChainRequirement::Amphidrome(v, s_abs) => {
            let half = s_abs / BigRational::from(BigInt::from(2));
            let head_ok = if v.lambda == 1 {
                e.iter().all(|&n| n == 1)
            } else {
                e[0] == v.lambda && e[1] == v.sigma
            };
            head_ok
                && *e.last().unwrap() == 1
                && e.windows(2).all(|w| w[0] >= w[1])
                && recurrence(e)
                && sum_of(e) == half
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}
