//! Finite sets of naturals and restricted sumsets `F^{⊕i}`.
//!
//! `F^{⊕i}` is the set of sums of `i` distinct elements of `F`; `F^{⊕0}` is
//! `{0}` (even for empty `F`) and `F^{⊕i}` is empty once `i > |F|`. The main
//! computation is a dense bit-vector dynamic program over (element, count);
//! a subset-enumeration oracle is kept alongside for cross-checking.

use crate::bits::BitRow;
use crate::rat::binomial;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Sorted set of distinct integers ≥ 0.
///
/// Serialized as a plain sorted integer array.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct FiniteNatSet {
    elements: Vec<u64>,
}

impl TryFrom<Vec<u64>> for FiniteNatSet {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        FiniteNatSet::new(v)
    }
}

impl From<FiniteNatSet> for Vec<u64> {
    fn from(s: FiniteNatSet) -> Vec<u64> {
        s.elements
    }
}

impl FiniteNatSet {
    /// Elements must be strictly increasing.
    pub fn new(elements: Vec<u64>) -> Result<Self> {
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(
                "elements must be strictly increasing without duplicates".into(),
            ));
        }
        Ok(FiniteNatSet { elements })
    }

    /// Sorts and deduplicates.
    pub fn from_unsorted(mut elements: Vec<u64>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        FiniteNatSet { elements }
    }

    pub fn empty() -> Self {
        FiniteNatSet { elements: vec![] }
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max(&self) -> Option<u64> {
        self.elements.last().copied()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    /// Sum of the `i` largest elements (upper bound for `F^{⊕i}`).
    fn top_sum(&self, i: usize) -> u64 {
        self.elements.iter().rev().take(i).sum()
    }
}

/// Capacity limits for sumset computations.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Limits {
    /// Largest admissible sum in a DP table (bits allocated per level).
    pub max_sum: u64,
    /// Largest admissible result-set cardinality.
    pub max_size: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_sum: 1 << 24,
            max_size: 1_000_000,
        }
    }
}

/// All levels `F^{⊕0}, …, F^{⊕i_max}` in one DP pass.
///
/// Level `c` is a bit row over sums `0..=top_sum(c)`; row `c` gets
/// `row[c] |= row[c-1] << f` for each element `f` taken in increasing order,
/// with `c` swept downwards so each element is used at most once.
fn oplus_levels(f: &FiniteNatSet, i_max: usize, limits: &Limits) -> Result<Vec<BitRow>> {
    let span = f.top_sum(i_max.min(f.len())) as usize + 1;
    if span as u64 - 1 > limits.max_sum {
        return Err(Error::Capacity(format!(
            "sumset range {} exceeds limit {}",
            span - 1,
            limits.max_sum
        )));
    }
    let mut rows: Vec<BitRow> = (0..=i_max).map(|_| BitRow::zeros(span)).collect();
    rows[0].set(0);
    for (seen, &elt) in f.elements.iter().enumerate() {
        let top = i_max.min(seen + 1);
        for c in (1..=top).rev() {
            let (lo, hi) = rows.split_at_mut(c);
            hi[0].or_shifted(&lo[c - 1], elt as usize);
        }
    }
    Ok(rows)
}

fn row_to_set(row: &BitRow, limits: &Limits) -> Result<FiniteNatSet> {
    let count = row.count_ones();
    if count > limits.max_size {
        return Err(Error::Capacity(format!(
            "result has {count} elements, exceeding limit {}",
            limits.max_size
        )));
    }
    Ok(FiniteNatSet {
        elements: row.iter_ones().map(|x| x as u64).collect(),
    })
}

/// `F^{⊕i}` with explicit limits.
pub fn oplus_with(f: &FiniteNatSet, i: usize, limits: &Limits) -> Result<FiniteNatSet> {
    if i > f.len() {
        return Ok(FiniteNatSet::empty());
    }
    let rows = oplus_levels(f, i, limits)?;
    row_to_set(&rows[i], limits)
}

/// `F^{⊕i}` under default limits.
pub fn oplus(f: &FiniteNatSet, i: usize) -> Result<FiniteNatSet> {
    oplus_with(f, i, &Limits::default())
}

/// Subset-enumeration oracle for `F^{⊕i}`; restricted to |F| ≤ 20.
pub fn oplus_brute(f: &FiniteNatSet, i: usize) -> Result<FiniteNatSet> {
    if f.len() > 20 {
        return Err(Error::Capacity(format!(
            "oplus_brute limited to |F| <= 20, got {}",
            f.len()
        )));
    }
    if i > f.len() {
        return Ok(FiniteNatSet::empty());
    }
    let mut sums = Vec::new();
    for mask in 0u32..1 << f.len() {
        if mask.count_ones() as usize == i {
            let s: u64 = f
                .elements
                .iter()
                .enumerate()
                .filter(|(j, _)| mask >> j & 1 == 1)
                .map(|(_, &x)| x)
                .sum();
            sums.push(s);
        }
    }
    Ok(FiniteNatSet::from_unsorted(sums))
}

/// Union of `B^{⊕i}` for `kmin ≤ i ≤ kmax`.
pub fn range_sums(b: &FiniteNatSet, kmin: usize, kmax: usize, limits: &Limits) -> Result<FiniteNatSet> {
    if kmin > kmax {
        return Err(Error::Invalid(format!("kmin {kmin} > kmax {kmax}")));
    }
    let hi = kmax.min(b.len());
    if kmin > b.len() {
        return Ok(FiniteNatSet::empty());
    }
    let rows = oplus_levels(b, hi, limits)?;
    let mut acc = BitRow::zeros(rows.last().map_or(1, |r| r.len()));
    for row in &rows[kmin..=hi] {
        acc.or_shifted(row, 0);
    }
    row_to_set(&acc, limits)
}

/// `{x_1 + ⋯ + x_k : x_j ∈ B_j}` truncated at `window`.
pub fn kfold_sum(family: &[FiniteNatSet], window: u64) -> Result<FiniteNatSet> {
    if family.is_empty() {
        return Err(Error::Invalid("kfold_sum needs a nonempty family".into()));
    }
    let span = window as usize + 1;
    if window > Limits::default().max_sum {
        return Err(Error::Capacity(format!("window {window} exceeds limit")));
    }
    let mut acc = BitRow::zeros(span);
    acc.set(0);
    for set in family {
        let mut next = BitRow::zeros(span);
        for &x in set.elements() {
            if (x as usize) < span {
                next.or_shifted(&acc, x as usize);
            }
        }
        acc = next;
    }
    row_to_set(&acc, &Limits::default())
}

/// Greedy extraction of a cofinite-nested chain from a nested chain.
///
/// Given prefixes of nested sets `B_1 ⊃ B_2 ⊃ …`, picks
/// `b_i = min(B_i ∖ {b_1,…,b_{i-1}})` and returns the `b_i` together with the
/// (finite truncations of the) tail sets `C_i = {b_j : j ≥ i}`, which satisfy
/// `C_i ∖ C_{i+1} = {b_i}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CofiniteChain {
    pub picks: Vec<u64>,
    pub tails: Vec<FiniteNatSet>,
}

pub fn nested_to_cofinite(chain: &[FiniteNatSet], depth: usize) -> Result<CofiniteChain> {
    for (idx, pair) in chain.windows(2).enumerate() {
        if !pair[1].elements().iter().all(|&x| pair[0].contains(x)) {
            return Err(Error::Invalid(format!(
                "chain is not nested: set {} is not contained in set {}",
                idx + 2,
                idx + 1
            )));
        }
    }
    if depth > chain.len() {
        return Err(Error::Invalid(format!(
            "depth {depth} exceeds chain length {}",
            chain.len()
        )));
    }
    let mut picks: Vec<u64> = Vec::with_capacity(depth);
    for set in chain.iter().take(depth) {
        let next = set
            .elements()
            .iter()
            .copied()
            .find(|x| !picks.contains(x))
            .ok_or_else(|| {
                Error::Invalid("chain prefix exhausted before requested depth".into())
            })?;
        picks.push(next);
    }
    let tails = (0..picks.len())
        .map(|i| FiniteNatSet::from_unsorted(picks[i..].to_vec()))
        .collect();
    Ok(CofiniteChain { picks, tails })
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// First `k` primes.
pub fn primes(k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    let mut n = 2;
    while out.len() < k {
        if is_prime(n) {
            out.push(n);
        }
        n += 1;
    }
    out
}

/// The prime-power family extracted from an enumerated set `B` and a shift
/// sequence `t`: `B_j = {b_{p_j^n} + t_j − t_{j−1} : p_j^n ≤ |B|, n ≤ cap}`
/// with `t_0 = 0`, so that k-fold sums across the family collapse to k-element
/// sums of `B` shifted by `t_k`.
pub fn corollary_c_family(
    b: &FiniteNatSet,
    t: &[u64],
    k: usize,
    cap: u32,
) -> Result<Vec<FiniteNatSet>> {
    if k == 0 || t.len() < k {
        return Err(Error::Invalid(format!(
            "need k >= 1 shifts, got k={k} with {} shifts",
            t.len()
        )));
    }
    if t.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Invalid("shift sequence must be nondecreasing".into()));
    }
    let ps = primes(k);
    let mut family = Vec::with_capacity(k);
    for (j, &p) in ps.iter().enumerate() {
        let t_prev = if j == 0 { 0 } else { t[j - 1] };
        let delta = t[j] - t_prev;
        let mut members = Vec::new();
        let mut power = p;
        for _ in 0..cap {
            if power as usize > b.len() {
                break;
            }
            // b is 1-indexed in the enumeration.
            members.push(b.elements()[power as usize - 1] + delta);
            power = match power.checked_mul(p) {
                Some(v) => v,
                None => break,
            };
        }
        if members.is_empty() {
            return Err(Error::Invalid(format!(
                "B (|B|={}) is too short to index the powers of prime {p}",
                b.len()
            )));
        }
        family.push(FiniteNatSet::from_unsorted(members));
    }
    Ok(family)
}

/// Find `i` distinct elements of `F` summing to `target`, if any.
///
/// Depth-first with prefix-sum pruning; used to attach an explicit witness
/// subset to each violating sum reported by the certificate checkers.
pub fn witness_subset(f: &FiniteNatSet, i: usize, target: u64) -> Option<Vec<u64>> {
    let els = f.elements();
    if i > els.len() {
        return None;
    }
    let mut prefix = vec![0u64; els.len() + 1];
    for (j, &x) in els.iter().enumerate() {
        prefix[j + 1] = prefix[j] + x;
    }
    // Smallest / largest achievable sum of `take` elements from els[from..].
    let min_from = |from: usize, take: usize| prefix[from + take] - prefix[from];
    let max_from =
        |_from: usize, take: usize| prefix[els.len()] - prefix[els.len() - take];
    fn go(
        els: &[u64],
        from: usize,
        take: usize,
        target: u64,
        acc: &mut Vec<u64>,
        min_from: &dyn Fn(usize, usize) -> u64,
        max_from: &dyn Fn(usize, usize) -> u64,
    ) -> bool {
        if take == 0 {
            return target == 0;
        }
        if els.len() - from < take {
            return false;
        }
        if min_from(from, take) > target || max_from(from, take) < target {
            return false;
        }
        for j in from..=els.len() - take {
            let x = els[j];
            if x > target {
                break;
            }
            acc.push(x);
            if go(els, j + 1, take - 1, target - x, acc, min_from, max_from) {
                return true;
            }
            acc.pop();
        }
        false
    }
    let mut acc = Vec::with_capacity(i);
    if go(els, 0, i, target, &mut acc, &min_from, &max_from) {
        Some(acc)
    } else {
        None
    }
}

/// Upper bound `|F^{⊕i}| ≤ C(|F|, i)` used by the property tests.
pub fn oplus_size_bound(f: &FiniteNatSet, i: usize) -> u128 {
    binomial(f.len() as u64, i as u64)
}
