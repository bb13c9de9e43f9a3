//! Finitely supported multi-indices and downward-closed index sets.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{GpcError, Result};

/// A finitely supported multi-index `nu`, stored sparsely as `(dimension, exponent)`
/// pairs with 1-based dimensions, sorted by dimension, and no zero exponents.
///
/// Ordering is canonical: by total degree `|nu|_1`, then lexicographically on the
/// `(dimension, exponent)` pairs.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    entries: Vec<(u32, u32)>,
}

impl MultiIndex {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The unit index `e_j` (1-based dimension).
    pub fn unit(dim: u32) -> Self {
        assert!(dim >= 1, "dimensions are 1-based");
        Self { entries: vec![(dim, 1)] }
    }

    /// Builds an index from arbitrary `(dimension, exponent)` pairs. Zero exponents
    /// are dropped and repeated dimensions are summed.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut entries: Vec<(u32, u32)> = Vec::new();
        for (d, e) in pairs {
            assert!(d >= 1, "dimensions are 1-based");
            if e == 0 {
                continue;
            }
            match entries.binary_search_by_key(&d, |&(dd, _)| dd) {
                Ok(pos) => entries[pos].1 += e,
                Err(pos) => entries.insert(pos, (d, e)),
            }
        }
        Self { entries }
    }

    /// Builds an index from a dense exponent vector; entry `i` is dimension `i + 1`.
    pub fn from_dense(exps: &[u32]) -> Self {
        Self::from_pairs(exps.iter().enumerate().map(|(i, &e)| (i as u32 + 1, e)))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exponent in dimension `dim` (0 when outside the support).
    pub fn get(&self, dim: u32) -> u32 {
        self.entries
            .binary_search_by_key(&dim, |&(d, _)| d)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0)
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    /// Support dimensions, ascending.
    pub fn support(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|&(d, _)| d)
    }

    pub fn degree(&self) -> u32 {
        self.entries.iter().map(|&(_, e)| e).sum()
    }

    /// Largest dimension in the support (0 for the zero index).
    pub fn max_dim(&self) -> u32 {
        self.entries.last().map_or(0, |&(d, _)| d)
    }

    pub fn max_exponent(&self) -> u32 {
        self.entries.iter().map(|&(_, e)| e).max().unwrap_or(0)
    }

    /// `nu + e_dim`.
    pub fn incremented(&self, dim: u32) -> Self {
        let mut out = self.clone();
        match out.entries.binary_search_by_key(&dim, |&(d, _)| d) {
            Ok(pos) => out.entries[pos].1 += 1,
            Err(pos) => out.entries.insert(pos, (dim, 1)),
        }
        out
    }

    /// `nu - e_dim`, or `None` when `dim` is outside the support.
    pub fn decremented(&self, dim: u32) -> Option<Self> {
        let pos = self.entries.binary_search_by_key(&dim, |&(d, _)| d).ok()?;
        let mut out = self.clone();
        if out.entries[pos].1 == 1 {
            out.entries.remove(pos);
        } else {
            out.entries[pos].1 -= 1;
        }
        Some(out)
    }

    /// Componentwise sum `nu + mu`.
    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = (&self.entries, &other.entries);
        let mut entries = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut k) = (0, 0);
        while i < a.len() && k < b.len() {
            match a[i].0.cmp(&b[k].0) {
                Ordering::Less => {
                    entries.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    entries.push(b[k]);
                    k += 1;
                }
                Ordering::Equal => {
                    entries.push((a[i].0, a[i].1 + b[k].1));
                    i += 1;
                    k += 1;
                }
            }
        }
        entries.extend_from_slice(&a[i..]);
        entries.extend_from_slice(&b[k..]);
        Self { entries }
    }

    /// Predecessors `nu - e_j` for every `j` in the support.
    pub fn predecessors(&self) -> impl Iterator<Item = (u32, MultiIndex)> + '_ {
        self.support().map(move |d| (d, self.decremented(d).expect("in support")))
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.entries.iter().all(|&(d, e)| other.get(d) >= e)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.entries.cmp(&other.entries))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Text form `"j1^a1 j2^a2"`; the zero index prints as `"0"`.
impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("0");
        }
        for (i, (d, e)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{d}^{e}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for MultiIndex {
    type Err = GpcError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" || s.is_empty() {
            return Ok(Self::zero());
        }
        let bad = || GpcError::InvalidArgument(format!("malformed multi-index '{s}'"));
        let mut pairs = Vec::new();
        for tok in s.split_whitespace() {
            let (d, e) = tok.split_once('^').ok_or_else(bad)?;
            let d: u32 = d.parse().map_err(|_| bad())?;
            let e: u32 = e.parse().map_err(|_| bad())?;
            if d == 0 || e == 0 {
                return Err(bad());
            }
            pairs.push((d, e));
        }
        Ok(Self::from_pairs(pairs))
    }
}

/// True iff the set contains the zero index and is closed under `nu -> nu - e_j`.
pub fn is_monotone<'a>(set: impl IntoIterator<Item = &'a MultiIndex>) -> bool {
    let members: BTreeSet<&MultiIndex> = set.into_iter().collect();
    if !members.contains(&MultiIndex::zero()) {
        return false;
    }
    members
        .iter()
        .all(|nu| nu.predecessors().all(|(_, p)| members.contains(&p)))
}

/// A downward-closed (monotone) finite index set, iterated in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneSet {
    members: BTreeSet<MultiIndex>,
}

impl MonotoneSet {
    /// `{0}`.
    pub fn singleton_zero() -> Self {
        Self { members: BTreeSet::from([MultiIndex::zero()]) }
    }

    /// Validates monotonicity without modifying the input.
    pub fn try_new(members: BTreeSet<MultiIndex>) -> Result<Self> {
        if !members.contains(&MultiIndex::zero()) {
            return Err(GpcError::NotMonotone("0".into()));
        }
        for nu in &members {
            for (_, p) in nu.predecessors() {
                if !members.contains(&p) {
                    return Err(GpcError::NotMonotone(p.to_string()));
                }
            }
        }
        Ok(Self { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, nu: &MultiIndex) -> bool {
        self.members.contains(nu)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> + Clone {
        self.members.iter()
    }

    pub fn members(&self) -> &BTreeSet<MultiIndex> {
        &self.members
    }

    pub fn into_members(self) -> BTreeSet<MultiIndex> {
        self.members
    }

    pub fn max_degree(&self) -> u32 {
        self.members.iter().map(MultiIndex::max_exponent).max().unwrap_or(0)
    }

    pub fn max_dim(&self) -> u32 {
        self.members.iter().map(MultiIndex::max_dim).max().unwrap_or(0)
    }
}

impl<'a> IntoIterator for &'a MonotoneSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::collections::btree_set::Iter<'a, MultiIndex>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// Smallest monotone set containing `set` and the zero index.
pub fn downward_close<'a>(set: impl IntoIterator<Item = &'a MultiIndex>) -> MonotoneSet {
    let mut members = BTreeSet::new();
    let mut stack: Vec<MultiIndex> = set.into_iter().cloned().collect();
    stack.push(MultiIndex::zero());
    while let Some(nu) = stack.pop() {
        if members.contains(&nu) {
            continue;
        }
        for (_, p) in nu.predecessors() {
            if !members.contains(&p) {
                stack.push(p);
            }
        }
        members.insert(nu);
    }
    MonotoneSet { members }
}

/// `{nu + mu : nu in a, mu in b}`. Monotone whenever both inputs are.
pub fn minkowski_sum(a: &MonotoneSet, b: &MonotoneSet) -> MonotoneSet {
    let mut members = BTreeSet::new();
    for nu in a {
        for mu in b {
            members.insert(nu.add(mu));
        }
    }
    debug_assert!(is_monotone(&members));
    MonotoneSet { members }
}

/// Anisotropic total-degree set `{nu : sum_j w_j nu_j <= max_degree}` in `dims`
/// dimensions. Fails when the cardinality would exceed `cap`.
pub fn total_degree_set(dims: usize, max_degree: f64, weights: &[f64], cap: usize) -> Result<MonotoneSet> {
    if dims == 0 {
        return Err(GpcError::InvalidArgument("total-degree set needs at least one dimension".into()));
    }
    if weights.len() != dims {
        return Err(GpcError::DimensionMismatch { expected: dims, got: weights.len() });
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 1.0)) {
        return Err(GpcError::InvalidArgument(format!("total-degree weights must be >= 1, got {w}")));
    }
    if !(max_degree >= 0.0) {
        return Err(GpcError::InvalidArgument(format!("max degree must be >= 0, got {max_degree}")));
    }
    // Small slack so that e.g. weight 2 with budget 2 admits e_j despite rounding.
    let budget = max_degree + 1e-12 * max_degree.max(1.0);
    let mut members = BTreeSet::new();
    let mut current: Vec<(u32, u32)> = Vec::new();
    fill_total_degree(0, budget, weights, &mut current, &mut members, cap)?;
    Ok(MonotoneSet { members })
}

fn fill_total_degree(
    dim: usize,
    remaining: f64,
    weights: &[f64],
    current: &mut Vec<(u32, u32)>,
    out: &mut BTreeSet<MultiIndex>,
    cap: usize,
) -> Result<()> {
    if dim == weights.len() {
        if out.len() >= cap {
            return Err(GpcError::CostGuard(format!("total-degree set exceeds {cap} indices")));
        }
        out.insert(MultiIndex { entries: current.clone() });
        return Ok(());
    }
    fill_total_degree(dim + 1, remaining, weights, current, out, cap)?;
    let w = weights[dim];
    let mut k = 1u32;
    while f64::from(k) * w <= remaining {
        current.push((dim as u32 + 1, k));
        fill_total_degree(dim + 1, remaining - f64::from(k) * w, weights, current, out, cap)?;
        current.pop();
        k += 1;
    }
    Ok(())
}
