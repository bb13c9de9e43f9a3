//! Sparse polynomial series over `[-1, 1]^J` in the monomial (Taylor) or the
//! normalized Legendre basis.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};
use std::marker::PhantomData;

use crate::error::{GpcError, Result};
use crate::index::MultiIndex;
use crate::legendre::legendre_normalized;
use crate::scalar::{Coefficient, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Monomials `y^nu`.
    Taylor,
    /// Tensorized Legendre polynomials with unit norm in `L^2(dy/2)`.
    Legendre,
}

/// Map from multi-indices to coefficients, iterated in canonical index order.
/// Exactly-zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSeries<T: Real, C: Coefficient<T> = T> {
    basis: Basis,
    terms: BTreeMap<MultiIndex, C>,
    zero: C,
    _scalar: PhantomData<T>,
}

pub type ScalarSeries<T> = SparseSeries<T, T>;
pub type VectorSeries<T> = SparseSeries<T, Vec<T>>;

impl<T: Real> SparseSeries<T, T> {
    pub fn scalar(basis: Basis) -> Self {
        Self::new(basis, T::zero())
    }

    /// The constant series `c`.
    pub fn constant(basis: Basis, c: T) -> Self {
        let mut s = Self::scalar(basis);
        s.insert(MultiIndex::zero(), c);
        s
    }

    /// `sum |c_nu|^sigma)^(1/sigma)`.
    pub fn lsigma_norm(&self, sigma: T) -> T {
        self.terms.values().map(|c| c.abs().powf(sigma)).sum::<T>().powf(T::one() / sigma)
    }
}

impl<T: Real> SparseSeries<T, Vec<T>> {
    /// Scalar series of vector component `k`.
    pub fn component(&self, k: usize) -> ScalarSeries<T> {
        let mut out = ScalarSeries::scalar(self.basis);
        for (nu, c) in &self.terms {
            out.insert(nu.clone(), c[k]);
        }
        out
    }
}

impl<T: Real, C: Coefficient<T>> SparseSeries<T, C> {
    /// Empty series whose coefficients have the shape of `zero`.
    pub fn new(basis: Basis, zero: C) -> Self {
        let zero = zero.zero_like();
        Self { basis, terms: BTreeMap::new(), zero, _scalar: PhantomData }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn zero_coefficient(&self) -> &C {
        &self.zero
    }

    pub fn get(&self, nu: &MultiIndex) -> Option<&C> {
        self.terms.get(nu)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &C)> + Clone {
        self.terms.iter()
    }

    pub fn indices(&self) -> impl Iterator<Item = &MultiIndex> + Clone {
        self.terms.keys()
    }

    pub fn support(&self) -> BTreeSet<MultiIndex> {
        self.terms.keys().cloned().collect()
    }

    /// Sets the coefficient at `nu`; a zero coefficient removes the term.
    pub fn insert(&mut self, nu: MultiIndex, c: C) {
        if c.is_zero() {
            self.terms.remove(&nu);
        } else {
            self.terms.insert(nu, c);
        }
    }

    /// `coeff[nu] += s * c`.
    pub fn add_term(&mut self, nu: &MultiIndex, c: &C, s: T) {
        if let Some(existing) = self.terms.get_mut(nu) {
            existing.add_scaled(c, s);
            if existing.is_zero() {
                self.terms.remove(nu);
            }
        } else {
            let mut v = self.zero.clone();
            v.add_scaled(c, s);
            if !v.is_zero() {
                self.terms.insert(nu.clone(), v);
            }
        }
    }

    /// `self += s * other`; bases must agree.
    pub fn add_series(&mut self, other: &Self, s: T) {
        assert_eq!(self.basis, other.basis, "cannot add series in different bases");
        for (nu, c) in &other.terms {
            self.add_term(nu, c, s);
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = Self::new(self.basis, self.zero.clone());
        for (nu, c) in &self.terms {
            out.insert(nu.clone(), c.scaled(s));
        }
        out
    }

    /// Coefficientwise map into another coefficient type.
    pub fn map<D: Coefficient<T>>(&self, zero: D, f: impl Fn(&C) -> D) -> SparseSeries<T, D> {
        let mut out = SparseSeries::new(self.basis, zero);
        for (nu, c) in &self.terms {
            out.insert(nu.clone(), f(c));
        }
        out
    }

    pub fn max_dim(&self) -> u32 {
        self.terms.keys().map(MultiIndex::max_dim).max().unwrap_or(0)
    }

    /// `sum_nu ||c_nu||`, a majorant of the sup norm on `[-1, 1]^J` in the Taylor basis.
    pub fn l1_norm(&self) -> T {
        self.terms.values().map(Coefficient::norm).sum()
    }

    /// `sum_nu c_nu B_nu(y)`. Dimensions outside `y` are treated as `y_j = 0`.
    pub fn evaluate(&self, y: &[T]) -> C {
        let mut acc = self.zero.clone();
        match self.basis {
            Basis::Taylor => {
                for (nu, c) in &self.terms {
                    let mut b = T::one();
                    for &(d, e) in nu.entries() {
                        let yj = y.get(d as usize - 1).copied().unwrap_or(T::zero());
                        b *= yj.powi(e as i32);
                    }
                    if b != T::zero() {
                        acc.add_scaled(c, b);
                    }
                }
            }
            Basis::Legendre => {
                let mut max_deg = vec![0u32; self.max_dim() as usize];
                for nu in self.terms.keys() {
                    for &(d, e) in nu.entries() {
                        let slot = &mut max_deg[d as usize - 1];
                        *slot = (*slot).max(e);
                    }
                }
                let tables: Vec<Vec<T>> = max_deg
                    .iter()
                    .enumerate()
                    .map(|(j, &n)| legendre_normalized(n as usize, y.get(j).copied().unwrap_or(T::zero())))
                    .collect();
                for (nu, c) in &self.terms {
                    let b = nu
                        .entries()
                        .iter()
                        .fold(T::one(), |b, &(d, e)| b * tables[d as usize - 1][e as usize]);
                    acc.add_scaled(c, b);
                }
            }
        }
        acc
    }

    /// Keeps the `n` terms of largest `norm`, ties broken by canonical index order.
    /// Returns the kept series and the dropped mass `sum_dropped norm(c)`.
    pub fn truncate_largest_by(&self, n: usize, norm: impl Fn(&C) -> T) -> (Self, T) {
        if n >= self.terms.len() {
            return (self.clone(), T::zero());
        }
        let ranked: Vec<(usize, T)> = self.terms.values().map(&norm).enumerate().collect();
        let keep: BTreeSet<usize> = rank_largest(ranked, n).into_iter().collect();
        let mut out = Self::new(self.basis, self.zero.clone());
        let mut dropped = T::zero();
        for (pos, (nu, c)) in self.terms.iter().enumerate() {
            if keep.contains(&pos) {
                out.terms.insert(nu.clone(), c.clone());
            } else {
                dropped += norm(c);
            }
        }
        (out, dropped)
    }

    /// Best-N truncation by the coefficient's own norm.
    pub fn truncate_largest(&self, n: usize) -> (Self, T) {
        self.truncate_largest_by(n, Coefficient::norm)
    }

    /// Coefficient norms sorted descending (ties in canonical order).
    pub fn sorted_norms_by(&self, norm: impl Fn(&C) -> T) -> Vec<(MultiIndex, T)> {
        let mut v: Vec<(MultiIndex, T)> = self.terms.iter().map(|(nu, c)| (nu.clone(), norm(c))).collect();
        v.sort_by(|a, b| desc(a.1, b.1).then_with(|| a.0.cmp(&b.0)));
        v
    }

    /// CSV with columns `index,coefficient_norm`, sorted descending.
    pub fn write_norm_csv<W: Write>(&self, out: &mut W, norm: impl Fn(&C) -> T) -> io::Result<()> {
        writeln!(out, "index,coefficient_norm")?;
        for (nu, v) in self.sorted_norms_by(norm) {
            writeln!(out, "{nu},{v:.12e}")?;
        }
        Ok(())
    }
}

fn desc<T: Real>(a: T, b: T) -> Ordering {
    b.partial_cmp(&a).unwrap_or(Ordering::Equal)
}

/// Positions of the `n` largest magnitudes; ties resolved toward smaller position.
pub(crate) fn rank_largest<T: Real>(mut ranked: Vec<(usize, T)>, n: usize) -> Vec<usize> {
    let cmp = |a: &(usize, T), b: &(usize, T)| desc(a.1, b.1).then_with(|| a.0.cmp(&b.0));
    if n == 0 {
        return Vec::new();
    }
    if n < ranked.len() {
        ranked.select_nth_unstable_by(n - 1, cmp);
        ranked.truncate(n);
    }
    ranked.into_iter().map(|(i, _)| i).collect()
}

/// Least-squares slope of `log(error)` against `log(n)`.
pub fn fit_decay_rate<T: Real>(points: &[(T, T)]) -> Result<T> {
    if points.len() < 3 {
        return Err(GpcError::DegenerateFit(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some((n, e)) = points.iter().find(|(n, e)| !(*n > T::zero() && *e > T::zero())) {
        return Err(GpcError::DegenerateFit(format!("non-positive value at ({n}, {e})")));
    }
    let logs: Vec<(T, T)> = points.iter().map(|&(n, e)| (n.ln(), e.ln())).collect();
    let m = T::from_usize_lossy(logs.len());
    let mx = logs.iter().map(|p| p.0).sum::<T>() / m;
    let my = logs.iter().map(|p| p.1).sum::<T>() / m;
    let sxx: T = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if !(sxx > T::zero()) {
        return Err(GpcError::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: T = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(s: &str) -> MultiIndex {
        s.parse().unwrap()
    }

    fn taylor(terms: &[(&str, f64)]) -> ScalarSeries<f64> {
        let mut s = ScalarSeries::scalar(Basis::Taylor);
        for &(nu, c) in terms {
            s.insert(mi(nu), c);
        }
        s
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(ScalarSeries::<f64>::scalar(Basis::Taylor).evaluate(&[0.3]), 0.0);
        assert_eq!(taylor(&[("0", 1.0), ("1^1", 2.0)]).evaluate(&[0.5]), 2.0);
        let s = taylor(&[("1^1 2^2", 3.0)]);
        assert!((s.evaluate(&[0.5, -2.0]) - 6.0).abs() < 1e-15);
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let mut s = taylor(&[("0", 1.0), ("1^1", 0.0)]);
        assert_eq!(s.len(), 1);
        s.add_term(&mi("0"), &1.0, -1.0);
        assert!(s.is_empty());
    }

    #[test]
    fn truncation_examples() {
        let s = taylor(&[("0", 1.0), ("1^1", 0.5), ("2^1", 0.25)]);
        assert_eq!(s.truncate_largest(5), (s.clone(), 0.0));
        let (kept, dropped) = s.truncate_largest(2);
        assert_eq!(kept, taylor(&[("0", 1.0), ("1^1", 0.5)]));
        assert_eq!(dropped, 0.25);
    }

    #[test]
    fn truncation_ties_follow_canonical_order() {
        let s = taylor(&[("2^1", -0.5), ("1^1", 0.5), ("0", 0.1)]);
        let (kept, dropped) = s.truncate_largest(1);
        assert_eq!(kept, taylor(&[("1^1", 0.5)]));
        assert!((dropped - 0.6).abs() < 1e-15);
    }

    #[test]
    fn vector_component_extraction() {
        let mut s = VectorSeries::new(Basis::Taylor, vec![0.0; 2]);
        s.insert(mi("0"), vec![1.0, 2.0]);
        s.insert(mi("1^1"), vec![0.0, 3.0]);
        let c0 = s.component(0);
        assert_eq!(c0.len(), 1);
        assert_eq!(s.component(1).evaluate(&[1.0]), 5.0);
        assert_eq!(s.evaluate(&[2.0]), vec![1.0, 8.0]);
    }

    #[test]
    fn decay_rate_examples() {
        let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0, 16.0].iter().map(|&n: &f64| (n, n.powi(-2))).collect();
        assert!((fit_decay_rate(&pts).unwrap() + 2.0).abs() < 1e-10);
        let flat: Vec<(f64, f64)> = [2.0, 4.0, 8.0].iter().map(|&n| (n, 0.3)).collect();
        assert!(fit_decay_rate(&flat).unwrap().abs() < 1e-12);
        let pts: Vec<(f64, f64)> = [1.0, 3.0, 9.0, 27.0].iter().map(|&n: &f64| (n, 3.0 * n.powf(-1.5))).collect();
        assert!((fit_decay_rate(&pts).unwrap() + 1.5).abs() < 1e-10);
    }

    #[test]
    fn decay_rate_rejects_degenerate_input() {
        assert!(fit_decay_rate(&[(1.0, 1.0), (2.0, 0.5)]).is_err());
        assert!(fit_decay_rate(&[(1.0, 1.0), (2.0, 0.0), (3.0, 0.1)]).is_err());
        assert!(fit_decay_rate(&[(2.0, 1.0), (2.0, 0.5), (2.0, 0.1)]).is_err());
    }

    #[test]
    fn stechkin_geometric_sequence() {
        // gamma_n = 2^{-n}: compare tail l2 norm with N^{-(1/sigma - 1/2)} ||gamma||_{l^sigma}, sigma = 1.
        let gamma: Vec<f64> = (1..=60).map(|n| 0.5_f64.powi(n)).collect();
        let l1: f64 = gamma.iter().sum();
        for n in 1..=8usize {
            let tail = gamma[n..].iter().map(|g| g * g).sum::<f64>().sqrt();
            assert!(tail <= (n as f64).powf(-0.5) * l1);
        }
    }

    #[test]
    fn norm_csv_is_sorted() {
        let s = taylor(&[("0", 0.1), ("1^1", -2.0), ("2^1", 0.5)]);
        let mut buf = Vec::new();
        s.write_norm_csv(&mut buf, |c| c.abs()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,coefficient_norm");
        assert!(lines[1].starts_with("1^1,"));
        assert!(lines[3].starts_with("0,"));
    }
}
