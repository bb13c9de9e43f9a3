//! Normalized Legendre polynomials `L_n = sqrt(2n + 1) P_n` and exact conversion
//! between monomial and Legendre coefficients on downward-closed index sets.

use crate::error::{GpcError, Result};
use crate::index::{MonotoneSet, MultiIndex};
use crate::quadrature::gauss_legendre_uniform;
use crate::scalar::{Coefficient, Real};
use crate::series::{Basis, SparseSeries};

/// `[L_0(x), ..., L_n(x)]` by the three-term recurrence.
pub fn legendre_normalized<T: Real>(n: usize, x: T) -> Vec<T> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(T::one());
    if n >= 1 {
        p.push(x);
    }
    for k in 1..n {
        let kf = T::from_usize_lossy(k);
        let next = ((kf + kf + T::one()) * x * p[k] - kf * p[k - 1]) / (kf + T::one());
        p.push(next);
    }
    for (k, v) in p.iter_mut().enumerate() {
        *v *= T::from_usize_lossy(2 * k + 1).sqrt();
    }
    p
}

/// One-dimensional change of basis: `row[n]` lists `(k, c)` with `source_n = sum_k c target_k`.
#[derive(Clone, Debug)]
pub struct BasisTable<T: Real> {
    rows: Vec<Vec<(u32, T)>>,
}

impl<T: Real> BasisTable<T> {
    /// `y^n = sum_k c_{n,k} L_k(y)` with `c_{n,k} = int y^n L_k dy/2`, by a Gauss rule
    /// with `ceil((2 deg + 1) / 2) + 1` nodes (exact for these integrands).
    pub fn monomial_to_legendre(max_degree: usize) -> Self {
        let nq = (2 * max_degree + 1).div_ceil(2) + 1;
        let (x, w) = gauss_legendre_uniform::<T>(nq);
        let lvals: Vec<Vec<T>> = x.iter().map(|&xi| legendre_normalized(max_degree, xi)).collect();
        let rows = (0..=max_degree)
            .map(|n| {
                (0..=n)
                    .rev()
                    .step_by(2)
                    .map(|k| {
                        let c = x
                            .iter()
                            .zip(&w)
                            .zip(&lvals)
                            .map(|((&xi, &wi), l)| wi * xi.powi(n as i32) * l[k])
                            .sum();
                        (k as u32, c)
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    /// `L_k(y) = sum_n d_{k,n} y^n`, from the recurrence on coefficient vectors.
    pub fn legendre_to_monomial(max_degree: usize) -> Self {
        let mut p: Vec<Vec<T>> = vec![vec![T::one()]];
        if max_degree >= 1 {
            p.push(vec![T::zero(), T::one()]);
        }
        for k in 1..max_degree {
            let kf = T::from_usize_lossy(k);
            let mut next = vec![T::zero(); k + 2];
            for (n, &c) in p[k].iter().enumerate() {
                next[n + 1] += (kf + kf + T::one()) * c / (kf + T::one());
            }
            for (n, &c) in p[k - 1].iter().enumerate() {
                next[n] -= kf * c / (kf + T::one());
            }
            p.push(next);
        }
        let rows = p
            .iter()
            .enumerate()
            .map(|(k, coeffs)| {
                let s = T::from_usize_lossy(2 * k + 1).sqrt();
                coeffs
                    .iter()
                    .enumerate()
                    .rev()
                    .filter(|(_, c)| **c != T::zero())
                    .map(|(n, &c)| (n as u32, c * s))
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn row(&self, n: usize) -> &[(u32, T)] {
        &self.rows[n]
    }

    pub fn max_degree(&self) -> usize {
        self.rows.len() - 1
    }
}

/// Re-expands a Taylor-basis series in normalized Legendre polynomials. The
/// result is exact and its support stays inside `lam`.
pub fn legendre_from_taylor<T: Real, C: Coefficient<T>>(
    s: &SparseSeries<T, C>,
    lam: &MonotoneSet,
) -> Result<SparseSeries<T, C>> {
    convert(s, lam, Basis::Taylor, Basis::Legendre, BasisTable::monomial_to_legendre)
}

/// Inverse of [`legendre_from_taylor`].
pub fn taylor_from_legendre<T: Real, C: Coefficient<T>>(
    s: &SparseSeries<T, C>,
    lam: &MonotoneSet,
) -> Result<SparseSeries<T, C>> {
    convert(s, lam, Basis::Legendre, Basis::Taylor, BasisTable::legendre_to_monomial)
}

fn convert<T: Real, C: Coefficient<T>>(
    s: &SparseSeries<T, C>,
    lam: &MonotoneSet,
    from: Basis,
    to: Basis,
    table: fn(usize) -> BasisTable<T>,
) -> Result<SparseSeries<T, C>> {
    if s.basis() != from {
        return Err(GpcError::InvalidArgument(format!("expected a {from:?}-basis series")));
    }
    if let Some(nu) = s.indices().find(|nu| !lam.contains(nu)) {
        return Err(GpcError::NotMonotone(format!("{nu} lies outside the supplied downward-closed set")));
    }
    let max_deg = s.indices().map(MultiIndex::max_exponent).max().unwrap_or(0) as usize;
    let table = table(max_deg);
    let mut out = SparseSeries::new(to, s.zero_coefficient().clone());
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for (nu, c) in s.iter() {
        let rows: Vec<(u32, &[(u32, T)])> = nu.entries().iter().map(|&(d, e)| (d, table.row(e as usize))).collect();
        let mut counters = vec![0usize; rows.len()];
        'odometer: loop {
            pairs.clear();
            let mut factor = T::one();
            for (slot, &(d, row)) in counters.iter().zip(&rows) {
                let (k, v) = row[*slot];
                pairs.push((d, k));
                factor *= v;
            }
            out.add_term(&MultiIndex::from_pairs(pairs.iter().copied()), c, factor);
            for (slot, (_, row)) in counters.iter_mut().zip(&rows) {
                *slot += 1;
                if *slot < row.len() {
                    continue 'odometer;
                }
                *slot = 0;
            }
            break;
        }
    }
    Ok(out)
}
