#![allow(dead_code)]

use std::collections::BTreeSet;

use gpc_core::{downward_close, Basis, MonotoneSet, MultiIndex, ScalarSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random multi-index with entries in `0..=max_exp` over `dims` dimensions.
pub fn random_index(rng: &mut impl Rng, dims: u32, max_exp: u32) -> MultiIndex {
    let exps: Vec<u32> = (0..dims).map(|_| rng.random_range(0..=max_exp)).collect();
    MultiIndex::from_dense(&exps)
}

/// Downward closure of a few random seeds.
pub fn random_monotone(rng: &mut impl Rng, dims: u32, max_exp: u32, seeds: usize) -> MonotoneSet {
    let gens: Vec<MultiIndex> = (0..seeds).map(|_| random_index(rng, dims, max_exp)).collect();
    downward_close(gens.iter())
}

/// Random Taylor series with `terms` entries of magnitude decaying in the degree.
pub fn random_series(rng: &mut impl Rng, dims: u32, max_exp: u32, terms: usize) -> ScalarSeries<f64> {
    let mut s = ScalarSeries::scalar(Basis::Taylor);
    let mut seen = BTreeSet::new();
    for _ in 0..terms * 4 {
        if seen.len() == terms {
            break;
        }
        let nu = random_index(rng, dims, max_exp);
        if seen.insert(nu.clone()) {
            let mag = 2f64.powi(-(nu.degree() as i32)) * rng.random_range(0.1..1.0);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            s.insert(nu, sign * mag);
        }
    }
    s
}

/// Dense coefficient array for exponents in `0..side` per dimension (dimension 1 fastest).
pub fn to_dense(s: &ScalarSeries<f64>, dims: usize, side: usize) -> Vec<f64> {
    let mut out = vec![0.0; side.pow(dims as u32)];
    for (nu, &c) in s.iter() {
        let mut flat = 0;
        for j in (0..dims).rev() {
            flat = flat * side + nu.get(j as u32 + 1) as usize;
        }
        out[flat] += c;
    }
    out
}

/// Brute-force polynomial product on dense arrays.
pub fn dense_product(a: &[f64], b: &[f64], dims: usize, side: usize, out_side: usize) -> Vec<f64> {
    let split = |mut flat: usize, side: usize| -> Vec<usize> {
        (0..dims)
            .map(|_| {
                let e = flat % side;
                flat /= side;
                e
            })
            .collect()
    };
    let mut out = vec![0.0; out_side.pow(dims as u32)];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let ei = split(i, side);
        for (k, &y) in b.iter().enumerate() {
            if y == 0.0 {
                continue;
            }
            let ek = split(k, side);
            let mut flat = 0;
            for j in (0..dims).rev() {
                flat = flat * out_side + ei[j] + ek[j];
            }
            out[flat] += x * y;
        }
    }
    out
}

/// Naive monomial evaluation, independent of the series evaluator.
pub fn eval_monomials(s: &ScalarSeries<f64>, y: &[f64]) -> f64 {
    s.iter()
        .map(|(nu, &c)| c * nu.entries().iter().map(|&(j, e)| y[j as usize - 1].powi(e as i32)).product::<f64>())
        .sum()
}

/// `(sum_{n > N} g_n^q)^{1/q}` and `N^{-(1/sigma - 1/q)} (sum g_n^sigma)^{1/sigma}` for a
/// non-negative sequence sorted decreasingly.
pub fn stechkin_sides(sorted: &[f64], n: usize, sigma: f64, q: f64) -> (f64, f64) {
    let tail: f64 = sorted[n.min(sorted.len())..].iter().map(|g| g.powf(q)).sum::<f64>().powf(1.0 / q);
    let norm: f64 = sorted.iter().map(|g| g.powf(sigma)).sum::<f64>().powf(1.0 / sigma);
    (tail, (n as f64).powf(-(1.0 / sigma - 1.0 / q)) * norm)
}
