//! Posterior density `Theta(y) = exp(-Phi(y))` and its constructive sparse
//! approximation built from the forward surrogate by best-N truncated products.

use std::io::{self, Write};

use crate::error::{GpcError, Result};
use crate::fem::{AffineOperatorFamily, Mesh1D, ObservationSetup};
use crate::index::{MonotoneSet, MultiIndex};
use crate::prior::ParamVector;
use crate::scalar::{Coefficient, Real};
use crate::series::{rank_largest, Basis, ScalarSeries, SparseSeries, VectorSeries};
use crate::taylor::taylor_forward;

/// Unbounded truncation budget.
pub const NO_TRUNCATION: usize = usize::MAX;

/// `exp(-Phi(y))` through an exact forward solve.
pub fn theta_exact<T: Real>(setup: &ObservationSetup<T>, fam: &AffineOperatorFamily<T>, y: &ParamVector<T>) -> Result<T> {
    Ok((-setup.potential_exact(fam, y)?).exp())
}

/// Coefficientwise observation of a nodal-vector series; exact by linearity.
pub fn observe_series<T: Real>(setup: &ObservationSetup<T>, mesh: &Mesh1D<T>, p: &VectorSeries<T>) -> VectorSeries<T> {
    let weights = setup.weights(mesh);
    p.map(vec![T::zero(); setup.n_obs()], |c| {
        weights.iter().map(|w| crate::scalar::dot(w, c)).collect()
    })
}

/// Taylor coefficients `g_nu = O(t_nu)` of the surrogate observation map on `lam`.
pub fn gpc_observation<T: Real>(
    fam: &AffineOperatorFamily<T>,
    setup: &ObservationSetup<T>,
    lam: &MonotoneSet,
) -> Result<VectorSeries<T>> {
    Ok(observe_series(setup, fam.mesh(), &taylor_forward(fam, lam)?))
}

/// A truncated product together with its dropped-mass witness
/// `sum_{excluded pairs} ||a|| ||b||`.
#[derive(Clone, Debug, PartialEq)]
pub struct Truncated<T: Real, C: Coefficient<T> = T> {
    pub series: SparseSeries<T, C>,
    pub dropped_mass: T,
}

/// `[s1 * s2]_{#n}`: forms all pairwise products, keeps the `n` pairs of largest
/// `||a|| ||b||` (ties in canonical `(nu, nu')` order) and accumulates them on `nu + nu'`.
pub fn truncated_product_with<T, A, B, C>(
    s1: &SparseSeries<T, A>,
    s2: &SparseSeries<T, B>,
    n: usize,
    zero: C,
    mul: impl Fn(&A, &B) -> C,
) -> Result<Truncated<T, C>>
where
    T: Real,
    A: Coefficient<T>,
    B: Coefficient<T>,
    C: Coefficient<T>,
{
    if s1.basis() != Basis::Taylor || s2.basis() != Basis::Taylor {
        return Err(GpcError::InvalidArgument("truncated products need Taylor-basis factors".into()));
    }
    let left: Vec<(&MultiIndex, &A, T)> = s1.iter().map(|(nu, a)| (nu, a, a.norm())).collect();
    let right: Vec<(&MultiIndex, &B, T)> = s2.iter().map(|(nu, b)| (nu, b, b.norm())).collect();
    let width = right.len();
    let total = left.len() * width;
    let keep: Vec<usize> = if n >= total {
        (0..total).collect()
    } else {
        let ranked = (0..total).map(|flat| (flat, left[flat / width].2 * right[flat % width].2)).collect();
        let mut keep = rank_largest(ranked, n);
        keep.sort_unstable();
        keep
    };
    let mut series = SparseSeries::new(Basis::Taylor, zero);
    for &flat in &keep {
        let (nu, a, _) = left[flat / width];
        let (mu, b, _) = right[flat % width];
        series.add_term(&nu.add(mu), &mul(a, b), T::one());
    }
    let mut dropped_mass = T::zero();
    if keep.len() < total {
        let mut it = keep.iter().peekable();
        for flat in 0..total {
            if it.peek() == Some(&&flat) {
                it.next();
            } else {
                dropped_mass += left[flat / width].2 * right[flat % width].2;
            }
        }
    }
    Ok(Truncated { series, dropped_mass })
}

/// Scalar `[s1 * s2]_{#n}`.
pub fn truncated_product<T: Real>(s1: &ScalarSeries<T>, s2: &ScalarSeries<T>, n: usize) -> Result<Truncated<T>> {
    truncated_product_with(s1, s2, n, T::zero(), |a, b| *a * *b)
}

/// `[Phi_N]_{#N} = 1/2 sum_k gamma_k^{-1} [r^(k) r^(k)]_{#N}` with the residual series
/// `r^(k) = g^(k) - delta_k`. Before truncation this is exactly
/// `1/2 sum_k gamma_k^{-1} (delta_k^2 - 2 delta_k g^(k) + g^(k) g^(k))`; truncating the
/// residual square keeps the large constant parts from cancelling after truncation.
pub fn potential_series<T: Real>(g: &VectorSeries<T>, setup: &ObservationSetup<T>, n: usize) -> Result<Truncated<T>> {
    if g.zero_coefficient().len() != setup.n_obs() {
        return Err(GpcError::DimensionMismatch { expected: setup.n_obs(), got: g.zero_coefficient().len() });
    }
    if g.basis() != Basis::Taylor {
        return Err(GpcError::InvalidArgument("potential needs a Taylor-basis observation series".into()));
    }
    let half = T::lit(0.5);
    let mut phi = ScalarSeries::scalar(Basis::Taylor);
    let mut dropped_mass = T::zero();
    for (k, (&d, &var)) in setup.delta().iter().zip(setup.gamma()).enumerate() {
        let mut residual = g.component(k);
        residual.add_term(&MultiIndex::zero(), &d, -T::one());
        let sq = truncated_product(&residual, &residual, n)?;
        let w = half / var;
        phi.add_series(&sq.series, w);
        dropped_mass += w * sq.dropped_mass;
    }
    Ok(Truncated { series: phi, dropped_mass })
}

/// Number of exponential-series terms `K(N) = max(1, ceil(c_k ln N))`.
pub fn k_terms(n: usize, c_k: f64) -> usize {
    let k = (c_k * (n.max(1) as f64).ln()).ceil();
    (k as usize).max(1)
}

/// One row of truncation bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct StageDiagnostic<T: Real> {
    pub stage: String,
    pub dropped_mass: T,
    pub support_size: usize,
}

/// Constructive N-term approximation of the posterior density.
#[derive(Clone, Debug)]
pub struct PosteriorApprox<T: Real> {
    pub theta_series: ScalarSeries<T>,
    /// The truncated potential `[Phi_N]_{#N}` the powers were built from.
    pub potential: ScalarSeries<T>,
    pub n_budget: usize,
    pub k_terms: usize,
    pub diagnostics: Vec<StageDiagnostic<T>>,
    /// `||[Phi_N]_{#N}||_{l1}^{K+1} / (K+1)!`.
    pub remainder_bound: T,
    /// Certified `sup_y |Theta_N(y) - exp(-Phi_N(y))|` where `Phi_N` is the untruncated
    /// surrogate potential.
    pub surrogate_error_bound: T,
}

impl<T: Real> PosteriorApprox<T> {
    pub fn evaluate(&self, y: &[T]) -> T {
        self.theta_series.evaluate(y)
    }

    /// Sum of every recorded dropped mass.
    pub fn total_dropped_mass(&self) -> T {
        self.diagnostics.iter().map(|d| d.dropped_mass).sum()
    }

    /// CSV `index,coefficient` in canonical order.
    pub fn write_terms_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "index,coefficient")?;
        for (nu, c) in self.theta_series.iter() {
            writeln!(out, "{nu},{c:.15e}")?;
        }
        Ok(())
    }

    /// CSV `stage,dropped_mass,support_size`.
    pub fn write_diagnostics_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "stage,dropped_mass,support_size")?;
        for d in &self.diagnostics {
            writeln!(out, "{},{:.12e},{}", d.stage, d.dropped_mass, d.support_size)?;
        }
        Ok(())
    }
}

/// `Theta_N = sum_{k=0}^{K(N)} (-1)^k / k! [([Phi_N]_{#N})^k]_{#N}` with powers built
/// left to right, each product truncated to `n` pairs.
pub fn theta_series<T: Real>(
    g: &VectorSeries<T>,
    setup: &ObservationSetup<T>,
    n: usize,
    c_k: f64,
) -> Result<PosteriorApprox<T>> {
    if n == 0 {
        return Err(GpcError::InvalidArgument("the truncation budget N must be at least 1".into()));
    }
    if !(c_k > 0.0) {
        return Err(GpcError::InvalidArgument(format!("K(N) constant must be positive, got {c_k}")));
    }
    let phi = potential_series(g, setup, n)?;
    theta_from_potential(phi, n, k_terms(n, c_k))
}

/// The exponential-series stage of [`theta_series`] for a given truncated potential.
pub fn theta_from_potential<T: Real>(phi: Truncated<T>, n: usize, k_max: usize) -> Result<PosteriorApprox<T>> {
    let potential = phi.series;
    let phi_l1 = potential.l1_norm();
    let mut diagnostics = vec![StageDiagnostic {
        stage: "potential".into(),
        dropped_mass: phi.dropped_mass,
        support_size: potential.len(),
    }];
    let mut theta = ScalarSeries::constant(Basis::Taylor, T::one());
    let mut power = ScalarSeries::constant(Basis::Taylor, T::one());
    let mut inv_fact = T::one();
    // Propagated sup error of each truncated power against the exact power.
    let mut power_err = T::zero();
    let mut powers_err = T::zero();
    for k in 1..=k_max {
        let next = truncated_product(&power, &potential, n)?;
        power = next.series;
        power_err = power_err * phi_l1 + next.dropped_mass;
        inv_fact /= T::from_usize_lossy(k);
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        theta.add_series(&power, sign * inv_fact);
        powers_err += inv_fact * power_err;
        diagnostics.push(StageDiagnostic {
            stage: format!("power_{k}"),
            dropped_mass: next.dropped_mass,
            support_size: power.len(),
        });
    }
    let remainder_bound = phi_l1.powi(k_max as i32 + 1) * inv_fact / T::from_usize_lossy(k_max + 1);
    let tail = exp_tail(phi_l1, k_max);
    let d_phi = phi.dropped_mass;
    let surrogate_error_bound = powers_err + tail + d_phi.exp() * d_phi;
    diagnostics.push(StageDiagnostic { stage: "theta".into(), dropped_mass: T::zero(), support_size: theta.len() });
    Ok(PosteriorApprox {
        theta_series: theta,
        potential,
        n_budget: n,
        k_terms: k_max,
        diagnostics,
        remainder_bound,
        surrogate_error_bound,
    })
}

/// `sum_{k > k_max} x^k / k!` for `x >= 0`.
fn exp_tail<T: Real>(x: T, k_max: usize) -> T {
    let mut term = T::one();
    for k in 1..=k_max {
        term = term * x / T::from_usize_lossy(k);
    }
    let mut sum = T::zero();
    let mut k = k_max + 1;
    loop {
        term = term * x / T::from_usize_lossy(k);
        sum += term;
        if term <= T::epsilon() * sum || term == T::zero() || k > k_max + 10_000 {
            return sum;
        }
        k += 1;
    }
}
