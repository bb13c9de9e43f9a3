//! Prior integration of sparse series and posterior summaries from three
//! independent routes: semianalytic, Monte Carlo and tensor quadrature.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{GpcError, Result};
use crate::fem::{AffineOperatorFamily, ObservationSetup};
use crate::index::MultiIndex;
use crate::posterior::{truncated_product_with, PosteriorApprox};
use crate::prior::{sample_prior_batch, ParamVector, PriorModel};
use crate::quadrature::TensorGrid;
use crate::scalar::{Coefficient, Real};
use crate::series::{Basis, SparseSeries, VectorSeries};

/// `int y^nu dmu_0 = prod_j (nu_j even ? 1/(nu_j + 1) : 0)`.
pub fn moment_weight<T: Real>(nu: &MultiIndex) -> T {
    let mut w = T::one();
    for &(_, e) in nu.entries() {
        if e % 2 == 1 {
            return T::zero();
        }
        w /= T::from_usize_lossy(e as usize + 1);
    }
    w
}

/// Exact prior integral of a series, linear in the number of terms.
pub fn integrate_series<T: Real, C: Coefficient<T>>(s: &SparseSeries<T, C>) -> C {
    match s.basis() {
        Basis::Taylor => {
            let mut acc = s.zero_coefficient().clone();
            for (nu, c) in s.iter() {
                let w = moment_weight::<T>(nu);
                if w != T::zero() {
                    acc.add_scaled(c, w);
                }
            }
            acc
        }
        Basis::Legendre => s.get(&MultiIndex::zero()).cloned().unwrap_or_else(|| s.zero_coefficient().clone()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorTag {
    Semianalytic,
    MonteCarlo,
    Quadrature,
}

impl fmt::Display for EstimatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Semianalytic => "semianalytic",
            Self::MonteCarlo => "mc",
            Self::Quadrature => "quadrature",
        })
    }
}

/// Normalization, posterior mean and pointwise second moment of the pressure.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorSummary<T: Real> {
    pub z: T,
    pub mean_field: Vec<T>,
    pub second_moment_diag: Vec<T>,
    pub estimator: EstimatorTag,
    /// Monte Carlo standard error of `z`.
    pub z_stderr: Option<T>,
    /// Monte Carlo standard error of each mean-field entry (ratio estimator, delta method).
    pub mean_stderr: Option<Vec<T>>,
}

impl<T: Real> PosteriorSummary<T> {
    /// Pointwise posterior variance `E[p^2] - E[p]^2`.
    pub fn variance(&self) -> Vec<T> {
        self.second_moment_diag.iter().zip(&self.mean_field).map(|(&s, &m)| s - m * m).collect()
    }

    /// CSV rows `estimator,z,node,mean,variance`.
    pub fn write_csv<W: Write>(&self, out: &mut W, nodes: &[T], header: bool) -> io::Result<()> {
        if header {
            writeln!(out, "estimator,z,node,mean,variance")?;
        }
        for ((x, m), v) in nodes.iter().zip(&self.mean_field).zip(self.variance()) {
            writeln!(out, "{},{:.15e},{:.6},{:.15e},{:.15e}", self.estimator, self.z, x, m, v)?;
        }
        Ok(())
    }
}

fn elementwise_product<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x * y).collect()
}

/// Semianalytic posterior summary: `Z = int Theta_N`, `Z' = int [Theta_N p]_{#N}` and
/// the second moment from `[Theta_N [p (.) p]_{#N}]_{#N}`.
pub fn posterior_summary_semianalytic<T: Real>(
    pa: &PosteriorApprox<T>,
    p_series: &VectorSeries<T>,
    n: usize,
) -> Result<PosteriorSummary<T>> {
    let z = integrate_series(&pa.theta_series);
    if !(z > T::zero()) {
        return Err(GpcError::NonPositiveNormalization(z.to_f64_lossy()));
    }
    let zero = p_series.zero_coefficient().clone();
    let weighted = truncated_product_with(&pa.theta_series, p_series, n, zero.clone(), |t, p| p.scaled(*t))?;
    let squared = truncated_product_with(p_series, p_series, n, zero.clone(), |a: &Vec<T>, b: &Vec<T>| elementwise_product(a, b))?;
    let weighted_sq = truncated_product_with(&pa.theta_series, &squared.series, n, zero, |t, p| p.scaled(*t))?;
    let inv_z = T::one() / z;
    Ok(PosteriorSummary {
        z,
        mean_field: integrate_series(&weighted.series).scaled(inv_z),
        second_moment_diag: integrate_series(&weighted_sq.series).scaled(inv_z),
        estimator: EstimatorTag::Semianalytic,
        z_stderr: None,
        mean_stderr: None,
    })
}

/// Running sums for `Theta`, `Theta p`, `Theta p^2` and the squared terms MC needs.
#[derive(Clone)]
struct Moments<T: Real> {
    s0: T,
    s00: T,
    s1: Vec<T>,
    s2: Vec<T>,
    s11: Vec<T>,
    s22: Vec<T>,
}

impl<T: Real> Moments<T> {
    fn new(n: usize) -> Self {
        Self { s0: T::zero(), s00: T::zero(), s1: vec![T::zero(); n], s2: vec![T::zero(); n], s11: vec![T::zero(); n], s22: vec![T::zero(); n] }
    }

    fn push(&mut self, w: T, theta: T, p: &[T]) {
        let wt = w * theta;
        self.s0 += wt;
        self.s00 += wt * theta;
        for (i, &pi) in p.iter().enumerate() {
            self.s1[i] += wt * pi;
            self.s2[i] += wt * pi * pi;
            self.s11[i] += wt * theta * pi;
            self.s22[i] += wt * theta * pi * pi;
        }
    }

    fn merge(&mut self, o: &Self) {
        self.s0 += o.s0;
        self.s00 += o.s00;
        for (dst, src) in [(&mut self.s1, &o.s1), (&mut self.s2, &o.s2), (&mut self.s11, &o.s11), (&mut self.s22, &o.s22)] {
            for (a, b) in dst.iter_mut().zip(src) {
                *a += *b;
            }
        }
    }
}

const CHUNK: usize = 512;

/// Evaluates `(Theta, p)` at each point in parallel; reduction order is fixed.
fn accumulate<T: Real>(
    setup: &ObservationSetup<T>,
    fam: &AffineOperatorFamily<T>,
    points: &[(Vec<T>, T)],
) -> Result<Moments<T>> {
    let weights = setup.weights(fam.mesh());
    let partials: Vec<Result<Moments<T>>> = points
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut m = Moments::new(fam.n_dofs());
            for (y, w) in chunk {
                let p = fam.solve_at(&ParamVector::unchecked(y.clone()))?;
                let g: Vec<T> = weights.iter().map(|wk| crate::scalar::dot(wk, &p)).collect();
                let theta = (-setup.misfit(&g)).exp();
                m.push(*w, theta, &p);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::new(fam.n_dofs());
    for p in partials {
        total.merge(&p?);
    }
    Ok(total)
}

/// Plain prior-sampling Monte Carlo with `m` forward solves; the mean uses the
/// ratio estimator `Z'/Z` (bias reported through the standard errors, not corrected).
pub fn mc_posterior<T: Real>(
    setup: &ObservationSetup<T>,
    fam: &AffineOperatorFamily<T>,
    model: &PriorModel<T>,
    m: usize,
    seed: u64,
) -> Result<PosteriorSummary<T>> {
    if m == 0 {
        return Err(GpcError::InvalidArgument("Monte Carlo needs at least one sample".into()));
    }
    let points: Vec<(Vec<T>, T)> = sample_prior_batch::<T>(model.n_dims(), m, seed)
        .into_iter()
        .map(|y| (y.as_slice().to_vec(), T::one()))
        .collect();
    let mom = accumulate(setup, fam, &points)?;
    let mf = T::from_usize_lossy(m);
    let z = mom.s0 / mf;
    let var_theta = if m > 1 { (mom.s00 - mf * z * z).max(T::zero()) / (mf - T::one()) } else { T::zero() };
    let mean: Vec<T> = mom.s1.iter().map(|&s| s / mom.s0).collect();
    let second: Vec<T> = mom.s2.iter().map(|&s| s / mom.s0).collect();
    let mean_stderr = (0..mean.len())
        .map(|i| {
            let mi = mean[i];
            let ss = mom.s22[i] - (mi + mi) * mom.s11[i] + mi * mi * mom.s00;
            if m > 1 {
                (ss.max(T::zero()) / (mf * (mf - T::one()))).sqrt() / z
            } else {
                T::zero()
            }
        })
        .collect();
    Ok(PosteriorSummary {
        z,
        mean_field: mean,
        second_moment_diag: second,
        estimator: EstimatorTag::MonteCarlo,
        z_stderr: Some((var_theta / mf).sqrt()),
        mean_stderr: Some(mean_stderr),
    })
}

/// Largest parameter dimension the tensor oracle accepts.
pub const QUADRATURE_MAX_DIMS: usize = 6;

/// Brute-force tensor Gauss-Legendre reference with an exact forward solve per node.
pub fn quadrature_oracle<T: Real>(
    setup: &ObservationSetup<T>,
    fam: &AffineOperatorFamily<T>,
    nodes_per_dim: usize,
) -> Result<PosteriorSummary<T>> {
    let dims = fam.n_dims();
    if dims > QUADRATURE_MAX_DIMS {
        return Err(GpcError::CostGuard(format!(
            "tensor quadrature oracle limited to J <= {QUADRATURE_MAX_DIMS}, got J = {dims}"
        )));
    }
    if nodes_per_dim < 2 {
        return Err(GpcError::InvalidArgument("quadrature oracle needs at least 2 nodes per dimension".into()));
    }
    let grid = TensorGrid::<T>::new(dims, nodes_per_dim, 50_000_000)?;
    let points: Vec<(Vec<T>, T)> = grid.points().collect();
    let mom = accumulate(setup, fam, &points)?;
    Ok(PosteriorSummary {
        z: mom.s0,
        mean_field: mom.s1.iter().map(|&s| s / mom.s0).collect(),
        second_moment_diag: mom.s2.iter().map(|&s| s / mom.s0).collect(),
        estimator: EstimatorTag::Quadrature,
        z_stderr: None,
        mean_stderr: None,
    })
}
