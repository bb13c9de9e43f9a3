//! Affine-parametric diffusion coefficient `u(x, y) = abar(x) + sum_j y_j psi_j(x)`
//! with a uniform prior on `[-1, 1]^J`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GpcError, Result};
use crate::fem::Mesh1D;
use crate::scalar::Real;

/// Parameter vector `y` in `[-1, 1]^J`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector<T: Real> {
    y: Vec<T>,
}

impl<T: Real> ParamVector<T> {
    pub fn new(y: Vec<T>) -> Result<Self> {
        if let Some((j, v)) = y.iter().enumerate().find(|(_, v)| !(v.abs() <= T::one())) {
            return Err(GpcError::InvalidArgument(format!("parameter y_{} = {v} outside [-1, 1]", j + 1)));
        }
        Ok(Self { y })
    }

    pub fn zeros(dims: usize) -> Self {
        Self { y: vec![T::zero(); dims] }
    }

    /// Unchecked construction, for evaluating surrogates outside the box.
    pub fn unchecked(y: Vec<T>) -> Self {
        Self { y }
    }

    pub fn dims(&self) -> usize {
        self.y.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.y
    }
}

/// Diffusion coefficient model with element-midpoint fields.
#[derive(Clone, Debug)]
pub struct PriorModel<T: Real> {
    abar: Vec<T>,
    psis: Vec<Vec<T>>,
    /// `||psi_j||_inf` as certified for the continuous field.
    psi_sup: Vec<T>,
    decay_b: Option<T>,
    scale_c: Option<T>,
    kappa: T,
}

impl<T: Real> PriorModel<T> {
    /// Sine-mode prior: `psi_j(x) = c j^{-(1+b)} sin(j pi x)` at element midpoints,
    /// with `c` chosen so that `sum_j ||psi_j||_inf = kappa / (1 + kappa) * abar`.
    pub fn build(n_dims: usize, decay_b: T, kappa: T, mesh: &Mesh1D<T>, abar_value: T) -> Result<Self> {
        if n_dims == 0 {
            return Err(GpcError::InvalidArgument("prior needs J >= 1".into()));
        }
        if !(decay_b > T::zero()) {
            return Err(GpcError::InvalidArgument(format!("decay exponent b must be positive, got {decay_b}")));
        }
        if !(kappa > T::zero() && kappa < T::one()) {
            return Err(GpcError::InvalidArgument(format!("kappa must lie in (0, 1), got {kappa}")));
        }
        if !(abar_value > T::zero()) {
            return Err(GpcError::InvalidArgument(format!("mean coefficient must be positive, got {abar_value}")));
        }
        let shape: Vec<T> = (1..=n_dims)
            .map(|j| T::from_usize_lossy(j).powf(-(T::one() + decay_b)))
            .collect();
        let target = kappa / (T::one() + kappa) * abar_value;
        let scale_c = target / shape.iter().copied().sum::<T>();
        let mids = mesh.midpoints();
        let pi = T::lit(std::f64::consts::PI);
        let psis = (1..=n_dims)
            .map(|j| {
                let amp = scale_c * shape[j - 1];
                let freq = T::from_usize_lossy(j) * pi;
                mids.iter().map(|&x| amp * (freq * x).sin()).collect()
            })
            .collect();
        Ok(Self {
            abar: vec![abar_value; mesh.n_elems()],
            psis,
            psi_sup: shape.iter().map(|&s| scale_c * s).collect(),
            decay_b: Some(decay_b),
            scale_c: Some(scale_c),
            kappa,
        })
    }

    /// Model from explicit midpoint fields. Sup norms are the max-abs of the samples
    /// and `kappa` is the smallest value satisfying the fluctuation bound.
    pub fn from_fields(abar: Vec<T>, psis: Vec<Vec<T>>) -> Result<Self> {
        if abar.is_empty() {
            return Err(GpcError::InvalidArgument("empty mean field".into()));
        }
        for psi in &psis {
            if psi.len() != abar.len() {
                return Err(GpcError::DimensionMismatch { expected: abar.len(), got: psi.len() });
            }
        }
        let psi_sup: Vec<T> = psis
            .iter()
            .map(|p| p.iter().fold(T::zero(), |m, v| m.max(v.abs())))
            .collect();
        let abar_min = abar.iter().copied().fold(T::infinity(), T::min);
        let total: T = psi_sup.iter().copied().sum();
        let kappa = if abar_min > total { total / (abar_min - total) } else { T::infinity() };
        Ok(Self { abar, psis, psi_sup, decay_b: None, scale_c: None, kappa })
    }

    /// The first `dims` fluctuation modes of this model, unchanged.
    pub fn truncated(&self, dims: usize) -> Result<Self> {
        if dims > self.n_dims() {
            return Err(GpcError::DimensionMismatch { expected: self.n_dims(), got: dims });
        }
        let mut out = self.clone();
        out.psis.truncate(dims);
        out.psi_sup.truncate(dims);
        Ok(out)
    }

    pub fn n_dims(&self) -> usize {
        self.psis.len()
    }

    pub fn n_elems(&self) -> usize {
        self.abar.len()
    }

    pub fn abar(&self) -> &[T] {
        &self.abar
    }

    pub fn psis(&self) -> &[Vec<T>] {
        &self.psis
    }

    pub fn psi_sup(&self) -> &[T] {
        &self.psi_sup
    }

    pub fn decay_b(&self) -> Option<T> {
        self.decay_b
    }

    pub fn scale_c(&self) -> Option<T> {
        self.scale_c
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn abar_min(&self) -> T {
        self.abar.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn fluctuation_sum(&self) -> T {
        self.psi_sup.iter().copied().sum()
    }

    /// Certifies uniform ellipticity and returns `(a_min, a_max)` with
    /// `a_min = min abar - sum_j ||psi_j||` and `a_max = max abar + sum_j ||psi_j||`.
    pub fn validate_uea(&self) -> Result<(T, T)> {
        let total = self.fluctuation_sum();
        for e in 0..self.n_elems() {
            let spread: T = self.psis.iter().map(|p| p[e].abs()).sum();
            let lower = self.abar[e] - spread;
            if !(lower > T::zero()) {
                return Err(GpcError::UeaViolation { element: e, lower_bound: lower.to_f64_lossy() });
            }
        }
        let a_min = self.abar_min() - total;
        if !(a_min > T::zero()) {
            let e = (0..self.n_elems())
                .min_by(|&a, &b| self.abar[a].partial_cmp(&self.abar[b]).expect("finite"))
                .unwrap_or(0);
            return Err(GpcError::UeaViolation { element: e, lower_bound: a_min.to_f64_lossy() });
        }
        let a_max = self.abar.iter().copied().fold(T::neg_infinity(), T::max) + total;
        Ok((a_min, a_max))
    }

    /// `abar + sum_j y_j psi_j` at element midpoints.
    pub fn coefficient_at(&self, y: &ParamVector<T>) -> Result<Vec<T>> {
        if y.dims() != self.n_dims() {
            return Err(GpcError::DimensionMismatch { expected: self.n_dims(), got: y.dims() });
        }
        let mut field = self.abar.clone();
        for (psi, &yj) in self.psis.iter().zip(y.as_slice()) {
            for (f, &p) in field.iter_mut().zip(psi) {
                *f += yj * p;
            }
        }
        Ok(field)
    }

    /// One i.i.d. `Uniform(-1, 1)^J` draw from a generator seeded with `seed`.
    pub fn sample_prior(&self, seed: u64) -> ParamVector<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamVector<T> {
        sample_uniform_box(self.n_dims(), rng)
    }
}

/// `dims` i.i.d. `Uniform(-1, 1)` entries.
pub fn sample_uniform_box<T: Real, R: Rng + ?Sized>(dims: usize, rng: &mut R) -> ParamVector<T> {
    ParamVector {
        y: (0..dims).map(|_| T::lit(rng.random_range(-1.0..=1.0))).collect(),
    }
}

/// `n` consecutive prior draws from one seeded stream.
pub fn sample_prior_batch<T: Real>(dims: usize, n: usize, seed: u64) -> Vec<ParamVector<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample_uniform_box(dims, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh() -> Mesh1D<f64> {
        Mesh1D::uniform(16).unwrap()
    }

    #[test]
    fn build_single_term_scale() {
        let m = PriorModel::build(1, 1.0, 0.5, &mesh(), 1.0).unwrap();
        assert!((m.scale_c().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let mids = mesh().midpoints();
        for (v, x) in m.psis()[0].iter().zip(&mids) {
            assert!((v - (std::f64::consts::PI * x).sin() / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn build_two_term_scale() {
        let m = PriorModel::build(2, 1.0, 0.5, &mesh(), 1.0).unwrap();
        assert!((m.scale_c().unwrap() - 4.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn validate_built_model() {
        let m = PriorModel::build(1, 1.0, 0.5, &mesh(), 1.0).unwrap();
        let (a_min, a_max) = m.validate_uea().unwrap();
        assert!((a_min - 2.0 / 3.0).abs() < 1e-15);
        assert!((a_max - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn validate_constant_field() {
        let m = PriorModel::from_fields(vec![1.0; 8], vec![]).unwrap();
        assert_eq!(m.validate_uea().unwrap(), (1.0, 1.0));
    }

    #[test]
    fn validate_rejects_large_fluctuation() {
        let m = PriorModel::from_fields(vec![1.0; 8], vec![vec![1.5; 8]]).unwrap();
        assert!(matches!(m.validate_uea(), Err(GpcError::UeaViolation { element: 0, .. })));
    }

    #[test]
    fn build_rejects_bad_arguments() {
        assert!(PriorModel::build(0, 1.0, 0.5, &mesh(), 1.0).is_err());
        assert!(PriorModel::build(2, 0.0, 0.5, &mesh(), 1.0).is_err());
        assert!(PriorModel::build(2, 1.0, 1.0, &mesh(), 1.0).is_err());
        assert!(PriorModel::build(2, 1.0, 0.0, &mesh(), 1.0).is_err());
        assert!(PriorModel::build(2, 1.0, 0.5, &mesh(), -1.0).is_err());
    }

    #[test]
    fn coefficient_examples() {
        let m = PriorModel::build(1, 1.0, 0.5, &mesh(), 1.0).unwrap();
        assert_eq!(m.coefficient_at(&ParamVector::zeros(1)).unwrap(), m.abar());
        let up = m.coefficient_at(&ParamVector::new(vec![1.0]).unwrap()).unwrap();
        let down = m.coefficient_at(&ParamVector::new(vec![-1.0]).unwrap()).unwrap();
        for ((u, d), x) in up.iter().zip(&down).zip(mesh().midpoints()) {
            assert!((u - (1.0 + (std::f64::consts::PI * x).sin() / 3.0)).abs() < 1e-15);
            assert!(((u + d) / 2.0 - 1.0).abs() < 1e-15);
        }
        assert!(matches!(
            m.coefficient_at(&ParamVector::zeros(2)),
            Err(GpcError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sampling_is_deterministic_and_in_box() {
        let m = PriorModel::build(5, 2.0, 0.5, &mesh(), 1.0).unwrap();
        assert_eq!(m.sample_prior(7), m.sample_prior(7));
        assert_ne!(m.sample_prior(7), m.sample_prior(8));
        for y in sample_prior_batch::<f64>(5, 1000, 3) {
            assert!(y.as_slice().iter().all(|v| v.abs() <= 1.0));
        }
    }

    #[test]
    fn sample_mean_within_clt_bound() {
        let n = 100_000;
        let samples = sample_prior_batch::<f64>(3, n, 11);
        let bound = 3.0 * (1.0 / 3.0_f64).sqrt() / (n as f64).sqrt();
        for j in 0..3 {
            let mean = samples.iter().map(|y| y.as_slice()[j]).sum::<f64>() / n as f64;
            assert!(mean.abs() < bound, "coordinate {j} mean {mean} exceeds {bound}");
        }
    }

    #[test]
    fn larger_truncation_never_increases_scale() {
        let mut prev = f64::INFINITY;
        for j in 1..20 {
            let c = PriorModel::build(j, 1.5, 0.5, &mesh(), 1.0).unwrap().scale_c().unwrap();
            assert!(c <= prev);
            prev = c;
        }
    }

    #[test]
    fn fluctuation_bound_holds_as_built() {
        for j in [1, 3, 8, 40] {
            let m = PriorModel::build(j, 2.0, 0.5, &mesh(), 1.0).unwrap();
            let bound = 0.5 / 1.5 * m.abar_min();
            assert!(m.fluctuation_sum() <= bound * (1.0 + 4.0 * f64::EPSILON));
        }
    }
}
