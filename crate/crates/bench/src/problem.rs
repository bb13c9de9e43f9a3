//! Benchmark problem assembly and the gpc pipeline for one truncation budget.

use gpc_core::expectation::posterior_summary_semianalytic;
use gpc_core::posterior::{observe_series, theta_series};
use gpc_core::prior::sample_prior_batch;
use gpc_core::{
    total_degree_set, AffineOperatorFamily, ForwardExpansion, Mesh1D, MonotoneSet, ObservationSetup,
    ParamVector, PosteriorApprox, PosteriorSummary, PriorModel, Result, VectorSeries,
};

use crate::config::BenchConfig;

/// Seed offset for the fixed evaluation sample used by density-error estimates.
const DENSITY_SAMPLE_SEED: u64 = 0x5eed_0001;

/// Upper bound on candidate-set size.
const CANDIDATE_CAP: usize = 500_000;

#[derive(Clone, Debug)]
pub struct Benchmark {
    pub mesh: Mesh1D<f64>,
    pub model: PriorModel<f64>,
    pub fam: AffineOperatorFamily<f64>,
    pub setup: ObservationSetup<f64>,
    pub y_truth: ParamVector<f64>,
}

/// Everything the gpc route produces for one budget `N`.
#[derive(Clone, Debug)]
pub struct GpcRun {
    pub n: usize,
    pub forward: ForwardExpansion<f64>,
    pub observation: VectorSeries<f64>,
    pub posterior: PosteriorApprox<f64>,
    pub summary: PosteriorSummary<f64>,
}

impl Benchmark {
    /// Builds prior, operators and synthetic data for the configured `n_dims`.
    pub fn new(cfg: &BenchConfig) -> Result<Self> {
        Self::with_dims(cfg, cfg.n_dims)
    }

    pub fn with_dims(cfg: &BenchConfig, dims: usize) -> Result<Self> {
        let mesh = Mesh1D::uniform(cfg.mesh_elems)?;
        let model = PriorModel::build(dims, cfg.decay_b, cfg.kappa, &mesh, cfg.abar)?;
        let fam = AffineOperatorFamily::assemble(&model, &mesh, |_| 1.0)?;
        let template = ObservationSetup::evenly_spaced(cfg.n_obs, cfg.obs_width, cfg.gamma)?;
        let y_truth = model.sample_prior(cfg.truth_seed);
        let setup = template.synthesize(&fam, &y_truth, cfg.noise_seed)?;
        Ok(Self { mesh, model, fam, setup, y_truth })
    }

    /// The same problem and data with the prior cut to its first `dims` modes.
    pub fn truncated(&self, dims: usize) -> Result<Self> {
        let model = self.model.truncated(dims)?;
        let fam = AffineOperatorFamily::assemble(&model, &self.mesh, |_| 1.0)?;
        Ok(Self { mesh: self.mesh.clone(), model, fam, setup: self.setup.clone(), y_truth: self.y_truth.clone() })
    }

    pub fn n_dims(&self) -> usize {
        self.model.n_dims()
    }

    /// Anisotropic total-degree weights from the fluctuation sizes:
    /// `w_j = ln(abar_min / ||psi_j||) / ln(abar_min / ||psi_1||)`, at least 1.
    pub fn anisotropy_weights(&self) -> Vec<f64> {
        let amin = self.model.abar_min();
        let rate = |s: f64| if s > 0.0 { (amin / s).ln() } else { f64::INFINITY };
        let base = rate(self.model.psi_sup()[0]).max(f64::MIN_POSITIVE);
        self.model.psi_sup().iter().map(|&s| (rate(s) / base).clamp(1.0, 1e6)).collect()
    }

    /// Smallest anisotropic total-degree set with at least `target` members.
    pub fn candidate_set(&self, target: usize) -> Result<MonotoneSet> {
        let w = self.anisotropy_weights();
        let mut degree = 0.0;
        loop {
            let set = total_degree_set(self.n_dims(), degree, &w, CANDIDATE_CAP)?;
            if set.len() >= target {
                return Ok(set);
            }
            degree += 0.25;
        }
    }

    /// Forward gpc set for budget `n`: total-degree candidates, trimmed to the `n`
    /// largest energy-norm coefficients, closed downward.
    pub fn forward(&self, n: usize, candidate_factor: f64) -> Result<ForwardExpansion<f64>> {
        let target = ((n as f64) * candidate_factor).ceil() as usize;
        let cand = self.candidate_set(target.max(n))?;
        gpc_core::trimmed_forward_expansion(&self.fam, &cand, n)
    }

    pub fn gpc_run(&self, n: usize, cfg: &BenchConfig) -> Result<GpcRun> {
        let forward = self.forward(n, cfg.candidate_factor)?;
        let observation = observe_series(&self.setup, &self.mesh, &forward.series);
        let posterior = theta_series(&observation, &self.setup, n, cfg.c_k)?;
        let summary = posterior_summary_semianalytic(&posterior, &forward.series, n)?;
        Ok(GpcRun { n, forward, observation, posterior, summary })
    }

    /// Fixed prior sample used for density error estimates.
    pub fn density_sample(&self, count: usize) -> Vec<ParamVector<f64>> {
        sample_prior_batch(self.n_dims(), count, DENSITY_SAMPLE_SEED)
    }

    /// Exact `Theta` on a sample.
    pub fn theta_on(&self, sample: &[ParamVector<f64>]) -> Result<Vec<f64>> {
        sample.iter().map(|y| gpc_core::theta_exact(&self.setup, &self.fam, y)).collect()
    }
}

/// Monte Carlo estimate of `||Theta - Theta_N||_{L1(mu_0)}` on a fixed sample.
pub fn density_l1_error(pa: &PosteriorApprox<f64>, sample: &[ParamVector<f64>], exact: &[f64]) -> f64 {
    let total: f64 = sample.iter().zip(exact).map(|(y, &t)| (t - pa.evaluate(y.as_slice())).abs()).sum();
    total / sample.len() as f64
}

/// Relative discrete L2 distance `||a - b|| / ||b||` on grid vectors.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}


