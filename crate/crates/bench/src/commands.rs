//! The `forward`, `converge` and `cost-compare` subcommands.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use gpc_core::{
    fit_decay_rate, legendre_from_taylor, mc_posterior, quadrature_oracle, taylor_forward, AffineOperatorFamily,
    GpcError, Mesh1D, ObservationSetup, ParamVector, PosteriorSummary, PriorModel,
};

use crate::config::{BenchConfig, ConfigError};
use crate::problem::{density_l1_error, relative_error, relative_l2, Benchmark};

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(#[from] GpcError),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("check failed: {0}")]
    Check(String),
}

impl CommandError {
    /// 1 for numeric failures, 2 for usage, configuration and i/o problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numeric(_) | Self::Check(_) => 1,
            Self::Config(_) | Self::Io(_) => 2,
        }
    }
}

pub type CmdResult<T> = std::result::Result<T, CommandError>;

/// Mesh sizes of the finite-element self check.
pub const SELF_CHECK_MESHES: [usize; 4] = [16, 32, 64, 128];
/// Admissible band for the fitted h-convergence slope.
pub const SELF_CHECK_SLOPE: (f64, f64) = (1.8, 2.2);

struct Csv {
    out: BufWriter<File>,
    hash: String,
}

impl Csv {
    fn create(dir: &Path, name: &str, header: &str, hash: &str) -> CmdResult<Self> {
        let mut out = BufWriter::new(File::create(dir.join(name))?);
        writeln!(out, "{header},config_hash")?;
        Ok(Self { out, hash: hash.to_string() })
    }

    fn row(&mut self, fields: &[String]) -> CmdResult<()> {
        writeln!(self.out, "{},{}", fields.join(","), self.hash)?;
        Ok(())
    }

    fn finish(mut self) -> CmdResult<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Writes a CSV produced by `body` with a trailing `config_hash` column.
fn write_hashed(
    dir: &Path,
    name: &str,
    hash: &str,
    body: impl FnOnce(&mut Vec<u8>) -> io::Result<()>,
) -> CmdResult<()> {
    let mut buf = Vec::new();
    body(&mut buf)?;
    let text = String::from_utf8(buf).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let mut out = BufWriter::new(File::create(dir.join(name))?);
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            writeln!(out, "{line},config_hash")?;
        } else {
            writeln!(out, "{line},{hash}")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn e(v: f64) -> String {
    format!("{v:.12e}")
}

fn prepare(cfg: &BenchConfig) -> CmdResult<PathBuf> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)?;
    Ok(cfg.out_dir.clone())
}

/// Max error of the P1 solution for `u = 1, f = 1` against `x(1-x)/2`, sampled
/// at nodes and element midpoints.
pub fn fem_max_error(n_elems: usize) -> gpc_core::Result<f64> {
    let mesh = Mesh1D::uniform(n_elems)?;
    let model = PriorModel::from_fields(vec![1.0; n_elems], vec![])?;
    let fam = AffineOperatorFamily::assemble(&model, &mesh, |_| 1.0)?;
    let p = mesh.with_boundary(&fam.solve_at(&ParamVector::zeros(0))?);
    let exact = |x: f64| x * (1.0 - x) / 2.0;
    let mut err: f64 = 0.0;
    for (i, &x) in mesh.nodes().iter().enumerate() {
        err = err.max((p[i] - exact(x)).abs());
    }
    for (e, &xm) in mesh.midpoints().iter().enumerate() {
        err = err.max((0.5 * (p[e] + p[e + 1]) - exact(xm)).abs());
    }
    Ok(err)
}

/// `(n_elems, max_error)` rows and the fitted slope against `h`.
pub fn fem_self_check() -> gpc_core::Result<(Vec<(usize, f64)>, f64)> {
    let rows: Vec<(usize, f64)> =
        SELF_CHECK_MESHES.iter().map(|&n| fem_max_error(n).map(|e| (n, e))).collect::<gpc_core::Result<_>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(n, e)| (1.0 / n as f64, e)).collect();
    Ok((rows, fit_decay_rate(&pts)?))
}

pub fn cmd_forward(cfg: &BenchConfig, self_check: bool) -> CmdResult<()> {
    let dir = prepare(cfg)?;
    let hash = cfg.hash();
    let bench = Benchmark::new(cfg)?;
    let y0 = ParamVector::zeros(bench.n_dims());
    let ys = bench.model.sample_prior(cfg.mc_seed);
    let p0 = bench.fam.solve_at(&y0)?;
    let ps = bench.fam.solve_at(&ys)?;

    let mut sol = Csv::create(&dir, "solution.csv", "node,x,p_y0,p_sample", &hash)?;
    let (full0, fulls) = (bench.mesh.with_boundary(&p0), bench.mesh.with_boundary(&ps));
    for (i, &x) in bench.mesh.nodes().iter().enumerate() {
        sol.row(&[i.to_string(), format!("{x:.6}"), e(full0[i]), e(fulls[i])])?;
    }
    sol.finish()?;

    let (o0, os) = (bench.setup.observe(&bench.mesh, &p0), bench.setup.observe(&bench.mesh, &ps));
    let mut obs = Csv::create(&dir, "observations.csv", "k,window_lo,window_hi,obs_y0,obs_sample,delta,gamma", &hash)?;
    for (k, &(lo, hi)) in bench.setup.windows().iter().enumerate() {
        obs.row(&[
            k.to_string(),
            format!("{lo:.6}"),
            format!("{hi:.6}"),
            e(o0[k]),
            e(os[k]),
            e(bench.setup.delta()[k]),
            e(bench.setup.gamma()[k]),
        ])?;
    }
    obs.finish()?;
    println!("forward: J = {}, {} elements, p(y=0) max = {:.6e}", bench.n_dims(), cfg.mesh_elems, p0.iter().cloned().fold(0.0, f64::max));

    if self_check {
        let (rows, slope) = fem_self_check()?;
        let mut sc = Csv::create(&dir, "self_check.csv", "n_elems,h,max_error", &hash)?;
        for &(n, err) in &rows {
            sc.row(&[n.to_string(), e(1.0 / n as f64), e(err)])?;
        }
        sc.finish()?;
        println!("self-check: h-convergence slope = {slope:.4}");
        if !(slope >= SELF_CHECK_SLOPE.0 && slope <= SELF_CHECK_SLOPE.1) {
            return Err(CommandError::Check(format!("h-convergence slope {slope:.4} outside {SELF_CHECK_SLOPE:?}")));
        }
    }
    Ok(())
}

/// Reference posterior: tensor quadrature for small J, otherwise a large Monte Carlo run.
pub fn reference_summary(bench: &Benchmark, cfg: &BenchConfig) -> CmdResult<PosteriorSummary<f64>> {
    if bench.n_dims() <= gpc_core::expectation::QUADRATURE_MAX_DIMS {
        Ok(quadrature_oracle(&bench.setup, &bench.fam, cfg.quad_nodes)?)
    } else {
        Ok(mc_posterior(&bench.setup, &bench.fam, &bench.model, cfg.mc_reference, cfg.mc_seed ^ 0xabcdef)?)
    }
}

/// Root-sum-square tails `(sum_{n > N} gamma_n^2)^{1/2}` of the sorted Legendre
/// coefficient norms of the forward map (energy norm), for each `N` in `ns`.
pub fn legendre_tail(bench: &Benchmark, terms: usize, ns: &[usize]) -> gpc_core::Result<Vec<(usize, f64)>> {
    let cand = bench.candidate_set(terms)?;
    let taylor = taylor_forward(&bench.fam, &cand)?;
    let leg = legendre_from_taylor(&taylor, &cand)?;
    let norms: Vec<f64> = leg.sorted_norms_by(|c| bench.fam.energy_norm(c)).into_iter().map(|(_, v)| v).collect();
    let mut suffix = vec![0.0; norms.len() + 1];
    for i in (0..norms.len()).rev() {
        suffix[i] = suffix[i + 1] + norms[i] * norms[i];
    }
    Ok(ns.iter().map(|&n| (n, suffix[n.min(norms.len())].sqrt())).collect())
}

/// One row of `rates.csv` plus the density errors.
#[derive(Clone, Debug)]
pub struct RateRow {
    pub n: usize,
    pub k_n: usize,
    pub support_theta: usize,
    pub err_z: f64,
    pub err_mean_l2: f64,
    pub dropped_mass: f64,
    pub wall_time: f64,
    pub density_l1: f64,
    pub density_sup: f64,
    pub surrogate_bound: f64,
    pub backsolves: usize,
}

#[derive(Clone, Debug)]
pub struct ConvergeReport {
    pub rows: Vec<RateRow>,
    pub legendre: Vec<(usize, f64)>,
    pub slope_err_z: f64,
    pub slope_err_mean: f64,
    pub slope_density_l1: f64,
    pub slope_legendre: f64,
}

fn slope_of(points: impl Iterator<Item = (usize, f64)>) -> f64 {
    let pts: Vec<(f64, f64)> = points.map(|(n, v)| (n as f64, v)).collect();
    fit_decay_rate(&pts).unwrap_or(f64::NAN)
}

/// Convergence study over `cfg.n_list`.
pub fn run_converge(cfg: &BenchConfig) -> CmdResult<ConvergeReport> {
    cfg.validate()?;
    let bench = Benchmark::new(cfg)?;
    let reference = reference_summary(&bench, cfg)?;
    let sample = bench.density_sample(cfg.density_samples);
    let exact = bench.theta_on(&sample)?;
    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let t0 = Instant::now();
        let run = bench.gpc_run(n, cfg)?;
        let wall = t0.elapsed().as_secs_f64();
        let density_sup = sample
            .iter()
            .zip(&exact)
            .map(|(y, &t)| (t - run.posterior.evaluate(y.as_slice())).abs())
            .fold(0.0, f64::max);
        rows.push(RateRow {
            n,
            k_n: run.posterior.k_terms,
            support_theta: run.posterior.theta_series.len(),
            err_z: relative_error(run.summary.z, reference.z),
            err_mean_l2: relative_l2(&run.summary.mean_field, &reference.mean_field),
            dropped_mass: run.posterior.total_dropped_mass(),
            wall_time: if cfg.timing { wall } else { 0.0 },
            density_l1: density_l1_error(&run.posterior, &sample, &exact),
            density_sup,
            surrogate_bound: run.posterior.surrogate_error_bound,
            backsolves: run.forward.backsolves,
        });
    }
    let legendre = legendre_tail(&bench, cfg.legendre_terms, &cfg.n_list)?;
    Ok(ConvergeReport {
        slope_err_z: slope_of(rows.iter().map(|r| (r.n, r.err_z))),
        slope_err_mean: slope_of(rows.iter().map(|r| (r.n, r.err_mean_l2))),
        slope_density_l1: slope_of(rows.iter().map(|r| (r.n, r.density_l1))),
        slope_legendre: slope_of(legendre.iter().copied()),
        rows,
        legendre,
    })
}

/// Error of the J-truncated posterior against the full `max(sweep_j)`-dimensional one,
/// all at budget `sweep_n`, with data generated by the full model.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub j: usize,
    pub err_z: f64,
    pub err_mean_l2: f64,
    pub fluctuation_tail: f64,
}

pub fn run_sweep_j(cfg: &BenchConfig) -> CmdResult<Vec<SweepRow>> {
    cfg.validate()?;
    let j_full = *cfg.sweep_j.last().expect("validated non-empty");
    let full = Benchmark::with_dims(cfg, j_full)?;
    let reference = full.gpc_run(cfg.sweep_n, cfg)?.summary;
    let sup = full.model.psi_sup().to_vec();
    let mut rows = Vec::new();
    for &j in &cfg.sweep_j {
        let bench = full.truncated(j)?;
        let s = bench.gpc_run(cfg.sweep_n, cfg)?.summary;
        rows.push(SweepRow {
            j,
            err_z: relative_error(s.z, reference.z),
            err_mean_l2: relative_l2(&s.mean_field, &reference.mean_field),
            fluctuation_tail: sup[j..].iter().fold(0.0, |a, b| a + b),
        });
    }
    Ok(rows)
}

pub fn cmd_converge(cfg: &BenchConfig, sweep_j: bool) -> CmdResult<()> {
    let dir = prepare(cfg)?;
    let hash = cfg.hash();
    let report = run_converge(cfg)?;
    let mut rates = Csv::create(&dir, "rates.csv", "N,K_N,support_theta,err_Z,err_mean_L2,dropped_mass,wall_time", &hash)?;
    let mut dens = Csv::create(&dir, "density.csv", "N,backsolves,l1_error,sup_error,surrogate_bound", &hash)?;
    for r in &report.rows {
        rates.row(&[
            r.n.to_string(),
            r.k_n.to_string(),
            r.support_theta.to_string(),
            e(r.err_z),
            e(r.err_mean_l2),
            e(r.dropped_mass),
            format!("{:.6}", r.wall_time),
        ])?;
        dens.row(&[r.n.to_string(), r.backsolves.to_string(), e(r.density_l1), e(r.density_sup), e(r.surrogate_bound)])?;
    }
    rates.finish()?;
    dens.finish()?;
    let mut leg = Csv::create(&dir, "legendre_tail.csv", "N,tail_l2", &hash)?;
    for &(n, t) in &report.legendre {
        leg.row(&[n.to_string(), e(t)])?;
    }
    leg.finish()?;

    // Artifacts for the largest budget.
    let bench = Benchmark::new(cfg)?;
    let n_max = *cfg.n_list.last().expect("validated non-empty");
    let run = bench.gpc_run(n_max, cfg)?;
    write_hashed(&dir, "theta_terms.csv", &hash, |w| run.posterior.write_terms_csv(w))?;
    write_hashed(&dir, "theta_diagnostics.csv", &hash, |w| run.posterior.write_diagnostics_csv(w))?;
    write_hashed(&dir, "forward_coefficients.csv", &hash, |w| {
        run.forward.series.write_norm_csv(w, |c| bench.fam.energy_norm(c))
    })?;
    let reference = reference_summary(&bench, cfg)?;
    write_hashed(&dir, "summary.csv", &hash, |w| {
        reference.write_csv(w, bench.mesh.interior_nodes(), true)?;
        run.summary.write_csv(w, bench.mesh.interior_nodes(), false)
    })?;

    println!("converge: J = {}, b = {}, mesh = {} elements", cfg.n_dims, cfg.decay_b, cfg.mesh_elems);
    for r in &report.rows {
        println!(
            "  N = {:>5}  K = {:>2}  |Theta_N| = {:>5}  err_Z = {:.3e}  err_mean = {:.3e}  L1(Theta) = {:.3e}",
            r.n, r.k_n, r.support_theta, r.err_z, r.err_mean_l2, r.density_l1
        );
    }
    println!("  slope err_Z           = {:.3}", report.slope_err_z);
    println!("  slope err_mean_L2     = {:.3}", report.slope_err_mean);
    println!("  slope density L1      = {:.3}", report.slope_density_l1);
    println!("  slope Legendre L2 tail = {:.3}", report.slope_legendre);

    if sweep_j {
        let rows = run_sweep_j(cfg)?;
        let mut sw = Csv::create(&dir, "sweep_j.csv", "J,err_Z,err_mean_L2,fluctuation_tail", &hash)?;
        for r in &rows {
            sw.row(&[r.j.to_string(), e(r.err_z), e(r.err_mean_l2), e(r.fluctuation_tail)])?;
        }
        sw.finish()?;
        let fit: Vec<(usize, f64)> = rows.iter().filter(|r| r.err_z > 0.0).map(|r| (r.j, r.err_z)).collect();
        println!("  sweep-J slope err_Z vs J = {:.3} (fluctuation tail decays like J^-{})", slope_of(fit.into_iter()), cfg.decay_b);
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct CostRow {
    pub method: &'static str,
    pub work_units: usize,
    pub error: f64,
}

#[derive(Clone, Debug)]
pub struct CostReport {
    pub rows: Vec<CostRow>,
    pub slope_mc: f64,
    pub slope_gpc: f64,
    /// Work at which the fitted log-log lines cross, if they do.
    pub crossover_work: Option<f64>,
}

/// Relative error in `Z` per unit work: MC (RMS over replicates, work = forward solves)
/// against gpc (work = `A_0` backsolves).
pub fn run_cost_compare(cfg: &BenchConfig) -> CmdResult<CostReport> {
    cfg.validate()?;
    let bench = Benchmark::new(cfg)?;
    let reference = reference_summary(&bench, cfg)?;
    let mut rows = Vec::new();
    for &m in &cfg.m_list {
        let mut sq = 0.0;
        for r in 0..cfg.mc_replicates {
            let seed = cfg.mc_seed.wrapping_mul(1_000_003).wrapping_add((m as u64) << 20).wrapping_add(r as u64);
            let s = mc_posterior(&bench.setup, &bench.fam, &bench.model, m, seed)?;
            sq += relative_error(s.z, reference.z).powi(2);
        }
        rows.push(CostRow { method: "mc", work_units: m, error: (sq / cfg.mc_replicates as f64).sqrt() });
    }
    for &n in &cfg.n_list {
        let run = bench.gpc_run(n, cfg)?;
        rows.push(CostRow { method: "gpc", work_units: run.forward.backsolves, error: relative_error(run.summary.z, reference.z) });
    }
    let fit = |method: &str| -> Option<(f64, f64)> {
        let pts: Vec<(f64, f64)> =
            rows.iter().filter(|r| r.method == method && r.error > 0.0).map(|r| (r.work_units as f64, r.error)).collect();
        let slope = fit_decay_rate(&pts).ok()?;
        let m = pts.len() as f64;
        let icpt = pts.iter().map(|p| p.1.ln() - slope * p.0.ln()).sum::<f64>() / m;
        Some((slope, icpt))
    };
    let mc = fit("mc");
    let gpc = fit("gpc");
    let crossover_work = match (mc, gpc) {
        (Some((sm, am)), Some((sg, ag))) if sm != sg => {
            let w = ((ag - am) / (sm - sg)).exp();
            w.is_finite().then_some(w)
        }
        _ => None,
    };
    Ok(CostReport {
        slope_mc: mc.map_or(f64::NAN, |f| f.0),
        slope_gpc: gpc.map_or(f64::NAN, |f| f.0),
        crossover_work,
        rows,
    })
}

pub fn cmd_cost_compare(cfg: &BenchConfig) -> CmdResult<()> {
    let dir = prepare(cfg)?;
    let hash = cfg.hash();
    let report = run_cost_compare(cfg)?;
    let mut csv = Csv::create(&dir, "cost.csv", "method,work_units,error", &hash)?;
    for r in &report.rows {
        csv.row(&[r.method.to_string(), r.work_units.to_string(), e(r.error)])?;
    }
    csv.finish()?;
    println!("cost-compare: J = {}, b = {}", cfg.n_dims, cfg.decay_b);
    for r in &report.rows {
        println!("  {:>4}  work = {:>7}  error = {:.3e}", r.method, r.work_units, r.error);
    }
    println!("  slope mc  = {:.3}", report.slope_mc);
    println!("  slope gpc = {:.3}", report.slope_gpc);
    match report.crossover_work {
        Some(w) => println!("  fitted crossover at ~{w:.1} work units"),
        None => println!("  no crossover of the fitted lines"),
    }
    Ok(())
}

/// Observation setup of a benchmark, exposed for tests.
pub fn benchmark_setup(cfg: &BenchConfig) -> CmdResult<ObservationSetup<f64>> {
    Ok(Benchmark::new(cfg)?.setup)
}
