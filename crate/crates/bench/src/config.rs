//! Flat `key = value` benchmark configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("invalid value for '{key}': {msg}")]
    Invalid { key: String, msg: String },
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub n_dims: usize,
    pub decay_b: f64,
    pub kappa: f64,
    pub abar: f64,
    pub mesh_elems: usize,
    pub n_obs: usize,
    pub obs_width: f64,
    pub gamma: f64,
    pub truth_seed: u64,
    pub noise_seed: u64,
    pub mc_seed: u64,
    pub n_list: Vec<usize>,
    pub m_list: Vec<usize>,
    pub mc_replicates: usize,
    pub mc_reference: usize,
    pub quad_nodes: usize,
    pub c_k: f64,
    pub candidate_factor: f64,
    pub density_samples: usize,
    pub legendre_terms: usize,
    pub sweep_j: Vec<usize>,
    pub sweep_n: usize,
    pub timing: bool,
    pub out_dir: PathBuf,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n_dims: 4,
            decay_b: 2.0,
            kappa: 0.5,
            abar: 1.0,
            mesh_elems: 64,
            n_obs: 3,
            obs_width: 0.2,
            gamma: 1e-3,
            truth_seed: 1,
            noise_seed: 2,
            mc_seed: 3,
            n_list: vec![8, 16, 32, 64, 128],
            m_list: vec![100, 400, 1600, 6400, 25600],
            mc_replicates: 20,
            mc_reference: 100_000,
            quad_nodes: 12,
            c_k: 2.0,
            candidate_factor: 4.0,
            density_samples: 10_000,
            legendre_terms: 3000,
            sweep_j: vec![1, 2, 4, 8, 16],
            sweep_n: 256,
            timing: false,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<usize>, ConfigError> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| {
            s.trim().parse::<usize>().map_err(|e| ConfigError::Invalid { key: key.into(), msg: e.to_string() })
        })
        .collect()
}

fn parse_num<F: std::str::FromStr>(key: &str, v: &str) -> Result<F, ConfigError>
where
    F::Err: std::fmt::Display,
{
    v.trim().parse::<F>().map_err(|e| ConfigError::Invalid { key: key.into(), msg: e.to_string() })
}

impl BenchConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Parse { line: i + 1, msg: format!("expected key = value, got '{line}'") })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "n_dims" | "J" => self.n_dims = parse_num(key, v)?,
            "decay_b" => self.decay_b = parse_num(key, v)?,
            "kappa" => self.kappa = parse_num(key, v)?,
            "abar" => self.abar = parse_num(key, v)?,
            "mesh_elems" => self.mesh_elems = parse_num(key, v)?,
            "n_obs" | "K_obs" => self.n_obs = parse_num(key, v)?,
            "obs_width" => self.obs_width = parse_num(key, v)?,
            "gamma" => self.gamma = parse_num(key, v)?,
            "truth_seed" => self.truth_seed = parse_num(key, v)?,
            "noise_seed" => self.noise_seed = parse_num(key, v)?,
            "mc_seed" => self.mc_seed = parse_num(key, v)?,
            "n_list" => self.n_list = parse_list(key, v)?,
            "m_list" => self.m_list = parse_list(key, v)?,
            "mc_replicates" => self.mc_replicates = parse_num(key, v)?,
            "mc_reference" => self.mc_reference = parse_num(key, v)?,
            "quad_nodes" => self.quad_nodes = parse_num(key, v)?,
            "c_k" => self.c_k = parse_num(key, v)?,
            "candidate_factor" => self.candidate_factor = parse_num(key, v)?,
            "density_samples" => self.density_samples = parse_num(key, v)?,
            "legendre_terms" => self.legendre_terms = parse_num(key, v)?,
            "sweep_j" => self.sweep_j = parse_list(key, v)?,
            "sweep_n" => self.sweep_n = parse_num(key, v)?,
            "timing" => self.timing = parse_num(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Applies the CLI `--seed`: truth, noise and Monte Carlo seeds become `seed`, `seed + 1`, `seed + 2`.
    pub fn reseed(&mut self, seed: u64) {
        self.truth_seed = seed;
        self.noise_seed = seed.wrapping_add(1);
        self.mc_seed = seed.wrapping_add(2);
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, msg: &str| Err(ConfigError::Invalid { key: key.into(), msg: msg.into() });
        for (key, v) in [
            ("n_dims", self.n_dims),
            ("mesh_elems", self.mesh_elems),
            ("n_obs", self.n_obs),
            ("mc_replicates", self.mc_replicates),
            ("mc_reference", self.mc_reference),
            ("quad_nodes", self.quad_nodes),
            ("density_samples", self.density_samples),
            ("legendre_terms", self.legendre_terms),
            ("sweep_n", self.sweep_n),
        ] {
            if v == 0 {
                return bad(key, "must be positive");
            }
        }
        if self.mesh_elems < 2 {
            return bad("mesh_elems", "must be at least 2");
        }
        for (key, list) in [("n_list", &self.n_list), ("m_list", &self.m_list), ("sweep_j", &self.sweep_j)] {
            if list.is_empty() {
                return bad(key, "must not be empty");
            }
            if list.contains(&0) {
                return bad(key, "entries must be positive");
            }
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return bad(key, "must be strictly increasing");
            }
        }
        if !(self.decay_b > 0.0) {
            return bad("decay_b", "must be positive");
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return bad("kappa", "must lie in (0, 1)");
        }
        if !(self.abar > 0.0) {
            return bad("abar", "must be positive");
        }
        if !(self.gamma > 0.0) {
            return bad("gamma", "must be positive");
        }
        if !(self.obs_width > 0.0 && self.obs_width * self.n_obs as f64 <= 1.0) {
            return bad("obs_width", "windows must have positive width and fit in (0, 1)");
        }
        if !(self.c_k > 0.0) {
            return bad("c_k", "must be positive");
        }
        if !(self.candidate_factor >= 1.0) {
            return bad("candidate_factor", "must be at least 1");
        }
        Ok(())
    }

    /// Canonical text of every key that affects results (the output directory does not).
    pub fn canonical_text(&self) -> String {
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "n_dims={}", self.n_dims);
        let _ = writeln!(s, "decay_b={:?}", self.decay_b);
        let _ = writeln!(s, "kappa={:?}", self.kappa);
        let _ = writeln!(s, "abar={:?}", self.abar);
        let _ = writeln!(s, "mesh_elems={}", self.mesh_elems);
        let _ = writeln!(s, "n_obs={}", self.n_obs);
        let _ = writeln!(s, "obs_width={:?}", self.obs_width);
        let _ = writeln!(s, "gamma={:?}", self.gamma);
        let _ = writeln!(s, "truth_seed={}", self.truth_seed);
        let _ = writeln!(s, "noise_seed={}", self.noise_seed);
        let _ = writeln!(s, "mc_seed={}", self.mc_seed);
        let _ = writeln!(s, "n_list={}", list(&self.n_list));
        let _ = writeln!(s, "m_list={}", list(&self.m_list));
        let _ = writeln!(s, "mc_replicates={}", self.mc_replicates);
        let _ = writeln!(s, "mc_reference={}", self.mc_reference);
        let _ = writeln!(s, "quad_nodes={}", self.quad_nodes);
        let _ = writeln!(s, "c_k={:?}", self.c_k);
        let _ = writeln!(s, "candidate_factor={:?}", self.candidate_factor);
        let _ = writeln!(s, "density_samples={}", self.density_samples);
        let _ = writeln!(s, "legendre_terms={}", self.legendre_terms);
        let _ = writeln!(s, "sweep_j={}", list(&self.sweep_j));
        let _ = writeln!(s, "sweep_n={}", self.sweep_n);
        let _ = writeln!(s, "timing={}", self.timing);
        s
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical_text`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_file() {
        let mut c = BenchConfig::default();
        c.apply_text("# comment\nJ = 2\nn_list = 4, 8,16\ngamma=1e-3 # trailing\n\ntiming = true\n").unwrap();
        assert_eq!(c.n_dims, 2);
        assert_eq!(c.n_list, vec![4, 8, 16]);
        assert_eq!(c.gamma, 1e-3);
        assert!(c.timing);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_malformed_lines_and_keys() {
        let mut c = BenchConfig::default();
        assert!(matches!(c.apply_text("J 2"), Err(ConfigError::Parse { line: 1, .. })));
        assert!(matches!(c.apply_text("nope = 1"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(c.apply_text("J = two"), Err(ConfigError::Invalid { .. })));
    }

    #[test]
    fn validation_catches_bad_lists() {
        let mut c = BenchConfig::default();
        c.m_list.clear();
        assert!(c.validate().is_err());
        let c = BenchConfig { n_list: vec![8, 8], ..BenchConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = BenchConfig::default();
        let mut b = a.clone();
        b.out_dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.gamma *= 2.0;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
