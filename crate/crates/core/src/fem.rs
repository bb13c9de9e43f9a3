//! Piecewise-linear finite elements for `-(u p')' = f` on `(0, 1)` with homogeneous
//! Dirichlet conditions, the affine operator decomposition `A(y) = A_0 + sum_j y_j A_j`,
//! and window-average observations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{GpcError, Result};
use crate::prior::{ParamVector, PriorModel};
use crate::scalar::{dot, Real};

/// Uniform mesh of `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh1D<T: Real> {
    nodes: Vec<T>,
}

impl<T: Real> Mesh1D<T> {
    pub fn uniform(n_elems: usize) -> Result<Self> {
        if n_elems < 2 {
            return Err(GpcError::InvalidArgument(format!("mesh needs at least 2 elements, got {n_elems}")));
        }
        let n = T::from_usize_lossy(n_elems);
        let mut nodes: Vec<T> = (0..=n_elems).map(|i| T::from_usize_lossy(i) / n).collect();
        nodes[n_elems] = T::one();
        Ok(Self { nodes })
    }

    pub fn n_elems(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Number of interior (free) nodes.
    pub fn n_dofs(&self) -> usize {
        self.nodes.len() - 2
    }

    pub fn h(&self) -> T {
        T::one() / T::from_usize_lossy(self.n_elems())
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn interior_nodes(&self) -> &[T] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn midpoints(&self) -> Vec<T> {
        let half = T::lit(0.5);
        self.nodes.windows(2).map(|w| half * (w[0] + w[1])).collect()
    }

    /// Stiffness matrix of the Laplacian (`u = 1`); its energy norm is the discrete
    /// `H^1_0` norm on the finite-element space.
    pub fn laplace_stiffness(&self) -> SymTridiagonal<T> {
        SymTridiagonal::stiffness(&vec![T::one(); self.n_elems()], self.h())
    }

    /// `||p||_V = sqrt(p^T K p)` with `K` the Laplace stiffness.
    pub fn v_norm(&self, p: &[T]) -> T {
        self.laplace_stiffness().quad_form(p).max(T::zero()).sqrt()
    }

    /// Dual norm of a load functional `g`: `sqrt(g^T K^{-1} g)`.
    pub fn dual_norm(&self, g: &[T]) -> Result<T> {
        let k = self.laplace_stiffness().factor()?;
        Ok(dot(g, &k.solve(g)).max(T::zero()).sqrt())
    }

    /// Nodal vector with the two Dirichlet zeros attached.
    pub fn with_boundary(&self, p: &[T]) -> Vec<T> {
        let mut full = Vec::with_capacity(p.len() + 2);
        full.push(T::zero());
        full.extend_from_slice(p);
        full.push(T::zero());
        full
    }
}

/// Symmetric tridiagonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiagonal<T: Real> {
    diag: Vec<T>,
    off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn zeros(n: usize) -> Self {
        Self { diag: vec![T::zero(); n], off: vec![T::zero(); n.saturating_sub(1)] }
    }

    pub fn new(diag: Vec<T>, off: Vec<T>) -> Result<Self> {
        if off.len() + 1 != diag.len() {
            return Err(GpcError::DimensionMismatch { expected: diag.len().saturating_sub(1), got: off.len() });
        }
        Ok(Self { diag, off })
    }

    /// P1 stiffness for element-wise constant coefficient `c` on a uniform mesh.
    pub fn stiffness(c: &[T], h: T) -> Self {
        let n = c.len() - 1;
        let diag = (0..n).map(|i| (c[i] + c[i + 1]) / h).collect();
        let off = (0..n.saturating_sub(1)).map(|i| -c[i + 1] / h).collect();
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn off(&self) -> &[T] {
        &self.off
    }

    pub fn is_zero(&self) -> bool {
        self.diag.iter().chain(&self.off).all(|v| *v == T::zero())
    }

    pub fn add_scaled(&mut self, other: &Self, s: T) {
        for (a, b) in self.diag.iter_mut().zip(&other.diag) {
            *a += s * *b;
        }
        for (a, b) in self.off.iter_mut().zip(&other.off) {
            *a += s * *b;
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); x.len()];
        self.matvec_acc(x, T::one(), &mut out);
        out
    }

    /// `out += s * A x`.
    pub fn matvec_acc(&self, x: &[T], s: T, out: &mut [T]) {
        let n = self.diag.len();
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            out[i] += s * v;
        }
    }

    pub fn quad_form(&self, x: &[T]) -> T {
        dot(x, &self.matvec(x))
    }

    /// `LDL^T` factorization; fails on a non-positive pivot.
    pub fn factor(&self) -> Result<LdlFactor<T>> {
        let n = self.diag.len();
        let mut d = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let mut pivot = self.diag[i];
            if i > 0 {
                let li = self.off[i - 1] / d[i - 1];
                pivot -= li * self.off[i - 1];
                l.push(li);
            }
            if !(pivot > T::zero()) {
                return Err(GpcError::NotPositiveDefinite { row: i, pivot: pivot.to_f64_lossy() });
            }
            d.push(pivot);
        }
        Ok(LdlFactor { d, l })
    }
}

/// `A = L D L^T` with unit lower bidiagonal `L`.
#[derive(Clone, Debug)]
pub struct LdlFactor<T: Real> {
    d: Vec<T>,
    l: Vec<T>,
}

impl<T: Real> LdlFactor<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = self.d.len();
        for i in 1..n {
            let prev = x[i - 1];
            x[i] -= self.l[i - 1] * prev;
        }
        for (xi, &di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let next = x[i + 1];
            x[i] -= self.l[i] * next;
        }
    }
}

/// Stiffness matrices `A_0, A_1, ..., A_J` and the load vector.
#[derive(Clone, Debug)]
pub struct AffineOperatorFamily<T: Real> {
    mesh: Mesh1D<T>,
    a0: SymTridiagonal<T>,
    a0_factor: LdlFactor<T>,
    ajs: Vec<SymTridiagonal<T>>,
    load: Vec<T>,
    a_min: T,
    a_max: T,
}

impl<T: Real> AffineOperatorFamily<T> {
    /// Assembles the family from a validated prior and a source term `f` (midpoint quadrature).
    pub fn assemble(model: &PriorModel<T>, mesh: &Mesh1D<T>, f: impl Fn(T) -> T) -> Result<Self> {
        if model.n_elems() != mesh.n_elems() {
            return Err(GpcError::DimensionMismatch { expected: mesh.n_elems(), got: model.n_elems() });
        }
        let (a_min, a_max) = model.validate_uea()?;
        let h = mesh.h();
        let a0 = SymTridiagonal::stiffness(model.abar(), h);
        let ajs = model.psis().iter().map(|psi| SymTridiagonal::stiffness(psi, h)).collect();
        let half_h = T::lit(0.5) * h;
        let mut full = vec![T::zero(); mesh.n_elems() + 1];
        for (e, &xm) in mesh.midpoints().iter().enumerate() {
            let fe = f(xm) * half_h;
            full[e] += fe;
            full[e + 1] += fe;
        }
        let load = full[1..mesh.n_elems()].to_vec();
        let a0_factor = a0.factor()?;
        Ok(Self { mesh: mesh.clone(), a0, a0_factor, ajs, load, a_min, a_max })
    }

    pub fn mesh(&self) -> &Mesh1D<T> {
        &self.mesh
    }

    pub fn n_dims(&self) -> usize {
        self.ajs.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.load.len()
    }

    pub fn a0(&self) -> &SymTridiagonal<T> {
        &self.a0
    }

    pub fn a0_factor(&self) -> &LdlFactor<T> {
        &self.a0_factor
    }

    pub fn ajs(&self) -> &[SymTridiagonal<T>] {
        &self.ajs
    }

    pub fn load(&self) -> &[T] {
        &self.load
    }

    /// Certified ellipticity bounds of the underlying prior.
    pub fn bounds(&self) -> (T, T) {
        (self.a_min, self.a_max)
    }

    /// `A(y) = A_0 + sum_j y_j A_j`.
    pub fn operator_at(&self, y: &ParamVector<T>) -> Result<SymTridiagonal<T>> {
        if y.dims() != self.n_dims() {
            return Err(GpcError::DimensionMismatch { expected: self.n_dims(), got: y.dims() });
        }
        let mut a = self.a0.clone();
        for (aj, &yj) in self.ajs.iter().zip(y.as_slice()) {
            if yj != T::zero() {
                a.add_scaled(aj, yj);
            }
        }
        Ok(a)
    }

    /// Interior nodal values of the solution of `A(y) p = load`.
    pub fn solve_at(&self, y: &ParamVector<T>) -> Result<Vec<T>> {
        Ok(self.operator_at(y)?.factor()?.solve(&self.load))
    }

    /// Energy norm `sqrt(p^T A_0 p)`.
    pub fn energy_norm(&self, p: &[T]) -> T {
        self.a0.quad_form(p).max(T::zero()).sqrt()
    }
}

/// Observation windows, data and diagonal noise covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationSetup<T: Real> {
    windows: Vec<(T, T)>,
    delta: Vec<T>,
    gamma: Vec<T>,
    y_truth: Option<Vec<T>>,
}

impl<T: Real> ObservationSetup<T> {
    pub fn new(windows: Vec<(T, T)>, delta: Vec<T>, gamma: Vec<T>) -> Result<Self> {
        if windows.is_empty() {
            return Err(GpcError::InvalidArgument("at least one observation window is required".into()));
        }
        for &(lo, hi) in &windows {
            if !(lo >= T::zero() && hi <= T::one() && hi > lo) {
                return Err(GpcError::BadWindow { lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
            }
        }
        for v in [&delta, &gamma] {
            if v.len() != windows.len() {
                return Err(GpcError::DimensionMismatch { expected: windows.len(), got: v.len() });
            }
        }
        if let Some(g) = gamma.iter().find(|g| !(**g > T::zero())) {
            return Err(GpcError::InvalidArgument(format!("noise variances must be positive, got {g}")));
        }
        Ok(Self { windows, delta, gamma, y_truth: None })
    }

    /// `k` windows of width `width`, centred at `(i + 1/2) / k`, with zero data.
    pub fn evenly_spaced(k: usize, width: T, gamma: T) -> Result<Self> {
        if k == 0 {
            return Err(GpcError::InvalidArgument("at least one observation window is required".into()));
        }
        let half = T::lit(0.5);
        let windows = (0..k)
            .map(|i| {
                let c = (T::from_usize_lossy(i) + half) / T::from_usize_lossy(k);
                (c - half * width, c + half * width)
            })
            .collect();
        Self::new(windows, vec![T::zero(); k], vec![gamma; k])
    }

    pub fn n_obs(&self) -> usize {
        self.windows.len()
    }

    pub fn windows(&self) -> &[(T, T)] {
        &self.windows
    }

    pub fn delta(&self) -> &[T] {
        &self.delta
    }

    pub fn gamma(&self) -> &[T] {
        &self.gamma
    }

    pub fn y_truth(&self) -> Option<&[T]> {
        self.y_truth.as_deref()
    }

    pub fn with_delta(&self, delta: Vec<T>) -> Result<Self> {
        let mut out = Self::new(self.windows.clone(), delta, self.gamma.clone())?;
        out.y_truth = self.y_truth.clone();
        Ok(out)
    }

    pub fn with_gamma(&self, gamma: Vec<T>) -> Result<Self> {
        let mut out = Self::new(self.windows.clone(), self.delta.clone(), gamma)?;
        out.y_truth = self.y_truth.clone();
        Ok(out)
    }

    /// Representer weights `w_k` with `o_k(p) = w_k . p` on interior nodes.
    pub fn weights(&self, mesh: &Mesh1D<T>) -> Vec<Vec<T>> {
        self.windows.iter().map(|&(lo, hi)| window_weights(mesh, lo, hi)).collect()
    }

    /// Window averages `(1/|I_k|) int_{I_k} p dx`, exact for piecewise-linear `p`.
    pub fn observe(&self, mesh: &Mesh1D<T>, p: &[T]) -> Vec<T> {
        self.weights(mesh).iter().map(|w| dot(w, p)).collect()
    }

    /// `1/2 sum_k (delta_k - g_k)^2 / gamma_k`.
    pub fn misfit(&self, g: &[T]) -> T {
        let half = T::lit(0.5);
        self.delta
            .iter()
            .zip(g)
            .zip(&self.gamma)
            .map(|((&d, &gk), &var)| half * (d - gk) * (d - gk) / var)
            .sum()
    }

    /// Potential `Phi(y)` through an exact forward solve at `y`.
    pub fn potential_exact(&self, fam: &AffineOperatorFamily<T>, y: &ParamVector<T>) -> Result<T> {
        let p = fam.solve_at(y)?;
        Ok(self.misfit(&self.observe(fam.mesh(), &p)))
    }

    /// Data `delta = G(y_truth) + eta` with `eta ~ N(0, Gamma)` drawn from `noise_seed`.
    pub fn synthesize(&self, fam: &AffineOperatorFamily<T>, y_truth: &ParamVector<T>, noise_seed: u64) -> Result<Self> {
        let clean = self.observe(fam.mesh(), &fam.solve_at(y_truth)?);
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        let delta = clean
            .iter()
            .zip(&self.gamma)
            .map(|(&g, &var)| {
                let z: f64 = StandardNormal.sample(&mut rng);
                g + var.sqrt() * T::lit(z)
            })
            .collect();
        let mut out = self.with_delta(delta)?;
        out.y_truth = Some(y_truth.as_slice().to_vec());
        Ok(out)
    }
}

fn window_weights<T: Real>(mesh: &Mesh1D<T>, lo: T, hi: T) -> Vec<T> {
    let nodes = mesh.nodes();
    let h = mesh.h();
    let half = T::lit(0.5);
    let mut full = vec![T::zero(); nodes.len()];
    for e in 0..mesh.n_elems() {
        let (x0, x1) = (nodes[e], nodes[e + 1]);
        let l = lo.max(x0);
        let r = hi.min(x1);
        if r <= l {
            continue;
        }
        let (sl, sr) = ((l - x0) / h, (r - x0) / h);
        let len = r - l;
        // Trapezoid on the overlap is exact for the linear interpolant.
        full[e] += half * len * ((T::one() - sl) + (T::one() - sr));
        full[e + 1] += half * len * (sl + sr);
    }
    let inv = T::one() / (hi - lo);
    full[1..nodes.len() - 1].iter().map(|&w| w * inv).collect()
}
