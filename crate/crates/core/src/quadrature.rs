//! Gauss-Legendre rules and tensor-product grids on `[-1, 1]^J`.

use crate::error::{GpcError, Result};
use crate::scalar::Real;

/// `n`-point Gauss-Legendre rule for `int_{-1}^{1} g(y) dy` (weights sum to 2).
/// Nodes ascending. Exact for polynomials of degree `2n - 1`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0_f64; n];
    let mut weights = vec![0.0_f64; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        dp = if d.is_finite() { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes.into_iter().map(T::lit).collect(), weights.into_iter().map(T::lit).collect())
}

/// Same rule normalized for the uniform probability measure `dy / 2`.
pub fn gauss_legendre_uniform<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre::<T>(n);
    let half = T::lit(0.5);
    (x, w.into_iter().map(|v| v * half).collect())
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor-product Gauss-Legendre grid for the uniform prior on `[-1, 1]^J`.
#[derive(Clone, Debug)]
pub struct TensorGrid<T: Real> {
    dims: usize,
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> TensorGrid<T> {
    /// Fails when `nodes_per_dim^dims` exceeds `max_points`.
    pub fn new(dims: usize, nodes_per_dim: usize, max_points: usize) -> Result<Self> {
        if nodes_per_dim == 0 {
            return Err(GpcError::InvalidArgument("tensor grid needs at least one node per dimension".into()));
        }
        let total = (nodes_per_dim as f64).powi(dims as i32);
        if total > max_points as f64 {
            return Err(GpcError::CostGuard(format!(
                "tensor grid with {nodes_per_dim}^{dims} points exceeds {max_points}"
            )));
        }
        let (nodes, weights) = gauss_legendre_uniform(nodes_per_dim);
        Ok(Self { dims, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len().pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Point and weight with flat index `flat` (dimension 1 varies fastest).
    pub fn point(&self, mut flat: usize) -> (Vec<T>, T) {
        let n = self.nodes.len();
        let mut y = Vec::with_capacity(self.dims);
        let mut w = T::one();
        for _ in 0..self.dims {
            let i = flat % n;
            flat /= n;
            y.push(self.nodes[i]);
            w *= self.weights[i];
        }
        (y, w)
    }

    pub fn points(&self) -> impl Iterator<Item = (Vec<T>, T)> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// `int g d mu_0` by the tensor rule.
    pub fn integrate(&self, mut g: impl FnMut(&[T]) -> T) -> T {
        self.points().map(|(y, w)| w * g(&y)).sum()
    }
}
