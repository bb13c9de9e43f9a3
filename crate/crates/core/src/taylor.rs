//! Taylor coefficients of the parametric forward solution `p(y)` about `y = 0`.
//!
//! From `(A_0 + sum_j y_j A_j) p(y) = f`, matching powers of `y` gives
//! `t_0 = A_0^{-1} f` and `t_nu = -A_0^{-1} sum_{j in supp nu} A_j t_{nu - e_j}`.

use crate::error::{GpcError, Result};
use crate::fem::AffineOperatorFamily;
use crate::index::{downward_close, MonotoneSet};
use crate::scalar::Real;
use crate::series::{Basis, VectorSeries};

/// Taylor coefficients `t_nu` for every `nu` in `lam`, with `A_0` factored once.
/// Each coefficient costs one `A_0` backsolve.
pub fn taylor_forward<T: Real>(fam: &AffineOperatorFamily<T>, lam: &MonotoneSet) -> Result<VectorSeries<T>> {
    if lam.max_dim() as usize > fam.n_dims() {
        return Err(GpcError::DimensionMismatch { expected: fam.n_dims(), got: lam.max_dim() as usize });
    }
    let n = fam.n_dofs();
    let mut out = VectorSeries::new(Basis::Taylor, vec![T::zero(); n]);
    let factor = fam.a0_factor();
    // Canonical order visits every predecessor nu - e_j before nu.
    for nu in lam {
        let coeff = if nu.is_zero() {
            factor.solve(fam.load())
        } else {
            let mut rhs = vec![T::zero(); n];
            for (d, prev) in nu.predecessors() {
                if let Some(t_prev) = out.get(&prev) {
                    fam.ajs()[d as usize - 1].matvec_acc(t_prev, -T::one(), &mut rhs);
                }
            }
            factor.solve_in_place(&mut rhs);
            rhs
        };
        out.insert(nu.clone(), coeff);
    }
    Ok(out)
}

/// Forward expansion trimmed to the `n` largest coefficients in the `A_0` energy norm
/// and closed downward again.
#[derive(Clone, Debug)]
pub struct ForwardExpansion<T: Real> {
    pub set: MonotoneSet,
    pub series: VectorSeries<T>,
    /// `A_0` backsolves spent, i.e. the candidate set size.
    pub backsolves: usize,
    /// Energy-norm mass of the candidate coefficients left out.
    pub dropped_energy: T,
}

pub fn trimmed_forward_expansion<T: Real>(
    fam: &AffineOperatorFamily<T>,
    candidate: &MonotoneSet,
    n: usize,
) -> Result<ForwardExpansion<T>> {
    let full = taylor_forward(fam, candidate)?;
    let (kept, _) = full.truncate_largest_by(n, |c| fam.energy_norm(c));
    let set = downward_close(kept.indices());
    let mut series = VectorSeries::new(Basis::Taylor, vec![T::zero(); fam.n_dofs()]);
    let mut dropped_energy = T::zero();
    for (nu, c) in full.iter() {
        if set.contains(nu) {
            series.insert(nu.clone(), c.clone());
        } else {
            dropped_energy += fam.energy_norm(c);
        }
    }
    Ok(ForwardExpansion { set, series, backsolves: candidate.len(), dropped_energy })
}
