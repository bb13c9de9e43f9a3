//! Sparse generalized polynomial chaos for Bayesian inversion of the parametric
//! diffusion problem `-(u(x, y) p')' = f` on `(0, 1)`, with
//! `u = abar + sum_j y_j psi_j` and a uniform prior on `[-1, 1]^J`.
//!
//! The pipeline: assemble the affine operator family ([`fem`]), compute Taylor
//! coefficients of the forward map on a downward-closed index set ([`taylor`]),
//! push them through the observation functionals, build the truncated potential
//! and the N-term posterior density ([`posterior`]), then integrate against the
//! prior in closed form ([`expectation`]).
//!
//! Numerics are generic over [`Real`] (`f32`, `f64`); the `*F64` aliases below
//! fix the scalar for the common case.

// Negated float comparisons are deliberate throughout: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expectation;
pub mod fem;
pub mod index;
pub mod legendre;
pub mod posterior;
pub mod prior;
pub mod quadrature;
pub mod scalar;
pub mod series;
pub mod taylor;

pub use error::{GpcError, Result};
pub use expectation::{
    integrate_series, mc_posterior, moment_weight, posterior_summary_semianalytic, quadrature_oracle, EstimatorTag,
    PosteriorSummary,
};
pub use fem::{AffineOperatorFamily, Mesh1D, ObservationSetup, SymTridiagonal};
pub use index::{downward_close, is_monotone, minkowski_sum, total_degree_set, MonotoneSet, MultiIndex};
pub use legendre::{legendre_from_taylor, taylor_from_legendre};
pub use posterior::{
    gpc_observation, k_terms, potential_series, theta_exact, theta_series, truncated_product,
    truncated_product_with, PosteriorApprox, Truncated, NO_TRUNCATION,
};
pub use prior::{ParamVector, PriorModel};
pub use scalar::{Coefficient, Real};
pub use series::{fit_decay_rate, Basis, ScalarSeries, SparseSeries, VectorSeries};
pub use taylor::{taylor_forward, trimmed_forward_expansion, ForwardExpansion};

pub type MeshF64 = Mesh1D<f64>;
pub type PriorModelF64 = PriorModel<f64>;
pub type ParamVectorF64 = ParamVector<f64>;
pub type AffineOperatorFamilyF64 = AffineOperatorFamily<f64>;
pub type ObservationSetupF64 = ObservationSetup<f64>;
pub type ScalarSeriesF64 = ScalarSeries<f64>;
pub type VectorSeriesF64 = VectorSeries<f64>;
pub type PosteriorApproxF64 = PosteriorApprox<f64>;
pub type PosteriorSummaryF64 = PosteriorSummary<f64>;

pub type MeshF32 = Mesh1D<f32>;
pub type PriorModelF32 = PriorModel<f32>;
pub type AffineOperatorFamilyF32 = AffineOperatorFamily<f32>;
