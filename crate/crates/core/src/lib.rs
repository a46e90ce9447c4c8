//! Minimal covariance projections of Lipschitz maps from finite graphs into `ℝⁿ`.
//!
//! Given a connected graph with its shortest-path metric and the stationary
//! measure `μ` of the simple random walk, and a 1-Lipschitz map `T: X → ℝⁿ`,
//! the crate computes the smallest projection `min_{|θ|=1} (Σ_x μ(x)⟨T(x),θ⟩²)^{1/2}`
//! and checks it against `⌊n/2⌋^{-1/2} λ_{⌊n/2⌋}^{-1/2}`, where `λ_i` are the
//! nonzero eigenvalues of the random-walk Laplacian `Δ = 2(I − D⁻¹A)`.
//!
//! Modules, bottom up:
//!
//! - [`graph`]: generators, edge-list parsing, stationary measure, metric.
//! - [`spectral`]: Laplacian, gradient, `Γ*`, weighted adjoints, singular values.
//! - [`lipschitz`]: map representation, validation, centering, generators.
//! - [`projection`]: covariance, `D̃`, ellipsoid axes, bound verification.
//! - [`extremal`]: projected subgradient search for maps with large projections.
//! - [`report`]: JSON report type and stable number formatting.

pub mod error;
pub mod extremal;
pub mod graph;
pub mod linalg;
pub mod lipschitz;
pub mod projection;
pub mod report;
pub mod space;
pub mod spectral;

pub use error::{Error, Result};
pub use extremal::{
    estimate_constant, maximize_min_projection, project_to_lipschitz, ConstantCell, ConstantTable,
    SearchConfig, SearchResult, StepDecay,
};
pub use graph::{
    clique, cycle, from_edge_list, hypercube, path, random_connected, shortest_path_metric,
    stationary_measure, Family, Graph, Metric,
};
pub use lipschitz::{
    center, edge_gradient, lipschitz_constant, random_lipschitz, reduce_noncentered, spectral_map,
    EdgeGradient, LipschitzMap,
};
pub use projection::{
    covariance, dtilde, ellipsoid_axes, min_projection, seminorm, verify_bound, BoundReport,
    CovarianceForm, GraphContext, MinProjection,
};
pub use report::{format_number, AnalysisReport};
pub use space::WeightedSpace;
pub use spectral::{
    adjoint, gamma_star, gradient, hs_norm, ky_fan_check, laplacian, singular_values, spectrum,
    KyFanReport, Spectrum, WeightedOperator,
};
