//! Covariance seminorm, the edge-averaging operator `D̃`, the dual ellipsoid
//! and verification of the eigenvalue-indexed bound on the smallest projection.
//!
//! For a centered 1-Lipschitz map `T` into `ℝⁿ`, the smallest projection
//! `min_{|θ|=1} ‖θ‖_{L2}` is the smallest semi-axis of the ellipsoid
//! `D̃∘Γ*(B₂)`. With `k = ⌊n/2⌋` the chain
//!
//! ```text
//! min_projection = s_n(D̃Γ*) ≤ s_{2k-1}(D̃Γ*) ≤ s_k(D̃)·s_k(Γ*) ≤ k^{-1/2}·λ_k^{-1/2}
//! ```
//!
//! holds with constant one; [`verify_bound`] evaluates every link.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{edge_measure, stationary_measure, Graph};
use crate::linalg::{complement_basis, fix_sign, singular_values_desc, symmetric_eigen_ascending};
use crate::lipschitz::{edge_gradient, lipschitz_constant, reduce_noncentered, LipschitzMap, LIPSCHITZ_TOL};
use crate::space::WeightedSpace;
use crate::spectral::{gamma_star_from, LaplacianEigen, WeightedOperator};

/// Relative eigenvalue gap under which minimal directions count as tied.
pub const DIRECTION_TIE_TOL: f64 = 1e-9;

/// Absolute slack for the bound comparison and for degenerate cells.
pub const BOUND_TOL: f64 = 1e-9;

/// `M = Σ_x μ(x) T(x)T(x)ᵀ`, so that `‖θ‖²_{L2} = θᵀMθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceForm {
    matrix: DMatrix<f64>,
}

impl CovarianceForm {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues ascending with eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<f64>) {
        symmetric_eigen_ascending(self.matrix.clone())
    }
}

pub fn covariance(t: &LipschitzMap, mu: &WeightedSpace) -> Result<CovarianceForm> {
    if t.vertex_count() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: t.vertex_count(),
        });
    }
    let mut weighted = t.points().clone();
    for (x, w) in mu.weights().iter().enumerate() {
        weighted.row_mut(x).scale_mut(*w);
    }
    let m = t.points().transpose() * weighted;
    Ok(CovarianceForm {
        matrix: (&m + m.transpose()) * 0.5,
    })
}

/// `‖θ‖_{L2} = sqrt(θᵀMθ)`.
pub fn seminorm(theta: &[f64], cov: &CovarianceForm) -> Result<f64> {
    if theta.len() != cov.dim() {
        return Err(Error::DimensionMismatch {
            expected: cov.dim(),
            found: theta.len(),
        });
    }
    let v = DVector::from_column_slice(theta);
    Ok((v.transpose() * &cov.matrix * &v)[(0, 0)].max(0.0).sqrt())
}

/// `D̃u = Σ_e ν(e) u(e) D_T(e)`, from `(L(E), ν)` to Euclidean `ℝⁿ`.
pub fn dtilde(g: &Graph, t: &LipschitzMap) -> Result<WeightedOperator> {
    let grad = edge_gradient(g, t)?;
    let nu = edge_measure(g);
    let mut m = grad.matrix().transpose();
    for (e, w) in nu.weights().iter().enumerate() {
        m.column_mut(e).scale_mut(*w);
    }
    WeightedOperator::new(m, nu, WeightedSpace::euclidean(t.target_dim()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinProjection {
    pub value: f64,
    /// Unit minimizer; among tied minimizers the lexicographically smallest
    /// one whose first nonzero entry is positive.
    pub direction: Vec<f64>,
}

/// The value is the smallest singular value of `W^{1/2}T` (zero when
/// `|X| < n`), which stays accurate near zero where `sqrt(λ_min(M))` would
/// amplify rounding; the direction comes from the eigenvectors of `M`.
pub fn min_projection(t: &LipschitzMap, mu: &WeightedSpace) -> Result<MinProjection> {
    let cov = covariance(t, mu)?;
    let mut weighted = t.points().clone();
    for (x, w) in mu.weights().iter().enumerate() {
        weighted.row_mut(x).scale_mut(w.sqrt());
    }
    let n = t.target_dim();
    let sv = singular_values_desc(&weighted, n);
    let (values, vectors) = cov.eigen();
    let lmin = values[0];
    let lmax = *values.last().unwrap();
    let tie = DIRECTION_TIE_TOL * lmax.abs() + 1e-15;
    let tied = values.iter().take_while(|&&v| v - lmin <= tie).count();
    let direction = lexicographic_unit_vector(vectors.columns(0, tied).into_owned());
    Ok(MinProjection {
        value: sv[n - 1],
        direction,
    })
}

/// Lexicographically smallest unit vector with positive leading entry in the
/// span of the orthonormal columns of `basis`.
fn lexicographic_unit_vector(mut basis: DMatrix<f64>) -> Vec<f64> {
    for j in 0..basis.nrows() {
        if basis.ncols() == 1 {
            break;
        }
        let r: Vec<f64> = basis.row(j).iter().copied().collect();
        if r.iter().map(|x| x * x).sum::<f64>().sqrt() <= 1e-12 {
            continue;
        }
        basis = &basis * complement_basis(&r);
    }
    let mut v: Vec<f64> = basis.column(0).iter().copied().collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    for x in v.iter_mut() {
        if x.abs() <= 1e-14 {
            *x = 0.0;
        }
    }
    fix_sign(&mut v);
    v
}

/// Per-graph quantities shared by every map analysed on that graph.
#[derive(Debug, Clone)]
pub struct GraphContext {
    graph: Graph,
    mu: WeightedSpace,
    eigen: LaplacianEigen,
    nonzero: Vec<f64>,
    gamma_star: WeightedOperator,
    gamma_star_sv: Vec<f64>,
}

impl GraphContext {
    pub fn new(graph: &Graph) -> Self {
        let eigen = LaplacianEigen::new(graph);
        let nonzero = eigen.nonzero();
        let gamma_star = gamma_star_from(graph, &eigen);
        let gamma_star_sv = gamma_star.singular_values();
        Self {
            graph: graph.clone(),
            mu: stationary_measure(graph),
            eigen,
            nonzero,
            gamma_star,
            gamma_star_sv,
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn measure(&self) -> &WeightedSpace {
        &self.mu
    }

    pub fn laplacian_eigen(&self) -> &LaplacianEigen {
        &self.eigen
    }

    /// `λ_1 ≤ … ≤ λ_{|X|-1}`.
    pub fn nonzero_eigenvalues(&self) -> &[f64] {
        &self.nonzero
    }

    /// 1-based `λ_i`, if it exists.
    pub fn lambda(&self, i: usize) -> Option<f64> {
        i.checked_sub(1).and_then(|k| self.nonzero.get(k)).copied()
    }

    pub fn gamma_star(&self) -> &WeightedOperator {
        &self.gamma_star
    }

    pub fn gamma_star_singular_values(&self) -> &[f64] {
        &self.gamma_star_sv
    }

    /// `D̃∘Γ*` as an operator `L(X) → ℝⁿ`.
    pub fn composite(&self, t: &LipschitzMap) -> Result<WeightedOperator> {
        dtilde(&self.graph, t)?.compose(&self.gamma_star)
    }

    pub fn ellipsoid_axes(&self, t: &LipschitzMap) -> Result<Vec<f64>> {
        if !t.is_centered(&self.mu)? {
            let mean_norm = t.mean(&self.mu)?.norm();
            return Err(Error::NotCentered { mean_norm });
        }
        let mut sv = self.composite(t)?.singular_values();
        sv.resize(t.target_dim(), 0.0);
        Ok(sv)
    }

    pub fn verify_bound(&self, t: &LipschitzMap, centered: bool) -> Result<BoundReport> {
        let n = t.target_dim();
        if n < 2 {
            return Err(Error::BoundInapplicable { n });
        }
        let constant = lipschitz_constant(&self.graph, t)?;
        if constant > 1.0 + LIPSCHITZ_TOL {
            return Err(Error::NotLipschitz { constant });
        }
        let original = min_projection(t, &self.mu)?;

        let (analysed, k) = if centered {
            if !t.is_centered(&self.mu)? {
                let mean_norm = t.mean(&self.mu)?.norm();
                return Err(Error::NotCentered { mean_norm });
            }
            (t.clone(), n / 2)
        } else {
            ((reduce_noncentered(t, &self.mu))?, (n / 2).saturating_sub(1).max(1))
        };

        let axes = self.ellipsoid_axes(&analysed)?;
        let dt = dtilde(&self.graph, &analysed)?;
        let s_dt_all = dt.singular_values();
        let s_dtilde: Vec<f64> = s_dt_all.iter().copied().take(analysed.target_dim()).collect();
        let composite_sv = self.composite(&analysed)?.singular_values();

        let lambda_explicit = self.lambda(k);
        let paper_index = (n / 2).saturating_sub(1);
        let lambda_paper_form = self.lambda(paper_index);
        let bound_rhs_explicit = lambda_explicit.map(|l| (k as f64).powf(-0.5) * l.powf(-0.5));
        let bound_rhs_paper_form = lambda_paper_form.map(|l| (n as f64).powf(-0.5) * l.powf(-0.5));

        let chain = lambda_explicit.map(|_| ChainValues {
            composite_2k_minus_1: composite_sv.get(2 * k - 1 - 1).copied().unwrap_or(0.0),
            dtilde_k: s_dt_all.get(k - 1).copied().unwrap_or(0.0),
            gamma_star_k: self.gamma_star_sv[k - 1],
            hs_dtilde: dt.hs_norm(),
        });

        let value = original.value;
        let ratio = |b: Option<f64>| b.map(|b| value / b);
        let degenerate = lambda_explicit.is_none() || value <= 1e-12;
        Ok(BoundReport {
            n,
            centered,
            reduced_dim: analysed.target_dim(),
            min_projection: value,
            direction: original.direction,
            analysed_min_projection: axes.last().copied().unwrap_or(0.0),
            axes,
            eigen_index_used: k,
            lambda_explicit,
            lambda_paper_form,
            s_dtilde,
            chain,
            bound_rhs_explicit,
            bound_rhs_paper_form,
            ratio_explicit: ratio(bound_rhs_explicit),
            ratio_paper_form: ratio(bound_rhs_paper_form),
            degenerate,
        })
    }
}

/// Intermediate quantities of the explicit inequality chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainValues {
    /// `s_{2k−1}(D̃∘Γ*)`
    pub composite_2k_minus_1: f64,
    /// `s_k(D̃)`
    pub dtilde_k: f64,
    /// `s_k(Γ*)`
    pub gamma_star_k: f64,
    pub hs_dtilde: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// Target dimension of the input map.
    pub n: usize,
    pub centered: bool,
    /// Dimension the chain was evaluated in (`n`, or `n − 1` after reduction).
    pub reduced_dim: usize,
    /// Smallest projection of the input map over unit `θ ∈ ℝⁿ`.
    pub min_projection: f64,
    pub direction: Vec<f64>,
    /// Smallest ellipsoid semi-axis of the analysed (centered or reduced) map.
    pub analysed_min_projection: f64,
    pub axes: Vec<f64>,
    pub eigen_index_used: usize,
    pub lambda_explicit: Option<f64>,
    pub lambda_paper_form: Option<f64>,
    pub s_dtilde: Vec<f64>,
    pub chain: Option<ChainValues>,
    /// `k^{-1/2} λ_k^{-1/2}`; `None` when `λ_k` does not exist.
    pub bound_rhs_explicit: Option<f64>,
    /// `n^{-1/2} λ_{⌊n/2⌋−1}^{-1/2}`; `None` when that index is 0 or out of range.
    pub bound_rhs_paper_form: Option<f64>,
    pub ratio_explicit: Option<f64>,
    pub ratio_paper_form: Option<f64>,
    pub degenerate: bool,
}

impl BoundReport {
    /// The bound holds, or the cell is degenerate with a vanishing projection.
    pub fn passes(&self) -> bool {
        match self.bound_rhs_explicit {
            Some(b) => self.min_projection <= b + BOUND_TOL,
            None => self.min_projection <= BOUND_TOL,
        }
    }

    /// Every link of the explicit chain holds within `tol`.
    pub fn chain_holds(&self, tol: f64) -> bool {
        let Some(c) = self.chain else {
            return self.passes();
        };
        let bound = self.bound_rhs_explicit.unwrap_or(f64::INFINITY);
        let k = self.eigen_index_used as f64;
        self.min_projection <= self.analysed_min_projection + tol
            && self.analysed_min_projection <= c.composite_2k_minus_1 + tol
            && c.composite_2k_minus_1 <= c.dtilde_k * c.gamma_star_k + tol
            && c.dtilde_k <= c.hs_dtilde / k.sqrt() + tol
            && c.hs_dtilde <= 1.0 + tol
            && c.dtilde_k * c.gamma_star_k <= bound + tol
    }
}

pub fn ellipsoid_axes(g: &Graph, t: &LipschitzMap) -> Result<Vec<f64>> {
    GraphContext::new(g).ellipsoid_axes(t)
}

pub fn verify_bound(g: &Graph, t: &LipschitzMap, centered: bool) -> Result<BoundReport> {
    GraphContext::new(g).verify_bound(t, centered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{clique, path};
    use crate::lipschitz::center;

    pub(crate) fn triangle() -> LipschitzMap {
        let r = 1.0 / 3.0_f64.sqrt();
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let a = std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * i as f64 / 3.0;
                vec![r * a.cos(), r * a.sin()]
            })
            .collect();
        LipschitzMap::from_rows(&rows).unwrap()
    }

    #[test]
    fn covariance_examples() {
        let g = clique(3).unwrap();
        let mu = stationary_measure(&g);
        let z = LipschitzMap::constant(3, &[0.0, 0.0]).unwrap();
        assert!(covariance(&z, &mu).unwrap().matrix().iter().all(|v| *v == 0.0));
        let m = covariance(&triangle(), &mu).unwrap();
        let expect = DMatrix::identity(2, 2) / 6.0;
        assert!(crate::linalg::max_abs_diff(m.matrix(), &expect) < 1e-15);
    }

    #[test]
    fn seminorm_examples() {
        let g = clique(3).unwrap();
        let m = covariance(&triangle(), &stationary_measure(&g)).unwrap();
        assert_eq!(seminorm(&[0.0, 0.0], &m).unwrap(), 0.0);
        let target = 1.0 / 6.0_f64.sqrt();
        for a in [0.0, 0.3, 1.7, 4.0] {
            let s = seminorm(&[f64::cos(a), f64::sin(a)], &m).unwrap();
            assert!((s - target).abs() < 1e-14);
        }
        let s1 = seminorm(&[0.3, -0.2], &m).unwrap();
        let s2 = seminorm(&[0.6, -0.4], &m).unwrap();
        assert!((s2 - 2.0 * s1).abs() < 1e-15);
        assert!(seminorm(&[1.0], &m).is_err());
    }

    #[test]
    fn dtilde_examples() {
        let g = clique(2).unwrap();
        let t = LipschitzMap::from_rows(&[vec![-0.5], vec![0.5]]).unwrap();
        let d = dtilde(&g, &t).unwrap();
        assert!((d.hs_norm() - 1.0).abs() < 1e-15);
        let c = LipschitzMap::constant(2, &[1.0, 1.0]).unwrap();
        assert_eq!(dtilde(&g, &c).unwrap().hs_norm(), 0.0);
    }

    #[test]
    fn ellipsoid_axes_examples() {
        let g = clique(3).unwrap();
        let axes = ellipsoid_axes(&g, &triangle()).unwrap();
        for a in axes {
            assert!((a - 1.0 / 6.0_f64.sqrt()).abs() < 1e-12);
        }
        let z = LipschitzMap::constant(3, &[0.0, 0.0, 0.0]).unwrap();
        assert!(ellipsoid_axes(&g, &z).unwrap().iter().all(|v| v.abs() < 1e-15));
        let off = LipschitzMap::constant(3, &[1.0]).unwrap();
        assert!(matches!(ellipsoid_axes(&g, &off), Err(Error::NotCentered { .. })));
    }

    #[test]
    fn min_projection_examples() {
        let g = path(3).unwrap();
        let mu = stationary_measure(&g);
        let t = LipschitzMap::from_rows(&[vec![-1.0], vec![0.0], vec![1.0]]).unwrap();
        let p = min_projection(&t, &mu).unwrap();
        assert!((p.value - 0.5_f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.direction, vec![1.0]);

        // image in the plane z = 0 of ℝ³
        let flat = LipschitzMap::from_rows(&[vec![-1.0, 0.5, 0.0], vec![0.0, -0.2, 0.0], vec![1.0, 0.1, 0.0]])
            .unwrap();
        let p = min_projection(&flat, &mu).unwrap();
        assert!(p.value.abs() < 1e-12);
        assert!((p.direction[2].abs() - 1.0).abs() < 1e-12);

        // isotropic case: tie broken towards (0, 1)
        let c = clique(3).unwrap();
        let p = min_projection(&triangle(), &stationary_measure(&c)).unwrap();
        assert!((p.value - 1.0 / 6.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.direction, vec![0.0, 1.0]);
    }

    #[test]
    fn verify_bound_on_triangle() {
        let g = clique(3).unwrap();
        let r = verify_bound(&g, &triangle(), true).unwrap();
        assert_eq!(r.eigen_index_used, 1);
        assert!((r.min_projection - 1.0 / 6.0_f64.sqrt()).abs() < 1e-12);
        assert!((r.bound_rhs_explicit.unwrap() - 1.0 / 3.0_f64.sqrt()).abs() < 1e-12);
        assert!((r.ratio_explicit.unwrap() - 0.5_f64.sqrt()).abs() < 1e-12);
        assert!(r.bound_rhs_paper_form.is_none());
        assert!(r.passes() && r.chain_holds(1e-10));
        assert!(!r.degenerate);
    }

    #[test]
    fn verify_bound_errors_and_degenerate_cells() {
        let g = clique(3).unwrap();
        let one = LipschitzMap::from_rows(&[vec![0.0], vec![0.5], vec![-0.5]]).unwrap();
        assert!(matches!(
            verify_bound(&g, &one, true),
            Err(Error::BoundInapplicable { n: 1 })
        ));
        let stretched = triangle().scaled(1.5);
        assert!(matches!(
            verify_bound(&g, &stretched, true),
            Err(Error::NotLipschitz { .. })
        ));
        // n = 6 > |X|: λ_3 does not exist on a triangle, projection vanishes
        let t = crate::lipschitz::random_lipschitz(&g, 6, 3).unwrap();
        let t = center(&t, &stationary_measure(&g)).unwrap();
        let r = verify_bound(&g, &t, true).unwrap();
        assert!(r.degenerate && r.bound_rhs_explicit.is_none());
        assert!(r.min_projection < 1e-9 && r.passes());
    }

    #[test]
    fn noncentered_reduction_path() {
        let g = clique(5).unwrap();
        let t = crate::lipschitz::random_lipschitz(&g, 5, 11).unwrap();
        let r = verify_bound(&g, &t, false).unwrap();
        assert_eq!(r.reduced_dim, 4);
        assert_eq!(r.eigen_index_used, 1);
        assert!(r.min_projection <= r.analysed_min_projection + 1e-12);
        assert!(r.passes() && r.chain_holds(1e-10));
        assert!(matches!(verify_bound(&g, &t, true), Err(Error::NotCentered { .. })));
    }
}
