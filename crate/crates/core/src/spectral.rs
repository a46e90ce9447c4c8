//! Operators between weighted function spaces on a graph.
//!
//! Vertex functions live in `L(X)` with the stationary measure `μ`, edge
//! functions in `L(E)` with the uniform measure `ν`. All adjoints, spectra and
//! singular values are taken with respect to those inner products. Internally
//! every operator `A: (V, W_V) → (U, W_U)` is moved to orthonormal coordinates
//! as `W_U^{1/2} A W_V^{-1/2}` so that plain symmetric eigen/SVD routines apply.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{edge_measure, stationary_measure, Graph};
use crate::linalg::{max_abs, max_abs_diff, singular_values_desc, symmetric_eigen_ascending};
use crate::report::format_number;
use crate::space::WeightedSpace;

/// Default relative tolerance used to group eigenvalues into multiplicities.
pub const DEFAULT_GROUPING_TOL: f64 = 1e-6;

/// Relative cutoff below which Laplacian eigenvalues count as zero when
/// forming the pseudoinverse.
pub const PSEUDOINVERSE_CUTOFF: f64 = 1e-10;

const SELF_ADJOINT_TOL: f64 = 1e-9;

/// A linear map between weighted spaces, stored as a `codomain × domain` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOperator {
    matrix: DMatrix<f64>,
    domain: WeightedSpace,
    codomain: WeightedSpace,
}

impl WeightedOperator {
    pub fn new(matrix: DMatrix<f64>, domain: WeightedSpace, codomain: WeightedSpace) -> Result<Self> {
        if matrix.ncols() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() != codomain.dim() {
            return Err(Error::DimensionMismatch {
                expected: codomain.dim(),
                found: matrix.nrows(),
            });
        }
        Ok(Self {
            matrix,
            domain,
            codomain,
        })
    }

    pub fn identity(space: WeightedSpace) -> Self {
        let n = space.dim();
        Self {
            matrix: DMatrix::identity(n, n),
            domain: space.clone(),
            codomain: space,
        }
    }

    pub fn zero(domain: WeightedSpace, codomain: WeightedSpace) -> Self {
        Self {
            matrix: DMatrix::zeros(codomain.dim(), domain.dim()),
            domain,
            codomain,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn domain(&self) -> &WeightedSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &WeightedSpace {
        &self.codomain
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        if f.len() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                found: f.len(),
            });
        }
        Ok((&self.matrix * DVector::from_column_slice(f))
            .iter()
            .copied()
            .collect())
    }

    /// Hilbert-space adjoint: `W_dom^{-1} Aᵀ W_cod`.
    pub fn adjoint(&self) -> Self {
        let wd = self.domain.weights();
        let wc = self.codomain.weights();
        let mut m = self.matrix.transpose();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                m[(i, j)] *= wc[j] / wd[i];
            }
        }
        Self {
            matrix: m,
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &WeightedOperator) -> Result<Self> {
        if inner.codomain.dim() != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                found: inner.codomain.dim(),
            });
        }
        if !inner.codomain.compatible_with(&self.domain, 1e-12)
            || inner.codomain.is_euclidean() != self.domain.is_euclidean()
        {
            return Err(Error::IncompatibleSpaces);
        }
        Ok(Self {
            matrix: &self.matrix * &inner.matrix,
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
        })
    }

    /// Matrix of the operator between orthonormal bases of both spaces.
    pub fn orthonormal_matrix(&self) -> DMatrix<f64> {
        let wd = self.domain.weights();
        let wc = self.codomain.weights();
        let mut m = self.matrix.clone();
        for i in 0..m.nrows() {
            let left = wc[i].sqrt();
            for j in 0..m.ncols() {
                m[(i, j)] *= left / wd[j].sqrt();
            }
        }
        m
    }

    /// `s_i(A) = sqrt(λ_i(A*A))`, non-increasing, one per domain dimension.
    pub fn singular_values(&self) -> Vec<f64> {
        singular_values_desc(&self.orthonormal_matrix(), self.domain.dim())
    }

    /// `sqrt(tr A*A)`, evaluated from the adjoint product rather than the SVD.
    pub fn hs_norm(&self) -> f64 {
        let ata = &self.adjoint().matrix * &self.matrix;
        ata.trace().max(0.0).sqrt()
    }

    /// Largest deviation between the operator and its adjoint.
    pub fn self_adjoint_deviation(&self) -> f64 {
        if self.domain.dim() != self.codomain.dim() {
            return f64::INFINITY;
        }
        max_abs_diff(&self.matrix, &self.adjoint().matrix)
    }

    /// Dense CSV, one matrix row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.matrix.row_iter() {
            let cells: Vec<String> = row.iter().map(|&x| format_number(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn laplacian(g: &Graph) -> WeightedOperator {
    let n = g.vertex_count();
    let mut m = DMatrix::zeros(n, n);
    for x in 0..n {
        m[(x, x)] = 2.0;
        let share = 2.0 / g.degree(x) as f64;
        for &y in g.neighbors(x) {
            m[(x, y)] -= share;
        }
    }
    let mu = stationary_measure(g);
    WeightedOperator {
        matrix: m,
        domain: mu.clone(),
        codomain: mu,
    }
}

/// `(∇f)(e) = f(tail) − f(head)` under the graph's stored orientation.
pub fn gradient(g: &Graph) -> WeightedOperator {
    let mut m = DMatrix::zeros(g.edge_count(), g.vertex_count());
    for (e, &(tail, head)) in g.edges().iter().enumerate() {
        m[(e, tail)] = 1.0;
        m[(e, head)] = -1.0;
    }
    WeightedOperator {
        matrix: m,
        domain: stationary_measure(g),
        codomain: edge_measure(g),
    }
}

pub fn adjoint(a: &WeightedOperator) -> WeightedOperator {
    a.adjoint()
}

pub fn singular_values(a: &WeightedOperator) -> Vec<f64> {
    a.singular_values()
}

pub fn hs_norm(a: &WeightedOperator) -> f64 {
    a.hs_norm()
}

/// Eigenvalues of a self-adjoint operator, non-decreasing, grouped into multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    group_ids: Vec<usize>,
    groups: Vec<(f64, usize)>,
}

impl Spectrum {
    pub fn from_sorted(eigenvalues: Vec<f64>, grouping_tol: f64) -> Self {
        let scale = eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let mut group_ids = Vec::with_capacity(eigenvalues.len());
        let mut groups: Vec<(f64, usize)> = Vec::new();
        let mut first = f64::NAN;
        let mut sum = 0.0;
        for &v in &eigenvalues {
            if groups.is_empty() || v - first > grouping_tol * scale {
                if let Some(last) = groups.last_mut() {
                    last.0 = sum / last.1 as f64;
                }
                groups.push((v, 0));
                first = v;
                sum = 0.0;
            }
            let last = groups.last_mut().unwrap();
            last.1 += 1;
            sum += v;
            group_ids.push(groups.len() - 1);
        }
        if let Some(last) = groups.last_mut() {
            last.0 = sum / last.1 as f64;
        }
        Self {
            eigenvalues,
            group_ids,
            groups,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `(value, multiplicity)` per group, values ascending.
    pub fn groups(&self) -> &[(f64, usize)] {
        &self.groups
    }

    pub fn group_ids(&self) -> &[usize] {
        &self.group_ids
    }

    /// Number of eigenvalues below the pseudoinverse cutoff.
    pub fn zero_count(&self) -> usize {
        let cut = self.zero_cutoff();
        self.eigenvalues.iter().filter(|v| v.abs() <= cut).count()
    }

    /// Nonzero eigenvalues `λ_1 ≤ λ_2 ≤ …`.
    pub fn nonzero(&self) -> Vec<f64> {
        let cut = self.zero_cutoff();
        self.eigenvalues.iter().copied().filter(|v| v.abs() > cut).collect()
    }

    fn zero_cutoff(&self) -> f64 {
        let scale = self.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        PSEUDOINVERSE_CUTOFF * scale.max(1.0)
    }

    /// CSV with header `index,eigenvalue,group_id`; values within the zero cutoff print as `0`.
    pub fn to_csv(&self) -> String {
        let cut = self.zero_cutoff();
        let mut out = String::from("index,eigenvalue,group_id\n");
        for (i, (&v, &g)) in self.eigenvalues.iter().zip(&self.group_ids).enumerate() {
            let v = if v.abs() <= cut { 0.0 } else { v };
            let _ = writeln!(out, "{i},{},{g}", format_number(v));
        }
        out
    }
}

/// Eigenvalues of a self-adjoint operator via the symmetrizing similarity.
pub fn spectrum(op: &WeightedOperator, grouping_tol: f64) -> Result<Spectrum> {
    let deviation = op.self_adjoint_deviation();
    if !(deviation <= SELF_ADJOINT_TOL * (1.0 + max_abs(op.matrix()))) {
        return Err(Error::NotSelfAdjoint { deviation });
    }
    let (values, _) = symmetric_eigen_ascending(symmetrized(op));
    Ok(Spectrum::from_sorted(values, grouping_tol))
}

fn symmetrized(op: &WeightedOperator) -> DMatrix<f64> {
    let s = op.orthonormal_matrix();
    (&s + s.transpose()) * 0.5
}

/// Laplacian eigenvalues (ascending) with `μ`-orthonormal eigenfunctions as columns.
#[derive(Debug, Clone)]
pub struct LaplacianEigen {
    pub values: Vec<f64>,
    pub functions: DMatrix<f64>,
}

impl LaplacianEigen {
    pub fn new(g: &Graph) -> Self {
        let lap = laplacian(g);
        let (values, q) = symmetric_eigen_ascending(symmetrized(&lap));
        let mut functions = q;
        for (x, w) in lap.domain().weights().iter().enumerate() {
            let s = 1.0 / w.sqrt();
            functions.row_mut(x).scale_mut(s);
        }
        Self { values, functions }
    }

    /// Nonzero eigenvalues `λ_1 ≤ … ≤ λ_{|X|-1}`.
    pub fn nonzero(&self) -> Vec<f64> {
        Spectrum::from_sorted(self.values.clone(), DEFAULT_GROUPING_TOL).nonzero()
    }
}

/// `Γ* = ∇ ∘ Δ⁺` as an operator `L(X) → L(E)`.
///
/// Constants are sent to zero, so on the mean-zero subspace `L_0(X)` this is
/// the adjoint of the inverse gradient; its singular values are
/// `λ_i^{-1/2}` followed by a single zero.
pub fn gamma_star(g: &Graph) -> WeightedOperator {
    gamma_star_from(g, &LaplacianEigen::new(g))
}

pub fn gamma_star_from(g: &Graph, eig: &LaplacianEigen) -> WeightedOperator {
    let mu = stationary_measure(g);
    let n = g.vertex_count();
    let lmax = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = PSEUDOINVERSE_CUTOFF * lmax;
    // Δ⁺ = Φ Λ⁺ Φᵀ W
    let mut scaled = eig.functions.clone();
    for (k, &lam) in eig.values.iter().enumerate() {
        let inv = if lam > cut { 1.0 / lam } else { 0.0 };
        scaled.column_mut(k).scale_mut(inv);
    }
    let mut phi_t_w = eig.functions.transpose();
    for x in 0..n {
        phi_t_w.column_mut(x).scale_mut(mu.weights()[x]);
    }
    let pinv = scaled * phi_t_w;
    let grad = gradient(g);
    WeightedOperator {
        matrix: grad.matrix() * pinv,
        domain: mu,
        codomain: edge_measure(g),
    }
}

/// Outcome of checking `s_{i+j−1}(BA) ≤ s_i(A)·s_j(B)` over all valid `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KyFanReport {
    /// Smallest `s_i(A)s_j(B) − s_{i+j−1}(BA)`.
    pub min_slack: f64,
    /// 1-based `(i, j)` attaining it.
    pub worst: (usize, usize),
    pub pairs_checked: usize,
}

impl KyFanReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.min_slack >= -tol
    }
}

/// Checks the Ky Fan inequality for the composition `b ∘ a`.
pub fn ky_fan_check(a: &WeightedOperator, b: &WeightedOperator) -> Result<KyFanReport> {
    let ba = b.compose(a)?;
    let sa = a.singular_values();
    let sb = b.singular_values();
    let sba = ba.singular_values();
    let mut report = KyFanReport {
        min_slack: f64::INFINITY,
        worst: (0, 0),
        pairs_checked: 0,
    };
    for (i, &s_a) in sa.iter().enumerate() {
        for (j, &s_b) in sb.iter().enumerate() {
            let Some(&s_ba) = sba.get(i + j) else { break };
            let slack = s_a * s_b - s_ba;
            report.pairs_checked += 1;
            if slack < report.min_slack {
                report.min_slack = slack;
                report.worst = (i + 1, j + 1);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{clique, cycle, hypercube, path};

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn clique2_laplacian_matrix() {
        let l = laplacian(&clique(2).unwrap());
        assert_eq!(l.matrix(), &DMatrix::from_row_slice(2, 2, &[2.0, -2.0, -2.0, 2.0]));
    }

    #[test]
    fn laplacian_on_path3_indicator() {
        let l = laplacian(&path(3).unwrap());
        let out = l.apply(&[1.0, 0.0, 0.0]).unwrap();
        assert!(approx(out[0], 2.0, 1e-15) && approx(out[1], -1.0, 1e-15) && approx(out[2], 0.0, 1e-15));
        let ones = l.apply(&[1.0; 3]).unwrap();
        assert!(ones.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn gradient_examples() {
        let g = clique(2).unwrap();
        let grad = gradient(&g);
        assert_eq!(grad.apply(&[1.0, 0.0]).unwrap(), vec![1.0]);
        assert_eq!(grad.apply(&[3.0, 3.0]).unwrap(), vec![0.0]);
        let g = cycle(5).unwrap();
        let f = [0.3, -1.0, 2.0, 0.5, 1.5];
        let base = gradient(&g).apply(&f).unwrap();
        let flipped = gradient(&g.with_flipped_edges(&[2])).apply(&f).unwrap();
        for e in 0..5 {
            let expect = if e == 2 { -base[e] } else { base[e] };
            assert_eq!(flipped[e], expect);
        }
    }

    #[test]
    fn adjoint_examples() {
        let s = WeightedSpace::probability(vec![0.2, 0.3, 0.5]).unwrap();
        let id = WeightedOperator::identity(s);
        assert!(max_abs_diff(id.adjoint().matrix(), id.matrix()) < 1e-15);

        let d = WeightedSpace::probability(vec![1.0]).unwrap();
        let c = WeightedSpace::euclidean(1);
        let a = WeightedOperator::new(DMatrix::from_element(1, 1, 3.0), d.clone(), c).unwrap();
        // weights: domain 1, codomain 1 -> c * w_c / w_d = 3
        assert!(approx(a.adjoint().matrix()[(0, 0)], 3.0, 1e-15));

        let d = WeightedSpace::positive(vec![0.5]).unwrap();
        let c = WeightedSpace::positive(vec![2.0]).unwrap();
        let b = WeightedOperator::new(DMatrix::from_element(1, 1, 3.0), d, c).unwrap();
        assert!(approx(b.adjoint().matrix()[(0, 0)], 12.0, 1e-15));
        assert!(approx(b.adjoint().adjoint().matrix()[(0, 0)], 3.0, 1e-15));
    }

    #[test]
    fn laplacian_is_grad_star_grad_on_clique2() {
        let g = clique(2).unwrap();
        let grad = gradient(&g);
        let prod = grad.adjoint().compose(&grad).unwrap();
        assert!(max_abs_diff(prod.matrix(), laplacian(&g).matrix()) < 1e-12);
    }

    #[test]
    fn clique_spectrum() {
        for m in [2usize, 3, 5, 9] {
            let s = spectrum(&laplacian(&clique(m).unwrap()), DEFAULT_GROUPING_TOL).unwrap();
            let expect = 2.0 * m as f64 / (m as f64 - 1.0);
            assert_eq!(s.zero_count(), 1);
            assert_eq!(s.groups().len(), 2);
            assert_eq!(s.groups()[1].1, m - 1);
            assert!(approx(s.groups()[1].0, expect, 1e-10));
        }
    }

    #[test]
    fn hypercube_spectrum_multiplicities() {
        let d = 4;
        let s = spectrum(&laplacian(&hypercube(d).unwrap()), DEFAULT_GROUPING_TOL).unwrap();
        let binom = [1usize, 4, 6, 4, 1];
        assert_eq!(s.groups().len(), d + 1);
        for (k, &(v, mult)) in s.groups().iter().enumerate() {
            assert!(approx(v, 4.0 * k as f64 / d as f64, 1e-10));
            assert_eq!(mult, binom[k]);
        }
    }

    #[test]
    fn path_spectrum_closed_form() {
        let m = 12;
        let s = spectrum(&laplacian(&path(m).unwrap()), DEFAULT_GROUPING_TOL).unwrap();
        for (k, &v) in s.eigenvalues().iter().enumerate() {
            let expect = 2.0 * (1.0 - (std::f64::consts::PI * k as f64 / (m as f64 - 1.0)).cos());
            assert!(approx(v, expect, 1e-10), "k={k}: {v} vs {expect}");
        }
    }

    #[test]
    fn spectrum_rejects_non_self_adjoint() {
        let s = WeightedSpace::uniform(2).unwrap();
        let a = WeightedOperator::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]), s.clone(), s)
            .unwrap();
        assert!(matches!(spectrum(&a, 1e-6), Err(Error::NotSelfAdjoint { .. })));
    }

    #[test]
    fn gamma_star_on_clique2_and_constants() {
        let g = clique(2).unwrap();
        let gs = gamma_star(&g);
        let sv = gs.singular_values();
        assert!(approx(sv[0], 0.5, 1e-12));
        assert!(sv[1].abs() < 1e-12);
        let g = hypercube(3).unwrap();
        let out = gamma_star(&g).apply(&[2.5; 8]).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gamma_star_adjoint_relation() {
        // [Γu, f]_X = [u, Γ*f]_E for u = ∇h with h mean-zero, f mean-zero.
        let g = path(6).unwrap();
        let mu = stationary_measure(&g);
        let nu = edge_measure(&g);
        let center = |v: &mut Vec<f64>| {
            let m = mu.mean(v);
            v.iter_mut().for_each(|x| *x -= m);
        };
        let mut h = vec![0.1, 0.7, -0.3, 1.2, 0.0, -0.5];
        let mut f = vec![1.0, -2.0, 0.5, 0.25, 3.0, -1.0];
        center(&mut h);
        center(&mut f);
        let u = gradient(&g).apply(&h).unwrap();
        let lhs = mu.inner(&h, &f);
        let rhs = nu.inner(&u, &gamma_star(&g).apply(&f).unwrap());
        assert!(approx(lhs, rhs, 1e-12));
    }

    #[test]
    fn identity_and_zero_singular_values() {
        let s = WeightedSpace::probability(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let id = WeightedOperator::identity(s.clone());
        assert!(id.singular_values().iter().all(|v| approx(*v, 1.0, 1e-12)));
        assert!(approx(id.hs_norm(), 2.0, 1e-12));
        let z = WeightedOperator::zero(s, WeightedSpace::euclidean(2));
        assert!(z.singular_values().iter().all(|v| *v == 0.0));
        assert_eq!(z.hs_norm(), 0.0);
    }

    #[test]
    fn ky_fan_identity_equality_and_zero() {
        let s = WeightedSpace::probability(vec![0.5, 0.25, 0.25]).unwrap();
        let a = WeightedOperator::new(
            DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0, 0.0, 1.0, 1.0]),
            s.clone(),
            s.clone(),
        )
        .unwrap();
        let id = WeightedOperator::identity(s.clone());
        let r = ky_fan_check(&a, &id).unwrap();
        assert!(r.holds(1e-12));
        let sa = a.singular_values();
        let sba = id.compose(&a).unwrap().singular_values();
        for i in 0..3 {
            assert!(approx(sa[i] * 1.0, sba[i], 1e-12));
        }
        let z = WeightedOperator::zero(s.clone(), s.clone());
        assert!(ky_fan_check(&z, &a).unwrap().holds(0.0));
        let bad = WeightedOperator::identity(WeightedSpace::uniform(2).unwrap());
        assert!(ky_fan_check(&a, &bad).is_err());
    }

    #[test]
    fn spectrum_csv_layout() {
        let s = spectrum(&laplacian(&path(2).unwrap()), DEFAULT_GROUPING_TOL).unwrap();
        assert_eq!(s.to_csv(), "index,eigenvalue,group_id\n0,0,0\n1,4,1\n");
    }
}
