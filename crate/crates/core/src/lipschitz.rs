//! Lipschitz maps `T: X → ℝⁿ` stored as one row per vertex.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::{Graph, Metric};
use crate::linalg::householder_to_last;
use crate::report::format_number;
use crate::space::WeightedSpace;
use crate::spectral::LaplacianEigen;

/// Slack allowed on the Lipschitz constant of a validated map.
pub const LIPSCHITZ_TOL: f64 = 1e-9;

/// Relative size of the mean below which a map counts as centered.
pub const CENTERED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzMap {
    points: DMatrix<f64>,
}

impl LipschitzMap {
    /// Wraps an `|X| × n` matrix; row `x` is `T(x)`.
    pub fn new(points: DMatrix<f64>) -> Result<Self> {
        if points.ncols() == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        Ok(Self { points })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(rows.len(), n, &flat))
    }

    pub fn constant(vertex_count: usize, value: &[f64]) -> Result<Self> {
        let row = RowDVector::from_row_slice(value);
        Self::new(DMatrix::from_fn(vertex_count, value.len(), |_, j| row[j]))
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn into_points(self) -> DMatrix<f64> {
        self.points
    }

    pub fn vertex_count(&self) -> usize {
        self.points.nrows()
    }

    pub fn target_dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn point(&self, x: usize) -> RowDVector<f64> {
        self.points.row(x).into_owned()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            points: &self.points * alpha,
        }
    }

    /// Applies `θ ↦ Qθ` to every point (`Q` is `n × n`).
    pub fn transformed(&self, q: &DMatrix<f64>) -> Result<Self> {
        if q.ncols() != self.target_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.target_dim(),
                found: q.ncols(),
            });
        }
        Self::new(&self.points * q.transpose())
    }

    /// `μ`-weighted mean point.
    pub fn mean(&self, mu: &WeightedSpace) -> Result<DVector<f64>> {
        self.check_vertices(mu.dim())?;
        let w = DVector::from_column_slice(mu.weights());
        Ok(self.points.transpose() * w)
    }

    pub fn is_centered(&self, mu: &WeightedSpace) -> Result<bool> {
        let mean = self.mean(mu)?;
        Ok(mean.norm() <= CENTERED_TOL * (1.0 + self.max_radius()))
    }

    /// Largest Euclidean norm of an image point.
    pub fn max_radius(&self) -> f64 {
        self.points
            .row_iter()
            .fold(0.0f64, |m, r| m.max(r.norm()))
    }

    /// Largest distance between two image points.
    pub fn image_diameter(&self) -> f64 {
        let n = self.vertex_count();
        let mut best = 0.0f64;
        for x in 0..n {
            for y in x + 1..n {
                best = best.max((self.points.row(x) - self.points.row(y)).norm());
            }
        }
        best
    }

    fn check_vertices(&self, expected: usize) -> Result<()> {
        if self.vertex_count() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.vertex_count(),
            });
        }
        Ok(())
    }

    /// CSV body: one row per vertex, optional `# minproj-map n=<n>` header.
    pub fn to_csv(&self, header: bool) -> String {
        let mut out = String::new();
        if header {
            let _ = writeln!(out, "# minproj-map n={}", self.target_dim());
        }
        for row in self.points.row_iter() {
            let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses the CSV map format. Lines starting with `#` are comments; a
    /// `# minproj-map n=<n>` header, if present, fixes the row width.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() {
                continue;
            }
            if let Some(comment) = content.strip_prefix('#') {
                if let Some(rest) = comment.trim().strip_prefix("minproj-map") {
                    if let Some(v) = rest.trim().strip_prefix("n=") {
                        declared = Some(v.trim().parse().map_err(|_| Error::Parse {
                            line,
                            message: format!("invalid header dimension {v:?}"),
                        })?);
                    }
                }
                continue;
            }
            let row = content
                .split(',')
                .map(|c| {
                    let c = c.trim();
                    c.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::Parse {
                            line,
                            message: format!("invalid number {c:?}"),
                        })
                })
                .collect::<Result<Vec<f64>>>()?;
            let expected = declared.or(rows.first().map(Vec::len)).unwrap_or(row.len());
            if row.len() != expected {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {expected} columns, found {}", row.len()),
                });
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "map file has no rows".into(),
            });
        }
        Self::from_rows(&rows)
    }
}

/// Oriented edge differences `T(tail) − T(head)`, one row per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGradient {
    rows: DMatrix<f64>,
}

impl EdgeGradient {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn row_norms(&self) -> Vec<f64> {
        self.rows.row_iter().map(|r| r.norm()).collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.row_norms().into_iter().fold(0.0, f64::max)
    }
}

pub fn edge_gradient(g: &Graph, t: &LipschitzMap) -> Result<EdgeGradient> {
    t.check_vertices(g.vertex_count())?;
    let n = t.target_dim();
    let mut rows = DMatrix::zeros(g.edge_count(), n);
    for (e, &(tail, head)) in g.edges().iter().enumerate() {
        for j in 0..n {
            rows[(e, j)] = t.points[(tail, j)] - t.points[(head, j)];
        }
    }
    Ok(EdgeGradient { rows })
}

/// Lipschitz constant for the shortest-path metric, i.e. the largest edge stretch.
pub fn lipschitz_constant(g: &Graph, t: &LipschitzMap) -> Result<f64> {
    Ok(edge_gradient(g, t)?.max_norm())
}

/// Largest `|T(x) − T(y)| / m(x, y)` over all vertex pairs.
pub fn pairwise_lipschitz_constant(metric: &Metric, t: &LipschitzMap) -> Result<f64> {
    t.check_vertices(metric.size())?;
    let n = metric.size();
    let mut best = 0.0f64;
    for x in 0..n {
        for y in x + 1..n {
            let d = (t.points.row(x) - t.points.row(y)).norm();
            best = best.max(d / f64::from(metric.get(x, y)));
        }
    }
    Ok(best)
}

/// Returns the measured constant, or an error if it exceeds `1 + tol`.
pub fn validate(g: &Graph, t: &LipschitzMap, tol: f64) -> Result<f64> {
    let constant = lipschitz_constant(g, t)?;
    if constant > 1.0 + tol {
        return Err(Error::NotLipschitz { constant });
    }
    Ok(constant)
}

/// Subtracts the `μ`-mean from every point.
pub fn center(t: &LipschitzMap, mu: &WeightedSpace) -> Result<LipschitzMap> {
    let mean = t.mean(mu)?;
    let mut points = t.points.clone();
    for mut row in points.row_iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v -= mean[j];
        }
    }
    Ok(LipschitzMap { points })
}

/// Composes `T` with the orthogonal projection onto the complement of its
/// `μ`-mean `v`, written in the basis given by the Householder reflector that
/// sends `v/|v|` to the last axis (that coordinate is dropped).
pub fn reduce_noncentered(t: &LipschitzMap, mu: &WeightedSpace) -> Result<LipschitzMap> {
    let n = t.target_dim();
    if n < 2 {
        return Err(Error::DimensionOutOfRange {
            n,
            min: 2,
            max: usize::MAX,
        });
    }
    if t.is_centered(mu)? {
        return Err(Error::AlreadyCentered);
    }
    let mean = t.mean(mu)?;
    let h = householder_to_last(mean.as_slice());
    let rotated = &t.points * h.transpose();
    let reduced = rotated.columns(0, n - 1).into_owned();
    // The projection is exact up to rounding; recentre to clear it.
    center(&LipschitzMap { points: reduced }, mu)
}

/// Standard normal rows divided by the largest edge stretch; deterministic in `seed`.
pub fn random_lipschitz(g: &Graph, n: usize, seed: u64) -> Result<LipschitzMap> {
    if n == 0 {
        return Err(Error::DimensionOutOfRange {
            n,
            min: 1,
            max: usize::MAX,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = DMatrix::from_fn(g.vertex_count(), n, |_, _| {
        StandardNormal.sample(&mut rng)
    });
    Ok(rescale_to_unit(g, LipschitzMap { points }))
}

/// Divides by the largest edge stretch; zero-stretch (constant) maps are returned as is.
pub fn rescale_to_unit(g: &Graph, t: LipschitzMap) -> LipschitzMap {
    let stretch = lipschitz_constant(g, &t).expect("dimensions checked by caller");
    if stretch > 0.0 {
        t.scaled(1.0 / stretch)
    } else {
        t
    }
}

/// Coordinates are the `n` lowest nontrivial Laplacian eigenfunctions,
/// jointly rescaled to unit Lipschitz constant.
pub fn spectral_map(g: &Graph, n: usize) -> Result<LipschitzMap> {
    spectral_map_from(g, &LaplacianEigen::new(g), n)
}

pub fn spectral_map_from(g: &Graph, eig: &LaplacianEigen, n: usize) -> Result<LipschitzMap> {
    let max = g.vertex_count() - 1;
    if n == 0 || n > max {
        return Err(Error::DimensionOutOfRange { n, min: 1, max });
    }
    let points = eig.functions.columns(1, n).into_owned();
    let mu = crate::graph::stationary_measure(g);
    let centered = center(&LipschitzMap { points }, &mu)?;
    Ok(rescale_to_unit(g, centered))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{clique, hypercube, path, shortest_path_metric, stationary_measure};

    #[test]
    fn lipschitz_constant_examples() {
        let g = hypercube(2).unwrap();
        let c = LipschitzMap::constant(4, &[1.0, 2.0]).unwrap();
        assert_eq!(lipschitz_constant(&g, &c).unwrap(), 0.0);
        // vertex id bits are the coordinates
        let t = LipschitzMap::from_rows(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        assert_eq!(lipschitz_constant(&g, &t).unwrap(), 1.0);
        let p = path(3).unwrap();
        let t = LipschitzMap::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        assert_eq!(lipschitz_constant(&p, &t).unwrap(), 2.0);
        let short = LipschitzMap::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(matches!(
            lipschitz_constant(&p, &short),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn edge_gradient_examples() {
        let g = clique(2).unwrap();
        let t = LipschitzMap::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(edge_gradient(&g, &t).unwrap().matrix()[(0, 0)], -1.0);
        let flipped = edge_gradient(&g.with_flipped_edges(&[0]), &t).unwrap();
        assert_eq!(flipped.matrix()[(0, 0)], 1.0);
        let c = LipschitzMap::constant(2, &[4.0, 4.0]).unwrap();
        assert_eq!(edge_gradient(&g, &c).unwrap().max_norm(), 0.0);
    }

    #[test]
    fn center_examples() {
        let g = path(3).unwrap();
        let mu = stationary_measure(&g);
        let t = LipschitzMap::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let c = center(&t, &mu).unwrap();
        assert_eq!(c.points().as_slice(), &[-1.0, 0.0, 1.0]);
        assert_eq!(center(&c, &mu).unwrap(), c);
        let k = LipschitzMap::constant(3, &[5.0, -2.0]).unwrap();
        assert!(center(&k, &mu).unwrap().points().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn reduce_line_map() {
        // image on the line y = 1, x-coordinates already μ-centered
        let g = path(3).unwrap();
        let mu = stationary_measure(&g);
        let t = LipschitzMap::from_rows(&[vec![-1.0, 1.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let r = reduce_noncentered(&t, &mu).unwrap();
        assert_eq!(r.target_dim(), 1);
        let got: Vec<f64> = r.points().iter().copied().collect();
        for (a, b) in got.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(r.mean(&mu).unwrap().norm() < 1e-12);
        let centered = center(&t, &mu).unwrap();
        assert!(matches!(
            reduce_noncentered(&centered, &mu),
            Err(Error::AlreadyCentered)
        ));
        let one_dim = LipschitzMap::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert!(matches!(
            reduce_noncentered(&one_dim, &mu),
            Err(Error::DimensionOutOfRange { .. })
        ));
    }

    #[test]
    fn random_maps_are_deterministic_and_validated() {
        let g = hypercube(3).unwrap();
        let a = random_lipschitz(&g, 4, 7).unwrap();
        let b = random_lipschitz(&g, 4, 7).unwrap();
        assert_eq!(a, b);
        assert!(lipschitz_constant(&g, &a).unwrap() <= 1.0 + 1e-12);
        assert_ne!(a, random_lipschitz(&g, 4, 8).unwrap());
    }

    #[test]
    fn constant_map_is_not_rescaled() {
        let g = clique(3).unwrap();
        let c = LipschitzMap::constant(3, &[2.0]).unwrap();
        assert_eq!(rescale_to_unit(&g, c.clone()), c);
    }

    #[test]
    fn spectral_map_on_path_is_monotone() {
        let g = path(10).unwrap();
        let t = spectral_map(&g, 1).unwrap();
        let v: Vec<f64> = t.points().iter().copied().collect();
        let increasing = v.windows(2).all(|w| w[1] > w[0]);
        let decreasing = v.windows(2).all(|w| w[1] < w[0]);
        assert!(increasing || decreasing);
        assert!((lipschitz_constant(&g, &t).unwrap() - 1.0).abs() < 1e-12);
        assert!(t.is_centered(&stationary_measure(&g)).unwrap());
        assert!(spectral_map(&g, 10).is_err());
        assert!(spectral_map(&g, 0).is_err());
    }

    #[test]
    fn pairwise_matches_edge_constant() {
        let g = path(6).unwrap();
        let t = random_lipschitz(&g, 3, 1).unwrap();
        let m = shortest_path_metric(&g);
        let a = pairwise_lipschitz_constant(&m, &t).unwrap();
        let b = lipschitz_constant(&g, &t).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let t = LipschitzMap::from_rows(&[vec![0.5, -1.25], vec![3.0, 0.0]]).unwrap();
        let back = LipschitzMap::from_csv(&t.to_csv(true)).unwrap();
        assert_eq!(back, t);
        assert!(LipschitzMap::from_csv("# minproj-map n=3\n1,2\n").is_err());
        assert!(LipschitzMap::from_csv("1,2\n3\n").is_err());
        assert!(LipschitzMap::from_csv("1,abc\n").is_err());
        assert!(LipschitzMap::from_csv("# only comments\n").is_err());
    }
}
