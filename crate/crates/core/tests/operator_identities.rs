use minproj_core::linalg::max_abs_diff;
use minproj_core::{
    clique, cycle, gamma_star, gradient, hypercube, laplacian, path, random_connected, spectrum,
    Graph, GraphContext,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn suite() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for m in [2, 3, 5, 8, 13] {
        out.push((format!("clique{m}"), clique(m).unwrap()));
    }
    for d in 1..=5 {
        out.push((format!("hypercube{d}"), hypercube(d).unwrap()));
    }
    for m in [2, 3, 7, 20] {
        out.push((format!("path{m}"), path(m).unwrap()));
    }
    for m in [3, 4, 9] {
        out.push((format!("cycle{m}"), cycle(m).unwrap()));
    }
    for seed in 0..5 {
        out.push((format!("random{seed}"), random_connected(24, 0.1, seed).unwrap()));
    }
    out
}

/// Laplacian assembled straight from `Δf(x) = 2(f(x) − mean_{y∼x} f(y))`,
/// applied to each indicator function.
fn laplacian_by_definition(g: &Graph) -> DMatrix<f64> {
    let n = g.vertex_count();
    let mut m = DMatrix::zeros(n, n);
    for col in 0..n {
        let f: Vec<f64> = (0..n).map(|x| f64::from(u8::from(x == col))).collect();
        for x in 0..n {
            let avg: f64 = g.neighbors(x).iter().map(|&y| f[y]).sum::<f64>() / g.degree(x) as f64;
            m[(x, col)] = 2.0 * (f[x] - avg);
        }
    }
    m
}

#[test]
fn laplacian_matches_definition_and_factorization() {
    for (name, g) in suite() {
        let lap = laplacian(&g);
        assert!(max_abs_diff(lap.matrix(), &laplacian_by_definition(&g)) < 1e-15, "{name}");
        let grad = gradient(&g);
        let prod = grad.adjoint().compose(&grad).unwrap();
        assert!(max_abs_diff(prod.matrix(), lap.matrix()) < 1e-12, "{name}");
    }
}

#[test]
fn laplacian_ignores_orientation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, g) in suite() {
        let base = gradient(&g);
        let base = base.adjoint().compose(&base).unwrap();
        for _ in 0..5 {
            let flips: Vec<usize> = (0..g.edge_count()).filter(|_| rng.random_bool(0.5)).collect();
            let h = g.with_flipped_edges(&flips);
            let grad = gradient(&h);
            let lap = grad.adjoint().compose(&grad).unwrap();
            assert!(max_abs_diff(lap.matrix(), base.matrix()) < 1e-12, "{name}");
        }
    }
}

#[test]
fn spectrum_has_single_zero_and_is_bounded_by_four() {
    for (name, g) in suite() {
        let s = spectrum(&laplacian(&g), 1e-6).unwrap();
        assert_eq!(s.zero_count(), 1, "{name}");
        assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        assert!(s.nonzero().iter().all(|&l| l > 0.0 && l <= 4.0 + 1e-12), "{name}");
    }
}

#[test]
fn gamma_star_singular_values_are_inverse_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (name, g) in suite() {
        let ctx = GraphContext::new(&g);
        let sv = gamma_star(&g).singular_values();
        let lam = ctx.nonzero_eigenvalues();
        assert_eq!(sv.len(), g.vertex_count());
        for (i, &l) in lam.iter().enumerate() {
            assert!((sv[i] - l.powf(-0.5)).abs() < 1e-8, "{name}: s_{} = {} vs {}", i + 1, sv[i], l.powf(-0.5));
        }
        assert!(sv.last().unwrap().abs() < 1e-8);
        // orientation flips leave them unchanged
        let flips: Vec<usize> = (0..g.edge_count()).filter(|_| rng.random_bool(0.3)).collect();
        let flipped = gamma_star(&g.with_flipped_edges(&flips)).singular_values();
        for (a, b) in sv.iter().zip(&flipped) {
            assert!((a - b).abs() < 1e-10, "{name}");
        }
    }
}

#[test]
fn hypercube_matches_cycle_spectrum_for_d2() {
    let a = spectrum(&laplacian(&hypercube(2).unwrap()), 1e-6).unwrap();
    let b = spectrum(&laplacian(&cycle(4).unwrap()), 1e-6).unwrap();
    for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
        assert!((x - y).abs() < 1e-12);
    }
}
