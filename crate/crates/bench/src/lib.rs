//! Shared fixtures for the benchmarks.

use minproj_core::{center, hypercube, random_lipschitz, Graph, GraphContext, LipschitzMap};

/// Hypercube of dimension `d` with a centered random map into `ℝⁿ`.
pub fn hypercube_fixture(d: usize, n: usize) -> (Graph, LipschitzMap) {
    let g = hypercube(d).expect("valid dimension");
    let ctx = GraphContext::new(&g);
    let t = random_lipschitz(&g, n, 7).expect("valid map");
    let t = center(&t, ctx.measure()).expect("same size");
    (g, t)
}
