//! Search for 1-Lipschitz maps with a large smallest projection.
//!
//! Maximizing `λ_min(M(T))` over 1-Lipschitz centered maps is nonconvex.
//! Each restart runs projected subgradient ascent from one initialization
//! (the spectral map, then random maps), and the values reported are lower
//! bounds on the extremal value, never certified optima.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Family, Graph};
use crate::lipschitz::{center, lipschitz_constant, random_lipschitz, spectral_map_from, LipschitzMap};
use crate::projection::{covariance, min_projection, GraphContext};
use crate::space::WeightedSpace;
use crate::spectral::DEFAULT_GROUPING_TOL;

/// Sweeps over the Lipschitz constraint before falling back to a rescale.
pub const PROJECTION_MAX_PASSES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepDecay {
    /// `step_k = step_0 / √k`
    InverseSqrt,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Initial step as a fraction of the image diameter.
    pub initial_step: f64,
    pub decay: StepDecay,
    /// Lipschitz slack for the feasibility projection and stall threshold for early stopping.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iters: 300,
            initial_step: 0.1,
            decay: StepDecay::InverseSqrt,
            tolerance: 1e-9,
            seed: 42,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be positive".into()));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::InvalidConfig("initial step must be positive".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        Ok(())
    }

    fn step(&self, iter: usize) -> f64 {
        match self.decay {
            StepDecay::InverseSqrt => self.initial_step / (iter as f64).sqrt(),
            StepDecay::Constant => self.initial_step,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Spectral,
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartSummary {
    pub index: usize,
    pub init: InitKind,
    pub initial_value: f64,
    pub best_value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_map: LipschitzMap,
    pub best_value: f64,
    pub best_restart: usize,
    /// Per restart, the retained best value after each iteration (index 0 is the initialization).
    pub history: Vec<Vec<f64>>,
    pub restarts_summary: Vec<RestartSummary>,
}

/// Restores `Lip(T) ≤ 1 + tol` by cyclic per-edge corrections: each violating
/// edge has its endpoints pulled symmetrically towards their midpoint until it
/// has unit length. Falls back to a global rescale if the sweeps do not converge.
pub fn project_to_lipschitz(g: &Graph, t: &LipschitzMap, tol: f64) -> Result<LipschitzMap> {
    let constant = lipschitz_constant(g, t)?;
    if constant <= 1.0 + tol {
        return Ok(t.clone());
    }
    let mut points = t.points().clone();
    let n = t.target_dim();
    let mut diff = vec![0.0; n];
    for _ in 0..PROJECTION_MAX_PASSES {
        let mut worst = 0.0f64;
        for &(u, v) in g.edges() {
            for (j, d) in diff.iter_mut().enumerate() {
                *d = points[(u, j)] - points[(v, j)];
            }
            let len = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
            worst = worst.max(len);
            if len > 1.0 {
                let shrink = 0.5 * (len - 1.0) / len;
                for (j, d) in diff.iter().enumerate() {
                    points[(u, j)] -= shrink * d;
                    points[(v, j)] += shrink * d;
                }
            }
        }
        if worst <= 1.0 + tol {
            return LipschitzMap::new(points);
        }
    }
    let out = LipschitzMap::new(points)?;
    let c = lipschitz_constant(g, &out)?;
    if c <= 1.0 + tol {
        Ok(out)
    } else {
        Ok(t.scaled(1.0 / constant))
    }
}

/// Restores feasibility, removes any residual excess by rescaling and recenters.
fn feasible_centered(g: &Graph, mu: &WeightedSpace, t: &LipschitzMap, tol: f64) -> Result<LipschitzMap> {
    let projected = project_to_lipschitz(g, t, tol)?;
    let c = lipschitz_constant(g, &projected)?;
    let scaled = if c > 1.0 { projected.scaled(1.0 / c) } else { projected };
    center(&scaled, mu)
}

/// Ascent direction for `λ_min(M(T))`: row `x` is `μ(x)·P T(x)` with `P` the
/// projector onto the (possibly multiple) minimal eigenspace.
fn subgradient(t: &LipschitzMap, mu: &WeightedSpace, rng: &mut ChaCha8Rng) -> Result<DMatrix<f64>> {
    let cov = covariance(t, mu)?;
    let (values, vectors) = cov.eigen();
    let lmax = values.last().copied().unwrap_or(0.0).abs();
    let tie = DEFAULT_GROUPING_TOL * lmax + 1e-15;
    let tied = values.iter().take_while(|&&v| v - values[0] <= tie).count();
    let q = vectors.columns(0, tied).into_owned();
    let projector = &q * q.transpose() / tied as f64;
    let mut grad = t.points() * &projector;
    for (x, w) in mu.weights().iter().enumerate() {
        grad.row_mut(x).scale_mut(*w);
    }
    if grad.iter().all(|v| v.abs() <= 1e-300) {
        // Image orthogonal to the minimal eigenspace: push along it at random.
        let noise = DMatrix::from_fn(t.vertex_count(), t.target_dim(), |_, _| {
            StandardNormal.sample(rng)
        });
        grad = noise * &projector;
        for (x, w) in mu.weights().iter().enumerate() {
            grad.row_mut(x).scale_mut(*w);
        }
    }
    Ok(grad)
}

fn restart_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 of (seed, index)
    let mut z = seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const STALL_WINDOW: usize = 25;

pub fn maximize_min_projection(g: &Graph, n: usize, cfg: &SearchConfig) -> Result<SearchResult> {
    maximize_with_context(&GraphContext::new(g), n, cfg)
}

pub fn maximize_with_context(ctx: &GraphContext, n: usize, cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let g = ctx.graph();
    let max = g.vertex_count() - 1;
    if n < 2 || n > max {
        return Err(Error::DimensionOutOfRange { n, min: 2, max });
    }
    let mu = ctx.measure();

    let mut best: Option<(f64, usize, LipschitzMap)> = None;
    let mut history = Vec::with_capacity(cfg.restarts);
    let mut summary = Vec::with_capacity(cfg.restarts);

    for index in 0..cfg.restarts {
        let rseed = restart_seed(cfg.seed, index);
        let (init, start) = if index == 0 {
            (InitKind::Spectral, spectral_map_from(g, ctx.laplacian_eigen(), n)?)
        } else {
            (InitKind::Random { seed: rseed }, random_lipschitz(g, n, rseed)?)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(rseed ^ 0xA5A5_A5A5);
        let mut current = feasible_centered(g, mu, &start, cfg.tolerance)?;
        let initial_value = min_projection(&current, mu)?.value;
        let mut restart_best = (initial_value, current.clone());
        let mut trace = vec![initial_value];
        let mut last_improvement = 0usize;

        for iter in 1..=cfg.max_iters {
            let grad = subgradient(&current, mu, &mut rng)?;
            let scale = grad.row_iter().fold(0.0f64, |m, r| m.max(r.norm()));
            if scale == 0.0 {
                break;
            }
            let diameter = current.image_diameter();
            let reach = if diameter > 0.0 { diameter } else { 1.0 };
            let step = cfg.step(iter) * reach / scale;
            let moved = LipschitzMap::new(current.points() + grad * step)?;
            current = feasible_centered(g, mu, &moved, cfg.tolerance)?;
            let value = min_projection(&current, mu)?.value;
            if value > restart_best.0 + cfg.tolerance {
                last_improvement = iter;
            }
            if value > restart_best.0 {
                restart_best = (value, current.clone());
            }
            trace.push(restart_best.0);
            if iter - last_improvement >= STALL_WINDOW {
                break;
            }
        }

        summary.push(RestartSummary {
            index,
            init,
            initial_value,
            best_value: restart_best.0,
            iterations: trace.len() - 1,
        });
        history.push(trace);
        if best.as_ref().is_none_or(|(v, _, _)| restart_best.0 > *v) {
            best = Some((restart_best.0, index, restart_best.1));
        }
    }

    let (_, best_restart, best_map) = best.expect("at least one restart");
    let best_value = min_projection(&best_map, mu)?.value;
    Ok(SearchResult {
        best_map,
        best_value,
        best_restart,
        history,
        restarts_summary: summary,
    })
}

/// One row of a constant-estimation sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantCell {
    pub family: Family,
    pub param: usize,
    pub n: usize,
    pub seed: u64,
    pub best_value: Option<f64>,
    pub bound_explicit: Option<f64>,
    pub bound_paper_form: Option<f64>,
    /// `best_value / bound_paper_form`.
    pub ratio: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantTable {
    pub cells: Vec<ConstantCell>,
    /// Largest ratio over successful cells: an empirical lower estimate of the constant.
    pub max_ratio: Option<f64>,
}

/// Runs the extremal search on every `(param, n)` cell of a family.
/// Failing cells are recorded and the sweep continues.
pub fn estimate_constant(
    family: Family,
    params: &[usize],
    n_range: &[usize],
    cfg: &SearchConfig,
) -> ConstantTable {
    let mut cells = Vec::new();
    for &param in params {
        let ctx = match family.build(param) {
            Ok(g) => Some(GraphContext::new(&g)),
            Err(e) => {
                for &n in n_range {
                    cells.push(failed_cell(family, param, n, cfg.seed, e.to_string()));
                }
                None
            }
        };
        let Some(ctx) = ctx else { continue };
        for &n in n_range {
            cells.push(run_cell(&ctx, family, param, n, cfg));
        }
    }
    let max_ratio = cells.iter().filter_map(|c| c.ratio).fold(None, |m: Option<f64>, r| {
        Some(m.map_or(r, |m| m.max(r)))
    });
    ConstantTable { cells, max_ratio }
}

fn failed_cell(family: Family, param: usize, n: usize, seed: u64, error: String) -> ConstantCell {
    ConstantCell {
        family,
        param,
        n,
        seed,
        best_value: None,
        bound_explicit: None,
        bound_paper_form: None,
        ratio: None,
        error: Some(error),
    }
}

fn run_cell(ctx: &GraphContext, family: Family, param: usize, n: usize, cfg: &SearchConfig) -> ConstantCell {
    let result = maximize_with_context(ctx, n, cfg)
        .and_then(|r| ctx.verify_bound(&r.best_map, true).map(|b| (r, b)));
    match result {
        Ok((r, b)) => ConstantCell {
            family,
            param,
            n,
            seed: cfg.seed,
            best_value: Some(r.best_value),
            bound_explicit: b.bound_rhs_explicit,
            bound_paper_form: b.bound_rhs_paper_form,
            ratio: b.bound_rhs_paper_form.map(|p| r.best_value / p),
            error: None,
        },
        Err(e) => failed_cell(family, param, n, cfg.seed, e.to_string()),
    }
}
