//! Command implementations. Each returns the output document as a string so
//! that `main` only handles argument parsing and file I/O.

use rayon::prelude::*;
use serde::Serialize;

use minproj_core::extremal::maximize_with_context;
use minproj_core::{
    center, from_edge_list, laplacian, random_lipschitz, spectrum, AnalysisReport, BoundReport,
    Error, Family, Graph, GraphContext, LipschitzMap, SearchConfig, SearchResult,
};

use crate::error::{CliError, CliResult};
use crate::manifest::{document, RunManifest};
use minproj_core::format_number;

pub fn gen(family: Family, param: usize) -> CliResult<String> {
    Ok(family.build(param)?.to_edge_list())
}

pub fn parse_graph(text: &str) -> CliResult<Graph> {
    Ok(from_edge_list(text)?)
}

pub fn spectrum_csv(g: &Graph, grouping_tol: f64) -> CliResult<String> {
    Ok(spectrum(&laplacian(g), grouping_tol)?.to_csv())
}

/// Runs the bound check on a validated map. In centered mode a map with a
/// nonzero mean is centered first; in noncentered mode a map that is already
/// centered is analysed on the centered path.
pub fn analyze(ctx: &GraphContext, t: &LipschitzMap, centered: bool) -> CliResult<BoundReport> {
    let g = ctx.graph();
    if t.vertex_count() != g.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: g.vertex_count(),
            found: t.vertex_count(),
        }
        .into());
    }
    let is_centered = t.is_centered(ctx.measure())?;
    let report = if centered || is_centered {
        let t = if is_centered { t.clone() } else { center(t, ctx.measure())? };
        ctx.verify_bound(&t, true)?
    } else {
        ctx.verify_bound(t, false)?
    };
    Ok(report)
}

pub fn check_bound(report: &BoundReport, label: &str) -> CliResult<()> {
    if report.passes() {
        return Ok(());
    }
    Err(CliError::Violation(format!(
        "{label}: min_projection {} exceeds bound {}",
        format_number(report.min_projection),
        report.bound_rhs_explicit.map_or("none".into(), format_number)
    )))
}

pub fn analysis_document(manifest: &RunManifest, graph_id: &str, report: &BoundReport) -> String {
    let r = AnalysisReport::from_bound(graph_id, report);
    document(manifest, vec![("report", serde_json::to_value(r).expect("report serializes"))])
}

/// Deterministic per-cell seed derived from the sweep seed and cell coordinates.
pub fn cell_seed(seed: u64, param: usize, n: usize, index: usize) -> u64 {
    let mut z = seed;
    for v in [param as u64, n as u64, index as u64] {
        z = splitmix(z ^ splitmix(v));
    }
    z
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub family: Family,
    pub params: Vec<usize>,
    pub n_range: Vec<usize>,
    pub maps_per_cell: usize,
    pub seed: u64,
    pub centered: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyCell {
    pub family: Family,
    pub param: usize,
    pub n: usize,
    pub maps: usize,
    pub max_min_projection: f64,
    pub bound_rhs_explicit: Option<f64>,
    pub bound_rhs_paper_form: Option<f64>,
    pub max_ratio_explicit: Option<f64>,
    pub max_ratio_paper_form: Option<f64>,
    pub chain_holds: bool,
    pub degenerate_maps: usize,
    pub violations: usize,
}

pub const VERIFY_HEADER: &str = "family,param,n,maps,max_min_projection,bound_rhs_explicit,bound_rhs_paper_form,max_ratio_explicit,max_ratio_paper_form,chain_holds,degenerate_maps,violations";

fn opt(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl VerifyCell {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.family,
            self.param,
            self.n,
            self.maps,
            format_number(self.max_min_projection),
            opt(self.bound_rhs_explicit),
            opt(self.bound_rhs_paper_form),
            opt(self.max_ratio_explicit),
            opt(self.max_ratio_paper_form),
            self.chain_holds,
            self.degenerate_maps,
            self.violations
        )
    }
}

fn verify_cell(ctx: &GraphContext, opts: &VerifyOptions, param: usize, n: usize) -> CliResult<VerifyCell> {
    let mut cell = VerifyCell {
        family: opts.family,
        param,
        n,
        maps: opts.maps_per_cell,
        max_min_projection: 0.0,
        bound_rhs_explicit: None,
        bound_rhs_paper_form: None,
        max_ratio_explicit: None,
        max_ratio_paper_form: None,
        chain_holds: true,
        degenerate_maps: 0,
        violations: 0,
    };
    for i in 0..opts.maps_per_cell {
        let t = random_lipschitz(ctx.graph(), n, cell_seed(opts.seed, param, n, i))?;
        let t = if opts.centered { center(&t, ctx.measure())? } else { t };
        let r = ctx.verify_bound(&t, opts.centered)?;
        cell.max_min_projection = cell.max_min_projection.max(r.min_projection);
        cell.bound_rhs_explicit = r.bound_rhs_explicit;
        cell.bound_rhs_paper_form = r.bound_rhs_paper_form;
        cell.max_ratio_explicit = max_opt(cell.max_ratio_explicit, r.ratio_explicit);
        cell.max_ratio_paper_form = max_opt(cell.max_ratio_paper_form, r.ratio_paper_form);
        cell.chain_holds &= r.chain_holds(1e-9);
        cell.degenerate_maps += usize::from(r.degenerate);
        cell.violations += usize::from(!r.passes());
    }
    Ok(cell)
}

/// Runs every `(param, n)` cell in parallel; results keep sweep order.
pub fn verify(opts: &VerifyOptions) -> CliResult<Vec<VerifyCell>> {
    if opts.maps_per_cell == 0 {
        return Err(CliError::Input("--maps-per-cell must be positive".into()));
    }
    if let Some(&n) = opts.n_range.iter().find(|&&n| n < 2) {
        return Err(Error::BoundInapplicable { n }.into());
    }
    let contexts: Vec<(usize, GraphContext)> = opts
        .params
        .par_iter()
        .map(|&p| opts.family.build(p).map(|g| (p, GraphContext::new(&g))))
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(&GraphContext, usize, usize)> = contexts
        .iter()
        .flat_map(|(p, ctx)| opts.n_range.iter().map(move |&n| (ctx, *p, n)))
        .collect();
    jobs.par_iter()
        .map(|&(ctx, p, n)| verify_cell(ctx, opts, p, n))
        .collect()
}

pub fn verify_csv(manifest: &RunManifest, cells: &[VerifyCell]) -> String {
    let mut out = manifest.csv_comment();
    out.push_str(VERIFY_HEADER);
    out.push('\n');
    for c in cells {
        out.push_str(&c.csv_row());
        out.push('\n');
    }
    out
}

pub fn verify_violations(cells: &[VerifyCell]) -> CliResult<()> {
    let bad: Vec<String> = cells
        .iter()
        .filter(|c| c.violations > 0)
        .map(|c| format!("{} {} n={} ({} maps)", c.family, c.param, c.n, c.violations))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(bad.join("; ")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalSummary {
    pub graph_id: String,
    pub n: usize,
    pub best_value: f64,
    pub best_restart: usize,
    pub config: SearchConfig,
    pub restarts: Vec<minproj_core::extremal::RestartSummary>,
    pub history: Vec<Vec<f64>>,
}

pub struct ExtremalOutcome {
    pub search: SearchResult,
    pub bound: BoundReport,
}

pub fn extremal(ctx: &GraphContext, n: usize, cfg: &SearchConfig) -> CliResult<ExtremalOutcome> {
    let search = maximize_with_context(ctx, n, cfg)?;
    let bound = ctx.verify_bound(&search.best_map, true)?;
    Ok(ExtremalOutcome { search, bound })
}

pub fn extremal_document(
    manifest: &RunManifest,
    graph_id: &str,
    cfg: &SearchConfig,
    out: &ExtremalOutcome,
) -> String {
    let summary = ExtremalSummary {
        graph_id: graph_id.to_string(),
        n: out.bound.n,
        best_value: out.search.best_value,
        best_restart: out.search.best_restart,
        config: cfg.clone(),
        restarts: out.search.restarts_summary.clone(),
        history: out.search.history.clone(),
    };
    let report = AnalysisReport::from_bound(graph_id, &out.bound);
    document(
        manifest,
        vec![
            ("result", serde_json::to_value(summary).expect("summary serializes")),
            ("report", serde_json::to_value(report).expect("report serializes")),
        ],
    )
}

pub const EXTREMAL_SWEEP_HEADER: &str = "family,param,n,seed,best_value,bound_rhs_explicit,bound_paper_form,ratio";

/// One extremal sweep cell; `outcome` is `Err` when the cell could not run.
pub struct ExtremalCell {
    pub family: Family,
    pub param: usize,
    pub n: usize,
    pub outcome: Result<ExtremalOutcome, String>,
}

impl ExtremalCell {
    pub fn graph_id(&self) -> String {
        format!("{}{}", self.family, self.param)
    }

    pub fn csv_row(&self, seed: u64) -> String {
        match &self.outcome {
            Ok(o) => format!(
                "{},{},{},{},{},{},{},{}",
                self.family,
                self.param,
                self.n,
                seed,
                format_number(o.search.best_value),
                opt(o.bound.bound_rhs_explicit),
                opt(o.bound.bound_rhs_paper_form),
                opt(o.bound.bound_rhs_paper_form.map(|b| o.search.best_value / b)),
            ),
            Err(_) => format!("{},{},{},{},,,,", self.family, self.param, self.n, seed),
        }
    }
}

pub fn extremal_sweep(family: Family, params: &[usize], n_range: &[usize], cfg: &SearchConfig) -> Vec<ExtremalCell> {
    let cells: Vec<(usize, usize)> = params
        .iter()
        .flat_map(|&p| n_range.iter().map(move |&n| (p, n)))
        .collect();
    cells
        .par_iter()
        .map(|&(param, n)| {
            let outcome = family
                .build(param)
                .map_err(CliError::from)
                .and_then(|g| extremal(&GraphContext::new(&g), n, cfg))
                .map_err(|e| e.to_string());
            ExtremalCell { family, param, n, outcome }
        })
        .collect()
}

pub fn extremal_sweep_csv(manifest: &RunManifest, seed: u64, cells: &[ExtremalCell]) -> String {
    let mut out = manifest.csv_comment();
    out.push_str(EXTREMAL_SWEEP_HEADER);
    out.push('\n');
    for c in cells {
        out.push_str(&c.csv_row(seed));
        out.push('\n');
    }
    out
}

/// Parses `a..b` (inclusive), `a,b,c`, or a single value. `a..b` with `a > b` is empty.
pub fn parse_range(text: &str) -> CliResult<Vec<usize>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| CliError::Input(format!("invalid range {text:?}")))
    };
    if let Some((a, b)) = text.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b) = (num(a)?, num(b)?);
        return Ok((a..=b).collect());
    }
    text.split(',').map(num).collect()
}

pub fn random_map(g: &Graph, n: usize, seed: u64) -> CliResult<LipschitzMap> {
    if n == 0 {
        return Err(CliError::Input("--n must be positive".into()));
    }
    Ok(random_lipschitz(g, n, seed)?)
}
