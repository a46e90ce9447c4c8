use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use minproj_cli::commands::{self, VerifyOptions};
use minproj_cli::{resolve_seed, CliError, CliResult, RunManifest};
use minproj_core::spectral::DEFAULT_GROUPING_TOL;
use minproj_core::{Family, GraphContext, LipschitzMap, SearchConfig, StepDecay};

#[derive(Parser)]
#[command(name = "minproj", version, about = "Minimal covariance projections of Lipschitz maps on graphs")]
struct Cli {
    /// Worker threads for sweeps (default: number of processors).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the edge list of a generated graph.
    Gen {
        #[arg(value_parser = parse_family)]
        family: Family,
        param: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Laplacian spectrum of an edge-list graph as CSV.
    Spectrum {
        graph: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GROUPING_TOL)]
        grouping_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyse one map and check the projection bound.
    Analyze(AnalyzeArgs),
    /// Check the bound on random maps over a family sweep.
    Verify(VerifyArgs),
    /// Search for maps with a large minimal projection.
    Extremal(ExtremalArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    graph: PathBuf,
    /// Map CSV, one row per vertex.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    map: Option<PathBuf>,
    /// Use a random 1-Lipschitz map; the seed defaults to MINPROJ_SEED or 42.
    #[arg(long, num_args = 0..=1, value_name = "SEED", requires = "n")]
    random: Option<Option<u64>>,
    #[arg(long)]
    n: Option<usize>,
    /// Analyse the map without centering it first.
    #[arg(long)]
    noncentered: bool,
    #[arg(long)]
    graph_id: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    /// `a..b` (inclusive) or a comma list.
    #[arg(long)]
    params: String,
    #[arg(long)]
    n_range: String,
    #[arg(long, default_value_t = 20)]
    maps_per_cell: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    noncentered: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Decay {
    InverseSqrt,
    Constant,
}

#[derive(Args)]
struct ExtremalArgs {
    #[arg(long, conflicts_with = "family")]
    graph: Option<PathBuf>,
    #[arg(long, value_parser = parse_family, required_unless_present = "graph")]
    family: Option<Family>,
    #[arg(long, conflicts_with = "params")]
    param: Option<usize>,
    /// Sweep mode: `a..b` or a comma list of family parameters.
    #[arg(long, requires = "family")]
    params: Option<String>,
    #[arg(long, conflicts_with = "n_range", required_unless_present = "n_range")]
    n: Option<usize>,
    /// Sweep mode: target dimensions.
    #[arg(long)]
    n_range: Option<String>,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 300)]
    max_iters: usize,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[arg(long, value_enum, default_value_t = Decay::InverseSqrt)]
    decay: Decay,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    graph_id: Option<String>,
    /// JSON result (single run) or sweep CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Best map as CSV (single run).
    #[arg(long)]
    map_out: Option<PathBuf>,
    /// Per-cell JSON reports (sweep mode).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(minproj_cli::EXIT_INPUT);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(minproj_cli::EXIT_INPUT);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn arguments() -> Vec<String> {
    std::env::args().skip(1).collect()
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn seed(flag: Option<u64>) -> CliResult<u64> {
    let s = resolve_seed(flag).map_err(CliError::Input)?;
    eprintln!("seed: {s}");
    Ok(s)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into())
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Gen { family, param, out } => {
            let text = commands::gen(family, param)?;
            write_out(out.as_deref(), &text)
        }
        Command::Spectrum { graph, grouping_tol, out } => {
            let text = read(&graph)?;
            let g = commands::parse_graph(&text)?;
            let mut manifest = RunManifest::new("spectrum", arguments(), None);
            manifest.add_input(&graph.display().to_string(), text.as_bytes());
            let csv = commands::spectrum_csv(&g, grouping_tol)?;
            write_out(out.as_deref(), &format!("{}{csv}", manifest.csv_comment()))
        }
        Command::Analyze(a) => analyze(a),
        Command::Verify(v) => verify(v),
        Command::Extremal(x) => extremal(x),
    }
}

fn analyze(a: AnalyzeArgs) -> CliResult<()> {
    let text = read(&a.graph)?;
    let g = commands::parse_graph(&text)?;
    let ctx = GraphContext::new(&g);
    let (map, seed_used, map_text) = match (&a.map, a.random) {
        (Some(path), _) => {
            let t = read(path)?;
            (LipschitzMap::from_csv(&t)?, None, Some((path.display().to_string(), t)))
        }
        (None, Some(flag)) => {
            let s = seed(flag)?;
            let n = a.n.ok_or_else(|| CliError::Input("--random requires --n".into()))?;
            (commands::random_map(&g, n, s)?, Some(s), None)
        }
        (None, None) => return Err(CliError::Input("either --map or --random is required".into())),
    };
    let mut manifest = RunManifest::new("analyze", arguments(), seed_used);
    manifest.add_input(&a.graph.display().to_string(), text.as_bytes());
    if let Some((path, t)) = map_text {
        manifest.add_input(&path, t.as_bytes());
    }
    let graph_id = a.graph_id.unwrap_or_else(|| stem(&a.graph));
    let report = commands::analyze(&ctx, &map, !a.noncentered)?;
    write_out(a.out.as_deref(), &commands::analysis_document(&manifest, &graph_id, &report))?;
    commands::check_bound(&report, &graph_id)
}

fn verify(v: VerifyArgs) -> CliResult<()> {
    let s = seed(v.seed)?;
    let opts = VerifyOptions {
        family: v.family,
        params: commands::parse_range(&v.params)?,
        n_range: commands::parse_range(&v.n_range)?,
        maps_per_cell: v.maps_per_cell,
        seed: s,
        centered: !v.noncentered,
    };
    let manifest = RunManifest::new("verify", arguments(), Some(s));
    let cells = commands::verify(&opts)?;
    write_out(v.out.as_deref(), &commands::verify_csv(&manifest, &cells))?;
    commands::verify_violations(&cells)
}

fn search_config(x: &ExtremalArgs, seed: u64) -> CliResult<SearchConfig> {
    let cfg = SearchConfig {
        restarts: x.restarts,
        max_iters: x.max_iters,
        initial_step: x.step,
        decay: match x.decay {
            Decay::InverseSqrt => StepDecay::InverseSqrt,
            Decay::Constant => StepDecay::Constant,
        },
        tolerance: x.tol,
        seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn extremal(x: ExtremalArgs) -> CliResult<()> {
    let s = seed(x.seed)?;
    let cfg = search_config(&x, s)?;
    if x.params.is_some() || x.n_range.is_some() {
        return extremal_sweep(&x, &cfg);
    }
    let n = x.n.ok_or_else(|| CliError::Input("--n is required".into()))?;
    let mut manifest = RunManifest::new("extremal", arguments(), Some(s));
    let (g, default_id) = match (&x.graph, x.family) {
        (Some(path), _) => {
            let text = read(path)?;
            manifest.add_input(&path.display().to_string(), text.as_bytes());
            (commands::parse_graph(&text)?, stem(path))
        }
        (None, Some(family)) => {
            let p = x
                .param
                .ok_or_else(|| CliError::Input("--family requires --param or --params".into()))?;
            (family.build(p)?, format!("{family}{p}"))
        }
        (None, None) => return Err(CliError::Input("either --graph or --family is required".into())),
    };
    let graph_id = x.graph_id.clone().unwrap_or(default_id);
    let out = commands::extremal(&GraphContext::new(&g), n, &cfg)?;
    write_out(
        x.out.as_deref(),
        &commands::extremal_document(&manifest, &graph_id, &cfg, &out),
    )?;
    if let Some(path) = &x.map_out {
        write_out(Some(path), &out.search.best_map.to_csv(true))?;
    }
    commands::check_bound(&out.bound, &graph_id)
}

fn extremal_sweep(x: &ExtremalArgs, cfg: &SearchConfig) -> CliResult<()> {
    let family = x
        .family
        .ok_or_else(|| CliError::Input("sweep mode requires --family".into()))?;
    let params = match (&x.params, x.param) {
        (Some(r), _) => commands::parse_range(r)?,
        (None, Some(p)) => vec![p],
        (None, None) => return Err(CliError::Input("sweep mode requires --params".into())),
    };
    let n_range = match (&x.n_range, x.n) {
        (Some(r), _) => commands::parse_range(r)?,
        (None, Some(n)) => vec![n],
        (None, None) => return Err(CliError::Input("sweep mode requires --n-range".into())),
    };
    let manifest = RunManifest::new("extremal", arguments(), Some(cfg.seed));
    let cells = commands::extremal_sweep(family, &params, &n_range, cfg);
    if let Some(dir) = &x.out_dir {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        for c in &cells {
            if let Ok(o) = &c.outcome {
                let path = dir.join(format!("{}_n{}.json", c.graph_id(), c.n));
                write_out(Some(&path), &commands::extremal_document(&manifest, &c.graph_id(), cfg, o))?;
            }
        }
    }
    write_out(x.out.as_deref(), &commands::extremal_sweep_csv(&manifest, cfg.seed, &cells))?;
    let mut failed = Vec::new();
    for c in &cells {
        match &c.outcome {
            Err(e) => eprintln!("warning: {} n={}: {e}", c.graph_id(), c.n),
            Ok(o) if !o.bound.passes() => failed.push(format!("{} n={}", c.graph_id(), c.n)),
            Ok(_) => {}
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(failed.join("; ")))
    }
}
