use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gridcross_cli::experiment::{crossing_record, enumeration_record};
use gridcross_cli::{
    emit_report, parse_list, run_experiment, CliError, ExperimentConfig, ExperimentKind, Format,
    Record,
};
use gridcross_core::constructions::{
    augment_matching_to_spanning_tree, layered_complete_bipartite, random_crossing_free_matching,
    random_proper_graph, tile_bipartite,
};
use gridcross_core::crossings::{all_certificates, count_crossings_naive, count_crossings_pruned};
use gridcross_core::enumeration::ncs_lower_formula;
use gridcross_core::grid_graph::{GridGraph, GridSpec};
use gridcross_core::numtheory::{
    totient_rows, totient_sieve, verify_totient_inequalities, CubeHarmonicSum,
};
use num_rational::BigRational;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "gridcross",
    version,
    about = "Crossings of geometric graphs on the integer grid"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a graph and print it as graph JSON.
    Gen(GenArgs),
    /// Count the crossings of a graph read from a file or standard input.
    Cross(CrossArgs),
    /// Exact crossing-free counts on a small grid.
    Enum(EnumArgs),
    /// Totient sums, one row per n, or a summary of the inequality checks.
    Nt(NtArgs),
    /// Run a parameter sweep.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Construction {
    /// Every bottom-layer point joined to every top-layer point of k^(d-1) x 2.
    Layered,
    /// Disjoint copies of `layered` tiling side^(d-1) x 2.
    Tile,
    /// Uniformly sampled proper edges on a grid.
    Random,
    /// A random crossing-free inter-layer matching on k^(d-1) x 2.
    Matching,
    /// `matching` augmented to a crossing-free spanning tree.
    Tree,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    construction: Construction,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 2)]
    k: u64,
    /// Grid side; for `random` the grid is side^dim unless --grid is given.
    #[arg(long)]
    side: Option<u64>,
    /// Grid for `random`, e.g. 4x4x2.
    #[arg(long)]
    grid: Option<GridSpec>,
    /// Edge count for `random`.
    #[arg(long)]
    edges: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Naive,
    Pruned,
    /// Pruned count plus every lower-bound certificate.
    AllCertificates,
}

#[derive(Args)]
struct CrossArgs {
    /// Graph JSON file; standard input when absent or `-`.
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::Pruned)]
    method: Method,
    /// Highest essential level for the p-grid certificate.
    #[arg(long)]
    p_max: Option<u64>,
    /// Shorten every edge to its primitive step from the first endpoint first.
    #[arg(long)]
    reduce_edges: bool,
    /// Include the per-edge crossing counts.
    #[arg(long)]
    per_edge: bool,
    /// Add wall-clock time (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct EnumArgs {
    /// Grid, e.g. 2x2x2. Alternatively give --side and --dim.
    #[arg(long)]
    grid: Option<GridSpec>,
    #[arg(long)]
    side: Option<u64>,
    #[arg(long)]
    dim: Option<usize>,
    /// Constant c for the lower-bound formula, as a rational such as 3/2.
    #[arg(long)]
    c: Option<BigRational>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct NtArgs {
    #[arg(long)]
    n_max: u64,
    /// Add the exact value of Σφ(i)²/i³ as a reduced fraction (slow).
    #[arg(long)]
    exact: bool,
    /// Emit the inequality report instead of the table.
    #[arg(long)]
    summary: bool,
    #[arg(long, default_value_t = 0.05)]
    log_slope: f64,
    #[command(flatten)]
    output: OutputArgs,
}

/// A `2..6` / `1,4,9` style list.
#[derive(Clone)]
struct List(Vec<u64>);

fn list(s: &str) -> Result<List, String> {
    parse_list(s).map(List)
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    kind: ExperimentKind,
    /// Layer sides, e.g. 2..6.
    #[arg(long, value_parser = list)]
    k: Option<List>,
    /// Dimensions, e.g. 4,5.
    #[arg(long, value_parser = list)]
    dim: Option<List>,
    /// Comma-separated grids, e.g. 8x8,4x4x4.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<GridSpec>>,
    #[arg(long, value_parser = list)]
    edges: Option<List>,
    #[arg(long, value_parser = list)]
    seed: Option<List>,
    /// Values of n for `totients`.
    #[arg(long, value_parser = list)]
    n: Option<List>,
    #[arg(long)]
    p_max: Option<u64>,
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    output: OutputArgs,
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::io(e.to_string()).context(path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn read_graph(input: Option<&PathBuf>) -> Result<GridGraph, CliError> {
    let text = match input {
        Some(p) if p.as_os_str() != "-" => std::fs::read_to_string(p)
            .map_err(|e| CliError::io(e.to_string()).context(p.display()))?,
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        }
    };
    Ok(GridGraph::parse(&text)?)
}

fn require<T>(v: Option<T>, flag: &str, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::validation(format!("{what} needs {flag}")))
}

fn gen(a: GenArgs) -> Result<(), CliError> {
    let g = match a.construction {
        Construction::Layered => layered_complete_bipartite(a.k, a.dim)?,
        Construction::Tile => tile_bipartite(a.k, require(a.side, "--side", "tile")?, a.dim)?,
        Construction::Random => {
            let grid = match (a.grid, a.side) {
                (Some(g), _) => g,
                (None, Some(s)) => GridSpec::new(vec![s; a.dim])?,
                (None, None) => return Err(CliError::validation("random needs --grid or --side")),
            };
            random_proper_graph(&grid, require(a.edges, "--edges", "random")?, a.seed, true)?
        }
        Construction::Matching => random_crossing_free_matching(a.k, a.dim, a.seed)?,
        Construction::Tree => {
            let m = random_crossing_free_matching(a.k, a.dim, a.seed)?;
            augment_matching_to_spanning_tree(&m, a.k, a.dim)?
        }
    };
    let mut text = g.serialize();
    text.push('\n');
    write_output(a.out.as_ref(), &text)
}

fn cross(a: CrossArgs) -> Result<(), CliError> {
    let mut g = read_graph(a.input.as_ref())?;
    if a.reduce_edges {
        g = g.reduce_edges();
    }
    let start = Instant::now();
    let (report, certs) = match a.method {
        Method::Naive => (count_crossings_naive(&g)?, None),
        Method::Pruned => (count_crossings_pruned(&g)?, None),
        Method::AllCertificates => (
            count_crossings_pruned(&g)?,
            Some(all_certificates(&g, a.p_max)?),
        ),
    };
    let mut r = crossing_record(&g, &report, certs.as_deref(), a.per_edge)?;
    if a.timing {
        r.insert(
            "wall_ms_f64".into(),
            json!(start.elapsed().as_secs_f64() * 1e3),
        );
    }
    write_output(a.output.out.as_ref(), &emit_report(&[r], a.output.format)?)
}

fn enumerate(a: EnumArgs) -> Result<(), CliError> {
    let grid = match (a.grid, a.side, a.dim) {
        (Some(g), _, _) => g,
        (None, Some(s), Some(d)) => GridSpec::new(vec![s; d])?,
        _ => {
            return Err(CliError::validation(
                "enum needs --grid or both --side and --dim",
            ))
        }
    };
    let mut r = enumeration_record(&grid)?;
    if let Some(c) = &a.c {
        r.insert("c".into(), json!(c.to_string()));
        r.insert(
            "ncs_lower".into(),
            json!(ncs_lower_formula(&grid.volume(), c)?.to_string()),
        );
    }
    write_output(a.output.out.as_ref(), &emit_report(&[r], a.output.format)?)
}

fn nt(a: NtArgs) -> Result<(), CliError> {
    if a.n_max == 0 {
        return Err(CliError::validation("--n-max must be at least 1"));
    }
    if a.summary {
        let report = verify_totient_inequalities(a.n_max, a.log_slope)?;
        let mut r = Record::new();
        let value = serde_json::to_value(&report).expect("report is plain data");
        for (k, v) in value.as_object().expect("struct") {
            r.insert(k.clone(), v.clone());
        }
        return write_output(a.output.out.as_ref(), &emit_report(&[r], a.output.format)?);
    }
    let mut exact = a.exact.then(CubeHarmonicSum::new);
    let phi = a.exact.then(|| totient_sieve(a.n_max));
    let records: Vec<Record> = totient_rows(a.n_max)
        .map(|row| {
            let mut r = Record::new();
            r.insert("n".into(), json!(row.n));
            r.insert("phi".into(), json!(row.phi));
            r.insert("s1".into(), json!(row.s1.to_string()));
            r.insert("s2".into(), json!(row.s2.to_string()));
            r.insert("s3_f64".into(), json!(row.s3_f64));
            if let (Some(acc), Some(phi)) = (exact.as_mut(), phi.as_ref()) {
                acc.push(phi.get(row.n));
                r.insert("s3".into(), json!(acc.value().to_string()));
            }
            r
        })
        .collect();
    write_output(
        a.output.out.as_ref(),
        &emit_report(&records, a.output.format)?,
    )
}

fn experiment(a: ExperimentArgs) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::defaults(a.kind);
    let to_usize = |v: List| v.0.into_iter().map(|x| x as usize).collect::<Vec<_>>();
    if let Some(k) = a.k {
        cfg.ks = k.0;
    }
    if let Some(d) = a.dim {
        cfg.dims = to_usize(d);
    }
    if let Some(g) = a.grid {
        cfg.grids = g;
    }
    if let Some(e) = a.edges {
        cfg.edges = to_usize(e);
    }
    if let Some(s) = a.seed {
        cfg.seeds = s.0;
    }
    if let Some(n) = a.n {
        cfg.ns = n.0;
    }
    if a.p_max.is_some() {
        cfg.p_max = a.p_max;
    }
    cfg.timing = a.timing;
    let records = run_experiment(&cfg)?;
    write_output(
        a.output.out.as_ref(),
        &emit_report(&records, a.output.format)?,
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("{}", CliError::validation(first).to_json_line());
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Cross(a) => cross(a),
        Command::Enum(a) => enumerate(a),
        Command::Nt(a) => nt(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
