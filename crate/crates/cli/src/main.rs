//! `tdd`: replay a trace, or a seeded random one, against the dynamic
//! tree-depth structure and print one JSON record per command.

use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use tdd_core::harness::{
    fuzz_commands, parse_graph, parse_trace, run, FuzzConfig, HarnessError, RunConfig,
};
use tdd_core::mso::DEFAULT_MAX_VERTICES;

#[derive(Parser, Debug)]
#[command(name = "tdd", version, about)]
struct Args {
    /// Depth bound D.
    #[arg(long)]
    depth: usize,
    /// File holding the query formula.
    #[arg(long)]
    formula: PathBuf,
    /// Initial edge list, one `u v` pair per line.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Trace file. Without it and without --seed the trace is empty.
    #[arg(long, conflicts_with = "seed")]
    trace: Option<PathBuf>,
    /// Check the structure against the oracles after every command.
    #[arg(long)]
    verify: bool,
    /// Catalog cache file, read if present and written otherwise.
    #[arg(long)]
    catalog_cache: Option<PathBuf>,
    /// Generate a random trace from this seed; implies --verify.
    #[arg(long)]
    seed: Option<u64>,
    /// Length of the generated trace.
    #[arg(long, default_value_t = 500, requires = "seed")]
    commands: usize,
    /// Vertex cap of the generated trace.
    #[arg(long, default_value_t = 10, requires = "seed")]
    vertices: usize,
    /// Most trees the catalog may hold.
    #[arg(long)]
    budget_catalog: Option<usize>,
    /// Most vertices a formula evaluation may see.
    #[arg(long, default_value_t = DEFAULT_MAX_VERTICES)]
    budget_eval: usize,
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let args = Args::parse();
    match drive(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tdd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn drive(args: &Args) -> Result<(), HarnessError> {
    let mut cfg = RunConfig::new(args.depth, &read(&args.formula)?);
    cfg.verify = args.verify || args.seed.is_some();
    cfg.catalog_cache = args.catalog_cache.clone();
    cfg.budget_eval = args.budget_eval;
    if let Some(b) = args.budget_catalog {
        cfg.budget_catalog = b;
    }
    let edges = match &args.graph {
        Some(p) => parse_graph(&read(p)?)?,
        None => Vec::new(),
    };
    let commands = match (&args.trace, args.seed) {
        (Some(p), _) => parse_trace(&read(p)?)?,
        (None, Some(seed)) => {
            if !edges.is_empty() {
                return Err(HarnessError::Config("--seed starts from an empty graph".into()));
            }
            fuzz_commands(&FuzzConfig {
                seed,
                commands: args.commands,
                vertex_cap: args.vertices,
                depth: args.depth,
            })
        }
        (None, None) => Vec::new(),
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let mut write_err = None;
    let summary = run(&cfg, &edges, &commands, |r| {
        if write_err.is_none() {
            if let Err(e) = writeln!(out, "{}", r.to_json_line()) {
                write_err = Some(e);
            }
        }
    });
    let flushed = out.flush();
    if let Some(e) = write_err.or(flushed.err()) {
        return Err(HarnessError::Io(e.to_string()));
    }
    let summary = summary?;
    eprintln!(
        "tdd: {} commands, {} rejected, S = {}{}",
        summary.commands,
        summary.rejected,
        summary.s,
        if summary.from_cache { " (cached catalog)" } else { "" }
    );
    Ok(())
}
