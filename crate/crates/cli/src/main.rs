//! `afc`: run verification scenarios and print a report.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use afc_cli::report::{to_csv, to_json, to_text};
use afc_cli::scenarios::{resolve_names, run_scenario, Config, CATALOG};
use afc_cli::{parse_expr, parse_expr_file};
use afc_core::Field;
use clap::{Parser, ValueEnum};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Output {
    Json,
    Csv,
    Text,
}

fn parse_field(s: &str) -> Result<Field, String> {
    match s {
        "q" | "Q" => Ok(Field::Rational),
        "f2" | "F2" => Ok(Field::F2),
        _ => {
            let p = s.strip_prefix("fp:").ok_or_else(|| format!("expected `q` or `fp:<prime>`, found `{s}`"))?;
            let p: u64 = p.parse().map_err(|_| format!("`{p}` is not an integer"))?;
            Field::prime(p).map_err(|e| e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "afc", version, about = "Exact checks of abelian functor calculus identities")]
struct Args {
    /// Scenario name, or `all`.
    #[arg(long, default_value = "all")]
    scenario: String,
    /// `q` or `fp:<p>`.
    #[arg(long, default_value = "fp:2", value_parser = parse_field)]
    field: Field,
    /// Truncation window: complexes are computed in degrees 0..=N.
    #[arg(long, default_value_t = 6)]
    window: usize,
    /// Functor expression replacing the scenario defaults (repeatable).
    #[arg(long = "expr")]
    exprs: Vec<String>,
    /// File with one expression per line.
    #[arg(long)]
    expr_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    out: Output,
    /// Largest input dimension on evaluation grids.
    #[arg(long, default_value_t = 2)]
    max_dim: usize,
    /// Largest derivative order.
    #[arg(long, default_value_t = 3)]
    max_n: usize,
    /// Record wall-clock time in the report.
    #[arg(long)]
    timing: bool,
    /// List the scenarios and exit.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list {
        for name in CATALOG {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    let mut exprs = Vec::new();
    for text in &args.exprs {
        match parse_expr(text) {
            Ok(e) => exprs.push(e),
            Err(e) => {
                eprintln!("afc: --expr `{text}`: {e}");
                return ExitCode::from(2);
            }
        }
    }
    if let Some(path) = &args.expr_file {
        let parsed = std::fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|t| parse_expr_file(&t).map_err(|e| e.to_string()));
        match parsed {
            Ok(es) => exprs.extend(es),
            Err(e) => {
                eprintln!("afc: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
    }
    let names = match resolve_names(&args.scenario) {
        Ok(n) => n,
        Err(e) => {
            eprintln!("afc: {e}; try --list");
            return ExitCode::from(2);
        }
    };
    let cfg = Config { field: args.field, window: args.window, exprs, seed: args.seed, max_dim: args.max_dim, max_n: args.max_n };
    let reports: Vec<_> = names
        .par_iter()
        .map(|name| {
            let start = Instant::now();
            let mut r = run_scenario(name, &cfg).expect("catalog name");
            if args.timing {
                r.wall_ms = start.elapsed().as_millis() as u64;
            }
            r
        })
        .collect();
    let text = match args.out {
        Output::Json => to_json(&reports),
        Output::Csv => to_csv(&reports),
        Output::Text => to_text(&reports),
    };
    print!("{text}");
    if reports.iter().any(|r| r.failed()) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
