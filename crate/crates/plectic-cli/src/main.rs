//! Command-line front end: run verification suites against built-in or
//! loaded models and emit deterministic reports.
//!
//! Exit codes: 0 every check passed, 1 at least one residual check failed,
//! 2 usage error (unknown model or suite, malformed model file), 3 internal
//! evaluation error.

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use plectic_core::catalog::{self, Model};
use plectic_core::report::Report;
use plectic_core::suites::{self, Suite};

#[derive(Parser)]
#[command(
    name = "plectic",
    about = "Verification suites for bundle-valued plectic calculus",
    disable_help_subcommand = true
)]
struct Args {
    /// Built-in model name, `all`, or a path to a model JSON file.
    #[arg(long, default_value = "all")]
    model: String,
    /// Suite: cartan | algebroid | hms | compat | bracket | quaternionic |
    /// reduction | all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Number of sample points per check.
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Seed for the deterministic sampler.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Default residual threshold.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Output format: text | json.
    #[arg(long, default_value = "text")]
    format: String,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<String>,
    /// List the built-in models and exit.
    #[arg(long, default_value_t = false)]
    list: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list {
        for name in catalog::BUILTIN_NAMES {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    if args.points == 0 {
        eprintln!("error: --points must be at least 1");
        return ExitCode::from(2);
    }
    if !(args.tol > 0.0) {
        eprintln!("error: --tol must be positive");
        return ExitCode::from(2);
    }
    let Some(suite) = Suite::parse(&args.suite) else {
        eprintln!(
            "error: unknown suite `{}` (expected one of {})",
            args.suite,
            Suite::ALL_NAMES.join(", ")
        );
        return ExitCode::from(2);
    };
    if args.format != "text" && args.format != "json" {
        eprintln!("error: unknown format `{}` (expected text or json)", args.format);
        return ExitCode::from(2);
    }

    let models = match resolve_models(&args.model) {
        Ok(m) => m,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    let mut reports: Vec<Report> = Vec::new();
    for model in &models {
        match suites::run(model, suite, args.points, args.seed, args.tol) {
            Ok(rep) => reports.push(rep),
            Err(e) => {
                eprintln!("evaluation error on model {}: {e}", model.name);
                return ExitCode::from(3);
            }
        }
    }

    let rendered = match args.format.as_str() {
        "json" => render_json(&reports),
        _ => reports
            .iter()
            .map(Report::to_text)
            .collect::<Vec<_>>()
            .join("\n"),
    };
    if let Some(path) = &args.out {
        if let Err(e) = std::fs::write(path, &rendered) {
            eprintln!("error: cannot write {path}: {e}");
            return ExitCode::from(3);
        }
    } else {
        print!("{rendered}");
    }
    if reports.iter().all(Report::overall_pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn resolve_models(spec: &str) -> Result<Vec<Model>, String> {
    if spec == "all" {
        return catalog::BUILTIN_NAMES
            .iter()
            .map(|n| catalog::builtin(n).map_err(|e| e.to_string()))
            .collect();
    }
    if catalog::BUILTIN_NAMES.contains(&spec) {
        return Ok(vec![catalog::builtin(spec).map_err(|e| e.to_string())?]);
    }
    let path = Path::new(spec);
    if path.exists() {
        return Ok(vec![catalog::load(path).map_err(|e| e.to_string())?]);
    }
    Err(format!(
        "unknown model `{spec}` (not a built-in name and not a file); built-ins: {}",
        catalog::BUILTIN_NAMES.join(", ")
    ))
}

fn render_json(reports: &[Report]) -> String {
    if reports.len() == 1 {
        return reports[0].to_json();
    }
    let mut s = String::from("[\n");
    for (i, r) in reports.iter().enumerate() {
        let body = r.to_json();
        s.push_str(body.trim_end());
        s.push_str(if i + 1 < reports.len() { ",\n" } else { "\n" });
    }
    s.push_str("]\n");
    s
}
