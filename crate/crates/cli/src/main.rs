use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use dyncu::groupoid::{orbit_dot, orbit_graph, orbits};
use dyncu::subequiv::check_names;
use dyncu::typesemi::{paradox_report, tarski_test};
use dyncu::{analyze, find_invariant_state, Budget, Engine, Error, LscFun, ModelSpec, StateOutcome};

/// Decide comparison, paradoxes and the stably-finite / purely-infinite
/// dichotomy for inverse-semigroup actions on finite and path spaces.
#[derive(Parser)]
#[command(name = "dyncu", version)]
struct Cli {
    /// Budget overrides, e.g. depth=2,len=3,mult=4,nmax=8,nodes=200000.
    #[arg(long, global = true)]
    budget: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full verdict with the hypothesis ledger.
    Analyze { model: PathBuf },
    /// Decide F ≼ H.
    Compare { model: PathBuf, f: String, h: String },
    /// Decide k·F ≼ l·F.
    Paradox { model: PathBuf, f: String, k: u64, l: u64 },
    /// A state normalised at F, or an (n+1, n) paradox.
    Tarski { model: PathBuf, f: String },
    /// An invariant state normalised at F0, or an infeasibility certificate.
    State { model: PathBuf, f0: String },
    /// Orbits (finite spaces) and the orbit graph.
    Orbits {
        model: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

fn load(path: &Path, cli_budget: Option<&str>) -> Result<ModelSpec, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::schema(path.display().to_string(), format!("cannot read: {e}")))?;
    let spec = ModelSpec::parse(&text, Budget::from_env()?)?;
    match cli_budget {
        Some(b) => {
            let budget = spec.model.budget.with_overrides(b)?;
            spec.with_budget(budget)
        }
        None => Ok(spec),
    }
}

fn function(spec: &ModelSpec, arg: &str, name: &str) -> Result<LscFun, Error> {
    let v: Value = serde_json::from_str(arg).map_err(|e| Error::schema(name, e.to_string()))?;
    LscFun::from_json(spec.space(), &v, name)
}

fn run(cli: &Cli) -> Result<(Value, String), Error> {
    let budget = cli.budget.as_deref();
    match &cli.command {
        Command::Analyze { model } => {
            let spec = load(model, budget)?;
            let v = analyze(&spec)?;
            Ok((v.to_json(&spec), v.summary()))
        }
        Command::Compare { model, f, h } => {
            let spec = load(model, budget)?;
            let (f, h) = (function(&spec, f, "F")?, function(&spec, h, "H")?);
            let engine = Engine::new(&spec.model);
            let d = engine.decide(&f, &h)?;
            if let dyncu::Decision::Yes(w) = &d {
                check_names(w, &spec.model)?;
            }
            let out = json!({ "F": f.to_json(), "H": h.to_json(), "decision": d.to_json() });
            Ok((out, d.label().to_string()))
        }
        Command::Paradox { model, f, k, l } => {
            let spec = load(model, budget)?;
            let f = function(&spec, f, "F")?;
            let engine = Engine::new(&spec.model);
            let r = paradox_report(&engine, &f, *k, *l, spec.model.budget.nmax as usize)?;
            let label = r.pairs[0].decision.label().to_string();
            Ok((r.to_json(), format!("({k}, {l}): {label}")))
        }
        Command::Tarski { model, f } => {
            let spec = load(model, budget)?;
            let f = function(&spec, f, "F")?;
            let engine = Engine::new(&spec.model);
            let t = tarski_test(&engine, &f, spec.model.budget.nmax as usize)?;
            let out = t.to_json();
            let label = out["outcome"].as_str().unwrap_or_default().to_string();
            Ok((out, label))
        }
        Command::State { model, f0 } => {
            let spec = load(model, budget)?;
            let f0 = function(&spec, f0, "F0")?;
            Ok(match find_invariant_state(&spec.model, &f0)? {
                StateOutcome::Found(s) => (json!({ "outcome": "Found", "state": s.to_json() }), "Found".into()),
                StateOutcome::Infeasible(c) => (
                    json!({ "outcome": "Infeasible", "certificate": c.to_json() }),
                    "Infeasible".into(),
                ),
            })
        }
        Command::Orbits { model, dot } => {
            let spec = load(model, budget)?;
            let m = &spec.model;
            if let Some(p) = dot {
                std::fs::write(p, orbit_dot(m))
                    .map_err(|e| Error::schema(p.display().to_string(), format!("cannot write: {e}")))?;
            }
            let labels = m.space.point_labels();
            let orbs: Vec<Vec<String>> = orbits(m)
                .iter()
                .map(|o| o.iter().map(|&x| labels[x].clone()).collect())
                .collect();
            let n = orbs.len();
            let out = json!({ "orbits": orbs, "edges": orbit_graph(m) });
            let summary = if m.is_finite() { format!("{n} orbits") } else { "orbit graph".into() };
            Ok((out, summary))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((out, summary)) => {
            let text = serde_json::to_string_pretty(&out).expect("JSON values serialise");
            // a closed pipe downstream is not an analysis failure
            let _ = writeln!(std::io::stdout(), "{text}");
            eprintln!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e @ Error::Inconsistency(_)) => {
            eprintln!("internal inconsistency: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
