use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hlforms::experiments::{
    geometric_grid, run_lower_experiment, run_upper_experiment, ExperimentConfig, ExperimentResult,
    FamilyKind, NormMethod,
};
use hlforms::exponent::parse_rational;
use hlforms::io::{form_to_sparse_json, read_form, write_json};
use hlforms::norms::{estimate_norm, exact_norm_sup, interpolation_upper_bound, AscentConfig};
use hlforms::theory::{classical_exponents, critical_rho, predicted_lambda, RegimeParams};
use hlforms::witnesses::{diagonal_kform, ksz_sample, lift_kform, Distribution};
use hlforms::{BlockPattern, Error, ExtendedExponent, Result};
use num::BigRational;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "hlforms",
    version,
    about = "Blocked-index summability of multilinear forms on l_p^n"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predicted growth exponent of the blocked power sum.
    Predict {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: String,
        #[arg(long)]
        r: String,
        /// Write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Critical summability exponent.
    Critical {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: String,
    },
    /// Classical exponent catalogue with cross-checks.
    Classical {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: String,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Norm of a form read from a JSON file.
    Norm {
        #[arg(long)]
        form: PathBuf,
        /// One exponent for every slot, or a comma list with one per slot.
        #[arg(long)]
        p: String,
        /// Exact sup norm (requires p = inf); same as `--method exact_sup`.
        #[arg(long)]
        exact: bool,
        /// ascent | exact_sup | interpolation
        #[arg(long, default_value = "ascent")]
        method: String,
        #[command(flatten)]
        ascent: AscentArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Witness-family growth run (certifies lower bounds on the exponent).
    Lower {
        /// diagonal | ksz
        #[arg(long)]
        family: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Random-form growth run (checks the exponent as an upper bound).
    Upper {
        /// gaussian | sign
        #[arg(long, alias = "family", default_value = "gaussian")]
        distribution: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Export a witness form in the sparse JSON format.
    Witness {
        /// diagonal | ksz
        #[arg(long)]
        family: String,
        /// Number of arguments of the underlying form.
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Lift along this block pattern (its block count must equal k).
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct AscentArgs {
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 500)]
    max_sweeps: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct RunArgs {
    /// Block sizes, e.g. `2,1`.
    #[arg(long)]
    pattern: String,
    #[arg(long)]
    p: String,
    #[arg(long)]
    r: String,
    /// `start:stop:x2` (geometric) or a comma list.
    #[arg(long, default_value = "4:64:x2")]
    n_grid: String,
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// exact_sup | ascent | analytic | interpolation (default depends on the run).
    #[arg(long)]
    norm_method: Option<String>,
    #[command(flatten)]
    ascent: AscentArgs,
    /// Worker threads (0 = all cores); output does not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Per-sample CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_exponent(s: &str) -> Result<ExtendedExponent> {
    s.parse()
}

fn parse_pattern(s: &str) -> Result<BlockPattern> {
    let blocks = s
        .split(',')
        .map(|b| {
            b.trim()
                .parse::<usize>()
                .map_err(|_| Error::Domain(format!("bad block size `{b}` in pattern `{s}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    BlockPattern::new(blocks)
}

fn parse_grid(s: &str) -> Result<Vec<usize>> {
    let bad = || {
        Error::Domain(format!(
            "bad n-grid `{s}` (use start:stop:x2 or a comma list)"
        ))
    };
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let start = parts[0].parse().map_err(|_| bad())?;
        let stop = parts[1].parse().map_err(|_| bad())?;
        let factor = parts[2]
            .strip_prefix('x')
            .and_then(|f| f.parse().ok())
            .ok_or_else(bad)?;
        geometric_grid(start, stop, factor)
    } else {
        s.split(',')
            .map(|v| v.trim().parse().map_err(|_| bad()))
            .collect()
    }
}

fn decimal(q: &BigRational) -> String {
    format!("{:.6}", ExtendedExponent::Finite(q.clone()).to_f64())
}

fn ascent_config(a: &AscentArgs, seed: u64) -> AscentConfig {
    AscentConfig {
        restarts: a.restarts,
        max_sweeps: a.max_sweeps,
        tol: a.tol,
        seed,
    }
}

fn write_text(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn finish_run(res: &ExperimentResult, run: &RunArgs) -> Result<()> {
    if let Some(path) = &run.out {
        write_text(path, &res.to_csv())?;
    }
    if let Some(path) = &run.json {
        write_text(path, &res.summary_json())?;
    }
    for w in &res.warnings {
        println!("warning: {w}");
    }
    println!("verdict: {}", res.verdict);
    Ok(())
}

fn run_config(run: &RunArgs) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        n_grid: parse_grid(&run.n_grid)?,
        samples: run.samples,
        base_seed: run.seed,
        norm_method: run
            .norm_method
            .as_deref()
            .map(str::parse::<NormMethod>)
            .transpose()?,
        ascent: ascent_config(&run.ascent, run.seed),
        workers: run.workers,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Predict { m, k, p, r, json } => {
            let params = RegimeParams::new(m, k, parse_exponent(&p)?, parse_rational(&r)?)?;
            let rep = predicted_lambda(&params)?;
            println!("lambda = {} ({})", rep.lambda, decimal(&rep.lambda));
            println!("regime = {}", rep.regime.as_str());
            if let Some(alt) = &rep.lambda_alt {
                println!("lambda_alt = {alt} ({})", decimal(alt));
            }
            println!(
                "critical rho = {} ({})",
                rep.critical_rho,
                decimal(&rep.critical_rho)
            );
            println!("lower bound (ksz) = {}", rep.lower_bounds.ksz);
            println!("lower bound (diagonal) = {}", rep.lower_bounds.diagonal);
            for w in &rep.warnings {
                println!("warning: {w}");
            }
            if let Some(path) = json {
                write_json(
                    &path,
                    &serde_json::to_value(&rep).expect("report serialises"),
                )?;
            }
        }
        Command::Critical { m, k, p } => {
            let rho = critical_rho(m, k, &parse_exponent(&p)?)?;
            println!("{rho} ({})", decimal(&rho));
        }
        Command::Classical { m, p, json } => {
            let table = classical_exponents(m, &parse_exponent(&p)?)?;
            for e in &table {
                match (&e.value, &e.critical_rho) {
                    (Some(v), Some(c)) => println!(
                        "({}) {}: {} [critical_rho(k={}) = {}, {}]",
                        e.item,
                        e.name,
                        v,
                        e.k,
                        c,
                        if e.agrees == Some(true) {
                            "agrees"
                        } else {
                            "DISAGREES"
                        }
                    ),
                    _ => println!("({}) {}: not applicable ({})", e.item, e.name, e.condition),
                }
            }
            if let Some(path) = json {
                write_json(
                    &path,
                    &serde_json::to_value(&table).expect("table serialises"),
                )?;
            }
        }
        Command::Norm {
            form,
            p,
            exact,
            method,
            ascent,
            seed,
            json,
        } => {
            let t = read_form(&form)?;
            let parts: Vec<&str> = p.split(',').collect();
            let exponents = if parts.len() == 1 {
                vec![parse_exponent(parts[0])?; t.degree()]
            } else {
                parts
                    .iter()
                    .map(|s| parse_exponent(s))
                    .collect::<Result<Vec<_>>>()?
            };
            let method: NormMethod = if exact {
                NormMethod::ExactSup
            } else {
                method.parse()?
            };
            let est = match method {
                NormMethod::ExactSup => {
                    if exponents.iter().any(|e| !e.is_infinite()) {
                        return Err(Error::Domain("exact norms require p = inf".into()));
                    }
                    exact_norm_sup(&t)?
                }
                NormMethod::Ascent => estimate_norm(&t, &exponents, &ascent_config(&ascent, seed))?,
                NormMethod::Interpolation => {
                    if exponents.iter().any(|e| *e != exponents[0]) {
                        return Err(Error::Domain(
                            "interpolation bound needs one common p".into(),
                        ));
                    }
                    interpolation_upper_bound(&t, &exponents[0])?
                }
                NormMethod::Analytic => {
                    return Err(Error::Domain(
                        "analytic norms apply to diagonal witnesses only".into(),
                    ))
                }
            };
            println!("value = {}", est.value);
            println!("kind = {}", est.kind.as_str());
            if let Some(path) = json {
                let exps: Vec<String> = exponents.iter().map(|e| e.to_string()).collect();
                write_json(
                    &path,
                    &json!({
                        "value": est.value,
                        "kind": est.kind,
                        "exponents": exps,
                        "witness": est.witness,
                        "iterations": est.iterations,
                        "restarts_used": est.restarts_used,
                        "seed": seed,
                    }),
                )?;
            }
        }
        Command::Lower { family, run } => {
            let family: FamilyKind = family.parse()?;
            let res = run_lower_experiment(
                family,
                &parse_pattern(&run.pattern)?,
                &parse_exponent(&run.p)?,
                &parse_rational(&run.r)?,
                &run_config(&run)?,
            )?;
            finish_run(&res, &run)?;
        }
        Command::Upper { distribution, run } => {
            let dist: Distribution = distribution.parse()?;
            let res = run_upper_experiment(
                dist,
                &parse_pattern(&run.pattern)?,
                &parse_exponent(&run.p)?,
                &parse_rational(&run.r)?,
                &run_config(&run)?,
            )?;
            finish_run(&res, &run)?;
        }
        Command::Witness {
            family,
            k,
            n,
            pattern,
            seed,
            out,
        } => {
            let base = match family.as_str() {
                "diagonal" => diagonal_kform(k, n)?,
                "ksz" => ksz_sample(k, n, seed)?,
                other => {
                    return Err(Error::Domain(format!(
                        "unknown family `{other}` (diagonal|ksz)"
                    )))
                }
            };
            let form = match pattern {
                Some(p) => lift_kform(&base, &parse_pattern(&p)?)?,
                None => base,
            };
            write_json(&out, &form_to_sparse_json(&form))?;
            println!(
                "wrote {} nonzero entries (m = {}, n = {})",
                form.nonzero_entries().len(),
                form.degree(),
                form.dim()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Resource(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
