//! Command-line harness: evaluate the uniform approximation with its term
//! breakdown, run ε-sweeps against the reference solvers, verify the lemma
//! suite, and reproduce the non-uniformity demonstration. Exit code is 0
//! only if every criterion enabled by the invoked subcommand passes.

use clap::{Parser, Subcommand};
use perfgreen::asymptotics::{uniform_green, Scene};
use perfgreen::config::SceneSpec;
use perfgreen::geometry::{Point, Stratum};
use perfgreen::study::lemmas::verify_lemmas;
use perfgreen::study::naive::compare_naive;
use perfgreen::study::{merge_csv, oracle_value, sweep, OracleChoice, SceneTemplate, SweepOptions};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "perfgreen", version, about = "Uniform small-hole Green's function asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the uniform approximation at one pair and print the term
    /// breakdown (and the oracle value when available).
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// Hole scale; defaults to the first entry of the config's list.
        #[arg(long)]
        eps: Option<f64>,
        /// Comma-separated coordinates, e.g. "0.4,0.1" or "0.4,0.1,-0.2".
        #[arg(long, short, allow_hyphen_values = true)]
        x: String,
        #[arg(long, short, allow_hyphen_values = true)]
        y: String,
        /// Compare against the scene's reference solver.
        #[arg(long)]
        oracle: bool,
    },
    /// Run a stratified ε-sweep and fit convergence orders.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated ε list overriding the config.
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stratum name or "all".
        #[arg(long, default_value = "all")]
        stratum: String,
    },
    /// Verify the pointwise bounds and decay slopes the expansions rest on.
    VerifyLemmas {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare the uniform approximation against the naive formulas near
    /// the hole.
    CompareNaive {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Merge sweep CSVs with identical schemas.
    Report {
        #[arg(long)]
        out: PathBuf,
        inputs: Vec<PathBuf>,
    },
}

fn parse_point(s: &str) -> Result<Point, String> {
    let coords: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let coords = coords.map_err(|e| format!("bad coordinate in '{s}': {e}"))?;
    Point::from_slice(&coords).map_err(|e| e.to_string())
}

fn parse_eps_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad epsilon '{t}': {e}")))
        .collect()
}

fn run() -> Result<bool, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Eval { config, eps, x, y, oracle } => {
            let spec = SceneSpec::from_file(&config).map_err(|e| e.to_string())?;
            let eps = eps.unwrap_or(spec.epsilons[0]);
            let template = SceneTemplate::from_spec(&spec);
            let hole = template.build_hole().map_err(|e| e.to_string())?;
            let scene = Scene::new(template.config_at(eps).map_err(|e| e.to_string())?, hole)
                .map_err(|e| e.to_string())?;
            let xp = parse_point(&x)?;
            let yp = parse_point(&y)?;
            let u = uniform_green(&xp, &yp, &scene).map_err(|e| e.to_string())?;
            println!("scene {} (n = {}, eps = {eps})", spec.scene_id, spec.n);
            for (name, value) in &u.terms {
                println!("  {name:>24} = {value:+.12e}");
            }
            println!("  {:>24} = {:+.12e}", "value", u.value);
            println!("  {:>24} = {:+.12e}", "regularized value", u.regular_value);
            println!("  {:>24} = {:.6e}", "remainder weight", u.weight);
            if oracle {
                let truth =
                    oracle_value(&template, &scene, &xp, &yp).map_err(|e| e.to_string())?;
                println!("  {:>24} = {:+.12e}", "oracle value", truth);
                println!("  {:>24} = {:.6e}", "abs error", (u.value - truth).abs());
            }
            Ok(true)
        }
        Command::Sweep { config, eps, pairs, seed, out, stratum } => {
            let spec = SceneSpec::from_file(&config).map_err(|e| e.to_string())?;
            let template = SceneTemplate::from_spec(&spec);
            let mut opts = SweepOptions::new(match eps {
                Some(s) => parse_eps_list(&s)?,
                None => spec.epsilons.clone(),
            });
            opts.pairs_per_stratum = pairs.unwrap_or(spec.pairs);
            opts.seed = seed.unwrap_or(spec.seed);
            opts.oracle = OracleChoice::Auto;
            opts.out_csv = out;
            if stratum != "all" {
                opts.strata = vec![Stratum::parse(&stratum).map_err(|e| e.to_string())?];
            }
            let report = sweep(&template, &opts).map_err(|e| e.to_string())?;
            println!("scene {} (n = {})", report.scene_id, report.n);
            for s in &report.per_eps {
                println!(
                    "  eps {:<8} max raw err {:.4e}  max weighted err {:.4e}  [{}]",
                    s.eps, s.max_raw, s.max_weighted, s.oracle_log
                );
                for t in &s.per_stratum {
                    println!(
                        "    {:<20} raw {:.4e}  weighted {:.4e}",
                        t.stratum.name(),
                        t.max_raw,
                        t.max_weighted
                    );
                }
            }
            println!(
                "  overall order {:.3} (fit rms {:.2e}); weighted ratio {:.3}",
                report.overall_order.order, report.overall_order.residual, report.weighted_ratio
            );
            if let Some(b) = &report.bulk_order {
                println!("  bulk order {:.3} (fit rms {:.2e})", b.order, b.residual);
            }
            for c in &report.criteria {
                println!("{}", c.line());
            }
            Ok(report.all_passed())
        }
        Command::VerifyLemmas { config, eps, seed } => {
            let spec = SceneSpec::from_file(&config).map_err(|e| e.to_string())?;
            let template = SceneTemplate::from_spec(&spec);
            let eps_list = match eps {
                Some(s) => parse_eps_list(&s)?,
                None => spec.epsilons.clone(),
            };
            let report = verify_lemmas(&template, &eps_list, seed.unwrap_or(spec.seed))
                .map_err(|e| e.to_string())?;
            for c in &report.items {
                println!("{}", c.line());
            }
            Ok(report.all_passed())
        }
        Command::CompareNaive { config, eps, pairs, seed } => {
            let spec = SceneSpec::from_file(&config).map_err(|e| e.to_string())?;
            let template = SceneTemplate::from_spec(&spec);
            let eps_list = match eps {
                Some(s) => parse_eps_list(&s)?,
                None => spec.epsilons.clone(),
            };
            let report = compare_naive(
                &template,
                &eps_list,
                pairs.unwrap_or(spec.pairs),
                seed.unwrap_or(spec.seed),
            )
            .map_err(|e| e.to_string())?;
            println!("scene {}", report.scene_id);
            println!(
                "  {:<8} {:<20} {:>12} {:>12} {:>12} {:>14}",
                "eps", "stratum", "plain-G", "far-form", "uniform", "uniform-wtd"
            );
            for s in &report.per_eps {
                println!(
                    "  {:<8} {:<20} {:>12.4e} {:>12.4e} {:>12.4e} {:>14.4e}",
                    s.eps,
                    s.stratum.name(),
                    s.plain_max,
                    s.far_max,
                    s.uniform_max,
                    s.uniform_weighted_max
                );
            }
            for c in &report.criteria {
                println!("{}", c.line());
            }
            Ok(report.all_passed())
        }
        Command::Report { out, inputs } => {
            merge_csv(&inputs, &out).map_err(|e| e.to_string())?;
            println!("merged {} files into {}", inputs.len(), out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
