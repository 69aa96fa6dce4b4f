//! `cutofflab` command-line front end.
//!
//! Exit codes: 0 pass, 1 experiment failed, 2 parse or input error,
//! 3 search budget exceeded, 4 precondition violated.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cutofflab::adversaries::{HardInstance, TheoremTag};
use cutofflab::budget::{Budget, BUDGET_ENV};
use cutofflab::dims::{build_oig, exhaustive_orientation_min, gamma_graph_dimension, max_gamma_outdegree, orient_smallest_value};
use cutofflab::experiments::{replay, run, ExperimentConfig, Report};
use cutofflab::learners::LearnerSpec;
use cutofflab::mc::{exact_loss_distribution, mc_trial_losses, write_csv, LossEstimate, ResultRow};
use cutofflab::partial::{disambiguate, ln_disambiguation_bound, partial_vc_dimension, PartialClass};
use cutofflab::{Error, HypothesisClass, Point, Rational, Seed};
use serde_json::json;

#[derive(Parser)]
#[command(name = "cutofflab", version, about = "Cutoff-loss learning experiments")]
struct Cli {
    /// Worker threads for Monte Carlo trials (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Search budget in work units.
    #[arg(long, global = true, env = BUDGET_ENV)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gamma-graph dimension of a class, with orientation evidence.
    Dims {
        /// Class file (JSON).
        class: PathBuf,
        #[arg(long)]
        gamma: Option<Rational>,
        /// Candidate points (JSON list); defaults to the class's natural pool.
        #[arg(long)]
        pool: Option<PathBuf>,
        /// Largest dimension to search for.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// One-inclusion graph of a class on a point list.
    Oig {
        class: PathBuf,
        /// Points (JSON list).
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        gamma: Option<Rational>,
    },
    /// Greedy disambiguation of a partial class given as 0/1/* rows.
    Disambiguate {
        input: PathBuf,
        /// Where to write the total class rows.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected cutoff loss of a learner on an instance.
    Estimate {
        /// Instance file (JSON).
        #[arg(long)]
        instance: PathBuf,
        /// Learner spec: inline JSON or a path to a JSON file.
        #[arg(long)]
        learner: String,
        /// Sample sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Enumerate every sample instead of sampling.
        #[arg(long)]
        exact: bool,
        /// CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the desk-scale check for a result.
    Reproduce(Box<ReproduceArgs>),
}

#[derive(Args)]
struct ReproduceArgs {
    /// One of thm1..thm5, lemma-interp, lemma-disamb.
    tag: Option<TheoremTag>,
    /// Re-run a saved JSON report and compare its rows.
    #[arg(long, conflicts_with = "tag")]
    replay: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<Rational>,
    #[arg(long)]
    epsilon: Option<Rational>,
    #[arg(long)]
    d: Option<usize>,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    m_bound: Option<usize>,
    #[arg(long)]
    universe: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Learner spec: inline JSON or a path to a JSON file.
    #[arg(long)]
    learner: Option<String>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also save the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

enum Outcome {
    Pass,
    Fail,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget { .. } => 3,
        Error::Precondition(_) => 4,
        _ => 2,
    }
}

fn read(path: &Path) -> cutofflab::Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> cutofflab::Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> cutofflab::Result<T> {
    parse_json(&read(path)?, &path.display().to_string())
}

fn learner_spec(arg: &str) -> cutofflab::Result<LearnerSpec> {
    if arg.trim_start().starts_with('{') {
        parse_json(arg, "learner")
    } else {
        read_json(Path::new(arg))
    }
}

fn class_gamma(class: &HypothesisClass, gamma: Option<Rational>) -> cutofflab::Result<Rational> {
    gamma
        .or_else(|| class.gamma().cloned())
        .ok_or_else(|| Error::Invalid("finite classes need --gamma".into()))
}

fn emit_csv(rows: &[ResultRow], out: Option<&PathBuf>) -> cutofflab::Result<()> {
    if let Some(path) = out {
        write_csv(rows, fs::File::create(path)?)?;
    }
    Ok(())
}

fn cmd_dims(
    budget: &Budget,
    json: bool,
    class: &Path,
    gamma: Option<Rational>,
    pool: Option<&PathBuf>,
    cap: Option<usize>,
) -> cutofflab::Result<Outcome> {
    let class: HypothesisClass = read_json(class)?;
    let gamma = class_gamma(&class, gamma)?;
    let pool: Vec<Point> = match pool {
        Some(p) => read_json(p)?,
        None => class.natural_pool(64)?,
    };
    let report = gamma_graph_dimension(&class, &pool, &gamma, cap.unwrap_or(pool.len()), budget)?;
    let cert = &report.certificate;
    let g = build_oig(&class, &cert.points, budget)?;
    let orientation = orient_smallest_value(&g);
    let out_degree = max_gamma_outdegree(&g, &orientation, &gamma);
    let exhaustive = match exhaustive_orientation_min(&g, &gamma, budget) {
        Ok((best, _)) => Some(best),
        Err(Error::Budget { .. }) => None,
        Err(e) => return Err(e),
    };
    if json {
        let v = json!({
            "graph_dim": report.dimension,
            "capped": report.capped,
            "certificate": cert,
            "oig": {
                "vertices": g.vertices.len(),
                "edges": g.edges.len(),
                "smallest_value_max_outdegree": out_degree,
                "exhaustive_min_outdegree": exhaustive,
            },
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        println!("graph_dim: {}{}", report.dimension, if report.capped { " (capped)" } else { "" });
        println!("pool: {} points, gamma {gamma}", pool.len());
        println!("shattered points: {}", serde_json::to_string(&cert.points)?);
        println!("witness: {}", serde_json::to_string(&cert.witness)?);
        println!("oig on shattered points: {} vertices, {} edges", g.vertices.len(), g.edges.len());
        println!("smallest-value orientation max out-degree: {out_degree}");
        match exhaustive {
            Some(b) => println!("minimum max out-degree over all orientations: {b}"),
            None => println!("minimum max out-degree over all orientations: skipped (budget)"),
        }
    }
    Ok(Outcome::Pass)
}

fn cmd_oig(budget: &Budget, json: bool, class: &Path, points: &Path, gamma: Option<Rational>) -> cutofflab::Result<Outcome> {
    let class: HypothesisClass = read_json(class)?;
    let gamma = class_gamma(&class, gamma)?;
    let points: Vec<Point> = read_json(points)?;
    let g = build_oig(&class, &points, budget)?;
    let orientation = orient_smallest_value(&g);
    let degrees = g.gamma_outdegrees(&orientation, &gamma);
    let out_degree = degrees.iter().copied().max().unwrap_or(0);
    let exhaustive = exhaustive_orientation_min(&g, &gamma, budget)?.0;
    if json {
        let v = json!({
            "points": points,
            "vertices": g.vertices,
            "edges": g.edges,
            "smallest_value_orientation": orientation,
            "smallest_value_outdegrees": degrees,
            "smallest_value_max_outdegree": out_degree,
            "exhaustive_min_outdegree": exhaustive,
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        println!("vertices: {}", g.vertices.len());
        println!("edges: {} ({} with several members)", g.edges.len(), g.multi_edge_count());
        println!("smallest-value orientation max out-degree: {out_degree}");
        println!("minimum max out-degree over all orientations: {exhaustive}");
        println!("n/3 = {:.3}", points.len() as f64 / 3.0);
    }
    Ok(Outcome::Pass)
}

fn cmd_disambiguate(budget: &Budget, json: bool, input: &Path, out: Option<&PathBuf>) -> cutofflab::Result<Outcome> {
    let class = PartialClass::parse_rows(&read(input)?)?;
    if class.is_empty() {
        return Err(Error::Parse(format!("{}: no concepts", input.display())));
    }
    let d = partial_vc_dimension(&class)?;
    let n = class.domain_size();
    let result = disambiguate(&class, budget)?;
    let size = result.total.len();
    let bound = ln_disambiguation_bound(d, n);
    let pass = size <= class.len() && (size as f64).ln() <= bound;
    if let Some(path) = out {
        fs::write(path, result.total.to_rows())?;
    }
    if json {
        let v = json!({ "size": class.len(), "total_size": size, "d": d, "n": n, "ln_bound": bound, "pass": pass });
        println!("{}", serde_json::to_string_pretty(&v)?);
    } else {
        println!("|H| = {}", class.len());
        println!("|H_bar| = {size}");
        println!("d = {d}, n = {n}");
        println!("ln|H_bar| = {:.4}, bound = {bound:.4}", (size as f64).ln());
        println!("{}", if pass { "pass" } else { "fail" });
    }
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    budget: &Budget,
    json: bool,
    instance: &Path,
    learner: &str,
    ns: &[usize],
    trials: usize,
    seed: u64,
    exact: bool,
    out: Option<&PathBuf>,
) -> cutofflab::Result<Outcome> {
    let inst: HardInstance = read_json(instance)?;
    inst.validate()?;
    let learner = learner_spec(learner)?.build(&inst.class, inst.certificate.as_ref())?;
    let mut rows = Vec::new();
    for &n in ns {
        let (est, count) = if exact {
            let law = exact_loss_distribution(&learner, &inst, n, budget)?;
            let mean: Rational = law.iter().map(|(l, p)| l * p).sum();
            (LossEstimate::exact(mean), law.len())
        } else {
            (LossEstimate::from_losses(&mc_trial_losses(&learner, &inst, n, trials, Seed(seed))?)?, trials)
        };
        rows.push(ResultRow {
            experiment: if exact { "estimate/exact".into() } else { "estimate/mc".into() },
            theorem: inst.tag.to_string(),
            gamma: inst.params.gamma.to_string(),
            epsilon: inst.params.epsilon.as_ref().map(Rational::to_string).unwrap_or_default(),
            d: inst.params.d,
            n,
            trials: count,
            mean: est.mean,
            ci_lo: est.ci95.0,
            ci_hi: est.ci95.1,
            threshold: 0.0,
            pass: true,
        });
    }
    emit_csv(&rows, out)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
    } else {
        for r in &rows {
            println!("n = {}: mean {:.6} [{:.6}, {:.6}] over {} {}", r.n, r.mean, r.ci_lo, r.ci_hi, r.trials, if exact { "outcomes" } else { "trials" });
        }
    }
    Ok(Outcome::Pass)
}

fn print_report(report: &Report, json: bool) -> cutofflab::Result<()> {
    if json {
        println!("{}", serde_json::to_string_pretty(report)?);
        return Ok(());
    }
    for v in &report.verdicts {
        println!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.criterion, v.detail);
    }
    println!(
        "{}: {} ({:.1}s, seed {}, version {})",
        report.config.tag,
        if report.pass { "pass" } else { "fail" },
        report.wall_clock_secs,
        report.seed,
        report.version
    );
    Ok(())
}

fn cmd_reproduce(json: bool, a: &ReproduceArgs) -> cutofflab::Result<Outcome> {
    if let Some(path) = &a.replay {
        let saved: Report = read_json(path)?;
        let (again, same) = replay(&saved)?;
        print_report(&again, json)?;
        if !json {
            println!("replay: rows {}", if same { "identical" } else { "differ" });
        }
        emit_csv(&again.rows, a.out.as_ref())?;
        return Ok(if same && again.pass { Outcome::Pass } else { Outcome::Fail });
    }
    let tag = a.tag.ok_or_else(|| Error::Parse("give an experiment tag or --replay".into()))?;
    if tag == TheoremTag::Custom {
        return Err(Error::Parse("custom experiments run through `estimate`".into()));
    }
    let mut config = ExperimentConfig::defaults(tag);
    if let Some(g) = &a.gamma {
        config.gamma = g.clone();
    }
    if a.epsilon.is_some() {
        config.epsilon = a.epsilon.clone();
    }
    if a.d.is_some() {
        config.d = a.d;
    }
    if let Some(n) = &a.n {
        config.n = n.clone();
    }
    if let Some(t) = a.trials {
        config.trials = t;
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if a.m_bound.is_some() {
        config.m_bound = a.m_bound;
    }
    if a.universe.is_some() {
        config.universe = a.universe;
    }
    if a.delta.is_some() {
        config.delta = a.delta;
    }
    if let Some(l) = &a.learner {
        config.learner = Some(learner_spec(l)?);
    }
    let report = run(&config)?;
    print_report(&report, json)?;
    emit_csv(&report.rows, a.out.as_ref())?;
    if let Some(path) = &a.report {
        fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(if report.pass { Outcome::Pass } else { Outcome::Fail })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut budget = Budget::default();
    if let Some(w) = cli.budget {
        budget = budget.with_work(w);
    }
    let result = match &cli.command {
        Command::Dims { class, gamma, pool, cap } => cmd_dims(&budget, cli.json, class, gamma.clone(), pool.as_ref(), *cap),
        Command::Oig { class, points, gamma } => cmd_oig(&budget, cli.json, class, points, gamma.clone()),
        Command::Disambiguate { input, out } => cmd_disambiguate(&budget, cli.json, input, out.as_ref()),
        Command::Estimate { instance, learner, n, trials, seed, exact, out } => {
            cmd_estimate(&budget, cli.json, instance, learner, n, *trials, *seed, *exact, out.as_ref())
        }
        Command::Reproduce(args) => cmd_reproduce(cli.json, args),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Budget { partial: Some(p), .. } = &e {
                eprintln!("best so far: {p}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
