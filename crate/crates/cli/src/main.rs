//! `lda`: command-line front end for the lda-core toolkit.
//!
//! Every command writes its artifacts plus a `manifest.json` into `--output`.
//! Exit codes: 0 on success (for `solve`/`approx`: an LDA was found), 2 when
//! `solve`/`approx` report that no LDA exists or none was found at the given
//! epsilon, 1 on any error including invalid usage.

mod manifest;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lda_core::bench::{self, BenchConfig};
use lda_core::data::{self, Schema, SyntheticSpec};
use lda_core::fullinfo::{
    self, format_rational, parse_rational, Rational, SubsetSumInstance, LdaStatus,
};
use lda_core::polygon;
use lda_core::population::{self, GroupTally};
use lda_core::search::{self, ModelKind, SearchType, SplitSpec, TrainerSpec};
use lda_core::seed::derive_seed;

use manifest::OutputDir;
use svg::{Plot, Series, Style, PALETTE};

#[derive(Debug, Parser, Serialize)]
#[command(name = "lda", version, about = "Search for and audit less discriminatory alternative classifiers")]
struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Price of a false positive relative to a true positive (decimal or p/q).
    #[arg(long, global = true)]
    lambda: Option<String>,
    /// Worker threads for bench and search (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "lda-out")]
    output: PathBuf,
    /// Also write SVG figures.
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Feasible (disparity, utility) polygon of a population and its frontier.
    Polygon(PopulationArgs),
    /// Every deterministic cell classifier's (disparity, utility) point.
    Grid {
        #[command(flatten)]
        population: PopulationArgs,
        /// Refuse grids with more points than this.
        #[arg(long, default_value_t = 10_000_000)]
        cap: u128,
    },
    /// Utility threshold below which a zero-disparity alternative exists.
    Threshold {
        #[command(flatten)]
        population: PopulationArgs,
        /// Also report the least disparity attainable at this utility.
        #[arg(long)]
        u0: Option<f64>,
    },
    /// Exact full-information LDA search.
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Abort the exact solve after this many milliseconds.
        #[arg(long)]
        time_limit_ms: Option<u64>,
    },
    /// Approximate full-information LDA search.
    Approx {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
    /// Full-information instance encoding a Subset-Sum instance.
    Reduce {
        /// Nonzero integer weights, comma separated (e.g. `1,-1,3`).
        #[arg(long, allow_hyphen_values = true)]
        weights: String,
    },
    /// Random full-information instances.
    Gen {
        #[arg(long, default_value_t = 5)]
        n_options: usize,
        #[arg(long, default_value_t = 3)]
        digits: u32,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Exact versus approximate solver runtime and hit rate.
    Bench {
        /// JSON benchmark config; missing fields take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        instances: Option<usize>,
        /// Comma-separated epsilons.
        #[arg(long)]
        epsilons: Option<String>,
        #[arg(long)]
        time_limit_ms: Option<u64>,
    },
    /// Retrain-and-select search with held-out evaluation.
    Search(SearchArgs),
    /// A rule with perfect accuracy on one dataset and zero disparity on another.
    DemoPathological {
        #[arg(long, default_value_t = 200)]
        rows: usize,
    },
}

#[derive(Debug, Args, Serialize)]
struct PopulationArgs {
    /// Cell counts `n1+,n1-,n2+,n2-`.
    #[arg(long)]
    tally: Option<String>,
    /// Labeled CSV to tally instead.
    #[arg(long)]
    data: Option<PathBuf>,
    /// `adult`, `german` or a JSON schema file.
    #[arg(long, default_value = "adult")]
    schema: String,
}

#[derive(Debug, Args, Serialize)]
struct InstanceArgs {
    /// Instance CSV (`id,rho1,rho2,sigma`).
    #[arg(long)]
    instance: PathBuf,
    /// Sidecar JSON; defaults to the instance path with a `.json` extension.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum ModelArg {
    LogisticRegression,
    DecisionTree,
    RandomForest,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum SearchTypeArg {
    Sample,
    RandomSeed,
}

#[derive(Debug, Args, Serialize)]
struct SearchArgs {
    /// Dataset CSV; without it a synthetic dataset is generated.
    #[arg(long)]
    data: Option<PathBuf>,
    /// `adult`, `german` or a JSON schema file.
    #[arg(long, default_value = "adult")]
    schema: String,
    /// JSON synthetic-dataset spec (used without --data).
    #[arg(long)]
    synthetic: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "random-forest")]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "sample")]
    search_type: SearchTypeArg,
    /// Models in the pool.
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    /// Models per trial: `a..b` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "2..100")]
    n_values: String,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    /// Train, eval and test fractions.
    #[arg(long, default_value = "0.6,0.2,0.2")]
    split: String,
    #[arg(long)]
    n_trees: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let mut out = OutputDir::create(&cli.output)?;
    let code = match &cli.command {
        Command::Polygon(p) => cmd_polygon(cli, p, &mut out)?,
        Command::Grid { population, cap } => cmd_grid(cli, population, *cap, &mut out)?,
        Command::Threshold { population, u0 } => cmd_threshold(cli, population, *u0, &mut out)?,
        Command::Solve { instance, time_limit_ms } => cmd_solve(cli, instance, None, *time_limit_ms, &mut out)?,
        Command::Approx { instance, epsilon } => cmd_solve(cli, instance, Some(*epsilon), None, &mut out)?,
        Command::Reduce { weights } => cmd_reduce(cli, weights, &mut out)?,
        Command::Gen {
            n_options,
            digits,
            count,
        } => cmd_gen(cli, *n_options, *digits, *count, &mut out)?,
        Command::Bench {
            config,
            instances,
            epsilons,
            time_limit_ms,
        } => cmd_bench(cli, config.as_deref(), *instances, epsilons.as_deref(), *time_limit_ms, &mut out)?,
        Command::Search(args) => cmd_search(cli, args, &mut out)?,
        Command::DemoPathological { rows } => cmd_demo(cli, *rows, &mut out)?,
    };
    let command = serde_json::to_value(&cli.command)?;
    let name = command
        .as_object()
        .and_then(|o| o.keys().next().cloned())
        .or_else(|| command.as_str().map(str::to_string))
        .unwrap_or_default();
    out.finish(&name, serde_json::to_value(cli)?, cli.seed)?;
    Ok(code)
}

fn lambda_f64(cli: &Cli) -> Result<f64> {
    Ok(fullinfo::to_f64(&lambda_rational(cli)?.unwrap_or(Rational::from_integer(1))))
}

fn lambda_rational(cli: &Cli) -> Result<Option<Rational>> {
    cli.lambda
        .as_deref()
        .map(|s| parse_rational(s).with_context(|| format!("--lambda {s}")))
        .transpose()
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|e| anyhow::anyhow!("invalid {what} `{x}`: {e}")))
        .collect()
}

fn load_schema(spec: &str) -> Result<Schema> {
    match Schema::by_name(spec) {
        Some(s) => Ok(s),
        None => Schema::from_json_file(Path::new(spec)).with_context(|| format!("loading schema {spec}")),
    }
}

fn load_dataset(path: &Path, schema: &str, out: &mut OutputDir) -> Result<(population::LabeledDataset, data::DropReport)> {
    if !path.exists() {
        bail!("{} not found. {}", path.display(), data::source_instructions(schema));
    }
    out.input(path)?;
    let schema = load_schema(schema)?;
    Ok(data::load_csv(path, &schema)?)
}

fn population_tally(p: &PopulationArgs, out: &mut OutputDir) -> Result<GroupTally> {
    match (&p.tally, &p.data) {
        (Some(t), None) => {
            let c: Vec<u64> = parse_list(t, "tally count")?;
            let [a, b, cc, d] = c[..] else {
                bail!("--tally needs four counts n1+,n1-,n2+,n2-");
            };
            Ok(GroupTally::new(a, b, cc, d)?)
        }
        (None, Some(path)) => {
            let (dataset, report) = load_dataset(path, &p.schema, out)?;
            if report.dropped() > 0 {
                eprintln!("dropped {} of {} rows", report.dropped(), report.rows_read);
            }
            Ok(population::tally(&dataset)?)
        }
        (Some(_), Some(_)) => bail!("give either --tally or --data, not both"),
        (None, None) => bail!("usage: one of --tally or --data is required"),
    }
}

fn points_csv(header: &str, points: &[(f64, f64)]) -> String {
    let mut s = format!("{header}\n");
    for (x, y) in points {
        s.push_str(&format!("{x},{y}\n"));
    }
    s
}

fn cmd_polygon(cli: &Cli, p: &PopulationArgs, out: &mut OutputDir) -> Result<ExitCode> {
    let tally = population_tally(p, out)?;
    let lambda = lambda_f64(cli)?;
    let poly = polygon::feasible_polygon(&tally, lambda)?;
    let summary = polygon::utility_threshold(&tally, lambda)?;
    out.write("polygon.csv", points_csv("delta,utility", &poly.vertices))?;
    out.write_json("frontier.json", &summary)?;
    if cli.plot {
        let mut plot = Plot::new(&format!("Feasible region, tally {tally}, lambda {lambda}"), "disparity", "utility");
        plot.series.push(Series {
            label: "feasible".into(),
            points: poly.vertices.clone(),
            color: PALETTE[0],
            style: Style::Area,
        });
        if let Ok(grid) = polygon::deterministic_grid(&tally, lambda, 200_000) {
            plot.series.push(Series {
                label: "deterministic".into(),
                points: grid,
                color: PALETTE[4],
                style: Style::Dots(1.0),
            });
        }
        plot.series.push(Series {
            label: "frontier".into(),
            points: summary.frontier().to_vec(),
            color: PALETTE[1],
            style: Style::Line,
        });
        plot.series.push(Series {
            label: "perfect / repair".into(),
            points: summary.frontier().to_vec(),
            color: PALETTE[1],
            style: Style::Dots(4.0),
        });
        out.write("polygon.svg", plot.render())?;
    }
    print_json(&summary)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_grid(cli: &Cli, p: &PopulationArgs, cap: u128, out: &mut OutputDir) -> Result<ExitCode> {
    let tally = population_tally(p, out)?;
    let grid = polygon::deterministic_grid(&tally, lambda_f64(cli)?, cap)?;
    out.write("grid.csv", points_csv("delta,utility", &grid))?;
    println!("{} grid points", grid.len());
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ThresholdReport {
    tally: String,
    #[serde(flatten)]
    summary: polygon::FrontierSummary,
    u0: Option<f64>,
    min_disparity_at_u0: Option<f64>,
}

fn cmd_threshold(cli: &Cli, p: &PopulationArgs, u0: Option<f64>, out: &mut OutputDir) -> Result<ExitCode> {
    let tally = population_tally(p, out)?;
    let lambda = lambda_f64(cli)?;
    let report = ThresholdReport {
        tally: tally.to_string(),
        summary: polygon::utility_threshold(&tally, lambda)?,
        u0,
        min_disparity_at_u0: u0.map(|u| polygon::min_disparity_at_utility(&tally, lambda, u)).transpose()?,
    };
    out.write_json("threshold.json", &report)?;
    print_json(&report)?;
    Ok(ExitCode::SUCCESS)
}

fn read_instance(args: &InstanceArgs, lambda: Option<Rational>, out: &mut OutputDir) -> Result<fullinfo::FullInfoInstance> {
    let sidecar = args.sidecar.clone().unwrap_or_else(|| args.instance.with_extension("json"));
    out.input(&args.instance)?;
    out.input(&sidecar)?;
    let mut inst = fullinfo::read_instance(&args.instance, &sidecar)
        .with_context(|| format!("reading instance {}", args.instance.display()))?;
    if let Some(l) = lambda {
        inst.lambda = l;
        inst.validate()?;
    }
    Ok(inst)
}

fn cmd_solve(
    cli: &Cli,
    args: &InstanceArgs,
    epsilon: Option<f64>,
    time_limit_ms: Option<u64>,
    out: &mut OutputDir,
) -> Result<ExitCode> {
    let inst = read_instance(args, lambda_rational(cli)?, out)?;
    let solution = match epsilon {
        Some(eps) => fullinfo::solve_approx(&inst, eps)?,
        None => fullinfo::solve_exact_with(
            &inst,
            fullinfo::ExactOptions {
                deadline: time_limit_ms.map(|ms| std::time::Instant::now() + std::time::Duration::from_millis(ms)),
                ..Default::default()
            },
        )?,
    };
    let record = solution.record();
    out.write_json("solution.json", &record)?;
    print_json(&record)?;
    Ok(if solution.status == LdaStatus::Found {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_reduce(cli: &Cli, weights: &str, out: &mut OutputDir) -> Result<ExitCode> {
    let w = SubsetSumInstance::new(parse_list(weights, "weight")?)?;
    let lambda = lambda_rational(cli)?.unwrap_or(Rational::from_integer(1));
    let inst = fullinfo::reduce_subset_sum(&w, lambda)?;
    let (csv_text, sidecar) = fullinfo::instance_to_strings(&inst)?;
    out.write("instance.csv", csv_text)?;
    out.write("instance.json", sidecar)?;
    println!(
        "wrote {} values (alpha = {}, N = {})",
        inst.n_values(),
        fullinfo::slack_alpha(&w, &inst.lambda)?,
        fullinfo::reduction_population(&w, &inst.lambda)?
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(cli: &Cli, n_options: usize, digits: u32, count: usize, out: &mut OutputDir) -> Result<ExitCode> {
    let lambda = lambda_rational(cli)?.unwrap_or(Rational::from_integer(1));
    for i in 0..count {
        let seed = derive_seed(cli.seed, "gen-instance", i as u64);
        let inst = fullinfo::generate_instance_with_lambda(n_options, digits, lambda, seed)?;
        let (csv_text, sidecar) = fullinfo::instance_to_strings(&inst)?;
        out.write(&format!("instance_{i:04}.csv"), csv_text)?;
        out.write(&format!("instance_{i:04}.json"), sidecar)?;
    }
    println!("wrote {count} instances (lambda = {})", format_rational(&lambda));
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(
    cli: &Cli,
    config_path: Option<&Path>,
    instances: Option<usize>,
    epsilons: Option<&str>,
    time_limit_ms: Option<u64>,
    out: &mut OutputDir,
) -> Result<ExitCode> {
    let mut config: BenchConfig = match config_path {
        Some(p) => {
            out.input(p)?;
            serde_json::from_str(&fs::read_to_string(p)?).with_context(|| format!("parsing {}", p.display()))?
        }
        None => BenchConfig::default(),
    };
    config.master_seed = cli.seed;
    if let Some(n) = instances {
        config.instance_count = n;
    }
    if let Some(e) = epsilons {
        config.epsilons = parse_list(e, "epsilon")?;
    }
    if let Some(t) = time_limit_ms {
        config.time_limit_ms = t;
    }
    let generated = bench::generate_bench_instances(&config)?;
    for b in &generated {
        let (csv_text, sidecar) = fullinfo::instance_to_strings(&b.instance)?;
        out.write(&format!("instances/instance_{:04}.csv", b.instance_id), csv_text)?;
        out.write(&format!("instances/instance_{:04}.json", b.instance_id), sidecar)?;
    }
    let report = bench::run_on_instances(&config, &generated)?;
    let mut csv_bytes = Vec::new();
    bench::write_report_csv(&report, &mut csv_bytes)?;
    out.write("bench.csv", csv_bytes)?;
    let summary = bench::summarize(&report)?;
    out.write_json("summary.json", &summary)?;
    if cli.plot {
        let mut plot = Plot::new("Median solve time per digit bucket", "max digits", "median wall time (ms)");
        plot.log_y = true;
        for (k, (algo, medians)) in summary.median_wall_ms.iter().enumerate() {
            plot.series.push(Series {
                label: algo.clone(),
                points: medians.iter().map(|(&d, &m)| (f64::from(d), m)).collect(),
                color: PALETTE[k % PALETTE.len()],
                style: Style::Line,
            });
        }
        out.write("runtime.svg", plot.render())?;
    }
    print_json(&summary)?;
    Ok(ExitCode::SUCCESS)
}

fn parse_n_values(s: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!("empty range {s}");
        }
        Ok((a..=b).collect())
    } else {
        parse_list(s, "n")
    }
}

#[derive(Serialize)]
struct SearchReport {
    dataset: String,
    rows: usize,
    drop_report: Option<data::DropReport>,
    train_rows: usize,
    eval_rows: usize,
    test_rows: usize,
    pool_size: usize,
    summary: search::SearchSummary,
    sweep: Vec<search::SearchSummary>,
}

fn cmd_search(cli: &Cli, a: &SearchArgs, out: &mut OutputDir) -> Result<ExitCode> {
    let lambda = lambda_f64(cli)?;
    let (dataset, drop_report) = match &a.data {
        Some(path) => {
            let (d, r) = load_dataset(path, &a.schema, out)?;
            (d, Some(r))
        }
        None => {
            let spec = match &a.synthetic {
                Some(p) => {
                    out.input(p)?;
                    serde_json::from_str(&fs::read_to_string(p)?)?
                }
                None => SyntheticSpec::default(),
            };
            (data::synthetic_dataset(&spec, derive_seed(cli.seed, "synthetic", 0))?, None)
        }
    };
    let fractions: Vec<f64> = parse_list(&a.split, "split fraction")?;
    let [tr, ev, te] = fractions[..] else {
        bail!("--split needs three fractions");
    };
    let mut splits = search::split(&dataset, &SplitSpec::new(tr, ev, te, derive_seed(cli.seed, "split", 0))?)?;
    let reference = splits.train.clone();
    data::impute_numeric_means(&reference, &mut [&mut splits.train, &mut splits.eval, &mut splits.test]);

    let kind = match a.model {
        ModelArg::LogisticRegression => ModelKind::LogisticRegression,
        ModelArg::DecisionTree => ModelKind::DecisionTree,
        ModelArg::RandomForest => ModelKind::RandomForest,
    };
    let search_type = match a.search_type {
        SearchTypeArg::Sample => SearchType::Sample,
        SearchTypeArg::RandomSeed => SearchType::RandomSeed,
    };
    let mut trainer = TrainerSpec::new(kind);
    trainer.max_depth = a.max_depth;
    if let Some(t) = a.n_trees {
        trainer.n_trees = t;
    }
    let pool = search::build_pool(&trainer, search_type, &splits, a.count, derive_seed(cli.seed, "pool", 0), lambda)?;
    let mut pool_csv = Vec::new();
    search::write_pool_csv(&pool, &mut pool_csv)?;
    out.write("pool.csv", pool_csv)?;

    let n_values: Vec<usize> = parse_n_values(&a.n_values)?.into_iter().filter(|&n| n >= 1 && n <= pool.len()).collect();
    if n_values.is_empty() {
        bail!("no n in {} fits a pool of {} models", a.n_values, pool.len());
    }
    let stats = search::sweep(&pool, &n_values, a.reps, derive_seed(cli.seed, "trials", 0))?;
    let mut stats_csv = Vec::new();
    search::write_statistics_csv(&stats, &mut stats_csv)?;
    out.write("statistics.csv", stats_csv)?;

    let sweep: Vec<_> = stats.iter().map(|s| search::summary_row(kind, search_type, s)).collect();
    let report = SearchReport {
        dataset: dataset.name.clone(),
        rows: dataset.len(),
        drop_report,
        train_rows: splits.train.len(),
        eval_rows: splits.eval.len(),
        test_rows: splits.test.len(),
        pool_size: pool.len(),
        summary: sweep.last().cloned().expect("nonempty sweep"),
        sweep,
    };
    out.write_json("summary.json", &report)?;
    if cli.plot {
        let xs: Vec<f64> = stats.iter().map(|s| s.n as f64).collect();
        for (name, title, pick) in [
            ("disparity.svg", "Change in test |disparity|", 0),
            ("utility.svg", "Change in test utility", 1),
        ] {
            let summary = |s: &search::TrialStatistics| if pick == 0 { s.disparity.clone() } else { s.utility.clone() };
            let mut band: Vec<(f64, f64)> = stats.iter().zip(&xs).map(|(s, &x)| (x, summary(s).p2_5)).collect();
            band.extend(stats.iter().zip(&xs).rev().map(|(s, &x)| (x, summary(s).p97_5)));
            let mut plot = Plot::new(title, "models per trial (n)", "selected minus trial mean");
            plot.series.push(Series {
                label: "95% band".into(),
                points: band,
                color: PALETTE[0],
                style: Style::Band,
            });
            plot.series.push(Series {
                label: "mean".into(),
                points: stats.iter().zip(&xs).map(|(s, &x)| (x, summary(s).mean)).collect(),
                color: PALETTE[0],
                style: Style::Line,
            });
            out.write(name, plot.render())?;
        }
        let mut plot = Plot::new("Eval minimizer is also test minimizer", "models per trial (n)", "frequency");
        plot.series.push(Series {
            label: "observed".into(),
            points: stats.iter().zip(&xs).map(|(s, &x)| (x, s.perfect_guess_freq)).collect(),
            color: PALETTE[1],
            style: Style::Line,
        });
        plot.series.push(Series {
            label: "1/n".into(),
            points: xs.iter().map(|&x| (x, 1.0 / x)).collect(),
            color: PALETTE[4],
            style: Style::Line,
        });
        out.write("perfect_guess.svg", plot.render())?;
    }
    print_json(&report.summary)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct DemoReport {
    pre_rows: usize,
    post_rows: usize,
    pre_accuracy: f64,
    post_disparity: f64,
    post_sr_1: f64,
    post_sr_2: f64,
}

fn cmd_demo(cli: &Cli, rows: usize, out: &mut OutputDir) -> Result<ExitCode> {
    let spec = SyntheticSpec {
        n_rows: rows,
        ..SyntheticSpec::default()
    };
    let pre = data::synthetic_dataset(&spec, derive_seed(cli.seed, "demo-pre", 0))?;
    let post = data::synthetic_dataset(&spec, derive_seed(cli.seed, "demo-post", 0))?;
    let (_, t) = population::pathological_rule(&pre, &post)?;
    let report = DemoReport {
        pre_rows: pre.len(),
        post_rows: post.len(),
        pre_accuracy: t.pre_accuracy,
        post_disparity: t.post_disparity,
        post_sr_1: t.post_sr_1,
        post_sr_2: t.post_sr_2,
    };
    out.write_json("pathological.json", &report)?;
    print_json(&report)?;
    Ok(ExitCode::SUCCESS)
}
