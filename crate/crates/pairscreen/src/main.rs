//! Command-line front end: `screen` a delimited file, `simulate` the
//! numbered designs, `bench` thread scaling, and `check-efficiency` for the
//! discretization efficiency-loss table. All computation lives in the
//! library; this binary parses flags and formats records.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pairscreen::dataset::{HeaderMode, LoadOptions, ResponseSelector};
use pairscreen::discretize::DiscretizationSpec;
use pairscreen::efficiency;
use pairscreen::error::Error;
use pairscreen::loglinear::IpfOptions;
use pairscreen::screen::{KsaGamma, Method, ScreenConfig, ScreenResult, Selection};
use pairscreen::simulate::{self, SimDesign};
use pairscreen::{screen, Family};

const ENV_THREADS: &str = "PAIRSCREEN_THREADS";

#[derive(Parser)]
#[command(
    name = "pairscreen",
    version,
    about = "Screen pairwise interaction effects in high-dimensional GLMs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Screen all pairwise interactions in a delimited data file.
    Screen(ScreenArgs),
    /// Run one of the numbered simulation designs and report ACR/AMS.
    Simulate(SimulateArgs),
    /// Time the sweep across thread counts on synthetic data.
    Bench(BenchArgs),
    /// Tabulate the discretization efficiency-loss checks.
    CheckEfficiency(CheckEfficiencyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Gaussian,
    Binomial,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Gaussian => Family::Gaussian,
            FamilyArg::Binomial => Family::Binomial,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ssi,
    Bolt,
    BoltKsa,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Ssi => Method::Ssi,
            MethodArg::Bolt => Method::BoltSsi,
            MethodArg::BoltKsa => Method::BoltSsiKsa,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum HeaderArg {
    Auto,
    Yes,
    No,
}

impl From<HeaderArg> for HeaderMode {
    fn from(h: HeaderArg) -> HeaderMode {
        match h {
            HeaderArg::Auto => HeaderMode::Auto,
            HeaderArg::Yes => HeaderMode::Present,
            HeaderArg::No => HeaderMode::Absent,
        }
    }
}

fn parse_selection(s: &str) -> Result<Selection, String> {
    if let Some(rest) = s.strip_prefix("topd:") {
        return match rest {
            "auto" => Ok(Selection::TopDAuto),
            "nlogn" => Ok(Selection::TopDNLogN),
            d => d
                .parse::<usize>()
                .map(Selection::TopD)
                .map_err(|_| format!("bad top-d count '{d}'")),
        };
    }
    if let Some(rest) = s.strip_prefix("threshold:") {
        return rest
            .parse::<f64>()
            .map(Selection::Threshold)
            .map_err(|_| format!("bad threshold '{rest}'"));
    }
    if let Some(rest) = s.strip_prefix("bonferroni:") {
        return rest
            .parse::<f64>()
            .map(Selection::BonferroniAlpha)
            .map_err(|_| format!("bad alpha '{rest}'"));
    }
    Err(format!(
        "unknown selection '{s}' (expected topd:auto, topd:nlogn, topd:<d>, threshold:<g>, bonferroni:<a>)"
    ))
}

fn parse_ksa_gamma(s: &str) -> Result<KsaGamma, String> {
    if let Some(rest) = s.strip_prefix("bonferroni:") {
        return rest
            .parse::<f64>()
            .map(KsaGamma::BonferroniAlpha)
            .map_err(|_| format!("bad alpha '{rest}'"));
    }
    s.parse::<f64>()
        .map(KsaGamma::Value)
        .map_err(|_| format!("bad Kirkwood gamma '{s}' (expected a number or bonferroni:<a>)"))
}

#[derive(Args)]
struct SweepOpts {
    /// Screening statistic.
    #[arg(long, value_enum, default_value = "bolt")]
    method: MethodArg,
    /// Selection rule: topd:auto, topd:nlogn, topd:<d>, threshold:<gamma>,
    /// bonferroni:<alpha>.
    #[arg(long, value_parser = parse_selection, default_value = "topd:auto")]
    select: Selection,
    /// Kirkwood prune threshold for --method bolt-ksa: a deviance value or
    /// bonferroni:<alpha>.
    #[arg(long, value_parser = parse_ksa_gamma, default_value = "0")]
    ksa_gamma: KsaGamma,
    /// Predictor discretization arity (BOLT methods).
    #[arg(long, default_value_t = 3)]
    arity: u8,
    /// Worker threads; 0 = all available. Overridable via PAIRSCREEN_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// IPF margin tolerance.
    #[arg(long, default_value_t = 1e-8)]
    ipf_tol: f64,
    /// IPF cycle budget.
    #[arg(long, default_value_t = 100)]
    max_cycles: usize,
    /// Pseudo-count added to every contingency cell.
    #[arg(long, default_value_t = 0.0)]
    pseudo_count: f64,
}

impl SweepOpts {
    fn config(&self, full: bool) -> Result<ScreenConfig, Error> {
        let threads = match self.threads {
            Some(t) => t,
            None => std::env::var(ENV_THREADS)
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(0),
        };
        Ok(ScreenConfig {
            method: self.method.into(),
            selection: self.select,
            ksa_gamma: self.ksa_gamma,
            arity: DiscretizationSpec::uniform(self.arity)?,
            threads,
            ipf: IpfOptions {
                tol: self.ipf_tol,
                max_cycles: self.max_cycles,
            },
            pseudo_count: self.pseudo_count,
            record_pruned: full,
        })
    }
}

#[derive(Args)]
struct ScreenArgs {
    /// Input file: UTF-8 delimited text, comma or tab.
    #[arg(long)]
    input: PathBuf,
    /// Response column: a name, or an integer 0-based index.
    #[arg(long)]
    response: String,
    #[arg(long, value_enum, default_value = "gaussian")]
    family: FamilyArg,
    /// Cell delimiter.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Header handling.
    #[arg(long, value_enum, default_value = "auto")]
    header: HeaderArg,
    /// Skip predictor standardization.
    #[arg(long)]
    no_standardize: bool,
    /// Also z-score a Gaussian response.
    #[arg(long)]
    standardize_response: bool,
    #[command(flatten)]
    sweep: SweepOpts,
    /// Write records for every pair (evaluated, pruned, skipped), not just
    /// the selected ones.
    #[arg(long)]
    full: bool,
    /// Emit records as JSON instead of CSV.
    #[arg(long)]
    json: bool,
    /// Output path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Design number 1..=8.
    #[arg(long)]
    example: u8,
    #[arg(long, default_value_t = 400)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    p: usize,
    /// AR(1) lag-one correlation of the covariates.
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Gaussian noise sd (linear designs 1-4).
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    /// Interaction coefficient (logistic designs 5-8).
    #[arg(long, default_value_t = 2.0)]
    beta_inter: f64,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    sweep: SweepOpts,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    p: usize,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, value_enum, default_value = "bolt")]
    method: MethodArg,
    #[arg(long, default_value_t = 3)]
    arity: u8,
    /// Comma-separated thread counts to time.
    #[arg(long, default_value = "1,2,4,8")]
    threads_list: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct CheckEfficiencyArgs {
    /// Comma-separated correlation grid.
    #[arg(long, default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    rho_grid: String,
    /// Samples per replication.
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Replications per grid point.
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

/// Six significant digits, scientific: stable output bytes across runs.
fn fmt6(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.5e}")
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidArgument(_) => 1,
        Error::Parse { .. }
        | Error::ConstantColumn(_)
        | Error::BadResponse(_)
        | Error::DimensionTooSmall { .. }
        | Error::DegenerateColumn(_)
        | Error::DegenerateResponse
        | Error::Io(_) => 2,
        Error::DegeneratePair { .. } | Error::Collinear { .. } | Error::IndexOutOfRange(_) => 3,
    }
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, content)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

struct Record {
    rank: Option<usize>,
    var_i: String,
    var_j: String,
    score: Option<f64>,
    statistic: Option<f64>,
    df: Option<u32>,
    selected: bool,
    reason: Option<String>,
}

fn screen_records(result: &ScreenResult, names: &[String], full: bool) -> Vec<Record> {
    let mut records = Vec::new();
    for (rank, entry) in result.ranked.iter().enumerate() {
        if !full && !entry.selected {
            continue;
        }
        records.push(Record {
            rank: Some(rank + 1),
            var_i: names[entry.pair.i].clone(),
            var_j: names[entry.pair.j].clone(),
            score: Some(entry.score),
            statistic: Some(entry.statistic),
            df: Some(entry.df),
            selected: entry.selected,
            reason: None,
        });
    }
    if full {
        let mut pruned = result.pruned.clone();
        pruned.sort_by_key(|(pair, _)| *pair);
        for (pair, ksa_stat) in pruned {
            records.push(Record {
                rank: None,
                var_i: names[pair.i].clone(),
                var_j: names[pair.j].clone(),
                score: None,
                statistic: ksa_stat.is_finite().then_some(ksa_stat),
                df: None,
                selected: false,
                reason: Some("pruned-ksa".to_string()),
            });
        }
        let mut skipped = result.skipped.clone();
        skipped.sort_by_key(|(pair, _)| *pair);
        for (pair, reason) in skipped {
            records.push(Record {
                rank: None,
                var_i: names[pair.i].clone(),
                var_j: names[pair.j].clone(),
                score: None,
                statistic: None,
                df: None,
                selected: false,
                reason: Some(reason.to_string()),
            });
        }
    }
    records
}

fn records_to_csv(records: &[Record]) -> String {
    let mut out = String::from("rank,var_i,var_j,score,statistic,df,selected,reason\n");
    for r in records {
        let rank = r.rank.map(|v| v.to_string()).unwrap_or_default();
        let score = r.score.map(fmt6).unwrap_or_default();
        let stat = r.statistic.map(fmt6).unwrap_or_default();
        let df = r.df.map(|v| v.to_string()).unwrap_or_default();
        let reason = r.reason.clone().unwrap_or_default();
        out.push_str(&format!(
            "{rank},{},{},{score},{stat},{df},{},{reason}\n",
            r.var_i, r.var_j, r.selected
        ));
    }
    out
}

fn json_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn records_to_json(records: &[Record]) -> String {
    let mut out = String::from("[\n");
    for (k, r) in records.iter().enumerate() {
        let rank = r.rank.map(|v| v.to_string()).unwrap_or_else(|| "null".into());
        let score = r.score.map(fmt6).map_or("null".into(), |v| format!("\"{v}\""));
        let stat = r
            .statistic
            .map(fmt6)
            .map_or("null".into(), |v| format!("\"{v}\""));
        let df = r.df.map(|v| v.to_string()).unwrap_or_else(|| "null".into());
        let reason = r
            .reason
            .as_ref()
            .map_or("null".into(), |v| format!("\"{}\"", json_escape(v)));
        out.push_str(&format!(
            "  {{\"rank\": {rank}, \"var_i\": \"{}\", \"var_j\": \"{}\", \"score\": {score}, \"statistic\": {stat}, \"df\": {df}, \"selected\": {}, \"reason\": {reason}}}{}\n",
            json_escape(&r.var_i),
            json_escape(&r.var_j),
            r.selected,
            if k + 1 < records.len() { "," } else { "" }
        ));
    }
    out.push_str("]\n");
    out
}

fn cmd_screen(args: &ScreenArgs) -> Result<(), Error> {
    let response = match args.response.parse::<usize>() {
        Ok(idx) => ResponseSelector::Index(idx),
        Err(_) => ResponseSelector::Name(args.response.clone()),
    };
    let opts = LoadOptions {
        delimiter: args.delimiter,
        header: args.header.into(),
        standardize: !args.no_standardize,
        standardize_response: args.standardize_response,
    };
    let ds = pairscreen::load_delimited(&args.input, &response, args.family.into(), &opts)?;
    let cfg = args.sweep.config(args.full)?;
    let result = screen(&ds, &cfg)?;

    let records = screen_records(&result, ds.column_names(), args.full);
    let content = if args.json {
        records_to_json(&records)
    } else {
        records_to_csv(&records)
    };
    write_output(&args.output, &content)?;
    eprintln!(
        "method={} pairs={} evaluated={} pruned={} skipped={} selected={} wall={:.3}s",
        result.method,
        pairscreen::pair_count(result.p),
        result.n_evaluated,
        result.n_pruned_by_ksa,
        result.n_skipped,
        result.n_selected,
        result.wall_time.as_secs_f64()
    );
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Error> {
    let signal = if args.example <= 4 {
        args.sigma
    } else {
        args.beta_inter
    };
    let design = SimDesign::example(args.example, args.n, args.p, args.rho, signal, args.seed)?;
    let cfg = args.sweep.config(false)?;
    let (metrics, outcomes) = simulate::run_design(&design, &cfg, args.reps)?;

    let content = if args.json {
        let mut out = String::from("{\"reps\": [\n");
        for (k, o) in outcomes.iter().enumerate() {
            out.push_str(&format!(
                "  {{\"rep\": {}, \"covered\": {}, \"truth_size\": {}, \"selected\": {}, \"acr\": \"{}\"}}{}\n",
                o.rep,
                o.covered,
                o.truth_size,
                o.selected,
                fmt6(o.covered as f64 / o.truth_size as f64),
                if k + 1 < outcomes.len() { "," } else { "" }
            ));
        }
        out.push_str(&format!(
            "], \"aggregate\": {{\"acr\": \"{}\", \"acr_se\": \"{}\", \"ams\": \"{}\", \"ams_se\": \"{}\", \"reps\": {}}}}}\n",
            fmt6(metrics.acr),
            fmt6(metrics.acr_se),
            fmt6(metrics.ams),
            fmt6(metrics.ams_se),
            metrics.reps
        ));
        out
    } else {
        let mut out = String::from("rep,covered,truth_size,selected,acr\n");
        for o in &outcomes {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                o.rep,
                o.covered,
                o.truth_size,
                o.selected,
                fmt6(o.covered as f64 / o.truth_size as f64)
            ));
        }
        out.push_str(&format!(
            "# aggregate acr={} acr_se={} ams={} ams_se={} reps={}\n",
            fmt6(metrics.acr),
            fmt6(metrics.acr_se),
            fmt6(metrics.ams),
            fmt6(metrics.ams_se),
            metrics.reps
        ));
        out
    };
    write_output(&args.output, &content)?;
    eprintln!(
        "example={} n={} p={} rho={} acr={:.4} ams={:.1} reps={}",
        args.example, args.n, args.p, args.rho, metrics.acr, metrics.ams, metrics.reps
    );
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Error> {
    let threads: Vec<usize> = args
        .threads_list
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidArgument(format!("bad thread count '{t}'")))
        })
        .collect::<Result<_, _>>()?;
    let design = SimDesign::example(1, args.n, args.p, args.rho, 2.0, args.seed)?;
    let ds = simulate::generate(&design)?;
    println!("threads,wall_seconds,pairs_per_second,speedup");
    let mut base = None;
    for &t in &threads {
        let cfg = ScreenConfig {
            method: args.method.into(),
            selection: Selection::TopDAuto,
            arity: DiscretizationSpec::uniform(args.arity)?,
            threads: t,
            ..Default::default()
        };
        let started = Instant::now();
        let result = screen(&ds, &cfg)?;
        let wall = started.elapsed().as_secs_f64();
        let base_wall = *base.get_or_insert(wall);
        println!(
            "{t},{:.3},{:.0},{:.2}",
            wall,
            result.n_evaluated as f64 / wall,
            base_wall / wall
        );
    }
    Ok(())
}

fn cmd_check_efficiency(args: &CheckEfficiencyArgs) -> Result<(), Error> {
    let grid: Vec<f64> = args
        .rho_grid
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad rho '{t}'")))
        })
        .collect::<Result<_, _>>()?;
    for &rho in &grid {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::InvalidArgument(format!(
                "rho grid values must lie in [0, 1), got {rho}"
            )));
        }
    }
    let report = efficiency::efficiency_report(&grid, args.n, args.reps, args.seed);
    if args.json {
        println!("[");
        for (k, row) in report.rows.iter().enumerate() {
            println!(
                "  {{\"rho\": \"{}\", \"tau_theory\": \"{}\", \"indicator_corr\": \"{}\", \"rho_tau\": \"{}\", \"var_ratio\": \"{}\", \"var_ratio_theory\": \"{}\"}}{}",
                fmt6(row.rho),
                fmt6(row.tau_theory),
                fmt6(row.indicator_corr),
                fmt6(row.rho_tau),
                fmt6(row.variance_ratio),
                fmt6(row.variance_ratio_theory),
                if k + 1 < report.rows.len() { "," } else { "" }
            );
        }
        println!("]");
    } else {
        println!("rho,tau_theory,indicator_corr,abs_error,rho_tau,var_ratio,var_ratio_theory");
        for row in &report.rows {
            println!(
                "{},{},{},{},{},{},{}",
                fmt6(row.rho),
                fmt6(row.tau_theory),
                fmt6(row.indicator_corr),
                fmt6((row.indicator_corr - row.tau_theory).abs()),
                fmt6(row.rho_tau),
                fmt6(row.variance_ratio),
                fmt6(row.variance_ratio_theory)
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Screen(args) => cmd_screen(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bench(args) => cmd_bench(args),
        Command::CheckEfficiency(args) => cmd_check_efficiency(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
