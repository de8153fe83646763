//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 I/O or persistence
//! error, 3 `verify` found a row that does not hold.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;

use crate::curve::build_basis;
use crate::driver::{run_trial, sample_window, search, trial_rng, DriverConfig, JsonlSink, SearchOptions};
use crate::error::Result;
use crate::io;
use crate::pyramid::DEFAULT_BOX_CAP;
use crate::real::{from_f64, to_decimal_string};
use crate::verify::{brute_force_oracle, eval_report_form, SolutionRecord, TargetSet};

pub const EXIT_VERIFY_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cubesum", version, about = "Lattice search for large solutions of d = c*x^3 + y^3 + z^3")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample random windows and report admissible solutions as JSONL.
    Search(SearchArgs),
    /// Re-verify result lines or "d x y z" rows exactly.
    Verify(VerifyArgs),
    /// Exhaustive small-box enumeration, emitted in the result-line schema.
    Oracle(OracleArgs),
    /// Run the pinned X0 = 0.31415 window and show every stage.
    Example(ExampleArgs),
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower bound in {s:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper bound in {s:?}"))?;
    Ok((lo, hi))
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, default_value_t = 2)]
    pub c: u32,
    /// File with one wanted d per line; without it any d <= d-max is accepted.
    #[arg(long)]
    pub targets: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub d_max: u64,
    #[arg(long, default_value_t = 100)]
    pub min_yz: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "1e-5:1e-2")]
    pub h_range: (f64, f64),
    #[arg(long, default_value_t = 10.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "-10:10")]
    pub x0_range: (f64, f64),
    #[arg(long, default_value_t = 0.75)]
    pub delta: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
    #[arg(long, default_value_t = 64)]
    pub precision_bits: u32,
    #[arg(long, default_value_t = DEFAULT_BOX_CAP)]
    pub box_cap: u128,
    #[arg(long, default_value_t = 256)]
    pub checkpoint_every: u64,
    /// Results file (JSONL); standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Continue from --checkpoint, appending to --out.
    #[arg(long, requires = "checkpoint")]
    pub resume: bool,
    /// Omit timestamps so output is byte-comparable across runs.
    #[arg(long)]
    pub no_timestamp: bool,
}

impl SearchArgs {
    pub fn config(&self) -> DriverConfig {
        DriverConfig {
            c: self.c,
            x0_low: self.x0_range.0,
            x0_high: self.x0_range.1,
            h_low: self.h_range.0,
            h_high: self.h_range.1,
            kappa: self.kappa,
            lambda: self.lambda,
            trials: self.trials,
            seed: self.seed,
            workers: self.workers,
            eps: self.eps,
            delta: self.delta,
            box_cap: self.box_cap,
            precision_bits: self.precision_bits,
            checkpoint_every: self.checkpoint_every,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// File of JSONL result lines or whitespace-separated "d x y z" rows.
    pub file: PathBuf,
    /// Coefficient for plain rows (result lines carry their own).
    #[arg(long, default_value_t = 2)]
    pub c: u32,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 2)]
    pub c: u32,
    #[arg(long)]
    pub box_bound: u32,
    #[arg(long, default_value_t = 1000)]
    pub d_max: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(long, default_value_t = 0.75)]
    pub delta: f64,
}

pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Search(args) => cmd_search(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Oracle(args) => cmd_oracle(&args),
        Command::Example(args) => cmd_example(&args),
    }
}

fn open_out(path: Option<&Path>, append: bool) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let f = if append { OpenOptions::new().create(true).append(true).open(p)? } else { File::create(p)? };
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn cmd_search(args: &SearchArgs) -> Result<i32> {
    let cfg = args.config();
    cfg.validate()?;
    let wanted = match &args.targets {
        Some(p) => io::load_targets(p)?,
        None => Default::default(),
    };
    let targets = TargetSet::new(wanted, args.d_max, args.min_yz)?;
    targets.check_residues(args.c)?;
    let writer = open_out(args.out.as_deref(), args.resume)?;
    let mut sink = JsonlSink { writer, timestamps: !args.no_timestamp };
    let opts = SearchOptions { checkpoint: args.checkpoint.clone(), resume: args.resume };
    let summary = search(&cfg, &targets, &mut sink, &opts)?;
    eprintln!("{}", serde_json::to_string(&summary).expect("summary serializes"));
    Ok(0)
}

/// Outcome of checking one input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowCheck {
    Pass,
    Fail { claimed: String, computed: BigInt },
    Unparsable(String),
}

/// Check one line; `None` for blank lines and `#` comments.
pub fn verify_line(line: &str, c: u32) -> Option<RowCheck> {
    let t = line.trim();
    if t.is_empty() || t.starts_with('#') {
        return None;
    }
    if t.starts_with('{') {
        let parsed: std::result::Result<io::ResultLine, _> = serde_json::from_str(t);
        return Some(match parsed {
            Err(e) => RowCheck::Unparsable(e.to_string()),
            Ok(l) => {
                let ints: std::result::Result<Vec<BigInt>, _> =
                    [&l.x, &l.y, &l.z].iter().map(|s| s.parse::<BigInt>()).collect();
                match ints {
                    Err(e) => RowCheck::Unparsable(e.to_string()),
                    Ok(v) => check_row(l.c, &BigInt::from(l.d), &v[0], &v[1], &v[2]),
                }
            }
        });
    }
    let fields: Vec<&str> = t.split(|ch: char| ch.is_whitespace() || ch == ',').filter(|f| !f.is_empty()).collect();
    if fields.len() != 4 {
        return Some(RowCheck::Unparsable(format!("expected 4 fields \"d x y z\", got {}", fields.len())));
    }
    let ints: std::result::Result<Vec<BigInt>, _> = fields.iter().map(|f| f.parse::<BigInt>()).collect();
    Some(match ints {
        Err(e) => RowCheck::Unparsable(e.to_string()),
        Ok(v) => check_row(c, &v[0], &v[1], &v[2], &v[3]),
    })
}

fn check_row(c: u32, d: &BigInt, x: &BigInt, y: &BigInt, z: &BigInt) -> RowCheck {
    let computed = eval_report_form(c, x, y, z);
    if &computed == d {
        RowCheck::Pass
    } else {
        RowCheck::Fail { claimed: d.to_string(), computed }
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let reader = BufReader::new(File::open(&args.file)?);
    let (mut passed, mut failed) = (0usize, 0usize);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        match verify_line(&line, args.c) {
            None => {}
            Some(RowCheck::Pass) => passed += 1,
            Some(RowCheck::Fail { claimed, computed }) => {
                failed += 1;
                writeln!(out, "line {}: FAIL claimed d={claimed} computed d={computed}: {}", i + 1, line.trim())?;
            }
            Some(RowCheck::Unparsable(msg)) => {
                failed += 1;
                writeln!(out, "line {}: FAIL unparsable ({msg}): {}", i + 1, line.trim())?;
            }
        }
    }
    writeln!(out, "{passed} rows verified, {failed} failed")?;
    Ok(if failed == 0 { 0 } else { EXIT_VERIFY_FAILED })
}

fn cmd_oracle(args: &OracleArgs) -> Result<i32> {
    let map = brute_force_oracle(args.c, args.box_bound, args.d_max)?;
    let mut out = open_out(args.out.as_deref(), false)?;
    let ts = (!args.no_timestamp).then(chrono::Utc::now);
    for solution in map.into_values().flatten() {
        let rec = SolutionRecord { solution, window: None, seed: 0, trial: -1 };
        io::emit_solution(&mut out, &rec, ts)?;
    }
    out.flush()?;
    Ok(0)
}

fn cmd_example(args: &ExampleArgs) -> Result<i32> {
    let cfg = DriverConfig { delta: args.delta, ..DriverConfig::worked_example() };
    cfg.validate()?;
    let window = sample_window(&mut trial_rng(cfg.seed, 0), &cfg)?;
    let basis = build_basis(&window);
    let reduced = basis.reduce(&from_f64(cfg.delta)?)?;
    let targets = TargetSet::new([], 1000, 0)?;
    let (summary, recs) = run_trial(&window, &targets, &cfg, 0)?;

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let dec = |q| to_decimal_string(q, 12);
    writeln!(
        out,
        "window: c={} X0={} h={} K={} L={}",
        window.params.c,
        dec(&window.x0),
        dec(&window.h),
        dec(&window.k),
        dec(&window.l)
    )?;
    writeln!(
        out,
        "Y0={:.9} A={:.9} B={:.9}",
        crate::real::to_f64(&window.y0),
        crate::real::to_f64(&window.a),
        crate::real::to_f64(&window.b)
    )?;
    writeln!(out, "basis F:\n{}", basis.matrix)?;
    writeln!(out, "transform M (det {}):\n{}", reduced.m.det(), reduced.m.matrix())?;
    writeln!(out, "reduced basis H = F M:\n{}", reduced.h)?;
    writeln!(
        out,
        "enumerated {} cone points and {} probes; solutions with d <= {}:",
        summary.points, summary.probes, targets.d_max
    )?;
    for r in &recs {
        let s = &r.solution;
        writeln!(out, "  d={} x={} y={} z={}", s.d, s.x, s.y, s.z)?;
    }
    Ok(0)
}
