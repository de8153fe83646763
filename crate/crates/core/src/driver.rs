//! Randomised trial loop: sample a window, reduce, enumerate, verify.
//!
//! Each trial draws from its own generator seeded with
//! `splitmix64(seed ^ trial_index)`, and trials are run in fixed-size chunks
//! whose results are merged in trial order. The emitted stream therefore
//! depends only on `(seed, config, targets)`, never on the worker count.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{build_basis, build_window, CurveParams, SearchWindow, WindowSummary};
use crate::error::{Error, Result};
use crate::io::{self, CheckpointState};
use crate::pyramid::{enumerate_candidates, map_candidate, DEFAULT_BOX_CAP};
use crate::real::{from_f64, Rational};
use crate::verify::{canonicalize, SolutionRecord, TargetSet};

const MAX_REJECTIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriverConfig {
    pub c: u32,
    pub x0_low: f64,
    pub x0_high: f64,
    pub h_low: f64,
    pub h_high: f64,
    /// `K = kappa * h^2`.
    pub kappa: f64,
    /// `L = lambda / h`.
    pub lambda: f64,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    pub eps: f64,
    pub delta: f64,
    pub box_cap: u128,
    pub precision_bits: u32,
    /// Trials per chunk; a checkpoint is written after every chunk.
    pub checkpoint_every: u64,
}

impl Default for DriverConfig {
    fn default() -> Self {
        DriverConfig {
            c: 2,
            x0_low: -10.0,
            x0_high: 10.0,
            h_low: 1e-5,
            h_high: 1e-2,
            kappa: 10.0,
            lambda: 1.0,
            trials: 1000,
            seed: 0,
            workers: 1,
            eps: 1e-9,
            delta: 0.75,
            box_cap: DEFAULT_BOX_CAP,
            precision_bits: 64,
            checkpoint_every: 256,
        }
    }
}

impl DriverConfig {
    /// The window of the classic hand-worked example:
    /// `X0 = 0.31415, h = 0.001, K = 1e-5, L = 1000`.
    pub fn worked_example() -> Self {
        DriverConfig { x0_low: 0.31415, x0_high: 0.31415, h_low: 0.001, h_high: 0.001, trials: 1, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        let finite =
            [self.x0_low, self.x0_high, self.h_low, self.h_high, self.kappa, self.lambda, self.eps, self.delta];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("configuration values must be finite");
        }
        if self.c < 1 {
            return bad("c must be at least 1");
        }
        if self.x0_low > self.x0_high {
            return bad("x0 range is empty");
        }
        if !(self.h_low > 0.0 && self.h_low <= self.h_high) {
            return bad("h range must satisfy 0 < low <= high");
        }
        if self.kappa <= 0.0 || self.lambda <= 0.0 {
            return bad("kappa and lambda must be positive");
        }
        if self.lambda / self.h_high <= 1.0 {
            return bad("lambda / h must exceed 1 over the whole h range");
        }
        if self.workers < 1 {
            return bad("workers must be at least 1");
        }
        if self.eps < 0.0 {
            return bad("eps must be non-negative");
        }
        if !(self.delta > 0.25 && self.delta < 1.0) {
            return bad("delta must lie in (1/4, 1)");
        }
        if self.checkpoint_every < 1 {
            return bad("checkpoint interval must be at least 1");
        }
        CurveParams::new(self.c, self.precision_bits)?;
        Ok(())
    }

    fn curve_params(&self) -> CurveParams {
        CurveParams { c: self.c, precision_bits: self.precision_bits }
    }

    fn eps_rational(&self) -> Result<Rational> {
        from_f64(self.eps)
    }

    fn delta_rational(&self) -> Result<Rational> {
        from_f64(self.delta)
    }
}

/// Fields that determine the emitted solutions; `trials` and `workers` can
/// change across a resume.
#[derive(Serialize)]
struct ConfigIdentity<'a> {
    c: u32,
    x0: (f64, f64),
    h: (f64, f64),
    kappa: f64,
    lambda: f64,
    seed: u64,
    eps: f64,
    delta: f64,
    box_cap: u128,
    precision_bits: u32,
    checkpoint_every: u64,
    targets: &'a BTreeSet<u64>,
    d_max: u64,
    min_yz: u64,
}

pub fn config_hash(cfg: &DriverConfig, targets: &TargetSet) -> String {
    io::config_digest(&ConfigIdentity {
        c: cfg.c,
        x0: (cfg.x0_low, cfg.x0_high),
        h: (cfg.h_low, cfg.h_high),
        kappa: cfg.kappa,
        lambda: cfg.lambda,
        seed: cfg.seed,
        eps: cfg.eps,
        delta: cfg.delta,
        box_cap: cfg.box_cap,
        precision_bits: cfg.precision_bits,
        checkpoint_every: cfg.checkpoint_every,
        targets: &targets.wanted,
        d_max: targets.d_max,
        min_yz: targets.min_yz,
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    splitmix64(seed ^ trial)
}

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(seed, trial))
}

/// Draw `h` log-uniformly and `X0` uniformly (redrawing `X0` near the
/// singular point), then build the window with `K = kappa h^2`, `L = lambda / h`.
pub fn sample_window<R: Rng + ?Sized>(rng: &mut R, cfg: &DriverConfig) -> Result<SearchWindow> {
    let h = if cfg.h_low == cfg.h_high {
        cfg.h_low
    } else {
        rng.gen_range(cfg.h_low.ln()..=cfg.h_high.ln()).exp().clamp(cfg.h_low, cfg.h_high)
    };
    let h = from_f64(h)?;
    let k = from_f64(cfg.kappa)? * &h * &h;
    let l = from_f64(cfg.lambda)? / &h;
    let params = cfg.curve_params();
    for _ in 0..MAX_REJECTIONS {
        let x0 = if cfg.x0_low == cfg.x0_high { cfg.x0_low } else { rng.gen_range(cfg.x0_low..=cfg.x0_high) };
        match build_window(&params, &from_f64(x0)?, &h, &k, &l) {
            Err(Error::SingularPoint { .. }) => continue,
            other => return other,
        }
    }
    Err(Error::SamplingExhausted { attempts: MAX_REJECTIONS })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub trial: u64,
    pub window: WindowSummary,
    /// Cone points enumerated.
    pub points: u64,
    /// Probe vectors evaluated in addition to the cone points.
    pub probes: u64,
    pub candidates: u64,
    pub solutions: u64,
    pub elapsed: Duration,
}

/// Run one window through basis, reduction, enumeration and verification,
/// returning every admissible solution once.
pub fn run_trial(
    window: &SearchWindow,
    targets: &TargetSet,
    cfg: &DriverConfig,
    trial: u64,
) -> Result<(TrialSummary, Vec<SolutionRecord>)> {
    let start = Instant::now();
    let c = window.params.c;
    let reduced = build_basis(window).reduce(&cfg.delta_rational()?)?;
    let enumeration = enumerate_candidates(&reduced, &cfg.eps_rational()?, cfg.box_cap)?;
    let summary_window = window.summary();

    let mut seen = BTreeSet::new();
    let mut records = Vec::new();
    let mut candidates = 0u64;
    for p in &enumeration.points {
        candidates += 1;
        let cand = map_candidate(&reduced.m, &p.v);
        let Some(sol) = canonicalize(c, &cand) else { continue };
        if targets.admits(&sol) && seen.insert(sol.clone()) {
            records.push(SolutionRecord {
                solution: sol,
                window: Some(summary_window),
                seed: cfg.seed,
                trial: trial as i64,
            });
        }
    }
    let summary = TrialSummary {
        trial,
        window: summary_window,
        points: enumeration.cone_count() as u64,
        probes: enumeration.probe_count() as u64,
        candidates,
        solutions: records.len() as u64,
        elapsed: start.elapsed(),
    };
    Ok((summary, records))
}

/// Receiver of deduplicated, re-verified solutions.
pub trait SolutionSink {
    fn accept(&mut self, rec: &SolutionRecord) -> Result<()>;

    /// Called before each checkpoint is written.
    fn flush(&mut self) -> Result<()> {
        Ok(())
    }
}

impl SolutionSink for Vec<SolutionRecord> {
    fn accept(&mut self, rec: &SolutionRecord) -> Result<()> {
        self.push(rec.clone());
        Ok(())
    }
}

/// Writes each solution as a JSONL line.
pub struct JsonlSink<W: std::io::Write> {
    pub writer: W,
    pub timestamps: bool,
}

impl<W: std::io::Write> SolutionSink for JsonlSink<W> {
    fn accept(&mut self, rec: &SolutionRecord) -> Result<()> {
        let ts = self.timestamps.then(chrono::Utc::now);
        let line = io::format_result_line(rec, ts)?;
        writeln!(self.writer, "{line}")?;
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub trials_requested: u64,
    /// First trial index run in this invocation (nonzero after a resume).
    pub resumed_from: u64,
    pub trials_run: u64,
    pub trials_skipped: u64,
    pub trials_panicked: u64,
    pub points: u64,
    pub probes: u64,
    pub candidates: u64,
    pub solutions_found: u64,
    pub solutions_emitted: u64,
    pub duplicates: u64,
    pub elapsed_secs: f64,
}

enum Outcome {
    Done(TrialSummary, Vec<SolutionRecord>),
    Skipped(Error),
    Panicked(String),
}

fn run_one(cfg: &DriverConfig, targets: &TargetSet, trial: u64) -> Outcome {
    let result = catch_unwind(AssertUnwindSafe(|| {
        let mut rng = trial_rng(cfg.seed, trial);
        let window = sample_window(&mut rng, cfg)?;
        run_trial(&window, targets, cfg, trial)
    }));
    match result {
        Ok(Ok((summary, recs))) => Outcome::Done(summary, recs),
        Ok(Err(e)) => Outcome::Skipped(e),
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            Outcome::Panicked(msg)
        }
    }
}

/// Run `cfg.trials` trials and deliver each admissible solution to `sink`
/// exactly once.
pub fn search(
    cfg: &DriverConfig,
    targets: &TargetSet,
    sink: &mut dyn SolutionSink,
    opts: &SearchOptions,
) -> Result<RunSummary> {
    cfg.validate()?;
    let started = Instant::now();
    let hash = config_hash(cfg, targets);
    let mut digests = BTreeSet::new();
    let mut start = 0;
    if let (true, Some(path)) = (opts.resume, &opts.checkpoint) {
        if path.exists() {
            let state = io::checkpoint_load_for(path, &hash)?;
            start = state.trials_done;
            digests.extend(state.digests);
            log::info!("resuming at trial {start} with {} known solutions", digests.len());
        }
    }
    let mut summary = RunSummary { trials_requested: cfg.trials, resumed_from: start, ..Default::default() };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("cannot start worker pool: {e}")))?;

    let mut chunk_start = start;
    while chunk_start < cfg.trials {
        let chunk_end = cfg.trials.min(chunk_start + cfg.checkpoint_every);
        let outcomes: Vec<Outcome> =
            pool.install(|| (chunk_start..chunk_end).into_par_iter().map(|t| run_one(cfg, targets, t)).collect());
        for (t, outcome) in (chunk_start..chunk_end).zip(outcomes) {
            match outcome {
                Outcome::Done(ts, recs) => {
                    summary.trials_run += 1;
                    summary.points += ts.points;
                    summary.probes += ts.probes;
                    summary.candidates += ts.candidates;
                    summary.solutions_found += recs.len() as u64;
                    for rec in recs {
                        rec.validate()?;
                        if digests.insert(io::solution_digest(&rec.solution)) {
                            sink.accept(&rec)?;
                            summary.solutions_emitted += 1;
                        } else {
                            summary.duplicates += 1;
                        }
                    }
                }
                Outcome::Skipped(e @ Error::SamplingExhausted { .. }) => return Err(e),
                Outcome::Skipped(e) => {
                    log::warn!("trial {t} skipped: {e}");
                    summary.trials_skipped += 1;
                }
                Outcome::Panicked(msg) => {
                    log::error!("trial {t} panicked: {msg}");
                    summary.trials_panicked += 1;
                }
            }
        }
        sink.flush()?;
        if let Some(path) = &opts.checkpoint {
            let state = CheckpointState {
                seed: cfg.seed,
                trials_done: chunk_end,
                digests: digests.iter().cloned().collect(),
                config_hash: hash.clone(),
            };
            io::checkpoint_save(&state, path)?;
        }
        chunk_start = chunk_end;
    }
    summary.elapsed_secs = started.elapsed().as_secs_f64();
    Ok(summary)
}
