//! The four subcommands. Each returns the process exit code on success and a
//! [`HarnessError`] (which carries its own code) otherwise.

use std::path::{Path, PathBuf};
use std::time::Instant;

use hhw_core::analysis::{self, AnalysisError, Check, GapSeries, DEFAULT_TAIL_FRACTION};
use hhw_core::integrators::{IntegrationError, Solution};
use hhw_core::{integrate, AnyParams, IntegratorSpec, NetworkState, Trajectory, TrajectoryMeta};
use rayon::prelude::*;

use crate::config::{InitialSpec, OutputKind, ScenarioConfig, SweepConfig, SweepVariable, SCHEMA_VERSION};
use crate::csv;
use crate::error::{exit, HarnessError, Result};
use crate::report::{self, BoundsReport, Constants, RunReport, Status, Verdict, VerifyReport};
use crate::svg::{self, Panel, Series};

/// A run is counted as synchronized when its final max gap² is below this.
pub const SYNC_THRESHOLD: f64 = 1e-10;

/// Flags shared by all subcommands.
#[derive(Debug, Clone)]
pub struct Options {
    pub quiet: bool,
    /// Replaces the seed of random initial states (and the sweep seed).
    pub seed: Option<u64>,
    /// Multiplies the classical rate μ before the envelope check. Only for
    /// confirming that a wrong rate is caught.
    pub mu_scale: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            quiet: false,
            seed: None,
            mu_scale: 1.0,
        }
    }
}

impl Options {
    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

/// Everything a single scenario run produces.
pub struct RunArtifacts {
    pub report: RunReport,
    pub trajectory: Trajectory,
    pub gaps: GapSeries,
    /// Theoretical gap envelope, when synchronization is asserted.
    pub envelope: Vec<(f64, f64)>,
}

/// Write via a sibling temp file and rename, so readers never observe a
/// partially written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(|e| HarnessError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

fn to_json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn partial_trajectory(sol: Solution, params: &AnyParams, spec: &IntegratorSpec) -> Result<Trajectory> {
    let meta = TrajectoryMeta {
        params: params.clone(),
        integrator: spec.id(),
        step: sol.step,
        seed: None,
    };
    Ok(Trajectory::from_rows(sol.times, sol.data, meta)?)
}

fn failed_check(name: &str, measured: f64, bound: f64, detail: String) -> Check {
    Check {
        name: name.into(),
        passed: false,
        measured,
        bound,
        margin: Some(bound / measured),
        detail,
    }
}

struct Checks {
    sync: Vec<Check>,
    dissipativity: Vec<Check>,
    envelope: Vec<(f64, f64)>,
}

fn dissipativity_checks(traj: &Trajectory, g: f64) -> Result<Vec<Check>> {
    match analysis::verify_dissipativity(traj, g, DEFAULT_TAIL_FRACTION) {
        Ok(d) => Ok(vec![d.absorbing, d.transient]),
        Err(AnalysisError::TooShort { tail_start, entry_time }) => Ok(vec![failed_check(
            "absorbing_ball",
            entry_time,
            tail_start,
            "run too short: the tail window starts before the absorbing entry time".into(),
        )]),
        Err(e) => Err(e.into()),
    }
}

/// Envelope `gaps(t_ref) · decay(t - t_ref)` for plotting.
fn envelope_points(gaps: &GapSeries, t_ref: f64, decay: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let Some(k) = gaps.times.iter().position(|&t| t >= t_ref) else {
        return Vec::new();
    };
    let g0 = gaps.max_gap[k];
    gaps.times[k..]
        .iter()
        .map(|&t| (t, g0 * decay(t - gaps.times[k])))
        .collect()
}

fn run_checks(
    params: &AnyParams,
    y0: &NetworkState,
    traj: &Trajectory,
    gaps: &GapSeries,
    constants: &Constants,
    mu_scale: f64,
) -> Result<Checks> {
    let dissipativity = dissipativity_checks(traj, constants.absorbing())?;
    match (params, constants) {
        (AnyParams::Classical(p), Constants::Classical(b)) => {
            let mut out = Checks {
                sync: Vec::new(),
                dissipativity,
                envelope: Vec::new(),
            };
            if b.mu > 0.0 {
                let mu = b.mu * mu_scale;
                let t0 = analysis::transient_time_t0(y0, p);
                out.sync.push(analysis::verify_sync_envelope(gaps, mu, t0)?);
                out.envelope = envelope_points(gaps, t0, |dt| (-mu * dt).exp());
            }
            Ok(out)
        }
        (AnyParams::Memristive(m), Constants::Fractional(b)) => {
            let mut out = Checks {
                sync: Vec::new(),
                dissipativity,
                envelope: Vec::new(),
            };
            out.dissipativity
                .push(analysis::verify_rho_bound(traj, b.rho_bound, DEFAULT_TAIL_FRACTION)?);
            if b.delta > 0.0 {
                // memory rules out restarting the comparison later, so the
                // envelope is anchored at t = 0
                out.sync.push(analysis::verify_frac_sync(gaps, m, 0.0)?);
                out.sync
                    .push(analysis::verify_tail_monotone(gaps, DEFAULT_TAIL_FRACTION));
                out.envelope = envelope_points(gaps, 0.0, |dt| analysis::rate_mu_alpha(m, dt).unwrap_or(f64::NAN));
            }
            Ok(out)
        }
        _ => unreachable!("constants are computed from the same parameters"),
    }
}

/// Integrate one scenario from the given initial state and evaluate every
/// applicable check. A blow-up yields a partial report rather than an error.
pub fn run_scenario(cfg: &ScenarioConfig, y0: &NetworkState, seed: Option<u64>, mu_scale: f64) -> Result<RunArtifacts> {
    let constants = Constants::compute(&cfg.params, Some(y0))?;
    let (mut traj, error) = match integrate(y0, &cfg.params, &cfg.integrator) {
        Ok(t) => (t, None),
        Err(IntegrationError::NonFinite { partial, t, .. }) => (
            partial_trajectory(*partial, &cfg.params, &cfg.integrator)?,
            Some(format!("non-finite state at t = {t}")),
        ),
        Err(e) => return Err(e.into()),
    };
    traj.meta.seed = seed;
    let gaps = analysis::gap_series(&traj)?;
    let final_max_gap_sq = gaps.max_gap.last().copied().unwrap_or(f64::NAN);
    let (checks, verdict, envelope) = if error.is_some() {
        let v = Verdict {
            sync: Status::Fail,
            dissipativity: Status::Fail,
            overall: Status::Fail,
        };
        (Vec::new(), v, Vec::new())
    } else {
        let c = run_checks(&cfg.params, y0, &traj, &gaps, &constants, mu_scale)?;
        let sync = Status::of(&c.sync);
        let dissipativity = Status::of(&c.dissipativity);
        let overall = if sync.ok() && dissipativity.ok() {
            Status::Pass
        } else {
            Status::Fail
        };
        let mut checks = c.dissipativity;
        checks.extend(c.sync);
        (
            checks,
            Verdict {
                sync,
                dissipativity,
                overall,
            },
            c.envelope,
        )
    };
    let report = RunReport {
        schema_version: SCHEMA_VERSION,
        model: cfg.kind(),
        n: cfg.params.n(),
        seed,
        initial: y0.clone(),
        integrator: traj.meta.integrator.clone(),
        samples: traj.len(),
        t_end: traj.t_end(),
        partial: error.is_some(),
        error,
        constants,
        final_max_gap_sq,
        checks,
        verdict,
    };
    Ok(RunArtifacts {
        report,
        trajectory: traj,
        gaps,
        envelope,
    })
}

fn check_mu_scale(cfg: &ScenarioConfig, opts: &Options) -> Result<()> {
    if opts.mu_scale != 1.0 && matches!(cfg.params, AnyParams::Memristive(_)) {
        return Err(HarnessError::Config(
            "--debug-mu-scale applies to the classical model only".into(),
        ));
    }
    if !(opts.mu_scale.is_finite() && opts.mu_scale > 0.0) {
        return Err(HarnessError::Config("--debug-mu-scale must be positive".into()));
    }
    Ok(())
}

/// Two-panel figure: potentials, and log₁₀ of the max gap² with the
/// theoretical envelope.
pub fn scenario_plot(art: &RunArtifacts) -> String {
    let traj = &art.trajectory;
    let n = traj.n();
    let potentials = Panel {
        title: "Membrane potentials".into(),
        x_label: "t (ms)".into(),
        y_label: "V".into(),
        series: (0..n)
            .map(|i| Series::new(format!("V_{}", i + 1), traj.rows().map(|(t, r)| (t, r[i])).collect()))
            .collect(),
        rules: Vec::new(),
    };
    let mut series = vec![Series::new(
        "max gap²",
        art.gaps
            .times
            .iter()
            .zip(&art.gaps.max_gap)
            .map(|(&t, &g)| (t, svg::log10_clamped(g)))
            .collect(),
    )];
    if !art.envelope.is_empty() {
        series.push(
            Series::new(
                "envelope",
                art.envelope.iter().map(|&(t, g)| (t, svg::log10_clamped(g))).collect(),
            )
            .dashed(),
        );
    }
    let gaps = Panel {
        title: "Synchronization gap".into(),
        x_label: "t (ms)".into(),
        y_label: "log10 max gap²".into(),
        series,
        rules: Vec::new(),
    };
    svg::render(&[potentials, gaps])
}

pub fn simulate(cfg: &ScenarioConfig, out: Option<&Path>, opts: &Options) -> Result<u8> {
    check_mu_scale(cfg, opts)?;
    let seed = cfg.initial.seed().map(|s| opts.seed.unwrap_or(s));
    let y0 = cfg.initial.resolve(&cfg.params, opts.seed);
    let art = run_scenario(cfg, &y0, seed, opts.mu_scale)?;
    let dir = out.unwrap_or(&cfg.output_dir);
    if cfg.wants(OutputKind::TrajectoryCsv) {
        write_atomic(
            &dir.join("trajectory.csv"),
            csv::trajectory_csv(&art.trajectory).as_bytes(),
        )?;
    }
    if cfg.wants(OutputKind::GapsCsv) {
        write_atomic(&dir.join("gaps.csv"), csv::gaps_csv(&art.gaps).as_bytes())?;
    }
    if cfg.wants(OutputKind::ReportJson) {
        write_atomic(&dir.join("report.json"), to_json(&art.report).as_bytes())?;
    }
    if cfg.wants(OutputKind::PlotSvg) {
        write_atomic(&dir.join("plot.svg"), scenario_plot(&art).as_bytes())?;
    }
    let r = &art.report;
    if let Some(e) = &r.error {
        return Err(HarnessError::Runtime(format!(
            "{e}; partial outputs up to t = {} written to {}",
            r.t_end,
            dir.display()
        )));
    }
    opts.say(format!(
        "final max gap² = {:e}; sync {}; dissipativity {}",
        r.final_max_gap_sq, r.verdict.sync, r.verdict.dissipativity
    ));
    Ok(exit::OK)
}

pub fn bounds(cfg: &ScenarioConfig, opts: &Options) -> Result<(u8, BoundsReport)> {
    let seed = cfg.initial.seed().map(|s| opts.seed.unwrap_or(s));
    let y0 = cfg.initial.resolve(&cfg.params, opts.seed);
    let report = BoundsReport::new(&cfg.params, Some(&y0), seed)?;
    if !opts.quiet {
        print!("{}", to_json(&report));
    }
    Ok((exit::OK, report))
}

/// Run `seeds` scenarios (consecutive seeds from the configured one) and
/// write `verify.json`. Exit 0 iff every applicable check passes.
pub fn verify(cfg: &ScenarioConfig, seeds: u32, out: Option<&Path>, opts: &Options) -> Result<(u8, VerifyReport)> {
    check_mu_scale(cfg, opts)?;
    if seeds == 0 {
        return Err(HarnessError::Config("--seeds must be at least 1".into()));
    }
    let run_seeds: Vec<Option<u64>> = match &cfg.initial {
        InitialSpec::Random { seed, .. } => {
            let first = opts.seed.unwrap_or(*seed);
            (0..seeds).map(|k| Some(first.wrapping_add(u64::from(k)))).collect()
        }
        InitialSpec::State(_) if seeds > 1 => {
            return Err(HarnessError::Config(
                "initial: --seeds > 1 needs a random initial specification".into(),
            ))
        }
        InitialSpec::State(_) => vec![None],
    };
    let runs: Vec<RunReport> = run_seeds
        .par_iter()
        .map(|&seed| {
            let y0 = cfg.initial.resolve(&cfg.params, seed);
            run_scenario(cfg, &y0, seed, opts.mu_scale).map(|a| a.report)
        })
        .collect::<Result<_>>()?;
    let failed = runs.iter().any(|r| r.verdict.overall == Status::Fail);
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        overall: if failed { Status::Fail } else { Status::Pass },
        runs,
    };
    for r in &report.runs {
        let seed = r.seed.map_or("-".to_string(), |s| s.to_string());
        opts.say(format!(
            "seed {seed}: sync {} dissipativity {}",
            r.verdict.sync, r.verdict.dissipativity
        ));
        for c in r.checks.iter().filter(|c| !c.passed) {
            opts.say(format!(
                "  FAIL {}: measured {:e} vs bound {:e} ({})",
                c.name, c.measured, c.bound, c.detail
            ));
        }
    }
    opts.say(format!("overall {}", report.overall));
    let dir = out.unwrap_or(&cfg.output_dir);
    write_atomic(&dir.join("verify.json"), to_json(&report).as_bytes())?;
    if let Some(r) = report.runs.iter().find(|r| r.partial) {
        return Err(HarnessError::Runtime(r.error.clone().unwrap_or_default()));
    }
    Ok((if failed { exit::VERIFICATION_FAILED } else { exit::OK }, report))
}

/// One row of the sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub replicate: u32,
    pub seed: u64,
    pub coupling: f64,
    pub final_max_gap_sq: f64,
    pub sync: bool,
    pub status: String,
    pub wall_time_ms: f64,
}

fn sweep_run(cfg: &ScenarioConfig, seed: u64, runs_dir: &Path, stem: &str) -> Result<(f64, String)> {
    let initial = match &cfg.initial {
        InitialSpec::Random { radius, .. } => InitialSpec::Random { seed, radius: *radius },
        fixed => fixed.clone(),
    };
    let y0 = initial.resolve(&cfg.params, None);
    let (traj, status) = match integrate(&y0, &cfg.params, &cfg.integrator) {
        Ok(t) => (t, "ok".to_string()),
        Err(IntegrationError::NonFinite { partial, .. }) => (
            partial_trajectory(*partial, &cfg.params, &cfg.integrator)?,
            "blow_up".to_string(),
        ),
        Err(e) => {
            let e = HarnessError::from(e);
            if e.exit_code() == exit::RUNTIME {
                return Ok((f64::NAN, "integration_error".into()));
            }
            return Err(e);
        }
    };
    let gaps = analysis::gap_series(&traj)?;
    write_atomic(&runs_dir.join(format!("{stem}.csv")), csv::gaps_csv(&gaps).as_bytes())?;
    let last = gaps.max_gap.last().copied().unwrap_or(f64::NAN);
    Ok((if status == "ok" { last } else { f64::NAN }, status))
}

pub fn sweep_summary_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("value,replicate,seed,P,final_max_gap_sq,sync,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            csv::fmt_f64(r.value),
            r.replicate,
            r.seed,
            csv::fmt_f64(r.coupling),
            csv::fmt_f64(r.final_max_gap_sq),
            r.sync,
            r.status
        ));
    }
    out
}

pub fn sweep_timing_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("value,replicate,wall_time_ms\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            csv::fmt_f64(r.value),
            r.replicate,
            csv::fmt_f64(r.wall_time_ms)
        ));
    }
    out
}

fn sweep_plot(sweep: &SweepConfig, rows: &[SweepRow]) -> Result<String> {
    let mut points: Vec<(f64, f64)> = Vec::new();
    for &v in &sweep.values {
        let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.value == v).collect();
        let synced = mine.iter().filter(|r| r.sync).count();
        points.push((v, synced as f64 / mine.len() as f64));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rules = Vec::new();
    if sweep.sweep_variable == SweepVariable::P {
        let label = match sweep.base.kind() {
            hhw_core::ModelKind::Classical => "P*",
            hhw_core::ModelKind::Memristive => "P_*",
        };
        let at = if sweep.relative_to_threshold {
            1.0
        } else {
            report::threshold(&sweep.base.params)?
        };
        rules.push((at, label.to_string()));
    }
    let x_label = match (sweep.sweep_variable, sweep.relative_to_threshold) {
        (SweepVariable::P, true) => "P / threshold",
        (SweepVariable::P, false) => "P",
        (SweepVariable::Alpha, _) => "alpha",
        (SweepVariable::N, _) => "n",
    };
    let panel = Panel {
        title: "Empirical synchronization fraction".into(),
        x_label: x_label.into(),
        y_label: "fraction synchronized".into(),
        series: vec![Series::new("sync fraction", points)],
        rules,
    };
    Ok(svg::render(&[panel]))
}

/// Run the sweep grid with at most `jobs` concurrent runs. Writes
/// `summary.csv` (deterministic), `timing.csv` (wall times), one gaps CSV
/// per run under `runs/`, and optionally `sweep.svg`.
pub fn sweep(
    sweep: &SweepConfig,
    jobs: Option<usize>,
    out: Option<&Path>,
    opts: &Options,
) -> Result<(u8, Vec<SweepRow>)> {
    let mut sweep = sweep.clone();
    if let Some(s) = opts.seed {
        sweep.seed = s;
    }
    let dir = out.unwrap_or(&sweep.base.output_dir).to_path_buf();
    let runs_dir = dir.join("runs");
    let mut tasks = Vec::new();
    for (i, &v) in sweep.values.iter().enumerate() {
        let cfg = sweep.scenario_at(v)?;
        for r in 0..sweep.replicates {
            tasks.push((i, v, r, cfg.clone()));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Runtime(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(i, v, r, cfg)| {
                let seed = sweep.run_seed(*i, *r);
                let start = Instant::now();
                let (last, status) = sweep_run(cfg, seed, &runs_dir, &format!("value{i}_rep{r}"))?;
                Ok(SweepRow {
                    value: *v,
                    replicate: *r,
                    seed,
                    coupling: cfg.params.base().p,
                    final_max_gap_sq: last,
                    sync: last < SYNC_THRESHOLD,
                    status,
                    wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
                })
            })
            .collect::<Result<_>>()
    })?;
    write_atomic(&dir.join("summary.csv"), sweep_summary_csv(&rows).as_bytes())?;
    write_atomic(&dir.join("timing.csv"), sweep_timing_csv(&rows).as_bytes())?;
    if sweep.base.wants(OutputKind::PlotSvg) {
        write_atomic(&dir.join("sweep.svg"), sweep_plot(&sweep, &rows)?.as_bytes())?;
    }
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    opts.say(format!(
        "{} runs, {} synchronized, {} failed; summary in {}",
        rows.len(),
        rows.iter().filter(|r| r.sync).count(),
        failed,
        dir.join("summary.csv").display()
    ));
    Ok((if failed > 0 { exit::RUNTIME } else { exit::OK }, rows))
}
