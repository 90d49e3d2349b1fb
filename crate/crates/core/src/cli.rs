//! `relaxed-bell` command-line front end.
//!
//! Every subcommand prints one JSON document to stdout and a short
//! human-readable summary to stderr. Floats in the JSON are rounded to 12
//! significant digits. Exit codes: 0 success, 1 I/O, 2 validation,
//! 3 internal invariant breach.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::boxes::BoxSpec;
use crate::chsh::{bound_b, check_model_consistency, chsh, thresholds_for_violation};
use crate::error::{Error, Result};
use crate::info::{binary_entropy, channel_capacity, info_thresholds, mutual_info_shift};
use crate::measures::measure_all;
use crate::model::{behavior_of, LambdaModel, Outcome};
use crate::oracle::{brute_force_max_with, verify_tightness, ConstraintLayout, OracleOptions, OracleReport};
use crate::singlet::{
    analytic_chsh, conjecture_scan, estimate_chsh, mixture_measures, ChshSettings, Direction, MixtureSpec,
    ScanConfig,
};

/// Environment variable giving the default worker-thread cap.
pub const THREADS_ENV: &str = "RELAXED_BELL_THREADS";
pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_SAMPLES: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "relaxed-bell", version, about = "Indeterminism and signalling in CHSH hidden-variable models")]
pub struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Measure a model file and check it against B(I, S).
    Analyze {
        path: PathBuf,
    },
    /// Write a box model file.
    Box {
        #[arg(long, value_enum)]
        kind: BoxKind,
        #[arg(long = "I")]
        i: Option<f64>,
        /// Relabel + and - on both sides.
        #[arg(long)]
        flip: bool,
        /// Deterministic outcomes a(X),a(X'),b(Y),b(Y'), e.g. "+,+,+,-".
        #[arg(long)]
        outcomes: Option<String>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Grid-search the CHSH maximum under (I, S) constraints.
    Oracle {
        /// One value or a comma-separated list.
        #[arg(long = "I")]
        i: String,
        /// One value or a comma-separated list.
        #[arg(long = "S")]
        s: String,
        #[arg(long, default_value_t = crate::oracle::DEFAULT_STEP)]
        step: f64,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        endpoints: bool,
        #[arg(long, value_enum, default_value_t = LayoutArg::Operational)]
        layout: LayoutArg,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Singlet simulations: Monte Carlo CHSH for a mixture and the conjecture scan.
    Singlet {
        /// Weight of the Toner-Bacon component.
        #[arg(long, default_value_t = 1.0)]
        w: f64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Four planar angles in degrees "x,x',y,y'" or a JSON file with
        /// unit vectors under keys x, xp, y, yp.
        #[arg(long)]
        settings: Option<String>,
        /// Run the S + 2I scan.
        #[arg(long)]
        scan: bool,
        /// Comma-separated mixture weights for the scan.
        #[arg(long)]
        w_grid: Option<String>,
        #[arg(long, default_value_t = 1000)]
        perturbed: usize,
        #[arg(long, default_value_t = 64)]
        hidden: usize,
        #[arg(long, default_value_t = 8)]
        setting_count: usize,
        /// Per-setting correlators as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Per-model scan results as CSV.
        #[arg(long)]
        scan_csv: Option<PathBuf>,
    },
    /// Entropy and capacity measures.
    Info {
        #[arg(long = "V")]
        v: Option<f64>,
        #[arg(long = "I")]
        i: Option<f64>,
        #[arg(long = "S")]
        s: Option<f64>,
        /// Base marginal for the signalling mutual information (needs --S).
        #[arg(long)]
        p: Option<f64>,
    },
    /// Thresholds on I and S implied by a CHSH violation V.
    Thresholds {
        #[arg(long = "V")]
        v: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BoxKind {
    Pr,
    Nosignal,
    Signalling,
    Deterministic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    Operational,
    Swapped,
}

impl From<LayoutArg> for ConstraintLayout {
    fn from(l: LayoutArg) -> Self {
        match l {
            LayoutArg::Operational => ConstraintLayout::Operational,
            LayoutArg::Swapped => ConstraintLayout::Swapped,
        }
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(&cli, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs a parsed command, writing JSON to `out` and the summary to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let pool = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let result = match pool {
        Ok(pool) => pool.install(|| dispatch(&cli.command)),
        Err(e) => Err(Error::InvalidArgument(format!("thread pool: {e}"))),
    };
    match result {
        Ok(outcome) => {
            let _ = writeln!(out, "{}", to_json_text(&outcome.json));
            let _ = write!(err, "{}", outcome.summary);
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// What a subcommand produced: the JSON document, the stderr summary and
/// the exit code.
#[derive(Debug)]
pub struct CommandOutput {
    pub json: Value,
    pub summary: String,
    pub code: i32,
}

fn ok(json: Value, summary: String) -> Result<CommandOutput> {
    Ok(CommandOutput { json, summary, code: 0 })
}

fn dispatch(command: &Command) -> Result<CommandOutput> {
    match command {
        Command::Analyze { path } => cmd_analyze(path),
        Command::Box {
            kind,
            i,
            flip,
            outcomes,
            output,
        } => cmd_box(*kind, *i, *flip, outcomes.as_deref(), output.as_deref()),
        Command::Oracle {
            i,
            s,
            step,
            endpoints,
            layout,
            csv,
        } => cmd_oracle(
            &parse_list(i, "I")?,
            &parse_list(s, "S")?,
            &OracleOptions {
                step: *step,
                endpoints: *endpoints,
                layout: (*layout).into(),
            },
            csv.as_deref(),
        ),
        Command::Singlet {
            w,
            samples,
            seed,
            settings,
            scan,
            w_grid,
            perturbed,
            hidden,
            setting_count,
            csv,
            scan_csv,
        } => {
            let settings = match settings {
                Some(text) => parse_settings(text)?,
                None => ChshSettings::default(),
            };
            let scan_cfg = scan.then(|| -> Result<ScanConfig> {
                let mut cfg = ScanConfig {
                    perturbed: *perturbed,
                    hidden: *hidden,
                    setting_count: *setting_count,
                    seed: *seed,
                    ..ScanConfig::default()
                };
                cfg.max_proposals = cfg.max_proposals.max(20 * cfg.perturbed);
                if let Some(list) = w_grid {
                    cfg.w_grid = parse_list(list, "w")?;
                }
                Ok(cfg)
            });
            let scan_cfg = scan_cfg.transpose()?;
            cmd_singlet(
                *w,
                *samples,
                *seed,
                &settings,
                scan_cfg.as_ref(),
                csv.as_deref(),
                scan_csv.as_deref(),
            )
        }
        Command::Info { v, i, s, p } => cmd_info(*v, *i, *s, *p),
        Command::Thresholds { v } => cmd_thresholds(*v),
    }
}

pub fn cmd_analyze(path: &Path) -> Result<CommandOutput> {
    let model = LambdaModel::from_path(path)?;
    let measures = measure_all(&model);
    let chsh_value = chsh(&behavior_of(&model));
    let b = bound_b(measures.i, measures.s)?;
    let info = json!({
        "H_of_I": binary_entropy(measures.i)?,
        "C_of_S": channel_capacity(measures.s.clamp(0.0, 1.0))?,
    });
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "{}: {} lambda entries, I = {:.6}, S = {:.6}, M = {:.6}, CHSH = {:.6}, B(I,S) = {:.6}",
        path.display(),
        model.lambdas().len(),
        measures.i,
        measures.s,
        measures.m,
        chsh_value.value,
        b
    );
    let (verdict, code) = if measures.freedom_of_choice {
        let verdict = check_model_consistency(&model)?;
        let _ = writeln!(
            summary,
            "relaxed bound: {} (V = {:.6}, B = {:.6}{})",
            if verdict.pass { "pass" } else { "FAIL" },
            verdict.v,
            verdict.b,
            if verdict.equality { ", saturated" } else { "" }
        );
        let code = if verdict.pass { 0 } else { 3 };
        (serde_json::to_value(verdict)?, code)
    } else {
        let _ = writeln!(
            summary,
            "warning: M = {} > 0, weights depend on the settings; B(I,S) verdict skipped",
            measures.m
        );
        (Value::Null, 0)
    };
    let json = json!({
        "model": path.display().to_string(),
        "lambdas": model.lambdas().len(),
        "measures": measures,
        "chsh": chsh_value,
        "B": b,
        "verdict": verdict,
        "verdict_skipped": !measures.freedom_of_choice,
        "info": info,
    });
    Ok(CommandOutput { json, summary, code })
}

fn parse_outcomes(text: &str) -> Result<[Outcome; 4]> {
    let parsed: Vec<Outcome> = text
        .split(',')
        .map(|t| match t.trim() {
            "+" | "+1" | "1" => Ok(Outcome::Plus),
            "-" | "-1" => Ok(Outcome::Minus),
            other => Err(Error::InvalidArgument(format!("outcome {other:?} is not + or -"))),
        })
        .collect::<Result<_>>()?;
    parsed
        .try_into()
        .map_err(|_| Error::InvalidArgument("--outcomes needs four entries a(X),a(X'),b(Y),b(Y')".into()))
}

pub fn cmd_box(
    kind: BoxKind,
    i: Option<f64>,
    flip: bool,
    outcomes: Option<&str>,
    output: Option<&Path>,
) -> Result<CommandOutput> {
    let need_i = || i.ok_or_else(|| Error::InvalidArgument("--I is required for this box kind".into()));
    let spec = match kind {
        BoxKind::Pr => BoxSpec::Pr,
        BoxKind::Nosignal => BoxSpec::NoSignal { i: need_i()?, flip },
        BoxKind::Signalling => BoxSpec::Signalling { i: need_i()?, flip },
        BoxKind::Deterministic => {
            let [a_x, a_xp, b_y, b_yp] = parse_outcomes(outcomes.unwrap_or("+,+,+,+"))?;
            BoxSpec::Deterministic { a_x, a_xp, b_y, b_yp }
        }
    };
    let model = spec.build()?;
    let measures = measure_all(&model);
    let value = chsh(&behavior_of(&model)).value;
    let summary = format!(
        "{kind:?} box: I = {:.6}, S = {:.6}, CHSH = {:.6}{}\n",
        measures.i,
        measures.s,
        value,
        output.map(|p| format!(", written to {}", p.display())).unwrap_or_default()
    );
    match output {
        Some(path) => {
            model.write_to(path)?;
            ok(
                json!({ "written": path.display().to_string(), "box": spec, "measures": measures, "chsh": value }),
                summary,
            )
        }
        None => ok(serde_json::to_value(model.to_raw())?, summary),
    }
}

pub fn cmd_oracle(i_list: &[f64], s_list: &[f64], opts: &OracleOptions, csv: Option<&Path>) -> Result<CommandOutput> {
    let reports: Vec<OracleReport> = if i_list.len() == 1 && s_list.len() == 1 {
        vec![brute_force_max_with(i_list[0], s_list[0], opts)?]
    } else {
        verify_tightness(i_list, s_list, opts)?
    };
    if let Some(path) = csv {
        write_csv(
            path,
            &["I", "S", "max_E", "analytic_B", "gap", "min_J"],
            reports.iter().map(|r| {
                [r.i, r.s, r.max_e, r.analytic_b, r.gap, r.min_j]
                    .map(|x| sig12(x).to_string())
                    .to_vec()
            }),
        )?;
    }
    let mut summary = String::new();
    for r in &reports {
        let _ = writeln!(
            summary,
            "I = {:.4}, S = {:.4}: max E = {:.6}, B = {:.6}, gap = {:.2e}",
            r.i, r.s, r.max_e, r.analytic_b, r.gap
        );
    }
    let json = if reports.len() == 1 {
        serde_json::to_value(&reports[0])?
    } else {
        json!({
            "cells": reports.len(),
            "max_gap": reports.iter().map(|r| r.gap).fold(f64::NEG_INFINITY, f64::max),
            "reports": reports,
        })
    };
    ok(json, summary)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_singlet(
    w: f64,
    samples: usize,
    seed: u64,
    settings: &ChshSettings,
    scan: Option<&ScanConfig>,
    csv: Option<&Path>,
    scan_csv: Option<&Path>,
) -> Result<CommandOutput> {
    let spec = MixtureSpec::new(w)?;
    let (i, s) = mixture_measures(&spec)?;
    let analytic = analytic_chsh(settings);
    let estimate = estimate_chsh(&spec, settings, samples, seed)?;
    let mut summary = format!(
        "mixture w = {w}: I = {i:.6}, S = {s:.6}, S + 2I = {:.6}\nCHSH: analytic {:.6}, Monte Carlo {:.6} +/- {:.6} ({samples} samples per pair, seed {seed})\n",
        s + 2.0 * i,
        analytic.value,
        estimate.value,
        estimate.stderr
    );
    if let Some(path) = csv {
        write_csv(
            path,
            &["pair", "E", "stderr", "analytic"],
            crate::model::SettingPair::ALL.into_iter().map(|pair| {
                let e = estimate.correlators[pair.index()];
                let mut row = vec![pair.key().to_string()];
                row.extend([e.e, e.stderr, analytic.correlators[pair.index()]].map(|x| sig12(x).to_string()));
                row
            }),
        )?;
    }
    let scan_report = match scan {
        Some(cfg) => {
            let report = conjecture_scan(cfg)?;
            let _ = writeln!(
                summary,
                "scan: {} mixture + {} perturbed models ({} proposals, {} invalid, {} behavior mismatches), min S + 2I = {:.9}, candidates below 1: {}\n{}",
                report.mixture.len(),
                report.perturbed_admitted,
                report.proposals,
                report.rejected_invalid,
                report.rejected_behavior,
                report.min_s_plus_2i,
                report.counterexample_candidates.len(),
                report.note
            );
            if let Some(path) = scan_csv {
                write_csv(
                    path,
                    &["family", "index", "w", "epsilon", "I", "S", "S_plus_2I", "C_plus_H"],
                    report.mixture.iter().chain(&report.perturbed_entries).map(|e| {
                        let family = match e.family {
                            crate::singlet::Family::Mixture => "mixture",
                            crate::singlet::Family::Perturbed => "perturbed",
                        };
                        let mut row = vec![family.to_string(), e.index.to_string()];
                        row.extend([e.w, e.epsilon, e.i, e.s, e.s_plus_2i, e.c_plus_h].map(|x| sig12(x).to_string()));
                        row
                    }),
                )?;
            }
            serde_json::to_value(&report)?
        }
        None => Value::Null,
    };
    let json = json!({
        "w": w,
        "seed": seed,
        "samples": samples,
        "settings": settings,
        "measures": {
            "I": i,
            "S": s,
            "S_plus_2I": s + 2.0 * i,
            "H_of_I": binary_entropy(i)?,
            "C_of_S": channel_capacity(s)?,
        },
        "analytic_chsh": analytic,
        "estimate": estimate,
        "scan": scan_report,
    });
    ok(json, summary)
}

pub fn cmd_info(v: Option<f64>, i: Option<f64>, s: Option<f64>, p: Option<f64>) -> Result<CommandOutput> {
    let mut obj = serde_json::Map::new();
    let mut summary = String::new();
    if let Some(i) = i {
        crate::error::check_range("I", i, 0.0, 0.5, "[0, 1/2]")?;
        let h = binary_entropy(i)?;
        obj.insert("H_of_I".into(), json!(h));
        let _ = writeln!(summary, "H({i}) = {h:.6} bits");
    }
    if let Some(s) = s {
        let c = channel_capacity(s)?;
        obj.insert("C_of_S".into(), json!(c));
        let _ = writeln!(summary, "C({s}) = {c:.6} bits");
        if let Some(p) = p {
            let mi = mutual_info_shift(p, s)?;
            obj.insert("mutual_info_shift".into(), json!(mi));
            let _ = writeln!(summary, "mutual information at p = {p}: {mi:.6} bits");
        }
    }
    if let Some(v) = v {
        let r = info_thresholds(v, None)?;
        obj.insert("V".into(), json!(v));
        obj.insert("H_V".into(), json!(r.h_v));
        obj.insert("C_V".into(), json!(r.c_v));
        let _ = writeln!(summary, "V = {v}: H_V = {:.6}, C_V = {:.6} bits", r.h_v, r.c_v);
    }
    if obj.is_empty() {
        return Err(Error::InvalidArgument("info needs at least one of --V, --I, --S".into()));
    }
    ok(Value::Object(obj), summary)
}

pub fn cmd_thresholds(v: f64) -> Result<CommandOutput> {
    let t = thresholds_for_violation(v)?;
    let info = info_thresholds(v, None)?;
    let summary = format!(
        "V = {v}: I >= {:.6} (certainty <= {:.1}%) and/or S >= {:.6}; H_V = {:.6}, C_V = {:.6} bits\n",
        t.i_v,
        100.0 * (1.0 - t.i_v),
        t.s_v,
        info.h_v,
        info.c_v
    );
    ok(
        json!({
            "V": v,
            "I_V": t.i_v,
            "S_V": t.s_v,
            "certainty_max": 1.0 - t.i_v,
            "H_V": info.h_v,
            "C_V": info.c_v,
        }),
        summary,
    )
}

fn parse_list(text: &str, name: &str) -> Result<Vec<f64>> {
    let values: Vec<f64> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("--{name}: {t:?} is not a number")))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() {
        return Err(Error::InvalidArgument(format!("--{name} is empty")));
    }
    Ok(values)
}

#[derive(serde::Deserialize)]
struct SettingsFile {
    x: [f64; 3],
    xp: [f64; 3],
    y: [f64; 3],
    yp: [f64; 3],
}

fn parse_settings(text: &str) -> Result<ChshSettings> {
    if let Ok(angles) = parse_list(text, "settings") {
        if let [x, xp, y, yp] = angles[..] {
            return Ok(ChshSettings::planar(x, xp, y, yp));
        }
        return Err(Error::InvalidArgument("--settings needs four angles x,x',y,y'".into()));
    }
    let raw: SettingsFile = serde_json::from_str(&std::fs::read_to_string(text)?)?;
    Ok(ChshSettings {
        x: Direction::new(raw.x)?,
        xp: Direction::new(raw.xp)?,
        y: Direction::new(raw.y)?,
        yp: Direction::new(raw.yp)?,
    })
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(std::io::Error::from)?;
    w.write_record(header).map_err(std::io::Error::from)?;
    for row in rows {
        w.write_record(&row).map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(sig12).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Pretty JSON with floats rounded to 12 significant digits.
pub fn to_json_text<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).unwrap_or(Value::Null);
    round_floats(&mut v);
    serde_json::to_string_pretty(&v).unwrap_or_default()
}
