use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use wpt_core::metrics::{closed_form_gain, FourCoilParams, FrequencyResponse};
use wpt_core::sweep::{
    compare_mm_over_distances, distance_sweep, frequency_sweep, model_hash, slab_position_sweep,
    to_json_full_precision, topology_compare, FrequencyGrid, Spacing, SweepOptions, SweepResult,
};
use wpt_core::tuner::{match_check, optimize_slab_position, tune_compensation_capacitor, MatchReport, PositionOptimum};

use crate::config::{self, Scenario};
use crate::error::CliError;
use crate::units::{parse_quantity, Hertz, Meters};

#[derive(Debug, Parser)]
#[command(name = "wpt-sim", version, about = "Coupled-resonator wireless power transfer simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Config file, or a preset name (paper-table1, two-coil-demo, clc-demo).
    #[arg(long)]
    pub config: String,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps (no effect on results).
    #[arg(long, env = "WPT_SIM_WORKERS")]
    pub workers: Option<usize>,
    /// Retune the slab to the system resonance before running.
    #[arg(long)]
    pub tune_slab: bool,
    /// Output format for tabular results; defaults to the `--out` extension.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Stamp sweep metadata with the current time (makes output non-reproducible).
    #[arg(long)]
    pub timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Lowest frequency, e.g. 10e6 or "10 MHz".
    #[arg(long, value_parser = parse_frequency_arg)]
    pub fmin: Option<f64>,
    #[arg(long, value_parser = parse_frequency_arg)]
    pub fmax: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub spacing: Option<SpacingArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpacingArg {
    Linear,
    Log,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one frequency and report every metric.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Defaults to the transmitter resonance.
        #[arg(long, value_parser = parse_frequency_arg)]
        frequency: Option<f64>,
    },
    /// Frequency sweep of the configured system.
    SweepFrequency {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Frequency sweeps at several transfer distances.
    SweepDistance {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated, e.g. 100mm,150mm or 0.1,0.15 (metres).
        #[arg(long, value_delimiter = ',', value_parser = parse_length_arg)]
        distances: Option<Vec<f64>>,
    },
    /// Frequency sweeps at several slab positions.
    SweepPosition {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', value_parser = parse_length_arg)]
        positions: Option<Vec<f64>>,
    },
    /// Peak PTE with and without the slab over transfer distance.
    CompareMm {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', value_parser = parse_length_arg)]
        distances: Option<Vec<f64>>,
    },
    /// Two-coil, four-coil and CLC responses tuned to a common frequency.
    CompareTopologies {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Compensation capacitance that puts the unit cell at a target frequency.
    TuneCap {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_frequency_arg)]
        target: Option<f64>,
    },
    /// Slab position maximising peak |S21|.
    OptimizePosition {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        /// Two comma-separated positions, e.g. 5mm,95mm.
        #[arg(long, value_delimiter = ',', value_parser = parse_length_arg)]
        bounds: Option<Vec<f64>>,
    },
    /// Input impedance and reflection at one frequency.
    MatchCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_frequency_arg)]
        frequency: Option<f64>,
    },
}

fn plain_or<F: FnOnce(&str) -> Result<f64, String>>(s: &str, with_unit: F) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(format!("not a finite number: {s}")),
        Err(_) => with_unit(s),
    }
}

/// Hertz, either bare (`13.56e6`) or unit-suffixed (`13.56MHz`).
pub fn parse_frequency_arg(s: &str) -> Result<f64, String> {
    plain_or(s, |s| parse_quantity::<Hertz>(s).map_err(|e| e.to_string()))
}

/// Metres, either bare (`0.1`) or unit-suffixed (`100mm`).
pub fn parse_length_arg(s: &str) -> Result<f64, String> {
    plain_or(s, |s| parse_quantity::<Meters>(s).map_err(|e| e.to_string()))
}

/// Runs the tool and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.machine_line());
            e.exit_code()
        }
    }
}

struct Context {
    scenario: Scenario,
    opts: SweepOptions,
    out: Option<PathBuf>,
    format: Format,
    timestamp: bool,
}

impl Context {
    fn new(common: Common) -> Result<Self, CliError> {
        let (_, mut scenario) = config::load(&common.config)?;
        if common.tune_slab || scenario.tuner.tune_slab == Some(true) {
            scenario.tune_slab()?;
        }
        let opts = match common.workers {
            Some(0) => return Err(CliError::Usage("--workers must be at least 1".into())),
            Some(n) => SweepOptions::with_workers(n),
            None => SweepOptions::default(),
        };
        let by_extension = match common.out.as_deref().and_then(Path::extension) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        };
        Ok(Self {
            scenario,
            opts,
            format: common.format.unwrap_or(by_extension),
            out: common.out,
            timestamp: common.timestamp,
        })
    }

    fn grid(&self, args: &GridArgs) -> Result<FrequencyGrid, CliError> {
        let s = &self.scenario.sweep;
        let f_min = args.fmin.or(s.f_min.map(|q| q.si));
        let f_max = args.fmax.or(s.f_max.map(|q| q.si));
        let points = args.points.or(s.points);
        let spacing = match args.spacing {
            Some(SpacingArg::Linear) => Spacing::Linear,
            Some(SpacingArg::Log) => Spacing::Logarithmic,
            None => s.spacing.unwrap_or_default(),
        };
        match (f_min, f_max, points) {
            (Some(lo), Some(hi), Some(n)) => Ok(FrequencyGrid::new(lo, hi, n, spacing)?),
            _ => Err(CliError::Usage(
                "frequency grid incomplete: pass --fmin, --fmax and --points or set them under `sweep` in the config"
                    .into(),
            )),
        }
    }

    fn stamp(&self, result: &mut SweepResult) {
        if self.timestamp {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs());
            result.metadata.timestamp = Some(format!("unix:{secs}"));
        }
    }

    fn render(&self, result: &SweepResult) -> Result<String, CliError> {
        Ok(match self.format {
            Format::Csv => result.to_csv(),
            Format::Json => result.to_json()?,
        })
    }

    fn emit_sweep(&self, mut result: SweepResult) -> Result<(), CliError> {
        self.stamp(&mut result);
        let text = self.render(&result)?;
        write_output(self.out.as_deref(), &text)
    }

    /// Writes a tabular result next to `--out` with `suffix` appended to its stem.
    fn emit_companion(&self, suffix: &str, mut result: SweepResult) -> Result<(), CliError> {
        if let Some(out) = &self.out {
            self.stamp(&mut result);
            let text = self.render(&result)?;
            write_output(Some(&companion(out, suffix)), &text)?;
        }
        Ok(())
    }
}

fn companion(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    let name = match out.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    out.with_file_name(name)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    write_output(out, &to_json_full_precision(value)?)
}

fn e16(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_e16(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), e16)
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    name: Option<&'a str>,
    model_hash: String,
    frequency_hz: f64,
    response: FrequencyResponse,
    /// Printed closed-form four-coil gain, a diagnostic only.
    closed_form_gain: Option<Complex64>,
}

#[derive(Serialize)]
struct CapReport {
    target_hz: f64,
    inductance_h: f64,
    c_stray_f: f64,
    c_compensation_f: f64,
    c_compensation_pf: f64,
    c_total_pf: f64,
    achieved_frequency_hz: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct PositionReport {
    gap_m: f64,
    midpoint_m: f64,
    bounds_m: (f64, f64),
    optimum: PositionOptimum,
}

#[derive(Serialize)]
struct MatchOutput {
    report: MatchReport,
    s21_mag: f64,
    pte_percent: f64,
}

fn lengths(arg: Option<Vec<f64>>, config: &Option<Vec<crate::units::Quantity<Meters>>>, flag: &str) -> Result<Vec<f64>, CliError> {
    match (arg, config) {
        (Some(v), _) => Ok(v),
        (None, Some(v)) => Ok(v.iter().map(|q| q.si).collect()),
        (None, None) => Err(CliError::Usage(format!("pass --{flag} or set sweep.{flag} in the config"))),
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate { common, frequency } => {
            let ctx = Context::new(common)?;
            let model = ctx.scenario.model()?;
            let f = frequency.unwrap_or_else(|| ctx.scenario.system_f0());
            let response = FrequencyResponse::evaluate(&model, f)?;
            let closed_form_gain = FourCoilParams::from_model(&model)
                .ok()
                .and_then(|p| closed_form_gain(&p, 2.0 * std::f64::consts::PI * f).ok());
            let report = SimulateReport {
                name: ctx.scenario.name.as_deref(),
                model_hash: model_hash(&[&model]),
                frequency_hz: f,
                response,
                closed_form_gain,
            };
            emit_json(ctx.out.as_deref(), &report)
        }
        Command::SweepFrequency { common, grid } => {
            let ctx = Context::new(common)?;
            let grid = ctx.grid(&grid)?;
            let result = frequency_sweep(&ctx.scenario.model()?, &grid, &ctx.opts)?;
            ctx.emit_sweep(result)
        }
        Command::SweepDistance { common, grid, distances } => {
            let ctx = Context::new(common)?;
            let grid = ctx.grid(&grid)?;
            let distances = lengths(distances, &ctx.scenario.sweep.distances, "distances")?;
            let result = distance_sweep(&ctx.scenario.template, &distances, &grid, &ctx.opts)?;
            ctx.emit_sweep(result)
        }
        Command::SweepPosition { common, grid, positions } => {
            let ctx = Context::new(common)?;
            let grid = ctx.grid(&grid)?;
            let positions = lengths(positions, &ctx.scenario.sweep.positions, "positions")?;
            let result = slab_position_sweep(&ctx.scenario.template, &positions, &grid, &ctx.opts)?;
            ctx.emit_sweep(result)
        }
        Command::CompareMm { common, grid, distances } => {
            let ctx = Context::new(common)?;
            let grid = ctx.grid(&grid)?;
            let distances = distances.unwrap_or_else(|| vec![ctx.scenario.template.gap()]);
            let cmp = compare_mm_over_distances(&ctx.scenario.template, &distances, &grid, &ctx.opts)?;
            let mut summary =
                String::from("distance_m,normalized_distance,peak_pte_with_percent,peak_pte_without_percent,pte_ratio\n");
            for r in &cmp.rows {
                let _ = writeln!(
                    summary,
                    "{},{},{},{},{}",
                    e16(r.distance),
                    e16(r.normalized_distance),
                    e16(r.peak_pte_with),
                    e16(r.peak_pte_without),
                    e16(r.pte_ratio)
                );
            }
            ctx.emit_companion("with_mm", cmp.with_mm)?;
            ctx.emit_companion("without_mm", cmp.without_mm)?;
            if let Some(out) = &ctx.out {
                write_output(Some(&companion(out, "summary").with_extension("csv")), &summary)?;
            }
            write_output(None, &summary)
        }
        Command::CompareTopologies { common, grid } => {
            let ctx = Context::new(common)?;
            let grid = ctx.grid(&grid)?;
            let (base, specs) = ctx.scenario.topologies.clone().ok_or_else(|| CliError::Config {
                path: "topologies".into(),
                message: "section required for compare-topologies".into(),
            })?;
            let cmp = topology_compare(&base, &specs, &grid, &ctx.opts)?;
            let mut summary = String::from(
                "index,label,kind,f0_hz,peak_frequency_hz,peak_s21_mag,peak_pte_percent,bandwidth_3db_hz\n",
            );
            for (i, o) in cmp.outcomes.iter().enumerate() {
                let _ = writeln!(
                    summary,
                    "{i},{},{},{},{},{},{},{}",
                    o.label,
                    o.kind.name(),
                    e16(o.f0),
                    e16(o.peak.frequency),
                    e16(o.peak.s21_mag),
                    e16(o.peak.pte()),
                    opt_e16(o.bandwidth)
                );
            }
            if ctx.out.is_some() {
                ctx.emit_sweep(cmp.result)?;
                let out = ctx.out.as_deref().expect("checked");
                write_output(Some(&companion(out, "summary").with_extension("csv")), &summary)?;
            }
            write_output(None, &summary)
        }
        Command::TuneCap { common, target } => {
            let ctx = Context::new(common)?;
            let target = target
                .or(ctx.scenario.tuner.target.map(|q| q.si))
                .ok_or_else(|| CliError::Usage("pass --target or set tuner.target in the config".into()))?;
            let cell = ctx.scenario.template.cell.ok_or_else(|| CliError::Config {
                path: "system.slab".into(),
                message: "tune-cap needs a slab unit cell".into(),
            })?;
            let tuned = tune_compensation_capacitor(&cell, target)?;
            let report = CapReport {
                target_hz: target,
                inductance_h: tuned.cell.inductance,
                c_stray_f: tuned.cell.c_stray,
                c_compensation_f: tuned.cell.c_compensation,
                c_compensation_pf: tuned.cell.c_compensation * 1e12,
                c_total_pf: tuned.cell.total_capacitance() * 1e12,
                achieved_frequency_hz: tuned.result.achieved_objective,
                iterations: tuned.result.iterations,
                converged: tuned.result.converged,
            };
            emit_json(ctx.out.as_deref(), &report)
        }
        Command::OptimizePosition { common, grid, bounds } => {
            let ctx = Context::new(common)?;
            let grid = ctx.grid(&grid)?;
            let gap = ctx.scenario.template.gap();
            let bounds = match (bounds, ctx.scenario.tuner.position_bounds) {
                (Some(b), _) if b.len() == 2 => (b[0], b[1]),
                (Some(_), _) => return Err(CliError::Usage("--bounds takes exactly two positions".into())),
                (None, Some((lo, hi))) => (lo.si, hi.si),
                (None, None) => (0.05 * gap, 0.95 * gap),
            };
            let optimum = optimize_slab_position(&ctx.scenario.template, bounds, &grid, &ctx.opts)?;
            let report = PositionReport {
                gap_m: gap,
                midpoint_m: 0.5 * gap,
                bounds_m: bounds,
                optimum,
            };
            emit_json(ctx.out.as_deref(), &report)
        }
        Command::MatchCheck { common, frequency } => {
            let ctx = Context::new(common)?;
            let model = ctx.scenario.model()?;
            let f = frequency.unwrap_or_else(|| ctx.scenario.system_f0());
            let report = match_check(&model, f)?;
            let response = FrequencyResponse::evaluate(&model, f)?;
            let out = MatchOutput {
                report,
                s21_mag: response.s21.norm(),
                pte_percent: response.pte,
            };
            emit_json(ctx.out.as_deref(), &out)
        }
    }
}
