//! `qi-bounds` command-line front end.
//!
//! Subcommands:
//!
//! - `bounds`: one JSON object with every bound at a single `(N_S, N_B, κ, M)`.
//! - `sweep`: CSV of log10 bounds over a list or log-spaced range of `M`.
//! - `fig1`: the sweep at `κ = 0.01, N_S = 0.01, N_B = 20`, `M` from 10³ to 10⁷.
//! - `oracle-check`: Gaussian-vs-Fock agreement report for a dim-background scenario.
//!
//! Exit codes: 0 success, 2 usage error, 3 failed check, 1 numerical failure.

use std::ffi::OsString;
use std::f64::consts::LN_10;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{chernoff_bound, chernoff_profile, cs_closed_form, ln_q_s, BoundSet};
use crate::error::{Error, Result};
use crate::fock_oracle::{self, helstrom_error, q_s_oracle, CHANNEL_THRESHOLD, DEFAULT_TAIL, MAX_ORACLE_NB};
use crate::states::{scenario_states, ScenarioParams, Transmitter};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Oracle agreement tolerance on `|Q_s^gauss − Q_s^fock|`.
pub const ORACLE_Q_TOLERANCE: f64 = 1e-3;
/// Overlap exponents compared in `oracle-check`.
pub const ORACLE_S_VALUES: [f64; 3] = [0.3, 0.5, 0.7];
/// Largest background accepted by `oracle-check`.
pub const ORACLE_CHECK_MAX_NB: f64 = 1.0;

pub const FIG1_N_S: f64 = 0.01;
pub const FIG1_N_B: f64 = 20.0;
pub const FIG1_KAPPA: f64 = 0.01;
pub const FIG1_M_START: f64 = 1e3;
pub const FIG1_M_STOP: f64 = 1e7;
pub const FIG1_POINTS: usize = 50;

#[derive(Debug, Parser)]
#[command(name = "qi-bounds", version, about = "Target-detection error bounds for Gaussian transmitters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bounds at a single operating point, as JSON.
    Bounds(BoundsArgs),
    /// log10 bounds over a range of mode counts, as CSV.
    Sweep(SweepArgs),
    /// The κ = 0.01, N_S = 0.01, N_B = 20 sweep from M = 10³ to 10⁷.
    Fig1(Fig1Args),
    /// Cross-check the Gaussian formulas against the truncated Fock simulation.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Mean signal photons per mode.
    #[arg(long = "ns", default_value_t = FIG1_N_S)]
    pub n_s: f64,
    /// Mean background photons per mode.
    #[arg(long = "nb", default_value_t = FIG1_N_B)]
    pub n_b: f64,
    /// Target reflectivity.
    #[arg(long, default_value_t = FIG1_KAPPA)]
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransmitterArg {
    Qi,
    Cs,
}

impl From<TransmitterArg> for Transmitter {
    fn from(t: TransmitterArg) -> Self {
        match t {
            TransmitterArg::Qi => Transmitter::QuantumIllumination,
            TransmitterArg::Cs => Transmitter::CoherentState,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Number of transmitted mode pairs.
    #[arg(short = 'M', long = "modes", default_value_t = 1)]
    pub m: u64,
    #[arg(long, value_enum, default_value = "qi")]
    pub transmitter: TransmitterArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Curves to include.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "qi,cs,classical-lower")]
    pub transmitter: Vec<SweepColumn>,
    #[arg(long, default_value_t = FIG1_M_START)]
    pub m_start: f64,
    #[arg(long, default_value_t = FIG1_M_STOP)]
    pub m_stop: f64,
    #[arg(long, default_value_t = FIG1_POINTS)]
    pub points: usize,
    /// Explicit mode counts; overrides the log-spaced range.
    #[arg(long, value_delimiter = ',')]
    pub m_values: Option<Vec<u64>>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Fig1Args {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long = "ns", default_value_t = 0.1)]
    pub n_s: f64,
    #[arg(long = "nb", default_value_t = 0.5)]
    pub n_b: f64,
    #[arg(long, default_value_t = 0.3)]
    pub kappa: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// JSON document produced by `bounds`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub n_s: f64,
    pub n_b: f64,
    pub kappa: f64,
    pub m: u64,
    pub transmitter: String,
    pub ln_upper_chernoff: f64,
    pub ln_upper_bhattacharyya: f64,
    pub ln_lower: f64,
    pub s_star: f64,
    pub exponent_per_mode: f64,
    pub log10_upper: f64,
    pub log10_lower: f64,
}

fn transmitter_bounds(params: &ScenarioParams, transmitter: Transmitter) -> Result<BoundSet> {
    match transmitter {
        Transmitter::CoherentState => Ok(cs_closed_form(params).bounds),
        Transmitter::QuantumIllumination => {
            chernoff_bound(&scenario_states(params, transmitter)?, params.m())
        }
    }
}

pub fn bounds_report(params: &ScenarioParams, transmitter: Transmitter) -> Result<BoundsReport> {
    let b = transmitter_bounds(params, transmitter)?;
    Ok(BoundsReport {
        n_s: params.n_s(),
        n_b: params.n_b(),
        kappa: params.kappa(),
        m: params.m(),
        transmitter: transmitter.label().to_string(),
        ln_upper_chernoff: b.ln_upper_chernoff,
        ln_upper_bhattacharyya: b.ln_upper_bhattacharyya,
        ln_lower: b.ln_lower,
        s_star: b.s_star,
        exponent_per_mode: b.exponent_per_mode,
        log10_upper: b.ln_upper_chernoff / LN_10,
        log10_lower: b.ln_lower / LN_10,
    })
}

/// One curve of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum, Serialize)]
pub enum SweepColumn {
    /// Bhattacharyya upper bound of the entangled transmitter.
    #[value(name = "qi")]
    QiUpper,
    /// Chernoff upper bound of the coherent-state transmitter.
    #[value(name = "cs")]
    CsUpper,
    /// Lower bound shared by the coherent-state and every classical transmitter.
    #[value(name = "classical-lower", alias = "classical_lower")]
    ClassicalLower,
}

impl SweepColumn {
    pub fn header(&self) -> &'static str {
        match self {
            SweepColumn::QiUpper => "log10_qi_upper",
            SweepColumn::CsUpper => "log10_cs_upper",
            SweepColumn::ClassicalLower => "log10_cs_lower",
        }
    }
}

/// Scenario plus the mode counts and curves to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    params: ScenarioParams,
    m_values: Vec<u64>,
    columns: Vec<SweepColumn>,
}

impl SweepSpec {
    /// `params.m()` is ignored. `m_values` must be strictly increasing and
    /// positive; columns are emitted in the fixed order qi, cs, classical-lower.
    pub fn new(params: ScenarioParams, m_values: Vec<u64>, columns: &[SweepColumn]) -> Result<Self> {
        if m_values.is_empty() {
            return Err(Error::InvalidParameter("at least one M value is required".into()));
        }
        if m_values[0] == 0 {
            return Err(Error::InvalidParameter("M must be ≥ 1".into()));
        }
        if m_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("M values must be strictly increasing".into()));
        }
        let mut columns = columns.to_vec();
        columns.sort();
        columns.dedup();
        if columns.is_empty() {
            return Err(Error::InvalidParameter("no curves requested".into()));
        }
        Ok(Self {
            params,
            m_values,
            columns,
        })
    }

    pub fn m_values(&self) -> &[u64] {
        &self.m_values
    }

    pub fn columns(&self) -> &[SweepColumn] {
        &self.columns
    }

    pub fn params(&self) -> &ScenarioParams {
        &self.params
    }
}

/// `count` log-spaced integers from `start` to `stop`, rounded to nearest.
pub fn log_spaced(start: f64, stop: f64, count: usize) -> Result<Vec<u64>> {
    if count < 2 {
        return Err(Error::InvalidParameter("a range needs at least 2 points".into()));
    }
    if !(start >= 1.0 && stop > start && stop.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "range must satisfy 1 ≤ start < stop, got {start}..{stop}"
        )));
    }
    let (lo, hi) = (start.log10(), stop.log10());
    let values: Vec<u64> = (0..count)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64).round() as u64)
        .collect();
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "{count} points between {start} and {stop} do not give distinct integer M values"
        )));
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: u64,
    pub values: Vec<f64>,
}

/// Sweep result; rows are ascending in `M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub columns: Vec<SweepColumn>,
    pub rows: Vec<SweepRow>,
}

/// Fixed-width scientific notation with 9 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

impl SweepTable {
    pub fn header(&self) -> String {
        std::iter::once("M")
            .chain(self.columns.iter().map(SweepColumn::header))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{}", row.m);
            for v in &row.values {
                let _ = write!(out, ",{}", format_value(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                obj.insert("M".into(), row.m.into());
                for (c, v) in self.columns.iter().zip(&row.values) {
                    obj.insert(c.header().into(), (*v).into());
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::json!({
            "columns": self.columns.iter().map(SweepColumn::header).collect::<Vec<_>>(),
            "rows": rows,
        })
    }

    pub fn column(&self, column: SweepColumn) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|&c| c == column)?;
        Some(self.rows.iter().map(|r| r.values[idx]).collect())
    }
}

/// Evaluates a sweep. Per-mode overlaps are computed once; each row only
/// rescales them by `M`.
pub fn sweep_table(spec: &SweepSpec) -> Result<SweepTable> {
    let params = spec.params;
    let qi_profile = if spec.columns.contains(&SweepColumn::QiUpper) {
        Some(chernoff_profile(&scenario_states(&params, Transmitter::QuantumIllumination)?)?)
    } else {
        None
    };
    let mut rows = Vec::with_capacity(spec.m_values.len());
    for &m in &spec.m_values {
        let at_m = params.with_modes(m)?;
        let cs = cs_closed_form(&at_m).bounds;
        let values = spec
            .columns
            .iter()
            .map(|c| match c {
                SweepColumn::QiUpper => qi_profile.map_or(f64::NAN, |p| p.bounds(m).ln_upper_bhattacharyya),
                SweepColumn::CsUpper => cs.ln_upper_chernoff,
                SweepColumn::ClassicalLower => cs.ln_lower,
            } / LN_10)
            .collect();
        rows.push(SweepRow { m, values });
    }
    Ok(SweepTable {
        columns: spec.columns.clone(),
        rows,
    })
}

pub fn fig1_spec() -> SweepSpec {
    let params = ScenarioParams::new(FIG1_N_S, FIG1_N_B, FIG1_KAPPA, 1).expect("fixed parameters are valid");
    let m_values = log_spaced(FIG1_M_START, FIG1_M_STOP, FIG1_POINTS).expect("fixed range is valid");
    SweepSpec::new(
        params,
        m_values,
        &[SweepColumn::QiUpper, SweepColumn::CsUpper, SweepColumn::ClassicalLower],
    )
    .expect("fixed sweep is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaussian: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fock: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub n_s: f64,
    pub n_b: f64,
    pub kappa: f64,
    pub cutoffs: Vec<usize>,
    pub truncation_deficit_rho0: f64,
    pub truncation_deficit_rho1: f64,
    pub checks: Vec<OracleCheck>,
    pub pass: bool,
}

/// Runs the Gaussian-vs-Fock agreement checks for a single-copy scenario.
pub fn oracle_check(params: &ScenarioParams) -> Result<OracleReport> {
    let (rho0, rho1) = fock_oracle::qi_oracle_pair(params, DEFAULT_TAIL)?;
    let pair = scenario_states(params, Transmitter::QuantumIllumination)?;
    let mut checks = Vec::new();

    for (name, deficit) in [
        ("truncation_deficit rho0", rho0.truncation_deficit()),
        ("truncation_deficit rho1", rho1.truncation_deficit()),
    ] {
        checks.push(OracleCheck {
            name: name.into(),
            value: deficit,
            tolerance: Some(CHANNEL_THRESHOLD),
            gaussian: None,
            fock: None,
            lower: None,
            upper: None,
            pass: deficit < CHANNEL_THRESHOLD,
        });
    }

    for s in ORACLE_S_VALUES {
        let gaussian = ln_q_s(&pair.rho0, &pair.rho1, s)?.exp();
        let fock = q_s_oracle(&rho0, &rho1, s)?;
        let diff = (gaussian - fock).abs();
        checks.push(OracleCheck {
            name: format!("q_s agreement s={s}"),
            value: diff,
            tolerance: Some(ORACLE_Q_TOLERANCE),
            gaussian: Some(gaussian),
            fock: Some(fock),
            lower: None,
            upper: None,
            pass: diff < ORACLE_Q_TOLERANCE,
        });
    }

    let bounds = chernoff_bound(&pair, 1)?;
    let helstrom = helstrom_error(&rho0, &rho1)?;
    let (lower, upper) = (bounds.ln_lower.exp(), bounds.ln_upper_chernoff.exp());
    checks.push(OracleCheck {
        name: "helstrom within bounds (M=1)".into(),
        value: helstrom,
        tolerance: None,
        gaussian: None,
        fock: None,
        lower: Some(lower),
        upper: Some(upper),
        pass: lower <= helstrom && helstrom <= upper,
    });

    let pass = checks.iter().all(|c| c.pass);
    Ok(OracleReport {
        n_s: params.n_s(),
        n_b: params.n_b(),
        kappa: params.kappa(),
        cutoffs: rho0.cutoffs().to_vec(),
        truncation_deficit_rho0: rho0.truncation_deficit(),
        truncation_deficit_rho1: rho1.truncation_deficit(),
        checks,
        pass,
    })
}

fn emit(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => out.write_all(text.as_bytes()),
    }
}

fn json_text(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) | Error::Infeasible(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn params_from(s: &ScenarioArgs, m: u64) -> Result<ScenarioParams> {
    ScenarioParams::new(s.n_s, s.n_b, s.kappa, m)
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };

    let result: Result<(String, Option<PathBuf>, i32)> = (|| match cli.command {
        Command::Bounds(a) => {
            let params = params_from(&a.scenario, a.m)?;
            let report = bounds_report(&params, a.transmitter.into())?;
            let text = match a.format {
                Format::Json => json_text(&report),
                Format::Csv => {
                    let header = "n_s,n_b,kappa,m,transmitter,ln_upper_chernoff,ln_upper_bhattacharyya,\
                                  ln_lower,s_star,exponent_per_mode,log10_upper,log10_lower";
                    let vals = [
                        report.ln_upper_chernoff,
                        report.ln_upper_bhattacharyya,
                        report.ln_lower,
                        report.s_star,
                        report.exponent_per_mode,
                        report.log10_upper,
                        report.log10_lower,
                    ]
                    .map(format_value)
                    .join(",");
                    format!(
                        "{header}\n{},{},{},{},{},{vals}\n",
                        report.n_s, report.n_b, report.kappa, report.m, report.transmitter
                    )
                }
            };
            Ok((text, a.out, EXIT_OK))
        }
        Command::Sweep(a) => {
            let params = params_from(&a.scenario, 1)?;
            let m_values = match a.m_values {
                Some(v) => v,
                None => log_spaced(a.m_start, a.m_stop, a.points)?,
            };
            let spec = SweepSpec::new(params, m_values, &a.transmitter)?;
            let table = sweep_table(&spec)?;
            let text = match a.format {
                Format::Csv => table.to_csv(),
                Format::Json => json_text(&table.to_json()),
            };
            Ok((text, a.out, EXIT_OK))
        }
        Command::Fig1(a) => {
            let table = sweep_table(&fig1_spec())?;
            let text = match a.format {
                Format::Csv => table.to_csv(),
                Format::Json => json_text(&table.to_json()),
            };
            Ok((text, a.out, EXIT_OK))
        }
        Command::OracleCheck(a) => {
            let params = ScenarioParams::new(a.n_s, a.n_b, a.kappa, 1)?;
            if params.n_b() > ORACLE_CHECK_MAX_NB && params.n_b() <= MAX_ORACLE_NB {
                return Err(Error::InvalidParameter(format!(
                    "oracle checks are restricted to n_b ≤ {ORACLE_CHECK_MAX_NB}, got {}",
                    params.n_b()
                )));
            }
            let report = oracle_check(&params)?;
            let code = if report.pass { EXIT_OK } else { EXIT_CHECK_FAILED };
            Ok((json_text(&report), a.out, code))
        }
    })();

    match result {
        Ok((text, path, code)) => {
            if let Err(e) = emit(&path, &text, out) {
                let _ = writeln!(err, "error: failed to write output: {e}");
                return EXIT_FAILURE;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
