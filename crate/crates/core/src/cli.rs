// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Parameters are layered: a named preset, then a TOML config file, then
//! explicit flags, each overriding the previous one. Every sweep is computed
//! on the rayon pool and written as CSV in grid order (μ outer, t inner).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::{Args, CommandFactory, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{evolve, freezing_predicate, freezing_predicate_state, BlochDiagonal, ChannelKind};
use crate::linalg::DensityMatrix;
use crate::maps::correlated_transfer_matrix;
use crate::measures::{
    blp_measure_max, concurrence_series, positive_variation, sss_correlated_oun, trace_distance, uniform_grid,
    volume_trace, MeasureError, TimeSeries, MIN_SSS_INTERVALS,
};
use crate::noise::NoiseParams;
use crate::qec::{build_codewords, classify_errors, success_vs_time, ErrorString};
use crate::states::{random_pure, ProbeState};
use crate::Error;

const DEFAULT_MU: &str = "0,0.5,0.9";
const DEFAULT_TMAX: f64 = 50.0;
const DEFAULT_STEPS: usize = 500;
const DEFAULT_SSS_MU: &str = "0,0.3,0.6,0.9";
const DEFAULT_SSS_TMAX: f64 = 40.0;
const DEFAULT_SSS_G: f64 = 0.6;
const DEFAULT_G_INVERSE: &str = "5,10,20";
const DEFAULT_SEED: u64 = 7;
const GLOBAL_IDS: [&str; 3] = ["config", "preset", "out"];

/// Significant digits written for every floating-point CSV field.
pub const CSV_SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Parser)]
#[command(name = "corrchan", version, about = "Correlated non-Markovian two-qubit channels")]
struct Cli {
    /// TOML file of key = value pairs named after the long flags; `command` selects the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named parameter set: conc-{oun,rtn,nmad}-{phi,alpha}, sss-oun, volume-{nmad,rtn,oun}, qec-{oun,rtn}.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output path [default: stdout].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Args)]
struct NoiseArgs {
    /// Noise family: rtn, oun or nmad.
    #[arg(long)]
    noise: Option<String>,
    /// RTN coupling a.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// RTN switching rate γ.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// OUN relaxation rate G.
    #[arg(long = "G", id = "G", allow_negative_numbers = true)]
    big_g: Option<f64>,
    /// OUN or NMAD memory rate g.
    #[arg(long, allow_negative_numbers = true)]
    g: Option<f64>,
    /// NMAD coupling γ₀.
    #[arg(long, allow_negative_numbers = true)]
    gamma0: Option<f64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated correlation factors in [0, 1] [default: 0,0.5,0.9].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    mu: Option<Vec<f64>>,
    /// Final time of the uniform grid [default: 50].
    #[arg(long, allow_negative_numbers = true)]
    tmax: Option<f64>,
    /// Number of grid intervals; the grid has steps + 1 points [default: 500].
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve a probe state. CSV: t, mu, re_RC, im_RC for every density-matrix entry (R, C in 0..4).
    Evolve {
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Probe state: phi+, phi-, psi+, psi-, alpha [default: phi+].
        #[arg(long)]
        probe: Option<String>,
    },
    /// Concurrence of an evolved probe. CSV: t, mu, concurrence; with --measure: mu, nm_concurrence.
    Concurrence {
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Probe state [default: phi+].
        #[arg(long)]
        probe: Option<String>,
        /// Emit the integrated concurrence revivals per μ instead of the trajectory.
        #[arg(long)]
        measure: bool,
    },
    /// Trace distance between two evolved probes. CSV: t, mu, trace_distance.
    Tracedist {
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// First probe [default: phi+].
        #[arg(long)]
        probe: Option<String>,
        /// Second probe [default: psi+].
        #[arg(long)]
        probe2: Option<String>,
    },
    /// Trace-distance revival measure maximized over probe pairs. CSV: mu, blp, pair.
    Blp {
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Extra random pure-state pairs added to the ten probe pairs [default: 0].
        #[arg(long)]
        random_probes: Option<usize>,
        /// Seed for the random pairs [default: 7].
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Self-similarity measure of correlated OUN dephasing. CSV: g_inverse, mu, zeta, r_p, r_tau.
    Sss {
        /// OUN relaxation rate G [default: 0.6].
        #[arg(long = "G", id = "G", allow_negative_numbers = true)]
        big_g: Option<f64>,
        /// Comma-separated memory times 1/g [default: 5,10,20].
        #[arg(long, value_delimiter = ',')]
        g_inverse: Option<Vec<f64>>,
        /// Comma-separated correlation factors [default: 0,0.3,0.6,0.9].
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        mu: Option<Vec<f64>>,
        /// Integration horizon [default: 40].
        #[arg(long)]
        tmax: Option<f64>,
        /// Trapezoid intervals on [0, tmax] [default: 200].
        #[arg(long)]
        sss_intervals: Option<usize>,
    },
    /// Accessible-state volume det F. CSV: t, mu, volume, witness_flag.
    Volume {
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Success probability of the six-qubit concatenated code. CSV: t, mu, p_success.
    Qec {
        #[command(flatten)]
        noise: NoiseArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Divide by the total probability mass of the error model.
        #[arg(long)]
        normalized: bool,
    },
    /// Print the undetectable, detectable and correctable error strings.
    ClassifyErrors,
    /// Decide whether a state is frozen under a correlated channel. Prints frozen, not_frozen or conditionally: ….
    FreezeCheck {
        /// Probe state [default: psi+ unless --c is given].
        #[arg(long)]
        state: Option<String>,
        /// Bell-diagonal correlations c1,c2,c3.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        c: Option<Vec<f64>>,
        /// Channel family: rtn, oun or nmad.
        #[arg(long)]
        channel: Option<String>,
        /// Correlation factor in [0, 1].
        #[arg(long, allow_negative_numbers = true)]
        mu: Option<f64>,
    },
}

/// CLI failure with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Invalid parameters or unusable input/output: exit 2.
    Usage(String),
    /// Numerical failure during the computation: exit 3.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl<E: Into<Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        let e: Error = e.into();
        if e.is_invalid_input() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

struct Preset {
    name: &'static str,
    command: &'static str,
    values: &'static [(&'static str, &'static str)],
}

const PRESETS: &[Preset] = &[
    Preset {
        name: "conc-oun-phi",
        command: "concurrence",
        values: &[("noise", "oun"), ("G", "1"), ("g", "0.05"), ("probe", "phi+"), ("tmax", "50"), ("steps", "500")],
    },
    Preset {
        name: "conc-rtn-phi",
        command: "concurrence",
        values: &[("noise", "rtn"), ("a", "0.8"), ("gamma", "0.05"), ("probe", "phi+"), ("tmax", "100"), ("steps", "500")],
    },
    Preset {
        name: "conc-nmad-phi",
        command: "concurrence",
        values: &[("noise", "nmad"), ("gamma0", "1"), ("g", "0.05"), ("probe", "phi+"), ("tmax", "50"), ("steps", "500")],
    },
    Preset {
        name: "conc-oun-alpha",
        command: "concurrence",
        values: &[("noise", "oun"), ("G", "1"), ("g", "0.05"), ("probe", "alpha"), ("tmax", "50"), ("steps", "500")],
    },
    Preset {
        name: "conc-rtn-alpha",
        command: "concurrence",
        values: &[("noise", "rtn"), ("a", "0.8"), ("gamma", "0.05"), ("probe", "alpha"), ("tmax", "100"), ("steps", "500")],
    },
    Preset {
        name: "conc-nmad-alpha",
        command: "concurrence",
        values: &[("noise", "nmad"), ("gamma0", "1"), ("g", "0.05"), ("probe", "alpha"), ("tmax", "50"), ("steps", "500")],
    },
    Preset {
        name: "sss-oun",
        command: "sss",
        values: &[("G", "0.6"), ("g_inverse", "5,10,20"), ("mu", "0,0.3,0.6,0.9"), ("tmax", "40"), ("sss_intervals", "200")],
    },
    Preset {
        name: "volume-nmad",
        command: "volume",
        values: &[("noise", "nmad"), ("gamma0", "6"), ("g", "0.02"), ("tmax", "50"), ("steps", "1000")],
    },
    Preset {
        name: "volume-rtn",
        command: "volume",
        values: &[("noise", "rtn"), ("a", "0.8"), ("gamma", "0.05"), ("tmax", "100"), ("steps", "1000")],
    },
    Preset {
        name: "volume-oun",
        command: "volume",
        values: &[("noise", "oun"), ("G", "1"), ("g", "0.05"), ("tmax", "50"), ("steps", "1000")],
    },
    Preset {
        name: "qec-oun",
        command: "qec",
        values: &[("noise", "oun"), ("G", "1"), ("g", "0.05"), ("tmax", "50"), ("steps", "200")],
    },
    Preset {
        name: "qec-rtn",
        command: "qec",
        values: &[("noise", "rtn"), ("a", "0.8"), ("gamma", "0.05"), ("tmax", "100"), ("steps", "200")],
    },
];

/// Names of the built-in presets.
pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}

/// Formats x with 12 significant digits, fixed notation for exponents in [-5, 12), trailing zeros removed.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", CSV_SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..CSV_SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (CSV_SIGNIFICANT_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Resolved key/value parameters for one subcommand.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    pub command: String,
    pub values: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.replace('-', "_")
}

impl Settings {
    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|s| s.trim().parse::<T>().map_err(|e| usage(format!("invalid value '{s}' for {key}: {e}"))))
            .transpose()
    }

    fn required<T: FromStr>(&self, key: &str, context: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?.ok_or_else(|| usage(format!("missing --{key} ({context})")))
    }

    fn list(&self, key: &str, default: &str) -> Result<Vec<f64>, CliError> {
        let raw = self.raw(key).unwrap_or(default);
        raw.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| usage(format!("invalid value '{s}' in {key}: {e}"))))
            .collect()
    }

    fn flag(&self, key: &str) -> Result<bool, CliError> {
        Ok(self.parse::<bool>(key)?.unwrap_or(false))
    }

    fn noise(&self) -> Result<NoiseParams, CliError> {
        let kind: ChannelKind = self.parse::<ChannelKind>("noise")?.ok_or_else(|| usage("missing --noise"))?;
        let params = match kind {
            ChannelKind::Rtn => NoiseParams::rtn(self.required("a", "rtn")?, self.required("gamma", "rtn")?),
            ChannelKind::Oun => NoiseParams::oun(self.required("G", "oun")?, self.required("g", "oun")?),
            ChannelKind::Nmad => NoiseParams::nmad(self.required("gamma0", "nmad")?, self.required("g", "nmad")?),
        };
        Ok(params?)
    }

    fn mus(&self, default: &str) -> Result<Vec<f64>, CliError> {
        let mus = self.list("mu", default)?;
        if mus.is_empty() {
            return Err(usage("empty --mu list"));
        }
        for &mu in &mus {
            if !(0.0..=1.0).contains(&mu) {
                return Err(usage(format!("mu = {mu} outside [0, 1]")));
            }
        }
        Ok(mus)
    }

    fn grid(&self) -> Result<Vec<f64>, CliError> {
        let tmax: f64 = self.parse("tmax")?.unwrap_or(DEFAULT_TMAX);
        let steps: usize = self.parse("steps")?.unwrap_or(DEFAULT_STEPS);
        if steps < 2 {
            return Err(usage(format!("steps must be at least 2, got {steps}")));
        }
        if !(tmax > 0.0 && tmax.is_finite()) {
            return Err(usage(format!("tmax must be positive, got {tmax}")));
        }
        Ok(uniform_grid(tmax, steps + 1)?)
    }

    fn probe(&self, key: &str, default: ProbeState) -> Result<ProbeState, CliError> {
        Ok(self.parse::<ProbeState>(key)?.unwrap_or(default))
    }
}

/// Result of one subcommand.
#[derive(Clone, Debug, PartialEq)]
pub enum Output {
    Csv { header: Vec<String>, rows: Vec<Vec<String>> },
    Text(String),
}

impl Output {
    fn csv(header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Output::Csv { header: header.iter().map(|s| s.to_string()).collect(), rows }
    }

    /// Serializes to the given writer.
    pub fn write_to<W: Write>(&self, w: W) -> io::Result<()> {
        match self {
            Output::Csv { header, rows } => {
                let mut writer = csv::Writer::from_writer(w);
                writer.write_record(header)?;
                for row in rows {
                    writer.write_record(row)?;
                }
                writer.flush()
            }
            Output::Text(text) => {
                let mut w = w;
                w.write_all(text.as_bytes())?;
                w.flush()
            }
        }
    }
}

fn num(x: f64) -> String {
    format_number(x)
}

/// Rows for every (μ, t) pair, μ outer, computed in parallel and kept in grid order.
fn sweep_rows<F>(mus: &[f64], grid: &[f64], f: F) -> Result<Vec<Vec<String>>, CliError>
where
    F: Fn(f64, f64) -> Result<Vec<String>, CliError> + Sync,
{
    let tasks: Vec<(f64, f64)> = mus.iter().flat_map(|&mu| grid.iter().map(move |&t| (mu, t))).collect();
    tasks
        .par_iter()
        .map(|&(mu, t)| {
            let mut row = vec![num(t), num(mu)];
            row.extend(f(mu, t)?);
            Ok(row)
        })
        .collect()
}

fn series_rows(mus: &[f64], series: &[TimeSeries], extra: impl Fn(usize, usize) -> Vec<String>) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (m, (mu, s)) in mus.iter().zip(series).enumerate() {
        for (k, (&t, &v)) in s.times().iter().zip(s.values()).enumerate() {
            let mut row = vec![num(t), num(*mu), num(v)];
            row.extend(extra(m, k));
            rows.push(row);
        }
    }
    rows
}

fn run_evolve(s: &Settings) -> Result<Output, CliError> {
    let noise = s.noise()?;
    let mus = s.mus(DEFAULT_MU)?;
    let grid = s.grid()?;
    let rho0 = s.probe("probe", ProbeState::PhiPlus)?.density();
    let rows = sweep_rows(&mus, &grid, |mu, t| {
        let rho = evolve(&noise, mu, t, &rho0)?;
        let mut out = Vec::with_capacity(32);
        for r in 0..4 {
            for c in 0..4 {
                let z = rho.get(r, c);
                out.push(num(z.re));
                out.push(num(z.im));
            }
        }
        Ok(out)
    })?;
    let mut header = vec!["t".to_string(), "mu".to_string()];
    for r in 0..4 {
        for c in 0..4 {
            header.push(format!("re_{r}{c}"));
            header.push(format!("im_{r}{c}"));
        }
    }
    Ok(Output::Csv { header, rows })
}

fn run_concurrence(s: &Settings) -> Result<Output, CliError> {
    let noise = s.noise()?;
    let mus = s.mus(DEFAULT_MU)?;
    let grid = s.grid()?;
    let rho0 = s.probe("probe", ProbeState::PhiPlus)?.density();
    let series: Vec<TimeSeries> = mus
        .par_iter()
        .map(|&mu| concurrence_series(&noise, mu, &rho0, &grid))
        .collect::<Result<_, MeasureError>>()?;
    if s.flag("measure")? {
        if grid.len() < crate::measures::MIN_MEASURE_POINTS {
            return Err(MeasureError::GridTooCoarse { needed: crate::measures::MIN_MEASURE_POINTS, got: grid.len() }.into());
        }
        let rows = mus.iter().zip(&series).map(|(&mu, ser)| vec![num(mu), num(positive_variation(ser).value)]).collect();
        return Ok(Output::csv(&["mu", "nm_concurrence"], rows));
    }
    Ok(Output::csv(&["t", "mu", "concurrence"], series_rows(&mus, &series, |_, _| Vec::new())))
}

fn run_tracedist(s: &Settings) -> Result<Output, CliError> {
    let noise = s.noise()?;
    let mus = s.mus(DEFAULT_MU)?;
    let grid = s.grid()?;
    let a = s.probe("probe", ProbeState::PhiPlus)?.density();
    let b = s.probe("probe2", ProbeState::PsiPlus)?.density();
    let rows = sweep_rows(&mus, &grid, |mu, t| {
        let ch = crate::channel::correlated_channel(&noise, mu, t)?;
        Ok(vec![num(trace_distance(&ch.apply(&a)?, &ch.apply(&b)?)?)])
    })?;
    Ok(Output::csv(&["t", "mu", "trace_distance"], rows))
}

fn run_blp(s: &Settings) -> Result<Output, CliError> {
    let noise = s.noise()?;
    let mus = s.mus(DEFAULT_MU)?;
    let grid = s.grid()?;
    let extra: usize = s.parse("random_probes")?.unwrap_or(0);
    let seed: u64 = s.parse("seed")?.unwrap_or(DEFAULT_SEED);
    let mut labels = Vec::new();
    let mut pairs: Vec<(DensityMatrix, DensityMatrix)> = Vec::new();
    for (i, &p) in ProbeState::ALL.iter().enumerate() {
        for &q in &ProbeState::ALL[i + 1..] {
            labels.push(format!("{p}|{q}"));
            pairs.push((p.density(), q.density()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..extra {
        labels.push(format!("random{k}"));
        pairs.push((random_pure(4, &mut rng), random_pure(4, &mut rng)));
    }
    let results = mus
        .par_iter()
        .map(|&mu| blp_measure_max(&noise, mu, &pairs, &grid))
        .collect::<Result<Vec<_>, MeasureError>>()?;
    let rows = mus
        .iter()
        .zip(results)
        .map(|(&mu, (idx, res))| vec![num(mu), num(res.value), labels[idx].clone()])
        .collect();
    Ok(Output::csv(&["mu", "blp", "pair"], rows))
}

fn run_sss(s: &Settings) -> Result<Output, CliError> {
    let relaxation: f64 = s.parse("G")?.unwrap_or(DEFAULT_SSS_G);
    let g_inverse = s.list("g_inverse", DEFAULT_G_INVERSE)?;
    let mus = s.mus(DEFAULT_SSS_MU)?;
    let tmax: f64 = s.parse("tmax")?.unwrap_or(DEFAULT_SSS_TMAX);
    let intervals: usize = s.parse("sss_intervals")?.unwrap_or(MIN_SSS_INTERVALS);
    if let Some(bad) = g_inverse.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(usage(format!("g-inverse values must be positive, got {bad}")));
    }
    let tasks: Vec<(f64, f64)> = g_inverse.iter().flat_map(|&gi| mus.iter().map(move |&mu| (gi, mu))).collect();
    let rows = tasks
        .par_iter()
        .map(|&(gi, mu)| {
            let res = sss_correlated_oun(relaxation, 1.0 / gi, mu, tmax, intervals)?;
            Ok(vec![num(gi), num(mu), num(res.zeta), num(res.rates[0]), num(res.rates[1])])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Output::csv(&["g_inverse", "mu", "zeta", "r_p", "r_tau"], rows))
}

fn run_volume(s: &Settings) -> Result<Output, CliError> {
    let noise = s.noise()?;
    let mus = s.mus(DEFAULT_MU)?;
    let grid = s.grid()?;
    let traces = mus
        .par_iter()
        .map(|&mu| volume_trace(|t| correlated_transfer_matrix(&noise, mu, t), &grid))
        .collect::<Result<Vec<_>, MeasureError>>()?;
    let series: Vec<TimeSeries> = traces.iter().map(|v| v.series.clone()).collect();
    let rows = series_rows(&mus, &series, |m, k| vec![u8::from(traces[m].flags[k]).to_string()]);
    Ok(Output::csv(&["t", "mu", "volume", "witness_flag"], rows))
}

fn run_qec(s: &Settings) -> Result<Output, CliError> {
    let noise = s.noise()?;
    let mus = s.mus(DEFAULT_MU)?;
    let grid = s.grid()?;
    let normalized = s.flag("normalized")?;
    let series = mus
        .par_iter()
        .map(|&mu| success_vs_time(&noise, mu, &grid, normalized))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Output::csv(&["t", "mu", "p_success"], series_rows(&mus, &series, |_, _| Vec::new())))
}

fn format_set(title: &str, set: &[ErrorString]) -> String {
    let words: Vec<String> = set.iter().map(|e| e.to_string()).collect();
    format!("{title} ({}):\n{}\n", set.len(), words.join(" "))
}

fn run_classify() -> Result<Output, CliError> {
    let classes = classify_errors(&build_codewords());
    let mut text = format_set("undetectable", &classes.undetectable);
    text.push_str(&format_set("detectable", &classes.detectable));
    text.push_str(&format_set("correctable", &classes.correctable));
    Ok(Output::Text(text))
}

fn run_freeze(s: &Settings) -> Result<Output, CliError> {
    let kind: ChannelKind = s.parse::<ChannelKind>("channel")?.ok_or_else(|| usage("missing --channel"))?;
    let mu: f64 = s.required("mu", "freeze-check")?;
    let verdict = match (s.raw("c"), s.raw("state")) {
        (Some(_), Some(_)) => return Err(usage("--state and --c are mutually exclusive")),
        (Some(_), None) => {
            let c = s.list("c", "")?;
            let [c1, c2, c3] = c[..] else {
                return Err(usage(format!("--c needs three values, got {}", c.len())));
            };
            freezing_predicate(&BlochDiagonal::new(c1, c2, c3)?, kind, mu)?
        }
        (None, _) => {
            let rho = s.probe("state", ProbeState::PsiPlus)?.density();
            freezing_predicate_state(&rho, kind, mu)?
        }
    };
    Ok(Output::Text(format!("{verdict}\n")))
}

/// Runs a resolved subcommand.
pub fn run(settings: &Settings) -> Result<Output, CliError> {
    match settings.command.as_str() {
        "evolve" => run_evolve(settings),
        "concurrence" => run_concurrence(settings),
        "tracedist" => run_tracedist(settings),
        "blp" => run_blp(settings),
        "sss" => run_sss(settings),
        "volume" => run_volume(settings),
        "qec" => run_qec(settings),
        "classify-errors" => run_classify(),
        "freeze-check" => run_freeze(settings),
        other => Err(usage(format!("unknown subcommand '{other}'"))),
    }
}

fn known_keys(command: &str) -> Result<Vec<String>, CliError> {
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(command).ok_or_else(|| usage(format!("unknown subcommand '{command}'")))?;
    Ok(sub.get_arguments().map(|a| a.get_id().to_string()).chain(["out".to_string()]).collect())
}

fn toml_to_string(key: &str, value: &toml::Value) -> Result<String, CliError> {
    match value {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        toml::Value::Array(items) => {
            Ok(items.iter().map(|v| toml_to_string(key, v)).collect::<Result<Vec<_>, _>>()?.join(","))
        }
        _ => Err(usage(format!("config key '{key}' must be a scalar or an array"))),
    }
}

fn read_config(path: &PathBuf) -> Result<(Option<String>, BTreeMap<String, String>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text.parse().map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?;
    let mut command = None;
    let mut values = BTreeMap::new();
    for (key, value) in &table {
        if key == "command" {
            command = Some(toml_to_string(key, value)?);
        } else {
            values.insert(normalize_key(key), toml_to_string(key, value)?);
        }
    }
    Ok((command, values))
}

/// Parses command-line arguments into layered settings and the optional output path.
pub fn resolve<I, T>(args: I) -> Result<(Settings, Option<PathBuf>), clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = Cli::command().try_get_matches_from(args)?;
    let layered = (|| {
        let preset_name = matches.get_one::<String>("preset").cloned();
        let config_path = matches.get_one::<PathBuf>("config").cloned();
        let preset = match &preset_name {
            Some(name) => Some(
                PRESETS
                    .iter()
                    .find(|p| p.name == name)
                    .ok_or_else(|| usage(format!("unknown preset '{name}' (known: {})", preset_names().join(", "))))?,
            ),
            None => None,
        };
        let config = config_path.as_ref().map(read_config).transpose()?;
        let sub = matches.subcommand();
        let command = match (sub.map(|(name, _)| name), config.as_ref().and_then(|c| c.0.as_deref()), preset) {
            (Some(name), _, _) => name.to_string(),
            (None, Some(name), _) => name.to_string(),
            (None, None, Some(p)) => p.command.to_string(),
            (None, None, None) => return Err(usage("no subcommand given (see --help)")),
        };
        let known = known_keys(&command)?;
        let mut values = BTreeMap::new();
        if let Some(p) = preset {
            if p.command != command {
                return Err(usage(format!("preset '{}' is for '{}', not '{command}'", p.name, p.command)));
            }
            values.extend(p.values.iter().map(|(k, v)| (k.to_string(), v.to_string())));
        }
        if let Some((_, cfg)) = config {
            for (k, v) in cfg {
                if !known.contains(&k) {
                    return Err(usage(format!("unknown config key '{k}' for '{command}'")));
                }
                values.insert(k, v);
            }
        }
        if let Some((_, sub_matches)) = sub {
            for id in sub_matches.ids() {
                let id = id.as_str();
                if GLOBAL_IDS.contains(&id) || sub_matches.value_source(id) != Some(ValueSource::CommandLine) {
                    continue;
                }
                let raw: Vec<String> = sub_matches
                    .get_raw(id)
                    .map(|vals| vals.map(|v| v.to_string_lossy().into_owned()).collect())
                    .unwrap_or_default();
                let value = if raw.is_empty() { "true".to_string() } else { raw.join(",") };
                values.insert(id.to_string(), value);
            }
        }
        let out = matches.get_one::<PathBuf>("out").cloned().or_else(|| values.remove("out").map(PathBuf::from));
        values.remove("out");
        Ok((Settings { command, values }, out))
    })();
    layered.map_err(|e: CliError| {
        let mut cmd = Cli::command();
        cmd.error(clap::error::ErrorKind::ValueValidation, e.to_string())
    })
}

/// Full CLI pipeline; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (settings, out) = match resolve(args) {
        Ok(v) => v,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let file = match &out {
        Some(path) => match File::create(path) {
            Ok(f) => Some(f),
            Err(e) => {
                eprintln!("{}", usage(format!("cannot write {}: {e}", path.display())));
                return 2;
            }
        },
        None => None,
    };
    let output = match run(&settings) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let written = match file {
        Some(f) => output.write_to(io::BufWriter::new(f)),
        None => output.write_to(io::stdout().lock()),
    };
    match written {
        Ok(()) => 0,
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("{}", usage(format!("cannot write output: {e}")));
            2
        }
    }
}

/// Entry point for the binary.
pub fn main_with_exit() -> ExitCode {
    ExitCode::from(main_with_args(std::env::args_os()))
}
