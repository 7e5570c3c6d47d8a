//! Dataset generation: entropy-plane scans over random ensembles, the
//! one-parameter boundary curves, and single-channel analysis reports.
//!
//! Scans evaluate samples in parallel with per-index seeds and collect rows
//! in index order, so output bytes do not depend on the thread count.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{csv_field, evaluate_all, BoundReport, BOUND_IDS};
use crate::channels::{Channel, ChannelFlags};
use crate::entropy::{bloch_ellipsoid, map_entropy, output_entropy, receiver_entropy};
use crate::error::{Error, Result};
use crate::matcore::{identity, Order};
use crate::separability::{classify_region, SeparabilityVerdict};
use crate::zoo::{self, split_seed, RngStream};

pub const SEPARABILITY_IDS: [&str; 3] = [
    "separable_map_lower",
    "separable_rec_upper",
    "separable_map_vs_rec",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMode {
    /// `(S_q^map, S_q^rec)` plane.
    EntropyPlane,
    /// `(S_q^map, S_q(Φ(𝟙/N)))` plane.
    #[serde(rename = "appendixC_plane")]
    AppendixCPlane,
}

impl FromStr for ScanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entropy_plane" => Ok(ScanMode::EntropyPlane),
            "appendixC_plane" | "appendixc_plane" => Ok(ScanMode::AppendixCPlane),
            _ => Err(Error::Parse(format!(
                "unknown scan mode `{s}` (expected entropy_plane or appendixC_plane)"
            ))),
        }
    }
}

/// Random channel ensembles available to scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// Environmental form with a Haar unitary; `None` means `d = N²`.
    RandomCptp { env_dim: Option<usize> },
    /// Dirichlet mixture of `k` Haar unitary channels; `None` means `k = N²`.
    RandomBistochastic { k: Option<usize> },
    /// Pauli channels with Dirichlet weights (N = 2).
    Pauli,
    /// Interval channels between two Hilbert–Schmidt random states (N = 2).
    Interval,
    /// Reshuffling-invariant maps with Dirichlet `η` and Haar `U` (N = 2).
    ReshuffleInvariant,
    /// Depolarizing channels with uniform `α`.
    Depolarizing,
}

impl Ensemble {
    pub fn parse(name: &str, env_dim: Option<usize>, mix: Option<usize>) -> Result<Self> {
        Ok(match name {
            "random_cptp" => Ensemble::RandomCptp { env_dim },
            "random_bistochastic" => Ensemble::RandomBistochastic { k: mix },
            "pauli" => Ensemble::Pauli,
            "interval" => Ensemble::Interval,
            "reshuffle_invariant" => Ensemble::ReshuffleInvariant,
            "depolarizing" => Ensemble::Depolarizing,
            _ => {
                return Err(Error::Parse(format!(
                    "unknown ensemble `{name}` (expected random_cptp, random_bistochastic, \
                     pauli, interval, reshuffle_invariant or depolarizing)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Ensemble::RandomCptp { .. } => "random_cptp",
            Ensemble::RandomBistochastic { .. } => "random_bistochastic",
            Ensemble::Pauli => "pauli",
            Ensemble::Interval => "interval",
            Ensemble::ReshuffleInvariant => "reshuffle_invariant",
            Ensemble::Depolarizing => "depolarizing",
        }
    }

    fn qubit_only(&self) -> bool {
        matches!(
            self,
            Ensemble::Pauli | Ensemble::Interval | Ensemble::ReshuffleInvariant
        )
    }

    /// Draws one channel and a `key=value;…` description of its parameters.
    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Result<(Channel, String)> {
        if self.qubit_only() && n != 2 {
            return Err(Error::domain(format!(
                "ensemble `{}` is defined for N = 2, got N = {n}",
                self.name()
            )));
        }
        match *self {
            Ensemble::RandomCptp { env_dim } => {
                let d = env_dim.unwrap_or(n * n);
                Ok((zoo::random_cptp(n, d, rng)?, format!("env_dim={d}")))
            }
            Ensemble::RandomBistochastic { k } => {
                let k = k.unwrap_or(n * n);
                Ok((zoo::random_bistochastic(n, k, rng)?, format!("k={k}")))
            }
            Ensemble::Pauli => {
                let p = zoo::random_probability(4, rng);
                let params = format!("p0={};p1={};p2={};p3={}", p[0], p[1], p[2], p[3]);
                Ok((zoo::pauli_channel(&p)?, params))
            }
            Ensemble::Interval => {
                let r1 = zoo::random_density(2, rng);
                let r2 = zoo::random_density(2, rng);
                let params = format!(
                    "alpha={};beta={};gamma1={};gamma2={}",
                    r1[(0, 0)].re,
                    r2[(0, 0)].re,
                    r1[(0, 1)],
                    r2[(0, 1)]
                );
                Ok((zoo::interval_channel(&r1, &r2)?, params))
            }
            Ensemble::ReshuffleInvariant => {
                let e = zoo::random_probability(3, rng);
                let u = zoo::haar_unitary(2, rng);
                let params = format!("eta1={};eta2={};eta3={}", e[0], e[1], e[2]);
                Ok((zoo::reshuffle_invariant([e[0], e[1], e[2]], &u)?, params))
            }
            Ensemble::Depolarizing => {
                let alpha: f64 = rand::Rng::random_range(rng, 0.0..=1.0);
                Ok((zoo::depolarizing(n, alpha)?, format!("alpha={alpha}")))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Parse(format!(
                "unknown format `{s}` (expected csv or json)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanConfig {
    pub mode: ScanMode,
    pub n_samples: usize,
    pub dim: usize,
    pub q: Order,
    pub ensemble: Ensemble,
    pub seed: u64,
    pub format: OutputFormat,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::domain("scan needs at least one sample"));
        }
        if !(2..=8).contains(&self.dim) {
            return Err(Error::domain(format!(
                "dim must be in 2..=8, got {}",
                self.dim
            )));
        }
        if let Order::Finite(v) = self.q {
            if v < 1.0 && !self.q.is_shannon() {
                return Err(Error::domain(format!("scan order must be ≥ 1, got {v}")));
            }
        }
        if self.ensemble.qubit_only() && self.dim != 2 {
            return Err(Error::domain(format!(
                "ensemble `{}` is defined for N = 2",
                self.ensemble.name()
            )));
        }
        Ok(())
    }
}

/// One sampled channel of a scan. Slack columns follow [`ScanRow::header`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub label: String,
    pub seed_index: usize,
    pub params: String,
    pub q: Order,
    pub s_map: f64,
    pub s_rec: f64,
    pub s_output: f64,
    pub sigma1: f64,
    pub tau1: f64,
    pub d1: f64,
    pub lambda_phi: f64,
    pub region: String,
    /// Slack per bound id, `None` where the bound does not apply.
    pub slacks: Vec<(String, Option<f64>)>,
}

impl ScanRow {
    pub fn header() -> String {
        let mut cols: Vec<String> = [
            "label",
            "seed_index",
            "params",
            "q",
            "s_map",
            "s_rec",
            "s_output",
            "sigma1",
            "tau1",
            "d1",
            "lambda_phi",
            "region",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        cols.extend(
            BOUND_IDS
                .iter()
                .chain(SEPARABILITY_IDS.iter())
                .map(|s| s.to_string()),
        );
        cols.join(",")
    }

    pub fn csv_line(&self) -> String {
        let mut s = format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&self.label),
            self.seed_index,
            csv_field(&self.params),
            self.q,
            self.s_map,
            self.s_rec,
            self.s_output,
            self.sigma1,
            self.tau1,
            self.d1,
            self.lambda_phi,
            self.region
        );
        for (_, v) in &self.slacks {
            s.push(',');
            if let Some(v) = v {
                let _ = write!(s, "{v}");
            }
        }
        s
    }

    pub fn slack(&self, id: &str) -> Option<f64> {
        self.slacks
            .iter()
            .find(|(k, _)| k == id)
            .and_then(|(_, v)| *v)
    }

    /// Whether every applicable channel bound holds. Separability criteria
    /// are excluded: they may fail for entangled Choi states.
    pub fn bounds_satisfied(&self) -> bool {
        self.slacks
            .iter()
            .filter(|(k, _)| BOUND_IDS.contains(&k.as_str()))
            .all(|(_, v)| !matches!(v, Some(v) if *v < -crate::bounds::CHECK_TOL))
    }
}

/// Evaluates one channel into a scan row.
pub fn scan_row(ch: &Channel, seed_index: usize, params: String, q: Order) -> Result<ScanRow> {
    let report = evaluate_all(ch, q);
    let verdict = classify_region(ch, q)?;
    let mut slacks: Vec<(String, Option<f64>)> = BOUND_IDS
        .iter()
        .map(|id| (id.to_string(), report.get(id).map(|r| r.slack)))
        .collect();
    slacks.extend(SEPARABILITY_IDS.iter().map(|id| {
        (
            id.to_string(),
            verdict
                .criteria
                .iter()
                .find(|r| r.id == *id)
                .map(|r| r.slack),
        )
    }));
    Ok(ScanRow {
        label: ch.label().to_string(),
        seed_index,
        params,
        q,
        s_map: map_entropy(ch, q)?,
        s_rec: receiver_entropy(ch, q)?,
        s_output: output_entropy(ch, q)?,
        sigma1: report.aggregates.sigma1,
        tau1: report.aggregates.tau1,
        d1: report.aggregates.d1,
        lambda_phi: report.aggregates.lambda_phi,
        region: verdict.region.to_string(),
        slacks,
    })
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))
}

/// Runs a scan on `threads` worker threads. Rows are in index order.
pub fn run_scan(cfg: &ScanConfig, threads: usize) -> Result<Vec<ScanRow>> {
    cfg.validate()?;
    pool(threads)?.install(|| {
        (0..cfg.n_samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(split_seed(cfg.seed, i as u64));
                let (ch, params) = cfg.ensemble.sample(cfg.dim, &mut rng)?;
                scan_row(&ch, i, params, cfg.q)
            })
            .collect()
    })
}

pub fn rows_to_csv(rows: &[ScanRow]) -> String {
    let mut s = ScanRow::header();
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

pub fn rows_to_json(rows: &[ScanRow]) -> String {
    let values: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            let mut v = serde_json::to_value(r).expect("scan row serialises");
            let slacks: serde_json::Map<String, serde_json::Value> = r
                .slacks
                .iter()
                .map(|(k, s)| (k.clone(), serde_json::json!(s)))
                .collect();
            v["slacks"] = serde_json::Value::Object(slacks);
            v
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&values).expect("scan rows serialise");
    out.push('\n');
    out
}

/// Renders a scan in the configured format.
pub fn render_scan(cfg: &ScanConfig, rows: &[ScanRow]) -> String {
    match cfg.format {
        OutputFormat::Csv => rows_to_csv(rows),
        OutputFormat::Json => rows_to_json(rows),
    }
}

/// Gnuplot script plotting a CSV scan written to `data_path`.
pub fn gnuplot_script(mode: ScanMode, data_path: &str) -> String {
    let (ycol, ylabel) = match mode {
        ScanMode::EntropyPlane => (6, "S_q^{rec}"),
        ScanMode::AppendixCPlane => (7, "S_q(Φ(1/N))"),
    };
    format!(
        "set datafile separator ','\n\
         set key off\n\
         set xlabel 'S_q^{{map}}'\n\
         set ylabel '{ylabel}'\n\
         plot '{data_path}' every ::1 using 5:{ycol} with points pt 7 ps 0.3\n"
    )
}

/// One-parameter families traced in the entropy plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    /// Depolarizing qubit channels `Φ_α`, `α ∈ [0, 1]`.
    Ab,
    /// Interval channels between `|0⟩⟨0|` and the pure state with `β = t`.
    IntervalCd,
    /// Reshuffling-invariant maps with `η = (t/3, t/3, 1 − 2t/3)`.
    DiagonalRinv,
}

impl FromStr for Curve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ab" => Ok(Curve::Ab),
            "interval_cd" => Ok(Curve::IntervalCd),
            "diagonal_Rinv" | "diagonal_rinv" => Ok(Curve::DiagonalRinv),
            _ => Err(Error::Parse(format!(
                "unknown curve `{s}` (expected ab, interval_cd or diagonal_Rinv)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub param: f64,
    pub s_map: f64,
    pub s_rec: f64,
}

impl Curve {
    pub fn channel(self, t: f64) -> Result<Channel> {
        match self {
            Curve::Ab => zoo::depolarizing(2, t),
            Curve::IntervalCd => zoo::interval_cd(1.0, t, 0.0, 0.0),
            Curve::DiagonalRinv => {
                zoo::reshuffle_invariant([t / 3.0, t / 3.0, 1.0 - 2.0 * t / 3.0], &identity(2))
            }
        }
    }
}

/// `grid` equally spaced parameter values in `[0, 1]`. The `ab` curve at
/// `q = 1` uses its closed form.
pub fn curve_points(curve: Curve, grid: usize, q: Order) -> Result<Vec<CurvePoint>> {
    if grid == 0 {
        return Err(Error::domain("grid must have at least one point"));
    }
    (0..grid)
        .map(|i| {
            let t = if grid == 1 {
                0.0
            } else {
                i as f64 / (grid - 1) as f64
            };
            let (s_map, s_rec) = if curve == Curve::Ab && q.is_shannon() {
                zoo::curve_ab_point(t)?
            } else {
                let ch = curve.channel(t)?;
                (map_entropy(&ch, q)?, receiver_entropy(&ch, q)?)
            };
            Ok(CurvePoint {
                param: t,
                s_map,
                s_rec,
            })
        })
        .collect()
}

pub fn curve_to_csv(points: &[CurvePoint]) -> String {
    let mut s = String::from("param,s_map,s_rec\n");
    for p in points {
        let _ = writeln!(s, "{},{},{}", p.param, p.s_map, p.s_rec);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyValues {
    pub q: Order,
    pub s_map: f64,
    pub s_rec: f64,
    pub s_output: f64,
}

/// Everything computed for a single channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeReport {
    pub label: String,
    pub dim: usize,
    pub flags: ChannelFlags,
    /// `"nats"` or `"bits"`; applies to `entropies` only.
    pub units: &'static str,
    pub entropies: Vec<EntropyValues>,
    pub sigma1: f64,
    pub tau1: f64,
    pub d1: f64,
    pub lambda_phi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bloch_ellipsoid: Option<[f64; 3]>,
    pub bounds: Vec<BoundReport>,
    /// Per order `q ≥ 1`.
    pub separability: Vec<(Order, SeparabilityVerdict)>,
}

impl AnalyzeReport {
    pub fn all_bounds_satisfied(&self) -> bool {
        self.bounds.iter().all(BoundReport::all_satisfied)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

pub fn analyze(ch: &Channel, qs: &[Order], bits: bool) -> Result<AnalyzeReport> {
    let scale = if bits { std::f64::consts::LOG2_E } else { 1.0 };
    let entropies = qs
        .iter()
        .map(|&q| {
            Ok(EntropyValues {
                q,
                s_map: map_entropy(ch, q)? * scale,
                s_rec: receiver_entropy(ch, q)? * scale,
                s_output: output_entropy(ch, q)? * scale,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let bloch = (ch.dim() == 2 && ch.flags().unital)
        .then(|| bloch_ellipsoid(ch))
        .transpose()?;
    let separability = qs
        .iter()
        .filter(|q| q.value() >= 1.0 || q.is_shannon())
        .map(|&q| Ok((q, classify_region(ch, q)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AnalyzeReport {
        label: ch.label().to_string(),
        dim: ch.dim(),
        flags: ch.flags(),
        units: if bits { "bits" } else { "nats" },
        entropies,
        sigma1: ch.sigma1()?,
        tau1: ch.tau1()?,
        d1: ch.d1()?,
        lambda_phi: ch.lambda_phi()?,
        bloch_ellipsoid: bloch,
        bounds: qs.iter().map(|&q| evaluate_all(ch, q)).collect(),
        separability,
    })
}
