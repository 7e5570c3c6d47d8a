//! Executable checks of the entropic inequalities satisfied by quantum
//! channels, plus the matrix-level lemmas they rest on.
//!
//! Every check returns [`BoundRecord`]s carrying both sides numerically; a
//! record is satisfied when its signed slack is at least `−CHECK_TOL`.

use std::fmt;

use serde::Serialize;

use crate::channels::{Channel, PSD_REL_TOL};
use crate::entropy::{
    hermitian_spectrum_entropy, map_entropy, receiver_entropy, spectrum_entropy, ProbabilityVector,
};
use crate::error::{Error, Result};
use crate::matcore::{
    self, hermitian_eigenvalues, reorder, singular_values, vector_q_norm, ComplexMatrix, Order,
    PermutationMap, SpectrumVector,
};
use crate::zoo::{random_density, random_pure_state, RngStream};

pub const CHECK_TOL: f64 = 1e-8;
pub const SATURATION_TOL: f64 = 1e-9;
/// `Λ_Φ` below `1 − LAMBDA_TOL` contradicts `σ₁ ≥ 1` for CP-TP maps.
pub const LAMBDA_TOL: f64 = 1e-9;
pub const ORACLE_REFINEMENT_STEPS: usize = 200;

/// Identifiers of the channel-level bounds, in report order.
pub const BOUND_IDS: [&str; 24] = [
    "interval_map",
    "interval_rec",
    "map_d1_lower",
    "map_d1_upper",
    "map_lower_from_rec",
    "map_sigma_lower",
    "map_sigma_upper",
    "output_rank_lower",
    "output_upper",
    "output_vn_sandwich",
    "rec_d1_lower",
    "rec_d1_upper",
    "rec_sigma_lower",
    "rec_sigma_upper",
    "receiver_upper",
    "s2_identity",
    "sigma1_at_least_one",
    "sigma1_tau1",
    "sum_upper_q2",
    "tradeoff_half_ln_n",
    "tradeoff_lower",
    "tradeoff_unital",
    "unital_sigma1",
    "unital_tau1",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

/// One evaluated inequality `lhs relation rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRecord {
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    /// `rhs − lhs` for `≤`, `lhs − rhs` for `≥`, `−|lhs − rhs|` for `=`.
    pub slack: f64,
    pub satisfied: bool,
    pub citation: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundRecord {
    pub fn new(id: &str, lhs: f64, relation: Relation, rhs: f64, citation: &str) -> Self {
        let slack = match relation {
            Relation::Le => rhs - lhs,
            Relation::Ge => lhs - rhs,
            Relation::Eq => -(lhs - rhs).abs(),
        };
        let finite = slack.is_finite();
        BoundRecord {
            id: id.to_string(),
            lhs,
            rhs,
            relation,
            slack,
            satisfied: finite && slack >= -CHECK_TOL,
            citation: citation.to_string(),
            note: (!finite).then(|| "non-finite slack".to_string()),
        }
    }

    /// Placeholder for a check that could not be evaluated.
    pub fn failed(id: &str, citation: &str, err: &Error) -> Self {
        BoundRecord {
            id: id.to_string(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            relation: Relation::Le,
            slack: f64::NAN,
            satisfied: false,
            citation: citation.to_string(),
            note: Some(err.to_string()),
        }
    }

    /// Whether `|slack| ≤ SATURATION_TOL`.
    pub fn is_saturated(&self) -> bool {
        self.slack.abs() <= SATURATION_TOL
    }
}

fn require_order_at_least_one(q: Order) -> Result<()> {
    match q {
        Order::Finite(v) if v < 1.0 && !q.is_shannon() => {
            Err(Error::domain(format!("bound requires q ≥ 1, got {v}")))
        }
        _ => Ok(()),
    }
}

/// `F_min = min(q/(q−1), 2)`; 2 at `q = 1`, 1 at `q = ∞`.
pub fn f_min(q: Order) -> Result<f64> {
    require_order_at_least_one(q)?;
    Ok(match q {
        _ if q.is_shannon() => 2.0,
        Order::Infinity => 1.0,
        Order::Finite(v) => (v / (v - 1.0)).min(2.0),
    })
}

/// `F_max = max(q/(q−1), 2)`; `None` at `q = 1` where it diverges.
pub fn f_max(q: Order) -> Result<Option<f64>> {
    require_order_at_least_one(q)?;
    Ok(match q {
        _ if q.is_shannon() => None,
        Order::Infinity => Some(2.0),
        Order::Finite(v) => Some((v / (v - 1.0)).max(2.0)),
    })
}

/// `G_min = min(q/(2(q−1)), 2(q−1)/q)`; 0 at `q = 1`, 1/2 at `q = ∞`.
pub fn g_min(q: Order) -> Result<f64> {
    require_order_at_least_one(q)?;
    Ok(match q {
        _ if q.is_shannon() => 0.0,
        Order::Infinity => 0.5,
        Order::Finite(v) => (v / (2.0 * (v - 1.0))).min(2.0 * (v - 1.0) / v),
    })
}

/// `q/(q−1)`; `None` at `q = 1`.
fn conjugate_exponent(q: Order) -> Result<Option<f64>> {
    require_order_at_least_one(q)?;
    Ok(match q {
        _ if q.is_shannon() => None,
        Order::Infinity => Some(1.0),
        Order::Finite(v) => Some(v / (v - 1.0)),
    })
}

/// `‖x‖_q ≤ ‖x‖₁^{1/q} ‖x‖_∞^{(q−1)/q}` for a non-negative vector.
pub fn check_lemma1(x: &[f64], q: Order) -> Result<BoundRecord> {
    require_order_at_least_one(q)?;
    if x.iter().any(|v| *v < 0.0) {
        return Err(Error::domain(
            "interpolation bound needs a non-negative vector",
        ));
    }
    let lhs = vector_q_norm(x, q)?;
    let one = vector_q_norm(x, Order::ONE)?;
    let inf = vector_q_norm(x, Order::Infinity)?;
    let rhs = match q {
        Order::Infinity => inf,
        Order::Finite(v) => one.powf(1.0 / v) * inf.powf((v - 1.0) / v),
    };
    Ok(BoundRecord::new(
        "norm_interpolation",
        lhs,
        Relation::Le,
        rhs,
        "‖x‖_q ≤ ‖x‖₁^{1/q}‖x‖_∞^{1−1/q}",
    ))
}

/// `ln(Λ_x/x₁) ≤ S_q(X) ≤ (q/(q−1)) ln(Λ_x/x₁)` on the singular values of
/// `X`. At `q = 1` only the lower record is produced.
pub fn check_lemma2(x: &ComplexMatrix, q: Order) -> Result<Vec<BoundRecord>> {
    require_order_at_least_one(q)?;
    let sv = singular_values(x)?;
    if sv.largest() == 0.0 {
        return Err(Error::domain("singular-value bounds need a nonzero matrix"));
    }
    let s = spectrum_entropy(&sv, q)?;
    let log_ratio = (sv.total() / sv.largest()).ln();
    let mut out = vec![BoundRecord::new(
        "singular_entropy_lower",
        s,
        Relation::Ge,
        log_ratio,
        "S_q(X) ≥ ln(Λ_x/x₁)",
    )];
    if let Some(k) = conjugate_exponent(q)? {
        out.push(BoundRecord::new(
            "singular_entropy_upper",
            s,
            Relation::Le,
            k * log_ratio,
            "S_q(X) ≤ q/(q−1)·ln(Λ_x/x₁)",
        ));
    }
    Ok(out)
}

/// With `Y = reorder(X, π)`:
/// `F_min ln(Λ_y/√(x₁Λ_x)) ≤ S_q(Y) ≤ F_max ln(Λ_y/x₁)`.
/// At `q = 1` only the lower record is produced.
pub fn check_lemma3(x: &ComplexMatrix, pi: &PermutationMap, q: Order) -> Result<Vec<BoundRecord>> {
    let fmin = f_min(q)?;
    let fmax = f_max(q)?;
    let y = reorder(x, pi)?;
    let sx = singular_values(x)?;
    let sy = singular_values(&y)?;
    if sx.largest() == 0.0 {
        return Err(Error::domain("permutation bounds need a nonzero matrix"));
    }
    let s = spectrum_entropy(&sy, q)?;
    let mut out = vec![BoundRecord::new(
        "permuted_entropy_lower",
        s,
        Relation::Ge,
        fmin * (sy.total() / (sx.largest() * sx.total()).sqrt()).ln(),
        "S_q(Y) ≥ F_min·ln(Λ_y/√(x₁Λ_x))",
    )];
    if let Some(fmax) = fmax {
        out.push(BoundRecord::new(
            "permuted_entropy_upper",
            s,
            Relation::Le,
            fmax * (sy.total() / sx.largest()).ln(),
            "S_q(Y) ≤ F_max·ln(Λ_y/x₁)",
        ));
    }
    Ok(out)
}

/// Largest singular value of the superoperator.
pub fn sigma1(ch: &Channel) -> Result<f64> {
    ch.sigma1()
}

/// Lower estimate of `σ₁ = max_ρ ‖Φ(ρ)‖₂ / ‖ρ‖₂` over density matrices:
/// `budget` Hilbert–Schmidt-uniform samples followed by hill climbing that
/// mixes the incumbent with random states.
pub fn sigma1_oracle(ch: &Channel, budget: usize, seed: u64) -> Result<f64> {
    if budget == 0 {
        return Err(Error::domain("oracle budget must be at least 1"));
    }
    let n = ch.dim();
    let mut rng = RngStream::new(seed);
    let ratio = |rho: &ComplexMatrix| -> Result<f64> { Ok(ch.act(rho)?.norm() / rho.norm()) };

    let mut best = random_density(n, &mut rng);
    let mut best_val = ratio(&best)?;
    for _ in 1..budget {
        let rho = random_density(n, &mut rng);
        let v = ratio(&rho)?;
        if v > best_val {
            best = rho;
            best_val = v;
        }
    }
    for step in 0..ORACLE_REFINEMENT_STEPS {
        let target = if step % 2 == 0 {
            random_pure_state(n, &mut rng)
        } else {
            random_density(n, &mut rng)
        };
        let t: f64 = rand::Rng::random_range(&mut rng, 0.0..0.5);
        let candidate =
            &best * matcore::C64::new(1.0 - t, 0.0) + target * matcore::C64::new(t, 0.0);
        let v = ratio(&candidate)?;
        if v > best_val {
            best = candidate;
            best_val = v;
        }
    }
    Ok(best_val)
}

/// Channel quantities shared by the channel-level checks.
struct Quantities {
    n: f64,
    s_map: f64,
    s_rec: f64,
    sigma1: f64,
    lambda: f64,
    d1: f64,
}

impl Quantities {
    fn of(ch: &Channel, q: Order) -> Result<Self> {
        Ok(Quantities {
            n: ch.dim() as f64,
            s_map: map_entropy(ch, q)?,
            s_rec: receiver_entropy(ch, q)?,
            sigma1: ch.sigma1()?,
            lambda: ch.lambda_phi()?,
            d1: ch.d1()?,
        })
    }
}

/// The four pairs bounding each entropy by the extreme singular value
/// `σ₁` of the superoperator and the extreme eigenvalue `d₁` of the
/// dynamical matrix. At `q = 1` the upper members are omitted.
pub fn individual_bounds(ch: &Channel, q: Order) -> Result<Vec<BoundRecord>> {
    let k = conjugate_exponent(q)?;
    let fmin = f_min(q)?;
    let fmax = f_max(q)?;
    let v = Quantities::of(ch, q)?;
    let rec_sigma = (v.lambda / v.sigma1).ln();
    let map_d1 = (v.n / v.d1).ln();
    let mut out = vec![
        BoundRecord::new(
            "rec_sigma_lower",
            v.s_rec,
            Relation::Ge,
            rec_sigma,
            "S_q^rec ≥ ln(Λ_Φ/σ₁)",
        ),
        BoundRecord::new(
            "map_d1_lower",
            v.s_map,
            Relation::Ge,
            map_d1,
            "S_q^map ≥ ln(N/d₁)",
        ),
        BoundRecord::new(
            "rec_d1_lower",
            v.s_rec,
            Relation::Ge,
            fmin * (v.lambda / (v.n * v.d1).sqrt()).ln(),
            "S_q^rec ≥ F_min·ln(Λ_Φ/√(N d₁))",
        ),
        BoundRecord::new(
            "map_sigma_lower",
            v.s_map,
            Relation::Ge,
            fmin * (v.n / (v.sigma1 * v.lambda).sqrt()).ln(),
            "S_q^map ≥ F_min·ln(N/√(σ₁Λ_Φ))",
        ),
    ];
    if let (Some(k), Some(fmax)) = (k, fmax) {
        out.extend([
            BoundRecord::new(
                "rec_sigma_upper",
                v.s_rec,
                Relation::Le,
                k * rec_sigma,
                "S_q^rec ≤ q/(q−1)·ln(Λ_Φ/σ₁)",
            ),
            BoundRecord::new(
                "map_d1_upper",
                v.s_map,
                Relation::Le,
                k * map_d1,
                "S_q^map ≤ q/(q−1)·ln(N/d₁)",
            ),
            BoundRecord::new(
                "rec_d1_upper",
                v.s_rec,
                Relation::Le,
                fmax * (v.lambda / v.d1).ln(),
                "S_q^rec ≤ F_max·ln(Λ_Φ/d₁)",
            ),
            BoundRecord::new(
                "map_sigma_upper",
                v.s_map,
                Relation::Le,
                fmax * (v.n / v.sigma1).ln(),
                "S_q^map ≤ F_max·ln(N/σ₁)",
            ),
        ]);
    }
    Ok(out)
}

/// `σ₁ ≤ √(N τ₁)`.
pub fn theorem1_bound(ch: &Channel) -> Result<BoundRecord> {
    let n = ch.dim() as f64;
    Ok(BoundRecord::new(
        "sigma1_tau1",
        ch.sigma1()?,
        Relation::Le,
        (n * ch.tau1()?).sqrt(),
        "σ₁ ≤ √(N τ₁)",
    ))
}

/// `σ₁ ≥ 1`.
pub fn sigma1_lower(ch: &Channel) -> Result<BoundRecord> {
    Ok(BoundRecord::new(
        "sigma1_at_least_one",
        ch.sigma1()?,
        Relation::Ge,
        1.0,
        "σ₁ ≥ 1",
    ))
}

/// `S_q^map + S_q^rec ≥ (F_min/2) ln(N/τ₁)`.
pub fn tradeoff_lower(ch: &Channel, q: Order) -> Result<BoundRecord> {
    let fmin = f_min(q)?;
    let n = ch.dim() as f64;
    let sum = map_entropy(ch, q)? + receiver_entropy(ch, q)?;
    Ok(BoundRecord::new(
        "tradeoff_lower",
        sum,
        Relation::Ge,
        fmin / 2.0 * (n / ch.tau1()?).ln(),
        "S_q^map + S_q^rec ≥ F_min/2·ln(N/τ₁)",
    ))
}

/// `S_q^map + S_q^rec ≥ (F_min/2) ln N`, and for unital channels
/// additionally `≥ F_min ln N`.
pub fn tradeoff_general(ch: &Channel, q: Order) -> Result<Vec<BoundRecord>> {
    let fmin = f_min(q)?;
    let ln_n = (ch.dim() as f64).ln();
    let sum = map_entropy(ch, q)? + receiver_entropy(ch, q)?;
    let mut out = vec![BoundRecord::new(
        "tradeoff_half_ln_n",
        sum,
        Relation::Ge,
        fmin / 2.0 * ln_n,
        "S_q^map + S_q^rec ≥ F_min/2·ln N",
    )];
    if ch.flags().unital {
        out.push(BoundRecord::new(
            "tradeoff_unital",
            sum,
            Relation::Ge,
            fmin * ln_n,
            "unital: S_q^map + S_q^rec ≥ F_min·ln N",
        ));
    }
    Ok(out)
}

/// For unital channels: `σ₁ = 1` and `τ₁ = 1/N`.
pub fn unital_checks(ch: &Channel) -> Result<Vec<BoundRecord>> {
    if !ch.flags().unital {
        return Ok(Vec::new());
    }
    Ok(vec![
        BoundRecord::new(
            "unital_sigma1",
            ch.sigma1()?,
            Relation::Eq,
            1.0,
            "unital: σ₁ = 1",
        ),
        BoundRecord::new(
            "unital_tau1",
            ch.tau1()?,
            Relation::Eq,
            1.0 / ch.dim() as f64,
            "unital: τ₁ = 1/N",
        ),
    ])
}

/// Largest Rényi entropy of a spectrum of `N²` values with trace norm `Λ`
/// and largest value at least 1:
/// `(1/(1−q)) ln(Λ^{−q} + (Λ−1)^q / (Λ^q (N²−1)^{q−1}))`.
pub fn receiver_upper_value(lambda: f64, n: usize, q: Order) -> Result<f64> {
    if lambda < 1.0 - LAMBDA_TOL {
        return Err(Error::Internal(format!(
            "trace norm Λ_Φ = {lambda} < 1 contradicts σ₁ ≥ 1 for a CP-TP map"
        )));
    }
    let lambda = lambda.max(1.0);
    let m = (n * n) as f64 - 1.0;
    if q.is_shannon() {
        let excess = lambda - 1.0;
        let tail = if excess > 0.0 {
            excess / lambda * (m / excess).ln()
        } else {
            0.0
        };
        return Ok(tail + lambda.ln());
    }
    match q {
        Order::Infinity => Ok(lambda.ln()),
        Order::Finite(v) if v < 0.0 => {
            Err(Error::domain(format!("Rényi order must be ≥ 0, got {v}")))
        }
        Order::Finite(v) => {
            // Written as (−q ln Λ + ln(1 + (N²−1) r^q)) / (1−q), r = (Λ−1)/(N²−1).
            let r = (lambda - 1.0) / m;
            Ok((-v * lambda.ln() + (1.0 + m * r.powf(v)).ln()) / (1.0 - v))
        }
    }
}

pub fn receiver_upper(ch: &Channel, q: Order) -> Result<BoundRecord> {
    let bound = receiver_upper_value(ch.lambda_phi()?, ch.dim(), q)?;
    Ok(BoundRecord::new(
        "receiver_upper",
        receiver_entropy(ch, q)?,
        Relation::Le,
        bound,
        "S_q^rec ≤ 1/(1−q)·ln(Λ^{−q} + (Λ−1)^q/(Λ^q(N²−1)^{q−1}))",
    ))
}

/// `S₂^map = S₂^rec + 2 ln N − 2 ln Λ_Φ`.
pub fn s2_identity(ch: &Channel) -> Result<BoundRecord> {
    let n = ch.dim() as f64;
    Ok(BoundRecord::new(
        "s2_identity",
        map_entropy(ch, Order::TWO)?,
        Relation::Eq,
        receiver_entropy(ch, Order::TWO)? + 2.0 * n.ln() - 2.0 * ch.lambda_phi()?.ln(),
        "S₂^map = S₂^rec + 2 ln N − 2 ln Λ_Φ",
    ))
}

/// `S₂^map + S₂^rec ≤ 2 ln(N(N+1)/2)`.
pub fn sum_upper_q2(ch: &Channel) -> Result<BoundRecord> {
    let n = ch.dim() as f64;
    Ok(BoundRecord::new(
        "sum_upper_q2",
        map_entropy(ch, Order::TWO)? + receiver_entropy(ch, Order::TWO)?,
        Relation::Le,
        2.0 * (n * (n + 1.0) / 2.0).ln(),
        "S₂^map + S₂^rec ≤ 2 ln(N(N+1)/2)",
    ))
}

/// `S_q^map ≥ F_min ln(N/Λ_Φ) + G_min S_q^rec`.
pub fn map_lower_from_rec(ch: &Channel, q: Order) -> Result<BoundRecord> {
    let fmin = f_min(q)?;
    let gmin = g_min(q)?;
    let n = ch.dim() as f64;
    Ok(BoundRecord::new(
        "map_lower_from_rec",
        map_entropy(ch, q)?,
        Relation::Ge,
        fmin * (n / ch.lambda_phi()?).ln() + gmin * receiver_entropy(ch, q)?,
        "S_q^map ≥ F_min·ln(N/Λ_Φ) + G_min·S_q^rec",
    ))
}

/// `S^rec ≤ ln N ≤ S^map` for channels built as interval channels.
pub fn interval_check(ch: &Channel) -> Result<Vec<BoundRecord>> {
    if !ch.is_interval() {
        return Err(Error::domain(
            "interval inequalities apply only to interval channels",
        ));
    }
    let ln_n = (ch.dim() as f64).ln();
    Ok(vec![
        BoundRecord::new(
            "interval_rec",
            receiver_entropy(ch, Order::ONE)?,
            Relation::Le,
            ln_n,
            "interval: S^rec ≤ ln N",
        ),
        BoundRecord::new(
            "interval_map",
            map_entropy(ch, Order::ONE)?,
            Relation::Ge,
            ln_n,
            "interval: S^map ≥ ln N",
        ),
    ])
}

/// Estimates of the map entropy through the output `Φ(𝟙/N)`:
/// at `q = 1`, `|S^map − ln N| ≤ S(Φ(𝟙/N))`; for every `q`,
/// `S_q^map ≤ ln N + S_q(Φ(𝟙/N))` and `S_q^map ≥ ln N − ln rank Φ(𝟙/N)`.
pub fn appendix_c_sandwich(ch: &Channel, q: Order) -> Result<Vec<BoundRecord>> {
    let ln_n = (ch.dim() as f64).ln();
    let out = ch.output_of_maximally_mixed()?;
    let s_map = map_entropy(ch, q)?;
    let s_out = hermitian_spectrum_entropy(&out, q)?;
    let eigs = hermitian_eigenvalues(&out)?;
    let cutoff = PSD_REL_TOL * out.norm();
    let rank = eigs.iter().filter(|v| **v > cutoff).count().max(1) as f64;
    let mut records = Vec::with_capacity(3);
    if q.is_shannon() {
        records.push(BoundRecord::new(
            "output_vn_sandwich",
            (s_map - ln_n).abs(),
            Relation::Le,
            s_out,
            "|S^map − ln N| ≤ S(Φ(𝟙/N))",
        ));
    }
    records.push(BoundRecord::new(
        "output_upper",
        s_map,
        Relation::Le,
        ln_n + s_out,
        "S_q^map ≤ ln N + S_q(Φ(𝟙/N))",
    ));
    records.push(BoundRecord::new(
        "output_rank_lower",
        s_map,
        Relation::Ge,
        ln_n - rank.ln(),
        "S_q^map ≥ ln N − ln rank Φ(𝟙/N)",
    ));
    Ok(records)
}

/// Aggregate quantities reported with every bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregates {
    pub sigma1: f64,
    pub tau1: f64,
    pub d1: f64,
    pub lambda_phi: f64,
    #[serde(rename = "F_min")]
    pub f_min: f64,
    /// Absent at `q = 1`, where it diverges.
    #[serde(rename = "F_max")]
    pub f_max: Option<f64>,
    #[serde(rename = "G_min")]
    pub g_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub channel_label: String,
    pub q: Order,
    pub records: Vec<BoundRecord>,
    pub aggregates: Aggregates,
}

impl BoundReport {
    pub fn all_satisfied(&self) -> bool {
        self.records.iter().all(|r| r.satisfied)
    }

    pub fn get(&self, id: &str) -> Option<&BoundRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn violations(&self) -> impl Iterator<Item = &BoundRecord> {
        self.records.iter().filter(|r| !r.satisfied)
    }

    pub const CSV_HEADER: &'static str = "channel_label,q,id,lhs,rhs,slack,satisfied";

    /// One CSV row per record, without header.
    pub fn csv_rows(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                csv_field(&self.channel_label),
                self.q,
                r.id,
                r.lhs,
                r.rhs,
                r.slack,
                r.satisfied
            ));
        }
        s
    }
}

/// Quotes a CSV field when it contains a separator or quote.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn nan_or<T>(r: Result<T>, f: impl FnOnce(T) -> f64) -> f64 {
    r.map(f).unwrap_or(f64::NAN)
}

/// Runs every applicable channel-level check at order `q`. Failures are
/// reported as unsatisfied records carrying the error text; the report is
/// always produced. Records are sorted by id.
pub fn evaluate_all(ch: &Channel, q: Order) -> BoundReport {
    let mut records = Vec::new();
    let mut run = |ids: &[&str], result: Result<Vec<BoundRecord>>| match result {
        Ok(rs) => records.extend(rs),
        Err(e) => records.extend(
            ids.iter()
                .map(|id| BoundRecord::failed(id, "evaluation failed", &e)),
        ),
    };

    let q_ok = require_order_at_least_one(q).is_ok();
    if q_ok {
        let upper_ids: &[&str] = if q.is_shannon() {
            &[
                "rec_sigma_lower",
                "map_d1_lower",
                "rec_d1_lower",
                "map_sigma_lower",
            ]
        } else {
            &[
                "rec_sigma_lower",
                "map_d1_lower",
                "rec_d1_lower",
                "map_sigma_lower",
                "rec_sigma_upper",
                "map_d1_upper",
                "rec_d1_upper",
                "map_sigma_upper",
            ]
        };
        run(upper_ids, individual_bounds(ch, q));
        run(&["tradeoff_lower"], tradeoff_lower(ch, q).map(|r| vec![r]));
        run(&["tradeoff_half_ln_n"], tradeoff_general(ch, q));
        run(
            &["map_lower_from_rec"],
            map_lower_from_rec(ch, q).map(|r| vec![r]),
        );
    }
    run(&["sigma1_tau1"], theorem1_bound(ch).map(|r| vec![r]));
    run(&["sigma1_at_least_one"], sigma1_lower(ch).map(|r| vec![r]));
    run(&["unital_sigma1", "unital_tau1"], unital_checks(ch));
    run(&["receiver_upper"], receiver_upper(ch, q).map(|r| vec![r]));
    run(&["s2_identity"], s2_identity(ch).map(|r| vec![r]));
    run(&["sum_upper_q2"], sum_upper_q2(ch).map(|r| vec![r]));
    run(
        &["output_upper", "output_rank_lower"],
        appendix_c_sandwich(ch, q),
    );
    if ch.is_interval() {
        run(&["interval_rec", "interval_map"], interval_check(ch));
    }
    records.sort_by(|a, b| a.id.cmp(&b.id));

    let aggregates = Aggregates {
        sigma1: nan_or(ch.sigma1(), |v| v),
        tau1: nan_or(ch.tau1(), |v| v),
        d1: nan_or(ch.d1(), |v| v),
        lambda_phi: nan_or(ch.lambda_phi(), |v| v),
        f_min: nan_or(f_min(q), |v| v),
        f_max: f_max(q).ok().flatten(),
        g_min: nan_or(g_min(q), |v| v),
    };
    BoundReport {
        channel_label: ch.label().to_string(),
        q,
        records,
        aggregates,
    }
}

/// Majorisation `κ ≺ λ`: record per partial sum `Σ₁ᵏ κ↓ᵢ ≤ Σ₁ᵏ λ↓ᵢ`, both
/// normalised to unit sum.
pub fn majorization_records(kappa: &[f64], lambda: &[f64]) -> Result<Vec<BoundRecord>> {
    let pk = ProbabilityVector::from_spectrum(&SpectrumVector::new(kappa.to_vec())?)?;
    let pl = ProbabilityVector::from_spectrum(&SpectrumVector::new(lambda.to_vec())?)?;
    let len = pk.weights().len().max(pl.weights().len());
    let at = |w: &[f64], i: usize| w.get(i).copied().unwrap_or(0.0);
    let (mut sk, mut sl) = (0.0, 0.0);
    Ok((0..len)
        .map(|i| {
            sk += at(pk.weights(), i);
            sl += at(pl.weights(), i);
            BoundRecord::new("majorization", sk, Relation::Le, sl, "Σ₁ᵏ κ↓ ≤ Σ₁ᵏ λ↓")
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{identity, reshuffle, C64};
    use crate::zoo;

    const LN2: f64 = std::f64::consts::LN_2;

    fn q(v: f64) -> Order {
        Order::new(v)
    }

    #[test]
    fn coefficient_limits() {
        assert_eq!(f_min(Order::ONE).unwrap(), 2.0);
        assert_eq!(f_min(q(3.0)).unwrap(), 1.5);
        assert_eq!(f_min(Order::Infinity).unwrap(), 1.0);
        assert_eq!(f_max(Order::ONE).unwrap(), None);
        assert_eq!(f_max(q(1.5)).unwrap(), Some(3.0));
        assert_eq!(f_max(Order::Infinity).unwrap(), Some(2.0));
        assert_eq!(g_min(Order::ONE).unwrap(), 0.0);
        assert_eq!(g_min(q(2.0)).unwrap(), 1.0);
        assert_eq!(g_min(Order::Infinity).unwrap(), 0.5);
        assert!(f_min(q(0.5)).is_err());
    }

    #[test]
    fn lemma_examples() {
        // Flat spectrum: the lower bound is tight, the upper one is 2·ln 4.
        let flat = check_lemma2(&identity(4), q(2.0)).unwrap();
        assert!((flat[0].lhs - 4f64.ln()).abs() < 1e-12 && flat[0].is_saturated());
        assert!((flat[1].rhs - 2.0 * 4f64.ln()).abs() < 1e-12 && flat[1].satisfied);
        let corners = reshuffle(&identity(4), 2).unwrap();
        for r in check_lemma2(&corners, q(2.0)).unwrap() {
            assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12);
        }
        assert_eq!(check_lemma2(&identity(2), Order::ONE).unwrap().len(), 1);
        assert!(check_lemma2(&identity(2), q(0.5)).is_err());

        let pi = PermutationMap::reshuffle(2);
        let recs = check_lemma3(&identity(4), &pi, q(2.0)).unwrap();
        assert!(recs[0].lhs.abs() < 1e-12 && recs[0].rhs.abs() < 1e-12);
        assert!(recs.iter().all(|r| r.satisfied));

        let r = check_lemma1(&[0.5, 0.3, 0.2], q(2.0)).unwrap();
        assert!(r.satisfied);
    }

    #[test]
    fn individual_bound_examples() {
        let id = zoo::identity_channel(2).unwrap();
        let recs = individual_bounds(&id, q(2.0)).unwrap();
        let pick = |rs: &[BoundRecord], id: &str| rs.iter().find(|r| r.id == id).unwrap().clone();
        let lo = pick(&recs, "map_d1_lower");
        let hi = pick(&recs, "map_d1_upper");
        assert!(lo.rhs.abs() < 1e-12 && hi.rhs.abs() < 1e-12 && lo.lhs.abs() < 1e-12);

        let star = zoo::completely_depolarizing(2).unwrap();
        let recs = individual_bounds(&star, q(2.0)).unwrap();
        assert!(pick(&recs, "rec_sigma_upper").rhs.abs() < 1e-12);
        assert!(recs.iter().all(|r| r.satisfied));
        assert_eq!(individual_bounds(&star, Order::ONE).unwrap().len(), 4);
    }

    #[test]
    fn sigma_and_tradeoff_examples() {
        let se = zoo::spontaneous_emission(2).unwrap();
        let t1 = theorem1_bound(&se).unwrap();
        assert!((t1.lhs - 2f64.sqrt()).abs() < 1e-12 && t1.is_saturated());
        let t = tradeoff_lower(&se, Order::ONE).unwrap();
        assert!((t.lhs - LN2).abs() < 1e-12 && t.is_saturated());

        for ch in [
            zoo::coarse_graining(2).unwrap(),
            zoo::identity_channel(2).unwrap(),
        ] {
            let t = tradeoff_lower(&ch, Order::ONE).unwrap();
            assert!(
                (t.lhs - 2.0 * LN2).abs() < 1e-12 && t.is_saturated(),
                "{t:?}"
            );
        }
        let bist = zoo::depolarizing(2, 0.4).unwrap();
        assert!(theorem1_bound(&bist).unwrap().is_saturated());
    }

    #[test]
    fn receiver_upper_examples() {
        let id = zoo::identity_channel(3).unwrap();
        let r = receiver_upper(&id, Order::ONE).unwrap();
        assert!((r.rhs - 2.0 * 3f64.ln()).abs() < 1e-12 && r.is_saturated());
        let star = zoo::completely_depolarizing(2).unwrap();
        let r = receiver_upper(&star, Order::ONE).unwrap();
        assert!(r.rhs.abs() < 1e-12 && r.is_saturated());
        assert!(matches!(
            receiver_upper_value(0.5, 2, Order::ONE),
            Err(Error::Internal(_))
        ));
        // Continuity across the Shannon branch.
        let a = receiver_upper_value(2.7, 2, Order::ONE).unwrap();
        let b = receiver_upper_value(2.7, 2, q(1.0 + 1e-5)).unwrap();
        assert!((a - b).abs() < 1e-4);
    }

    #[test]
    fn q2_examples() {
        let third = zoo::depolarizing(2, 1.0 / 3.0).unwrap();
        let s2 = s2_identity(&third).unwrap();
        assert!((s2.lhs - 3f64.ln()).abs() < 1e-12 && s2.is_saturated());
        let sum = sum_upper_q2(&third).unwrap();
        assert!((sum.lhs - 2.0 * 3f64.ln()).abs() < 1e-12 && sum.is_saturated());
        let id = zoo::identity_channel(2).unwrap();
        assert!(s2_identity(&id).unwrap().is_saturated());
        assert!(sum_upper_q2(&id).unwrap().satisfied);
        let m = map_lower_from_rec(&third, q(2.0)).unwrap();
        assert!(m.is_saturated());
        assert!(map_lower_from_rec(&id, q(4.0)).unwrap().satisfied);
    }

    #[test]
    fn interval_and_output_examples() {
        let cg = zoo::interval_cd(1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(interval_check(&cg).unwrap().iter().all(|r| r.satisfied));
        let se = zoo::interval_cd(1.0, 1.0, 0.0, 0.0).unwrap();
        let recs = interval_check(&se).unwrap();
        assert!(recs[0].lhs.abs() < 1e-12 && recs[0].satisfied);
        assert!(recs[1].is_saturated());
        assert!(interval_check(&zoo::identity_channel(2).unwrap()).is_err());

        let mut rng = RngStream::new(3);
        let xi = zoo::random_pure_state(3, &mut rng);
        let contraction = zoo::complete_contraction(&xi).unwrap();
        let recs = appendix_c_sandwich(&contraction, Order::ONE).unwrap();
        assert_eq!(recs.len(), 3);
        let upper = recs.iter().find(|r| r.id == "output_upper").unwrap();
        assert!(upper.is_saturated());
    }

    #[test]
    fn oracle_examples() {
        let id = zoo::identity_channel(2).unwrap();
        assert!((sigma1_oracle(&id, 5, 1).unwrap() - 1.0).abs() < 1e-12);
        let star = zoo::completely_depolarizing(2).unwrap();
        let v = sigma1_oracle(&star, 500, 2).unwrap();
        assert!(v <= 1.0 + 1e-9 && v > 0.95);
        assert!(sigma1_oracle(&id, 0, 1).is_err());
    }

    #[test]
    fn report_is_sorted_and_flags_invalid_maps() {
        let report = evaluate_all(&zoo::identity_channel(2).unwrap(), Order::ONE);
        assert!(
            report.all_satisfied(),
            "{:?}",
            report.violations().collect::<Vec<_>>()
        );
        assert!(report.get("tradeoff_lower").unwrap().is_saturated());
        let ids: Vec<_> = report.records.iter().map(|r| r.id.clone()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        for id in &ids {
            assert!(BOUND_IDS.contains(&id.as_str()), "{id}");
        }

        let bad = Channel::from_superoperator_with(
            identity(4) * C64::new(2.0, 0.0),
            2,
            crate::channels::Validation::Permissive,
        )
        .unwrap();
        let report = evaluate_all(&bad, Order::ONE);
        assert!(!report.all_satisfied());
        assert!(report.csv_rows().lines().count() == report.records.len());
    }
}
