//! Entanglement tests on the Choi state `ω_Φ = D_Φ / N`: realignment, PPT,
//! the entropic necessary conditions for separability, and the resulting
//! region of the entropy plane.

use serde::Serialize;

use crate::bounds::{f_min, g_min, BoundRecord, Relation};
use crate::channels::{Channel, PSD_REL_TOL};
use crate::entropy::{map_entropy, receiver_entropy};
use crate::error::Result;
use crate::matcore::{hermitian_eigenvalues, partial_transpose_second, Order};

/// Realignment values above `1 + REALIGNMENT_TOL` certify entanglement.
pub const REALIGNMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// Certified entangled Choi state: some necessary condition fails.
    A,
    /// Nothing certified.
    B,
    /// Certified separable (PPT at N = 2).
    C,
    /// PPT at N ≥ 3, where PPT is only necessary for separability.
    #[serde(rename = "indeterminate")]
    Indeterminate,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Region::A => "A",
            Region::B => "B",
            Region::C => "C",
            Region::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparabilityVerdict {
    /// `Λ_Φ / N`.
    pub realignment_value: f64,
    /// No realignment certificate of entanglement.
    pub realignment_pass: bool,
    pub ppt_min_eigenvalue: f64,
    pub ppt_pass: bool,
    pub region: Region,
    pub criteria: Vec<BoundRecord>,
}

/// `(Λ_Φ / N, certificate)`; the certificate is set when the value exceeds
/// one, which is impossible for a separable Choi state.
pub fn realignment_test(ch: &Channel) -> Result<(f64, bool)> {
    let value = ch.lambda_phi()? / ch.dim() as f64;
    Ok((value, value > 1.0 + REALIGNMENT_TOL))
}

/// Smallest eigenvalue of the partial transpose of `ω_Φ` on the second
/// factor, and whether it is non-negative within tolerance.
pub fn ppt_test(ch: &Channel) -> Result<(f64, bool)> {
    let omega = ch.choi().state();
    let pt = partial_transpose_second(&omega, ch.dim())?;
    let eigs = hermitian_eigenvalues(&pt)?;
    let min = eigs.last().copied().unwrap_or(0.0);
    Ok((min, min >= -PSD_REL_TOL * omega.norm()))
}

/// Upper bound on `S_q^rec` for separable Choi states:
/// `(1/(1−q)) ln(((N+1)^q + N² − 1) / (N^q (N+1)^q))`, and its `q = 1` limit
/// `((N−1)/N) ln(N+1) + ln N`.
pub fn separable_receiver_bound(n: usize, q: Order) -> f64 {
    let n = n as f64;
    match q {
        _ if q.is_shannon() => (n - 1.0) / n * (n + 1.0).ln() + n.ln(),
        // The spectrum (N+1, 1, …, 1)/(N(N+1)) has largest weight 1/N.
        Order::Infinity => n.ln(),
        Order::Finite(v) => {
            // ln((N+1)^q + N²−1) − q ln(N(N+1)), factored to avoid overflow.
            let log_num = v * (n + 1.0).ln() + (1.0 + (n * n - 1.0) * (n + 1.0).powf(-v)).ln();
            (log_num - v * (n * (n + 1.0)).ln()) / (1.0 - v)
        }
    }
}

/// Necessary conditions for a separable Choi state:
/// `S_q^map ≥ (F_min/4) ln N`, `S_q^rec ≤` [`separable_receiver_bound`],
/// `S_q^map ≥ G_min S_q^rec`. A violated record certifies entanglement.
pub fn separable_criteria(ch: &Channel, q: Order) -> Result<Vec<BoundRecord>> {
    let fmin = f_min(q)?;
    let gmin = g_min(q)?;
    let s_map = map_entropy(ch, q)?;
    let s_rec = receiver_entropy(ch, q)?;
    let n = ch.dim();
    Ok(vec![
        BoundRecord::new(
            "separable_map_lower",
            s_map,
            Relation::Ge,
            fmin / 4.0 * (n as f64).ln(),
            "separable: S_q^map ≥ F_min/4·ln N",
        ),
        BoundRecord::new(
            "separable_rec_upper",
            s_rec,
            Relation::Le,
            separable_receiver_bound(n, q),
            "separable: S_q^rec ≤ 1/(1−q)·ln(((N+1)^q+N²−1)/(N^q(N+1)^q))",
        ),
        BoundRecord::new(
            "separable_map_vs_rec",
            s_map,
            Relation::Ge,
            gmin * s_rec,
            "separable: S_q^map ≥ G_min·S_q^rec",
        ),
    ])
}

/// Region A if any separability criterion fails; C for PPT qubit channels;
/// indeterminate for PPT channels with N ≥ 3; B otherwise.
pub fn classify_region(ch: &Channel, q: Order) -> Result<SeparabilityVerdict> {
    let (realignment_value, certificate) = realignment_test(ch)?;
    let (ppt_min_eigenvalue, ppt_pass) = ppt_test(ch)?;
    let criteria = separable_criteria(ch, q)?;
    let region = if criteria.iter().any(|r| !r.satisfied) {
        Region::A
    } else if ppt_pass && ch.dim() == 2 {
        Region::C
    } else if ppt_pass {
        Region::Indeterminate
    } else {
        Region::B
    };
    Ok(SeparabilityVerdict {
        realignment_value,
        realignment_pass: !certificate,
        ppt_min_eigenvalue,
        ppt_pass,
        region,
        criteria,
    })
}
