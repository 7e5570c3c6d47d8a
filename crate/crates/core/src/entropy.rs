//! Rényi entropies of spectra and the channel functionals built from them.
//!
//! All values are in nats.

use serde::Serialize;

use crate::channels::{validate_state, Channel, KrausSet, TP_TOL};
use crate::error::{Error, Result};
use crate::matcore::{
    self, hermitian_eigenvalues, sqrt_psd, vec_row_major, ComplexMatrix, Order, SpectrumVector, C64,
};

/// Non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityVector {
    weights: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::domain("probability vector is empty"));
        }
        if let Some(bad) = weights
            .iter()
            .find(|w| !w.is_finite() || **w < 0.0 || **w > 1.0 + 1e-12)
        {
            return Err(Error::domain(format!(
                "probability weight {bad} outside [0, 1]"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::domain(format!(
                "probability weights sum to {total}, not 1"
            )));
        }
        Ok(ProbabilityVector { weights })
    }

    /// Normalises a spectrum, treating entries below the zero cutoff as zero.
    pub fn from_spectrum(spectrum: &SpectrumVector) -> Result<Self> {
        let weights = spectrum.normalized();
        if weights.is_empty() {
            return Err(Error::domain("cannot normalise a zero spectrum"));
        }
        Ok(ProbabilityVector { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `S_q(p) = ln(Σ pᵢ^q) / (1 − q)`, with the Shannon limit near `q = 1`
/// and `−ln max pᵢ` at `q = ∞`.
pub fn renyi(p: &ProbabilityVector, q: Order) -> Result<f64> {
    let w = p.weights();
    let peak = w.iter().fold(0.0_f64, |a, b| a.max(*b));
    let s = match q {
        Order::Infinity => -peak.ln(),
        _ if q.is_shannon() => -w
            .iter()
            .filter(|x| **x > 0.0)
            .map(|x| x * x.ln())
            .sum::<f64>(),
        Order::Finite(q) if q < 0.0 => {
            return Err(Error::domain(format!("Rényi order must be ≥ 0, got {q}")))
        }
        Order::Finite(0.0) => (w.iter().filter(|x| **x > 0.0).count() as f64).ln(),
        Order::Finite(q) => {
            // ln Σ pᵢ^q = q ln p_max + ln Σ (pᵢ/p_max)^q avoids underflow at large q.
            let rel: f64 = w.iter().map(|x| (x / peak).powf(q)).sum();
            (q * peak.ln() + rel.ln()) / (1.0 - q)
        }
    };
    // Flat spectra can land a few ulps below zero; also folds −0 into 0.
    Ok(if s <= 0.0 && s > -1e-14 { 0.0 } else { s })
}

/// Rényi entropy of a spectrum after normalisation.
pub fn spectrum_entropy(spectrum: &SpectrumVector, q: Order) -> Result<f64> {
    renyi(&ProbabilityVector::from_spectrum(spectrum)?, q)
}

/// `S_q^map(Φ)`: entropy of the spectrum of the Choi state `D_Φ / N`.
pub fn map_entropy(ch: &Channel, q: Order) -> Result<f64> {
    spectrum_entropy(&ch.choi_spectrum()?, q)
}

/// `S_q^rec(Φ)`: entropy of the normalised singular values of the
/// superoperator.
pub fn receiver_entropy(ch: &Channel, q: Order) -> Result<f64> {
    spectrum_entropy(ch.singular_values()?, q)
}

/// Entropy of the outcome distribution `pᵢ = κᵢ / N` of the measurement
/// `{Aᵢ†Aᵢ}` on the maximally mixed state.
pub fn povm_entropy(kraus: &KrausSet, q: Order) -> Result<f64> {
    let defect = kraus.tp_defect();
    if defect > TP_TOL {
        return Err(Error::validation(
            "Kraus operators are not trace preserving: ‖Σ A†A − 𝟙‖₂",
            defect,
        ));
    }
    let n = kraus.dim() as f64;
    let kappas: Vec<f64> = kraus.kappas().iter().map(|k| k / n).collect();
    spectrum_entropy(&SpectrumVector::new(kappas)?, q)
}

/// Von Neumann entropy of `(Φ ⊗ 𝟙)(|φ_ρ⟩⟨φ_ρ|)` for the purification
/// `|φ_ρ⟩ = |res √ρ⟩`.
pub fn exchange_entropy(ch: &Channel, rho: &ComplexMatrix) -> Result<f64> {
    validate_state(rho, ch.dim())?;
    let root = sqrt_psd(rho)?;
    let side = ch.dim() * ch.dim();
    let mut joint = ComplexMatrix::zeros(side, side);
    for a in ch.kraus()?.operators() {
        let v = vec_row_major(&(a * &root));
        joint += &v * v.adjoint();
    }
    hermitian_spectrum_entropy(&joint, Order::ONE)
}

/// `S_q(Φ(𝟙/N))`.
pub fn output_entropy(ch: &Channel, q: Order) -> Result<f64> {
    hermitian_spectrum_entropy(&ch.output_of_maximally_mixed()?, q)
}

/// Entropy of a positive semi-definite matrix; roundoff negatives clamped.
pub fn hermitian_spectrum_entropy(m: &ComplexMatrix, q: Order) -> Result<f64> {
    let eigs = hermitian_eigenvalues(m)?;
    spectrum_entropy(
        &SpectrumVector::new(eigs.iter().map(|v| v.max(0.0)).collect())?,
        q,
    )
}

/// Semi-axes of the image of the Bloch ball under a unital qubit channel,
/// descending.
pub fn bloch_ellipsoid(ch: &Channel) -> Result<[f64; 3]> {
    if ch.dim() != 2 {
        return Err(Error::domain(format!(
            "Bloch ellipsoid needs a qubit channel, got N = {}",
            ch.dim()
        )));
    }
    if !ch.flags().unital {
        return Err(Error::domain(
            "Bloch ellipsoid is defined here only for unital channels",
        ));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let basis = [
        ComplexMatrix::from_row_slice(2, 2, &[z, C64::new(s, 0.0), C64::new(s, 0.0), z]),
        ComplexMatrix::from_row_slice(2, 2, &[z, C64::new(0.0, -s), C64::new(0.0, s), z]),
        ComplexMatrix::from_row_slice(2, 2, &[C64::new(s, 0.0), z, z, C64::new(-s, 0.0)]),
    ];
    let images = basis
        .iter()
        .map(|b| ch.act(b))
        .collect::<Result<Vec<_>>>()?;
    let t = ComplexMatrix::from_fn(3, 3, |i, j| (basis[i].adjoint() * &images[j]).trace());
    let sv = matcore::singular_values(&t)?;
    Ok([sv.values()[0], sv.values()[1], sv.values()[2]])
}

/// Spectral quantities of a channel reported alongside entropies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointExtras {
    pub lambda_phi: f64,
    pub sigma1: f64,
    pub tau1: f64,
    pub d1: f64,
}

impl PointExtras {
    pub fn of(ch: &Channel) -> Result<Self> {
        Ok(PointExtras {
            lambda_phi: ch.lambda_phi()?,
            sigma1: ch.sigma1()?,
            tau1: ch.tau1()?,
            d1: ch.d1()?,
        })
    }
}

/// One point `(S_q^map, S_q^rec)` of the entropy plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyPoint {
    pub q: Order,
    pub s_map: f64,
    pub s_rec: f64,
    pub channel_label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extras: Option<PointExtras>,
}

impl EntropyPoint {
    pub fn of(ch: &Channel, q: Order, with_extras: bool) -> Result<Self> {
        Ok(EntropyPoint {
            q,
            s_map: map_entropy(ch, q)?,
            s_rec: receiver_entropy(ch, q)?,
            channel_label: ch.label().to_string(),
            extras: if with_extras {
                Some(PointExtras::of(ch)?)
            } else {
                None
            },
        })
    }
}
