//! Channel representations and the conversions between them.
//!
//! A [`Channel`] stores its superoperator as the single source of truth; the
//! dynamical (Choi) matrix is its reshuffle, and Kraus operators are derived
//! from the Choi eigendecomposition on first use.
//!
//! Superoperators act on row-vectorised density matrices,
//! `ρ'_{kl} = Φ_{(k,l),(m,n)} ρ_{mn}`, so a Kraus set gives `Φ = Σ A ⊗ Ā`
//! and `D = Φ^R = Σ |res A⟩⟨res A|`.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{
    self, hermitian_eigen, hermiticity_defect, kron, partial_trace_first, reshuffle,
    singular_values, trace_re, unvec_row_major, vec_row_major, ComplexMatrix, SpectrumVector, C64,
    HERM_TOL,
};

/// Trace-preservation tolerance on `‖Σ A†A − 𝟙‖₂` and `‖Tr_A D − 𝟙‖₂`.
pub const TP_TOL: f64 = 1e-9;
/// Positivity tolerance, relative to the Hilbert–Schmidt norm of the operator.
pub const PSD_REL_TOL: f64 = 1e-9;
/// Choi eigenvalues below this fraction of the largest are dropped when
/// extracting Kraus operators.
pub const KRAUS_REL_TOL: f64 = 1e-12;
pub const UNITAL_TOL: f64 = 1e-9;
pub const UNITARY_TOL: f64 = 1e-10;
pub const STATE_TRACE_TOL: f64 = 1e-9;

/// Kraus operators `{Aᵢ}` of a trace-preserving map on `M_N`.
#[derive(Debug, Clone)]
pub struct KrausSet {
    dim: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    /// Validates squareness, a common dimension and `Σ Aᵢ†Aᵢ = 𝟙`.
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let set = Self::new_unchecked(operators)?;
        let defect = set.tp_defect();
        if defect > TP_TOL {
            return Err(Error::validation(
                "Kraus operators are not trace preserving: ‖Σ A†A − 𝟙‖₂",
                defect,
            ));
        }
        Ok(set)
    }

    /// Shape checks only; the identity resolution is not enforced.
    pub fn new_unchecked(operators: Vec<ComplexMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::dimension("empty Kraus set"))?;
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::dimension("Kraus operators must be non-empty"));
        }
        for (i, op) in operators.iter().enumerate() {
            if op.shape() != (dim, dim) {
                return Err(Error::dimension(format!(
                    "Kraus operator {i} has shape {:?}, expected ({dim}, {dim})",
                    op.shape()
                )));
            }
            matcore::check_finite(op)?;
        }
        Ok(KrausSet { dim, operators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `‖Σ Aᵢ†Aᵢ − 𝟙‖₂`.
    pub fn tp_defect(&self) -> f64 {
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for a in &self.operators {
            sum += a.adjoint() * a;
        }
        (sum - matcore::identity(self.dim)).norm()
    }

    /// `κᵢ = Tr Aᵢ†Aᵢ`, in operator order.
    pub fn kappas(&self) -> Vec<f64> {
        self.operators.iter().map(|a| a.norm_squared()).collect()
    }

    /// `Σ Aᵢ ⊗ Āᵢ`.
    pub fn superoperator(&self) -> ComplexMatrix {
        let side = self.dim * self.dim;
        let mut sum = ComplexMatrix::zeros(side, side);
        for a in &self.operators {
            sum += kron(a, &a.conjugate());
        }
        sum
    }

    /// `Σ |res Aᵢ⟩⟨res Aᵢ|`, built directly from the operators.
    pub fn dynamical_matrix(&self) -> ComplexMatrix {
        let side = self.dim * self.dim;
        let mut sum = ComplexMatrix::zeros(side, side);
        for a in &self.operators {
            let v = vec_row_major(a);
            sum += &v * v.adjoint();
        }
        sum
    }
}

/// `N² × N²` matrix acting on row-vectorised `N × N` matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn new(matrix: ComplexMatrix, dim: usize) -> Result<Self> {
        check_side(&matrix, dim, "superoperator")?;
        matcore::check_finite(&matrix)?;
        Ok(Superoperator { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Dynamical matrix `D_Φ`; its normalised view `ω_Φ = D_Φ / N` is the
/// Jamiołkowski–Choi state.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn new(matrix: ComplexMatrix, dim: usize) -> Result<Self> {
        check_side(&matrix, dim, "dynamical matrix")?;
        matcore::check_finite(&matrix)?;
        Ok(ChoiMatrix { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `ω_Φ = D_Φ / N`.
    pub fn state(&self) -> ComplexMatrix {
        self.matrix.unscale(self.dim as f64)
    }

    /// Positivity cutoff `PSD_REL_TOL · ‖D‖₂`.
    pub fn psd_tol(&self) -> f64 {
        PSD_REL_TOL * self.matrix.norm()
    }
}

fn check_side(m: &ComplexMatrix, dim: usize, what: &str) -> Result<()> {
    let side = dim * dim;
    if dim == 0 || m.shape() != (side, side) {
        return Err(Error::dimension(format!(
            "{what} for N = {dim} must be {side}x{side}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChannelFlags {
    pub cp: bool,
    pub tp: bool,
    pub unital: bool,
}

/// How strictly [`Channel::from_superoperator_with`] enforces CP-TP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validation {
    Strict,
    /// Only shapes are checked; the flags record what failed. Used for
    /// negative controls.
    Permissive,
}

/// A quantum operation on `M_N`, immutable after construction.
#[derive(Debug, Clone)]
pub struct Channel {
    superop: Superoperator,
    choi: ChoiMatrix,
    /// Signed, descending; `None` when the dynamical matrix is not Hermitian
    /// (permissive construction only).
    choi_eigenvalues: Option<Vec<f64>>,
    flags: ChannelFlags,
    kraus: OnceLock<KrausSet>,
    singular: OnceLock<SpectrumVector>,
    label: String,
    interval: bool,
}

impl Channel {
    /// Builds `Φ = Σ Aᵢ ⊗ Āᵢ` and cross-checks `D = Σ |res Aᵢ⟩⟨res Aᵢ|`
    /// against the reshuffled superoperator.
    pub fn from_kraus(ops: &KrausSet) -> Result<Channel> {
        let defect = ops.tp_defect();
        if defect > TP_TOL {
            return Err(Error::validation(
                "Kraus operators are not trace preserving: ‖Σ A†A − 𝟙‖₂",
                defect,
            ));
        }
        let superop = ops.superoperator();
        let channel = Self::from_superoperator(superop, ops.dim())?;
        let direct = ops.dynamical_matrix();
        let gap = (&direct - channel.choi.matrix()).norm();
        if gap > 1e-12 * (1.0 + direct.norm()) {
            return Err(Error::Numerical(format!(
                "Σ A⊗Ā and Σ |res A⟩⟨res A| disagree after reshuffle by {gap:.3e}"
            )));
        }
        let _ = channel.kraus.set(ops.clone());
        Ok(channel)
    }

    /// Strictly validated construction from a superoperator matrix.
    pub fn from_superoperator(matrix: ComplexMatrix, dim: usize) -> Result<Channel> {
        Self::from_superoperator_with(matrix, dim, Validation::Strict)
    }

    pub fn from_superoperator_with(
        matrix: ComplexMatrix,
        dim: usize,
        mode: Validation,
    ) -> Result<Channel> {
        let superop = Superoperator::new(matrix, dim)?;
        let choi = ChoiMatrix::new(reshuffle(superop.matrix(), dim)?, dim)?;

        let herm_defect = hermiticity_defect(choi.matrix());
        let choi_eigenvalues = if herm_defect <= HERM_TOL {
            Some(hermitian_eigen(choi.matrix())?.0)
        } else {
            None
        };
        let min_eig = choi_eigenvalues
            .as_ref()
            .and_then(|v| v.last().copied())
            .unwrap_or(f64::NEG_INFINITY);
        let cp = min_eig >= -choi.psd_tol();
        let tp_defect = (partial_trace_first(choi.matrix(), dim)? - matcore::identity(dim)).norm();
        let tp = tp_defect <= TP_TOL;

        let mixed = matcore::identity(dim).unscale(dim as f64);
        let image = act(superop.matrix(), &mixed, dim)?;
        let unital = (image - mixed).norm() <= UNITAL_TOL;

        if mode == Validation::Strict {
            if choi_eigenvalues.is_none() {
                return Err(Error::validation(
                    "dynamical matrix is not Hermitian (relative ‖D − D†‖₂)",
                    herm_defect,
                ));
            }
            if !cp {
                return Err(Error::validation(
                    "map is not completely positive: min eigenvalue of D",
                    min_eig,
                ));
            }
            if !tp {
                return Err(Error::validation(
                    "map is not trace preserving: ‖Tr_A D − 𝟙‖₂",
                    tp_defect,
                ));
            }
        }

        Ok(Channel {
            superop,
            choi,
            choi_eigenvalues,
            flags: ChannelFlags { cp, tp, unital },
            kraus: OnceLock::new(),
            singular: OnceLock::new(),
            label: "channel".to_string(),
            interval: false,
        })
    }

    /// Construction from a dynamical matrix `D_Φ`.
    pub fn from_choi(choi: &ChoiMatrix) -> Result<Channel> {
        Self::from_superoperator(reshuffle(choi.matrix(), choi.dim())?, choi.dim())
    }

    /// `Φ(ρ) = Tr_B[U (ρ ⊗ |1⟩⟨1|) U†]` for a unitary `U` on `N·d`, the
    /// environment being the second tensor factor. Realised through the
    /// Kraus operators `Aᵢ = ⟨i|_B U |1⟩_B`.
    pub fn from_environment(u: &ComplexMatrix, dim: usize, env_dim: usize) -> Result<Channel> {
        let side = dim * env_dim;
        if dim == 0 || env_dim == 0 || u.shape() != (side, side) {
            return Err(Error::dimension(format!(
                "environment unitary for N = {dim}, d = {env_dim} must be {side}x{side}, got {}x{}",
                u.nrows(),
                u.ncols()
            )));
        }
        let defect = (u.adjoint() * u - matcore::identity(side)).norm();
        if defect > UNITARY_TOL {
            return Err(Error::validation(
                "environment operator is not unitary: ‖U†U − 𝟙‖₂",
                defect,
            ));
        }
        let ops = (0..env_dim)
            .map(|i| ComplexMatrix::from_fn(dim, dim, |a, b| u[(a * env_dim + i, b * env_dim)]))
            .collect();
        Self::from_kraus(&KrausSet::new(ops)?)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub(crate) fn mark_interval(mut self) -> Self {
        self.interval = true;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Set for channels built by the interval-channel constructors.
    pub fn is_interval(&self) -> bool {
        self.interval
    }

    pub fn dim(&self) -> usize {
        self.superop.dim
    }

    pub fn flags(&self) -> ChannelFlags {
        self.flags
    }

    pub fn superoperator(&self) -> &Superoperator {
        &self.superop
    }

    pub fn choi(&self) -> &ChoiMatrix {
        &self.choi
    }

    /// Signed eigenvalues of `D_Φ`, descending.
    pub fn choi_eigenvalues(&self) -> Result<&[f64]> {
        self.choi_eigenvalues.as_deref().ok_or_else(|| {
            Error::validation(
                "dynamical matrix is not Hermitian",
                hermiticity_defect(self.choi.matrix()),
            )
        })
    }

    /// Eigenvalues of `D_Φ` with roundoff negatives clamped to zero. Fails
    /// when a negative eigenvalue exceeds the positivity tolerance.
    pub fn choi_spectrum(&self) -> Result<SpectrumVector> {
        let eigs = self.choi_eigenvalues()?;
        let tol = self.choi.psd_tol();
        if let Some(&min) = eigs.last() {
            if min < -tol {
                return Err(Error::validation(
                    "map is not completely positive: min eigenvalue of D",
                    min,
                ));
            }
        }
        SpectrumVector::new(eigs.iter().map(|v| v.max(0.0)).collect())
    }

    /// Singular values of the superoperator, cached.
    pub fn singular_values(&self) -> Result<&SpectrumVector> {
        if let Some(sv) = self.singular.get() {
            return Ok(sv);
        }
        let sv = singular_values(self.superop.matrix())?;
        Ok(self.singular.get_or_init(|| sv))
    }

    /// Greatest singular value `σ₁` of the superoperator.
    pub fn sigma1(&self) -> Result<f64> {
        Ok(self.singular_values()?.largest())
    }

    /// Trace norm `Λ_Φ` of the superoperator.
    pub fn lambda_phi(&self) -> Result<f64> {
        Ok(self.singular_values()?.total())
    }

    /// Greatest eigenvalue `d₁` of `D_Φ`.
    pub fn d1(&self) -> Result<f64> {
        Ok(self.choi_eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    /// The Kraus set the channel was built from, or the canonical one.
    pub fn kraus(&self) -> Result<&KrausSet> {
        if let Some(k) = self.kraus.get() {
            return Ok(k);
        }
        let k = choi_to_kraus(&self.choi)?;
        Ok(self.kraus.get_or_init(|| k))
    }

    /// Canonical Kraus operators from the eigendecomposition of `D_Φ`.
    pub fn canonical_kraus(&self) -> Result<KrausSet> {
        choi_to_kraus(&self.choi)
    }

    /// Linear action `unvec(Φ · vec(m))` on an arbitrary `N × N` matrix.
    pub fn act(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        act(self.superop.matrix(), m, self.dim())
    }

    /// Applies the channel to a validated density matrix.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        validate_state(rho, self.dim())?;
        self.act(rho)
    }

    /// `Φ(𝟙/N)`.
    pub fn output_of_maximally_mixed(&self) -> Result<ComplexMatrix> {
        let n = self.dim();
        self.act(&matcore::identity(n).unscale(n as f64))
    }

    /// Greatest eigenvalue `τ₁` of `Φ(𝟙/N)`.
    pub fn tau1(&self) -> Result<f64> {
        let out = self.output_of_maximally_mixed()?;
        Ok(matcore::hermitian_eigenvalues(&out)?[0])
    }
}

fn act(superop: &ComplexMatrix, m: &ComplexMatrix, dim: usize) -> Result<ComplexMatrix> {
    if m.shape() != (dim, dim) {
        return Err(Error::dimension(format!(
            "channel on M_{dim} applied to a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    unvec_row_major(&(superop * vec_row_major(m)), dim, dim)
}

/// Checks that `rho` is an `N × N` density matrix: Hermitian, unit trace and
/// positive within tolerance.
pub fn validate_state(rho: &ComplexMatrix, dim: usize) -> Result<()> {
    if rho.shape() != (dim, dim) {
        return Err(Error::dimension(format!(
            "state must be {dim}x{dim}, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let tr = trace_re(rho);
    if (tr - 1.0).abs() > STATE_TRACE_TOL || rho.trace().im.abs() > STATE_TRACE_TOL {
        return Err(Error::validation(
            "state trace differs from 1",
            (tr - 1.0).abs(),
        ));
    }
    let eigs = matcore::hermitian_eigenvalues(rho)?;
    let min = eigs.last().copied().unwrap_or(0.0);
    if min < -PSD_REL_TOL * rho.norm() {
        return Err(Error::validation(
            "state is not positive semi-definite",
            min,
        ));
    }
    Ok(())
}

/// Canonical Kraus set `Aᵢ = √λᵢ · unres(vᵢ)` from the eigendecomposition of
/// `D`, dropping eigenvalues below `KRAUS_REL_TOL · λ₁`. Then `κᵢ = λᵢ`.
pub fn choi_to_kraus(choi: &ChoiMatrix) -> Result<KrausSet> {
    let (values, vectors) = hermitian_eigen(choi.matrix())?;
    let min = values.last().copied().unwrap_or(0.0);
    if min < -choi.psd_tol() {
        return Err(Error::validation(
            "map is not completely positive: min eigenvalue of D",
            min,
        ));
    }
    let n = choi.dim();
    let cutoff = KRAUS_REL_TOL * values[0].max(0.0);
    let ops = values
        .iter()
        .enumerate()
        .take_while(|(_, &lambda)| lambda > cutoff)
        .map(|(i, &lambda)| {
            let v = vectors.column(i).into_owned() * C64::new(lambda.sqrt(), 0.0);
            unvec_row_major(&v, n, n)
        })
        .collect::<Result<Vec<_>>>()?;
    KrausSet::new(ops)
}

/// Alternative Kraus representation `A'ⱼ = Σᵢ Vⱼᵢ Aᵢ` for an isometry `V`
/// of shape `m × k`, `k = |K|`. The channel is unchanged.
pub fn remix_kraus(kraus: &KrausSet, v: &ComplexMatrix) -> Result<KrausSet> {
    let k = kraus.len();
    if v.ncols() != k || v.nrows() < k {
        return Err(Error::dimension(format!(
            "mixing matrix must be m x {k} with m ≥ {k}, got {}x{}",
            v.nrows(),
            v.ncols()
        )));
    }
    let defect = (v.adjoint() * v - matcore::identity(k)).norm();
    if defect > UNITARY_TOL {
        return Err(Error::validation(
            "mixing matrix is not an isometry: ‖V†V − 𝟙‖₂",
            defect,
        ));
    }
    let n = kraus.dim();
    let ops = (0..v.nrows())
        .map(|j| {
            let mut a = ComplexMatrix::zeros(n, n);
            for (i, op) in kraus.operators().iter().enumerate() {
                a += op * v[(j, i)];
            }
            a
        })
        .collect();
    KrausSet::new(ops)
}
