//! Named channel families, the depolarizing boundary curve and random
//! sampling of unitaries, states and channels.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channels::{validate_state, Channel, KrausSet, UNITARY_TOL};
use crate::error::{Error, Result};
use crate::matcore::{identity, kron, reshuffle, vec_row_major, ComplexMatrix, ComplexVector, C64};

/// Deterministic random stream. Child streams for parallel work are derived
/// from the base seed and an index, independent of scheduling.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub const ALGORITHM: &'static str = "ChaCha20";

    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Stream for task `index` of a job seeded with `self.seed()`.
    pub fn child(&self, index: u64) -> Self {
        Self::new(split_seed(self.seed, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn algorithm(&self) -> &'static str {
        Self::ALGORITHM
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `seedᵢ = hash(base, i)`.
pub fn split_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::domain(format!(
            "channel dimension must be ≥ 2, got {n}"
        )));
    }
    Ok(())
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("{name} must lie in [0, 1], got {x}")));
    }
    Ok(())
}

/// Pauli matrices `σ₀ = 𝟙, σ₁, σ₂, σ₃`.
pub fn pauli_matrices() -> [ComplexMatrix; 4] {
    let z = c(0.0);
    let i = C64::i();
    [
        identity(2),
        ComplexMatrix::from_row_slice(2, 2, &[z, c(1.0), c(1.0), z]),
        ComplexMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        ComplexMatrix::from_row_slice(2, 2, &[c(1.0), z, z, c(-1.0)]),
    ]
}

pub fn identity_channel(n: usize) -> Result<Channel> {
    check_dim(n)?;
    Ok(Channel::from_superoperator(identity(n * n), n)?.with_label("identity"))
}

/// `Φ*(ρ) = Tr(ρ) 𝟙/N`, superoperator `C_N / N`.
pub fn completely_depolarizing(n: usize) -> Result<Channel> {
    depolarizing(n, 0.0)
}

/// `Φ_α = α·𝟙 + (1 − α)·Φ*`.
pub fn depolarizing(n: usize, alpha: f64) -> Result<Channel> {
    check_dim(n)?;
    check_unit("alpha", alpha)?;
    let corners = reshuffle(&identity(n * n), n)?;
    let m = identity(n * n) * c(alpha) + corners * c((1.0 - alpha) / n as f64);
    Ok(Channel::from_superoperator(m, n)?.with_label(format!("depolarizing(alpha={alpha})")))
}

/// Keeps the diagonal of the input and removes all coherences.
pub fn coarse_graining(n: usize) -> Result<Channel> {
    check_dim(n)?;
    let mut m = ComplexMatrix::zeros(n * n, n * n);
    for k in 0..n {
        m[(k * n + k, k * n + k)] = c(1.0);
    }
    Ok(Channel::from_superoperator(m, n)?.with_label("coarse_graining"))
}

/// `Φ_ξ(ρ) = Tr(ρ)·ξ`, with dynamical matrix `ξ ⊗ 𝟙`.
pub fn complete_contraction(xi: &ComplexMatrix) -> Result<Channel> {
    let n = xi.nrows();
    check_dim(n)?;
    validate_state(xi, n)?;
    let m = vec_row_major(xi) * vec_row_major(&identity(n)).transpose();
    Ok(Channel::from_superoperator(m, n)?.with_label("complete_contraction"))
}

/// `ρ ↦ |0⟩⟨0|`.
pub fn spontaneous_emission(n: usize) -> Result<Channel> {
    check_dim(n)?;
    let mut ground = ComplexMatrix::zeros(n, n);
    ground[(0, 0)] = c(1.0);
    Ok(complete_contraction(&ground)?.with_label("spontaneous_emission"))
}

/// Qubit interval channel: the superoperator's first and last columns are
/// `vec ρ₁` and `vec ρ₂`, the middle columns vanish. The Bloch ball is
/// mapped onto the segment `[ρ₁, ρ₂]`.
pub fn interval_channel(rho1: &ComplexMatrix, rho2: &ComplexMatrix) -> Result<Channel> {
    validate_state(rho1, 2)?;
    validate_state(rho2, 2)?;
    let mut m = ComplexMatrix::zeros(4, 4);
    m.set_column(0, &vec_row_major(rho1));
    m.set_column(3, &vec_row_major(rho2));
    Ok(Channel::from_superoperator(m, 2)?
        .with_label("interval")
        .mark_interval())
}

/// Interval channel between the pure states
/// `[[α, √(α(1−α)) e^{iφ₁}], [·, 1−α]]` and the same with `β, φ₂`.
pub fn interval_cd(alpha: f64, beta: f64, phi1: f64, phi2: f64) -> Result<Channel> {
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    let pure = |a: f64, phi: f64| {
        let g = C64::from_polar((a * (1.0 - a)).sqrt(), phi);
        ComplexMatrix::from_row_slice(2, 2, &[c(a), g, g.conj(), c(1.0 - a)])
    };
    Ok(
        interval_channel(&pure(alpha, phi1), &pure(beta, phi2))?.with_label(format!(
            "interval(alpha={alpha},beta={beta},phi1={phi1},phi2={phi2})"
        )),
    )
}

/// General interval channel with off-diagonal entries `γ₁`, `γ₂`.
pub fn interval_general(alpha: f64, beta: f64, gamma1: C64, gamma2: C64) -> Result<Channel> {
    let state =
        |a: f64, g: C64| ComplexMatrix::from_row_slice(2, 2, &[c(a), g, g.conj(), c(1.0 - a)]);
    Ok(
        interval_channel(&state(alpha, gamma1), &state(beta, gamma2))?.with_label(format!(
            "interval(alpha={alpha},beta={beta},gamma1={gamma1},gamma2={gamma2})"
        )),
    )
}

/// `Φ(ρ) = Σ pᵢ σᵢ ρ σᵢ`.
pub fn pauli_channel(p: &[f64]) -> Result<Channel> {
    if p.len() != 4 {
        return Err(Error::domain(format!(
            "Pauli channel needs 4 weights, got {}",
            p.len()
        )));
    }
    let ops = pauli_matrices()
        .into_iter()
        .zip(p)
        .map(|(s, w)| {
            if *w < 0.0 {
                Err(Error::domain(format!("negative Pauli weight {w}")))
            } else {
                Ok(s * c(w.sqrt()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::domain(format!(
            "Pauli weights sum to {total}, not 1"
        )));
    }
    Ok(Channel::from_kraus(&KrausSet::new(ops)?)?
        .with_label(format!("pauli(p={},{},{},{})", p[0], p[1], p[2], p[3])))
}

/// The reshuffling-invariant qubit map `Φ_{η₁,η₂}` (before conjugation).
/// The (4,4) entry is `(1+η₃)/2`, as trace preservation requires.
pub fn reshuffle_invariant_matrix(eta: [f64; 3]) -> ComplexMatrix {
    let [e1, e2, e3] = eta;
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = c((1.0 + e3) / 2.0);
    m[(0, 3)] = c((1.0 - e3) / 2.0);
    m[(3, 0)] = c((1.0 - e3) / 2.0);
    m[(3, 3)] = c((1.0 + e3) / 2.0);
    m[(1, 1)] = c((e1 + e2) / 2.0);
    m[(2, 2)] = c((e1 + e2) / 2.0);
    m[(1, 2)] = c((e1 - e2) / 2.0);
    m[(2, 1)] = c((e1 - e2) / 2.0);
    m
}

/// `(U ⊗ Ū) Φ_{η₁,η₂} (U† ⊗ Uᵀ)`; its dynamical matrix equals its
/// superoperator.
pub fn reshuffle_invariant(eta: [f64; 3], u: &ComplexMatrix) -> Result<Channel> {
    let total: f64 = eta.iter().sum();
    if (total - 1.0).abs() > 1e-12 || eta.iter().any(|e| *e < 0.0) {
        return Err(Error::domain(format!(
            "eta = {eta:?} must be non-negative and sum to 1"
        )));
    }
    check_unitary(u, 2)?;
    let left = kron(u, &u.conjugate());
    let right = kron(&u.adjoint(), &u.transpose());
    let m = left * reshuffle_invariant_matrix(eta) * right;
    let ch = Channel::from_superoperator(m, 2).map_err(|e| match e {
        Error::Validation { what, magnitude } => Error::Validation {
            what: format!("{what} (eta = {eta:?})"),
            magnitude,
        },
        other => other,
    })?;
    Ok(ch.with_label(format!(
        "reshuffle_invariant(eta={},{},{})",
        eta[0], eta[1], eta[2]
    )))
}

fn check_unitary(u: &ComplexMatrix, n: usize) -> Result<()> {
    if u.shape() != (n, n) {
        return Err(Error::dimension(format!(
            "expected a {n}x{n} unitary, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let defect = (u.adjoint() * u - identity(n)).norm();
    if defect > UNITARY_TOL {
        return Err(Error::validation(
            "matrix is not unitary: ‖U†U − 𝟙‖₂",
            defect,
        ));
    }
    Ok(())
}

/// Entropy-plane point of the depolarizing qubit channel `Φ_α`:
/// `(S^map, S^rec)` at `q = 1`. The receiver entropy uses the closed form
/// `ln(1+3α) − 3α ln α / (1+3α)`; the map entropy uses the Choi spectrum
/// `((1+3α)/4, (1−α)/4 ×3)`.
pub fn curve_ab_point(alpha: f64) -> Result<(f64, f64)> {
    check_unit("alpha", alpha)?;
    let xlnx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    let s_map = -xlnx((1.0 + 3.0 * alpha) / 4.0) - 3.0 * xlnx((1.0 - alpha) / 4.0);
    let s_rec = (1.0 + 3.0 * alpha).ln() - 3.0 * xlnx(alpha) / (1.0 + 3.0 * alpha);
    Ok((s_map, s_rec))
}

fn ginibre(rows: usize, cols: usize, rng: &mut RngStream) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Haar-random unitary: QR of a Ginibre matrix with the phases of `R`'s
/// diagonal moved into `Q`.
pub fn haar_unitary(n: usize, rng: &mut RngStream) -> ComplexMatrix {
    let qr = ginibre(n, n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// First `k` columns of a Haar unitary on `m`: an isometry `m × k`.
pub fn random_isometry(m: usize, k: usize, rng: &mut RngStream) -> ComplexMatrix {
    haar_unitary(m, rng).columns(0, k).into_owned()
}

/// Uniform point of the probability simplex (Dirichlet(1,…,1)).
pub fn random_probability(k: usize, rng: &mut RngStream) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// Hilbert–Schmidt-uniform density matrix `GG† / Tr GG†`.
pub fn random_density(n: usize, rng: &mut RngStream) -> ComplexMatrix {
    let g = ginibre(n, n, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    rho.unscale(tr)
}

/// Haar-random pure state `|ψ⟩⟨ψ|`.
pub fn random_pure_state(n: usize, rng: &mut RngStream) -> ComplexMatrix {
    let g = ginibre(n, 1, rng);
    let psi: ComplexVector = g.column(0).unscale(g.norm());
    &psi * psi.adjoint()
}

/// Random CP-TP map from a Haar unitary coupling to a `d`-level environment.
pub fn random_cptp(n: usize, env_dim: usize, rng: &mut RngStream) -> Result<Channel> {
    check_dim(n)?;
    if env_dim == 0 || env_dim > n * n {
        return Err(Error::domain(format!(
            "environment dimension must be in 1..={}, got {env_dim}",
            n * n
        )));
    }
    let u = haar_unitary(n * env_dim, rng);
    Ok(Channel::from_environment(&u, n, env_dim)?.with_label("random_cptp"))
}

/// Mixture `Σ wⱼ Uⱼ·Uⱼ†` of `k` Haar unitaries with Dirichlet weights.
pub fn random_bistochastic(n: usize, k: usize, rng: &mut RngStream) -> Result<Channel> {
    check_dim(n)?;
    if k == 0 {
        return Err(Error::domain("mixture needs at least one unitary"));
    }
    let weights = random_probability(k, rng);
    let mut m = ComplexMatrix::zeros(n * n, n * n);
    for w in weights {
        let u = haar_unitary(n, rng);
        m += kron(&u, &u.conjugate()) * c(w);
    }
    Ok(Channel::from_superoperator(m, n)?.with_label("random_bistochastic"))
}

/// Channel families accepted by name in channel descriptions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Identity,
    Depolarizing,
    CoarseGraining,
    CompleteContraction,
    SpontaneousEmission,
    Interval,
    Pauli,
    ReshuffleInvariant,
    RandomCptp,
    RandomBistochastic,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::Identity,
        Family::Depolarizing,
        Family::CoarseGraining,
        Family::CompleteContraction,
        Family::SpontaneousEmission,
        Family::Interval,
        Family::Pauli,
        Family::ReshuffleInvariant,
        Family::RandomCptp,
        Family::RandomBistochastic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Identity => "identity",
            Family::Depolarizing => "depolarizing",
            Family::CoarseGraining => "coarse_graining",
            Family::CompleteContraction => "complete_contraction",
            Family::SpontaneousEmission => "spontaneous_emission",
            Family::Interval => "interval",
            Family::Pauli => "pauli",
            Family::ReshuffleInvariant => "reshuffle_invariant",
            Family::RandomCptp => "random_cptp",
            Family::RandomBistochastic => "random_bistochastic",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown channel family `{s}`")))
    }
}

/// A family parameter: a real number or a complex `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Real(f64),
    Complex([f64; 2]),
}

impl Param {
    pub fn as_complex(self) -> C64 {
        match self {
            Param::Real(x) => c(x),
            Param::Complex([re, im]) => C64::new(re, im),
        }
    }
}

/// A named family with its parameters. Matrix-valued inputs (the target
/// state of a contraction, the conjugating unitary of a
/// reshuffling-invariant map) travel in `matrices`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub name: Family,
    pub dim: usize,
    pub params: BTreeMap<String, Param>,
    pub matrices: Vec<ComplexMatrix>,
}

impl FamilySpec {
    pub fn new(name: Family, dim: usize) -> Self {
        FamilySpec {
            name,
            dim,
            params: BTreeMap::new(),
            matrices: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), Param::Real(value));
        self
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(Param::Real(x)) => Ok(Some(*x)),
            Some(Param::Complex(_)) => Err(Error::Parse(format!(
                "parameter `{key}` of `{}` must be real",
                self.name
            ))),
        }
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.real(key)?
            .ok_or_else(|| Error::Parse(format!("family `{}` needs parameter `{key}`", self.name)))
    }

    fn count(&self, key: &str, default: u64) -> Result<u64> {
        match self.real(key)? {
            None => Ok(default),
            Some(x) if x >= 0.0 && x.fract() == 0.0 && x <= 9_007_199_254_740_992.0 => Ok(x as u64),
            Some(x) => Err(Error::Parse(format!(
                "parameter `{key}` must be a non-negative integer, got {x}"
            ))),
        }
    }

    fn qubit_only(&self) -> Result<()> {
        if self.dim != 2 {
            return Err(Error::domain(format!(
                "family `{}` is defined for N = 2, got N = {}",
                self.name, self.dim
            )));
        }
        Ok(())
    }

    /// Reject keys the family does not read, so typos surface as errors.
    fn only(&self, allowed: &[&str]) -> Result<()> {
        if let Some(k) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Parse(format!(
                "unknown parameter `{k}` for family `{}` (expected one of {allowed:?})",
                self.name
            )));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Channel> {
        let n = self.dim;
        match self.name {
            Family::Identity => {
                self.only(&[])?;
                identity_channel(n)
            }
            Family::Depolarizing => {
                self.only(&["alpha"])?;
                depolarizing(n, self.required("alpha")?)
            }
            Family::CoarseGraining => {
                self.only(&[])?;
                coarse_graining(n)
            }
            Family::CompleteContraction => {
                self.only(&[])?;
                let xi = self.matrices.first().ok_or_else(|| {
                    Error::Parse("complete_contraction needs the target state in `matrices`".into())
                })?;
                if xi.nrows() != n {
                    return Err(Error::dimension(format!(
                        "target state is {}x{}, expected {n}x{n}",
                        xi.nrows(),
                        xi.ncols()
                    )));
                }
                complete_contraction(xi)
            }
            Family::SpontaneousEmission => {
                self.only(&[])?;
                spontaneous_emission(n)
            }
            Family::Interval => {
                self.qubit_only()?;
                self.only(&["alpha", "beta", "phi1", "phi2", "gamma1", "gamma2"])?;
                let alpha = self.required("alpha")?;
                let beta = self.required("beta")?;
                match (self.params.get("gamma1"), self.params.get("gamma2")) {
                    (Some(g1), Some(g2)) => {
                        interval_general(alpha, beta, g1.as_complex(), g2.as_complex())
                    }
                    (None, None) => interval_cd(
                        alpha,
                        beta,
                        self.real("phi1")?.unwrap_or(0.0),
                        self.real("phi2")?.unwrap_or(0.0),
                    ),
                    _ => Err(Error::Parse(
                        "interval needs both gamma1 and gamma2 or neither".into(),
                    )),
                }
            }
            Family::Pauli => {
                self.qubit_only()?;
                self.only(&["p0", "p1", "p2", "p3"])?;
                let p = ["p0", "p1", "p2", "p3"]
                    .iter()
                    .map(|k| self.required(k))
                    .collect::<Result<Vec<_>>>()?;
                pauli_channel(&p)
            }
            Family::ReshuffleInvariant => {
                self.qubit_only()?;
                self.only(&["eta1", "eta2", "eta3"])?;
                let e1 = self.required("eta1")?;
                let e2 = self.required("eta2")?;
                let e3 = self.real("eta3")?.unwrap_or(1.0 - e1 - e2);
                let u = self
                    .matrices
                    .first()
                    .cloned()
                    .unwrap_or_else(|| identity(2));
                reshuffle_invariant([e1, e2, e3], &u)
            }
            Family::RandomCptp => {
                self.only(&["seed", "env_dim"])?;
                let mut rng = RngStream::new(self.count("seed", 0)?);
                let d = self.count("env_dim", (n * n) as u64)? as usize;
                random_cptp(n, d, &mut rng)
            }
            Family::RandomBistochastic => {
                self.only(&["seed", "k"])?;
                let mut rng = RngStream::new(self.count("seed", 0)?);
                let k = self.count("k", (n * n) as u64)? as usize;
                random_bistochastic(n, k, &mut rng)
            }
        }
        .map(|ch| {
            if self.params.is_empty() {
                ch
            } else {
                let label = self.to_string();
                ch.with_label(label)
            }
        })
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        if !self.params.is_empty() {
            let parts: Vec<String> = self
                .params
                .iter()
                .map(|(k, v)| match v {
                    Param::Real(x) => format!("{k}={x}"),
                    Param::Complex([re, im]) => format!("{k}={re}{im:+}i"),
                })
                .collect();
            write!(f, "({})", parts.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{map_entropy, receiver_entropy};
    use crate::matcore::Order;

    const LN2: f64 = std::f64::consts::LN_2;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn corners2() -> ComplexMatrix {
        reshuffle(&identity(4), 2).unwrap()
    }

    #[test]
    fn named_qubit_channels() {
        assert_eq!(
            identity_channel(2).unwrap().superoperator().matrix(),
            &identity(4)
        );
        let star = completely_depolarizing(2).unwrap();
        assert!(close(
            star.superoperator().matrix(),
            &(corners2() * c(0.5)),
            1e-15
        ));
        assert!(close(
            depolarizing(2, 1.0).unwrap().superoperator().matrix(),
            &identity(4),
            1e-15
        ));

        let third = depolarizing(2, 1.0 / 3.0).unwrap();
        assert!((third.lambda_phi().unwrap() - 2.0).abs() < 1e-12);
        assert!(depolarizing(2, 1.5).is_err());

        let cg = coarse_graining(2).unwrap();
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 0)] = c(1.0);
        expected[(3, 3)] = c(1.0);
        assert_eq!(cg.superoperator().matrix(), &expected);
        assert!((receiver_entropy(&cg, Order::ONE).unwrap() - LN2).abs() < 1e-12);
    }

    #[test]
    fn contraction_examples() {
        let se = spontaneous_emission(2).unwrap();
        assert!(receiver_entropy(&se, Order::ONE).unwrap().abs() < 1e-12);
        assert!((se.sigma1().unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let star = complete_contraction(&(identity(3) * c(1.0 / 3.0))).unwrap();
        assert!(close(
            star.superoperator().matrix(),
            completely_depolarizing(3).unwrap().superoperator().matrix(),
            1e-15
        ));
        assert!(complete_contraction(&identity(2)).is_err());
    }

    #[test]
    fn interval_examples() {
        let cg = interval_cd(1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(cg.is_interval());
        assert!(close(
            cg.superoperator().matrix(),
            coarse_graining(2).unwrap().superoperator().matrix(),
            1e-15
        ));
        let se = interval_cd(1.0, 1.0, 0.3, 0.3).unwrap();
        assert!(close(
            se.superoperator().matrix(),
            spontaneous_emission(2).unwrap().superoperator().matrix(),
            1e-15
        ));
        assert!(interval_general(0.5, 0.5, c(0.9), c(0.0)).is_err());
    }

    #[test]
    fn pauli_examples() {
        let id = pauli_channel(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(close(id.superoperator().matrix(), &identity(4), 1e-15));
        let twirl = pauli_channel(&[0.25; 4]).unwrap();
        assert!(close(
            twirl.superoperator().matrix(),
            depolarizing(2, 0.0).unwrap().superoperator().matrix(),
            1e-12
        ));
        assert!(pauli_channel(&[0.5, 0.6, 0.0, 0.0]).is_err());
    }

    #[test]
    fn reshuffle_invariant_examples() {
        let cg = reshuffle_invariant([0.0, 0.0, 1.0], &identity(2)).unwrap();
        assert!(close(
            cg.superoperator().matrix(),
            coarse_graining(2).unwrap().superoperator().matrix(),
            1e-15
        ));
        let third = reshuffle_invariant([1.0 / 3.0; 3], &identity(2)).unwrap();
        assert!(close(
            third.superoperator().matrix(),
            depolarizing(2, 1.0 / 3.0).unwrap().superoperator().matrix(),
            1e-15
        ));
        let mut rng = RngStream::new(11);
        let u = haar_unitary(2, &mut rng);
        let ch = reshuffle_invariant([0.2, 0.5, 0.3], &u).unwrap();
        assert!(close(
            ch.choi().matrix(),
            ch.superoperator().matrix(),
            1e-10
        ));
        let s2m = map_entropy(&ch, Order::TWO).unwrap();
        let s2r = receiver_entropy(&ch, Order::TWO).unwrap();
        assert!((s2m - s2r).abs() < 1e-10);
        assert!(reshuffle_invariant([0.5, 0.5, 0.5], &identity(2)).is_err());
    }

    #[test]
    fn curve_ab_endpoints() {
        let (m, r) = curve_ab_point(0.0).unwrap();
        assert!((m - 4f64.ln()).abs() < 1e-15 && r == 0.0);
        let (m, r) = curve_ab_point(1.0).unwrap();
        assert!(m.abs() < 1e-15 && (r - 4f64.ln()).abs() < 1e-15);
        assert!(curve_ab_point(-0.1).is_err());
    }

    #[test]
    fn samplers_are_valid_and_reproducible() {
        let mut a = RngStream::new(5);
        let mut b = RngStream::new(5);
        let ua = haar_unitary(3, &mut a);
        let ub = haar_unitary(3, &mut b);
        assert_eq!(ua, ub);
        assert!((ua.adjoint() * &ua - identity(3)).norm() < 1e-12);

        let rho = random_density(3, &mut a);
        validate_state(&rho, 3).unwrap();
        let psi = random_pure_state(3, &mut a);
        assert!(((&psi * &psi) - &psi).norm() < 1e-12);

        let p = random_probability(5, &mut a);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let unitary = random_cptp(2, 1, &mut a).unwrap();
        assert!(map_entropy(&unitary, Order::ONE).unwrap().abs() < 1e-10);
        let bist = random_bistochastic(3, 4, &mut a).unwrap();
        assert!(bist.flags().unital);
        assert!((bist.sigma1().unwrap() - 1.0).abs() < 1e-9);

        let root = RngStream::new(1);
        assert_eq!(root.child(3).seed(), RngStream::new(1).child(3).seed());
        assert_ne!(root.child(3).seed(), root.child(4).seed());
    }

    #[test]
    fn family_specs_build_named_channels() {
        let spec = FamilySpec::new(Family::Depolarizing, 2).with("alpha", 0.5);
        let ch = spec.build().unwrap();
        assert_eq!(ch.label(), "depolarizing(alpha=0.5)");
        assert!(FamilySpec::new(Family::Depolarizing, 2).build().is_err());
        assert!(FamilySpec::new(Family::Identity, 2)
            .with("alpha", 1.0)
            .build()
            .is_err());
        assert!(FamilySpec::new(Family::Pauli, 3).build().is_err());
        let a = FamilySpec::new(Family::RandomCptp, 2)
            .with("seed", 4.0)
            .build()
            .unwrap();
        let b = FamilySpec::new(Family::RandomCptp, 2)
            .with("seed", 4.0)
            .build()
            .unwrap();
        assert_eq!(a.superoperator().matrix(), b.superoperator().matrix());
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
    }
}
