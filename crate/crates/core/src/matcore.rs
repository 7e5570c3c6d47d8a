//! Dense complex-matrix primitives: spectra, Schatten q-norms, and the
//! entry-reordering maps (reshuffle and arbitrary permutations).
//!
//! All composite indices are zero-based and row-major: the pair `(a, b)` of
//! an `N ⊗ N` space maps to `a * N + b`, and vectorising a matrix stacks its
//! rows one after another.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Relative Hermiticity tolerance, `‖H − H†‖₂ ≤ HERM_TOL · ‖H‖₂`.
pub const HERM_TOL: f64 = 1e-10;

/// Singular values below this fraction of the largest one are treated as exact
/// zeros by the entropy code.
pub const ZERO_CUTOFF: f64 = 1e-12;

const EIG_EPS: f64 = f64::EPSILON;
const MAX_SWEEPS: usize = 10_000;

/// Order of a Schatten norm or Rényi entropy. Infinity is kept as an explicit
/// variant so that min-entropy and operator-norm semantics are exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    Finite(f64),
    Infinity,
}

impl Order {
    pub const ONE: Order = Order::Finite(1.0);
    pub const TWO: Order = Order::Finite(2.0);

    pub fn new(q: f64) -> Order {
        if q.is_infinite() && q > 0.0 {
            Order::Infinity
        } else {
            Order::Finite(q)
        }
    }

    /// Numerical value, `f64::INFINITY` for [`Order::Infinity`].
    pub fn value(self) -> f64 {
        match self {
            Order::Finite(q) => q,
            Order::Infinity => f64::INFINITY,
        }
    }

    /// Whether the Shannon / von Neumann branch applies.
    pub fn is_shannon(self) -> bool {
        matches!(self, Order::Finite(q) if (q - 1.0).abs() < 1e-6)
    }
}

impl From<f64> for Order {
    fn from(q: f64) -> Self {
        Order::new(q)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(q) => write!(f, "{q}"),
            Order::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Order::Infinity),
            other => other
                .parse::<f64>()
                .map(Order::new)
                .map_err(|_| Error::Parse(format!("invalid order `{s}`"))),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Order::Finite(q) => s.serialize_f64(*q),
            Order::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(q) => Ok(Order::new(q)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Non-negative reals sorted in descending order, together with their sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumVector {
    values: Vec<f64>,
    total: f64,
}

impl SpectrumVector {
    /// Sorts the values in descending order. Negative inputs are rejected.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::domain(format!(
                "spectrum entries must be finite and non-negative, got {bad}"
            )));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        let total = values.iter().sum();
        Ok(SpectrumVector { values, total })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Largest entry, zero for an empty spectrum.
    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of entries above `cutoff · largest`.
    pub fn rank(&self, cutoff: f64) -> usize {
        let floor = cutoff * self.largest();
        self.values.iter().filter(|v| **v > floor).count()
    }

    /// Probability vector `values / total`, with entries below
    /// [`ZERO_CUTOFF`]` · largest` set to exact zeros. Empty when the total is
    /// zero.
    pub fn normalized(&self) -> Vec<f64> {
        let floor = ZERO_CUTOFF * self.largest();
        let kept: f64 = self.values.iter().filter(|v| **v > floor).sum();
        if kept <= 0.0 {
            return Vec::new();
        }
        self.values
            .iter()
            .map(|v| if *v > floor { v / kept } else { 0.0 })
            .collect()
    }
}

/// A bijection on the `rows · cols` entry positions of a matrix, read as
/// "output entry `j` takes input entry `mapping[j]`" in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationMap {
    mapping: Vec<usize>,
}

impl PermutationMap {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &target in &mapping {
            if target >= mapping.len() || seen[target] {
                return Err(Error::domain(format!(
                    "mapping is not a bijection on 0..{} (index {target})",
                    mapping.len()
                )));
            }
            seen[target] = true;
        }
        Ok(PermutationMap { mapping })
    }

    pub fn identity(size: usize) -> Self {
        PermutationMap {
            mapping: (0..size).collect(),
        }
    }

    /// The reshuffle `(M^R)_{(k,m),(l,n)} = M_{(k,l),(m,n)}` on `N² × N²`
    /// matrices, as an entry permutation.
    pub fn reshuffle(n: usize) -> Self {
        let side = n * n;
        let mut mapping = vec![0; side * side];
        for k in 0..n {
            for m in 0..n {
                for l in 0..n {
                    for nn in 0..n {
                        let out = (k * n + m) * side + (l * n + nn);
                        mapping[out] = (k * n + l) * side + (m * n + nn);
                    }
                }
            }
        }
        PermutationMap { mapping }
    }

    pub fn size(&self) -> usize {
        self.mapping.len()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }
}

/// Reshuffle of an `N² × N²` matrix: `(M^R)_{(k,m),(l,n)} = M_{(k,l),(m,n)}`.
/// This is an involution and maps a superoperator to its dynamical matrix.
pub fn reshuffle(m: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    let side = n * n;
    if n == 0 || m.nrows() != side || m.ncols() != side {
        return Err(Error::dimension(format!(
            "reshuffle with N = {n} needs a {side}x{side} matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(ComplexMatrix::from_fn(side, side, |row, col| {
        let (k, mm) = (row / n, row % n);
        let (l, nn) = (col / n, col % n);
        m[(k * n + l, mm * n + nn)]
    }))
}

/// Entry `j` (row-major) of the output equals entry `π(j)` of `m`.
pub fn reorder(m: &ComplexMatrix, pi: &PermutationMap) -> Result<ComplexMatrix> {
    let (rows, cols) = m.shape();
    if pi.size() != rows * cols {
        return Err(Error::dimension(format!(
            "permutation of size {} applied to a {rows}x{cols} matrix",
            pi.size()
        )));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |r, c| {
        let src = pi.mapping[r * cols + c];
        m[(src / cols, src % cols)]
    }))
}

/// Descending singular values.
pub fn singular_values(m: &ComplexMatrix) -> Result<SpectrumVector> {
    check_finite(m)?;
    if m.is_empty() {
        return SpectrumVector::new(Vec::new());
    }
    let svd = m
        .clone()
        .try_svd(false, false, EIG_EPS, MAX_SWEEPS)
        .ok_or_else(|| {
            Error::Numerical(format!(
                "SVD of a {}x{} matrix did not converge",
                m.nrows(),
                m.ncols()
            ))
        })?;
    // Roundoff can leave -0.0 behind.
    SpectrumVector::new(svd.singular_values.iter().map(|s| s.max(0.0)).collect())
}

/// Real eigenvalues of a Hermitian matrix in descending order (possibly
/// negative). The input is symmetrised as `(H + H†)/2` after the Hermiticity
/// check.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(h)?.0)
}

/// Eigenvalues (descending) and the matching orthonormal eigenvectors as
/// columns.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    check_finite(h)?;
    if !h.is_square() {
        return Err(Error::dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let deviation = hermiticity_defect(h);
    if deviation > HERM_TOL {
        return Err(Error::validation(
            "matrix is not Hermitian within tolerance (relative ‖H − H†‖₂)",
            deviation,
        ));
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let n = sym.nrows();
    let eig = sym
        .try_symmetric_eigen(EIG_EPS, MAX_SWEEPS)
        .ok_or_else(|| {
            Error::Numerical(format!("eigendecomposition of {n}x{n} did not converge"))
        })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Relative Hermiticity defect `‖H − H†‖₂ / ‖H‖₂` (zero for the zero matrix).
pub fn hermiticity_defect(h: &ComplexMatrix) -> f64 {
    let scale = h.norm();
    if scale == 0.0 {
        return 0.0;
    }
    (h - h.adjoint()).norm() / scale
}

/// Schatten q-norm `(Σ xᵢ^q)^{1/q}` over the singular values.
pub fn q_norm(m: &ComplexMatrix, q: Order) -> Result<f64> {
    let sv = singular_values(m)?;
    vector_q_norm(sv.values(), q)
}

/// ℓ_q norm of a non-negative vector; `q = ∞` is the maximum.
pub fn vector_q_norm(x: &[f64], q: Order) -> Result<f64> {
    match q {
        Order::Infinity => Ok(x.iter().fold(0.0_f64, |a, b| a.max(b.abs()))),
        Order::Finite(q) if q >= 1.0 => {
            if q == 1.0 {
                return Ok(x.iter().map(|v| v.abs()).sum());
            }
            // Scale by the maximum to keep large q from overflowing.
            let peak = x.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
            if peak == 0.0 {
                return Ok(0.0);
            }
            let s: f64 = x.iter().map(|v| (v.abs() / peak).powf(q)).sum();
            Ok(peak * s.powf(1.0 / q))
        }
        Order::Finite(q) => Err(Error::domain(format!("norm order must be ≥ 1, got {q}"))),
    }
}

/// Hilbert–Schmidt (Frobenius) norm.
pub fn hs_norm(m: &ComplexMatrix) -> f64 {
    m.norm()
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// `A ⊗ B` with `(A⊗B)_{(i,k),(j,l)} = A_{ij} B_{kl}`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Row-major vectorisation `|res(M)⟩`.
pub fn vec_row_major(m: &ComplexMatrix) -> ComplexVector {
    let cols = m.ncols();
    ComplexVector::from_fn(m.nrows() * cols, |i, _| m[(i / cols, i % cols)])
}

/// Inverse of [`vec_row_major`].
pub fn unvec_row_major(v: &ComplexVector, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    if v.len() != rows * cols {
        return Err(Error::dimension(format!(
            "cannot reshape a vector of length {} into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |r, c| v[r * cols + c]))
}

fn check_bipartite(m: &ComplexMatrix, n: usize) -> Result<()> {
    if n == 0 || m.nrows() != n * n || m.ncols() != n * n {
        return Err(Error::dimension(format!(
            "expected a {0}x{0} bipartite operator, got {1}x{2}",
            n * n,
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Trace over the first factor of an `N ⊗ N` operator.
pub fn partial_trace_first(m: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    check_bipartite(m, n)?;
    Ok(ComplexMatrix::from_fn(n, n, |b, bp| {
        (0..n).map(|a| m[(a * n + b, a * n + bp)]).sum()
    }))
}

/// Trace over the second factor of an `N ⊗ N` operator.
pub fn partial_trace_second(m: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    check_bipartite(m, n)?;
    Ok(ComplexMatrix::from_fn(n, n, |a, ap| {
        (0..n).map(|b| m[(a * n + b, ap * n + b)]).sum()
    }))
}

/// Transpose on the second factor: `out_{(a,b),(a',b')} = m_{(a,b'),(a',b)}`.
pub fn partial_transpose_second(m: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    check_bipartite(m, n)?;
    Ok(ComplexMatrix::from_fn(n * n, n * n, |r, c| {
        let (a, b) = (r / n, r % n);
        let (ap, bp) = (c / n, c % n);
        m[(a * n + bp, ap * n + b)]
    }))
}

/// Square root of a positive semi-definite matrix; eigenvalues below zero
/// (roundoff) are clamped.
pub fn sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(m)?;
    let roots = DVector::from_iterator(
        values.len(),
        values.iter().map(|v| C64::new(v.max(0.0).sqrt(), 0.0)),
    );
    Ok(&vectors * ComplexMatrix::from_diagonal(&roots) * vectors.adjoint())
}

pub(crate) fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::domain("matrix has non-finite entries"))
    }
}

/// Real trace of a square matrix.
pub fn trace_re(m: &ComplexMatrix) -> f64 {
    m.trace().re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn corners() -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(4, 4);
        for (r, col) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            m[(r, col)] = c(1.0);
        }
        m
    }

    fn sample(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        // Small LCG so this module's tests stay independent of the sampler.
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let mut next = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        ComplexMatrix::from_fn(rows, cols, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn reshuffle_maps_identity_to_corner_matrix() {
        let g = identity(4);
        assert_eq!(reshuffle(&g, 2).unwrap(), corners());
    }

    #[test]
    fn reshuffle_is_an_involution() {
        let m = sample(9, 9, 3);
        let back = reshuffle(&reshuffle(&m, 3).unwrap(), 3).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn reshuffle_rejects_bad_shapes() {
        assert!(matches!(
            reshuffle(&sample(4, 4, 1), 3),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            reshuffle(&sample(4, 3, 1), 2),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn reshuffle_permutation_agrees_with_reshuffle() {
        for n in 2..=3 {
            let m = sample(n * n, n * n, n as u64);
            let via_map = reorder(&m, &PermutationMap::reshuffle(n)).unwrap();
            assert_eq!(via_map, reshuffle(&m, n).unwrap());
        }
    }

    #[test]
    fn identity_permutation_is_a_no_op() {
        let m = sample(3, 5, 9);
        assert_eq!(reorder(&m, &PermutationMap::identity(15)).unwrap(), m);
        assert!(reorder(&m, &PermutationMap::identity(14)).is_err());
    }

    #[test]
    fn permutation_must_be_bijective() {
        assert!(PermutationMap::new(vec![0, 1, 1]).is_err());
        assert!(PermutationMap::new(vec![0, 3, 1]).is_err());
        assert!(PermutationMap::new(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn singular_values_of_corner_matrix() {
        let sv = singular_values(&corners()).unwrap();
        let expected = [2.0, 0.0, 0.0, 0.0];
        for (a, b) in sv.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((q_norm(&corners(), Order::ONE).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unitary_has_unit_singular_values() {
        let s = 0.5_f64.sqrt();
        let h = ComplexMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)]);
        let u = kron(
            &h,
            &ComplexMatrix::from_row_slice(2, 2, &[c(0.0), C64::i(), C64::i(), c(0.0)]),
        );
        for v in singular_values(&u).unwrap().values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        for v in singular_values(&identity(5)).unwrap().values() {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn hermitian_eigenvalues_are_descending() {
        let d =
            ComplexMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(0.0), c(0.0), c(1.0)]));
        assert_eq!(hermitian_eigenvalues(&d).unwrap(), vec![1.0, 1.0, 0.0, 0.0]);
        let half = identity(4).scale(0.5);
        for v in hermitian_eigenvalues(&half).unwrap() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let m = sample(3, 3, 4);
        assert!(matches!(
            hermitian_eigenvalues(&m),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn frobenius_is_the_two_norm() {
        let m = sample(6, 6, 11);
        assert!((q_norm(&m, Order::TWO).unwrap() - hs_norm(&m)).abs() < 1e-12 * hs_norm(&m));
    }

    #[test]
    fn norm_order_below_one_is_a_domain_error() {
        assert!(matches!(
            q_norm(&identity(2), Order::Finite(0.5)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn norms_decrease_with_order() {
        let m = sample(5, 5, 21);
        let orders = [1.0, 1.5, 2.0, 4.0, f64::INFINITY].map(Order::new);
        let norms: Vec<f64> = orders.iter().map(|q| q_norm(&m, *q).unwrap()).collect();
        for w in norms.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
    }

    #[test]
    fn partial_operations_on_product_operator() {
        let a = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(0.7), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.3)],
        );
        let b = ComplexMatrix::from_row_slice(2, 2, &[c(0.4), c(0.0), c(0.0), c(0.6)]);
        let ab = kron(&a, &b);
        assert!((partial_trace_first(&ab, 2).unwrap() - &b).norm() < 1e-15);
        assert!((partial_trace_second(&ab, 2).unwrap() - &a).norm() < 1e-15);
        let pt = partial_transpose_second(&ab, 2).unwrap();
        assert!((pt - kron(&a, &b.transpose())).norm() < 1e-15);
    }

    #[test]
    fn vectorisation_round_trips() {
        let m = sample(3, 4, 5);
        let v = vec_row_major(&m);
        assert_eq!(v[1], m[(0, 1)]);
        assert_eq!(v[4], m[(1, 0)]);
        assert_eq!(unvec_row_major(&v, 3, 4).unwrap(), m);
    }

    #[test]
    fn order_parsing() {
        assert_eq!("inf".parse::<Order>().unwrap(), Order::Infinity);
        assert_eq!("1.5".parse::<Order>().unwrap(), Order::Finite(1.5));
        assert!("x".parse::<Order>().is_err());
        assert!(Order::Finite(1.0 + 1e-8).is_shannon());
    }

    #[test]
    fn spectrum_normalisation_drops_roundoff() {
        let s = SpectrumVector::new(vec![1e-15, 2.0, 2.0]).unwrap();
        assert_eq!(s.values(), &[2.0, 2.0, 1e-15]);
        assert_eq!(s.normalized(), vec![0.5, 0.5, 0.0]);
        assert_eq!(s.rank(1e-12), 2);
        assert!(SpectrumVector::new(vec![-1.0]).is_err());
    }
}
