//! Dense complex matrices, Hermitian eigendecomposition, singular values and
//! the unitarily invariant norms built on them.
//!
//! Everything here is a thin, validated layer over `nalgebra`. Operator
//! overloads (`&a * &b`, `&a + &b`) panic on shape mismatch exactly like the
//! underlying `nalgebra` types; the named operations (`hs_inner`,
//! `matrix_inverse`, ...) check shapes and return [`Error`] instead.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for Hermitian/PSD/normalization predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default condition-number bound for [`matrix_inverse`].
pub const DEFAULT_MAX_CONDITION: f64 = 1e12;

const DECOMPOSITION_MAX_ITERS: usize = 10_000;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix stored by `nalgebra`; serialized row-major as
/// `{"rows", "cols", "re", "im"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let n = j.rows * j.cols;
        if j.re.len() != n || j.im.len() != n {
            return Err(Error::Parse(format!(
                "matrix {}x{} needs {} entries, got re={} im={}",
                j.rows,
                j.cols,
                n,
                j.re.len(),
                j.im.len()
            )));
        }
        let entries = j
            .re
            .iter()
            .zip(&j.im)
            .map(|(&re, &im)| Complex64::new(re, im))
            .collect();
        ComplexMatrix::new(j.rows, j.cols, entries)
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        let entries = m.row_major();
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            re: entries.iter().map(|z| z.re).collect(),
            im: entries.iter().map(|z| z.im).collect(),
        }
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Rebuilds `V diag(f(λ)) V†`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.vectors.inner;
        let n = self.values.len();
        let mut scaled = v.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let s = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        ComplexMatrix::from_nalgebra(scaled * v.adjoint())
    }
}

/// Outcome of a positive-semidefiniteness test. `min_eigenvalue` is the raw
/// value before any clamping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdCheck {
    pub hermitian_residual: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub is_psd: bool,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::Shape {
                context: "ComplexMatrix::new",
                detail: format!("{rows}x{cols} needs {} entries, got {}", rows * cols, entries.len()),
            });
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, &entries),
        })
    }

    pub fn from_nalgebra(inner: DMatrix<Complex64>) -> Self {
        Self { inner }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self {
            inner: DMatrix::from_fn(rows, cols, f),
        }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Self {
        Self {
            inner: m.map(|x| Complex64::new(x, 0.0)),
        }
    }

    /// Real matrix from row-major entries; panics on length mismatch.
    pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(rows * cols, entries.len(), "from_real_rows: length mismatch");
        Self::from_fn(rows, cols, |i, j| Complex64::new(entries[i * cols + j], 0.0))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { ZERO })
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_nalgebra(self) -> DMatrix<Complex64> {
        self.inner
    }

    pub fn row_major(&self) -> Vec<Complex64> {
        let (r, c) = (self.rows(), self.cols());
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            inner: self.inner.map(|z| z * s),
        }
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self {
            inner: self.inner.map(|z| z * s),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.kronecker(&other.inner),
        }
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols(), v.len(), "mul_vec: length mismatch");
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.inner[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.inner.shape(), other.inner.shape(), "max_abs_diff: shape mismatch");
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.inner.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.inner.map(|z| z.re)
    }

    /// `max |M − M†|` entrywise; infinite for non-square input.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self {
            inner: (&self.inner + self.inner.adjoint()) * Complex64::new(0.5, 0.0),
        }
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Eigendecomposition of the Hermitian part of `self`.
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen> {
        if !self.is_square() {
            return Err(Error::Shape {
                context: "hermitian_eigen",
                detail: format!("{}x{} is not square", self.rows(), self.cols()),
            });
        }
        let h = self.hermitian_part().inner;
        let eig = SymmetricEigen::try_new(h, f64::EPSILON, DECOMPOSITION_MAX_ITERS)
            .ok_or(Error::NonConvergence("Hermitian eigendecomposition"))?;
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let n = self.rows();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(HermitianEigen {
            values,
            vectors: Self::from_nalgebra(vectors),
        })
    }

    pub fn eigenvalues_hermitian(&self) -> Result<Vec<f64>> {
        Ok(self.hermitian_eigen()?.values)
    }

    pub fn psd_check(&self, tol: f64) -> Result<PsdCheck> {
        let hermitian_residual = self.hermitian_residual();
        let values = self.eigenvalues_hermitian()?;
        let min_eigenvalue = values.first().copied().unwrap_or(0.0);
        let max_eigenvalue = values.last().copied().unwrap_or(0.0);
        Ok(PsdCheck {
            hermitian_residual,
            min_eigenvalue,
            max_eigenvalue,
            is_psd: hermitian_residual <= tol && min_eigenvalue >= -tol,
        })
    }

    /// Principal square root of a PSD matrix. Eigenvalues in `[-tol, 0)` are
    /// clamped to zero; anything below `-tol` is an error.
    pub fn sqrt_psd(&self, tol: f64) -> Result<Self> {
        let eig = self.hermitian_eigen()?;
        check_floor(&eig.values, tol)?;
        Ok(eig.map_values(|l| l.max(0.0).sqrt()))
    }

    /// `M^{-1/2}` for positive-definite `M`.
    pub fn inv_sqrt_pd(&self) -> Result<Self> {
        let eig = self.hermitian_eigen()?;
        let min = eig.values.first().copied().unwrap_or(0.0);
        let max = eig.values.last().copied().unwrap_or(0.0);
        if min <= 0.0 || max / min > DEFAULT_MAX_CONDITION {
            return Err(Error::IllConditioned {
                condition: if min <= 0.0 { f64::INFINITY } else { max / min },
                bound: DEFAULT_MAX_CONDITION,
            });
        }
        Ok(eig.map_values(|l| 1.0 / l.sqrt()))
    }
}

fn check_floor(values: &[f64], tol: f64) -> Result<()> {
    match values.first() {
        Some(&min) if min < -tol => Err(Error::InvalidObject {
            kind: "matrix",
            predicate: "positive semidefinite",
            magnitude: -min,
        }),
        _ => Ok(()),
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

/// Hilbert–Schmidt inner product `tr(a† b)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() || !b.is_square() {
        return Err(Error::Shape {
            context: "hs_inner",
            detail: "operands must be square".into(),
        });
    }
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch {
            context: "hs_inner",
            expected: a.rows(),
            found: b.rows(),
        });
    }
    Ok(a.inner.iter().zip(b.inner.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Singular values, descending, `min(rows, cols)` of them.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(Vec::new());
    }
    let svd = m
        .inner
        .clone()
        .try_svd(false, false, f64::EPSILON, DECOMPOSITION_MAX_ITERS)
        .ok_or(Error::NonConvergence("singular value decomposition"))?;
    let mut values: Vec<f64> = svd.singular_values.iter().map(|s| s.max(0.0)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// 2-norm condition number `σ_max / σ_min`; infinite when singular.
pub fn condition_number(m: &ComplexMatrix) -> Result<f64> {
    let s = singular_values(m)?;
    match (s.first(), s.last()) {
        (Some(&max), Some(&min)) if min > 0.0 => Ok(max / min),
        (Some(_), Some(_)) => Ok(f64::INFINITY),
        _ => Ok(1.0),
    }
}

pub fn matrix_inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    matrix_inverse_with(m, DEFAULT_MAX_CONDITION)
}

/// Inverse of a square matrix whose condition number is below `max_condition`.
pub fn matrix_inverse_with(m: &ComplexMatrix, max_condition: f64) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::Shape {
            context: "matrix_inverse",
            detail: format!("{}x{} is not square", m.rows(), m.cols()),
        });
    }
    let condition = condition_number(m)?;
    if !(condition <= max_condition) {
        return Err(Error::IllConditioned {
            condition,
            bound: max_condition,
        });
    }
    let inv = m.inner.clone().try_inverse().ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
        bound: max_condition,
    })?;
    Ok(ComplexMatrix::from_nalgebra(inv))
}

/// A unitarily invariant norm, i.e. a symmetric gauge function of the
/// singular values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "lowercase")]
pub enum NormSpec {
    Trace,
    Frobenius,
    Operator,
    Schatten(f64),
    KyFan(usize),
}

impl NormSpec {
    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        match *self {
            NormSpec::Schatten(p) if !(p.is_finite() && p >= 1.0) => {
                Err(Error::InvalidNorm(format!("schatten p must be finite and >= 1, got {p}")))
            }
            NormSpec::KyFan(k) if k == 0 || k > rows.min(cols) => Err(Error::InvalidNorm(format!(
                "kyfan k must lie in 1..={}, got {k}",
                rows.min(cols)
            ))),
            _ => Ok(()),
        }
    }

    /// Evaluates the norm on a descending list of singular values.
    pub fn from_singular_values(&self, s: &[f64]) -> f64 {
        match *self {
            NormSpec::Trace => s.iter().sum(),
            NormSpec::Frobenius => s.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormSpec::Operator => s.first().copied().unwrap_or(0.0),
            NormSpec::Schatten(p) => s.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p),
            NormSpec::KyFan(k) => s.iter().take(k).sum(),
        }
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Trace => write!(f, "trace"),
            NormSpec::Frobenius => write!(f, "frobenius"),
            NormSpec::Operator => write!(f, "operator"),
            NormSpec::Schatten(p) => write!(f, "schatten:{p}"),
            NormSpec::KyFan(k) => write!(f, "kyfan:{k}"),
        }
    }
}

/// Accepts `trace`, `frobenius`, `operator`, `schatten:P` / `schatten(P)`
/// and `kyfan:K` / `kyfan(K)`.
impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, arg) = match s.find([':', '(']) {
            Some(pos) => (&s[..pos], Some(s[pos + 1..].trim_end_matches(')'))),
            None => (s.as_str(), None),
        };
        let bad = || Error::InvalidNorm(format!("cannot parse norm '{s}'"));
        let spec = match (name, arg) {
            ("trace", None) => NormSpec::Trace,
            ("frobenius", None) => NormSpec::Frobenius,
            ("operator", None) => NormSpec::Operator,
            ("schatten", Some(a)) => NormSpec::Schatten(a.parse().map_err(|_| bad())?),
            ("kyfan", Some(a)) => NormSpec::KyFan(a.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        if let NormSpec::Schatten(p) = spec {
            if !(p.is_finite() && p >= 1.0) {
                return Err(Error::InvalidNorm(format!("schatten p must be finite and >= 1, got {p}")));
            }
        }
        if spec == NormSpec::KyFan(0) {
            return Err(Error::InvalidNorm("kyfan k must be positive".into()));
        }
        Ok(spec)
    }
}

pub fn ui_norm(m: &ComplexMatrix, spec: NormSpec) -> Result<f64> {
    spec.validate(m.rows(), m.cols())?;
    Ok(spec.from_singular_values(&singular_values(m)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&[1.0, -1.0])
    }

    /// I − Φ for the d = 2 SIC: −2I + J/2.
    fn i_minus_phi_sic2() -> ComplexMatrix {
        let mut e = vec![0.5; 16];
        for i in 0..4 {
            e[i * 4 + i] -= 2.0;
        }
        ComplexMatrix::from_real_rows(4, 4, &e)
    }

    #[test]
    fn new_rejects_length_mismatch() {
        assert!(ComplexMatrix::new(2, 2, vec![ONE; 3]).is_err());
    }

    #[test]
    fn hs_inner_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_abs_diff_eq!(hs_inner(&i2, &i2).unwrap().re, 2.0);
        assert_abs_diff_eq!(hs_inner(&pauli_x(), &pauli_z()).unwrap().norm(), 0.0);
        assert!(matches!(
            hs_inner(&i2, &ComplexMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hs_inner_conjugate_symmetric() {
        let a = ComplexMatrix::new(2, 2, vec![c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.5), c(-2.0, 0.0)]).unwrap();
        let b = ComplexMatrix::new(2, 2, vec![c(0.3, 0.0), c(1.0, 1.0), c(0.0, 2.0), c(1.0, -4.0)]).unwrap();
        let ab = hs_inner(&a, &b).unwrap();
        let ba = hs_inner(&b, &a).unwrap();
        assert_abs_diff_eq!((ab - ba.conj()).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn singular_values_examples() {
        let s = singular_values(&ComplexMatrix::from_diagonal(&[3.0, -4.0])).unwrap();
        assert_abs_diff_eq!(s[0], 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1], 3.0, epsilon = 1e-12);

        // Oracle: −2I + J/2 has eigenvalues −2 (x3) and 0; singular values are |λ|.
        let s = singular_values(&i_minus_phi_sic2()).unwrap();
        for (got, want) in s.iter().zip([2.0, 2.0, 2.0, 0.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }

        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let dft = ComplexMatrix::from_fn(3, 3, |i, j| w.powu((i * j) as u32) / 3f64.sqrt());
        for s in singular_values(&dft).unwrap() {
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn singular_values_rectangular_length() {
        let m = ComplexMatrix::from_real_rows(2, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0]);
        let s = singular_values(&m).unwrap();
        assert_eq!(s.len(), 2);
        assert_abs_diff_eq!(s[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn ui_norm_examples() {
        assert_abs_diff_eq!(
            ui_norm(&ComplexMatrix::identity(2), NormSpec::Frobenius).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            ui_norm(&ComplexMatrix::from_diagonal(&[3.0, -4.0, 0.0]), NormSpec::Trace).unwrap(),
            7.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            ui_norm(&i_minus_phi_sic2(), NormSpec::Frobenius).unwrap(),
            2.0 * 3f64.sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(ui_norm(&i_minus_phi_sic2(), NormSpec::KyFan(2)).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn ui_norm_rejects_invalid_specs() {
        let m = ComplexMatrix::identity(3);
        assert!(ui_norm(&m, NormSpec::Schatten(0.5)).is_err());
        assert!(ui_norm(&m, NormSpec::Schatten(f64::INFINITY)).is_err());
        assert!(ui_norm(&m, NormSpec::KyFan(0)).is_err());
        assert!(ui_norm(&m, NormSpec::KyFan(4)).is_err());
        assert!(ui_norm(&m, NormSpec::KyFan(3)).is_ok());
    }

    #[test]
    fn norm_spec_parsing() {
        assert_eq!("trace".parse::<NormSpec>().unwrap(), NormSpec::Trace);
        assert_eq!("Frobenius".parse::<NormSpec>().unwrap(), NormSpec::Frobenius);
        assert_eq!("schatten:3".parse::<NormSpec>().unwrap(), NormSpec::Schatten(3.0));
        assert_eq!("schatten(2.5)".parse::<NormSpec>().unwrap(), NormSpec::Schatten(2.5));
        assert_eq!("kyfan(2)".parse::<NormSpec>().unwrap(), NormSpec::KyFan(2));
        assert!("kyfan:0".parse::<NormSpec>().is_err());
        assert!("schatten:0.2".parse::<NormSpec>().is_err());
        assert!("nuclear".parse::<NormSpec>().is_err());
        for spec in [NormSpec::Trace, NormSpec::Schatten(3.0), NormSpec::KyFan(2)] {
            assert_eq!(spec.to_string().parse::<NormSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn inverse_examples() {
        let i4 = ComplexMatrix::identity(4);
        assert_abs_diff_eq!(matrix_inverse(&i4).unwrap().max_abs_diff(&i4), 0.0);
        let inv = matrix_inverse(&ComplexMatrix::from_diagonal(&[2.0, 4.0])).unwrap();
        assert_abs_diff_eq!(
            inv.max_abs_diff(&ComplexMatrix::from_diagonal(&[0.5, 0.25])),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn inverse_rejects_singular_and_ill_conditioned() {
        let singular = ComplexMatrix::from_real_rows(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(matrix_inverse(&singular), Err(Error::IllConditioned { .. })));
        let ill = ComplexMatrix::from_diagonal(&[1.0, 1e-8]);
        match matrix_inverse_with(&ill, 1e6) {
            Err(Error::IllConditioned { condition, .. }) => assert_abs_diff_eq!(condition, 1e8, epsilon = 1.0),
            other => panic!("expected ill-conditioned error, got {other:?}"),
        }
    }

    #[test]
    fn sic_gram_inverse_oracle() {
        // Gram tr(R_i σ_j) for the d = 2 SIC with σ = 2R: 1/2 on the diagonal,
        // 1/6 off it. Its inverse is 3I − J/2.
        let mut g = vec![1.0 / 6.0; 16];
        for i in 0..4 {
            g[i * 4 + i] = 0.5;
        }
        let inv = matrix_inverse(&ComplexMatrix::from_real_rows(4, 4, &g)).unwrap();
        let mut want = vec![-0.5; 16];
        for i in 0..4 {
            want[i * 4 + i] = 2.5;
        }
        assert_abs_diff_eq!(inv.max_abs_diff(&ComplexMatrix::from_real_rows(4, 4, &want)), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn psd_check_reports_raw_minimum() {
        let m = ComplexMatrix::from_diagonal(&[1.0, -1e-12]);
        let check = m.psd_check(1e-9).unwrap();
        assert!(check.is_psd);
        assert_abs_diff_eq!(check.min_eigenvalue, -1e-12);
        let sqrt = m.sqrt_psd(1e-9).unwrap();
        assert_abs_diff_eq!(sqrt.get(1, 1).re, 0.0);

        let bad = ComplexMatrix::from_diagonal(&[1.0, -1e-3]);
        assert!(!bad.psd_check(1e-9).unwrap().is_psd);
        assert!(bad.sqrt_psd(1e-9).is_err());
    }

    #[test]
    fn hermitian_predicate() {
        let h = ComplexMatrix::new(2, 2, vec![ONE, c(0.0, 1.0), c(0.0, -1.0), ONE]).unwrap();
        assert!(h.is_hermitian(1e-12));
        let nh = ComplexMatrix::new(2, 2, vec![ONE, c(0.0, 1.0), c(0.0, 1.0), ONE]).unwrap();
        assert!(!nh.is_hermitian(1e-12));
        assert!(!ComplexMatrix::zeros(2, 3).is_hermitian(1.0));
    }

    #[test]
    fn json_format() {
        let m = ComplexMatrix::new(1, 2, vec![c(1.0, 2.0), c(3.0, -4.0)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"re":[1.0,3.0],"im":[2.0,-4.0]}"#);
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"re":[1,2,3],"im":[0,0,0,0]}"#).is_err());
    }
}
