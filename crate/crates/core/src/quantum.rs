//! Validated quantum primitives and the operator form of the Born rule.
//!
//! Every constructor checks its invariants and fails with
//! [`Error::InvalidObject`] naming the violated predicate. Only unitary
//! evolution is modelled; general completely positive trace-preserving maps
//! admit the same probability-form treatment but are not implemented here.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{hs_inner, ComplexMatrix, DEFAULT_TOL, ZERO};
use crate::probability::ProbVector;

fn invalid(kind: &'static str, predicate: &'static str, magnitude: f64) -> Error {
    Error::InvalidObject {
        kind,
        predicate,
        magnitude,
    }
}

fn require_square(kind: &'static str, m: &ComplexMatrix) -> Result<usize> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::Shape {
            context: kind,
            detail: format!("{}x{} is not a non-empty square matrix", m.rows(), m.cols()),
        });
    }
    Ok(m.rows())
}

fn require_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

/// Kronecker product.
pub trait Tensor {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for ComplexMatrix {
    fn tensor(&self, other: &Self) -> Self {
        self.kron(other)
    }
}

/// A normalized state vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KetJson", into = "KetJson")]
pub struct Ket {
    amplitudes: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct KetJson {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<KetJson> for Ket {
    type Error = Error;
    fn try_from(j: KetJson) -> Result<Self> {
        if j.re.len() != j.im.len() {
            return Err(Error::Parse(format!(
                "ket has {} real and {} imaginary parts",
                j.re.len(),
                j.im.len()
            )));
        }
        Ket::new(j.re.iter().zip(&j.im).map(|(&r, &i)| Complex64::new(r, i)).collect())
    }
}

impl From<Ket> for KetJson {
    fn from(k: Ket) -> Self {
        KetJson {
            re: k.amplitudes.iter().map(|z| z.re).collect(),
            im: k.amplitudes.iter().map(|z| z.im).collect(),
        }
    }
}

impl Ket {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::with_tol(amplitudes, DEFAULT_TOL)
    }

    pub fn with_tol(amplitudes: Vec<Complex64>, tol: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(invalid("Ket", "non-empty", 0.0));
        }
        let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !((norm_sqr - 1.0).abs() <= tol) {
            return Err(invalid("Ket", "unit norm", (norm_sqr - 1.0).abs()));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid("Ket", "nonzero finite vector", norm));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z / norm).collect(),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// `(|0⟩ ± |1⟩)/√2`.
    pub fn plus() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { amplitudes: vec![h, h] }
    }

    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            amplitudes: vec![Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "Ket::inner: dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            matrix: self.projector(),
        }
    }
}

impl Tensor for Ket {
    fn tensor(&self, other: &Self) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Self { amplitudes }
    }
}

/// A density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorJson", into = "OperatorJson")]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

/// `{"dim": d, "matrix": {...}}` wrapper shared by states and effects.
#[derive(Serialize, Deserialize)]
struct OperatorJson {
    dim: usize,
    matrix: ComplexMatrix,
}

impl TryFrom<OperatorJson> for DensityOperator {
    type Error = Error;
    fn try_from(j: OperatorJson) -> Result<Self> {
        let rho = DensityOperator::new(j.matrix)?;
        require_dim("DensityOperator JSON", j.dim, rho.dim())?;
        Ok(rho)
    }
}

impl From<DensityOperator> for OperatorJson {
    fn from(r: DensityOperator) -> Self {
        OperatorJson {
            dim: r.dim(),
            matrix: r.matrix,
        }
    }
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tol(matrix, DEFAULT_TOL)
    }

    pub fn with_tol(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        require_square("DensityOperator", &matrix)?;
        let check = matrix.psd_check(tol)?;
        if check.hermitian_residual > tol {
            return Err(invalid("DensityOperator", "Hermitian", check.hermitian_residual));
        }
        if check.min_eigenvalue < -tol {
            return Err(invalid("DensityOperator", "positive semidefinite", -check.min_eigenvalue));
        }
        let trace_error = (matrix.trace() - Complex64::new(1.0, 0.0)).norm();
        if !(trace_error <= tol) {
            return Err(invalid("DensityOperator", "unit trace", trace_error));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.matrix.eigenvalues_hermitian()
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        hs_inner(&self.matrix, &self.matrix).map(|z| z.re).unwrap_or(f64::NAN)
    }

    /// `λ·self + (1 − λ)·other`.
    pub fn mix(&self, lambda: f64, other: &DensityOperator) -> Result<Self> {
        require_dim("DensityOperator::mix", self.dim(), other.dim())?;
        if !(0.0..=1.0).contains(&lambda) {
            return Err(invalid("DensityOperator", "mixing weight in [0, 1]", lambda));
        }
        Self::new(&self.matrix.scale(lambda) + &other.matrix.scale(1.0 - lambda))
    }
}

impl Tensor for DensityOperator {
    fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kron(&other.matrix),
        }
    }
}

/// A POVM element: `0 ≤ E ≤ I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct Effect {
    matrix: ComplexMatrix,
}

impl TryFrom<ComplexMatrix> for Effect {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Effect::new(m)
    }
}

impl From<Effect> for ComplexMatrix {
    fn from(e: Effect) -> Self {
        e.matrix
    }
}

impl Effect {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tol(matrix, DEFAULT_TOL)
    }

    pub fn with_tol(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        require_square("Effect", &matrix)?;
        let check = matrix.psd_check(tol)?;
        if check.hermitian_residual > tol {
            return Err(invalid("Effect", "Hermitian", check.hermitian_residual));
        }
        if check.min_eigenvalue < -tol {
            return Err(invalid("Effect", "positive semidefinite", -check.min_eigenvalue));
        }
        if check.max_eigenvalue > 1.0 + tol {
            return Err(invalid("Effect", "max eigenvalue <= 1", check.max_eigenvalue - 1.0));
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn projector(ket: &Ket) -> Self {
        Self {
            matrix: ket.projector(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// A complete measurement. The number of effects is independent of the
/// dimension and effects need not be orthogonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmJson", into = "PovmJson")]
pub struct Povm {
    dim: usize,
    effects: Vec<Effect>,
}

#[derive(Serialize, Deserialize)]
struct PovmJson {
    dim: usize,
    effects: Vec<Effect>,
}

impl TryFrom<PovmJson> for Povm {
    type Error = Error;
    fn try_from(j: PovmJson) -> Result<Self> {
        let povm = Povm::new(j.effects)?;
        require_dim("Povm JSON", j.dim, povm.dim)?;
        Ok(povm)
    }
}

impl From<Povm> for PovmJson {
    fn from(p: Povm) -> Self {
        PovmJson {
            dim: p.dim,
            effects: p.effects,
        }
    }
}

impl Povm {
    pub fn new(effects: Vec<Effect>) -> Result<Self> {
        Self::with_tol(effects, DEFAULT_TOL)
    }

    pub fn with_tol(effects: Vec<Effect>, tol: f64) -> Result<Self> {
        let dim = effects
            .first()
            .map(Effect::dim)
            .ok_or_else(|| invalid("Povm", "at least one effect", 0.0))?;
        for e in &effects {
            require_dim("Povm effects", dim, e.dim())?;
        }
        let residual = completeness_residual(dim, &effects);
        if !(residual <= tol) {
            return Err(invalid("Povm", "effects sum to identity", residual));
        }
        Ok(Self { dim, effects })
    }

    pub fn from_matrices(matrices: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(matrices.into_iter().map(Effect::new).collect::<Result<_>>()?)
    }

    /// Skips the completeness check; callers report it themselves.
    pub(crate) fn from_effects_unchecked(dim: usize, effects: Vec<Effect>) -> Self {
        Self { dim, effects }
    }

    /// `{|0⟩⟨0|, ..., |d−1⟩⟨d−1|}`.
    pub fn computational_basis(dim: usize) -> Self {
        Self {
            dim,
            effects: (0..dim).map(|i| Effect::projector(&Ket::basis(dim, i))).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    /// `‖Σ E_i − I‖_F`.
    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(self.dim, &self.effects)
    }
}

fn completeness_residual(dim: usize, effects: &[Effect]) -> f64 {
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for e in effects {
        sum = &sum + e.matrix();
    }
    (&sum - &ComplexMatrix::identity(dim)).frobenius_norm()
}

/// A unitary operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct UnitaryMap {
    matrix: ComplexMatrix,
}

impl TryFrom<ComplexMatrix> for UnitaryMap {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        UnitaryMap::new(m)
    }
}

impl From<UnitaryMap> for ComplexMatrix {
    fn from(u: UnitaryMap) -> Self {
        u.matrix
    }
}

impl UnitaryMap {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tol(matrix, DEFAULT_TOL)
    }

    pub fn with_tol(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let dim = require_square("UnitaryMap", &matrix)?;
        let residual = (&(&matrix.adjoint() * &matrix) - &ComplexMatrix::identity(dim)).frobenius_norm();
        if !(residual <= tol) {
            return Err(invalid("UnitaryMap", "U†U = I", residual));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// `U†AU`, the Heisenberg-picture image of an operator.
    pub fn conjugate_operator(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &(&self.matrix.adjoint() * a) * &self.matrix
    }

    pub fn apply_ket(&self, ket: &Ket) -> Result<Ket> {
        require_dim("UnitaryMap::apply_ket", self.dim(), ket.dim())?;
        Ket::with_tol(self.matrix.mul_vec(ket.amplitudes()), 1e-8)
    }
}

/// `Q(E_j) = tr(ρ E_j)`.
pub fn born_operator(rho: &DensityOperator, povm: &Povm) -> Result<ProbVector> {
    require_dim("born_operator", rho.dim(), povm.dim())?;
    let q = povm
        .effects()
        .iter()
        .map(|e| hs_inner(rho.matrix(), e.matrix()).map(|z| z.re))
        .collect::<Result<Vec<_>>>()?;
    ProbVector::new(q)
}

/// `ÛρÛ†`.
pub fn apply_unitary(rho: &DensityOperator, u: &UnitaryMap) -> Result<DensityOperator> {
    require_dim("apply_unitary", rho.dim(), u.dim())?;
    let m = &(u.matrix() * rho.matrix()) * &u.matrix().adjoint();
    DensityOperator::new(m)
}

/// Lüders rule: returns `(√E ρ √E / tr(ρE), tr(ρE))`.
pub fn lueders_update(rho: &DensityOperator, effect: &Effect) -> Result<(DensityOperator, f64)> {
    require_dim("lueders_update", rho.dim(), effect.dim())?;
    let probability = hs_inner(rho.matrix(), effect.matrix())?.re;
    if !(probability > DEFAULT_TOL) {
        return Err(Error::ZeroProbability { probability });
    }
    let root = effect.matrix().sqrt_psd(DEFAULT_TOL)?;
    let post = (&(&root * rho.matrix()) * &root).scale(1.0 / probability);
    Ok((DensityOperator::new(post)?, probability))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Traces out one factor of a `dA·dB` bipartite operator, keeping `keep`.
pub fn partial_trace(m: &ComplexMatrix, dims: (usize, usize), keep: Subsystem) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    if !m.is_square() || m.rows() != da * db {
        return Err(Error::Shape {
            context: "partial_trace",
            detail: format!("{}x{} does not factor as {da}*{db}", m.rows(), m.cols()),
        });
    }
    let out = match keep {
        Subsystem::A => ComplexMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m.get(i * db + k, j * db + k)).sum()),
        Subsystem::B => ComplexMatrix::from_fn(db, db, |i, j| (0..da).map(|k| m.get(k * db + i, k * db + j)).sum()),
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pauli_x() -> UnitaryMap {
        UnitaryMap::new(ComplexMatrix::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
    }

    /// ρ± = ½(|00⟩⟨00| + |±±⟩⟨±±|).
    fn rho_pm(sign: &Ket) -> DensityOperator {
        let zz = Ket::basis(2, 0).tensor(&Ket::basis(2, 0)).projector();
        let ss = sign.tensor(sign).projector();
        DensityOperator::new((&zz + &ss).scale(0.5)).unwrap()
    }

    fn first_qubit_povm() -> Povm {
        let i2 = ComplexMatrix::identity(2);
        Povm::from_matrices(vec![
            Ket::basis(2, 0).projector().tensor(&i2),
            Ket::basis(2, 1).projector().tensor(&i2),
        ])
        .unwrap()
    }

    #[test]
    fn constructors_name_violated_predicate() {
        let not_trace_one = ComplexMatrix::from_diagonal(&[1.0, 1.0]);
        match DensityOperator::new(not_trace_one) {
            Err(Error::InvalidObject { predicate, magnitude, .. }) => {
                assert_eq!(predicate, "unit trace");
                assert_abs_diff_eq!(magnitude, 1.0, epsilon = 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        match DensityOperator::new(ComplexMatrix::from_diagonal(&[1.5, -0.5])) {
            Err(Error::InvalidObject { predicate, .. }) => assert_eq!(predicate, "positive semidefinite"),
            other => panic!("unexpected {other:?}"),
        }
        match Effect::new(ComplexMatrix::from_diagonal(&[1.5, 0.0])) {
            Err(Error::InvalidObject { predicate, .. }) => assert_eq!(predicate, "max eigenvalue <= 1"),
            other => panic!("unexpected {other:?}"),
        }
        match Povm::from_matrices(vec![ComplexMatrix::from_diagonal(&[1.0, 0.0])]) {
            Err(Error::InvalidObject { predicate, .. }) => assert_eq!(predicate, "effects sum to identity"),
            other => panic!("unexpected {other:?}"),
        }
        match UnitaryMap::new(ComplexMatrix::from_diagonal(&[1.0, 2.0])) {
            Err(Error::InvalidObject { predicate, .. }) => assert_eq!(predicate, "U†U = I"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Ket::new(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).is_err());
        let non_herm =
            ComplexMatrix::new(2, 2, vec![Complex64::new(0.5, 0.0), Complex64::new(0.0, 1.0), ZERO, Complex64::new(0.5, 0.0)])
                .unwrap();
        match DensityOperator::new(non_herm) {
            Err(Error::InvalidObject { predicate, .. }) => assert_eq!(predicate, "Hermitian"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn born_operator_examples() {
        let z = Povm::computational_basis(2);
        let q = born_operator(&DensityOperator::maximally_mixed(2), &z).unwrap();
        assert_abs_diff_eq!(q.get(0), 0.5, epsilon = 1e-15);
        let q = born_operator(&Ket::basis(2, 0).density(), &z).unwrap();
        assert_eq!(q.entries(), &[1.0, 0.0]);

        // Oracle: tr(ρ₊ |0⟩⟨0|⊗I) = ½(1 + |⟨0|+⟩|²) = 3/4.
        let q = born_operator(&rho_pm(&Ket::plus()), &first_qubit_povm()).unwrap();
        assert_abs_diff_eq!(q.get(0), 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(q.get(1), 0.25, epsilon = 1e-14);

        assert!(matches!(
            born_operator(&DensityOperator::maximally_mixed(3), &z),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn apply_unitary_examples() {
        let rho = Ket::basis(2, 0).density();
        let same = apply_unitary(&rho, &UnitaryMap::identity(2)).unwrap();
        assert_abs_diff_eq!(same.matrix().max_abs_diff(rho.matrix()), 0.0);
        let flipped = apply_unitary(&rho, &pauli_x()).unwrap();
        assert_abs_diff_eq!(flipped.matrix().max_abs_diff(&Ket::basis(2, 1).projector()), 0.0);
        assert!(apply_unitary(&rho, &UnitaryMap::identity(3)).is_err());
    }

    #[test]
    fn lueders_examples() {
        let (post, p) =
            lueders_update(&DensityOperator::maximally_mixed(2), &Effect::projector(&Ket::basis(2, 0))).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(post.matrix().max_abs_diff(&Ket::basis(2, 0).projector()), 0.0, epsilon = 1e-12);

        let one = Effect::new(Ket::basis(2, 1).projector().tensor(&ComplexMatrix::identity(2))).unwrap();
        for (sign, expected) in [(Ket::plus(), Ket::plus()), (Ket::minus(), Ket::minus())] {
            let (post, p) = lueders_update(&rho_pm(&sign), &one).unwrap();
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-14);
            let want = Ket::basis(2, 1).tensor(&expected).projector();
            assert_abs_diff_eq!(post.matrix().max_abs_diff(&want), 0.0, epsilon = 1e-12);
            let marginal = partial_trace(post.matrix(), (2, 2), Subsystem::B).unwrap();
            assert_abs_diff_eq!(marginal.max_abs_diff(&expected.projector()), 0.0, epsilon = 1e-12);
        }

        let err = lueders_update(&Ket::basis(2, 0).density(), &Effect::projector(&Ket::basis(2, 1)));
        assert!(matches!(err, Err(Error::ZeroProbability { .. })));
    }

    #[test]
    fn tensor_examples() {
        let i4 = ComplexMatrix::identity(2).tensor(&ComplexMatrix::identity(2));
        assert_abs_diff_eq!(i4.max_abs_diff(&ComplexMatrix::identity(4)), 0.0);
        let k = Ket::basis(2, 0).tensor(&Ket::basis(2, 1));
        assert_eq!(k, Ket::basis(4, 1));
        let p = Ket::basis(2, 0).projector().tensor(&Ket::plus().projector());
        assert_abs_diff_eq!(p.trace().re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!((&(&p * &p) - &p).frobenius_norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn partial_trace_examples() {
        let rho = DensityOperator::new(ComplexMatrix::from_diagonal(&[0.3, 0.7])).unwrap();
        let sigma = Ket::plus().density();
        let joint = rho.tensor(&sigma);
        let a = partial_trace(joint.matrix(), (2, 2), Subsystem::A).unwrap();
        assert_abs_diff_eq!(a.max_abs_diff(rho.matrix()), 0.0, epsilon = 1e-15);
        let b = partial_trace(joint.matrix(), (2, 2), Subsystem::B).unwrap();
        assert_abs_diff_eq!(b.max_abs_diff(sigma.matrix()), 0.0, epsilon = 1e-15);
        assert!(partial_trace(joint.matrix(), (3, 2), Subsystem::A).is_err());
    }

    #[test]
    fn partial_trace_of_entangled_branch_state() {
        // α = β = 1/√2 over orthonormal object/friend states; oracle by direct
        // index contraction: ρ_obj = Σ_k ⟨k|Φ⟩⟨Φ|k⟩ over friend basis.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi1 = Ket::plus();
        let psi2 = Ket::minus();
        let chi1 = Ket::basis(3, 1);
        let chi2 = Ket::basis(3, 2);
        let a = psi1.tensor(&chi1);
        let b = psi2.tensor(&chi2);
        let phi: Vec<Complex64> = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x + y) * h).collect();
        let phi = Ket::new(phi).unwrap();
        let obj = partial_trace(&phi.projector(), (2, 3), Subsystem::A).unwrap();
        let amp = phi.amplitudes();
        let oracle = ComplexMatrix::from_fn(2, 2, |i, j| (0..3).map(|k| amp[i * 3 + k] * amp[j * 3 + k].conj()).sum());
        assert_abs_diff_eq!(obj.max_abs_diff(&oracle), 0.0, epsilon = 1e-15);
        // ⟨ψ_i|ρ|ψ_j⟩ = diag(1/2, 1/2).
        for (i, x) in [&psi1, &psi2].iter().enumerate() {
            for (j, y) in [&psi1, &psi2].iter().enumerate() {
                let rv = obj.mul_vec(y.amplitudes());
                let e: Complex64 = x.amplitudes().iter().zip(&rv).map(|(a, b)| a.conj() * b).sum();
                let want = if i == j { 0.5 } else { 0.0 };
                assert_abs_diff_eq!((e - Complex64::new(want, 0.0)).norm(), 0.0, epsilon = 1e-14);
            }
        }
        assert_abs_diff_eq!(obj.trace().re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn json_wrappers() {
        let rho = DensityOperator::maximally_mixed(2);
        let s = serde_json::to_string(&rho).unwrap();
        assert!(s.starts_with(r#"{"dim":2,"matrix":{"rows":2"#));
        assert_eq!(serde_json::from_str::<DensityOperator>(&s).unwrap(), rho);
        let bad = s.replacen(r#""dim":2"#, r#""dim":3"#, 1);
        assert!(serde_json::from_str::<DensityOperator>(&bad).is_err());

        let povm = Povm::computational_basis(2);
        let s = serde_json::to_string(&povm).unwrap();
        assert!(s.contains(r#""effects":["#));
        assert_eq!(serde_json::from_str::<Povm>(&s).unwrap(), povm);
    }
}
