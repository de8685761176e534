//! Reference apparatuses and the probability form of the Born rule.
//!
//! A reference apparatus is a POVM `{R_i}` with `d²` linearly independent
//! elements together with `d²` linearly independent post-measurement states
//! `{σ_i}`. Its Gram matrix `[tr(R_i σ_j)]` is invertible; the inverse is
//! `Φ`. With `P(R_i) = tr(ρ R_i)` and `P(E_j|R_i) = tr(σ_i E_j)` the Born
//! rule becomes `Q(E) = P(E|R) Φ P(R)`, while the physically cascaded
//! two-step protocol obeys the classical `P(E) = P(E|R) P(R)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{condition_number, hs_inner, matrix_inverse_with, ComplexMatrix, DEFAULT_TOL};
use crate::probability::{CondMatrix, ProbVector};
use crate::quantum::{DensityOperator, Effect, Povm, UnitaryMap};
use crate::random::haar_ket;

/// Condition bound on the Gram matrices accepted by [`ReferenceApparatus::new`].
pub const DEFAULT_MAX_GRAM_CONDITION: f64 = 1e10;

/// Condition bound used by the random sampler; draws above it are rejected.
pub const SAMPLER_MAX_GRAM_CONDITION: f64 = 1e6;

/// Eigenvalue floor and trace window separating numerical noise from
/// genuinely non-quantum probability assignments.
pub const CONSISTENCY_TOL: f64 = 1e-8;

/// Largest imaginary residue tolerated in `Φ`.
pub const PHI_IMAG_TOL: f64 = 1e-10;

const SAMPLER_MAX_ATTEMPTS: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ReferenceJson", into = "ReferenceJson")]
pub struct ReferenceApparatus {
    dim: usize,
    effects: Povm,
    post_states: Vec<DensityOperator>,
    /// `[tr(R_i σ_j)]`.
    gram: ComplexMatrix,
}

#[derive(Serialize, Deserialize)]
struct ReferenceJson {
    dim: usize,
    effects: Vec<ComplexMatrix>,
    post_states: Vec<ComplexMatrix>,
}

impl TryFrom<ReferenceJson> for ReferenceApparatus {
    type Error = Error;
    fn try_from(j: ReferenceJson) -> Result<Self> {
        let effects = Povm::from_matrices(j.effects)?;
        let post_states = j
            .post_states
            .into_iter()
            .map(DensityOperator::new)
            .collect::<Result<Vec<_>>>()?;
        let r = ReferenceApparatus::new(effects, post_states)?;
        if r.dim != j.dim {
            return Err(Error::DimensionMismatch {
                context: "ReferenceApparatus JSON",
                expected: j.dim,
                found: r.dim,
            });
        }
        Ok(r)
    }
}

impl From<ReferenceApparatus> for ReferenceJson {
    fn from(r: ReferenceApparatus) -> Self {
        ReferenceJson {
            dim: r.dim,
            effects: r.effects.effects().iter().map(|e| e.matrix().clone()).collect(),
            post_states: r.post_states.iter().map(|s| s.matrix().clone()).collect(),
        }
    }
}

/// `[tr(a_i† b_j)]`.
fn hs_gram(a: &[&ComplexMatrix], b: &[&ComplexMatrix]) -> Result<ComplexMatrix> {
    let mut entries = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            entries.push(hs_inner(x, y)?);
        }
    }
    ComplexMatrix::new(a.len(), b.len(), entries)
}

impl ReferenceApparatus {
    pub fn new(effects: Povm, post_states: Vec<DensityOperator>) -> Result<Self> {
        Self::with_max_condition(effects, post_states, DEFAULT_MAX_GRAM_CONDITION)
    }

    /// Validates the `d²` counts and that both families are linearly
    /// independent, i.e. their Hilbert–Schmidt Gram matrices have condition
    /// number at most `max_condition`.
    pub fn with_max_condition(effects: Povm, post_states: Vec<DensityOperator>, max_condition: f64) -> Result<Self> {
        let dim = effects.dim();
        let n = dim * dim;
        if effects.len() != n {
            return Err(Error::WrongEffectCount {
                expected: n,
                found: effects.len(),
            });
        }
        if post_states.len() != n {
            return Err(Error::Shape {
                context: "ReferenceApparatus",
                detail: format!("expected {n} post-measurement states, found {}", post_states.len()),
            });
        }
        if let Some(s) = post_states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                context: "ReferenceApparatus post-states",
                expected: dim,
                found: s.dim(),
            });
        }
        let r: Vec<&ComplexMatrix> = effects.effects().iter().map(Effect::matrix).collect();
        let s: Vec<&ComplexMatrix> = post_states.iter().map(DensityOperator::matrix).collect();
        for (what, family) in [("effects", &r), ("post-states", &s)] {
            let condition = condition_number(&hs_gram(family, family)?)?;
            if !(condition <= max_condition) {
                return Err(Error::InvalidObject {
                    kind: "ReferenceApparatus",
                    predicate: if what == "effects" {
                        "effects linearly independent"
                    } else {
                        "post-states linearly independent"
                    },
                    magnitude: condition,
                });
            }
        }
        let gram = hs_gram(&r, &s)?;
        Ok(Self {
            dim,
            effects,
            post_states,
            gram,
        })
    }

    /// Random apparatus: rank-one frame `R_i = S^{-1/2} G_i S^{-1/2}` built
    /// from Haar kets, with independent Haar-random pure post-states. Draws
    /// whose Gram matrices exceed [`SAMPLER_MAX_GRAM_CONDITION`], or whose
    /// `Φ` fails the [`PHI_IMAG_TOL`] reality check, are redrawn.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        let n = dim * dim;
        let mut last_err = None;
        for _ in 0..SAMPLER_MAX_ATTEMPTS {
            let frame: Vec<ComplexMatrix> = (0..n).map(|_| haar_ket(dim, rng).projector()).collect();
            let post: Vec<DensityOperator> = (0..n).map(|_| haar_ket(dim, rng).density()).collect();
            let attempt = crate::random::normalize_to_povm(dim, &frame)
                .and_then(|povm| Self::with_max_condition(povm, post, SAMPLER_MAX_GRAM_CONDITION))
                .and_then(|r| {
                    let c = condition_number(&r.gram)?;
                    if c <= SAMPLER_MAX_GRAM_CONDITION {
                        Ok(r)
                    } else {
                        Err(Error::IllConditioned {
                            condition: c,
                            bound: SAMPLER_MAX_GRAM_CONDITION,
                        })
                    }
                })
                .and_then(|r| phi_matrix(&r).map(|_| r));
            match attempt {
                Ok(r) => return Ok(r),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.unwrap_or(Error::NonConvergence("reference apparatus sampler")))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `d²`.
    pub fn outcomes(&self) -> usize {
        self.dim * self.dim
    }

    pub fn effects(&self) -> &Povm {
        &self.effects
    }

    pub fn post_states(&self) -> &[DensityOperator] {
        &self.post_states
    }

    /// `[tr(R_i σ_j)]`, i.e. `Φ⁻¹`.
    pub fn gram(&self) -> &ComplexMatrix {
        &self.gram
    }
}

/// The real `d² × d²` matrix `Φ`, inverse of `[tr(R_i σ_j)]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiMatrix {
    matrix: DMatrix<f64>,
    inverse_residual: f64,
}

impl PhiMatrix {
    /// Wraps an explicitly known `Φ`, e.g. a closed form.
    pub fn from_real(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape {
                context: "PhiMatrix",
                detail: "must be square".into(),
            });
        }
        Ok(Self {
            matrix,
            inverse_residual: f64::NAN,
        })
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn as_real(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_real(&self.matrix)
    }

    /// `‖Φ·[tr(R_iσ_j)] − I‖_F` recorded when computed from an apparatus;
    /// NaN for closed forms.
    pub fn inverse_residual(&self) -> f64 {
        self.inverse_residual
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        (&self.matrix * nalgebra::DVector::from_column_slice(p)).iter().copied().collect()
    }
}

pub fn phi_matrix(reference: &ReferenceApparatus) -> Result<PhiMatrix> {
    let inv = matrix_inverse_with(&reference.gram, DEFAULT_MAX_GRAM_CONDITION)?;
    let magnitude = inv.max_imag();
    if magnitude > PHI_IMAG_TOL {
        return Err(Error::ImaginaryResidue { magnitude });
    }
    let n = reference.outcomes();
    let inverse_residual = (&(&inv * &reference.gram) - &ComplexMatrix::identity(n)).frobenius_norm();
    Ok(PhiMatrix {
        matrix: inv.real_part(),
        inverse_residual,
    })
}

fn require_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

/// `P(R_i) = tr(ρ R_i)`.
pub fn state_to_probs(rho: &DensityOperator, reference: &ReferenceApparatus) -> Result<ProbVector> {
    require_len("state_to_probs", reference.dim(), rho.dim())?;
    let p = reference
        .effects()
        .effects()
        .iter()
        .map(|r| hs_inner(rho.matrix(), r.matrix()).map(|z| z.re))
        .collect::<Result<Vec<_>>>()?;
    ProbVector::new(p)
}

/// The unique operator `ρ` with `tr(ρ R_i) = p_i`, found by solving the
/// Gram system in the post-state basis. Fails when that operator is not a
/// density operator within [`CONSISTENCY_TOL`].
pub fn probs_to_state(p: &ProbVector, reference: &ReferenceApparatus) -> Result<DensityOperator> {
    let n = reference.outcomes();
    require_len("probs_to_state", n, p.len())?;
    let rhs = nalgebra::DVector::from_iterator(n, p.entries().iter().map(|&x| Complex64::new(x, 0.0)));
    let coeffs = reference
        .gram
        .as_nalgebra()
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::IllConditioned {
            condition: f64::INFINITY,
            bound: DEFAULT_MAX_GRAM_CONDITION,
        })?;
    let d = reference.dim();
    let mut rho = ComplexMatrix::zeros(d, d);
    for (a, sigma) in coeffs.iter().zip(reference.post_states()) {
        rho = &rho + &sigma.matrix().scale_complex(*a);
    }
    let rho = rho.hermitian_part();
    let trace_error = (rho.trace().re - 1.0).abs();
    let min_eigenvalue = rho.eigenvalues_hermitian()?.first().copied().unwrap_or(0.0);
    if trace_error > CONSISTENCY_TOL || min_eigenvalue < -CONSISTENCY_TOL {
        return Err(Error::NotQuantumConsistent {
            min_eigenvalue,
            trace_error,
        });
    }
    DensityOperator::with_tol(rho, CONSISTENCY_TOL)
}

/// `P(E_j | R_i) = tr(σ_i E_j)`.
pub fn measurement_to_cond(povm: &Povm, reference: &ReferenceApparatus) -> Result<CondMatrix> {
    require_len("measurement_to_cond", reference.dim(), povm.dim())?;
    let mut entries = Vec::with_capacity(povm.len() * reference.outcomes());
    for e in povm.effects() {
        for sigma in reference.post_states() {
            entries.push(hs_inner(sigma.matrix(), e.matrix())?.re);
        }
    }
    CondMatrix::new(povm.len(), reference.outcomes(), entries)
}

/// Checks that `q` lies in `[0, 1]` up to `DEFAULT_TOL`, reporting the
/// first offending entry as a normative violation.
pub(crate) fn checked_probabilities(q: Vec<f64>) -> Result<ProbVector> {
    for (index, &value) in q.iter().enumerate() {
        if !(-DEFAULT_TOL..=1.0 + DEFAULT_TOL).contains(&value) {
            return Err(Error::NormativeViolation { index, value });
        }
    }
    ProbVector::new(q)
}

/// `Q(E) = P(E|R) Φ P(R)`.
pub fn born_probability_form(p: &ProbVector, cond: &CondMatrix, phi: &PhiMatrix) -> Result<ProbVector> {
    require_len("born_probability_form (Φ vs P(R))", phi.size(), p.len())?;
    require_len("born_probability_form (P(E|R) vs Φ)", phi.size(), cond.cols())?;
    checked_probabilities(cond.apply(&phi.apply(p.entries()))?)
}

/// Law of total probability `P(E) = P(E|R) P(R)`.
pub fn ltp_classical(p: &ProbVector, cond: &CondMatrix) -> Result<ProbVector> {
    ProbVector::new(cond.apply(p.entries())?)
}

/// Measure the reference device, prepare `σ_i` on outcome `i`, then measure
/// `povm`: `P(E_j) = Σ_i tr(ρ R_i) tr(σ_i E_j)`.
pub fn cascade_probability(rho: &DensityOperator, reference: &ReferenceApparatus, povm: &Povm) -> Result<ProbVector> {
    require_len("cascade_probability (state)", reference.dim(), rho.dim())?;
    require_len("cascade_probability (povm)", reference.dim(), povm.dim())?;
    let mut out = vec![0.0; povm.len()];
    for (r, sigma) in reference.effects().effects().iter().zip(reference.post_states()) {
        let pr = hs_inner(rho.matrix(), r.matrix())?.re;
        for (slot, e) in out.iter_mut().zip(povm.effects()) {
            *slot += pr * hs_inner(sigma.matrix(), e.matrix())?.re;
        }
    }
    ProbVector::new(out)
}

/// Unitary evolution as a Born-rule instance: the later reference
/// measurement `R'_j = U† R_j U` is treated as the "other" measurement, so
/// `P_t1(R) = P(R'|R) Φ P_t0(R)` with `P(R'_j|R_i) = tr(σ_i R'_j)`.
pub fn evolve_probs(p_t0: &ProbVector, u: &UnitaryMap, reference: &ReferenceApparatus) -> Result<ProbVector> {
    require_len("evolve_probs", reference.dim(), u.dim())?;
    probs_to_state(p_t0, reference)?;
    let n = reference.outcomes();
    let moved: Vec<ComplexMatrix> = reference
        .effects()
        .effects()
        .iter()
        .map(|r| u.conjugate_operator(r.matrix()))
        .collect();
    let mut entries = Vec::with_capacity(n * n);
    for r in &moved {
        for sigma in reference.post_states() {
            entries.push(hs_inner(sigma.matrix(), r)?.re);
        }
    }
    let cond = CondMatrix::new(n, n, entries)?;
    born_probability_form(p_t0, &cond, &phi_matrix(reference)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{born_operator, Ket};
    use crate::random::{random_density, random_povm, random_unitary, seeded_rng};
    use approx::assert_abs_diff_eq;

    /// d = 2 SIC from the Bloch tetrahedron, σ_i = 2R_i. Written out
    /// directly so these tests do not depend on the sic module.
    fn tetrahedron_reference() -> ReferenceApparatus {
        let s = 1.0 / 3f64.sqrt();
        let bloch = [[s, s, s], [-s, -s, s], [s, -s, -s], [-s, s, -s]];
        let proj = |b: &[f64; 3]| {
            ComplexMatrix::new(
                2,
                2,
                vec![
                    Complex64::new((1.0 + b[2]) / 2.0, 0.0),
                    Complex64::new(b[0] / 2.0, -b[1] / 2.0),
                    Complex64::new(b[0] / 2.0, b[1] / 2.0),
                    Complex64::new((1.0 - b[2]) / 2.0, 0.0),
                ],
            )
            .unwrap()
        };
        let effects = Povm::from_matrices(bloch.iter().map(|b| proj(b).scale(0.5)).collect()).unwrap();
        let post = bloch.iter().map(|b| DensityOperator::new(proj(b)).unwrap()).collect();
        ReferenceApparatus::new(effects, post).unwrap()
    }

    fn phi_sic2() -> DMatrix<f64> {
        DMatrix::from_fn(4, 4, |i, j| if i == j { 2.5 } else { -0.5 })
    }

    #[test]
    fn phi_of_tetrahedron() {
        let phi = phi_matrix(&tetrahedron_reference()).unwrap();
        assert_abs_diff_eq!((phi.as_real() - phi_sic2()).amax(), 0.0, epsilon = 1e-12);
        assert!(phi.inverse_residual() < 1e-12);
    }

    #[test]
    fn reference_rejects_bad_inputs() {
        let z = Povm::computational_basis(2);
        let post = vec![DensityOperator::maximally_mixed(2); 4];
        assert!(matches!(
            ReferenceApparatus::new(z, post.clone()),
            Err(Error::WrongEffectCount { expected: 4, found: 2 })
        ));
        let r = tetrahedron_reference();
        match ReferenceApparatus::new(r.effects().clone(), post) {
            Err(Error::InvalidObject { predicate, .. }) => assert_eq!(predicate, "post-states linearly independent"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn state_to_probs_examples() {
        let r = tetrahedron_reference();
        let p = state_to_probs(&DensityOperator::maximally_mixed(2), &r).unwrap();
        for &x in p.entries() {
            assert_abs_diff_eq!(x, 0.25, epsilon = 1e-15);
        }
        // The first tetrahedron vertex is a fiducial: p = (1/2, 1/6, 1/6, 1/6).
        let fid = r.post_states()[0].clone();
        let p = state_to_probs(&fid, &r).unwrap();
        for (x, want) in p.entries().iter().zip([0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]) {
            assert_abs_diff_eq!(*x, want, epsilon = 1e-14);
        }
        assert!(state_to_probs(&DensityOperator::maximally_mixed(3), &r).is_err());
    }

    #[test]
    fn probs_to_state_examples() {
        let r = tetrahedron_reference();
        let rho = probs_to_state(&ProbVector::uniform(4), &r).unwrap();
        assert_abs_diff_eq!(
            rho.matrix().max_abs_diff(DensityOperator::maximally_mixed(2).matrix()),
            0.0,
            epsilon = 1e-14
        );
        // Oracle: a = Φ·e_0 = (5/2, −1/2, −1/2, −1/2), and Σσ_j = 2I, so the
        // reconstruction is 3σ_0 − I with eigenvalues {2, −1}.
        match probs_to_state(&ProbVector::point(4, 0), &r) {
            Err(Error::NotQuantumConsistent { min_eigenvalue, trace_error }) => {
                assert_abs_diff_eq!(min_eigenvalue, -1.0, epsilon = 1e-12);
                assert!(trace_error < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(probs_to_state(&ProbVector::uniform(3), &r).is_err());
    }

    #[test]
    fn round_trip_random_states() {
        let mut rng = seeded_rng(11, 0);
        for d in 2..=3 {
            let r = ReferenceApparatus::random(d, &mut rng).unwrap();
            for _ in 0..100 {
                let rho = random_density(d, &mut rng);
                let back = probs_to_state(&state_to_probs(&rho, &r).unwrap(), &r).unwrap();
                assert!(back.matrix().max_abs_diff(rho.matrix()) <= 1e-9);
            }
        }
    }

    #[test]
    fn measurement_to_cond_examples() {
        let r = tetrahedron_reference();
        let ones = measurement_to_cond(&Povm::new(vec![Effect::identity(2)]).unwrap(), &r).unwrap();
        assert_eq!(ones.rows(), 1);
        for &x in ones.entries() {
            assert_abs_diff_eq!(x, 1.0, epsilon = 1e-14);
        }
        let own = measurement_to_cond(r.effects(), &r).unwrap();
        for j in 0..4 {
            for i in 0..4 {
                let want = if i == j { 0.5 } else { 1.0 / 6.0 };
                assert_abs_diff_eq!(own.get(j, i), want, epsilon = 1e-14);
            }
        }
        assert!(measurement_to_cond(&Povm::computational_basis(3), &r).is_err());
    }

    #[test]
    fn born_probability_form_examples() {
        let r = tetrahedron_reference();
        let phi = phi_matrix(&r).unwrap();
        let z = Povm::computational_basis(2);
        let cond = measurement_to_cond(&z, &r).unwrap();
        let q = born_probability_form(&ProbVector::uniform(4), &cond, &phi).unwrap();
        assert_abs_diff_eq!(q.get(0), 0.5, epsilon = 1e-14);

        let identity = PhiMatrix::from_real(DMatrix::identity(4, 4)).unwrap();
        let p = ProbVector::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let via_identity = born_probability_form(&p, &cond, &identity).unwrap();
        let ltp = ltp_classical(&p, &cond).unwrap();
        assert_abs_diff_eq!(via_identity.max_abs_diff(&ltp), 0.0, epsilon = 1e-15);

        // A point mass is not quantum for a SIC: Φe_0 = (5/2, −1/2, −1/2, −1/2)
        // and P(0|σ_i) = (1 + z_i)/2 give Q(0) = (1 + √3)/2 > 1.
        assert!(matches!(
            born_probability_form(&ProbVector::point(4, 0), &cond, &phi),
            Err(Error::NormativeViolation { .. })
        ));
        assert!(born_probability_form(&ProbVector::uniform(3), &cond, &phi).is_err());
    }

    #[test]
    fn ltp_classical_examples() {
        let row = CondMatrix::new(1, 4, vec![1.0; 4]).unwrap();
        let q = ltp_classical(&ProbVector::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap(), &row).unwrap();
        assert_eq!(q.entries(), &[1.0]);
        let cond = CondMatrix::new(2, 2, vec![0.3, 1.0, 0.7, 0.0]).unwrap();
        let q = ltp_classical(&ProbVector::point(2, 0), &cond).unwrap();
        assert_eq!(q.entries(), &cond.column(0)[..]);
    }

    #[test]
    fn cascade_vs_single_step() {
        // Oracle: Σ_i tr(ρR_i)tr(2R_iE_0) = Σ_i (1+z_i)²/8 = 2/3 for ρ = |0⟩⟨0|.
        let r = tetrahedron_reference();
        let rho = Ket::basis(2, 0).density();
        let z = Povm::computational_basis(2);
        let cascade = cascade_probability(&rho, &r, &z).unwrap();
        assert_abs_diff_eq!(cascade.get(0), 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cascade.get(1), 1.0 / 3.0, epsilon = 1e-12);
        let single = born_operator(&rho, &z).unwrap();
        assert_abs_diff_eq!(single.get(0), 1.0, epsilon = 1e-12);

        let ltp = ltp_classical(&state_to_probs(&rho, &r).unwrap(), &measurement_to_cond(&z, &r).unwrap()).unwrap();
        assert_abs_diff_eq!(ltp.max_abs_diff(&cascade), 0.0, epsilon = 1e-12);

        // Maximally mixed input: equals Born of the averaged post-state Σσ_i/d².
        let mixed = cascade_probability(&DensityOperator::maximally_mixed(2), &r, &z).unwrap();
        let mut avg = ComplexMatrix::zeros(2, 2);
        for s in r.post_states() {
            avg = &avg + &s.matrix().scale(0.25);
        }
        let via_avg = born_operator(&DensityOperator::new(avg).unwrap(), &z).unwrap();
        assert_abs_diff_eq!(mixed.max_abs_diff(&via_avg), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn evolve_examples() {
        let mut rng = seeded_rng(5, 0);
        let r = tetrahedron_reference();
        let p = state_to_probs(&random_density(2, &mut rng), &r).unwrap();
        let same = evolve_probs(&p, &UnitaryMap::identity(2), &r).unwrap();
        assert!(same.max_abs_diff(&p) <= 1e-12);
        let u = random_unitary(2, &mut rng);
        let uniform = evolve_probs(&ProbVector::uniform(4), &u, &r).unwrap();
        assert!(uniform.max_abs_diff(&ProbVector::uniform(4)) <= 1e-12);
        assert!(matches!(
            evolve_probs(&ProbVector::point(4, 0), &u, &r),
            Err(Error::NotQuantumConsistent { .. })
        ));
    }

    #[test]
    fn born_equivalence_small_sample() {
        let mut rng = seeded_rng(3, 0);
        for d in 2..=3 {
            let r = ReferenceApparatus::random(d, &mut rng).unwrap();
            let phi = phi_matrix(&r).unwrap();
            assert!(phi.inverse_residual() <= 1e-9);
            for m in [2, d * d] {
                let povm = random_povm(d, m, &mut rng).unwrap();
                let rho = random_density(d, &mut rng);
                let q_op = born_operator(&rho, &povm).unwrap();
                let q_pr = born_probability_form(
                    &state_to_probs(&rho, &r).unwrap(),
                    &measurement_to_cond(&povm, &r).unwrap(),
                    &phi,
                )
                .unwrap();
                assert!(q_op.max_abs_diff(&q_pr) <= 1e-9);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let r = tetrahedron_reference();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.starts_with(r#"{"dim":2,"effects":["#));
        let back: ReferenceApparatus = serde_json::from_str(&s).unwrap();
        assert_abs_diff_eq!(back.gram().max_abs_diff(r.gram()), 0.0, epsilon = 1e-15);
    }
}
