//! Wigner's friend as composite-system algebra.
//!
//! The object (dimension `d_o`) starts in `α|ψ₁⟩ + β|ψ₂⟩`, the friend's
//! register (dimension `d_f ≥ 3`) in the ready state `|χ₀⟩`. The friend's
//! look is the unitary `U|ψ_i⟩|χ₀⟩ = |ψ_i⟩|χ_i⟩`. Composite vectors are
//! ordered object ⊗ friend.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, DEFAULT_TOL, ZERO};
use crate::probability::ProbVector;
use crate::quantum::{
    born_operator, lueders_update, partial_trace, DensityOperator, Effect, Ket, Povm, Subsystem, Tensor, UnitaryMap,
};
use crate::reference::{state_to_probs, ReferenceApparatus};

/// On-disk scenario; omitted vectors default to computational basis states
/// with `d_o = 2`, `d_f = 3`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WignerSpec {
    /// `[re, im]`.
    pub alpha: Complex64,
    pub beta: Complex64,
    #[serde(default)]
    pub psi: Option<[Ket; 2]>,
    /// `[χ₀, χ₁, χ₂]`.
    #[serde(default)]
    pub chi: Option<[Ket; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WignerSpec", into = "WignerSpec")]
pub struct WignerScenario {
    alpha: Complex64,
    beta: Complex64,
    psi: [Ket; 2],
    chi: [Ket; 3],
}

impl TryFrom<WignerSpec> for WignerScenario {
    type Error = Error;

    fn try_from(s: WignerSpec) -> Result<Self> {
        let psi = s.psi.unwrap_or_else(|| [Ket::basis(2, 0), Ket::basis(2, 1)]);
        let chi = s.chi.unwrap_or_else(|| [Ket::basis(3, 0), Ket::basis(3, 1), Ket::basis(3, 2)]);
        Self::new(s.alpha, s.beta, psi, chi)
    }
}

impl From<WignerScenario> for WignerSpec {
    fn from(s: WignerScenario) -> Self {
        Self {
            alpha: s.alpha,
            beta: s.beta,
            psi: Some(s.psi),
            chi: Some(s.chi),
        }
    }
}

fn check_orthonormal(kind: &'static str, kets: &[Ket]) -> Result<()> {
    let dim = kets[0].dim();
    for k in kets {
        if k.dim() != dim {
            return Err(Error::DimensionMismatch {
                context: kind,
                expected: dim,
                found: k.dim(),
            });
        }
    }
    for i in 0..kets.len() {
        for j in (i + 1)..kets.len() {
            let overlap = kets[i].inner(&kets[j]).norm();
            if overlap > DEFAULT_TOL {
                return Err(Error::InvalidObject {
                    kind,
                    predicate: "orthonormal",
                    magnitude: overlap,
                });
            }
        }
    }
    Ok(())
}

impl WignerScenario {
    pub fn new(alpha: Complex64, beta: Complex64, psi: [Ket; 2], chi: [Ket; 3]) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidScenario(format!("|α|² + |β|² = {norm}, expected 1")));
        }
        check_orthonormal("object states", &psi)?;
        check_orthonormal("friend register states", &chi)?;
        Ok(Self { alpha, beta, psi, chi })
    }

    /// `d_o = 2`, `d_f = 3`, basis states, real `α = √a`, `β = √(1 − a)`.
    pub fn standard(alpha_sq: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha_sq) {
            return Err(Error::InvalidScenario(format!("|α|² = {alpha_sq} outside [0, 1]")));
        }
        Self::new(
            Complex64::new(alpha_sq.sqrt(), 0.0),
            Complex64::new((1.0 - alpha_sq).sqrt(), 0.0),
            [Ket::basis(2, 0), Ket::basis(2, 1)],
            [Ket::basis(3, 0), Ket::basis(3, 1), Ket::basis(3, 2)],
        )
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn beta(&self) -> Complex64 {
        self.beta
    }

    pub fn psi(&self) -> &[Ket; 2] {
        &self.psi
    }

    pub fn chi(&self) -> &[Ket; 3] {
        &self.chi
    }

    pub fn object_dim(&self) -> usize {
        self.psi[0].dim()
    }

    pub fn friend_dim(&self) -> usize {
        self.chi[0].dim()
    }

    pub fn composite_dim(&self) -> usize {
        self.object_dim() * self.friend_dim()
    }

    /// `α|ψ₁⟩ + β|ψ₂⟩`.
    pub fn object_state(&self) -> Ket {
        let amps = self.psi[0]
            .amplitudes()
            .iter()
            .zip(self.psi[1].amplitudes())
            .map(|(a, b)| self.alpha * a + self.beta * b)
            .collect();
        Ket::with_tol(amps, 1e-8).expect("orthonormal combination of unit weight")
    }
}

/// Orthonormal basis starting with `seed` (already orthonormal), completed
/// by Gram–Schmidt over the standard basis in index order.
fn complete_basis(seed: &[Vec<Complex64>], n: usize) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = seed.to_vec();
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = vec![ZERO; n];
        v[e] = Complex64::new(1.0, 0.0);
        // Two passes keep the result orthogonal to working precision.
        for _ in 0..2 {
            for b in &basis {
                let c: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= bi * c);
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|z| *z /= norm);
            basis.push(v);
        }
    }
    basis
}

/// `U = Σ_k |out_k⟩⟨in_k|` with `in = (ψ₁χ₀, ψ₂χ₀, …)` and
/// `out = (ψ₁χ₁, ψ₂χ₂, …)`, both completed deterministically.
pub fn friend_interaction_unitary(s: &WignerScenario) -> Result<UnitaryMap> {
    let n = s.composite_dim();
    let inputs = [s.psi[0].tensor(&s.chi[0]), s.psi[1].tensor(&s.chi[0])];
    let outputs = [s.psi[0].tensor(&s.chi[1]), s.psi[1].tensor(&s.chi[2])];
    let ins = complete_basis(&inputs.map(|k| k.amplitudes().to_vec()), n);
    let outs = complete_basis(&outputs.map(|k| k.amplitudes().to_vec()), n);
    let mut u = ComplexMatrix::zeros(n, n);
    for (i, o) in ins.iter().zip(&outs) {
        u = &u + &ComplexMatrix::outer(o, i);
    }
    UnitaryMap::with_tol(u, 1e-10)
}

/// `|Φ₀⟩ = (α|ψ₁⟩ + β|ψ₂⟩)|χ₀⟩`.
pub fn initial_state(s: &WignerScenario) -> Ket {
    s.object_state().tensor(&s.chi[0])
}

/// `|Φ⟩ = U|Φ₀⟩ = α|ψ₁⟩|χ₁⟩ + β|ψ₂⟩|χ₂⟩`.
pub fn composite_state(s: &WignerScenario) -> Result<Ket> {
    friend_interaction_unitary(s)?.apply_ket(&initial_state(s))
}

/// The friend's register measurement `{I⊗|χ₁⟩⟨χ₁|, I⊗|χ₂⟩⟨χ₂|, rest}`.
pub fn friend_povm(s: &WignerScenario) -> Result<Povm> {
    let id = ComplexMatrix::identity(s.object_dim());
    let p1 = id.kron(&s.chi[1].projector());
    let p2 = id.kron(&s.chi[2].projector());
    let rest = &(&ComplexMatrix::identity(s.composite_dim()) - &p1) - &p2;
    Povm::new(vec![Effect::new(p1)?, Effect::new(p2)?, Effect::new(rest)?])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObserverQuery {
    pub p_yes: f64,
    pub p_no: f64,
    /// Probability of neither answer; zero for states of the form `|Φ⟩`.
    pub p_rest: f64,
    /// Object state given "yes"; absent when that answer has probability 0.
    pub post_yes: Option<DensityOperator>,
    pub post_no: Option<DensityOperator>,
}

/// Asks the friend (after the interaction) which outcome she saw.
pub fn observer_query(s: &WignerScenario) -> Result<ObserverQuery> {
    let rho = composite_state(s)?.density();
    let povm = friend_povm(s)?;
    let p = born_operator(&rho, &povm)?;
    let dims = (s.object_dim(), s.friend_dim());
    let post = |k: usize| -> Result<Option<DensityOperator>> {
        match lueders_update(&rho, &povm.effects()[k]) {
            Ok((post, _)) => Ok(Some(DensityOperator::new(partial_trace(post.matrix(), dims, Subsystem::A)?)?)),
            Err(Error::ZeroProbability { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    Ok(ObserverQuery {
        p_yes: p.get(0),
        p_no: p.get(1),
        p_rest: p.get(2),
        post_yes: post(0)?,
        post_no: post(1)?,
    })
}

/// Measurements on the composite used to compare statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Probe {
    /// `{|Φ₀⟩⟨Φ₀|, I − |Φ₀⟩⟨Φ₀|}`.
    Phi0,
    /// Object in `(ψ₁ ± ψ₂)/√2` (plus the rest of the object space), friend ignored.
    ObjectX,
    /// Friend register in `χ₀, χ₁, χ₂` (plus the rest), object ignored.
    ChiBasis,
}

impl std::str::FromStr for Probe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi0" => Ok(Probe::Phi0),
            "object-x" => Ok(Probe::ObjectX),
            "chi-basis" => Ok(Probe::ChiBasis),
            other => Err(Error::Parse(format!("unknown probe '{other}' (phi0, object-x, chi-basis)"))),
        }
    }
}

pub fn probe_povm(s: &WignerScenario, probe: Probe) -> Result<Povm> {
    let n = s.composite_dim();
    let (d_o, d_f) = (s.object_dim(), s.friend_dim());
    let mut effects = match probe {
        Probe::Phi0 => vec![initial_state(s).projector()],
        Probe::ObjectX => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let (a, b) = (s.psi[0].amplitudes(), s.psi[1].amplitudes());
            let plus: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| (x + y) * h).collect();
            let minus: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| (x - y) * h).collect();
            let id = ComplexMatrix::identity(d_f);
            vec![
                ComplexMatrix::outer(&plus, &plus).kron(&id),
                ComplexMatrix::outer(&minus, &minus).kron(&id),
            ]
        }
        Probe::ChiBasis => {
            let id = ComplexMatrix::identity(d_o);
            s.chi.iter().map(|c| id.kron(&c.projector())).collect()
        }
    };
    let mut rest = ComplexMatrix::identity(n);
    for e in &effects {
        rest = &rest - e;
    }
    effects.push(rest.hermitian_part());
    Povm::new(effects.into_iter().map(Effect::new).collect::<Result<Vec<_>>>()?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReversalReport {
    /// Statistics of the probe on `|Φ₀⟩⟨Φ₀|`.
    pub before: ProbVector,
    /// Statistics after the interaction and its reversal.
    pub after: ProbVector,
    pub max_stat_deviation: f64,
}

fn check_probe(s: &WignerScenario, probe: &Povm) -> Result<()> {
    if probe.dim() != s.composite_dim() {
        return Err(Error::DimensionMismatch {
            context: "reversal probe",
            expected: s.composite_dim(),
            found: probe.dim(),
        });
    }
    Ok(())
}

fn compare(s: &WignerScenario, probe: &Povm, after: &DensityOperator) -> Result<ReversalReport> {
    let before = born_operator(&initial_state(s).density(), probe)?;
    let after = born_operator(after, probe)?;
    Ok(ReversalReport {
        max_stat_deviation: before.max_abs_diff(&after),
        before,
        after,
    })
}

/// Applies `U` then `U†` to `|Φ₀⟩⟨Φ₀|` and compares probe statistics.
pub fn reversal_check(s: &WignerScenario, probe: &Povm) -> Result<ReversalReport> {
    check_probe(s, probe)?;
    let u = friend_interaction_unitary(s)?;
    let rho0 = initial_state(s).density();
    let forward = u.matrix() * &(rho0.matrix() * &u.matrix().adjoint());
    let back = &u.matrix().adjoint() * &(&forward * u.matrix());
    compare(s, probe, &DensityOperator::with_tol(back, 1e-8)?)
}

/// As [`reversal_check`], with the friend's register measurement applied
/// (outcome not selected) between `U` and `U†`.
pub fn reversal_with_collapse(s: &WignerScenario, probe: &Povm) -> Result<ReversalReport> {
    check_probe(s, probe)?;
    let u = friend_interaction_unitary(s)?;
    let rho0 = initial_state(s).density();
    let forward = u.matrix() * &(rho0.matrix() * &u.matrix().adjoint());
    let mut collapsed = ComplexMatrix::zeros(s.composite_dim(), s.composite_dim());
    for e in friend_povm(s)?.effects() {
        let p = e.matrix();
        collapsed = &collapsed + &(p * &(&forward * p));
    }
    let back = &u.matrix().adjoint() * &(&collapsed * u.matrix());
    compare(s, probe, &DensityOperator::with_tol(back, 1e-8)?)
}

/// Outside observer's and friend's probability assignments, side by side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPerspectiveReport {
    /// `state_to_probs(|Φ⟩⟨Φ|)` with the composite reference apparatus.
    pub composite: ProbVector,
    /// `state_to_probs(|ψ_i⟩⟨ψ_i|)` with the object reference apparatus.
    pub branches: [ProbVector; 2],
    /// `|α|²`, `|β|²`.
    pub branch_weights: [f64; 2],
}

/// Both books, with no relation asserted between them.
pub fn two_perspective_report(
    s: &WignerScenario,
    ref_o: &ReferenceApparatus,
    ref_c: &ReferenceApparatus,
) -> Result<TwoPerspectiveReport> {
    if ref_o.dim() != s.object_dim() {
        return Err(Error::DimensionMismatch {
            context: "object reference apparatus",
            expected: s.object_dim(),
            found: ref_o.dim(),
        });
    }
    if ref_c.dim() != s.composite_dim() {
        return Err(Error::DimensionMismatch {
            context: "composite reference apparatus",
            expected: s.composite_dim(),
            found: ref_c.dim(),
        });
    }
    Ok(TwoPerspectiveReport {
        composite: state_to_probs(&composite_state(s)?.density(), ref_c)?,
        branches: [
            state_to_probs(&s.psi[0].density(), ref_o)?,
            state_to_probs(&s.psi[1].density(), ref_o)?,
        ],
        branch_weights: [s.alpha.norm_sqr(), s.beta.norm_sqr()],
    })
}
