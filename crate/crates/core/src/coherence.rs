//! Coherence of probability books, Feynman's amplitude composition, and
//! compatibility criteria for two agents' state assignments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, DEFAULT_TOL};
use crate::probability::{CondMatrix, ProbVector};
use crate::quantum::{born_operator, lueders_update, partial_trace, DensityOperator, Effect, Ket, Povm, Subsystem, Tensor};

/// Principal angles below this (radians) count as a shared direction.
pub const ANGLE_TOL: f64 = 1e-6;

/// An agent's priors `P(R)`, conditionals `P(E|R)` and, optionally, a
/// directly claimed marginal `P(E)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityBook {
    priors: ProbVector,
    conditionals: CondMatrix,
    marginal: Option<ProbVector>,
}

impl ProbabilityBook {
    pub fn new(priors: ProbVector, conditionals: CondMatrix, marginal: Option<ProbVector>) -> Result<Self> {
        if conditionals.cols() != priors.len() {
            return Err(Error::DimensionMismatch {
                context: "probability book (conditionals vs priors)",
                expected: priors.len(),
                found: conditionals.cols(),
            });
        }
        if let Some(m) = &marginal {
            if m.len() != conditionals.rows() {
                return Err(Error::DimensionMismatch {
                    context: "probability book (marginal vs conditionals)",
                    expected: conditionals.rows(),
                    found: m.len(),
                });
            }
        }
        Ok(Self {
            priors,
            conditionals,
            marginal,
        })
    }

    /// The book whose marginal is computed by the law of total probability.
    pub fn forward(priors: ProbVector, conditionals: CondMatrix) -> Result<Self> {
        let m = ProbVector::new(conditionals.apply(priors.entries())?)?;
        Self::new(priors, conditionals, Some(m))
    }

    pub fn priors(&self) -> &ProbVector {
        &self.priors
    }

    pub fn conditionals(&self) -> &CondMatrix {
        &self.conditionals
    }

    pub fn marginal(&self) -> Option<&ProbVector> {
        self.marginal.as_ref()
    }
}

/// Agent's net payoff in one world `(R_i, E_j occurs or not)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldPayoff {
    pub reference_outcome: usize,
    pub event_occurs: bool,
    pub payoff: f64,
}

/// A set of trades, each at the agent's own prices, that loses money in
/// every world. Tickets pay 1 if their event happens.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DutchBookWitness {
    pub outcome: usize,
    /// `true`: the agent buys the `E_j` ticket and sells every `R_i ∧ E_j`
    /// ticket; `false`: the reverse.
    pub agent_buys_marginal: bool,
    pub marginal_price: f64,
    /// Prices `P(R_i) P(E_j|R_i)` of the joint tickets.
    pub joint_prices: Vec<f64>,
    pub sure_loss: f64,
    pub payoffs: Vec<WorldPayoff>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceVerdict {
    pub coherent: bool,
    pub tol: f64,
    /// `Σ_i P(R_i) P(E_j|R_i)`.
    pub implied: Vec<f64>,
    pub deviations: Vec<f64>,
    pub worst_outcome: usize,
    pub max_deviation: f64,
    pub witness: Option<DutchBookWitness>,
}

/// Checks the claimed marginal against the law of total probability.
pub fn check_ltp(book: &ProbabilityBook, tol: f64) -> Result<CoherenceVerdict> {
    let claimed = book.marginal.as_ref().ok_or(Error::MissingMarginal)?;
    let implied = book.conditionals.apply(book.priors.entries())?;
    let deviations: Vec<f64> = claimed.entries().iter().zip(&implied).map(|(c, m)| c - m).collect();
    let (worst, max_dev) = deviations
        .iter()
        .map(|x| x.abs())
        .enumerate()
        .fold((0, 0.0), |acc, (j, x)| if x > acc.1 { (j, x) } else { acc });
    let coherent = max_dev <= tol;
    let witness = (!coherent).then(|| dutch_book(book, claimed, worst));
    Ok(CoherenceVerdict {
        coherent,
        tol,
        implied,
        deviations,
        worst_outcome: worst,
        max_deviation: max_dev,
        witness,
    })
}

fn dutch_book(book: &ProbabilityBook, claimed: &ProbVector, j: usize) -> DutchBookWitness {
    let q = claimed.get(j);
    let joint_prices: Vec<f64> = (0..book.priors.len())
        .map(|i| book.priors.get(i) * book.conditionals.get(j, i))
        .collect();
    let m: f64 = joint_prices.iter().sum();
    // Buy whichever side the agent has overpriced relative to the other.
    let buys = q > m;
    let sign = if buys { 1.0 } else { -1.0 };
    let mut payoffs = Vec::new();
    for i in 0..joint_prices.len() {
        for occurs in [true, false] {
            let hit = if occurs { 1.0 } else { 0.0 };
            let marginal_leg = hit - q;
            let joint_leg: f64 = joint_prices
                .iter()
                .enumerate()
                .map(|(k, price)| (if k == i { hit } else { 0.0 }) - price)
                .sum();
            payoffs.push(WorldPayoff {
                reference_outcome: i,
                event_occurs: occurs,
                payoff: sign * (marginal_leg - joint_leg),
            });
        }
    }
    DutchBookWitness {
        outcome: j,
        agent_buys_marginal: buys,
        marginal_price: q,
        joint_prices,
        sure_loss: (q - m).abs(),
        payoffs,
    }
}

/// Transition amplitudes `φ_ab` (rows `a`, columns `b`) and `φ_bc`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeTable {
    pub ab: ComplexMatrix,
    pub bc: ComplexMatrix,
}

impl AmplitudeTable {
    pub fn new(ab: ComplexMatrix, bc: ComplexMatrix) -> Result<Self> {
        if ab.cols() != bc.rows() {
            return Err(Error::DimensionMismatch {
                context: "amplitude table (intermediate events)",
                expected: ab.cols(),
                found: bc.rows(),
            });
        }
        Ok(Self { ab, bc })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeynmanComparison {
    pub rows: usize,
    pub cols: usize,
    /// `|Σ_b φ_ab φ_bc|²`, row-major over `(a, c)`.
    pub quantum: Vec<f64>,
    /// `Σ_b |φ_ab|² |φ_bc|²`.
    pub classical: Vec<f64>,
    pub max_gap: f64,
}

pub fn feynman_compose(t: &AmplitudeTable) -> Result<FeynmanComparison> {
    let t = AmplitudeTable::new(t.ab.clone(), t.bc.clone())?;
    let (na, nb, nc) = (t.ab.rows(), t.ab.cols(), t.bc.cols());
    let mut quantum: Vec<f64> = Vec::with_capacity(na * nc);
    let mut classical: Vec<f64> = Vec::with_capacity(na * nc);
    for a in 0..na {
        for c in 0..nc {
            let amp: Complex64 = (0..nb).map(|b| t.ab.get(a, b) * t.bc.get(b, c)).sum();
            quantum.push(amp.norm_sqr());
            classical.push((0..nb).map(|b| t.ab.get(a, b).norm_sqr() * t.bc.get(b, c).norm_sqr()).sum());
        }
    }
    let max_gap = quantum
        .iter()
        .zip(&classical)
        .map(|(q, c)| (q - c).abs())
        .fold(0.0, f64::max);
    Ok(FeynmanComparison {
        rows: na,
        cols: nc,
        quantum,
        classical,
        max_gap,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeierlsVerdict {
    pub commutator_norm: f64,
    pub product_norm: f64,
    pub commute: bool,
    pub product_nonzero: bool,
    pub compatible: bool,
}

fn same_dim(r1: &DensityOperator, r2: &DensityOperator) -> Result<()> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch {
            context: "compatibility",
            expected: r1.dim(),
            found: r2.dim(),
        });
    }
    Ok(())
}

/// Peierls: the two density matrices commute and their product is nonzero.
pub fn peierls_compatible(r1: &DensityOperator, r2: &DensityOperator, tol: f64) -> Result<PeierlsVerdict> {
    same_dim(r1, r2)?;
    let commutator_norm = r1.matrix().commutator(r2.matrix()).frobenius_norm();
    // ‖r1 r2‖_F = ‖r2 r1‖_F for Hermitian arguments, so this is symmetric.
    let product_norm = (r1.matrix() * r2.matrix()).frobenius_norm();
    let commute = commutator_norm <= tol;
    let product_nonzero = product_norm > tol;
    Ok(PeierlsVerdict {
        commutator_norm,
        product_norm,
        commute,
        product_nonzero,
        compatible: commute && product_nonzero,
    })
}

/// Orthonormal basis (columns) of the eigenvectors with eigenvalue > `tol`.
fn support(rho: &DensityOperator, tol: f64) -> Result<ComplexMatrix> {
    let eig = rho.matrix().hermitian_eigen()?;
    let d = rho.dim();
    let keep: Vec<usize> = (0..d).filter(|&k| eig.values[k] > tol).collect();
    Ok(ComplexMatrix::from_fn(d, keep.len(), |i, j| eig.vectors.get(i, keep[j])))
}

/// `sin` of the smallest principal angle between `span(q2)` and `span(q1)`,
/// as the smallest singular value of `(I − Q1Q1†) Q2`.
fn min_sine(q1: &ComplexMatrix, q2: &ComplexMatrix) -> Result<f64> {
    let d = q1.rows();
    let residual = &(&ComplexMatrix::identity(d) - &(q1 * &q1.adjoint())) * q2;
    let sv = crate::matrix::singular_values(&residual)?;
    Ok(sv.last().copied().unwrap_or(1.0))
}

/// Smallest principal angle (radians) between the supports of `r1` and
/// `r2`, where the support is spanned by eigenvectors with eigenvalue
/// above `tol`.
pub fn support_angle(r1: &DensityOperator, r2: &DensityOperator, tol: f64) -> Result<f64> {
    same_dim(r1, r2)?;
    let (q1, q2) = (support(r1, tol)?, support(r2, tol)?);
    if q1.cols() == 0 || q2.cols() == 0 {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    let s = min_sine(&q1, &q2)?.min(min_sine(&q2, &q1)?);
    Ok(s.clamp(0.0, 1.0).asin())
}

/// Brun–Finkelstein–Mermin compatibility read as "the supports intersect".
/// For pure states this holds exactly when the states are equal.
pub fn bfm_compatible(r1: &DensityOperator, r2: &DensityOperator, tol: f64) -> Result<bool> {
    Ok(support_angle(r1, r2, tol)? < ANGLE_TOL)
}

/// The W / W′ criteria: every pair of states is compatible. Dimensions are
/// still checked.
pub fn w_compatible(r1: &DensityOperator, r2: &DensityOperator) -> Result<bool> {
    same_dim(r1, r2)?;
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoPmReport {
    pub pre_bfm_compatible: bool,
    pub pre_w_compatible: bool,
    /// Each agent's probability of outcome 1 on the first qubit.
    pub outcome_one_probability: [f64; 2],
    /// Second-qubit states after outcome 1.
    pub post_marginals: [ComplexMatrix; 2],
    /// `‖post_marginal − |±⟩⟨±|‖_F`.
    pub post_marginal_errors: [f64; 2],
    /// `tr(σ₊ σ₋)` of the two post-measurement marginals.
    pub post_overlap: f64,
    pub post_bfm_compatible: bool,
    pub post_peierls: PeierlsVerdict,
    pub post_w_compatible: bool,
    /// Each agent's `{|+⟩, |−⟩}` probabilities for the second qubit.
    pub followup: [ProbVector; 2],
}

/// `ρ± = ½(|00⟩⟨00| + |±±⟩⟨±±|)`.
pub fn rho_pm(sign: bool) -> DensityOperator {
    let k = if sign { Ket::plus() } else { Ket::minus() };
    let zero = Ket::basis(2, 0);
    let m = &zero.tensor(&zero).projector() + &k.tensor(&k).projector();
    DensityOperator::new(m.scale(0.5)).expect("mixture of pure states")
}

/// Two agents, states `ρ₊` and `ρ₋`, the first qubit measured in
/// `{|0⟩, |1⟩}` with outcome 1.
pub fn rho_pm_scenario() -> RhoPmReport {
    let run = || -> Result<RhoPmReport> {
        let agents = [rho_pm(true), rho_pm(false)];
        let targets = [Ket::plus().density(), Ket::minus().density()];
        let one = Effect::projector(&Ket::basis(2, 1)).matrix().kron(&ComplexMatrix::identity(2));
        let one = Effect::new(one)?;
        let pm = Povm::new(vec![Effect::projector(&Ket::plus()), Effect::projector(&Ket::minus())])?;

        let mut probs = [0.0; 2];
        let mut marginals = Vec::with_capacity(2);
        let mut errors = [0.0; 2];
        let mut followup = Vec::with_capacity(2);
        for (k, rho) in agents.iter().enumerate() {
            let (post, p) = lueders_update(rho, &one)?;
            probs[k] = p;
            let m = DensityOperator::new(partial_trace(post.matrix(), (2, 2), Subsystem::B)?)?;
            errors[k] = (m.matrix() - targets[k].matrix()).frobenius_norm();
            followup.push(born_operator(&m, &pm)?);
            marginals.push(m);
        }
        let post_overlap = crate::matrix::hs_inner(marginals[0].matrix(), marginals[1].matrix())?.re;
        Ok(RhoPmReport {
            pre_bfm_compatible: bfm_compatible(&agents[0], &agents[1], DEFAULT_TOL)?,
            pre_w_compatible: w_compatible(&agents[0], &agents[1])?,
            outcome_one_probability: probs,
            post_bfm_compatible: bfm_compatible(&marginals[0], &marginals[1], DEFAULT_TOL)?,
            post_peierls: peierls_compatible(&marginals[0], &marginals[1], DEFAULT_TOL)?,
            post_w_compatible: w_compatible(&marginals[0], &marginals[1])?,
            post_marginal_errors: errors,
            post_overlap,
            post_marginals: [marginals[0].matrix().clone(), marginals[1].matrix().clone()],
            followup: [followup[0].clone(), followup[1].clone()],
        })
    };
    run().expect("fixed two-qubit scenario")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{cascade_probability, measurement_to_cond, state_to_probs};
    use crate::sic::{sic_reference, Fiducial};
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn forward_book_is_coherent() {
        let p = ProbVector::new(vec![0.2, 0.5, 0.3]).unwrap();
        let cond = CondMatrix::new(2, 3, vec![0.1, 0.6, 0.9, 0.9, 0.4, 0.1]).unwrap();
        let book = ProbabilityBook::forward(p, cond).unwrap();
        let v = check_ltp(&book, 1e-12).unwrap();
        assert!(v.coherent);
        assert!(v.witness.is_none());
    }

    #[test]
    fn quantum_claim_fails_ltp_with_witness() {
        // Priors and conditionals from the SIC reference; the claimed
        // marginal is the direct Born-rule value for ρ = |0⟩⟨0|, Z basis.
        let r = sic_reference(&Fiducial::builtin(2).unwrap().unwrap()).unwrap();
        let rho = Ket::basis(2, 0).density();
        let z = Povm::computational_basis(2);
        let priors = state_to_probs(&rho, &r).unwrap();
        let cond = measurement_to_cond(&z, &r).unwrap();
        let q = born_operator(&rho, &z).unwrap();
        let cascade = cascade_probability(&rho, &r, &z).unwrap();
        let book = ProbabilityBook::new(priors, cond, Some(q.clone())).unwrap();
        let v = check_ltp(&book, 1e-9).unwrap();
        assert!(!v.coherent);
        assert_abs_diff_eq!(v.max_deviation, q.max_abs_diff(&cascade), epsilon = 1e-12);
        assert_abs_diff_eq!(v.max_deviation, 1.0 / 3.0, epsilon = 1e-10);

        let w = v.witness.unwrap();
        assert!(w.agent_buys_marginal);
        assert_eq!(w.payoffs.len(), 8);
        for p in &w.payoffs {
            assert_abs_diff_eq!(p.payoff, -w.sure_loss, epsilon = 1e-12);
        }

        let lenient = check_ltp(&book, f64::INFINITY).unwrap();
        assert!(lenient.coherent);
    }

    #[test]
    fn underpriced_marginal_reverses_trades() {
        let p = ProbVector::new(vec![0.5, 0.5]).unwrap();
        let cond = CondMatrix::new(2, 2, vec![0.8, 0.6, 0.2, 0.4]).unwrap();
        let claimed = ProbVector::new(vec![0.5, 0.5]).unwrap();
        let book = ProbabilityBook::new(p, cond, Some(claimed)).unwrap();
        let w = check_ltp(&book, 1e-9).unwrap().witness.unwrap();
        assert!(!w.agent_buys_marginal);
        assert_abs_diff_eq!(w.sure_loss, 0.2, epsilon = 1e-15);
        assert!(w.payoffs.iter().all(|p| (p.payoff + 0.2).abs() < 1e-15));
    }

    #[test]
    fn book_errors() {
        let p = ProbVector::uniform(2);
        let cond = CondMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let book = ProbabilityBook::new(p.clone(), cond.clone(), None).unwrap();
        assert!(matches!(check_ltp(&book, 1e-9), Err(Error::MissingMarginal)));
        assert!(ProbabilityBook::new(ProbVector::uniform(3), cond.clone(), None).is_err());
        assert!(ProbabilityBook::new(p, cond, Some(ProbVector::uniform(3))).is_err());
    }

    #[test]
    fn feynman_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ab = ComplexMatrix::new(1, 2, vec![c(h), c(h)]).unwrap();
        let destructive = AmplitudeTable::new(ab.clone(), ComplexMatrix::new(2, 1, vec![c(h), c(-h)]).unwrap()).unwrap();
        let out = feynman_compose(&destructive).unwrap();
        assert_abs_diff_eq!(out.quantum[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.classical[0], 0.5, epsilon = 1e-12);

        let constructive = AmplitudeTable::new(ab, ComplexMatrix::new(2, 1, vec![c(h), c(h)]).unwrap()).unwrap();
        let out = feynman_compose(&constructive).unwrap();
        assert_abs_diff_eq!(out.quantum[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.classical[0], 0.5, epsilon = 1e-12);

        let single = AmplitudeTable::new(
            ComplexMatrix::new(1, 1, vec![Complex64::new(0.6, 0.3)]).unwrap(),
            ComplexMatrix::new(1, 1, vec![Complex64::new(-0.2, 0.7)]).unwrap(),
        )
        .unwrap();
        let out = feynman_compose(&single).unwrap();
        assert_abs_diff_eq!(out.quantum[0], out.classical[0], epsilon = 1e-15);

        assert!(AmplitudeTable::new(ComplexMatrix::zeros(1, 2), ComplexMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn peierls_examples() {
        let rho = Ket::plus().density().mix(0.3, &Ket::basis(2, 1).density()).unwrap();
        assert!(peierls_compatible(&rho, &rho, 1e-9).unwrap().compatible);

        let v = peierls_compatible(&Ket::basis(2, 0).density(), &Ket::basis(2, 1).density(), 1e-9).unwrap();
        assert!(v.commute && !v.product_nonzero && !v.compatible);

        // [|0⟩⟨0|, |+⟩⟨+|] = (1/2)(|0⟩⟨1| − |1⟩⟨0|), Frobenius norm 1/√2.
        let v = peierls_compatible(&Ket::basis(2, 0).density(), &Ket::plus().density(), 1e-9).unwrap();
        assert!(!v.commute && !v.compatible);
        assert_abs_diff_eq!(v.commutator_norm, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);

        assert!(peierls_compatible(&rho, &DensityOperator::maximally_mixed(3), 1e-9).is_err());
    }

    #[test]
    fn bfm_examples() {
        let zero = Ket::basis(2, 0).density();
        let plus = Ket::plus().density();
        assert!(bfm_compatible(&plus, &plus, 1e-9).unwrap());
        assert!(!bfm_compatible(&zero, &plus, 1e-9).unwrap());
        assert_abs_diff_eq!(support_angle(&zero, &plus, 1e-9).unwrap(), std::f64::consts::FRAC_PI_4, epsilon = 1e-12);
        assert!(bfm_compatible(&DensityOperator::maximally_mixed(2), &plus, 1e-9).unwrap());
        assert!(bfm_compatible(&zero, &DensityOperator::maximally_mixed(2), 1e-9).unwrap());
        assert!(bfm_compatible(&zero, &plus, 1e-9).is_ok());
        assert!(bfm_compatible(&zero, &DensityOperator::maximally_mixed(3), 1e-9).is_err());
        assert!(w_compatible(&zero, &Ket::basis(2, 1).density()).unwrap());
    }

    #[test]
    fn rho_pm_report() {
        let r = rho_pm_scenario();
        assert!(r.pre_bfm_compatible);
        assert!(r.pre_w_compatible);
        for k in 0..2 {
            assert_abs_diff_eq!(r.outcome_one_probability[k], 0.25, epsilon = 1e-10);
            assert!(r.post_marginal_errors[k] <= 1e-10);
        }
        assert_abs_diff_eq!(r.post_overlap, 0.0, epsilon = 1e-10);
        assert!(!r.post_bfm_compatible);
        assert!(!r.post_peierls.compatible);
        assert!(r.post_w_compatible);
        assert_abs_diff_eq!(r.followup[0].get(0), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.followup[1].get(0), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.followup[1].get(1), 1.0, epsilon = 1e-10);
    }
}
