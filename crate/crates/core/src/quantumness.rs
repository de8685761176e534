//! The distance `‖I − Φ‖` of a reference apparatus from classicality, its
//! SIC value, and a sampling experiment comparing the two.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{singular_values, ComplexMatrix, NormSpec};
use crate::random::seeded_rng;
use crate::reference::{phi_matrix, PhiMatrix, ReferenceApparatus};
use crate::sic::verify_sic;

/// A sample counts as a violation if its distance is below `d_Q − slack`.
pub const ASSERTION_SLACK: f64 = 1e-6;
/// Samples within this of `d_Q` are cross-checked with [`verify_sic`].
pub const EQUALITY_THRESHOLD: f64 = 1e-6;

pub fn identity_minus_phi(phi: &PhiMatrix) -> ComplexMatrix {
    let n = phi.size();
    &ComplexMatrix::identity(n) - &phi.to_complex()
}

pub fn quantumness_distance(reference: &ReferenceApparatus, spec: NormSpec) -> Result<f64> {
    Ok(quantumness_distances(reference, &[spec])?[0])
}

/// Several norms of `I − Φ` from one singular value decomposition.
pub fn quantumness_distances(reference: &ReferenceApparatus, specs: &[NormSpec]) -> Result<Vec<f64>> {
    let n = reference.outcomes();
    for s in specs {
        s.validate(n, n)?;
    }
    let sv = singular_values(&identity_minus_phi(&phi_matrix(reference)?))?;
    Ok(specs.iter().map(|s| s.from_singular_values(&sv)).collect())
}

/// `‖I − Φ_SIC‖` from the singular values `{d (×d²−1), 0}`.
pub fn sic_quantumness(dim: usize, spec: NormSpec) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidObject {
            kind: "quantumness",
            predicate: "dimension >= 2",
            magnitude: dim as f64,
        });
    }
    let n = dim * dim;
    spec.validate(n, n)?;
    let d = dim as f64;
    let m = (n - 1) as f64;
    Ok(match spec {
        NormSpec::Trace => d * m,
        NormSpec::Frobenius => d * m.sqrt(),
        NormSpec::Operator => d,
        NormSpec::Schatten(p) => d * m.powf(1.0 / p),
        NormSpec::KyFan(k) => d * (k.min(n - 1)) as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearEquality {
    pub sample: usize,
    pub distance: f64,
    /// Whether the sample's effects pass `verify_sic` at 1e-6.
    pub sic_verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumnessReport {
    pub dim: usize,
    pub norm: NormSpec,
    pub n_samples: usize,
    pub seed: u64,
    pub slack: f64,
    pub sic_distance: f64,
    /// Distances of the successfully drawn samples, in sample order.
    pub distances: Vec<f64>,
    pub min_distance: Option<f64>,
    /// `min_distance − sic_distance`.
    pub observed_gap: Option<f64>,
    pub violations: usize,
    pub near_equalities: Vec<NearEquality>,
    pub sampler_failures: usize,
}

/// Draws `n_samples` random reference apparatuses (sample `i` from stream
/// `i` of `seed`) and compares `‖I − Φ‖` with the SIC value.
pub fn minimality_experiment(dim: usize, spec: NormSpec, n_samples: usize, seed: u64) -> Result<QuantumnessReport> {
    Ok(minimality_experiment_multi(dim, &[spec], n_samples, seed)?.remove(0))
}

/// Same experiment for several norms on a shared set of samples.
pub fn minimality_experiment_multi(
    dim: usize,
    specs: &[NormSpec],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<QuantumnessReport>> {
    let sic: Vec<f64> = specs
        .iter()
        .map(|&s| sic_quantumness(dim, s))
        .collect::<Result<_>>()?;

    struct Sample {
        distances: Vec<f64>,
        reference: ReferenceApparatus,
    }
    let samples: Vec<Option<Sample>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(seed, i as u64);
            let reference = ReferenceApparatus::random(dim, &mut rng).ok()?;
            let distances = quantumness_distances(&reference, specs).ok()?;
            Some(Sample { distances, reference })
        })
        .collect();
    let failures = samples.iter().filter(|s| s.is_none()).count();

    let reports = specs
        .iter()
        .enumerate()
        .map(|(k, &spec)| {
            let d_q = sic[k];
            let mut distances = Vec::with_capacity(n_samples);
            let mut near_equalities = Vec::new();
            let mut violations = 0;
            for (i, s) in samples.iter().enumerate() {
                let Some(s) = s else { continue };
                let x = s.distances[k];
                distances.push(x);
                if x < d_q - ASSERTION_SLACK {
                    violations += 1;
                }
                if (x - d_q).abs() <= EQUALITY_THRESHOLD {
                    let sic_verified = verify_sic(s.reference.effects(), 1e-6).map(|r| r.passed).unwrap_or(false);
                    near_equalities.push(NearEquality {
                        sample: i,
                        distance: x,
                        sic_verified,
                    });
                }
            }
            let min_distance = distances.iter().copied().reduce(f64::min);
            QuantumnessReport {
                dim,
                norm: spec,
                n_samples,
                seed,
                slack: ASSERTION_SLACK,
                sic_distance: d_q,
                observed_gap: min_distance.map(|m| m - d_q),
                min_distance,
                distances,
                violations,
                near_equalities,
                sampler_failures: failures,
            }
        })
        .collect();
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ui_norm;
    use crate::sic::{sic_phi, sic_reference, Fiducial};
    use approx::assert_abs_diff_eq;

    const NORMS: [NormSpec; 5] = [
        NormSpec::Trace,
        NormSpec::Frobenius,
        NormSpec::Operator,
        NormSpec::Schatten(3.0),
        NormSpec::KyFan(2),
    ];

    #[test]
    fn sic_reference_distance_examples() {
        let r = sic_reference(&Fiducial::builtin(2).unwrap().unwrap()).unwrap();
        assert_abs_diff_eq!(
            quantumness_distance(&r, NormSpec::Frobenius).unwrap(),
            2.0 * 3f64.sqrt(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(quantumness_distance(&r, NormSpec::Operator).unwrap(), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(quantumness_distance(&r, NormSpec::Trace).unwrap(), 6.0, epsilon = 1e-9);
    }

    #[test]
    fn closed_forms_match_numerical_norms() {
        for d in 2..=8 {
            let m = identity_minus_phi(&sic_phi(d));
            for spec in NORMS.iter().copied().chain([NormSpec::Schatten(1.5), NormSpec::KyFan(d * d)]) {
                assert_abs_diff_eq!(
                    sic_quantumness(d, spec).unwrap(),
                    ui_norm(&m, spec).unwrap(),
                    epsilon = 1e-9 * (d * d * d) as f64
                );
            }
        }
        assert_abs_diff_eq!(sic_quantumness(3, NormSpec::Frobenius).unwrap(), 3.0 * 8f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(sic_quantumness(2, NormSpec::KyFan(1)).unwrap(), 2.0);
        assert!(sic_quantumness(1, NormSpec::Trace).is_err());
        assert!(sic_quantumness(2, NormSpec::KyFan(17)).is_err());
    }

    #[test]
    fn closed_forms_match_sic_reference() {
        for d in [2, 3] {
            let r = sic_reference(&Fiducial::builtin(d).unwrap().unwrap()).unwrap();
            let numeric = quantumness_distances(&r, &NORMS).unwrap();
            for (spec, x) in NORMS.iter().zip(numeric) {
                assert_abs_diff_eq!(sic_quantumness(d, *spec).unwrap(), x, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn monotone_in_norm_parameter() {
        let m = identity_minus_phi(&sic_phi(3));
        let kf: Vec<f64> = (1..=9).map(|k| ui_norm(&m, NormSpec::KyFan(k)).unwrap()).collect();
        assert!(kf.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let sp: Vec<f64> = [1.0, 1.5, 2.0, 3.0, 8.0]
            .iter()
            .map(|&p| ui_norm(&m, NormSpec::Schatten(p)).unwrap())
            .collect();
        assert!(sp.windows(2).all(|w| w[0] >= w[1] - 1e-12));
    }

    #[test]
    fn experiment_examples() {
        let r = minimality_experiment(2, NormSpec::Frobenius, 1000, 1).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.distances.len() + r.sampler_failures, 1000);
        assert!(r.min_distance.unwrap() > 2.0 * 3f64.sqrt());
        assert!(r.near_equalities.is_empty());

        let t = minimality_experiment(2, NormSpec::Trace, 1000, 1).unwrap();
        assert_eq!(t.violations, 0);

        let empty = minimality_experiment(2, NormSpec::Trace, 0, 1).unwrap();
        assert_eq!(empty.violations, 0);
        assert!(empty.distances.is_empty());
        assert_eq!(empty.min_distance, None);
    }

    #[test]
    fn experiment_is_deterministic() {
        let a = minimality_experiment_multi(3, &NORMS, 20, 9).unwrap();
        let b = minimality_experiment_multi(3, &NORMS, 20, 9).unwrap();
        assert_eq!(a, b);
        let single = minimality_experiment(3, NormSpec::Schatten(3.0), 20, 9).unwrap();
        assert_eq!(single, a[3]);
    }
}
