//! Seeded samplers for states, unitaries and measurements.
//!
//! All samplers take the generator explicitly so that parallel callers can
//! partition work by `(seed, stream)` and stay reproducible.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::matrix::ComplexMatrix;
use crate::quantum::{DensityOperator, Effect, Ket, Povm, UnitaryMap};

pub type SeededRng = ChaCha8Rng;

/// Generator for stream `stream` of `seed`; streams are independent.
pub fn seeded_rng(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let entries = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    ComplexMatrix::new(rows, cols, entries).expect("shape is consistent by construction")
}

/// Unitarily invariant (Haar) random pure state.
pub fn haar_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Ket {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| complex_normal(rng)).collect();
        if let Ok(k) = Ket::normalized(v) {
            return k;
        }
    }
}

/// Hilbert–Schmidt random mixed state `GG†/tr(GG†)`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOperator {
    random_density_of_rank(dim, dim, rng)
}

/// Random state of rank at most `rank` (rank 1 gives a Haar pure state).
pub fn random_density_of_rank<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityOperator {
    let g = ginibre(dim, rank.max(1), rng);
    let w = &g * &g.adjoint();
    let t = w.trace().re;
    DensityOperator::new(w.scale(1.0 / t)).expect("GG†/tr is a density operator")
}

/// Haar random unitary via QR of a Ginibre matrix with the phase fix on R's
/// diagonal.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMap {
    let qr = ginibre(dim, dim, rng).into_nalgebra().qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMap::new(ComplexMatrix::from_nalgebra(q)).expect("QR factor is unitary")
}

/// Random `m`-outcome POVM: full-rank Wishart elements `G_k`, normalized as
/// `S^{-1/2} G_k S^{-1/2}` with `S = Σ G_k`.
pub fn random_povm<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Result<Povm> {
    let raw: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let g = ginibre(dim, dim, rng);
            &g * &g.adjoint()
        })
        .collect();
    normalize_to_povm(dim, &raw)
}

/// `{S^{-1/2} G_k S^{-1/2}}` for positive `G_k` whose sum `S` is invertible.
pub(crate) fn normalize_to_povm(dim: usize, raw: &[ComplexMatrix]) -> Result<Povm> {
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for g in raw {
        sum = &sum + g;
    }
    let s = sum.inv_sqrt_pd()?;
    let effects = raw
        .iter()
        .map(|g| Effect::new(&(&s * g) * &s))
        .collect::<Result<Vec<_>>>()?;
    Povm::new(effects)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| seeded_rng(7, 1).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| seeded_rng(7, 1).random()).collect();
        assert_eq!(a, b);
        let x: u64 = seeded_rng(7, 1).random();
        let y: u64 = seeded_rng(7, 2).random();
        assert_ne!(x, y);
    }

    #[test]
    fn samplers_produce_valid_objects() {
        let mut rng = seeded_rng(1, 0);
        for d in 2..=5 {
            let k = haar_ket(d, &mut rng);
            assert_eq!(k.dim(), d);
            let rho = random_density(d, &mut rng);
            assert!(rho.eigenvalues().unwrap()[0] > -1e-12);
            let pure = random_density_of_rank(d, 1, &mut rng);
            assert!((pure.purity() - 1.0).abs() < 1e-12);
            let u = random_unitary(d, &mut rng);
            assert_eq!(u.dim(), d);
            for m in [1, 2, d * d + 2] {
                let povm = random_povm(d, m, &mut rng).unwrap();
                assert_eq!(povm.len(), m);
                assert!(povm.completeness_residual() < 1e-12);
            }
        }
    }
}
