//! Weyl–Heisenberg covariant SICs: verification, fiducial search and the SIC
//! reference apparatus.
//!
//! Displacements use the plain convention `D_(a,b) = X^a Z^b` with
//! `X|j⟩ = |j+1 mod d⟩` and `Z|j⟩ = ω^j |j⟩`. Overlap moduli
//! `|⟨ψ|D|ψ⟩|` do not depend on the phase convention.
//!
//! The search minimizes the frame potential
//! `F(ψ) = Σ_{k≠0} |⟨ψ|D_k|ψ⟩|⁴`, whose global minimum `(d−1)/(d+1)` is
//! attained exactly when every `|⟨ψ|D_k|ψ⟩|² = 1/(d+1)`. Each restart runs
//! L-BFGS on the unit sphere (step, then renormalize) until the line search
//! can no longer resolve progress in `F`, then polishes with Gauss–Newton on
//! the overlap equations themselves, which converges to machine precision
//! where differences in `F` are below rounding.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::matrix::{hs_inner, ComplexMatrix, ZERO};
use crate::probability::{CondMatrix, ProbVector};
use crate::quantum::{DensityOperator, Effect, Ket, Povm};
use crate::random::{haar_ket, seeded_rng};
use crate::reference::{checked_probabilities, PhiMatrix, ReferenceApparatus};

/// Tolerance used by [`sic_reference`] and built-in fiducial checks.
pub const SIC_TOL: f64 = 1e-9;

/// Restarts evaluated together before checking for a success. Fixed so the
/// chosen restart does not depend on the thread count.
const RESTART_BATCH: usize = 8;
const LBFGS_MEMORY: usize = 8;
const POLISH_MAX_ITERS: usize = 50;
/// Switch from L-BFGS to the Gauss–Newton polish once overlaps are this close.
const POLISH_HANDOFF: f64 = 1e-5;

/// The `d²` displacement operators `X^a Z^b`, indexed `k = a·d + b`.
#[derive(Clone, Debug)]
pub struct WeylHeisenberg {
    dim: usize,
    /// `ω^m` for `m = 0..d`.
    roots: Vec<Complex64>,
}

impl WeylHeisenberg {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "Weyl–Heisenberg group needs d >= 1");
        let roots = (0..dim)
            .map(|m| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / dim as f64))
            .collect();
        Self { dim, roots }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(a, b)` for index `k`.
    pub fn index(&self, k: usize) -> (usize, usize) {
        (k / self.dim, k % self.dim)
    }

    fn omega(&self, exponent: usize) -> Complex64 {
        self.roots[exponent % self.dim]
    }

    pub fn shift(&self) -> ComplexMatrix {
        self.displacement(1, 0)
    }

    pub fn clock(&self) -> ComplexMatrix {
        self.displacement(0, 1)
    }

    /// Dense `X^a Z^b`: entry `(j + a, j)` is `ω^{bj}`.
    pub fn displacement(&self, a: usize, b: usize) -> ComplexMatrix {
        let d = self.dim;
        ComplexMatrix::from_fn(d, d, |row, col| {
            if row == (col + a) % d {
                self.omega(b * col)
            } else {
                ZERO
            }
        })
    }

    /// `X^a Z^b v` without forming the matrix.
    pub fn apply(&self, a: usize, b: usize, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim;
        let mut out = vec![ZERO; d];
        for (j, &x) in v.iter().enumerate() {
            out[(j + a) % d] = self.omega(b * j) * x;
        }
        out
    }

    /// `(X^a Z^b)† v = Z^{-b} X^{-a} v`.
    pub fn apply_adjoint(&self, a: usize, b: usize, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim;
        (0..d)
            .map(|j| self.omega(b * j).conj() * v[(j + a) % d])
            .collect()
    }

    /// `ψ_k = D_k ψ` for every `k`.
    pub fn orbit(&self, fiducial: &Ket) -> Vec<Ket> {
        (0..self.len())
            .map(|k| {
                let (a, b) = self.index(k);
                Ket::with_tol(self.apply(a, b, fiducial.amplitudes()), 1e-6).expect("displacements are unitary")
            })
            .collect()
    }

    /// `⟨ψ|D_k|ψ⟩` for every `k`.
    pub fn overlaps(&self, psi: &[Complex64]) -> Vec<Complex64> {
        (0..self.len())
            .map(|k| {
                let (a, b) = self.index(k);
                inner(psi, &self.apply(a, b, psi))
            })
            .collect()
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Real inner product on `C^d ≅ R^{2d}`.
fn real_dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

fn normalize(v: &mut [Complex64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
}

/// `Σ_{k≠0} |⟨ψ|D_k|ψ⟩|⁴` for normalized `ψ`.
pub fn frame_potential(wh: &WeylHeisenberg, psi: &[Complex64]) -> f64 {
    wh.overlaps(psi).iter().skip(1).map(|c| c.norm_sqr().powi(2)).sum()
}

/// `(d − 1)/(d + 1)`.
pub fn frame_potential_minimum(dim: usize) -> f64 {
    (dim as f64 - 1.0) / (dim as f64 + 1.0)
}

/// Frame potential and its Euclidean gradient on `R^{2d}`, packed as a
/// complex vector (`∂/∂Re + i ∂/∂Im = 2 ∂/∂ψ*`).
pub fn frame_potential_gradient(wh: &WeylHeisenberg, psi: &[Complex64]) -> (f64, Vec<Complex64>) {
    let d = wh.dim();
    let mut value = 0.0;
    let mut grad = vec![ZERO; d];
    for k in 1..wh.len() {
        let (a, b) = wh.index(k);
        let dpsi = wh.apply(a, b, psi);
        let dadj = wh.apply_adjoint(a, b, psi);
        let c = inner(psi, &dpsi);
        let m = c.norm_sqr();
        value += m * m;
        // ∂|c|⁴/∂ψ* = 2|c|² (c* Dψ + c D†ψ)
        for j in 0..d {
            grad[j] += (c.conj() * dpsi[j] + c * dadj[j]) * (4.0 * m);
        }
    }
    (value, grad)
}

/// `max_{k≠0} | |⟨ψ|D_k|ψ⟩|² − 1/(d+1) |`.
pub fn overlap_residual(wh: &WeylHeisenberg, psi: &[Complex64]) -> f64 {
    let target = 1.0 / (wh.dim() as f64 + 1.0);
    wh.overlaps(psi)
        .iter()
        .skip(1)
        .map(|c| (c.norm_sqr() - target).abs())
        .fold(0.0, f64::max)
}

/// Overlap residuals `r_k = |⟨ψ|D_kψ⟩|²/‖ψ‖⁴ − 1/(d+1)` for `k ≠ 0` and
/// their Jacobian at unit `ψ` with respect to `(Re ψ, Im ψ)`. The scale
/// direction lies in the Jacobian's kernel.
pub fn overlap_jacobian(wh: &WeylHeisenberg, psi: &[Complex64]) -> (DVector<f64>, DMatrix<f64>) {
    let d = wh.dim();
    let target = 1.0 / (d as f64 + 1.0);
    let rows = wh.len() - 1;
    let mut r = DVector::zeros(rows);
    let mut jac = DMatrix::zeros(rows, 2 * d);
    let i = Complex64::new(0.0, 1.0);
    for k in 1..wh.len() {
        let (a, b) = wh.index(k);
        let dpsi = wh.apply(a, b, psi);
        let dadj = wh.apply_adjoint(a, b, psi);
        let c = inner(psi, &dpsi);
        let m = c.norm_sqr();
        r[k - 1] = m - target;
        for j in 0..d {
            let along_re = dpsi[j] + dadj[j].conj();
            let along_im = -i * dpsi[j] + i * dadj[j].conj();
            jac[(k - 1, j)] = 2.0 * (c.conj() * along_re).re - 4.0 * m * psi[j].re;
            jac[(k - 1, d + j)] = 2.0 * (c.conj() * along_im).re - 4.0 * m * psi[j].im;
        }
    }
    (r, jac)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Provenance {
    Builtin,
    Search { seed: u64, restart: usize, iterations: usize },
    File,
}

/// A fiducial vector whose Weyl–Heisenberg orbit is the candidate SIC.
#[derive(Clone, Debug, PartialEq)]
pub struct Fiducial {
    pub ket: Ket,
    pub provenance: Provenance,
}

/// On-disk fiducial: `{"dim", "re", "im", "residual", "seed"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiducialFile {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub residual: f64,
    pub seed: Option<u64>,
}

impl Fiducial {
    pub fn new(ket: Ket, provenance: Provenance) -> Self {
        Self { ket, provenance }
    }

    pub fn dim(&self) -> usize {
        self.ket.dim()
    }

    /// Exact fiducials for `d = 2` (Bloch vector `(1,1,1)/√3`) and `d = 3`
    /// (`(0, 1, −1)/√2`), each checked with [`verify_sic`] before use.
    pub fn builtin(dim: usize) -> Option<Result<Self>> {
        let amplitudes = match dim {
            2 => {
                let cos_theta = 1.0 / 3f64.sqrt();
                let half = cos_theta.acos() / 2.0;
                vec![
                    Complex64::new(half.cos(), 0.0),
                    Complex64::from_polar(half.sin(), std::f64::consts::FRAC_PI_4),
                ]
            }
            3 => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                vec![ZERO, Complex64::new(h, 0.0), Complex64::new(-h, 0.0)]
            }
            _ => return None,
        };
        let check = || -> Result<Self> {
            let f = Fiducial::new(Ket::new(amplitudes)?, Provenance::Builtin);
            let report = verify_sic(&sic_from_fiducial(&f), SIC_TOL)?;
            if !report.passed {
                return Err(Error::NotSic {
                    deviation: report.max_deviation(),
                });
            }
            Ok(f)
        };
        Some(check())
    }

    pub fn from_file(file: &FiducialFile) -> Result<Self> {
        if file.re.len() != file.dim || file.im.len() != file.dim {
            return Err(Error::Parse(format!(
                "fiducial of dimension {} has {} real and {} imaginary parts",
                file.dim,
                file.re.len(),
                file.im.len()
            )));
        }
        let amps = file.re.iter().zip(&file.im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        Ok(Self::new(Ket::new(amps)?, Provenance::File))
    }

    pub fn to_file(&self, residual: f64) -> FiducialFile {
        let seed = match self.provenance {
            Provenance::Search { seed, .. } => Some(seed),
            _ => None,
        };
        FiducialFile {
            dim: self.dim(),
            re: self.ket.amplitudes().iter().map(|z| z.re).collect(),
            im: self.ket.amplitudes().iter().map(|z| z.im).collect(),
            residual,
            seed,
        }
    }
}

/// The orbit POVM `{(1/d)|ψ_k⟩⟨ψ_k|}`. Completeness holds for any
/// fiducial since the displacements form a unitary 1-design; whether the
/// orbit is a SIC is for [`verify_sic`] to decide.
pub fn sic_from_fiducial(f: &Fiducial) -> Povm {
    let d = f.dim();
    let wh = WeylHeisenberg::new(d);
    let effects = wh
        .orbit(&f.ket)
        .iter()
        .map(|k| Effect::from_matrix_unchecked(k.projector().scale(1.0 / d as f64)))
        .collect();
    Povm::from_effects_unchecked(d, effects)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub dim: usize,
    pub effects: usize,
    /// `1/(d²(d+1))`.
    pub expected_overlap: f64,
    /// Max over effects of the eigenvalue distance to `diag(1/d, 0, …)`.
    pub rank_one_deviation: f64,
    /// `max_{i≠j} |tr(R_i R_j) − 1/(d²(d+1))|`.
    pub pairwise_deviation: f64,
    /// `‖Σ R_i − I‖_F`.
    pub completeness_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

impl VerificationReport {
    pub fn max_deviation(&self) -> f64 {
        self.rank_one_deviation
            .max(self.pairwise_deviation)
            .max(self.completeness_residual)
    }
}

/// Checks the SIC conditions on a `d²`-element POVM, whatever its origin.
pub fn verify_sic(povm: &Povm, tol: f64) -> Result<VerificationReport> {
    let d = povm.dim();
    let n = d * d;
    if povm.len() != n {
        return Err(Error::WrongEffectCount {
            expected: n,
            found: povm.len(),
        });
    }
    let trace = 1.0 / d as f64;
    let expected_overlap = 1.0 / ((d * d * (d + 1)) as f64);

    let mut rank_one_deviation: f64 = 0.0;
    for e in povm.effects() {
        let values = e.matrix().eigenvalues_hermitian()?;
        let (top, rest) = values.split_last().expect("non-empty spectrum");
        let dev = rest.iter().map(|x| x.abs()).fold((top - trace).abs(), f64::max);
        rank_one_deviation = rank_one_deviation.max(dev);
    }
    let mut pairwise_deviation: f64 = 0.0;
    let effects = povm.effects();
    for i in 0..n {
        for j in (i + 1)..n {
            let t = hs_inner(effects[i].matrix(), effects[j].matrix())?.re;
            pairwise_deviation = pairwise_deviation.max((t - expected_overlap).abs());
        }
    }
    let completeness_residual = povm.completeness_residual();
    let passed = rank_one_deviation <= tol && pairwise_deviation <= tol && completeness_residual <= tol;
    Ok(VerificationReport {
        dim: d,
        effects: n,
        expected_overlap,
        rank_one_deviation,
        pairwise_deviation,
        completeness_residual,
        tol,
        passed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Required `max_{k≠0} ||⟨ψ|D_k|ψ⟩|² − 1/(d+1)|`.
    pub target_residual: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 50,
            max_iters: 5000,
            target_residual: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchSuccess {
    pub fiducial: Fiducial,
    /// Overlap residual of the returned fiducial.
    pub residual: f64,
    /// Frame potential at the returned fiducial.
    pub objective: f64,
    pub restart: usize,
    pub iterations: usize,
    pub restarts_tried: usize,
    pub report: VerificationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NotFound {
    pub dim: usize,
    pub best_residual: f64,
    pub best_restart: usize,
    pub restarts_tried: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SearchOutcome {
    Found(SearchSuccess),
    NotFound(NotFound),
}

/// Result of one restart.
#[derive(Clone, Debug)]
pub struct RestartRun {
    pub restart: usize,
    pub psi: Vec<Complex64>,
    pub residual: f64,
    pub objective: f64,
    pub iterations: usize,
}

/// Runs restart `restart` of the search from its own generator stream.
pub fn run_restart(dim: usize, seed: u64, restart: usize, opts: &SearchOptions) -> RestartRun {
    let wh = WeylHeisenberg::new(dim);
    let mut rng = seeded_rng(seed, restart as u64);
    let mut psi = haar_ket(dim, &mut rng).amplitudes().to_vec();
    let polish_at = POLISH_HANDOFF.max(opts.target_residual);
    let mut iterations = lbfgs(&wh, &mut psi, opts.max_iters, polish_at);
    let mut residual = overlap_residual(&wh, &psi);
    if residual <= polish_at.max(1e-3) {
        iterations += gauss_newton_polish(&wh, &mut psi, opts.target_residual);
        residual = overlap_residual(&wh, &psi);
    }
    RestartRun {
        restart,
        objective: frame_potential(&wh, &psi),
        psi,
        residual,
        iterations,
    }
}

/// L-BFGS on the sphere; returns the number of iterations taken. Stops when
/// the overlap residual drops below `stop_residual`, when the line search
/// cannot decrease `F` any further, or after `max_iters`.
fn lbfgs(wh: &WeylHeisenberg, psi: &mut Vec<Complex64>, max_iters: usize, stop_residual: f64) -> usize {
    let project = |x: &[Complex64], g: &mut [Complex64]| {
        let radial = real_dot(x, g);
        g.iter_mut().zip(x).for_each(|(gi, xi)| *gi -= xi * radial);
    };
    let (mut f, mut g) = frame_potential_gradient(wh, psi);
    project(psi, &mut g);
    let mut history: VecDeque<(Vec<Complex64>, Vec<Complex64>, f64)> = VecDeque::new();
    let mut iter = 0;
    while iter < max_iters {
        if overlap_residual(wh, psi) <= stop_residual {
            break;
        }
        iter += 1;

        // Two-loop recursion.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * real_dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= yi * a);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = real_dot(s, y) / real_dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        } else {
            let gn = real_dot(&g, &g).sqrt();
            let scale = if gn > 0.0 { (0.1 / gn).min(1.0) } else { 1.0 };
            q.iter_mut().for_each(|qi| *qi *= scale);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * real_dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += si * (a - b));
        }
        let mut dir: Vec<Complex64> = q.iter().map(|x| -x).collect();
        project(psi, &mut dir);
        let mut slope = real_dot(&g, &dir);
        if !(slope < 0.0) {
            history.clear();
            dir = g.iter().map(|x| -x * 0.1).collect();
            slope = real_dot(&g, &dir);
            if !(slope < 0.0) {
                break;
            }
        }

        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-12 {
            let mut trial: Vec<Complex64> = psi.iter().zip(&dir).map(|(x, p)| x + p * t).collect();
            normalize(&mut trial);
            let f_trial = frame_potential(wh, &trial);
            if f_trial <= f + 1e-4 * t * slope {
                accepted = Some((trial, f_trial));
                break;
            }
            t *= 0.5;
        }
        let Some((next, f_next)) = accepted else {
            if history.is_empty() {
                break;
            }
            history.clear();
            continue;
        };
        let (_, mut g_next) = frame_potential_gradient(wh, &next);
        project(&next, &mut g_next);
        let s: Vec<Complex64> = next.iter().zip(psi.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<Complex64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = real_dot(&s, &y);
        if sy > 1e-300 {
            if history.len() == LBFGS_MEMORY {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        *psi = next;
        f = f_next;
        g = g_next;
    }
    iter
}

/// Gauss–Newton on the overlap equations with minimum-norm steps; keeps a
/// step only if it lowers the residual. Returns the iterations taken.
fn gauss_newton_polish(wh: &WeylHeisenberg, psi: &mut Vec<Complex64>, target: f64) -> usize {
    let d = wh.dim();
    let mut best = overlap_residual(wh, psi);
    let mut iters = 0;
    while iters < POLISH_MAX_ITERS && best > target * 1e-3 {
        iters += 1;
        let (r, jac) = overlap_jacobian(wh, psi);
        let svd = jac.svd(true, true);
        let Ok(step) = svd.solve(&(-r), 1e-12) else {
            break;
        };
        let mut next: Vec<Complex64> = (0..d).map(|j| psi[j] + Complex64::new(step[j], step[d + j])).collect();
        normalize(&mut next);
        let res = overlap_residual(wh, &next);
        if !(res < best) {
            break;
        }
        best = res;
        *psi = next;
    }
    iters
}

/// Searches for a Weyl–Heisenberg SIC fiducial in dimension `dim`.
/// Deterministic in `(dim, seed, opts)`: restarts run in fixed-size batches,
/// and the first batch containing a success yields its lowest-residual
/// member (ties to the lower restart index).
pub fn find_sic_fiducial(dim: usize, seed: u64, opts: &SearchOptions) -> Result<SearchOutcome> {
    if dim < 2 {
        return Err(Error::InvalidObject {
            kind: "SIC search",
            predicate: "dimension >= 2",
            magnitude: dim as f64,
        });
    }
    let mut best: Option<RestartRun> = None;
    let mut tried = 0;
    let mut start = 0;
    while start < opts.restarts {
        let end = (start + RESTART_BATCH).min(opts.restarts);
        let runs: Vec<RestartRun> = (start..end)
            .into_par_iter()
            .map(|r| run_restart(dim, seed, r, opts))
            .collect();
        tried = end;
        for run in runs {
            let better = match &best {
                None => true,
                Some(b) => run.residual < b.residual,
            };
            if better {
                best = Some(run);
            }
        }
        if let Some(b) = &best {
            if b.residual <= opts.target_residual {
                let ket = Ket::normalized(b.psi.clone())?;
                let fiducial = Fiducial::new(
                    ket,
                    Provenance::Search {
                        seed,
                        restart: b.restart,
                        iterations: b.iterations,
                    },
                );
                let report = verify_sic(&sic_from_fiducial(&fiducial), opts.target_residual)?;
                return Ok(SearchOutcome::Found(SearchSuccess {
                    fiducial,
                    residual: b.residual,
                    objective: b.objective,
                    restart: b.restart,
                    iterations: b.iterations,
                    restarts_tried: tried,
                    report,
                }));
            }
        }
        start = end;
    }
    let (best_residual, best_restart) = best.map(|b| (b.residual, b.restart)).unwrap_or((f64::INFINITY, 0));
    Ok(SearchOutcome::NotFound(NotFound {
        dim,
        best_residual,
        best_restart,
        restarts_tried: tried,
    }))
}

/// SIC reference apparatus with post-measurement states `σ_i = d R_i`.
pub fn sic_reference(f: &Fiducial) -> Result<ReferenceApparatus> {
    let d = f.dim();
    let povm = sic_from_fiducial(f);
    let report = verify_sic(&povm, SIC_TOL)?;
    if !report.passed {
        return Err(Error::NotSic {
            deviation: report.max_deviation(),
        });
    }
    let post = povm
        .effects()
        .iter()
        .map(|e| DensityOperator::new(e.matrix().scale(d as f64)))
        .collect::<Result<Vec<_>>>()?;
    let povm = Povm::new(povm.effects().to_vec())?;
    ReferenceApparatus::new(povm, post)
}

/// Closed form `Φ_SIC = (d+1)I − (1/d)J`.
pub fn sic_phi(dim: usize) -> PhiMatrix {
    let n = dim * dim;
    let d = dim as f64;
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { d + 1.0 - 1.0 / d } else { -1.0 / d });
    PhiMatrix::from_real(m).expect("square by construction")
}

/// The weights `(d+1)P(R_i) − 1/d`.
pub fn urgleichung_weights(p: &[f64], dim: usize) -> Vec<f64> {
    let d = dim as f64;
    p.iter().map(|&x| (d + 1.0) * x - 1.0 / d).collect()
}

/// SIC form of the Born rule: `Q(E_j) = Σ_i [(d+1)P(R_i) − 1/d] P(E_j|R_i)`.
pub fn urgleichung(p: &ProbVector, cond: &CondMatrix, dim: usize) -> Result<ProbVector> {
    let n = dim * dim;
    if p.len() != n {
        return Err(Error::DimensionMismatch {
            context: "urgleichung (P(R))",
            expected: n,
            found: p.len(),
        });
    }
    let weights = urgleichung_weights(p.entries(), dim);
    checked_probabilities(cond.apply(&weights)?)
}
