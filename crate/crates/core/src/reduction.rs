//! Generalized dot products (an M-particle bra against an N-particle ket),
//! projection probabilities, partial traces and von Neumann entropy.
//!
//! The M-particle extraction removes slots in bra order; removing the slot at
//! current position p carries a factor η^p, so a sorted selection of original
//! positions p₁ < … < p_M carries η^{(Σpᵢ) − M(M+1)/2} and out-of-order
//! selections pick up the inversion parity on top. With this convention the
//! dot at M = N coincides with the amplitude, and iterated single-particle
//! dots reproduce the M-particle dot exactly.

use itertools::Itertools;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::amplitude::{amplitude, kernel};
use crate::error::{Error, Result};
use crate::hilbert::{basis_state_at, ModeBasis, SingleParticleState};
use crate::state::{ElementaryKet, ManyParticleState, Statistics};
use std::sync::Arc;

const NORMALIZATION_TOL: f64 = 1e-8;

/// Project an N-particle ket onto an M-particle bra given as a slot list,
/// yielding an (N−M)-particle ket. Linear in the ket, conjugate-linear in the
/// bra slots.
pub fn dot_slots(bra: &[SingleParticleState], ket: &ManyParticleState) -> Result<ManyParticleState> {
    let m = bra.len();
    let n = ket.n_particles();
    if m > n {
        return Err(Error::BadExtraction { m, n });
    }
    let stats = ket.statistics();
    let mut out_terms: Vec<ElementaryKet> = Vec::new();
    for term in ket.terms() {
        // all ordered selections of m distinct slot positions
        for sel in (0..n).permutations(m) {
            let mut coeff = term.coeff();
            let mut parity = 0usize;
            for (i, &p) in sel.iter().enumerate() {
                let shift = sel[..i].iter().filter(|&&q| q < p).count();
                parity += p - shift;
                coeff *= bra[i].inner(&term.slots()[p])?;
            }
            if coeff.norm() == 0.0 {
                continue;
            }
            coeff *= stats.eta_pow(parity);
            let remaining: Vec<SingleParticleState> = (0..n)
                .filter(|p| !sel.contains(p))
                .map(|p| term.slots()[p].clone())
                .collect();
            out_terms.push(ElementaryKet::new(coeff, remaining)?);
        }
    }
    Ok(ManyParticleState::new(stats, ket.basis().clone(), n - m, out_terms)?.compact())
}

/// Dot product with a full M-particle state as the bra (conjugate-linear in
/// its term coefficients).
pub fn dot(bra: &ManyParticleState, ket: &ManyParticleState) -> Result<ManyParticleState> {
    if bra.statistics() != ket.statistics() {
        return Err(Error::StatisticsMismatch);
    }
    let n = ket.n_particles();
    let m = bra.n_particles();
    if m > n {
        return Err(Error::BadExtraction { m, n });
    }
    let mut out = ManyParticleState::zero(ket.statistics(), ket.basis().clone(), n - m);
    for t in bra.terms() {
        let part = dot_slots(t.slots(), ket)?.scaled(t.coeff().conj());
        out = out.add(&part)?;
    }
    Ok(out.compact())
}

/// One normalized ket |k′₁,…,k′_M⟩/𝒩 of a collective basis, tagged with the
/// occupation pattern it was built from.
#[derive(Debug, Clone)]
pub struct CollectiveKet {
    indices: Vec<usize>,
    norm_const: f64,
    state: ManyParticleState,
}

impl CollectiveKet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// 𝒩 such that |k′₁,…,k′_M⟩/𝒩 has self-amplitude 1.
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    pub fn state(&self) -> &ManyParticleState {
        &self.state
    }
}

/// Orthonormal basis of the M-particle sector built from occupation patterns
/// of the single-particle computational basis (optionally a subset of it —
/// e.g. the states localised in one spatial region).
#[derive(Debug, Clone)]
pub struct CollectiveBasis {
    stats: Statistics,
    basis: Arc<ModeBasis>,
    m: usize,
    kets: Vec<CollectiveKet>,
}

impl CollectiveBasis {
    /// Basis over the complete single-particle computational basis.
    pub fn full(basis: &Arc<ModeBasis>, stats: Statistics, m: usize) -> Self {
        let all: Vec<usize> = (0..basis.dimension()).collect();
        Self::over(basis, stats, m, &all).expect("full basis indices are distinct")
    }

    /// Basis over a subset of single-particle basis states (by flat index).
    pub fn over(
        basis: &Arc<ModeBasis>,
        stats: Statistics,
        m: usize,
        sp_indices: &[usize],
    ) -> Result<Self> {
        for (i, &x) in sp_indices.iter().enumerate() {
            if x >= basis.dimension() {
                return Err(Error::IndexOutOfRange { index: x, len: basis.dimension() });
            }
            if sp_indices[..i].contains(&x) {
                return Err(Error::Invalid("repeated single-particle index".into()));
            }
        }
        let occupations: Vec<Vec<usize>> = match stats {
            Statistics::Fermion => sp_indices.iter().copied().combinations(m).collect(),
            Statistics::Boson => sp_indices.iter().copied().combinations_with_replacement(m).collect(),
        };
        let mut kets = Vec::with_capacity(occupations.len());
        for occ in occupations {
            // 𝒩 = √(Π nᵢ!) over occupation counts; 1 for fermions
            let mut norm_const = 1.0f64;
            let mut run = 1usize;
            for w in occ.windows(2) {
                if w[0] == w[1] {
                    run += 1;
                    norm_const *= (run as f64).sqrt();
                } else {
                    run = 1;
                }
            }
            let slots: Vec<SingleParticleState> =
                occ.iter().map(|&i| basis_state_at(basis, i)).collect();
            let ket = ElementaryKet::new(Complex64::new(1.0 / norm_const, 0.0), slots)?;
            kets.push(CollectiveKet {
                indices: occ,
                norm_const,
                state: ManyParticleState::elementary(stats, basis.clone(), ket),
            });
        }
        Ok(CollectiveBasis { stats, basis: basis.clone(), m, kets })
    }

    pub fn len(&self) -> usize {
        self.kets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kets.is_empty()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn statistics(&self) -> Statistics {
        self.stats
    }

    pub fn mode_basis(&self) -> &Arc<ModeBasis> {
        &self.basis
    }

    pub fn kets(&self) -> &[CollectiveKet] {
        &self.kets
    }

    pub fn label(&self, i: usize) -> String {
        let parts: Vec<String> =
            self.kets[i].indices.iter().map(|&x| self.basis.label(x)).collect();
        format!("|{}⟩", parts.join(","))
    }

    /// Coefficients of `state` in this basis: c_b = ⟨b|state⟩.
    pub fn expand(&self, state: &ManyParticleState) -> Result<Vec<Complex64>> {
        self.kets.iter().map(|k| amplitude(&k.state, state)).collect()
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix over an explicit
/// collective basis.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: CollectiveBasis,
    mat: DMatrix<Complex64>,
}

pub const DM_TRACE_TOL: f64 = 1e-9;
pub const DM_HERMITICITY_TOL: f64 = 1e-10;
pub const DM_PSD_TOL: f64 = 1e-9;

impl DensityMatrix {
    pub fn new(basis: CollectiveBasis, mat: DMatrix<Complex64>) -> Result<Self> {
        if mat.nrows() != basis.len() || mat.ncols() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), got: mat.nrows() });
        }
        let dm = DensityMatrix { basis, mat };
        let h = dm.hermiticity_residual();
        if h > DM_HERMITICITY_TOL {
            return Err(Error::Contract(format!("density matrix not Hermitian: residual {h:.3e}")));
        }
        let t = dm.trace();
        if (t.re - 1.0).abs() > DM_TRACE_TOL || t.im.abs() > DM_TRACE_TOL {
            return Err(Error::Contract(format!("density matrix trace {t} differs from 1")));
        }
        let min = dm.min_eigenvalue();
        if min < -DM_PSD_TOL {
            return Err(Error::Contract(format!("density matrix not PSD: min eigenvalue {min:.3e}")));
        }
        Ok(dm)
    }

    pub fn basis(&self) -> &CollectiveBasis {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.diagonal().iter().sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let adj = self.mat.adjoint();
        (&self.mat - adj).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Real eigenvalues, sorted descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.mat.nrows() == 0 {
            return vec![];
        }
        let eig = SymmetricEigen::new(self.mat.clone());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }
}

/// −Σ λᵢ log₂ λᵢ over the eigenvalues, with 0·log 0 = 0. Bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eigs = rho.eigenvalues();
    if let Some(&min) = eigs.last() {
        if min < -DM_PSD_TOL {
            return Err(Error::Contract(format!("not PSD: min eigenvalue {min:.3e}")));
        }
    }
    Ok(entropy_bits(&eigs))
}

/// Shannon entropy (bits) of a probability vector; negatives are clamped.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    let s: f64 = probs
        .iter()
        .map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 })
        .sum();
    s.max(0.0)
}

/// Outcome of projecting M particles onto a collective state.
#[derive(Debug, Clone)]
pub struct Projection {
    /// Normalized probability of the outcome.
    pub probability: f64,
    /// Raw projector expectation ⟨Π⟩ before normalization.
    pub weight: f64,
    /// Normalized reduced (N−M)-particle state; `None` below the no-outcome
    /// threshold.
    pub reduced: Option<ManyParticleState>,
}

fn projector_weight(
    proj: &[SingleParticleState],
    state: &ManyParticleState,
) -> Result<(f64, ManyParticleState)> {
    // normalize the projector slots as a collective ket
    let stats = state.statistics();
    let n2 = kernel(stats, proj, proj)?.re;
    if n2 <= 1e-12 {
        return Err(Error::NullState(n2));
    }
    let r = dot_slots(proj, state)?.scaled(Complex64::new(1.0 / n2.sqrt(), 0.0));
    let w = amplitude(&r, &r)?.re.max(0.0);
    Ok((w, r))
}

fn check_normalized(state: &ManyParticleState) -> Result<()> {
    let n2 = state.norm_sqr();
    if (n2 - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(n2));
    }
    Ok(())
}

/// Probability of finding M particles in the collective state |proj⟩/𝒩 plus
/// the conditional reduced state, normalized over the complete collective
/// basis (so probabilities over the full basis sum to 1).
pub fn outcome_probability(
    proj: &[SingleParticleState],
    state: &ManyParticleState,
) -> Result<Projection> {
    let context = CollectiveBasis::full(state.basis(), state.statistics(), proj.len());
    outcome_probability_in(proj, state, &context)
}

/// Same as [`outcome_probability`] but normalized within a caller-chosen
/// measurement context (e.g. the basis states localised in one region), so
/// probabilities over that context sum to 1.
pub fn outcome_probability_in(
    proj: &[SingleParticleState],
    state: &ManyParticleState,
    context: &CollectiveBasis,
) -> Result<Projection> {
    let m = proj.len();
    let n = state.n_particles();
    if m > n {
        return Err(Error::BadExtraction { m, n });
    }
    if context.m() != m {
        return Err(Error::DimensionMismatch { expected: m, got: context.m() });
    }
    check_normalized(state)?;
    let (w, r) = projector_weight(proj, state)?;
    let mut total = 0.0f64;
    for k in context.kets() {
        let (wk, _) = projector_weight(k.state().terms()[0].slots(), state)?;
        total += wk;
    }
    if total <= 1e-12 {
        return Err(Error::NoOutcome(total));
    }
    let p = w / total;
    let reduced = if w > 1e-12 {
        Some(r.scaled(Complex64::new(1.0 / w.sqrt(), 0.0)))
    } else {
        None
    };
    Ok(Projection { probability: p, weight: w, reduced })
}

/// M-particle partial trace over the complete single-particle basis.
pub fn partial_trace(state: &ManyParticleState, m: usize) -> Result<DensityMatrix> {
    let all: Vec<usize> = (0..state.basis().dimension()).collect();
    partial_trace_over(state, m, &all)
}

/// M-particle partial trace over the collective basis built from the given
/// single-particle basis states (by flat index) — e.g. only the states
/// localised in one spatial mode. The result is materialized on the full
/// (N−M)-particle collective basis and normalized to unit trace.
pub fn partial_trace_over(
    state: &ManyParticleState,
    m: usize,
    traced_sp: &[usize],
) -> Result<DensityMatrix> {
    let n = state.n_particles();
    if m >= n {
        return Err(Error::BadExtraction { m, n });
    }
    check_normalized(state)?;
    let stats = state.statistics();
    let extraction = CollectiveBasis::over(state.basis(), stats, m, traced_sp)?;
    let out_basis = CollectiveBasis::full(state.basis(), stats, n - m);
    let dim = out_basis.len();
    let mut mat: DMatrix<Complex64> = DMatrix::zeros(dim, dim);
    let mut total_weight = 0.0f64;
    for k in extraction.kets() {
        let r = dot(k.state(), state)?;
        let w = amplitude(&r, &r)?.re.max(0.0);
        if w <= 1e-16 {
            continue;
        }
        total_weight += w;
        let v = out_basis.expand(&r)?;
        for (i, vi) in v.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                mat[(i, j)] += vi * vj.conj();
            }
        }
    }
    if total_weight <= 1e-14 {
        return Err(Error::NoOutcome(total_weight));
    }
    mat /= Complex64::new(total_weight, 0.0);
    DensityMatrix::new(out_basis, mat)
}

/// Eigenvalue spectrum of the M-particle partial trace, computed through the
/// Gram matrix of the unnormalized reduced states (the nonzero spectrum of
/// Σ|r⟩⟨r| equals the spectrum of [⟨rᵢ|rⱼ⟩]). Sorted descending, padded with
/// zeros to the extraction-basis size.
pub fn reduced_spectrum(
    state: &ManyParticleState,
    m: usize,
    traced_sp: &[usize],
) -> Result<Vec<f64>> {
    let n = state.n_particles();
    if m >= n {
        return Err(Error::BadExtraction { m, n });
    }
    check_normalized(state)?;
    let stats = state.statistics();
    let extraction = CollectiveBasis::over(state.basis(), stats, m, traced_sp)?;
    let reduced: Vec<ManyParticleState> = extraction
        .kets()
        .iter()
        .map(|k| dot(k.state(), state))
        .collect::<Result<_>>()?;
    let dim = reduced.len();
    let mut gram: DMatrix<Complex64> = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let g = amplitude(&reduced[i], &reduced[j])?;
            gram[(i, j)] = g;
            gram[(j, i)] = g.conj();
        }
    }
    let trace: f64 = gram.diagonal().iter().map(|c| c.re).sum();
    if trace <= 1e-14 {
        return Err(Error::NoOutcome(trace));
    }
    let eig = SymmetricEigen::new(gram / Complex64::new(trace, 0.0));
    let mut v: Vec<f64> = eig.eigenvalues.iter().map(|&x| x.max(0.0)).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}
