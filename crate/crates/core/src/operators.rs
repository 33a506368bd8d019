//! One-body operators and generalized annihilation/creation operators, with
//! numerical checks of the η-commutation rules that connect the holistic-ket
//! calculus to second quantization.
//!
//! Operators act extensionally on states; a(k) is the single-slot dot
//! product, a†(k) the wedge prepend. The pair operators a(j,k), a†(j,k) are
//! genuine two-particle objects: a(j,k) ≠ a(j)a(k).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::amplitude::{amplitude, kernel};
use crate::error::{Error, Result};
use crate::hilbert::{ModeBasis, SingleParticleState};
use crate::reduction::dot_slots;
use crate::state::{ElementaryKet, ManyParticleState};
use std::sync::Arc;

/// A one-body operator: a complex matrix over the single-particle basis,
/// applied to each slot of a holistic ket in turn.
#[derive(Debug, Clone)]
pub struct OneBodyOperator {
    basis: Arc<ModeBasis>,
    mat: DMatrix<Complex64>,
}

impl OneBodyOperator {
    pub fn new(basis: Arc<ModeBasis>, mat: DMatrix<Complex64>) -> Result<Self> {
        let d = basis.dimension();
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: mat.nrows() });
        }
        Ok(OneBodyOperator { basis, mat })
    }

    pub fn identity(basis: &Arc<ModeBasis>) -> Self {
        let d = basis.dimension();
        OneBodyOperator { basis: basis.clone(), mat: DMatrix::identity(d, d) }
    }

    pub fn zero(basis: &Arc<ModeBasis>) -> Self {
        let d = basis.dimension();
        OneBodyOperator { basis: basis.clone(), mat: DMatrix::zeros(d, d) }
    }

    /// |j⟩⟨k|.
    pub fn ketbra(j: &SingleParticleState, k: &SingleParticleState) -> Result<Self> {
        if !j.same_basis(k) {
            return Err(Error::BasisMismatch);
        }
        let d = j.basis().dimension();
        let mat = DMatrix::from_fn(d, d, |r, c| j.coeffs()[r] * k.coeffs()[c].conj());
        Ok(OneBodyOperator { basis: j.basis().clone(), mat })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    fn apply_slot(&self, s: &SingleParticleState) -> SingleParticleState {
        let d = self.basis.dimension();
        let coeffs: Vec<Complex64> = (0..d)
            .map(|i| (0..d).map(|j| self.mat[(i, j)] * s.coeffs()[j]).sum())
            .collect();
        SingleParticleState::new(self.basis.clone(), coeffs).expect("dimension preserved")
    }

    /// A⁽¹⁾|1,…,N⟩ = Σ_k |1,…,A k,…,N⟩.
    pub fn apply(&self, s: &ManyParticleState) -> Result<ManyParticleState> {
        if **s.basis() != *self.basis {
            return Err(Error::BasisMismatch);
        }
        let mut terms = Vec::new();
        for t in s.terms() {
            for k in 0..t.n() {
                let mut slots = t.slots().to_vec();
                slots[k] = self.apply_slot(&slots[k]);
                terms.push(ElementaryKet::new(t.coeff(), slots)?);
            }
        }
        Ok(ManyParticleState::new(s.statistics(), s.basis().clone(), s.n_particles(), terms)?
            .compact())
    }
}

/// Free-function form of [`OneBodyOperator::apply`].
pub fn apply_one_body(a: &OneBodyOperator, s: &ManyParticleState) -> Result<ManyParticleState> {
    a.apply(s)
}

/// a(k)|1,…,N⟩ = ⟨k|·|1,…,N⟩. Errors on the zero-particle sector.
pub fn annihilate(k: &SingleParticleState, s: &ManyParticleState) -> Result<ManyParticleState> {
    if s.n_particles() == 0 {
        return Err(Error::BadExtraction { m: 1, n: 0 });
    }
    dot_slots(std::slice::from_ref(k), s)
}

/// a†(k)|1,…,N⟩ = |k⟩ ∧ |1,…,N⟩.
pub fn create(k: &SingleParticleState, s: &ManyParticleState) -> Result<ManyParticleState> {
    ManyParticleState::single(s.statistics(), k.clone()).wedge(s)
}

/// a(j,k)|1,…,N⟩ = ⟨j,k|·|1,…,N⟩.
pub fn pair_annihilate(
    j: &SingleParticleState,
    k: &SingleParticleState,
    s: &ManyParticleState,
) -> Result<ManyParticleState> {
    if s.n_particles() < 2 {
        return Err(Error::BadExtraction { m: 2, n: s.n_particles() });
    }
    dot_slots(&[j.clone(), k.clone()], s)
}

/// a†(j,k)|1,…,N⟩ = |j,k⟩ ∧ |1,…,N⟩.
pub fn pair_create(
    j: &SingleParticleState,
    k: &SingleParticleState,
    s: &ManyParticleState,
) -> Result<ManyParticleState> {
    ManyParticleState::from_slots(s.statistics(), vec![j.clone(), k.clone()])?.wedge(s)
}

/// Residuals of the commutation rules on a set of trial states.
#[derive(Debug, Clone, Default)]
pub struct CommutatorReport {
    /// max ‖(a(j)a†(k) − η a†(k)a(j) − ⟨j|k⟩)|t⟩‖ over the trials.
    pub max_single_residual: f64,
    /// max ‖(a(j,k)a†(m,n) − a†(m,n)a(j,k) − ⟨j,k|m,n⟩)|t⟩‖ over trials with
    /// at least two particles; a plain commutator for both statistics.
    pub max_pair_residual: f64,
    pub checks: usize,
}

/// Check [a(j), a†(k)]_η = ⟨j|k⟩ on every trial state, and the two-particle
/// rule [a(j,k), a†(j,k)] = ⟨j,k|j,k⟩ on trials with N ≥ 2. Report-only.
pub fn commutator_check(
    j: &SingleParticleState,
    k: &SingleParticleState,
    trials: &[ManyParticleState],
) -> Result<CommutatorReport> {
    let mut report = CommutatorReport::default();
    let jk = j.inner(k)?;
    for t in trials {
        if t.n_particles() == 0 {
            continue;
        }
        let stats = t.statistics();
        let eta = Complex64::new(stats.eta(), 0.0);
        let left = annihilate(j, &create(k, t)?)?;
        let right = create(k, &annihilate(j, t)?)?;
        let residual = left
            .sub(&right.scaled(eta))?
            .sub(&t.scaled(jk))?
            .norm();
        report.max_single_residual = report.max_single_residual.max(residual);
        report.checks += 1;

        if t.n_particles() >= 2 {
            let jk2 = kernel(stats, &[j.clone(), k.clone()], &[j.clone(), k.clone()])?;
            let left2 = pair_annihilate(j, k, &pair_create(j, k, t)?)?;
            let right2 = pair_create(j, k, &pair_annihilate(j, k, t)?)?;
            let residual2 = left2.sub(&right2)?.sub(&t.scaled(jk2))?.norm();
            report.max_pair_residual = report.max_pair_residual.max(residual2);
            report.checks += 1;
        }
    }
    Ok(report)
}

/// Two-particle commutator residual for independent pairs (j,k) vs (m,n):
/// ‖(a(j,k)a†(m,n) − a†(m,n)a(j,k) − ⟨j,k|m,n⟩)|t⟩‖.
pub fn pair_commutator_residual(
    j: &SingleParticleState,
    k: &SingleParticleState,
    m: &SingleParticleState,
    n: &SingleParticleState,
    t: &ManyParticleState,
) -> Result<f64> {
    if t.n_particles() < 2 {
        return Err(Error::BadExtraction { m: 2, n: t.n_particles() });
    }
    let stats = t.statistics();
    let rhs = kernel(stats, &[j.clone(), k.clone()], &[m.clone(), n.clone()])?;
    let left = pair_annihilate(j, k, &pair_create(m, n, t)?)?;
    let right = pair_create(m, n, &pair_annihilate(j, k, t)?)?;
    Ok(left.sub(&right)?.sub(&t.scaled(rhs))?.norm())
}

/// ⟨a†(k)u | v⟩ − ⟨u | a(k)v⟩ — should vanish.
pub fn adjointness_residual(
    k: &SingleParticleState,
    u: &ManyParticleState,
    v: &ManyParticleState,
) -> Result<f64> {
    let lhs = amplitude(&create(k, u)?, v)?;
    let rhs = amplitude(u, &annihilate(k, v)?)?;
    Ok((lhs - rhs).norm())
}
