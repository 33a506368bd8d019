//! Single-particle Hilbert space: a finite orthonormal (mode × spin)
//! computational basis and complex state vectors over it.
//!
//! Spatial wavefunctions are modelled as vectors over the mode labels, so
//! "spatial overlap" between two states is an ordinary inner product of
//! non-orthogonal vectors.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Orthonormal computational basis: an ordered list of spatial modes times an
/// ordered list of pseudospin labels. Basis vectors are indexed by
/// `mode * n_spins + spin`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeBasis {
    spatial: Vec<String>,
    spin: Vec<String>,
}

impl ModeBasis {
    pub fn new<S: Into<String>>(
        spatial: impl IntoIterator<Item = S>,
        spin: impl IntoIterator<Item = S>,
    ) -> Result<Arc<Self>> {
        let spatial: Vec<String> = spatial.into_iter().map(Into::into).collect();
        let spin: Vec<String> = spin.into_iter().map(Into::into).collect();
        if spatial.is_empty() || spin.is_empty() {
            return Err(Error::Invalid("basis needs at least one mode and one spin".into()));
        }
        for (labels, kind) in [(&spatial, "mode"), (&spin, "spin")] {
            for (i, l) in labels.iter().enumerate() {
                if labels[..i].contains(l) {
                    return Err(Error::Invalid(format!("duplicate {kind} label `{l}`")));
                }
            }
        }
        Ok(Arc::new(ModeBasis { spatial, spin }))
    }

    pub fn dimension(&self) -> usize {
        self.spatial.len() * self.spin.len()
    }

    pub fn n_modes(&self) -> usize {
        self.spatial.len()
    }

    pub fn n_spins(&self) -> usize {
        self.spin.len()
    }

    pub fn mode_labels(&self) -> &[String] {
        &self.spatial
    }

    pub fn spin_labels(&self) -> &[String] {
        &self.spin
    }

    pub fn mode_index(&self, label: &str) -> Result<usize> {
        self.spatial
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.into()))
    }

    pub fn spin_index(&self, label: &str) -> Result<usize> {
        self.spin
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.into()))
    }

    /// Flat index of the basis vector |mode, spin⟩.
    pub fn index(&self, mode: usize, spin: usize) -> usize {
        mode * self.spin.len() + spin
    }

    pub fn mode_of(&self, flat: usize) -> usize {
        flat / self.spin.len()
    }

    pub fn spin_of(&self, flat: usize) -> usize {
        flat % self.spin.len()
    }

    /// Human-readable label of a basis vector, e.g. `L↑` or `L.u`.
    pub fn label(&self, flat: usize) -> String {
        let m = &self.spatial[self.mode_of(flat)];
        let s = &self.spin[self.spin_of(flat)];
        if s.chars().all(|c| !c.is_alphanumeric()) {
            format!("{m}{s}")
        } else {
            format!("{m}.{s}")
        }
    }
}

/// Build a basis vector |mode, spin⟩ from labels.
pub fn basis_state(basis: &Arc<ModeBasis>, mode: &str, spin: &str) -> Result<SingleParticleState> {
    let i = basis.index(basis.mode_index(mode)?, basis.spin_index(spin)?);
    Ok(basis_state_at(basis, i))
}

/// Build the basis vector with flat index `i`.
pub fn basis_state_at(basis: &Arc<ModeBasis>, i: usize) -> SingleParticleState {
    let mut coeffs = vec![Complex64::ZERO; basis.dimension()];
    coeffs[i] = Complex64::ONE;
    SingleParticleState { basis: basis.clone(), coeffs }
}

/// All basis vectors, in flat-index order.
pub fn all_basis_states(basis: &Arc<ModeBasis>) -> Vec<SingleParticleState> {
    (0..basis.dimension()).map(|i| basis_state_at(basis, i)).collect()
}

/// One particle's state |φ σ⟩: a complex vector over the computational basis.
#[derive(Debug, Clone)]
pub struct SingleParticleState {
    basis: Arc<ModeBasis>,
    coeffs: Vec<Complex64>,
}

impl SingleParticleState {
    pub fn new(basis: Arc<ModeBasis>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != basis.dimension() {
            return Err(Error::DimensionMismatch { expected: basis.dimension(), got: coeffs.len() });
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Invalid("non-finite amplitude".into()));
        }
        Ok(SingleParticleState { basis, coeffs })
    }

    /// Product-form state with coeff(m, s) = spatial(m) · spin(s).
    /// Not normalized unless the inputs are.
    pub fn from_product(
        basis: &Arc<ModeBasis>,
        spatial: &[(&str, Complex64)],
        spin: &[(&str, Complex64)],
    ) -> Result<Self> {
        let mut sp = vec![Complex64::ZERO; basis.n_modes()];
        for (label, amp) in spatial {
            sp[basis.mode_index(label)?] += amp;
        }
        let mut ss = vec![Complex64::ZERO; basis.n_spins()];
        for (label, amp) in spin {
            ss[basis.spin_index(label)?] += amp;
        }
        Self::from_parts(basis, &sp, &ss)
    }

    /// Product-form state from spatial and spin coefficient vectors.
    pub fn from_parts(
        basis: &Arc<ModeBasis>,
        spatial: &[Complex64],
        spin: &[Complex64],
    ) -> Result<Self> {
        if spatial.len() != basis.n_modes() {
            return Err(Error::DimensionMismatch { expected: basis.n_modes(), got: spatial.len() });
        }
        if spin.len() != basis.n_spins() {
            return Err(Error::DimensionMismatch { expected: basis.n_spins(), got: spin.len() });
        }
        let mut coeffs = vec![Complex64::ZERO; basis.dimension()];
        for (m, a) in spatial.iter().enumerate() {
            for (s, b) in spin.iter().enumerate() {
                coeffs[basis.index(m, s)] = a * b;
            }
        }
        if coeffs.iter().all(|c| c.norm_sqr() == 0.0) {
            return Err(Error::DegenerateState);
        }
        Self::new(basis.clone(), coeffs)
    }

    pub fn basis(&self) -> &Arc<ModeBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn same_basis(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis
    }

    /// Sesquilinear inner product ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if !self.same_basis(other) {
            return Err(Error::BasisMismatch);
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 <= 1e-24 {
            return Err(Error::NullState(n2));
        }
        Ok(self.scaled(Complex64::new(1.0 / n2.sqrt(), 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        SingleParticleState {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.same_basis(other) {
            return Err(Error::BasisMismatch);
        }
        Ok(SingleParticleState {
            basis: self.basis.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm_sqr() <= tol * tol
    }

    /// Spatial mode labels on which this state has support above `tol`.
    pub fn mode_support(&self, tol: f64) -> Vec<usize> {
        (0..self.basis.n_modes())
            .filter(|&m| {
                (0..self.basis.n_spins())
                    .any(|s| self.coeffs[self.basis.index(m, s)].norm() > tol)
            })
            .collect()
    }

    /// Try to factor the state as spatial ⊗ spin. Returns phase-canonical unit
    /// vectors plus the complex scale, or `None` when the (mode × spin)
    /// coefficient matrix is not rank one.
    pub fn factor_spatial_spin(&self, tol: f64) -> Option<(Vec<Complex64>, Vec<Complex64>, Complex64)> {
        let nm = self.basis.n_modes();
        let ns = self.basis.n_spins();
        // pivot on the largest entry
        let (mut pm, mut ps, mut best) = (0usize, 0usize, 0.0f64);
        for m in 0..nm {
            for s in 0..ns {
                let a = self.coeffs[self.basis.index(m, s)].norm();
                if a > best {
                    best = a;
                    pm = m;
                    ps = s;
                }
            }
        }
        if best == 0.0 {
            return None;
        }
        let pivot = self.coeffs[self.basis.index(pm, ps)];
        let spatial: Vec<Complex64> = (0..nm).map(|m| self.coeffs[self.basis.index(m, ps)]).collect();
        let spin: Vec<Complex64> = (0..ns).map(|s| self.coeffs[self.basis.index(pm, s)] / pivot).collect();
        let scale_bound = self.norm();
        for m in 0..nm {
            for s in 0..ns {
                let rebuilt = spatial[m] * spin[s];
                if (rebuilt - self.coeffs[self.basis.index(m, s)]).norm() > tol * scale_bound.max(1.0) {
                    return None;
                }
            }
        }
        let (spatial, c1) = canonical_unit(&spatial)?;
        let (spin, c2) = canonical_unit(&spin)?;
        Some((spatial, spin, c1 * c2))
    }
}

/// Normalize a complex vector and fix its phase so that the largest-magnitude
/// component is real and positive. Returns (unit vector, removed factor).
pub(crate) fn canonical_unit(v: &[Complex64]) -> Option<(Vec<Complex64>, Complex64)> {
    let n2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    if n2 <= 1e-24 {
        return None;
    }
    let n = n2.sqrt();
    let lead = v
        .iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .copied()
        .unwrap();
    let phase = lead / lead.norm();
    let factor = phase * n;
    Some((v.iter().map(|c| c / factor).collect(), factor))
}

/// Are two complex vectors equal up to tolerance?
pub(crate) fn vectors_close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
}
