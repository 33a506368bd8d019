//! Holistic N-particle kets: ordered lists of single-particle states with a
//! complex coefficient, plus linear combinations of them.
//!
//! A ket |1,2,…,N⟩ lists the occupied single-particle states without saying
//! which particle is in which; exchange symmetry is the representational
//! identity |…,j,…,k,…⟩ = η |…,k,…,j,…⟩. Equality of states is semantic
//! (amplitude-based), never syntactic on term lists.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::amplitude;
use crate::error::{Error, Result};
use crate::hilbert::{ModeBasis, SingleParticleState};

/// Exchange statistics: η = +1 for bosons, −1 for fermions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Boson,
    Fermion,
}

impl Statistics {
    pub fn eta(self) -> f64 {
        match self {
            Statistics::Boson => 1.0,
            Statistics::Fermion => -1.0,
        }
    }

    /// η^k.
    pub fn eta_pow(self, k: usize) -> f64 {
        if self == Statistics::Fermion && k % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistics::Boson => "boson",
            Statistics::Fermion => "fermion",
        }
    }
}

/// A single holistic ket: coefficient times |slots[0], slots[1], …⟩.
/// An empty slot list is the formal vacuum sector.
#[derive(Debug, Clone)]
pub struct ElementaryKet {
    coeff: Complex64,
    slots: Vec<SingleParticleState>,
}

impl ElementaryKet {
    pub fn new(coeff: Complex64, slots: Vec<SingleParticleState>) -> Result<Self> {
        for w in slots.windows(2) {
            if !w[0].same_basis(&w[1]) {
                return Err(Error::BasisMismatch);
            }
        }
        Ok(ElementaryKet { coeff, slots })
    }

    pub fn n(&self) -> usize {
        self.slots.len()
    }

    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    pub fn slots(&self) -> &[SingleParticleState] {
        &self.slots
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        ElementaryKet { coeff: self.coeff * c, slots: self.slots.clone() }
    }

    /// Exchange slots `j` and `k` (0-based, j < k) and multiply the
    /// coefficient by η. Amplitudes against any bra are unchanged.
    pub fn swap_slots(&self, stats: Statistics, j: usize, k: usize) -> Result<Self> {
        let n = self.slots.len();
        if j >= k || k >= n {
            return Err(Error::IndexOutOfRange { index: k.max(j), len: n });
        }
        let mut slots = self.slots.clone();
        slots.swap(j, k);
        Ok(ElementaryKet { coeff: self.coeff * stats.eta(), slots })
    }
}

/// Finite linear combination of elementary kets sharing one particle number,
/// one basis, and one statistics. The zero state has an empty term list.
#[derive(Debug, Clone)]
pub struct ManyParticleState {
    stats: Statistics,
    basis: Arc<ModeBasis>,
    n: usize,
    terms: Vec<ElementaryKet>,
}

impl ManyParticleState {
    pub fn new(
        stats: Statistics,
        basis: Arc<ModeBasis>,
        n: usize,
        terms: Vec<ElementaryKet>,
    ) -> Result<Self> {
        for t in &terms {
            if t.n() != n {
                return Err(Error::ParticleNumberMismatch { bra: n, ket: t.n() });
            }
            if let Some(s) = t.slots().first() {
                if !Arc::ptr_eq(s.basis(), &basis) && **s.basis() != *basis {
                    return Err(Error::BasisMismatch);
                }
            }
        }
        Ok(ManyParticleState { stats, basis, n, terms })
    }

    /// Single-term state from one elementary ket.
    pub fn elementary(stats: Statistics, basis: Arc<ModeBasis>, ket: ElementaryKet) -> Self {
        let n = ket.n();
        ManyParticleState { stats, basis, n, terms: vec![ket] }
    }

    /// |s1, s2, …⟩ with unit coefficient.
    pub fn from_slots(stats: Statistics, slots: Vec<SingleParticleState>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::Invalid("an elementary ket needs at least one slot".into()));
        }
        let basis = slots[0].basis().clone();
        let ket = ElementaryKet::new(Complex64::ONE, slots)?;
        Ok(Self::elementary(stats, basis, ket))
    }

    /// One-particle state |k⟩.
    pub fn single(stats: Statistics, s: SingleParticleState) -> Self {
        let basis = s.basis().clone();
        Self::elementary(stats, basis, ElementaryKet { coeff: Complex64::ONE, slots: vec![s] })
    }

    /// The formal vacuum with coefficient `c` (zero-particle sector).
    pub fn vacuum(stats: Statistics, basis: Arc<ModeBasis>, c: Complex64) -> Self {
        ManyParticleState {
            stats,
            basis,
            n: 0,
            terms: vec![ElementaryKet { coeff: c, slots: vec![] }],
        }
    }

    /// The zero vector of the n-particle sector.
    pub fn zero(stats: Statistics, basis: Arc<ModeBasis>, n: usize) -> Self {
        ManyParticleState { stats, basis, n, terms: vec![] }
    }

    pub fn statistics(&self) -> Statistics {
        self.stats
    }

    pub fn basis(&self) -> &Arc<ModeBasis> {
        &self.basis
    }

    pub fn n_particles(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[ElementaryKet] {
        &self.terms
    }

    /// For zero-particle states: the scalar they represent.
    pub fn scalar_value(&self) -> Option<Complex64> {
        (self.n == 0).then(|| self.terms.iter().map(|t| t.coeff).sum())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        ManyParticleState {
            stats: self.stats,
            basis: self.basis.clone(),
            n: self.n,
            terms: self.terms.iter().map(|t| t.scaled(c)).collect(),
        }
    }

    /// Sum of two states of the same sector. Addition across particle numbers
    /// is rejected: no Fock-space direct sum is constructed here.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(ManyParticleState { stats: self.stats, basis: self.basis.clone(), n: self.n, terms })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-Complex64::ONE))
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.stats != other.stats {
            return Err(Error::StatisticsMismatch);
        }
        if !Arc::ptr_eq(&self.basis, &other.basis) && *self.basis != *other.basis {
            return Err(Error::BasisMismatch);
        }
        if self.n != other.n {
            return Err(Error::ParticleNumberMismatch { bra: self.n, ket: other.n });
        }
        Ok(())
    }

    /// Wedge product: term-by-term concatenation of slot lists with
    /// coefficient products. Bilinear; joins kets of different particle
    /// numbers into one holistic ket.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.stats != other.stats {
            return Err(Error::StatisticsMismatch);
        }
        if !Arc::ptr_eq(&self.basis, &other.basis) && *self.basis != *other.basis {
            return Err(Error::BasisMismatch);
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut slots = a.slots.clone();
                slots.extend(b.slots.iter().cloned());
                terms.push(ElementaryKet { coeff: a.coeff * b.coeff, slots });
            }
        }
        Ok(ManyParticleState {
            stats: self.stats,
            basis: self.basis.clone(),
            n: self.n + other.n,
            terms,
        })
    }

    /// Squared norm ⟨s|s⟩ through the permutation-sum amplitude.
    pub fn norm_sqr(&self) -> f64 {
        amplitude::amplitude(self, self)
            .map(|a| a.re.max(0.0))
            .unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescale so the self-amplitude is 1. A state with squared norm below
    /// 1e-12 (e.g. a fermionic doubly-occupied ket) is a null state.
    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 <= 1e-12 {
            return Err(Error::NullState(n2));
        }
        Ok(self.scaled(Complex64::new(1.0 / n2.sqrt(), 0.0)))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.norm_sqr() <= tol * tol
    }

    /// ‖self − other‖; the semantic distance used for state equality.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// Canonicalization pass used to keep term lists from exploding in
    /// iterated constructions: sorts each term's slots (accumulating η signs),
    /// merges bitwise-identical slot lists, and drops negligible terms.
    /// Semantically the identity.
    pub fn compact(&self) -> Self {
        let mut merged: HashMap<Vec<u64>, (Complex64, Vec<SingleParticleState>)> = HashMap::new();
        let mut order: Vec<Vec<u64>> = Vec::new();
        for t in &self.terms {
            let mut idx: Vec<usize> = (0..t.slots.len()).collect();
            idx.sort_by(|&a, &b| slot_key_cmp(&t.slots[a], &t.slots[b]));
            let parity = permutation_parity(&idx);
            let coeff = t.coeff * self.stats.eta_pow(parity);
            let slots: Vec<SingleParticleState> = idx.iter().map(|&i| t.slots[i].clone()).collect();
            let key = slots_bit_key(&slots);
            match merged.get_mut(&key) {
                Some(entry) => entry.0 += coeff,
                None => {
                    merged.insert(key.clone(), (coeff, slots));
                    order.push(key);
                }
            }
        }
        let terms = order
            .into_iter()
            .filter_map(|k| {
                let (coeff, slots) = merged.remove(&k)?;
                (coeff.norm() > 1e-14).then_some(ElementaryKet { coeff, slots })
            })
            .collect();
        ManyParticleState { stats: self.stats, basis: self.basis.clone(), n: self.n, terms }
    }
}

fn slot_key_cmp(a: &SingleParticleState, b: &SingleParticleState) -> std::cmp::Ordering {
    for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
        let c = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if c != std::cmp::Ordering::Equal {
            return c;
        }
    }
    std::cmp::Ordering::Equal
}

fn slots_bit_key(slots: &[SingleParticleState]) -> Vec<u64> {
    let mut key = Vec::with_capacity(slots.len() * 2);
    for s in slots {
        for c in s.coeffs() {
            key.push(c.re.to_bits());
            key.push(c.im.to_bits());
        }
    }
    key
}

/// Number of transpositions (mod 2) in the permutation `perm` of 0..n.
pub(crate) fn permutation_parity(perm: &[usize]) -> usize {
    let mut inv = 0usize;
    for i in 0..perm.len() {
        for j in (i + 1)..perm.len() {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    inv % 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::amplitude;
    use crate::hilbert::basis_state;

    fn lcr() -> Arc<ModeBasis> {
        ModeBasis::new(vec!["L", "C", "R"], vec!["u", "d"]).unwrap()
    }

    fn ket2(stats: Statistics, b: &Arc<ModeBasis>, s1: (&str, &str), s2: (&str, &str)) -> ManyParticleState {
        ManyParticleState::from_slots(
            stats,
            vec![basis_state(b, s1.0, s1.1).unwrap(), basis_state(b, s2.0, s2.1).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn wedge_of_basis_states() {
        let b = lcr();
        let lu = ManyParticleState::single(Statistics::Fermion, basis_state(&b, "L", "u").unwrap());
        let rd = ManyParticleState::single(Statistics::Fermion, basis_state(&b, "R", "d").unwrap());
        let w = lu.wedge(&rd).unwrap();
        assert_eq!(w.n_particles(), 2);
        let expect = ket2(Statistics::Fermion, &b, ("L", "u"), ("R", "d"));
        assert!(w.distance(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn fermionic_double_occupation_is_null() {
        let b = lcr();
        let lu = ManyParticleState::single(Statistics::Fermion, basis_state(&b, "L", "u").unwrap());
        let w = lu.wedge(&lu).unwrap();
        assert!(w.norm() < 1e-12);
        assert!(matches!(w.normalized(), Err(Error::NullState(_))));
    }

    #[test]
    fn bosonic_double_occupation_norm() {
        // ⟨L↑,L↑|L↑,L↑⟩ = 2: the 2×2 all-ones permanent, i.e. the two
        // permutations 1·1 + 1·1 computed by brute force.
        let brute = 1.0 * 1.0 + 1.0 * 1.0;
        let b = lcr();
        let lu = ManyParticleState::single(Statistics::Boson, basis_state(&b, "L", "u").unwrap());
        let w = lu.wedge(&lu).unwrap();
        assert!((w.norm_sqr() - brute).abs() < 1e-12);
        let normed = w.normalized().unwrap();
        assert!((normed.terms()[0].coeff() - Complex64::new(1.0 / 2f64.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn normalize_keeps_orthonormal_product_ket() {
        let b = lcr();
        let s = ket2(Statistics::Fermion, &b, ("L", "u"), ("R", "d"));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let n = s.normalized().unwrap();
        assert!((n.terms()[0].coeff() - Complex64::ONE).norm() < 1e-12);
    }

    #[test]
    fn swap_slots_carries_eta() {
        let b = lcr();
        for stats in [Statistics::Boson, Statistics::Fermion] {
            let s = ket2(stats, &b, ("L", "u"), ("R", "d"));
            let t = s.terms()[0].swap_slots(stats, 0, 1).unwrap();
            assert!((t.coeff() - Complex64::new(stats.eta(), 0.0)).norm() < 1e-15);
            // double swap restores the coefficient
            let t2 = t.swap_slots(stats, 0, 1).unwrap();
            assert!((t2.coeff() - s.terms()[0].coeff()).norm() < 1e-15);
            // amplitudes against a bra are unchanged
            let swapped = ManyParticleState::elementary(stats, b.clone(), t);
            let bra = ket2(stats, &b, ("L", "u"), ("R", "d"));
            let a1 = amplitude(&bra, &s).unwrap();
            let a2 = amplitude(&bra, &swapped).unwrap();
            assert!((a1 - a2).norm() < 1e-12);
        }
    }

    #[test]
    fn swap_slots_index_checked() {
        let b = lcr();
        let s = ket2(Statistics::Boson, &b, ("L", "u"), ("R", "d"));
        assert!(s.terms()[0].swap_slots(Statistics::Boson, 0, 2).is_err());
        assert!(s.terms()[0].swap_slots(Statistics::Boson, 1, 1).is_err());
    }

    #[test]
    fn addition_across_particle_numbers_rejected() {
        let b = lcr();
        let one = ManyParticleState::single(Statistics::Boson, basis_state(&b, "L", "u").unwrap());
        let two = ket2(Statistics::Boson, &b, ("L", "u"), ("R", "d"));
        assert!(matches!(one.add(&two), Err(Error::ParticleNumberMismatch { .. })));
    }

    #[test]
    fn compact_merges_swapped_duplicates() {
        let b = lcr();
        for stats in [Statistics::Boson, Statistics::Fermion] {
            let t1 = ket2(stats, &b, ("L", "u"), ("R", "d"));
            let t2 = ket2(stats, &b, ("R", "d"), ("L", "u")).scaled(Complex64::new(stats.eta(), 0.0));
            let sum = t1.add(&t2).unwrap();
            let compacted = sum.compact();
            assert_eq!(compacted.terms().len(), 1);
            assert!(sum.distance(&compacted).unwrap() < 1e-12);
            assert!((compacted.terms()[0].coeff().re - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fermionic_swapped_terms_cancel_in_compact() {
        let b = lcr();
        let t1 = ket2(Statistics::Fermion, &b, ("L", "u"), ("R", "d"));
        let t2 = ket2(Statistics::Fermion, &b, ("R", "d"), ("L", "u"));
        let sum = t1.add(&t2).unwrap();
        assert!(sum.compact().terms().is_empty());
        assert!(sum.norm() < 1e-12);
    }
}
