//! The N-particle transition amplitude: an η-weighted sum over all pairings
//! of exit and enter single-particle states — a permanent for bosons, a
//! determinant for fermions — extended sesquilinearly over term lists.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{ManyParticleState, Statistics};
use crate::hilbert::SingleParticleState;

/// Largest matrix size accepted by the Ryser permanent kernel.
pub const RYSER_LIMIT: usize = 24;
/// Largest matrix size accepted by the N!-term reference evaluation.
pub const NAIVE_LIMIT: usize = 8;

/// Square matrix of 1-particle amplitudes, M[i][j] = ⟨exit_i|enter_j⟩.
#[derive(Debug, Clone)]
pub struct OverlapMatrix {
    m: DMatrix<Complex64>,
}

impl OverlapMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        Ok(OverlapMatrix { m })
    }

    /// Overlaps between bra (exit) and ket (enter) slot lists.
    pub fn from_slots(bra: &[SingleParticleState], ket: &[SingleParticleState]) -> Result<Self> {
        if bra.len() != ket.len() {
            return Err(Error::ParticleNumberMismatch { bra: bra.len(), ket: ket.len() });
        }
        let n = bra.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = bra[i].inner(&ket[j])?;
            }
        }
        Ok(OverlapMatrix { m })
    }

    pub fn size(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    /// Permanent by Ryser's formula with Gray-code iteration, O(2^n · n).
    pub fn permanent(&self) -> Result<Complex64> {
        let n = self.size();
        if n > RYSER_LIMIT {
            return Err(Error::TooLarge { n, limit: RYSER_LIMIT });
        }
        if n == 0 {
            return Ok(Complex64::ONE);
        }
        // per(A) = (−1)^n Σ_{S≠∅} (−1)^{|S|} Π_i Σ_{j∈S} A[i][j].
        // Row sums are updated incrementally: Gray code flips one column per step.
        let mut rowsum = vec![Complex64::ZERO; n];
        let mut total = Complex64::ZERO;
        let mut sign = 1.0f64; // (−1)^{|S|}, starts at |S| = 1 after the first flip… tracked below
        let mut gray_prev: u64 = 0;
        for k in 1u64..(1 << n) {
            let gray = k ^ (k >> 1);
            let flipped = (gray ^ gray_prev).trailing_zeros() as usize;
            let added = gray & (1 << flipped) != 0;
            for (i, rs) in rowsum.iter_mut().enumerate() {
                let a = self.m[(i, flipped)];
                if added {
                    *rs += a;
                } else {
                    *rs -= a;
                }
            }
            sign = -sign; // |S| parity toggles with every flip
            let prod: Complex64 = rowsum.iter().product();
            total += prod * sign;
            gray_prev = gray;
        }
        let overall = if n % 2 == 0 { 1.0 } else { -1.0 };
        Ok(total * overall)
    }

    /// Determinant through LU with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        if self.size() == 0 {
            return Complex64::ONE;
        }
        self.m.clone().lu().determinant()
    }

    /// Direct Σ_P η^P Π_i M[i][P_i] over all n! permutations. The reference
    /// evaluation the fast kernels are checked against.
    pub fn permutation_sum(&self, stats: Statistics) -> Result<Complex64> {
        let n = self.size();
        if n > NAIVE_LIMIT {
            return Err(Error::TooLarge { n, limit: NAIVE_LIMIT });
        }
        if n == 0 {
            return Ok(Complex64::ONE);
        }
        let mut total = Complex64::ZERO;
        for perm in (0..n).permutations(n) {
            let parity = crate::state::permutation_parity(&perm);
            let mut prod = Complex64::new(stats.eta_pow(parity), 0.0);
            for (i, &j) in perm.iter().enumerate() {
                prod *= self.m[(i, j)];
            }
            total += prod;
        }
        Ok(total)
    }
}

/// Free-function form of the permanent kernel.
pub fn permanent_ryser(m: &OverlapMatrix) -> Result<Complex64> {
    m.permanent()
}

/// η-weighted pairing sum for one pair of slot lists.
pub(crate) fn kernel(
    stats: Statistics,
    bra: &[SingleParticleState],
    ket: &[SingleParticleState],
) -> Result<Complex64> {
    let m = OverlapMatrix::from_slots(bra, ket)?;
    match stats {
        Statistics::Boson => m.permanent(),
        Statistics::Fermion => Ok(m.determinant()),
    }
}

fn kernel_naive(
    stats: Statistics,
    bra: &[SingleParticleState],
    ket: &[SingleParticleState],
) -> Result<Complex64> {
    OverlapMatrix::from_slots(bra, ket)?.permutation_sum(stats)
}

fn amplitude_with(
    bra: &ManyParticleState,
    ket: &ManyParticleState,
    f: impl Fn(Statistics, &[SingleParticleState], &[SingleParticleState]) -> Result<Complex64>,
) -> Result<Complex64> {
    bra.check_compatible(ket)?;
    let mut total = Complex64::ZERO;
    for tb in bra.terms() {
        for tk in ket.terms() {
            let k = f(bra.statistics(), tb.slots(), tk.slots())?;
            total += tb.coeff().conj() * tk.coeff() * k;
        }
    }
    Ok(total)
}

/// Transition amplitude ⟨bra|ket⟩: permanent (bosons) or determinant
/// (fermions) of the overlap matrix, sesquilinear over term lists.
pub fn amplitude(bra: &ManyParticleState, ket: &ManyParticleState) -> Result<Complex64> {
    amplitude_with(bra, ket, kernel)
}

/// Same contract as [`amplitude`], evaluated as the explicit N!-term
/// permutation sum. Serves as the oracle; guarded at N ≤ 8.
pub fn amplitude_naive(bra: &ManyParticleState, ket: &ManyParticleState) -> Result<Complex64> {
    amplitude_with(bra, ket, kernel_naive)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::hilbert::{basis_state, ModeBasis};
    use crate::state::ElementaryKet;

    fn lcr() -> Arc<ModeBasis> {
        ModeBasis::new(vec!["L", "C", "R"], vec!["u", "d"]).unwrap()
    }

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ket_of(stats: Statistics, b: &Arc<ModeBasis>, labels: &[(&str, &str)]) -> ManyParticleState {
        ManyParticleState::from_slots(
            stats,
            labels.iter().map(|(m, s)| basis_state(b, m, s).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn permanent_2x2_definition() {
        let m = OverlapMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[cx(1.0, 2.0), cx(0.5, -1.0), cx(-2.0, 0.0), cx(3.0, 1.0)],
        ))
        .unwrap();
        // ad + bc
        let expect = cx(1.0, 2.0) * cx(3.0, 1.0) + cx(0.5, -1.0) * cx(-2.0, 0.0);
        assert!((m.permanent().unwrap() - expect).norm() < 1e-12);
    }

    #[test]
    fn permanent_of_identity_is_one() {
        for n in [1, 3, 7, 12] {
            let m = OverlapMatrix::new(DMatrix::identity(n, n)).unwrap();
            assert!((m.permanent().unwrap() - Complex64::ONE).norm() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn permanent_matches_permutation_sum_on_random_6x6() {
        // the exhaustive 6!-term oracle
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m = DMatrix::from_fn(6, 6, |_, _| cx(next(), next()));
        let om = OverlapMatrix::new(m).unwrap();
        let fast = om.permanent().unwrap();
        let slow = om.permutation_sum(Statistics::Boson).unwrap();
        assert!((fast - slow).norm() <= 1e-10 * slow.norm().max(1.0));
        // and the determinant against the signed sum
        let det = om.determinant();
        let det_slow = om.permutation_sum(Statistics::Fermion).unwrap();
        assert!((det - det_slow).norm() <= 1e-10 * det_slow.norm().max(1.0));
    }

    #[test]
    fn non_square_rejected() {
        assert!(OverlapMatrix::new(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn ryser_guard() {
        let m = OverlapMatrix::new(DMatrix::identity(RYSER_LIMIT + 1, RYSER_LIMIT + 1)).unwrap();
        assert!(matches!(m.permanent(), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn orthonormal_slots_identity_amplitude() {
        let b = lcr();
        let s = ket_of(Statistics::Boson, &b, &[("L", "u"), ("R", "d")]);
        assert!((amplitude(&s, &s).unwrap() - Complex64::ONE).norm() < 1e-12);
    }

    #[test]
    fn fermionic_repeated_exit_state_vanishes() {
        let b = lcr();
        let bra = ket_of(Statistics::Fermion, &b, &[("L", "u"), ("L", "u")]);
        let ket = ket_of(Statistics::Fermion, &b, &[("L", "u"), ("R", "d")]);
        assert!(amplitude(&bra, &ket).unwrap().norm() < 1e-14);
    }

    #[test]
    fn bosonic_double_occupation_amplitude_is_two() {
        // two permutations, each contributing 1
        let b = lcr();
        let s = ket_of(Statistics::Boson, &b, &[("L", "u"), ("L", "u")]);
        let a = amplitude_naive(&s, &s).unwrap();
        assert!((a - cx(2.0, 0.0)).norm() < 1e-12);
        assert!((amplitude(&s, &s).unwrap() - a).norm() < 1e-12);
    }

    #[test]
    fn cluster_decomposition_product_form() {
        // enter states on disjoint mode sets aligned with exits: the amplitude
        // is the product of 1-particle amplitudes.
        let b = lcr();
        let h = 1.0 / 2f64.sqrt();
        let e1 = crate::hilbert::SingleParticleState::from_product(
            &b,
            &[("L", cx(h, 0.0))],
            &[("u", cx(h, h))],
        )
        .unwrap();
        let e2 = crate::hilbert::SingleParticleState::from_product(
            &b,
            &[("R", cx(0.6, 0.0)), ("C", cx(0.0, 0.8))],
            &[("d", Complex64::ONE)],
        )
        .unwrap();
        let x1 = basis_state(&b, "L", "u").unwrap();
        let x2 = basis_state(&b, "R", "d").unwrap();
        for stats in [Statistics::Boson, Statistics::Fermion] {
            let ket = ManyParticleState::from_slots(stats, vec![e1.clone(), e2.clone()]).unwrap();
            let bra = ManyParticleState::from_slots(stats, vec![x1.clone(), x2.clone()]).unwrap();
            let a = amplitude(&bra, &ket).unwrap();
            let product = x1.inner(&e1).unwrap() * x2.inner(&e2).unwrap();
            assert!((a - product).norm() < 1e-12);
        }
    }

    #[test]
    fn amplitude_is_conjugate_symmetric() {
        let b = lcr();
        let t1 = ElementaryKet::new(
            cx(0.3, 0.7),
            vec![basis_state(&b, "L", "u").unwrap(), basis_state(&b, "C", "d").unwrap()],
        )
        .unwrap();
        let t2 = ElementaryKet::new(
            cx(-0.2, 0.1),
            vec![basis_state(&b, "C", "d").unwrap(), basis_state(&b, "R", "u").unwrap()],
        )
        .unwrap();
        for stats in [Statistics::Boson, Statistics::Fermion] {
            let s1 = ManyParticleState::new(stats, b.clone(), 2, vec![t1.clone()]).unwrap();
            let s2 = ManyParticleState::new(stats, b.clone(), 2, vec![t1.clone(), t2.clone()]).unwrap();
            let a12 = amplitude(&s1, &s2).unwrap();
            let a21 = amplitude(&s2, &s1).unwrap();
            assert!((a12.conj() - a21).norm() < 1e-12);
        }
    }

    #[test]
    fn swapping_bra_slots_negates_fermionic_amplitude() {
        let b = lcr();
        let bra = ket_of(Statistics::Fermion, &b, &[("L", "u"), ("R", "d")]);
        let bra_swapped = ket_of(Statistics::Fermion, &b, &[("R", "d"), ("L", "u")]);
        let ket = ket_of(Statistics::Fermion, &b, &[("L", "u"), ("R", "d")]);
        let a = amplitude_naive(&bra, &ket).unwrap();
        let a_swapped = amplitude_naive(&bra_swapped, &ket).unwrap();
        assert!((a + a_swapped).norm() < 1e-12);
    }

    #[test]
    fn particle_number_mismatch_rejected() {
        let b = lcr();
        let one = ManyParticleState::single(Statistics::Boson, basis_state(&b, "L", "u").unwrap());
        let two = ket_of(Statistics::Boson, &b, &[("L", "u"), ("R", "d")]);
        assert!(matches!(
            amplitude(&one, &two),
            Err(Error::ParticleNumberMismatch { .. })
        ));
    }

    #[test]
    fn statistics_mismatch_rejected() {
        let b = lcr();
        let bos = ket_of(Statistics::Boson, &b, &[("L", "u"), ("R", "d")]);
        let fer = ket_of(Statistics::Fermion, &b, &[("L", "u"), ("R", "d")]);
        assert!(matches!(amplitude(&bos, &fer), Err(Error::StatisticsMismatch)));
    }

    #[test]
    fn naive_guard_at_large_n() {
        let b = lcr();
        let slots: Vec<_> = (0..9)
            .map(|i| basis_state(&b, ["L", "C", "R"][i % 3], ["u", "d"][i % 2]).unwrap())
            .collect();
        let s = ManyParticleState::from_slots(Statistics::Boson, slots).unwrap();
        assert!(matches!(amplitude_naive(&s, &s), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn vacuum_amplitude_is_coefficient_product() {
        let b = lcr();
        let v1 = ManyParticleState::vacuum(Statistics::Boson, b.clone(), cx(0.5, 0.5));
        let v2 = ManyParticleState::vacuum(Statistics::Boson, b.clone(), cx(2.0, 0.0));
        let a = amplitude(&v1, &v2).unwrap();
        assert!((a - cx(0.5, 0.5).conj() * cx(2.0, 0.0)).norm() < 1e-15);
    }
}
