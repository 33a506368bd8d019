//! Spatially localised operations and classical communication (sLOCC):
//! project a two-particle state onto coincident detection in two separated
//! regions, read off the conditional two-qubit state, and analyse it with
//! concurrence and the CHSH-Bell function.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::amplitude::amplitude;
use crate::error::{Error, Result};
use crate::hilbert::SingleParticleState;
use crate::reduction::CollectiveBasis;
use crate::state::{ManyParticleState, Statistics};

const COINCIDENCE_TOL: f64 = 1e-12;

/// Spatial overlap amplitudes of the two prepared wavefunctions with the two
/// detection regions: l = ⟨L|ψ⟩, l′ = ⟨L|ψ′⟩, r = ⟨R|ψ⟩, r′ = ⟨R|ψ′⟩.
#[derive(Debug, Clone, Copy)]
pub struct Overlaps {
    pub l: Complex64,
    pub l_prime: Complex64,
    pub r: Complex64,
    pub r_prime: Complex64,
}

/// Result of the coincident L–R projection.
///
/// The conditional state lives on B_LR = {|L↑,R↑⟩, |L↑,R↓⟩, |L↓,R↑⟩, |L↓,R↓⟩}
/// with ↑/↓ the first two spin labels of the basis.
#[derive(Debug, Clone)]
pub struct SloccResult {
    pub state: [Complex64; 4],
    /// Probability of one particle in each region.
    pub p_lr: f64,
    /// Probability of both particles detected in region L (reported only; no
    /// correlations are computed there).
    pub p_ll: f64,
    /// Probability of both particles detected in region R.
    pub p_rr: f64,
    /// Present when the input matches the independent-preparation template
    /// |ψ↑, ψ′↓⟩ and both regions are single modes.
    pub overlaps: Option<Overlaps>,
}

fn region_indices(
    state: &ManyParticleState,
    region: &[&str],
) -> Result<Vec<usize>> {
    if region.is_empty() {
        return Err(Error::Invalid("a detection region needs at least one mode".into()));
    }
    let mut out = Vec::with_capacity(region.len());
    for m in region {
        let i = state.basis().mode_index(m)?;
        if out.contains(&i) {
            return Err(Error::Invalid(format!("repeated mode `{m}` in region")));
        }
        out.push(i);
    }
    Ok(out)
}

/// Probability of finding both particles inside one mode set.
fn same_region_probability(state: &ManyParticleState, modes: &[usize]) -> Result<f64> {
    let basis = state.basis();
    let sp: Vec<usize> = (0..basis.dimension())
        .filter(|&i| modes.contains(&basis.mode_of(i)))
        .collect();
    let cb = CollectiveBasis::over(basis, state.statistics(), 2, &sp)?;
    let mut p = 0.0;
    for k in cb.kets() {
        p += amplitude(k.state(), state)?.norm_sqr();
    }
    Ok(p)
}

/// Extract (ψ, ψ′) from the template |ψ↑, ψ′↓⟩ — a single product term whose
/// slots carry the two distinct basis spins. The term coefficient and slot
/// scales are absorbed into ψ, which only moves an unobservable joint factor
/// between ψ and ψ′ (every reported quantity depends on the products lr′ and
/// l′r alone).
fn template_wavefunctions(state: &ManyParticleState) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
    let compacted = state.compact();
    let terms = compacted.terms();
    if terms.len() != 1 {
        return None;
    }
    let basis = state.basis();
    let mut spatial_by_spin: Vec<Option<Vec<Complex64>>> = vec![None, None];
    let mut joint = terms[0].coeff();
    for slot in terms[0].slots() {
        let (sp, ss, scale) = slot.factor_spatial_spin(1e-10)?;
        joint *= scale;
        // which basis spin is it?
        let spin_idx = (0..basis.n_spins()).find(|&i| {
            ss.iter()
                .enumerate()
                .all(|(j, c)| (c - if j == i { Complex64::ONE } else { Complex64::ZERO }).norm() < 1e-10)
        })?;
        if spin_idx > 1 || spatial_by_spin[spin_idx].is_some() {
            return None;
        }
        spatial_by_spin[spin_idx] = Some(sp);
    }
    match (spatial_by_spin[0].take(), spatial_by_spin[1].take()) {
        (Some(psi), Some(psi_prime)) => {
            Some((psi.iter().map(|c| c * joint).collect(), psi_prime))
        }
        _ => None,
    }
}

/// Project a two-particle state onto coincident detection in the disjoint
/// regions L and R, returning the conditional two-qubit state on B_LR plus
/// the coincidence probability.
pub fn slocc_project(
    state: &ManyParticleState,
    region_l: &[&str],
    region_r: &[&str],
) -> Result<SloccResult> {
    if state.n_particles() != 2 {
        return Err(Error::ParticleNumberMismatch { bra: 2, ket: state.n_particles() });
    }
    let basis = state.basis();
    if basis.n_spins() != 2 {
        return Err(Error::Invalid(
            "the coincidence analysis needs exactly two pseudospin labels".into(),
        ));
    }
    let li = region_indices(state, region_l)?;
    let ri = region_indices(state, region_r)?;
    if li.iter().any(|i| ri.contains(i)) {
        return Err(Error::Invalid("detection regions must be disjoint".into()));
    }
    let n2 = state.norm_sqr();
    if (n2 - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(n2));
    }

    // amplitudes onto |mL σ, mR τ⟩, grouped per (σ, τ) as vectors over
    // (mL, mR) pairs
    let n_pairs = li.len() * ri.len();
    let mut blocks: [Vec<Complex64>; 4] = [
        Vec::with_capacity(n_pairs),
        Vec::with_capacity(n_pairs),
        Vec::with_capacity(n_pairs),
        Vec::with_capacity(n_pairs),
    ];
    for (bi, (sigma, tau)) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)].iter().enumerate() {
        for &ml in &li {
            for &mr in &ri {
                let bra = ManyParticleState::from_slots(
                    state.statistics(),
                    vec![
                        crate::hilbert::basis_state_at(basis, basis.index(ml, *sigma)),
                        crate::hilbert::basis_state_at(basis, basis.index(mr, *tau)),
                    ],
                )?;
                blocks[bi].push(amplitude(&bra, state)?);
            }
        }
    }
    let p_lr: f64 = blocks.iter().flatten().map(|c| c.norm_sqr()).sum();
    if p_lr <= COINCIDENCE_TOL {
        return Err(Error::NoCoincidence(p_lr));
    }

    // the conditional state is a two-qubit pure state only when the four
    // (σ,τ)-blocks share one spatial profile over the mode pairs
    let state4: [Complex64; 4] = if n_pairs == 1 {
        [blocks[0][0], blocks[1][0], blocks[2][0], blocks[3][0]]
    } else {
        let m = DMatrix::from_fn(n_pairs, 4, |r, c| blocks[c][r]);
        let svd = m.svd(false, true);
        let sv = &svd.singular_values;
        let imax = (0..sv.len()).max_by(|&a, &b| sv[a].total_cmp(&sv[b])).unwrap();
        let residual: f64 = (0..sv.len()).filter(|&i| i != imax).map(|i| sv[i]).sum();
        if residual > 1e-10 * sv[imax] {
            return Err(Error::Contract(
                "conditional state is not a two-qubit pure state for these regions".into(),
            ));
        }
        let vt = svd.v_t.expect("requested");
        [
            vt[(imax, 0)] * sv[imax],
            vt[(imax, 1)] * sv[imax],
            vt[(imax, 2)] * sv[imax],
            vt[(imax, 3)] * sv[imax],
        ]
    };
    let norm = p_lr.sqrt();
    let state4 = state4.map(|c| c / norm);

    let p_ll = same_region_probability(state, &li)?;
    let p_rr = same_region_probability(state, &ri)?;

    let overlaps = if li.len() == 1 && ri.len() == 1 {
        template_wavefunctions(state).map(|(psi, psi_prime)| Overlaps {
            l: psi[li[0]],
            l_prime: psi_prime[li[0]],
            r: psi[ri[0]],
            r_prime: psi_prime[ri[0]],
        })
    } else {
        None
    };

    Ok(SloccResult { state: state4, p_lr, p_ll, p_rr, overlaps })
}

/// Conditional state and coincidence probability straight from the overlap
/// amplitudes: (l r′ |L↑,R↓⟩ + η l′ r |L↓,R↑⟩)/√P with P = |lr′|² + |l′r|².
pub fn conditional_from_overlaps(
    stats: Statistics,
    o: &Overlaps,
) -> Result<([Complex64; 4], f64)> {
    let a = o.l * o.r_prime;
    let b = o.l_prime * o.r * stats.eta();
    let p = a.norm_sqr() + b.norm_sqr();
    if p <= COINCIDENCE_TOL {
        return Err(Error::NoCoincidence(p));
    }
    let n = p.sqrt();
    Ok(([Complex64::ZERO, a / n, b / n, Complex64::ZERO], p))
}

/// One measurement direction: a unit vector in spin space defining the
/// observable O·σ.
#[derive(Debug, Clone, Copy)]
pub struct MeasurementSetting {
    axis: [f64; 3],
}

impl MeasurementSetting {
    pub fn new(axis: [f64; 3]) -> Result<Self> {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::BadSetting(n));
        }
        Ok(MeasurementSetting { axis })
    }

    /// Direction at polar angle θ in the x–z plane.
    pub fn in_xz_plane(theta: f64) -> Self {
        MeasurementSetting { axis: [theta.sin(), 0.0, theta.cos()] }
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }
}

fn check_normalized4(state: &[Complex64; 4]) -> Result<()> {
    let n2: f64 = state.iter().map(|c| c.norm_sqr()).sum();
    if (n2 - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(n2));
    }
    Ok(())
}

/// Pauli matrices in the {↑, ↓} basis.
fn pauli() -> [[[Complex64; 2]; 2]; 3] {
    let z = Complex64::ZERO;
    let one = Complex64::ONE;
    let i = Complex64::new(0.0, 1.0);
    [
        [[z, one], [one, z]],
        [[z, -i], [i, z]],
        [[one, z], [z, -one]],
    ]
}

/// Spin correlation tensor T_ij = ⟨σ_i ⊗ σ_j⟩ of a pure two-qubit state.
pub fn correlation_tensor(state: &[Complex64; 4]) -> Result<Matrix3<f64>> {
    check_normalized4(state)?;
    let sig = pauli();
    let mut t = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = Complex64::ZERO;
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        for d in 0..2 {
                            acc += state[2 * a + b].conj() * sig[i][a][c] * sig[j][b][d]
                                * state[2 * c + d];
                        }
                    }
                }
            }
            t[(i, j)] = acc.re;
        }
    }
    Ok(t)
}

fn correlation(t: &Matrix3<f64>, a: &MeasurementSetting, b: &MeasurementSetting) -> f64 {
    let mut e = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            e += a.axis[i] * t[(i, j)] * b.axis[j];
        }
    }
    e
}

/// CHSH combination |E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)| for a pure
/// two-qubit state.
pub fn bell_value(
    state: &[Complex64; 4],
    a: &MeasurementSetting,
    a_prime: &MeasurementSetting,
    b: &MeasurementSetting,
    b_prime: &MeasurementSetting,
) -> Result<f64> {
    let t = correlation_tensor(state)?;
    Ok(
        (correlation(&t, a, b) + correlation(&t, a, b_prime) + correlation(&t, a_prime, b)
            - correlation(&t, a_prime, b_prime))
        .abs(),
    )
}

/// CHSH combination for a 4×4 density matrix on B_LR.
pub fn bell_value_rho(
    rho: &DMatrix<Complex64>,
    a: &MeasurementSetting,
    a_prime: &MeasurementSetting,
    b: &MeasurementSetting,
    b_prime: &MeasurementSetting,
) -> Result<f64> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: rho.nrows() });
    }
    let tr: Complex64 = rho.diagonal().iter().sum();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::NotNormalized(tr.re));
    }
    let sig = pauli();
    let mut t = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = Complex64::ZERO;
            // Tr(ρ σ_i ⊗ σ_j)
            for a1 in 0..2 {
                for b1 in 0..2 {
                    for c in 0..2 {
                        for d in 0..2 {
                            acc += rho[(2 * c + d, 2 * a1 + b1)] * sig[i][a1][c] * sig[j][b1][d];
                        }
                    }
                }
            }
            t[(i, j)] = acc.re;
        }
    }
    Ok(
        (correlation(&t, a, b) + correlation(&t, a, b_prime) + correlation(&t, a_prime, b)
            - correlation(&t, a_prime, b_prime))
        .abs(),
    )
}

/// Concurrence C = 2|ad − bc| of a normalized pure two-qubit state (a,b,c,d).
pub fn concurrence(state: &[Complex64; 4]) -> Result<f64> {
    check_normalized4(state)?;
    Ok((2.0 * (state[0] * state[3] - state[1] * state[2]).norm()).min(1.0))
}

/// Largest attainable CHSH value from the two leading eigenvalues of TᵀT.
pub fn bell_max_horodecki(state: &[Complex64; 4]) -> Result<f64> {
    let t = correlation_tensor(state)?;
    let m = t.transpose() * t;
    let eig = SymmetricEigen::new(m);
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(2.0 * (v[0].max(0.0) + v[1].max(0.0)).sqrt())
}

/// Largest attainable CHSH value of a pure two-qubit state: 2√(1 + C²),
/// cross-checked against the correlation-tensor bound.
pub fn bell_max(state: &[Complex64; 4]) -> Result<f64> {
    let c = concurrence(state)?;
    let analytic = 2.0 * (1.0 + c * c).sqrt();
    let horodecki = bell_max_horodecki(state)?;
    if (analytic - horodecki).abs() > 1e-8 {
        return Err(Error::Contract(format!(
            "pure-state CHSH bound {analytic} disagrees with the correlation-tensor bound {horodecki}"
        )));
    }
    Ok(analytic)
}

fn random_unit(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            let n = n2.sqrt();
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

fn normalize3(v: [f64; 3]) -> Option<[f64; 3]> {
    let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 1e-12).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

/// Search for the largest CHSH value over random measurement settings.
///
/// Draws random orthonormal (ĉ, d̂) pairs, reconstructs the optimal
/// (a, a′, b, b′) for each analytically, and reports the best value found by
/// evaluating [`bell_value`] at those concrete settings. Deterministic given
/// the seed.
pub fn bell_max_random_search(
    state: &[Complex64; 4],
    samples: usize,
    seed: u64,
) -> Result<(f64, [MeasurementSetting; 4])> {
    let t = correlation_tensor(state)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    let mut best_settings = [
        MeasurementSetting::in_xz_plane(0.0),
        MeasurementSetting::in_xz_plane(std::f64::consts::FRAC_PI_2),
        MeasurementSetting::in_xz_plane(std::f64::consts::FRAC_PI_4),
        MeasurementSetting::in_xz_plane(-std::f64::consts::FRAC_PI_4),
    ];
    let apply = |v: &[f64; 3]| -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i] += t[(i, j)] * v[j];
            }
        }
        out
    };
    for _ in 0..samples {
        let c = random_unit(&mut rng);
        // random direction orthogonal to c
        let mut d = random_unit(&mut rng);
        let proj: f64 = c.iter().zip(&d).map(|(x, y)| x * y).sum();
        for i in 0..3 {
            d[i] -= proj * c[i];
        }
        let Some(d) = normalize3(d) else { continue };
        // b = cosθ ĉ + sinθ d̂, b′ = cosθ ĉ − sinθ d̂ with the optimal θ
        let tc = apply(&c);
        let td = apply(&d);
        let x: f64 = tc.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y: f64 = td.iter().map(|v| v * v).sum::<f64>().sqrt();
        if x + y <= 1e-12 {
            continue;
        }
        let theta = y.atan2(x);
        let (s, co) = theta.sin_cos();
        let b = [co * c[0] + s * d[0], co * c[1] + s * d[1], co * c[2] + s * d[2]];
        let bp = [co * c[0] - s * d[0], co * c[1] - s * d[1], co * c[2] - s * d[2]];
        let (Some(b), Some(bp)) = (normalize3(b), normalize3(bp)) else { continue };
        // optimal a ∝ T(b + b′), a′ ∝ T(b − b′)
        let sum = [b[0] + bp[0], b[1] + bp[1], b[2] + bp[2]];
        let dif = [b[0] - bp[0], b[1] - bp[1], b[2] - bp[2]];
        let (Some(a), Some(ap)) = (normalize3(apply(&sum)), normalize3(apply(&dif))) else {
            continue;
        };
        let settings = [
            MeasurementSetting { axis: a },
            MeasurementSetting { axis: ap },
            MeasurementSetting { axis: b },
            MeasurementSetting { axis: bp },
        ];
        let v = bell_value(state, &settings[0], &settings[1], &settings[2], &settings[3])?;
        if v > best {
            best = v;
            best_settings = settings;
        }
    }
    Ok((best, best_settings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{basis_state, ModeBasis};
    use std::sync::Arc;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn lr_basis() -> Arc<ModeBasis> {
        ModeBasis::new(vec!["L", "R"], vec!["u", "d"]).unwrap()
    }

    fn template_state(
        stats: Statistics,
        basis: &Arc<ModeBasis>,
        psi: &[Complex64],
        psi_prime: &[Complex64],
    ) -> ManyParticleState {
        let up: Vec<Complex64> = vec![Complex64::ONE, Complex64::ZERO];
        let down: Vec<Complex64> = vec![Complex64::ZERO, Complex64::ONE];
        ManyParticleState::from_slots(
            stats,
            vec![
                SingleParticleState::from_parts(basis, psi, &up).unwrap(),
                SingleParticleState::from_parts(basis, psi_prime, &down).unwrap(),
            ],
        )
        .unwrap()
        .normalized()
        .unwrap()
    }

    #[test]
    fn localized_preparation_passes_through() {
        let b = lr_basis();
        for stats in [Statistics::Boson, Statistics::Fermion] {
            let s = template_state(stats, &b, &[Complex64::ONE, Complex64::ZERO], &[
                Complex64::ZERO,
                Complex64::ONE,
            ]);
            let r = slocc_project(&s, &["L"], &["R"]).unwrap();
            assert!((r.p_lr - 1.0).abs() < 1e-12);
            assert!((r.state[1].norm() - 1.0).abs() < 1e-12);
            assert!(r.state[0].norm() + r.state[2].norm() + r.state[3].norm() < 1e-12);
            let o = r.overlaps.unwrap();
            assert!((o.l.norm() - 1.0).abs() < 1e-12);
            assert!((o.r_prime.norm() - 1.0).abs() < 1e-12);
            assert!(o.l_prime.norm() < 1e-12 && o.r.norm() < 1e-12);
        }
    }

    #[test]
    fn half_overlap_conditional_state() {
        let b = lr_basis();
        let h = 1.0 / 2f64.sqrt();
        let even = vec![cx(h, 0.0), cx(h, 0.0)];
        for stats in [Statistics::Boson, Statistics::Fermion] {
            let s = template_state(stats, &b, &even, &even);
            let r = slocc_project(&s, &["L"], &["R"]).unwrap();
            assert!((r.p_lr - 0.5).abs() < 1e-10, "{stats:?}: {}", r.p_lr);
            // conditional ∝ |L↑,R↓⟩ + η|L↓,R↑⟩
            let expect = [cx(0.0, 0.0), cx(h, 0.0), cx(h * stats.eta(), 0.0), cx(0.0, 0.0)];
            // up to a global phase; compare via overlap
            let ov: Complex64 = expect
                .iter()
                .zip(&r.state)
                .map(|(e, s)| e.conj() * s)
                .sum();
            assert!((ov.norm() - 1.0).abs() < 1e-10);
            // and against the closed-form construction
            let (direct, p) = conditional_from_overlaps(stats, &r.overlaps.unwrap()).unwrap();
            assert!((p - 0.5).abs() < 1e-10);
            let ov2: Complex64 = direct.iter().zip(&r.state).map(|(e, s)| e.conj() * s).sum();
            assert!((ov2.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn no_coincidence_when_both_in_one_region() {
        let b = lr_basis();
        let s = template_state(
            Statistics::Boson,
            &b,
            &[Complex64::ONE, Complex64::ZERO],
            &[Complex64::ONE, Complex64::ZERO],
        );
        assert!(matches!(
            slocc_project(&s, &["L"], &["R"]),
            Err(Error::NoCoincidence(_))
        ));
    }

    #[test]
    fn same_region_probabilities_reported() {
        let b = lr_basis();
        let h = 1.0 / 2f64.sqrt();
        let even = vec![cx(h, 0.0), cx(h, 0.0)];
        let s = template_state(Statistics::Boson, &b, &even, &even);
        let r = slocc_project(&s, &["L"], &["R"]).unwrap();
        // |ψ↑,ψ′↓⟩ with ψ = ψ′ even: amplitudes |⟨L↑,L↓|Ψ⟩|² = |1/2 + η/2 · 0|²…
        // totals must account for all four detection patterns
        assert!((r.p_lr + r.p_ll + r.p_rr - 1.0).abs() < 1e-10);
        assert!((r.p_ll - 0.25).abs() < 1e-10);
        assert!((r.p_rr - 0.25).abs() < 1e-10);
    }

    #[test]
    fn concurrence_of_product_and_bell_states() {
        let z = Complex64::ZERO;
        let one = Complex64::ONE;
        let h = cx(1.0 / 2f64.sqrt(), 0.0);
        assert!(concurrence(&[z, one, z, z]).unwrap() < 1e-12);
        assert!((concurrence(&[z, h, h, z]).unwrap() - 1.0).abs() < 1e-12);
        assert!((concurrence(&[h, z, z, h]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concurrence_from_overlap_formula() {
        // l = l′ = r = r′ = 1/√2 gives C = 2|l r′ l′ r| / P = 1
        let h = cx(1.0 / 2f64.sqrt(), 0.0);
        let o = Overlaps { l: h, l_prime: h, r: h, r_prime: h };
        for stats in [Statistics::Boson, Statistics::Fermion] {
            let (state, p) = conditional_from_overlaps(stats, &o).unwrap();
            assert!((p - 0.5).abs() < 1e-12);
            let c = concurrence(&state).unwrap();
            let formula = 2.0 * (h * h * h * h).norm() / p;
            assert!((c - formula).abs() < 1e-12);
            assert!((c - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unnormalized_state_rejected() {
        let z = Complex64::ZERO;
        let one = Complex64::ONE;
        assert!(matches!(concurrence(&[z, one, one, z]), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn bell_state_at_canonical_angles() {
        // Φ⁺-type state with settings (0, π/2; π/4, −π/4) in the x–z plane
        let h = cx(1.0 / 2f64.sqrt(), 0.0);
        let state = [h, Complex64::ZERO, Complex64::ZERO, h];
        let pi = std::f64::consts::PI;
        let v = bell_value(
            &state,
            &MeasurementSetting::in_xz_plane(0.0),
            &MeasurementSetting::in_xz_plane(pi / 2.0),
            &MeasurementSetting::in_xz_plane(pi / 4.0),
            &MeasurementSetting::in_xz_plane(-pi / 4.0),
        )
        .unwrap();
        assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-12, "v = {v}");
    }

    #[test]
    fn identical_settings_stay_local() {
        let h = cx(1.0 / 2f64.sqrt(), 0.0);
        let state = [h, Complex64::ZERO, Complex64::ZERO, h];
        let s = MeasurementSetting::in_xz_plane(0.7);
        let v = bell_value(&state, &s, &s, &s, &s).unwrap();
        assert!(v <= 2.0 + 1e-12);
    }

    #[test]
    fn product_state_never_violates() {
        let state = [Complex64::ONE, Complex64::ZERO, Complex64::ZERO, Complex64::ZERO];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let s: Vec<MeasurementSetting> = (0..4)
                .map(|_| MeasurementSetting { axis: random_unit(&mut rng) })
                .collect();
            let v = bell_value(&state, &s[0], &s[1], &s[2], &s[3]).unwrap();
            assert!(v <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn bell_max_boundaries() {
        let z = Complex64::ZERO;
        let one = Complex64::ONE;
        let h = cx(1.0 / 2f64.sqrt(), 0.0);
        assert!((bell_max(&[z, one, z, z]).unwrap() - 2.0).abs() < 1e-12);
        assert!((bell_max(&[z, h, h, z]).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn random_search_reaches_the_analytic_maximum() {
        // |l| = |r′| = 0.8, |l′| = |r| = 0.6 with a phase on l
        let o = Overlaps {
            l: Complex64::from_polar(0.8, 0.3),
            l_prime: cx(0.6, 0.0),
            r: cx(0.6, 0.0),
            r_prime: cx(0.8, 0.0),
        };
        let (state, p) = conditional_from_overlaps(Statistics::Fermion, &o).unwrap();
        let c = concurrence(&state).unwrap();
        let expect_c = 2.0 * (0.8 * 0.8 * 0.6 * 0.6) / p;
        assert!((c - expect_c).abs() < 1e-12);
        let analytic = bell_max(&state).unwrap();
        let (found, settings) = bell_max_random_search(&state, 10_000, 99).unwrap();
        assert!(found <= analytic + 1e-9);
        assert!(analytic - found < 1e-3, "analytic {analytic}, search {found}");
        // the reported settings reproduce the reported value
        let again = bell_value(&state, &settings[0], &settings[1], &settings[2], &settings[3])
            .unwrap();
        assert!((again - found).abs() < 1e-12);
    }

    #[test]
    fn phase_invariance_of_the_pipeline() {
        let b = lr_basis();
        let h = 1.0 / 2f64.sqrt();
        let even = vec![cx(h, 0.0), cx(h, 0.0)];
        let s = template_state(Statistics::Fermion, &b, &even, &even);
        let phase = cx(0.0, 1.0);
        let s2 = s.scaled(phase);
        let r1 = slocc_project(&s, &["L"], &["R"]).unwrap();
        let r2 = slocc_project(&s2, &["L"], &["R"]).unwrap();
        assert!((r1.p_lr - r2.p_lr).abs() < 1e-12);
        assert!(
            (concurrence(&r1.state).unwrap() - concurrence(&r2.state).unwrap()).abs() < 1e-12
        );
        assert!((bell_max(&r1.state).unwrap() - bell_max(&r2.state).unwrap()).abs() < 1e-12);
    }
}
