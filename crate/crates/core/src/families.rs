//! Constructors for named state families: spin-exchanged states (SPES, the
//! identical-particle generalization of W states), the naive W superposition
//! that can collapse under exchange symmetry, Bell-type two-particle states,
//! and the spatial ⊗ spin factorization test.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{canonical_unit, vectors_close, ModeBasis, SingleParticleState};
use crate::state::{ElementaryKet, ManyParticleState, Statistics};
use std::sync::Arc;

const MATCH_TOL: f64 = 1e-9;

/// Specification of a spin-exchanged state: N spatial profiles (possibly
/// coincident or overlapping) and an N-entry pseudospin pattern that is
/// cyclically shifted across them.
#[derive(Debug, Clone)]
pub struct SpesSpec {
    pub stats: Statistics,
    pub basis: Arc<ModeBasis>,
    /// One spatial coefficient vector (over modes) per particle.
    pub spatial: Vec<Vec<Complex64>>,
    /// One spin-label index per particle.
    pub spins: Vec<usize>,
}

impl SpesSpec {
    /// Spec from mode labels (one separated or repeated mode per particle)
    /// and spin labels.
    pub fn from_labels(
        basis: &Arc<ModeBasis>,
        stats: Statistics,
        modes: &[&str],
        spins: &[&str],
    ) -> Result<Self> {
        if modes.len() != spins.len() || modes.len() < 2 {
            return Err(Error::Invalid("a SPES needs n ≥ 2 matching mode and spin entries".into()));
        }
        let mut spatial = Vec::with_capacity(modes.len());
        for m in modes {
            let mut v = vec![Complex64::ZERO; basis.n_modes()];
            v[basis.mode_index(m)?] = Complex64::ONE;
            spatial.push(v);
        }
        let spins = spins
            .iter()
            .map(|s| basis.spin_index(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(SpesSpec { stats, basis: basis.clone(), spatial, spins })
    }

    fn slot(&self, particle: usize, spin: usize) -> Result<SingleParticleState> {
        let mut ss = vec![Complex64::ZERO; self.basis.n_spins()];
        ss[spin] = Complex64::ONE;
        SingleParticleState::from_parts(&self.basis, &self.spatial[particle], &ss)
    }
}

/// Build the SPES: the sum over the N cyclic shifts of the pseudospin
/// pattern, each term divided by its own norm and weighted by η^s for a shift
/// by s (null terms are dropped — Pauli exclusion), then globally normalized.
///
/// With pattern (↑,↓,…,↓) and separated modes this is the W state
/// generalized to identical particles.
pub fn build_spes(spec: &SpesSpec) -> Result<ManyParticleState> {
    let n = spec.spatial.len();
    if n < 2 || spec.spins.len() != n {
        return Err(Error::Invalid("a SPES needs n ≥ 2 matching mode and spin entries".into()));
    }
    let mut out = ManyParticleState::zero(spec.stats, spec.basis.clone(), n);
    for shift in 0..n {
        let slots: Vec<SingleParticleState> = (0..n)
            .map(|i| spec.slot(i, spec.spins[(i + n - shift) % n]))
            .collect::<Result<_>>()?;
        let term = ManyParticleState::elementary(
            spec.stats,
            spec.basis.clone(),
            ElementaryKet::new(Complex64::ONE, slots)?,
        );
        let n2 = term.norm_sqr();
        if n2 <= 1e-12 {
            continue; // Pauli-excluded term
        }
        let weight = spec.stats.eta_pow(shift) / n2.sqrt();
        out = out.add(&term.scaled(Complex64::new(weight, 0.0)))?;
    }
    out.normalized().map_err(|_| Error::NullState(0.0))
}

/// The naive W superposition: a plain sum of elementary kets with a single ↑
/// walked across the slots, using the first two spin labels as ↑ and ↓. Not
/// per-term normalized; the output may be the null state — that is the point.
pub fn build_naive_w(
    basis: &Arc<ModeBasis>,
    stats: Statistics,
    modes: &[&str],
) -> Result<ManyParticleState> {
    let n = modes.len();
    if n < 2 {
        return Err(Error::Invalid("the W form needs at least 2 particles".into()));
    }
    if basis.n_spins() < 2 {
        return Err(Error::Invalid("the W form needs at least 2 spin labels".into()));
    }
    let up = &basis.spin_labels()[0].clone();
    let down = &basis.spin_labels()[1].clone();
    let mut terms = Vec::with_capacity(n);
    for k in 0..n {
        let slots: Vec<SingleParticleState> = modes
            .iter()
            .enumerate()
            .map(|(i, m)| {
                crate::hilbert::basis_state(basis, m, if i == k { up } else { down })
            })
            .collect::<Result<_>>()?;
        terms.push(ElementaryKet::new(Complex64::ONE, slots)?);
    }
    ManyParticleState::new(stats, basis.clone(), n, terms)
}

/// The Bell-type state (|m₁↑, m₂↓⟩ + sign·|m₁↓, m₂↑⟩)/𝒩 on two modes,
/// with ↑/↓ the first two spin labels.
pub fn bell_phi(
    basis: &Arc<ModeBasis>,
    stats: Statistics,
    m1: &str,
    m2: &str,
    sign: f64,
) -> Result<ManyParticleState> {
    let up = basis.spin_labels()[0].clone();
    let down = basis.spin_labels()[1].clone();
    let t1 = ManyParticleState::from_slots(
        stats,
        vec![
            crate::hilbert::basis_state(basis, m1, &up)?,
            crate::hilbert::basis_state(basis, m2, &down)?,
        ],
    )?;
    let t2 = ManyParticleState::from_slots(
        stats,
        vec![
            crate::hilbert::basis_state(basis, m1, &down)?,
            crate::hilbert::basis_state(basis, m2, &up)?,
        ],
    )?;
    t1.add(&t2.scaled(Complex64::new(sign, 0.0)))?.normalized()
}

/// The Bell-type state (|m₁↑, m₂↑⟩ + sign·|m₁↓, m₂↓⟩)/𝒩.
pub fn bell_psi(
    basis: &Arc<ModeBasis>,
    stats: Statistics,
    m1: &str,
    m2: &str,
    sign: f64,
) -> Result<ManyParticleState> {
    let up = basis.spin_labels()[0].clone();
    let down = basis.spin_labels()[1].clone();
    let t1 = ManyParticleState::from_slots(
        stats,
        vec![
            crate::hilbert::basis_state(basis, m1, &up)?,
            crate::hilbert::basis_state(basis, m2, &up)?,
        ],
    )?;
    let t2 = ManyParticleState::from_slots(
        stats,
        vec![
            crate::hilbert::basis_state(basis, m1, &down)?,
            crate::hilbert::basis_state(basis, m2, &down)?,
        ],
    )?;
    t1.add(&t2.scaled(Complex64::new(sign, 0.0)))?.normalized()
}

/// A two-slot state with a declared exchange symmetry γ: amplitudes against
/// product bras follow ⟨u,v|a,b⟩_γ = ⟨u|a⟩⟨v|b⟩ + γ⟨u|b⟩⟨v|a⟩.
#[derive(Debug, Clone)]
pub struct PairState {
    pub symmetry: f64,
    /// (coefficient, first vector, second vector) triples.
    pub terms: Vec<(Complex64, Vec<Complex64>, Vec<Complex64>)>,
}

impl PairState {
    /// γ-symmetrized amplitude against the product bra (u, v).
    pub fn amplitude(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let inner = |x: &[Complex64], y: &[Complex64]| -> Complex64 {
            x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
        };
        self.terms
            .iter()
            .map(|(c, a, b)| c * (inner(u, a) * inner(v, b) + self.symmetry * inner(u, b) * inner(v, a)))
            .sum()
    }
}

/// A successful spatial ⊗ spin factorization: the full two-particle amplitude
/// against any product bra |u₁s₁, u₂s₂⟩ equals
/// prefactor · spatial.amplitude(u₁,u₂) · spin.amplitude(s₁,s₂).
#[derive(Debug, Clone)]
pub struct Factorization {
    pub prefactor: Complex64,
    pub spatial: PairState,
    pub spin: PairState,
}

struct FactoredTerm {
    coeff: Complex64,
    spatial: [Vec<Complex64>; 2],
    spin: [Vec<Complex64>; 2],
}

fn factor_term(stats: Statistics, t: &ElementaryKet) -> Result<FactoredTerm> {
    let mut spatial = Vec::with_capacity(2);
    let mut spin = Vec::with_capacity(2);
    let mut coeff = t.coeff();
    for s in t.slots() {
        let (sp, ss, scale) = s
            .factor_spatial_spin(1e-10)
            .ok_or_else(|| Error::NotApplicable("slot is not a spatial ⊗ spin product".into()))?;
        coeff *= scale;
        spatial.push(sp);
        spin.push(ss);
    }
    let _ = stats;
    Ok(FactoredTerm {
        coeff,
        spatial: [spatial.remove(0), spatial.remove(0)],
        spin: [spin.remove(0), spin.remove(0)],
    })
}

/// Decide whether a two-particle state matches one of the separable
/// templates and, if its term ratio is ±1, return the spatial and spin
/// factors with their symmetry tags.
///
/// Templates (φ₁ ∦ φ₂ spatial profiles, σ ∦ τ spins):
///   α|φ₁σ, φ₂τ⟩ + β|φ₁τ, φ₂σ⟩ → |φ₁,φ₂⟩_{ηs} ⊗ |σ,τ⟩_s with s = β/α = ±1;
///   α|φ₁σ, φ₂σ⟩ + β|φ₁τ, φ₂τ⟩ → |φ₁,φ₂⟩_η ⊗ (α|σ,σ⟩ + β|τ,τ⟩), β/α = ±1.
///
/// Returns Ok(None) when the template matches but β/α ∉ {±1}; a template
/// mismatch is the distinct `NotApplicable` error.
pub fn factor_spatial_spin(state: &ManyParticleState) -> Result<Option<Factorization>> {
    if state.n_particles() != 2 {
        return Err(Error::NotApplicable("only two-particle states factor this way".into()));
    }
    let compacted = state.compact();
    let stats = state.statistics();
    let eta = stats.eta();
    let terms = compacted.terms();
    if terms.is_empty() || terms.len() > 2 {
        return Err(Error::NotApplicable(format!(
            "expected 1 or 2 independent terms, found {}",
            terms.len()
        )));
    }
    let first = factor_term(stats, &terms[0])?;
    if vectors_close(&first.spatial[0], &first.spatial[1], MATCH_TOL) {
        return Err(Error::NotApplicable("spatial profiles coincide".into()));
    }

    if terms.len() == 1 {
        // template with β = 0: ratio 0 is not ±1
        return Ok(None);
    }
    let second_raw = factor_term(stats, &terms[1])?;
    // align the second term's slot order with the first (slot exchange costs η)
    let second = if vectors_close(&second_raw.spatial[0], &first.spatial[0], MATCH_TOL)
        && vectors_close(&second_raw.spatial[1], &first.spatial[1], MATCH_TOL)
    {
        second_raw
    } else if vectors_close(&second_raw.spatial[0], &first.spatial[1], MATCH_TOL)
        && vectors_close(&second_raw.spatial[1], &first.spatial[0], MATCH_TOL)
    {
        FactoredTerm {
            coeff: second_raw.coeff * eta,
            spatial: [second_raw.spatial[1].clone(), second_raw.spatial[0].clone()],
            spin: [second_raw.spin[1].clone(), second_raw.spin[0].clone()],
        }
    } else {
        return Err(Error::NotApplicable("terms use different spatial pairs".into()));
    };

    let sigma = &first.spin[0];
    let tau = &first.spin[1];
    let ratio = second.coeff / first.coeff;
    let sign = if (ratio - Complex64::ONE).norm() <= MATCH_TOL {
        1.0
    } else if (ratio + Complex64::ONE).norm() <= MATCH_TOL {
        -1.0
    } else {
        f64::NAN
    };

    let spatial_pair = |sym: f64| PairState {
        symmetry: sym,
        terms: vec![(Complex64::ONE, first.spatial[0].clone(), first.spatial[1].clone())],
    };

    // spin-exchanged template: (σ,τ) then (τ,σ)
    if !vectors_close(sigma, tau, MATCH_TOL)
        && vectors_close(&second.spin[0], tau, MATCH_TOL)
        && vectors_close(&second.spin[1], sigma, MATCH_TOL)
    {
        if sign.is_nan() {
            return Ok(None);
        }
        return Ok(Some(Factorization {
            prefactor: first.coeff,
            spatial: spatial_pair(eta * sign),
            spin: PairState {
                symmetry: sign,
                terms: vec![(Complex64::ONE, sigma.clone(), tau.clone())],
            },
        }));
    }

    // same-spin template: (σ,σ) then (τ,τ)
    if vectors_close(sigma, tau, MATCH_TOL) {
        let s2 = &second.spin[0];
        if vectors_close(&second.spin[1], s2, MATCH_TOL) && !vectors_close(s2, sigma, MATCH_TOL) {
            if sign.is_nan() {
                return Ok(None);
            }
            return Ok(Some(Factorization {
                prefactor: first.coeff,
                spatial: spatial_pair(eta),
                spin: PairState {
                    symmetry: 1.0,
                    terms: vec![
                        (Complex64::new(0.5, 0.0), sigma.clone(), sigma.clone()),
                        (Complex64::new(0.5 * sign, 0.0), s2.clone(), s2.clone()),
                    ],
                },
            }));
        }
    }

    Err(Error::NotApplicable("spin pattern matches neither template".into()))
}

/// Helper for tests and scenario tooling: canonical-phase unit spin vector of
/// a basis spin label.
pub fn spin_vector(basis: &ModeBasis, label: &str) -> Result<Vec<Complex64>> {
    let mut v = vec![Complex64::ZERO; basis.n_spins()];
    v[basis.spin_index(label)?] = Complex64::ONE;
    let (unit, _) = canonical_unit(&v).expect("unit basis vector");
    Ok(unit)
}
