//! Seeded generators for random admissible fixtures.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fockspace::OrbitSpec;
use crate::modes::{CoefficientField, Mode, PropagatorSpec};

pub type FixtureRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FixtureRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Child generator for stream `index` of a master seed.
pub fn substream(seed: u64, index: u64) -> FixtureRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

pub fn complex_in_disc<R: Rng>(rng: &mut R, radius: f64) -> C64 {
    let r = radius * rng.random::<f64>().sqrt();
    let t = rng.random::<f64>() * std::f64::consts::TAU;
    C64::from_polar(r, t)
}

/// Real-flagged field on `modes` and their parity partners, entries of
/// modulus at most `amplitude`.
pub fn random_real_field<R: Rng>(rng: &mut R, modes: &[Mode], amplitude: f64) -> CoefficientField {
    let mut entries: BTreeMap<Mode, Array2<C64>> = BTreeMap::new();
    for m in modes.iter().map(Mode::canonical) {
        let d = m.dim();
        if m.n == 0 {
            let mut a = Array2::<C64>::zeros((d, d));
            for r in 0..d {
                for c in 0..d {
                    let (rr, cc) = (m.reflect(r), m.reflect(c));
                    if (r, c) < (rr, cc) {
                        let z = complex_in_disc(rng, amplitude);
                        a[[r, c]] = z;
                        a[[rr, cc]] = z.conj();
                    } else if (r, c) == (rr, cc) {
                        a[[r, c]] = C64::new(amplitude * (2.0 * rng.random::<f64>() - 1.0), 0.0);
                    }
                }
            }
            entries.insert(m, a);
        } else {
            let a = Array2::from_shape_fn((d, d), |_| complex_in_disc(rng, amplitude));
            let b = Array2::from_shape_fn((d, d), |(r, c)| a[[m.reflect(r), m.reflect(c)]].conj());
            entries.insert(m, a);
            entries.insert(m.partner(), b);
        }
    }
    CoefficientField::new_real(entries, 1e-14).expect("constructed to be real")
}

fn parity_symmetric_values<R: Rng>(rng: &mut R, m: Mode, lo: f64, hi: f64) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..m.dim())
        .map(|_| (llo + (lhi - llo) * rng.random::<f64>()).exp().clamp(lo, hi))
        .collect();
    if m.n == 0 {
        for idx in 0..m.dim() {
            let r = m.reflect(idx);
            if r < idx {
                v[idx] = v[r];
            }
        }
    }
    v
}

/// Propagator with `1/ω⁴ ≤ Δ ≤ ω²` on every mode, log-uniformly drawn.
pub fn random_admissible_propagator<R: Rng>(rng: &mut R, modes: &[Mode]) -> PropagatorSpec {
    propagator_in_band(rng, modes, |w| (w.powi(-4), w * w))
}

/// Propagator respecting only the lower bound `Δ ≥ 1/ω⁴`; values range up
/// to `ω⁴`, so the upper bound is typically broken.
pub fn random_lower_bounded_propagator<R: Rng>(rng: &mut R, modes: &[Mode]) -> PropagatorSpec {
    propagator_in_band(rng, modes, |w| (w.powi(-4), w.powi(4)))
}

fn propagator_in_band<R: Rng>(
    rng: &mut R,
    modes: &[Mode],
    band: impl Fn(f64) -> (f64, f64),
) -> PropagatorSpec {
    let mut diag = BTreeMap::new();
    for m in modes.iter().map(Mode::canonical) {
        let (lo, hi) = band(m.eigenvalue());
        diag.insert(m, parity_symmetric_values(rng, m, lo, hi));
    }
    PropagatorSpec::with_parity_completion(diag).expect("constructed parity-symmetric")
}

/// A few small canonical modes with mixed integer and half-integer weights.
pub fn random_mode_set<R: Rng>(rng: &mut R, count: usize, n_max: i32, two_l_max: u32) -> Vec<Mode> {
    let mut set = std::collections::BTreeSet::new();
    while set.len() < count {
        set.insert(Mode::new(rng.random_range(0..=n_max), rng.random_range(0..=two_l_max)));
    }
    set.into_iter().collect()
}

/// Field, propagator and orbit for randomized checks.
#[derive(Clone, Debug)]
pub struct RandomCase {
    pub nu: CoefficientField,
    pub dc: PropagatorSpec,
    pub orbit: OrbitSpec,
    pub modes: Vec<Mode>,
}

/// Orbit modes small enough that the Fock context stays at a few labels.
pub const SMALL_ORBIT_MODES: [Mode; 4] =
    [Mode { n: 0, two_l: 0 }, Mode { n: 1, two_l: 0 }, Mode { n: 0, two_l: 1 }, Mode { n: 1, two_l: 1 }];

/// An admissible real field on `extra` random modes plus one small orbit
/// mode, with the default u set on that orbit mode.
pub fn random_case<R: Rng>(rng: &mut R, extra: usize, amplitude: f64) -> RandomCase {
    let orbit_mode = SMALL_ORBIT_MODES[rng.random_range(0..SMALL_ORBIT_MODES.len())];
    let mut modes = random_mode_set(rng, extra, 2, 2);
    if !modes.contains(&orbit_mode) {
        modes.push(orbit_mode);
    }
    modes.sort();
    let dc = random_admissible_propagator(rng, &modes);
    let nu = random_real_field(rng, &modes, amplitude);
    RandomCase { nu, dc, orbit: OrbitSpec::default_for([orbit_mode]), modes }
}

/// Two one-label orbit modes `(0,0)`, `(1,0)` and a field touching both.
pub fn random_two_label_case<R: Rng>(rng: &mut R, amplitude: f64) -> RandomCase {
    let modes = vec![Mode::new(0, 0), Mode::new(1, 0)];
    let dc = random_admissible_propagator(rng, &modes);
    let nu = random_real_field(rng, &modes, amplitude);
    RandomCase { nu, dc, orbit: OrbitSpec::default_for(modes.clone()), modes }
}
