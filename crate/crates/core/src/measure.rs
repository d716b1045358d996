//! Finite-dimensional pieces of the Fresnel-type measure.
//!
//! The building block is the regularized two-dimensional integral
//!
//! ```text
//! F(a, λ, μ; ε) = (ia/π) ∫∫ exp(-(ia + ε/2)(x² + y²) + iλx - μy) dx dy
//!               = (ia/A) exp((μ² - λ²)/(4A)),   A = ia + ε/2,
//! ```
//!
//! whose limit `ε → 0` is `exp(i(λ² - μ²)/(4a))`. `a` may carry either
//! sign; `Re A = ε/2 > 0` keeps the integral convergent.
//!
//! A field pairs with one coordinate per unordered index pair
//! `{(n,l,i,j), (-n,l,-i,-j)}`, represented with `n ≥ 0`. Writing
//! `φ(m)_{ji} = x + iy` for the coordinate, its share of `⟨ν, φ⟩` is
//! `λx + iμy` with
//!
//! ```text
//! λ = (ν(m)_{ij} + ν(-n,l)_{-i,-j})(2l+1),  μ = (ν(m)_{ij} - ν(-n,l)_{-i,-j})(2l+1),
//! a = (2l+1) / (√4π Δ(m)_{jj}).
//! ```
//!
//! When `n = 0` and `(i,j) = (-i,-j)` (integer `l`, `i = j = 0`) the
//! coordinate is self-conjugate: `φ` is real there, and the factor is one
//! dimensional with `λ_s = (2l+1)ν(m)_{00}` and `a_s = a/2`, giving
//! `exp(iλ_s²/(2a))`.

use std::collections::BTreeSet;

use num_complex::Complex64 as C64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::chrono::check_admissible;
use crate::error::{Error, Result};
use crate::modes::{sqrt_4pi, AdmissibleSupport, CoefficientField, Mode, PropagatorSpec};
use crate::quadrature::{composite_gl, gauss_legendre, richardson};
use crate::sampling::substream;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FresnelParams {
    pub a: f64,
    pub lambda: C64,
    pub mu: C64,
    pub epsilon: f64,
}

impl FresnelParams {
    pub fn new(a: f64, lambda: C64, mu: C64, epsilon: f64) -> Result<Self> {
        if !(a.is_finite() && a != 0.0) {
            return Err(Error::Validation(format!("Fresnel parameter a must be finite and nonzero, got {a}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Validation(format!("regularization ε must be positive, got {epsilon}")));
        }
        Ok(Self { a, lambda, mu, epsilon })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }

    fn big_a(&self) -> C64 {
        C64::new(self.epsilon / 2.0, self.a)
    }
}

/// Closed form of the regularized integral.
pub fn fresnel_2d_analytic(p: &FresnelParams) -> C64 {
    let a = p.big_a();
    I * p.a / a * ((p.mu * p.mu - p.lambda * p.lambda) / (4.0 * a)).exp()
}

/// `exp(i(λ² - μ²)/(4a))`.
pub fn fresnel_2d_limit(a: f64, lambda: C64, mu: C64) -> C64 {
    (I * (lambda * lambda - mu * mu) / (4.0 * a)).exp()
}

/// Normalized regularized integral `(A/π) ∫∫ e^{-A r² + iλx - μy}`; equals
/// [`fresnel_2d_analytic`] divided by its `λ = μ = 0` value.
pub fn fresnel_2d_normalized(p: &FresnelParams) -> C64 {
    ((p.mu * p.mu - p.lambda * p.lambda) / (4.0 * p.big_a())).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    /// Relative agreement required between successive panel doublings.
    pub tol: f64,
    /// Truncation half-width; chosen from ε when `None`.
    pub half_width: Option<f64>,
    pub max_panels: usize,
    /// Largest acceptable envelope growth `exp(Re(b)²/(2ε))`.
    pub max_growth: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { tol: 1e-11, half_width: None, max_panels: 1 << 21, max_growth: 1e6 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureResult {
    pub value: C64,
    /// Bound on the integrand mass discarded outside the window.
    pub tail: f64,
    pub panels: usize,
}

const GL_ORDER: usize = 20;
const DECAY: f64 = 38.0; // e^{-38} ≈ 3e-17

/// Composite Gauss–Legendre value of `∫ exp(-A x² + b x) dx` over the
/// window where the envelope exceeds `e^{-38}` of its peak, doubling the
/// panel count until two successive values agree.
pub fn gaussian_1d(big_a: C64, b: C64, opts: &QuadratureOptions) -> Result<QuadratureResult> {
    let eps2 = big_a.re;
    if !(eps2 > 0.0) {
        return Err(Error::Validation("Gaussian integral needs Re A > 0".into()));
    }
    let log_growth = b.re * b.re / (4.0 * eps2);
    if log_growth > opts.max_growth.ln() {
        return Err(Error::IllConditioned(format!(
            "envelope peak e^{log_growth:.1} exceeds the allowed growth; the integral cancels too strongly"
        )));
    }
    let center = b.re / (2.0 * eps2);
    let natural = (DECAY / eps2).sqrt();
    let half = opts.half_width.unwrap_or(natural);
    // envelope is exp(log_growth - Re A (x - center)²)
    let edge = log_growth - eps2 * half * half;
    let tail = 2.0 * edge.exp() / (2.0 * eps2 * half);
    let peak = log_growth.exp();
    if tail > opts.tol * peak.max(1.0) {
        return Err(Error::GridTooSmall(format!(
            "window half-width {half:.3} leaves tail mass {tail:.3e} above tolerance {:.1e}",
            opts.tol
        )));
    }
    let (lo, hi) = (center - half, center + half);
    let freq = 2.0 * big_a.im.abs() * (center.abs() + half) + b.im.abs();
    let mut panels = ((half * freq / 4.0).ceil() as usize).max(4);
    let rule = gauss_legendre(GL_ORDER);
    let f = |x: f64| (-big_a * x * x + b * x).exp();
    let mut prev = composite_gl(f, lo, hi, panels, &rule);
    loop {
        panels *= 2;
        if panels > opts.max_panels {
            return Err(Error::GridTooSmall(format!(
                "panel count exceeded {} before successive values agreed",
                opts.max_panels
            )));
        }
        let next = composite_gl(f, lo, hi, panels, &rule);
        if (next - prev).norm() <= opts.tol * next.norm().max(1.0) {
            return Ok(QuadratureResult { value: next, tail, panels });
        }
        prev = next;
    }
}

/// Separable quadrature of the regularized two-dimensional integral.
pub fn fresnel_2d_quadrature(p: &FresnelParams, opts: &QuadratureOptions) -> Result<QuadratureResult> {
    let a = p.big_a();
    let qx = gaussian_1d(a, I * p.lambda, opts)?;
    let qy = gaussian_1d(a, -p.mu, opts)?;
    let scale = I * p.a / std::f64::consts::PI;
    Ok(QuadratureResult {
        value: scale * qx.value * qy.value,
        tail: (scale.norm() * (qx.tail * qy.value.norm() + qy.tail * qx.value.norm() + qx.tail * qy.tail)),
        panels: qx.panels.max(qy.panels),
    })
}

/// Regularization levels `base, base/ratio, …` for extrapolation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonSchedule {
    pub base: f64,
    pub levels: usize,
    pub ratio: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self { base: 0.1, levels: 5, ratio: 2.0 }
    }
}

impl EpsilonSchedule {
    pub fn with_levels(levels: usize) -> Self {
        Self { levels, ..Self::default() }
    }

    /// Base shrunk to `base · min(1, |a|)`, keeping `ε/2|a|` small when the
    /// smallest measure parameter is below one.
    pub fn scaled_for(&self, a_min: f64) -> Self {
        Self { base: self.base * a_min.abs().min(1.0), ..*self }
    }

    pub fn epsilons(&self) -> Vec<f64> {
        (0..self.levels).map(|k| self.base / self.ratio.powi(k as i32)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Extrapolation {
    pub value: C64,
    pub samples: Vec<(f64, C64)>,
    /// Size of the last Richardson correction.
    pub last_delta: f64,
}

/// Richardson extrapolation to `ε = 0` of `f(ε)` over the schedule.
pub fn extrapolate<F>(schedule: &EpsilonSchedule, f: F) -> Result<Extrapolation>
where
    F: Fn(f64) -> Result<C64> + Sync,
{
    if schedule.levels == 0 {
        return Err(Error::Validation("extrapolation needs at least one level".into()));
    }
    let eps = schedule.epsilons();
    let values: Vec<C64> = eps.par_iter().map(|e| f(*e)).collect::<Result<_>>()?;
    let (value, last_delta) = richardson(&values, schedule.ratio);
    Ok(Extrapolation { value, samples: eps.into_iter().zip(values).collect(), last_delta })
}

/// Quadrature values over the schedule, extrapolated to `ε = 0`.
pub fn fresnel_limit_extrapolated(
    a: f64,
    lambda: C64,
    mu: C64,
    schedule: &EpsilonSchedule,
    opts: &QuadratureOptions,
) -> Result<Extrapolation> {
    let base = FresnelParams::new(a, lambda, mu, schedule.base)?;
    extrapolate(schedule, |e| Ok(fresnel_2d_quadrature(&base.with_epsilon(e), opts)?.value))
}

/// Measure parameter of the coordinate `φ(m)_{ji}`, indices as dense offsets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeMeasure {
    pub mode: Mode,
    pub j: usize,
    pub i: usize,
    pub a: f64,
}

/// `a = (2l+1)/(√4π Δ(m)_{jj})`; zero propagator values are rejected.
pub fn mode_measure(dc: &PropagatorSpec, mode: Mode, j: usize, i: usize) -> Result<ModeMeasure> {
    if j >= mode.dim() || i >= mode.dim() {
        return Err(Error::Shape(format!("index ({j}, {i}) out of range for {mode}")));
    }
    let d = dc.require(&mode)?[j];
    if d == 0.0 || !d.is_finite() {
        return Err(Error::NonpositivePropagator { mode, two_j: mode.two_index(j) });
    }
    Ok(ModeMeasure { mode, j, i, a: mode.dim() as f64 / (sqrt_4pi() * d) })
}

/// `(λ, μ)` of the coordinate dual to `ν(m)_{ij}`.
pub fn lambda_mu(nu: &CoefficientField, m: Mode, i: usize, j: usize) -> (C64, C64) {
    let v = nu.entry(m, i, j);
    let w = nu.entry(m.partner(), m.reflect(i), m.reflect(j));
    let d = m.dim() as f64;
    ((v + w) * d, (v - w) * d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coordinate {
    pub mode: Mode,
    pub j: usize,
    pub i: usize,
    pub a: f64,
    pub self_conjugate: bool,
}

impl Coordinate {
    /// Number of real variables: 1 for a self-conjugate coordinate, else 2.
    pub fn width(&self) -> usize {
        if self.self_conjugate { 1 } else { 2 }
    }

    /// Parameter of the Gaussian factor: `a`, or `a/2` when one dimensional.
    pub fn effective_a(&self) -> f64 {
        if self.self_conjugate { self.a / 2.0 } else { self.a }
    }
}

fn is_representative(m: &Mode, j: usize, i: usize) -> bool {
    m.n > 0 || (j, i) <= (m.reflect(j), m.reflect(i))
}

/// Coordinates `(mode, j, i)` with `n ≥ 0` and their measure parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteProjection {
    pub coords: Vec<Coordinate>,
}

impl FiniteProjection {
    /// Validates that each `(mode, j, i)` is canonical and distinct.
    pub fn new(dc: &PropagatorSpec, coords: &[(Mode, usize, usize)]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(coords.len());
        for &(m, j, i) in coords {
            if m.n < 0 {
                return Err(Error::Validation(format!("coordinate mode {m} must have n ≥ 0")));
            }
            if !is_representative(&m, j, i) {
                return Err(Error::Validation(format!(
                    "coordinate ({m}, {j}, {i}) duplicates its reflected partner; use the reflected indices"
                )));
            }
            if !seen.insert((m, j, i)) {
                return Err(Error::Validation(format!("duplicate coordinate ({m}, {j}, {i})")));
            }
            let mm = mode_measure(dc, m, j, i)?;
            let self_conjugate = m.n == 0 && j == m.reflect(j) && i == m.reflect(i);
            out.push(Coordinate { mode: m, j, i, a: mm.a, self_conjugate });
        }
        Ok(Self { coords: out })
    }

    /// Every canonical coordinate of the given modes.
    pub fn from_modes(dc: &PropagatorSpec, modes: impl IntoIterator<Item = Mode>) -> Result<Self> {
        let canon: BTreeSet<Mode> = modes.into_iter().map(|m| m.canonical()).collect();
        let mut coords = Vec::new();
        for m in canon {
            for j in 0..m.dim() {
                for i in 0..m.dim() {
                    if is_representative(&m, j, i) {
                        coords.push((m, j, i));
                    }
                }
            }
        }
        Self::new(dc, &coords)
    }

    pub fn k(&self) -> usize {
        self.coords.len()
    }

    /// Length of a point: sum of coordinate widths.
    pub fn point_len(&self) -> usize {
        self.coords.iter().map(Coordinate::width).sum()
    }

    /// `(λ, μ)` per coordinate from a field; `μ` is zero on self-conjugate
    /// coordinates and `λ` there is `(2l+1) ν(m)_{00}`.
    pub fn field_parameters(&self, nu: &CoefficientField) -> Vec<(C64, C64)> {
        self.coords
            .iter()
            .map(|c| {
                if c.self_conjugate {
                    (nu.entry(c.mode, c.i, c.j) * c.mode.dim() as f64, C64::new(0.0, 0.0))
                } else {
                    lambda_mu(nu, c.mode, c.i, c.j)
                }
            })
            .collect()
    }
}

/// `(x, y)` of each coordinate for a field, `φ(m)_{ji} = x + iy`.
pub fn coordinate_values(phi: &CoefficientField, c: &Coordinate) -> (f64, f64) {
    let z = phi.entry(c.mode, c.j, c.i);
    (z.re, z.im)
}

/// Product of limit factors over the canonical coordinates of `ν`.
pub fn product_characteristic(nu: &CoefficientField, dc: &PropagatorSpec, support: &AdmissibleSupport) -> Result<C64> {
    check_admissible(nu, dc)?;
    support.check_field(nu)?;
    let proj = FiniteProjection::from_modes(dc, nu.support())?;
    let mut acc = C64::new(1.0, 0.0);
    for (c, (lam, mu)) in proj.coords.iter().zip(proj.field_parameters(nu)) {
        acc *= if c.self_conjugate {
            (I * lam * lam / (2.0 * c.a)).exp()
        } else {
            fresnel_2d_limit(c.a, lam, mu)
        };
    }
    Ok(acc)
}

/// Density `Π (ic/2π) exp(-(ic/2)(x² + y²))`, `c = 2a = (2l+1)/(√π Δ)`,
/// with one-dimensional factors `√(i a_s/π) exp(-i a_s x²)` on
/// self-conjugate coordinates.
pub fn projection_density(proj: &FiniteProjection, point: &[f64]) -> Result<C64> {
    if point.len() != proj.point_len() {
        return Err(Error::Shape(format!("point has {} entries, projection needs {}", point.len(), proj.point_len())));
    }
    let mut acc = C64::new(1.0, 0.0);
    let mut pos = 0;
    for c in &proj.coords {
        let a = c.effective_a();
        if c.self_conjugate {
            let x = point[pos];
            acc *= (I * a / std::f64::consts::PI).sqrt() * (-I * a * x * x).exp();
        } else {
            let (x, y) = (point[pos], point[pos + 1]);
            acc *= I * a / std::f64::consts::PI * (-I * a * (x * x + y * y)).exp();
        }
        pos += c.width();
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicCheck {
    pub lhs: C64,
    pub rhs: C64,
    pub err: f64,
    pub extrapolation: Extrapolation,
}

/// Fourier transform of the projection density at `(u, w)`: quadrature at
/// each ε level, Richardson to `ε = 0`, compared against
/// `exp((i/2)⟨χ, T_c χ*⟩)` for the field `χ` with
/// `χ(m)_{ij} = (u - iw)/(2(2l+1))`, `χ(-n,l)_{-i,-j} = (u + iw)/(2(2l+1))`
/// on each coordinate (`χ(m)_{00} = u/(2l+1)` when self-conjugate).
/// `w` entries of self-conjugate coordinates are ignored.
pub fn projection_characteristic_check(
    proj: &FiniteProjection,
    dc: &PropagatorSpec,
    u: &[f64],
    w: &[f64],
    schedule: &EpsilonSchedule,
    opts: &QuadratureOptions,
) -> Result<CharacteristicCheck> {
    if u.len() != proj.k() || w.len() != proj.k() {
        return Err(Error::Shape(format!("u, w need {} entries", proj.k())));
    }
    let extrapolation = extrapolate(schedule, |eps| {
        let mut acc = C64::new(1.0, 0.0);
        for (c, (uu, ww)) in proj.coords.iter().zip(u.iter().zip(w)) {
            let a = c.effective_a();
            let big_a = C64::new(eps / 2.0, a);
            if c.self_conjugate {
                let q = gaussian_1d(big_a, I * uu, opts)?;
                acc *= (I * a / std::f64::consts::PI).sqrt() * q.value;
            } else {
                let p = FresnelParams::new(a, C64::new(*uu, 0.0), C64::new(0.0, -ww), eps)?;
                acc *= fresnel_2d_quadrature(&p, opts)?.value;
            }
        }
        Ok(acc)
    })?;

    let mut q = 0.0;
    for (c, (uu, ww)) in proj.coords.iter().zip(u.iter().zip(w)) {
        let d = c.mode.dim() as f64;
        let t = sqrt_4pi() * dc.require(&c.mode)?[c.j];
        q += if c.self_conjugate {
            d * t * (uu / d).powi(2)
        } else {
            // both entries of the pair contribute (2l+1) T |χ|²
            2.0 * d * t * (uu * uu + ww * ww) / (4.0 * d * d)
        };
    }
    let rhs = (I * q / 2.0).exp();
    let lhs = extrapolation.value;
    Ok(CharacteristicCheck { lhs, rhs, err: (lhs - rhs).norm(), extrapolation })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarlo {
    pub estimate: C64,
    pub stderr: f64,
    /// Regularized analytic value the estimator targets.
    pub target: C64,
}

const MC_CHUNK: usize = 1 << 14;

/// Importance-sampled estimate of `∫ e^{i⟨ν,φ⟩} dP_ε` for the normalized
/// regularized density: draws `x, y ~ N(0, 1/ε)` and reweights each 2D
/// factor by `(2A/ε) e^{-ia r²}` (1D: `√(2A_s/ε) e^{-i a_s x²}`).
/// Chunks use independent substreams of `seed` and are reduced in order,
/// so a fixed seed gives a bit-identical estimate.
pub fn mc_characteristic(
    proj: &FiniteProjection,
    nu_coords: &[(C64, C64)],
    samples: usize,
    epsilon: f64,
    seed: u64,
) -> Result<MonteCarlo> {
    if nu_coords.len() != proj.k() {
        return Err(Error::Shape(format!("{} coordinate parameters for {} coordinates", nu_coords.len(), proj.k())));
    }
    if !(epsilon > 0.0) || samples == 0 {
        return Err(Error::Validation("Monte Carlo needs ε > 0 and at least one sample".into()));
    }
    let sigma = 1.0 / epsilon.sqrt();
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<(C64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = substream(seed, ci as u64);
            let n = MC_CHUNK.min(samples - ci * MC_CHUNK);
            let (mut sum, mut sq_re, mut sq_im) = (C64::new(0.0, 0.0), 0.0, 0.0);
            for _ in 0..n {
                let mut val = C64::new(1.0, 0.0);
                for (c, (lam, mu)) in proj.coords.iter().zip(nu_coords) {
                    let a = c.effective_a();
                    let big_a = C64::new(epsilon / 2.0, a);
                    let x: f64 = sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
                    if c.self_conjugate {
                        val *= (2.0 * big_a / epsilon).sqrt() * (-I * a * x * x + I * lam * x).exp();
                    } else {
                        let y: f64 = sigma * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
                        val *= 2.0 * big_a / epsilon * (-I * a * (x * x + y * y) + I * lam * x - mu * y).exp();
                    }
                }
                sum += val;
                sq_re += val.re * val.re;
                sq_im += val.im * val.im;
            }
            (sum, sq_re, sq_im)
        })
        .collect();
    let (mut sum, mut sq_re, mut sq_im) = (C64::new(0.0, 0.0), 0.0, 0.0);
    for (s, r, i) in partial {
        sum += s;
        sq_re += r;
        sq_im += i;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sq_re / n - mean.re * mean.re) + (sq_im / n - mean.im * mean.im);
    let stderr = (var.max(0.0) / n).sqrt();
    let mut target = C64::new(1.0, 0.0);
    for (c, (lam, mu)) in proj.coords.iter().zip(nu_coords) {
        let big_a = C64::new(epsilon / 2.0, c.effective_a());
        target *= if c.self_conjugate {
            (-lam * lam / (4.0 * big_a)).exp()
        } else {
            ((mu * mu - lam * lam) / (4.0 * big_a)).exp()
        };
    }
    Ok(MonteCarlo { estimate: mean, stderr, target })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_admissible_propagator, random_real_field, rng};
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn analytic_limit() {
        let p = FresnelParams::new(1.3, c(0.7, 0.0), c(0.0, 0.4), 1e-9).unwrap();
        let lim = fresnel_2d_limit(p.a, p.lambda, p.mu);
        assert!((fresnel_2d_analytic(&p) - lim).norm() < 1e-8);
        let q = FresnelParams::new(1.3, c(0.5, 0.0), c(0.5, 0.0), 1e-12).unwrap();
        assert!((fresnel_2d_analytic(&q) - c(1.0, 0.0)).norm() < 1e-10);
        assert!(FresnelParams::new(0.0, c(0.0, 0.0), c(0.0, 0.0), 0.1).is_err());
        assert!(FresnelParams::new(1.0, c(0.0, 0.0), c(0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn quadrature_pure_gaussian() {
        for eps in [0.05, 0.5, 1.0] {
            let p = FresnelParams::new(1.0, c(0.0, 0.0), c(0.0, 0.0), eps).unwrap();
            let q = fresnel_2d_quadrature(&p, &QuadratureOptions::default()).unwrap();
            assert!((q.value - fresnel_2d_analytic(&p)).norm() < 1e-10, "{eps}");
        }
    }

    #[test]
    fn quadrature_random_params() {
        let mut r = rng(21);
        for _ in 0..10 {
            let a = r.random_range(0.5..2.0) * if r.random::<bool>() { 1.0 } else { -1.0 };
            let p = FresnelParams::new(
                a,
                c(r.random_range(-2.0..2.0), 0.0),
                c(0.0, r.random_range(-2.0..2.0)),
                r.random_range(0.01..1.0),
            )
            .unwrap();
            let q = fresnel_2d_quadrature(&p, &QuadratureOptions::default()).unwrap();
            assert!((q.value - fresnel_2d_analytic(&p)).norm() < 1e-8, "{p:?}");
        }
    }

    #[test]
    fn narrow_window_is_rejected() {
        let opts = QuadratureOptions { half_width: Some(1.0), ..Default::default() };
        let p = FresnelParams::new(1.0, c(0.0, 0.0), c(0.0, 0.0), 0.1).unwrap();
        assert!(matches!(fresnel_2d_quadrature(&p, &opts), Err(Error::GridTooSmall(_))));
        let bad = FresnelParams::new(1.0, c(0.0, 5.0), c(0.0, 0.0), 0.01).unwrap();
        assert!(matches!(fresnel_2d_quadrature(&bad, &QuadratureOptions::default()), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn mode_measure_unit_case() {
        let m = Mode::new(0, 0);
        let dc = PropagatorSpec::new([(m, vec![1.0 / sqrt_4pi()])].into()).unwrap();
        let mm = mode_measure(&dc, m, 0, 0).unwrap();
        assert!((mm.a - 1.0).abs() < 1e-15);
        let z = PropagatorSpec::new([(m, vec![0.0])].into()).unwrap();
        assert!(matches!(mode_measure(&z, m, 0, 0), Err(Error::NonpositivePropagator { .. })));
    }

    #[test]
    fn lambda_mu_identity_and_reality() {
        let mut r = rng(22);
        let m = Mode::new(2, 1);
        let nu = random_real_field(&mut r, &[m], 1.0);
        for i in 0..2 {
            for j in 0..2 {
                let (lam, mu) = lambda_mu(&nu, m, i, j);
                assert!(lam.im.abs() < 1e-15 && mu.re.abs() < 1e-15);
                let v = nu.entry(m, i, j) * nu.entry(m.partner(), m.reflect(i), m.reflect(j));
                assert!((lam * lam - mu * mu - 4.0 * 4.0 * v).norm() < 1e-14);
            }
        }
        let (l0, m0) = lambda_mu(&CoefficientField::zero(), m, 0, 0);
        assert_eq!((l0, m0), (c(0.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn coordinates_cover_each_pair_once() {
        let modes = [Mode::new(0, 2), Mode::new(1, 1), Mode::new(0, 1)];
        let dc = PropagatorSpec::with_parity_completion(modes.iter().map(|m| (*m, vec![0.5; m.dim()])).collect()).unwrap();
        let proj = FiniteProjection::from_modes(&dc, modes).unwrap();
        // (0,1): 9 entries -> 4 pairs + 1 self-conjugate; (1,1/2): 4; (0,1/2): 2
        assert_eq!(proj.k(), 5 + 4 + 2);
        assert_eq!(proj.coords.iter().filter(|c| c.self_conjugate).count(), 1);
    }

    #[test]
    fn x2_plus_y2_reconstruction() {
        let mut r = rng(23);
        let m = Mode::new(1, 2);
        let phi = random_real_field(&mut r, &[m], 1.0);
        let dc = PropagatorSpec::with_parity_completion([(m, vec![0.3; 3])].into()).unwrap();
        let proj = FiniteProjection::from_modes(&dc, [m]).unwrap();
        for co in &proj.coords {
            let (x, y) = coordinate_values(&phi, co);
            let prod = phi.entry(m, co.j, co.i) * phi.entry(m.partner(), m.reflect(co.j), m.reflect(co.i));
            assert!((prod - c(x * x + y * y, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn density_basics() {
        let m = Mode::new(1, 0);
        let dc = PropagatorSpec::with_parity_completion([(m, vec![0.2])].into()).unwrap();
        let empty = FiniteProjection { coords: vec![] };
        assert_eq!(projection_density(&empty, &[]).unwrap(), c(1.0, 0.0));
        let proj = FiniteProjection::from_modes(&dc, [m]).unwrap();
        let a = proj.coords[0].a;
        let origin = projection_density(&proj, &[0.0, 0.0]).unwrap();
        assert!((origin - c(0.0, a / std::f64::consts::PI)).norm() < 1e-15);
        let p = projection_density(&proj, &[0.3, -1.1]).unwrap();
        let q = projection_density(&proj, &[-0.3, 1.1]).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn product_matches_quadratic_form() {
        let mut r = rng(24);
        let modes = [Mode::new(0, 0), Mode::new(1, 1), Mode::new(0, 2)];
        let nu = random_real_field(&mut r, &modes, 0.5);
        let dc = random_admissible_propagator(&mut r, &modes);
        let support = AdmissibleSupport::from_rule(dc.domain(), &BTreeSet::new(), &dc, 10.0, 1.0).unwrap();
        let pc = product_characteristic(&nu, &dc, &support).unwrap();
        let vc = crate::chrono::vacuum_characteristic(&nu, &dc).unwrap();
        assert!((pc - vc).norm() < 1e-12);
    }

    #[test]
    fn mc_zero_field_and_determinism() {
        let m = Mode::new(1, 0);
        let dc = PropagatorSpec::with_parity_completion([(m, vec![0.3])].into()).unwrap();
        let proj = FiniteProjection::from_modes(&dc, [m]).unwrap();
        let zero = vec![(c(0.0, 0.0), c(0.0, 0.0))];
        let a = mc_characteristic(&proj, &zero, 20_000, 0.5, 5).unwrap();
        let b = mc_characteristic(&proj, &zero, 20_000, 0.5, 5).unwrap();
        assert_eq!(a, b);
        assert!((a.estimate - c(1.0, 0.0)).norm() < 4.0 * a.stderr + 1e-12);
    }
}
