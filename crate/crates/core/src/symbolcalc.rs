//! Coherent-state symbols `Symbol[Ξ](ξ, η) = ⟨⟨Ξ ε_ξ, ε_η⟩⟩` and empirical
//! growth bounds for the symbol of the T-exponential.
//!
//! The pairing `⟨⟨·,·⟩⟩` is bilinear in both arguments, so the identity has
//! symbol `e^{⟨ξ,η⟩}` with the bilinear `⟨ξ,η⟩ = Σ ξ(x)η(x)`.

use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;

use crate::chrono::{build_kernels, check_admissible};
use crate::error::{Error, Result};
use crate::fockspace::{bilinear, coherent_vector, FockContext, FockOperator, KernelVector, Label, OrbitSpec};
use crate::modes::{tc_quadratic_form, CoefficientField, PropagatorSpec};
use crate::sampling::{complex_in_disc, substream};

/// Grid on which `q` is searched.
pub fn q_grid() -> Vec<f64> {
    (0..=16).map(|k| k as f64 * 0.5).collect()
}

/// Norm radii used when sampling `(ξ, η)`.
pub const RADII: [f64; 6] = [0.0, 0.1, 0.3, 1.0, 2.0, 3.0];

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolSample {
    pub xi: KernelVector,
    pub eta: KernelVector,
    pub direct: C64,
    pub closed: C64,
    pub err: f64,
}

/// `ε_ηᵀ · op · ε_ξ` on the truncated space.
pub fn direct_symbol(ctx: &FockContext, op: &FockOperator, xi: &KernelVector, eta: &KernelVector) -> Result<C64> {
    let ex = coherent_vector(ctx, xi)?;
    let ee = coherent_vector(ctx, eta)?;
    Ok(bilinear(&ee, &op.apply(&ex)))
}

/// `e^{⟨ξ,η⟩} exp i[⟨κ₀₁,ξ⟩ + ⟨κ₁₀,η⟩ + Q/2]`.
pub fn closed_symbol(
    nu: &CoefficientField,
    dc: &PropagatorSpec,
    orbit: &OrbitSpec,
    xi: &KernelVector,
    eta: &KernelVector,
) -> Result<C64> {
    check_admissible(nu, dc)?;
    let (k01, k10) = build_kernels(nu, orbit);
    let q = tc_quadratic_form(nu, dc)?;
    Ok(closed_symbol_from(&k01, &k10, q, xi, eta))
}

fn closed_symbol_from(k01: &KernelVector, k10: &KernelVector, q: C64, xi: &KernelVector, eta: &KernelVector) -> C64 {
    let i = C64::new(0.0, 1.0);
    (xi.pairing(eta) + i * (k01.pairing(xi) + k10.pairing(eta) + q / 2.0)).exp()
}

/// `Σ_{d > N} x^d / d!` for `x ≥ 0`.
pub fn exp_tail(x: f64, n: u32) -> f64 {
    let mut term = 1.0;
    for d in 1..=(n + 1) {
        term *= x / d as f64;
    }
    let mut sum = 0.0;
    let mut d = n + 1;
    while term > sum * 1e-18 && d < n + 1000 {
        sum += term;
        d += 1;
        term *= x / d as f64;
    }
    sum
}

/// Truncation bound for `|direct_symbol(closed form) - closed_symbol|`:
/// `|e^{iQ/2}| · tail_N(|⟨ξ,η⟩| + |⟨κ₀₁,ξ⟩| + |⟨κ₁₀,η⟩|)`.
pub fn symbol_truncation_bound(
    k01: &KernelVector,
    k10: &KernelVector,
    q: C64,
    xi: &KernelVector,
    eta: &KernelVector,
    cutoff: u32,
) -> f64 {
    let x = xi.pairing(eta).norm() + k01.pairing(xi).norm() + k10.pairing(eta).norm();
    (C64::new(0.0, 0.5) * q).exp().norm() * exp_tail(x, cutoff)
}

/// Random kernel on `labels` with `|ξ|₀ = radius`.
pub fn random_kernel<R: Rng>(rng: &mut R, labels: &[Label], radius: f64) -> KernelVector {
    let raw: Vec<C64> = labels.iter().map(|_| complex_in_disc(rng, 1.0)).collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let s = if norm > 0.0 { radius / norm } else { 0.0 };
    KernelVector::from_pairs(labels.iter().copied().zip(raw.into_iter().map(|z| z * s)))
}

/// Direct and closed symbols of the closed-form exponential at one pair.
pub fn symbol_sample(
    ctx: &FockContext,
    closed_form: &FockOperator,
    nu: &CoefficientField,
    dc: &PropagatorSpec,
    orbit: &OrbitSpec,
    xi: KernelVector,
    eta: KernelVector,
) -> Result<SymbolSample> {
    let direct = direct_symbol(ctx, closed_form, &xi, &eta)?;
    let closed = closed_symbol(nu, dc, orbit, &xi, &eta)?;
    Ok(SymbolSample { err: (direct - closed).norm(), xi, eta, direct, closed })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthFit {
    pub p: f64,
    pub epsilon: f64,
    pub c: f64,
    pub q: f64,
    pub samples: usize,
    /// Index of the sample attaining `C` at the chosen `q`.
    pub binding: usize,
    /// `C(q)` for each grid point.
    pub c_by_q: Vec<(f64, f64)>,
    pub out_of_sample: usize,
    pub out_of_sample_failures: usize,
}

impl GrowthFit {
    pub fn failure_rate(&self) -> f64 {
        if self.out_of_sample == 0 {
            0.0
        } else {
            self.out_of_sample_failures as f64 / self.out_of_sample as f64
        }
    }

    pub fn is_finite(&self) -> bool {
        self.c.is_finite()
    }
}

struct Draw {
    value: f64,
    xi: KernelVector,
    eta: KernelVector,
}

fn draws(
    k01: &KernelVector,
    k10: &KernelVector,
    q: C64,
    labels: &[Label],
    count: usize,
    seed: u64,
    offset: u64,
) -> Vec<Draw> {
    (0..count)
        .into_par_iter()
        .map(|idx| {
            let mut rng = substream(seed, offset + idx as u64);
            let (rx, re) = if idx == 0 && offset == 0 {
                (0.0, 0.0)
            } else {
                (RADII[rng.random_range(0..RADII.len())], RADII[rng.random_range(0..RADII.len())])
            };
            let xi = random_kernel(&mut rng, labels, rx);
            let eta = random_kernel(&mut rng, labels, re);
            let value = closed_symbol_from(k01, k10, q, &xi, &eta).norm();
            Draw { value, xi, eta }
        })
        .collect()
}

fn envelope(d: &Draw, p: f64, q: f64, epsilon: f64) -> f64 {
    (epsilon * (d.xi.sobolev_norm(p + q).powi(2) + d.eta.sobolev_norm(-p).powi(2))).exp()
}

/// Smallest `C(q) = max |Symbol| / exp(ε(|ξ|²_{p+q} + |η|²_{-p}))` over the
/// `q` grid, on `sample_count` pairs drawn from `seed`; ties go to the
/// smaller `q`. The first sample is always `ξ = η = 0`. A fresh batch of the
/// same size is then checked against the fitted `(C, q)`.
pub fn growth_bound_fit(
    nu: &CoefficientField,
    dc: &PropagatorSpec,
    orbit: &OrbitSpec,
    p: f64,
    epsilon: f64,
    sample_count: usize,
    seed: u64,
) -> Result<GrowthFit> {
    if sample_count == 0 {
        return Err(Error::Validation("growth fit needs at least one sample".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Validation(format!("epsilon must be positive, got {epsilon}")));
    }
    check_admissible(nu, dc)?;
    let (k01, k10) = build_kernels(nu, orbit);
    let qf = tc_quadratic_form(nu, dc)?;
    let labels = orbit.labels();
    let fit = draws(&k01, &k10, qf, &labels, sample_count, seed, 0);

    let mut best: Option<(f64, f64, usize)> = None;
    let mut c_by_q = Vec::new();
    for q in q_grid() {
        let (mut cq, mut arg) = (0.0f64, 0usize);
        for (idx, d) in fit.iter().enumerate() {
            let ratio = d.value / envelope(d, p, q, epsilon);
            if ratio > cq {
                cq = ratio;
                arg = idx;
            }
        }
        c_by_q.push((q, cq));
        if best.is_none_or(|(c, _, _)| cq < c) {
            best = Some((cq, q, arg));
        }
    }
    let (c, q, binding) = best.expect("nonempty grid");

    let fresh = draws(&k01, &k10, qf, &labels, sample_count, seed, 1 << 32);
    let failures = fresh
        .iter()
        .filter(|d| d.value > c * envelope(d, p, q, epsilon) * (1.0 + 1e-12))
        .count();
    Ok(GrowthFit {
        p,
        epsilon,
        c,
        q,
        samples: sample_count,
        binding,
        c_by_q,
        out_of_sample: fresh.len(),
        out_of_sample_failures: failures,
    })
}
