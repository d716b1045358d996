//! Harmonic analysis on `G = [R mod 4π] × SU(2)`.
//!
//! SU(2) is parameterized by Euler angles `(α, β, γ)` with `α ∈ [0, 2π)`,
//! `β ∈ [0, π]`, `γ ∈ [0, 4π)`, which covers the group exactly once. The
//! weight-`l` representation is the Wigner matrix
//! `D^l_{m'm}(α,β,γ) = e^{-i m' α} d^l_{m'm}(β) e^{-i m γ}`; rows and
//! columns run over `m = -l, …, l` in increasing order.
//!
//! Haar measure is normalized so that `G` has total mass `4π` (the time
//! circle contributes `4π`, SU(2) has unit mass). The forward transform is
//!
//! ```text
//! f̃(n,l)_{ij} = (1/√4π) ∫_G f(t,w) conj(e^{int/2}) conj(D^l(w)_{ji}) dg
//! ```
//!
//! (row `j`, column `i` of the representation in the kernel) with inverse
//! `f = Σ (2l+1)/√4π · e^{int/2} Tr[f̃(n,l) D^l(w)]`. A constant `c` maps to
//! the single coefficient `f̃(0,0) = c·√4π`, and distinct matrix entries of
//! characters are orthogonal with squared norm `4π/(2l+1)`.
//!
//! For real `f` this kernel gives `conj(f̃(n,l)_{ij}) = (-1)^{i-j} f̃(-n,l)_{-i,-j}`
//! (Condon–Shortley phase); the coefficient-side reality flag of
//! [`CoefficientField`] is a separate convention.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::modes::{dual_pairing, sqrt_4pi, CoefficientField, Mode};
use crate::quadrature::gauss_legendre;
use crate::sampling::complex_in_disc;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupPoint {
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// SU(2) element `[[a, -conj(b)], [b, conj(a)]]`, `|a|² + |b|² = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2 {
    pub a: C64,
    pub b: C64,
}

impl Su2 {
    pub fn compose(&self, other: &Su2) -> Su2 {
        Su2 {
            a: self.a * other.a - self.b.conj() * other.b,
            b: self.b * other.a + self.a.conj() * other.b,
        }
    }
}

fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period { 0.0 } else { r }
}

impl GroupPoint {
    pub fn new(t: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { t, alpha, beta, gamma }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0)
    }

    pub fn random<R: Rng>(rng: &mut R) -> Self {
        Self::new(
            2.0 * TAU * rng.random::<f64>(),
            TAU * rng.random::<f64>(),
            (1.0 - 2.0 * rng.random::<f64>()).acos(),
            2.0 * TAU * rng.random::<f64>(),
        )
    }

    pub fn su2(&self) -> Su2 {
        let (c, s) = ((self.beta / 2.0).cos(), (self.beta / 2.0).sin());
        Su2 {
            a: C64::from_polar(c, -(self.alpha + self.gamma) / 2.0),
            b: C64::from_polar(s, (self.alpha - self.gamma) / 2.0),
        }
    }

    /// Euler angles of an SU(2) element, keeping the time coordinate `t`.
    pub fn from_su2(t: f64, u: Su2) -> Self {
        let beta = 2.0 * u.b.norm().atan2(u.a.norm());
        let (alpha, gamma) = if u.b.norm() < 1e-14 {
            (0.0, -2.0 * u.a.arg())
        } else if u.a.norm() < 1e-14 {
            (0.0, -2.0 * u.b.arg())
        } else {
            let p = -u.a.arg();
            let q = u.b.arg();
            (p + q, p - q)
        };
        // shifting α by 2π must be matched by a 2π shift of γ
        let k = (alpha / TAU).floor();
        let alpha = alpha - k * TAU;
        let gamma = gamma - k * TAU;
        Self::new(wrap(t, 2.0 * TAU), wrap(alpha, TAU), beta, wrap(gamma, 2.0 * TAU))
    }

    pub fn compose(&self, other: &GroupPoint) -> GroupPoint {
        GroupPoint::from_su2(self.t + other.t, self.su2().compose(&other.su2()))
    }
}

fn factorial(n: i32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Small Wigner `d^l_{m'm}(β)` with doubled arguments.
pub fn wigner_small_d(two_l: u32, two_mp: i32, two_m: i32, beta: f64) -> f64 {
    let tl = two_l as i32;
    let (jpmp, jmmp) = ((tl + two_mp) / 2, (tl - two_mp) / 2);
    let (jpm, jmm) = ((tl + two_m) / 2, (tl - two_m) / 2);
    let mp_minus_m = (two_mp - two_m) / 2;
    let pre = (factorial(jpmp) * factorial(jmmp) * factorial(jpm) * factorial(jmm)).sqrt();
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let k_min = 0.max(-mp_minus_m);
    let k_max = jpm.min(jmmp);
    let mut acc = 0.0;
    for k in k_min..=k_max {
        let denom = factorial(jpm - k) * factorial(k) * factorial(jmmp - k) * factorial(k + mp_minus_m);
        let sign = if (k + mp_minus_m) % 2 == 0 { 1.0 } else { -1.0 };
        let cpow = tl - mp_minus_m - 2 * k;
        let spow = 2 * k + mp_minus_m;
        acc += sign / denom * c.powi(cpow) * s.powi(spow);
    }
    pre * acc
}

/// Weight-`l` representation matrix at the SU(2) part of `g`.
pub fn wigner_matrix(two_l: u32, g: &GroupPoint) -> CMatrix {
    let m = Mode::new(0, two_l);
    let d = m.dim();
    Array2::from_shape_fn((d, d), |(r, c)| {
        let (tmp, tm) = (m.two_index(r), m.two_index(c));
        let phase = -(tmp as f64 * g.alpha + tm as f64 * g.gamma) / 2.0;
        C64::from_polar(wigner_small_d(two_l, tmp, tm, g.beta), phase)
    })
}

/// `exp(i n t / 2) · D^l(w)`.
pub fn character(m: Mode, g: &GroupPoint) -> CMatrix {
    let phase = C64::from_polar(1.0, m.n as f64 * g.t / 2.0);
    wigner_matrix(m.two_l, g).mapv(|z| z * phase)
}

/// Band limit `|n| ≤ n_max`, `2l ≤ two_l_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BandLimit {
    pub n_max: i32,
    pub two_l_max: u32,
}

impl BandLimit {
    pub fn contains(&self, m: &Mode) -> bool {
        m.n.abs() <= self.n_max && m.two_l <= self.two_l_max
    }

    pub fn modes(&self) -> Vec<Mode> {
        let mut v = Vec::new();
        for two_l in 0..=self.two_l_max {
            for n in -self.n_max..=self.n_max {
                v.push(Mode::new(n, two_l));
            }
        }
        v
    }
}

/// Tensor-product Haar rule: trapezoid in `t`, `α`, `γ`, Gauss–Legendre in `cos β`.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarGrid {
    pub nt: usize,
    pub nalpha: usize,
    pub nbeta: usize,
    pub ngamma: usize,
    pub band: BandLimit,
    nodes: Vec<GroupPoint>,
    weights: Vec<f64>,
}

impl HaarGrid {
    /// Smallest grid integrating products of two band-limited functions exactly.
    pub fn for_band(band: BandLimit) -> Self {
        let nt = 2 * band.n_max as usize + 1;
        let nalpha = band.two_l_max as usize + 1;
        let nbeta = band.two_l_max as usize / 2 + 2;
        let ngamma = 2 * band.two_l_max as usize + 1;
        Self::new(nt, nalpha, nbeta, ngamma, band)
    }

    pub fn new(nt: usize, nalpha: usize, nbeta: usize, ngamma: usize, band: BandLimit) -> Self {
        let (xs, ws) = gauss_legendre(nbeta);
        let su2_mass = 16.0 * PI * PI;
        let mut nodes = Vec::with_capacity(nt * nalpha * nbeta * ngamma);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for it in 0..nt {
            let t = 2.0 * TAU * it as f64 / nt as f64;
            for ia in 0..nalpha {
                let alpha = TAU * ia as f64 / nalpha as f64;
                for (x, wb) in xs.iter().zip(&ws) {
                    let beta = x.acos();
                    for ig in 0..ngamma {
                        let gamma = 2.0 * TAU * ig as f64 / ngamma as f64;
                        nodes.push(GroupPoint::new(t, alpha, beta, gamma));
                        let w = (2.0 * TAU / nt as f64)
                            * (TAU / nalpha as f64)
                            * wb
                            * (2.0 * TAU / ngamma as f64)
                            / su2_mass;
                        weights.push(w);
                    }
                }
            }
        }
        Self { nt, nalpha, nbeta, ngamma, band, nodes, weights }
    }

    pub fn nodes(&self) -> &[GroupPoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Values of a function at the nodes of a [`HaarGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub grid: HaarGrid,
    pub values: Vec<C64>,
}

impl SampledFunction {
    pub fn new(grid: HaarGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: HaarGrid, f: impl Fn(&GroupPoint) -> C64) -> Self {
        let values = grid.nodes().iter().map(f).collect();
        Self { grid, values }
    }

    pub fn zero(grid: HaarGrid) -> Self {
        let n = grid.len();
        Self { grid, values: vec![C64::new(0.0, 0.0); n] }
    }

    /// Whitespace-separated columns `t alpha beta gamma re im`, one node per
    /// line in grid order; `#` starts a comment.
    pub fn to_columns(&self) -> String {
        let mut s = String::from("# t alpha beta gamma re im\n");
        for (g, v) in self.grid.nodes().iter().zip(&self.values) {
            s.push_str(&format!(
                "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}\n",
                g.t, g.alpha, g.beta, g.gamma, v.re, v.im
            ));
        }
        s
    }

    pub fn from_columns(grid: HaarGrid, text: &str) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        let mut nodes = grid.nodes().iter();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<f64> = line
                .split_whitespace()
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if cols.len() != 6 {
                return Err(Error::Parse(format!("line {}: expected 6 columns, got {}", lineno + 1, cols.len())));
            }
            let node = nodes
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: more samples than grid nodes", lineno + 1)))?;
            let coords = [node.t, node.alpha, node.beta, node.gamma];
            if coords.iter().zip(&cols).any(|(a, b)| (a - b).abs() > 1e-9) {
                return Err(Error::Parse(format!("line {}: node coordinates do not match the grid", lineno + 1)));
            }
            values.push(C64::new(cols[4], cols[5]));
        }
        Self::new(grid, values)
    }
}

/// Projects `f` onto the matrix coefficients of each mode in `band`.
pub fn forward_fourier(f: &SampledFunction, band: &[Mode]) -> Result<CoefficientField> {
    let grid = &f.grid;
    for m in band {
        if !grid.band.contains(m) {
            return Err(Error::BandLimitExceeded {
                mode: *m,
                n_max: grid.band.n_max,
                two_l_max: grid.band.two_l_max,
            });
        }
    }
    let mut entries = BTreeMap::new();
    for m in band {
        let d = m.dim();
        let mut acc = Array2::<C64>::zeros((d, d));
        for ((g, w), v) in grid.nodes().iter().zip(grid.weights()).zip(&f.values) {
            if v.norm() == 0.0 {
                continue;
            }
            let ch = character(*m, g);
            let fw = *v * *w;
            for r in 0..d {
                for c in 0..d {
                    acc[[r, c]] += fw * ch[[c, r]].conj();
                }
            }
        }
        entries.insert(*m, acc.mapv(|z| z / sqrt_4pi()));
    }
    CoefficientField::new(entries)
}

/// Character-series value `Σ (2l+1)/√4π e^{int/2} Tr[f̃(m) D^l(w)]` at `g`.
pub fn resynthesize(coeffs: &CoefficientField, g: &GroupPoint) -> C64 {
    coeffs
        .iter()
        .map(|(m, a)| {
            let tr: C64 = a.dot(&character(*m, g)).diag().sum();
            tr * (m.dim() as f64 / sqrt_4pi())
        })
        .sum()
}

pub fn synthesize(coeffs: &CoefficientField, grid: HaarGrid) -> SampledFunction {
    SampledFunction::from_fn(grid, |g| resynthesize(coeffs, g))
}

/// Position-space L² inner product `∫ f conj(g) dg`.
pub fn l2_inner(f: &SampledFunction, g: &SampledFunction) -> C64 {
    f.grid
        .weights()
        .iter()
        .zip(f.values.iter().zip(&g.values))
        .map(|(w, (a, b))| *a * b.conj() * *w)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlancherelCheck {
    pub lhs: C64,
    pub rhs: C64,
    pub err: f64,
}

/// Compares `∫ f conj(g)` with `Σ (2l+1) Tr[f̃ g̃*]`, i.e. the dual pairing
/// of `f̃` with the per-mode adjoint of `g̃`.
pub fn plancherel_check(f: &SampledFunction, g: &SampledFunction, band: &[Mode]) -> Result<PlancherelCheck> {
    if f.grid != g.grid {
        return Err(Error::Shape("functions sampled on different grids".into()));
    }
    let lhs = l2_inner(f, g);
    let ft = forward_fourier(f, band)?;
    let gt = forward_fourier(g, band)?;
    let rhs = dual_pairing(&gt.adjoint(), &ft);
    Ok(PlancherelCheck { lhs, rhs, err: (lhs - rhs).norm() })
}

/// Random coefficient field over every mode of `band`.
pub fn random_band_limited<R: Rng>(rng: &mut R, band: BandLimit, amplitude: f64) -> CoefficientField {
    let entries = band
        .modes()
        .into_iter()
        .map(|m| (m, Array2::from_shape_fn((m.dim(), m.dim()), |_| complex_in_disc(rng, amplitude))))
        .collect();
    CoefficientField::new(entries).expect("shapes match")
}
