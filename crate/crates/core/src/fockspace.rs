//! Truncated bosonic Fock space over a finite label set.
//!
//! Labels are pairs `(s, mode)` with the mode stored as its canonical
//! representative `n ≥ 0`, so `a_s(n,l)` and `a_s(-n,l)` are the same
//! operator. The basis is every occupation vector of total occupation at
//! most `cutoff`, ordered by total and then lexicographically from the
//! first label down. Operators are dense matrices over that basis.
//!
//! Creators are truncated as `P a† P`, annihilators are exact. Hence
//! `creator(x)` is the conjugate transpose of `annihilator(x)`, products
//! `(a†)^r a^s` agree with the truncation of the untruncated product, and
//! `[a_x, a†_y] = δ_xy` holds on every state below the top level.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Sub};

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{dagger, identity, max_abs, CMatrix, CVector};
use crate::modes::{sqrt_4pi, Mode};

/// Hard ceiling on the basis size of a dense context.
pub const MAX_BASIS: usize = 60_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub s: usize,
    pub mode: Mode,
}

impl Label {
    pub fn new(s: usize, mode: Mode) -> Self {
        Self { s, mode: mode.canonical() }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(s={}, {})", self.s, self.mode)
    }
}

/// Which index pair of `u` enters the creation part of a field coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IndexConvention {
    /// `conj(u_{-i,-j})`, the convention used throughout.
    Reflected,
    /// `conj(u_{-j,-j})`.
    RepeatedColumn,
    /// `conj(u_{-j,-i})`.
    ReflectedTranspose,
}

impl IndexConvention {
    pub const ALL: [IndexConvention; 3] = [
        IndexConvention::Reflected,
        IndexConvention::RepeatedColumn,
        IndexConvention::ReflectedTranspose,
    ];

    fn creation_index(&self, m: &Mode, r: usize, c: usize) -> (usize, usize) {
        match self {
            IndexConvention::Reflected => (m.reflect(r), m.reflect(c)),
            IndexConvention::RepeatedColumn => (m.reflect(c), m.reflect(c)),
            IndexConvention::ReflectedTranspose => (m.reflect(c), m.reflect(r)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            IndexConvention::Reflected => "(-i,-j)",
            IndexConvention::RepeatedColumn => "(-j,-j)",
            IndexConvention::ReflectedTranspose => "(-j,-i)",
        }
    }
}

/// Orbits `𝒪±` and the weights `u_s(m)` of the free-field mode expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitSpec {
    pub plus: BTreeSet<Mode>,
    pub minus: BTreeSet<Mode>,
    u: BTreeMap<(usize, Mode), Array2<C64>>,
}

impl OrbitSpec {
    /// Validates shapes and that every mode of `𝒪⁺` (or its partner) has
    /// at least one `u` matrix.
    pub fn new(
        plus: BTreeSet<Mode>,
        minus: BTreeSet<Mode>,
        u: BTreeMap<(usize, Mode), Array2<C64>>,
    ) -> Result<Self> {
        for ((s, m), a) in &u {
            if *s == 0 {
                return Err(Error::Validation(format!("u index s must start at 1, got 0 at {m}")));
            }
            if a.dim() != (m.dim(), m.dim()) {
                return Err(Error::Shape(format!("u_{s}{m} has shape {:?}", a.dim())));
            }
        }
        for m in &plus {
            let has = u.keys().any(|(_, k)| k == m || *k == m.partner());
            if !has {
                return Err(Error::Validation(format!("no u matrices given for orbit mode {m}")));
            }
        }
        Ok(Self { plus, minus, u })
    }

    /// Elementary matrices `e_ab / √(2l+1)` for each mode, `s = a(2l+1) + b + 1`;
    /// `𝒪⁻` is the set of parity partners.
    pub fn default_for(plus: impl IntoIterator<Item = Mode>) -> Self {
        let plus: BTreeSet<Mode> = plus.into_iter().collect();
        let minus = plus.iter().map(Mode::partner).collect();
        let mut u = BTreeMap::new();
        for m in plus.iter().map(Mode::canonical).collect::<BTreeSet<_>>() {
            let d = m.dim();
            for a in 0..d {
                for b in 0..d {
                    let mut e = Array2::<C64>::zeros((d, d));
                    e[[a, b]] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
                    u.insert((a * d + b + 1, m), e);
                }
            }
        }
        Self { plus, minus, u }
    }

    pub fn u_entries(&self) -> impl Iterator<Item = (&(usize, Mode), &Array2<C64>)> {
        self.u.iter()
    }

    /// `u_s(m)`, falling back to the parity partner's matrix.
    pub fn u(&self, s: usize, m: &Mode) -> Option<&Array2<C64>> {
        self.u.get(&(s, *m)).or_else(|| self.u.get(&(s, m.partner())))
    }

    /// Whether `m` or its partner lies in `𝒪⁺`.
    pub fn carries(&self, m: &Mode) -> bool {
        self.plus.contains(m) || self.plus.contains(&m.partner())
    }

    pub fn all_modes(&self) -> BTreeSet<Mode> {
        self.plus.union(&self.minus).copied().collect()
    }

    /// Labels `(s, canonical mode)` for every `u_s` attached to an orbit mode.
    pub fn labels(&self) -> Vec<Label> {
        let set: BTreeSet<Label> = self
            .u
            .keys()
            .filter(|(_, m)| self.carries(m))
            .map(|(s, m)| Label::new(*s, *m))
            .collect();
        set.into_iter().collect()
    }

    /// Indices `s` attached to mode `m` (or its partner).
    pub fn indices(&self, m: &Mode) -> Vec<usize> {
        let c = m.canonical();
        let set: BTreeSet<usize> = self
            .u
            .keys()
            .filter(|(_, k)| k.canonical() == c)
            .map(|(s, _)| *s)
            .collect();
        set.into_iter().collect()
    }
}

/// Truncated Fock space: labels, occupation cutoff, graded basis.
#[derive(Clone, Debug)]
pub struct FockContext {
    labels: Vec<Label>,
    cutoff: u32,
    basis: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    label_index: HashMap<Label, usize>,
}

impl PartialEq for FockContext {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.cutoff == other.cutoff
    }
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for i in 0..k.min(n - k) {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

fn push_grade(l: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == l {
        prefix.push(total);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first);
        push_grade(l, total - first, prefix, out);
        prefix.pop();
    }
}

impl FockContext {
    pub fn new(labels: Vec<Label>, cutoff: u32) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for x in &labels {
            if !seen.insert(*x) {
                return Err(Error::Validation(format!("duplicate label {x}")));
            }
        }
        let l = labels.len();
        let dim = binomial(l + cutoff as usize, cutoff as usize).unwrap_or(usize::MAX);
        if dim > MAX_BASIS {
            return Err(Error::SizeLimit { n: dim, limit: MAX_BASIS });
        }
        let mut basis = vec![vec![0u32; l]];
        if l > 0 {
            for total in 1..=cutoff {
                push_grade(l, total, &mut Vec::with_capacity(l), &mut basis);
            }
        }
        let index = basis.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let label_index = labels.iter().enumerate().map(|(i, x)| (*x, i)).collect();
        Ok(Self { labels, cutoff, basis, index, label_index })
    }

    pub fn from_orbit(orbit: &OrbitSpec, cutoff: u32) -> Result<Self> {
        Self::new(orbit.labels(), cutoff)
    }

    /// Basis size `C(labels + cutoff, cutoff)` without building the basis.
    pub fn predicted_dim(labels: usize, cutoff: u32) -> Option<usize> {
        binomial(labels + cutoff as usize, cutoff as usize)
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.basis
    }

    pub fn index_of(&self, occ: &[u32]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn label_position(&self, x: &Label) -> Result<usize> {
        self.label_index.get(x).copied().ok_or(Error::UnknownLabel(*x))
    }

    pub fn identity(&self) -> FockOperator {
        FockOperator { matrix: identity(self.dim()) }
    }

    pub fn zero(&self) -> FockOperator {
        FockOperator { matrix: Array2::zeros((self.dim(), self.dim())) }
    }

    pub fn vacuum(&self) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[0] = C64::new(1.0, 0.0);
        v
    }

    pub fn annihilator(&self, x: &Label) -> Result<FockOperator> {
        let p = self.label_position(x)?;
        let mut m = Array2::<C64>::zeros((self.dim(), self.dim()));
        for (col, occ) in self.basis.iter().enumerate() {
            if occ[p] > 0 {
                let mut lower = occ.clone();
                lower[p] -= 1;
                let row = self.index[&lower];
                m[[row, col]] = C64::new((occ[p] as f64).sqrt(), 0.0);
            }
        }
        Ok(FockOperator { matrix: m })
    }

    pub fn creator(&self, x: &Label) -> Result<FockOperator> {
        Ok(self.annihilator(x)?.dagger())
    }

    /// Total occupation of each basis vector.
    pub fn grades(&self) -> Vec<u32> {
        self.basis.iter().map(|v| v.iter().sum()).collect()
    }
}

/// Dense operator on the basis of a [`FockContext`].
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    pub matrix: CMatrix,
}

impl FockOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self { matrix: dagger(&self.matrix) }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { matrix: self.matrix.mapv(|z| z * s) }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        self.matrix.dot(v)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!("operator dims {} and {}", self.dim(), other.dim())));
        }
        Ok(self * other)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!("operator dims {} and {}", self.dim(), other.dim())));
        }
        Ok(self + other)
    }
}

impl Add for &FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &FockOperator) -> FockOperator {
        FockOperator { matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &FockOperator) -> FockOperator {
        FockOperator { matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul for &FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &FockOperator) -> FockOperator {
        FockOperator { matrix: self.matrix.dot(&rhs.matrix) }
    }
}

impl Sub for FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: FockOperator) -> FockOperator {
        &self - &rhs
    }
}

impl Add for FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: FockOperator) -> FockOperator {
        &self + &rhs
    }
}

/// Finitely supported complex function on labels.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KernelVector {
    pub values: BTreeMap<Label, C64>,
}

impl KernelVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn delta(x: Label) -> Self {
        let mut values = BTreeMap::new();
        values.insert(x, C64::new(1.0, 0.0));
        Self { values }
    }

    pub fn from_pairs(items: impl IntoIterator<Item = (Label, C64)>) -> Self {
        let mut k = Self::zero();
        for (x, v) in items {
            k.add(x, v);
        }
        k
    }

    pub fn add(&mut self, x: Label, v: C64) {
        *self.values.entry(x).or_insert(C64::new(0.0, 0.0)) += v;
    }

    pub fn get(&self, x: &Label) -> C64 {
        self.values.get(x).copied().unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(|z| z.norm() == 0.0)
    }

    /// Bilinear `Σ ξ(x) η(x)`.
    pub fn pairing(&self, other: &KernelVector) -> C64 {
        self.values.iter().map(|(x, v)| *v * other.get(x)).sum()
    }

    /// `sqrt(Σ ω^{2k} |ξ(x)|²)` with `ω` the eigenvalue of the label's mode.
    pub fn sobolev_norm(&self, k: f64) -> f64 {
        self.values
            .iter()
            .map(|(x, v)| x.mode.eigenvalue().powf(2.0 * k) * v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { values: self.values.iter().map(|(x, v)| (*x, *v * s)).collect() }
    }
}

/// `(√4π/(2l+1)) Σ_s [u_s(m)_{ij} a_s + conj(u_s(m)_{r(i,j)}) a_s†]` for every
/// entry `(i, j)`, where `r` picks the creation-part index pair. Row-major,
/// `dim × dim` operators. Zero operators when neither `m` nor its partner is
/// in `𝒪⁺`.
pub fn field_coefficient_with(
    orbit: &OrbitSpec,
    ctx: &FockContext,
    m: Mode,
    convention: IndexConvention,
) -> Result<Vec<FockOperator>> {
    let d = m.dim();
    if !orbit.carries(&m) {
        return Ok(vec![ctx.zero(); d * d]);
    }
    let pref = sqrt_4pi() / d as f64;
    let mut ladders = Vec::new();
    for s in orbit.indices(&m) {
        let x = Label::new(s, m);
        let a = ctx.annihilator(&x)?;
        let u = orbit.u(s, &m).expect("index listed by orbit").clone();
        ladders.push((u, a.dagger(), a));
    }
    let mut out = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            let mut acc = Array2::<C64>::zeros((ctx.dim(), ctx.dim()));
            for (u, cr, an) in &ladders {
                let (rr, cc) = convention.creation_index(&m, r, c);
                acc.scaled_add(u[[r, c]], &an.matrix);
                acc.scaled_add(u[[rr, cc]].conj(), &cr.matrix);
            }
            out.push(FockOperator { matrix: acc.mapv(|z| z * pref) });
        }
    }
    Ok(out)
}

pub fn field_coefficient(orbit: &OrbitSpec, ctx: &FockContext, m: Mode) -> Result<Vec<FockOperator>> {
    field_coefficient_with(orbit, ctx, m, IndexConvention::Reflected)
}

/// Largest deviation from `φ̃(-n,l)_{-i,-j} = φ̃(n,l)_{ij}†` over the orbit
/// modes and all index pairs, for the given convention.
pub fn field_reality_defect(orbit: &OrbitSpec, ctx: &FockContext, convention: IndexConvention) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for m in orbit.all_modes() {
        if !orbit.carries(&m) {
            continue;
        }
        let f = field_coefficient_with(orbit, ctx, m, convention)?;
        let g = field_coefficient_with(orbit, ctx, m.partner(), convention)?;
        let d = m.dim();
        for r in 0..d {
            for c in 0..d {
                let lhs = &g[m.reflect(r) * d + m.reflect(c)].matrix;
                let rhs = dagger(&f[r * d + c].matrix);
                worst = worst.max(max_abs(&(lhs - &rhs)));
            }
        }
    }
    Ok(worst)
}

/// Accepts the orbit if the field built with reflected indices is
/// Hermitian in the sense above; otherwise reports which conventions pass.
pub fn check_field_reality(orbit: &OrbitSpec, ctx: &FockContext, tol: f64) -> Result<()> {
    if field_reality_defect(orbit, ctx, IndexConvention::Reflected)? <= tol {
        return Ok(());
    }
    let mut passing = Vec::new();
    for c in IndexConvention::ALL {
        if field_reality_defect(orbit, ctx, c)? <= tol {
            passing.push(c.name());
        }
    }
    let hint = if passing.is_empty() {
        "no tested index convention passes".to_string()
    } else {
        format!("conventions that pass: {}", passing.join(", "))
    };
    Err(Error::Reality(format!("u matrices fail the field Hermiticity test with (-i,-j); {hint}")))
}

/// `Σ κ₀₁(x) a(x) + Σ κ₁₀(x) a(x)†`.
pub fn kernel_operator(ctx: &FockContext, k01: &KernelVector, k10: &KernelVector) -> Result<FockOperator> {
    let (c, a) = kernel_parts(ctx, k01, k10)?;
    Ok(&c + &a)
}

/// Creation part `Σ κ₁₀ a†` and annihilation part `Σ κ₀₁ a` separately.
pub fn kernel_parts(
    ctx: &FockContext,
    k01: &KernelVector,
    k10: &KernelVector,
) -> Result<(FockOperator, FockOperator)> {
    let mut ann = ctx.zero();
    for (x, v) in &k01.values {
        ann.matrix.scaled_add(*v, &ctx.annihilator(x)?.matrix);
    }
    let mut cr = ctx.zero();
    for (x, v) in &k10.values {
        cr.matrix.scaled_add(*v, &ctx.creator(x)?.matrix);
    }
    Ok((cr, ann))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ladder {
    pub label: Label,
    pub creation: bool,
}

impl Ladder {
    pub fn a(label: Label) -> Self {
        Self { label, creation: false }
    }

    pub fn a_dag(label: Label) -> Self {
        Self { label, creation: true }
    }
}

pub type LadderWord = Vec<Ladder>;

/// Plain operator product of a word, left to right.
pub fn word_product(ctx: &FockContext, word: &[Ladder]) -> Result<FockOperator> {
    let mut acc = ctx.identity();
    for f in word {
        let op = if f.creation { ctx.creator(&f.label)? } else { ctx.annihilator(&f.label)? };
        acc = &acc * &op;
    }
    Ok(acc)
}

/// Normal-ordered product: every creator moved left of every annihilator,
/// keeping relative order, with no commutator terms.
pub fn wick_order(ctx: &FockContext, word: &[Ladder]) -> Result<FockOperator> {
    word_product(ctx, &normal_order_word(word))
}

pub fn normal_order_word(word: &[Ladder]) -> LadderWord {
    word.iter()
        .filter(|f| f.creation)
        .chain(word.iter().filter(|f| !f.creation))
        .copied()
        .collect()
}

/// Linear extension of [`wick_order`] to combinations of words.
pub fn wick_order_linear(ctx: &FockContext, terms: &[(C64, LadderWord)]) -> Result<FockOperator> {
    let mut acc = ctx.zero();
    for (c, w) in terms {
        acc.matrix.scaled_add(*c, &wick_order(ctx, w)?.matrix);
    }
    Ok(acc)
}

/// Truncated exponential vector: components `Π ξ_x^{n_x} / √(n_x!)`.
pub fn coherent_vector(ctx: &FockContext, xi: &KernelVector) -> Result<CVector> {
    let mut weights = vec![C64::new(0.0, 0.0); ctx.labels().len()];
    for (x, v) in &xi.values {
        weights[ctx.label_position(x)?] = *v;
    }
    let v = ctx
        .basis()
        .iter()
        .map(|occ| {
            occ.iter().zip(&weights).fold(C64::new(1.0, 0.0), |acc, (n, w)| {
                let fact: f64 = (1..=*n).map(|k| k as f64).product();
                acc * w.powu(*n) / fact.sqrt()
            })
        })
        .collect();
    Ok(v)
}

/// Bilinear pairing `Σ_v Φ_v Ψ_v`, no conjugation.
pub fn bilinear(phi: &CVector, psi: &CVector) -> C64 {
    phi.iter().zip(psi).map(|(a, b)| a * b).sum()
}

pub fn vacuum_expectation(op: &FockOperator) -> C64 {
    op.matrix[[0, 0]]
}

/// `|z|^{N+1}/(N+1)! · e^{|z|}`, bounding the tail of `e^z` after order `N`.
pub fn exp_remainder_bound(z: C64, n: u32) -> f64 {
    let x = z.norm();
    let mut term = 1.0;
    for k in 1..=(n + 1) {
        term *= x / k as f64;
    }
    term * x.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{complex_in_disc, rng};

    fn two_label_ctx(cutoff: u32) -> (FockContext, Label, Label) {
        let x = Label::new(1, Mode::new(0, 0));
        let y = Label::new(1, Mode::new(1, 0));
        (FockContext::new(vec![x, y], cutoff).unwrap(), x, y)
    }

    #[test]
    fn basis_size_and_order() {
        let (ctx, _, _) = two_label_ctx(3);
        assert_eq!(ctx.dim(), 10);
        assert_eq!(ctx.basis()[0], vec![0, 0]);
        assert_eq!(ctx.basis()[1], vec![1, 0]);
        assert_eq!(ctx.basis()[2], vec![0, 1]);
        assert_eq!(ctx.basis()[3], vec![2, 0]);
        assert_eq!(FockContext::predicted_dim(5, 4), Some(126));
        let big = FockContext::new((1..=40).map(|s| Label::new(s, Mode::new(0, 0))).collect(), 6);
        assert!(matches!(big, Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn ladder_on_vacuum() {
        let (ctx, x, _) = two_label_ctx(3);
        let a = ctx.annihilator(&x).unwrap();
        let ad = ctx.creator(&x).unwrap();
        let vac = ctx.vacuum();
        assert!(a.apply(&vac).iter().all(|z| z.norm() == 0.0));
        let back = (&a * &ad).apply(&vac);
        assert_eq!(back, vac);
        assert_eq!(ad, a.dagger());
    }

    #[test]
    fn ccr_below_cutoff() {
        let (ctx, x, y) = two_label_ctx(4);
        let grades = ctx.grades();
        for p in [x, y] {
            for q in [x, y] {
                let c = ctx.annihilator(&p).unwrap().commutator(&ctx.creator(&q).unwrap());
                for v in 0..ctx.dim() {
                    for w in 0..ctx.dim() {
                        if grades[v] < 4 && grades[w] < 4 {
                            let expect = if p == q && v == w { 1.0 } else { 0.0 };
                            assert!((c.matrix[[v, w]] - C64::new(expect, 0.0)).norm() < 1e-14);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn unknown_label() {
        let (ctx, _, _) = two_label_ctx(2);
        let z = Label::new(7, Mode::new(3, 0));
        assert!(matches!(ctx.annihilator(&z), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn field_off_orbit_is_zero() {
        let orbit = OrbitSpec::default_for([Mode::new(1, 0)]);
        let ctx = FockContext::from_orbit(&orbit, 2).unwrap();
        let f = field_coefficient(&orbit, &ctx, Mode::new(2, 1)).unwrap();
        assert_eq!(f.len(), 4);
        assert!(f.iter().all(|o| o.max_abs() == 0.0));
        let g = field_coefficient(&orbit, &ctx, Mode::new(-1, 0)).unwrap();
        assert!(g[0].max_abs() > 0.0);
        assert_eq!(vacuum_expectation(&g[0]), C64::new(0.0, 0.0));
    }

    #[test]
    fn default_u_passes_reality_and_alternatives_fail() {
        let orbit = OrbitSpec::default_for([Mode::new(1, 1), Mode::new(0, 2)]);
        let ctx = FockContext::from_orbit(&orbit, 1).unwrap();
        assert!(field_reality_defect(&orbit, &ctx, IndexConvention::Reflected).unwrap() < 1e-15);
        assert!(field_reality_defect(&orbit, &ctx, IndexConvention::RepeatedColumn).unwrap() > 0.1);
        assert!(field_reality_defect(&orbit, &ctx, IndexConvention::ReflectedTranspose).unwrap() > 0.1);
        check_field_reality(&orbit, &ctx, 1e-12).unwrap();
    }

    #[test]
    fn parity_mismatched_u_is_reported() {
        let m = Mode::new(1, 0);
        let mut u = BTreeMap::new();
        u.insert((1, m), Array2::from_elem((1, 1), C64::new(1.0, 0.0)));
        u.insert((1, m.partner()), Array2::from_elem((1, 1), C64::new(0.0, 1.0)));
        let orbit = OrbitSpec::new([m].into(), [m.partner()].into(), u).unwrap();
        let ctx = FockContext::from_orbit(&orbit, 1).unwrap();
        assert!(matches!(check_field_reality(&orbit, &ctx, 1e-12), Err(Error::Reality(_))));
    }

    #[test]
    fn two_point_function() {
        let m = Mode::new(1, 1);
        let orbit = OrbitSpec::default_for([m]);
        let ctx = FockContext::from_orbit(&orbit, 2).unwrap();
        let f = field_coefficient(&orbit, &ctx, m).unwrap();
        let g = field_coefficient(&orbit, &ctx, m.partner()).unwrap();
        let d = m.dim();
        let pref = sqrt_4pi() / d as f64;
        for (p, q) in [(0, 3), (1, 2), (2, 2)] {
            let (i, j) = (p / d, p % d);
            let (i2, j2) = (q / d, q % d);
            let got = vacuum_expectation(&(&f[p] * &g[q]));
            let mut expect = C64::new(0.0, 0.0);
            for s in orbit.indices(&m) {
                let u1 = orbit.u(s, &m).unwrap();
                let u2 = orbit.u(s, &m.partner()).unwrap();
                expect += u1[[i, j]] * u2[[m.reflect(i2), m.reflect(j2)]].conj();
            }
            expect *= pref * pref;
            assert!((got - expect).norm() < 1e-14, "{p} {q}");
        }
    }

    #[test]
    fn wick_examples() {
        let (ctx, x, _) = two_label_ctx(3);
        let a = ctx.annihilator(&x).unwrap();
        let ad = ctx.creator(&x).unwrap();
        let n = &ad * &a;
        assert_eq!(wick_order(&ctx, &[Ladder::a(x), Ladder::a_dag(x)]).unwrap(), n);
        assert_eq!(wick_order(&ctx, &[Ladder::a_dag(x), Ladder::a(x)]).unwrap(), n);
        assert_eq!(vacuum_expectation(&n), C64::new(0.0, 0.0));
        assert_eq!(vacuum_expectation(&ctx.identity()), C64::new(1.0, 0.0));
    }

    #[test]
    fn coherent_pairing_and_eigenvector() {
        let (ctx, x, y) = two_label_ctx(8);
        let mut r = rng(7);
        for _ in 0..20 {
            let xi = KernelVector::from_pairs([(x, complex_in_disc(&mut r, 1.0)), (y, complex_in_disc(&mut r, 1.0))]);
            let eta = KernelVector::from_pairs([(x, complex_in_disc(&mut r, 1.0)), (y, complex_in_disc(&mut r, 1.0))]);
            let z = xi.pairing(&eta);
            let p = bilinear(&coherent_vector(&ctx, &xi).unwrap(), &coherent_vector(&ctx, &eta).unwrap());
            assert!((p - z.exp()).norm() <= exp_remainder_bound(z, 8) + 1e-14);
            let v = coherent_vector(&ctx, &xi).unwrap();
            let av = ctx.annihilator(&x).unwrap().apply(&v);
            let grades = ctx.grades();
            for (k, g) in grades.iter().enumerate() {
                if *g < 8 {
                    assert!((av[k] - xi.get(&x) * v[k]).norm() < 1e-13);
                }
            }
        }
        let vac = coherent_vector(&ctx, &KernelVector::zero()).unwrap();
        assert_eq!(vac, ctx.vacuum());
    }

    #[test]
    fn kernel_operator_cases() {
        let (ctx, x, _) = two_label_ctx(2);
        let z = kernel_operator(&ctx, &KernelVector::zero(), &KernelVector::zero()).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        let k = kernel_operator(&ctx, &KernelVector::delta(x), &KernelVector::zero()).unwrap();
        assert_eq!(k, ctx.annihilator(&x).unwrap());
    }
}
