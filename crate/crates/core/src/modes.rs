//! Characters of `[R mod 4π] × SU(2)`, coefficient fields over them, and the
//! causal quadratic form built from a diagonal propagator.
//!
//! Half-integer weights are carried as `two_l = 2l`, and matrix indices
//! `i ∈ {-l, …, l}` as `two_i = 2i`. Dense storage uses the offset
//! `idx = (two_i + two_l) / 2`, so index reflection `i → -i` is
//! `idx → dim - 1 - idx`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for the inequality checks.
pub const DEFAULT_TOL: f64 = 1e-12;

pub fn sqrt_4pi() -> f64 {
    (4.0 * PI).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mode {
    pub n: i32,
    pub two_l: u32,
}

impl Mode {
    pub const fn new(n: i32, two_l: u32) -> Self {
        Self { n, two_l }
    }

    pub fn l(&self) -> f64 {
        self.two_l as f64 / 2.0
    }

    /// Matrix dimension `2l + 1`.
    pub fn dim(&self) -> usize {
        self.two_l as usize + 1
    }

    /// Eigenvalue `n² + 1 + l(l+1)` of the standard operator.
    pub fn eigenvalue(&self) -> f64 {
        let l = self.l();
        (self.n as f64).powi(2) + 1.0 + l * (l + 1.0)
    }

    /// The parity partner `(-n, l)`.
    pub fn partner(&self) -> Mode {
        Mode::new(-self.n, self.two_l)
    }

    /// Representative with `n >= 0`.
    pub fn canonical(&self) -> Mode {
        Mode::new(self.n.abs(), self.two_l)
    }

    /// Dense offset of the doubled index `two_i`; `None` if out of range or
    /// of the wrong parity.
    pub fn index_of(&self, two_i: i32) -> Option<usize> {
        let tl = self.two_l as i32;
        if two_i < -tl || two_i > tl || (two_i + tl) % 2 != 0 {
            return None;
        }
        Some(((two_i + tl) / 2) as usize)
    }

    pub fn two_index(&self, idx: usize) -> i32 {
        2 * idx as i32 - self.two_l as i32
    }

    pub fn reflect(&self, idx: usize) -> usize {
        self.dim() - 1 - idx
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.two_l % 2 == 0 {
            write!(f, "(n={}, l={})", self.n, self.two_l / 2)
        } else {
            write!(f, "(n={}, l={}/2)", self.n, self.two_l)
        }
    }
}

pub fn eigenvalue(m: Mode) -> f64 {
    m.eigenvalue()
}

/// Finitely supported map from modes to `(2l+1)×(2l+1)` complex matrices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoefficientField {
    entries: BTreeMap<Mode, Array2<C64>>,
    real: bool,
}

impl CoefficientField {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(entries: BTreeMap<Mode, Array2<C64>>) -> Result<Self> {
        for (m, mat) in &entries {
            if mat.dim() != (m.dim(), m.dim()) {
                return Err(Error::Shape(format!(
                    "matrix at {m} has shape {:?}, expected {}x{}",
                    mat.dim(),
                    m.dim(),
                    m.dim()
                )));
            }
        }
        Ok(Self { entries, real: false })
    }

    /// Builds a field and flags it `real` after checking
    /// `conj(f(n,l)_{ij}) = f(-n,l)_{-i,-j}` to within `tol`.
    pub fn new_real(entries: BTreeMap<Mode, Array2<C64>>, tol: f64) -> Result<Self> {
        let mut f = Self::new(entries)?;
        f.check_reality(tol)?;
        f.real = true;
        Ok(f)
    }

    /// Builds from sparse `(mode, 2i, 2j, value)` entries. Repeated entries
    /// are summed.
    pub fn from_sparse<I>(items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Mode, i32, i32, C64)>,
    {
        let mut entries: BTreeMap<Mode, Array2<C64>> = BTreeMap::new();
        for (m, two_i, two_j, v) in items {
            let (r, c) = match (m.index_of(two_i), m.index_of(two_j)) {
                (Some(r), Some(c)) => (r, c),
                _ => {
                    return Err(Error::Shape(format!(
                        "index (2i={two_i}, 2j={two_j}) out of range for {m}"
                    )))
                }
            };
            entries
                .entry(m)
                .or_insert_with(|| Array2::zeros((m.dim(), m.dim())))[[r, c]] += v;
        }
        Self::new(entries)
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn mark_real(mut self, tol: f64) -> Result<Self> {
        self.check_reality(tol)?;
        self.real = true;
        Ok(self)
    }

    pub fn check_reality(&self, tol: f64) -> Result<()> {
        let modes: BTreeSet<Mode> = self
            .entries
            .keys()
            .flat_map(|m| [*m, m.partner()])
            .collect();
        for m in modes {
            let d = m.dim();
            for r in 0..d {
                for c in 0..d {
                    let lhs = self.entry(m, r, c).conj();
                    let rhs = self.entry(m.partner(), m.reflect(r), m.reflect(c));
                    if (lhs - rhs).norm() > tol * (1.0 + lhs.norm()) {
                        return Err(Error::Reality(format!(
                            "conj f{m}[2i={}, 2j={}] = {lhs} but f{}[{}, {}] = {rhs}",
                            m.two_index(r),
                            m.two_index(c),
                            m.partner(),
                            -m.two_index(r),
                            -m.two_index(c),
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn get(&self, m: &Mode) -> Option<&Array2<C64>> {
        self.entries.get(m)
    }

    /// Entry at dense offsets, zero outside the support.
    pub fn entry(&self, m: Mode, r: usize, c: usize) -> C64 {
        self.entries.get(&m).map_or(C64::new(0.0, 0.0), |a| a[[r, c]])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &Array2<C64>)> {
        self.entries.iter()
    }

    /// Modes carrying a nonzero matrix.
    pub fn support(&self) -> BTreeSet<Mode> {
        self.entries
            .iter()
            .filter(|(_, a)| a.iter().any(|z| z.norm() > 0.0))
            .map(|(m, _)| *m)
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.support().is_empty()
    }

    pub fn insert(&mut self, m: Mode, mat: Array2<C64>) -> Result<()> {
        if mat.dim() != (m.dim(), m.dim()) {
            return Err(Error::Shape(format!("matrix at {m} has shape {:?}", mat.dim())));
        }
        self.entries.insert(m, mat);
        self.real = false;
        Ok(())
    }

    /// Per-mode Hermitian conjugate.
    pub fn adjoint(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(m, a)| (*m, a.t().mapv(|z| z.conj())))
            .collect();
        Self { entries, real: false }
    }

    pub fn scale(&self, s: C64) -> Self {
        let entries = self.entries.iter().map(|(m, a)| (*m, a.mapv(|z| z * s))).collect();
        Self { entries, real: self.real && s.im == 0.0 }
    }

    /// Sparse listing `(mode, 2i, 2j, value)` of the nonzero entries.
    pub fn to_sparse(&self) -> Vec<(Mode, i32, i32, C64)> {
        let mut out = Vec::new();
        for (m, a) in &self.entries {
            for ((r, c), z) in a.indexed_iter() {
                if z.norm() > 0.0 {
                    out.push((*m, m.two_index(r), m.two_index(c), *z));
                }
            }
        }
        out
    }
}

/// `sqrt( Σ (2l+1) ω^{2k} |f(m)_{ij}|² )`.
pub fn sobolev_norm(f: &CoefficientField, k: f64) -> f64 {
    f.iter()
        .map(|(m, a)| {
            let w = m.dim() as f64 * m.eigenvalue().powf(2.0 * k);
            w * a.iter().map(|z| z.norm_sqr()).sum::<f64>()
        })
        .sum::<f64>()
        .sqrt()
}

/// Bilinear pairing `Σ (2l+1) Tr[φ(m) ν(m)]` over the common support.
pub fn dual_pairing(nu: &CoefficientField, phi: &CoefficientField) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (m, a) in nu.iter() {
        if let Some(b) = phi.get(m) {
            let tr: C64 = b.dot(a).diag().sum();
            acc += tr * m.dim() as f64;
        }
    }
    acc
}

/// Diagonal chronological-propagator values `Δ(m)_{jj}` per mode.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PropagatorSpec {
    diag: BTreeMap<Mode, Vec<f64>>,
}

impl PropagatorSpec {
    /// Validates lengths and the parity relation `Δ(n)_{jj} = Δ(-n)_{-j,-j}`
    /// wherever both sides are present.
    pub fn new(diag: BTreeMap<Mode, Vec<f64>>) -> Result<Self> {
        for (m, v) in &diag {
            if v.len() != m.dim() {
                return Err(Error::Shape(format!(
                    "propagator at {m} has {} values, expected {}",
                    v.len(),
                    m.dim()
                )));
            }
            if let Some(w) = diag.get(&m.partner()) {
                for (idx, x) in v.iter().enumerate() {
                    let y = w[m.reflect(idx)];
                    if (x - y).abs() > 1e-14 * (1.0 + x.abs()) {
                        return Err(Error::Validation(format!(
                            "propagator parity broken at {m}, 2j={}: {x} vs {y}",
                            m.two_index(idx)
                        )));
                    }
                }
            }
        }
        Ok(Self { diag })
    }

    /// Like [`new`](Self::new) but fills in missing parity partners.
    pub fn with_parity_completion(diag: BTreeMap<Mode, Vec<f64>>) -> Result<Self> {
        let mut full = diag.clone();
        for (m, v) in &diag {
            full.entry(m.partner())
                .or_insert_with(|| v.iter().rev().copied().collect());
        }
        Self::new(full)
    }

    pub fn get(&self, m: &Mode) -> Option<&[f64]> {
        self.diag.get(m).map(|v| v.as_slice())
    }

    pub fn require(&self, m: &Mode) -> Result<&[f64]> {
        self.get(m).ok_or(Error::MissingPropagator(*m))
    }

    pub fn domain(&self) -> BTreeSet<Mode> {
        self.diag.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &Vec<f64>)> {
        self.diag.iter()
    }

    /// Diagonal of the multiplication operator, `√(4π) Δ(m)_{jj}`.
    pub fn tc_diag(&self, m: &Mode) -> Result<Vec<f64>> {
        Ok(self.require(m)?.iter().map(|d| sqrt_4pi() * d).collect())
    }
}

/// `⟨ν, T_c ν*⟩ = Σ (2l+1) Tr[ν(m) T_c(m) ν(m)*]`.
pub fn tc_quadratic_form(nu: &CoefficientField, dc: &PropagatorSpec) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (m, a) in nu.iter() {
        if a.iter().all(|z| z.norm() == 0.0) {
            continue;
        }
        let t = dc.tc_diag(m)?;
        let mut tr = C64::new(0.0, 0.0);
        for ((_, c), z) in a.indexed_iter() {
            tr += *z * t[c] * z.conj();
        }
        acc += tr * m.dim() as f64;
    }
    Ok(acc)
}

/// Two-sided propagator bound `1/ω⁴ ≤ Δ(m)_{jj} ≤ ω²`, required for every `j`.
pub fn check_inequality_r(dc: &PropagatorSpec, m: Mode) -> Result<bool> {
    let w = m.eigenvalue();
    Ok(dc
        .require(&m)?
        .iter()
        .all(|&d| d >= w.powi(-4) && d <= w * w))
}

fn check_lower_only(dc: &PropagatorSpec, m: Mode) -> Result<bool> {
    let w = m.eigenvalue();
    Ok(dc.require(&m)?.iter().all(|&d| d >= w.powi(-4)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl BoundCheck {
    fn new(lhs: f64, rhs: f64, tol: f64) -> Self {
        let holds = lhs <= rhs + tol * lhs.abs().max(rhs.abs());
        Self { lhs, rhs, holds }
    }
}

/// `|⟨ν, T_c ν*⟩| ≤ √(4π) |ν|₁²`.
pub fn bound_upper(nu: &CoefficientField, dc: &PropagatorSpec, tol: f64) -> Result<BoundCheck> {
    for m in nu.support() {
        if !check_inequality_r(dc, m)? {
            return Err(Error::AdmissibilityViolation(format!(
                "mode {m} violates the two-sided propagator bound"
            )));
        }
    }
    let lhs = tc_quadratic_form(nu, dc)?.norm();
    let rhs = sqrt_4pi() * sobolev_norm(nu, 1.0).powi(2);
    Ok(BoundCheck::new(lhs, rhs, tol))
}

/// `√(4π) |ν|₋₂² ≤ |⟨ν, T_c ν*⟩|`; needs only the lower propagator bound.
pub fn bound_lower(nu: &CoefficientField, dc: &PropagatorSpec, tol: f64) -> Result<BoundCheck> {
    for m in nu.support() {
        if !check_lower_only(dc, m)? {
            return Err(Error::AdmissibilityViolation(format!(
                "mode {m} violates the lower propagator bound 1/ω⁴ ≤ Δ"
            )));
        }
    }
    let lhs = sqrt_4pi() * sobolev_norm(nu, -2.0).powi(2);
    let rhs = tc_quadratic_form(nu, dc)?.norm();
    Ok(BoundCheck::new(lhs, rhs, tol))
}

/// Concrete finite mode set on which test fields may live.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibleSupport {
    pub modes: BTreeSet<Mode>,
    pub r: f64,
    pub r_prime: f64,
}

impl AdmissibleSupport {
    /// Evaluates the support rule over `candidates`: orbit modes are kept iff
    /// `ω < R`, other candidates are kept unconditionally. Every kept mode
    /// with `ω > R'` must then satisfy the two-sided propagator bound.
    pub fn from_rule(
        candidates: impl IntoIterator<Item = Mode>,
        orbit_modes: &BTreeSet<Mode>,
        dc: &PropagatorSpec,
        r: f64,
        r_prime: f64,
    ) -> Result<Self> {
        if !(r > 0.0 && r_prime > 0.0) {
            return Err(Error::Validation(format!(
                "support radii must be positive, got R={r}, R'={r_prime}"
            )));
        }
        let modes: BTreeSet<Mode> = candidates
            .into_iter()
            .filter(|m| !orbit_modes.contains(m) || m.eigenvalue() < r)
            .collect();
        for m in &modes {
            if m.eigenvalue() > r_prime && !check_inequality_r(dc, *m)? {
                return Err(Error::AdmissibilityViolation(format!(
                    "support mode {m} has ω = {} > R' = {r_prime} but violates the propagator bound",
                    m.eigenvalue()
                )));
            }
        }
        Ok(Self { modes, r, r_prime })
    }

    pub fn contains(&self, m: &Mode) -> bool {
        self.modes.contains(m)
    }

    /// Orbit modes (from either orbit) that fall inside the support.
    pub fn orbit_intersection(&self, orbit_modes: &BTreeSet<Mode>) -> BTreeSet<Mode> {
        self.modes.intersection(orbit_modes).copied().collect()
    }

    pub fn check_field(&self, f: &CoefficientField) -> Result<()> {
        for m in f.support() {
            if !self.contains(&m) {
                return Err(Error::AdmissibilityViolation(format!(
                    "field supported at {m}, outside the admissible support"
                )));
            }
        }
        Ok(())
    }
}

/// Support of `nu` must lie inside the propagator domain.
pub fn check_in_domain(nu: &CoefficientField, dc: &PropagatorSpec) -> Result<()> {
    for m in nu.support() {
        if dc.get(&m).is_none() {
            return Err(Error::AdmissibilityViolation(format!(
                "field supported at {m} where no propagator is given"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn single(m: Mode, two_i: i32, two_j: i32, v: C64) -> CoefficientField {
        CoefficientField::from_sparse([(m, two_i, two_j, v)]).unwrap()
    }

    fn dc_const(modes: &[Mode], v: f64) -> PropagatorSpec {
        PropagatorSpec::new(modes.iter().map(|m| (*m, vec![v; m.dim()])).collect()).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(eigenvalue(Mode::new(0, 0)), 1.0);
        assert_eq!(eigenvalue(Mode::new(2, 2)), 7.0);
        assert_eq!(eigenvalue(Mode::new(-2, 2)), 7.0);
        assert_eq!(eigenvalue(Mode::new(1, 1)), 2.75);
    }

    #[test]
    fn index_offsets() {
        let m = Mode::new(0, 3);
        assert_eq!(m.index_of(-3), Some(0));
        assert_eq!(m.index_of(3), Some(3));
        assert_eq!(m.index_of(0), None);
        assert_eq!(m.two_index(2), 1);
        assert_eq!(m.reflect(0), 3);
    }

    #[test]
    fn sobolev_norm_examples() {
        assert_eq!(sobolev_norm(&CoefficientField::zero(), 2.5), 0.0);
        let f = single(Mode::new(0, 0), 0, 0, c(1.0, 0.0));
        assert_eq!(sobolev_norm(&f, 3.0), 1.0);
        let g = single(Mode::new(2, 2), 0, 0, c(1.0, 0.0));
        assert!((sobolev_norm(&g, 1.0) - (3.0f64 * 49.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn dual_pairing_single_mode() {
        let m = Mode::new(0, 0);
        let nu = single(m, 0, 0, c(2.0, 0.0));
        let phi = single(m, 0, 0, c(3.0, 0.0));
        assert_eq!(dual_pairing(&nu, &phi), c(6.0, 0.0));
        assert_eq!(dual_pairing(&CoefficientField::zero(), &phi), c(0.0, 0.0));
    }

    #[test]
    fn tc_form_examples() {
        let m = Mode::new(0, 0);
        let dc = dc_const(&[m], 1.0);
        assert_eq!(tc_quadratic_form(&CoefficientField::zero(), &dc).unwrap(), c(0.0, 0.0));
        let nu = single(m, 0, 0, c(1.0, 0.0));
        let q = tc_quadratic_form(&nu, &dc).unwrap();
        assert!((q - c(sqrt_4pi(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tc_form_missing_propagator() {
        let nu = single(Mode::new(3, 0), 0, 0, c(1.0, 0.0));
        let dc = dc_const(&[Mode::new(0, 0)], 1.0);
        assert!(matches!(tc_quadratic_form(&nu, &dc), Err(Error::MissingPropagator(_))));
    }

    #[test]
    fn tc_form_real_on_half_integer_pair() {
        let m = Mode::new(1, 1);
        let a = array![[c(0.3, 0.1), c(-0.2, 0.4)], [c(0.5, -0.7), c(0.1, 0.2)]];
        // partner(-i,-j) = conj(i,j)
        let b = array![[a[[1, 1]].conj(), a[[1, 0]].conj()], [a[[0, 1]].conj(), a[[0, 0]].conj()]];
        let nu = CoefficientField::new_real([(m, a), (m.partner(), b)].into(), 1e-14).unwrap();
        let mut diag = BTreeMap::new();
        diag.insert(m, vec![0.7, 1.3]);
        let dc = PropagatorSpec::with_parity_completion(diag).unwrap();
        assert_eq!(dc.get(&m.partner()).unwrap(), &[1.3, 0.7]);
        let q = tc_quadratic_form(&nu, &dc).unwrap();
        assert!(q.im.abs() < 1e-14 * q.re.abs());
    }

    #[test]
    fn reality_check_rejects_broken_field() {
        let m = Mode::new(1, 0);
        let f = CoefficientField::from_sparse([(m, 0, 0, c(1.0, 1.0)), (m.partner(), 0, 0, c(1.0, 1.0))])
            .unwrap();
        assert!(matches!(f.mark_real(1e-12), Err(Error::Reality(_))));
    }

    #[test]
    fn parity_violation_rejected() {
        let m = Mode::new(1, 1);
        let mut diag = BTreeMap::new();
        diag.insert(m, vec![1.0, 2.0]);
        diag.insert(m.partner(), vec![1.0, 2.0]);
        assert!(PropagatorSpec::new(diag).is_err());
    }

    #[test]
    fn inequality_r_examples() {
        let m1 = Mode::new(0, 0);
        assert!(check_inequality_r(&dc_const(&[m1], 1.0), m1).unwrap());
        // ω = 2 for (n=1, l=0)
        let m2 = Mode::new(1, 0);
        assert_eq!(m2.eigenvalue(), 2.0);
        assert!(!check_inequality_r(&dc_const(&[m2], 0.0), m2).unwrap());
        assert!(check_inequality_r(&dc_const(&[m2], 4.0), m2).unwrap());
        assert!(!check_inequality_r(&dc_const(&[m2], 4.0 + 1e-9), m2).unwrap());
        assert!(check_inequality_r(&dc_const(&[m2], 1.0 / 16.0), m2).unwrap());
    }

    #[test]
    fn bounds_equality_case() {
        let m = Mode::new(0, 0);
        let dc = dc_const(&[m], 1.0);
        let nu = single(m, 0, 0, c(1.0, 0.0));
        let up = bound_upper(&nu, &dc, DEFAULT_TOL).unwrap();
        assert!((up.lhs - sqrt_4pi()).abs() < 1e-15 && (up.rhs - sqrt_4pi()).abs() < 1e-15);
        assert!(up.holds);
        let lo = bound_lower(&nu, &dc, DEFAULT_TOL).unwrap();
        assert!((lo.lhs - sqrt_4pi()).abs() < 1e-15 && lo.holds);
        let z = bound_upper(&CoefficientField::zero(), &dc, DEFAULT_TOL).unwrap();
        assert_eq!((z.lhs, z.rhs, z.holds), (0.0, 0.0, true));
        let z = bound_lower(&CoefficientField::zero(), &dc, DEFAULT_TOL).unwrap();
        assert_eq!((z.lhs, z.rhs, z.holds), (0.0, 0.0, true));
    }

    #[test]
    fn bound_upper_rejects_inadmissible() {
        let m = Mode::new(1, 0);
        let nu = single(m, 0, 0, c(1.0, 0.0));
        let dc = dc_const(&[m], 10.0);
        assert!(matches!(bound_upper(&nu, &dc, DEFAULT_TOL), Err(Error::AdmissibilityViolation(_))));
        // upper violation alone does not block the lower bound
        assert!(bound_lower(&nu, &dc, DEFAULT_TOL).unwrap().holds);
    }

    #[test]
    fn support_rule() {
        let cands = [Mode::new(0, 0), Mode::new(1, 0), Mode::new(3, 0), Mode::new(2, 1)];
        let dc = dc_const(&cands, 0.5);
        let orbit: BTreeSet<Mode> = [Mode::new(1, 0), Mode::new(3, 0)].into();
        let s = AdmissibleSupport::from_rule(cands, &orbit, &dc, 5.0, 1.0).unwrap();
        assert!(s.contains(&Mode::new(1, 0)));
        assert!(!s.contains(&Mode::new(3, 0)));
        assert!(s.contains(&Mode::new(2, 1)));
        assert_eq!(s.orbit_intersection(&orbit).len(), 1);

        let bad = dc_const(&cands, 100.0);
        assert!(AdmissibleSupport::from_rule(cands, &orbit, &bad, 5.0, 1.0).is_err());
        // below R' the bound is not enforced
        assert!(AdmissibleSupport::from_rule([Mode::new(1, 0)], &BTreeSet::new(), &bad, 5.0, 3.0).is_ok());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut e = BTreeMap::new();
        e.insert(Mode::new(0, 2), Array2::<C64>::zeros((2, 2)));
        assert!(matches!(CoefficientField::new(e), Err(Error::Shape(_))));
        assert!(CoefficientField::from_sparse([(Mode::new(0, 1), 0, 1, c(1.0, 0.0))]).is_err());
    }
}
