//! Pairing counts and chronological products of `X = ⟨ν, φ⟩` on a truncated
//! Fock space.
//!
//! With the creation and annihilation parts `X = C + A` of the field pairing
//! and `Q = ⟨ν, T_c ν*⟩`, each contraction contributes `-iQ`, so
//!
//! ```text
//! T(Xⁿ) = Σ_k [n,k] (-iQ)^k :X^{n-2k}:,   :X^m: = Σ_r C(m,r) C^r A^{m-r}
//! ```
//!
//! and the series `Σ iⁿ T(Xⁿ)/n!` resums to `e^{iC} e^{iA} e^{iQ/2}`.

use num_bigint::BigUint;
use num_complex::Complex64 as C64;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fockspace::{kernel_parts, FockContext, FockOperator, KernelVector, Label, OrbitSpec};
use crate::linalg::{expm, frobenius};
use crate::modes::{check_in_domain, check_inequality_r, sqrt_4pi, tc_quadratic_form, CoefficientField, PropagatorSpec};

pub const DEFAULT_MAX_ORDER: u32 = 12;
pub const BRUTEFORCE_LIMIT: u32 = 14;

fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `[n,k] = n! / (k! (n-2k)! 2^k)`, zero when `n < 2k`.
pub fn pairing_count(n: u32, k: u32) -> BigUint {
    if n < 2 * k {
        return BigUint::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - 2 * k) * (BigUint::one() << k as usize))
}

/// Counts sets of exactly `k` disjoint pairs among `n` slots by walking
/// every partial matching.
pub fn pairing_count_bruteforce(n: u32, k: u32) -> Result<BigUint> {
    if n > BRUTEFORCE_LIMIT {
        return Err(Error::SizeLimit { n: n as usize, limit: BRUTEFORCE_LIMIT as usize });
    }
    fn walk(free: &mut Vec<bool>, pos: usize, pairs_left: u32) -> u64 {
        let n = free.len();
        let mut p = pos;
        while p < n && !free[p] {
            p += 1;
        }
        if p == n {
            return u64::from(pairs_left == 0);
        }
        // slot p stays single
        free[p] = false;
        let mut total = walk(free, p + 1, pairs_left);
        if pairs_left > 0 {
            for q in p + 1..n {
                if free[q] {
                    free[q] = false;
                    total += walk(free, p + 1, pairs_left - 1);
                    free[q] = true;
                }
            }
        }
        free[p] = true;
        total
    }
    Ok(BigUint::from(walk(&mut vec![true; n as usize], 0, k)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursionFailure {
    pub identity: &'static str,
    pub n: u32,
    pub k: u32,
    pub lhs: BigUint,
    pub rhs: BigUint,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RecursionReport {
    pub checked: usize,
    pub failures: Vec<RecursionFailure>,
    /// First `(n, k)` at which `[n,k+1] = [n-2k,1]/(k+1)` without the
    /// factor `[n,k]` fails, if any.
    pub unscaled_middle_counterexample: Option<(u32, u32)>,
}

impl RecursionReport {
    pub fn all_hold(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn verify_recursions(n_max: u32) -> RecursionReport {
    verify_recursions_with(n_max, pairing_count)
}

/// Checks `[n,0] = 1`, `[n,1] = C(n,2)`, `[n+1,k] = [n,k] + n[n-1,k-1]` and
/// `(k+1)[n,k+1] = [n-2k,1][n,k]` against `count` for all `n ≤ n_max`.
pub fn verify_recursions_with(n_max: u32, count: impl Fn(u32, u32) -> BigUint) -> RecursionReport {
    let mut rep = RecursionReport::default();
    let check = |rep: &mut RecursionReport, identity, n, k, lhs: BigUint, rhs: BigUint| {
        rep.checked += 1;
        if lhs != rhs {
            rep.failures.push(RecursionFailure { identity, n, k, lhs, rhs });
        }
    };
    for n in 1..=n_max {
        check(&mut rep, "[n,0] = 1", n, 0, count(n, 0), BigUint::one());
        let c2 = BigUint::from(n) * BigUint::from(n - 1) / 2u32;
        check(&mut rep, "[n,1] = C(n,2)", n, 1, count(n, 1), c2);
    }
    for n in 1..n_max {
        for k in 1..=(n + 1) / 2 {
            let rhs = count(n, k) + BigUint::from(n) * count(n - 1, k - 1);
            check(&mut rep, "[n+1,k] = [n,k] + n[n-1,k-1]", n, k, count(n + 1, k), rhs);
        }
    }
    for n in 2..=n_max {
        for k in 0..n / 2 {
            let lhs = BigUint::from(k + 1) * count(n, k + 1);
            let rhs = count(n - 2 * k, 1) * count(n, k);
            check(&mut rep, "(k+1)[n,k+1] = [n-2k,1][n,k]", n, k, lhs, rhs);
            if rep.unscaled_middle_counterexample.is_none()
                && BigUint::from(k + 1) * count(n, k + 1) != count(n - 2 * k, 1)
            {
                rep.unscaled_middle_counterexample = Some((n, k));
            }
        }
    }
    rep
}

/// `κ₀₁(s,m) = √4π Σ u_s(m)_{ij} ν(m)_{ji}` and
/// `κ₁₀(s,m) = √4π Σ conj(u_s(m)_{-i,-j}) ν(m)_{ji}`, accumulated on the
/// canonical label of each mode carried by the orbit.
pub fn build_kernels(nu: &CoefficientField, orbit: &OrbitSpec) -> (KernelVector, KernelVector) {
    let mut k01 = KernelVector::zero();
    let mut k10 = KernelVector::zero();
    for m in nu.support() {
        if !orbit.carries(&m) {
            continue;
        }
        let v = nu.get(&m).expect("support mode");
        for s in orbit.indices(&m) {
            let u = orbit.u(s, &m).expect("listed index");
            let mut a = C64::new(0.0, 0.0);
            let mut b = C64::new(0.0, 0.0);
            for i in 0..m.dim() {
                for j in 0..m.dim() {
                    a += u[[i, j]] * v[[j, i]];
                    b += u[[m.reflect(i), m.reflect(j)]].conj() * v[[j, i]];
                }
            }
            let x = Label::new(s, m);
            k01.add(x, a * sqrt_4pi());
            k10.add(x, b * sqrt_4pi());
        }
    }
    (k01, k10)
}

/// Real flag, propagator domain, and the two-sided bound on every support mode.
pub fn check_admissible(nu: &CoefficientField, dc: &PropagatorSpec) -> Result<()> {
    if !nu.is_real() && !nu.is_zero() {
        return Err(Error::AdmissibilityViolation("test field is not flagged real".into()));
    }
    check_in_domain(nu, dc)?;
    for m in nu.support() {
        if !check_inequality_r(dc, m)? {
            return Err(Error::AdmissibilityViolation(format!(
                "mode {m} violates the two-sided propagator bound"
            )));
        }
    }
    Ok(())
}

/// Cached powers of the creation and annihilation parts of `X` together
/// with `Q`.
pub struct ChronoBuilder {
    c_pow: Vec<FockOperator>,
    a_pow: Vec<FockOperator>,
    pub creation: FockOperator,
    pub annihilation: FockOperator,
    pub q: C64,
    dim: usize,
    cutoff: u32,
    k01_norm: f64,
    k10_norm: f64,
}

impl ChronoBuilder {
    pub fn new(
        nu: &CoefficientField,
        dc: &PropagatorSpec,
        orbit: &OrbitSpec,
        ctx: &FockContext,
    ) -> Result<Self> {
        check_admissible(nu, dc)?;
        let (k01, k10) = build_kernels(nu, orbit);
        let (creation, annihilation) = kernel_parts(ctx, &k01, &k10)?;
        let q = tc_quadratic_form(nu, dc)?;
        Ok(Self {
            c_pow: vec![ctx.identity()],
            a_pow: vec![ctx.identity()],
            creation,
            annihilation,
            q,
            dim: ctx.dim(),
            cutoff: ctx.cutoff(),
            k01_norm: k01.sobolev_norm(0.0),
            k10_norm: k10.sobolev_norm(0.0),
        })
    }

    fn ensure(&mut self, m: usize) {
        while self.c_pow.len() <= m {
            let next = self.c_pow.last().unwrap() * &self.creation;
            self.c_pow.push(next);
        }
        while self.a_pow.len() <= m {
            let next = self.a_pow.last().unwrap() * &self.annihilation;
            self.a_pow.push(next);
        }
    }

    /// `:X^m:`.
    pub fn normal_power(&mut self, m: u32) -> FockOperator {
        let m = m as usize;
        self.ensure(m);
        let mut acc = FockOperator { matrix: ndarray::Array2::zeros((self.dim, self.dim)) };
        let mut binom = 1.0;
        for r in 0..=m {
            let term = &self.c_pow[r] * &self.a_pow[m - r];
            acc.matrix.scaled_add(C64::new(binom, 0.0), &term.matrix);
            binom = binom * (m - r) as f64 / (r + 1) as f64;
        }
        acc
    }

    /// `T(Xⁿ)`.
    pub fn monomial(&mut self, n: u32) -> FockOperator {
        let pairing = C64::new(0.0, -1.0) * self.q;
        let mut acc = FockOperator { matrix: ndarray::Array2::zeros((self.dim, self.dim)) };
        for k in 0..=n / 2 {
            let coef = pairing_count(n, k).to_f64().expect("finite") * pairing.powu(k);
            let term = self.normal_power(n - 2 * k);
            acc.matrix.scaled_add(coef, &term.matrix);
        }
        acc
    }

    /// `Σ_{n ≤ N} iⁿ T(Xⁿ) / n!`.
    pub fn exponential_partial(&mut self, big_n: u32) -> FockOperator {
        let mut acc = FockOperator { matrix: ndarray::Array2::zeros((self.dim, self.dim)) };
        let mut coef = C64::new(1.0, 0.0);
        for n in 0..=big_n {
            if n > 0 {
                coef *= C64::new(0.0, 1.0) / n as f64;
            }
            let t = self.monomial(n);
            acc.matrix.scaled_add(coef, &t.matrix);
        }
        acc
    }

    /// `e^{iC} e^{iA} e^{iQ/2}`.
    pub fn closed_form(&self) -> FockOperator {
        let i = C64::new(0.0, 1.0);
        let ec = expm(&self.creation.matrix.mapv(|z| z * i));
        let ea = expm(&self.annihilation.matrix.mapv(|z| z * i));
        let phase = (i * self.q / 2.0).exp();
        FockOperator { matrix: ec.dot(&ea).mapv(|z| z * phase) }
    }

    /// Scalar majorant of the entrywise gap between the order-`N` partial
    /// sum and the closed form: `e^{c+a+q} - Σ_{m+2k≤N} (c+a)^m q^k/(m!k!)`
    /// with `q = |Q|/2` and `c`, `a` bounds on the operator norms of the two
    /// parts (`√cutoff · |κ|`, or the Frobenius norm if smaller).
    pub fn tail_bound(&self, big_n: u32) -> f64 {
        let root = (self.cutoff as f64).sqrt();
        let c = frobenius(&self.creation.matrix).min(root * self.k10_norm);
        let a = frobenius(&self.annihilation.matrix).min(root * self.k01_norm);
        let x = c + a;
        let q = self.q.norm() / 2.0;
        exponential_tail(x, q, big_n)
    }
}

/// `e^{x+q} - Σ_{m+2k≤N} x^m q^k / (m! k!)`, summed as the explicit tail so
/// no cancellation occurs.
pub fn exponential_tail(x: f64, q: f64, big_n: u32) -> f64 {
    // Σ_k q^k/k! · (Σ_{m > N-2k} x^m/m!)
    let mut total = 0.0;
    let mut qk = 1.0;
    for k in 0..200u32 {
        if k > 0 {
            qk *= q / k as f64;
        }
        let start = (big_n as i64 - 2 * k as i64 + 1).max(0) as u32;
        let tail = if start == 0 { x.exp() } else { scalar_tail(x, start) };
        let term = qk * tail;
        total += term;
        if 2 * k > big_n && term < 1e-300_f64.max(total * 1e-18) {
            break;
        }
    }
    total
}

/// `Σ_{m ≥ start} x^m/m!` for `x ≥ 0`.
fn scalar_tail(x: f64, start: u32) -> f64 {
    let mut term = 1.0;
    for m in 1..=start {
        term *= x / m as f64;
    }
    let mut sum = 0.0;
    let mut m = start;
    loop {
        sum += term;
        m += 1;
        term *= x / m as f64;
        if term <= sum * 1e-18 || m > start + 500 {
            break;
        }
    }
    sum
}

pub fn t_monomial(
    nu: &CoefficientField,
    dc: &PropagatorSpec,
    orbit: &OrbitSpec,
    ctx: &FockContext,
    n: u32,
) -> Result<FockOperator> {
    Ok(ChronoBuilder::new(nu, dc, orbit, ctx)?.monomial(n))
}

pub fn t_exponential_partial(
    nu: &CoefficientField,
    dc: &PropagatorSpec,
    orbit: &OrbitSpec,
    ctx: &FockContext,
    big_n: u32,
) -> Result<FockOperator> {
    Ok(ChronoBuilder::new(nu, dc, orbit, ctx)?.exponential_partial(big_n))
}

pub fn closed_form_exponential(
    nu: &CoefficientField,
    dc: &PropagatorSpec,
    orbit: &OrbitSpec,
    ctx: &FockContext,
) -> Result<FockOperator> {
    Ok(ChronoBuilder::new(nu, dc, orbit, ctx)?.closed_form())
}

/// `e^{(i/2)⟨ν, T_c ν*⟩}`.
pub fn vacuum_characteristic(nu: &CoefficientField, dc: &PropagatorSpec) -> Result<C64> {
    check_admissible(nu, dc)?;
    let q = tc_quadratic_form(nu, dc)?;
    Ok((C64::new(0.0, 0.5) * q).exp())
}

/// Upper bound `e^{√π |ν|₁²}` for the modulus of the vacuum characteristic.
pub fn vacuum_characteristic_bound(nu: &CoefficientField) -> f64 {
    (std::f64::consts::PI.sqrt() * crate::modes::sobolev_norm(nu, 1.0).powi(2)).exp()
}

/// Max-entry gap between partial sums and the closed form for each order.
pub fn exponential_error_profile(builder: &mut ChronoBuilder, orders: impl IntoIterator<Item = u32>) -> Vec<(u32, f64, f64)> {
    let closed = builder.closed_form();
    orders
        .into_iter()
        .map(|n| {
            let err = (&builder.exponential_partial(n) - &closed).max_abs();
            (n, err, builder.tail_bound(n))
        })
        .collect()
}
