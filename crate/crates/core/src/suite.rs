//! Verification batteries run against a fixture.
//!
//! `pairings` and `harmonics` do not depend on the test fields; `support`
//! checks the fixture itself; `chrono`, `symbols` and `measure` produce rows
//! only for the fields listed in the fixture, so a fixture without fields
//! yields an empty, passing report for them.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;

use crate::chrono::{
    build_kernels, check_admissible, pairing_count, pairing_count_bruteforce, verify_recursions, ChronoBuilder,
    DEFAULT_MAX_ORDER,
};
use crate::error::{Error, Result};
use crate::fixture::{Fixture, NamedField};
use crate::fockspace::{field_reality_defect, vacuum_expectation, FockContext, IndexConvention};
use crate::harmonics::{
    forward_fourier, plancherel_check, random_band_limited, synthesize, wigner_matrix, GroupPoint, HaarGrid,
};
use crate::linalg::{dagger, identity, max_abs};
use crate::measure::{
    extrapolate, fresnel_2d_limit, fresnel_limit_extrapolated, gaussian_1d, mc_characteristic,
    product_characteristic, projection_characteristic_check, EpsilonSchedule, FiniteProjection, QuadratureOptions,
};
use crate::modes::{bound_lower, bound_upper, check_inequality_r, tc_quadratic_form, CoefficientField, Mode};
use crate::report::{Provenance, Report, Row, Value, TOOL_VERSION};
use crate::sampling::substream;
use crate::symbolcalc::{closed_symbol, direct_symbol, growth_bound_fit, random_kernel, symbol_truncation_bound};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Pairings,
    Chrono,
    Symbols,
    Measure,
    Support,
    Harmonics,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] =
        [Suite::Pairings, Suite::Chrono, Suite::Symbols, Suite::Measure, Suite::Support, Suite::Harmonics];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Pairings => "pairings",
            Suite::Chrono => "chrono",
            Suite::Symbols => "symbols",
            Suite::Measure => "measure",
            Suite::Support => "support",
            Suite::Harmonics => "harmonics",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteFlags {
    /// Replaces every default comparison tolerance when set.
    pub tol: Option<f64>,
    pub seed: u64,
    pub max_order: u32,
    pub cutoff: Option<u32>,
    pub epsilon_levels: usize,
    /// Random `(ξ, η)` pairs per field, also the growth-fit sample count.
    pub samples: usize,
    /// Growth-fit `p` values; defaults to `{0, 1}`.
    pub p: Vec<f64>,
    /// Growth-fit `ε` values; defaults to `{0.5, 1}`.
    pub epsilon: Vec<f64>,
    /// Monte Carlo cross-check `(samples, seed)`.
    pub mc: Option<(usize, u64)>,
}

impl Default for SuiteFlags {
    fn default() -> Self {
        Self {
            tol: None,
            seed: 20_240_601,
            max_order: DEFAULT_MAX_ORDER,
            cutoff: None,
            epsilon_levels: EpsilonSchedule::default().levels,
            samples: 50,
            p: vec![0.0, 1.0],
            epsilon: vec![0.5, 1.0],
            mc: None,
        }
    }
}

impl SuiteFlags {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn describe(&self) -> Vec<(String, String)> {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        let mut out = vec![
            ("tol".into(), self.tol.map_or("default".into(), |t| format!("{t:e}"))),
            ("max_order".into(), self.max_order.to_string()),
            ("cutoff".into(), self.cutoff.map_or("fixture".into(), |c| c.to_string())),
            ("epsilon_levels".into(), self.epsilon_levels.to_string()),
            ("samples".into(), self.samples.to_string()),
            ("p".into(), join(&self.p)),
            ("epsilon".into(), join(&self.epsilon)),
        ];
        if let Some((n, s)) = self.mc {
            out.push(("mc".into(), format!("{n}@{s}")));
        }
        out
    }
}

/// Series kept for plotting alongside the report.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotData {
    /// `(field, N, max-entry error, bound)`.
    pub exp_error_profile: Vec<(String, u32, f64, f64)>,
    /// `(field, coordinate, ε, value, limit)`; `ε = 0` holds the extrapolated value.
    pub fresnel_convergence: Vec<(String, String, f64, C64, C64)>,
}

impl PlotData {
    fn extend(&mut self, other: PlotData) {
        self.exp_error_profile.extend(other.exp_error_profile);
        self.fresnel_convergence.extend(other.fresnel_convergence);
    }

    pub fn exp_error_profile_csv(&self) -> String {
        let mut out = String::from("field,N,max_entry_error,bound\n");
        for (f, n, e, b) in &self.exp_error_profile {
            out.push_str(&format!("{f},{n},{e:.6e},{b:.6e}\n"));
        }
        out
    }

    pub fn fresnel_convergence_csv(&self) -> String {
        let mut out = String::from("field,coordinate,epsilon,re,im,limit_re,limit_im,abs_err\n");
        for (f, c, e, v, l) in &self.fresnel_convergence {
            out.push_str(&format!(
                "{f},\"{c}\",{e:.6e},{:.15e},{:.15e},{:.15e},{:.15e},{:.6e}\n",
                v.re,
                v.im,
                l.re,
                l.im,
                (v - l).norm()
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutcome {
    pub report: Report,
    pub plot: PlotData,
}

/// Runs `suite` on a loaded fixture.
pub fn run_suite(fixture: &Fixture, suite: Suite, flags: &SuiteFlags) -> Result<SuiteOutcome> {
    let provenance = Provenance {
        suite: suite.name().into(),
        fixture: fixture.name.clone(),
        seed: flags.seed,
        version: TOOL_VERSION.into(),
        config_hash: fixture.config_hash(),
        flags: flags.describe(),
    };
    let mut report = Report::new(provenance);
    let mut plot = PlotData::default();
    let suites: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    for s in suites {
        let (rows, p) = match s {
            Suite::Pairings => (pairings(fixture), PlotData::default()),
            Suite::Chrono => chrono(fixture, flags)?,
            Suite::Symbols => (symbols(fixture, flags)?, PlotData::default()),
            Suite::Measure => measure(fixture, flags)?,
            Suite::Support => (support(fixture, flags)?, PlotData::default()),
            Suite::Harmonics => (harmonics(fixture, flags)?, PlotData::default()),
            Suite::All => unreachable!(),
        };
        report.rows.extend(rows);
        plot.extend(p);
    }
    Ok(SuiteOutcome { report, plot })
}

fn int(v: &BigUint) -> Value {
    Value::Int(v.to_string())
}

fn pairings(fx: &Fixture) -> Vec<Row> {
    let name = &fx.name;
    let mut rows: Vec<Row> = (0..=12u32)
        .into_par_iter()
        .flat_map_iter(|n| {
            (0..=6u32).map(move |k| {
                let closed = pairing_count(n, k);
                let brute = pairing_count_bruteforce(n, k).expect("within enumeration limit");
                let ok = closed == brute;
                Row::flag(format!("pairing_count[n={n},k={k}]"), "pairing-count", name, int(&closed), int(&brute), ok)
            })
        })
        .collect();

    let rep = verify_recursions(40);
    let identities = ["[n,0] = 1", "[n,1] = C(n,2)", "[n+1,k] = [n,k] + n[n-1,k-1]", "(k+1)[n,k+1] = [n-2k,1][n,k]"];
    for id in identities {
        let bad: Vec<_> = rep.failures.iter().filter(|f| f.identity == id).collect();
        let detail = match bad.first() {
            Some(f) => format!("first failure n={} k={}", f.n, f.k),
            None => "n<=40".to_string(),
        };
        rows.push(
            Row::flag(
                format!("recursion[{id}]"),
                "pairing-recursion",
                name,
                Value::Int(bad.len().to_string()),
                Value::Int("0".into()),
                bad.is_empty(),
            )
            .with_detail(detail),
        );
    }
    let detail = match rep.unscaled_middle_counterexample {
        Some((n, k)) => format!("unscaled reading fails first at n={n} k={k}"),
        None => "unscaled reading also holds".into(),
    };
    rows.push(
        Row::flag(
            "middle_recursion_reading",
            "pairing-recursion",
            name,
            Value::Text("scaled".into()),
            Value::Text(if rep.unscaled_middle_counterexample.is_some() { "scaled".into() } else { "either".into() }),
            rep.all_hold(),
        )
        .with_detail(detail),
    );
    rows
}

fn context(fx: &Fixture, flags: &SuiteFlags) -> Result<FockContext> {
    fx.fock_context(flags.cutoff)
}

fn field_label(fx: &Fixture, f: &NamedField) -> String {
    format!("{}/{}", fx.name, f.name)
}

fn chrono(fx: &Fixture, flags: &SuiteFlags) -> Result<(Vec<Row>, PlotData)> {
    if fx.nus.is_empty() {
        return Ok((Vec::new(), PlotData::default()));
    }
    let ctx = context(fx, flags)?;
    let per: Vec<(Vec<Row>, PlotData)> = fx
        .nus
        .par_iter()
        .map(|nf| -> Result<(Vec<Row>, PlotData)> {
            let label = field_label(fx, nf);
            let mut b = ChronoBuilder::new(&nf.field, &fx.propagator, &fx.orbit, &ctx)?;
            let q = b.q;
            let pairing = C64::new(0.0, -1.0) * q;
            let mut rows = Vec::new();

            let t2 = vacuum_expectation(&b.monomial(2));
            rows.push(Row::complex("vacuum_T2", "quadratic-vacuum-identity", &label, t2, pairing, flags.tol(1e-12) * (1.0 + q.norm())));

            for n in 0..=flags.max_order.min(8) {
                let got = vacuum_expectation(&b.monomial(n));
                let want = if n % 2 == 0 {
                    pairing_count(n, n / 2).to_string().parse::<f64>().expect("finite") * pairing.powu(n / 2)
                } else {
                    C64::new(0.0, 0.0)
                };
                let tol = flags.tol(1e-12) * (1.0 + want.norm());
                rows.push(Row::complex(format!("vacuum_T{n}"), "vacuum-moment", &label, got, want, tol));
            }

            let closed = b.closed_form();
            let mut plot = PlotData::default();
            for n in 0..=flags.max_order {
                let err = (&b.exponential_partial(n) - &closed).max_abs();
                let bound = b.tail_bound(n);
                plot.exp_error_profile.push((label.clone(), n, err, bound));
                let mut row = Row::compare(
                    format!("exp_partial[N={n}]"),
                    "t-exponential",
                    &label,
                    err.into(),
                    bound.into(),
                    err,
                    bound * (1.0 + 1e-9) + 1e-13,
                );
                row.detail = format!("N={n} max_entry_error={err:.3e} bound={bound:.3e} dim={}", ctx.dim());
                rows.push(row);
            }

            let vac = vacuum_expectation(&closed);
            let want = (C64::new(0.0, 0.5) * q).exp();
            rows.push(Row::complex("vacuum_closed_form", "vacuum-characteristic", &label, vac, want, flags.tol(1e-10)));
            Ok((rows, plot))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut plot = PlotData::default();
    for (r, p) in per {
        rows.extend(r);
        plot.extend(p);
    }
    Ok((rows, plot))
}

fn symbols(fx: &Fixture, flags: &SuiteFlags) -> Result<Vec<Row>> {
    if fx.nus.is_empty() {
        return Ok(Vec::new());
    }
    let ctx = context(fx, flags)?;
    let per: Vec<Vec<Row>> = fx
        .nus
        .par_iter()
        .enumerate()
        .map(|(fi, nf)| -> Result<Vec<Row>> {
            let label = field_label(fx, nf);
            let b = ChronoBuilder::new(&nf.field, &fx.propagator, &fx.orbit, &ctx)?;
            let closed_op = b.closed_form();
            let (k01, k10) = build_kernels(&nf.field, &fx.orbit);
            let q = tc_quadratic_form(&nf.field, &fx.propagator)?;
            let mut rows = Vec::new();
            for idx in 0..flags.samples {
                let mut rng = substream(flags.seed, ((fi as u64) << 32) | idx as u64);
                let (rx, re) = (rng.random::<f64>(), rng.random::<f64>());
                let xi = random_kernel(&mut rng, ctx.labels(), rx);
                let eta = random_kernel(&mut rng, ctx.labels(), re);
                let direct = direct_symbol(&ctx, &closed_op, &xi, &eta)?;
                let closed = closed_symbol(&nf.field, &fx.propagator, &fx.orbit, &xi, &eta)?;
                let bound = symbol_truncation_bound(&k01, &k10, q, &xi, &eta, ctx.cutoff());
                let tol = bound + flags.tol(1e-12) * (1.0 + closed.norm());
                rows.push(
                    Row::complex(format!("symbol[{idx}]"), "symbol-closed-form", &label, direct, closed, tol)
                        .with_detail(format!("|xi|={rx:.4} |eta|={re:.4} truncation_bound={bound:.3e}")),
                );
            }
            for &p in &flags.p {
                for &eps in &flags.epsilon {
                    let fit = growth_bound_fit(&nf.field, &fx.propagator, &fx.orbit, p, eps, flags.samples, flags.seed)?;
                    rows.push(
                        Row::flag(
                            format!("growth_fit[p={p},eps={eps}]"),
                            "symbol-growth-bound",
                            &label,
                            Value::Real(fit.c),
                            Value::Real(fit.q),
                            fit.is_finite(),
                        )
                        .with_detail(format!(
                            "C={:.6e} q={} binding_sample={} out_of_sample_failure_rate={:.4}",
                            fit.c,
                            fit.q,
                            fit.binding,
                            fit.failure_rate()
                        )),
                    );
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// Rejects zero (or negative) propagator entries anywhere in the domain.
fn require_nonzero_propagator(fx: &Fixture) -> Result<()> {
    for (m, v) in fx.propagator.iter() {
        for (idx, d) in v.iter().enumerate() {
            if *d == 0.0 || !d.is_finite() {
                return Err(Error::Validation(format!(
                    "propagator value {d} at mode {m}, 2j={} must be nonzero for the measure suite",
                    m.two_index(idx)
                )));
            }
        }
    }
    Ok(())
}

fn coordinate_name(m: Mode, j: usize, i: usize) -> String {
    format!("{m} j={} i={}", m.two_index(j), m.two_index(i))
}

fn measure(fx: &Fixture, flags: &SuiteFlags) -> Result<(Vec<Row>, PlotData)> {
    if fx.nus.is_empty() {
        return Ok((Vec::new(), PlotData::default()));
    }
    require_nonzero_propagator(fx)?;
    let base_schedule = EpsilonSchedule::with_levels(flags.epsilon_levels);
    let opts = QuadratureOptions::default();
    let mut rows = Vec::new();
    let mut plot = PlotData::default();
    for (fi, nf) in fx.nus.iter().enumerate() {
        let label = field_label(fx, nf);
        check_admissible(&nf.field, &fx.propagator)?;
        let proj = FiniteProjection::from_modes(&fx.propagator, nf.field.support())?;
        let params = proj.field_parameters(&nf.field);
        let a_min = proj.coords.iter().map(|c| c.effective_a().abs()).fold(f64::INFINITY, f64::min);
        let schedule = base_schedule.scaled_for(a_min);

        // per-coordinate Fresnel limits at this field's (a, λ, μ)
        let conv: Vec<(Row, Vec<(f64, C64)>, C64, String)> = proj
            .coords
            .par_iter()
            .zip(params.par_iter())
            .map(|(c, &(lam, mu))| -> Result<_> {
                let name = coordinate_name(c.mode, c.j, c.i);
                let (ex, limit) = if c.self_conjugate {
                    let a = c.effective_a();
                    let ex = extrapolate(&schedule, |e| {
                        let r = gaussian_1d(C64::new(e / 2.0, a), C64::new(0.0, 1.0) * lam, &opts)?;
                        Ok((C64::new(0.0, a / std::f64::consts::PI)).sqrt() * r.value)
                    })?;
                    (ex, (C64::new(0.0, 1.0) * lam * lam / (4.0 * a)).exp())
                } else {
                    (fresnel_limit_extrapolated(c.a, lam, mu, &schedule, &opts)?, fresnel_2d_limit(c.a, lam, mu))
                };
                let row = Row::complex(format!("fresnel_limit[{name}]"), "fresnel-limit", &label, ex.value, limit, flags.tol(1e-6))
                    .with_detail(format!(
                    "levels={} base_eps={:.3e} richardson_last_delta={:.3e}",
                    schedule.levels, schedule.base, ex.last_delta
                ));
                Ok((row, ex.samples, ex.value, name))
            })
            .collect::<Result<_>>()?;
        for (row, samples, value, name) in conv {
            let limit = match &row.rhs {
                Value::Complex(z) => *z,
                _ => unreachable!(),
            };
            for (e, v) in samples {
                plot.fresnel_convergence.push((label.clone(), name.clone(), e, v, limit));
            }
            plot.fresnel_convergence.push((label.clone(), name, 0.0, value, limit));
            rows.push(row);
        }

        let prod = product_characteristic(&nf.field, &fx.propagator, &fx.support)?;
        let vac = crate::chrono::vacuum_characteristic(&nf.field, &fx.propagator)?;
        rows.push(
            Row::complex("product_characteristic", "product-characteristic", &label, prod, vac, flags.tol(1e-10))
                .with_detail(format!("coordinates={}", proj.k())),
        );

        for k in 1..=proj.k().min(2) {
            let sub = FiniteProjection { coords: proj.coords[..k].to_vec() };
            let mut rng = substream(flags.seed, (1u64 << 40) | fi as u64);
            let u: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
            let chk = projection_characteristic_check(&sub, &fx.propagator, &u, &w, &schedule, &opts)?;
            rows.push(
                Row::complex(format!("projection_fourier[k={k}]"), "projection-fourier", &label, chk.lhs, chk.rhs, flags.tol(1e-6))
                    .with_detail(format!(
                        "levels={} base_eps={:.3e} richardson_last_delta={:.3e}",
                        schedule.levels, schedule.base, chk.extrapolation.last_delta
                    )),
            );
        }

        if let Some((samples, seed)) = flags.mc {
            let k = proj.k().min(2);
            let sub = FiniteProjection { coords: proj.coords[..k].to_vec() };
            let eps = 1.0;
            let mc = mc_characteristic(&sub, &params[..k], samples, eps, seed)?;
            let err = (mc.estimate - mc.target).norm();
            rows.push(
                Row::compare("monte_carlo", "monte-carlo", &label, mc.estimate.into(), mc.target.into(), err, 4.0 * mc.stderr)
                    .with_detail(format!("samples={samples} epsilon={eps} stderr={:.3e}", mc.stderr)),
            );
        }
    }
    Ok((rows, plot))
}

fn support(fx: &Fixture, flags: &SuiteFlags) -> Result<Vec<Row>> {
    let name = &fx.name;
    let tol = flags.tol(1e-12);
    let mut rows = Vec::new();

    let ctx = FockContext::from_orbit(&fx.orbit, 1)?;
    let mut defects = Vec::new();
    for c in IndexConvention::ALL {
        defects.push((c, field_reality_defect(&fx.orbit, &ctx, c)?));
    }
    let reflected = defects[0].1;
    let others: Vec<String> = defects.iter().map(|(c, d)| format!("{}={d:.3e}", c.name())).collect();
    rows.push(
        Row::compare("field_hermiticity", "field-reality", name, reflected.into(), 0.0.into(), reflected, tol)
            .with_detail(others.join(" ")),
    );

    let orbit_modes = fx.orbit.all_modes();
    let (r, rp) = (fx.support.r, fx.support.r_prime);
    for m in &fx.support.modes {
        let w = m.eigenvalue();
        let in_orbit = orbit_modes.contains(m);
        let ok_orbit = !in_orbit || w < r;
        let ok_bound = w <= rp || check_inequality_r(&fx.propagator, *m)?;
        rows.push(
            Row::flag(
                format!("support_mode[{m}]"),
                "support-rule",
                name,
                Value::Real(w),
                Value::Text(if w > rp { "bounded".into() } else { "inner".into() }),
                ok_orbit && ok_bound,
            )
            .with_detail(format!("orbit={in_orbit} R={r} R'={rp}")),
        );
    }
    let inter = fx.support.orbit_intersection(&orbit_modes);
    let listed: Vec<String> = inter.iter().map(|m| m.to_string()).collect();
    rows.push(
        Row::flag(
            "orbit_intersection",
            "support-rule",
            name,
            Value::Int(inter.len().to_string()),
            Value::Int(orbit_modes.len().to_string()),
            inter.iter().all(|m| m.eigenvalue() < r),
        )
        .with_detail(listed.join(" ")),
    );

    for nf in &fx.nus {
        let label = field_label(fx, nf);
        let adm = check_admissible(&nf.field, &fx.propagator);
        let in_support = fx.support.check_field(&nf.field);
        let ok = adm.is_ok() && in_support.is_ok();
        let detail = adm.err().or(in_support.err()).map(|e| e.to_string()).unwrap_or_default();
        rows.push(
            Row::flag("admissible", "admissibility", &label, Value::Text(ok.to_string()), Value::Text("true".into()), ok)
                .with_detail(detail),
        );
        if !ok {
            continue;
        }
        let up = bound_upper(&nf.field, &fx.propagator, tol)?;
        rows.push(Row::flag("bound_upper", "quadratic-upper-bound", &label, up.lhs.into(), up.rhs.into(), up.holds));
        let lo = bound_lower(&nf.field, &fx.propagator, tol)?;
        rows.push(Row::flag("bound_lower", "quadratic-lower-bound", &label, lo.lhs.into(), lo.rhs.into(), lo.holds));
    }
    Ok(rows)
}

fn harmonics(fx: &Fixture, flags: &SuiteFlags) -> Result<Vec<Row>> {
    let name = &fx.name;
    let mut rows = Vec::new();
    let tol_rep = flags.tol(1e-10);
    let tol_fourier = flags.tol(1e-8);

    for two_l in 0..=8u32 {
        let mut rng = substream(flags.seed, (2u64 << 40) | two_l as u64);
        let (mut unit, mut hom) = (0.0f64, 0.0f64);
        for _ in 0..5 {
            let g = GroupPoint::random(&mut rng);
            let h = GroupPoint::random(&mut rng);
            let dg = wigner_matrix(two_l, &g);
            let dh = wigner_matrix(two_l, &h);
            unit = unit.max(max_abs(&(dg.dot(&dagger(&dg)) - identity(dg.nrows()))));
            hom = hom.max(max_abs(&(wigner_matrix(two_l, &g.compose(&h)) - dg.dot(&dh))));
        }
        rows.push(Row::compare(format!("wigner_unitarity[2l={two_l}]"), "wigner-unitarity", name, unit.into(), 0.0.into(), unit, tol_rep));
        rows.push(Row::compare(format!("wigner_homomorphism[2l={two_l}]"), "wigner-homomorphism", name, hom.into(), 0.0.into(), hom, tol_rep));
    }

    let band = fx.band;
    let grid = HaarGrid::for_band(band);
    let modes = band.modes();
    let round_trip = |coeffs: &CoefficientField| -> Result<f64> {
        let back = forward_fourier(&synthesize(coeffs, grid.clone()), &modes)?;
        let mut worst = 0.0f64;
        for m in &modes {
            let d = m.dim();
            for r in 0..d {
                for c in 0..d {
                    worst = worst.max((back.entry(*m, r, c) - coeffs.entry(*m, r, c)).norm());
                }
            }
        }
        Ok(worst)
    };
    for idx in 0..3u64 {
        let mut rng = substream(flags.seed, (3u64 << 40) | idx);
        let f = random_band_limited(&mut rng, band, 1.0);
        let g = random_band_limited(&mut rng, band, 1.0);
        let err = round_trip(&f)?;
        rows.push(Row::compare(format!("fourier_round_trip[{idx}]"), "fourier-round-trip", name, err.into(), 0.0.into(), err, tol_fourier));
        let pc = plancherel_check(&synthesize(&f, grid.clone()), &synthesize(&g, grid.clone()), &modes)?;
        rows.push(Row::complex(format!("plancherel[{idx}]"), "plancherel", name, pc.lhs, pc.rhs, tol_fourier * (1.0 + pc.rhs.norm())));
    }
    for nf in &fx.nus {
        if nf.field.support().iter().all(|m| band.contains(m)) {
            let err = round_trip(&nf.field)?;
            rows.push(Row::compare("fourier_round_trip", "fourier-round-trip", &field_label(fx, nf), err.into(), 0.0.into(), err, tol_fourier));
        }
    }
    Ok(rows)
}
