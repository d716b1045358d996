//! Acceptance criteria 1–9. Prints one line per criterion and exits nonzero
//! if any criterion fails or overruns its time budget.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::Rng;

use wnfi_core::chrono::{
    build_kernels, pairing_count, pairing_count_bruteforce, t_monomial, vacuum_characteristic, verify_recursions, ChronoBuilder,
};
use wnfi_core::fixture::Template;
use wnfi_core::fockspace::{vacuum_expectation, FockContext};
use wnfi_core::harmonics::{
    forward_fourier, plancherel_check, random_band_limited, resynthesize, synthesize, wigner_matrix, BandLimit,
    GroupPoint, HaarGrid,
};
use wnfi_core::linalg::{dagger, identity, max_abs};
use wnfi_core::measure::{
    fresnel_2d_limit, fresnel_limit_extrapolated, product_characteristic, projection_characteristic_check,
    EpsilonSchedule, FiniteProjection, QuadratureOptions,
};
use wnfi_core::modes::{bound_lower, bound_upper, sqrt_4pi, tc_quadratic_form, AdmissibleSupport, CoefficientField, PropagatorSpec};
use wnfi_core::sampling::{
    random_case, random_lower_bounded_propagator, random_mode_set, random_real_field, random_two_label_case, rng,
    RandomCase,
};
use wnfi_core::symbolcalc::{
    closed_symbol, direct_symbol, growth_bound_fit, random_kernel, symbol_truncation_bound,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn support_for(case: &RandomCase) -> AdmissibleSupport {
    AdmissibleSupport::from_rule(case.dc.domain(), &case.orbit.all_modes(), &case.dc, 10.0, 1.0)
        .expect("random cases satisfy the propagator bound")
}

/// `Σ (2l+1) Σ_ij |ν_ij|² √4π Δ_jj` by explicit loops.
fn quadratic_form_by_loops(nu: &CoefficientField, dc: &PropagatorSpec) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (m, a) in nu.iter() {
        let d = dc.get(m).unwrap();
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                acc += a[[i, j]].norm_sqr() * sqrt_4pi() * d[j] * m.dim() as f64;
            }
        }
    }
    acc
}

fn criterion_1() -> Outcome {
    let mut mismatches = 0;
    for n in 0..=12 {
        for k in 0..=6 {
            if pairing_count(n, k) != pairing_count_bruteforce(n, k).unwrap() {
                mismatches += 1;
            }
        }
    }
    let rep = verify_recursions(40);
    outcome(
        mismatches == 0 && rep.all_hold(),
        format!("91 counts, {mismatches} mismatches; {} recursion instances, {} failures", rep.checked, rep.failures.len()),
    )
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..25 {
        let case = random_case(&mut r, 2, 0.5);
        let ctx = FockContext::from_orbit(&case.orbit, 4).unwrap();
        let t2 = t_monomial(&case.nu, &case.dc, &case.orbit, &ctx, 2).unwrap();
        let want = C64::new(0.0, -1.0) * quadratic_form_by_loops(&case.nu, &case.dc);
        worst = worst.max((vacuum_expectation(&t2) - want).norm());
    }
    outcome(worst <= 1e-12, format!("25 fixtures, max |<T(X^2)> + iQ| = {worst:.2e}"))
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    let mut ok = true;
    let (mut worst_ratio, mut worst_vac) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let case = random_two_label_case(&mut r, 0.4);
        let ctx = FockContext::from_orbit(&case.orbit, 10).unwrap();
        assert_eq!(ctx.labels().len(), 2);
        let mut b = ChronoBuilder::new(&case.nu, &case.dc, &case.orbit, &ctx).unwrap();
        let closed = b.closed_form();
        let err = (&b.exponential_partial(12) - &closed).max_abs();
        let bound = b.tail_bound(12);
        ok &= err <= bound;
        worst_ratio = worst_ratio.max(err / bound);
        let vac = (vacuum_expectation(&closed) - (C64::new(0.0, 0.5) * b.q).exp()).norm();
        worst_vac = worst_vac.max(vac);
    }
    outcome(
        ok && worst_vac <= 1e-10,
        format!("10 fixtures, max err/bound = {worst_ratio:.3}, max vacuum err = {worst_vac:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let opts = QuadratureOptions::default();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let a = r.random_range(0.3..3.0) * if r.random::<bool>() { 1.0 } else { -1.0 };
        let lam = C64::new(r.random_range(-2.0..2.0), 0.0);
        let mu = C64::new(0.0, r.random_range(-2.0..2.0));
        let sched = EpsilonSchedule::default().scaled_for(a);
        let ex = fresnel_limit_extrapolated(a, lam, mu, &sched, &opts).unwrap();
        worst = worst.max((ex.value - fresnel_2d_limit(a, lam, mu)).norm());
    }
    outcome(worst < 1e-6, format!("50 parameter sets, max err = {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let mut r = rng(5);
    let mut worst_prod = 0.0f64;
    for _ in 0..25 {
        let case = random_case(&mut r, 2, 0.5);
        let p = product_characteristic(&case.nu, &case.dc, &support_for(&case)).unwrap();
        let v = vacuum_characteristic(&case.nu, &case.dc).unwrap();
        worst_prod = worst_prod.max((p - v).norm());
    }
    let opts = QuadratureOptions::default();
    let mut worst_proj = 0.0f64;
    for _ in 0..6 {
        let case = random_case(&mut r, 2, 0.5);
        let proj = FiniteProjection::from_modes(&case.dc, case.nu.support()).unwrap();
        for k in 1..=2 {
            let sub = FiniteProjection { coords: proj.coords[..k].to_vec() };
            let a_min = sub.coords.iter().map(|c| c.effective_a().abs()).fold(f64::INFINITY, f64::min);
            let sched = EpsilonSchedule::default().scaled_for(a_min);
            let u: Vec<f64> = (0..k).map(|_| r.random_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..k).map(|_| r.random_range(-1.0..1.0)).collect();
            let chk = projection_characteristic_check(&sub, &case.dc, &u, &w, &sched, &opts).unwrap();
            worst_proj = worst_proj.max(chk.err);
        }
    }
    outcome(
        worst_prod < 1e-10 && worst_proj < 1e-6,
        format!("25 fixtures product err {worst_prod:.2e}; 12 projections (k<=2) err {worst_proj:.2e}"),
    )
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let (mut up, mut lo) = (0, 0);
    for _ in 0..100 {
        let case = random_case(&mut r, 3, 1.0);
        up += bound_upper(&case.nu, &case.dc, 1e-12).unwrap().holds as usize;
    }
    for _ in 0..100 {
        let modes = random_mode_set(&mut r, 3, 3, 3);
        let dc = random_lower_bounded_propagator(&mut r, &modes);
        let nu = random_real_field(&mut r, &modes, 1.0);
        lo += bound_lower(&nu, &dc, 1e-12).unwrap().holds as usize;
    }
    outcome(up == 100 && lo == 100, format!("upper {up}/100, lower {lo}/100"))
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let mut cases: Vec<RandomCase> = (0..4).map(|_| random_case(&mut r, 1, 0.4)).collect();
    for t in Template::ALL {
        let fx = t.fixture();
        for nf in &fx.nus {
            cases.push(RandomCase {
                nu: nf.field.clone(),
                dc: fx.propagator.clone(),
                orbit: fx.orbit.clone(),
                modes: nf.field.support().into_iter().collect(),
            });
        }
    }
    let prepared: Vec<_> = cases
        .iter()
        .map(|case| {
            let ctx = FockContext::from_orbit(&case.orbit, 8).unwrap();
            let op = ChronoBuilder::new(&case.nu, &case.dc, &case.orbit, &ctx).unwrap().closed_form();
            let (k01, k10) = build_kernels(&case.nu, &case.orbit);
            let q = tc_quadratic_form(&case.nu, &case.dc).unwrap();
            (ctx, op, k01, k10, q)
        })
        .collect();
    let pairs = 50;
    let mut within = 0;
    let mut worst_ratio = 0.0f64;
    for idx in 0..pairs {
        let case = &cases[idx % cases.len()];
        let (ctx, op, k01, k10, q) = &prepared[idx % cases.len()];
        let (rx, re) = (r.random_range(0.0..1.0), r.random_range(0.0..1.0));
        let xi = random_kernel(&mut r, ctx.labels(), rx);
        let eta = random_kernel(&mut r, ctx.labels(), re);
        let d = direct_symbol(ctx, op, &xi, &eta).unwrap();
        let c = closed_symbol(&case.nu, &case.dc, &case.orbit, &xi, &eta).unwrap();
        let bound = symbol_truncation_bound(k01, k10, *q, &xi, &eta, ctx.cutoff()) + 1e-12 * (1.0 + c.norm());
        within += ((d - c).norm() <= bound) as usize;
        worst_ratio = worst_ratio.max((d - c).norm() / bound);
    }
    let mut fits = 0;
    let mut finite = 0;
    for (ci, case) in cases.iter().enumerate() {
        for p in [0.0, 1.0] {
            for eps in [0.5, 1.0] {
                let fit = growth_bound_fit(&case.nu, &case.dc, &case.orbit, p, eps, 100, 70 + ci as u64).unwrap();
                fits += 1;
                finite += fit.is_finite() as usize;
            }
        }
    }
    outcome(
        within == pairs && finite == fits,
        format!(
            "{within}/{pairs} symbol pairs within remainder (max ratio {worst_ratio:.3}); {finite}/{fits} growth fits finite over {} fixtures",
            cases.len()
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let (mut unit, mut hom) = (0.0f64, 0.0f64);
    for two_l in 0..=8u32 {
        for _ in 0..10 {
            let g = GroupPoint::random(&mut r);
            let h = GroupPoint::random(&mut r);
            let dg = wigner_matrix(two_l, &g);
            unit = unit.max(max_abs(&(dg.dot(&dagger(&dg)) - identity(dg.nrows()))));
            hom = hom.max(max_abs(&(wigner_matrix(two_l, &g.compose(&h)) - dg.dot(&wigner_matrix(two_l, &h)))));
        }
    }
    let band = BandLimit { n_max: 2, two_l_max: 4 };
    let grid = HaarGrid::for_band(band);
    let modes = band.modes();
    let (mut rt, mut pl) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let fc = random_band_limited(&mut r, band, 1.0);
        let gc = random_band_limited(&mut r, band, 1.0);
        let f = synthesize(&fc, grid.clone());
        let back = forward_fourier(&f, &modes).unwrap();
        for (node, v) in grid.nodes().iter().zip(&f.values) {
            rt = rt.max((resynthesize(&back, node) - v).norm());
        }
        let g = synthesize(&gc, grid.clone());
        pl = pl.max(plancherel_check(&f, &g, &modes).unwrap().err);
    }
    outcome(
        unit <= 1e-10 && hom <= 1e-10 && rt < 1e-8 && pl < 1e-8,
        format!("l<=4 unitarity {unit:.1e}, homomorphism {hom:.1e}; round trip {rt:.1e}, Plancherel {pl:.1e}"),
    )
}

fn criterion_9() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_wnfi"))
        .args(["verify", "all", "--fixture", "massive-scalar-small", "--quiet"])
        .env_remove("WNFI_FIXTURE_DIR")
        .output()
        .expect("binary runs");
    let code = out.status.code();
    outcome(code == Some(0), format!("exit status {code:?}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, u64); 9] = [
        ("pairing combinatorics", criterion_1, 5),
        ("quadratic identity", criterion_2, 10),
        ("exponential identity", criterion_3, 60),
        ("Fresnel limit", criterion_4, 30),
        ("measure characteristic functional", criterion_5, 60),
        ("quadratic-form bounds", criterion_6, 5),
        ("symbols", criterion_7, 120),
        ("harmonics", criterion_8, 30),
        ("end-to-end all suites", criterion_9, 300),
    ];
    let mut all = true;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*budget);
        let pass = o.pass && in_time;
        all &= pass;
        println!(
            "criterion {}: {} {name}: {} [{:.2} s, budget {budget} s{}]",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64(),
            if in_time { "" } else { ", over budget" }
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
