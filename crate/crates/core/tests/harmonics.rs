use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use wnfi_core::harmonics::{
    character, forward_fourier, l2_inner, plancherel_check, random_band_limited, synthesize, wigner_matrix,
    BandLimit, GroupPoint, HaarGrid, SampledFunction,
};
use wnfi_core::linalg::max_abs;
use wnfi_core::sampling::rng;
use wnfi_core::Mode;

#[test]
fn wigner_homomorphism_to_l4() {
    let mut r = rng(31);
    for two_l in 0..=8 {
        for _ in 0..10 {
            let (g, h) = (GroupPoint::random(&mut r), GroupPoint::random(&mut r));
            let lhs = wigner_matrix(two_l, &g.compose(&h));
            let rhs = wigner_matrix(two_l, &g).dot(&wigner_matrix(two_l, &h));
            assert!(max_abs(&(lhs - rhs)) <= 1e-10, "2l={two_l}");
        }
    }
}

#[test]
fn wigner_at_identity() {
    for two_l in 0..=6 {
        let d = wigner_matrix(two_l, &GroupPoint::identity());
        for ((i, j), z) in d.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((z - C64::new(want, 0.0)).norm() <= 1e-14);
        }
    }
}

#[test]
fn haar_grid_mass() {
    let grid = HaarGrid::for_band(BandLimit { n_max: 1, two_l_max: 2 });
    let total: f64 = grid.weights().iter().sum();
    assert!((total - 4.0 * PI).abs() <= 1e-12);
}

#[test]
fn character_orthogonality() {
    let band = BandLimit { n_max: 2, two_l_max: 4 };
    let grid = HaarGrid::for_band(band);
    let modes = band.modes();
    for (a, m) in modes.iter().enumerate() {
        for (b, k) in modes.iter().enumerate() {
            let d = m.dim().max(k.dim());
            for (i, j) in [(0, 0), (0, d - 1), (d - 1, 0)] {
                if i >= m.dim() || j >= m.dim() || i >= k.dim() || j >= k.dim() {
                    continue;
                }
                let f = SampledFunction::from_fn(grid.clone(), |g| character(*m, g)[[i, j]]);
                let h = SampledFunction::from_fn(grid.clone(), |g| character(*k, g)[[i, j]]);
                let got = l2_inner(&f, &h);
                let want = if a == b { 4.0 * PI / m.dim() as f64 } else { 0.0 };
                assert!((got - C64::new(want, 0.0)).norm() <= 1e-10, "{m} {k} ({i},{j}): {got}");
            }
        }
    }
}

#[test]
fn plancherel_random_pairs() {
    let band = BandLimit { n_max: 2, two_l_max: 4 };
    let grid = HaarGrid::for_band(band);
    let modes = band.modes();
    let mut r = rng(32);
    for _ in 0..20 {
        let f = synthesize(&random_band_limited(&mut r, band, 1.0), grid.clone());
        let g = synthesize(&random_band_limited(&mut r, band, 1.0), grid.clone());
        assert!(plancherel_check(&f, &g, &modes).unwrap().err < 1e-8);
    }
}

#[test]
fn plancherel_single_character() {
    let band = BandLimit { n_max: 1, two_l_max: 2 };
    let grid = HaarGrid::for_band(band);
    let m = Mode::new(1, 2);
    let f = SampledFunction::from_fn(grid.clone(), |g| character(m, g)[[1, 1]]);
    let chk = plancherel_check(&f, &f, &band.modes()).unwrap();
    assert!(chk.err < 1e-10);
    assert!((chk.lhs - C64::new(4.0 * PI / 3.0, 0.0)).norm() < 1e-10);
}

#[test]
fn forward_fourier_recovers_coefficients() {
    let band = BandLimit { n_max: 1, two_l_max: 3 };
    let grid = HaarGrid::for_band(band);
    let coeffs = random_band_limited(&mut rng(33), band, 1.0);
    let back = forward_fourier(&synthesize(&coeffs, grid), &band.modes()).unwrap();
    for (m, a) in coeffs.iter() {
        let b = back.get(m).unwrap();
        assert!(max_abs(&(a - b)) <= 1e-10, "{m}");
    }
}

#[test]
fn columns_round_trip() {
    let band = BandLimit { n_max: 0, two_l_max: 1 };
    let grid = HaarGrid::for_band(band);
    let f = synthesize(&random_band_limited(&mut rng(34), band, 1.0), grid.clone());
    let text = f.to_columns();
    let g = SampledFunction::from_columns(grid, &text).unwrap();
    for (a, b) in f.values.iter().zip(&g.values) {
        assert!((a - b).norm() <= 1e-15 * (1.0 + a.norm()));
    }
}
