//! Gauss–Legendre rules, composite panels, and Richardson extrapolation.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre integral of `f` over `[a, b]` split into
/// `panels` equal pieces.
pub fn composite_gl<F>(f: F, a: f64, b: f64, panels: usize, rule: &(Vec<f64>, Vec<f64>)) -> C64
where
    F: Fn(f64) -> C64,
{
    let h = (b - a) / panels as f64;
    let (xs, ws) = rule;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut panel = C64::new(0.0, 0.0);
        for (x, w) in xs.iter().zip(ws) {
            panel += f(mid + 0.5 * h * x) * *w;
        }
        acc += panel * (0.5 * h);
    }
    acc
}

/// Richardson table for values at step sizes `h, h/ratio, h/ratio², …`
/// with an error expansion in integer powers `h, h², …`. Returns the
/// extrapolated value and the last correction size.
pub fn richardson(values: &[C64], ratio: f64) -> (C64, f64) {
    assert!(!values.is_empty());
    let mut row = values.to_vec();
    let mut last_delta = f64::INFINITY;
    let mut k = 1;
    while row.len() > 1 {
        let f = ratio.powi(k);
        let next: Vec<C64> = row
            .windows(2)
            .map(|w| (w[1] * f - w[0]) / (f - 1.0))
            .collect();
        last_delta = (next[next.len() - 1] - row[row.len() - 1]).norm();
        row = next;
        k += 1;
    }
    (row[0], last_delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn composite_gaussian() {
        let rule = gauss_legendre(10);
        let v = composite_gl(|x| C64::new((-x * x).exp(), 0.0), -8.0, 8.0, 16, &rule);
        assert!((v.re - PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn richardson_removes_polynomial_error() {
        let f = |h: f64| C64::new(2.0 + 3.0 * h - 5.0 * h * h, h * h);
        let vals: Vec<C64> = (0..3).map(|i| f(0.1 / 2f64.powi(i))).collect();
        let (v, _) = richardson(&vals, 2.0);
        assert!((v - C64::new(2.0, 0.0)).norm() < 1e-13);
    }
}
