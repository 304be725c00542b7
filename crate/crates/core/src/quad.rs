//! Quadrature on uniform grids and fixed Gauss-Legendre panels.

use std::f64::consts::PI;

/// Running integral of uniformly spaced samples, exact for cubics.
/// Interior steps use the four-point rule centred on the step; the first
/// and last steps use the one-sided variant.
pub fn cumulative(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n < 4 {
        for i in 1..n {
            out[i] = out[i - 1] + 0.5 * h * (y[i - 1] + y[i]);
        }
        return out;
    }
    let c = h / 24.0;
    for i in 1..n {
        let step = if i == 1 {
            9.0 * y[0] + 19.0 * y[1] - 5.0 * y[2] + y[3]
        } else if i == n - 1 {
            y[n - 4] - 5.0 * y[n - 3] + 19.0 * y[n - 2] + 9.0 * y[n - 1]
        } else {
            -y[i - 2] + 13.0 * y[i - 1] + 13.0 * y[i] - y[i + 1]
        };
        out[i] = out[i - 1] + c * step;
    }
    out
}

/// Running `∫ y dt` on a log grid `t = e^u` with spacing `h` in `u`. The
/// part of `y` equal to `y[0]` is integrated exactly.
pub fn cumulative_dt(y: &[f64], t: &[f64], h: f64) -> Vec<f64> {
    let Some(&y0) = y.first() else {
        return Vec::new();
    };
    let dev: Vec<f64> = y.iter().zip(t).map(|(v, s)| (v - y0) * s).collect();
    cumulative(&dev, h).into_iter().zip(t).map(|(c, s)| c + y0 * (s - t[0])).collect()
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre integral of `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(mid + 0.5 * h * xi);
        }
        sum += 0.5 * h * s;
    }
    sum
}

/// `∫_0^t φ(s) ds` for integrands with at worst a `1/(s |log s|)` type
/// singularity at 0, via `s = e^u` on `[log t - span, log t]`.
pub fn integrate_from_zero<F: FnMut(f64) -> f64>(mut phi: F, t: f64, span: f64) -> f64 {
    let ut = t.ln();
    integrate(
        |u| {
            let s = u.exp();
            phi(s) * s
        },
        ut - span,
        ut,
        120,
        16,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_dt_exact_for_constants() {
        let h = 0.07;
        let t: Vec<f64> = (0..200).map(|i| (-12.0 + i as f64 * h).exp()).collect();
        let y = vec![-1.7; t.len()];
        let c = cumulative_dt(&y, &t, h);
        for (ci, ti) in c.iter().zip(&t) {
            assert!((ci + 1.7 * (ti - t[0])).abs() <= 1e-16 * ti.max(1.0) * 4.0);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_is_exact_for_cubics() {
        let h = 0.1;
        let y: Vec<f64> = (0..20)
            .map(|i| {
                let x = i as f64 * h;
                x * x * x - 2.0 * x
            })
            .collect();
        let c = cumulative(&y, h);
        for (i, ci) in c.iter().enumerate() {
            let x = i as f64 * h;
            assert!((ci - (x.powi(4) / 4.0 - x * x)).abs() < 1e-13);
        }
    }

    #[test]
    fn cumulative_converges_at_fourth_order() {
        let err = |n: usize| {
            let h = 1.0 / (n - 1) as f64;
            let y: Vec<f64> = (0..n).map(|i| (i as f64 * h).exp()).collect();
            (cumulative(&y, h)[n - 1] - (1f64.exp() - 1.0)).abs()
        };
        let ratio = err(21) / err(41);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn singular_integral_from_zero() {
        // ∫ ds / (s log² s) over [t e^{-span}, t] = 1/|log t| - 1/(|log t| + span)
        let t: f64 = 1e-3;
        let span = 700.0;
        let v = integrate_from_zero(|s| 1.0 / (s * s.ln().powi(2)), t, span);
        let l = t.ln().abs();
        assert!((v - (1.0 / l - 1.0 / (l + span))).abs() < 1e-12);
    }
}
