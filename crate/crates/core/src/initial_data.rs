//! Fan boundary curves, the maps h± that pull the boundary traces back to
//! t = 0 along Burgers characteristics, and the initial datum built from
//! them.

use serde::{Deserialize, Serialize};

use crate::burgers::{CharSolution, Cone, ShockBounds};
use crate::error::{Error, Result};
use crate::euler_map::{state_from_wave, EulerState};
use crate::ode_epsilon::{traces_at, EpsDeltaSolution, TraceSpec, LAMBDA_MINUS, LAMBDA_PLUS, W1};
use crate::profiles::{f0, LambdaProfile, Mode, Piece, Segment, Side};
use crate::quad::{cumulative_dt, integrate_from_zero};
use crate::report::Report;
use crate::roots::{self, Tol};
use crate::subsolution::{speeds, FanConstants};

const LOG_SPAN: f64 = 60.0;

/// One boundary curve `ν̃(t) = ∫_0^t ν`. Between grid nodes it is the cubic
/// Hermite interpolant of the node values and speeds; below the grid the
/// integral is taken directly with ε_Δ = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FanCurve {
    pub side: Side,
    pub grid: Vec<f64>,
    pub nu_tilde: Vec<f64>,
    pub nu: Vec<f64>,
    pub spec: TraceSpec,
    pub consts: FanConstants,
}

impl FanCurve {
    fn speed_at_floor(&self, s: f64) -> f64 {
        match speeds(&traces_at(s, &self.spec), self.consts.rho1, 0.0) {
            Ok(sp) if self.side == Side::Left => sp.nu_minus,
            Ok(sp) => sp.nu_plus,
            Err(_) => f64::NAN,
        }
    }

    fn interval(&self, h: f64) -> usize {
        let n = self.grid.len();
        match self.grid.binary_search_by(|g| g.partial_cmp(&h).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    pub fn eval(&self, h: f64) -> f64 {
        self.eval_with_speed(h).0
    }

    pub fn speed(&self, h: f64) -> f64 {
        self.eval_with_speed(h).1
    }

    /// `(ν̃(h), ν̃'(h))`.
    pub fn eval_with_speed(&self, h: f64) -> (f64, f64) {
        let n = self.grid.len();
        if h <= 0.0 {
            return (0.0, self.speed_at_floor(0.0));
        }
        if h < self.grid[0] {
            let v = integrate_from_zero(|s| self.speed_at_floor(s), h, LOG_SPAN);
            return (v, self.speed_at_floor(h));
        }
        if h >= self.grid[n - 1] {
            let v = self.nu[n - 1];
            return (self.nu_tilde[n - 1] + v * (h - self.grid[n - 1]), v);
        }
        let i = self.interval(h);
        let (t0, t1) = (self.grid[i], self.grid[i + 1]);
        let w = t1 - t0;
        let s = (h - t0) / w;
        let (y0, y1, m0, m1) = (self.nu_tilde[i], self.nu_tilde[i + 1], self.nu[i], self.nu[i + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * w * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * w * m1;
        let d = (6.0 * s2 - 6.0 * s) * (y0 - y1) / w + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (3.0 * s2 - 2.0 * s) * m1;
        (v, d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FanPartition {
    pub minus: FanCurve,
    pub plus: FanCurve,
    pub bounds: ShockBounds,
}

impl FanPartition {
    pub fn length(&self, t: f64) -> f64 {
        self.plus.eval(t) - self.minus.eval(t)
    }

    /// Rows `(t, ν̃₋, ν̃₊, s₋, s₊)` on the solution grid.
    pub fn rows(&self) -> Vec<[f64; 5]> {
        (0..self.minus.grid.len())
            .map(|i| {
                let t = self.minus.grid[i];
                [
                    t,
                    self.minus.nu_tilde[i],
                    self.plus.nu_tilde[i],
                    self.bounds.s_minus_slope * t,
                    self.bounds.s_plus_slope * t,
                ]
            })
            .collect()
    }
}

/// Ray slopes `½(λ₊ + λ₋ ∓ ζ₂/T)`; a zero band is allowed here.
pub fn ray_bounds(spec: &TraceSpec) -> ShockBounds {
    let mid = 0.5 * (LAMBDA_MINUS + LAMBDA_PLUS);
    let half = 0.5 * spec.zeta2_over_t;
    ShockBounds { s_minus_slope: mid - half, s_plus_slope: mid + half }
}

/// Integrates the interface speeds of `sol` and checks that the curves
/// stay outside the rays: `ν̃₋ < s₋` and `ν̃₊ > s₊` at every node.
pub fn fan_curves(sol: &EpsDeltaSolution) -> Result<FanPartition> {
    let n = sol.grid.len();
    let mut nu_m = Vec::with_capacity(n);
    let mut nu_p = Vec::with_capacity(n);
    for i in 0..n {
        let is = sol.interface(i)?;
        nu_m.push(is.nu_minus);
        nu_p.push(is.nu_plus);
    }
    let curve = |side: Side, nu: Vec<f64>| {
        let mut c = FanCurve {
            side,
            grid: sol.grid.clone(),
            nu_tilde: Vec::new(),
            nu: nu.clone(),
            spec: sol.spec,
            consts: sol.consts,
        };
        let v0 = integrate_from_zero(|s| c.speed_at_floor(s), sol.grid[0], LOG_SPAN);
        c.nu_tilde = cumulative_dt(&nu, &sol.grid, sol.du).into_iter().map(|v| v0 + v).collect();
        c
    };
    let fan =
        FanPartition { minus: curve(Side::Left, nu_m), plus: curve(Side::Right, nu_p), bounds: ray_bounds(&sol.spec) };
    for r in fan.rows() {
        if !(r[1] < r[3] && r[2] > r[4] && r[1] < r[2]) {
            return Err(Error::Sandwich { t: r[0] });
        }
    }
    Ok(fan)
}

/// `h` on one side: the time at which the characteristic from `x` meets
/// the fan boundary, `ν̃(h) = x + h λ^ν(h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullbackMap {
    pub side: Side,
    pub curve: FanCurve,
    /// Largest time covered; `x_end` is where its characteristic starts.
    pub h_max: f64,
    pub x_end: f64,
    /// `(x, h(x))` on a signed logarithmic grid, ordered by |x|.
    pub samples: Vec<[f64; 2]>,
    /// `1/(ν(0) - λ^ν(0))`.
    pub slope_at_zero: f64,
    /// `h(x)/x` at the smallest nonzero sample.
    pub secant_slope: f64,
}

impl PullbackMap {
    fn spec(&self) -> &TraceSpec {
        &self.curve.spec
    }

    fn residual(&self, h: f64, x: f64) -> f64 {
        self.curve.eval(h) - h * self.spec().lambda(self.side, h) - x
    }

    fn contains(&self, x: f64) -> bool {
        match self.side {
            Side::Left => x >= self.x_end && x <= 0.0,
            Side::Right => x >= 0.0 && x <= self.x_end,
        }
    }

    pub fn h(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        if !self.contains(x) {
            return Err(Error::Bracket { lo: 0.0, hi: self.h_max, context: "pullback: x outside the covered region" });
        }
        roots::bracketed(|h| self.residual(h, x), 0.0, self.h_max, Tol::full(), "pullback time")
    }

    /// Datum value `λ^ν(h(x))`.
    pub fn lambda(&self, x: f64) -> Result<f64> {
        Ok(self.spec().lambda(self.side, self.h(x)?))
    }

    /// `λ^ν'(h) h'(x)` with `h' = 1/(ν̃'(h) - λ^ν(h) - h λ^ν'(h))`.
    pub fn lambda_dx(&self, x: f64) -> Result<f64> {
        let h = self.h(x)?;
        if h == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let (l, dl) = self.spec().eval(self.side, h);
        Ok(dl / (self.curve.speed(h) - l - h * dl))
    }

    pub fn h_dx(&self, x: f64) -> Result<f64> {
        let h = self.h(x)?;
        if h == 0.0 {
            return Ok(self.slope_at_zero);
        }
        let (l, dl) = self.spec().eval(self.side, h);
        Ok(1.0 / (self.curve.speed(h) - l - h * dl))
    }

    /// True where the datum has reached its plateau in floating point.
    pub fn at_plateau(&self, x: f64) -> bool {
        let p = match self.side {
            Side::Left => LAMBDA_MINUS,
            Side::Right => LAMBDA_PLUS,
        };
        self.lambda(x).map(|v| v == p).unwrap_or(false)
    }

    pub fn hypothesis_check(&self) -> Report {
        hypothesis_check(self.side, &self.samples, self.slope_at_zero)
    }
}

/// Sample abscissae: `x = 0`, then `|x| = 10^(k/per_decade)` from 1e-8
/// up to `|x_end|` and `x_end` itself.
pub fn sample_points(side: Side, x_end: f64, per_decade: usize) -> Vec<f64> {
    let sign = if side == Side::Left { -1.0 } else { 1.0 };
    let mut xs = vec![0.0];
    let top = x_end.abs().log10();
    let mut k = -8 * per_decade as i64;
    loop {
        let a = 10f64.powf(k as f64 / per_decade as f64);
        if a.log10() >= top - 1e-12 {
            break;
        }
        xs.push(sign * a);
        k += 1;
    }
    xs.push(x_end);
    xs
}

pub fn pullback_h(side: Side, fan: &FanPartition) -> Result<PullbackMap> {
    let curve = match side {
        Side::Left => fan.minus.clone(),
        Side::Right => fan.plus.clone(),
    };
    let spec = curve.spec;
    let h_max = *curve.grid.last().expect("nonempty grid");
    let x_end = curve.eval(h_max) - h_max * spec.lambda(side, h_max);
    // the bisection relies on a fixed sign of the denominator of h'
    let sign = if side == Side::Left { -1.0 } else { 1.0 };
    for &t in &curve.grid {
        let (l, dl) = spec.eval(side, t);
        let den = curve.speed(t) - l - t * dl;
        if !(sign * den > 0.0) {
            return Err(Error::Geometry(format!("pullback not monotone at t = {t}")));
        }
    }
    let sp0 = speeds(&traces_at(0.0, &spec), curve.consts.rho1, 0.0)?;
    let nu0 = if side == Side::Left { sp0.nu_minus } else { sp0.nu_plus };
    let slope_at_zero = 1.0 / (nu0 - spec.lambda(side, 0.0));
    let mut map = PullbackMap { side, curve, h_max, x_end, samples: Vec::new(), slope_at_zero, secant_slope: f64::NAN };
    let mut samples = Vec::new();
    for x in sample_points(side, x_end, 40) {
        samples.push([x, map.h(x)?]);
    }
    map.secant_slope = samples[1][1] / samples[1][0];
    map.samples = samples;
    Ok(map)
}

/// Growth envelope `(1 + √|log|x|| + |log|log|x|||)²` for `|h''|·|x|`.
pub fn envelope(x: f64) -> f64 {
    let l = x.abs().ln().abs();
    let e = 1.0 + l.sqrt() + l.ln().abs();
    e * e
}

/// Checks h(0) = 0, the slope sign, strict monotonicity in |x| and the
/// second-derivative envelope. The envelope check compares the largest
/// `|h''x|/envelope` over the finest sampled decade [1e-8, 1e-7] with the
/// one over [1e-3, 1e-2]; growth by more than a factor 10 fails.
pub fn hypothesis_check(side: Side, samples: &[[f64; 2]], slope_at_zero: f64) -> Report {
    let mut rep = Report::new(match side {
        Side::Left => "pullback h_minus",
        Side::Right => "pullback h_plus",
    });
    let at_zero = samples.iter().find(|s| s[0] == 0.0).map(|s| s[1].abs()).unwrap_or(f64::INFINITY);
    let nonzero: Vec<[f64; 2]> = samples.iter().copied().filter(|s| s[0] != 0.0).collect();
    let smallest = nonzero.first().map(|s| s[1].abs()).unwrap_or(f64::INFINITY);
    rep.check(
        "h_at_zero",
        at_zero == 0.0 && smallest < 1e-3,
        smallest,
        "h(0) = 0 and |h| < 1e-3 at the smallest sample",
    );
    rep.value("slope_at_zero", slope_at_zero);
    let sign_ok = match side {
        Side::Left => slope_at_zero < 0.0,
        Side::Right => slope_at_zero > 0.0,
    };
    rep.check("slope_sign", sign_ok, slope_at_zero, if side == Side::Left { "< 0" } else { "> 0" });
    let mono = nonzero.windows(2).all(|w| w[1][1].abs() > w[0][1].abs());
    rep.check("monotone", mono, if mono { 1.0 } else { 0.0 }, "|h| strictly increasing in |x|");

    let mut fine = 0.0f64;
    let mut coarse = 0.0f64;
    for w in nonzero.windows(3) {
        let ([x0, h0], [x1, h1], [x2, h2]) = (w[0], w[1], w[2]);
        let a = x1.abs();
        if !(1e-8..=1e-2).contains(&a) {
            continue;
        }
        let (d0, d1) = (x1 - x0, x2 - x1);
        let h2nd = 2.0 * ((h2 - h1) / d1 - (h1 - h0) / d0) / (d0 + d1);
        // rounding floor of the difference quotient
        let noise = 8.0 * f64::EPSILON * (h0.abs() + h1.abs() + h2.abs()) / (d0.abs() * d1.abs());
        let v = ((h2nd.abs() - noise).max(0.0)) * a / envelope(a);
        if a <= 1e-7 {
            fine = fine.max(v);
        }
        if a >= 1e-3 {
            coarse = coarse.max(v);
        }
    }
    rep.value("envelope_ratio_fine", fine);
    rep.value("envelope_ratio_coarse", coarse);
    let ok = fine == 0.0 || fine <= 10.0 * coarse;
    let growth = if coarse > 0.0 {
        fine / coarse
    } else if fine == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    rep.check("envelope_n2", ok, growth, "fine/coarse <= 10");
    rep
}

/// Samples of an arbitrary map on the standard grid, for checking the
/// hypothesis test itself.
pub fn synthetic_samples<F: Fn(f64) -> f64>(side: Side, x_end: f64, h: F) -> Vec<[f64; 2]> {
    sample_points(side, x_end, 40).into_iter().map(|x| [x, h(x)]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatumRow {
    pub x2: f64,
    pub lambda1: f64,
    pub state: EulerState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialDatum {
    pub profile: LambdaProfile,
    pub rows: Vec<DatumRow>,
}

/// Stitches the pulled-back traces to the plateaus `λ₋` (left of the left
/// map's range) and `λ₊`, and maps the result to Euler states with
/// `w₁ = 4√2`.
pub fn build_initial_datum(
    left: &PullbackMap,
    right: &PullbackMap,
    t_collapse: f64,
    zeta1: f64,
    zeta2: f64,
    field_points: usize,
) -> Result<InitialDatum> {
    let (xl, xr) = (left.x_end, right.x_end);
    if !(xl > -zeta1 && xr < zeta1) {
        return Err(Error::Geometry(format!("pulled-back region [{xl}, {xr}] leaves |x2| <= zeta1 = {zeta1}")));
    }
    for (map, plateau) in [(left, LAMBDA_MINUS), (right, LAMBDA_PLUS)] {
        let gap = (map.lambda(map.x_end)? - plateau).abs();
        if gap > 1e-10 {
            return Err(Error::Stitch { x2: map.x_end, gap });
        }
    }
    let seg = |lo, hi, piece| Segment { lo, hi, piece };
    let profile = LambdaProfile {
        lambda_minus: LAMBDA_MINUS,
        lambda_plus: LAMBDA_PLUS,
        collapse_time: t_collapse,
        zeta1,
        zeta2,
        mode: Mode::Datum,
        segments: vec![
            seg(f64::NEG_INFINITY, xl, Piece::Constant { value: LAMBDA_MINUS }),
            seg(xl, 0.0, Piece::Traced { map: Box::new(left.clone()) }),
            seg(0.0, xr, Piece::Traced { map: Box::new(right.clone()) }),
            seg(xr, f64::INFINITY, Piece::Constant { value: LAMBDA_PLUS }),
        ],
        collapse: None,
    };
    profile.validate()?;
    let mut rows = Vec::with_capacity(field_points);
    let span = 1.5 * zeta1;
    for k in 0..field_points {
        let x2 = -span + 2.0 * span * k as f64 / (field_points.max(2) - 1) as f64;
        let lambda1 = profile.eval(x2)?;
        rows.push(DatumRow { x2, lambda1, state: state_from_wave(lambda1, W1)? });
    }
    Ok(InitialDatum { profile, rows })
}

/// Characteristic solver for the pulled-back datum; the two families are
/// separated by the rays from the origin.
pub fn datum_solver(datum: &InitialDatum, bounds: ShockBounds) -> CharSolution {
    let cone = Cone { bounds, start: 0.0, left_split: 0.0, right_split: 0.0 };
    CharSolution::with_cone(datum.profile.clone(), 1e-10, cone)
}

/// Largest deviation of the forward solution along `ν̃±(t)` from the
/// prescribed traces over grid times in `[t_lo, t_hi]`.
pub fn round_trip(datum: &InitialDatum, fan: &FanPartition, t_lo: f64, t_hi: f64) -> Result<f64> {
    let sol = datum_solver(datum, fan.bounds);
    let spec = fan.minus.spec;
    let mut worst = 0.0f64;
    for (i, &t) in fan.minus.grid.iter().enumerate() {
        if t < t_lo || t > t_hi {
            continue;
        }
        for (side, x) in [(Side::Left, fan.minus.nu_tilde[i]), (Side::Right, fan.plus.nu_tilde[i])] {
            let v = sol.eval_solution(t, x)?;
            worst = worst.max((v - spec.lambda(side, t)).abs());
        }
    }
    Ok(worst)
}

/// Largest `|λ⁰(x) - (a f0(h(x)) + b)|` over samples with |x| < zeta_bar.
pub fn composite_form_gap(map: &PullbackMap, zeta_bar: f64) -> Result<f64> {
    let spec = map.curve.spec;
    let (a, b) = match map.side {
        Side::Left => (spec.a_minus, LAMBDA_MINUS - spec.zeta2_over_t),
        Side::Right => (-spec.a_plus, LAMBDA_PLUS + spec.zeta2_over_t),
    };
    let mut worst = 0.0f64;
    for s in &map.samples {
        if s[0].abs() < zeta_bar {
            if s[1] > spec.delta {
                return Err(Error::Geometry(format!("h({}) = {} beyond delta inside zeta_bar", s[0], s[1])));
            }
            worst = worst.max((map.lambda(s[0])? - (a * f0(s[1]) + b)).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode_epsilon::{picard_solve, PicardOptions};
    use approx::assert_abs_diff_eq;
    use std::sync::OnceLock;

    struct Fixture {
        fan: FanPartition,
        left: PullbackMap,
        right: PullbackMap,
    }

    fn fixture() -> &'static Fixture {
        static F: OnceLock<Fixture> = OnceLock::new();
        F.get_or_init(|| {
            let spec = TraceSpec::new(0.05, 0.03, 0.06, 0.05, 0.05).unwrap();
            let opts = PicardOptions { grid_size: 512, ..Default::default() };
            let sol = picard_solve(&spec, &FanConstants::default(), &opts).unwrap();
            let fan = fan_curves(&sol).unwrap();
            let left = pullback_h(Side::Left, &fan).unwrap();
            let right = pullback_h(Side::Right, &fan).unwrap();
            Fixture { fan, left, right }
        })
    }

    #[test]
    fn frozen_baseline_curves_are_rays() {
        let opts = PicardOptions { grid_size: 256, ..Default::default() };
        let sol = picard_solve(&TraceSpec::plateau(), &FanConstants::default(), &opts).unwrap();
        let fan = fan_curves(&sol).unwrap();
        let (nm, np) = ((-8f64.sqrt() - 26f64.sqrt()) / 3.0, (26f64.sqrt() - 32f64.sqrt()) / 6.0);
        for (i, &t) in fan.minus.grid.iter().enumerate() {
            assert!((fan.minus.nu_tilde[i] - nm * t).abs() < 1e-13 * (1.0 + t));
            assert!((fan.plus.nu_tilde[i] - np * t).abs() < 1e-13 * (1.0 + t));
        }
    }

    #[test]
    fn fan_length_matches_solution_l() {
        let spec = TraceSpec::new(0.05, 0.03, 0.06, 0.05, 0.05).unwrap();
        let opts = PicardOptions { grid_size: 512, ..Default::default() };
        let sol = picard_solve(&spec, &FanConstants::default(), &opts).unwrap();
        let fan = fan_curves(&sol).unwrap();
        for i in (0..sol.grid.len()).step_by(97) {
            let t = sol.grid[i];
            assert!((fan.length(t) - sol.l[i]).abs() < 1e-9 * t, "t = {t}");
        }
    }

    #[test]
    fn hermite_curve_is_continuous_and_consistent() {
        let c = &fixture().fan.minus;
        for i in [0usize, 5, 100, 700] {
            let t = c.grid[i];
            assert_abs_diff_eq!(c.eval(t), c.nu_tilde[i], epsilon = 1e-15 * (1.0 + t));
            let h = t * 1e-5;
            let fd = (c.eval(t + h) - c.eval(t - h)) / (2.0 * h);
            assert!((fd - c.speed(t)).abs() < 1e-6);
        }
        let t0 = c.grid[0];
        assert!((c.eval(t0 * (1.0 - 1e-9)) - c.nu_tilde[0]).abs() < 1e-9 * t0 * 10.0);
    }

    #[test]
    fn pullback_origin_and_slopes() {
        let f = fixture();
        assert_eq!(f.left.h(0.0).unwrap(), 0.0);
        assert!(f.left.slope_at_zero < 0.0 && f.right.slope_at_zero > 0.0);
        // 1/(nu_-(0) - sqrt2 + zeta2/T) with nu_-(0) close to the Riemann speed
        assert!((f.left.slope_at_zero + 0.25).abs() < 0.01, "{}", f.left.slope_at_zero);
        // λ reaches its offset only like a·f0(h), so the secant closes in
        // logarithmically; the gap is of order slope²·a·f0(h)
        for m in [&f.left, &f.right] {
            let h1 = m.samples[1][1].abs();
            let bound = 2.0 * m.slope_at_zero.powi(2) * 0.05 * crate::profiles::f0_eval(h1).unwrap();
            let gap = (m.secant_slope - m.slope_at_zero).abs();
            assert!(gap > 0.0 && gap < bound, "{gap} vs {bound}");
        }
    }

    #[test]
    fn pullback_residual_small() {
        let f = fixture();
        for s in f.left.samples.iter().chain(&f.right.samples) {
            let map = if s[0] <= 0.0 { &f.left } else { &f.right };
            assert!(map.residual(s[1], s[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn pullback_derivative_matches_difference() {
        let f = fixture();
        for x in [-0.1f64, -1e-3, 1e-3, 0.1] {
            let map = if x < 0.0 { &f.left } else { &f.right };
            let h = 1e-6 * x.abs();
            let fd = (map.lambda(x + h).unwrap() - map.lambda(x - h).unwrap()) / (2.0 * h);
            let d = map.lambda_dx(x).unwrap();
            assert!((fd - d).abs() < 1e-5 * (1.0 + d.abs()), "x = {x}: {fd} vs {d}");
        }
    }

    #[test]
    fn outside_region_rejected() {
        let f = fixture();
        assert!(f.left.h(f.left.x_end * 1.01).is_err());
        assert!(f.left.h(0.01).is_err());
    }

    #[test]
    fn hypotheses_hold_for_reconstruction() {
        let f = fixture();
        for map in [&f.left, &f.right] {
            let rep = map.hypothesis_check();
            assert!(rep.passed(), "{}", rep.to_text());
        }
    }

    #[test]
    fn synthetic_identity_passes_and_sqrt_fails() {
        let id = synthetic_samples(Side::Right, 0.1, |x| x);
        assert!(hypothesis_check(Side::Right, &id, 1.0).passed());
        let sq = synthetic_samples(Side::Right, 0.1, f64::sqrt);
        let rep = hypothesis_check(Side::Right, &sq, f64::INFINITY);
        assert!(!rep.get_check("envelope_n2").unwrap().pass);
    }

    #[test]
    fn datum_far_field_and_form() {
        let f = fixture();
        let d = build_initial_datum(&f.left, &f.right, 2.0, 0.3, 0.1, 101).unwrap();
        let l = state_from_wave(d.profile.eval(-0.31).unwrap(), W1).unwrap();
        let r = state_from_wave(d.profile.eval(0.31).unwrap(), W1).unwrap();
        assert_abs_diff_eq!(l.rho, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l.v2(), 8f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(r.rho, 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.v2(), 0.0, epsilon = 1e-14);
        assert!(composite_form_gap(&f.left, 0.075).unwrap() < 1e-12);
        assert!(composite_form_gap(&f.right, 0.075).unwrap() < 1e-12);
    }

    #[test]
    fn round_trip_reproduces_traces() {
        let f = fixture();
        let d = build_initial_datum(&f.left, &f.right, 2.0, 0.3, 0.1, 11).unwrap();
        let dev = round_trip(&d, &f.fan, 1e-4, 0.03).unwrap();
        assert!(dev < 1e-6, "{dev}");
    }

    #[test]
    fn round_trip_detects_shifted_curves() {
        let f = fixture();
        let d = build_initial_datum(&f.left, &f.right, 2.0, 0.3, 0.1, 11).unwrap();
        let mut fan = f.fan.clone();
        for (v, t) in fan.minus.nu_tilde.iter_mut().zip(&fan.minus.grid) {
            *v += 0.05 * t;
        }
        let dev = round_trip(&d, &fan, 1e-4, 0.03).unwrap();
        assert!(dev > 1e-6, "{dev}");
    }

    #[test]
    fn datum_json_round_trip() {
        let f = fixture();
        let d = build_initial_datum(&f.left, &f.right, 2.0, 0.3, 0.1, 11).unwrap();
        let back = crate::profiles::from_json(&crate::profiles::to_json(&d.profile)).unwrap();
        assert_eq!(back, d.profile);
    }
}
