//! Burgers solutions by characteristics for piecewise monotone data.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::profiles::{atan_complement, LambdaProfile, Mode, Piece};
use crate::roots::{self, Tol};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockBounds {
    pub s_minus_slope: f64,
    pub s_plus_slope: f64,
}

pub fn shock_bounds(lambda_minus: f64, lambda_plus: f64, zeta2: f64, t_collapse: f64) -> Result<ShockBounds> {
    if !(lambda_minus > lambda_plus) {
        return Err(Error::Geometry("shock bounds need lambda_minus > lambda_plus".into()));
    }
    if !(zeta2 > 0.0) {
        return Err(Error::Domain { op: "shock_bounds", what: "zeta2", value: zeta2 });
    }
    if !(t_collapse > 0.0) {
        return Err(Error::Domain { op: "shock_bounds", what: "T", value: t_collapse });
    }
    let mid = 0.5 * (lambda_plus + lambda_minus);
    let half = 0.5 * zeta2 / t_collapse;
    Ok(ShockBounds { s_minus_slope: mid - half, s_plus_slope: mid + half })
}

/// Region after `start` where the two families are kept apart: queries
/// strictly between the rays are rejected, queries outside only see feet
/// left of `left_split` or right of `right_split`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cone {
    pub bounds: ShockBounds,
    pub start: f64,
    pub left_split: f64,
    pub right_split: f64,
}

#[derive(Debug, Clone)]
pub struct CharSolution {
    pub profile: LambdaProfile,
    pub root_tolerance: f64,
    pub cone: Option<Cone>,
}

/// Foot of a characteristic and the piece it was found on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Foot {
    pub r: f64,
    pub segment: usize,
}

impl CharSolution {
    /// For an initial-mode compression datum the cone opens at the collapse
    /// time; other profiles get no cone unless one is supplied.
    pub fn new(profile: LambdaProfile, root_tolerance: f64) -> Result<Self> {
        let cone = if profile.mode == Mode::Initial {
            let t = profile.collapse_time;
            let bounds = shock_bounds(profile.lambda_minus, profile.lambda_plus, profile.zeta2, t)?;
            Some(Cone {
                bounds,
                start: t,
                left_split: -profile.lambda_minus * t + profile.zeta2,
                right_split: -profile.lambda_plus * t - profile.zeta2,
            })
        } else {
            None
        };
        Ok(CharSolution { profile, root_tolerance, cone })
    }

    pub fn with_cone(profile: LambdaProfile, root_tolerance: f64, cone: Cone) -> Self {
        CharSolution { profile, root_tolerance, cone: Some(cone) }
    }

    fn position(&self, k: usize, r: f64, t: f64) -> Result<f64> {
        Ok(r + t * self.profile.eval_in(k, r)?)
    }

    pub fn char_foot(&self, t: f64, x2: f64) -> Result<Foot> {
        if !(t >= 0.0) {
            return Err(Error::Domain { op: "char_foot", what: "t", value: t });
        }
        let segs = &self.profile.segments;
        if t == 0.0 {
            return Ok(Foot { r: x2, segment: self.profile.segment_index(x2) });
        }
        let (first, last) = match self.cone {
            Some(c) if t >= c.start => {
                let tau = t - c.start;
                let (sm, sp) = (c.bounds.s_minus_slope * tau, c.bounds.s_plus_slope * tau);
                if x2 > sm && x2 < sp || (tau == 0.0 && x2 == 0.0) {
                    return Err(Error::ShockCone { t, x2 });
                }
                if x2 <= sm {
                    let last = segs.iter().rposition(|s| s.hi <= c.left_split).unwrap_or(0);
                    let edge = self.position(last, segs[last].hi, t)?;
                    if x2 >= edge {
                        return Err(Error::Bracket { lo: segs[last].hi, hi: segs[last].hi, context: "left family" });
                    }
                    (0, last)
                } else {
                    let first = segs.iter().position(|s| s.lo >= c.right_split).unwrap_or(segs.len() - 1);
                    let edge = self.position(first, segs[first].lo, t)?;
                    if x2 < edge {
                        return Err(Error::Bracket { lo: segs[first].lo, hi: segs[first].lo, context: "right family" });
                    }
                    (first, segs.len() - 1)
                }
            }
            _ => (0, segs.len() - 1),
        };
        // dispatch by the images of the breakpoints at time t
        let mut k = first;
        for (j, seg) in segs.iter().enumerate().take(last + 1).skip(first + 1) {
            if self.position(j, seg.lo, t)? <= x2 {
                k = j;
            } else {
                break;
            }
        }
        let seg = &segs[k];
        let r = if let Piece::Constant { value } = seg.piece {
            x2 - t * value
        } else {
            let phi = |r: f64| self.position(k, r, t).map(|p| p - x2).unwrap_or(f64::NAN);
            roots::bracketed(phi, seg.lo, seg.hi, Tol::default(), "characteristic foot")?
        };
        let residual = (self.position(k, r, t)? - x2).abs();
        if residual > self.root_tolerance * (1.0 + x2.abs()) {
            return Err(Error::NonConvergence { residual, context: "characteristic foot" });
        }
        if !matches!(seg.piece, Piece::Constant { .. }) {
            let d = self.profile.d1_in(k, r)?;
            if !(1.0 + t * d > 0.0) {
                return Err(Error::Crossing { r });
            }
        }
        Ok(Foot { r, segment: k })
    }

    pub fn eval_solution(&self, t: f64, x2: f64) -> Result<f64> {
        let foot = self.char_foot(t, x2)?;
        self.profile.eval_in(foot.segment, foot.r)
    }

    /// `∂ⁿλ/∂x2ⁿ`. Order 1 is `λ⁰'(r)/(1 + tλ⁰'(r))` at the foot; higher
    /// orders are central differences of the order below.
    pub fn eval_dx(&self, t: f64, x2: f64, n: u32) -> Result<f64> {
        match n {
            0 => self.eval_solution(t, x2),
            1 => {
                let foot = self.char_foot(t, x2)?;
                let d = self.profile.d1_in(foot.segment, foot.r)?;
                Ok(d / (1.0 + t * d))
            }
            _ => {
                let h = (1e-6 * x2.abs()).max(1e-12);
                let hi = self.eval_dx(t, x2 + h, n - 1)?;
                let lo = self.eval_dx(t, x2 - h, n - 1)?;
                Ok((hi - lo) / (2.0 * h))
            }
        }
    }
}

/// Magnitude that may be far below the smallest double, stored as
/// `log|v| = w - exp(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TinyMagnitude {
    pub sign: f64,
    pub s: f64,
    pub w: f64,
}

impl TinyMagnitude {
    pub fn ln_abs(&self) -> f64 {
        self.w - self.s.exp()
    }

    /// `log(-log|v|)`, defined when `|v| < 1`.
    pub fn lnln(&self) -> Option<f64> {
        let es = self.s.exp();
        if es.is_infinite() {
            return Some(self.s);
        }
        (es > self.w).then(|| self.s + (-self.w / es).ln_1p())
    }

    pub fn value(&self) -> f64 {
        self.sign * self.ln_abs().exp()
    }
}

/// Burgers solution with the bare f0 datum near 0⁺, parametrised by the
/// log-log coordinate `s = log|log r|` of the foot `r`. Feet of points with
/// `x2 ≪ t` lie far below the smallest double, so the foot itself is never
/// formed.
#[derive(Debug, Clone, Copy)]
pub struct F0Wave {
    pub t: f64,
}

impl F0Wave {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Domain { op: "F0Wave::new", what: "t", value: t });
        }
        Ok(F0Wave { t })
    }

    fn position(&self, s: f64) -> f64 {
        (-s.exp()).exp() + self.t * atan_complement(s)
    }

    /// Log-log coordinate of the foot of `x2`.
    pub fn foot_loglog(&self, x2: f64) -> Result<f64> {
        if !(x2 > 0.0 && x2 < 1.0) {
            return Err(Error::Domain { op: "F0Wave::foot_loglog", what: "x2", value: x2 });
        }
        // t·f0 ≈ 2t/(πs) for large s
        let hi = 4.0 * self.t / (std::f64::consts::PI * x2) + 10.0;
        roots::bracketed(|s| self.position(s) - x2, -40.0, hi, Tol { abs: 0.0, rel: 1e-16, max_iter: 400 }, "f0 foot")
    }

    pub fn value(&self, x2: f64) -> Result<f64> {
        Ok(atan_complement(self.foot_loglog(x2)?))
    }

    /// `(π/2)(1 + s²) r e^s`, i.e. `1/f0'(r)`, without forming `r`.
    fn inv_slope(s: f64) -> f64 {
        FRAC_PI_2 * (1.0 + s * s) * (s - s.exp()).exp()
    }

    pub fn dx1(&self, x2: f64) -> Result<f64> {
        let s = self.foot_loglog(x2)?;
        Ok(1.0 / (self.t + Self::inv_slope(s)))
    }

    /// Second derivative `f0''/(1 + t f0')³` at the foot, in log-log form.
    pub fn dx2(&self, x2: f64) -> Result<TinyMagnitude> {
        let s = self.foot_loglog(x2)?;
        let q = 1.0 + s * s;
        let es = s.exp();
        // f0''·(1/f0')³ = (2/π)(2s + q(1 - e^s))·q·r·e^s and the remaining
        // factor is 1/((π/2)P + t)³ with P = q·r·e^s
        let p_inv = Self::inv_slope(s);
        let denom = (p_inv + self.t).ln() * 3.0;
        let bracket = 2.0 * s + q * (1.0 - es);
        let sign = bracket.signum();
        // log|∂²f| = -e^s + w
        // |bracket| = q e^s (1 - e^{-s}(1 + 2s/q)) once e^s dominates
        let ln_bracket =
            if s > 30.0 { q.ln() + s + (-(-s).exp() * (1.0 + 2.0 * s / q)).ln_1p() } else { bracket.abs().ln() };
        let w = 2.0 * FRAC_PI_2.ln() + q.ln() + s + ln_bracket - denom;
        Ok(TinyMagnitude { sign, s, w })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{build_compression_datum, BuildMode, F0Params, HPair};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::SQRT_2;

    fn compression(t: f64) -> CharSolution {
        let f0p = F0Params::new(SQRT_2, -2.0 * SQRT_2, 0.1, t, 0.05, 0.05, 0.075).unwrap();
        let p =
            build_compression_datum(SQRT_2, -2.0 * SQRT_2, t, 0.3, 0.1, &f0p, &HPair::default(), BuildMode::Initial)
                .unwrap();
        CharSolution::new(p, 1e-12).unwrap()
    }

    #[test]
    fn shock_bound_examples() {
        let b = shock_bounds(SQRT_2, -2.0 * SQRT_2, 0.1, 1.0).unwrap();
        assert_abs_diff_eq!(b.s_minus_slope, -0.757107, epsilon = 1e-6);
        assert_abs_diff_eq!(b.s_plus_slope, -0.657107, epsilon = 1e-6);
        let b = shock_bounds(1.0, -1.0, 0.2, 1.0).unwrap();
        assert_abs_diff_eq!(b.s_minus_slope, -0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(b.s_plus_slope, 0.1, epsilon = 1e-15);
        let b = shock_bounds(SQRT_2, -2.0 * SQRT_2, 1e-14, 1.0).unwrap();
        assert_abs_diff_eq!(b.s_minus_slope, b.s_plus_slope, epsilon = 1e-13);
        assert!(shock_bounds(-1.0, 1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn identity_at_time_zero() {
        let sol = compression(1.0);
        for x in [-3.0, 0.1, 7.0] {
            assert_eq!(sol.char_foot(0.0, x).unwrap().r, x);
        }
    }

    #[test]
    fn constant_piece_shift() {
        let sol = compression(1.0);
        let r = sol.char_foot(0.5, -10.0).unwrap().r;
        assert_abs_diff_eq!(r, -10.0 - 0.5 * SQRT_2, epsilon = 1e-13);
    }

    #[test]
    fn linear_piece_foot_and_value() {
        let t_c = 1.0;
        let sol = compression(t_c);
        for (t, x) in [(0.3, 0.2), (0.9, -0.1), (0.5, 1.0)] {
            let r = sol.char_foot(t, x).unwrap().r;
            assert_abs_diff_eq!(r, x * t_c / (t_c - t), epsilon = 1e-12);
            assert_abs_diff_eq!(sol.eval_solution(t, x).unwrap(), -x / (t_c - t), epsilon = 1e-12);
        }
    }

    #[test]
    fn far_left_plateau() {
        let t_c = 1.0;
        let sol = compression(t_c);
        let t = 0.4;
        let x = -SQRT_2 * (t_c - t) - 0.3 - 1e-6;
        assert_eq!(sol.eval_solution(t, x).unwrap(), SQRT_2);
    }

    #[test]
    fn approaches_collapse_profile() {
        let t_c = 1.0;
        let sol = compression(t_c);
        let collapse = sol.profile.collapse.clone().unwrap();
        for x in [-0.05, -0.2, 0.05, 0.2] {
            let target = collapse.eval(x).unwrap();
            let mut prev = f64::INFINITY;
            for k in 2..=6 {
                let t = t_c - 10f64.powi(-k);
                let err = (sol.eval_solution(t, x).unwrap() - target).abs();
                assert!(err <= prev + 1e-12, "x = {x}, k = {k}");
                prev = err;
            }
            assert!(prev < 1e-5);
        }
    }

    #[test]
    fn cone_queries_rejected_after_collapse() {
        let sol = compression(1.0);
        let b = sol.cone.unwrap().bounds;
        let t = 1.5;
        let mid = 0.25 * (b.s_minus_slope + b.s_plus_slope);
        assert!(matches!(sol.char_foot(t, mid), Err(Error::ShockCone { .. })));
        let v = sol.eval_solution(t, -3.0).unwrap();
        assert_eq!(v, SQRT_2);
    }

    #[test]
    fn first_derivative_matches_differences() {
        let sol = compression(1.0);
        for (t, x) in [(0.5, -2.2), (0.5, -1.9), (0.8, 2.9), (0.2, 5.4)] {
            let d = sol.eval_dx(t, x, 1).unwrap();
            let h = 1e-6;
            let fd = (sol.eval_solution(t, x + h).unwrap() - sol.eval_solution(t, x - h).unwrap()) / (2.0 * h);
            assert!((d - fd).abs() < 1e-4 * d.abs().max(1e-3), "({t}, {x}): {d} vs {fd}");
        }
    }

    #[test]
    fn pure_f0_slope_limit() {
        let w = F0Wave::new(0.5).unwrap();
        let d = w.dx1(1e-8).unwrap();
        assert!((d - 2.0).abs() < 1e-3);
        let d = w.dx1(0.3).unwrap();
        assert!(d > 0.0 && d < 2.0);
    }

    #[test]
    fn pure_f0_second_derivative_vanishes() {
        let w = F0Wave::new(0.5).unwrap();
        let m: Vec<f64> = [1e-4, 1e-6, 1e-8].iter().map(|&x| w.dx2(x).unwrap().lnln().unwrap()).collect();
        assert!(m[0] < m[1] && m[1] < m[2]);
        // moderate feet stay finite in the split form
        for x in [1e-2, 1e-3] {
            let d = w.dx2(x).unwrap();
            assert!(d.w.is_finite() && d.ln_abs().is_finite() && d.ln_abs() < 0.0);
        }
    }

    #[test]
    fn pure_f0_closed_forms_match_differences() {
        // x2 large enough that the foot is representable
        let w = F0Wave::new(0.05).unwrap();
        for x in [0.04, 0.08, 0.2] {
            let h = 1e-6 * x;
            let fd1 = (w.value(x + h).unwrap() - w.value(x - h).unwrap()) / (2.0 * h);
            let d1 = w.dx1(x).unwrap();
            assert!((fd1 - d1).abs() < 1e-4 * d1, "{x}: {fd1} vs {d1}");
            let fd2 = (w.dx1(x + h).unwrap() - w.dx1(x - h).unwrap()) / (2.0 * h);
            let d2 = w.dx2(x).unwrap().value();
            assert!((fd2 - d2).abs() < 1e-4 * d2.abs(), "{x}: {fd2} vs {d2}");
        }
    }
}
