//! The log-log compression profile f0, composite pieces a·f0(h(x)) + b,
//! smooth bridges to the far-field plateaus, and the piecewise Burgers
//! datum λ₁ built from them.

use std::f64::consts::FRAC_2_PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initial_data::PullbackMap;
use crate::roots::{self, Tol};

/// f0 without domain checks; `x = 0` returns the limit 0.
pub(crate) fn f0(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let l = (-x.ln()).ln();
    atan_complement(l)
}

/// `1 - (2/π) atan(l)`, accurate when the result is tiny (l large).
pub(crate) fn atan_complement(l: f64) -> f64 {
    if l > 1.0 {
        FRAC_2_PI * (1.0 / l).atan()
    } else {
        1.0 - FRAC_2_PI * l.atan()
    }
}

pub(crate) fn f0_d1(x: f64) -> f64 {
    let u = x.ln();
    let l = (-u).ln();
    -FRAC_2_PI / ((1.0 + l * l) * x * u)
}

pub(crate) fn f0_d2(x: f64) -> f64 {
    let u = x.ln();
    let l = (-u).ln();
    let q = 1.0 + l * l;
    FRAC_2_PI * (2.0 * l + q * (1.0 + u)) / (q * q * x * x * u * u)
}

fn check_unit(x: f64, op: &'static str) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { op, what: "x", value: x })
    }
}

pub fn f0_eval(x: f64) -> Result<f64> {
    check_unit(x, "f0_eval")?;
    Ok(f0(x))
}

/// Derivatives of f0. Orders 1 and 2 are closed forms; higher orders are
/// central differences of the order below.
pub fn f0_derivative(x: f64, n: u32) -> Result<f64> {
    check_unit(x, "f0_derivative")?;
    match n {
        0 => Ok(f0(x)),
        1 => Ok(f0_d1(x)),
        2 => Ok(f0_d2(x)),
        _ => {
            let h = 1e-3 * x.min(1.0 - x);
            let hi = f0_derivative(x + h, n - 1)?;
            let lo = f0_derivative(x - h, n - 1)?;
            Ok((hi - lo) / (2.0 * h))
        }
    }
}

/// C^∞ step from 0 (s ≤ 0) to 1 (s ≥ 1), flat to all orders at both ends.
pub(crate) fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let q = 1.0 / s - 1.0 / (1.0 - s);
        if q > 0.0 {
            let e = (-q).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + q.exp())
        }
    }
}

pub(crate) fn smooth_step_d1(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let g = smooth_step(s);
    g * (1.0 - g) * (1.0 / (s * s) + 1.0 / ((1.0 - s) * (1.0 - s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F0Params {
    pub a_plus: f64,
    pub a_minus: f64,
    pub b_plus: f64,
    pub b_minus: f64,
    pub zeta_bar: f64,
}

impl F0Params {
    /// Offsets follow from the plateaus and the band width:
    /// `b_- = λ_- - ζ₂/T`, `b_+ = λ_+ + ζ₂/T`.
    pub fn new(
        lambda_minus: f64,
        lambda_plus: f64,
        zeta2: f64,
        t_collapse: f64,
        a_minus: f64,
        a_plus: f64,
        zeta_bar: f64,
    ) -> Result<Self> {
        if !(a_minus > 0.0) {
            return Err(Error::Domain { op: "F0Params::new", what: "a_minus", value: a_minus });
        }
        if !(a_plus > 0.0) {
            return Err(Error::Domain { op: "F0Params::new", what: "a_plus", value: a_plus });
        }
        if !(zeta_bar > 0.0) {
            return Err(Error::Domain { op: "F0Params::new", what: "zeta_bar", value: zeta_bar });
        }
        let z = zeta2 / t_collapse;
        Ok(F0Params { a_plus, a_minus, b_plus: lambda_plus + z, b_minus: lambda_minus - z, zeta_bar })
    }
}

/// Reparametrisation inside f0. Only linear maps are needed for the
/// compression wave; the pulled-back datum uses [`Piece::Traced`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HSpec {
    Linear { slope: f64 },
}

impl HSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            HSpec::Linear { slope } => slope * x,
        }
    }
    pub fn d1(&self, _x: f64) -> f64 {
        match *self {
            HSpec::Linear { slope } => slope,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPair {
    pub minus: HSpec,
    pub plus: HSpec,
}

impl Default for HPair {
    fn default() -> Self {
        HPair { minus: HSpec::Linear { slope: -1.0 }, plus: HSpec::Linear { slope: 1.0 } }
    }
}

/// Below this `h`, advected origins are tracked through `ln(-ln h)`.
const DEEP_H: f64 = 1e-280;

enum Origin {
    Point(f64),
    Deep { l: f64, branch: Branch },
}

/// `offset + scale·f0(h(x))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub scale: f64,
    pub offset: f64,
    pub h: HSpec,
}

impl Branch {
    fn eval(&self, x: f64) -> Result<f64> {
        let y = self.h.eval(x);
        if !(0.0..1.0).contains(&y) {
            return Err(Error::Domain { op: "Branch::eval", what: "h(x)", value: y });
        }
        Ok(self.offset + self.scale * f0(y))
    }

    fn d1(&self, x: f64) -> Result<f64> {
        let y = self.h.eval(x);
        if !(y > 0.0 && y < 1.0) {
            return Err(Error::Domain { op: "Branch::d1", what: "h(x)", value: y });
        }
        Ok(self.scale * f0_d1(y) * self.h.d1(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Piece {
    Constant {
        value: f64,
    },
    /// `-x / collapse_time`
    Linear {
        collapse_time: f64,
    },
    Composite {
        branch: Branch,
    },
    /// Blends `branch` into `plateau` with a flat smooth step.
    Bridge {
        branch: Branch,
        plateau: f64,
        plateau_at_lo: bool,
    },
    /// Collapse profile carried back by `travel_time` along characteristics.
    Advected {
        side: Side,
        travel_time: f64,
    },
    /// Trace value λ^ν(h(x)) through a pullback map.
    Traced {
        map: Box<PullbackMap>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(with = "extended_f64")]
    pub lo: f64,
    #[serde(with = "extended_f64")]
    pub hi: f64,
    pub piece: Piece,
}

/// JSON has no infinities; the unbounded end segments store them as strings.
mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            Repr::Text(if *v > 0.0 { "inf".into() } else { "-inf".into() }).serialize(s)
        } else {
            Repr::Num(*v).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad bound {t}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Profile at the collapse time, with a jump at 0.
    Collapse,
    /// Smooth datum at t = 0 that collapses at `collapse_time`.
    Initial,
    /// Datum already carrying the jump at 0 (the pulled-back fan datum).
    Datum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaProfile {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub collapse_time: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    pub mode: Mode,
    pub segments: Vec<Segment>,
    /// The collapse profile that `Advected` pieces refer to.
    pub collapse: Option<Box<LambdaProfile>>,
}

impl LambdaProfile {
    /// Piecewise-constant Riemann datum.
    pub fn riemann(lambda_minus: f64, lambda_plus: f64) -> Self {
        LambdaProfile {
            lambda_minus,
            lambda_plus,
            collapse_time: 0.0,
            zeta1: 0.0,
            zeta2: 0.0,
            mode: Mode::Datum,
            segments: vec![
                Segment { lo: f64::NEG_INFINITY, hi: 0.0, piece: Piece::Constant { value: lambda_minus } },
                Segment { lo: 0.0, hi: f64::INFINITY, piece: Piece::Constant { value: lambda_plus } },
            ],
            collapse: None,
        }
    }

    pub fn segment_index(&self, x: f64) -> usize {
        // segments are [lo, hi); the first starts at -inf
        match self.segments.binary_search_by(|s| s.lo.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let i = self.segment_index(x);
        self.eval_in(i, x)
    }

    pub fn eval_d1(&self, x: f64) -> Result<f64> {
        let i = self.segment_index(x);
        self.d1_in(i, x)
    }

    /// Evaluates piece `i` at `x`, which may sit on either end of its
    /// interval (used for one-sided limits at breakpoints).
    pub fn eval_in(&self, i: usize, x: f64) -> Result<f64> {
        let seg = &self.segments[i];
        match &seg.piece {
            Piece::Constant { value } => Ok(*value),
            Piece::Linear { collapse_time } => Ok(-x / collapse_time),
            Piece::Composite { branch } => branch.eval(x),
            Piece::Bridge { branch, plateau, plateau_at_lo } => {
                let c = bridge_complement(seg, *plateau_at_lo, x);
                if c == 0.0 {
                    return Ok(*plateau);
                }
                // written around the plateau so rounding stays monotone
                let b = branch.eval(x)?;
                Ok(plateau - c * (plateau - b))
            }
            Piece::Advected { side, travel_time } => match self.advected_origin(*side, *travel_time, x)? {
                Origin::Point(y) => {
                    let c = self.collapse_profile()?;
                    if *side == Side::Left {
                        c.left_limit(y)
                    } else {
                        c.eval(y)
                    }
                }
                Origin::Deep { l, branch } => Ok(branch.offset + branch.scale * atan_complement(l)),
            },
            Piece::Traced { map } => map.lambda(x),
        }
    }

    pub fn d1_in(&self, i: usize, x: f64) -> Result<f64> {
        let seg = &self.segments[i];
        match &seg.piece {
            Piece::Constant { .. } => Ok(0.0),
            Piece::Linear { collapse_time } => Ok(-1.0 / collapse_time),
            Piece::Composite { branch } => branch.d1(x),
            Piece::Bridge { branch, plateau, plateau_at_lo } => {
                let c = bridge_complement(seg, *plateau_at_lo, x);
                if c == 0.0 {
                    return Ok(0.0);
                }
                let width = seg.hi - seg.lo;
                let s = (x - seg.lo) / width;
                let dc = if *plateau_at_lo { smooth_step_d1(s) / width } else { -smooth_step_d1(1.0 - s) / width };
                let b = branch.eval(x)?;
                Ok(branch.d1(x)? * c - dc * (plateau - b))
            }
            Piece::Advected { side, travel_time } => match self.advected_origin(*side, *travel_time, x)? {
                // the branch slope diverges at the jump, so this is the limit
                Origin::Point(0.0) => Ok(-1.0 / travel_time),
                Origin::Point(y) => {
                    let c = self.collapse_profile()?;
                    let d = if *side == Side::Left { c.left_d1(y)? } else { c.eval_d1(y)? };
                    Ok(d / (1.0 - travel_time * d))
                }
                Origin::Deep { l, branch } => {
                    // 1/λ' stays finite even though h itself underflows
                    let HSpec::Linear { slope } = branch.h;
                    let inv = (1.0 + l * l) * (l - l.exp()).exp() / (FRAC_2_PI * branch.scale * slope);
                    Ok(1.0 / (inv - travel_time))
                }
            },
            Piece::Traced { map } => map.lambda_dx(x),
        }
    }

    fn collapse_profile(&self) -> Result<&LambdaProfile> {
        self.collapse.as_deref().ok_or_else(|| Error::Geometry("advected piece without a collapse profile".into()))
    }

    /// Point `y` on the collapse profile whose characteristic, run back by
    /// `travel_time`, lands at `r`: `y - travel_time·λ_T(y) = r`. Origins
    /// with `h(y)` below `DEEP_H` are returned as `l = ln(-ln h)`, since
    /// the branch still moves by a visible amount down to `h = 0`.
    fn advected_origin(&self, side: Side, travel_time: f64, r: f64) -> Result<Origin> {
        let base = self.collapse_profile()?;
        let inner = match side {
            Side::Left => base.segment_index(0.0) - 1,
            Side::Right => base.segment_index(0.0),
        };
        let Piece::Composite { branch } = base.segments[inner].piece else {
            return Err(Error::Geometry("collapse profile has no inner branch at the jump".into()));
        };
        let HSpec::Linear { slope } = branch.h;
        let y_deep = DEEP_H / slope;
        let phi = |y: f64| -> f64 {
            let v = if y == 0.0 {
                match side {
                    Side::Left => base.left_limit(0.0).unwrap_or(f64::NAN),
                    Side::Right => base.eval(0.0).unwrap_or(f64::NAN),
                }
            } else {
                base.eval(y).unwrap_or(f64::NAN)
            };
            y - travel_time * v - r
        };
        // phi increases in y; the deep zone is [y_deep, 0) on the left and
        // (0, y_deep] on the right
        let deep = match side {
            Side::Left => phi(y_deep) < 0.0,
            Side::Right => phi(y_deep) > 0.0,
        };
        if !deep {
            let (lo, hi) = match side {
                Side::Left => (-base.zeta1, y_deep),
                Side::Right => (y_deep, base.zeta1),
            };
            return roots::bracketed(phi, lo, hi, Tol::full(), "advected origin").map(Origin::Point);
        }
        let psi = |l: f64| -> f64 {
            let y = (-l.exp()).exp() / slope;
            y - travel_time * (branch.offset + branch.scale * atan_complement(l)) - r
        };
        let l_lo = (-DEEP_H.ln()).ln();
        let l_hi = 1e300;
        let (a, b) = (psi(l_lo), psi(l_hi));
        if a == 0.0 {
            return Ok(Origin::Deep { l: l_lo, branch });
        }
        if a.signum() == b.signum() || b == 0.0 {
            // closer to the jump than any finite l resolves
            return Ok(Origin::Point(0.0));
        }
        // bisect in log l: l spans hundreds of decades
        let g = |w: f64| psi(w.exp());
        let w = roots::bracketed(g, l_lo.ln(), l_hi.ln(), Tol::full(), "advected origin (deep)")?;
        Ok(Origin::Deep { l: w.exp(), branch })
    }

    /// Value approached from the left of `x`.
    pub fn left_limit(&self, x: f64) -> Result<f64> {
        let i = self.segment_index(x);
        if self.segments[i].lo == x && i > 0 {
            self.eval_in(i - 1, x)
        } else {
            self.eval_in(i, x)
        }
    }

    fn left_d1(&self, x: f64) -> Result<f64> {
        let i = self.segment_index(x);
        if self.segments[i].lo == x && i > 0 {
            self.d1_in(i - 1, x)
        } else {
            self.d1_in(i, x)
        }
    }

    /// Interior breakpoints, ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments.iter().skip(1).map(|s| s.lo).collect()
    }

    fn has_jump_at_zero(&self) -> bool {
        matches!(self.mode, Mode::Collapse | Mode::Datum)
    }

    /// Checks ordering, continuity at breakpoints (and of the first
    /// derivative for initial data) and monotonicity on each side.
    pub fn validate(&self) -> Result<()> {
        for w in self.segments.windows(2) {
            if !(w[0].lo < w[0].hi) || w[0].hi != w[1].lo {
                return Err(Error::Geometry(format!("breakpoints out of order near {}", w[0].hi)));
            }
        }
        for (k, w) in self.segments.windows(2).enumerate() {
            let x = w[1].lo;
            if x == 0.0 && self.has_jump_at_zero() {
                continue;
            }
            let gap = (self.eval_in(k, x)? - self.eval_in(k + 1, x)?).abs();
            if gap > 1e-12 {
                return Err(Error::Stitch { x2: x, gap });
            }
            if self.mode == Mode::Initial {
                let dl = self.d1_in(k, x)?;
                let dr = self.d1_in(k + 1, x)?;
                if (dl - dr).abs() > 1e-9 * (1.0 + dl.abs()) {
                    return Err(Error::Stitch { x2: x, gap: (dl - dr).abs() });
                }
            }
        }
        self.check_monotone(10_000)
    }

    /// Sampled monotonicity: non-increasing everywhere and strictly
    /// decreasing over every non-constant segment.
    pub fn check_monotone(&self, samples: usize) -> Result<()> {
        let bps = self.breakpoints();
        let (Some(&first), Some(&last)) = (bps.first(), bps.last()) else {
            return Ok(());
        };
        let ranges: Vec<(f64, f64)> =
            if self.has_jump_at_zero() { vec![(first, 0.0), (0.0, last)] } else { vec![(first, last)] };
        for (a, b) in ranges {
            if !(a < b) {
                continue;
            }
            let n = samples / 2;
            let mut prev: Option<(f64, f64, usize)> = None;
            for j in 0..=n {
                // open interval: stay off the jump
                let x = a + (b - a) * (j as f64 + 0.5) / (n as f64 + 1.0);
                let i = self.segment_index(x);
                let v = self.eval_in(i, x)?;
                if let Some((px, pv, pi)) = prev {
                    let same_const = pi == i && matches!(self.segments[i].piece, Piece::Constant { .. });
                    let ok = if same_const {
                        v <= pv
                    } else {
                        v < pv || (v == pv && (self.is_flat(i, x) || self.below_rounding(i, px, x, v)))
                    };
                    if !ok {
                        return Err(match self.segments[i].piece {
                            Piece::Bridge { .. } => {
                                Error::NonMonotoneBridge { lo: self.segments[i].lo, hi: self.segments[i].hi }
                            }
                            _ => Error::Geometry(format!("profile not decreasing between {px} and {x}")),
                        });
                    }
                }
                prev = Some((x, v, i));
            }
        }
        Ok(())
    }

    /// True when the change expected between two samples is too small to
    /// register in `v`.
    fn below_rounding(&self, i: usize, px: f64, x: f64, v: f64) -> bool {
        self.d1_in(i, x).map(|d| d <= 0.0 && d.abs() * (x - px) <= 4.0 * f64::EPSILON * v.abs()).unwrap_or(false)
    }

    fn is_flat(&self, i: usize, x: f64) -> bool {
        match &self.segments[i].piece {
            Piece::Constant { .. } => true,
            Piece::Bridge { branch, plateau, plateau_at_lo } => {
                // near the plateau end the departure drops below one ulp
                let c = bridge_complement(&self.segments[i], *plateau_at_lo, x);
                let gap = branch.eval(x).map(|b| c * (plateau - b)).unwrap_or(f64::INFINITY);
                gap.abs() <= f64::EPSILON * plateau.abs()
            }
            Piece::Traced { map } => map.at_plateau(x),
            _ => false,
        }
    }
}

/// Weight of the branch in a bridge: 0 at the plateau end, 1 at the other.
fn bridge_complement(seg: &Segment, plateau_at_lo: bool, x: f64) -> f64 {
    let s = (x - seg.lo) / (seg.hi - seg.lo);
    if plateau_at_lo {
        smooth_step(s)
    } else {
        smooth_step(1.0 - s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuildMode {
    Collapse,
    Initial,
}

/// Compression datum with plateaus `λ∓`, collapsing at time `T` into a jump
/// at the origin. `BuildMode::Collapse` returns the profile at `T`;
/// `BuildMode::Initial` the smooth datum at `t = 0`.
#[allow(clippy::too_many_arguments)]
pub fn build_compression_datum(
    lambda_minus: f64,
    lambda_plus: f64,
    t_collapse: f64,
    zeta1: f64,
    zeta2: f64,
    f0p: &F0Params,
    h: &HPair,
    mode: BuildMode,
) -> Result<LambdaProfile> {
    if !(lambda_minus > lambda_plus) {
        return Err(Error::Geometry("need lambda_minus > lambda_plus".into()));
    }
    if !(t_collapse > 0.0) {
        return Err(Error::Domain { op: "build_compression_datum", what: "T", value: t_collapse });
    }
    if !(0.0 < zeta2 && zeta2 < zeta1 && zeta1 < 1.0) {
        return Err(Error::Geometry(format!("need 0 < zeta2 < zeta1 < 1, got {zeta2}, {zeta1}")));
    }
    let zb = f0p.zeta_bar;
    if !(zb < zeta1 / 2.0) {
        return Err(Error::Geometry(format!("zeta_bar = {zb} must be below zeta1/2")));
    }
    let (HSpec::Linear { slope: km }, HSpec::Linear { slope: kp }) = (h.minus, h.plus);
    if !(km < 0.0 && kp > 0.0) {
        return Err(Error::Geometry("h_- must have negative and h_+ positive slope".into()));
    }
    if !(-km * zeta1 < 1.0 && kp * zeta1 < 1.0) {
        return Err(Error::Geometry("h maps the bridge window outside (0, 1)".into()));
    }
    if 2.0 * zeta2 >= (lambda_minus - lambda_plus) * t_collapse {
        return Err(Error::Geometry("linear region of the initial datum is empty".into()));
    }
    let z = zeta2 / t_collapse;
    // the blended bridge is monotone as long as each branch stays strictly
    // inside its plateau over the bridge window
    if f0p.a_minus * f0(-km * zeta1) >= z {
        return Err(Error::NonMonotoneBridge { lo: -zeta1, hi: -zb });
    }
    if f0p.a_plus * f0(kp * zeta1) >= z {
        return Err(Error::NonMonotoneBridge { lo: zb, hi: zeta1 });
    }
    let left = Branch { scale: f0p.a_minus, offset: f0p.b_minus, h: h.minus };
    let right = Branch { scale: -f0p.a_plus, offset: f0p.b_plus, h: h.plus };
    let seg = |lo, hi, piece| Segment { lo, hi, piece };
    let collapse = LambdaProfile {
        lambda_minus,
        lambda_plus,
        collapse_time: t_collapse,
        zeta1,
        zeta2,
        mode: Mode::Collapse,
        segments: vec![
            seg(f64::NEG_INFINITY, -zeta1, Piece::Constant { value: lambda_minus }),
            seg(-zeta1, -zb, Piece::Bridge { branch: left, plateau: lambda_minus, plateau_at_lo: true }),
            seg(-zb, 0.0, Piece::Composite { branch: left }),
            seg(0.0, zb, Piece::Composite { branch: right }),
            seg(zb, zeta1, Piece::Bridge { branch: right, plateau: lambda_plus, plateau_at_lo: false }),
            seg(zeta1, f64::INFINITY, Piece::Constant { value: lambda_plus }),
        ],
        collapse: None,
    };
    collapse.validate()?;
    if mode == BuildMode::Collapse {
        return Ok(collapse);
    }
    let t = t_collapse;
    let datum = LambdaProfile {
        lambda_minus,
        lambda_plus,
        collapse_time: t,
        zeta1,
        zeta2,
        mode: Mode::Initial,
        segments: vec![
            seg(f64::NEG_INFINITY, -lambda_minus * t - zeta1, Piece::Constant { value: lambda_minus }),
            seg(
                -lambda_minus * t - zeta1,
                -lambda_minus * t + zeta2,
                Piece::Advected { side: Side::Left, travel_time: t },
            ),
            seg(-lambda_minus * t + zeta2, -lambda_plus * t - zeta2, Piece::Linear { collapse_time: t }),
            seg(
                -lambda_plus * t - zeta2,
                -lambda_plus * t + zeta1,
                Piece::Advected { side: Side::Right, travel_time: t },
            ),
            seg(-lambda_plus * t + zeta1, f64::INFINITY, Piece::Constant { value: lambda_plus }),
        ],
        collapse: Some(Box::new(collapse)),
    };
    datum.validate()?;
    Ok(datum)
}

pub fn to_json(p: &LambdaProfile) -> String {
    serde_json::to_string_pretty(p).expect("profiles serialize")
}

pub fn from_json(s: &str) -> Result<LambdaProfile> {
    serde_json::from_str(s).map_err(|e| Error::Geometry(format!("profile document: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{E, PI, SQRT_2};

    const E_TO_MINUS_E: f64 = 0.065_988_035_845_312_54;

    fn default_datum(mode: BuildMode) -> LambdaProfile {
        let f0p = F0Params::new(SQRT_2, -2.0 * SQRT_2, 0.1, 1.0, 0.05, 0.05, 0.075).unwrap();
        build_compression_datum(SQRT_2, -2.0 * SQRT_2, 1.0, 0.3, 0.1, &f0p, &HPair::default(), mode).unwrap()
    }

    #[test]
    fn f0_special_points() {
        assert_abs_diff_eq!(f0_eval((-1.0f64).exp()).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f0_eval((-E).exp()).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f0_eval((-1.0 / E).exp()).unwrap(), 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!((-E).exp(), E_TO_MINUS_E, epsilon = 1e-16);
    }

    #[test]
    fn f0_domain() {
        for x in [0.0, -1.0, 1.0, 2.0] {
            assert!(f0_eval(x).is_err());
            assert!(f0_derivative(x, 1).is_err());
        }
    }

    #[test]
    fn f0_first_derivative_at_inverse_e() {
        let x = (-1.0f64).exp();
        let d = f0_derivative(x, 1).unwrap();
        assert_abs_diff_eq!(d, 2.0 * E / PI, epsilon = 1e-14);
        let h = 1e-7;
        let fd = (f0(x + h) - f0(x - h)) / (2.0 * h);
        assert!((fd - d).abs() / d < 1e-7);
    }

    #[test]
    fn f0_first_derivative_blows_up() {
        let d: Vec<f64> = [1e-4, 1e-6, 1e-8].iter().map(|&x| f0_derivative(x, 1).unwrap()).collect();
        assert!(d[0] < d[1] && d[1] < d[2]);
    }

    #[test]
    fn f0_second_derivative_matches_five_point_stencil() {
        let x = E_TO_MINUS_E;
        let h = 1e-4;
        let f = |k: f64| f0(x + k * h);
        let fd = (-f(2.0) + 16.0 * f(1.0) - 30.0 * f(0.0) + 16.0 * f(-1.0) - f(-2.0)) / (12.0 * h * h);
        let d2 = f0_derivative(x, 2).unwrap();
        assert!((fd - d2).abs() / d2.abs() < 1e-5, "{fd} vs {d2}");
    }

    #[test]
    fn f0_third_derivative_is_consistent() {
        let x = 0.05;
        let h = 1e-5;
        let fd = (f0_d2(x + h) - f0_d2(x - h)) / (2.0 * h);
        let d3 = f0_derivative(x, 3).unwrap();
        assert!((fd - d3).abs() / d3.abs() < 1e-4);
    }

    #[test]
    fn f0_limits() {
        let mut prev = f64::INFINITY;
        for k in 1..=12 {
            let v = f0(10f64.powi(-k));
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 0.3);
    }

    #[test]
    fn smooth_step_shape() {
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert_abs_diff_eq!(smooth_step(0.5), 0.5, epsilon = 1e-15);
        let h = 1e-6;
        for s in [0.1, 0.3, 0.7, 0.95] {
            let fd = (smooth_step(s + h) - smooth_step(s - h)) / (2.0 * h);
            assert!((fd - smooth_step_d1(s)).abs() < 1e-7);
        }
    }

    #[test]
    fn offsets_follow_band() {
        let p = F0Params::new(SQRT_2, -2.0 * SQRT_2, 0.1, 2.0, 0.05, 0.05, 0.075).unwrap();
        assert_eq!(p.b_minus, SQRT_2 - 0.1 / 2.0);
        assert_eq!(p.b_plus, -2.0 * SQRT_2 + 0.1 / 2.0);
    }

    #[test]
    fn collapse_profile_plateaus() {
        let p = default_datum(BuildMode::Collapse);
        assert_eq!(p.eval(-0.31).unwrap(), SQRT_2);
        assert_eq!(p.eval(-5.0).unwrap(), SQRT_2);
        assert_eq!(p.eval(0.31).unwrap(), -2.0 * SQRT_2);
        // jump at the origin between the inner offsets
        assert_abs_diff_eq!(p.left_limit(0.0).unwrap(), SQRT_2 - 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eval(0.0).unwrap(), -2.0 * SQRT_2 + 0.1, epsilon = 1e-15);
    }

    #[test]
    fn initial_datum_plateaus_and_linear_region() {
        let p = default_datum(BuildMode::Initial);
        let t = 1.0;
        assert_eq!(p.eval(-SQRT_2 * t - 0.3 - 1e-9).unwrap(), SQRT_2);
        assert_eq!(p.eval(2.0 * SQRT_2 * t + 0.3 + 1e-9).unwrap(), -2.0 * SQRT_2);
        assert_abs_diff_eq!(p.eval(0.4).unwrap(), -0.4, epsilon = 1e-15);
    }

    #[test]
    fn breakpoints_are_continuous() {
        for mode in [BuildMode::Collapse, BuildMode::Initial] {
            let p = default_datum(mode);
            for (k, x) in p.breakpoints().into_iter().enumerate() {
                if x == 0.0 && mode == BuildMode::Collapse {
                    continue;
                }
                let l = p.eval_in(k, x).unwrap();
                let r = p.eval_in(k + 1, x).unwrap();
                assert!((l - r).abs() < 1e-12, "{mode:?} breakpoint {x}: {l} vs {r}");
            }
        }
    }

    #[test]
    fn profile_derivative_matches_differences() {
        let p = default_datum(BuildMode::Initial);
        for x in [-2.9, -2.75, -1.0, 5.6, 5.9] {
            let h = 1e-6;
            let fd = (p.eval(x + h).unwrap() - p.eval(x - h).unwrap()) / (2.0 * h);
            let d = p.eval_d1(x).unwrap();
            assert!((fd - d).abs() < 1e-6 * (1.0 + d.abs()), "x = {x}: {fd} vs {d}");
        }
    }

    #[test]
    fn collapse_profile_strictly_decreasing_each_side() {
        let p = default_datum(BuildMode::Collapse);
        // strict except within a few ulps of the plateau, where the bridge
        // departure is below the sampling resolution
        for (a, b, plateau) in [(-0.3, 0.0, SQRT_2), (0.0, 0.3, -2.0 * SQRT_2)] {
            let n = 10_000;
            let mut prev = f64::INFINITY;
            for j in 0..n {
                let x = a + (b - a) * (j as f64 + 0.5) / n as f64;
                let v = p.eval(x).unwrap();
                assert!(v < prev || (v - plateau).abs() < 1e-13, "x = {x}");
                prev = v;
            }
        }
    }

    #[test]
    fn overlapping_geometry_rejected() {
        let f0p = F0Params::new(SQRT_2, -2.0 * SQRT_2, 0.1, 1.0, 0.05, 0.05, 0.2).unwrap();
        let r =
            build_compression_datum(SQRT_2, -2.0 * SQRT_2, 1.0, 0.3, 0.1, &f0p, &HPair::default(), BuildMode::Collapse);
        assert!(matches!(r, Err(Error::Geometry(_))));
    }

    #[test]
    fn oversized_amplitude_breaks_bridge() {
        let f0p = F0Params::new(SQRT_2, -2.0 * SQRT_2, 0.1, 1.0, 1.0, 0.05, 0.075).unwrap();
        let r =
            build_compression_datum(SQRT_2, -2.0 * SQRT_2, 1.0, 0.3, 0.1, &f0p, &HPair::default(), BuildMode::Collapse);
        assert!(matches!(r, Err(Error::NonMonotoneBridge { .. })));
    }

    #[test]
    fn vanishing_amplitude_approaches_riemann_datum() {
        let riemann = LambdaProfile::riemann(SQRT_2, -2.0 * SQRT_2);
        let (zeta2, t) = (1e-9, 1.0);
        let a = 1e-12;
        let f0p = F0Params::new(SQRT_2, -2.0 * SQRT_2, zeta2, t, a, a, 0.075).unwrap();
        let p =
            build_compression_datum(SQRT_2, -2.0 * SQRT_2, t, 0.3, zeta2, &f0p, &HPair::default(), BuildMode::Collapse)
                .unwrap();
        for j in 0..2000 {
            let x = -1.0 + 2.0 * (j as f64 + 0.5) / 2000.0;
            assert!((p.eval(x).unwrap() - riemann.eval(x).unwrap()).abs() <= 2.0 * a + zeta2 / t);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        for mode in [BuildMode::Collapse, BuildMode::Initial] {
            let p = default_datum(mode);
            let back = from_json(&to_json(&p)).unwrap();
            assert_eq!(back, p);
            for x in [-3.0, -2.8, -0.2, -0.01, 0.01, 0.2, 5.7] {
                assert_eq!(back.eval(x).unwrap().to_bits(), p.eval(x).unwrap().to_bits());
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn f0_increasing(a in 1e-12f64..0.36, b in 1e-12f64..0.36) {
            let (x, y) = if a < b { (a, b) } else { (b, a) };
            proptest::prop_assume!(y - x > 1e-14 * y);
            proptest::prop_assert!(f0(x) < f0(y));
        }

        #[test]
        fn f0_derivative_matches_differences(x in 1e-3f64..0.3) {
            let h = 1e-6 * x;
            let fd = (f0(x + h) - f0(x - h)) / (2.0 * h);
            let d = f0_d1(x);
            proptest::prop_assert!((fd - d).abs() / d < 1e-5);
        }
    }
}
