//! Rankine-Hugoniot and admissibility algebra of the fan subsolution with a
//! constant middle density ρ₁ and constant K, its closed-form solution
//! branch, and the check of the explicit Riemann subsolution.

use serde::{Deserialize, Serialize};

use crate::burgers::shock_bounds;
use crate::error::{Error, Result};
use crate::euler_map::{state_from_wave, state_from_wave_as_printed, EulerState};
use crate::real::Real;
use crate::report::Report;

pub const SQRT_13: f64 = 3.605_551_275_463_989;

pub fn default_k() -> f64 {
    (58.0 + 2.0 * SQRT_13) / 9.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanConstants {
    pub rho1: f64,
    pub k: f64,
    pub alpha: f64,
    pub gamma2: f64,
}

impl Default for FanConstants {
    fn default() -> Self {
        FanConstants { rho1: 2.0, k: default_k(), alpha: 0.0, gamma2: 0.0 }
    }
}

impl FanConstants {
    /// `C₁ = 2ρ₁K - 4ρ₁²`, fixed by the K identity.
    pub fn c1(&self) -> f64 {
        2.0 * self.rho1 * self.k - 4.0 * self.rho1 * self.rho1
    }
}

/// Outer states on the two fan boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceStates<R = f64> {
    pub rho_minus: R,
    pub m_minus: R,
    pub rho_plus: R,
    pub m_plus: R,
}

impl InterfaceStates<f64> {
    pub fn new(rho_minus: f64, m_minus: f64, rho_plus: f64, m_plus: f64) -> Result<Self> {
        for (what, v) in [("rho_minus", rho_minus), ("rho_plus", rho_plus)] {
            if !(v > 0.0) {
                return Err(Error::Domain { op: "InterfaceStates::new", what, value: v });
            }
        }
        Ok(InterfaceStates { rho_minus, m_minus, rho_plus, m_plus })
    }

    /// `(1, 2√2)` on the left and `(4, 0)` on the right.
    pub fn baseline() -> Self {
        InterfaceStates { rho_minus: 1.0, m_minus: 8f64.sqrt(), rho_plus: 4.0, m_plus: 0.0 }
    }

    pub fn from_euler(left: &EulerState, right: &EulerState) -> Result<Self> {
        Self::new(left.rho, left.m2, right.rho, right.m2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rab {
    pub r: f64,
    pub a: f64,
    pub h: f64,
    pub b: f64,
}

pub fn rab_quantities(s: &InterfaceStates) -> Rab {
    let r = s.rho_minus - s.rho_plus;
    let a = s.m_minus - s.m_plus;
    let h = s.m_minus * s.m_minus / s.rho_minus - s.m_plus * s.m_plus / s.rho_plus + s.rho_minus * s.rho_minus
        - s.rho_plus * s.rho_plus;
    Rab { r, a, h, b: a * a - r * h }
}

/// `ρ₋ρ₊(v₋ - v₊)² - R(ρ₋² - ρ₊²)`, the factored form of `A² - RH`.
pub fn b_product_form(s: &InterfaceStates) -> f64 {
    let dv = s.m_minus / s.rho_minus - s.m_plus / s.rho_plus;
    s.rho_minus * s.rho_plus * dv * dv
        - (s.rho_minus - s.rho_plus) * (s.rho_minus * s.rho_minus - s.rho_plus * s.rho_plus)
}

/// Speeds and middle momentum of the closed-form branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Speeds<R> {
    pub nu_minus: R,
    pub nu_plus: R,
    pub beta: R,
}

/// Radicand `-B + Rε` of the closed forms.
pub fn radicand<R: Real>(s: &InterfaceStates<R>, eps: R) -> R {
    let r = s.rho_minus - s.rho_plus;
    let a = s.m_minus - s.m_plus;
    let h = s.m_minus * s.m_minus / s.rho_minus - s.m_plus * s.m_plus / s.rho_plus + s.rho_minus * s.rho_minus
        - s.rho_plus * s.rho_plus;
    let b = a * a - r * h;
    -b + r * eps
}

/// Closed-form branch, written with `a = ρ₋ - ρ₁` and `b = ρ₁ - ρ₊`
/// (both negative in the admissible ordering), so `R = a + b`.
pub fn speeds<R: Real>(s: &InterfaceStates<R>, rho1: f64, eps: R) -> Result<Speeds<R>> {
    let q = radicand(s, eps);
    if !(q.re() > 0.0) {
        return Err(Error::Radicand { value: q.re() });
    }
    let a = s.rho_minus - rho1;
    let b = -s.rho_plus + rho1;
    if !(a.re() < 0.0 && b.re() < 0.0) {
        return Err(Error::DensityOrdering { rho_minus: s.rho_minus.re(), rho1, rho_plus: s.rho_plus.re() });
    }
    let r = a + b;
    let am = s.m_minus - s.m_plus;
    let nu_minus = am / r + (q * b / a).sqrt() / r;
    let nu_plus = am / r - (q * a / b).sqrt() / r;
    let beta = (s.m_minus * b + s.m_plus * a) / r + (q * a * b).sqrt() / r;
    Ok(Speeds { nu_minus, nu_plus, beta })
}

/// `ε₂` on the left boundary from the left momentum balance.
pub fn eps2_left<R: Real>(s: &InterfaceStates<R>, c: &FanConstants, nu_minus: R) -> R {
    nu_minus * nu_minus * (s.rho_minus - c.rho1) - s.m_minus * s.m_minus / s.rho_minus - s.rho_minus * s.rho_minus
        + (2.0 * c.rho1 * c.k - 3.0 * c.rho1 * c.rho1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceSolution {
    pub nu_minus: f64,
    pub nu_plus: f64,
    pub beta: f64,
    pub eps2_left: f64,
    pub eps2_right: f64,
    pub eps_delta: f64,
    /// ε₁ at the two boundaries; it is linear in x₂ like ε₂, since
    /// ε₁ + ε₂ is fixed by the K identity.
    pub eps1_left: f64,
    pub eps1_right: f64,
    pub c1: f64,
    pub gamma1_left: f64,
    pub gamma1_right: f64,
}

impl InterfaceSolution {
    /// Completes ε₁, C₁ and γ₁ from speeds and ε₂ values.
    pub fn assemble(c: &FanConstants, nu_minus: f64, nu_plus: f64, beta: f64, eps2_left: f64, eps2_right: f64) -> Self {
        let eps1_left = epsilon1_from_k(c.rho1, beta, eps2_left, c.k);
        let eps1_right = epsilon1_from_k(c.rho1, beta, eps2_right, c.k);
        let c1 = c.c1();
        let b2 = beta * beta / c.rho1;
        InterfaceSolution {
            nu_minus,
            nu_plus,
            beta,
            eps2_left,
            eps2_right,
            eps_delta: eps2_left - eps2_right,
            eps1_left,
            eps1_right,
            c1,
            gamma1_left: c1 / 2.0 - eps1_left - b2,
            gamma1_right: c1 / 2.0 - eps1_right - b2,
        }
    }

    /// The explicit Riemann subsolution numbers (ε₂ = 1 throughout).
    pub fn riemann_constants(c: &FanConstants) -> Self {
        let (s8, s26, s32) = (8f64.sqrt(), 26f64.sqrt(), 32f64.sqrt());
        let mut sol = Self::assemble(c, (-s8 - s26) / 3.0, (s26 - s32) / 6.0, (s32 - s26) / 3.0, 1.0, 1.0);
        sol.eps1_left = (50.0 + 16.0 * SQRT_13) / 9.0;
        sol.eps1_right = sol.eps1_left;
        sol
    }

    pub fn eps1(&self) -> f64 {
        self.eps1_left.min(self.eps1_right)
    }
}

pub fn solve_interface(s: &InterfaceStates, c: &FanConstants, eps_delta: f64) -> Result<InterfaceSolution> {
    let sp = speeds(s, c.rho1, eps_delta)?;
    let e2l = eps2_left(s, c, sp.nu_minus);
    Ok(InterfaceSolution::assemble(c, sp.nu_minus, sp.nu_plus, sp.beta, e2l, e2l - eps_delta))
}

/// Residuals (LHS - RHS) of left continuity, left momentum, right
/// continuity and right momentum.
pub fn rh_residuals(s: &InterfaceStates, c: &FanConstants, sol: &InterfaceSolution) -> [f64; 4] {
    let (r1, k) = (c.rho1, c.k);
    let kk = 2.0 * r1 * k - 3.0 * r1 * r1;
    let left_mass = sol.nu_minus * (s.rho_minus - r1) - (s.m_minus - sol.beta);
    let left_mom = sol.nu_minus * (s.m_minus - sol.beta)
        - (s.m_minus * s.m_minus / s.rho_minus + s.rho_minus * s.rho_minus - kk + sol.eps2_left);
    let right_mass = sol.nu_plus * (r1 - s.rho_plus) - (sol.beta - s.m_plus);
    let right_mom = sol.nu_plus * (sol.beta - s.m_plus)
        - (kk - sol.eps2_right - s.m_plus * s.m_plus / s.rho_plus - s.rho_plus * s.rho_plus);
    [left_mass, left_mom, right_mass, right_mom]
}

pub const RH_NAMES: [&str; 4] =
    ["rh_residual_left_mass", "rh_residual_left_momentum", "rh_residual_right_mass", "rh_residual_right_momentum"];

/// Energy inequalities on both boundaries as RHS - LHS: strictly
/// admissible means both are positive.
pub fn admissibility_margins(s: &InterfaceStates, c: &FanConstants, sol: &InterfaceSolution) -> (f64, f64) {
    let (r1, k) = (c.rho1, c.k);
    let (rm, mm, rp, mp) = (s.rho_minus, s.m_minus, s.rho_plus, s.m_plus);
    let left = (2.0 * rm * mm + mm * mm * mm / (2.0 * rm * rm) - sol.beta * k)
        - sol.nu_minus * (rm * rm + r1 * r1 + mm * mm / (2.0 * rm) - r1 * k);
    let right = (sol.beta * k - 2.0 * rp * mp - mp * mp * mp / (2.0 * rp * rp))
        - sol.nu_plus * (r1 * k - r1 * r1 - rp * rp - mp * mp / (2.0 * rp));
    (left, right)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsolutionMargins {
    pub e1_left: f64,
    pub e1_right: f64,
    pub e2_left: f64,
    pub e2_right: f64,
}

pub fn subsolution_margins(sol: &InterfaceSolution, _c: &FanConstants) -> SubsolutionMargins {
    SubsolutionMargins {
        e1_left: sol.eps1_left,
        e1_right: sol.eps1_right,
        e2_left: sol.eps2_left,
        e2_right: sol.eps2_right,
    }
}

/// Positive definiteness of `(C₁/2)I - m⊗m/ρ₁ + u₁` by leading minors.
pub fn matrix_pd_check(rho1: f64, m: [f64; 2], u: [[f64; 2]; 2], c1: f64) -> bool {
    let a11 = c1 / 2.0 - m[0] * m[0] / rho1 + u[0][0];
    let a12 = -m[0] * m[1] / rho1 + u[0][1];
    let a21 = -m[1] * m[0] / rho1 + u[1][0];
    let a22 = c1 / 2.0 - m[1] * m[1] / rho1 + u[1][1];
    a11 > 0.0 && a11 * a22 - a12 * a21 > 0.0
}

/// PD check for each boundary value of the middle cell.
pub fn pd_check_solution(sol: &InterfaceSolution, c: &FanConstants) -> (bool, bool) {
    let m = [c.alpha, sol.beta];
    let side = |g1: f64| matrix_pd_check(c.rho1, m, [[g1, c.gamma2], [c.gamma2, -g1]], sol.c1);
    (side(sol.gamma1_left), side(sol.gamma1_right))
}

pub fn epsilon1_from_k(rho1: f64, beta: f64, eps2: f64, k: f64) -> f64 {
    2.0 * rho1 * k - 4.0 * rho1 * rho1 - beta * beta / rho1 - eps2
}

/// K recovered from ε₁, ε₂ through `2ρ₁² + (β²/ρ₁ + ε₁ + ε₂)/2 = ρ₁K`.
pub fn k_from_epsilon(rho1: f64, beta: f64, eps1: f64, eps2: f64) -> f64 {
    (2.0 * rho1 * rho1 + 0.5 * (beta * beta / rho1 + eps1 + eps2)) / rho1
}

/// All six strict inequalities at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins {
    pub adm_left: f64,
    pub adm_right: f64,
    pub e1_left: f64,
    pub e1_right: f64,
    pub e2_left: f64,
    pub e2_right: f64,
}

impl Margins {
    pub fn of(s: &InterfaceStates, c: &FanConstants, sol: &InterfaceSolution) -> Self {
        let (adm_left, adm_right) = admissibility_margins(s, c, sol);
        let m = subsolution_margins(sol, c);
        Margins {
            adm_left,
            adm_right,
            e1_left: m.e1_left,
            e1_right: m.e1_right,
            e2_left: m.e2_left,
            e2_right: m.e2_right,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.adm_left, self.adm_right, self.e1_left, self.e1_right, self.e2_left, self.e2_right]
    }

    pub fn min(&self) -> f64 {
        self.as_array().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn all_positive(&self) -> bool {
        self.as_array().iter().all(|&v| v > 0.0)
    }
}

pub const MARGIN_NAMES: [&str; 6] = [
    "admissibility_left",
    "admissibility_right",
    "subsolution_eps1_left",
    "subsolution_eps1_right",
    "subsolution_eps2_left",
    "subsolution_eps2_right",
];

/// Values of the middle cell at one boundary before the ansatz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellValues {
    pub rho1: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullSystem {
    /// continuity, first and second momentum on the left, then on the right
    pub rh: [f64; 6],
    /// energy inequalities as RHS - LHS
    pub admissibility: [f64; 2],
    /// `ρ₁C₁ - |m₁|²` per side
    pub trace: [f64; 2],
    /// determinant condition per side
    pub det: [f64; 2],
}

/// General boundary conditions for `p = ρ²` (so `e = ρ`), with the
/// transversal components and the off-diagonal stress left free.
pub fn full_system(
    minus: &EulerState,
    plus: &EulerState,
    left: &CellValues,
    right: &CellValues,
    nu_minus: f64,
    nu_plus: f64,
) -> FullSystem {
    let (rm, m1m, m2m) = (minus.rho, minus.m1, minus.m2);
    let (rp, m1p, m2p) = (plus.rho, plus.m1, plus.m2);
    let l = left;
    let r = right;
    let rh = [
        nu_minus * (rm - l.rho1) - (m2m - l.beta),
        nu_minus * (m1m - l.alpha) - (m1m * m2m / rm - l.gamma2),
        nu_minus * (m2m - l.beta) - (m2m * m2m / rm + l.gamma1 + rm * rm - l.rho1 * l.rho1 - l.c1 / 2.0),
        nu_plus * (r.rho1 - rp) - (r.beta - m2p),
        nu_plus * (r.alpha - m1p) - (r.gamma2 - m1p * m2p / rp),
        nu_plus * (r.beta - m2p) - (-r.gamma1 - m2p * m2p / rp + r.rho1 * r.rho1 - rp * rp + r.c1 / 2.0),
    ];
    let mm2 = m1m * m1m + m2m * m2m;
    let mp2 = m1p * m1p + m2p * m2p;
    let lhs_l = nu_minus * (rm * rm - l.rho1 * l.rho1) + nu_minus * (mm2 / (2.0 * rm) - l.c1 / 2.0);
    let rhs_l = (2.0 * rm * rm * m2m / rm - 2.0 * l.rho1 * l.rho1 * l.beta / l.rho1)
        + (m2m * mm2 / (2.0 * rm * rm) - l.beta * l.c1 / (2.0 * l.rho1));
    let lhs_r = nu_plus * (r.rho1 * r.rho1 - rp * rp) + nu_plus * (r.c1 / 2.0 - mp2 / (2.0 * rp));
    let rhs_r = (2.0 * r.rho1 * r.rho1 * r.beta / r.rho1 - 2.0 * rp * rp * m2p / rp)
        + (r.beta * r.c1 / (2.0 * r.rho1) - m2p * mp2 / (2.0 * rp * rp));
    let cell = |v: &CellValues| {
        let trace = v.rho1 * v.c1 - v.alpha * v.alpha - v.beta * v.beta;
        let det = (v.c1 / 2.0 - v.alpha * v.alpha / v.rho1 + v.gamma1)
            * (v.c1 / 2.0 - v.beta * v.beta / v.rho1 - v.gamma1)
            - (v.gamma2 - v.alpha * v.beta / v.rho1).powi(2);
        (trace, det)
    };
    let (tl, dl) = cell(l);
    let (tr, dr) = cell(r);
    FullSystem { rh, admissibility: [rhs_l - lhs_l, rhs_r - lhs_r], trace: [tl, tr], det: [dl, dr] }
}

/// Middle-cell boundary values implied by an ansatz solution.
pub fn ansatz_cells(sol: &InterfaceSolution, c: &FanConstants) -> (CellValues, CellValues) {
    let cell =
        |g1| CellValues { rho1: c.rho1, alpha: c.alpha, beta: sol.beta, gamma1: g1, gamma2: c.gamma2, c1: sol.c1 };
    (cell(sol.gamma1_left), cell(sol.gamma1_right))
}

/// Momentum reconstruction used for the endpoint states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentumFormula {
    #[default]
    Corrected,
    AsPrinted,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub consts: FanConstants,
    pub momentum: MomentumFormula,
    /// `(λ₋, λ₊, ζ₂, T)` for the shock-ray ordering check.
    pub rays: (f64, f64, f64, f64),
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            consts: FanConstants::default(),
            momentum: MomentumFormula::Corrected,
            rays: (2f64.sqrt(), -2.0 * 2f64.sqrt(), 0.1, 1.0),
        }
    }
}

/// Checks the explicit Riemann subsolution: endpoint states from the
/// characteristic speeds, RH residuals, strict inequalities, the PD test,
/// the K identity and the ordering against the shock rays.
pub fn verify_riemann_subsolution(opts: &VerifyOptions) -> Report {
    let c = opts.consts;
    let mut rep = Report::new("riemann subsolution");
    let w1 = 4.0 * 2f64.sqrt();
    let recon = match opts.momentum {
        MomentumFormula::Corrected => state_from_wave,
        MomentumFormula::AsPrinted => state_from_wave_as_printed,
    };
    let base = InterfaceStates::baseline();
    let endpoint_gap = match (recon(2f64.sqrt(), w1), recon(-2.0 * 2f64.sqrt(), w1)) {
        (Ok(l), Ok(r)) => [l.rho - base.rho_minus, l.m2 - base.m_minus, r.rho - base.rho_plus, r.m2 - base.m_plus]
            .into_iter()
            .fold(0.0f64, |a, v| a.max(v.abs())),
        _ => f64::INFINITY,
    };
    rep.check("endpoint_states", endpoint_gap < 1e-12, endpoint_gap, "< 1e-12");

    let sol = InterfaceSolution::riemann_constants(&c);
    for (name, v) in [
        ("nu_minus", sol.nu_minus),
        ("nu_plus", sol.nu_plus),
        ("beta", sol.beta),
        ("eps1", sol.eps1_left),
        ("eps2", sol.eps2_left),
        ("rho1", c.rho1),
        ("K", c.k),
    ] {
        rep.value(name, v);
    }
    let res = rh_residuals(&base, &c, &sol);
    for (name, v) in RH_NAMES.iter().zip(res) {
        rep.check(name, v.abs() < 1e-12, v, "|.| < 1e-12");
    }
    let (al, ar) = admissibility_margins(&base, &c, &sol);
    rep.check("admissibility_left", al > 0.0, al, "> 0");
    rep.check("admissibility_right", ar > 0.0, ar, "> 0");
    rep.check("subsolution_eps1", sol.eps1_left > 0.0, sol.eps1_left, "> 0");
    rep.check("subsolution_eps2", sol.eps2_left > 0.0, sol.eps2_left, "> 0");
    let (pl, pr) = pd_check_solution(&sol, &c);
    rep.check("pd_check", pl && pr, if pl && pr { 1.0 } else { 0.0 }, "positive definite");
    let k_back = epsilon1_from_k(c.rho1, sol.beta, sol.eps2_left, c.k);
    let gap = k_back - sol.eps1_left;
    rep.check("k_identity", gap.abs() < 1e-12, gap, "|.| < 1e-12");
    let (lm, lp, z2, t) = opts.rays;
    match shock_bounds(lm, lp, z2, t) {
        Ok(b) => {
            rep.value("s_minus_slope", b.s_minus_slope);
            rep.value("s_plus_slope", b.s_plus_slope);
            let gap = (b.s_minus_slope - sol.nu_minus).min(sol.nu_plus - b.s_plus_slope);
            rep.check("shock_ordering", gap > 0.0, gap, "nu_minus < s_minus < s_plus < nu_plus");
        }
        Err(_) => rep.check("shock_ordering", false, f64::NAN, "valid ray parameters"),
    }
    rep
}

/// Worst value of each margin over interface states on the `w₁ = 4√2`
/// family with characteristic speeds within `delta_hat` of the plateaus
/// and `|ε_Δ| ≤ eps_bar`.
pub fn margin_sweep(c: &FanConstants, delta_hat: f64, eps_bar: f64, n: usize) -> Result<Margins> {
    let w1 = 4.0 * 2f64.sqrt();
    let (lm0, lp0) = (2f64.sqrt(), -2.0 * 2f64.sqrt());
    let mut worst = [f64::INFINITY; 6];
    let node = |j: usize| -1.0 + 2.0 * j as f64 / (n - 1).max(1) as f64;
    for i in 0..n {
        for j in 0..n {
            let l = state_from_wave(lm0 + delta_hat * node(i), w1)?;
            let r = state_from_wave(lp0 + delta_hat * node(j), w1)?;
            let s = InterfaceStates::from_euler(&l, &r)?;
            for k in 0..n {
                let sol = solve_interface(&s, c, eps_bar * node(k))?;
                for (w, v) in worst.iter_mut().zip(Margins::of(&s, c, &sol).as_array()) {
                    *w = w.min(v);
                }
            }
        }
    }
    Ok(Margins {
        adm_left: worst[0],
        adm_right: worst[1],
        e1_left: worst[2],
        e1_right: worst[3],
        e2_left: worst[4],
        e2_right: worst[5],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::Dual;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    // regression values of this implementation at the Riemann data
    const ADM_LEFT: f64 = 1.112_454_6;
    const ADM_RIGHT: f64 = 0.835_145_3;

    #[test]
    fn baseline_rab() {
        let q = rab_quantities(&InterfaceStates::baseline());
        assert_abs_diff_eq!(q.r, -3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.a, 8f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(q.h, -7.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q.b, -13.0, epsilon = 1e-13);
    }

    #[test]
    fn equal_states_are_degenerate() {
        let s = InterfaceStates::new(2.5, 0.7, 2.5, 0.7).unwrap();
        let q = rab_quantities(&s);
        assert_eq!((q.r, q.a, q.h, q.b), (0.0, 0.0, 0.0, 0.0));
        assert!(solve_interface(&s, &FanConstants::default(), 0.0).is_err());
    }

    #[test]
    fn baseline_branch_matches_riemann_numbers() {
        let c = FanConstants::default();
        let sol = solve_interface(&InterfaceStates::baseline(), &c, 0.0).unwrap();
        let (s8, s26, s32) = (8f64.sqrt(), 26f64.sqrt(), 32f64.sqrt());
        assert_abs_diff_eq!(sol.nu_minus, (-s8 - s26) / 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(sol.nu_plus, (s26 - s32) / 6.0, epsilon = 1e-13);
        assert_abs_diff_eq!(sol.beta, (s32 - s26) / 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(sol.eps2_left, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.eps1_left, (50.0 + 16.0 * SQRT_13) / 9.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.nu_minus, -2.642482, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.nu_plus, -0.092972, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.beta, 0.185945, epsilon = 1e-6);
    }

    #[test]
    fn radicand_vanishes_at_thirteen_thirds() {
        let r = solve_interface(&InterfaceStates::baseline(), &FanConstants::default(), 13.0 / 3.0);
        assert!(matches!(r, Err(Error::Radicand { .. })));
    }

    #[test]
    fn perturbed_states_have_small_residuals() {
        let s = InterfaceStates::new(1.02, 2.8, 3.95, 0.05).unwrap();
        let c = FanConstants::default();
        let sol = solve_interface(&s, &c, 0.05).unwrap();
        for v in rh_residuals(&s, &c, &sol) {
            assert!(v.abs() < 1e-10);
        }
        assert_abs_diff_eq!(sol.eps2_left - sol.eps2_right, 0.05, epsilon = 1e-14);
    }

    #[test]
    fn riemann_residuals_and_margins() {
        let c = FanConstants::default();
        let s = InterfaceStates::baseline();
        let sol = InterfaceSolution::riemann_constants(&c);
        for v in rh_residuals(&s, &c, &sol) {
            assert!(v.abs() < 1e-12);
        }
        let (l, r) = admissibility_margins(&s, &c, &sol);
        assert_abs_diff_eq!(l, ADM_LEFT, epsilon = 1e-6);
        assert_abs_diff_eq!(r, ADM_RIGHT, epsilon = 1e-6);
    }

    #[test]
    fn corrupted_beta_shows_in_left_residuals() {
        let c = FanConstants::default();
        let s = InterfaceStates::baseline();
        let mut sol = InterfaceSolution::riemann_constants(&c);
        sol.beta += 0.1;
        let res = rh_residuals(&s, &c, &sol);
        assert!(res[0].abs() >= 0.05 && res[1].abs() >= 0.05);
    }

    #[test]
    fn huge_negative_speed_breaks_left_admissibility() {
        let c = FanConstants::default();
        let s = InterfaceStates::baseline();
        let mut sol = InterfaceSolution::riemann_constants(&c);
        sol.nu_minus = -1e3;
        assert!(admissibility_margins(&s, &c, &sol).0 < 0.0);
    }

    #[test]
    fn margins_continuous_in_eps() {
        let c = FanConstants::default();
        let s = InterfaceStates::baseline();
        let a = admissibility_margins(&s, &c, &solve_interface(&s, &c, 0.0).unwrap());
        let b = admissibility_margins(&s, &c, &solve_interface(&s, &c, 0.01).unwrap());
        assert!((a.0 - b.0).abs() < 0.1 && (a.1 - b.1).abs() < 0.1);
    }

    #[test]
    fn pd_boundary_and_riemann() {
        let c = FanConstants::default();
        let sol = InterfaceSolution::riemann_constants(&c);
        assert_eq!(pd_check_solution(&sol, &c), (true, true));
        // γ₁ tuned so that ε₁ = 0: only semidefinite
        let b2 = sol.beta * sol.beta / c.rho1;
        let g1 = sol.c1 / 2.0 - b2;
        assert!(!matrix_pd_check(c.rho1, [0.0, sol.beta], [[g1, 0.0], [0.0, -g1]], sol.c1));
    }

    #[test]
    fn k_identity_round_trip() {
        let c = FanConstants::default();
        let beta = (32f64.sqrt() - 26f64.sqrt()) / 3.0;
        let e1 = epsilon1_from_k(c.rho1, beta, 1.0, c.k);
        assert_abs_diff_eq!(e1, (50.0 + 16.0 * SQRT_13) / 9.0, epsilon = 1e-13);
        assert_abs_diff_eq!(k_from_epsilon(c.rho1, beta, e1, 1.0), c.k, epsilon = 1e-13);
        assert_eq!(epsilon1_from_k(2.0, 0.0, 0.0, 4.0), 0.0);
    }

    #[test]
    fn full_system_reduces_to_ansatz() {
        let c = FanConstants::default();
        let s = InterfaceStates::new(1.03, 2.75, 3.96, 0.04).unwrap();
        let sol = solve_interface(&s, &c, 0.03).unwrap();
        let (l, r) = ansatz_cells(&sol, &c);
        let minus = EulerState::new(s.rho_minus, 0.0, s.m_minus).unwrap();
        let plus = EulerState::new(s.rho_plus, 0.0, s.m_plus).unwrap();
        let full = full_system(&minus, &plus, &l, &r, sol.nu_minus, sol.nu_plus);
        for v in full.rh {
            assert!(v.abs() < 1e-12, "{v}");
        }
        let (al, ar) = admissibility_margins(&s, &c, &sol);
        assert_abs_diff_eq!(full.admissibility[0], al, epsilon = 1e-12);
        assert_abs_diff_eq!(full.admissibility[1], ar, epsilon = 1e-12);
        // determinant factors as ε₁ε₂ under the ansatz
        assert_abs_diff_eq!(full.det[0], sol.eps1_left * sol.eps2_left, epsilon = 1e-10);
        assert_abs_diff_eq!(full.det[1], sol.eps1_right * sol.eps2_right, epsilon = 1e-10);
        assert!(full.trace[0] > 0.0 && full.trace[1] > 0.0);
    }

    #[test]
    fn full_system_sees_transversal_momentum() {
        let c = FanConstants::default();
        let s = InterfaceStates::baseline();
        let sol = InterfaceSolution::riemann_constants(&c);
        let (mut l, r) = ansatz_cells(&sol, &c);
        l.alpha = 0.2;
        let minus = EulerState::new(1.0, 0.0, s.m_minus).unwrap();
        let plus = EulerState::new(4.0, 0.0, 0.0).unwrap();
        let full = full_system(&minus, &plus, &l, &r, sol.nu_minus, sol.nu_plus);
        assert!(full.rh[1].abs() > 0.1);
    }

    #[test]
    fn verify_default_passes() {
        let rep = verify_riemann_subsolution(&VerifyOptions::default());
        assert!(rep.passed(), "{:?}", rep.failing());
    }

    #[test]
    fn verify_printed_sign_fails_endpoints() {
        let opts = VerifyOptions { momentum: MomentumFormula::AsPrinted, ..Default::default() };
        let rep = verify_riemann_subsolution(&opts);
        assert_eq!(rep.failing(), vec!["endpoint_states"]);
    }

    #[test]
    fn verify_perturbed_k_fails_momentum() {
        let mut opts = VerifyOptions::default();
        opts.consts.k += 1e-3;
        let rep = verify_riemann_subsolution(&opts);
        let right = rep.get_check("rh_residual_right_momentum").unwrap();
        assert!(!right.pass && right.value.abs() > 1e-4);
        opts.consts = FanConstants { rho1: 3.0, ..Default::default() };
        let rep = verify_riemann_subsolution(&opts);
        assert!(rep.failing().iter().any(|n| n.starts_with("rh_residual")));
    }

    #[test]
    fn sweep_default_neighbourhood_is_admissible() {
        let m = margin_sweep(&FanConstants::default(), 0.05, 0.1, 7).unwrap();
        assert!(m.all_positive(), "{m:?}");
    }

    #[test]
    fn dual_beta_matches_difference() {
        let s = InterfaceStates::baseline();
        let sd = InterfaceStates {
            rho_minus: Dual::new(s.rho_minus, 0.3),
            m_minus: Dual::new(s.m_minus, -0.2),
            rho_plus: Dual::new(s.rho_plus, 0.1),
            m_plus: Dual::new(s.m_plus, 0.4),
        };
        let d = speeds(&sd, 2.0, Dual::new(0.01, 0.0)).unwrap().beta.d;
        let h = 1e-6;
        let at = |k: f64| {
            let p = InterfaceStates::new(1.0 + 0.3 * k, s.m_minus - 0.2 * k, 4.0 + 0.1 * k, 0.4 * k).unwrap();
            speeds(&p, 2.0, 0.01).unwrap().beta
        };
        assert!((d - (at(h) - at(-h)) / (2.0 * h)).abs() < 1e-8);
    }

    fn near_baseline() -> impl Strategy<Value = (InterfaceStates, f64)> {
        (-0.05f64..0.05, -0.05f64..0.05, -0.05f64..0.05, -0.05f64..0.05, -0.1f64..0.1).prop_map(|(a, b, c, d, e)| {
            let s = InterfaceStates::new(1.0 + a, 8f64.sqrt() + b, 4.0 + c, d).unwrap();
            (s, e)
        })
    }

    proptest! {
        #[test]
        fn closed_form_solves_rh((s, eps) in near_baseline()) {
            let c = FanConstants::default();
            let sol = solve_interface(&s, &c, eps).unwrap();
            for v in rh_residuals(&s, &c, &sol) {
                prop_assert!(v.abs() < 1e-10);
            }
            prop_assert!((sol.eps2_left - sol.eps2_right - eps).abs() < 1e-14);
            prop_assert!(sol.nu_minus < sol.nu_plus);
        }

        #[test]
        fn b_forms_agree(rm in 0.2f64..5.0, mm in -3.0f64..3.0, rp in 0.2f64..5.0, mp in -3.0f64..3.0) {
            let s = InterfaceStates::new(rm, mm, rp, mp).unwrap();
            let b = rab_quantities(&s).b;
            prop_assert!((b - b_product_form(&s)).abs() < 1e-12 * (1.0 + b.abs()) * 10.0);
        }

        #[test]
        fn pd_iff_positive_eps(e1 in -5.0f64..5.0, e2 in -5.0f64..5.0, beta in -1.0f64..1.0) {
            let c = FanConstants::default();
            let c1 = beta * beta / c.rho1 + e1 + e2;
            let g1 = c1 / 2.0 - e1 - beta * beta / c.rho1;
            let pd = matrix_pd_check(c.rho1, [0.0, beta], [[g1, 0.0], [0.0, -g1]], c1);
            prop_assume!(e1.abs() > 1e-9 && e2.abs() > 1e-9);
            prop_assert_eq!(pd, e1 > 0.0 && e2 > 0.0);
        }
    }
}
