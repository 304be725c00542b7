//! Boundary traces on the fan, the coefficients f, g, l of the ε_Δ equation
//! and its Picard solution on a logarithmic time grid.
//!
//! The equation `f ε' = -ε/l - g`, `ε(0) = 0`, is solved in integral form
//! `ε(t) = -e^{-Λ(t)} ∫_0^t (g/f) e^{Λ}` with `Λ' = 1/(l f)`. All integrals
//! are taken in `u = log t` on a uniform grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler_map::density_momentum;
use crate::profiles::{f0, f0_d1, smooth_step, smooth_step_d1, Side};
use crate::quad::{cumulative, cumulative_dt, integrate_from_zero};
use crate::real::{Dual, Real};
use crate::subsolution::{
    rab_quantities, solve_interface, speeds, FanConstants, InterfaceSolution, InterfaceStates, Margins,
};

pub const W1: f64 = 4.0 * std::f64::consts::SQRT_2;
pub const LAMBDA_MINUS: f64 = std::f64::consts::SQRT_2;
pub const LAMBDA_PLUS: f64 = -2.0 * std::f64::consts::SQRT_2;

/// Prescribed λ₁ on the two fan boundaries: `λ₋ - ζ₂/T + a₋f0(t)` and
/// `λ₊ + ζ₂/T - a₊f0(t)` below `delta`, the plateaus `λ∓` above
/// `delta_prime`, and a flat smooth-step blend in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSpec {
    pub zeta2_over_t: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub a_minus: f64,
    pub a_plus: f64,
}

impl TraceSpec {
    pub fn new(zeta2_over_t: f64, delta: f64, delta_prime: f64, a_minus: f64, a_plus: f64) -> Result<Self> {
        if !(zeta2_over_t > 0.0) {
            return Err(Error::Domain { op: "TraceSpec::new", what: "zeta2/T", value: zeta2_over_t });
        }
        if !(delta > 0.0 && delta < delta_prime && delta_prime < (-1f64).exp()) {
            return Err(Error::Geometry(format!("need 0 < delta < delta_prime < 1/e, got {delta}, {delta_prime}")));
        }
        for (what, a) in [("a_minus", a_minus), ("a_plus", a_plus)] {
            if !(a > 0.0) {
                return Err(Error::Domain { op: "TraceSpec::new", what, value: a });
            }
            // the blend only stays monotone if the f0 branch is still below
            // the plateau where it ends
            if a * f0(delta_prime) >= zeta2_over_t {
                return Err(Error::Geometry(format!(
                    "{what} * f0(delta_prime) = {} reaches zeta2/T = {zeta2_over_t}; trace not monotone",
                    a * f0(delta_prime)
                )));
            }
        }
        Ok(TraceSpec { zeta2_over_t, delta, delta_prime, a_minus, a_plus })
    }

    /// Traces frozen at the plateaus for all t > 0.
    pub fn plateau() -> Self {
        TraceSpec { zeta2_over_t: 0.0, delta: 0.03, delta_prime: 0.06, a_minus: 0.0, a_plus: 0.0 }
    }

    fn plateau_value(side: Side) -> f64 {
        match side {
            Side::Left => LAMBDA_MINUS,
            Side::Right => LAMBDA_PLUS,
        }
    }

    /// The f0 branch continued past `delta`, with its first derivative.
    fn branch(&self, side: Side, t: f64) -> (f64, f64) {
        let (sign, a) = match side {
            Side::Left => (1.0, self.a_minus),
            Side::Right => (-1.0, self.a_plus),
        };
        let base = Self::plateau_value(side) - sign * self.zeta2_over_t;
        if a == 0.0 {
            return (base, 0.0);
        }
        let d = if t > 0.0 { sign * a * f0_d1(t) } else { f64::INFINITY * sign };
        (base + sign * a * f0(t), d)
    }

    pub fn lambda(&self, side: Side, t: f64) -> f64 {
        self.eval(side, t).0
    }

    pub fn lambda_d1(&self, side: Side, t: f64) -> f64 {
        self.eval(side, t).1
    }

    pub fn eval(&self, side: Side, t: f64) -> (f64, f64) {
        let p = Self::plateau_value(side);
        if t >= self.delta_prime {
            return (p, 0.0);
        }
        let (b, db) = self.branch(side, t);
        if t <= self.delta {
            return (b, db);
        }
        let w = self.delta_prime - self.delta;
        let s = (t - self.delta) / w;
        let sg = smooth_step(s);
        (b + sg * (p - b), db * (1.0 - sg) + smooth_step_d1(s) / w * (p - b))
    }

    pub fn lambda_dual(&self, side: Side, t: f64) -> Dual {
        let (v, d) = self.eval(side, t);
        Dual::new(v, d)
    }
}

/// Outer states on the fan boundaries at time t (`w₁ = 4√2`).
pub fn boundary_traces(t: f64, spec: &TraceSpec) -> Result<InterfaceStates> {
    if !(t > 0.0) {
        return Err(Error::Domain { op: "boundary_traces", what: "t", value: t });
    }
    Ok(traces_at(t, spec))
}

/// Trace states including `t = 0`, where the f0 term vanishes.
pub fn traces_at(t: f64, spec: &TraceSpec) -> InterfaceStates {
    let (rho_minus, m_minus) = density_momentum(spec.lambda(Side::Left, t), W1);
    let (rho_plus, m_plus) = density_momentum(spec.lambda(Side::Right, t), W1);
    InterfaceStates { rho_minus, m_minus, rho_plus, m_plus }
}

/// Trace states carrying their time derivatives.
pub fn boundary_traces_dual(t: f64, spec: &TraceSpec) -> Result<InterfaceStates<Dual>> {
    if !(t > 0.0) {
        return Err(Error::Domain { op: "boundary_traces_dual", what: "t", value: t });
    }
    let (rho_minus, m_minus) = density_momentum(spec.lambda_dual(Side::Left, t), W1);
    let (rho_plus, m_plus) = density_momentum(spec.lambda_dual(Side::Right, t), W1);
    Ok(InterfaceStates { rho_minus, m_minus, rho_plus, m_plus })
}

/// `∂β/∂ε_Δ = ab / (2√(Q ab))` with `a = ρ₋ - ρ₁`, `b = ρ₁ - ρ₊`.
pub fn coeff_f_states(s: &InterfaceStates, consts: &FanConstants, eps: f64) -> Result<f64> {
    let q = rab_quantities(s);
    let rad = -q.b + q.r * eps;
    if !(rad > 0.0) {
        return Err(Error::Radicand { value: rad });
    }
    let ab = (s.rho_minus - consts.rho1) * (consts.rho1 - s.rho_plus);
    Ok(ab / (2.0 * (rad * ab).sqrt()))
}

pub fn coeff_f(t: f64, eps: f64, spec: &TraceSpec, consts: &FanConstants) -> Result<f64> {
    coeff_f_states(&boundary_traces(t, spec)?, consts, eps)
}

/// `∂β/∂t` at fixed ε_Δ, by forward differentiation through the traces.
pub fn coeff_g(t: f64, eps: f64, spec: &TraceSpec, consts: &FanConstants) -> Result<f64> {
    let s = boundary_traces_dual(t, spec)?;
    Ok(speeds(&s, consts.rho1, Dual::cst(eps))?.beta.d)
}

/// `ν₊ - ν₋` at time t (t = 0 allowed) and the given ε_Δ.
pub fn speed_gap(t: f64, eps: f64, spec: &TraceSpec, consts: &FanConstants) -> Result<f64> {
    let sp = speeds(&traces_at(t, spec), consts.rho1, eps)?;
    Ok(sp.nu_plus - sp.nu_minus)
}

/// `l(t) = ∫_0^t (ν₊ - ν₋)` along an ε_Δ path.
pub fn length_l<P: Fn(f64) -> f64>(t: f64, path: P, spec: &TraceSpec, consts: &FanConstants) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain { op: "length_l", what: "t", value: t });
    }
    let mut err = None;
    let v = integrate_from_zero(
        |s| match speed_gap(s, path(s), spec, consts) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        t,
        LOG_SPAN,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Width in `log t` of the integration range for integrals from 0.
const LOG_SPAN: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub t_end: f64,
    pub t_min: f64,
    pub grid_size: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Decades of extra grid below `t_min` on which the iterate is frozen
    /// at 0 while ε is still evaluated.
    pub tail_decades: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { t_end: 0.06, t_min: 1e-8, grid_size: 2048, tol: 1e-10, max_iter: 50, tail_decades: 8.0 }
    }
}

impl PicardOptions {
    pub fn validate(&self, spec: &TraceSpec) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min < self.t_end) {
            return Err(Error::Domain { op: "picard_solve", what: "t_min", value: self.t_min });
        }
        if !(self.t_end <= spec.delta_prime.min(0.5)) {
            return Err(Error::Domain { op: "picard_solve", what: "T_end", value: self.t_end });
        }
        if self.grid_size < 8 {
            return Err(Error::Domain { op: "picard_solve", what: "grid_size", value: self.grid_size as f64 });
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain { op: "picard_solve", what: "tol", value: self.tol });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Largest ratio of consecutive sup distances from iteration 2 on.
    pub q: f64,
    /// `sup |ε|·√|log t|` over the main grid.
    pub bound_c: f64,
    /// `sup |F(ε) - ε|` over the main grid for the returned ε.
    pub map_residual: f64,
    /// Largest residual `|f ε_u + tε/l + tg|` on interior points, with ε_u
    /// from finite differences; this is discretisation error and shrinks
    /// like `du²`.
    pub ode_residual: f64,
    pub eps_at_t_min: f64,
    pub eps_at_floor: f64,
    pub sup_eps: f64,
    /// Largest grid time up to which all six margins stay positive.
    pub margin_horizon: f64,
    pub min_margins: [f64; 6],
    pub f_range: (f64, f64),
    pub l_over_t_range: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsDeltaSolution {
    pub spec: TraceSpec,
    pub consts: FanConstants,
    /// Ascending times; the main grid starts at `main_start`.
    pub grid: Vec<f64>,
    pub main_start: usize,
    pub du: f64,
    pub values: Vec<f64>,
    pub iterations: usize,
    pub sup_distances: Vec<f64>,
    pub nu_minus: Vec<f64>,
    pub nu_plus: Vec<f64>,
    pub beta: Vec<f64>,
    pub eps2_left: Vec<f64>,
    pub eps2_right: Vec<f64>,
    pub margins: Vec<Margins>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub l: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl EpsDeltaSolution {
    /// ε_Δ at time t: linear in `log t` between nodes, 0 below the grid.
    pub fn eps_at(&self, t: f64) -> f64 {
        let n = self.grid.len();
        if !(t > self.grid[0]) {
            return if t == self.grid[0] { self.values[0] } else { 0.0 };
        }
        if t >= self.grid[n - 1] {
            return self.values[n - 1];
        }
        let x = (t.ln() - self.grid[0].ln()) / self.du;
        let i = (x.floor() as usize).min(n - 2);
        let w = x - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    pub fn interface(&self, i: usize) -> Result<InterfaceSolution> {
        solve_interface(&traces_at(self.grid[i], &self.spec), &self.consts, self.values[i])
    }

    pub fn main_grid(&self) -> &[f64] {
        &self.grid[self.main_start..]
    }

    pub fn main_values(&self) -> &[f64] {
        &self.values[self.main_start..]
    }
}

/// Per-node data of one sweep.
struct Sweep {
    f: Vec<f64>,
    g: Vec<f64>,
    l: Vec<f64>,
    nu_minus: Vec<f64>,
    nu_plus: Vec<f64>,
    eps: Vec<f64>,
}

fn log_grid(opts: &PicardOptions) -> (Vec<f64>, usize, f64) {
    let n = opts.grid_size;
    let (u0, u1) = (opts.t_min.ln(), opts.t_end.ln());
    let du = (u1 - u0) / (n - 1) as f64;
    let tail = (opts.tail_decades * std::f64::consts::LN_10 / du).ceil() as usize;
    let mut grid = Vec::with_capacity(tail + n);
    for k in (1..=tail).rev() {
        grid.push((u0 - k as f64 * du).exp());
    }
    for i in 0..n {
        grid.push(if i == n - 1 {
            opts.t_end
        } else if i == 0 {
            opts.t_min
        } else {
            (u0 + i as f64 * du).exp()
        });
    }
    (grid, tail, du)
}

/// One application of the integral map to the iterate `delta`.
fn sweep(
    grid: &[f64],
    du: f64,
    delta: &[f64],
    states: &[InterfaceStates<Dual>],
    l0: f64,
    consts: &FanConstants,
) -> Result<Sweep> {
    let n = grid.len();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut nu_minus = vec![0.0; n];
    let mut nu_plus = vec![0.0; n];
    for i in 0..n {
        let sp = speeds(&states[i], consts.rho1, Dual::cst(delta[i]))?;
        let plain = InterfaceStates {
            rho_minus: states[i].rho_minus.v,
            m_minus: states[i].m_minus.v,
            rho_plus: states[i].rho_plus.v,
            m_plus: states[i].m_plus.v,
        };
        f[i] = coeff_f_states(&plain, consts, delta[i])?;
        g[i] = sp.beta.d;
        nu_minus[i] = sp.nu_minus.v;
        nu_plus[i] = sp.nu_plus.v;
    }
    let gap: Vec<f64> = (0..n).map(|i| nu_plus[i] - nu_minus[i]).collect();
    let l: Vec<f64> = cumulative_dt(&gap, grid, du).into_iter().map(|v| l0 + v).collect();
    // Λ with Λ = 0 at the last node; L t is the integrand in u
    let big_l_t: Vec<f64> = (0..n).map(|i| grid[i] / (l[i] * f[i])).collect();
    let lam_raw = cumulative(&big_l_t, du);
    let lam: Vec<f64> = lam_raw.iter().map(|v| v - lam_raw[n - 1]).collect();
    let j: Vec<f64> = (0..n).map(|i| g[i] / f[i] * lam[i].exp() * grid[i]).collect();
    // below the grid the integrand decays like e^{p u} with p = L t
    let i0 = j[0] / big_l_t[0];
    let int = cumulative(&j, du);
    let eps = (0..n).map(|i| -(-lam[i]).exp() * (i0 + int[i])).collect();
    Ok(Sweep { f, g, l, nu_minus, nu_plus, eps })
}

/// Picard iteration from ε ≡ 0 until the sup distance drops below `tol`.
pub fn picard_solve(spec: &TraceSpec, consts: &FanConstants, opts: &PicardOptions) -> Result<EpsDeltaSolution> {
    opts.validate(spec)?;
    let (grid, main_start, du) = log_grid(opts);
    let n = grid.len();
    let states: Vec<InterfaceStates<Dual>> =
        grid.iter().map(|&t| boundary_traces_dual(t, spec)).collect::<Result<_>>()?;
    let l0 = length_l(grid[0], |_| 0.0, spec, consts)?;
    let base = rab_quantities(&InterfaceStates::baseline());
    let radius = base.b.abs() / (2.0 * base.r.abs());

    let mut delta = vec![0.0; n];
    let mut dists: Vec<f64> = Vec::new();
    let mut rising = 0;
    let mut last: Option<Sweep> = None;
    let mut converged = false;
    for it in 1..=opts.max_iter {
        let s = sweep(&grid, du, &delta, &states, l0, consts)?;
        let sup = s.eps.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !(sup < radius) {
            return Err(Error::Ball { sup, radius });
        }
        // the tail is frozen, so only main nodes measure the update
        let d = s.eps[main_start..].iter().zip(&delta[main_start..]).fold(0.0f64, |a, (e, p)| a.max((e - p).abs()));
        if let Some(&prev) = dists.last() {
            if d >= prev && d > 0.0 {
                rising += 1;
                if rising >= 3 {
                    return Err(Error::NonContraction { iteration: it });
                }
            } else {
                rising = 0;
            }
        }
        dists.push(d);
        delta[main_start..n].copy_from_slice(&s.eps[main_start..n]);
        last = Some(s);
        if d < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::MaxIterations { iterations: opts.max_iter });
    }
    let s = last.expect("at least one sweep");
    // one more application of the map to the returned iterate
    delta[main_start..].copy_from_slice(&s.eps[main_start..]);
    let again = sweep(&grid, du, &delta, &states, l0, consts)?;
    let map_residual =
        again.eps[main_start..].iter().zip(&s.eps[main_start..]).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    finish(spec, consts, grid, main_start, du, dists, s, map_residual)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    spec: &TraceSpec,
    consts: &FanConstants,
    grid: Vec<f64>,
    main_start: usize,
    du: f64,
    dists: Vec<f64>,
    s: Sweep,
    map_residual: f64,
) -> Result<EpsDeltaSolution> {
    let n = grid.len();
    let mut beta = Vec::with_capacity(n);
    let mut eps2_left = Vec::with_capacity(n);
    let mut eps2_right = Vec::with_capacity(n);
    let mut margins = Vec::with_capacity(n);
    for (&t, &eps) in grid.iter().zip(&s.eps) {
        let st = traces_at(t, spec);
        let sol = solve_interface(&st, consts, eps)?;
        beta.push(sol.beta);
        eps2_left.push(sol.eps2_left);
        eps2_right.push(sol.eps2_right);
        margins.push(Margins::of(&st, consts, &sol));
    }
    let q = dists.windows(2).skip(1).map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 }).fold(0.0f64, f64::max);
    let bound_c = (main_start..n).map(|i| s.eps[i].abs() * grid[i].ln().abs().sqrt()).fold(0.0f64, f64::max);
    let ode_residual = ode_residual(&grid, du, &s, spec);
    let mut min_margins = [f64::INFINITY; 6];
    let mut horizon = 0.0;
    let mut intact = true;
    for (i, m) in margins.iter().enumerate() {
        for (w, v) in min_margins.iter_mut().zip(m.as_array()) {
            *w = w.min(v);
        }
        intact &= m.all_positive();
        if intact {
            horizon = grid[i];
        }
    }
    let f_range = s.f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let l_over_t_range =
        s.l.iter().zip(&grid).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (&l, &t)| (a.min(l / t), b.max(l / t)));
    let diagnostics = Diagnostics {
        q,
        bound_c,
        map_residual,
        ode_residual,
        eps_at_t_min: s.eps[main_start],
        eps_at_floor: s.eps[0],
        sup_eps: s.eps.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        margin_horizon: horizon,
        min_margins,
        f_range,
        l_over_t_range,
    };
    Ok(EpsDeltaSolution {
        spec: *spec,
        consts: *consts,
        grid,
        main_start,
        du,
        // the map extrapolates ε = 0 on the tail, and so does the solution
        values: s.eps.iter().enumerate().map(|(i, &v)| if i < main_start { 0.0 } else { v }).collect(),
        iterations: dists.len(),
        sup_distances: dists,
        nu_minus: s.nu_minus,
        nu_plus: s.nu_plus,
        beta,
        eps2_left,
        eps2_right,
        margins,
        f: s.f,
        g: s.g,
        l: s.l,
        diagnostics,
    })
}

/// `max |f ε_u + tε/l + tg|` with a five-point derivative in u, skipping
/// stencils that straddle `delta` or `delta_prime`.
fn ode_residual(grid: &[f64], du: f64, s: &Sweep, spec: &TraceSpec) -> f64 {
    let n = grid.len();
    let mut worst = 0.0f64;
    for i in 2..n.saturating_sub(2) {
        let (lo, hi) = (grid[i - 2], grid[i + 2]);
        if (lo..=hi).contains(&spec.delta) || (lo..=hi).contains(&spec.delta_prime) {
            continue;
        }
        let e = &s.eps;
        let eu = (e[i - 2] - 8.0 * e[i - 1] + 8.0 * e[i + 1] - e[i + 2]) / (12.0 * du);
        let r = s.f[i] * eu + grid[i] * e[i] / s.l[i] + grid[i] * s.g[i];
        worst = worst.max(r.abs());
    }
    worst
}
