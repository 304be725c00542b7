//! The four pipeline commands. Each writes its files into the output
//! directory and returns a report whose checks decide the exit status.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::burgers::CharSolution;
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::euler_map::state_from_wave;
use crate::initial_data::{build_initial_datum, composite_form_gap, fan_curves, pullback_h, round_trip, FanPartition};
use crate::ode_epsilon::{picard_solve, EpsDeltaSolution, PicardOptions, LAMBDA_MINUS, LAMBDA_PLUS, W1};
use crate::profiles::{build_compression_datum, BuildMode, HPair, Side};
use crate::report::{num, Report};
use crate::subsolution::{margin_sweep, verify_riemann_subsolution, MARGIN_NAMES};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyRiemann,
    SolveFan,
    BuildDatum,
    TraceCharacteristics,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyRiemann => "verify-riemann",
            Command::SolveFan => "solve-fan",
            Command::BuildDatum => "build-datum",
            Command::TraceCharacteristics => "trace-characteristics",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: ScenarioConfig,
    /// Overrides `output_dir` of the config.
    pub out: Option<PathBuf>,
    /// Number of grid doublings in refinement studies.
    pub refine: usize,
    /// Turns refinement studies from reported values into checks.
    pub strict: bool,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed() {
            EXIT_PASS
        } else {
            EXIT_CHECK
        }
    }
}

/// Runs `cmd`. Only configuration problems and I/O failures are errors;
/// numerical failures become failing checks in the report.
pub fn run(cmd: Command, opts: &RunOptions) -> Result<Outcome> {
    let cfg = &opts.config;
    cfg.validate()?;
    let dir = opts.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let mut out = Output { dir, files: Vec::new() };
    out.write("config_used.txt", &cfg.to_text())?;
    let report = match cmd {
        Command::VerifyRiemann => verify_riemann(cfg, &mut out)?,
        Command::SolveFan => solve_fan(cfg, opts, &mut out)?,
        Command::BuildDatum => build_datum(cfg, &mut out)?,
        Command::TraceCharacteristics => trace_characteristics(cfg, opts, &mut out)?,
    };
    let name = format!("{}_report.txt", cmd.name().replace('-', "_"));
    out.write(&name, &report.to_text())?;
    Ok(Outcome { report, files: out.files })
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Config { field: "--out".into(), msg: format!("{}: {e}", path.display()) }
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        self.files.push(path);
        Ok(())
    }
}

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = format!("# {}\n", header.join("\t"));
    for r in rows {
        let line: Vec<String> = r.iter().map(|&v| num(v)).collect();
        let _ = writeln!(s, "{}", line.join("\t"));
    }
    s
}

/// A check under `--strict`, otherwise a value plus a status note.
fn advisory(rep: &mut Report, strict: bool, name: &str, pass: bool, value: f64, bound: &str) {
    if strict {
        rep.check(name, pass, value, bound);
    } else {
        rep.value(name, value);
        rep.note(&format!("{name}_status"), format!("{} (require {bound})", if pass { "PASS" } else { "FAIL" }));
    }
}

fn fail(rep: &mut Report, name: &str, e: &Error) {
    rep.note(&format!("{name}_error"), e.to_string());
    rep.check(name, false, f64::NAN, "completes");
}

fn verify_riemann(cfg: &ScenarioConfig, _out: &mut Output) -> Result<Report> {
    let mut rep = verify_riemann_subsolution(&cfg.verify_options());
    match margin_sweep(&cfg.fan_constants(), cfg.delta_hat, cfg.eps_bar, cfg.sweep_points) {
        Ok(m) => {
            for (name, v) in MARGIN_NAMES.iter().zip(m.as_array()) {
                rep.value(&format!("sweep_{name}"), v);
            }
            rep.check("margin_sweep", m.all_positive(), m.min(), "> 0 over the delta_hat, eps_bar box");
        }
        Err(e) => fail(&mut rep, "margin_sweep", &e),
    }
    Ok(rep)
}

fn solve(cfg: &ScenarioConfig, opts: &PicardOptions) -> Result<EpsDeltaSolution> {
    picard_solve(&cfg.trace_spec()?, &cfg.fan_constants(), opts)
}

fn solve_report(rep: &mut Report, sol: &EpsDeltaSolution, tol: f64) {
    let d = &sol.diagnostics;
    rep.value("iterations", sol.iterations as f64);
    for (k, v) in sol.sup_distances.iter().enumerate() {
        rep.value(&format!("sup_distance_{}", k + 1), *v);
    }
    rep.value("bound_c", d.bound_c);
    rep.value("ode_residual_fd", d.ode_residual);
    rep.value("eps_at_floor", d.eps_at_floor);
    rep.value("sup_eps", d.sup_eps);
    rep.value("f_min", d.f_range.0);
    rep.value("f_max", d.f_range.1);
    rep.value("l_over_t_min", d.l_over_t_range.0);
    rep.value("l_over_t_max", d.l_over_t_range.1);
    for (name, v) in MARGIN_NAMES.iter().zip(d.min_margins) {
        rep.value(&format!("min_{name}"), v);
    }
    rep.check("contraction", d.q < 1.0, d.q, "q < 1");
    rep.check("ball", d.sup_eps < 13.0 / 6.0, d.sup_eps, "< 13/6");
    rep.check("eps_at_t_min", d.eps_at_t_min.abs() < 1e-2, d.eps_at_t_min, "|.| < 1e-2");
    rep.check("map_residual", d.map_residual < 10.0 * tol, d.map_residual, "< 10 tol");
    rep.check("delta0", d.margin_horizon > 0.0, d.margin_horizon, "> 0");
}

fn fan_table(fan: &FanPartition) -> String {
    table(&["t", "nu_tilde_minus", "nu_tilde_plus", "s_minus", "s_plus"], fan.rows().into_iter().map(|r| r.to_vec()))
}

fn solution_table(sol: &EpsDeltaSolution) -> String {
    let n = sol.grid.len();
    table(
        &["t", "eps_delta", "nu_minus", "nu_plus", "beta", "eps2L", "eps2R", "margin_left", "margin_right"],
        (sol.main_start..n).map(|i| {
            let m = &sol.margins[i];
            vec![
                sol.grid[i],
                sol.values[i],
                sol.nu_minus[i],
                sol.nu_plus[i],
                sol.beta[i],
                sol.eps2_left[i],
                sol.eps2_right[i],
                m.adm_left.min(m.e1_left).min(m.e2_left),
                m.adm_right.min(m.e1_right).min(m.e2_right),
            ]
        }),
    )
}

fn solve_fan(cfg: &ScenarioConfig, opts: &RunOptions, out: &mut Output) -> Result<Report> {
    let mut rep = Report::new("solve-fan");
    let base = cfg.picard_options();
    let sol = match solve(cfg, &base) {
        Ok(s) => s,
        Err(e) => {
            fail(&mut rep, "picard", &e);
            return Ok(rep);
        }
    };
    solve_report(&mut rep, &sol, cfg.tol);
    out.write("fan_solution.tsv", &solution_table(&sol))?;
    match fan_curves(&sol) {
        Ok(fan) => {
            rep.check("sandwich", true, 0.0, "nu_tilde_minus < s_minus, nu_tilde_plus > s_plus");
            out.write("fan_geometry.tsv", &fan_table(&fan))?;
        }
        Err(e) => fail(&mut rep, "sandwich", &e),
    }
    match margin_sweep(&cfg.fan_constants(), cfg.delta_hat, cfg.eps_bar, cfg.sweep_points) {
        Ok(m) => rep.check("margin_sweep", m.all_positive(), m.min(), "> 0"),
        Err(e) => fail(&mut rep, "margin_sweep", &e),
    }
    // nested grids: size 2(n-1)+1 halves du and keeps every old node
    let mut prev = sol;
    for level in 1..=opts.refine {
        let size = 2 * (prev.main_grid().len() - 1) + 1;
        let fine = match solve(cfg, &PicardOptions { grid_size: size, ..base }) {
            Ok(s) => s,
            Err(e) => {
                fail(&mut rep, &format!("refine_{level}"), &e);
                break;
            }
        };
        let (a, b) = (prev.main_values(), fine.main_values());
        let diff = a.iter().enumerate().fold(0.0f64, |w, (i, v)| w.max((v - b[2 * i]).abs()));
        let drift = (fine.diagnostics.bound_c - prev.diagnostics.bound_c).abs() / prev.diagnostics.bound_c;
        rep.value(&format!("refine_{level}_grid_size"), size as f64);
        rep.value(&format!("refine_{level}_bound_c"), fine.diagnostics.bound_c);
        advisory(&mut rep, opts.strict, &format!("refine_{level}_sup_diff"), diff < 5.0 * cfg.tol, diff, "< 5 tol");
        advisory(&mut rep, opts.strict, &format!("refine_{level}_c_drift"), drift < 0.1, drift, "< 0.1");
        prev = fine;
    }
    Ok(rep)
}

fn build_datum(cfg: &ScenarioConfig, out: &mut Output) -> Result<Report> {
    let mut rep = Report::new("build-datum");
    let sol = match solve(cfg, &cfg.picard_options()) {
        Ok(s) => s,
        Err(e) => {
            fail(&mut rep, "picard", &e);
            return Ok(rep);
        }
    };
    rep.value("delta0", sol.diagnostics.margin_horizon);
    let fan = match fan_curves(&sol) {
        Ok(f) => f,
        Err(e) => {
            fail(&mut rep, "sandwich", &e);
            return Ok(rep);
        }
    };
    out.write("fan_geometry.tsv", &fan_table(&fan))?;
    let maps = pullback_h(Side::Left, &fan).and_then(|l| Ok((l, pullback_h(Side::Right, &fan)?)));
    let (left, right) = match maps {
        Ok(m) => m,
        Err(e) => {
            fail(&mut rep, "pullback", &e);
            return Ok(rep);
        }
    };
    for (tag, m) in [("left", &left), ("right", &right)] {
        rep.value(&format!("{tag}_x_end"), m.x_end);
        rep.absorb(&format!("{tag}_"), m.hypothesis_check());
        match composite_form_gap(m, cfg.zeta_bar) {
            Ok(g) => rep.value(&format!("{tag}_composite_form_gap"), g),
            Err(e) => fail(&mut rep, &format!("{tag}_composite_form"), &e),
        }
        out.write(&format!("pullback_{tag}.tsv"), &table(&["x2", "h"], m.samples.iter().map(|s| s.to_vec())))?;
    }
    let datum = match build_initial_datum(&left, &right, cfg.t_collapse, cfg.zeta1, cfg.zeta2, cfg.datum_points) {
        Ok(d) => d,
        Err(e) => {
            fail(&mut rep, "datum", &e);
            return Ok(rep);
        }
    };
    out.write(
        "datum.tsv",
        &table(
            &["x2", "lambda1", "rho", "m1", "m2"],
            datum.rows.iter().map(|r| vec![r.x2, r.lambda1, r.state.rho, r.state.m1, r.state.m2]),
        ),
    )?;
    match round_trip(&datum, &fan, 1e-4, cfg.delta) {
        Ok(dev) => rep.check("round_trip", dev < 1e-6, dev, "< 1e-6 over [1e-4, delta]"),
        Err(e) => fail(&mut rep, "round_trip", &e),
    }
    Ok(rep)
}

/// λ and the Euler fields on a `(t, x2)` grid with `t < T`.
struct Field {
    ts: Vec<f64>,
    xs: Vec<f64>,
    lambda: Vec<Vec<f64>>,
    rho: Vec<Vec<f64>>,
    m2: Vec<Vec<f64>>,
}

fn sample_field(sol: &CharSolution, cfg: &ScenarioConfig, nt: usize, nx: usize) -> Result<Field> {
    let t_c = cfg.t_collapse;
    let (xa, xb) = (-LAMBDA_MINUS * t_c - cfg.zeta1 - 0.25, -LAMBDA_PLUS * t_c + cfg.zeta1 + 0.25);
    let ts: Vec<f64> = (0..nt).map(|k| t_c * k as f64 / nt as f64).collect();
    let xs: Vec<f64> = (0..nx).map(|j| xa + (xb - xa) * j as f64 / (nx - 1) as f64).collect();
    let mut f = Field { lambda: Vec::new(), rho: Vec::new(), m2: Vec::new(), ts, xs };
    for &t in &f.ts {
        let mut row = (Vec::with_capacity(nx), Vec::with_capacity(nx), Vec::with_capacity(nx));
        for &x in &f.xs {
            let l = sol.eval_solution(t, x)?;
            let s = state_from_wave(l, W1)?;
            row.0.push(l);
            row.1.push(s.rho);
            row.2.push(s.m2);
        }
        f.lambda.push(row.0);
        f.rho.push(row.1);
        f.m2.push(row.2);
    }
    Ok(f)
}

/// Mean of |centred-difference residual| of mass and normal momentum
/// conservation over interior nodes.
fn conservation_residual(f: &Field) -> (f64, f64) {
    let (dt, dx) = (f.ts[1] - f.ts[0], f.xs[1] - f.xs[0]);
    let flux = |k: usize, j: usize| f.m2[k][j] * f.m2[k][j] / f.rho[k][j] + f.rho[k][j] * f.rho[k][j];
    let (mut mass, mut mom, mut count) = (0.0, 0.0, 0usize);
    for k in 1..f.ts.len() - 1 {
        for j in 1..f.xs.len() - 1 {
            mass += ((f.rho[k + 1][j] - f.rho[k - 1][j]) / (2.0 * dt) + (f.m2[k][j + 1] - f.m2[k][j - 1]) / (2.0 * dx))
                .abs();
            mom +=
                ((f.m2[k + 1][j] - f.m2[k - 1][j]) / (2.0 * dt) + (flux(k, j + 1) - flux(k, j - 1)) / (2.0 * dx)).abs();
            count += 1;
        }
    }
    (mass / count as f64, mom / count as f64)
}

fn trace_characteristics(cfg: &ScenarioConfig, opts: &RunOptions, out: &mut Output) -> Result<Report> {
    let mut rep = Report::new("trace-characteristics");
    let datum = cfg.f0_params().and_then(|p| {
        build_compression_datum(
            LAMBDA_MINUS,
            LAMBDA_PLUS,
            cfg.t_collapse,
            cfg.zeta1,
            cfg.zeta2,
            &p,
            &HPair::default(),
            BuildMode::Initial,
        )
    });
    let sol = match datum.and_then(|d| CharSolution::new(d, 1e-12)) {
        Ok(s) => s,
        Err(e) => {
            fail(&mut rep, "datum", &e);
            return Ok(rep);
        }
    };
    let (nt, nx) = (cfg.trace_t_steps, cfg.trace_x_points);
    let field = match sample_field(&sol, cfg, nt, nx) {
        Ok(f) => f,
        Err(e) => {
            fail(&mut rep, "sampling", &e);
            return Ok(rep);
        }
    };
    let mut rows = Vec::with_capacity(nt * nx);
    for (k, &t) in field.ts.iter().enumerate() {
        for (j, &x) in field.xs.iter().enumerate() {
            rows.push(vec![t, x, field.lambda[k][j], field.rho[k][j], 0.0, field.m2[k][j]]);
        }
    }
    out.write("characteristics.tsv", &table(&["t", "x2", "lambda1", "rho", "m1", "m2"], rows))?;

    let row0 = field
        .xs
        .iter()
        .zip(&field.lambda[0])
        .try_fold(0.0f64, |w, (&x, &l)| Ok::<_, Error>(w.max((l - sol.profile.eval(x)?).abs())));
    match row0 {
        Ok(g) => rep.check("t0_row_is_datum", g == 0.0, g, "= 0"),
        Err(e) => fail(&mut rep, "t0_row_is_datum", &e),
    }
    // centre of the linear region, transported to t = T/2
    let t_c = cfg.t_collapse;
    let t = 0.5 * t_c;
    let x0 = 0.5 * ((-LAMBDA_MINUS * t_c + cfg.zeta2) + (-LAMBDA_PLUS * t_c - cfg.zeta2));
    let x = x0 * (1.0 - t / t_c) + 0.01;
    match sol.eval_solution(t, x) {
        Ok(v) => {
            let g = (v + x / (t_c - t)).abs();
            rep.check("linear_region", g < 1e-12, g, "|lambda + x2/(T - t)| < 1e-12");
        }
        Err(e) => fail(&mut rep, "linear_region", &e),
    }
    let (mass, mom) = conservation_residual(&field);
    rep.value("conservation_mass", mass);
    rep.value("conservation_momentum", mom);
    let mut prev = (mass, mom);
    for level in 1..=opts.refine {
        let s = 1usize << level;
        let fine = match sample_field(&sol, cfg, nt * s, nx * s) {
            Ok(f) => f,
            Err(e) => {
                fail(&mut rep, &format!("refine_{level}"), &e);
                break;
            }
        };
        let r = conservation_residual(&fine);
        rep.value(&format!("refine_{level}_conservation_mass"), r.0);
        rep.value(&format!("refine_{level}_conservation_momentum"), r.1);
        let worst = (r.0 / prev.0).max(r.1 / prev.1);
        rep.check(&format!("refine_{level}_residual_decreases"), worst < 1.0, worst, "ratio < 1");
        prev = r;
    }
    Ok(rep)
}
