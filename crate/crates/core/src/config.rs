//! Scenario configuration: flat `key = value` text where values may be
//! symbolic (`sqrt2`, `2sqrt2`, `(58+2sqrt13)/9`).

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::ode_epsilon::{PicardOptions, TraceSpec, LAMBDA_MINUS, LAMBDA_PLUS};
use crate::profiles::F0Params;
use crate::subsolution::{default_k, FanConstants, MomentumFormula, VerifyOptions};

fn config_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Config { field: field.into(), msg: msg.into() }
}

/// Evaluates `+ - * /`, parentheses, decimals, `sqrtN`, `sqrt(...)` and
/// juxtaposition such as `2sqrt2` or `3(1+sqrt5)`.
pub fn eval_expr(src: &str) -> std::result::Result<f64, String> {
    let mut p = Parser { s: src.as_bytes(), i: 0 };
    let v = p.expr()?;
    p.skip_ws();
    if p.i != p.s.len() {
        return Err(format!("unexpected '{}' at column {}", src[p.i..].chars().next().unwrap_or(' '), p.i + 1));
    }
    Ok(v)
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.i).copied()
    }

    fn expr(&mut self) -> std::result::Result<f64, String> {
        let mut v = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.i += 1;
            let r = self.term()?;
            v = if c == b'+' { v + r } else { v - r };
        }
        Ok(v)
    }

    fn term(&mut self) -> std::result::Result<f64, String> {
        let mut v = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.i += 1;
            let r = self.unary()?;
            v = if c == b'*' { v * r } else { v / r };
        }
        Ok(v)
    }

    fn unary(&mut self) -> std::result::Result<f64, String> {
        match self.peek() {
            Some(b'-') => {
                self.i += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.i += 1;
                self.unary()
            }
            _ => {
                let mut v = self.primary()?;
                // implicit product: 2sqrt2, 3(1+x)
                while matches!(self.peek(), Some(b's' | b'(')) {
                    v *= self.primary()?;
                }
                Ok(v)
            }
        }
    }

    fn primary(&mut self) -> std::result::Result<f64, String> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err("missing ')'".into());
                }
                self.i += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(b's') => {
                if !self.s[self.i..].starts_with(b"sqrt") {
                    return Err(format!("unknown symbol at column {}", self.i + 1));
                }
                self.i += 4;
                match self.s.get(self.i) {
                    Some(c) if c.is_ascii_digit() || *c == b'.' => Ok(self.number()?.sqrt()),
                    Some(b'(') => Ok(self.primary()?.sqrt()),
                    _ => Err("sqrt needs a number or '('".into()),
                }
            }
            Some(c) => Err(format!("unexpected '{}'", c as char)),
            None => Err("unexpected end of expression".into()),
        }
    }

    fn number(&mut self) -> std::result::Result<f64, String> {
        let start = self.i;
        let s = self.s;
        while self.i < s.len() && (s[self.i].is_ascii_digit() || s[self.i] == b'.' || s[self.i] == b'_') {
            self.i += 1;
        }
        if self.i < s.len() && (s[self.i] == b'e' || s[self.i] == b'E') {
            let mut j = self.i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                self.i = j;
            }
        }
        let text: String = std::str::from_utf8(&s[start..self.i]).unwrap_or("").chars().filter(|&c| c != '_').collect();
        text.parse::<f64>().map_err(|_| format!("bad number '{text}'"))
    }
}

/// All tunables of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub t_collapse: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    pub zeta_bar: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    pub t_end: f64,
    pub t_min: f64,
    pub grid_size: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub eps_bar: f64,
    pub delta_hat: f64,
    pub rho1: f64,
    pub k: f64,
    pub momentum: MomentumFormula,
    pub sweep_points: usize,
    pub datum_points: usize,
    pub trace_t_steps: usize,
    pub trace_x_points: usize,
    pub output_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let zeta1 = 0.3;
        ScenarioConfig {
            t_collapse: 2.0,
            zeta1,
            zeta2: 0.1,
            zeta_bar: zeta1 / 4.0,
            delta: 0.03,
            delta_prime: 0.06,
            a_plus: 0.05,
            a_minus: 0.05,
            t_end: 0.06,
            t_min: 1e-8,
            grid_size: 2048,
            tol: 1e-10,
            max_iter: 50,
            eps_bar: 0.1,
            delta_hat: 0.05,
            rho1: 2.0,
            k: default_k(),
            momentum: MomentumFormula::Corrected,
            sweep_points: 5,
            datum_points: 601,
            trace_t_steps: 40,
            trace_x_points: 200,
            output_dir: PathBuf::from("out"),
        }
    }
}

pub const KEYS: [&str; 23] = [
    "T",
    "zeta1",
    "zeta2",
    "zeta_bar",
    "delta",
    "delta_prime",
    "a_plus",
    "a_minus",
    "T_end",
    "t_min",
    "grid_size",
    "tol",
    "max_iter",
    "eps_bar",
    "delta_hat",
    "rho1",
    "K",
    "momentum",
    "sweep_points",
    "datum_points",
    "trace_t_steps",
    "trace_x_points",
    "output_dir",
];

impl ScenarioConfig {
    /// Parses and validates. `zeta_bar` defaults to `zeta1/4` when absent.
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw: BTreeMap<String, String> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(config_err(&format!("line {}", n + 1), "expected key = value"));
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(config_err(k, "unknown key"));
            }
            if raw.insert(k.to_string(), v.to_string()).is_some() {
                return Err(config_err(k, "given twice"));
            }
        }
        let mut c = ScenarioConfig::default();
        let real = |k: &str| -> Result<Option<f64>> {
            raw.get(k).map(|v| eval_expr(v).map_err(|e| config_err(k, e))).transpose()
        };
        let count = |k: &str| -> Result<Option<usize>> {
            raw.get(k)
                .map(|v| v.parse::<usize>().map_err(|_| config_err(k, format!("expected a count, got '{v}'"))))
                .transpose()
        };
        macro_rules! set {
            ($field:ident, $key:expr, real) => {
                if let Some(v) = real($key)? {
                    c.$field = v;
                }
            };
            ($field:ident, $key:expr, count) => {
                if let Some(v) = count($key)? {
                    c.$field = v;
                }
            };
        }
        set!(t_collapse, "T", real);
        set!(zeta1, "zeta1", real);
        set!(zeta2, "zeta2", real);
        c.zeta_bar = c.zeta1 / 4.0;
        set!(zeta_bar, "zeta_bar", real);
        set!(delta, "delta", real);
        set!(delta_prime, "delta_prime", real);
        set!(a_plus, "a_plus", real);
        set!(a_minus, "a_minus", real);
        set!(t_end, "T_end", real);
        set!(t_min, "t_min", real);
        set!(grid_size, "grid_size", count);
        set!(tol, "tol", real);
        set!(max_iter, "max_iter", count);
        set!(eps_bar, "eps_bar", real);
        set!(delta_hat, "delta_hat", real);
        set!(rho1, "rho1", real);
        set!(k, "K", real);
        set!(sweep_points, "sweep_points", count);
        set!(datum_points, "datum_points", count);
        set!(trace_t_steps, "trace_t_steps", count);
        set!(trace_x_points, "trace_x_points", count);
        if let Some(v) = raw.get("momentum") {
            c.momentum = match v.as_str() {
                "corrected" => MomentumFormula::Corrected,
                "as_printed" => MomentumFormula::AsPrinted,
                _ => return Err(config_err("momentum", format!("expected corrected or as_printed, got '{v}'"))),
            };
        }
        if let Some(v) = raw.get("output_dir") {
            c.output_dir = PathBuf::from(v);
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err("--config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("T", self.t_collapse),
            ("zeta2", self.zeta2),
            ("zeta_bar", self.zeta_bar),
            ("delta", self.delta),
            ("t_min", self.t_min),
            ("tol", self.tol),
            ("eps_bar", self.eps_bar),
            ("delta_hat", self.delta_hat),
            ("rho1", self.rho1),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(name, format!("must be positive, got {v}")));
            }
        }
        for (name, v) in [("a_plus", self.a_plus), ("a_minus", self.a_minus), ("K", self.k)] {
            if !v.is_finite() || (name != "K" && v < 0.0) {
                return Err(config_err(name, format!("invalid value {v}")));
            }
        }
        if !(self.zeta2 < self.zeta1 && self.zeta1 < 1.0) {
            return Err(config_err("zeta1", format!("need zeta2 < zeta1 < 1, got zeta1 = {}", self.zeta1)));
        }
        if !(self.zeta_bar < self.zeta1 / 2.0) {
            return Err(config_err("zeta_bar", "must be below zeta1/2"));
        }
        if !(self.delta < self.delta_prime) {
            return Err(config_err("delta_prime", "must exceed delta"));
        }
        if !(self.t_min < self.t_end) {
            return Err(config_err("t_min", "must be below T_end"));
        }
        if !(self.t_end <= self.delta_prime.min(0.5)) {
            return Err(config_err("T_end", format!("must not exceed min(delta_prime, 1/2), got {}", self.t_end)));
        }
        if 2.0 * self.zeta2 >= (LAMBDA_MINUS - LAMBDA_PLUS) * self.t_collapse {
            return Err(config_err("zeta2", "too wide for the collapse time T"));
        }
        for (name, v, min) in [
            ("grid_size", self.grid_size, 8),
            ("max_iter", self.max_iter, 1),
            ("sweep_points", self.sweep_points, 2),
            ("datum_points", self.datum_points, 2),
            ("trace_t_steps", self.trace_t_steps, 2),
            ("trace_x_points", self.trace_x_points, 4),
        ] {
            if v < min {
                return Err(config_err(name, format!("must be at least {min}")));
            }
        }
        TraceSpec::new(self.zeta2 / self.t_collapse, self.delta, self.delta_prime, self.a_minus, self.a_plus)
            .map_err(|e| config_err("a_minus/a_plus", e.to_string()))?;
        Ok(())
    }

    pub fn trace_spec(&self) -> Result<TraceSpec> {
        TraceSpec::new(self.zeta2 / self.t_collapse, self.delta, self.delta_prime, self.a_minus, self.a_plus)
    }

    pub fn fan_constants(&self) -> FanConstants {
        FanConstants { rho1: self.rho1, k: self.k, ..FanConstants::default() }
    }

    pub fn picard_options(&self) -> PicardOptions {
        PicardOptions {
            t_end: self.t_end,
            t_min: self.t_min,
            grid_size: self.grid_size,
            tol: self.tol,
            max_iter: self.max_iter,
            ..PicardOptions::default()
        }
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            consts: self.fan_constants(),
            momentum: self.momentum,
            rays: (LAMBDA_MINUS, LAMBDA_PLUS, self.zeta2, self.t_collapse),
        }
    }

    pub fn f0_params(&self) -> Result<F0Params> {
        F0Params::new(LAMBDA_MINUS, LAMBDA_PLUS, self.zeta2, self.t_collapse, self.a_minus, self.a_plus, self.zeta_bar)
    }

    /// Every setting in key order, 17 significant digits for reals.
    pub fn to_text(&self) -> String {
        use crate::report::num;
        let momentum = match self.momentum {
            MomentumFormula::Corrected => "corrected",
            MomentumFormula::AsPrinted => "as_printed",
        };
        let lines = [
            ("T", num(self.t_collapse)),
            ("zeta1", num(self.zeta1)),
            ("zeta2", num(self.zeta2)),
            ("zeta_bar", num(self.zeta_bar)),
            ("delta", num(self.delta)),
            ("delta_prime", num(self.delta_prime)),
            ("a_plus", num(self.a_plus)),
            ("a_minus", num(self.a_minus)),
            ("T_end", num(self.t_end)),
            ("t_min", num(self.t_min)),
            ("grid_size", self.grid_size.to_string()),
            ("tol", num(self.tol)),
            ("max_iter", self.max_iter.to_string()),
            ("eps_bar", num(self.eps_bar)),
            ("delta_hat", num(self.delta_hat)),
            ("rho1", num(self.rho1)),
            ("K", num(self.k)),
            ("momentum", momentum.to_string()),
            ("sweep_points", self.sweep_points.to_string()),
            ("datum_points", self.datum_points.to_string()),
            ("trace_t_steps", self.trace_t_steps.to_string()),
            ("trace_x_points", self.trace_x_points.to_string()),
            ("output_dir", self.output_dir.display().to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
