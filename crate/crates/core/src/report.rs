//! Named values and pass/fail checks, written as plain `key = value` text
//! with 17 significant digits.

use std::fmt::Write;

/// 17 significant digits, so every double reads back to the same bits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub bound: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub values: Vec<(String, f64)>,
    pub notes: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(title: &str) -> Self {
        Report { title: title.into(), ..Default::default() }
    }

    pub fn value(&mut self, name: &str, v: f64) {
        self.values.push((name.into(), v));
    }

    pub fn note(&mut self, name: &str, text: impl Into<String>) {
        self.notes.push((name.into(), text.into()));
    }

    pub fn check(&mut self, name: &str, pass: bool, value: f64, bound: impl Into<String>) {
        self.checks.push(Check { name: name.into(), pass, value, bound: bound.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn get_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Appends all values and checks of `other`, prefixing names.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for (n, v) in other.values {
            self.values.push((format!("{prefix}{n}"), v));
        }
        for (n, t) in other.notes {
            self.notes.push((format!("{prefix}{n}"), t));
        }
        for mut c in other.checks {
            c.name = format!("{prefix}{}", c.name);
            self.checks.push(c);
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {}", self.title);
        for (n, t) in &self.notes {
            let _ = writeln!(s, "{n} = {t}");
        }
        for (n, v) in &self.values {
            let _ = writeln!(s, "{n} = {}", num(*v));
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "check {} = {} ; value = {} ; require {}",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                num(c.value),
                c.bound
            );
        }
        let _ = writeln!(s, "status = {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [std::f64::consts::PI, 1e-300, -2.0f64.sqrt(), 0.1] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn failing_lists_names() {
        let mut r = Report::new("t");
        r.check("a", true, 0.0, "");
        r.check("b", false, 1.0, "");
        assert!(!r.passed());
        assert_eq!(r.failing(), vec!["b"]);
        assert!(r.to_text().contains("check b = FAIL"));
    }
}
