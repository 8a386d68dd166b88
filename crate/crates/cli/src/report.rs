//! Deterministic plain-text reports.
//!
//! A report is a sequence of named sections of `key = value` lines.  All
//! numeric output is formatted with a fixed precision so repeated runs of
//! the same command produce byte-identical output; nothing time- or
//! environment-dependent is ever written here.

use std::fmt::Write as _;

pub struct Report {
    text: String,
}

impl Report {
    pub fn new() -> Self {
        Report {
            text: String::from("# trispec report\n"),
        }
    }

    pub fn section(&mut self, name: &str) -> &mut Self {
        let _ = writeln!(self.text, "[{name}]");
        self
    }

    pub fn kv(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.text, "{key} = {value}");
        self
    }

    pub fn kv_f(&mut self, key: &str, value: f64) -> &mut Self {
        let _ = writeln!(self.text, "{key} = {}", fmt_f(value));
        self
    }

    pub fn kv_floats(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let joined: Vec<String> = values.iter().map(|&v| fmt_f(v)).collect();
        let _ = writeln!(self.text, "{key} = {}", joined.join(" "));
        self
    }

    pub fn kv_interval(&mut self, key: &str, iv: (f64, f64)) -> &mut Self {
        let _ = writeln!(self.text, "{key} = {} {}", fmt_f(iv.0), fmt_f(iv.1));
        self
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// Fixed-precision float formatting used throughout reports.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.12e}")
}
