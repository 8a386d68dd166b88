//! Parsing of momentum components written as fractions of π, e.g. `pi/2`,
//! `-3pi/4`, `0.5pi`, `2pi/3`, or plain decimals like `1.25` and `-7/8`.

use std::f64::consts::PI;
use trispec_core::Vec3;

/// Parses a single component.
pub fn parse_component(token: &str) -> Result<f64, String> {
    let t = token.trim();
    if t.is_empty() {
        return Err("empty momentum component".into());
    }
    let (sign, rest) = match t.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    let (head, denom) = match rest.split_once('/') {
        Some((a, b)) => {
            let d: f64 = b
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in `{token}`"))?;
            if d == 0.0 {
                return Err(format!("zero denominator in `{token}`"));
            }
            (a.trim(), d)
        }
        None => (rest, 1.0),
    };
    let (coef_str, pi_factor) = match head.strip_suffix("pi") {
        Some(c) => (c.trim(), PI),
        None => (head, 1.0),
    };
    let coef: f64 = if coef_str.is_empty() {
        if pi_factor == 1.0 {
            return Err(format!("bad momentum component `{token}`"));
        }
        1.0
    } else {
        coef_str
            .parse()
            .map_err(|_| format!("bad momentum component `{token}`"))?
    };
    let v = sign * coef * pi_factor / denom;
    if !v.is_finite() {
        return Err(format!("non-finite momentum component `{token}`"));
    }
    Ok(v)
}

/// Parses a comma-separated 3-vector of components.
pub fn parse_vec3(text: &str) -> Result<Vec3, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(format!(
            "expected three comma-separated components, got {} in `{text}`",
            parts.len()
        ));
    }
    Ok([
        parse_component(parts[0])?,
        parse_component(parts[1])?,
        parse_component(parts[2])?,
    ])
}

/// Parses a sweep window `LO:HI:STEPS`.
pub fn parse_sweep(text: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected LO:HI:STEPS, got `{text}`"));
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| format!("bad sweep bound `{}`", parts[0]))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| format!("bad sweep bound `{}`", parts[1]))?;
    let steps: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("bad sweep step count `{}`", parts[2]))?;
    Ok((lo, hi, steps))
}
