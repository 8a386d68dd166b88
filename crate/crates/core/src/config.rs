//! Plain-text model configuration.
//!
//! ```text
//! # comment
//! n = 8
//!
//! [dispersion]        # applies to all three particles
//!  0  0  0   3.0      # rows: s1 s2 s3 coefficient
//!  1  0  0  -0.5
//! ...
//!
//! [dispersion 2]      # or per particle, 1-based
//! ...
//!
//! [potential]         # applies to all three pair channels
//! 0 0 0  8.0
//!
//! [potential 3]       # or per channel, 1-based (channel = spectator index)
//! ...
//! ```
//!
//! Whole-line and trailing `#` comments are allowed.  For each family,
//! either one indexless section (shared by all three slots) or explicitly
//! indexed sections may be used, not both.  Dispersions are mandatory for
//! every particle; a missing potential channel is the zero potential.

use crate::error::{Result, SpectralError};
use crate::model::{LatticeCoefficients, Model};

/// Raw parsed configuration: coefficient tables plus file-level defaults.
/// Kept separate from [`Model`] so validation reports can be produced even
/// for data that fails model validation.
#[derive(Clone, Debug)]
pub struct ParsedConfig {
    pub dispersions: [LatticeCoefficients; 3],
    pub potentials: [LatticeCoefficients; 3],
    /// Grid resolution given in the file, if any.
    pub n: Option<usize>,
}

impl ParsedConfig {
    /// Validates the parsed data and builds the model.
    pub fn build_model(&self) -> Result<Model> {
        Model::new(self.dispersions.clone(), self.potentials.clone())
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Family {
    Dispersion,
    Potential,
}

#[derive(Clone, Copy, PartialEq)]
enum Target {
    All,
    One(usize),
}

fn err(line: usize, msg: impl std::fmt::Display) -> SpectralError {
    SpectralError::InvalidModel(format!("line {line}: {msg}"))
}

/// Parses a section header like `[dispersion]`, `[potential 2]`.
fn parse_header(body: &str, line: usize) -> Result<(Family, Target)> {
    let mut words = body.split_whitespace();
    let family = match words.next() {
        Some("dispersion") => Family::Dispersion,
        Some("potential") => Family::Potential,
        Some(other) => return Err(err(line, format!("unknown section `{other}`"))),
        None => return Err(err(line, "empty section header")),
    };
    let target = match words.next() {
        None => Target::All,
        Some(tok) => {
            let idx: usize = tok
                .parse()
                .map_err(|_| err(line, format!("bad section index `{tok}`")))?;
            if !(1..=3).contains(&idx) {
                return Err(err(line, format!("section index {idx} out of range 1..=3")));
            }
            Target::One(idx - 1)
        }
    };
    if words.next().is_some() {
        return Err(err(line, "trailing tokens in section header"));
    }
    Ok((family, target))
}

/// Parses a coefficient row `s1 s2 s3 value`.
fn parse_row(text: &str, line: usize) -> Result<([i32; 3], f64)> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    if toks.len() != 4 {
        return Err(err(
            line,
            format!("expected `s1 s2 s3 value`, got {} tokens", toks.len()),
        ));
    }
    let mut s = [0i32; 3];
    for (a, tok) in s.iter_mut().zip(&toks[..3]) {
        *a = tok
            .parse()
            .map_err(|_| err(line, format!("bad integer offset `{tok}`")))?;
    }
    let v: f64 = toks[3]
        .parse()
        .map_err(|_| err(line, format!("bad coefficient `{}`", toks[3])))?;
    if !v.is_finite() {
        return Err(err(line, format!("non-finite coefficient `{}`", toks[3])));
    }
    Ok((s, v))
}

/// Parses configuration text into coefficient tables and defaults.
pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    let mut n: Option<usize> = None;
    let mut section: Option<(Family, Target)> = None;
    // (indexless seen, indexed seen, slots)
    let mut disp: (bool, [bool; 3], [LatticeCoefficients; 3]) = Default::default();
    let mut pot: (bool, [bool; 3], [LatticeCoefficients; 3]) = Default::default();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let no_comment = raw.split('#').next().unwrap_or("");
        let body = no_comment.trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let inner = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line, "unterminated section header"))?;
            let (family, target) = parse_header(inner, line)?;
            let fam_state = match family {
                Family::Dispersion => &mut disp,
                Family::Potential => &mut pot,
            };
            match target {
                Target::All => {
                    if fam_state.0 || fam_state.1.iter().any(|&b| b) {
                        return Err(err(
                            line,
                            "indexless section conflicts with an earlier section of the same family",
                        ));
                    }
                    fam_state.0 = true;
                }
                Target::One(i) => {
                    if fam_state.0 {
                        return Err(err(
                            line,
                            "indexed section conflicts with an earlier indexless section",
                        ));
                    }
                    if fam_state.1[i] {
                        return Err(err(line, format!("duplicate section index {}", i + 1)));
                    }
                    fam_state.1[i] = true;
                }
            }
            section = Some((family, target));
            continue;
        }
        if let Some(eq) = body.find('=') {
            if section.is_none() {
                let key = body[..eq].trim();
                let val = body[eq + 1..].trim();
                match key {
                    "n" => {
                        let parsed: usize = val
                            .parse()
                            .map_err(|_| err(line, format!("bad resolution `{val}`")))?;
                        if n.replace(parsed).is_some() {
                            return Err(err(line, "duplicate key `n`"));
                        }
                    }
                    other => return Err(err(line, format!("unknown key `{other}`"))),
                }
                continue;
            }
            return Err(err(line, "key assignments must precede the first section"));
        }
        let (family, target) = match section {
            Some(s) => s,
            None => return Err(err(line, "coefficient row outside any section")),
        };
        let (s, v) = parse_row(body, line)?;
        let fam_state = match family {
            Family::Dispersion => &mut disp,
            Family::Potential => &mut pot,
        };
        match target {
            Target::All => {
                for c in fam_state.2.iter_mut() {
                    c.add(s, v);
                }
            }
            Target::One(i) => fam_state.2[i].add(s, v),
        }
    }

    // every particle needs dispersion data
    let disp_present: Vec<usize> = (0..3)
        .filter(|&i| disp.2[i].is_empty())
        .map(|i| i + 1)
        .collect();
    if !disp_present.is_empty() {
        return Err(SpectralError::InvalidModel(format!(
            "missing dispersion data for particle(s) {:?}",
            disp_present
        )));
    }

    Ok(ParsedConfig {
        dispersions: disp.2,
        potentials: pot.2,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "\
# three identical particles
n = 8

[dispersion]
 0  0  0   3.0
 1  0  0  -0.5   # +x hop
-1  0  0  -0.5
 0  1  0  -0.5
 0 -1  0  -0.5
 0  0  1  -0.5
 0  0 -1  -0.5

[potential]
0 0 0  8.0
";

    #[test]
    fn parses_a_complete_identical_model() {
        let cfg = parse_config(GOOD).unwrap();
        assert_eq!(cfg.n, Some(8));
        let model = cfg.build_model().unwrap();
        assert!((model.masses()[0] - 1.0).abs() < 1e-12);
        assert!((model.potential(1).l1_norm() - 8.0).abs() < 1e-12);
        for i in 0..3 {
            assert_eq!(model.dispersion(i).len(), 7);
        }
    }

    #[test]
    fn per_slot_sections_fill_only_their_slot() {
        let text = "\
[dispersion 1]
0 0 0 3.0
1 0 0 -0.5
-1 0 0 -0.5
0 1 0 -0.5
0 -1 0 -0.5
0 0 1 -0.5
0 0 -1 -0.5

[dispersion 2]
0 0 0 3.0
1 0 0 -0.5
-1 0 0 -0.5
0 1 0 -0.5
0 -1 0 -0.5
0 0 1 -0.5
0 0 -1 -0.5

[dispersion 3]
0 0 0 3.0
1 0 0 -0.5
-1 0 0 -0.5
0 1 0 -0.5
0 -1 0 -0.5
0 0 1 -0.5
0 0 -1 -0.5

[potential 2]
0 0 0 4.0
";
        let cfg = parse_config(text).unwrap();
        assert!(cfg.n.is_none());
        assert!(cfg.potentials[0].is_empty());
        assert!(!cfg.potentials[1].is_empty());
        assert!(cfg.potentials[2].is_empty());
        cfg.build_model().unwrap();
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases: [(&str, &str); 6] = [
            ("[dispersion\n", "line 1"),
            ("[hopping]\n", "line 1"),
            ("[dispersion 4]\n", "line 1"),
            ("n = 8\nx 0 0 1.0\n", "line 2"),
            ("[dispersion]\n0 0 3.0\n", "line 2"),
            ("n = 8\nn = 9\n", "line 2"),
        ];
        for (text, expect) in cases {
            match parse_config(text) {
                Err(SpectralError::InvalidModel(msg)) => {
                    assert!(msg.contains(expect), "`{msg}` missing `{expect}`")
                }
                other => panic!("expected parse failure for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn mixing_indexless_and_indexed_sections_is_rejected() {
        let text = "[dispersion]\n0 0 0 3.0\n[dispersion 1]\n0 0 0 3.0\n";
        assert!(parse_config(text).is_err());
        let text2 = "[potential 1]\n0 0 0 1.0\n[potential]\n0 0 0 1.0\n";
        assert!(parse_config(text2).is_err());
    }

    #[test]
    fn missing_dispersions_are_reported() {
        match parse_config("n = 4\n") {
            Err(SpectralError::InvalidModel(msg)) => {
                assert!(msg.contains("particle(s) [1, 2, 3]"), "{msg}")
            }
            other => panic!("expected missing-dispersion error, got {other:?}"),
        }
    }
}
