//! Line-oriented text format for Hasse-Schmidt derivations.
//!
//! ```text
//! prime 2
//! vars x y
//! length 3
//! map x 1 y
//! map x 3 x*y
//! map y 1 1
//! ```
//!
//! The three header lines come first, in that order. Each `map v n poly`
//! line sets the coefficient of `mu^n` in the image of variable `v`;
//! missing entries are zero. [`print_hsd`] emits the canonical form (no
//! zero entries, variables in declaration order, ascending `n`), and
//! parsing it back reproduces the derivation bit for bit.

use std::fmt;

use super::{HsDeriv, TruncSeries};
use crate::poly::Poly;
use crate::zpfield::is_prime;

/// Parse failure with the 1-based line it occurred on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsdParseError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for HsdParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

impl std::error::Error for HsdParseError {}

/// A parsed derivation together with the variable names it was written in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsdDocument {
    names: Vec<String>,
    derivation: HsDeriv,
}

impl HsdDocument {
    pub fn new(names: Vec<String>, derivation: HsDeriv) -> Self {
        assert_eq!(names.len(), derivation.nvars(), "one name per variable");
        HsdDocument { names, derivation }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn derivation(&self) -> &HsDeriv {
        &self.derivation
    }

    pub fn into_derivation(self) -> HsDeriv {
        self.derivation
    }
}

fn err(line: usize, msg: impl Into<String>) -> HsdParseError {
    HsdParseError {
        line,
        msg: msg.into(),
    }
}

fn is_valid_name(s: &str) -> bool {
    let mut chars = s.bytes();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == b'_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == b'_')
}

pub fn parse_hsd(text: &str) -> Result<HsdDocument, HsdParseError> {
    // Non-empty lines paired with their 1-based positions; blank lines are
    // tolerated anywhere.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (ln, line) = lines.next().ok_or_else(|| err(1, "missing `prime` line"))?;
    let p = match line.strip_prefix("prime ") {
        Some(rest) => rest
            .trim()
            .parse::<u64>()
            .map_err(|_| err(ln, "invalid prime value"))?,
        None => return Err(err(ln, "expected `prime <p>`")),
    };
    if !is_prime(p) {
        return Err(err(ln, format!("{p} is not prime")));
    }

    let (ln, line) = lines.next().ok_or_else(|| err(ln, "missing `vars` line"))?;
    let names: Vec<String> = match line.strip_prefix("vars ") {
        Some(rest) => rest.split_whitespace().map(str::to_string).collect(),
        None => return Err(err(ln, "expected `vars <name>...`")),
    };
    if names.is_empty() {
        return Err(err(ln, "at least one variable is required"));
    }
    for name in &names {
        if !is_valid_name(name) {
            return Err(err(ln, format!("invalid variable name {name:?}")));
        }
    }
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(err(ln, format!("duplicate variable name {name:?}")));
        }
    }

    let (ln, line) = lines
        .next()
        .ok_or_else(|| err(ln, "missing `length` line"))?;
    let length = match line.strip_prefix("length ") {
        Some(rest) => rest
            .trim()
            .parse::<usize>()
            .map_err(|_| err(ln, "invalid length value"))?,
        None => return Err(err(ln, "expected `length <m>`")),
    };
    if length == 0 {
        return Err(err(ln, "length must be at least 1"));
    }

    let nvars = names.len();
    let mut images: Vec<TruncSeries> = (0..nvars)
        .map(|i| {
            let mut s = TruncSeries::zero(p, nvars, length);
            s.set_coeff(0, Poly::variable(p, nvars, i));
            s
        })
        .collect();
    let mut seen: Vec<Vec<bool>> = vec![vec![false; length + 1]; nvars];

    for (ln, line) in lines {
        let rest = line
            .strip_prefix("map ")
            .ok_or_else(|| err(ln, "expected `map <var> <n> <poly>`"))?;
        let mut parts = rest.splitn(3, char::is_whitespace);
        let var_name = parts.next().unwrap_or("");
        let var = names
            .iter()
            .position(|n| n == var_name)
            .ok_or_else(|| err(ln, format!("unknown variable {var_name:?}")))?;
        let n: usize = parts
            .next()
            .ok_or_else(|| err(ln, "missing coefficient index"))?
            .parse()
            .map_err(|_| err(ln, "invalid coefficient index"))?;
        if n < 1 || n > length {
            return Err(err(
                ln,
                format!("coefficient index {n} outside 1..={length}"),
            ));
        }
        if seen[var][n] {
            return Err(err(
                ln,
                format!("duplicate entry for variable {var_name:?} index {n}"),
            ));
        }
        seen[var][n] = true;
        let poly_text = parts
            .next()
            .ok_or_else(|| err(ln, "missing polynomial"))?
            .trim();
        let poly = Poly::parse(poly_text, p, &names)
            .map_err(|e| err(ln, format!("polynomial column {}: {}", e.col, e.msg)))?;
        images[var].set_coeff(n, poly);
    }

    let derivation = HsDeriv::from_images(images).expect("construction fixes the shape");
    Ok(HsdDocument { names, derivation })
}

/// Canonical text emission; see the module docs for the format.
pub fn print_hsd(d: &HsDeriv, names: &[String]) -> String {
    assert_eq!(names.len(), d.nvars(), "one name per variable");
    let mut out = String::new();
    out.push_str(&format!("prime {}\n", d.modulus()));
    out.push_str(&format!("vars {}\n", names.join(" ")));
    out.push_str(&format!("length {}\n", d.length()));
    for (i, name) in names.iter().enumerate() {
        for n in 1..=d.length() {
            let coeff = d.component_image(n, i);
            if !coeff.is_zero() {
                out.push_str(&format!("map {} {} {}\n", name, n, coeff.to_text(names)));
            }
        }
    }
    out
}
