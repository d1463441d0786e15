//! Plain-text domain files.
//!
//! ```text
//! # r(θ) = 1 + τ f(θ)
//! tau = 1
//! grid = 1024
//! cos[3] = 0.02
//! sin[2] = -0.01
//! ```
//!
//! or a single `ellipse_eccentricity = <e>` line. Blank lines and `#` comments are ignored.

use crate::error::{Error, Result};
use crate::geometry::{BoundaryCurve, FourierProfile, Profile};
use std::collections::HashSet;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig {
    pub profile: Profile,
    pub tau: f64,
    pub grid: Option<usize>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

fn parse_real(line: usize, key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| err(line, format!("`{key}` expects a real number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(err(line, format!("`{key}` must be finite")));
    }
    Ok(x)
}

/// Splits `cos[3]` into ("cos", 3).
fn indexed(key: &str) -> Option<(&str, &str)> {
    let open = key.find('[')?;
    let inner = key[open + 1..].strip_suffix(']')?;
    Some((&key[..open], inner))
}

impl DomainConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut tau = None;
        let mut grid = None;
        let mut ecc = None;
        let mut cos: Vec<f64> = Vec::new();
        let mut sin: Vec<f64> = Vec::new();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) =
                body.split_once('=').ok_or_else(|| err(line, format!("expected `key = value`, got `{body}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.replace(' ', "")) {
                return Err(err(line, format!("duplicate key `{key}`")));
            }
            match key {
                "tau" => tau = Some(parse_real(line, key, value)?),
                "grid" => {
                    grid = Some(value.parse::<usize>().map_err(|_| err(line, format!("`grid` expects an integer, got `{value}`")))?)
                }
                "ellipse_eccentricity" => ecc = Some(parse_real(line, key, value)?),
                _ => {
                    let (name, idx) = indexed(key).ok_or_else(|| err(line, format!("unknown key `{key}`")))?;
                    let k: usize =
                        idx.trim().parse().map_err(|_| err(line, format!("bad harmonic index in `{key}`")))?;
                    if k > 4096 {
                        return Err(err(line, format!("harmonic index {k} is too large")));
                    }
                    let target = match name.trim() {
                        "cos" => &mut cos,
                        "sin" => &mut sin,
                        other => return Err(err(line, format!("unknown key `{other}[…]`"))),
                    };
                    if target.len() <= k {
                        target.resize(k + 1, 0.0);
                    }
                    target[k] = parse_real(line, key, value)?;
                }
            }
        }
        let profile = match ecc {
            Some(e) => {
                if !cos.is_empty() || !sin.is_empty() {
                    return Err(err(0, "an ellipse domain cannot also carry Fourier coefficients"));
                }
                Profile::ellipse(e).map_err(|e| err(0, e.to_string()))?
            }
            None => Profile::Fourier(FourierProfile::new(cos, sin).map_err(|e| err(0, e.to_string()))?),
        };
        Ok(DomainConfig { profile, tau: tau.unwrap_or(1.0), grid })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Builds the curve; an explicit grid overrides the file's.
    pub fn build(&self, grid: Option<usize>, default_grid: usize) -> Result<BoundaryCurve> {
        let n = grid.or(self.grid).unwrap_or(default_grid);
        BoundaryCurve::new(self.profile.clone(), self.tau, n)
    }
}
