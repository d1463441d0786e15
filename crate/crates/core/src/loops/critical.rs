//! Critical points of the loop length from the sampled derivative.

use super::{loop_point, LoopProfile};
use crate::error::{invalid, Result};
use crate::geometry::BoundaryCurve;
use crate::roots::brent;
use crate::settings::Settings;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Minimum,
    Maximum,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    /// Footpoint in [0, ℓ).
    pub s: f64,
    /// Loop length at s.
    pub value: f64,
    pub kind: CriticalKind,
    /// L_q′(s) at the returned point.
    pub derivative: f64,
    /// For flat runs: the smallest and largest length seen along the run.
    pub value_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy)]
enum Candidate {
    /// Strict sign change of D between nodes i and i + 1.
    Bracket { i: usize },
    /// A short run of near-zero nodes; `best` is the node with the smallest |D|.
    Touch { best: usize, before: f64, after: f64 },
    /// A long run of near-zero nodes from `start` of `len` nodes.
    Flat { start: usize, len: usize },
}

/// Locates the zeros of L_q′ from a sampled profile, refining sign changes with Brent's method.
///
/// Returned points are sorted by footpoint; points closer than 1e-9·ℓ are merged.
pub fn critical_points(curve: &BoundaryCurve, profile: &LoopProfile, settings: &Settings) -> Result<Vec<CriticalPoint>> {
    let n = profile.len();
    if n < 3 {
        return Err(invalid("loop profile too short"));
    }
    if (profile.perimeter - curve.perimeter()).abs() > 1e-12 * curve.perimeter() {
        return Err(invalid("loop profile was sampled on a different curve"));
    }
    let l = profile.perimeter;
    let h = l / n as f64;
    let d = &profile.derivative;
    let tol = settings.critical_tol;
    let small: Vec<bool> = d.iter().map(|x| x.abs() < tol).collect();

    let mut cands = Vec::new();
    match small.iter().position(|&z| !z) {
        None => cands.push(Candidate::Flat { start: 0, len: n }),
        Some(first) => {
            // walk the circle once starting from a node with a definite sign
            let mut k = 0;
            while k < n {
                let i = (first + k) % n;
                let j = (i + 1) % n;
                if !small[j] {
                    if d[i].signum() != d[j].signum() {
                        cands.push(Candidate::Bracket { i });
                    }
                    k += 1;
                    continue;
                }
                let mut len = 0;
                while small[(j + len) % n] {
                    len += 1;
                }
                let after = d[(j + len) % n];
                if len > settings.degenerate_run_cells + 1 {
                    cands.push(Candidate::Flat { start: j, len });
                } else {
                    let best = (0..len)
                        .map(|m| (j + m) % n)
                        .min_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs()))
                        .expect("non-empty run");
                    cands.push(Candidate::Touch { best, before: d[i], after });
                }
                k += len + 1;
            }
        }
    }

    let kind_of = |before: f64, after: f64| {
        if before < 0.0 && after > 0.0 {
            CriticalKind::Minimum
        } else if before > 0.0 && after < 0.0 {
            CriticalKind::Maximum
        } else {
            CriticalKind::Degenerate
        }
    };

    let mut points: Vec<CriticalPoint> = cands
        .par_iter()
        .map(|c| -> Result<CriticalPoint> {
            match *c {
                Candidate::Bracket { i } => {
                    let a = profile.s[i];
                    let b = a + h;
                    let eval = |s: f64| loop_point(curve, profile.q, s, Some(profile.phi_near(s)), settings);
                    let dj = d[(i + 1) % n];
                    let root = brent(
                        |s| eval(s).map(|p| p.derivative).unwrap_or(f64::NAN),
                        a,
                        b,
                        d[i],
                        dj,
                        1e-15 * l,
                        0.1 * tol,
                        200,
                    );
                    let s = root.map(|r| r.x).unwrap_or_else(|| if d[i].abs() < dj.abs() { a } else { b });
                    let p = eval(s)?;
                    Ok(CriticalPoint {
                        s: s.rem_euclid(l),
                        value: p.length,
                        kind: kind_of(d[i], dj),
                        derivative: p.derivative,
                        value_range: None,
                    })
                }
                Candidate::Touch { best, before, after } => Ok(CriticalPoint {
                    s: profile.s[best],
                    value: profile.length[best],
                    kind: kind_of(before, after),
                    derivative: d[best],
                    value_range: None,
                }),
                Candidate::Flat { start, len } => {
                    let idx: Vec<usize> = (0..len).map(|m| (start + m) % n).collect();
                    let lo = idx.iter().map(|&m| profile.length[m]).fold(f64::INFINITY, f64::min);
                    let hi = idx.iter().map(|&m| profile.length[m]).fold(f64::NEG_INFINITY, f64::max);
                    let mid = idx[len / 2];
                    Ok(CriticalPoint {
                        s: profile.s[mid],
                        value: profile.length[mid],
                        kind: CriticalKind::Degenerate,
                        derivative: d[mid],
                        value_range: Some((lo, hi)),
                    })
                }
            }
        })
        .collect::<Result<_>>()?;

    points.sort_by(|a, b| a.s.total_cmp(&b.s));
    let merge = settings.dedup_value * l;
    let mut out: Vec<CriticalPoint> = Vec::with_capacity(points.len());
    for p in points {
        if out.last().is_some_and(|last| p.s - last.s < merge) {
            continue;
        }
        out.push(p);
    }
    if out.len() > 1 && out[0].s + l - out[out.len() - 1].s < merge {
        out.pop();
    }
    if out.is_empty() {
        log::warn!("no critical point of L_{} found on {} nodes; the profile may be under-resolved", profile.q, n);
    }
    Ok(out)
}
