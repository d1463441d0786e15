//! q-loops: monotone shooting, loop profiles, critical points and Birkhoff orbits.
//!
//! A q-loop at s is the trajectory that starts at s with the loop angle φ_q(s) and returns to
//! s after q bounces and one turn. Its length L_q(s) satisfies L_q′(s) = cos θ̃_q(s) − cos φ_q(s),
//! where θ̃_q is the angle of the last bounce, so critical points of L_q are (1, q) periodic orbits.

mod birkhoff;
mod critical;

pub use birkhoff::{birkhoff_orbit, BirkhoffOrbit};
pub use critical::{critical_points, CriticalKind, CriticalPoint};

use crate::billiard::{advance, Bounce, PhasePoint};
use crate::error::{invalid, Error, Result};
use crate::geometry::BoundaryCurve;
use crate::settings::Settings;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A q-bounce trajectory launched from a footpoint.
#[derive(Debug, Clone)]
pub(crate) struct QPath {
    /// Launch angle.
    pub phi: f64,
    /// Footpoint after q bounces (lifted).
    pub x_end: f64,
    /// Angle of the final bounce.
    pub phi_end: f64,
    pub length: f64,
    /// ∂x_q/∂φ from the accumulated Jacobian.
    pub dx_dphi: f64,
    /// Bounces 0..=q (only kept on request).
    pub bounces: Vec<Bounce>,
}

pub(crate) fn q_path(
    curve: &BoundaryCurve,
    start: &Bounce,
    phi: f64,
    q: usize,
    keep: bool,
    settings: &Settings,
) -> Result<QPath> {
    let mut b = Bounce { phi, ..*start };
    let mut v = [0.0, 1.0];
    let mut length = 0.0;
    let mut bounces = Vec::new();
    if keep {
        bounces.reserve(q + 1);
        bounces.push(b);
    }
    for _ in 0..q {
        let adv = advance(curve, &b, settings)?;
        let j = adv.jacobian;
        v = [j[0][0] * v[0] + j[0][1] * v[1], j[1][0] * v[0] + j[1][1] * v[1]];
        length += adv.chord;
        b = adv.next;
        if keep {
            bounces.push(b);
        }
    }
    Ok(QPath { phi, x_end: b.x, phi_end: b.phi, length, dx_dphi: v[0], bounces })
}

/// Result of shooting from s to s′ + ℓ in q bounces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub q: usize,
    pub s: f64,
    pub s_target: f64,
    /// Passage angle α_q(s, s′).
    pub alpha: f64,
    /// Angle of the q-th bounce.
    pub return_angle: f64,
    /// Ψ_q(s, s′): total length of the q chords.
    pub length: f64,
    /// x_q(s, α) − (s′ + ℓ).
    pub residual: f64,
}

fn check_regime(curve: &BoundaryCurve, q: usize, settings: &Settings) -> Result<()> {
    if q < 2 {
        return Err(invalid(format!("q must be at least 2, got {q}")));
    }
    let dev = curve.max_curvature_deviation();
    if dev > settings.circularity_guard {
        return Err(Error::NotNearlyCircular { deviation: dev, guard: settings.circularity_guard });
    }
    Ok(())
}

/// Shoots from footpoint s for the angle whose q-th iterate lands at `target` (lifted).
pub(crate) fn shoot(
    curve: &BoundaryCurve,
    q: usize,
    s: f64,
    target: f64,
    seed: Option<f64>,
    keep: bool,
    settings: &Settings,
) -> Result<QPath> {
    let l = curve.perimeter();
    let start = Bounce::at(curve, PhasePoint::new(s, 0.0));
    let lo_end = settings.shoot_lower;
    let hi_end = 1.5 * PI / q as f64;
    let (mut a, mut b) = (lo_end, hi_end);
    let (mut a_checked, mut b_checked) = (false, false);
    let mut g_lo = f64::NAN;
    let mut g_hi = f64::NAN;
    let bracket_failure = |g_lo: f64, g_hi: f64| Error::BracketFailure { q, lower: g_lo, upper: g_hi };

    let guess = seed.unwrap_or(PI * (target - s) / (q as f64 * l));
    let mut phi = if guess > a && guess < b { guess } else { 0.5 * (a + b) };
    let tol = settings.shoot_tol * l;
    let accept = 1e-10 * l;
    let mut best: Option<QPath> = None;
    for _ in 0..settings.shoot_max_iter {
        let path = q_path(curve, &start, phi, q, keep, settings)?;
        let g = path.x_end - target;
        if g < 0.0 {
            a = phi;
            a_checked = true;
            g_lo = g;
        } else {
            b = phi;
            b_checked = true;
            g_hi = g;
        }
        let newton = phi - g / path.dx_dphi;
        let better = best.as_ref().is_none_or(|p| g.abs() < (p.x_end - target).abs());
        if better {
            best = Some(path);
        }
        if g.abs() <= tol {
            break;
        }
        let mut next = newton;
        if !(next > a && next < b) || !next.is_finite() {
            // the Newton step left the bracket: make sure the bracket really brackets
            if !a_checked {
                let gl = q_path(curve, &start, lo_end, q, false, settings)?.x_end - target;
                a_checked = true;
                g_lo = gl;
                if gl >= 0.0 {
                    return Err(bracket_failure(g_lo, g_hi));
                }
            }
            if !b_checked {
                let gh = q_path(curve, &start, hi_end, q, false, settings)?.x_end - target;
                b_checked = true;
                g_hi = gh;
                if gh < 0.0 {
                    return Err(bracket_failure(g_lo, g_hi));
                }
            }
            next = 0.5 * (a + b);
        }
        if (next - phi).abs() <= 4.0 * f64::EPSILON * phi {
            break;
        }
        phi = next;
    }
    let best = best.expect("at least one iteration");
    let res = (best.x_end - target).abs();
    if res > accept {
        if !b_checked {
            let gh = q_path(curve, &start, hi_end, q, false, settings)?.x_end - target;
            if gh < 0.0 {
                return Err(bracket_failure(g_lo, gh));
            }
        }
        return Err(Error::SolverFailure { iterations: settings.shoot_max_iter, x: s, phi: best.phi });
    }
    Ok(best)
}

/// The passage angle α_q(s, s′): the launch angle at s whose q-th iterate lands on s′ + ℓ.
///
/// Only defined for |s − s′| < ℓ/100.
pub fn passage_angle(curve: &BoundaryCurve, q: usize, s: f64, s_target: f64, settings: &Settings) -> Result<f64> {
    Ok(passage(curve, q, s, s_target, settings)?.alpha)
}

/// Passage angle together with Ψ_q(s, s′) and the return angle.
pub fn passage(curve: &BoundaryCurve, q: usize, s: f64, s_target: f64, settings: &Settings) -> Result<Passage> {
    check_regime(curve, q, settings)?;
    let window = curve.perimeter() / 100.0;
    let sep = (s - s_target).abs();
    if sep >= window || !sep.is_finite() {
        return Err(Error::WindowViolation { separation: sep, window });
    }
    let target = s_target + curve.perimeter();
    let path = shoot(curve, q, s, target, None, false, settings)?;
    Ok(Passage {
        q,
        s,
        s_target,
        alpha: path.phi,
        return_angle: path.phi_end,
        length: path.length,
        residual: path.x_end - target,
    })
}

/// Sampled q-loop data over an equispaced s-grid on [0, ℓ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopProfile {
    pub q: usize,
    pub perimeter: f64,
    pub s: Vec<f64>,
    /// Loop angle φ_q(s).
    pub phi: Vec<f64>,
    /// Loop length L_q(s).
    pub length: Vec<f64>,
    /// Return angle θ̃_q(s).
    pub theta_tilde: Vec<f64>,
    /// L_q′(s) = cos θ̃_q(s) − cos φ_q(s).
    pub derivative: Vec<f64>,
    /// Largest |x_q(s, φ_q(s)) − (s + ℓ)| over the grid.
    pub max_residual: f64,
}

impl LoopProfile {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn min_length(&self) -> f64 {
        self.length.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_length(&self) -> f64 {
        self.length.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Loop angle at an arbitrary s by periodic linear interpolation (a shooting seed).
    pub(crate) fn phi_near(&self, s: f64) -> f64 {
        let n = self.s.len();
        let h = self.perimeter / n as f64;
        let u = (s / h).rem_euclid(n as f64);
        let i = (u.floor() as usize).min(n - 1);
        let t = u - i as f64;
        self.phi[i] * (1.0 - t) + self.phi[(i + 1) % n] * t
    }
}

/// One point of a q-loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LoopPoint {
    pub phi: f64,
    pub length: f64,
    pub theta_tilde: f64,
    pub derivative: f64,
    pub residual: f64,
}

pub(crate) fn loop_point(curve: &BoundaryCurve, q: usize, s: f64, seed: Option<f64>, settings: &Settings) -> Result<LoopPoint> {
    let target = s + curve.perimeter();
    let path = shoot(curve, q, s, target, seed, false, settings)?;
    Ok(LoopPoint {
        phi: path.phi,
        length: path.length,
        theta_tilde: path.phi_end,
        derivative: path.phi_end.cos() - path.phi.cos(),
        residual: path.x_end - target,
    })
}

/// The q-loop through a single footpoint, with all q + 1 bounces.
pub fn loop_orbit(curve: &BoundaryCurve, q: usize, s: f64, settings: &Settings) -> Result<Vec<PhasePoint>> {
    check_regime(curve, q, settings)?;
    let path = shoot(curve, q, s, s + curve.perimeter(), None, true, settings)?;
    Ok(path.bounces.iter().map(|b| b.phase()).collect())
}

/// Samples the q-loop at `nodes` equispaced footpoints.
pub fn loop_profile(curve: &BoundaryCurve, q: usize, nodes: usize, settings: &Settings) -> Result<LoopProfile> {
    check_regime(curve, q, settings)?;
    if nodes < 64 {
        return Err(invalid(format!("loop profile needs at least 64 nodes, got {nodes}")));
    }
    let l = curve.perimeter();
    let s: Vec<f64> = (0..nodes).map(|i| l * i as f64 / nodes as f64).collect();
    let pts: Vec<LoopPoint> =
        s.par_iter().map(|&si| loop_point(curve, q, si, None, settings)).collect::<Result<_>>()?;
    Ok(LoopProfile {
        q,
        perimeter: l,
        phi: pts.iter().map(|p| p.phi).collect(),
        length: pts.iter().map(|p| p.length).collect(),
        theta_tilde: pts.iter().map(|p| p.theta_tilde).collect(),
        derivative: pts.iter().map(|p| p.derivative).collect(),
        max_residual: pts.iter().map(|p| p.residual.abs()).fold(0.0, f64::max),
        s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FourierProfile;
    use std::f64::consts::TAU;

    fn settings() -> Settings {
        Settings::default()
    }

    #[test]
    fn disk_passage_angles() {
        let c = BoundaryCurve::disk(1024).unwrap();
        for q in [2, 3, 7, 20] {
            let a = passage_angle(&c, q, 0.7, 0.7, &settings()).unwrap();
            assert!((a - PI / q as f64).abs() < 1e-14, "q = {q}");
        }
        let a = passage_angle(&c, 4, 1.0, 1.0 + 0.05, &settings()).unwrap();
        assert!((a - (TAU + 0.05) / 8.0).abs() < 1e-14);
        let p = passage(&c, 5, 0.0, 0.0, &settings()).unwrap();
        assert!((p.length - 10.0 * (PI / 5.0).sin()).abs() < 1e-13);
    }

    #[test]
    fn passage_window_is_enforced() {
        let c = BoundaryCurve::disk(1024).unwrap();
        match passage_angle(&c, 4, 1.0, 1.1, &settings()) {
            Err(Error::WindowViolation { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn guard_rejects_strongly_deformed_curve() {
        let c = BoundaryCurve::new(FourierProfile::cosine(3, 0.1).into(), 1.0, 1024).unwrap();
        match passage_angle(&c, 3, 0.0, 0.0, &settings()) {
            Err(Error::NotNearlyCircular { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bracket_failure_is_reported() {
        // a tight guard-free setup where the upper bracket end cannot reach the target
        let c = BoundaryCurve::disk(1024).unwrap();
        let start = Bounce::at(&c, PhasePoint::new(0.0, 0.0));
        let far = 2.0 * TAU;
        let res = shoot(&c, 3, 0.0, far, None, false, &settings());
        assert!(matches!(res, Err(Error::BracketFailure { q: 3, .. })), "{res:?}");
        let _ = start;
    }

    #[test]
    fn ellipse_three_loop_closes() {
        let c = BoundaryCurve::ellipse(0.1, 1024).unwrap();
        let orbit = loop_orbit(&c, 3, 0.0, &settings()).unwrap();
        let last = orbit.last().unwrap();
        assert!((last.x - c.perimeter()).abs() < 1e-10 * c.perimeter());
    }

    #[test]
    fn disk_loop_profile_is_constant() {
        let c = BoundaryCurve::disk(1024).unwrap();
        let p = loop_profile(&c, 3, 64, &settings()).unwrap();
        for (l, d) in p.length.iter().zip(&p.derivative) {
            assert!((l - 6.0 * (PI / 3.0).sin()).abs() < 1e-12);
            assert!(d.abs() < 1e-13);
        }
    }

    #[test]
    fn resonant_loop_oscillates_at_first_order_amplitude() {
        let c = BoundaryCurve::new(FourierProfile::cosine(3, 0.01).into(), 1.0, 1024).unwrap();
        let p = loop_profile(&c, 3, 256, &settings()).unwrap();
        let width = p.max_length() - p.min_length();
        // first-order prediction: L₃ ≈ 6 sin(π/3) (1 + …) + 6 sin(π/3)·0.01 cos 3s
        let predicted = 2.0 * 6.0 * (PI / 3.0).sin() * 0.01;
        assert!((width - predicted).abs() < 0.1 * predicted, "width {width}, predicted {predicted}");
        let changes = (0..p.len())
            .filter(|&i| p.derivative[i].signum() != p.derivative[(i + 1) % p.len()].signum())
            .count();
        assert!(changes >= 2);
        assert!(p.max_residual <= 1e-10 * c.perimeter());
        assert!(p.phi.iter().all(|&a| a > 0.0 && a < 1.5 * PI / 3.0));
    }
}
