//! The billiard map on the annulus, its lift to ℝ × [0, π], and its derivative.
//!
//! Phase points are (x, φ): x is the lifted arc-length footpoint and φ the angle between the
//! outgoing ray and the positive tangent. The lift fixes (x, 0) and sends (x, π) to (x + ℓ, π).

use crate::error::{Error, Result};
use crate::geometry::{sinc, BoundaryCurve, PolarJet};
use crate::quad;
use crate::settings::Settings;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub phi: f64,
}

impl PhasePoint {
    pub fn new(x: f64, phi: f64) -> Self {
        PhasePoint { x, phi }
    }
}

/// Row-major 2×2 matrix.
pub type Matrix2 = [[f64; 2]; 2];

pub fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub const IDENTITY: Matrix2 = [[1.0, 0.0], [0.0, 1.0]];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub next: PhasePoint,
    /// Derivative of the lift, rows (x₁, φ₁), columns (x, φ).
    pub jacobian: Matrix2,
    /// Length of the chord travelled.
    pub chord: f64,
}

/// A footpoint together with its polar angle, so iteration never re-inverts θ(s).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bounce {
    pub x: f64,
    pub phi: f64,
    pub jet: PolarJet,
}

impl Bounce {
    pub(crate) fn at(curve: &BoundaryCurve, p: PhasePoint) -> Self {
        let theta = curve.theta_of_s(p.x);
        Bounce { x: p.x, phi: p.phi, jet: curve.jet(theta) }
    }

    pub(crate) fn phase(&self) -> PhasePoint {
        PhasePoint { x: self.x, phi: self.phi }
    }
}

pub(crate) struct Advance {
    pub next: Bounce,
    pub chord: f64,
    pub jacobian: Matrix2,
}

fn check_angle(phi: f64) -> Result<()> {
    if !(0.0..=PI).contains(&phi) || !phi.is_finite() {
        return Err(crate::error::invalid(format!("reflection angle {phi} outside [0, π]")));
    }
    Ok(())
}

/// One bounce from a resolved footpoint.
pub(crate) fn advance(curve: &BoundaryCurve, b: &Bounce, settings: &Settings) -> Result<Advance> {
    let phi = b.phi;
    check_angle(phi)?;
    if phi == 0.0 || phi == PI {
        let shift = if phi == 0.0 { 0.0 } else { curve.perimeter() };
        let theta = b.jet.theta + if phi == 0.0 { 0.0 } else { TAU };
        let jet = PolarJet { theta, ..b.jet };
        return Ok(Advance {
            next: Bounce { x: b.x + shift, phi, jet },
            chord: 0.0,
            jacobian: [[1.0, 2.0 / b.jet.kappa], [0.0, 1.0]],
        });
    }
    let delta = solve_chord(curve, &b.jet, phi, settings).map_err(|iterations| Error::SolverFailure {
        iterations,
        x: b.x,
        phi,
    })?;
    let theta1 = b.jet.theta + delta;
    let jet1 = curve.jet(theta1);
    let phi1 = delta - jet1.radial_tilt() + b.jet.radial_tilt() - phi;
    let x1 = b.x + curve.arc_between(b.jet.theta, theta1);
    let p0 = b.jet.point();
    let p1 = jet1.point();
    let chord = (p1[0] - p0[0]).hypot(p1[1] - p0[1]);
    let (s0, s1) = (phi.sin(), phi1.sin());
    let (k0, k1) = (b.jet.kappa, jet1.kappa);
    let jacobian = [
        [(k0 * chord - s0) / s1, chord / s1],
        [(k0 * k1 * chord - k0 * s1 - k1 * s0) / s1, (k1 * chord - s1) / s1],
    ];
    Ok(Advance { next: Bounce { x: x1, phi: phi1, jet: jet1 }, chord, jacobian })
}

/// Polar angle increment Δ ∈ (0, 2π) to the second intersection of the ray.
///
/// Solves F(Δ) = r(θ₀+Δ) sin(ψ−θ₀−Δ) − r(θ₀) sin(ψ−θ₀) = 0, the signed distance of γ(θ₀+Δ)
/// from the ray line, through the divided form H = F/Δ which is positive at Δ = 0.
/// On failure returns the number of iterations spent.
fn solve_chord(
    curve: &BoundaryCurve,
    jet0: &PolarJet,
    phi: f64,
    settings: &Settings,
) -> std::result::Result<f64, usize> {
    let radius = curve.radius();
    let theta0 = jet0.theta;
    let r0 = jet0.r[0];
    // ψ − θ₀, with ψ the direction of the ray
    let alpha = std::f64::consts::FRAC_PI_2 - jet0.radial_tilt() + phi;
    let h = |d: f64| {
        radius.divided_difference(theta0, d) * (alpha - d).sin() - r0 * (alpha - 0.5 * d).cos() * sinc(0.5 * d)
    };
    let max_iter = settings.step_max_iter;
    let mut iters = 0usize;

    let seed = (2.0 * phi).min(TAU * (1.0 - 1e-12));
    let hs = h(seed);
    if hs == 0.0 {
        return Ok(seed);
    }
    let (mut a, mut b);
    if hs > 0.0 {
        a = seed;
        let mut step = (0.05 * seed).max(1e-6);
        loop {
            iters += 1;
            if iters > max_iter {
                return Err(iters);
            }
            let mut cand = a + step;
            if cand >= TAU {
                cand = 0.5 * (a + TAU);
            }
            if h(cand) < 0.0 {
                b = cand;
                break;
            }
            a = cand;
            step *= 2.0;
        }
    } else {
        b = seed;
        let mut step = (0.05 * seed).max(1e-6);
        loop {
            iters += 1;
            if iters > max_iter {
                return Err(iters);
            }
            let cand = (b - step).max(0.5 * b);
            if h(cand) > 0.0 {
                a = cand;
                break;
            }
            b = cand;
            step *= 2.0;
        }
    }

    // safeguarded Newton on F = Δ·H, started from the seed (one end of the bracket)
    let mut d = seed;
    while iters <= max_iter {
        iters += 1;
        let hv = h(d);
        if hv == 0.0 {
            return Ok(d);
        }
        if hv > 0.0 {
            a = d;
        } else {
            b = d;
        }
        let r1 = radius.derivs(theta0 + d);
        let dfd = r1[1] * (alpha - d).sin() - r1[0] * (alpha - d).cos();
        let newton = d - hv * d / dfd;
        let tol = settings.step_tol * d.max(1.0);
        if dfd < 0.0 && (newton - d).abs() <= tol {
            return Ok(newton);
        }
        d = if dfd < 0.0 && newton >= a && newton <= b { newton } else { 0.5 * (a + b) };
        if b - a <= 4.0 * f64::EPSILON * b {
            return Ok(d);
        }
    }
    Err(iters)
}

/// One step of the lifted billiard map.
pub fn step(curve: &BoundaryCurve, p: PhasePoint) -> Result<StepResult> {
    step_with(curve, p, &Settings::default())
}

pub fn step_with(curve: &BoundaryCurve, p: PhasePoint, settings: &Settings) -> Result<StepResult> {
    check_angle(p.phi)?;
    let adv = advance(curve, &Bounce::at(curve, p), settings)?;
    Ok(StepResult { next: adv.next.phase(), jacobian: adv.jacobian, chord: adv.chord })
}

/// The split x₁ = x + F, φ₁ = G with F = 2φ + P and G = φ + Q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub f: f64,
    pub g: f64,
    pub p: f64,
    pub q: f64,
}

pub fn decompose(curve: &BoundaryCurve, p: PhasePoint) -> Result<Decomposition> {
    let s = step(curve, p)?;
    let f = s.next.x - p.x;
    let g = s.next.phi;
    Ok(Decomposition { f, g, p: f - 2.0 * p.phi, q: g - p.phi })
}

/// A finite piece of trajectory of the lifted map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub points: Vec<PhasePoint>,
    pub chords: Vec<f64>,
    pub length: f64,
    /// ⌊(x_n − x₀)/ℓ⌋, the number of completed turns (exact for periodic orbits).
    pub winding: i64,
}

pub fn iterate(curve: &BoundaryCurve, p: PhasePoint, n: usize) -> Result<Orbit> {
    iterate_with(curve, p, n, &Settings::default())
}

pub fn iterate_with(curve: &BoundaryCurve, p: PhasePoint, n: usize, settings: &Settings) -> Result<Orbit> {
    if n == 0 {
        return Err(crate::error::invalid("orbit needs at least one step"));
    }
    check_angle(p.phi)?;
    let mut b = Bounce::at(curve, p);
    let mut points = Vec::with_capacity(n + 1);
    let mut chords = Vec::with_capacity(n);
    points.push(p);
    for _ in 0..n {
        let adv = advance(curve, &b, settings)?;
        chords.push(adv.chord);
        b = adv.next;
        points.push(b.phase());
    }
    let length = chords.iter().sum();
    let turns = (points[n].x - p.x) / curve.perimeter();
    let winding = (turns + 1e-9).floor() as i64;
    Ok(Orbit { points, chords, length, winding })
}

/// ∫ₓ^{x₁} sin(φ − ∫ₓ^{x′} κ) dx′ at the computed next footpoint; vanishes for a true bounce.
pub fn lazutkin_residual(curve: &BoundaryCurve, p: PhasePoint) -> Result<f64> {
    let next = step(curve, p)?.next;
    Ok(lazutkin_residual_at(curve, p, next.x))
}

/// The same integral with an arbitrary upper endpoint.
pub fn lazutkin_residual_at(curve: &BoundaryCurve, p: PhasePoint, x1: f64) -> f64 {
    let theta0 = curve.theta_of_s(p.x);
    let omega0 = curve.jet(theta0).tangent_angle();
    quad::composite(quad::gl16(), p.x, x1, 16, |x| {
        let omega = curve.jet(curve.theta_of_s(x)).tangent_angle();
        (p.phi - (omega - omega0)).sin()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{FourierProfile, Profile};
    use std::f64::consts::FRAC_PI_3;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn disk_step_is_rotation() {
        let c = BoundaryCurve::disk(1024).unwrap();
        let s = step(&c, PhasePoint::new(0.0, FRAC_PI_3)).unwrap();
        assert!(close(s.next.x, 2.0 * FRAC_PI_3, 1e-13));
        assert!(close(s.next.phi, FRAC_PI_3, 1e-14));
        let j = s.jacobian;
        assert!(close(j[0][0], 1.0, 1e-13) && close(j[0][1], 2.0, 1e-13));
        assert!(close(j[1][0], 0.0, 1e-13) && close(j[1][1], 1.0, 1e-13));
    }

    #[test]
    fn boundary_angles_are_closed_form() {
        let c = BoundaryCurve::ellipse(0.3, 1024).unwrap();
        let s = step(&c, PhasePoint::new(0.4, 0.0)).unwrap();
        assert_eq!(s.next, PhasePoint::new(0.4, 0.0));
        let s = step(&c, PhasePoint::new(0.4, PI)).unwrap();
        assert!(close(s.next.x, 0.4 + c.perimeter(), 1e-14));
        assert_eq!(s.next.phi, PI);
    }

    #[test]
    fn ellipse_bouncing_ball() {
        let c = BoundaryCurve::ellipse(0.1, 1024).unwrap();
        let s = step(&c, PhasePoint::new(0.0, std::f64::consts::FRAC_PI_2)).unwrap();
        assert!(close(s.next.x, 0.5 * c.perimeter(), 1e-12));
        assert!(close(s.next.phi, std::f64::consts::FRAC_PI_2, 1e-12));
        assert!(close(s.chord, 2.0, 1e-14));
    }

    /// Secant iteration on the Cartesian intersection of the ray with r(θ), written independently.
    fn oracle_next_theta(f: &FourierProfile, tau: f64, theta0: f64, dir: [f64; 2]) -> f64 {
        let r = |t: f64| 1.0 + tau * f.value(t);
        let p0 = [r(theta0) * theta0.cos(), r(theta0) * theta0.sin()];
        let g = |t: f64| {
            let p = [r(t) * t.cos(), r(t) * t.sin()];
            (p[0] - p0[0]) * dir[1] - (p[1] - p0[1]) * dir[0]
        };
        let ang = dir[1].atan2(dir[0]);
        // disk guess: the chord direction bisects the polar angles
        let mut t1 = 2.0 * ang - theta0 + PI;
        while t1 <= theta0 {
            t1 += TAU;
        }
        let mut t0 = t1 - 1e-3;
        for _ in 0..100 {
            let (g0, g1) = (g(t0), g(t1));
            if g1 == g0 {
                break;
            }
            let t2 = t1 - g1 * (t1 - t0) / (g1 - g0);
            t0 = t1;
            t1 = t2;
            if (t1 - t0).abs() < 1e-15 {
                break;
            }
        }
        t1
    }

    #[test]
    fn matches_independent_secant_oracle() {
        let f = FourierProfile::cosine(3, 0.01);
        let c = BoundaryCurve::new(Profile::Fourier(f.clone()), 1.0, 1024).unwrap();
        let p = PhasePoint::new(0.3, 0.7);
        let s = step(&c, p).unwrap();
        let fr = c.evaluate(0.3);
        let (cs, sn) = (0.7f64.cos(), 0.7f64.sin());
        let dir = [fr.tangent[0] * cs - fr.normal[0] * sn, fr.tangent[1] * cs - fr.normal[1] * sn];
        let t1 = oracle_next_theta(&f, 1.0, fr.theta, dir);
        let diff = c.theta_of_s(s.next.x) - t1;
        assert!(close(diff, TAU * (diff / TAU).round(), 1e-12));
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let f = FourierProfile::new(vec![0.0, 0.0, 0.04, 0.02], vec![0.0, 0.0, 0.0, 0.03]).unwrap();
        let c = BoundaryCurve::new(f.into(), 1.0, 1024).unwrap();
        let h = 1e-6;
        for &(x, phi) in &[(0.3, 0.7), (2.0, 0.2), (5.1, 2.4), (1.0, 1.5)] {
            let j = step(&c, PhasePoint::new(x, phi)).unwrap().jacobian;
            let fx = |dx: f64, dp: f64| step(&c, PhasePoint::new(x + dx, phi + dp)).unwrap().next;
            let (xp, xm) = (fx(h, 0.0), fx(-h, 0.0));
            let (pp, pm) = (fx(0.0, h), fx(0.0, -h));
            let fd = [
                [(xp.x - xm.x) / (2.0 * h), (pp.x - pm.x) / (2.0 * h)],
                [(xp.phi - xm.phi) / (2.0 * h), (pp.phi - pm.phi) / (2.0 * h)],
            ];
            for r in 0..2 {
                for k in 0..2 {
                    let scale = j[r][k].abs().max(1e-2);
                    assert!((fd[r][k] - j[r][k]).abs() < 1e-4 * scale, "({x},{phi}) entry {r}{k}");
                }
            }
            // area preservation in (x, −cos φ): det = sin φ₀ / sin φ₁
            let next = step(&c, PhasePoint::new(x, phi)).unwrap().next;
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            assert!(close(det, phi.sin() / next.phi.sin(), 1e-10));
        }
    }

    #[test]
    fn reversibility() {
        let f = FourierProfile::cosine(2, 0.05);
        let c = BoundaryCurve::new(f.into(), 1.0, 1024).unwrap();
        for &(x, phi) in &[(0.1, 0.3), (4.0, 1.2), (2.2, 2.9)] {
            let n = step(&c, PhasePoint::new(x, phi)).unwrap().next;
            let back = step(&c, PhasePoint::new(n.x, PI - n.phi)).unwrap().next;
            let turns = (back.x - x) / c.perimeter();
            assert!(close(turns, turns.round(), 1e-10));
            assert!(close(back.phi, PI - phi, 1e-10));
        }
    }

    #[test]
    fn disk_polygons() {
        let c = BoundaryCurve::disk(1024).unwrap();
        let o = iterate(&c, PhasePoint::new(0.0, FRAC_PI_3), 3).unwrap();
        assert!(close(o.points[3].x, TAU, 1e-12));
        assert_eq!(o.winding, 1);
        assert!(close(o.length, 3.0 * 3f64.sqrt(), 1e-12));
        let o = iterate(&c, PhasePoint::new(0.0, 2.0 * PI / 5.0), 5).unwrap();
        assert!(close(o.points[5].x, 2.0 * TAU, 1e-12));
        assert_eq!(o.winding, 2);
        assert!(close(o.length, 10.0 * (2.0 * PI / 5.0).sin(), 1e-12));
    }

    #[test]
    fn ellipse_orbit_conserves_joachimsthal_integral() {
        // for x²/a² + y²/b² = 1 the product ⟨A p, v⟩ with A = diag(1/a², 1/b²) and v the unit
        // outgoing direction is conserved up to sign by reflections
        let e: f64 = 0.1;
        let b2 = 1.0 - e * e;
        let c = BoundaryCurve::ellipse(e, 1024).unwrap();
        let o = iterate(&c, PhasePoint::new(0.2, 0.6), 50).unwrap();
        let invariant = |p: &PhasePoint| {
            let f = c.evaluate(p.x);
            let (cs, sn) = (p.phi.cos(), p.phi.sin());
            let v = [f.tangent[0] * cs - f.normal[0] * sn, f.tangent[1] * cs - f.normal[1] * sn];
            (f.point[0] * v[0] + f.point[1] * v[1] / b2).abs()
        };
        let j0 = invariant(&o.points[0]);
        for p in &o.points {
            assert!(close(invariant(p), j0, 1e-9));
        }
    }

    #[test]
    fn lazutkin_residual_vanishes_on_true_bounce() {
        let c = BoundaryCurve::disk(1024).unwrap();
        assert!(lazutkin_residual(&c, PhasePoint::new(0.0, std::f64::consts::FRAC_PI_4)).unwrap().abs() < 1e-10);
        let c = BoundaryCurve::new(FourierProfile::cosine(3, 0.01).into(), 1.0, 1024).unwrap();
        for &(x, phi) in &[(0.1, 0.5), (3.3, 1.1), (5.0, 0.05)] {
            let p = PhasePoint::new(x, phi);
            assert!(lazutkin_residual(&c, p).unwrap().abs() < 1e-8);
            let x1 = step(&c, p).unwrap().next.x;
            assert!(lazutkin_residual_at(&c, p, x1 + 0.01).abs() > 1e-4);
        }
    }

    #[test]
    fn decomposition_small_angle_behaviour() {
        let c = BoundaryCurve::new(FourierProfile::cosine(2, 0.01).into(), 1.0, 1024).unwrap();
        let mut ratios = Vec::new();
        for k in 1..=12 {
            let phi = 2f64.powi(-k);
            let d = decompose(&c, PhasePoint::new(0.5, phi)).unwrap();
            assert!(d.p.abs() <= 10.0 * 0.01 * phi);
            ratios.push(d.q.abs() / (phi * phi));
        }
        assert!(ratios.iter().all(|r| *r < 1.0));
        let disk = BoundaryCurve::disk(1024).unwrap();
        let d = decompose(&disk, PhasePoint::new(1.0, 0.8)).unwrap();
        assert!(d.p.abs() < 1e-14 && d.q.abs() < 1e-14);
    }
}
