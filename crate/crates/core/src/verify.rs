//! Invariant suite run against a single domain.
//!
//! Every check records the measured value next to its tolerance. A solver error inside a check
//! fails that check instead of aborting the suite.

use crate::billiard::{iterate_with, step_with, Bounce, PhasePoint};
use crate::deform::{melnikov, melnikov_vs_fd, s_grid, variations};
use crate::error::{invalid, Result};
use crate::geometry::{curvature_functionals, BoundaryCurve, Profile};
use crate::loops::{loop_point, loop_profile, passage, q_path};
use crate::osc::{coarea_density, decay_exponent, ibp_identity, oscillatory_integral, sublevel_distribution, PeriodicFunction};
use crate::settings::Settings;
use crate::spectrum::{band, SpectrumBand};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Not applicable to this domain; counts as passed.
    pub skipped: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Loop and band checks run for q = 2..=q_max.
    pub q_max: usize,
    pub twist_samples: usize,
    pub jacobian_samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { q_max: 10, twist_samples: 10_000, jacobian_samples: 200, seed: 0x5eed }
    }
}

/// `value ≤ tolerance` passes.
fn at_most(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed: value <= tolerance, skipped: false, value, tolerance, detail: detail.into() }
}

/// `value > tolerance` passes.
fn above(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed: value > tolerance, skipped: false, value, tolerance, detail: detail.into() }
}

fn skipped(name: &str, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed: true, skipped: true, value: 0.0, tolerance: 0.0, detail: detail.into() }
}

fn failed(name: &str, err: crate::Error) -> Check {
    Check {
        name: name.into(),
        passed: false,
        skipped: false,
        value: f64::NAN,
        tolerance: f64::NAN,
        detail: err.to_string(),
    }
}

fn run(name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| failed(name, e))
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Distance between two lifted footpoints modulo the perimeter.
fn circle_distance(a: f64, b: f64, l: f64) -> f64 {
    let d = (a - b).rem_euclid(l);
    d.min(l - d)
}

fn phase_samples(curve: &BoundaryCurve, n: usize, margin: f64, rng: &mut ChaCha8Rng) -> Vec<PhasePoint> {
    let l = curve.perimeter();
    (0..n).map(|_| PhasePoint::new(rng.random_range(0.0..l), rng.random_range(margin..PI - margin))).collect()
}

/// Runs every invariant check that applies to `curve`.
pub fn verify(curve: &BoundaryCurve, options: &VerifyOptions, settings: &Settings) -> Result<VerifyReport> {
    if options.q_max < 3 {
        return Err(invalid(format!("verify needs q_max >= 3, got {}", options.q_max)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut checks = geometry_checks(curve, &mut rng);
    checks.extend(billiard_checks(curve, options, settings, &mut rng));
    checks.extend(loop_checks(curve, options.q_max, settings));
    checks.extend(spectrum_checks(curve, options.q_max, settings));
    checks.extend(deform_checks(curve, options.q_max, settings));
    checks.extend(osc_checks(settings));
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { checks, passed })
}

fn geometry_checks(curve: &BoundaryCurve, rng: &mut ChaCha8Rng) -> Vec<Check> {
    let l = curve.perimeter();
    let mut out = vec![run("gauss_bonnet", || {
        let tc = curvature_functionals(curve, None)?.total_curvature;
        Ok(at_most("gauss_bonnet", (tc - TAU).abs(), 1e-8, "|∮κ ds − 2π|"))
    })];

    let mut s: Vec<f64> = curve.s_nodes();
    s.extend((0..1000).map(|_| rng.random_range(0.0..l)));
    let rt = max_of(s.iter().map(|&x| (curve.s_of_theta(curve.theta_of_s(x)) - x).abs())) / l;
    out.push(at_most("theta_s_round_trip", rt, 1e-10, "max |s(θ(s)) − s| / ℓ"));

    out.push(run("lazutkin_monotone", || {
        let xi: Vec<f64> = curve.s_nodes().iter().map(|&x| curve.lazutkin(x)).collect::<Result<_>>()?;
        let step = xi.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        Ok(above("lazutkin_monotone", step, 0.0, "smallest increment of ξ on the s-grid"))
    }));
    let xis: Vec<f64> = (0..1000).map(|_| rng.random_range(0.0..1.0)).collect();
    out.push(run("lazutkin_round_trip", || {
        let mut worst = 0.0f64;
        for &xi in &xis {
            worst = worst.max((curve.lazutkin(curve.s_of_lazutkin(xi)?)? - xi).abs());
        }
        Ok(at_most("lazutkin_round_trip", worst, 1e-9, "max |ξ(s(ξ)) − ξ|"))
    }));

    out.push(run("grid_doubling", || {
        let fine = BoundaryCurve::new(curve.profile().clone(), curve.tau(), 2 * curve.grid_size())?;
        let a = curvature_functionals(curve, None)?;
        let b = curvature_functionals(&fine, None)?;
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-12);
        let worst = [
            rel(curve.perimeter(), fine.perimeter()),
            rel(a.kappa_sq, b.kappa_sq),
            rel(a.dkappa_sq, b.dkappa_sq),
            rel(a.kappa_4, b.kappa_4),
            rel(a.kappa_two_thirds, b.kappa_two_thirds),
            rel(a.total_curvature, b.total_curvature),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        Ok(at_most("grid_doubling", worst, 1e-10, "largest relative change of ℓ and the functionals"))
    }));
    out
}

/// Curvature spread up to which the iterated-angle bound is asserted.
const ANGLE_BOUND_SPREAD: f64 = 0.05;

fn billiard_checks(
    curve: &BoundaryCurve,
    options: &VerifyOptions,
    settings: &Settings,
    rng: &mut ChaCha8Rng,
) -> Vec<Check> {
    let l = curve.perimeter();
    let mut out = Vec::new();

    let pts = phase_samples(curve, options.twist_samples, 1e-6, rng);
    out.push(run("twist", || {
        let slopes: Vec<f64> =
            pts.par_iter().map(|&p| step_with(curve, p, settings).map(|r| r.jacobian[0][1])).collect::<Result<_>>()?;
        let min = slopes.into_iter().fold(f64::INFINITY, f64::min);
        Ok(above("twist", min, 0.0, format!("min ∂x₁/∂φ over {} random phase points", pts.len())))
    }));

    let pts = phase_samples(curve, options.jacobian_samples, 0.05, rng);
    out.push(run("jacobian_fd", || {
        let h = 1e-6;
        let errs: Vec<f64> = pts
            .par_iter()
            .map(|&p| -> Result<f64> {
                let j = step_with(curve, p, settings)?.jacobian;
                let at = |x: f64, phi: f64| step_with(curve, PhasePoint::new(x, phi), settings).map(|r| r.next);
                let (xp, xm) = (at(p.x + h, p.phi)?, at(p.x - h, p.phi)?);
                let (pp, pm) = (at(p.x, p.phi + h)?, at(p.x, p.phi - h)?);
                let fd = [
                    [(xp.x - xm.x) / (2.0 * h), (pp.x - pm.x) / (2.0 * h)],
                    [(xp.phi - xm.phi) / (2.0 * h), (pp.phi - pm.phi) / (2.0 * h)],
                ];
                let mut worst = 0.0f64;
                for r in 0..2 {
                    for c in 0..2 {
                        worst = worst.max((fd[r][c] - j[r][c]).abs() / j[r][c].abs().max(1.0));
                    }
                }
                Ok(worst)
            })
            .collect::<Result<_>>()?;
        Ok(at_most("jacobian_fd", max_of(errs), 1e-4, "entrywise error / max(|J|, 1), h = 1e-6"))
    }));
    out.push(run("jacobian_determinant", || {
        let errs: Vec<f64> = pts
            .par_iter()
            .map(|&p| -> Result<f64> {
                let r = step_with(curve, p, settings)?;
                let j = r.jacobian;
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                Ok((det * r.next.phi.sin() / p.phi.sin() - 1.0).abs())
            })
            .collect::<Result<_>>()?;
        Ok(at_most("jacobian_determinant", max_of(errs), 1e-9, "max |det J · sin φ₁ / sin φ₀ − 1|"))
    }));
    out.push(run("reversibility", || {
        let errs: Vec<f64> = pts
            .par_iter()
            .map(|&p| -> Result<f64> {
                let n = step_with(curve, p, settings)?.next;
                let back = step_with(curve, PhasePoint::new(n.x, PI - n.phi), settings)?.next;
                Ok(circle_distance(back.x, p.x, l))
            })
            .collect::<Result<_>>()?;
        Ok(at_most("reversibility", max_of(errs), 1e-9, "footpoint error after stepping back from (x₁, π − φ₁)"))
    }));
    out.push(run("chord_turning_bound", || {
        let (kmin, kmax) = (curve.min_curvature(), curve.max_curvature());
        let errs: Vec<f64> = pts
            .par_iter()
            .map(|&p| -> Result<f64> {
                let n = step_with(curve, p, settings)?.next;
                let turn = p.phi + n.phi;
                let arc = n.x - p.x;
                Ok((turn / kmax - arc).max(arc - turn / kmin).max(0.0))
            })
            .collect::<Result<_>>()?;
        Ok(at_most(
            "chord_turning_bound",
            max_of(errs),
            1e-9 * l,
            "violation of (φ₀ + φ₁)/κ_max ≤ x₁ − x ≤ (φ₀ + φ₁)/κ_min",
        ))
    }));

    let q = options.q_max.max(10);
    // along an orbit φ roughly follows κ^{1/3}, so this is the expected angle spread
    let spread = (curve.max_curvature() / curve.min_curvature()).cbrt() - 1.0;
    if spread > ANGLE_BOUND_SPREAD {
        out.push(skipped(
            "angle_bound",
            format!("(κ_max/κ_min)^(1/3) − 1 = {spread:.3} exceeds {ANGLE_BOUND_SPREAD}; the 10% bound needs a small perturbation"),
        ));
        return out;
    }
    out.push(run("angle_bound", || {
        let phi0 = PI / q as f64;
        let ratios: Vec<f64> = (0..64)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let orbit = iterate_with(curve, PhasePoint::new(l * i as f64 / 64.0, phi0), q, settings)?;
                Ok(orbit.points.iter().map(|p| p.phi / phi0 - 1.0).fold(0.0, f64::max))
            })
            .collect::<Result<_>>()?;
        Ok(at_most("angle_bound", max_of(ratios), 0.1, format!("max φ_j/φ₀ − 1 over {q} iterates from φ₀ = π/{q}")))
    }));
    out
}

fn loop_checks(curve: &BoundaryCurve, q_max: usize, settings: &Settings) -> Vec<Check> {
    let l = curve.perimeter();
    let qs: Vec<usize> = (2..=q_max).collect();
    let mut out = Vec::new();

    out.push(run("shooting_monotone", || {
        let mins: Vec<f64> = qs
            .par_iter()
            .map(|&q| -> Result<f64> {
                let upper = 1.5 * PI / q as f64;
                let mut min = f64::INFINITY;
                for k in 0..4 {
                    let start = Bounce::at(curve, PhasePoint::new(l * k as f64 / 4.0, upper));
                    for i in 1..=64 {
                        let phi = upper * i as f64 / 64.0;
                        min = min.min(q_path(curve, &start, phi, q, false, settings)?.dx_dphi);
                    }
                }
                Ok(min)
            })
            .collect::<Result<_>>()?;
        let min = mins.into_iter().fold(f64::INFINITY, f64::min);
        Ok(above("shooting_monotone", min, 0.0, format!("min ∂x_q/∂φ on (0, 3π/(2q)], q = 2..={q_max}")))
    }));

    let profiles: Vec<Result<_>> = qs.par_iter().map(|&q| loop_profile(curve, q, settings.loop_nodes, settings)).collect();
    out.push(run("loop_closure", || {
        let mut worst = 0.0f64;
        for p in &profiles {
            worst = worst.max(p.as_ref().map_err(Clone::clone)?.max_residual / l);
        }
        Ok(at_most("loop_closure", worst, 1e-10, "max |x_q(s, φ_q) − (s + ℓ)| / ℓ"))
    }));
    out.push(run("loop_angle_bound", || {
        let mut worst = 0.0f64;
        for p in &profiles {
            let p = p.as_ref().map_err(Clone::clone)?;
            let cap = 1.5 * PI / p.q as f64;
            worst = worst.max(p.phi.iter().fold(0.0f64, |m, &phi| m.max(phi / cap)));
        }
        Ok(at_most("loop_angle_bound", worst, 1.0 - 1e-12, "max φ_q(s) / (3π/(2q))"))
    }));
    out.push(run("passage_diagonal", || {
        let mut worst = 0.0f64;
        for p in &profiles {
            let p = p.as_ref().map_err(Clone::clone)?;
            for i in (0..p.len()).step_by((p.len() / 4).max(1)) {
                let ps = passage(curve, p.q, p.s[i], p.s[i], settings)?;
                worst = worst.max((ps.alpha - p.phi[i]).abs()).max((ps.length - p.length[i]).abs() / l);
            }
        }
        Ok(at_most("passage_diagonal", worst, 1e-12, "α_q(s, s) − φ_q(s) and (Ψ_q(s, s) − L_q(s))/ℓ"))
    }));

    out.push(run("derivative_identity", || {
        let (h1, h2) = (l / 512.0, l / 1024.0);
        let rows: Vec<(usize, f64, f64)> = qs
            .par_iter()
            .map(|&q| -> Result<(usize, f64, f64)> {
                let (mut d1, mut d2) = (0.0f64, 0.0f64);
                for k in 0..16 {
                    let s = l * (k as f64 + 0.37) / 16.0;
                    let exact = loop_point(curve, q, s, None, settings)?.derivative;
                    let fd = |h: f64| -> Result<f64> {
                        let a = loop_point(curve, q, s + h, None, settings)?.length;
                        let b = loop_point(curve, q, s - h, None, settings)?.length;
                        Ok((a - b) / (2.0 * h))
                    };
                    d1 = d1.max((fd(h1)? - exact).abs());
                    d2 = d2.max((fd(h2)? - exact).abs());
                }
                Ok((q, d1, d2))
            })
            .collect::<Result<_>>()?;
        // below this the loop function is flat up to shooting round-off and there is no order to measure
        let flat = 1e-9;
        let mut worst = f64::INFINITY;
        let mut detail = String::from("min measured order of the central difference of L_q against L_q′");
        for (q, d1, d2) in rows {
            if d1 <= flat {
                continue;
            }
            let order = (d1 / d2).log2();
            if order < worst {
                worst = order;
                detail = format!("min order {order:.3} at q = {q} (errors {d1:.3e}, {d2:.3e})");
            }
        }
        if worst.is_infinite() {
            return Ok(Check {
                passed: true,
                value: 2.0,
                tolerance: 1.9,
                detail: "all loop functions flat; finite differences agree to round-off".into(),
                ..at_most("derivative_identity", 0.0, 0.0, "")
            });
        }
        Ok(Check { passed: worst >= 1.9, ..at_most("derivative_identity", worst, 1.9, detail) })
    }));
    out
}

fn is_reference_family(curve: &BoundaryCurve) -> bool {
    match curve.profile() {
        Profile::Ellipse { eccentricity, .. } => *eccentricity <= 0.1,
        Profile::Fourier(f) => f.is_zero() || curve.tau() == 0.0,
    }
}

fn spectrum_checks(curve: &BoundaryCurve, q_max: usize, settings: &Settings) -> Vec<Check> {
    let l = curve.perimeter();
    let bands: Vec<Result<SpectrumBand>> = (2..=q_max + 1).into_par_iter().map(|q| band(curve, q, settings)).collect();
    let bands: Result<Vec<SpectrumBand>> = bands.into_iter().collect();
    let bands = match bands {
        Ok(b) => b,
        Err(e) => return vec![failed("bands", e)],
    };
    let mut out = Vec::new();

    let sep = bands.windows(2).map(|w| w[1].lower - w[0].upper).fold(f64::INFINITY, f64::min);
    out.push(above("band_order", sep, 0.0, format!("min t_(q+1) − T_q over q = 2..={q_max}")));

    if settings.crosscheck_birkhoff {
        let dev = max_of(bands.iter().filter_map(|b| b.birkhoff_max.map(|m| (m - b.upper).abs())));
        out.push(at_most("birkhoff_crosscheck", dev, 1e-8, "max |Birkhoff (1, q) action − T_q|"));
    } else {
        out.push(skipped("birkhoff_crosscheck", "Birkhoff cross-check disabled in settings"));
    }

    let deficits: Vec<f64> = bands.iter().map(|b| l - b.upper).collect();
    let min_deficit = deficits.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_drop = deficits.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
    out.push(above(
        "perimeter_approach",
        min_deficit.min(min_drop),
        0.0,
        "ℓ − T_q positive and strictly decreasing (min of both margins)",
    ));

    if is_reference_family(curve) {
        let gaps: Vec<f64> = bands.windows(2).map(|w| w[1].upper - w[0].upper).collect();
        let drop = gaps.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
        out.push(above("gap_monotone", drop, 0.0, "min decrease of T_(q+1) − T_q"));
    } else {
        out.push(skipped("gap_monotone", "gap monotonicity is only asserted for the disk and ellipses with ε ≤ 0.1"));
    }
    out
}

/// M_q(0, s) on the disk: 2q sin(π/q) Σ_{q | k} (a_k cos ks + b_k sin ks).
fn disk_melnikov(cos: &[f64], sin: &[f64], q: usize, s: f64) -> f64 {
    let mut sum = 0.0;
    for k in (0..cos.len().max(sin.len())).step_by(q) {
        let a = cos.get(k).copied().unwrap_or(0.0);
        let b = sin.get(k).copied().unwrap_or(0.0);
        sum += a * (k as f64 * s).cos() + b * (k as f64 * s).sin();
    }
    2.0 * q as f64 * (PI / q as f64).sin() * sum
}

fn deform_checks(curve: &BoundaryCurve, q_max: usize, settings: &Settings) -> Vec<Check> {
    let f = match curve.profile() {
        Profile::Fourier(f) if !f.is_zero() => f.clone(),
        _ => {
            let why = "needs a nonzero Fourier profile";
            return vec![skipped("variation_identity", why), skipped("melnikov_resonance", why), skipped("melnikov_fd", why)];
        }
    };
    let mut out = Vec::new();
    out.push(run("variation_identity", || {
        let v = variations(curve)?;
        let worst = max_of(
            v.theta.iter().zip(v.normal.iter().zip(&v.tangential)).map(|(&t, (&n, &tt))| (n * n + tt * tt - f.value(t).powi(2)).abs()),
        );
        Ok(at_most("variation_identity", worst, 1e-12, "max |n² + t² − f²| on the grid"))
    }));
    out.push(run("melnikov_resonance", || {
        let disk = BoundaryCurve::new(Profile::Fourier(f.clone()), 0.0, settings.grid_size)?;
        let s = s_grid(&disk, 64);
        let mut worst = 0.0f64;
        let mut scale = 1.0f64;
        for q in 2..=q_max {
            let m = melnikov(&disk, q, &s, settings)?;
            for (si, mi) in s.iter().zip(&m.values) {
                let exact = disk_melnikov(f.cos_coeffs(), f.sin_coeffs(), q, *si);
                scale = scale.max(exact.abs());
                worst = worst.max((mi - exact).abs());
            }
        }
        Ok(at_most("melnikov_resonance", worst / scale, 1e-9, "max |M_q(0, s) − 2q sin(π/q) Σ_{q|k} f̂_k(s)|, scaled"))
    }));
    let tau = curve.tau();
    if tau <= 0.0 || tau + 1e-2 > 1.0 {
        out.push(skipped("melnikov_fd", "τ ± h leaves [0, 1]"));
    } else {
        out.push(run("melnikov_fd", || {
            let order_h = (1e-2f64).min(0.5 * tau);
            let h = (1e-4f64).min(0.5 * tau);
            let c = melnikov_vs_fd(&f, tau, 3, h, order_h, 32, settings)?;
            let detail = format!("deviation {:.3e} at h = {h:e}, order {:.3}", c.deviation, c.order);
            // the deviation at h itself depends on the size of ∂τ³L_q, so only the order is asserted
            if c.order_deviations.0 <= 1e-12 {
                return Ok(Check { passed: true, ..at_most("melnikov_fd", c.deviation, 1e-12, detail) });
            }
            Ok(Check { passed: c.order >= 1.9, ..at_most("melnikov_fd", c.order, 1.9, detail) })
        }));
    }
    out
}

fn osc_checks(settings: &Settings) -> Vec<Check> {
    let cos = || PeriodicFunction::from_fn(TAU, f64::cos);
    let one = || PeriodicFunction::constant(TAU, 1.0);
    let mut out = Vec::new();
    out.push(run("parseval", || {
        let zero = PeriodicFunction::constant(TAU, 0.0);
        let amp = PeriodicFunction::from_fn(TAU, |s| 1.0 + 0.5 * s.cos());
        let vals = oscillatory_integral(&zero, &amp, &[1.0, 10.0, 100.0, 1000.0], settings)?;
        let worst = max_of(vals.iter().map(|v| (v - TAU).norm() / TAU));
        Ok(at_most("parseval", worst, 1e-12, "φ ≡ 0: relative spread of I(λ) around ∮a"))
    }));
    out.push(run("stationary_phase", || {
        let fit = decay_exponent(&cos(), &one(), 16.0, 4096.0, settings)?;
        let m = fit.exponent.unwrap_or(f64::NAN);
        Ok(Check {
            passed: (-0.55..=-0.45).contains(&m),
            ..at_most("stationary_phase", (m + 0.5).abs(), 0.05, format!("φ = cos s: fitted exponent {m:.4}"))
        })
    }));
    out.push(run("sublevel_coarea", || {
        let phase = PeriodicFunction::from_fn(TAU, |s| s.cos() + 0.2 * (2.0 * s).cos());
        let amp = PeriodicFunction::from_fn(TAU, |s| 1.0 + 0.3 * s.sin());
        let (t, h) = (0.3, 1e-4);
        let g = sublevel_distribution(&phase, &amp, &[t - h, t + h], settings)?;
        let fd = (g[1] - g[0]) / (2.0 * h);
        let density = coarea_density(&phase, &amp, t, 4096)?;
        Ok(at_most("sublevel_coarea", (fd / density - 1.0).abs(), 1e-2, "dg₀/dt against the co-area integral at t = 0.3"))
    }));
    out.push(run("ibp_identity", || {
        let c = ibp_identity(&cos(), &one(), 10.0, 1 << 14, settings)?;
        Ok(at_most("ibp_identity", c.relative_error, 1e-6, "iλĝ₀ − ĝ₁ against I(λ) at λ = 10"))
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyOptions {
        VerifyOptions { q_max: 4, twist_samples: 500, jacobian_samples: 40, seed: 1 }
    }

    #[test]
    fn disk_passes() {
        let curve = BoundaryCurve::disk(1024).unwrap();
        let r = verify(&curve, &quick(), &Settings::default()).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(r.checks.iter().any(|c| c.name == "melnikov_fd" && c.skipped));
    }

    #[test]
    fn perturbed_curve_passes() {
        let f = crate::FourierProfile::new(vec![0.0, 0.0, 0.1, 0.2], vec![0.0, 0.05]).unwrap();
        let curve = BoundaryCurve::new(f.into(), 0.05, 1024).unwrap();
        let r = verify(&curve, &quick(), &Settings::default()).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(r.checks.iter().filter(|c| c.skipped).all(|c| c.name == "gap_monotone" || c.name == "angle_bound"));
    }

    #[test]
    fn disk_melnikov_selects_multiples() {
        let cos = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.5];
        let s = 0.7;
        let c3 = 6.0 * (PI / 3.0).sin();
        assert!((disk_melnikov(&cos, &[], 3, s) - c3 * ((3.0 * s).cos() + 0.5 * (6.0 * s).cos())).abs() < 1e-15);
        assert_eq!(disk_melnikov(&cos, &[], 4, s), 0.0);
    }

    #[test]
    fn rejects_small_q_range() {
        let curve = BoundaryCurve::disk(256).unwrap();
        let o = VerifyOptions { q_max: 2, ..quick() };
        assert!(verify(&curve, &o, &Settings::default()).is_err());
    }
}
