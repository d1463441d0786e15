//! First variations of the linear deformation r = 1 + τ f and the q-Melnikov function.

use crate::error::{invalid, Error, Result};
use crate::geometry::{BoundaryCurve, FourierProfile, PolarJet, Profile};
use crate::loops::{loop_point, shoot};
use crate::quad;
use crate::settings::Settings;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::Write;

/// Normal and tangential velocity of the boundary under τ ↦ τ + dτ, at fixed θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationField {
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    /// n = r f / √(r² + r′²)
    pub normal: Vec<f64>,
    /// t = r′ f / √(r² + r′²)
    pub tangential: Vec<f64>,
}

fn fourier(curve: &BoundaryCurve) -> Result<&FourierProfile> {
    match curve.profile() {
        Profile::Fourier(f) => Ok(f),
        Profile::Ellipse { .. } => Err(Error::UnsupportedProfile),
    }
}

fn normal_tangential(f: &FourierProfile, jet: &PolarJet) -> (f64, f64) {
    let v = f.value(jet.theta);
    (jet.r[0] * v / jet.speed, jet.r[1] * v / jet.speed)
}

/// Variations at the curve's equispaced arc-length nodes.
pub fn variations(curve: &BoundaryCurve) -> Result<VariationField> {
    let f = fourier(curve)?;
    let theta = curve.theta_nodes().to_vec();
    let (normal, tangential) = theta.iter().map(|&t| normal_tangential(f, &curve.jet(t))).unzip();
    Ok(VariationField { s: curve.s_nodes(), theta, normal, tangential })
}

/// ∂_τ s(τ, θ) for θ in [0, 2π]: how the arc length of a fixed polar angle moves with τ.
fn arc_velocity(f: &FourierProfile, tau: f64, theta: f64) -> f64 {
    if theta <= 0.0 {
        return 0.0;
    }
    let panels = ((theta / TAU) * 64.0).ceil().max(1.0) as usize;
    quad::composite(quad::gl16(), 0.0, theta, panels, |t| {
        let [v, dv, _, _] = f.derivs(t);
        let r = 1.0 + tau * v;
        let dr = tau * dv;
        (r * v + dr * dv) / (r * r + dr * dr).sqrt()
    })
}

/// M_q on an s-grid with the split into endpoint and interior contributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelnikovProfile {
    pub q: usize,
    pub tau: f64,
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    /// n(s)(sin θ̃ + sin φ) + t(s)(cos θ̃ − cos φ), with t the fixed-arc-length tangential velocity.
    pub endpoint: Vec<f64>,
    /// 2 Σ_{j=1}^{q−1} n(s_j) sin ϑ_j.
    pub interior: Vec<f64>,
    /// Nodes where |φ_q − θ̃_q| ≤ 1e-10 and the periodic-orbit form was used.
    pub periodic: Vec<bool>,
}

impl MelnikovProfile {
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Columns s, M_q.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let rows = self.s.iter().zip(&self.values).map(|(&s, &m)| vec![s, m]);
        crate::export::write_csv(out, &["s", "M_q"], rows)
    }
}

const PERIODIC_ANGLE_TOL: f64 = 1e-10;

/// The q-Melnikov function ∂_τ L_q(τ, s) at the given footpoints.
///
/// L_q is compared at a fixed arc length s, so the tangential velocity entering the endpoint term
/// is t − ∂_τ s(τ, θ(s)) rather than the fixed-θ value t.
pub fn melnikov(curve: &BoundaryCurve, q: usize, s: &[f64], settings: &Settings) -> Result<MelnikovProfile> {
    let f = fourier(curve)?;
    let l = curve.perimeter();
    let tau = curve.tau();
    let rows: Vec<(f64, f64, f64, bool)> = s
        .par_iter()
        .map(|&s0| -> Result<_> {
            let path = shoot(curve, q, s0, s0 + l, None, true, settings)?;
            let b = &path.bounces;
            let (phi, ret) = (path.phi, path.phi_end);
            let (n0, t0) = normal_tangential(f, &b[0].jet);
            let theta0 = b[0].jet.theta.rem_euclid(TAU);
            let t_fixed_s = t0 - arc_velocity(f, tau, theta0);
            let interior: f64 =
                2.0 * b[1..q].iter().map(|bj| normal_tangential(f, &bj.jet).0 * bj.phi.sin()).sum::<f64>();
            let periodic = (phi - ret).abs() <= PERIODIC_ANGLE_TOL;
            let endpoint = if periodic {
                2.0 * n0 * phi.sin()
            } else {
                n0 * (ret.sin() + phi.sin()) + t_fixed_s * (ret.cos() - phi.cos())
            };
            Ok((endpoint + interior, endpoint, interior, periodic))
        })
        .collect::<Result<_>>()?;
    Ok(MelnikovProfile {
        q,
        tau,
        s: s.to_vec(),
        values: rows.iter().map(|r| r.0).collect(),
        endpoint: rows.iter().map(|r| r.1).collect(),
        interior: rows.iter().map(|r| r.2).collect(),
        periodic: rows.iter().map(|r| r.3).collect(),
    })
}

/// Equispaced footpoints on [0, ℓ).
pub fn s_grid(curve: &BoundaryCurve, nodes: usize) -> Vec<f64> {
    (0..nodes).map(|i| curve.perimeter() * i as f64 / nodes as f64).collect()
}

/// Central-difference check of M_q = ∂_τ L_q.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdCheck {
    pub h: f64,
    /// sup_s |(L_q(τ+h, s) − L_q(τ−h, s))/(2h) − M_q(τ, s)|
    pub deviation: f64,
    /// Step sizes of the two-level order estimate.
    pub order_steps: (f64, f64),
    pub order_deviations: (f64, f64),
    /// log₂ of the deviation ratio between the two levels.
    pub order: f64,
}

fn fd_deviation(
    profile: &FourierProfile,
    tau: f64,
    q: usize,
    h: f64,
    s: &[f64],
    m: &[f64],
    settings: &Settings,
) -> Result<f64> {
    let plus = BoundaryCurve::new(profile.clone().into(), tau + h, settings.grid_size)?;
    let minus = BoundaryCurve::new(profile.clone().into(), tau - h, settings.grid_size)?;
    let devs: Vec<f64> = s
        .par_iter()
        .zip(m)
        .map(|(&si, &mi)| -> Result<f64> {
            let lp = loop_point(&plus, q, si, None, settings)?.length;
            let lm = loop_point(&minus, q, si, None, settings)?.length;
            Ok(((lp - lm) / (2.0 * h) - mi).abs())
        })
        .collect::<Result<_>>()?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

/// Compares M_q with central differences of L_q at step h over `nodes` footpoints.
///
/// The convergence order is measured between steps `order_h` and `order_h / 2`, which should be
/// large enough that the shooting round-off (about 1e-13/h) stays well below the O(h²) error.
pub fn melnikov_vs_fd(
    profile: &FourierProfile,
    tau: f64,
    q: usize,
    h: f64,
    order_h: f64,
    nodes: usize,
    settings: &Settings,
) -> Result<FdCheck> {
    for step in [h, order_h] {
        if !(step > 0.0) || tau - step < 0.0 || tau + step > 1.0 {
            return Err(invalid(format!("τ ± h must stay in [0, 1] (τ = {tau}, h = {step})")));
        }
    }
    let curve = BoundaryCurve::new(profile.clone().into(), tau, settings.grid_size)?;
    let s = s_grid(&curve, nodes);
    let m = melnikov(&curve, q, &s, settings)?.values;
    let deviation = fd_deviation(profile, tau, q, h, &s, &m, settings)?;
    let d1 = fd_deviation(profile, tau, q, order_h, &s, &m, settings)?;
    let d2 = fd_deviation(profile, tau, q, 0.5 * order_h, &s, &m, settings)?;
    Ok(FdCheck {
        h,
        deviation,
        order_steps: (order_h, 0.5 * order_h),
        order_deviations: (d1, d2),
        order: (d1 / d2).log2(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn variations_at_zero_and_identity() {
        let f = FourierProfile::cosine(2, 1.0);
        let c = BoundaryCurve::new(f.clone().into(), 0.0, 256).unwrap();
        let v = variations(&c).unwrap();
        for i in 0..v.s.len() {
            assert!((v.normal[i] - (2.0 * v.s[i]).cos()).abs() < 1e-14);
            assert_eq!(v.tangential[i], 0.0);
        }
        let c = BoundaryCurve::new(f.clone().into(), 0.5, 256).unwrap();
        let (n, t) = normal_tangential(&f, &c.jet(0.0));
        assert!((n - 1.0).abs() < 1e-15 && t.abs() < 1e-15);
        let v = variations(&c).unwrap();
        for i in 0..v.s.len() {
            let fv = f.value(v.theta[i]);
            assert!((v.normal[i].powi(2) + v.tangential[i].powi(2) - fv * fv).abs() < 1e-12);
        }
        let e = BoundaryCurve::ellipse(0.1, 256).unwrap();
        assert_eq!(variations(&e), Err(Error::UnsupportedProfile));
    }

    #[test]
    fn arc_velocity_matches_perimeter_difference() {
        let f = FourierProfile::new(vec![0.0, 0.0, 0.3], vec![0.0, 0.0, 0.0, 0.2]).unwrap();
        let tau = 0.05;
        let h = 1e-5;
        let lp = BoundaryCurve::new(f.clone().into(), tau + h, 1024).unwrap().perimeter();
        let lm = BoundaryCurve::new(f.clone().into(), tau - h, 1024).unwrap().perimeter();
        assert!(((lp - lm) / (2.0 * h) - arc_velocity(&f, tau, TAU)).abs() < 1e-8);
    }

    #[test]
    fn resonance_selection_on_the_disk() {
        let s = Settings::default();
        for (k, q) in [(2, 3), (5, 3), (3, 2), (4, 3), (7, 4)] {
            let c = BoundaryCurve::new(FourierProfile::cosine(k, 1.0).into(), 0.0, 1024).unwrap();
            let m = melnikov(&c, q, &s_grid(&c, 32), &s).unwrap();
            assert!(m.sup_norm() < 1e-12, "k = {k}, q = {q}: {}", m.sup_norm());
        }
        for q in [3, 4] {
            let c = BoundaryCurve::new(FourierProfile::cosine(q, 1.0).into(), 0.0, 1024).unwrap();
            let grid = s_grid(&c, 32);
            let m = melnikov(&c, q, &grid, &s).unwrap();
            let amp = 2.0 * q as f64 * (PI / q as f64).sin();
            for (si, mi) in grid.iter().zip(&m.values) {
                assert!((mi - amp * (q as f64 * si).cos()).abs() < 1e-12 * amp);
            }
            assert!(m.periodic.iter().all(|&p| p));
        }
    }

    #[test]
    fn melnikov_matches_central_differences() {
        // ∂³_τ L₃ grows like the cube of the curvature variation, so keep it moderate here
        let f = FourierProfile::cosine(3, 0.2);
        let chk = melnikov_vs_fd(&f, 0.02, 3, 1e-4, 1e-2, 32, &Settings::default()).unwrap();
        assert!(chk.deviation < 1e-6, "{chk:?}");
        assert!(chk.order > 1.9, "{chk:?}");
    }

    #[test]
    fn zero_deformation_has_zero_deviation() {
        let f = FourierProfile::zero();
        let chk = melnikov_vs_fd(&f, 0.5, 4, 1e-4, 1e-2, 16, &Settings::default()).unwrap();
        assert!(chk.deviation == 0.0);
    }
}
