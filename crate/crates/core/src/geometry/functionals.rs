//! Curvature integrals and circularity norms.

use super::curve::BoundaryCurve;
use crate::error::{invalid, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Highest derivative order accepted by [`circularity`] and custom functionals.
pub const MAX_DERIVATIVE_ORDER: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureFunctionals {
    /// ∮ κ² ds
    pub kappa_sq: f64,
    /// ∮ κ′² ds
    pub dkappa_sq: f64,
    /// ∮ κ⁴ ds
    pub kappa_4: f64,
    /// ∮ κ^{2/3} ds
    pub kappa_two_thirds: f64,
    /// ∮ κ ds, which is 2π for a simple closed convex curve.
    pub total_curvature: f64,
    /// ∮ Π_m (κ^{(m)})^{α_m} ds for the requested multi-index.
    pub custom: Option<f64>,
}

/// Computes the standard curvature integrals and, if `alpha` is given, ∮ Π_m (κ^{(m)})^{α_m} ds
/// where `alpha[m]` is the exponent of the m-th arc-length derivative of κ.
pub fn curvature_functionals(curve: &BoundaryCurve, alpha: Option<&[f64]>) -> Result<CurvatureFunctionals> {
    // θ-trapezoid: spectrally accurate for the periodic integrands
    let jets = curve.theta_grid_jets();
    let n = curve.grid_size();
    let w = TAU / n as f64;
    let mut sums = [0.0; 5];
    for j in &jets[..n] {
        let k = j.kappa;
        let ds = w * j.speed;
        sums[0] += k * k * ds;
        sums[1] += j.dkappa * j.dkappa * ds;
        sums[2] += k.powi(4) * ds;
        sums[3] += k.abs().cbrt().powi(2) * k.signum() * ds;
        sums[4] += k * ds;
    }
    let custom = match alpha {
        None => None,
        Some(a) => Some(custom_functional(curve, a)?),
    };
    Ok(CurvatureFunctionals {
        kappa_sq: sums[0],
        dkappa_sq: sums[1],
        kappa_4: sums[2],
        kappa_two_thirds: sums[3],
        total_curvature: sums[4],
        custom,
    })
}

fn custom_functional(curve: &BoundaryCurve, alpha: &[f64]) -> Result<f64> {
    if alpha.len() > MAX_DERIVATIVE_ORDER + 1 {
        return Err(invalid(format!("multi-index longer than {}", MAX_DERIVATIVE_ORDER + 1)));
    }
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(invalid("multi-index exponents must be finite"));
    }
    let order = alpha.iter().rposition(|&a| a != 0.0).unwrap_or(0);
    let derivs = curvature_derivatives(curve, order);
    let n = curve.grid_size();
    let h = curve.perimeter() / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let mut term = 1.0;
        for (m, &a) in alpha.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let v = derivs[m][i];
            term *= if a.fract() == 0.0 && a.abs() < 64.0 { v.powi(a as i32) } else { v.powf(a) };
        }
        acc += term * h;
    }
    Ok(acc)
}

/// κ and its arc-length derivatives up to `max_order` at the equispaced arc-length nodes.
///
/// Orders 0 and 1 come straight from the profile; higher orders are spectral derivatives of
/// the sampled curvature.
pub fn curvature_derivatives(curve: &BoundaryCurve, max_order: usize) -> Vec<Vec<f64>> {
    let jets: Vec<_> = curve.theta_nodes().iter().map(|&t| curve.jet(t)).collect();
    let kappa: Vec<f64> = jets.iter().map(|j| j.kappa).collect();
    let mut out = vec![kappa.clone()];
    if max_order >= 1 {
        out.push(jets.iter().map(|j| j.dkappa).collect());
    }
    if max_order >= 2 {
        let n = kappa.len();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut spec: Vec<Complex64> = kappa.iter().map(|&k| Complex64::new(k, 0.0)).collect();
        fwd.process(&mut spec);
        let floor = 1e-13 * spec[0].norm().max(1e-300);
        for c in spec.iter_mut() {
            if c.norm() < floor {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        let base = TAU / curve.perimeter();
        for m in 2..=max_order {
            let mut buf: Vec<Complex64> = spec
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                    // the Nyquist mode has no well-defined odd derivative
                    if k == n / 2 && m % 2 == 1 {
                        return Complex64::new(0.0, 0.0);
                    }
                    c * Complex64::new(0.0, kk * base).powi(m as i32)
                })
                .collect();
            inv.process(&mut buf);
            out.push(buf.iter().map(|c| c.re / n as f64).collect());
        }
    }
    out
}

/// sup_s |κ^{(n)} − [n = 0]| for n = 0..=max_order, plus the convexity flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularityReport {
    pub sup_norms: Vec<f64>,
    pub convex: bool,
    pub min_curvature: f64,
}

impl CircularityReport {
    /// ‖κ − 1‖_{C^n}: the largest entry up to order n.
    pub fn c_norm(&self, n: usize) -> f64 {
        self.sup_norms.iter().take(n + 1).cloned().fold(0.0, f64::max)
    }
}

pub fn circularity(curve: &BoundaryCurve, max_order: usize) -> Result<CircularityReport> {
    if max_order > MAX_DERIVATIVE_ORDER {
        return Err(invalid(format!(
            "circularity order {max_order} exceeds the supported maximum {MAX_DERIVATIVE_ORDER}"
        )));
    }
    let derivs = curvature_derivatives(curve, max_order);
    let mut sup_norms: Vec<f64> = derivs
        .iter()
        .enumerate()
        .map(|(m, v)| {
            let shift = if m == 0 { 1.0 } else { 0.0 };
            v.iter().map(|x| (x - shift).abs()).fold(0.0, f64::max)
        })
        .collect();
    // the dense construction scan sees more of κ than the node grid
    sup_norms[0] = sup_norms[0].max(curve.max_curvature_deviation());
    Ok(CircularityReport {
        sup_norms,
        convex: curve.is_convex(),
        min_curvature: curve.min_curvature(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FourierProfile;
    use crate::quad;
    use std::f64::consts::PI;

    #[test]
    fn disk_functionals() {
        let c = BoundaryCurve::disk(1024).unwrap();
        let f = curvature_functionals(&c, Some(&[2.0])).unwrap();
        for v in [f.kappa_sq, f.kappa_4, f.kappa_two_thirds, f.total_curvature, f.custom.unwrap()] {
            assert!((v - TAU).abs() < 1e-12, "{v}");
        }
        assert_eq!(f.dkappa_sq, 0.0);
        let r = circularity(&c, 4).unwrap();
        assert!(r.sup_norms.iter().all(|&x| x == 0.0));
        assert!(r.convex);
    }

    #[test]
    fn ellipse_functionals_match_parametric_oracle() {
        // semi-axes a = 1, b = 0.8, parametric angle t: κ = ab/(a²sin²t + b²cos²t)^{3/2},
        // ds = (a²sin²t + b²cos²t)^{1/2} dt
        let (a, b) = (1.0f64, 0.8f64);
        let c = BoundaryCurve::ellipse(0.6, 1024).unwrap();
        let f = curvature_functionals(&c, None).unwrap();
        let w = |t: f64| a * a * t.sin().powi(2) + b * b * t.cos().powi(2);
        let kappa = |t: f64| a * b / w(t).powf(1.5);
        let oracle = |g: &dyn Fn(f64) -> f64| {
            quad::composite(quad::gl16(), 0.0, TAU, 64, |t| g(kappa(t)) * w(t).sqrt())
        };
        let k2 = oracle(&|k| k * k);
        let k4 = oracle(&|k| k.powi(4));
        let k23 = oracle(&|k| k.powf(2.0 / 3.0));
        assert!((f.kappa_sq - k2).abs() < 1e-10 * k2);
        assert!((f.kappa_4 - k4).abs() < 1e-10 * k4);
        assert!((f.kappa_two_thirds - k23).abs() < 1e-10 * k23);
        assert!((f.total_curvature - TAU).abs() < 1e-10);
        // κ′ = dκ/dt / (ds/dt), dκ/dt = −3ab (a² − b²) sin t cos t / w^{5/2}
        let dk2 = quad::composite(quad::gl16(), 0.0, TAU, 64, |t| {
            let dk = -3.0 * a * b * (a * a - b * b) * t.sin() * t.cos() / w(t).powf(2.5);
            dk * dk / w(t).sqrt()
        });
        assert!((f.dkappa_sq - dk2).abs() < 1e-10 * dk2);
    }

    #[test]
    fn cos2_dkappa_integral_is_second_order() {
        let tau = 0.01;
        let c = BoundaryCurve::new(FourierProfile::cosine(2, 1.0).into(), tau, 1024).unwrap();
        let f = curvature_functionals(&c, None).unwrap();
        let first_order = tau * tau * 36.0 * PI;
        assert!(f.dkappa_sq > 0.0);
        assert!((f.dkappa_sq - first_order).abs() < 0.05 * first_order);
    }

    #[test]
    fn cos3_circularity() {
        let c = BoundaryCurve::new(FourierProfile::cosine(3, 1.0).into(), 0.01, 1024).unwrap();
        let r = circularity(&c, 3).unwrap();
        assert!((r.sup_norms[0] - 0.08).abs() < 0.01);
        assert!(r.convex);
        let c = BoundaryCurve::new(FourierProfile::cosine(3, 1.0).into(), 0.2, 1024).unwrap();
        assert!(!circularity(&c, 2).unwrap().convex);
    }

    #[test]
    fn spectral_derivatives_match_analytic_first_derivative() {
        let f = FourierProfile::new(vec![0.0, 0.0, 0.02, 0.01], vec![0.0, 0.0, 0.0, 0.015]).unwrap();
        let c = BoundaryCurve::new(f.into(), 1.0, 1024).unwrap();
        let d = curvature_derivatives(&c, 3);
        // differentiate κ′ numerically on the node grid and compare with the spectral κ″
        let n = c.grid_size();
        let h = c.perimeter() / n as f64;
        for i in (0..n).step_by(37) {
            let ip = (i + 1) % n;
            let im = (i + n - 1) % n;
            let fd = (d[1][ip] - d[1][im]) / (2.0 * h);
            assert!((fd - d[2][i]).abs() < 1e-3 * (1.0 + d[2][i].abs()));
        }
    }

    #[test]
    fn rejects_excessive_order() {
        let c = BoundaryCurve::disk(256).unwrap();
        assert!(circularity(&c, 13).is_err());
    }
}
