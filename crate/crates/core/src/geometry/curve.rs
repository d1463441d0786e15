//! The boundary curve and its arc-length, curvature and Lazutkin tables.

use super::profile::{Profile, Radius};
use crate::error::{invalid, Error, Result};
use crate::quad;
use std::f64::consts::{FRAC_PI_2, TAU};

/// Local differential geometry at a polar angle θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarJet {
    pub theta: f64,
    /// r, r′, r″, r‴ with respect to θ.
    pub r: [f64; 4],
    /// ds/dθ = √(r² + r′²).
    pub speed: f64,
    pub kappa: f64,
    /// dκ/ds.
    pub dkappa: f64,
}

impl PolarJet {
    pub(crate) fn new(theta: f64, r: [f64; 4]) -> Self {
        let [r0, r1, r2, r3] = r;
        let d = r0 * r0 + r1 * r1;
        let n = r0 * r0 + 2.0 * r1 * r1 - r0 * r2;
        let dn = 2.0 * r0 * r1 + 3.0 * r1 * r2 - r0 * r3;
        let dd = 2.0 * r0 * r1 + 2.0 * r1 * r2;
        let speed = d.sqrt();
        let d32 = d * speed;
        let kappa = n / d32;
        let dkappa_dtheta = dn / d32 - 1.5 * n * dd / (d32 * d);
        PolarJet { theta, r, speed, kappa, dkappa: dkappa_dtheta / speed }
    }

    pub fn point(&self) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        [self.r[0] * c, self.r[0] * s]
    }

    /// Unit tangent in the direction of increasing θ.
    pub fn tangent(&self) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        let (r0, r1) = (self.r[0], self.r[1]);
        [(r1 * c - r0 * s) / self.speed, (r1 * s + r0 * c) / self.speed]
    }

    /// Unit outward normal.
    pub fn normal(&self) -> [f64; 2] {
        let t = self.tangent();
        [t[1], -t[0]]
    }

    /// Angle of the tangent with the x-axis, continuous in θ.
    pub fn tangent_angle(&self) -> f64 {
        self.theta + FRAC_PI_2 - (self.r[1] / self.r[0]).atan()
    }

    /// Angle between the radius vector and the tangent, minus π/2 (zero on the circle).
    pub fn radial_tilt(&self) -> f64 {
        (self.r[1] / self.r[0]).atan()
    }
}

/// Boundary data at an arc-length parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub s: f64,
    pub theta: f64,
    pub point: [f64; 2],
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
    pub kappa: f64,
    pub dkappa: f64,
}

/// A smooth star-shaped boundary r(θ) with cached tables.
///
/// Arc length is measured counter-clockwise from the point at θ = 0. All lookups accept
/// unreduced arguments and work on the lift: θ(s + ℓ) = θ(s) + 2π.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    profile: Profile,
    tau: f64,
    grid_size: usize,
    radius: Radius,
    perimeter: f64,
    /// S(θ_i) at θ_i = 2πi/N, i = 0..=N.
    arc: Vec<f64>,
    jets: Vec<PolarJet>,
    /// ∫₀^{θ_i} κ^{2/3} ds; empty when the curve is not convex.
    laz: Vec<f64>,
    laz_density: Vec<f64>,
    min_curvature: f64,
    max_curvature: f64,
    /// θ at the equispaced arc-length nodes s_i = iℓ/N.
    theta_at_nodes: Vec<f64>,
}

impl BoundaryCurve {
    /// Builds the boundary of r(θ) = 1 + τ f(θ) (or the exact ellipse) with `grid_size` table nodes.
    pub fn new(profile: Profile, tau: f64, grid_size: usize) -> Result<Self> {
        if grid_size < 256 || !grid_size.is_power_of_two() {
            return Err(invalid(format!("grid size must be a power of two >= 256, got {grid_size}")));
        }
        if !tau.is_finite() || !(0.0..=1.0).contains(&tau) {
            return Err(invalid(format!("tau must lie in [0, 1], got {tau}")));
        }
        let radius = Radius::new(&profile, tau);

        // dense scan for positivity and convexity
        let scan = 4 * grid_size;
        let mut min_r = (f64::INFINITY, 0.0);
        let mut min_k = f64::INFINITY;
        let mut max_k = f64::NEG_INFINITY;
        for i in 0..scan {
            let th = TAU * i as f64 / scan as f64;
            let r = radius.derivs(th);
            if r[0] < min_r.0 {
                min_r = (r[0], th);
            }
            if r[0] > 0.0 {
                let k = PolarJet::new(th, r).kappa;
                min_k = min_k.min(k);
                max_k = max_k.max(k);
            }
        }
        if min_r.0 <= 0.0 || !min_r.0.is_finite() {
            return Err(Error::NonStarShaped { min_radius: min_r.0, theta: min_r.1 });
        }
        if min_k <= 0.0 {
            log::warn!("{}", Error::NonConvex { min_curvature: min_k });
        }

        let n = grid_size;
        let h = TAU / n as f64;
        let jets: Vec<PolarJet> = (0..=n)
            .map(|i| {
                let th = h * i as f64;
                PolarJet::new(th, radius.derivs(th))
            })
            .collect();
        let arc = cumulative(n, h, |t| speed(&radius, t));
        let perimeter = arc[n];

        let convex = min_k > 0.0;
        let (laz, laz_density) = if convex {
            let laz = cumulative(n, h, |t| lazutkin_density(&radius, t));
            let dens = jets.iter().map(|j| j.kappa.cbrt().powi(2) * j.speed).collect();
            (laz, dens)
        } else {
            (Vec::new(), Vec::new())
        };

        let mut curve = BoundaryCurve {
            profile,
            tau,
            grid_size,
            radius,
            perimeter,
            arc,
            jets,
            laz,
            laz_density,
            min_curvature: min_k,
            max_curvature: max_k,
            theta_at_nodes: Vec::new(),
        };
        curve.theta_at_nodes =
            (0..n).map(|i| curve.theta_of_s(curve.perimeter * i as f64 / n as f64)).collect();
        Ok(curve)
    }

    /// The unit disk.
    pub fn disk(grid_size: usize) -> Result<Self> {
        Self::new(Profile::Fourier(super::FourierProfile::zero()), 0.0, grid_size)
    }

    /// The ellipse with semi-axes 1 and √(1 − ε²).
    pub fn ellipse(eccentricity: f64, grid_size: usize) -> Result<Self> {
        Self::new(Profile::ellipse(eccentricity)?, 1.0, grid_size)
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn is_convex(&self) -> bool {
        self.min_curvature > 0.0
    }

    pub fn min_curvature(&self) -> f64 {
        self.min_curvature
    }

    pub fn max_curvature(&self) -> f64 {
        self.max_curvature
    }

    pub(crate) fn radius(&self) -> &Radius {
        &self.radius
    }

    /// Equispaced arc-length nodes s_i = iℓ/N, i < N.
    pub fn s_nodes(&self) -> Vec<f64> {
        let n = self.grid_size;
        (0..n).map(|i| self.perimeter * i as f64 / n as f64).collect()
    }

    /// θ at the equispaced arc-length nodes.
    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta_at_nodes
    }

    /// Geometry at the equispaced θ nodes θ_i = 2πi/N (i = 0..=N).
    pub fn theta_grid_jets(&self) -> &[PolarJet] {
        &self.jets
    }

    /// Local geometry at polar angle θ, straight from the profile.
    #[inline]
    pub fn jet(&self, theta: f64) -> PolarJet {
        PolarJet::new(theta, self.radius.derivs(theta))
    }

    #[inline]
    pub(crate) fn speed_at(&self, theta: f64) -> f64 {
        speed(&self.radius, theta)
    }

    /// Arc length from θ = 0 to θ on the lift.
    pub fn s_of_theta(&self, theta: f64) -> f64 {
        let turns = (theta / TAU).floor();
        let mut red = theta - TAU * turns;
        let mut turns = turns;
        if red >= TAU {
            red -= TAU;
            turns += 1.0;
        }
        self.arc_reduced(red) + turns * self.perimeter
    }

    /// Arc length from θ₀ to θ₁ on the lift; short arcs are integrated directly.
    pub fn arc_between(&self, theta0: f64, theta1: f64) -> f64 {
        let cell = TAU / self.grid_size as f64;
        if (theta1 - theta0).abs() <= 2.0 * cell {
            quad::integrate_with(quad::gl16(), theta0, theta1, |t| self.speed_at(t))
        } else {
            self.s_of_theta(theta1) - self.s_of_theta(theta0)
        }
    }

    fn arc_reduced(&self, theta: f64) -> f64 {
        let h = TAU / self.grid_size as f64;
        let i = ((theta / h) as usize).min(self.grid_size - 1);
        let a = h * i as f64;
        if theta == a {
            return self.arc[i];
        }
        self.arc[i] + quad::integrate_with(quad::gl8(), a, theta, |t| self.speed_at(t))
    }

    /// θ(s) on the lift.
    pub fn theta_of_s(&self, s: f64) -> f64 {
        let l = self.perimeter;
        let mut turns = (s / l).floor();
        let mut red = s - turns * l;
        if red >= l {
            red -= l;
            turns += 1.0;
        }
        self.invert(&self.arc, red, |i| 1.0 / self.jets[i].speed, |t| self.arc_reduced(t), |t| {
            self.speed_at(t)
        }) + TAU * turns
    }

    /// Shared inverse of the monotone tables: monotone Hermite guess + Newton corrections.
    fn invert(
        &self,
        table: &[f64],
        target: f64,
        slope: impl Fn(usize) -> f64,
        forward: impl Fn(f64) -> f64,
        density: impl Fn(f64) -> f64,
    ) -> f64 {
        let n = self.grid_size;
        let h = TAU / n as f64;
        let i = match table.partition_point(|&v| v <= target) {
            0 => 0,
            k => (k - 1).min(n - 1),
        };
        let (y0, y1) = (table[i], table[i + 1]);
        let dy = y1 - y0;
        let secant = h / dy;
        let (mut m0, mut m1) = (slope(i), slope(i + 1));
        // Fritsch-Carlson limiter
        let (a, b) = (m0 / secant, m1 / secant);
        let norm = a * a + b * b;
        if norm > 9.0 {
            let scale = 3.0 / norm.sqrt();
            m0 = scale * a * secant;
            m1 = scale * b * secant;
        }
        let u = (target - y0) / dy;
        let (u2, u3) = (u * u, u * u * u);
        let mut theta = h * i as f64 * (2.0 * u3 - 3.0 * u2 + 1.0)
            + dy * m0 * (u3 - 2.0 * u2 + u)
            + h * (i + 1) as f64 * (-2.0 * u3 + 3.0 * u2)
            + dy * m1 * (u3 - u2);
        let lo = h * i as f64;
        let hi = h * (i + 1) as f64;
        for _ in 0..4 {
            let step = (forward(theta) - target) / density(theta);
            theta = (theta - step).clamp(lo, hi);
            if step.abs() <= 1e-16 * (1.0 + theta.abs()) {
                break;
            }
        }
        theta
    }

    /// Geometry at arc length s (any real; reduced on the lift).
    pub fn evaluate(&self, s: f64) -> Frame {
        let theta = self.theta_of_s(s);
        let j = self.jet(theta);
        Frame {
            s,
            theta,
            point: j.point(),
            tangent: j.tangent(),
            normal: j.normal(),
            kappa: j.kappa,
            dkappa: j.dkappa,
        }
    }

    /// Lazutkin coordinate ξ(s) on the lift, so ξ(s + ℓ) = ξ(s) + 1.
    pub fn lazutkin(&self, s: f64) -> Result<f64> {
        if !self.is_convex() {
            return Err(Error::NonConvex { min_curvature: self.min_curvature });
        }
        let theta = self.theta_of_s(s);
        Ok(self.lazutkin_of_theta(theta))
    }

    pub(crate) fn lazutkin_of_theta(&self, theta: f64) -> f64 {
        let turns = (theta / TAU).floor();
        let red = theta - TAU * turns;
        let total = self.laz[self.grid_size];
        (self.laz_reduced(red) / total + turns).max(turns)
    }

    fn laz_reduced(&self, theta: f64) -> f64 {
        let h = TAU / self.grid_size as f64;
        let i = ((theta / h) as usize).min(self.grid_size - 1);
        let a = h * i as f64;
        if theta == a {
            return self.laz[i];
        }
        self.laz[i] + quad::integrate_with(quad::gl8(), a, theta, |t| lazutkin_density(&self.radius, t))
    }

    /// θ at Lazutkin coordinate ξ (on the lift).
    pub fn theta_of_lazutkin(&self, xi: f64) -> Result<f64> {
        if !self.is_convex() {
            return Err(Error::NonConvex { min_curvature: self.min_curvature });
        }
        let turns = xi.floor();
        let red = (xi - turns) * self.laz[self.grid_size];
        let theta = self.invert(
            &self.laz,
            red,
            |i| 1.0 / self.laz_density[i],
            |t| self.laz_reduced(t),
            |t| lazutkin_density(&self.radius, t),
        );
        Ok(theta + TAU * turns)
    }

    /// Arc length at Lazutkin coordinate ξ (on the lift).
    pub fn s_of_lazutkin(&self, xi: f64) -> Result<f64> {
        Ok(self.s_of_theta(self.theta_of_lazutkin(xi)?))
    }

    /// ∮ κ^{2/3} ds, the normalizing constant of the Lazutkin coordinate.
    pub fn lazutkin_perimeter(&self) -> Result<f64> {
        if !self.is_convex() {
            return Err(Error::NonConvex { min_curvature: self.min_curvature });
        }
        Ok(self.laz[self.grid_size])
    }

    /// Largest |κ − 1| over the dense construction scan.
    pub fn max_curvature_deviation(&self) -> f64 {
        (self.max_curvature - 1.0).abs().max((self.min_curvature - 1.0).abs())
    }
}

/// Running integral over `n` cells of width `h`, with compensated summation.
fn cumulative(n: usize, h: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for i in 0..n {
        let v = quad::integrate_with(quad::gl8(), h * i as f64, h * (i + 1) as f64, &f);
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
        out.push(sum + comp);
    }
    out
}

#[inline]
fn speed(radius: &Radius, theta: f64) -> f64 {
    let r = radius.derivs(theta);
    r[0].hypot(r[1])
}

#[inline]
fn lazutkin_density(radius: &Radius, theta: f64) -> f64 {
    let j = PolarJet::new(theta, radius.derivs(theta));
    j.kappa.cbrt().powi(2) * j.speed
}

/// Reduce an angle to [0, 2π).
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FourierProfile;

    #[test]
    fn disk_tables_are_exact() {
        let c = BoundaryCurve::disk(1024).unwrap();
        assert!((c.perimeter() - TAU).abs() < 1e-13);
        for &s in &[0.0, 0.4, 3.0, 6.0, -1.3, 13.0] {
            assert!((c.theta_of_s(s) - s).abs() < 1e-13);
            assert!((c.lazutkin(s).unwrap() - s / TAU).abs() < 1e-13);
        }
        let f = c.evaluate(FRAC_PI_2);
        assert!(f.point[0].abs() < 1e-14 && (f.point[1] - 1.0).abs() < 1e-14);
        assert_eq!(f.kappa, 1.0);
    }

    #[test]
    fn rejects_bad_grid_and_radius() {
        assert!(BoundaryCurve::disk(1000).is_err());
        assert!(BoundaryCurve::disk(128).is_err());
        let f = FourierProfile::cosine(2, 1.5);
        match BoundaryCurve::new(f.into(), 1.0, 256) {
            Err(Error::NonStarShaped { min_radius, .. }) => assert!(min_radius < 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ellipse_perimeter_matches_parametric_quadrature() {
        let c = BoundaryCurve::ellipse(0.6, 1024).unwrap();
        // independent oracle: ∮ √(sin²t + b² cos²t) dt in the parametric angle, 64 GL16 panels
        let b2 = 0.64;
        let oracle = quad::composite(quad::gl16(), 0.0, TAU, 64, |t| {
            (t.sin().powi(2) + b2 * t.cos().powi(2)).sqrt()
        });
        assert!((c.perimeter() - oracle).abs() < 1e-12 * oracle);
        assert!((c.perimeter() - 5.67233).abs() < 1e-5);
    }

    #[test]
    fn round_trips_hold_on_perturbed_curve() {
        let f = FourierProfile::new(vec![0.0, 0.0, 0.03, 0.02], vec![0.0, 0.01, 0.0, -0.02]).unwrap();
        let c = BoundaryCurve::new(f.into(), 1.0, 1024).unwrap();
        let l = c.perimeter();
        for i in 0..200 {
            let s = -l + 3.0 * l * i as f64 / 200.0 + 1e-3;
            let back = c.s_of_theta(c.theta_of_s(s));
            assert!((back - s).abs() < 1e-12 * l, "s = {s}");
            let xi = c.lazutkin(s).unwrap();
            let back = c.s_of_lazutkin(xi).unwrap();
            assert!((back - s).abs() < 1e-11 * l, "xi round trip at s = {s}");
        }
    }

    #[test]
    fn curvature_matches_finite_difference_of_tangent_angle() {
        let f = FourierProfile::new(vec![0.0, 0.0, 0.05, 0.0, 0.01], vec![0.0, 0.0, 0.0, 0.03]).unwrap();
        let c = BoundaryCurve::new(f.into(), 1.0, 1024).unwrap();
        let h = 1e-5;
        for &th in &[0.1, 1.7, 4.4] {
            let j = c.jet(th);
            let dw = (c.jet(th + h).tangent_angle() - c.jet(th - h).tangent_angle()) / (2.0 * h);
            assert!((dw / j.speed - j.kappa).abs() < 1e-8);
            let dk = (c.jet(th + h).kappa - c.jet(th - h).kappa) / (2.0 * h);
            assert!((dk / j.speed - j.dkappa).abs() < 1e-7);
            let t = j.tangent();
            let n = j.normal();
            assert!((t[0] * n[0] + t[1] * n[1]).abs() < 1e-15);
            // outward: the normal points away from the origin
            let p = j.point();
            assert!(p[0] * n[0] + p[1] * n[1] > 0.0);
        }
    }

    #[test]
    fn ellipse_vertex_curvature() {
        let c = BoundaryCurve::ellipse(0.6, 1024).unwrap();
        let f = c.evaluate(0.0);
        assert!((f.kappa - 1.5625).abs() < 1e-13);
        assert!((f.point[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn perturbed_cos2_curvature_at_origin() {
        let c = BoundaryCurve::new(FourierProfile::cosine(2, 1.0).into(), 0.01, 1024).unwrap();
        let k = c.evaluate(0.0).kappa;
        assert!((k - 1.03).abs() < 1e-3);
    }
}
