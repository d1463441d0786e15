//! Radial profiles r(θ) of star-shaped boundaries.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Truncated Fourier series f(θ) = a₀ + Σ (a_k cos kθ + b_k sin kθ).
///
/// `cos[k]` holds a_k for k = 0..=K and `sin[k]` holds b_k; `sin[0]` is always zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierProfile {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl FourierProfile {
    pub fn new(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if cos.iter().chain(sin.iter()).any(|c| !c.is_finite()) {
            return Err(invalid("Fourier coefficients must be finite"));
        }
        let len = cos.len().max(sin.len()).max(1);
        let mut cos = cos;
        let mut sin = sin;
        cos.resize(len, 0.0);
        sin.resize(len, 0.0);
        sin[0] = 0.0;
        let mut p = FourierProfile { cos, sin };
        p.trim();
        Ok(p)
    }

    /// f ≡ 0.
    pub fn zero() -> Self {
        FourierProfile { cos: vec![0.0], sin: vec![0.0] }
    }

    /// f = amplitude · cos kθ.
    pub fn cosine(k: usize, amplitude: f64) -> Self {
        let mut cos = vec![0.0; k + 1];
        cos[k] = amplitude;
        FourierProfile::new(cos, Vec::new()).expect("finite coefficient")
    }

    /// f = amplitude · sin kθ.
    pub fn sine(k: usize, amplitude: f64) -> Self {
        let mut sin = vec![0.0; k + 1];
        sin[k] = amplitude;
        FourierProfile::new(Vec::new(), sin).expect("finite coefficient")
    }

    fn trim(&mut self) {
        while self.cos.len() > 1 && self.cos.last() == Some(&0.0) && self.sin.last() == Some(&0.0) {
            self.cos.pop();
            self.sin.pop();
        }
    }

    /// Highest harmonic K.
    pub fn order(&self) -> usize {
        self.cos.len() - 1
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    pub fn is_zero(&self) -> bool {
        self.cos.iter().chain(self.sin.iter()).all(|&c| c == 0.0)
    }

    /// Σ_k (|a_k| + |b_k|) k^n, an upper bound for sup|f^{(n)}|.
    pub fn derivative_bound(&self, n: i32) -> f64 {
        (0..self.cos.len())
            .map(|k| (self.cos[k].abs() + self.sin[k].abs()) * (k as f64).powi(n))
            .sum()
    }

    /// ‖f‖_{C^n}: the largest of the bounds for f, f′, ..., f^{(n)}.
    pub fn c_norm(&self, n: i32) -> f64 {
        (0..=n).map(|j| self.derivative_bound(j)).fold(0.0, f64::max)
    }

    /// f, f′, f″, f‴ at θ.
    pub fn derivs(&self, theta: f64) -> [f64; 4] {
        let mut out = [self.cos[0], 0.0, 0.0, 0.0];
        if self.cos.len() == 1 {
            return out;
        }
        let (s1, c1) = theta.sin_cos();
        let (mut sk, mut ck) = (s1, c1);
        for k in 1..self.cos.len() {
            if k > 1 {
                // re-anchor every 16 harmonics to keep the recurrence error bounded
                if k % 16 == 0 {
                    let (s, c) = (k as f64 * theta).sin_cos();
                    sk = s;
                    ck = c;
                } else {
                    let nc = ck * c1 - sk * s1;
                    sk = sk * c1 + ck * s1;
                    ck = nc;
                }
            }
            let (a, b) = (self.cos[k], self.sin[k]);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let kf = k as f64;
            let even = a * ck + b * sk;
            let odd = b * ck - a * sk;
            out[0] += even;
            out[1] += kf * odd;
            out[2] -= kf * kf * even;
            out[3] -= kf * kf * kf * odd;
        }
        out
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.derivs(theta)[0]
    }

    /// (f(θ₀ + Δ) − f(θ₀)) / Δ without cancellation for small Δ.
    pub fn divided_difference(&self, theta0: f64, delta: f64) -> f64 {
        if delta == 0.0 {
            return self.derivs(theta0)[1];
        }
        let mid = theta0 + 0.5 * delta;
        let mut acc = 0.0;
        for k in 1..self.cos.len() {
            let (a, b) = (self.cos[k], self.sin[k]);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let kf = k as f64;
            let (sm, cm) = (kf * mid).sin_cos();
            // cos kθ₁ − cos kθ₀ = −2 sin(k·mid) sin(kΔ/2), sin kθ₁ − sin kθ₀ = 2 cos(k·mid) sin(kΔ/2)
            let factor = 2.0 * (0.5 * kf * delta).sin() / delta;
            acc += factor * (b * cm - a * sm);
        }
        acc
    }
}

/// A radial profile: either 1 + τ f(θ) or an exact ellipse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    Fourier(FourierProfile),
    /// Ellipse with semi-axes 1 (along θ = 0) and √(1 − ε²), centred at the origin.
    Ellipse { eccentricity: f64 },
}

impl Profile {
    pub fn ellipse(eccentricity: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eccentricity) {
            return Err(invalid(format!("eccentricity must lie in [0, 1), got {eccentricity}")));
        }
        Ok(Profile::Ellipse { eccentricity })
    }

    pub fn as_fourier(&self) -> Option<&FourierProfile> {
        match self {
            Profile::Fourier(f) => Some(f),
            Profile::Ellipse { .. } => None,
        }
    }
}

impl From<FourierProfile> for Profile {
    fn from(f: FourierProfile) -> Self {
        Profile::Fourier(f)
    }
}

/// Radius function with derivatives, as used by the curve tables and the billiard solver.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Radius {
    Fourier { f: FourierProfile, tau: f64 },
    Ellipse { e2: f64, b: f64 },
}

impl Radius {
    pub(crate) fn new(profile: &Profile, tau: f64) -> Self {
        match profile {
            Profile::Fourier(f) => Radius::Fourier { f: f.clone(), tau },
            Profile::Ellipse { eccentricity } => {
                let e2 = eccentricity * eccentricity;
                Radius::Ellipse { e2, b: (1.0 - e2).sqrt() }
            }
        }
    }

    /// r, r′, r″, r‴ at θ.
    #[inline]
    pub(crate) fn derivs(&self, theta: f64) -> [f64; 4] {
        match self {
            Radius::Fourier { f, tau } => {
                let d = f.derivs(theta);
                [1.0 + tau * d[0], tau * d[1], tau * d[2], tau * d[3]]
            }
            Radius::Ellipse { e2, b } => {
                let (s, c) = theta.sin_cos();
                let (s2, c2) = (2.0 * s * c, c * c - s * s);
                let u = 1.0 - e2 * c * c;
                let u1 = e2 * s2;
                let u2 = 2.0 * e2 * c2;
                let u3 = -4.0 * e2 * s2;
                let isu = 1.0 / u.sqrt();
                let p1 = isu / u; // u^{-3/2}
                let p2 = p1 / u; // u^{-5/2}
                let p3 = p2 / u; // u^{-7/2}
                [
                    b * isu,
                    -0.5 * b * p1 * u1,
                    b * (0.75 * p2 * u1 * u1 - 0.5 * p1 * u2),
                    b * (-1.875 * p3 * u1 * u1 * u1 + 2.25 * p2 * u1 * u2 - 0.5 * p1 * u3),
                ]
            }
        }
    }

    /// (r(θ₀ + Δ) − r(θ₀)) / Δ, free of cancellation for small Δ.
    #[inline]
    pub(crate) fn divided_difference(&self, theta0: f64, delta: f64) -> f64 {
        match self {
            Radius::Fourier { f, tau } => tau * f.divided_difference(theta0, delta),
            Radius::Ellipse { e2, b } => {
                if delta == 0.0 {
                    return self.derivs(theta0)[1];
                }
                let theta1 = theta0 + delta;
                let c0 = theta0.cos();
                let c1 = theta1.cos();
                let u0 = 1.0 - e2 * c0 * c0;
                let u1 = 1.0 - e2 * c1 * c1;
                // u₀ − u₁ = e²(cos²θ₁ − cos²θ₀) = −e² sin(θ₀+θ₁) sin Δ
                let du_over = -e2 * (theta0 + theta1).sin() * sinc(delta);
                let (r0, r1) = (u0.sqrt(), u1.sqrt());
                b * du_over / (r0 * r1 * (r0 + r1))
            }
        }
    }
}

/// sin(x)/x with the removable singularity filled in.
#[inline]
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}
