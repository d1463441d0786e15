//! Maximal (p, q) Birkhoff orbits by ascent of the chord-length action.

use crate::error::{invalid, Error, Result};
use crate::geometry::{BoundaryCurve, PolarJet};
use crate::settings::Settings;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffOrbit {
    pub p: usize,
    pub q: usize,
    /// Lifted footpoints s_0 < s_1 < … < s_{q−1}, with s_0 in [0, ℓ).
    pub footpoints: Vec<f64>,
    /// Polar angles of the footpoints (lifted the same way).
    pub thetas: Vec<f64>,
    /// Sum of the q chord lengths.
    pub action: f64,
    /// Largest |cos(incoming) − cos(outgoing)| over the bounces.
    pub reflection_error: f64,
    /// Coordinate sweeps plus Newton iterations used by the winning seed.
    pub sweeps: usize,
}

struct Action<'a> {
    curve: &'a BoundaryCurve,
    p: usize,
    q: usize,
}

/// Per-bounce quantities for a configuration θ_0..θ_{q−1}.
struct Local {
    jets: Vec<PolarJet>,
    /// Unit chord from bounce j to j + 1.
    e: Vec<[f64; 2]>,
    d: Vec<f64>,
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// dγ/dθ and d²γ/dθ².
fn velocity(j: &PolarJet) -> ([f64; 2], [f64; 2]) {
    let (s, c) = j.theta.sin_cos();
    let er = [c, s];
    let et = [-s, c];
    let [r0, r1, r2, _] = j.r;
    let g1 = [r1 * er[0] + r0 * et[0], r1 * er[1] + r0 * et[1]];
    let g2 = [(r2 - r0) * er[0] + 2.0 * r1 * et[0], (r2 - r0) * er[1] + 2.0 * r1 * et[1]];
    (g1, g2)
}

impl Action<'_> {
    fn lift(&self, theta: &[f64], k: usize) -> f64 {
        // θ_{j+q} = θ_j + 2πp
        theta[k % self.q] + TAU * (self.p * (k / self.q)) as f64
    }

    fn local(&self, theta: &[f64]) -> Local {
        let q = self.q;
        let jets: Vec<PolarJet> = theta.iter().map(|&t| self.curve.jet(t)).collect();
        let mut e = Vec::with_capacity(q);
        let mut d = Vec::with_capacity(q);
        for j in 0..q {
            let a = jets[j].point();
            let b = self.curve.jet(self.lift(theta, j + 1)).point();
            let v = [b[0] - a[0], b[1] - a[1]];
            let n = v[0].hypot(v[1]);
            e.push([v[0] / n, v[1] / n]);
            d.push(n);
        }
        Local { jets, e, d }
    }

    fn value(&self, theta: &[f64]) -> f64 {
        self.local(theta).d.iter().sum()
    }

    /// Chord lengths adjacent to coordinate j, with that coordinate moved to t.
    fn partial_value(&self, theta: &[f64], j: usize, t: f64) -> f64 {
        let q = self.q;
        let prev = if j == 0 { theta[q - 1] - TAU * self.p as f64 } else { theta[j - 1] };
        let next = self.lift(theta, j + 1);
        let x = self.curve.jet(t).point();
        let a = self.curve.jet(prev).point();
        let b = self.curve.jet(next).point();
        (x[0] - a[0]).hypot(x[1] - a[1]) + (b[0] - x[0]).hypot(b[1] - x[1])
    }

    /// Gradient entry, diagonal Hessian entry and the coupling to j + 1.
    fn derivs(&self, loc: &Local, j: usize) -> (f64, f64, f64) {
        let q = self.q;
        let jm = (j + q - 1) % q;
        let (g1, g2) = velocity(&loc.jets[j]);
        let (ein, eout) = (loc.e[jm], loc.e[j]);
        let (din, dout) = (loc.d[jm], loc.d[j]);
        let diff = [ein[0] - eout[0], ein[1] - eout[1]];
        let grad = dot(g1, diff);
        let v2 = dot(g1, g1);
        let hess = dot(g2, diff) + (v2 - dot(g1, ein).powi(2)) / din + (v2 - dot(g1, eout).powi(2)) / dout;
        let (h1, _) = velocity(&loc.jets[(j + 1) % q]);
        let couple = -(dot(g1, h1) - dot(g1, eout) * dot(h1, eout)) / dout;
        (grad, hess, couple)
    }

    fn gaps(&self, theta: &[f64], j: usize) -> f64 {
        let q = self.q;
        let prev = if j == 0 { theta[q - 1] - TAU * self.p as f64 } else { theta[j - 1] };
        let next = self.lift(theta, j + 1);
        (theta[j] - prev).min(next - theta[j])
    }

    /// One Gauss-Seidel sweep of safeguarded Newton steps; returns the largest move.
    fn sweep(&self, theta: &mut [f64], relax: f64) -> f64 {
        let mut largest: f64 = 0.0;
        for j in 0..self.q {
            let loc = self.local_around(theta, j);
            let (g, h, _) = self.derivs(&loc, j);
            let room = 0.5 * self.gaps(theta, j);
            let mut delta = if h < 0.0 { -relax * g / h } else { g.signum() * 0.1 * room };
            delta = delta.clamp(-room, room);
            let base = self.partial_value(theta, j, theta[j]);
            let mut accepted = 0.0;
            for _ in 0..40 {
                if delta == 0.0 {
                    break;
                }
                if self.partial_value(theta, j, theta[j] + delta) >= base {
                    accepted = delta;
                    break;
                }
                delta *= 0.5;
            }
            theta[j] += accepted;
            largest = largest.max(accepted.abs());
        }
        largest
    }

    /// Local data restricted to what coordinate j needs (full recomputation is cheap enough
    /// for the q handled here, but this keeps sweeps O(q)).
    fn local_around(&self, theta: &[f64], j: usize) -> Local {
        let q = self.q;
        if q <= 4 {
            return self.local(theta);
        }
        let mut jets = vec![self.curve.jet(theta[j]); q];
        let mut e = vec![[0.0; 2]; q];
        let mut d = vec![1.0; q];
        let jm = (j + q - 1) % q;
        let jp = (j + 1) % q;
        jets[jp] = self.curve.jet(theta[jp]);
        let prev = if j == 0 { theta[q - 1] - TAU * self.p as f64 } else { theta[j - 1] };
        let a = self.curve.jet(prev).point();
        let x = jets[j].point();
        let b = self.curve.jet(self.lift(theta, j + 1)).point();
        let vin = [x[0] - a[0], x[1] - a[1]];
        let vout = [b[0] - x[0], b[1] - x[1]];
        d[jm] = vin[0].hypot(vin[1]);
        d[j] = vout[0].hypot(vout[1]);
        e[jm] = [vin[0] / d[jm], vin[1] / d[jm]];
        e[j] = [vout[0] / d[j], vout[1] / d[j]];
        Local { jets, e, d }
    }

    /// Levenberg-damped Newton step on the full cyclic system; returns the move actually taken and
    /// the gain in action predicted by the quadratic model.
    fn newton(&self, theta: &mut [f64]) -> Option<(f64, f64)> {
        let q = self.q;
        let loc = self.local(theta);
        let mut hm = vec![vec![0.0; q]; q];
        let mut g = vec![0.0; q];
        let mut scale: f64 = 0.0;
        for j in 0..q {
            let (gj, hj, cj) = self.derivs(&loc, j);
            g[j] = gj;
            hm[j][j] += hj;
            let jp = (j + 1) % q;
            hm[j][jp] += cj;
            hm[jp][j] += cj;
            scale = scale.max(hj.abs());
        }
        // solve (H − μ) δ = −g, raising μ until δ is an ascent direction (H may have a small
        // positive eigenvalue along a nearly flat family of orbits)
        let rhs: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut found = None;
        for k in 0..16 {
            let mu = 1e-9 * scale * 10f64.powi(k);
            let mut shifted = hm.clone();
            for (j, row) in shifted.iter_mut().enumerate() {
                row[j] -= mu;
            }
            if let Some(d) = solve_dense(shifted, rhs.clone()) {
                let gain = 0.5 * g.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>();
                if gain >= 0.0 {
                    found = Some((d, gain));
                    break;
                }
            }
        }
        let (mut delta, gain) = found?;
        let room = (0..q).map(|j| self.gaps(theta, j)).fold(f64::INFINITY, f64::min) * 0.5;
        let big = delta.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if big > room {
            let f = room / big;
            delta.iter_mut().for_each(|x| *x *= f);
        }
        let base = self.value(theta);
        let mut trial = theta.to_vec();
        for _ in 0..30 {
            for j in 0..q {
                trial[j] = theta[j] + delta[j];
            }
            if self.value(&trial) >= base - 1e-15 * base {
                let moved = delta.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                theta.copy_from_slice(&trial);
                return Some((moved, gain));
            }
            delta.iter_mut().for_each(|x| *x *= 0.5);
        }
        None
    }

    fn reflection_error(&self, theta: &[f64]) -> f64 {
        let loc = self.local(theta);
        (0..self.q)
            .map(|j| {
                let (g1, _) = velocity(&loc.jets[j]);
                let (g, _, _) = self.derivs(&loc, j);
                g.abs() / g1[0].hypot(g1[1])
            })
            .fold(0.0, f64::max)
    }
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Finds the (p, q) periodic orbit of maximal length, 1 <= p <= q/2.
///
/// Starts from several equidistributed configurations in the Lazutkin coordinate, runs cyclic
/// coordinate ascent on the action and polishes with damped Newton steps on the full system.
pub fn birkhoff_orbit(curve: &BoundaryCurve, p: usize, q: usize, settings: &Settings) -> Result<BirkhoffOrbit> {
    if q < 2 || p == 0 || 2 * p > q {
        return Err(invalid(format!("need 1 <= p <= q/2, got p = {p}, q = {q}")));
    }
    if !curve.is_convex() {
        return Err(Error::NonConvex { min_curvature: curve.min_curvature() });
    }
    let act = Action { curve, p, q };
    let seeds = settings.birkhoff_seeds.max(1);
    let relax = if settings.birkhoff_relaxation > 0.0 {
        settings.birkhoff_relaxation
    } else {
        2.0 / (1.0 + (PI / q as f64).sin())
    };
    let tol = settings.birkhoff_tol * curve.perimeter();
    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    for k in 0..seeds {
        let xi0 = k as f64 / (seeds * q) as f64;
        let mut theta = (0..q)
            .map(|j| curve.theta_of_lazutkin(xi0 + (j * p) as f64 / q as f64))
            .collect::<Result<Vec<f64>>>()?;
        let mut sweeps = 0;
        let mut last = f64::INFINITY;
        let mut converged = false;
        while sweeps < settings.birkhoff_max_sweeps {
            sweeps += 1;
            // coordinate ascent until the moves are small, then Newton
            let (moved, gain) = if last > 1e-6 {
                (act.sweep(&mut theta, relax), f64::INFINITY)
            } else {
                match act.newton(&mut theta) {
                    Some(step) => step,
                    None => (act.sweep(&mut theta, 1.0), f64::INFINITY),
                }
            };
            last = moved;
            // a (nearly) flat family of orbits has no isolated maximum to settle on; stop once
            // the gradient vanishes or a Newton step can no longer raise the action above round-off
            let flat = gain.abs() <= 4.0 * f64::EPSILON * act.value(&theta);
            if moved < tol || (last <= 1e-6 && (flat || act.reflection_error(&theta) < 1e-14)) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NoConvergence { p, q, sweeps, last_move: last });
        }
        let value = act.value(&theta);
        if best.as_ref().is_none_or(|(v, _, _)| value > *v) {
            best = Some((value, theta, sweeps));
        }
    }
    let (action, mut theta, sweeps) = best.expect("at least one seed");
    let shift = (theta[0] / TAU).floor() * TAU;
    theta.iter_mut().for_each(|t| *t -= shift);
    let reflection_error = act.reflection_error(&theta);
    if reflection_error > 1e-9 {
        log::warn!("({p}, {q}) Birkhoff orbit reflects with error {reflection_error:e}");
    }
    Ok(BirkhoffOrbit {
        p,
        q,
        footpoints: theta.iter().map(|&t| curve.s_of_theta(t)).collect(),
        thetas: theta,
        action,
        reflection_error,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FourierProfile;

    #[test]
    fn disk_polygons() {
        let c = BoundaryCurve::disk(1024).unwrap();
        let s = Settings::default();
        for (p, q) in [(1, 2), (1, 5), (2, 5), (3, 7)] {
            let o = birkhoff_orbit(&c, p, q, &s).unwrap();
            let expected = 2.0 * q as f64 * (PI * p as f64 / q as f64).sin();
            assert!((o.action - expected).abs() < 1e-12, "({p},{q}) {}", o.action);
        }
    }

    #[test]
    fn ellipse_diameter_is_major_axis() {
        let c = BoundaryCurve::ellipse(0.6, 1024).unwrap();
        let o = birkhoff_orbit(&c, 1, 2, &Settings::default()).unwrap();
        assert!((o.action - 4.0).abs() < 1e-12, "{}", o.action);
        assert!(o.reflection_error < 1e-9);
    }

    #[test]
    fn gradient_and_hessian_match_differences() {
        let f = FourierProfile::new(vec![0.0, 0.0, 0.03, 0.01], vec![0.0, 0.0, 0.0, 0.02]).unwrap();
        let c = BoundaryCurve::new(f.into(), 1.0, 1024).unwrap();
        let act = Action { curve: &c, p: 2, q: 5 };
        let theta: Vec<f64> = (0..5).map(|j| 0.3 + 4.0 * PI * j as f64 / 5.0 + 0.05 * (j as f64).sin()).collect();
        let loc = act.local(&theta);
        let h = 1e-5;
        for j in 0..5 {
            let (g, hd, cp) = act.derivs(&loc, j);
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[j] += h;
            tm[j] -= h;
            let fd = (act.value(&tp) - act.value(&tm)) / (2.0 * h);
            assert!((fd - g).abs() < 1e-8, "grad {j}");
            let fd2 = (act.value(&tp) - 2.0 * act.value(&theta) + act.value(&tm)) / (h * h);
            assert!((fd2 - hd).abs() < 1e-4, "hess {j}: {fd2} vs {hd}");
            let gp = {
                let mut t = theta.clone();
                t[(j + 1) % 5] += h;
                act.derivs(&act.local(&t), j).0
            };
            let gm = {
                let mut t = theta.clone();
                t[(j + 1) % 5] -= h;
                act.derivs(&act.local(&t), j).0
            };
            assert!(((gp - gm) / (2.0 * h) - cp).abs() < 1e-7, "coupling {j}");
        }
    }

    #[test]
    fn star_and_convex_pentagons_reflect() {
        let c = BoundaryCurve::new(FourierProfile::cosine(5, 0.02).into(), 1.0, 1024).unwrap();
        let s = Settings::default();
        for p in [1, 2] {
            let o = birkhoff_orbit(&c, p, 5, &s).unwrap();
            assert!(o.reflection_error < 1e-9, "p = {p}: {}", o.reflection_error);
            assert!(o.footpoints.windows(2).all(|w| w[1] > w[0]));
        }
    }
}
