//! Oscillatory integrals ∮ e^{−iλφ(s)} a(s) ds over one period, their decay, and the sublevel
//! distribution g₀(t) = ∫_{φ ≤ t} a ds with its Hölder behaviour at critical values.

use crate::error::{invalid, Error, Result};
use crate::geometry::FourierProfile;
use crate::quad;
use crate::settings::Settings;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::{Arc, Mutex};

type Closure = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function of one period, either sampled on a uniform grid or given in closed form.
#[derive(Clone)]
pub enum PeriodicFunction {
    /// Values at s = k·period/n, n a power of two.
    Sampled { period: f64, values: Vec<f64> },
    Analytic { period: f64, f: Closure },
}

impl fmt::Debug for PeriodicFunction {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeriodicFunction::Sampled { period, values } => {
                write!(fm, "Sampled {{ period: {period}, nodes: {} }}", values.len())
            }
            PeriodicFunction::Analytic { period, .. } => write!(fm, "Analytic {{ period: {period} }}"),
        }
    }
}

impl PeriodicFunction {
    pub fn from_samples(period: f64, values: Vec<f64>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(invalid(format!("period must be positive, got {period}")));
        }
        if !values.len().is_power_of_two() || values.len() < 4 {
            return Err(invalid(format!("sample count must be a power of two >= 4, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("samples must be finite"));
        }
        Ok(PeriodicFunction::Sampled { period, values })
    }

    pub fn from_fn(period: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        PeriodicFunction::Analytic { period, f: Arc::new(f) }
    }

    pub fn constant(period: f64, c: f64) -> Self {
        Self::from_fn(period, move |_| c)
    }

    /// s ↦ f(2πs/period).
    pub fn from_fourier(profile: FourierProfile, period: f64) -> Self {
        Self::from_fn(period, move |s| profile.value(TAU * s / period))
    }

    pub fn period(&self) -> f64 {
        match self {
            PeriodicFunction::Sampled { period, .. } | PeriodicFunction::Analytic { period, .. } => *period,
        }
    }

    fn native_nodes(&self) -> usize {
        match self {
            PeriodicFunction::Sampled { values, .. } => values.len(),
            PeriodicFunction::Analytic { .. } => 0,
        }
    }

    /// Values at n equispaced points; sampled data is refined by trigonometric interpolation.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        match self {
            PeriodicFunction::Analytic { period, f } => (0..n).map(|k| f(period * k as f64 / n as f64)).collect(),
            PeriodicFunction::Sampled { values, .. } => {
                let m = values.len();
                if n == m {
                    values.clone()
                } else if n < m && m % n == 0 {
                    values.iter().step_by(m / n).cloned().collect()
                } else {
                    refine(values, n)
                }
            }
        }
    }
}

/// Zero-padded FFT interpolation from m to n > m samples.
fn refine(values: &[f64], n: usize) -> Vec<f64> {
    let m = values.len();
    let mut planner = FftPlanner::new();
    let mut spec: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(m).process(&mut spec);
    let mut big = vec![Complex64::new(0.0, 0.0); n];
    let half = m / 2;
    for k in 0..half {
        big[k] = spec[k];
    }
    for k in 1..half {
        big[n - k] = spec[m - k];
    }
    // split the Nyquist bin so the interpolant stays real
    big[half] = spec[half] * 0.5;
    big[n - half] += spec[half] * 0.5;
    planner.plan_fft_inverse(n).process(&mut big);
    big.iter().map(|c| c.re / m as f64).collect()
}

/// Phase and amplitude samples at dyadic resolutions, shared between λ values.
struct Grids<'a> {
    phase: &'a PeriodicFunction,
    amplitude: &'a PeriodicFunction,
    cache: Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>,
}

impl<'a> Grids<'a> {
    fn new(phase: &'a PeriodicFunction, amplitude: &'a PeriodicFunction) -> Result<Self> {
        let (p, q) = (phase.period(), amplitude.period());
        if (p - q).abs() > 1e-12 * p.max(q) {
            return Err(invalid(format!("phase period {p} and amplitude period {q} differ")));
        }
        Ok(Grids { phase, amplitude, cache: Mutex::new(HashMap::new()) })
    }

    fn at(&self, n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
        if let Some(g) = self.cache.lock().expect("cache lock").get(&n) {
            return g.clone();
        }
        let g = Arc::new((self.phase.sample(n), self.amplitude.sample(n)));
        self.cache.lock().expect("cache lock").insert(n, g.clone());
        g
    }

    fn period(&self) -> f64 {
        self.phase.period()
    }

    fn trapezoid(&self, lambda: f64, n: usize) -> Complex64 {
        let g = self.at(n);
        let w = self.period() / n as f64;
        g.0.iter().zip(&g.1).map(|(&p, &a)| Complex64::from_polar(a * w, -lambda * p)).sum()
    }

    fn abs_mass(&self, n: usize) -> f64 {
        let g = self.at(n);
        g.1.iter().map(|a| a.abs()).sum::<f64>() * self.period() / n as f64
    }

    fn start_nodes(&self, settings: &Settings) -> usize {
        settings
            .osc_min_nodes
            .max(self.phase.native_nodes())
            .max(self.amplitude.native_nodes())
            .next_power_of_two()
    }

    fn integral(&self, lambda: f64, settings: &Settings) -> Result<Complex64> {
        let mut n = self.start_nodes(settings);
        let scale = self.abs_mass(n);
        let mut prev = self.trapezoid(lambda, n);
        while 2 * n <= settings.osc_max_nodes {
            n *= 2;
            let next = self.trapezoid(lambda, n);
            if (next - prev).norm() <= settings.osc_rel_tol * next.norm().max(scale) {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::ResolutionCap {
            nodes: n,
            previous: format!("{prev}"),
            last: format!("{}", self.trapezoid(lambda, n)),
        })
    }
}

/// I(λ) = ∮ e^{−iλφ(s)} a(s) ds for each λ, by trapezoid sums refined until two doublings agree.
pub fn oscillatory_integral(
    phase: &PeriodicFunction,
    amplitude: &PeriodicFunction,
    lambdas: &[f64],
    settings: &Settings,
) -> Result<Vec<Complex64>> {
    let grids = Grids::new(phase, amplitude)?;
    lambdas.par_iter().map(|&l| grids.integral(l, settings)).collect()
}

/// Power-law fit of |I(λ) − c₀| over dyadic octaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Fitted m in |I − c₀| ≈ C λ^m; None when the residual sits below the noise floor.
    pub exponent: Option<f64>,
    /// Fitted C.
    pub constant: Option<f64>,
    /// RMS residual of the log-log regression.
    pub residual: f64,
    /// Constant term subtracted before fitting (zero unless the decay stalled).
    pub c0: [f64; 2],
    pub fast_decay: bool,
    /// (octave centre, RMS of |I − c₀| over the octave).
    pub envelopes: Vec<(f64, f64)>,
    pub lambdas: Vec<f64>,
    pub values: Vec<[f64; 2]>,
}

impl DecayFit {
    /// Columns λ, Re I, Im I, |I|.
    pub fn write_csv(&self, out: impl std::io::Write) -> Result<()> {
        let rows = self.lambdas.iter().zip(&self.values).map(|(l, v)| vec![*l, v[0], v[1], v[0].hypot(v[1])]);
        crate::export::write_csv(out, &["lambda", "re", "im", "abs"], rows)
    }
}

/// Relative size of |I − c₀| (against ∮|a|) below which decay is reported as faster than any power.
const NOISE_FLOOR: f64 = 1e-8;

fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let res = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    (slope, icpt, res)
}

/// Decay exponent of I(λ) over the octaves [2^k, 2^{k+1}) for k = log2(λ_min) .. log2(λ_max) − 1.
pub fn decay_exponent(
    phase: &PeriodicFunction,
    amplitude: &PeriodicFunction,
    lambda_min: f64,
    lambda_max: f64,
    settings: &Settings,
) -> Result<DecayFit> {
    if lambda_min < 1.0 {
        return Err(invalid(format!("λ_min must be at least 1, got {lambda_min}")));
    }
    let octaves = (lambda_max / lambda_min).log2().round() as usize;
    if octaves < 3 || (lambda_max / lambda_min - (1u64 << octaves) as f64).abs() > 1e-9 * lambda_max {
        return Err(invalid("the λ window must span at least three whole octaves"));
    }
    let m = settings.decay_samples.max(4);
    let lambdas: Vec<f64> = (0..octaves * m).map(|j| lambda_min * 2f64.powf(j as f64 / m as f64)).collect();
    let values = oscillatory_integral(phase, amplitude, &lambdas, settings)?;
    let mass = Grids::new(phase, amplitude)?.abs_mass(settings.osc_min_nodes.next_power_of_two().max(1024));
    let envelopes = |c0: Complex64| -> Vec<(f64, f64)> {
        (0..octaves)
            .map(|k| {
                let vals = &values[k * m..(k + 1) * m];
                let rms = (vals.iter().map(|v| (v - c0).norm_sqr()).sum::<f64>() / m as f64).sqrt();
                (lambda_min * 2f64.powf(k as f64 + 0.5), rms)
            })
            .collect()
    };
    let mut c0 = Complex64::new(0.0, 0.0);
    let mut env = envelopes(c0);
    if env[octaves - 1].1 > 0.9 * env[0].1 {
        // decay stalls: subtract the top-octave mean as the constant term
        let top = &values[(octaves - 1) * m..];
        c0 = top.iter().sum::<Complex64>() / m as f64;
        env = envelopes(c0);
    }
    let floor = NOISE_FLOOR * mass.max(f64::MIN_POSITIVE);
    let fast = env.iter().all(|e| e.1 <= floor);
    let base = DecayFit {
        lambda_min,
        lambda_max,
        exponent: None,
        constant: None,
        residual: 0.0,
        c0: [c0.re, c0.im],
        fast_decay: fast,
        envelopes: env.clone(),
        lambdas: lambdas.clone(),
        values: values.iter().map(|v| [v.re, v.im]).collect(),
    };
    if fast {
        return Ok(base);
    }
    let pts: Vec<(f64, f64)> = env.iter().filter(|e| e.1 > 0.0).map(|e| (e.0.ln(), e.1.ln())).collect();
    if pts.len() < 3 {
        return Err(Error::NoisyFit { residual: f64::INFINITY, limit: settings.fit_residual_limit });
    }
    let (slope, icpt, res) = linear_fit(&pts);
    if res > settings.fit_residual_limit {
        return Err(Error::NoisyFit { residual: res, limit: settings.fit_residual_limit });
    }
    Ok(DecayFit { exponent: Some(slope), constant: Some(icpt.exp()), residual: res, ..base })
}

/// Phase and amplitude on a fine uniform grid for level-set computations.
struct LevelGrid {
    period: f64,
    phase: Vec<f64>,
    amp: Vec<f64>,
}

impl LevelGrid {
    fn new(phase: &PeriodicFunction, amplitude: &PeriodicFunction, nodes: usize) -> Result<Self> {
        let g = Grids::new(phase, amplitude)?;
        let n = nodes.next_power_of_two().max(phase.native_nodes()).max(amplitude.native_nodes());
        let (phase, amp) = (phase.sample(n), amplitude.sample(n));
        Ok(LevelGrid { period: g.period(), phase, amp })
    }

    fn nodes(&self) -> usize {
        self.phase.len()
    }

    fn mass(&self) -> f64 {
        self.amp.iter().sum::<f64>() * self.period / self.nodes() as f64
    }

    fn range(&self) -> (f64, f64) {
        let lo = self.phase.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.phase.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// ∫_{φ ≤ t} a ds with φ and a linear on each cell.
    fn sublevel(&self, t: f64) -> f64 {
        let n = self.nodes();
        let h = self.period / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let j = (i + 1) % n;
            let (p0, p1) = (self.phase[i], self.phase[j]);
            let (a0, a1) = (self.amp[i], self.amp[j]);
            let in0 = p0 <= t;
            let in1 = p1 <= t;
            acc += match (in0, in1) {
                (true, true) => 0.5 * (a0 + a1) * h,
                (false, false) => 0.0,
                _ => {
                    let x = (t - p0) / (p1 - p0);
                    let ax = a0 + x * (a1 - a0);
                    if in0 {
                        0.5 * (a0 + ax) * x * h
                    } else {
                        0.5 * (ax + a1) * (1.0 - x) * h
                    }
                }
            };
        }
        acc
    }

    /// ∮_{φ = t} a / |φ′| from the crossings of the piecewise-linear phase.
    fn coarea(&self, t: f64) -> f64 {
        let n = self.nodes();
        let h = self.period / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let j = (i + 1) % n;
            let (p0, p1) = (self.phase[i], self.phase[j]);
            if (p0 <= t) != (p1 <= t) {
                let x = (t - p0) / (p1 - p0);
                let a = self.amp[i] + x * (self.amp[j] - self.amp[i]);
                acc += a * h / (p1 - p0).abs();
            }
        }
        acc
    }

    /// Values of φ at grid extrema (sign changes of the forward difference).
    fn extremum_values(&self) -> Vec<f64> {
        let n = self.nodes();
        let d: Vec<f64> = (0..n).map(|i| self.phase[(i + 1) % n] - self.phase[i]).collect();
        let mut out = Vec::new();
        for i in 0..n {
            let prev = d[(i + n - 1) % n];
            if (prev > 0.0 && d[i] <= 0.0) || (prev < 0.0 && d[i] >= 0.0) {
                out.push(self.phase[i]);
            }
        }
        if out.is_empty() {
            out.push(self.phase[0]);
        }
        out
    }
}

fn check_nonnegative(grid: &LevelGrid, strict: bool) -> Result<()> {
    let bad = grid.amp.iter().any(|&a| if strict { a <= 0.0 } else { a < 0.0 });
    if bad {
        let what = if strict { "positive" } else { "nonnegative" };
        return Err(invalid(format!("amplitude must be {what}")));
    }
    Ok(())
}

/// g₀(t) = ∫_{φ(s) ≤ t} a(s) ds at each requested level.
pub fn sublevel_distribution(
    phase: &PeriodicFunction,
    amplitude: &PeriodicFunction,
    t: &[f64],
    settings: &Settings,
) -> Result<Vec<f64>> {
    let grid = LevelGrid::new(phase, amplitude, settings.sublevel_nodes)?;
    check_nonnegative(&grid, false)?;
    Ok(t.par_iter().map(|&x| grid.sublevel(x)).collect())
}

/// Derivative of g₀ at a regular value t: the co-area integral ∮_{φ = t} a / |φ′|.
pub fn coarea_density(
    phase: &PeriodicFunction,
    amplitude: &PeriodicFunction,
    t: f64,
    nodes: usize,
) -> Result<f64> {
    Ok(LevelGrid::new(phase, amplitude, nodes)?.coarea(t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub t0: f64,
    /// β in |g₀(t₀+h) − g₀(t₀−h)| ≈ C h^β.
    pub beta: f64,
    pub constant: f64,
    pub residual: f64,
    pub steps: Vec<f64>,
    pub jumps: Vec<f64>,
}

fn default_steps(range: f64) -> Vec<f64> {
    if range < 1e-8 {
        (4..=12).map(|k| 2f64.powi(-k)).collect()
    } else {
        (3..=10).map(|k| range * 2f64.powi(-k)).collect()
    }
}

fn holder_on(grid: &LevelGrid, t0: f64, steps: &[f64], settings: &Settings) -> Result<HolderFit> {
    let jumps: Vec<f64> = steps.iter().map(|&h| (grid.sublevel(t0 + h) - grid.sublevel(t0 - h)).abs()).collect();
    let pts: Vec<(f64, f64)> =
        steps.iter().zip(&jumps).filter(|(_, &j)| j > 0.0).map(|(&h, &j)| (h.ln(), j.ln())).collect();
    if pts.len() < 3 {
        return Err(Error::NoisyFit { residual: f64::INFINITY, limit: settings.fit_residual_limit });
    }
    let (beta, icpt, res) = linear_fit(&pts);
    if res > settings.fit_residual_limit {
        return Err(Error::NoisyFit { residual: res, limit: settings.fit_residual_limit });
    }
    Ok(HolderFit { t0, beta, constant: icpt.exp(), residual: res, steps: steps.to_vec(), jumps })
}

/// Hölder exponent of g₀ at t₀; default steps are dyadic fractions of the phase range.
pub fn holder_exponent(
    phase: &PeriodicFunction,
    amplitude: &PeriodicFunction,
    t0: f64,
    steps: Option<&[f64]>,
    settings: &Settings,
) -> Result<HolderFit> {
    let grid = LevelGrid::new(phase, amplitude, settings.sublevel_nodes)?;
    check_nonnegative(&grid, false)?;
    let (lo, hi) = grid.range();
    let steps = steps.map(|s| s.to_vec()).unwrap_or_else(|| default_steps(hi - lo));
    if steps.iter().any(|&h| !(h > 0.0)) {
        return Err(invalid("Hölder steps must be positive"));
    }
    holder_on(&grid, t0, &steps, settings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseVerdict {
    SingleCriticalValue,
    MultipleCriticalValues,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantPhaseReport {
    pub verdict: PhaseVerdict,
    /// Hölder fits at each distinct extremum value.
    pub findings: Vec<HolderFit>,
}

const CLUSTER_TOL: f64 = 1e-8;
const CRITICAL_BETA: f64 = 0.6;

/// Whether the phase has exactly one critical value, judged from the Hölder exponent of g₀ at
/// every extremum value of the sampled phase.
pub fn detect_constant_phase(
    phase: &PeriodicFunction,
    amplitude: &PeriodicFunction,
    settings: &Settings,
) -> Result<ConstantPhaseReport> {
    let grid = LevelGrid::new(phase, amplitude, settings.sublevel_nodes)?;
    check_nonnegative(&grid, true)?;
    let (lo, hi) = grid.range();
    let steps = default_steps(hi - lo);
    let mut vals = grid.extremum_values();
    vals.sort_by(f64::total_cmp);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for v in vals {
        match clusters.last_mut() {
            Some(c) if v - c[c.len() - 1] <= CLUSTER_TOL => c.push(v),
            _ => clusters.push(vec![v]),
        }
    }
    let centres: Vec<f64> = clusters.iter().map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let findings: Vec<HolderFit> =
        centres.par_iter().map(|&t0| holder_on(&grid, t0, &steps, settings)).collect::<Result<_>>()?;
    let critical: Vec<f64> = findings.iter().filter(|f| f.beta <= CRITICAL_BETA).map(|f| f.t0).collect();
    let single = !critical.is_empty() && critical.iter().all(|&t| (t - critical[0]).abs() <= CLUSTER_TOL);
    let verdict = if single { PhaseVerdict::SingleCriticalValue } else { PhaseVerdict::MultipleCriticalValues };
    Ok(ConstantPhaseReport { verdict, findings })
}

/// I(λ) reconstructed as iλ ĝ₀(λ) − ĝ₁(λ) from the sublevel distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IbpCheck {
    pub lambda: f64,
    pub direct: [f64; 2],
    pub reconstructed: [f64; 2],
    /// |direct − reconstructed| / max(|direct|, ∮ a).
    pub relative_error: f64,
}

/// Smooth step: 0 for x ≤ 0, 1 for x ≥ 1.
fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    a / (a + b)
}

fn smooth_step_derivative(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / x).exp();
    let b = (-1.0 / (1.0 - x)).exp();
    let da = a / (x * x);
    let db = -b / ((1.0 - x) * (1.0 - x));
    (da * b - a * db) / ((a + b) * (a + b))
}

/// ∫_a^b e^{−iλt} dt.
fn exp_integral(lambda: f64, a: f64, b: f64) -> Complex64 {
    if lambda == 0.0 {
        return Complex64::new(b - a, 0.0);
    }
    let i = Complex64::new(0.0, 1.0);
    ((-i * lambda * b).exp() - (-i * lambda * a).exp()) / (-i * lambda)
}

/// Checks I(λ) = iλ ĝ₀(λ) − ĝ₁(λ) with g₀ = ψ G, g₁ = ψ′ G, G(t) = ∫_{φ ≤ t} a and ψ = 1 near the
/// range of φ, falling smoothly to 0 above it.
pub fn ibp_identity(
    phase: &PeriodicFunction,
    amplitude: &PeriodicFunction,
    lambda: f64,
    nodes: usize,
    settings: &Settings,
) -> Result<IbpCheck> {
    let direct = oscillatory_integral(phase, amplitude, &[lambda], settings)?[0];
    let grid = LevelGrid::new(phase, amplitude, nodes)?;
    check_nonnegative(&grid, false)?;
    let (lo, hi) = grid.range();
    let width = (hi - lo).max(1e-3);
    let b0 = hi + 0.25 * width;
    let b1 = b0 + 0.5 * width;
    let psi = |t: f64| smooth_step((b1 - t) / (b1 - b0));
    let dpsi = |t: f64| -smooth_step_derivative((b1 - t) / (b1 - b0)) / (b1 - b0);
    let mass = grid.mass();
    let e = |t: f64| Complex64::from_polar(1.0, -lambda * t);

    // ∫ e^{−iλt} G(t) dt over the range, split at extremum values and in cosine variables so the
    // square-root behaviour of G at critical values does not spoil the quadrature
    let mut cuts = grid.extremum_values();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|b, a| (*b - *a).abs() <= 1e-12 * width);
    let mut g0_hat = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let panels = ((lambda * (b - a)).abs() / 2.0).ceil().max(4.0) as usize;
        let re = quad::composite(quad::gl16(), 0.0, PI, panels, |u| {
            let t = a + half * (1.0 - u.cos());
            (e(t) * grid.sublevel(t)).re * half * u.sin()
        });
        let im = quad::composite(quad::gl16(), 0.0, PI, panels, |u| {
            let t = a + half * (1.0 - u.cos());
            (e(t) * grid.sublevel(t)).im * half * u.sin()
        });
        g0_hat += Complex64::new(re, im);
    }
    // above the range G = ∮ a
    let taper_panels = ((lambda * (b1 - b0)).abs() / 2.0).ceil().max(8.0) as usize;
    let taper = |g: &dyn Fn(f64) -> f64, part: fn(Complex64) -> f64| {
        quad::composite(quad::gl16(), b0, b1, taper_panels, |t| part(e(t)) * g(t))
    };
    let re_part = |c: Complex64| c.re;
    let im_part = |c: Complex64| c.im;
    g0_hat += mass * exp_integral(lambda, hi, b0);
    g0_hat += mass * Complex64::new(taper(&psi, re_part), taper(&psi, im_part));
    let g1_hat = mass * Complex64::new(taper(&dpsi, re_part), taper(&dpsi, im_part));
    let rec = Complex64::new(0.0, lambda) * g0_hat - g1_hat;
    Ok(IbpCheck {
        lambda,
        direct: [direct.re, direct.im],
        reconstructed: [rec.re, rec.im],
        relative_error: (direct - rec).norm() / direct.norm().max(mass.abs()),
    })
}
