//! Length-spectrum bands, gap diagnostics, the Mather β-function and the bounce partitioner.

use crate::error::{invalid, Error, Result};
use crate::export::fmt_f64;
use crate::geometry::BoundaryCurve;
use crate::loops::{birkhoff_orbit, critical_points, loop_profile, CriticalKind, CriticalPoint};
use crate::settings::Settings;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

/// The (1, q) band [t_q, T_q] of the length spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBand {
    pub q: usize,
    /// t_q, the smallest critical value of L_q.
    #[serde(rename = "t_q")]
    pub lower: f64,
    /// T_q, the largest critical value of L_q.
    #[serde(rename = "T_q")]
    pub upper: f64,
    /// Distinct critical values, sorted.
    pub values: Vec<f64>,
    /// Some critical point is a flat run or an inflection.
    pub degenerate: bool,
    #[serde(skip)]
    pub critical_points: Vec<CriticalPoint>,
    /// Maximal (1, q) action found by Birkhoff ascent, when the cross-check ran.
    pub birkhoff_max: Option<f64>,
}

impl SpectrumBand {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn disk_length(q: usize) -> f64 {
    2.0 * q as f64 * (PI / q as f64).sin()
}

/// Builds the q-th band from the critical values of the sampled loop function.
pub fn band(curve: &BoundaryCurve, q: usize, settings: &Settings) -> Result<SpectrumBand> {
    if q < 2 {
        return Err(invalid(format!("q must be at least 2, got {q}")));
    }
    let profile = loop_profile(curve, q, settings.loop_nodes, settings)?;
    let cps = critical_points(curve, &profile, settings)?;
    let mut values: Vec<f64> = Vec::new();
    let mut degenerate = false;
    for cp in &cps {
        values.push(cp.value);
        if cp.kind == CriticalKind::Degenerate {
            degenerate = true;
        }
        if let Some((lo, hi)) = cp.value_range {
            values.push(lo);
            values.push(hi);
        }
    }
    if values.is_empty() {
        log::warn!("no critical values for q = {q}; falling back to the sampled extremes");
        values.push(profile.min_length());
        values.push(profile.max_length());
    }
    values.sort_by(f64::total_cmp);
    values.dedup_by(|b, a| (*b - *a).abs() <= settings.dedup_value);
    let lower = values[0];
    let upper = values[values.len() - 1];
    let birkhoff_max = if settings.crosscheck_birkhoff {
        let o = birkhoff_orbit(curve, 1, q, settings)?;
        if (o.action - upper).abs() > 1e-8 {
            log::warn!(
                "q = {q}: band maximum {upper} differs from Birkhoff maximum {} by {:e}",
                o.action,
                (o.action - upper).abs()
            );
        }
        Some(o.action)
    } else {
        None
    };
    Ok(SpectrumBand { q, lower, upper, values, degenerate, critical_points: cps, birkhoff_max })
}

/// Bands for q = 2..=q_max, computed in parallel.
pub fn bands(curve: &BoundaryCurve, q_max: usize, settings: &Settings) -> Result<Vec<SpectrumBand>> {
    bands_in(curve, 2, q_max, settings)
}

pub fn bands_in(curve: &BoundaryCurve, q_min: usize, q_max: usize, settings: &Settings) -> Result<Vec<SpectrumBand>> {
    if q_min < 2 || q_max < q_min {
        return Err(invalid(format!("invalid q range {q_min}..={q_max}")));
    }
    (q_min..=q_max).into_par_iter().map(|q| band(curve, q, settings)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrability {
    RationallyIntegrableWithinTol,
    SpectrumFluctuates,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub bands: Vec<SpectrumBand>,
    /// T_{q+1} − T_q for consecutive bands.
    pub gaps: Vec<f64>,
    /// t_{q+1} − T_q for consecutive bands.
    pub margins: Vec<f64>,
    /// The gap sequence is strictly decreasing (up to `tol_mono`).
    pub monotone: bool,
    /// Every margin exceeds the width of the band below it.
    pub separated: bool,
    pub integrability: Integrability,
    pub tol_width: f64,
    pub tol_mono: f64,
}

impl SpectrumReport {
    pub fn band(&self, q: usize) -> Option<&SpectrumBand> {
        self.bands.iter().find(|b| b.q == q)
    }

    pub fn write_json(&self, out: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(|e| invalid(format!("json export failed: {e}")))
    }

    /// Columns q, t_q, T_q, gap, margin; the last band has empty gap and margin.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let io = |e: csv::Error| invalid(format!("csv export failed: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["q", "t_q", "T_q", "gap", "margin"]).map_err(io)?;
        for (i, b) in self.bands.iter().enumerate() {
            let opt = |v: Option<&f64>| v.map(|&x| fmt_f64(x)).unwrap_or_default();
            w.write_record([
                b.q.to_string(),
                fmt_f64(b.lower),
                fmt_f64(b.upper),
                opt(self.gaps.get(i)),
                opt(self.margins.get(i)),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| invalid(format!("csv export failed: {e}")))
    }
}

/// Gap sequence, separation margins and verdicts for bands over a contiguous q-range.
pub fn gap_analysis(bands: &[SpectrumBand], settings: &Settings) -> Result<SpectrumReport> {
    if bands.is_empty() {
        return Err(invalid("no bands to analyse"));
    }
    let mut bands = bands.to_vec();
    bands.sort_by_key(|b| b.q);
    if bands.windows(2).any(|w| w[1].q != w[0].q + 1) {
        return Err(invalid("bands must cover a contiguous range of q"));
    }
    let gaps: Vec<f64> = bands.windows(2).map(|w| w[1].upper - w[0].upper).collect();
    let margins: Vec<f64> = bands.windows(2).map(|w| w[1].lower - w[0].upper).collect();
    let monotone = gaps.windows(2).all(|g| g[1] - g[0] < settings.tol_mono);
    let separated = bands.iter().zip(&margins).all(|(b, &m)| m > b.width());
    let perimeter_hint = bands.last().map(|b| b.upper).unwrap_or(1.0);
    let mut report = SpectrumReport {
        bands,
        gaps,
        margins,
        monotone,
        separated,
        integrability: Integrability::Inconclusive,
        tol_width: settings.tol_width_rel * perimeter_hint,
        tol_mono: settings.tol_mono,
    };
    report.integrability = classify_integrability(&report, report.tol_width, settings.tol_mono);
    Ok(report)
}

/// Full report for q = 2..=q_max with the width tolerance scaled by the true perimeter.
pub fn spectrum_report(curve: &BoundaryCurve, q_max: usize, settings: &Settings) -> Result<SpectrumReport> {
    let bands = bands(curve, q_max, settings)?;
    let mut report = gap_analysis(&bands, settings)?;
    report.tol_width = settings.tol_width_rel * curve.perimeter();
    report.integrability = classify_integrability(&report, report.tol_width, report.tol_mono);
    Ok(report)
}

/// Rational integrability within tolerance, or the fluctuation pattern 0 < T_q − t_q < t_{q+1} − T_q.
pub fn classify_integrability(report: &SpectrumReport, tol_width: f64, _tol_mono: f64) -> Integrability {
    let wide: Vec<usize> =
        (0..report.bands.len()).filter(|&i| report.bands[i].q >= 3 && report.bands[i].width() > tol_width).collect();
    if wide.is_empty() {
        return Integrability::RationallyIntegrableWithinTol;
    }
    let fluctuates = wide.iter().any(|&i| {
        let w = report.bands[i].width();
        report.margins.get(i).is_some_and(|&m| w > 0.0 && w < m)
    });
    if fluctuates {
        Integrability::SpectrumFluctuates
    } else {
        Integrability::Inconclusive
    }
}

/// Gap between consecutive disk lengths, 2(q+1) sin(π/(q+1)) − 2q sin(π/q).
pub fn disk_gap(q: usize) -> f64 {
    disk_length(q + 1) - disk_length(q)
}

/// Smallest q ≥ 2 with (q+1)⁻³ < disk_gap(q).
pub fn derived_q0() -> usize {
    (2..).find(|&q| ((q + 1) as f64).powi(-3) < disk_gap(q)).expect("disk gaps decay like q⁻³")
}

/// Gap threshold that closes the band labelled q.
pub fn hear_threshold(q: usize, q0: usize) -> f64 {
    if q <= q0 {
        disk_gap(q0) / 10.0
    } else {
        ((q + 1) as f64).powi(-3) / 10.0
    }
}

/// A group of lengths assigned to one bounce number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeardBand {
    pub q: usize,
    pub values: Vec<f64>,
}

/// Splits a set of lengths below the perimeter into bands labelled q = 2, 3, …
///
/// Walks up from the smallest value and closes the current band at the first gap reaching the
/// threshold for its label. A gap within 10% of the threshold is reported, not guessed.
pub fn hear_bounces(lengths: &[f64], perimeter: f64, q0: Option<usize>) -> Result<Vec<HeardBand>> {
    if lengths.is_empty() {
        return Err(invalid("no lengths given"));
    }
    if !(perimeter.is_finite() && perimeter > 0.0) {
        return Err(invalid(format!("perimeter must be positive, got {perimeter}")));
    }
    if let Some(&bad) = lengths.iter().find(|&&v| !(v > 0.0 && v < perimeter)) {
        return Err(invalid(format!("length {bad} is not inside (0, {perimeter})")));
    }
    let q0 = q0.unwrap_or_else(derived_q0);
    let mut sorted = lengths.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = vec![HeardBand { q: 2, values: vec![sorted[0]] }];
    for w in sorted.windows(2) {
        let current = out.last_mut().expect("non-empty");
        let gap = w[1] - w[0];
        let threshold = hear_threshold(current.q, q0);
        if (gap - threshold).abs() <= 0.1 * threshold {
            return Err(Error::PartitionAmbiguous { length: w[0], gap, threshold });
        }
        if gap >= threshold {
            let q = current.q + 1;
            out.push(HeardBand { q, values: vec![w[1]] });
        } else {
            current.values.push(w[1]);
        }
    }
    Ok(out)
}

/// β(p/q) = −T_{p,q}/q from the maximal Birkhoff orbit.
pub fn mather(curve: &BoundaryCurve, p: usize, q: usize, settings: &Settings) -> Result<f64> {
    Ok(-birkhoff_orbit(curve, p, q, settings)?.action / q as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmFit {
    /// Fitted coefficient of q⁻² in ℓ − T_q.
    pub c1: f64,
    /// Fitted coefficient of q⁻⁴.
    pub c2: f64,
    /// (1/24)(∮ κ^{2/3} ds)³.
    pub predicted: f64,
    pub relative_error: f64,
    /// Log-log slope of ℓ − T_q − c1 q⁻² against q, near −4 when the expansion holds.
    pub residual_order: Option<f64>,
    pub q_min: usize,
    pub q_max: usize,
}

/// Least-squares fit of ℓ − T_q = c1 q⁻² + c2 q⁻⁴ over bands with q ≥ 10.
pub fn mm_fit(bands: &[SpectrumBand], curve: &BoundaryCurve) -> Result<MmFit> {
    let pts: Vec<(f64, f64)> = bands
        .iter()
        .filter(|b| b.q >= 10)
        .map(|b| (b.q as f64, curve.perimeter() - b.upper))
        .collect();
    if pts.len() < 3 {
        return Err(invalid("the asymptotic fit needs at least three bands with q >= 10"));
    }
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(q, y) in &pts {
        let u = q.powi(-2);
        let v = q.powi(-4);
        a11 += u * u;
        a12 += u * v;
        a22 += v * v;
        b1 += u * y;
        b2 += v * y;
    }
    let det = a11 * a22 - a12 * a12;
    let c1 = (b1 * a22 - b2 * a12) / det;
    let c2 = (a11 * b2 - a12 * b1) / det;
    let predicted = curve.lazutkin_perimeter()?.powi(3) / 24.0;
    let logs: Vec<(f64, f64)> = pts
        .iter()
        .map(|&(q, y)| (q.ln(), (y - c1 * q.powi(-2)).abs()))
        .filter(|&(_, r)| r > 0.0)
        .map(|(x, r)| (x, r.ln()))
        .collect();
    let residual_order = (logs.len() >= 3).then(|| {
        let n = logs.len() as f64;
        let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(MmFit {
        c1,
        c2,
        predicted,
        relative_error: (c1 - predicted).abs() / predicted.abs(),
        residual_order,
        q_min: bands.iter().filter(|b| b.q >= 10).map(|b| b.q).min().unwrap_or(10),
        q_max: bands.iter().map(|b| b.q).max().unwrap_or(10),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FourierProfile;

    fn quick() -> Settings {
        Settings { loop_nodes: 128, ..Settings::default() }
    }

    fn flat_band(q: usize, lower: f64, upper: f64) -> SpectrumBand {
        SpectrumBand {
            q,
            lower,
            upper,
            values: vec![lower, upper],
            degenerate: false,
            critical_points: vec![],
            birkhoff_max: None,
        }
    }

    #[test]
    fn disk_band_is_degenerate() {
        let c = BoundaryCurve::disk(1024).unwrap();
        let b = band(&c, 4, &quick()).unwrap();
        assert!(b.degenerate);
        assert_eq!(b.values.len(), 1);
        assert!((b.upper - 8.0 * (PI / 4.0).sin()).abs() < 1e-12);
        assert!((b.birkhoff_max.unwrap() - b.upper).abs() < 1e-12);
    }

    #[test]
    fn ellipse_bands() {
        let e: f64 = 0.1;
        let c = BoundaryCurve::ellipse(e, 1024).unwrap();
        let b2 = band(&c, 2, &quick()).unwrap();
        assert!((b2.lower - 4.0 * (1.0 - e * e).sqrt()).abs() < 1e-10);
        assert!((b2.upper - 4.0).abs() < 1e-10);
        let b5 = band(&c, 5, &quick()).unwrap();
        assert!(b5.width() <= 1e-8);
    }

    #[test]
    fn disk_gap_closed_form() {
        assert!((disk_gap(2) - (3.0 * 3f64.sqrt() - 4.0)).abs() < 1e-15);
        assert_eq!(derived_q0(), 2);
        let c = BoundaryCurve::disk(1024).unwrap();
        let bands = bands(&c, 20, &Settings { crosscheck_birkhoff: false, ..quick() }).unwrap();
        let r = gap_analysis(&bands, &Settings::default()).unwrap();
        assert!(r.monotone);
        assert!(r.separated);
        for (i, g) in r.gaps.iter().enumerate() {
            assert!((g - disk_gap(i + 2)).abs() < 1e-12);
        }
        assert_eq!(r.integrability, Integrability::RationallyIntegrableWithinTol);
    }

    #[test]
    fn classifier_patterns() {
        let mut bands: Vec<SpectrumBand> =
            (2..8).map(|q| flat_band(q, disk_length(q), disk_length(q))).collect();
        let r = gap_analysis(&bands, &Settings::default()).unwrap();
        assert_eq!(r.integrability, Integrability::RationallyIntegrableWithinTol);
        bands[3].lower -= 1e-3;
        let r = gap_analysis(&bands, &Settings::default()).unwrap();
        assert_eq!(r.integrability, Integrability::SpectrumFluctuates);
        // a width larger than the margin above it breaks the pattern
        bands[3].lower -= 1.0;
        let r = gap_analysis(&bands, &Settings::default()).unwrap();
        assert_eq!(r.integrability, Integrability::Inconclusive);
    }

    #[test]
    fn hear_disk_values() {
        let vals: Vec<f64> = (2..=30).map(disk_length).collect();
        let heard = hear_bounces(&vals, 2.0 * PI, None).unwrap();
        assert_eq!(heard.len(), 29);
        for (h, q) in heard.iter().zip(2..) {
            assert_eq!(h.q, q);
            assert_eq!(h.values, vec![disk_length(q)]);
        }
    }

    #[test]
    fn hear_rejects_near_threshold_gap() {
        let q0 = derived_q0();
        let t = hear_threshold(2, q0);
        let vals = [4.0, 4.0 + 1.05 * t, 5.9];
        assert!(matches!(hear_bounces(&vals, 2.0 * PI, None), Err(Error::PartitionAmbiguous { .. })));
        assert!(hear_bounces(&[7.0], 2.0 * PI, None).is_err());
        assert!(hear_bounces(&[], 2.0 * PI, None).is_err());
    }

    #[test]
    fn mather_disk() {
        let c = BoundaryCurve::disk(1024).unwrap();
        let s = Settings::default();
        assert!((mather(&c, 1, 3, &s).unwrap() + 2.0 * (PI / 3.0).sin()).abs() < 1e-12);
        assert!((mather(&c, 2, 5, &s).unwrap() + 2.0 * (2.0 * PI / 5.0).sin()).abs() < 1e-12);
    }

    #[test]
    fn mather_is_convex_on_ellipse() {
        let c = BoundaryCurve::ellipse(0.1, 1024).unwrap();
        let s = Settings::default();
        let pts: Vec<(f64, f64)> =
            (2..=12).map(|q| (1.0 / q as f64, mather(&c, 1, q, &s).unwrap())).collect();
        for w in pts.windows(3) {
            let (x0, y0) = w[2];
            let (x1, y1) = w[1];
            let (x2, y2) = w[0];
            let slope_a = (y1 - y0) / (x1 - x0);
            let slope_b = (y2 - y1) / (x2 - x1);
            assert!(slope_b > slope_a, "convexity fails near ω = {x1}");
        }
    }

    #[test]
    fn mm_fit_disk() {
        let c = BoundaryCurve::disk(1024).unwrap();
        let bands: Vec<SpectrumBand> = (10..=40).map(|q| flat_band(q, disk_length(q), disk_length(q))).collect();
        let fit = mm_fit(&bands, &c).unwrap();
        assert!((fit.predicted - PI.powi(3) / 3.0).abs() < 1e-10);
        assert!(fit.relative_error < 1e-4);
        assert!((fit.residual_order.unwrap() + 4.0).abs() < 0.3);
    }

    #[test]
    fn csv_and_json_export() {
        let bands: Vec<SpectrumBand> = (2..5).map(|q| flat_band(q, disk_length(q), disk_length(q))).collect();
        let r = gap_analysis(&bands, &Settings::default()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("q,t_q,T_q,gap,margin"));
        let mut buf = Vec::new();
        r.write_json(&mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["bands"][0]["q"], 2);
        assert_eq!(v["integrability"], "rationally-integrable-within-tol");
    }

    #[test]
    fn resonant_band_opens() {
        let c = BoundaryCurve::new(FourierProfile::cosine(3, 0.01).into(), 1.0, 1024).unwrap();
        let b = band(&c, 3, &quick()).unwrap();
        assert!(b.width() > 1e-3);
        assert!((b.birkhoff_max.unwrap() - b.upper).abs() < 1e-8);
    }
}
