//! One function per subcommand. Each writes its artifacts under the output directory and prints
//! a short summary on stdout.

use crate::config::{Command, RunConfig};
use nearcircle::deform::{melnikov, s_grid};
use nearcircle::export::write_csv;
use nearcircle::loops::loop_profile;
use nearcircle::osc::{decay_exponent, detect_constant_phase, sublevel_distribution, PeriodicFunction};
use nearcircle::spectrum::{bands_in, hear_bounces, mather, mm_fit, spectrum_report};
use nearcircle::verify::{verify, VerifyOptions};
use nearcircle::{Error, Result};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("cannot write {}: {e}", path.display()))
}

fn create(cfg: &RunConfig, name: &str) -> Result<(BufWriter<File>, std::path::PathBuf)> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
    let path = cfg.out.join(name);
    let f = File::create(&path).map_err(|e| io_err(&path, e))?;
    Ok((BufWriter::new(f), path))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(cfg: &RunConfig, name: &str, value: &T) -> Result<()> {
    let (mut w, path) = create(cfg, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(&path, e))?;
    w.write_all(b"\n").map_err(|e| io_err(&path, e))?;
    finish(w, &path)
}

fn with_csv(cfg: &RunConfig, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let (mut w, path) = create(cfg, name)?;
    body(&mut w)?;
    finish(w, &path)
}

/// Runs the command; `Ok(false)` means the invariant suite found a failure.
pub fn run(cfg: &RunConfig) -> Result<bool> {
    let done = match cfg.command {
        Command::Spectrum => spectrum(cfg),
        Command::Loops => loops(cfg),
        Command::Melnikov => melnikov_cmd(cfg),
        Command::Mather => mather_cmd(cfg),
        Command::MmFit => mm_fit_cmd(cfg),
        Command::Hear => hear(cfg),
        Command::Osc => osc(cfg),
        Command::Verify => return verify_cmd(cfg),
    };
    done.map(|()| true)
}

fn spectrum(cfg: &RunConfig) -> Result<()> {
    let curve = cfg.curve()?;
    let settings = cfg.settings_for(&curve);
    let report = spectrum_report(&curve, cfg.q_max, &settings)?;
    let (mut w, path) = create(cfg, "spectrum.json")?;
    report.write_json(&mut w)?;
    w.write_all(b"\n").map_err(|e| io_err(&path, e))?;
    finish(w, &path)?;
    with_csv(cfg, "spectrum.csv", |w| report.write_csv(w))?;
    println!("perimeter {:.12}", curve.perimeter());
    println!("{:>4} {:>20} {:>20} {:>12}", "q", "t_q", "T_q", "width");
    for b in &report.bands {
        println!("{:>4} {:>20.15} {:>20.15} {:>12.3e}", b.q, b.lower, b.upper, b.width());
    }
    println!("gaps monotone: {}, bands separated: {}", report.monotone, report.separated);
    println!("integrability: {}", serde_json::to_string(&report.integrability).unwrap_or_default().trim_matches('"'));
    Ok(())
}

fn loops(cfg: &RunConfig) -> Result<()> {
    let curve = cfg.curve()?;
    let settings = cfg.settings_for(&curve);
    for q in cfg.q_min..=cfg.q_max {
        let p = loop_profile(&curve, q, settings.loop_nodes, &settings)?;
        let rows = (0..p.len()).map(|i| vec![p.s[i], p.phi[i], p.length[i], p.theta_tilde[i], p.derivative[i]]);
        with_csv(cfg, &format!("loops_q{q}.csv"), |w| {
            write_csv(w, &["s", "phi_q", "L_q", "theta_tilde_q", "dL_q"], rows)
        })?;
        println!(
            "q = {q}: L_q in [{:.15}, {:.15}], max residual {:.3e}",
            p.min_length(),
            p.max_length(),
            p.max_residual
        );
    }
    Ok(())
}

fn melnikov_cmd(cfg: &RunConfig) -> Result<()> {
    let curve = cfg.curve()?;
    let settings = cfg.settings_for(&curve);
    let s = s_grid(&curve, settings.loop_nodes);
    for q in cfg.q_min..=cfg.q_max {
        let m = melnikov(&curve, q, &s, &settings)?;
        with_csv(cfg, &format!("melnikov_q{q}.csv"), |w| m.write_csv(w))?;
        println!("q = {q}: sup |M_q| = {:.6e} at τ = {}", m.sup_norm(), m.tau);
    }
    Ok(())
}

/// Coprime pairs 1 ≤ p ≤ q/2, ordered by q then p.
fn rotation_pairs(q_min: usize, q_max: usize) -> Vec<(usize, usize)> {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    (q_min..=q_max).flat_map(|q| (1..=q / 2).filter(move |&p| gcd(p, q) == 1).map(move |p| (p, q))).collect()
}

fn mather_cmd(cfg: &RunConfig) -> Result<()> {
    use rayon::prelude::*;
    let curve = cfg.curve()?;
    let settings = cfg.settings_for(&curve);
    let pairs = rotation_pairs(cfg.q_min, cfg.q_max);
    let betas: Vec<f64> = pairs.par_iter().map(|&(p, q)| mather(&curve, p, q, &settings)).collect::<Result<_>>()?;
    let rows = pairs.iter().zip(&betas).map(|(&(p, q), &b)| vec![p as f64, q as f64, p as f64 / q as f64, b]);
    with_csv(cfg, "mather.csv", |w| write_csv(w, &["p", "q", "rho", "beta"], rows))?;
    for (&(p, q), b) in pairs.iter().zip(&betas) {
        println!("β({p}/{q}) = {b:.15}");
    }
    Ok(())
}

fn mm_fit_cmd(cfg: &RunConfig) -> Result<()> {
    let curve = cfg.curve()?;
    let settings = cfg.settings_for(&curve);
    let bands = bands_in(&curve, cfg.q_min.max(10), cfg.q_max, &settings)?;
    let fit = mm_fit(&bands, &curve)?;
    write_json(cfg, "mm_fit.json", &fit)?;
    println!("c1 = {:.10}, predicted {:.10}, relative error {:.3e}", fit.c1, fit.predicted, fit.relative_error);
    Ok(())
}

fn read_lengths(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        for tok in body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let v: f64 = tok.parse().map_err(|_| Error::Config {
                line: i + 1,
                message: format!("`{tok}` is not a number"),
            })?;
            out.push(v);
        }
    }
    Ok(out)
}

fn hear(cfg: &RunConfig) -> Result<()> {
    let path = cfg.lengths.as_deref().expect("validated");
    let lengths = read_lengths(path)?;
    let perimeter = cfg.perimeter.expect("validated");
    let heard = hear_bounces(&lengths, perimeter, cfg.settings.hear_q0)?;
    write_json(cfg, "hear.json", &heard)?;
    for b in &heard {
        println!("q = {}: {} lengths in [{:.12}, {:.12}]", b.q, b.values.len(), b.values[0], b.values[b.values.len() - 1]);
    }
    Ok(())
}

#[derive(Serialize)]
struct OscSummary {
    q: usize,
    /// The phase is L_q − T_q.
    t_q_max: f64,
    lambda_min: f64,
    lambda_max: f64,
    exponent: Option<f64>,
    constant: Option<f64>,
    residual: f64,
    fast_decay: bool,
    constant_phase: nearcircle::osc::ConstantPhaseReport,
}

fn osc(cfg: &RunConfig) -> Result<()> {
    let curve = cfg.curve()?;
    let settings = cfg.settings_for(&curve);
    if !settings.loop_nodes.is_power_of_two() {
        return Err(Error::InvalidArgument("osc needs a power-of-two --nodes".into()));
    }
    let (lmin, lmax) = cfg.lambda_range;
    let amp = PeriodicFunction::constant(curve.perimeter(), 1.0);
    for q in cfg.q_min..=cfg.q_max {
        let p = loop_profile(&curve, q, settings.loop_nodes, &settings)?;
        let top = p.max_length();
        let phase = PeriodicFunction::from_samples(curve.perimeter(), p.length.iter().map(|l| l - top).collect())?;
        let fit = decay_exponent(&phase, &amp, lmin, lmax, &settings)?;
        with_csv(cfg, &format!("osc_decay_q{q}.csv"), |w| fit.write_csv(w))?;

        let (lo, hi) = (p.min_length() - top, 0.0);
        let pad = 0.1 * (hi - lo).max(1e-6);
        let levels: Vec<f64> = (0..=256).map(|i| lo - pad + (hi - lo + 2.0 * pad) * i as f64 / 256.0).collect();
        let g0 = sublevel_distribution(&phase, &amp, &levels, &settings)?;
        with_csv(cfg, &format!("osc_sublevel_q{q}.csv"), |w| {
            write_csv(w, &["t", "g0"], levels.iter().zip(&g0).map(|(&t, &g)| vec![t, g]))
        })?;

        let constant_phase = detect_constant_phase(&phase, &amp, &settings)?;
        let summary = OscSummary {
            q,
            t_q_max: top,
            lambda_min: lmin,
            lambda_max: lmax,
            exponent: fit.exponent,
            constant: fit.constant,
            residual: fit.residual,
            fast_decay: fit.fast_decay,
            constant_phase,
        };
        write_json(cfg, &format!("osc_q{q}.json"), &summary)?;
        match fit.exponent {
            Some(m) => println!("q = {q}: |I(λ)| ~ λ^{m:.4} over [{lmin}, {lmax}]"),
            None => println!("q = {q}: decay faster than any fitted power over [{lmin}, {lmax}]"),
        }
    }
    Ok(())
}

fn verify_cmd(cfg: &RunConfig) -> Result<bool> {
    let curve = cfg.curve()?;
    let settings = cfg.settings_for(&curve);
    let options = VerifyOptions { q_max: cfg.q_max, ..VerifyOptions::default() };
    let report = verify(&curve, &options, &settings)?;
    write_json(cfg, "verify.json", &report)?;
    for c in &report.checks {
        let status = if c.skipped {
            "skip"
        } else if c.passed {
            "pass"
        } else {
            "FAIL"
        };
        println!("{status} {:<22} {:>12.4e}  {}", c.name, c.value, c.detail);
    }
    Ok(report.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coprime_pairs() {
        assert_eq!(rotation_pairs(2, 6), vec![(1, 2), (1, 3), (1, 4), (1, 5), (2, 5), (1, 6)]);
    }

    #[test]
    fn lengths_file_formats() {
        let dir = std::env::temp_dir().join(format!("nearcircle-lengths-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("l.txt");
        std::fs::write(&p, "# lengths\n1.5, 2.5\n3.5 4.5\n").unwrap();
        assert_eq!(read_lengths(&p).unwrap(), vec![1.5, 2.5, 3.5, 4.5]);
        std::fs::write(&p, "1.0\nx\n").unwrap();
        assert!(matches!(read_lengths(&p), Err(Error::Config { line: 2, .. })));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
