//! Command-line arguments and their validation into a [`RunConfig`].

use clap::{Args, Parser, Subcommand};
use nearcircle::domain::DomainConfig;
use nearcircle::{BoundaryCurve, Error, Result, Settings};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "nearcircle", version, about = "Length spectra and periodic orbits of nearly circular billiards")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Length-spectrum bands, gaps and integrability verdict.
    Spectrum,
    /// Loop profiles, one CSV per q.
    Loops,
    /// Melnikov function of the domain's deformation.
    Melnikov,
    /// Mather β(p/q) from maximal Birkhoff orbits.
    Mather,
    /// Asymptotic fit of ℓ − T_q.
    MmFit,
    /// Partition a list of lengths into bounce numbers.
    Hear,
    /// Oscillatory-integral diagnostics of a loop function.
    Osc,
    /// Full invariant suite; exit status 3 if any check fails.
    Verify,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Domain config file.
    #[arg(long, global = true)]
    pub domain: Option<PathBuf>,
    /// Largest bounce number.
    #[arg(long, global = true)]
    pub qmax: Option<usize>,
    /// A single bounce number.
    #[arg(long, global = true)]
    pub q: Option<usize>,
    /// Overrides the domain's τ.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Boundary table size (power of two, at least 256).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Footpoints per loop profile.
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    /// Command tolerance: band width (relative to ℓ) for spectrum, shooting residual for loops
    /// and melnikov, quadrature tolerance for osc, Birkhoff step for mather and mm-fit.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// File of lengths for `hear`, separated by whitespace, commas or newlines.
    #[arg(long, global = true)]
    pub lengths: Option<PathBuf>,
    /// Perimeter for `hear`.
    #[arg(long, global = true)]
    pub perimeter: Option<f64>,
    #[arg(long, global = true, default_value_t = 16.0)]
    pub lambda_min: f64,
    #[arg(long, global = true, default_value_t = 4096.0)]
    pub lambda_max: f64,
}

/// A fully validated invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub domain: Option<DomainConfig>,
    pub q_min: usize,
    pub q_max: usize,
    pub tau: Option<f64>,
    pub grid: Option<usize>,
    pub out: PathBuf,
    pub settings: Settings,
    pub lengths: Option<PathBuf>,
    pub perimeter: Option<f64>,
    pub lambda_range: (f64, f64),
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

fn default_qmax(command: Command) -> usize {
    match command {
        Command::MmFit => 40,
        Command::Verify => 10,
        _ => 12,
    }
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let c = &cli.common;
        let command = cli.command;
        let mut settings = Settings::default();

        if let Some(w) = c.workers {
            settings.workers = w;
        }
        if let Some(g) = c.grid {
            if g < 256 || !g.is_power_of_two() {
                return Err(bad(format!("--grid must be a power of two >= 256, got {g}")));
            }
            settings.grid_size = g;
        }
        if let Some(n) = c.nodes {
            if n < 64 {
                return Err(bad(format!("--nodes must be at least 64, got {n}")));
            }
            settings.loop_nodes = n;
        }
        if let Some(t) = c.tau {
            if !(0.0..=1.0).contains(&t) {
                return Err(bad(format!("--tau must lie in [0, 1], got {t}")));
            }
        }
        if let Some(tol) = c.tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(bad(format!("--tol must be positive, got {tol}")));
            }
            match command {
                Command::Spectrum => settings.tol_width_rel = tol,
                Command::Loops | Command::Melnikov => settings.shoot_tol = tol,
                Command::Osc => settings.osc_rel_tol = tol,
                Command::Mather | Command::MmFit => settings.birkhoff_tol = tol,
                Command::Hear | Command::Verify => {
                    return Err(bad("--tol has no meaning for this command"));
                }
            }
        }

        let (q_min, q_max) = match (c.q, c.qmax) {
            (Some(_), Some(_)) => return Err(bad("give either --q or --qmax, not both")),
            (Some(q), None) => (q, q),
            (None, Some(m)) => (2, m),
            (None, None) if matches!(command, Command::Loops | Command::Melnikov | Command::Osc) => (3, 3),
            (None, None) => (2, default_qmax(command)),
        };
        if q_min < 2 {
            return Err(bad(format!("bounce numbers start at 2, got {q_min}")));
        }
        if q_max < q_min {
            return Err(bad(format!("--qmax must be at least 2, got {q_max}")));
        }
        if command == Command::Verify && q_max < 3 {
            return Err(bad("verify needs --qmax >= 3"));
        }
        if command == Command::MmFit && q_max < 12 {
            return Err(bad("mm-fit needs --qmax >= 12 (the fit uses q >= 10)"));
        }

        let (lmin, lmax) = (c.lambda_min, c.lambda_max);
        if command == Command::Osc && !(lmin >= 1.0 && lmax > lmin && lmax.is_finite()) {
            return Err(bad(format!("invalid λ window [{lmin}, {lmax}]")));
        }

        let domain = match (&c.domain, command) {
            (_, Command::Hear) => None,
            (Some(p), _) => Some(DomainConfig::load(p)?),
            (None, _) => return Err(bad("--domain is required")),
        };
        if command == Command::Hear {
            if c.lengths.is_none() {
                return Err(bad("hear needs --lengths"));
            }
            match c.perimeter {
                Some(p) if p.is_finite() && p > 0.0 => {}
                Some(p) => return Err(bad(format!("--perimeter must be positive, got {p}"))),
                None => return Err(bad("hear needs --perimeter")),
            }
        }

        Ok(RunConfig {
            command,
            domain,
            q_min,
            q_max,
            tau: c.tau,
            grid: c.grid,
            out: c.out.clone(),
            settings,
            lengths: c.lengths.clone(),
            perimeter: c.perimeter,
            lambda_range: (lmin, lmax),
        })
    }

    /// The boundary curve, with `--tau` and `--grid` applied over the domain file.
    pub fn curve(&self) -> Result<BoundaryCurve> {
        let mut d = self.domain.clone().ok_or_else(|| bad("--domain is required"))?;
        if let Some(t) = self.tau {
            d.tau = t;
        }
        let grid = self.grid.or(d.grid).unwrap_or(self.settings.grid_size);
        d.build(Some(grid), grid)
    }

    /// Settings with the grid actually used by the curve.
    pub fn settings_for(&self, curve: &BoundaryCurve) -> Settings {
        Settings { grid_size: curve.grid_size(), ..self.settings.clone() }
    }
}
