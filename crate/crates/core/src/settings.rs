use serde::{Deserialize, Serialize};

/// Every numerical knob of the toolkit in one place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    /// Equispaced nodes of the boundary tables (power of two, >= 256).
    pub grid_size: usize,
    /// Nodes of the s-grid used by loop profiles.
    pub loop_nodes: usize,
    /// Largest max|kappa - 1| accepted by the shooting construction.
    pub circularity_guard: f64,
    /// Convergence tolerance (radians) of the next-bounce solver.
    pub step_tol: f64,
    pub step_max_iter: usize,
    /// Shooting residual, relative to the perimeter.
    pub shoot_tol: f64,
    pub shoot_max_iter: usize,
    /// Lower end of the shooting bracket.
    pub shoot_lower: f64,
    /// |D| below this counts as zero when hunting critical points.
    pub critical_tol: f64,
    /// Runs of |D| < critical_tol spanning more than this many cells are degenerate.
    pub degenerate_run_cells: usize,
    /// Critical values closer than this are merged.
    pub dedup_value: f64,
    pub birkhoff_tol: f64,
    pub birkhoff_max_sweeps: usize,
    /// Number of Lazutkin phase offsets tried by the Birkhoff ascent.
    pub birkhoff_seeds: usize,
    /// Over-relaxation factor of the coordinate ascent (1 = plain Gauss-Seidel).
    pub birkhoff_relaxation: f64,
    /// Compare band maxima against Birkhoff maximization.
    pub crosscheck_birkhoff: bool,
    /// Band width tolerance for the integrability verdict, relative to the perimeter.
    pub tol_width_rel: f64,
    pub tol_mono: f64,
    /// Fixed q0 for the bounce partitioner; None derives it from the disk gaps.
    pub hear_q0: Option<usize>,
    pub osc_rel_tol: f64,
    pub osc_max_nodes: usize,
    pub osc_min_nodes: usize,
    /// Sampling density used for sublevel sets and Hölder fits.
    pub sublevel_nodes: usize,
    pub fit_residual_limit: f64,
    /// Samples per octave in decay fits.
    pub decay_samples: usize,
    /// Worker threads; 0 lets rayon decide.
    pub workers: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            grid_size: 1024,
            loop_nodes: 512,
            circularity_guard: 0.6,
            step_tol: 1e-14,
            step_max_iter: 200,
            shoot_tol: 1e-14,
            shoot_max_iter: 200,
            shoot_lower: 1e-8,
            critical_tol: 1e-10,
            degenerate_run_cells: 3,
            dedup_value: 1e-9,
            birkhoff_tol: 1e-12,
            birkhoff_max_sweeps: 100_000,
            birkhoff_seeds: 4,
            birkhoff_relaxation: 1.0,
            crosscheck_birkhoff: true,
            tol_width_rel: 1e-7,
            tol_mono: 0.0,
            hear_q0: None,
            osc_rel_tol: 1e-9,
            osc_max_nodes: 1 << 20,
            osc_min_nodes: 64,
            sublevel_nodes: 1 << 14,
            fit_residual_limit: 0.1,
            decay_samples: 64,
            workers: 0,
        }
    }
}
