//! Gauss-Legendre helpers shared by the tables and the residual checks.

use gauss_quad::GaussLegendre;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

/// Node/weight pairs of the n-point Gauss-Legendre rule on [-1, 1].
pub fn rule(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("quadrature order must be positive");
    GaussLegendre::new(n).as_node_weight_pairs().to_vec()
}

/// The 8-point rule used for per-cell integration of the boundary tables.
pub fn gl8() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| rule(8))
}

pub fn gl16() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| rule(16))
}

/// Integrate `f` over [a, b] with a single application of `rule`.
#[inline]
pub fn integrate_with(rule: &[(f64, f64)], a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut acc = 0.0;
    for &(x, w) in rule {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite rule: `panels` equal panels, each integrated with `rule`.
pub fn composite(
    rule: &[(f64, f64)],
    a: f64,
    b: f64,
    panels: usize,
    mut f: impl FnMut(f64) -> f64,
) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let lo = a + h * k as f64;
        acc += integrate_with(rule, lo, lo + h, &mut f);
    }
    acc
}
