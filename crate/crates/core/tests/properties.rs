use nearcircle::billiard::{step, PhasePoint};
use nearcircle::{BoundaryCurve, FourierProfile};
use proptest::prelude::*;
use std::f64::consts::PI;

fn curve(cos: Vec<f64>, sin: Vec<f64>) -> BoundaryCurve {
    let mut c = vec![0.0, 0.0];
    c.extend(cos);
    let mut s = vec![0.0, 0.0];
    s.extend(sin);
    BoundaryCurve::new(FourierProfile::new(c, s).unwrap().into(), 1.0, 512).unwrap()
}

fn small_profile() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-4e-3..4e-3f64, 3), prop::collection::vec(-4e-3..4e-3f64, 3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn theta_s_round_trip((c, s) in small_profile(), u in 0.0..1.0f64) {
        let curve = curve(c, s);
        let x = u * curve.perimeter();
        let back = curve.s_of_theta(curve.theta_of_s(x));
        prop_assert!((back - x).abs() <= 1e-10 * curve.perimeter(), "{x} -> {back}");
    }

    #[test]
    fn twist_and_area((c, s) in small_profile(), u in 0.0..1.0f64, phi in 0.01..(PI - 0.01)) {
        let curve = curve(c, s);
        let p = PhasePoint::new(u * curve.perimeter(), phi);
        let r = step(&curve, p).unwrap();
        let j = r.jacobian;
        prop_assert!(j[0][1] > 0.0);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        prop_assert!((det * r.next.phi.sin() / phi.sin() - 1.0).abs() <= 1e-9, "det {det}");
    }

    #[test]
    fn reversible((c, s) in small_profile(), u in 0.0..1.0f64, phi in 0.01..(PI - 0.01)) {
        let curve = curve(c, s);
        let l = curve.perimeter();
        let p = PhasePoint::new(u * l, phi);
        let n = step(&curve, p).unwrap().next;
        let back = step(&curve, PhasePoint::new(n.x, PI - n.phi)).unwrap().next;
        let d = (back.x - p.x).rem_euclid(l);
        prop_assert!(d.min(l - d) <= 1e-9, "footpoint error {d}");
        prop_assert!((PI - back.phi - phi).abs() <= 1e-9);
    }
}
