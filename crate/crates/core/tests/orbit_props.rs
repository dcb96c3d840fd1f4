use orbitheight::arith::Rational;
use orbitheight::orbit::{
    detect_window_repeat, gap_diagnostics, iterate_orbit, window_height, OrbitTrace,
};
use orbitheight::poly::{parse_expression, vars, RationalMap};
use proptest::prelude::*;

const MAPS: &[&str] = &["x+1", "2*x", "3-x", "x^2-1", "1/(x+2)", "(x^2+1)/(2*x+3)", "x", "0-x", "x/2+1"];
// degree-one maps, whose heights grow at most linearly
const MOBIUS: &[&str] = &["x+1", "2*x", "3-x", "1/(x+2)", "x", "0-x", "x/2+1", "(x+1)/(x-1)"];
const OBSERVABLES: &[&str] = &["x", "x^2", "1/(x+1)", "x-x+5"];

fn trace(map: &str, obs: &str, start: Rational, n: usize) -> (RationalMap, OrbitTrace) {
    let v = vars(&["x"]);
    let m = RationalMap::parse(&v, &[map]).unwrap();
    let f = parse_expression(obs, &v).unwrap();
    let t = iterate_orbit(&m, &f, &[start], n).unwrap();
    (m, t)
}

fn start() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=7).prop_map(|(a, b)| Rational::new(a.into(), b.into()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn reiteration_consistency(mi in 0..MAPS.len(), oi in 0..OBSERVABLES.len(), s in start(), k in 0usize..10) {
        let n = 12;
        let (_, t) = trace(MAPS[mi], OBSERVABLES[oi], s, n);
        prop_assume!(t.rows.len() > k && t.rows.len() == n + 1);
        let (_, tail) = trace(MAPS[mi], OBSERVABLES[oi], t.rows[k].point[0].clone(), n - k);
        prop_assert_eq!(tail.rows.len(), n - k + 1);
        for (a, b) in t.rows[k..].iter().zip(&tail.rows) {
            prop_assert_eq!(&a.point, &b.point);
            prop_assert_eq!(&a.value, &b.value);
            prop_assert_eq!(a.height, b.height);
        }
    }

    #[test]
    fn window_repeat_soundness(mi in 0..MOBIUS.len(), oi in 0..OBSERVABLES.len(), s in start(), ell in 0usize..3) {
        let (_, t) = trace(MOBIUS[mi], OBSERVABLES[oi], s, 30);
        prop_assume!(t.rows.len() > ell + 1);
        if let Some(r) = detect_window_repeat(&t, ell).unwrap() {
            let p = r.period();
            prop_assert!(r.i < r.j);
            for w in 0..=ell {
                prop_assert_eq!(&t.rows[r.i + w].value, &t.rows[r.j + w].value);
            }
            for m in r.i..=r.verified_to {
                prop_assert_eq!(&t.rows[m].value, &t.rows[m + p].value);
            }
            let last = t.rows.len() - 1;
            if r.verified_to + p == last {
                let distinct: std::collections::BTreeSet<String> =
                    t.rows.iter().map(|row| row.value.to_string()).collect();
                prop_assert!(distinct.len() <= r.j + p);
            }
        }
    }

    #[test]
    fn gap_monotone(mi in 0..MOBIUS.len(), s in start(), c in prop::collection::vec(0.0f64..5.0, 1..4), bump in 0.0f64..2.0) {
        let (_, t) = trace(MOBIUS[mi], "x", s, 40);
        prop_assume!(t.rows.len() == 41);
        let larger: Vec<f64> = c.iter().map(|x| x + bump).collect();
        let a = gap_diagnostics(&t, 2, 0.5, &c).unwrap();
        let b = gap_diagnostics(&t, 2, 0.5, &larger).unwrap();
        for ((_, da), (_, db)) in a.below_curve_density.iter().zip(&b.below_curve_density) {
            prop_assert!(db >= da);
        }
        // a full tail window makes tail_sup a sup over [N0, N]
        let mut prev = f64::INFINITY;
        for n0 in 2..30 {
            let g = gap_diagnostics(&t, n0, 1.0, &[]).unwrap();
            prop_assert!(g.tail_sup <= prev);
            prev = g.tail_sup;
        }
    }

    #[test]
    fn window_heights_add(mi in 0..MAPS.len(), oi in 0..OBSERVABLES.len(), s in start(), i in 0usize..8, ell in 0usize..4) {
        let (_, t) = trace(MAPS[mi], OBSERVABLES[oi], s, 11);
        prop_assume!(t.rows.len() > i + ell);
        let w = window_height(&t, i, ell).unwrap();
        let sum: f64 = t.rows[i..=i + ell].iter().map(|r| r.height).sum();
        prop_assert!((w - sum).abs() <= 1e-9 * sum.max(1.0));
    }
}
