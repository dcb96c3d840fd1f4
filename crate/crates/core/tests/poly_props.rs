use orbitheight::arith::Rational;
use orbitheight::poly::{
    compose, parse_expression, PolyError, rf_equal, vars, Polynomial, RationalFunction, RationalMap, Vars,
};
use proptest::prelude::*;

fn v2() -> Vars {
    vars(&["x", "y"])
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=5).prop_map(|(a, b)| Rational::new(a.into(), b.into()))
}

fn poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(((0u32..=3, 0u32..=3), small_rational()), 0..5).prop_map(|terms| {
        let v = v2();
        terms.into_iter().fold(Polynomial::zero(&v), |acc, ((a, b), c)| {
            let m = Polynomial::var(&v, 0).pow(a).mul(&Polynomial::var(&v, 1).pow(b)).scale(&c);
            acc.add(&m)
        })
    })
}

fn nonzero_poly() -> impl Strategy<Value = Polynomial> {
    poly().prop_filter("nonzero", |p| !p.is_zero())
}

fn rf() -> impl Strategy<Value = RationalFunction> {
    (poly(), nonzero_poly()).prop_map(|(n, d)| RationalFunction::new(n, d).unwrap())
}

fn point() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(small_rational(), 2)
}

fn rmap() -> impl Strategy<Value = RationalMap> {
    prop::collection::vec(rf(), 2).prop_map(|c| RationalMap::new(v2(), c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn arithmetic_matches_evaluation(a in poly(), b in poly(), p in point()) {
        let (ea, eb) = (a.eval(&p), b.eval(&p));
        prop_assert_eq!(a.add(&b).eval(&p), &ea + &eb);
        prop_assert_eq!(a.sub(&b).eval(&p), &ea - &eb);
        prop_assert_eq!(a.mul(&b).eval(&p), &ea * &eb);
        prop_assert_eq!(a.pow(3).eval(&p), &ea * &ea * &ea);
    }

    #[test]
    fn print_parse_idempotent(f in rf()) {
        let text = f.to_string();
        let back = parse_expression(&text, &v2()).unwrap();
        prop_assert!(rf_equal(&back, &f));
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn poly_print_parse(p in poly()) {
        let back = parse_expression(&p.to_string(), &v2()).unwrap();
        prop_assert_eq!(back.as_polynomial(), Some(p));
    }

    #[test]
    fn rf_equal_is_an_equivalence(f in rf(), g in rf(), c in nonzero_poly()) {
        prop_assert!(rf_equal(&f, &f));
        prop_assert_eq!(rf_equal(&f, &g), rf_equal(&g, &f));
        let scaled = RationalFunction::new(f.num().mul(&c), f.den().mul(&c)).unwrap();
        prop_assert!(rf_equal(&f, &scaled));
        let h = RationalFunction::new(scaled.num().mul(&c), scaled.den().mul(&c)).unwrap();
        // f ~ scaled and scaled ~ h, hence f ~ h
        prop_assert!(rf_equal(&scaled, &h));
        prop_assert!(rf_equal(&f, &h));
        if rf_equal(&f, &g) {
            prop_assert!(rf_equal(&g, &scaled));
        }
    }

    #[test]
    fn field_operations_evaluate_pointwise(f in rf(), g in rf(), p in point()) {
        if let (Some(a), Some(b)) = (f.eval_affine(&p), g.eval_affine(&p)) {
            if let Some(s) = f.add(&g).eval_affine(&p) {
                prop_assert_eq!(s, &a + &b);
            }
            if let Some(m) = f.mul(&g).eval_affine(&p) {
                prop_assert_eq!(m, &a * &b);
            }
        }
    }

    #[test]
    fn composition_coherence(phi in rmap(), psi in rmap(), p in point()) {
        let c = match compose(&phi, &psi) {
            Ok(c) => c,
            // an outer denominator vanishes identically under substitution
            Err(e) => {
                prop_assert_eq!(e, PolyError::ZeroDenominator);
                return Ok(());
            }
        };
        if let Ok(inner) = psi.apply(&p) {
            if let Ok(outer) = phi.apply(&inner) {
                if let Ok(direct) = c.apply(&p) {
                    prop_assert_eq!(direct, outer);
                }
            }
        }
    }
}

#[test]
fn composition_with_identity() {
    let v = v2();
    let m = RationalMap::parse(&v, &["x*y/(x+1)", "y^2 - 3"]).unwrap();
    let id = RationalMap::identity(&v);
    assert!(compose(&m, &id).unwrap().equals(&m));
    assert!(compose(&id, &m).unwrap().equals(&m));
}
