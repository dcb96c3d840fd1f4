use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use orbitheight::arith::{
    height_projective, height_rational, normalize_projective, segre_product, P1Value,
    PrimitiveVector, Rational,
};
use proptest::prelude::*;

fn nonzero_vec() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-1000i64..=1000, 1..5).prop_filter("not all zero", |v| v.iter().any(|&x| x != 0))
}

fn rational() -> impl Strategy<Value = Rational> {
    (-10_000i64..=10_000, 1i64..=10_000).prop_map(|(a, b)| Rational::new(a.into(), b.into()))
}

fn primitive() -> impl Strategy<Value = PrimitiveVector> {
    nonzero_vec().prop_map(|v| PrimitiveVector::from_integers(v.into_iter().map(BigInt::from).collect()).unwrap())
}

proptest! {
    #[test]
    fn scaling_invariance(v in nonzero_vec(), num in -500i64..=500, den in 1i64..=500) {
        prop_assume!(num != 0);
        let lambda = Rational::new(num.into(), den.into());
        let raw: Vec<Rational> = v.iter().map(|&x| Rational::from_integer(x.into())).collect();
        let scaled: Vec<Rational> = raw.iter().map(|x| x * &lambda).collect();
        let a = normalize_projective(&raw).unwrap();
        let b = normalize_projective(&scaled).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(height_projective(&a), height_projective(&b));
    }

    #[test]
    fn primitive_invariants(v in nonzero_vec()) {
        let p = PrimitiveVector::from_integers(v.into_iter().map(BigInt::from).collect()).unwrap();
        let g = p.coords().iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        prop_assert!(g.is_one());
        let lead = p.coords().iter().find(|c| !c.is_zero()).unwrap();
        prop_assert!(lead.is_positive());
    }

    #[test]
    fn nonnegative_height(p in primitive()) {
        let h = height_projective(&p);
        prop_assert!(h >= 0.0);
        prop_assert_eq!(h == 0.0, p.max_abs().is_one());
        prop_assert_eq!(p.is_height_zero(), p.max_abs().is_one());
    }

    #[test]
    fn segre_additivity(p in primitive(), q in primitive()) {
        let s = segre_product(&p, &q);
        // exact at the level of multiplicative heights
        prop_assert_eq!(s.max_abs(), p.max_abs() * q.max_abs());
        let g = s.coords().iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        prop_assert!(g.is_one());
        let lhs = height_projective(&s);
        let rhs = height_projective(&p) + height_projective(&q);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn rational_height_is_log_max(q in rational()) {
        let expect = (q.numer().abs().max(q.denom().clone())).to_string().parse::<f64>().unwrap().ln();
        prop_assert!((height_rational(&q) - expect).abs() <= 1e-12 * expect.max(1.0));
        let v = P1Value::from_rational(&q);
        prop_assert_eq!(v.affine(), Some(q));
    }

    #[test]
    fn display_parse_round_trip(p in primitive()) {
        let text = p.to_string();
        let back: PrimitiveVector = text.parse().unwrap();
        prop_assert_eq!(back, p);
    }
}

#[test]
fn large_values_keep_precision() {
    let big = BigInt::from(7u32).pow(2000);
    let q = Rational::from_integer(big);
    let h = height_rational(&q);
    assert!((h - 2000.0 * 7f64.ln()).abs() < 1e-9 * h);
}
