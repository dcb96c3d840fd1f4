use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;
use orbitheight::arith::Rational;
use orbitheight::density::{check_lemma_shifts, EventuallyPeriodicSet};
use proptest::prelude::*;

fn set() -> impl Strategy<Value = EventuallyPeriodicSet> {
    (1u64..=12)
        .prop_flat_map(|m| {
            (
                Just(m),
                prop::collection::btree_set(0..m, 0..=m as usize),
                prop::collection::btree_set(0u64..40, 0..4),
                prop::collection::btree_set(0u64..40, 0..4),
            )
        })
        .prop_map(|(m, r, a, rm)| {
            let rm: BTreeSet<u64> = rm.difference(&a).copied().collect();
            let added: Vec<u64> = a.into_iter().filter(|x| !r.contains(&(x % m))).collect();
            let removed: Vec<u64> = rm.into_iter().filter(|x| r.contains(&(x % m))).collect();
            EventuallyPeriodicSet::new(m, r, added, removed).unwrap()
        })
}

fn frac(a: u64, b: u64) -> Rational {
    Rational::new(BigInt::from(a), BigInt::from(b))
}

fn brute_contains(s: &EventuallyPeriodicSet, n: u64) -> bool {
    if s.added().contains(&n) {
        return true;
    }
    if s.removed().contains(&n) {
        return false;
    }
    s.residues().contains(&(n % s.modulus()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn shift_set_has_positive_density(s in set()) {
        prop_assume!(s.density() > Rational::zero());
        let sigma = s.shift_set();
        prop_assert!(sigma.density() >= frac(1, s.modulus()));
        prop_assert!(sigma.contains(0));
    }

    #[test]
    fn prefix_density_converges(s in set()) {
        let m = s.modulus();
        let n = 10_000 * m;
        let dev = s.prefix_density(n) - s.density();
        let x = (s.added().len() + s.removed().len()) as u64;
        prop_assert!(num_traits::Signed::abs(&dev) <= frac(x + m, n));
    }

    #[test]
    fn subadditive_and_translation_invariant(a in set(), b in set(), i in 0i64..30) {
        let u = a.union(&b).unwrap();
        prop_assert!(u.density() <= a.density() + b.density());
        let j = a.intersection(&b).unwrap();
        prop_assert_eq!(u.density() + j.density(), a.density() + b.density());
        prop_assert_eq!(a.shift(i).density(), a.density());
        for n in 0..120 {
            prop_assert_eq!(u.contains(n), a.contains(n) || b.contains(n));
            prop_assert_eq!(a.shift(i).contains(n + i as u64), a.contains(n));
        }
    }

    #[test]
    fn membership_and_round_trips(s in set()) {
        for n in 0..150 {
            prop_assert_eq!(s.contains(n), brute_contains(&s, n));
            prop_assert_eq!(s.complement().contains(n), !s.contains(n));
        }
        let text = s.to_string();
        prop_assert_eq!(text.parse::<EventuallyPeriodicSet>().unwrap(), s.clone());
        prop_assert_eq!(EventuallyPeriodicSet::from_spec(&s.to_spec()).unwrap(), s);
    }

    #[test]
    fn lemma_witness_exists(s in set(), extra in prop::collection::btree_set(0u64..500, 0..6)) {
        let d = s.density();
        prop_assume!(d > Rational::zero());
        // smallest N with d > 1/N
        let mut n = 1u64;
        while d <= frac(1, n) {
            n += 1;
        }
        let mut f: BTreeSet<u64> = extra;
        let mut k = 0;
        while (f.len() as u64) < n {
            f.insert(k * 7 + 3);
            k += 1;
        }
        let (j, k) = check_lemma_shifts(&s, &f, n).unwrap();
        prop_assert!(j > k && f.contains(&j) && f.contains(&k));
        prop_assert!(s.shift_set().contains(j - k));
    }
}
