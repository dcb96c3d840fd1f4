//! Eventually periodic subsets of N: a residue pattern modulo `m` plus
//! finitely many exceptions. Densities, translates, intersections and shift
//! sets are all exact on this class.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DensityError {
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("residue {residue} is not below the modulus {modulus}")]
    ResidueOutOfRange { residue: u64, modulus: u64 },
    #[error("{0} is listed as both added and removed")]
    ConflictingException(u64),
    #[error("modulus overflow")]
    ModulusOverflow,
    #[error("cannot parse set {0:?}")]
    Parse(String),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("no witness found among the given shifts")]
    NoWitness,
}

/// `{n : n mod m in R}` with explicit finite additions and removals.
///
/// Canonical form: `m` is the least period of the residue pattern, added
/// elements are not already periodic members and removed elements are.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventuallyPeriodicSet {
    modulus: u64,
    residues: BTreeSet<u64>,
    added: BTreeSet<u64>,
    removed: BTreeSet<u64>,
}

/// JSON shape of a set in job files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSpec {
    pub modulus: u64,
    pub residues: Vec<u64>,
    #[serde(default)]
    pub added: Vec<u64>,
    #[serde(default)]
    pub removed: Vec<u64>,
}

impl EventuallyPeriodicSet {
    pub fn new(
        modulus: u64,
        residues: impl IntoIterator<Item = u64>,
        added: impl IntoIterator<Item = u64>,
        removed: impl IntoIterator<Item = u64>,
    ) -> Result<Self, DensityError> {
        if modulus == 0 {
            return Err(DensityError::ZeroModulus);
        }
        let residues: BTreeSet<u64> = residues.into_iter().collect();
        if let Some(&r) = residues.iter().find(|&&r| r >= modulus) {
            return Err(DensityError::ResidueOutOfRange { residue: r, modulus });
        }
        let added: BTreeSet<u64> = added.into_iter().collect();
        let removed: BTreeSet<u64> = removed.into_iter().collect();
        if let Some(&x) = added.intersection(&removed).next() {
            return Err(DensityError::ConflictingException(x));
        }
        let periodic = |n: u64| residues.contains(&(n % modulus));
        let added = added.into_iter().filter(|&n| !periodic(n)).collect();
        let removed = removed.into_iter().filter(|&n| periodic(n)).collect();
        let mut s = EventuallyPeriodicSet {
            modulus,
            residues,
            added,
            removed,
        };
        s.reduce_modulus();
        Ok(s)
    }

    pub fn from_spec(spec: &SetSpec) -> Result<Self, DensityError> {
        Self::new(
            spec.modulus,
            spec.residues.iter().copied(),
            spec.added.iter().copied(),
            spec.removed.iter().copied(),
        )
    }

    pub fn to_spec(&self) -> SetSpec {
        SetSpec {
            modulus: self.modulus,
            residues: self.residues.iter().copied().collect(),
            added: self.added.iter().copied().collect(),
            removed: self.removed.iter().copied().collect(),
        }
    }

    /// The arithmetic progression `{a, a + d, a + 2d, ...}` for `a < d`, or
    /// its tail from `a` in general.
    pub fn progression(a: u64, d: u64) -> Result<Self, DensityError> {
        let d = d.max(1);
        let removed = (a % d..a).step_by(d as usize);
        Self::new(d, [a % d], [], removed)
    }

    pub fn naturals() -> Self {
        Self::new(1, [0], [], []).expect("valid")
    }

    pub fn empty() -> Self {
        Self::new(1, [], [], []).expect("valid")
    }

    pub fn finite(elements: impl IntoIterator<Item = u64>) -> Self {
        Self::new(1, [], elements, []).expect("valid")
    }

    /// Builds the set agreeing with `member` below `bound` and with the
    /// residue pattern from `bound` on.
    fn from_membership(
        modulus: u64,
        residues: BTreeSet<u64>,
        bound: u64,
        member: impl Fn(u64) -> bool,
    ) -> Self {
        let mut added = BTreeSet::new();
        let mut removed = BTreeSet::new();
        for n in 0..bound {
            let periodic = residues.contains(&(n % modulus));
            match (member(n), periodic) {
                (true, false) => {
                    added.insert(n);
                }
                (false, true) => {
                    removed.insert(n);
                }
                _ => {}
            }
        }
        let mut s = EventuallyPeriodicSet {
            modulus,
            residues,
            added,
            removed,
        };
        s.reduce_modulus();
        s
    }

    fn reduce_modulus(&mut self) {
        let m = self.modulus;
        let best = (1..=m)
            .filter(|&d| m.is_multiple_of(d))
            .find(|&d| {
                (0..m).all(|r| self.residues.contains(&r) == self.residues.contains(&(r % d)))
            })
            .unwrap_or(m);
        if best != m {
            self.residues = self.residues.iter().copied().filter(|&r| r < best).collect();
            self.modulus = best;
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residues(&self) -> &BTreeSet<u64> {
        &self.residues
    }

    pub fn added(&self) -> &BTreeSet<u64> {
        &self.added
    }

    pub fn removed(&self) -> &BTreeSet<u64> {
        &self.removed
    }

    /// One past the largest exception; membership is purely periodic from
    /// here on.
    pub fn stabilization_bound(&self) -> u64 {
        let a = self.added.iter().next_back().map(|&x| x + 1).unwrap_or(0);
        let r = self.removed.iter().next_back().map(|&x| x + 1).unwrap_or(0);
        a.max(r)
    }

    fn periodic_contains(&self, n: u64) -> bool {
        self.residues.contains(&(n % self.modulus))
    }

    pub fn contains(&self, n: u64) -> bool {
        if self.added.contains(&n) {
            return true;
        }
        self.periodic_contains(n) && !self.removed.contains(&n)
    }

    pub fn is_finite(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty() && self.added.is_empty()
    }

    /// Upper asymptotic density `|R| / m`; exceptions are density-null.
    pub fn density(&self) -> Rational {
        Rational::new(
            BigInt::from(self.residues.len() as u64),
            BigInt::from(self.modulus),
        )
    }

    fn common_modulus(&self, other: &Self) -> Result<u64, DensityError> {
        let g = self.modulus.gcd(&other.modulus);
        (self.modulus / g)
            .checked_mul(other.modulus)
            .ok_or(DensityError::ModulusOverflow)
    }

    fn combine(
        &self,
        other: &Self,
        op: impl Fn(bool, bool) -> bool,
    ) -> Result<Self, DensityError> {
        let l = self.common_modulus(other)?;
        let residues = (0..l)
            .filter(|&r| op(self.periodic_contains(r), other.periodic_contains(r)))
            .collect();
        let bound = self.stabilization_bound().max(other.stabilization_bound());
        Ok(Self::from_membership(l, residues, bound, |n| {
            op(self.contains(n), other.contains(n))
        }))
    }

    pub fn union(&self, other: &Self) -> Result<Self, DensityError> {
        self.combine(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self, DensityError> {
        self.combine(other, |a, b| a && b)
    }

    pub fn complement(&self) -> Self {
        let residues = (0..self.modulus)
            .filter(|r| !self.residues.contains(r))
            .collect();
        Self::from_membership(self.modulus, residues, self.stabilization_bound(), |n| {
            !self.contains(n)
        })
    }

    /// `S + i = {s + i : s in S}`; negative shifts drop elements below zero.
    pub fn shift(&self, i: i64) -> Self {
        let m = self.modulus;
        let k = i.unsigned_abs();
        if i >= 0 {
            let residues = self.residues.iter().map(|&r| (r + k) % m).collect();
            let bound = self.stabilization_bound() + k;
            Self::from_membership(m, residues, bound, |n| n >= k && self.contains(n - k))
        } else {
            let residues = self
                .residues
                .iter()
                .map(|&r| (r + m - k % m) % m)
                .collect();
            let bound = self.stabilization_bound().saturating_sub(k);
            Self::from_membership(m, residues, bound, |n| self.contains(n + k))
        }
    }

    /// `Σ(S) = {i >= 0 : d(S ∩ (S + i)) > 0}`, i.e. the residues `R - R`.
    pub fn shift_set(&self) -> Self {
        let m = self.modulus;
        let residues = self
            .residues
            .iter()
            .flat_map(|&a| self.residues.iter().map(move |&b| (a + m - b) % m))
            .collect();
        let mut s = EventuallyPeriodicSet {
            modulus: m,
            residues,
            added: BTreeSet::new(),
            removed: BTreeSet::new(),
        };
        s.reduce_modulus();
        s
    }

    /// `|S ∩ [1, n]|`.
    pub fn prefix_count(&self, n: u64) -> u64 {
        if n == 0 {
            return 0;
        }
        let m = self.modulus;
        let full = n / m;
        let rem = n % m;
        // residues r in [0, m) contribute once per full block of [0, n];
        // then subtract 0 and correct exceptions.
        let mut count: u64 = self
            .residues
            .iter()
            .map(|&r| full + u64::from(r <= rem))
            .sum();
        if self.periodic_contains(0) {
            count -= 1;
        }
        count += self.added.iter().filter(|&&x| x >= 1 && x <= n).count() as u64;
        count -= self.removed.iter().filter(|&&x| x >= 1 && x <= n).count() as u64;
        count
    }

    pub fn prefix_density(&self, n: u64) -> Rational {
        Rational::new(BigInt::from(self.prefix_count(n)), BigInt::from(n.max(1)))
    }

    /// Elements in `[lo, hi]` in increasing order.
    pub fn elements_in(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> + '_ {
        (lo..=hi).filter(move |&n| self.contains(n))
    }
}

/// `|{x in sample : 1 <= x <= n}| / n` for an arbitrary finite sample of N.
pub fn empirical_density(sample: &[u64], n: u64) -> Rational {
    let count = sample.iter().filter(|&&x| x >= 1 && x <= n).count();
    Rational::new(BigInt::from(count as u64), BigInt::from(n.max(1)))
}

/// Finds `j > k` in `shifts` with `j - k` in `Σ(set)`, trying the smallest
/// gap first and then the smallest `k`. Requires `d(set) > 1/n` and
/// `|shifts| >= n`, which guarantees a witness by pigeonhole.
pub fn check_lemma_shifts(
    set: &EventuallyPeriodicSet,
    shifts: &BTreeSet<u64>,
    n: u64,
) -> Result<(u64, u64), DensityError> {
    if n == 0 {
        return Err(DensityError::HypothesisViolated("N must be positive".into()));
    }
    let bound = Rational::new(BigInt::from(1), BigInt::from(n));
    if set.density() <= bound {
        return Err(DensityError::HypothesisViolated(format!(
            "density {} is not above 1/{n}",
            set.density()
        )));
    }
    if (shifts.len() as u64) < n {
        return Err(DensityError::HypothesisViolated(format!(
            "|F| = {} is below N = {n}",
            shifts.len()
        )));
    }
    let sigma = set.shift_set();
    let f: Vec<u64> = shifts.iter().copied().collect();
    let mut best: Option<(u64, u64, u64)> = None;
    for (a, &k) in f.iter().enumerate() {
        for &j in &f[a + 1..] {
            let gap = j - k;
            if best.map(|(g, _, _)| gap >= g).unwrap_or(false) {
                break;
            }
            if sigma.contains(gap) {
                best = Some((gap, j, k));
                break;
            }
        }
    }
    best.map(|(_, j, k)| (j, k)).ok_or(DensityError::NoWitness)
}

fn fmt_list(f: &mut fmt::Formatter<'_>, items: &BTreeSet<u64>) -> fmt::Result {
    f.write_str("{")?;
    for (i, x) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str("}")
}

impl fmt::Display for EventuallyPeriodicSet {
    /// `mod m: {r1,r2,...} +{added} -{removed}`; empty exception lists are
    /// omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mod {}: ", self.modulus)?;
        fmt_list(f, &self.residues)?;
        if !self.added.is_empty() {
            f.write_str(" +")?;
            fmt_list(f, &self.added)?;
        }
        if !self.removed.is_empty() {
            f.write_str(" -")?;
            fmt_list(f, &self.removed)?;
        }
        Ok(())
    }
}

fn parse_braced(s: &str) -> Option<(Vec<u64>, &str)> {
    let s = s.trim_start();
    let rest = s.strip_prefix('{')?;
    let end = rest.find('}')?;
    let body = rest[..end].trim();
    let items = if body.is_empty() {
        Vec::new()
    } else {
        body.split(',')
            .map(|x| x.trim().parse::<u64>().ok())
            .collect::<Option<Vec<_>>>()?
    };
    Some((items, &rest[end + 1..]))
}

impl FromStr for EventuallyPeriodicSet {
    type Err = DensityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DensityError::Parse(s.to_string());
        let rest = s.trim().strip_prefix("mod").ok_or_else(bad)?;
        let (m, rest) = rest.split_once(':').ok_or_else(bad)?;
        let modulus: u64 = m.trim().parse().map_err(|_| bad())?;
        let (residues, mut rest) = parse_braced(rest).ok_or_else(bad)?;
        let mut added = Vec::new();
        let mut removed = Vec::new();
        loop {
            let r = rest.trim_start();
            if r.is_empty() {
                break;
            }
            let (sign, tail) = r.split_at(1);
            let (items, tail) = parse_braced(tail).ok_or_else(bad)?;
            match sign {
                "+" => added.extend(items),
                "-" => removed.extend(items),
                _ => return Err(bad()),
            }
            rest = tail;
        }
        Self::new(modulus, residues, added, removed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_rational;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn ap(m: u64, r: u64) -> EventuallyPeriodicSet {
        EventuallyPeriodicSet::new(m, [r], [], []).unwrap()
    }

    #[test]
    fn density_examples() {
        assert_eq!(ap(2, 0).density(), q("1/2"));
        let s = EventuallyPeriodicSet::new(1, [0], [], [5, 17]).unwrap();
        assert_eq!(s.density(), q("1"));
        assert!(!s.contains(5) && s.contains(6));
        assert_eq!(EventuallyPeriodicSet::empty().density(), q("0"));
    }

    #[test]
    fn algebra_examples() {
        let i = ap(3, 0).intersection(&ap(3, 1)).unwrap();
        assert!(i.is_empty());
        let odd = ap(2, 0).shift(1);
        assert_eq!(odd, ap(2, 1));
        assert_eq!(odd.density(), q("1/2"));
        let u = ap(2, 0).union(&ap(3, 0)).unwrap();
        assert_eq!(u.to_string(), "mod 6: {0,2,3,4}");
        assert_eq!(u.density(), q("2/3"));
    }

    #[test]
    fn shifts_keep_exceptions_exact() {
        let s = EventuallyPeriodicSet::new(4, [1], [2], [5]).unwrap();
        let t = s.shift(3);
        for n in 0..60 {
            assert_eq!(t.contains(n), n >= 3 && s.contains(n - 3), "n = {n}");
        }
        let back = t.shift(-3);
        assert_eq!(back, s);
        let neg = ap(5, 2).shift(-4);
        for n in 0..60 {
            assert_eq!(neg.contains(n), ap(5, 2).contains(n + 4));
        }
    }

    #[test]
    fn canonical_modulus() {
        let s = EventuallyPeriodicSet::new(6, [0, 2, 4], [], []).unwrap();
        assert_eq!(s.modulus(), 2);
        assert_eq!(s, ap(2, 0));
        let s = EventuallyPeriodicSet::new(4, [0, 1, 2, 3], [7], [9]).unwrap();
        assert_eq!(s.to_string(), "mod 1: {0} -{9}");
        assert!(matches!(
            EventuallyPeriodicSet::new(3, [3], [], []),
            Err(DensityError::ResidueOutOfRange { .. })
        ));
        assert!(matches!(
            EventuallyPeriodicSet::new(3, [0], [1], [1]),
            Err(DensityError::ConflictingException(1))
        ));
        assert_eq!(EventuallyPeriodicSet::new(0, [], [], []), Err(DensityError::ZeroModulus));
    }

    #[test]
    fn shift_set_examples() {
        let s = ap(3, 0).shift_set();
        assert_eq!(s, ap(3, 0));
        assert_eq!(s.density(), q("1/3"));
        let s = EventuallyPeriodicSet::new(4, [0, 1], [], []).unwrap().shift_set();
        assert_eq!(s.residues().iter().copied().collect::<Vec<_>>(), vec![0, 1, 3]);
        assert_eq!(s.density(), q("3/4"));
        assert!(EventuallyPeriodicSet::empty().shift_set().is_empty());
        // exceptions never matter
        let s = EventuallyPeriodicSet::new(3, [0], [1, 2], [0, 3]).unwrap();
        assert_eq!(s.shift_set(), ap(3, 0));
    }

    #[test]
    fn shift_set_matches_intersection_density() {
        let s = EventuallyPeriodicSet::new(10, [0, 3, 4, 8], [1], [13]).unwrap();
        let sigma = s.shift_set();
        for i in 0..40 {
            let positive = s.intersection(&s.shift(i as i64)).unwrap().density() > q("0");
            assert_eq!(sigma.contains(i), positive, "i = {i}");
        }
    }

    #[test]
    fn lemma_examples() {
        let f: BTreeSet<u64> = [0, 1, 2, 3].into();
        assert_eq!(check_lemma_shifts(&ap(3, 0), &f, 4).unwrap(), (3, 0));
        let f: BTreeSet<u64> = [1, 2, 3].into();
        assert_eq!(check_lemma_shifts(&ap(2, 0), &f, 3).unwrap(), (3, 1));
        let f: BTreeSet<u64> = [4, 10, 12, 30].into();
        assert_eq!(
            check_lemma_shifts(&EventuallyPeriodicSet::naturals(), &f, 2).unwrap(),
            (12, 10)
        );
        let f: BTreeSet<u64> = [0, 1].into();
        assert!(matches!(
            check_lemma_shifts(&ap(3, 0), &f, 3),
            Err(DensityError::HypothesisViolated(_))
        ));
        let f: BTreeSet<u64> = [0, 1, 2].into();
        assert!(matches!(
            check_lemma_shifts(&ap(3, 0), &f, 3),
            Err(DensityError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn prefix_counts() {
        let s = EventuallyPeriodicSet::new(3, [0, 2], [1], [6]).unwrap();
        for n in 0..50u64 {
            let brute = (1..=n).filter(|&k| s.contains(k)).count() as u64;
            assert_eq!(s.prefix_count(n), brute, "n = {n}");
        }
        assert_eq!(empirical_density(&[0, 1, 2, 9, 11], 10), q("3/10"));
    }

    #[test]
    fn text_round_trip() {
        let s: EventuallyPeriodicSet = "mod 4: {1,3} +{0,2} -{5}".parse().unwrap();
        assert_eq!(s.to_string(), "mod 2: {1} +{0,2} -{5}");
        assert_eq!(s.to_string().parse::<EventuallyPeriodicSet>().unwrap(), s);
        let e: EventuallyPeriodicSet = "mod 1: {}".parse().unwrap();
        assert!(e.is_empty());
        assert!("mod x: {1}".parse::<EventuallyPeriodicSet>().is_err());
        assert!("mod 3 {1}".parse::<EventuallyPeriodicSet>().is_err());
        assert!("mod 3: {1} *{2}".parse::<EventuallyPeriodicSet>().is_err());
    }

    #[test]
    fn progression_tail() {
        let p = EventuallyPeriodicSet::progression(7, 3).unwrap();
        let got: Vec<u64> = p.elements_in(0, 20).collect();
        assert_eq!(got, vec![7, 10, 13, 16, 19]);
    }
}
