//! Sparse multivariate polynomials and rational functions over Q.
//!
//! Terms are kept in a `BTreeMap` keyed by exponent vectors under graded
//! lexicographic order, so iteration order (and therefore every rendering)
//! is canonical. Rational functions are reduced by integer content only;
//! equality is decided by cross-multiplication.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{normalize_projective, P1Value, Rational};

const MAX_EXPONENT: u32 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable {name:?} at offset {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("variable lists differ")]
    VariableMismatch,
    #[error("expression is not a polynomial")]
    NotPolynomial,
}

/// Ordered variable names shared by every polynomial of one system.
pub type Vars = Arc<[String]>;

pub fn vars<S: AsRef<str>>(names: &[S]) -> Vars {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

/// Exponent vector, ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    vars: Vars,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(vars: &Vars) -> Self {
        Polynomial {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Vars, c: Rational) -> Self {
        let mut p = Polynomial::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(vars.len()), c);
        }
        p
    }

    pub fn one(vars: &Vars) -> Self {
        Polynomial::constant(vars, Rational::one())
    }

    pub fn var(vars: &Vars, i: usize) -> Self {
        let mut p = Polynomial::zero(vars);
        p.terms.insert(Monomial::var(vars.len(), i), Rational::one());
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging
    /// repeated monomials and dropping zeros.
    pub fn from_terms(
        vars: &Vars,
        terms: impl IntoIterator<Item = (Vec<u32>, Rational)>,
    ) -> Self {
        let mut p = Polynomial::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent vector length");
            p.add_term(Monomial(e), c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Returns the constant value if the polynomial has degree ≤ 0.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                (m.degree() == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Coefficient of the grlex-largest monomial.
    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.values().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.vars);
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), -a)).collect(),
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        debug_assert_eq!(self.vars, other.vars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        debug_assert_eq!(self.vars, other.vars);
        let mut out = Polynomial::zero(&self.vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one(&self.vars);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars(), "point dimension");
        if self.terms.is_empty() {
            return Rational::zero();
        }
        // Power tables per variable, up to the largest exponent used.
        let powers: Vec<Vec<Rational>> = (0..self.nvars())
            .map(|i| {
                let d = self.degree_in(i) as usize;
                let mut row = Vec::with_capacity(d + 1);
                row.push(Rational::one());
                for k in 1..=d {
                    let next = &row[k - 1] * &point[i];
                    row.push(next);
                }
                row
            })
            .collect();
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t *= &powers[i][e as usize];
                }
            }
            acc += t;
        }
        acc
    }

    /// Same polynomial over a different variable list of equal length.
    pub fn rename(&self, vars: &Vars) -> Polynomial {
        assert_eq!(vars.len(), self.nvars());
        Polynomial {
            vars: vars.clone(),
            terms: self.terms.clone(),
        }
    }

    /// Embeds into a larger variable list: variable `i` maps to `slot[i]`.
    pub fn embed(&self, vars: &Vars, slot: &[usize]) -> Polynomial {
        assert_eq!(slot.len(), self.nvars());
        let mut out = Polynomial::zero(vars);
        for (m, c) in &self.terms {
            let mut e = vec![0; vars.len()];
            for (i, &k) in m.0.iter().enumerate() {
                e[slot[i]] += k;
            }
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    fn lcm_of_denominators(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()))
    }

    fn gcd_of_numerators(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c.numer()))
    }

    fn fmt_monomial(&self, m: &Monomial, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in m.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            f.write_str(&self.vars[i])?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Polynomial {
    /// Renders in descending grlex order using the input grammar, so the
    /// output parses back to the same polynomial.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let mag = c.abs();
            if k == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if m.degree() == 0 {
                write!(f, "{mag}")?;
            } else if mag.is_one() && !(k == 0 && c.is_negative()) {
                self.fmt_monomial(m, f)?;
            } else {
                // A leading "-x^2" would parse as (-x)^2, so unit
                // coefficients are spelled out in that position.
                write!(f, "{mag}*")?;
                self.fmt_monomial(m, f)?;
            }
        }
        Ok(())
    }
}

/// Quotient of polynomials, reduced by integer content only.
///
/// Canonical form: every coefficient of `num` and `den` is an integer, the
/// gcd of all those coefficients is 1, and the grlex-leading coefficient of
/// `den` is positive. Zero is `0/1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

/// Result of evaluating a rational function at a point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evaluation {
    Value(P1Value),
    /// Numerator and denominator both vanish.
    Indeterminate,
}

impl Evaluation {
    pub fn value(&self) -> Option<&P1Value> {
        match self {
            Evaluation::Value(v) => Some(v),
            Evaluation::Indeterminate => None,
        }
    }
}

impl RationalFunction {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self, PolyError> {
        if num.vars != den.vars {
            return Err(PolyError::VariableMismatch);
        }
        if den.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        if num.is_zero() {
            let one = Polynomial::one(&num.vars);
            return Ok(RationalFunction { num, den: one });
        }
        let l = Rational::from_integer(num.lcm_of_denominators().lcm(&den.lcm_of_denominators()));
        let scaled_num = num.scale(&l);
        let scaled_den = den.scale(&l);
        let content = scaled_num
            .gcd_of_numerators()
            .gcd(&scaled_den.gcd_of_numerators());
        let mut factor = Rational::new(BigInt::one(), content);
        if scaled_den
            .leading_coefficient()
            .map(|c| c.is_negative())
            .unwrap_or(false)
        {
            factor = -factor;
        }
        Ok(RationalFunction {
            num: scaled_num.scale(&factor),
            den: scaled_den.scale(&factor),
        })
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        let one = Polynomial::one(&p.vars);
        RationalFunction::new(p, one).expect("unit denominator")
    }

    pub fn constant(vars: &Vars, c: Rational) -> Self {
        RationalFunction::from_polynomial(Polynomial::constant(vars, c))
    }

    pub fn var(vars: &Vars, i: usize) -> Self {
        RationalFunction::from_polynomial(Polynomial::var(vars, i))
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn vars(&self) -> &Vars {
        &self.num.vars
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// The polynomial `num/den` when `den` is a constant.
    pub fn as_polynomial(&self) -> Option<Polynomial> {
        let c = self.den.as_constant()?;
        Some(self.num.scale(&c.recip()))
    }

    pub fn add(&self, other: &RationalFunction) -> RationalFunction {
        if self.den == other.den {
            return RationalFunction::new(self.num.add(&other.num), self.den.clone())
                .expect("nonzero denominator");
        }
        let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
        RationalFunction::new(num, self.den.mul(&other.den)).expect("nonzero denominator")
    }

    pub fn neg(&self) -> RationalFunction {
        RationalFunction::new(self.num.neg(), self.den.clone()).expect("nonzero denominator")
    }

    pub fn sub(&self, other: &RationalFunction) -> RationalFunction {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RationalFunction) -> RationalFunction {
        RationalFunction::new(self.num.mul(&other.num), self.den.mul(&other.den))
            .expect("nonzero denominator")
    }

    pub fn div(&self, other: &RationalFunction) -> Result<RationalFunction, PolyError> {
        if other.num.is_zero() {
            return Err(PolyError::ZeroDenominator);
        }
        RationalFunction::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn pow(&self, e: u32) -> RationalFunction {
        RationalFunction::new(self.num.pow(e), self.den.pow(e)).expect("nonzero denominator")
    }

    /// Evaluates at `point`; `(n : d)` canonicalized, infinity when only the
    /// denominator vanishes, `Indeterminate` when both do.
    pub fn evaluate(&self, point: &[Rational]) -> Result<Evaluation, PolyError> {
        if point.len() != self.vars().len() {
            return Err(PolyError::DimensionMismatch {
                expected: self.vars().len(),
                got: point.len(),
            });
        }
        let n = self.num.eval(point);
        let d = self.den.eval(point);
        Ok(match (n.is_zero(), d.is_zero()) {
            (true, true) => Evaluation::Indeterminate,
            (_, false) => Evaluation::Value(P1Value::from_rational(&(n / d))),
            (false, true) => Evaluation::Value(P1Value::infinity()),
        })
    }

    /// Evaluates to an affine rational, or `None` when the denominator
    /// vanishes (infinity or indeterminate).
    pub fn eval_affine(&self, point: &[Rational]) -> Option<Rational> {
        let d = self.den.eval(point);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(point) / d)
    }

    /// `(num(p) : den(p))` as raw projective coordinates, without division.
    pub fn eval_projective(&self, point: &[Rational]) -> Option<P1Value> {
        let n = self.num.eval(point);
        let d = self.den.eval(point);
        let v = normalize_projective(&[n, d]).ok()?;
        P1Value::from_vector(v)
    }

    pub fn rename(&self, vars: &Vars) -> RationalFunction {
        RationalFunction {
            num: self.num.rename(vars),
            den: self.den.rename(vars),
        }
    }

    pub fn embed(&self, vars: &Vars, slot: &[usize]) -> RationalFunction {
        RationalFunction {
            num: self.num.embed(vars, slot),
            den: self.den.embed(vars, slot),
        }
    }
}

/// Cross-multiplication equality `a.num * b.den == b.num * a.den`.
pub fn rf_equal(a: &RationalFunction, b: &RationalFunction) -> bool {
    a.num.mul(&b.den) == b.num.mul(&a.den)
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().map(|c| c.is_one()).unwrap_or(false) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// A rational self-map of affine N-space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMap {
    vars: Vars,
    components: Vec<RationalFunction>,
}

/// Why applying a map at a point left its affine domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapExit {
    pub component: usize,
    /// True when the component evaluates to infinity, false for 0/0.
    pub to_infinity: bool,
}

impl RationalMap {
    pub fn new(vars: Vars, components: Vec<RationalFunction>) -> Result<Self, PolyError> {
        if components.len() != vars.len() {
            return Err(PolyError::DimensionMismatch {
                expected: vars.len(),
                got: components.len(),
            });
        }
        if components.iter().any(|c| c.vars() != &vars) {
            return Err(PolyError::VariableMismatch);
        }
        Ok(RationalMap { vars, components })
    }

    pub fn parse<S: AsRef<str>>(vars: &Vars, components: &[S]) -> Result<Self, PolyError> {
        let comps = components
            .iter()
            .map(|c| parse_expression(c.as_ref(), vars))
            .collect::<Result<Vec<_>, _>>()?;
        RationalMap::new(vars.clone(), comps)
    }

    pub fn identity(vars: &Vars) -> Self {
        let components = (0..vars.len())
            .map(|i| RationalFunction::var(vars, i))
            .collect();
        RationalMap {
            vars: vars.clone(),
            components,
        }
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn dimension(&self) -> usize {
        self.vars.len()
    }

    pub fn components(&self) -> &[RationalFunction] {
        &self.components
    }

    /// Applies the map, failing when any component leaves the affine chart.
    pub fn apply(&self, point: &[Rational]) -> Result<Vec<Rational>, MapExit> {
        assert_eq!(point.len(), self.dimension(), "point dimension");
        let mut out = Vec::with_capacity(self.components.len());
        for (component, rf) in self.components.iter().enumerate() {
            let d = rf.den.eval(point);
            if d.is_zero() {
                let to_infinity = !rf.num.eval(point).is_zero();
                return Err(MapExit {
                    component,
                    to_infinity,
                });
            }
            out.push(rf.num.eval(point) / d);
        }
        Ok(out)
    }

    pub fn equals(&self, other: &RationalMap) -> bool {
        self.vars == other.vars
            && self
                .components
                .iter()
                .zip(&other.components)
                .all(|(a, b)| rf_equal(a, b))
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Substitutes `inner`'s components into `x`: returns `x(inner)` as the
/// homogenized pair over the common denominator `prod b_i^{deg_i}`.
fn substitute_pair(
    num: &Polynomial,
    den: &Polynomial,
    inner: &RationalMap,
) -> Result<RationalFunction, PolyError> {
    let vars = inner.vars();
    let n = vars.len();
    let degs: Vec<u32> = (0..n)
        .map(|i| num.degree_in(i).max(den.degree_in(i)))
        .collect();
    let a_pows: Vec<Vec<Polynomial>> = (0..n)
        .map(|i| power_table(inner.components[i].num(), degs[i]))
        .collect();
    let b_pows: Vec<Vec<Polynomial>> = (0..n)
        .map(|i| power_table(inner.components[i].den(), degs[i]))
        .collect();
    let subst = |p: &Polynomial| {
        let mut acc = Polynomial::zero(vars);
        for (m, c) in p.terms() {
            let mut t = Polynomial::constant(vars, c.clone());
            for i in 0..n {
                let e = m.0[i] as usize;
                let d = degs[i] as usize;
                if e > 0 {
                    t = t.mul(&a_pows[i][e]);
                }
                if d > e {
                    t = t.mul(&b_pows[i][d - e]);
                }
            }
            acc = acc.add(&t);
        }
        acc
    };
    let new_num = subst(num);
    let new_den = subst(den);
    RationalFunction::new(new_num, new_den)
}

fn power_table(p: &Polynomial, d: u32) -> Vec<Polynomial> {
    let mut row = vec![Polynomial::one(p.vars())];
    for k in 1..=d as usize {
        let next = row[k - 1].mul(p);
        row.push(next);
    }
    row
}

/// `outer ∘ inner` by symbolic substitution.
pub fn compose(outer: &RationalMap, inner: &RationalMap) -> Result<RationalMap, PolyError> {
    if outer.vars != inner.vars {
        return Err(PolyError::VariableMismatch);
    }
    let components = outer
        .components
        .iter()
        .map(|rf| substitute_pair(&rf.num, &rf.den, inner))
        .collect::<Result<Vec<_>, _>>()?;
    RationalMap::new(outer.vars.clone(), components)
}

/// `rf ∘ map` for a single rational function.
pub fn compose_function(
    rf: &RationalFunction,
    map: &RationalMap,
) -> Result<RationalFunction, PolyError> {
    if rf.vars() != map.vars() {
        return Err(PolyError::VariableMismatch);
    }
    substitute_pair(&rf.num, &rf.den, map)
}

// ---------------------------------------------------------------------------
// Parser

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(usize, Tok), PolyError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&b) = bytes.get(self.pos) else {
            return Ok((start, Tok::End));
        };
        if b.is_ascii_digit() {
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let v: BigInt = self.src[start..self.pos].parse().expect("digits");
            return Ok((start, Tok::Int(v)));
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while self.pos < bytes.len()
                && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            return Ok((start, Tok::Ident(self.src[start..self.pos].to_string())));
        }
        if b"+-*/^()".contains(&b) {
            self.pos += 1;
            return Ok((start, Tok::Op(b as char)));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(PolyError::Syntax {
            pos: start,
            msg: format!("unexpected character {ch:?}"),
        })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: (usize, Tok),
    vars: &'a Vars,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(usize, Tok), PolyError> {
        let next = self.lexer.next()?;
        Ok(std::mem::replace(&mut self.peeked, next))
    }

    fn is_op(&self, c: char) -> bool {
        self.peeked.1 == Tok::Op(c)
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, PolyError> {
        Err(PolyError::Syntax {
            pos: self.peeked.0,
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<RationalFunction, PolyError> {
        let mut acc = self.term()?;
        while self.is_op('+') || self.is_op('-') {
            let (_, op) = self.bump()?;
            let rhs = self.term()?;
            acc = if op == Tok::Op('+') { acc.add(&rhs) } else { acc.sub(&rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RationalFunction, PolyError> {
        let mut acc = self.factor()?;
        while self.is_op('*') || self.is_op('/') {
            let (_, op) = self.bump()?;
            let rhs = self.factor()?;
            acc = if op == Tok::Op('*') { acc.mul(&rhs) } else { acc.div(&rhs)? };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<RationalFunction, PolyError> {
        let base = self.base()?;
        if !self.is_op('^') {
            return Ok(base);
        }
        self.bump()?;
        match self.bump()? {
            (pos, Tok::Int(e)) => {
                let e: u32 = e
                    .try_into()
                    .ok()
                    .filter(|&e| e <= MAX_EXPONENT)
                    .ok_or_else(|| PolyError::Syntax {
                        pos,
                        msg: format!("exponent exceeds {MAX_EXPONENT}"),
                    })?;
                Ok(base.pow(e))
            }
            (pos, _) => Err(PolyError::Syntax {
                pos,
                msg: "expected a nonnegative integer exponent".into(),
            }),
        }
    }

    fn base(&mut self) -> Result<RationalFunction, PolyError> {
        match self.peeked.1.clone() {
            Tok::Int(v) => {
                self.bump()?;
                Ok(RationalFunction::constant(self.vars, Rational::from_integer(v)))
            }
            Tok::Ident(name) => {
                let (pos, _) = self.bump()?;
                let i = self
                    .vars
                    .iter()
                    .position(|v| *v == name)
                    .ok_or(PolyError::UnknownVariable { name, pos })?;
                Ok(RationalFunction::var(self.vars, i))
            }
            Tok::Op('(') => {
                self.bump()?;
                let inner = self.expr()?;
                if !self.is_op(')') {
                    return self.syntax("expected ')'");
                }
                self.bump()?;
                Ok(inner)
            }
            Tok::Op('-') => {
                self.bump()?;
                Ok(self.base()?.neg())
            }
            Tok::End => self.syntax("unexpected end of input"),
            Tok::Op(c) => self.syntax(format!("unexpected {c:?}")),
        }
    }
}

/// Parses an expression over the declared variables.
///
/// Grammar: `expr := term (('+'|'-') term)*`, `term := factor (('*'|'/')
/// factor)*`, `factor := base ('^' int)?`, `base := int | var | '(' expr ')'
/// | '-' base`. Note that unary minus binds tighter than `^`, so `-x^2`
/// denotes `(-x)^2`.
pub fn parse_expression(text: &str, vars: &Vars) -> Result<RationalFunction, PolyError> {
    let mut lexer = Lexer { src: text, pos: 0 };
    let first = lexer.next()?;
    let mut p = Parser {
        lexer,
        peeked: first,
        vars,
    };
    let rf = p.expr()?;
    if p.peeked.1 != Tok::End {
        return p.syntax("trailing input");
    }
    Ok(rf)
}

/// Parses an expression that must reduce to a polynomial.
pub fn parse_polynomial(text: &str, vars: &Vars) -> Result<Polynomial, PolyError> {
    parse_expression(text, vars)?
        .as_polynomial()
        .ok_or(PolyError::NotPolynomial)
}
