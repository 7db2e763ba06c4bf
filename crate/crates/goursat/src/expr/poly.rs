//! Multivariate polynomials over `Q` with a fixed graded-lexicographic term
//! order. These are the building blocks of the canonical rational normal form
//! in [`super::Expression`].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};

use super::{Chart, RationalPoint};

pub type Rat = BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Exponent vector over a chart. Total order: degree first, then
/// lexicographic on exponents; this fixes the leading term used by the
/// normal-form sign convention and by printing.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(nvars: usize) -> Self {
        Mono(vec![0; nvars])
    }

    pub fn var(nvars: usize, idx: usize) -> Self {
        let mut e = vec![0; nvars];
        e[idx] = 1;
        Mono(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming divisibility.
    pub fn div_into(&self, other: &Mono) -> Mono {
        Mono(
            other
                .0
                .iter()
                .zip(&self.0)
                .map(|(b, a)| b - a)
                .collect(),
        )
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial with rational coefficients. The invariant is that
/// no stored coefficient is zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    pub chart: Chart,
    pub terms: BTreeMap<Mono, Rat>,
}

impl Poly {
    pub fn zero(chart: &Chart) -> Self {
        Poly {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(chart: &Chart, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::one(chart.dim()), c);
        }
        Poly {
            chart: chart.clone(),
            terms,
        }
    }

    pub fn one(chart: &Chart) -> Self {
        Self::constant(chart, Rat::one())
    }

    pub fn var(chart: &Chart, idx: usize) -> Self {
        assert!(idx < chart.dim(), "variable index out of chart");
        let mut terms = BTreeMap::new();
        terms.insert(Mono::var(chart.dim(), idx), Rat::one());
        Poly {
            chart: chart.clone(),
            terms,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(Mono::is_one)
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.is_zero() {
            return Some(Rat::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Leading (monomial, coefficient) under the global term order.
    pub fn leading(&self) -> Option<(&Mono, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Mono::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.0[var]).max().unwrap_or(0)
    }

    /// Highest-index variable that actually occurs, if any.
    pub fn top_var(&self) -> Option<usize> {
        let mut top = None;
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 && top.map(|t| i > t).unwrap_or(true) {
                    top = Some(i);
                }
            }
        }
        top
    }

    pub fn occurs(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.0[var] > 0)
    }

    fn insert_term(terms: &mut BTreeMap<Mono, Rat>, m: Mono, c: Rat) {
        if c.is_zero() {
            return;
        }
        match terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.chart, other.chart);
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            Self::insert_term(&mut terms, m.clone(), c.clone());
        }
        Poly {
            chart: self.chart.clone(),
            terms,
        }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            chart: self.chart.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        debug_assert_eq!(self.chart, other.chart);
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                Self::insert_term(&mut terms, ma.mul(mb), ca * cb);
            }
        }
        Poly {
            chart: self.chart.clone(),
            terms,
        }
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.chart);
        }
        Poly {
            chart: self.chart.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    pub fn mul_term(&self, m: &Mono, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.chart);
        }
        Poly {
            chart: self.chart.clone(),
            terms: self
                .terms
                .iter()
                .map(|(mm, k)| (mm.mul(m), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one(&self.chart);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Poly {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e > 0 {
                let mut me = m.clone();
                me.0[var] = e - 1;
                Self::insert_term(&mut terms, me, c * rat_int(e as i64));
            }
        }
        Poly {
            chart: self.chart.clone(),
            terms,
        }
    }

    pub fn eval(&self, point: &RationalPoint) -> Rat {
        debug_assert_eq!(self.chart, point.chart);
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= &point.values[i];
                }
            }
            acc += t;
        }
        acc
    }

    /// View as a univariate polynomial in `var` with `Poly` coefficients
    /// (index = degree in `var`).
    pub fn coeffs_in(&self, var: usize) -> Vec<Poly> {
        let d = self.degree_in(var) as usize;
        let mut out = vec![Poly::zero(&self.chart); d + 1];
        for (m, c) in &self.terms {
            let e = m.0[var] as usize;
            let mut me = m.clone();
            me.0[var] = 0;
            Self::insert_term(&mut out[e].terms, me, c.clone());
        }
        out
    }

    pub fn from_coeffs_in(chart: &Chart, var: usize, coeffs: &[Poly]) -> Poly {
        let mut acc = Poly::zero(chart);
        for (e, c) in coeffs.iter().enumerate() {
            let m = {
                let mut m = Mono::one(chart.dim());
                m.0[var] = e as u32;
                m
            };
            acc = acc.add(&c.mul_term(&m, &Rat::one()));
        }
        acc
    }

    /// Exact division; `None` when `other` does not divide `self`.
    pub fn div_exact(&self, other: &Poly) -> Option<Poly> {
        assert!(!other.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(Poly::zero(&self.chart));
        }
        if let Some(c) = other.as_constant() {
            return Some(self.scale(&(Rat::one() / c)));
        }
        let (lm, lc) = other.leading().unwrap();
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = self.clone();
        let mut quo = Poly::zero(&self.chart);
        while !rem.is_zero() {
            let (rm, rc) = rem.leading().unwrap();
            if !lm.divides(rm) {
                return None;
            }
            let m = lm.div_into(rm);
            let c = rc / &lc;
            let t = Poly {
                chart: self.chart.clone(),
                terms: BTreeMap::from([(m.clone(), c.clone())]),
            };
            quo = quo.add(&t);
            rem = rem.sub(&other.mul_term(&m, &c));
        }
        Some(quo)
    }

    /// Rational content: the poly equals `content * primitive_part` where
    /// the primitive part has coprime integer coefficients and positive
    /// leading coefficient.
    pub fn content_and_primitive(&self) -> (Rat, Poly) {
        if self.is_zero() {
            return (Rat::zero(), self.clone());
        }
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            den_lcm = num::integer::lcm(den_lcm, c.denom().clone());
        }
        let mut num_gcd = BigInt::zero();
        for c in self.terms.values() {
            let scaled = c.numer() * (&den_lcm / c.denom());
            num_gcd = num::integer::gcd(num_gcd, scaled);
        }
        let mut content = Rat::new(num_gcd, den_lcm);
        let prim = self.scale(&(Rat::one() / &content));
        if prim.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            content = -content;
        }
        let prim = self.scale(&(Rat::one() / &content));
        (content, prim)
    }

    /// Substitute an expression for every variable (used for coordinate
    /// changes and map composition). `subs[i]` replaces variable `i` and
    /// must all share one target chart.
    pub fn substitute(&self, subs: &[super::Expression]) -> super::Expression {
        assert_eq!(subs.len(), self.chart.dim());
        let target = subs
            .first()
            .map(|e| e.chart().clone())
            .expect("substitution into empty chart");
        let mut acc = super::Expression::zero(&target);
        for (m, c) in &self.terms {
            let mut term = super::Expression::constant(&target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&subs[i].pow(e as i64));
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Re-express over a larger chart; `map[i]` is the index in `chart` of
    /// this polynomial's variable `i`.
    pub fn lift_to(&self, chart: &Chart, map: &[usize]) -> Poly {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut e = vec![0u32; chart.dim()];
            for (i, &ex) in m.0.iter().enumerate() {
                e[map[i]] = ex;
            }
            terms.insert(Mono(e), c.clone());
        }
        Poly {
            chart: chart.clone(),
            terms,
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !mag.is_one() || m.is_one() {
                if mag.denom().is_one() {
                    parts.push(mag.numer().to_string());
                } else {
                    parts.push(format!("{}/{}", mag.numer(), mag.denom()));
                }
            }
            for (i, &e) in m.0.iter().enumerate() {
                if e == 1 {
                    parts.push(self.chart.name(i).to_string());
                } else if e > 1 {
                    parts.push(format!("{}^{}", self.chart.name(i), e));
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}
