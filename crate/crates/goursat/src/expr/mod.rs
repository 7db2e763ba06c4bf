//! Exact symbolic expressions over a coordinate chart.
//!
//! An [`Expression`] is kept in rational normal form: a single quotient of
//! two expanded polynomials, reduced to lowest terms, with the denominator
//! normalised to leading coefficient one. Syntactic equality of normal forms
//! therefore decides mathematical equality, which is what every rank and
//! integrability test downstream relies on.

mod gcd;
mod parse;
mod poly;

pub use gcd::{gcd, gcd_list};
pub use parse::parse;
pub use poly::{rat_frac, rat_int, Mono, Poly, Rat};

use std::fmt;
use std::sync::Arc;

use num::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("chart mismatch: expected {expected}, got {got}")]
    ChartMismatch { expected: String, got: String },
    #[error("coordinate `{0}` does not belong to the chart")]
    ForeignCoordinate(String),
    #[error("duplicate coordinate name `{0}`")]
    DuplicateCoordinate(String),
    #[error("sampling exhausted the retry budget ({0} attempts hit a pole)")]
    SamplingExhausted(u32),
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("{0}")]
    Geometry(String),
    #[error("{0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, EngineError>;

/// An ordered list of coordinate names; all expressions, points and vector
/// fields carry the chart they live on.
#[derive(Clone, Debug)]
pub struct Chart(Arc<Vec<String>>);

impl Chart {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Chart> {
        let mut seen = std::collections::HashSet::new();
        for n in names {
            if !seen.insert(n.as_ref().to_string()) {
                return Err(EngineError::DuplicateCoordinate(n.as_ref().to_string()));
            }
        }
        Ok(Chart(Arc::new(
            names.iter().map(|n| n.as_ref().to_string()).collect(),
        )))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.0[idx]
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    pub fn coordinate(&self, name: &str) -> Result<Coordinate> {
        match self.index_of(name) {
            Some(index) => Ok(Coordinate {
                chart: self.clone(),
                index,
            }),
            None => Err(EngineError::ForeignCoordinate(name.to_string())),
        }
    }

    pub fn coordinates(&self) -> Vec<Coordinate> {
        (0..self.dim())
            .map(|index| Coordinate {
                chart: self.clone(),
                index,
            })
            .collect()
    }

    /// A new chart with extra variables appended (used to adjoin the
    /// projective parameters of a polar matrix).
    pub fn extend<S: AsRef<str>>(&self, extra: &[S]) -> Result<Chart> {
        let mut names: Vec<String> = self.0.as_ref().clone();
        names.extend(extra.iter().map(|s| s.as_ref().to_string()));
        Chart::new(&names)
    }
}

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}
impl Eq for Chart {}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.join(", "))
    }
}

/// One named coordinate of a chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coordinate {
    pub chart: Chart,
    pub index: usize,
}

impl Coordinate {
    pub fn name(&self) -> &str {
        self.chart.name(self.index)
    }
}

/// A chart-indexed vector of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoint {
    pub chart: Chart,
    pub values: Vec<Rat>,
}

impl RationalPoint {
    pub fn new(chart: &Chart, values: Vec<Rat>) -> Result<Self> {
        if values.len() != chart.dim() {
            return Err(EngineError::ChartMismatch {
                expected: format!("{} values", chart.dim()),
                got: format!("{} values", values.len()),
            });
        }
        Ok(RationalPoint {
            chart: chart.clone(),
            values,
        })
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .chart
            .names()
            .iter()
            .zip(&self.values)
            .map(|(n, v)| format!("{}={}", n, v))
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Result of evaluating an expression at a point: a pole is a value-level
/// signal, not a failure of the evaluator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Finite(Rat),
    Pole,
}

impl Value {
    pub fn finite(self) -> Option<Rat> {
        match self {
            Value::Finite(r) => Some(r),
            Value::Pole => None,
        }
    }

    pub fn is_pole(&self) -> bool {
        matches!(self, Value::Pole)
    }
}

/// A scalar function on the chart in rational normal form `num/den`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expression {
    num: Poly,
    den: Poly,
}

impl Expression {
    fn reduced(num: Poly, den: Poly) -> Expression {
        assert!(!den.is_zero(), "zero denominator after normalization");
        if num.is_zero() {
            return Expression {
                den: Poly::one(&num.chart),
                num,
            };
        }
        let g = gcd::gcd(&num, &den);
        let mut num = num.div_exact(&g).expect("gcd divides");
        let mut den = den.div_exact(&g).expect("gcd divides");
        // Monic denominator pins the common scalar factor.
        let lead = den.leading().map(|(_, c)| c.clone()).unwrap();
        if !lead.is_one() {
            let inv = Rat::one() / lead;
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Expression { num, den }
    }

    pub fn from_poly(p: Poly) -> Expression {
        Expression {
            den: Poly::one(&p.chart),
            num: p,
        }
    }

    pub fn zero(chart: &Chart) -> Expression {
        Expression::from_poly(Poly::zero(chart))
    }

    pub fn one(chart: &Chart) -> Expression {
        Expression::from_poly(Poly::one(chart))
    }

    pub fn constant(chart: &Chart, c: Rat) -> Expression {
        Expression::from_poly(Poly::constant(chart, c))
    }

    pub fn var(chart: &Chart, idx: usize) -> Expression {
        Expression::from_poly(Poly::var(chart, idx))
    }

    pub fn coordinate(c: &Coordinate) -> Expression {
        Expression::var(&c.chart, c.index)
    }

    pub fn chart(&self) -> &Chart {
        &self.num.chart
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        match (self.num.as_constant(), self.den.as_constant()) {
            (Some(n), Some(d)) => Some(n / d),
            _ => None,
        }
    }

    /// Node-count proxy used for deterministic tie-breaking: total number of
    /// monomials weighted by their variable multiplicities.
    pub fn size(&self) -> usize {
        let count = |p: &Poly| -> usize {
            p.terms
                .iter()
                .map(|(m, _)| 1 + m.0.iter().filter(|&&e| e > 0).count())
                .sum()
        };
        count(&self.num) + if self.den.is_one() { 0 } else { count(&self.den) }
    }

    fn assert_chart(&self, other: &Expression) {
        assert_eq!(
            self.chart(),
            other.chart(),
            "expressions from different charts"
        );
    }

    pub fn add(&self, other: &Expression) -> Expression {
        self.assert_chart(other);
        let num = self
            .num
            .mul(&other.den)
            .add(&other.num.mul(&self.den));
        let den = self.den.mul(&other.den);
        Expression::reduced(num, den)
    }

    pub fn sub(&self, other: &Expression) -> Expression {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Expression {
        Expression {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Expression) -> Expression {
        self.assert_chart(other);
        Expression::reduced(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn div(&self, other: &Expression) -> Result<Expression> {
        self.assert_chart(other);
        if other.is_zero() {
            return Err(EngineError::Geometry("division by zero expression".into()));
        }
        Ok(Expression::reduced(
            self.num.mul(&other.den),
            self.den.mul(&other.num),
        ))
    }

    pub fn recip(&self) -> Result<Expression> {
        Expression::one(self.chart()).div(self)
    }

    pub fn pow(&self, n: i64) -> Expression {
        if n == 0 {
            return Expression::one(self.chart());
        }
        let base = if n < 0 {
            self.recip().expect("negative power of zero expression")
        } else {
            self.clone()
        };
        let mut acc = Expression::one(self.chart());
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    pub fn scale(&self, c: &Rat) -> Expression {
        Expression::reduced(self.num.scale(c), self.den.clone())
    }

    /// Exact partial derivative with respect to a chart coordinate.
    pub fn differentiate(&self, c: &Coordinate) -> Result<Expression> {
        if c.chart != *self.chart() {
            return Err(EngineError::ForeignCoordinate(c.name().to_string()));
        }
        Ok(self.differentiate_index(c.index))
    }

    pub fn differentiate_index(&self, var: usize) -> Expression {
        let dn = self.num.derivative(var);
        let dd = self.den.derivative(var);
        if dd.is_zero() {
            return Expression::reduced(dn, self.den.clone());
        }
        let num = dn.mul(&self.den).sub(&self.num.mul(&dd));
        let den = self.den.mul(&self.den);
        Expression::reduced(num, den)
    }

    pub fn eval(&self, p: &RationalPoint) -> Result<Value> {
        if p.chart != *self.chart() {
            return Err(EngineError::ChartMismatch {
                expected: self.chart().to_string(),
                got: p.chart.to_string(),
            });
        }
        let d = self.den.eval(p);
        if d.is_zero() {
            return Ok(Value::Pole);
        }
        Ok(Value::Finite(self.num.eval(p) / d))
    }

    /// Substitute `subs[i]` for variable `i`; the substitutions share a
    /// target chart that becomes the chart of the result.
    pub fn substitute(&self, subs: &[Expression]) -> Result<Expression> {
        if subs.len() != self.chart().dim() {
            return Err(EngineError::ChartMismatch {
                expected: format!("{} substitutions", self.chart().dim()),
                got: format!("{}", subs.len()),
            });
        }
        let n = self.num.substitute(subs);
        let d = self.den.substitute(subs);
        if d.is_zero() {
            return Err(EngineError::Geometry(
                "substitution maps a denominator to zero".into(),
            ));
        }
        n.div(&d)
    }

    /// Lift to a larger chart whose first variables coincide with this one.
    pub fn lift_prefix(&self, chart: &Chart) -> Expression {
        let map: Vec<usize> = (0..self.chart().dim()).collect();
        Expression {
            num: self.num.lift_to(chart, &map),
            den: self.den.lift_to(chart, &map),
        }
    }

    /// Sign-normalised form used when presenting generators: clears rational
    /// content so that e.g. kernel vectors print as primitive polynomials.
    pub fn primitive_with_sign(&self) -> Expression {
        if self.is_zero() {
            return self.clone();
        }
        let (_, p) = self.num.content_and_primitive();
        Expression {
            num: p,
            den: self.den.clone(),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            if self.num.num_terms() > 1 {
                write!(f, "{}", self.num)
            } else {
                write!(f, "{}", self.num)
            }
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

/// Decides vanishing from the normal form and cross-checks it by sampling:
/// a nonzero normal form that evaluates to zero at `n` fresh random points
/// is reported as an internal inconsistency rather than resolved silently.
pub fn is_zero_checked(
    e: &Expression,
    sampler: &mut crate::sample::PointSampler,
    n: usize,
) -> Result<bool> {
    if e.is_zero() {
        return Ok(true);
    }
    let mut zeros = 0usize;
    for _ in 0..n {
        let p = sampler.sample_avoiding(e.chart(), std::slice::from_ref(e))?;
        match e.eval(&p)? {
            Value::Finite(v) if v.is_zero() => zeros += 1,
            Value::Finite(_) => return Ok(false),
            Value::Pole => unreachable!("sampler avoids poles"),
        }
    }
    Err(EngineError::Inconsistency(format!(
        "normal form of `{}` is nonzero but {} samples all evaluated to zero",
        e, zeros
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart6() -> Chart {
        Chart::new(&["x1", "x2", "x3", "x4", "x5", "x6"]).unwrap()
    }

    #[test]
    fn parse_example_coefficient() {
        let c = chart6();
        let e = parse("(1 + x2*x6)/x6", &c).unwrap();
        assert_eq!(e.denominator().to_string(), "x6");
        assert_eq!(e.to_string(), "(x2*x6 + 1)/(x6)");
    }

    #[test]
    fn parse_zero_is_canonical() {
        let c = chart6();
        let e = parse("0", &c).unwrap();
        assert!(e.is_zero());
        assert_eq!(e, Expression::zero(&c));
    }

    #[test]
    fn parse_binomial_over_marino_chart() {
        let c = Chart::new(&["t", "x1", "x2", "x3", "x4", "v1", "v2", "v3", "u1", "u2"]).unwrap();
        let e = parse("x1 - v1*x2", &c).unwrap();
        assert_eq!(e.numerator().num_terms(), 2);
        assert!(e.denominator().is_one());
    }

    #[test]
    fn derivative_cancels_quotient() {
        let c = chart6();
        let e = parse("(1 + x2*x6)/x6", &c).unwrap();
        let d = e.differentiate(&c.coordinate("x2").unwrap()).unwrap();
        assert!(d.is_one());
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let c = chart6();
        let e = parse("7/3", &c).unwrap();
        let d = e.differentiate(&c.coordinate("x1").unwrap()).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn derivative_of_shifted_reciprocal() {
        let c = chart6();
        let e = parse("x5 - 1/x1", &c).unwrap();
        let d = e.differentiate(&c.coordinate("x1").unwrap()).unwrap();
        let expected = parse("1/x1^2", &c).unwrap();
        assert_eq!(d, expected);
    }

    #[test]
    fn evaluate_rational() {
        let c = chart6();
        let e = parse("(1 + x2*x6)/x6", &c).unwrap();
        let mut vals = vec![rat_int(0); 6];
        vals[1] = rat_int(1);
        vals[5] = rat_int(2);
        let p = RationalPoint::new(&c, vals).unwrap();
        assert_eq!(e.eval(&p).unwrap(), Value::Finite(rat_frac(3, 2)));
    }

    #[test]
    fn evaluate_pole_signal() {
        let c = chart6();
        let e = parse("1/x1", &c).unwrap();
        let p = RationalPoint::new(&c, vec![rat_int(0); 6]).unwrap();
        assert!(e.eval(&p).unwrap().is_pole());
    }

    #[test]
    fn evaluate_binomial() {
        let c = Chart::new(&["x1", "v1", "x2"]).unwrap();
        let e = parse("x1 - v1*x2", &c).unwrap();
        let p = RationalPoint::new(&c, vec![rat_int(3), rat_frac(1, 2), rat_int(4)]).unwrap();
        assert_eq!(e.eval(&p).unwrap(), Value::Finite(rat_int(1)));
    }

    #[test]
    fn is_zero_by_normal_form() {
        let c = chart6();
        assert!(parse("x6/x6 - 1", &c).unwrap().is_zero());
        assert!(!parse("x1", &c).unwrap().is_zero());
    }

    #[test]
    fn print_parse_round_trip() {
        let c = chart6();
        for src in [
            "(1 + x2*x6)/x6",
            "x5 - 1/x1",
            "x1^3 - 2/5*x2 + 4",
            "(x1 + x2)/(x3 - x4^2)",
        ] {
            let e = parse(src, &c).unwrap();
            let again = parse(&e.to_string(), &c).unwrap();
            assert_eq!(e, again, "round trip failed for {}", src);
        }
    }

    #[test]
    fn chart_mismatch_is_reported() {
        let c = chart6();
        let other = Chart::new(&["y"]).unwrap();
        let e = parse("x1", &c).unwrap();
        assert!(e.differentiate(&other.coordinate("y").unwrap()).is_err());
    }
}
