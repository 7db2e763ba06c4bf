//! Vector fields, distributions, Lie brackets, derived flags and Cauchy
//! bundles on a coordinate patch.
//!
//! Ranks are generic ranks: every distribution carries a certificate naming
//! a witness point where the exact rational rank of the coefficient matrix
//! attains the symbolic (function field) rank, plus any sampled points where
//! the rank drops. A disagreement between the symbolic rank and every sample
//! is reported as a regularity failure rather than resolved silently.

use std::fmt;

use crate::exec;
use crate::expr::{
    gcd, gcd_list, Chart, EngineError, Expression, Poly, Rat, RationalPoint, Result, Value,
};
use crate::matrix::{rank_q, Span};
use crate::sample::SampleConfig;

/// A vector field `sum_i a_i d/dx_i` with exact expression coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    chart: Chart,
    coeffs: Vec<Expression>,
}

impl VectorField {
    pub fn new(chart: &Chart, coeffs: Vec<Expression>) -> Result<Self> {
        if coeffs.len() != chart.dim() {
            return Err(EngineError::ChartMismatch {
                expected: format!("{} coefficients", chart.dim()),
                got: format!("{}", coeffs.len()),
            });
        }
        for c in &coeffs {
            if c.chart() != chart {
                return Err(EngineError::ChartMismatch {
                    expected: chart.to_string(),
                    got: c.chart().to_string(),
                });
            }
        }
        Ok(VectorField {
            chart: chart.clone(),
            coeffs,
        })
    }

    pub fn zero(chart: &Chart) -> Self {
        VectorField {
            chart: chart.clone(),
            coeffs: vec![Expression::zero(chart); chart.dim()],
        }
    }

    /// The coordinate field `d/dx_idx`.
    pub fn coordinate(chart: &Chart, idx: usize) -> Self {
        let mut coeffs = vec![Expression::zero(chart); chart.dim()];
        coeffs[idx] = Expression::one(chart);
        VectorField {
            chart: chart.clone(),
            coeffs,
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn coeffs(&self) -> &[Expression] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &Expression {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Expression::is_zero)
    }

    /// Directional derivative `X(f)`.
    pub fn apply(&self, f: &Expression) -> Expression {
        let mut acc = Expression::zero(&self.chart);
        for (i, a) in self.coeffs.iter().enumerate() {
            if !a.is_zero() {
                let df = f.differentiate_index(i);
                if !df.is_zero() {
                    acc = acc.add(&a.mul(&df));
                }
            }
        }
        acc
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn neg(&self) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().map(Expression::neg).collect(),
        }
    }

    pub fn scale(&self, f: &Expression) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            coeffs: self.coeffs.iter().map(|c| c.mul(f)).collect(),
        }
    }

    /// Clear denominators and integer content, normalising the sign so the
    /// first nonzero coefficient has a positive leading term. Used when
    /// presenting solver output (Cauchy generators, kernel combinations).
    pub fn cleared(&self) -> VectorField {
        if self.is_zero() {
            return self.clone();
        }
        let mut den = Poly::one(&self.chart);
        for c in &self.coeffs {
            if !c.is_zero() {
                let g = gcd(&den, c.denominator());
                den = den.mul(c.denominator()).div_exact(&g).expect("gcd divides");
            }
        }
        let den_e = Expression::from_poly(den);
        let scaled: Vec<Expression> = self.coeffs.iter().map(|c| c.mul(&den_e)).collect();
        let numerators: Vec<Poly> = scaled.iter().map(|c| c.numerator().clone()).collect();
        let content = gcd_list(&numerators);
        let content_e = Expression::from_poly(content);
        let mut out: Vec<Expression> = scaled
            .iter()
            .map(|c| c.div(&content_e).expect("content divides"))
            .collect();
        if let Some(first) = out.iter().position(|c| !c.is_zero()) {
            if out[first]
                .numerator()
                .leading()
                .map(|(_, c)| c < &Rat::from_integer(0.into()))
                .unwrap_or(false)
            {
                out = out.iter().map(Expression::neg).collect();
            }
        }
        VectorField {
            chart: self.chart.clone(),
            coeffs: out,
        }
    }

    pub fn eval(&self, p: &RationalPoint) -> Result<Option<Vec<Rat>>> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            match c.eval(p)? {
                Value::Finite(v) => out.push(v),
                Value::Pole => return Ok(None),
            }
        }
        Ok(Some(out))
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if c.is_one() {
                parts.push(format!("d_{}", self.chart.name(i)));
            } else {
                parts.push(format!("({})*d_{}", c, self.chart.name(i)));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `[X, Y]_i = X(Y_i) - Y(X_i)`, exact and normalised.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    if x.chart != y.chart {
        return Err(EngineError::ChartMismatch {
            expected: x.chart.to_string(),
            got: y.chart.to_string(),
        });
    }
    let coeffs = (0..x.chart.dim())
        .map(|i| x.apply(&y.coeffs[i]).sub(&y.apply(&x.coeffs[i])))
        .collect();
    Ok(VectorField {
        chart: x.chart.clone(),
        coeffs,
    })
}

/// Witness data behind a certified generic rank.
#[derive(Clone, Debug)]
pub struct RankCertificate {
    pub rank: usize,
    pub witness: RationalPoint,
    /// Sampled points where the exact rank dropped below the generic rank.
    pub singular_points: Vec<(RationalPoint, usize)>,
    pub samples: usize,
}

/// An ordered list of generator fields together with a certified generic
/// rank. Generators are stored exactly as given; rank bookkeeping never
/// rewrites the presentation.
#[derive(Clone, Debug)]
pub struct Distribution {
    chart: Chart,
    generators: Vec<VectorField>,
    rank: usize,
    certificate: RankCertificate,
}

impl Distribution {
    pub fn certify(generators: Vec<VectorField>, cfg: &SampleConfig) -> Result<Distribution> {
        let chart = generators
            .first()
            .map(|g| g.chart.clone())
            .ok_or_else(|| EngineError::Geometry("empty generator list".into()))?;
        let (rank, certificate) = generic_rank(&generators, cfg)?;
        Ok(Distribution {
            chart,
            generators,
            rank,
            certificate,
        })
    }

    /// A rank-0 distribution on the chart (the zero bundle).
    pub fn trivial(chart: &Chart, cfg: &SampleConfig) -> Distribution {
        let witness = cfg.sampler().sample_point(chart);
        Distribution {
            chart: chart.clone(),
            generators: Vec::new(),
            rank: 0,
            certificate: RankCertificate {
                rank: 0,
                witness,
                singular_points: Vec::new(),
                samples: 0,
            },
        }
    }

    /// Drop zero and dependent fields (function-field span test, first-come
    /// order), then certify. Solver outputs go through this.
    pub fn from_fields_reduced(fields: Vec<VectorField>, cfg: &SampleConfig) -> Result<Distribution> {
        let chart = fields
            .first()
            .map(|g| g.chart.clone())
            .ok_or_else(|| EngineError::Geometry("empty generator list".into()))?;
        let mut span = Span::empty(&chart, chart.dim());
        let mut kept = Vec::new();
        for f in fields {
            if f.is_zero() {
                continue;
            }
            if span.add_row(f.coeffs.clone()) {
                kept.push(f);
            }
        }
        if kept.is_empty() {
            return Ok(Distribution::trivial(&chart, cfg));
        }
        Distribution::certify(kept, cfg)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn generators(&self) -> &[VectorField] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn certificate(&self) -> &RankCertificate {
        &self.certificate
    }

    pub fn coefficient_rows(&self) -> Vec<Vec<Expression>> {
        self.generators.iter().map(|g| g.coeffs.clone()).collect()
    }

    pub fn span(&self) -> Span {
        Span::from_rows(&self.chart, self.chart.dim(), &self.coefficient_rows())
    }

    pub fn contains_field(&self, f: &VectorField) -> bool {
        self.span().contains(f.coeffs())
    }

    /// All coefficient expressions, used as pole guards when sampling.
    pub fn guard_expressions(&self) -> Vec<Expression> {
        self.generators
            .iter()
            .flat_map(|g| g.coeffs.iter().cloned())
            .filter(|e| !e.is_constant())
            .collect()
    }
}

/// Certify the generic rank of a family of fields: the symbolic rank over
/// the function field, witnessed by a sampled point attaining it.
pub fn generic_rank(
    fields: &[VectorField],
    cfg: &SampleConfig,
) -> Result<(usize, RankCertificate)> {
    let chart = fields
        .first()
        .map(|g| g.chart.clone())
        .ok_or_else(|| EngineError::Geometry("empty generator list".into()))?;
    let rows: Vec<Vec<Expression>> = fields.iter().map(|g| g.coeffs.clone()).collect();
    let symbolic = Span::from_rows(&chart, chart.dim(), &rows).rank();

    let guards: Vec<Expression> = fields
        .iter()
        .flat_map(|g| g.coeffs.iter().cloned())
        .filter(|e| !e.is_constant())
        .collect();
    let mut sampler = cfg.sampler();
    let points = sampler.sample_batch(&chart, &guards, cfg.samples.max(1))?;
    let ranks: Vec<usize> = exec::map_items(points.clone(), |p| {
        let m: Vec<Vec<Rat>> = fields
            .iter()
            .map(|g| {
                g.eval(&p)
                    .expect("chart matches")
                    .expect("sampler avoids poles")
            })
            .collect();
        rank_q(&m)
    });

    let mut witness = None;
    let mut singular = Vec::new();
    for (p, r) in points.iter().zip(&ranks) {
        if *r == symbolic && witness.is_none() {
            witness = Some(p.clone());
        } else if *r < symbolic {
            singular.push((p.clone(), *r));
        }
    }
    let witness = witness.ok_or_else(|| {
        EngineError::Geometry(format!(
            "regularity failure: symbolic rank {} not attained at any of {} sampled points \
             (sampled ranks {:?})",
            symbolic,
            points.len(),
            ranks
        ))
    })?;
    Ok((
        symbolic,
        RankCertificate {
            rank: symbolic,
            witness,
            singular_points: singular,
            samples: points.len(),
        },
    ))
}

/// First derived bundle: generators plus all pairwise brackets that enlarge
/// the span.
pub fn derived_bundle(d: &Distribution, cfg: &SampleConfig) -> Result<Distribution> {
    let mut gens = d.generators.to_vec();
    let mut span = Span::from_rows(&d.chart, d.chart.dim(), &d.coefficient_rows());
    let n = d.generators.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let b = lie_bracket(&d.generators[i], &d.generators[j])?;
            if b.is_zero() {
                continue;
            }
            if span.add_row(b.coeffs.clone()) {
                gens.push(b.cleared());
            }
        }
    }
    if gens.len() == d.generators.len() {
        return Ok(d.clone());
    }
    Distribution::certify(gens, cfg)
}

#[derive(Clone, Debug)]
pub struct DerivedFlag {
    /// `levels[i]` is the i-th derived bundle; `levels[0]` is the input.
    pub levels: Vec<Distribution>,
    /// Smallest k with `V^(k+1) = V^(k)`.
    pub derived_length: usize,
}

impl DerivedFlag {
    pub fn ranks(&self) -> Vec<usize> {
        self.levels.iter().map(Distribution::rank).collect()
    }

    pub fn top(&self) -> &Distribution {
        self.levels.last().unwrap()
    }
}

/// Iterate derived bundles to stabilisation, checking strict rank growth.
pub fn derived_flag(d: &Distribution, cfg: &SampleConfig) -> Result<DerivedFlag> {
    let mut levels = vec![d.clone()];
    loop {
        let current = levels.last().unwrap();
        let next = derived_bundle(current, cfg)?;
        if next.rank() == current.rank() {
            // Stabilisation witnessed: no bracket left the span.
            let derived_length = levels.len() - 1;
            return Ok(DerivedFlag {
                levels,
                derived_length,
            });
        }
        if next.rank() < current.rank() {
            return Err(EngineError::Inconsistency(
                "derived bundle rank decreased".into(),
            ));
        }
        if levels.len() > d.chart.dim() + 1 {
            return Err(EngineError::Inconsistency(
                "derived flag failed to stabilise within the chart dimension".into(),
            ));
        }
        levels.push(next);
    }
}

/// The Cauchy (characteristic) bundle: sections `X = sum c_i G_i` with
/// `[X, G_j]` in the distribution for every generator `G_j`. The bracket
/// membership conditions are linear over the function field in the unknown
/// section coefficients `c_i`, because the derivative terms `(G_j c_i) G_i`
/// already lie in the distribution.
pub fn cauchy_bundle(d: &Distribution, cfg: &SampleConfig) -> Result<Distribution> {
    let n = d.generators.len();
    if n == 0 {
        return Ok(d.clone());
    }
    let dim = d.chart.dim();
    let span = d.span();
    // residual[i][j] = [G_i, G_j] reduced against the span of D
    let mut rows: Vec<Vec<Expression>> = Vec::new();
    let brackets: Vec<Vec<Vec<Expression>>> = exec::map_indexed(n, |i| {
        (0..n)
            .map(|j| {
                let b = lie_bracket(&d.generators[i], &d.generators[j]).expect("shared chart");
                span.reduce(b.coeffs())
            })
            .collect()
    });
    for j in 0..n {
        for t in 0..dim {
            let row: Vec<Expression> = (0..n).map(|i| brackets[i][j][t].clone()).collect();
            if row.iter().all(Expression::is_zero) {
                continue;
            }
            rows.push(row);
        }
    }
    if rows.is_empty() {
        // Everything brackets back into D: the distribution is its own Cauchy
        // bundle (it is integrable).
        return Ok(d.clone());
    }
    check_condition_regularity(&d.chart, &rows, cfg, "Cauchy system")?;
    let kernel = crate::matrix::kernel_basis(&d.chart, n, &rows);
    if kernel.is_empty() {
        return Ok(Distribution::trivial(&d.chart, cfg));
    }
    let fields: Vec<VectorField> = kernel
        .iter()
        .map(|c| {
            let mut x = VectorField::zero(&d.chart);
            for (i, ci) in c.iter().enumerate() {
                if !ci.is_zero() {
                    x = x.add(&d.generators[i].scale(ci));
                }
            }
            x.cleared()
        })
        .collect();
    Distribution::from_fields_reduced(fields, cfg)
}

/// Opportunistic total-regularity check: the sampled rank of a symbolic
/// condition matrix must agree with its function-field rank wherever the
/// entries are finite.
fn check_condition_regularity(
    chart: &Chart,
    rows: &[Vec<Expression>],
    cfg: &SampleConfig,
    what: &str,
) -> Result<()> {
    let width = rows[0].len();
    let symbolic = Span::from_rows(chart, width, rows).rank();
    let guards: Vec<Expression> = rows
        .iter()
        .flat_map(|r| r.iter().cloned())
        .filter(|e| !e.is_constant())
        .collect();
    let mut sampler = cfg.sampler();
    let points = sampler.sample_batch(chart, &guards, cfg.samples.max(1))?;
    let ranks: Vec<usize> = exec::map_items(points.clone(), |p| {
        crate::matrix::rank_at(rows, &p)
            .expect("chart matches")
            .expect("sampler avoids poles")
    });
    if !ranks.iter().any(|&r| r == symbolic) {
        return Err(EngineError::Geometry(format!(
            "{} rank is non-constant: symbolic rank {} never attained across {} samples \
             (ranks {:?}); first point {}",
            what,
            symbolic,
            points.len(),
            ranks,
            points[0]
        )));
    }
    Ok(())
}

/// Intersection of two distributions by exact linear algebra over the
/// function field.
pub fn intersect(a: &Distribution, b: &Distribution, cfg: &SampleConfig) -> Result<Distribution> {
    if a.chart != b.chart {
        return Err(EngineError::ChartMismatch {
            expected: a.chart.to_string(),
            got: b.chart.to_string(),
        });
    }
    let dim = a.chart.dim();
    let na = a.generators.len();
    let nb = b.generators.len();
    if na == 0 || nb == 0 {
        return Ok(Distribution::trivial(&a.chart, cfg));
    }
    // Unknowns (alpha, beta): sum alpha_i A_i - sum beta_j B_j = 0.
    let mut rows = Vec::with_capacity(dim);
    for t in 0..dim {
        let mut row = Vec::with_capacity(na + nb);
        for g in &a.generators {
            row.push(g.coeffs[t].clone());
        }
        for g in &b.generators {
            row.push(g.coeffs[t].neg());
        }
        rows.push(row);
    }
    check_condition_regularity(&a.chart, &rows, cfg, "intersection system")?;
    let kernel = crate::matrix::kernel_basis(&a.chart, na + nb, &rows);
    let fields: Vec<VectorField> = kernel
        .iter()
        .map(|c| {
            let mut x = VectorField::zero(&a.chart);
            for (i, ci) in c[..na].iter().enumerate() {
                if !ci.is_zero() {
                    x = x.add(&a.generators[i].scale(ci));
                }
            }
            x.cleared()
        })
        .filter(|x| !x.is_zero())
        .collect();
    if fields.is_empty() {
        return Ok(Distribution::trivial(&a.chart, cfg));
    }
    Distribution::from_fields_reduced(fields, cfg)
}

/// Frobenius test: every pairwise bracket of generators lies in the span.
pub fn is_integrable(d: &Distribution) -> Result<bool> {
    let span = d.span();
    let n = d.generators.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let b = lie_bracket(&d.generators[i], &d.generators[j])?;
            if !span.contains(b.coeffs()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Push a distribution forward through a recorded invertible polynomial
/// coordinate change. `forward[j]` expresses target coordinate `y_j` in
/// source coordinates; `inverse[i]` expresses source coordinate `x_i` in
/// target coordinates.
pub fn pushforward(
    d: &Distribution,
    forward: &[Expression],
    inverse: &[Expression],
    target: &Chart,
    cfg: &SampleConfig,
) -> Result<Distribution> {
    let dim = d.chart.dim();
    if forward.len() != target.dim() || inverse.len() != dim {
        return Err(EngineError::Input(
            "coordinate change components do not match chart dimensions".into(),
        ));
    }
    let mut fields = Vec::with_capacity(d.generators.len());
    for g in &d.generators {
        let mut coeffs = Vec::with_capacity(target.dim());
        for fj in forward {
            // (phi_* G)^j = sum_i dphi_j/dx_i G^i, then rewritten in target
            // coordinates through the recorded inverse.
            let mut acc = Expression::zero(&d.chart);
            for i in 0..dim {
                let df = fj.differentiate_index(i);
                if !df.is_zero() && !g.coeffs[i].is_zero() {
                    acc = acc.add(&df.mul(&g.coeffs[i]));
                }
            }
            coeffs.push(acc.substitute(inverse)?);
        }
        fields.push(VectorField::new(target, coeffs)?);
    }
    Distribution::certify(fields, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn cfg() -> SampleConfig {
        SampleConfig::with_seed(11)
    }

    fn field(chart: &Chart, comps: &[&str]) -> VectorField {
        VectorField::new(
            chart,
            comps.iter().map(|s| parse(s, chart).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn bracket_of_coordinate_fields_vanishes() {
        let c = Chart::new(&["x", "y"]).unwrap();
        let dx = VectorField::coordinate(&c, 0);
        let dy = VectorField::coordinate(&c, 1);
        assert!(lie_bracket(&dx, &dy).unwrap().is_zero());
    }

    #[test]
    fn bracket_with_linear_coefficient() {
        let c = Chart::new(&["x", "y"]).unwrap();
        let dx = VectorField::coordinate(&c, 0);
        let xdy = field(&c, &["0", "x"]);
        let b = lie_bracket(&dx, &xdy).unwrap();
        assert_eq!(b, VectorField::coordinate(&c, 1));
    }

    #[test]
    fn bracket_of_marino_drift_with_vertical() {
        // [X, d_u1] = -d_x3 for the drift field of the two-control system.
        let c = Chart::new(&["t", "x1", "x2", "x3", "x4", "u1", "u2"]).unwrap();
        let drift = field(
            &c,
            &["1", "x2 + u2*x3", "x3 + u2*x1", "u1", "u2", "0", "0"],
        );
        let du1 = VectorField::coordinate(&c, 5);
        let b = lie_bracket(&drift, &du1).unwrap();
        assert_eq!(b, VectorField::coordinate(&c, 3).neg());
    }

    #[test]
    fn generic_rank_of_duplicate_fields() {
        let c = Chart::new(&["x", "y"]).unwrap();
        let dx = VectorField::coordinate(&c, 0);
        let (r, _) = generic_rank(&[dx.clone(), dx], &cfg()).unwrap();
        assert_eq!(r, 1);
    }

    #[test]
    fn generic_rank_detects_drop_points() {
        // {x d_x, d_x}: generic rank 1 over the function field of a single
        // fibre... over the plane both fields point along x, rank 1; use
        // {x d_x, d_y} to see rank 2 with a drop along x = 0.
        let c = Chart::new(&["x", "y"]).unwrap();
        let xdx = field(&c, &["x", "0"]);
        let dy = VectorField::coordinate(&c, 1);
        let (r, cert) = generic_rank(&[xdx.clone(), dy], &cfg()).unwrap();
        assert_eq!(r, 2);
        // {x d_x, d_x} has generic rank 1: proportional over the function field.
        let dx = VectorField::coordinate(&c, 0);
        let (r1, _) = generic_rank(&[xdx, dx], &cfg()).unwrap();
        assert_eq!(r1, 1);
        assert!(cert.singular_points.iter().all(|(_, k)| *k < 2));
    }

    #[test]
    fn derived_bundle_of_integrable_is_stable() {
        let c = Chart::new(&["x", "y"]).unwrap();
        let d = Distribution::certify(
            vec![VectorField::coordinate(&c, 0), VectorField::coordinate(&c, 1)],
            &cfg(),
        )
        .unwrap();
        let d1 = derived_bundle(&d, &cfg()).unwrap();
        assert_eq!(d1.rank(), d.rank());
    }

    #[test]
    fn contact_system_on_r3_has_full_first_derived_bundle() {
        let c = Chart::new(&["x", "z", "z1"]).unwrap();
        let t = field(&c, &["1", "z1", "0"]);
        let v = VectorField::coordinate(&c, 2);
        let d = Distribution::certify(vec![t, v], &cfg()).unwrap();
        let d1 = derived_bundle(&d, &cfg()).unwrap();
        assert_eq!(d1.rank(), 3);
        assert!(!is_integrable(&d).unwrap());
    }

    #[test]
    fn cauchy_bundle_of_integrable_is_itself() {
        let c = Chart::new(&["x", "y", "z"]).unwrap();
        let d = Distribution::certify(
            vec![VectorField::coordinate(&c, 0), VectorField::coordinate(&c, 1)],
            &cfg(),
        )
        .unwrap();
        let ch = cauchy_bundle(&d, &cfg()).unwrap();
        assert_eq!(ch.rank(), 2);
        assert!(is_integrable(&ch).unwrap());
    }

    #[test]
    fn intersection_with_self_is_identity_rank() {
        let c = Chart::new(&["x", "y", "z"]).unwrap();
        let d = Distribution::certify(
            vec![VectorField::coordinate(&c, 0), field(&c, &["0", "x", "1"])],
            &cfg(),
        )
        .unwrap();
        let i = intersect(&d, &d, &cfg()).unwrap();
        assert_eq!(i.rank(), d.rank());
    }

    #[test]
    fn bracket_antisymmetry_on_random_fields() {
        let c = Chart::new(&["x", "y", "z"]).unwrap();
        let a = field(&c, &["x*y", "1/z", "x - y^2"]);
        let b = field(&c, &["z", "x^2", "y/x"]);
        let ab = lie_bracket(&a, &b).unwrap();
        let ba = lie_bracket(&b, &a).unwrap();
        assert_eq!(ab, ba.neg());
    }
}
