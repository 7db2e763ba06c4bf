//! Complete sets of first integrals of integrable distributions.
//!
//! The solver is ansatz-based: coordinates annihilated by every generator
//! are harvested directly, and the rest are found as rational functions
//! `P/Q` with bounded numerator degree and denominators drawn from a small
//! candidate set (single coordinates and the denominators that already occur
//! in the generator coefficients). Imposing `X(P/Q) = 0` for every generator
//! is linear in the numerator coefficients once the denominator is fixed, so
//! each stage is one exact rational kernel computation. Every returned
//! integral is re-verified by an exact `is_zero` on `X(phi)`; failure is an
//! explicit object carrying the partial set, never a wrong answer.

use std::collections::BTreeSet;

use crate::exec;
use crate::expr::{
    Chart, EngineError, Expression, Mono, Poly, Rat, RationalPoint, Result, Value,
};
use crate::geom::Distribution;
use crate::matrix::{kernel_q, rank_q};
use crate::sample::SampleConfig;

#[derive(Clone, Debug)]
pub struct AnsatzConfig {
    pub max_num_degree: u32,
    pub max_den_degree: u32,
    /// Restrict numerator monomials to these coordinates; `None` means all
    /// coordinates not already spanned by the distribution.
    pub support: Option<Vec<usize>>,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        AnsatzConfig {
            max_num_degree: 3,
            max_den_degree: 2,
            support: None,
        }
    }
}

/// A complete independent set of first integrals with its certificate.
#[derive(Clone, Debug)]
pub struct InvariantSet {
    pub functions: Vec<Expression>,
    pub jacobian_rank: usize,
    pub witness: RationalPoint,
}

/// Outcome of the solver: either a complete set of `dim - rank` integrals or
/// the partial set found within the ansatz bounds.
#[derive(Clone, Debug)]
pub enum IntegralsOutcome {
    Complete(InvariantSet),
    Incomplete {
        partial: Vec<Expression>,
        needed: usize,
        solves: usize,
    },
}

#[derive(Clone, Debug, Default)]
pub struct IntegralsStats {
    /// Number of ansatz linear systems solved (the integration count
    /// reported per run).
    pub solves: usize,
}

pub fn first_integrals(
    d: &Distribution,
    acfg: &AnsatzConfig,
    scfg: &SampleConfig,
) -> Result<(IntegralsOutcome, IntegralsStats)> {
    let chart = d.chart().clone();
    let dim = chart.dim();
    let target = dim - d.rank();
    let mut stats = IntegralsStats::default();

    let mut probe = JacobianProbe::new(&chart, d, scfg)?;
    let mut found: Vec<Expression> = Vec::new();

    if target == 0 {
        let witness = probe.points[0].clone();
        return Ok((
            IntegralsOutcome::Complete(InvariantSet {
                functions: found,
                jacobian_rank: 0,
                witness,
            }),
            stats,
        ));
    }

    // Coordinate harvesting: x_i is an integral iff every generator has a
    // vanishing i-th coefficient.
    for i in 0..dim {
        if d.generators().iter().all(|g| g.coeff(i).is_zero()) {
            let xi = Expression::var(&chart, i);
            probe.try_accept(&mut found, xi);
        }
    }

    if found.len() < target {
        let support = match &acfg.support {
            Some(s) => s.clone(),
            None => default_support(d),
        };
        let denominators = denominator_candidates(d, &support, acfg.max_den_degree);
        'stages: for den in &denominators {
            for deg in 1..=acfg.max_num_degree {
                let candidates = ansatz_solve(d, &support, deg, den, &mut stats)?;
                for c in candidates {
                    probe.try_accept(&mut found, c);
                    if found.len() == target {
                        break 'stages;
                    }
                }
            }
        }
    }

    // Soundness gate: every accepted integral is annihilated by every
    // generator, decided exactly and cross-checked by sampling.
    let mut zero_sampler = scfg.sampler();
    for phi in &found {
        for g in d.generators() {
            let lie = g.apply(phi);
            if !crate::expr::is_zero_checked(&lie, &mut zero_sampler, scfg.zero_check_samples)? {
                return Err(EngineError::Inconsistency(format!(
                    "solver returned `{}` but a generator does not annihilate it",
                    phi
                )));
            }
        }
    }

    let solves = stats.solves;
    if found.len() == target {
        let (rank, witness) = probe.rank_and_witness(&found);
        debug_assert_eq!(rank, target);
        Ok((
            IntegralsOutcome::Complete(InvariantSet {
                functions: found,
                jacobian_rank: rank,
                witness,
            }),
            stats,
        ))
    } else {
        Ok((
            IntegralsOutcome::Incomplete {
                partial: found,
                needed: target,
                solves,
            },
            stats,
        ))
    }
}

/// Check user-supplied candidates: each must be annihilated by every
/// generator, and the set must be independent and complete. Accepted sets
/// are interchangeable with solver output.
pub enum VerifyOutcome {
    Accepted(InvariantSet),
    Rejected(Vec<String>),
}

pub fn verify_invariants(
    d: &Distribution,
    candidates: &[Expression],
    scfg: &SampleConfig,
) -> Result<VerifyOutcome> {
    let chart = d.chart().clone();
    let target = chart.dim() - d.rank();
    let mut items = Vec::new();
    let mut zero_sampler = scfg.sampler();
    for (ci, phi) in candidates.iter().enumerate() {
        for (gi, g) in d.generators().iter().enumerate() {
            let lie = g.apply(phi);
            if !crate::expr::is_zero_checked(&lie, &mut zero_sampler, scfg.zero_check_samples)? {
                items.push(format!(
                    "candidate #{} `{}`: generator #{} gives X(phi) = {}",
                    ci + 1,
                    phi,
                    gi + 1,
                    lie
                ));
            }
        }
    }
    if !items.is_empty() {
        return Ok(VerifyOutcome::Rejected(items));
    }
    let mut probe = JacobianProbe::new(&chart, d, scfg)?;
    let mut accepted = Vec::new();
    let mut dependent = Vec::new();
    for phi in candidates {
        if accepted.len() == target {
            dependent.push(phi.clone());
            continue;
        }
        if !probe.try_accept(&mut accepted, phi.clone()) {
            dependent.push(phi.clone());
        }
    }
    if accepted.len() != target {
        let mut msg = vec![format!(
            "independent candidates {} of {} required",
            accepted.len(),
            target
        )];
        for dep in dependent {
            msg.push(format!("functionally dependent: {}", dep));
        }
        return Ok(VerifyOutcome::Rejected(msg));
    }
    let (rank, witness) = probe.rank_and_witness(&accepted);
    Ok(VerifyOutcome::Accepted(InvariantSet {
        functions: accepted,
        jacobian_rank: rank,
        witness,
    }))
}

/// Coordinates whose coordinate field does not lie in the span: integrals
/// can only depend on these.
fn default_support(d: &Distribution) -> Vec<usize> {
    let chart = d.chart();
    let span = d.span();
    let mut support = Vec::new();
    for i in 0..chart.dim() {
        let mut e = vec![Expression::zero(chart); chart.dim()];
        e[i] = Expression::one(chart);
        if !span.contains(&e) {
            support.push(i);
        }
    }
    support
}

/// Denominator candidates: 1, single support coordinates, their pairwise
/// products up to the degree bound, and denominators already present in the
/// generator coefficients.
fn denominator_candidates(d: &Distribution, support: &[usize], max_deg: u32) -> Vec<Poly> {
    let chart = d.chart();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut out: Vec<Poly> = Vec::new();
    let mut push = |p: Poly, out: &mut Vec<Poly>, seen: &mut BTreeSet<String>| {
        if p.total_degree() > max_deg {
            return;
        }
        let key = p.to_string();
        if seen.insert(key) {
            out.push(p);
        }
    };
    push(Poly::one(chart), &mut out, &mut seen);
    if max_deg >= 1 {
        for &i in support {
            push(Poly::var(chart, i), &mut out, &mut seen);
        }
    }
    for g in d.generators() {
        for c in g.coeffs() {
            let den = c.denominator();
            if !den.is_one() {
                push(den.clone(), &mut out, &mut seen);
            }
        }
    }
    if max_deg >= 2 {
        for (a, &i) in support.iter().enumerate() {
            for &j in &support[a..] {
                push(
                    Poly::var(chart, i).mul(&Poly::var(chart, j)),
                    &mut out,
                    &mut seen,
                );
            }
        }
    }
    out
}

fn monomials_up_to(chart: &Chart, support: &[usize], deg: u32) -> Vec<Mono> {
    let mut out = vec![Mono::one(chart.dim())];
    for _ in 0..deg {
        let mut next = Vec::new();
        for m in &out {
            for &v in support {
                let mut e = m.clone();
                e.0[v] += 1;
                next.push(e);
            }
        }
        out.extend(next);
    }
    let set: BTreeSet<Mono> = out.into_iter().collect();
    set.into_iter().collect()
}

/// One ansatz stage: all integrals `P/Q` with `P` supported on the given
/// monomials and `Q` the supplied denominator. Returns verified,
/// deterministic candidates sorted by size.
fn ansatz_solve(
    d: &Distribution,
    support: &[usize],
    deg: u32,
    den: &Poly,
    stats: &mut IntegralsStats,
) -> Result<Vec<Expression>> {
    let chart = d.chart().clone();
    let monos = monomials_up_to(&chart, support, deg);
    if monos.is_empty() {
        return Ok(Vec::new());
    }
    let den_e = Expression::from_poly(den.clone());
    // Condition per generator: Q * G(P) - P * G(Q) = 0. Columns are the
    // numerator coefficients, one per monomial.
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for g in d.generators() {
        let gq = g.apply(&den_e);
        let cols: Vec<Expression> = exec::map_items(monos.clone(), |m| {
            let xm = Expression::from_poly(Poly {
                chart: chart.clone(),
                terms: std::collections::BTreeMap::from([(
                    m.clone(),
                    Rat::from_integer(1.into()),
                )]),
            });
            g.apply(&xm).mul(&den_e).sub(&xm.mul(&gq))
        });
        // clear to a polynomial identity over a common denominator
        let mut common = Poly::one(&chart);
        for c in &cols {
            if !c.is_zero() {
                let g0 = crate::expr::gcd(&common, c.denominator());
                common = common
                    .mul(c.denominator())
                    .div_exact(&g0)
                    .expect("gcd divides");
            }
        }
        let common_e = Expression::from_poly(common);
        let cleared: Vec<Poly> = cols
            .iter()
            .map(|c| {
                let p = c.mul(&common_e);
                debug_assert!(p.denominator().is_one());
                p.numerator().clone()
            })
            .collect();
        let mut occurring: BTreeSet<Mono> = BTreeSet::new();
        for p in &cleared {
            occurring.extend(p.terms.keys().cloned());
        }
        for m in &occurring {
            let row: Vec<Rat> = cleared
                .iter()
                .map(|p| {
                    p.terms
                        .get(m)
                        .cloned()
                        .unwrap_or_else(|| Rat::from_integer(0.into()))
                })
                .collect();
            rows.push(row);
        }
    }
    stats.solves += 1;
    let kernel = kernel_q(&rows, monos.len());
    let mut out = Vec::new();
    for vec in kernel {
        let mut p = Poly::zero(&chart);
        for (m, c) in monos.iter().zip(&vec) {
            if !num::Zero::is_zero(c) {
                p = p.add(&Poly {
                    chart: chart.clone(),
                    terms: std::collections::BTreeMap::from([(m.clone(), c.clone())]),
                });
            }
        }
        let phi = Expression::from_poly(p)
            .div(&den_e)
            .expect("denominator is nonzero");
        if phi.is_constant() {
            continue;
        }
        // normalise: primitive numerator with positive leading coefficient
        let (_, prim) = phi.numerator().content_and_primitive();
        let phi = Expression::from_poly(prim)
            .div(&Expression::from_poly(phi.denominator().clone()))
            .unwrap();
        out.push(phi);
    }
    out.sort_by(|a, b| {
        a.size()
            .cmp(&b.size())
            .then_with(|| a.to_string().cmp(&b.to_string()))
    });
    Ok(out)
}

/// Shared functional-independence tester: exact Jacobian ranks at a fixed
/// batch of sampled points.
pub struct JacobianProbe {
    chart: Chart,
    pub points: Vec<RationalPoint>,
}

impl JacobianProbe {
    pub fn new(chart: &Chart, d: &Distribution, scfg: &SampleConfig) -> Result<Self> {
        Self::from_guards(chart, &d.guard_expressions(), scfg)
    }

    pub fn from_guards(
        chart: &Chart,
        guards: &[Expression],
        scfg: &SampleConfig,
    ) -> Result<Self> {
        let guards: Vec<Expression> = guards
            .iter()
            .filter(|e| !e.is_constant())
            .cloned()
            .collect();
        let mut sampler = scfg.sampler();
        let points = sampler.sample_batch(chart, &guards, scfg.samples.max(4))?;
        Ok(JacobianProbe {
            chart: chart.clone(),
            points,
        })
    }

    fn jacobian_rank(&self, funcs: &[Expression], p: &RationalPoint) -> Option<usize> {
        let mut rows = Vec::with_capacity(funcs.len());
        for f in funcs {
            let mut row = Vec::with_capacity(self.chart.dim());
            for i in 0..self.chart.dim() {
                match f.differentiate_index(i).eval(p).ok()? {
                    Value::Finite(v) => row.push(v),
                    Value::Pole => return None,
                }
            }
            rows.push(row);
        }
        Some(rank_q(&rows))
    }

    /// Max Jacobian rank across the probe points, with the first witness
    /// attaining it.
    pub fn rank_and_witness(&self, funcs: &[Expression]) -> (usize, RationalPoint) {
        let mut best = 0;
        let mut witness = self.points[0].clone();
        for p in &self.points {
            if let Some(r) = self.jacobian_rank(funcs, p) {
                if r > best {
                    best = r;
                    witness = p.clone();
                }
            }
        }
        (best, witness)
    }

    /// Accept the candidate if it enlarges the Jacobian rank.
    pub fn try_accept(&mut self, found: &mut Vec<Expression>, cand: Expression) -> bool {
        let (before, _) = self.rank_and_witness(found);
        found.push(cand);
        let (after, _) = self.rank_and_witness(found);
        if after > before {
            true
        } else {
            found.pop();
            false
        }
    }

    /// True when `cand` is functionally independent of `base`.
    pub fn independent_of(&self, base: &[Expression], cand: &Expression) -> bool {
        let (before, _) = self.rank_and_witness(base);
        let mut all: Vec<Expression> = base.to_vec();
        all.push(cand.clone());
        let (after, _) = self.rank_and_witness(&all);
        after > before
    }
}
