//! Contact systems `C(tau)`, adapted filtrations, fundamental functions and
//! the construction and verification of contact coordinate transformations.
//!
//! Construction follows the filtration of integrable bundles induced by a
//! recognised distribution: the invariants of each level supply the chain
//! bottoms, the top level supplies the independent variable, and repeated
//! application of the total derivative operator generates every chain. The
//! result is verified by pushing the generators forward through the map and
//! comparing spans with the target contact system, both symbolically and at
//! exact witness points; verification never trusts the construction.

use std::fmt;

use crate::exec;
use num::Zero;

use crate::expr::{
    Chart, EngineError, Expression, Rat, RationalPoint, Result, Value,
};
use crate::geom::{Distribution, VectorField};
use crate::integrals::{
    first_integrals, verify_invariants, AnsatzConfig, IntegralsOutcome, InvariantSet,
    JacobianProbe, VerifyOutcome,
};
use crate::matrix::{determinant, rank_q, solve_q, Span};
use crate::sample::SampleConfig;
use crate::signature::{FlagAnalysis, GoursatVerdict, TypeVector};

/// One chain of a partial prolongation: the chart indices of
/// `z, z_1, ..., z_order`.
#[derive(Clone, Debug)]
pub struct ChainSpec {
    pub order: usize,
    pub var_indices: Vec<usize>,
}

/// The contact system `C(tau)` in explicit coordinates.
#[derive(Clone, Debug)]
pub struct ProlongedContactSystem {
    pub chart: Chart,
    pub distribution: Distribution,
    pub tau: TypeVector,
    pub chains: Vec<ChainSpec>,
}

/// Chart naming for `C(tau)`: `x`, then for each chain `c` (numbered from 1,
/// ordered by ascending order) the coordinates `zc, zc_1, ..., zc_k`.
pub fn contact_chart(tau: &TypeVector) -> Result<(Chart, Vec<ChainSpec>)> {
    let mut names = vec!["x".to_string()];
    let mut chains = Vec::new();
    let mut chain_no = 0usize;
    for (order, &count) in tau.entries().iter().enumerate() {
        let order = order + 1;
        for _ in 0..count {
            chain_no += 1;
            let mut var_indices = Vec::with_capacity(order + 1);
            for l in 0..=order {
                if l == 0 {
                    names.push(format!("z{}", chain_no));
                } else {
                    names.push(format!("z{}_{}", chain_no, l));
                }
                var_indices.push(names.len() - 1);
            }
            chains.push(ChainSpec { order, var_indices });
        }
    }
    Ok((Chart::new(&names)?, chains))
}

/// Build `C(tau)` as a distribution: the total derivative field plus one
/// vertical field per chain.
pub fn generate_contact_system(
    tau: &TypeVector,
    cfg: &SampleConfig,
) -> Result<ProlongedContactSystem> {
    let (chart, chains) = contact_chart(tau)?;
    let mut drift = vec![Expression::zero(&chart); chart.dim()];
    drift[0] = Expression::one(&chart);
    for chain in &chains {
        for l in 0..chain.order {
            drift[chain.var_indices[l]] = Expression::var(&chart, chain.var_indices[l + 1]);
        }
    }
    let mut gens = vec![VectorField::new(&chart, drift)?];
    for chain in &chains {
        gens.push(VectorField::coordinate(
            &chart,
            chain.var_indices[chain.order],
        ));
    }
    let distribution = Distribution::certify(gens, cfg)?;
    Ok(ProlongedContactSystem {
        chart,
        distribution,
        tau: tau.clone(),
        chains,
    })
}

/// One integrated level of the adapted filtration.
#[derive(Clone, Debug)]
pub struct FiltrationLevel {
    pub label: String,
    pub dist: Distribution,
    pub invariants: InvariantSet,
}

/// The filtration of integrable bundles induced by a Goursat bundle,
/// together with a complete set of invariants per level.
#[derive(Clone, Debug)]
pub struct Filtration {
    /// `(ch{l}_{l-1}, ch{l})` levels for `l = 1..k-1`, ascending.
    pub levels: Vec<FiltrationLevel>,
    /// The top bundle: the resolvent when the top velocity exceeds one,
    /// otherwise the corank-one bundle inside `V^(k-1)`.
    pub top: FiltrationLevel,
    /// The corank-one integrable closure of the top bundle, whose single
    /// invariant is the independent variable; absent when its construction
    /// fell back to candidate iteration.
    pub x_level: Option<FiltrationLevel>,
    pub integration_count: usize,
}

/// Construction failures separate "integration out of ansatz reach" (the
/// caller can resume with supplied invariants) from everything else.
#[derive(Debug)]
pub enum ConstructError {
    IntegrationNeeded {
        label: String,
        needed: usize,
        partial: Vec<Expression>,
        generators: Vec<VectorField>,
    },
    Failed(String),
    Engine(EngineError),
}

impl fmt::Display for ConstructError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstructError::IntegrationNeeded { label, needed, partial, .. } => write!(
                f,
                "integration needed at level `{}`: found {} of {} invariants",
                label,
                partial.len(),
                needed
            ),
            ConstructError::Failed(m) => write!(f, "{}", m),
            ConstructError::Engine(e) => write!(f, "{}", e),
        }
    }
}

impl From<EngineError> for ConstructError {
    fn from(e: EngineError) -> Self {
        ConstructError::Engine(e)
    }
}

/// Invariants supplied by the user to resume a run whose integration step
/// was out of ansatz reach, keyed by filtration level label.
pub type SuppliedInvariants = std::collections::BTreeMap<String, Vec<Expression>>;

fn integrate_level(
    label: &str,
    dist: &Distribution,
    acfg: &AnsatzConfig,
    scfg: &SampleConfig,
    supplied: &SuppliedInvariants,
    count: &mut usize,
) -> std::result::Result<FiltrationLevel, ConstructError> {
    if let Some(cands) = supplied.get(label) {
        match verify_invariants(dist, cands, scfg)? {
            VerifyOutcome::Accepted(set) => {
                return Ok(FiltrationLevel {
                    label: label.to_string(),
                    dist: dist.clone(),
                    invariants: set,
                })
            }
            VerifyOutcome::Rejected(items) => {
                return Err(ConstructError::Failed(format!(
                    "supplied invariants for `{}` rejected: {}",
                    label,
                    items.join("; ")
                )))
            }
        }
    }
    let (outcome, stats) = first_integrals(dist, acfg, scfg)?;
    *count += stats.solves;
    match outcome {
        IntegralsOutcome::Complete(set) => Ok(FiltrationLevel {
            label: label.to_string(),
            dist: dist.clone(),
            invariants: set,
        }),
        IntegralsOutcome::Incomplete { partial, needed, .. } => {
            Err(ConstructError::IntegrationNeeded {
                label: label.to_string(),
                needed,
                partial,
                generators: dist.generators().to_vec(),
            })
        }
    }
}

/// Assemble and integrate the filtration of an accepted Goursat bundle.
pub fn build_filtration(
    analysis: &FlagAnalysis,
    verdict: &GoursatVerdict,
    acfg: &AnsatzConfig,
    scfg: &SampleConfig,
    supplied: &SuppliedInvariants,
) -> std::result::Result<Filtration, ConstructError> {
    if !verdict.accepted {
        return Err(ConstructError::Failed(
            "construction requires an accepted recognition verdict".into(),
        ));
    }
    let k = analysis.flag.derived_length;
    let dim = analysis.distribution.chart().dim();
    let mut count = 0usize;
    let mut levels = Vec::new();
    for l in 1..k {
        let inter = &analysis.intersections[l - 1];
        let label = format!("ch{}_{}", l, l - 1);
        let level = integrate_level(&label, inter, acfg, scfg, supplied, &mut count)?;
        expect_invariant_count(&level, dim - (analysis.signature.m(l - 1) - 1))?;
        levels.push(level);
        let ch = &analysis.cauchys[l];
        let label = format!("ch{}", l);
        let level = integrate_level(&label, ch, acfg, scfg, supplied, &mut count)?;
        expect_invariant_count(&level, dim - analysis.signature.chi(l))?;
        levels.push(level);
    }

    // Containment sanity along the filtration.
    for w in levels.windows(2) {
        let span = w[1].dist.span();
        for g in w[0].dist.generators() {
            if !span.contains(g.coeffs()) {
                return Err(ConstructError::Failed(format!(
                    "filtration containment fails: `{}` not inside `{}`",
                    w[0].label, w[1].label
                )));
            }
        }
    }

    let delta_k = *analysis.signature.velocity().last().unwrap() as usize;
    let (top_dist, x_dist) = if delta_k > 1 {
        let weber = verdict
            .weber
            .as_ref()
            .and_then(|w| w.resolvent.clone())
            .ok_or_else(|| ConstructError::Failed("verdict carries no resolvent bundle".into()))?;
        let x_dist = crate::signature::top_closure(&weber, &analysis.flag.levels[k - 1], scfg);
        (weber, x_dist)
    } else {
        let pi = verdict
            .pi
            .as_ref()
            .ok_or_else(|| ConstructError::Failed("verdict carries no corank-one bundles".into()))?;
        (pi.pi_k.clone(), Some(pi.pi_k_plus.clone()))
    };

    let top = integrate_level("top", &top_dist, acfg, scfg, supplied, &mut count)?;
    expect_invariant_count(&top, dim - top_dist.rank())?;
    let x_level = match x_dist {
        Some(d) => Some(integrate_level("xlevel", &d, acfg, scfg, supplied, &mut count)?),
        None => None,
    };

    Ok(Filtration {
        levels,
        top,
        x_level,
        integration_count: count,
    })
}

fn expect_invariant_count(
    level: &FiltrationLevel,
    expected: usize,
) -> std::result::Result<(), ConstructError> {
    if level.invariants.functions.len() != expected {
        return Err(ConstructError::Failed(format!(
            "level `{}` has {} invariants, expected {}",
            level.label,
            level.invariants.functions.len(),
            expected
        )));
    }
    Ok(())
}

/// A constructed (or externally supplied) contact coordinate transformation.
#[derive(Clone, Debug)]
pub struct ContactTransformation {
    pub tau: TypeVector,
    pub source_chart: Chart,
    pub target_chart: Chart,
    /// `(target coordinate name, source expression)` in target chart order.
    pub components: Vec<(String, Expression)>,
    pub operator: VectorField,
}

impl ContactTransformation {
    pub fn component(&self, name: &str) -> Option<&Expression> {
        self.components
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, e)| e)
    }

    pub fn component_exprs(&self) -> Vec<Expression> {
        self.components.iter().map(|(_, e)| e.clone()).collect()
    }

    pub fn jacobian_rows(&self) -> Vec<Vec<Expression>> {
        let dim = self.source_chart.dim();
        self.components
            .iter()
            .map(|(_, f)| (0..dim).map(|i| f.differentiate_index(i)).collect())
            .collect()
    }
}

/// Find the distinguished section with `X(x) = 1`: constant coefficients
/// over the stored generators are preferred, falling back to a
/// function-field solve with free coefficients pinned to zero.
pub fn total_derivative_operator(
    v: &Distribution,
    x: &Expression,
) -> Result<VectorField> {
    let chart = v.chart();
    let gx: Vec<Expression> = v.generators().iter().map(|g| g.apply(x)).collect();
    // Constant-coefficient attempt: match monomials of sum c_i g_i = 1 after
    // clearing a common denominator.
    if let Some(consts) = constant_combination(chart, &gx) {
        let mut out = VectorField::zero(chart);
        for (g, c) in v.generators().iter().zip(&consts) {
            if !num::Zero::is_zero(c) {
                out = out.add(&g.scale(&Expression::constant(chart, c.clone())));
            }
        }
        return Ok(out);
    }
    // Function-field solve: one linear equation in the c_i.
    let row: Vec<Expression> = gx.clone();
    let sol = solve_q_over_field(chart, &row)?;
    let mut out = VectorField::zero(chart);
    for (g, c) in v.generators().iter().zip(&sol) {
        if !c.is_zero() {
            out = out.add(&g.scale(c));
        }
    }
    Ok(out)
}

/// Solve `sum c_i g_i = 1` with rational constants, if possible.
fn constant_combination(chart: &Chart, gx: &[Expression]) -> Option<Vec<Rat>> {
    use crate::expr::{Mono, Poly};
    let mut common = Poly::one(chart);
    for g in gx {
        if !g.is_zero() {
            let d = crate::expr::gcd(&common, g.denominator());
            common = common.mul(g.denominator()).div_exact(&d).unwrap();
        }
    }
    let common_e = Expression::from_poly(common.clone());
    let cleared: Vec<Poly> = gx
        .iter()
        .map(|g| {
            let p = g.mul(&common_e);
            p.numerator().clone()
        })
        .collect();
    let rhs_poly = common;
    let mut monos: std::collections::BTreeSet<Mono> = std::collections::BTreeSet::new();
    for p in &cleared {
        monos.extend(p.terms.keys().cloned());
    }
    monos.extend(rhs_poly.terms.keys().cloned());
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for m in &monos {
        rows.push(
            cleared
                .iter()
                .map(|p| {
                    p.terms
                        .get(m)
                        .cloned()
                        .unwrap_or_else(|| Rat::from_integer(0.into()))
                })
                .collect::<Vec<Rat>>(),
        );
        rhs.push(
            rhs_poly
                .terms
                .get(m)
                .cloned()
                .unwrap_or_else(|| Rat::from_integer(0.into())),
        );
    }
    solve_q(&rows, &rhs)
}

/// Particular solution of `sum c_i g_i = 1` over the function field with
/// free coefficients set to zero.
fn solve_q_over_field(chart: &Chart, row: &[Expression]) -> Result<Vec<Expression>> {
    crate::matrix::solve_particular(
        chart,
        row.len(),
        &[row.to_vec()],
        &[Expression::one(chart)],
    )
    .map_err(|_| {
        EngineError::Geometry(
            "no section of the distribution maps the chosen invariant to 1".into(),
        )
    })
}

/// The per-order chain bottoms forced by the filtration: invariants of the
/// intersection level that are not invariants of the Cauchy level.
pub fn chain_bottoms_below_top(
    filtration: &Filtration,
    tau: &TypeVector,
    probe: &JacobianProbe,
) -> std::result::Result<Vec<(usize, Vec<Expression>)>, ConstructError> {
    let k = tau.order();
    let mut out = Vec::new();
    for l in 1..k {
        let rho = tau.entries()[l - 1];
        if rho == 0 {
            continue;
        }
        let inter_level = &filtration.levels[2 * (l - 1)];
        let cauchy_level = &filtration.levels[2 * (l - 1) + 1];
        let base = &cauchy_level.invariants.functions;
        let mut candidates: Vec<Expression> = inter_level.invariants.functions.clone();
        candidates.sort_by(|a, b| {
            a.size()
                .cmp(&b.size())
                .then_with(|| a.to_string().cmp(&b.to_string()))
        });
        let mut picked: Vec<Expression> = Vec::new();
        for c in candidates {
            if picked.len() == rho {
                break;
            }
            let mut context = base.clone();
            context.extend(picked.iter().cloned());
            if probe.independent_of(&context, &c) {
                picked.push(c);
            }
        }
        if picked.len() != rho {
            return Err(ConstructError::Failed(format!(
                "level {} yields {} new chain bottoms, expected {}",
                l,
                picked.len(),
                rho
            )));
        }
        out.push((l, picked));
    }
    Ok(out)
}

/// Certificate of a verified equivalence.
#[derive(Clone, Debug)]
pub struct EquivalenceCertificate {
    pub points: Vec<RationalPoint>,
    pub jacobian_determinant: Expression,
    pub symbolic_span_equal: bool,
}

/// A rejection names a witness point and the target direction that escapes
/// the pushed-forward span.
#[derive(Clone, Debug)]
pub struct EquivalenceRejection {
    pub witness: Option<RationalPoint>,
    pub residual_direction: Option<String>,
    pub message: String,
}

impl fmt::Display for EquivalenceRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)?;
        if let Some(p) = &self.witness {
            write!(f, " at witness point {}", p)?;
        }
        if let Some(d) = &self.residual_direction {
            write!(f, " (residual direction {})", d)?;
        }
        Ok(())
    }
}

/// Verify that the transformation maps the distribution onto `C(tau)`:
/// generators are pushed forward through the Jacobian and compared, in
/// source coordinates, with the pulled-back target generators, first
/// symbolically over the function field and then by exact rank tests at
/// sampled witness points (including the inverse-Jacobian route back).
pub fn verify_equivalence(
    v: &Distribution,
    t: &ContactTransformation,
    cfg: &SampleConfig,
) -> Result<std::result::Result<EquivalenceCertificate, EquivalenceRejection>> {
    let source = v.chart();
    let dim = source.dim();
    if t.source_chart != *source {
        return Err(EngineError::ChartMismatch {
            expected: source.to_string(),
            got: t.source_chart.to_string(),
        });
    }
    if t.target_chart.dim() != dim {
        return Ok(Err(EquivalenceRejection {
            witness: None,
            residual_direction: None,
            message: format!(
                "target chart dimension {} differs from source dimension {}",
                t.target_chart.dim(),
                dim
            ),
        }));
    }
    let target = generate_contact_system(&t.tau, cfg)?;
    if target.chart.dim() != t.target_chart.dim() {
        return Ok(Err(EquivalenceRejection {
            witness: None,
            residual_direction: None,
            message: "transformation component count does not match the type".into(),
        }));
    }

    let jac = t.jacobian_rows();
    let det = determinant(&jac);
    if det.is_zero() {
        return Ok(Err(EquivalenceRejection {
            witness: None,
            residual_direction: None,
            message: "jacobian determinant vanishes identically".into(),
        }));
    }

    // Pushed generators, expressed in the target frame but over source
    // coordinates: (J G)_j = sum_i dF_j/dx_i G^i.
    let pushed: Vec<Vec<Expression>> = v
        .generators()
        .iter()
        .map(|g| {
            (0..dim)
                .map(|j| {
                    let mut acc = Expression::zero(source);
                    for i in 0..dim {
                        if !jac[j][i].is_zero() && !g.coeff(i).is_zero() {
                            acc = acc.add(&jac[j][i].mul(g.coeff(i)));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();

    // Pulled-back target generators: substitute the map components.
    let subs: Vec<Expression> = t.component_exprs();
    let pulled: Vec<Vec<Expression>> = target
        .distribution
        .generators()
        .iter()
        .map(|h| {
            h.coeffs()
                .iter()
                .map(|c| c.substitute(&subs))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    // Symbolic span equality over the function field.
    let span_pushed = Span::from_rows(source, dim, &pushed);
    let span_pulled = Span::from_rows(source, dim, &pulled);
    let symbolic_span_equal = span_pushed.rank() == v.rank()
        && span_pulled.rank() == v.rank()
        && pulled.iter().all(|r| span_pushed.contains(r))
        && pushed.iter().all(|r| span_pulled.contains(r));

    // Witness points avoiding poles of everything involved and zeros of the
    // Jacobian determinant.
    let mut guards: Vec<Expression> = Vec::new();
    guards.extend(pushed.iter().flat_map(|r| r.iter().cloned()));
    guards.extend(pulled.iter().flat_map(|r| r.iter().cloned()));
    guards.extend(v.generators().iter().flat_map(|g| g.coeffs().iter().cloned()));
    guards.push(det.recip().expect("determinant is nonzero"));
    let guards: Vec<Expression> = guards.into_iter().filter(|e| !e.is_constant()).collect();
    let mut sampler = cfg.sampler();
    let points = sampler.sample_batch(source, &guards, cfg.samples.max(1))?;

    let m0 = v.rank();
    let checks: Vec<Option<String>> = exec::map_items(points.clone(), |p| {
        point_check(v, &jac, &pushed, &pulled, m0, &t.target_chart, &p)
    });
    for (p, c) in points.iter().zip(&checks) {
        if let Some(direction) = c {
            return Ok(Err(EquivalenceRejection {
                witness: Some(p.clone()),
                residual_direction: Some(direction.clone()),
                message: "span mismatch between pushed and target generators".into(),
            }));
        }
    }
    if !symbolic_span_equal {
        return Ok(Err(EquivalenceRejection {
            witness: None,
            residual_direction: None,
            message: "symbolic span equality fails over the function field".into(),
        }));
    }
    Ok(Ok(EquivalenceCertificate {
        points,
        jacobian_determinant: det,
        symbolic_span_equal,
    }))
}

/// Exact checks at one witness point; returns the name of an escaping
/// direction on failure. Both routes are checked: forward (pushed spans
/// match pulled spans) and backward (inverse Jacobian applied to the target
/// generators lands in the span of the original generators).
fn point_check(
    v: &Distribution,
    jac: &[Vec<Expression>],
    pushed: &[Vec<Expression>],
    pulled: &[Vec<Expression>],
    m0: usize,
    target_chart: &Chart,
    p: &RationalPoint,
) -> Option<String> {
    let eval_rows = |rows: &[Vec<Expression>]| -> Option<Vec<Vec<Rat>>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|e| e.eval(p).ok().and_then(Value::finite))
                    .collect::<Option<Vec<_>>>()
            })
            .collect()
    };
    let a = eval_rows(pushed)?;
    let b = eval_rows(pulled)?;
    if rank_q(&a) != m0 || rank_q(&b) != m0 {
        return Some("rank deficiency".into());
    }
    // forward route: residual of each pulled direction against the pushed span
    for (bi, brow) in b.iter().enumerate() {
        let mut stacked = a.clone();
        stacked.push(brow.clone());
        if rank_q(&stacked) != m0 {
            let name = residual_direction_name(&a, brow, target_chart);
            return Some(name.unwrap_or_else(|| format!("target generator #{}", bi + 1)));
        }
    }
    for arow in &a {
        let mut stacked = b.to_vec();
        stacked.push(arow.clone());
        if rank_q(&stacked) != m0 {
            return Some("pushed generator escapes the target span".into());
        }
    }
    // backward route: J(p)^{-1} applied to the pulled generators must land
    // in the span of the original generators.
    let jnum = eval_rows(jac)?;
    let g = eval_rows(
        &v.generators()
            .iter()
            .map(|g| g.coeffs().to_vec())
            .collect::<Vec<_>>(),
    )?;
    for brow in &b {
        let w = solve_q(&jnum, brow)?;
        let mut stacked = g.clone();
        stacked.push(w);
        if rank_q(&stacked) != m0 {
            return Some("inverse route escapes the source span".into());
        }
    }
    None
}

fn residual_direction_name(
    a: &[Vec<Rat>],
    brow: &[Rat],
    target_chart: &Chart,
) -> Option<String> {
    // reduce brow against the row space of a; the leading surviving
    // component names the escaping target direction
    let mut m = a.to_vec();
    m.push(brow.to_vec());
    let ncols = brow.len();
    let nrows = m.len();
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(pr) = (rank..nrows - 1).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let pivot = m[rank][col].clone();
        let last = nrows - 1;
        if !m[last][col].is_zero() {
            let f = &m[last][col] / &pivot;
            for c in 0..ncols {
                let v = &m[last][c] - &f * &m[rank][c];
                m[last][c] = v;
            }
        }
        rank += 1;
    }
    let last = nrows - 1;
    (0..ncols)
        .find(|&c| !m[last][c].is_zero())
        .map(|c| format!("d_{}", target_chart.name(c)))
}

/// Outcome of the construction pipeline.
pub struct Construction {
    pub transformation: ContactTransformation,
    pub certificate: EquivalenceCertificate,
    pub integration_count: usize,
    /// Which independent-variable candidate succeeded (0-based), for the
    /// run report.
    pub x_candidate_index: usize,
}

/// Construct contact coordinates for an accepted Goursat bundle: select
/// fundamental functions from the filtration invariants, generate the
/// chains with the total derivative operator, check independence and verify
/// the equivalence. Candidate independent variables are tried in preference
/// order until one verifies.
pub fn contact_coordinates(
    analysis: &FlagAnalysis,
    verdict: &GoursatVerdict,
    filtration: &Filtration,
    scfg: &SampleConfig,
) -> std::result::Result<Construction, ConstructError> {
    let v = &analysis.distribution;
    let chart = v.chart().clone();
    let tau = verdict
        .tau
        .clone()
        .ok_or_else(|| ConstructError::Failed("verdict carries no type vector".into()))?;
    let k = tau.order();
    let delta_k = tau.entries()[k - 1];

    // A probe whose points avoid poles of the generators and all filtration
    // invariants.
    let mut guards: Vec<Expression> = v.guard_expressions();
    for lvl in filtration
        .levels
        .iter()
        .chain(std::iter::once(&filtration.top))
    {
        guards.extend(lvl.invariants.functions.iter().cloned());
    }
    let probe = JacobianProbe::from_guards(&chart, &guards, scfg)?;

    let bottoms_below = chain_bottoms_below_top(filtration, &tau, &probe)?;

    // Independent variable candidates.
    let mut x_candidates: Vec<Expression> = match &filtration.x_level {
        Some(lvl) if lvl.invariants.functions.len() == 1 => {
            vec![lvl.invariants.functions[0].clone()]
        }
        _ => Vec::new(),
    };
    if x_candidates.is_empty() {
        let mut cands = filtration.top.invariants.functions.clone();
        cands.sort_by(|a, b| {
            let ca = constant_solvable(v, a);
            let cb = constant_solvable(v, b);
            cb.cmp(&ca)
                .then(a.size().cmp(&b.size()))
                .then_with(|| a.to_string().cmp(&b.to_string()))
        });
        x_candidates = cands;
    } else {
        // keep the remaining top invariants as fallbacks
        for c in &filtration.top.invariants.functions {
            if !x_candidates.contains(c) {
                x_candidates.push(c.clone());
            }
        }
    }

    let mut notes = Vec::new();
    for (xi, x) in x_candidates.iter().enumerate() {
        let op = match total_derivative_operator(v, x) {
            Ok(op) => op,
            Err(e) => {
                notes.push(format!("candidate `{}`: {}", x, e));
                continue;
            }
        };
        // Top-level chain bottoms: the remaining top invariants,
        // independent of x and of each other.
        let mut top_bottoms: Vec<Expression> = Vec::new();
        {
            let mut cands: Vec<Expression> = filtration
                .top
                .invariants
                .functions
                .iter()
                .filter(|f| *f != x)
                .cloned()
                .collect();
            cands.sort_by(|a, b| {
                a.size()
                    .cmp(&b.size())
                    .then_with(|| a.to_string().cmp(&b.to_string()))
            });
            let mut context = vec![x.clone()];
            for c in cands {
                if top_bottoms.len() == delta_k {
                    break;
                }
                if probe.independent_of(&context, &c) {
                    context.push(c.clone());
                    top_bottoms.push(c);
                }
            }
        }
        if top_bottoms.len() != delta_k {
            notes.push(format!(
                "candidate `{}`: only {} of {} top-level chain bottoms are independent",
                x,
                top_bottoms.len(),
                delta_k
            ));
            continue;
        }

        // Assemble chains in ascending order; same-order chains keep their
        // selection order.
        let mut bottoms_by_order: Vec<(usize, Vec<Expression>)> = bottoms_below.clone();
        bottoms_by_order.push((k, top_bottoms));
        let mut components: Vec<Expression> = vec![x.clone()];
        for (order, bottoms) in &bottoms_by_order {
            for bottom in bottoms {
                let mut entry = bottom.clone();
                components.push(entry.clone());
                for _ in 0..*order {
                    entry = op.apply(&entry);
                    components.push(entry.clone());
                }
            }
        }

        let (target_chart, _) = match contact_chart(&tau) {
            Ok(t) => t,
            Err(e) => return Err(ConstructError::Engine(e)),
        };
        if components.len() != target_chart.dim() {
            return Err(ConstructError::Failed(format!(
                "assembled {} coordinate functions for a {}-dimensional target",
                components.len(),
                target_chart.dim()
            )));
        }
        // Independence: Jacobian rank must reach the chart dimension.
        let (rank, _) = probe.rank_and_witness(&components);
        if rank != chart.dim() {
            let culprit = first_dependent_component(&probe, &components);
            notes.push(format!(
                "candidate `{}`: coordinate list has Jacobian rank {} < {}; \
                 first dependent chain entry `{}`",
                x,
                rank,
                chart.dim(),
                culprit
            ));
            continue;
        }

        let transformation = ContactTransformation {
            tau: tau.clone(),
            source_chart: chart.clone(),
            target_chart: target_chart.clone(),
            components: target_chart
                .names()
                .iter()
                .cloned()
                .zip(components.iter().cloned())
                .collect(),
            operator: op,
        };
        match verify_equivalence(v, &transformation, scfg)? {
            Ok(certificate) => {
                return Ok(Construction {
                    transformation,
                    certificate,
                    integration_count: filtration.integration_count,
                    x_candidate_index: xi,
                })
            }
            Err(rej) => {
                notes.push(format!("candidate `{}`: verification rejected: {}", x, rej));
                continue;
            }
        }
    }
    Err(ConstructError::Failed(format!(
        "no independent-variable candidate produced a verified transformation: {}",
        notes.join(" | ")
    )))
}

fn constant_solvable(v: &Distribution, x: &Expression) -> bool {
    let gx: Vec<Expression> = v.generators().iter().map(|g| g.apply(x)).collect();
    constant_combination(v.chart(), &gx).is_some()
}

fn first_dependent_component(probe: &JacobianProbe, components: &[Expression]) -> String {
    let mut acc: Vec<Expression> = Vec::new();
    for c in components {
        if !probe.independent_of(&acc, c) {
            return c.to_string();
        }
        acc.push(c.clone());
    }
    "<none>".into()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SampleConfig {
        SampleConfig::with_seed(41)
    }

    #[test]
    fn contact_chart_naming_for_mixed_type() {
        let tau = TypeVector::from_list(&[1, 1]).unwrap();
        let (chart, chains) = contact_chart(&tau).unwrap();
        assert_eq!(
            chart.names(),
            &["x", "z1", "z1_1", "z2", "z2_1", "z2_2"]
        );
        assert_eq!(chains.len(), 2);
        assert_eq!(chains[0].order, 1);
        assert_eq!(chains[1].order, 2);
    }

    #[test]
    fn contact_system_generators() {
        let tau = TypeVector::from_list(&[1]).unwrap();
        let sys = generate_contact_system(&tau, &cfg()).unwrap();
        assert_eq!(sys.chart.dim(), 3);
        assert_eq!(sys.distribution.rank(), 2);
        let drift = &sys.distribution.generators()[0];
        assert!(drift.coeff(0).is_one());
        assert_eq!(drift.coeff(1).to_string(), "z1_1");
    }

    #[test]
    fn contact_system_dimension_matches_type() {
        for rho in [vec![1, 1], vec![0, 2], vec![0, 0, 1, 1], vec![3]] {
            let tau = TypeVector::from_list(&rho).unwrap();
            let sys = generate_contact_system(&tau, &cfg()).unwrap();
            assert_eq!(sys.chart.dim(), tau.ambient_dimension());
            assert_eq!(sys.distribution.rank(), 1 + tau.total_chains());
        }
    }
}
