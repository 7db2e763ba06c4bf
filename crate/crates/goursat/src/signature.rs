//! Derived-type bookkeeping and the recognition test for partial
//! prolongations.
//!
//! The derived type of a distribution is the list `[[m_0, chi^0], ...,
//! [m_k, chi^k]]` of derived-bundle and Cauchy ranks together with the
//! intersection ranks `chi^i_{i-1} = rank(V^(i-1) /\ Ch V^(i))`. A closed
//! set of rank equations characterises the derived types realised by the
//! contact systems `C(tau)`, with the type read off the deceleration vector;
//! a Goursat bundle additionally has integrable intersections and, depending
//! on the top velocity, an integrable Weber structure or a pair of
//! integrable corank-one bundles.

use std::fmt;

use crate::expr::{EngineError, Result};
use crate::geom::{
    cauchy_bundle, derived_flag, intersect, is_integrable, lie_bracket, DerivedFlag,
    Distribution, VectorField,
};
use crate::matrix::Span;
use crate::sample::SampleConfig;
use crate::singular::{resolvent_bundle, WeberReport};

/// The type vector `tau = <rho_1, ..., rho_k>`: `rho_j` chains of order `j`,
/// with `rho_k >= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeVector {
    rho: Vec<usize>,
}

impl TypeVector {
    pub fn from_list(rho: &[usize]) -> Result<TypeVector> {
        if rho.is_empty() {
            return Err(EngineError::Input("empty type vector".into()));
        }
        if *rho.last().unwrap() == 0 {
            return Err(EngineError::Input(
                "type vector must end with a positive entry".into(),
            ));
        }
        Ok(TypeVector { rho: rho.to_vec() })
    }

    /// From the pair form `<q_1,k_1; ...; q_t,k_t>` with ascending orders.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<TypeVector> {
        if pairs.is_empty() {
            return Err(EngineError::Input("empty type vector".into()));
        }
        let mut last_k = 0;
        for &(q, k) in pairs {
            if q == 0 || k == 0 || k <= last_k {
                return Err(EngineError::Input(
                    "pair form requires positive counts and strictly ascending orders".into(),
                ));
            }
            last_k = k;
        }
        let kt = pairs.last().unwrap().1;
        let mut rho = vec![0; kt];
        for &(q, k) in pairs {
            rho[k - 1] = q;
        }
        Ok(TypeVector { rho })
    }

    pub fn entries(&self) -> &[usize] {
        &self.rho
    }

    /// Highest order `k_t` (also the derived length of `C(tau)`).
    pub fn order(&self) -> usize {
        self.rho.len()
    }

    /// Total number of chains `P`.
    pub fn total_chains(&self) -> usize {
        self.rho.iter().sum()
    }

    /// Number of distinct orders present.
    pub fn class(&self) -> usize {
        self.rho.iter().filter(|&&r| r > 0).count()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.rho
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > 0)
            .map(|(i, &r)| (r, i + 1))
            .collect()
    }

    /// Chart dimension of `C(tau)`.
    pub fn ambient_dimension(&self) -> usize {
        1 + self
            .pairs()
            .iter()
            .map(|&(q, k)| q * (k + 1))
            .sum::<usize>()
    }
}

impl fmt::Display for TypeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.rho.iter().map(|r| r.to_string()).collect();
        write!(f, "<{}>", parts.join(","))
    }
}

/// Ranks of the derived flag, Cauchy bundles and intersections, plus the
/// derived difference vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivedTypeSignature {
    /// `(m_j, chi^j)` for `0 <= j <= k`.
    pub ranks: Vec<(usize, usize)>,
    /// `chi^i_{i-1}` for `1 <= i <= k-1`, when measured.
    pub intersection_ranks: Option<Vec<usize>>,
}

impl DerivedTypeSignature {
    pub fn new(ranks: Vec<(usize, usize)>, intersection_ranks: Option<Vec<usize>>) -> Self {
        DerivedTypeSignature {
            ranks,
            intersection_ranks,
        }
    }

    pub fn derived_length(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn m(&self, j: usize) -> usize {
        self.ranks[j].0
    }

    pub fn chi(&self, j: usize) -> usize {
        self.ranks[j].1
    }

    /// `<Delta_1, ..., Delta_k>` with `Delta_j = m_j - m_{j-1}`.
    pub fn velocity(&self) -> Vec<isize> {
        (1..self.ranks.len())
            .map(|j| self.m(j) as isize - self.m(j - 1) as isize)
            .collect()
    }

    /// `<Delta^2_2, ..., Delta^2_k, Delta_k>`.
    pub fn acceleration(&self) -> Vec<isize> {
        let v = self.velocity();
        let mut out: Vec<isize> = v.windows(2).map(|w| w[1] - w[0]).collect();
        out.push(*v.last().unwrap());
        out
    }

    /// `<-Delta^2_2, ..., -Delta^2_k, Delta_k>`; equals the type vector for
    /// Goursat bundles.
    pub fn deceleration(&self) -> Vec<isize> {
        let v = self.velocity();
        let mut out: Vec<isize> = v.windows(2).map(|w| w[0] - w[1]).collect();
        out.push(*v.last().unwrap());
        out
    }

    pub fn deceleration_type(&self) -> Option<TypeVector> {
        let d = self.deceleration();
        if d.iter().any(|&x| x < 0) {
            return None;
        }
        TypeVector::from_list(&d.iter().map(|&x| x as usize).collect::<Vec<_>>()).ok()
    }
}

impl fmt::Display for DerivedTypeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .ranks
            .iter()
            .map(|(m, c)| format!("[{},{}]", m, c))
            .collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// The derived type a partial prolongation of type `tau` must have, in
/// closed form:
/// `m_0 = 1 + P`, `m_1 = 1 + 2P`,
/// `m_l = 1 + (1+l)P + sum_{j=2}^{l} (l+1-j) Delta^2_j`,
/// `chi^j = 2 m_j - m_{j+1} - 1`, `chi^k = m_k`,
/// `chi^i_{i-1} = m_{i-1} - 1`.
pub fn predicted_derived_type(tau: &TypeVector) -> DerivedTypeSignature {
    let k = tau.order();
    let p = tau.total_chains() as isize;
    // Delta^2_j = -rho_{j-1} for 2 <= j <= k
    let d2 = |j: usize| -> isize { -(tau.rho[j - 2] as isize) };
    let mut m = vec![0isize; k + 1];
    m[0] = 1 + p;
    if k >= 1 {
        m[1] = 1 + 2 * p;
    }
    for l in 2..=k {
        let mut s = 0isize;
        for j in 2..=l {
            s += (l + 1 - j) as isize * d2(j);
        }
        m[l] = 1 + (1 + l as isize) * p + s;
    }
    let mut ranks = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let chi = if j == k {
            m[k]
        } else {
            2 * m[j] - m[j + 1] - 1
        };
        ranks.push((m[j] as usize, chi as usize));
    }
    let inter: Vec<usize> = (1..k).map(|i| (m[i - 1] - 1) as usize).collect();
    DerivedTypeSignature::new(ranks, Some(inter))
}

/// Outcome of testing a measured signature against the closed-form rank
/// equations, with the recovered type on success and the first violated
/// equation otherwise.
#[derive(Clone, Debug)]
pub struct MatchReport {
    pub matches: bool,
    pub tau: Option<TypeVector>,
    pub failures: Vec<String>,
}

pub fn matches_partial_prolongation(sig: &DerivedTypeSignature) -> MatchReport {
    let mut failures = Vec::new();
    let k = sig.derived_length();
    let Some(tau) = sig.deceleration_type() else {
        return MatchReport {
            matches: false,
            tau: None,
            failures: vec![format!(
                "deceleration {:?} is not a valid type vector",
                sig.deceleration()
            )],
        };
    };
    let expected = predicted_derived_type(&tau);
    if expected.derived_length() != k {
        failures.push(format!(
            "derived length {} does not match the type order {}",
            k,
            expected.derived_length()
        ));
    } else {
        for j in 0..=k {
            if sig.m(j) != expected.m(j) {
                failures.push(format!(
                    "m_{} = {} violates the rank equation (expected {})",
                    j,
                    sig.m(j),
                    expected.m(j)
                ));
            }
            if sig.chi(j) != expected.chi(j) {
                failures.push(format!(
                    "chi^{} = {} violates the rank equation (expected {})",
                    j,
                    sig.chi(j),
                    expected.chi(j)
                ));
            }
        }
        if let (Some(got), Some(want)) = (&sig.intersection_ranks, &expected.intersection_ranks) {
            for (i, (g, w)) in got.iter().zip(want).enumerate() {
                if g != w {
                    failures.push(format!(
                        "chi^{}_{} = {} violates the intersection rank equation (expected {})",
                        i + 1,
                        i,
                        g,
                        w
                    ));
                }
            }
        }
    }
    let matches = failures.is_empty();
    MatchReport {
        matches,
        tau: if matches { Some(tau) } else { None },
        failures,
    }
}

/// The full derived-type computation: flag, Cauchy bundles of every level,
/// the intersections `V^(i-1) /\ Ch V^(i)`, and the resulting signature.
#[derive(Clone, Debug)]
pub struct FlagAnalysis {
    pub distribution: Distribution,
    pub flag: DerivedFlag,
    /// `cauchys[j] = Ch V^(j)` for `0 <= j <= k`.
    pub cauchys: Vec<Distribution>,
    /// `intersections[i-1] = V^(i-1) /\ Ch V^(i)` for `1 <= i <= k-1`.
    pub intersections: Vec<Distribution>,
    pub signature: DerivedTypeSignature,
}

/// Compute the derived type of a distribution.
pub fn analyze(d: &Distribution, cfg: &SampleConfig) -> Result<FlagAnalysis> {
    let flag = derived_flag(d, cfg)?;
    let k = flag.derived_length;
    let cauchys: Vec<Distribution> = flag
        .levels
        .iter()
        .map(|level| cauchy_bundle(level, cfg))
        .collect::<Result<_>>()?;
    let mut intersections = Vec::new();
    for i in 1..k {
        intersections.push(intersect(&flag.levels[i - 1], &cauchys[i], cfg)?);
    }
    let ranks: Vec<(usize, usize)> = flag
        .levels
        .iter()
        .zip(&cauchys)
        .map(|(v, c)| (v.rank(), c.rank()))
        .collect();
    let inter_ranks: Vec<usize> = intersections.iter().map(Distribution::rank).collect();
    let signature = DerivedTypeSignature::new(ranks, Some(inter_ranks));
    Ok(FlagAnalysis {
        distribution: d.clone(),
        flag,
        cauchys,
        intersections,
        signature,
    })
}

/// The two integrable corank-one bundles that replace the Weber structure
/// when the top velocity is one.
#[derive(Clone, Debug)]
pub struct PiBundles {
    /// Integrable, rank `m_{k-1} - 1`, contains `Ch V^(k-1)`.
    pub pi_k: Distribution,
    /// Integrable, rank `m_k - 1`, contains `pi_k`.
    pub pi_k_plus: Distribution,
}

/// Construct the corank-one bundles from brackets: `Pi^k` extends the
/// intersection `V^(k-2) /\ Ch V^(k-1)` by its brackets with `V^(k-2)`;
/// `Pi^{k+1}` extends `Pi^k` by its brackets with `V^(k-1)`. When a raw
/// bracket span overshoots (the presentation leaks a drift direction), each
/// single bracket is tried on top of `Ch V^(k-1)` instead.
pub fn pi_bundles(analysis: &FlagAnalysis, cfg: &SampleConfig) -> Result<PiBundles> {
    let k = analysis.flag.derived_length;
    if k < 2 {
        return Err(EngineError::Geometry(
            "corank-one bundles need derived length at least 2".into(),
        ));
    }
    let m_k = analysis.signature.m(k);
    let m_k1 = analysis.signature.m(k - 1);
    let inter = &analysis.intersections[k - 2];
    let vk2 = &analysis.flag.levels[k - 2];
    let vk1 = &analysis.flag.levels[k - 1];
    let ch_k1 = &analysis.cauchys[k - 1];

    let pi_k = bracket_extension(inter, vk2, m_k1 - 1, ch_k1, cfg).ok_or_else(|| {
        EngineError::Geometry(
            "no integrable corank-one sub-bundle found at the top of the flag".into(),
        )
    })?;
    let pi_k_plus = bracket_extension(&pi_k, vk1, m_k - 1, &pi_k, cfg).ok_or_else(|| {
        EngineError::Geometry(
            "no integrable corank-one extension above the top of the flag".into(),
        )
    })?;
    Ok(PiBundles { pi_k, pi_k_plus })
}

/// Span `seed + [seed, against]`, expected to be integrable of the given
/// rank and to contain `must_contain`. Falls back to per-bracket candidates
/// when the full bracket span overshoots.
fn bracket_extension(
    seed: &Distribution,
    against: &Distribution,
    want_rank: usize,
    must_contain: &Distribution,
    cfg: &SampleConfig,
) -> Option<Distribution> {
    let chart = seed.chart();
    let mut fields: Vec<VectorField> = seed.generators().to_vec();
    let mut brackets = Vec::new();
    for c in seed.generators() {
        for g in against.generators() {
            let b = lie_bracket(c, g).ok()?;
            if !b.is_zero() {
                brackets.push(b.cleared());
            }
        }
    }
    fields.extend(brackets.iter().cloned());
    if let Ok(cand) = Distribution::from_fields_reduced(fields, cfg) {
        if cand.rank() == want_rank
            && is_integrable(&cand).ok()?
            && contains_all(&cand, must_contain)
        {
            return Some(cand);
        }
    }
    // Per-bracket fallback: must_contain plus a single bracket direction.
    for b in &brackets {
        let mut fields: Vec<VectorField> = must_contain.generators().to_vec();
        fields.push(b.clone());
        if let Ok(cand) = Distribution::from_fields_reduced(fields, cfg) {
            if cand.rank() == want_rank
                && is_integrable(&cand).ok()?
                && contains_all(&cand, must_contain)
            {
                return Some(cand);
            }
        }
    }
    let _ = chart;
    None
}

fn contains_all(d: &Distribution, sub: &Distribution) -> bool {
    let span = Span::from_rows(d.chart(), d.chart().dim(), &d.coefficient_rows());
    sub.generators().iter().all(|g| span.contains(g.coeffs()))
}

/// Full recognition verdict with per-condition diagnostics.
#[derive(Clone, Debug)]
pub struct GoursatVerdict {
    pub accepted: bool,
    pub tau: Option<TypeVector>,
    pub signature: DerivedTypeSignature,
    pub match_report: MatchReport,
    /// `(i, integrable)` for each intersection `V^(i-1) /\ Ch V^(i)`.
    pub intersection_integrability: Vec<(usize, bool)>,
    pub weber: Option<WeberReport>,
    pub pi: Option<PiBundles>,
    pub pi_integrable: Option<(bool, bool)>,
    pub notes: Vec<String>,
}

impl GoursatVerdict {
    fn reject(signature: DerivedTypeSignature, notes: Vec<String>) -> Self {
        GoursatVerdict {
            accepted: false,
            tau: None,
            match_report: MatchReport {
                matches: false,
                tau: None,
                failures: Vec::new(),
            },
            signature,
            intersection_integrability: Vec::new(),
            weber: None,
            pi: None,
            pi_integrable: None,
            notes,
        }
    }
}

/// Decide whether the analysed distribution is a Goursat bundle: rank
/// equations satisfied with the type read off the deceleration, integrable
/// intersections, and the top condition (integrable Weber structure when
/// the top velocity exceeds one, integrable corank-one bundles otherwise).
pub fn is_goursat_bundle(analysis: &FlagAnalysis, cfg: &SampleConfig) -> Result<GoursatVerdict> {
    let sig = analysis.signature.clone();
    let k = analysis.flag.derived_length;
    let dim = analysis.distribution.chart().dim();
    let mut notes = Vec::new();
    if k <= 1 {
        return Ok(GoursatVerdict::reject(
            sig,
            vec![format!("derived length {} is outside the theorem (k > 1 required)", k)],
        ));
    }
    if sig.m(k) != dim {
        let msg = format!(
            "flag stabilises at rank {} below the chart dimension {}",
            sig.m(k),
            dim
        );
        return Ok(GoursatVerdict::reject(sig, vec![msg]));
    }
    let match_report = matches_partial_prolongation(&sig);
    let mut accepted = match_report.matches;
    notes.extend(match_report.failures.iter().cloned());

    let mut intersection_integrability = Vec::new();
    for (i, inter) in analysis.intersections.iter().enumerate() {
        let ok = is_integrable(inter)?;
        if !ok {
            accepted = false;
            notes.push(format!("intersection bundle at level {} is not integrable", i + 1));
        }
        intersection_integrability.push((i + 1, ok));
    }

    let delta_k = *sig.velocity().last().unwrap();
    let mut weber = None;
    let mut pi = None;
    let mut pi_integrable = None;
    if accepted {
        if delta_k > 1 {
            let report = resolvent_bundle(&analysis.flag.levels[k - 1], cfg)?;
            if !report.shape_ok {
                accepted = false;
                notes.extend(report.notes.iter().cloned());
            } else {
                if report.q != delta_k as usize {
                    accepted = false;
                    notes.push(format!(
                        "singular sub-bundle rank {} does not match the top velocity {}",
                        report.q, delta_k
                    ));
                }
                if !report.integrable {
                    accepted = false;
                    notes.push("resolvent bundle is not integrable".into());
                }
            }
            weber = Some(report);
        } else {
            match pi_bundles(analysis, cfg) {
                Ok(bundles) => {
                    let ok_k = is_integrable(&bundles.pi_k)?;
                    let ok_k1 = is_integrable(&bundles.pi_k_plus)?;
                    pi_integrable = Some((ok_k, ok_k1));
                    if !(ok_k && ok_k1) {
                        accepted = false;
                        notes.push("corank-one top bundles are not integrable".into());
                    }
                    pi = Some(bundles);
                }
                Err(e) => {
                    accepted = false;
                    notes.push(format!("corank-one top bundles unavailable: {}", e));
                }
            }
        }
    }

    Ok(GoursatVerdict {
        accepted,
        tau: if accepted { match_report.tau.clone() } else { None },
        signature: sig,
        match_report,
        intersection_integrability,
        weber,
        pi,
        pi_integrable,
        notes,
    })
}

/// The corank-one integrable closure sitting above the top filtration
/// bundle: the span of the top bundle and its brackets with `V^(k-1)`. Its
/// single invariant is the independent variable of the construction. `None`
/// when the bracket span is not integrable of the right rank (the
/// construction then iterates over all top-level invariants instead).
pub fn top_closure(
    top: &Distribution,
    vk1: &Distribution,
    cfg: &SampleConfig,
) -> Option<Distribution> {
    let dim = top.chart().dim();
    bracket_extension(top, vk1, dim - 1, top, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predicted_type_for_mixed_orders() {
        let tau = TypeVector::from_list(&[1, 1]).unwrap();
        let sig = predicted_derived_type(&tau);
        assert_eq!(sig.ranks, vec![(3, 0), (5, 3), (6, 6)]);
        assert_eq!(sig.intersection_ranks, Some(vec![2]));
        assert_eq!(sig.deceleration(), vec![1, 1]);
    }

    #[test]
    fn predicted_type_for_two_second_order_chains() {
        let tau = TypeVector::from_list(&[0, 2]).unwrap();
        let sig = predicted_derived_type(&tau);
        assert_eq!(sig.ranks, vec![(3, 0), (5, 2), (7, 7)]);
    }

    #[test]
    fn predicted_type_for_prolonged_two_chain_system() {
        let tau = TypeVector::from_list(&[0, 0, 1, 1]).unwrap();
        let sig = predicted_derived_type(&tau);
        assert_eq!(
            sig.ranks,
            vec![(3, 0), (5, 2), (7, 4), (9, 7), (10, 10)]
        );
    }

    #[test]
    fn predicted_type_for_classical_chain() {
        for k in 1..=6 {
            let mut rho = vec![0; k];
            rho[k - 1] = 1;
            let tau = TypeVector::from_list(&rho).unwrap();
            let sig = predicted_derived_type(&tau);
            for j in 0..=k {
                assert_eq!(sig.m(j), j + 2);
                if j < k {
                    assert_eq!(sig.chi(j), j);
                }
            }
        }
    }

    #[test]
    fn match_report_recovers_tau() {
        let sig = DerivedTypeSignature::new(vec![(3, 0), (5, 3), (6, 6)], Some(vec![2]));
        let report = matches_partial_prolongation(&sig);
        assert!(report.matches);
        assert_eq!(report.tau.unwrap().entries(), &[1, 1]);
    }

    #[test]
    fn match_report_rejects_bad_cauchy_rank() {
        let sig = DerivedTypeSignature::new(vec![(3, 0), (5, 1), (6, 6)], None);
        let report = matches_partial_prolongation(&sig);
        assert!(!report.matches);
        assert!(
            report.failures.iter().any(|f| f.contains("chi^1")),
            "failures: {:?}",
            report.failures
        );
    }

    #[test]
    fn deceleration_identity_against_intersections() {
        // rho_l = chi^l - chi^l_{l-1} for 1 <= l <= k-1 and rho_k = Delta_k
        for rho in [vec![1, 1], vec![0, 2], vec![2, 0, 3], vec![0, 0, 1, 1]] {
            let tau = TypeVector::from_list(&rho).unwrap();
            let sig = predicted_derived_type(&tau);
            let inter = sig.intersection_ranks.clone().unwrap();
            let k = sig.derived_length();
            for l in 1..k {
                assert_eq!(sig.chi(l) - inter[l - 1], rho[l - 1]);
            }
            assert_eq!(*sig.velocity().last().unwrap() as usize, rho[k - 1]);
        }
    }

    #[test]
    fn top_velocity_one_forces_cauchy_corank_two() {
        // Delta_k = 1 implies chi^(k-1) = m_{k-1} - 2
        for rho in [vec![0, 1], vec![1, 1], vec![0, 0, 1, 1], vec![2, 1]] {
            let tau = TypeVector::from_list(&rho).unwrap();
            let sig = predicted_derived_type(&tau);
            let k = sig.derived_length();
            if *sig.velocity().last().unwrap() == 1 {
                assert_eq!(sig.chi(k - 1), sig.m(k - 1) - 2);
            }
        }
    }

    #[test]
    fn type_vector_pair_form_round_trip() {
        let tau = TypeVector::from_list(&[0, 2, 0, 1]).unwrap();
        let pairs = tau.pairs();
        assert_eq!(pairs, vec![(2, 2), (1, 4)]);
        assert_eq!(TypeVector::from_pairs(&pairs).unwrap(), tau);
        assert_eq!(tau.total_chains(), 3);
        assert_eq!(tau.class(), 2);
        assert_eq!(tau.ambient_dimension(), 1 + 2 * 3 + 1 * 5);
    }
}
