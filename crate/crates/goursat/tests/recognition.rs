//! Recognition pipeline on the fixture systems: derived types, Cauchy
//! bundles, singular varieties, resolvent bundles and full verdicts.

mod common;

use common::{
    exprs, field, prolonged_chart, prolonged_two_control_system, six_dim_system,
    two_control_system,
};
use goursat::geom::{intersect, is_integrable, Distribution, VectorField};
use goursat::sample::SampleConfig;
use goursat::signature::{analyze, is_goursat_bundle};
use goursat::Chart;

fn cfg() -> SampleConfig {
    SampleConfig::with_seed(7)
}

#[test]
fn six_dim_derived_type_and_verdict() {
    let cfg = cfg();
    let v = six_dim_system(&cfg);
    let analysis = analyze(&v, &cfg).unwrap();
    assert_eq!(
        analysis.signature.ranks,
        vec![(3, 0), (5, 3), (6, 6)],
        "derived type"
    );
    assert_eq!(analysis.signature.intersection_ranks, Some(vec![2]));
    assert_eq!(analysis.signature.deceleration(), vec![1, 1]);

    // Ch V^(1) is spanned by {d_x5 - x1^2 d_x1, d_x2, d_x6}
    let c = v.chart().clone();
    let ch1 = &analysis.cauchys[1];
    assert_eq!(ch1.rank(), 3);
    for expected in [
        field(&c, &["-x1^2", "0", "0", "0", "1", "0"]),
        VectorField::coordinate(&c, 1),
        VectorField::coordinate(&c, 5),
    ] {
        assert!(ch1.contains_field(&expected));
    }
    // Ch V^(1)_0 = {d_x5 - x1^2 d_x1, d_x2}
    let inter = &analysis.intersections[0];
    assert_eq!(inter.rank(), 2);
    assert!(inter.contains_field(&field(&c, &["-x1^2", "0", "0", "0", "1", "0"])));
    assert!(inter.contains_field(&VectorField::coordinate(&c, 1)));
    assert!(!inter.contains_field(&VectorField::coordinate(&c, 5)));

    let verdict = is_goursat_bundle(&analysis, &cfg).unwrap();
    assert!(verdict.accepted, "notes: {:?}", verdict.notes);
    assert_eq!(verdict.tau.unwrap().entries(), &[1, 1]);

    // Delta_k = 1: the corank-one bundle has rank m_1 - 1 = 4 and matches
    // {d_x5 - x1^2 d_x1, d_x2, d_x6, d_x3}.
    let pi = verdict.pi.as_ref().unwrap();
    assert_eq!(pi.pi_k.rank(), 4);
    for expected in [
        field(&c, &["-x1^2", "0", "0", "0", "1", "0"]),
        VectorField::coordinate(&c, 1),
        VectorField::coordinate(&c, 5),
        VectorField::coordinate(&c, 2),
    ] {
        assert!(pi.pi_k.contains_field(&expected), "pi_k misses {}", expected);
    }
    assert_eq!(pi.pi_k_plus.rank(), 5);
}

#[test]
fn two_control_derived_type_and_resolvent() {
    let cfg = cfg();
    let v = two_control_system(&cfg);
    let analysis = analyze(&v, &cfg).unwrap();
    assert_eq!(analysis.signature.ranks, vec![(3, 0), (5, 2), (7, 7)]);
    assert_eq!(analysis.signature.deceleration(), vec![0, 2]);

    let c = v.chart().clone();
    // Ch V^(1)_0 = Ch V^(1) = {d_u1, d_u2}
    let ch1 = &analysis.cauchys[1];
    assert_eq!(ch1.rank(), 2);
    assert!(ch1.contains_field(&VectorField::coordinate(&c, 5)));
    assert!(ch1.contains_field(&VectorField::coordinate(&c, 6)));

    let verdict = is_goursat_bundle(&analysis, &cfg).unwrap();
    assert!(verdict.accepted, "notes: {:?}", verdict.notes);
    assert_eq!(verdict.tau.unwrap().entries(), &[0, 2]);

    // The resolvent bundle matches the displayed singular sub-bundle:
    // span{x1 M2 - x2 M1, M1 + x1 M3, d_u1, d_u2} with
    // M1 = d_t + x2 d_x1 + x3 d_x2 (the quotient drift class),
    // M2 = x3 d_x1 + x1 d_x2 + d_x4, M3 = d_x3.
    let weber = verdict.weber.as_ref().unwrap();
    assert!(weber.shape_ok);
    assert_eq!(weber.q, 2);
    assert_eq!(weber.cauchy_rank, 2);
    assert!(weber.integrable);
    let r = weber.resolvent.as_ref().unwrap();
    assert_eq!(r.rank(), 4);
    let m1 = field(&c, &["1", "x2", "x3", "0", "0", "0", "0"]);
    let m2 = field(&c, &["0", "x3", "x1", "0", "1", "0", "0"]);
    let m3 = VectorField::coordinate(&c, 3);
    let x1 = exprs(&c, &["x1"]).pop().unwrap();
    let x2 = exprs(&c, &["x2"]).pop().unwrap();
    let gen1 = m2.scale(&x1).add(&m1.scale(&x2).neg());
    let gen2 = m1.add(&m3.scale(&x1));
    assert!(r.contains_field(&gen1), "resolvent misses x1*M2 - x2*M1");
    assert!(r.contains_field(&gen2), "resolvent misses M1 + x1*M3");
    assert!(r.contains_field(&VectorField::coordinate(&c, 5)));
    assert!(r.contains_field(&VectorField::coordinate(&c, 6)));
    // ... and conversely the four fields span the resolvent exactly.
    let candidate = Distribution::certify(
        vec![
            gen1,
            gen2,
            VectorField::coordinate(&c, 5),
            VectorField::coordinate(&c, 6),
        ],
        &cfg,
    )
    .unwrap();
    assert_eq!(candidate.rank(), 4);
    for g in r.generators() {
        assert!(candidate.contains_field(g));
    }
}

#[test]
fn prolonged_system_flag_and_verdict() {
    let cfg = cfg();
    let v = prolonged_two_control_system(&cfg);
    let analysis = analyze(&v, &cfg).unwrap();
    assert_eq!(
        analysis.signature.ranks,
        vec![(3, 0), (5, 2), (7, 4), (9, 7), (10, 10)]
    );
    assert_eq!(analysis.signature.deceleration(), vec![0, 0, 1, 1]);

    let c = prolonged_chart();
    // Ch V^(2) = {d_u1, d_u2, d_x3, d_v3}
    let ch2 = &analysis.cauchys[2];
    assert_eq!(ch2.rank(), 4);
    for idx in [8, 9, 3, 7] {
        assert!(ch2.contains_field(&VectorField::coordinate(&c, idx)));
    }
    // Ch V^(3)_2 = Ch V^(2) + {d_v2, v1 d_x1 + d_x2}, rank 6
    let inter32 = &analysis.intersections[2];
    assert_eq!(inter32.rank(), 6);
    assert!(inter32.contains_field(&VectorField::coordinate(&c, 6)));
    assert!(inter32.contains_field(&field(
        &c,
        &["0", "v1", "1", "0", "0", "0", "0", "0", "0", "0"]
    )));
    // Ch V^(3) adds (1 - v2) d_x1 + v1^2 d_x2, rank 7
    let ch3 = &analysis.cauchys[3];
    assert_eq!(ch3.rank(), 7);
    assert!(ch3.contains_field(&field(
        &c,
        &["0", "1 - v2", "v1^2", "0", "0", "0", "0", "0", "0", "0"]
    )));

    // V^(3) / Ch V^(3) is spanned by {d_t + v1 d_x4, d_v1} modulo Ch V^(3)
    let quotient_rep = field(&c, &["1", "0", "0", "0", "v1", "0", "0", "0", "0", "0"]);
    let v3 = &analysis.flag.levels[3];
    assert!(v3.contains_field(&quotient_rep));
    assert!(v3.contains_field(&VectorField::coordinate(&c, 5)));

    let verdict = is_goursat_bundle(&analysis, &cfg).unwrap();
    assert!(verdict.accepted, "notes: {:?}", verdict.notes);
    assert_eq!(verdict.tau.unwrap().entries(), &[0, 0, 1, 1]);

    // Pi^4 = Ch V^(3) + {d_v1}, rank 8
    let pi = verdict.pi.as_ref().unwrap();
    assert_eq!(pi.pi_k.rank(), 8);
    assert!(pi.pi_k.contains_field(&VectorField::coordinate(&c, 5)));
    for g in ch3.generators() {
        assert!(pi.pi_k.contains_field(g));
    }
    assert_eq!(pi.pi_k_plus.rank(), 9);
    // Pi^5 contains everything except the d_t direction
    for idx in 1..10 {
        assert!(
            pi.pi_k_plus.contains_field(&VectorField::coordinate(&c, idx)),
            "pi_k_plus misses coordinate {}",
            idx
        );
    }
}

#[test]
fn intersection_of_prolonged_levels() {
    // V^(2) /\ Ch V^(3) has rank 6
    let cfg = cfg();
    let v = prolonged_two_control_system(&cfg);
    let analysis = analyze(&v, &cfg).unwrap();
    let i = intersect(&analysis.flag.levels[2], &analysis.cauchys[3], &cfg).unwrap();
    assert_eq!(i.rank(), 6);
}

#[test]
fn cauchy_bundles_are_integrable_across_corpus() {
    let cfg = cfg();
    for v in [
        six_dim_system(&cfg),
        two_control_system(&cfg),
        prolonged_two_control_system(&cfg),
    ] {
        let analysis = analyze(&v, &cfg).unwrap();
        for ch in &analysis.cauchys {
            if ch.rank() > 0 {
                assert!(is_integrable(ch).unwrap());
            }
        }
    }
}

#[test]
fn low_derived_length_is_rejected() {
    // C^(1)_1 on R^3 stabilises after one step: outside the theorem.
    let cfg = cfg();
    let c = Chart::new(&["x", "z", "z1"]).unwrap();
    let t = field(&c, &["1", "z1", "0"]);
    let d = Distribution::certify(vec![t, VectorField::coordinate(&c, 2)], &cfg).unwrap();
    let analysis = analyze(&d, &cfg).unwrap();
    assert_eq!(analysis.flag.derived_length, 1);
    let verdict = is_goursat_bundle(&analysis, &cfg).unwrap();
    assert!(!verdict.accepted);
    assert!(verdict.notes[0].contains("derived length"));
}
