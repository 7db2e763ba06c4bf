//! Construction pipeline on the fixture systems: filtrations, fundamental
//! functions, chains, and verification of both constructed and
//! hand-supplied transformations.

mod common;

use common::{exprs, prolonged_two_control_system, six_dim_system};
use goursat::contact::{
    build_filtration, contact_chart, contact_coordinates, verify_equivalence,
    ContactTransformation, SuppliedInvariants,
};
use goursat::expr::parse;
use goursat::integrals::AnsatzConfig;
use goursat::sample::SampleConfig;
use goursat::signature::{analyze, is_goursat_bundle};
use goursat::TypeVector;

fn cfg() -> SampleConfig {
    SampleConfig::with_seed(7)
}

#[test]
fn construct_six_dim_transformation() {
    let cfg = cfg();
    let v = six_dim_system(&cfg);
    let analysis = analyze(&v, &cfg).unwrap();
    let verdict = is_goursat_bundle(&analysis, &cfg).unwrap();
    assert!(verdict.accepted);
    let filtration = build_filtration(
        &analysis,
        &verdict,
        &AnsatzConfig::default(),
        &cfg,
        &SuppliedInvariants::new(),
    )
    .unwrap();

    // The top bundle (rank 4) has invariants spanned by x5 - 1/x1 and x4;
    // Ch V^(1) has invariants x3, x4, x5 - 1/x1.
    let c = v.chart().clone();
    let ch1 = &filtration.levels[1];
    assert_eq!(ch1.label, "ch1");
    let expected = exprs(&c, &["x3", "x4", "x5 - 1/x1"]);
    for e in &expected {
        assert!(
            ch1.invariants.functions.contains(e),
            "ch1 invariants {:?} missing {}",
            ch1.invariants
                .functions
                .iter()
                .map(|f| f.to_string())
                .collect::<Vec<_>>(),
            e
        );
    }
    let top = &filtration.top;
    assert_eq!(top.invariants.functions.len(), 2);

    let built = contact_coordinates(&analysis, &verdict, &filtration, &cfg).unwrap();
    let t = &built.transformation;
    // The construction lands on the displayed map: x = x5 - 1/x1, z1 = x6,
    // z1_1 = 1/x1, z2 = x4, z2_1 = 1 + x3, z2_2 = (1 + x2 x6)/x6.
    let expect = [
        ("x", "x5 - 1/x1"),
        ("z1", "x6"),
        ("z1_1", "1/x1"),
        ("z2", "x4"),
        ("z2_1", "1 + x3"),
        ("z2_2", "(1 + x2*x6)/x6"),
    ];
    for (name, src) in expect {
        assert_eq!(
            t.component(name).unwrap(),
            &parse(src, &c).unwrap(),
            "component {}",
            name
        );
    }
    assert!(built.certificate.points.len() >= 12);
    assert!(built.certificate.symbolic_span_equal);
    // chain identities hold exactly
    for (bottom, first) in [("z1", "z1_1"), ("z2", "z2_1"), ("z2_1", "z2_2")] {
        let lhs = t.operator.apply(t.component(bottom).unwrap());
        assert_eq!(&lhs, t.component(first).unwrap());
    }
}

#[test]
fn verify_the_displayed_six_dim_map() {
    let cfg = cfg();
    let v = six_dim_system(&cfg);
    let c = v.chart().clone();
    let tau = TypeVector::from_list(&[1, 1]).unwrap();
    let (target_chart, _) = contact_chart(&tau).unwrap();
    let components = vec![
        ("x".to_string(), parse("x5 - 1/x1", &c).unwrap()),
        ("z1".to_string(), parse("x6", &c).unwrap()),
        ("z1_1".to_string(), parse("1/x1", &c).unwrap()),
        ("z2".to_string(), parse("x4", &c).unwrap()),
        ("z2_1".to_string(), parse("1 + x3", &c).unwrap()),
        ("z2_2".to_string(), parse("(1 + x2*x6)/x6", &c).unwrap()),
    ];
    let op = v.generators()[0].clone();
    let t = ContactTransformation {
        tau,
        source_chart: c,
        target_chart,
        components,
        operator: op,
    };
    let outcome = verify_equivalence(&v, &t, &cfg).unwrap();
    assert!(outcome.is_ok(), "rejected: {}", outcome.err().unwrap());
}

#[test]
fn construct_prolonged_transformation() {
    let cfg = cfg();
    let v = prolonged_two_control_system(&cfg);
    let analysis = analyze(&v, &cfg).unwrap();
    let verdict = is_goursat_bundle(&analysis, &cfg).unwrap();
    assert!(verdict.accepted);
    let filtration = build_filtration(
        &analysis,
        &verdict,
        &AnsatzConfig::default(),
        &cfg,
        &SuppliedInvariants::new(),
    )
    .unwrap();
    let built = contact_coordinates(&analysis, &verdict, &filtration, &cfg).unwrap();
    let t = &built.transformation;
    let c = v.chart().clone();

    // x = t; the order-4 chain is exactly (x4, v1, v2, v3, u2); the order-3
    // chain starts from x1 - v1 x2.
    assert_eq!(t.component("x").unwrap(), &parse("t", &c).unwrap());
    // chains are numbered ascending by order: z1 has order 3, z2 order 4
    let z2_chain = ["z2", "z2_1", "z2_2", "z2_3", "z2_4"];
    let z2_expect = ["x4", "v1", "v2", "v3", "u2"];
    for (name, src) in z2_chain.iter().zip(z2_expect) {
        assert_eq!(
            t.component(name).unwrap(),
            &parse(src, &c).unwrap(),
            "component {}",
            name
        );
    }
    assert_eq!(
        t.component("z1").unwrap(),
        &parse("x1 - v1*x2", &c).unwrap()
    );
    assert_eq!(
        t.component("z1_1").unwrap(),
        &parse("x2 - x1*v1^2 - v2*x2", &c).unwrap()
    );
    // chain identities hold exactly through order 3
    for (a, b) in [("z1", "z1_1"), ("z1_1", "z1_2"), ("z1_2", "z1_3")] {
        let lhs = t.operator.apply(t.component(a).unwrap());
        assert_eq!(&lhs, t.component(b).unwrap());
    }
    assert!(built.certificate.symbolic_span_equal);
}

#[test]
fn verify_the_displayed_prolonged_map() {
    // The displayed ten-component map, including the long z1_3 entry, and
    // its jacobian determinant -(-1 + v2 + v1^3)^3.
    let cfg = cfg();
    let v = prolonged_two_control_system(&cfg);
    let c = v.chart().clone();
    let tau = TypeVector::from_list(&[0, 0, 1, 1]).unwrap();
    let (target_chart, _) = contact_chart(&tau).unwrap();
    let z1_2 = "-v1^2*x2 - v1^3*x3 + x3 - x3*v2 + x1*v1 - 3*v2*x1*v1 - v3*x2";
    let z1_3 = "v1*x2 - 5*x2*v2*v1 - 6*x3*v1^2*v2 - 2*x3*v3 - x1*v1^3 - 4*x1*v1*v3 \
                - u1*v1^3 + u1 - u1*v2 + v2*x1 - 3*v2^2*x1 - u2*x2";
    let components = vec![
        ("x".to_string(), parse("t", &c).unwrap()),
        ("z1".to_string(), parse("x1 - v1*x2", &c).unwrap()),
        (
            "z1_1".to_string(),
            parse("x2 - x1*v1^2 - v2*x2", &c).unwrap(),
        ),
        ("z1_2".to_string(), parse(z1_2, &c).unwrap()),
        ("z1_3".to_string(), parse(z1_3, &c).unwrap()),
        ("z2".to_string(), parse("x4", &c).unwrap()),
        ("z2_1".to_string(), parse("v1", &c).unwrap()),
        ("z2_2".to_string(), parse("v2", &c).unwrap()),
        ("z2_3".to_string(), parse("v3", &c).unwrap()),
        ("z2_4".to_string(), parse("u2", &c).unwrap()),
    ];
    let op = v.generators()[0].clone();
    let t = ContactTransformation {
        tau,
        source_chart: c.clone(),
        target_chart,
        components,
        operator: op,
    };
    let outcome = verify_equivalence(&v, &t, &cfg).unwrap();
    let cert = outcome.expect("the displayed map verifies");
    let det = cert.jacobian_determinant;
    let expected = parse("-(-1 + v2 + v1^3)^3", &c).unwrap();
    assert!(
        det == expected || det == expected.neg(),
        "determinant {} differs from -(-1 + v2 + v1^3)^3",
        det
    );
}

#[test]
fn corrupted_map_is_rejected_with_witness() {
    // Swap the two chains of the six-dimensional map: wrong orders.
    let cfg = cfg();
    let v = six_dim_system(&cfg);
    let c = v.chart().clone();
    let tau = TypeVector::from_list(&[1, 1]).unwrap();
    let (target_chart, _) = contact_chart(&tau).unwrap();
    let components = vec![
        ("x".to_string(), parse("x5 - 1/x1", &c).unwrap()),
        ("z1".to_string(), parse("x4", &c).unwrap()),
        ("z1_1".to_string(), parse("1 + x3", &c).unwrap()),
        ("z2".to_string(), parse("x6", &c).unwrap()),
        ("z2_1".to_string(), parse("1/x1", &c).unwrap()),
        ("z2_2".to_string(), parse("(1 + x2*x6)/x6", &c).unwrap()),
    ];
    let op = v.generators()[0].clone();
    let t = ContactTransformation {
        tau,
        source_chart: c,
        target_chart,
        components,
        operator: op,
    };
    let outcome = verify_equivalence(&v, &t, &cfg).unwrap();
    let rejection = outcome.expect_err("swapped chains must be rejected");
    assert!(
        rejection.witness.is_some() || rejection.residual_direction.is_some(),
        "rejection should carry a witness: {}",
        rejection
    );
}

#[test]
fn self_test_on_generated_contact_system() {
    // Construction applied to C(tau) itself returns the identity.
    let cfg = cfg();
    let tau = TypeVector::from_list(&[0, 2]).unwrap();
    let sys = goursat::contact::generate_contact_system(&tau, &cfg).unwrap();
    let analysis = analyze(&sys.distribution, &cfg).unwrap();
    let verdict = is_goursat_bundle(&analysis, &cfg).unwrap();
    assert!(verdict.accepted, "notes: {:?}", verdict.notes);
    let filtration = build_filtration(
        &analysis,
        &verdict,
        &AnsatzConfig::default(),
        &cfg,
        &SuppliedInvariants::new(),
    )
    .unwrap();
    let built = contact_coordinates(&analysis, &verdict, &filtration, &cfg).unwrap();
    for (name, expr) in &built.transformation.components {
        let idx = sys.chart.index_of(name).unwrap();
        assert_eq!(
            expr,
            &goursat::Expression::var(&sys.chart, idx),
            "self-test component {} is not the identity",
            name
        );
    }
}
