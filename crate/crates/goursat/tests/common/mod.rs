//! Shared fixtures for the integration suites: the three production
//! systems exercised throughout, plus helpers for building fields from
//! expression strings.

#![allow(dead_code)]

use goursat::expr::{parse, Expression};
use goursat::geom::{Distribution, VectorField};
use goursat::sample::SampleConfig;
use goursat::Chart;

pub fn field(chart: &Chart, comps: &[&str]) -> VectorField {
    VectorField::new(
        chart,
        comps.iter().map(|s| parse(s, chart).unwrap()).collect(),
    )
    .unwrap()
}

pub fn exprs(chart: &Chart, srcs: &[&str]) -> Vec<Expression> {
    srcs.iter().map(|s| parse(s, chart).unwrap()).collect()
}

/// The six-dimensional two-chain system: three generators on a generic
/// subset of R^6 with derived type [[3,0],[5,3],[6,6]].
pub fn six_dim_system(cfg: &SampleConfig) -> Distribution {
    let c = Chart::new(&["x1", "x2", "x3", "x4", "x5", "x6"]).unwrap();
    let g1 = field(
        &c,
        &["0", "0", "(1 + x2*x6)/x6", "1 + x3", "1", "1/x1"],
    );
    let g2 = field(&c, &["-x1^2", "0", "0", "0", "1", "0"]);
    let g3 = field(&c, &["0", "1", "0", "0", "0", "0"]);
    Distribution::certify(vec![g1, g2, g3], cfg).unwrap()
}

/// The two-control system in three states plus one integrator state on R^7:
/// derived type [[3,0],[5,2],[7,7]].
pub fn two_control_system(cfg: &SampleConfig) -> Distribution {
    let c = Chart::new(&["t", "x1", "x2", "x3", "x4", "u1", "u2"]).unwrap();
    let drift = field(
        &c,
        &["1", "x2 + u2*x3", "x3 + u2*x1", "u1", "u2", "0", "0"],
    );
    Distribution::certify(
        vec![
            drift,
            VectorField::coordinate(&c, 5),
            VectorField::coordinate(&c, 6),
        ],
        cfg,
    )
    .unwrap()
}

/// The same system with the second control differentiated three times
/// (three integrators appended), on R^10: derived type
/// [[3,0],[5,2],[7,4],[9,7],[10,10]].
pub fn prolonged_two_control_system(cfg: &SampleConfig) -> Distribution {
    let c = prolonged_chart();
    let drift = field(
        &c,
        &[
            "1",
            "x2 + v1*x3",
            "x3 + v1*x1",
            "u1",
            "v1",
            "v2",
            "v3",
            "u2",
            "0",
            "0",
        ],
    );
    Distribution::certify(
        vec![
            drift,
            VectorField::coordinate(&c, 8),
            VectorField::coordinate(&c, 9),
        ],
        cfg,
    )
    .unwrap()
}

pub fn prolonged_chart() -> Chart {
    Chart::new(&["t", "x1", "x2", "x3", "x4", "v1", "v2", "v3", "u1", "u2"]).unwrap()
}
