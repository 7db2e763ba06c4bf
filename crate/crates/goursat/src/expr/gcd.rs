//! Multivariate polynomial gcd by recursive content extraction and a
//! primitive pseudo-remainder sequence in the top variable. The gcd is what
//! keeps the rational normal form canonical: every quotient is reduced to
//! lowest terms after each arithmetic operation.

use num::One;

use super::poly::{Mono, Poly, Rat};

/// Primitive gcd with positive leading coefficient; `1` for coprime inputs.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return normalize(b);
    }
    if b.is_zero() {
        return normalize(a);
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one(&a.chart);
    }
    let va = a.top_var().unwrap();
    let vb = b.top_var().unwrap();
    let v = va.max(vb);
    if !a.occurs(v) || !b.occurs(v) {
        // The top variable of one side is absent from the other: any common
        // divisor is free of v, so recurse into the v-coefficients.
        let (with_v, without_v) = if a.occurs(v) { (a, b) } else { (b, a) };
        let mut g = without_v.clone();
        for c in with_v.coeffs_in(v) {
            if g.is_one() {
                break;
            }
            if !c.is_zero() {
                g = gcd(&g, &c);
            }
        }
        return normalize(&g);
    }

    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let cg = gcd(&ca, &cb);
    let pg = primitive_prs_gcd(&pa, &pb, v);
    normalize(&cg.mul(&pg))
}

fn normalize(p: &Poly) -> Poly {
    if p.is_zero() {
        return p.clone();
    }
    let (_, prim) = p.content_and_primitive();
    prim
}

/// Content of `p` viewed as a univariate polynomial in `v`.
fn content_in(p: &Poly, v: usize) -> Poly {
    let coeffs = p.coeffs_in(v);
    let mut g = Poly::zero(&p.chart);
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, &c);
        if g.is_one() {
            break;
        }
    }
    g
}

/// Pseudo-remainder of `a` by `b` in variable `v`.
fn pseudo_rem(a: &Poly, b: &Poly, v: usize) -> Poly {
    let db = b.degree_in(v);
    let lb = b.coeffs_in(v)[db as usize].clone();
    let mut r = a.clone();
    loop {
        if r.is_zero() {
            break;
        }
        let dr = r.degree_in(v);
        if dr < db {
            break;
        }
        let lr = r.coeffs_in(v)[dr as usize].clone();
        let shift = {
            let mut m = Mono::one(r.chart.dim());
            m.0[v] = dr - db;
            m
        };
        r = r.mul(&lb).sub(&b.mul(&lr).mul_term(&shift, &Rat::one()));
    }
    r
}

/// Primitive PRS on inputs that are primitive in `v`.
fn primitive_prs_gcd(a: &Poly, b: &Poly, v: usize) -> Poly {
    let (mut f, mut g) = if a.degree_in(v) >= b.degree_in(v) {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    };
    loop {
        let r = pseudo_rem(&f, &g, v);
        if r.is_zero() {
            return normalize(&g);
        }
        if r.degree_in(v) == 0 {
            return Poly::one(&f.chart);
        }
        let c = content_in(&r, v);
        f = g;
        g = r.div_exact(&c).expect("content divides");
    }
}

/// gcd of a list, used for clearing common factors out of vectors of
/// polynomials (kernel vectors, bracket coefficients).
pub fn gcd_list(polys: &[Poly]) -> Poly {
    let mut g = match polys.first() {
        Some(p) => Poly::zero(&p.chart),
        None => panic!("gcd of empty list"),
    };
    for p in polys {
        if p.is_zero() {
            continue;
        }
        g = gcd(&g, p);
        if g.is_one() {
            break;
        }
    }
    if g.is_zero() {
        g = Poly::one(&polys[0].chart);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::super::poly::rat_int;
    use super::*;
    use crate::expr::Chart;

    fn chart3() -> Chart {
        Chart::new(&["x", "y", "z"]).unwrap()
    }

    #[test]
    fn gcd_of_common_factor() {
        let c = chart3();
        let x = Poly::var(&c, 0);
        let y = Poly::var(&c, 1);
        let f = x.add(&y);
        let a = f.mul(&x);
        let b = f.mul(&y.add(&Poly::one(&c)));
        let g = gcd(&a, &b);
        assert_eq!(g, f);
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let c = chart3();
        let x = Poly::var(&c, 0);
        let y = Poly::var(&c, 1);
        assert!(gcd(&x, &y).is_one());
    }

    #[test]
    fn gcd_handles_powers_and_scalars() {
        let c = chart3();
        let x = Poly::var(&c, 0);
        let f = x.add(&Poly::constant(&c, rat_int(2)));
        let a = f.pow(3).scale(&rat_int(6));
        let b = f.pow(2).scale(&rat_int(-4));
        let g = gcd(&a, &b);
        assert_eq!(g, f.pow(2));
    }

    #[test]
    fn gcd_with_disjoint_top_variables() {
        let c = chart3();
        let x = Poly::var(&c, 0);
        let z = Poly::var(&c, 2);
        let a = x.mul(&z).add(&z); // z(x+1)
        let b = x.add(&Poly::one(&c)); // x+1, no z
        assert_eq!(gcd(&a, &b), b);
    }
}
