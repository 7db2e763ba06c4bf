//! Linear algebra over the rational function field and over `Q`.
//!
//! Everything geometric reduces to ranks, kernels and solves of matrices
//! whose entries are [`Expression`]s. Entries form a field, so ordinary
//! Gaussian elimination is exact; the expression normal form keeps entries
//! reduced after every operation. Numeric ranks at sample points use plain
//! rational elimination.

use num::Zero;

use crate::expr::{Chart, EngineError, Expression, Rat, RationalPoint, Result, Value};

/// Exact rank of a matrix of rationals.
pub fn rank_q(rows: &[Vec<Rat>]) -> usize {
    let mut m: Vec<Vec<Rat>> = rows.to_vec();
    let ncols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = {
            let p = m[rank][col].clone();
            num::BigRational::new(p.denom().clone(), p.numer().clone())
        };
        for c in col..ncols {
            let v = &m[rank][c] * &inv;
            m[rank][c] = v;
        }
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..ncols {
                    let v = &m[r][c] - &factor * &m[rank][c];
                    m[r][c] = v;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Particular solution of `A c = b` over the rationals with free unknowns
/// set to zero; `None` when the system is inconsistent.
pub fn solve_q(rows: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    assert_eq!(rows.len(), rhs.len());
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    let mut m: Vec<Vec<Rat>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let nrows = m.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(pr) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = {
            let p = m[rank][col].clone();
            Rat::new(p.denom().clone(), p.numer().clone())
        };
        for c in 0..=ncols {
            let v = &m[rank][c] * &inv;
            m[rank][c] = v;
        }
        for r in 0..nrows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..=ncols {
                    let v = &m[r][c] - &f * &m[rank][c];
                    m[r][c] = v;
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    for r in rank..nrows {
        if !m[r][ncols].is_zero() {
            return None;
        }
    }
    let mut sol = vec![Rat::zero(); ncols];
    for col in 0..ncols {
        if let Some(r) = pivot_of_col[col] {
            sol[col] = m[r][ncols].clone();
        }
    }
    Some(sol)
}

/// Kernel basis of a rational matrix, free-column normalised.
pub fn kernel_q(rows: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    let mut m: Vec<Vec<Rat>> = rows.to_vec();
    let nrows = m.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(pr) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = {
            let p = m[rank][col].clone();
            Rat::new(p.denom().clone(), p.numer().clone())
        };
        for c in 0..ncols {
            let v = &m[rank][c] * &inv;
            m[rank][c] = v;
        }
        for r in 0..nrows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..ncols {
                    let v = &m[r][c] - &f * &m[rank][c];
                    m[r][c] = v;
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut v = vec![Rat::zero(); ncols];
        v[free] = num::One::one();
        for col in 0..ncols {
            if let Some(r) = pivot_of_col[col] {
                if !m[r][free].is_zero() {
                    v[col] = -m[r][free].clone();
                }
            }
        }
        basis.push(v);
    }
    basis
}

/// Evaluate a matrix of expressions at a point; `None` when a pole is hit.
pub fn eval_rows(rows: &[Vec<Expression>], p: &RationalPoint) -> Result<Option<Vec<Vec<Rat>>>> {
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let mut r = Vec::with_capacity(row.len());
        for e in row {
            match e.eval(p)? {
                Value::Finite(v) => r.push(v),
                Value::Pole => return Ok(None),
            }
        }
        out.push(r);
    }
    Ok(Some(out))
}

/// Rank of an expression matrix at a point; `None` on a pole.
pub fn rank_at(rows: &[Vec<Expression>], p: &RationalPoint) -> Result<Option<usize>> {
    Ok(eval_rows(rows, p)?.map(|m| rank_q(&m)))
}

/// A row space over the function field, kept in reduced row echelon form.
/// Used for symbolic span membership, ranks and quotient reductions.
#[derive(Clone, Debug)]
pub struct Span {
    chart: Chart,
    width: usize,
    rows: Vec<Vec<Expression>>,
    pivots: Vec<usize>,
}

impl Span {
    pub fn empty(chart: &Chart, width: usize) -> Span {
        Span {
            chart: chart.clone(),
            width,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn from_rows(chart: &Chart, width: usize, rows: &[Vec<Expression>]) -> Span {
        let mut s = Span::empty(chart, width);
        for r in rows {
            s.add_row(r.clone());
        }
        s
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> &[Vec<Expression>] {
        &self.rows
    }

    /// Reduce a vector against the span; the residual is zero iff the vector
    /// lies in the span.
    pub fn reduce(&self, v: &[Expression]) -> Vec<Expression> {
        assert_eq!(v.len(), self.width);
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let factor = v[p].clone();
                for c in 0..self.width {
                    if !row[c].is_zero() {
                        v[c] = v[c].sub(&factor.mul(&row[c]));
                    }
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Expression]) -> bool {
        self.reduce(v).iter().all(Expression::is_zero)
    }

    pub fn contains_all(&self, vs: &[Vec<Expression>]) -> bool {
        vs.iter().all(|v| self.contains(v))
    }

    /// Insert a vector; returns true when it enlarged the span.
    pub fn add_row(&mut self, v: Vec<Expression>) -> bool {
        let mut v = self.reduce(&v);
        let Some(pivot) = v.iter().position(|e| !e.is_zero()) else {
            return false;
        };
        let inv = v[pivot].recip().expect("pivot is nonzero");
        for c in 0..self.width {
            if !v[c].is_zero() {
                v[c] = v[c].mul(&inv);
            }
        }
        // Back-substitute to keep reduced echelon form.
        for (row, &p) in self.rows.iter_mut().zip(&self.pivots) {
            let _ = p;
            if !row[pivot].is_zero() {
                let factor = row[pivot].clone();
                for c in 0..v.len() {
                    if !v[c].is_zero() {
                        row[c] = row[c].sub(&factor.mul(&v[c]));
                    }
                }
            }
        }
        let at = self
            .pivots
            .iter()
            .position(|&p| p > pivot)
            .unwrap_or(self.pivots.len());
        self.rows.insert(at, v);
        self.pivots.insert(at, pivot);
        true
    }
}

/// Kernel basis of `A c = 0`, `A` given by rows over the function field.
/// The basis is in the standard free-column echelon normalisation, which
/// makes downstream generator presentations deterministic.
pub fn kernel_basis(chart: &Chart, ncols: usize, rows: &[Vec<Expression>]) -> Vec<Vec<Expression>> {
    let mut m: Vec<Vec<Expression>> = rows.to_vec();
    let nrows = m.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(pr) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = m[rank][col].recip().unwrap();
        for c in 0..ncols {
            if !m[rank][c].is_zero() {
                m[rank][c] = m[rank][c].mul(&inv);
            }
        }
        for r in 0..nrows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..ncols {
                    if !m[rank][c].is_zero() {
                        m[r][c] = m[r][c].sub(&f.mul(&m[rank][c]));
                    }
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut v = vec![Expression::zero(chart); ncols];
        v[free] = Expression::one(chart);
        for col in 0..ncols {
            if let Some(r) = pivot_of_col[col] {
                if !m[r][free].is_zero() {
                    v[col] = m[r][free].neg();
                }
            }
        }
        basis.push(v);
    }
    basis
}

/// Solve `A c = b` over the function field; free unknowns are set to zero.
pub fn solve_particular(
    chart: &Chart,
    ncols: usize,
    rows: &[Vec<Expression>],
    rhs: &[Expression],
) -> Result<Vec<Expression>> {
    assert_eq!(rows.len(), rhs.len());
    let mut m: Vec<Vec<Expression>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let nrows = m.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(pr) = (rank..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = m[rank][col].recip().unwrap();
        for c in 0..=ncols {
            if !m[rank][c].is_zero() {
                m[rank][c] = m[rank][c].mul(&inv);
            }
        }
        for r in 0..nrows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..=ncols {
                    if !m[rank][c].is_zero() {
                        m[r][c] = m[r][c].sub(&f.mul(&m[rank][c]));
                    }
                }
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    for r in rank..nrows {
        if !m[r][ncols].is_zero() {
            return Err(EngineError::Geometry(
                "linear system over the function field is inconsistent".into(),
            ));
        }
    }
    let mut sol = vec![Expression::zero(chart); ncols];
    for col in 0..ncols {
        if let Some(r) = pivot_of_col[col] {
            sol[col] = m[r][ncols].clone();
        }
    }
    Ok(sol)
}

/// Symbolic determinant by fraction-free elimination (Bareiss). Entries may
/// be arbitrary rational functions; intermediate divisions are exact.
pub fn determinant(rows: &[Vec<Expression>]) -> Expression {
    let n = rows.len();
    assert!(n > 0 && rows.iter().all(|r| r.len() == n), "square matrix");
    let chart = rows[0][0].chart().clone();
    let mut m = rows.to_vec();
    let mut sign = false;
    let mut prev = Expression::one(&chart);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(sr) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return Expression::zero(&chart);
            };
            m.swap(k, sr);
            sign = !sign;
        }
        let pivot = m[k][k].clone();
        for i in k + 1..n {
            for j in k + 1..n {
                let t = m[i][j].mul(&pivot).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = t.div(&prev).expect("bareiss division is exact");
            }
            m[i][k] = Expression::zero(&chart);
        }
        prev = pivot;
    }
    let det = m[n - 1][n - 1].clone();
    if sign {
        det.neg()
    } else {
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, rat_int};

    fn chart2() -> Chart {
        Chart::new(&["x", "y"]).unwrap()
    }

    #[test]
    fn rank_q_counts_independent_rows() {
        let rows = vec![
            vec![rat_int(1), rat_int(2)],
            vec![rat_int(2), rat_int(4)],
            vec![rat_int(0), rat_int(1)],
        ];
        assert_eq!(rank_q(&rows), 2);
    }

    #[test]
    fn span_membership_over_function_field() {
        let c = chart2();
        let x = parse("x", &c).unwrap();
        let one = Expression::one(&c);
        let zero = Expression::zero(&c);
        // rows (x, 1) and (1, 0) span everything except where x-dependence matters
        let mut s = Span::empty(&c, 2);
        assert!(s.add_row(vec![x.clone(), one.clone()]));
        assert!(s.add_row(vec![one.clone(), zero.clone()]));
        assert_eq!(s.rank(), 2);
        assert!(s.contains(&[parse("x^2", &c).unwrap(), x.clone()]));
    }

    #[test]
    fn kernel_of_dependent_columns() {
        let c = chart2();
        let x = parse("x", &c).unwrap();
        // columns: v1 = (1, x), v2 = (x, x^2) are proportional
        let rows = vec![
            vec![Expression::one(&c), x.clone()],
            vec![x.clone(), parse("x^2", &c).unwrap()],
        ];
        let k = kernel_basis(&c, 2, &rows);
        assert_eq!(k.len(), 1);
        // kernel vector is (-x, 1)
        assert_eq!(k[0][0], x.neg());
        assert!(k[0][1].is_one());
    }

    #[test]
    fn determinant_with_cancellation() {
        let c = chart2();
        let rows = vec![
            vec![parse("x", &c).unwrap(), parse("1", &c).unwrap()],
            vec![parse("x^2", &c).unwrap(), parse("x", &c).unwrap()],
        ];
        assert!(determinant(&rows).is_zero());
        let rows = vec![
            vec![parse("x", &c).unwrap(), parse("1", &c).unwrap()],
            vec![parse("1", &c).unwrap(), parse("y", &c).unwrap()],
        ];
        let det = determinant(&rows);
        assert_eq!(det, parse("x*y - 1", &c).unwrap());
    }
}
