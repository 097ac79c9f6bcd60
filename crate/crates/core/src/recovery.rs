//! From a Groebner basis of the recurrence ideal back to a sparse generator:
//! common zeros, coefficients by linear algebra over `L`, optional descent to
//! the base field, and the final affordance check.

use thiserror::Error;

use crate::gf::{Elem, Field};
use crate::lattice::IndexPair;
use crate::poly::{CellSource, EvaluationPoint, Poly};
use crate::table::IncompleteTable;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecoveryError {
    #[error("linear system is singular")]
    Singular,
    #[error("linear system is inconsistent")]
    Inconsistent,
}

/// `e'` written over `L` with `u_n = e'(α^n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseGenerator {
    /// Row-major.
    pub support: Vec<IndexPair>,
    pub coefficients: Vec<Elem>,
}

/// Base-field form `e` with `e'(x) = e(α^{τ''} x)` coefficientwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Descent {
    pub tau: IndexPair,
    pub coefficients: Vec<Elem>,
}

impl SparseGenerator {
    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn to_poly(&self, field: &Field) -> Poly {
        Poly::from_terms(self.support.iter().copied().zip(self.coefficients.iter().copied()), field)
    }

    pub fn from_poly(poly: &Poly) -> Self {
        let (support, coefficients) = poly.terms().unzip();
        SparseGenerator { support, coefficients }
    }
}

/// `{m ∈ I : f(α^m) = 0 for every f}`, by evaluation at every point.
pub fn defining_set(basis: &[Poly], point: &EvaluationPoint, field: &Field) -> Vec<IndexPair> {
    point
        .shape
        .indices()
        .filter(|&m| {
            let (x, y) = point.power(m, field);
            basis.iter().all(|f| f.evaluate(x, y, field).is_zero())
        })
        .collect()
}

/// Solve `A x = b` over `L` by Gauss-Jordan elimination. Extra rows are
/// checked for consistency.
pub fn solve_linear(mut rows: Vec<Vec<Elem>>, mut rhs: Vec<Elem>, field: &Field) -> Result<Vec<Elem>, RecoveryError> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            return Err(RecoveryError::Singular);
        };
        rows.swap(rank, pivot);
        rhs.swap(rank, pivot);
        let inv = field.inv(rows[rank][col]).expect("pivot is nonzero");
        for x in rows[rank].iter_mut() {
            *x = field.mul(*x, inv);
        }
        rhs[rank] = field.mul(rhs[rank], inv);
        for r in 0..rows.len() {
            let factor = rows[r][col];
            if r == rank || factor.is_zero() {
                continue;
            }
            let pivot = rows[rank].clone();
            for (x, &p) in rows[r].iter_mut().zip(&pivot) {
                *x = field.sub(*x, field.mul(factor, p));
            }
            rhs[r] = field.sub(rhs[r], field.mul(factor, rhs[rank]));
        }
        rank += 1;
    }
    if rhs[rank..].iter().any(|x| !x.is_zero()) {
        return Err(RecoveryError::Inconsistent);
    }
    rhs.truncate(cols);
    Ok(rhs)
}

/// Coefficients of `e'` on `support` from the equations
/// `Σ c_m α^{n·m} = u_n`, one per known `n` in `cells`.
pub fn solve_on_cells(
    support: &[IndexPair],
    u: &impl CellSource,
    cells: &[IndexPair],
    point: &EvaluationPoint,
    field: &Field,
) -> Result<Vec<Elem>, RecoveryError> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for &n in cells {
        if let Some(v) = u.cell(n) {
            rows.push(support.iter().map(|&m| point.character(n, m, field)).collect());
            rhs.push(v);
        }
    }
    if support.is_empty() {
        // e' = 0
        return if rhs.iter().all(|v| v.is_zero()) { Ok(Vec::new()) } else { Err(RecoveryError::Inconsistent) };
    }
    solve_linear(rows, rhs, field)
}

/// Coefficients from the known cells of `window`; falls back to every known
/// cell of the array when the window alone is rank deficient.
pub fn solve_coefficients(
    support: &[IndexPair],
    u: &impl CellSource,
    window: &[IndexPair],
    point: &EvaluationPoint,
    field: &Field,
) -> Result<SparseGenerator, RecoveryError> {
    let coefficients = match solve_on_cells(support, u, window, point, field) {
        Err(RecoveryError::Singular) => {
            let all: Vec<IndexPair> = u.shape().indices().collect();
            solve_on_cells(support, u, &all, point, field)?
        }
        other => other?,
    };
    if coefficients.iter().any(|c| c.is_zero()) {
        // a zero coefficient means the support was not the true one
        return Err(RecoveryError::Inconsistent);
    }
    Ok(SparseGenerator { support: support.to_vec(), coefficients })
}

/// First `τ''` (row-major) with every `c_m α^{-τ''·m}` in the base field.
pub fn descend_to_base(generator: &SparseGenerator, point: &EvaluationPoint, field: &Field) -> Option<Descent> {
    point.shape.indices().find_map(|tau| {
        let coefficients: Vec<Elem> = generator
            .support
            .iter()
            .zip(&generator.coefficients)
            .map(|(&m, &c)| field.div(c, point.character(tau, m, field)).expect("characters are units"))
            .collect();
        coefficients.iter().all(|&c| field.in_base_field(c)).then_some(Descent { tau, coefficients })
    })
}

/// Every known `h_n` equals `e'(α^{n-τ})`.
pub fn verify_afforded(
    table: &IncompleteTable,
    generator: &SparseGenerator,
    tau: IndexPair,
    point: &EvaluationPoint,
    field: &Field,
) -> bool {
    let e = generator.to_poly(field);
    table
        .known_cells()
        .all(|(n, h)| point.evaluate(&e, n.wrapping_sub(tau, table.shape()), field) == h)
}
