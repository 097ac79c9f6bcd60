//! Index arithmetic on Z_r1 x Z_r2 and N x N: the componentwise partial order,
//! the two monomial orders, successors, hyperbolic sets and the border set.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("table dimensions must be positive, got {0}x{1}")]
    InvalidShape(usize, usize),
    #[error("hyperbolic set of amplitude {delta} does not fit in a {r1}x{r2} table")]
    DoesNotFit { delta: usize, r1: usize, r2: usize },
    #[error("border indexes are only defined for 2 <= t <= 4, got t = {0}")]
    UnsupportedRegime(usize),
    #[error("expected an index pair `i,j`, got `{0}`")]
    ParseIndex(String),
}

/// Exponent / table index `(n1, n2)`. The derived `Ord` is row-major.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexPair(pub usize, pub usize);

impl IndexPair {
    pub const ORIGIN: IndexPair = IndexPair(0, 0);

    /// Componentwise order: `self <= other` in both coordinates.
    pub fn precedes(self, other: IndexPair) -> bool {
        self.0 <= other.0 && self.1 <= other.1
    }

    pub fn checked_sub(self, other: IndexPair) -> Option<IndexPair> {
        Some(IndexPair(self.0.checked_sub(other.0)?, self.1.checked_sub(other.1)?))
    }

    pub fn wrap(self, shape: TableShape) -> IndexPair {
        IndexPair(self.0 % shape.r1, self.1 % shape.r2)
    }

    /// `(self - other) mod shape`.
    pub fn wrapping_sub(self, other: IndexPair, shape: TableShape) -> IndexPair {
        IndexPair(
            (self.0 % shape.r1 + shape.r1 - other.0 % shape.r1) % shape.r1,
            (self.1 % shape.r2 + shape.r2 - other.1 % shape.r2) % shape.r2,
        )
    }

    pub fn degree(self) -> usize {
        self.0 + self.1
    }
}

impl std::ops::Add for IndexPair {
    type Output = IndexPair;
    fn add(self, rhs: IndexPair) -> IndexPair {
        IndexPair(self.0 + rhs.0, self.1 + rhs.1)
    }
}

impl fmt::Display for IndexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

/// Accepts `i,j` or `(i,j)`.
impl std::str::FromStr for IndexPair {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LatticeError::ParseIndex(s.to_string());
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        Ok(IndexPair(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
    }
}

/// `s ⪯ n`, i.e. `n ∈ Σ_s`.
pub fn in_sigma(s: IndexPair, n: IndexPair) -> bool {
    s.precedes(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TableShape {
    pub r1: usize,
    pub r2: usize,
}

impl TableShape {
    pub fn new(r1: usize, r2: usize) -> Result<Self, LatticeError> {
        if r1 == 0 || r2 == 0 {
            return Err(LatticeError::InvalidShape(r1, r2));
        }
        Ok(TableShape { r1, r2 })
    }

    pub fn len(&self) -> usize {
        self.r1 * self.r2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest `t` with `t <= r_i / 2` for both dimensions.
    pub fn max_t(&self) -> usize {
        self.r1.min(self.r2) / 2
    }

    /// All indexes in row-major order.
    pub fn indices(&self) -> impl Iterator<Item = IndexPair> {
        let r2 = self.r2;
        (0..self.len()).map(move |k| IndexPair(k / r2, k % r2))
    }

    pub fn contains(&self, n: IndexPair) -> bool {
        n.0 < self.r1 && n.1 < self.r2
    }

    pub fn offset(&self, n: IndexPair) -> usize {
        n.0 * self.r2 + n.1
    }
}

/// The monomial orders used by the iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    /// Lexicographic with X1 > X2.
    Lex,
    /// Graded by total degree; inside a degree X2 > X1.
    Graded,
}

impl OrderKind {
    pub fn compare(self, n: IndexPair, m: IndexPair) -> Ordering {
        match self {
            OrderKind::Lex => (n.0, n.1).cmp(&(m.0, m.1)),
            // within a diagonal the larger n1 comes first
            OrderKind::Graded => (n.degree(), n.1).cmp(&(m.degree(), m.1)),
        }
    }

    pub fn less(self, n: IndexPair, m: IndexPair) -> bool {
        self.compare(n, m) == Ordering::Less
    }

    /// Next index in the iteration. The graded successor does not depend on
    /// the shape; the lexicographic one wraps the second coordinate at `r2`.
    pub fn successor(self, l: IndexPair, shape: TableShape) -> IndexPair {
        match self {
            OrderKind::Graded if l.0 > 0 => IndexPair(l.0 - 1, l.1 + 1),
            OrderKind::Graded => IndexPair(l.1 + 1, 0),
            OrderKind::Lex if l.1 + 1 < shape.r2 => IndexPair(l.0, l.1 + 1),
            OrderKind::Lex => IndexPair(l.0 + 1, 0),
        }
    }

    /// Sort ascending under this order.
    pub fn sorted(self, points: impl IntoIterator<Item = IndexPair>) -> Vec<IndexPair> {
        let mut v: Vec<IndexPair> = points.into_iter().collect();
        v.sort_by(|a, b| self.compare(*a, *b));
        v.dedup();
        v
    }

    /// Maximum of a nonempty set under this order.
    pub fn max(self, points: impl IntoIterator<Item = IndexPair>) -> Option<IndexPair> {
        points.into_iter().max_by(|a, b| self.compare(*a, *b))
    }

    pub fn name(self) -> &'static str {
        match self {
            OrderKind::Lex => "lex",
            OrderKind::Graded => "graded",
        }
    }
}

impl fmt::Display for OrderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Points of N x N with `(l1+1)(l2+1) <= delta`, minus `(delta-1, 0)` and
/// `(0, delta-1)`, in row-major order. No shape check.
pub fn hyperbolic_points(delta: usize) -> Vec<IndexPair> {
    let mut out = Vec::new();
    for l1 in 0..delta {
        for l2 in 0..delta {
            if (l1 + 1) * (l2 + 1) > delta {
                break;
            }
            let p = IndexPair(l1, l2);
            if p != IndexPair(delta - 1, 0) && p != IndexPair(0, delta - 1) {
                out.push(p);
            }
        }
    }
    out
}

/// The hyperbolic set `B(delta)` inside a table of the given shape.
pub fn hyperbolic_set(delta: usize, shape: TableShape) -> Result<Vec<IndexPair>, LatticeError> {
    let points = hyperbolic_points(delta);
    if points.iter().any(|p| !shape.contains(*p)) {
        return Err(LatticeError::DoesNotFit { delta, r1: shape.r1, r2: shape.r2 });
    }
    Ok(points)
}

/// Border indexes of `B(2t+1)`: those with `2t <= (l1+1)(l2+1)`.
pub fn border_set(t: usize) -> Result<Vec<IndexPair>, LatticeError> {
    if !(2..=4).contains(&t) {
        return Err(LatticeError::UnsupportedRegime(t));
    }
    Ok(hyperbolic_points(2 * t + 1)
        .into_iter()
        .filter(|&IndexPair(a, b)| 2 * t <= (a + 1) * (b + 1))
        .collect())
}

pub fn in_border(l: IndexPair, t: usize) -> bool {
    (2..=4).contains(&t)
        && hyperbolic_points(2 * t + 1).contains(&l)
        && 2 * t <= (l.0 + 1) * (l.1 + 1)
}

/// The iteration sequence over a set of indexes.
pub fn sorted_iteration(set: &[IndexPair], order: OrderKind) -> Vec<IndexPair> {
    order.sorted(set.iter().copied())
}
