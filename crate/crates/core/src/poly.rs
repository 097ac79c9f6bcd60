//! Sparse bivariate polynomials over the extension field, the linear recurring
//! relation `f[U]_n` they induce on doubly periodic arrays, and the S-polynomial
//! reduction test used for the Groebner closure check.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::gf::{Elem, Field, FieldError};
use crate::lattice::{IndexPair, OrderKind, TableShape};

/// Read access to a doubly periodic array; indexes are reduced mod the shape.
pub trait CellSource {
    fn shape(&self) -> TableShape;
    fn cell(&self, n: IndexPair) -> Option<Elem>;
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("recurrence needs the unknown cell {0}")]
pub struct NeededCellUnknown(pub IndexPair);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("the zero polynomial has no leading power")]
    ZeroPolynomial,
    #[error("cannot parse polynomial term `{0}`")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// `Σ c_m X1^m1 X2^m2` with no zero coefficients stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<IndexPair, Elem>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::monomial(IndexPair::ORIGIN, Elem::ONE)
    }

    pub fn monomial(exp: IndexPair, c: Elem) -> Self {
        let mut p = Poly::zero();
        p.set(exp, c);
        p
    }

    /// `X^exp`.
    pub fn x(exp: IndexPair) -> Self {
        Poly::monomial(exp, Elem::ONE)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (IndexPair, Elem)>, field: &Field) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            let cur = p.coeff(m);
            p.set(m, field.add(cur, c));
        }
        p
    }

    /// `X1^r1 - 1` or `X2^r2 - 1` style binomials: `X^exp - 1`.
    pub fn x_minus_one(exp: IndexPair, field: &Field) -> Self {
        Poly::from_terms([(exp, Elem::ONE), (IndexPair::ORIGIN, field.neg(Elem::ONE))], field)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: IndexPair) -> Elem {
        self.terms.get(&m).copied().unwrap_or(Elem::Zero)
    }

    pub fn set(&mut self, m: IndexPair, c: Elem) {
        if c.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (IndexPair, Elem)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, *c))
    }

    pub fn support(&self) -> impl Iterator<Item = IndexPair> + '_ {
        self.terms.keys().copied()
    }

    pub fn leading_power(&self, order: OrderKind) -> Result<IndexPair, PolyError> {
        order.max(self.support()).ok_or(PolyError::ZeroPolynomial)
    }

    pub fn leading_coeff(&self, order: OrderKind) -> Elem {
        self.leading_power(order).map(|s| self.coeff(s)).unwrap_or(Elem::Zero)
    }

    pub fn add(&self, other: &Poly, field: &Field) -> Poly {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.set(m, field.add(out.coeff(m), c));
        }
        out
    }

    pub fn sub(&self, other: &Poly, field: &Field) -> Poly {
        self.add(&other.scale(field.neg(Elem::ONE), field), field)
    }

    pub fn scale(&self, c: Elem, field: &Field) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, a)| (*m, field.mul(*a, c))).collect() }
    }

    /// Multiply by the monomial `X^by`.
    pub fn shift(&self, by: IndexPair) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, a)| (*m + by, *a)).collect() }
    }

    pub fn mul(&self, other: &Poly, field: &Field) -> Poly {
        let mut out = Poly::zero();
        for (m, a) in self.terms() {
            for (n, b) in other.terms() {
                let k = m + n;
                out.set(k, field.add(out.coeff(k), field.mul(a, b)));
            }
        }
        out
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self, order: OrderKind, field: &Field) -> Poly {
        match self.leading_coeff(order) {
            Elem::Zero => Poly::zero(),
            lc => self.scale(field.inv(lc).expect("nonzero"), field),
        }
    }

    pub fn evaluate(&self, x: Elem, y: Elem, field: &Field) -> Elem {
        self.terms().fold(Elem::Zero, |acc, (m, c)| {
            let term = field.mul(c, field.mul(field.pow(x, m.0 as i64), field.pow(y, m.1 as i64)));
            field.add(acc, term)
        })
    }

    /// Text form: `+`-separated `c*X1^i*X2^j` terms, highest row-major exponent first.
    pub fn format(&self, field: &Field) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let terms: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| {
                let mut factors = Vec::new();
                if *c != Elem::ONE || *m == IndexPair::ORIGIN {
                    factors.push(field.format(*c));
                }
                for (name, e) in [("X1", m.0), ("X2", m.1)] {
                    match e {
                        0 => {}
                        1 => factors.push(name.to_string()),
                        _ => factors.push(format!("{name}^{e}")),
                    }
                }
                factors.join("*")
            })
            .collect();
        terms.join(" + ")
    }

    /// Parse the text form produced by [`Poly::format`]. Repeated monomials add up.
    pub fn parse(text: &str, field: &Field) -> Result<Poly, PolyError> {
        let t = text.trim();
        if t == "0" {
            return Ok(Poly::zero());
        }
        let mut out = Poly::zero();
        for raw in t.split('+') {
            let term = raw.trim();
            if term.is_empty() {
                return Err(PolyError::Parse(raw.to_string()));
            }
            let mut coeff = Elem::ONE;
            let mut exp = IndexPair::ORIGIN;
            for factor in term.split('*') {
                let factor = factor.trim();
                let var = if let Some(rest) = factor.strip_prefix("X1") {
                    Some((0, rest))
                } else {
                    factor.strip_prefix("X2").map(|rest| (1, rest))
                };
                match var {
                    Some((which, rest)) => {
                        let e = if rest.is_empty() {
                            1
                        } else {
                            rest.strip_prefix('^')
                                .and_then(|d| d.parse::<usize>().ok())
                                .ok_or_else(|| PolyError::Parse(term.to_string()))?
                        };
                        if which == 0 {
                            exp.0 += e;
                        } else {
                            exp.1 += e;
                        }
                    }
                    None => coeff = field.mul(coeff, field.parse(factor)?),
                }
            }
            out.set(exp, field.add(out.coeff(exp), coeff));
        }
        Ok(out)
    }
}

/// `f[U]_n` for a polynomial with known leading power `s`: `Σ f_m u_{m+n-s}`
/// when `s ⪯ n`, zero otherwise. Cells are read modulo the array shape.
pub fn recurrence_with_lp(
    f: &Poly,
    s: IndexPair,
    u: &impl CellSource,
    n: IndexPair,
    field: &Field,
) -> Result<Elem, NeededCellUnknown> {
    let Some(shift) = n.checked_sub(s) else {
        return Ok(Elem::Zero);
    };
    let shape = u.shape();
    let mut acc = Elem::Zero;
    for (m, c) in f.terms() {
        let at = (m + shift).wrap(shape);
        let value = u.cell(at).ok_or(NeededCellUnknown(at))?;
        acc = field.add(acc, field.mul(c, value));
    }
    Ok(acc)
}

pub fn recurrence_value(
    f: &Poly,
    u: &impl CellSource,
    n: IndexPair,
    order: OrderKind,
    field: &Field,
) -> Result<Elem, NeededCellUnknown> {
    match f.leading_power(order) {
        Ok(s) => recurrence_with_lp(f, s, u, n, field),
        Err(_) => Ok(Elem::Zero),
    }
}

/// Whether `f` generates the prefix `u^l`: `f[U]_k = 0` for every `k` in the
/// table with `LP(f) ⪯ k` and `k <_T l`.
pub fn generates_prefix(
    f: &Poly,
    u: &impl CellSource,
    l: IndexPair,
    order: OrderKind,
    field: &Field,
) -> Result<bool, NeededCellUnknown> {
    let Ok(s) = f.leading_power(order) else {
        return Ok(true);
    };
    for k in u.shape().indices() {
        if s.precedes(k) && order.less(k, l) && !recurrence_with_lp(f, s, u, k, field)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A pair of roots of unity `(α1, α2)` of orders `(r1, r2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvaluationPoint {
    pub alpha1: Elem,
    pub alpha2: Elem,
    pub shape: TableShape,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PointError {
    #[error("alpha{index} = {value:?} has order {found:?}, expected {expected}")]
    WrongOrder { index: u8, value: Elem, found: Option<u32>, expected: usize },
    #[error("gcd(q, r1*r2) != 1: the characteristic {p} divides {r1}*{r2}")]
    NotSemisimple { p: u32, r1: usize, r2: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

impl EvaluationPoint {
    pub fn new(field: &Field, alpha1: Elem, alpha2: Elem, shape: TableShape) -> Result<Self, PointError> {
        let p = field.characteristic() as usize;
        if shape.r1.is_multiple_of(p) || shape.r2.is_multiple_of(p) {
            return Err(PointError::NotSemisimple { p: p as u32, r1: shape.r1, r2: shape.r2 });
        }
        for (index, value, expected) in [(1, alpha1, shape.r1), (2, alpha2, shape.r2)] {
            let found = field.order_of(value);
            if found != Some(expected as u32) {
                return Err(PointError::WrongOrder { index, value, found, expected });
            }
        }
        Ok(EvaluationPoint { alpha1, alpha2, shape })
    }

    /// `α_i = a^{k_i}` for explicit exponents on the generator.
    pub fn from_exponents(field: &Field, k1: u32, k2: u32, shape: TableShape) -> Result<Self, PointError> {
        Self::new(field, field.gen_pow(k1 as i64), field.gen_pow(k2 as i64), shape)
    }

    /// The deterministic choice `α_i = a^{(|L|-1)/r_i}`.
    pub fn standard(field: &Field, shape: TableShape) -> Result<Self, PointError> {
        let a1 = field.root_of_unity(shape.r1 as u32)?;
        let a2 = field.root_of_unity(shape.r2 as u32)?;
        Self::new(field, a1, a2, shape)
    }

    /// `α^m = (α1^m1, α2^m2)`.
    pub fn power(&self, m: IndexPair, field: &Field) -> (Elem, Elem) {
        (field.pow(self.alpha1, m.0 as i64), field.pow(self.alpha2, m.1 as i64))
    }

    /// `α^{n·m} = α1^{n1 m1} α2^{n2 m2}`, the character value used by syndromes.
    pub fn character(&self, n: IndexPair, m: IndexPair, field: &Field) -> Elem {
        let e1 = ((n.0 % self.shape.r1) * (m.0 % self.shape.r1)) as i64;
        let e2 = ((n.1 % self.shape.r2) * (m.1 % self.shape.r2)) as i64;
        field.mul(field.pow(self.alpha1, e1), field.pow(self.alpha2, e2))
    }

    pub fn evaluate(&self, f: &Poly, n: IndexPair, field: &Field) -> Elem {
        let (x, y) = self.power(n, field);
        f.evaluate(x, y, field)
    }

    pub fn exponents(&self) -> (u32, u32) {
        (self.alpha1.log().unwrap_or(0), self.alpha2.log().unwrap_or(0))
    }
}

/// S-polynomial of two nonzero polynomials.
pub fn s_polynomial(f: &Poly, g: &Poly, order: OrderKind, field: &Field) -> Poly {
    let sf = f.leading_power(order).expect("nonzero");
    let sg = g.leading_power(order).expect("nonzero");
    let lcm = IndexPair(sf.0.max(sg.0), sf.1.max(sg.1));
    let a = f.shift(lcm.checked_sub(sf).unwrap()).monic(order, field);
    let b = g.shift(lcm.checked_sub(sg).unwrap()).monic(order, field);
    a.sub(&b, field)
}

/// Remainder of multivariate division. Divisors are tried in descending
/// leading-power order; the first one whose leading power divides wins.
pub fn reduce(p: &Poly, divisors: &[Poly], order: OrderKind, field: &Field) -> Poly {
    let mut divs: Vec<(IndexPair, Elem, &Poly)> = divisors
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| {
            let s = g.leading_power(order).unwrap();
            (s, g.coeff(s), g)
        })
        .collect();
    divs.sort_by(|a, b| order.compare(b.0, a.0));

    let mut rest = p.clone();
    let mut remainder = Poly::zero();
    while let Ok(lt) = rest.leading_power(order) {
        let lc = rest.coeff(lt);
        match divs.iter().find(|(s, _, _)| s.precedes(lt)) {
            Some((s, gc, g)) => {
                let factor = field.div(lc, *gc).expect("nonzero leading coefficient");
                let q = g.shift(lt.checked_sub(*s).unwrap()).scale(factor, field);
                rest = rest.sub(&q, field);
            }
            None => {
                remainder.set(lt, lc);
                rest.set(lt, Elem::Zero);
            }
        }
    }
    remainder
}

/// Buchberger's criterion: every S-polynomial of a pair reduces to zero.
pub fn buchberger_reduces(set: &[Poly], order: OrderKind, field: &Field) -> bool {
    let polys: Vec<&Poly> = set.iter().filter(|p| !p.is_zero()).collect();
    for i in 0..polys.len() {
        for j in (i + 1)..polys.len() {
            let s = s_polynomial(polys[i], polys[j], order, field);
            if !reduce(&s, set, order, field).is_zero() {
                return false;
            }
        }
    }
    true
}

pub struct DisplayPoly<'a> {
    poly: &'a Poly,
    field: &'a Field,
}

impl fmt::Display for DisplayPoly<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.poly.format(self.field))
    }
}

impl Poly {
    pub fn display<'a>(&'a self, field: &'a Field) -> DisplayPoly<'a> {
        DisplayPoly { poly: self, field }
    }
}
