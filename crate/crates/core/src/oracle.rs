//! Ground truth: syndrome tables of known sparse polynomials, seeded random
//! instances with hole masks, and exhaustive sweeps through the pipeline.

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gf::{Elem, Field};
use crate::inference::{resolve, ResolveConfig, Status};
use crate::lattice::{hyperbolic_points, in_border, IndexPair, TableShape};
use crate::poly::{EvaluationPoint, Poly};
use crate::table::{IncompleteTable, Placement};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("t = {t} does not fit a {r1}x{r2} table")]
    DoesNotFit { t: usize, r1: usize, r2: usize },
    #[error("cannot place {requested} holes outside a window of {window} cells in {cells} cells")]
    TooManyHoles { requested: usize, window: usize, cells: usize },
    #[error("hole {0} is not inside B(2t+1)")]
    HoleOutsideWindow(IndexPair),
    #[error("weight {weight} exceeds the {cells} available support points")]
    Weight { weight: usize, cells: usize },
}

/// `u_n = e(α^{τ+n})` at every index.
pub fn syndrome_table(e: &Poly, tau: IndexPair, point: &EvaluationPoint, field: &Field) -> IncompleteTable {
    IncompleteTable::from_fn(point.shape, |n| Some(point.evaluate(e, tau + n, field)))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum HoleSpec {
    #[default]
    None,
    /// Random holes outside a fully known window.
    Outside(usize),
    /// Holes at these window indexes (relative to the window offset).
    Window(Vec<IndexPair>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CoefficientSpace {
    /// Nonzero elements of the base field.
    #[default]
    Base,
    /// Nonzero elements of the extension.
    Extension,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleParams {
    pub t: usize,
    /// Exact weight; uniform in `1..=t` when `None`.
    pub weight: Option<usize>,
    pub coefficients: CoefficientSpace,
    pub holes: HoleSpec,
}

impl OracleParams {
    pub fn new(t: usize) -> Self {
        OracleParams { t, weight: None, coefficients: CoefficientSpace::Base, holes: HoleSpec::None }
    }

    pub fn weight(mut self, w: usize) -> Self {
        self.weight = Some(w);
        self
    }

    pub fn coefficients(mut self, c: CoefficientSpace) -> Self {
        self.coefficients = c;
        self
    }

    pub fn holes(mut self, h: HoleSpec) -> Self {
        self.holes = h;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleInstance {
    pub e: Poly,
    pub tau: IndexPair,
    pub point: EvaluationPoint,
    /// The complete syndrome table.
    pub table: IncompleteTable,
    /// Hyperbolic window the mask is built around.
    pub window: Placement,
    pub holes: Vec<IndexPair>,
}

impl OracleInstance {
    pub fn shape(&self) -> TableShape {
        self.point.shape
    }

    pub fn weight(&self) -> usize {
        self.e.len()
    }

    /// The table with the hole mask applied.
    pub fn punctured(&self) -> IncompleteTable {
        let mut t = self.table.clone();
        for &h in &self.holes {
            t.set(h, None);
        }
        t
    }

    /// Offset-absorbed generator for a working array at offset `tau`:
    /// coefficients `c_m α^{(τ_e + tau)·m}`.
    pub fn absorbed(&self, tau: IndexPair, field: &Field) -> Poly {
        let shift = self.tau + tau;
        Poly::from_terms(self.e.terms().map(|(m, c)| (m, field.mul(c, self.point.character(shift, m, field)))), field)
    }
}

fn random_coefficient(rng: &mut ChaCha8Rng, field: &Field, space: CoefficientSpace) -> Elem {
    match space {
        CoefficientSpace::Extension => field.gen_pow(rng.gen_range(0..field.units()) as i64),
        CoefficientSpace::Base => {
            let base: Vec<Elem> = field.elements().filter(|&x| !x.is_zero() && field.in_base_field(x)).collect();
            *base.choose(rng).expect("the base field has a unit")
        }
    }
}

/// Seeded random instance with support of size at most `t`.
pub fn random_instance(
    field: &Field,
    point: &EvaluationPoint,
    params: &OracleParams,
    seed: u64,
) -> Result<OracleInstance, OracleError> {
    let shape = point.shape;
    let t = params.t;
    let window = hyperbolic_points(2 * t + 1);
    if t == 0 || window.iter().any(|p| !shape.contains(*p)) {
        return Err(OracleError::DoesNotFit { t, r1: shape.r1, r2: shape.r2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weight = params.weight.unwrap_or_else(|| rng.gen_range(1..=t));
    if weight > shape.len() {
        return Err(OracleError::Weight { weight, cells: shape.len() });
    }
    let support = shape.indices().choose_multiple(&mut rng, weight);
    let e = Poly::from_terms(
        support.into_iter().map(|m| (m, random_coefficient(&mut rng, field, params.coefficients))),
        field,
    );
    let tau = IndexPair(rng.gen_range(0..shape.r1), rng.gen_range(0..shape.r2));
    let window_tau = IndexPair(rng.gen_range(0..shape.r1), rng.gen_range(0..shape.r2));
    let covered: Vec<IndexPair> = window.iter().map(|&n| (window_tau + n).wrap(shape)).collect();
    let holes = match &params.holes {
        HoleSpec::None => Vec::new(),
        HoleSpec::Outside(count) => {
            let free: Vec<IndexPair> = shape.indices().filter(|n| !covered.contains(n)).collect();
            if *count > free.len() {
                return Err(OracleError::TooManyHoles { requested: *count, window: covered.len(), cells: shape.len() });
            }
            let mut h = free.into_iter().choose_multiple(&mut rng, *count);
            h.sort();
            h
        }
        HoleSpec::Window(at) => {
            if let Some(bad) = at.iter().find(|p| !window.contains(p)) {
                return Err(OracleError::HoleOutsideWindow(*bad));
            }
            at.iter().map(|&n| (window_tau + n).wrap(shape)).collect()
        }
    };
    Ok(OracleInstance {
        table: syndrome_table(&e, tau, point, field),
        e,
        tau,
        point: *point,
        window: Placement { tau: window_tau, t },
        holes,
    })
}

/// A border index of `B(2t+1)` chosen at random (for puncturing tests).
pub fn random_border_index(t: usize, rng: &mut impl Rng) -> Option<IndexPair> {
    hyperbolic_points(2 * t + 1).into_iter().filter(|&n| in_border(n, t)).choose(rng)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepSpec {
    pub weight: usize,
    /// Coefficient values tried at every support point.
    pub coefficients: Vec<Elem>,
    /// Bound passed to the pipeline.
    pub t: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepSummary {
    pub instances: usize,
    pub completed: usize,
    /// Completed with the oracle's support.
    pub support_recovered: usize,
    /// Completed with the oracle's offset-absorbed coefficients.
    pub coefficients_recovered: usize,
    /// `|Δ| = ω(e) = |defining set|`.
    pub footprint_identity: usize,
    pub rejected: usize,
    /// First few disagreements.
    pub failures: Vec<String>,
}

/// Compare one pipeline run against the oracle. Returns
/// `(completed, support ok, coefficients ok, footprint identity ok)`.
pub fn check_instance(table: &IncompleteTable, e: &Poly, tau: IndexPair, point: &EvaluationPoint, field: &Field, config: &ResolveConfig) -> (Status, bool, bool, bool) {
    let report = resolve(table, point, field, config);
    if report.status != Status::Completed {
        return (report.status, false, false, false);
    }
    let placement = report.tau.expect("completed reports carry τ");
    let mut support: Vec<IndexPair> = e.support().collect();
    support.sort();
    let support_ok = report.support == support;
    let shift = tau + placement;
    let expected: Vec<String> =
        support.iter().map(|&m| field.format(field.mul(e.coeff(m), point.character(shift, m, field)))).collect();
    let coeff_ok = support_ok && report.coefficients == expected;
    let identity_ok = report.footprint.len() == e.len() && report.support.len() == report.footprint.len();
    (report.status, support_ok, coeff_ok, identity_ok)
}

/// Every support of the given weight, every coefficient tuple from the set and
/// every offset, through `resolve`.
pub fn exhaustive_sweep(point: &EvaluationPoint, field: &Field, spec: &SweepSpec) -> SweepSummary {
    let shape = point.shape;
    let config = ResolveConfig { t: Some(spec.t), ..ResolveConfig::default() };
    let cells: Vec<IndexPair> = shape.indices().collect();
    let mut summary = SweepSummary::default();
    for support in combinations(&cells, spec.weight) {
        for coeffs in tuples(&spec.coefficients, spec.weight) {
            let e = Poly::from_terms(support.iter().copied().zip(coeffs.iter().copied()), field);
            for tau in shape.indices() {
                let table = syndrome_table(&e, tau, point, field);
                let (status, s, c, fp) = check_instance(&table, &e, tau, point, field, &config);
                summary.instances += 1;
                if status == Status::Completed {
                    summary.completed += 1;
                } else {
                    summary.rejected += 1;
                }
                summary.support_recovered += s as usize;
                summary.coefficients_recovered += c as usize;
                summary.footprint_identity += fp as usize;
                if status == Status::Completed && !(s && c && fp) && summary.failures.len() < 5 {
                    summary.failures.push(format!("e={} tau={tau}", e.format(field)));
                }
            }
        }
    }
    summary
}

fn combinations(items: &[IndexPair], k: usize) -> Vec<Vec<IndexPair>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

fn tuples(values: &[Elem], k: usize) -> Vec<Vec<Elem>> {
    (0..k).fold(vec![Vec::new()], |acc, _| {
        acc.into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}
