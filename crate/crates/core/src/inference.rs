//! Unknown cells met during the iteration: direct estimation, the exceptional
//! border configurations with their branch polynomials, the branch search and
//! the end-to-end completion driver.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bms::{closure_check, hyperbolic_schedule, run_from, BmsOutcome, BmsState, MinimalPoly};
use crate::gf::{Elem, Field};
use crate::lattice::{hyperbolic_points, hyperbolic_set, in_border, IndexPair, OrderKind};
use crate::poly::{recurrence_with_lp, CellSource, EvaluationPoint, NeededCellUnknown, Poly};
use crate::recovery::{defining_set, descend_to_base, solve_coefficients, verify_afforded, SparseGenerator};
use crate::table::{complete_table, detect_hyperbolic, extract_working, IncompleteTable, Placement, WorkingArray};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum HoleClassification {
    /// Indexes into `F_l` of the polynomials with `LP(f) ⪯ l`.
    Direct { witnesses: Vec<usize> },
    /// Configurations 1 to 6 for holes off both axes.
    InteriorCase(u8),
    /// Configurations 1 (`l = (0, 2t-1)`) and 2 (`l = (2t-1, 0)`).
    AxisCase(u8),
    /// Inside `B(2t+1)` but not a border index.
    OffBorder,
}

impl HoleClassification {
    pub fn is_exceptional(&self) -> bool {
        matches!(self, HoleClassification::InteriorCase(_) | HoleClassification::AxisCase(_))
    }

    /// `(F index, G index)` of each branch polynomial `f - (b/v) g`.
    pub fn references(&self) -> &'static [(usize, usize)] {
        match self {
            HoleClassification::InteriorCase(1 | 3) | HoleClassification::AxisCase(1) => &[(1, 0)],
            HoleClassification::InteriorCase(2 | 4) | HoleClassification::AxisCase(2) => &[(0, 0)],
            HoleClassification::InteriorCase(5) => &[(1, 1), (2, 0)],
            HoleClassification::InteriorCase(6) => &[(0, 1), (1, 0)],
            _ => &[],
        }
    }
}

impl fmt::Display for HoleClassification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HoleClassification::Direct { .. } => f.write_str("direct"),
            HoleClassification::InteriorCase(k) => write!(f, "interior case {k}"),
            HoleClassification::AxisCase(k) => write!(f, "axis case {k}"),
            HoleClassification::OffBorder => f.write_str("off border"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InferenceError {
    #[error("{0} has no branch polynomials")]
    NotExceptional(String),
    #[error("expected {expected} branch parameters, got {found}")]
    Parameters { expected: usize, found: usize },
    #[error("configuration needs F[{poly}] and G[{aux}], which the state does not have")]
    MissingReference { poly: usize, aux: usize },
    #[error("auxiliary span does not reach {0}")]
    Misaligned(IndexPair),
}

/// Route a hole at `l` to direct estimation or to one of the exceptional
/// configurations, from the state reached just before `l`.
pub fn classify_hole(l: IndexPair, state: &BmsState, t: usize) -> HoleClassification {
    if !in_border(l, t) {
        return HoleClassification::OffBorder;
    }
    let s = state.defining_points();
    let d = s.len();
    let p = IndexPair;
    let case = if l.0 != 0 && l.1 != 0 {
        let interior = if d == 2 && s[0].0 == t && s[1].1 == 1 && l.1 == 1 && state.order() == OrderKind::Graded {
            Some(1)
        } else if d == 2 && s[0].0 == 1 && l.0 == 1 && s[1].1 == t && state.order() == OrderKind::Lex {
            Some(2)
        } else if d == 2 && s[0] == p(2, 0) && s[1] == p(0, 2) && l == p(1, 3) {
            Some(3)
        } else if d == 2 && s[0] == p(2, 0) && s[1] == p(0, 2) && l == p(3, 1) {
            Some(4)
        } else if d == 3 && s[0] == p(2, 0) && s[2] == p(0, t - 1) && l == p(1, t - 1) {
            Some(5)
        } else if d == 3 && s[0] == p(t - 1, 0) && s[2] == p(0, 2) && l == p(t - 1, 1) {
            Some(6)
        } else {
            None
        };
        interior.map(HoleClassification::InteriorCase)
    } else if l == p(0, 2 * t - 1) && d == 2 && s[1].1 == t {
        Some(HoleClassification::AxisCase(1))
    } else if l == p(2 * t - 1, 0) && d == 2 && s[0].0 == t {
        Some(HoleClassification::AxisCase(2))
    } else {
        None
    };
    case.unwrap_or_else(|| HoleClassification::Direct {
        witnesses: (0..d).filter(|&i| s[i].precedes(l)).collect(),
    })
}

/// `(f_s, Σ_{m≠s} f_m u_{m+l-s})`: the recurrence at `l` split into the
/// coefficient of `u_l` and the rest.
pub fn split_at_hole(
    f: &Poly,
    s: IndexPair,
    u: &impl CellSource,
    l: IndexPair,
    field: &Field,
) -> Result<(Elem, Elem), NeededCellUnknown> {
    let shift = l.checked_sub(s).expect("LP(f) ⪯ l");
    let shape = u.shape();
    let mut rest = Elem::Zero;
    for (m, c) in f.terms().filter(|(m, _)| *m != s) {
        let at = (m + shift).wrap(shape);
        let v = u.cell(at).ok_or(NeededCellUnknown(at))?;
        rest = field.add(rest, field.mul(c, v));
    }
    Ok((f.coeff(s), rest))
}

/// The value of `u_l` making `f[U]_l = 0`.
pub fn infer_direct(
    f: &Poly,
    s: IndexPair,
    u: &impl CellSource,
    l: IndexPair,
    field: &Field,
) -> Result<Elem, NeededCellUnknown> {
    let (lead, rest) = split_at_hole(f, s, u, l, field)?;
    Ok(field.neg(field.div(rest, lead).expect("leading coefficient is nonzero")))
}

/// The value of `u_l` making `f[U]_l = b`.
pub fn implied_hole_value(
    f: &Poly,
    s: IndexPair,
    u: &impl CellSource,
    l: IndexPair,
    b: Elem,
    field: &Field,
) -> Result<Elem, NeededCellUnknown> {
    let (lead, rest) = split_at_hole(f, s, u, l, field)?;
    Ok(field.div(field.sub(b, rest), lead).expect("leading coefficient is nonzero"))
}

/// The branch polynomials `h = f^(i) - (b / v_j) g^(j)` of an exceptional
/// configuration, one per parameter. Returned with the index of the `F`
/// element each one replaces.
pub fn construct_branch_polys(
    case: &HoleClassification,
    state: &BmsState,
    l: IndexPair,
    params: &[Elem],
    field: &Field,
) -> Result<Vec<(usize, Poly)>, InferenceError> {
    let refs = case.references();
    if refs.is_empty() {
        return Err(InferenceError::NotExceptional(case.to_string()));
    }
    if refs.len() != params.len() {
        return Err(InferenceError::Parameters { expected: refs.len(), found: params.len() });
    }
    refs.iter()
        .zip(params)
        .map(|(&(fi, gi), &b)| {
            let (Some(f), Some(g)) = (state.polys().get(fi), state.aux().get(gi)) else {
                return Err(InferenceError::MissingReference { poly: fi, aux: gi });
            };
            // zero in every configuration; kept general so the discrepancies align at l
            let shift = (f.lp + g.span()).checked_sub(l).ok_or(InferenceError::Misaligned(l))?;
            let factor = field.div(b, g.discrepancy).expect("auxiliary discrepancy is nonzero");
            Ok((fi, f.poly.sub(&g.poly.shift(shift).scale(factor, field), field)))
        })
        .collect()
}

/// The nonzero-syndrome condition for the lexicographic run:
/// `u_{(0,j)} ≠ 0` for some `j < t`.
pub fn lex_hypothesis(u: &impl CellSource, t: usize) -> bool {
    (0..t).any(|j| u.cell(IndexPair(0, j)).is_some_and(|v| !v.is_zero()))
}

/// The graded counterpart: `u_{(i,j)} ≠ 0` for some `i + j = t`.
pub fn graded_hypothesis(u: &impl CellSource, t: usize) -> bool {
    (0..=t).any(|i| u.cell(IndexPair(i, t - i).wrap(u.shape())).is_some_and(|v| !v.is_zero()))
}

/// Orders to try in auto mode, preferred first.
pub fn auto_orders(u: &impl CellSource, t: usize) -> Vec<OrderKind> {
    if !lex_hypothesis(u, t) && graded_hypothesis(u, t) {
        vec![OrderKind::Graded, OrderKind::Lex]
    } else {
        vec![OrderKind::Lex, OrderKind::Graded]
    }
}

/// Why a candidate was turned down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    FootprintOverflow,
    NotClosed,
    DefiningSetMismatch,
    InconsistentSystem,
    NotAfforded,
    BranchInconsistent,
    EngineInvariant,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rejection::FootprintOverflow => "footprint exceeds t",
            Rejection::NotClosed => "basis is not closed under the period binomials",
            Rejection::DefiningSetMismatch => "defining set size differs from footprint size",
            Rejection::InconsistentSystem => "coefficient system has no solution",
            Rejection::NotAfforded => "candidate does not reproduce the known cells",
            Rejection::BranchInconsistent => "branch polynomial does not vanish at the hole",
            Rejection::EngineInvariant => "iteration invariant violated",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Verified(SparseGenerator),
    Rejected(Rejection),
    Unsupported(String),
}

/// One parameter choice at an exceptional hole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateBranch {
    pub hole: IndexPair,
    pub case: HoleClassification,
    pub b: Elem,
    pub c: Option<Elem>,
    pub hole_value: Elem,
    pub branch_polys: Vec<Poly>,
    /// State right after the hole, with the branch polynomials installed.
    pub start_state: BmsState,
    /// State at the end of the run (first leaf of the subtree).
    pub final_state: Option<BmsState>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
struct Leaf {
    verdict: Verdict,
    state: Option<BmsState>,
    work: WorkingArray,
}

/// Depth-first search over hole estimates for one placement and order.
struct Search<'a> {
    field: &'a Field,
    point: &'a EvaluationPoint,
    t: usize,
    points: Vec<IndexPair>,
    budget: usize,
    leaves: Vec<Leaf>,
    branches: Vec<CandidateBranch>,
    holes: Vec<(IndexPair, HoleClassification)>,
    exceeded: bool,
}

impl Search<'_> {
    fn explore(&mut self, state: BmsState, work: WorkingArray, start: usize) -> Vec<usize> {
        if self.exceeded {
            return Vec::new();
        }
        let outcome = run_from(state, &self.points, start, &work, self.field, Some(self.t));
        let (verdict, state) = match outcome {
            BmsOutcome::Basis(s) => (self.finish(&s, &work), Some(s)),
            BmsOutcome::FootprintOverflow { .. } => (Verdict::Rejected(Rejection::FootprintOverflow), None),
            BmsOutcome::NotClosed(s) => (Verdict::Rejected(Rejection::NotClosed), Some(s)),
            BmsOutcome::Invariant { .. } => (Verdict::Rejected(Rejection::EngineInvariant), None),
            BmsOutcome::MissingCell { at, cell } => {
                (Verdict::Unsupported(format!("cell {cell} needed at step {at} is unknown")), None)
            }
            BmsOutcome::HoleEncountered { at, index, state } => {
                return self.branch_at(at, index, state, work);
            }
        };
        self.push_leaf(Leaf { verdict, state, work })
    }

    fn push_leaf(&mut self, leaf: Leaf) -> Vec<usize> {
        if self.leaves.len() >= self.budget {
            self.exceeded = true;
            return Vec::new();
        }
        self.leaves.push(leaf);
        vec![self.leaves.len() - 1]
    }

    fn unsupported(&mut self, work: WorkingArray, why: String) -> Vec<usize> {
        self.push_leaf(Leaf { verdict: Verdict::Unsupported(why), state: None, work })
    }

    fn branch_at(
        &mut self,
        l: IndexPair,
        index: usize,
        state: BmsState,
        work: WorkingArray,
    ) -> Vec<usize> {
        let case = classify_hole(l, &state, self.t);
        self.holes.push((l, case.clone()));
        match &case {
            HoleClassification::OffBorder => self.unsupported(work, format!("hole at {l} is not a border index")),
            HoleClassification::Direct { witnesses } => {
                let mut values: Vec<Elem> = Vec::new();
                for &i in witnesses {
                    let mp = &state.polys()[i];
                    if let Ok(v) = infer_direct(&mp.poly, mp.lp, &work, l, self.field) {
                        if !values.contains(&v) {
                            values.push(v);
                        }
                    }
                }
                if values.is_empty() {
                    return self.unsupported(work, format!("no witness at {l} has its other cells known"));
                }
                let mut out = Vec::new();
                for v in values {
                    let mut w = work.clone();
                    w.fill(l, v);
                    out.extend(self.explore(state.clone(), w, index));
                }
                out
            }
            _ => self.exceptional(l, index, state, work, case),
        }
    }

    fn exceptional(
        &mut self,
        l: IndexPair,
        index: usize,
        state: BmsState,
        work: WorkingArray,
        case: HoleClassification,
    ) -> Vec<usize> {
        let field = self.field;
        let elems: Vec<Elem> = field.elements().collect();
        let refs = case.references();
        let combos: Vec<Vec<Elem>> = if refs.len() == 1 {
            elems.iter().map(|&b| vec![b]).collect()
        } else {
            elems.iter().flat_map(|&b| elems.iter().map(move |&c| vec![b, c])).collect()
        };
        if self.leaves.len() + combos.len() > self.budget {
            self.exceeded = true;
            return Vec::new();
        }
        let (fi, _) = refs[0];
        let primary = state.polys()[fi].clone();
        let mut out = Vec::new();
        for params in combos {
            let hole_value = match implied_hole_value(&primary.poly, primary.lp, &work, l, params[0], field) {
                Ok(v) => v,
                Err(e) => return self.unsupported(work, format!("cell {} needed at hole {l} is unknown", e.0)),
            };
            let hs = match construct_branch_polys(&case, &state, l, &params, field) {
                Ok(hs) => hs,
                Err(e) => return self.unsupported(work, e.to_string()),
            };
            let mut polys: Vec<MinimalPoly> = state.polys().to_vec();
            for (i, h) in &hs {
                polys[*i] = MinimalPoly { poly: h.clone(), lp: polys[*i].lp };
            }
            let start_state = state.with_polys(polys);
            let mut w = work.clone();
            w.fill(l, hole_value);
            // every h must vanish at l once the hole holds the value implied by b
            let consistent = hs.iter().all(|(i, h)| {
                recurrence_with_lp(h, start_state.polys()[*i].lp, &w, l, field).is_ok_and(|d| d.is_zero())
            });
            let leaves = if consistent {
                self.explore(start_state.clone(), w, index)
            } else {
                self.push_leaf(Leaf { verdict: Verdict::Rejected(Rejection::BranchInconsistent), state: None, work: w })
            };
            let first = leaves
                .iter()
                .find(|&&i| matches!(self.leaves[i].verdict, Verdict::Verified(_)))
                .or(leaves.first())
                .map(|&i| self.leaves[i].clone());
            self.branches.push(CandidateBranch {
                hole: l,
                case: case.clone(),
                b: params[0],
                c: params.get(1).copied(),
                hole_value,
                branch_polys: hs.into_iter().map(|(_, h)| h).collect(),
                start_state,
                final_state: first.as_ref().and_then(|leaf| leaf.state.clone()),
                verdict: first.map_or_else(|| Verdict::Unsupported("branch budget exhausted".into()), |leaf| leaf.verdict),
            });
            out.extend(leaves);
        }
        out
    }

    fn finish(&self, state: &BmsState, work: &WorkingArray) -> Verdict {
        let field = self.field;
        let shape = work.shape();
        let basis = state.basis();
        if !closure_check(&basis, shape, state.order(), field) {
            return Verdict::Rejected(Rejection::NotClosed);
        }
        let support = defining_set(&basis, self.point, field);
        if support.len() != state.footprint().size() {
            return Verdict::Rejected(Rejection::DefiningSetMismatch);
        }
        let Ok(generator) = solve_coefficients(&support, work, &self.points, self.point, field) else {
            return Verdict::Rejected(Rejection::InconsistentSystem);
        };
        if !verify_afforded(work.as_table(), &generator, IndexPair::ORIGIN, self.point, field) {
            return Verdict::Rejected(Rejection::NotAfforded);
        }
        Verdict::Verified(generator)
    }
}

/// Result of the search at one placement and order.
#[derive(Clone, Debug)]
pub struct AttemptResult {
    pub tau: IndexPair,
    pub t: usize,
    pub order: OrderKind,
    pub status: Status,
    pub rejection: Option<Rejection>,
    /// Distinct verified generators with the state and filled array that produced them.
    pub verified: Vec<(SparseGenerator, BmsState, WorkingArray)>,
    /// State of the first leaf (for reporting failures).
    pub state: Option<BmsState>,
    pub holes: Vec<(IndexPair, HoleClassification)>,
    pub branches: Vec<CandidateBranch>,
    pub branches_tried: usize,
    pub unsupported: Vec<String>,
}

/// Run the iteration over `τ + B(2t+1)` with hole handling and verification.
pub fn run_attempt(
    table: &IncompleteTable,
    placement: Placement,
    order: OrderKind,
    point: &EvaluationPoint,
    field: &Field,
    budget: usize,
) -> AttemptResult {
    let Placement { tau, t } = placement;
    let shape = table.shape();
    let work = extract_working(table, tau);
    let points = hyperbolic_schedule(t, order, shape).unwrap_or_default();
    let mut search = Search {
        field,
        point,
        t,
        points,
        budget: budget.max(1),
        leaves: Vec::new(),
        branches: Vec::new(),
        holes: Vec::new(),
        exceeded: false,
    };
    search.explore(BmsState::new(order), work, 0);

    let mut verified: Vec<(SparseGenerator, BmsState, WorkingArray)> = Vec::new();
    let mut unsupported = Vec::new();
    let mut rejections = Vec::new();
    for leaf in &search.leaves {
        match &leaf.verdict {
            Verdict::Verified(g) => {
                if !verified.iter().any(|(h, _, _)| h == g) {
                    verified.push((g.clone(), leaf.state.clone().expect("verified leaves carry a state"), leaf.work.clone()));
                }
            }
            Verdict::Rejected(r) => rejections.push(*r),
            Verdict::Unsupported(why) => unsupported.push(why.clone()),
        }
    }
    let (status, rejection) = if search.exceeded {
        (Status::BranchBudgetExceeded, None)
    } else if verified.len() == 1 {
        (Status::Completed, None)
    } else if verified.len() > 1 {
        (Status::Ambiguous, None)
    } else if !unsupported.is_empty() {
        (Status::Unsupported, None)
    } else if !rejections.is_empty() && rejections.iter().all(|r| *r == Rejection::FootprintOverflow) {
        (Status::FootprintOverflow, Some(Rejection::FootprintOverflow))
    } else {
        let first = rejections.iter().copied().find(|r| *r != Rejection::FootprintOverflow);
        (Status::NotSyndrome, first)
    };
    AttemptResult {
        tau,
        t,
        order,
        status,
        rejection,
        verified,
        state: search.leaves.first().and_then(|l| l.state.clone()),
        holes: search.holes,
        branches_tried: search.leaves.len(),
        branches: search.branches,
        unsupported,
    }
}

/// Branches spawned by the first exceptional hole of a run at `placement`.
pub fn enumerate_branches(
    table: &IncompleteTable,
    placement: Placement,
    order: OrderKind,
    point: &EvaluationPoint,
    field: &Field,
    budget: usize,
) -> Vec<CandidateBranch> {
    let attempt = run_attempt(table, placement, order, point, field, budget);
    let first = attempt.branches.first().map(|b| b.hole);
    attempt.branches.into_iter().filter(|b| Some(b.hole) == first).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderMode {
    Lex,
    Graded,
    #[default]
    Auto,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolveConfig {
    pub order: OrderMode,
    pub tau: Option<IndexPair>,
    pub t: Option<usize>,
    /// Total leaves per placement and order; `None` means `|L|^2`.
    pub branch_budget: Option<usize>,
    /// Holes tolerated inside a window (all must be border indexes).
    pub max_window_holes: usize,
    pub max_attempts: usize,
}

impl Default for ResolveConfig {
    fn default() -> Self {
        ResolveConfig {
            order: OrderMode::Auto,
            tau: None,
            t: None,
            branch_budget: None,
            max_window_holes: 2,
            max_attempts: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Completed,
    NotSyndrome,
    FootprintOverflow,
    Ambiguous,
    BranchBudgetExceeded,
    /// A needed cell could not be estimated (off-border hole, or a cell outside
    /// the window).
    Unsupported,
    /// No window of any supported size is usable.
    NoPlacement,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Completed => 0,
            Status::NotSyndrome | Status::FootprintOverflow | Status::NoPlacement => 1,
            Status::Ambiguous | Status::BranchBudgetExceeded | Status::Unsupported => 3,
        }
    }

    fn is_definite(self) -> bool {
        matches!(self, Status::NotSyndrome | Status::FootprintOverflow)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentReport {
    pub tau: IndexPair,
    pub coefficients: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionReport {
    pub status: Status,
    pub tau: Option<IndexPair>,
    pub t: Option<usize>,
    pub order: Option<OrderKind>,
    pub basis: Vec<String>,
    pub footprint: Vec<IndexPair>,
    pub support: Vec<IndexPair>,
    pub coefficients: Vec<String>,
    /// `e'` as text, with `h_n = e'(α^{n-τ})`.
    pub generator: Option<String>,
    pub descent: Option<DescentReport>,
    /// Row-major; holes that stay unknown are `*`.
    pub completed_table: Vec<String>,
    pub filled: Vec<(IndexPair, String)>,
    pub alternatives: Vec<String>,
    pub branches_tried: usize,
    pub rejection: Option<Rejection>,
    pub warnings: Vec<String>,
    /// One line per placement and order tried.
    pub attempts: Vec<String>,
}

impl CompletionReport {
    fn empty(status: Status) -> Self {
        CompletionReport {
            status,
            tau: None,
            t: None,
            order: None,
            basis: Vec::new(),
            footprint: Vec::new(),
            support: Vec::new(),
            coefficients: Vec::new(),
            generator: None,
            descent: None,
            completed_table: Vec::new(),
            filled: Vec::new(),
            alternatives: Vec::new(),
            branches_tried: 0,
            rejection: None,
            warnings: Vec::new(),
            attempts: Vec::new(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    /// One-line summary.
    pub fn summary(&self) -> String {
        let mut s = format!("status={}", self.status);
        if let (Some(tau), Some(t), Some(order)) = (self.tau, self.t, self.order) {
            s += &format!(" tau={tau} t={t} order={order}");
        }
        if let Some(g) = &self.generator {
            s += &format!(" generator={g}");
        }
        if !self.filled.is_empty() {
            s += &format!(" filled={}", self.filled.len());
        }
        if let Some(r) = self.rejection {
            s += &format!(" reason=\"{r}\"");
        }
        s
    }
}

/// Placements to try, best first: hole-free windows at the largest `t`, then
/// larger windows whose holes are all border indexes.
pub fn candidate_placements(table: &IncompleteTable, config: &ResolveConfig) -> Vec<Placement> {
    let shape = table.shape();
    let t_cap = config.t.unwrap_or_else(|| shape.max_t().min(4));
    let taus: Vec<IndexPair> = match config.tau {
        Some(tau) => vec![tau.wrap(shape)],
        None => shape.indices().collect(),
    };
    let window_holes = |tau: IndexPair, t: usize| -> Vec<IndexPair> {
        hyperbolic_points(2 * t + 1).into_iter().filter(|&n| !table.is_known(tau + n)).collect()
    };
    let fits = |t: usize| t >= 1 && hyperbolic_set(2 * t + 1, shape).is_ok();

    let mut out = Vec::new();
    // hole-free windows
    let free_t = match config.t {
        Some(t) => taus.iter().any(|&tau| window_holes(tau, t).is_empty()).then_some(t),
        None if config.tau.is_none() => detect_hyperbolic(table).max_t(),
        None => (1..=t_cap).rev().find(|&t| window_holes(taus[0], t).is_empty()),
    };
    if let Some(t) = free_t.filter(|&t| fits(t)) {
        out.extend(taus.iter().filter(|&&tau| window_holes(tau, t).is_empty()).map(|&tau| Placement { tau, t }));
    }
    // windows with border holes
    let lo = match config.t {
        Some(t) => t,
        None => free_t.map_or(2, |t| t + 1).max(2),
    };
    let mut holed = Vec::new();
    for t in lo..=t_cap.min(4) {
        if !fits(t) {
            continue;
        }
        for &tau in &taus {
            let holes = window_holes(tau, t);
            if !holes.is_empty() && holes.len() <= config.max_window_holes && holes.iter().all(|&n| in_border(n, t)) {
                holed.push((t, holes.len(), tau));
            }
        }
    }
    holed.sort();
    out.extend(holed.into_iter().map(|(t, _, tau)| Placement { tau, t }));
    out
}

/// Detect, iterate, estimate, recover, verify and complete.
pub fn resolve(
    table: &IncompleteTable,
    point: &EvaluationPoint,
    field: &Field,
    config: &ResolveConfig,
) -> CompletionReport {
    let budget = config.branch_budget.unwrap_or((field.size() as usize).pow(2));
    let mut warnings = Vec::new();
    if let Some(t) = config.t.filter(|&t| t > 4) {
        warnings.push(format!("t = {t} is beyond the proven regime t <= 4; acceptance rests on verification"));
    }
    let placements = candidate_placements(table, config);
    if placements.is_empty() {
        let mut report = CompletionReport::empty(Status::NoPlacement);
        report.warnings = warnings;
        report.warnings.push("no usable hyperbolic window".into());
        return report;
    }

    let mut attempts: Vec<AttemptResult> = Vec::new();
    let mut log = Vec::new();
    let mut branches_tried = 0;
    for placement in placements.into_iter().take(config.max_attempts) {
        let orders = match config.order {
            OrderMode::Lex => vec![OrderKind::Lex],
            OrderMode::Graded => vec![OrderKind::Graded],
            OrderMode::Auto => auto_orders(&extract_working(table, placement.tau), placement.t),
        };
        for order in orders {
            let attempt = run_attempt(table, placement, order, point, field, budget);
            branches_tried += attempt.branches_tried;
            log.push(format!(
                "tau={} t={} order={}: {}{}",
                placement.tau,
                placement.t,
                order,
                attempt.status,
                attempt.rejection.map(|r| format!(" ({r})")).unwrap_or_default()
            ));
            let done = !attempt.verified.is_empty();
            attempts.push(attempt);
            if done {
                let attempt = attempts.pop().unwrap();
                let mut report = success_report(table, point, field, &attempt, &mut warnings);
                report.branches_tried = branches_tried;
                report.warnings = warnings;
                report.attempts = log;
                return report;
            }
        }
    }

    let chosen = attempts
        .iter()
        .find(|a| a.status == Status::BranchBudgetExceeded)
        .or_else(|| attempts.iter().find(|a| a.status.is_definite()))
        .or(attempts.first())
        .expect("at least one attempt");
    let mut report = CompletionReport::empty(chosen.status);
    report.tau = Some(chosen.tau);
    report.t = Some(chosen.t);
    report.order = Some(chosen.order);
    report.rejection = chosen.rejection;
    if let Some(state) = &chosen.state {
        report.basis = state.basis().iter().map(|f| f.format(field)).collect();
        report.footprint = state.footprint().points();
    }
    report.completed_table = render_cells(table, field);
    report.branches_tried = branches_tried;
    warnings.extend(chosen.unsupported.iter().take(3).cloned());
    report.warnings = warnings;
    report.attempts = log;
    report
}

fn render_cells(table: &IncompleteTable, field: &Field) -> Vec<String> {
    table
        .shape()
        .indices()
        .map(|n| table.get(n).map_or_else(|| "*".to_string(), |v| field.format(v)))
        .collect()
}

fn success_report(
    table: &IncompleteTable,
    point: &EvaluationPoint,
    field: &Field,
    attempt: &AttemptResult,
    warnings: &mut Vec<String>,
) -> CompletionReport {
    // distinct answers are distinct completed tables
    let mut completions: Vec<(IncompleteTable, usize)> = Vec::new();
    for (i, (g, _, _)) in attempt.verified.iter().enumerate() {
        let done = complete_table(table, &g.to_poly(field), attempt.tau, point, field);
        if !completions.iter().any(|(c, _)| *c == done) {
            completions.push((done, i));
        }
    }
    let status = if completions.len() == 1 { Status::Completed } else { Status::Ambiguous };
    let (generator, state, _) = &attempt.verified[completions[0].1];
    let mut report = CompletionReport::empty(status);
    report.tau = Some(attempt.tau);
    report.t = Some(attempt.t);
    report.order = Some(attempt.order);
    report.basis = state.basis().iter().map(|f| f.format(field)).collect();
    report.footprint = state.footprint().points();
    if status == Status::Ambiguous {
        report.alternatives =
            completions.iter().map(|(_, i)| attempt.verified[*i].0.to_poly(field).format(field)).collect();
        report.completed_table = render_cells(table, field);
        warnings.push(format!("{} distinct completions verify; none is chosen", completions.len()));
        return report;
    }
    report.support = generator.support.clone();
    report.coefficients = generator.coefficients.iter().map(|&c| field.format(c)).collect();
    report.generator = Some(generator.to_poly(field).format(field));
    report.descent = descend_to_base(generator, point, field).map(|d| DescentReport {
        tau: d.tau,
        coefficients: d.coefficients.iter().map(|&c| field.format(c)).collect(),
    });
    if report.descent.is_none() && field.spec().ext_degree > 1 {
        warnings.push("no shift brings the coefficients into the base field".into());
    }
    let done = &completions[0].0;
    report.filled = table
        .unknown_positions()
        .into_iter()
        .map(|n| (n, field.format(done.get(n).expect("completed"))))
        .collect();
    report.completed_table = render_cells(done, field);
    report
}
