//! The Berlekamp-Massey-Sakata iteration on a doubly periodic array.
//!
//! The state at step `l` holds a minimal set `F_l` of polynomials generating the
//! prefix `u^l`, the auxiliary set `G_l` of earlier polynomials that failed at a
//! recorded point with a nonzero discrepancy, and the footprint `Δ(u^l)`. The
//! footprint is stored as the staircase of its corners; the defining points of
//! `F_l` are the minimal points of its complement.
//!
//! A step at `l` evaluates every `f ∈ F_l` with `LP(f) ⪯ l`. Failing
//! polynomials enlarge the footprint by the down-closure of `l - LP(f)` and are
//! replaced by the Berlekamp combination
//!
//! ```text
//! h = X^{s'-LP(f)} f - (d_f / v_g) X^{s'-l+(k_g-LP(g))} g
//! ```
//!
//! for each new defining point `s' ⪯ l`, with `(g, k_g, v_g)` an auxiliary entry
//! whose span `k_g - LP(g)` dominates `l - s'`.

use std::fmt;

use crate::gf::{Elem, Field};
use crate::lattice::{hyperbolic_set, IndexPair, LatticeError, OrderKind, TableShape};
use crate::poly::{buchberger_reduces, generates_prefix, recurrence_with_lp, reduce, CellSource, Poly};

/// A down-closed subset of N x N given by its maximal points.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Footprint {
    // first coordinate strictly decreasing, second strictly increasing
    corners: Vec<IndexPair>,
}

impl Footprint {
    pub fn empty() -> Self {
        Footprint::default()
    }

    /// Down-closure of a finite set of points.
    pub fn closure(points: impl IntoIterator<Item = IndexPair>) -> Self {
        let mut pts: Vec<IndexPair> = points.into_iter().collect();
        pts.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)));
        let mut corners: Vec<IndexPair> = Vec::new();
        for p in pts {
            if corners.last().is_none_or(|c| p.1 > c.1) {
                corners.push(p);
            }
        }
        Footprint { corners }
    }

    /// Footprint whose complement has the given minimal points (the staircase
    /// of a minimal polynomial set).
    pub fn from_defining_points(points: &[IndexPair]) -> Self {
        let mut pts = points.to_vec();
        pts.sort_by_key(|p| std::cmp::Reverse(p.0));
        let corners = pts.windows(2).map(|w| IndexPair(w[0].0 - 1, w[1].1 - 1)).collect();
        Footprint { corners }
    }

    pub fn corners(&self) -> &[IndexPair] {
        &self.corners
    }

    pub fn contains(&self, n: IndexPair) -> bool {
        self.corners.iter().any(|c| n.precedes(*c))
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    pub fn size(&self) -> usize {
        let mut total = 0;
        let mut prev: isize = -1;
        for c in &self.corners {
            total += (c.0 + 1) * (c.1 as isize - prev) as usize;
            prev = c.1 as isize;
        }
        total
    }

    /// All points, row-major.
    pub fn points(&self) -> Vec<IndexPair> {
        let mut out = Vec::new();
        if let Some(max1) = self.corners.first().map(|c| c.0) {
            for a in 0..=max1 {
                let top = self.corners.iter().filter(|c| c.0 >= a).map(|c| c.1).max().unwrap();
                out.extend((0..=top).map(|b| IndexPair(a, b)));
            }
        }
        out
    }

    /// Minimal points of the complement, first coordinate decreasing.
    pub fn defining_points(&self) -> Vec<IndexPair> {
        if self.corners.is_empty() {
            return vec![IndexPair::ORIGIN];
        }
        let mut out = Vec::with_capacity(self.corners.len() + 1);
        out.push(IndexPair(self.corners[0].0 + 1, 0));
        for w in self.corners.windows(2) {
            out.push(IndexPair(w[1].0 + 1, w[0].1 + 1));
        }
        out.push(IndexPair(0, self.corners.last().unwrap().1 + 1));
        out
    }

    pub fn is_subset_of(&self, other: &Footprint) -> bool {
        self.corners.iter().all(|c| other.contains(*c))
    }
}

impl fmt::Display for Footprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self.points().iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", pts.join(","))
    }
}

/// An element of `F_l` with its defining point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MinimalPoly {
    pub poly: Poly,
    pub lp: IndexPair,
}

/// An element `(g, k, v)` of `G_l`: `g` generated `u^k` and `g[U]_k = v ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AuxEntry {
    pub poly: Poly,
    pub lp: IndexPair,
    pub fail_at: IndexPair,
    pub discrepancy: Elem,
}

impl AuxEntry {
    /// `k - LP(g)`, a corner of the footprint.
    pub fn span(&self) -> IndexPair {
        self.fail_at.checked_sub(self.lp).expect("k ⪰ LP(g)")
    }
}

/// Why a step could not complete.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Halt {
    /// The footprint grew beyond `t` at this step.
    FootprintOverflow { at: IndexPair, size: usize },
    /// `u_l` is unknown and some polynomial needs it.
    Hole { at: IndexPair },
    /// A recurrence at `at` needs an unknown cell other than `u_at`.
    MissingCell { at: IndexPair, cell: IndexPair },
    /// A postcondition of the update failed; indicates a bug.
    Invariant { at: IndexPair, message: String },
}

/// What a completed step did.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepInfo {
    /// Indexes (into the previous `F_l`) of polynomials with nonzero discrepancy.
    pub failing: Vec<usize>,
    pub discrepancies: Vec<Elem>,
    pub footprint_grew: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BmsState {
    order: OrderKind,
    polys: Vec<MinimalPoly>,
    aux: Vec<AuxEntry>,
    footprint: Footprint,
}

impl BmsState {
    /// `F = {1}`, `G = ∅`, `Δ = ∅`.
    pub fn new(order: OrderKind) -> Self {
        BmsState {
            order,
            polys: vec![MinimalPoly { poly: Poly::one(), lp: IndexPair::ORIGIN }],
            aux: Vec::new(),
            footprint: Footprint::empty(),
        }
    }

    /// Assemble a state from its parts; the footprint is read off the
    /// defining points.
    pub fn from_parts(order: OrderKind, polys: Vec<MinimalPoly>, aux: Vec<AuxEntry>) -> Result<Self, String> {
        let lps: Vec<IndexPair> = polys.iter().map(|p| p.lp).collect();
        let footprint = Footprint::from_defining_points(&lps);
        let state = BmsState { order, polys, aux, footprint };
        state.check_invariants()?;
        Ok(state)
    }

    pub fn order(&self) -> OrderKind {
        self.order
    }

    pub fn polys(&self) -> &[MinimalPoly] {
        &self.polys
    }

    pub fn aux(&self) -> &[AuxEntry] {
        &self.aux
    }

    pub fn footprint(&self) -> &Footprint {
        &self.footprint
    }

    pub fn defining_points(&self) -> Vec<IndexPair> {
        self.polys.iter().map(|p| p.lp).collect()
    }

    pub fn basis(&self) -> Vec<Poly> {
        self.polys.iter().map(|p| p.poly.clone()).collect()
    }

    /// Replace `F` wholesale, keeping `G` and `Δ` (used to install branch
    /// polynomials). The staircase must be unchanged.
    pub fn with_polys(&self, polys: Vec<MinimalPoly>) -> Self {
        debug_assert_eq!(
            polys.iter().map(|p| p.lp).collect::<Vec<_>>(),
            self.defining_points()
        );
        BmsState { polys, ..self.clone() }
    }

    /// Check the staircase, footprint and auxiliary-span invariants.
    pub fn check_invariants(&self) -> Result<(), String> {
        let pts = self.defining_points();
        if pts != self.footprint.defining_points() {
            return Err(format!("defining points {pts:?} do not match footprint {}", self.footprint));
        }
        for w in pts.windows(2) {
            if !(w[0].0 > w[1].0 && w[0].1 < w[1].1) {
                return Err(format!("defining points {pts:?} are not a staircase"));
            }
        }
        for mp in &self.polys {
            if mp.poly.leading_power(self.order).ok() != Some(mp.lp) {
                return Err(format!("stored leading power {} is stale", mp.lp));
            }
        }
        if self.aux.len() + 1 != self.polys.len() {
            return Err(format!("{} auxiliary entries for {} polynomials", self.aux.len(), self.polys.len()));
        }
        for (entry, corner) in self.aux.iter().zip(self.footprint.corners()) {
            if entry.span() != *corner {
                return Err(format!("auxiliary span {} does not match corner {corner}", entry.span()));
            }
            if entry.discrepancy.is_zero() {
                return Err("auxiliary discrepancy is zero".into());
            }
        }
        Ok(())
    }

    /// Whether a polynomial with leading power `s` failing at `l` would push
    /// the footprint past `t`.
    pub fn must_vanish(&self, l: IndexPair, s: IndexPair, t: Option<usize>) -> bool {
        let (Some(t), Some(n)) = (t, l.checked_sub(s)) else {
            return false;
        };
        !self.footprint.contains(n)
            && Footprint::closure(self.footprint.corners().iter().copied().chain([n])).size() > t
    }

    /// One iteration at index `l`. `t` bounds the footprint size.
    pub fn step(
        &self,
        l: IndexPair,
        u: &impl CellSource,
        field: &Field,
        t: Option<usize>,
    ) -> Result<(BmsState, StepInfo), Halt> {
        let active: Vec<usize> = (0..self.polys.len())
            .filter(|&i| self.polys[i].lp.precedes(l))
            .collect();
        if !active.is_empty() && u.cell(l).is_none() {
            return Err(Halt::Hole { at: l });
        }

        let mut discrepancies = vec![Elem::Zero; self.polys.len()];
        for &i in &active {
            let mp = &self.polys[i];
            discrepancies[i] = match recurrence_with_lp(&mp.poly, mp.lp, u, l, field) {
                Ok(d) => d,
                // failing here would overflow, so under |Δ(U)| ≤ t the value is zero
                Err(_) if self.must_vanish(l, mp.lp, t) => Elem::Zero,
                Err(e) => return Err(Halt::MissingCell { at: l, cell: e.0 }),
            };
        }
        let failing: Vec<usize> = active.iter().copied().filter(|&i| !discrepancies[i].is_zero()).collect();
        if failing.is_empty() {
            return Ok((self.clone(), StepInfo { failing, discrepancies, footprint_grew: false }));
        }

        let grown: Vec<IndexPair> = failing.iter().map(|&i| l.checked_sub(self.polys[i].lp).unwrap()).collect();
        let footprint = Footprint::closure(self.footprint.corners().iter().copied().chain(grown.iter().copied()));
        let footprint_grew = footprint != self.footprint;
        if let Some(t) = t {
            let size = footprint.size();
            if size > t {
                return Err(Halt::FootprintOverflow { at: l, size });
            }
        }

        let order = self.order;
        let mut polys = Vec::new();
        for s_new in footprint.defining_points() {
            polys.push(self.berlekamp(s_new, l, &failing, &discrepancies, field)?);
        }

        let mut aux = Vec::new();
        for &corner in footprint.corners() {
            if let Some(old) = self.aux.iter().find(|g| g.span() == corner) {
                aux.push(old.clone());
                continue;
            }
            let src = failing
                .iter()
                .copied()
                .find(|&i| l.checked_sub(self.polys[i].lp) == Some(corner))
                .ok_or_else(|| Halt::Invariant { at: l, message: format!("no source for corner {corner}") })?;
            let mp = &self.polys[src];
            aux.push(AuxEntry { poly: mp.poly.clone(), lp: mp.lp, fail_at: l, discrepancy: discrepancies[src] });
        }

        let next = BmsState { order, polys, aux, footprint };
        if let Err(message) = next.check_invariants() {
            return Err(Halt::Invariant { at: l, message });
        }
        for mp in next.polys.iter().filter(|mp| mp.lp.precedes(l)) {
            let d = match recurrence_with_lp(&mp.poly, mp.lp, u, l, field) {
                Ok(d) => d,
                Err(_) if next.must_vanish(l, mp.lp, t) => Elem::Zero,
                Err(e) => return Err(Halt::MissingCell { at: l, cell: e.0 }),
            };
            if !d.is_zero() {
                return Err(Halt::Invariant { at: l, message: format!("updated polynomial with LP {} still fails", mp.lp) });
            }
        }
        let info = StepInfo { failing, discrepancies, footprint_grew };
        Ok((next, info))
    }

    // Polynomial with leading power `s_new` generating u^{l+1}.
    fn berlekamp(
        &self,
        s_new: IndexPair,
        l: IndexPair,
        failing: &[usize],
        discrepancies: &[Elem],
        field: &Field,
    ) -> Result<MinimalPoly, Halt> {
        let order = self.order;
        let pick = |want_failing: bool| {
            let candidates = (0..self.polys.len())
                .filter(|i| failing.contains(i) == want_failing && self.polys[*i].lp.precedes(s_new));
            candidates.max_by(|a, b| order.compare(self.polys[*a].lp, self.polys[*b].lp))
        };

        if let Some(i) = pick(false) {
            let mp = &self.polys[i];
            let shift = s_new.checked_sub(mp.lp).unwrap();
            return Ok(MinimalPoly { poly: mp.poly.shift(shift), lp: s_new });
        }
        let i = pick(true).ok_or_else(|| Halt::Invariant {
            at: l,
            message: format!("no polynomial below defining point {s_new}"),
        })?;
        let f = &self.polys[i];
        let lifted = f.poly.shift(s_new.checked_sub(f.lp).unwrap());
        if !s_new.precedes(l) {
            return Ok(MinimalPoly { poly: lifted, lp: s_new });
        }

        let need = l.checked_sub(s_new).unwrap();
        let g = self
            .aux
            .iter()
            .filter(|g| need.precedes(g.span()))
            .max_by(|a, b| order.compare(a.fail_at, b.fail_at))
            .ok_or_else(|| Halt::Invariant { at: l, message: format!("no auxiliary entry dominates {need}") })?;
        let g_shift = (s_new + g.span()).checked_sub(l).unwrap();
        let factor = field.div(discrepancies[i], g.discrepancy).expect("aux discrepancy is nonzero");
        let poly = lifted.sub(&g.poly.shift(g_shift).scale(factor, field), field);
        Ok(MinimalPoly { poly, lp: s_new })
    }
}

/// Final or intermediate result of iterating over a list of indexes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BmsOutcome {
    Basis(BmsState),
    FootprintOverflow { at: IndexPair, size: usize },
    HoleEncountered { at: IndexPair, index: usize, state: BmsState },
    MissingCell { at: IndexPair, cell: IndexPair },
    Invariant { at: IndexPair, message: String },
    NotClosed(BmsState),
}

impl BmsOutcome {
    pub fn basis(&self) -> Option<&BmsState> {
        match self {
            BmsOutcome::Basis(s) => Some(s),
            _ => None,
        }
    }
}

/// Iterate `points[start..]` from `state`, stopping at the first halt.
pub fn run_from(
    mut state: BmsState,
    points: &[IndexPair],
    start: usize,
    u: &impl CellSource,
    field: &Field,
    t: Option<usize>,
) -> BmsOutcome {
    for (index, &l) in points.iter().enumerate().skip(start) {
        match state.step(l, u, field, t) {
            Ok((next, _)) => state = next,
            Err(Halt::Hole { at }) => return BmsOutcome::HoleEncountered { at, index, state },
            Err(Halt::FootprintOverflow { at, size }) => return BmsOutcome::FootprintOverflow { at, size },
            Err(Halt::MissingCell { at, cell }) => return BmsOutcome::MissingCell { at, cell },
            Err(Halt::Invariant { at, message }) => return BmsOutcome::Invariant { at, message },
        }
    }
    BmsOutcome::Basis(state)
}

/// The index sequence of the hyperbolic set `B(2t+1)` under `order`.
pub fn hyperbolic_schedule(t: usize, order: OrderKind, shape: TableShape) -> Result<Vec<IndexPair>, LatticeError> {
    Ok(order.sorted(hyperbolic_set(2 * t + 1, shape)?))
}

/// Run over `B(2t+1)`, aborting once `|Δ| > t`.
pub fn run(u: &impl CellSource, t: usize, order: OrderKind, field: &Field) -> Result<BmsOutcome, LatticeError> {
    let points = hyperbolic_schedule(t, order, u.shape())?;
    Ok(run_from(BmsState::new(order), &points, 0, u, field, Some(t)))
}

/// Run over every index of the table (no footprint bound).
pub fn run_full(u: &impl CellSource, order: OrderKind, field: &Field) -> BmsOutcome {
    let points = order.sorted(u.shape().indices());
    run_from(BmsState::new(order), &points, 0, u, field, None)
}

/// Whether `F` is a Groebner basis of `⟨F ∪ {X1^r1 - 1, X2^r2 - 1}⟩`: its
/// S-pairs reduce to zero modulo `F` and both binomials reduce to zero too.
pub fn closure_check(basis: &[Poly], shape: TableShape, order: OrderKind, field: &Field) -> bool {
    if !buchberger_reduces(basis, order, field) {
        return false;
    }
    [IndexPair(shape.r1, 0), IndexPair(0, shape.r2)]
        .into_iter()
        .all(|e| reduce(&Poly::x_minus_one(e, field), basis, order, field).is_zero())
}

/// Exhaustive minimality test for small instances: no monic polynomial whose
/// leading power lies in `Δ` and whose other exponents lie in `[0, bound]^2`
/// generates `u^l`. Only meaningful when every needed cell is known.
pub fn minimality_audit(
    footprint: &Footprint,
    u: &impl CellSource,
    l: IndexPair,
    order: OrderKind,
    field: &Field,
    bound: usize,
) -> bool {
    for lp in footprint.points() {
        let lower: Vec<IndexPair> = (0..=bound)
            .flat_map(|a| (0..=bound).map(move |b| IndexPair(a, b)))
            .filter(|m| order.less(*m, lp))
            .collect();
        let values: Vec<Elem> = field.elements().collect();
        let mut digits = vec![0usize; lower.len()];
        loop {
            let mut g = Poly::x(lp);
            for (m, &d) in lower.iter().zip(&digits) {
                g.set(*m, values[d]);
            }
            if generates_prefix(&g, u, l, order, field).unwrap_or(false) {
                return false;
            }
            // next coefficient tuple
            let mut k = 0;
            while k < digits.len() {
                digits[k] += 1;
                if digits[k] < values.len() {
                    break;
                }
                digits[k] = 0;
                k += 1;
            }
            if k == digits.len() {
                break;
            }
        }
    }
    true
}
