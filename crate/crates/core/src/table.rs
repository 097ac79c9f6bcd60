//! Incomplete tables, their text format, hyperbolic detection, working arrays
//! and periodic completion.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{parse_modulus, Elem, Field, FieldError, FieldSpec};
use crate::lattice::{hyperbolic_points, IndexPair, LatticeError, TableShape};
use crate::poly::{CellSource, EvaluationPoint, Poly, PointError};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: expected {expected} values, found {found}")]
    Arity { line: usize, expected: usize, found: usize },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("missing `# {0}` header line")]
    MissingHeader(&'static str),
    #[error("line {line}: bad value `{token}`: {source}")]
    Element { line: usize, token: String, source: FieldError },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Point(#[from] PointError),
}

/// An `r1 x r2` grid of known values and holes. Rows index `n1`, columns `n2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncompleteTable {
    shape: TableShape,
    cells: Vec<Option<Elem>>,
}

impl IncompleteTable {
    pub fn new(shape: TableShape, cells: Vec<Option<Elem>>) -> Self {
        assert_eq!(cells.len(), shape.len(), "cell count must match the shape");
        IncompleteTable { shape, cells }
    }

    pub fn unknown(shape: TableShape) -> Self {
        IncompleteTable { shape, cells: vec![None; shape.len()] }
    }

    pub fn from_fn(shape: TableShape, mut f: impl FnMut(IndexPair) -> Option<Elem>) -> Self {
        IncompleteTable { shape, cells: shape.indices().map(&mut f).collect() }
    }

    pub fn get(&self, n: IndexPair) -> Option<Elem> {
        self.cells[self.shape.offset(n.wrap(self.shape))]
    }

    pub fn set(&mut self, n: IndexPair, value: Option<Elem>) {
        let k = self.shape.offset(n.wrap(self.shape));
        self.cells[k] = value;
    }

    pub fn is_known(&self, n: IndexPair) -> bool {
        self.get(n).is_some()
    }

    pub fn known_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn unknown_positions(&self) -> Vec<IndexPair> {
        self.shape.indices().filter(|n| !self.is_known(*n)).collect()
    }

    pub fn known_cells(&self) -> impl Iterator<Item = (IndexPair, Elem)> + '_ {
        self.shape.indices().filter_map(|n| self.get(n).map(|v| (n, v)))
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(Option::is_some)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Option<Elem>]> {
        self.cells.chunks(self.shape.r2)
    }
}

impl CellSource for IncompleteTable {
    fn shape(&self) -> TableShape {
        self.shape
    }

    fn cell(&self, n: IndexPair) -> Option<Elem> {
        self.get(n)
    }
}

/// A parsed table file: field, shape, optional root exponents and the grid.
#[derive(Clone, Debug)]
pub struct TableDoc {
    pub field: Field,
    pub alpha: Option<(u32, u32)>,
    pub table: IncompleteTable,
}

impl TableDoc {
    pub fn shape(&self) -> TableShape {
        self.table.shape
    }

    /// The evaluation point named by the header, or the standard one.
    pub fn point(&self) -> Result<EvaluationPoint, PointError> {
        match self.alpha {
            Some((k1, k2)) => EvaluationPoint::from_exponents(&self.field, k1, k2, self.shape()),
            None => EvaluationPoint::standard(&self.field, self.shape()),
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> TableError {
    TableError::Syntax { line, message: message.into() }
}

/// Parse the table text format:
///
/// ```text
/// # field p=2 m=4 modulus=0x13
/// # shape 5 5
/// # alpha 3 3
/// * a^5 a^10 a^10 a^5
/// ...
/// ```
///
/// Other `#` lines in the header block are comments; `*` marks a hole.
pub fn parse_table(text: &str) -> Result<TableDoc, TableError> {
    let mut field_line: Option<(usize, Vec<(String, String)>)> = None;
    let mut shape: Option<TableShape> = None;
    let mut alpha = None;
    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            if !rows.is_empty() {
                return Err(syntax(line_no, "comments are only allowed in the header block"));
            }
            let mut words = header.split_whitespace();
            match words.next() {
                Some("field") => {
                    let mut pairs = Vec::new();
                    for w in words {
                        let (k, v) = w
                            .split_once('=')
                            .ok_or_else(|| syntax(line_no, format!("expected key=value, got `{w}`")))?;
                        pairs.push((k.to_string(), v.to_string()));
                    }
                    field_line = Some((line_no, pairs));
                }
                Some("shape") => {
                    let dims: Vec<usize> = words
                        .map(|w| w.parse::<usize>().map_err(|_| syntax(line_no, format!("bad dimension `{w}`"))))
                        .collect::<Result<_, _>>()?;
                    if dims.len() != 2 {
                        return Err(syntax(line_no, "shape needs two dimensions"));
                    }
                    shape = Some(TableShape::new(dims[0], dims[1])?);
                }
                Some("alpha") => {
                    let exps: Vec<u32> = words
                        .map(|w| w.parse::<u32>().map_err(|_| syntax(line_no, format!("bad exponent `{w}`"))))
                        .collect::<Result<_, _>>()?;
                    if exps.len() != 2 {
                        return Err(syntax(line_no, "alpha needs two exponents"));
                    }
                    alpha = Some((exps[0], exps[1]));
                }
                _ => {}
            }
            continue;
        }
        rows.push((line_no, line.split_whitespace().collect()));
    }

    let (field_line_no, pairs) = field_line.ok_or(TableError::MissingHeader("field"))?;
    let shape = shape.ok_or(TableError::MissingHeader("shape"))?;
    let field = field_from_pairs(field_line_no, &pairs)?;

    if rows.len() != shape.r1 {
        return Err(TableError::RowCount { expected: shape.r1, found: rows.len() });
    }
    let mut cells = Vec::with_capacity(shape.len());
    for (line, tokens) in rows {
        if tokens.len() != shape.r2 {
            return Err(TableError::Arity { line, expected: shape.r2, found: tokens.len() });
        }
        for token in tokens {
            if token == "*" {
                cells.push(None);
            } else {
                let v = field.parse(token).map_err(|source| TableError::Element {
                    line,
                    token: token.to_string(),
                    source,
                })?;
                cells.push(Some(v));
            }
        }
    }
    let doc = TableDoc { field, alpha, table: IncompleteTable::new(shape, cells) };
    if doc.alpha.is_some() {
        doc.point()?;
    }
    Ok(doc)
}

fn field_from_pairs(line: usize, pairs: &[(String, String)]) -> Result<Field, TableError> {
    let get = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let num = |key: &str, default: Option<u32>| -> Result<u32, TableError> {
        match get(key) {
            Some(v) => v.parse().map_err(|_| syntax(line, format!("bad {key}=`{v}`"))),
            None => default.ok_or_else(|| syntax(line, format!("missing {key}="))),
        }
    };
    let p = num("p", None)?;
    let m = num("m", None)?;
    let e = num("e", Some(1))?;
    let mut spec = FieldSpec::new(p, e, m)?;
    if let Some(text) = get("modulus") {
        spec = spec.with_modulus(parse_modulus(text, p)?);
    }
    if let Some(label) = get("label") {
        spec = spec.with_label(label);
    }
    Ok(Field::new(spec)?)
}

/// Emit the text format; `parse_table(format_table(doc))` reproduces `doc`.
pub fn format_table(doc: &TableDoc) -> String {
    let spec = doc.field.spec();
    let shape = doc.shape();
    let mut out = String::new();
    let _ = write!(out, "# field p={} m={}", spec.p, spec.ext_degree);
    if spec.base_exp != 1 {
        let _ = write!(out, " e={}", spec.base_exp);
    }
    let _ = write!(out, " modulus={}", spec.modulus_text());
    if spec.label != "a" {
        let _ = write!(out, " label={}", spec.label);
    }
    out.push('\n');
    let _ = writeln!(out, "# shape {} {}", shape.r1, shape.r2);
    if let Some((k1, k2)) = doc.alpha {
        let _ = writeln!(out, "# alpha {k1} {k2}");
    }
    out.push_str(&format_grid(&doc.table, &doc.field));
    out
}

/// Rows of whitespace-separated tokens, `*` for holes.
pub fn format_grid(table: &IncompleteTable, field: &Field) -> String {
    let mut out = String::new();
    for row in table.rows() {
        let tokens: Vec<String> = row
            .iter()
            .map(|c| c.map(|v| field.format(v)).unwrap_or_else(|| "*".into()))
            .collect();
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    out
}

/// A shift `τ` and amplitude parameter `t` such that `τ + B(2t+1)` is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub tau: IndexPair,
    pub t: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub candidates: Vec<Placement>,
}

impl DetectionResult {
    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn max_t(&self) -> Option<usize> {
        self.candidates.first().map(|c| c.t)
    }
}

/// Whether every cell of `τ + B(2t+1)` (indexes mod shape) is known.
pub fn window_known(table: &IncompleteTable, tau: IndexPair, t: usize) -> bool {
    hyperbolic_points(2 * t + 1).into_iter().all(|n| table.is_known(tau + n))
}

/// For every offset the largest fitting `t >= 1` with a fully known window,
/// restricted to the offsets reaching the global maximum; row-major in `τ`.
pub fn detect_hyperbolic(table: &IncompleteTable) -> DetectionResult {
    let shape = table.shape;
    let mut best = 0;
    let mut candidates = Vec::new();
    for tau in shape.indices() {
        let mut t_max = 0;
        for t in 1..=shape.max_t() {
            if window_known(table, tau, t) {
                t_max = t;
            } else {
                break;
            }
        }
        if t_max == 0 || t_max < best {
            continue;
        }
        if t_max > best {
            best = t_max;
            candidates.clear();
        }
        candidates.push(Placement { tau, t: t_max });
    }
    DetectionResult { candidates }
}

/// The shifted array `u_n = h_{τ+n}` (indexes mod shape).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkingArray {
    cells: IncompleteTable,
    tau: IndexPair,
}

impl WorkingArray {
    pub fn tau(&self) -> IndexPair {
        self.tau
    }

    pub fn get(&self, n: IndexPair) -> Option<Elem> {
        self.cells.get(n)
    }

    /// Write an estimated value into a hole.
    pub fn fill(&mut self, n: IndexPair, value: Elem) {
        self.cells.set(n, Some(value));
    }

    pub fn clear(&mut self, n: IndexPair) {
        self.cells.set(n, None);
    }

    pub fn as_table(&self) -> &IncompleteTable {
        &self.cells
    }
}

impl CellSource for WorkingArray {
    fn shape(&self) -> TableShape {
        self.cells.shape
    }

    fn cell(&self, n: IndexPair) -> Option<Elem> {
        self.cells.get(n)
    }
}

/// Copy the whole table shifted by `τ`; holes stay holes.
pub fn extract_working(table: &IncompleteTable, tau: IndexPair) -> WorkingArray {
    let shape = table.shape;
    WorkingArray { cells: IncompleteTable::from_fn(shape, |n| table.get(tau + n)), tau }
}

/// Fill every hole `h_n` with `e'(α^{n-τ})`; known cells are left alone.
pub fn complete_table(
    table: &IncompleteTable,
    generator: &Poly,
    tau: IndexPair,
    point: &EvaluationPoint,
    field: &Field,
) -> IncompleteTable {
    let shape = table.shape;
    IncompleteTable::from_fn(shape, |n| {
        table.get(n).or_else(|| Some(point.evaluate(generator, n.wrapping_sub(tau, shape), field)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EXAMPLE_TABLE: &str = "\
# field p=2 m=4 modulus=0x13
# shape 5 5
* a^5 a^10 a^10 a^5
* a^4 a^4 * 0
a^13 a^13 * * a^8
a^7 a^2 0 a^2 a^7
a^11 0 * * a
";

    fn p(a: usize, b: usize) -> IndexPair {
        IndexPair(a, b)
    }

    #[test]
    fn example_table_holes() {
        let doc = parse_table(EXAMPLE_TABLE).unwrap();
        let holes = doc.table.unknown_positions();
        assert_eq!(holes, vec![p(0, 0), p(1, 0), p(1, 3), p(2, 2), p(2, 3), p(4, 2), p(4, 3)]);
        assert_eq!(doc.table.known_count(), 18);
        assert_eq!(doc.table.get(p(4, 4)), Some(doc.field.gen_pow(1)));
    }

    #[test]
    fn parse_errors() {
        let bad_token = EXAMPLE_TABLE.replace("a^7 a^2", "b^2 a^2");
        assert!(matches!(parse_table(&bad_token), Err(TableError::Element { .. })));
        let short_row = EXAMPLE_TABLE.replace("a^11 0 * * a", "a^11 0 * *");
        assert!(matches!(parse_table(&short_row), Err(TableError::Arity { line: 7, .. })));
        let missing_row = EXAMPLE_TABLE.replace("a^11 0 * * a\n", "");
        assert!(matches!(parse_table(&missing_row), Err(TableError::RowCount { .. })));
        let late_comment = format!("{EXAMPLE_TABLE}# trailing\n");
        assert!(matches!(parse_table(&late_comment), Err(TableError::Syntax { .. })));
        let no_shape = EXAMPLE_TABLE.replace("# shape 5 5\n", "");
        assert!(matches!(parse_table(&no_shape), Err(TableError::MissingHeader("shape"))));
        let reducible = EXAMPLE_TABLE.replace("0x13", "0x15");
        assert!(matches!(parse_table(&reducible), Err(TableError::Field(FieldError::Reducible { .. }))));
        let out_of_field = EXAMPLE_TABLE.replace("a^13 a^13", "a^16 a^13");
        assert!(parse_table(&out_of_field).is_err());
        let bad_alpha = EXAMPLE_TABLE.replace("# shape 5 5", "# shape 5 5\n# alpha 1 3");
        assert!(matches!(parse_table(&bad_alpha), Err(TableError::Point(_))));
    }

    #[test]
    fn comments_and_all_holes() {
        let text = "# field p=2 m=4\n# a comment\n# shape 3 5\n# alpha 5 3\n* * * * *\n* * * * *\n* * * * *\n";
        let doc = parse_table(text).unwrap();
        assert_eq!(doc.table.known_count(), 0);
        assert_eq!(doc.alpha, Some((5, 3)));
    }

    #[test]
    fn format_round_trip() {
        let doc = parse_table(EXAMPLE_TABLE).unwrap();
        let text = format_table(&doc);
        assert_eq!(text, EXAMPLE_TABLE);
        let again = parse_table(&text).unwrap();
        assert_eq!(again.table, doc.table);
    }

    #[test]
    fn detection_on_example_table() {
        let doc = parse_table(EXAMPLE_TABLE).unwrap();
        let det = detect_hyperbolic(&doc.table);
        assert_eq!(det.max_t(), Some(2));
        assert!(det.candidates.contains(&Placement { tau: p(0, 1), t: 2 }));
        for c in &det.candidates {
            assert!(window_known(&doc.table, c.tau, c.t));
        }
    }

    #[test]
    fn detection_on_full_table() {
        let shape = TableShape::new(5, 5).unwrap();
        let full = IncompleteTable::from_fn(shape, |_| Some(Elem::ONE));
        let det = detect_hyperbolic(&full);
        assert_eq!(det.candidates.len(), 25);
        assert!(det.candidates.iter().all(|c| c.t == 2));
    }

    #[test]
    fn detection_finds_nothing_when_every_b3_is_hit() {
        // holes on a diagonal pattern: every τ + {(0,0),(1,0),(0,1)} meets one
        let shape = TableShape::new(5, 5).unwrap();
        let table = IncompleteTable::from_fn(shape, |n| {
            if (n.0 + 2 * n.1) % 3 == 0 || (n.0 + n.1) % 2 == 0 {
                None
            } else {
                Some(Elem::ONE)
            }
        });
        let brute = shape.indices().any(|tau| window_known(&table, tau, 1));
        assert_eq!(detect_hyperbolic(&table).is_empty(), !brute);
        let sparse = IncompleteTable::from_fn(shape, |n| if n.1 % 2 == 0 { None } else { Some(Elem::ONE) });
        assert!(detect_hyperbolic(&sparse).is_empty());
    }

    #[test]
    fn working_array_shifts() {
        let doc = parse_table(EXAMPLE_TABLE).unwrap();
        let f = &doc.field;
        let u = extract_working(&doc.table, p(0, 1));
        assert_eq!(u.get(p(0, 0)), Some(f.gen_pow(5)));
        assert_eq!(u.get(p(3, 0)), Some(f.gen_pow(2)));
        let id = extract_working(&doc.table, p(0, 0));
        assert_eq!(id.as_table(), &doc.table);
        let wrapped = extract_working(&doc.table, p(4, 4));
        assert_eq!(wrapped.get(p(1, 1)), doc.table.get(p(0, 0)));
        for tau in doc.shape().indices() {
            let u = extract_working(&doc.table, tau);
            for n in doc.shape().indices() {
                assert_eq!(u.get(n), doc.table.get(tau + n));
            }
        }
    }

    #[test]
    fn completion_with_constant() {
        let doc = parse_table(EXAMPLE_TABLE).unwrap();
        let f = &doc.field;
        let point = doc.point().unwrap();
        let c = f.gen_pow(9);
        let done = complete_table(&doc.table, &Poly::monomial(p(0, 0), c), p(0, 0), &point, f);
        assert!(done.is_complete());
        for n in doc.table.unknown_positions() {
            assert_eq!(done.get(n), Some(c));
        }
        for (n, v) in doc.table.known_cells() {
            assert_eq!(done.get(n), Some(v));
        }
        let again = complete_table(&done, &Poly::one(), p(0, 0), &point, f);
        assert_eq!(again, done);
    }
}
