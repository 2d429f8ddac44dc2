//! Semidefinite relaxations as SDPA sparse problem files, and checks for
//! externally computed certificates.
//!
//! A problem is stored in SDPA's dual form
//!
//! ```text
//! maximize  F0 . Y   subject to  Fi . Y = ci  (i = 1..m),  Y PSD
//! ```
//!
//! whose SDPA primal `minimize c.x subject to sum xi Fi - F0 PSD` is the
//! stress (dual) program. Coefficient matrices are symmetric and only their
//! upper triangles are stored. Values are exact rationals; they are written
//! as terminating decimals when possible and as `p/q` otherwise.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::framework::{AnchoredNetwork, Framework};
use crate::numerics::{self, format_rational, parse_rational, terminating_decimal, Matrix, NumericsError, Rational, Scalar, Tolerances};

/// One stored upper-triangle entry. Indices are 1-based as in SDPA.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SdpEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdpProblem {
    /// Block sizes; negative sizes are SDPA diagonal (LP) blocks.
    pub blocks: Vec<i64>,
    /// `F0`, the objective of the maximization.
    pub objective: Vec<SdpEntry>,
    /// `F1 .. Fm`.
    pub constraints: Vec<Vec<SdpEntry>>,
    /// `c1 .. cm`.
    pub rhs: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdpError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no edge {0} in the instance")]
    UnknownEdge(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Names an edge whose squared length is overridden. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeKey {
    /// Framework vertices, or two sensors of an anchored network.
    Pair(usize, usize),
    /// Anchor `k` and sensor `j`.
    Anchor(usize, usize),
}

impl std::fmt::Display for EdgeKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EdgeKey::Pair(i, j) => write!(f, "({}, {})", i + 1, j + 1),
            EdgeKey::Anchor(k, j) => write!(f, "anchor {} - sensor {}", k + 1, j + 1),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExportOptions {
    /// Maximize the trace of the position block instead of the zero
    /// objective. A heuristic nudge toward high-rank solutions; off by default.
    pub trace_objective: bool,
    /// Measured squared lengths replacing the ones implied by positions.
    pub squared_lengths: BTreeMap<EdgeKey, Rational>,
}

impl SdpProblem {
    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    fn check_indices(&self) -> Result<(), SdpError> {
        let all = std::iter::once(&self.objective).chain(&self.constraints).flatten();
        for e in all {
            let size = self
                .blocks
                .get(e.block.wrapping_sub(1))
                .ok_or_else(|| SdpError::DimensionMismatch(format!("block {} does not exist", e.block)))?
                .unsigned_abs() as usize;
            let diagonal_only = self.blocks[e.block - 1] < 0;
            if e.row == 0 || e.col > size || e.row > e.col || (diagonal_only && e.row != e.col) {
                return Err(SdpError::DimensionMismatch(format!(
                    "entry ({}, {}) outside block {} of size {}",
                    e.row, e.col, e.block, self.blocks[e.block - 1]
                )));
            }
        }
        Ok(())
    }

    /// `F . Y` for one coefficient matrix against a single-block `Y`.
    fn apply<T: Scalar>(entries: &[SdpEntry], y: &Matrix<T>) -> T {
        let mut acc = T::zero();
        for e in entries {
            let v = T::from_rational(&e.value);
            let (i, j) = (e.row - 1, e.col - 1);
            let term = v * &y[(i, j)];
            acc += &term;
            if i != j {
                acc += &term;
            }
        }
        acc
    }

    /// `sum xi Fi - F0` for a single-block problem.
    pub fn dual_slack<T: Scalar>(&self, x: &[T]) -> Result<Matrix<T>, SdpError> {
        let size = self.single_block()?;
        if x.len() != self.constraints.len() {
            return Err(SdpError::DimensionMismatch(format!(
                "{} multipliers for {} constraints",
                x.len(),
                self.constraints.len()
            )));
        }
        let mut s = Matrix::zeros(size, size);
        let mut add = |entries: &[SdpEntry], factor: &T| {
            for e in entries {
                let v = T::from_rational(&e.value) * factor;
                let (i, j) = (e.row - 1, e.col - 1);
                s[(i, j)] += &v;
                if i != j {
                    s[(j, i)] += &v;
                }
            }
        };
        for (entries, xi) in self.constraints.iter().zip(x) {
            add(entries, xi);
        }
        add(&self.objective, &-T::one());
        Ok(s)
    }

    fn single_block(&self) -> Result<usize, SdpError> {
        match self.blocks.as_slice() {
            [size] if *size > 0 => Ok(*size as usize),
            _ => Err(SdpError::DimensionMismatch(format!(
                "expected one semidefinite block, found structure {:?}",
                self.blocks
            ))),
        }
    }
}

/// Upper triangle of `v v^T` for a sparse vector of `(1-based index, value)`.
fn rank_one(v: &[(usize, Rational)]) -> Vec<SdpEntry> {
    let mut out = Vec::new();
    for (a, (i, x)) in v.iter().enumerate() {
        for (j, y) in &v[a..] {
            let value = x * y;
            if value != Rational::from_i64(0) {
                let (row, col) = ((*i).min(*j), (*i).max(*j));
                out.push(SdpEntry { block: 1, row, col, value });
            }
        }
    }
    out.sort();
    out
}

fn pair_matrix(i: usize, j: usize) -> Vec<SdpEntry> {
    rank_one(&[(i, Rational::from_i64(1)), (j, Rational::from_i64(-1))])
}

fn trace_entries(range: std::ops::RangeInclusive<usize>) -> Vec<SdpEntry> {
    range
        .map(|i| SdpEntry { block: 1, row: i, col: i, value: Rational::from_i64(1) })
        .collect()
}

fn take_override(
    overrides: &mut BTreeMap<EdgeKey, Rational>,
    key: EdgeKey,
    default: impl FnOnce() -> Rational,
) -> Rational {
    overrides.remove(&key).unwrap_or_else(default)
}

fn reject_leftovers(overrides: BTreeMap<EdgeKey, Rational>) -> Result<(), SdpError> {
    match overrides.into_keys().next() {
        Some(key) => Err(SdpError::UnknownEdge(key.to_string())),
        None => Ok(()),
    }
}

fn normalize_key(key: EdgeKey) -> EdgeKey {
    match key {
        EdgeKey::Pair(i, j) => EdgeKey::Pair(i.min(j), i.max(j)),
        other => other,
    }
}

/// The relaxed realization problem of a framework: one `n x n` block and
/// `(e_i - e_j)(e_i - e_j)^T . Y = d_ij^2` per edge.
pub fn export_realization_sdp(framework: &Framework, opts: &ExportOptions) -> Result<SdpProblem, SdpError> {
    let n = framework.len();
    let mut overrides: BTreeMap<EdgeKey, Rational> =
        opts.squared_lengths.iter().map(|(k, v)| (normalize_key(*k), v.clone())).collect();
    let mut constraints = Vec::with_capacity(framework.edges().len());
    let mut rhs = Vec::with_capacity(framework.edges().len());
    for &(i, j) in framework.edges() {
        constraints.push(pair_matrix(i + 1, j + 1));
        rhs.push(take_override(&mut overrides, EdgeKey::Pair(i, j), || framework.squared_length(i, j)));
    }
    reject_leftovers(overrides)?;
    let problem = SdpProblem {
        blocks: vec![n as i64],
        objective: if opts.trace_objective && n > 0 { trace_entries(1..=n) } else { Vec::new() },
        constraints,
        rhs,
    };
    problem.check_indices()?;
    Ok(problem)
}

/// The anchored relaxation: one `(d+n)` block, `d(d+1)/2` constraints pinning
/// the top-left block to `I_d`, then one constraint per sensor edge and one
/// per anchor edge.
pub fn export_anchored_sdp(net: &AnchoredNetwork, opts: &ExportOptions) -> Result<SdpProblem, SdpError> {
    let (d, n) = (net.dim(), net.sensor_count());
    let mut overrides: BTreeMap<EdgeKey, Rational> =
        opts.squared_lengths.iter().map(|(k, v)| (normalize_key(*k), v.clone())).collect();
    let mut constraints = Vec::new();
    let mut rhs = Vec::new();
    for a in 1..=d {
        for b in a..=d {
            constraints.push(vec![SdpEntry { block: 1, row: a, col: b, value: Rational::from_i64(1) }]);
            rhs.push(Rational::from_i64(i64::from(a == b)));
        }
    }
    for &(i, j) in net.sensor_edges() {
        constraints.push(pair_matrix(d + i + 1, d + j + 1));
        rhs.push(take_override(&mut overrides, EdgeKey::Pair(i, j), || net.sensor_distance_sq(i, j)));
    }
    for &(k, j) in net.anchor_edges() {
        let mut v: Vec<(usize, Rational)> = (0..d).map(|r| (r + 1, -net.anchors()[(r, k)].clone())).collect();
        v.push((d + j + 1, Rational::from_i64(1)));
        constraints.push(rank_one(&v));
        rhs.push(take_override(&mut overrides, EdgeKey::Anchor(k, j), || net.anchor_distance_sq(k, j)));
    }
    reject_leftovers(overrides)?;
    let problem = SdpProblem {
        blocks: vec![(d + n) as i64],
        objective: if opts.trace_objective && n > 0 { trace_entries(d + 1..=d + n) } else { Vec::new() },
        constraints,
        rhs,
    };
    problem.check_indices()?;
    Ok(problem)
}

/// Multipliers `x` with `sum xi Fi = S` for a framework stress matrix:
/// `x = -S_ij` in edge order.
pub fn stress_multipliers<T: Scalar>(s: &Matrix<T>, framework: &Framework) -> Vec<T> {
    framework.edges().iter().map(|&(i, j)| -s[(i, j)].clone()).collect()
}

/// Multipliers for an anchored dual: `V` entries for the pinning constraints,
/// then `w_ij` and `wbar_kj` in constraint order.
pub fn anchored_multipliers<T: Scalar>(
    v: &Matrix<T>,
    sensor_weights: &[(usize, usize, T)],
    anchor_weights: &[(usize, usize, T)],
    net: &AnchoredNetwork,
) -> Vec<T> {
    let d = net.dim();
    let mut x = Vec::new();
    for a in 0..d {
        for b in a..d {
            x.push(v[(a, b)].clone());
        }
    }
    let lookup = |list: &[(usize, usize, T)], key: (usize, usize)| {
        list.iter().find(|w| (w.0, w.1) == key).map_or_else(T::zero, |w| w.2.clone())
    };
    x.extend(net.sensor_edges().iter().map(|&e| lookup(sensor_weights, e)));
    x.extend(net.anchor_edges().iter().map(|&e| lookup(anchor_weights, e)));
    x
}

fn number_text(value: &Rational) -> String {
    terminating_decimal(value).unwrap_or_else(|| format_rational(value))
}

/// SDPA sparse text. `title` becomes a leading comment line.
pub fn write_sdpa(problem: &SdpProblem, title: &str) -> String {
    let mut out = String::new();
    for line in title.lines() {
        let _ = writeln!(out, "* {line}");
    }
    let _ = writeln!(out, "{}", problem.constraints.len());
    let _ = writeln!(out, "{}", problem.blocks.len());
    let blocks: Vec<String> = problem.blocks.iter().map(i64::to_string).collect();
    let _ = writeln!(out, "{}", blocks.join(" "));
    let c: Vec<String> = problem.rhs.iter().map(number_text).collect();
    let _ = writeln!(out, "{}", c.join(" "));
    let all = std::iter::once(&problem.objective).chain(&problem.constraints);
    for (matno, entries) in all.enumerate() {
        for e in entries {
            let _ = writeln!(out, "{matno} {} {} {} {}", e.block, e.row, e.col, number_text(&e.value));
        }
    }
    out
}

/// Parses SDPA sparse text. Comment lines start with `"` or `*`; the
/// separators `, ( ) { }` count as whitespace; anything after the expected
/// numbers on the three header lines is ignored. Entries are normalized to
/// the upper triangle; zeros are dropped and duplicates rejected.
pub fn parse_sdpa(text: &str) -> Result<SdpProblem, SdpError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.replace([',', '(', ')', '{', '}'], " ")))
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('"') && !t.starts_with('*')
        });
    let err = |line: usize, message: String| SdpError::Parse { line, message };
    let mut header = |what: &str| -> Result<(usize, String), SdpError> {
        lines.next().ok_or_else(|| err(0, format!("missing {what}")))
    };
    let (line, text_m) = header("mDIM")?;
    let m: usize = first_token(&text_m).parse().map_err(|_| err(line, "bad mDIM".into()))?;
    let (line, text_b) = header("nBLOCK")?;
    let nblock: usize = first_token(&text_b).parse().map_err(|_| err(line, "bad nBLOCK".into()))?;
    let (line, text_s) = header("block structure")?;
    let blocks: Vec<i64> = text_s
        .split_whitespace()
        .take(nblock)
        .map(|t| t.parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| err(line, "bad block structure".into()))?;
    if blocks.len() != nblock || blocks.contains(&0) {
        return Err(err(line, format!("expected {nblock} nonzero block sizes")));
    }
    let mut rhs = Vec::with_capacity(m);
    let mut last = line;
    while rhs.len() < m {
        let (line, text_c) = lines.next().ok_or_else(|| err(last, format!("expected {m} objective values")))?;
        for t in text_c.split_whitespace() {
            if rhs.len() == m {
                return Err(err(line, "too many objective values".into()));
            }
            rhs.push(parse_rational(t).map_err(|e| err(line, e))?);
        }
        last = line;
    }
    let mut matrices: Vec<BTreeMap<(usize, usize, usize), Rational>> = vec![BTreeMap::new(); m + 1];
    for (line, text_e) in lines {
        let tokens: Vec<&str> = text_e.split_whitespace().collect();
        if tokens.len() != 5 {
            return Err(err(line, format!("expected 5 fields, found {}", tokens.len())));
        }
        let int = |t: &str| t.parse::<usize>().map_err(|_| err(line, format!("bad index `{t}`")));
        let (matno, block, i, j) = (int(tokens[0])?, int(tokens[1])?, int(tokens[2])?, int(tokens[3])?);
        let value = parse_rational(tokens[4]).map_err(|e| err(line, e))?;
        if matno > m {
            return Err(err(line, format!("matrix number {matno} exceeds mDIM {m}")));
        }
        let key = (block, i.min(j), i.max(j));
        if matrices[matno].insert(key, value).is_some() {
            return Err(err(line, format!("duplicate entry {matno} {block} {} {}", key.1, key.2)));
        }
    }
    let mut entries = matrices.into_iter().map(|map| {
        map.into_iter()
            .filter(|(_, v)| *v != Rational::from_i64(0))
            .map(|((block, row, col), value)| SdpEntry { block, row, col, value })
            .collect::<Vec<_>>()
    });
    let objective = entries.next().unwrap_or_default();
    let problem = SdpProblem {
        blocks,
        objective,
        constraints: entries.collect(),
        rhs,
    };
    problem.check_indices()?;
    Ok(problem)
}

fn first_token(line: &str) -> &str {
    line.split_whitespace().next().unwrap_or("")
}

/// Dense certificate text: a `rows cols` header, then the entries.
pub fn parse_dense_matrix(text: &str) -> Result<Matrix<Rational>, SdpError> {
    let mut tokens = text
        .lines()
        .enumerate()
        .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)));
    let mut dim = |what: &str| -> Result<usize, SdpError> {
        let (line, t) = tokens.next().ok_or_else(|| SdpError::Parse { line: 1, message: format!("missing {what}") })?;
        t.parse().map_err(|_| SdpError::Parse { line, message: format!("bad {what} `{t}`") })
    };
    let rows = dim("row count")?;
    let cols = dim("column count")?;
    let mut data = Vec::with_capacity(rows * cols);
    for (line, t) in tokens {
        data.push(parse_rational(t).map_err(|message| SdpError::Parse { line, message })?);
    }
    if data.len() != rows * cols {
        return Err(SdpError::Parse {
            line: 0,
            message: format!("expected {} entries, found {}", rows * cols, data.len()),
        });
    }
    Ok(Matrix::from_vec(rows, cols, data))
}

pub fn write_dense_matrix<T: Scalar>(m: &Matrix<T>) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m
            .row(i)
            .iter()
            .map(|x| match x.to_rational() {
                Some(q) if T::BACKEND == numerics::Backend::Rational => format_rational(&q),
                _ => format!("{:e}", x.to_f64()),
            })
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub size: usize,
    /// Largest `|Fi . Y - ci|` relative to `max(1, |ci|)`.
    pub primal_residual: f64,
    /// 1-based index of the first violated constraint.
    pub first_violated: Option<usize>,
    pub primal_feasible: bool,
    pub primal_psd: bool,
    pub dual_psd: bool,
    /// `S = sum xi Fi - F0` has a solution `x`.
    pub dual_structured: bool,
    /// `c . x` for that solution.
    pub dual_objective: Option<f64>,
    /// `Y . S`.
    pub inner_product: f64,
    pub complementarity_ok: bool,
    pub primal_rank: usize,
    pub dual_rank: usize,
    /// `rank(Y) + rank(S) = size`.
    pub strict_complementarity_ok: bool,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.primal_feasible
            && self.primal_psd
            && self.dual_psd
            && self.dual_structured
            && self.complementarity_ok
            && self.strict_complementarity_ok
    }

    pub fn describe_failures(&self) -> String {
        let checks = [
            ("primal_feasible", self.primal_feasible),
            ("primal_psd", self.primal_psd),
            ("dual_psd", self.dual_psd),
            ("dual_structured", self.dual_structured),
            ("complementarity", self.complementarity_ok),
            ("strict_complementarity", self.strict_complementarity_ok),
        ];
        let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
        format!("failed checks: {}", failed.join(", "))
    }
}

/// Checks a primal-dual pair `(Y, S)` against a single-block problem.
pub fn check_certificate<T: Scalar>(
    y: &Matrix<T>,
    s: &Matrix<T>,
    problem: &SdpProblem,
    tol: &Tolerances,
) -> Result<CertificateReport, SdpError> {
    let size = problem.single_block()?;
    for (name, m) in [("Y", y), ("S", s)] {
        if m.rows() != size || m.cols() != size {
            return Err(SdpError::DimensionMismatch(format!(
                "{name} is {}x{}, the block is {size}x{size}",
                m.rows(),
                m.cols()
            )));
        }
    }
    let mut primal_residual = 0.0f64;
    let mut first_violated = None;
    for (i, (entries, c)) in problem.constraints.iter().zip(&problem.rhs).enumerate() {
        let r = SdpProblem::apply(entries, y) - &T::from_rational(c);
        let scale = numerics::Scalar::to_f64(c).abs().max(1.0);
        if !r.is_negligible(scale, tol.solve) && first_violated.is_none() {
            first_violated = Some(i + 1);
        }
        primal_residual = primal_residual.max(r.to_f64().abs() / scale);
    }
    let (primal_psd, primal_rank) = psd_rank(y, tol)?;
    let (dual_psd, dual_rank) = psd_rank(s, tol)?;

    let mut target = s.clone();
    for e in &problem.objective {
        let v = T::from_rational(&e.value);
        let (i, j) = (e.row - 1, e.col - 1);
        target[(i, j)] += &v;
        if i != j {
            target[(j, i)] += &v;
        }
    }
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for i in 0..size {
        for j in i..size {
            rows.push(i * size + j);
            b.push(target[(i, j)].clone());
        }
    }
    let m = problem.constraints.len();
    let mut system = Matrix::zeros(rows.len(), m);
    let position = |i: usize, j: usize| i * (2 * size - i + 1) / 2 + (j - i);
    for (q, entries) in problem.constraints.iter().enumerate() {
        for e in entries {
            system[(position(e.row - 1, e.col - 1), q)] += &T::from_rational(&e.value);
        }
    }
    let solved = numerics::solve_consistent(&system, &b, tol);
    let dual_structured = solved.is_some() && s.is_symmetric(tol);
    let dual_objective = solved.map(|x| {
        x.iter()
            .zip(&problem.rhs)
            .fold(T::zero(), |acc, (xi, c)| acc + &(xi.clone() * &T::from_rational(c)))
            .to_f64()
    });

    let inner = y.inner(s);
    let scale = y.max_abs().max(1.0) * s.max_abs().max(1.0) * size as f64;
    let complementarity_ok = inner.is_negligible(scale, tol.solve);
    Ok(CertificateReport {
        size,
        primal_residual,
        first_violated,
        primal_feasible: first_violated.is_none(),
        primal_psd,
        dual_psd,
        dual_structured,
        dual_objective,
        inner_product: inner.to_f64(),
        complementarity_ok,
        primal_rank,
        dual_rank,
        strict_complementarity_ok: primal_rank + dual_rank == size,
    })
}

fn psd_rank<T: Scalar>(m: &Matrix<T>, tol: &Tolerances) -> Result<(bool, usize), SdpError> {
    if !m.is_symmetric(tol) {
        return Ok((false, numerics::rank(m, tol)));
    }
    let (verdict, rank) = numerics::psd_and_rank(m, tol)?;
    Ok((verdict.psd, rank))
}
