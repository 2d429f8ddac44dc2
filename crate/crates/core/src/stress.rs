//! Maximum-rank PSD stress matrices for lateration frameworks.
//!
//! The pipeline orders the vertices, builds a Gale matrix `L` (a structured
//! basis of the nullspace of `A`), forms the pre-stress `L L^T`, and then
//! purifies columns from last to first: each step adds a rank-one PSD term
//! `s s^T` with `A s = 0` that cancels the entries sitting on non-edges of
//! that column.
//!
//! Internally everything is computed in *position space*, i.e. with rows and
//! columns permuted into ordering sequence. Matrices handed out by
//! [`LaterationContext::to_vertex_space`] and [`compute_stress_matrix`] use
//! the original vertex labels.

use serde::Serialize;
use serde_json::{json, Value};

use crate::framework::{
    check_general_position, extended_position_matrix, ExtendedPositionMatrix, Framework, FrameworkError,
    GeneralPositionMode,
};
use crate::graph::{
    find_lateration_order, is_dplus1_tree, select_attachments, validate_lateration_order, Attachments, Graph,
    OrderFailure, SearchError, SingularAttachment, DEFAULT_SEARCH_BUDGET,
};
use crate::json::vector_value;
use crate::numerics::{self, Matrix, NumericsError, PsdVerdict, Scalar, Tolerances};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StressError {
    #[error(transparent)]
    Framework(#[from] FrameworkError),
    #[error("no lateration ordering found")]
    NotFound,
    #[error("ordering search exceeded its budget of {budget} states")]
    BudgetExhausted { budget: u64 },
    #[error("supplied ordering is not a lateration ordering: {failure:?}{}",
        failing_vertex.map(|v| format!(" at vertex {v}")).unwrap_or_default())]
    InvalidOrder {
        failure: OrderFailure,
        failing_vertex: Option<usize>,
    },
    #[error("singular system for vertex {vertex} at position {position}: subset {subset:?} is affinely dependent")]
    Singular {
        /// 1-based position in the ordering.
        position: usize,
        /// 1-based vertex.
        vertex: usize,
        /// 1-based vertices.
        subset: Vec<usize>,
    },
    #[error("points {subset:?} are affinely dependent")]
    NotGeneralPosition { subset: Vec<usize> },
    #[error("non-finite value produced while purifying position {position}")]
    NonFinite { position: usize },
    #[error("entry size {bits} bits at position {position} exceeds the limit of {limit} bits")]
    GrowthLimit { position: usize, bits: u64, limit: u64 },
    #[error("internal verification failed: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

impl From<SearchError> for StressError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::NotFound => StressError::NotFound,
            SearchError::BudgetExhausted { budget } => StressError::BudgetExhausted { budget },
        }
    }
}

impl From<SingularAttachment> for StressError {
    fn from(e: SingularAttachment) -> Self {
        StressError::Singular {
            position: e.position + 1,
            vertex: e.vertex + 1,
            subset: e.subset_one_based(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StressOptions {
    pub tol: Tolerances,
    /// Leave columns whose non-edge entries are already zero untouched.
    pub skip_clean_columns: bool,
    pub general_position: GeneralPositionMode,
    /// 0-based ordering overriding the one stored in the framework.
    pub order: Option<Vec<usize>>,
    pub search_budget: u64,
    /// Abort once an entry of `s` needs more bits than this (rational backend).
    pub max_entry_bits: Option<u64>,
    /// Record `rank(S)` after every step. Costs one rank computation per step.
    pub record_ranks: bool,
    /// Run [`verify_stress`] on the result and fail if it does not pass.
    pub verify: bool,
}

impl Default for StressOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            skip_clean_columns: true,
            general_position: GeneralPositionMode::Lazy,
            order: None,
            search_budget: DEFAULT_SEARCH_BUDGET,
            max_entry_bits: None,
            record_ranks: false,
            verify: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepAction {
    Skip,
    Modify,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<T: Scalar> {
    /// 0-based position in the ordering.
    pub position: usize,
    pub vertex: usize,
    pub action: StepAction,
    /// The update vector in position space, when the column was modified.
    pub s: Option<Vec<T>>,
    pub rank_after: Option<usize>,
    pub max_bits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurificationTrace<T: Scalar> {
    pub steps: Vec<StepRecord<T>>,
}

impl<T: Scalar> PurificationTrace<T> {
    pub fn modifications(&self) -> usize {
        self.steps.iter().filter(|s| s.action == StepAction::Modify).count()
    }

    /// `(1-based position, action)` pairs in processing order.
    pub fn summary(&self) -> Vec<(usize, StepAction)> {
        self.steps.iter().map(|s| (s.position + 1, s.action)).collect()
    }

    /// JSON with 1-based labels and `s` in vertex space.
    pub fn to_json(&self, perm: &[usize]) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|st| {
                let s = st.s.as_ref().map(|s| {
                    let mut v = s.clone();
                    for (p, x) in s.iter().enumerate() {
                        v[perm[p]] = x.clone();
                    }
                    vector_value(&v)
                });
                json!({
                    "position": st.position + 1,
                    "vertex": st.vertex + 1,
                    "action": st.action,
                    "s": s,
                    "rank_after": st.rank_after,
                })
            })
            .collect();
        json!({ "modifications": self.modifications(), "steps": steps })
    }
}

/// Callback seeing each step record and the position-space matrix after it.
pub type StepObserver<'a, T> = &'a mut dyn FnMut(&StepRecord<T>, &Matrix<T>);

/// Outcome of one purification step.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnOutcome<T> {
    Skipped,
    Modified { s: Vec<T> },
}

/// Everything the construction needs, in position space.
#[derive(Debug, Clone)]
pub struct LaterationContext<T: Scalar> {
    dim: usize,
    perm: Vec<usize>,
    /// `A` with columns in ordering sequence.
    a: Matrix<T>,
    /// Adjacency relabelled by position.
    graph: Graph,
    /// Attachment positions for each position `k >= d+1`, ascending.
    attachments: Vec<Vec<usize>>,
    exact_attachment: bool,
    tree: bool,
    reselected: Vec<usize>,
    tol: Tolerances,
}

impl<T: Scalar> LaterationContext<T> {
    pub fn new(framework: &Framework, opts: &StressOptions) -> Result<Self, StressError> {
        let tol = opts.tol;
        let ext: ExtendedPositionMatrix<T> = extended_position_matrix(framework, &tol)?;
        if opts.general_position == GeneralPositionMode::Full {
            let verdict = check_general_position(framework, GeneralPositionMode::Full);
            if let Some(subset) = verdict.failing_subset {
                return Err(StressError::NotGeneralPosition { subset });
            }
        }
        let d = framework.dim();
        let vgraph = Graph::new(framework.len(), framework.edges());
        let perm = match opts.order.as_deref().or(framework.order()) {
            Some(perm) => {
                let v = validate_lateration_order(&vgraph, perm, d);
                if !v.valid {
                    return Err(StressError::InvalidOrder {
                        failure: v.failure.expect("failure recorded"),
                        failing_vertex: v.failing_vertex,
                    });
                }
                perm.to_vec()
            }
            None => find_lateration_order(&vgraph, d, opts.search_budget)?,
        };
        let validation = validate_lateration_order(&vgraph, &perm, d);
        let tree = is_dplus1_tree(&vgraph, &perm, d);
        let att: Attachments = select_attachments(ext.matrix(), &vgraph, &perm, &tol)?;
        let n = perm.len();
        let mut pos_of = vec![0; n];
        for (p, &v) in perm.iter().enumerate() {
            pos_of[v] = p;
        }
        let pos_edges: Vec<(usize, usize)> =
            framework.edges().iter().map(|&(a, b)| (pos_of[a], pos_of[b])).collect();
        let attachments = att
            .iter()
            .map(|(_, set)| {
                let mut ps: Vec<usize> = set.iter().map(|&v| pos_of[v]).collect();
                ps.sort_unstable();
                ps
            })
            .collect();
        Ok(Self {
            dim: d,
            a: ext.reordered(&perm).matrix().clone(),
            graph: Graph::new(n, &pos_edges),
            perm,
            attachments,
            exact_attachment: validation.exact_attachment,
            tree,
            reselected: att.reselected,
            tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// `perm[p]` is the vertex at position `p`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// `A` in position space.
    pub fn extended(&self) -> &Matrix<T> {
        &self.a
    }

    pub fn is_dplus1_tree(&self) -> bool {
        self.tree
    }

    /// `|N(k)| = d + 1` for every later vertex.
    pub fn exact_attachment(&self) -> bool {
        self.exact_attachment
    }

    /// Positions where the first candidate attachment was singular.
    pub fn reselected(&self) -> &[usize] {
        &self.reselected
    }

    /// Attachment positions used for position `k >= d+1`.
    pub fn attachment(&self, k: usize) -> &[usize] {
        &self.attachments[k - self.dim - 1]
    }

    /// Whether positions `i` and `k` are joined by an edge.
    pub fn has_edge(&self, i: usize, k: usize) -> bool {
        self.graph.has_edge(i, k)
    }

    /// Converts a position-space square matrix to vertex labels.
    pub fn to_vertex_space(&self, m: &Matrix<T>) -> Matrix<T> {
        m.unpermuted(&self.perm)
    }

    /// Converts a vertex-labelled square matrix to position space.
    pub fn to_position_space(&self, m: &Matrix<T>) -> Matrix<T> {
        m.permuted(&self.perm)
    }

    /// Rows of a position-space `L` relabelled by vertex.
    pub fn gale_rows_to_vertex_space(&self, l: &Matrix<T>) -> Matrix<T> {
        let mut out = Matrix::zeros(l.rows(), l.cols());
        for p in 0..l.rows() {
            for c in 0..l.cols() {
                out[(self.perm[p], c)] = l[(p, c)].clone();
            }
        }
        out
    }

    fn solve_attachment(&self, k: usize, rhs: &[T]) -> Result<Vec<T>, StressError> {
        let sel = self.attachment(k);
        let m = self.a.select_columns(sel);
        numerics::solve_square(&m, rhs, &self.tol).map_err(|e| match e {
            NumericsError::SingularMatrix { .. } => StressError::Singular {
                position: k + 1,
                vertex: self.perm[k] + 1,
                subset: sel.iter().map(|&p| self.perm[p] + 1).collect(),
            },
            other => other.into(),
        })
    }

    /// `n x (n-d-1)` Gale matrix in position space: column `c` belongs to
    /// position `p = d+1+c`, has `1` at row `p`, zeros below, and its
    /// attachment entries solve `sum_i L_ic a_i = -a_p`.
    pub fn gale_matrix(&self) -> Result<Matrix<T>, StressError> {
        let (n, d1) = (self.len(), self.dim + 1);
        let mut l = Matrix::zeros(n, n - d1);
        for p in d1..n {
            let c = p - d1;
            let rhs: Vec<T> = self.a.column(p).into_iter().map(|x| -x).collect();
            let x = self.solve_attachment(p, &rhs)?;
            for (&i, xi) in self.attachment(p).iter().zip(x) {
                l[(i, c)] = xi;
            }
            l[(p, c)] = T::one();
        }
        Ok(l)
    }

    /// Column `k` of `S` (position space) still has a nonzero entry on a
    /// non-edge above the diagonal.
    pub fn column_is_clean(&self, s: &Matrix<T>, k: usize) -> bool {
        (0..k).all(|i| self.graph.has_edge(i, k) || s[(i, k)].is_zero())
    }

    /// One purification step on position `k` (0-based, `k >= d+2`).
    pub fn purify_column(&self, s: &mut Matrix<T>, k: usize, skip_clean: bool) -> Result<ColumnOutcome<T>, StressError> {
        if skip_clean && self.column_is_clean(s, k) {
            return Ok(ColumnOutcome::Skipped);
        }
        let n = self.len();
        let d1 = self.dim + 1;
        let mut v = vec![T::zero(); n];
        v[k] = T::one();
        let mut rhs: Vec<T> = self.a.column(k);
        for i in 0..k {
            if !self.graph.has_edge(i, k) && !s[(i, k)].is_zero() {
                v[i] = -s[(i, k)].clone();
                for r in 0..d1 {
                    let t = v[i].clone() * &self.a[(r, i)];
                    rhs[r] += &t;
                }
            }
        }
        let rhs: Vec<T> = rhs.into_iter().map(|x| -x).collect();
        let x = self.solve_attachment(k, &rhs)?;
        for (&i, xi) in self.attachment(k).iter().zip(x) {
            v[i] = xi;
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(StressError::NonFinite { position: k + 1 });
        }
        s.add_outer_self(&v);
        Ok(ColumnOutcome::Modified { s: v })
    }

    /// Sweeps positions `n-1` down to `d+2`. `observer` sees each record and
    /// the position-space matrix after the step.
    pub fn purify(
        &self,
        mut s: Matrix<T>,
        opts: &StressOptions,
        mut observer: Option<StepObserver<'_, T>>,
    ) -> Result<(Matrix<T>, PurificationTrace<T>), StressError> {
        let n = self.len();
        let mut steps = Vec::new();
        for k in (self.dim + 2..n).rev() {
            let outcome = self.purify_column(&mut s, k, opts.skip_clean_columns)?;
            let (action, vec) = match outcome {
                ColumnOutcome::Skipped => (StepAction::Skip, None),
                ColumnOutcome::Modified { s } => (StepAction::Modify, Some(s)),
            };
            let max_bits = vec.as_ref().map_or(0, |v| v.iter().map(Scalar::size_bits).max().unwrap_or(0));
            if let Some(limit) = opts.max_entry_bits {
                if max_bits > limit {
                    return Err(StressError::GrowthLimit {
                        position: k + 1,
                        bits: max_bits,
                        limit,
                    });
                }
            }
            let rank_after = opts.record_ranks.then(|| numerics::rank(&s, &self.tol));
            let record = StepRecord {
                position: k,
                vertex: self.perm[k],
                action,
                s: vec,
                rank_after,
                max_bits,
            };
            if let Some(obs) = observer.as_mut() {
                obs(&record, &s);
            }
            steps.push(record);
        }
        Ok((s, PurificationTrace { steps }))
    }
}

/// `L L^T`, accumulated column by column over each column's support.
pub fn pre_stress<T: Scalar>(l: &Matrix<T>) -> Matrix<T> {
    let mut s = Matrix::zeros(l.rows(), l.rows());
    for c in 0..l.cols() {
        s.add_outer_self(&l.column(c));
    }
    s
}

/// Orthogonal projector `I - A^T (A A^T)^{-1} A` onto the nullspace of `A`.
pub fn projection_prestress<T: Scalar>(
    a: &ExtendedPositionMatrix<T>,
    tol: &Tolerances,
) -> Result<Matrix<T>, StressError> {
    let a = a.matrix();
    let n = a.cols();
    let gram = a.matmul(&a.transpose())?;
    // X = (A A^T)^{-1} A, one column at a time.
    let mut x = Matrix::zeros(a.rows(), n);
    for j in 0..n {
        let col = numerics::solve_square(&gram, &a.column(j), tol)?;
        for (r, v) in col.into_iter().enumerate() {
            x[(r, j)] = v;
        }
    }
    Ok(Matrix::identity(n).sub(&a.transpose().matmul(&x)?))
}

#[derive(Debug, Clone)]
pub struct StressOutput<T: Scalar> {
    /// Final stress matrix, vertex labels.
    pub stress: Matrix<T>,
    /// Gale matrix, rows by vertex.
    pub gale: Matrix<T>,
    pub trace: PurificationTrace<T>,
    /// 0-based ordering used.
    pub order: Vec<usize>,
    pub report: Option<StressReport>,
    pub is_dplus1_tree: bool,
}

/// Full pipeline: ordering, Gale matrix, pre-stress, purification and (by
/// default) verification.
pub fn compute_stress_matrix<T: Scalar>(
    framework: &Framework,
    opts: &StressOptions,
) -> Result<StressOutput<T>, StressError> {
    let ctx = LaterationContext::<T>::new(framework, opts)?;
    let l = ctx.gale_matrix()?;
    let (s, trace) = ctx.purify(pre_stress(&l), opts, None)?;
    let stress = ctx.to_vertex_space(&s);
    let report = if opts.verify {
        let report = verify_stress(&stress, framework, &opts.tol)?;
        if !report.passed() {
            return Err(StressError::VerificationFailed(report.describe_failures()));
        }
        Some(report)
    } else {
        None
    };
    Ok(StressOutput {
        gale: ctx.gale_rows_to_vertex_space(&l),
        stress,
        trace,
        order: ctx.perm().to_vec(),
        report,
        is_dplus1_tree: ctx.is_dplus1_tree(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StressReport {
    pub n: usize,
    pub dim: usize,
    pub symmetric_ok: bool,
    /// `A S = 0`.
    pub null_ok: bool,
    /// `S_ij = 0` off the edge set.
    pub offedge_ok: bool,
    /// 1-based first non-edge pair carrying a nonzero entry.
    pub first_offedge: Option<(usize, usize)>,
    pub psd_ok: bool,
    pub psd_witness: Option<f64>,
    pub rank: usize,
    pub expected_rank: usize,
    pub rank_ok: bool,
    pub gram_rank: usize,
    /// `rank(A^T A) + rank(S) = n`.
    pub complementarity_ok: bool,
    /// `sum over edges of -S_ij ||p_i - p_j||^2 = 0`.
    pub dual_objective_ok: bool,
    pub dual_objective: f64,
}

impl StressReport {
    pub fn passed(&self) -> bool {
        self.symmetric_ok
            && self.null_ok
            && self.offedge_ok
            && self.psd_ok
            && self.rank_ok
            && self.complementarity_ok
            && self.dual_objective_ok
    }

    /// `null`, `offedge` and `psd` hold (the matrix is a PSD stress matrix,
    /// possibly of low rank).
    pub fn basic_ok(&self) -> bool {
        self.symmetric_ok && self.null_ok && self.offedge_ok && self.psd_ok
    }

    pub fn describe_failures(&self) -> String {
        let checks = [
            ("symmetric", self.symmetric_ok),
            ("null", self.null_ok),
            ("offedge", self.offedge_ok),
            ("psd", self.psd_ok),
            ("rank", self.rank_ok),
            ("complementarity", self.complementarity_ok),
            ("dual_objective", self.dual_objective_ok),
        ];
        let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
        format!("failed checks: {}", failed.join(", "))
    }
}

/// Componentwise check `|(M X)_ij| <= tol * sum_k |M_ik| |X_kj|` (exact zero
/// on the rational backend).
pub(crate) fn product_vanishes<T: Scalar>(m: &Matrix<T>, x: &Matrix<T>, tol: f64) -> Result<bool, NumericsError> {
    let prod = m.matmul(x)?;
    for i in 0..prod.rows() {
        for j in 0..prod.cols() {
            let scale: f64 = (0..m.cols()).map(|k| m[(i, k)].to_f64().abs() * x[(k, j)].to_f64().abs()).sum();
            if !prod[(i, j)].is_negligible(scale, tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Checks that `s` is a maximum-rank PSD stress matrix for `framework`.
pub fn verify_stress<T: Scalar>(
    s: &Matrix<T>,
    framework: &Framework,
    tol: &Tolerances,
) -> Result<StressReport, StressError> {
    let n = framework.len();
    let d = framework.dim();
    if s.rows() != n || s.cols() != n {
        return Err(NumericsError::DimensionMismatch(format!(
            "stress matrix is {}x{}, framework has {n} vertices",
            s.rows(),
            s.cols()
        ))
        .into());
    }
    let a: Matrix<T> = framework.extended_matrix();
    let symmetric_ok = s.is_symmetric(tol);
    let null_ok = product_vanishes(&a, s, tol.solve)?;
    let graph = Graph::new(n, framework.edges());
    let scale = s.max_abs();
    let mut first_offedge = None;
    'outer: for i in 0..n {
        for j in i + 1..n {
            if !graph.has_edge(i, j) && !s[(i, j)].is_negligible(scale, tol.solve) {
                first_offedge = Some((i + 1, j + 1));
                break 'outer;
            }
        }
    }
    let (psd, rank) = if symmetric_ok {
        numerics::psd_and_rank(s, tol)?
    } else {
        (
            PsdVerdict {
                psd: false,
                witness: None,
                witness_index: None,
            },
            numerics::rank(s, tol),
        )
    };
    // rank(A^T A) = rank(A); the thin factor is far cheaper.
    let gram_rank = numerics::rank(&a, tol);
    let expected_rank = n - d - 1;
    let mut objective = T::zero();
    let mut magnitude = 0.0;
    for &(i, j) in framework.edges() {
        let dsq = T::from_rational(&framework.squared_length(i, j));
        let term = -(s[(i, j)].clone()) * &dsq;
        magnitude += term.to_f64().abs();
        objective += &term;
    }
    Ok(StressReport {
        n,
        dim: d,
        symmetric_ok,
        null_ok,
        offedge_ok: first_offedge.is_none(),
        first_offedge,
        psd_ok: psd.psd,
        psd_witness: psd.witness,
        rank,
        expected_rank,
        rank_ok: rank == expected_rank,
        gram_rank,
        complementarity_ok: gram_rank + rank == n,
        dual_objective_ok: objective.is_negligible(magnitude.max(1.0), tol.solve),
        dual_objective: objective.to_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rational;

    fn line_framework(edges: &[(usize, usize)]) -> Framework {
        let pos = Matrix::from_rows(vec![[0, 1, 2].iter().map(|&x| Rational::from_i64(x)).collect()]);
        Framework::new(pos, edges.iter().copied(), None).unwrap()
    }

    #[test]
    fn projector_of_three_collinear_points() {
        let f = line_framework(&[(0, 1), (1, 2), (0, 2)]);
        let a = extended_position_matrix::<Rational>(&f, &Tolerances::default()).unwrap();
        let p = projection_prestress(&a, &Tolerances::default()).unwrap();
        let u = [1, -2, 1];
        let expected = Matrix::from_fn(3, 3, |i, j| Rational::from_i64(u[i] * u[j]) / Rational::from_i64(6));
        assert_eq!(p, expected);
    }

    #[test]
    fn projector_of_simplex_is_zero() {
        let pos = Matrix::from_rows(vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let a = ExtendedPositionMatrix::from_matrix(
            Matrix::from_rows(vec![pos.row(0).to_vec(), pos.row(1).to_vec(), vec![1.0; 3]]),
            &Tolerances::default(),
        )
        .unwrap();
        let p = projection_prestress(&a, &Tolerances::default()).unwrap();
        assert!(p.max_abs() < 1e-12);
    }

    #[test]
    fn gale_column_on_a_line() {
        let f = line_framework(&[(0, 1), (1, 2), (0, 2)]);
        let ctx = LaterationContext::<Rational>::new(&f, &StressOptions::default()).unwrap();
        let l = ctx.gale_matrix().unwrap();
        assert_eq!(l.column(0), [1, -2, 1].map(Rational::from_i64).to_vec());
        let s = pre_stress(&l);
        assert_eq!(s[(1, 1)], Rational::from_i64(4));
    }

    #[test]
    fn smallest_complete_graph_needs_no_purification() {
        let f = line_framework(&[(0, 1), (1, 2), (0, 2)]);
        let out = compute_stress_matrix::<f64>(&f, &StressOptions::default()).unwrap();
        assert!(out.trace.steps.is_empty());
        assert!(out.report.unwrap().passed());
    }

    #[test]
    fn zero_matrix_is_a_trivial_stress() {
        let f = line_framework(&[(0, 1), (1, 2), (0, 2)]);
        let r = verify_stress(&Matrix::<Rational>::zeros(3, 3), &f, &Tolerances::default()).unwrap();
        assert!(r.basic_ok() && !r.rank_ok && !r.complementarity_ok);
    }

    #[test]
    fn purification_on_a_line_with_a_missing_edge() {
        // Vertices 0..4 on the line; vertex 4 attaches to 1 and 3 only.
        let pos = Matrix::from_rows(vec![[0, 1, 3, 7, 15].iter().map(|&x| Rational::from_i64(x)).collect()]);
        let edges = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (1, 4), (3, 4)];
        let f = Framework::new(pos, edges, None).unwrap();
        for skip in [true, false] {
            let opts = StressOptions {
                skip_clean_columns: skip,
                record_ranks: true,
                ..StressOptions::default()
            };
            let out = compute_stress_matrix::<Rational>(&f, &opts).unwrap();
            assert!(out.report.as_ref().unwrap().passed());
            assert!(out.trace.steps.iter().all(|s| s.rank_after == Some(3)));
        }
    }
}
