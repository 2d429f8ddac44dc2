//! Problem instances: bar frameworks and anchored sensor networks.
//!
//! Vertices are stored 0-based in memory. Every external surface (files,
//! reports, error messages) is 1-based.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::numerics::{self, format_rational, parse_rational, Matrix, Rational, Scalar, Tolerances};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FrameworkError {
    #[error("parse error{}: {field}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse {
        line: Option<usize>,
        field: String,
        message: String,
    },
    #[error("index error: {0}")]
    Index(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("positions do not affinely span R^{dim}: extended position matrix has rank {rank}, need {}", dim + 1)]
    DegenerateSpan { dim: usize, rank: usize },
}

impl FrameworkError {
    fn parse(field: impl Into<String>, message: impl Into<String>) -> Self {
        FrameworkError::Parse {
            line: None,
            field: field.into(),
            message: message.into(),
        }
    }
}

/// A bar framework `(G, P)` in `R^d`, optionally with a lateration ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct Framework {
    dim: usize,
    positions: Matrix<Rational>,
    edges: Vec<(usize, usize)>,
    order: Option<Vec<usize>>,
}

impl Framework {
    /// `positions` is `d x n` (one column per vertex). Edges are 0-based and
    /// get normalized to `i < j` and sorted.
    pub fn new(
        positions: Matrix<Rational>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        order: Option<Vec<usize>>,
    ) -> Result<Self, FrameworkError> {
        let dim = positions.rows();
        let n = positions.cols();
        if n == 0 {
            return Err(FrameworkError::Invalid("framework has no vertices".into()));
        }
        if dim > n - 1 {
            return Err(FrameworkError::Invalid(format!(
                "dimension {dim} exceeds n - 1 = {}",
                n - 1
            )));
        }
        let edges = normalize_edges(edges, n, n, true, "edge")?;
        if let Some(order) = &order {
            check_permutation(order, n)?;
        }
        Ok(Self {
            dim,
            positions,
            edges,
            order,
        })
    }

    pub fn from_points(
        points: &[Vec<Rational>],
        edges: impl IntoIterator<Item = (usize, usize)>,
        order: Option<Vec<usize>>,
    ) -> Result<Self, FrameworkError> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(FrameworkError::Invalid("points have mixed dimensions".into()));
        }
        let positions = Matrix::from_fn(dim, points.len(), |r, j| points[j][r].clone());
        Self::new(positions, edges, order)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.positions.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.cols() == 0
    }

    /// `d x n` position matrix.
    pub fn positions(&self) -> &Matrix<Rational> {
        &self.positions
    }

    pub fn point(&self, v: usize) -> Vec<Rational> {
        self.positions.column(v)
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn order(&self) -> Option<&[usize]> {
        self.order.as_deref()
    }

    pub fn with_order(mut self, order: Option<Vec<usize>>) -> Result<Self, FrameworkError> {
        if let Some(order) = &order {
            check_permutation(order, self.len())?;
        }
        self.order = order;
        Ok(self)
    }

    /// Exact squared edge length `||p_i - p_j||^2`.
    pub fn squared_length(&self, i: usize, j: usize) -> Rational {
        squared_distance(&self.positions, i, &self.positions, j)
    }

    /// The `(d+1) x n` matrix `[P; 1^T]` without the rank check.
    pub fn extended_matrix<T: Scalar>(&self) -> Matrix<T> {
        let (d, n) = (self.dim, self.len());
        Matrix::from_fn(d + 1, n, |r, j| {
            if r < d {
                T::from_rational(&self.positions[(r, j)])
            } else {
                T::one()
            }
        })
    }
}

pub(crate) fn squared_distance(
    a: &Matrix<Rational>,
    i: usize,
    b: &Matrix<Rational>,
    j: usize,
) -> Rational {
    (0..a.rows()).fold(Rational::zero(), |acc, r| {
        let diff = &a[(r, i)] - &b[(r, j)];
        acc + &diff * &diff
    })
}

/// `A = [P; 1^T]`, guaranteed to have full row rank `d + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedPositionMatrix<T: Scalar> {
    matrix: Matrix<T>,
}

impl<T: Scalar> ExtendedPositionMatrix<T> {
    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows() - 1
    }

    pub fn len(&self) -> usize {
        self.matrix.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.cols() == 0
    }

    /// Column `a_i = (p_i; 1)`.
    pub fn column(&self, i: usize) -> Vec<T> {
        self.matrix.column(i)
    }

    /// Columns of `A` reordered so position `p` holds vertex `perm[p]`.
    pub fn reordered(&self, perm: &[usize]) -> Self {
        Self {
            matrix: self.matrix.select_columns(perm),
        }
    }

    /// Wraps a matrix already known to be an extended position matrix.
    pub fn from_matrix(matrix: Matrix<T>, tol: &Tolerances) -> Result<Self, FrameworkError> {
        let dim = matrix.rows().saturating_sub(1);
        if matrix.rows() == 0 || (0..matrix.cols()).any(|j| !matrix[(dim, j)].is_one()) {
            return Err(FrameworkError::Invalid("last row of A must be all ones".into()));
        }
        let rank = numerics::rank(&matrix, tol);
        if rank < dim + 1 {
            return Err(FrameworkError::DegenerateSpan { dim, rank });
        }
        Ok(Self { matrix })
    }
}

pub fn extended_position_matrix<T: Scalar>(
    framework: &Framework,
    tol: &Tolerances,
) -> Result<ExtendedPositionMatrix<T>, FrameworkError> {
    ExtendedPositionMatrix::from_matrix(framework.extended_matrix(), tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneralPositionMode {
    /// Scan every `(d+1)`-subset.
    Full,
    /// Rely on singular systems being reported by the pipeline.
    #[default]
    Lazy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneralPositionVerdict {
    pub general: bool,
    /// 1-based vertices of the first affinely dependent subset found.
    pub failing_subset: Option<Vec<usize>>,
    pub checked: bool,
}

/// Tests that no `d+1` of the points are affinely dependent. The scan is
/// exact regardless of backend.
pub fn check_general_position(framework: &Framework, mode: GeneralPositionMode) -> GeneralPositionVerdict {
    if mode == GeneralPositionMode::Lazy {
        return GeneralPositionVerdict {
            general: true,
            failing_subset: None,
            checked: false,
        };
    }
    let a: Matrix<Rational> = framework.extended_matrix();
    let failing = first_dependent_subset(&a, framework.dim() + 1, None);
    GeneralPositionVerdict {
        general: failing.is_none(),
        failing_subset: failing.map(|s| s.iter().map(|v| v + 1).collect()),
        checked: true,
    }
}

/// Lexicographically first `size`-subset of columns that is singular.
pub(crate) fn first_dependent_subset(
    a: &Matrix<Rational>,
    size: usize,
    within: Option<&[usize]>,
) -> Option<Vec<usize>> {
    let pool: Vec<usize> = within.map_or_else(|| (0..a.cols()).collect(), <[usize]>::to_vec);
    let mut found = None;
    for_each_subset(pool.len(), size, &mut |idx| {
        let cols: Vec<usize> = idx.iter().map(|&i| pool[i]).collect();
        let sub = a.select_columns(&cols);
        if numerics::rank(&sub, &Tolerances::default()) < size {
            found = Some(cols);
            return false;
        }
        true
    });
    found
}

/// Visits k-subsets of `0..n` in lexicographic order until `f` returns false.
pub(crate) fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        if idx[i] == i + n - k {
            return;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// A sensor network: `m` anchors with known positions and `n` sensors.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchoredNetwork {
    dim: usize,
    anchors: Matrix<Rational>,
    sensors: Matrix<Rational>,
    /// (anchor k, sensor j), 0-based, sorted.
    anchor_edges: Vec<(usize, usize)>,
    /// (sensor i, sensor j) with i < j, 0-based, sorted.
    sensor_edges: Vec<(usize, usize)>,
    /// Ordering over the combined points; anchors are indices `0..m`.
    order: Option<Vec<usize>>,
}

impl AnchoredNetwork {
    pub fn new(
        anchors: Matrix<Rational>,
        sensors: Matrix<Rational>,
        anchor_edges: impl IntoIterator<Item = (usize, usize)>,
        sensor_edges: impl IntoIterator<Item = (usize, usize)>,
        order: Option<Vec<usize>>,
    ) -> Result<Self, FrameworkError> {
        let dim = anchors.rows();
        if sensors.rows() != dim && sensors.cols() > 0 {
            return Err(FrameworkError::Invalid("anchors and sensors differ in dimension".into()));
        }
        let sensors = if sensors.cols() == 0 { Matrix::zeros(dim, 0) } else { sensors };
        let (m, n) = (anchors.cols(), sensors.cols());
        if m < dim + 1 {
            return Err(FrameworkError::Invalid(format!(
                "{m} anchors in R^{dim}; at least {} are required",
                dim + 1
            )));
        }
        let anchor_edges = normalize_edges(anchor_edges, m, n, false, "anchor edge")?;
        let sensor_edges = normalize_edges(sensor_edges, n, n, true, "sensor edge")?;
        if let Some(order) = &order {
            check_permutation(order, m + n)?;
            let mut head: Vec<usize> = order[..m].to_vec();
            head.sort_unstable();
            if head != (0..m).collect::<Vec<_>>() {
                return Err(FrameworkError::Invalid(
                    "the first m entries of an anchored ordering must be the anchors".into(),
                ));
            }
        }
        Ok(Self {
            dim,
            anchors,
            sensors,
            anchor_edges,
            sensor_edges,
            order,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn anchor_count(&self) -> usize {
        self.anchors.cols()
    }

    pub fn sensor_count(&self) -> usize {
        self.sensors.cols()
    }

    pub fn anchors(&self) -> &Matrix<Rational> {
        &self.anchors
    }

    pub fn sensors(&self) -> &Matrix<Rational> {
        &self.sensors
    }

    pub fn anchor_edges(&self) -> &[(usize, usize)] {
        &self.anchor_edges
    }

    pub fn sensor_edges(&self) -> &[(usize, usize)] {
        &self.sensor_edges
    }

    pub fn order(&self) -> Option<&[usize]> {
        self.order.as_deref()
    }

    pub fn anchor_distance_sq(&self, k: usize, j: usize) -> Rational {
        squared_distance(&self.anchors, k, &self.sensors, j)
    }

    pub fn sensor_distance_sq(&self, i: usize, j: usize) -> Rational {
        squared_distance(&self.sensors, i, &self.sensors, j)
    }

    /// All `m + n` points as one `d x (m+n)` matrix, anchors first.
    pub fn combined_positions(&self) -> Matrix<Rational> {
        let m = self.anchor_count();
        Matrix::from_fn(self.dim, m + self.sensor_count(), |r, j| {
            if j < m {
                self.anchors[(r, j)].clone()
            } else {
                self.sensors[(r, j - m)].clone()
            }
        })
    }

    /// Edges of the combined graph: anchors form a clique (their mutual
    /// distances are known), plus every measured edge.
    pub fn combined_edges(&self) -> Vec<(usize, usize)> {
        let m = self.anchor_count();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                edges.push((i, j));
            }
        }
        edges.extend(self.anchor_edges.iter().map(|&(k, j)| (k, m + j)));
        edges.extend(self.sensor_edges.iter().map(|&(i, j)| (m + i, m + j)));
        edges.sort_unstable();
        edges
    }

    /// `Z = [[I, P], [P^T, P^T P]]`.
    pub fn gram_matrix<T: Scalar>(&self) -> Matrix<T> {
        let (d, n) = (self.dim, self.sensor_count());
        let p: Matrix<T> = self.sensors.convert();
        let ip = Matrix::from_fn(d, d + n, |r, c| {
            if c < d {
                if r == c { T::one() } else { T::zero() }
            } else {
                p[(r, c - d)].clone()
            }
        });
        ip.transpose().matmul(&ip).expect("conformable")
    }
}

/// Either kind of instance read from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Framework(Framework),
    Anchored(AnchoredNetwork),
}

fn normalize_edges(
    edges: impl IntoIterator<Item = (usize, usize)>,
    left: usize,
    right: usize,
    symmetric: bool,
    what: &str,
) -> Result<Vec<(usize, usize)>, FrameworkError> {
    let mut set = BTreeSet::new();
    for (a, b) in edges {
        if a >= left || b >= right {
            return Err(FrameworkError::Index(format!(
                "{what} ({}, {}) out of range",
                a + 1,
                b + 1
            )));
        }
        let pair = if symmetric {
            if a == b {
                return Err(FrameworkError::Invalid(format!("self-loop at vertex {}", a + 1)));
            }
            (a.min(b), a.max(b))
        } else {
            (a, b)
        };
        if !set.insert(pair) {
            return Err(FrameworkError::Invalid(format!(
                "duplicate {what} ({}, {})",
                pair.0 + 1,
                pair.1 + 1
            )));
        }
    }
    Ok(set.into_iter().collect())
}

fn check_permutation(order: &[usize], n: usize) -> Result<(), FrameworkError> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(FrameworkError::Invalid(format!(
            "ordering has {} entries, expected {n}",
            order.len()
        )));
    }
    for &v in order {
        if v >= n {
            return Err(FrameworkError::Index(format!("ordering entry {} out of range", v + 1)));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(FrameworkError::Invalid(format!("ordering repeats vertex {}", v + 1)));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    dim: usize,
    positions: Vec<Vec<Value>>,
    #[serde(default)]
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    anchors: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    anchor_edges: Option<Vec<[usize; 2]>>,
}

/// Parses a JSON number or a `"p/q"` string exactly.
pub(crate) fn value_to_rational(value: &Value, field: &str) -> Result<Rational, FrameworkError> {
    let text = match value {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        other => return Err(FrameworkError::parse(field, format!("expected a number, found {other}"))),
    };
    parse_rational(&text).map_err(|m| FrameworkError::parse(field, m))
}

pub(crate) fn rational_to_value(value: &Rational) -> Value {
    if value.is_integer() {
        // arbitrary_precision keeps big integers exact.
        serde_json::from_str(&value.numer().to_string()).expect("integer literal")
    } else {
        Value::String(format_rational(value))
    }
}

fn one_based(pairs: &[[usize; 2]], field: &str) -> Result<Vec<(usize, usize)>, FrameworkError> {
    pairs
        .iter()
        .enumerate()
        .map(|(idx, &[a, b])| {
            if a == 0 || b == 0 {
                Err(FrameworkError::Index(format!("{field}[{idx}]: indices are 1-based")))
            } else {
                Ok((a - 1, b - 1))
            }
        })
        .collect()
}

pub fn read_instance(text: &str) -> Result<Instance, FrameworkError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| FrameworkError::Parse {
        line: Some(e.line()),
        field: "document".into(),
        message: e.to_string(),
    })?;
    let mut points = Vec::with_capacity(file.positions.len());
    for (i, p) in file.positions.iter().enumerate() {
        if p.len() != file.dim {
            return Err(FrameworkError::parse(
                format!("positions[{i}]"),
                format!("expected {} coordinates, found {}", file.dim, p.len()),
            ));
        }
        let coords = p
            .iter()
            .enumerate()
            .map(|(r, v)| value_to_rational(v, &format!("positions[{i}][{r}]")))
            .collect::<Result<Vec<_>, _>>()?;
        points.push(coords);
    }
    let order = match &file.order {
        Some(o) => Some(
            o.iter()
                .map(|&v| {
                    v.checked_sub(1)
                        .ok_or_else(|| FrameworkError::Index("order: indices are 1-based".into()))
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    let edges = one_based(&file.edges, "edges")?;
    let dim = file.dim;
    let column_matrix = |pts: &[Vec<Rational>]| Matrix::from_fn(dim, pts.len(), |r, j| pts[j][r].clone());
    match file.anchors {
        None => {
            if file.anchor_edges.is_some() {
                return Err(FrameworkError::parse("anchor_edges", "present without `anchors`"));
            }
            Framework::new(column_matrix(&points), edges, order).map(Instance::Framework)
        }
        Some(m) => {
            if m > points.len() {
                return Err(FrameworkError::parse("anchors", "more anchors than positions"));
            }
            let anchor_edges = file
                .anchor_edges
                .as_deref()
                .ok_or_else(|| FrameworkError::parse("anchor_edges", "required when `anchors` is present"))?;
            let anchor_edges = one_based(anchor_edges, "anchor_edges")?;
            AnchoredNetwork::new(
                column_matrix(&points[..m]),
                column_matrix(&points[m..]),
                anchor_edges,
                edges,
                order,
            )
            .map(Instance::Anchored)
        }
    }
}

/// Canonical JSON: sorted edges, integers as numbers, other values as `"p/q"`.
pub fn write_instance(instance: &Instance) -> String {
    let to_pairs = |edges: &[(usize, usize)]| edges.iter().map(|&(a, b)| [a + 1, b + 1]).collect::<Vec<_>>();
    let points = |m: &Matrix<Rational>| -> Vec<Vec<Value>> {
        (0..m.cols())
            .map(|j| (0..m.rows()).map(|r| rational_to_value(&m[(r, j)])).collect())
            .collect()
    };
    let file = match instance {
        Instance::Framework(f) => InstanceFile {
            dim: f.dim(),
            positions: points(f.positions()),
            edges: to_pairs(f.edges()),
            order: f.order().map(|o| o.iter().map(|v| v + 1).collect()),
            anchors: None,
            anchor_edges: None,
        },
        Instance::Anchored(net) => InstanceFile {
            dim: net.dim(),
            positions: points(&net.combined_positions()),
            edges: to_pairs(net.sensor_edges()),
            order: net.order().map(|o| o.iter().map(|v| v + 1).collect()),
            anchors: Some(net.anchor_count()),
            anchor_edges: Some(to_pairs(net.anchor_edges())),
        },
    };
    let mut text = serde_json::to_string_pretty(&file).expect("serializable");
    text.push('\n');
    text
}

pub fn read_framework(text: &str) -> Result<Framework, FrameworkError> {
    match read_instance(text)? {
        Instance::Framework(f) => Ok(f),
        Instance::Anchored(_) => Err(FrameworkError::parse("anchors", "expected a plain framework")),
    }
}

pub fn write_framework(framework: &Framework) -> String {
    write_instance(&Instance::Framework(framework.clone()))
}
