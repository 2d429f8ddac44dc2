//! Rank-`n` optimal dual stress matrices for anchored sensor networks.
//!
//! The dual variable lives on `d + n` indices: the first `d` pair with the
//! identity block of `Z = [[I, P], [P^T, P^T P]]` and index `d + j` with
//! sensor `j`. Starting from `[[P P^T, -P], [-P^T, I]]`, every sensor column
//! is rewritten from last to first by a rank-one update `s s^T` with
//! `[I P] s = 0`. Each update fixes the column to the dual structure
//!
//! ```text
//! S[1:d, d+j]  = -sum_k wbar_kj pbar_k
//! S[d+i, d+j]  = -w_ij            (zero off the sensor edge set)
//! S[d+j, d+j]  =  sum_i w_ij + sum_k wbar_kj
//! ```
//!
//! with `d + 1` unknown weights per sensor, one per lateration predecessor.
//! There is no skip rule: every column is processed.

use serde::Serialize;
use serde_json::{json, Value};

use crate::framework::{check_general_position, AnchoredNetwork, Framework, GeneralPositionMode};
use crate::graph::{find_anchored_order, select_attachments, validate_anchored_order, Graph};
use crate::json::{scalar_value, vector_value};
use crate::numerics::{self, Matrix, NumericsError, Scalar, Tolerances};
use crate::stress::{product_vanishes, StressError, StressOptions};

/// `[[P P^T, -P], [-P^T, I]]` for a `d x n` sensor matrix.
pub fn anchored_prestress<T: Scalar>(p: &Matrix<T>) -> Matrix<T> {
    let (d, n) = (p.rows(), p.cols());
    let mut s = Matrix::zeros(d + n, d + n);
    for j in 0..n {
        let mut col = vec![T::zero(); d + n];
        for r in 0..d {
            col[r] = -p[(r, j)].clone();
        }
        col[d + j] = T::one();
        s.add_outer_self(&col);
    }
    s
}

/// A predecessor of a sensor in the lateration ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "index")]
pub enum Predecessor {
    /// 0-based anchor index.
    Anchor(usize),
    /// 0-based sensor index.
    Sensor(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchoredStep<T: Scalar> {
    /// 0-based sensor label.
    pub sensor: usize,
    /// Update vector in output labelling (top block, then sensors).
    pub s: Vec<T>,
    pub weights: Vec<(Predecessor, T)>,
    pub max_bits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchoredStress<T: Scalar> {
    /// `(d+n) x (d+n)` dual stress matrix, sensors in label order.
    pub matrix: Matrix<T>,
    /// `(i, j, w_ij)` with `i < j`, 0-based sensors.
    pub sensor_weights: Vec<(usize, usize, T)>,
    /// `(k, j, wbar_kj)`, 0-based anchor and sensor.
    pub anchor_weights: Vec<(usize, usize, T)>,
    /// Dual variable of the identity-pinning constraints:
    /// `S[1:d,1:d] - sum wbar_kj pbar_k pbar_k^T`.
    pub v: Matrix<T>,
    pub steps: Vec<AnchoredStep<T>>,
    /// 0-based combined ordering (anchors `0..m`, sensor `j` is `m + j`).
    pub order: Vec<usize>,
}

impl<T: Scalar> AnchoredStress<T> {
    pub fn trace_json(&self) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|st| {
                let weights: Vec<Value> = st
                    .weights
                    .iter()
                    .map(|(p, w)| match p {
                        Predecessor::Anchor(k) => json!({"anchor": k + 1, "weight": scalar_value(w)}),
                        Predecessor::Sensor(i) => json!({"sensor": i + 1, "weight": scalar_value(w)}),
                    })
                    .collect();
                json!({"sensor": st.sensor + 1, "s": vector_value(&st.s), "weights": weights})
            })
            .collect();
        json!({ "modifications": self.steps.len(), "steps": steps })
    }
}

fn combined_framework(net: &AnchoredNetwork) -> Result<Framework, StressError> {
    Ok(Framework::new(net.combined_positions(), net.combined_edges(), None)?)
}

/// Runs the construction over every sensor, last to first.
pub fn anchored_stress<T: Scalar>(
    net: &AnchoredNetwork,
    opts: &StressOptions,
) -> Result<AnchoredStress<T>, StressError> {
    let tol = opts.tol;
    let (d, m, n) = (net.dim(), net.anchor_count(), net.sensor_count());
    let combined = combined_framework(net)?;
    if opts.general_position == GeneralPositionMode::Full {
        if let Some(subset) = check_general_position(&combined, GeneralPositionMode::Full).failing_subset {
            return Err(StressError::NotGeneralPosition { subset });
        }
    }
    let graph = Graph::new(m + n, combined.edges());
    let perm = match opts.order.as_deref().or(net.order()) {
        Some(perm) => {
            let v = validate_anchored_order(&graph, perm, m, d);
            if !v.valid {
                return Err(StressError::InvalidOrder {
                    failure: v.failure.expect("failure recorded"),
                    failing_vertex: v.failing_vertex,
                });
            }
            perm.to_vec()
        }
        None => find_anchored_order(&graph, m, d)?,
    };
    let a: Matrix<T> = combined.extended_matrix();
    let att = select_attachments(&a, &graph, &perm, &tol)?;

    // Sensors in ordering sequence: `seq[l]` is the sensor at rank `l`.
    let seq: Vec<usize> = perm[m..].iter().map(|&v| v - m).collect();
    let mut rank_of = vec![0; n];
    for (l, &j) in seq.iter().enumerate() {
        rank_of[j] = l;
    }
    // Sensor matrix in sequence order.
    let sensors: Matrix<T> = net.sensors().convert();
    let p = sensors.select_columns(&seq);
    let anchors: Matrix<T> = net.anchors().convert();
    let mut s = anchored_prestress(&p);
    let mut steps = Vec::with_capacity(n);
    let mut anchor_weights = Vec::new();

    for l in (0..n).rev() {
        let c = d + l;
        let preds: Vec<Predecessor> = att
            .at(m + l)
            .iter()
            .map(|&v| if v < m { Predecessor::Anchor(v) } else { Predecessor::Sensor(rank_of[v - m]) })
            .collect();
        // Columns (pbar_k; 1) or (p_i; 1) of the (d+1)-system.
        let system = Matrix::from_fn(d + 1, d + 1, |r, q| {
            if r == d {
                return T::one();
            }
            match preds[q] {
                Predecessor::Anchor(k) => anchors[(r, k)].clone(),
                Predecessor::Sensor(i) => p[(r, i)].clone(),
            }
        });
        let mut rhs = vec![T::zero(); d + 1];
        for r in 0..d {
            let mut v = p[(r, l)].clone() - &s[(r, c)];
            for i in 0..l {
                if !s[(d + i, c)].is_zero() {
                    let t = s[(d + i, c)].clone() * &p[(r, i)];
                    v -= &t;
                }
            }
            rhs[r] = v;
        }
        let mut diag = T::one() + &s[(c, c)];
        for i in l + 1..n {
            diag += &s[(d + i, c)];
        }
        rhs[d] = diag;
        let w = numerics::solve_square(&system, &rhs, &tol).map_err(|e| match e {
            NumericsError::SingularMatrix { .. } => StressError::Singular {
                position: m + l + 1,
                vertex: m + seq[l] + 1,
                subset: att.at(m + l).iter().map(|v| v + 1).collect(),
            },
            other => other.into(),
        })?;

        let mut vec = vec![T::zero(); d + n];
        for r in 0..d {
            vec[r] = -s[(r, c)].clone();
        }
        for i in 0..l {
            vec[d + i] = -s[(d + i, c)].clone();
        }
        vec[c] = T::one();
        for (pred, wq) in preds.iter().zip(&w) {
            match *pred {
                Predecessor::Anchor(k) => {
                    for r in 0..d {
                        let t = wq.clone() * &anchors[(r, k)];
                        vec[r] -= &t;
                    }
                    anchor_weights.push((k, seq[l], wq.clone()));
                }
                Predecessor::Sensor(i) => vec[d + i] -= wq,
            }
        }
        if vec.iter().any(|x| !x.is_finite()) {
            return Err(StressError::NonFinite { position: m + l + 1 });
        }
        let max_bits = vec.iter().map(Scalar::size_bits).max().unwrap_or(0);
        if let Some(limit) = opts.max_entry_bits {
            if max_bits > limit {
                return Err(StressError::GrowthLimit {
                    position: m + l + 1,
                    bits: max_bits,
                    limit,
                });
            }
        }
        s.add_outer_self(&vec);
        steps.push(AnchoredStep {
            sensor: seq[l],
            s: relabel_vector(&vec, d, &seq),
            weights: preds
                .iter()
                .zip(w)
                .map(|(pred, wq)| match *pred {
                    Predecessor::Sensor(i) => (Predecessor::Sensor(seq[i]), wq),
                    other => (other, wq),
                })
                .collect(),
            max_bits,
        });
    }

    let mut full = Vec::with_capacity(d + n);
    full.extend(0..d);
    full.extend(seq.iter().map(|&j| d + j));
    let matrix = s.unpermuted(&full);
    let sensor_weights = sensor_weights_of(&matrix, d, net.sensor_edges());
    anchor_weights.sort_by_key(|&(k, j, _)| (k, j));
    let v = dual_v(&matrix, &anchors, &anchor_weights, d);
    let result = AnchoredStress {
        matrix,
        sensor_weights,
        anchor_weights,
        v,
        steps,
        order: perm,
    };
    if opts.verify {
        let report = verify_anchored_stress(&result.matrix, net, &tol)?;
        if !report.passed() {
            return Err(StressError::VerificationFailed(report.describe_failures()));
        }
    }
    Ok(result)
}

fn relabel_vector<T: Scalar>(v: &[T], d: usize, seq: &[usize]) -> Vec<T> {
    let mut out = v.to_vec();
    for (l, &j) in seq.iter().enumerate() {
        out[d + j] = v[d + l].clone();
    }
    out
}

fn sensor_weights_of<T: Scalar>(s: &Matrix<T>, d: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize, T)> {
    edges.iter().map(|&(i, j)| (i, j, -s[(d + i, d + j)].clone())).collect()
}

fn dual_v<T: Scalar>(s: &Matrix<T>, anchors: &Matrix<T>, weights: &[(usize, usize, T)], d: usize) -> Matrix<T> {
    let mut v = Matrix::from_fn(d, d, |r, q| s[(r, q)].clone());
    for (k, _, w) in weights {
        for r in 0..d {
            for q in 0..d {
                let t = w.clone() * &anchors[(r, *k)] * &anchors[(q, *k)];
                v[(r, q)] -= &t;
            }
        }
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchoredReport {
    pub n: usize,
    pub dim: usize,
    pub symmetric_ok: bool,
    /// (a) `Z S = 0`.
    pub null_ok: bool,
    /// (b)
    pub psd_ok: bool,
    pub psd_witness: Option<f64>,
    /// (c)
    pub rank: usize,
    pub rank_ok: bool,
    /// (d) zero sensor-sensor entries off the edge set.
    pub offedge_ok: bool,
    pub first_offedge: Option<(usize, usize)>,
    /// (e) anchor weights recoverable and diagonal equation holds.
    pub weights_ok: bool,
    /// 1-based sensor whose column fails recovery.
    pub first_weight_failure: Option<usize>,
    /// (f) `tr(V) + sum w d^2 + sum wbar dbar^2 = 0`.
    pub gap_ok: bool,
    pub gap: Option<f64>,
}

impl AnchoredReport {
    pub fn passed(&self) -> bool {
        self.symmetric_ok
            && self.null_ok
            && self.psd_ok
            && self.rank_ok
            && self.offedge_ok
            && self.weights_ok
            && self.gap_ok
    }

    pub fn describe_failures(&self) -> String {
        let checks = [
            ("symmetric", self.symmetric_ok),
            ("null", self.null_ok),
            ("psd", self.psd_ok),
            ("rank", self.rank_ok),
            ("offedge", self.offedge_ok),
            ("weights", self.weights_ok),
            ("gap", self.gap_ok),
        ];
        let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
        format!("failed checks: {}", failed.join(", "))
    }
}

/// The six dual-optimality checks for an anchored stress matrix.
pub fn verify_anchored_stress<T: Scalar>(
    s: &Matrix<T>,
    net: &AnchoredNetwork,
    tol: &Tolerances,
) -> Result<AnchoredReport, StressError> {
    let (d, n) = (net.dim(), net.sensor_count());
    if s.rows() != d + n || s.cols() != d + n {
        return Err(NumericsError::DimensionMismatch(format!(
            "dual matrix is {}x{}, network needs {}x{}",
            s.rows(),
            s.cols(),
            d + n,
            d + n
        ))
        .into());
    }
    let symmetric_ok = s.is_symmetric(tol);
    let z: Matrix<T> = net.gram_matrix();
    let null_ok = product_vanishes(&z, s, tol.solve)?;
    let (psd, rank) = if symmetric_ok {
        let (p, r) = numerics::psd_and_rank(s, tol)?;
        (Some(p), r)
    } else {
        (None, numerics::rank(s, tol))
    };
    let scale = s.max_abs().max(1.0);

    let graph = Graph::new(n, net.sensor_edges());
    let mut first_offedge = None;
    'outer: for i in 0..n {
        for j in i + 1..n {
            if !graph.has_edge(i, j) && !s[(d + i, d + j)].is_negligible(scale, tol.solve) {
                first_offedge = Some((i + 1, j + 1));
                break 'outer;
            }
        }
    }

    let anchors: Matrix<T> = net.anchors().convert();
    let mut anchor_weights = Vec::new();
    let mut first_weight_failure = None;
    for j in 0..n {
        let ks: Vec<usize> = net.anchor_edges().iter().filter(|e| e.1 == j).map(|e| e.0).collect();
        let sensor_sum = (0..n)
            .filter(|&i| i != j)
            .fold(T::zero(), |acc, i| acc - &s[(d + i, d + j)]);
        let system = Matrix::from_fn(d + 1, ks.len(), |r, q| {
            if r < d {
                -anchors[(r, ks[q])].clone()
            } else {
                T::one()
            }
        });
        let mut rhs: Vec<T> = (0..d).map(|r| s[(r, d + j)].clone()).collect();
        rhs.push(s[(d + j, d + j)].clone() - &sensor_sum);
        let solved = if ks.is_empty() {
            rhs.iter().all(|x| x.is_negligible(scale, tol.solve)).then(Vec::new)
        } else {
            numerics::solve_consistent(&system, &rhs, tol)
        };
        match solved {
            Some(w) => anchor_weights.extend(ks.iter().zip(w).map(|(&k, wk)| (k, j, wk))),
            None => {
                first_weight_failure = Some(j + 1);
                break;
            }
        }
    }

    let (gap_ok, gap) = if first_weight_failure.is_none() {
        let v = dual_v(s, &anchors, &anchor_weights, d);
        let mut gap = v.trace();
        let mut magnitude = (0..d).map(|r| v[(r, r)].to_f64().abs()).sum::<f64>();
        for &(i, j) in net.sensor_edges() {
            let term = -(s[(d + i, d + j)].clone()) * &T::from_rational(&net.sensor_distance_sq(i, j));
            magnitude += term.to_f64().abs();
            gap += &term;
        }
        for (k, j, w) in &anchor_weights {
            let term = w.clone() * &T::from_rational(&net.anchor_distance_sq(*k, *j));
            magnitude += term.to_f64().abs();
            gap += &term;
        }
        (gap.is_negligible(magnitude.max(1.0), tol.solve), Some(gap.to_f64()))
    } else {
        (false, None)
    };

    Ok(AnchoredReport {
        n,
        dim: d,
        symmetric_ok,
        null_ok,
        psd_ok: psd.as_ref().is_some_and(|p| p.psd),
        psd_witness: psd.and_then(|p| p.witness),
        rank,
        rank_ok: rank == n,
        offedge_ok: first_offedge.is_none(),
        first_offedge,
        weights_ok: first_weight_failure.is_none(),
        first_weight_failure,
        gap_ok,
        gap,
    })
}
