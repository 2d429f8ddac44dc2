use super::{Matrix, NumericsError, PsdVerdict, Tolerances};

fn inf_norm_vec(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn inf_norm(m: &Matrix<f64>) -> f64 {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn residual_ok(m: &Matrix<f64>, x: &[f64], b: &[f64], tol: f64) -> bool {
    let r: Vec<f64> = m.mul_vec(x).iter().zip(b).map(|(ax, bi)| ax - bi).collect();
    inf_norm_vec(&r) <= tol * (inf_norm(m) * inf_norm_vec(x) + inf_norm_vec(b))
}

/// Partial-pivot LU solve.
pub(super) fn solve_square(
    m: &Matrix<f64>,
    b: &[f64],
    tol: &Tolerances,
) -> Result<Vec<f64>, NumericsError> {
    let n = m.rows();
    let scale = m.max_abs();
    let mut a = m.to_rows();
    let mut x = b.to_vec();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap_or(c);
        let pivot = a[p][c].abs();
        if pivot.is_nan() || pivot <= tol.rank * scale {
            return Err(NumericsError::SingularMatrix { column: c });
        }
        a.swap(c, p);
        x.swap(c, p);
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            if f == 0.0 {
                continue;
            }
            for j in c..n {
                a[i][j] -= f * a[c][j];
            }
            x[i] -= f * x[c];
        }
    }
    for i in (0..n).rev() {
        let mut acc = x[i];
        for j in i + 1..n {
            acc -= a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
    }
    if !residual_ok(m, &x, b, tol.solve) {
        return Err(NumericsError::SingularMatrix { column: n.saturating_sub(1) });
    }
    Ok(x)
}

pub(super) fn solve_consistent(m: &Matrix<f64>, b: &[f64], tol: &Tolerances) -> Option<Vec<f64>> {
    let (rows, cols) = (m.rows(), m.cols());
    let scale = m.max_abs().max(inf_norm_vec(b));
    let mut a: Vec<Vec<f64>> = (0..rows)
        .map(|i| {
            let mut row = m.row(i).to_vec();
            row.push(b[i]);
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let p = (r..rows).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() <= tol.rank * scale {
            continue;
        }
        a.swap(r, p);
        let piv = a[r][c];
        for v in a[r].iter_mut() {
            *v /= piv;
        }
        for i in 0..rows {
            if i != r {
                let f = a[i][c];
                if f != 0.0 {
                    for j in c..=cols {
                        a[i][j] -= f * a[r][j];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut x = vec![0.0; cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = a[i][cols];
    }
    residual_ok(m, &x, b, tol.solve).then_some(x)
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(m: &Matrix<f64>) -> Result<Vec<f64>, NumericsError> {
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (mut diag, mut off) = tridiagonalize(m);
    implicit_ql(&mut diag, &mut off)?;
    diag.sort_by(f64::total_cmp);
    Ok(diag)
}

/// Householder reduction to tridiagonal form; returns (diagonal, subdiagonal)
/// with the subdiagonal stored in `off[1..]`.
fn tridiagonalize(m: &Matrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = m.rows();
    let mut a = m.to_rows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = a[i][..=l].iter().map(|x| x.abs()).sum();
            if scale == 0.0 {
                e[i] = a[i][l];
            } else {
                for k in 0..=l {
                    a[i][k] /= scale;
                    h += a[i][k] * a[i][k];
                }
                let f = a[i][l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i][l] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j][k] * a[i][k];
                    }
                    for k in j + 1..=l {
                        g += a[k][j] * a[i][k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i][j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[i][j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j][k] -= f * e[k] + g * a[i][k];
                    }
                }
            }
        } else {
            e[i] = a[i][l];
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = a[i][i];
    }
    (d, e)
}

fn implicit_ql(d: &mut [f64], e: &mut [f64]) -> Result<(), NumericsError> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(NumericsError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Singular values via one-sided Jacobi on the thinner orientation,
/// descending.
pub fn singular_values(m: &Matrix<f64>) -> Vec<f64> {
    let work = if m.cols() > m.rows() { m.transpose() } else { m.clone() };
    let (rows, cols) = (work.rows(), work.cols());
    // Column-major copy.
    let mut u: Vec<Vec<f64>> = (0..cols).map(|j| work.column(j)).collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for k in 0..rows {
                    alpha += u[p][k] * u[p][k];
                    beta += u[q][k] * u[q][k];
                    gamma += u[p][k] * u[q][k];
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..rows {
                    let up = u[p][k];
                    let uq = u[q][k];
                    u[p][k] = c * up - s * uq;
                    u[q][k] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = u.iter().map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub(super) fn rank(m: &Matrix<f64>, tol: &Tolerances) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    let values: Vec<f64> = if m.is_symmetric(tol) {
        match symmetric_eigenvalues(m) {
            Ok(ev) => {
                let mut abs: Vec<f64> = ev.iter().map(|x| x.abs()).collect();
                abs.sort_by(|a, b| b.total_cmp(a));
                abs
            }
            Err(_) => singular_values(m),
        }
    } else {
        singular_values(m)
    };
    let threshold = tol.rank * values.first().copied().unwrap_or(0.0).max(1.0);
    values.iter().filter(|&&s| s > threshold).count()
}

pub(super) fn psd_check(m: &Matrix<f64>, tol: &Tolerances) -> Result<PsdVerdict, NumericsError> {
    if !m.all_finite() {
        return Ok(PsdVerdict {
            psd: false,
            witness: Some(f64::NAN),
            witness_index: None,
        });
    }
    let ev = symmetric_eigenvalues(m)?;
    let Some(&lowest) = ev.first() else {
        return Ok(PsdVerdict::pass(None));
    };
    let largest = ev.iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(PsdVerdict {
        psd: lowest >= -tol.psd * largest.max(1.0),
        witness: Some(lowest),
        witness_index: None,
    })
}

/// One eigendecomposition for both the verdict and the rank.
pub(super) fn psd_and_rank(m: &Matrix<f64>, tol: &Tolerances) -> Result<(PsdVerdict, usize), NumericsError> {
    if !m.all_finite() {
        return Ok((psd_check(m, tol)?, rank(m, tol)));
    }
    let ev = symmetric_eigenvalues(m)?;
    let largest = ev.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let lowest = ev.first().copied();
    let verdict = PsdVerdict {
        psd: lowest.is_none_or(|l| l >= -tol.psd * largest.max(1.0)),
        witness: lowest,
        witness_index: None,
    };
    let rank = ev.iter().filter(|x| x.abs() > tol.rank * largest.max(1.0)).count();
    Ok((verdict, rank))
}
