//! Shared fixtures, printed reference tables and independent oracles.
#![allow(dead_code, clippy::needless_range_loop)]

use lateration_stress::framework::{read_framework, Framework};
use lateration_stress::numerics::{parse_rational, round_decimal, Matrix, Rational, Scalar};
use num_traits::{Signed, Zero};

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> Framework {
    read_framework(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
}

pub fn table(text: &str) -> Vec<Vec<&str>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.split_whitespace().collect())
        .collect()
}

pub const EX1_L: &str = "
    1.5000   5.0000  -2.0000        0
   -0.5000        0   3.0000        0
   -2.0000  -8.0000        0  -1.6000
    1.0000   2.0000  -2.0000   1.4000
         0   1.0000        0  -0.8000
         0        0   1.0000        0
         0        0        0   1.0000";

pub const EX1_S7: &str = "
   31.2500  -6.7500 -43.0000  15.5000   5.0000  -2.0000        0
   -6.7500   9.2500   1.0000  -6.5000        0   3.0000        0
  -43.0000   1.0000  70.5600 -20.2400  -6.7200        0  -1.6000
   15.5000  -6.5000 -20.2400  10.9600   0.8800  -2.0000   1.4000
    5.0000        0  -6.7200   0.8800   1.6400        0  -0.8000
   -2.0000   3.0000        0  -2.0000        0   1.0000        0
         0        0  -1.6000   1.4000  -0.8000        0   1.0000";

pub const EX2_L: &str = "
    1.5000   5.0000        0  -1.2500
   -0.5000        0  -1.0000        0
   -2.0000  -8.0000        0   1.0000
    1.0000   2.0000   2.0000        0
         0   1.0000  -2.0000        0
         0        0   1.0000  -0.7500
         0        0        0   1.0000";

pub const EX2_S7: &str = "
   28.8125  -0.7500 -44.2500  11.5000   5.0000   0.9375  -1.2500
   -0.7500   1.2500   1.0000  -2.5000   2.0000  -1.0000        0
  -44.2500   1.0000  69.0000 -18.0000  -8.0000  -0.7500   1.0000
   11.5000  -2.5000 -18.0000   9.0000  -2.0000   2.0000        0
    5.0000   2.0000  -8.0000  -2.0000   5.0000  -2.0000        0
    0.9375  -1.0000  -0.7500   2.0000  -2.0000   1.5625  -0.7500
   -1.2500        0   1.0000        0        0  -0.7500   1.0000";

pub const EX2_S6_VEC: &str = "-0.9375 -0.0625 0.7500 0.8750 -1.6250 1.0000 0";

pub const EX2_S5: &str = "
   29.6914  -0.6914 -44.9531  10.6797   6.5234        0  -1.2500
   -0.6914   1.2539   0.9531  -2.5547   2.1016  -1.0625        0
  -44.9531   0.9531  69.5625 -17.3438  -9.2188        0   1.0000
   10.6797  -2.5547 -17.3438   9.7656  -3.4219   2.8750        0
    6.5234   2.1016  -9.2188  -3.4219   7.6406  -3.6250        0
         0  -1.0625        0   2.8750  -3.6250   2.5625  -0.7500
   -1.2500        0   1.0000        0        0  -0.7500   1.0000";

pub const EX2_S5_VEC: &str = "11.3047 -2.1016 -16.4063 6.2031 1.0000 0 0";

pub const EX2_S4: &str = "
  157.4874 -24.4489 -230.4207  80.8041  17.8281        0  -1.2500
  -24.4489   5.6705   35.4319 -15.5909        0  -1.0625        0
 -230.4207  35.4319  338.7275 -119.1138 -25.6250        0   1.0000
   80.8041 -15.5909 -119.1138  48.2444   2.7813   2.8750        0
   17.8281        0  -25.6250   2.7813   8.6406  -3.6250        0
         0  -1.0625        0   2.8750  -3.6250   2.5625  -0.7500
   -1.2500        0   1.0000        0        0  -0.7500   1.0000";

/// How a printed 4-decimal table is matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Printed {
    /// Every printed value is the exact value.
    Exact,
    /// Printed values are the exact values rounded half away from zero.
    Rounded,
}

/// Compares a computed matrix with a printed table. Rational results are
/// compared exactly (or via their exact 4-decimal rounding); float results
/// entrywise within `tol`. Returns the first mismatch.
pub fn compare<T: Scalar>(m: &Matrix<T>, printed: &str, how: Printed, tol: f64) -> Result<(), String> {
    let t = table(printed);
    if t.len() != m.rows() || t.iter().any(|r| r.len() != m.cols()) {
        return Err(format!("shape {}x{} vs printed {}x{}", m.rows(), m.cols(), t.len(), t[0].len()));
    }
    for (i, row) in t.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            entry_matches(&m[(i, j)], cell, how, tol).map_err(|e| format!("({}, {}): {e}", i + 1, j + 1))?;
        }
    }
    Ok(())
}

pub fn compare_vec<T: Scalar>(v: &[T], printed: &str, how: Printed, tol: f64) -> Result<(), String> {
    let cells: Vec<&str> = printed.split_whitespace().collect();
    if cells.len() != v.len() {
        return Err(format!("length {} vs printed {}", v.len(), cells.len()));
    }
    for (i, (x, cell)) in v.iter().zip(cells).enumerate() {
        entry_matches(x, cell, how, tol).map_err(|e| format!("[{}]: {e}", i + 1))?;
    }
    Ok(())
}

fn entry_matches<T: Scalar>(x: &T, cell: &str, how: Printed, tol: f64) -> Result<(), String> {
    let printed = parse_rational(cell).unwrap();
    match x.to_rational() {
        Some(exact) if T::BACKEND == lateration_stress::numerics::Backend::Rational => {
            let ok = match how {
                Printed::Exact => exact == printed,
                Printed::Rounded => round_decimal(&exact, 4) == printed,
            };
            if ok {
                Ok(())
            } else {
                Err(format!("computed {exact} vs printed {cell}"))
            }
        }
        _ => {
            let diff = (x.to_f64() - Scalar::to_f64(&printed)).abs();
            if diff <= tol {
                Ok(())
            } else {
                Err(format!("computed {} vs printed {cell} (diff {diff:e})", x.to_f64()))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Oracles. Deliberately naive and independent of the library kernels.
// ---------------------------------------------------------------------------

/// Exact rank by plain Gaussian elimination over the rationals.
pub fn oracle_rank(m: &Matrix<Rational>) -> usize {
    let mut a = m.to_rows();
    let (rows, cols) = (m.rows(), m.cols());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(rank, p);
        for i in rank + 1..rows {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] / &a[rank][c];
            for j in c..cols {
                let t = &f * &a[rank][j];
                a[i][j] -= t;
            }
        }
        rank += 1;
    }
    rank
}

/// Exact PSD test by unpivoted symmetric elimination: a negative pivot fails,
/// and a zero pivot must come with a zero row.
pub fn oracle_psd(m: &Matrix<Rational>) -> bool {
    let n = m.rows();
    let mut a = m.to_rows();
    for k in 0..n {
        if a[k][k].is_negative() {
            return false;
        }
        if a[k][k].is_zero() {
            if (k + 1..n).any(|j| !a[k][j].is_zero()) {
                return false;
            }
            continue;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &a[k][k];
            for j in k + 1..n {
                let t = &f * &a[k][j];
                a[i][j] -= t;
            }
        }
    }
    true
}

/// Cyclic Jacobi eigenvalues, ascending.
pub fn oracle_eigenvalues(m: &Matrix<f64>) -> Vec<f64> {
    let n = m.rows();
    let mut a = m.to_rows();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let total: f64 = a.iter().flatten().map(|x| x * x).sum();
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

pub fn rational(text: &str) -> Rational {
    parse_rational(text).unwrap()
}

pub fn int_matrix(rows: &[&[i64]]) -> Matrix<Rational> {
    Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| Rational::from_i64(x)).collect()).collect())
}
