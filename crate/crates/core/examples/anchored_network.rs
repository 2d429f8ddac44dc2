//! Builds a small sensor network, constructs its rank-`n` dual stress, and
//! checks the six optimality conditions, including an exactly zero duality
//! gap. Also shows the two-anchor network in the plane that cannot be
//! localized.
//!
//! ```text
//! cargo run --example anchored_network
//! ```

use lateration_stress::anchored::{anchored_stress, verify_anchored_stress};
use lateration_stress::framework::AnchoredNetwork;
use lateration_stress::graph::{validate_anchored_order, Graph};
use lateration_stress::numerics::{format_rational, Matrix, Rational, Tolerances};
use lateration_stress::stress::StressOptions;

fn int(rows: &[&[i64]]) -> Matrix<Rational> {
    Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x.into())).collect()).collect())
}

fn main() {
    let anchors = int(&[&[0, 4, 0], &[0, 0, 4]]);
    let sensors = int(&[&[1, 3, 2], &[1, 2, 3]]);
    // Sensor 1 hears all anchors; 2 and 3 hear two anchors and earlier sensors.
    let anchor_edges = [(0, 0), (1, 0), (2, 0), (1, 1), (2, 1), (0, 2), (2, 2)];
    let sensor_edges = [(0, 1), (0, 2), (1, 2)];
    let net = AnchoredNetwork::new(anchors, sensors, anchor_edges, sensor_edges, None).expect("valid network");

    let out = anchored_stress::<Rational>(&net, &StressOptions::default()).expect("construction");
    println!("dual stress matrix ({0}x{0}):", out.matrix.rows());
    for i in 0..out.matrix.rows() {
        let row: Vec<String> = out.matrix.row(i).iter().map(|x| format!("{:>10}", format_rational(x))).collect();
        println!("  {}", row.join(" "));
    }
    for (i, j, w) in &out.sensor_weights {
        println!("w[{},{}] = {}", i + 1, j + 1, format_rational(w));
    }
    for (k, j, w) in &out.anchor_weights {
        println!("wbar[anchor {}, sensor {}] = {}", k + 1, j + 1, format_rational(w));
    }
    let report = verify_anchored_stress(&out.matrix, &net, &Tolerances::default()).expect("verification");
    println!("rank {} of {}, gap {:?}, all checks passed: {}", report.rank, report.n, report.gap, report.passed());

    // Two anchors cannot seed a lateration in the plane.
    let graph = Graph::new(3, &[(0, 1), (0, 2), (1, 2)]);
    let v = validate_anchored_order(&graph, &[0, 1, 2], 2, 2);
    println!("two anchors, one sensor: valid ordering {} ({:?})", v.valid, v.failure);
}
