//! Reproduces the two seven-vertex planar examples: the Gale matrix, the
//! pre-stress, and the purified stress matrix, exactly and in floating point.
//!
//! ```text
//! cargo run --example golden_examples
//! ```

use lateration_stress::framework::read_framework;
use lateration_stress::numerics::{format_rational, Matrix, Rational, Scalar};
use lateration_stress::stress::{compute_stress_matrix, pre_stress, LaterationContext, StressOptions};

fn show<T: Scalar>(title: &str, m: &Matrix<T>) {
    println!("{title}");
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{:10.4}", x.to_f64())).collect();
        println!("  {}", row.join(""));
    }
}

fn main() {
    for (name, text) in [
        ("first example", include_str!("../fixtures/ex1.json")),
        ("second example", include_str!("../fixtures/ex2.json")),
    ] {
        println!("=== {name} ===");
        let f = read_framework(text).expect("fixture parses");
        let ctx = LaterationContext::<Rational>::new(&f, &StressOptions::default()).expect("lateration ordering");
        let l = ctx.gale_matrix().expect("nonsingular attachments");
        show("Gale matrix L", &l);
        show("pre-stress L L^T", &pre_stress(&l));

        let out = compute_stress_matrix::<Rational>(&f, &StressOptions::default()).expect("certified");
        for (position, action) in out.trace.summary() {
            println!("position {position}: {action:?}");
        }
        show("stress matrix", &out.stress);
        let report = out.report.expect("verified");
        println!("rank {} (expected {}), all checks passed: {}", report.rank, report.expected_rank, report.passed());
        println!("exact entry S[1,1] = {}", format_rational(&out.stress[(0, 0)]));

        let float = compute_stress_matrix::<f64>(&f, &StressOptions::default()).expect("certified");
        let worst = out
            .stress
            .as_slice()
            .iter()
            .zip(float.stress.as_slice())
            .map(|(x, y)| (x.to_f64() - y).abs())
            .fold(0.0, f64::max);
        println!("float backend agrees to {worst:.1e}\n");
    }
}
