//! Writes the semidefinite relaxation of the first example as an SDPA sparse
//! file, reads it back, and checks the certificate pair `(A^T A, S)` that an
//! interior-point solver would be expected to return.
//!
//! ```text
//! cargo run --example export_sdp
//! ```

use lateration_stress::framework::read_framework;
use lateration_stress::numerics::{Rational, Tolerances};
use lateration_stress::sdp::{
    check_certificate, export_realization_sdp, parse_sdpa, stress_multipliers, write_sdpa, ExportOptions,
};
use lateration_stress::stress::{compute_stress_matrix, StressOptions};

fn main() {
    let f = read_framework(include_str!("../fixtures/ex1.json")).expect("fixture parses");
    let problem = export_realization_sdp(&f, &ExportOptions::default()).expect("export");
    let text = write_sdpa(&problem, "first example");
    println!("{}", text.lines().take(8).collect::<Vec<_>>().join("\n"));
    println!("... {} lines in total", text.lines().count());
    assert_eq!(parse_sdpa(&text).expect("parses"), problem);

    let s = compute_stress_matrix::<Rational>(&f, &StressOptions::default()).expect("certified").stress;
    let a = f.extended_matrix::<Rational>();
    let y = a.transpose().matmul(&a).expect("conformable");
    let report = check_certificate(&y, &s, &problem, &Tolerances::default()).expect("shapes match");
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));

    let x = stress_multipliers(&s, &f);
    let w: Vec<String> = x.iter().map(ToString::to_string).collect();
    println!("edge multipliers w = -S_ij: {}", w.join(" "));
}
