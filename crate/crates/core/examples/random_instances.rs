//! Seeded random frameworks on both backends: exact runs report how large
//! the rational entries grow, float runs report time and verification.
//!
//! ```text
//! cargo run --release --example random_instances
//! ```

use std::time::Instant;

use lateration_stress::generate::{generate_framework, Attachment, GenConfig};
use lateration_stress::numerics::Rational;
use lateration_stress::stress::{compute_stress_matrix, StressOptions};

fn main() {
    println!("rational backend, uniform attachment");
    for (d, n) in [(1, 10), (1, 16), (2, 10), (2, 14), (3, 12)] {
        let f = generate_framework(&GenConfig::new(d, n, 1)).expect("instance");
        let start = Instant::now();
        let out = compute_stress_matrix::<Rational>(&f, &StressOptions::default()).expect("certified");
        let bits = out.trace.steps.iter().map(|s| s.max_bits).max().unwrap_or(0);
        println!(
            "  d={d} n={n:2}: {:2} modifications, largest update entry {bits:5} bits, {:.3}s",
            out.trace.modifications(),
            start.elapsed().as_secs_f64()
        );
    }

    println!("float backend, tree attachment");
    for n in [50, 100, 200] {
        let f = generate_framework(&GenConfig::new(3, n, 1).with_attachment(Attachment::Tree)).expect("instance");
        let opts = StressOptions { verify: false, ..StressOptions::default() };
        let start = Instant::now();
        let out = compute_stress_matrix::<f64>(&f, &opts).expect("pipeline");
        let elapsed = start.elapsed().as_secs_f64();
        let report = lateration_stress::stress::verify_stress(&out.stress, &f, &opts.tol).expect("verification");
        println!(
            "  d=3 n={n:3}: {} modifications, {elapsed:.3}s, rank {} of {}, passed {}",
            out.trace.modifications(),
            report.rank,
            report.expected_rank,
            report.passed()
        );
    }
}
