//! Compares two starting points for purification: the structured Gale
//! pre-stress `L L^T` and the orthogonal projector onto the nullspace of
//! `A`. Both are PSD with `A S = 0` and rank `n - d - 1`; the projector is
//! dense, so it has nonzeros on every non-edge.
//!
//! ```text
//! cargo run --example projection_prestress
//! ```

use lateration_stress::framework::{extended_position_matrix, read_framework};
use lateration_stress::numerics::{psd_and_rank, Matrix, Rational, Tolerances};
use lateration_stress::stress::{pre_stress, LaterationContext, StressOptions};
use num_traits::Zero;

fn main() {
    let f = read_framework(include_str!("../fixtures/ex2.json")).expect("fixture parses");
    let tol = Tolerances::default();
    let a = extended_position_matrix::<Rational>(&f, &tol).expect("spanning positions");
    let ctx = LaterationContext::<Rational>::new(&f, &StressOptions::default()).expect("ordering");
    let gale = ctx.to_vertex_space(&pre_stress(&ctx.gale_matrix().expect("Gale matrix")));
    let projector = lateration_stress::stress::projection_prestress(&a, &tol).expect("projector");

    let non_edges = |s: &Matrix<Rational>| {
        let n = s.rows();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !f.edges().contains(&(i, j)) && !s[(i, j)].is_zero())
            .count()
    };
    for (name, s) in [("Gale pre-stress", &gale), ("projector", &projector)] {
        let null = a.matrix().matmul(s).expect("conformable").as_slice().iter().all(Zero::is_zero);
        let (psd, rank) = psd_and_rank(s, &tol).expect("symmetric");
        println!(
            "{name:16} AS=0 {null}  PSD {}  rank {rank}  nonzero non-edge entries {}",
            psd.psd,
            non_edges(s)
        );
    }
    let idempotent = projector.matmul(&projector).expect("square") == projector;
    println!("projector is idempotent: {idempotent}");
}
