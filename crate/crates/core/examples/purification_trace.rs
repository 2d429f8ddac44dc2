//! Watches purification step by step on a random planar instance: after
//! every rank-one update the matrix stays a PSD stress of rank `n - d - 1`
//! while the processed columns lose their non-edge entries.
//!
//! ```text
//! cargo run --example purification_trace -- [n] [seed]
//! ```

use lateration_stress::generate::{generate_framework, GenConfig};
use lateration_stress::numerics::{psd_and_rank, Matrix, Rational};
use lateration_stress::stress::{pre_stress, LaterationContext, StepRecord, StressOptions};
use num_traits::Zero;

fn main() {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("numeric argument"));
    let n = args.next().unwrap_or(10) as usize;
    let seed = args.next().unwrap_or(7);
    let f = generate_framework(&GenConfig::new(2, n, seed)).expect("instance");
    let opts = StressOptions::default();
    let ctx = LaterationContext::<Rational>::new(&f, &opts).expect("lateration ordering");
    let a = ctx.extended().clone();
    let s0 = pre_stress(&ctx.gale_matrix().expect("Gale matrix"));
    let dirty = |s: &Matrix<Rational>| {
        (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).filter(|&(i, j)| !ctx.has_edge(i, j) && !s[(i, j)].is_zero()).count()
    };
    println!("n = {n}, {} edges, {} nonzero non-edge entries in L L^T", f.edges().len(), dirty(&s0));

    let mut observer = |rec: &StepRecord<Rational>, s: &Matrix<Rational>| {
        let null = a.matmul(s).expect("conformable").as_slice().iter().all(|x| x.is_zero());
        let (psd, rank) = psd_and_rank(s, &opts.tol).expect("symmetric");
        println!(
            "position {:2} (vertex {:2}): {:6}  AS=0 {null}  PSD {}  rank {rank}  dirty {:3}  largest entry {} bits",
            rec.position + 1,
            rec.vertex + 1,
            format!("{:?}", rec.action),
            psd.psd,
            dirty(s),
            rec.max_bits
        );
    };
    let (s, trace) = ctx.purify(s0, &opts, Some(&mut observer)).expect("purification");
    println!("{} modifications; final largest entry {} bits", trace.modifications(), s.max_size_bits());
}
