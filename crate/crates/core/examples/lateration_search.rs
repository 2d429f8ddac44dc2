//! Finds a lateration ordering for a graph given in scrambled order, checks
//! it, and tests the `(d+1)`-tree property that predicts a purification-free
//! run.
//!
//! ```text
//! cargo run --example lateration_search
//! ```

use lateration_stress::generate::{generate_framework, Attachment, GenConfig};
use lateration_stress::graph::{
    find_lateration_order, is_dplus1_tree, validate_lateration_order, Graph, DEFAULT_SEARCH_BUDGET,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for (label, mode) in [("uniform attachment", Attachment::Uniform), ("tree attachment", Attachment::Tree)] {
        let f = generate_framework(&GenConfig::new(2, 12, 11).with_attachment(mode)).expect("instance");
        let n = f.len();
        let mut relabel: Vec<usize> = (0..n).collect();
        relabel.shuffle(&mut rng);
        let edges: Vec<(usize, usize)> = f.edges().iter().map(|&(i, j)| (relabel[i], relabel[j])).collect();
        let graph = Graph::new(n, &edges);

        let order = find_lateration_order(&graph, 2, DEFAULT_SEARCH_BUDGET).expect("ordering exists");
        let check = validate_lateration_order(&graph, &order, 2);
        println!("{label}: ordering {:?}", order.iter().map(|v| v + 1).collect::<Vec<_>>());
        println!("  valid {}, exactly d+1 predecessors {}", check.valid, check.exact_attachment);
        println!("  (d+1)-tree: {}", is_dplus1_tree(&graph, &order, 2));
    }

    let path = Graph::new(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
    println!("path graph in the plane: {:?}", find_lateration_order(&path, 2, DEFAULT_SEARCH_BUDGET));
}
