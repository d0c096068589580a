mod common;

use common::{oracle_log_likelihood, random_labels, random_multigraph};
use kcount::likelihood::Evaluator;
use kcount::partition::LinkTally;
use kcount::{log_marginal_likelihood, Graph, PartitionState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph_strategy() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (3usize..25).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..80)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn full_likelihood_matches_oracle((n, edges) in graph_strategy(), seed in any::<u64>()) {
        let graph = Graph::from_edges(n, &edges).unwrap();
        let labels = random_labels(n, 5, &mut ChaCha8Rng::seed_from_u64(seed));
        let state = PartitionState::from_assignment(&graph, &labels).unwrap();
        let lib = log_marginal_likelihood(&graph, &state);
        let oracle = oracle_log_likelihood(&graph, &labels);
        prop_assert!((lib - oracle).abs() <= 1e-9 * oracle.abs().max(1.0), "{lib} vs {oracle}");
    }

    #[test]
    fn label_permutation_invariance((n, edges) in graph_strategy(), seed in any::<u64>()) {
        let graph = Graph::from_edges(n, &edges).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = random_labels(n, 4, &mut rng);
        let k = labels.iter().max().unwrap() + 1;
        let mut perm: Vec<usize> = (0..k).collect();
        perm.reverse();
        let permuted: Vec<usize> = labels.iter().map(|&g| perm[g]).collect();
        let a = log_marginal_likelihood(&graph, &PartitionState::from_assignment(&graph, &labels).unwrap());
        let b = log_marginal_likelihood(&graph, &PartitionState::from_assignment(&graph, &permuted).unwrap());
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn ratio_matches_recompute((n, edges) in graph_strategy(), seed in any::<u64>()) {
        let graph = Graph::from_edges(n, &edges).unwrap();
        let eval = Evaluator::new(&graph);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = PartitionState::from_assignment(&graph, &random_labels(n, 4, &mut rng)).unwrap();
        let mut tally = LinkTally::new();
        for _ in 0..50 {
            let node = rng.random_range(0..n);
            let mv = if state.k() > 1 && rng.random::<f64>() < 0.7 {
                let mut to = rng.random_range(0..state.k() - 1);
                if to >= state.group_of(node) { to += 1; }
                state.move_to_existing(node, to).unwrap()
            } else {
                state.move_to_new(node).unwrap()
            };
            let before = eval.log_marginal(&state);
            state.tally(&graph, node, &mut tally);
            let ratio = eval.log_ratio(&state, &mv, &tally);
            state.apply_tallied(&mv, &tally);
            let after = eval.log_marginal(&state);
            prop_assert!((ratio - (after - before)).abs() < 1e-9, "{ratio} vs {}", after - before);
        }
    }
}

#[test]
fn multiedges_and_self_loops_are_counted() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let graph = random_multigraph(8, 30, &mut rng);
        let labels = random_labels(8, 3, &mut rng);
        let state = PartitionState::from_assignment(&graph, &labels).unwrap();
        let lib = log_marginal_likelihood(&graph, &state);
        assert!((lib - oracle_log_likelihood(&graph, &labels)).abs() < 1e-9);
    }
}

#[test]
fn values_stay_finite_on_large_sparse_graph() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let graph = random_multigraph(5000, 20000, &mut rng);
    let labels: Vec<usize> = (0..5000).map(|i| i % 50).collect();
    let state = PartitionState::from_assignment(&graph, &labels).unwrap();
    let lib = log_marginal_likelihood(&graph, &state);
    let oracle = oracle_log_likelihood(&graph, &labels);
    assert!(lib.is_finite());
    assert!((lib - oracle).abs() <= 1e-9 * oracle.abs());
}
