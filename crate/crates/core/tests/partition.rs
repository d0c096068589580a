mod common;

use common::{canonical, random_labels, random_multigraph};
use kcount::partition::LinkTally;
use kcount::{Graph, MoveKind, PartitionState};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_moves_keep_statistics_exact(n in 3usize..30, m in 0usize..90, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = random_multigraph(n, m, &mut rng);
        let mut state = PartitionState::from_assignment(&graph, &random_labels(n, 6, &mut rng)).unwrap();
        for _ in 0..100 {
            let node = rng.random_range(0..n);
            let k = state.k();
            let mv = if k > 1 && rng.random::<bool>() {
                let mut to = rng.random_range(0..k - 1);
                if to >= state.group_of(node) { to += 1; }
                state.move_to_existing(node, to).unwrap()
            } else {
                state.move_to_new(node).unwrap()
            };
            let k_after = mv.k_after(k);
            state.apply_move(&graph, &mv).unwrap();
            prop_assert_eq!(state.k(), k_after);
            prop_assert!(state.verify(&graph).is_ok(), "{:?}", state.verify(&graph));
            prop_assert_eq!(state.sizes().iter().sum::<u64>(), n as u64);
            prop_assert!(state.sizes().iter().all(|&s| s > 0));
        }
    }

    #[test]
    fn move_then_reverse_restores_partition(n in 3usize..20, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = random_multigraph(n, 2 * n, &mut rng);
        let labels = random_labels(n, 4, &mut rng);
        let mut state = PartitionState::from_assignment(&graph, &labels).unwrap();
        let node = rng.random_range(0..n);
        let from = state.group_of(node);
        let mv = state.move_to_new(node).unwrap();
        state.apply_move(&graph, &mv).unwrap();
        let back = if mv.empties_source {
            None
        } else {
            Some(state.move_to_existing(node, from).unwrap())
        };
        if let Some(back) = back {
            state.apply_move(&graph, &back).unwrap();
        }
        prop_assert_eq!(canonical(&state.labels()), canonical(&labels));
        prop_assert!(state.verify(&graph).is_ok());
    }
}

#[test]
fn emptying_move_relabels_last_group() {
    let graph = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 4)]).unwrap();
    let mut state = PartitionState::from_assignment(&graph, &[0, 1, 1, 2, 2]).unwrap();
    let mv = state.move_to_existing(0, 1).unwrap();
    assert!(mv.empties_source);
    state.apply_move(&graph, &mv).unwrap();
    assert_eq!(state.k(), 2);
    assert_eq!(state.labels(), vec![1, 1, 1, 0, 0]);
    state.verify(&graph).unwrap();
}

#[test]
fn new_group_takes_label_k() {
    let graph = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
    let mut state = PartitionState::from_assignment(&graph, &[0, 0, 1, 1]).unwrap();
    let mv = state.move_to_new(1).unwrap();
    assert_eq!((mv.kind, mv.to), (MoveKind::ToNew, 2));
    state.apply_move(&graph, &mv).unwrap();
    assert_eq!(state.labels(), vec![0, 2, 1, 1]);
    assert_eq!(state.edge_count(0, 2), 1);
    assert_eq!(state.edge_count(1, 1), 1);
}

#[test]
fn tally_excludes_self_loops() {
    let graph = Graph::from_edges(3, &[(0, 0), (0, 1), (0, 1), (0, 2)]).unwrap();
    let state = PartitionState::from_assignment(&graph, &[0, 0, 1]).unwrap();
    let mut tally = LinkTally::new();
    state.tally(&graph, 0, &mut tally);
    assert_eq!(tally.count(0), 2);
    assert_eq!(tally.count(1), 1);
    assert_eq!(state.edge_count(0, 0), 3);
}

#[test]
fn invalid_assignments_are_rejected() {
    let graph = Graph::from_edges(3, &[(0, 1)]).unwrap();
    assert!(PartitionState::from_assignment(&graph, &[0, 2, 2]).is_err());
    assert!(PartitionState::from_assignment(&graph, &[0, 1]).is_err());
    assert!(PartitionState::from_one_based(&graph, &[0, 1, 1]).is_err());
    let state = PartitionState::from_one_based(&graph, &[1, 2, 2]).unwrap();
    assert_eq!(state.labels_one_based(), vec![1, 2, 2]);
}

#[test]
fn random_member_is_uniform() {
    let graph = Graph::from_edges(6, &[]).unwrap();
    let state = PartitionState::from_assignment(&graph, &[0, 1, 1, 1, 0, 1]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut counts = [0u64; 6];
    for _ in 0..40_000 {
        counts[state.random_member(1, &mut rng)] += 1;
    }
    let expected = [0.0, 0.25, 0.25, 0.25, 0.0, 0.25];
    assert_eq!(counts[0] + counts[4], 0);
    let observed: Vec<u64> = [1, 2, 3, 5].iter().map(|&i| counts[i]).collect();
    let probs: Vec<f64> = [1, 2, 3, 5].iter().map(|&i| expected[i]).collect();
    assert!(common::chi_square_p(&observed, &probs) > 1e-3);
}
