mod common;

use pathlearn::path_learn::{solve_path_brute, solve_path_exact};
use pathlearn::tree_learn::{build_weights, learn_optimal_branching, learn_optimal_spanning_tree};
use pathlearn::{Criterion, DiscreteDataset};

const TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn branching_matches_exhaustive_search() {
    let mut rng = common::rng(2024);
    for trial in 0..100 {
        let n = 1 + trial % 6;
        let data = common::random_dataset(&mut rng, n, 20 + trial * 2, 4);
        for c in Criterion::ALL {
            let w = build_weights(c, &data).unwrap();
            let (b, s) = learn_optimal_branching(&w);
            assert_eq!(b.len(), n);
            let brute = common::brute_force_branching(&w, false);
            assert!(close(s.value, brute), "trial {trial} {c}: {} vs {brute}", s.value);
        }
    }
}

#[test]
fn spanning_tree_matches_exhaustive_search() {
    let mut rng = common::rng(77);
    for trial in 0..60 {
        let n = 1 + trial % 5;
        let data = common::random_dataset(&mut rng, n, 40, 3);
        for c in Criterion::ALL {
            let w = build_weights(c, &data).unwrap();
            let (t, s) = learn_optimal_spanning_tree(&w);
            assert!(t.is_tree());
            let brute = common::brute_force_branching(&w, true);
            assert!(close(s.value, brute), "trial {trial} {c}: {} vs {brute}", s.value);
        }
    }
}

fn mutual_information(data: &DiscreteDataset, a: usize, b: usize) -> f64 {
    let (ca, cb) = (data.cardinalities()[a] as usize, data.cardinalities()[b] as usize);
    let mut joint = vec![vec![0.0; cb]; ca];
    let mut ma = vec![0.0; ca];
    let mut mb = vec![0.0; cb];
    for case in data.cases() {
        joint[case[a] as usize][case[b] as usize] += 1.0;
        ma[case[a] as usize] += 1.0;
        mb[case[b] as usize] += 1.0;
    }
    let n = data.case_count() as f64;
    let mut mi = 0.0;
    for x in 0..ca {
        for y in 0..cb {
            let j = joint[x][y];
            if j > 0.0 {
                mi += j * (j * n / (ma[x] * mb[y])).ln();
            }
        }
    }
    mi
}

/// Kruskal maximum spanning forest, returning the total weight.
fn kruskal_max_forest(n: usize, mut edges: Vec<(f64, usize, usize)>) -> f64 {
    edges.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(comp: &mut [usize], x: usize) -> usize {
        if comp[x] != x {
            let r = find(comp, comp[x]);
            comp[x] = r;
        }
        comp[x]
    }
    let mut total = 0.0;
    for (w, a, b) in edges {
        if w <= 0.0 {
            break;
        }
        let (ra, rb) = (find(&mut comp, a), find(&mut comp, b));
        if ra != rb {
            comp[ra] = rb;
            total += w;
        }
    }
    total
}

#[test]
fn ml_branching_is_a_chow_liu_forest() {
    let mut rng = common::rng(9);
    for trial in 0..40 {
        let n = 2 + trial % 8;
        let data = common::random_dataset(&mut rng, n, 150, 4);
        let w = build_weights(Criterion::Ml, &data).unwrap();
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                let mi = mutual_information(&data, i, j);
                assert!(w.delta(j, i) >= -1e-9, "negative ML delta");
                assert!(close(w.delta(j, i), mi));
            }
        }
        let edges = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| (mutual_information(&data, i, j), i, j))
            .collect();
        let roots: f64 = (0..n).map(|i| common::ml_oracle(&data, i, &[])).sum();
        let expected = roots + kruskal_max_forest(n, edges);
        let (_, s) = learn_optimal_branching(&w);
        assert!(close(s.value, expected), "trial {trial}: {} vs {expected}", s.value);
    }
}

#[test]
fn dp_matches_enumeration() {
    let mut rng = common::rng(31337);
    for trial in 0..100 {
        let n = 1 + trial % 8;
        let data = common::random_dataset(&mut rng, n, 1 + (trial * 7) % 200, 4);
        for c in Criterion::ALL {
            let w = build_weights(c, &data).unwrap();
            let dp = solve_path_exact(&w, 20).unwrap();
            let bf = solve_path_brute(&w).unwrap();
            let heap = common::brute_force_path(&w);
            assert!(close(dp.best_score.value, bf.best_score.value), "trial {trial} {c}");
            assert!(close(dp.best_score.value, heap), "trial {trial} {c}");
            assert!(dp.exact && bf.exact);
        }
    }
}

#[test]
fn local_scores_match_direct_tallies() {
    let mut rng = common::rng(3);
    for _ in 0..30 {
        let data = common::random_dataset(&mut rng, 4, 60, 4);
        let w = build_weights(Criterion::Ml, &data).unwrap();
        for i in 0..4 {
            assert!(close(w.root_weight(i), common::ml_oracle(&data, i, &[])));
            for j in (0..4).filter(|&j| j != i) {
                assert!(close(w.arc_weight(j, i), common::ml_oracle(&data, i, &[j])));
            }
        }
    }
}
