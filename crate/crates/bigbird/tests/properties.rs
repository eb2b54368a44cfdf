//! Property tests for the structural invariants.

use bigbird::attn::{attn_dense, masked_softmax, HeadParams, ScoreKind};
use bigbird::graphdiag::path_stats;
use bigbird::mask_io;
use bigbird::mat::Mat;
use bigbird::pattern::{
    build_bigbird, build_bigbird_pattern, expand_to_tokens, extend_etc, BlockMask,
    BlockPatternConfig, Mode, TokenMask,
};
use bigbird::rng::Rng64;
use proptest::prelude::*;

/// Strategy: a valid pattern config with small dimensions.
fn config_strategy() -> impl Strategy<Value = BlockPatternConfig> {
    (1usize..=6, 1usize..=3, 0usize..=2, 0usize..=2, any::<u64>(), any::<bool>()).prop_flat_map(
        |(nb_extra, b, r, g, seed, etc)| {
            // Ensure g + w + r <= n_blocks by sizing n_blocks up.
            let w = 2 * (nb_extra % 2) + 1; // 1 or 3
            let n_blocks = (g + w + r).max(2) + nb_extra;
            let n = n_blocks * b;
            let mode = if etc { Mode::Etc } else { Mode::Itc };
            Just(BlockPatternConfig::new(n, b, w, r, g, mode, seed).unwrap())
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identical_configs_give_identical_masks(cfg in config_strategy()) {
        let a = build_bigbird(&cfg).unwrap();
        let b = build_bigbird(&cfg).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn random_blocks_disjoint_from_window_and_global(cfg in config_strategy()) {
        let pat = build_bigbird_pattern(&cfg).unwrap();
        let g = cfg.global_blocks;
        for row in 0..pat.mask().n_blocks() {
            // Global row blocks attend everywhere; they carry no window or
            // random slots of their own.
            if row < g {
                continue;
            }
            let window = pat.window_row(row);
            for &rb in pat.random_row(row) {
                prop_assert!(!window.contains(&rb));
                prop_assert!(rb >= g);
                prop_assert_ne!(rb, row);
            }
        }
    }

    #[test]
    fn expansion_is_constant_on_tiles(cfg in config_strategy()) {
        let bm = build_bigbird(&cfg).unwrap();
        let tm = expand_to_tokens(&bm, cfg.block_size).unwrap();
        let b = cfg.block_size;
        for bi in 0..bm.n_blocks() {
            for bj in 0..bm.n_blocks() {
                let expected = bm.contains(bi, bj);
                for s in 0..b {
                    for t in 0..b {
                        prop_assert_eq!(tm.get(bi * b + s, bj * b + t), expected);
                    }
                }
            }
        }
        prop_assert_eq!(tm.count_true(), b * b * bm.edge_count());
    }

    #[test]
    fn etc_extension_round_trips(n in 1usize..12, g in 0usize..5, seed in any::<u64>()) {
        let mut rng = Rng64::new(seed);
        let mut mask = TokenMask::new(n);
        for i in 0..n {
            for j in 0..n {
                if rng.below(2) == 0 {
                    mask.set(i, j, true);
                }
            }
        }
        let ext = extend_etc(&mask, g);
        prop_assert_eq!(ext.n(), n + g);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(ext.get(g + i, g + j), mask.get(i, j));
            }
        }
        for k in 0..g {
            for j in 0..n + g {
                prop_assert!(ext.get(k, j));
                prop_assert!(ext.get(j, k));
            }
        }
    }

    #[test]
    fn mask_serialization_round_trips(cfg in config_strategy()) {
        let tm = expand_to_tokens(&build_bigbird(&cfg).unwrap(), cfg.block_size).unwrap();
        prop_assert_eq!(mask_io::from_pbm(&mask_io::to_pbm(&tm)).unwrap(), tm.clone());
        prop_assert_eq!(mask_io::from_csv(&mask_io::to_csv(&tm)).unwrap(), tm);
    }

    #[test]
    fn softmax_is_shift_invariant_and_normalized(
        scores in prop::collection::vec(-50.0f64..50.0, 1..20),
        shift in -100.0f64..100.0,
    ) {
        let w = masked_softmax(&scores).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
        let w2 = masked_softmax(&shifted).unwrap();
        for (a, b) in w.iter().zip(&w2) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn attention_locality(seed in any::<u64>()) {
        // Changing x_j outside N(i) leaves output row i bit-identical.
        let mut rng = Rng64::new(seed);
        let n = 6;
        let d = 3;
        let x = Mat::random(n, d, -1.0, 1.0, &mut rng);
        let head = HeadParams::new(
            Mat::random(d, 2, -1.0, 1.0, &mut rng),
            Mat::random(d, 2, -1.0, 1.0, &mut rng),
            Mat::random(d, d, -1.0, 1.0, &mut rng),
        ).unwrap();
        let mut mask = TokenMask::new(n);
        for i in 0..n {
            mask.set(i, i, true);
            mask.set(i, (i + 1) % n, true);
        }
        let touched = (rng.below(n as u64)) as usize;
        let before = attn_dense(&x, std::slice::from_ref(&head), &mask, ScoreKind::softmax()).unwrap();
        let mut x2 = x.clone();
        x2.row_mut(touched).iter_mut().for_each(|v| *v += 3.0);
        let after = attn_dense(&x2, std::slice::from_ref(&head), &mask, ScoreKind::softmax()).unwrap();
        for i in 0..n {
            if i != touched && !mask.get(i, touched) {
                prop_assert_eq!(before.row(i), after.row(i));
            }
        }
    }

    #[test]
    fn path_stats_matches_floyd_warshall(n in 2usize..=64, seed in any::<u64>(), density in 1u64..4) {
        let mut rng = Rng64::new(seed);
        let mut neighbors = vec![Vec::new(); n];
        for (i, row) in neighbors.iter_mut().enumerate() {
            for j in 0..n {
                if rng.below(4) < density {
                    row.push(j);
                }
            }
            row.push(i); // keep them non-empty
        }
        let mask = BlockMask::from_neighbors(n, neighbors).unwrap();
        let (avg, diam, connected) = path_stats(&mask);

        // Floyd-Warshall on the symmetrized, loop-free graph.
        const INF: u64 = u64::MAX / 4;
        let mut dist = vec![vec![INF; n]; n];
        for i in 0..n {
            dist[i][i] = 0;
            for &j in mask.row(i) {
                if i != j {
                    dist[i][j] = 1;
                    dist[j][i] = 1;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = dist[i][k] + dist[k][j];
                    if via < dist[i][j] {
                        dist[i][j] = via;
                    }
                }
            }
        }
        let mut sum = 0u64;
        let mut pairs = 0u64;
        let mut max = 0u64;
        let mut fw_connected = true;
        for i in 0..n {
            for j in 0..n {
                if i == j { continue; }
                if dist[i][j] >= INF {
                    fw_connected = false;
                } else {
                    sum += dist[i][j];
                    pairs += 1;
                    max = max.max(dist[i][j]);
                }
            }
        }
        prop_assert_eq!(connected, fw_connected);
        if fw_connected {
            prop_assert_eq!(diam, Some(max));
        } else {
            prop_assert_eq!(diam, None);
        }
        let fw_avg = if pairs == 0 { 0.0 } else { sum as f64 / pairs as f64 };
        prop_assert!((avg - fw_avg).abs() < 1e-12);
    }

    #[test]
    fn adding_edges_never_hurts_paths(n in 3usize..16, seed in any::<u64>()) {
        let mut rng = Rng64::new(seed);
        // Connected base: a ring plus random extras.
        let mut neighbors: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
        let base = BlockMask::from_neighbors(n, neighbors.clone()).unwrap();
        for row in neighbors.iter_mut() {
            for j in 0..n {
                if rng.below(3) == 0 {
                    row.push(j);
                }
            }
        }
        let denser = BlockMask::from_neighbors(n, neighbors).unwrap();
        let (avg_a, diam_a, conn_a) = path_stats(&base);
        let (avg_b, diam_b, conn_b) = path_stats(&denser);
        prop_assert!(conn_a && conn_b);
        prop_assert!(avg_b <= avg_a + 1e-12);
        prop_assert!(diam_b.unwrap() <= diam_a.unwrap());
    }

    #[test]
    fn clustering_invariant_under_relabeling(n in 3usize..16, seed in any::<u64>()) {
        let mut rng = Rng64::new(seed);
        let mut neighbors = vec![Vec::new(); n];
        for (i, row) in neighbors.iter_mut().enumerate() {
            for j in 0..n {
                if rng.below(3) == 0 {
                    row.push(j);
                }
            }
            row.push((i + 1) % n);
        }
        let mask = BlockMask::from_neighbors(n, neighbors.clone()).unwrap();
        // Random permutation via Fisher-Yates.
        let mut perm: Vec<usize> = (0..n).collect();
        for t in 0..n {
            let j = t + rng.below((n - t) as u64) as usize;
            perm.swap(t, j);
        }
        let permuted_neighbors: Vec<Vec<usize>> = {
            let mut rows = vec![Vec::new(); n];
            for (i, row) in neighbors.iter().enumerate() {
                rows[perm[i]] = row.iter().map(|&j| perm[j]).collect();
            }
            rows
        };
        let permuted = BlockMask::from_neighbors(n, permuted_neighbors).unwrap();
        let a = bigbird::graphdiag::clustering_coefficient(&mask);
        let b = bigbird::graphdiag::clustering_coefficient(&permuted);
        prop_assert!((a - b).abs() < 1e-12);
    }
}
