//! Named verification suites, shared by the `check` subcommand and the
//! acceptance tests. Every suite is deterministic given its seed.

use crate::attn::{attn_dense, furthest_vector, HeadParams, ScoreKind};
use crate::block::{attn_block_sparse, flop_count};
use crate::encoder::{encoder_grad_check, LayerParams};
use crate::error::Result;
use crate::graphdiag::{clustering_coefficient, path_stats, spectral_gap, POWER_ITER_CAP, POWER_ITER_TOL};
use crate::mat::{dot, rel_linf, Mat};
use crate::pattern::{
    build_bigbird, build_global_itc, build_turing_decoder_graph, build_window, expand_to_tokens,
    BlockPatternConfig, Mode, TokenMask,
};
use crate::rng::Rng64;
use crate::theory::{check_contextual_injectivity, selective_shift, GridConfig, ShiftParams};

/// Outcome of one verification suite.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Worst observed error in the suite's own metric (0 for exact suites).
    pub worst_error: f64,
    /// Echo of each failing case, for reproduction.
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn summary_line(&self) -> String {
        format!(
            "suite {:<12} {} ({} cases, worst error {:.3e})",
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.cases,
            self.worst_error
        )
    }
}

/// Random valid pattern config drawn from the equivalence-suite ranges.
fn random_config(rng: &mut Rng64, mode: Mode) -> BlockPatternConfig {
    loop {
        let b = [4usize, 8, 16, 32][rng.below(4) as usize];
        let n_blocks = 2 + rng.below(31) as usize; // tokens up to 1024 at b=32
        let n = b * n_blocks;
        if !(64..=1024).contains(&n) {
            continue;
        }
        let w = [1usize, 3, 5][rng.below(3) as usize];
        let r = rng.below(4) as usize;
        let g = rng.below(3) as usize;
        let seed = rng.next_u64();
        if let Ok(cfg) = BlockPatternConfig::new(n, b, w, r, g, mode, seed) {
            return cfg;
        }
    }
}

/// Oracle equivalence: blocked sparse attention vs the dense reference over
/// the expanded mask, on `cases` random configs, softmax and hardmax.
pub fn suite_equivalence(seed: u64, cases: usize, tolerance: f64) -> Result<SuiteReport> {
    let mut rng = Rng64::new(seed ^ 0xE11A);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for case in 0..cases {
        // Alternate scoring kinds and modes so every quadrant is covered.
        let mode = if (case / 2) % 2 == 0 { Mode::Itc } else { Mode::Etc };
        let cfg = random_config(&mut rng, mode);
        let n = cfg.total_tokens();
        let d = 4 + rng.below(3) as usize;
        let m = 3 + rng.below(3) as usize;
        let x = Mat::random(n, d, -1.0, 1.0, &mut rng);
        let heads: Vec<HeadParams> = (0..1 + rng.below(2) as usize)
            .map(|_| {
                HeadParams::new(
                    Mat::random(d, m, -1.0, 1.0, &mut rng),
                    Mat::random(d, m, -1.0, 1.0, &mut rng),
                    Mat::random(d, d, -1.0, 1.0, &mut rng),
                )
                .unwrap()
            })
            .collect();
        let mask = expand_to_tokens(&build_bigbird(&cfg)?, cfg.block_size)?;
        let kind = if case % 2 == 0 { ScoreKind::softmax() } else { ScoreKind::Hardmax };
        let dense = attn_dense(&x, &heads, &mask, kind)?;
        let blocked = attn_block_sparse(&x, &heads, &cfg, kind)?;
        let err = rel_linf(&blocked, &dense);
        worst = worst.max(err);
        if err > tolerance {
            failures.push(format!("case {case}: {cfg:?} kind {kind:?} rel err {err:.3e}"));
        }
    }
    Ok(SuiteReport {
        name: "equivalence",
        passed: failures.is_empty(),
        cases,
        worst_error: worst,
        failures,
    })
}

/// Gradient check: analytic backward vs central differences on a one-layer
/// encoder (d = 4, m = 4, q = 8, n = 8) over a BigBird mask.
pub fn suite_gradcheck(seed: u64) -> Result<SuiteReport> {
    let mut rng = Rng64::new(seed ^ 0x6EAD);
    let cfg = BlockPatternConfig::new(8, 1, 3, 2, 1, Mode::Itc, seed)?;
    let mask = expand_to_tokens(&build_bigbird(&cfg)?, 1)?;
    let x = Mat::random(8, 4, -1.0, 1.0, &mut rng);
    // Three heads put the parameter count above the 200-coordinate floor;
    // every coordinate is checked.
    let layers = vec![LayerParams::random(3, 4, 4, 8, &mut rng)];
    let coords: usize = layers.iter().map(LayerParams::param_count).sum();
    let err = encoder_grad_check(&x, &layers, &mask, ScoreKind::softmax(), 1e-5, coords, seed)?;
    let passed = err <= 1e-4;
    Ok(SuiteReport {
        name: "gradcheck",
        passed,
        cases: coords,
        worst_error: err,
        failures: if passed {
            Vec::new()
        } else {
            vec![format!("one-layer encoder d=4 m=4 q=8 n=8 seed {seed}: rel err {err:.3e}")]
        },
    })
}

/// Exhaustive contextual-mapping injectivity with per-phase invariants over
/// the toy grids (n=1, delta 1/2 and 1/3; n=2, delta 1/2), in exact rational
/// arithmetic.
pub fn check_contextual_mapping() -> Result<SuiteReport> {
    let mut failures = Vec::new();
    let mut cases = 0;
    for (n, q) in [(1usize, 2u32), (1, 3), (2, 2)] {
        let cfg = GridConfig::new(n, 1, q)?;
        let report = check_contextual_injectivity(&cfg)?;
        cases += report.points;
        if !report.ok() {
            failures.push(format!(
                "grid n={n} d=1 1/delta={q}: within={} across={} invariants={}",
                report.distinct_within, report.distinct_across, report.invariants_ok
            ));
        }
    }
    Ok(SuiteReport {
        name: "contextual",
        passed: failures.is_empty(),
        cases,
        worst_error: 0.0,
        failures,
    })
}

/// Random selective-shift cases against a direct loop: out-of-range rows must
/// be bit-identical, in-range shifts exactly rho * (neighborhood max - min).
pub fn check_selective_shift(seed: u64, count: usize) -> Result<SuiteReport> {
    let mut failures = Vec::new();
    let mut cases = 0;
    let mut rng = Rng64::new(seed ^ 0x7EE0);
    for case in 0..count {
        let n = 2 + rng.below(6) as usize;
        let d = 1 + rng.below(4) as usize;
        let x = Mat::random(n, d, -2.0, 2.0, &mut rng);
        let u: Vec<f64> = (0..d).map(|_| rng.range(-1.0, 1.0)).collect();
        let lo = rng.range(-2.0, 2.0);
        let hi = lo + rng.range(-0.5, 2.0); // sometimes empty
        let rho = rng.range(-3.0, 3.0);
        // Random graph with guaranteed self-edges.
        let mut graph = TokenMask::new(n);
        for i in 0..n {
            graph.set(i, i, true);
            for j in 0..n {
                if rng.below(2) == 0 {
                    graph.set(i, j, true);
                }
            }
        }
        let params = ShiftParams { u: u.clone(), b1: lo, b2: hi, rho, graph: graph.clone() };
        let (out, shifted) = selective_shift(&x, &params)?;
        cases += 1;
        // Direct loop oracle.
        let proj: Vec<f64> = (0..n).map(|i| dot(&u, x.row(i))).collect();
        let mut ok = true;
        let mut expected_shifted = Vec::new();
        for i in 0..n {
            let in_range = lo <= proj[i] && proj[i] <= hi;
            if in_range {
                expected_shifted.push(i);
                let mut mx = f64::NEG_INFINITY;
                let mut mn = f64::INFINITY;
                for j in 0..n {
                    if graph.get(i, j) {
                        mx = mx.max(proj[j]);
                        mn = mn.min(proj[j]);
                    }
                }
                let want = x[(i, 0)] + rho * (mx - mn);
                ok &= out[(i, 0)] == want;
            } else {
                ok &= out.row(i) == x.row(i);
            }
            ok &= out.row(i)[1..] == x.row(i)[1..];
        }
        ok &= shifted == expected_shifted;
        if !ok {
            failures.push(format!("shift case {case}: n={n} d={d} b1={lo} b2={hi} rho={rho}"));
        }
    }
    Ok(SuiteReport {
        name: "shift",
        passed: failures.is_empty(),
        cases,
        worst_error: 0.0,
        failures,
    })
}

/// Theory suite: exhaustive contextual-mapping injectivity plus 1000 random
/// selective-shift cases.
pub fn suite_theory(seed: u64) -> Result<SuiteReport> {
    let mapping = check_contextual_mapping()?;
    let shift = check_selective_shift(seed, 1000)?;
    let mut failures = mapping.failures;
    failures.extend(shift.failures);
    Ok(SuiteReport {
        name: "theory",
        passed: failures.is_empty(),
        cases: mapping.cases + shift.cases,
        worst_error: 0.0,
        failures,
    })
}

/// Graph-structure suite: hub diameter bound, linear ring growth vs constant
/// BigBird path length, exact ring-lattice clustering, complete-graph
/// spectrum.
pub fn suite_graphs(seed: u64) -> Result<SuiteReport> {
    let mut failures = Vec::new();
    let mut cases = 0;
    let mut worst = 0.0f64;

    // (a) Any mask with a global block has diameter <= 2, exhaustively.
    for nb in 1..=256usize {
        let m = build_global_itc(nb, 1)?;
        let (_, diam, connected) = path_stats(&m);
        cases += 1;
        if !connected || diam.unwrap_or(u64::MAX) > 2 {
            failures.push(format!("global hub nb={nb}: diameter {diam:?}"));
        }
    }
    for nb in (4..=256usize).step_by(4) {
        let cfg = BlockPatternConfig::new(nb, 1, 3, 0, 1, Mode::Itc, seed)?;
        let m = build_bigbird(&cfg)?;
        let (_, diam, _) = path_stats(&m);
        cases += 1;
        if diam.unwrap_or(u64::MAX) > 2 {
            failures.push(format!("bigbird g=1 nb={nb}: diameter {diam:?}"));
        }
    }

    // (b) Window-only average path grows linearly (4x nodes -> ~4x length);
    // the combined pattern stays <= 2.
    let (avg32, _, _) = path_stats(&build_window(32, 3)?);
    let (avg128, _, _) = path_stats(&build_window(128, 3)?);
    let ratio = avg128 / avg32;
    let ratio_err = (ratio / 4.0 - 1.0).abs();
    worst = worst.max(ratio_err);
    cases += 1;
    if ratio_err > 0.05 {
        failures.push(format!("ring growth ratio {ratio:.4}, expected within 5% of 4"));
    }
    for nb in [32usize, 128] {
        let cfg = BlockPatternConfig::new(nb, 1, 3, 3, 2, Mode::Itc, seed)?;
        let (avg, _, _) = path_stats(&build_bigbird(&cfg)?);
        cases += 1;
        if avg > 2.0 {
            failures.push(format!("bigbird preset nb={nb}: avg path {avg:.3}"));
        }
    }

    // (c) Ring lattice with 2 neighbors per side: clustering exactly 1/2.
    let cc = clustering_coefficient(&build_window(10, 5)?);
    cases += 1;
    let cc_err = (cc - 0.5).abs();
    worst = worst.max(cc_err);
    if cc_err != 0.0 {
        failures.push(format!("ring lattice clustering {cc}, expected exactly 0.5"));
    }

    // (d) K_n: |lambda_2| = 1/(n-1) within 1e-8.
    for n in [8usize, 32, 128] {
        let full = build_global_itc(n, n)?;
        let got = spectral_gap(&full, POWER_ITER_CAP, POWER_ITER_TOL)?;
        let expected = 1.0 / (n as f64 - 1.0);
        let err = (got - expected).abs();
        worst = worst.max(err);
        cases += 1;
        if err > 1e-8 {
            failures.push(format!("K_{n}: |lambda2| {got:.12}, expected {expected:.12}"));
        }
    }

    Ok(SuiteReport {
        name: "graphs",
        passed: failures.is_empty(),
        cases,
        worst_error: worst,
        failures,
    })
}

/// Furthest-vector check: random unit vectors, agreement with the brute-force
/// pairwise oracle on non-tied rows (used by the acceptance suite).
pub fn check_furthest(seed: u64, instances: usize) -> Result<SuiteReport> {
    let mut rng = Rng64::new(seed ^ 0xF4B);
    let mut failures = Vec::new();
    let mut cases = 0;
    for inst in 0..instances {
        let n = 2 + rng.below(63) as usize;
        let d = ((n as f64).log2().powi(2).ceil() as usize).max(2);
        let mut u = Mat::zeros(n, d);
        for i in 0..n {
            let v: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (c, val) in v.iter().enumerate() {
                u[(i, c)] = val / norm;
            }
        }
        let rows = furthest_vector(&u)?;
        for (i, row) in rows.iter().enumerate() {
            cases += 1;
            let mut best = 0usize;
            let mut best_d = f64::NEG_INFINITY;
            let mut tie = false;
            for k in 0..n {
                let dist: f64 = (0..d).map(|c| (u[(k, c)] - u[(i, c)]).powi(2)).sum();
                if dist > best_d {
                    best_d = dist;
                    best = k;
                    tie = false;
                } else if dist == best_d {
                    tie = true;
                }
            }
            if row.tie != tie && !tie {
                // Construction flagged a tie the oracle did not see.
                failures.push(format!("instance {inst} row {i}: spurious tie flag"));
            }
            if !row.tie && row.index != best {
                failures.push(format!(
                    "instance {inst} row {i}: got {}, oracle {best}",
                    row.index
                ));
            }
        }
    }
    Ok(SuiteReport {
        name: "furthest",
        passed: failures.is_empty(),
        cases,
        worst_error: 0.0,
        failures,
    })
}

/// Turing decoder graph against an independent per-node decomposition, plus
/// the closed-form step map (used by the acceptance suite).
pub fn check_turing_graph(n_nodes: usize) -> SuiteReport {
    let mut failures = Vec::new();
    let graph = build_turing_decoder_graph(n_nodes);
    // Independent oracle: decompose u = j(j+1)/2 + k by scanning triangular
    // numbers rather than looping over rows.
    let mut expected = Vec::new();
    for u in 2..n_nodes {
        let mut j = 1usize;
        while (j + 1) * (j + 2) / 2 < u {
            j += 1;
        }
        let k = u - j * (j + 1) / 2;
        if !(1..=j + 1).contains(&k) {
            failures.push(format!("node {u}: bad decomposition j={j} k={k}"));
            continue;
        }
        let v = k * (k + 1) / 2;
        if v < n_nodes {
            expected.push((u, v));
        }
        expected.push((u, u - 1));
    }
    expected.sort_unstable();
    expected.dedup();
    if graph.edges != expected {
        failures.push(format!(
            "edge list mismatch: {} edges built, {} expected",
            graph.edges.len(),
            expected.len()
        ));
    }
    for &(u, v) in &graph.edges {
        if v > u {
            failures.push(format!("forward edge ({u}, {v})"));
        }
    }
    for j in 0..=1000u64 {
        if crate::theory::turing_step(j * (j + 1) / 2) != j {
            failures.push(format!("g({}) != {j}", j * (j + 1) / 2));
        }
    }
    SuiteReport {
        name: "turing",
        passed: failures.is_empty(),
        cases: graph.edges.len() + 1001,
        worst_error: 0.0,
        failures,
    }
}

/// Closed-form FLOP scaling at the published preset (b = 64, g = 2 blocks,
/// w = 3 blocks, r = 3 blocks): sparse affine in n, dense exactly 4x per
/// doubling (used by the acceptance suite).
pub fn check_flop_scaling() -> Result<SuiteReport> {
    let mut failures = Vec::new();
    let mk = |n: usize| BlockPatternConfig::new(n, 64, 3, 3, 2, Mode::Itc, 0);
    let ns = [512usize, 1024, 2048, 4096];
    let reports: Vec<_> = ns
        .iter()
        .map(|&n| flop_count(&mk(n).unwrap(), 16, 16, 12))
        .collect::<Result<_>>()?;
    for w in reports.windows(2) {
        if w[1].dense_flops != 4 * w[0].dense_flops {
            failures.push(format!(
                "dense not 4x per doubling: {} -> {}",
                w[0].dense_flops, w[1].dense_flops
            ));
        }
    }
    // Affinity: with sparse(n) = alpha n + c, consecutive differences double
    // exactly as the step doubles.
    let vals: Vec<i128> = reports.iter().map(|r| r.sparse_flops as i128).collect();
    let d1 = vals[1] - vals[0];
    let d2 = vals[2] - vals[1];
    let d3 = vals[3] - vals[2];
    if d2 != 2 * d1 || d3 != 2 * d2 {
        failures.push(format!("sparse not affine in n: diffs {d1} {d2} {d3}"));
    }
    // Equivalent formulation: after subtracting the fixed global-row term,
    // doubling n doubles the count.
    let g_blocks = 2u64;
    let slots = (2 + 3 + 3) as u64;
    let per_key = (2 * 16 + 2 * 16 + crate::block::FLOPS_PER_KEY_CONST) as i128;
    let fixed = 12i128 * per_key * (g_blocks as i128) * 64 * (slots as i128) * 64;
    for (pair, w) in reports.windows(2).enumerate() {
        let a = w[0].sparse_flops as i128 + fixed;
        let b = w[1].sparse_flops as i128 + fixed;
        if b != 2 * a {
            failures.push(format!("pair {pair}: fixed-term-adjusted sparse not 2x"));
        }
    }
    Ok(SuiteReport {
        name: "flops",
        passed: failures.is_empty(),
        cases: ns.len(),
        worst_error: 0.0,
        failures,
    })
}

/// Run the four CLI-exposed suites.
pub fn run_all(seed: u64) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        suite_equivalence(seed, 50, 1e-10)?,
        suite_gradcheck(seed)?,
        suite_theory(seed)?,
        suite_graphs(seed)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equivalence_suite_passes_quickly() {
        let r = suite_equivalence(1, 8, 1e-10).unwrap();
        assert!(r.passed, "{:?}", r.failures);
        assert!(r.worst_error <= 1e-10);
    }

    #[test]
    fn gradcheck_suite_passes() {
        let r = suite_gradcheck(1).unwrap();
        assert!(r.passed, "{:?}", r.failures);
        assert!(r.cases >= 200);
    }

    #[test]
    fn theory_suite_passes() {
        let r = suite_theory(1).unwrap();
        assert!(r.passed, "{:?}", r.failures);
    }

    #[test]
    fn graphs_suite_passes() {
        let r = suite_graphs(1).unwrap();
        assert!(r.passed, "{:?}", r.failures);
    }

    #[test]
    fn furthest_check_passes() {
        let r = check_furthest(1, 20).unwrap();
        assert!(r.passed, "{:?}", r.failures);
    }

    #[test]
    fn turing_check_passes() {
        let r = check_turing_graph(500);
        assert!(r.passed, "{:?}", r.failures);
    }

    #[test]
    fn flop_check_passes() {
        let r = check_flop_scaling().unwrap();
        assert!(r.passed, "{:?}", r.failures);
    }
}
