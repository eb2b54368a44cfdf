//! The selective shift operator: move coordinate 0 of exactly the rows whose
//! projection falls in a window, by rho times the projection spread of their
//! neighborhood. Also shows that its max/min building block is literally one
//! hardmax attention call.
//!
//! ```bash
//! cargo run --example selective_shift
//! ```

use bigbird::attn::{attn_dense, HeadParams, ScoreKind};
use bigbird::mat::{dot, Mat};
use bigbird::pattern::{build_star, TokenMask};
use bigbird::rng::Rng64;
use bigbird::theory::{selective_shift, ShiftParams};

fn main() {
    let x = Mat::from_rows(&[
        vec![0.0, 1.0],
        vec![2.0, 0.0],
        vec![5.0, -1.0],
        vec![-1.0, 0.5],
    ])
    .unwrap();
    let u = vec![1.0, 1.0];
    println!("projections u.x_i: {:?}", (0..4).map(|i| dot(&u, x.row(i))).collect::<Vec<_>>());

    // Complete-graph neighborhood: every in-range row shifts by the global
    // spread.
    let p = ShiftParams { u: u.clone(), b1: 0.5, b2: 1.5, rho: 3.0, graph: TokenMask::full(4) };
    let (out, shifted) = selective_shift(&x, &p).unwrap();
    println!("range [0.5, 1.5], rho 3, complete graph -> rows {shifted:?} shifted");
    for &i in &shifted {
        println!("  row {i}: coordinate 0 {} -> {}", x[(i, 0)], out[(i, 0)]);
    }

    // Star-graph neighborhood: leaves only see the hub and themselves.
    let star = build_star(3).unwrap();
    let p_star = ShiftParams { u: u.clone(), b1: -2.0, b2: 10.0, rho: 1.0, graph: star };
    let (_, shifted_star) = selective_shift(&x, &p_star).unwrap();
    println!("same rows under the star graph -> rows {shifted_star:?} shifted (spreads differ per row)");

    // An inverted range is empty.
    let p_empty = ShiftParams { u, b1: 2.0, b2: -2.0, rho: 1.0, graph: TokenMask::full(4) };
    let (same, none) = selective_shift(&x, &p_empty).unwrap();
    println!("inverted range: {} rows shifted, matrix unchanged ({})", none.len(), same == x);

    // The max/min selector as a single hardmax attention head. Inputs are
    // augmented with a ones column so the threshold b becomes a linear weight:
    // Q(x) = u.x - b, K(x) = u.x, V(x) = (u.x) e_1. Rows above b read the
    // neighborhood max, rows below read the min.
    let mut rng = Rng64::new(9);
    let n = 5;
    let raw = Mat::random(n, 2, -1.0, 1.0, &mut rng);
    let b = 0.1;
    let uu = [0.7, -0.4];
    let mut xa = Mat::zeros(n, 3);
    for i in 0..n {
        xa.row_mut(i)[..2].copy_from_slice(raw.row(i));
        xa.row_mut(i)[2] = 1.0;
    }
    let mut w_q = Mat::zeros(3, 1);
    let mut w_k = Mat::zeros(3, 1);
    let mut w_v = Mat::zeros(3, 3);
    for c in 0..2 {
        w_q[(c, 0)] = uu[c];
        w_k[(c, 0)] = uu[c];
        w_v[(c, 0)] = uu[c];
    }
    w_q[(2, 0)] = -b;
    let head = HeadParams::new(w_q, w_k, w_v).unwrap();
    let attn = attn_dense(&xa, &[head], &TokenMask::full(n), ScoreKind::Hardmax).unwrap();
    let proj: Vec<f64> = (0..n).map(|i| dot(&uu, raw.row(i))).collect();
    let max = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = proj.iter().copied().fold(f64::INFINITY, f64::min);
    println!("\nhardmax attention as the max/min selector (threshold b = {b}):");
    for i in 0..n {
        println!(
            "  row {i}: u.x = {:+.3} {} b -> attention reads {:+.3} (true {}: {:+.3})",
            proj[i],
            if proj[i] > b { ">" } else { "<" },
            attn[(i, 0)],
            if proj[i] > b { "max" } else { "min" },
            if proj[i] > b { max } else { min },
        );
    }
}
