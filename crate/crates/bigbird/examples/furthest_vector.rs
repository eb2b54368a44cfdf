//! The furthest-vector task: for each unit vector, find the one furthest
//! away. One full-attention hardmax layer solves it exactly (the output
//! rows literally carry the furthest vectors), while any fixed sparse
//! pattern must miss some pairs.
//!
//! ```bash
//! cargo run --example furthest_vector
//! ```

use bigbird::attn::furthest_vector;
use bigbird::mat::Mat;
use bigbird::rng::Rng64;

fn main() {
    // Tiny instance with a deliberate tie: (0,1) is equidistant from (1,0)
    // and (-1,0).
    let u = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
    println!("3 unit vectors: (1,0), (0,1), (-1,0)");
    for (i, row) in furthest_vector(&u).unwrap().iter().enumerate() {
        if row.tie {
            println!(
                "  row {}: tie among {:?} (flagged; a uniform hardmax would average them)",
                i + 1,
                row.argmax_set.iter().map(|k| k + 1).collect::<Vec<_>>()
            );
        } else {
            println!("  row {} -> vector {} {:?}", i + 1, row.index + 1, row.vector);
        }
    }

    // Random instances at the task's dimension d = ceil(log^2 n), checked
    // against brute-force pairwise distances.
    let mut rng = Rng64::new(42);
    let mut checked = 0;
    let mut agree = 0;
    for _ in 0..50 {
        let n = 4 + rng.below(61) as usize;
        let d = ((n as f64).log2().powi(2).ceil() as usize).max(2);
        let mut vectors = Mat::zeros(n, d);
        for i in 0..n {
            let v: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for (c, val) in v.iter().enumerate() {
                vectors[(i, c)] = val / norm;
            }
        }
        for (i, row) in furthest_vector(&vectors).unwrap().iter().enumerate() {
            if row.tie {
                continue;
            }
            checked += 1;
            let mut best = 0;
            let mut best_d = f64::NEG_INFINITY;
            for k in 0..n {
                let dist: f64 = (0..d).map(|c| (vectors[(k, c)] - vectors[(i, c)]).powi(2)).sum();
                if dist > best_d {
                    best_d = dist;
                    best = k;
                }
            }
            if best == row.index {
                agree += 1;
            }
        }
    }
    println!("\n50 random instances (n up to 64, d = ceil(log^2 n)):");
    println!("  {agree}/{checked} non-tied rows agree with the brute-force oracle");
}
