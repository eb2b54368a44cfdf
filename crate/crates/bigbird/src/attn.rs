//! Dense masked attention: the trusted reference path.
//!
//! Per-head output for row i is sigma((x_i W_Q)(X_N(i) W_K)^T) (X_N(i) W_V),
//! restricted to row i's neighbor set. Heads are summed, not concatenated,
//! and the residual x_i is NOT added here: the encoder layer owns the
//! residual, which keeps the two places from double-adding it.

use crate::error::{Error, Result};
use crate::mat::{dot, Mat};
use crate::pattern::TokenMask;

/// Per-head projection weights. `w_q`, `w_k` are d x m; `w_v` is d x d.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub w_q: Mat,
    pub w_k: Mat,
    pub w_v: Mat,
}

impl HeadParams {
    pub fn new(w_q: Mat, w_k: Mat, w_v: Mat) -> Result<Self> {
        let d = w_q.rows();
        let m = w_q.cols();
        if w_k.rows() != d || w_k.cols() != m {
            return Err(Error::ShapeMismatch {
                expected: format!("w_k {d}x{m}"),
                got: format!("{}x{}", w_k.rows(), w_k.cols()),
            });
        }
        if w_v.rows() != d || w_v.cols() != d {
            return Err(Error::ShapeMismatch {
                expected: format!("w_v {d}x{d}"),
                got: format!("{}x{}", w_v.rows(), w_v.cols()),
            });
        }
        Ok(Self { w_q, w_k, w_v })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.w_q.rows(), self.w_q.cols())
    }
}

/// Scoring function. `Softmax { scale }` multiplies raw scores by `scale`
/// before the softmax; scale 1 is the default, and `Softmax::practical(m)`
/// gives the conventional 1/sqrt(m) variant for benchmarks. `Hardmax`
/// distributes weight uniformly over the argmax set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoreKind {
    Softmax { scale: f64 },
    Hardmax,
}

impl ScoreKind {
    pub fn softmax() -> Self {
        Self::Softmax { scale: 1.0 }
    }

    /// 1/sqrt(m)-scaled softmax.
    pub fn practical(m: usize) -> Self {
        Self::Softmax { scale: 1.0 / (m as f64).sqrt() }
    }
}

/// Reject non-finite input matrices before they poison a softmax.
pub fn ensure_finite(x: &Mat) -> Result<()> {
    if let Some(pos) = x.data().iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "input entry {pos} is not finite ({})",
            x.data()[pos]
        )));
    }
    Ok(())
}

/// Numerically stable softmax over a non-empty score slice: max-subtraction,
/// exponentiation, normalization. Weights are positive and sum to 1.
pub fn masked_softmax(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::EmptyMaskRow { row: 0 });
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.iter().map(|&e| e / sum).collect())
}

/// Attention weights for one row of scores under the given scoring kind.
/// Hardmax ties (exact float equality) share the weight uniformly.
pub fn score_weights(scores: &[f64], kind: ScoreKind) -> Result<Vec<f64>> {
    match kind {
        ScoreKind::Softmax { scale } => {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "softmax scale must be positive and finite, got {scale}"
                )));
            }
            let scaled: Vec<f64> = scores.iter().map(|&s| s * scale).collect();
            masked_softmax(&scaled)
        }
        ScoreKind::Hardmax => {
            if scores.is_empty() {
                return Err(Error::EmptyMaskRow { row: 0 });
            }
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let count = scores.iter().filter(|&&s| s == max).count();
            let w = 1.0 / count as f64;
            Ok(scores.iter().map(|&s| if s == max { w } else { 0.0 }).collect())
        }
    }
}

/// Generalized masked attention over an explicit token mask, summed over
/// heads, no residual. Row i touches only columns j with mask(i, j).
pub fn attn_dense(x: &Mat, heads: &[HeadParams], mask: &TokenMask, kind: ScoreKind) -> Result<Mat> {
    let n = x.rows();
    let d = x.cols();
    ensure_finite(x)?;
    if mask.n() != n {
        return Err(Error::ShapeMismatch {
            expected: format!("mask {n}x{n}"),
            got: format!("mask {}x{}", mask.n(), mask.n()),
        });
    }
    let mut out = Mat::zeros(n, d);
    let mut projections = Vec::with_capacity(heads.len());
    for head in heads {
        let (hd, _) = head.dims();
        if hd != d {
            return Err(Error::ShapeMismatch {
                expected: format!("head input dim {d}"),
                got: format!("{hd}"),
            });
        }
        projections.push((x.matmul(&head.w_q)?, x.matmul(&head.w_k)?, x.matmul(&head.w_v)?));
    }
    // Neighbor lists are collected per row and dropped, so a full mask at
    // large n does not hold n^2 indices at once.
    for i in 0..n {
        let nb = mask.row_neighbors(i);
        if nb.is_empty() {
            return Err(Error::EmptyMaskRow { row: i });
        }
        for (q, k, v) in &projections {
            let qi = q.row(i);
            let scores: Vec<f64> = nb.iter().map(|&j| dot(qi, k.row(j))).collect();
            let weights = score_weights(&scores, kind).map_err(|e| match e {
                Error::EmptyMaskRow { .. } => Error::EmptyMaskRow { row: i },
                other => other,
            })?;
            let orow = out.row_mut(i);
            for (&j, &w) in nb.iter().zip(&weights) {
                if w == 0.0 {
                    continue;
                }
                for (o, &val) in orow.iter_mut().zip(v.row(j)) {
                    *o += w * val;
                }
            }
        }
    }
    Ok(out)
}

/// Result row of the furthest-vector construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FurthestRow {
    /// Smallest index attaining the maximum distance.
    pub index: usize,
    /// All indices attaining it (length > 1 means a tie).
    pub argmax_set: Vec<usize>,
    /// The attention output: the furthest vector itself, or the average of
    /// the tied candidates when `tie` is set.
    pub vector: Vec<f64>,
    pub tie: bool,
}

/// Furthest-vector task solved by one hardmax attention layer.
///
/// Inputs are embedded as [u_i; 0] in R^(2d); the single head uses
/// Q([a; b]) = -a, K([a; b]) = a, V([a; b]) = [0; a], so hardmax selects
/// argmax_k ||u_k - u_i||^2 = argmin_k <u_i, u_k>. Rows whose argmax set has
/// more than one element are flagged as ties (a uniform hardmax would average
/// the candidates, which is not an answer to the task).
pub fn furthest_vector(unit_vectors: &Mat) -> Result<Vec<FurthestRow>> {
    let n = unit_vectors.rows();
    let d = unit_vectors.cols();
    if n == 0 {
        return Err(Error::InvalidConfig("need at least one vector".into()));
    }
    for i in 0..n {
        let norm = dot(unit_vectors.row(i), unit_vectors.row(i)).sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "row {i} has norm {norm}, expected unit length"
            )));
        }
    }

    // Embed [u; 0] and build the construction's single head.
    let mut x = Mat::zeros(n, 2 * d);
    for i in 0..n {
        x.row_mut(i)[..d].copy_from_slice(unit_vectors.row(i));
    }
    let mut w_q = Mat::zeros(2 * d, d);
    let mut w_k = Mat::zeros(2 * d, d);
    let mut w_v = Mat::zeros(2 * d, 2 * d);
    for c in 0..d {
        w_q[(c, c)] = -1.0;
        w_k[(c, c)] = 1.0;
        w_v[(c, d + c)] = 1.0;
    }
    let head = HeadParams::new(w_q, w_k, w_v)?;
    let full = TokenMask::full(n);
    let attn = attn_dense(&x, &[head], &full, ScoreKind::Hardmax)?;

    // Recover indices and tie flags from the same scores hardmax saw.
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let ui = unit_vectors.row(i);
        let scores: Vec<f64> = (0..n).map(|k| -dot(ui, unit_vectors.row(k))).collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let argmax_set: Vec<usize> =
            (0..n).filter(|&k| scores[k] == max).collect();
        rows.push(FurthestRow {
            index: argmax_set[0],
            tie: argmax_set.len() > 1,
            argmax_set,
            vector: attn.row(i)[d..].to_vec(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::rel_linf;
    use crate::rng::Rng64;

    #[test]
    fn softmax_uniform_over_equal_scores() {
        let w = masked_softmax(&[2.5; 4]).unwrap();
        for &x in &w {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_closed_form() {
        // scores (0, ln 3) -> weights (1/4, 3/4)
        let w = masked_softmax(&[0.0, 3.0f64.ln()]).unwrap();
        assert!((w[0] - 0.25).abs() < 1e-12);
        assert!((w[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn softmax_shift_invariance() {
        let s = [0.3, -1.2, 4.0, 0.0];
        let shifted: Vec<f64> = s.iter().map(|x| x + 123.0).collect();
        let a = masked_softmax(&s).unwrap();
        let b = masked_softmax(&shifted).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_sums_to_one() {
        let w = masked_softmax(&[1e4, -1e4, 3.0]).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn softmax_empty_errors() {
        assert!(masked_softmax(&[]).is_err());
    }

    fn random_heads(d: usize, m: usize, count: usize, rng: &mut Rng64) -> Vec<HeadParams> {
        (0..count)
            .map(|_| {
                HeadParams::new(
                    Mat::random(d, m, -1.0, 1.0, rng),
                    Mat::random(d, m, -1.0, 1.0, rng),
                    Mat::random(d, d, -1.0, 1.0, rng),
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn zero_values_give_zero_output() {
        let mut rng = Rng64::new(1);
        let x = Mat::random(5, 3, -1.0, 1.0, &mut rng);
        let head = HeadParams::new(
            Mat::random(3, 2, -1.0, 1.0, &mut rng),
            Mat::random(3, 2, -1.0, 1.0, &mut rng),
            Mat::zeros(3, 3),
        )
        .unwrap();
        let out = attn_dense(&x, &[head], &TokenMask::full(5), ScoreKind::softmax()).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn uniform_weights_give_row_mean() {
        // W_Q = W_K = 0 makes all scores equal, so each output row is the
        // mean of the rows of X W_V.
        let mut rng = Rng64::new(2);
        let x = Mat::random(4, 3, -1.0, 1.0, &mut rng);
        let w_v = Mat::random(3, 3, -1.0, 1.0, &mut rng);
        let head = HeadParams::new(Mat::zeros(3, 2), Mat::zeros(3, 2), w_v.clone()).unwrap();
        let out = attn_dense(&x, &[head], &TokenMask::full(4), ScoreKind::softmax()).unwrap();
        let xv = x.matmul(&w_v).unwrap();
        for i in 0..4 {
            for c in 0..3 {
                let mean: f64 = (0..4).map(|j| xv[(j, c)]).sum::<f64>() / 4.0;
                assert!((out[(i, c)] - mean).abs() < 1e-12);
            }
        }
    }

    /// Scalar-loop oracle written independently of the main path: explicit
    /// per-row loops, no Mat::matmul.
    fn attn_scalar_oracle(x: &Mat, heads: &[HeadParams], mask: &TokenMask, kind: ScoreKind) -> Mat {
        let n = x.rows();
        let d = x.cols();
        let mut out = Mat::zeros(n, d);
        for head in heads {
            let (_, m) = head.dims();
            for i in 0..n {
                let nb: Vec<usize> = (0..n).filter(|&j| mask.get(i, j)).collect();
                let mut qi = vec![0.0; m];
                for c in 0..m {
                    for t in 0..d {
                        qi[c] += x[(i, t)] * head.w_q[(t, c)];
                    }
                }
                let mut scores = Vec::new();
                for &j in &nb {
                    let mut kj = vec![0.0; m];
                    for c in 0..m {
                        for t in 0..d {
                            kj[c] += x[(j, t)] * head.w_k[(t, c)];
                        }
                    }
                    scores.push(qi.iter().zip(&kj).map(|(a, b)| a * b).sum());
                }
                let weights = score_weights(&scores, kind).unwrap();
                for (&j, &w) in nb.iter().zip(&weights) {
                    for c in 0..d {
                        let mut vj = 0.0;
                        for t in 0..d {
                            vj += x[(j, t)] * head.w_v[(t, c)];
                        }
                        out[(i, c)] += w * vj;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn matches_scalar_loop_oracle() {
        let mut rng = Rng64::new(3);
        let x = Mat::random(3, 2, -1.0, 1.0, &mut rng);
        let heads = random_heads(2, 2, 2, &mut rng);
        let mut mask = TokenMask::new(3);
        for i in 0..3 {
            mask.set(i, i, true);
            mask.set(i, (i + 1) % 3, true);
        }
        for kind in [ScoreKind::softmax(), ScoreKind::Hardmax] {
            let a = attn_dense(&x, &heads, &mask, kind).unwrap();
            let b = attn_scalar_oracle(&x, &heads, &mask, kind);
            assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn full_mask_matches_second_dense_implementation() {
        let mut rng = Rng64::new(4);
        for n in [2usize, 7, 32] {
            let x = Mat::random(n, 4, -1.0, 1.0, &mut rng);
            let heads = random_heads(4, 3, 2, &mut rng);
            let mask = TokenMask::full(n);
            let a = attn_dense(&x, &heads, &mask, ScoreKind::softmax()).unwrap();
            let b = attn_scalar_oracle(&x, &heads, &mask, ScoreKind::softmax());
            assert!(rel_linf(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn locality_outside_neighborhood() {
        // Changing x_j for j outside N(i) leaves row i unchanged.
        let mut rng = Rng64::new(5);
        let x = Mat::random(4, 3, -1.0, 1.0, &mut rng);
        let heads = random_heads(3, 2, 1, &mut rng);
        let mut mask = TokenMask::new(4);
        for i in 0..4 {
            mask.set(i, i, true);
        }
        mask.set(0, 1, true);
        let before = attn_dense(&x, &heads, &mask, ScoreKind::softmax()).unwrap();
        let mut x2 = x.clone();
        x2.row_mut(3).iter_mut().for_each(|v| *v += 10.0);
        let after = attn_dense(&x2, &heads, &mask, ScoreKind::softmax()).unwrap();
        assert_eq!(before.row(0), after.row(0));
        assert_eq!(before.row(1), after.row(1));
    }

    #[test]
    fn empty_row_names_the_row() {
        let mut rng = Rng64::new(6);
        let x = Mat::random(3, 2, -1.0, 1.0, &mut rng);
        let heads = random_heads(2, 2, 1, &mut rng);
        let mut mask = TokenMask::new(3);
        mask.set(0, 0, true);
        mask.set(2, 1, true);
        let err = attn_dense(&x, &heads, &mask, ScoreKind::softmax()).unwrap_err();
        assert_eq!(err, Error::EmptyMaskRow { row: 1 });
    }

    #[test]
    fn hardmax_is_zero_temperature_limit() {
        let mut rng = Rng64::new(7);
        let x = Mat::random(6, 3, -1.0, 1.0, &mut rng);
        let heads = random_heads(3, 3, 1, &mut rng);
        let mask = TokenMask::full(6);
        let hard = attn_dense(&x, &heads, &mask, ScoreKind::Hardmax).unwrap();
        let sharp = attn_dense(&x, &heads, &mask, ScoreKind::Softmax { scale: 1e4 }).unwrap();
        assert!(rel_linf(&sharp, &hard) < 1e-6);
    }

    #[test]
    fn permutation_equivariance_under_full_mask() {
        let mut rng = Rng64::new(8);
        let n = 5;
        let x = Mat::random(n, 3, -1.0, 1.0, &mut rng);
        let heads = random_heads(3, 2, 2, &mut rng);
        let mask = TokenMask::full(n);
        let perm = [3usize, 0, 4, 1, 2];
        let mut px = Mat::zeros(n, 3);
        for (i, &p) in perm.iter().enumerate() {
            px.row_mut(i).copy_from_slice(x.row(p));
        }
        let out = attn_dense(&x, &heads, &mask, ScoreKind::softmax()).unwrap();
        let pout = attn_dense(&px, &heads, &mask, ScoreKind::softmax()).unwrap();
        for (i, &p) in perm.iter().enumerate() {
            for c in 0..3 {
                assert!((pout[(i, c)] - out[(p, c)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn furthest_vector_small_instance() {
        // U = {(1,0), (0,1), (-1,0)}: row 0 -> 2, row 2 -> 0, row 1 tied
        // between 0 and 2.
        let u = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        let rows = furthest_vector(&u).unwrap();
        assert_eq!(rows[0].index, 2);
        assert!(!rows[0].tie);
        assert_eq!(rows[0].vector, vec![-1.0, 0.0]);
        assert_eq!(rows[2].index, 0);
        assert_eq!(rows[2].vector, vec![1.0, 0.0]);
        assert!(rows[1].tie);
        assert_eq!(rows[1].argmax_set, vec![0, 2]);
    }

    #[test]
    fn furthest_vector_single_input() {
        let u = Mat::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let rows = furthest_vector(&u).unwrap();
        assert_eq!(rows[0].index, 0);
        assert!(!rows[0].tie);
    }

    #[test]
    fn furthest_vector_rejects_non_unit() {
        let u = Mat::from_rows(&[vec![2.0, 0.0]]).unwrap();
        assert!(furthest_vector(&u).is_err());
    }

    #[test]
    fn furthest_vector_matches_brute_force() {
        let mut rng = Rng64::new(9);
        for _ in 0..40 {
            let n = 2 + rng.below(30) as usize;
            let d = 4;
            let mut u = Mat::zeros(n, d);
            for i in 0..n {
                let v: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                for (c, val) in v.iter().enumerate() {
                    u[(i, c)] = val / norm;
                }
            }
            let rows = furthest_vector(&u).unwrap();
            for (i, row) in rows.iter().enumerate() {
                // Brute force over pairwise squared distances.
                let mut best = 0;
                let mut best_d = f64::NEG_INFINITY;
                for k in 0..n {
                    let dist: f64 = (0..d).map(|c| (u[(k, c)] - u[(i, c)]).powi(2)).sum();
                    if dist > best_d {
                        best_d = dist;
                        best = k;
                    }
                }
                if !row.tie {
                    assert_eq!(row.index, best, "row {i}");
                    assert_eq!(row.vector, u.row(best).to_vec());
                }
            }
        }
    }
}
