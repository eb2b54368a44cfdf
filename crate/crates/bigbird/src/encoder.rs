//! Single-layer encoder (attention + residual + feed-forward + residual),
//! stacking, the ETC global-token lifecycle, and a finite-difference gradient
//! checker against a hand-derived backward pass.
//!
//! Layer output: z_i = O(a_i) + a_i with a_i = Attn(X)_i + x_i and
//! O(a) = ReLU(a W1 + b1) W2 + b2. No layer normalization; zero-parameter
//! layers are exact identities.

use crate::attn::{attn_dense, HeadParams, ScoreKind};
use crate::block::attn_block_sparse;
use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::pattern::{build_bigbird, expand_to_tokens, extend_etc, BlockPatternConfig, Mode, TokenMask};
use crate::rng::Rng64;

/// Weights of one encoder layer: attention heads plus the two-layer output
/// network (W1: d x q, b1: q, W2: q x d, b2: d).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub heads: Vec<HeadParams>,
    pub w1: Mat,
    pub b1: Vec<f64>,
    pub w2: Mat,
    pub b2: Vec<f64>,
}

impl LayerParams {
    pub fn new(heads: Vec<HeadParams>, w1: Mat, b1: Vec<f64>, w2: Mat, b2: Vec<f64>) -> Result<Self> {
        let d = w1.rows();
        let q = w1.cols();
        if b1.len() != q || w2.rows() != q || w2.cols() != d || b2.len() != d {
            return Err(Error::ShapeMismatch {
                expected: format!("ffn shapes for d={d}, q={q}"),
                got: format!(
                    "b1: {}, w2: {}x{}, b2: {}",
                    b1.len(),
                    w2.rows(),
                    w2.cols(),
                    b2.len()
                ),
            });
        }
        for h in &heads {
            if h.w_q.rows() != d {
                return Err(Error::ShapeMismatch {
                    expected: format!("head input dim {d}"),
                    got: format!("{}", h.w_q.rows()),
                });
            }
        }
        Ok(Self { heads, w1, b1, w2, b2 })
    }

    /// All-zero parameters (the layer becomes the identity map).
    pub fn zeros(heads: usize, d: usize, m: usize, q: usize) -> Self {
        let head = |_: usize| {
            HeadParams::new(Mat::zeros(d, m), Mat::zeros(d, m), Mat::zeros(d, d)).unwrap()
        };
        Self {
            heads: (0..heads).map(head).collect(),
            w1: Mat::zeros(d, q),
            b1: vec![0.0; q],
            w2: Mat::zeros(q, d),
            b2: vec![0.0; d],
        }
    }

    pub fn random(heads: usize, d: usize, m: usize, q: usize, rng: &mut Rng64) -> Self {
        let head = |rng: &mut Rng64| {
            HeadParams::new(
                Mat::random(d, m, -0.5, 0.5, rng),
                Mat::random(d, m, -0.5, 0.5, rng),
                Mat::random(d, d, -0.5, 0.5, rng),
            )
            .unwrap()
        };
        Self {
            heads: (0..heads).map(|_| head(rng)).collect(),
            w1: Mat::random(d, q, -0.5, 0.5, rng),
            b1: (0..q).map(|_| rng.range(-0.5, 0.5)).collect(),
            w2: Mat::random(q, d, -0.5, 0.5, rng),
            b2: (0..d).map(|_| rng.range(-0.5, 0.5)).collect(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.w1.rows(), self.w1.cols())
    }

    /// Number of scalar parameters.
    pub fn param_count(&self) -> usize {
        let (d, q) = self.dims();
        let per_head: usize = self
            .heads
            .iter()
            .map(|h| h.w_q.rows() * h.w_q.cols() * 2 + h.w_v.rows() * h.w_v.cols())
            .sum();
        per_head + d * q + q + q * d + d
    }
}

/// Mask selection for an encoder: either a block pattern (this also enables
/// the blocked compute path) or an explicit token mask.
#[derive(Debug, Clone)]
pub enum MaskSpec {
    Pattern(BlockPatternConfig),
    Explicit(TokenMask),
}

/// Which attention implementation a stack runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComputePath {
    Dense,
    Blocked,
}

/// Encoder stack configuration.
///
/// ETC mode is selected by providing `etc_globals` (the g·b explicit global
/// vectors): they are prepended to the input, the mask is extended
/// accordingly, and the corresponding output rows are dropped at the end.
/// `position_embedding`, when present, is one d-vector per base position
/// added row-wise at the input (the construction's E is written transposed,
/// d x n; rows here).
#[derive(Debug, Clone)]
pub struct EncoderConfig {
    pub layers: Vec<LayerParams>,
    pub mask: MaskSpec,
    pub kind: ScoreKind,
    pub etc_globals: Option<Mat>,
    pub position_embedding: Option<Mat>,
    pub path: ComputePath,
}

/// Feed-forward output network O(a) = ReLU(a W1 + b1) W2 + b2 on one vector.
pub fn ffn(a: &[f64], p: &LayerParams) -> Result<Vec<f64>> {
    let (d, _q) = p.dims();
    if a.len() != d {
        return Err(Error::ShapeMismatch {
            expected: format!("vector of dim {d}"),
            got: format!("{}", a.len()),
        });
    }
    let mut hidden = p.b1.clone();
    for (t, &av) in a.iter().enumerate() {
        if av == 0.0 {
            continue;
        }
        for (c, h) in hidden.iter_mut().enumerate() {
            *h += av * p.w1[(t, c)];
        }
    }
    for h in hidden.iter_mut() {
        *h = h.max(0.0);
    }
    let mut out = p.b2.clone();
    for (t, &hv) in hidden.iter().enumerate() {
        if hv == 0.0 {
            continue;
        }
        for (c, o) in out.iter_mut().enumerate() {
            *o += hv * p.w2[(t, c)];
        }
    }
    Ok(out)
}

/// One encoder layer over an explicit token mask via the dense path.
pub fn encoder_layer(x: &Mat, p: &LayerParams, mask: &TokenMask, kind: ScoreKind) -> Result<Mat> {
    let attn = attn_dense(x, &p.heads, mask, kind)?;
    layer_from_attention(x, p, attn)
}

/// One encoder layer over a block pattern via the blocked path.
pub fn encoder_layer_blocked(
    x: &Mat,
    p: &LayerParams,
    cfg: &BlockPatternConfig,
    kind: ScoreKind,
) -> Result<Mat> {
    let attn = attn_block_sparse(x, &p.heads, cfg, kind)?;
    layer_from_attention(x, p, attn)
}

fn layer_from_attention(x: &Mat, p: &LayerParams, attn: Mat) -> Result<Mat> {
    let a = attn.add(x)?;
    let mut z = Mat::zeros(a.rows(), a.cols());
    for i in 0..a.rows() {
        let o = ffn(a.row(i), p)?;
        for (zv, (ov, av)) in z.row_mut(i).iter_mut().zip(o.iter().zip(a.row(i))) {
            *zv = ov + av;
        }
    }
    Ok(z)
}

/// Run a full encoder stack.
///
/// ITC (no `etc_globals`): fold the layers over the input. ETC: prepend the
/// global vectors, extend an explicit mask by g·b rows/cols (a pattern in ETC
/// mode already accounts for them), run all layers, and drop the global rows
/// from the output, returning an n x d matrix.
pub fn encoder_stack(x: &Mat, cfg: &EncoderConfig) -> Result<Mat> {
    let mut h = x.clone();
    if let Some(e) = &cfg.position_embedding {
        if e.rows() != x.rows() || e.cols() != x.cols() {
            return Err(Error::ShapeMismatch {
                expected: format!("position embedding {}x{}", x.rows(), x.cols()),
                got: format!("{}x{}", e.rows(), e.cols()),
            });
        }
        h = h.add(e)?;
    }

    let g_tokens = cfg.etc_globals.as_ref().map_or(0, Mat::rows);
    if let Some(globals) = &cfg.etc_globals {
        if globals.cols() != x.cols() {
            return Err(Error::ShapeMismatch {
                expected: format!("global vectors of dim {}", x.cols()),
                got: format!("{}", globals.cols()),
            });
        }
        let mut with_globals = Mat::zeros(g_tokens + h.rows(), h.cols());
        for i in 0..g_tokens {
            with_globals.row_mut(i).copy_from_slice(globals.row(i));
        }
        for i in 0..h.rows() {
            with_globals.row_mut(g_tokens + i).copy_from_slice(h.row(i));
        }
        h = with_globals;
    }

    // Resolve the token mask and check mode consistency.
    let (token_mask, pattern_cfg) = match &cfg.mask {
        MaskSpec::Pattern(p) => {
            match (p.mode, g_tokens) {
                (Mode::Etc, g) if g != p.global_blocks * p.block_size => {
                    return Err(Error::InvalidConfig(format!(
                        "ETC pattern expects {} global tokens, got {g}",
                        p.global_blocks * p.block_size
                    )));
                }
                (Mode::Itc, g) if g != 0 => {
                    return Err(Error::InvalidConfig(
                        "ITC pattern cannot take prepended global vectors".into(),
                    ));
                }
                _ => {}
            }
            (expand_to_tokens(&build_bigbird(p)?, p.block_size)?, Some(*p))
        }
        MaskSpec::Explicit(m) => {
            let m = if g_tokens > 0 { extend_etc(m, g_tokens) } else { m.clone() };
            (m, None)
        }
    };
    if token_mask.n() != h.rows() {
        return Err(Error::ShapeMismatch {
            expected: format!("mask side {}", h.rows()),
            got: format!("{}", token_mask.n()),
        });
    }

    for p in &cfg.layers {
        h = match (cfg.path, &pattern_cfg) {
            (ComputePath::Blocked, Some(pc)) => encoder_layer_blocked(&h, p, pc, cfg.kind)?,
            (ComputePath::Blocked, None) => {
                return Err(Error::InvalidConfig(
                    "blocked path requires a block pattern mask".into(),
                ))
            }
            (ComputePath::Dense, _) => encoder_layer(&h, p, &token_mask, cfg.kind)?,
        };
    }

    if g_tokens > 0 {
        let mut out = Mat::zeros(h.rows() - g_tokens, h.cols());
        for i in 0..out.rows() {
            out.row_mut(i).copy_from_slice(h.row(g_tokens + i));
        }
        h = out;
    }
    Ok(h)
}

// ---------------------------------------------------------------------------
// Backward pass and gradient checking
// ---------------------------------------------------------------------------

/// Gradients of a layer's parameters, same shapes as [`LayerParams`].
#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub heads: Vec<HeadParams>,
    pub w1: Mat,
    pub b1: Vec<f64>,
    pub w2: Mat,
    pub b2: Vec<f64>,
}

struct LayerCache {
    x: Mat,
    // Per head: q, k, v projections and per-row weights over neighbor sets.
    heads: Vec<(Mat, Mat, Mat, Vec<Vec<f64>>)>,
    neighbor_sets: Vec<Vec<usize>>,
    a: Mat,
    hidden_pre: Mat,
}

/// Forward pass of one layer that records everything the backward needs.
/// Softmax only.
fn layer_forward_cached(
    x: &Mat,
    p: &LayerParams,
    mask: &TokenMask,
    scale: f64,
) -> Result<(Mat, LayerCache)> {
    let n = x.rows();
    let d = x.cols();
    let neighbor_sets: Vec<Vec<usize>> = (0..n).map(|i| mask.row_neighbors(i)).collect();
    for (i, nb) in neighbor_sets.iter().enumerate() {
        if nb.is_empty() {
            return Err(Error::EmptyMaskRow { row: i });
        }
    }
    let mut attn = Mat::zeros(n, d);
    let mut head_cache = Vec::with_capacity(p.heads.len());
    for head in &p.heads {
        let q = x.matmul(&head.w_q)?;
        let k = x.matmul(&head.w_k)?;
        let v = x.matmul(&head.w_v)?;
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let nb = &neighbor_sets[i];
            let scores: Vec<f64> = nb
                .iter()
                .map(|&j| scale * crate::mat::dot(q.row(i), k.row(j)))
                .collect();
            let w = crate::attn::masked_softmax(&scores)?;
            for (&j, &wj) in nb.iter().zip(&w) {
                for (o, &val) in attn.row_mut(i).iter_mut().zip(v.row(j)) {
                    *o += wj * val;
                }
            }
            weights.push(w);
        }
        head_cache.push((q, k, v, weights));
    }
    let a = attn.add(x)?;
    let hidden_pre = a.matmul(&p.w1)?;
    let mut hidden_pre_b = hidden_pre.clone();
    for i in 0..n {
        for (h, &b) in hidden_pre_b.row_mut(i).iter_mut().zip(&p.b1) {
            *h += b;
        }
    }
    let mut relu = hidden_pre_b.clone();
    relu.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    let mut z = relu.matmul(&p.w2)?;
    for i in 0..n {
        for (zv, &b) in z.row_mut(i).iter_mut().zip(&p.b2) {
            *zv += b;
        }
    }
    let z = z.add(&a)?;
    Ok((
        z,
        LayerCache { x: x.clone(), heads: head_cache, neighbor_sets, a, hidden_pre: hidden_pre_b },
    ))
}

/// Backward pass of one layer: given dL/dZ, produce dL/dX and parameter
/// gradients. Mirrors `layer_forward_cached` exactly.
fn layer_backward(p: &LayerParams, cache: &LayerCache, dz: &Mat, scale: f64) -> (Mat, LayerGrads) {
    let n = cache.x.rows();
    let d = cache.x.cols();

    // FFN backward.
    let relu: Mat = {
        let mut r = cache.hidden_pre.clone();
        r.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        r
    };
    let dw2 = relu.transpose().matmul(dz).unwrap();
    let db2: Vec<f64> = (0..dz.cols())
        .map(|c| (0..n).map(|i| dz[(i, c)]).sum())
        .collect();
    let mut dhidden = dz.matmul(&p.w2.transpose()).unwrap();
    for i in 0..n {
        for (h, &pre) in dhidden.row_mut(i).iter_mut().zip(cache.hidden_pre.row(i)) {
            if pre <= 0.0 {
                *h = 0.0;
            }
        }
    }
    let dw1 = cache.a.transpose().matmul(&dhidden).unwrap();
    let db1: Vec<f64> = (0..dhidden.cols())
        .map(|c| (0..n).map(|i| dhidden[(i, c)]).sum())
        .collect();
    // da = dhidden W1^T + dz (both residual branches).
    let da = dhidden.matmul(&p.w1.transpose()).unwrap().add(dz).unwrap();

    // a = attn + x.
    let mut dx = da.clone();
    let d_attn = da;

    let mut head_grads = Vec::with_capacity(p.heads.len());
    for (head, (q, k, v, weights)) in p.heads.iter().zip(&cache.heads) {
        let m = head.w_q.cols();
        let mut dq = Mat::zeros(n, m);
        let mut dk = Mat::zeros(n, m);
        let mut dv = Mat::zeros(n, d);
        for i in 0..n {
            let nb = &cache.neighbor_sets[i];
            let w = &weights[i];
            // dw_ij = dAttn_i . v_j ; softmax backward.
            let dw: Vec<f64> = nb
                .iter()
                .map(|&j| crate::mat::dot(d_attn.row(i), v.row(j)))
                .collect();
            let inner: f64 = w.iter().zip(&dw).map(|(a, b)| a * b).sum();
            let dscores: Vec<f64> = w.iter().zip(&dw).map(|(&wj, &dwj)| wj * (dwj - inner)).collect();
            for ((&j, &wj), &ds) in nb.iter().zip(w).zip(&dscores) {
                // dv_j += w_ij dAttn_i
                for (dvv, &dav) in dv.row_mut(j).iter_mut().zip(d_attn.row(i)) {
                    *dvv += wj * dav;
                }
                // dq_i += scale * ds * k_j ; dk_j += scale * ds * q_i
                for (dqv, &kv) in dq.row_mut(i).iter_mut().zip(k.row(j)) {
                    *dqv += scale * ds * kv;
                }
                for (dkv, &qv) in dk.row_mut(j).iter_mut().zip(q.row(i)) {
                    *dkv += scale * ds * qv;
                }
            }
        }
        let dwq = cache.x.transpose().matmul(&dq).unwrap();
        let dwk = cache.x.transpose().matmul(&dk).unwrap();
        let dwv = cache.x.transpose().matmul(&dv).unwrap();
        dx = dx
            .add(&dq.matmul(&head.w_q.transpose()).unwrap())
            .unwrap()
            .add(&dk.matmul(&head.w_k.transpose()).unwrap())
            .unwrap()
            .add(&dv.matmul(&head.w_v.transpose()).unwrap())
            .unwrap();
        head_grads.push(HeadParams { w_q: dwq, w_k: dwk, w_v: dwv });
    }
    (dx, LayerGrads { heads: head_grads, w1: dw1, b1: db1, w2: dw2, b2: db2 })
}

/// Sum-of-squares loss of the stacked encoder output and its analytic
/// parameter gradients. Softmax attention at the given scale.
pub fn encoder_loss_and_grads(
    x: &Mat,
    layers: &[LayerParams],
    mask: &TokenMask,
    scale: f64,
) -> Result<(f64, Vec<LayerGrads>)> {
    let mut caches = Vec::with_capacity(layers.len());
    let mut h = x.clone();
    for p in layers {
        let (z, cache) = layer_forward_cached(&h, p, mask, scale)?;
        caches.push(cache);
        h = z;
    }
    let loss: f64 = h.data().iter().map(|v| v * v).sum();
    let mut dz = h.scale(2.0);
    let mut grads = vec![None; layers.len()];
    for (idx, (p, cache)) in layers.iter().zip(&caches).enumerate().rev() {
        let (dx, g) = layer_backward(p, cache, &dz, scale);
        grads[idx] = Some(g);
        dz = dx;
    }
    Ok((loss, grads.into_iter().map(Option::unwrap).collect()))
}

/// Flatten layer parameters into one vector (layer by layer: heads'
/// w_q/w_k/w_v row-major, then w1, b1, w2, b2).
pub fn flatten_params(layers: &[LayerParams]) -> Vec<f64> {
    let mut out = Vec::new();
    for p in layers {
        for h in &p.heads {
            out.extend_from_slice(h.w_q.data());
            out.extend_from_slice(h.w_k.data());
            out.extend_from_slice(h.w_v.data());
        }
        out.extend_from_slice(p.w1.data());
        out.extend_from_slice(&p.b1);
        out.extend_from_slice(p.w2.data());
        out.extend_from_slice(&p.b2);
    }
    out
}

/// Inverse of [`flatten_params`], using `template` for the shapes.
pub fn unflatten_params(template: &[LayerParams], theta: &[f64]) -> Result<Vec<LayerParams>> {
    let expected: usize = template.iter().map(LayerParams::param_count).sum();
    if theta.len() != expected {
        return Err(Error::ShapeMismatch {
            expected: format!("{expected} parameters"),
            got: format!("{}", theta.len()),
        });
    }
    let mut pos = 0;
    let mut take = |len: usize| {
        let s = &theta[pos..pos + len];
        pos += len;
        s.to_vec()
    };
    let mut out = Vec::with_capacity(template.len());
    for p in template {
        let (d, q) = p.dims();
        let mut heads = Vec::with_capacity(p.heads.len());
        for h in &p.heads {
            let m = h.w_q.cols();
            let w_q = Mat::from_vec(d, m, take(d * m))?;
            let w_k = Mat::from_vec(d, m, take(d * m))?;
            let w_v = Mat::from_vec(d, d, take(d * d))?;
            heads.push(HeadParams { w_q, w_k, w_v });
        }
        let w1 = Mat::from_vec(d, q, take(d * q))?;
        let b1 = take(q);
        let w2 = Mat::from_vec(q, d, take(q * d))?;
        let b2 = take(d);
        out.push(LayerParams { heads, w1, b1, w2, b2 });
    }
    Ok(out)
}

/// Central-difference gradient of `f` at `theta` on the given coordinates.
pub fn finite_diff_grad<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    theta: &[f64],
    coords: &[usize],
    eps: f64,
) -> Vec<f64> {
    let mut work = theta.to_vec();
    coords
        .iter()
        .map(|&c| {
            let orig = work[c];
            work[c] = orig + eps;
            let up = f(&work);
            work[c] = orig - eps;
            let down = f(&work);
            work[c] = orig;
            (up - down) / (2.0 * eps)
        })
        .collect()
}

/// Relative error between two gradient values; denominator floored so that
/// coordinates with genuinely tiny gradients compare absolutely.
pub fn grad_rel_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(1e-4);
    (analytic - numeric).abs() / denom
}

/// Check analytic gradients of the sum-of-squares encoder loss against
/// central differences on up to `max_coords` randomly sampled coordinates.
/// Returns the max relative error. Hardmax is rejected (not differentiable).
pub fn encoder_grad_check(
    x: &Mat,
    layers: &[LayerParams],
    mask: &TokenMask,
    kind: ScoreKind,
    eps: f64,
    max_coords: usize,
    seed: u64,
) -> Result<f64> {
    let scale = match kind {
        ScoreKind::Softmax { scale } => scale,
        ScoreKind::Hardmax => {
            return Err(Error::InvalidConfig(
                "gradient check requires softmax scoring; hardmax is not differentiable".into(),
            ))
        }
    };
    let (_, grads) = encoder_loss_and_grads(x, layers, mask, scale)?;
    let analytic_flat = flatten_params(
        &grads
            .iter()
            .map(|g| LayerParams {
                heads: g.heads.clone(),
                w1: g.w1.clone(),
                b1: g.b1.clone(),
                w2: g.w2.clone(),
                b2: g.b2.clone(),
            })
            .collect::<Vec<_>>(),
    );
    let theta = flatten_params(layers);
    let total = theta.len();
    let coords: Vec<usize> = if total <= max_coords {
        (0..total).collect()
    } else {
        let mut rng = Rng64::new(seed);
        let pool: Vec<usize> = (0..total).collect();
        rng.sample_without_replacement(&pool, max_coords)
    };
    let numeric = finite_diff_grad(
        |t| {
            let ls = unflatten_params(layers, t).expect("template shapes");
            let mut h = x.clone();
            for p in &ls {
                h = encoder_layer(&h, p, mask, ScoreKind::Softmax { scale }).expect("forward");
            }
            h.data().iter().map(|v| v * v).sum()
        },
        &theta,
        &coords,
        eps,
    );
    let max_err = coords
        .iter()
        .zip(&numeric)
        .map(|(&c, &num)| grad_rel_error(analytic_flat[c], num))
        .fold(0.0, f64::max);
    Ok(max_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::rel_linf;

    #[test]
    fn ffn_zero_params_gives_zero() {
        let p = LayerParams::zeros(1, 3, 2, 4);
        let out = ffn(&[1.0, -2.0, 0.5], &p).unwrap();
        assert_eq!(out, vec![0.0; 3]);
    }

    #[test]
    fn ffn_relu_clamps() {
        // W1 = I, W2 = I, biases 0: negative coordinates are zeroed.
        let p = LayerParams::new(
            vec![],
            Mat::identity(3),
            vec![0.0; 3],
            Mat::identity(3),
            vec![0.0; 3],
        )
        .unwrap();
        let out = ffn(&[1.5, -2.0, 0.0], &p).unwrap();
        assert_eq!(out, vec![1.5, 0.0, 0.0]);
    }

    #[test]
    fn ffn_matches_scalar_oracle() {
        let mut rng = Rng64::new(1);
        let p = LayerParams::random(0, 4, 2, 5, &mut rng);
        let a: Vec<f64> = (0..4).map(|_| rng.range(-1.0, 1.0)).collect();
        let got = ffn(&a, &p).unwrap();
        // Independent scalar loop.
        let mut expect = vec![0.0; 4];
        for c in 0..4 {
            let mut acc = p.b2[c];
            for t in 0..5 {
                let mut h = p.b1[t];
                for s in 0..4 {
                    h += a[s] * p.w1[(s, t)];
                }
                acc += h.max(0.0) * p.w2[(t, c)];
            }
            expect[c] = acc;
        }
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn ffn_shape_mismatch() {
        let p = LayerParams::zeros(0, 3, 2, 4);
        assert!(ffn(&[0.0; 5], &p).is_err());
    }

    #[test]
    fn zero_layer_is_identity() {
        let mut rng = Rng64::new(2);
        let x = Mat::random(6, 4, -1.0, 1.0, &mut rng);
        let p = LayerParams::zeros(2, 4, 3, 5);
        let z = encoder_layer(&x, &p, &TokenMask::full(6), ScoreKind::softmax()).unwrap();
        assert_eq!(z, x);
    }

    #[test]
    fn layer_matches_manual_composition() {
        let mut rng = Rng64::new(3);
        let x = Mat::random(5, 3, -1.0, 1.0, &mut rng);
        let p = LayerParams::random(2, 3, 2, 4, &mut rng);
        let mask = TokenMask::full(5);
        let z = encoder_layer(&x, &p, &mask, ScoreKind::softmax()).unwrap();
        let attn = attn_dense(&x, &p.heads, &mask, ScoreKind::softmax()).unwrap();
        let a = attn.add(&x).unwrap();
        for i in 0..5 {
            let o = ffn(a.row(i), &p).unwrap();
            for c in 0..3 {
                assert!((z[(i, c)] - (o[c] + a[(i, c)])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stack_of_two_equals_layer_twice() {
        let mut rng = Rng64::new(4);
        let x = Mat::random(6, 3, -1.0, 1.0, &mut rng);
        let p1 = LayerParams::random(1, 3, 2, 4, &mut rng);
        let p2 = LayerParams::random(1, 3, 2, 4, &mut rng);
        let mask = TokenMask::full(6);
        let cfg = EncoderConfig {
            layers: vec![p1.clone(), p2.clone()],
            mask: MaskSpec::Explicit(mask.clone()),
            kind: ScoreKind::softmax(),
            etc_globals: None,
            position_embedding: None,
            path: ComputePath::Dense,
        };
        let stacked = encoder_stack(&x, &cfg).unwrap();
        let manual = encoder_layer(
            &encoder_layer(&x, &p1, &mask, ScoreKind::softmax()).unwrap(),
            &p2,
            &mask,
            ScoreKind::softmax(),
        )
        .unwrap();
        assert_eq!(stacked, manual);
    }

    #[test]
    fn empty_stack_is_identity() {
        let mut rng = Rng64::new(5);
        let x = Mat::random(4, 3, -1.0, 1.0, &mut rng);
        let cfg = EncoderConfig {
            layers: vec![],
            mask: MaskSpec::Explicit(TokenMask::full(4)),
            kind: ScoreKind::softmax(),
            etc_globals: None,
            position_embedding: None,
            path: ComputePath::Dense,
        };
        assert_eq!(encoder_stack(&x, &cfg).unwrap(), x);
    }

    #[test]
    fn etc_equals_manual_prepend_and_drop() {
        let mut rng = Rng64::new(6);
        let n = 8;
        let d = 3;
        let x = Mat::random(n, d, -1.0, 1.0, &mut rng);
        let globals = Mat::random(4, d, -1.0, 1.0, &mut rng);
        let base_mask = {
            let bm = crate::pattern::build_window(n, 3).unwrap();
            expand_to_tokens(&bm, 1).unwrap()
        };
        let p = LayerParams::random(1, d, 2, 4, &mut rng);
        let etc_cfg = EncoderConfig {
            layers: vec![p.clone()],
            mask: MaskSpec::Explicit(base_mask.clone()),
            kind: ScoreKind::softmax(),
            etc_globals: Some(globals.clone()),
            position_embedding: None,
            path: ComputePath::Dense,
        };
        let etc_out = encoder_stack(&x, &etc_cfg).unwrap();
        assert_eq!(etc_out.rows(), n);

        // Manual: prepend, run ITC on the extended mask, drop.
        let mut manual_x = Mat::zeros(n + 4, d);
        for i in 0..4 {
            manual_x.row_mut(i).copy_from_slice(globals.row(i));
        }
        for i in 0..n {
            manual_x.row_mut(4 + i).copy_from_slice(x.row(i));
        }
        let ext = extend_etc(&base_mask, 4);
        let full = encoder_layer(&manual_x, &p, &ext, ScoreKind::softmax()).unwrap();
        for i in 0..n {
            assert_eq!(etc_out.row(i), full.row(4 + i));
        }
    }

    #[test]
    fn position_embedding_added_at_input() {
        let mut rng = Rng64::new(30);
        let x = Mat::random(5, 3, -1.0, 1.0, &mut rng);
        let e = Mat::random(5, 3, -0.2, 0.2, &mut rng);
        let p = LayerParams::random(1, 3, 2, 4, &mut rng);
        let mask = TokenMask::full(5);
        let cfg = EncoderConfig {
            layers: vec![p.clone()],
            mask: MaskSpec::Explicit(mask.clone()),
            kind: ScoreKind::softmax(),
            etc_globals: None,
            position_embedding: Some(e.clone()),
            path: ComputePath::Dense,
        };
        let with_embedding = encoder_stack(&x, &cfg).unwrap();
        let manual = encoder_layer(&x.add(&e).unwrap(), &p, &mask, ScoreKind::softmax()).unwrap();
        assert_eq!(with_embedding, manual);
        // Shape mismatch rejected.
        let bad = EncoderConfig { position_embedding: Some(Mat::zeros(4, 3)), ..cfg };
        assert!(encoder_stack(&x, &bad).is_err());
    }

    #[test]
    fn etc_output_depends_on_globals() {
        let mut rng = Rng64::new(7);
        let n = 8;
        let d = 3;
        let x = Mat::random(n, d, -1.0, 1.0, &mut rng);
        let globals = Mat::random(4, d, -1.0, 1.0, &mut rng);
        let p = LayerParams::random(1, d, 2, 4, &mut rng);
        let mk = |g: Mat| EncoderConfig {
            layers: vec![p.clone()],
            mask: MaskSpec::Explicit(TokenMask::full(n)),
            kind: ScoreKind::softmax(),
            etc_globals: Some(g),
            position_embedding: None,
            path: ComputePath::Dense,
        };
        let out1 = encoder_stack(&x, &mk(globals.clone())).unwrap();
        let mut perturbed = globals.clone();
        perturbed[(0, 0)] += 1.0;
        let out2 = encoder_stack(&x, &mk(perturbed)).unwrap();
        assert!(out1.max_abs_diff(&out2) > 1e-9);
    }

    #[test]
    fn blocked_and_dense_layers_agree() {
        let mut rng = Rng64::new(8);
        let cfg = BlockPatternConfig::new(32, 4, 3, 1, 1, Mode::Itc, 3).unwrap();
        let x = Mat::random(32, 4, -1.0, 1.0, &mut rng);
        let p = LayerParams::random(2, 4, 3, 5, &mut rng);
        let mask = expand_to_tokens(&build_bigbird(&cfg).unwrap(), 4).unwrap();
        let dense = encoder_layer(&x, &p, &mask, ScoreKind::softmax()).unwrap();
        let blocked = encoder_layer_blocked(&x, &p, &cfg, ScoreKind::softmax()).unwrap();
        assert!(rel_linf(&blocked, &dense) <= 1e-10);
    }

    #[test]
    fn finite_diff_on_quadratic_is_exact() {
        // loss ||theta||^2 / 2 has gradient theta; central differences on a
        // quadratic are exact up to rounding.
        let mut rng = Rng64::new(9);
        let theta: Vec<f64> = (0..10).map(|_| rng.range(0.5, 1.5)).collect();
        let coords: Vec<usize> = (0..10).collect();
        let grad = finite_diff_grad(
            |t| t.iter().map(|v| v * v).sum::<f64>() / 2.0,
            &theta,
            &coords,
            1e-5,
        );
        for (g, t) in grad.iter().zip(&theta) {
            assert!(grad_rel_error(*t, *g) <= 1e-10, "analytic {t}, numeric {g}");
        }
    }

    #[test]
    fn grad_check_one_layer_encoder() {
        let mut rng = Rng64::new(10);
        let n = 8;
        let d = 4;
        let x = Mat::random(n, d, -1.0, 1.0, &mut rng);
        let p = LayerParams::random(2, d, 4, 8, &mut rng);
        let cfg = BlockPatternConfig::new(8, 2, 3, 1, 0, Mode::Itc, 2).unwrap();
        let mask = expand_to_tokens(&build_bigbird(&cfg).unwrap(), 2).unwrap();
        let err = encoder_grad_check(&x, &[p], &mask, ScoreKind::softmax(), 1e-5, 400, 0).unwrap();
        assert!(err <= 1e-4, "max rel error {err:.3e}");
    }

    #[test]
    fn grad_check_attention_components_alone() {
        // Zero FFN weights: O(a) = 0, so gradients flow only through the
        // attention scores, softmax, and value mix.
        let mut rng = Rng64::new(20);
        let x = Mat::random(6, 3, -1.0, 1.0, &mut rng);
        let mut p = LayerParams::random(2, 3, 2, 4, &mut rng);
        p.w1 = Mat::zeros(3, 4);
        p.b1 = vec![0.0; 4];
        p.w2 = Mat::zeros(4, 3);
        p.b2 = vec![0.0; 3];
        let err = encoder_grad_check(
            &x,
            &[p],
            &TokenMask::full(6),
            ScoreKind::softmax(),
            1e-5,
            400,
            3,
        )
        .unwrap();
        assert!(err <= 1e-4, "attention-only rel error {err:.3e}");
    }

    #[test]
    fn grad_check_ffn_alone() {
        // Zero heads: attention contributes nothing, a = x, so only the FFN
        // parameters carry gradient.
        let mut rng = Rng64::new(21);
        let x = Mat::random(6, 3, -1.0, 1.0, &mut rng);
        let mut p = LayerParams::random(1, 3, 2, 4, &mut rng);
        for h in &mut p.heads {
            h.w_q = Mat::zeros(3, 2);
            h.w_k = Mat::zeros(3, 2);
            h.w_v = Mat::zeros(3, 3);
        }
        let err = encoder_grad_check(
            &x,
            &[p],
            &TokenMask::full(6),
            ScoreKind::softmax(),
            1e-5,
            400,
            4,
        )
        .unwrap();
        assert!(err <= 1e-4, "ffn-only rel error {err:.3e}");
    }

    #[test]
    fn etc_stack_blocked_matches_dense() {
        let mut rng = Rng64::new(22);
        let cfg = BlockPatternConfig::new(32, 4, 3, 1, 1, Mode::Etc, 9).unwrap();
        let d = 4;
        let x = Mat::random(32, d, -1.0, 1.0, &mut rng);
        let globals = Mat::random(4, d, -1.0, 1.0, &mut rng);
        let layers = vec![LayerParams::random(2, d, 3, 5, &mut rng)];
        let mk = |path| EncoderConfig {
            layers: layers.clone(),
            mask: MaskSpec::Pattern(cfg),
            kind: ScoreKind::softmax(),
            etc_globals: Some(globals.clone()),
            position_embedding: None,
            path,
        };
        let dense = encoder_stack(&x, &mk(ComputePath::Dense)).unwrap();
        let blocked = encoder_stack(&x, &mk(ComputePath::Blocked)).unwrap();
        assert_eq!(dense.rows(), 32);
        assert!(rel_linf(&blocked, &dense) <= 1e-10);
    }

    #[test]
    fn grad_check_two_layer_stack() {
        let mut rng = Rng64::new(11);
        let x = Mat::random(6, 3, -1.0, 1.0, &mut rng);
        let layers = vec![
            LayerParams::random(1, 3, 2, 4, &mut rng),
            LayerParams::random(1, 3, 2, 4, &mut rng),
        ];
        let mask = TokenMask::full(6);
        let err =
            encoder_grad_check(&x, &layers, &mask, ScoreKind::softmax(), 1e-5, 400, 1).unwrap();
        assert!(err <= 1e-4, "max rel error {err:.3e}");
    }

    #[test]
    fn grad_check_eps_stability() {
        let mut rng = Rng64::new(12);
        let x = Mat::random(6, 3, -1.0, 1.0, &mut rng);
        let layers = vec![LayerParams::random(1, 3, 2, 4, &mut rng)];
        let mask = TokenMask::full(6);
        let e1 = encoder_grad_check(&x, &layers, &mask, ScoreKind::softmax(), 1e-6, 200, 2).unwrap();
        let e2 = encoder_grad_check(&x, &layers, &mask, ScoreKind::softmax(), 1e-5, 200, 2).unwrap();
        assert!(e1 <= 10.0 * e2.max(1e-12) || e2 <= 10.0 * e1.max(1e-12));
    }

    #[test]
    fn grad_check_rejects_hardmax() {
        let x = Mat::zeros(2, 2);
        let layers = vec![LayerParams::zeros(1, 2, 2, 2)];
        assert!(encoder_grad_check(
            &x,
            &layers,
            &TokenMask::full(2),
            ScoreKind::Hardmax,
            1e-5,
            10,
            0
        )
        .is_err());
    }

    #[test]
    fn flatten_unflatten_round_trip() {
        let mut rng = Rng64::new(13);
        let layers = vec![
            LayerParams::random(2, 3, 2, 4, &mut rng),
            LayerParams::random(1, 3, 2, 4, &mut rng),
        ];
        let theta = flatten_params(&layers);
        assert_eq!(theta.len(), layers.iter().map(LayerParams::param_count).sum::<usize>());
        let back = unflatten_params(&layers, &theta).unwrap();
        assert_eq!(back, layers);
    }
}
