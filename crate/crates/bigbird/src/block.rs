//! Blocked sparse attention: the hardware-friendly computation path.
//!
//! Queries/keys/values are reshaped into (n_blocks, b, d) tensors; window
//! attention becomes w circularly rolled copies of the key blocks, random
//! attention a gather, and global attention a fixed prefix. Concatenating the
//! three gives a compact key tensor of shape (n_blocks, (g+w+r)b, d) whose
//! dense multiplication reproduces the sparse pattern exactly. Global row
//! blocks are computed by direct dense attention instead. Duplicate slots
//! (e.g. a wrapped window hitting a global block) are masked out of the
//! scoring rather than removed, which keeps every shape static.

use crate::attn::{score_weights, HeadParams, ScoreKind};
use crate::error::{Error, Result};
use crate::mat::{dot, Mat};
use crate::pattern::{build_bigbird_pattern, BigBirdPattern, BlockPatternConfig, Mode};
use serde::Serialize;

/// Dense matrix reshaped along the sequence axis into `n_blocks` blocks of
/// `b` rows each.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockedTensor {
    n_blocks: usize,
    b: usize,
    d: usize,
    data: Vec<f64>,
}

impl BlockedTensor {
    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn block_size(&self) -> usize {
        self.b
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Row `s` of block `j`.
    pub fn row(&self, j: usize, s: usize) -> &[f64] {
        let start = (j * self.b + s) * self.d;
        &self.data[start..start + self.d]
    }

    fn row_mut(&mut self, j: usize, s: usize) -> &mut [f64] {
        let start = (j * self.b + s) * self.d;
        &mut self.data[start..start + self.d]
    }

    /// Inverse of [`blockify`].
    pub fn unblockify(&self) -> Mat {
        Mat::from_vec(self.n_blocks * self.b, self.d, self.data.clone())
            .expect("blocked tensor is always rectangular")
    }
}

/// Reshape an n x d matrix into (n/b, b, d); lossless, errors when b does not
/// divide n.
pub fn blockify(m: &Mat, b: usize) -> Result<BlockedTensor> {
    if b == 0 || m.rows() % b != 0 {
        return Err(Error::InvalidConfig(format!(
            "block size {b} does not divide {} rows",
            m.rows()
        )));
    }
    Ok(BlockedTensor {
        n_blocks: m.rows() / b,
        b,
        d: m.cols(),
        data: m.data().to_vec(),
    })
}

/// The w rolled copies of a blocked key tensor, indexed by offset
/// o in -(w-1)/2 ..= +(w-1)/2: copy o holds source block (j + o) mod n_blocks
/// at row block j (positive roll is a circular shift toward lower indices).
pub fn roll_key_blocks(k: &BlockedTensor, w: usize) -> Result<Vec<BlockedTensor>> {
    if w % 2 == 0 {
        return Err(Error::InvalidConfig(format!("window width must be odd, got {w}")));
    }
    let half = (w as isize - 1) / 2;
    let nb = k.n_blocks as isize;
    let mut copies = Vec::with_capacity(w);
    for o in -half..=half {
        let mut copy = BlockedTensor {
            n_blocks: k.n_blocks,
            b: k.b,
            d: k.d,
            data: vec![0.0; k.data.len()],
        };
        for j in 0..k.n_blocks {
            let src = ((j as isize + o).rem_euclid(nb)) as usize;
            for s in 0..k.b {
                copy.row_mut(j, s).copy_from_slice(k.row(src, s));
            }
        }
        copies.push(copy);
    }
    Ok(copies)
}

/// Gather `r` key blocks per row block: output row block j, slot t holds
/// source block `rand[j][t]`.
pub fn gather_random_blocks(k: &BlockedTensor, rand: &[Vec<usize>]) -> Result<BlockedTensor> {
    if rand.len() != k.n_blocks {
        return Err(Error::ShapeMismatch {
            expected: format!("{} index rows", k.n_blocks),
            got: format!("{}", rand.len()),
        });
    }
    let r = rand.first().map_or(0, Vec::len);
    if rand.iter().any(|row| row.len() != r) {
        return Err(Error::InvalidConfig("ragged random index rows".into()));
    }
    let mut out = BlockedTensor {
        n_blocks: k.n_blocks,
        b: r * k.b,
        d: k.d,
        data: vec![0.0; k.n_blocks * r * k.b * k.d],
    };
    for j in 0..k.n_blocks {
        for (t, &src) in rand[j].iter().enumerate() {
            if src >= k.n_blocks {
                return Err(Error::IndexOutOfRange { index: src, len: k.n_blocks });
            }
            for s in 0..k.b {
                out.row_mut(j, t * k.b + s).copy_from_slice(k.row(src, s));
            }
        }
    }
    Ok(out)
}

/// Category of a compact-tensor slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Global,
    Window,
    Random,
}

/// Compact key/value tensor: per non-global row block, the concatenation of
/// g global blocks, w window blocks (roll order), and r random blocks, with
/// per-slot origin bookkeeping. `duplicate` marks slots whose source block
/// already appeared earlier in the same row.
#[derive(Debug, Clone)]
pub struct CompactKeys {
    pub keys: BlockedTensor,
    pub values: BlockedTensor,
    /// (source block, category) per row block and slot.
    pub origin: Vec<Vec<(usize, SlotKind)>>,
    pub duplicate: Vec<Vec<bool>>,
}

impl CompactKeys {
    pub fn slots_per_row(&self) -> usize {
        self.origin.first().map_or(0, Vec::len)
    }
}

/// Assemble the compact tensor for a pattern from blocked keys and values.
///
/// Slot order is global blocks 0..g, then the w rolled window blocks, then
/// the r random blocks. With g = 0 and r = 0 the result is exactly the w
/// rolled copies concatenated.
pub fn assemble_compact(
    k: &BlockedTensor,
    v: &BlockedTensor,
    pattern: &BigBirdPattern,
) -> Result<CompactKeys> {
    if k.n_blocks != v.n_blocks || k.b != v.b {
        return Err(Error::ShapeMismatch {
            expected: format!("values shaped like keys ({}x{})", k.n_blocks, k.b),
            got: format!("{}x{}", v.n_blocks, v.b),
        });
    }
    let cfg = pattern.cfg();
    let total = cfg.total_blocks();
    if k.n_blocks != total {
        return Err(Error::ShapeMismatch {
            expected: format!("{total} key blocks"),
            got: format!("{}", k.n_blocks),
        });
    }
    let g = cfg.global_blocks;
    let b = cfg.block_size;
    let slot_blocks = g + cfg.window_blocks + cfg.random_blocks;

    let mut keys = BlockedTensor {
        n_blocks: total,
        b: slot_blocks * b,
        d: k.d,
        data: vec![0.0; total * slot_blocks * b * k.d],
    };
    let mut values = BlockedTensor {
        n_blocks: total,
        b: slot_blocks * b,
        d: v.d,
        data: vec![0.0; total * slot_blocks * b * v.d],
    };
    let mut origin = vec![Vec::with_capacity(slot_blocks); total];
    let mut duplicate = vec![Vec::with_capacity(slot_blocks); total];

    for j in 0..total {
        // Global rows are computed densely, not through the compact tensor;
        // their slot metadata is left empty.
        if j < g {
            continue;
        }
        let mut slots: Vec<(usize, SlotKind)> = Vec::with_capacity(slot_blocks);
        for gc in 0..g {
            slots.push((gc, SlotKind::Global));
        }
        for wb in pattern.window_row(j) {
            slots.push((wb, SlotKind::Window));
        }
        for &rb in pattern.random_row(j) {
            slots.push((rb, SlotKind::Random));
        }
        if slots.len() != slot_blocks {
            return Err(Error::InvalidConfig(format!(
                "row block {j} produced {} slots, expected {slot_blocks}",
                slots.len()
            )));
        }
        let mut seen = Vec::with_capacity(slot_blocks);
        for (t, &(src, kind)) in slots.iter().enumerate() {
            let dup = seen.contains(&src);
            seen.push(src);
            duplicate[j].push(dup);
            origin[j].push((src, kind));
            for s in 0..b {
                keys.row_mut(j, t * b + s).copy_from_slice(k.row(src, s));
                values.row_mut(j, t * b + s).copy_from_slice(v.row(src, s));
            }
        }
    }
    Ok(CompactKeys { keys, values, origin, duplicate })
}

/// Blocked sparse attention, equivalent to the dense oracle over
/// `expand_to_tokens(build_bigbird(cfg))`.
///
/// Global row blocks (the first g) attend to every key by direct dense
/// multiplication; the remaining row blocks score against their compact keys
/// with duplicate slots excluded from the softmax/hardmax.
pub fn attn_block_sparse(
    x: &Mat,
    heads: &[HeadParams],
    cfg: &BlockPatternConfig,
    kind: ScoreKind,
) -> Result<Mat> {
    cfg.validate()?;
    crate::attn::ensure_finite(x)?;
    let n_total = cfg.total_tokens();
    if x.rows() != n_total {
        return Err(Error::ShapeMismatch {
            expected: format!(
                "{n_total} input rows ({} base{})",
                cfg.n_tokens,
                if cfg.mode == Mode::Etc { " + prepended globals" } else { "" }
            ),
            got: format!("{}", x.rows()),
        });
    }
    let d = x.cols();
    let b = cfg.block_size;
    let g = cfg.global_blocks;
    let pattern = build_bigbird_pattern(cfg)?;
    let mut out = Mat::zeros(n_total, d);

    for head in heads {
        let q = x.matmul(&head.w_q)?;
        let k = x.matmul(&head.w_k)?;
        let v = x.matmul(&head.w_v)?;
        let qb = blockify(&q, b)?;
        let kb = blockify(&k, b)?;
        let vb = blockify(&v, b)?;
        let compact = assemble_compact(&kb, &vb, &pattern)?;

        // Global row blocks: direct multiplication against all keys.
        for row in 0..g * b {
            let qi = q.row(row);
            let scores: Vec<f64> = (0..n_total).map(|j| dot(qi, k.row(j))).collect();
            let weights = score_weights(&scores, kind)?;
            let orow = out.row_mut(row);
            for (j, &w) in weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (o, &val) in orow.iter_mut().zip(v.row(j)) {
                    *o += w * val;
                }
            }
        }

        // Remaining row blocks: dense multiplication against the compact
        // tensor, duplicates masked out of the scoring.
        let slots = g + cfg.window_blocks + cfg.random_blocks;
        for jb in g..cfg.total_blocks() {
            let dup = &compact.duplicate[jb];
            let live: Vec<usize> = (0..slots * b)
                .filter(|t| !dup[t / b])
                .collect();
            for s in 0..b {
                let row = jb * b + s;
                let qi = qb.row(jb, s);
                let scores: Vec<f64> =
                    live.iter().map(|&t| dot(qi, compact.keys.row(jb, t))).collect();
                let weights = score_weights(&scores, kind).map_err(|e| match e {
                    Error::EmptyMaskRow { .. } => Error::EmptyMaskRow { row },
                    other => other,
                })?;
                let orow = out.row_mut(row);
                for (&t, &w) in live.iter().zip(&weights) {
                    if w == 0.0 {
                        continue;
                    }
                    for (o, &val) in orow.iter_mut().zip(compact.values.row(jb, t)) {
                        *o += w * val;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// FLOP accounting for the attention core (scores, scoring function, value
/// mix; projections excluded since they are identical on both paths).
///
/// Convention: one multiply-add counts as 2 flops; the scoring function costs
/// 4 flops per (row, key): subtract-max, exponential, sum-accumulate,
/// divide. So a row attending to k keys costs k(2m + 2d + 4) flops per head.
#[derive(Debug, Clone, Serialize)]
pub struct FlopReport {
    pub dense_flops: u64,
    pub sparse_flops: u64,
    pub ratio: f64,
}

pub const FLOPS_PER_KEY_CONST: u64 = 4;

/// Closed-form flop counts for a pattern at head width m and model width d.
/// Dense cost is n^2 per head; sparse is the compact computation with the
/// g global row blocks counted dense.
pub fn flop_count(cfg: &BlockPatternConfig, d: usize, m: usize, heads: usize) -> Result<FlopReport> {
    cfg.validate()?;
    let n = cfg.total_tokens() as u64;
    let b = cfg.block_size as u64;
    let g = cfg.global_blocks as u64;
    let slots = (cfg.global_blocks + cfg.window_blocks + cfg.random_blocks) as u64;
    let per_key = 2 * m as u64 + 2 * d as u64 + FLOPS_PER_KEY_CONST;
    let dense = heads as u64 * n * n * per_key;
    let global_rows = g * b;
    let sparse = heads as u64 * (global_rows * n + (n - global_rows) * slots * b) * per_key;
    Ok(FlopReport {
        dense_flops: dense,
        sparse_flops: sparse,
        ratio: sparse as f64 / dense as f64,
    })
}
