//! Sparsity pattern construction.
//!
//! The BigBird attention pattern is the union of three block-level building
//! blocks: a sliding window of `w` blocks, `g` global blocks, and `r` random
//! blocks per row. Patterns are built at block granularity ([`BlockMask`]) and
//! expanded to token granularity ([`TokenMask`]) for the dense reference path.
//! Also here: the star graph used by the universal-approximation construction
//! and the triangular decoder graph used by the Turing-completeness argument.

use crate::error::{Error, Result};
use crate::rng::Rng64;

/// Where the global tokens come from.
///
/// * `Itc`: existing tokens are promoted to global (full row + column).
/// * `Etc`: `g` extra global blocks are prepended in front of the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Itc,
    Etc,
}

/// Full description of a BigBird sparsity pattern.
///
/// Counts `window_blocks`, `random_blocks`, `global_blocks` are in blocks,
/// not tokens. Identical configs (seed included) always produce identical
/// patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPatternConfig {
    pub n_tokens: usize,
    pub block_size: usize,
    pub window_blocks: usize,
    pub random_blocks: usize,
    pub global_blocks: usize,
    pub mode: Mode,
    pub seed: u64,
}

impl BlockPatternConfig {
    pub fn new(
        n_tokens: usize,
        block_size: usize,
        window_blocks: usize,
        random_blocks: usize,
        global_blocks: usize,
        mode: Mode,
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            n_tokens,
            block_size,
            window_blocks,
            random_blocks,
            global_blocks,
            mode,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tokens == 0 || self.block_size == 0 {
            return Err(Error::InvalidConfig("n_tokens and block_size must be positive".into()));
        }
        if self.n_tokens % self.block_size != 0 {
            return Err(Error::InvalidConfig(format!(
                "n_tokens {} is not a multiple of block_size {}; pad the input first",
                self.n_tokens, self.block_size
            )));
        }
        let nb = self.base_blocks();
        if self.window_blocks % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "window_blocks must be odd, got {}",
                self.window_blocks
            )));
        }
        if self.window_blocks > nb {
            return Err(Error::InvalidConfig(format!(
                "window_blocks {} exceeds n_blocks {nb}",
                self.window_blocks
            )));
        }
        if self.global_blocks + self.window_blocks + self.random_blocks > nb {
            return Err(Error::InvalidConfig(format!(
                "g + w + r = {} exceeds n_blocks {nb}",
                self.global_blocks + self.window_blocks + self.random_blocks
            )));
        }
        Ok(())
    }

    /// Blocks covering the base sequence (`n_tokens / block_size`).
    pub fn base_blocks(&self) -> usize {
        self.n_tokens / self.block_size
    }

    /// Blocks in the attention problem this config defines. For ETC the `g`
    /// prepended global blocks are extra rows/columns.
    pub fn total_blocks(&self) -> usize {
        match self.mode {
            Mode::Itc => self.base_blocks(),
            Mode::Etc => self.base_blocks() + self.global_blocks,
        }
    }

    /// Tokens in the attention problem (base tokens plus ETC globals).
    pub fn total_tokens(&self) -> usize {
        self.total_blocks() * self.block_size
    }
}

/// Block-level adjacency: per row-block, the sorted list of column blocks it
/// attends to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockMask {
    n_blocks: usize,
    neighbors: Vec<Vec<usize>>,
}

impl BlockMask {
    pub fn empty(n_blocks: usize) -> Self {
        Self { n_blocks, neighbors: vec![Vec::new(); n_blocks] }
    }

    pub fn from_neighbors(n_blocks: usize, neighbors: Vec<Vec<usize>>) -> Result<Self> {
        if neighbors.len() != n_blocks {
            return Err(Error::ShapeMismatch {
                expected: format!("{n_blocks} rows"),
                got: format!("{} rows", neighbors.len()),
            });
        }
        let mut mask = Self { n_blocks, neighbors };
        for row in &mut mask.neighbors {
            row.sort_unstable();
            row.dedup();
            if let Some(&bad) = row.iter().find(|&&c| c >= n_blocks) {
                return Err(Error::IndexOutOfRange { index: bad, len: n_blocks });
            }
        }
        Ok(mask)
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum()
    }

    fn insert(&mut self, i: usize, j: usize) {
        if let Err(pos) = self.neighbors[i].binary_search(&j) {
            self.neighbors[i].insert(pos, j);
        }
    }

    /// Union of two masks over the same block count.
    pub fn union(&self, other: &BlockMask) -> Result<BlockMask> {
        if self.n_blocks != other.n_blocks {
            return Err(Error::ShapeMismatch {
                expected: format!("{} blocks", self.n_blocks),
                got: format!("{} blocks", other.n_blocks),
            });
        }
        let mut out = self.clone();
        for i in 0..self.n_blocks {
            for &j in other.row(i) {
                out.insert(i, j);
            }
        }
        Ok(out)
    }
}

/// Token-level boolean adjacency, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenMask {
    n: usize,
    bits: Vec<bool>,
}

impl TokenMask {
    pub fn new(n: usize) -> Self {
        Self { n, bits: vec![false; n * n] }
    }

    pub fn full(n: usize) -> Self {
        Self { n, bits: vec![true; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.bits[i * self.n + j] = v;
    }

    pub fn count_true(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Sorted neighbor list of row `i`.
    pub fn row_neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.get(i, j)).collect()
    }

    /// View as a graph: block mask with block size 1.
    pub fn as_graph(&self) -> BlockMask {
        let neighbors = (0..self.n).map(|i| self.row_neighbors(i)).collect();
        BlockMask { n_blocks: self.n, neighbors }
    }
}

/// Directed edge list over `n_nodes` nodes; pairs are (from, to), sorted and
/// duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    pub n_nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

/// Sliding-window mask: row block `j` attends to blocks
/// `j - (w-1)/2 ..= j + (w-1)/2`, wrapped circularly (the wrap matches the
/// rolled-copy construction of the blocked kernel, so the dense and blocked
/// paths agree at the sequence ends).
pub fn build_window(n_blocks: usize, w: usize) -> Result<BlockMask> {
    if w % 2 == 0 {
        return Err(Error::InvalidConfig(format!("window width must be odd, got {w}")));
    }
    if w == 0 || w > n_blocks {
        return Err(Error::InvalidConfig(format!(
            "window width {w} out of range for {n_blocks} blocks"
        )));
    }
    let half = (w - 1) / 2;
    let mut mask = BlockMask::empty(n_blocks);
    for j in 0..n_blocks {
        for o in 0..w {
            let col = (j + n_blocks + o - half) % n_blocks;
            mask.insert(j, col);
        }
    }
    Ok(mask)
}

/// ITC global mask: rows `0..g` attend to everything and every row attends to
/// columns `0..g`.
pub fn build_global_itc(n_blocks: usize, g: usize) -> Result<BlockMask> {
    if g > n_blocks {
        return Err(Error::InvalidConfig(format!(
            "global blocks {g} exceed n_blocks {n_blocks}"
        )));
    }
    let mut mask = BlockMask::empty(n_blocks);
    for i in 0..n_blocks {
        if i < g {
            mask.neighbors[i] = (0..n_blocks).collect();
        } else {
            mask.neighbors[i] = (0..g).collect();
        }
    }
    Ok(mask)
}

/// Random mask: each row holds `min(r, available)` blocks sampled uniformly
/// without replacement from the complement of that row's forbidden set.
/// Deterministic in (seed, row): the per-row stream is derived by mixing the
/// seed with the row index through a fixed 64-bit hash.
pub fn build_random(n_blocks: usize, r: usize, seed: u64, forbidden: &BlockMask) -> Result<BlockMask> {
    if forbidden.n_blocks() != n_blocks {
        return Err(Error::ShapeMismatch {
            expected: format!("{n_blocks} blocks"),
            got: format!("{} blocks", forbidden.n_blocks()),
        });
    }
    let mut mask = BlockMask::empty(n_blocks);
    if r == 0 {
        return Ok(mask);
    }
    for i in 0..n_blocks {
        let pool: Vec<usize> = (0..n_blocks).filter(|&j| !forbidden.contains(i, j)).collect();
        let mut rng = Rng64::for_row(seed, i as u64);
        mask.neighbors[i] = rng.sample_without_replacement(&pool, r);
    }
    Ok(mask)
}

/// The combined BigBird pattern with bookkeeping needed by the blocked kernel:
/// which columns of each row are global, window, or random.
#[derive(Debug, Clone)]
pub struct BigBirdPattern {
    cfg: BlockPatternConfig,
    mask: BlockMask,
    /// Random picks per row block of the full problem (empty for global rows).
    random: Vec<Vec<usize>>,
}

impl BigBirdPattern {
    pub fn cfg(&self) -> &BlockPatternConfig {
        &self.cfg
    }

    pub fn mask(&self) -> &BlockMask {
        &self.mask
    }

    pub fn into_mask(self) -> BlockMask {
        self.mask
    }

    pub fn random_row(&self, row: usize) -> &[usize] {
        &self.random[row]
    }

    /// Window column blocks of `row` in roll order `-(w-1)/2 ..= +(w-1)/2`.
    /// For ETC the window lives on the base blocks (offset by `g`).
    pub fn window_row(&self, row: usize) -> Vec<usize> {
        let w = self.cfg.window_blocks;
        let half = (w - 1) / 2;
        match self.cfg.mode {
            Mode::Itc => {
                let nb = self.cfg.base_blocks();
                (0..w).map(|o| (row + nb + o - half) % nb).collect()
            }
            Mode::Etc => {
                let g = self.cfg.global_blocks;
                let nb = self.cfg.base_blocks();
                debug_assert!(row >= g);
                let base = row - g;
                (0..w).map(|o| g + (base + nb + o - half) % nb).collect()
            }
        }
    }
}

/// Build the combined BigBird pattern.
///
/// ITC: window ∪ global ∪ random over `n/b` blocks, with random sampling
/// forbidding window, global, and self blocks so the three categories are
/// disjoint per row.
///
/// ETC: `g` fresh global blocks are prepended; the base `n/b * n/b` corner is
/// window ∪ random (windows wrap within the base blocks).
pub fn build_bigbird_pattern(cfg: &BlockPatternConfig) -> Result<BigBirdPattern> {
    cfg.validate()?;
    let nb = cfg.base_blocks();
    let g = cfg.global_blocks;
    match cfg.mode {
        Mode::Itc => {
            let window = build_window(nb, cfg.window_blocks)?;
            let global = build_global_itc(nb, g)?;
            let forbidden = window.union(&global)?;
            let random = build_random(nb, cfg.random_blocks, cfg.seed, &forbidden)?;
            let mask = forbidden.union(&random)?;
            let random_rows = (0..nb).map(|i| random.row(i).to_vec()).collect();
            Ok(BigBirdPattern { cfg: *cfg, mask, random: random_rows })
        }
        Mode::Etc => {
            let total = nb + g;
            let mut mask = BlockMask::empty(total);
            // Global rows/columns.
            for i in 0..total {
                if i < g {
                    mask.neighbors[i] = (0..total).collect();
                } else {
                    mask.neighbors[i] = (0..g).collect();
                }
            }
            // Base window, wrapped within the base blocks.
            let window = build_window(nb, cfg.window_blocks)?;
            let mut forbidden_base = window.clone();
            for i in 0..nb {
                for &j in window.row(i) {
                    mask.insert(g + i, g + j);
                }
                forbidden_base.insert(i, i);
            }
            // Base random, forbidding window and self.
            let random = build_random(nb, cfg.random_blocks, cfg.seed, &forbidden_base)?;
            let mut random_rows = vec![Vec::new(); total];
            for i in 0..nb {
                for &j in random.row(i) {
                    mask.insert(g + i, g + j);
                }
                random_rows[g + i] = random.row(i).iter().map(|&j| g + j).collect();
            }
            Ok(BigBirdPattern { cfg: *cfg, mask, random: random_rows })
        }
    }
}

/// Block mask of the combined BigBird pattern.
pub fn build_bigbird(cfg: &BlockPatternConfig) -> Result<BlockMask> {
    Ok(build_bigbird_pattern(cfg)?.into_mask())
}

/// Expand a block mask to token granularity: entry (i, j) is true iff
/// (i/b, j/b) is a block edge.
pub fn expand_to_tokens(mask: &BlockMask, b: usize) -> Result<TokenMask> {
    if b == 0 {
        return Err(Error::InvalidConfig("block size must be positive".into()));
    }
    let n = mask.n_blocks() * b;
    let mut out = TokenMask::new(n);
    for bi in 0..mask.n_blocks() {
        for &bj in mask.row(bi) {
            for s in 0..b {
                for t in 0..b {
                    out.set(bi * b + s, bj * b + t, true);
                }
            }
        }
    }
    Ok(out)
}

/// Prepend `g_tokens` global tokens to a token mask: output side is
/// `n + g_tokens`, first `g_tokens` rows and columns all true, bottom-right
/// corner equals the input.
pub fn extend_etc(mask: &TokenMask, g_tokens: usize) -> TokenMask {
    let n = mask.n();
    let side = n + g_tokens;
    let mut out = TokenMask::new(side);
    for i in 0..side {
        for j in 0..side {
            let v = if i < g_tokens || j < g_tokens {
                true
            } else {
                mask.get(i - g_tokens, j - g_tokens)
            };
            out.set(i, j, v);
        }
    }
    out
}

/// Star graph on nodes {0, ..., n}: node 0 attends to everything, node i
/// attends to {0, i}. Self-edges are included on every node (the residual
/// formulation presumes each token sees itself), so the mask has exactly
/// 3n + 1 true entries.
pub fn build_star(n: usize) -> Result<TokenMask> {
    if n == 0 {
        return Err(Error::InvalidConfig("star graph needs at least one leaf".into()));
    }
    let side = n + 1;
    let mut out = TokenMask::new(side);
    for j in 0..side {
        out.set(0, j, true);
    }
    for i in 1..side {
        out.set(i, 0, true);
        out.set(i, i, true);
    }
    Ok(out)
}

/// Decoder sparsity graph of the Turing-completeness construction.
///
/// For every `j >= 1`, `1 <= k <= j+1` with both endpoints below `n_nodes`,
/// node `u = j(j+1)/2 + k` gets an edge to the triangular node `k(k+1)/2` and
/// an edge to its predecessor `u - 1`.
///
/// A literal reading of the defining relations gives `(u, u)` for `k > 1`,
/// a self-loop, while the `k = 1` case points to the predecessor; the
/// predecessor edge is emitted for every `k` here. (The `k = j+1` case of the
/// first family is a genuine self-loop, `k(k+1)/2 = u`, and is kept.)
/// Every edge points backward or to self.
pub fn build_turing_decoder_graph(n_nodes: usize) -> EdgeList {
    let mut edges = Vec::new();
    let mut j = 1usize;
    loop {
        let row_start = j * (j + 1) / 2;
        if row_start + 1 >= n_nodes {
            break;
        }
        for k in 1..=j + 1 {
            let u = row_start + k;
            if u >= n_nodes {
                break;
            }
            let v = k * (k + 1) / 2;
            if v < n_nodes {
                edges.push((u, v));
            }
            edges.push((u, u - 1));
        }
        j += 1;
    }
    edges.sort_unstable();
    edges.dedup();
    EdgeList { n_nodes, edges }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_ring_of_six() {
        let m = build_window(6, 3).unwrap();
        for j in 0..6 {
            let expected = vec![(j + 5) % 6, j, (j + 1) % 6];
            let mut e = expected.clone();
            e.sort_unstable();
            assert_eq!(m.row(j), &e[..], "row {j}");
        }
    }

    #[test]
    fn window_width_one_is_diagonal() {
        let m = build_window(5, 1).unwrap();
        for j in 0..5 {
            assert_eq!(m.row(j), &[j]);
        }
    }

    #[test]
    fn window_wraps() {
        let m = build_window(4, 3).unwrap();
        assert_eq!(m.row(0), &[0, 1, 3]);
    }

    #[test]
    fn window_rejects_even_or_oversized() {
        assert!(build_window(6, 2).is_err());
        assert!(build_window(4, 5).is_err());
    }

    #[test]
    fn global_itc_cross_shape() {
        let m = build_global_itc(6, 1).unwrap();
        assert_eq!(m.row(0).len(), 6);
        for i in 1..6 {
            assert_eq!(m.row(i), &[0]);
        }
        assert_eq!(build_global_itc(4, 0).unwrap().edge_count(), 0);
        assert_eq!(build_global_itc(4, 4).unwrap().edge_count(), 16);
        assert!(build_global_itc(4, 5).is_err());
    }

    #[test]
    fn random_is_deterministic_and_disjoint_from_forbidden() {
        let forbidden = build_window(6, 3).unwrap().union(&build_global_itc(6, 1).unwrap()).unwrap();
        let a = build_random(6, 1, 17, &forbidden).unwrap();
        let b = build_random(6, 1, 17, &forbidden).unwrap();
        assert_eq!(a, b);
        // Row 0 is global (full forbidden row, empty complement); the rest
        // get exactly one off-band, non-global block.
        assert!(a.row(0).is_empty());
        for i in 1..6 {
            assert_eq!(a.row(i).len(), 1, "row {i} should have exactly one random block");
            for &j in a.row(i) {
                assert!(!forbidden.contains(i, j));
            }
        }
        let empty = build_random(6, 0, 17, &forbidden).unwrap();
        assert_eq!(empty.edge_count(), 0);
    }

    #[test]
    fn random_degenerate_rows_are_empty() {
        let full = build_global_itc(4, 4).unwrap();
        let r = build_random(4, 2, 3, &full).unwrap();
        assert_eq!(r.edge_count(), 0);
    }

    #[test]
    fn bigbird_rows_have_expected_degree() {
        // Row degree of non-global rows = w + g' + r where g' counts global
        // columns outside the window range.
        let cfg = BlockPatternConfig::new(12, 2, 3, 1, 1, Mode::Itc, 7).unwrap();
        let pat = build_bigbird_pattern(&cfg).unwrap();
        let m = pat.mask();
        assert_eq!(m.n_blocks(), 6);
        assert_eq!(m.row(0).len(), 6);
        for i in 1..6 {
            let window = pat.window_row(i);
            let g_extra = usize::from(!window.contains(&0));
            assert_eq!(m.row(i).len(), 3 + g_extra + 1, "row {i}");
        }
    }

    #[test]
    fn bigbird_categories_are_disjoint() {
        let cfg = BlockPatternConfig::new(64, 4, 3, 2, 1, Mode::Itc, 11).unwrap();
        let pat = build_bigbird_pattern(&cfg).unwrap();
        for i in 0..pat.mask().n_blocks() {
            let window = pat.window_row(i);
            for &rb in pat.random_row(i) {
                assert!(!window.contains(&rb));
                assert!(rb >= cfg.global_blocks);
                assert_ne!(rb, i);
            }
        }
    }

    #[test]
    fn bigbird_without_random_or_global_is_window() {
        let cfg = BlockPatternConfig::new(16, 2, 3, 0, 0, Mode::Itc, 0).unwrap();
        assert_eq!(build_bigbird(&cfg).unwrap(), build_window(8, 3).unwrap());
    }

    #[test]
    fn bigbird_rejects_bad_configs() {
        assert!(BlockPatternConfig::new(13, 2, 3, 0, 0, Mode::Itc, 0).is_err());
        assert!(BlockPatternConfig::new(12, 2, 2, 0, 0, Mode::Itc, 0).is_err());
        assert!(BlockPatternConfig::new(12, 2, 3, 3, 1, Mode::Itc, 0).is_err());
    }

    #[test]
    fn etc_pattern_shape() {
        let cfg = BlockPatternConfig::new(12, 2, 3, 1, 1, Mode::Etc, 5).unwrap();
        let pat = build_bigbird_pattern(&cfg).unwrap();
        let m = pat.mask();
        assert_eq!(m.n_blocks(), 7);
        assert_eq!(m.row(0).len(), 7);
        for i in 1..7 {
            assert!(m.contains(i, 0));
        }
        // Base random picks avoid the base window and self.
        for i in 1..7 {
            let window = pat.window_row(i);
            for &rb in pat.random_row(i) {
                assert!(!window.contains(&rb));
                assert_ne!(rb, i);
            }
        }
    }

    #[test]
    fn expand_tile_counts() {
        let cfg = BlockPatternConfig::new(12, 2, 3, 1, 1, Mode::Itc, 7).unwrap();
        let bm = build_bigbird(&cfg).unwrap();
        let tm = expand_to_tokens(&bm, 2).unwrap();
        assert_eq!(tm.n(), 12);
        assert_eq!(tm.count_true(), 4 * bm.edge_count());
    }

    #[test]
    fn expand_block_size_one_is_identity() {
        let bm = build_window(5, 3).unwrap();
        let tm = expand_to_tokens(&bm, 1).unwrap();
        for i in 0..5 {
            assert_eq!(tm.row_neighbors(i), bm.row(i));
        }
    }

    #[test]
    fn extend_etc_identity_corner() {
        let mut id3 = TokenMask::new(3);
        for i in 0..3 {
            id3.set(i, i, true);
        }
        let ext = extend_etc(&id3, 1);
        assert_eq!(ext.n(), 4);
        for j in 0..4 {
            assert!(ext.get(0, j));
            assert!(ext.get(j, 0));
        }
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(ext.get(i + 1, j + 1), i == j);
            }
        }
        assert_eq!(extend_etc(&id3, 0), id3);
    }

    #[test]
    fn star_graph_counts() {
        let s = build_star(3).unwrap();
        assert_eq!(s.count_true(), 10); // 3n + 1
        assert_eq!(s.row_neighbors(0), vec![0, 1, 2, 3]);
        assert_eq!(s.row_neighbors(2), vec![0, 2]);
        let s5 = build_star(5).unwrap();
        assert_eq!(s5.count_true(), 16);
    }

    #[test]
    fn turing_graph_first_edges() {
        let g = build_turing_decoder_graph(4);
        // j = 1: u = 2 -> (2,1) twice (both families), u = 3 -> (3,3) and (3,2).
        assert_eq!(g.edges, vec![(2, 1), (3, 2), (3, 3)]);
    }

    #[test]
    fn turing_graph_no_forward_edges() {
        let g = build_turing_decoder_graph(200);
        for &(u, v) in &g.edges {
            assert!(v <= u, "forward edge ({u}, {v})");
        }
    }

    #[test]
    fn turing_graph_matches_per_node_decomposition() {
        // Independent oracle: decompose each node u >= 2 as u = j(j+1)/2 + k
        // by scanning triangular numbers, then emit both families directly.
        let n = 150;
        let mut expected = Vec::new();
        for u in 2..n {
            let mut j = 1;
            while (j + 1) * (j + 2) / 2 < u {
                j += 1;
            }
            let k = u - j * (j + 1) / 2;
            assert!(k >= 1 && k <= j + 1);
            let v = k * (k + 1) / 2;
            if v < n {
                expected.push((u, v));
            }
            expected.push((u, u - 1));
        }
        expected.sort_unstable();
        expected.dedup();
        assert_eq!(build_turing_decoder_graph(n).edges, expected);
    }

    #[test]
    fn token_mask_as_graph_round_trip() {
        let s = build_star(4).unwrap();
        let g = s.as_graph();
        assert_eq!(g.n_blocks(), 5);
        assert_eq!(g.row(0), &[0, 1, 2, 3, 4]);
    }
}
