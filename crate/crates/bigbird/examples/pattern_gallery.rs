//! Render the sparsity building blocks (window, global, random) and the
//! combined block-sparse pattern as ASCII grids, then show the PBM and CSV
//! serializations round-tripping.
//!
//! ```bash
//! cargo run --example pattern_gallery
//! ```

use bigbird::mask_io;
use bigbird::pattern::{
    build_bigbird, build_global_itc, build_random, build_window, expand_to_tokens,
    BlockPatternConfig, Mode, TokenMask,
};

fn ascii(mask: &TokenMask) -> String {
    let mut s = String::new();
    for i in 0..mask.n() {
        for j in 0..mask.n() {
            s.push(if mask.get(i, j) { '#' } else { '.' });
            s.push(' ');
        }
        s.push('\n');
    }
    s
}

fn main() {
    // 12 tokens in blocks of 2, the classic toy size.
    let n_blocks = 6;
    let b = 2;

    let window = build_window(n_blocks, 3).unwrap();
    println!("window attention, w = 3 blocks (banded, wraps at the ends):");
    println!("{}", ascii(&expand_to_tokens(&window, b).unwrap()));

    let global = build_global_itc(n_blocks, 1).unwrap();
    println!("global attention, g = 1 block (cross shape):");
    println!("{}", ascii(&expand_to_tokens(&global, b).unwrap()));

    let forbidden = window.union(&global).unwrap();
    let random = build_random(n_blocks, 1, 7, &forbidden).unwrap();
    println!("random attention, r = 1 block per row (off-band, non-global):");
    println!("{}", ascii(&expand_to_tokens(&random, b).unwrap()));

    let cfg = BlockPatternConfig::new(12, b, 3, 1, 1, Mode::Itc, 7).unwrap();
    let combined = build_bigbird(&cfg).unwrap();
    let tokens = expand_to_tokens(&combined, b).unwrap();
    println!("combined pattern (union of the three):");
    println!("{}", ascii(&tokens));

    let pbm = mask_io::to_pbm(&tokens);
    println!("PBM header + first row:");
    for line in pbm.lines().take(3) {
        println!("  {line}");
    }
    assert_eq!(mask_io::from_pbm(&pbm).unwrap(), tokens);
    let csv = mask_io::to_csv(&tokens);
    assert_eq!(mask_io::from_csv(&csv).unwrap(), tokens);
    println!("PBM and CSV round-trips: lossless");

    // The same pattern with extra prepended global tokens.
    let etc = BlockPatternConfig::new(12, b, 3, 1, 1, Mode::Etc, 7).unwrap();
    let etc_tokens = expand_to_tokens(&build_bigbird(&etc).unwrap(), b).unwrap();
    println!(
        "\nETC variant: {} extra global tokens prepended, mask side {} -> {}",
        etc.global_blocks * b,
        tokens.n(),
        etc_tokens.n()
    );
}
