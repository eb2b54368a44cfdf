//! Mask serialization: portable bitmap (PBM "P1") and CSV of true entries.
//! Both round-trip losslessly.

use crate::error::{Error, Result};
use crate::pattern::TokenMask;

pub const CSV_SCHEMA: &str = "mask-csv v1";

/// Render a token mask as PBM "P1" text: `P1\n<w> <h>\n` then rows of 0/1.
pub fn to_pbm(mask: &TokenMask) -> String {
    let n = mask.n();
    let mut out = String::with_capacity(16 + n * (2 * n));
    out.push_str("P1\n");
    out.push_str(&format!("{n} {n}\n"));
    for i in 0..n {
        let mut first = true;
        for j in 0..n {
            if !first {
                out.push(' ');
            }
            out.push(if mask.get(i, j) { '1' } else { '0' });
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Parse PBM "P1" text back into a token mask. Only square masks are
/// accepted, matching what `to_pbm` produces.
pub fn from_pbm(text: &str) -> Result<TokenMask> {
    let mut tokens = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(str::split_whitespace);
    let magic = tokens.next().ok_or_else(|| Error::Parse("empty PBM".into()))?;
    if magic != "P1" {
        return Err(Error::Parse(format!("expected P1 magic, got {magic:?}")));
    }
    let w: usize = tokens
        .next()
        .ok_or_else(|| Error::Parse("missing width".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad width: {e}")))?;
    let h: usize = tokens
        .next()
        .ok_or_else(|| Error::Parse("missing height".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("bad height: {e}")))?;
    if w != h {
        return Err(Error::Parse(format!("mask must be square, got {w}x{h}")));
    }
    let mut mask = TokenMask::new(w);
    for i in 0..h {
        for j in 0..w {
            let bit = tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("missing pixel ({i}, {j})")))?;
            match bit {
                "1" => mask.set(i, j, true),
                "0" => {}
                other => return Err(Error::Parse(format!("bad pixel {other:?}"))),
            }
        }
    }
    if tokens.next().is_some() {
        return Err(Error::Parse("trailing data after pixels".into()));
    }
    Ok(mask)
}

/// Render a token mask as CSV of `row,col` true entries (row-major order).
pub fn to_csv(mask: &TokenMask) -> String {
    let mut out = String::new();
    out.push_str(&format!("# schema: {CSV_SCHEMA}\n"));
    out.push_str(&format!("# n: {}\n", mask.n()));
    out.push_str("row,col\n");
    for i in 0..mask.n() {
        for j in 0..mask.n() {
            if mask.get(i, j) {
                out.push_str(&format!("{i},{j}\n"));
            }
        }
    }
    out
}

/// Parse the CSV form back into a token mask.
pub fn from_csv(text: &str) -> Result<TokenMask> {
    let mut n: Option<usize> = None;
    let mut entries = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(v) = rest.strip_prefix("n:") {
                n = Some(
                    v.trim()
                        .parse()
                        .map_err(|e| Error::Parse(format!("bad n header: {e}")))?,
                );
            }
            continue;
        }
        if line == "row,col" {
            continue;
        }
        let (r, c) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("bad csv line {line:?}")))?;
        let r: usize = r.trim().parse().map_err(|e| Error::Parse(format!("bad row: {e}")))?;
        let c: usize = c.trim().parse().map_err(|e| Error::Parse(format!("bad col: {e}")))?;
        entries.push((r, c));
    }
    let n = n.ok_or_else(|| Error::Parse("missing `# n:` header".into()))?;
    let mut mask = TokenMask::new(n);
    for (r, c) in entries {
        if r >= n || c >= n {
            return Err(Error::IndexOutOfRange { index: r.max(c), len: n });
        }
        mask.set(r, c, true);
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{build_bigbird, expand_to_tokens, BlockPatternConfig, Mode};

    fn sample_mask() -> TokenMask {
        let cfg = BlockPatternConfig::new(12, 2, 3, 1, 1, Mode::Itc, 7).unwrap();
        expand_to_tokens(&build_bigbird(&cfg).unwrap(), 2).unwrap()
    }

    #[test]
    fn pbm_round_trip() {
        let mask = sample_mask();
        let text = to_pbm(&mask);
        assert!(text.starts_with("P1\n12 12\n"));
        assert_eq!(from_pbm(&text).unwrap(), mask);
    }

    #[test]
    fn csv_round_trip() {
        let mask = sample_mask();
        let text = to_csv(&mask);
        assert!(text.starts_with("# schema: mask-csv v1\n"));
        assert_eq!(from_csv(&text).unwrap(), mask);
    }

    #[test]
    fn pbm_rejects_garbage() {
        assert!(from_pbm("P5\n2 2\n0 0 0 0").is_err());
        assert!(from_pbm("P1\n2 2\n0 0 0").is_err());
        assert!(from_pbm("P1\n2 2\n0 0 0 2").is_err());
    }

    #[test]
    fn csv_rejects_out_of_range() {
        assert!(from_csv("# n: 2\nrow,col\n5,0\n").is_err());
    }
}
