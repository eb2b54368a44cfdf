//! Executable universal-approximation and Turing-completeness machinery:
//! the selective shift operator, the contextual-mapping phase loop with its
//! per-phase bounds, and the decoder positional encodings g(i), h(i).
//!
//! The contextual mapping runs in exact rational arithmetic: the quantities
//! involved scale like delta^(-n*d) powers that overflow f64 even at toy
//! sizes, and the phase invariants are strict inequalities that must be
//! checked exactly.

use crate::error::{Error, Result};
use crate::mat::{dot, Mat};
use crate::pattern::TokenMask;
use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Zero};

// ---------------------------------------------------------------------------
// Selective shift (f64, arbitrary graph)
// ---------------------------------------------------------------------------

/// Parameters of one selective-shift application. Rows whose projection
/// `u . x_i` lies in `[b1, b2]` get coordinate 0 shifted by
/// `rho * (max_{j in N(i)} u . x_j - min_{j in N(i)} u . x_j)`, with the
/// neighborhood read from `graph`. An inverted range (`b1 > b2`) is empty.
#[derive(Debug, Clone)]
pub struct ShiftParams {
    pub u: Vec<f64>,
    pub b1: f64,
    pub b2: f64,
    pub rho: f64,
    pub graph: TokenMask,
}

/// Apply a selective shift. All shifts are computed from the pre-shift state;
/// rows outside the range are returned bit-identical. Returns the new matrix
/// and the indices of the rows that shifted.
pub fn selective_shift(x: &Mat, p: &ShiftParams) -> Result<(Mat, Vec<usize>)> {
    let n = x.rows();
    if p.u.len() != x.cols() {
        return Err(Error::ShapeMismatch {
            expected: format!("u of dim {}", x.cols()),
            got: format!("{}", p.u.len()),
        });
    }
    if p.graph.n() != n {
        return Err(Error::ShapeMismatch {
            expected: format!("graph over {n} rows"),
            got: format!("{}", p.graph.n()),
        });
    }
    let proj: Vec<f64> = (0..n).map(|i| dot(&p.u, x.row(i))).collect();
    let mut out = x.clone();
    let mut shifted = Vec::new();
    for i in 0..n {
        if !(p.b1 <= proj[i] && proj[i] <= p.b2) {
            continue;
        }
        let mut max = f64::NEG_INFINITY;
        let mut min = f64::INFINITY;
        let mut any = false;
        for j in 0..n {
            if p.graph.get(i, j) {
                any = true;
                max = max.max(proj[j]);
                min = min.min(proj[j]);
            }
        }
        if !any {
            return Err(Error::EmptyMaskRow { row: i });
        }
        out.row_mut(i)[0] += p.rho * (max - min);
        shifted.push(i);
    }
    Ok((out, shifted))
}

// ---------------------------------------------------------------------------
// Grid and exact phase machinery
// ---------------------------------------------------------------------------

/// Grid of the discretized domain: n columns of d coordinates at granularity
/// delta = 1/inv_delta, column i offset by delta^(-(i-1)d). The full grid has
/// inv_delta^(n*d) points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridConfig {
    pub n: usize,
    pub d: usize,
    pub inv_delta: u32,
}

/// Enumeration cap: configs whose grid exceeds this many points are rejected.
pub const ENUMERATION_CAP: u128 = 10_000;

impl GridConfig {
    pub fn new(n: usize, d: usize, inv_delta: u32) -> Result<Self> {
        if n == 0 || d == 0 || inv_delta == 0 {
            return Err(Error::InvalidConfig(
                "grid needs n >= 1, d >= 1, inv_delta >= 1".into(),
            ));
        }
        Ok(Self { n, d, inv_delta })
    }

    pub fn delta(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(self.inv_delta))
    }

    /// delta^(-e) as a rational.
    pub fn inv_delta_pow(&self, e: usize) -> BigRational {
        BigRational::from_integer(BigInt::from(self.inv_delta).pow(e as u32))
    }

    /// Offset of 1-based column i: delta^(-(i-1)d).
    pub fn offset(&self, i: usize) -> BigRational {
        self.inv_delta_pow((i - 1) * self.d)
    }

    /// Number of grid points, inv_delta^(n*d); saturates at u128::MAX.
    pub fn point_count(&self) -> u128 {
        u32::try_from(self.n * self.d)
            .ok()
            .and_then(|e| (self.inv_delta as u128).checked_pow(e))
            .unwrap_or(u128::MAX)
    }

    /// The projection vector u = [1, delta^-1, ..., delta^-(d-1),
    /// delta^-(n+1)d]; the last coordinate pairs with the global token's
    /// indicator so that <u, x_0> lands exactly on S_0.
    pub fn u_vector(&self) -> Vec<BigRational> {
        let mut u: Vec<BigRational> = (0..self.d).map(|c| self.inv_delta_pow(c)).collect();
        u.push(self.inv_delta_pow((self.n + 1) * self.d));
        u
    }
}

/// Bounds interval for the global token's projection after phase k.
///
/// S_0 = delta^(-(n+1)d), T_0 = S_0 + delta; later phases follow the exact
/// recursion of the global-token update with each original column's value
/// replaced by its bucket bounds:
///
/// ```text
/// f0_k = c * f0_(k-1) - A * l_k - B * min_k,
///   c = delta^(-(n+1)d) + 1,
///   A = delta^(-(n+1)d) - delta^(-nd),
///   B = delta^(-nd),
/// ```
///
/// where `min_k` is the smallest projection the global token sees at phase k:
/// `l_(k+1)` while original columns remain, the shifted first column `f_1` at
/// the last phase, and the global token itself when n = 1.
pub fn phase_bounds(k: usize, cfg: &GridConfig) -> Result<(BigRational, BigRational)> {
    if k > cfg.n {
        return Err(Error::InvalidConfig(format!("phase {k} exceeds n = {}", cfg.n)));
    }
    let delta = cfg.delta();
    let f0 = cfg.inv_delta_pow((cfg.n + 1) * cfg.d);
    let mut s = f0.clone();
    let mut t = &f0 + &delta;
    if k == 0 {
        return Ok((s, t));
    }
    let c = &f0 + BigRational::one();
    let b_coef = cfg.inv_delta_pow(cfg.n * cfg.d);
    let a_coef = &f0 - &b_coef;
    // Bucket substitution constants for column t: inf = delta^(-(t-1)d)
    // (attained), sup = delta^(-td) (strictly above the attained maximum).
    let inf = |t: usize| cfg.inv_delta_pow((t - 1) * cfg.d);
    let sup = |t: usize| cfg.inv_delta_pow(t * cfg.d);
    for phase in 1..=k {
        let (min_lo, min_hi) = if phase < cfg.n {
            (inf(phase + 1), sup(phase + 1))
        } else if cfg.n == 1 {
            // The only other value the global token sees is itself.
            (f0.clone(), f0.clone())
        } else {
            // Last phase: the minimum is the shifted first column
            // f_1 = delta^-d * f0_0 - (delta^-d - 1) * l_1, decreasing in l_1.
            let dd = cfg.inv_delta_pow(cfg.d);
            let slope = &dd - BigRational::one();
            let lo = &dd * &f0 - &slope * sup(1);
            let hi = &dd * &f0 - &slope * inf(1);
            (lo, hi)
        };
        s = &c * &s - &a_coef * sup(phase) - &b_coef * min_hi;
        t = &c * &t - &a_coef * inf(phase) - &b_coef * min_lo;
    }
    Ok((s, t))
}

/// State recorded after each phase of the contextual-mapping loop.
#[derive(Debug, Clone)]
pub struct PhaseRecord {
    pub k: usize,
    pub s: BigRational,
    pub t: BigRational,
    pub f0: BigRational,
    /// S_k < f0_k < T_k.
    pub in_bounds: bool,
    /// l_(k+1) < ... < l_n < f_1 < ... < f_k < f0_k, strictly.
    pub ordering_ok: bool,
}

/// Full output of the contextual mapping on one grid point.
#[derive(Debug, Clone)]
pub struct MappingTrace {
    /// Final code <u, column i> for the n original columns.
    pub codes: Vec<BigRational>,
    pub phases: Vec<PhaseRecord>,
}

impl MappingTrace {
    pub fn invariants_ok(&self) -> bool {
        self.phases.iter().all(|p| p.in_bounds && p.ordering_ok)
    }
}

/// Star-graph neighborhoods on rows {0, ..., n}: row 0 sees everyone, row i
/// sees {0, i}; self-edges included.
fn star_neighbors(n: usize) -> Vec<Vec<usize>> {
    let mut nb = vec![Vec::new(); n + 1];
    nb[0] = (0..=n).collect();
    for i in 1..=n {
        nb[i] = vec![0, i];
    }
    nb
}

/// Exact selective shift over rationals: rows with b1 <= <u, x_i> <= b2
/// (inclusive) shift coordinate 0 by rho * (max - min over the row's
/// neighborhood), all computed from the pre-shift state.
fn selective_shift_exact(
    x: &mut [Vec<BigRational>],
    u: &[BigRational],
    neighborhoods: &[Vec<usize>],
    b1: &BigRational,
    b2: &BigRational,
    rho: &BigRational,
) {
    let proj: Vec<BigRational> = x
        .iter()
        .map(|row| row.iter().zip(u).map(|(a, b)| a * b).sum())
        .collect();
    let mut shifts: Vec<Option<BigRational>> = vec![None; x.len()];
    for (i, p) in proj.iter().enumerate() {
        if p < b1 || p > b2 {
            continue;
        }
        let nb = &neighborhoods[i];
        let mut max = proj[nb[0]].clone();
        let mut min = proj[nb[0]].clone();
        for &j in &nb[1..] {
            if proj[j] > max {
                max = proj[j].clone();
            }
            if proj[j] < min {
                min = proj[j].clone();
            }
        }
        shifts[i] = Some(rho * (max - min));
    }
    for (row, shift) in x.iter_mut().zip(shifts) {
        if let Some(s) = shift {
            row[0] += s;
        }
    }
}

/// Run the contextual-mapping construction on one grid point (n rows of d
/// rational coordinates, already offset), recording the per-phase invariants.
///
/// Phase k first applies a low shift (rho = delta^-d) over column k's bucket,
/// then a high shift (rho = delta^-nd) over [S_(k-1), T_(k-1)); a final layer
/// (rho = delta^-(n^2 d)) over [T_0, T_n) spreads the global code into every
/// column so that codes are distinct across grid points as well.
pub fn contextual_mapping_trace(point: &[Vec<BigRational>], cfg: &GridConfig) -> Result<MappingTrace> {
    let n = cfg.n;
    let d = cfg.d;
    if point.len() != n {
        return Err(Error::ShapeMismatch {
            expected: format!("{n} columns"),
            got: format!("{}", point.len()),
        });
    }
    let delta = cfg.delta();
    // Validate the point lies exactly on the shifted grid.
    for (i, col) in point.iter().enumerate() {
        if col.len() != d {
            return Err(Error::ShapeMismatch {
                expected: format!("{d} coordinates"),
                got: format!("{}", col.len()),
            });
        }
        let off = cfg.offset(i + 1);
        for (c, v) in col.iter().enumerate() {
            let steps = (v - &off) / &delta;
            if !steps.is_integer()
                || steps < BigRational::zero()
                || steps >= BigRational::from_integer(BigInt::from(cfg.inv_delta))
            {
                return Err(Error::OffGrid(format!(
                    "column {} coordinate {c} = {v} is not on [{off}, {off} + 1) at step {delta}",
                    i + 1
                )));
            }
        }
    }

    // Embed: row 0 is the global token (0, ..., 0, 1); original columns get a
    // zero appended coordinate.
    let u = cfg.u_vector();
    let mut x: Vec<Vec<BigRational>> = Vec::with_capacity(n + 1);
    let mut global = vec![BigRational::zero(); d + 1];
    global[d] = BigRational::one();
    x.push(global);
    for col in point {
        let mut row = col.clone();
        row.push(BigRational::zero());
        x.push(row);
    }
    let neighborhoods = star_neighbors(n);

    let proj =
        |x: &[Vec<BigRational>], i: usize| -> BigRational { x[i].iter().zip(&u).map(|(a, b)| a * b).sum() };

    let rho_low = cfg.inv_delta_pow(d);
    let rho_high = cfg.inv_delta_pow(n * d);
    let mut phases = Vec::with_capacity(n);
    for k in 1..=n {
        // Low shift over column k's bucket [delta^(-(k-1)d), delta^(-kd) - delta].
        let lo = cfg.inv_delta_pow((k - 1) * d);
        let hi = cfg.inv_delta_pow(k * d) - &delta;
        selective_shift_exact(&mut x, &u, &neighborhoods, &lo, &hi, &rho_low);

        // High shift over [S_(k-1), T_(k-1) - delta].
        let (s_prev, t_prev) = phase_bounds(k - 1, cfg)?;
        let hi = &t_prev - &delta;
        selective_shift_exact(&mut x, &u, &neighborhoods, &s_prev, &hi, &rho_high);

        // Record invariants.
        let (s_k, t_k) = phase_bounds(k, cfg)?;
        let f0 = proj(&x, 0);
        let in_bounds = s_k < f0 && f0 < t_k;
        let mut ordered = Vec::new();
        for j in k + 1..=n {
            ordered.push(proj(&x, j)); // untouched columns still hold l_j
        }
        for j in 1..=k {
            ordered.push(proj(&x, j)); // shifted columns f_1 .. f_k
        }
        ordered.push(f0.clone());
        let ordering_ok = ordered.windows(2).all(|w| w[0] < w[1]);
        phases.push(PhaseRecord { k, s: s_k, t: t_k, f0, in_bounds, ordering_ok });
    }

    // Final distinctness layer: sweep [T_0, T_n - delta] so every shifted
    // column (and the global) embeds the final global code at scale
    // delta^-(n^2 d). Starting at T_0 rather than S_1 also covers f_1, which
    // sits in [T_0, S_1); without it two grid points sharing column 1 would
    // share a code.
    let rho_final = cfg.inv_delta_pow(n * n * d);
    let (_, t0) = phase_bounds(0, cfg)?;
    let (_, tn) = phase_bounds(n, cfg)?;
    let hi = &tn - &delta;
    selective_shift_exact(&mut x, &u, &neighborhoods, &t0, &hi, &rho_final);

    let codes = (1..=n).map(|i| proj(&x, i)).collect();
    Ok(MappingTrace { codes, phases })
}

/// Codes only (see [`contextual_mapping_trace`]).
pub fn contextual_mapping(point: &[Vec<BigRational>], cfg: &GridConfig) -> Result<Vec<BigRational>> {
    Ok(contextual_mapping_trace(point, cfg)?.codes)
}

/// Enumerate every point of the shifted grid; errors when the grid exceeds
/// [`ENUMERATION_CAP`] points.
pub fn enumerate_grid(cfg: &GridConfig) -> Result<Vec<Vec<Vec<BigRational>>>> {
    let count = cfg.point_count();
    if count > ENUMERATION_CAP {
        return Err(Error::EnumerationTooLarge { points: count, cap: ENUMERATION_CAP });
    }
    let delta = cfg.delta();
    let q = cfg.inv_delta as usize;
    let coords = cfg.n * cfg.d;
    let mut points = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; coords];
    loop {
        let mut point = Vec::with_capacity(cfg.n);
        for i in 0..cfg.n {
            let off = cfg.offset(i + 1);
            let col: Vec<BigRational> = (0..cfg.d)
                .map(|c| &off + &delta * BigRational::from_integer(BigInt::from(idx[i * cfg.d + c])))
                .collect();
            point.push(col);
        }
        points.push(point);
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == coords {
                return Ok(points);
            }
            idx[pos] += 1;
            if idx[pos] < q {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Result of exhaustively checking the contextual mapping over a grid.
#[derive(Debug, Clone)]
pub struct InjectivityReport {
    pub points: usize,
    /// Within every single input, the n codes are pairwise distinct.
    pub distinct_within: bool,
    /// Across any two distinct inputs, all codes are pairwise distinct.
    pub distinct_across: bool,
    /// Every per-phase bound and ordering invariant held.
    pub invariants_ok: bool,
}

impl InjectivityReport {
    pub fn ok(&self) -> bool {
        self.distinct_within && self.distinct_across && self.invariants_ok
    }
}

/// Enumerate the full grid and verify both contextual-mapping properties and
/// the per-phase invariants.
pub fn check_contextual_injectivity(cfg: &GridConfig) -> Result<InjectivityReport> {
    let points = enumerate_grid(cfg)?;
    let mut distinct_within = true;
    let mut invariants_ok = true;
    let mut seen: std::collections::BTreeMap<BigRational, usize> = std::collections::BTreeMap::new();
    let mut distinct_across = true;
    for (pi, point) in points.iter().enumerate() {
        let trace = contextual_mapping_trace(point, cfg)?;
        invariants_ok &= trace.invariants_ok();
        for (a_idx, a) in trace.codes.iter().enumerate() {
            for b in trace.codes.iter().skip(a_idx + 1) {
                if a == b {
                    distinct_within = false;
                }
            }
            match seen.get(a) {
                Some(&other) if other != pi => distinct_across = false,
                Some(_) => distinct_within = false,
                None => {
                    seen.insert(a.clone(), pi);
                }
            }
        }
    }
    Ok(InjectivityReport {
        points: points.len(),
        distinct_within,
        distinct_across,
        invariants_ok,
    })
}

// ---------------------------------------------------------------------------
// Decoder positional encodings
// ---------------------------------------------------------------------------

/// g(i) = floor((-1 + sqrt(1 + 8i)) / 2), computed with an integer square
/// root. Maps decoder step i to the machine step it simulates.
pub fn turing_step(i: u64) -> u64 {
    ((1 + 8 * i).sqrt() - 1) / 2
}

/// h(i) = g(i+1) - g(i), a 0/1 indicator of rows of the triangular layout.
pub fn turing_step_increment(i: u64) -> u64 {
    turing_step(i + 1) - turing_step(i)
}

/// Decoder position vector: zeros except the last nine coordinates, which are
/// [1, g+1, 1/(g+1), 1/(g+1)^2, h, 0, 0, 0, 0].
pub fn decoder_position_encoding(i: u64, dim: usize) -> Result<Vec<f64>> {
    if dim < 9 {
        return Err(Error::InvalidConfig(format!(
            "position encoding needs at least 9 dims, got {dim}"
        )));
    }
    let g = turing_step(i) as f64;
    let h = turing_step_increment(i) as f64;
    let mut v = vec![0.0; dim];
    let base = dim - 9;
    v[base] = 1.0;
    v[base + 1] = g + 1.0;
    v[base + 2] = 1.0 / (g + 1.0);
    v[base + 3] = 1.0 / (g + 1.0).powi(2);
    v[base + 4] = h;
    Ok(v)
}
