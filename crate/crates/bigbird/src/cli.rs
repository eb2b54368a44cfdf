//! Command-line surface: mask dumps, diagnostics, benchmarks, verification
//! suites, and demos.
//!
//! Exit codes: 0 success, 1 runtime or check failure, 2 usage/validation
//! error. Every run is reproducible given its flags; file output is written
//! atomically (temp file + rename).

use crate::attn::{attn_dense, furthest_vector, HeadParams, ScoreKind};
use crate::block::{attn_block_sparse, flop_count};
use crate::checks;
use crate::error::Error;
use crate::graphdiag;
use crate::mask_io;
use crate::mat::Mat;
use crate::pattern::{build_bigbird, expand_to_tokens, BlockPatternConfig, Mode, TokenMask};
use crate::rng::Rng64;
use crate::theory::{selective_shift, ShiftParams};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

pub const BENCH_CSV_SCHEMA: &str = "bench-csv v1";

#[derive(Parser, Debug)]
#[command(name = "bigbird", version, about = "Block-sparse attention toolkit")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a sparsity pattern as a PBM bitmap or CSV edge list.
    Pattern(PatternCmd),
    /// Graph diagnostics (paths, clustering, spectral gap) of a pattern.
    Diag(DiagCmd),
    /// FLOP and wall-time benchmark over a list of sequence lengths.
    Bench(BenchCmd),
    /// Run verification suites.
    Check(CheckCmd),
    /// Small demonstrations of the constructions.
    Demo(DemoCmd),
}

#[derive(Args, Debug, Clone)]
struct PatternFlags {
    /// Sequence length in tokens (must be a multiple of --block).
    #[arg(long)]
    tokens: usize,
    /// Block size b.
    #[arg(long)]
    block: usize,
    /// Window width in blocks (odd).
    #[arg(long)]
    window: usize,
    /// Random blocks per row.
    #[arg(long, default_value_t = 0)]
    random: usize,
    /// Global blocks.
    #[arg(long, default_value_t = 0)]
    global: usize,
    /// Global-token style.
    #[arg(long, value_enum, default_value_t = ModeArg::Itc)]
    mode: ModeArg,
    /// Random-pattern seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ModeArg {
    Itc,
    Etc,
}

impl PatternFlags {
    fn to_config(&self) -> Result<BlockPatternConfig, Error> {
        BlockPatternConfig::new(
            self.tokens,
            self.block,
            self.window,
            self.random,
            self.global,
            match self.mode {
                ModeArg::Itc => Mode::Itc,
                ModeArg::Etc => Mode::Etc,
            },
            self.seed,
        )
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum MaskFormat {
    Pbm,
    Csv,
}

#[derive(Args, Debug)]
struct PatternCmd {
    #[command(flatten)]
    flags: PatternFlags,
    /// Output format.
    #[arg(long, value_enum, default_value_t = MaskFormat::Pbm)]
    format: MaskFormat,
    /// Output path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DiagCmd {
    #[command(flatten)]
    flags: PatternFlags,
    /// Emit the report as a single JSON object.
    #[arg(long)]
    json: bool,
    /// Output path (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchCmd {
    /// Comma-separated sequence lengths.
    #[arg(long, value_delimiter = ',', default_value = "512,1024,2048,4096")]
    lengths: Vec<usize>,
    /// Preset: `paper` (b=64, g=2, w=3, r=3 blocks) or `custom`.
    #[arg(long, default_value = "paper")]
    preset: String,
    /// Block size (custom preset).
    #[arg(long, default_value_t = 64)]
    block: usize,
    /// Window blocks (custom preset).
    #[arg(long, default_value_t = 3)]
    window: usize,
    /// Random blocks (custom preset).
    #[arg(long, default_value_t = 3)]
    random: usize,
    /// Global blocks (custom preset).
    #[arg(long, default_value_t = 2)]
    global: usize,
    /// Model width d (= head width here).
    #[arg(long, default_value_t = 16)]
    dim: usize,
    /// Attention heads.
    #[arg(long, default_value_t = 1)]
    heads: usize,
    /// Wall-time trials per length (0 = FLOPs only).
    #[arg(long, default_value_t = 0)]
    trials: usize,
    /// Input seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckCmd {
    /// equivalence | gradcheck | theory | graphs | all
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct DemoCmd {
    /// furthest | shift | turing-graph
    #[arg(long)]
    which: String,
    /// Lower range end (shift demo).
    #[arg(long, default_value_t = 0.5)]
    b1: f64,
    /// Upper range end (shift demo).
    #[arg(long, default_value_t = 1.5)]
    b2: f64,
    /// Shift magnitude rho (shift demo).
    #[arg(long, default_value_t = 2.0)]
    rho: f64,
    /// Node count (turing-graph demo).
    #[arg(long, default_value_t = 15)]
    nodes: usize,
}

/// Entry point used by the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_)
        | Error::ShapeMismatch { .. }
        | Error::EnumerationTooLarge { .. }
        | Error::OffGrid(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Pattern(cmd) => cmd_pattern(cmd),
        Command::Diag(cmd) => cmd_diag(cmd),
        Command::Bench(cmd) => cmd_bench(cmd),
        Command::Check(cmd) => cmd_check(cmd),
        Command::Demo(cmd) => cmd_demo(cmd),
    }
}

/// Write `text` to `path` atomically, or to stdout when no path is given.
fn emit(path: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => {
            let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.persist(p).map_err(|e| Error::Io(e.to_string()))?;
            Ok(())
        }
    }
}

fn cmd_pattern(cmd: PatternCmd) -> Result<ExitCode, Error> {
    let cfg = cmd.flags.to_config()?;
    let mask = expand_to_tokens(&build_bigbird(&cfg)?, cfg.block_size)?;
    let text = match cmd.format {
        MaskFormat::Pbm => mask_io::to_pbm(&mask),
        MaskFormat::Csv => mask_io::to_csv(&mask),
    };
    emit(&cmd.output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_diag(cmd: DiagCmd) -> Result<ExitCode, Error> {
    let cfg = cmd.flags.to_config()?;
    let mask = build_bigbird(&cfg)?;
    let report = graphdiag::analyze(&mask);
    let text = if cmd.json {
        let mut s = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        s
    } else {
        let mut s = String::new();
        s.push_str(&format!("nodes (blocks):       {}\n", report.n_nodes));
        s.push_str(&format!("connected:            {}\n", report.connected));
        s.push_str(&format!("avg shortest path:    {:.6}\n", report.avg_shortest_path));
        match report.diameter {
            Some(d) => s.push_str(&format!("diameter:             {d}\n")),
            None => s.push_str("diameter:             infinite (disconnected)\n"),
        }
        s.push_str(&format!(
            "clustering (mean-local): {:.6}\n",
            report.clustering_coefficient
        ));
        match report.second_eigenvalue_modulus {
            Some(l) => s.push_str(&format!("|lambda_2| (normalized adjacency): {l:.9}\n")),
            None => s.push_str("|lambda_2|:           undefined (disconnected)\n"),
        }
        s
    };
    emit(&cmd.output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn median_ms(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

fn cmd_bench(cmd: BenchCmd) -> Result<ExitCode, Error> {
    let (b, w, r, g) = match cmd.preset.as_str() {
        "paper" => (64usize, 3usize, 3usize, 2usize),
        "custom" => (cmd.block, cmd.window, cmd.random, cmd.global),
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown preset {other:?}; expected paper or custom"
            )))
        }
    };
    let d = cmd.dim;
    let mut out = String::new();
    out.push_str(&format!("# schema: {BENCH_CSV_SCHEMA}\n"));
    out.push_str(&format!(
        "# preset: b={b} w={w} r={r} g={g} d={d} heads={} trials={} seed={}\n",
        cmd.heads, cmd.trials, cmd.seed
    ));
    out.push_str("n,dense_flops,sparse_flops,ratio,dense_wall_ms,sparse_wall_ms\n");
    for &n in &cmd.lengths {
        let cfg = BlockPatternConfig::new(n, b, w, r, g, Mode::Itc, cmd.seed)?;
        let flops = flop_count(&cfg, d, d, cmd.heads)?;
        let (dense_ms, sparse_ms) = if cmd.trials == 0 {
            (String::new(), String::new())
        } else {
            let mut rng = Rng64::new(cmd.seed ^ n as u64);
            let x = Mat::random(n, d, -1.0, 1.0, &mut rng);
            let heads: Vec<HeadParams> = (0..cmd.heads)
                .map(|_| {
                    HeadParams::new(
                        Mat::random(d, d, -1.0, 1.0, &mut rng),
                        Mat::random(d, d, -1.0, 1.0, &mut rng),
                        Mat::random(d, d, -1.0, 1.0, &mut rng),
                    )
                    .unwrap()
                })
                .collect();
            let full = TokenMask::full(n);
            let kind = ScoreKind::practical(d);
            // Warmup runs are excluded from the medians.
            attn_dense(&x, &heads, &full, kind)?;
            attn_block_sparse(&x, &heads, &cfg, kind)?;
            let mut dense_samples = Vec::with_capacity(cmd.trials);
            let mut sparse_samples = Vec::with_capacity(cmd.trials);
            for _ in 0..cmd.trials {
                let t0 = Instant::now();
                std::hint::black_box(attn_dense(&x, &heads, &full, kind)?);
                dense_samples.push(t0.elapsed().as_secs_f64() * 1e3);
                let t1 = Instant::now();
                std::hint::black_box(attn_block_sparse(&x, &heads, &cfg, kind)?);
                sparse_samples.push(t1.elapsed().as_secs_f64() * 1e3);
            }
            (
                format!("{:.3}", median_ms(&mut dense_samples)),
                format!("{:.3}", median_ms(&mut sparse_samples)),
            )
        };
        out.push_str(&format!(
            "{n},{},{},{:.6},{dense_ms},{sparse_ms}\n",
            flops.dense_flops, flops.sparse_flops, flops.ratio
        ));
    }
    emit(&cmd.csv, &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(cmd: CheckCmd) -> Result<ExitCode, Error> {
    let reports = match cmd.suite.as_str() {
        "equivalence" => vec![checks::suite_equivalence(cmd.seed, 50, 1e-10)?],
        "gradcheck" => vec![checks::suite_gradcheck(cmd.seed)?],
        "theory" => vec![checks::suite_theory(cmd.seed)?],
        "graphs" => vec![checks::suite_graphs(cmd.seed)?],
        "all" => checks::run_all(cmd.seed)?,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown suite {other:?}; expected equivalence, gradcheck, theory, graphs, or all"
            )))
        }
    };
    let mut all_passed = true;
    for r in &reports {
        println!("{}", r.summary_line());
        for f in &r.failures {
            println!("  failing case: {f}");
        }
        all_passed &= r.passed;
    }
    Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_demo(cmd: DemoCmd) -> Result<ExitCode, Error> {
    match cmd.which.as_str() {
        "furthest" => {
            let u = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]])
                .expect("static demo input");
            println!("inputs (unit vectors):");
            for i in 0..u.rows() {
                println!("  u{} = {:?}", i + 1, u.row(i));
            }
            let rows = furthest_vector(&u)?;
            println!("hardmax attention layer output:");
            let mut agree = true;
            for (i, row) in rows.iter().enumerate() {
                // Brute-force oracle for the printed agreement column.
                let mut best = 0;
                let mut best_d = f64::NEG_INFINITY;
                for k in 0..u.rows() {
                    let dist: f64 =
                        (0..u.cols()).map(|c| (u[(k, c)] - u[(i, c)]).powi(2)).sum();
                    if dist > best_d {
                        best_d = dist;
                        best = k;
                    }
                }
                if row.tie {
                    println!(
                        "  {}* -> tie among {:?} (candidates equidistant)",
                        i + 1,
                        row.argmax_set.iter().map(|k| k + 1).collect::<Vec<_>>()
                    );
                } else {
                    agree &= row.index == best;
                    println!(
                        "  {}* -> {} (vector {:?}, oracle agrees: {})",
                        i + 1,
                        row.index + 1,
                        row.vector,
                        row.index == best
                    );
                }
            }
            println!("oracle agreement on non-tied rows: {agree}");
            Ok(ExitCode::SUCCESS)
        }
        "shift" => {
            let x = Mat::from_rows(&[
                vec![0.0, 1.0, 0.0],
                vec![2.0, 0.0, -1.0],
                vec![5.0, -1.0, 2.0],
                vec![-1.0, 0.5, 0.5],
            ])
            .expect("static demo input");
            let params = ShiftParams {
                u: vec![1.0, 1.0, 0.0],
                b1: cmd.b1,
                b2: cmd.b2,
                rho: cmd.rho,
                graph: TokenMask::full(4),
            };
            println!("projections u.x_i before shift:");
            for i in 0..x.rows() {
                let p: f64 = x.row(i).iter().zip(&params.u).map(|(a, b)| a * b).sum();
                println!("  row {i}: {p}");
            }
            let (out, shifted) = selective_shift(&x, &params)?;
            println!(
                "range [{}, {}], rho {} -> {} rows shifted",
                cmd.b1,
                cmd.b2,
                cmd.rho,
                shifted.len()
            );
            for &i in &shifted {
                println!(
                    "  row {i}: coordinate 0 {} -> {}",
                    x[(i, 0)],
                    out[(i, 0)]
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        "turing-graph" => {
            let report = checks::check_turing_graph(cmd.nodes);
            let graph = crate::pattern::build_turing_decoder_graph(cmd.nodes);
            println!("decoder graph on {} nodes ({} edges):", cmd.nodes, graph.edges.len());
            for (u, v) in &graph.edges {
                println!("  {u} -> {v}");
            }
            println!("matches brute-force enumeration: {}", report.passed);
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        other => Err(Error::InvalidConfig(format!(
            "unknown demo {other:?}; expected furthest, shift, or turing-graph"
        ))),
    }
}
