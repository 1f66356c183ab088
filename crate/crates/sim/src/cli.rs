//! The `grand-sim` command line.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use grand_core::channel::{mask_threshold, ChannelModel};
use grand_core::sim::{DEFAULT_STRATUM_FLOOR, Z95};
use grand_core::{BitVector, Code, Grand, GuessBudget};

use crate::config::load_code_spec;
use crate::error::{Result, SimError};
use crate::experiment::{hard_curve, parse_snr_grid, scan_ab, soft_curve, Curve, SoftSetup};
use crate::matrix_io::write_matrix;
use crate::parallel::{build_pool, default_jobs, run_conditional_par, RangeSplit, JOBS_ENV};
use crate::report::{
    emit, json_document, q_cdf_rows, write_csv, write_json, AbRow, ConditionalRow, CurveRow, DecodeRow, Format, MaskRow, SNR_NOTE,
};

const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "grand-sim", version, about = "GRAND-family decoding and BLER simulation for binary linear codes")]
struct Cli {
    /// Code preset (ul128_105, dl128_99) or path to a code file.
    #[arg(long, global = true, default_value = "ul128_105")]
    code: String,

    /// Random seed; required by the curve commands.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte-Carlo trials per stratum.
    #[arg(long, global = true, default_value_t = 10_000)]
    trials: u64,

    /// Output format (decode defaults to json, everything else to csv).
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Worker threads.
    #[arg(long, global = true, env = JOBS_ENV)]
    jobs: Option<usize>,

    /// Write the generator and parity-check matrices to DIR/G.txt and DIR/H.txt.
    #[arg(long, global = true, value_name = "DIR")]
    dump_matrices: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Encode hex information words (one per line, from --input or stdin).
    Encode {
        #[arg(long)]
        input: Option<String>,
    },
    /// Decode a hex received word, optionally restricted by a hex mask (1 = unreliable).
    Decode {
        #[arg(long)]
        received: Option<String>,
        #[arg(long)]
        mask: Option<String>,
        /// Abandon after all patterns up to this weight.
        #[arg(long, conflicts_with = "budget")]
        ab: Option<usize>,
        /// Abandon after this many queries.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Conditional statistics given a number of flips (and a mask length).
    Conditional {
        #[arg(long)]
        flips: usize,
        /// Number of unreliable bits; the flips are placed inside the mask.
        #[arg(long)]
        mask_len: Option<usize>,
        /// Budget of all patterns up to this weight on the full block.
        #[arg(long, conflicts_with = "budget")]
        ab: Option<usize>,
        #[arg(long)]
        budget: Option<u64>,
        /// Emit the query-count distribution instead of the summary row.
        #[arg(long)]
        q_cdf: bool,
    },
    /// GRANDAB BLER and mean query count over an SNR grid.
    CurveHard {
        #[arg(long)]
        ab: usize,
        /// SNR grid in dB: start:step:stop, a comma list or one value.
        #[arg(long)]
        snr: String,
    },
    /// SGRANDAB BLER and mean query count over an SNR grid.
    CurveSoft {
        #[arg(long)]
        merr: f64,
        /// Budget of all patterns up to this weight on the full block.
        #[arg(long, default_value_t = 3)]
        budget_weight: usize,
        #[arg(long)]
        snr: String,
        /// Strata less likely than this are not simulated.
        #[arg(long, default_value_t = DEFAULT_STRATUM_FLOOR)]
        floor: f64,
    },
    /// Conditional error rate per flip count and the abandonment weight it selects.
    SelectAb {
        #[arg(long, default_value_t = 8)]
        max_flips: usize,
    },
    /// Mask threshold tau and the derived probabilities.
    MaskThreshold {
        #[arg(long)]
        merr: f64,
        #[arg(long)]
        snr: String,
        /// Block length; defaults to the code's.
        #[arg(short, long)]
        n: Option<usize>,
    },
}

enum Failure {
    Usage(String),
    Run(SimError),
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(msg) => Failure::Usage(msg),
            other => Failure::Run(other),
        }
    }
}

impl From<grand_core::Error> for Failure {
    fn from(e: grand_core::Error) -> Self {
        Failure::Run(e.into())
    }
}

/// Runs the command line; returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match execute(cli, stdin, stdout, stderr) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let usage = Cli::command().render_usage();
            let _ = writeln!(stderr, "error: {msg}\n\n{usage}\n\nFor more information, try '--help'.");
            2
        }
        Err(Failure::Run(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn parse_hex(what: &str, len: usize, text: &str) -> std::result::Result<BitVector, Failure> {
    BitVector::from_hex(len, text.trim()).map_err(|e| Failure::Usage(format!("{what}: {e}")))
}

fn dump_matrices(dir: &Path, code: &Code) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    for (name, m) in [("G.txt", code.generator()), ("H.txt", code.parity_check())] {
        let path = dir.join(name);
        let file = std::fs::File::create(&path).map_err(|e| SimError::io(&path, e))?;
        write_matrix(m, std::io::BufWriter::new(file)).map_err(|e| SimError::io(&path, e))?;
    }
    Ok(())
}

fn require_seed(seed: Option<u64>) -> std::result::Result<u64, Failure> {
    seed.ok_or_else(|| Failure::Usage("--seed is required for curve commands".into()))
}

fn emit_with<T: Serialize>(
    format: Format,
    kind: &str,
    notes: &[&str],
    rows: &[T],
    extra: Vec<(&str, serde_json::Value)>,
    out: &mut dyn Write,
) -> Result<()> {
    match format {
        Format::Csv => write_csv(kind, notes, rows, out),
        Format::Json => write_json(&json_document(kind, notes, rows, extra)?, out),
    }
}

fn execute(cli: Cli, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    let spec = load_code_spec(&cli.code)?;
    let code = Code::build(&spec)?;
    let n = code.n();
    if let Some(dir) = &cli.dump_matrices {
        dump_matrices(dir, &code)?;
    }
    let jobs = cli.jobs.unwrap_or_else(default_jobs);
    if jobs == 0 {
        return Err(Failure::Usage("--jobs must be positive".into()));
    }
    if cli.trials == 0 {
        return Err(Failure::Usage("--trials must be positive".into()));
    }
    let pool = build_pool(jobs)?;
    let decoder = Grand::new(&code);
    let format_default = |fallback| match cli.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => fallback,
    };
    let format = format_default(Format::Csv);
    let trials = cli.trials;

    match cli.command {
        Command::Encode { input } => {
            let lines: Vec<String> = match input {
                Some(text) => vec![text],
                None => stdin.lines().collect::<std::io::Result<_>>().map_err(SimError::from)?,
            };
            #[derive(Serialize)]
            struct EncodeRow {
                info: String,
                codeword: String,
            }
            let mut rows = Vec::new();
            for line in lines.iter().filter(|l| !l.trim().is_empty()) {
                let x = parse_hex("information word", code.k(), line)?;
                rows.push(EncodeRow { info: x.to_hex(), codeword: code.encode(&x)?.to_hex() });
            }
            emit(format, "encode", &[], &rows, stdout)?;
        }
        Command::Decode { received, mask, ab, budget } => {
            let text = match received {
                Some(t) => t,
                None => {
                    let mut line = String::new();
                    stdin.read_line(&mut line).map_err(SimError::from)?;
                    line
                }
            };
            let y = parse_hex("received word", n, &text)?;
            let budget = match (ab, budget) {
                (Some(w), _) => GuessBudget::up_to_weight(n, w),
                (None, Some(0)) => return Err(Failure::Usage("--budget must be positive".into())),
                (None, Some(t)) => GuessBudget::queries(t),
                (None, None) => GuessBudget::UNBOUNDED,
            };
            let split = RangeSplit { parts: jobs * 4 };
            let outcome = match mask {
                Some(m) => {
                    let s = parse_hex("mask", n, &m)?;
                    pool.install(|| decoder.decode_masked_with(&y, &s, budget, &split))?
                }
                None => pool.install(|| decoder.decode_with(&y, budget, &split))?,
            };
            emit(format_default(Format::Json), "decode", &[], &[DecodeRow::from(&outcome)], stdout)?;
        }
        Command::Conditional { flips, mask_len, ab, budget, q_cdf } => {
            let seed = cli.seed.unwrap_or(DEFAULT_SEED);
            let condition = match mask_len {
                Some(l) if flips > l || l > n => {
                    return Err(Failure::Usage(format!("need flips <= mask-len <= n = {n}")));
                }
                Some(l) => grand_core::sim::Condition::Masked { l, b_u: flips },
                None if flips > n => return Err(Failure::Usage(format!("--flips exceeds n = {n}"))),
                None => grand_core::sim::Condition::Flips { b: flips },
            };
            let budget = match (ab, budget) {
                (Some(w), _) if w > n => return Err(Failure::Usage(format!("--ab exceeds n = {n}"))),
                (Some(w), _) => GuessBudget::up_to_weight(n, w),
                (None, Some(0)) => return Err(Failure::Usage("--budget must be positive".into())),
                (None, Some(t)) => GuessBudget::queries(t),
                (None, None) => GuessBudget::UNBOUNDED,
            };
            let _ = writeln!(stderr, "grand-sim: seed = {seed}");
            let stats = pool.install(|| run_conditional_par(&code, &decoder, condition, budget, trials, seed))?;
            let row = ConditionalRow::new(&stats, budget, seed);
            let cdf = q_cdf_rows(&stats);
            if q_cdf {
                emit_with(format, "q-cdf", &[], &cdf, vec![("stats", json!(row))], stdout)?;
            } else {
                emit_with(format, "conditional", &[], &[row], vec![("q_cdf", json!(cdf))], stdout)?;
            }
        }
        Command::CurveHard { ab, snr } => {
            let seed = require_seed(cli.seed)?;
            let snrs = parse_snr_grid(&snr)?;
            if ab > n {
                return Err(Failure::Usage(format!("--ab exceeds n = {n}")));
            }
            let _ = writeln!(stderr, "grand-sim: seed = {seed}");
            let curve = pool.install(|| hard_curve(&code, &decoder, ab, &snrs, trials, seed))?;
            emit_curve(format, "curve-hard", &curve, n, trials, seed, GuessBudget::up_to_weight(n, ab), stdout)?;
        }
        Command::CurveSoft { merr, budget_weight, snr, floor } => {
            let seed = require_seed(cli.seed)?;
            let snrs = parse_snr_grid(&snr)?;
            if !(merr > 0.0 && merr < 1.0) {
                return Err(Failure::Usage("--merr must lie in (0, 1)".into()));
            }
            if budget_weight > n {
                return Err(Failure::Usage(format!("--budget-weight exceeds n = {n}")));
            }
            if !(0.0..1.0).contains(&floor) {
                return Err(Failure::Usage("--floor must lie in [0, 1)".into()));
            }
            let _ = writeln!(stderr, "grand-sim: seed = {seed}");
            let budget = grand_core::grand::sgrandab_budget(n, budget_weight);
            let setup = SoftSetup { merr, budget, floor };
            let curve = pool.install(|| soft_curve(&code, &decoder, &setup, &snrs, trials, seed))?;
            emit_curve(format, "curve-soft", &curve, n, trials, seed, budget, stdout)?;
        }
        Command::SelectAb { max_flips } => {
            let seed = cli.seed.unwrap_or(DEFAULT_SEED);
            let _ = writeln!(stderr, "grand-sim: seed = {seed}");
            let scan = pool.install(|| scan_ab(&code, &decoder, max_flips, |_| trials, seed))?;
            let rows: Vec<AbRow> = scan
                .stats
                .iter()
                .enumerate()
                .map(|(b, s)| {
                    let (lo, hi) = s.bler_interval(Z95);
                    AbRow {
                        b,
                        trials: s.trials,
                        cond_bler: s.cond_bler(),
                        cond_bler_lo: lo,
                        cond_bler_hi: hi,
                        mean_q: s.mean_q(),
                        within_limit: s.cond_bler() <= grand_core::sim::AB_ERROR_LIMIT,
                        selected_ab: scan.ab,
                        seed,
                    }
                })
                .collect();
            emit_with(format, "select-ab", &[], &rows, vec![("ab", json!(scan.ab))], stdout)?;
        }
        Command::MaskThreshold { merr, snr, n: block } => {
            let block = block.unwrap_or(n);
            if block == 0 {
                return Err(Failure::Usage("-n must be positive".into()));
            }
            let rows = parse_snr_grid(&snr)?
                .into_iter()
                .map(|s| {
                    let ch = ChannelModel::from_snr_db(s, block);
                    mask_threshold(&ch, merr).map(|m| MaskRow::new(&ch, &m))
                })
                .collect::<grand_core::Result<Vec<_>>>()?;
            emit(format, "mask-threshold", &[SNR_NOTE], &rows, stdout)?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn emit_curve(
    format: Format,
    kind: &str,
    curve: &Curve,
    n: usize,
    trials: u64,
    seed: u64,
    budget: GuessBudget,
    out: &mut dyn Write,
) -> Result<()> {
    let rows: Vec<CurveRow> = curve.points.iter().map(|p| CurveRow::new(p, n, curve.stats.len(), trials, seed)).collect();
    let strata: Vec<ConditionalRow> = curve.stats.iter().map(|s| ConditionalRow::new(s, budget, seed)).collect();
    emit_with(format, kind, &[SNR_NOTE], &rows, vec![("strata", json!(strata))], out)
}
