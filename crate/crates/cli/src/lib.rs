//! Command-line front end. [`run`] parses arguments, dispatches to the
//! library and returns the process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, watermark verified, chain intact |
//! | 1 | watermark mismatch or tampering found |
//! | 2 | usage error |
//! | 3 | I/O, format or capacity error |

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use colparity::capacity::{capacity_curve, recommend_step, DEFAULT_REQUIRED_BITS};
use colparity::codec::{
    bits_to_text, embed, extract_bits, text_to_bits, verify_watermark, CodecError, WatermarkBits,
    DEFAULT_STEP,
};
use colparity::ledger::{extract_framed, ChainStore, TamperKind};
use colparity::otsu::{binarize, otsu_threshold};
use colparity::pnm::{load_pbm, load_pgm, save_pbm, PbmFormat};
use colparity::steganalysis::{acorr_diff, autocorr, diff_to_csv, parity_sequence};
use colparity::synth::generate_synthetic;
use colparity::BinaryImage;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "colparity",
    version,
    about = "Column-parity watermarking for binary document images"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Binarize a grayscale PGM with Otsu's threshold.
    Binarize {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::P4)]
        format: Format,
    },
    /// Embed a watermark into a PBM page.
    Embed {
        #[command(flatten)]
        payload: Payload,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: usize,
        /// Write the embed report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::P4)]
        format: Format,
        input: PathBuf,
        output: PathBuf,
    },
    /// Read watermark bits back from a PBM page.
    Extract {
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: usize,
        /// Number of bits to read.
        #[arg(long, required_unless_present = "framed", conflicts_with = "framed")]
        nbits: Option<usize>,
        /// Read a length- and CRC-framed text, as stored by `chain append`.
        #[arg(long)]
        framed: bool,
        input: PathBuf,
    },
    /// Check that a page carries the given watermark.
    Verify {
        #[command(flatten)]
        payload: Payload,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: usize,
        input: PathBuf,
    },
    /// Print watermark capacity per step as CSV.
    Capacity {
        #[arg(long, value_delimiter = ',', required = true)]
        steps: Vec<usize>,
        input: PathBuf,
    },
    /// Pick the step giving the most uniform capacity across pages.
    Recommend {
        #[arg(long, value_delimiter = ',', required = true)]
        steps: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_REQUIRED_BITS)]
        required_bits: usize,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Print the autocorrelation of the column parity sequence as CSV.
    Acorr {
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: usize,
        #[arg(long)]
        max_lag: usize,
        /// Print the difference against this page instead (input minus baseline).
        #[arg(long)]
        baseline: Option<PathBuf>,
        input: PathBuf,
    },
    /// Generate a synthetic handwriting-like page.
    Synth {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        strokes: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::P4)]
        format: Format,
        output: PathBuf,
    },
    /// Hash-chained record ledger.
    Chain {
        #[command(subcommand)]
        action: ChainAction,
    },
}

#[derive(Debug, Subcommand)]
enum ChainAction {
    /// Create an empty chain file.
    Init {
        #[arg(long)]
        chain: PathBuf,
    },
    /// Watermark a page with metadata and append it as a block.
    Append {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: usize,
        #[arg(long)]
        text: String,
        input: PathBuf,
    },
    /// Check every block and print one verdict per line.
    Audit {
        #[arg(long)]
        chain: PathBuf,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Payload {
    /// UTF-8 text, encoded MSB first.
    #[arg(long)]
    text: Option<String>,
    /// Raw bit string of 0s and 1s.
    #[arg(long)]
    bits: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    P1,
    P4,
}

impl From<Format> for PbmFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::P1 => PbmFormat::P1,
            Format::P4 => PbmFormat::P4,
        }
    }
}

/// A bad argument value that clap cannot catch on its own.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

impl Payload {
    fn bits(&self) -> Result<WatermarkBits> {
        match (&self.text, &self.bits) {
            (Some(t), _) => Ok(text_to_bits(t)),
            (None, Some(b)) => b.parse().map_err(|e| Usage(format!("--bits: {e}")).into()),
            (None, None) => unreachable!("clap enforces the payload group"),
        }
    }
}

fn check_step(step: usize) -> Result<()> {
    if step == 0 {
        bail!(Usage("--step must be positive".into()));
    }
    Ok(())
}

fn read_pbm(path: &Path) -> Result<BinaryImage> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    load_pbm(&bytes).with_context(|| format!("{} is not a valid PBM", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Binarize {
            input,
            output,
            format,
        } => {
            let bytes =
                fs::read(&input).with_context(|| format!("cannot read {}", input.display()))?;
            let gray = load_pgm(&bytes)
                .with_context(|| format!("{} is not a valid PGM", input.display()))?;
            let t = otsu_threshold(&gray);
            write_file(&output, &save_pbm(&binarize(&gray, t), format.into()))?;
            writeln!(out, "threshold: {t}")?;
        }
        Command::Embed {
            payload,
            step,
            report,
            format,
            input,
            output,
        } => {
            check_step(step)?;
            let wm = payload.bits()?;
            let img = read_pbm(&input)?;
            let (marked, rep) = embed(&img, &wm, step)?;
            write_file(&output, &save_pbm(&marked, format.into()))?;
            if let Some(path) = report {
                write_file(&path, rep.to_json().as_bytes())?;
            }
            writeln!(
                out,
                "embedded {} bits, toggled {} pixels",
                wm.len(),
                rep.pixels_toggled
            )?;
        }
        Command::Extract {
            step,
            nbits,
            framed,
            input,
        } => {
            check_step(step)?;
            let img = read_pbm(&input)?;
            if framed {
                match extract_framed(&img, step) {
                    Ok(text) => writeln!(out, "text: {text}")?,
                    Err(e) => {
                        writeln!(out, "no valid frame: {e}")?;
                        return Ok(EXIT_MISMATCH);
                    }
                }
            } else {
                let bits = extract_bits(&img, nbits.unwrap_or_default(), step)?;
                writeln!(out, "bits: {bits}")?;
                if let Ok(text) = bits_to_text(&bits) {
                    writeln!(out, "text: {text}")?;
                }
            }
        }
        Command::Verify {
            payload,
            step,
            input,
        } => {
            check_step(step)?;
            let wm = payload.bits()?;
            let img = read_pbm(&input)?;
            if verify_watermark(&img, &wm, step) {
                writeln!(out, "verified")?;
            } else {
                writeln!(out, "mismatch")?;
                return Ok(EXIT_MISMATCH);
            }
        }
        Command::Capacity { steps, input } => {
            steps.iter().try_for_each(|&s| check_step(s))?;
            let img = read_pbm(&input)?;
            write!(out, "{}", capacity_curve(&img, &steps)?.to_csv())?;
        }
        Command::Recommend {
            steps,
            required_bits,
            inputs,
        } => {
            steps.iter().try_for_each(|&s| check_step(s))?;
            let images = inputs
                .iter()
                .map(|p| read_pbm(p))
                .collect::<Result<Vec<_>>>()?;
            writeln!(out, "{}", recommend_step(&images, &steps, required_bits)?)?;
        }
        Command::Acorr {
            step,
            max_lag,
            baseline,
            input,
        } => {
            check_step(step)?;
            let seq = parity_sequence(&read_pbm(&input)?, step)?;
            let values = autocorr(&seq, max_lag)?;
            match baseline {
                None => write!(out, "{}", values.to_csv())?,
                Some(path) => {
                    let base = autocorr(&parity_sequence(&read_pbm(&path)?, step)?, max_lag)?;
                    write!(out, "{}", diff_to_csv(&acorr_diff(&base, &values)?))?;
                }
            }
        }
        Command::Synth {
            width,
            height,
            strokes,
            seed,
            format,
            output,
        } => {
            if width == 0 || height == 0 {
                bail!(Usage("--width and --height must be positive".into()));
            }
            let img = generate_synthetic(width, height, strokes, seed);
            write_file(&output, &save_pbm(&img, format.into()))?;
        }
        Command::Chain { action } => return chain(action, out),
    }
    Ok(EXIT_OK)
}

fn chain(action: ChainAction, out: &mut dyn Write) -> Result<i32> {
    match action {
        ChainAction::Init { chain } => {
            ChainStore::init(&chain)?;
            writeln!(out, "created {}", chain.display())?;
        }
        ChainAction::Append {
            chain,
            step,
            text,
            input,
        } => {
            check_step(step)?;
            let store = ChainStore::open(&chain)?;
            let img = read_pbm(&input)?;
            let (block, report) = store.append_record(&img, &text, step)?;
            writeln!(
                out,
                "block {} {} ({} pixels toggled)",
                block.index, block.record_hash, report.pixels_toggled
            )?;
        }
        ChainAction::Audit { chain } => {
            let verdicts = ChainStore::open(&chain)?.audit()?;
            for v in &verdicts {
                writeln!(out, "{} {} {}", v.block_index, v.kind, v.detail)?;
            }
            if verdicts.iter().any(|v| v.kind != TamperKind::Intact) {
                return Ok(EXIT_MISMATCH);
            }
        }
    }
    Ok(EXIT_OK)
}

fn exit_code(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    match e.downcast_ref::<CodecError>() {
        Some(CodecError::InvalidStep { .. }) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            exit_code(&e)
        }
    }
}
