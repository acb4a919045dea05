use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ipsc_core::codec::{encode, Bitstream};
use ipsc_core::conditioning::{ConditioningConfig, CovarianceModel, MeanModel, DEFAULT_CLAMP};
use ipsc_core::decoders::{DecoderContext, DecoderRegistry};
use ipsc_core::eval::{run_matrix, MatrixConfig};
use ipsc_core::prior::load_prior;
use ipsc_core::sampler::{
    consistency_rate, NoiseSchedule, DEFAULT_EPS, DEFAULT_SIGMA2_END_DB, DEFAULT_SIGMA2_START_DB, DEFAULT_STEPS,
    TWEEDIE_SIGMA2_END_DB, TWEEDIE_STEPS,
};
use ipsc_core::transform::AudioSignal;
use ipsc_core::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(name = "ipsc", version, about = "MDCT codec with a posterior-sampling decoder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a 22050 Hz mono 16-bit WAV file.
    Encode {
        input: PathBuf,
        output: PathBuf,
        /// Target bitrate in kb/s.
        #[arg(long, default_value_t = 16.0)]
        bitrate: f64,
    },
    /// Decode a bitstream to WAV.
    Decode(DecodeArgs),
    /// Run an experiment matrix and write a CSV report.
    Eval {
        config: PathBuf,
        /// Output CSV; standard output if omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Standard,
    Tweedie,
}

#[derive(Args)]
struct DecodeArgs {
    input: PathBuf,
    output: PathBuf,
    /// `legacy`, `inv`, or any registered decoder name.
    #[arg(long, default_value = "legacy")]
    mode: String,
    /// Disable noise fill in legacy mode.
    #[arg(long)]
    no_fill: bool,
    /// Prior spec file (required by inv).
    #[arg(long)]
    prior: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Schedule preset; explicit flags override it.
    #[arg(long, value_enum, default_value = "standard")]
    preset: Preset,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sigma2_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sigma2_end: Option<f64>,
    /// noisy | tweedie
    #[arg(long, default_value = "noisy")]
    mean: String,
    /// noisy | pgdm
    #[arg(long, default_value = "noisy")]
    cov: String,
    /// Score clamp as a multiple of 1/σ, or `off`.
    #[arg(long, default_value_t = DEFAULT_CLAMP.to_string())]
    clamp: String,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical { .. } => EXIT_NUMERICAL,
            Error::Capability(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: EXIT_DATA, message: e.to_string() }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("IPSC_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| Failure::usage(format!("IPSC_THREADS must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(Failure::usage("IPSC_THREADS must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("cannot configure thread pool: {e}")))
}

fn cmd_encode(input: PathBuf, output: PathBuf, bitrate: f64) -> Result<(), Failure> {
    if !(bitrate > 0.0 && bitrate.is_finite()) {
        return Err(Failure::usage(format!("bitrate must be positive, got {bitrate}")));
    }
    let signal = AudioSignal::read_wav(&input)?;
    let encoded = encode(&signal, bitrate)?;
    fs::write(&output, &encoded.bytes)?;
    println!("frames: {}", encoded.stream.header.frames);
    println!("bytes: {}", encoded.bytes.len());
    println!("bitrate: {:.3} kb/s", encoded.realized_kbps());
    println!("overflow frames: {}", encoded.overflow_frames());
    Ok(())
}

fn schedule(args: &DecodeArgs) -> Result<NoiseSchedule, Failure> {
    let (steps, end) = match args.preset {
        Preset::Standard => (DEFAULT_STEPS, DEFAULT_SIGMA2_END_DB),
        Preset::Tweedie => (TWEEDIE_STEPS, TWEEDIE_SIGMA2_END_DB),
    };
    NoiseSchedule::new(
        args.steps.unwrap_or(steps),
        args.sigma2_start.unwrap_or(DEFAULT_SIGMA2_START_DB),
        args.sigma2_end.unwrap_or(end),
        args.eps.unwrap_or(DEFAULT_EPS),
    )
    .map_err(|e| Failure::usage(e.to_string()))
}

fn conditioning(args: &DecodeArgs) -> Result<ConditioningConfig, Failure> {
    let clamp = match args.clamp.as_str() {
        "off" => None,
        s => Some(s.parse::<f64>().map_err(|_| Failure::usage(format!("--clamp expects a number or `off`, got {s:?}")))?),
    };
    let cfg = ConditioningConfig {
        mean_model: args.mean.parse::<MeanModel>().map_err(|e| Failure::usage(e.to_string()))?,
        covariance_model: args.cov.parse::<CovarianceModel>().map_err(|e| Failure::usage(e.to_string()))?,
        clamp,
    };
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(cfg)
}

fn cmd_decode(args: DecodeArgs) -> Result<(), Failure> {
    let registry = DecoderRegistry::global();
    let name = match (args.mode.as_str(), args.no_fill) {
        ("legacy", false) => "dec",
        ("legacy", true) => "dec-nofill",
        (other, _) => other,
    };
    if !registry.contains(name) {
        let known: Vec<&str> = registry.names().collect();
        return Err(Failure::usage(format!("unknown --mode {:?} (legacy, {})", args.mode, known.join(", "))));
    }
    let ctx = DecoderContext {
        prior: args.prior.as_ref().map(load_prior).transpose()?.map(|p| p as Arc<_>),
        conditioning: conditioning(&args)?,
        schedule: schedule(&args)?,
    };
    let decoder = registry.build(name, &ctx).map_err(|e| Failure::usage(format!("{e} (pass --prior)")))?;
    if name == "inv" && ctx.conditioning.mean_model == MeanModel::Tweedie {
        let prior = ctx.prior.as_ref().expect("inv was built with a prior");
        if !prior.has_vjp() {
            return Err(Error::Capability(format!(
                "--mean tweedie needs a prior with a vector-Jacobian product; `{}` has none",
                prior.name()
            ))
            .into());
        }
    }

    let data = fs::read(&args.input)?;
    let stream = Bitstream::from_bytes(&data)?;
    let start = Instant::now();
    let decoded = decoder.decode(&stream, args.seed)?;
    let elapsed = start.elapsed();
    decoded.write_wav(&args.output)?;
    let c = consistency_rate(decoded.samples(), &stream.measurement)?;
    println!("decoder: {}", decoder.name());
    println!("samples: {}", decoded.len());
    println!("consistency: {:.4} (envelope {:.4}, bins {:.4})", c.overall, c.envelope, c.bins);
    println!("runtime: {:.3} s", elapsed.as_secs_f64());
    Ok(())
}

fn cmd_eval(config: PathBuf, out: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = MatrixConfig::read(&config).map_err(|e| match e {
        Error::Io(io) => Failure { code: EXIT_DATA, message: format!("{}: {io}", config.display()) },
        other => Failure::usage(format!("{}: {other}", config.display())),
    })?;
    let report = run_matrix(&cfg);
    match out {
        Some(path) => report.write_csv(fs::File::create(path)?)?,
        None => report.write_csv(std::io::stdout().lock())?,
    }
    let failed = report.failure_count();
    if failed > 0 {
        eprintln!("warning: {failed} run(s) failed; see the `failures` rows");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::Encode { input, output, bitrate } => cmd_encode(input, output, bitrate),
        Command::Decode(args) => cmd_decode(args),
        Command::Eval { config, out } => cmd_eval(config, out),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
