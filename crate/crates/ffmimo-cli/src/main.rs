//! `ffmimo` binary: rate reports, Monte Carlo runs, channel transforms,
//! and figure sweeps over finite-field MIMO channels.

use std::io::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ffmimo::io::{format_finite, read_channel_file, ParsedChannel};
use ffmimo::{
    kappa_of, min_distance, run_mc, transform, ChannelModel, ChannelTransform, EpsModel, Error,
    FiniteChannel, McConfig, PmfMethod, PrimeField, Result, Scheme,
};
use ffmimo_cli::config::{
    parse_mc_scheme, read_custom_figure_config, read_simulate_config, RandomChannelSpec,
};
use ffmimo_cli::csvout::{Dataset, Row};
use ffmimo_cli::figures::{run_custom, run_figure, scheme_rate, FigureId, FigureRequest};

#[derive(Parser)]
#[command(
    name = "ffmimo",
    version,
    about = "Finite-field MIMO toolkit: rates, detection simulations, channel transforms, and figure sweeps"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Achievable rates of the requested schemes on a channel file.
    Rate(RateArgs),
    /// Monte Carlo error rates of a detector, from a TOML run config.
    Simulate(SimulateArgs),
    /// Minimum distance of the code generated by a channel file.
    Mindist(MindistArgs),
    /// Derive the finite-field form of a real channel file.
    Transform(TransformArgs),
    /// Run a built-in figure sweep, or a custom sweep from a TOML config.
    Figure(FigureArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Tsv,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format.
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

impl OutputArgs {
    fn emit_table(&self, ds: &Dataset) -> Result<()> {
        let text = match self.format {
            OutFormat::Csv => ds.to_csv(),
            OutFormat::Tsv => ds.to_tsv(),
        };
        self.emit_text(&text)
    }

    fn emit_text(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

#[derive(Args)]
struct RateArgs {
    /// Channel file, finite or real (real channels are transformed first).
    #[arg(long)]
    channel: PathBuf,
    /// Comma-separated scheme names; defaults to every scheme, skipping the
    /// ones the channel shape does not support.
    #[arg(long, value_delimiter = ',')]
    schemes: Vec<String>,
    /// Monte Carlo trials for the simulated code rate.
    #[arg(long, default_value_t = ffmimo_cli::figures::DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML run description (see `config` module docs for the format).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct MindistArgs {
    /// Channel file, finite or real.
    #[arg(long)]
    channel: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    /// Real channel file to convert.
    #[arg(long)]
    channel: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct FigureArgs {
    /// Built-in sweep: fig3, fig4, fig5, fig6, or fig7.
    #[arg(long, conflicts_with = "config")]
    id: Option<String>,
    /// Custom sweep description (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Monte Carlo trials per ensemble member; 0 keeps analytic rows only.
    #[arg(long, default_value_t = ffmimo_cli::figures::DEFAULT_TRIALS)]
    trials: u64,
    /// Master seed; for custom sweeps, overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Rate(args) => cmd_rate(args),
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Mindist(args) => cmd_mindist(args),
        Cmd::Transform(args) => cmd_transform(args),
        Cmd::Figure(args) => cmd_figure(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn join_eps(eps: &[f64]) -> String {
    eps.iter()
        .map(|e| format!("{e}"))
        .collect::<Vec<_>>()
        .join(";")
}

/// Loads a channel file, transforming real channels to their finite form.
/// Returns the channel, the SNR when the file was real, and the seed the
/// file carried, if any.
fn load_finite(path: &PathBuf) -> Result<(FiniteChannel, Option<f64>, Option<u64>)> {
    match read_channel_file(path)? {
        ParsedChannel::Finite(fc) => Ok((fc, None, None)),
        ParsedChannel::Real { channel, seed } => {
            let tr = transform(&channel)?;
            Ok((tr.channel, Some(channel.snr), seed))
        }
    }
}

const ALL_SCHEMES: [Scheme; 8] = [
    Scheme::AntennaSelection,
    Scheme::Repetition,
    Scheme::SuccessiveCancellation,
    Scheme::ZeroForcing,
    Scheme::Lbc,
    Scheme::Elbc,
    Scheme::Capacity,
    Scheme::BestCombiner,
];

fn cmd_rate(args: RateArgs) -> Result<()> {
    let (fc, snr, _) = load_finite(&args.channel)?;
    let explicit = !args.schemes.is_empty();
    let schemes: Vec<Scheme> = if explicit {
        args.schemes
            .iter()
            .map(|s| Scheme::from_str(s))
            .collect::<Result<_>>()?
    } else {
        ALL_SCHEMES.to_vec()
    };

    let mut ds = Dataset::default();
    ds.push_comment(format!("rates for channel file {}", args.channel.display()));
    ds.push_comment(format!(
        "p={} n_t={} n_r={} eps={}",
        fc.field().p(),
        fc.n_t(),
        fc.n_r(),
        join_eps(fc.eps())
    ));
    for scheme in schemes {
        let mut row = Row {
            figure: "rate".into(),
            p: fc.field().p() as u64,
            n_t: fc.n_t(),
            n_r: fc.n_r(),
            eps_spec: join_eps(fc.eps()),
            snr,
            scheme: scheme.to_string(),
            rate_bits: None,
            pe: None,
            d_min: None,
            trials: 0,
            stderr: None,
            seed: args.seed,
        };
        match scheme_rate(&fc, scheme, args.trials, args.seed) {
            Ok(r) => {
                row.rate_bits = Some(r.bits);
                row.pe = r.meta.pe;
                row.d_min = r.meta.d_min.map(|d| d as f64);
                row.trials = r.meta.trials.unwrap_or(0);
                row.stderr = r.meta.stderr;
                if let Some(sel) = &r.meta.selected {
                    ds.push_comment(format!("{scheme}: antennas {sel:?}"));
                }
                if let Some(w) = &r.meta.combiner {
                    ds.push_comment(format!("{scheme}: weights {w:?}"));
                }
            }
            // A shape mismatch is information, not a failure, when the user
            // asked for the default "everything" report.
            Err(e) if !explicit => {
                ds.push_comment(format!("{scheme}: skipped ({e})"));
            }
            Err(e) => return Err(e),
        }
        ds.rows.push(row);
    }
    args.output.emit_table(&ds)
}

fn random_channel_model(spec: &RandomChannelSpec) -> Result<(ChannelModel, String)> {
    let field = PrimeField::new(spec.p)?;
    let (eps, eps_spec) = match (&spec.eps_range, spec.eps.is_empty()) {
        (Some([lo, hi]), _) => (
            EpsModel::Uniform { lo: *lo, hi: *hi },
            format!("U[{lo},{hi})"),
        ),
        (None, false) => (EpsModel::Fixed(spec.eps.clone()), join_eps(&spec.eps)),
        (None, true) => unreachable!("config validation requires one eps form"),
    };
    Ok((
        ChannelModel::RandomQ {
            field,
            n_r: spec.n_r,
            n_t: spec.n_t,
            eps,
            require_full_rank: spec.require_full_rank,
        },
        eps_spec,
    ))
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let cfg = read_simulate_config(&args.config)?;
    let scheme = parse_mc_scheme(&cfg.scheme)?;

    let mut file_seed = None;
    let (channel, eps_spec, snr) = if let Some(path) = &cfg.channel.file {
        match read_channel_file(path)? {
            ParsedChannel::Finite(fc) => {
                let spec = join_eps(fc.eps());
                (ChannelModel::Finite(fc), spec, None)
            }
            ParsedChannel::Real { channel, seed } => {
                file_seed = seed;
                let snr = channel.snr;
                (ChannelModel::Real(channel), String::new(), Some(snr))
            }
        }
    } else {
        let spec = cfg
            .channel
            .random
            .as_ref()
            .expect("validated by config reader");
        let (model, eps_spec) = random_channel_model(spec)?;
        (model, eps_spec, None)
    };

    let (p, n_t, n_r) = match &channel {
        ChannelModel::Finite(fc) => (fc.field().p() as u64, fc.n_t(), fc.n_r()),
        ChannelModel::Real(ch) => (ch.field.p() as u64, ch.n_t(), ch.n_r()),
        ChannelModel::RandomQ {
            field, n_r, n_t, ..
        } => (field.p() as u64, *n_t, *n_r),
    };

    // Seed precedence: command line, then run config, then the channel file.
    let seed = args.seed.or(cfg.seed).or(file_seed).unwrap_or(0);
    let mc = run_mc(&McConfig {
        scheme,
        channel,
        trials: cfg.trials,
        seed,
    })?;

    let mut ds = Dataset::default();
    ds.push_comment(format!(
        "simulation of scheme {} from {}",
        cfg.scheme,
        args.config.display()
    ));
    for (i, (rate, se)) in mc
        .per_stream
        .iter()
        .zip(mc.per_stream_stderr.iter())
        .enumerate()
    {
        ds.push_comment(format!(
            "stream {i}: symbol error rate {rate} (stderr {se})"
        ));
    }
    ds.rows.push(Row {
        figure: "simulate".into(),
        p,
        n_t,
        n_r,
        eps_spec,
        snr,
        scheme: cfg.scheme.clone(),
        rate_bits: None,
        pe: Some(mc.block_error),
        d_min: None,
        trials: mc.trials,
        stderr: Some(mc.block_stderr),
        seed,
    });
    args.output.emit_table(&ds)
}

fn cmd_mindist(args: MindistArgs) -> Result<()> {
    let (fc, _, _) = load_finite(&args.channel)?;
    let d = min_distance(fc.q())?;
    println!("code [{}, {}] over Z{}", fc.n_r(), fc.n_t(), fc.field().p());
    println!("d_min {d}");
    Ok(())
}

fn cmd_transform(args: TransformArgs) -> Result<()> {
    let parsed = read_channel_file(&args.channel)?;
    let real = match parsed {
        ParsedChannel::Real { channel, .. } => channel,
        ParsedChannel::Finite(_) => {
            return Err(Error::Unsupported(
                "channel file is already finite; nothing to transform".into(),
            ))
        }
    };
    let ChannelTransform {
        coeffs,
        channel: fc,
        pmf_methods,
    } = transform(&real)?;

    let mut text = String::new();
    text.push_str(&format!(
        "# transformed real channel: snr {}, lattice step {}\n",
        real.snr,
        kappa_of(real.field, real.snr)?
    ));
    for m in 0..fc.n_r() {
        let coeff_row = coeffs
            .row(m)
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let method = match pmf_methods[m] {
            PmfMethod::Exact { inputs } => format!("exact over {inputs} inputs"),
            PmfMethod::MonteCarlo { samples } => format!("monte carlo, {samples} samples"),
        };
        text.push_str(&format!(
            "# antenna {m}: integer coefficients [{coeff_row}], noise law {method}\n"
        ));
    }
    text.push_str(&format_finite(&fc));
    args.output.emit_text(&text)
}

fn cmd_figure(args: FigureArgs) -> Result<()> {
    let ds = match (&args.id, &args.config) {
        (Some(id), None) => {
            let req = FigureRequest {
                id: FigureId::parse(id)?,
                trials: args.trials,
                seed: args.seed.unwrap_or(0),
            };
            run_figure(&req)?
        }
        (None, Some(path)) => {
            let cfg = read_custom_figure_config(path)?;
            let seed = args.seed.or(cfg.seed).unwrap_or(0);
            run_custom(&cfg, seed)?
        }
        _ => {
            return Err(Error::Unsupported(
                "pass exactly one of --id or --config".into(),
            ))
        }
    };
    args.output.emit_table(&ds)
}
