//! `pmulab` command-line front end.
//!
//! Angles are degrees at this boundary and radians everywhere else.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{self, AnalysisReport, OscillationEstimate, DEFAULT_GAIN_FLOOR};
use crate::error::{Error, Result};
use crate::estimator::{estimate_phasors, PhasorStream, ReportingSpec, TimestampConvention, WindowSpec};
use crate::format::{sidecar_path, write_output, Metadata};
use crate::reproduce::{reproduce_table1, Table1Config};
use crate::response::{frequency_grid, response_csv, response_curve, Channel};
use crate::signal::{synthesize, ModulationKind, ModulationSpec, Waveform, WaveformSpec};

#[derive(Debug, Parser)]
#[command(name = "pmulab", version, about = "Windowed-DFT phasor estimation lab")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a sampled (modulated) waveform as CSV.
    Synth(SynthArgs),
    /// Run the windowed-DFT phasor estimator and write a phasor CSV plus `.meta` sidecar.
    Estimate(EstimateArgs),
    /// Tabulate the window's complex gain over a frequency grid.
    Response(ResponseArgs),
    /// Fit the oscillation in a phasor stream and recover its true amplitude and phase.
    Analyze(AnalyzeArgs),
    /// Invert the window gain for a single measured oscillation.
    Recover(RecoverArgs),
    /// Reproduce published results.
    Reproduce {
        #[command(subcommand)]
        target: ReproduceTarget,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReproduceTarget {
    /// The 20 Hz amplitude/phase comparison table.
    Table1(Table1Args),
}

#[derive(Debug, Clone, Args)]
pub struct WaveArgs {
    /// RMS magnitude (p.u.).
    #[arg(long, default_value_t = 1.0)]
    pub vrms: f64,
    /// Carrier frequency (Hz).
    #[arg(long, default_value_t = 60.0)]
    pub f0: f64,
    /// Sampling rate (Hz).
    #[arg(long, default_value_t = 960.0)]
    pub fs: f64,
    /// Initial carrier phase (deg).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi0: f64,
    /// Record length (s).
    #[arg(long, default_value_t = 4.0)]
    pub duration: f64,
}

impl WaveArgs {
    pub fn spec(&self) -> Result<WaveformSpec> {
        let spec = WaveformSpec {
            v_rms: self.vrms,
            f0: self.f0,
            fs: self.fs,
            phi0: self.phi0.to_radians(),
            duration: 0,
        }
        .with_duration_secs(self.duration);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    None,
    Magnitude,
    Phase,
}

impl From<KindArg> for ModulationKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::None => ModulationKind::None,
            KindArg::Magnitude => ModulationKind::Magnitude,
            KindArg::Phase => ModulationKind::Phase,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModArgs {
    /// Modulation kind.
    #[arg(long, value_enum, default_value_t = KindArg::None)]
    pub kind: KindArg,
    /// Modulation index: alpha (dimensionless) or beta (rad).
    #[arg(long, visible_aliases = ["alpha", "beta"], default_value_t = 0.0)]
    pub index: f64,
    /// Oscillation frequency (Hz).
    #[arg(long)]
    pub fm: Option<f64>,
    /// Initial oscillation phase (deg).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phim: f64,
}

impl ModArgs {
    pub fn spec(&self) -> Result<ModulationSpec> {
        let kind = ModulationKind::from(self.kind);
        let spec = match kind {
            ModulationKind::None => ModulationSpec::none(),
            _ => {
                let fm = self.fm.ok_or(Error::InvalidParameter {
                    name: "fm",
                    reason: "required for a modulated waveform".into(),
                })?;
                ModulationSpec {
                    kind,
                    index: self.index,
                    fm,
                    phim: self.phim.to_radians(),
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TimestampArg {
    Left,
    Center,
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    /// Window length in carrier cycles.
    #[arg(long, default_value_t = 1)]
    pub h: usize,
    /// Frame time tag.
    #[arg(long, value_enum, default_value_t = TimestampArg::Left)]
    pub timestamp: TimestampArg,
}

impl WindowArgs {
    pub fn spec(&self, n_per_cycle: usize) -> Result<WindowSpec> {
        let ts = match self.timestamp {
            TimestampArg::Left => TimestampConvention::LeftEdge,
            TimestampArg::Center => TimestampConvention::Center,
        };
        Ok(WindowSpec::new(self.h, n_per_cycle)?.with_timestamp(ts))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Reporting rate (frames/s).
    #[arg(long, default_value_t = 60.0)]
    pub fps: f64,
    /// Low-pass the demodulated signal before decimation.
    #[arg(long)]
    pub antialias: bool,
    /// Sample offset of the first reported frame.
    #[arg(long, default_value_t = 0)]
    pub decimation_phase: usize,
}

impl ReportArgs {
    pub fn spec(&self, fs: f64) -> Result<ReportingSpec> {
        let r = ReportingSpec::new(self.fps, fs)?.with_decimation_phase(self.decimation_phase)?;
        if self.antialias {
            r.with_antialias()
        } else {
            Ok(r)
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    #[command(flatten)]
    pub modulation: ModArgs,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    /// Waveform CSV to read instead of synthesizing one.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub wave: WaveArgs,
    #[command(flatten)]
    pub modulation: ModArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub report: ReportArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ResponseArgs {
    /// Window lengths in cycles.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4, 8])]
    pub h: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub fm_min: f64,
    #[arg(long, default_value_t = 30.0)]
    pub fm_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub fm_step: f64,
    #[arg(long, default_value_t = 960.0)]
    pub fs: f64,
    #[arg(long, default_value_t = 60.0)]
    pub f0: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Auto,
    Magnitude,
    Angle,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Phasor CSV (with `.meta` sidecar) to analyze instead of running the pipeline.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub wave: WaveArgs,
    #[command(flatten)]
    pub modulation: ModArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub report: ReportArgs,
    #[arg(long, value_enum, default_value_t = ChannelArg::Auto)]
    pub channel: ChannelArg,
    /// Estimate fm from the spectrum even when it is known.
    #[arg(long)]
    pub estimate_fm: bool,
    #[arg(long, default_value_t = DEFAULT_GAIN_FLOOR)]
    pub gain_floor: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RecoverArgs {
    #[arg(long, value_enum)]
    pub channel: ChannelArg,
    /// Oscillation frequency (Hz).
    #[arg(long)]
    pub fm: f64,
    /// Measured amplitude: RMS p.u. (magnitude) or deg (angle).
    #[arg(long)]
    pub a_meas: f64,
    /// Measured phase (deg).
    #[arg(long, allow_negative_numbers = true)]
    pub phi_meas: f64,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, default_value_t = 960.0)]
    pub fs: f64,
    #[arg(long, default_value_t = 60.0)]
    pub f0: f64,
    #[arg(long, default_value_t = DEFAULT_GAIN_FLOOR)]
    pub gain_floor: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Table1Args {
    /// Initial carrier phase (deg).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi0: f64,
    /// Initial oscillation phase (deg).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phim: f64,
    #[arg(long, default_value_t = 0)]
    pub decimation_phase: usize,
    /// Record length (s).
    #[arg(long, default_value_t = 4.0)]
    pub duration: f64,
    /// Machine-readable CSV destination (a `.meta` sidecar is written next to it).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Validated parameters shared by the pipeline commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub waveform: WaveformSpec,
    pub modulation: ModulationSpec,
    pub window: WindowSpec,
    pub reporting: ReportingSpec,
}

impl RunConfig {
    pub fn from_args(wave: &WaveArgs, modulation: &ModArgs, window: &WindowArgs, report: &ReportArgs) -> Result<Self> {
        let waveform = wave.spec()?;
        let n = waveform.samples_per_cycle()?;
        Ok(Self {
            waveform,
            modulation: modulation.spec()?,
            window: window.spec(n)?,
            reporting: report.spec(waveform.fs)?,
        })
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let x = synthesize(&args.wave.spec()?, &args.modulation.spec()?)?;
    write_output(args.out.as_deref(), &x.to_csv())
}

fn write_stream(stream: &PhasorStream, out: Option<&Path>) -> Result<()> {
    write_output(out, &stream.to_csv())?;
    if let Some(p) = out {
        write_output(Some(&sidecar_path(p)), &stream.metadata.render())?;
    }
    Ok(())
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<()> {
    let stream = run_estimate(args)?;
    write_stream(&stream, args.out.as_deref())
}

fn run_estimate(args: &EstimateArgs) -> Result<PhasorStream> {
    let waveform = args.wave.spec()?;
    let n = waveform.samples_per_cycle()?;
    let window = args.window.spec(n)?;
    let reporting = args.report.spec(waveform.fs)?;
    let x = match &args.input {
        Some(path) => {
            let mut x = Waveform::from_csv(&read(path)?, waveform.fs, waveform.f0)?;
            x.metadata.set("waveform.source", path.display());
            x
        }
        None => synthesize(&waveform, &args.modulation.spec()?)?,
    };
    estimate_phasors(&x, &window, &reporting)
}

pub fn cmd_response(args: &ResponseArgs) -> Result<()> {
    let w = WaveformSpec {
        f0: args.f0,
        fs: args.fs,
        ..WaveformSpec::default()
    };
    w.validate()?;
    let grid = frequency_grid(args.fm_min, args.fm_max, args.fm_step)?;
    let rows = response_curve(&args.h, args.fs, w.samples_per_cycle()?, &grid)?;
    write_output(args.out.as_deref(), &response_csv(&rows))
}

fn resolve_channel(arg: ChannelArg, kind: Option<ModulationKind>) -> Channel {
    match arg {
        ChannelArg::Magnitude => Channel::Magnitude,
        ChannelArg::Angle => Channel::Angle,
        ChannelArg::Auto => kind.and_then(Channel::for_kind).unwrap_or(Channel::Magnitude),
    }
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let report = run_analyze(args)?;
    write_output(args.out.as_deref(), &analysis::report_csv(&[report]))
}

fn run_analyze(args: &AnalyzeArgs) -> Result<AnalysisReport> {
    let (stream, kind, known_fm) = match &args.input {
        Some(path) => {
            let meta_path = sidecar_path(path);
            let meta = Metadata::parse(&read(&meta_path)?)?;
            let stream = PhasorStream::from_csv(&read(path)?, meta)?;
            let kind = stream.metadata.get("modulation.kind").and_then(|k| k.parse().ok());
            (stream, kind, args.modulation.fm)
        }
        None => {
            let cfg = RunConfig::from_args(&args.wave, &args.modulation, &args.window, &args.report)?;
            let x = synthesize(&cfg.waveform, &cfg.modulation)?;
            let stream = estimate_phasors(&x, &cfg.window, &cfg.reporting)?;
            (stream, Some(cfg.modulation.kind), args.modulation.fm)
        }
    };
    let channel = resolve_channel(args.channel, kind);
    let fm = if args.estimate_fm { None } else { known_fm };
    analysis::analyze(&stream, channel, fm, args.gain_floor)
}

/// Returns the report row; fails with the recovery error when the gain cannot be inverted.
pub fn cmd_recover(args: &RecoverArgs) -> Result<()> {
    let w = WaveformSpec {
        f0: args.f0,
        fs: args.fs,
        ..WaveformSpec::default()
    };
    w.validate()?;
    let window = args.window.spec(w.samples_per_cycle()?)?;
    let channel = resolve_channel(args.channel, None);
    let amplitude = match channel {
        Channel::Magnitude => args.a_meas,
        Channel::Angle => args.a_meas.to_radians(),
    };
    let estimate = OscillationEstimate {
        channel,
        fm: args.fm,
        amplitude,
        phase: crate::response::wrap_pi(args.phi_meas.to_radians()),
        dc_offset: 0.0,
        residual_rms: 0.0,
        frames_used: 0,
    };
    let recovered = analysis::recover_with_floor(&estimate, &window, args.fs, args.gain_floor);
    let report = AnalysisReport {
        estimate,
        gain: analysis::effective_gain(args.fm, &window, args.fs),
        recovered: recovered.clone(),
    };
    write_output(args.out.as_deref(), &analysis::report_csv(&[report]))?;
    recovered.map(|_| ())
}

/// Prints the comparison table; `Ok(false)` when any cell misses its tolerance.
pub fn cmd_reproduce_table1(args: &Table1Args) -> Result<bool> {
    let config = Table1Config {
        phi0: args.phi0.to_radians(),
        phim: args.phim.to_radians(),
        decimation_phase: args.decimation_phase,
        duration: WaveformSpec::default().with_duration_secs(args.duration).duration,
    };
    let report = reproduce_table1(&config)?;
    print!("{}", report.render());
    if let Some(path) = &args.out {
        write_output(Some(path), &report.to_csv())?;
        write_output(Some(&sidecar_path(path)), &config.metadata().render())?;
    }
    Ok(report.all_pass())
}

/// Runs one command; errors are reported on stderr.
pub fn run(cli: Cli) -> ExitCode {
    let outcome = match &cli.command {
        Command::Synth(a) => cmd_synth(a).map(|_| true),
        Command::Estimate(a) => cmd_estimate(a).map(|_| true),
        Command::Response(a) => cmd_response(a).map(|_| true),
        Command::Analyze(a) => cmd_analyze(a).map(|_| true),
        Command::Recover(a) => cmd_recover(a).map(|_| true),
        Command::Reproduce {
            target: ReproduceTarget::Table1(a),
        } => cmd_reproduce_table1(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

pub fn main_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

pub fn main() -> ExitCode {
    main_from(std::env::args_os())
}
