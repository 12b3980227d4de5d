//! Flag definitions and `--config` merging.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use nlaqkd_core::SuccessModel;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "nlaqkd",
    version,
    about = "Four-state CVQKD key rates with and without a noiseless linear amplifier"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Key-rate breakdown at one operating point.
    #[command(args_override_self = true)]
    Keyrate(KeyrateArgs),
    /// Original and amplified key rates over a loss or distance grid.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Largest physical amplifier gain over a loss grid.
    #[command(args_override_self = true)]
    Gmax(GmaxArgs),
    /// Largest tolerable excess noise over a loss grid.
    #[command(args_override_self = true)]
    Frontier(FrontierArgs),
    /// Cross-check the closed forms against the truncated Fock-space oracle.
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::Keyrate(a) => &a.common,
            Command::Sweep(a) => &a.common,
            Command::Gmax(a) => &a.common,
            Command::Frontier(a) => &a.common,
            Command::Verify(a) => &a.common,
        }
    }
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML file of long-flag names to values; flags given on the command
    /// line take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// Modulation variance V_A = 2α² (default 0.25).
    #[arg(long, value_parser = non_negative, conflicts_with = "alpha2")]
    pub va: Option<f64>,
    /// Squared coherent-state amplitude α².
    #[arg(long, value_parser = non_negative)]
    pub alpha2: Option<f64>,
    /// Reconciliation efficiency.
    #[arg(long, default_value_t = 0.8, value_parser = efficiency)]
    pub beta: f64,
}

impl ProtocolArgs {
    pub fn alpha2(&self) -> f64 {
        match (self.va, self.alpha2) {
            (_, Some(a2)) => a2,
            (Some(va), None) => va / 2.0,
            (None, None) => 0.125,
        }
    }
}

#[derive(Debug, Args)]
pub struct LossArgs {
    /// Channel loss in dB.
    #[arg(long, value_parser = non_negative, conflicts_with = "distance_km")]
    pub loss_db: Option<f64>,
    /// Fiber length in km, converted with --atten.
    #[arg(long, value_parser = non_negative)]
    pub distance_km: Option<f64>,
    /// Fiber attenuation in dB/km.
    #[arg(long, default_value_t = 0.2, value_parser = positive)]
    pub atten: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PSuccess {
    InverseGainSquared,
    Fixed(f64),
}

impl PSuccess {
    pub fn model(self) -> SuccessModel {
        match self {
            PSuccess::InverseGainSquared => SuccessModel::InverseGainSquared,
            PSuccess::Fixed(p) => SuccessModel::Fixed(p),
        }
    }
}

#[derive(Debug, Args)]
pub struct NlaArgs {
    /// Amplifier gain g.
    #[arg(long, value_parser = gain)]
    pub gain: Option<f64>,
    /// Success probability: `inverse-g2` (1/g²) or a number in (0, 1].
    #[arg(long, default_value = "inverse-g2", value_parser = psuccess)]
    pub psuccess: PSuccess,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + self.step * i as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Loss,
    Distance,
}

#[derive(Debug, Args)]
pub struct KeyrateArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Excess noise in shot-noise units.
    #[arg(long, default_value_t = 0.002, value_parser = non_negative)]
    pub eps: f64,
    #[command(flatten)]
    pub loss: LossArgs,
    #[command(flatten)]
    pub nla: NlaArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Excess noise in shot-noise units.
    #[arg(long, default_value_t = 0.002, value_parser = non_negative)]
    pub eps: f64,
    /// Fiber attenuation in dB/km.
    #[arg(long, default_value_t = 0.2, value_parser = positive)]
    pub atten: f64,
    #[command(flatten)]
    pub nla: NlaArgs,
    /// Grid variable.
    #[arg(long, value_enum, default_value_t = Axis::Loss)]
    pub axis: Axis,
    /// `start:stop:step` in dB or km (default 0:80:0.5 dB, 0:400:2.5 km).
    #[arg(long, value_parser = grid)]
    pub grid: Option<Grid>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct GmaxArgs {
    /// Excess noise in shot-noise units.
    #[arg(long, default_value_t = 0.02, value_parser = non_negative)]
    pub eps: f64,
    /// Loss grid `start:stop:step` in dB.
    #[arg(long, default_value = "0:30:0.5", value_parser = grid)]
    pub grid: Grid,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[command(flatten)]
    pub nla: NlaArgs,
    /// Loss grid `start:stop:step` in dB.
    #[arg(long, default_value = "0:100:2", value_parser = grid)]
    pub grid: Grid,
    /// Bisection tolerance on the excess noise.
    #[arg(long, default_value_t = nlaqkd_core::solvers::DEFAULT_NOISE_TOL, value_parser = positive)]
    pub tol: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Excess noise of the channel used for the mixture check.
    #[arg(long, default_value_t = 0.004, value_parser = non_negative)]
    pub eps: f64,
    /// Channel loss in dB for the mixture check (default T = 0.5).
    #[arg(long, value_parser = non_negative)]
    pub loss_db: Option<f64>,
    /// Amplifier gain for the transformation checks.
    #[arg(long, default_value_t = 2.0, value_parser = gain)]
    pub gain: f64,
    /// Thermal parameter λ² of the test state.
    #[arg(long, default_value_t = 0.01, value_parser = thermal)]
    pub lambda2: f64,
    /// Real displacement of the test state.
    #[arg(long, default_value_t = 0.3, value_parser = non_negative)]
    pub displacement: f64,
    /// Photon-number cutoff N.
    #[arg(long, default_value_t = nlaqkd_core::fock::DEFAULT_CUTOFF, value_parser = clap::value_parser!(usize))]
    pub cutoff: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn number(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err("must be finite".into())
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    number(s).and_then(|x| if x >= 0.0 { Ok(x) } else { Err("must be >= 0".into()) })
}

fn positive(s: &str) -> Result<f64, String> {
    number(s).and_then(|x| if x > 0.0 { Ok(x) } else { Err("must be > 0".into()) })
}

fn efficiency(s: &str) -> Result<f64, String> {
    number(s).and_then(|x| {
        if x > 0.0 && x <= 1.0 {
            Ok(x)
        } else {
            Err("must be in (0, 1]".into())
        }
    })
}

fn thermal(s: &str) -> Result<f64, String> {
    number(s).and_then(|x| {
        if (0.0..1.0).contains(&x) {
            Ok(x)
        } else {
            Err("must be in [0, 1)".into())
        }
    })
}

fn gain(s: &str) -> Result<f64, String> {
    number(s).and_then(|x| if x >= 1.0 { Ok(x) } else { Err("must be >= 1".into()) })
}

fn psuccess(s: &str) -> Result<PSuccess, String> {
    if s == "inverse-g2" {
        return Ok(PSuccess::InverseGainSquared);
    }
    efficiency(s)
        .map(PSuccess::Fixed)
        .map_err(|e| format!("expected `inverse-g2` or a probability: {e}"))
}

fn grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err("expected start:stop:step".into());
    };
    let g = Grid {
        start: non_negative(start)?,
        stop: number(stop)?,
        step: positive(step)?,
    };
    if g.stop < g.start {
        return Err("stop is below start".into());
    }
    Ok(g)
}

/// Flags that cannot appear together; a config entry is dropped when its
/// partner was given on the command line.
const EXCLUSIVE: [(&str, &str); 2] = [("va", "alpha2"), ("loss-db", "distance-km")];

fn given(args: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    args.iter()
        .filter_map(|a| a.to_str())
        .any(|a| a == flag || a.starts_with(&format!("{flag}=")))
}

fn config_value(key: &str, v: &toml::Value) -> Result<String, CliError> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        _ => Err(CliError::Usage(format!(
            "config key `{key}` must be a string or a number"
        ))),
    }
}

/// Parses `args`, then re-parses with the `--config` entries inserted ahead
/// of the user's flags so the latter win.
pub fn parse(args: Vec<OsString>) -> Result<Cli, CliError> {
    let first = Cli::try_parse_from(&args)?;
    let Some(path) = first.command.common().config.clone() else {
        return Ok(first);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;

    let cmd = Cli::command();
    let sub_name = args
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find(|a| cmd.find_subcommand(a).is_some())
        .expect("subcommand parsed")
        .to_string();
    let longs = |name: &str| -> Vec<String> {
        cmd.find_subcommand(name)
            .map(|s| {
                s.get_arguments()
                    .filter_map(|a| a.get_long())
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default()
    };
    let own = longs(&sub_name);
    let any: Vec<String> = cmd.get_subcommands().flat_map(|s| longs(s.get_name())).collect();

    let user = &args[1..];
    let mut merged: Vec<OsString> = vec![args[0].clone(), sub_name.clone().into()];
    for (key, value) in &table {
        if key == "config" {
            return Err(CliError::Usage("config files cannot include other config files".into()));
        }
        if !own.contains(key) {
            if any.contains(key) {
                continue;
            }
            return Err(CliError::Usage(format!("unknown config key `{key}`")));
        }
        let partner = EXCLUSIVE.iter().find_map(|&(a, b)| {
            if key == a {
                Some(b)
            } else if key == b {
                Some(a)
            } else {
                None
            }
        });
        if given(user, key) || partner.is_some_and(|p| given(user, p)) {
            continue;
        }
        merged.push(format!("--{key}={}", config_value(key, value)?).into());
    }
    let pos = user
        .iter()
        .position(|a| a.to_str() == Some(sub_name.as_str()))
        .expect("subcommand present");
    merged.extend(user[..pos].iter().cloned());
    merged.extend(user[pos + 1..].iter().cloned());
    Ok(Cli::try_parse_from(merged)?)
}
