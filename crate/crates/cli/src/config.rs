//! Run configuration: TOML file values overridden by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use serde::Deserialize;
use simd_redc::field::Backend;
use simd_redc::lanes::{CostModel, BUILTIN_PROFILES};
use simd_redc::limbs::radix_convert;
use simd_redc::presets::{builtin_presets, parse_presets, PrimePreset};
use simd_redc::simd_add::AddStrategy;
use simd_redc::{BigInt, RadixConfig};

use crate::CliError;

pub const DEFAULT_PRIME: &str = "p503";
pub const DEFAULT_TRIALS: usize = 256;
pub const DEFAULT_SEED: u64 = 1;

/// Flags shared by every subcommand. Each one may also be set in `--config`.
#[derive(Args, Clone, Debug, Default)]
pub struct RunArgs {
    /// TOML file with `key = value` lines mirroring these flags
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// TOML file with extra `[[prime]]` presets
    #[arg(long, global = true, value_name = "PATH")]
    pub presets: Option<PathBuf>,
    /// Preset name or hexadecimal modulus
    #[arg(long, global = true, value_name = "NAME|HEX")]
    pub prime: Option<String>,
    /// Limb width in bits
    #[arg(long, global = true)]
    pub omega: Option<u32>,
    /// Limb count
    #[arg(long, global = true)]
    pub limbs: Option<usize>,
    /// native-popcount, reduced-popcount:<k>, reduced-saturate:<k> or carry-propagate
    #[arg(long, global = true, value_name = "STRATEGY")]
    pub add_strategy: Option<String>,
    /// generic-reference, generic-proposed, friendly-reference or friendly-proposed
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// Random trials per suite
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Seed for all random operands
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cost profile name, `all`, or a TOML profile file
    #[arg(long, global = true)]
    pub profile: Option<String>,
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    pub json: bool,
}

/// The file form of [`RunArgs`].
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub presets: Option<PathBuf>,
    pub prime: Option<String>,
    pub omega: Option<u32>,
    pub limbs: Option<usize>,
    pub add_strategy: Option<String>,
    pub backend: Option<String>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub profile: Option<String>,
    pub json: Option<bool>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Flags win over file values.
    fn merge(self, args: &RunArgs) -> RunConfig {
        RunConfig {
            presets: args.presets.clone().or(self.presets),
            prime: args.prime.clone().or(self.prime),
            omega: args.omega.or(self.omega),
            limbs: args.limbs.or(self.limbs),
            add_strategy: args.add_strategy.clone().or(self.add_strategy),
            backend: args.backend.clone().or(self.backend),
            trials: args.trials.or(self.trials),
            seed: args.seed.or(self.seed),
            profile: args.profile.clone().or(self.profile),
            json: Some(args.json || self.json.unwrap_or(false)),
        }
    }
}

/// How additions are carried out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AddChoice {
    CarryPropagate,
    Simd(AddStrategy),
}

impl fmt::Display for AddChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AddChoice::CarryPropagate => f.write_str("carry-propagate"),
            AddChoice::Simd(s) => write!(f, "{s}"),
        }
    }
}

/// A fully validated configuration.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub prime_label: String,
    pub p: BigInt,
    pub cfg: RadixConfig,
    pub add: AddChoice,
    pub backend: Backend,
    pub trials: usize,
    pub seed: u64,
    pub profiles: Vec<CostModel>,
    pub json: bool,
}

impl Resolved {
    /// The SIMD strategy for internal sums, falling back to the radix default.
    pub fn strategy(&self) -> AddStrategy {
        match self.add {
            AddChoice::Simd(s) => s,
            AddChoice::CarryPropagate => AddStrategy::default_for(self.cfg.omega()),
        }
    }
}

fn config_err(e: impl fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

pub fn resolve(args: &RunArgs) -> Result<Resolved, CliError> {
    let file = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    resolve_config(file.merge(args))
}

pub fn resolve_config(c: RunConfig) -> Result<Resolved, CliError> {
    let mut presets = builtin_presets();
    if let Some(path) = &c.presets {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        presets.extend(parse_presets(&text).map_err(config_err)?);
    }
    let prime = c.prime.unwrap_or_else(|| DEFAULT_PRIME.to_string());
    let (p, cfg) = resolve_prime(&prime, &presets, c.omega, c.limbs)?;

    let add = match c.add_strategy.as_deref() {
        None => AddChoice::Simd(AddStrategy::default_for(cfg.omega())),
        Some("carry-propagate") => AddChoice::CarryPropagate,
        Some(s) => {
            let s = AddStrategy::from_str(s).map_err(config_err)?;
            s.validate(cfg.omega()).map_err(config_err)?;
            AddChoice::Simd(s)
        }
    };
    let backend = match c.backend.as_deref() {
        None => Backend::GenericProposed,
        Some(b) => b.parse().map_err(config_err)?,
    };
    let profiles = match c.profile.as_deref() {
        None | Some("all") => BUILTIN_PROFILES.iter().map(|n| CostModel::builtin(n).unwrap()).collect(),
        Some(name) if name.ends_with(".toml") => {
            let text = std::fs::read_to_string(name).map_err(|e| config_err(format!("{name}: {e}")))?;
            vec![CostModel::from_toml(&text).map_err(config_err)?]
        }
        Some(name) => vec![CostModel::builtin(name).map_err(config_err)?],
    };
    Ok(Resolved {
        prime_label: prime,
        p,
        cfg,
        add,
        backend,
        trials: c.trials.unwrap_or(DEFAULT_TRIALS),
        seed: c.seed.unwrap_or(DEFAULT_SEED),
        profiles,
        json: c.json.unwrap_or(false),
    })
}

fn resolve_prime(
    prime: &str,
    presets: &[PrimePreset],
    omega: Option<u32>,
    limbs: Option<usize>,
) -> Result<(BigInt, RadixConfig), CliError> {
    let (value, preset_cfg) = if prime.starts_with("0x") || prime.starts_with("0X") {
        let omega = omega.unwrap_or(64);
        let probe = RadixConfig::new(omega, 1).map_err(config_err)?;
        (BigInt::from_hex(prime, probe).map_err(config_err)?.trimmed(), None)
    } else {
        let preset = presets
            .iter()
            .rev()
            .find(|p| p.name == prime)
            .ok_or_else(|| config_err(format!("unknown prime preset {prime:?}")))?;
        let cfg = preset.cfg().map_err(config_err)?;
        (preset.modulus().map_err(config_err)?, Some(cfg))
    };
    let omega = omega.or(preset_cfg.map(|c| c.omega())).unwrap_or(64);
    let probe = RadixConfig::new(omega, 1).map_err(config_err)?;
    let value = radix_convert(&value, probe).trimmed();
    let fit = value.bit_len().div_ceil(omega as usize).max(1);
    let n = match (limbs, preset_cfg) {
        (Some(n), _) => n,
        (None, Some(c)) if c.omega() == omega => c.limbs(),
        _ => fit,
    };
    let cfg = RadixConfig::new(omega, n).map_err(config_err)?;
    let p =
        value.in_config(cfg).map_err(|_| config_err(format!("modulus needs {fit} limbs of {omega} bits, got {n}")))?;
    if !p.is_odd() {
        return Err(config_err("modulus must be odd"));
    }
    Ok((p, cfg))
}
