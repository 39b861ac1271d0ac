//! Named prime configurations, loadable from TOML.
//!
//! ```toml
//! [[prime]]
//! name = "p503"
//! ell = 250
//! f = "3^159"
//! omega = 64
//! limbs = 8
//!
//! [[prime]]
//! name = "toy"
//! p = "0xf2ff"
//! omega = 4
//! limbs = 4
//! ```
//!
//! `f` is either hex or a power `base^exp`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limbs::{BigInt, RadixConfig};
use crate::mont_generic::PrimeContext;
use crate::mont_special::FriendlyContext;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimePreset {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    pub omega: u32,
    pub limbs: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetFile {
    #[serde(default)]
    prime: Vec<PrimePreset>,
}

const BUILTIN: &str = r#"
[[prime]]
name = "p62207"
p = "0xf2ff"
omega = 4
limbs = 4

[[prime]]
name = "p434"
ell = 216
f = "3^137"
omega = 64
limbs = 7

[[prime]]
name = "p503"
ell = 250
f = "3^159"
omega = 64
limbs = 8

[[prime]]
name = "p610"
ell = 305
f = "3^192"
omega = 64
limbs = 10

[[prime]]
name = "p751"
ell = 372
f = "3^239"
omega = 64
limbs = 12
"#;

impl PrimePreset {
    pub fn cfg(&self) -> Result<RadixConfig> {
        RadixConfig::new(self.omega, self.limbs)
    }

    /// The modulus, from `p` or from `2^ell F - 1`.
    pub fn modulus(&self) -> Result<BigInt> {
        let cfg = self.cfg()?;
        match (&self.p, self.ell, &self.f) {
            (Some(p), None, None) => BigInt::from_hex(p, cfg)?.in_config(cfg),
            (None, Some(ell), Some(f)) => {
                let f = parse_factor(f, cfg)?;
                (&f.shl_bits(ell) - &BigInt::one(cfg)).in_config(cfg)
            }
            _ => Err(Error::Config(format!("preset {:?} needs either p or both ell and f", self.name))),
        }
    }

    pub fn prime_context(&self) -> Result<PrimeContext> {
        PrimeContext::new(&self.modulus()?, self.cfg()?)
    }

    pub fn friendly_context(&self) -> Result<FriendlyContext> {
        FriendlyContext::new(&self.modulus()?, self.cfg()?)
    }
}

fn parse_factor(text: &str, cfg: RadixConfig) -> Result<BigInt> {
    let Some((base, exp)) = text.split_once('^') else {
        return BigInt::from_hex(text, cfg);
    };
    let bad = || Error::Config(format!("malformed power {text:?}"));
    let base: u64 = base.trim().parse().map_err(|_| bad())?;
    let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
    let b = BigInt::from_u64(base, cfg);
    let mut acc = BigInt::one(cfg);
    for _ in 0..exp {
        acc = &acc * &b;
    }
    Ok(acc.trimmed())
}

pub fn parse_presets(text: &str) -> Result<Vec<PrimePreset>> {
    let file: PresetFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    for preset in &file.prime {
        preset.modulus()?;
    }
    Ok(file.prime)
}

pub fn builtin_presets() -> Vec<PrimePreset> {
    parse_presets(BUILTIN).expect("built-in presets parse")
}

pub fn find_preset(name: &str) -> Result<PrimePreset> {
    builtin_presets().into_iter().find(|p| p.name == name).ok_or_else(|| Error::UnknownPreset(name.to_string()))
}
