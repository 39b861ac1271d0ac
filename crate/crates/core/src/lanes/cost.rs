use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::OpCounts;
use crate::error::{Error, Result};

/// Instruction classes tracked by [`OpCounts`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpClass {
    LaneAdd,
    LaneSub,
    LaneMulProduct,
    LanePopcount,
    LaneCompare,
    LaneSaturating,
    LaneMaskedAdd,
    LaneLogic,
    CrossLane,
    ScalarAdd,
    Loads,
}

impl OpClass {
    pub const ALL: [OpClass; 11] = [
        OpClass::LaneAdd,
        OpClass::LaneSub,
        OpClass::LaneMulProduct,
        OpClass::LanePopcount,
        OpClass::LaneCompare,
        OpClass::LaneSaturating,
        OpClass::LaneMaskedAdd,
        OpClass::LaneLogic,
        OpClass::CrossLane,
        OpClass::ScalarAdd,
        OpClass::Loads,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpClass::LaneAdd => "lane_add",
            OpClass::LaneSub => "lane_sub",
            OpClass::LaneMulProduct => "lane_mul_product",
            OpClass::LanePopcount => "lane_popcount",
            OpClass::LaneCompare => "lane_compare",
            OpClass::LaneSaturating => "lane_saturating",
            OpClass::LaneMaskedAdd => "lane_masked_add",
            OpClass::LaneLogic => "lane_logic",
            OpClass::CrossLane => "cross_lane",
            OpClass::ScalarAdd => "scalar_add",
            OpClass::Loads => "loads",
        }
    }
}

impl fmt::Display for OpClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OpClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OpClass::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::UnknownClass(s.to_string()))
    }
}

pub const BUILTIN_PROFILES: [&str; 4] = ["tigerlake-x64", "tigerlake-avx512", "a64fx-a64", "a64fx-sve"];

/// Rows of the latency table, in clock cycles, with CPI where published.
struct Row {
    cache: Option<u32>,
    add: Option<u32>,
    logic: Option<u32>,
    compare: Option<u32>,
    popcount: Option<u32>,
    mul: Option<u32>,
    cross: Option<u32>,
    scalar_add: u32,
    cpi: Option<[f64; 7]>,
}

/// Per-class latency weights for one target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub profile: String,
    /// Cycles per instruction; a missing class is unpriced on this target.
    pub latency: BTreeMap<OpClass, u32>,
    /// Reciprocal throughput where known. Recorded only, never used for weighting.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub cpi: BTreeMap<OpClass, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    profile: String,
    latency: BTreeMap<String, i64>,
    #[serde(default)]
    cpi: BTreeMap<String, f64>,
}

impl CostModel {
    pub fn builtin(name: &str) -> Result<CostModel> {
        let row = match name {
            "tigerlake-x64" => Row {
                cache: Some(3),
                add: Some(1),
                logic: Some(1),
                compare: Some(1),
                popcount: Some(3),
                mul: Some(3),
                cross: None,
                scalar_add: 1,
                cpi: Some([0.5, 0.25, 0.25, 0.25, 1.0, 1.0, f64::NAN]),
            },
            "tigerlake-avx512" => Row {
                cache: Some(4),
                add: Some(1),
                logic: Some(1),
                compare: Some(3),
                popcount: Some(3),
                // lane products use the 52-bit multiplier
                mul: Some(4),
                cross: Some(3),
                scalar_add: 1,
                cpi: Some([0.5, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0]),
            },
            "a64fx-a64" => Row {
                cache: Some(5),
                add: Some(1),
                logic: Some(1),
                compare: Some(1),
                popcount: None,
                mul: Some(5),
                cross: None,
                scalar_add: 1,
                cpi: None,
            },
            "a64fx-sve" => Row {
                cache: Some(11),
                add: Some(4),
                logic: Some(4),
                compare: Some(4),
                popcount: Some(4),
                mul: Some(9),
                cross: Some(6),
                scalar_add: 1,
                cpi: None,
            },
            other => return Err(Error::UnknownProfile(other.to_string())),
        };
        Ok(CostModel::from_row(name, &row))
    }

    fn from_row(name: &str, row: &Row) -> CostModel {
        let mut latency = BTreeMap::new();
        let mut put = |class, v: Option<u32>| {
            if let Some(v) = v {
                latency.insert(class, v);
            }
        };
        for class in [OpClass::LaneAdd, OpClass::LaneSub, OpClass::LaneSaturating, OpClass::LaneMaskedAdd] {
            put(class, row.add);
        }
        put(OpClass::LaneLogic, row.logic);
        put(OpClass::LaneCompare, row.compare);
        put(OpClass::LanePopcount, row.popcount);
        put(OpClass::LaneMulProduct, row.mul);
        put(OpClass::CrossLane, row.cross);
        put(OpClass::Loads, row.cache);
        put(OpClass::ScalarAdd, Some(row.scalar_add));

        let mut cpi = BTreeMap::new();
        if let Some([cache, add, logic, compare, popcount, mul, cross]) = row.cpi {
            for class in [OpClass::LaneAdd, OpClass::LaneSub, OpClass::LaneSaturating, OpClass::LaneMaskedAdd] {
                cpi.insert(class, add);
            }
            cpi.insert(OpClass::Loads, cache);
            cpi.insert(OpClass::LaneLogic, logic);
            cpi.insert(OpClass::LaneCompare, compare);
            cpi.insert(OpClass::LanePopcount, popcount);
            cpi.insert(OpClass::LaneMulProduct, mul);
            if !cross.is_nan() {
                cpi.insert(OpClass::CrossLane, cross);
            }
        }
        CostModel { profile: name.to_string(), latency, cpi }
    }

    pub fn builtins() -> Vec<CostModel> {
        BUILTIN_PROFILES.iter().map(|p| CostModel::builtin(p).expect("builtin profile")).collect()
    }

    /// Parses a profile from TOML:
    ///
    /// ```toml
    /// profile = "my-core"
    /// [latency]
    /// lane_add = 1
    /// lane_mul_product = 5
    /// ```
    pub fn from_toml(text: &str) -> Result<CostModel> {
        let file: ProfileFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut latency = BTreeMap::new();
        for (key, value) in file.latency {
            let class: OpClass = key.parse()?;
            if value <= 0 || value > u32::MAX as i64 {
                return Err(Error::NonPositiveLatency { profile: file.profile, class: key });
            }
            latency.insert(class, value as u32);
        }
        let mut cpi = BTreeMap::new();
        for (key, value) in file.cpi {
            cpi.insert(key.parse()?, value);
        }
        Ok(CostModel { profile: file.profile, latency, cpi })
    }

    pub fn latency(&self, class: OpClass) -> Option<u32> {
        self.latency.get(&class).copied()
    }
}

/// Latency-weighted totals for one profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub profile: String,
    pub counts: OpCounts,
    pub weighted_cycles: u64,
    /// Classes with nonzero counts that the profile does not price.
    pub unpriced: Vec<OpClass>,
}

pub fn cost_report(counts: &OpCounts, model: &CostModel) -> CostReport {
    let mut weighted_cycles = 0;
    let mut unpriced = Vec::new();
    for class in OpClass::ALL {
        let n = counts.get(class);
        match model.latency(class) {
            Some(lat) => weighted_cycles += n * lat as u64,
            None if n > 0 => unpriced.push(class),
            None => {}
        }
    }
    CostReport { profile: model.profile.clone(), counts: *counts, weighted_cycles, unpriced }
}

/// Reports for every named profile, resolving built-in names.
pub fn cost_reports(counts: &OpCounts, profiles: &[&str]) -> Result<Vec<CostReport>> {
    profiles.iter().map(|p| Ok(cost_report(counts, &CostModel::builtin(p)?))).collect()
}
