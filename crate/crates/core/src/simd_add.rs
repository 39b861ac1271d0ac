//! Addition by carry simulation.
//!
//! The limbwise sums are computed lane-parallel. Each lane is then mapped to
//! a byte pair `(t_i, p_i)` whose 8-bit sum generates, propagates or kills a
//! carry exactly like the limb sum does. One short byte-string addition then
//! resolves every carry at once.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lanes::{LaneMachine, LaneVector, OpCounts};
use crate::limbs::{limb_mask, BigInt};

/// How the `(t_i, p_i)` bytes are derived from the lane sums.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AddStrategy {
    /// Limbs fill the lane; overflow is detected by `D_i < A_i`.
    #[default]
    NativePopcount,
    /// `k`-bit limbs in 64-bit lanes; overflow is detected by `D_i >= 2^k`.
    ReducedPopcount(u32),
    /// `k`-bit limbs in 64-bit lanes; the case is read off a saturating add.
    ReducedSaturate(u32),
}

impl AddStrategy {
    /// Checks that the strategy applies to `omega`-bit limbs.
    pub fn validate(self, omega: u32) -> Result<()> {
        let ok = match self {
            AddStrategy::NativePopcount => (1..=64).contains(&omega),
            AddStrategy::ReducedPopcount(k) | AddStrategy::ReducedSaturate(k) => (1..=63).contains(&k) && k == omega,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::StrategyMismatch { strategy: self.to_string(), omega })
        }
    }

    /// The strategy normally used for `omega`-bit limbs.
    pub fn default_for(omega: u32) -> AddStrategy {
        if omega == 64 {
            AddStrategy::NativePopcount
        } else {
            AddStrategy::ReducedPopcount(omega)
        }
    }

    /// The constant byte `p_i`.
    pub fn p_byte(self, omega: u32) -> u8 {
        match self {
            AddStrategy::NativePopcount => (255 - omega) as u8,
            AddStrategy::ReducedPopcount(k) => (255 - k) as u8,
            AddStrategy::ReducedSaturate(_) => 254,
        }
    }

    fn lane_bits(self, omega: u32) -> u32 {
        match self {
            AddStrategy::NativePopcount => omega,
            _ => 64,
        }
    }
}

impl fmt::Display for AddStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AddStrategy::NativePopcount => write!(f, "native-popcount"),
            AddStrategy::ReducedPopcount(k) => write!(f, "reduced-popcount:{k}"),
            AddStrategy::ReducedSaturate(k) => write!(f, "reduced-saturate:{k}"),
        }
    }
}

impl FromStr for AddStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownStrategy(s.to_string());
        if s == "native-popcount" {
            return Ok(AddStrategy::NativePopcount);
        }
        let (name, k) = s.split_once(':').ok_or_else(unknown)?;
        let k: u32 = k.parse().map_err(|_| unknown())?;
        if !(1..=63).contains(&k) {
            return Err(unknown());
        }
        match name {
            "reduced-popcount" => Ok(AddStrategy::ReducedPopcount(k)),
            "reduced-saturate" => Ok(AddStrategy::ReducedSaturate(k)),
            _ => Err(unknown()),
        }
    }
}

impl TryFrom<String> for AddStrategy {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AddStrategy> for String {
    fn from(s: AddStrategy) -> String {
        s.to_string()
    }
}

/// What a limb sum does to the incoming carry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// No carry out regardless of the carry in.
    N,
    /// Carry out equals carry in.
    P,
    /// Carry out regardless of the carry in.
    G,
}

impl Case {
    /// The case of a byte sum `t + p`.
    pub fn of_bytes(t: u8, p: u8) -> Case {
        match t as u16 + p as u16 {
            0..=254 => Case::N,
            255 => Case::P,
            _ => Case::G,
        }
    }
}

/// Intermediate values of one carry-simulated addition. Vectors are indexed
/// least-significant limb first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AddTrace {
    pub strategy: AddStrategy,
    /// Lane sums before carry injection.
    pub d: Vec<u64>,
    /// Popcount or saturation intermediates.
    pub g: Vec<u64>,
    /// Overflow masks (empty for the saturating strategy).
    pub m: Vec<u8>,
    pub t: Vec<u8>,
    pub p: Vec<u8>,
    pub s: Vec<u8>,
    /// Carries `c_0..c_n`; the last entry is the carry out.
    pub c: Vec<u8>,
    pub cases: Vec<Case>,
    pub counts: OpCounts,
}

impl AddTrace {
    pub fn carry_out(&self) -> u8 {
        *self.c.last().expect("carry vector is never empty")
    }
}

/// Result of a carry-simulated subtraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubResult {
    pub diff: BigInt,
    pub borrow_out: u8,
    pub trace: AddTrace,
}

/// Per-limb case of `a + b`, computed directly from the scalar sums.
pub fn classify_cases(a: &BigInt, b: &BigInt) -> Result<Vec<Case>> {
    if a.omega() != b.omega() {
        return Err(Error::RadixMismatch { left: a.omega(), right: b.omega() });
    }
    let max = limb_mask(a.omega()) as u128;
    let n = width(a, b);
    Ok((0..n)
        .map(|i| {
            let s = a.limb(i) as u128 + b.limb(i) as u128;
            if s > max {
                Case::G
            } else if s == max {
                Case::P
            } else {
                Case::N
            }
        })
        .collect())
}

fn width(a: &BigInt, b: &BigInt) -> usize {
    a.len().max(b.len()).max(a.cfg().limbs())
}

pub(crate) struct TpBytes {
    pub g: Vec<u64>,
    pub m: Vec<u8>,
    pub t: Vec<u8>,
    pub p: Vec<u8>,
}

pub(crate) fn derive_tp_in(
    mach: &mut LaneMachine,
    d: &LaneVector,
    a: &LaneVector,
    strategy: AddStrategy,
    omega: u32,
) -> Result<TpBytes> {
    strategy.validate(omega)?;
    let n = d.count();
    let p_vec = mach.load(vec![strategy.p_byte(omega) as u64; n], 8)?;
    let (g, m, t) = match strategy {
        AddStrategy::NativePopcount => {
            let g = mach.popcount(d);
            let m = mach.lt(d, a)?;
            // tiny limbs cannot hold popcount + omega + 1
            let g_wide = if 2 * omega as u64 + 1 > limb_mask(omega) { mach.convert(&g, 8)? } else { g.clone() };
            let t = mach.masked_add(&g_wide, omega as u64 + 1, &m)?;
            (g, Some(m), t)
        }
        AddStrategy::ReducedPopcount(k) => {
            let g = mach.popcount(d);
            let bound = mach.load(vec![limb_mask(k); n], 64)?;
            let m = mach.lt(&bound, d)?;
            let t = mach.masked_add(&g, 65, &m)?;
            (g, Some(m), t)
        }
        AddStrategy::ReducedSaturate(k) => {
            let c1 = mach.load(vec![u64::MAX - (1u64 << k); n], 64)?;
            let g = mach.saturating_add(d, &c1)?;
            let c2 = mach.load(vec![u64::MAX - 2; n], 64)?;
            let t = mach.saturating_sub(&g, &c2)?;
            (g, None, t)
        }
    };
    let t = mach.byte_gather(&t)?;
    Ok(TpBytes {
        g: g.lanes().to_vec(),
        m: m.map(|m| m.lanes().iter().map(|&x| x as u8).collect()).unwrap_or_default(),
        t: t.lanes().iter().map(|&x| x as u8).collect(),
        p: p_vec.lanes().iter().map(|&x| x as u8).collect(),
    })
}

/// Derives the `(t_i, p_i)` bytes for the lane sums `d = a + b`.
pub fn derive_tp(d: &LaneVector, a: &BigInt, strategy: AddStrategy) -> Result<(Vec<u8>, Vec<u8>)> {
    let omega = a.omega();
    let a_lanes = LaneVector::from_bigint(a, d.count(), strategy.lane_bits(omega))?;
    let mut mach = LaneMachine::new();
    let tp = derive_tp_in(&mut mach, d, &a_lanes, strategy, omega)?;
    Ok((tp.t, tp.p))
}

/// Byte-string addition `s = t + p` over all bytes, in 8-byte words with a
/// carry between words. Returns carries `c_0..c_n` and the byte sums.
pub fn simulate_carries(t: &[u8], p: &[u8]) -> Result<(Vec<u8>, Vec<u8>)> {
    let mut mach = LaneMachine::new();
    simulate_carries_in(&mut mach, t, p)
}

pub(crate) fn simulate_carries_in(mach: &mut LaneMachine, t: &[u8], p: &[u8]) -> Result<(Vec<u8>, Vec<u8>)> {
    if t.len() != p.len() {
        return Err(Error::ShapeMismatch { left_lanes: t.len(), left_bits: 8, right_lanes: p.len(), right_bits: 8 });
    }
    let n = t.len();
    let mut s = Vec::with_capacity(n);
    let mut carry = 0u128;
    for (tc, pc) in t.chunks(8).zip(p.chunks(8)) {
        let bits = 8 * tc.len() as u32;
        let word = |bytes: &[u8]| bytes.iter().rev().fold(0u128, |acc, &b| (acc << 8) | b as u128);
        let sum = word(tc) + word(pc) + carry;
        s.extend((0..tc.len()).map(|j| (sum >> (8 * j)) as u8));
        carry = sum >> bits;
        mach.record_scalar_adds(1);
    }
    if n == 0 {
        return Ok((vec![0], s));
    }

    let tv = LaneVector::new(t.iter().map(|&x| x as u64).collect(), 8)?;
    let pv = LaneVector::new(p.iter().map(|&x| x as u64).collect(), 8)?;
    let sv = LaneVector::new(s.iter().map(|&x| x as u64).collect(), 8)?;
    let st = mach.sub(&sv, &tv)?;
    let c = mach.sub(&st, &pv)?;
    let mut carries = Vec::with_capacity(n + 1);
    for (lane, &ci) in c.lanes().iter().enumerate() {
        if ci > 1 {
            return Err(Error::CarryContract { lane, value: ci as u8 });
        }
        carries.push(ci as u8);
    }
    carries.push(carry as u8);
    Ok((carries, s))
}

/// `(a + b) mod 2^{ωn}` by carry simulation.
pub fn simd_add(a: &BigInt, b: &BigInt, strategy: AddStrategy) -> Result<(BigInt, AddTrace)> {
    let mut mach = LaneMachine::new();
    simd_add_in(&mut mach, a, b, strategy)
}

pub(crate) fn simd_add_in(
    mach: &mut LaneMachine,
    a: &BigInt,
    b: &BigInt,
    strategy: AddStrategy,
) -> Result<(BigInt, AddTrace)> {
    add_core(mach, a, b, strategy, false)
}

/// `(a - b) mod 2^{ωn}` computed as `a + !b + 1` by carry simulation.
pub fn simd_sub(a: &BigInt, b: &BigInt, strategy: AddStrategy) -> Result<SubResult> {
    let mut mach = LaneMachine::new();
    simd_sub_in(&mut mach, a, b, strategy)
}

pub(crate) fn simd_sub_in(mach: &mut LaneMachine, a: &BigInt, b: &BigInt, strategy: AddStrategy) -> Result<SubResult> {
    let (diff, trace) = add_core(mach, a, b, strategy, true)?;
    let borrow_out = 1 - trace.carry_out();
    Ok(SubResult { diff, borrow_out, trace })
}

fn add_core(
    mach: &mut LaneMachine,
    a: &BigInt,
    b: &BigInt,
    strategy: AddStrategy,
    subtract: bool,
) -> Result<(BigInt, AddTrace)> {
    if a.omega() != b.omega() {
        return Err(Error::RadixMismatch { left: a.omega(), right: b.omega() });
    }
    let omega = a.omega();
    strategy.validate(omega)?;
    let before = mach.counts();
    let n = width(a, b);
    let bits = strategy.lane_bits(omega);
    let mask = limb_mask(omega);

    let av = LaneVector::from_bigint(a, n, bits)?;
    let mut bv = LaneVector::from_bigint(b, n, bits)?;
    if subtract {
        let ones = LaneVector::new(vec![mask; n], bits)?;
        bv = mach.sub(&ones, &bv)?;
    }
    let d = mach.add(&av, &bv)?;
    let tp = derive_tp_in(mach, &d, &av, strategy, omega)?;

    let (c, s) = if subtract {
        // a virtual lowest byte that always generates supplies the +1
        let pv = strategy.p_byte(omega);
        let mut t = vec![(256 - pv as u16) as u8];
        let mut p = vec![pv];
        t.extend(&tp.t);
        p.extend(&tp.p);
        let (mut c, mut s) = simulate_carries_in(mach, &t, &p)?;
        c.remove(0);
        s.remove(0);
        (c, s)
    } else {
        simulate_carries_in(mach, &tp.t, &tp.p)?
    };

    let cv = mach.convert(&LaneVector::new(c[..n].iter().map(|&x| x as u64).collect(), 8)?, bits)?;
    let mut out = mach.add(&d, &cv)?;
    if bits != omega {
        out = mach.and_const(&out, mask);
    }
    let sum = BigInt::from_limbs(out.lanes().to_vec(), a.cfg().with_limbs(n)?)?;
    let cases = tp.t.iter().zip(&tp.p).map(|(&t, &p)| Case::of_bytes(t, p)).collect();
    let trace = AddTrace {
        strategy,
        d: d.lanes().to_vec(),
        g: tp.g,
        m: tp.m,
        t: tp.t,
        p: tp.p,
        s,
        c,
        cases,
        counts: mach.counts().since(&before),
    };
    Ok((sum, trace))
}
