//! Portable model of SIMD register semantics.
//!
//! A [`LaneVector`] is one register's worth of independent lanes. All lane
//! operations go through a [`LaneMachine`], which owns the instruction
//! counters for one counting scope. Two machines never share counters.
//!
//! Counting convention: every vector instruction bumps its class counter by
//! one, except multiplications, which count one `lane_mul_product` per active
//! lane (one ω×ω→2ω product). A high/low pair issued through
//! [`LaneMachine::mul_wide`] counts each lane once.

mod cost;
mod prefix;

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limbs::{limb_mask, BigInt, RadixConfig};

pub use cost::{cost_report, cost_reports, CostModel, CostReport, OpClass, BUILTIN_PROFILES};
pub use prefix::kogge_stone_carries;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaneVector {
    lanes: Vec<u64>,
    lane_bits: u32,
}

impl LaneVector {
    pub fn new(lanes: Vec<u64>, lane_bits: u32) -> Result<Self> {
        check_width(lane_bits)?;
        let mask = limb_mask(lane_bits);
        if let Some((index, &value)) = lanes.iter().enumerate().find(|(_, &v)| v & !mask != 0) {
            return Err(Error::LaneOverflow { index, value, bits: lane_bits });
        }
        Ok(LaneVector { lanes, lane_bits })
    }

    pub fn zeros(count: usize, lane_bits: u32) -> Result<Self> {
        Self::new(vec![0; count], lane_bits)
    }

    /// Loads the first `count` limbs of `a` (zero-extended) into lanes.
    pub fn from_bigint(a: &BigInt, count: usize, lane_bits: u32) -> Result<Self> {
        if lane_bits < a.omega() {
            return Err(Error::LaneWidth(lane_bits));
        }
        if a.significant_limbs() > count {
            return Err(Error::BoundViolation(format!(
                "{}-limb value does not fit in {count} lanes",
                a.significant_limbs()
            )));
        }
        Self::new((0..count).map(|i| a.limb(i)).collect(), lane_bits)
    }

    /// Reads the lanes back as limbs of radix `cfg`.
    pub fn to_bigint(&self, cfg: RadixConfig) -> Result<BigInt> {
        BigInt::from_limbs(self.lanes.clone(), cfg)
    }

    pub fn lanes(&self) -> &[u64] {
        &self.lanes
    }

    pub fn lane_bits(&self) -> u32 {
        self.lane_bits
    }

    pub fn count(&self) -> usize {
        self.lanes.len()
    }

    pub fn get(&self, i: usize) -> u64 {
        self.lanes[i]
    }

    fn mask(&self) -> u64 {
        limb_mask(self.lane_bits)
    }

    fn same_shape(&self, other: &LaneVector) -> Result<()> {
        if self.lanes.len() != other.lanes.len() || self.lane_bits != other.lane_bits {
            return Err(Error::ShapeMismatch {
                left_lanes: self.lanes.len(),
                left_bits: self.lane_bits,
                right_lanes: other.lanes.len(),
                right_bits: other.lane_bits,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &LaneVector, f: impl Fn(u64, u64) -> u64) -> Result<LaneVector> {
        self.same_shape(other)?;
        let lanes = self.lanes.iter().zip(&other.lanes).map(|(&a, &b)| f(a, b)).collect();
        Ok(LaneVector { lanes, lane_bits: self.lane_bits })
    }

    fn map(&self, f: impl Fn(u64) -> u64) -> LaneVector {
        LaneVector { lanes: self.lanes.iter().map(|&a| f(a)).collect(), lane_bits: self.lane_bits }
    }
}

fn check_width(bits: u32) -> Result<()> {
    if (1..=64).contains(&bits) {
        Ok(())
    } else {
        Err(Error::LaneWidth(bits))
    }
}

/// Instruction counters for one counting scope.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpCounts {
    pub lane_add: u64,
    pub lane_sub: u64,
    pub lane_mul_product: u64,
    pub lane_popcount: u64,
    pub lane_compare: u64,
    pub lane_saturating: u64,
    pub lane_masked_add: u64,
    pub lane_logic: u64,
    pub cross_lane: u64,
    pub scalar_add: u64,
    pub loads: u64,
}

impl OpCounts {
    pub fn get(&self, class: OpClass) -> u64 {
        match class {
            OpClass::LaneAdd => self.lane_add,
            OpClass::LaneSub => self.lane_sub,
            OpClass::LaneMulProduct => self.lane_mul_product,
            OpClass::LanePopcount => self.lane_popcount,
            OpClass::LaneCompare => self.lane_compare,
            OpClass::LaneSaturating => self.lane_saturating,
            OpClass::LaneMaskedAdd => self.lane_masked_add,
            OpClass::LaneLogic => self.lane_logic,
            OpClass::CrossLane => self.cross_lane,
            OpClass::ScalarAdd => self.scalar_add,
            OpClass::Loads => self.loads,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == OpCounts::default()
    }

    /// Counts accumulated since `earlier`.
    pub fn since(&self, earlier: &OpCounts) -> OpCounts {
        let mut out = OpCounts::default();
        for class in OpClass::ALL {
            *out.slot(class) = self.get(class) - earlier.get(class);
        }
        out
    }

    fn slot(&mut self, class: OpClass) -> &mut u64 {
        match class {
            OpClass::LaneAdd => &mut self.lane_add,
            OpClass::LaneSub => &mut self.lane_sub,
            OpClass::LaneMulProduct => &mut self.lane_mul_product,
            OpClass::LanePopcount => &mut self.lane_popcount,
            OpClass::LaneCompare => &mut self.lane_compare,
            OpClass::LaneSaturating => &mut self.lane_saturating,
            OpClass::LaneMaskedAdd => &mut self.lane_masked_add,
            OpClass::LaneLogic => &mut self.lane_logic,
            OpClass::CrossLane => &mut self.cross_lane,
            OpClass::ScalarAdd => &mut self.scalar_add,
            OpClass::Loads => &mut self.loads,
        }
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: OpCounts) {
        for class in OpClass::ALL {
            *self.slot(class) += rhs.get(class);
        }
    }
}

impl Add for OpCounts {
    type Output = OpCounts;

    fn add(mut self, rhs: OpCounts) -> OpCounts {
        self += rhs;
        self
    }
}

/// Executes lane operations and counts them.
#[derive(Clone, Debug, Default)]
pub struct LaneMachine {
    counts: OpCounts,
}

impl LaneMachine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counts(&self) -> OpCounts {
        self.counts
    }

    pub fn into_counts(self) -> OpCounts {
        self.counts
    }

    /// Records `n` limb products computed outside the lane model
    /// (e.g. by a Karatsuba or schoolbook routine on lane data).
    pub fn record_products(&mut self, n: u64) {
        self.counts.lane_mul_product += n;
    }

    pub fn record_scalar_adds(&mut self, n: u64) {
        self.counts.scalar_add += n;
    }

    /// Loads a constant vector from memory.
    pub fn load(&mut self, lanes: Vec<u64>, lane_bits: u32) -> Result<LaneVector> {
        let v = LaneVector::new(lanes, lane_bits)?;
        self.counts.loads += 1;
        Ok(v)
    }

    /// Replicates a scalar into every lane.
    pub fn broadcast(&mut self, value: u64, count: usize, lane_bits: u32) -> Result<LaneVector> {
        let v = LaneVector::new(vec![value; count], lane_bits)?;
        self.counts.cross_lane += 1;
        Ok(v)
    }

    pub fn add(&mut self, a: &LaneVector, b: &LaneVector) -> Result<LaneVector> {
        let mask = a.mask();
        let v = a.zip_with(b, |x, y| x.wrapping_add(y) & mask)?;
        self.counts.lane_add += 1;
        Ok(v)
    }

    pub fn sub(&mut self, a: &LaneVector, b: &LaneVector) -> Result<LaneVector> {
        let mask = a.mask();
        let v = a.zip_with(b, |x, y| x.wrapping_sub(y) & mask)?;
        self.counts.lane_sub += 1;
        Ok(v)
    }

    /// High half of each lane's double-width product.
    pub fn mul_hi(&mut self, a: &LaneVector, b: &LaneVector) -> Result<LaneVector> {
        let (hi, _) = self.mul_wide(a, b)?;
        Ok(hi)
    }

    /// Low half of each lane's double-width product.
    pub fn mul_lo(&mut self, a: &LaneVector, b: &LaneVector) -> Result<LaneVector> {
        let (_, lo) = self.mul_wide(a, b)?;
        Ok(lo)
    }

    /// Both halves of each lane product, counted once per lane.
    pub fn mul_wide(&mut self, a: &LaneVector, b: &LaneVector) -> Result<(LaneVector, LaneVector)> {
        let bits = a.lane_bits;
        let mask = a.mask() as u128;
        let hi = a.zip_with(b, |x, y| ((x as u128 * y as u128) >> bits) as u64)?;
        let lo = a.zip_with(b, |x, y| ((x as u128 * y as u128) & mask) as u64)?;
        self.counts.lane_mul_product += a.count() as u64;
        Ok((hi, lo))
    }

    pub fn saturating_add(&mut self, a: &LaneVector, b: &LaneVector) -> Result<LaneVector> {
        let max = a.mask();
        let v = a.zip_with(b, |x, y| x.saturating_add(y).min(max))?;
        self.counts.lane_saturating += 1;
        Ok(v)
    }

    pub fn saturating_sub(&mut self, a: &LaneVector, b: &LaneVector) -> Result<LaneVector> {
        let v = a.zip_with(b, u64::saturating_sub)?;
        self.counts.lane_saturating += 1;
        Ok(v)
    }

    pub fn popcount(&mut self, a: &LaneVector) -> LaneVector {
        self.counts.lane_popcount += 1;
        a.map(|x| x.count_ones() as u64)
    }

    /// Per-lane `a < b` as a 0/1 vector.
    pub fn lt(&mut self, a: &LaneVector, b: &LaneVector) -> Result<LaneVector> {
        let v = a.zip_with(b, |x, y| (x < y) as u64)?;
        self.counts.lane_compare += 1;
        Ok(v)
    }

    /// `a + addend` in lanes whose mask is set, `a` elsewhere.
    pub fn masked_add(&mut self, a: &LaneVector, addend: u64, mask: &LaneVector) -> Result<LaneVector> {
        if a.count() != mask.count() {
            return Err(Error::ShapeMismatch {
                left_lanes: a.count(),
                left_bits: a.lane_bits,
                right_lanes: mask.count(),
                right_bits: mask.lane_bits,
            });
        }
        let wrap = a.mask();
        let lanes = a
            .lanes
            .iter()
            .zip(&mask.lanes)
            .map(|(&x, &m)| if m != 0 { x.wrapping_add(addend) & wrap } else { x })
            .collect();
        self.counts.lane_masked_add += 1;
        Ok(LaneVector { lanes, lane_bits: a.lane_bits })
    }

    /// Per-lane bitwise AND with a constant.
    pub fn and_const(&mut self, a: &LaneVector, mask: u64) -> LaneVector {
        self.counts.lane_logic += 1;
        a.map(|x| x & mask)
    }

    /// Packs the low byte of every lane into consecutive 8-bit lanes.
    pub fn byte_gather(&mut self, a: &LaneVector) -> Result<LaneVector> {
        if let Some((index, &value)) = a.lanes.iter().enumerate().find(|(_, &v)| v > 0xff) {
            return Err(Error::LaneOverflow { index, value, bits: 8 });
        }
        self.counts.cross_lane += 1;
        Ok(LaneVector { lanes: a.lanes.clone(), lane_bits: 8 })
    }

    /// Moves every lane into lanes of `lane_bits` width (zero-extend or narrow).
    pub fn convert(&mut self, a: &LaneVector, lane_bits: u32) -> Result<LaneVector> {
        let v = LaneVector::new(a.lanes.clone(), lane_bits)?;
        self.counts.cross_lane += 1;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(lanes: &[u64], bits: u32) -> LaneVector {
        LaneVector::new(lanes.to_vec(), bits).unwrap()
    }

    #[test]
    fn construction_checks_width() {
        assert!(LaneVector::new(vec![256], 8).is_err());
        assert!(LaneVector::new(vec![1], 0).is_err());
        assert!(LaneVector::new(vec![u64::MAX], 64).is_ok());
    }

    #[test]
    fn add_wraps_per_lane() {
        let mut m = LaneMachine::new();
        let z = v(&[0, 0, 0, 0], 16);
        assert_eq!(m.add(&z, &z).unwrap(), z);
        let a = v(&[60000, 50000, 10000, 20000], 16);
        let b = v(&[5536, 15535, 10000, 20000], 16);
        assert_eq!(m.add(&a, &b).unwrap().lanes(), &[0, 65535, 20000, 40000]);
        assert_eq!(m.counts().lane_add, 2);
    }

    #[test]
    fn sub_wraps_per_lane() {
        let mut m = LaneMachine::new();
        let x = v(&[3, 200, 7, 0], 8);
        assert_eq!(m.sub(&x, &v(&[0; 4], 8)).unwrap(), x);
        let s = v(&[0, 0, 245, 244], 8);
        let t = v(&[17, 16, 5, 5], 8);
        assert_eq!(m.sub(&s, &t).unwrap().lanes(), &[239, 240, 240, 239]);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let mut m = LaneMachine::new();
        assert!(matches!(m.add(&v(&[1, 2], 8), &v(&[1], 8)), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(m.add(&v(&[1], 16), &v(&[1], 8)), Err(Error::ShapeMismatch { .. })));
        assert_eq!(m.counts().lane_add, 0);
    }

    #[test]
    fn widening_multiply_halves() {
        let mut m = LaneMachine::new();
        let x = v(&[14, 3, 15], 4);
        let (hi, lo) = m.mul_wide(&x, &v(&[0, 0, 0], 4)).unwrap();
        assert!(hi.lanes().iter().chain(lo.lanes()).all(|&l| l == 0));
        let (hi, lo) = m.mul_wide(&x, &v(&[1, 1, 1], 4)).unwrap();
        assert_eq!((hi.lanes(), lo.lanes()), (&[0, 0, 0][..], x.lanes()));
        let y = v(&[15, 15, 15], 4);
        assert_eq!(m.mul_lo(&x, &y).unwrap().lanes(), &[2, 13, 1]);
        assert_eq!(m.mul_hi(&x, &y).unwrap().lanes(), &[13, 2, 14]);
        // three lanes per call, four calls
        assert_eq!(m.counts().lane_mul_product, 12);
    }

    #[test]
    fn saturation() {
        let mut m = LaneMachine::new();
        let x = v(&[5, u64::MAX], 64);
        assert_eq!(m.saturating_add(&v(&[0, 0], 64), &x).unwrap(), x);
        assert_eq!(m.saturating_add(&v(&[u64::MAX], 64), &v(&[1], 64)).unwrap().lanes(), &[u64::MAX]);
        let k = 43;
        let d = v(&[(1 << k) - 1], 64);
        let c = v(&[u64::MAX - (1 << k)], 64);
        assert_eq!(m.saturating_add(&d, &c).unwrap().lanes(), &[u64::MAX - 1]);
        assert_eq!(m.saturating_sub(&x, &v(&[0, 0], 64)).unwrap(), x);
        assert_eq!(m.saturating_sub(&v(&[u64::MAX - 1], 64), &v(&[u64::MAX - 2], 64)).unwrap().lanes(), &[1]);
        assert_eq!(m.saturating_sub(&v(&[3], 8), &v(&[9], 8)).unwrap().lanes(), &[0]);
        assert_eq!(m.saturating_add(&v(&[200], 8), &v(&[100], 8)).unwrap().lanes(), &[255]);
    }

    #[test]
    fn popcount_compare_masked_add() {
        let mut m = LaneMachine::new();
        assert_eq!(m.popcount(&v(&[0], 16)).lanes(), &[0]);
        let d = v(&[0, 65535, 20000, 40000], 16);
        let g = m.popcount(&d);
        assert_eq!(g.lanes(), &[0, 16, 5, 5]);

        assert!(m.lt(&d, &d).unwrap().lanes().iter().all(|&x| x == 0));
        let a = v(&[60000, 50000, 10000, 20000], 16);
        let mask = m.lt(&d, &a).unwrap();
        assert_eq!(mask.lanes(), &[1, 0, 0, 0]);

        assert_eq!(m.masked_add(&g, 17, &v(&[0; 4], 16)).unwrap(), g);
        assert_eq!(m.masked_add(&g, 17, &mask).unwrap().lanes(), &[17, 16, 5, 5]);
        assert!(m.masked_add(&g, 17, &v(&[0; 3], 16)).is_err());
    }

    #[test]
    fn gather_bytes() {
        let mut m = LaneMachine::new();
        let g = m.byte_gather(&v(&[0, 0], 64)).unwrap();
        assert_eq!((g.lanes(), g.lane_bits()), (&[0, 0][..], 8));
        assert_eq!(m.byte_gather(&v(&[17, 16, 5, 5], 64)).unwrap().lanes(), &[17, 16, 5, 5]);
        assert!(matches!(m.byte_gather(&v(&[256], 64)), Err(Error::LaneOverflow { index: 0, .. })));
        assert_eq!(m.counts().cross_lane, 2);
    }

    #[test]
    fn counts_arithmetic() {
        let a = OpCounts { lane_add: 2, loads: 1, ..Default::default() };
        let b = OpCounts { lane_add: 1, cross_lane: 4, ..Default::default() };
        let s = a + b;
        assert_eq!((s.lane_add, s.loads, s.cross_lane), (3, 1, 4));
        assert_eq!(s.since(&a), b);
        assert!(OpCounts::default().is_zero());
    }
}
