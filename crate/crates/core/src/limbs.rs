//! Radix-2^ω multi-precision integers.
//!
//! A [`BigInt`] is a little-endian sequence of limbs, each stored in a 64-bit
//! word whose bits above ω are always zero. Operands of different length are
//! zero-extended to the longer one. Everything here is a pure function of its
//! inputs; the division and inversion routines are correctness oracles and
//! make no attempt to be fast.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Shl, Shr, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Limb width ω and element limb count n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RadixConfig {
    omega: u32,
    n: usize,
}

impl RadixConfig {
    pub fn new(omega: u32, n: usize) -> Result<Self> {
        if !(1..=64).contains(&omega) || n == 0 {
            return Err(Error::InvalidRadix { omega, n });
        }
        Ok(RadixConfig { omega, n })
    }

    /// 64-bit limbs.
    pub fn native(n: usize) -> Result<Self> {
        Self::new(64, n)
    }

    pub const fn omega(&self) -> u32 {
        self.omega
    }

    pub const fn limbs(&self) -> usize {
        self.n
    }

    /// True when ω is narrower than the machine word.
    pub const fn reduced(&self) -> bool {
        self.omega < 64
    }

    pub const fn limb_mask(&self) -> u64 {
        limb_mask(self.omega)
    }

    /// Total bit width ω·n.
    pub const fn bits(&self) -> usize {
        self.omega as usize * self.n
    }

    pub fn with_limbs(self, n: usize) -> Result<Self> {
        Self::new(self.omega, n)
    }
}

pub(crate) const fn limb_mask(omega: u32) -> u64 {
    if omega >= 64 {
        u64::MAX
    } else {
        (1u64 << omega) - 1
    }
}

/// Unsigned multi-precision integer in radix 2^ω.
#[derive(Clone, Debug)]
pub struct BigInt {
    limbs: Vec<u64>,
    cfg: RadixConfig,
}

/// Result of a carry-chained addition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CarryAdd {
    pub sum: BigInt,
    pub carry_out: u8,
    /// c_0..c_n, where c_i is the carry into limb i.
    pub carries: Vec<u8>,
}

/// Result of a borrow-chained subtraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BorrowSub {
    pub diff: BigInt,
    pub borrow_out: u8,
}

/// A product together with the number of ω×ω→2ω limb products spent on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Product {
    pub value: BigInt,
    pub limb_products: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivModResult {
    pub quotient: BigInt,
    pub remainder: BigInt,
}

impl BigInt {
    pub fn zero(cfg: RadixConfig) -> Self {
        BigInt { limbs: vec![0; cfg.n], cfg }
    }

    pub fn one(cfg: RadixConfig) -> Self {
        Self::from_u64(1, cfg)
    }

    pub fn from_u64(value: u64, cfg: RadixConfig) -> Self {
        Self::from_u128(value as u128, cfg)
    }

    pub fn from_u128(mut value: u128, cfg: RadixConfig) -> Self {
        let mut limbs = Vec::with_capacity(cfg.n);
        while value != 0 {
            limbs.push((value as u64) & cfg.limb_mask());
            value = if cfg.omega >= 64 { value >> 64 } else { value >> cfg.omega };
        }
        Self::from_raw(limbs, cfg)
    }

    /// Builds from least-significant-first limbs, rejecting any limb ≥ 2^ω.
    pub fn from_limbs(limbs: Vec<u64>, cfg: RadixConfig) -> Result<Self> {
        let mask = cfg.limb_mask();
        if let Some((index, &value)) = limbs.iter().enumerate().find(|(_, &l)| l & !mask != 0) {
            return Err(Error::LimbOverflow { index, value, omega: cfg.omega });
        }
        Ok(Self::from_raw(limbs, cfg))
    }

    /// Limbs must already be canonical. Pads to at least `cfg.n` limbs.
    pub(crate) fn from_raw(mut limbs: Vec<u64>, cfg: RadixConfig) -> Self {
        debug_assert!(limbs.iter().all(|&l| l & !cfg.limb_mask() == 0));
        if limbs.len() < cfg.n {
            limbs.resize(cfg.n, 0);
        }
        BigInt { limbs, cfg }
    }

    /// 2^k.
    pub fn pow2(k: usize, cfg: RadixConfig) -> Self {
        let omega = cfg.omega as usize;
        let mut limbs = vec![0; k / omega + 1];
        limbs[k / omega] = 1u64 << (k % omega);
        Self::from_raw(limbs, cfg)
    }

    /// Parses a big-endian hex literal with an optional `0x` prefix.
    pub fn from_hex(text: &str, cfg: RadixConfig) -> Result<Self> {
        let (offset, digits) = match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
            Some(rest) => (2, rest),
            None => (0, text),
        };
        if digits.is_empty() {
            return Err(Error::ParseHex { position: offset, found: text.chars().nth(offset).unwrap_or('\0') });
        }
        let mut nibbles = Vec::with_capacity(digits.len());
        for (i, ch) in digits.char_indices() {
            let v = ch.to_digit(16).ok_or(Error::ParseHex { position: offset + i, found: ch })?;
            nibbles.push(v as u64);
        }
        nibbles.reverse();
        let limbs = repack(&nibbles, 4, cfg.omega);
        Ok(Self::from_raw(limbs, cfg).trimmed())
    }

    /// Lowercase big-endian hex with a `0x` prefix.
    pub fn to_hex(&self) -> String {
        let nibbles = repack(&self.limbs, self.cfg.omega, 4);
        let top = nibbles.iter().rposition(|&d| d != 0);
        let mut out = String::from("0x");
        match top {
            None => out.push('0'),
            Some(top) => {
                for &d in nibbles[..=top].iter().rev() {
                    out.push(char::from_digit(d as u32, 16).unwrap());
                }
            }
        }
        out
    }

    pub fn limbs(&self) -> &[u64] {
        &self.limbs
    }

    pub fn cfg(&self) -> RadixConfig {
        self.cfg
    }

    pub fn omega(&self) -> u32 {
        self.cfg.omega
    }

    /// Stored limb count (at least `cfg.limbs()`).
    pub fn len(&self) -> usize {
        self.limbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.limbs.is_empty()
    }

    /// Limb `i`, or zero beyond the stored length.
    pub fn limb(&self, i: usize) -> u64 {
        self.limbs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.limb(0) & 1 == 1
    }

    /// Number of significant limbs.
    pub fn significant_limbs(&self) -> usize {
        self.limbs.iter().rposition(|&l| l != 0).map_or(0, |i| i + 1)
    }

    pub fn bit_len(&self) -> usize {
        match self.limbs.iter().rposition(|&l| l != 0) {
            None => 0,
            Some(i) => i * self.cfg.omega as usize + (64 - self.limbs[i].leading_zeros() as usize),
        }
    }

    pub fn bit(&self, i: usize) -> bool {
        let omega = self.cfg.omega as usize;
        (self.limb(i / omega) >> (i % omega)) & 1 == 1
    }

    pub fn trailing_zeros(&self) -> Option<usize> {
        let i = self.limbs.iter().position(|&l| l != 0)?;
        Some(i * self.cfg.omega as usize + self.limbs[i].trailing_zeros() as usize)
    }

    pub fn to_u128(&self) -> Option<u128> {
        if self.bit_len() > 128 {
            return None;
        }
        let omega = self.cfg.omega as usize;
        let mut v = 0u128;
        for (i, &l) in self.limbs.iter().enumerate() {
            if l != 0 {
                v |= (l as u128) << (i * omega);
            }
        }
        Some(v)
    }

    /// Drops high zero limbs, keeping at least `cfg.limbs()`.
    pub fn trimmed(mut self) -> Self {
        let keep = self.significant_limbs().max(self.cfg.n);
        self.limbs.truncate(keep);
        self
    }

    /// The same value as exactly `cfg.limbs()` limbs tagged with `cfg`.
    pub fn in_config(&self, cfg: RadixConfig) -> Result<Self> {
        if self.cfg.omega != cfg.omega {
            return Err(Error::RadixMismatch { left: self.cfg.omega, right: cfg.omega });
        }
        if self.significant_limbs() > cfg.n {
            return Err(Error::ModulusRange { bits: cfg.bits() });
        }
        let mut limbs = self.limbs.clone();
        limbs.resize(cfg.n, 0);
        Ok(BigInt { limbs, cfg })
    }

    /// Exactly `len` limbs. Panics if a nonzero limb would be dropped.
    pub fn with_len(&self, len: usize) -> Self {
        assert!(self.significant_limbs() <= len, "value does not fit in {len} limbs");
        let mut limbs = self.limbs.clone();
        limbs.resize(len, 0);
        BigInt { limbs, cfg: self.cfg }
    }

    /// The value modulo r^k as exactly `k` limbs.
    pub fn low_limbs(&self, k: usize) -> Self {
        let mut limbs: Vec<u64> = self.limbs.iter().copied().take(k).collect();
        limbs.resize(k, 0);
        BigInt { limbs, cfg: self.cfg }
    }

    /// The value modulo 2^k.
    pub fn low_bits(&self, k: usize) -> Self {
        let omega = self.cfg.omega as usize;
        let full = k / omega;
        let rem = k % omega;
        let mut limbs: Vec<u64> = self.limbs.iter().copied().take(full + 1).collect();
        limbs.resize(full + 1, 0);
        limbs[full] &= limb_mask(rem as u32);
        Self::from_raw(limbs, self.cfg).trimmed()
    }

    pub fn shl_bits(&self, k: usize) -> Self {
        let omega = self.cfg.omega as usize;
        let (whole, part) = (k / omega, (k % omega) as u32);
        let mask = self.cfg.limb_mask();
        let mut limbs = vec![0u64; whole];
        if part == 0 {
            limbs.extend_from_slice(&self.limbs);
        } else {
            let mut spill = 0u64;
            for &l in &self.limbs {
                limbs.push(((l << part) & mask) | spill);
                spill = l >> (omega as u32 - part);
            }
            limbs.push(spill);
        }
        Self::from_raw(limbs, self.cfg).trimmed()
    }

    pub fn shr_bits(&self, k: usize) -> Self {
        let omega = self.cfg.omega as usize;
        let (whole, part) = (k / omega, (k % omega) as u32);
        if whole >= self.limbs.len() {
            return Self::zero(self.cfg);
        }
        let src = &self.limbs[whole..];
        let limbs = if part == 0 {
            src.to_vec()
        } else {
            let mask = self.cfg.limb_mask();
            (0..src.len())
                .map(|i| {
                    let hi = src.get(i + 1).copied().unwrap_or(0);
                    (src[i] >> part) | ((hi << (omega as u32 - part)) & mask)
                })
                .collect()
        };
        Self::from_raw(limbs, self.cfg).trimmed()
    }

    /// `self - other`, or `None` when negative.
    pub fn checked_sub(&self, other: &BigInt) -> Option<BigInt> {
        assert_same_radix(self, other);
        let (diff, borrow) = sub_slices(&self.limbs, &other.limbs, self.cfg.omega);
        (borrow == 0).then(|| Self::from_raw(diff, self.cfg).trimmed())
    }

    fn cmp_value(&self, other: &BigInt) -> Ordering {
        if self.cfg.omega != other.cfg.omega {
            let a = repack(&self.limbs, self.cfg.omega, 64);
            let b = repack(&other.limbs, other.cfg.omega, 64);
            return cmp_slices(&a, &b);
        }
        cmp_slices(&self.limbs, &other.limbs)
    }
}

impl PartialEq for BigInt {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl Eq for BigInt {}

impl PartialOrd for BigInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigInt {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_value(other)
    }
}

/// Serialized as its lowercase hex rendering.
impl Serialize for BigInt {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl fmt::Display for BigInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

fn assert_same_radix(a: &BigInt, b: &BigInt) {
    assert_eq!(a.cfg.omega, b.cfg.omega, "operands use different radices");
}

impl Add for &BigInt {
    type Output = BigInt;

    fn add(self, rhs: &BigInt) -> BigInt {
        assert_same_radix(self, rhs);
        let n = self.limbs.len().max(rhs.limbs.len());
        let (mut sum, carry) = add_slices(&self.limbs, &rhs.limbs, self.cfg.omega, 0);
        debug_assert_eq!(sum.len(), n);
        sum.push(carry as u64);
        BigInt::from_raw(sum, self.cfg).trimmed()
    }
}

impl Sub for &BigInt {
    type Output = BigInt;

    /// Panics on underflow.
    fn sub(self, rhs: &BigInt) -> BigInt {
        self.checked_sub(rhs).expect("big integer subtraction underflow")
    }
}

impl Mul for &BigInt {
    type Output = BigInt;

    fn mul(self, rhs: &BigInt) -> BigInt {
        assert_same_radix(self, rhs);
        let a = &self.limbs[..self.significant_limbs().max(1)];
        let b = &rhs.limbs[..rhs.significant_limbs().max(1)];
        BigInt::from_raw(schoolbook(a, b, self.cfg.omega), self.cfg).trimmed()
    }
}

impl Shl<usize> for &BigInt {
    type Output = BigInt;

    fn shl(self, k: usize) -> BigInt {
        self.shl_bits(k)
    }
}

impl Shr<usize> for &BigInt {
    type Output = BigInt;

    fn shr(self, k: usize) -> BigInt {
        self.shr_bits(k)
    }
}

/// Re-limbs a little-endian digit sequence from radix 2^w_in to 2^w_out.
pub(crate) fn repack(src: &[u64], w_in: u32, w_out: u32) -> Vec<u64> {
    let mask = limb_mask(w_out) as u128;
    let mut out = Vec::with_capacity(src.len() * w_in as usize / w_out as usize + 1);
    let mut acc: u128 = 0;
    let mut bits = 0u32;
    for &x in src {
        acc |= (x as u128) << bits;
        bits += w_in;
        while bits >= w_out {
            out.push((acc & mask) as u64);
            acc >>= w_out;
            bits -= w_out;
        }
    }
    if bits > 0 {
        out.push((acc & mask) as u64);
    }
    out
}

fn cmp_slices(a: &[u64], b: &[u64]) -> Ordering {
    let n = a.len().max(b.len());
    for i in (0..n).rev() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        match x.cmp(&y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Limb-wise a + b + carry_in over max(len) limbs; returns (sum, carry_out).
pub(crate) fn add_slices(a: &[u64], b: &[u64], omega: u32, carry_in: u8) -> (Vec<u64>, u8) {
    let n = a.len().max(b.len());
    let mask = limb_mask(omega) as u128;
    let mut carry = carry_in as u128;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let s = a.get(i).copied().unwrap_or(0) as u128 + b.get(i).copied().unwrap_or(0) as u128 + carry;
        out.push((s & mask) as u64);
        carry = s >> omega;
    }
    (out, carry as u8)
}

/// Limb-wise a − b over max(len) limbs; returns (diff mod 2^{ω·len}, borrow_out).
pub(crate) fn sub_slices(a: &[u64], b: &[u64], omega: u32) -> (Vec<u64>, u8) {
    let n = a.len().max(b.len());
    let modulus = 1u128 << omega;
    let mut borrow = 0u128;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0) as u128;
        let y = b.get(i).copied().unwrap_or(0) as u128 + borrow;
        if x >= y {
            out.push((x - y) as u64);
            borrow = 0;
        } else {
            out.push((x + modulus - y) as u64);
            borrow = 1;
        }
    }
    (out, borrow as u8)
}

/// Operand-scanning schoolbook product of exactly `a.len() + b.len()` limbs.
fn schoolbook(a: &[u64], b: &[u64], omega: u32) -> Vec<u64> {
    let mask = limb_mask(omega) as u128;
    let mut out = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        let mut carry = 0u128;
        for (j, &y) in b.iter().enumerate() {
            let t = x as u128 * y as u128 + out[i + j] as u128 + carry;
            out[i + j] = (t & mask) as u64;
            carry = t >> omega;
        }
        let mut k = i + b.len();
        while carry != 0 {
            let t = out[k] as u128 + carry;
            out[k] = (t & mask) as u64;
            carry = t >> omega;
            k += 1;
        }
    }
    out
}

fn check_radix(a: &BigInt, b: &BigInt) -> Result<()> {
    if a.cfg.omega != b.cfg.omega {
        return Err(Error::RadixMismatch { left: a.cfg.omega, right: b.cfg.omega });
    }
    Ok(())
}

pub fn compare(a: &BigInt, b: &BigInt) -> Result<Ordering> {
    check_radix(a, b)?;
    Ok(cmp_slices(&a.limbs, &b.limbs))
}

/// Ripple-carry addition over n = max(len) limbs.
pub fn add_carry_propagate(a: &BigInt, b: &BigInt) -> Result<CarryAdd> {
    check_radix(a, b)?;
    let omega = a.cfg.omega;
    let n = a.len().max(b.len());
    let mut carries = Vec::with_capacity(n + 1);
    let mut sum = Vec::with_capacity(n);
    let mut c = 0u128;
    carries.push(0);
    for i in 0..n {
        let s = a.limb(i) as u128 + b.limb(i) as u128 + c;
        sum.push((s & limb_mask(omega) as u128) as u64);
        c = s >> omega;
        carries.push(c as u8);
    }
    Ok(CarryAdd { sum: BigInt::from_raw(sum, a.cfg), carry_out: c as u8, carries })
}

pub fn sub_borrow_propagate(a: &BigInt, b: &BigInt) -> Result<BorrowSub> {
    check_radix(a, b)?;
    let (diff, borrow_out) = sub_slices(&a.limbs, &b.limbs, a.cfg.omega);
    Ok(BorrowSub { diff: BigInt::from_raw(diff, a.cfg), borrow_out })
}

/// Carry-select addition: both candidate sums per limb are formed up front and
/// the incoming carry only selects between them.
pub fn add_carry_select(a: &BigInt, b: &BigInt) -> Result<CarryAdd> {
    check_radix(a, b)?;
    let omega = a.cfg.omega;
    let mask = limb_mask(omega) as u128;
    let n = a.len().max(b.len());
    let candidates: Vec<[(u64, u8); 2]> = (0..n)
        .map(|i| {
            let s0 = a.limb(i) as u128 + b.limb(i) as u128;
            let s1 = s0 + 1;
            [((s0 & mask) as u64, (s0 >> omega) as u8), ((s1 & mask) as u64, (s1 >> omega) as u8)]
        })
        .collect();
    let mut carries = Vec::with_capacity(n + 1);
    let mut sum = Vec::with_capacity(n);
    let mut c = 0u8;
    carries.push(c);
    for cand in &candidates {
        let (d, next) = cand[c as usize];
        sum.push(d);
        c = next;
        carries.push(c);
    }
    Ok(CarryAdd { sum: BigInt::from_raw(sum, a.cfg), carry_out: c, carries })
}

/// Positive `k` divides by r^k (discarding low limbs); negative `k` multiplies by r^{-k}.
pub fn shift_limbs(a: &BigInt, k: isize) -> BigInt {
    match k.cmp(&0) {
        Ordering::Equal => a.clone(),
        Ordering::Greater => {
            let k = k as usize;
            let limbs = a.limbs.get(k..).map(<[u64]>::to_vec).unwrap_or_default();
            BigInt::from_raw(limbs, a.cfg)
        }
        Ordering::Less => {
            let mut limbs = vec![0u64; k.unsigned_abs()];
            limbs.extend_from_slice(&a.limbs);
            BigInt::from_raw(limbs, a.cfg)
        }
    }
}

/// Full product of `a.len() + b.len()` limbs; costs `a.len() * b.len()` limb products.
pub fn mul_schoolbook(a: &BigInt, b: &BigInt) -> Result<Product> {
    check_radix(a, b)?;
    let value = BigInt::from_raw(schoolbook(&a.limbs, &b.limbs, a.cfg.omega), a.cfg);
    Ok(Product { value, limb_products: (a.len() * b.len()) as u64 })
}

/// Karatsuba product. Operands are zero-padded to a common length L; each
/// level splits into halves of ⌈L/2⌉ limbs and performs three half-size
/// products, falling back to schoolbook once L ≤ `base_threshold`.
pub fn mul_karatsuba(a: &BigInt, b: &BigInt, base_threshold: usize) -> Result<Product> {
    check_radix(a, b)?;
    if base_threshold == 0 {
        return Err(Error::KaratsubaThreshold);
    }
    let len = a.len().max(b.len());
    let mut x = a.limbs.clone();
    let mut y = b.limbs.clone();
    x.resize(len, 0);
    y.resize(len, 0);
    let mut count = 0u64;
    let limbs = karatsuba(&x, &y, a.cfg.omega, base_threshold, &mut count);
    Ok(Product { value: BigInt::from_raw(limbs, a.cfg), limb_products: count })
}

fn karatsuba(a: &[u64], b: &[u64], omega: u32, threshold: usize, count: &mut u64) -> Vec<u64> {
    let len = a.len();
    debug_assert_eq!(len, b.len());
    if len <= threshold {
        *count += (len * len) as u64;
        return schoolbook(a, b, omega);
    }
    let half = len.div_ceil(2);
    let split = |v: &[u64]| {
        let lo = v[..half].to_vec();
        let mut hi = v[half..].to_vec();
        hi.resize(half, 0);
        (lo, hi)
    };
    let (a0, a1) = split(a);
    let (b0, b1) = split(b);
    let z0 = karatsuba(&a0, &b0, omega, threshold, count);
    let z2 = karatsuba(&a1, &b1, omega, threshold, count);

    // (a0 + a1) may carry one bit out of `half` limbs; the cross terms that
    // carry introduces are additions only.
    let (sa, ca) = add_slices(&a0, &a1, omega, 0);
    let (sb, cb) = add_slices(&b0, &b1, omega, 0);
    let mut mid = karatsuba(&sa, &sb, omega, threshold, count);
    mid.resize(2 * half + 2, 0);
    if ca == 1 {
        add_at(&mut mid, &sb, half, omega);
    }
    if cb == 1 {
        add_at(&mut mid, &sa, half, omega);
    }
    if ca == 1 && cb == 1 {
        add_at(&mut mid, &[1], 2 * half, omega);
    }
    let (mid, borrow) = sub_slices(&mid, &z0, omega);
    debug_assert_eq!(borrow, 0);
    let (mid, borrow) = sub_slices(&mid, &z2, omega);
    debug_assert_eq!(borrow, 0);

    let mut out = vec![0u64; 2 * len + 2];
    add_at(&mut out, &z0, 0, omega);
    add_at(&mut out, &mid, half, omega);
    add_at(&mut out, &z2, 2 * half, omega);
    debug_assert!(out[2 * len..].iter().all(|&l| l == 0));
    out.truncate(2 * len);
    out
}

/// acc += x · r^offset, growing `acc` as needed.
fn add_at(acc: &mut Vec<u64>, x: &[u64], offset: usize, omega: u32) {
    let mask = limb_mask(omega) as u128;
    if acc.len() < offset + x.len() {
        acc.resize(offset + x.len(), 0);
    }
    let mut carry = 0u128;
    let mut i = 0;
    while i < x.len() || carry != 0 {
        if offset + i == acc.len() {
            acc.push(0);
        }
        let s = acc[offset + i] as u128 + x.get(i).copied().unwrap_or(0) as u128 + carry;
        acc[offset + i] = (s & mask) as u64;
        carry = s >> omega;
        i += 1;
    }
}

/// Binary long division. Only meant as a correctness oracle.
pub fn divmod_oracle(a: &BigInt, m: &BigInt) -> Result<DivModResult> {
    check_radix(a, m)?;
    if m.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let cfg = a.cfg;
    let omega = cfg.omega as usize;
    let mask = cfg.limb_mask();
    let divisor = &m.limbs[..m.significant_limbs()];
    let bits = a.bit_len();
    let mut quotient = vec![0u64; bits.div_ceil(omega).max(1)];
    let mut rem: Vec<u64> = vec![0; divisor.len() + 1];
    for i in (0..bits).rev() {
        // rem = 2·rem + bit
        let mut spill = a.bit(i) as u64;
        for limb in rem.iter_mut() {
            let next = *limb >> (omega - 1);
            *limb = ((*limb << 1) & mask) | spill;
            spill = next;
        }
        if cmp_slices(&rem, divisor) != Ordering::Less {
            let (d, borrow) = sub_slices(&rem, divisor, cfg.omega);
            debug_assert_eq!(borrow, 0);
            rem = d;
            quotient[i / omega] |= 1 << (i % omega);
        }
    }
    Ok(DivModResult {
        quotient: BigInt::from_raw(quotient, cfg).trimmed(),
        remainder: BigInt::from_raw(rem, cfg).trimmed(),
    })
}

/// a mod m via [`divmod_oracle`].
pub fn rem_oracle(a: &BigInt, m: &BigInt) -> Result<BigInt> {
    Ok(divmod_oracle(a, m)?.remainder)
}

/// a⁻¹ mod m by the extended Euclidean algorithm, with coefficients kept
/// reduced modulo m so no signed arithmetic is needed.
pub fn modinv_oracle(a: &BigInt, m: &BigInt) -> Result<BigInt> {
    check_radix(a, m)?;
    if m.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let cfg = a.cfg;
    let one = BigInt::one(cfg);
    if *m == one {
        return Ok(BigInt::zero(cfg));
    }
    let (mut r0, mut r1) = (m.clone(), rem_oracle(a, m)?);
    let (mut s0, mut s1) = (BigInt::zero(cfg), one.clone());
    while !r1.is_zero() {
        let DivModResult { quotient: q, remainder } = divmod_oracle(&r0, &r1)?;
        r0 = std::mem::replace(&mut r1, remainder);
        // s0 − q·s1 (mod m)
        let qs = rem_oracle(&(&q * &s1), m)?;
        let next = rem_oracle(&(&(&s0 + m) - &qs), m)?;
        s0 = std::mem::replace(&mut s1, next);
    }
    if r0 != one {
        return Err(Error::NotInvertible);
    }
    Ok(s0.trimmed())
}

/// Same value, re-limbed for `to`.
pub fn radix_convert(a: &BigInt, to: RadixConfig) -> BigInt {
    if a.cfg.omega == to.omega {
        let mut out = a.clone();
        out.cfg = to;
        if out.limbs.len() < to.n {
            out.limbs.resize(to.n, 0);
        }
        return out;
    }
    BigInt::from_raw(repack(&a.limbs, a.cfg.omega, to.omega), to).trimmed()
}
