#![allow(dead_code)]

use num_bigint::{BigInt as Signed, BigUint};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simd_redc::{BigInt, RadixConfig};

pub fn to_big(x: &BigInt) -> BigUint {
    let mut acc = BigUint::zero();
    for i in (0..x.len()).rev() {
        acc = (acc << x.omega()) + BigUint::from(x.limb(i));
    }
    acc
}

pub fn from_big(x: &BigUint, cfg: RadixConfig) -> BigInt {
    let hex = format!("{x:x}");
    BigInt::from_hex(&hex, cfg).unwrap()
}

/// Modular inverse by the extended Euclidean algorithm.
pub fn inverse(a: &BigUint, m: &BigUint) -> BigUint {
    let (mut r0, mut r1) = (Signed::from(m.clone()), Signed::from(a % m));
    let (mut s0, mut s1) = (Signed::zero(), Signed::one());
    while !r1.is_zero() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let s2 = &s0 - &q * &s1;
        (r0, r1, s0, s1) = (r1, r2, s1, s2);
    }
    assert!(r0.is_one() || m.is_one(), "not invertible");
    let m = Signed::from(m.clone());
    let v = ((s0 % &m) + &m) % &m;
    let (_, mag) = v.into_parts();
    mag
}

/// `t R^-1 mod p` with `R = 2^(omega n)`.
pub fn redc_oracle(t: &BigUint, p: &BigUint, cfg: RadixConfig) -> BigUint {
    let r = BigUint::one() << cfg.bits();
    (t * inverse(&(r % p), p)) % p
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform value below `bound`.
pub fn below(rng: &mut impl Rng, bound: &BigUint) -> BigUint {
    let bits = bound.bits();
    loop {
        let words: Vec<u32> = (0..bits.div_ceil(32)).map(|_| rng.gen()).collect();
        let mut x = BigUint::from_slice(&words);
        x &= (BigUint::one() << bits) - 1u32;
        if &x < bound {
            return x;
        }
    }
}

/// Random value with `len` limbs, biased towards runs of all-ones and zero limbs.
pub fn limbs(rng: &mut impl Rng, cfg: RadixConfig, len: usize) -> BigInt {
    let mask = cfg.limb_mask();
    let raw: Vec<u64> = (0..len)
        .map(|_| match rng.gen_range(0..4) {
            0 => mask,
            1 => 0,
            2 => mask - rng.gen_range(0..=mask.min(3)),
            _ => rng.gen::<u64>() & mask,
        })
        .collect();
    BigInt::from_limbs(raw, cfg).unwrap()
}
