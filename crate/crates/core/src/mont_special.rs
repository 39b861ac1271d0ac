//! Montgomery reduction for primes `p = 2^l F - 1`.
//!
//! Because `p + 1 = 2^l F`, the quotient digit of each step is read straight
//! off `T` and the product with `p` becomes a product with `F` shifted by `l`.
//! The reference takes `m`-limb steps. The proposed variant takes two
//! half-width steps whose operands have equal length, so each product can use
//! Karatsuba.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lanes::{LaneMachine, OpCounts};
use crate::limbs::{mul_karatsuba, mul_schoolbook, rem_oracle, BigInt, RadixConfig};
use crate::simd_add::{simd_add_in, simd_sub_in, AddStrategy};

/// Constants for one Montgomery-friendly modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FriendlyContext {
    p: BigInt,
    cfg: RadixConfig,
    ell: usize,
    f: BigInt,
    lambda: usize,
    m: usize,
    big_m: BigInt,
    lambda0: usize,
    lambda0_prime: usize,
    hi_split: usize,
    lo_split: usize,
    karatsuba_threshold: usize,
    strategy: AddStrategy,
}

impl FriendlyContext {
    /// Reads `l` and `F` off `p + 1`.
    pub fn new(p: &BigInt, cfg: RadixConfig) -> Result<Self> {
        if p.omega() != cfg.omega() {
            return Err(Error::RadixMismatch { left: p.omega(), right: cfg.omega() });
        }
        if p.is_zero() || p.bit_len() > cfg.bits() {
            return Err(Error::ModulusRange { bits: cfg.bits() });
        }
        if !p.is_odd() {
            return Err(Error::EvenModulus);
        }
        let omega = cfg.omega() as usize;
        let n = cfg.limbs();
        let p1 = p + &BigInt::one(cfg);
        let ell = p1.trailing_zeros().expect("p + 1 is nonzero");
        let lambda = ell / omega;
        if lambda < 2 {
            return Err(Error::NotFriendly { trailing_zeros: ell, required: 2 * omega });
        }
        let f = p1.shr_bits(ell).trimmed();
        let big_m = p1.shr_bits(lambda * omega).trimmed();

        let m = (2..=lambda.min(n)).rev().find(|d| n.is_multiple_of(*d)).unwrap_or(lambda.min(n));
        let hi_split = n.div_ceil(2) * omega;
        let lo_split = (n / 2) * omega;
        let len = n.div_ceil(2).max(f.significant_limbs());
        Ok(FriendlyContext {
            p: p.with_len(n),
            cfg,
            ell,
            f,
            lambda,
            m,
            big_m,
            lambda0: n / m,
            lambda0_prime: n % m,
            hi_split,
            lo_split,
            karatsuba_threshold: len.div_ceil(2).max(1),
            strategy: AddStrategy::default_for(cfg.omega()),
        })
    }

    /// `p = 2^ell F - 1`.
    pub fn from_parts(ell: usize, f: &BigInt, cfg: RadixConfig) -> Result<Self> {
        let p = &f.shl_bits(ell) - &BigInt::one(cfg);
        Self::new(&p.trimmed(), cfg)
    }

    /// Overrides the reference step size.
    pub fn with_step(mut self, m: usize) -> Result<Self> {
        if m < 2 || m > self.lambda {
            return Err(Error::InvalidStep { m, lambda: self.lambda });
        }
        let n = self.cfg.limbs();
        self.m = m;
        self.lambda0 = n / m;
        self.lambda0_prime = n % m;
        Ok(self)
    }

    pub fn with_karatsuba_threshold(mut self, threshold: usize) -> Result<Self> {
        if threshold == 0 {
            return Err(Error::KaratsubaThreshold);
        }
        self.karatsuba_threshold = threshold;
        Ok(self)
    }

    pub fn with_strategy(mut self, strategy: AddStrategy) -> Result<Self> {
        strategy.validate(self.cfg.omega())?;
        self.strategy = strategy;
        Ok(self)
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn cfg(&self) -> RadixConfig {
        self.cfg
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn f(&self) -> &BigInt {
        &self.f
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    /// Reference step size in limbs.
    pub fn m(&self) -> usize {
        self.m
    }

    /// `(p + 1) / 2^{lambda omega}`.
    pub fn big_m(&self) -> &BigInt {
        &self.big_m
    }

    pub fn lambda0(&self) -> usize {
        self.lambda0
    }

    pub fn lambda0_prime(&self) -> usize {
        self.lambda0_prime
    }

    /// `ceil(n/2) omega`.
    pub fn hi_split(&self) -> usize {
        self.hi_split
    }

    /// `floor(n/2) omega`.
    pub fn lo_split(&self) -> usize {
        self.lo_split
    }

    pub fn karatsuba_threshold(&self) -> usize {
        self.karatsuba_threshold
    }

    pub fn strategy(&self) -> AddStrategy {
        self.strategy
    }

    /// Upper limit on `hi_split` for the half-width variant.
    pub fn split_limit(&self) -> usize {
        (self.ell + self.cfg.omega() as usize).min(2 * self.ell)
    }

    pub fn admissible(&self) -> bool {
        self.hi_split <= self.split_limit()
    }

    pub fn input_bound(&self) -> BigInt {
        self.p.shl_bits(self.cfg.bits())
    }

    fn check_input(&self, t: &BigInt) -> Result<()> {
        if t.omega() != self.cfg.omega() {
            return Err(Error::RadixMismatch { left: t.omega(), right: self.cfg.omega() });
        }
        let bound = self.input_bound();
        if *t >= bound {
            return Err(Error::InputBound { value: t.to_hex(), bound: format!("pR = {}", bound.to_hex()) });
        }
        Ok(())
    }

    /// Karatsuba operand length for the half-width products.
    fn karatsuba_len(&self) -> usize {
        self.cfg.limbs().div_ceil(2).max(self.f.significant_limbs())
    }
}

/// Whether `R > 4p`, so residues may be kept below `2p` between operations.
pub fn lazy_mode_allowed(ctx: &FriendlyContext) -> bool {
    r_exceeds_4p(&ctx.p, ctx.cfg)
}

/// `R > 4p` for `R = 2^{omega n}`.
pub fn r_exceeds_4p(p: &BigInt, cfg: RadixConfig) -> bool {
    BigInt::pow2(cfg.bits(), cfg) > p.shl_bits(2)
}

/// Intermediate values of the reference algorithm.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FriendlyReferenceTrace {
    /// Quotient digit of each step, the last possibly narrower.
    pub q_steps: Vec<BigInt>,
    /// `T^(0)` followed by the value after each step.
    pub t_steps: Vec<BigInt>,
    pub pre_correction: BigInt,
    pub corrections: u8,
    pub limb_products: u64,
    pub counts: OpCounts,
}

/// Intermediate values of the half-width algorithm.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FriendlyTrace {
    /// `t^(1)`.
    pub t1: BigInt,
    /// `t^(2)`; absent for odd `n`.
    pub t2: Option<BigInt>,
    pub q1: BigInt,
    pub q2: BigInt,
    /// `T^(0), T^(1), T^(2)`.
    pub t_steps: Vec<BigInt>,
    /// `(T^(i-1) + p Q^(i)) mod 2^split` per step; always zero.
    pub remainders: Vec<BigInt>,
    pub karatsuba_products: u64,
    pub pre_correction: BigInt,
    pub corrections: u8,
    pub counts: OpCounts,
}

/// `T + (q F) 2^l`, with the sum carried out by carry simulation.
fn add_shifted_product(
    mach: &mut LaneMachine,
    t: &BigInt,
    qf: &BigInt,
    ell: usize,
    strategy: AddStrategy,
) -> Result<BigInt> {
    let prod = qf.shl_bits(ell);
    let width = t.significant_limbs().max(prod.significant_limbs()) + 1;
    let (sum, _) = simd_add_in(mach, &t.with_len(width), &prod, strategy)?;
    Ok(sum.trimmed())
}

fn final_correction(mach: &mut LaneMachine, x: &BigInt, p: &BigInt, strategy: AddStrategy) -> Result<(BigInt, u8)> {
    let width = x.significant_limbs().max(p.len());
    let sub = simd_sub_in(mach, &x.with_len(width), p, strategy)?;
    Ok(if sub.borrow_out == 0 { (sub.diff.trimmed(), 1) } else { (x.clone(), 0) })
}

/// `(T + p Q) mod 2^bits`, where `T + p Q = sum - Q` and `sum = T + 2^l Q F`.
fn step_remainder(sum: &BigInt, q: &BigInt, bits: usize) -> BigInt {
    let modulus_bit = BigInt::pow2(bits, sum.cfg());
    (&(&sum.low_bits(bits) + &modulus_bit) - q).low_bits(bits)
}

pub fn redc_friendly_reference(t: &BigInt, ctx: &FriendlyContext) -> Result<BigInt> {
    Ok(redc_friendly_reference_traced(t, ctx)?.0)
}

/// `T R^-1 mod p` in `m`-limb steps.
pub fn redc_friendly_reference_traced(t: &BigInt, ctx: &FriendlyContext) -> Result<(BigInt, FriendlyReferenceTrace)> {
    ctx.check_input(t)?;
    let omega = ctx.cfg.omega() as usize;
    let mut mach = LaneMachine::new();
    let mut cur = t.clone().trimmed();
    let mut trace = FriendlyReferenceTrace {
        q_steps: Vec::new(),
        t_steps: vec![cur.clone()],
        pre_correction: BigInt::zero(ctx.cfg),
        corrections: 0,
        limb_products: 0,
        counts: OpCounts::default(),
    };

    let mut widths = vec![ctx.m; ctx.lambda0];
    if ctx.lambda0_prime != 0 {
        widths.push(ctx.lambda0_prime);
    }
    for k in widths {
        let bits = k * omega;
        let q = cur.low_limbs(k);
        let prod = mul_schoolbook(&q, &ctx.f.low_limbs(ctx.f.significant_limbs().max(1)))?;
        mach.record_products(prod.limb_products);
        trace.limb_products += prod.limb_products;
        let sum = add_shifted_product(&mut mach, &cur, &prod.value, ctx.ell, ctx.strategy)?;
        let rem = step_remainder(&sum, &q, bits);
        if !rem.is_zero() {
            return Err(Error::Divisibility(rem.to_hex()));
        }
        cur = sum.shr_bits(bits).trimmed();
        trace.q_steps.push(q.trimmed());
        trace.t_steps.push(cur.clone());
    }
    trace.pre_correction = cur.clone();
    let (out, took) = final_correction(&mut mach, &cur, &ctx.p, ctx.strategy)?;
    trace.corrections = took;
    trace.counts = mach.into_counts();
    Ok((out.with_len(ctx.cfg.limbs()), trace))
}

/// `T R^-1 mod p` in two half-width steps with Karatsuba products.
pub fn redc_friendly_proposed(t: &BigInt, ctx: &FriendlyContext) -> Result<(BigInt, FriendlyTrace)> {
    ctx.check_input(t)?;
    if !ctx.admissible() {
        return Err(Error::Inadmissible { split: ctx.hi_split, limit: ctx.split_limit() });
    }
    let cfg = ctx.cfg;
    let n = cfg.limbs();
    let len = ctx.karatsuba_len();
    let f_padded = ctx.f.low_limbs(len);
    let mut mach = LaneMachine::new();
    let mut products = 0;

    let mut step = |mach: &mut LaneMachine, cur: &BigInt, bits: usize, corrected: bool| -> Result<Step> {
        let (t_corr, q) = if corrected {
            // low limb of T F; reused as the low limb of Q F below
            let low = ((cur.limb(0) as u128 * ctx.f.limb(0) as u128) & cfg.limb_mask() as u128) as u64;
            let t_corr = BigInt::from_u64(low, cfg).shl_bits(ctx.ell);
            let expected = (&cur.shl_bits(ctx.ell) * &ctx.f).low_bits(bits);
            if t_corr.low_bits(bits) != expected {
                return Err(Error::BoundViolation(format!(
                    "t = {} is not congruent to T F 2^l mod 2^{bits}",
                    t_corr.to_hex()
                )));
            }
            let q = (cur + &t_corr).low_bits(bits);
            (Some((t_corr.trimmed(), low)), q)
        } else {
            (None, cur.low_bits(bits))
        };
        let prod = mul_karatsuba(&q.low_limbs(len), &f_padded, ctx.karatsuba_threshold)?;
        if let Some((_, low)) = &t_corr {
            debug_assert_eq!(prod.value.limb(0), *low);
        }
        mach.record_products(prod.limb_products);
        products += prod.limb_products;
        let sum = add_shifted_product(mach, cur, &prod.value, ctx.ell, ctx.strategy)?;
        let remainder = step_remainder(&sum, &q, bits);
        if !remainder.is_zero() {
            return Err(Error::Divisibility(remainder.to_hex()));
        }
        Ok(Step { t: t_corr.map(|(t, _)| t), q: q.trimmed(), remainder, next: sum.shr_bits(bits).trimmed() })
    };

    let t0 = t.clone().trimmed();
    let s1 = step(&mut mach, &t0, ctx.hi_split, true)?;
    let s2 = if n % 2 == 1 {
        step(&mut mach, &s1.next, ctx.lo_split, false)?
    } else {
        step(&mut mach, &s1.next, ctx.hi_split, true)?
    };

    let two_p = ctx.p.shl_bits(1);
    if s2.next >= two_p {
        return Err(Error::BoundViolation(format!("T^(2) = {} >= 2p", s2.next.to_hex())));
    }
    let (out, corrections) = final_correction(&mut mach, &s2.next, &ctx.p, ctx.strategy)?;
    let trace = FriendlyTrace {
        t1: s1.t.unwrap_or_else(|| BigInt::zero(cfg)),
        t2: s2.t,
        q1: s1.q,
        q2: s2.q,
        t_steps: vec![t0, s1.next, s2.next.clone()],
        remainders: vec![s1.remainder, s2.remainder],
        karatsuba_products: products,
        pre_correction: s2.next,
        corrections,
        counts: mach.into_counts(),
    };
    Ok((out.with_len(n), trace))
}

struct Step {
    t: Option<BigInt>,
    q: BigInt,
    remainder: BigInt,
    next: BigInt,
}

/// Checks the partial-reduction congruences `T^(1) 2^hi = T` and
/// `T^(2) R = T (mod p)` of a half-width trace against the division oracle.
pub fn verify_partial_reductions(t: &BigInt, trace: &FriendlyTrace, ctx: &FriendlyContext) -> Result<()> {
    let p = &ctx.p;
    let want = rem_oracle(t, p)?;
    let lhs1 = rem_oracle(&trace.t_steps[1].shl_bits(ctx.hi_split), p)?;
    let lhs2 = rem_oracle(&trace.t_steps[2].shl_bits(ctx.cfg.bits()), p)?;
    if lhs1 != want {
        return Err(Error::BoundViolation("T^(1) is not redc(T, hi_split)".into()));
    }
    if lhs2 != want {
        return Err(Error::BoundViolation("T^(2) is not redc(T, n omega)".into()));
    }
    Ok(())
}
