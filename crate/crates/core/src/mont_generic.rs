//! Montgomery reduction for arbitrary odd moduli.
//!
//! [`redc_reference`] is the textbook word-serial loop. [`redc_proposed`]
//! folds the lowest `n - 2` limbs of `T` in one parallel pass of `n x 1`
//! products against precomputed constants `M_i = r^{i+1-n} mod p`, leaving
//! only two serial steps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lanes::{LaneMachine, LaneVector, OpCounts};
use crate::limbs::{divmod_oracle, modinv_oracle, rem_oracle, shift_limbs, BigInt, RadixConfig};
use crate::simd_add::{simd_add_in, simd_sub_in, AddStrategy};

/// Precomputed constants for reducing modulo one odd `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeContext {
    p: BigInt,
    cfg: RadixConfig,
    p_prime: u64,
    m: Vec<BigInt>,
    r2: BigInt,
    lazy_ok: bool,
    strategy: AddStrategy,
}

impl PrimeContext {
    pub fn new(p: &BigInt, cfg: RadixConfig) -> Result<Self> {
        Self::build(p, cfg, |_, _| {})
    }

    /// Like [`PrimeContext::new`], but lets `tamper` alter each `M_i` before
    /// the consistency check. Exists to exercise the failure path.
    #[doc(hidden)]
    pub fn new_with_tamper(p: &BigInt, cfg: RadixConfig, tamper: impl Fn(usize, &mut BigInt)) -> Result<Self> {
        Self::build(p, cfg, tamper)
    }

    fn build(p: &BigInt, cfg: RadixConfig, tamper: impl Fn(usize, &mut BigInt)) -> Result<Self> {
        if p.omega() != cfg.omega() {
            return Err(Error::RadixMismatch { left: p.omega(), right: cfg.omega() });
        }
        if p.is_zero() || p.bit_len() > cfg.bits() {
            return Err(Error::ModulusRange { bits: cfg.bits() });
        }
        if !p.is_odd() {
            return Err(Error::EvenModulus);
        }
        let n = cfg.limbs();
        let p = p.clone().with_len(n);
        let r = BigInt::pow2(cfg.omega() as usize, cfg);
        let one = BigInt::one(cfg);

        // r^-1 taken in [1, p] so that p = 1 still yields p' = r - 1
        let mut r_inv = modinv_oracle(&rem_oracle(&r, &p)?, &p)?;
        if r_inv.is_zero() {
            r_inv = p.clone();
        }
        let numerator = &(&r * &r_inv) - &one;
        let div = divmod_oracle(&numerator, &p)?;
        debug_assert!(div.remainder.is_zero());
        let p_prime = div.quotient.limb(0);

        let big_r = BigInt::pow2(cfg.bits(), cfg);
        let r2 = rem_oracle(&(&big_r * &big_r), &p)?.with_len(n);
        let four_p = p.shl_bits(2);
        let lazy_ok = big_r > four_p;

        let mut ctx = PrimeContext {
            p: p.clone(),
            cfg,
            p_prime,
            m: Vec::new(),
            r2,
            lazy_ok,
            strategy: AddStrategy::default_for(cfg.omega()),
        };

        // M_i = REDC(r^{i+1}) = r^{i+1-n} mod p, checked against the inverse-power oracle
        for i in 1..n.saturating_sub(1) {
            let mut mi = redc_reference(&BigInt::pow2((i + 1) * cfg.omega() as usize, cfg), &ctx)?;
            tamper(i, &mut mi);
            let power = BigInt::pow2((n - i - 1) * cfg.omega() as usize, cfg);
            if mi >= p || rem_oracle(&(&mi * &power), &p)? != rem_oracle(&one, &p)? {
                return Err(Error::PrecomputeMismatch { index: i });
            }
            ctx.m.push(mi.with_len(n));
        }
        Ok(ctx)
    }

    /// Selects the addition strategy used for the internal multi-limb sums.
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

    pub fn p_prime(&self) -> u64 {
        self.p_prime
    }

    /// `M_1..M_{n-2}`; `m()[0]` is `M_1`.
    pub fn m(&self) -> &[BigInt] {
        &self.m
    }

    /// `R^2 mod p`.
    pub fn r2(&self) -> &BigInt {
        &self.r2
    }

    /// Whether `R > 4p`, which permits keeping residues below `2p`.
    pub fn lazy_ok(&self) -> bool {
        self.lazy_ok
    }

    pub fn strategy(&self) -> AddStrategy {
        self.strategy
    }

    /// `p * R`, the exclusive upper bound on reduction inputs.
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
}

/// Intermediate values of one reduction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RedcTrace {
    /// Low limbs `T_1..T_{n-2}` folded by the parallel pass (1-indexed as `t_limbs[i - 1]`).
    pub t_limbs: Vec<u64>,
    /// `H_i = M_i * T_i`, same indexing as `t_limbs`.
    pub h: Vec<BigInt>,
    /// Superscript of the first entry of `t_steps`.
    pub first_step: usize,
    /// `T^(first_step)..T^(n)`.
    pub t_steps: Vec<BigInt>,
    /// Quotient digit of each serial step.
    pub q_steps: Vec<u64>,
    /// `(T^(i-1) + Q p) mod r` of each serial step; always zero.
    pub remainders: Vec<u64>,
    /// `T^(n)` before any conditional subtraction.
    pub pre_correction: BigInt,
    pub corrections: u8,
    /// The second conditional subtraction was provably unnecessary and not executed.
    pub second_check_skipped: bool,
    /// `n <= 2`, so the reference loop ran instead.
    pub delegated: bool,
    pub counts: OpCounts,
}

impl RedcTrace {
    /// `T^(i)` if the trace recorded it.
    pub fn t_step(&self, i: usize) -> Option<&BigInt> {
        i.checked_sub(self.first_step).and_then(|k| self.t_steps.get(k))
    }
}

/// Splits `m * scalar` into per-lane high and low halves.
pub fn simd_mul_nx1(m: &BigInt, scalar: u64) -> Result<(LaneVector, LaneVector)> {
    let mut mach = LaneMachine::new();
    simd_mul_nx1_in(&mut mach, m, scalar)
}

pub(crate) fn simd_mul_nx1_in(mach: &mut LaneMachine, m: &BigInt, scalar: u64) -> Result<(LaneVector, LaneVector)> {
    let omega = m.omega();
    let count = m.len().max(1);
    let mv = mach.load(m.limbs().to_vec(), omega)?;
    let z = mach.broadcast(scalar, count, omega)?;
    mach.mul_wide(&mv, &z)
}

/// `sum_j U_j r^{j+1} + sum_j Y_j r^j` added into `acc` with carry simulation.
fn accumulate_columns(
    mach: &mut LaneMachine,
    acc: BigInt,
    u: &LaneVector,
    y: &LaneVector,
    cfg: RadixConfig,
    strategy: AddStrategy,
) -> Result<BigInt> {
    let y = BigInt::from_limbs(y.lanes().to_vec(), cfg)?;
    let u = shift_limbs(&BigInt::from_limbs(u.lanes().to_vec(), cfg)?, -1);
    let (acc, _) = simd_add_in(mach, &acc, &y, strategy)?;
    let (acc, _) = simd_add_in(mach, &acc, &u, strategy)?;
    Ok(acc)
}

struct Step {
    q: u64,
    remainder: u64,
    next: BigInt,
}

/// One word-serial step `T <- (T + Q p) / r` with `Q = T p' mod r`.
fn partial_step(mach: &mut LaneMachine, t: &BigInt, ctx: &PrimeContext) -> Result<Step> {
    let omega = ctx.cfg.omega();
    let t0 = mach.load(vec![t.limb(0)], omega)?;
    let pp = LaneVector::new(vec![ctx.p_prime], omega)?;
    let q = mach.mul_lo(&t0, &pp)?.get(0);
    let (u, y) = simd_mul_nx1_in(mach, &ctx.p, q)?;
    let width = t.significant_limbs().max(ctx.cfg.limbs() + 1) + 1;
    let acc = accumulate_columns(mach, t.with_len(width), &u, &y, ctx.cfg, ctx.strategy)?;
    let remainder = acc.limb(0);
    if remainder != 0 {
        return Err(Error::Divisibility(format!("{remainder:#x} after dividing by r")));
    }
    Ok(Step { q, remainder, next: shift_limbs(&acc, 1).trimmed() })
}

/// Conditionally subtracts `p` via a carry-simulated subtraction.
fn correct(mach: &mut LaneMachine, x: &BigInt, ctx: &PrimeContext) -> Result<(BigInt, bool)> {
    let width = x.significant_limbs().max(ctx.cfg.limbs());
    let sub = simd_sub_in(mach, &x.with_len(width), &ctx.p, ctx.strategy)?;
    if sub.borrow_out == 0 {
        Ok((sub.diff.trimmed(), true))
    } else {
        Ok((x.clone(), false))
    }
}

/// `T R^-1 mod p` by the word-serial loop.
pub fn redc_reference(t: &BigInt, ctx: &PrimeContext) -> Result<BigInt> {
    Ok(redc_reference_traced(t, ctx)?.0)
}

pub fn redc_reference_traced(t: &BigInt, ctx: &PrimeContext) -> Result<(BigInt, RedcTrace)> {
    ctx.check_input(t)?;
    let mut mach = LaneMachine::new();
    let n = ctx.cfg.limbs();
    let omega = ctx.cfg.omega() as usize;
    let mut cur = t.clone().trimmed();
    let mut trace = RedcTrace {
        t_limbs: Vec::new(),
        h: Vec::new(),
        first_step: 0,
        t_steps: vec![cur.clone()],
        q_steps: Vec::new(),
        remainders: Vec::new(),
        pre_correction: BigInt::zero(ctx.cfg),
        corrections: 0,
        second_check_skipped: false,
        delegated: false,
        counts: OpCounts::default(),
    };
    for i in 1..=n {
        let step = partial_step(&mut mach, &cur, ctx)?;
        // T^(i) < p r^{n-i} + p
        let bound = &ctx.p.shl_bits((n - i) * omega) + &ctx.p;
        if step.next >= bound {
            return Err(Error::BoundViolation(format!("T^({i}) = {} >= p r^(n-i) + p", step.next.to_hex())));
        }
        trace.q_steps.push(step.q);
        trace.remainders.push(step.remainder);
        trace.t_steps.push(step.next.clone());
        cur = step.next;
    }
    trace.pre_correction = cur.clone();
    let (out, took) = correct(&mut mach, &cur, ctx)?;
    trace.corrections = took as u8;
    trace.counts = mach.into_counts();
    Ok((out.with_len(n), trace))
}

/// Whether `T >= pR - (n-2) r^{n-1} p`, i.e. whether the second conditional
/// subtraction of [`redc_proposed`] may be needed.
pub fn needs_second_correction(t: &BigInt, ctx: &PrimeContext) -> bool {
    let n = ctx.cfg.limbs();
    let omega = ctx.cfg.omega() as usize;
    let slack = &BigInt::from_u64(n.saturating_sub(2) as u64, ctx.cfg) * &ctx.p.shl_bits((n - 1) * omega);
    let threshold = &ctx.input_bound() - &slack;
    *t >= threshold
}

/// `T R^-1 mod p` with the low `n - 2` limbs folded in parallel.
pub fn redc_proposed(t: &BigInt, ctx: &PrimeContext) -> Result<(BigInt, RedcTrace)> {
    ctx.check_input(t)?;
    let n = ctx.cfg.limbs();
    if n <= 2 {
        let (out, mut trace) = redc_reference_traced(t, ctx)?;
        trace.delegated = true;
        return Ok((out, trace));
    }
    let cfg = ctx.cfg;
    let omega = cfg.omega() as usize;
    let mut mach = LaneMachine::new();

    let t_limbs: Vec<u64> = (0..n - 2).map(|i| t.limb(i)).collect();
    let mut acc = shift_limbs(t, (n - 2) as isize).with_len(n + 3);
    let mut h = Vec::with_capacity(n - 2);
    for (mi, &ti) in ctx.m.iter().zip(&t_limbs) {
        let (u, y) = simd_mul_nx1_in(&mut mach, mi, ti)?;
        acc = accumulate_columns(&mut mach, acc, &u, &y, cfg, ctx.strategy)?;
        let hi = &shift_limbs(&BigInt::from_limbs(u.lanes().to_vec(), cfg)?, -1)
            + &BigInt::from_limbs(y.lanes().to_vec(), cfg)?;
        h.push(hi.trimmed());
    }
    let mut cur = acc.trimmed();

    // T^(n-2) < r^2 p + (n-2) r p
    let bound = &ctx.p.shl_bits(2 * omega) + &(&BigInt::from_u64((n - 2) as u64, cfg) * &ctx.p.shl_bits(omega));
    if cur >= bound {
        return Err(Error::BoundViolation(format!("T^(n-2) = {} >= r^2 p + (n-2) r p", cur.to_hex())));
    }

    let mut trace = RedcTrace {
        t_limbs,
        h,
        first_step: n - 2,
        t_steps: vec![cur.clone()],
        q_steps: Vec::new(),
        remainders: Vec::new(),
        pre_correction: BigInt::zero(cfg),
        corrections: 0,
        second_check_skipped: false,
        delegated: false,
        counts: OpCounts::default(),
    };
    for _ in 0..2 {
        let step = partial_step(&mut mach, &cur, ctx)?;
        trace.q_steps.push(step.q);
        trace.remainders.push(step.remainder);
        trace.t_steps.push(step.next.clone());
        cur = step.next;
    }

    let three_p = &ctx.p + &ctx.p.shl_bits(1);
    if cur >= three_p {
        return Err(Error::BoundViolation(format!("T^(n) = {} >= 3p", cur.to_hex())));
    }
    trace.pre_correction = cur.clone();

    let (once, took) = correct(&mut mach, &cur, ctx)?;
    trace.corrections = took as u8;
    let out = if needs_second_correction(t, ctx) {
        let (twice, took) = correct(&mut mach, &once, ctx)?;
        trace.corrections += took as u8;
        twice
    } else {
        trace.second_check_skipped = true;
        if once >= ctx.p {
            return Err(Error::BoundViolation(format!(
                "T^(n) = {} >= 2p although T < pR - (n-2) r^(n-1) p",
                cur.to_hex()
            )));
        }
        once
    };
    trace.counts = mach.into_counts();
    Ok((out.with_len(n), trace))
}

/// Reduces a pre-correction value below `2p`.
pub(crate) fn lazy_fold(x: &BigInt, p: &BigInt) -> BigInt {
    let two_p = p.shl_bits(1);
    let mut x = x.clone();
    while x >= two_p {
        x = &x - p;
    }
    x
}
