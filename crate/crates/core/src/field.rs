//! Prime-field arithmetic in Montgomery representation over a selectable
//! reduction back end.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limbs::{
    add_carry_propagate, mul_karatsuba, mul_schoolbook, rem_oracle, sub_borrow_propagate, BigInt, RadixConfig,
};
use crate::mont_generic::{lazy_fold, redc_proposed, redc_reference_traced, PrimeContext};
use crate::mont_special::{r_exceeds_4p, redc_friendly_proposed, redc_friendly_reference_traced, FriendlyContext};
use crate::simd_add::{simd_add, simd_sub, AddStrategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Backend {
    GenericReference,
    GenericProposed,
    FriendlyReference,
    FriendlyProposed,
}

impl Backend {
    pub const ALL: [Backend; 4] =
        [Backend::GenericReference, Backend::GenericProposed, Backend::FriendlyReference, Backend::FriendlyProposed];

    pub fn name(self) -> &'static str {
        match self {
            Backend::GenericReference => "generic-reference",
            Backend::GenericProposed => "generic-proposed",
            Backend::FriendlyReference => "friendly-reference",
            Backend::FriendlyProposed => "friendly-proposed",
        }
    }

    pub fn is_friendly(self) -> bool {
        matches!(self, Backend::FriendlyReference | Backend::FriendlyProposed)
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Backend::ALL.into_iter().find(|b| b.name() == s).ok_or_else(|| Error::UnknownBackend(s.to_string()))
    }
}

impl TryFrom<String> for Backend {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Backend> for String {
    fn from(b: Backend) -> String {
        b.name().to_string()
    }
}

/// How field additions and subtractions propagate carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AddMode {
    CarryPropagate,
    Simd(AddStrategy),
}

/// How the product ahead of each reduction is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MulMode {
    Schoolbook,
    Karatsuba { threshold: usize },
}

#[derive(Clone, Debug)]
enum Reducer {
    Generic(PrimeContext),
    Friendly(FriendlyContext),
}

static NEXT_ID: AtomicU64 = AtomicU64::new(0);

#[derive(Clone, Debug)]
pub struct FieldContext {
    id: u64,
    backend: Backend,
    reducer: Reducer,
    p: BigInt,
    two_p: BigInt,
    r2: BigInt,
    lazy: bool,
    add_mode: AddMode,
    mul_mode: MulMode,
}

/// A residue in Montgomery form, tied to the context that made it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    value: BigInt,
    ctx: u64,
}

impl FieldElement {
    /// The stored Montgomery representative (below `2p` in lazy mode).
    pub fn value(&self) -> &BigInt {
        &self.value
    }
}

impl FieldContext {
    pub fn new(p: &BigInt, cfg: RadixConfig, backend: Backend) -> Result<Self> {
        let reducer = if backend.is_friendly() {
            let ctx = FriendlyContext::new(p, cfg)
                .map_err(|e| Error::BackendUnavailable { backend: backend.to_string(), reason: e.to_string() })?;
            if backend == Backend::FriendlyProposed && !ctx.admissible() {
                return Err(Error::BackendUnavailable {
                    backend: backend.to_string(),
                    reason: Error::Inadmissible { split: ctx.hi_split(), limit: ctx.split_limit() }.to_string(),
                });
            }
            Reducer::Friendly(ctx)
        } else {
            Reducer::Generic(PrimeContext::new(p, cfg)?)
        };
        let n = cfg.limbs();
        let p = p.in_config(cfg)?;
        let big_r = BigInt::pow2(cfg.bits(), cfg);
        let r2 = rem_oracle(&(&big_r * &big_r), &p)?.with_len(n);
        Ok(FieldContext {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            backend,
            reducer,
            two_p: p.shl_bits(1).trimmed(),
            p,
            r2,
            lazy: false,
            add_mode: AddMode::Simd(AddStrategy::default_for(cfg.omega())),
            mul_mode: MulMode::Schoolbook,
        })
    }

    /// Keeps residues in `[0, 2p)`; requires `R > 4p`.
    pub fn with_lazy(mut self, lazy: bool) -> Result<Self> {
        if lazy && !r_exceeds_4p(&self.p, self.cfg()) {
            return Err(Error::LazyNotAllowed);
        }
        self.lazy = lazy;
        Ok(self)
    }

    pub fn with_add_mode(mut self, mode: AddMode) -> Result<Self> {
        if let AddMode::Simd(s) = mode {
            s.validate(self.cfg().omega())?;
        }
        self.add_mode = mode;
        Ok(self)
    }

    pub fn with_mul_mode(mut self, mode: MulMode) -> Result<Self> {
        if mode == (MulMode::Karatsuba { threshold: 0 }) {
            return Err(Error::KaratsubaThreshold);
        }
        self.mul_mode = mode;
        Ok(self)
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn cfg(&self) -> RadixConfig {
        self.p.cfg()
    }

    pub fn lazy(&self) -> bool {
        self.lazy
    }

    fn n(&self) -> usize {
        self.cfg().limbs()
    }

    fn element(&self, value: BigInt) -> Result<FieldElement> {
        Ok(FieldElement { value: value.in_config(self.cfg())?, ctx: self.id })
    }

    fn widened(&self, x: &BigInt, width: usize) -> Result<BigInt> {
        x.in_config(self.cfg().with_limbs(width)?)
    }

    fn check(&self, x: &FieldElement) -> Result<()> {
        if x.ctx != self.id {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    /// `T R^-1 mod p`, left below `2p` in lazy mode.
    pub fn redc(&self, t: &BigInt) -> Result<BigInt> {
        let (full, pre) = match (&self.reducer, self.backend) {
            (Reducer::Generic(ctx), Backend::GenericReference) => {
                let (out, tr) = redc_reference_traced(t, ctx)?;
                (out, tr.pre_correction)
            }
            (Reducer::Generic(ctx), _) => {
                let (out, tr) = redc_proposed(t, ctx)?;
                (out, tr.pre_correction)
            }
            (Reducer::Friendly(ctx), Backend::FriendlyReference) => {
                let (out, tr) = redc_friendly_reference_traced(t, ctx)?;
                (out, tr.pre_correction)
            }
            (Reducer::Friendly(ctx), _) => {
                let (out, tr) = redc_friendly_proposed(t, ctx)?;
                (out, tr.pre_correction)
            }
        };
        Ok(if self.lazy { lazy_fold(&pre, &self.p).with_len(self.n()) } else { full })
    }

    fn product(&self, a: &BigInt, b: &BigInt) -> Result<BigInt> {
        let p = match self.mul_mode {
            MulMode::Schoolbook => mul_schoolbook(a, b)?,
            MulMode::Karatsuba { threshold } => mul_karatsuba(a, b, threshold)?,
        };
        Ok(p.value)
    }

    fn add(&self, a: &BigInt, b: &BigInt, width: usize) -> Result<BigInt> {
        let (a, b) = (self.widened(a, width)?, self.widened(b, width)?);
        Ok(match self.add_mode {
            AddMode::CarryPropagate => add_carry_propagate(&a, &b)?.sum,
            AddMode::Simd(s) => simd_add(&a, &b, s)?.0,
        })
    }

    /// `(a - b, borrow)` over `width` limbs.
    fn sub(&self, a: &BigInt, b: &BigInt, width: usize) -> Result<(BigInt, u8)> {
        let (a, b) = (self.widened(a, width)?, self.widened(b, width)?);
        Ok(match self.add_mode {
            AddMode::CarryPropagate => {
                let r = sub_borrow_propagate(&a, &b)?;
                (r.diff, r.borrow_out)
            }
            AddMode::Simd(s) => {
                let r = simd_sub(&a, &b, s)?;
                (r.diff, r.borrow_out)
            }
        })
    }

    /// Upper bound on stored representatives.
    fn bound(&self) -> &BigInt {
        if self.lazy {
            &self.two_p
        } else {
            &self.p
        }
    }

    pub fn to_mont(&self, a: &BigInt) -> Result<FieldElement> {
        if *a >= self.p {
            return Err(Error::InputBound { value: a.to_hex(), bound: format!("p = {}", self.p.to_hex()) });
        }
        let t = self.product(&a.in_config(self.cfg())?, &self.r2)?;
        self.element(self.redc(&t)?)
    }

    pub fn from_mont(&self, x: &FieldElement) -> Result<BigInt> {
        self.check(x)?;
        let v = self.redc(&x.value)?;
        self.normalize_value(&v)?.in_config(self.cfg())
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { value: BigInt::zero(self.cfg()).with_len(self.n()), ctx: self.id }
    }

    pub fn one(&self) -> Result<FieldElement> {
        self.to_mont(&BigInt::one(self.cfg()))
    }

    pub fn fmul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        let t = self.product(&a.value, &b.value)?;
        self.element(self.redc(&t)?)
    }

    pub fn fsqr(&self, a: &FieldElement) -> Result<FieldElement> {
        self.fmul(a, a)
    }

    pub fn fadd(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        let width = self.n() + 1;
        let s = self.add(&a.value, &b.value, width)?;
        let (d, borrow) = self.sub(&s, self.bound(), width)?;
        let out = if borrow == 0 { d } else { s };
        self.element(out.trimmed())
    }

    pub fn fsub(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        let width = self.n() + 1;
        let (d, borrow) = self.sub(&a.value, &b.value, width)?;
        let out = if borrow == 0 {
            d
        } else {
            // wraps back into range modulo 2^{omega width}
            self.add(&d, self.bound(), width)?
        };
        self.element(out.trimmed())
    }

    fn normalize_value(&self, v: &BigInt) -> Result<BigInt> {
        let width = self.n() + 1;
        let (d, borrow) = self.sub(v, &self.p, width)?;
        Ok(if borrow == 0 { d.trimmed() } else { v.clone() })
    }

    /// The canonical representative, below `p`.
    pub fn normalize(&self, x: &FieldElement) -> Result<FieldElement> {
        self.check(x)?;
        self.element(self.normalize_value(&x.value)?)
    }

    pub fn feq(&self, a: &FieldElement, b: &FieldElement) -> Result<bool> {
        Ok(self.normalize(a)?.value == self.normalize(b)?.value)
    }

    /// Wraps a raw representative, which must lie below the mode's bound.
    pub fn from_raw(&self, value: &BigInt) -> Result<FieldElement> {
        if value >= self.bound() {
            return Err(Error::InputBound { value: value.to_hex(), bound: self.bound().to_hex() });
        }
        self.element(value.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(backend: Backend) -> FieldContext {
        let cfg = RadixConfig::new(4, 4).unwrap();
        FieldContext::new(&BigInt::from_u64(62207, cfg), cfg, backend).unwrap()
    }

    fn int(x: u64) -> BigInt {
        BigInt::from_u64(x, RadixConfig::new(4, 4).unwrap())
    }

    #[test]
    fn backend_names() {
        for b in Backend::ALL {
            assert_eq!(b.name().parse::<Backend>().unwrap(), b);
        }
        assert!("montgomery".parse::<Backend>().is_err());
    }

    #[test]
    fn representation_round_trip() {
        for b in Backend::ALL {
            let f = toy(b);
            assert!(f.to_mont(&int(0)).unwrap().value().is_zero());
            assert_eq!(f.to_mont(&int(1)).unwrap().value().to_u128(), Some(65536 % 62207));
            for x in [2u64, 12345, 62206] {
                assert_eq!(f.from_mont(&f.to_mont(&int(x)).unwrap()).unwrap().to_u128(), Some(x as u128));
            }
            assert!(f.to_mont(&int(62207)).is_err());
        }
    }

    #[test]
    fn arithmetic_matches_integers() {
        for b in Backend::ALL {
            let f = toy(b);
            let (x, y) = (40000u64, 55555u64);
            let (a, c) = (f.to_mont(&int(x)).unwrap(), f.to_mont(&int(y)).unwrap());
            let get = |e: &FieldElement| f.from_mont(e).unwrap().to_u128().unwrap() as u64;
            assert_eq!(get(&f.fmul(&a, &c).unwrap()), x * y % 62207);
            assert_eq!(get(&f.fsqr(&a).unwrap()), x * x % 62207);
            assert_eq!(get(&f.fadd(&a, &c).unwrap()), (x + y) % 62207);
            assert_eq!(get(&f.fsub(&a, &c).unwrap()), (x + 62207 - y) % 62207);
            assert!(f.feq(&f.fsub(&a, &a).unwrap(), &f.zero()).unwrap());
            assert_eq!(f.fmul(&a, &f.one().unwrap()).unwrap(), a);
        }
    }

    #[test]
    fn friendly_backends_need_friendly_primes() {
        let cfg = RadixConfig::new(4, 4).unwrap();
        let p = BigInt::from_u64(65521, cfg);
        assert!(FieldContext::new(&p, cfg, Backend::GenericProposed).is_ok());
        assert!(matches!(
            FieldContext::new(&p, cfg, Backend::FriendlyReference),
            Err(Error::BackendUnavailable { .. })
        ));
    }

    #[test]
    fn lazy_requires_headroom() {
        assert_eq!(toy(Backend::GenericReference).with_lazy(true).unwrap_err(), Error::LazyNotAllowed);
        let cfg = RadixConfig::new(4, 4).unwrap();
        let p = BigInt::from_u64(0x2fff, cfg);
        let f = FieldContext::new(&p, cfg, Backend::FriendlyProposed).unwrap().with_lazy(true).unwrap();
        let a = f.to_mont(&BigInt::from_u64(77, cfg)).unwrap();
        let lifted = f.from_raw(&(a.value() + &p)).unwrap();
        assert!(f.feq(&a, &lifted).unwrap());
        assert_eq!(f.from_mont(&lifted).unwrap().to_u128(), Some(77));
    }

    #[test]
    fn contexts_do_not_mix() {
        let (f, g) = (toy(Backend::GenericReference), toy(Backend::GenericReference));
        let a = f.to_mont(&int(5)).unwrap();
        let b = g.to_mont(&int(5)).unwrap();
        assert_eq!(f.fmul(&a, &b), Err(Error::ContextMismatch));
    }
}
