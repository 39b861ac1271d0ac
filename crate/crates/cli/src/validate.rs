//! Oracle-equivalence and invariant suites behind `simd-redc validate`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use simd_redc::field::{AddMode, Backend, FieldContext, FieldElement};
use simd_redc::lanes::kogge_stone_carries;
use simd_redc::limbs::{add_carry_propagate, modinv_oracle, rem_oracle, sub_borrow_propagate};
use simd_redc::mont_generic::{needs_second_correction, redc_proposed, redc_reference, PrimeContext};
use simd_redc::mont_special::{
    r_exceeds_4p, redc_friendly_proposed, redc_friendly_reference, verify_partial_reductions, FriendlyContext,
};
use simd_redc::simd_add::{simd_add, simd_sub, AddStrategy};
use simd_redc::{BigInt, RadixConfig};

use crate::config::{AddChoice, Resolved};

const MAX_REPORTED: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: usize,
    pub total: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult { name: name.to_string(), passed: 0, total: 0, skipped: None, failures: Vec::new() }
    }

    fn skipped(name: &str, why: impl Into<String>) -> Self {
        SuiteResult { skipped: Some(why.into()), ..Self::new(name) }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.failures.len() < MAX_REPORTED {
            self.failures.push(what());
        }
    }

    fn record_result<T>(&mut self, r: simd_redc::Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => {
                self.total += 1;
                self.passed += 1;
                Some(v)
            }
            Err(e) => {
                self.record(false, || format!("{}: {e}", what()));
                None
            }
        }
    }

    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub prime: String,
    pub modulus: BigInt,
    pub omega: u32,
    pub limbs: usize,
    pub add_strategy: String,
    pub seed: u64,
    pub trials: usize,
    pub suites: Vec<SuiteResult>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "prime {} = {} (omega={}, limbs={})\nadd strategy {}, seed {}, trials {}\n",
            self.prime,
            self.modulus.to_hex(),
            self.omega,
            self.limbs,
            self.add_strategy,
            self.seed,
            self.trials
        );
        for s in &self.suites {
            match &s.skipped {
                Some(why) => out.push_str(&format!("suite {:<20} skipped: {why}\n", s.name)),
                None => {
                    let tag = if s.ok() { "ok" } else { "FAILED" };
                    out.push_str(&format!("suite {:<20} {}/{} passed {tag}\n", s.name, s.passed, s.total));
                }
            }
            for f in &s.failures {
                out.push_str(&format!("  failure: {f}\n"));
            }
        }
        out.push_str(if self.passed { "result: PASS\n" } else { "result: FAIL\n" });
        out
    }
}

struct Oracle {
    p: BigInt,
    r_inv: BigInt,
}

impl Oracle {
    fn new(p: &BigInt, cfg: RadixConfig) -> simd_redc::Result<Self> {
        let r = rem_oracle(&BigInt::pow2(cfg.bits(), cfg), p)?;
        Ok(Oracle { p: p.clone(), r_inv: modinv_oracle(&r, p)? })
    }

    /// `t R^-1 mod p` by long division and the extended Euclidean inverse.
    fn redc(&self, t: &BigInt) -> BigInt {
        let t = rem_oracle(t, &self.p).unwrap();
        rem_oracle(&(&t * &self.r_inv), &self.p).unwrap()
    }

    fn mulmod(&self, a: &BigInt, b: &BigInt) -> BigInt {
        rem_oracle(&(a * b), &self.p).unwrap()
    }
}

pub(crate) fn random_limbs(rng: &mut impl Rng, cfg: RadixConfig, len: usize) -> BigInt {
    let mask = cfg.limb_mask();
    let limbs = (0..len)
        .map(|_| match rng.gen_range(0..6) {
            0 => mask,
            1 => 0,
            _ => rng.gen::<u64>() & mask,
        })
        .collect();
    BigInt::from_limbs(limbs, cfg.with_limbs(len).unwrap()).unwrap()
}

/// A value below `bound`, reduced from a draw with 64 extra bits.
pub(crate) fn random_below(rng: &mut impl Rng, bound: &BigInt) -> BigInt {
    let cfg = bound.cfg();
    let len = bound.bit_len().div_ceil(cfg.omega() as usize) + 64usize.div_ceil(cfg.omega() as usize);
    let mut raw = Vec::with_capacity(len);
    for _ in 0..len {
        raw.push(rng.gen::<u64>() & cfg.limb_mask());
    }
    let x = BigInt::from_limbs(raw, cfg.with_limbs(len).unwrap()).unwrap();
    rem_oracle(&x, bound).unwrap()
}

pub(crate) fn rng_for(seed: u64, suite: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ suite.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn strategies(add: AddChoice, omega: u32) -> Vec<AddStrategy> {
    let mut out = vec![AddStrategy::NativePopcount];
    if omega < 64 {
        out.extend([AddStrategy::ReducedPopcount(omega), AddStrategy::ReducedSaturate(omega)]);
    }
    if let AddChoice::Simd(s) = add {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

fn addition_suite(r: &Resolved) -> SuiteResult {
    let mut s = SuiteResult::new("addition");
    let mut rng = rng_for(r.seed, 1);
    let n = r.cfg.limbs();
    let strategies = strategies(r.add, r.cfg.omega());
    for _ in 0..r.trials {
        let (a, b) = (random_limbs(&mut rng, r.cfg, n), random_limbs(&mut rng, r.cfg, n));
        let expected = add_carry_propagate(&a, &b).unwrap();
        let diff = sub_borrow_propagate(&a, &b).unwrap();
        for &st in &strategies {
            if let Some((sum, trace)) = s.record_result(simd_add(&a, &b, st), || format!("{st} add")) {
                s.record(sum == expected.sum && trace.c == expected.carries, || {
                    format!("{st}: {} + {}", a.to_hex(), b.to_hex())
                });
            }
            if let Some(got) = s.record_result(simd_sub(&a, &b, st), || format!("{st} sub")) {
                s.record(got.diff == diff.diff && got.borrow_out == diff.borrow_out, || {
                    format!("{st}: {} - {}", a.to_hex(), b.to_hex())
                });
            }
        }
        let ks = kogge_stone_carries(&a, &b);
        s.record(ks.as_ref().is_ok_and(|c| *c == expected.carries), || {
            format!("prefix carries: {} + {}", a.to_hex(), b.to_hex())
        });
    }
    s
}

fn generic_suite(r: &Resolved, ctx: &PrimeContext, oracle: &Oracle) -> SuiteResult {
    let mut s = SuiteResult::new("generic-reduction");
    let mut rng = rng_for(r.seed, 2);
    let bound = ctx.input_bound();
    let three_p = &(r.p.shl_bits(1)) + &r.p;
    let two_p = r.p.shl_bits(1);
    for _ in 0..r.trials {
        let t = random_below(&mut rng, &bound);
        let expected = oracle.redc(&t);
        let hex = t.to_hex();
        if let Some(out) = s.record_result(redc_reference(&t, ctx), || format!("reference {hex}")) {
            s.record(out == expected, || format!("reference {hex}"));
        }
        if let Some((out, trace)) = s.record_result(redc_proposed(&t, ctx), || format!("proposed {hex}")) {
            s.record(out == expected, || format!("proposed {hex}"));
            s.record(trace.pre_correction < three_p, || format!("pre-correction >= 3p for {hex}"));
            if !needs_second_correction(&t, ctx) {
                s.record(trace.pre_correction < two_p && out < r.p, || {
                    format!("skipped correction insufficient for {hex}")
                });
            }
            s.record(trace.remainders.iter().all(|&x| x == 0), || format!("nonzero remainder for {hex}"));
        }
    }
    s
}

fn friendly_suite(r: &Resolved, oracle: &Oracle) -> SuiteResult {
    let name = "friendly-reduction";
    let ctx = match FriendlyContext::new(&r.p, r.cfg).and_then(|c| c.with_strategy(r.strategy())) {
        Ok(c) => c,
        Err(e) => return SuiteResult::skipped(name, e.to_string()),
    };
    let mut s = SuiteResult::new(name);
    let mut rng = rng_for(r.seed, 3);
    let bound = ctx.input_bound();
    let two_p = r.p.shl_bits(1);
    for _ in 0..r.trials {
        let t = random_below(&mut rng, &bound);
        let expected = oracle.redc(&t);
        let hex = t.to_hex();
        if let Some(out) = s.record_result(redc_friendly_reference(&t, &ctx), || format!("reference {hex}")) {
            s.record(out == expected, || format!("reference {hex}"));
        }
        if !ctx.admissible() {
            continue;
        }
        if let Some((out, trace)) = s.record_result(redc_friendly_proposed(&t, &ctx), || format!("proposed {hex}")) {
            s.record(out == expected, || format!("proposed {hex}"));
            s.record(trace.pre_correction < two_p, || format!("T2 >= 2p for {hex}"));
            let partial = verify_partial_reductions(&t, &trace, &ctx);
            s.record_result(partial, || format!("partial reductions for {hex}"));
        }
    }
    s
}

fn field_for(r: &Resolved, backend: Backend) -> simd_redc::Result<FieldContext> {
    let mode = match r.add {
        AddChoice::CarryPropagate => AddMode::CarryPropagate,
        AddChoice::Simd(st) => AddMode::Simd(st),
    };
    FieldContext::new(&r.p, r.cfg, backend)?.with_add_mode(mode)
}

fn field_suite(r: &Resolved, oracle: &Oracle) -> SuiteResult {
    let mut s = SuiteResult::new("field");
    let fields: Vec<FieldContext> = Backend::ALL.iter().filter_map(|&b| field_for(r, b).ok()).collect();
    let mut rng = rng_for(r.seed, 4);
    for _ in 0..r.trials {
        let (a, b, c) = (random_below(&mut rng, &r.p), random_below(&mut rng, &r.p), random_below(&mut rng, &r.p));
        let want_mul = oracle.mulmod(&a, &b);
        let want_add = rem_oracle(&(&a + &b), &r.p).unwrap();
        let want_sub = rem_oracle(&(&(&a + &r.p) - &b), &r.p).unwrap();
        let mut canonical = Vec::new();
        for f in &fields {
            let tag = f.backend();
            let run = || -> simd_redc::Result<(bool, BigInt)> {
                let (x, y, z) = (f.to_mont(&a)?, f.to_mont(&b)?, f.to_mont(&c)?);
                let value = |e: &FieldElement| f.from_mont(e);
                let prod = f.fmul(&x, &y)?;
                let mut ok = value(&prod)? == want_mul
                    && value(&f.fadd(&x, &y)?)? == want_add
                    && value(&f.fsub(&x, &y)?)? == want_sub
                    && value(&x)? == a
                    && f.fsqr(&x)? == f.fmul(&x, &x)?
                    && f.feq(&prod, &f.fmul(&y, &x)?)?;
                let left = f.fmul(&x, &f.fadd(&y, &z)?)?;
                let right = f.fadd(&prod, &f.fmul(&x, &z)?)?;
                ok &= f.feq(&left, &right)?;
                ok &= f.feq(&f.fmul(&prod, &z)?, &f.fmul(&x, &f.fmul(&y, &z)?)?)?;
                Ok((ok, f.normalize(&prod)?.value().clone()))
            };
            match run() {
                Ok((ok, normal)) => {
                    s.record(ok, || format!("{tag}: a={} b={}", a.to_hex(), b.to_hex()));
                    canonical.push(normal);
                }
                Err(e) => s.record(false, || format!("{tag}: {e}")),
            }
        }
        s.record(canonical.windows(2).all(|w| w[0] == w[1]), || format!("backends disagree on a={}", a.to_hex()));
    }
    s
}

fn lazy_suite(r: &Resolved) -> SuiteResult {
    let name = "lazy";
    if !r_exceeds_4p(&r.p, r.cfg) {
        return SuiteResult::skipped(name, "R <= 4p");
    }
    let mut s = SuiteResult::new(name);
    let two_p = r.p.shl_bits(1);
    for backend in Backend::ALL {
        let Ok(strict) = field_for(r, backend) else {
            continue;
        };
        let lazy = strict.clone().with_lazy(true).unwrap();
        let mut rng = rng_for(r.seed, 5 + backend as u64);
        let seeds: Vec<BigInt> = (0..4).map(|_| random_below(&mut rng, &r.p)).collect();
        let mut sv: Vec<_> = seeds.iter().map(|x| strict.to_mont(x).unwrap()).collect();
        let mut lv: Vec<_> = seeds.iter().map(|x| lazy.to_mont(x).unwrap()).collect();
        for _ in 0..r.trials {
            let (i, j, k, op) = (rng.gen_range(0..4), rng.gen_range(0..4), rng.gen_range(0..4), rng.gen_range(0..4));
            let apply = |f: &FieldContext, v: &[FieldElement]| match op {
                0 => f.fmul(&v[i], &v[j]),
                1 => f.fsqr(&v[i]),
                2 => f.fadd(&v[i], &v[j]),
                _ => f.fsub(&v[i], &v[j]),
            };
            match (apply(&strict, &sv), apply(&lazy, &lv)) {
                (Ok(a), Ok(b)) => {
                    s.record(a.value() < &r.p && b.value() < &two_p, || format!("{backend}: bound exceeded"));
                    sv[k] = a;
                    lv[k] = b;
                }
                (a, b) => s.record(false, || format!("{backend}: {:?} / {:?}", a.err(), b.err())),
            }
        }
        for (a, b) in sv.iter().zip(&lv) {
            s.record(strict.from_mont(a).ok() == lazy.from_mont(b).ok(), || format!("{backend}: lazy result differs"));
        }
    }
    s
}

/// Runs every suite; `corrupt` perturbs one precomputed `M_i` to exercise the failure path.
pub fn run(r: &Resolved, corrupt: Option<usize>) -> ValidationReport {
    let mut suites = Vec::new();
    let mut pre = SuiteResult::new("precompute");
    let ctx = PrimeContext::new_with_tamper(&r.p, r.cfg, |i, m| {
        if Some(i) == corrupt {
            *m = &*m + &BigInt::one(r.cfg);
        }
    })
    .and_then(|c| c.with_strategy(r.strategy()));
    let oracle = Oracle::new(&r.p, r.cfg);
    let ready = match (ctx, oracle) {
        (Ok(ctx), Ok(oracle)) => {
            pre.record(true, String::new);
            Some((ctx, oracle))
        }
        (Err(e), _) | (_, Err(e)) => {
            pre.record(false, || format!("context construction failed: {e}"));
            None
        }
    };
    suites.push(pre);
    suites.push(addition_suite(r));
    match ready {
        Some((ctx, oracle)) => {
            suites.push(generic_suite(r, &ctx, &oracle));
            suites.push(friendly_suite(r, &oracle));
            suites.push(field_suite(r, &oracle));
            suites.push(lazy_suite(r));
        }
        None => {
            for name in ["generic-reduction", "friendly-reduction", "field", "lazy"] {
                suites.push(SuiteResult::skipped(name, "no prime context"));
            }
        }
    }
    let passed = suites.iter().all(SuiteResult::ok);
    ValidationReport {
        prime: r.prime_label.clone(),
        modulus: r.p.clone(),
        omega: r.cfg.omega(),
        limbs: r.cfg.limbs(),
        add_strategy: r.add.to_string(),
        seed: r.seed,
        trials: r.trials,
        suites,
        passed,
    }
}
