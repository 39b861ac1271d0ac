//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{below, from_big, limbs, redc_oracle, rng, to_big};
use num_bigint::BigUint;
use simd_redc::field::{Backend, FieldContext};
use simd_redc::lanes::{cost_report, kogge_stone_carries, CostModel, OpCounts, BUILTIN_PROFILES};
use simd_redc::limbs::add_carry_propagate;
use simd_redc::mont_generic::{needs_second_correction, redc_proposed, redc_reference, PrimeContext};
use simd_redc::mont_special::{
    redc_friendly_proposed, redc_friendly_reference, redc_friendly_reference_traced, verify_partial_reductions,
    FriendlyContext,
};
use simd_redc::presets::find_preset;
use simd_redc::simd_add::{simd_add, AddStrategy};
use simd_redc::{BigInt, RadixConfig};

const TRIALS: usize = 10_000;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn toy() -> (BigInt, RadixConfig) {
    let cfg = RadixConfig::new(4, 4).unwrap();
    (BigInt::from_u64(62207, cfg), cfg)
}

fn golden_addition() -> Result<String, String> {
    let cfg = RadixConfig::new(16, 4).unwrap();
    let a = BigInt::from_limbs(vec![60000, 50000, 10000, 20000], cfg).unwrap();
    let b = BigInt::from_limbs(vec![5536, 15535, 10000, 20000], cfg).unwrap();
    let (sum, trace) = simd_add(&a, &b, AddStrategy::NativePopcount).map_err(|e| e.to_string())?;
    let carries: Vec<u8> = trace.c[..4].iter().rev().copied().collect();
    let limbs: Vec<u64> = sum.limbs().iter().rev().copied().collect();
    ensure(carries == [0, 1, 1, 0], || format!("carries {carries:?}"))?;
    ensure(limbs == [40000, 20001, 0, 0], || format!("sum {limbs:?}"))?;
    Ok("carries (0,1,1,0), sum (40000,20001,0,0)".into())
}

fn golden_generic() -> Result<String, String> {
    let (p, cfg) = toy();
    let ctx = PrimeContext::new(&p, cfg).map_err(|e| e.to_string())?;
    let t = BigInt::from_u64(100_000_000, cfg.with_limbs(8).unwrap());
    let (out, trace) = redc_proposed(&t, &ctx).map_err(|e| e.to_string())?;
    let t2 = trace.t_step(2).and_then(BigInt::to_u128);
    let t3 = trace.t_step(3).and_then(BigInt::to_u128);
    ensure(out.to_u128() == Some(56200), || format!("result {:?}", out.to_u128()))?;
    ensure(t2 == Some(390625), || format!("T2 {t2:?}"))?;
    ensure(trace.q_steps == [1, 14], || format!("Q {:?}", trace.q_steps))?;
    ensure(t3 == Some(28302), || format!("T3 {t3:?}"))?;
    Ok("56200 with T2=390625, Q=(1,14), T3=28302".into())
}

fn golden_friendly() -> Result<String, String> {
    let (p, cfg) = toy();
    let ctx = FriendlyContext::new(&p, cfg).map_err(|e| e.to_string())?;
    let t = BigInt::from_u64(100_000_000, cfg.with_limbs(8).unwrap());
    let (out, trace) = redc_friendly_proposed(&t, &ctx).map_err(|e| e.to_string())?;
    let t2 = trace.t2.as_ref().and_then(BigInt::to_u128);
    ensure(out.to_u128() == Some(56200), || format!("result {:?}", out.to_u128()))?;
    ensure(t2 == Some(768), || format!("t2 {t2:?}"))?;
    ensure(trace.q2.to_u128() == Some(225), || format!("Q2 {:?}", trace.q2.to_u128()))?;
    Ok("56200 with t2=768, Q2=225".into())
}

fn p503_counts() -> Result<String, String> {
    let ctx = find_preset("p503").unwrap().friendly_context().map_err(|e| e.to_string())?;
    ensure(ctx.m() == 2, || format!("m = {}", ctx.m()))?;
    let p = to_big(ctx.p());
    let mut g = rng(4);
    for _ in 0..16 {
        let t = from_big(&below(&mut g, &(&p << 512)), ctx.cfg().with_limbs(16).unwrap());
        let (_, r) = redc_friendly_reference_traced(&t, &ctx).map_err(|e| e.to_string())?;
        let (_, q) = redc_friendly_proposed(&t, &ctx).map_err(|e| e.to_string())?;
        ensure(r.limb_products == 32 && r.counts.lane_mul_product == 32, || format!("reference {}", r.limb_products))?;
        ensure(q.karatsuba_products == 24 && q.counts.lane_mul_product == 24, || {
            format!("proposed {}", q.karatsuba_products)
        })?;
    }
    Ok("limb products 32 -> 24".into())
}

fn exhaustive() -> Result<String, String> {
    let cfg = RadixConfig::new(2, 3).unwrap();
    let wide = cfg.with_limbs(6).unwrap();
    let mut cases = 0u64;
    for p in (1u64..64).step_by(2) {
        let ctx = PrimeContext::new(&BigInt::from_u64(p, cfg), cfg).map_err(|e| e.to_string())?;
        let pb = BigUint::from(p);
        for t in 0..p * 64 {
            let expected = redc_oracle(&BigUint::from(t), &pb, cfg);
            let tt = BigInt::from_u64(t, wide);
            let a = to_big(&redc_reference(&tt, &ctx).map_err(|e| e.to_string())?);
            let b = to_big(&redc_proposed(&tt, &ctx).map_err(|e| e.to_string())?.0);
            ensure(a == expected && b == expected, || format!("p={p} T={t}"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} cases"))
}

fn randomized() -> Result<String, String> {
    let mut g = rng(6);
    for omega in [43u32, 52, 64] {
        let mut strategies = vec![AddStrategy::NativePopcount];
        if omega < 64 {
            strategies.extend([AddStrategy::ReducedPopcount(omega), AddStrategy::ReducedSaturate(omega)]);
        }
        let cfg = RadixConfig::new(omega, 8).unwrap();
        for _ in 0..TRIALS {
            let (a, b) = (limbs(&mut g, cfg, 8), limbs(&mut g, cfg, 8));
            let expected = add_carry_propagate(&a, &b).unwrap();
            for &s in &strategies {
                let (sum, trace) = simd_add(&a, &b, s).map_err(|e| e.to_string())?;
                ensure(sum == expected.sum && trace.c == expected.carries, || format!("{s} at omega={omega}"))?;
            }
            let ks = kogge_stone_carries(&a, &b).map_err(|e| e.to_string())?;
            ensure(ks == expected.carries, || format!("prefix carries at omega={omega}"))?;
        }
    }
    for preset in ["p62207", "p503"] {
        let preset = find_preset(preset).unwrap();
        let generic = preset.prime_context().map_err(|e| e.to_string())?;
        let friendly = preset.friendly_context().map_err(|e| e.to_string())?;
        let cfg = generic.cfg();
        let p = to_big(generic.p());
        let wide = cfg.with_limbs(2 * cfg.limbs()).unwrap();
        let fields: Vec<_> = Backend::ALL
            .iter()
            .map(|&b| FieldContext::new(generic.p(), cfg, b))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for _ in 0..TRIALS {
            let tb = below(&mut g, &(&p << cfg.bits()));
            let expected = redc_oracle(&tb, &p, cfg);
            let t = from_big(&tb, wide);
            let outs = [
                redc_reference(&t, &generic).map_err(|e| e.to_string())?,
                redc_proposed(&t, &generic).map_err(|e| e.to_string())?.0,
                redc_friendly_reference(&t, &friendly).map_err(|e| e.to_string())?,
                redc_friendly_proposed(&t, &friendly).map_err(|e| e.to_string())?.0,
            ];
            ensure(outs.iter().all(|o| to_big(o) == expected), || format!("reduction on {}", preset.name))?;
            let (a, b) = (below(&mut g, &p), below(&mut g, &p));
            for f in &fields {
                let x = f.to_mont(&from_big(&a, cfg)).map_err(|e| e.to_string())?;
                let y = f.to_mont(&from_big(&b, cfg)).map_err(|e| e.to_string())?;
                let got = to_big(&f.from_mont(&f.fmul(&x, &y).map_err(|e| e.to_string())?).unwrap());
                ensure(got == (&a * &b) % &p, || format!("{} homomorphism on {}", f.backend(), preset.name))?;
            }
        }
    }
    Ok(format!("{TRIALS} trials per item"))
}

fn bounds() -> Result<String, String> {
    let mut g = rng(7);
    let mut skipped = 0;
    let generic: Vec<PrimeContext> =
        ["p62207", "p434", "p503", "p751"].iter().map(|n| find_preset(n).unwrap().prime_context().unwrap()).collect();
    for i in 0..TRIALS {
        let ctx = &generic[i % generic.len()];
        let cfg = ctx.cfg();
        let p = to_big(ctx.p());
        let t = from_big(&below(&mut g, &(&p << cfg.bits())), cfg.with_limbs(2 * cfg.limbs()).unwrap());
        let (out, trace) = redc_proposed(&t, ctx).map_err(|e| e.to_string())?;
        let pre = to_big(&trace.pre_correction);
        ensure(pre < &p * 3u32, || "pre-correction not below 3p".into())?;
        if !needs_second_correction(&t, ctx) {
            skipped += 1;
            ensure(pre < &p * 2u32 && to_big(&out) < p, || {
                "skip condition held but one subtraction was not enough".into()
            })?;
        }
        ensure(trace.remainders.iter().all(|&r| r == 0), || "nonzero remainder in generic loop".into())?;
    }
    let friendly: Vec<FriendlyContext> = ["p62207", "p434", "p503", "p610", "p751"]
        .iter()
        .map(|n| find_preset(n).unwrap().friendly_context().unwrap())
        .collect();
    for i in 0..TRIALS {
        let ctx = &friendly[i % friendly.len()];
        let cfg = ctx.cfg();
        let p = to_big(ctx.p());
        let t = from_big(&below(&mut g, &(&p << cfg.bits())), cfg.with_limbs(2 * cfg.limbs()).unwrap());
        let (_, trace) = redc_friendly_proposed(&t, ctx).map_err(|e| e.to_string())?;
        ensure(to_big(&trace.pre_correction) < &p * 2u32, || "T2 not below 2p".into())?;
        ensure(trace.remainders.iter().all(BigInt::is_zero), || "nonzero remainder in friendly steps".into())?;
        verify_partial_reductions(&t, &trace, ctx).map_err(|e| e.to_string())?;
    }
    Ok(format!("{TRIALS} generic and {TRIALS} friendly traces, {skipped} second corrections skipped"))
}

fn cost_model() -> Result<String, String> {
    let sve = CostModel::builtin("a64fx-sve").map_err(|e| e.to_string())?;
    let one_mul = OpCounts { lane_mul_product: 1, ..Default::default() };
    let cycles = cost_report(&one_mul, &sve).weighted_cycles;
    ensure(cycles == 9, || format!("one multiply costs {cycles}"))?;
    let ctx = find_preset("p503").unwrap().friendly_context().map_err(|e| e.to_string())?;
    let p = to_big(ctx.p());
    let mut reports = Vec::new();
    for seed in [1, 2] {
        let mut g = rng(seed);
        let t = from_big(&below(&mut g, &(&p << 512)), ctx.cfg().with_limbs(16).unwrap());
        let (_, trace) = redc_friendly_proposed(&t, &ctx).map_err(|e| e.to_string())?;
        let r: Vec<_> = BUILTIN_PROFILES
            .iter()
            .map(|name| cost_report(&trace.counts, &CostModel::builtin(name).unwrap()))
            .collect();
        reports.push(r);
    }
    ensure(reports[0] == reports[1], || "cost reports vary with operands".into())?;
    Ok("sve multiply = 9 cycles, reports deterministic (hardware speedups not reproduced)".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Check); 8] = [
        ("golden addition", Duration::from_secs(1), golden_addition),
        ("golden generic reduction", Duration::from_secs(1), golden_generic),
        ("golden friendly reduction", Duration::from_secs(1), golden_friendly),
        ("p503 instruction counts", Duration::from_secs(60), p503_counts),
        ("exhaustive oracle equivalence", Duration::from_secs(60), exhaustive),
        ("randomized oracle equivalence", Duration::from_secs(300), randomized),
        ("bound suites", Duration::from_secs(300), bounds),
        ("cost model", Duration::from_secs(60), cost_model),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > limit => Err(format!("{detail}, but took {elapsed:.2?} > {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
