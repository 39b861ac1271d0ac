mod common;

use common::{below, from_big, redc_oracle, rng, to_big};
use num_bigint::BigUint;
use proptest::prelude::*;
use simd_redc::mont_special::{
    redc_friendly_proposed, redc_friendly_reference, redc_friendly_reference_traced, verify_partial_reductions,
    FriendlyContext,
};
use simd_redc::presets::find_preset;
use simd_redc::{BigInt, RadixConfig};

fn p503() -> FriendlyContext {
    find_preset("p503").unwrap().friendly_context().unwrap()
}

#[test]
fn p503_limb_products_drop_from_32_to_24() {
    let ctx = p503();
    let p = to_big(ctx.p());
    let bound = &p << ctx.cfg().bits();
    let mut g = rng(7);
    for _ in 0..8 {
        let t = from_big(&below(&mut g, &bound), ctx.cfg().with_limbs(16).unwrap());
        let (_, reference) = redc_friendly_reference_traced(&t, &ctx).unwrap();
        let (_, proposed) = redc_friendly_proposed(&t, &ctx).unwrap();
        assert_eq!(reference.limb_products, 32);
        assert_eq!(reference.counts.lane_mul_product, 32);
        assert_eq!(proposed.karatsuba_products, 24);
        assert_eq!(proposed.counts.lane_mul_product, 24);
    }
}

#[test]
fn exhaustive_small_friendly_primes() {
    let cfg = RadixConfig::new(2, 4).unwrap();
    let mut checked = 0;
    for p in (3u64..256).step_by(2) {
        let Ok(ctx) = FriendlyContext::new(&BigInt::from_u64(p, cfg), cfg) else {
            continue;
        };
        let pb = BigUint::from(p);
        let wide = cfg.with_limbs(8).unwrap();
        for t in 0..p * 256 {
            let tb = BigUint::from(t);
            let expected = redc_oracle(&tb, &pb, cfg);
            let t = BigInt::from_u64(t, wide);
            assert_eq!(to_big(&redc_friendly_reference(&t, &ctx).unwrap()), expected, "p={p}");
            if ctx.admissible() {
                let (out, trace) = redc_friendly_proposed(&t, &ctx).unwrap();
                assert_eq!(to_big(&out), expected, "p={p}");
                assert!(to_big(&trace.pre_correction) < &pb * 2u32);
                verify_partial_reductions(&t, &trace, &ctx).unwrap();
            }
        }
        checked += 1;
    }
    assert!(checked >= 3);
}

#[test]
fn non_friendly_prime_is_rejected() {
    let cfg = RadixConfig::new(4, 4).unwrap();
    assert!(FriendlyContext::new(&BigInt::from_u64(65521, cfg), cfg).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn p503_backends_match_oracle(seed in any::<u64>()) {
        let ctx = p503();
        let p = to_big(ctx.p());
        let mut g = rng(seed);
        let t = below(&mut g, &(&p << ctx.cfg().bits()));
        let expected = redc_oracle(&t, &p, ctx.cfg());
        let t = from_big(&t, ctx.cfg().with_limbs(16).unwrap());
        prop_assert_eq!(to_big(&redc_friendly_reference(&t, &ctx).unwrap()), expected.clone());
        let (out, trace) = redc_friendly_proposed(&t, &ctx).unwrap();
        prop_assert_eq!(to_big(&out), expected);
        prop_assert!(to_big(&trace.pre_correction) < &p * 2u32);
        verify_partial_reductions(&t, &trace, &ctx).unwrap();
    }
}
