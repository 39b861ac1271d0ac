//! Replays the three worked examples and compares every traced intermediate.

use serde::Serialize;
use simd_redc::mont_generic::{redc_proposed, PrimeContext};
use simd_redc::mont_special::{redc_friendly_proposed, FriendlyContext};
use simd_redc::simd_add::{simd_add, AddStrategy};
use simd_redc::{BigInt, RadixConfig};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub example: &'static str,
    pub item: String,
    pub expected: String,
    pub actual: String,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExamplesReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ExamplesReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut last = "";
        for c in &self.checks {
            if c.example != last {
                out.push_str(&format!("{}\n", c.example));
                last = c.example;
            }
            let tag = if c.ok { "ok" } else { "MISMATCH" };
            out.push_str(&format!("  {:<14} expected {:<28} actual {:<28} {tag}\n", c.item, c.expected, c.actual));
        }
        out.push_str(if self.passed { "result: PASS\n" } else { "result: FAIL\n" });
        out
    }
}

type Example = (&'static str, fn(&mut Recorder));

struct Recorder {
    example: &'static str,
    checks: Vec<Check>,
}

impl Recorder {
    fn check(&mut self, item: &str, expected: impl Into<String>, actual: impl Into<String>) {
        let (expected, actual) = (expected.into(), actual.into());
        self.checks.push(Check {
            example: self.example,
            item: item.to_string(),
            ok: expected == actual,
            expected,
            actual,
        });
    }

    fn fail(&mut self, item: &str, expected: impl Into<String>, err: impl ToString) {
        self.check(item, expected, format!("error: {}", err.to_string()));
    }
}

/// Most significant entry first, as the examples are written.
fn ms_first<T: ToString>(xs: &[T]) -> String {
    let parts: Vec<String> = xs.iter().rev().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

fn int(x: &BigInt) -> String {
    x.to_u128().map_or_else(|| x.to_hex(), |v| v.to_string())
}

fn int_opt(x: Option<&BigInt>) -> String {
    x.map_or_else(|| "-".to_string(), int)
}

fn addition(rec: &mut Recorder) {
    let cfg = RadixConfig::new(16, 4).unwrap();
    let a = BigInt::from_limbs(vec![60000, 50000, 10000, 20000], cfg).unwrap();
    let b = BigInt::from_limbs(vec![5536, 15535, 10000, 20000], cfg).unwrap();
    match simd_add(&a, &b, AddStrategy::NativePopcount) {
        Ok((sum, tr)) => {
            rec.check("D", "(40000,20000,65535,0)", ms_first(&tr.d));
            rec.check("G", "(5,5,16,0)", ms_first(&tr.g));
            rec.check("t", "(5,5,16,17)", ms_first(&tr.t));
            rec.check("p", "(239,239,239,239)", ms_first(&tr.p));
            rec.check("s", "(244,245,0,0)", ms_first(&tr.s));
            rec.check("carries", "(0,1,1,0)", ms_first(&tr.c[..4]));
            rec.check("sum", "(40000,20001,0,0)", ms_first(sum.limbs()));
        }
        Err(e) => rec.fail("sum", "(40000,20001,0,0)", e),
    }
}

fn generic(rec: &mut Recorder) {
    let cfg = RadixConfig::new(4, 4).unwrap();
    let p = BigInt::from_u64(62207, cfg);
    let ctx = match PrimeContext::new(&p, cfg) {
        Ok(c) => c,
        Err(e) => return rec.fail("context", "62207", e),
    };
    rec.check("p'", "1", ctx.p_prime().to_string());
    let m: Vec<String> = ctx.m().iter().map(int).collect();
    rec.check("M", "(243,3888)", format!("({})", m.join(",")));
    let t = BigInt::from_u64(100_000_000, cfg.with_limbs(8).unwrap());
    match redc_proposed(&t, &ctx) {
        Ok((out, tr)) => {
            rec.check("T(2)", "390625", int_opt(tr.t_step(2)));
            rec.check(
                "Q",
                "(1,14)",
                format!("({})", tr.q_steps.iter().map(u64::to_string).collect::<Vec<_>>().join(",")),
            );
            rec.check("T(3)", "28302", int_opt(tr.t_step(3)));
            rec.check("T(4)", "56200", int_opt(tr.t_step(4)));
            rec.check("result", "56200", int(&out));
        }
        Err(e) => rec.fail("result", "56200", e),
    }
}

fn friendly(rec: &mut Recorder) {
    let cfg = RadixConfig::new(4, 4).unwrap();
    let p = BigInt::from_u64(62207, cfg);
    let ctx = match FriendlyContext::new(&p, cfg) {
        Ok(c) => c,
        Err(e) => return rec.fail("context", "62207", e),
    };
    rec.check("ell", "8", ctx.ell().to_string());
    rec.check("F", "243", int(ctx.f()));
    rec.check("lambda", "2", ctx.lambda().to_string());
    let t = BigInt::from_u64(100_000_000, cfg.with_limbs(8).unwrap());
    match redc_friendly_proposed(&t, &ctx) {
        Ok((out, tr)) => {
            rec.check("t(1)", "0", int(&tr.t1));
            rec.check("Q(1)", "0", int(&tr.q1));
            rec.check("T(1)", "390625", int_opt(tr.t_steps.get(1)));
            rec.check("t(2)", "768", int_opt(tr.t2.as_ref()));
            rec.check("Q(2)", "225", int(&tr.q2));
            rec.check("T(2)", "56200", int_opt(tr.t_steps.get(2)));
            rec.check("result", "56200", int(&out));
        }
        Err(e) => rec.fail("result", "56200", e),
    }
}

pub fn run() -> ExamplesReport {
    let mut checks = Vec::new();
    let parts: [Example; 3] = [
        ("carry-simulated addition, omega=16, n=4", addition),
        ("generic reduction, p=62207, T=100000000", generic),
        ("friendly reduction, p=62207, T=100000000", friendly),
    ];
    for (example, f) in parts {
        let mut rec = Recorder { example, checks: Vec::new() };
        f(&mut rec);
        checks.extend(rec.checks);
    }
    let passed = checks.iter().all(|c| c.ok);
    ExamplesReport { checks, passed }
}
