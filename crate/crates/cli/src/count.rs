//! Operation counts and latency-weighted cycle estimates.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;
use simd_redc::field::Backend;
use simd_redc::lanes::{cost_report, CostReport, OpCounts};
use simd_redc::mont_generic::{redc_proposed, redc_reference_traced, PrimeContext};
use simd_redc::mont_special::{redc_friendly_proposed, redc_friendly_reference_traced, FriendlyContext};
use simd_redc::simd_add::{simd_add, simd_sub};
use simd_redc::BigInt;

use crate::config::{AddChoice, Resolved};
use crate::validate::{random_below, random_limbs, rng_for};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Redc,
}

impl Op {
    pub const ALL: [Op; 3] = [Op::Add, Op::Sub, Op::Redc];

    fn name(self) -> &'static str {
        match self {
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Redc => "redc",
        }
    }

    /// Parses a comma-separated list; `none` selects nothing.
    pub fn parse_list(items: &[String]) -> Result<Vec<Op>, CliError> {
        let mut out = Vec::new();
        for item in items {
            match item.as_str() {
                "none" => {}
                "all" => out.extend(Op::ALL),
                name => out.push(
                    Op::ALL
                        .into_iter()
                        .find(|op| op.name() == name)
                        .ok_or_else(|| CliError::Config(format!("unknown operation {name:?}")))?,
                ),
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OpReport {
    pub op: String,
    pub counts: OpCounts,
    pub reports: Vec<CostReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench_ns_per_op: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountReport {
    pub prime: String,
    pub modulus: BigInt,
    pub omega: u32,
    pub limbs: usize,
    pub backend: Backend,
    pub add_strategy: String,
    pub ops: Vec<OpReport>,
    pub total: OpReport,
    /// Counts matched across two operand draws for every operation.
    pub shape_deterministic: bool,
}

enum Reducer {
    Generic(PrimeContext),
    Friendly(FriendlyContext),
}

struct Runner<'a> {
    r: &'a Resolved,
    reducer: Option<Reducer>,
}

impl Runner<'_> {
    fn counts(&self, op: Op, rng: &mut impl Rng) -> Result<OpCounts, CliError> {
        let (r, n) = (self.r, self.r.cfg.limbs());
        let fail = |e: simd_redc::Error| CliError::Failed(format!("{}: {e}", op.name()));
        Ok(match op {
            Op::Add | Op::Sub => {
                let (a, b) = (random_limbs(rng, r.cfg, n), random_limbs(rng, r.cfg, n));
                match r.add {
                    AddChoice::CarryPropagate => OpCounts { scalar_add: n as u64, ..Default::default() },
                    AddChoice::Simd(s) if op == Op::Add => simd_add(&a, &b, s).map_err(fail)?.1.counts,
                    AddChoice::Simd(s) => simd_sub(&a, &b, s).map_err(fail)?.trace.counts,
                }
            }
            Op::Redc => {
                let bound = &r.p.shl_bits(r.cfg.bits());
                let t = random_below(rng, bound);
                match (self.reducer.as_ref().expect("reducer built for redc"), r.backend) {
                    (Reducer::Generic(c), Backend::GenericReference) => {
                        redc_reference_traced(&t, c).map_err(fail)?.1.counts
                    }
                    (Reducer::Generic(c), _) => redc_proposed(&t, c).map_err(fail)?.1.counts,
                    (Reducer::Friendly(c), Backend::FriendlyReference) => {
                        redc_friendly_reference_traced(&t, c).map_err(fail)?.1.counts
                    }
                    (Reducer::Friendly(c), _) => redc_friendly_proposed(&t, c).map_err(fail)?.1.counts,
                }
            }
        })
    }
}

fn build_reducer(r: &Resolved) -> Result<Reducer, CliError> {
    let unavailable = |e: simd_redc::Error| CliError::Config(format!("backend {}: {e}", r.backend));
    if r.backend.is_friendly() {
        let ctx = FriendlyContext::new(&r.p, r.cfg).and_then(|c| c.with_strategy(r.strategy())).map_err(unavailable)?;
        if r.backend == Backend::FriendlyProposed && !ctx.admissible() {
            return Err(CliError::Config(format!(
                "backend {}: split {} exceeds limit {}",
                r.backend,
                ctx.hi_split(),
                ctx.split_limit()
            )));
        }
        Ok(Reducer::Friendly(ctx))
    } else {
        Ok(Reducer::Generic(
            PrimeContext::new(&r.p, r.cfg).and_then(|c| c.with_strategy(r.strategy())).map_err(unavailable)?,
        ))
    }
}

fn report(r: &Resolved, op: &str, counts: OpCounts, bench: Option<f64>) -> OpReport {
    OpReport {
        op: op.to_string(),
        counts,
        reports: r.profiles.iter().map(|m| cost_report(&counts, m)).collect(),
        bench_ns_per_op: bench,
    }
}

pub fn run(r: &Resolved, ops: &[Op], bench: bool) -> Result<CountReport, CliError> {
    let reducer = if ops.contains(&Op::Redc) { Some(build_reducer(r)?) } else { None };
    let runner = Runner { r, reducer };
    let mut reports = Vec::new();
    let mut total = OpCounts::default();
    let mut shape_deterministic = true;
    for (i, &op) in ops.iter().enumerate() {
        let first = runner.counts(op, &mut rng_for(r.seed, 100 + i as u64))?;
        let second = runner.counts(op, &mut rng_for(r.seed.wrapping_add(1), 100 + i as u64))?;
        shape_deterministic &= first == second;
        let timing = if bench {
            let mut rng = rng_for(r.seed, 200 + i as u64);
            let reps = r.trials.max(1);
            let start = Instant::now();
            for _ in 0..reps {
                runner.counts(op, &mut rng)?;
            }
            Some(start.elapsed().as_nanos() as f64 / reps as f64)
        } else {
            None
        };
        total += first;
        reports.push(report(r, op.name(), first, timing));
    }
    Ok(CountReport {
        prime: r.prime_label.clone(),
        modulus: r.p.clone(),
        omega: r.cfg.omega(),
        limbs: r.cfg.limbs(),
        backend: r.backend,
        add_strategy: r.add.to_string(),
        ops: reports,
        total: report(r, "total", total, None),
        shape_deterministic,
    })
}
