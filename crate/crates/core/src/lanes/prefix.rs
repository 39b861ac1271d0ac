use crate::error::{Error, Result};
use crate::limbs::BigInt;

/// Carries `c_0..c_n` of `a + b` resolved by a log-depth parallel prefix
/// over per-limb (generate, propagate) pairs.
pub fn kogge_stone_carries(a: &BigInt, b: &BigInt) -> Result<Vec<u8>> {
    if a.omega() != b.omega() {
        return Err(Error::RadixMismatch { left: a.omega(), right: b.omega() });
    }
    let omega = a.omega();
    let max = if omega == 64 { u64::MAX as u128 } else { (1u128 << omega) - 1 };
    let n = a.len().max(b.len()).max(a.cfg().limbs());

    let mut g = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    for i in 0..n {
        let s = a.limb(i) as u128 + b.limb(i) as u128;
        g.push(s > max);
        p.push(s == max);
    }

    // (g, p) at i spans [i - d + 1, i]; combine with the span ending at i - d.
    let mut d = 1;
    while d < n {
        let (prev_g, prev_p) = (g.clone(), p.clone());
        for i in d..n {
            g[i] = prev_g[i] || (prev_p[i] && prev_g[i - d]);
            p[i] = prev_p[i] && prev_p[i - d];
        }
        d *= 2;
    }

    let mut carries = Vec::with_capacity(n + 1);
    carries.push(0);
    carries.extend(g.iter().map(|&x| x as u8));
    Ok(carries)
}
