//! Binomial coefficients and probability masses.
//!
//! Coefficients use the multiplicative recurrence so nothing overflows for
//! group sizes up to 64. Masses are evaluated in log space, which keeps tails
//! representable when `p` is tiny and the exponent large.

/// `C(n, k)` as a float, exact for every value that fits in 53 bits.
pub fn choose(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    acc.round()
}

pub fn ln_choose(n: u32, k: u32) -> f64 {
    choose(n, k).ln()
}

/// `P(X = k)` for `X ~ Bin(n, p)`.
pub fn pmf(n: u32, k: u32, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    // Exact endpoints: 0^0 = 1 and 0^k = 0.
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let ln = ln_choose(n, k) + f64::from(k) * p.ln() + f64::from(n - k) * (-p).ln_1p();
    ln.exp()
}

/// `P(lo <= X <= hi)`, summed directly so small upper tails keep their
/// relative precision (no `1 - cdf` cancellation). Empty ranges give 0.
pub fn range_prob(n: u32, lo: u32, hi: u32, p: f64) -> f64 {
    if lo > hi || lo > n {
        return 0.0;
    }
    (lo..=hi.min(n)).map(|k| pmf(n, k, p)).sum()
}

/// `P(X <= hi)`; `None` means the empty event.
pub fn cdf(n: u32, hi: Option<u32>, p: f64) -> f64 {
    match hi {
        Some(hi) => range_prob(n, 0, hi, p),
        None => 0.0,
    }
}

/// `P(X >= lo)`.
pub fn upper_tail(n: u32, lo: u32, p: f64) -> f64 {
    range_prob(n, lo, n, p)
}
