//! Binomial coefficients in floating point.
//!
//! Weight formulas are written as products of ratios rather than raw
//! factorials: `c!(n-c-1)!/n!` overflows `f64` near `n = 171`, whereas
//! `1 / (n * C(n-1, c))` only underflows gracefully to zero.

/// `C(n, k)` as `f64`. Exact while the result stays below 2^53, since every
/// partial product of the multiplicative recurrence is itself a binomial.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for j in 1..=k {
        acc = acc * (n - k + j) as f64 / j as f64;
    }
    acc
}

/// `C(a, c) / C(b, c)` for `a ≤ b`, evaluated as a product of `c` factors in
/// `(0, 1]`, so it neither overflows nor loses precision for large `b`.
pub fn binomial_ratio(a: usize, b: usize, c: usize) -> f64 {
    debug_assert!(a <= b);
    if c > a {
        return 0.0;
    }
    (0..c).fold(1.0, |acc, j| acc * (a - j) as f64 / (b - j) as f64)
}

/// `2^e` for any integer exponent; saturates to `0` or `inf` outside the
/// representable range instead of wrapping.
pub fn pow2(e: i64) -> f64 {
    let e = e.clamp(i32::MIN as i64, i32::MAX as i64) as i32;
    2f64.powi(e)
}
