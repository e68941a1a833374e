//! Exact scalar plumbing: arbitrary-precision rationals, their canonical
//! text form `p/q`, and an exact decimal renderer for export.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Every model quantity (opinion, weight, bound, threshold) is one of these.
pub type Rational = num_rational::BigRational;

/// Shorthand constructor for small literals.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Integer as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`: expected `p/q` or an integer")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parse `p/q` or a bare integer, with an optional leading sign.
///
/// Decimal notation is rejected on purpose: a literal like `0.1` reads as
/// exact but would silently commit the caller to a specific base-10
/// approximation. Write `1/10`.
pub fn parse_rational(s: &str) -> Result<Rational, RationalParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let parse_int = |part: &str| -> Result<BigInt, RationalParseError> {
        if part.is_empty() || !part.chars().all(|c| c.is_ascii_digit() || c == '-' || c == '+') {
            return Err(RationalParseError::Malformed(s.to_string()));
        }
        part.parse::<BigInt>()
            .map_err(|_| RationalParseError::Malformed(s.to_string()))
    };
    match s.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(s)?)),
        Some((num, den)) => {
            let n = parse_int(num)?;
            let d = parse_int(den)?;
            if d.is_zero() {
                return Err(RationalParseError::ZeroDenominator(s.to_string()));
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// Canonical text form: reduced, denominator positive, `p` when integral,
/// `p/q` otherwise. `parse_rational(render_rational(x)) == x` for every x.
pub fn render_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Smallest integer >= r.
pub fn ceil_big(r: &Rational) -> BigInt {
    r.numer().div_ceil(r.denom())
}

/// `ceil_big` clamped into usize; `cap` bounds astronomically large values.
pub fn ceil_capped(r: &Rational, cap: usize) -> usize {
    let c = ceil_big(r);
    if c.is_negative() {
        return 0;
    }
    c.to_usize().map_or(cap, |v| v.min(cap))
}

/// Exact decimal rendering with `sig` significant digits (round half to even).
///
/// This is the only lossy rendering in the crate and exists for export;
/// everything internal stays rational. Plain notation is used while readable,
/// scientific notation otherwise.
pub fn decimal_string(r: &Rational, sig: usize) -> String {
    assert!(sig >= 1, "need at least one significant digit");
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let v = r.abs();
    let (n, d) = (v.numer().clone(), v.denom().clone());

    // Decimal exponent e with 10^e <= n/d < 10^(e+1).
    let ten = BigInt::from(10);
    let mut e = n.to_string().len() as i64 - d.to_string().len() as i64;
    loop {
        // compare n/d with 10^e without leaving integers
        let ge_low = if e >= 0 { n >= &d * ten.pow(e as u32) } else { &n * ten.pow((-e) as u32) >= d };
        if !ge_low {
            e -= 1;
            continue;
        }
        let lt_high =
            if e + 1 >= 0 { n < &d * ten.pow((e + 1) as u32) } else { &n * ten.pow((-(e + 1)) as u32) < d };
        if !lt_high {
            e += 1;
            continue;
        }
        break;
    }

    // k = round_half_even(n/d * 10^(sig-1-e)), an integer with `sig` digits.
    let shift = sig as i64 - 1 - e;
    let (num, den) = if shift >= 0 { (&n * ten.pow(shift as u32), d) } else { (n, &d * ten.pow((-shift) as u32)) };
    let (q, rem) = num.div_rem(&den);
    let mut k = q.clone();
    let twice = &rem * BigInt::from(2);
    if twice > den || (twice == den && q.is_odd()) {
        k += 1;
    }
    if k == ten.pow(sig as u32) {
        k /= &ten;
        e += 1;
    }

    let digits = k.to_string();
    debug_assert_eq!(digits.len(), sig);
    let body = if e < -5 || e >= sig as i64 + 6 {
        // scientific: d.ddd…e±EE
        if sig == 1 { format!("{}e{}", digits, e) } else { format!("{}.{}e{}", &digits[..1], &digits[1..], e) }
    } else if e < 0 {
        format!("0.{}{}", "0".repeat((-e - 1) as usize), digits)
    } else {
        let point = (e + 1) as usize;
        if point >= sig {
            format!("{}{}", digits, "0".repeat(point - sig))
        } else {
            format!("{}.{}", &digits[..point], &digits[point..])
        }
    };
    if neg { format!("-{body}") } else { body }
}

/// (sign of r) as -1/0/+1, handy for monitors.
pub fn signum(r: &Rational) -> i32 {
    match r.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_reduces_to_canonical_form() {
        assert_eq!(parse_rational("4/8").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-4/8").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("4/-8").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational(" 17/36 ").unwrap(), rat(17, 36));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_rational("").is_err());
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
        assert!(parse_rational("1/2/3").is_err());
    }

    #[test]
    fn render_uses_integer_form_when_possible() {
        assert_eq!(render_rational(&rat(6, 3)), "2");
        assert_eq!(render_rational(&rat(1, 3)), "1/3");
        assert_eq!(render_rational(&rat(-1, 3)), "-1/3");
        assert_eq!(render_rational(&int(0)), "0");
    }

    #[test]
    fn ceil_matches_hand_values() {
        assert_eq!(ceil_big(&rat(7, 2)), BigInt::from(4));
        assert_eq!(ceil_big(&int(4)), BigInt::from(4));
        assert_eq!(ceil_big(&rat(-7, 2)), BigInt::from(-3));
        assert_eq!(ceil_capped(&rat(1_000_000, 1), 1000), 1000);
        assert_eq!(ceil_capped(&rat(7, 2), 1000), 4);
    }

    #[test]
    fn decimal_rendering_is_exactly_rounded() {
        assert_eq!(decimal_string(&rat(1, 3), 12), "0.333333333333");
        assert_eq!(decimal_string(&rat(2, 3), 12), "0.666666666667");
        assert_eq!(decimal_string(&rat(1, 2), 12), "0.500000000000");
        assert_eq!(decimal_string(&int(1), 12), "1.00000000000");
        assert_eq!(decimal_string(&int(0), 12), "0");
        assert_eq!(decimal_string(&rat(-1, 8), 12), "-0.125000000000");
        assert_eq!(decimal_string(&rat(1, 3), 1), "0.3");
        // half-to-even at the last digit: 0.25 with one digit -> 0.2
        assert_eq!(decimal_string(&rat(1, 4), 1), "0.2");
        assert_eq!(decimal_string(&rat(3, 4), 1), "0.8");
    }

    #[test]
    fn decimal_rendering_switches_to_scientific_for_tiny_values() {
        let tiny = Rational::new(BigInt::one(), BigInt::from(2).pow(200));
        let s = decimal_string(&tiny, 12);
        assert!(s.contains('e'), "expected scientific form, got {s}");
        assert!(s.starts_with("6.2230152778"), "got {s}");
        assert!(s.ends_with("e-61"), "got {s}");
        // boundary: 1e-5 still renders plain
        assert_eq!(decimal_string(&rat(1, 100_000), 3), "0.0000100");
    }

    proptest! {
        #[test]
        fn parse_render_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = rat(n, d);
            prop_assert_eq!(parse_rational(&render_rational(&r)).unwrap(), r);
        }

        #[test]
        fn decimal_is_close_to_float(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = rat(n, d);
            let rendered: f64 = decimal_string(&r, 12).parse().unwrap();
            let direct = n as f64 / d as f64;
            prop_assert!((rendered - direct).abs() <= 1e-9 * direct.abs().max(1.0));
        }
    }
}
