//! Rationals coded as naturals through the pairing `j`, and reals as fast
//! Cauchy sequences of such codes with modulus `2^{-n}`.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealError {
    #[error("canonical representation requires a nonnegative rational, got {0}")]
    NegativeInput(BigRational),
    #[error("cannot parse rational `{0}`")]
    Parse(String),
}

/// `j(n, m)`: the `u` with `2u = (n+m)² + 3n + m`.
pub fn pair_j(n: &BigUint, m: &BigUint) -> BigUint {
    let w = n + m;
    let q = &w * &w + BigUint::from(3u8) * n + m;
    debug_assert!(q.is_even(), "pairing numerator is always even");
    q >> 1
}

pub fn pair_j_u64(n: u64, m: u64) -> u64 {
    let w = n + m;
    (w * w + 3 * n + m) / 2
}

/// Inverse of [`pair_j`].
pub fn unpair_j(u: &BigUint) -> (BigUint, BigUint) {
    // u = w(w+1)/2 + n with w = n+m; find the largest w with w(w+1)/2 ≤ u.
    let eight_u_plus_one: BigUint = (u.clone() << 3u32) + BigUint::one();
    let mut w: BigUint = (eight_u_plus_one.sqrt() - BigUint::one()) >> 1;
    while triangular(&(&w + 1u8)) <= *u {
        w += 1u8;
    }
    while triangular(&w) > *u {
        w -= 1u8;
    }
    let n = u - triangular(&w);
    let m = &w - &n;
    (n, m)
}

fn triangular(w: &BigUint) -> BigUint {
    (w * (w + 1u8)) >> 1
}

/// A rational code `j(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatCode(pub BigUint);

impl RatCode {
    pub fn from_parts(a: &BigUint, b: &BigUint) -> RatCode {
        RatCode(pair_j(a, b))
    }

    /// Decodes `j(a,b)` to `(a/2)/(b+1)` for even `a`, `-((a+1)/2)/(b+1)` for odd `a`.
    pub fn value(&self) -> BigRational {
        let (a, b) = unpair_j(&self.0);
        let den = BigInt::from(b + 1u8);
        if a.is_even() {
            BigRational::new(BigInt::from(a >> 1), den)
        } else {
            BigRational::new(-BigInt::from((a + 1u8) >> 1), den)
        }
    }

    /// Some code of `q` (not canonical beyond the choice of reduced form).
    pub fn encode(q: &BigRational) -> RatCode {
        let num = q.numer();
        let den = q.denom();
        let b = den.magnitude() - 1u8;
        let a = if num.sign() == Sign::Minus {
            (num.magnitude() << 1) - 1u8
        } else {
            num.magnitude() << 1
        };
        RatCode::from_parts(&a, &b)
    }
}

pub fn rat_value(c: &RatCode) -> BigRational {
    c.value()
}

type SeqFn = dyn Fn(u32) -> RatCode + Send + Sync;

/// A real as a sequence `n ↦ code`, evaluated on demand.
#[derive(Clone)]
pub struct RealCode {
    seq: Arc<SeqFn>,
    /// Whether the sequence is claimed to satisfy the `2^{-n}` modulus.
    pub fast_cauchy: bool,
}

impl fmt::Debug for RealCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealCode")
            .field("approx0", &self.approx(0).to_string())
            .field("fast_cauchy", &self.fast_cauchy)
            .finish()
    }
}

fn pow2(n: u32) -> BigInt {
    BigInt::one() << n
}

fn dyadic(n: u32) -> BigRational {
    BigRational::new(BigInt::one(), pow2(n))
}

impl RealCode {
    pub fn from_fn(f: impl Fn(u32) -> RatCode + Send + Sync + 'static) -> RealCode {
        RealCode {
            seq: Arc::new(f),
            fast_cauchy: true,
        }
    }

    /// A sequence of rationals, coded on the fly.
    pub fn from_rationals(f: impl Fn(u32) -> BigRational + Send + Sync + 'static) -> RealCode {
        RealCode::from_fn(move |n| RatCode::encode(&f(n)))
    }

    pub fn constant(q: BigRational) -> RealCode {
        let code = RatCode::encode(&q);
        RealCode::from_fn(move |_| code.clone())
    }

    pub fn zero() -> RealCode {
        RealCode::constant(BigRational::zero())
    }

    pub fn code(&self, n: u32) -> RatCode {
        (self.seq)(n)
    }

    pub fn approx(&self, n: u32) -> BigRational {
        self.code(n).value()
    }

    pub fn to_f64(&self, n: u32) -> f64 {
        rat_to_f64(&self.approx(n))
    }

    /// Checks the modulus on all pairs `n, m ≤ upto`.
    pub fn check_modulus(&self, upto: u32) -> bool {
        let vals: Vec<BigRational> = (0..=upto).map(|n| self.approx(n)).collect();
        for n in 0..=upto {
            for m in n..=upto {
                let d = (&vals[n as usize] - &vals[m as usize]).abs();
                if d > dyadic(n) + dyadic(m) {
                    return false;
                }
            }
        }
        true
    }
}

pub fn rat_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Parses `p/q`, `p` or a finite decimal.
pub fn parse_rational(s: &str) -> Result<BigRational, RealError> {
    let err = || RealError::Parse(s.to_string());
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| err())?
        };
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let scale = BigInt::from(10u8).pow(frac.len() as u32);
        let f: BigInt = frac.parse().map_err(|_| err())?;
        let mag = int.abs() * &scale + f;
        let num = if neg { -mag } else { mag };
        return Ok(BigRational::new(num, scale));
    }
    let p: BigInt = s.parse().map_err(|_| err())?;
    Ok(BigRational::from_integer(p))
}

/// `k₀ = ⌊r · 2^{n+1}⌋`, the largest `k` with `k/2^{n+1} ≤ r`.
fn canonical_numerator(r: &BigRational, n: u32) -> BigUint {
    let scaled = r * BigRational::from_integer(pow2(n + 1));
    scaled
        .floor()
        .to_integer()
        .to_biguint()
        .expect("nonnegative input")
}

/// `(r)∘(n) = j(2k₀, 2^{n+1} − 1)`.
pub fn canonical_code(r: &BigRational, n: u32) -> Result<RatCode, RealError> {
    if r.is_negative() {
        return Err(RealError::NegativeInput(r.clone()));
    }
    let k0 = canonical_numerator(r, n);
    let den = (BigUint::one() << (n + 1)) - 1u8;
    Ok(RatCode::from_parts(&(k0 << 1), &den))
}

pub fn canonical_rep(r: &BigRational) -> Result<RealCode, RealError> {
    if r.is_negative() {
        return Err(RealError::NegativeInput(r.clone()));
    }
    let r = r.clone();
    let mut code =
        RealCode::from_fn(move |n| canonical_code(&r, n).expect("checked nonnegative"));
    code.fast_cauchy = true;
    Ok(code)
}

/// `(x+y)(n) = x(n+1) + y(n+1)`.
pub fn add(x: &RealCode, y: &RealCode) -> RealCode {
    let (x, y) = (x.clone(), y.clone());
    RealCode::from_rationals(move |n| x.approx(n + 1) + y.approx(n + 1))
}

pub fn neg(x: &RealCode) -> RealCode {
    let x = x.clone();
    RealCode::from_rationals(move |n| -x.approx(n))
}

pub fn sub(x: &RealCode, y: &RealCode) -> RealCode {
    add(x, &neg(y))
}

/// `|x|(n) = |x(n)|`.
pub fn abs(x: &RealCode) -> RealCode {
    let x = x.clone();
    RealCode::from_rationals(move |n| x.approx(n).abs())
}

/// Number of extra bits `⌈log₂(B+1)⌉ + 2` where `B = ⌈max(|x(0)|, |y(0)|)⌉ + 1`
/// bounds both factors.
fn product_shift(x: &RealCode, y: &RealCode) -> u32 {
    let m = x.approx(0).abs().max(y.approx(0).abs());
    let b = m.ceil().to_integer() + BigInt::one();
    let b1 = b + BigInt::one();
    // ⌈log₂(b1)⌉
    let bits = (b1.clone() - BigInt::one()).bits() as u32;
    bits + 2
}

/// `(x·y)(n)` reads both inputs at precision `n + ⌈log₂(B+1)⌉ + 2`.
pub fn mul(x: &RealCode, y: &RealCode) -> RealCode {
    let shift = product_shift(x, y);
    let (x, y) = (x.clone(), y.clone());
    RealCode::from_rationals(move |n| x.approx(n + shift) * y.approx(n + shift))
}

/// Reciprocal guarded by `l`: represents `1/x` whenever `|x| > 2^{-l}`, and is
/// a valid code of `0` whenever `|x(l+2)| ≤ 2^{-l-1}`. In the remaining band
/// `|x| > 2^{-l-2}` still holds, so the reciprocal branch stays well defined.
pub fn guarded_recip(x: &RealCode, l: u32) -> RealCode {
    let s = x.approx(l + 2);
    if s.abs() <= dyadic(l + 1) {
        return RealCode::zero();
    }
    // |x| ≥ |s| − 2^{-l-2} > 2^{-l-2}; reading at n + 2l + 6 keeps the error
    // of 1/x(k) below 2^{-k} · 2^{2l+4} ≤ 2^{-n-2}.
    let x = x.clone();
    RealCode::from_rationals(move |n| {
        let k = n + 2 * l + 6;
        x.approx(k).recip()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    Lt,
    Gt,
    Within,
}

/// Decides `x < y` or `x > y` whenever `|x − y| > 2^{-k}`; otherwise may
/// report `Within`.
pub fn compare_at(x: &RealCode, y: &RealCode, k: u32) -> Comparison {
    let d = x.approx(k + 2) - y.approx(k + 2);
    let gap = dyadic(k + 1);
    if d > gap {
        Comparison::Gt
    } else if d < -gap {
        Comparison::Lt
    } else {
        Comparison::Within
    }
}

/// `⌊q⌋` as a natural, clamped at zero.
pub fn floor_nat(q: &BigRational) -> u64 {
    let f = q.floor().to_integer();
    if f.is_negative() {
        0
    } else {
        f.to_u64().unwrap_or(u64::MAX)
    }
}

/// A code of a dyadic real given as an `f64`.
pub fn from_f64(v: f64) -> RealCode {
    RealCode::constant(BigRational::from_float(v).unwrap_or_else(BigRational::zero))
}
