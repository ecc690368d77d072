//! Small helpers over arbitrary-precision integers and rationals.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

/// Exponent of `p` in a nonzero integer.
pub fn vp_bigint(n: &BigInt, p: u64) -> Result<i64> {
    if n.is_zero() {
        return Err(Error::ZeroValuation);
    }
    let p = BigInt::from(p);
    let mut v = 0i64;
    let mut m = n.abs();
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return Ok(v);
        }
        v += 1;
        m = q;
    }
}

/// `v_p(num) - v_p(den)` of a nonzero rational, exactly.
pub fn vp_rat(q: &Rat, p: u64) -> Result<i64> {
    if q.is_zero() {
        return Err(Error::ZeroValuation);
    }
    Ok(vp_bigint(q.numer(), p)? - vp_bigint(q.denom(), p)?)
}

/// `base^e` for a signed arbitrary-precision exponent.
pub fn rat_pow(base: &Rat, e: &BigInt) -> Result<Rat> {
    let (sign, mag) = (e.sign(), e.magnitude());
    let exp = u32::try_from(mag.clone())
        .map_err(|_| Error::Overflow(format!("exponent {e} too large to realize")))?;
    let powed = Rat::new(base.numer().pow(exp), base.denom().pow(exp));
    Ok(match sign {
        Sign::Minus => powed.recip(),
        _ => powed,
    })
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `p^v` as an exact rational (negative `v` gives `1/p^{-v}`).
pub fn p_power(p: u64, v: i64) -> Rat {
    let mag = BigInt::from(p).pow(v.unsigned_abs() as u32);
    if v >= 0 {
        Rat::from_integer(mag)
    } else {
        Rat::new(BigInt::one(), mag)
    }
}

/// Multiplicative inverse mod `modulus` (which must be coprime).
pub fn modinv(a: &BigInt, modulus: &BigInt) -> Result<BigInt> {
    let a = a.mod_floor(modulus);
    let ext = BigInt::extended_gcd(&a, modulus);
    if !ext.gcd.is_one() {
        return Err(Error::Domain(format!("{a} is not invertible mod {modulus}")));
    }
    Ok(ext.x.mod_floor(modulus))
}

/// Residue of a rational with p-free denominator, mod `modulus = p^M`.
pub fn rat_residue(q: &Rat, modulus: &BigInt) -> Result<BigInt> {
    let den = q.denom().mod_floor(modulus);
    let inv = modinv(&den, modulus)?;
    Ok((q.numer().mod_floor(modulus) * inv).mod_floor(modulus))
}

/// Deterministic Miller-Rabin, valid for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division (fine for the u64 generators we see).
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut push = |p: u64, e: u32| {
        if e > 0 {
            out.push((p, e));
        }
    };
    for p in [2u64, 3] {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        push(p, e);
    }
    let mut p = 5u64;
    let mut step = 2u64;
    while p.saturating_mul(p) <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        push(p, e);
        p += step;
        step = 6 - step;
    }
    if n > 1 {
        push(n, 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vp_of_rationals() {
        let q = Rat::new(BigInt::from(75), BigInt::from(1));
        assert_eq!(vp_rat(&q, 5).unwrap(), 2);
        let q = Rat::new(BigInt::from(-5), BigInt::from(11));
        assert_eq!(vp_rat(&q, 5).unwrap(), 1);
        let q = Rat::new(BigInt::from(3), BigInt::from(50));
        assert_eq!(vp_rat(&q, 5).unwrap(), -2);
        assert_eq!(vp_rat(&Rat::zero(), 5), Err(Error::ZeroValuation));
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..100).filter(|&n| is_prime_u64(n)).collect();
        assert_eq!(
            primes,
            vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97]
        );
        assert!(is_prime_u64(2_147_483_647));
        assert!(!is_prime_u64(2_147_483_649));
    }

    #[test]
    fn factorize_small() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(97), vec![(97, 1)]);
        assert_eq!(factorize(1), vec![]);
    }

    #[test]
    fn modular_inverse() {
        let m = BigInt::from(125);
        let inv2 = modinv(&BigInt::from(2), &m).unwrap();
        assert_eq!(inv2, BigInt::from(63));
        assert!(modinv(&BigInt::from(5), &m).is_err());
    }
}
