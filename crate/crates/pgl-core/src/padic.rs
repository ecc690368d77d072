//! Exact p-adic primitives: valuations of rationals, a truncated p-adic
//! logarithm with precision bookkeeping, n-th power tests in `Q_p^x`, and the
//! `x -> p^{v_p(x)}` representative map.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{modinv, p_power, rat_residue, vp_bigint, vp_rat, Rat};

/// `v_p(q)` of a nonzero rational: `v_p(numerator) - v_p(denominator)`.
pub fn vp(q: &Rat, p: u64) -> Result<i64> {
    vp_rat(q, p)
}

/// `v_p(n)` of a nonzero integer.
pub fn vp_int(n: &BigInt, p: u64) -> Result<i64> {
    vp_bigint(n, p)
}

/// The unique element of `p^Z` with the same valuation as `x`.
pub fn lambda_rep(x: &Rat, p: u64) -> Result<Rat> {
    Ok(p_power(p, vp_rat(x, p)?))
}

/// A p-adic number known to absolute precision `N`: either a certified
/// `p^v * unit` with `v < N`, or "possibly zero", meaning the value is
/// congruent to 0 mod `p^N` and its valuation is not determined at this
/// precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicApprox {
    p: u64,
    precision: u32,
    form: Form,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Form {
    Unit { valuation: i64, unit: BigInt },
    PossiblyZero,
}

impl PadicApprox {
    /// Truncate an exact rational to absolute precision `N`.
    ///
    /// Requires `v_p(x) >= 0` so that residues mod `p^N` make sense.
    pub fn from_rational(x: &Rat, p: u64, precision: u32) -> Result<Self> {
        if x.is_zero() {
            return Ok(Self { p, precision, form: Form::PossiblyZero });
        }
        let v = vp_rat(x, p)?;
        if v < 0 {
            return Err(Error::Domain(format!(
                "cannot truncate {x} to p-adic integer precision: v_{p} = {v} < 0"
            )));
        }
        if v >= precision as i64 {
            return Ok(Self { p, precision, form: Form::PossiblyZero });
        }
        let unit_mod = BigInt::from(p).pow(precision - v as u32);
        let unit = rat_residue(&(x / p_power(p, v)), &unit_mod)?;
        Ok(Self { p, precision, form: Form::Unit { valuation: v, unit } })
    }

    fn from_residue(residue: BigInt, p: u64, precision: u32) -> Self {
        let modulus = BigInt::from(p).pow(precision);
        let residue = residue.mod_floor(&modulus);
        if residue.is_zero() {
            return Self { p, precision, form: Form::PossiblyZero };
        }
        let v = vp_bigint(&residue, p).expect("nonzero") as u32;
        debug_assert!(v < precision);
        let unit = residue / BigInt::from(p).pow(v);
        Self { p, precision, form: Form::Unit { valuation: v as i64, unit } }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Absolute precision exponent `N`: the value is known mod `p^N`.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Certified valuation, or `None` when the value is possibly zero at this
    /// precision.
    pub fn valuation(&self) -> Option<i64> {
        match &self.form {
            Form::Unit { valuation, .. } => Some(*valuation),
            Form::PossiblyZero => None,
        }
    }

    pub fn is_possibly_zero(&self) -> bool {
        matches!(self.form, Form::PossiblyZero)
    }

    /// The unit part `x / p^v` reduced mod `p^{N-v}`, when certified nonzero.
    pub fn unit_part(&self) -> Option<&BigInt> {
        match &self.form {
            Form::Unit { unit, .. } => Some(unit),
            Form::PossiblyZero => None,
        }
    }

    /// Canonical residue in `[0, p^N)`.
    pub fn residue(&self) -> BigInt {
        match &self.form {
            Form::Unit { valuation, unit } => {
                let modulus = BigInt::from(self.p).pow(self.precision);
                (BigInt::from(self.p).pow(*valuation as u32) * unit).mod_floor(&modulus)
            }
            Form::PossiblyZero => BigInt::zero(),
        }
    }

    /// Sum, at the minimum justified precision of the operands.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "mismatched primes");
        let precision = self.precision.min(other.precision);
        Self::from_residue(self.residue() + other.residue(), self.p, precision)
    }

    /// Scalar multiple. Multiplying by `c` with `v_p(c) = j` is justified to
    /// precision `N + j`: the unknown `O(p^N)` tail is scaled by `p^j` too.
    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self { p: self.p, precision: u32::MAX, form: Form::PossiblyZero };
        }
        let gain = vp_bigint(c, self.p).expect("nonzero") as u32;
        let precision = self.precision.saturating_add(gain);
        Self::from_residue(self.residue() * c, self.p, precision)
    }
}

impl fmt::Display for PadicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            Form::Unit { valuation, unit } => {
                write!(f, "{}^{} * {} + O({}^{})", self.p, valuation, unit, self.p, self.precision)
            }
            Form::PossiblyZero => write!(f, "O({}^{})", self.p, self.precision),
        }
    }
}

/// Minimal admissible `v_p(x - 1)` for the log series: 1, but 2 when `p = 2`
/// (callers with operands in `1 + 2Z_2` square them first).
pub fn log_domain_bound(p: u64) -> u32 {
    if p == 2 {
        2
    } else {
        1
    }
}

/// Truncated p-adic logarithm of `x` with `v_p(x - 1) >= log_domain_bound(p)`:
/// the alternating series `sum (-1)^{i+1} (x-1)^i / i` over all terms of
/// valuation `< N`, returned mod `p^N`.
///
/// The certified valuation of the result equals `v_p(x - 1)` whenever that is
/// below `N`.
pub fn padic_log(x: &Rat, p: u64, precision: u32) -> Result<PadicApprox> {
    assert!(precision >= 1, "precision must be >= 1");
    let t = x - Rat::one();
    if t.is_zero() {
        return Ok(PadicApprox { p, precision, form: Form::PossiblyZero });
    }
    let c = vp_rat(&t, p)?;
    let need = log_domain_bound(p);
    if c < need as i64 {
        return Err(Error::LogDomain { p, need, got: c });
    }
    let c = c as u32;

    let modulus = BigInt::from(p).pow(precision);
    let a_unit = rat_residue(&(&t / p_power(p, c as i64)), &modulus)?;
    let n = precision as i64;

    let mut acc = BigInt::zero();
    let mut unit_pow = BigInt::one();
    let mut floor_log = 0i64; // floor(log_p(i))
    let mut next_pow: u64 = p;
    let mut i: u64 = 1;
    loop {
        if i == next_pow {
            floor_log += 1;
            next_pow = next_pow.saturating_mul(p);
        }
        // i*c - floor(log_p i) is a non-decreasing lower bound on the term
        // valuation; once it reaches N no later term contributes mod p^N.
        if i >= 2 && i as i64 * c as i64 - floor_log >= n {
            break;
        }
        unit_pow = (&unit_pow * &a_unit).mod_floor(&modulus);
        let vi = {
            let mut v = 0u32;
            let mut m = i;
            while m % p == 0 {
                m /= p;
                v += 1;
            }
            v
        };
        let vterm = i as i64 * c as i64 - vi as i64;
        if vterm < n {
            let i_unit = BigInt::from(i / p.pow(vi));
            let term = (BigInt::from(p).pow(vterm as u32) * &unit_pow * modinv(&i_unit, &modulus)?)
                .mod_floor(&modulus);
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
            acc = acc.mod_floor(&modulus);
        }
        i += 1;
    }
    Ok(PadicApprox::from_residue(acc, p, precision))
}

/// Decide `x in (Q_p^x)^n` for `n >= 2`, exactly and totally.
///
/// The valuation must be divisible by `n`; the unit part is then tested at
/// the finite precision `p^{2 v_p(n) + 1}`, which suffices by Hensel lifting.
pub fn is_nth_power(x: &Rat, n: u64, p: u64) -> Result<bool> {
    assert!(n >= 2, "power index must be >= 2");
    let v = vp_rat(x, p)?;
    if v.rem_euclid(n as i64) != 0 {
        return Ok(false);
    }
    let unit = x / p_power(p, v);
    let a = {
        let mut a = 0u32;
        let mut m = n;
        while m % p == 0 {
            m /= p;
            a += 1;
        }
        a
    };
    if p == 2 {
        if n % 2 == 1 {
            // odd powers are bijective on Z_2^x
            return Ok(true);
        }
        // (Z_2^x)^{2^a} = 1 + 2^{a+2} Z_2 for a >= 1
        let modulus = BigInt::from(2).pow(a + 2);
        return Ok(rat_residue(&unit, &modulus)?.is_one());
    }
    let m_exp = 2 * a + 1;
    let modulus = BigInt::from(p).pow(m_exp);
    let phi = BigInt::from(p).pow(m_exp - 1) * BigInt::from(p - 1);
    let g = phi.gcd(&BigInt::from(n));
    let u = rat_residue(&unit, &modulus)?;
    // (Z/p^M)^x is cyclic for odd p: u is an n-th power iff u^(phi/g) = 1
    Ok(u.modpow(&(&phi / &g), &modulus).is_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    // independent oracle: repeated exact division
    fn vp_oracle(mut num: i64, p: i64) -> i64 {
        assert!(num != 0);
        let mut v = 0;
        while num % p == 0 {
            num /= p;
            v += 1;
        }
        v
    }

    #[test]
    fn vp_examples() {
        assert_eq!(vp(&rat_int(75), 5).unwrap(), 2);
        assert_eq!(vp(&rat(-5, 11), 5).unwrap(), 1);
        assert_eq!(vp(&rat_int(63), 3).unwrap(), vp_oracle(63, 3));
        assert_eq!(vp(&rat_int(63), 3).unwrap(), 2);
    }

    #[test]
    fn log_example_residue() {
        // series oracle: 5 - 25/2 mod 125, with 2^{-1} = 63 mod 125, gives 55
        let l = padic_log(&rat_int(6), 5, 3).unwrap();
        assert_eq!(l.residue(), BigInt::from(55));
        assert_eq!(l.valuation(), Some(1));
    }

    #[test]
    fn log_of_identity_is_zero() {
        for n in [1u32, 4, 32] {
            let l = padic_log(&rat_int(1), 5, n).unwrap();
            assert!(l.is_possibly_zero());
            assert_eq!(l.residue(), BigInt::zero());
        }
    }

    #[test]
    fn log_valuation_matches_vp_of_x_minus_1() {
        for n in 2..=10 {
            let l = padic_log(&rat_int(6), 5, n).unwrap();
            assert_eq!(l.valuation(), Some(1));
        }
        // a rational operand: x = 1 + 5^2 * 3/7
        let x = Rat::one() + rat(75, 7);
        for n in 3..=12 {
            let l = padic_log(&x, 5, n).unwrap();
            assert_eq!(l.valuation(), Some(2));
        }
    }

    #[test]
    fn log_domain_is_enforced() {
        assert!(matches!(
            padic_log(&rat_int(7), 5, 8),
            Err(Error::LogDomain { need: 1, .. })
        ));
        // 3 = 1 + 2 has v_2 = 1 < 2
        assert!(matches!(
            padic_log(&rat_int(3), 2, 8),
            Err(Error::LogDomain { need: 2, .. })
        ));
        // but 9 = 1 + 8 is fine
        assert_eq!(padic_log(&rat_int(9), 2, 8).unwrap().valuation(), Some(3));
    }

    #[test]
    fn log_is_additive_on_products() {
        let xs = [rat_int(6), rat_int(11), rat(26, 21), rat_int(126), rat(1, 6)];
        for x in &xs {
            for y in &xs {
                for n in [4u32, 9, 17] {
                    let lx = padic_log(x, 5, n).unwrap();
                    let ly = padic_log(y, 5, n).unwrap();
                    let lxy = padic_log(&(x * y), 5, n).unwrap();
                    assert_eq!(lx.add(&ly).residue(), lxy.residue(), "x={x} y={y} N={n}");
                }
            }
        }
    }

    #[test]
    fn nth_power_examples() {
        assert!(is_nth_power(&rat_int(6), 2, 5).unwrap());
        assert!(!is_nth_power(&rat_int(2), 2, 5).unwrap());
        assert!(is_nth_power(&rat_int(25), 2, 5).unwrap());
        assert!(!is_nth_power(&rat_int(5), 2, 5).unwrap());
        // 2-adic squares among units are exactly 1 mod 8
        assert!(is_nth_power(&rat_int(17), 2, 2).unwrap());
        assert!(!is_nth_power(&rat_int(3), 2, 2).unwrap());
        assert!(is_nth_power(&rat_int(-7), 2, 2).unwrap());
        // odd powers are onto Z_2^x
        assert!(is_nth_power(&rat_int(5), 3, 2).unwrap());
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_rep(&rat_int(50), 5).unwrap(), rat_int(25));
        assert_eq!(lambda_rep(&rat(3, 4), 2).unwrap(), rat(1, 4));
        assert_eq!(lambda_rep(&rat_int(1), 3).unwrap(), rat_int(1));
        assert!(lambda_rep(&Rat::zero(), 5).is_err());
    }

    #[test]
    fn scale_gains_precision() {
        let x = PadicApprox::from_rational(&rat_int(7), 5, 4).unwrap();
        let y = x.scale(&BigInt::from(25));
        assert_eq!(y.precision(), 6);
        assert_eq!(y.valuation(), Some(2));
    }
}
