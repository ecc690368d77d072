//! Ambient parameters of the dense-case standard model: a prime `p` and two
//! multiplicatively independent naturals `alpha, beta` of zero valuation,
//! normalized (by replacing each with a power of itself) so that
//! `v_p(alpha - 1) = v_p(beta - 1) = k >= 1`, with `k >= 2` when `p = 2`.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::mann::mult_indep;
use crate::rational::{is_prime_u64, vp_bigint, Rat};

pub const DEFAULT_MAX_PRECISION: u32 = 4096;
pub const DEFAULT_BOUND: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    p: u64,
    alpha: BigInt,
    beta: BigInt,
    k: u32,
    max_precision: u32,
    default_bound: u64,
    input_alpha: u64,
    input_beta: u64,
    alpha_power: u32,
    beta_power: u32,
}

impl Config {
    /// Validate and normalize `(p, alpha, beta)`.
    ///
    /// Rejects composite `p`, generators `<= 1` or with positive valuation,
    /// and multiplicatively dependent pairs (with the dependence witness in
    /// the error: the pair collapses to a rank-1 group of finite index, a
    /// different model).
    pub fn new(p: u64, input_alpha: u64, input_beta: u64) -> Result<Self> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        for g in [input_alpha, input_beta] {
            if g <= 1 {
                return Err(Error::GeneratorTooSmall(g));
            }
            if g % p == 0 {
                return Err(Error::GeneratorNotUnit { p, generator: g });
            }
        }
        if let Some((m, n)) = mult_indep(input_alpha, input_beta).dependence_witness() {
            return Err(Error::DependentGenerators { a: input_alpha, b: input_beta, m, n });
        }

        let (a, a_pow) = normalize_one_unit(p, input_alpha);
        let (b, b_pow) = normalize_one_unit(p, input_beta);
        let ka = vp_of_minus_one(&a, p);
        let kb = vp_of_minus_one(&b, p);
        // raising to the p-th power inside 1 + p^j Z_p bumps v_p(x - 1) by
        // exactly one, so the smaller side catches up in max(ka,kb) - min steps
        let (alpha, alpha_power, beta, beta_power, k) = if ka < kb {
            let diff = (kb - ka) as u32;
            (a.pow(p.pow(diff) as u32), a_pow * p.pow(diff) as u32, b, b_pow, kb as u32)
        } else if kb < ka {
            let diff = (ka - kb) as u32;
            (a, a_pow, b.pow(p.pow(diff) as u32), b_pow * p.pow(diff) as u32, ka as u32)
        } else {
            (a, a_pow, b, b_pow, ka as u32)
        };

        debug_assert_eq!(vp_of_minus_one(&alpha, p), k as i64);
        debug_assert_eq!(vp_of_minus_one(&beta, p), k as i64);
        debug_assert!(k >= 1 && (p != 2 || k >= 2));

        Ok(Self {
            p,
            alpha,
            beta,
            k,
            max_precision: DEFAULT_MAX_PRECISION,
            default_bound: DEFAULT_BOUND,
            input_alpha,
            input_beta,
            alpha_power,
            beta_power,
        })
    }

    pub fn with_max_precision(mut self, max_precision: u32) -> Self {
        self.max_precision = max_precision.max(1);
        self
    }

    pub fn with_default_bound(mut self, bound: u64) -> Self {
        self.default_bound = bound;
        self
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Normalized generator of `H` (the constant `1` of the pair language).
    pub fn alpha(&self) -> &BigInt {
        &self.alpha
    }

    /// Normalized second generator (the constant `C` of the pair language).
    pub fn beta(&self) -> &BigInt {
        &self.beta
    }

    pub fn alpha_rat(&self) -> Rat {
        Rat::from_integer(self.alpha.clone())
    }

    pub fn beta_rat(&self) -> Rat {
        Rat::from_integer(self.beta.clone())
    }

    /// The common `k = v_p(alpha - 1) = v_p(beta - 1)`.
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn max_precision(&self) -> u32 {
        self.max_precision
    }

    pub fn default_bound(&self) -> u64 {
        self.default_bound
    }

    /// The generators as given, before power-replacement normalization.
    pub fn inputs(&self) -> (u64, u64) {
        (self.input_alpha, self.input_beta)
    }

    /// Powers used by normalization: `alpha = input_alpha^s`, `beta = input_beta^t`.
    pub fn normalization_powers(&self) -> (u32, u32) {
        (self.alpha_power, self.beta_power)
    }
}

fn vp_of_minus_one(x: &BigInt, p: u64) -> i64 {
    vp_bigint(&(x - BigInt::one()), p).expect("x > 1")
}

/// Replace `x` by the least power of itself lying in `1 + pZ_p`
/// (`1 + 4Z_2` when `p = 2`); returns the power used.
fn normalize_one_unit(p: u64, x: u64) -> (BigInt, u32) {
    let x_big = BigInt::from(x);
    if p == 2 {
        return if x % 4 == 1 { (x_big, 1) } else { (x_big.pow(2), 2) };
    }
    let d = order_mod_p(x, p);
    (x_big.pow(d), d)
}

/// Multiplicative order of `x` mod an odd prime `p`.
fn order_mod_p(x: u64, p: u64) -> u32 {
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % p as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    let mut ord = p - 1;
    for (q, _) in crate::rational::factorize(p - 1) {
        while ord % q == 0 && powmod(x, ord / q) == 1 {
            ord /= q;
        }
    }
    ord as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_dense_configs() {
        for (p, a, b, k) in [(5u64, 6u64, 11u64, 1u32), (3, 4, 7, 1), (7, 8, 29, 1)] {
            let cfg = Config::new(p, a, b).unwrap();
            assert_eq!(cfg.k(), k);
            assert_eq!(cfg.alpha(), &BigInt::from(a));
            assert_eq!(cfg.beta(), &BigInt::from(b));
            assert_eq!(cfg.normalization_powers(), (1, 1));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(Config::new(6, 7, 11), Err(Error::NotPrime(6))));
        assert!(matches!(Config::new(5, 1, 11), Err(Error::GeneratorTooSmall(1))));
        assert!(matches!(
            Config::new(5, 10, 11),
            Err(Error::GeneratorNotUnit { p: 5, generator: 10 })
        ));
        match Config::new(5, 4, 8) {
            Err(Error::DependentGenerators { m, n, .. }) => assert_eq!((m, n), (3, 2)),
            other => panic!("expected dependence, got {other:?}"),
        }
        assert!(matches!(Config::new(5, 6, 6), Err(Error::DependentGenerators { .. })));
    }

    #[test]
    fn normalizes_into_one_units() {
        // 7 has order 4 mod 5, so alpha becomes 7^4 = 2401 with k = 2;
        // 11 is already a 1-unit with k = 1 and gets raised to 11^5
        let cfg = Config::new(5, 7, 11).unwrap();
        assert_eq!(cfg.alpha(), &BigInt::from(2401));
        assert_eq!(cfg.beta(), &BigInt::from(161051u64));
        assert_eq!(cfg.k(), 2);
        assert_eq!(cfg.normalization_powers(), (4, 5));
        assert_eq!(cfg.inputs(), (7, 11));
    }

    #[test]
    fn p2_needs_k_at_least_two() {
        let cfg = Config::new(2, 3, 5).unwrap();
        assert!(cfg.k() >= 2);
        assert_eq!(cfg.alpha(), &BigInt::from(9));
        assert_eq!(cfg.beta(), &BigInt::from(25));
        assert_eq!(cfg.k(), 3);
    }
}
