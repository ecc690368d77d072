//! The concrete standard model `(G, H, V) = (alpha^Z beta^Z, alpha^Z, V_p)`:
//! exact valuation, congruence, residue and quotient computations.
//!
//! Formulas over the pair use additive notation while the model is
//! multiplicative; the bridge is applied once here: a group term `l*x - a`
//! is realized as `x^l * a^{-1}`, i.e. all group operations act on exponent
//! pairs and only valuations touch the rational realization.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::padic::padic_log;
use crate::rational::{modinv, rat_pow, vp_rat, Rat};

/// Element `alpha^m * beta^n` of `G`, identified by its exponent pair
/// (freeness is guaranteed by multiplicative independence of the generators).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct GroupElement {
    pub m: BigInt,
    pub n: BigInt,
}

impl GroupElement {
    pub fn new(m: BigInt, n: BigInt) -> Self {
        Self { m, n }
    }

    pub fn from_i64(m: i64, n: i64) -> Self {
        Self { m: BigInt::from(m), n: BigInt::from(n) }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn is_identity(&self) -> bool {
        self.m.is_zero() && self.n.is_zero()
    }

    /// Group operation in additive notation (multiplication of realizations).
    pub fn add(&self, other: &Self) -> Self {
        Self { m: &self.m + &other.m, n: &self.n + &other.n }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { m: &self.m - &other.m, n: &self.n - &other.n }
    }

    pub fn neg(&self) -> Self {
        Self { m: -&self.m, n: -&self.n }
    }

    /// `c * g` in additive notation (`g^c` multiplicatively).
    pub fn scale(&self, c: &BigInt) -> Self {
        Self { m: &self.m * c, n: &self.n * c }
    }

    /// Membership in `H = alpha^Z`.
    pub fn in_h(&self) -> bool {
        self.n.is_zero()
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g({},{})", self.m, self.n)
    }
}

/// A value of the group valuation: a natural number or infinity.
///
/// The successor convention of the value sort is built in: shifting infinity
/// leaves it fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Val {
    Fin(i64),
    Inf,
}

impl Val {
    pub fn shift(self, r: i64) -> Val {
        match self {
            Val::Fin(v) => Val::Fin(v + r),
            Val::Inf => Val::Inf,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Val::Fin(_))
    }
}

impl PartialOrd for Val {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Val {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use Val::*;
        match (self, other) {
            (Inf, Inf) => std::cmp::Ordering::Equal,
            (Inf, Fin(_)) => std::cmp::Ordering::Greater,
            (Fin(_), Inf) => std::cmp::Ordering::Less,
            (Fin(a), Fin(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Fin(v) => write!(f, "{v}"),
            Val::Inf => write!(f, "inf"),
        }
    }
}

/// Which computation path `big_v` takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VMethod {
    /// Exact rational realization; never fails.
    Exact,
    /// Truncated p-adic logarithms at escalating precision; may report
    /// indeterminate precision, in which case callers fall back to `Exact`.
    Log,
}

/// The two sorts of the pair language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    G,
    H,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::G => write!(f, "G"),
            Sort::H => write!(f, "H"),
        }
    }
}

impl Config {
    /// The exact rational `alpha^m * beta^n`.
    pub fn realize(&self, g: &GroupElement) -> Rat {
        let a = rat_pow(&self.alpha_rat(), &g.m).expect("exponent exceeds exact-realization range");
        let b = rat_pow(&self.beta_rat(), &g.n).expect("exponent exceeds exact-realization range");
        a * b
    }

    /// `alpha^m * beta^n mod p^e` (exponents may be negative; the generators
    /// are units). Fast path for valuation threshold tests on huge exponents.
    pub fn realize_residue(&self, g: &GroupElement, e: u32) -> BigInt {
        let modulus = BigInt::from(self.p()).pow(e);
        let pow_mod = |base: &BigInt, exp: &BigInt| -> BigInt {
            if exp.is_negative() {
                let inv = modinv(base, &modulus).expect("generator is a unit");
                inv.modpow(&exp.abs(), &modulus)
            } else {
                base.modpow(exp, &modulus)
            }
        };
        (pow_mod(self.alpha(), &g.m) * pow_mod(self.beta(), &g.n)).mod_floor(&modulus)
    }

    /// Exact test `V(g) >= gamma` via the congruence `realization = 1 mod
    /// p^{gamma+k}`; avoids materializing huge rationals.
    pub fn big_v_at_least(&self, g: &GroupElement, gamma: i64) -> bool {
        if g.is_identity() {
            return true;
        }
        if gamma <= 0 {
            return true;
        }
        let e = gamma as u32 + self.k();
        self.realize_residue(g, e).is_one()
    }

    /// `V(g) = v_p(realization - 1) - k`, by the requested method. Both
    /// methods agree; `Exact` is total.
    pub fn big_v_with(&self, g: &GroupElement, method: VMethod) -> Result<Val> {
        match method {
            VMethod::Exact => Ok(self.big_v(g)),
            VMethod::Log => self.big_v_log(g),
        }
    }

    /// Exact valuation via the rational realization.
    pub fn big_v(&self, g: &GroupElement) -> Val {
        if g.is_identity() {
            return Val::Inf;
        }
        let x = self.realize(g);
        let v = vp_rat(&(x - Rat::one()), self.p())
            .expect("realization of a non-identity element is not 1, by independence");
        debug_assert!(v >= self.k() as i64);
        Val::Fin(v - self.k() as i64)
    }

    /// Valuation via `v_p(m log alpha + n log beta) - k` at escalating
    /// precision (32, doubling up to `max_precision`).
    pub fn big_v_log(&self, g: &GroupElement) -> Result<Val> {
        if g.is_identity() {
            return Ok(Val::Inf);
        }
        let mut precision = 32.min(self.max_precision());
        loop {
            let combined = if g.m.is_zero() {
                padic_log(&self.beta_rat(), self.p(), precision)?.scale(&g.n)
            } else if g.n.is_zero() {
                padic_log(&self.alpha_rat(), self.p(), precision)?.scale(&g.m)
            } else {
                let la = padic_log(&self.alpha_rat(), self.p(), precision)?.scale(&g.m);
                let lb = padic_log(&self.beta_rat(), self.p(), precision)?.scale(&g.n);
                la.add(&lb)
            };
            if let Some(v) = combined.valuation() {
                debug_assert!(v >= self.k() as i64);
                return Ok(Val::Fin(v - self.k() as i64));
            }
            if precision >= self.max_precision() {
                return Err(Error::Indeterminate {
                    reached: precision,
                    max: self.max_precision(),
                });
            }
            precision = (precision * 2).min(self.max_precision());
        }
    }

    /// `g = h` in `G/nG`, i.e. componentwise congruence of exponents mod `n`.
    pub fn cong(&self, g: &GroupElement, h: &GroupElement, n: u64) -> bool {
        assert!(n >= 1, "congruence modulus must be >= 1");
        let nn = BigInt::from(n);
        (&g.m - &h.m).is_multiple_of(&nn) && (&g.n - &h.n).is_multiple_of(&nn)
    }

    /// The unique `0 < i < p` with `V(x - i*y) > V(x)`, for `V(x) = V(y)`
    /// finite.
    pub fn residue_unit(&self, x: &GroupElement, y: &GroupElement) -> Result<u64> {
        let vx = self.big_v(x);
        let vy = self.big_v(y);
        if vx != vy || !vx.is_finite() {
            return Err(Error::Domain(format!(
                "residue_unit needs V(x) = V(y) < inf, got V(x) = {vx}, V(y) = {vy}"
            )));
        }
        for i in 1..self.p() {
            let z = x.sub(&y.scale(&BigInt::from(i)));
            if self.big_v(&z) > vx {
                return Ok(i);
            }
        }
        Err(Error::Domain(
            "no residue index in 1..p satisfies V(x - i*y) > V(x); model invariant violated".into(),
        ))
    }
}

/// A complete irredundant system of representatives of `G/nG` (the `n^2`
/// exponent pairs below `n`) or of `H/nH`.
pub fn quotient_reps(n: u64, sort: Sort) -> Vec<GroupElement> {
    assert!(n >= 2, "quotient modulus must be >= 2");
    match sort {
        Sort::G => (0..n)
            .flat_map(|i| (0..n).map(move |j| GroupElement::from_i64(i as i64, j as i64)))
            .collect(),
        Sort::H => (0..n).map(|i| GroupElement::from_i64(i as i64, 0)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::new(5, 6, 11).unwrap()
    }

    #[test]
    fn big_v_examples() {
        let c = cfg();
        assert_eq!(c.big_v(&GroupElement::from_i64(1, 0)), Val::Fin(0));
        assert_eq!(c.big_v(&GroupElement::from_i64(0, 0)), Val::Inf);
        // 6^5 - 1 = 7775 = 5^2 * 311, so V = 2 - k = 1
        assert_eq!(c.big_v(&GroupElement::from_i64(5, 0)), Val::Fin(1));
    }

    #[test]
    fn big_v_modular_threshold_agrees() {
        let c = cfg();
        for (m, n) in [(1i64, 0i64), (5, 0), (3, -2), (25, 10), (-5, 5)] {
            let g = GroupElement::from_i64(m, n);
            if let Val::Fin(v) = c.big_v(&g) {
                assert!(c.big_v_at_least(&g, v));
                assert!(!c.big_v_at_least(&g, v + 1));
            }
        }
    }

    #[test]
    fn dual_path_agreement_small() {
        let c = cfg();
        for m in -6..=6 {
            for n in -6..=6 {
                let g = GroupElement::from_i64(m, n);
                assert_eq!(c.big_v_log(&g).unwrap(), c.big_v(&g), "at ({m},{n})");
            }
        }
    }

    #[test]
    fn cong_examples() {
        let c = cfg();
        assert!(c.cong(&GroupElement::from_i64(3, 2), &GroupElement::from_i64(1, 0), 2));
        assert!(!c.cong(&GroupElement::from_i64(1, 0), &GroupElement::from_i64(0, 1), 2));
        let g = GroupElement::from_i64(-7, 4);
        for n in [1, 2, 3, 5] {
            assert!(c.cong(&g, &g, n));
        }
    }

    #[test]
    fn residue_unit_examples() {
        let c = cfg();
        // smallest i with 6 = 11^i mod 25 is 3
        assert_eq!(
            c.residue_unit(&GroupElement::from_i64(1, 0), &GroupElement::from_i64(0, 1)).unwrap(),
            3
        );
        let x = GroupElement::from_i64(5, 0);
        assert_eq!(c.residue_unit(&x, &x).unwrap(), 1);
        // mismatched valuations are a domain error
        assert!(c
            .residue_unit(&GroupElement::from_i64(1, 0), &GroupElement::from_i64(5, 0))
            .is_err());
    }

    #[test]
    fn residue_unit_uniqueness_on_samples() {
        let c = cfg();
        let pairs = [
            (GroupElement::from_i64(1, 0), GroupElement::from_i64(0, 1)),
            (GroupElement::from_i64(2, 1), GroupElement::from_i64(1, 1)),
            (GroupElement::from_i64(5, 0), GroupElement::from_i64(0, 5)),
        ];
        for (x, y) in pairs {
            if c.big_v(&x) != c.big_v(&y) {
                continue;
            }
            let vx = c.big_v(&x);
            let hits: Vec<u64> = (1..c.p())
                .filter(|i| c.big_v(&x.sub(&y.scale(&BigInt::from(*i)))) > vx)
                .collect();
            assert_eq!(hits.len(), 1, "x={x:?} y={y:?}");
        }
    }

    #[test]
    fn quotient_rep_counts() {
        assert_eq!(quotient_reps(2, Sort::G).len(), 4);
        assert_eq!(quotient_reps(3, Sort::H).len(), 3);
        let c = cfg();
        let reps = quotient_reps(2, Sort::G);
        for (i, a) in reps.iter().enumerate() {
            for b in &reps[i + 1..] {
                assert!(!c.cong(a, b, 2));
            }
        }
    }

    #[test]
    fn value_surjectivity_onto_initial_segment() {
        // V(alpha^(p^N)) = N by the p-valued group law; exponent p^N is
        // within the stated search box |m| <= p^N
        let c = cfg();
        for target in 0..=10i64 {
            let g = GroupElement::new(BigInt::from(5).pow(target as u32), BigInt::zero());
            assert!(c.big_v_at_least(&g, target));
            assert!(!c.big_v_at_least(&g, target + 1));
        }
    }

    #[test]
    fn valuation_laws_sampled() {
        let c = cfg();
        for m in -4i64..=4 {
            for n in -4i64..=4 {
                let g = GroupElement::from_i64(m, n);
                for l in [-6i64, -2, -1, 1, 2, 3, 5, 10, 25] {
                    let lhs = c.big_v(&g.scale(&BigInt::from(l)));
                    let vp_l = crate::rational::vp_bigint(&BigInt::from(l), 5).unwrap();
                    assert_eq!(lhs, c.big_v(&g).shift(vp_l), "g=({m},{n}), l={l}");
                }
                for m2 in -3i64..=3 {
                    for n2 in -3i64..=3 {
                        let h = GroupElement::from_i64(m2, n2);
                        let vs = c.big_v(&g.add(&h));
                        let (vg, vh) = (c.big_v(&g), c.big_v(&h));
                        assert!(vs >= vg.min(vh));
                        if vg != vh {
                            assert_eq!(vs, vg.min(vh));
                        }
                    }
                }
            }
        }
    }
}
