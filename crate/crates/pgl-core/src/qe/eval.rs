//! Exact evaluation of quantifier-free formulas over the standard model.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::formula::{Atom, Formula, LinForm, ValueTerm};
use crate::group::{GroupElement, Val};

pub type Env = BTreeMap<String, GroupElement>;

pub(crate) fn shift_i64(shift: &BigInt) -> Result<i64> {
    i64::try_from(shift.clone())
        .map_err(|_| Error::Overflow(format!("valuation shift {shift} out of range")))
}

/// Evaluate a quantifier-free formula under a total environment, using the
/// exact valuation path throughout.
pub fn eval_ground(f: &Formula, env: &Env, cfg: &Config) -> Result<bool> {
    match f {
        Formula::Atom(a) => eval_atom(a, env, cfg),
        Formula::Not(g) => Ok(!eval_ground(g, env, cfg)?),
        Formula::And(items) => {
            for g in items {
                if !eval_ground(g, env, cfg)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(items) => {
            for g in items {
                if eval_ground(g, env, cfg)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Quant { .. } => {
            Err(Error::Domain("eval_ground expects a quantifier-free formula".into()))
        }
    }
}

fn eval_atom(a: &Atom, env: &Env, cfg: &Config) -> Result<bool> {
    let elem = |t: &crate::formula::GroupTerm| -> Result<GroupElement> {
        LinForm::from_term(t).eval(env)
    };
    match a {
        Atom::ValCmp { term, shift, cmp, rhs } => {
            let lhs = cfg.big_v(&elem(term)?).shift(shift_i64(shift)?);
            let rv = match rhs {
                ValueTerm::Lit(c) => Val::Fin(shift_i64(c)?),
                ValueTerm::Inf => Val::Inf,
                ValueTerm::V { term, shift } => {
                    cfg.big_v(&elem(term)?).shift(shift_i64(shift)?)
                }
            };
            Ok(cmp.eval(&lhs, &rv))
        }
        Atom::Eq(l, r) => Ok(elem(l)? == elem(r)?),
        Atom::Cong { lhs, modulus, rhs } => {
            let n = u64::try_from(modulus.clone())
                .map_err(|_| Error::Overflow(format!("congruence modulus {modulus}")))?;
            Ok(cfg.cong(&elem(lhs)?, &elem(rhs)?, n))
        }
        Atom::InH(v) => Ok(env
            .get(v)
            .ok_or_else(|| Error::Domain(format!("unbound variable {v}")))?
            .in_h()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn cfg() -> Config {
        Config::new(5, 6, 11).unwrap()
    }

    fn env(pairs: &[(&str, (i64, i64))]) -> Env {
        pairs
            .iter()
            .map(|(v, (m, n))| (v.to_string(), GroupElement::from_i64(*m, *n)))
            .collect()
    }

    #[test]
    fn eval_examples() {
        let c = cfg();
        let e = env(&[("x", (5, 0))]);
        assert!(eval_ground(&parse("V(x) >= 1").unwrap(), &e, &c).unwrap());
        let e = env(&[("x", (3, 0))]);
        assert!(eval_ground(&parse("H(x)").unwrap(), &e, &c).unwrap());
        let e = env(&[("x", (3, 2))]);
        assert!(eval_ground(&parse("x cong 2 a").unwrap(), &e, &c).unwrap());
        assert!(!eval_ground(&parse("H(x)").unwrap(), &e, &c).unwrap());
    }

    #[test]
    fn eval_value_comparisons_with_inf() {
        let c = cfg();
        let e = env(&[("x", (0, 0))]);
        assert!(eval_ground(&parse("V(x) = inf").unwrap(), &e, &c).unwrap());
        assert!(eval_ground(&parse("V(x) + 3 = inf").unwrap(), &e, &c).unwrap());
        assert!(!eval_ground(&parse("V(x) < inf").unwrap(), &e, &c).unwrap());
        assert!(eval_ground(&parse("V(x) >= V(a) + 7").unwrap(), &e, &c).unwrap());
    }
}
