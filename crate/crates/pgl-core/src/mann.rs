//! Bounded enumeration of nondegenerate solutions of Mann equations
//! `a_1 x_1 + ... + a_n x_n = 1` over a rank-2 group `g1^Z * g2^Z <= Q^x`,
//! plus the multiplicative-independence test and Mann-axiom emission.
//!
//! Solution lists are exhaustive over the exponent box `|exponents| <= B` and
//! are explicitly bound-relative: no completeness beyond the box is claimed.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::rational::{factorize, rat_pow, Rat};

/// Default ceiling on the enumeration scan size.
pub const DEFAULT_SCAN_CEILING: u128 = 200_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Independence {
    Independent,
    /// `a^m = b^n` with `m, n > 0` in lowest terms.
    Dependent { m: u64, n: u64 },
}

impl Independence {
    pub fn is_independent(&self) -> bool {
        matches!(self, Independence::Independent)
    }

    pub fn dependence_witness(&self) -> Option<(u64, u64)> {
        match self {
            Independence::Independent => None,
            Independence::Dependent { m, n } => Some((*m, *n)),
        }
    }
}

/// Test multiplicative independence of `a, b > 1` by factoring both into
/// prime-exponent vectors and checking linear dependence over Q.
pub fn mult_indep(a: u64, b: u64) -> Independence {
    assert!(a > 1 && b > 1, "generators must exceed 1");
    let fa = factorize(a);
    let fb = factorize(b);
    if fa.len() != fb.len() || fa.iter().zip(&fb).any(|((p, _), (q, _))| p != q) {
        return Independence::Independent;
    }
    // same support: dependent iff all exponent ratios agree
    let (e1, f1) = (fa[0].1 as u64, fb[0].1 as u64);
    for ((_, e), (_, f)) in fa.iter().zip(&fb) {
        if (*e as u64) * f1 != (*f as u64) * e1 {
            return Independence::Independent;
        }
    }
    let g = gcd_u64(e1, f1);
    Independence::Dependent { m: f1 / g, n: e1 / g }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a
}

/// A Mann equation instance together with its enumerated nondegenerate
/// solutions inside the exponent box `|exponents| <= bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MannInstance {
    pub coeffs: Vec<Rat>,
    pub generators: (u64, u64),
    pub bound: u64,
    /// Solutions as exponent tuples, one `GroupElement` per unknown, sorted
    /// lexicographically.
    pub solutions: Vec<Vec<GroupElement>>,
    /// The list is complete relative to `bound`; completeness beyond the box
    /// is not claimed.
    pub complete_within_bound: bool,
}

impl MannInstance {
    pub fn realize(&self, sol: &[GroupElement]) -> Vec<Rat> {
        sol.iter().map(|g| realize_pair(self.generators, g)).collect()
    }
}

fn realize_pair(generators: (u64, u64), g: &GroupElement) -> Rat {
    let g1 = Rat::from_integer(BigInt::from(generators.0));
    let g2 = Rat::from_integer(BigInt::from(generators.1));
    rat_pow(&g1, &g.m).unwrap() * rat_pow(&g2, &g.n).unwrap()
}

/// Every nonempty subset sum of `c_i * x_i`; the full sum equals 1 by the
/// equation, so "proper" and "all" filters agree.
fn nondegenerate(terms: &[Rat]) -> bool {
    let n = terms.len();
    for mask in 1u32..(1 << n) {
        let mut sum = Rat::zero();
        for (i, t) in terms.iter().enumerate() {
            if mask & (1 << i) != 0 {
                sum += t;
            }
        }
        if sum.is_zero() && mask != (1 << n) - 1 {
            return false;
        }
    }
    true
}

/// Enumerate all nondegenerate solutions with `|exponents| <= bound`.
///
/// The scan fixes the first `n-1` unknowns and solves the last one exactly,
/// testing membership in the exponent box via a value table; this is
/// equivalent to the full box scan.
pub fn mann_enumerate(coeffs: &[Rat], generators: (u64, u64), bound: u64) -> Result<MannInstance> {
    mann_enumerate_with_ceiling(coeffs, generators, bound, DEFAULT_SCAN_CEILING)
}

pub fn mann_enumerate_with_ceiling(
    coeffs: &[Rat],
    generators: (u64, u64),
    bound: u64,
    ceiling: u128,
) -> Result<MannInstance> {
    let mut inst = prepare(coeffs, generators, bound, ceiling)?;
    let prefixes = prefix_blocks(coeffs.len(), bound);
    let table = ValueTable::new(generators, bound);
    let found = crate::exec::map_collect(prefixes, |prefix| {
        scan_block(coeffs, &table, bound, prefix)
    });
    inst.solutions = merge_sorted(found);
    Ok(inst)
}

/// Sequential scan, kept callable with the `parallel` feature on so the bench
/// suite can compare both paths.
pub fn mann_enumerate_seq(coeffs: &[Rat], generators: (u64, u64), bound: u64) -> Result<MannInstance> {
    let mut inst = prepare(coeffs, generators, bound, DEFAULT_SCAN_CEILING)?;
    let table = ValueTable::new(generators, bound);
    let found: Vec<_> = prefix_blocks(coeffs.len(), bound)
        .into_iter()
        .map(|prefix| scan_block(coeffs, &table, bound, prefix))
        .collect();
    inst.solutions = merge_sorted(found);
    Ok(inst)
}

#[cfg(feature = "parallel")]
pub fn mann_enumerate_par(coeffs: &[Rat], generators: (u64, u64), bound: u64) -> Result<MannInstance> {
    use rayon::prelude::*;
    let mut inst = prepare(coeffs, generators, bound, DEFAULT_SCAN_CEILING)?;
    let table = ValueTable::new(generators, bound);
    let found: Vec<_> = prefix_blocks(coeffs.len(), bound)
        .into_par_iter()
        .map(|prefix| scan_block(coeffs, &table, bound, prefix))
        .collect();
    inst.solutions = merge_sorted(found);
    Ok(inst)
}

fn prepare(coeffs: &[Rat], generators: (u64, u64), bound: u64, ceiling: u128) -> Result<MannInstance> {
    if coeffs.is_empty() {
        return Err(Error::Domain("a Mann equation needs at least one coefficient".into()));
    }
    if coeffs.iter().any(|c| c.is_zero()) {
        return Err(Error::Domain("Mann coefficients must be nonzero".into()));
    }
    if generators.0 <= 1 || generators.1 <= 1 {
        return Err(Error::Domain("generators must exceed 1".into()));
    }
    if let Independence::Dependent { m, n } = mult_indep(generators.0, generators.1) {
        return Err(Error::DependentGenerators { a: generators.0, b: generators.1, m, n });
    }
    let side = 2 * bound as u128 + 1;
    let free = coeffs.len().saturating_sub(1).max(1) as u32;
    let budget = side
        .checked_pow(2 * free)
        .ok_or(Error::Budget { budget: u128::MAX, ceiling })?;
    if budget > ceiling {
        return Err(Error::Budget { budget, ceiling });
    }
    Ok(MannInstance {
        coeffs: coeffs.to_vec(),
        generators,
        bound,
        solutions: Vec::new(),
        complete_within_bound: true,
    })
}

struct ValueTable {
    bound: i64,
    values: Vec<Rat>,
    index: HashMap<Rat, (i64, i64)>,
}

impl ValueTable {
    fn new(generators: (u64, u64), bound: u64) -> Self {
        let b = bound as i64;
        let side = (2 * b + 1) as usize;
        let g1 = Rat::from_integer(BigInt::from(generators.0));
        let g2 = Rat::from_integer(BigInt::from(generators.1));
        let pows = |g: &Rat| -> Vec<Rat> {
            let mut v = Vec::with_capacity(side);
            let mut cur = rat_pow(g, &BigInt::from(-b)).unwrap();
            for _ in 0..side {
                v.push(cur.clone());
                cur *= g;
            }
            v
        };
        let p1 = pows(&g1);
        let p2 = pows(&g2);
        let mut values = Vec::with_capacity(side * side);
        let mut index = HashMap::with_capacity(side * side);
        for (i, x) in p1.iter().enumerate() {
            for (j, y) in p2.iter().enumerate() {
                let val = x * y;
                index.insert(val.clone(), (i as i64 - b, j as i64 - b));
                values.push(val);
            }
        }
        Self { bound: b, values, index }
    }

    fn value(&self, e: (i64, i64)) -> &Rat {
        let side = (2 * self.bound + 1) as usize;
        let i = (e.0 + self.bound) as usize;
        let j = (e.1 + self.bound) as usize;
        &self.values[i * side + j]
    }

    fn lookup(&self, v: &Rat) -> Option<(i64, i64)> {
        self.index.get(v).copied()
    }
}

/// Exponent assignments for the first unknown; the remaining unknowns are
/// scanned inside the block, which is the rayon work unit.
fn prefix_blocks(n: usize, bound: u64) -> Vec<(i64, i64)> {
    let b = bound as i64;
    if n == 1 {
        // single unknown: solve directly, one block suffices
        return vec![(i64::MIN, i64::MIN)];
    }
    let mut blocks = Vec::new();
    for a in -b..=b {
        for c in -b..=b {
            blocks.push((a, c));
        }
    }
    blocks
}

fn scan_block(
    coeffs: &[Rat],
    table: &ValueTable,
    bound: u64,
    prefix: (i64, i64),
) -> Vec<Vec<GroupElement>> {
    let n = coeffs.len();
    let mut out = Vec::new();
    if n == 1 {
        // c1 * x1 = 1 forces x1 = 1/c1; solution iff that value is in the box
        let target = coeffs[0].recip();
        if let Some(e) = table.lookup(&target) {
            out.push(vec![GroupElement::from_i64(e.0, e.1)]);
        }
        return out;
    }
    let b = bound as i64;
    let mut exps = vec![(0i64, 0i64); n - 1];
    exps[0] = prefix;
    scan_rest(coeffs, table, b, &mut exps, 1, &mut out);
    out
}

fn scan_rest(
    coeffs: &[Rat],
    table: &ValueTable,
    b: i64,
    exps: &mut Vec<(i64, i64)>,
    depth: usize,
    out: &mut Vec<Vec<GroupElement>>,
) {
    let n = coeffs.len();
    if depth == n - 1 {
        // solve the last unknown: x_n = (1 - sum c_i x_i) / c_n
        let mut partial = Rat::zero();
        for (i, e) in exps.iter().enumerate() {
            partial += &coeffs[i] * table.value(*e);
        }
        let rest = Rat::one() - partial;
        if rest.is_zero() {
            return;
        }
        let target = rest / &coeffs[n - 1];
        if let Some(last) = table.lookup(&target) {
            let terms: Vec<Rat> = exps
                .iter()
                .enumerate()
                .map(|(i, e)| &coeffs[i] * table.value(*e))
                .chain(std::iter::once(&coeffs[n - 1] * table.value(last)))
                .collect();
            if nondegenerate(&terms) {
                let sol: Vec<GroupElement> = exps
                    .iter()
                    .copied()
                    .chain(std::iter::once(last))
                    .map(|(m, nn)| GroupElement::from_i64(m, nn))
                    .collect();
                out.push(sol);
            }
        }
        return;
    }
    for a in -b..=b {
        for c in -b..=b {
            exps[depth] = (a, c);
            scan_rest(coeffs, table, b, exps, depth + 1, out);
        }
    }
}

fn merge_sorted(found: Vec<Vec<Vec<GroupElement>>>) -> Vec<Vec<GroupElement>> {
    let mut all: Vec<Vec<GroupElement>> = found.into_iter().flatten().collect();
    all.sort();
    all
}

/// Render the universally quantified Mann axiom for the instance: any tuple in
/// `A` solving the equation nondegenerately is one of the listed tuples.
///
/// Solution constants are printed as exact rationals. When the instance is
/// bound-relative (it always is here), the caveat is appended.
pub fn mann_axiom(inst: &MannInstance) -> String {
    let n = inst.coeffs.len();
    let vars: Vec<String> = (1..=n).map(|i| format!("y{i}")).collect();
    let mut s = String::new();
    write!(s, "forall {}", vars.join(" ")).unwrap();
    s.push_str(" [ ");
    let conj: Vec<String> = vars.iter().map(|v| format!("A({v})")).collect();
    s.push_str(&conj.join(" and "));
    s.push_str(" and ");
    let eq_terms: Vec<String> = inst
        .coeffs
        .iter()
        .zip(&vars)
        .map(|(c, v)| format!("{}*{}", fmt_rat(c), v))
        .collect();
    write!(s, "{} = 1", eq_terms.join(" + ")).unwrap();
    // nondegeneracy: every nonempty proper subset sum is nonzero
    for mask in 1u32..(1 << n) - 1 {
        let terms: Vec<String> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| format!("{}*{}", fmt_rat(&inst.coeffs[i]), vars[i]))
            .collect();
        write!(s, " and {} != 0", terms.join(" + ")).unwrap();
    }
    s.push_str(" -> ");
    if inst.solutions.is_empty() {
        s.push_str("false");
    } else {
        let disjuncts: Vec<String> = inst
            .solutions
            .iter()
            .map(|sol| {
                let eqs: Vec<String> = sol
                    .iter()
                    .zip(&vars)
                    .map(|(g, v)| format!("{} = {}", v, fmt_rat(&realize_pair(inst.generators, g))))
                    .collect();
                format!("({})", eqs.join(" and "))
            })
            .collect();
        s.push_str(&disjuncts.join(" or "));
    }
    s.push_str(" ]");
    if inst.complete_within_bound {
        write!(
            s,
            "  -- solution list exhaustive over |exponents| <= {}; completeness beyond the bound is not claimed",
            inst.bound
        )
        .unwrap();
    }
    s
}

fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_int;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn independence_examples() {
        assert!(mult_indep(2, 3).is_independent());
        assert_eq!(mult_indep(4, 8).dependence_witness(), Some((3, 2)));
        assert_eq!(mult_indep(6, 36).dependence_witness(), Some((2, 1)));
        assert_eq!(mult_indep(7, 7).dependence_witness(), Some((1, 1)));
        assert!(mult_indep(6, 10).is_independent());
        assert_eq!(mult_indep(8, 32).dependence_witness(), Some((5, 3)));
    }

    #[test]
    fn single_coefficient_instances() {
        let inst = mann_enumerate(&[rat_int(1)], (2, 3), 0).unwrap();
        assert_eq!(inst.solutions, vec![vec![GroupElement::from_i64(0, 0)]]);
        let inst = mann_enumerate(&[rat_int(2)], (2, 3), 1).unwrap();
        assert_eq!(inst.solutions, vec![vec![GroupElement::from_i64(-1, 0)]]);
        // 1/3 is in the box only from bound 1 on
        let inst = mann_enumerate(&[rat_int(3)], (2, 3), 0).unwrap();
        assert!(inst.solutions.is_empty());
    }

    #[test]
    fn two_term_instance_verifies() {
        let inst = mann_enumerate(&[rat_int(1), rat_int(-1)], (2, 3), 10).unwrap();
        assert_eq!(inst.solutions.len(), 7);
        for sol in &inst.solutions {
            let vals = inst.realize(sol);
            let sum: Rat = vals[0].clone() - vals[1].clone();
            assert!(sum.is_one());
            assert!(!vals[0].is_zero() && !vals[1].is_zero());
        }
    }

    #[test]
    fn bound_monotonicity() {
        let coeffs = [rat_int(1), rat_int(1)];
        let small = mann_enumerate(&coeffs, (2, 3), 3).unwrap();
        let large = mann_enumerate(&coeffs, (2, 3), 6).unwrap();
        for sol in &small.solutions {
            assert!(large.solutions.contains(sol));
        }
    }

    #[test]
    fn permutation_symmetry() {
        let a = mann_enumerate(&[rat(1, 2), rat_int(3)], (2, 3), 5).unwrap();
        let b = mann_enumerate(&[rat_int(3), rat(1, 2)], (2, 3), 5).unwrap();
        let mut swapped: Vec<Vec<GroupElement>> = b
            .solutions
            .iter()
            .map(|sol| vec![sol[1].clone(), sol[0].clone()])
            .collect();
        swapped.sort();
        assert_eq!(a.solutions, swapped);
    }

    #[test]
    fn budget_guard_trips() {
        let coeffs = vec![rat_int(1); 5];
        assert!(matches!(
            mann_enumerate(&coeffs, (2, 3), 50),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn axiom_text_shape() {
        let inst = mann_enumerate(&[rat_int(1), rat_int(-1)], (2, 3), 10).unwrap();
        let text = mann_axiom(&inst);
        assert_eq!(text.matches(" or ").count(), 6); // 7 disjuncts
        assert!(text.contains("forall y1 y2"));
        assert!(text.contains("not claimed"));
        let empty = mann_enumerate(&[rat_int(5)], (2, 3), 2).unwrap();
        assert!(mann_axiom(&empty).contains("-> false"));
    }
}
