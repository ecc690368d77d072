//! Normal form for quantifier-free formulas relative to a designated
//! variable `x`: negation normal form, elimination of equalities into
//! valuation atoms, elimination of `x` from right-hand sides of comparisons,
//! disjunctive normal form, and per-disjunct alignment to a single common
//! coefficient on `x`.
//!
//! After normalization every atom containing `x` has one of the shapes
//!
//! * `V(l*x - a) + r CMP rhs`  with `a`, `rhs` free of `x`  (Phi),
//! * `l*x - a cong n g(0,0)`   with `a` free of `x`         (Psi),
//! * `H(x)` / `not H(x)`,
//!
//! and all `l` agree within each disjunct. Comparisons with `x` on both
//! sides are removed by the ultrametric case split: with `u = V(z - A)`,
//! `w = V(z - B)`, `d = V(A - B)` and `z = l*x`, exactly two of `u, w, d`
//! attain the minimum, so `u + s CMP w` reduces to a disjunction over the
//! order type of `(w, d)` whose branches mention `x` only on one side.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{Atom, Cmp, Formula, GroupTerm, LinForm, ValueTerm};
use crate::error::{Error, Result};
use crate::rational::vp_bigint;

/// Negated congruences expand into coset disjunctions of size `n^2`; cap the
/// modulus to keep that finite in practice.
const NEGATED_CONG_CAP: u64 = 64;
/// Cap on the total number of literals a DNF may reach.
const DNF_CAP: usize = 100_000;

pub(crate) fn conj(items: Vec<Formula>) -> Formula {
    let truth = Formula::truth();
    let falsity = Formula::falsity();
    let mut out = Vec::new();
    for item in items {
        if item == truth {
            continue;
        }
        if item == falsity {
            return falsity;
        }
        out.push(item);
    }
    match out.len() {
        0 => truth,
        1 => out.pop().unwrap(),
        _ => Formula::And(out),
    }
}

pub(crate) fn disj(items: Vec<Formula>) -> Formula {
    let truth = Formula::truth();
    let falsity = Formula::falsity();
    let mut out = Vec::new();
    for item in items {
        if item == falsity {
            continue;
        }
        if item == truth {
            return truth;
        }
        out.push(item);
    }
    match out.len() {
        0 => falsity,
        1 => out.pop().unwrap(),
        _ => Formula::Or(out),
    }
}

/// Normalize a quantifier-free formula with respect to `x`, over the prime
/// `p` (valuation shifts `v_p` of coefficient multipliers depend on it).
pub fn normalize(f: &Formula, x: &str, p: u64) -> Result<Formula> {
    if !f.is_quantifier_free() {
        return Err(Error::Domain("normalize expects a quantifier-free formula".into()));
    }
    let nnf = to_nnf(f, true)?;
    let shaped = reshape(&nnf, x, p)?;
    let disjuncts = to_dnf(&shaped)?;
    let mut out = Vec::new();
    for lits in disjuncts {
        out.push(align_disjunct(lits, x, p)?);
    }
    Ok(disj(out))
}

// ---------------------------------------------------------------------------
// negation normal form
// ---------------------------------------------------------------------------

fn to_nnf(f: &Formula, pos: bool) -> Result<Formula> {
    match f {
        Formula::Atom(a) => {
            if pos {
                Ok(atom_pos(a))
            } else {
                atom_neg(a)
            }
        }
        Formula::Not(inner) => to_nnf(inner, !pos),
        Formula::And(items) => {
            let parts = items.iter().map(|g| to_nnf(g, pos)).collect::<Result<Vec<_>>>()?;
            Ok(if pos { conj(parts) } else { disj(parts) })
        }
        Formula::Or(items) => {
            let parts = items.iter().map(|g| to_nnf(g, pos)).collect::<Result<Vec<_>>>()?;
            Ok(if pos { disj(parts) } else { conj(parts) })
        }
        Formula::Quant { .. } => {
            Err(Error::Domain("normalize expects a quantifier-free formula".into()))
        }
    }
}

fn atom_pos(a: &Atom) -> Formula {
    match a {
        // t = t'  <=>  V(t - t') = inf
        Atom::Eq(l, r) => {
            let diff = LinForm::from_term(l).sub(&LinForm::from_term(r));
            Formula::Atom(Atom::ValCmp {
                term: diff.to_term(),
                shift: BigInt::zero(),
                cmp: Cmp::Eq,
                rhs: ValueTerm::Inf,
            })
        }
        other => Formula::Atom(other.clone()),
    }
}

fn atom_neg(a: &Atom) -> Result<Formula> {
    match a {
        Atom::ValCmp { term, shift, cmp, rhs } => {
            let mk = |c: Cmp| {
                Formula::Atom(Atom::ValCmp {
                    term: term.clone(),
                    shift: shift.clone(),
                    cmp: c,
                    rhs: rhs.clone(),
                })
            };
            Ok(match cmp {
                Cmp::Lt => mk(Cmp::Ge),
                Cmp::Le => mk(Cmp::Gt),
                Cmp::Ge => mk(Cmp::Lt),
                Cmp::Gt => mk(Cmp::Le),
                Cmp::Eq => disj(vec![mk(Cmp::Lt), mk(Cmp::Gt)]),
            })
        }
        Atom::Eq(l, r) => {
            let diff = LinForm::from_term(l).sub(&LinForm::from_term(r));
            Ok(Formula::Atom(Atom::ValCmp {
                term: diff.to_term(),
                shift: BigInt::zero(),
                cmp: Cmp::Lt,
                rhs: ValueTerm::Inf,
            }))
        }
        // not(t cong n t'): the difference lies in one of the n^2 - 1 other
        // cosets i*1 + j*C of G/nG
        Atom::Cong { lhs, modulus, rhs } => {
            let n = u64::try_from(modulus.clone())
                .ok()
                .filter(|n| *n <= NEGATED_CONG_CAP)
                .ok_or_else(|| {
                    Error::Unsupported(format!(
                        "negated congruence with modulus {modulus} (cap {NEGATED_CONG_CAP})"
                    ))
                })?;
            if n == 1 {
                // everything is congruent mod 1
                return Ok(Formula::falsity());
            }
            let diff = LinForm::from_term(lhs).sub(&LinForm::from_term(rhs));
            let mut cases = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    cases.push(Formula::Atom(Atom::Cong {
                        lhs: diff.to_term(),
                        modulus: BigInt::from(n),
                        rhs: GroupTerm::literal(BigInt::from(i), BigInt::from(j)),
                    }));
                }
            }
            Ok(disj(cases))
        }
        Atom::InH(v) => Ok(Formula::Not(Box::new(Formula::Atom(Atom::InH(v.clone()))))),
    }
}

// ---------------------------------------------------------------------------
// atom reshaping relative to x
// ---------------------------------------------------------------------------

fn reshape(f: &Formula, x: &str, p: u64) -> Result<Formula> {
    match f {
        Formula::And(items) => {
            Ok(conj(items.iter().map(|g| reshape(g, x, p)).collect::<Result<Vec<_>>>()?))
        }
        Formula::Or(items) => {
            Ok(disj(items.iter().map(|g| reshape(g, x, p)).collect::<Result<Vec<_>>>()?))
        }
        Formula::Not(_) => Ok(f.clone()), // only `not H(v)` survives NNF
        Formula::Atom(a) => reshape_atom(a, x, p),
        Formula::Quant { .. } => unreachable!("checked quantifier-free"),
    }
}

fn reshape_atom(a: &Atom, x: &str, p: u64) -> Result<Formula> {
    match a {
        Atom::InH(_) => Ok(Formula::Atom(a.clone())),
        Atom::Eq(..) => unreachable!("equalities eliminated in NNF"),
        Atom::Cong { lhs, modulus, rhs } => {
            let diff = LinForm::from_term(lhs).sub(&LinForm::from_term(rhs));
            if !diff.coeffs.contains_key(x) {
                return Ok(Formula::Atom(a.clone()));
            }
            Ok(canonical_psi(diff, modulus.clone()))
        }
        Atom::ValCmp { term, shift, cmp, rhs } => {
            let lhs = LinForm::from_term(term);
            let lhs_has_x = lhs.coeffs.contains_key(x);
            match rhs {
                ValueTerm::Lit(c) => {
                    if !lhs_has_x {
                        return Ok(Formula::Atom(a.clone()));
                    }
                    Ok(canonical_phi_lit(lhs, shift.clone(), *cmp, c.clone(), p))
                }
                ValueTerm::Inf => {
                    if !lhs_has_x {
                        return Ok(Formula::Atom(a.clone()));
                    }
                    Ok(canonical_phi_inf(lhs, *cmp, p))
                }
                ValueTerm::V { term: rterm, shift: rshift } => {
                    let rlf = LinForm::from_term(rterm);
                    let rhs_has_x = rlf.coeffs.contains_key(x);
                    match (lhs_has_x, rhs_has_x) {
                        (false, false) => Ok(Formula::Atom(a.clone())),
                        (true, false) => {
                            Ok(canonical_phi_v(lhs, shift.clone(), *cmp, rlf, rshift.clone(), p))
                        }
                        (false, true) => Ok(canonical_phi_v(
                            rlf,
                            rshift.clone(),
                            cmp.flip(),
                            lhs,
                            shift.clone(),
                            p,
                        )),
                        (true, true) => both_sides_split(
                            x,
                            lhs,
                            shift.clone(),
                            *cmp,
                            rlf,
                            rshift.clone(),
                            p,
                        ),
                    }
                }
            }
        }
    }
}

/// `t cong n 0` with the content of `t` divided out (valid in every model:
/// `g*t' in nG  <=>  t' in (n/gcd(n,g))G` for torsion-free `G`).
fn canonical_psi(t: LinForm, modulus: BigInt) -> Formula {
    if t.is_zero() {
        return Formula::truth();
    }
    let g = t.content();
    let reduced = t.div_exact(&g);
    let n = &modulus / modulus.gcd(&g);
    if n == BigInt::from(1) {
        return Formula::truth();
    }
    Formula::Atom(Atom::Cong {
        lhs: reduced.to_term(),
        modulus: n,
        rhs: GroupTerm::literal(BigInt::zero(), BigInt::zero()),
    })
}

/// `V(t) + r CMP c` for a literal `c`: divide out the content (shifting by
/// its valuation) and fold everything into the literal.
fn canonical_phi_lit(t: LinForm, shift: BigInt, cmp: Cmp, lit: BigInt, p: u64) -> Formula {
    if t.is_zero() {
        // V(0) = inf against a finite literal
        return constant(matches!(cmp, Cmp::Ge | Cmp::Gt));
    }
    let g = t.content();
    let reduced = t.div_exact(&g);
    let vg = vp_bigint(&g, p).expect("nonzero content");
    let net = lit - shift - BigInt::from(vg);
    if net.is_negative() {
        // V >= 0 always, so comparisons against a negative bound collapse
        return constant(matches!(cmp, Cmp::Ge | Cmp::Gt));
    }
    Formula::Atom(Atom::ValCmp {
        term: reduced.to_term(),
        shift: BigInt::zero(),
        cmp,
        rhs: ValueTerm::Lit(net),
    })
}

/// `V(t) + r CMP inf`; the shift is irrelevant against infinity.
fn canonical_phi_inf(t: LinForm, cmp: Cmp, p: u64) -> Formula {
    let _ = p;
    if t.is_zero() {
        return constant(matches!(cmp, Cmp::Le | Cmp::Ge | Cmp::Eq));
    }
    let g = t.content();
    let reduced = t.div_exact(&g);
    match cmp {
        Cmp::Le => Formula::truth(),
        Cmp::Gt => Formula::falsity(),
        Cmp::Eq | Cmp::Ge => Formula::Atom(Atom::ValCmp {
            term: reduced.to_term(),
            shift: BigInt::zero(),
            cmp: Cmp::Eq,
            rhs: ValueTerm::Inf,
        }),
        Cmp::Lt => Formula::Atom(Atom::ValCmp {
            term: reduced.to_term(),
            shift: BigInt::zero(),
            cmp: Cmp::Lt,
            rhs: ValueTerm::Inf,
        }),
    }
}

/// `V(t) + r CMP V(u) + s` with `x` (if present) only in `t`: content-reduce
/// both sides and carry the net shift on the left.
fn canonical_phi_v(t: LinForm, r: BigInt, cmp: Cmp, u: LinForm, s: BigInt, p: u64) -> Formula {
    if u.is_zero() {
        return canonical_phi_inf(t, cmp, p);
    }
    if t.is_zero() {
        // inf CMP V(u) + s  <=>  V(u) + s CMPflip inf
        return canonical_phi_inf(u, cmp.flip(), p);
    }
    let gt = t.content();
    let gu = u.content();
    let tr = t.div_exact(&gt);
    let ur = u.div_exact(&gu);
    let vgt = vp_bigint(&gt, p).expect("nonzero");
    let vgu = vp_bigint(&gu, p).expect("nonzero");
    let net = r + BigInt::from(vgt) - s - BigInt::from(vgu);
    Formula::Atom(Atom::ValCmp {
        term: tr.to_term(),
        shift: net,
        cmp,
        rhs: ValueTerm::V { term: ur.to_term(), shift: BigInt::zero() },
    })
}

fn constant(b: bool) -> Formula {
    if b {
        Formula::truth()
    } else {
        Formula::falsity()
    }
}

/// The ultrametric case split for `V(T) + r CMP V(R) + s` with `x` on both
/// sides. Aligns both coefficients of `x` to their lcm first.
#[allow(clippy::too_many_arguments)]
fn both_sides_split(
    x: &str,
    lhs: LinForm,
    r: BigInt,
    cmp: Cmp,
    rhs: LinForm,
    s: BigInt,
    p: u64,
) -> Result<Formula> {
    let (l1, _) = lhs.split_var(x);
    let (l2, _) = rhs.split_var(x);
    debug_assert!(!l1.is_zero() && !l2.is_zero());
    let lambda = l1.abs().lcm(&l2.abs());
    let c1 = &lambda / &l1;
    let c2 = &lambda / &l2;
    let za = lhs.scale(&c1); // lambda*x - A
    let zb = rhs.scale(&c2); // lambda*x - B
    let vc1 = BigInt::from(vp_bigint(&c1, p).expect("nonzero"));
    let vc2 = BigInt::from(vp_bigint(&c2, p).expect("nonzero"));
    let net = (r - vc1) - (s - vc2);
    let diff = za.sub(&zb); // B - A; only its valuation matters

    let zero = BigInt::zero;
    let val_atom = |t: &LinForm, shift: BigInt, c: Cmp, rhs: ValueTerm| {
        Formula::Atom(Atom::ValCmp { term: t.to_term(), shift, cmp: c, rhs })
    };
    let u_inf = val_atom(&za, zero(), Cmp::Eq, ValueTerm::Inf);
    let u_fin = val_atom(&za, zero(), Cmp::Lt, ValueTerm::Inf);
    let c_inf = constant(matches!(cmp, Cmp::Le | Cmp::Ge | Cmp::Eq));
    let c_zero = constant(cmp.eval(&net, &BigInt::zero()));

    if diff.is_zero() {
        // same center: u = w, so the atom only distinguishes u = inf from
        // u finite
        if c_inf == c_zero {
            return Ok(c_inf);
        }
        return Ok(disj(vec![conj(vec![u_inf, c_inf]), conj(vec![u_fin, c_zero])]));
    }

    let d_term = ValueTerm::V { term: diff.to_term(), shift: BigInt::zero() };
    let d_inf = val_atom(&diff, zero(), Cmp::Eq, ValueTerm::Inf);
    let d_fin = val_atom(&diff, zero(), Cmp::Lt, ValueTerm::Inf);
    let w_lt_d = val_atom(&zb, zero(), Cmp::Lt, d_term.clone());
    let w_gt_d = val_atom(&zb, zero(), Cmp::Gt, d_term.clone());
    let w_eq_d = val_atom(&zb, zero(), Cmp::Eq, d_term.clone());
    // d + net CMP w  <=>  w CMPflip d + net
    let w_vs_d = val_atom(&zb, -&net, cmp.flip(), d_term.clone());
    // u + net CMP d
    let u_vs_d = val_atom(&za, net.clone(), cmp, d_term);

    Ok(disj(vec![
        conj(vec![d_inf, disj(vec![conj(vec![u_inf, c_inf]), conj(vec![u_fin, c_zero.clone()])])]),
        conj(vec![
            d_fin,
            disj(vec![
                conj(vec![w_lt_d, c_zero]),
                conj(vec![w_gt_d, w_vs_d]),
                conj(vec![w_eq_d, u_vs_d]),
            ]),
        ]),
    ]))
}

// ---------------------------------------------------------------------------
// DNF and coefficient alignment
// ---------------------------------------------------------------------------

fn to_dnf(f: &Formula) -> Result<Vec<Vec<Formula>>> {
    let out = match f {
        Formula::Atom(_) | Formula::Not(_) => vec![vec![f.clone()]],
        Formula::Or(items) => {
            let mut out = Vec::new();
            for item in items {
                out.extend(to_dnf(item)?);
            }
            out
        }
        Formula::And(items) => {
            let mut acc: Vec<Vec<Formula>> = vec![vec![]];
            for item in items {
                let parts = to_dnf(item)?;
                let mut next = Vec::with_capacity(acc.len() * parts.len());
                for left in &acc {
                    for right in &parts {
                        let mut row = left.clone();
                        row.extend(right.iter().cloned());
                        next.push(row);
                    }
                }
                acc = next;
                let total: usize = acc.iter().map(|d| d.len().max(1)).sum();
                if total > DNF_CAP {
                    return Err(Error::Unsupported(format!(
                        "formula exceeds the DNF size cap ({DNF_CAP} literals)"
                    )));
                }
            }
            acc
        }
        Formula::Quant { .. } => unreachable!("checked quantifier-free"),
    };
    Ok(out)
}

/// Multiply every `x`-atom of the disjunct up to the lcm of the coefficients
/// of `x`, shifting valuation bounds by `v_p` of the multiplier and scaling
/// congruence moduli.
fn align_disjunct(lits: Vec<Formula>, x: &str, p: u64) -> Result<Formula> {
    let mut lambda = BigInt::from(1);
    for lit in &lits {
        if let Some(l) = x_coefficient(lit, x) {
            lambda = lambda.lcm(&l.abs());
        }
    }
    let mut out = Vec::with_capacity(lits.len());
    for lit in lits {
        out.push(align_literal(lit, x, &lambda, p)?);
    }
    Ok(conj(out))
}

fn x_coefficient(lit: &Formula, x: &str) -> Option<BigInt> {
    match lit {
        Formula::Atom(Atom::ValCmp { term, .. }) | Formula::Atom(Atom::Cong { lhs: term, .. }) => {
            let lf = LinForm::from_term(term);
            lf.coeffs.get(x).cloned()
        }
        _ => None,
    }
}

fn align_literal(lit: Formula, x: &str, lambda: &BigInt, p: u64) -> Result<Formula> {
    let l = match x_coefficient(&lit, x) {
        Some(l) if l.abs() != *lambda => l,
        _ => return Ok(lit),
    };
    let c = lambda / &l;
    let vc = BigInt::from(vp_bigint(&c, p).expect("nonzero multiplier"));
    match lit {
        Formula::Atom(Atom::ValCmp { term, shift, cmp, rhs }) => {
            let scaled = LinForm::from_term(&term).scale(&c);
            // V(t) = V(c t) - v_p(c)
            let new_shift = shift - &vc;
            match rhs {
                ValueTerm::Lit(lit_val) => {
                    // keep literal right-hand sides shift-free
                    let net = lit_val - new_shift;
                    if net.is_negative() {
                        return Ok(constant(matches!(cmp, Cmp::Ge | Cmp::Gt)));
                    }
                    Ok(Formula::Atom(Atom::ValCmp {
                        term: scaled.to_term(),
                        shift: BigInt::zero(),
                        cmp,
                        rhs: ValueTerm::Lit(net),
                    }))
                }
                rhs => Ok(Formula::Atom(Atom::ValCmp {
                    term: scaled.to_term(),
                    shift: new_shift,
                    cmp,
                    rhs,
                })),
            }
        }
        Formula::Atom(Atom::Cong { lhs, modulus, rhs }) => {
            // t cong n 0  <=>  c*t cong |c|*n 0 in a torsion-free group
            let diff = LinForm::from_term(&lhs).sub(&LinForm::from_term(&rhs));
            let scaled = diff.scale(&c);
            Ok(Formula::Atom(Atom::Cong {
                lhs: scaled.to_term(),
                modulus: modulus * c.abs(),
                rhs: GroupTerm::literal(BigInt::zero(), BigInt::zero()),
            }))
        }
        other => Ok(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn aligns_coefficients_to_lcm() {
        let f = parse("V(2 * x - a) >= V(b) and V(3 * x - g(2,0)) = 2").unwrap();
        let n = normalize(&f, "x", 5).unwrap();
        let s = n.to_string();
        assert!(s.contains("6 * x"), "normalized: {s}");
        assert!(!s.contains("2 * x") && !s.contains("3 * x"), "normalized: {s}");
    }

    #[test]
    fn extracts_vp_of_scalar() {
        // V(5x) >= 4 at p = 5 becomes V(x) >= 3
        let f = parse("V(5 * x) >= 4").unwrap();
        let n = normalize(&f, "x", 5).unwrap();
        assert_eq!(n.to_string(), "V(x) >= 3");
    }

    #[test]
    fn keeps_separate_congruences() {
        let f = parse("x cong 2 a and x cong 3 a").unwrap();
        let n = normalize(&f, "x", 5).unwrap();
        let s = n.to_string();
        assert_eq!(s.matches("cong").count(), 2, "normalized: {s}");
    }

    #[test]
    fn same_center_comparison_is_constant() {
        // V(x + x) = V(x) + 1 at p = 2 is the valuation law itself
        let f = parse("V(x + x) = V(x) + 1").unwrap();
        let n = normalize(&f, "x", 2).unwrap();
        assert_eq!(n, Formula::truth());
        // and at p = 5 it forces x = 0
        let n5 = normalize(&f, "x", 5).unwrap();
        let s = n5.to_string();
        assert!(s.contains("inf"), "normalized: {s}");
        assert_ne!(n5, Formula::truth());
    }

    #[test]
    fn negated_congruence_expands_to_cosets() {
        let f = parse("not x cong 2 a").unwrap();
        let n = normalize(&f, "x", 5).unwrap();
        if let Formula::Or(items) = &n {
            assert_eq!(items.len(), 3);
        } else {
            panic!("expected 3-way coset disjunction, got {n}");
        }
    }

    #[test]
    fn equality_becomes_valuation_atom() {
        let f = parse("x = a").unwrap();
        let n = normalize(&f, "x", 5).unwrap();
        assert_eq!(n.to_string(), "V(x + g(-1,0)) = inf");
    }
}
