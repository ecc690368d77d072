//! Quantifier elimination for the supported fragment, innermost quantifier
//! first over DNF.
//!
//! Eliminating `exists x` from a normalized conjunct produces a
//! quantifier-free formula over the parameters. When the parameters are
//! ground the answer is a constant; otherwise the elimination enumerates the
//! finitely many order configurations of the symbolic quantities (pairwise
//! center distances and symbolic radii), decides each configuration on the
//! abstract tree, and guards it by atoms pinning that configuration. The
//! guards stay inside the Phi/Psi fragment, which is what keeps the language
//! closed under elimination.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::formula::{normalize, Atom, Cmp, Formula, GroupTerm, LinForm, Quantifier, ValueTerm};
use crate::group::{GroupElement, Sort, Val};
use crate::qe::eval::{eval_ground, shift_i64, Env};
use crate::qe::system::{combine_congruences, BallSystem, Coset, HFlag, MODULUS_CAP};
use crate::qe::tree::{self, TreeSystem};

/// Caps keeping the configuration enumeration finite in practice.
const MAX_SYMBOLIC_QUANTITIES: usize = 5;
const MAX_CONFIGURATIONS: u64 = 2_000_000;
const MAX_SYMBOLIC_H_GUARD: u64 = 64;

/// Decide a sentence of the supported fragment over the standard model.
pub fn decide(sentence: &Formula, cfg: &Config) -> Result<bool> {
    let free = sentence.free_vars();
    if !free.is_empty() {
        return Err(Error::Domain(format!(
            "decide expects a sentence; free variables: {}",
            free.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let qf = eliminate_all(sentence, cfg)?;
    eval_ground(&qf, &Env::new(), cfg)
}

/// Replace every quantifier by a quantifier-free equivalent, innermost
/// first; `forall` goes through `not exists not`.
pub fn eliminate_all(f: &Formula, cfg: &Config) -> Result<Formula> {
    match f {
        Formula::Atom(_) => Ok(f.clone()),
        Formula::Not(g) => Ok(Formula::Not(Box::new(eliminate_all(g, cfg)?))),
        Formula::And(items) => Ok(Formula::And(
            items.iter().map(|g| eliminate_all(g, cfg)).collect::<Result<Vec<_>>>()?,
        )),
        Formula::Or(items) => Ok(Formula::Or(
            items.iter().map(|g| eliminate_all(g, cfg)).collect::<Result<Vec<_>>>()?,
        )),
        Formula::Quant { q, var, sort, body } => {
            let inner = eliminate_all(body, cfg)?;
            match q {
                Quantifier::Exists => eliminate_exists(inner, var, *sort, cfg),
                Quantifier::Forall => {
                    let neg = Formula::Not(Box::new(inner));
                    Ok(Formula::Not(Box::new(eliminate_exists(neg, var, *sort, cfg)?)))
                }
            }
        }
    }
}

/// Eliminate `exists var in sort` from a quantifier-free body.
pub fn eliminate_exists(
    body: Formula,
    var: &str,
    sort: Sort,
    cfg: &Config,
) -> Result<Formula> {
    let full = match sort {
        Sort::G => body,
        Sort::H => crate::formula::conj(vec![
            body,
            Formula::Atom(Atom::InH(var.to_string())),
        ]),
    };
    let dnf = normalize(&full, var, cfg.p())?;
    let disjuncts = collect_disjuncts(&dnf);
    let mut out = Vec::new();
    for lits in disjuncts {
        out.push(eliminate_disjunct(lits, var, cfg)?);
    }
    let mut result = Vec::new();
    for f in out {
        if !result.contains(&f) {
            result.push(f);
        }
    }
    Ok(crate::formula::disj(result))
}

fn collect_disjuncts(f: &Formula) -> Vec<Vec<Formula>> {
    match f {
        Formula::Or(items) => items.iter().map(conjunct_literals).collect(),
        other => vec![conjunct_literals(other)],
    }
}

fn conjunct_literals(f: &Formula) -> Vec<Formula> {
    match f {
        Formula::And(items) => items.to_vec(),
        other => vec![other.clone()],
    }
}

// ---------------------------------------------------------------------------
// conjunct decomposition
// ---------------------------------------------------------------------------

/// A symbolic valuation bound: literal, infinity, or `V(form) + shift`.
#[derive(Debug, Clone, PartialEq, Eq)]
enum SymVal {
    Fin(i64),
    Inf,
    V { form: LinForm, shift: i64 },
}

#[derive(Debug, Clone)]
struct SymPhi {
    center: LinForm,
    cmp: Cmp,
    theta: SymVal,
}

#[derive(Debug, Clone)]
struct XConjunct {
    phi: Vec<SymPhi>,
    /// `z = center mod n`.
    psi: Vec<(LinForm, u64)>,
    hflag: HFlag,
    /// The common coefficient of `x` (normalized positive).
    lambda: u64,
    params: Vec<Formula>,
}

fn var_occurs(lit: &Formula, x: &str) -> bool {
    lit.free_vars().contains(x)
}

fn decompose(lits: Vec<Formula>, x: &str) -> Result<Option<XConjunct>> {
    let mut xc = XConjunct {
        phi: Vec::new(),
        psi: Vec::new(),
        hflag: HFlag::Unconstrained,
        lambda: 1,
        params: Vec::new(),
    };
    let mut lambda: Option<BigInt> = None;
    let mut in_h = false;
    let mut not_in_h = false;
    for lit in lits {
        if !var_occurs(&lit, x) {
            xc.params.push(lit);
            continue;
        }
        match lit {
            Formula::Atom(Atom::InH(_)) => in_h = true,
            Formula::Not(inner) => match *inner {
                Formula::Atom(Atom::InH(_)) => not_in_h = true,
                other => {
                    return Err(Error::Domain(format!(
                        "unexpected negated literal {other} after normalization"
                    )))
                }
            },
            Formula::Atom(Atom::ValCmp { term, shift, cmp, rhs }) => {
                if let ValueTerm::V { term: rt, .. } = &rhs {
                    if LinForm::from_term(rt).coeffs.contains_key(x) {
                        return Err(Error::Domain(
                            "normalization left the variable on a right-hand side".into(),
                        ));
                    }
                }
                let mut lf = LinForm::from_term(&term);
                let (mut l, _) = lf.split_var(x);
                if l.is_negative() {
                    lf = lf.neg();
                    l = -l;
                }
                check_lambda(&mut lambda, &l)?;
                let (_, rest) = lf.split_var(x);
                let center = rest.neg();
                let s = shift_i64(&shift)?;
                let theta = match rhs {
                    ValueTerm::Lit(c) => SymVal::Fin(shift_i64(&c)? - s),
                    ValueTerm::Inf => SymVal::Inf,
                    ValueTerm::V { term: rt, shift: rs } => {
                        let form = LinForm::from_term(&rt);
                        SymVal::V { form, shift: shift_i64(&rs)? - s }
                    }
                };
                xc.phi.push(SymPhi { center, cmp, theta });
            }
            Formula::Atom(Atom::Cong { lhs, modulus, rhs }) => {
                let mut d = LinForm::from_term(&lhs).sub(&LinForm::from_term(&rhs));
                let (mut l, _) = d.split_var(x);
                if l.is_negative() {
                    d = d.neg();
                    l = -l;
                }
                check_lambda(&mut lambda, &l)?;
                let n = u64::try_from(modulus)
                    .map_err(|_| Error::Overflow("congruence modulus too large".into()))?;
                let (_, rest) = d.split_var(x);
                xc.psi.push((rest.neg(), n));
            }
            other => {
                return Err(Error::Domain(format!(
                    "unexpected literal {other} after normalization"
                )))
            }
        }
    }
    if in_h && not_in_h {
        return Ok(None);
    }
    xc.hflag = if in_h {
        HFlag::InH
    } else if not_in_h {
        HFlag::NotInH
    } else {
        HFlag::Unconstrained
    };
    xc.lambda = match lambda {
        None => 1,
        Some(l) => u64::try_from(l)
            .ok()
            .filter(|l| *l <= MODULUS_CAP)
            .ok_or_else(|| Error::Overflow("common coefficient too large".into()))?,
    };
    Ok(Some(xc))
}

fn check_lambda(lambda: &mut Option<BigInt>, l: &BigInt) -> Result<()> {
    match lambda {
        None => {
            *lambda = Some(l.clone());
            Ok(())
        }
        Some(prev) if prev == l => Ok(()),
        Some(prev) => Err(Error::Domain(format!(
            "conjunct not aligned to a common coefficient ({prev} vs {l})"
        ))),
    }
}

// ---------------------------------------------------------------------------
// symbolic congruence combination
// ---------------------------------------------------------------------------

struct CongCombination {
    guards: Vec<Formula>,
    rep: LinForm,
    modulus: u64,
}

/// Fold the congruences `z = c_j mod n_j` (plus `z = 0 mod lambda`) into a
/// single coset with a representative term built from Bezout coefficients;
/// compatibility conditions that cannot be evaluated become guard atoms.
fn combine_symbolic(xc: &XConjunct, _cfg: &Config) -> Result<Option<CongCombination>> {
    let mut atoms: Vec<(LinForm, u64)> = xc.psi.clone();
    if xc.lambda > 1 {
        atoms.push((LinForm::zero(), xc.lambda));
    }
    let mut rep = LinForm::zero();
    let mut modulus: u64 = 1;
    let mut guards = Vec::new();
    for (c, n) in atoms {
        let g = gcd_u64(modulus, n);
        if g > 1 {
            let diff = rep.sub(&c);
            if diff.is_ground() {
                let ok = diff.constant.m.is_multiple_of(&BigInt::from(g))
                    && diff.constant.n.is_multiple_of(&BigInt::from(g));
                if !ok {
                    return Ok(None);
                }
            } else {
                guards.push(Formula::Atom(Atom::Cong {
                    lhs: diff.to_term(),
                    modulus: BigInt::from(g),
                    rhs: GroupTerm::literal(BigInt::zero(), BigInt::zero()),
                }));
            }
        }
        // s*M + t*n = g; rep' = (t*n/g)*rep + (s*M/g)*c is congruent to rep
        // mod M and to c mod n whenever the compatibility guard holds
        let ext = BigInt::extended_gcd(&BigInt::from(modulus), &BigInt::from(n));
        let coef_rep = &ext.y * BigInt::from(n / g);
        let coef_c = &ext.x * BigInt::from(modulus / g);
        rep = rep.scale(&coef_rep).add_form(&c.scale(&coef_c));
        modulus = modulus
            .checked_div(g)
            .and_then(|m| m.checked_mul(n))
            .filter(|m| *m <= MODULUS_CAP)
            .ok_or_else(|| Error::Overflow("combined congruence modulus too large".into()))?;
        rep = rep.reduce_mod(modulus);
    }
    Ok(Some(CongCombination { guards, rep, modulus }))
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = b;
        b = a % b;
        a = t;
    }
    a.max(1)
}

impl LinForm {
    fn add_form(&self, other: &LinForm) -> LinForm {
        self.sub(&other.neg())
    }

    /// Reduce all coefficients mod `n` (valid for coset representatives).
    fn reduce_mod(&self, n: u64) -> LinForm {
        let nn = BigInt::from(n);
        let mut out = LinForm {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (v.clone(), c.mod_floor(&nn)))
                .collect(),
            constant: GroupElement::new(
                self.constant.m.mod_floor(&nn),
                self.constant.n.mod_floor(&nn),
            ),
        };
        out.coeffs.retain(|_, c| !c.is_zero());
        out
    }
}

// ---------------------------------------------------------------------------
// the elimination proper
// ---------------------------------------------------------------------------

fn eliminate_disjunct(lits: Vec<Formula>, x: &str, cfg: &Config) -> Result<Formula> {
    use crate::formula::{conj, disj};
    let Some(xc) = decompose(lits, x)? else {
        return Ok(Formula::falsity());
    };
    let Some(comb) = combine_symbolic(&xc, cfg)? else {
        return Ok(Formula::falsity());
    };
    let mut guards = comb.guards.clone();
    let n = comb.modulus;

    // H-side feasibility of the coset
    if xc.hflag == HFlag::InH && n > 1 {
        if comb.rep.is_ground() {
            if !comb.rep.constant.n.is_multiple_of(&BigInt::from(n)) {
                return Ok(Formula::falsity());
            }
        } else {
            if n > MAX_SYMBOLIC_H_GUARD {
                return Err(Error::Unsupported(format!(
                    "H-membership guard over a symbolic coset with modulus {n}"
                )));
            }
            let mut cases = Vec::new();
            for i in 0..n {
                let shifted = comb.rep.sub(&LinForm {
                    coeffs: BTreeMap::new(),
                    constant: GroupElement::from_i64(i as i64, 0),
                });
                cases.push(Formula::Atom(Atom::Cong {
                    lhs: shifted.to_term(),
                    modulus: BigInt::from(n),
                    rhs: GroupTerm::literal(BigInt::zero(), BigInt::zero()),
                }));
            }
            guards.push(disj(cases));
        }
    }

    // assemble centers: the Phi constraints plus the ambient coset ball
    let mut centers: Vec<LinForm> = xc.phi.iter().map(|p| p.center.clone()).collect();
    let mut constraints: Vec<(usize, Cmp, SymVal)> = xc
        .phi
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p.cmp, p.theta.clone()))
        .collect();
    if n > 1 {
        let vpn = crate::rational::vp_bigint(&BigInt::from(n), cfg.p()).expect("n >= 1");
        centers.push(comb.rep.clone());
        constraints.push((centers.len() - 1, Cmp::Ge, SymVal::Fin(vpn)));
    }

    // quantities: pairwise center distances and symbolic radii
    let mut quantities = Quantities::default();
    let k = centers.len();
    let mut dist_q = vec![vec![usize::MAX; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let q = quantities.intern(centers[i].sub(&centers[j]), cfg);
            dist_q[i][j] = q;
            dist_q[j][i] = q;
        }
    }
    let theta_q: Vec<Option<usize>> = constraints
        .iter()
        .map(|(_, _, theta)| match theta {
            SymVal::V { form, .. } => Some(quantities.intern(form.clone(), cfg)),
            _ => None,
        })
        .collect();

    let sym_indices: Vec<usize> = quantities
        .entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.pinned.is_none())
        .map(|(i, _)| i)
        .collect();
    if sym_indices.len() > MAX_SYMBOLIC_QUANTITIES {
        return Err(Error::Unsupported(format!(
            "too many symbolic valuation quantities ({})",
            sym_indices.len()
        )));
    }

    // window: everything below w0 is pinned exactly, everything above only
    // up to order and differences clipped at r
    let mut r_off: i64 = 0;
    for (_, _, theta) in &constraints {
        if let SymVal::V { shift, .. } = theta {
            r_off = r_off.max(shift.abs());
        }
    }
    let r = r_off + 2;
    let mut base: i64 = 0;
    for (_, _, theta) in &constraints {
        if let SymVal::Fin(v) = theta {
            base = base.max(v.abs());
        }
    }
    for e in &quantities.entries {
        if let Some(Val::Fin(v)) = e.pinned {
            base = base.max(v.abs());
        }
    }
    if n > 1 {
        base = base.max(crate::rational::vp_bigint(&BigInt::from(n), cfg.p()).unwrap());
    }
    let w0 = base + r + 2;
    let wmax = w0 + (sym_indices.len() as i64) * (r + 1);

    let domain_size = (wmax + 2) as u64; // values 0..=wmax and Inf
    let total = domain_size
        .checked_pow(sym_indices.len() as u32)
        .filter(|t| *t <= MAX_CONFIGURATIONS)
        .ok_or_else(|| {
            Error::Unsupported("symbolic configuration space too large".into())
        })?;

    let rep_for_coset = if n > 1 { Some((comb.rep.clone(), n)) } else { None };

    let mut sat_guards: Vec<Formula> = Vec::new();
    let mut constant_result = false;
    let mut assignment = vec![Val::Inf; sym_indices.len()];
    for idx in 0..total {
        // decode the mixed-radix index into an assignment
        let mut rem = idx;
        for slot in assignment.iter_mut() {
            let digit = rem % domain_size;
            rem /= domain_size;
            *slot = if digit as i64 > wmax { Val::Inf } else { Val::Fin(digit as i64) };
        }
        let resolve = |q: usize| -> Val {
            match quantities.entries[q].pinned {
                Some(v) => v,
                None => {
                    let pos = sym_indices.iter().position(|s| *s == q).expect("symbolic");
                    assignment[pos]
                }
            }
        };
        let mut dist = vec![vec![Val::Inf; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let d = resolve(dist_q[i][j]);
                dist[i][j] = d;
                dist[j][i] = d;
            }
        }
        if !tree::is_coherent(&dist) {
            continue; // the guard would be unsatisfiable
        }
        let mut tcons: Vec<(usize, Cmp, Val)> = Vec::with_capacity(constraints.len());
        for (ci, (center, cmp, theta)) in constraints.iter().enumerate() {
            let v = match theta {
                SymVal::Fin(v) => Val::Fin(*v),
                SymVal::Inf => Val::Inf,
                SymVal::V { shift, .. } => resolve(theta_q[ci].expect("interned")).shift(*shift),
            };
            tcons.push((*center, *cmp, v));
        }
        // point admissibility, resolved only where the system can force z
        // onto a center
        let mut admissible: Vec<Option<bool>> = vec![None; k];
        for (center, cmp, theta) in &tcons {
            let forced = *theta == Val::Inf && matches!(cmp, Cmp::Eq | Cmp::Ge);
            if !forced || admissible[*center].is_some() {
                continue;
            }
            admissible[*center] =
                Some(point_admissibility(&centers[*center], &rep_for_coset, xc.hflag)?);
        }
        let tsys = TreeSystem {
            branching: cfg.p(),
            dist,
            constraints: tcons,
            point_admissible: admissible,
        };
        if tree::consistent(&tsys) {
            if sym_indices.is_empty() {
                constant_result = true;
                break;
            }
            sat_guards.push(config_guard(&quantities, &sym_indices, &assignment, w0, r));
        }
    }

    let core = if sym_indices.is_empty() {
        if constant_result {
            Formula::truth()
        } else {
            Formula::falsity()
        }
    } else {
        let mut dedup = Vec::new();
        for g in sat_guards {
            if !dedup.contains(&g) {
                dedup.push(g);
            }
        }
        disj(dedup)
    };
    let mut all = xc.params.clone();
    all.extend(guards);
    all.push(core);
    Ok(conj(all))
}

/// Can `z` equal this exact center, i.e. does the center lie in the combined
/// coset and on the right side of `H`? Only ground centers can be checked;
/// a symbolic center that the system can force is outside the fragment.
fn point_admissibility(
    center: &LinForm,
    rep_for_coset: &Option<(LinForm, u64)>,
    hflag: HFlag,
) -> Result<bool> {
    let coset_ok = match rep_for_coset {
        None => true,
        Some((rep, n)) => {
            let diff = center.sub(rep);
            if !diff.is_ground() {
                return Err(Error::Unsupported(
                    "an equality constraint forces the variable onto a center whose coset \
                     membership is symbolic"
                        .into(),
                ));
            }
            let nn = BigInt::from(*n);
            diff.constant.m.is_multiple_of(&nn) && diff.constant.n.is_multiple_of(&nn)
        }
    };
    let h_ok = match hflag {
        HFlag::Unconstrained => true,
        HFlag::InH | HFlag::NotInH => {
            if !center.is_ground() {
                return Err(Error::Unsupported(
                    "an equality constraint forces the variable onto a symbolic center \
                     under an H-membership flag"
                        .into(),
                ));
            }
            let in_h = center.constant.in_h();
            (hflag == HFlag::InH) == in_h
        }
    };
    Ok(coset_ok && h_ok)
}

/// Quantity table: valuations of parameter terms, interned up to sign.
#[derive(Default)]
struct Quantities {
    entries: Vec<QuantityEntry>,
    index: BTreeMap<LinForm, usize>,
}

struct QuantityEntry {
    form: LinForm,
    pinned: Option<Val>,
}

impl Quantities {
    fn intern(&mut self, form: LinForm, cfg: &Config) -> usize {
        let canon = canonical_form(form);
        if let Some(&i) = self.index.get(&canon) {
            return i;
        }
        let pinned = if canon.is_ground() {
            Some(if canon.is_zero() { Val::Inf } else { cfg.big_v(&canon.constant) })
        } else {
            None
        };
        let i = self.entries.len();
        self.entries.push(QuantityEntry { form: canon.clone(), pinned });
        self.index.insert(canon, i);
        i
    }
}

/// Valuations are negation-invariant; intern `V(t)` and `V(-t)` together.
fn canonical_form(form: LinForm) -> LinForm {
    let neg = form.neg();
    if neg < form {
        neg
    } else {
        form
    }
}

/// Atoms pinning the symbolic quantities to the decided configuration:
/// exact values below the window, and order-with-clipped-differences above.
fn config_guard(
    quantities: &Quantities,
    sym_indices: &[usize],
    assignment: &[Val],
    w0: i64,
    r: i64,
) -> Formula {
    use crate::formula::conj;
    let mut atoms = Vec::new();
    let term_of = |q: usize| quantities.entries[q].form.to_term();
    for (pos, &q) in sym_indices.iter().enumerate() {
        match assignment[pos] {
            Val::Inf => atoms.push(Formula::Atom(Atom::ValCmp {
                term: term_of(q),
                shift: BigInt::zero(),
                cmp: Cmp::Eq,
                rhs: ValueTerm::Inf,
            })),
            Val::Fin(v) if v < w0 => atoms.push(Formula::Atom(Atom::ValCmp {
                term: term_of(q),
                shift: BigInt::zero(),
                cmp: Cmp::Eq,
                rhs: ValueTerm::Lit(BigInt::from(v)),
            })),
            Val::Fin(_) => atoms.push(Formula::Atom(Atom::ValCmp {
                term: term_of(q),
                shift: BigInt::zero(),
                cmp: Cmp::Ge,
                rhs: ValueTerm::Lit(BigInt::from(w0)),
            })),
        }
    }
    // relations among the large quantities
    for i in 0..sym_indices.len() {
        for j in i + 1..sym_indices.len() {
            let (vi, vj) = (assignment[i], assignment[j]);
            let (Val::Fin(a), Val::Fin(b)) = (vi, vj) else { continue };
            if a < w0 || b < w0 {
                continue;
            }
            let (qi, qj) = (sym_indices[i], sym_indices[j]);
            let delta = b - a;
            let atom = if delta.abs() <= r {
                // V(t_i) + delta = V(t_j)
                Atom::ValCmp {
                    term: term_of(qi),
                    shift: BigInt::from(delta),
                    cmp: Cmp::Eq,
                    rhs: ValueTerm::V { term: term_of(qj), shift: BigInt::zero() },
                }
            } else if delta > r {
                Atom::ValCmp {
                    term: term_of(qi),
                    shift: BigInt::from(r),
                    cmp: Cmp::Lt,
                    rhs: ValueTerm::V { term: term_of(qj), shift: BigInt::zero() },
                }
            } else {
                Atom::ValCmp {
                    term: term_of(qj),
                    shift: BigInt::from(r),
                    cmp: Cmp::Lt,
                    rhs: ValueTerm::V { term: term_of(qi), shift: BigInt::zero() },
                }
            };
            atoms.push(Formula::Atom(atom));
        }
    }
    conj(atoms)
}

// ---------------------------------------------------------------------------
// ground entry points
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
}

/// Decide `exists var. conjunct` for a quantifier-free input whose
/// parameters are ground.
pub fn decide_exists(conjunct: &Formula, var: &str, cfg: &Config) -> Result<SatResult> {
    let free = conjunct.free_vars();
    if free.iter().any(|v| v != var) {
        return Err(Error::Domain(format!(
            "decide_exists needs ground parameters; free variables besides {var}: {}",
            free.iter().filter(|v| *v != var).cloned().collect::<Vec<_>>().join(", ")
        )));
    }
    let qf = eliminate_exists(conjunct.clone(), var, Sort::G, cfg)?;
    Ok(if eval_ground(&qf, &Env::new(), cfg)? { SatResult::Sat } else { SatResult::Unsat })
}

/// The ground ball systems of the satisfiable disjuncts of
/// `exists var. conjunct`, for witness search.
pub fn sat_systems(conjunct: &Formula, var: &str, cfg: &Config) -> Result<Vec<BallSystem>> {
    let dnf = normalize(conjunct, var, cfg.p())?;
    let mut out = Vec::new();
    for lits in collect_disjuncts(&dnf) {
        let Some(xc) = decompose(lits, var)? else { continue };
        // parameters must be ground and true
        let env = Env::new();
        let mut params_ok = true;
        for p in &xc.params {
            if !eval_ground(p, &env, cfg)? {
                params_ok = false;
                break;
            }
        }
        if !params_ok {
            continue;
        }
        let Some(sys) = ground_system(&xc, var, cfg)? else { continue };
        if sys.ball_consistency(cfg) {
            out.push(sys);
        }
    }
    Ok(out)
}

/// Evaluate a ground conjunct decomposition into a concrete ball system;
/// `None` when the congruences are inconsistent.
fn ground_system(xc: &XConjunct, var: &str, cfg: &Config) -> Result<Option<BallSystem>> {
    let env = Env::new();
    let mut cong_atoms: Vec<(GroupElement, u64)> = Vec::new();
    for (c, n) in &xc.psi {
        cong_atoms.push((c.eval(&env)?, *n));
    }
    if xc.lambda > 1 {
        cong_atoms.push((GroupElement::identity(), xc.lambda));
    }
    let Some(coset) = combine_congruences(&cong_atoms) else {
        return Ok(None);
    };
    let mut constraints = Vec::new();
    for p in &xc.phi {
        let center = p.center.eval(&env)?;
        let radius = match &p.theta {
            SymVal::Fin(v) => Val::Fin(*v),
            SymVal::Inf => Val::Inf,
            SymVal::V { form, shift } => cfg.big_v(&form.eval(&env)?).shift(*shift),
        };
        constraints.push(crate::qe::system::BallConstraint { center, cmp: p.cmp, radius });
    }
    let coset = if coset.modulus == 1 { None } else { Some(coset) };
    Ok(Some(BallSystem {
        var: var.to_string(),
        coeff: BigInt::from(xc.lambda),
        constraints,
        coset: coset.map(|c| Coset { modulus: c.modulus, rep: c.rep }),
        hflag: xc.hflag,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn cfg() -> Config {
        Config::new(5, 6, 11).unwrap()
    }

    #[test]
    fn decide_spec_examples() {
        let c = cfg();
        assert!(decide(&parse("exists x in G. V(x) = 0").unwrap(), &c).unwrap());
        assert!(!decide(&parse("exists x in G. V(x) >= 1 and V(x) < 1").unwrap(), &c).unwrap());
        assert!(decide(&parse("exists x in G. x cong 2 a and V(x - a) >= 9").unwrap(), &c)
            .unwrap());
        assert!(decide(&parse("exists x in G. H(x) and V(x - b) >= 4").unwrap(), &c).unwrap());
        assert!(!decide(&parse("exists x in G. x = a and x = b").unwrap(), &c).unwrap());
    }

    #[test]
    fn valuation_law_sentence() {
        // forall x. V(2x) = V(x) + 1 holds at p = 2 and fails at p = 5
        let f = parse("forall x in G. V(x + x) = V(x) + 1").unwrap();
        let c2 = Config::new(2, 3, 5).unwrap();
        assert!(decide(&f, &c2).unwrap());
        assert!(!decide(&f, &cfg()).unwrap());
    }

    #[test]
    fn h_sort_quantifier() {
        let c = cfg();
        assert!(decide(&parse("exists x in H. V(x - b) >= 4").unwrap(), &c).unwrap());
        // inside H no element is congruent to b mod 2
        assert!(!decide(&parse("exists x in H. x cong 2 b").unwrap(), &c).unwrap());
    }

    #[test]
    fn nested_quantifiers_with_parameters() {
        let c = cfg();
        // for every x there is y strictly closer to x than a is
        let f = parse(
            "forall x in G. exists y in G. V(x - y) > V(x - a) or V(x - a) = inf",
        )
        .unwrap();
        assert!(decide(&f, &c).unwrap());
        // and there is no y at distance exactly one level below inf from x
        let g = parse("exists x in G. exists y in G. V(x - y) = inf and not x = y").unwrap();
        assert!(!decide(&g, &c).unwrap());
    }

    #[test]
    fn quantifier_order_swap() {
        let c = cfg();
        let fa = parse("exists x in G. exists y in G. x cong 2 y and V(x - y) >= 3").unwrap();
        let fb = parse("exists y in G. exists x in G. x cong 2 y and V(x - y) >= 3").unwrap();
        assert_eq!(decide(&fa, &c).unwrap(), decide(&fb, &c).unwrap());
    }

    #[test]
    fn decide_exists_matches_decide() {
        let c = cfg();
        for s in [
            "x cong 2 a and V(x - a) >= 2",
            "V(x) >= 1 and V(x) < 1",
            "H(x) and V(x - b) >= 4",
            "V(x - a) = 2 and V(x - b) = 2",
        ] {
            let conj = parse(s).unwrap();
            let via_exists = decide_exists(&conj, "x", &c).unwrap() == SatResult::Sat;
            let sentence = parse(&format!("exists x in G. {s}")).unwrap();
            assert_eq!(via_exists, decide(&sentence, &c).unwrap(), "on {s}");
        }
    }

    #[test]
    fn negation_coherence() {
        let c = cfg();
        for s in [
            "exists x in G. V(x) = 0",
            "exists x in G. x cong 2 a and V(x - a) >= 9",
            "forall x in G. V(x + x) = V(x) + 1",
            "exists x in H. x cong 2 b",
        ] {
            let f = parse(s).unwrap();
            let nf = Formula::Not(Box::new(f.clone()));
            assert_eq!(decide(&nf, &c).unwrap(), !decide(&f, &c).unwrap(), "on {s}");
        }
    }
}
