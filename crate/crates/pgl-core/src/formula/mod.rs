//! AST, parser, pretty printer and normal forms for the two-sorted language
//! of pairs of p-valued groups.
//!
//! Group terms are integer-linear combinations of group variables, the
//! constants `a` (= alpha) and `b` (= beta), and literals `g(m,n)`. Value
//! terms are `V(t) + r`, natural literals, or `inf`. Atoms are equalities,
//! congruences `t cong n t'`, `H(x)` on plain variables, and valuation
//! comparisons. Quantifiers range over the group sorts `G` and `H` only;
//! value-sort quantification is rejected as an unsupported fragment.

mod normalize;
mod parser;

pub use normalize::normalize;
pub(crate) use normalize::{conj, disj};
pub use parser::parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::group::{GroupElement, Sort};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermBase {
    Var(String),
    /// The constant `a`, interpreted by alpha (the `1` of the pair language).
    Alpha,
    /// The constant `b`, interpreted by beta (the `C` of the pair language).
    Beta,
    /// A literal element `g(m,n)`.
    Literal(BigInt, BigInt),
}

/// One summand `[coeff *] base`; coefficients are kept nonnegative, signs
/// live on the enclosing [`GroupTerm`] slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermAtom {
    pub coeff: Option<BigInt>,
    pub base: TermBase,
}

/// `term ((+|-) term)*`, with an optional leading minus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTerm {
    pub terms: Vec<(Sign, TermAtom)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    /// The comparison read right-to-left.
    pub fn flip(self) -> Cmp {
        match self {
            Cmp::Lt => Cmp::Gt,
            Cmp::Le => Cmp::Ge,
            Cmp::Eq => Cmp::Eq,
            Cmp::Ge => Cmp::Le,
            Cmp::Gt => Cmp::Lt,
        }
    }

    pub fn eval<T: Ord>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueTerm {
    V { term: GroupTerm, shift: BigInt },
    Lit(BigInt),
    Inf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    /// `V(term) + shift CMP rhs`
    ValCmp { term: GroupTerm, shift: BigInt, cmp: Cmp, rhs: ValueTerm },
    Eq(GroupTerm, GroupTerm),
    /// `lhs cong modulus rhs`
    Cong { lhs: GroupTerm, modulus: BigInt, rhs: GroupTerm },
    /// `H(x)` on a plain variable.
    InH(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Quant { q: Quantifier, var: String, sort: Sort, body: Box<Formula> },
}

impl Formula {
    /// `V(g(0,0)) = inf`: true in every model.
    pub fn truth() -> Formula {
        Formula::Atom(Atom::ValCmp {
            term: GroupTerm::literal(BigInt::zero(), BigInt::zero()),
            shift: BigInt::zero(),
            cmp: Cmp::Eq,
            rhs: ValueTerm::Inf,
        })
    }

    /// `V(g(0,0)) < inf`: false in every model.
    pub fn falsity() -> Formula {
        Formula::Atom(Atom::ValCmp {
            term: GroupTerm::literal(BigInt::zero(), BigInt::zero()),
            shift: BigInt::zero(),
            cmp: Cmp::Lt,
            rhs: ValueTerm::Inf,
        })
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(|f| f.is_quantifier_free()),
            Formula::Quant { .. } => false,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut BTreeSet<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => a.collect_vars(bound, out),
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
            Formula::Quant { var, body, .. } => {
                let fresh = bound.insert(var.clone());
                body.collect_free(bound, out);
                if fresh {
                    bound.remove(var);
                }
            }
        }
    }
}

impl Atom {
    fn collect_vars(&self, bound: &BTreeSet<String>, out: &mut BTreeSet<String>) {
        let mut term_vars = |t: &GroupTerm| {
            for (_, atom) in &t.terms {
                if let TermBase::Var(v) = &atom.base {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
            }
        };
        match self {
            Atom::ValCmp { term, rhs, .. } => {
                term_vars(term);
                if let ValueTerm::V { term, .. } = rhs {
                    term_vars(term);
                }
            }
            Atom::Eq(l, r) => {
                term_vars(l);
                term_vars(r);
            }
            Atom::Cong { lhs, rhs, .. } => {
                term_vars(lhs);
                term_vars(rhs);
            }
            Atom::InH(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        }
    }
}

impl GroupTerm {
    pub fn literal(m: BigInt, n: BigInt) -> Self {
        GroupTerm {
            terms: vec![(Sign::Plus, TermAtom { coeff: None, base: TermBase::Literal(m, n) })],
        }
    }

    pub fn var(name: &str) -> Self {
        GroupTerm {
            terms: vec![(Sign::Plus, TermAtom { coeff: None, base: TermBase::Var(name.into()) })],
        }
    }
}

/// A group term collected into `sum coeff_i * var_i + constant`, the working
/// representation for normalization and evaluation. The constant part is an
/// exponent pair (the constants `a`, `b` and literals fold together).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LinForm {
    pub coeffs: BTreeMap<String, BigInt>,
    pub constant: GroupElement,
}

impl LinForm {
    pub fn zero() -> Self {
        LinForm { coeffs: BTreeMap::new(), constant: GroupElement::identity() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.constant.is_identity()
    }

    pub fn from_term(t: &GroupTerm) -> Self {
        let mut lf = LinForm::zero();
        for (sign, atom) in &t.terms {
            let mut c = atom.coeff.clone().unwrap_or_else(BigInt::one);
            if *sign == Sign::Minus {
                c = -c;
            }
            match &atom.base {
                TermBase::Var(v) => {
                    let entry = lf.coeffs.entry(v.clone()).or_insert_with(BigInt::zero);
                    *entry += &c;
                }
                TermBase::Alpha => lf.constant.m += &c,
                TermBase::Beta => lf.constant.n += &c,
                TermBase::Literal(m, n) => {
                    lf.constant.m += &c * m;
                    lf.constant.n += &c * n;
                }
            }
        }
        lf.coeffs.retain(|_, c| !c.is_zero());
        lf
    }

    pub fn to_term(&self) -> GroupTerm {
        let mut terms = Vec::new();
        for (v, c) in &self.coeffs {
            let (sign, mag) =
                if c.is_negative() { (Sign::Minus, -c) } else { (Sign::Plus, c.clone()) };
            let coeff = if mag.is_one() { None } else { Some(mag) };
            terms.push((sign, TermAtom { coeff, base: TermBase::Var(v.clone()) }));
        }
        if terms.is_empty() || !self.constant.is_identity() {
            terms.push((
                Sign::Plus,
                TermAtom {
                    coeff: None,
                    base: TermBase::Literal(self.constant.m.clone(), self.constant.n.clone()),
                },
            ));
        }
        GroupTerm { terms }
    }

    pub fn is_ground(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn neg(&self) -> Self {
        LinForm {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), -c)).collect(),
            constant: self.constant.neg(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            let entry = out.coeffs.entry(v.clone()).or_insert_with(BigInt::zero);
            *entry -= c;
        }
        out.coeffs.retain(|_, c| !c.is_zero());
        out.constant = out.constant.sub(&other.constant);
        out
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return LinForm::zero();
        }
        LinForm {
            coeffs: self.coeffs.iter().map(|(v, k)| (v.clone(), k * c)).collect(),
            constant: self.constant.scale(c),
        }
    }

    /// Coefficient of `x` (zero if absent) and the remainder without `x`.
    pub fn split_var(&self, x: &str) -> (BigInt, LinForm) {
        let mut rest = self.clone();
        let coeff = rest.coeffs.remove(x).unwrap_or_else(BigInt::zero);
        (coeff, rest)
    }

    pub fn eval(&self, env: &BTreeMap<String, GroupElement>) -> Result<GroupElement> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            let g =
                env.get(v).ok_or_else(|| Error::Domain(format!("unbound variable {v}")))?;
            acc = acc.add(&g.scale(c));
        }
        Ok(acc)
    }

    /// Greatest common divisor of all coefficients (variables and constant
    /// exponents); zero for the zero form.
    pub fn content(&self) -> BigInt {
        use num_integer::Integer;
        let mut g = BigInt::zero();
        for c in self.coeffs.values() {
            g = g.gcd(c);
        }
        g = g.gcd(&self.constant.m);
        g.gcd(&self.constant.n)
    }

    pub fn div_exact(&self, c: &BigInt) -> Self {
        LinForm {
            coeffs: self.coeffs.iter().map(|(v, k)| (v.clone(), k / c)).collect(),
            constant: GroupElement::new(&self.constant.m / c, &self.constant.n / c),
        }
    }
}

// ---------------------------------------------------------------------------
// pretty printer (parse . print = identity on ASTs)
// ---------------------------------------------------------------------------

impl fmt::Display for GroupTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (sign, atom)) in self.terms.iter().enumerate() {
            if i == 0 {
                if *sign == Sign::Minus {
                    write!(f, "-")?;
                }
            } else {
                match sign {
                    Sign::Plus => write!(f, " + ")?,
                    Sign::Minus => write!(f, " - ")?,
                }
            }
            write!(f, "{atom}")?;
        }
        Ok(())
    }
}

impl fmt::Display for TermAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(c) = &self.coeff {
            write!(f, "{c} * ")?;
        }
        match &self.base {
            TermBase::Var(v) => write!(f, "{v}"),
            TermBase::Alpha => write!(f, "a"),
            TermBase::Beta => write!(f, "b"),
            TermBase::Literal(m, n) => write!(f, "g({m},{n})"),
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        };
        write!(f, "{s}")
    }
}

fn write_shift(f: &mut fmt::Formatter<'_>, shift: &BigInt) -> fmt::Result {
    if shift.is_positive() {
        write!(f, " + {shift}")
    } else if shift.is_negative() {
        write!(f, " - {}", -shift)
    } else {
        Ok(())
    }
}

impl fmt::Display for ValueTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueTerm::V { term, shift } => {
                write!(f, "V({term})")?;
                write_shift(f, shift)
            }
            ValueTerm::Lit(n) => write!(f, "{n}"),
            ValueTerm::Inf => write!(f, "inf"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::ValCmp { term, shift, cmp, rhs } => {
                write!(f, "V({term})")?;
                write_shift(f, shift)?;
                write!(f, " {cmp} {rhs}")
            }
            Atom::Eq(l, r) => write!(f, "{l} = {r}"),
            Atom::Cong { lhs, modulus, rhs } => write!(f, "{lhs} cong {modulus} {rhs}"),
            Atom::InH(v) => write!(f, "H({v})"),
        }
    }
}

impl Formula {
    // level 0: formula position, 1: disjunct item, 2: conjunct item
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, level: u8) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(inner) => match **inner {
                Formula::Atom(ref a) => write!(f, "not {a}"),
                _ => {
                    write!(f, "not (")?;
                    inner.fmt_prec(f, 0)?;
                    write!(f, ")")
                }
            },
            Formula::And(items) => {
                if level > 1 || items.len() < 2 {
                    write!(f, "(")?;
                    fmt_items(f, items, " and ")?;
                    write!(f, ")")
                } else {
                    fmt_items(f, items, " and ")
                }
            }
            Formula::Or(items) => {
                if level > 0 || items.len() < 2 {
                    write!(f, "(")?;
                    fmt_items(f, items, " or ")?;
                    write!(f, ")")
                } else {
                    fmt_items(f, items, " or ")
                }
            }
            Formula::Quant { q, var, sort, body } => {
                if level > 0 {
                    write!(f, "(")?;
                }
                let qs = match q {
                    Quantifier::Exists => "exists",
                    Quantifier::Forall => "forall",
                };
                write!(f, "{qs} {var} in {sort}. ")?;
                body.fmt_prec(f, 0)?;
                if level > 0 {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

fn fmt_items(f: &mut fmt::Formatter<'_>, items: &[Formula], sep: &str) -> fmt::Result {
    let child_level = if sep == " and " { 2 } else { 1 };
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            write!(f, "{sep}")?;
        }
        item.fmt_prec(f, child_level)?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}
