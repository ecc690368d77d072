//! Hand-rolled lexer and recursive-descent parser for the formula grammar:
//!
//! ```text
//! formula := ("exists" | "forall") VAR "in" ("G"|"H") "." formula | disj
//! disj    := conj ("or" conj)*
//! conj    := lit ("and" lit)*
//! lit     := ["not"] (atom | "(" formula ")")
//! atom    := "V(" gterm ")" [("+"|"-") NAT] CMP vterm
//!          | gterm "=" gterm | gterm "cong" NAT gterm | "H(" VAR ")"
//! gterm   := ["-"] term (("+"|"-") term)*
//! term    := [NAT "*"] (VAR | "a" | "b" | "g(" INT "," INT ")")
//! vterm   := "V(" gterm ")" [("+"|"-") NAT] | NAT | "inf"
//! CMP     := "<" | "<=" | "=" | ">=" | ">"
//! ```
//!
//! Whitespace-insensitive. `a`, `b`, `g`, `V`, `H`, `G`, `inf` and the
//! keywords are reserved; any other identifier is a variable.

use num_bigint::BigInt;
use num_traits::Signed;

use super::{Atom, Cmp, Formula, GroupTerm, Quantifier, Sign, TermAtom, TermBase, ValueTerm};
use crate::error::{Error, Result};
use crate::group::Sort;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(BigInt),
    LParen,
    RParen,
    Comma,
    Dot,
    Plus,
    Minus,
    Star,
    Cmp(Cmp),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, co) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let tok = match c {
            '(' => {
                bump(&mut chars);
                Tok::LParen
            }
            ')' => {
                bump(&mut chars);
                Tok::RParen
            }
            ',' => {
                bump(&mut chars);
                Tok::Comma
            }
            '.' => {
                bump(&mut chars);
                Tok::Dot
            }
            '+' => {
                bump(&mut chars);
                Tok::Plus
            }
            '-' => {
                bump(&mut chars);
                Tok::Minus
            }
            '*' => {
                bump(&mut chars);
                Tok::Star
            }
            '=' => {
                bump(&mut chars);
                Tok::Cmp(Cmp::Eq)
            }
            '<' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Tok::Cmp(Cmp::Le)
                } else {
                    Tok::Cmp(Cmp::Lt)
                }
            }
            '>' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    Tok::Cmp(Cmp::Ge)
                } else {
                    Tok::Cmp(Cmp::Gt)
                }
            }
            _ if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                Tok::Nat(s.parse().expect("digits"))
            }
            _ if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            other => {
                return Err(Error::Parse {
                    line: l,
                    col: co,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        };
        out.push(Spanned { tok, line: l, col: co });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

pub fn parse(text: &str) -> Result<Formula> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let f = p.formula()?;
    if p.pos < p.toks.len() {
        return Err(p.err_here("trailing input after formula"));
    }
    Ok(f)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|s| &s.tok)
    }

    fn next(&mut self) -> Option<&Spanned> {
        let s = self.toks.get(self.pos);
        if s.is_some() {
            self.pos += 1;
        }
        s
    }

    fn err_here(&self, msg: &str) -> Error {
        let (line, col) = self
            .toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1));
        let (line, col) = if self.pos >= self.toks.len() && !self.toks.is_empty() {
            let last = &self.toks[self.toks.len() - 1];
            (last.line, last.col + 1)
        } else {
            (line, col)
        };
        Error::Parse { line, col, msg: msg.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err_here(&format!("expected {what}"))),
        }
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(i)) if i == s)
    }

    fn take_ident(&mut self) -> Result<String> {
        match self.peek().cloned() {
            Some(Tok::Ident(i)) => {
                self.pos += 1;
                Ok(i)
            }
            _ => Err(self.err_here("expected identifier")),
        }
    }

    fn formula(&mut self) -> Result<Formula> {
        if self.is_ident("exists") || self.is_ident("forall") {
            let q = if self.is_ident("exists") { Quantifier::Exists } else { Quantifier::Forall };
            self.pos += 1;
            let var = self.variable()?;
            if !self.is_ident("in") {
                return Err(self.err_here("expected 'in' after quantified variable"));
            }
            self.pos += 1;
            let sort = match self.peek() {
                Some(Tok::Ident(s)) if s == "G" => Sort::G,
                Some(Tok::Ident(s)) if s == "H" => Sort::H,
                Some(Tok::Ident(s)) if s == "V" => {
                    return Err(Error::Unsupported(
                        "value-sort quantification is outside the supported fragment".into(),
                    ))
                }
                _ => return Err(self.err_here("expected sort G or H")),
            };
            self.pos += 1;
            self.expect(Tok::Dot, "'.' after quantifier prefix")?;
            let body = self.formula()?;
            return Ok(Formula::Quant { q, var, sort, body: Box::new(body) });
        }
        self.disj()
    }

    fn disj(&mut self) -> Result<Formula> {
        let first = self.conj()?;
        let mut items = vec![first];
        while self.is_ident("or") {
            self.pos += 1;
            items.push(self.conj()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Formula::Or(items) })
    }

    fn conj(&mut self) -> Result<Formula> {
        let first = self.lit()?;
        let mut items = vec![first];
        while self.is_ident("and") {
            self.pos += 1;
            items.push(self.lit()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Formula::And(items) })
    }

    fn lit(&mut self) -> Result<Formula> {
        if self.is_ident("not") {
            self.pos += 1;
            let inner = self.lit_body()?;
            return Ok(Formula::Not(Box::new(inner)));
        }
        self.lit_body()
    }

    // group terms never start with '(', so one here always opens a subformula
    fn lit_body(&mut self) -> Result<Formula> {
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let f = self.formula()?;
            self.expect(Tok::RParen, "closing ')'")?;
            return Ok(f);
        }
        Ok(Formula::Atom(self.atom()?))
    }

    fn atom(&mut self) -> Result<Atom> {
        if self.is_ident("V") && self.peek2() == Some(&Tok::LParen) {
            self.pos += 2;
            let term = self.gterm()?;
            self.expect(Tok::RParen, "closing ')' of V(...)")?;
            let shift = self.opt_shift()?;
            let cmp = match self.peek() {
                Some(Tok::Cmp(c)) => {
                    let c = *c;
                    self.pos += 1;
                    c
                }
                _ => return Err(self.err_here("expected comparison after V(...)")),
            };
            let rhs = self.vterm()?;
            return Ok(Atom::ValCmp { term, shift, cmp, rhs });
        }
        if self.is_ident("H") && self.peek2() == Some(&Tok::LParen) {
            self.pos += 2;
            let var = self.variable()?;
            self.expect(Tok::RParen, "closing ')' of H(...)")?;
            return Ok(Atom::InH(var));
        }
        let lhs = self.gterm()?;
        match self.peek() {
            Some(Tok::Cmp(Cmp::Eq)) => {
                self.pos += 1;
                let rhs = self.gterm()?;
                Ok(Atom::Eq(lhs, rhs))
            }
            Some(Tok::Ident(i)) if i == "cong" => {
                self.pos += 1;
                let modulus = match self.peek().cloned() {
                    Some(Tok::Nat(n)) => {
                        self.pos += 1;
                        n
                    }
                    _ => return Err(self.err_here("expected modulus after 'cong'")),
                };
                if !modulus.is_positive() {
                    return Err(self.err_here("congruence modulus must be >= 1"));
                }
                let rhs = self.gterm()?;
                Ok(Atom::Cong { lhs, modulus, rhs })
            }
            _ => Err(self.err_here("expected '=' or 'cong' after group term")),
        }
    }

    fn opt_shift(&mut self) -> Result<BigInt> {
        match self.peek() {
            Some(Tok::Plus) | Some(Tok::Minus) => {
                // a sign here belongs to the shift only if a number follows
                if let Some(Tok::Nat(_)) = self.peek2() {
                    let neg = self.peek() == Some(&Tok::Minus);
                    self.pos += 1;
                    if let Some(Spanned { tok: Tok::Nat(n), .. }) = self.next() {
                        let n = n.clone();
                        Ok(if neg { -n } else { n })
                    } else {
                        unreachable!("peeked")
                    }
                } else {
                    Ok(BigInt::from(0))
                }
            }
            _ => Ok(BigInt::from(0)),
        }
    }

    fn vterm(&mut self) -> Result<ValueTerm> {
        if self.is_ident("V") && self.peek2() == Some(&Tok::LParen) {
            self.pos += 2;
            let term = self.gterm()?;
            self.expect(Tok::RParen, "closing ')' of V(...)")?;
            let shift = self.opt_shift()?;
            return Ok(ValueTerm::V { term, shift });
        }
        if self.is_ident("inf") {
            self.pos += 1;
            return Ok(ValueTerm::Inf);
        }
        match self.peek().cloned() {
            Some(Tok::Nat(n)) => {
                self.pos += 1;
                Ok(ValueTerm::Lit(n))
            }
            _ => Err(self.err_here("expected value term: V(...), a natural number, or inf")),
        }
    }

    fn gterm(&mut self) -> Result<GroupTerm> {
        let mut terms = Vec::new();
        let first_sign = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            Sign::Minus
        } else {
            Sign::Plus
        };
        terms.push((first_sign, self.term()?));
        loop {
            let sign = match self.peek() {
                Some(Tok::Plus) => Sign::Plus,
                Some(Tok::Minus) => Sign::Minus,
                _ => break,
            };
            // '+ 3' may be a value shift of an enclosing V(...), which the
            // caller handles; only consume when a term follows
            if matches!(self.peek2(), Some(Tok::Nat(_)))
                && !matches!(self.toks.get(self.pos + 2).map(|s| &s.tok), Some(Tok::Star))
            {
                break;
            }
            self.pos += 1;
            terms.push((sign, self.term()?));
        }
        Ok(GroupTerm { terms })
    }

    fn term(&mut self) -> Result<TermAtom> {
        let coeff = match self.peek().cloned() {
            Some(Tok::Nat(n)) => {
                self.pos += 1;
                self.expect(Tok::Star, "'*' after coefficient")?;
                Some(n)
            }
            _ => None,
        };
        let base = self.term_base()?;
        Ok(TermAtom { coeff, base })
    }

    fn term_base(&mut self) -> Result<TermBase> {
        match self.peek().cloned() {
            Some(Tok::Ident(i)) => match i.as_str() {
                "a" => {
                    self.pos += 1;
                    Ok(TermBase::Alpha)
                }
                "b" => {
                    self.pos += 1;
                    Ok(TermBase::Beta)
                }
                "g" => {
                    self.pos += 1;
                    self.expect(Tok::LParen, "'(' after g")?;
                    let m = self.int()?;
                    self.expect(Tok::Comma, "',' inside g(...)")?;
                    let n = self.int()?;
                    self.expect(Tok::RParen, "closing ')' of g(...)")?;
                    Ok(TermBase::Literal(m, n))
                }
                _ => {
                    if RESERVED.contains(&i.as_str()) {
                        return Err(self.err_here(&format!("unknown identifier {i}")));
                    }
                    if self.peek2() == Some(&Tok::LParen) {
                        return Err(self.err_here(&format!("unknown identifier {i}")));
                    }
                    self.pos += 1;
                    Ok(TermBase::Var(i))
                }
            },
            _ => Err(self.err_here("expected a group term")),
        }
    }

    fn variable(&mut self) -> Result<String> {
        let at = self.pos;
        let name = self.take_ident()?;
        if RESERVED.contains(&name.as_str()) || name == "a" || name == "b" || name == "g" {
            self.pos = at;
            return Err(self.err_here(&format!("{name} is reserved and cannot be a variable")));
        }
        Ok(name)
    }

    fn int(&mut self) -> Result<BigInt> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.peek().cloned() {
            Some(Tok::Nat(n)) => {
                self.pos += 1;
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.err_here("expected integer")),
        }
    }
}

const RESERVED: &[&str] =
    &["exists", "forall", "in", "not", "and", "or", "cong", "inf", "V", "H", "G"];

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(s: &str) -> String {
        parse(s).unwrap().to_string()
    }

    #[test]
    fn parses_phi_atom() {
        let f = parse("V(x - a) >= 3").unwrap();
        match &f {
            Formula::Atom(Atom::ValCmp { cmp: Cmp::Ge, rhs: ValueTerm::Lit(n), .. }) => {
                assert_eq!(n, &BigInt::from(3));
            }
            other => panic!("unexpected AST {other:?}"),
        }
        assert_eq!(f.to_string(), "V(x - a) >= 3");
    }

    #[test]
    fn parses_quantified_conjunction() {
        let f = parse("exists x in G. x cong 2 a and V(x - a) >= 9").unwrap();
        assert_eq!(f.to_string(), "exists x in G. x cong 2 a and V(x - a) >= 9");
        assert!(f.free_vars().is_empty());
    }

    #[test]
    fn rejects_value_sort_quantifier() {
        assert!(matches!(parse("forall y in V. V(x) = 0"), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rejects_unknown_function_identifier() {
        assert!(matches!(parse("W(x) = 3"), Err(Error::Parse { .. })));
    }

    #[test]
    fn parse_print_roundtrip_on_strings() {
        for s in [
            "V(x) = 0",
            "V(2 * x - a) + 2 >= V(b)",
            "V(x - a) - 1 < V(x - b) + 3",
            "x cong 6 a + b",
            "H(x) and not H(y)",
            "exists x in H. V(x - b) >= 4",
            "forall x in G. V(x) = 0 or V(x) >= 1",
            "(V(x) = 0 or H(x)) and V(y) <= 2",
            "not (V(x) = 0 and H(x))",
            "g(3,-2) = a - b",
            "-x + 2 * y - g(1,1) cong 3 g(0,0)",
            "V(x) >= inf",
            "V(x + x) = V(x) + 1",
        ] {
            assert_eq!(roundtrip(s), s, "failed for {s}");
        }
    }

    #[test]
    fn redundant_parens_dissolve() {
        let a = parse("forall x in G. (V(x) = 0 or V(x) >= 1)").unwrap();
        let b = parse("forall x in G. V(x) = 0 or V(x) >= 1").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn line_col_in_errors() {
        match parse("V(x -\n q q) = 3") {
            Err(Error::Parse { line, col, .. }) => {
                assert_eq!(line, 2);
                assert!(col >= 3);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn shift_vs_term_disambiguation() {
        // "+ 1" after V(...) is a shift; "+ 2 * y" inside is a term
        let f = parse("V(x + 2 * y) + 1 = 3").unwrap();
        match f {
            Formula::Atom(Atom::ValCmp { ref term, ref shift, .. }) => {
                assert_eq!(term.terms.len(), 2);
                assert_eq!(shift, &BigInt::from(1));
            }
            ref other => panic!("unexpected {other:?}"),
        }
    }
}
