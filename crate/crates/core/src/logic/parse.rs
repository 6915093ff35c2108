use std::collections::BTreeSet;

use crate::zones::CmpOp;

use super::ast::{Equation, Formula, Mes, Parity};
use super::tctl::TctlSpec;
use super::{check_alternation_free, LogicError};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(i64),
    LParen,
    RParen,
    Semi,
    OrOr,
    AndAnd,
    Bang,
    Cmp(CmpOp),
    Assign,
    LeadsTo,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, LogicError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let two = text.get(i..i + 2).unwrap_or("");
        let tok = if text[i..].starts_with("-->") {
            i += 3;
            Tok::LeadsTo
        } else if two == "||" {
            i += 2;
            Tok::OrOr
        } else if two == "&&" {
            i += 2;
            Tok::AndAnd
        } else if let Some(op) = CmpOp::parse(two) {
            i += 2;
            Tok::Cmp(op)
        } else if c == '<' || c == '>' {
            i += 1;
            Tok::Cmp(CmpOp::parse(&c.to_string()).expect("single-char comparison"))
        } else if c == '=' {
            i += 1;
            Tok::Assign
        } else if c == '(' {
            i += 1;
            Tok::LParen
        } else if c == ')' {
            i += 1;
            Tok::RParen
        } else if c == ';' {
            i += 1;
            Tok::Semi
        } else if c == '!' {
            i += 1;
            Tok::Bang
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                return Err(LogicError::syntax(start, "constants must be non-negative integers"));
            }
            let n = text[start..i]
                .parse()
                .map_err(|_| LogicError::syntax(start, "constant out of range"))?;
            Tok::Num(n)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                i += 1;
            }
            Tok::Ident(text[start..i].to_string())
        } else {
            return Err(LogicError::syntax(start, format!("unexpected character `{c}`")));
        };
        out.push((start, tok));
    }
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "true", "false", "tt", "ff", "forall", "exists", "forallrel", "existsrel", "box", "dia", "boxall", "diaall", "freeze", "nu",
    "mu",
];

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, LogicError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            end: text.len(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn err(&self, msg: impl Into<String>) -> LogicError {
        LogicError::syntax(self.offset(), msg)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), LogicError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn ident(&mut self) -> Result<String, LogicError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected an identifier")),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn formula(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.conj()?;
        while self.peek() == Some(&Tok::OrOr) {
            self.pos += 1;
            let rhs = self.conj()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> Result<Formula, LogicError> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::AndAnd) {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn paren(&mut self) -> Result<Formula, LogicError> {
        self.expect(Tok::LParen, "`(`")?;
        let f = self.formula()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(f)
    }

    fn pair(&mut self) -> Result<(Formula, Formula), LogicError> {
        self.expect(Tok::LParen, "`(`")?;
        let a = self.formula()?;
        self.expect(Tok::Semi, "`;` between the two operands")?;
        let b = self.formula()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok((a, b))
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        let tok = self.peek().cloned().ok_or_else(|| self.err("unexpected end of input"))?;
        match tok {
            Tok::Bang => {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    return Err(self.err("negation applies only to atomic propositions"));
                }
                let p = self.ident()?;
                Ok(Formula::NegProp(p))
            }
            Tok::LParen => self.paren(),
            Tok::Ident(word) => {
                match word.as_str() {
                    "true" | "tt" => {
                        self.pos += 1;
                        return Ok(Formula::True);
                    }
                    "false" | "ff" => {
                        self.pos += 1;
                        return Ok(Formula::False);
                    }
                    "forall" | "exists" | "boxall" | "diaall" => {
                        self.pos += 1;
                        let f = self.paren()?;
                        return Ok(match word.as_str() {
                            "forall" => Formula::forall(f),
                            "exists" => Formula::exists(f),
                            "boxall" => Formula::box_all(f),
                            _ => Formula::dia_all(f),
                        });
                    }
                    "forallrel" | "existsrel" => {
                        self.pos += 1;
                        let (a, b) = self.pair()?;
                        return Ok(if word == "forallrel" {
                            Formula::forall_rel(a, b)
                        } else {
                            Formula::exists_rel(a, b)
                        });
                    }
                    "box" | "dia" | "freeze" => {
                        self.pos += 1;
                        let name = self.ident()?;
                        let f = self.paren()?;
                        return Ok(match word.as_str() {
                            "box" => Formula::box_act(&name, f),
                            "dia" => Formula::dia_act(&name, f),
                            _ => Formula::freeze(&name, f),
                        });
                    }
                    _ => {}
                }
                let name = self.ident()?;
                if let Some(Tok::Cmp(op)) = self.peek().cloned() {
                    self.pos += 1;
                    return match self.next() {
                        Some(Tok::Num(v)) => Ok(Formula::constraint(&name, op, v)),
                        _ => {
                            self.pos -= 1;
                            Err(self.err("expected a non-negative integer constant"))
                        }
                    };
                }
                Ok(Formula::Prop(name))
            }
            _ => Err(self.err("expected a formula")),
        }
    }

    fn equation(&mut self) -> Result<(usize, String, Parity, Formula), LogicError> {
        let at = self.offset();
        let var = self.ident()?;
        self.expect(Tok::Assign, "`=nu` or `=mu`")?;
        let parity = match self.next() {
            Some(Tok::Ident(p)) if p == "nu" => Parity::Nu,
            Some(Tok::Ident(p)) if p == "mu" => Parity::Mu,
            _ => {
                self.pos -= 1;
                return Err(self.err("expected `nu` or `mu` after `=`"));
            }
        };
        let rhs = self.formula()?;
        Ok((at, var, parity, rhs))
    }
}

/// Turns identifiers naming an equation into variables and recognises the
/// two special freeze patterns.
fn resolve(f: &Formula, vars: &BTreeSet<String>) -> Result<Formula, LogicError> {
    Ok(match f {
        Formula::Prop(p) if vars.contains(p) => Formula::Var(p.clone()),
        Formula::NegProp(p) if vars.contains(p) => return Err(LogicError::NegatedVariable(p.clone())),
        other => {
            let mut err = None;
            let out = other.map_children(&mut |c| {
                resolve(c, vars).unwrap_or_else(|e| {
                    err.get_or_insert(e);
                    Formula::False
                })
            });
            if let Some(e) = err {
                return Err(e);
            }
            recognise_marker(&out).unwrap_or(out)
        }
    })
}

fn recognise_marker(f: &Formula) -> Option<Formula> {
    let is_one = |g: &Formula, z: &str, want: CmpOp| {
        matches!(g, Formula::Constraint { clock, op, value: 1 } if clock == z && *op == want)
    };
    match f {
        Formula::ExistsTime(inner) => match inner.as_ref() {
            Formula::Freeze(z, body) => match body.as_ref() {
                Formula::ForallTime(c) if is_one(c, z, CmpOp::Lt) => Some(Formula::MustAct),
                _ => None,
            },
            _ => None,
        },
        Formula::ForallTime(inner) => match inner.as_ref() {
            Formula::Freeze(z, body) => match body.as_ref() {
                Formula::ExistsTime(c) if is_one(c, z, CmpOp::Ge) => Some(Formula::CanDiverge),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

/// Parses `X =nu f ; Y =mu g ...` and validates alternation-freedom.
pub fn parse_mes(text: &str) -> Result<Mes, LogicError> {
    let mut p = Parser::new(text)?;
    let mut raw = Vec::new();
    loop {
        raw.push(p.equation()?);
        match p.peek() {
            Some(Tok::Semi) => {
                p.pos += 1;
                if p.at_end() {
                    break;
                }
            }
            None => break,
            _ => return Err(p.err("expected `;` or end of input")),
        }
    }
    let mut vars = BTreeSet::new();
    for (at, v, _, _) in &raw {
        if !vars.insert(v.clone()) {
            return Err(LogicError::syntax(*at, format!("variable `{v}` is defined twice")));
        }
    }
    let mut equations = Vec::with_capacity(raw.len());
    for (_, var, parity, rhs) in raw {
        equations.push(Equation {
            var,
            parity,
            rhs: resolve(&rhs, &vars)?,
        });
    }
    let mes = Mes::new(equations);
    check_alternation_free(&mes)?;
    Ok(mes)
}

/// Parses a closed formula (no equations); identifiers are propositions.
pub fn parse_formula(text: &str) -> Result<Formula, LogicError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    if !p.at_end() {
        return Err(p.err("trailing input"));
    }
    resolve(&f, &BTreeSet::new())
}

/// `AG(p)`, `AF(p)`, `EF(p)`, `EG(p)` or `p --> q` over proposition
/// lattices.
pub fn parse_tctl(text: &str) -> Result<TctlSpec, LogicError> {
    let mut p = Parser::new(text)?;
    let head = match (p.peek(), p.peek_at(1)) {
        (Some(Tok::Ident(h)), Some(Tok::LParen)) if matches!(h.as_str(), "AG" | "AF" | "EF" | "EG") => {
            Some(h.clone())
        }
        _ => None,
    };
    let spec = if let Some(h) = head {
        p.pos += 1;
        let f = p.paren()?;
        let f = lattice(f, &p)?;
        match h.as_str() {
            "AG" => TctlSpec::AG(f),
            "AF" => TctlSpec::AF(f),
            "EF" => TctlSpec::EF(f),
            _ => TctlSpec::EG(f),
        }
    } else {
        let a = p.formula()?;
        p.expect(Tok::LeadsTo, "`-->` or one of AG/AF/EF/EG")?;
        let b = p.formula()?;
        TctlSpec::LeadsTo(lattice(a, &p)?, lattice(b, &p)?)
    };
    if !p.at_end() {
        return Err(p.err("trailing input"));
    }
    Ok(spec)
}

fn lattice(f: Formula, p: &Parser) -> Result<Formula, LogicError> {
    if f.is_prop_lattice() {
        Ok(f)
    } else {
        Err(p.err("TCTL operands must be built from propositions, `!`, `&&`, `||`, `true`, `false`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn safety_equation_parses() {
        let m = parse_mes("X1 =nu !broke && forall(boxall(X1))").unwrap();
        assert_eq!(m.equations.len(), 1);
        assert_eq!(
            m.equations[0].rhs,
            Formula::and(Formula::neg_prop("broke"), Formula::forall(Formula::box_all(Formula::var("X1"))))
        );
    }

    #[test]
    fn mu_self_loop_parses() {
        let m = parse_mes("X =mu X").unwrap();
        assert_eq!(m.equations[0].parity, Parity::Mu);
        assert_eq!(m.equations[0].rhs, Formula::var("X"));
    }

    #[test]
    fn alternation_is_reported_with_cycle() {
        let err = parse_mes("X =nu Y; Y =mu X").unwrap_err();
        match err {
            LogicError::Alternation { cycle } => assert_eq!(cycle, "X -> Y -> X"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn markers_are_recognised() {
        let m = parse_mes("Y =mu p || (forall(boxall(Y)) && exists(freeze z (forall(z < 1))))").unwrap();
        let mut found = false;
        m.equations[0].rhs.visit(&mut |g| found |= *g == Formula::MustAct);
        assert!(found);
        let f = parse_formula("forall(freeze w (exists(w >= 1)))").unwrap();
        assert_eq!(f, Formula::CanDiverge);
    }

    #[test]
    fn all_operators_round_trip() {
        let text = "X =nu (a || !b) && forallrel(x < 2; existsrel(true; y >= 1)) && box go (dia stop (X)) && freeze z (diaall(z <= 3 || Y)); Y =nu false || boxall(exists(Y))";
        let m = parse_mes(text).unwrap();
        let again = parse_mes(&m.to_string()).unwrap();
        assert_eq!(m, again);
        let markers = parse_mes("Y =nu p && (exists(diaall(Y)) || forall(freeze z (exists(z >= 1))))").unwrap();
        assert_eq!(parse_mes(&markers.to_string()).unwrap(), markers);
    }

    #[test]
    fn associativity_is_preserved_by_printing() {
        let f = Formula::and(Formula::prop("a"), Formula::and(Formula::prop("b"), Formula::prop("c")));
        assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        let g = Formula::or(Formula::and(Formula::prop("a"), Formula::prop("b")), Formula::prop("c"));
        assert_eq!(f.to_string(), "a && (b && c)");
        assert_eq!(parse_formula(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_mes("X =nu !(a && b)"), Err(LogicError::Syntax { .. })));
        assert!(matches!(parse_mes("X =nu x < 1.5"), Err(LogicError::Syntax { .. })));
        assert!(matches!(parse_mes("X =nu !X"), Err(LogicError::NegatedVariable(_))));
        assert!(parse_mes("X =nu a; X =mu b").is_err());
        assert!(parse_mes("X = a").is_err());
    }

    #[test]
    fn tctl_forms() {
        assert!(matches!(parse_tctl("AG(!broke)").unwrap(), TctlSpec::AG(_)));
        assert!(matches!(parse_tctl("AF(!far)").unwrap(), TctlSpec::AF(_)));
        assert!(matches!(parse_tctl("near --> in").unwrap(), TctlSpec::LeadsTo(..)));
        assert!(parse_tctl("AG(forall(p))").is_err());
    }
}
