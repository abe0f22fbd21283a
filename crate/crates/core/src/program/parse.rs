//! Parser for the ground program text format.
//!
//! ```text
//! program := (stmt)*
//! stmt    := rule "." | "#var" NAME INT ".." INT "."
//! rule    := head (":-" body)? | ":-" body | "{" NAME "}"
//! head    := NAME | "#false"
//! body    := lit ("," lit)*
//! lit     := ("not" ("not")?)? atom
//! atom    := NAME | cexpr
//! cexpr   := linexp REL linexp          REL ∈ {#<, #<=, #>, #>=, #=, #!=}
//! linexp  := ["-"] term (("+"|"-") term)*
//! term    := INT | INT "*" NAME | NAME
//! ```
//!
//! `%` starts a line comment. `{a}` desugars to `a :- not not a.` during
//! parsing. Constraint expressions are normalized on construction and
//! interned by their canonical text, so each distinct relation is one
//! constraint atom. A leading `-` for the first term and negative integers
//! in `#var` bounds are accepted so that canonical output round-trips.

use crate::program::{AtomId, AtomKind, Head, Program, Rule, VarId};
use crate::theory::{ConstraintExpr, Rel};

/// Parse failure with 1-based source position.
#[derive(Debug, Clone, thiserror::Error)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Int(i64),
    Dot,
    DotDot,
    Comma,
    ColonDash,
    LBrace,
    RBrace,
    Plus,
    Minus,
    Star,
    HashVar,
    HashFalse,
    Rel(Rel),
    Not,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("name `{n}`"),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::Dot => "`.`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Comma => "`,`".into(),
            Tok::ColonDash => "`:-`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::HashVar => "`#var`".into(),
            Tok::HashFalse => "`#false`".into(),
            Tok::Rel(r) => format!("`{}`", r.token()),
            Tok::Not => "`not`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

type Spanned = (Tok, u32, u32);

/// Body literals split by polarity: (positive, negated, doubly negated).
type BodyAtoms = (Vec<AtomId>, Vec<AtomId>, Vec<AtomId>);

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError { line: self.line, col: self.col, msg: msg.into() }
    }

    fn bump(&mut self) -> u8 {
        let b = self.src[self.pos];
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(b) = self.peek() {
                if b == b'%' {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                } else if b.is_ascii_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(b) = self.peek() else {
                out.push((Tok::Eof, line, col));
                return Ok(out);
            };
            let tok = match b {
                b'.' => {
                    self.bump();
                    if self.peek() == Some(b'.') {
                        self.bump();
                        Tok::DotDot
                    } else {
                        Tok::Dot
                    }
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b'{' => {
                    self.bump();
                    Tok::LBrace
                }
                b'}' => {
                    self.bump();
                    Tok::RBrace
                }
                b'+' => {
                    self.bump();
                    Tok::Plus
                }
                b'-' => {
                    self.bump();
                    Tok::Minus
                }
                b'*' => {
                    self.bump();
                    Tok::Star
                }
                b':' => {
                    self.bump();
                    if self.peek() == Some(b'-') {
                        self.bump();
                        Tok::ColonDash
                    } else {
                        return Err(self.err("expected `-` after `:`"));
                    }
                }
                b'#' => {
                    self.bump();
                    match self.peek() {
                        Some(b'<') => {
                            self.bump();
                            if self.peek() == Some(b'=') {
                                self.bump();
                                Tok::Rel(Rel::Le)
                            } else {
                                Tok::Rel(Rel::Lt)
                            }
                        }
                        Some(b'>') => {
                            self.bump();
                            if self.peek() == Some(b'=') {
                                self.bump();
                                Tok::Rel(Rel::Ge)
                            } else {
                                Tok::Rel(Rel::Gt)
                            }
                        }
                        Some(b'=') => {
                            self.bump();
                            Tok::Rel(Rel::Eq)
                        }
                        Some(b'!') => {
                            self.bump();
                            if self.peek() == Some(b'=') {
                                self.bump();
                                Tok::Rel(Rel::Ne)
                            } else {
                                return Err(self.err("expected `=` after `#!`"));
                            }
                        }
                        _ => {
                            let word = self.take_word();
                            match word.as_str() {
                                "var" => Tok::HashVar,
                                "false" => Tok::HashFalse,
                                other => {
                                    return Err(self.err(format!("unknown directive `#{other}`")))
                                }
                            }
                        }
                    }
                }
                b'0'..=b'9' => {
                    let mut n: i64 = 0;
                    while let Some(c) = self.peek() {
                        if c.is_ascii_digit() {
                            self.bump();
                            n = n
                                .checked_mul(10)
                                .and_then(|n| n.checked_add((c - b'0') as i64))
                                .ok_or_else(|| self.err("integer literal overflows i64"))?;
                        } else {
                            break;
                        }
                    }
                    Tok::Int(n)
                }
                b if b.is_ascii_alphabetic() || b == b'_' => {
                    let word = self.take_word();
                    if word == "not" {
                        Tok::Not
                    } else {
                        Tok::Name(word)
                    }
                }
                other => {
                    return Err(self.err(format!("unexpected character `{}`", other as char)))
                }
            };
            out.push((tok, line, col));
        }
    }

    fn take_word(&mut self) -> String {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.bump();
            } else {
                break;
            }
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    program: Program,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn err_here(&self, msg: impl Into<String>) -> ParseError {
        let (_, line, col) = self.toks[self.at];
        ParseError { line, col, msg: msg.into() }
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok) -> Result<(), ParseError> {
        if self.peek() == want {
            self.advance();
            Ok(())
        } else {
            Err(self.err_here(format!(
                "expected {}, found {}",
                want.describe(),
                self.peek().describe()
            )))
        }
    }

    fn expect_name(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Name(n) => {
                self.advance();
                Ok(n)
            }
            other => Err(self.err_here(format!("expected name, found {}", other.describe()))),
        }
    }

    /// INT with optional leading minus (used in `#var` bounds).
    fn expect_int(&mut self) -> Result<i64, ParseError> {
        let neg = if *self.peek() == Tok::Minus {
            self.advance();
            true
        } else {
            false
        };
        match *self.peek() {
            Tok::Int(n) => {
                self.advance();
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.err_here(format!("expected integer, found {}", self.peek().describe()))),
        }
    }

    fn parse_program(mut self) -> Result<Program, ParseError> {
        while *self.peek() != Tok::Eof {
            self.statement()?;
        }
        for (atom, expr) in &self.program.gamma {
            let bound = expr.magnitude_bound(&self.program.decls);
            if bound > i64::MAX as i128 / 4 {
                return Err(ParseError {
                    line: 0,
                    col: 0,
                    msg: format!(
                        "constraint `{}` can overflow 64-bit evaluation",
                        self.program.atom_name(*atom)
                    ),
                });
            }
        }
        self.program
            .validate()
            .map_err(|msg| ParseError { line: 0, col: 0, msg })?;
        Ok(self.program)
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        match self.peek().clone() {
            Tok::HashVar => {
                self.advance();
                let err_pos = self.at;
                let name = self.expect_name()?;
                let lo = self.expect_int()?;
                self.expect(&Tok::DotDot)?;
                let hi = self.expect_int()?;
                self.expect(&Tok::Dot)?;
                if lo > hi {
                    let (_, line, col) = self.toks[err_pos];
                    return Err(ParseError {
                        line,
                        col,
                        msg: format!("variable `{name}` declared with empty domain {lo}..{hi}"),
                    });
                }
                if self.program.declare_var(&name, lo, hi).is_none() {
                    let (_, line, col) = self.toks[err_pos];
                    return Err(ParseError {
                        line,
                        col,
                        msg: format!("duplicate declaration of variable `{name}`"),
                    });
                }
                Ok(())
            }
            Tok::LBrace => {
                self.advance();
                let name = self.expect_name()?;
                if self.program.var_id(&name).is_some() {
                    return Err(self.err_here(format!(
                        "constraint variable `{name}` used as a choice atom"
                    )));
                }
                self.expect(&Tok::RBrace)?;
                self.expect(&Tok::Dot)?;
                let a = self.program.intern_atom(&name);
                self.program.rules.push(Rule::choice(a));
                Ok(())
            }
            Tok::ColonDash => {
                self.advance();
                let (pos, neg, negneg) = self.body()?;
                self.expect(&Tok::Dot)?;
                self.push_rule(Head::Falsum, pos, neg, negneg)
            }
            _ => {
                let head = self.head()?;
                let (pos, neg, negneg) = if *self.peek() == Tok::ColonDash {
                    self.advance();
                    self.body()?
                } else {
                    (vec![], vec![], vec![])
                };
                self.expect(&Tok::Dot)?;
                self.push_rule(head, pos, neg, negneg)
            }
        }
    }

    fn push_rule(
        &mut self,
        head: Head,
        pos: Vec<AtomId>,
        neg: Vec<AtomId>,
        negneg: Vec<AtomId>,
    ) -> Result<(), ParseError> {
        // Occurrence lists must be pairwise disjoint: a body may not use
        // one atom under two polarities.
        for (i, list) in [&pos, &neg, &negneg].into_iter().enumerate() {
            for other in [&pos, &neg, &negneg].into_iter().skip(i + 1) {
                if list.iter().any(|a| other.contains(a)) {
                    return Err(self.err_here(
                        "atom occurs with more than one polarity in one body".to_string(),
                    ));
                }
            }
        }
        self.program.rules.push(Rule { head, pos, neg, negneg });
        Ok(())
    }

    fn head(&mut self) -> Result<Head, ParseError> {
        match self.peek().clone() {
            Tok::HashFalse => {
                self.advance();
                Ok(Head::Falsum)
            }
            Tok::Int(_) | Tok::Minus => {
                Err(self.err_here("constraint atom in head position".to_string()))
            }
            Tok::Name(name) => {
                if matches!(
                    self.peek2(),
                    Tok::Rel(_) | Tok::Plus | Tok::Minus | Tok::Star
                ) || self.program.var_id(&name).is_some()
                {
                    return Err(self.err_here("constraint atom in head position".to_string()));
                }
                self.advance();
                let a = self.program.intern_atom(&name);
                if self.program.atom_kind(a) != AtomKind::Regular {
                    return Err(self.err_here("constraint atom in head position".to_string()));
                }
                Ok(Head::Atom(a))
            }
            other => Err(self.err_here(format!("expected rule head, found {}", other.describe()))),
        }
    }

    fn body(&mut self) -> Result<BodyAtoms, ParseError> {
        let mut pos = vec![];
        let mut neg = vec![];
        let mut negneg = vec![];
        loop {
            let mut nots = 0;
            while *self.peek() == Tok::Not {
                self.advance();
                nots += 1;
                if nots > 2 {
                    return Err(self.err_here("at most two `not` allowed".to_string()));
                }
            }
            let atom = self.atom()?;
            let list = match nots {
                0 => &mut pos,
                1 => &mut neg,
                _ => &mut negneg,
            };
            if !list.contains(&atom) {
                list.push(atom);
            }
            if *self.peek() == Tok::Comma {
                self.advance();
            } else {
                return Ok((pos, neg, negneg));
            }
        }
    }

    /// A body atom: a bare name is a regular atom unless it opens a linear
    /// expression (or names a declared variable), in which case the whole
    /// thing is a constraint expression.
    fn atom(&mut self) -> Result<AtomId, ParseError> {
        match self.peek().clone() {
            Tok::Name(name) => {
                let opens_expr = matches!(
                    self.peek2(),
                    Tok::Rel(_) | Tok::Plus | Tok::Minus | Tok::Star
                );
                if !opens_expr {
                    if self.program.var_id(&name).is_some() {
                        return Err(self.err_here(format!(
                            "constraint variable `{name}` used as an atom"
                        )));
                    }
                    self.advance();
                    let a = self.program.intern_atom(&name);
                    if self.program.atom_kind(a) != AtomKind::Regular {
                        // A constraint atom's canonical text can never be a
                        // plain name, so this cannot happen; defend anyway.
                        return Err(self.err_here("name collides with constraint atom"));
                    }
                    return Ok(a);
                }
                self.cexpr()
            }
            Tok::Int(_) | Tok::Minus => self.cexpr(),
            other => Err(self.err_here(format!("expected atom, found {}", other.describe()))),
        }
    }

    fn cexpr(&mut self) -> Result<AtomId, ParseError> {
        let lhs = self.linexp()?;
        let rel = match *self.peek() {
            Tok::Rel(r) => {
                self.advance();
                r
            }
            _ => {
                return Err(self.err_here(format!(
                    "expected relational operator, found {}",
                    self.peek().describe()
                )))
            }
        };
        let rhs = self.linexp()?;
        let expr = ConstraintExpr::new(lhs, rel, rhs);
        let bound = expr.magnitude_bound(&self.program.decls);
        if bound > i64::MAX as i128 / 4 {
            return Err(self.err_here("constraint can overflow 64-bit evaluation".to_string()));
        }
        Ok(self.program.intern_constraint_atom(expr))
    }

    fn linexp(&mut self) -> Result<Vec<(i64, Option<VarId>)>, ParseError> {
        let mut terms = vec![];
        let mut sign: i64 = 1;
        if *self.peek() == Tok::Minus {
            self.advance();
            sign = -1;
        }
        loop {
            terms.push(self.term(sign)?);
            match *self.peek() {
                Tok::Plus => {
                    self.advance();
                    sign = 1;
                }
                Tok::Minus => {
                    self.advance();
                    sign = -1;
                }
                _ => return Ok(terms),
            }
        }
    }

    fn term(&mut self, sign: i64) -> Result<(i64, Option<VarId>), ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                if *self.peek() == Tok::Star {
                    self.advance();
                    let v = self.var_ref()?;
                    Ok((sign * n, Some(v)))
                } else {
                    Ok((sign * n, None))
                }
            }
            Tok::Name(_) => {
                let v = self.var_ref()?;
                Ok((sign, Some(v)))
            }
            other => Err(self.err_here(format!(
                "expected integer or variable, found {}",
                other.describe()
            ))),
        }
    }

    fn var_ref(&mut self) -> Result<VarId, ParseError> {
        let name = self.expect_name()?;
        self.program.var_id(&name).ok_or_else(|| ParseError {
            line: self.toks[self.at - 1].1,
            col: self.toks[self.at - 1].2,
            msg: format!("undeclared constraint variable `{name}`"),
        })
    }
}

/// Parse a program from text. Fails with position information on syntax
/// errors, undeclared variables, duplicate declarations, empty domains,
/// constraint atoms in head position, and body polarity clashes.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let toks = Lexer::new(src).tokens()?;
    let parser = Parser { toks, at: 0, program: Program::new() };
    parser.parse_program()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::AtomKind;

    const LIGHT_SWITCH: &str = "\
% one light, one switch, morning detection on the hour
#var x 0..24.
am :- x #< 12.
lighton :- switch, not am.
{switch}.
:- not lighton.
";

    #[test]
    fn light_switch_shape() {
        let p = parse_program(LIGHT_SWITCH).unwrap();
        assert_eq!(p.rules.len(), 4);
        assert_eq!(p.decls.len(), 1);
        assert_eq!(p.constraint_atoms().count(), 1);
        let c = p.constraint_atoms().next().unwrap();
        assert_eq!(p.atom_name(c), "x #< 12");
        assert_eq!(p.atom_kind(c), AtomKind::Constraint);
        // {switch} desugars to switch :- not not switch.
        let choice = p
            .rules
            .iter()
            .find(|r| r.head == Head::Atom(p.atom_id("switch").unwrap()))
            .unwrap();
        assert_eq!(choice.negneg, vec![p.atom_id("switch").unwrap()]);
        assert!(choice.pos.is_empty() && choice.neg.is_empty());
    }

    #[test]
    fn empty_input_is_empty_program() {
        let p = parse_program("").unwrap();
        assert_eq!(p.rules.len(), 0);
        assert_eq!(p.n_atoms(), 0);
        let p = parse_program("  % only a comment\n").unwrap();
        assert_eq!(p.rules.len(), 0);
    }

    #[test]
    fn same_expression_interns_once() {
        let p = parse_program("#var x 0..9.\na :- x #< 3.\nb :- x #< 3, not a.\n").unwrap();
        assert_eq!(p.constraint_atoms().count(), 1);
    }

    #[test]
    fn undeclared_variable_is_an_error() {
        let e = parse_program("a :- y #< 3.").unwrap_err();
        assert!(e.msg.contains("undeclared"), "{e}");
        assert_eq!(e.line, 1);
    }

    #[test]
    fn constraint_atom_in_head_is_an_error() {
        let e = parse_program("#var x 0..9.\nx #< 3 :- a.").unwrap_err();
        assert!(e.msg.contains("head position"), "{e}");
        assert_eq!(e.line, 2);
    }

    #[test]
    fn duplicate_declaration_is_an_error() {
        let e = parse_program("#var x 0..9.\n#var x 1..2.").unwrap_err();
        assert!(e.msg.contains("duplicate"), "{e}");
    }

    #[test]
    fn empty_domain_is_an_error() {
        let e = parse_program("#var x 4..2.").unwrap_err();
        assert!(e.msg.contains("empty domain"), "{e}");
    }

    #[test]
    fn polarity_clash_is_an_error() {
        let e = parse_program("a :- b, not b.").unwrap_err();
        assert!(e.msg.contains("polarity"), "{e}");
    }

    #[test]
    fn syntax_error_positions() {
        let e = parse_program("a :- .").unwrap_err();
        assert_eq!((e.line, e.col), (1, 6));
        let e = parse_program("a\n:- b c.").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn negative_bounds_and_leading_minus_round_trip() {
        let src = "#var x -5..5.\na :- -x + 3 #>= -2.\n";
        let p = parse_program(src).unwrap();
        let printed = p.to_text();
        let p2 = parse_program(&printed).unwrap();
        assert_eq!(p, p2);
    }

    #[test]
    fn round_trip_light_switch() {
        let p = parse_program(LIGHT_SWITCH).unwrap();
        let p2 = parse_program(&p.to_text()).unwrap();
        assert_eq!(p, p2);
    }

    #[test]
    fn multi_term_expressions_parse() {
        let p = parse_program(
            "#var a 0..10.\n#var b 0..10.\n:- not a + b #= 10.\n:- not a - b #= 4.\n",
        )
        .unwrap();
        assert_eq!(p.constraint_atoms().count(), 2);
        let names: Vec<&str> =
            p.constraint_atoms().map(|c| p.atom_name(c)).collect();
        assert!(names.contains(&"a + b #= 10"));
        assert!(names.contains(&"a - b #= 4"));
    }

    #[test]
    fn variable_as_bare_atom_is_an_error() {
        let e = parse_program("#var x 0..9.\na :- x.").unwrap_err();
        assert!(e.msg.contains("used as an atom"), "{e}");
    }
}
