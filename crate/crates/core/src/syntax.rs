//! Textual syntax for terms and rewrite systems.
//!
//! ```text
//! term ::= IDENT
//!        | IDENT '(' term {',' term} ')'
//!        | 'rec' NAME '.' term
//! ```
//!
//! Identifiers match `[A-Za-z_][A-Za-z0-9_']*`. A binder NAME may also have
//! the printer's shape `%0, %1, ...`; such names are valid only as binders
//! and back references, so every printed term parses back. `#` starts a line
//! comment, whitespace is insignificant.
//!
//! A rewrite system file is an optional header `vars x y ... ;` followed by
//! rules `lhs -> rhs ;`.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::term::{canonicalize, ArityConflict, CanonicalTerm, NodeId, Signature, TermGraph};
use crate::trs::{Rule, Trs, TrsError};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    RecName(String),
    Rec,
    LParen,
    RParen,
    Comma,
    Dot,
    Arrow,
    Semi,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => alloc::format!("identifier '{s}'"),
            Tok::RecName(s) => alloc::format!("name '{s}'"),
            Tok::Rec => "'rec'".to_string(),
            Tok::LParen => "'('".to_string(),
            Tok::RParen => "')'".to_string(),
            Tok::Comma => "','".to_string(),
            Tok::Dot => "'.'".to_string(),
            Tok::Arrow => "'->'".to_string(),
            Tok::Semi => "';'".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
struct Sp {
    tok: Tok,
    line: usize,
    col: usize,
}

/// How bare and applied identifiers are checked against a signature.
pub enum SymbolPolicy<'a> {
    /// Symbols must already be declared with the arity they are used at;
    /// bare identifiers outside `vars` and the signature are rejected.
    Strict(&'a Signature),
    /// Unknown symbols are declared at first use; arities must stay
    /// consistent with the signature and among each other.
    Extend(&'a mut Signature),
}

/// Errors raised while reading terms or rewrite systems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseError {
    Lex {
        line: usize,
        col: usize,
        found: char,
    },
    Unexpected {
        line: usize,
        col: usize,
        expected: String,
        found: String,
    },
    UnexpectedEnd {
        expected: String,
    },
    Arity {
        line: usize,
        col: usize,
        conflict: ArityConflict,
    },
    UnknownSymbol {
        line: usize,
        col: usize,
        name: String,
    },
    UnboundRecName {
        line: usize,
        col: usize,
        name: String,
    },
    AppliedVariable {
        line: usize,
        col: usize,
        name: String,
    },
    UnguardedRec {
        line: usize,
        col: usize,
        name: String,
    },
    TrailingInput {
        line: usize,
        col: usize,
    },
    Rule(TrsError),
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Lex { line, col, found } => {
                write!(f, "line {line}, column {col}: unexpected character '{found}'")
            }
            ParseError::Unexpected {
                line,
                col,
                expected,
                found,
            } => write!(f, "line {line}, column {col}: expected {expected}, found {found}"),
            ParseError::UnexpectedEnd { expected } => {
                write!(f, "unexpected end of input, expected {expected}")
            }
            ParseError::Arity { line, col, conflict } => {
                write!(f, "line {line}, column {col}: {conflict}")
            }
            ParseError::UnknownSymbol { line, col, name } => {
                write!(f, "line {line}, column {col}: unknown symbol '{name}'")
            }
            ParseError::UnboundRecName { line, col, name } => {
                write!(f, "line {line}, column {col}: unbound rec name '{name}'")
            }
            ParseError::AppliedVariable { line, col, name } => write!(
                f,
                "line {line}, column {col}: '{name}' is not a function symbol and cannot take arguments"
            ),
            ParseError::UnguardedRec { line, col, name } => {
                write!(f, "line {line}, column {col}: unguarded rec binder '{name}'")
            }
            ParseError::TrailingInput { line, col } => {
                write!(f, "line {line}, column {col}: unexpected input after the term")
            }
            ParseError::Rule(e) => e.fmt(f),
        }
    }
}

impl From<TrsError> for ParseError {
    fn from(e: TrsError) -> Self {
        ParseError::Rule(e)
    }
}

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

struct Scan {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Scan {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> char {
        let c = self.chars[self.pos];
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }
}

fn lex(input: &str, start_line: usize) -> Result<Vec<Sp>, ParseError> {
    let mut s = Scan {
        chars: input.chars().collect(),
        pos: 0,
        line: start_line,
        col: 1,
    };
    let mut toks = Vec::new();
    while let Some(c) = s.peek() {
        let (tl, tc) = (s.line, s.col);
        if c.is_whitespace() {
            s.bump();
            continue;
        }
        if c == '#' {
            while s.peek().is_some() {
                if s.bump() == '\n' {
                    break;
                }
            }
            continue;
        }
        let tok = match c {
            '(' => {
                s.bump();
                Tok::LParen
            }
            ')' => {
                s.bump();
                Tok::RParen
            }
            ',' => {
                s.bump();
                Tok::Comma
            }
            '.' => {
                s.bump();
                Tok::Dot
            }
            ';' => {
                s.bump();
                Tok::Semi
            }
            '-' => {
                s.bump();
                if s.peek() == Some('>') {
                    s.bump();
                    Tok::Arrow
                } else {
                    return Err(ParseError::Lex {
                        line: tl,
                        col: tc,
                        found: '-',
                    });
                }
            }
            '%' => {
                s.bump();
                let mut name = String::from("%");
                while let Some(c) = s.peek() {
                    if ident_continue(c) {
                        name.push(s.bump());
                    } else {
                        break;
                    }
                }
                if name.len() == 1 {
                    return Err(ParseError::Lex {
                        line: tl,
                        col: tc,
                        found: '%',
                    });
                }
                Tok::RecName(name)
            }
            c if ident_start(c) => {
                let mut name = String::new();
                name.push(s.bump());
                while let Some(c) = s.peek() {
                    if ident_continue(c) {
                        name.push(s.bump());
                    } else {
                        break;
                    }
                }
                if name == "rec" {
                    Tok::Rec
                } else {
                    Tok::Ident(name)
                }
            }
            c => {
                return Err(ParseError::Lex {
                    line: tl,
                    col: tc,
                    found: c,
                })
            }
        };
        toks.push(Sp {
            tok,
            line: tl,
            col: tc,
        });
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Sp>,
    pos: usize,
}

impl Parser {
    fn new(input: &str, start_line: usize) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(input, start_line)?,
            pos: 0,
        })
    }

    fn peek(&self) -> Option<&Sp> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Sp> {
        let sp = self.toks.get(self.pos).cloned();
        if sp.is_some() {
            self.pos += 1;
        }
        sp
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        match self.bump() {
            Some(sp) if sp.tok == *want => Ok(()),
            Some(sp) => Err(ParseError::Unexpected {
                line: sp.line,
                col: sp.col,
                expected: what.to_string(),
                found: sp.tok.describe(),
            }),
            None => Err(ParseError::UnexpectedEnd {
                expected: what.to_string(),
            }),
        }
    }
}

fn resolve(
    policy: &mut SymbolPolicy<'_>,
    name: &str,
    arity: usize,
    line: usize,
    col: usize,
) -> Result<(), ParseError> {
    match policy {
        SymbolPolicy::Strict(sig) => match sig.arity(name) {
            Some(a) if a == arity => Ok(()),
            Some(a) => Err(ParseError::Arity {
                line,
                col,
                conflict: ArityConflict {
                    symbol: name.to_string(),
                    existing: a,
                    proposed: arity,
                },
            }),
            None => Err(ParseError::UnknownSymbol {
                line,
                col,
                name: name.to_string(),
            }),
        },
        SymbolPolicy::Extend(sig) => {
            sig.declare(name, arity)
                .map_err(|conflict| ParseError::Arity {
                    line,
                    col,
                    conflict,
                })
        }
    }
}

fn term(
    p: &mut Parser,
    vars: &BTreeSet<String>,
    policy: &mut SymbolPolicy<'_>,
    env: &mut Vec<(String, NodeId)>,
    g: &mut TermGraph,
) -> Result<NodeId, ParseError> {
    let sp = p.bump().ok_or_else(|| ParseError::UnexpectedEnd {
        expected: "a term".to_string(),
    })?;
    match sp.tok {
        Tok::Rec => {
            let name_sp = p.bump().ok_or_else(|| ParseError::UnexpectedEnd {
                expected: "a binder name".to_string(),
            })?;
            let name = match name_sp.tok {
                Tok::Ident(s) | Tok::RecName(s) => s,
                other => {
                    return Err(ParseError::Unexpected {
                        line: name_sp.line,
                        col: name_sp.col,
                        expected: "a binder name".to_string(),
                        found: other.describe(),
                    })
                }
            };
            p.expect(&Tok::Dot, "'.'")?;
            // Placeholder node for back references; redirected to the body
            // root once it is known, then left behind unreachable.
            let slot = g.add_var("%slot");
            env.push((name.clone(), slot));
            let body = term(p, vars, policy, env, g)?;
            env.pop();
            if body == slot {
                return Err(ParseError::UnguardedRec {
                    line: sp.line,
                    col: sp.col,
                    name,
                });
            }
            g.redirect(slot, body);
            Ok(body)
        }
        Tok::Ident(name) | Tok::RecName(name) => {
            let is_rec_name = name.starts_with('%');
            let applied = matches!(
                p.peek(),
                Some(Sp {
                    tok: Tok::LParen,
                    ..
                })
            );
            if applied {
                let bound = env.iter().rev().any(|(n, _)| n == &name);
                if bound || (!is_rec_name && vars.contains(&name)) {
                    return Err(ParseError::AppliedVariable {
                        line: sp.line,
                        col: sp.col,
                        name,
                    });
                }
                if is_rec_name {
                    return Err(ParseError::UnboundRecName {
                        line: sp.line,
                        col: sp.col,
                        name,
                    });
                }
                p.bump();
                let mut children = alloc::vec![term(p, vars, policy, env, g)?];
                loop {
                    match p.bump() {
                        Some(Sp {
                            tok: Tok::Comma, ..
                        }) => children.push(term(p, vars, policy, env, g)?),
                        Some(Sp {
                            tok: Tok::RParen, ..
                        }) => break,
                        Some(other) => {
                            return Err(ParseError::Unexpected {
                                line: other.line,
                                col: other.col,
                                expected: "',' or ')'".to_string(),
                                found: other.tok.describe(),
                            })
                        }
                        None => {
                            return Err(ParseError::UnexpectedEnd {
                                expected: "',' or ')'".to_string(),
                            })
                        }
                    }
                }
                resolve(policy, &name, children.len(), sp.line, sp.col)?;
                Ok(g.add_fun(&name, children))
            } else {
                if let Some((_, slot)) = env.iter().rev().find(|(n, _)| n == &name) {
                    return Ok(*slot);
                }
                if is_rec_name {
                    return Err(ParseError::UnboundRecName {
                        line: sp.line,
                        col: sp.col,
                        name,
                    });
                }
                if vars.contains(&name) {
                    return Ok(g.add_var(&name));
                }
                resolve(policy, &name, 0, sp.line, sp.col)?;
                Ok(g.add_fun(&name, Vec::new()))
            }
        }
        other => Err(ParseError::Unexpected {
            line: sp.line,
            col: sp.col,
            expected: "a term".to_string(),
            found: other.describe(),
        }),
    }
}

fn parse_single(
    p: &mut Parser,
    vars: &BTreeSet<String>,
    policy: &mut SymbolPolicy<'_>,
) -> Result<CanonicalTerm, ParseError> {
    let mut g = TermGraph::new();
    let mut env = Vec::new();
    let root = term(p, vars, policy, &mut env, &mut g)?;
    g.set_root(root);
    Ok(canonicalize(&g))
}

/// Parse a single term; the whole input must be consumed.
pub fn parse_term(
    input: &str,
    vars: &BTreeSet<String>,
    mut policy: SymbolPolicy<'_>,
) -> Result<CanonicalTerm, ParseError> {
    let mut p = Parser::new(input, 1)?;
    let t = parse_single(&mut p, vars, &mut policy)?;
    if let Some(sp) = p.peek() {
        return Err(ParseError::TrailingInput {
            line: sp.line,
            col: sp.col,
        });
    }
    Ok(t)
}

/// Parse one term per non-empty line, sharing one growing signature.
/// Blank lines and comment-only lines are skipped.
pub fn parse_term_lines(
    input: &str,
    vars: &BTreeSet<String>,
    sig: &mut Signature,
) -> Result<Vec<CanonicalTerm>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let mut p = Parser::new(line, i + 1)?;
        if p.at_end() {
            continue;
        }
        let mut policy = SymbolPolicy::Extend(sig);
        let t = parse_single(&mut p, vars, &mut policy)?;
        if let Some(sp) = p.peek() {
            return Err(ParseError::TrailingInput {
                line: sp.line,
                col: sp.col,
            });
        }
        out.push(t);
    }
    Ok(out)
}

/// Parse a rewrite system: optional `vars x y ... ;` header, then rules
/// `lhs -> rhs ;`. The signature is inferred from consistent symbol usage.
pub fn parse_trs(input: &str) -> Result<Trs, ParseError> {
    let mut p = Parser::new(input, 1)?;
    let mut vars: BTreeSet<String> = BTreeSet::new();
    if matches!(p.peek(), Some(Sp { tok: Tok::Ident(w), .. }) if w == "vars") {
        p.bump();
        loop {
            match p.bump() {
                Some(Sp {
                    tok: Tok::Ident(name),
                    ..
                }) => {
                    vars.insert(name);
                }
                Some(Sp { tok: Tok::Semi, .. }) => break,
                Some(other) => {
                    return Err(ParseError::Unexpected {
                        line: other.line,
                        col: other.col,
                        expected: "a variable name or ';'".to_string(),
                        found: other.tok.describe(),
                    })
                }
                None => {
                    return Err(ParseError::UnexpectedEnd {
                        expected: "a variable name or ';'".to_string(),
                    })
                }
            }
        }
    }
    let mut sig = Signature::new();
    let mut rules = Vec::new();
    while !p.at_end() {
        let mut policy = SymbolPolicy::Extend(&mut sig);
        let lhs = parse_single(&mut p, &vars, &mut policy)?;
        p.expect(&Tok::Arrow, "'->'")?;
        let rhs = parse_single(&mut p, &vars, &mut policy)?;
        p.expect(&Tok::Semi, "';'")?;
        rules.push(Rule { lhs, rhs });
    }
    Trs::new(rules, vars).map_err(ParseError::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn infer(input: &str) -> Result<CanonicalTerm, ParseError> {
        let mut sig = Signature::new();
        parse_term(input, &BTreeSet::new(), SymbolPolicy::Extend(&mut sig))
    }

    fn cyc_c() -> CanonicalTerm {
        let mut g = TermGraph::new();
        let n = g.add_fun("C", vec![0]);
        g.set_child(n, 0, n);
        g.set_root(n);
        canonicalize(&g)
    }

    #[test]
    fn frozen_examples() {
        assert_eq!(infer("rec x . C(x)").unwrap(), cyc_c());
        assert_eq!(infer("a").unwrap(), CanonicalTerm::fun("a", &[]));
        assert!(matches!(
            infer("rec x . x"),
            Err(ParseError::UnguardedRec { .. })
        ));
    }

    #[test]
    fn unrolled_rec_collapses() {
        assert_eq!(infer("rec x . C(C(x))").unwrap(), cyc_c());
    }

    #[test]
    fn printed_terms_parse_back() {
        let shared = CanonicalTerm::fun("f", &[cyc_c(), cyc_c()]);
        for t in [
            cyc_c(),
            shared,
            CanonicalTerm::fun("g", &[CanonicalTerm::fun("a", &[])]),
        ] {
            let printed = t.to_string();
            assert_eq!(infer(&printed).unwrap(), t, "round trip of {printed}");
        }
    }

    #[test]
    fn comments_and_whitespace() {
        let t = infer("  C( # comment inside\n  a )  # trailing\n").unwrap();
        assert_eq!(t, CanonicalTerm::fun("C", &[CanonicalTerm::fun("a", &[])]));
    }

    #[test]
    fn variables_need_declaring() {
        let vars: BTreeSet<String> = ["x".to_string()].into_iter().collect();
        let mut sig = Signature::new();
        let t = parse_term("f(x, x)", &vars, SymbolPolicy::Extend(&mut sig)).unwrap();
        assert_eq!(t.variables().len(), 1);
        // Without the declaration the name becomes a constant.
        let mut sig2 = Signature::new();
        let t2 = parse_term("f(x, x)", &BTreeSet::new(), SymbolPolicy::Extend(&mut sig2)).unwrap();
        assert!(t2.variables().is_empty());
    }

    #[test]
    fn binder_shadows_variable() {
        let vars: BTreeSet<String> = ["x".to_string()].into_iter().collect();
        let mut sig = Signature::new();
        let t = parse_term("rec x . C(x)", &vars, SymbolPolicy::Extend(&mut sig)).unwrap();
        assert_eq!(t, cyc_c());
    }

    #[test]
    fn strict_mode_rejects_unknowns_and_bad_arity() {
        let mut sig = Signature::new();
        sig.declare("f", 2).unwrap();
        sig.declare("a", 0).unwrap();
        let vars = BTreeSet::new();
        assert!(parse_term("f(a, a)", &vars, SymbolPolicy::Strict(&sig)).is_ok());
        assert!(matches!(
            parse_term("g(a)", &vars, SymbolPolicy::Strict(&sig)),
            Err(ParseError::UnknownSymbol { .. })
        ));
        assert!(matches!(
            parse_term("f(a)", &vars, SymbolPolicy::Strict(&sig)),
            Err(ParseError::Arity { .. })
        ));
    }

    #[test]
    fn extend_mode_keeps_arity_consistent() {
        let mut sig = Signature::new();
        let vars = BTreeSet::new();
        parse_term("f(a, a)", &vars, SymbolPolicy::Extend(&mut sig)).unwrap();
        assert!(matches!(
            parse_term("f(a)", &vars, SymbolPolicy::Extend(&mut sig)),
            Err(ParseError::Arity { .. })
        ));
    }

    #[test]
    fn rec_name_misuse_is_rejected() {
        assert!(matches!(
            infer("%0"),
            Err(ParseError::UnboundRecName { .. })
        ));
        assert!(matches!(
            infer("rec %0 . %0(a)"),
            Err(ParseError::AppliedVariable { .. })
        ));
    }

    #[test]
    fn trailing_input_is_rejected() {
        assert!(matches!(
            infer("a b"),
            Err(ParseError::TrailingInput { .. })
        ));
    }

    #[test]
    fn trs_frozen_examples() {
        let trs = parse_trs("vars x ; a -> C(a) ;").unwrap();
        assert_eq!(trs.rules().len(), 1);
        let trs = parse_trs("vars x ; f(x,x) -> D ; a -> C(a) ; b -> C(b) ;").unwrap();
        assert_eq!(trs.rules().len(), 3);
        assert_eq!(trs.signature().arity("f"), Some(2));
        assert!(matches!(
            parse_trs("vars x ; x -> a ;"),
            Err(ParseError::Rule(TrsError::LhsVariable { rule: 0 }))
        ));
    }

    #[test]
    fn trs_rejects_fresh_rhs_variable() {
        assert!(matches!(
            parse_trs("vars x y ; C(x) -> C(y) ;"),
            Err(ParseError::Rule(TrsError::FreshRhsVariable { rule: 0, .. }))
        ));
    }

    #[test]
    fn trs_rejects_inconsistent_arity_across_rules() {
        assert!(matches!(
            parse_trs("vars x ; f(x, x) -> a ; f(a) -> a ;"),
            Err(ParseError::Arity { .. })
        ));
    }

    #[test]
    fn trs_allows_cyclic_sides() {
        let trs = parse_trs("vars x ; C(a) -> rec y . C(y) ;").unwrap();
        assert_eq!(trs.rules()[0].rhs, cyc_c());
    }

    #[test]
    fn term_lines_skip_blanks_and_comments() {
        let input = "a\n# a comment\n\nC(a)\nrec x . C(x)\n";
        let mut sig = Signature::new();
        let terms = parse_term_lines(input, &BTreeSet::new(), &mut sig).unwrap();
        assert_eq!(terms.len(), 3);
        assert_eq!(terms[2], cyc_c());
        assert_eq!(sig.arity("C"), Some(1));
    }
}
