//! BoolNet `.bnet` text format.
//!
//! ```text
//! targets, factors
//! x1, x1
//! x2, x1 | x3
//! x3, x2 & x3
//! ```
//!
//! Operators `&`, `|`, `!`, parentheses, constants `0`/`1`; identifiers
//! `[A-Za-z_][A-Za-z0-9_]*`; `#` starts a comment. Variables used in factors
//! but never declared as targets become input nodes (identity predictor)
//! appended after the declared nodes in first-appearance order.

use super::expr::BoolExpr;
use super::network::{BooleanNetwork, ModelError};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: missing 'targets, factors' header")]
    MissingHeader { line: u32 },
    #[error("line {line}, column {col}: unexpected character '{ch}'")]
    BadChar { line: u32, col: u32, ch: char },
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("line {line}: duplicate rule for '{name}'")]
    DuplicateTarget { line: u32, name: String },
    #[error("line {line}: empty factor for '{name}'")]
    EmptyFactor { line: u32, name: String },
    #[error("model is empty: no rules after the header")]
    NoRules,
    #[error("invalid model: {0}")]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Comma,
    Amp,
    Pipe,
    Bang,
    LParen,
    RParen,
    Lit(bool),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex_line(text: &str, line: u32) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, ch)) = chars.peek() {
        let col = pos as u32 + 1;
        match ch {
            '#' => break,
            c if c.is_whitespace() => {
                chars.next();
            }
            ',' | '&' | '|' | '!' | '(' | ')' => {
                chars.next();
                let tok = match ch {
                    ',' => Tok::Comma,
                    '&' => Tok::Amp,
                    '|' => Tok::Pipe,
                    '!' => Tok::Bang,
                    '(' => Tok::LParen,
                    _ => Tok::RParen,
                };
                out.push(Spanned { tok, line, col });
            }
            '0' | '1' => {
                chars.next();
                if let Some(&(_, c2)) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' {
                        return Err(ParseError::Syntax {
                            line,
                            col,
                            msg: format!("identifiers may not start with '{ch}'"),
                        });
                    }
                }
                out.push(Spanned {
                    tok: Tok::Lit(ch == '1'),
                    line,
                    col,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = pos;
                let mut end = pos + c.len_utf8();
                chars.next();
                while let Some(&(p, c2)) = chars.peek() {
                    if c2.is_ascii_alphanumeric() || c2 == '_' {
                        end = p + c2.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Spanned {
                    tok: Tok::Ident(text[start..end].to_string()),
                    line,
                    col,
                });
            }
            c => return Err(ParseError::BadChar { line, col, ch: c }),
        }
    }
    Ok(out)
}

/// Expression over names; resolved to indices once all rules are known.
enum NamedExpr {
    Const(bool),
    Var(String),
    Not(Box<NamedExpr>),
    And(Box<NamedExpr>, Box<NamedExpr>),
    Or(Box<NamedExpr>, Box<NamedExpr>),
}

struct ExprParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: u32,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (u32, u32) {
        match self.toks.get(self.pos) {
            Some(s) => (s.line, s.col),
            None => (
                self.line,
                self.toks.last().map(|s| s.col + 1).unwrap_or(1),
            ),
        }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn or_expr(&mut self) -> Result<NamedExpr, ParseError> {
        let mut e = self.and_expr()?;
        while matches!(self.peek(), Some(Tok::Pipe)) {
            self.pos += 1;
            let rhs = self.and_expr()?;
            e = NamedExpr::Or(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<NamedExpr, ParseError> {
        let mut e = self.unary()?;
        while matches!(self.peek(), Some(Tok::Amp)) {
            self.pos += 1;
            let rhs = self.unary()?;
            e = NamedExpr::And(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<NamedExpr, ParseError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(NamedExpr::Not(Box::new(self.unary()?)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.or_expr()?;
                if !matches!(self.peek(), Some(Tok::RParen)) {
                    return Err(self.err("unbalanced parentheses: expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(Tok::Lit(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(NamedExpr::Const(v))
            }
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(NamedExpr::Var(name))
            }
            Some(Tok::RParen) => Err(self.err("unbalanced parentheses: unexpected ')'")),
            Some(Tok::Comma) => Err(self.err("unexpected ','")),
            Some(Tok::Amp) | Some(Tok::Pipe) => Err(self.err("operator missing an operand")),
            None => Err(self.err("factor ends unexpectedly")),
        }
    }
}

fn resolve(e: &NamedExpr, idx: &HashMap<String, usize>) -> BoolExpr {
    match e {
        NamedExpr::Const(v) => BoolExpr::Const(*v),
        NamedExpr::Var(name) => BoolExpr::Var(idx[name]),
        NamedExpr::Not(a) => BoolExpr::not(resolve(a, idx)),
        NamedExpr::And(a, b) => BoolExpr::and(resolve(a, idx), resolve(b, idx)),
        NamedExpr::Or(a, b) => BoolExpr::or(resolve(a, idx), resolve(b, idx)),
    }
}

fn collect_names(e: &NamedExpr, out: &mut Vec<String>) {
    match e {
        NamedExpr::Const(_) => {}
        NamedExpr::Var(name) => out.push(name.clone()),
        NamedExpr::Not(a) => collect_names(a, out),
        NamedExpr::And(a, b) | NamedExpr::Or(a, b) => {
            collect_names(a, out);
            collect_names(b, out);
        }
    }
}

/// Parse `.bnet` text into a [`BooleanNetwork`].
pub fn parse_bnet(text: &str) -> Result<BooleanNetwork, ParseError> {
    let mut header_seen = false;
    let mut rules: Vec<(String, NamedExpr, u32)> = Vec::new();
    let mut last_line = 0u32;

    for (lineno0, raw) in text.lines().enumerate() {
        let line = lineno0 as u32 + 1;
        last_line = line;
        let toks = lex_line(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        if !header_seen {
            let ok = toks.len() == 3
                && matches!(&toks[0].tok, Tok::Ident(s) if s == "targets")
                && toks[1].tok == Tok::Comma
                && matches!(&toks[2].tok, Tok::Ident(s) if s == "factors");
            if !ok {
                return Err(ParseError::MissingHeader { line });
            }
            header_seen = true;
            continue;
        }
        let name = match &toks[0].tok {
            Tok::Ident(s) => s.clone(),
            _ => {
                return Err(ParseError::Syntax {
                    line,
                    col: toks[0].col,
                    msg: "rule must start with a node name".into(),
                })
            }
        };
        if toks.len() < 2 || toks[1].tok != Tok::Comma {
            return Err(ParseError::Syntax {
                line,
                col: toks.get(1).map(|s| s.col).unwrap_or(toks[0].col + 1),
                msg: "expected ',' after the target name".into(),
            });
        }
        if rules.iter().any(|(n, _, _)| *n == name) {
            return Err(ParseError::DuplicateTarget { line, name });
        }
        let body = &toks[2..];
        if body.is_empty() {
            return Err(ParseError::EmptyFactor { line, name });
        }
        let mut p = ExprParser {
            toks: body,
            pos: 0,
            line,
        };
        let expr = p.or_expr()?;
        if p.pos != body.len() {
            return Err(p.err("trailing tokens after the factor"));
        }
        rules.push((name, expr, line));
    }

    if !header_seen {
        return Err(ParseError::MissingHeader {
            line: last_line.max(1),
        });
    }
    if rules.is_empty() {
        return Err(ParseError::NoRules);
    }

    // Declared targets first, then undeclared variables in first-appearance
    // order as identity-predictor inputs.
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    for (name, _, _) in &rules {
        index.insert(name.clone(), names.len());
        names.push(name.clone());
    }
    for (_, expr, _) in &rules {
        let mut used = Vec::new();
        collect_names(expr, &mut used);
        for u in used {
            if !index.contains_key(&u) {
                index.insert(u.clone(), names.len());
                names.push(u);
            }
        }
    }

    let mut predictors: Vec<BoolExpr> = Vec::with_capacity(names.len());
    for (_, expr, _) in &rules {
        predictors.push(resolve(expr, &index));
    }
    for i in rules.len()..names.len() {
        predictors.push(BoolExpr::Var(i));
    }

    Ok(BooleanNetwork::from_parts(names, predictors)?)
}
