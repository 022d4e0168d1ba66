//! Recursive-descent parser for the expression language.
//!
//! Grammar, in decreasing binding strength:
//!
//! ```text
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/") unary)*
//! unary := "-" unary | power
//! power := atom ("^" integer)?
//! atom  := number | ident | func "(" expr ")" | "(" expr ")"
//! ```
//!
//! `+ - * /` are left-associative and `^` binds tighter than unary minus, so
//! `-x^2` parses as `-(x^2)`. Exponents must be integer literals (optionally
//! signed); chained exponents are rejected. Identifiers must name a chart
//! coordinate or one of the built-in functions, and every error carries the
//! byte offset it was detected at.

use super::{call, Expr, Func};
use thiserror::Error;

/// Errors raised while turning source text into an expression tree.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("lexical error at offset {offset}: {message}")]
    Lexical { offset: usize, message: String },
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("undeclared identifier `{name}` at offset {offset}")]
    UndeclaredIdentifier { offset: usize, name: String },
    #[error("exponent must be an integer literal at offset {offset}")]
    NonIntegerExponent { offset: usize },
}

impl ParseError {
    /// Byte offset into the source where the error was detected.
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Lexical { offset, .. }
            | ParseError::Syntax { offset, .. }
            | ParseError::UndeclaredIdentifier { offset, .. }
            | ParseError::NonIntegerExponent { offset } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number { value: f64, is_integer: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone, PartialEq)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let offset = i;
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' | '(' | ')' => {
                let kind = match c {
                    '+' => TokenKind::Plus,
                    '-' => TokenKind::Minus,
                    '*' => TokenKind::Star,
                    '/' => TokenKind::Slash,
                    '^' => TokenKind::Caret,
                    '(' => TokenKind::LParen,
                    _ => TokenKind::RParen,
                };
                tokens.push(Token { kind, offset });
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                let mut is_integer = true;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    is_integer = false;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        is_integer = false;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError::Lexical {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Number { value, is_integer },
                    offset: start,
                });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(src[start..i].to_string()),
                    offset: start,
                });
            }
            other => {
                return Err(ParseError::Lexical {
                    offset,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    coords: Vec<&'a str>,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next_offset(&self) -> usize {
        self.peek().map_or(self.src_len, |t| t.offset)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().map(|t| &t.kind) == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&TokenKind::Plus) {
                let rhs = self.term()?;
                lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
            } else if self.eat(&TokenKind::Minus) {
                let rhs = self.term()?;
                lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&TokenKind::Star) {
                let rhs = self.unary()?;
                lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
            } else if self.eat(&TokenKind::Slash) {
                let rhs = self.unary()?;
                lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&TokenKind::Minus) {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat(&TokenKind::Caret) {
            return Ok(base);
        }
        let negative = self.eat(&TokenKind::Minus);
        let offset = self.next_offset();
        match self.advance() {
            Some(Token {
                kind: TokenKind::Number { value, is_integer },
                ..
            }) if is_integer && value.fract() == 0.0 && value.abs() <= i32::MAX as f64 => {
                let mut n = value as i32;
                if negative {
                    n = -n;
                }
                Ok(Expr::Pow(Box::new(base), n))
            }
            _ => Err(ParseError::NonIntegerExponent { offset }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.next_offset();
        match self.advance() {
            Some(Token {
                kind: TokenKind::Number { value, .. },
                ..
            }) => Ok(Expr::Number(value)),
            Some(Token {
                kind: TokenKind::Ident(name),
                offset,
            }) => {
                if let Some(i) = self.coords.iter().position(|c| *c == name) {
                    return Ok(Expr::Coord(i));
                }
                if let Some(func) = Func::from_name(&name) {
                    let paren_offset = self.next_offset();
                    if !self.eat(&TokenKind::LParen) {
                        return Err(ParseError::Syntax {
                            offset: paren_offset,
                            message: format!("expected `(` after function `{name}`"),
                        });
                    }
                    let arg = self.expr()?;
                    let close_offset = self.next_offset();
                    if !self.eat(&TokenKind::RParen) {
                        return Err(ParseError::Syntax {
                            offset: close_offset,
                            message: "expected `)` to close function argument".to_string(),
                        });
                    }
                    return Ok(call(func, arg));
                }
                Err(ParseError::UndeclaredIdentifier { offset, name })
            }
            Some(Token {
                kind: TokenKind::LParen,
                ..
            }) => {
                let inner = self.expr()?;
                let close_offset = self.next_offset();
                if self.eat(&TokenKind::RParen) {
                    Ok(inner)
                } else {
                    Err(ParseError::Syntax {
                        offset: close_offset,
                        message: "expected `)`".to_string(),
                    })
                }
            }
            Some(token) => Err(ParseError::Syntax {
                offset: token.offset,
                message: format!("expected expression, found `{}`", describe(&token.kind)),
            }),
            None => Err(ParseError::Syntax {
                offset,
                message: "unexpected end of input".to_string(),
            }),
        }
    }
}

fn describe(kind: &TokenKind) -> String {
    match kind {
        TokenKind::Number { value, .. } => format!("{value}"),
        TokenKind::Ident(name) => name.clone(),
        TokenKind::Plus => "+".to_string(),
        TokenKind::Minus => "-".to_string(),
        TokenKind::Star => "*".to_string(),
        TokenKind::Slash => "/".to_string(),
        TokenKind::Caret => "^".to_string(),
        TokenKind::LParen => "(".to_string(),
        TokenKind::RParen => ")".to_string(),
    }
}

/// Parse `src` against the given coordinate names.
///
/// Coordinates resolve to `Expr::Coord` by position in `coords`. The whole
/// input must be consumed; trailing tokens are a syntax error.
pub fn parse<S: AsRef<str>>(src: &str, coords: &[S]) -> Result<Expr, ParseError> {
    let tokens = lex(src)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        coords: coords.iter().map(|s| s.as_ref()).collect(),
        src_len: src.len(),
    };
    let expr = parser.expr()?;
    if let Some(extra) = parser.peek() {
        return Err(ParseError::Syntax {
            offset: extra.offset,
            message: format!("unexpected trailing `{}`", describe(&extra.kind)),
        });
    }
    Ok(expr)
}
