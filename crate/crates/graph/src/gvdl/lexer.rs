//! Tokenizer for the view definition language.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
    Star,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(v) => write!(f, "`{v}`"),
            Tok::Str(s) => write!(f, "'{s}'"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::LBracket => write!(f, "`[`"),
            Tok::RBracket => write!(f, "`]`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Ne => write!(f, "`!=`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Le => write!(f, "`<=`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::Ge => write!(f, "`>=`"),
        }
    }
}

/// A token plus its 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at {line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

pub fn tokenize(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();

    let is_ident_start = |c: char| c.is_alphabetic() || c == '_';
    let is_ident_cont = |c: char| c.is_alphanumeric() || c == '_' || c == '-';

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let bump = |c: char, line: &mut usize, col: &mut usize| {
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        match c {
            c if c.is_whitespace() => {
                chars.next();
                bump(c, &mut line, &mut col);
            }
            '(' | ')' | '[' | ']' | ',' | ':' | '.' | '*' => {
                chars.next();
                bump(c, &mut line, &mut col);
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    '.' => Tok::Dot,
                    _ => Tok::Star,
                };
                out.push(Spanned { tok, line: tl, col: tc });
            }
            '=' => {
                chars.next();
                bump(c, &mut line, &mut col);
                out.push(Spanned { tok: Tok::Eq, line: tl, col: tc });
            }
            '≠' => {
                chars.next();
                bump(c, &mut line, &mut col);
                out.push(Spanned { tok: Tok::Ne, line: tl, col: tc });
            }
            '≤' => {
                chars.next();
                bump(c, &mut line, &mut col);
                out.push(Spanned { tok: Tok::Le, line: tl, col: tc });
            }
            '≥' => {
                chars.next();
                bump(c, &mut line, &mut col);
                out.push(Spanned { tok: Tok::Ge, line: tl, col: tc });
            }
            '!' => {
                chars.next();
                bump(c, &mut line, &mut col);
                match chars.peek() {
                    Some('=') => {
                        chars.next();
                        bump('=', &mut line, &mut col);
                        out.push(Spanned { tok: Tok::Ne, line: tl, col: tc });
                    }
                    _ => {
                        return Err(SyntaxError {
                            line: tl,
                            col: tc,
                            message: "expected `!=`".into(),
                        })
                    }
                }
            }
            '<' | '>' => {
                chars.next();
                bump(c, &mut line, &mut col);
                let strict = if c == '<' { Tok::Lt } else { Tok::Gt };
                let or_eq = if c == '<' { Tok::Le } else { Tok::Ge };
                let tok = if chars.peek() == Some(&'=') {
                    chars.next();
                    bump('=', &mut line, &mut col);
                    or_eq
                } else {
                    strict
                };
                out.push(Spanned { tok, line: tl, col: tc });
            }
            // String literals: 'abc' or the listing-style `abc' with a
            // backtick opener; both normalize to the same token.
            '\'' | '`' => {
                chars.next();
                bump(c, &mut line, &mut col);
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('\'') => {
                            bump('\'', &mut line, &mut col);
                            break;
                        }
                        Some(c) => {
                            bump(c, &mut line, &mut col);
                            s.push(c);
                        }
                        None => {
                            return Err(SyntaxError {
                                line: tl,
                                col: tc,
                                message: "unterminated string literal".into(),
                            })
                        }
                    }
                }
                out.push(Spanned { tok: Tok::Str(s), line: tl, col: tc });
            }
            '-' | '0'..='9' => {
                let mut s = String::new();
                if c == '-' {
                    s.push(c);
                    chars.next();
                    bump(c, &mut line, &mut col);
                    if !matches!(chars.peek(), Some('0'..='9')) {
                        return Err(SyntaxError {
                            line: tl,
                            col: tc,
                            message: "expected digits after `-`".into(),
                        });
                    }
                }
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        chars.next();
                        bump(d, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                let v: i64 = s.parse().map_err(|_| SyntaxError {
                    line: tl,
                    col: tc,
                    message: format!("integer literal `{s}` out of range"),
                })?;
                out.push(Spanned { tok: Tok::Int(v), line: tl, col: tc });
            }
            c if is_ident_start(c) => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if is_ident_cont(d) {
                        s.push(d);
                        chars.next();
                        bump(d, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Ident(s), line: tl, col: tc });
            }
            other => {
                return Err(SyntaxError {
                    line: tl,
                    col: tc,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}
