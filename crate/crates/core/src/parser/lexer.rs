use std::fmt;

use super::{ParseDiagnostic, ParseErrorKind, SourceSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Graph,
    Nodes,
    Node,
    Edge,
    Ontology,
    Agent,
    Constraints,
    Init,
    Capacity,
}

impl Keyword {
    fn from_word(w: &str) -> Option<Self> {
        Some(match w {
            "graph" => Keyword::Graph,
            "nodes" => Keyword::Nodes,
            "node" => Keyword::Node,
            "edge" => Keyword::Edge,
            "ontology" => Keyword::Ontology,
            "agent" => Keyword::Agent,
            "constraints" => Keyword::Constraints,
            "init" => Keyword::Init,
            "capacity" => Keyword::Capacity,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Graph => "graph",
            Keyword::Nodes => "nodes",
            Keyword::Node => "node",
            Keyword::Edge => "edge",
            Keyword::Ontology => "ontology",
            Keyword::Agent => "agent",
            Keyword::Constraints => "constraints",
            Keyword::Init => "init",
            Keyword::Capacity => "capacity",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Ident(String),
    Keyword(Keyword),
    Int(u64),
    Decimal(f64),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
    DotDot,
    Minus,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    AndAnd,
    OrOr,
    Bang,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{}`", s),
            TokenKind::Keyword(k) => format!("keyword `{}`", k.as_str()),
            TokenKind::Int(n) => format!("integer `{}`", n),
            TokenKind::Decimal(x) => format!("number `{}`", x),
            TokenKind::Str(_) => "string literal".to_string(),
            other => format!("`{}`", other),
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident(s) => return f.write_str(s),
            TokenKind::Keyword(k) => k.as_str(),
            TokenKind::Int(n) => return write!(f, "{}", n),
            TokenKind::Decimal(x) => return write!(f, "{}", x),
            TokenKind::Str(s) => return write!(f, "{:?}", s),
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::Comma => ",",
            TokenKind::Colon => ":",
            TokenKind::Dot => ".",
            TokenKind::DotDot => "..",
            TokenKind::Minus => "-",
            TokenKind::Lt => "<",
            TokenKind::Le => "<=",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            TokenKind::EqEq => "==",
            TokenKind::Ne => "!=",
            TokenKind::AndAnd => "&&",
            TokenKind::OrOr => "||",
            TokenKind::Bang => "!",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            _src: src,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

fn error(line: usize, column: usize, length: usize, msg: impl Into<String>) -> ParseDiagnostic {
    ParseDiagnostic::error(
        ParseErrorKind::Lexical,
        SourceSpan {
            line,
            column,
            length,
        },
        msg,
    )
}

/// Splits mission text into tokens. Comments (`//`, `/* */`) and whitespace are dropped.
pub fn tokenize(text: &str) -> Result<Vec<Token>, Vec<ParseDiagnostic>> {
    let mut cur = Cursor::new(text);
    let mut out = Vec::new();
    let mut errors = Vec::new();

    while let Some(c) = cur.peek() {
        let (line, col, start) = (cur.line, cur.col, cur.pos);
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek2() == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c == '/' && cur.peek2() == Some('*') {
            cur.bump();
            cur.bump();
            let mut closed = false;
            while let Some(c) = cur.bump() {
                if c == '*' && cur.peek() == Some('/') {
                    cur.bump();
                    closed = true;
                    break;
                }
            }
            if !closed {
                errors.push(error(line, col, 2, "unterminated block comment"));
            }
            continue;
        }

        let kind = if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    word.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            match Keyword::from_word(&word) {
                Some(k) => TokenKind::Keyword(k),
                None => TokenKind::Ident(word),
            }
        } else if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(c) = cur.peek() {
                if c.is_ascii_digit() {
                    digits.push(c);
                    cur.bump();
                } else {
                    break;
                }
            }
            // `1..3` is a range, `1.5` a decimal
            if cur.peek() == Some('.') && cur.peek2().is_some_and(|c| c.is_ascii_digit()) {
                digits.push('.');
                cur.bump();
                while let Some(c) = cur.peek() {
                    if c.is_ascii_digit() {
                        digits.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                TokenKind::Decimal(digits.parse().expect("decimal literal"))
            } else {
                match digits.parse::<u64>() {
                    Ok(n) => TokenKind::Int(n),
                    Err(_) => {
                        errors.push(error(
                            line,
                            col,
                            cur.pos - start,
                            "integer literal out of range",
                        ));
                        continue;
                    }
                }
            }
        } else if c == '"' || c == '\'' {
            let quote = c;
            cur.bump();
            let mut s = String::new();
            let mut closed = false;
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
                if c == quote {
                    closed = true;
                    break;
                }
                if c == '\\' {
                    match cur.bump() {
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        Some(e @ ('\\' | '"' | '\'')) => s.push(e),
                        Some(other) => {
                            errors.push(error(
                                cur.line,
                                cur.col - 1,
                                2,
                                format!("unknown escape `\\{}`", other),
                            ));
                        }
                        None => break,
                    }
                    continue;
                }
                s.push(c);
            }
            if !closed {
                errors.push(error(
                    line,
                    col,
                    cur.pos - start,
                    "unterminated string literal",
                ));
                continue;
            }
            TokenKind::Str(s)
        } else {
            cur.bump();
            let two = |cur: &mut Cursor, next: char, yes: TokenKind, no: Option<TokenKind>| {
                if cur.peek() == Some(next) {
                    cur.bump();
                    Some(yes)
                } else {
                    no
                }
            };
            let k = match c {
                '(' => Some(TokenKind::LParen),
                ')' => Some(TokenKind::RParen),
                '{' => Some(TokenKind::LBrace),
                '}' => Some(TokenKind::RBrace),
                '[' => Some(TokenKind::LBracket),
                ']' => Some(TokenKind::RBracket),
                ',' => Some(TokenKind::Comma),
                ':' => Some(TokenKind::Colon),
                '-' => Some(TokenKind::Minus),
                '.' => two(&mut cur, '.', TokenKind::DotDot, Some(TokenKind::Dot)),
                '<' => two(&mut cur, '=', TokenKind::Le, Some(TokenKind::Lt)),
                '>' => two(&mut cur, '=', TokenKind::Ge, Some(TokenKind::Gt)),
                '=' => two(&mut cur, '=', TokenKind::EqEq, None),
                '!' => two(&mut cur, '=', TokenKind::Ne, Some(TokenKind::Bang)),
                '&' => two(&mut cur, '&', TokenKind::AndAnd, None),
                '|' => two(&mut cur, '|', TokenKind::OrOr, None),
                _ => None,
            };
            match k {
                Some(k) => k,
                None => {
                    errors.push(error(
                        line,
                        col,
                        cur.pos - start,
                        format!("illegal character `{}`", c),
                    ));
                    continue;
                }
            }
        };
        out.push(Token {
            kind,
            span: SourceSpan {
                line,
                column: col,
                length: cur.pos - start,
            },
        });
    }

    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}
