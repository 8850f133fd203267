//! Attribute filter expressions such as `width < 10` or `UGV and not armed`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{AttrValue, Attributes};
use crate::parser::lexer::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterExpr {
    Compare {
        attr: String,
        op: CmpOp,
        value: Literal,
    },
    Tag(String),
    And(Box<FilterExpr>, Box<FilterExpr>),
    Or(Box<FilterExpr>, Box<FilterExpr>),
    Not(Box<FilterExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FilterError {
    #[error("cannot compare attribute `{attr}` ({found}) with {expected} using `{op}`")]
    TypeMismatch {
        attr: String,
        op: &'static str,
        found: &'static str,
        expected: &'static str,
    },
    #[error("unknown tag `{0}`")]
    UnknownTag(String),
}

impl FilterExpr {
    /// Evaluates against one object's attributes.
    ///
    /// A comparison on an attribute the object lacks is false; its name is
    /// recorded in `missing`. `has_tag` answers tag atoms.
    pub fn eval<F>(
        &self,
        attrs: &Attributes,
        has_tag: &F,
        missing: &mut BTreeSet<String>,
    ) -> Result<bool, FilterError>
    where
        F: Fn(&str) -> Result<bool, FilterError>,
    {
        match self {
            FilterExpr::Tag(t) => has_tag(t),
            FilterExpr::Not(e) => Ok(!e.eval(attrs, has_tag, missing)?),
            FilterExpr::And(a, b) => {
                // both sides always evaluated so type errors surface deterministically
                let l = a.eval(attrs, has_tag, missing)?;
                let r = b.eval(attrs, has_tag, missing)?;
                Ok(l && r)
            }
            FilterExpr::Or(a, b) => {
                let l = a.eval(attrs, has_tag, missing)?;
                let r = b.eval(attrs, has_tag, missing)?;
                Ok(l || r)
            }
            FilterExpr::Compare { attr, op, value } => match attrs.get(attr) {
                None => {
                    missing.insert(attr.clone());
                    Ok(false)
                }
                Some(found) => compare(attr, found, *op, value),
            },
        }
    }

    /// Attribute names referenced by comparisons.
    pub fn attributes(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_attrs(&mut out);
        out
    }

    fn collect_attrs<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            FilterExpr::Compare { attr, .. } => {
                out.insert(attr);
            }
            FilterExpr::Tag(_) => {}
            FilterExpr::Not(e) => e.collect_attrs(out),
            FilterExpr::And(a, b) | FilterExpr::Or(a, b) => {
                a.collect_attrs(out);
                b.collect_attrs(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            FilterExpr::Or(..) => 1,
            FilterExpr::And(..) => 2,
            FilterExpr::Not(_) => 3,
            FilterExpr::Compare { .. } | FilterExpr::Tag(_) => 4,
        }
    }
}

fn compare(attr: &str, found: &AttrValue, op: CmpOp, value: &Literal) -> Result<bool, FilterError> {
    let mismatch = |found: &'static str, expected: &'static str| FilterError::TypeMismatch {
        attr: attr.to_string(),
        op: op.symbol(),
        found,
        expected,
    };
    match (found, value) {
        (AttrValue::Number(x), Literal::Number(y)) => Ok(match op {
            CmpOp::Lt => x < y,
            CmpOp::Le => x <= y,
            CmpOp::Gt => x > y,
            CmpOp::Ge => x >= y,
            CmpOp::Eq => x == y,
            CmpOp::Ne => x != y,
        }),
        (AttrValue::Number(_), Literal::Text(_)) => Err(mismatch("a number", "text")),
        (AttrValue::Text(_) | AttrValue::Tag(_), Literal::Number(_)) => {
            Err(mismatch("non-numeric", "a number"))
        }
        (AttrValue::Text(s) | AttrValue::Tag(s), Literal::Text(t)) => {
            if op.is_ordering() {
                Err(mismatch("non-numeric", "text"))
            } else {
                Ok((s == t) == (op == CmpOp::Eq))
            }
        }
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, x: f64) -> fmt::Result {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        write!(f, "{}", x as i64)
    } else {
        write!(f, "{}", x)
    }
}

pub(crate) fn format_number(x: f64) -> String {
    struct N(f64);
    impl fmt::Display for N {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_number(f, self.0)
        }
    }
    N(x).to_string()
}

/// Canonical spelling; parsing it back yields an identical tree.
impl fmt::Display for FilterExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, e: &FilterExpr, min: u8| {
            if e.precedence() < min {
                write!(f, "({})", e)
            } else {
                write!(f, "{}", e)
            }
        };
        match self {
            FilterExpr::Tag(t) => f.write_str(t),
            FilterExpr::Compare { attr, op, value } => {
                write!(f, "{} {} ", attr, op.symbol())?;
                match value {
                    Literal::Number(x) => write_number(f, *x),
                    Literal::Text(s) => {
                        f.write_str("'")?;
                        for c in s.chars() {
                            if c == '\'' || c == '\\' {
                                f.write_str("\\")?;
                            }
                            write!(f, "{}", c)?;
                        }
                        f.write_str("'")
                    }
                }
            }
            FilterExpr::Not(e) => {
                f.write_str("not ")?;
                child(f, e, 3)
            }
            // left-associative: the right operand needs parens at equal precedence
            FilterExpr::And(a, b) => {
                child(f, a, 2)?;
                f.write_str(" and ")?;
                child(f, b, 3)
            }
            FilterExpr::Or(a, b) => {
                child(f, a, 1)?;
                f.write_str(" or ")?;
                child(f, b, 2)
            }
        }
    }
}

/// Parses a filter expression. Precedence: `not` > `and` > `or`.
/// `&&`, `||` and `!` are accepted as spellings of the keywords.
pub fn parse_filter(text: &str) -> Result<FilterExpr, String> {
    let tokens = tokenize(text).map_err(|d| {
        d.into_iter()
            .next()
            .map(|d| d.message)
            .unwrap_or_else(|| "lexical error".into())
    })?;
    let mut p = FilterParser { tokens, pos: 0 };
    let e = p.or_expr()?;
    if p.pos < p.tokens.len() {
        return Err(format!(
            "unexpected {} in filter",
            p.tokens[p.pos].kind.describe()
        ));
    }
    Ok(e)
}

struct FilterParser {
    tokens: Vec<Token>,
    pos: usize,
}

impl FilterParser {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn word(&self) -> Option<&str> {
        match self.peek() {
            Some(TokenKind::Ident(s)) => Some(s),
            Some(TokenKind::Keyword(k)) => Some(k.as_str()),
            _ => None,
        }
    }

    fn or_expr(&mut self) -> Result<FilterExpr, String> {
        let mut lhs = self.and_expr()?;
        while matches!(self.peek(), Some(TokenKind::OrOr)) || self.word() == Some("or") {
            self.pos += 1;
            let rhs = self.and_expr()?;
            lhs = FilterExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<FilterExpr, String> {
        let mut lhs = self.unary()?;
        while matches!(self.peek(), Some(TokenKind::AndAnd)) || self.word() == Some("and") {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = FilterExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<FilterExpr, String> {
        if matches!(self.peek(), Some(TokenKind::Bang)) || self.word() == Some("not") {
            self.pos += 1;
            return Ok(FilterExpr::Not(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<FilterExpr, String> {
        if matches!(self.peek(), Some(TokenKind::LParen)) {
            self.pos += 1;
            let e = self.or_expr()?;
            if !matches!(self.peek(), Some(TokenKind::RParen)) {
                return Err("expected `)` in filter".into());
            }
            self.pos += 1;
            return Ok(e);
        }
        let name = match self.word() {
            Some(w) if !matches!(w, "and" | "or" | "not") => w.to_string(),
            _ => {
                return Err(match self.peek() {
                    Some(k) => format!("expected attribute or tag, found {}", k.describe()),
                    None => "empty filter expression".into(),
                })
            }
        };
        self.pos += 1;
        let op = match self.peek() {
            Some(TokenKind::Lt) => CmpOp::Lt,
            Some(TokenKind::Le) => CmpOp::Le,
            Some(TokenKind::Gt) => CmpOp::Gt,
            Some(TokenKind::Ge) => CmpOp::Ge,
            Some(TokenKind::EqEq) => CmpOp::Eq,
            Some(TokenKind::Ne) => CmpOp::Ne,
            _ => return Ok(FilterExpr::Tag(name)),
        };
        self.pos += 1;
        let value = self.literal()?;
        Ok(FilterExpr::Compare {
            attr: name,
            op,
            value,
        })
    }

    fn literal(&mut self) -> Result<Literal, String> {
        let negative = if matches!(self.peek(), Some(TokenKind::Minus)) {
            self.pos += 1;
            true
        } else {
            false
        };
        let sign = if negative { -1.0 } else { 1.0 };
        let lit = match self.peek() {
            Some(TokenKind::Int(n)) => Literal::Number(sign * *n as f64),
            Some(TokenKind::Decimal(x)) => Literal::Number(sign * *x),
            Some(TokenKind::Str(s)) if !negative => Literal::Text(s.clone()),
            Some(TokenKind::Ident(s)) if !negative => Literal::Text(s.clone()),
            Some(k) => return Err(format!("expected a literal, found {}", k.describe())),
            None => return Err("expected a literal after comparison operator".into()),
        };
        self.pos += 1;
        Ok(lit)
    }
}
