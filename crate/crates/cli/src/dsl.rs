//! S-expression syntax for functor expressions.
//!
//! ```text
//! expr := (var i) | (const d) | (sum expr expr) | (tensor expr expr)
//!       | (compose expr expr+) | (sym2 expr) | (ext2 expr)
//! ```
//!
//! The arity is `1 + max var index`; inside `compose`, the head's variables
//! refer to the arguments.

use afc_core::functor::{FunctorError, FunctorExpr, Term};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslError {
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("arity error: {0}")]
    Arity(#[from] FunctorError),
}

fn err<T>(position: usize, message: impl Into<String>) -> Result<T, DslError> {
    Err(DslError::Parse { position, message: message.into() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Open,
    Close,
    Atom(String),
}

fn tokenize(text: &str) -> Vec<(usize, Token)> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            '(' => {
                out.push((i, Token::Open));
                chars.next();
            }
            ')' => {
                out.push((i, Token::Close));
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut atom = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c == '(' || c == ')' || c.is_whitespace() {
                        break;
                    }
                    atom.push(c);
                    chars.next();
                }
                out.push((i, Token::Atom(atom)));
            }
        }
    }
    out
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Token)> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.0)
    }

    fn next(&mut self) -> Option<(usize, Token)> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn number(&mut self) -> Result<usize, DslError> {
        match self.next() {
            Some((p, Token::Atom(a))) => a.parse().or_else(|_| err(p, format!("expected a non-negative integer, found `{a}`"))),
            Some((p, _)) => err(p, "expected a non-negative integer"),
            None => err(self.end, "unexpected end of input"),
        }
    }

    fn close(&mut self) -> Result<(), DslError> {
        match self.next() {
            Some((_, Token::Close)) => Ok(()),
            Some((p, _)) => err(p, "expected `)`"),
            None => err(self.end, "unexpected end of input, expected `)`"),
        }
    }

    fn expr(&mut self) -> Result<Term, DslError> {
        let start = match self.next() {
            Some((p, Token::Open)) => p,
            Some((p, _)) => return err(p, "expected `(`"),
            None => return err(self.end, "unexpected end of input"),
        };
        let (p, head) = match self.next() {
            Some((p, Token::Atom(a))) => (p, a),
            _ => return err(start + 1, "expected an operator name"),
        };
        let term = match head.as_str() {
            "var" => Term::var(self.number()?),
            "const" => Term::constant(self.number()?),
            "sum" => {
                let a = self.expr()?;
                Term::sum(a, self.expr()?)
            }
            "tensor" => {
                let a = self.expr()?;
                Term::tensor(a, self.expr()?)
            }
            "compose" => {
                let h = self.expr()?;
                let mut args = vec![self.expr()?];
                while matches!(self.peek(), Some((_, Token::Open))) {
                    args.push(self.expr()?);
                }
                Term::compose(h, args)
            }
            #[cfg(feature = "quotient-atoms")]
            "sym2" => Term::sym2(self.expr()?),
            #[cfg(feature = "quotient-atoms")]
            "ext2" => Term::ext2(self.expr()?),
            other => return err(p, format!("unknown operator `{other}`")),
        };
        self.close()?;
        Ok(term)
    }
}

pub fn parse_expr(text: &str) -> Result<FunctorExpr, DslError> {
    let mut parser = Parser { tokens: tokenize(text), pos: 0, end: text.len() };
    let body = parser.expr()?;
    if parser.peek().is_some() {
        return err(parser.here(), "trailing input");
    }
    Ok(FunctorExpr::infer(body)?)
}

/// One expression per non-empty line; `#` starts a comment.
pub fn parse_expr_file(text: &str) -> Result<Vec<FunctorExpr>, DslError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let content = line.split('#').next().unwrap_or("");
        if !content.trim().is_empty() {
            out.push(parse_expr(content).map_err(|e| match e {
                DslError::Parse { position, message } => DslError::Parse { position: position + offset, message },
                other => other,
            })?);
        }
        offset += line.len();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let f = parse_expr("(sum (const 1) (var 0))").unwrap();
        assert_eq!(f, FunctorExpr::shifted_identity(1));
        let sq = parse_expr("(tensor (var 0) (var 0))").unwrap();
        assert_eq!(sq, FunctorExpr::tensor_power(2));
        let diag = parse_expr("(compose (tensor (var 0) (var 1)) (var 0) (var 0))").unwrap();
        assert_eq!(diag.arity(), 1);
        for d in 0..=2 {
            assert_eq!(diag.eval_obj(&[d]).unwrap(), sq.eval_obj(&[d]).unwrap());
        }
        assert_eq!(parse_expr("  ( tensor(var 0)\n(var 2) ) ").unwrap().arity(), 3);
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse_expr("(sum (var 0)"), Err(DslError::Parse { position: 12, message: "unexpected end of input".into() }));
        assert!(matches!(parse_expr("(frob (var 0))"), Err(DslError::Parse { position: 1, .. })));
        assert!(matches!(parse_expr("(var x)"), Err(DslError::Parse { position: 5, .. })));
        assert!(matches!(parse_expr("(var 0) (var 1)"), Err(DslError::Parse { position: 8, .. })));
        assert!(matches!(parse_expr("(compose (tensor (var 0) (var 1)) (var 0))"), Err(DslError::Arity(_))));
        let file = parse_expr_file("# comment\n(var 0)\n(sum (var 0)\n");
        assert!(matches!(file, Err(DslError::Parse { position: 31, .. })));
    }
}
