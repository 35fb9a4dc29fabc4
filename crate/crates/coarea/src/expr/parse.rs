//! Recursive-descent parser and precedence-aware printer for the expression
//! grammar. Every input either parses or yields a positioned syntax error.

use super::{Expr, Func, MapExpr};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize),
    Fun(Func),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Semi,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<(usize, Tok)> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((start, Tok::End));
        }
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b';' => Tok::Semi,
            b'0'..=b'9' | b'.' => return self.lex_number(start),
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => return self.lex_ident(start),
            _ => {
                return Err(Error::Syntax {
                    position: start,
                    token: (c as char).to_string(),
                })
            }
        };
        self.pos += 1;
        Ok((start, tok))
    }

    fn lex_number(&mut self, start: usize) -> Result<(usize, Tok)> {
        let mut end = self.pos;
        let bytes = self.src;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut e = end + 1;
            if e < bytes.len() && (bytes[e] == b'+' || bytes[e] == b'-') {
                e += 1;
            }
            if e < bytes.len() && bytes[e].is_ascii_digit() {
                end = e;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
            }
        }
        let text = std::str::from_utf8(&bytes[start..end]).unwrap();
        let v: f64 = text.parse().map_err(|_| Error::Syntax {
            position: start,
            token: text.to_string(),
        })?;
        self.pos = end;
        Ok((start, Tok::Num(v)))
    }

    fn lex_ident(&mut self, start: usize) -> Result<(usize, Tok)> {
        let bytes = self.src;
        let mut end = self.pos;
        while end < bytes.len()
            && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
        {
            end += 1;
        }
        let text = std::str::from_utf8(&bytes[start..end]).unwrap();
        self.pos = end;
        let tok = match text {
            "sqrt" => Tok::Fun(Func::Sqrt),
            "exp" => Tok::Fun(Func::Exp),
            "log" => Tok::Fun(Func::Log),
            "abs" => Tok::Fun(Func::Abs),
            "sin" => Tok::Fun(Func::Sin),
            "cos" => Tok::Fun(Func::Cos),
            _ => {
                if let Some(rest) = text.strip_prefix('x') {
                    if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                        let idx: usize = rest.parse().map_err(|_| Error::Syntax {
                            position: start,
                            token: text.to_string(),
                        })?;
                        return Ok((start, Tok::Var(idx)));
                    }
                }
                return Err(Error::Syntax {
                    position: start,
                    token: text.to_string(),
                });
            }
        };
        Ok((start, tok))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    cur: (usize, Tok),
    k: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, k: usize) -> Result<Self> {
        let mut lexer = Lexer::new(src);
        let cur = lexer.next()?;
        Ok(Parser { lexer, cur, k })
    }

    fn bump(&mut self) -> Result<()> {
        self.cur = self.lexer.next()?;
        Ok(())
    }

    fn unexpected<T>(&self) -> Result<T> {
        Err(Error::Syntax {
            position: self.cur.0,
            token: format!("{:?}", self.cur.1),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.cur.1 {
                Tok::Plus => {
                    self.bump()?;
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Minus => {
                    self.bump()?;
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.cur.1 {
                Tok::Star => {
                    self.bump()?;
                    let rhs = self.factor()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Tok::Slash => {
                    self.bump()?;
                    let rhs = self.factor()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.cur.1 == Tok::Minus {
            self.bump()?;
            let inner = self.factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.cur.1 == Tok::Caret {
            self.bump()?;
            // right-associative, and `x^-2` binds the sign to the exponent
            let exp = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.cur.1.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Const(v))
            }
            Tok::Var(idx) => {
                if idx == 0 || idx > self.k {
                    return Err(Error::UnknownVariable { index: idx, max: self.k });
                }
                self.bump()?;
                Ok(Expr::Var(idx - 1))
            }
            Tok::Fun(f) => {
                self.bump()?;
                if self.cur.1 != Tok::LParen {
                    return self.unexpected();
                }
                self.bump()?;
                let arg = self.expr()?;
                if self.cur.1 != Tok::RParen {
                    return self.unexpected();
                }
                self.bump()?;
                Ok(Expr::Call(f, Box::new(arg)))
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                if self.cur.1 != Tok::RParen {
                    return self.unexpected();
                }
                self.bump()?;
                Ok(inner)
            }
            _ => self.unexpected(),
        }
    }
}

pub fn parse_map(source: &str, k: usize, n: usize) -> Result<MapExpr> {
    let mut parser = Parser::new(source, k)?;
    let mut coords = Vec::new();
    loop {
        coords.push(parser.expr()?);
        match parser.cur.1 {
            Tok::Semi => parser.bump()?,
            Tok::End => break,
            _ => return parser.unexpected(),
        }
    }
    if coords.len() != n {
        return Err(Error::Arity { expected: n, found: coords.len() });
    }
    Ok(MapExpr { coords, input_dim: k })
}

// Precedence levels used by the printer; parentheses are emitted only where
// reparsing would otherwise regroup.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Neg(..) => 2,
        Expr::Mul(..) | Expr::Div(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Const(_) | Expr::Var(_) | Expr::Call(..) => 5,
    }
}

pub fn unparse(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, &mut out);
    out
}

fn write_child(child: &Expr, parent_prec: u8, out: &mut String) {
    if prec(child) < parent_prec {
        out.push('(');
        write_expr(child, out);
        out.push(')');
    } else {
        write_expr(child, out);
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Const(c) => {
            if *c < 0.0 {
                out.push('(');
                out.push_str(&format!("{c:?}"));
                out.push(')');
            } else {
                out.push_str(&format!("{c:?}"));
            }
        }
        Expr::Var(i) => out.push_str(&format!("x{}", i + 1)),
        Expr::Neg(a) => {
            // `-a*b` would regroup as `(-a)*b`, so Mul/Div children need parens
            out.push('-');
            write_child(a, 4, out);
        }
        Expr::Add(a, b) => {
            write_child(a, 1, out);
            out.push('+');
            // right operand needs strictly higher binding to survive reparse
            write_child(b, 2, out);
        }
        Expr::Sub(a, b) => {
            write_child(a, 1, out);
            out.push('-');
            write_child(b, 2, out);
        }
        Expr::Mul(a, b) => {
            write_child(a, 3, out);
            out.push('*');
            write_child(b, 4, out);
        }
        Expr::Div(a, b) => {
            write_child(a, 3, out);
            out.push('/');
            write_child(b, 4, out);
        }
        Expr::Pow(a, b) => {
            write_child(a, 5, out);
            out.push('^');
            // exponent may be a factor (unary minus allowed, right assoc)
            write_child(b, 2, out);
        }
        Expr::Call(f, a) => {
            out.push_str(f.name());
            out.push('(');
            write_expr(a, out);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_error_carries_position() {
        match parse_map("x1 + $", 1, 1) {
            Err(Error::Syntax { position, token }) => {
                assert_eq!(position, 5);
                assert_eq!(token, "$");
            }
            other => panic!("expected Syntax, got {other:?}"),
        }
    }

    #[test]
    fn unknown_function_is_syntax_error() {
        assert!(matches!(
            parse_map("tan(x1)", 1, 1),
            Err(Error::Syntax { position: 0, .. })
        ));
    }

    #[test]
    fn x0_is_out_of_range() {
        assert!(matches!(
            parse_map("x0", 2, 1),
            Err(Error::UnknownVariable { index: 0, max: 2 })
        ));
    }

    #[test]
    fn precedence_binds_as_usual() {
        let m = parse_map("1+2*3^2", 1, 1).unwrap();
        assert_eq!(m.eval(&[0.0]).unwrap(), vec![19.0]);
        let m = parse_map("-2^2", 1, 1).unwrap();
        assert_eq!(m.eval(&[0.0]).unwrap(), vec![-4.0]);
        let m = parse_map("2^-1", 1, 1).unwrap();
        assert_eq!(m.eval(&[0.0]).unwrap(), vec![0.5]);
        let m = parse_map("1-2-3", 1, 1).unwrap();
        assert_eq!(m.eval(&[0.0]).unwrap(), vec![-4.0]);
        let m = parse_map("8/4/2", 1, 1).unwrap();
        assert_eq!(m.eval(&[0.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        assert!(matches!(parse_map("x1 x1", 1, 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_map("x1)", 1, 1), Err(Error::Syntax { .. })));
        assert!(matches!(parse_map("", 1, 1), Err(Error::Syntax { .. })));
    }
}
