//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | '+' unary | power
//! power   := postfix ('^' exponent)?
//! postfix := primary '\''*
//! primary := integer | name | name '(' args ')' | der '(' expr (',' var integer?)* ')' | '(' expr ')'
//! ```

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::context::{FunctionKind, JetContext};
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::var::{KernelKind, MultiIndex};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() {
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let n = self.src[start..self.pos].parse::<BigInt>().expect("digits");
            return Ok((Tok::Int(n), start));
        }
        if c.is_ascii_alphabetic() {
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_owned()), start));
        }
        if b"+-*/^(),'".contains(&c) {
            self.pos += 1;
            return Ok((Tok::Sym(c as char), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(Error::Syntax {
            pos: start,
            msg: format!("unexpected character `{ch}`"),
        })
    }
}

struct Parser<'a> {
    ctx: &'a Arc<JetContext>,
    toks: Vec<(Tok, usize)>,
    at: usize,
}

pub fn parse(text: &str, ctx: &Arc<JetContext>) -> Result<Expression> {
    let mut lexer = Lexer { src: text, pos: 0 };
    let mut toks = Vec::new();
    loop {
        let t = lexer.next()?;
        let end = t.0 == Tok::End;
        toks.push(t);
        if end {
            break;
        }
    }
    let mut p = Parser { ctx, toks, at: 0 };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(p.error(format!("unexpected {}", describe(t)))),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("number `{n}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".to_owned(),
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, msg: String) -> Error {
        Error::Syntax { pos: self.pos(), msg }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`, found {}", describe(self.peek()))))
        }
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expression> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if *self.peek() == Tok::Sym('/') {
                let pos = self.pos();
                self.bump();
                let rhs = self.unary()?;
                acc = acc.checked_div(&rhs).map_err(|_| Error::Syntax {
                    pos,
                    msg: "division by zero".into(),
                })?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expression> {
        if self.eat('-') {
            return Ok(-&self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression> {
        let base = self.postfix()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        let pos = self.pos();
        self.bump();
        let e = self.exponent()?;
        base.pow(e).map_err(|_| Error::Syntax {
            pos,
            msg: "negative power of zero".into(),
        })
    }

    fn exponent(&mut self) -> Result<i64> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let n = self.integer()?;
        if paren {
            self.expect(')')?;
        }
        Ok(if neg { -n } else { n })
    }

    fn integer(&mut self) -> Result<i64> {
        match self.peek().clone() {
            Tok::Int(n) => {
                let v = i64::try_from(&n).map_err(|_| self.error("integer too large".into()))?;
                self.bump();
                Ok(v)
            }
            t => Err(self.error(format!("expected an integer, found {}", describe(&t)))),
        }
    }

    fn postfix(&mut self) -> Result<Expression> {
        let mut e = self.primary()?;
        while *self.peek() == Tok::Sym('\'') {
            if self.ctx.n_independent() != 1 {
                return Err(self.error("prime notation needs a single independent variable".into()));
            }
            self.bump();
            e = e.d(0);
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expression> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Int(n) => Ok(Expression::constant(self.ctx, BigRational::from_integer(n))),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, pos),
            t => Err(Error::Syntax {
                pos,
                msg: format!("unexpected {}", describe(&t)),
            }),
        }
    }

    fn identifier(&mut self, name: String, pos: usize) -> Result<Expression> {
        let ctx = self.ctx;
        let call = *self.peek() == Tok::Sym('(');
        match name.as_str() {
            "der" if call => return self.der(),
            "sin" | "cos" | "exp" if call => {
                let kind = match name.as_str() {
                    "sin" => KernelKind::Sin,
                    "cos" => KernelKind::Cos,
                    _ => KernelKind::Exp,
                };
                self.bump();
                let i = self.var_name()?;
                self.expect(')')?;
                return Expression::kernel(ctx, i, kind);
            }
            _ => {}
        }
        if let Some(f) = ctx.function_index(&name) {
            let FunctionKind::Plain { args } = &ctx.function(f).kind else {
                return Err(Error::Undeclared { name, pos });
            };
            if call {
                self.bump();
                let mut given = Vec::new();
                if !self.eat(')') {
                    loop {
                        given.push(self.var_name()?);
                        if self.eat(')') {
                            break;
                        }
                        self.expect(',')?;
                    }
                }
                if given != *args {
                    return Err(Error::Syntax {
                        pos,
                        msg: format!("`{name}` applied to arguments other than its declared ones"),
                    });
                }
            } else if !args.is_empty() {
                return Err(Error::Syntax {
                    pos,
                    msg: format!("`{name}` needs its arguments"),
                });
            }
            return Expression::function(ctx, f, MultiIndex::zero(args.len()));
        }
        if call {
            return Err(Error::Syntax {
                pos,
                msg: format!("unknown function `{name}`"),
            });
        }
        if let Some(i) = ctx.independent_index(&name) {
            return Expression::independent(ctx, i);
        }
        if let Some(a) = ctx.dependent_index(&name) {
            return Expression::unknown(ctx, a);
        }
        if let Some((dep, suffix)) = name.split_once('_') {
            if let (Some(a), true) = (ctx.dependent_index(dep), ctx.suffix_notation()) {
                let mut vars = Vec::with_capacity(suffix.len());
                for ch in suffix.chars() {
                    let i = ctx
                        .independent_index(ch.encode_utf8(&mut [0; 4]))
                        .ok_or_else(|| Error::Undeclared {
                            name: ch.to_string(),
                            pos,
                        })?;
                    vars.push(i);
                }
                if !vars.is_empty() {
                    return Expression::jet_of(ctx, a, &vars);
                }
            }
        }
        Err(Error::Undeclared { name, pos })
    }

    fn var_name(&mut self) -> Result<usize> {
        match self.bump() {
            (Tok::Ident(v), pos) => self
                .ctx
                .independent_index(&v)
                .ok_or(Error::Undeclared { name: v, pos }),
            (t, pos) => Err(Error::Syntax {
                pos,
                msg: format!("expected an independent variable, found {}", describe(&t)),
            }),
        }
    }

    /// `der(target, v₁ [n₁], v₂ [n₂], …)` applies total derivatives to the target.
    fn der(&mut self) -> Result<Expression> {
        self.expect('(')?;
        let mut e = self.expr()?;
        let mut last: Option<usize> = None;
        let mut pending = Vec::new();
        while self.eat(',') {
            if let Tok::Int(_) = self.peek() {
                let pos = self.pos();
                let n = self.integer()?;
                let i = last.take().ok_or(Error::Syntax {
                    pos,
                    msg: "derivative count without a variable".into(),
                })?;
                pending.pop();
                pending.extend(std::iter::repeat_n(i, n.max(0) as usize));
            } else {
                let i = self.var_name()?;
                last = Some(i);
                pending.push(i);
            }
        }
        self.expect(')')?;
        for i in pending {
            e = e.d(i);
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Arc<JetContext> {
        JetContext::parse("vars t x y; unknowns u; funcs h(t)").unwrap()
    }

    #[test]
    fn sugar_forms_agree() {
        let c = ctx();
        let a = parse("der(u,t,1) + u*der(u,x,1)", &c).unwrap();
        let b = parse("u_t + u*u_x", &c).unwrap();
        assert_eq!(a, b);
        assert_eq!(parse("u_tx - u_xt", &c).unwrap(), Expression::zero(&c));
        assert_eq!(parse("der(u, x, 2, t)", &c).unwrap(), parse("u_txx", &c).unwrap());
        assert_eq!(parse("der(h(t), t)", &c).unwrap().d(0), parse("der(h(t), t, 2)", &c).unwrap());
    }

    #[test]
    fn primes_in_one_variable() {
        let c = JetContext::parse("vars t; unknowns u").unwrap();
        assert_eq!(parse("u''", &c).unwrap(), parse("u_tt", &c).unwrap());
        assert!(parse("u'", &ctx()).is_err());
    }

    #[test]
    fn precedence() {
        let c = ctx();
        assert_eq!(parse("-u^2", &c).unwrap(), -&parse("u*u", &c).unwrap());
        assert_eq!(parse("2/3*u", &c).unwrap(), parse("2*u/3", &c).unwrap());
        assert_eq!(parse("u^(-1)*u", &c).unwrap(), Expression::one(&c));
        assert_eq!(parse("u^-2 * u^2", &c).unwrap(), Expression::one(&c));
    }

    #[test]
    fn errors_carry_positions() {
        let c = ctx();
        assert!(matches!(parse("W(1, q)", &c), Err(Error::Syntax { pos: 0, .. })));
        assert!(matches!(parse("u + q", &c), Err(Error::Undeclared { pos: 4, .. })));
        assert!(matches!(parse("u +", &c), Err(Error::Syntax { pos: 3, .. })));
        assert!(matches!(parse("u / (u - u)", &c), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("h(x)", &c), Err(Error::Syntax { .. })));
    }
}
