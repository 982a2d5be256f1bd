//! Textual superalgebra expressions.
//!
//! ```text
//! sum     := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' INT)?
//! atom    := INT | IDENT | 'nu' '(' sum ')' | '(' sum ')'
//! ```
//!
//! `^` binds tighter than unary minus, so `-x^2` is `-(x^2)`. The printed
//! form of every [`SuperElement`] parses back to the same element.

use nugrass_core::algebra::{AssumptionSet, Ctx, Rational, SuperElement};
use nugrass_core::nu::NuInvolution;
use nugrass_core::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(u64),
    Ident(String),
    Sym(char),
    End,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let mut v: u64 = 0;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                v = v
                    .checked_mul(10)
                    .and_then(|v| v.checked_add(chars[i].1 as u64 - '0' as u64))
                    .ok_or_else(|| Error::Syntax { pos, msg: "integer literal too large".into() })?;
                i += 1;
            }
            out.push((pos, Tok::Int(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            out.push((pos, Tok::Ident(chars[start..i].iter().map(|p| p.1).collect())));
        } else if "+-*/^()".contains(c) {
            out.push((pos, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::Syntax { pos, msg: format!("unexpected character '{c}'") });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    ctx: &'a Ctx,
    nu: &'a NuInvolution,
    assume: &'a mut AssumptionSet,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Tok::Sym(s) if *s == c => {
                self.bump();
                Ok(())
            }
            _ => Err(Error::Syntax { pos: self.pos(), msg: format!("expected '{c}'") }),
        }
    }

    fn sum(&mut self) -> Result<SuperElement> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    acc = acc.add(&self.term()?)?;
                }
                Tok::Sym('-') => {
                    self.bump();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<SuperElement> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    acc = acc.mul(&self.unary()?)?;
                }
                Tok::Sym('/') => {
                    self.bump();
                    let pos = self.pos();
                    let d = self.unary()?;
                    acc = acc.mul(&self.reciprocal(&d, pos)?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn reciprocal(&mut self, d: &SuperElement, pos: usize) -> Result<SuperElement> {
        if d.is_zero() {
            return Err(Error::DivisionByNonInvertible(format!("division by zero at {pos}")));
        }
        if d.parity() != Some(0) {
            return Err(Error::DivisionByNonInvertible(format!("{d} at {pos} is not even")));
        }
        d.invert(self.assume).map_err(|e| match e {
            Error::NotInvertible(_) => Error::DivisionByNonInvertible(format!("{d} at {pos} is nilpotent")),
            other => other,
        })
    }

    fn unary(&mut self) -> Result<SuperElement> {
        if self.peek() == &Tok::Sym('-') {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<SuperElement> {
        let base = self.atom()?;
        if self.peek() != &Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        let e = match self.bump() {
            Tok::Int(e) if e <= u32::MAX as u64 => e,
            _ => return Err(Error::Syntax { pos, msg: "exponent must be a nonnegative integer".into() }),
        };
        let mut out = SuperElement::one(self.ctx);
        for _ in 0..e {
            out = out.mul(&base)?;
            if out.is_zero() {
                break;
            }
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<SuperElement> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(v) => Ok(SuperElement::from_rational(self.ctx, Rational::from_integer(v.into()))),
            Tok::Ident(name) if name == "nu" && self.peek() == &Tok::Sym('(') => {
                self.bump();
                let inner = self.sum()?;
                self.expect(')')?;
                self.nu.apply(&inner)
            }
            Tok::Ident(name) => match self.ctx.lookup(&name) {
                Some(_) => SuperElement::gen(self.ctx, &name),
                None => Err(Error::UnknownIdentifier(format!("{name} at {pos}"))),
            },
            Tok::Sym('(') => {
                let inner = self.sum()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::End => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
            Tok::Sym(c) => Err(Error::Syntax { pos, msg: format!("unexpected '{c}'") }),
        }
    }
}

/// Parse in `ctx` with ν the default toggle; assumptions from divisions are dropped.
pub fn parse_expression(text: &str, ctx: &Ctx) -> Result<SuperElement> {
    parse_with(text, ctx, &NuInvolution::toggle_first(ctx), &mut AssumptionSet::new())
}

/// Parse in `ctx`, recording every divisor's reduced numerator in `assume`.
pub fn parse_with(text: &str, ctx: &Ctx, nu: &NuInvolution, assume: &mut AssumptionSet) -> Result<SuperElement> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, ctx, nu, assume };
    let e = p.sum()?;
    if p.peek() != &Tok::End {
        return Err(Error::Syntax { pos: p.pos(), msg: "trailing input".into() });
    }
    Ok(e)
}
