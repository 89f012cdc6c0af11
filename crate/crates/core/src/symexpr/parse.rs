//! Text grammar for rational expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' exponent)?
//! exponent:= '-'? INT | '(' '-'? INT ')'
//! atom    := NUMBER | IDENT | '(' expr ')'
//! ```
//!
//! `NUMBER` is an integer or a finite decimal (`0.25`); both are exact.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::poly::{Monomial, Poly, Q};
use super::{Chart, RationalExpr, SymError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Q),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(usize, Tok)>, SymError> {
        let mut lx = Lexer { src, toks: Vec::new() };
        lx.scan()?;
        Ok(lx.toks)
    }

    fn scan(&mut self) -> Result<(), SymError> {
        let bytes = self.src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            let start = i;
            match c {
                ' ' | '\t' | '\n' | '\r' => {
                    i += 1;
                    continue;
                }
                '+' => self.toks.push((start, Tok::Plus)),
                '-' => self.toks.push((start, Tok::Minus)),
                '*' => self.toks.push((start, Tok::Star)),
                '/' => self.toks.push((start, Tok::Slash)),
                '^' => self.toks.push((start, Tok::Caret)),
                '(' => self.toks.push((start, Tok::LParen)),
                ')' => self.toks.push((start, Tok::RParen)),
                d if d.is_ascii_digit() || d == '.' => {
                    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                        i += 1;
                    }
                    let text = &self.src[start..i];
                    let q = parse_number(text).ok_or_else(|| SymError::Syntax {
                        pos: start,
                        msg: format!("malformed number `{text}`"),
                    })?;
                    self.toks.push((start, Tok::Num(q)));
                    continue;
                }
                a if a.is_ascii_alphabetic() || a == '_' => {
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                        i += 1;
                    }
                    self.toks.push((start, Tok::Ident(self.src[start..i].to_string())));
                    continue;
                }
                other => {
                    return Err(SymError::Syntax { pos: start, msg: format!("unexpected character `{other}`") });
                }
            }
            i += 1;
        }
        Ok(())
    }
}

fn parse_number(text: &str) -> Option<Q> {
    let mut parts = text.split('.');
    let int_part = parts.next()?;
    let frac_part = parts.next();
    if parts.next().is_some() {
        return None;
    }
    match frac_part {
        None => Some(Q::from_integer(int_part.parse::<BigInt>().ok()?)),
        Some(frac) => {
            if int_part.is_empty() && frac.is_empty() {
                return None;
            }
            let digits = format!("{int_part}{frac}");
            let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
            let d = num_traits::pow(BigInt::from(10), frac.len());
            Some(Q::new(n, d))
        }
    }
}

struct Parser<'c> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    chart: &'c Chart,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SymError> {
        Err(SymError::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<RationalExpr, SymError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RationalExpr, SymError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let at = self.offset();
                    let rhs = self.unary()?;
                    acc = acc.div(&rhs).map_err(|_| SymError::DivisionByZeroAt(at))?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RationalExpr, SymError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Some(Tok::Plus) => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RationalExpr, SymError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let e = self.exponent()?;
        base.pow(e).map_err(|_| SymError::DivisionByZeroAt(at))
    }

    fn exponent(&mut self) -> Result<i32, SymError> {
        let paren = self.peek() == Some(&Tok::LParen);
        if paren {
            self.bump();
        }
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.bump();
            true
        } else {
            false
        };
        let value = match self.bump() {
            Some(Tok::Num(q)) if q.is_integer() => {
                let n: i64 = q.to_integer().try_into().map_err(|_| SymError::Syntax {
                    pos: self.offset(),
                    msg: "exponent too large".into(),
                })?;
                n
            }
            _ => {
                self.pos -= 1;
                return self.err("expected integer exponent");
            }
        };
        if value > 10_000 {
            return self.err("exponent too large");
        }
        if paren {
            match self.bump() {
                Some(Tok::RParen) => {}
                _ => {
                    self.pos -= 1;
                    return self.err("expected `)` after exponent");
                }
            }
        }
        Ok(if neg { -(value as i32) } else { value as i32 })
    }

    fn atom(&mut self) -> Result<RationalExpr, SymError> {
        match self.bump() {
            Some(Tok::Num(q)) => Ok(RationalExpr::from_q(q)),
            Some(Tok::Ident(name)) => self.chart.var(&name),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(e),
                    _ => {
                        self.pos -= 1;
                        self.err("expected `)`")
                    }
                }
            }
            Some(_) => {
                self.pos -= 1;
                self.err("expected number, identifier or `(`")
            }
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parse `text` against the variables of `chart`.
pub fn parse(text: &str, chart: &Chart) -> Result<RationalExpr, SymError> {
    let toks = Lexer::run(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), chart };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

fn render_monomial(m: &Monomial, chart: &Chart) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.exponents().iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(chart.var_name(i).to_string()),
            _ => parts.push(format!("{}^{}", chart.var_name(i), e)),
        }
    }
    parts.join("*")
}

/// Render a polynomial with integer coefficients, terms in descending order.
fn render_poly(p: &Poly, chart: &Chart) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (m, c)) in p.terms_desc().enumerate() {
        let neg = c < &Q::zero();
        let mag = if neg { -c.clone() } else { c.clone() };
        let mono = render_monomial(m, chart);
        let body = if mono.is_empty() {
            mag.to_string()
        } else if mag.is_one() {
            mono
        } else {
            format!("{mag}*{mono}")
        };
        match (k, neg) {
            (0, false) => out.push_str(&body),
            (0, true) => {
                out.push('-');
                out.push_str(&body);
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&body);
            }
            (_, true) => {
                out.push_str(" - ");
                out.push_str(&body);
            }
        }
    }
    out
}

/// Canonical text form; `parse(render(e)) == e`.
pub fn render(e: &RationalExpr, chart: &Chart) -> String {
    let num = render_poly(e.numer(), chart);
    let den = e.denom();
    if den.is_one() {
        return num;
    }
    let num = if e.numer().num_terms() > 1 { format!("({num})") } else { num };
    let den_str = render_poly(den, chart);
    let simple_den = den.num_terms() == 1
        && (den.is_constant() || (den.leading_coeff().is_one() && den.leading().is_some_and(|(m, _)| m.exponents().iter().filter(|&&e| e > 0).count() == 1)));
    if simple_den {
        format!("{num}/{den_str}")
    } else {
        format!("{num}/({den_str})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Chart {
        Chart::new(&["x", "v", "a"]).unwrap()
    }

    #[test]
    fn parses_and_renders_coefficients() {
        let c = chart();
        let e = parse("3*a^2/(2*v)", &c).unwrap();
        assert_eq!(render(&e, &c), "3*a^2/(2*v)");
        let e = parse("1/(2*v^3)", &c).unwrap();
        assert_eq!(render(&e, &c), "1/(2*v^3)");
        assert_eq!(render(&parse("(v - v)", &c).unwrap(), &c), "0");
        assert_eq!(render(&parse("a^2/(4*v^3)", &c).unwrap(), &c), "a^2/(4*v^3)");
        assert_eq!(render(&parse("-a/v^2", &c).unwrap(), &c), "-a/v^2");
        assert_eq!(render(&parse("v^-2", &c).unwrap(), &c), "1/v^2");
        assert_eq!(render(&parse("0.5*x", &c).unwrap(), &c), "x/2");
        assert_eq!(render(&parse("(x - a)/(v^2 + a)", &c).unwrap(), &c), "(x - a)/(v^2 + a)");
        let e = parse("(x + a)/(v^2*a^3)", &c).unwrap();
        assert_eq!(render(&e, &c), "(x + a)/(v^2*a^3)");
        assert_eq!(parse(&render(&e, &c), &c).unwrap(), e);
    }

    #[test]
    fn precedence() {
        let c = chart();
        assert_eq!(parse("-x^2", &c).unwrap(), parse("-(x^2)", &c).unwrap());
        assert_eq!(parse("x - v - a", &c).unwrap(), parse("x - (v + a)", &c).unwrap());
        assert_eq!(parse("x/v/a", &c).unwrap(), parse("x/(v*a)", &c).unwrap());
        assert_eq!(parse("2^3", &c).unwrap(), RationalExpr::from_int(8));
        assert_eq!(parse("x^(-1)", &c).unwrap(), parse("1/x", &c).unwrap());
    }

    #[test]
    fn errors_carry_positions() {
        let c = chart();
        assert!(matches!(parse("x + * v", &c), Err(SymError::Syntax { pos: 4, .. })));
        assert!(matches!(parse("x + y", &c), Err(SymError::UnknownIdentifier(n)) if n == "y"));
        assert!(matches!(parse("1/(x - x)", &c), Err(SymError::DivisionByZeroAt(2))));
        assert!(matches!(parse("(x - x)^-1", &c), Err(SymError::DivisionByZeroAt(_))));
        assert!(matches!(parse("x^v", &c), Err(SymError::Syntax { .. })));
        assert!(matches!(parse("(x", &c), Err(SymError::Syntax { .. })));
        assert!(matches!(parse("", &c), Err(SymError::Syntax { .. })));
        assert!(matches!(parse("x $", &c), Err(SymError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn monic_negative_denominator_is_flipped() {
        let c = chart();
        assert_eq!(render(&parse("1/(-v)", &c).unwrap(), &c), "-1/v");
        assert_eq!(parse("Q", &Chart::new(&["Q"]).unwrap()).unwrap(), RationalExpr::var(0));
    }
}
