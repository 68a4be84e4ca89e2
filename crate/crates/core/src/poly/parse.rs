use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::polynomial::{ExactPoly, FloatPoly, Poly};
use super::quad::QuadNum;
use super::PolyError;

/// Parses `text` as a polynomial in the ordered variables `vars`.
///
/// Grammar: sums and products of numbers (`3`, `2.5e-3`, `7/12`), `sqrt(q)`
/// literals, variables and parenthesized expressions, each with an optional
/// power `^k`. Division is by numbers only. Decimals are read exactly.
pub fn parse(text: &str, vars: &[impl AsRef<str>]) -> Result<ExactPoly, PolyError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        vars,
        root: 0,
    };
    p.polynomial()
}

pub fn parse_float(text: &str, vars: &[impl AsRef<str>]) -> Result<FloatPoly, PolyError> {
    Ok(parse(text, vars)?.to_float())
}

/// Parses a constant such as `3`, `-1/2`, `sqrt(2)` or `1 + 1/2*sqrt(2)`.
pub fn parse_number(text: &str) -> Result<QuadNum, PolyError> {
    let p = parse(text, &[] as &[&str])?;
    Ok(p.constant_term())
}

struct Parser<'a, S> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [S],
    root: u64,
}

impl<S: AsRef<str>> Parser<'_, S> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, PolyError> {
        Err(PolyError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn polynomial(&mut self) -> Result<ExactPoly, PolyError> {
        if self.peek().is_none() {
            return self.err("empty expression");
        }
        let p = self.sum()?;
        match self.peek() {
            None => Ok(p),
            Some(c) => self.err(format!("expected an operator, found '{}'", c as char)),
        }
    }

    fn sum(&mut self) -> Result<ExactPoly, PolyError> {
        let mut out = self.signed()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let t = self.product()?;
                    out = out.add(&t);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let t = self.product()?;
                    out = out.sub(&t);
                }
                _ => return Ok(out),
            }
        }
    }

    fn signed(&mut self) -> Result<ExactPoly, PolyError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.product()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.product()
            }
            _ => self.product(),
        }
    }

    fn product(&mut self) -> Result<ExactPoly, PolyError> {
        let mut out = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let f = self.power()?;
                    out = out.mul(&f);
                }
                Some(b'/') => {
                    self.pos += 1;
                    self.skip_ws();
                    let d = self.number()?;
                    if d.is_zero() {
                        return self.err("division by zero");
                    }
                    out = out.scale(&QuadNum::rational(d.recip()));
                }
                _ => return Ok(out),
            }
        }
    }

    fn power(&mut self) -> Result<ExactPoly, PolyError> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected exponent after '^'");
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<u32>() {
            Ok(e) if e <= 4096 => Ok(base.pow(e)),
            _ => self.err("exponent out of range"),
        }
    }

    fn atom(&mut self) -> Result<ExactPoly, PolyError> {
        let n = self.vars.len();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                if self.peek() == Some(b')') {
                    return self.err("empty parentheses");
                }
                let inner = self.sum()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let q = self.number()?;
                Ok(Poly::constant(n, QuadNum::rational(q)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                if name == "sqrt" && self.peek() == Some(b'(') {
                    self.pos += 1;
                    let at = self.pos;
                    self.skip_ws();
                    let q = self.number()?;
                    if self.peek() != Some(b')') {
                        return self.err("expected ')' after sqrt argument");
                    }
                    self.pos += 1;
                    let s = match QuadNum::sqrt_of(&q) {
                        Some(s) => s,
                        None => {
                            return Err(PolyError::Syntax {
                                pos: at,
                                msg: "sqrt argument must be a nonnegative rational of moderate size".into(),
                            })
                        }
                    };
                    self.combine_root(&s)?;
                    return Ok(Poly::constant(n, s));
                }
                match self.vars.iter().position(|v| v.as_ref() == name) {
                    Some(i) => Ok(Poly::var(n, i)),
                    None => Err(PolyError::UnknownVariable {
                        name: name.to_string(),
                        pos: start,
                    }),
                }
            }
            Some(c) => self.err(format!("unexpected '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn combine_root(&mut self, c: &QuadNum) -> Result<(), PolyError> {
        let r = c.root();
        if r != 0 {
            if self.root != 0 && self.root != r {
                return Err(PolyError::RadicandMismatch(self.root, r));
            }
            self.root = r;
        }
        Ok(())
    }

    /// Unsigned decimal or `p/q` literal, read exactly.
    fn number(&mut self) -> Result<BigRational, PolyError> {
        let q = self.decimal()?;
        let save = self.pos;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            match self.src.get(self.pos) {
                Some(c) if c.is_ascii_digit() || *c == b'.' => {
                    let d = self.decimal()?;
                    if d.is_zero() {
                        return self.err("division by zero");
                    }
                    return Ok(q / d);
                }
                _ => {
                    self.pos = save;
                    return self.err("expected a number after '/'");
                }
            }
        }
        Ok(q)
    }

    fn decimal(&mut self) -> Result<BigRational, PolyError> {
        self.skip_ws();
        let src = self.src;
        let mut digits = String::new();
        let mut scale: i64 = 0;
        let mut seen_digit = false;
        while self.pos < src.len() && src[self.pos].is_ascii_digit() {
            digits.push(src[self.pos] as char);
            self.pos += 1;
            seen_digit = true;
        }
        if self.pos < src.len() && src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < src.len() && src[self.pos].is_ascii_digit() {
                digits.push(src[self.pos] as char);
                self.pos += 1;
                scale -= 1;
                seen_digit = true;
            }
        }
        if !seen_digit {
            return self.err("expected a number");
        }
        if self.pos < src.len() && (src[self.pos] == b'e' || src[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            let mut sign = 1i64;
            if self.pos < src.len() && (src[self.pos] == b'+' || src[self.pos] == b'-') {
                if src[self.pos] == b'-' {
                    sign = -1;
                }
                self.pos += 1;
            }
            let start = self.pos;
            while self.pos < src.len() && src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                // Not an exponent; leave the letter for the caller.
                self.pos = save;
            } else {
                let e: i64 = match std::str::from_utf8(&src[start..self.pos]).unwrap_or("").parse() {
                    Ok(v) if v <= 4000 => v,
                    _ => return self.err("exponent out of range"),
                };
                scale += sign * e;
            }
        }
        let mant: BigInt = digits.parse().unwrap_or_else(|_| BigInt::zero());
        let ten = BigInt::from(10);
        let v = if scale >= 0 {
            BigRational::from_integer(mant * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(mant, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{format_poly, Monomial};

    fn vars(n: usize) -> Vec<String> {
        crate::poly::default_names(n)
    }

    #[test]
    fn reads_constraint() {
        let p = parse("1 - x1^2 - x2^2", &vars(2)).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.coeff(&Monomial::new(vec![2, 0])), QuadNum::integer(-1));
        assert_eq!(p.coeff(&Monomial::new(vec![0, 2])), QuadNum::integer(-1));
        assert_eq!(p.constant_term(), QuadNum::integer(1));
    }

    #[test]
    fn zero_and_cubic() {
        assert!(parse("0", &vars(1)).unwrap().is_zero());
        let p = parse("11 + 2*x1^2 + 4*x1*x2 - x2^2 - 2*x2*x3 - 3*x3 - 2*x3^3", &vars(3)).unwrap();
        assert_eq!(p.len(), 7);
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn decimals_are_exact() {
        let p = parse("2.5e-3*x1 + 0.1", &vars(1)).unwrap();
        assert_eq!(p.coeff(&Monomial::var(1, 0)), QuadNum::ratio(1, 400));
        assert_eq!(p.constant_term(), QuadNum::ratio(1, 10));
        let q = parse("7/12*x1^2", &vars(1)).unwrap();
        assert_eq!(q.coeff(&Monomial::new(vec![2])), QuadNum::ratio(7, 12));
    }

    #[test]
    fn radicals() {
        let p = parse("x1 + sqrt(2) - 3*sqrt(8)*x1", &vars(1)).unwrap();
        assert_eq!(p.radicand().unwrap(), 2);
        assert_eq!(format_poly(&p, &vars(1)), "x1 - 6*sqrt(2)*x1 + sqrt(2)");
        assert!(matches!(
            parse("sqrt(2) + sqrt(3)", &vars(1)),
            Err(PolyError::RadicandMismatch(2, 3))
        ));
        assert_eq!(parse_number("sqrt(1/2)").unwrap().to_string(), "1/2*sqrt(2)");
    }

    #[test]
    fn errors_carry_position() {
        match parse("1 + x4", &vars(2)) {
            Err(PolyError::UnknownVariable { name, pos }) => {
                assert_eq!(name, "x4");
                assert_eq!(pos, 4);
            }
            other => panic!("{other:?}"),
        }
        match parse("1 + * x1", &vars(2)) {
            Err(PolyError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(parse("", &vars(1)).is_err());
        assert!(parse("x1 x2", &vars(2)).is_err());
        assert!(parse("1/0", &vars(1)).is_err());
        assert!(parse("(x1 + 1", &vars(1)).is_err());
        assert!(parse("x1 / x1", &vars(1)).is_err());
    }

    #[test]
    fn expressions() {
        let names = vars(2);
        let p = parse("(2 - x1 - x2)^2", &names).unwrap();
        let q = parse("4 - 4*x1 - 4*x2 + x1^2 + 2*x1*x2 + x2^2", &names).unwrap();
        assert_eq!(p, q);
        let r = parse("-(x1 + 1)*(x1 - 1) + x2/2", &names).unwrap();
        assert_eq!(r, parse("1 - x1^2 + 1/2*x2", &names).unwrap());
        assert_eq!(parse("2^3", &names).unwrap().constant_term(), QuadNum::integer(8));
    }

    #[test]
    fn print_round_trip() {
        let names = vars(3);
        for text in [
            "11 + 2*x1^2 + 4*x1*x2 - x2^2 - 2*x2*x3 - 3*x3 - 2*x3^3",
            "-x1 + 1/3",
            "sqrt(2)*x1*x2 - 1 + 1/2*sqrt(2)",
            "0",
        ] {
            let p = parse(text, &names).unwrap();
            let printed = format_poly(&p, &names);
            assert_eq!(parse(&printed, &names).unwrap(), p, "{printed}");
        }
    }
}
