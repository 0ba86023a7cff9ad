//! Canonical text form: terms in decreasing monomial order, e.g.
//! `x1^2 - 2*x1*x2 + 3/4*x3*x5 - 7`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::poly::{LinearForm, Monomial, Polynomial};
use super::{ExactPolyError, NVARS, Q};

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial) -> fmt::Result {
    let mut first = true;
    for (k, &e) in m.0.iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            f.write_str("*")?;
        }
        first = false;
        write!(f, "x{}", k + 1)?;
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms().rev().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let a = c.abs();
            if m.degree() == 0 {
                write!(f, "{a}")?;
            } else {
                if !a.is_one() {
                    write!(f, "{a}*")?;
                }
                write_monomial(f, m)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_poly(), f)
    }
}

/// Parse a rational such as `-3`, `7/2` or `+1/5`.
pub fn parse_rational(s: &str) -> Result<Q, ExactPolyError> {
    let s = s.trim();
    let bad = || ExactPolyError::Parse(format!("bad rational `{s}`"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.trim_start_matches('+').parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

pub fn format_rational(q: &Q) -> String {
    q.to_string()
}

fn parse_term(t: &str) -> Result<(Monomial, Q), ExactPolyError> {
    let mut coeff = Q::one();
    let mut mono = Monomial::ONE;
    for factor in t.split('*') {
        let factor = factor.trim();
        if factor.is_empty() {
            return Err(ExactPolyError::Parse(format!("empty factor in `{t}`")));
        }
        if let Some(rest) = factor.strip_prefix('x') {
            let (var, exp) = match rest.split_once('^') {
                Some((v, e)) => (v, e),
                None => (rest, "1"),
            };
            let var: usize = var
                .trim()
                .parse()
                .map_err(|_| ExactPolyError::Parse(format!("bad variable `{factor}`")))?;
            if !(1..=NVARS).contains(&var) {
                return Err(ExactPolyError::Parse(format!(
                    "unknown variable `{factor}`"
                )));
            }
            let exp: u8 = exp
                .trim()
                .parse()
                .map_err(|_| ExactPolyError::Parse(format!("bad exponent `{factor}`")))?;
            mono.0[var - 1] += exp;
        } else {
            coeff *= parse_rational(factor)?;
        }
    }
    Ok((mono, coeff))
}

/// Parse the canonical text form. Term order and spacing are free.
pub fn parse_polynomial(s: &str) -> Result<Polynomial, ExactPolyError> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(ExactPolyError::Parse("empty polynomial".into()));
    }
    let mut poly = Polynomial::zero();
    let mut start = 0;
    let bytes = s.as_bytes();
    let mut pieces = Vec::new();
    for i in 1..bytes.len() {
        // a sign starts a new term unless it follows `^`, `*` or `/`
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'^' | b'*' | b'/') {
            pieces.push(&s[start..i]);
            start = i;
        }
    }
    pieces.push(&s[start..]);
    for piece in pieces {
        let (neg, body) = match piece.as_bytes()[0] {
            b'-' => (true, &piece[1..]),
            b'+' => (false, &piece[1..]),
            _ => (false, piece),
        };
        let (m, c) = parse_term(body)?;
        poly.add_term(m, if neg { -c } else { c });
    }
    Ok(poly)
}

impl FromStr for Polynomial {
    type Err = ExactPolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_polynomial(s)
    }
}

/// Parse a form of degree at most one; constants are rejected.
pub fn parse_linear_form(s: &str) -> Result<LinearForm, ExactPolyError> {
    parse_polynomial(s)?
        .to_linear_form()
        .ok_or_else(|| ExactPolyError::Parse(format!("`{s}` is not a linear form")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order() {
        let f = parse_polynomial("x2 - 3/2*x1*x3 + x1^2 + 5").unwrap();
        assert_eq!(f.to_string(), "x1^2 - 3/2*x1*x3 + x2 + 5");
    }

    #[test]
    fn leading_negative() {
        let f = parse_polynomial("-x5*x4").unwrap();
        assert_eq!(f.to_string(), "-x4*x5");
        assert_eq!(parse_polynomial("0").unwrap().to_string(), "0");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_polynomial("x7").is_err());
        assert!(parse_polynomial("3/0*x1").is_err());
        assert!(parse_polynomial("y1").is_err());
    }
}
