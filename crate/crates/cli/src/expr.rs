//! Arithmetic on numbers, `pi` and `sqrt(…)`, so that configurations can
//! write `gt_int = "pi/sqrt(2)"` and hit the trapping point exactly.

use std::f64::consts::PI;

/// Evaluates `+ − * /`, parentheses, unary minus, `pi` and `sqrt`.
pub fn eval(src: &str) -> Result<f64, String> {
    let mut p = Parser {
        s: src.as_bytes(),
        i: 0,
    };
    let v = p.sum()?;
    p.skip_ws();
    if p.i != p.s.len() {
        return Err(format!("unexpected `{}` in `{src}`", &src[p.i..]));
    }
    Ok(v)
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.s.get(self.i).is_some_and(|c| c.is_ascii_whitespace()) {
            self.i += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.i) == Some(&c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<f64, String> {
        let mut v = self.product()?;
        loop {
            if self.eat(b'+') {
                v += self.product()?;
            } else if self.eat(b'-') {
                v -= self.product()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn product(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        loop {
            if self.eat(b'*') {
                v *= self.unary()?;
            } else if self.eat(b'/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, String> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<f64, String> {
        self.skip_ws();
        if self.eat(b'(') {
            let v = self.sum()?;
            return if self.eat(b')') {
                Ok(v)
            } else {
                Err("missing `)`".into())
            };
        }
        let start = self.i;
        while self.s.get(self.i).is_some_and(|c| c.is_ascii_alphabetic()) {
            self.i += 1;
        }
        if self.i > start {
            return match &self.s[start..self.i] {
                b"pi" => Ok(PI),
                b"sqrt" => {
                    if !self.eat(b'(') {
                        return Err("expected `(` after sqrt".into());
                    }
                    let v = self.sum()?;
                    if !self.eat(b')') {
                        return Err("missing `)`".into());
                    }
                    Ok(v.sqrt())
                }
                other => Err(format!("unknown name `{}`", String::from_utf8_lossy(other))),
            };
        }
        while self
            .s
            .get(self.i)
            .is_some_and(|c| c.is_ascii_digit() || *c == b'.' || *c == b'e' || *c == b'E')
        {
            // allow an exponent sign right after `e`
            if matches!(self.s[self.i], b'e' | b'E') && matches!(self.s.get(self.i + 1), Some(b'+' | b'-')) {
                self.i += 1;
            }
            self.i += 1;
        }
        let text = std::str::from_utf8(&self.s[start..self.i]).unwrap_or("");
        text.parse().map_err(|_| format!("expected a number at `{text}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn trapping_angles_are_exact() {
        assert_eq!(eval("pi/sqrt(2)").unwrap(), PI / SQRT_2);
        assert_eq!(eval("pi/2").unwrap(), PI / 2.0);
        assert_eq!(eval("pi / sqrt(19)").unwrap(), PI / 19f64.sqrt());
    }

    #[test]
    fn arithmetic() {
        assert_eq!(eval("1 + 2*3").unwrap(), 7.0);
        assert_eq!(eval("-(1.5e1 - 5)/2").unwrap(), -5.0);
        assert_eq!(eval("2.5e-1").unwrap(), 0.25);
    }

    #[test]
    fn errors() {
        assert!(eval("tau/2").is_err());
        assert!(eval("sqrt(2").is_err());
        assert!(eval("1 2").is_err());
    }
}
