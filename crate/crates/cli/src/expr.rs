//! Arithmetic on real numbers for flags like `--time pi/125`.
//!
//! Grammar: `+ - * /`, parentheses, unary minus, decimal literals and the
//! constant `pi`.

pub fn eval(src: &str) -> Result<f64, String> {
    let mut p = Parser {
        chars: src.chars().filter(|c| !c.is_whitespace()).collect(),
        pos: 0,
    };
    let v = p.sum()?;
    if p.pos != p.chars.len() {
        return Err(format!("unexpected `{}` in `{src}`", p.chars[p.pos]));
    }
    if !v.is_finite() {
        return Err(format!("`{src}` is not finite"));
    }
    Ok(v)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<f64, String> {
        let mut v = self.product()?;
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let r = self.product()?;
            v = if op == '+' { v + r } else { v - r };
        }
        Ok(v)
    }

    fn product(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let r = self.unary()?;
            v = if op == '*' { v * r } else { v / r };
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(')') {
                    return Err("missing `)`".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
                    self.pos += 1;
                }
                let word: String = self.chars[start..self.pos].iter().collect();
                match word.to_ascii_lowercase().as_str() {
                    "pi" => Ok(std::f64::consts::PI),
                    _ => Err(format!("unknown name `{word}`")),
                }
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E')
                {
                    // Exponent sign.
                    if matches!(self.peek(), Some('e' | 'E'))
                        && matches!(self.chars.get(self.pos + 1), Some('+' | '-'))
                    {
                        self.pos += 1;
                    }
                    self.pos += 1;
                }
                let text: String = self.chars[start..self.pos].iter().collect();
                text.parse().map_err(|_| format!("bad number `{text}`"))
            }
            Some(c) => Err(format!("unexpected `{c}`")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::eval;
    use std::f64::consts::PI;

    #[test]
    fn evaluates() {
        assert_eq!(eval("pi/125").unwrap(), PI / 125.0);
        assert_eq!(eval("0").unwrap(), 0.0);
        assert_eq!(eval("1/2").unwrap(), 0.5);
        assert_eq!(eval("-1.25").unwrap(), -1.25);
        assert_eq!(eval("2*(pi - 1)").unwrap(), 2.0 * (PI - 1.0));
        assert!((eval("1e-3 + 2E+1").unwrap() - 20.001).abs() < 1e-12);
        assert_eq!(eval("--2").unwrap(), 2.0);
    }

    #[test]
    fn rejects() {
        for bad in ["", "pi/", "(1", "tau", "1/0", "2x"] {
            assert!(eval(bad).is_err(), "{bad}");
        }
    }
}
