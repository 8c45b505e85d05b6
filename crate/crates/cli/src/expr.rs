//! Radian expressions such as `pi/3`, `0.3pi`, `0.3*pi`, `π/4` or `(pi - 0.1)/2`.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Pi,
    Op(char),
    Open,
    Close,
}

fn tokenize(src: &str) -> Result<Vec<Token>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            ' ' | '\t' => i += 1,
            '+' | '-' | '*' | '/' => {
                out.push(Token::Op(ch));
                i += 1;
            }
            '(' => {
                out.push(Token::Open);
                i += 1;
            }
            ')' => {
                out.push(Token::Close);
                i += 1;
            }
            'π' => {
                out.push(Token::Pi);
                i += 1;
            }
            'p' | 'P' if chars.get(i + 1).is_some_and(|c| c.eq_ignore_ascii_case(&'i')) => {
                out.push(Token::Pi);
                i += 2;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // Exponent, but not the start of a following `pi`.
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text.parse().map_err(|_| format!("bad number `{text}`"))?;
                out.push(Token::Num(v));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<f64, String> {
        let mut acc = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<f64, String> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Op(op @ ('*' | '/'))) => {
                    let op = *op;
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = if op == '*' { acc * rhs } else { acc / rhs };
                }
                // Juxtaposition: `0.3pi`, `2(pi/3)`.
                Some(Token::Pi | Token::Open) => acc *= self.unary()?,
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<f64, String> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64, String> {
        match self.next() {
            Some(Token::Num(v)) => Ok(v),
            Some(Token::Pi) => Ok(PI),
            Some(Token::Open) => {
                let v = self.expr()?;
                match self.next() {
                    Some(Token::Close) => Ok(v),
                    _ => Err("missing `)`".into()),
                }
            }
            Some(t) => Err(format!("unexpected {t:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

/// Evaluates a radian expression.
pub fn parse_radians(src: &str) -> Result<f64, String> {
    let tokens = tokenize(src).map_err(|e| format!("`{src}`: {e}"))?;
    if tokens.is_empty() {
        return Err("empty angle".into());
    }
    let mut p = Parser { tokens, pos: 0 };
    let v = p.expr().map_err(|e| format!("`{src}`: {e}"))?;
    if p.pos != p.tokens.len() {
        return Err(format!("`{src}`: trailing input"));
    }
    if !v.is_finite() {
        return Err(format!("`{src}` is not finite"));
    }
    Ok(v)
}

/// Plain real number or radian expression; used for coefficient lists too.
pub fn parse_list(src: &str) -> Result<Vec<f64>, String> {
    src.split(',').map(|s| parse_radians(s.trim())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_forms() {
        let cases = [
            ("pi/3", PI / 3.0),
            ("0.3pi", 0.3 * PI),
            ("0.3*pi", 0.3 * PI),
            ("π/4", PI / 4.0),
            ("PI/6", PI / 6.0),
            ("2*pi/5", 2.0 * PI / 5.0),
            ("(pi - 0.1)/2", (PI - 0.1) / 2.0),
            ("-pi/6", -PI / 6.0),
            ("0.25", 0.25),
            ("1e-3", 1e-3),
            ("2pi/7", 2.0 * PI / 7.0),
        ];
        for (src, want) in cases {
            assert!((parse_radians(src).unwrap() - want).abs() < 1e-15, "{src}");
        }
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "pie", "pi/", "(pi", "1..2", "x", "pi pi)", "1/0"] {
            assert!(parse_radians(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn lists() {
        let v = parse_list("pi/3, 0.3pi,pi/4").unwrap();
        assert_eq!(v.len(), 3);
        assert!((v[1] - 0.3 * PI).abs() < 1e-15);
    }
}
