use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Comparison, Formula, Interval, Predicate};
use crate::signal::{SmoothInterval, StepInterval};

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedToken { expected: &'static str, found: String },
    BadNumber(String),
    InvalidInterval { a: usize, b: usize },
    InvalidSmoothInterval(&'static str),
}

/// Parse failure with a 1-based line and column.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{line}:{column}: {}", describe(.kind))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::UnexpectedChar(c) => alloc::format!("unexpected character `{c}`"),
        ParseErrorKind::UnexpectedToken { expected, found } => {
            alloc::format!("expected {expected}, found {found}")
        }
        ParseErrorKind::BadNumber(s) => alloc::format!("malformed number `{s}`"),
        ParseErrorKind::InvalidInterval { a, b } => {
            alloc::format!("invalid interval [{a},{b}]: lower bound exceeds upper bound")
        }
        ParseErrorKind::InvalidSmoothInterval(msg) => alloc::format!("invalid smooth interval: {msg}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    True,
    Always,
    Eventually,
    Until,
    Tilde,
    Amp,
    Bar,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Cmp(Comparison),
    Ident(String),
    Number(String),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => alloc::format!("identifier `{s}`"),
            Tok::Number(s) => alloc::format!("number `{s}`"),
            Tok::End => "end of input".to_string(),
            Tok::Cmp(c) => alloc::format!("`{}`", c.symbol()),
            other => alloc::format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::True => "TRUE",
            Tok::Always => "G",
            Tok::Eventually => "F",
            Tok::Until => "U",
            Tok::Tilde => "~",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            _ => "?",
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, column);
        let push = |out: &mut Vec<Spanned>, tok| {
            out.push(Spanned {
                tok,
                line: l0,
                column: c0,
            })
        };
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            column += 1;
            continue;
        }
        let single = match c {
            '~' => Some(Tok::Tilde),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Bar),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            push(&mut out, tok);
            i += 1;
            column += 1;
            continue;
        }
        if c == '>' || c == '<' {
            let eq = chars.get(i + 1) == Some(&'=');
            let cmp = match (c, eq) {
                ('>', false) => Comparison::Gt,
                ('>', true) => Comparison::Ge,
                ('<', false) => Comparison::Lt,
                _ => Comparison::Le,
            };
            push(&mut out, Tok::Cmp(cmp));
            let n = if eq { 2 } else { 1 };
            i += n;
            column += n;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            column += i - start;
            let tok = match word.as_str() {
                "TRUE" => Tok::True,
                "G" => Tok::Always,
                "F" => Tok::Eventually,
                "U" => Tok::Until,
                _ => Tok::Ident(word),
            };
            push(&mut out, tok);
            continue;
        }
        if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' {
            let start = i;
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                let exp_sign = (d == '-' || d == '+') && matches!(chars[i - 1], 'e' | 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let word: String = chars[start..i].iter().collect();
            column += i - start;
            push(&mut out, Tok::Number(word));
            continue;
        }
        return Err(ParseError {
            line,
            column,
            kind: ParseErrorKind::UnexpectedChar(c),
        });
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError {
            line: s.line,
            column: s.column,
            kind,
        }
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        self.error_here(ParseErrorKind::UnexpectedToken {
            expected,
            found: self.peek().describe(),
        })
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn phi(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.or_expr()?;
        while *self.peek() == Tok::Until {
            self.bump();
            let iv = self.interval()?;
            let rhs = self.or_expr()?;
            lhs = Formula::Until(iv, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn or_expr(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and_expr()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = Formula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::Not(Box::new(self.unary()?)))
            }
            Tok::Always => {
                self.bump();
                let iv = self.interval()?;
                Ok(Formula::Always(iv, Box::new(self.unary()?)))
            }
            Tok::Eventually => {
                self.bump();
                let iv = self.interval()?;
                Ok(Formula::Eventually(iv, Box::new(self.unary()?)))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::LParen => {
                self.bump();
                let f = self.phi()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(var) => {
                self.bump();
                let cmp = match self.peek() {
                    Tok::Cmp(c) => *c,
                    _ => return Err(self.unexpected("comparison operator")),
                };
                self.bump();
                let threshold = self.real()?;
                Ok(Formula::Pred(Predicate { var, cmp, threshold }))
            }
            _ => Err(self.unexpected("formula")),
        }
    }

    fn real(&mut self) -> Result<f64, ParseError> {
        match self.peek().clone() {
            Tok::Number(s) => {
                let v: f64 = s
                    .parse()
                    .map_err(|_| self.error_here(ParseErrorKind::BadNumber(s.clone())))?;
                if !v.is_finite() {
                    return Err(self.error_here(ParseErrorKind::BadNumber(s)));
                }
                self.bump();
                Ok(v)
            }
            _ => Err(self.unexpected("number")),
        }
    }

    fn uint(&mut self) -> Result<usize, ParseError> {
        match self.peek().clone() {
            Tok::Number(s) if s.bytes().all(|b| b.is_ascii_digit()) => {
                let v = s
                    .parse()
                    .map_err(|_| self.error_here(ParseErrorKind::BadNumber(s.clone())))?;
                self.bump();
                Ok(v)
            }
            _ => Err(self.unexpected("non-negative integer")),
        }
    }

    fn interval(&mut self) -> Result<Option<Interval>, ParseError> {
        match (self.peek(), self.peek2()) {
            (Tok::LBracket, _) => {
                let (line, column) = (self.toks[self.pos].line, self.toks[self.pos].column);
                self.bump();
                let a = self.uint()?;
                self.expect(Tok::Comma, "`,`")?;
                let b = self.uint()?;
                self.expect(Tok::RBracket, "`]`")?;
                let iv = StepInterval::new(a, b).map_err(|_| ParseError {
                    line,
                    column,
                    kind: ParseErrorKind::InvalidInterval { a, b },
                })?;
                Ok(Some(Interval::Steps(iv)))
            }
            (Tok::Tilde, Tok::LBracket) => {
                let (line, column) = (self.toks[self.pos].line, self.toks[self.pos].column);
                self.bump();
                self.bump();
                let mut vals = Vec::with_capacity(4);
                vals.push(self.real()?);
                while *self.peek() == Tok::Comma && vals.len() < 4 {
                    self.bump();
                    vals.push(self.real()?);
                }
                self.expect(Tok::RBracket, "`]`")?;
                if vals.len() < 3 {
                    return Err(ParseError {
                        line,
                        column,
                        kind: ParseErrorKind::InvalidSmoothInterval("expected a, b, c and optional eps"),
                    });
                }
                let eps = vals.get(3).copied().unwrap_or(0.0);
                let si = SmoothInterval::new(vals[0], vals[1], vals[2], eps).map_err(|e| ParseError {
                    line,
                    column,
                    kind: ParseErrorKind::InvalidSmoothInterval(match e {
                        crate::Error::InvalidSmoothInterval(m) => m,
                        _ => "invalid parameters",
                    }),
                })?;
                Ok(Some(Interval::Smooth(si)))
            }
            _ => Ok(None),
        }
    }
}

/// Parses the text syntax into a [`Formula`].
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let f = p.phi()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::format;
    use proptest::prelude::*;

    fn steps(a: usize, b: usize) -> Option<Interval> {
        Some(Interval::Steps(StepInterval::new(a, b).unwrap()))
    }

    #[test]
    fn parses_basic_forms() {
        assert_eq!(
            parse("G[0,5] (x > 0)").unwrap(),
            Formula::always(steps(0, 5), Formula::gt("x", 0.0))
        );
        assert_eq!(
            parse("(x > 0) U[1,3] (y < 2)").unwrap(),
            Formula::until(steps(1, 3), Formula::gt("x", 0.0), Formula::lt("y", 2.0))
        );
        assert_eq!(parse("~TRUE").unwrap(), Formula::not(Formula::True));
        assert_eq!(
            parse("x >= -1.5e-3").unwrap(),
            Formula::pred("x", Comparison::Ge, -1.5e-3)
        );
    }

    #[test]
    fn rejects_reversed_interval() {
        let err = parse("F[3,1] (x > 0)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::InvalidInterval { a: 3, b: 1 });
        assert_eq!((err.line, err.column), (1, 2));
    }

    #[test]
    fn reports_positions() {
        let err = parse("(x > 0) &\n  (y ? 1)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('?'));
        assert_eq!((err.line, err.column), (2, 6));
        let err = parse("(x > 0").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(matches!(err.kind, ParseErrorKind::UnexpectedToken { .. }));
        assert!(parse("x > 1 )").is_err());
        assert!(parse("G[0,1.5] (x > 0)").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn precedence() {
        // prefix > & > | > U, all left-associative
        let f = parse("a > 0 | b > 0 & c > 0 U d > 0").unwrap();
        let a = Formula::gt("a", 0.0);
        let b = Formula::gt("b", 0.0);
        let c = Formula::gt("c", 0.0);
        let d = Formula::gt("d", 0.0);
        assert_eq!(
            f,
            Formula::until(
                None,
                Formula::or(a.clone(), Formula::and(b.clone(), c.clone())),
                d.clone()
            )
        );
        let f = parse("G a > 0 & b > 0").unwrap();
        assert_eq!(f, Formula::and(Formula::always(None, a.clone()), b.clone()));
        let f = parse("a > 0 U b > 0 U c > 0").unwrap();
        assert_eq!(
            f,
            Formula::until(None, Formula::until(None, a.clone(), b.clone()), c.clone())
        );
        let f = parse("G ~[0.1,0.5,10] a > 0").unwrap();
        assert!(matches!(f, Formula::Always(Some(Interval::Smooth(_)), _)));
        let f = parse("G ~a > 0").unwrap();
        assert_eq!(f, Formula::always(None, Formula::not(a)));
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let names = prop_oneof![Just("x"), Just("y"), Just("speed"), Just("Gx"), Just("_u1")];
        let cmp = prop_oneof![
            Just(Comparison::Gt),
            Just(Comparison::Lt),
            Just(Comparison::Ge),
            Just(Comparison::Le)
        ];
        let leaf = prop_oneof![
            Just(Formula::True),
            (names, cmp, -1e3f64..1e3).prop_map(|(n, c, t)| Formula::pred(n, c, t)),
        ];
        let iv = prop_oneof![
            Just(None),
            (0usize..10, 0usize..10).prop_map(|(a, k)| steps(a, a + k)),
            (0.0f64..0.5, 0.01f64..0.5, 0.1f64..100.0, 0.0f64..0.4)
                .prop_map(|(a, w, c, e)| Some(Interval::Smooth(SmoothInterval::new(a, a + w, c, e).unwrap()))),
        ];
        leaf.prop_recursive(5, 64, 2, move |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
                (iv.clone(), inner.clone()).prop_map(|(i, f)| Formula::eventually(i, f)),
                (iv.clone(), inner.clone()).prop_map(|(i, f)| Formula::always(i, f)),
                (iv.clone(), inner.clone(), inner.clone()).prop_map(|(i, l, r)| Formula::until(i, l, r)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn format_then_parse_is_identity(f in arb_formula()) {
            let text = format(&f);
            prop_assert_eq!(parse(&text).unwrap(), f);
        }
    }
}
