use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;

use super::{AutoRef, DslError, MapExpr};
use crate::transducer::{parse_automaton, Automaton};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Int(BigUint),
    Ident(String),
    Str(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Token)>, DslError> {
        let mut lexer = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let tok = lexer.next_token()?;
            let done = tok.1 == Token::End;
            out.push(tok);
            if done {
                return Ok(out);
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn next_token(&mut self) -> Result<(usize, Token), DslError> {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok((start, Token::End));
        };
        if c.is_ascii_digit() {
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let value = self.src[start..self.pos].parse().expect("ascii digits");
            return Ok((start, Token::Int(value)));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while self
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                self.pos += 1;
            }
            return Ok((start, Token::Ident(self.src[start..self.pos].to_string())));
        }
        if c == '"' {
            self.pos += 1;
            let body = self.pos;
            while self.peek().is_some_and(|c| c != '"') {
                self.pos += c_len(self.peek());
            }
            if self.peek().is_none() {
                return Err(DslError::Syntax {
                    pos: start,
                    message: "unterminated string".into(),
                });
            }
            let s = self.src[body..self.pos].to_string();
            self.pos += 1;
            return Ok((start, Token::Str(s)));
        }
        if "+-*^()[],".contains(c) {
            self.pos += 1;
            return Ok((start, Token::Sym(c)));
        }
        Err(DslError::Syntax {
            pos: start,
            message: format!("unexpected character `{c}`"),
        })
    }
}

fn c_len(c: Option<char>) -> usize {
    c.map_or(0, char::len_utf8)
}

type Loader<'l> = dyn Fn(&str) -> Result<Automaton, String> + 'l;

struct Parser<'l> {
    tokens: Vec<(usize, Token)>,
    at: usize,
    loader: &'l Loader<'l>,
}

/// Parses a map expression, reading `auto("...")` files from disk.
pub fn parse_map(text: &str) -> Result<MapExpr, DslError> {
    let loader = |path: &str| -> Result<Automaton, String> {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        parse_automaton(&text).map_err(|e| e.to_string())
    };
    parse_map_with(text, &loader)
}

/// Parses a map expression with a custom source for `auto("...")` references.
pub fn parse_map_with(
    text: &str,
    loader: &dyn Fn(&str) -> Result<Automaton, String>,
) -> Result<MapExpr, DslError> {
    let mut parser = Parser {
        tokens: Lexer::tokens(text)?,
        at: 0,
        loader,
    };
    let expr = parser.expr()?;
    match parser.peek() {
        Token::End => Ok(expr),
        _ => Err(parser.error("unexpected trailing input")),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.at].1
    }

    fn pos(&self) -> usize {
        self.tokens[self.at].0
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.at].1.clone();
        if tok != Token::End {
            self.at += 1;
        }
        tok
    }

    fn error(&self, message: &str) -> DslError {
        DslError::Syntax {
            pos: self.pos(),
            message: message.to_string(),
        }
    }

    fn eat(&mut self, sym: char) -> bool {
        if *self.peek() == Token::Sym(sym) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: char) -> Result<(), DslError> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{sym}`")))
        }
    }

    fn uint<T: TryFrom<u64>>(&mut self, what: &str) -> Result<T, DslError> {
        let message = format!("{what} must be a non-negative integer");
        match self.peek().clone() {
            Token::Int(v) => {
                let value = v
                    .to_u64()
                    .and_then(|v| T::try_from(v).ok())
                    .ok_or_else(|| self.error(&format!("{what} is too large")))?;
                self.at += 1;
                Ok(value)
            }
            _ => Err(self.error(&message)),
        }
    }

    fn expr(&mut self) -> Result<MapExpr, DslError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = MapExpr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = MapExpr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<MapExpr, DslError> {
        let mut lhs = self.factor()?;
        while self.eat('*') {
            lhs = MapExpr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<MapExpr, DslError> {
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.uint("exponent")?;
            return Ok(MapExpr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn parenthesized(&mut self) -> Result<MapExpr, DslError> {
        self.expect('(')?;
        let inner = self.expr()?;
        self.expect(')')?;
        Ok(inner)
    }

    fn signed_int(&mut self) -> Result<BigInt, DslError> {
        let negative = self.eat('-');
        match self.bump() {
            Token::Int(v) => {
                let v = BigInt::from(v);
                Ok(if negative { -v } else { v })
            }
            _ => {
                self.at -= 1;
                Err(self.error("expected an integer coefficient"))
            }
        }
    }

    fn atom(&mut self) -> Result<MapExpr, DslError> {
        let pos = self.pos();
        match self.peek().clone() {
            Token::Int(v) => {
                self.at += 1;
                Ok(MapExpr::Const(v))
            }
            Token::Sym('(') => self.parenthesized(),
            Token::Ident(name) => {
                self.at += 1;
                match name.as_str() {
                    "x" => Ok(MapExpr::Var),
                    "sigma" => {
                        let n = if self.eat('^') {
                            self.uint("shift count")?
                        } else {
                            1
                        };
                        Ok(MapExpr::Shift(n, Box::new(self.parenthesized()?)))
                    }
                    "C" => {
                        self.expect('(')?;
                        let inner = self.expr()?;
                        self.expect(',')?;
                        let m = self.uint("binomial index")?;
                        self.expect(')')?;
                        Ok(MapExpr::Binomial(Box::new(inner), m))
                    }
                    "mahler" => {
                        self.expect('[')?;
                        let mut coeffs = vec![self.signed_int()?];
                        while self.eat(',') {
                            coeffs.push(self.signed_int()?);
                        }
                        self.expect(']')?;
                        Ok(MapExpr::Mahler(coeffs, Box::new(self.parenthesized()?)))
                    }
                    "auto" => {
                        self.expect('(')?;
                        let path = match self.bump() {
                            Token::Str(s) => s,
                            _ => {
                                self.at -= 1;
                                return Err(self.error("expected a quoted file path"));
                            }
                        };
                        self.expect(')')?;
                        let reference = self.load(&path)?;
                        Ok(MapExpr::Auto(reference, Box::new(self.parenthesized()?)))
                    }
                    _ => Err(DslError::UnknownIdentifier { pos, name }),
                }
            }
            Token::End => Err(self.error("unexpected end of input")),
            _ => Err(self.error("expected an expression")),
        }
    }

    fn load(&self, path: &str) -> Result<AutoRef, DslError> {
        let automaton = (self.loader)(path).map_err(|message| DslError::AutomatonLoad {
            path: path.to_string(),
            message,
        })?;
        let lookahead = automaton
            .lookahead()
            .map_err(|e| DslError::AutomatonLoad {
                path: path.to_string(),
                message: e.to_string(),
            })?
            .ok_or_else(|| DslError::UnboundedLookahead {
                path: path.to_string(),
            })?;
        Ok(AutoRef {
            path: path.to_string(),
            automaton: Arc::new(automaton),
            lookahead,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::Prime;
    use MapExpr::*;

    fn c(v: u32) -> Box<MapExpr> {
        Box::new(Const(BigUint::from(v)))
    }

    #[test]
    fn parses_polynomial() {
        let e = parse_map("x^2 + x + 1").unwrap();
        assert_eq!(
            e,
            Add(
                Box::new(Add(Box::new(Pow(Box::new(Var), 2)), Box::new(Var))),
                c(1)
            )
        );
    }

    #[test]
    fn parses_shift_and_binomial() {
        assert_eq!(
            parse_map("sigma^2(3*x + 1)").unwrap(),
            Shift(2, Box::new(Add(Box::new(Mul(c(3), Box::new(Var))), c(1))))
        );
        assert_eq!(parse_map("sigma(x)").unwrap(), Shift(1, Box::new(Var)));
        assert_eq!(parse_map("C(x, 2)").unwrap(), Binomial(Box::new(Var), 2));
        assert_eq!(
            parse_map("mahler[0,-1, 2](x)").unwrap(),
            Mahler(
                vec![BigInt::from(0), BigInt::from(-1), BigInt::from(2)],
                Box::new(Var)
            )
        );
    }

    #[test]
    fn rejects_negative_exponent() {
        assert!(matches!(
            parse_map("x^-1"),
            Err(DslError::Syntax { pos: 2, .. })
        ));
    }

    #[test]
    fn reports_unknown_identifiers_and_positions() {
        assert_eq!(
            parse_map("x + y"),
            Err(DslError::UnknownIdentifier {
                pos: 4,
                name: "y".into()
            })
        );
        assert!(matches!(parse_map("(x + 1"), Err(DslError::Syntax { pos: 6, .. })));
        assert!(matches!(parse_map("x 1"), Err(DslError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_map("mahler[](x)"), Err(DslError::Syntax { .. })));
        assert!(matches!(parse_map("x $ 1"), Err(DslError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_map(""), Err(DslError::Syntax { pos: 0, .. })));
    }

    #[test]
    fn auto_uses_loader() {
        let two = Prime::new(2).unwrap();
        let loader = |path: &str| -> Result<Automaton, String> {
            match path {
                "shift2" => Ok(Automaton::shift(2, two)),
                _ => Err("no such file".into()),
            }
        };
        let e = parse_map_with("auto(\"shift2\")(x + 1)", &loader).unwrap();
        assert_eq!(e.lookahead(two), 2);
        assert_eq!(e.to_string(), "auto(\"shift2\")((x + 1))");
        assert!(matches!(
            parse_map_with("auto(\"missing\")(x)", &loader),
            Err(DslError::AutomatonLoad { .. })
        ));
    }
}
