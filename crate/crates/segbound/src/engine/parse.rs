//! Query text parsing.
//!
//! Grammar (whitespace-insensitive, byte offsets reported on error):
//!
//! ```text
//! query := ar
//! ar    := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | 'sqrt' '(' ar ')' | primary
//! primary := NUMBER | '(' ar ')' | agg | stat
//! agg   := 'Sum' '(' tse (',' INT ',' INT)? ')'
//! stat  := ('Mu' | 'Sigma') '(' tse ')'
//!        | 'Corr' '(' tse ',' tse ')'
//!        | 'CCorr' '(' tse ',' tse ',' INT ')'
//!        | 'ACorr' '(' tse ',' INT ')'
//! tse   := tterm (('+' | '-') tterm)*
//! tterm := tprimary ('*' tprimary)*
//! tprimary := IDENT
//!        | 'Constant' '(' NUMBER ',' INT ',' INT ')'
//!        | 'Shift' '(' tse ',' INT ')'
//!        | '(' tse ')'
//! ```
//!
//! `CCorr(e1, e2, m)` and `ACorr(e, m)` are sugar and expand at parse time
//! into `Corr` with a shifted second operand.

use crate::core::Domain;
use crate::error::{Error, Result};
use std::fmt;

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

/// Scalar-level operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArOp {
    fn symbol(&self) -> char {
        match self {
            ArOp::Add => '+',
            ArOp::Sub => '-',
            ArOp::Mul => '*',
            ArOp::Div => '/',
        }
    }
}

/// Series-level operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TseOp {
    Add,
    Sub,
    Mul,
}

impl TseOp {
    fn symbol(&self) -> char {
        match self {
            TseOp::Add => '+',
            TseOp::Sub => '-',
            TseOp::Mul => '*',
        }
    }
}

/// A time-series expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Tse {
    /// Reference to a stored series by id.
    Ref(String),
    /// A constant series `value` on an explicit domain.
    Constant { value: f64, domain: Domain },
    /// The inner expression translated by `offset` positions.
    Shift { inner: Box<Tse>, offset: i64 },
    /// Element-wise combination over the domain intersection.
    Binary { op: TseOp, lhs: Box<Tse>, rhs: Box<Tse> },
}

/// A statistic over series expressions.
#[derive(Debug, Clone, PartialEq)]
pub enum StatExpr {
    /// Mean over the expression's domain.
    Mu(Tse),
    /// Population standard deviation over the expression's domain.
    Sigma(Tse),
    /// Pearson correlation over the operands' domain intersection.
    Corr(Box<Tse>, Box<Tse>),
}

/// A parsed query: scalar arithmetic over aggregates and statistics.
#[derive(Debug, Clone, PartialEq)]
pub enum TsaAst {
    /// Numeric literal.
    Number(f64),
    /// Binary scalar arithmetic.
    Binary { op: ArOp, lhs: Box<TsaAst>, rhs: Box<TsaAst> },
    /// Square root.
    Sqrt(Box<TsaAst>),
    /// `Sum(tse)` or `Sum(tse, a, b)` over an explicit range.
    Agg { tse: Tse, range: Option<Domain> },
    /// Statistic.
    Stat(StatExpr),
}

impl fmt::Display for Tse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tse::Ref(id) => write!(f, "{id}"),
            Tse::Constant { value, domain } => {
                write!(f, "Constant({}, {}, {})", value, domain.a, domain.b)
            }
            Tse::Shift { inner, offset } => write!(f, "Shift({inner}, {offset})"),
            Tse::Binary { op, lhs, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
        }
    }
}

impl fmt::Display for StatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatExpr::Mu(e) => write!(f, "Mu({e})"),
            StatExpr::Sigma(e) => write!(f, "Sigma({e})"),
            StatExpr::Corr(a, b) => write!(f, "Corr({a}, {b})"),
        }
    }
}

impl fmt::Display for TsaAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TsaAst::Number(v) => write!(f, "{v}"),
            TsaAst::Binary { op, lhs, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
            TsaAst::Sqrt(inner) => write!(f, "sqrt({inner})"),
            TsaAst::Agg { tse, range: None } => write!(f, "Sum({tse})"),
            TsaAst::Agg { tse, range: Some(d) } => write!(f, "Sum({tse}, {}, {})", d.a, d.b),
            TsaAst::Stat(s) => write!(f, "{s}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(v) => format!("number {v}"),
            Token::Ident(s) => format!("'{s}'"),
            Token::Plus => "'+'".into(),
            Token::Minus => "'-'".into(),
            Token::Star => "'*'".into(),
            Token::Slash => "'/'".into(),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::Comma => "','".into(),
            Token::Eof => "end of input".into(),
        }
    }
}

fn lex(input: &str) -> Result<Vec<(Token, usize)>> {
    let bytes = input.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                tokens.push((Token::Plus, i));
                i += 1;
            }
            '-' => {
                tokens.push((Token::Minus, i));
                i += 1;
            }
            '*' => {
                tokens.push((Token::Star, i));
                i += 1;
            }
            '/' => {
                tokens.push((Token::Slash, i));
                i += 1;
            }
            '(' => {
                tokens.push((Token::LParen, i));
                i += 1;
            }
            ')' => {
                tokens.push((Token::RParen, i));
                i += 1;
            }
            ',' => {
                tokens.push((Token::Comma, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &input[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| Error::parse(start, format!("bad number '{text}'")))?;
                if !value.is_finite() {
                    return Err(Error::parse(start, format!("number '{text}' out of range")));
                }
                tokens.push((Token::Number(value), start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push((Token::Ident(input[start..i].to_string()), start));
            }
            _ => return Err(Error::parse(i, format!("unexpected character '{c}'"))),
        }
    }
    tokens.push((Token::Eof, input.len()));
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, token: Token, context: &str) -> Result<()> {
        if *self.peek() == token {
            self.advance();
            Ok(())
        } else {
            Err(Error::parse(
                self.offset(),
                format!("expected {} {context}, found {}", token.describe(), self.peek().describe()),
            ))
        }
    }

    // -- scalar level -------------------------------------------------------

    fn parse_ar(&mut self) -> Result<TsaAst> {
        let mut lhs = self.parse_ar_term()?;
        loop {
            let op = match self.peek() {
                Token::Plus => ArOp::Add,
                Token::Minus => ArOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_ar_term()?;
            lhs = TsaAst::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn parse_ar_term(&mut self) -> Result<TsaAst> {
        let mut lhs = self.parse_ar_unary()?;
        loop {
            let op = match self.peek() {
                Token::Star => ArOp::Mul,
                Token::Slash => ArOp::Div,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_ar_unary()?;
            lhs = TsaAst::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn parse_ar_unary(&mut self) -> Result<TsaAst> {
        if *self.peek() == Token::Minus {
            self.advance();
            let inner = self.parse_ar_unary()?;
            // Fold negation into literals so -3 parses as the number -3.
            return Ok(match inner {
                TsaAst::Number(v) => TsaAst::Number(-v),
                other => TsaAst::Binary {
                    op: ArOp::Sub,
                    lhs: Box::new(TsaAst::Number(0.0)),
                    rhs: Box::new(other),
                },
            });
        }
        self.parse_ar_primary()
    }

    fn parse_ar_primary(&mut self) -> Result<TsaAst> {
        let offset = self.offset();
        match self.peek().clone() {
            Token::Number(v) => {
                self.advance();
                Ok(TsaAst::Number(v))
            }
            Token::LParen => {
                self.advance();
                let inner = self.parse_ar()?;
                self.expect(Token::RParen, "to close parenthesized expression")?;
                Ok(inner)
            }
            Token::Ident(name) => match name.as_str() {
                "sqrt" => {
                    self.advance();
                    self.expect(Token::LParen, "after sqrt")?;
                    let inner = self.parse_ar()?;
                    self.expect(Token::RParen, "to close sqrt")?;
                    Ok(TsaAst::Sqrt(Box::new(inner)))
                }
                "Sum" => {
                    self.advance();
                    self.expect(Token::LParen, "after Sum")?;
                    let tse = self.parse_tse()?;
                    let range = if *self.peek() == Token::Comma {
                        self.advance();
                        let a = self.parse_int("range start")?;
                        self.expect(Token::Comma, "between range bounds")?;
                        let b = self.parse_int("range end")?;
                        if a > b {
                            return Err(Error::parse(
                                offset,
                                format!("empty range [{a}, {b}] in Sum"),
                            ));
                        }
                        Some(Domain { a, b })
                    } else {
                        None
                    };
                    self.expect(Token::RParen, "to close Sum")?;
                    Ok(TsaAst::Agg { tse, range })
                }
                "Mu" | "Sigma" => {
                    self.advance();
                    self.expect(Token::LParen, "after statistic")?;
                    let e = self.parse_tse()?;
                    self.expect(Token::RParen, "to close statistic")?;
                    Ok(TsaAst::Stat(if name == "Mu" {
                        StatExpr::Mu(e)
                    } else {
                        StatExpr::Sigma(e)
                    }))
                }
                "Corr" => {
                    self.advance();
                    self.expect(Token::LParen, "after Corr")?;
                    let e1 = self.parse_tse()?;
                    self.expect(Token::Comma, "between Corr operands")?;
                    let e2 = self.parse_tse()?;
                    self.expect(Token::RParen, "to close Corr")?;
                    Ok(TsaAst::Stat(StatExpr::Corr(Box::new(e1), Box::new(e2))))
                }
                "CCorr" => {
                    self.advance();
                    self.expect(Token::LParen, "after CCorr")?;
                    let e1 = self.parse_tse()?;
                    self.expect(Token::Comma, "between CCorr operands")?;
                    let e2 = self.parse_tse()?;
                    self.expect(Token::Comma, "before CCorr lag")?;
                    let m = self.parse_int("lag")?;
                    self.expect(Token::RParen, "to close CCorr")?;
                    let shifted = Tse::Shift { inner: Box::new(e2), offset: m };
                    Ok(TsaAst::Stat(StatExpr::Corr(Box::new(e1), Box::new(shifted))))
                }
                "ACorr" => {
                    self.advance();
                    self.expect(Token::LParen, "after ACorr")?;
                    let e = self.parse_tse()?;
                    self.expect(Token::Comma, "before ACorr lag")?;
                    let m = self.parse_int("lag")?;
                    self.expect(Token::RParen, "to close ACorr")?;
                    let shifted = Tse::Shift { inner: Box::new(e.clone()), offset: m };
                    Ok(TsaAst::Stat(StatExpr::Corr(Box::new(e), Box::new(shifted))))
                }
                _ => Err(Error::parse(
                    offset,
                    format!(
                        "series reference '{name}' is only valid inside Sum or a statistic"
                    ),
                )),
            },
            other => Err(Error::parse(
                offset,
                format!("expected a number, '(', Sum, sqrt, or a statistic, found {}", other.describe()),
            )),
        }
    }

    // -- series level -------------------------------------------------------

    fn parse_tse(&mut self) -> Result<Tse> {
        let mut lhs = self.parse_tse_term()?;
        loop {
            let op = match self.peek() {
                Token::Plus => TseOp::Add,
                Token::Minus => TseOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_tse_term()?;
            lhs = Tse::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn parse_tse_term(&mut self) -> Result<Tse> {
        let mut lhs = self.parse_tse_primary()?;
        while *self.peek() == Token::Star {
            self.advance();
            let rhs = self.parse_tse_primary()?;
            lhs = Tse::Binary { op: TseOp::Mul, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn parse_tse_primary(&mut self) -> Result<Tse> {
        let offset = self.offset();
        match self.peek().clone() {
            Token::LParen => {
                self.advance();
                let inner = self.parse_tse()?;
                self.expect(Token::RParen, "to close parenthesized series expression")?;
                Ok(inner)
            }
            Token::Ident(name) => match name.as_str() {
                "Constant" => {
                    self.advance();
                    self.expect(Token::LParen, "after Constant")?;
                    let value = self.parse_number("constant value")?;
                    self.expect(Token::Comma, "after constant value")?;
                    let a = self.parse_int("domain start")?;
                    self.expect(Token::Comma, "between domain bounds")?;
                    let b = self.parse_int("domain end")?;
                    self.expect(Token::RParen, "to close Constant")?;
                    let domain = Domain::new(a, b)
                        .map_err(|e| Error::parse(offset, e.to_string()))?;
                    Ok(Tse::Constant { value, domain })
                }
                "Shift" => {
                    self.advance();
                    self.expect(Token::LParen, "after Shift")?;
                    let inner = self.parse_tse()?;
                    self.expect(Token::Comma, "before shift offset")?;
                    let k = self.parse_int("shift offset")?;
                    self.expect(Token::RParen, "to close Shift")?;
                    Ok(Tse::Shift { inner: Box::new(inner), offset: k })
                }
                "Sum" | "Mu" | "Sigma" | "Corr" | "CCorr" | "ACorr" | "sqrt" => {
                    Err(Error::parse(
                        offset,
                        format!("'{name}' is a scalar construct and cannot appear inside a series expression"),
                    ))
                }
                _ => {
                    self.advance();
                    Ok(Tse::Ref(name))
                }
            },
            other => Err(Error::parse(
                offset,
                format!(
                    "expected a series reference, Constant, Shift, or '(', found {}",
                    other.describe()
                ),
            )),
        }
    }

    // -- terminals ----------------------------------------------------------

    fn parse_number(&mut self, what: &str) -> Result<f64> {
        let negative = if *self.peek() == Token::Minus {
            self.advance();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Token::Number(v) => {
                self.advance();
                Ok(if negative { -v } else { v })
            }
            other => Err(Error::parse(
                self.offset(),
                format!("expected {what}, found {}", other.describe()),
            )),
        }
    }

    fn parse_int(&mut self, what: &str) -> Result<i64> {
        let offset = self.offset();
        let v = self.parse_number(what)?;
        if v.fract() != 0.0 || v.abs() > 2f64.powi(53) {
            return Err(Error::parse(offset, format!("expected integer {what}, got {v}")));
        }
        Ok(v as i64)
    }
}

/// Parses query text into an AST.
///
/// # Example
///
/// ```
/// use segbound::engine::parse;
/// let ast = parse("Sum(T1 * T2) - Sum(T1) * Sum(T2)").unwrap();
/// assert_eq!(ast.to_string(), "(Sum((T1 * T2)) - (Sum(T1) * Sum(T2)))");
/// ```
pub fn parse(input: &str) -> Result<TsaAst> {
    let tokens = lex(input)?;
    let mut parser = Parser { tokens, pos: 0 };
    let ast = parser.parse_ar()?;
    if *parser.peek() != Token::Eof {
        return Err(Error::parse(
            parser.offset(),
            format!("unexpected {} after expression", parser.peek().describe()),
        ));
    }
    Ok(ast)
}
