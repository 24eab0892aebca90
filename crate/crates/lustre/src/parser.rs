//! Recursive-descent parser for the Lustre subset.
//!
//! Precedence, loosest first: `->`, `=>`, `or`, `and`, comparisons,
//! additive, multiplicative, unary `-`/`not`/`pre`, primaries. Node calls
//! are only admitted as the entire right-hand side of an equation, which
//! the elaborator relies on.

use num::BigRational;
use thiserror::Error;

use crate::ast::*;
use crate::lexer::{lex, LexError, Pos, Tok};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("{pos}: expected {expected}, found {found}")]
    Expected {
        pos: Pos,
        expected: String,
        found: Tok,
    },
    #[error("{pos}: node calls are only allowed as the whole right-hand side of an equation")]
    NestedCall { pos: Pos },
    #[error("{pos}: cannot read `{text}` as a real literal")]
    BadReal { pos: Pos, text: String },
}

struct Parser {
    tokens: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].0
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].1
    }

    fn next(&mut self) -> Tok {
        let t = self.tokens[self.at].0.clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == want {
            self.next();
            Ok(())
        } else {
            Err(ParseError::Expected {
                pos: self.pos(),
                expected: what.to_string(),
                found: self.peek().clone(),
            })
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.next();
                Ok(name)
            }
            found => Err(ParseError::Expected {
                pos: self.pos(),
                expected: what.to_string(),
                found,
            }),
        }
    }

    fn ty(&mut self) -> Result<Ty, ParseError> {
        let name = self.ident("a type (bool, int or real)")?;
        match name.as_str() {
            "bool" => Ok(Ty::Bool),
            "int" => Ok(Ty::Int),
            "real" => Ok(Ty::Real),
            _ => Err(ParseError::Expected {
                pos: self.pos(),
                expected: "a type (bool, int or real)".to_string(),
                found: Tok::Ident(name),
            }),
        }
    }

    /// `a, b : bool; c : real` — groups share a type.
    fn params(&mut self, terminator: &Tok) -> Result<Vec<Param>, ParseError> {
        let mut out = Vec::new();
        while self.peek() != terminator {
            let mut names = vec![self.ident("a parameter name")?];
            while self.peek() == &Tok::Comma {
                self.next();
                names.push(self.ident("a parameter name")?);
            }
            self.expect(&Tok::Colon, "`:`")?;
            let ty = self.ty()?;
            out.extend(names.into_iter().map(|name| Param { name, ty }));
            if self.peek() == &Tok::Semi {
                self.next();
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.arrow()
    }

    fn arrow(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.implies()?;
        if self.peek() == &Tok::Arrow {
            self.next();
            let rhs = self.arrow()?;
            Ok(Expr::Arrow(Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn implies(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.or()?;
        if self.peek() == &Tok::Implies {
            self.next();
            let rhs = self.implies()?;
            Ok(Expr::Bin(BinOp::Implies, Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.and()?;
        while self.peek() == &Tok::Or {
            self.next();
            let rhs = self.and()?;
            lhs = Expr::Bin(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.cmp()?;
        while self.peek() == &Tok::And {
            self.next();
            let rhs = self.cmp()?;
            lhs = Expr::Bin(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cmp(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Le => BinOp::Le,
            Tok::Lt => BinOp::Lt,
            Tok::Ge => BinOp::Ge,
            Tok::Gt => BinOp::Gt,
            _ => return Ok(lhs),
        };
        self.next();
        let rhs = self.additive()?;
        Ok(Expr::Bin(op, Box::new(lhs), Box::new(rhs)))
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.multiplicative()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.next();
                Ok(Expr::Un(UnOp::Neg, Box::new(self.unary()?)))
            }
            Tok::Not => {
                self.next();
                Ok(Expr::Un(UnOp::Not, Box::new(self.unary()?)))
            }
            Tok::Pre => {
                self.next();
                Ok(Expr::Pre(Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::True => {
                self.next();
                Ok(Expr::Bool(true))
            }
            Tok::False => {
                self.next();
                Ok(Expr::Bool(false))
            }
            Tok::Int(text) => {
                self.next();
                let n: i64 = text.parse().map_err(|_| ParseError::BadReal {
                    pos: self.pos(),
                    text: text.clone(),
                })?;
                Ok(Expr::Int(n))
            }
            Tok::Real(text) => {
                self.next();
                let value: BigRational =
                    parse_decimal(&text).ok_or_else(|| ParseError::BadReal {
                        pos: self.pos(),
                        text: text.clone(),
                    })?;
                Ok(Expr::Real(value, text))
            }
            Tok::Ident(name) => {
                let pos = self.pos();
                self.next();
                if self.peek() == &Tok::LParen {
                    // A call; only legal at the top of an equation, which
                    // `equation` enforces by re-checking the result.
                    self.next();
                    let mut args = Vec::new();
                    if self.peek() != &Tok::RParen {
                        args.push(self.expr()?);
                        while self.peek() == &Tok::Comma {
                            self.next();
                            args.push(self.expr()?);
                        }
                    }
                    self.expect(&Tok::RParen, "`)`")?;
                    for a in &args {
                        if contains_call(a) {
                            return Err(ParseError::NestedCall { pos });
                        }
                    }
                    Ok(Expr::Call(name, args))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Tok::If => {
                self.next();
                let c = self.expr()?;
                self.expect(&Tok::Then, "`then`")?;
                let t = self.expr()?;
                self.expect(&Tok::Else, "`else`")?;
                let f = self.expr()?;
                Ok(Expr::Ite(Box::new(c), Box::new(t), Box::new(f)))
            }
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            found => Err(ParseError::Expected {
                pos: self.pos(),
                expected: "an expression".to_string(),
                found,
            }),
        }
    }

    fn equation(&mut self) -> Result<Equation, ParseError> {
        let pos = self.pos();
        let mut lhs = vec![self.ident("a variable name")?];
        while self.peek() == &Tok::Comma {
            self.next();
            lhs.push(self.ident("a variable name")?);
        }
        self.expect(&Tok::Eq, "`=`")?;
        let rhs = self.expr()?;
        self.expect(&Tok::Semi, "`;`")?;
        if contains_call_below_top(&rhs) {
            return Err(ParseError::NestedCall { pos });
        }
        Ok(Equation { lhs, rhs })
    }

    fn contract(&mut self) -> Result<ContractSpec, ParseError> {
        let mut spec = ContractSpec::default();
        loop {
            match self.peek() {
                Tok::Assume => {
                    self.next();
                    spec.assumes.push(self.expr()?);
                    self.expect(&Tok::Semi, "`;`")?;
                }
                Tok::Guarantee => {
                    self.next();
                    spec.guarantees.push(self.expr()?);
                    self.expect(&Tok::Semi, "`;`")?;
                }
                _ => break,
            }
        }
        self.expect(&Tok::ContractClose, "`*)`")?;
        Ok(spec)
    }

    fn node(&mut self) -> Result<NodeDecl, ParseError> {
        self.expect(&Tok::Node, "`node`")?;
        let name = self.ident("a node name")?;
        self.expect(&Tok::LParen, "`(`")?;
        let inputs = self.params(&Tok::RParen)?;
        self.expect(&Tok::RParen, "`)`")?;
        self.expect(&Tok::Returns, "`returns`")?;
        self.expect(&Tok::LParen, "`(`")?;
        let outputs = self.params(&Tok::RParen)?;
        self.expect(&Tok::RParen, "`)`")?;
        self.expect(&Tok::Semi, "`;`")?;
        let contract = if self.peek() == &Tok::ContractOpen {
            self.next();
            Some(self.contract()?)
        } else {
            None
        };
        let locals = if self.peek() == &Tok::Var {
            self.next();
            let locals = self.params(&Tok::Let)?;
            if self.peek() == &Tok::Semi {
                self.next();
            }
            locals
        } else {
            Vec::new()
        };
        self.expect(&Tok::Let, "`let`")?;
        let mut equations = Vec::new();
        while self.peek() != &Tok::Tel {
            equations.push(self.equation()?);
        }
        self.expect(&Tok::Tel, "`tel`")?;
        if self.peek() == &Tok::Semi {
            self.next();
        }
        Ok(NodeDecl {
            name,
            inputs,
            outputs,
            contract,
            locals,
            equations,
        })
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut nodes = Vec::new();
        while self.peek() != &Tok::Eof {
            nodes.push(self.node()?);
        }
        Ok(Program { nodes })
    }
}

fn contains_call(e: &Expr) -> bool {
    match e {
        Expr::Call(..) => true,
        Expr::Bool(_) | Expr::Int(_) | Expr::Real(..) | Expr::Var(_) => false,
        Expr::Un(_, a) | Expr::Pre(a) => contains_call(a),
        Expr::Bin(_, a, b) | Expr::Arrow(a, b) => contains_call(a) || contains_call(b),
        Expr::Ite(c, t, f) => contains_call(c) || contains_call(t) || contains_call(f),
    }
}

fn contains_call_below_top(e: &Expr) -> bool {
    match e {
        Expr::Call(_, args) => args.iter().any(contains_call),
        _ => contains_call(e),
    }
}

/// Exact decimal-to-rational conversion (`0.0582` → 582/10000).
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    use num::BigInt;
    let (int_part, frac_part) = text.split_once('.')?;
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
        || int_part.is_empty()
        || frac_part.is_empty()
    {
        return None;
    }
    let digits: String = format!("{}{}", int_part, frac_part);
    let numer: BigInt = digits.parse().ok()?;
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(BigRational::new(numer, denom))
}

/// Parse a full program.
pub fn parse(text: &str) -> Result<Program, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, at: 0 };
    p.program()
}
