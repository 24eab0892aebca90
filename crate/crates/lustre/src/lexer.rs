//! Hand-rolled lexer for the Lustre subset. Tracks line/column for error
//! reporting; `--` comments run to end of line; `(* ... *)` comments are
//! skipped except `(*@contract`, which opens a contract section ended by
//! `*)`.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(String),
    Real(String),
    // Keywords.
    Node,
    Returns,
    Var,
    Let,
    Tel,
    If,
    Then,
    Else,
    Pre,
    Not,
    And,
    Or,
    True,
    False,
    Assume,
    Guarantee,
    // Punctuation and operators.
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    Eq,
    Plus,
    Minus,
    Star,
    Slash,
    Arrow,   // ->
    Implies, // =>
    Le,
    Lt,
    Ge,
    Gt,
    ContractOpen,  // (*@contract
    ContractClose, // *)
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            Tok::Ident(s) => return write!(f, "identifier `{}`", s),
            Tok::Int(s) | Tok::Real(s) => return write!(f, "literal `{}`", s),
            Tok::Node => "node",
            Tok::Returns => "returns",
            Tok::Var => "var",
            Tok::Let => "let",
            Tok::Tel => "tel",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::Pre => "pre",
            Tok::Not => "not",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Assume => "assume",
            Tok::Guarantee => "guarantee",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Eq => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Arrow => "->",
            Tok::Implies => "=>",
            Tok::Le => "<=",
            Tok::Lt => "<",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            Tok::ContractOpen => "(*@contract",
            Tok::ContractClose => "*)",
            Tok::Eof => "end of input",
        };
        write!(f, "`{}`", text)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexError {
    #[error("{pos}: unexpected character `{ch}`")]
    BadChar { pos: Pos, ch: char },
    #[error("{pos}: unterminated comment")]
    UnterminatedComment { pos: Pos },
    #[error("{pos}: malformed number `{text}`")]
    BadNumber { pos: Pos, text: String },
}

pub fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, LexError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let mut in_contract = false;

    macro_rules! pos {
        () => {
            Pos { line, col }
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let at = |k: usize| chars.get(i + k).copied();
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '-' if at(1) == Some('-') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' if at(1) == Some('*') => {
                // `(*@contract` opens a contract section; any other
                // `(* ... *)` is a comment.
                let tag: String = chars[i..].iter().take(11).collect();
                if tag == "(*@contract" {
                    tokens.push((Tok::ContractOpen, pos!()));
                    i += 11;
                    col += 11;
                    in_contract = true;
                } else {
                    let start = pos!();
                    i += 2;
                    col += 2;
                    loop {
                        match (chars.get(i), chars.get(i + 1)) {
                            (Some('*'), Some(')')) => {
                                i += 2;
                                col += 2;
                                break;
                            }
                            (Some('\n'), _) => {
                                i += 1;
                                line += 1;
                                col = 1;
                            }
                            (Some(_), _) => {
                                i += 1;
                                col += 1;
                            }
                            (None, _) => {
                                return Err(LexError::UnterminatedComment { pos: start })
                            }
                        }
                    }
                }
            }
            '*' if at(1) == Some(')') && in_contract => {
                tokens.push((Tok::ContractClose, pos!()));
                in_contract = false;
                i += 2;
                col += 2;
            }
            '-' if at(1) == Some('>') => {
                tokens.push((Tok::Arrow, pos!()));
                i += 2;
                col += 2;
            }
            '=' if at(1) == Some('>') => {
                tokens.push((Tok::Implies, pos!()));
                i += 2;
                col += 2;
            }
            '<' if at(1) == Some('=') => {
                tokens.push((Tok::Le, pos!()));
                i += 2;
                col += 2;
            }
            '>' if at(1) == Some('=') => {
                tokens.push((Tok::Ge, pos!()));
                i += 2;
                col += 2;
            }
            '(' => {
                tokens.push((Tok::LParen, pos!()));
                i += 1;
                col += 1;
            }
            ')' => {
                tokens.push((Tok::RParen, pos!()));
                i += 1;
                col += 1;
            }
            ';' => {
                tokens.push((Tok::Semi, pos!()));
                i += 1;
                col += 1;
            }
            ':' => {
                tokens.push((Tok::Colon, pos!()));
                i += 1;
                col += 1;
            }
            ',' => {
                tokens.push((Tok::Comma, pos!()));
                i += 1;
                col += 1;
            }
            '=' => {
                tokens.push((Tok::Eq, pos!()));
                i += 1;
                col += 1;
            }
            '+' => {
                tokens.push((Tok::Plus, pos!()));
                i += 1;
                col += 1;
            }
            '-' => {
                tokens.push((Tok::Minus, pos!()));
                i += 1;
                col += 1;
            }
            '*' => {
                tokens.push((Tok::Star, pos!()));
                i += 1;
                col += 1;
            }
            '/' => {
                tokens.push((Tok::Slash, pos!()));
                i += 1;
                col += 1;
            }
            '<' => {
                tokens.push((Tok::Lt, pos!()));
                i += 1;
                col += 1;
            }
            '>' => {
                tokens.push((Tok::Gt, pos!()));
                i += 1;
                col += 1;
            }
            c if c.is_ascii_digit() => {
                let start = pos!();
                let mut text = String::new();
                let mut dotted = false;
                while let Some(&d) = chars.get(i) {
                    if d.is_ascii_digit() {
                        text.push(d);
                    } else if d == '.' && !dotted && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit())
                    {
                        text.push(d);
                        dotted = true;
                    } else {
                        break;
                    }
                    i += 1;
                    col += 1;
                }
                if text.ends_with('.') {
                    return Err(LexError::BadNumber { pos: start, text });
                }
                tokens.push((
                    if dotted {
                        Tok::Real(text)
                    } else {
                        Tok::Int(text)
                    },
                    start,
                ));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = pos!();
                let mut text = String::new();
                while let Some(&d) = chars.get(i) {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        text.push(d);
                        i += 1;
                        col += 1;
                    } else {
                        break;
                    }
                }
                let tok = match text.as_str() {
                    "node" => Tok::Node,
                    "returns" => Tok::Returns,
                    "var" => Tok::Var,
                    "let" => Tok::Let,
                    "tel" => Tok::Tel,
                    "if" => Tok::If,
                    "then" => Tok::Then,
                    "else" => Tok::Else,
                    "pre" => Tok::Pre,
                    "not" => Tok::Not,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "assume" => Tok::Assume,
                    "guarantee" => Tok::Guarantee,
                    _ => Tok::Ident(text),
                };
                tokens.push((tok, start));
            }
            ch => return Err(LexError::BadChar { pos: pos!(), ch }),
        }
    }
    tokens.push((Tok::Eof, pos!()));
    Ok(tokens)
}
