//! Parsing of `(get-value ...)` responses into frame valuations.

use std::collections::BTreeMap;

use hrmv_core::expr::{Sort, Value};
use num::{BigInt, BigRational};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("malformed model response near `{0}`")]
    Malformed(String),
    #[error("cannot read `{text}` as a {sort} value")]
    BadValue { text: String, sort: Sort },
    #[error("model is missing `{0}`")]
    Missing(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' | ')' => tokens.push(c.to_string()),
            '|' => {
                let mut s = String::new();
                for d in chars.by_ref() {
                    if d == '|' {
                        break;
                    }
                    s.push(d);
                }
                tokens.push(s);
            }
            c if c.is_whitespace() => {}
            c => {
                let mut s = c.to_string();
                while let Some(&d) = chars.peek() {
                    if d.is_whitespace() || d == '(' || d == ')' || d == '|' {
                        break;
                    }
                    s.push(d);
                    chars.next();
                }
                tokens.push(s);
            }
        }
    }
    tokens
}

fn parse_sexp(tokens: &[String], pos: &mut usize) -> Result<Sexp, ModelError> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| ModelError::Malformed("<end>".to_string()))?;
    *pos += 1;
    if tok == "(" {
        let mut items = Vec::new();
        loop {
            match tokens.get(*pos) {
                Some(t) if t == ")" => {
                    *pos += 1;
                    return Ok(Sexp::List(items));
                }
                Some(_) => items.push(parse_sexp(tokens, pos)?),
                None => return Err(ModelError::Malformed("<end>".to_string())),
            }
        }
    } else if tok == ")" {
        Err(ModelError::Malformed(")".to_string()))
    } else {
        Ok(Sexp::Atom(tok.clone()))
    }
}

fn numeral(text: &str) -> Option<BigRational> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if int_part.is_empty() || !int_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    if !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: String = format!("{}{}", int_part, frac_part);
    let numer: BigInt = digits.parse().ok()?;
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(BigRational::new(numer, denom))
}

fn rational_of(sexp: &Sexp) -> Option<BigRational> {
    match sexp {
        Sexp::Atom(a) => numeral(a),
        Sexp::List(items) => match items.as_slice() {
            [Sexp::Atom(op), x] if op == "-" => rational_of(x).map(|r| -r),
            [Sexp::Atom(op), a, b] if op == "/" => {
                let (a, b) = (rational_of(a)?, rational_of(b)?);
                if b == BigRational::from(BigInt::from(0)) {
                    None
                } else {
                    Some(a / b)
                }
            }
            _ => None,
        },
    }
}

fn value_of(sexp: &Sexp, sort: Sort) -> Result<Value, ModelError> {
    let bad = || ModelError::BadValue {
        text: render(sexp),
        sort,
    };
    match sort {
        Sort::Unit => Ok(Value::Unit),
        Sort::Bool => match sexp {
            Sexp::Atom(a) if a == "true" => Ok(Value::Bool(true)),
            Sexp::Atom(a) if a == "false" => Ok(Value::Bool(false)),
            _ => Err(bad()),
        },
        Sort::Int => {
            let r = rational_of(sexp).ok_or_else(bad)?;
            if !r.is_integer() {
                return Err(bad());
            }
            use num::ToPrimitive;
            r.to_integer().to_i64().map(Value::Int).ok_or_else(bad)
        }
        Sort::Real => rational_of(sexp).map(Value::Real).ok_or_else(bad),
    }
}

fn render(sexp: &Sexp) -> String {
    match sexp {
        Sexp::Atom(a) => a.clone(),
        Sexp::List(items) => {
            let inner: Vec<String> = items.iter().map(render).collect();
            format!("({})", inner.join(" "))
        }
    }
}

/// Parse a `(get-value ...)` response into a map from frame-variable
/// names (`x@i`) to values, using `sorts` to read the numerals.
pub fn parse_values(
    text: &str,
    sorts: &BTreeMap<String, Sort>,
) -> Result<BTreeMap<String, Value>, ModelError> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let top = parse_sexp(&tokens, &mut pos)?;
    let Sexp::List(pairs) = top else {
        return Err(ModelError::Malformed(render(&top)));
    };
    let mut out = BTreeMap::new();
    for pair in &pairs {
        let Sexp::List(items) = pair else {
            return Err(ModelError::Malformed(render(pair)));
        };
        let [Sexp::Atom(name), value] = items.as_slice() else {
            return Err(ModelError::Malformed(render(pair)));
        };
        let sort = sorts
            .get(name)
            .copied()
            .ok_or_else(|| ModelError::Missing(name.clone()))?;
        out.insert(name.clone(), value_of(value, sort)?);
    }
    Ok(out)
}
