//! Tokens, top-level declaration splitting and the layout rule for `do`
//! and `case ... of` blocks.

use std::fmt;

use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    ConId(String),
    Int(i64),
    Sym(&'static str),
    /// Virtual braces and separators inserted by the layout rule.
    VOpen,
    VSemi,
    VClose,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::ConId(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::VOpen => f.write_str("start of block"),
            Tok::VSemi => f.write_str("new line in block"),
            Tok::VClose => f.write_str("end of block"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    pub offset: usize,
}

/// Longest match first.
const SYMBOLS: &[&str] = &[
    ">>=", "`orElse`", "::", "->", "<-", "<>", "==", ">=", "<=", "&&", "||", "[]", "(", ")", "[", "]", "{", "}", ",", ";",
    "|", ":", "=", ">", "<", "+", "-", "*", ".", "\\", "λ", "_",
];

pub const KEYWORDS: &[&str] = &[
    "case", "of", "do", "let", "in", "if", "then", "else", "not", "readTVar", "writeTVar", "return", "retry",
    "tvar", "data", "invariant", "contract", "transaction",
];

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Splits `src` into raw tokens. Comments run from `--` to end of line.
pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut line_start = 0;
    let mut i = 0;
    let bytes = src.as_bytes();
    while i < src.len() {
        let rest = &src[i..];
        let c = rest.chars().next().unwrap();
        let col = src[line_start..i].chars().count() + 1;
        if c == '\n' {
            line += 1;
            i += 1;
            line_start = i;
            continue;
        }
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if rest.starts_with("--") && !rest[2..].starts_with(|ch: char| "!#$%&*+./<=>?@\\^|~:".contains(ch)) {
            while i < src.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let push = |tok: Tok, out: &mut Vec<Token>| out.push(Token { tok, line, col, offset: i });
        if c.is_ascii_digit() {
            let len = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
            let n: i64 = rest[..len]
                .parse()
                .map_err(|_| ParseError::Syntax { line, col, message: format!("integer literal `{}` out of range", &rest[..len]) })?;
            push(Tok::Int(n), &mut out);
            i += len;
            continue;
        }
        if c.is_alphabetic() && c != 'λ' || (c == '_' && rest[1..].starts_with(is_ident_char)) {
            let len = rest.find(|ch: char| !is_ident_char(ch)).unwrap_or(rest.len());
            let word = &rest[..len];
            let tok = if word.starts_with(char::is_uppercase) { Tok::ConId(word.into()) } else { Tok::Ident(word.into()) };
            push(tok, &mut out);
            i += len;
            continue;
        }
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                push(Tok::Sym(s), &mut out);
                i += s.len();
            }
            None => return Err(ParseError::Syntax { line, col, message: format!("unexpected character `{c}`") }),
        }
    }
    Ok(out)
}

/// Groups tokens into top-level declarations: a declaration starts with a
/// token in the first column.
pub fn split_declarations(tokens: Vec<Token>) -> Vec<Vec<Token>> {
    let mut out: Vec<Vec<Token>> = Vec::new();
    for t in tokens {
        match out.last_mut() {
            Some(cur) if t.col > 1 || cur.last().is_some_and(|l| l.line == t.line) => cur.push(t),
            _ => out.push(vec![t]),
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Ctx {
    Explicit,
    Implicit(usize),
    Bracket,
}

/// Inserts virtual braces after `of` and `do` when no `{` follows, and a
/// separator before every line that starts at the block's column.
pub fn layout(tokens: Vec<Token>) -> Vec<Token> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut stack: Vec<Ctx> = Vec::new();
    let mut open_next = false;
    let mut prev_line = 0;
    let virt = |tok: Tok, at: &Token| Token { tok, line: at.line, col: at.col, offset: at.offset };
    for t in tokens {
        let first_on_line = t.line != prev_line;
        prev_line = t.line;
        if open_next {
            open_next = false;
            if t.tok == Tok::Sym("{") {
                stack.push(Ctx::Explicit);
                out.push(t);
                continue;
            }
            stack.push(Ctx::Implicit(t.col));
            out.push(virt(Tok::VOpen, &t));
        } else if first_on_line {
            while let Some(Ctx::Implicit(c)) = stack.last() {
                if t.col < *c {
                    out.push(virt(Tok::VClose, &t));
                    stack.pop();
                } else {
                    if t.col == *c {
                        out.push(virt(Tok::VSemi, &t));
                    }
                    break;
                }
            }
        }
        match &t.tok {
            Tok::Sym("(") | Tok::Sym("[") => stack.push(Ctx::Bracket),
            Tok::Sym(")") | Tok::Sym("]") | Tok::Sym("}") | Tok::Sym(",") => {
                while let Some(Ctx::Implicit(_)) = stack.last() {
                    out.push(virt(Tok::VClose, &t));
                    stack.pop();
                }
                if t.tok != Tok::Sym(",") {
                    stack.pop();
                }
            }
            Tok::Ident(k) if k == "in" || k == "then" || k == "else" => {
                while let Some(Ctx::Implicit(_)) = stack.last() {
                    out.push(virt(Tok::VClose, &t));
                    stack.pop();
                }
            }
            Tok::Ident(k) if k == "of" || k == "do" => open_next = true,
            Tok::Sym("{") => stack.push(Ctx::Explicit),
            _ => {}
        }
        out.push(t);
    }
    if let Some(last) = out.last().cloned() {
        for c in stack.iter().rev() {
            if let Ctx::Implicit(_) = c {
                out.push(virt(Tok::VClose, &last));
            }
        }
    }
    out
}
