//! Cheap static screening of generated `score_state` programs.
//!
//! Works on a token stream with comments and string literals removed, so a
//! forbidden word inside a string or comment is not flagged.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Violation {
    ForbiddenImport,
    ForbiddenWhile,
    ExtraDefinition,
    ForbiddenRandom,
    BadSignature,
}

impl Violation {
    pub fn code(self) -> &'static str {
        match self {
            Violation::ForbiddenImport => "FORBIDDEN_IMPORT",
            Violation::ForbiddenWhile => "FORBIDDEN_WHILE",
            Violation::ExtraDefinition => "EXTRA_DEFINITION",
            Violation::ForbiddenRandom => "FORBIDDEN_RANDOM",
            Violation::BadSignature => "BAD_SIGNATURE",
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

const RANDOM_NAMES: &[&str] = &["random", "randint", "randrange", "randbelow", "secrets", "urandom", "getrandbits"];

#[derive(Debug, PartialEq)]
enum Segment<'a> {
    Code(&'a str),
    Str(&'a str),
}

fn string_end(src: &str, start: usize) -> usize {
    let rest = &src[start..];
    let quote = rest.as_bytes()[0];
    let triple = rest.len() >= 3 && rest.as_bytes()[1] == quote && rest.as_bytes()[2] == quote;
    let bytes = src.as_bytes();
    let mut i = start + if triple { 3 } else { 1 };
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' if !triple => return i,
            b if b == quote => {
                if !triple {
                    return i + 1;
                }
                if bytes.get(i + 1) == Some(&quote) && bytes.get(i + 2) == Some(&quote) {
                    return i + 3;
                }
                i += 1;
            }
            _ => i += 1,
        }
    }
    bytes.len()
}

/// Split into code and string-literal segments, dropping comments.
fn segments(src: &str) -> Vec<Segment<'_>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut code_start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'#' => {
                out.push(Segment::Code(&src[code_start..i]));
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                code_start = i;
            }
            b'"' | b'\'' => {
                // String prefixes such as f, rb stay attached to the code side.
                out.push(Segment::Code(&src[code_start..i]));
                let end = string_end(src, i).min(bytes.len());
                out.push(Segment::Str(&src[i..end]));
                i = end;
                code_start = i;
            }
            _ => i += 1,
        }
    }
    out.push(Segment::Code(&src[code_start..]));
    out.retain(|s| !matches!(s, Segment::Code("")));
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Punct(char),
    Literal,
}

fn tokens(src: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for seg in segments(src) {
        let text = match seg {
            Segment::Str(_) => {
                out.push(Token::Literal);
                continue;
            }
            Segment::Code(text) => text,
        };
        let mut chars = text.char_indices().peekable();
        while let Some((start, c)) = chars.next() {
            if c.is_alphabetic() || c == '_' {
                let mut end = start + c.len_utf8();
                while let Some(&(i, n)) = chars.peek() {
                    if !(n.is_alphanumeric() || n == '_') {
                        break;
                    }
                    end = i + n.len_utf8();
                    chars.next();
                }
                out.push(Token::Ident(text[start..end].to_string()));
            } else if c.is_ascii_digit() {
                while chars.peek().is_some_and(|&(_, n)| n.is_alphanumeric() || n == '.' || n == '_') {
                    chars.next();
                }
                out.push(Token::Literal);
            } else if !c.is_whitespace() {
                out.push(Token::Punct(c));
            }
        }
    }
    out
}

fn is_ident(t: &Token, name: &str) -> bool {
    matches!(t, Token::Ident(s) if s == name)
}

fn signature_ok(toks: &[Token]) -> bool {
    let Some(def) = toks.iter().position(|t| is_ident(t, "def")) else {
        return false;
    };
    if !toks.get(def + 1).is_some_and(|t| is_ident(t, "score_state")) || toks.get(def + 2) != Some(&Token::Punct('(')) {
        return false;
    }
    let mut depth = 0usize;
    let mut params = 0usize;
    let mut pending = false;
    for t in &toks[def + 3..] {
        match t {
            Token::Punct('(' | '[' | '{') => depth += 1,
            Token::Punct(')') if depth == 0 => {
                return params + usize::from(pending) == 1;
            }
            Token::Punct(')' | ']' | '}') => depth -= 1,
            Token::Punct(',') if depth == 0 => {
                params += usize::from(pending);
                pending = false;
            }
            Token::Punct('*' | '/') if depth == 0 && !pending => return false,
            _ => pending = true,
        }
    }
    false
}

/// Screen `code`; an empty list means accepted.
pub fn validate_code(code: &str) -> Vec<Violation> {
    let toks = tokens(code);
    let mut found = Vec::new();
    let any = |name: &str| toks.iter().any(|t| is_ident(t, name));
    if any("import") || any("__import__") {
        found.push(Violation::ForbiddenImport);
    }
    if any("while") {
        found.push(Violation::ForbiddenWhile);
    }
    if toks.iter().filter(|t| is_ident(t, "def") || is_ident(t, "class")).count() > 1 {
        found.push(Violation::ExtraDefinition);
    }
    if RANDOM_NAMES.iter().any(|n| any(n)) {
        found.push(Violation::ForbiddenRandom);
    }
    if !signature_ok(&toks) {
        found.push(Violation::BadSignature);
    }
    found
}

/// Code with comments, trailing whitespace, blank lines and repeated inner
/// spacing removed. Indentation and string literals are kept.
pub fn normalize_code(code: &str) -> String {
    let mut flat = String::new();
    for seg in segments(code) {
        match seg {
            Segment::Str(s) => flat.push_str(s),
            Segment::Code(text) => {
                let mut prev_space = false;
                let mut at_line_start = flat.is_empty() || flat.ends_with('\n');
                for c in text.chars() {
                    if c == '\n' {
                        flat.push('\n');
                        at_line_start = true;
                        prev_space = false;
                    } else if c == ' ' || c == '\t' {
                        if at_line_start {
                            flat.push_str(if c == '\t' { "    " } else { " " });
                        } else if !prev_space {
                            flat.push(' ');
                        }
                        prev_space = true;
                    } else {
                        flat.push(c);
                        at_line_start = false;
                        prev_space = false;
                    }
                }
            }
        }
    }
    flat.lines().map(str::trim_end).filter(|l| !l.is_empty()).collect::<Vec<_>>().join("\n")
}

/// Hex SHA-256 of [`normalize_code`]; used to deduplicate heuristics.
pub fn code_hash(code: &str) -> String {
    hex::encode(Sha256::digest(normalize_code(code).as_bytes()))
}
