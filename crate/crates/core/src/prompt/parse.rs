use std::fmt;
use std::ops::Range;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedResponse {
    pub thought: String,
    pub code: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ParseErrorKind {
    MissingThought,
    MissingCode,
    AmbiguousCode,
}

impl ParseErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ParseErrorKind::MissingThought => "MISSING_THOUGHT",
            ParseErrorKind::MissingCode => "MISSING_CODE",
            ParseErrorKind::AmbiguousCode => "AMBIGUOUS_CODE",
        }
    }
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind}: {detail}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub detail: String,
}

impl ParseError {
    fn new(kind: ParseErrorKind, detail: &str) -> Self {
        ParseError { kind, detail: detail.to_string() }
    }
}

/// The answer shape the templates ask for; `parse_response` inverts it.
pub fn render_answer(parsed: &ParsedResponse) -> String {
    format!("{{{}}}\n```python\n{}\n```\n", parsed.thought, parsed.code)
}

struct Line<'a> {
    start: usize,
    text: &'a str,
}

fn lines(raw: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    let mut start = 0;
    for text in raw.split_inclusive('\n') {
        out.push(Line { start, text });
        start += text.len();
    }
    out
}

fn is_fence(text: &str) -> bool {
    text.trim_start().starts_with("```")
}

fn indent_of(text: &str) -> usize {
    text.len() - text.trim_start_matches([' ', '\t']).len()
}

fn defines_score_state(text: &str) -> bool {
    static DEF: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^\s*def\s+score_state\s*\(").unwrap());
    DEF.is_match(text)
}

/// Fenced blocks as (whole block range incl. fences, body range).
fn fenced_blocks(all: &[Line<'_>], raw_len: usize) -> Vec<(Range<usize>, Range<usize>)> {
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < all.len() {
        if !is_fence(all[i].text) {
            i += 1;
            continue;
        }
        let open = &all[i];
        let body_start = open.start + open.text.len();
        let mut j = i + 1;
        while j < all.len() && !is_fence(all[j].text) {
            j += 1;
        }
        let (body_end, end) = match all.get(j) {
            Some(close) => (close.start, close.start + close.text.len()),
            None => (raw_len, raw_len),
        };
        blocks.push((open.start..end, body_start..body_end));
        i = j + 1;
    }
    blocks
}

/// Region of an unfenced `def score_state` and its indented body.
fn unfenced_region(all: &[Line<'_>]) -> Option<(Range<usize>, usize)> {
    let first = all.iter().position(|l| defines_score_state(l.text))?;
    let base = indent_of(all[first].text);
    let mut end = all[first].start + all[first].text.len();
    for l in &all[first + 1..] {
        if !l.text.trim().is_empty() && indent_of(l.text) <= base {
            break;
        }
        end = l.start + l.text.len();
    }
    Some((all[first].start..end, base))
}

fn dedent(text: &str, by: usize) -> String {
    text.lines()
        .map(|l| if l.len() >= by && l[..by].trim().is_empty() { &l[by..] } else { l.trim_start() })
        .collect::<Vec<_>>()
        .join("\n")
}

fn tidy_code(code: &str) -> String {
    let lines: Vec<&str> = code.lines().collect();
    let first = lines.iter().position(|l| !l.trim().is_empty()).unwrap_or(lines.len());
    lines[first..].join("\n").trim_end().to_string()
}

fn first_brace_span(masked: &str) -> Option<&str> {
    let open = masked.find('{')?;
    let mut depth = 0usize;
    for (offset, c) in masked[open..].char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&masked[open + 1..open + offset]);
                }
            }
            _ => {}
        }
    }
    None
}

fn mask(raw: &str, regions: &[Range<usize>]) -> String {
    let mut bytes = raw.as_bytes().to_vec();
    for r in regions {
        for b in &mut bytes[r.clone()] {
            if *b == b'{' || *b == b'}' {
                *b = b' ';
            }
        }
    }
    String::from_utf8(bytes).expect("masking only replaces ASCII bytes")
}

/// Split a model answer into its brace-delimited thought and its code.
pub fn parse_response(raw: &str) -> Result<ParsedResponse, ParseError> {
    let all = lines(raw);
    if all.iter().filter(|l| defines_score_state(l.text)).count() > 1 {
        return Err(ParseError::new(ParseErrorKind::AmbiguousCode, "more than one score_state definition"));
    }
    let blocks = fenced_blocks(&all, raw.len());
    let (code, code_region) = if let Some((whole, body)) = blocks.first() {
        (tidy_code(&raw[body.clone()]), whole.clone())
    } else if let Some((region, base)) = unfenced_region(&all) {
        (tidy_code(&dedent(&raw[region.clone()], base)), region)
    } else {
        return Err(ParseError::new(ParseErrorKind::MissingCode, "no score_state definition"));
    };
    if !code.lines().any(defines_score_state) {
        return Err(ParseError::new(ParseErrorKind::MissingCode, "code block lacks a score_state definition"));
    }
    let top_level_defs =
        code.lines().filter(|l| indent_of(l) == 0 && l.split_whitespace().next() == Some("def")).count();
    if top_level_defs > 1 {
        return Err(ParseError::new(ParseErrorKind::AmbiguousCode, "code defines several top-level functions"));
    }

    let mut masked_regions: Vec<Range<usize>> = blocks.iter().map(|(whole, _)| whole.clone()).collect();
    masked_regions.push(code_region);
    let masked = mask(raw, &masked_regions);
    let thought = first_brace_span(&masked)
        .map(|span| span.trim().to_string())
        .filter(|t| !t.is_empty())
        .ok_or_else(|| ParseError::new(ParseErrorKind::MissingThought, "no brace-delimited description"))?;
    Ok(ParsedResponse { thought, code })
}
