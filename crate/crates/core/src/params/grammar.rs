//! The plain-text parameter format.
//!
//! ```text
//! # infinite Chacon transformation
//! name: chacon-raw
//! preperiod: []
//! cycle: [r=3, s=(0, 1), last=3h+1]
//! ```
//!
//! Top-level entries are separated by newlines or `;`. Rules inside a list
//! are separated by `;`. A spacer expression is a sum of terms `<int>`,
//! `<int>h` / `h` (current height) and `<int>A` / `A` (accumulator). Raw
//! presentations use `last=` for the last-column spacer; normalized ones use
//! `carry=` to keep the accumulator running.

use std::fmt::Write as _;

use thiserror::Error;

use super::{ParameterSpec, SpacerExpr, SpecError, StageRule};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Punct(char),
    /// Line break or `;` at the top level.
    Sep,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    column: usize,
    depth: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { chars: src.char_indices().peekable(), src, line: 1, column: 1, depth: 0 }
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        let next = self.chars.next();
        if let Some((_, c)) = next {
            if c == '\n' {
                self.line += 1;
                self.column = 1;
            } else {
                self.column += 1;
            }
        }
        next
    }

    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError { line, column, message: message.into() }
    }

    /// Raw text up to the next top-level separator (used for `name:`).
    fn raw_value(&mut self) -> String {
        let mut out = String::new();
        while let Some(&(_, c)) = self.chars.peek() {
            if c == '\n' || c == ';' || c == '#' {
                break;
            }
            out.push(c);
            self.bump();
        }
        out.trim().to_string()
    }

    fn next_token(&mut self) -> Result<Token, ParseError> {
        loop {
            let Some(&(idx, c)) = self.chars.peek() else {
                return Ok(Token { tok: Tok::Eof, line: self.line, column: self.column });
            };
            let (line, column) = (self.line, self.column);
            match c {
                '#' => {
                    while let Some(&(_, c)) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                '\n' | ';' if self.depth == 0 => {
                    self.bump();
                    return Ok(Token { tok: Tok::Sep, line, column });
                }
                c if c.is_whitespace() => {
                    self.bump();
                }
                c if c.is_ascii_digit() => {
                    let mut end = idx;
                    while let Some(&(i, d)) = self.chars.peek() {
                        if !d.is_ascii_digit() {
                            break;
                        }
                        end = i + d.len_utf8();
                        self.bump();
                    }
                    let text = &self.src[idx..end];
                    let value = text
                        .parse::<u64>()
                        .map_err(|_| self.err(line, column, format!("integer `{text}` is too large")))?;
                    return Ok(Token { tok: Tok::Int(value), line, column });
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut end = idx;
                    while let Some(&(i, d)) = self.chars.peek() {
                        if !(d.is_ascii_alphanumeric() || d == '_') {
                            break;
                        }
                        end = i + d.len_utf8();
                        self.bump();
                    }
                    return Ok(Token { tok: Tok::Ident(self.src[idx..end].to_string()), line, column });
                }
                '[' | '(' => {
                    self.depth += 1;
                    self.bump();
                    return Ok(Token { tok: Tok::Punct(c), line, column });
                }
                ']' | ')' => {
                    self.depth = self.depth.saturating_sub(1);
                    self.bump();
                    return Ok(Token { tok: Tok::Punct(c), line, column });
                }
                ':' | '=' | ',' | '+' | '-' | ';' => {
                    self.bump();
                    return Ok(Token { tok: Tok::Punct(c), line, column });
                }
                other => return Err(self.err(line, column, format!("unexpected character `{other}`"))),
            }
        }
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    peeked: Option<Token>,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<&Token, ParseError> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lex.next_token()?);
        }
        Ok(self.peeked.as_ref().unwrap())
    }

    fn next(&mut self) -> Result<Token, ParseError> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lex.next_token(),
        }
    }

    fn error_at(tok: &Token, message: impl Into<String>) -> ParseError {
        ParseError { line: tok.line, column: tok.column, message: message.into() }
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Sep => "end of entry".into(),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<Token, ParseError> {
        let tok = self.next()?;
        match tok.tok {
            Tok::Punct(p) if p == c => Ok(tok),
            Tok::Punct('-') => Err(Self::error_at(&tok, "negative values are not allowed")),
            ref other => Err(Self::error_at(&tok, format!("expected `{c}`, found {}", Self::describe(other)))),
        }
    }

    fn int(&mut self) -> Result<(u64, Token), ParseError> {
        let tok = self.next()?;
        match tok.tok {
            Tok::Int(v) => Ok((v, tok)),
            Tok::Punct('-') => Err(Self::error_at(&tok, "negative values are not allowed")),
            ref other => Err(Self::error_at(&tok, format!("expected an integer, found {}", Self::describe(other)))),
        }
    }

    fn expr(&mut self) -> Result<SpacerExpr, ParseError> {
        let mut e = SpacerExpr::ZERO;
        loop {
            let tok = self.next()?;
            let (coef, var) = match tok.tok {
                Tok::Int(v) => {
                    let var = match self.peek()?.tok.clone() {
                        Tok::Ident(s) if s == "h" || s == "A" => {
                            self.next()?;
                            Some(s)
                        }
                        Tok::Ident(s) => {
                            let t = self.next()?;
                            return Err(Self::error_at(&t, format!("unknown term `{s}` (expected `h` or `A`)")));
                        }
                        _ => None,
                    };
                    (v, var)
                }
                Tok::Ident(ref s) if s == "h" || s == "A" => (1, Some(s.clone())),
                Tok::Punct('-') => return Err(Self::error_at(&tok, "negative coefficients are not allowed")),
                ref other => {
                    return Err(Self::error_at(&tok, format!("expected a spacer term, found {}", Self::describe(other))))
                }
            };
            let slot = match var.as_deref() {
                Some("h") => &mut e.height,
                Some("A") => &mut e.acc,
                _ => &mut e.constant,
            };
            *slot = slot.checked_add(coef).ok_or_else(|| Self::error_at(&tok, "coefficient overflow"))?;
            match self.peek()?.tok {
                Tok::Punct('+') => {
                    self.next()?;
                }
                Tok::Punct('-') => {
                    let t = self.next()?;
                    return Err(Self::error_at(&t, "negative coefficients are not allowed"));
                }
                _ => return Ok(e),
            }
        }
    }

    fn rule(&mut self) -> Result<StageRule, ParseError> {
        let start = self.peek()?.clone();
        let mut cuts: Option<(u64, Token)> = None;
        let mut spacers: Option<(Vec<SpacerExpr>, Token)> = None;
        let mut last = None;
        let mut carry = None;
        loop {
            let key = self.next()?;
            let name = match &key.tok {
                Tok::Ident(s) => s.clone(),
                other => return Err(Self::error_at(&key, format!("expected a rule field, found {}", Self::describe(other)))),
            };
            self.expect_punct('=')?;
            let dup = || Self::error_at(&key, format!("duplicate field `{name}`"));
            match name.as_str() {
                "r" => {
                    if cuts.is_some() {
                        return Err(dup());
                    }
                    cuts = Some(self.int()?);
                }
                "s" => {
                    if spacers.is_some() {
                        return Err(dup());
                    }
                    let open = self.expect_punct('(')?;
                    let mut list = Vec::new();
                    if self.peek()?.tok != Tok::Punct(')') {
                        loop {
                            list.push(self.expr()?);
                            if self.peek()?.tok == Tok::Punct(',') {
                                self.next()?;
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect_punct(')')?;
                    spacers = Some((list, open));
                }
                "last" => {
                    if last.is_some() {
                        return Err(dup());
                    }
                    last = Some(self.expr()?);
                }
                "carry" => {
                    if carry.is_some() {
                        return Err(dup());
                    }
                    carry = Some(self.expr()?);
                }
                other => return Err(Self::error_at(&key, format!("unknown rule field `{other}`"))),
            }
            if self.peek()?.tok == Tok::Punct(',') {
                self.next()?;
            } else {
                break;
            }
        }
        let (r, r_tok) = cuts.ok_or_else(|| Self::error_at(&start, "rule is missing `r=`"))?;
        let (spacers, s_tok) = spacers.ok_or_else(|| Self::error_at(&start, "rule is missing `s=(...)`"))?;
        if r < 2 {
            return Err(Self::error_at(&r_tok, format!("a stage needs at least 2 cuts, got {r}")));
        }
        let r = r as usize;
        if spacers.len() != r - 1 {
            return Err(Self::error_at(
                &s_tok,
                format!("a stage with {r} cuts needs {} interior spacers, got {}", r - 1, spacers.len()),
            ));
        }
        if last.is_some() && carry.is_some() {
            return Err(Self::error_at(&start, SpecError::LastAndCarry.to_string()));
        }
        Ok(StageRule { cuts: r, spacers, last, carry })
    }

    fn list(&mut self) -> Result<Vec<StageRule>, ParseError> {
        self.expect_punct('[')?;
        let mut rules = Vec::new();
        loop {
            if self.peek()?.tok == Tok::Punct(']') {
                self.next()?;
                return Ok(rules);
            }
            rules.push(self.rule()?);
            let tok = self.next()?;
            match tok.tok {
                Tok::Punct(';') => {}
                Tok::Punct(']') => return Ok(rules),
                ref other => {
                    return Err(Self::error_at(&tok, format!("expected `;` or `]`, found {}", Self::describe(other))))
                }
            }
        }
    }
}

/// Parse a parameter description.
pub fn parse_spec(text: &str) -> Result<ParameterSpec, ParseError> {
    let mut p = Parser { lex: Lexer::new(text), peeked: None };
    let mut name: Option<String> = None;
    let mut preperiod: Option<Vec<StageRule>> = None;
    let mut cycle: Option<Vec<StageRule>> = None;
    let mut first_last: Option<Token> = None;
    let mut first_carry: Option<Token> = None;
    loop {
        let key = p.next()?;
        let field = match &key.tok {
            Tok::Eof => break,
            Tok::Sep => continue,
            Tok::Ident(s) => s.clone(),
            other => return Err(Parser::error_at(&key, format!("expected a field name, found {}", Parser::describe(other)))),
        };
        p.expect_punct(':')?;
        let dup = || Parser::error_at(&key, format!("duplicate field `{field}`"));
        match field.as_str() {
            "name" => {
                if name.is_some() {
                    return Err(dup());
                }
                debug_assert!(p.peeked.is_none());
                name = Some(p.lex.raw_value());
            }
            "preperiod" | "cycle" => {
                let slot = if field == "cycle" { &mut cycle } else { &mut preperiod };
                if slot.is_some() {
                    return Err(dup());
                }
                let rules = p.list()?;
                for r in &rules {
                    if r.last.is_some() && first_last.is_none() {
                        first_last = Some(key.clone());
                    }
                    if r.carry.is_some() && first_carry.is_none() {
                        first_carry = Some(key.clone());
                    }
                }
                *slot = Some(rules);
            }
            other => return Err(Parser::error_at(&key, format!("unknown field `{other}`"))),
        }
        let tok = p.next()?;
        match tok.tok {
            Tok::Sep | Tok::Eof => {
                if tok.tok == Tok::Eof {
                    break;
                }
            }
            ref other => {
                return Err(Parser::error_at(&tok, format!("expected end of entry, found {}", Parser::describe(other))))
            }
        }
    }
    let eof = Token { tok: Tok::Eof, line: p.lex.line, column: p.lex.column };
    let cycle = cycle.ok_or_else(|| Parser::error_at(&eof, "missing required field `cycle`"))?;
    if cycle.is_empty() {
        return Err(Parser::error_at(&eof, SpecError::EmptyCycle.to_string()));
    }
    if let (Some(_), Some(c)) = (&first_last, &first_carry) {
        return Err(Parser::error_at(c, SpecError::MixedPresentation.to_string()));
    }
    Ok(ParameterSpec { name: name.unwrap_or_default(), preperiod: preperiod.unwrap_or_default(), cycle })
}

fn write_rule(out: &mut String, rule: &StageRule) {
    let spacers: Vec<String> = rule.spacers.iter().map(|e| e.to_string()).collect();
    let _ = write!(out, "r={}, s=({})", rule.cuts, spacers.join(", "));
    if let Some(l) = rule.last {
        let _ = write!(out, ", last={l}");
    }
    if let Some(c) = rule.carry {
        let _ = write!(out, ", carry={c}");
    }
}

fn write_list(out: &mut String, rules: &[StageRule]) {
    out.push('[');
    for (i, r) in rules.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        write_rule(out, r);
    }
    out.push(']');
}

pub(super) fn serialize(spec: &ParameterSpec) -> String {
    let mut out = String::new();
    if !spec.name.is_empty() {
        let _ = writeln!(out, "name: {}", spec.name);
    }
    out.push_str("preperiod: ");
    write_list(&mut out, &spec.preperiod);
    out.push('\n');
    out.push_str("cycle: ");
    write_list(&mut out, &spec.cycle);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn chacon_one_liner() {
        let spec = parse_spec("preperiod:[]; cycle:[r=3, s=(0, 1), last=3h+1]").unwrap();
        assert!(spec.preperiod.is_empty());
        assert_eq!(spec.cycle.len(), 1);
        let rule = &spec.cycle[0];
        assert_eq!(rule.cuts, 3);
        assert_eq!(rule.spacers, vec![SpacerExpr::constant(0), SpacerExpr::constant(1)]);
        assert_eq!(rule.last, Some(SpacerExpr::new(3, 0, 1)));
        assert!(!spec.is_normalized());
    }

    #[test]
    fn hajian_kakutani_without_preperiod() {
        let spec = parse_spec("cycle:[r=2, s=(0), last=2h+1]").unwrap();
        assert_eq!(spec.cycle.len(), 1);
        assert_eq!(spec.cycle[0].last, Some(SpacerExpr::new(2, 0, 1)));
    }

    #[test]
    fn multi_line_with_comments() {
        let text = "# comment\nname: two-step\npreperiod: [r=2, s=(h)]\ncycle: [r=3, s=(A, A+1), carry=3h+3A+1; r=2, s=(2h+5)]\n";
        let spec = parse_spec(text).unwrap();
        assert_eq!(spec.name, "two-step");
        assert_eq!(spec.preperiod.len(), 1);
        assert_eq!(spec.cycle.len(), 2);
        assert_eq!(spec.cycle[0].carry, Some(SpacerExpr::new(3, 3, 1)));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_spec("cycle:[]").unwrap_err();
        assert!(e.message.contains("at least one rule"), "{e}");

        let e = parse_spec("cycle:[r=1, s=()]").unwrap_err();
        assert_eq!((e.line, e.column), (1, 10));
        assert!(e.message.contains("at least 2 cuts"));

        let e = parse_spec("name: x\ncycle:[r=3, s=(1)]").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("needs 2 interior spacers"));

        let e = parse_spec("cycle:[r=2, s=(-1)]").unwrap_err();
        assert!(e.message.contains("negative"));

        let e = parse_spec("cycle:[r=2, s=(1)] junk").unwrap_err();
        assert!(e.message.contains("expected end of entry"));

        let e = parse_spec("cycle:[r=2, s=(3q)]").unwrap_err();
        assert!(e.message.contains("unknown term"));

        let e = parse_spec("preperiod:[r=2, s=(0), last=1]\ncycle:[r=2, s=(0), carry=1]").unwrap_err();
        assert_eq!(e.line, 2);

        assert!(parse_spec("preperiod:[]").is_err());
    }

    fn arb_expr() -> impl Strategy<Value = SpacerExpr> {
        (0u64..4, 0u64..4, 0u64..50).prop_map(|(h, a, c)| SpacerExpr::new(h, a, c))
    }

    fn arb_rule(raw: bool) -> impl Strategy<Value = StageRule> {
        (2usize..5)
            .prop_flat_map(move |r| {
                (Just(r), proptest::collection::vec(arb_expr(), r - 1), proptest::option::of(arb_expr()))
            })
            .prop_map(move |(r, spacers, extra)| StageRule {
                cuts: r,
                spacers,
                last: if raw { extra } else { None },
                carry: if raw { None } else { extra },
            })
    }

    fn arb_spec() -> impl Strategy<Value = ParameterSpec> {
        any::<bool>().prop_flat_map(|raw| {
            (
                "[a-z][a-z0-9-]{0,8}",
                proptest::collection::vec(arb_rule(raw), 0..3),
                proptest::collection::vec(arb_rule(raw), 1..4),
            )
                .prop_map(|(name, preperiod, cycle)| ParameterSpec { name, preperiod, cycle })
        })
    }

    proptest! {
        #[test]
        fn serialize_round_trips(spec in arb_spec()) {
            let text = spec.to_config();
            let back = parse_spec(&text).unwrap();
            prop_assert_eq!(&back, &spec);
            prop_assert_eq!(back.to_config(), text);
        }
    }
}
