//! Text format for PBN descriptions.
//!
//! ```text
//! pbn toggle
//! node A { 0.6: A & B  0.4: !B }
//! node B { 1: A }
//! target A=1 B=0
//! ```
//!
//! Operators bind `!` tighter than `&`, `&` tighter than `^`, `^` tighter than
//! `|`. A candidate's expression ends at the first token that cannot continue
//! it, so consecutive candidates need no separator. `#` starts a comment.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::expr::BoolExpr;
use crate::model::{Limits, ModelError, NodeSpec, PbnModel};
use crate::stp::Rational;

/// Position in the input: 1-based line and column plus byte offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub offset: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lexical,
    Syntax,
    UnknownNode,
    DuplicateNode,
    Probability,
    Target,
    /// Rejected by model validation (for instance an enumeration cap).
    Model,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
    pub message: String,
    /// Set for `Model` errors.
    pub model_error: Option<ModelError>,
}

impl ParseError {
    fn new(kind: ParseErrorKind, span: SourceSpan, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            span,
            message: message.into(),
            model_error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Colon,
    Bang,
    Amp,
    Pipe,
    Caret,
    Eq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Colon => ":",
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::Caret => "^",
            Tok::Eq => "=",
            _ => "",
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut line_start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some(&(off, c)) = chars.peek() {
        let span = SourceSpan {
            line,
            column: text[line_start..off].chars().count() + 1,
            offset: off,
        };
        if c == '\n' {
            chars.next();
            line += 1;
            line_start = off + 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '#' {
            while let Some(&(_, c)) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = off;
            while let Some(&(o, c)) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    end = o + c.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(text[off..end].to_string()), span));
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut end = off;
            while let Some(&(o, c)) = chars.peek() {
                if c.is_ascii_digit() || c == '.' || c == '/' {
                    end = o + c.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            out.push((Tok::Number(text[off..end].to_string()), span));
            continue;
        }
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ':' => Tok::Colon,
            '!' | '~' => Tok::Bang,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '^' => Tok::Caret,
            '=' => Tok::Eq,
            other => {
                return Err(ParseError::new(
                    ParseErrorKind::Lexical,
                    span,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        chars.next();
        out.push((tok, span));
    }
    let column = text[line_start..].chars().count() + 1;
    out.push((
        Tok::Eof,
        SourceSpan {
            line,
            column,
            offset: text.len(),
        },
    ));
    Ok(out)
}

/// Parses a probability literal (`1`, `0.005`, `3/5`) exactly.
pub fn parse_probability(s: &str) -> Option<Rational> {
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_decimal(num)?;
        let den = parse_decimal(den)?;
        if den.is_zero() {
            return None;
        }
        return Some(num / den);
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let all_digits = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    if !all_digits(int) || !all_digits(frac) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Some(Rational::new(num, den))
}

/// Formats a probability as a terminating decimal when possible, else `a/b`.
pub fn format_probability(p: &Rational) -> String {
    let mut den = p.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while den.is_even() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", p.numer(), p.denom());
    }
    let places = twos.max(fives);
    let scaled = p * Rational::from_integer(num_traits::pow(BigInt::from(10), places));
    let digits = scaled.to_integer().to_string();
    if places == 0 {
        return digits;
    }
    let padded = format!("{:0>width$}", digits, width = places + 1);
    let (int, frac) = padded.split_at(padded.len() - places);
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        int.to_string()
    } else {
        format!("{int}.{frac}")
    }
}

struct RawNode {
    name: String,
    span: SourceSpan,
    candidates: Vec<(BoolExpr, Rational, SourceSpan)>,
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    /// Provisional variable ids, resolved to node indices after all blocks are read.
    names: Vec<(String, SourceSpan)>,
    name_ids: HashMap<String, usize>,
}

const KEYWORDS: [&str; 3] = ["pbn", "node", "target"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::new(
            ParseErrorKind::Syntax,
            self.span(),
            format!("expected {wanted}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<SourceSpan, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.unexpected(&format!("`{}`", tok.symbol())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().1;
                Ok((s, span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn var(&mut self, name: String, span: SourceSpan) -> BoolExpr {
        let next = self.names.len();
        let id = *self.name_ids.entry(name.clone()).or_insert(next);
        if id == next {
            self.names.push((name, span));
        }
        BoolExpr::Var(id)
    }

    fn expr(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.xor_expr()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            lhs = BoolExpr::or(lhs, self.xor_expr()?);
        }
        Ok(lhs)
    }

    fn xor_expr(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.and_expr()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            lhs = BoolExpr::xor(lhs, self.and_expr()?);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            lhs = BoolExpr::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<BoolExpr, ParseError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(BoolExpr::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let span = self.bump().1;
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax,
                        span,
                        format!("keyword `{name}` cannot be used as a variable"),
                    ));
                }
                Ok(self.var(name, span))
            }
            Tok::Number(n) if n == "0" || n == "1" => {
                self.bump();
                Ok(BoolExpr::Const(n == "1"))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn node_block(&mut self) -> Result<RawNode, ParseError> {
        let (name, span) = self.ident("a node name")?;
        if KEYWORDS.contains(&name.as_str()) {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                span,
                format!("keyword `{name}` cannot name a node"),
            ));
        }
        self.expect(Tok::LBrace)?;
        let mut candidates = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Number(lit) => {
                    let pspan = self.bump().1;
                    let p = parse_probability(&lit).ok_or_else(|| {
                        ParseError::new(ParseErrorKind::Lexical, pspan, format!("malformed probability `{lit}`"))
                    })?;
                    if p > Rational::one() {
                        return Err(ParseError::new(
                            ParseErrorKind::Probability,
                            pspan,
                            format!("probability {lit} exceeds 1"),
                        ));
                    }
                    self.expect(Tok::Colon)?;
                    let e = self.expr()?;
                    candidates.push((e, p, pspan));
                }
                _ => return Err(self.unexpected("a probability or `}`")),
            }
        }
        if candidates.is_empty() {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                span,
                format!("node `{name}` has no candidate functions"),
            ));
        }
        Ok(RawNode { name, span, candidates })
    }
}

/// A parsed file before model validation.
struct RawFile {
    name: String,
    nodes: Vec<RawNode>,
    target: Option<Vec<(String, bool, SourceSpan)>>,
    target_span: SourceSpan,
    names: Vec<(String, SourceSpan)>,
}

fn parse_raw(text: &str) -> Result<RawFile, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        names: Vec::new(),
        name_ids: HashMap::new(),
    };
    let mut name = String::from("pbn");
    let mut nodes = Vec::new();
    let mut target = None;
    let mut target_span = SourceSpan::default();
    if *p.peek() == Tok::Ident("pbn".into()) {
        p.bump();
        name = p.ident("a network name")?.0;
    }
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "node" => {
                p.bump();
                nodes.push(p.node_block()?);
            }
            Tok::Ident(kw) if kw == "target" => {
                target_span = p.bump().1;
                if target.is_some() {
                    return Err(ParseError::new(
                        ParseErrorKind::Target,
                        target_span,
                        "more than one target clause",
                    ));
                }
                let mut items = Vec::new();
                while let Tok::Ident(n) = p.peek().clone() {
                    if KEYWORDS.contains(&n.as_str()) {
                        break;
                    }
                    let span = p.bump().1;
                    p.expect(Tok::Eq)?;
                    let value = match p.peek().clone() {
                        Tok::Number(v) if v == "0" || v == "1" => {
                            p.bump();
                            v == "1"
                        }
                        _ => return Err(p.unexpected("`0` or `1`")),
                    };
                    items.push((n, value, span));
                }
                target = Some(items);
            }
            _ => return Err(p.unexpected("`node` or `target`")),
        }
    }
    Ok(RawFile {
        name,
        nodes,
        target,
        target_span,
        names: p.names,
    })
}

pub fn parse(text: &str) -> Result<PbnModel, ParseError> {
    parse_with_limits(text, &Limits::default())
}

pub fn parse_with_limits(text: &str, limits: &Limits) -> Result<PbnModel, ParseError> {
    let raw = parse_raw(text)?;
    if raw.nodes.is_empty() {
        return Err(ParseError::new(
            ParseErrorKind::Syntax,
            SourceSpan {
                line: 1,
                column: 1,
                offset: 0,
            },
            "no node blocks found",
        ));
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, node) in raw.nodes.iter().enumerate() {
        if index.insert(node.name.as_str(), i).is_some() {
            return Err(ParseError::new(
                ParseErrorKind::DuplicateNode,
                node.span,
                format!("node `{}` is defined more than once", node.name),
            ));
        }
    }
    let mut resolved = Vec::with_capacity(raw.names.len());
    for (name, span) in &raw.names {
        match index.get(name.as_str()) {
            Some(&i) => resolved.push(i),
            None => {
                return Err(ParseError::new(
                    ParseErrorKind::UnknownNode,
                    *span,
                    format!("unknown node `{name}`"),
                ))
            }
        }
    }
    let mut specs = Vec::with_capacity(raw.nodes.len());
    for node in &raw.nodes {
        let sum: Rational = node.candidates.iter().map(|c| &c.1).sum();
        if !sum.is_one() {
            return Err(ParseError::new(
                ParseErrorKind::Probability,
                node.span,
                format!(
                    "probabilities of node `{}` sum to {}, expected 1",
                    node.name,
                    format_probability(&sum)
                ),
            ));
        }
        specs.push(NodeSpec {
            name: node.name.clone(),
            candidates: node
                .candidates
                .iter()
                .map(|(e, p, _)| (e.substitute(&|v| BoolExpr::Var(resolved[v])), p.clone()))
                .collect(),
        });
    }
    let model = PbnModel::new(raw.name, specs, limits).map_err(|e| {
        let span = model_error_span(&e, &raw.nodes);
        ParseError {
            kind: ParseErrorKind::Model,
            span,
            message: e.to_string(),
            model_error: Some(e),
        }
    })?;
    let target = match raw.target {
        None => None,
        Some(items) => Some(resolve_target(&model, &items, raw.target_span)?),
    };
    Ok(model.with_target(target).expect("target length checked"))
}

fn model_error_span(e: &ModelError, nodes: &[RawNode]) -> SourceSpan {
    let name = match e {
        ModelError::DuplicateName(n) | ModelError::NoCandidates(n) => Some(n),
        ModelError::ProbabilityRange { node, .. }
        | ModelError::ProbabilitySum { node, .. }
        | ModelError::UnknownReference { node, .. } => Some(node),
        _ => None,
    };
    name.and_then(|n| nodes.iter().find(|r| &r.name == n))
        .map(|r| r.span)
        .unwrap_or(SourceSpan {
            line: 1,
            column: 1,
            offset: 0,
        })
}

fn resolve_target(
    model: &PbnModel,
    items: &[(String, bool, SourceSpan)],
    clause: SourceSpan,
) -> Result<Vec<bool>, ParseError> {
    let mut values: Vec<Option<bool>> = vec![None; model.len()];
    for (name, v, span) in items {
        let i = model.node_index(name).ok_or_else(|| {
            ParseError::new(
                ParseErrorKind::UnknownNode,
                *span,
                format!("unknown node `{name}` in target"),
            )
        })?;
        if values[i].replace(*v).is_some() {
            return Err(ParseError::new(
                ParseErrorKind::Target,
                *span,
                format!("node `{name}` assigned twice in target"),
            ));
        }
    }
    let missing: Vec<&str> = values
        .iter()
        .zip(&model.nodes)
        .filter(|(v, _)| v.is_none())
        .map(|(_, n)| n.name.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(ParseError::new(
            ParseErrorKind::Target,
            clause,
            format!("target leaves nodes unassigned: {}", missing.join(", ")),
        ));
    }
    Ok(values.into_iter().map(|v| v.expect("checked")).collect())
}

/// Parses `A=1,B=0` or `A=1 B=0` into a full state for `model`. Nodes not
/// mentioned keep their value from `base` when given.
pub fn parse_target_assignments(model: &PbnModel, text: &str, base: Option<&[bool]>) -> Result<Vec<bool>, String> {
    let mut values: Vec<Option<bool>> = match base {
        Some(b) => b.iter().map(|&v| Some(v)).collect(),
        None => vec![None; model.len()],
    };
    for item in text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
    {
        let (name, v) = item
            .split_once('=')
            .ok_or_else(|| format!("expected NAME=0|1, found `{item}`"))?;
        let i = model
            .node_index(name.trim())
            .ok_or_else(|| format!("unknown node `{}`", name.trim()))?;
        values[i] = Some(match v.trim() {
            "1" => true,
            "0" => false,
            other => return Err(format!("value for `{name}` must be 0 or 1, found `{other}`")),
        });
    }
    values
        .into_iter()
        .zip(&model.nodes)
        .map(|(v, n)| v.ok_or_else(|| format!("no target value for node `{}`", n.name)))
        .collect()
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&s)
}

pub fn serialize(model: &PbnModel) -> String {
    let mut out = String::new();
    if is_ident(&model.name) {
        out.push_str(&format!("pbn {}\n\n", model.name));
    }
    let names = model.names();
    for node in &model.nodes {
        out.push_str(&format!("node {} {{\n", node.name));
        for c in &node.candidates {
            out.push_str(&format!(
                "    {}: {}\n",
                format_probability(&c.probability),
                c.expr.render(&|i| names[i].clone())
            ));
        }
        out.push_str("}\n");
    }
    if let Some(t) = &model.target {
        out.push_str("\ntarget");
        for (n, v) in names.iter().zip(t) {
            out.push_str(&format!(" {}={}", n, u8::from(*v)));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stp::ratio;

    #[test]
    fn single_negation() {
        let m = parse("node A { 1: !A }").unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.nodes[0].candidates[0].expr, BoolExpr::not(BoolExpr::var(0)));
    }

    #[test]
    fn two_candidates_exact_probabilities() {
        let m = parse("node A { 0.6: A & B  0.4: !B } node B { 1: A }").unwrap();
        let probs: Vec<_> = m.nodes[0].candidates.iter().map(|c| c.probability.clone()).collect();
        assert_eq!(probs, vec![ratio(3, 5), ratio(2, 5)]);
        let again = parse(&serialize(&m)).unwrap();
        assert!(m.semantically_eq(&again));
    }

    #[test]
    fn precedence() {
        let m = parse("node A { 1: !A & B ^ C | A } node B { 1: B } node C { 1: C }").unwrap();
        let (a, b, c) = (BoolExpr::var(0), BoolExpr::var(1), BoolExpr::var(2));
        let expected = BoolExpr::or(BoolExpr::xor(BoolExpr::and(BoolExpr::not(a.clone()), b), c), a);
        assert_eq!(m.nodes[0].candidates[0].expr, expected);
    }

    #[test]
    fn probability_literals() {
        assert_eq!(parse_probability("0.005"), Some(ratio(1, 200)));
        assert_eq!(parse_probability("1"), Some(ratio(1, 1)));
        assert_eq!(parse_probability("3/5"), Some(ratio(3, 5)));
        assert_eq!(parse_probability(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_probability("1/0"), None);
        assert_eq!(parse_probability("1.2.3"), None);
        for (p, s) in [
            (ratio(1, 200), "0.005"),
            (ratio(99, 100), "0.99"),
            (ratio(1, 3), "1/3"),
            (ratio(1, 1), "1"),
            (ratio(0, 1), "0"),
        ] {
            assert_eq!(format_probability(&p), s);
        }
    }

    #[test]
    fn targets() {
        let m = parse("node A { 1: B } node B { 1: A } target A=1 B=0").unwrap();
        assert_eq!(m.target, Some(vec![true, false]));
        assert_eq!(
            parse_target_assignments(&m, "B=1", m.target.as_deref()),
            Ok(vec![true, true])
        );
        let e = parse("node A { 1: B } node B { 1: A } target A=1").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Target);
    }

    #[test]
    fn error_spans() {
        let e = parse("node A { 1: B }").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownNode);
        assert_eq!((e.span.line, e.span.column), (1, 13));

        let e = parse("node A {\n  0.5: A\n}").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Probability);

        let e = parse("node A { 1: A }\nnode A { 1: A }").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DuplicateNode);
        assert_eq!(e.span.line, 2);

        let e = parse("node A { 1: A $ }").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Lexical);
        assert_eq!(e.span.offset, 14);

        let e = parse("node A { 1: A & }").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
    }

    #[test]
    fn comments_and_header() {
        let m = parse("# toggle\npbn toggle\nnode A { 1: !A } # flip\n").unwrap();
        assert_eq!(m.name, "toggle");
    }
}
