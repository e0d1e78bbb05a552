//! Parsing of grammar text: categories, lambda terms, and the three element
//! line forms.
//!
//! Identifiers are ASCII tokens of letters, digits, `~`, `-`, `_` with at
//! least one letter; they are case-insensitive and stored lower-cased.
//! Phonological material and singleton texts preserve case. `%` starts a
//! comment except within an entry's phonological material (before `|`) and
//! inside quoted singleton strings.

use thiserror::Error;

use crate::category::{Category, FeatVal, FeatureBundle, Modality, SlashDir, SlashSpec};
use crate::element::{AsymRule, Entry, Grammar, RawElement, SymRule, SymSide};
use crate::lambda::LambdaTerm;

/// A diagnostic tied to a source line; parsing continues past these.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {reason}")]
pub struct LineError {
    pub line: usize,
    pub reason: String,
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '~' || c == '-' || c == '_'
}

fn is_valid_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_ident_char) && s.chars().any(|c| c.is_ascii_alphabetic())
}

/// Characters that may immediately precede an opening singleton quote in a
/// category position. Used by line-level scans to tell singleton quotes from
/// stray quote characters in surface material.
fn precedes_quote(prev: Option<char>) -> bool {
    matches!(prev, None | Some('/' | '\\' | '(' | ':' | '^' | '*' | '+' | '.' | ','))
}

/// Scans `s` tracking quoted regions and `[...]` depth, calling `f` at each
/// char position outside both; the first position where `f` returns true is
/// returned (byte index).
fn scan_top_level(s: &str, mut f: impl FnMut(&[char], usize) -> bool) -> Option<usize> {
    let chars: Vec<char> = s.chars().collect();
    let mut quote: Option<char> = None;
    let mut prev_nonws: Option<char> = None;
    let mut depth = 0usize;
    let mut byte = 0usize;
    for (i, &c) in chars.iter().enumerate() {
        if let Some(q) = quote {
            if c == q {
                quote = None;
            }
        } else if (c == '"' || c == '\'') && precedes_quote(prev_nonws) {
            quote = Some(c);
        } else if c == '[' {
            depth += 1;
        } else if c == ']' {
            depth = depth.saturating_sub(1);
        } else if depth == 0 && f(&chars, i) {
            return Some(byte);
        }
        if !c.is_whitespace() {
            prev_nonws = Some(c);
        }
        byte += c.len_utf8();
    }
    None
}

fn find_top_level(s: &str, needle: &str) -> Option<usize> {
    let pat: Vec<char> = needle.chars().collect();
    scan_top_level(s, |chars, i| chars[i..].starts_with(&pat))
}

/// First single `:` (not part of `::`) outside quotes and brackets.
fn find_single_colon(s: &str) -> Option<usize> {
    scan_top_level(s, |chars, i| {
        chars[i] == ':'
            && chars.get(i + 1) != Some(&':')
            && (i == 0 || chars[i - 1] != ':')
    })
}

/// Strips a `%` comment. For entry lines, `protect` is the byte offset of
/// the first `|`: a `%` in the phonological material does not open a comment.
pub fn strip_comment(line: &str, protect: usize) -> &str {
    let cut = scan_top_level(line, |chars, i| chars[i] == '%');
    match cut {
        Some(b) if b >= protect => &line[..b],
        Some(_) => {
            // `%` lies inside protected phonological material: look for a
            // later one past the protection point.
            let tail = &line[protect..];
            match scan_top_level(tail, |chars, i| chars[i] == '%') {
                Some(b) => &line[..protect + b],
                None => line,
            }
        }
        None => line,
    }
}

// ---------------------------------------------------------------------------
// Category and lambda scanners
// ---------------------------------------------------------------------------

struct Scanner {
    chars: Vec<char>,
    pos: usize,
}

impl Scanner {
    fn new(s: &str) -> Self {
        Scanner { chars: s.chars().collect(), pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.peek().is_none()
    }

    fn rest(&self) -> String {
        self.chars[self.pos..].iter().collect()
    }

    /// Lexes an identifier token and lower-cases it.
    fn ident(&mut self, what: &str) -> Result<String, String> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if is_ident_char(c)) {
            self.pos += 1;
        }
        let tok: String = self.chars[start..self.pos].iter().collect();
        if tok.is_empty() {
            return Err(format!("expected {what}, found `{}`", self.describe_here()));
        }
        if !is_valid_ident(&tok) {
            return Err(format!("`{tok}` is not a valid {what} (needs a letter)"));
        }
        Ok(tok.to_ascii_lowercase())
    }

    fn describe_here(&self) -> String {
        match self.chars.get(self.pos) {
            Some(c) => c.to_string(),
            None => "end of input".into(),
        }
    }

    // -- categories --

    fn category(&mut self) -> Result<Category, String> {
        let mut cat = self.cat_atom()?;
        loop {
            self.skip_ws();
            match self.slash()? {
                Some(slash) => {
                    let arg = self.cat_atom()?;
                    cat = Category::complex(cat, slash, arg);
                }
                None => return Ok(cat),
            }
        }
    }

    fn slash(&mut self) -> Result<Option<SlashSpec>, String> {
        let dir = match self.peek() {
            Some('\\') => SlashDir::Left,
            Some('/') => SlashDir::Right,
            _ => return Ok(None),
        };
        let first = self.bump().unwrap();
        if self.peek() == Some(first) {
            self.bump();
            // Double slashes carry no modal control.
            if matches!(self.peek(), Some('^' | '*' | '+' | '.')) {
                return Err("double slashes take no modality".into());
            }
            return Ok(Some(SlashSpec::double(dir)));
        }
        let modality = match self.peek() {
            Some('^') => {
                self.bump();
                Modality::Diamond
            }
            Some('*') => {
                self.bump();
                Modality::Star
            }
            Some('+') => {
                self.bump();
                Modality::Cross
            }
            Some('.') => {
                self.bump();
                Modality::Dot
            }
            _ => Modality::Dot,
        };
        Ok(Some(SlashSpec::single(dir, modality)))
    }

    fn cat_atom(&mut self) -> Result<Category, String> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.bump();
                let cat = self.category()?;
                self.skip_ws();
                if !self.eat(')') {
                    return Err("unbalanced parenthesis in category".into());
                }
                Ok(cat)
            }
            Some(q @ ('"' | '\'')) => {
                self.bump();
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c == q {
                        break;
                    }
                    self.pos += 1;
                }
                if self.peek() != Some(q) {
                    return Err("unterminated singleton quote".into());
                }
                let raw: String = self.chars[start..self.pos].iter().collect();
                self.bump();
                let text = raw.split_whitespace().collect::<Vec<_>>().join(" ");
                if text.is_empty() {
                    return Err("empty singleton category".into());
                }
                Ok(Category::Singleton(text))
            }
            Some('@') => {
                self.bump();
                let name = self.ident("meta-category name")?;
                if self.peek() == Some('[') {
                    return Err("meta categories cannot carry features".into());
                }
                Ok(Category::Meta { name, tag: 0 })
            }
            _ => {
                let name = self.ident("basic category name")?;
                let features = if self.peek() == Some('[') {
                    self.bundle()?
                } else {
                    FeatureBundle::empty()
                };
                Ok(Category::Basic { name, features })
            }
        }
    }

    fn bundle(&mut self) -> Result<FeatureBundle, String> {
        self.bump(); // '['
        let mut pairs = Vec::new();
        loop {
            let name = self.ident("feature name")?;
            self.skip_ws();
            if !self.eat('=') {
                return Err(format!("expected `=` after feature `{name}`"));
            }
            self.skip_ws();
            let val = if self.eat('?') {
                FeatVal::var(self.ident("feature variable")?)
            } else {
                FeatVal::Const(self.ident("feature value")?)
            };
            pairs.push((name, val));
            self.skip_ws();
            if self.eat(',') {
                continue;
            }
            if self.eat(']') {
                break;
            }
            return Err("expected `,` or `]` in feature bundle".into());
        }
        FeatureBundle::new(pairs)
    }

    // -- lambda terms --

    fn lambda(&mut self, scope: &mut Vec<String>) -> Result<LambdaTerm, String> {
        self.skip_ws();
        if self.peek() == Some('\\') {
            self.bump();
            let binder = self.ident("lambda binder")?;
            scope.push(binder.clone());
            self.skip_ws();
            // Binders group: `\x\y.body`; a dot starts the body.
            let body = if self.peek() == Some('\\') {
                self.lambda(scope)?
            } else if self.eat('.') {
                self.lambda(scope)?
            } else {
                return Err(format!("expected `\\` or `.` after binder `{binder}`"));
            };
            scope.pop();
            return Ok(LambdaTerm::abs(binder, body));
        }
        self.application(scope)
    }

    fn application(&mut self, scope: &mut Vec<String>) -> Result<LambdaTerm, String> {
        let mut term = self
            .lf_atom(scope)?
            .ok_or_else(|| format!("expected a term, found `{}`", self.describe_here()))?;
        loop {
            match self.lf_atom(scope)? {
                Some(arg) => term = LambdaTerm::app(term, arg),
                None => return Ok(term),
            }
        }
    }

    fn lf_atom(&mut self, scope: &mut Vec<String>) -> Result<Option<LambdaTerm>, String> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.bump();
                let t = self.lambda(scope)?;
                self.skip_ws();
                if !self.eat(')') {
                    return Err("unbalanced parenthesis in predicate-argument structure".into());
                }
                Ok(Some(t))
            }
            Some('!') => {
                self.bump();
                let start = self.pos;
                while matches!(self.peek(), Some(c) if is_ident_char(c)) {
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err("expected identifier after `!`".into());
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                Ok(Some(LambdaTerm::Const { name: name.to_ascii_lowercase(), quoted: true }))
            }
            Some('_') if !matches!(self.peek_at(1), Some(c) if is_ident_char(c)) => {
                // The predicate modality marker: an ordinary constant.
                self.bump();
                Ok(Some(LambdaTerm::constant("_")))
            }
            Some(c) if is_ident_char(c) => {
                let name = self.ident("term identifier")?;
                if scope.iter().any(|b| *b == name) {
                    Ok(Some(LambdaTerm::var(name)))
                } else {
                    Ok(Some(LambdaTerm::constant(name)))
                }
            }
            _ => Ok(None),
        }
    }
}

/// Parses a category from text, requiring the whole input to be consumed.
pub fn parse_category(s: &str) -> Result<Category, String> {
    let mut sc = Scanner::new(s);
    let cat = sc.category()?;
    if !sc.at_end() {
        return Err(format!("unexpected `{}` after category", sc.rest().trim()));
    }
    Ok(cat)
}

/// Parses a predicate-argument structure from text.
pub fn parse_lambda(s: &str) -> Result<LambdaTerm, String> {
    let mut sc = Scanner::new(s);
    let t = sc.lambda(&mut Vec::new())?;
    if !sc.at_end() {
        return Err(format!("unexpected `{}` after predicate-argument structure", sc.rest().trim()));
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Element lines
// ---------------------------------------------------------------------------

/// Splits an optional trailing `<key, weight>` off a line fragment.
fn take_key_weight(s: &str) -> Result<(&str, Option<u64>, f64), String> {
    let t = s.trim_end();
    if !t.ends_with('>') {
        return Ok((s, None, 1.0));
    }
    let open = t.rfind('<').ok_or("unmatched `>` at end of line")?;
    let inner = &t[open + 1..t.len() - 1];
    let (k, w) = inner
        .split_once(',')
        .ok_or("key/weight suffix must look like `<key, weight>`")?;
    let key: u64 = k
        .trim()
        .parse()
        .map_err(|_| format!("bad key `{}` in key/weight suffix", k.trim()))?;
    if key == 0 {
        return Err("keys are positive integers".into());
    }
    let weight: f64 = w
        .trim()
        .parse()
        .map_err(|_| format!("bad weight `{}` in key/weight suffix", w.trim()))?;
    Ok((&t[..open], Some(key), weight))
}

/// Splits `cat : lf` text into its two parts.
fn split_cat_lf(s: &str) -> Result<(&str, &str), String> {
    let i = find_single_colon(s).ok_or("expected `category : predicate-argument structure`")?;
    Ok((&s[..i], &s[i + 1..]))
}

fn parse_cat_lf(s: &str) -> Result<(Category, LambdaTerm), String> {
    let (c, l) = split_cat_lf(s)?;
    Ok((parse_category(c)?, parse_lambda(l)?))
}

fn check_entry_category(cat: &Category) -> Result<(), String> {
    if cat.singleton_in_result() {
        return Err("singleton categories are domains only; one appears as a result".into());
    }
    Ok(())
}

/// The correspondence between s-command and l-command: a complex syntactic
/// type cannot pair with a simplex predicate-argument structure. One lambda
/// is enough for a higher-arity category when the abstracted argument is
/// itself a function (`\p.p` under `(s/np)/vp`), so only the no-lambda case
/// is uninterpretable.
fn check_correspondence(cat: &Category, lf: &LambdaTerm) -> Result<(), String> {
    if cat.arity() >= 1 && lf.leading_lambdas() == 0 {
        return Err(
            "complex s-command with no lambda in the predicate-argument \
             structure; the correspondence cannot be kept"
                .into(),
        );
    }
    Ok(())
}

fn parse_entry_line(line: &str) -> Result<Entry, String> {
    let bar = line.find('|').expect("caller checked for `|`");
    let phon: Vec<String> = line[..bar].split_whitespace().map(str::to_string).collect();
    if phon.is_empty() {
        return Err("entry has no phonological material before `|`".into());
    }
    let rest = &line[bar + 1..];
    let sep = find_top_level(rest, "::").ok_or("entry needs `::` before its category")?;
    let pos_part = rest[..sep].trim();
    let pos_tokens: Vec<&str> = pos_part.split_whitespace().collect();
    let pos = match pos_tokens.as_slice() {
        [one] => one.to_ascii_lowercase(),
        [] => return Err("entry is missing its part of speech".into()),
        _ => return Err("part of speech must be a single token".into()),
    };
    let (body, key, weight) = take_key_weight(&rest[sep + 2..])?;
    let (cat, lf) = parse_cat_lf(body)?;
    check_entry_category(&cat)?;
    check_correspondence(&cat, &lf)?;
    Ok(Entry { phon, pos, cat, lf, key, weight })
}

fn parse_rule_line(line: &str) -> Result<RawElement, String> {
    let after_hash = &line[1..];
    let name_end = after_hash
        .find(char::is_whitespace)
        .ok_or("rule has a name but no body")?;
    let name = &after_hash[..name_end];
    if !is_valid_ident(name) {
        return Err(format!("`{name}` is not a valid rule name"));
    }
    let name = name.to_ascii_lowercase();
    let body = &after_hash[name_end..];

    if let Some(i) = find_top_level(body, "<-->") {
        let left = parse_sym_side(&body[..i])?;
        let right = parse_sym_side(&body[i + 4..])?;
        return Ok(RawElement::Sym(SymRule { name, left, right }));
    }
    if let Some(i) = find_top_level(body, "-->") {
        let (lhs_cat, lhs_lf) = parse_cat_lf(&body[..i])?;
        let (rhs_body, key, weight) = take_key_weight(&body[i + 3..])?;
        let (rhs_cat, rhs_lf) = parse_cat_lf(rhs_body)?;
        check_entry_category(&lhs_cat)?;
        check_entry_category(&rhs_cat)?;
        return Ok(RawElement::Asym(AsymRule { name, lhs_cat, lhs_lf, rhs_cat, rhs_lf, key, weight }));
    }
    Err("relational rule needs `-->` or `<-->`".into())
}

fn parse_sym_side(s: &str) -> Result<SymSide, String> {
    let comma = find_top_level(s, ",")
        .ok_or("each side of `<-->` needs phonological material ending with a comma")?;
    let phon: Vec<String> = s[..comma].split_whitespace().map(str::to_string).collect();
    if phon.is_empty() {
        return Err("symmetric rule side has no phonological material".into());
    }
    let (cat, lf) = parse_cat_lf(&s[comma + 1..])?;
    check_entry_category(&cat)?;
    check_correspondence(&cat, &lf)?;
    Ok(SymSide { phon, cat, lf })
}

/// Parses one grammar element line (comments already stripped).
pub fn parse_element_line(line: &str) -> Result<RawElement, String> {
    let line = line.trim();
    if line.starts_with('#') {
        parse_rule_line(line)
    } else if line.contains('|') {
        parse_entry_line(line).map(RawElement::Entry)
    } else {
        Err("not a grammar element: expected `phon | pos :: cat : lf` or a `#` rule".into())
    }
}

/// Parses a whole grammar text. One element per non-empty, non-comment
/// line; bad lines are reported and skipped so that all diagnostics are
/// collected in one pass.
pub fn parse_grammar_text(text: &str) -> (Grammar, Vec<LineError>) {
    let mut grammar = Grammar::default();
    let mut errors = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let protect = if raw.trim_start().starts_with('#') {
            0
        } else {
            raw.find('|').map(|i| i + 1).unwrap_or(0)
        };
        let line = strip_comment(raw, protect);
        if line.trim().is_empty() {
            continue;
        }
        match parse_element_line(line) {
            Ok(el) => grammar.elements.push(el),
            Err(reason) => errors.push(LineError { line: idx + 1, reason }),
        }
    }
    (grammar, errors)
}
