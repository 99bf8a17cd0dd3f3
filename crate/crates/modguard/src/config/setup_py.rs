//! Static extraction of `setup(...)` keyword arguments from setup.py.
//!
//! The script is tokenized and scanned, never executed. Dataflow is bounded:
//! a keyword value resolves if it is a literal, a variable bound exactly
//! once to a literal, a `+` concatenation of resolved lists or strings, or a
//! `find_packages(...)` / `find_namespace_packages(...)` call with literal
//! arguments. Everything else is reported per-keyword as unresolvable.

use super::{ConfigError, DependencyKeywords};
use crate::metadata::{FindDirective, Keyword, PackagesSpec, Provenance, RawModuleData};
use crate::pep::parse_requirement;
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Str(String),
    /// An f-string or other string whose content is not statically known.
    DynamicStr,
    Int(i64),
    Float,
    Op(&'static str),
    Newline,
}

const OPS2: &[(&str, &str)] = &[
    ("**", "**"),
    ("==", "=="),
    ("!=", "!="),
    ("<=", "<="),
    (">=", ">="),
    ("//", "//"),
    ("->", "->"),
    ("+=", "+="),
    ("-=", "-="),
    ("*=", "*="),
    ("/=", "/="),
    ("%=", "%="),
    (":=", ":="),
];

const OPS1: &[(&str, &str)] = &[
    ("(", "("),
    (")", ")"),
    ("[", "["),
    ("]", "]"),
    ("{", "{"),
    ("}", "}"),
    (",", ","),
    (":", ":"),
    ("=", "="),
    ("+", "+"),
    ("-", "-"),
    ("*", "*"),
    ("/", "/"),
    ("%", "%"),
    (".", "."),
    ("<", "<"),
    (">", ">"),
    (";", ";"),
    ("@", "@"),
    ("&", "&"),
    ("|", "|"),
    ("^", "^"),
    ("~", "~"),
];

fn tokenize(source: &str) -> Result<Vec<Tok>, ConfigError> {
    let chars: Vec<char> = source.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut depth = 0i32;
    let mut line = 1usize;

    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                line += 1;
                if depth == 0 && !matches!(toks.last(), Some(Tok::Newline) | None) {
                    toks.push(Tok::Newline);
                }
                i += 1;
            }
            ' ' | '\t' | '\r' => i += 1,
            '\\' if chars.get(i + 1) == Some(&'\n') => {
                line += 1;
                i += 2;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '\'' | '"' => {
                let (tok, next) = read_string(&chars, i, false, false, line)?;
                toks.push(tok);
                line += chars[i..next].iter().filter(|c| **c == '\n').count();
                i = next;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                // String prefixes: r"", b"", f"", rb"" and case variants.
                let lower = word.to_ascii_lowercase();
                let is_prefix = word.len() <= 2 && lower.chars().all(|c| "rbuf".contains(c));
                if is_prefix && matches!(chars.get(j), Some('\'') | Some('"')) {
                    let raw = lower.contains('r');
                    let dynamic = lower.contains('f');
                    let (tok, next) = read_string(&chars, j, raw, dynamic, line)?;
                    toks.push(tok);
                    line += chars[j..next].iter().filter(|c| **c == '\n').count();
                    i = next;
                } else {
                    toks.push(Tok::Name(word));
                    i = j;
                }
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                let mut is_float = false;
                while j < chars.len()
                    && (chars[j].is_ascii_alphanumeric()
                        || chars[j] == '_'
                        || chars[j] == '.'
                        || ((chars[j] == '+' || chars[j] == '-')
                            && matches!(chars.get(j - 1), Some('e') | Some('E'))))
                {
                    if chars[j] == '.' || chars[j] == 'e' || chars[j] == 'E' {
                        is_float = true;
                    }
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                if is_float {
                    toks.push(Tok::Float);
                } else {
                    match text.replace('_', "").parse::<i64>() {
                        Ok(n) => toks.push(Tok::Int(n)),
                        Err(_) => toks.push(Tok::Float),
                    }
                }
                i = j;
            }
            _ => {
                let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
                if let Some((_, op)) = OPS2.iter().find(|(text, _)| rest.starts_with(text)) {
                    toks.push(Tok::Op(op));
                    i += 2;
                } else if let Some((_, op)) =
                    OPS1.iter().find(|(text, _)| rest.starts_with(text))
                {
                    match *op {
                        "(" | "[" | "{" => depth += 1,
                        ")" | "]" | "}" => depth -= 1,
                        _ => {}
                    }
                    toks.push(Tok::Op(op));
                    i += 1;
                } else {
                    return Err(ConfigError::ScriptUnparseable {
                        line,
                        message: format!("unexpected character {c:?}"),
                    });
                }
            }
        }
    }
    Ok(toks)
}

/// Read a (possibly triple-quoted) string literal starting at the quote.
/// Returns the token and the index just past the closing quote.
fn read_string(
    chars: &[char],
    start: usize,
    raw: bool,
    dynamic: bool,
    line: usize,
) -> Result<(Tok, usize), ConfigError> {
    let quote = chars[start];
    let triple = chars.get(start + 1) == Some(&quote) && chars.get(start + 2) == Some(&quote);
    let mut i = start + if triple { 3 } else { 1 };
    let mut value = String::new();

    loop {
        if i >= chars.len() {
            return Err(ConfigError::ScriptUnparseable {
                line,
                message: "unterminated string literal".to_string(),
            });
        }
        let c = chars[i];
        if c == quote {
            if !triple {
                i += 1;
                break;
            }
            if chars.get(i + 1) == Some(&quote) && chars.get(i + 2) == Some(&quote) {
                i += 3;
                break;
            }
            value.push(c);
            i += 1;
        } else if c == '\\' && !raw {
            let escaped = chars.get(i + 1).copied().unwrap_or('\\');
            match escaped {
                'n' => value.push('\n'),
                't' => value.push('\t'),
                'r' => value.push('\r'),
                '\\' => value.push('\\'),
                '\'' => value.push('\''),
                '"' => value.push('"'),
                '0' => value.push('\0'),
                '\n' => {}
                other => {
                    value.push('\\');
                    value.push(other);
                }
            }
            i += 2;
        } else {
            if c == '\n' && !triple {
                return Err(ConfigError::ScriptUnparseable {
                    line,
                    message: "newline in single-quoted string".to_string(),
                });
            }
            value.push(c);
            i += 1;
        }
    }

    Ok((if dynamic { Tok::DynamicStr } else { Tok::Str(value) }, i))
}

/// A statically resolved Python value.
#[derive(Debug, Clone, PartialEq)]
enum PyValue {
    Str(String),
    Int(i64),
    Bool(bool),
    NoneValue,
    List(Vec<PyValue>),
    Dict(Vec<(PyValue, PyValue)>),
    Find(FindDirective),
    Unresolvable,
}

impl PyValue {
    fn is_unresolvable(&self) -> bool {
        matches!(self, PyValue::Unresolvable)
    }
}

#[derive(Debug, Clone)]
enum Binding {
    Once(PyValue),
    Multi,
}

type Bindings = HashMap<String, Binding>;

struct ExprParser<'a> {
    toks: &'a [Tok],
    pos: usize,
    bindings: &'a Bindings,
}

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn skip_balanced(&mut self) {
        // Consume one bracketed group including its delimiters.
        let mut depth = 0i32;
        while let Some(tok) = self.peek() {
            match tok {
                Tok::Op("(") | Tok::Op("[") | Tok::Op("{") => depth += 1,
                Tok::Op(")") | Tok::Op("]") | Tok::Op("}") => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos += 1;
                        return;
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
    }

    /// Parse one expression, resolving what the bounded dataflow allows.
    fn parse_value(&mut self) -> PyValue {
        let mut value = self.parse_primary();
        loop {
            match self.peek() {
                // Postfix attribute access / calls / subscripts poison the value.
                Some(Tok::Op(".")) => {
                    self.pos += 1;
                    if matches!(self.peek(), Some(Tok::Name(_))) {
                        self.pos += 1;
                    }
                    value = PyValue::Unresolvable;
                }
                Some(Tok::Op("(")) | Some(Tok::Op("[")) => {
                    self.skip_balanced();
                    value = PyValue::Unresolvable;
                }
                Some(Tok::Op("+")) => {
                    self.pos += 1;
                    let rhs = self.parse_primary_with_postfix();
                    value = match (value, rhs) {
                        (PyValue::Str(a), PyValue::Str(b)) => PyValue::Str(a + &b),
                        (PyValue::List(mut a), PyValue::List(b)) => {
                            a.extend(b);
                            PyValue::List(a)
                        }
                        _ => PyValue::Unresolvable,
                    };
                }
                Some(Tok::Op(op))
                    if ["-", "*", "/", "%", "//", "**", "==", "!=", "<", ">", "<=", ">=", "|", "&"]
                        .contains(op) =>
                {
                    self.pos += 1;
                    let _ = self.parse_primary_with_postfix();
                    value = PyValue::Unresolvable;
                }
                // `x if cond else y` and similar leftovers.
                Some(Tok::Name(word)) if ["if", "for", "or", "and", "not", "in", "else"].contains(&word.as_str()) => {
                    self.consume_rest_of_expression();
                    value = PyValue::Unresolvable;
                }
                _ => break,
            }
        }
        value
    }

    fn parse_primary_with_postfix(&mut self) -> PyValue {
        let mut value = self.parse_primary();
        loop {
            match self.peek() {
                Some(Tok::Op(".")) => {
                    self.pos += 1;
                    if matches!(self.peek(), Some(Tok::Name(_))) {
                        self.pos += 1;
                    }
                    value = PyValue::Unresolvable;
                }
                Some(Tok::Op("(")) | Some(Tok::Op("[")) => {
                    self.skip_balanced();
                    value = PyValue::Unresolvable;
                }
                _ => break,
            }
        }
        value
    }

    /// Consume tokens until a comma or closer at the current nesting level.
    fn consume_rest_of_expression(&mut self) {
        let mut depth = 0i32;
        while let Some(tok) = self.peek() {
            match tok {
                Tok::Op("(") | Tok::Op("[") | Tok::Op("{") => depth += 1,
                Tok::Op(")") | Tok::Op("]") | Tok::Op("}") => {
                    if depth == 0 {
                        return;
                    }
                    depth -= 1;
                }
                Tok::Op(",") if depth == 0 => return,
                _ => {}
            }
            self.pos += 1;
        }
    }

    fn parse_primary(&mut self) -> PyValue {
        match self.peek().cloned() {
            Some(Tok::Str(first)) => {
                self.pos += 1;
                let mut text = first;
                // Adjacent string literals concatenate.
                while let Some(Tok::Str(next)) = self.peek() {
                    text.push_str(next);
                    self.pos += 1;
                }
                PyValue::Str(text)
            }
            Some(Tok::DynamicStr) => {
                self.pos += 1;
                PyValue::Unresolvable
            }
            Some(Tok::Int(n)) => {
                self.pos += 1;
                PyValue::Int(n)
            }
            Some(Tok::Float) => {
                self.pos += 1;
                PyValue::Unresolvable
            }
            Some(Tok::Op("[")) => self.parse_sequence("]"),
            Some(Tok::Op("(")) => self.parse_sequence(")"),
            Some(Tok::Op("{")) => self.parse_braced(),
            Some(Tok::Op("-")) => {
                self.pos += 1;
                match self.parse_primary() {
                    PyValue::Int(n) => PyValue::Int(-n),
                    _ => PyValue::Unresolvable,
                }
            }
            Some(Tok::Op("*")) | Some(Tok::Op("**")) => {
                // Splat inside a display.
                self.pos += 1;
                let _ = self.parse_primary_with_postfix();
                PyValue::Unresolvable
            }
            Some(Tok::Name(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "True" => return PyValue::Bool(true),
                    "False" => return PyValue::Bool(false),
                    "None" => return PyValue::NoneValue,
                    _ => {}
                }
                // Fold dotted chains: setuptools.find_packages
                let mut last = name;
                while matches!(self.peek(), Some(Tok::Op(".")))
                    && matches!(self.toks.get(self.pos + 1), Some(Tok::Name(_)))
                {
                    self.pos += 2;
                    if let Some(Tok::Name(n)) = self.toks.get(self.pos - 1) {
                        last = n.clone();
                    }
                }
                if matches!(self.peek(), Some(Tok::Op("("))) {
                    return self.parse_call(&last);
                }
                match self.bindings.get(&last) {
                    Some(Binding::Once(value)) => value.clone(),
                    _ => PyValue::Unresolvable,
                }
            }
            _ => {
                if self.peek().is_some() {
                    self.pos += 1;
                }
                PyValue::Unresolvable
            }
        }
    }

    fn parse_sequence(&mut self, closer: &str) -> PyValue {
        let opener_pos = self.pos;
        self.pos += 1; // consume opener
        let mut items = Vec::new();
        let mut poisoned = false;
        loop {
            match self.peek() {
                None => return PyValue::Unresolvable,
                Some(Tok::Op(op)) if *op == closer => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Op(",")) => {
                    self.pos += 1;
                }
                Some(Tok::Name(word)) if word == "for" => {
                    // Comprehension: consume the whole display.
                    self.pos = opener_pos;
                    self.skip_balanced();
                    return PyValue::Unresolvable;
                }
                _ => {
                    let value = self.parse_value();
                    if value.is_unresolvable() {
                        poisoned = true;
                    }
                    items.push(value);
                }
            }
        }
        // A parenthesized single value is just that value.
        if closer == ")" && items.len() == 1 && !self.was_tuple(opener_pos) {
            return items.pop().unwrap();
        }
        if poisoned {
            return PyValue::Unresolvable;
        }
        PyValue::List(items)
    }

    fn was_tuple(&self, opener_pos: usize) -> bool {
        // A trailing comma before the closer marks a one-element tuple.
        let mut depth = 0i32;
        let mut last_comma_at_depth1 = false;
        for tok in &self.toks[opener_pos..self.pos] {
            match tok {
                Tok::Op("(") | Tok::Op("[") | Tok::Op("{") => depth += 1,
                Tok::Op(")") | Tok::Op("]") | Tok::Op("}") => depth -= 1,
                Tok::Op(",") if depth == 1 => last_comma_at_depth1 = true,
                _ => {}
            }
        }
        last_comma_at_depth1
    }

    fn parse_braced(&mut self) -> PyValue {
        let opener_pos = self.pos;
        self.pos += 1;
        let mut entries = Vec::new();
        let mut poisoned = false;
        loop {
            match self.peek() {
                None => return PyValue::Unresolvable,
                Some(Tok::Op("}")) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Op(",")) => {
                    self.pos += 1;
                }
                Some(Tok::Name(word)) if word == "for" => {
                    self.pos = opener_pos;
                    self.skip_balanced();
                    return PyValue::Unresolvable;
                }
                _ => {
                    let key = self.parse_value();
                    if !matches!(self.peek(), Some(Tok::Op(":"))) {
                        // Set display; nobody consumes sets for module data.
                        poisoned = true;
                        continue;
                    }
                    self.pos += 1;
                    let value = self.parse_value();
                    if key.is_unresolvable() || value.is_unresolvable() {
                        poisoned = true;
                    }
                    entries.push((key, value));
                }
            }
        }
        if poisoned {
            return PyValue::Unresolvable;
        }
        PyValue::Dict(entries)
    }

    /// Calls: find_packages / find_namespace_packages resolve to a find
    /// directive, dict(...) to a dict; everything else is unresolvable.
    fn parse_call(&mut self, callee: &str) -> PyValue {
        match callee {
            "find_packages" | "find_namespace_packages" => {
                let args = self.parse_call_args();
                let Some(args) = args else {
                    return PyValue::Unresolvable;
                };
                let mut directive = FindDirective {
                    namespaces: callee == "find_namespace_packages",
                    ..Default::default()
                };
                for (name, value) in args {
                    match (name.as_deref(), value) {
                        (Some("where") | None, PyValue::Str(s)) => {
                            directive.where_dir = if s == "." { String::new() } else { s };
                        }
                        (Some("include"), value) => match string_items(&value) {
                            Some(items) => directive.include = items,
                            None => return PyValue::Unresolvable,
                        },
                        (Some("exclude"), value) => match string_items(&value) {
                            Some(items) => directive.exclude = items,
                            None => return PyValue::Unresolvable,
                        },
                        _ => return PyValue::Unresolvable,
                    }
                }
                PyValue::Find(directive)
            }
            "dict" => {
                let args = self.parse_call_args();
                let Some(args) = args else {
                    return PyValue::Unresolvable;
                };
                let mut entries = Vec::new();
                for (name, value) in args {
                    match name {
                        Some(key) => entries.push((PyValue::Str(key), value)),
                        None => return PyValue::Unresolvable,
                    }
                }
                PyValue::Dict(entries)
            }
            _ => {
                self.skip_balanced();
                PyValue::Unresolvable
            }
        }
    }

    /// Parse `(a, b, key=value, ...)` into (optional name, value) pairs.
    /// `None` when an argument form defeats static resolution.
    fn parse_call_args(&mut self) -> Option<Vec<(Option<String>, PyValue)>> {
        self.pos += 1; // consume '('
        let mut args = Vec::new();
        loop {
            match self.peek() {
                None => return None,
                Some(Tok::Op(")")) => {
                    self.pos += 1;
                    return Some(args);
                }
                Some(Tok::Op(",")) => {
                    self.pos += 1;
                }
                Some(Tok::Op("*")) | Some(Tok::Op("**")) => {
                    // Splatted arguments are not tracked here.
                    self.consume_rest_of_expression();
                    args.push((None, PyValue::Unresolvable));
                }
                Some(Tok::Name(name))
                    if matches!(self.toks.get(self.pos + 1), Some(Tok::Op("="))) =>
                {
                    let key = name.clone();
                    self.pos += 2;
                    let value = self.parse_value();
                    args.push((Some(key), value));
                }
                _ => {
                    let value = self.parse_value();
                    args.push((None, value));
                }
            }
        }
    }
}

fn string_items(value: &PyValue) -> Option<Vec<String>> {
    match value {
        PyValue::List(items) => items
            .iter()
            .map(|item| match item {
                PyValue::Str(s) => Some(s.clone()),
                _ => None,
            })
            .collect(),
        PyValue::Str(s) => Some(vec![s.clone()]),
        _ => None,
    }
}

/// Split the token stream into logical lines.
fn logical_lines(toks: &[Tok]) -> Vec<&[Tok]> {
    toks.split(|t| matches!(t, Tok::Newline))
        .filter(|l| !l.is_empty())
        .collect()
}

/// Scan assignment statements, keeping only names bound exactly once to a
/// resolvable literal.
fn collect_bindings(lines: &[&[Tok]]) -> Bindings {
    let mut bindings = Bindings::new();
    for line in lines {
        match line {
            [Tok::Name(name), Tok::Op("="), rest @ ..]
                if !rest.is_empty() && !matches!(rest.first(), Some(Tok::Op("="))) =>
            {
                let mut parser = ExprParser {
                    toks: rest,
                    pos: 0,
                    bindings: &bindings,
                };
                let mut value = parser.parse_value();
                if parser.pos != rest.len() {
                    value = PyValue::Unresolvable;
                }
                match bindings.get(name.as_str()) {
                    Some(_) => {
                        bindings.insert(name.clone(), Binding::Multi);
                    }
                    None => {
                        bindings.insert(name.clone(), Binding::Once(value));
                    }
                }
            }
            [Tok::Name(name), Tok::Op(op), ..]
                if ["+=", "-=", "*=", "/=", "%="].contains(op) =>
            {
                bindings.insert(name.clone(), Binding::Multi);
            }
            _ => {}
        }
    }
    bindings
}

/// Locate the `setup(` call and return its parsed keyword arguments, plus a
/// flag for `**kwargs` splats that defeat tracking.
fn parse_setup_kwargs(
    lines: &[&[Tok]],
    bindings: &Bindings,
) -> Option<(Vec<(String, PyValue)>, bool)> {
    for line in lines {
        for (i, window) in line.windows(2).enumerate() {
            let [Tok::Name(name), Tok::Op("(")] = window else {
                continue;
            };
            if name != "setup" {
                continue;
            }
            // Skip definitions of a function named setup.
            if i > 0 && matches!(line.get(i - 1), Some(Tok::Name(def)) if def == "def") {
                continue;
            }
            let mut kwargs = Vec::new();
            let mut splat_unknown = false;
            let mut parser = ExprParser {
                toks: line,
                pos: i + 2,
                bindings,
            };
            loop {
                match parser.peek() {
                    None => break,
                    Some(Tok::Op(")")) => break,
                    Some(Tok::Op(",")) => parser.pos += 1,
                    Some(Tok::Op("**")) => {
                        parser.pos += 1;
                        let value = parser.parse_value();
                        match value {
                            PyValue::Dict(entries) => {
                                for (key, val) in entries {
                                    if let PyValue::Str(key) = key {
                                        kwargs.push((key, val));
                                    } else {
                                        splat_unknown = true;
                                    }
                                }
                            }
                            _ => splat_unknown = true,
                        }
                    }
                    Some(Tok::Name(key))
                        if matches!(parser.toks.get(parser.pos + 1), Some(Tok::Op("=")))
                            && !matches!(parser.toks.get(parser.pos + 2), Some(Tok::Op("="))) =>
                    {
                        let key = key.clone();
                        parser.pos += 2;
                        let start = parser.pos;
                        let mut value = parser.parse_value();
                        // Anything left before the comma means we did not
                        // fully understand the expression.
                        if !matches!(parser.peek(), Some(Tok::Op(",")) | Some(Tok::Op(")")) | None)
                        {
                            parser.pos = start;
                            parser.consume_rest_of_expression();
                            value = PyValue::Unresolvable;
                        }
                        kwargs.push((key, value));
                    }
                    _ => {
                        // Positional argument or noise: consume one expression.
                        parser.consume_rest_of_expression();
                    }
                }
            }
            return Some((kwargs, splat_unknown));
        }
    }
    None
}

fn to_name_list(value: &PyValue) -> Keyword<Vec<String>> {
    match string_items(value) {
        Some(items) => Keyword::Value(items),
        None => Keyword::Unresolvable,
    }
}

fn to_requirements(value: &PyValue) -> Keyword<Vec<crate::pep::Requirement>> {
    let lines = match value {
        PyValue::Str(s) => s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect(),
        other => match string_items(other) {
            Some(items) => items,
            None => return Keyword::Unresolvable,
        },
    };
    let mut reqs = Vec::new();
    for line in lines {
        match parse_requirement(&line) {
            Ok(req) => reqs.push(req),
            Err(e) => log::warn!("setup.py requirement {line:?}: skipping: {e}"),
        }
    }
    Keyword::Value(reqs)
}

/// Statically extract module and dependency keywords from a setup.py script.
pub fn extract_setup_py(
    content: &str,
) -> Result<(RawModuleData, DependencyKeywords), ConfigError> {
    let toks = tokenize(content)?;
    let lines = logical_lines(&toks);
    let bindings = collect_bindings(&lines);
    let Some((kwargs, splat_unknown)) = parse_setup_kwargs(&lines, &bindings) else {
        return Err(ConfigError::NoSetupCall);
    };

    let mut module = RawModuleData {
        provenance: Some(Provenance::ConfigScript),
        ..Default::default()
    };
    let mut deps = DependencyKeywords::default();
    if splat_unknown {
        module.py_modules = Keyword::Unresolvable;
        module.packages = Keyword::Unresolvable;
        module.package_dir = Keyword::Unresolvable;
        module.namespace_packages = Keyword::Unresolvable;
        deps.install = Keyword::Unresolvable;
        deps.extras = Keyword::Unresolvable;
    }

    for (key, value) in kwargs {
        match key.as_str() {
            "py_modules" => module.py_modules = to_name_list(&value),
            "namespace_packages" => module.namespace_packages = to_name_list(&value),
            "packages" => {
                module.packages = match &value {
                    PyValue::Find(directive) => {
                        Keyword::Value(PackagesSpec::Find(directive.clone()))
                    }
                    other => match string_items(other) {
                        Some(items) => Keyword::Value(PackagesSpec::List(items)),
                        None => Keyword::Unresolvable,
                    },
                };
            }
            "package_dir" => {
                module.package_dir = match &value {
                    PyValue::Dict(entries) => {
                        let mut map = BTreeMap::new();
                        let mut ok = true;
                        for (k, v) in entries {
                            match (k, v) {
                                (PyValue::Str(post), PyValue::Str(pre)) => {
                                    map.insert(post.clone(), pre.clone());
                                }
                                _ => ok = false,
                            }
                        }
                        if ok {
                            Keyword::Value(map)
                        } else {
                            Keyword::Unresolvable
                        }
                    }
                    _ => Keyword::Unresolvable,
                };
            }
            "install_requires" => deps.install = to_requirements(&value),
            "extras_require" => {
                deps.extras = match &value {
                    PyValue::Dict(entries) => {
                        let mut map = BTreeMap::new();
                        let mut ok = true;
                        for (k, v) in entries {
                            let PyValue::Str(extra) = k else {
                                ok = false;
                                continue;
                            };
                            let name = match crate::pep::normalize_name(extra) {
                                Ok(n) => n.normalized().to_string(),
                                Err(e) => {
                                    log::warn!("setup.py extras_require {extra:?}: {e}");
                                    continue;
                                }
                            };
                            match to_requirements(v) {
                                Keyword::Value(reqs) => {
                                    map.insert(name, reqs);
                                }
                                _ => ok = false,
                            }
                        }
                        if ok {
                            Keyword::Value(map)
                        } else {
                            Keyword::Unresolvable
                        }
                    }
                    _ => Keyword::Unresolvable,
                };
            }
            _ => {}
        }
    }

    Ok((module, deps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_keywords_resolve() {
        let script = r#"
from setuptools import setup
setup(
    name="pkg",
    version="0.0.1",
    packages=["mod1"],
    namespace_packages=["mod1"],
    py_modules=["mod2"],
)
"#;
        let (module, _) = extract_setup_py(script).unwrap();
        assert_eq!(
            module.packages.value(),
            Some(&PackagesSpec::List(vec!["mod1".to_string()]))
        );
        assert_eq!(
            module.namespace_packages.value(),
            Some(&vec!["mod1".to_string()])
        );
        assert_eq!(module.py_modules.value(), Some(&vec!["mod2".to_string()]));
    }

    #[test]
    fn single_assignment_dataflow_resolves() {
        let script = r#"
deps = ["pytz>=2020.1"]
extra = {"toml": ["hypothesis>=5.5.3"]}
setup(name="pkg", install_requires=deps, extras_require=extra)
"#;
        let (_, deps) = extract_setup_py(script).unwrap();
        assert_eq!(deps.install.value().unwrap()[0].to_string(), "pytz>=2020.1");
        assert_eq!(
            deps.extras.value().unwrap()["toml"][0].to_string(),
            "hypothesis>=5.5.3"
        );
    }

    #[test]
    fn reassigned_names_are_unresolvable() {
        let script = "deps = [\"a\"]\ndeps = [\"b\"]\nsetup(install_requires=deps)\n";
        let (_, deps) = extract_setup_py(script).unwrap();
        assert_eq!(deps.install, Keyword::Unresolvable);
    }

    #[test]
    fn dynamic_reads_are_unresolvable() {
        let script = "setup(install_requires=open(\"reqs\").read().split())\n";
        let (_, deps) = extract_setup_py(script).unwrap();
        assert_eq!(deps.install, Keyword::Unresolvable);
    }

    #[test]
    fn find_packages_becomes_directive() {
        let script = r#"
from setuptools import setup, find_packages
setup(packages=find_packages(where="src", exclude=["tests*"]))
"#;
        let (module, _) = extract_setup_py(script).unwrap();
        match module.packages.value().unwrap() {
            PackagesSpec::Find(directive) => {
                assert_eq!(directive.where_dir, "src");
                assert_eq!(directive.exclude, vec!["tests*"]);
                assert!(!directive.namespaces);
            }
            other => panic!("expected find directive, got {other:?}"),
        }

        let script = "setup(packages=setuptools.find_namespace_packages())\n";
        let (module, _) = extract_setup_py(script).unwrap();
        match module.packages.value().unwrap() {
            PackagesSpec::Find(directive) => assert!(directive.namespaces),
            other => panic!("expected find directive, got {other:?}"),
        }
    }

    #[test]
    fn list_concatenation_of_literals() {
        let script = r#"
base = ["a>=1"]
setup(install_requires=base + ["b>=2"])
"#;
        let (_, deps) = extract_setup_py(script).unwrap();
        let reqs = deps.install.value().unwrap();
        assert_eq!(reqs.len(), 2);
        assert_eq!(reqs[1].to_string(), "b>=2");
    }

    #[test]
    fn dict_call_and_splat() {
        let script = r#"
config = dict(packages=["m"], install_requires=["a>=1"])
setup(**config)
"#;
        let (module, deps) = extract_setup_py(script).unwrap();
        assert_eq!(
            module.packages.value(),
            Some(&PackagesSpec::List(vec!["m".to_string()]))
        );
        assert_eq!(deps.install.value().unwrap()[0].to_string(), "a>=1");

        let script = "setup(**load_config())\n";
        let (module, deps) = extract_setup_py(script).unwrap();
        assert_eq!(module.packages, Keyword::Unresolvable);
        assert_eq!(deps.install, Keyword::Unresolvable);
    }

    #[test]
    fn missing_setup_call_and_syntax_errors() {
        assert!(matches!(
            extract_setup_py("x = 1\n"),
            Err(ConfigError::NoSetupCall)
        ));
        assert!(matches!(
            extract_setup_py("s = 'unterminated\nsetup()\n"),
            Err(ConfigError::ScriptUnparseable { .. })
        ));
    }

    #[test]
    fn untracked_keywords_and_positional_args_are_ignored() {
        let script = r#"
setup(
    "positional",
    name="pkg",
    version="1.0",
    author="someone",
    packages=["mod1"],
    classifiers=["Programming Language :: Python :: 3"],
)
"#;
        let (module, _) = extract_setup_py(script).unwrap();
        assert_eq!(
            module.packages.value(),
            Some(&PackagesSpec::List(vec!["mod1".to_string()]))
        );
    }

    #[test]
    fn conditional_expressions_are_unresolvable() {
        let script = r#"
import sys
pkgs = ["mod1"] if sys.version_info >= (3, 8) else ["mod2"]
setup(packages=pkgs, py_modules=["ok"])
"#;
        let (module, _) = extract_setup_py(script).unwrap();
        assert_eq!(module.packages, Keyword::Unresolvable);
        assert_eq!(module.py_modules.value(), Some(&vec!["ok".to_string()]));
    }

    #[test]
    fn triple_quoted_and_prefixed_strings() {
        let script = "desc = \"\"\"long\ntext\"\"\"\nsetup(name=r\"pkg\", packages=[u'mod1'], py_modules=[b\"m\"])\n";
        let (module, _) = extract_setup_py(script).unwrap();
        assert_eq!(
            module.packages.value(),
            Some(&PackagesSpec::List(vec!["mod1".to_string()]))
        );
        assert_eq!(module.py_modules.value(), Some(&vec!["m".to_string()]));
    }
}
