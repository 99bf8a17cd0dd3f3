use super::environment::{EnvironmentProfile, MARKER_VARIABLES};
use super::specifier::{Clause, Operator};
use super::version::parse_version;
use super::PepError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// Marker variables whose values compare under version ordering.
const VERSION_VARIABLES: &[&str] = &[
    "python_version",
    "python_full_version",
    "implementation_version",
];

/// The reserved variable naming an activated extra.
pub const EXTRA_VARIABLE: &str = "extra";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarkerOp {
    Eq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
    Compatible,
    ArbitraryEq,
    In,
    NotIn,
}

impl MarkerOp {
    fn as_str(self) -> &'static str {
        match self {
            MarkerOp::Eq => "==",
            MarkerOp::Ne => "!=",
            MarkerOp::Le => "<=",
            MarkerOp::Ge => ">=",
            MarkerOp::Lt => "<",
            MarkerOp::Gt => ">",
            MarkerOp::Compatible => "~=",
            MarkerOp::ArbitraryEq => "===",
            MarkerOp::In => "in",
            MarkerOp::NotIn => "not in",
        }
    }

    /// Mirror the operator for a `literal op variable` leaf so it can be
    /// evaluated as `variable op' literal`.
    fn flipped(self) -> MarkerOp {
        match self {
            MarkerOp::Le => MarkerOp::Ge,
            MarkerOp::Ge => MarkerOp::Le,
            MarkerOp::Lt => MarkerOp::Gt,
            MarkerOp::Gt => MarkerOp::Lt,
            other => other,
        }
    }
}

/// A single comparison. `reversed` records that the literal appeared on the
/// left-hand side (`'linux' in sys_platform`), which matters for `in`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerLeaf {
    pub var: String,
    pub op: MarkerOp,
    pub literal: String,
    pub reversed: bool,
}

/// Boolean expression tree over marker comparisons.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarkerExpr {
    And(Vec<MarkerExpr>),
    Or(Vec<MarkerExpr>),
    Leaf(MarkerLeaf),
}

impl fmt::Display for MarkerExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkerExpr::Leaf(leaf) => {
                if leaf.reversed {
                    write!(f, "'{}' {} {}", leaf.literal, leaf.op.as_str(), leaf.var)
                } else {
                    write!(f, "{} {} '{}'", leaf.var, leaf.op.as_str(), leaf.literal)
                }
            }
            MarkerExpr::And(parts) => {
                let rendered: Vec<String> = parts
                    .iter()
                    .map(|p| match p {
                        MarkerExpr::Or(_) => format!("({p})"),
                        _ => p.to_string(),
                    })
                    .collect();
                f.write_str(&rendered.join(" and "))
            }
            MarkerExpr::Or(parts) => {
                let rendered: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                f.write_str(&rendered.join(" or "))
            }
        }
    }
}

impl MarkerExpr {
    pub fn parse(text: &str) -> Result<Self, PepError> {
        let tokens = tokenize(text)?;
        let mut parser = Parser {
            text,
            tokens,
            pos: 0,
        };
        let expr = parser.parse_or()?;
        if parser.pos != parser.tokens.len() {
            return Err(PepError::InvalidMarker(
                text.into(),
                format!("trailing input after expression: {:?}", parser.peek_text()),
            ));
        }
        Ok(expr)
    }

    /// Evaluate under an environment and a set of active extras.
    pub fn eval(
        &self,
        env: &EnvironmentProfile,
        active_extras: &BTreeSet<String>,
    ) -> Result<bool, PepError> {
        eval_marker(self, env, active_extras)
    }

    /// Names mentioned in positive `extra == '<name>'` leaves. Used to route
    /// metadata requirements into their extra sections.
    pub fn extra_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_extras(&mut out);
        out
    }

    fn collect_extras(&self, out: &mut BTreeSet<String>) {
        match self {
            MarkerExpr::Leaf(leaf) => {
                if leaf.var == EXTRA_VARIABLE && leaf.op == MarkerOp::Eq {
                    out.insert(leaf.literal.clone());
                }
            }
            MarkerExpr::And(parts) | MarkerExpr::Or(parts) => {
                for p in parts {
                    p.collect_extras(out);
                }
            }
        }
    }

    /// The expression with every `extra` comparison removed (treated as
    /// true). Returns `None` when nothing but extra clauses remain.
    pub fn without_extra_clauses(&self) -> Option<MarkerExpr> {
        match self {
            MarkerExpr::Leaf(leaf) => {
                if leaf.var == EXTRA_VARIABLE {
                    None
                } else {
                    Some(self.clone())
                }
            }
            MarkerExpr::And(parts) => {
                let kept: Vec<MarkerExpr> =
                    parts.iter().filter_map(|p| p.without_extra_clauses()).collect();
                match kept.len() {
                    0 => None,
                    1 => Some(kept.into_iter().next().unwrap()),
                    _ => Some(MarkerExpr::And(kept)),
                }
            }
            MarkerExpr::Or(parts) => {
                let kept: Vec<MarkerExpr> =
                    parts.iter().filter_map(|p| p.without_extra_clauses()).collect();
                // Dropping an extra clause from a disjunction widens it to
                // always-true, matching how metadata writers emit
                // `foo ; extra == "e"` lines.
                if kept.len() != parts.len() {
                    return None;
                }
                match kept.len() {
                    0 => None,
                    1 => Some(kept.into_iter().next().unwrap()),
                    _ => Some(MarkerExpr::Or(kept)),
                }
            }
        }
    }
}

impl std::str::FromStr for MarkerExpr {
    type Err = PepError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MarkerExpr::parse(s)
    }
}

/// Evaluate a marker expression.
///
/// `extra == "x"` holds iff `x` is in `active_extras`. Version-valued
/// variables compare under version ordering; everything else compares as
/// strings, with `in` / `not in` meaning substring containment.
pub fn eval_marker(
    marker: &MarkerExpr,
    env: &EnvironmentProfile,
    active_extras: &BTreeSet<String>,
) -> Result<bool, PepError> {
    match marker {
        MarkerExpr::And(parts) => {
            for p in parts {
                if !eval_marker(p, env, active_extras)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        MarkerExpr::Or(parts) => {
            for p in parts {
                if eval_marker(p, env, active_extras)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        MarkerExpr::Leaf(leaf) => eval_leaf(leaf, env, active_extras),
    }
}

fn eval_leaf(
    leaf: &MarkerLeaf,
    env: &EnvironmentProfile,
    active_extras: &BTreeSet<String>,
) -> Result<bool, PepError> {
    if leaf.var == EXTRA_VARIABLE {
        return match leaf.op {
            MarkerOp::Eq => Ok(active_extras.contains(&leaf.literal)),
            MarkerOp::Ne => Ok(!active_extras.contains(&leaf.literal)),
            _ => Err(PepError::InvalidMarker(
                leaf.var.clone(),
                format!("operator {} not supported on extra", leaf.op.as_str()),
            )),
        };
    }

    let value = env
        .get(&leaf.var)
        .ok_or_else(|| PepError::UnknownVariable(leaf.var.clone()))?;

    let op = if leaf.reversed { leaf.op.flipped() } else { leaf.op };

    match op {
        MarkerOp::In | MarkerOp::NotIn => {
            // `lhs in rhs` is substring containment; which side is the
            // variable depends on the original orientation.
            let contained = if leaf.reversed {
                value.contains(&leaf.literal)
            } else {
                leaf.literal.contains(value)
            };
            Ok(if op == MarkerOp::In { contained } else { !contained })
        }
        _ => {
            if VERSION_VARIABLES.contains(&leaf.var.as_str()) {
                if let Some(result) = version_compare(value, op, &leaf.literal) {
                    return Ok(result);
                }
                log::warn!(
                    "marker {} {} '{}': not version-comparable, falling back to string compare",
                    leaf.var,
                    op.as_str(),
                    leaf.literal
                );
            }
            Ok(string_compare(value, op, &leaf.literal))
        }
    }
}

/// Compare `value op literal` as versions, treating the literal as a
/// specifier pattern so wildcards like `== '3.*'` work. `None` when either
/// side does not parse.
fn version_compare(value: &str, op: MarkerOp, literal: &str) -> Option<bool> {
    let candidate = parse_version(value).ok()?;
    let spec_op = match op {
        MarkerOp::Eq => Operator::Eq,
        MarkerOp::Ne => Operator::Ne,
        MarkerOp::Le => Operator::Le,
        MarkerOp::Ge => Operator::Ge,
        MarkerOp::Lt => Operator::Lt,
        MarkerOp::Gt => Operator::Gt,
        MarkerOp::Compatible => Operator::Compatible,
        MarkerOp::ArbitraryEq => Operator::ArbitraryEq,
        MarkerOp::In | MarkerOp::NotIn => return None,
    };
    let (pattern_text, wildcard) = match literal.strip_suffix(".*") {
        Some(prefix) if matches!(op, MarkerOp::Eq | MarkerOp::Ne) => (prefix, true),
        _ => (literal, false),
    };
    let pattern = parse_version(pattern_text).ok()?;
    if spec_op == Operator::Compatible && pattern.release.len() < 2 {
        return None;
    }
    let clause = Clause {
        op: spec_op,
        version: pattern,
        wildcard,
        raw: literal.to_string(),
    };
    let spec = super::specifier::VersionSpecifier {
        clauses: vec![clause],
    };
    Some(spec.contains(&candidate))
}

fn string_compare(value: &str, op: MarkerOp, literal: &str) -> bool {
    match op {
        MarkerOp::Eq => value == literal,
        MarkerOp::Ne => value != literal,
        MarkerOp::Le => value <= literal,
        MarkerOp::Ge => value >= literal,
        MarkerOp::Lt => value < literal,
        MarkerOp::Gt => value > literal,
        MarkerOp::ArbitraryEq => value == literal,
        MarkerOp::Compatible => {
            log::warn!("~= on non-version values compares for equality");
            value == literal
        }
        MarkerOp::In | MarkerOp::NotIn => unreachable!("handled by caller"),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Var(String),
    Str(String),
    Op(MarkerOp),
    LParen,
    RParen,
    And,
    Or,
}

fn tokenize(text: &str) -> Result<Vec<Token>, PepError> {
    let err = |msg: String| PepError::InvalidMarker(text.into(), msg);
    let mut tokens = Vec::new();
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                tokens.push(Token::LParen);
                i += 1;
            }
            ')' => {
                tokens.push(Token::RParen);
                i += 1;
            }
            '\'' | '"' => {
                let quote = c;
                let mut j = i + 1;
                let mut value = String::new();
                while j < bytes.len() && bytes[j] != quote {
                    value.push(bytes[j]);
                    j += 1;
                }
                if j >= bytes.len() {
                    return Err(err("unterminated string literal".into()));
                }
                tokens.push(Token::Str(value));
                i = j + 1;
            }
            '=' | '!' | '<' | '>' | '~' => {
                let rest: String = bytes[i..].iter().collect();
                let (op, len) = if rest.starts_with("===") {
                    (MarkerOp::ArbitraryEq, 3)
                } else if rest.starts_with("==") {
                    (MarkerOp::Eq, 2)
                } else if rest.starts_with("!=") {
                    (MarkerOp::Ne, 2)
                } else if rest.starts_with("<=") {
                    (MarkerOp::Le, 2)
                } else if rest.starts_with(">=") {
                    (MarkerOp::Ge, 2)
                } else if rest.starts_with("~=") {
                    (MarkerOp::Compatible, 2)
                } else if rest.starts_with('<') {
                    (MarkerOp::Lt, 1)
                } else if rest.starts_with('>') {
                    (MarkerOp::Gt, 1)
                } else {
                    return Err(err(format!("bad operator at {:?}", &rest[..1])));
                };
                tokens.push(Token::Op(op));
                i += len;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len()
                    && (bytes[j].is_ascii_alphanumeric() || bytes[j] == '_' || bytes[j] == '.')
                {
                    j += 1;
                }
                let word: String = bytes[i..j].iter().collect();
                match word.as_str() {
                    "and" => tokens.push(Token::And),
                    "or" => tokens.push(Token::Or),
                    "in" => tokens.push(Token::Op(MarkerOp::In)),
                    "not" => {
                        // Must pair with `in`.
                        let mut k = j;
                        while k < bytes.len() && bytes[k] == ' ' {
                            k += 1;
                        }
                        let rest: String = bytes[k..].iter().collect();
                        if rest.starts_with("in")
                            && rest[2..].chars().next().is_none_or(|c| !c.is_ascii_alphanumeric())
                        {
                            tokens.push(Token::Op(MarkerOp::NotIn));
                            j = k + 2;
                        } else {
                            return Err(err("'not' must be followed by 'in'".into()));
                        }
                    }
                    _ => tokens.push(Token::Var(word)),
                }
                i = j;
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    text: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: String) -> PepError {
        PepError::InvalidMarker(self.text.into(), msg)
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_text(&self) -> String {
        match self.peek() {
            Some(t) => format!("{t:?}"),
            None => "end of input".into(),
        }
    }

    fn parse_or(&mut self) -> Result<MarkerExpr, PepError> {
        let mut parts = vec![self.parse_and()?];
        while matches!(self.peek(), Some(Token::Or)) {
            self.pos += 1;
            parts.push(self.parse_and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            MarkerExpr::Or(parts)
        })
    }

    fn parse_and(&mut self) -> Result<MarkerExpr, PepError> {
        let mut parts = vec![self.parse_atom()?];
        while matches!(self.peek(), Some(Token::And)) {
            self.pos += 1;
            parts.push(self.parse_atom()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            MarkerExpr::And(parts)
        })
    }

    fn parse_atom(&mut self) -> Result<MarkerExpr, PepError> {
        match self.peek().cloned() {
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.parse_or()?;
                match self.peek() {
                    Some(Token::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(self.err("expected ')'".into())),
                }
            }
            Some(Token::Var(_)) | Some(Token::Str(_)) => self.parse_comparison(),
            _ => Err(self.err(format!("expected comparison, found {}", self.peek_text()))),
        }
    }

    fn parse_comparison(&mut self) -> Result<MarkerExpr, PepError> {
        let lhs = self.tokens[self.pos].clone();
        self.pos += 1;
        let op = match self.peek() {
            Some(Token::Op(op)) => *op,
            _ => return Err(self.err(format!("expected operator, found {}", self.peek_text()))),
        };
        self.pos += 1;
        let rhs = match self.peek().cloned() {
            Some(t @ (Token::Var(_) | Token::Str(_))) => t,
            _ => return Err(self.err(format!("expected operand, found {}", self.peek_text()))),
        };
        self.pos += 1;

        let (var, literal, reversed) = match (lhs, rhs) {
            (Token::Var(v), Token::Str(s)) => (v, s, false),
            (Token::Str(s), Token::Var(v)) => (v, s, true),
            (Token::Var(_), Token::Var(_)) => {
                return Err(self.err("comparisons between two variables are not supported".into()))
            }
            (Token::Str(_), Token::Str(_)) => {
                return Err(self.err("comparisons between two literals are not supported".into()))
            }
            _ => unreachable!(),
        };

        if var != EXTRA_VARIABLE && !MARKER_VARIABLES.contains(&var.as_str()) {
            return Err(self.err(format!("unknown marker variable {var:?}")));
        }
        if var == EXTRA_VARIABLE && !matches!(op, MarkerOp::Eq | MarkerOp::Ne) {
            return Err(self.err(format!(
                "operator {} not supported on extra",
                op.as_str()
            )));
        }

        Ok(MarkerExpr::Leaf(MarkerLeaf {
            var,
            op,
            literal,
            reversed,
        }))
    }
}
