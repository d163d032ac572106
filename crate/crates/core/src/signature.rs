//! Canonical method signatures and field names.
//!
//! Miners print members with modifiers, return types and parameter names, in
//! either Java order (`has(CFString key) : boolean`) or name-first order
//! (`has(key CFString) : boolean`). Identity comparisons need one canonical
//! spelling: `name(T1, T2)`.

use crate::error::ModelError;

const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "char", "short", "int", "long", "float", "double", "void",
];

const MODIFIERS: &[&str] = &["final"];

/// Normalizes a raw method signature to `name(T1, T2, ...)`.
///
/// Visibility and other modifiers, the return type, parameter names and
/// whitespace are dropped. Generic arguments stay inside their type token
/// with internal whitespace removed.
pub fn normalize_signature(raw: &str) -> Result<String, ModelError> {
    let text = raw.trim();
    let open = text
        .find('(')
        .ok_or_else(|| ModelError::Signature(raw.to_string(), "missing parameter list"))?;
    let close =
        matching_paren(text, open).ok_or_else(|| ModelError::Signature(raw.to_string(), "unbalanced parentheses"))?;

    let name = text[..open]
        .split_whitespace()
        .last()
        .ok_or_else(|| ModelError::Signature(raw.to_string(), "missing method name"))?;
    if !is_identifier(name) {
        return Err(ModelError::Signature(raw.to_string(), "invalid method name"));
    }

    let params = &text[open + 1..close];
    let mut types = Vec::new();
    if !params.trim().is_empty() {
        for param in split_top_level(params, ',') {
            types.push(
                parameter_type(param).ok_or_else(|| ModelError::Signature(raw.to_string(), "malformed parameter"))?,
            );
        }
    }
    Ok(format!("{}({})", name, types.join(", ")))
}

/// Extracts the bare identifier from a field declaration such as
/// `private x : int` or `private int x`.
pub fn normalize_field_name(raw: &str) -> Result<String, ModelError> {
    let decl = raw.split(':').next().unwrap_or(raw);
    let decl = decl.split('=').next().unwrap_or(decl);
    let name = compact_tokens(decl)
        .into_iter()
        .rev()
        .find(|t| !t.starts_with('@'))
        .map(|t| t.trim_end_matches("[]").to_string())
        .unwrap_or_default();
    if is_identifier(&name) {
        Ok(name)
    } else {
        Err(ModelError::FieldName(raw.to_string()))
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' || c == '$' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_' || c == '$')
}

fn matching_paren(text: &str, open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in text[open..].char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(open + i);
                }
            }
            _ => {}
        }
    }
    None
}

fn split_top_level(text: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '<' | '[' | '(' => depth += 1,
            '>' | ']' | ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                parts.push(&text[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}

/// Splits on top-level whitespace; whitespace inside brackets is removed and
/// detached `[]` / `...` suffixes are glued to the preceding token.
fn compact_tokens(text: &str) -> Vec<String> {
    let mut tokens: Vec<String> = Vec::new();
    let mut current = String::new();
    let mut depth = 0i32;
    for c in text.chars() {
        match c {
            '<' | '[' | '(' => {
                depth += 1;
                current.push(c);
            }
            '>' | ']' | ')' => {
                depth -= 1;
                current.push(c);
            }
            c if c.is_whitespace() => {
                if depth <= 0 && !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c => current.push(c),
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    let mut glued: Vec<String> = Vec::with_capacity(tokens.len());
    for token in tokens {
        let suffix = token.starts_with("...") || token.starts_with('[') || token.starts_with('<');
        match glued.last_mut() {
            Some(prev) if suffix => prev.push_str(&token),
            _ => glued.push(token),
        }
    }
    glued
}

fn looks_like_type(token: &str) -> bool {
    PRIMITIVES.contains(&token)
        || token.contains(['<', '[', '.'])
        || token.chars().next().is_some_and(char::is_uppercase)
}

fn parameter_type(param: &str) -> Option<String> {
    let tokens: Vec<String> = compact_tokens(param)
        .into_iter()
        .filter(|t| !t.starts_with('@') && !MODIFIERS.contains(&t.as_str()))
        .collect();
    match tokens.as_slice() {
        [ty] => Some(ty.clone()),
        [first, second] => {
            // Name-first order only when the first token cannot be a type and
            // the second clearly is one.
            let (ty, name) = if !looks_like_type(first) && looks_like_type(second) {
                (second, first)
            } else {
                (first, second)
            };
            let mut ty = ty.clone();
            // C-style array declarator on the name: `int xs[]`.
            let dims = name.len() - name.trim_end_matches("[]").len();
            ty.push_str(&name[name.len() - dims..]);
            Some(ty)
        }
        _ => None,
    }
}
