//! Answer extraction and per-grader comparison.

use num_rational::BigRational;

use crate::money::parse_rational;
use crate::records::{DatasetRef, GraderKind, ProblemInstance};

const OPEN: &str = "<answer>";
const CLOSE: &str = "</answer>";

/// Content of the last well-formed `<answer>...</answer>` block, trimmed.
pub fn extract_answer(text: &str) -> Option<String> {
    let mut end = text.len();
    loop {
        let close = text[..end].rfind(CLOSE)?;
        let open = text[..close].rfind(OPEN)?;
        let body = &text[open + OPEN.len()..close];
        if !body.contains(CLOSE) {
            return Some(body.trim().to_string());
        }
        end = close;
    }
}

fn normalize_choice(s: &str) -> String {
    s.chars()
        .filter(|c| !matches!(c, '(' | ')' | '.') && !c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect()
}

fn parse_numeric(s: &str) -> Option<BigRational> {
    let cleaned: String = s.trim().chars().filter(|c| *c != ',').collect();
    let cleaned = cleaned.strip_prefix('+').unwrap_or(&cleaned);
    if cleaned.starts_with(['+', '-']) && cleaned[1..].starts_with(['+', '-']) {
        return None;
    }
    parse_rational(cleaned).ok()
}

fn normalize_free(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Compares an extracted answer with a reference under `dataset`'s grader.
pub fn answers_match(extracted: &str, reference: &str, dataset: &DatasetRef) -> bool {
    match dataset.grader_kind {
        GraderKind::MultipleChoice => {
            let a = normalize_choice(extracted);
            !a.is_empty() && a == normalize_choice(reference)
        }
        GraderKind::Numeric => match (parse_numeric(extracted), parse_numeric(reference)) {
            (Some(a), Some(b)) => match &dataset.numeric_tolerance {
                Some(tol) => {
                    let diff = if a > b { a - b } else { b - a };
                    diff <= *tol.as_rational()
                }
                None => a == b,
            },
            _ => false,
        },
        GraderKind::FreeResponse => normalize_free(extracted) == normalize_free(reference),
    }
}

/// Whether an extracted answer is correct; no extraction is incorrect.
pub fn grade(extracted: Option<&str>, problem: &ProblemInstance, dataset: &DatasetRef) -> bool {
    extracted.is_some_and(|e| answers_match(e, &problem.reference_answer, dataset))
}

/// Checks that a reference answer is gradable under `dataset`'s grader.
pub fn check_reference(reference: &str, dataset: &DatasetRef) -> Result<(), String> {
    match dataset.grader_kind {
        GraderKind::MultipleChoice => {
            let n = normalize_choice(reference);
            let mut chars = n.chars();
            let letter = match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii_lowercase() => c,
                _ => {
                    return Err(format!(
                        "multiple-choice reference {reference:?} is not a single letter"
                    ))
                }
            };
            if let Some(k) = dataset.option_count {
                if (letter as u32 - 'a' as u32) >= k {
                    return Err(format!(
                        "reference {reference:?} is outside the {k} options"
                    ));
                }
            }
            Ok(())
        }
        GraderKind::Numeric => parse_numeric(reference)
            .map(|_| ())
            .ok_or_else(|| format!("numeric reference {reference:?} does not parse as a number")),
        GraderKind::FreeResponse => {
            if reference.trim().is_empty() {
                Err("free-response reference is empty".to_string())
            } else {
                Ok(())
            }
        }
    }
}

/// Option letter for a zero-based index: 0 -> 'A'.
pub fn option_letter(index: u32) -> char {
    char::from(b'A' + index as u8)
}
