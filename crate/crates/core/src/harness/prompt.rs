//! The zero-shot answer-format prompt.

use crate::records::ProblemInstance;

/// Version 1 of the prompt; `{input}` marks where the problem text goes.
pub const PROMPT_V1: &str = include_str!("../../resources/prompt_v1.txt");

pub const INPUT_PLACEHOLDER: &str = "{input}";

/// Substitutes the problem text into `template` (default [`PROMPT_V1`]).
/// No escaping is applied.
pub fn render_prompt(problem: &ProblemInstance, template: Option<&str>) -> String {
    template
        .unwrap_or(PROMPT_V1)
        .replacen(INPUT_PLACEHOLDER, &problem.input_text, 1)
}

/// Warnings about inputs that may confuse the prompt's fence.
pub fn prompt_warnings(problem: &ProblemInstance) -> Vec<String> {
    let mut out = Vec::new();
    if problem.input_text.contains("'''") {
        out.push(format!(
            "input of {}/{} contains the ''' fence sequence",
            problem.dataset_id, problem.problem_id
        ));
    }
    if problem.input_text.trim().is_empty() {
        out.push(format!(
            "input of {}/{} is empty",
            problem.dataset_id, problem.problem_id
        ));
    }
    out
}
