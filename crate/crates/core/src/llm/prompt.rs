//! Prompt construction. The template is fixed and byte-stable: a mode-rules
//! preamble, optional few-shot exemplars, the problem block, and the opening
//! tag of the requested modality as the final characters.

use crate::data::Problem;
use crate::rationale::is_valid;
use crate::types::Modality;

pub const PREAMBLE: &str = "\
You are a rigorous and logically precise AI assistant. Your task is to answer a logical reasoning problem strictly following one of three modes, as explicitly specified in the input. Only one mode will be present in the input. Follow that mode exclusively.

- Code Mode (<code> ... <end_of_code> <answer> ... <end_of_answer>)
  - If the input contains <code>, translate the problem into Python code.
  - Execute the logic and derive the answer.

- Natural Language Chain-of-Thought Mode (<nl_cot> ... <end_of_nl_cot> <answer> ... <end_of_answer>)
  - If the input contains <nl_cot>, solve the problem step by step in natural language.

- Truth Table Mode (<truth_table> ... <end_of_truth_table> <answer> ... <end_of_answer>)
  - If the input contains <truth_table>, construct a truth table and derive the answer from it.

### Rules
- Only use the mode specified in the input. Do not switch modes.
- Generate output strictly in the specified mode and format, with no additional text.
- Enclose all reasoning strictly within the corresponding mode tags.
- The final answer must be strictly enclosed in <answer> ... <end_of_answer>.
- Do not provide any reasoning or explanations outside of the designated mode tags.";

/// Separator between few-shot exemplars and before the final problem.
pub const EXEMPLAR_SEPARATOR: &str = "\n\n---\n\n";

/// One worked example shown before the problem: its problem fields plus a
/// complete tagged solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exemplar {
    pub premises: String,
    pub conclusion: String,
    pub target: String,
}

/// The few-shot example set for one modality. Targets must pass the
/// modality's format-validity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShotSet {
    pub modality: Modality,
    pub exemplars: Vec<Exemplar>,
}

impl FewShotSet {
    pub fn new(modality: Modality, exemplars: Vec<Exemplar>) -> Result<Self, String> {
        for (i, ex) in exemplars.iter().enumerate() {
            if !is_valid(&ex.target, modality) {
                return Err(format!("exemplar {i} target is not a valid {modality} trace"));
            }
        }
        Ok(FewShotSet { modality, exemplars })
    }

    /// The built-in exemplar set for a modality, one worked example each.
    pub fn builtin(modality: Modality) -> FewShotSet {
        let raw = match modality {
            Modality::Nl => include_str!("exemplars/nl_rockie.txt"),
            Modality::Code => include_str!("exemplars/code_djokovic.txt"),
            Modality::TruthTable => include_str!("exemplars/tt_bonnie.txt"),
        };
        FewShotSet::new(modality, vec![parse_exemplar(raw)])
            .expect("built-in exemplars are valid")
    }
}

fn parse_exemplar(raw: &str) -> Exemplar {
    let (premises, rest) =
        raw.split_once("---conclusion---").expect("exemplar has a conclusion section");
    let (conclusion, target) =
        rest.split_once("---target---").expect("exemplar has a target section");
    Exemplar {
        premises: premises.trim().to_string(),
        conclusion: conclusion.trim().to_string(),
        target: target.trim().to_string(),
    }
}

fn problem_block(premises: &str, conclusion: &str) -> String {
    format!(
        "<premises>\n{premises}\n</premises>\n\n\
         <conclusion>\n{conclusion}\n</conclusion>\n\n\
         <question>\nIs the following statement true, false, or uncertain? {conclusion}\n</question>\n\n\
         <options>\n(A) True\n(B) False\n(C) Uncertain\n</options>"
    )
}

/// Render the full prompt for problem `p` in modality `t`, prepending the
/// exemplars when a few-shot set is given. The output always ends with the
/// modality's opening tag.
pub fn build_prompt(p: &Problem, t: Modality, fewshot: Option<&FewShotSet>) -> String {
    let mut out = String::from(PREAMBLE);
    out.push_str("\n\n");
    if let Some(set) = fewshot {
        if !set.exemplars.is_empty() {
            out.push_str("The following are example problems with solutions.\n\n");
            for ex in &set.exemplars {
                out.push_str(&problem_block(&ex.premises, &ex.conclusion));
                out.push_str("\n\n");
                out.push_str(&ex.target);
                out.push_str(EXEMPLAR_SEPARATOR);
            }
        }
    }
    out.push_str("The following is the problem you need to solve.\n\n");
    out.push_str(&problem_block(&p.premises, &p.conclusion));
    out.push_str("\n\n");
    out.push_str(&t.open_tag());
    out
}
