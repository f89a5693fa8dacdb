use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::Paragraph;
use crate::{Error, Result};

/// Renders the generation prompt for curriculum stage 1, 2 or 3.
///
/// Stage 1 asks for a translation that keeps the line count and separates
/// lines with the boundary token. Stage 2 adds per-line syllable targets;
/// stage 3 also asks for a consistent end rhyme.
pub fn build_stage_prompt(source: &Paragraph, stage: usize, boundary: &str) -> Result<String> {
    if !(1..=3).contains(&stage) {
        return Err(Error::InvalidPromptStage(stage));
    }
    let n = source.len();
    let mut out = String::new();
    out.push_str("Translate the following English song lyric paragraph into singable Chinese.\n");
    out.push_str(&format!(
        "Keep exactly N={n} lines and separate consecutive lines with the boundary token \"{}\".\n",
        boundary.trim()
    ));
    if stage >= 2 {
        let counts: Vec<String> = source.syllable_counts().iter().map(|c| format!("{c}")).collect();
        out.push_str(&format!(
            "Match the syllable count of each line, one Chinese character per syllable: ({}).\n",
            counts.join(", ")
        ));
    }
    if stage >= 3 {
        out.push_str("End every line with the same rhyme so the paragraph rhymes consistently.\n");
    }
    out.push_str("\nSource:\n");
    out.push_str(&source.joined(boundary));
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Lang, DEFAULT_BOUNDARY};

    fn source() -> Paragraph {
        // 7 and 7 syllables by the vowel-group heuristic
        Paragraph::new("p", Lang::En, ["I will always be right here", "waiting for the morning light"]).unwrap()
    }

    #[test]
    fn stage_one_has_format_requirement() {
        let p = build_stage_prompt(&source(), 1, DEFAULT_BOUNDARY).unwrap();
        assert!(p.contains("\"/\""));
        assert!(p.contains("N=2"));
        assert!(!p.contains("syllable"));
        assert!(!p.contains("rhyme"));
    }

    #[test]
    fn stage_two_lists_targets() {
        assert_eq!(source().syllable_counts(), [7, 7]);
        let p = build_stage_prompt(&source(), 2, DEFAULT_BOUNDARY).unwrap();
        assert!(p.contains("(7, 7)"));
        assert!(!p.contains("rhyme"));
    }

    #[test]
    fn stage_three_adds_rhyme() {
        let p = build_stage_prompt(&source(), 3, DEFAULT_BOUNDARY).unwrap();
        assert!(p.contains("(7, 7)"));
        assert!(p.contains("rhyme"));
        assert!(build_stage_prompt(&source(), 4, DEFAULT_BOUNDARY).is_err());
    }
}
