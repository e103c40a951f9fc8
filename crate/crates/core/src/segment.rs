//! Paragraph and sentence segmentation into a coordinate table.

use crate::model::{SentenceCoord, SentenceTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParagraphBreak {
    /// Every hard newline ends a paragraph; blank lines are skipped.
    Newline,
    /// Only blank lines end a paragraph; single newlines are joined by a space.
    BlankLine,
}

#[derive(Debug, Clone)]
pub struct SegmentConfig {
    /// Characters that end a sentence. ASCII terminators only count when
    /// followed by whitespace or end of text, so `3.14` stays whole;
    /// non-ASCII full stops end a sentence wherever they appear.
    /// Semicolons are deliberately absent.
    pub terminators: Vec<char>,
    pub paragraph_break: ParagraphBreak,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            terminators: vec!['.', '!', '?', '。', '！', '？'],
            paragraph_break: ParagraphBreak::Newline,
        }
    }
}

const CLOSERS: &[char] = &['"', '\'', ')', ']', '”', '’', '」', '』', '）', '》'];

/// Splits `text` into the dense `(pi, si)` sentence table.
pub fn segment(text: &str, config: &SegmentConfig) -> SentenceTable {
    let mut table = SentenceTable::new();
    for (pi, paragraph) in paragraphs(text, config.paragraph_break).iter().enumerate() {
        for (si, sentence) in sentences(paragraph, &config.terminators).into_iter().enumerate() {
            table.insert(SentenceCoord::new(pi as u32, si as u32), sentence);
        }
    }
    table
}

fn paragraphs(text: &str, mode: ParagraphBreak) -> Vec<String> {
    match mode {
        ParagraphBreak::Newline => text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect(),
        ParagraphBreak::BlankLine => {
            let mut out = Vec::new();
            let mut current: Vec<&str> = Vec::new();
            for line in text.lines().map(str::trim) {
                if line.is_empty() {
                    if !current.is_empty() {
                        out.push(current.join(" "));
                        current.clear();
                    }
                } else {
                    current.push(line);
                }
            }
            if !current.is_empty() {
                out.push(current.join(" "));
            }
            out
        }
    }
}

/// Splits one paragraph into sentences. Trailing text without a terminator
/// is a sentence of its own.
pub fn sentences(paragraph: &str, terminators: &[char]) -> Vec<String> {
    let chars: Vec<char> = paragraph.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if !terminators.contains(&chars[i]) {
            i += 1;
            continue;
        }
        let mut end = i;
        let mut ascii_only = chars[i].is_ascii();
        while end + 1 < chars.len() && terminators.contains(&chars[end + 1]) {
            end += 1;
            ascii_only &= chars[end].is_ascii();
        }
        while end + 1 < chars.len() && CLOSERS.contains(&chars[end + 1]) {
            end += 1;
        }
        let at_boundary = end + 1 == chars.len() || chars[end + 1].is_whitespace();
        if at_boundary || !ascii_only {
            push_trimmed(&mut out, &chars[start..=end]);
            start = end + 1;
        }
        i = end + 1;
    }
    if start < chars.len() {
        push_trimmed(&mut out, &chars[start..]);
    }
    out
}

fn push_trimmed(out: &mut Vec<String>, span: &[char]) {
    let s: String = span.iter().collect();
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(table: &SentenceTable) -> Vec<(u32, u32)> {
        table.keys().map(|c| (c.pi, c.si)).collect()
    }

    #[test]
    fn empty_input() {
        assert!(segment("", &SegmentConfig::default()).is_empty());
        assert!(segment("\n\n  \n", &SegmentConfig::default()).is_empty());
    }

    #[test]
    fn two_paragraphs() {
        let t = segment("A. B.\n\nC.", &SegmentConfig::default());
        assert_eq!(coords(&t), vec![(0, 0), (0, 1), (1, 0)]);
        assert_eq!(t[&SentenceCoord::new(0, 1)], "B.");
    }

    #[test]
    fn unterminated_paragraph_is_one_sentence() {
        let t = segment("no full stop here", &SegmentConfig::default());
        assert_eq!(coords(&t), vec![(0, 0)]);
    }

    #[test]
    fn cjk_and_decimals() {
        let s = sentences(
            "关于疫情的通知。请各单位注意！",
            &SegmentConfig::default().terminators,
        );
        assert_eq!(s, vec!["关于疫情的通知。", "请各单位注意！"]);
        let s = sentences(
            "Pi is 3.14 roughly. Done?!",
            &SegmentConfig::default().terminators,
        );
        assert_eq!(s, vec!["Pi is 3.14 roughly.", "Done?!"]);
        let s = sentences("clause one; clause two.", &SegmentConfig::default().terminators);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn blank_line_mode_joins_lines() {
        let cfg = SegmentConfig {
            paragraph_break: ParagraphBreak::BlankLine,
            ..Default::default()
        };
        let t = segment("A first\nline. Then.\n\nNext.", &cfg);
        assert_eq!(coords(&t), vec![(0, 0), (0, 1), (1, 0)]);
        assert_eq!(t[&SentenceCoord::new(0, 0)], "A first line.");
    }

    #[test]
    fn idempotent_on_single_sentence() {
        let cfg = SegmentConfig::default();
        for p in ["Hello world.", "不带标点的一句话", "Quote \"this.\""] {
            let once = segment(p, &cfg);
            assert_eq!(once.len(), 1);
            let again = segment(&once[&SentenceCoord::new(0, 0)], &cfg);
            assert_eq!(once, again);
        }
    }
}
