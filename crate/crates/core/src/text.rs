//! Tokenization and per-occurrence context extraction.
//!
//! The tokenizer is a rule-ordered regular expression modelled on the token
//! classes of Twitter-aware tokenizers: at each position the first matching
//! class wins, in the order emoticon, URL, mention/hashtag, number, word,
//! punctuation run. Output is lowercased and carries character spans into the
//! raw text.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Span, TargetInstance};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("span {span:?} of instance {id} cuts through token {token:?}")]
    Alignment {
        id: String,
        span: (usize, usize),
        token: String,
    },
    #[error("span {span:?} of instance {id} covers no token")]
    EmptyTarget { id: String, span: (usize, usize) },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub span: Span,
}

const EMOTICON: &str = r"(?:<3|[<>]?[:;=][\-o\*']?[\)\]\(\[dDpP/\\:\}\{@\|3]+|[\)\]\(\[dDpP][\-o\*']?[:;=][<>]?)";
const URL: &str = r#"(?:(?:https?|ftp)://|www\.)[^\s]*[^\s.,!?;:'")\]]"#;
const HANDLE: &str = r"[@#][\p{L}\p{N}\p{M}_]+";
const NUMBER: &str = r"\p{N}+(?:[.,:/]\p{N}+)+";
const WORD: &str = r"[\p{L}\p{N}\p{M}_]+(?:['’][\p{L}\p{N}\p{M}_]+)*";
const PUNCT: &str = r"[^\s\p{L}\p{N}\p{M}_]+";

fn pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(&format!("{EMOTICON}|{URL}|{HANDLE}|{NUMBER}|{WORD}|{PUNCT}"))
            .expect("tokenizer pattern compiles")
    })
}

/// Lowercased tokens with character spans, in text order.
pub fn tokenize(text: &str) -> Vec<Token> {
    tokenize_at(text, &[])
}

/// Like [`tokenize`], but additionally splits any token that straddles one of
/// the given character `boundaries`.
pub fn tokenize_at(text: &str, boundaries: &[usize]) -> Vec<Token> {
    // Byte offset -> char offset, computed incrementally since matches are ordered.
    let mut tokens = Vec::new();
    let mut char_pos = 0;
    let mut byte_pos = 0;
    for m in pattern().find_iter(text) {
        char_pos += text[byte_pos..m.start()].chars().count();
        let start = char_pos;
        let len = m.as_str().chars().count();
        char_pos += len;
        byte_pos = m.end();

        let mut cuts: Vec<usize> = boundaries
            .iter()
            .copied()
            .filter(|&b| b > start && b < start + len)
            .collect();
        cuts.sort_unstable();
        cuts.dedup();
        let mut piece_start = start;
        let chars: Vec<char> = m.as_str().chars().collect();
        for end in cuts.into_iter().chain(std::iter::once(start + len)) {
            let raw: String = chars[piece_start - start..end - start].iter().collect();
            tokens.push(Token {
                surface: raw.to_lowercase(),
                span: Span::new(piece_start, end),
            });
            piece_start = end;
        }
    }
    tokens
}

/// Token views of one target occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextBundle {
    pub left: Vec<Token>,
    pub target: Vec<Token>,
    pub right: Vec<Token>,
    pub full: Vec<Token>,
}

impl ContextBundle {
    /// Position of the first target token within `full`.
    pub fn target_start(&self) -> usize {
        self.left.len()
    }

    /// Indices of the target tokens within `full`.
    pub fn target_indices(&self) -> std::ops::Range<usize> {
        self.left.len()..self.left.len() + self.target.len()
    }
}

pub fn surfaces(tokens: &[Token]) -> Vec<&str> {
    tokens.iter().map(|t| t.surface.as_str()).collect()
}

/// One bundle per span of `instance`, in span order. A span that cuts a
/// token is an [`TextError::Alignment`] error.
pub fn extract_contexts(instance: &TargetInstance) -> Result<Vec<ContextBundle>, TextError> {
    bundles_from_tokens(instance, tokenize(instance.text()))
}

/// As [`extract_contexts`], but tokenization is forced to break at every span
/// boundary first, so annotation spans inside a token (a target inside a
/// hashtag, say) never fail to align.
pub fn extract_contexts_split(instance: &TargetInstance) -> Result<Vec<ContextBundle>, TextError> {
    let boundaries: Vec<usize> = instance
        .spans()
        .iter()
        .flat_map(|s| [s.start, s.end])
        .collect();
    bundles_from_tokens(instance, tokenize_at(instance.text(), &boundaries))
}

fn bundles_from_tokens(instance: &TargetInstance, full: Vec<Token>) -> Result<Vec<ContextBundle>, TextError> {
    let mut bundles = Vec::with_capacity(instance.spans().len());
    for span in instance.spans() {
        let mut left = Vec::new();
        let mut target = Vec::new();
        let mut right = Vec::new();
        for token in &full {
            if token.span.end <= span.start {
                left.push(token.clone());
            } else if token.span.start >= span.end {
                right.push(token.clone());
            } else if token.span.start >= span.start && token.span.end <= span.end {
                target.push(token.clone());
            } else {
                return Err(TextError::Alignment {
                    id: instance.id().to_string(),
                    span: (span.start, span.end),
                    token: token.surface.clone(),
                });
            }
        }
        if target.is_empty() {
            return Err(TextError::EmptyTarget {
                id: instance.id().to_string(),
                span: (span.start, span.end),
            });
        }
        bundles.push(ContextBundle {
            left,
            target,
            right,
            full: full.clone(),
        });
    }
    Ok(bundles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use proptest::prelude::*;

    fn words(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.surface).collect()
    }

    #[test]
    fn twitter_classes() {
        assert_eq!(words("Great phone!!! :)"), vec!["great", "phone", "!!!", ":)"]);
        assert_eq!(
            words("@user loves #nlp http://t.co/x"),
            vec!["@user", "loves", "#nlp", "http://t.co/x"]
        );
        assert!(words("").is_empty());
        assert_eq!(words("don't stop, 3.5 stars :D <3"), vec!["don't", "stop", ",", "3.5", "stars", ":d", "<3"]);
        assert_eq!(words("see www.x.com."), vec!["see", "www.x.com", "."]);
    }

    #[test]
    fn spans_are_char_offsets() {
        let toks = tokenize("café ok");
        assert_eq!(toks[0].span, Span::new(0, 4));
        assert_eq!(toks[1].span, Span::new(5, 7));
    }

    #[test]
    fn contexts_for_edges() {
        let inst = TargetInstance::new("a", "i love nlp", "nlp", vec![Span::new(7, 10)], Label::Positive).unwrap();
        let b = &extract_contexts(&inst).unwrap()[0];
        assert_eq!(surfaces(&b.left), vec!["i", "love"]);
        assert_eq!(surfaces(&b.target), vec!["nlp"]);
        assert!(b.right.is_empty());

        let inst = TargetInstance::new("b", "nlp rocks", "nlp", vec![Span::new(0, 3)], Label::Positive).unwrap();
        let b = &extract_contexts(&inst).unwrap()[0];
        assert!(b.left.is_empty());
        assert_eq!(surfaces(&b.right), vec!["rocks"]);
    }

    #[test]
    fn multiple_occurrences() {
        let inst = TargetInstance::new(
            "c",
            "good camera , camera works",
            "camera",
            vec![Span::new(5, 11), Span::new(14, 20)],
            Label::Positive,
        )
        .unwrap();
        let bundles = extract_contexts(&inst).unwrap();
        assert_eq!(bundles.len(), 2);
        assert_eq!(surfaces(&bundles[0].left), vec!["good"]);
        assert_eq!(surfaces(&bundles[0].right), vec![",", "camera", "works"]);
        assert_eq!(surfaces(&bundles[1].left), vec!["good", "camera", ","]);
        assert_eq!(surfaces(&bundles[1].right), vec!["works"]);
    }

    #[test]
    fn split_token_is_alignment_error() {
        let inst = TargetInstance::new("d", "#nlprocks today", "nlp", vec![Span::new(1, 4)], Label::Neutral).unwrap();
        assert!(matches!(extract_contexts(&inst), Err(TextError::Alignment { .. })));
        let b = &extract_contexts_split(&inst).unwrap()[0];
        assert_eq!(surfaces(&b.left), vec!["#"]);
        assert_eq!(surfaces(&b.target), vec!["nlp"]);
        assert_eq!(surfaces(&b.right), vec!["rocks", "today"]);
    }

    proptest! {
        #[test]
        fn retokenizing_surfaces_is_stable(text in "[a-zA-Z0-9 .,!?:;()@#'/-]{0,40}") {
            let first = tokenize(&text);
            let joined = first.iter().map(|t| t.surface.as_str()).collect::<Vec<_>>().join(" ");
            let second = tokenize(&joined);
            prop_assert_eq!(first.len(), second.len());
        }

        #[test]
        fn bundles_partition_full(text in "[a-z ]{1,30}", pick in 0usize..10) {
            let toks = tokenize(&text);
            prop_assume!(!toks.is_empty());
            let tok = &toks[pick % toks.len()];
            let raw: String = text.chars().skip(tok.span.start).take(tok.span.len()).collect();
            let inst = TargetInstance::new("p", text.clone(), raw, vec![tok.span], Label::Neutral).unwrap();
            for b in extract_contexts(&inst).unwrap() {
                let joined: Vec<_> = b.left.iter().chain(&b.target).chain(&b.right).cloned().collect();
                prop_assert_eq!(&joined, &b.full);
            }
        }
    }
}
