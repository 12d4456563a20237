use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The bundled stop-word list, one token per line with `#` comments.
pub const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub strip_punctuation: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            strip_punctuation: true,
        }
    }
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}'..='\u{201F}' | '\u{2026}' | '\u{2013}' | '\u{2014}' | '\u{00AB}' | '\u{00BB}' | '\u{00BF}' | '\u{00A1}'
        )
}

/// Splits on whitespace after optional lowercasing, stripping punctuation at
/// token boundaries only. Intra-word punctuation such as the apostrophe in
/// "can't" survives. Tokens that are pure punctuation disappear.
pub fn tokenize(raw: &str, config: TokenizerConfig) -> Vec<String> {
    let text = if config.lowercase {
        raw.to_lowercase()
    } else {
        raw.to_string()
    };
    text.split_whitespace()
        .filter_map(|tok| {
            let tok = if config.strip_punctuation {
                tok.trim_matches(is_punctuation)
            } else {
                tok
            };
            (!tok.is_empty()).then(|| tok.to_string())
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stopwords(BTreeSet<String>);

impl Stopwords {
    pub fn bundled() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    /// One token per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl<S: Into<String>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(Into::into).collect())
    }
}

pub fn strip_stopwords<S: AsRef<str>>(tokens: &[S], stopwords: &Stopwords) -> Vec<String> {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !stopwords.contains(t))
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tok(s: &str) -> Vec<String> {
        tokenize(s, TokenizerConfig::default())
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tok("Hello, World!"), ["hello", "world"]);
        assert!(tok("").is_empty());
        assert_eq!(tok("I can't go."), ["i", "can't", "go"]);
        assert_eq!(tok("  ... -- !! "), Vec::<String>::new());
        assert_eq!(tok("\u{201C}Quoted\u{201D} text\u{2026}"), ["quoted", "text"]);
    }

    #[test]
    fn flags_disable_rules() {
        let cfg = TokenizerConfig {
            lowercase: false,
            strip_punctuation: false,
        };
        assert_eq!(tokenize("Hello, World!", cfg), ["Hello,", "World!"]);
    }

    #[test]
    fn stopword_examples() {
        let sw: Stopwords = ["i"].into_iter().collect();
        assert_eq!(strip_stopwords(&["i", "love", "hiking"], &sw), ["love", "hiking"]);
        assert!(strip_stopwords::<&str>(&[], &sw).is_empty());
        assert!(strip_stopwords(&["i", "i"], &sw).is_empty());
    }

    #[test]
    fn bundled_list_is_lowercase_and_sized() {
        let sw = Stopwords::bundled();
        assert!((140..=170).contains(&sw.len()), "{} stop words", sw.len());
        for w in sw.iter() {
            assert_eq!(tok(w), [w], "stop word {w:?} is not a tokenizer fixed point");
        }
    }

    #[test]
    fn stopword_file_comments() {
        let sw = Stopwords::parse("# header\nthe\n\n  a  \n#x\n");
        assert_eq!(sw.iter().collect::<Vec<_>>(), ["a", "the"]);
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(s in "\\PC{0,60}") {
            let once = tok(&s);
            let twice = tok(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn strip_stopwords_is_projection(words in prop::collection::vec("[a-e]{1,2}", 0..20)) {
            let sw: Stopwords = ["a", "b", "cd"].into_iter().collect();
            let once = strip_stopwords(&words, &sw);
            prop_assert_eq!(strip_stopwords(&once, &sw), once);
        }
    }
}
