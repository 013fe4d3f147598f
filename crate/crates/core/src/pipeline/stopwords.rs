//! The frozen English stop-word list (179 entries), plus loading of custom
//! lists from disk: UTF-8, one word per line, `#`-prefixed comment lines and
//! blank lines ignored.

use std::collections::BTreeSet;
use std::io;
use std::path::Path;

const DEFAULT_LIST: &str = include_str!("../../data/stopwords_english.txt");

/// An immutable set of lowercase stop words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList {
    words: BTreeSet<String>,
}

impl Default for StopwordList {
    fn default() -> Self {
        StopwordList::parse(DEFAULT_LIST)
    }
}

impl StopwordList {
    /// Empty list; makes the stop-word stage a no-op.
    pub fn empty() -> Self {
        StopwordList { words: BTreeSet::new() }
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        StopwordList {
            words: words.into_iter().map(Into::into).collect(),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> io::Result<Self> {
        Ok(StopwordList::parse(&std::fs::read_to_string(path)?))
    }

    fn parse(contents: &str) -> Self {
        let words = contents
            .lines()
            .map(str::trim)
            .filter(|line| !line.is_empty() && !line.starts_with('#'))
            .map(str::to_string)
            .collect();
        StopwordList { words }
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words in sorted order (the canonical serialization order).
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_list_has_179_lowercase_entries() {
        let list = StopwordList::default();
        assert_eq!(list.len(), 179);
        for word in list.iter() {
            assert_eq!(word, word.to_lowercase());
            assert!(!word.contains(char::is_whitespace), "whitespace in {word:?}");
        }
        assert!(list.contains("the"));
        assert!(list.contains("don't"));
        assert!(!list.contains("covid"));
    }

    #[test]
    fn file_parsing_skips_comments_and_blanks() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stops.txt");
        std::fs::write(&path, "# comment\nfoo\n\n  bar  \n#baz\n").unwrap();
        let list = StopwordList::from_file(&path).unwrap();
        assert_eq!(list.len(), 2);
        assert!(list.contains("foo"));
        assert!(list.contains("bar"));
        assert!(!list.contains("#baz"));
    }
}
