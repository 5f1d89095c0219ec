use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::HarnessError;

/// The 34 probe words of the reference experiment, spelled as published.
pub const REFERENCE_WORDS: [&str; 34] = [
    "RAGE",
    "MUD",
    "APPLE",
    "DISGUST",
    "EGG",
    "PEACE",
    "HAIR",
    "BARBIE",
    "WHALE",
    "SEA",
    "SHAME",
    "SAPPHIRE",
    "AMATIST",
    "SUNFLOWER",
    "SAND",
    "BASIL",
    "TRACTOR",
    "POND",
    "LAVENDER",
    "LEMON",
    "BLUSH",
    "KIWI",
    "BLOOD",
    "SALMON",
    "TOMATO",
    "BANANA",
    "PUMPKIN",
    "GRASS",
    "DANGER",
    "CUCUMBER",
    "LIME",
    "FEMINISM",
    "AUBERGINE",
    "SKIN",
];

/// Ordered, de-duplicated, upper-case probe words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct WordList(Vec<String>);

impl WordList {
    pub fn new<I, S>(words: I) -> Result<Self, HarnessError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for w in words {
            let w = w.as_ref().trim().to_uppercase();
            if w.is_empty() {
                continue;
            }
            if !seen.insert(w.clone()) {
                return Err(HarnessError::DuplicateWord(w));
            }
            out.push(w);
        }
        if out.is_empty() {
            return Err(HarnessError::EmptyWordList);
        }
        Ok(WordList(out))
    }

    /// One word per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        Self::new(text.lines().map(str::trim).filter(|l| !l.starts_with('#')))
    }

    pub fn reference() -> Self {
        Self::new(REFERENCE_WORDS).expect("reference list is valid")
    }

    pub fn words(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.iter().any(|w| w == word)
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|w| format!("{w}\n")).collect()
    }
}

impl TryFrom<Vec<String>> for WordList {
    type Error = HarnessError;

    fn try_from(v: Vec<String>) -> Result<Self, Self::Error> {
        WordList::new(v)
    }
}

impl From<WordList> for Vec<String> {
    fn from(w: WordList) -> Self {
        w.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_list() {
        let w = WordList::reference();
        assert_eq!(w.len(), 34);
        assert!(w.contains("AMATIST"));
    }

    #[test]
    fn parsing() {
        let w = WordList::parse("lemon\n\n# note\n Sea \n").unwrap();
        assert_eq!(w.words(), ["LEMON", "SEA"]);
        assert!(matches!(WordList::parse("a\nA\n"), Err(HarnessError::DuplicateWord(w)) if w == "A"));
        assert!(matches!(WordList::parse("\n\n"), Err(HarnessError::EmptyWordList)));
    }
}
