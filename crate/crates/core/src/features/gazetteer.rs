use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUILTIN: [(&str, &str); 9] = [
    ("container", include_str!("../../data/gazetteers/container.txt")),
    ("editor", include_str!("../../data/gazetteers/editor.txt")),
    ("institution", include_str!("../../data/gazetteers/institution.txt")),
    ("locator", include_str!("../../data/gazetteers/locator.txt")),
    ("months", include_str!("../../data/gazetteers/months.txt")),
    ("note", include_str!("../../data/gazetteers/note.txt")),
    ("ordinals", include_str!("../../data/gazetteers/ordinals.txt")),
    ("publisher", include_str!("../../data/gazetteers/publisher.txt")),
    ("web", include_str!("../../data/gazetteers/web.txt")),
];

/// Named word lists. Lookups are by lowercased token surface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "BTreeMap<String, BTreeSet<String>>", into = "BTreeMap<String, BTreeSet<String>>")]
pub struct Gazetteers {
    lists: BTreeMap<String, BTreeSet<String>>,
    by_word: HashMap<String, Vec<String>>,
}

impl Gazetteers {
    pub fn empty() -> Self {
        Self::from(BTreeMap::new())
    }

    /// The word lists shipped in `data/gazetteers/`.
    pub fn builtin() -> Self {
        BUILTIN
            .iter()
            .map(|(name, text)| (name.to_string(), parse_list(text)))
            .collect::<BTreeMap<_, _>>()
            .into()
    }

    /// Loads every `*.txt` file in `dir`; the file stem names the list.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut lists = BTreeMap::new();
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::Data(format!("bad gazetteer file name {}", path.display())))?;
            lists.insert(name.to_string(), parse_list(&text));
        }
        Ok(lists.into())
    }

    pub fn lists(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.lists
    }

    /// Names of the lists containing `lowercase_word`, in name order.
    pub fn lookup(&self, lowercase_word: &str) -> &[String] {
        self.by_word.get(lowercase_word).map(Vec::as_slice).unwrap_or(&[])
    }
}

impl Default for Gazetteers {
    fn default() -> Self {
        Self::builtin()
    }
}

impl From<BTreeMap<String, BTreeSet<String>>> for Gazetteers {
    fn from(lists: BTreeMap<String, BTreeSet<String>>) -> Self {
        let mut by_word: HashMap<String, Vec<String>> = HashMap::new();
        for (name, words) in &lists {
            for w in words {
                by_word.entry(w.clone()).or_default().push(name.clone());
            }
        }
        Gazetteers { lists, by_word }
    }
}

impl From<Gazetteers> for BTreeMap<String, BTreeSet<String>> {
    fn from(g: Gazetteers) -> Self {
        g.lists
    }
}

/// One lowercase word per line; `#` starts a comment.
pub fn parse_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let set = parse_list("# header\nJournal\n\n  review # trailing\n");
        assert_eq!(set.into_iter().collect::<Vec<_>>(), ["journal", "review"]);
    }

    #[test]
    fn builtin_lists_are_loaded() {
        let g = Gazetteers::builtin();
        assert_eq!(g.lookup("proceedings"), ["container"]);
        assert!(g.lookup("university").contains(&"institution".to_string()));
        assert!(g.lookup("zebra").is_empty());
    }

    #[test]
    fn loads_from_directory() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("colors.txt"), "red\n# c\nblue\n").unwrap();
        std::fs::write(dir.path().join("ignored.md"), "green\n").unwrap();
        let g = Gazetteers::from_dir(dir.path()).unwrap();
        assert_eq!(g.lists().len(), 1);
        assert_eq!(g.lookup("blue"), ["colors"]);
    }
}
