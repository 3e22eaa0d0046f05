//! Line-oriented triple files: `subject<TAB>predicate<TAB>object`, `#` comments.
//!
//! Tabs, newlines and backslashes inside text objects are written as `\t`,
//! `\n` and `\\`.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::store::TripleStore;
use super::triple::{Rejection, Triple};

#[derive(Debug, Error)]
pub enum TripleFileError {
    #[error("line {line}: expected 3 tab-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: bad escape sequence")]
    BadEscape { line: usize },
    #[error("line {line}: {source}")]
    Rejected {
        line: usize,
        #[source]
        source: Rejection,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub fn parse_triples(text: &str) -> Result<Vec<Triple>, TripleFileError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 3 {
            return Err(TripleFileError::FieldCount {
                line,
                found: fields.len(),
            });
        }
        let object = unescape(fields[2]).ok_or(TripleFileError::BadEscape { line })?;
        let t = Triple::parse(fields[0], fields[1], &object)
            .map_err(|source| TripleFileError::Rejected { line, source })?;
        out.push(t);
    }
    Ok(out)
}

pub fn load_store(text: &str) -> Result<TripleStore, TripleFileError> {
    let mut store = TripleStore::new();
    for t in parse_triples(text)? {
        // parse_triples already type-checked each triple
        store.assert_triple(t).expect("checked triple");
    }
    Ok(store)
}

pub fn read_store(path: &Path) -> Result<TripleStore, TripleFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| TripleFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_store(&text)
}

pub fn write_triples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> String {
    let mut out = String::new();
    for t in triples {
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            t.subject,
            t.predicate,
            escape(&t.object.lexical())
        );
    }
    out
}

pub fn serialize_store(store: &TripleStore) -> String {
    let triples: Vec<Triple> = store.iter().collect();
    write_triples(&triples)
}

/// Writes through a sibling temp file and renames, so readers of `path`
/// never see a partial file.
pub fn save_store(store: &TripleStore, path: &Path) -> Result<(), TripleFileError> {
    let io = |source| TripleFileError::Io {
        path: path.display().to_string(),
        source,
    };
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serialize_store(store)).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(io)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next()? {
            '\\' => out.push('\\'),
            't' => out.push('\t'),
            'n' => out.push('\n'),
            'r' => out.push('\r'),
            _ => return None,
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::store::Pattern;
    use proptest::prelude::*;

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# moving resources\n\nToyota_Sienna\tnb_of_Seat\t8_places\n";
        let store = load_store(text).unwrap();
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "# header\nA\trdf:type\tcmo:Shelter\nB\tfrobnicate\tC\n";
        match load_store(text) {
            Err(TripleFileError::Rejected { line: 3, source }) => {
                assert_eq!(source.code(), "unknown_predicate")
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            load_store("A\trdf:type\n"),
            Err(TripleFileError::FieldCount { line: 1, found: 2 })
        ));
    }

    #[test]
    fn written_integers_are_plain() {
        let store = load_store("Toyota_Sienna\tnb_of_Seat\t8_places\n").unwrap();
        assert_eq!(serialize_store(&store), "Toyota_Sienna\tnb_of_Seat\t8\n");
    }

    proptest! {
        #[test]
        fn text_objects_survive_the_file(addr in "\\PC*[\t\n\\\\]?\\PC*") {
            let mut store = TripleStore::new();
            store.assert_raw("P", "has_Address", &addr).unwrap();
            let back = load_store(&serialize_store(&store)).unwrap();
            let got: Vec<_> = back.query(Pattern::any()).collect();
            prop_assert_eq!(got, store.iter().collect::<Vec<_>>());
        }
    }
}
