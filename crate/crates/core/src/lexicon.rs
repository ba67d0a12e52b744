//! Verb inventories and their imperfect-subjunctive surface forms.
//!
//! Each verb is stored with a pre-computed subjunctive stem (`canta` for
//! *cantar*, `pudie` for *poder*) plus the accented variant of that stem used
//! by the first-person-plural forms (`cantá`, `pudié`). Expansion is pure
//! string concatenation; no morphophonology is implemented here, so irregular
//! verbs cost nothing extra.
//!
//! Lexicon file format: UTF-8 CSV, one verb per row,
//! `lemma,stem,stem_accented[,archaic1;archaic2;...]`, `#`-prefixed comment
//! lines and blank lines ignored. All fields are NFC-normalized on load so
//! they byte-match NFC-normalized corpus tokens.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Suffixes of the `-ra` variant, in person order 1sg/3sg, 2sg, 1pl, 2pl, 3pl.
pub const RA_ENDINGS: [&str; 5] = ["ra", "ras", "ramos", "rais", "ran"];
/// Suffixes of the `-se` variant, same person order.
pub const SE_ENDINGS: [&str; 5] = ["se", "ses", "semos", "seis", "sen"];

/// Index of the form built on the accented stem (1pl: *cantáramos*).
const ACCENTED_PERSON: usize = 2;

/// One verb of the inventory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbEntry {
    /// Infinitive, e.g. `cantar`.
    pub lemma: String,
    /// Imperfect-subjunctive stem, e.g. `canta`.
    pub stem: String,
    /// Stem with the accented final vowel, e.g. `cantá`.
    pub stem_accented: String,
    /// Full historical surface forms (alternative spellings), may be empty.
    pub archaic_forms: Vec<String>,
    /// 1-based frequency rank, assigned from file position.
    pub rank: usize,
}

/// The ten surface forms of one verb, five per variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantForms {
    pub ra_forms: [String; 5],
    pub se_forms: [String; 5],
}

impl VariantForms {
    /// All ten forms, `-ra` first.
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.ra_forms
            .iter()
            .chain(self.se_forms.iter())
            .map(String::as_str)
    }
}

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Accent pairs allowed between the final vowels of `stem` and `stem_accented`.
const ACCENT_PAIRS: [(char, char); 5] =
    [('a', 'á'), ('e', 'é'), ('i', 'í'), ('o', 'ó'), ('u', 'ú')];

/// Checks that the two stems are identical except for one accent mark on the
/// final vowel (identical stems are accepted too).
fn stems_consistent(stem: &str, accented: &str) -> bool {
    if stem == accented {
        return true;
    }
    let mut a: Vec<char> = stem.chars().collect();
    let mut b: Vec<char> = accented.chars().collect();
    match (a.pop(), b.pop()) {
        (Some(last_a), Some(last_b)) if a == b => ACCENT_PAIRS
            .iter()
            .any(|&(plain, acc)| last_a == plain && last_b == acc),
        _ => false,
    }
}

/// Loads a verb inventory. Entries come back in file order with `rank`
/// assigned from position (1-based); duplicate lemmas are rejected.
pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Vec<VerbEntry>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut entries = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let row = line.trim();
        if row.is_empty() || row.starts_with('#') {
            continue;
        }

        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(Error::MalformedRow {
                path: path.into(),
                line: line_no,
                reason: format!("expected 3 or 4 comma-separated fields, got {}", fields.len()),
            });
        }

        let lemma = nfc(fields[0]);
        let stem = nfc(fields[1]);
        let stem_accented = nfc(fields[2]);
        if lemma.is_empty() || stem.is_empty() || stem_accented.is_empty() {
            return Err(Error::MalformedRow {
                path: path.into(),
                line: line_no,
                reason: "lemma and stems must be non-empty".into(),
            });
        }
        if !stems_consistent(&stem, &stem_accented) {
            return Err(Error::MalformedRow {
                path: path.into(),
                line: line_no,
                reason: format!(
                    "stem '{stem}' and accented stem '{stem_accented}' must differ only in one \
                     accent mark on the final vowel"
                ),
            });
        }
        if !seen.insert(lemma.clone()) {
            return Err(Error::DuplicateLemma {
                lemma,
                path: path.into(),
                line: line_no,
            });
        }

        let archaic_forms = fields
            .get(3)
            .map(|f| {
                f.split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(nfc)
                    .collect()
            })
            .unwrap_or_default();

        entries.push(VerbEntry {
            lemma,
            stem,
            stem_accented,
            archaic_forms,
            rank: entries.len() + 1,
        });
    }

    Ok(entries)
}

/// Expands one verb into its ten imperfect-subjunctive surface forms.
///
/// The 1pl form of each variant is built on the accented stem, all others on
/// the plain stem: `canta{ra,ras}`, `cantá{ramos}`, `canta{rais,ran}`.
pub fn expand_conjugations(entry: &VerbEntry) -> VariantForms {
    let build = |endings: &[&str; 5]| -> [String; 5] {
        std::array::from_fn(|person| {
            let stem = if person == ACCENTED_PERSON {
                &entry.stem_accented
            } else {
                &entry.stem
            };
            format!("{stem}{}", endings[person])
        })
    };
    VariantForms {
        ra_forms: build(&RA_ENDINGS),
        se_forms: build(&SE_ENDINGS),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn entry(lemma: &str, stem: &str, accented: &str) -> VerbEntry {
        VerbEntry {
            lemma: lemma.into(),
            stem: stem.into(),
            stem_accented: accented.into(),
            archaic_forms: vec![],
            rank: 1,
        }
    }

    fn write_lexicon(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn expands_cantar() {
        let forms = expand_conjugations(&entry("cantar", "canta", "cantá"));
        assert_eq!(
            forms.ra_forms,
            ["cantara", "cantaras", "cantáramos", "cantarais", "cantaran"]
        );
        assert_eq!(
            forms.se_forms,
            ["cantase", "cantases", "cantásemos", "cantaseis", "cantasen"]
        );
    }

    #[test]
    fn expands_irregular_poder() {
        // Checked against standard conjugation tables.
        let forms = expand_conjugations(&entry("poder", "pudie", "pudié"));
        assert_eq!(
            forms.ra_forms,
            ["pudiera", "pudieras", "pudiéramos", "pudierais", "pudieran"]
        );
        assert_eq!(
            forms.se_forms,
            ["pudiese", "pudieses", "pudiésemos", "pudieseis", "pudiesen"]
        );
    }

    #[test]
    fn expands_degenerate_stem() {
        let forms = expand_conjugations(&entry("x", "x", "x"));
        assert_eq!(forms.ra_forms, ["xra", "xras", "xramos", "xrais", "xran"]);
    }

    #[test]
    fn ten_distinct_forms_with_known_endings() {
        let forms = expand_conjugations(&entry("cantar", "canta", "cantá"));
        let all: std::collections::HashSet<&str> = forms.iter().collect();
        assert_eq!(all.len(), 10);
        for (form, ending) in forms.ra_forms.iter().zip(RA_ENDINGS) {
            assert!(form.ends_with(ending));
        }
        for (form, ending) in forms.se_forms.iter().zip(SE_ENDINGS) {
            assert!(form.ends_with(ending));
        }
    }

    #[test]
    fn stripping_ending_recovers_a_stem() {
        let e = entry("poder", "pudie", "pudié");
        let forms = expand_conjugations(&e);
        for (forms, endings) in [(&forms.ra_forms, RA_ENDINGS), (&forms.se_forms, SE_ENDINGS)] {
            for (form, ending) in forms.iter().zip(endings) {
                let stripped = form.strip_suffix(ending).unwrap();
                assert!(stripped == e.stem || stripped == e.stem_accented);
            }
        }
    }

    #[test]
    fn loads_single_row() {
        let f = write_lexicon("# comment\ncantar,canta,cantá\n");
        let entries = load_lexicon(f.path()).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].lemma, "cantar");
        assert_eq!(entries[0].rank, 1);
        assert!(entries[0].archaic_forms.is_empty());
    }

    #[test]
    fn loads_archaic_forms() {
        let f = write_lexicon("haber,hubie,hubié,oviese;oviesse;hobiese\n");
        let entries = load_lexicon(f.path()).unwrap();
        assert_eq!(entries[0].archaic_forms, ["oviese", "oviesse", "hobiese"]);
    }

    #[test]
    fn empty_file_gives_empty_list() {
        let f = write_lexicon("");
        assert!(load_lexicon(f.path()).unwrap().is_empty());
    }

    #[test]
    fn rejects_duplicate_lemma() {
        let f = write_lexicon("cantar,canta,cantá\ncantar,canta,cantá\n");
        match load_lexicon(f.path()) {
            Err(Error::DuplicateLemma { lemma, line, .. }) => {
                assert_eq!(lemma, "cantar");
                assert_eq!(line, 2);
            }
            other => panic!("expected duplicate-lemma error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_row_with_line_number() {
        let f = write_lexicon("cantar,canta,cantá\njust-one-field\n");
        match load_lexicon(f.path()) {
            Err(Error::MalformedRow { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed-row error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_inconsistent_stems() {
        let f = write_lexicon("cantar,canta,pudié\n");
        assert!(matches!(
            load_lexicon(f.path()),
            Err(Error::MalformedRow { .. })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_lexicon("/nonexistent/lexicon.csv"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn normalizes_decomposed_input_to_nfc() {
        // "canta" + COMBINING ACUTE ACCENT on the final a (NFD) must load as
        // the precomposed "cantá".
        let f = write_lexicon("cantar,canta,canta\u{0301}\n");
        let entries = load_lexicon(f.path()).unwrap();
        assert_eq!(entries[0].stem_accented, "cantá");
        let forms = expand_conjugations(&entries[0]);
        assert_eq!(forms.ra_forms[2], "cantáramos");
    }
}
