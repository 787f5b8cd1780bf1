//! Subject categories, the closed set of broad areas, and the predicate that
//! decides which journals seed the classification.
//!
//! The taxonomy file is a three-column TSV:
//!
//! ```text
//! # category<TAB>broad_area<TAB>flags
//! Astronomy & Astrophysics<TAB>Astronomy<TAB>
//! Multidisciplinary Sciences<TAB><TAB>multidisciplinary
//! ```
//!
//! The broad-area column may be left empty only on multidisciplinary rows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::JournalRecord;
use crate::error::{Error, Result};

pub const MULTIDISCIPLINARY_FLAG: &str = "multidisciplinary";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BroadArea {
    Bioscience,
    Medicine,
    Geosciences,
    Physics,
    Astronomy,
    Chemistry,
    Psychology,
    SocialSciences,
    Engineering,
    Mathematics,
    ComputerScience,
    Humanities,
    Agriculture,
    ProfessionalFields,
}

impl BroadArea {
    pub const ALL: [BroadArea; 14] = [
        BroadArea::Bioscience,
        BroadArea::Medicine,
        BroadArea::Geosciences,
        BroadArea::Physics,
        BroadArea::Astronomy,
        BroadArea::Chemistry,
        BroadArea::Psychology,
        BroadArea::SocialSciences,
        BroadArea::Engineering,
        BroadArea::Mathematics,
        BroadArea::ComputerScience,
        BroadArea::Humanities,
        BroadArea::Agriculture,
        BroadArea::ProfessionalFields,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BroadArea::Bioscience => "Bioscience",
            BroadArea::Medicine => "Medicine",
            BroadArea::Geosciences => "Geosciences",
            BroadArea::Physics => "Physics",
            BroadArea::Astronomy => "Astronomy",
            BroadArea::Chemistry => "Chemistry",
            BroadArea::Psychology => "Psychology",
            BroadArea::SocialSciences => "Social sciences",
            BroadArea::Engineering => "Engineering",
            BroadArea::Mathematics => "Mathematics",
            BroadArea::ComputerScience => "Computer science",
            BroadArea::Humanities => "Humanities",
            BroadArea::Agriculture => "Agriculture",
            BroadArea::ProfessionalFields => "Professional fields",
        }
    }
}

impl fmt::Display for BroadArea {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BroadArea {
    type Err = Error;

    /// Exact, case-sensitive match against the canonical names.
    fn from_str(s: &str) -> Result<Self> {
        BroadArea::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::lookup("broad area", s))
    }
}

impl TryFrom<String> for BroadArea {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<BroadArea> for String {
    fn from(a: BroadArea) -> String {
        a.name().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubjectCategory {
    pub name: String,
    /// Absent only for multidisciplinary categories.
    pub broad_area: Option<BroadArea>,
    pub multidisciplinary: bool,
}

/// Immutable after load.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    categories: BTreeMap<String, SubjectCategory>,
}

impl Taxonomy {
    /// Builds a taxonomy from already-typed categories, enforcing the same
    /// invariants as [`load_taxonomy`].
    pub fn new(categories: impl IntoIterator<Item = SubjectCategory>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for cat in categories {
            if cat.name.is_empty() {
                return Err(Error::Validation("empty category name".into()));
            }
            if !cat.multidisciplinary && cat.broad_area.is_none() {
                return Err(Error::Validation(format!(
                    "category '{}' has no broad area",
                    cat.name
                )));
            }
            if map.contains_key(&cat.name) {
                return Err(Error::Validation(format!(
                    "duplicate category '{}'",
                    cat.name
                )));
            }
            map.insert(cat.name.clone(), cat);
        }
        let taxonomy = Taxonomy { categories: map };
        taxonomy.check_not_degenerate()?;
        Ok(taxonomy)
    }

    fn check_not_degenerate(&self) -> Result<()> {
        if self.categories.is_empty() {
            return Err(Error::Validation("taxonomy has no categories".into()));
        }
        let areas = self.areas_in_use();
        if areas.len() < 2 {
            return Err(Error::Validation(format!(
                "taxonomy must span at least 2 broad areas, found {}",
                areas.len()
            )));
        }
        Ok(())
    }

    pub fn categories(&self) -> impl Iterator<Item = &SubjectCategory> {
        self.categories.values()
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn category(&self, name: &str) -> Result<&SubjectCategory> {
        self.categories
            .get(name)
            .ok_or_else(|| Error::lookup("category", name))
    }

    /// Non-multidisciplinary categories, in byte-wise name order.
    pub fn assignment_targets(&self) -> impl Iterator<Item = &SubjectCategory> {
        self.categories.values().filter(|c| !c.multidisciplinary)
    }

    /// Broad areas carried by at least one assignment target.
    pub fn areas_in_use(&self) -> BTreeSet<BroadArea> {
        self.assignment_targets()
            .filter_map(|c| c.broad_area)
            .collect()
    }

    pub fn broad_area_of(&self, category: &str) -> Result<BroadArea> {
        let cat = self.category(category)?;
        cat.broad_area
            .ok_or_else(|| Error::Validation(format!("category '{category}' has no broad area")))
    }

    /// True iff the journal has exactly one category and it is not
    /// multidisciplinary.
    pub fn is_classifier_journal(&self, journal: &JournalRecord) -> Result<bool> {
        let mut single = true;
        for (i, name) in journal.categories.iter().enumerate() {
            let cat = self.category(name)?;
            if i > 0 || cat.multidisciplinary {
                single = false;
            }
        }
        Ok(single && !journal.categories.is_empty())
    }

    /// True if any of the journal's categories is multidisciplinary.
    pub fn is_multidisciplinary_journal(&self, journal: &JournalRecord) -> Result<bool> {
        for name in &journal.categories {
            if self.category(name)?.multidisciplinary {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Canonical TSV emission, categories sorted by name.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# category\tbroad_area\tflags")?;
        for cat in self.categories.values() {
            let area = cat.broad_area.map(BroadArea::name).unwrap_or("");
            let flags = if cat.multidisciplinary {
                MULTIDISCIPLINARY_FLAG
            } else {
                ""
            };
            writeln!(out, "{}\t{}\t{}", cat.name, area, flags)?;
        }
        Ok(())
    }
}

pub fn load_taxonomy<R: BufRead>(source: R) -> Result<Taxonomy> {
    let mut categories: BTreeMap<String, SubjectCategory> = BTreeMap::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(format!("reading taxonomy line {line_no}"), e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::parse(
                line_no,
                format!("expected 3 tab-separated columns, found {}", cols.len()),
            ));
        }
        let name = cols[0].trim();
        let area_tok = cols[1].trim();
        let flags = cols[2].trim();
        if name.is_empty() {
            return Err(Error::parse(line_no, "empty category name"));
        }
        let multidisciplinary = match flags {
            "" => false,
            MULTIDISCIPLINARY_FLAG => true,
            other => {
                return Err(Error::parse(line_no, format!("unknown flag '{other}'")));
            }
        };
        let broad_area = if area_tok.is_empty() {
            if !multidisciplinary {
                return Err(Error::Validation(format!(
                    "line {line_no}: category '{name}' has no broad area"
                )));
            }
            None
        } else {
            Some(area_tok.parse::<BroadArea>().map_err(|_| {
                Error::Validation(format!("line {line_no}: unknown broad area '{area_tok}'"))
            })?)
        };
        if categories.contains_key(name) {
            return Err(Error::Validation(format!(
                "line {line_no}: duplicate category '{name}'"
            )));
        }
        categories.insert(
            name.to_string(),
            SubjectCategory {
                name: name.to_string(),
                broad_area,
                multidisciplinary,
            },
        );
    }
    let taxonomy = Taxonomy { categories };
    taxonomy.check_not_degenerate()?;
    Ok(taxonomy)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "\
# test taxonomy
Astronomy & Astrophysics\tAstronomy\t
Astronomy Instrumentation\tAstronomy\t
Cell Biology\tBioscience\t
Multidisciplinary Sciences\t\tmultidisciplinary
";

    fn journal(cats: &[&str]) -> JournalRecord {
        JournalRecord {
            id: "J1".into(),
            name: "J".into(),
            categories: cats.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn loads_small_file() {
        let t = load_taxonomy(SMALL.as_bytes()).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.assignment_targets().count(), 3);
        assert_eq!(t.areas_in_use().len(), 2);
        assert!(t
            .assignment_targets()
            .all(|c| c.name != "Multidisciplinary Sciences"));
        assert!(
            t.category("Multidisciplinary Sciences")
                .unwrap()
                .multidisciplinary
        );
    }

    #[test]
    fn unknown_area_names_line_and_token() {
        let src = "Cell Biology\tBioscience\t\nAlchemy Studies\tAlchemy\t\n";
        let err = load_taxonomy(src.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Validation(_)));
        assert!(msg.contains("line 2") && msg.contains("Alchemy"), "{msg}");
    }

    #[test]
    fn rejects_duplicates_and_bad_columns() {
        let dup = "A\tPhysics\t\nB\tMedicine\t\nA\tPhysics\t\n";
        assert!(matches!(
            load_taxonomy(dup.as_bytes()),
            Err(Error::Validation(m)) if m.contains("duplicate")
        ));
        let short = "A\tPhysics\n";
        assert!(matches!(
            load_taxonomy(short.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        let flag = "A\tPhysics\tweird\nB\tMedicine\t\n";
        assert!(matches!(
            load_taxonomy(flag.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn rejects_degenerate() {
        assert!(load_taxonomy("".as_bytes()).is_err());
        assert!(load_taxonomy("A\tPhysics\t\nB\tPhysics\t\n".as_bytes()).is_err());
        // Area names are case-sensitive.
        assert!(load_taxonomy("A\tphysics\t\nB\tMedicine\t\n".as_bytes()).is_err());
    }

    #[test]
    fn broad_area_lookup() {
        let t = load_taxonomy(SMALL.as_bytes()).unwrap();
        assert_eq!(
            t.broad_area_of("Astronomy & Astrophysics").unwrap(),
            BroadArea::Astronomy
        );
        assert!(matches!(t.broad_area_of("Nope"), Err(Error::Lookup { .. })));
        for cat in t.assignment_targets() {
            t.broad_area_of(&cat.name).unwrap();
        }
    }

    #[test]
    fn classifier_journal_predicate() {
        let t = load_taxonomy(SMALL.as_bytes()).unwrap();
        assert!(t
            .is_classifier_journal(&journal(&["Astronomy & Astrophysics"]))
            .unwrap());
        assert!(!t
            .is_classifier_journal(&journal(&["Multidisciplinary Sciences"]))
            .unwrap());
        assert!(!t
            .is_classifier_journal(&journal(&["Cell Biology", "Astronomy & Astrophysics"]))
            .unwrap());
        assert!(!t
            .is_classifier_journal(&journal(&["Cell Biology", "Multidisciplinary Sciences"]))
            .unwrap());
        assert!(t.is_classifier_journal(&journal(&["Unknown"])).is_err());
    }

    #[test]
    fn canonical_round_trip() {
        let t = load_taxonomy(SMALL.as_bytes()).unwrap();
        let mut buf = Vec::new();
        t.write_tsv(&mut buf).unwrap();
        let again = load_taxonomy(buf.as_slice()).unwrap();
        assert_eq!(t, again);
        let mut buf2 = Vec::new();
        again.write_tsv(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn area_names_are_unique() {
        let names: BTreeSet<_> = BroadArea::ALL.iter().map(|a| a.name()).collect();
        assert_eq!(names.len(), 14);
        for a in BroadArea::ALL {
            assert_eq!(a.name().parse::<BroadArea>().unwrap(), a);
        }
    }
}
