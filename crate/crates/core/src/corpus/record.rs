//! Line-level record format.
//!
//! ```text
//! A<TAB>id<TAB>journal_id<TAB>year<TAB>doc_type<TAB>ref1,ref2,...
//! J<TAB>id<TAB>name<TAB>category1;category2
//! ```

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocType {
    Article,
    Review,
    Other,
}

impl DocType {
    pub const ALL: [DocType; 3] = [DocType::Article, DocType::Review, DocType::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            DocType::Article => "article",
            DocType::Review => "review",
            DocType::Other => "other",
        }
    }
}

impl fmt::Display for DocType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DocType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "article" => Ok(DocType::Article),
            "review" => Ok(DocType::Review),
            "other" => Ok(DocType::Other),
            _ => Err(Error::lookup("doc_type", s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleRecord {
    pub id: String,
    pub journal_id: String,
    pub year: i32,
    pub doc_type: DocType,
    pub references: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalRecord {
    pub id: String,
    pub name: String,
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    Article(ArticleRecord),
    Journal(JournalRecord),
}

impl Record {
    /// Canonical single-line form, without the trailing newline.
    pub fn to_line(&self) -> String {
        match self {
            Record::Article(a) => a.to_line(),
            Record::Journal(j) => j.to_line(),
        }
    }
}

impl ArticleRecord {
    pub fn to_line(&self) -> String {
        format!(
            "A\t{}\t{}\t{}\t{}\t{}",
            self.id,
            self.journal_id,
            self.year,
            self.doc_type,
            self.references.join(",")
        )
    }
}

impl JournalRecord {
    pub fn to_line(&self) -> String {
        format!(
            "J\t{}\t{}\t{}",
            self.id,
            self.name,
            self.categories.join(";")
        )
    }
}

fn column_count_error(line_no: usize, tag: &str, want: usize, got: usize) -> Error {
    Error::parse(
        line_no,
        format!("'{tag}' record needs {want} columns, found {got}"),
    )
}

/// Parses one non-comment line. `line_no` is only used for diagnostics.
pub fn parse_record(line: &str, line_no: usize) -> Result<Record> {
    let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
    match cols[0] {
        "A" => {
            if cols.len() != 6 {
                return Err(column_count_error(line_no, "A", 6, cols.len()));
            }
            let id = non_empty(cols[1], "article id", line_no)?;
            let journal_id = non_empty(cols[2], "journal id", line_no)?;
            let year: i32 = cols[3]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("non-integer year '{}'", cols[3])))?;
            let doc_type: DocType = cols[4]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("unknown doc_type '{}'", cols[4])))?;
            let references = if cols[5].is_empty() {
                Vec::new()
            } else {
                cols[5]
                    .split(',')
                    .map(|r| non_empty(r.trim(), "reference", line_no))
                    .collect::<Result<Vec<_>>>()?
            };
            Ok(Record::Article(ArticleRecord {
                id,
                journal_id,
                year,
                doc_type,
                references,
            }))
        }
        "J" => {
            if cols.len() != 4 {
                return Err(column_count_error(line_no, "J", 4, cols.len()));
            }
            let id = non_empty(cols[1], "journal id", line_no)?;
            let categories = cols[3]
                .split(';')
                .map(|c| non_empty(c.trim(), "category", line_no))
                .collect::<Result<Vec<_>>>()?;
            Ok(Record::Journal(JournalRecord {
                id,
                name: cols[2].to_string(),
                categories,
            }))
        }
        tag => Err(Error::parse(line_no, format!("unknown record tag '{tag}'"))),
    }
}

fn non_empty(tok: &str, what: &str, line_no: usize) -> Result<String> {
    if tok.is_empty() {
        Err(Error::parse(line_no, format!("empty {what}")))
    } else {
        Ok(tok.to_string())
    }
}

/// Reads every record from a corpus file, skipping blank and `#` lines.
pub fn read_records<R: BufRead>(source: R) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(format!("reading corpus line {line_no}"), e))?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_record(&line, line_no)?);
    }
    Ok(out)
}
