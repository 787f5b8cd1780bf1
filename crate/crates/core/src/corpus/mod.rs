//! The bibliographic corpus: article and journal tables, forward reference
//! lists, and the inverted citation index keyed by cited article.
//!
//! Articles and journals are stored sorted by id, so an article's position
//! (its index) is stable for a given corpus and is what the classifier and
//! the indicator code use internally.

mod record;
pub mod synth;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

pub use record::{parse_record, read_records, ArticleRecord, DocType, JournalRecord, Record};

use crate::error::{Error, Result};
use crate::taxonomy::Taxonomy;

/// One incoming citation: who cites, and in which year.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Citation {
    pub citing: u32,
    pub year: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub min_year: i32,
    pub max_year: i32,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            min_year: 1900,
            max_year: 2100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    articles: Vec<ArticleRecord>,
    journals: Vec<JournalRecord>,
    article_index: HashMap<String, u32>,
    journal_index: HashMap<String, u32>,
    article_journal: Vec<u32>,
    journal_articles: Vec<Vec<u32>>,
    /// In-corpus references per article, in reference-list order.
    references: Vec<Vec<u32>>,
    cited_by: Vec<Vec<Citation>>,
    dangling: usize,
}

pub fn build_corpus(records: impl IntoIterator<Item = Record>) -> Result<Corpus> {
    build_corpus_with(records, BuildOptions::default())
}

/// Builds the corpus and its citation index.
///
/// Duplicate references within one article's list are collapsed to the
/// first occurrence.
pub fn build_corpus_with(
    records: impl IntoIterator<Item = Record>,
    options: BuildOptions,
) -> Result<Corpus> {
    let mut articles = Vec::new();
    let mut journals = Vec::new();
    for r in records {
        match r {
            Record::Article(a) => articles.push(a),
            Record::Journal(j) => journals.push(j),
        }
    }

    journals.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = journals.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(Error::Build(format!("duplicate journal id '{}'", w[0].id)));
    }
    if let Some(j) = journals.iter().find(|j| j.categories.is_empty()) {
        return Err(Error::Build(format!(
            "journal '{}' has no categories",
            j.id
        )));
    }
    articles.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = articles.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(Error::Build(format!("duplicate article id '{}'", w[0].id)));
    }

    let journal_index: HashMap<String, u32> = journals
        .iter()
        .enumerate()
        .map(|(i, j)| (j.id.clone(), i as u32))
        .collect();
    let article_index: HashMap<String, u32> = articles
        .iter()
        .enumerate()
        .map(|(i, a)| (a.id.clone(), i as u32))
        .collect();

    let mut unresolved = Vec::new();
    let mut article_journal = Vec::with_capacity(articles.len());
    let mut journal_articles = vec![Vec::new(); journals.len()];
    for (i, a) in articles.iter_mut().enumerate() {
        if a.year < options.min_year || a.year > options.max_year {
            return Err(Error::Build(format!(
                "article '{}' has year {} outside {}..={}",
                a.id, a.year, options.min_year, options.max_year
            )));
        }
        if a.references.contains(&a.id) {
            return Err(Error::Build(format!("article '{}' cites itself", a.id)));
        }
        let mut seen = HashSet::with_capacity(a.references.len());
        a.references.retain(|r| seen.insert(r.clone()));
        match journal_index.get(&a.journal_id) {
            Some(&j) => {
                article_journal.push(j);
                journal_articles[j as usize].push(i as u32);
            }
            None => {
                unresolved.push(format!("{} -> {}", a.id, a.journal_id));
                article_journal.push(u32::MAX);
            }
        }
    }
    if !unresolved.is_empty() {
        return Err(Error::Build(format!(
            "{} article(s) reference unknown journals: {}",
            unresolved.len(),
            unresolved.join(", ")
        )));
    }

    let mut references = Vec::with_capacity(articles.len());
    let mut cited_by = vec![Vec::new(); articles.len()];
    let mut dangling = 0usize;
    for (i, a) in articles.iter().enumerate() {
        let mut refs = Vec::with_capacity(a.references.len());
        for r in &a.references {
            match article_index.get(r) {
                Some(&t) => {
                    refs.push(t);
                    cited_by[t as usize].push(Citation {
                        citing: i as u32,
                        year: a.year,
                    });
                }
                None => dangling += 1,
            }
        }
        references.push(refs);
    }

    Ok(Corpus {
        articles,
        journals,
        article_index,
        journal_index,
        article_journal,
        journal_articles,
        references,
        cited_by,
        dangling,
    })
}

/// Reads, parses, and builds a corpus from a corpus file.
pub fn load_corpus<R: BufRead>(source: R) -> Result<Corpus> {
    build_corpus(read_records(source)?)
}

impl Corpus {
    pub fn articles(&self) -> &[ArticleRecord] {
        &self.articles
    }

    pub fn journals(&self) -> &[JournalRecord] {
        &self.journals
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn article_idx(&self, id: &str) -> Option<u32> {
        self.article_index.get(id).copied()
    }

    pub fn article(&self, id: &str) -> Option<&ArticleRecord> {
        self.article_idx(id).map(|i| &self.articles[i as usize])
    }

    pub fn journal_idx(&self, id: &str) -> Option<u32> {
        self.journal_index.get(id).copied()
    }

    pub fn journal(&self, id: &str) -> Option<&JournalRecord> {
        self.journal_idx(id).map(|j| &self.journals[j as usize])
    }

    /// Journal index of the article at `article`.
    pub fn journal_of(&self, article: u32) -> u32 {
        self.article_journal[article as usize]
    }

    pub fn articles_in_journal(&self, journal: u32) -> &[u32] {
        &self.journal_articles[journal as usize]
    }

    /// In-corpus references of the article at `article`.
    pub fn references_of(&self, article: u32) -> &[u32] {
        &self.references[article as usize]
    }

    /// Citations received by the article at `article`, ordered by citing index.
    pub fn cited_by(&self, article: u32) -> &[Citation] {
        &self.cited_by[article as usize]
    }

    /// Id-keyed view of the citation index: (citing id, citing year) pairs.
    pub fn citation_index(&self, cited_id: &str) -> Vec<(&str, i32)> {
        match self.article_idx(cited_id) {
            Some(i) => self.cited_by[i as usize]
                .iter()
                .map(|c| (self.articles[c.citing as usize].id.as_str(), c.year))
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn dangling_references(&self) -> usize {
        self.dangling
    }

    /// Inclusive (min, max) publication year, or `None` for an empty corpus.
    pub fn year_span(&self) -> Option<(i32, i32)> {
        let min = self.articles.iter().map(|a| a.year).min()?;
        let max = self.articles.iter().map(|a| a.year).max()?;
        Some((min, max))
    }

    /// Canonical emission: journals then articles, each sorted by id.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for j in &self.journals {
            writeln!(out, "{}", j.to_line())?;
        }
        for a in &self.articles {
            writeln!(out, "{}", a.to_line())?;
        }
        Ok(())
    }

    /// Journal/category pairs whose category is missing from `taxonomy`.
    pub fn unknown_categories(&self, taxonomy: &Taxonomy) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for j in &self.journals {
            for c in &j.categories {
                if taxonomy.category(c).is_err() {
                    out.push((j.id.clone(), c.clone()));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub articles: usize,
    pub journals: usize,
    pub dangling_references: usize,
    pub zero_reference_articles: usize,
    pub doc_types: BTreeMap<DocType, usize>,
    pub years: BTreeMap<i32, usize>,
    pub articles_per_journal: BTreeMap<String, usize>,
}

impl ValidationReport {
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "articles\t{}", self.articles)?;
        writeln!(out, "journals\t{}", self.journals)?;
        writeln!(out, "dangling_references\t{}", self.dangling_references)?;
        writeln!(
            out,
            "zero_reference_articles\t{}",
            self.zero_reference_articles
        )?;
        for (t, n) in &self.doc_types {
            writeln!(out, "doc_type:{t}\t{n}")?;
        }
        for (y, n) in &self.years {
            writeln!(out, "year:{y}\t{n}")?;
        }
        for (j, n) in &self.articles_per_journal {
            writeln!(out, "journal:{j}\t{n}")?;
        }
        Ok(())
    }
}

pub fn validate_corpus(corpus: &Corpus) -> ValidationReport {
    let mut doc_types: BTreeMap<DocType, usize> = DocType::ALL.iter().map(|&t| (t, 0)).collect();
    let mut years = BTreeMap::new();
    let mut zero_refs = 0;
    for a in corpus.articles() {
        *doc_types.entry(a.doc_type).or_default() += 1;
        *years.entry(a.year).or_default() += 1;
        if a.references.is_empty() {
            zero_refs += 1;
        }
    }
    let articles_per_journal = corpus
        .journals()
        .iter()
        .enumerate()
        .map(|(j, rec)| (rec.id.clone(), corpus.articles_in_journal(j as u32).len()))
        .collect();
    ValidationReport {
        articles: corpus.len(),
        journals: corpus.journals().len(),
        dangling_references: corpus.dangling_references(),
        zero_reference_articles: zero_refs,
        doc_types,
        years,
        articles_per_journal,
    }
}
