//! Iterative reference-based classification.
//!
//! Articles published in classifier journals (exactly one subject category,
//! not multidisciplinary) are seeded with that category and never change.
//! Every other article is labeled by a plurality vote over the current
//! labels of its in-corpus references. Updates are synchronous: iteration
//! `k + 1` reads only the table produced by iteration `k`, so the result
//! does not depend on traversal order or thread count. Iteration stops at
//! the first pass that changes nothing, or at `max_iterations`.
//!
//! Ties are held unclassified while iterating (by default) and broken
//! byte-wise lexicographically in a single terminal pass; those rows carry
//! the `tie-broken` status.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::synth::GroundTruth;
use crate::corpus::{ArticleRecord, Corpus};
use crate::error::{Error, Result};
use crate::taxonomy::{BroadArea, Taxonomy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    JournalSeeded,
    ReferenceClassified,
    TieBroken,
    Unclassified,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::JournalSeeded => "journal-seeded",
            Status::ReferenceClassified => "reference-classified",
            Status::TieBroken => "tie-broken",
            Status::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "journal-seeded" => Ok(Status::JournalSeeded),
            "reference-classified" => Ok(Status::ReferenceClassified),
            "tie-broken" => Ok(Status::TieBroken),
            "unclassified" => Ok(Status::Unclassified),
            _ => Err(Error::lookup("status", s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Ties stay unclassified until the terminal pass breaks them.
    UnclassifiedUntilStable,
    /// Ties are broken immediately in every iteration.
    Lexicographic,
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unclassified-until-stable" => Ok(TiePolicy::UnclassifiedUntilStable),
            "lexicographic" => Ok(TiePolicy::Lexicographic),
            _ => Err(Error::lookup("tie policy", s)),
        }
    }
}

impl fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TiePolicy::UnclassifiedUntilStable => "unclassified-until-stable",
            TiePolicy::Lexicographic => "lexicographic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    CategoryLevel,
    BroadAreaLevel,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "category-level" | "category" => Ok(Mode::CategoryLevel),
            "broad-area-level" | "broad-area" => Ok(Mode::BroadAreaLevel),
            _ => Err(Error::lookup("mode", s)),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::CategoryLevel => "category-level",
            Mode::BroadAreaLevel => "broad-area-level",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub max_iterations: usize,
    pub min_votes: u32,
    pub tie_policy: TiePolicy,
    pub mode: Mode,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            max_iterations: 10,
            min_votes: 1,
            tie_policy: TiePolicy::UnclassifiedUntilStable,
            mode: Mode::CategoryLevel,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be >= 1".into()));
        }
        if self.min_votes < 1 {
            return Err(Error::Config("min_votes must be >= 1".into()));
        }
        Ok(())
    }
}

/// Votes per label (category name, or broad-area name in broad-area mode).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VoteTally {
    votes: BTreeMap<String, u32>,
    total_votes: u32,
}

impl VoteTally {
    pub fn add(&mut self, label: &str) {
        *self.votes.entry(label.to_string()).or_default() += 1;
        self.total_votes += 1;
    }

    pub fn votes(&self) -> &BTreeMap<String, u32> {
        &self.votes
    }

    pub fn total_votes(&self) -> u32 {
        self.total_votes
    }

    pub fn is_empty(&self) -> bool {
        self.total_votes == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub article_id: String,
    pub category: Option<String>,
    pub broad_area: Option<BroadArea>,
    pub status: Status,
    /// Iteration at which the current label and status were last set.
    pub iteration: usize,
    pub total_votes: u32,
    /// Full tally; absent when the table was read back from a file.
    pub tally: Option<VoteTally>,
}

impl Assignment {
    fn unclassified(article_id: String) -> Self {
        Assignment {
            article_id,
            category: None,
            broad_area: None,
            status: Status::Unclassified,
            iteration: 0,
            total_votes: 0,
            tally: Some(VoteTally::default()),
        }
    }

    /// The label this row votes with under `mode`.
    pub fn label(&self, mode: Mode) -> Option<&str> {
        match mode {
            Mode::CategoryLevel => self.category.as_deref(),
            Mode::BroadAreaLevel => self.broad_area.map(BroadArea::name),
        }
    }
}

/// Assignments keyed by article id, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssignmentTable {
    rows: Vec<Assignment>,
}

impl AssignmentTable {
    pub fn from_rows(mut rows: Vec<Assignment>) -> Result<Self> {
        rows.sort_by(|a, b| a.article_id.cmp(&b.article_id));
        if let Some(w) = rows.windows(2).find(|w| w[0].article_id == w[1].article_id) {
            return Err(Error::Input(format!(
                "duplicate assignment for '{}'",
                w[0].article_id
            )));
        }
        Ok(AssignmentTable { rows })
    }

    pub fn rows(&self) -> &[Assignment] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, article_id: &str) -> Option<&Assignment> {
        self.rows
            .binary_search_by(|r| r.article_id.as_str().cmp(article_id))
            .ok()
            .map(|i| &self.rows[i])
    }

    /// Broad area per corpus article, aligned with corpus order.
    ///
    /// The table must cover exactly the corpus articles.
    pub fn area_labels(&self, corpus: &Corpus) -> Result<Vec<Option<BroadArea>>> {
        if self.rows.len() != corpus.len() {
            return Err(Error::Input(format!(
                "assignment table has {} rows but the corpus has {} articles",
                self.rows.len(),
                corpus.len()
            )));
        }
        corpus
            .articles()
            .iter()
            .zip(&self.rows)
            .map(|(a, r)| {
                if a.id == r.article_id {
                    Ok(r.broad_area)
                } else {
                    Err(Error::Input(format!(
                        "assignment table does not match corpus at article '{}'",
                        a.id
                    )))
                }
            })
            .collect()
    }

    /// `article_id, category, broad_area, status, iteration, total_votes`.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.rows {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.article_id,
                r.category.as_deref().unwrap_or(""),
                r.broad_area.map(BroadArea::name).unwrap_or(""),
                r.status,
                r.iteration,
                r.total_votes
            )?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(source: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::io("reading assignments", e))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 6 {
                return Err(Error::parse(
                    line_no,
                    format!("expected 6 columns, found {}", cols.len()),
                ));
            }
            let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
            let broad_area = match cols[2] {
                "" => None,
                s => Some(
                    s.parse::<BroadArea>()
                        .map_err(|_| Error::parse(line_no, format!("unknown broad area '{s}'")))?,
                ),
            };
            let status: Status = cols[3]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("unknown status '{}'", cols[3])))?;
            let iteration = cols[4]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad iteration '{}'", cols[4])))?;
            let total_votes = cols[5]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad total_votes '{}'", cols[5])))?;
            rows.push(Assignment {
                article_id: cols[0].to_string(),
                category: opt(cols[1]),
                broad_area,
                status,
                iteration,
                total_votes,
                tally: None,
            });
        }
        AssignmentTable::from_rows(rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IterationStats {
    pub iteration: usize,
    /// Unlabeled before, labeled after.
    pub newly_classified: usize,
    /// Labeled before and after, with a different label or status.
    pub relabeled: usize,
    /// Labeled before, unlabeled after.
    pub declassified: usize,
}

impl IterationStats {
    pub fn changes(&self) -> usize {
        self.newly_classified + self.relabeled + self.declassified
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationResult {
    pub assignments: AssignmentTable,
    pub iterations_run: usize,
    pub iterations: Vec<IterationStats>,
    /// Rows settled by the terminal tie-break pass.
    pub terminal_tie_breaks: usize,
}

/// Iteration-0 table: classifier-journal articles carry their journal's
/// category, everything else is unclassified.
pub fn seed_assignments(corpus: &Corpus, taxonomy: &Taxonomy) -> Result<AssignmentTable> {
    let seeds = journal_seeds(corpus, taxonomy)?;
    let rows = corpus
        .articles()
        .iter()
        .enumerate()
        .map(
            |(i, a)| match &seeds[corpus.journal_of(i as u32) as usize] {
                Some((cat, area)) => Assignment {
                    article_id: a.id.clone(),
                    category: Some(cat.clone()),
                    broad_area: Some(*area),
                    status: Status::JournalSeeded,
                    iteration: 0,
                    total_votes: 0,
                    tally: Some(VoteTally::default()),
                },
                None => Assignment::unclassified(a.id.clone()),
            },
        )
        .collect();
    Ok(AssignmentTable { rows })
}

/// Seed category per journal, or `None` for non-classifier journals.
fn journal_seeds(corpus: &Corpus, taxonomy: &Taxonomy) -> Result<Vec<Option<(String, BroadArea)>>> {
    corpus
        .journals()
        .iter()
        .map(|j| {
            if taxonomy.is_classifier_journal(j)? {
                let cat = &j.categories[0];
                Ok(Some((cat.clone(), taxonomy.broad_area_of(cat)?)))
            } else {
                Ok(None)
            }
        })
        .collect()
}

/// Tally of the labels currently carried by the article's references.
/// Dangling and unlabeled references contribute nothing.
pub fn tally_references(
    article: &ArticleRecord,
    assignments: &AssignmentTable,
    mode: Mode,
) -> VoteTally {
    let mut tally = VoteTally::default();
    for r in &article.references {
        if let Some(label) = assignments.get(r).and_then(|a| a.label(mode)) {
            tally.add(label);
        }
    }
    tally
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pass {
    Iteration,
    Terminal,
}

/// Plurality resolution of a tally. Returns the winning label with status
/// `reference-classified`, or with `tie-broken` when a tie was settled by
/// byte-wise order.
pub fn resolve_tally(
    tally: &VoteTally,
    config: &ClassifierConfig,
    pass: Pass,
) -> Option<(String, Status)> {
    if tally.total_votes < config.min_votes || tally.votes.is_empty() {
        return None;
    }
    let max = *tally.votes.values().max()?;
    let mut winners = tally
        .votes
        .iter()
        .filter(|(_, &c)| c == max)
        .map(|(l, _)| l);
    let first = winners.next()?.clone();
    if winners.next().is_none() {
        return Some((first, Status::ReferenceClassified));
    }
    match (config.tie_policy, pass) {
        (TiePolicy::Lexicographic, _) | (_, Pass::Terminal) => Some((first, Status::TieBroken)),
        (TiePolicy::UnclassifiedUntilStable, Pass::Iteration) => None,
    }
}

/// Interned label space: index order equals byte-wise name order.
struct Labels {
    names: Vec<String>,
    areas: Vec<BroadArea>,
}

impl Labels {
    fn new(taxonomy: &Taxonomy, mode: Mode) -> Self {
        match mode {
            Mode::CategoryLevel => {
                let (names, areas) = taxonomy
                    .assignment_targets()
                    .map(|c| (c.name.clone(), c.broad_area.expect("targets carry an area")))
                    .unzip();
                Labels { names, areas }
            }
            Mode::BroadAreaLevel => {
                let mut areas: Vec<BroadArea> = taxonomy.areas_in_use().into_iter().collect();
                areas.sort_by_key(|a| a.name());
                Labels {
                    names: areas.iter().map(|a| a.name().to_string()).collect(),
                    areas,
                }
            }
        }
    }

    fn index(&self, name: &str) -> u32 {
        self.names
            .binary_search_by(|n| n.as_str().cmp(name))
            .expect("label in label space") as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    label: Option<u32>,
    status: Status,
    iteration: usize,
}

/// Resolution over an interned, label-sorted tally.
fn resolve_counts(
    counts: &[(u32, u32)],
    config: &ClassifierConfig,
    pass: Pass,
) -> (Option<u32>, Status) {
    let total: u32 = counts.iter().map(|&(_, c)| c).sum();
    if total < config.min_votes || counts.is_empty() {
        return (None, Status::Unclassified);
    }
    let max = counts.iter().map(|&(_, c)| c).max().unwrap_or(0);
    let mut winners = counts.iter().filter(|&&(_, c)| c == max);
    let first = winners.next().map(|&(l, _)| l);
    if winners.next().is_none() {
        return (first, Status::ReferenceClassified);
    }
    match (config.tie_policy, pass) {
        (TiePolicy::Lexicographic, _) | (_, Pass::Terminal) => (first, Status::TieBroken),
        (TiePolicy::UnclassifiedUntilStable, Pass::Iteration) => (None, Status::Unclassified),
    }
}

fn tally_counts(refs: &[u32], table: &[Entry]) -> Vec<(u32, u32)> {
    let mut counts: Vec<(u32, u32)> = Vec::new();
    for &r in refs {
        if let Some(l) = table[r as usize].label {
            match counts.binary_search_by_key(&l, |&(k, _)| k) {
                Ok(i) => counts[i].1 += 1,
                Err(i) => counts.insert(i, (l, 1)),
            }
        }
    }
    counts
}

/// Runs the full iterative classification.
pub fn classify(
    corpus: &Corpus,
    taxonomy: &Taxonomy,
    config: &ClassifierConfig,
) -> Result<ClassificationResult> {
    config.validate()?;
    let labels = Labels::new(taxonomy, config.mode);
    let seeds = journal_seeds(corpus, taxonomy)?;
    let n = corpus.len();

    let seed_label: Vec<Option<u32>> = (0..n)
        .map(|i| {
            seeds[corpus.journal_of(i as u32) as usize]
                .as_ref()
                .map(|(cat, area)| match config.mode {
                    Mode::CategoryLevel => labels.index(cat),
                    Mode::BroadAreaLevel => labels.index(area.name()),
                })
        })
        .collect();

    let mut table: Vec<Entry> = seed_label
        .iter()
        .map(|s| Entry {
            label: *s,
            status: if s.is_some() {
                Status::JournalSeeded
            } else {
                Status::Unclassified
            },
            iteration: 0,
        })
        .collect();
    let mut tallies: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    let mut stats = Vec::new();
    let mut iterations_run = 0;

    for k in 1..=config.max_iterations {
        let prev = &table;
        let next: Vec<(Entry, Vec<(u32, u32)>)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let old = prev[i];
                if seed_label[i].is_some() {
                    return (old, Vec::new());
                }
                let counts = tally_counts(corpus.references_of(i as u32), prev);
                let (label, status) = resolve_counts(&counts, config, Pass::Iteration);
                let iteration = if label == old.label && status == old.status {
                    old.iteration
                } else {
                    k
                };
                (
                    Entry {
                        label,
                        status,
                        iteration,
                    },
                    counts,
                )
            })
            .collect();

        let mut s = IterationStats {
            iteration: k,
            ..Default::default()
        };
        for (old, (new, _)) in table.iter().zip(&next) {
            match (old.label, new.label) {
                (None, Some(_)) => s.newly_classified += 1,
                (Some(_), None) => s.declassified += 1,
                (Some(a), Some(b)) if a != b || old.status != new.status => s.relabeled += 1,
                _ => {}
            }
        }
        for (i, (entry, counts)) in next.into_iter().enumerate() {
            table[i] = entry;
            tallies[i] = counts;
        }
        stats.push(s);
        iterations_run = k;
        if s.changes() == 0 {
            break;
        }
    }

    let mut terminal_tie_breaks = 0;
    if config.tie_policy == TiePolicy::UnclassifiedUntilStable {
        for i in 0..n {
            if seed_label[i].is_some() || table[i].label.is_some() {
                continue;
            }
            let (label, status) = resolve_counts(&tallies[i], config, Pass::Terminal);
            if label.is_some() {
                table[i] = Entry {
                    label,
                    status,
                    iteration: iterations_run,
                };
                terminal_tie_breaks += 1;
            }
        }
    }

    let rows = corpus
        .articles()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let e = table[i];
            let (category, broad_area) = if e.status == Status::JournalSeeded {
                let (cat, area) = seeds[corpus.journal_of(i as u32) as usize]
                    .clone()
                    .expect("seeded article has a seed journal");
                (Some(cat), Some(area))
            } else {
                match (e.label, config.mode) {
                    (None, _) => (None, None),
                    (Some(l), Mode::CategoryLevel) => (
                        Some(labels.names[l as usize].clone()),
                        Some(labels.areas[l as usize]),
                    ),
                    (Some(l), Mode::BroadAreaLevel) => (None, Some(labels.areas[l as usize])),
                }
            };
            let mut tally = VoteTally::default();
            for &(l, c) in &tallies[i] {
                tally.votes.insert(labels.names[l as usize].clone(), c);
                tally.total_votes += c;
            }
            Assignment {
                article_id: a.id.clone(),
                category,
                broad_area,
                status: e.status,
                iteration: e.iteration,
                total_votes: tally.total_votes,
                tally: Some(tally),
            }
        })
        .collect();

    Ok(ClassificationResult {
        assignments: AssignmentTable { rows },
        iterations_run,
        iterations: stats,
        terminal_tie_breaks,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub articles: usize,
    /// Articles carrying a broad area.
    pub classified: usize,
    pub coverage: f64,
    pub with_category: usize,
    pub category_correct: usize,
    pub category_accuracy: f64,
    pub area_correct: usize,
    pub area_accuracy: f64,
    /// (planted area, assigned area or none) → count.
    pub confusion: BTreeMap<(BroadArea, Option<BroadArea>), usize>,
}

impl AccuracyReport {
    pub fn area_error(&self) -> f64 {
        1.0 - self.area_accuracy
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores a classification against planted ground truth. Accuracies are
/// taken over the rows that carry a label; coverage over all rows.
pub fn evaluate_accuracy(
    assignments: &AssignmentTable,
    truth: &GroundTruth,
) -> Result<AccuracyReport> {
    let mut classified = 0;
    let mut with_category = 0;
    let mut category_correct = 0;
    let mut area_correct = 0;
    let mut confusion = BTreeMap::new();
    for row in assignments.rows() {
        let field = truth.field_of(&row.article_id).ok_or_else(|| {
            Error::Input(format!(
                "article '{}' missing from ground truth",
                row.article_id
            ))
        })?;
        let planted_area = truth.field_area(field);
        *confusion.entry((planted_area, row.broad_area)).or_default() += 1;
        if let Some(area) = row.broad_area {
            classified += 1;
            if area == planted_area {
                area_correct += 1;
            }
        }
        if let Some(cat) = &row.category {
            with_category += 1;
            if cat == truth.field_category(field) {
                category_correct += 1;
            }
        }
    }
    let articles = assignments.len();
    Ok(AccuracyReport {
        articles,
        classified,
        coverage: ratio(classified, articles),
        with_category,
        category_correct,
        category_accuracy: ratio(category_correct, with_category),
        area_correct,
        area_accuracy: ratio(area_correct, classified),
        confusion,
    })
}
