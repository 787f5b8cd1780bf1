//! IF-like measures and the indicators derived from them.
//!
//! The IF-like value of a source (one journal, or every source) in year `y`
//! is `kappa * numerator / denominator`, where the denominator counts
//! citable items (articles by default) published in `[y - window, y - 1]`
//! and the numerator counts citations made in `y` to exactly those items.
//! Restricting to a broad area restricts the denominator set to articles
//! classified into that area; unclassified articles only ever count toward
//! whole-source values. All counting is integer; the single division
//! happens last.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classifier::AssignmentTable;
use crate::corpus::{Corpus, DocType};
use crate::error::{Error, Result};
use crate::taxonomy::{BroadArea, Taxonomy};

pub const ALL_SOURCES: &str = "ALL_SOURCES";
pub const ALL_AREAS: &str = "ALL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorConfig {
    /// Publication-window length in years.
    pub window: i32,
    /// Correction factor applied to every ratio.
    pub kappa: f64,
    pub denominator_doc_types: BTreeSet<DocType>,
    pub citing_doc_types: BTreeSet<DocType>,
    /// Inclusive range of IF years averaged by the mean measures.
    pub if_years: (i32, i32),
    /// Inclusive publication years for composition and representation.
    pub pub_years: (i32, i32),
}

impl Default for IndicatorConfig {
    fn default() -> Self {
        IndicatorConfig {
            window: 2,
            kappa: 1.04,
            denominator_doc_types: [DocType::Article].into(),
            citing_doc_types: DocType::ALL.into(),
            if_years: (2007, 2016),
            pub_years: (2005, 2015),
        }
    }
}

impl IndicatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::Config(format!(
                "window must be >= 1, got {}",
                self.window
            )));
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::Config(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if self.if_years.0 > self.if_years.1 {
            return Err(Error::Config("empty IF year range".into()));
        }
        if self.pub_years.0 > self.pub_years.1 {
            return Err(Error::Config("empty publication year range".into()));
        }
        if self.denominator_doc_types.is_empty() || self.citing_doc_types.is_empty() {
            return Err(Error::Config("doc type sets must be non-empty".into()));
        }
        Ok(())
    }

    /// One-line `key=value` rendering used in report headers.
    pub fn describe(&self) -> String {
        let types =
            |s: &BTreeSet<DocType>| s.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(",");
        format!(
            "window={} kappa={} if_years={}:{} pub_years={}:{} denominator_doc_types={} citing_doc_types={}",
            self.window,
            self.kappa,
            self.if_years.0,
            self.if_years.1,
            self.pub_years.0,
            self.pub_years.1,
            types(&self.denominator_doc_types),
            types(&self.citing_doc_types),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Source {
    AllSources,
    Journal(String),
}

impl Source {
    pub fn journal(id: impl Into<String>) -> Self {
        Source::Journal(id.into())
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::AllSources => f.write_str(ALL_SOURCES),
            Source::Journal(id) => f.write_str(id),
        }
    }
}

pub fn area_label(area: Option<BroadArea>) -> &'static str {
    area.map(BroadArea::name).unwrap_or(ALL_AREAS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfValue {
    pub source: Source,
    pub area: Option<BroadArea>,
    pub year: i32,
    pub numerator: u64,
    pub denominator: u64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanIf {
    pub source: Source,
    pub area: Option<BroadArea>,
    pub value: f64,
    pub years_used: Vec<i32>,
    /// Years with an empty denominator, left out of the mean.
    pub skipped_years: Vec<i32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrestigeValue {
    pub journal_if: f64,
    pub baseline_if: f64,
    pub value: f64,
}

/// Ratio of a journal's IF-like measure to the baseline measure of the same
/// field over all sources.
pub fn prestige(journal_if: f64, baseline_if: f64) -> Result<PrestigeValue> {
    if !(baseline_if.is_finite() && baseline_if > 0.0) {
        return Err(Error::Domain(format!(
            "baseline IF must be positive, got {baseline_if}"
        )));
    }
    if !(journal_if.is_finite() && journal_if >= 0.0) {
        return Err(Error::Domain(format!(
            "journal IF must be non-negative, got {journal_if}"
        )));
    }
    Ok(PrestigeValue {
        journal_if,
        baseline_if,
        value: journal_if / baseline_if,
    })
}

/// Arithmetic mean of the defined yearly values; `None` entries are
/// skipped and reported.
pub fn mean_of_years(values: &[(i32, Option<f64>)]) -> Result<(f64, Vec<i32>, Vec<i32>)> {
    let mut used = Vec::new();
    let mut skipped = Vec::new();
    let mut sum = 0.0;
    for &(y, v) in values {
        match v {
            Some(v) => {
                sum += v;
                used.push(y);
            }
            None => skipped.push(y),
        }
    }
    if used.is_empty() {
        return Err(Error::UndefinedValue(
            "no year in range has a positive denominator".into(),
        ));
    }
    Ok((sum / used.len() as f64, used, skipped))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionTable {
    /// Journal id, `+`-joined set of ids, or `ALL_SOURCES`.
    pub scope: String,
    pub counts: BTreeMap<BroadArea, u64>,
    pub total: u64,
}

impl CompositionTable {
    pub fn share(&self, area: BroadArea) -> f64 {
        self.counts.get(&area).copied().unwrap_or(0) as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationRow {
    pub area: BroadArea,
    pub share_in_set: f64,
    pub share_all_sources: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationTable {
    pub scope: String,
    pub rows: Vec<RepresentationRow>,
    /// Areas with no articles over all sources, for which no ratio exists.
    pub omitted: Vec<BroadArea>,
}

impl RepresentationTable {
    pub fn ratio(&self, area: BroadArea) -> Option<f64> {
        self.rows.iter().find(|r| r.area == area).map(|r| r.ratio)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    /// 1-based; `None` when the journal's IF is undefined.
    pub rank: Option<usize>,
    pub journal_id: String,
    pub value: Option<f64>,
    /// True when the value is restricted to the ranked area.
    pub field_restricted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingTable {
    pub area: BroadArea,
    pub entries: Vec<RankEntry>,
}

/// Sorts by value descending, journal id ascending on ties; undefined
/// values go last, unranked, in id order.
pub fn order_ranking(area: BroadArea, mut entries: Vec<RankEntry>) -> RankingTable {
    entries.sort_by(|a, b| match (a.value, b.value) {
        (Some(x), Some(y)) => y
            .total_cmp(&x)
            .then_with(|| a.journal_id.cmp(&b.journal_id)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.journal_id.cmp(&b.journal_id),
    });
    let mut next = 1;
    for e in &mut entries {
        e.rank = e.value.map(|_| {
            next += 1;
            next - 1
        });
    }
    RankingTable { area, entries }
}

pub type YearlyIf = (i32, u64, u64, Option<f64>);

/// Read-only view over a classified corpus.
pub struct Indicators<'a> {
    corpus: &'a Corpus,
    taxonomy: &'a Taxonomy,
    areas: Vec<Option<BroadArea>>,
    config: IndicatorConfig,
}

impl<'a> Indicators<'a> {
    pub fn new(
        corpus: &'a Corpus,
        taxonomy: &'a Taxonomy,
        assignments: &AssignmentTable,
        config: IndicatorConfig,
    ) -> Result<Self> {
        let areas = assignments.area_labels(corpus)?;
        Self::from_areas(corpus, taxonomy, areas, config)
    }

    /// `areas` is the broad area of each corpus article, in corpus order.
    pub fn from_areas(
        corpus: &'a Corpus,
        taxonomy: &'a Taxonomy,
        areas: Vec<Option<BroadArea>>,
        config: IndicatorConfig,
    ) -> Result<Self> {
        config.validate()?;
        if areas.len() != corpus.len() {
            return Err(Error::Input(format!(
                "{} area labels for {} articles",
                areas.len(),
                corpus.len()
            )));
        }
        Ok(Indicators {
            corpus,
            taxonomy,
            areas,
            config,
        })
    }

    pub fn config(&self) -> &IndicatorConfig {
        &self.config
    }

    pub fn corpus(&self) -> &Corpus {
        self.corpus
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        self.taxonomy
    }

    pub fn area_of(&self, article: u32) -> Option<BroadArea> {
        self.areas[article as usize]
    }

    fn source_articles(&self, source: &Source) -> Result<Box<dyn Iterator<Item = u32> + '_>> {
        Ok(match source {
            Source::AllSources => Box::new(0..self.corpus.len() as u32),
            Source::Journal(id) => {
                let j = self
                    .corpus
                    .journal_idx(id)
                    .ok_or_else(|| Error::lookup("journal", id.as_str()))?;
                Box::new(self.corpus.articles_in_journal(j).iter().copied())
            }
        })
    }

    fn is_citable(&self, article: u32, area: Option<BroadArea>) -> bool {
        let a = &self.corpus.articles()[article as usize];
        self.config.denominator_doc_types.contains(&a.doc_type)
            && area.is_none_or(|want| self.areas[article as usize] == Some(want))
    }

    fn citations_in_year(&self, article: u32, year: i32) -> u64 {
        let articles = self.corpus.articles();
        self.corpus
            .cited_by(article)
            .iter()
            .filter(|c| {
                c.year == year
                    && self
                        .config
                        .citing_doc_types
                        .contains(&articles[c.citing as usize].doc_type)
            })
            .count() as u64
    }

    /// Exact (numerator, denominator) behind [`Self::impact_factor`].
    pub fn if_counts(
        &self,
        source: &Source,
        year: i32,
        area: Option<BroadArea>,
    ) -> Result<(u64, u64)> {
        let first = year - self.config.window;
        if let Some((earliest, _)) = self.corpus.year_span() {
            if first < earliest {
                return Err(Error::Input(format!(
                    "IF year {year} needs publications from {first}, before the corpus starts in {earliest}"
                )));
            }
        }
        let articles = self.corpus.articles();
        let mut num = 0;
        let mut den = 0;
        for i in self.source_articles(source)? {
            let y = articles[i as usize].year;
            if y < first || y >= year || !self.is_citable(i, area) {
                continue;
            }
            den += 1;
            num += self.citations_in_year(i, year);
        }
        Ok((num, den))
    }

    pub fn impact_factor(
        &self,
        source: &Source,
        year: i32,
        area: Option<BroadArea>,
    ) -> Result<IfValue> {
        let (numerator, denominator) = self.if_counts(source, year, area)?;
        if denominator == 0 {
            return Err(Error::UndefinedValue(format!(
                "no citable items for {source} / {} in the window before {year}",
                area_label(area)
            )));
        }
        Ok(IfValue {
            source: source.clone(),
            area,
            year,
            numerator,
            denominator,
            value: self.config.kappa * (numerator as f64 / denominator as f64),
        })
    }

    /// Yearly `(year, numerator, denominator, value)` over the configured IF
    /// years; `None` marks a year with an empty denominator.
    pub fn yearly(&self, source: &Source, area: Option<BroadArea>) -> Result<Vec<YearlyIf>> {
        let (a, b) = self.config.if_years;
        (a..=b)
            .map(|y| match self.impact_factor(source, y, area) {
                Ok(v) => Ok((y, v.numerator, v.denominator, Some(v.value))),
                Err(Error::UndefinedValue(_)) => Ok((y, 0, 0, None)),
                Err(e) => Err(e),
            })
            .collect()
    }

    pub fn mean_impact_factor(&self, source: &Source, area: Option<BroadArea>) -> Result<MeanIf> {
        let yearly = self.yearly(source, area)?;
        let values: Vec<(i32, Option<f64>)> = yearly.iter().map(|&(y, _, _, v)| (y, v)).collect();
        let (value, years_used, skipped_years) = mean_of_years(&values).map_err(|_| {
            Error::UndefinedValue(format!(
                "{source} / {} has no defined IF in {}..={}",
                area_label(area),
                self.config.if_years.0,
                self.config.if_years.1
            ))
        })?;
        Ok(MeanIf {
            source: source.clone(),
            area,
            value,
            years_used,
            skipped_years,
        })
    }

    /// Field-restricted journal measure over the all-sources measure of the
    /// same field (or of everything, for `area = None`).
    pub fn journal_prestige(
        &self,
        journal: &str,
        area: Option<BroadArea>,
    ) -> Result<PrestigeValue> {
        let j = self.mean_impact_factor(&Source::journal(journal), area)?;
        let base = self.mean_impact_factor(&Source::AllSources, area)?;
        prestige(j.value, base.value)
    }

    fn in_pub_window(&self, article: u32) -> bool {
        let y = self.corpus.articles()[article as usize].year;
        y >= self.config.pub_years.0 && y <= self.config.pub_years.1
    }

    fn composition_of(&self, scope: String, sources: &[Source]) -> Result<CompositionTable> {
        let mut counts: BTreeMap<BroadArea, u64> = self
            .taxonomy
            .areas_in_use()
            .into_iter()
            .map(|a| (a, 0))
            .collect();
        let mut total = 0;
        for source in sources {
            for i in self.source_articles(source)? {
                if !self.in_pub_window(i) || !self.is_citable(i, None) {
                    continue;
                }
                if let Some(area) = self.areas[i as usize] {
                    *counts.entry(area).or_default() += 1;
                    total += 1;
                }
            }
        }
        if total == 0 {
            return Err(Error::EmptyScope(format!(
                "no classified articles in {scope} for {}..={}",
                self.config.pub_years.0, self.config.pub_years.1
            )));
        }
        Ok(CompositionTable {
            scope,
            counts,
            total,
        })
    }

    /// Area shares of the classified citable articles published by the
    /// journal set within the publication window.
    pub fn composition(&self, journals: &[String]) -> Result<CompositionTable> {
        if journals.is_empty() {
            return Err(Error::EmptyScope("empty journal set".into()));
        }
        let sources: Vec<Source> = journals.iter().map(Source::journal).collect();
        self.composition_of(journals.join("+"), &sources)
    }

    pub fn composition_all_sources(&self) -> Result<CompositionTable> {
        self.composition_of(ALL_SOURCES.into(), &[Source::AllSources])
    }

    pub fn representation(&self, journals: &[String]) -> Result<RepresentationTable> {
        let set = self.composition(journals)?;
        let all = self.composition_all_sources()?;
        Ok(representation_of(&set, &all))
    }

    /// Ranks journals within `area`: journals with a multidisciplinary
    /// category use their field-restricted mean IF, disciplinary journals
    /// their whole-journal mean IF.
    pub fn rank_journals(&self, area: BroadArea, journals: &[String]) -> Result<RankingTable> {
        let mut entries = Vec::with_capacity(journals.len());
        for id in journals {
            let record = self
                .corpus
                .journal(id)
                .ok_or_else(|| Error::lookup("journal", id.as_str()))?;
            let field_restricted = self.taxonomy.is_multidisciplinary_journal(record)?;
            let scope = field_restricted.then_some(area);
            let value = match self.mean_impact_factor(&Source::journal(id), scope) {
                Ok(m) => Some(m.value),
                Err(Error::UndefinedValue(_)) => None,
                Err(e) => return Err(e),
            };
            entries.push(RankEntry {
                rank: None,
                journal_id: id.clone(),
                value,
                field_restricted,
            });
        }
        Ok(order_ranking(area, entries))
    }
}

/// Per-area ratio of the set's share to the all-sources share.
pub fn representation_of(set: &CompositionTable, all: &CompositionTable) -> RepresentationTable {
    let areas: BTreeSet<BroadArea> = set
        .counts
        .keys()
        .chain(all.counts.keys())
        .copied()
        .collect();
    let mut rows = Vec::new();
    let mut omitted = Vec::new();
    for area in areas {
        let share_all_sources = all.share(area);
        if share_all_sources > 0.0 {
            let share_in_set = set.share(area);
            rows.push(RepresentationRow {
                area,
                share_in_set,
                share_all_sources,
                ratio: share_in_set / share_all_sources,
            });
        } else {
            omitted.push(area);
        }
    }
    RepresentationTable {
        scope: set.scope.clone(),
        rows,
        omitted,
    }
}
