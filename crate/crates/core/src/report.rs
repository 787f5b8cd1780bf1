//! Indicator tables and their deterministic TSV rendering.
//!
//! Every report file starts with one `#` line carrying the indicator
//! configuration and the manifest name, followed by a column header line
//! and the data rows. Reals are printed with six decimals (ties to even);
//! undefined values print as `NA`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::indicators::{
    area_label, prestige, CompositionTable, IndicatorConfig, Indicators, RankingTable,
    RepresentationTable, Source,
};
use crate::taxonomy::BroadArea;

pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const BUNDLE_FILE: &str = "indicators.json";
pub const REPORT_FILES: [&str; 6] = [
    "summary.tsv",
    "composition.tsv",
    "representation.tsv",
    "field_if.tsv",
    "prestige.tsv",
    "ranking.tsv",
];

/// Six decimals, round-half-even on exact binary ties.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.6}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_real).unwrap_or_else(|| "NA".into())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Resolved configuration, in insertion order.
    pub config: Vec<(String, String)>,
    /// (file name, sha256) of every input.
    pub inputs: Vec<(String, String)>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            ..Default::default()
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.push((key.into(), value.to_string()));
        self
    }

    pub fn input(&mut self, name: &str, bytes: &[u8]) -> &mut Self {
        self.inputs.push((name.into(), sha256_hex(bytes)));
        self
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command\t{}", self.command);
        let _ = writeln!(s, "version\t{}", self.version);
        for (k, v) in &self.config {
            let _ = writeln!(s, "config.{k}\t{v}");
        }
        for (name, digest) in &self.inputs {
            let _ = writeln!(s, "input.{name}\t{digest}");
        }
        for o in &self.outputs {
            let _ = writeln!(s, "output\t{o}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub source: Source,
    /// Citable items published in the publication window.
    pub articles: u64,
    pub articles_classified: u64,
    /// Citations made during the IF years to those items.
    pub citations_received: u64,
    pub mean_if: Option<f64>,
    pub skipped_years: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldIfRow {
    pub source: Source,
    pub area: Option<BroadArea>,
    pub year: i32,
    pub numerator: u64,
    pub denominator: u64,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrestigeRow {
    pub journal_id: String,
    pub area: Option<BroadArea>,
    pub journal_if: Option<f64>,
    pub baseline_if: Option<f64>,
    pub prestige: Option<f64>,
}

/// Everything the report renders, computed by the library in one go.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorTables {
    pub config: IndicatorConfig,
    pub journals: Vec<String>,
    pub areas: Vec<BroadArea>,
    pub summary: Vec<SummaryRow>,
    pub composition: Vec<CompositionTable>,
    pub all_sources_composition: CompositionTable,
    pub representation: Vec<RepresentationTable>,
    pub field_if: Vec<FieldIfRow>,
    pub prestige: Vec<PrestigeRow>,
    pub rankings: Vec<RankingTable>,
}

fn undefined_to_none<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::UndefinedValue(_)) | Err(Error::EmptyScope(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

impl IndicatorTables {
    /// Computes all tables for the selected journals. Rankings cover, per
    /// broad area in use, the selected journals plus every disciplinary
    /// journal with a category in that area.
    pub fn compute(ind: &Indicators<'_>, journals: &[String]) -> Result<Self> {
        if journals.is_empty() {
            return Err(Error::Input("no journals selected".into()));
        }
        let mut journals = journals.to_vec();
        journals.sort();
        journals.dedup();
        for j in &journals {
            if ind.corpus().journal(j).is_none() {
                return Err(Error::lookup("journal", j.as_str()));
            }
        }
        let config = ind.config().clone();
        let areas: Vec<BroadArea> = ind.taxonomy().areas_in_use().into_iter().collect();
        let mut scopes: Vec<Option<BroadArea>> = vec![None];
        scopes.extend(areas.iter().copied().map(Some));
        let mut sources: Vec<Source> = journals.iter().map(Source::journal).collect();
        sources.push(Source::AllSources);

        let mut summary = Vec::new();
        for s in &sources {
            summary.push(summary_row(ind, s)?);
        }

        let mut composition = Vec::new();
        let mut representation = Vec::new();
        let mut sets: Vec<Vec<String>> = journals.iter().map(|j| vec![j.clone()]).collect();
        if journals.len() > 1 {
            sets.push(journals.clone());
        }
        for set in &sets {
            if let Some(c) = undefined_to_none(ind.composition(set))? {
                composition.push(c);
            }
            if let Some(r) = undefined_to_none(ind.representation(set))? {
                representation.push(r);
            }
        }
        let all_sources_composition = ind.composition_all_sources()?;

        let mut field_if = Vec::new();
        for s in &sources {
            for &area in &scopes {
                for (year, numerator, denominator, value) in ind.yearly(s, area)? {
                    field_if.push(FieldIfRow {
                        source: s.clone(),
                        area,
                        year,
                        numerator,
                        denominator,
                        value,
                    });
                }
            }
        }

        let mut prestige_rows = Vec::new();
        for &area in &scopes {
            let base = undefined_to_none(ind.mean_impact_factor(&Source::AllSources, area))?
                .map(|m| m.value);
            for j in &journals {
                let jif = undefined_to_none(ind.mean_impact_factor(&Source::journal(j), area))?
                    .map(|m| m.value);
                let p = match (jif, base) {
                    (Some(x), Some(b)) => undefined_or_domain(prestige(x, b))?.map(|p| p.value),
                    _ => None,
                };
                prestige_rows.push(PrestigeRow {
                    journal_id: j.clone(),
                    area,
                    journal_if: jif,
                    baseline_if: base,
                    prestige: p,
                });
            }
        }

        let mut rankings = Vec::new();
        for &area in &areas {
            // Selected multidisciplinary journals compete in every area;
            // disciplinary journals only in the areas of their categories.
            let mut ranked = BTreeSet::new();
            for id in &journals {
                let rec = ind
                    .corpus()
                    .journal(id.as_str())
                    .ok_or_else(|| Error::lookup("journal", id.as_str()))?;
                if ind.taxonomy().is_multidisciplinary_journal(rec)? {
                    ranked.insert(id.clone());
                }
            }
            for rec in ind.corpus().journals() {
                if ind.taxonomy().is_multidisciplinary_journal(rec)? {
                    continue;
                }
                let in_area = rec
                    .categories
                    .iter()
                    .any(|c| ind.taxonomy().broad_area_of(c).ok() == Some(area));
                if in_area {
                    ranked.insert(rec.id.clone());
                }
            }
            let list: Vec<String> = ranked.into_iter().collect();
            rankings.push(ind.rank_journals(area, &list)?);
        }

        Ok(IndicatorTables {
            config,
            journals,
            areas,
            summary,
            composition,
            all_sources_composition,
            representation,
            field_if,
            prestige: prestige_rows,
            rankings,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("indicator bundle: {e}")))
    }
}

fn undefined_or_domain<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Domain(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn summary_row(ind: &Indicators<'_>, source: &Source) -> Result<SummaryRow> {
    let corpus = ind.corpus();
    let cfg = ind.config();
    let articles = corpus.articles();
    let members: Vec<u32> = match source {
        Source::AllSources => (0..corpus.len() as u32).collect(),
        Source::Journal(id) => {
            let j = corpus
                .journal_idx(id)
                .ok_or_else(|| Error::lookup("journal", id.as_str()))?;
            corpus.articles_in_journal(j).to_vec()
        }
    };
    let mut n = 0;
    let mut classified = 0;
    let mut citations = 0;
    for i in members {
        let a = &articles[i as usize];
        if a.year < cfg.pub_years.0
            || a.year > cfg.pub_years.1
            || !cfg.denominator_doc_types.contains(&a.doc_type)
        {
            continue;
        }
        n += 1;
        if ind.area_of(i).is_some() {
            classified += 1;
        }
        citations += corpus
            .cited_by(i)
            .iter()
            .filter(|c| {
                c.year >= cfg.if_years.0
                    && c.year <= cfg.if_years.1
                    && cfg
                        .citing_doc_types
                        .contains(&articles[c.citing as usize].doc_type)
            })
            .count() as u64;
    }
    let mean = undefined_to_none(ind.mean_impact_factor(source, None))?;
    Ok(SummaryRow {
        source: source.clone(),
        articles: n,
        articles_classified: classified,
        citations_received: citations,
        mean_if: mean.as_ref().map(|m| m.value),
        skipped_years: mean.map(|m| m.skipped_years).unwrap_or_default(),
    })
}

fn header(cfg: &IndicatorConfig, columns: &[&str]) -> String {
    format!(
        "# manifest={MANIFEST_FILE} {}\n{}\n",
        cfg.describe(),
        columns.join("\t")
    )
}

fn years_list(years: &[i32]) -> String {
    if years.is_empty() {
        "-".into()
    } else {
        years
            .iter()
            .map(i32::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Renders the six report tables as (file name, contents) pairs.
pub fn render_tables(tables: &IndicatorTables) -> Vec<(String, String)> {
    let cfg = &tables.config;
    let mut files = Vec::new();

    let mut s = header(
        cfg,
        &[
            "source",
            "articles",
            "articles_classified",
            "citations_received",
            "mean_if",
            "skipped_years",
        ],
    );
    let mut rows: Vec<(String, String)> = tables
        .summary
        .iter()
        .map(|r| {
            let key = r.source.to_string();
            let line = format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                key,
                r.articles,
                r.articles_classified,
                r.citations_received,
                fmt_opt(r.mean_if),
                years_list(&r.skipped_years)
            );
            (key, line)
        })
        .collect();
    rows.sort();
    rows.into_iter().for_each(|(_, l)| s.push_str(&l));
    files.push(("summary.tsv".to_string(), s));

    let mut s = header(cfg, &["scope", "area", "articles", "share"]);
    let mut rows = Vec::new();
    for c in &tables.composition {
        for area in &tables.areas {
            let count = c.counts.get(area).copied().unwrap_or(0);
            rows.push((
                (c.scope.clone(), area.name()),
                format!(
                    "{}\t{}\t{}\t{}\n",
                    c.scope,
                    area,
                    count,
                    fmt_real(c.share(*area))
                ),
            ));
        }
    }
    rows.sort();
    rows.into_iter().for_each(|(_, l)| s.push_str(&l));
    files.push(("composition.tsv".to_string(), s));

    let mut s = header(
        cfg,
        &[
            "scope",
            "area",
            "share_in_set",
            "share_all_sources",
            "ratio",
        ],
    );
    let mut rows = Vec::new();
    let mut omitted = BTreeSet::new();
    for t in &tables.representation {
        for r in &t.rows {
            rows.push((
                (t.scope.clone(), r.area.name()),
                format!(
                    "{}\t{}\t{}\t{}\t{}\n",
                    t.scope,
                    r.area,
                    fmt_real(r.share_in_set),
                    fmt_real(r.share_all_sources),
                    fmt_real(r.ratio)
                ),
            ));
        }
        omitted.extend(t.omitted.iter().map(|a| a.name()));
    }
    rows.sort();
    rows.into_iter().for_each(|(_, l)| s.push_str(&l));
    if !omitted.is_empty() {
        let _ = writeln!(
            s,
            "# omitted_areas={}",
            omitted.into_iter().collect::<Vec<_>>().join(",")
        );
    }
    files.push(("representation.tsv".to_string(), s));

    let mut s = header(
        cfg,
        &[
            "source",
            "area",
            "year",
            "numerator",
            "denominator",
            "value",
        ],
    );
    let mut rows: Vec<_> = tables
        .field_if
        .iter()
        .map(|r| {
            let src = r.source.to_string();
            let area = area_label(r.area);
            (
                (src.clone(), area, r.year),
                format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\n",
                    src,
                    area,
                    r.year,
                    r.numerator,
                    r.denominator,
                    fmt_opt(r.value)
                ),
            )
        })
        .collect();
    rows.sort();
    rows.into_iter().for_each(|(_, l)| s.push_str(&l));
    files.push(("field_if.tsv".to_string(), s));

    let mut s = header(
        cfg,
        &[
            "journal_id",
            "area",
            "journal_if",
            "baseline_if",
            "prestige",
        ],
    );
    let mut rows: Vec<_> = tables
        .prestige
        .iter()
        .map(|r| {
            let area = area_label(r.area);
            (
                (r.journal_id.clone(), area),
                format!(
                    "{}\t{}\t{}\t{}\t{}\n",
                    r.journal_id,
                    area,
                    fmt_opt(r.journal_if),
                    fmt_opt(r.baseline_if),
                    fmt_opt(r.prestige)
                ),
            )
        })
        .collect();
    rows.sort();
    rows.into_iter().for_each(|(_, l)| s.push_str(&l));
    files.push(("prestige.tsv".to_string(), s));

    let mut s = header(
        cfg,
        &["area", "rank", "journal_id", "if_value", "field_restricted"],
    );
    let mut rankings: Vec<&RankingTable> = tables.rankings.iter().collect();
    rankings.sort_by_key(|t| t.area.name());
    for t in rankings {
        for e in &t.entries {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}",
                t.area,
                e.rank.map(|r| r.to_string()).unwrap_or_else(|| "-".into()),
                e.journal_id,
                fmt_opt(e.value),
                e.field_restricted
            );
        }
    }
    files.push(("ranking.tsv".to_string(), s));
    files
}

/// Writes the report tables plus `manifest.tsv` into `out_dir`, replacing
/// its contents atomically.
pub fn emit_report(
    tables: &IndicatorTables,
    manifest: &RunManifest,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut files = render_tables(tables);
    let mut manifest = manifest.clone();
    manifest.outputs = files.iter().map(|(n, _)| n.clone()).collect();
    files.push((MANIFEST_FILE.into(), manifest.to_tsv()));
    write_dir_atomic(out_dir, &files)
}

/// Names this tool may find in (and replace inside) an output directory.
fn is_managed_name(name: &str) -> bool {
    name == MANIFEST_FILE || name == BUNDLE_FILE || REPORT_FILES.contains(&name)
}

/// Replaces `dir` with a directory holding exactly `files`. The new content
/// is staged in a sibling temp directory and swapped in by rename, so `dir`
/// holds either the complete old or the complete new set. An existing `dir`
/// may only contain files this tool writes.
pub fn write_dir_atomic(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent)
        .map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
    if dir.exists() {
        let entries =
            fs::read_dir(dir).map_err(|e| Error::io(format!("reading {}", dir.display()), e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(format!("reading {}", dir.display()), e))?;
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if !is_managed_name(&name) {
                return Err(Error::Input(format!(
                    "output directory {} contains unrelated entry '{name}'",
                    dir.display()
                )));
            }
        }
    }

    let staging = tempfile::Builder::new()
        .prefix(".refclass-out-")
        .tempdir_in(&parent)
        .map_err(|e| Error::io(format!("staging in {}", parent.display()), e))?;
    for (name, contents) in files {
        let path = staging.path().join(name);
        fs::write(&path, contents).map_err(|e| Error::io(format!("writing {name}"), e))?;
    }

    let staged = staging.keep();
    if dir.exists() {
        let backup = tempfile::Builder::new()
            .prefix(".refclass-old-")
            .tempdir_in(&parent)
            .map_err(|e| Error::io("creating backup slot", e))?
            .keep();
        fs::remove_dir(&backup).map_err(|e| Error::io("preparing backup slot", e))?;
        fs::rename(dir, &backup).map_err(|e| {
            let _ = fs::remove_dir_all(&staged);
            Error::io(format!("moving aside {}", dir.display()), e)
        })?;
        if let Err(e) = fs::rename(&staged, dir) {
            let _ = fs::rename(&backup, dir);
            let _ = fs::remove_dir_all(&staged);
            return Err(Error::io(format!("installing {}", dir.display()), e));
        }
        let _ = fs::remove_dir_all(&backup);
    } else {
        fs::rename(&staged, dir).map_err(|e| {
            let _ = fs::remove_dir_all(&staged);
            Error::io(format!("installing {}", dir.display()), e)
        })?;
    }
    Ok(files.iter().map(|(n, _)| dir.join(n)).collect())
}

/// Writes several single files; every file is staged next to its target and
/// nothing is renamed into place until all of them were written.
pub fn write_files_atomic(files: &[(&Path, Vec<u8>)]) -> Result<()> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, bytes) in files {
        let parent = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&parent)
            .map_err(|e| Error::io(format!("staging {}", path.display()), e))?;
        tmp.write_all(bytes)
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        staged.push((tmp, *path));
    }
    for (tmp, path) in staged {
        tmp.persist(path)
            .map_err(|e| Error::io(format!("installing {}", path.display()), e.error))?;
    }
    Ok(())
}
