//! Seeded synthetic corpora with planted fields.
//!
//! The generated world has one single-category journal per (field, slot)
//! pair plus a number of general journals filed under a multidisciplinary
//! category. Every regular article carries a planted field and a
//! Poisson-sized reference list drawn from same-year articles: its own field
//! with probability `p_intra`, otherwise a uniformly chosen other field.
//!
//! Citations that feed the impact measures come from "citing filler" items
//! (doc type `other`, published in the field's journals). An article
//! published in year `t` receives Poisson(`field_citation_rate[f]`)
//! citations from fillers of its field in every year `s > t` in the range,
//! scaled by `general_citation_multiplier` for general-journal articles.
//! Regular references only point at same-year items, which never fall inside
//! an IF window, so a field's expected IF is exactly `kappa * rate`.
//!
//! All randomness comes from a single ChaCha8 stream seeded from
//! `seed`, consumed in a fixed order.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::{build_corpus, ArticleRecord, Corpus, DocType, JournalRecord, Record};
use crate::error::{Error, Result};
use crate::taxonomy::{BroadArea, SubjectCategory, Taxonomy};

pub const GENERAL_CATEGORY: &str = "Multidisciplinary Sciences";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub num_fields: usize,
    pub journals_per_field: usize,
    #[serde(default)]
    pub num_general_journals: usize,
    pub articles_per_journal_year: usize,
    /// Inclusive publication-year interval.
    pub year_range: (i32, i32),
    pub mean_refs: f64,
    pub p_intra: f64,
    /// Expected citations per article per subsequent year, one per field.
    pub field_citation_rate: Vec<f64>,
    /// Field mix of general-journal articles; empty means uniform.
    #[serde(default)]
    pub general_field_mix: Vec<f64>,
    #[serde(default = "one")]
    pub general_citation_multiplier: f64,
    #[serde(default = "default_filler_refs")]
    pub filler_refs: usize,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

fn default_filler_refs() -> usize {
    20
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            num_fields: 10,
            journals_per_field: 5,
            num_general_journals: 2,
            articles_per_journal_year: 192,
            year_range: (2005, 2009),
            mean_refs: 20.0,
            p_intra: 0.8,
            field_citation_rate: (0..10).map(|f| 1.0 + 0.5 * f as f64).collect(),
            general_field_mix: Vec::new(),
            general_citation_multiplier: 1.0,
            filler_refs: 20,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SyntheticConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.num_fields < 2 {
            return fail(format!("num_fields must be >= 2, got {}", self.num_fields));
        }
        if self.num_fields > BroadArea::ALL.len() {
            return fail(format!(
                "num_fields must be <= {} so every field maps to its own broad area, got {}",
                BroadArea::ALL.len(),
                self.num_fields
            ));
        }
        if self.journals_per_field < 1 {
            return fail("journals_per_field must be >= 1".into());
        }
        if self.articles_per_journal_year < 1 {
            return fail("articles_per_journal_year must be >= 1".into());
        }
        if self.year_range.0 > self.year_range.1 {
            return fail(format!(
                "empty year_range {}..={}",
                self.year_range.0, self.year_range.1
            ));
        }
        if !(self.mean_refs.is_finite() && self.mean_refs > 0.0) {
            return fail(format!(
                "mean_refs must be positive, got {}",
                self.mean_refs
            ));
        }
        if !(0.0..=1.0).contains(&self.p_intra) {
            return fail(format!("p_intra must lie in [0, 1], got {}", self.p_intra));
        }
        if self.field_citation_rate.len() != self.num_fields {
            return fail(format!(
                "field_citation_rate needs {} entries, got {}",
                self.num_fields,
                self.field_citation_rate.len()
            ));
        }
        if self
            .field_citation_rate
            .iter()
            .any(|r| !(r.is_finite() && *r > 0.0))
        {
            return fail("field_citation_rate entries must be positive".into());
        }
        if !self.general_field_mix.is_empty() {
            if self.general_field_mix.len() != self.num_fields {
                return fail(format!(
                    "general_field_mix needs {} entries, got {}",
                    self.num_fields,
                    self.general_field_mix.len()
                ));
            }
            if self
                .general_field_mix
                .iter()
                .any(|p| !(p.is_finite() && *p >= 0.0))
            {
                return fail("general_field_mix entries must be non-negative".into());
            }
            let sum: f64 = self.general_field_mix.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return fail(format!("general_field_mix sums to {sum}, expected 1"));
            }
        }
        if !(self.general_citation_multiplier.is_finite() && self.general_citation_multiplier > 0.0)
        {
            return fail("general_citation_multiplier must be positive".into());
        }
        if self.filler_refs < 1 {
            return fail("filler_refs must be >= 1".into());
        }
        Ok(())
    }

    fn mix(&self) -> Vec<f64> {
        if self.general_field_mix.is_empty() {
            vec![1.0 / self.num_fields as f64; self.num_fields]
        } else {
            self.general_field_mix.clone()
        }
    }
}

/// Planted field of every generated item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    fields: BTreeMap<String, usize>,
    field_categories: Vec<String>,
    field_areas: Vec<BroadArea>,
}

impl GroundTruth {
    /// `fields` maps article id to field index; field `f` is labeled with
    /// `field_categories[f]` and `field_areas[f]`.
    pub fn new(
        fields: BTreeMap<String, usize>,
        field_categories: Vec<String>,
        field_areas: Vec<BroadArea>,
    ) -> Self {
        assert_eq!(field_categories.len(), field_areas.len());
        GroundTruth {
            fields,
            field_categories,
            field_areas,
        }
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn field_of(&self, article_id: &str) -> Option<usize> {
        self.fields.get(article_id).copied()
    }

    pub fn category_of(&self, article_id: &str) -> Option<&str> {
        self.field_of(article_id)
            .map(|f| self.field_categories[f].as_str())
    }

    pub fn area_of(&self, article_id: &str) -> Option<BroadArea> {
        self.field_of(article_id).map(|f| self.field_areas[f])
    }

    pub fn field_area(&self, field: usize) -> BroadArea {
        self.field_areas[field]
    }

    pub fn field_category(&self, field: usize) -> &str {
        &self.field_categories[field]
    }

    pub fn num_fields(&self) -> usize {
        self.field_areas.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.fields.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// TSV rows `article_id<TAB>field<TAB>category<TAB>broad_area`, sorted by id.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# article_id\tfield\tcategory\tbroad_area")?;
        for (id, &f) in &self.fields {
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                id, f, self.field_categories[f], self.field_areas[f]
            )?;
        }
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(source: R) -> Result<Self> {
        let mut fields = BTreeMap::new();
        let mut meta: BTreeMap<usize, (String, BroadArea)> = BTreeMap::new();
        for (idx, line) in source.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::io("reading truth file", e))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Error::parse(line_no, "expected 4 columns"));
            }
            let f: usize = cols[1]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad field index '{}'", cols[1])))?;
            let area: BroadArea = cols[3]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad broad area '{}'", cols[3])))?;
            meta.insert(f, (cols[2].to_string(), area));
            fields.insert(cols[0].to_string(), f);
        }
        let n = meta.keys().next_back().map_or(0, |m| m + 1);
        if meta.len() != n {
            return Err(Error::Input("truth file has gaps in field indices".into()));
        }
        let (field_categories, field_areas) = meta.into_values().unzip();
        Ok(GroundTruth {
            fields,
            field_categories,
            field_areas,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub truth: GroundTruth,
    pub taxonomy: Taxonomy,
}

pub fn field_category_name(area: BroadArea) -> String {
    format!("Synthetic {area}")
}

pub fn field_journal_id(field: usize, slot: usize) -> String {
    format!("J{field:02}-{slot:02}")
}

pub fn general_journal_id(g: usize) -> String {
    format!("G{g:02}")
}

pub fn generate_synthetic(config: &SyntheticConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let nf = config.num_fields;
    let areas: Vec<BroadArea> = BroadArea::ALL[..nf].to_vec();
    let categories: Vec<String> = areas.iter().map(|&a| field_category_name(a)).collect();

    let mut tax_cats: Vec<SubjectCategory> = areas
        .iter()
        .zip(&categories)
        .map(|(&a, name)| SubjectCategory {
            name: name.clone(),
            broad_area: Some(a),
            multidisciplinary: false,
        })
        .collect();
    if config.num_general_journals > 0 {
        tax_cats.push(SubjectCategory {
            name: GENERAL_CATEGORY.into(),
            broad_area: None,
            multidisciplinary: true,
        });
    }
    let taxonomy = Taxonomy::new(tax_cats)?;

    let mut records = Vec::new();
    for f in 0..nf {
        for s in 0..config.journals_per_field {
            records.push(Record::Journal(JournalRecord {
                id: field_journal_id(f, s),
                name: format!("{} Letters {}", areas[f], s + 1),
                categories: vec![categories[f].clone()],
            }));
        }
    }
    for g in 0..config.num_general_journals {
        records.push(Record::Journal(JournalRecord {
            id: general_journal_id(g),
            name: format!("General Science {}", g + 1),
            categories: vec![GENERAL_CATEGORY.into()],
        }));
    }

    struct Planted {
        record: ArticleRecord,
        field: usize,
        general: bool,
    }

    let (y0, y1) = config.year_range;
    let mix = WeightedIndex::new(config.mix())
        .map_err(|e| Error::Config(format!("general_field_mix: {e}")))?;
    let ref_count =
        Poisson::new(config.mean_refs).map_err(|e| Error::Config(format!("mean_refs: {e}")))?;

    let mut planted: Vec<Planted> = Vec::new();
    let mut next_id = 0usize;
    for year in y0..=y1 {
        let first = planted.len();
        let mut pools: Vec<Vec<usize>> = vec![Vec::new(); nf];
        for (f, pool) in pools.iter_mut().enumerate() {
            for s in 0..config.journals_per_field {
                for _ in 0..config.articles_per_journal_year {
                    pool.push(planted.len());
                    planted.push(Planted {
                        record: new_article(&mut next_id, field_journal_id(f, s), year),
                        field: f,
                        general: false,
                    });
                }
            }
        }
        for g in 0..config.num_general_journals {
            for _ in 0..config.articles_per_journal_year {
                let f = mix.sample(&mut rng);
                pools[f].push(planted.len());
                planted.push(Planted {
                    record: new_article(&mut next_id, general_journal_id(g), year),
                    field: f,
                    general: true,
                });
            }
        }

        for i in first..planted.len() {
            let own = planted[i].field;
            let k = ref_count.sample(&mut rng) as usize;
            let mut chosen: Vec<usize> = Vec::with_capacity(k);
            for _ in 0..k {
                let field = if rng.random_bool(config.p_intra) {
                    own
                } else {
                    let r = rng.random_range(0..nf - 1);
                    if r >= own {
                        r + 1
                    } else {
                        r
                    }
                };
                let pool = &pools[field];
                // Redraw on self or repeat picks; tiny pools may come up short.
                for _ in 0..32 {
                    let t = pool[rng.random_range(0..pool.len())];
                    if t != i && !chosen.contains(&t) {
                        chosen.push(t);
                        break;
                    }
                }
            }
            let refs = chosen
                .iter()
                .map(|&t| planted[t].record.id.clone())
                .collect();
            planted[i].record.references = refs;
        }
    }

    // cited[(year - y0) * nf + field] = targets cited by that year's fillers,
    // each target's copies kept adjacent.
    let years = (y1 - y0 + 1) as usize;
    let mut cited: Vec<Vec<usize>> = vec![Vec::new(); years * nf];
    let rates: Vec<Poisson<f64>> = config
        .field_citation_rate
        .iter()
        .map(|&r| Poisson::new(r))
        .chain(
            config
                .field_citation_rate
                .iter()
                .map(|&r| Poisson::new(r * config.general_citation_multiplier)),
        )
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Config(format!("citation rate: {e}")))?;
    for (i, p) in planted.iter().enumerate() {
        let dist = &rates[p.field + if p.general { nf } else { 0 }];
        for s in (p.record.year + 1)..=y1 {
            let c = dist.sample(&mut rng) as usize;
            let slot = &mut cited[(s - y0) as usize * nf + p.field];
            slot.extend(std::iter::repeat_n(i, c));
        }
    }

    let mut fillers: Vec<(ArticleRecord, usize)> = Vec::new();
    let mut next_filler = 0usize;
    for (cell, targets) in cited.iter().enumerate() {
        if targets.is_empty() {
            continue;
        }
        let year = y0 + (cell / nf) as i32;
        let field = cell % nf;
        let max_mult = max_run(targets);
        let count = targets.len().div_ceil(config.filler_refs).max(max_mult);
        let mut batch: Vec<ArticleRecord> = (0..count)
            .map(|k| {
                next_filler += 1;
                ArticleRecord {
                    id: format!("C{next_filler:08}"),
                    journal_id: field_journal_id(field, k % config.journals_per_field),
                    year,
                    doc_type: DocType::Other,
                    references: Vec::new(),
                }
            })
            .collect();
        for (n, &t) in targets.iter().enumerate() {
            batch[n % count]
                .references
                .push(planted[t].record.id.clone());
        }
        fillers.extend(batch.into_iter().map(|r| (r, field)));
    }

    let mut truth = BTreeMap::new();
    for p in &planted {
        truth.insert(p.record.id.clone(), p.field);
    }
    for (r, f) in &fillers {
        truth.insert(r.id.clone(), *f);
    }
    records.extend(planted.into_iter().map(|p| Record::Article(p.record)));
    records.extend(fillers.into_iter().map(|(r, _)| Record::Article(r)));

    let corpus = build_corpus(records)?;
    Ok(SyntheticCorpus {
        corpus,
        truth: GroundTruth {
            fields: truth,
            field_categories: categories,
            field_areas: areas,
        },
        taxonomy,
    })
}

fn new_article(next_id: &mut usize, journal_id: String, year: i32) -> ArticleRecord {
    *next_id += 1;
    ArticleRecord {
        id: format!("A{:08}", *next_id),
        journal_id,
        year,
        doc_type: DocType::Article,
        references: Vec::new(),
    }
}

/// Longest run of equal adjacent values.
fn max_run(v: &[usize]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for (i, x) in v.iter().enumerate() {
        if i > 0 && v[i - 1] == *x {
            run += 1;
        } else {
            run = 1;
        }
        best = best.max(run);
    }
    best
}
