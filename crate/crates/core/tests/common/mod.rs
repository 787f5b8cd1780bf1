//! Shared fixtures for integration tests: small random corpora and
//! deliberately naive reference computations.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use refclass::classifier::{ClassifierConfig, Mode, Status, TiePolicy};
use refclass::corpus::{build_corpus, ArticleRecord, Corpus, DocType, JournalRecord, Record};
use refclass::indicators::{IndicatorConfig, Indicators, Source};
use refclass::taxonomy::{load_taxonomy, BroadArea, Taxonomy};

pub const MULTI: &str = "Multidisciplinary Sciences";

/// Category names chosen so byte order differs from case-folded order.
pub const TAXONOMY_TSV: &str = "\
Acoustics\tPhysics\t
Optics\tPhysics\t
Biochemistry\tBioscience\t
Zoology\tBioscience\t
ecology\tBioscience\t
Chemistry, Physical\tChemistry\t
Multidisciplinary Sciences\t\tmultidisciplinary
";

pub const REGULAR: [&str; 6] = [
    "Acoustics",
    "Optics",
    "Biochemistry",
    "Zoology",
    "ecology",
    "Chemistry, Physical",
];

pub fn taxonomy() -> Taxonomy {
    load_taxonomy(TAXONOMY_TSV.as_bytes()).expect("fixture taxonomy")
}

pub struct RandomCorpus {
    pub journals: Vec<JournalRecord>,
    pub articles: Vec<ArticleRecord>,
    pub corpus: Corpus,
    pub taxonomy: Taxonomy,
}

pub fn random_corpus(seed: u64, max_articles: usize) -> RandomCorpus {
    random_corpus_sized(seed, 1..=max_articles)
}

pub fn random_corpus_sized(seed: u64, sizes: RangeInclusive<usize>) -> RandomCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_journals = rng.random_range(2..=8);
    let journals: Vec<JournalRecord> = (0..n_journals)
        .map(|j| {
            let pick =
                |rng: &mut ChaCha8Rng| REGULAR[rng.random_range(0..REGULAR.len())].to_string();
            let categories = match rng.random_range(0..10) {
                0..=4 => vec![pick(&mut rng)],
                5 | 6 => vec![MULTI.to_string()],
                7 | 8 => {
                    let a = pick(&mut rng);
                    let mut b = pick(&mut rng);
                    while b == a {
                        b = pick(&mut rng);
                    }
                    vec![a, b]
                }
                _ => vec![pick(&mut rng), MULTI.to_string()],
            };
            JournalRecord {
                id: format!("J{j}"),
                name: format!("Journal {j}"),
                categories,
            }
        })
        .collect();

    let n = rng.random_range(sizes);
    let ids: Vec<String> = (0..n).map(|i| format!("P{i:04}")).collect();
    let max_refs = rng.random_range(1..=8);
    let articles: Vec<ArticleRecord> = (0..n)
        .map(|i| {
            let k = rng.random_range(0..=max_refs);
            let mut references = Vec::with_capacity(k);
            for _ in 0..k {
                match rng.random_range(0..20) {
                    0 => references.push(format!("X{}", rng.random_range(0..5))),
                    1 if !references.is_empty() => references.push(references[0].clone()),
                    _ => {
                        let r = rng.random_range(0..n);
                        if r != i {
                            references.push(ids[r].clone());
                        }
                    }
                }
            }
            let doc_type = match rng.random_range(0..10) {
                0..=6 => DocType::Article,
                7 => DocType::Review,
                _ => DocType::Other,
            };
            ArticleRecord {
                id: ids[i].clone(),
                journal_id: journals[rng.random_range(0..n_journals)].id.clone(),
                year: rng.random_range(2000..=2006),
                doc_type,
                references,
            }
        })
        .collect();

    let records = journals
        .iter()
        .cloned()
        .map(Record::Journal)
        .chain(articles.iter().cloned().map(Record::Article));
    let corpus = build_corpus(records).expect("random corpus builds");
    RandomCorpus {
        journals,
        articles,
        corpus,
        taxonomy: taxonomy(),
    }
}

pub fn random_classifier_config(rng: &mut impl Rng) -> ClassifierConfig {
    ClassifierConfig {
        max_iterations: rng.random_range(1..=8),
        min_votes: rng.random_range(1..=3),
        tie_policy: if rng.random_bool(0.5) {
            TiePolicy::UnclassifiedUntilStable
        } else {
            TiePolicy::Lexicographic
        },
        mode: if rng.random_bool(0.5) {
            Mode::CategoryLevel
        } else {
            Mode::BroadAreaLevel
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveRow {
    pub category: Option<String>,
    pub broad_area: Option<BroadArea>,
    pub status: Status,
    pub iteration: usize,
    pub total_votes: u32,
}

/// Straightforward string-keyed re-implementation of the iterative
/// classifier, used as an oracle.
pub fn naive_classify(
    articles: &[ArticleRecord],
    journals: &[JournalRecord],
    taxonomy: &Taxonomy,
    config: &ClassifierConfig,
) -> (BTreeMap<String, NaiveRow>, usize) {
    let journal_cats: HashMap<&str, &Vec<String>> = journals
        .iter()
        .map(|j| (j.id.as_str(), &j.categories))
        .collect();
    let area_of = |cat: &str| taxonomy.category(cat).unwrap().broad_area;
    let seed_of = |a: &ArticleRecord| -> Option<String> {
        let cats = journal_cats[a.journal_id.as_str()];
        if cats.len() == 1 && !taxonomy.category(&cats[0]).unwrap().multidisciplinary {
            Some(cats[0].clone())
        } else {
            None
        }
    };
    let to_label = |cat: &str| -> String {
        match config.mode {
            Mode::CategoryLevel => cat.to_string(),
            Mode::BroadAreaLevel => area_of(cat).unwrap().name().to_string(),
        }
    };

    let known: HashSet<&str> = articles.iter().map(|a| a.id.as_str()).collect();
    let refs: HashMap<&str, BTreeSet<&str>> = articles
        .iter()
        .map(|a| {
            let set = a
                .references
                .iter()
                .map(String::as_str)
                .filter(|r| known.contains(r))
                .collect();
            (a.id.as_str(), set)
        })
        .collect();

    // (label, status, iteration)
    let mut state: HashMap<&str, (Option<String>, Status, usize)> = HashMap::new();
    for a in articles {
        let entry = match seed_of(a) {
            Some(cat) => (Some(to_label(&cat)), Status::JournalSeeded, 0),
            None => (None, Status::Unclassified, 0),
        };
        state.insert(a.id.as_str(), entry);
    }

    let decide = |tally: &BTreeMap<String, u32>, terminal: bool| -> (Option<String>, Status) {
        let total: u32 = tally.values().sum();
        if tally.is_empty() || total < config.min_votes {
            return (None, Status::Unclassified);
        }
        let best = *tally.values().max().unwrap();
        let winners: Vec<&String> = tally
            .iter()
            .filter(|(_, &v)| v == best)
            .map(|(k, _)| k)
            .collect();
        if winners.len() == 1 {
            (Some(winners[0].clone()), Status::ReferenceClassified)
        } else if terminal || config.tie_policy == TiePolicy::Lexicographic {
            (Some(winners[0].clone()), Status::TieBroken)
        } else {
            (None, Status::Unclassified)
        }
    };

    let mut tallies: HashMap<&str, BTreeMap<String, u32>> = HashMap::new();
    let mut iterations_run = 0;
    for k in 1..=config.max_iterations {
        let mut next = state.clone();
        let mut changed = false;
        for a in articles {
            let id = a.id.as_str();
            if state[id].1 == Status::JournalSeeded {
                continue;
            }
            let mut tally = BTreeMap::new();
            for r in &refs[id] {
                if let Some(l) = &state[r].0 {
                    *tally.entry(l.clone()).or_insert(0u32) += 1;
                }
            }
            let (label, status) = decide(&tally, false);
            let old = &state[id];
            if old.0 != label || old.1 != status {
                changed = true;
                next.insert(id, (label, status, k));
            }
            tallies.insert(id, tally);
        }
        state = next;
        iterations_run = k;
        if !changed {
            break;
        }
    }

    if config.tie_policy == TiePolicy::UnclassifiedUntilStable {
        for a in articles {
            let id = a.id.as_str();
            if state[id].1 == Status::JournalSeeded || state[id].0.is_some() {
                continue;
            }
            let (label, status) = decide(&tallies[id], true);
            if label.is_some() {
                state.insert(id, (label, status, iterations_run));
            }
        }
    }

    let mut out = BTreeMap::new();
    for a in articles {
        let id = a.id.as_str();
        let (label, status, iteration) = state[id].clone();
        let total_votes = tallies.get(id).map(|t| t.values().sum()).unwrap_or(0);
        let (category, broad_area) = if status == Status::JournalSeeded {
            let cat = seed_of(a).unwrap();
            let area = area_of(&cat);
            (Some(cat), area)
        } else {
            match (label, config.mode) {
                (None, _) => (None, None),
                (Some(l), Mode::CategoryLevel) => {
                    let area = area_of(&l);
                    (Some(l), area)
                }
                (Some(l), Mode::BroadAreaLevel) => (None, Some(l.parse().unwrap())),
            }
        };
        out.insert(
            a.id.clone(),
            NaiveRow {
                category,
                broad_area,
                status,
                iteration,
                total_votes,
            },
        );
    }
    (out, iterations_run)
}

/// Which articles count toward a source: `None` is every journal.
pub struct Scope<'a> {
    pub journal: Option<&'a str>,
    pub area: Option<BroadArea>,
}

/// Exhaustive scan of every article and every reference edge.
pub fn brute_force_if_counts(
    articles: &[ArticleRecord],
    areas: &HashMap<String, Option<BroadArea>>,
    scope: &Scope<'_>,
    year: i32,
    window: i32,
    denominator_types: &[DocType],
    citing_types: &[DocType],
) -> (u64, u64) {
    let in_den = |a: &ArticleRecord| {
        scope.journal.is_none_or(|j| a.journal_id == j)
            && denominator_types.contains(&a.doc_type)
            && a.year >= year - window
            && a.year < year
            && scope.area.is_none_or(|want| areas[&a.id] == Some(want))
    };
    let den_set: HashSet<&str> = articles
        .iter()
        .filter(|a| in_den(a))
        .map(|a| a.id.as_str())
        .collect();
    let mut num = 0u64;
    for c in articles {
        if c.year != year || !citing_types.contains(&c.doc_type) {
            continue;
        }
        let unique: HashSet<&str> = c.references.iter().map(String::as_str).collect();
        num += unique.iter().filter(|r| den_set.contains(*r)).count() as u64;
    }
    (num, den_set.len() as u64)
}

// ---- indicator fixtures ----

pub const AREAS: [BroadArea; 3] = [
    BroadArea::Physics,
    BroadArea::Bioscience,
    BroadArea::Chemistry,
];

/// Random area labels; with `complete` every article gets one.
pub fn random_areas(
    rng: &mut impl Rng,
    articles: &[ArticleRecord],
    complete: bool,
) -> HashMap<String, Option<BroadArea>> {
    articles
        .iter()
        .map(|a| {
            let area = if !complete && rng.random_bool(0.2) {
                None
            } else {
                Some(AREAS[rng.random_range(0..AREAS.len())])
            };
            (a.id.clone(), area)
        })
        .collect()
}

fn random_doc_types(rng: &mut impl Rng) -> BTreeSet<DocType> {
    loop {
        let set: BTreeSet<DocType> = DocType::ALL
            .into_iter()
            .filter(|_| rng.random_bool(0.6))
            .collect();
        if !set.is_empty() {
            return set;
        }
    }
}

pub fn random_indicator_config(rng: &mut impl Rng, corpus: &Corpus) -> IndicatorConfig {
    let window = rng.random_range(1..=3);
    let (first, last) = corpus.year_span().unwrap();
    IndicatorConfig {
        window,
        kappa: rng.random_range(0.5..2.0),
        denominator_doc_types: random_doc_types(rng),
        citing_doc_types: random_doc_types(rng),
        if_years: (first + window, (last + 1).max(first + window)),
        pub_years: (first, last),
    }
}

pub fn area_vec(
    corpus: &Corpus,
    areas: &HashMap<String, Option<BroadArea>>,
) -> Vec<Option<BroadArea>> {
    corpus.articles().iter().map(|a| areas[&a.id]).collect()
}

pub fn sources(journals: &[JournalRecord]) -> Vec<Source> {
    std::iter::once(Source::AllSources)
        .chain(journals.iter().map(|j| Source::journal(j.id.clone())))
        .collect()
}

pub fn rebuild(journals: &[JournalRecord], articles: &[ArticleRecord]) -> Corpus {
    let records = journals
        .iter()
        .cloned()
        .map(Record::Journal)
        .chain(articles.iter().cloned().map(Record::Article));
    build_corpus(records).unwrap()
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {{
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    }};
}

/// Every IF value computed with kappa = k is bit-identical to k times the
/// value computed with kappa = 1.
pub fn check_kappa_linearity(seed: u64) -> Result<(), String> {
    let rc = random_corpus(seed, 400);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let areas = random_areas(&mut rng, &rc.articles, false);
    let config = random_indicator_config(&mut rng, &rc.corpus);
    let k = config.kappa;
    let unit = IndicatorConfig {
        kappa: 1.0,
        ..config.clone()
    };
    let labels = area_vec(&rc.corpus, &areas);
    let scaled =
        Indicators::from_areas(&rc.corpus, &rc.taxonomy, labels.clone(), config.clone()).unwrap();
    let plain = Indicators::from_areas(&rc.corpus, &rc.taxonomy, labels, unit).unwrap();
    for source in sources(&rc.journals) {
        for year in config.if_years.0..=config.if_years.1 {
            for area in std::iter::once(None).chain(AREAS.map(Some)) {
                match (
                    scaled.impact_factor(&source, year, area),
                    plain.impact_factor(&source, year, area),
                ) {
                    (Ok(a), Ok(b)) => ensure!(
                        a.value.to_bits() == (k * b.value).to_bits(),
                        "seed {seed} {source} {year}: {} != {k} * {}",
                        a.value,
                        b.value
                    ),
                    (Err(_), Err(_)) => {}
                    (a, b) => return Err(format!("seed {seed}: definedness differs: {a:?} {b:?}")),
                }
            }
        }
    }
    Ok(())
}

/// Adds one citation edge into a counted window and checks that no
/// affected IF value goes down. Returns `Ok(false)` when the random corpus
/// offers no candidate edge.
pub fn check_monotonicity(seed: u64) -> Result<bool, String> {
    let rc = random_corpus(seed, 400);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let areas = random_areas(&mut rng, &rc.articles, false);
    let config = random_indicator_config(&mut rng, &rc.corpus);
    let before = Indicators::from_areas(
        &rc.corpus,
        &rc.taxonomy,
        area_vec(&rc.corpus, &areas),
        config.clone(),
    )
    .unwrap();

    let mut candidates = Vec::new();
    for (ci, c) in rc.articles.iter().enumerate() {
        let y = c.year;
        if y < config.if_years.0
            || y > config.if_years.1
            || !config.citing_doc_types.contains(&c.doc_type)
        {
            continue;
        }
        for (ti, t) in rc.articles.iter().enumerate() {
            if ti != ci
                && t.year >= y - config.window
                && t.year < y
                && config.denominator_doc_types.contains(&t.doc_type)
                && !c.references.contains(&t.id)
            {
                candidates.push((ci, ti));
            }
        }
    }
    if candidates.is_empty() {
        return Ok(false);
    }
    let (ci, ti) = candidates[rng.random_range(0..candidates.len())];
    let mut articles = rc.articles.clone();
    let target_id = articles[ti].id.clone();
    articles[ci].references.push(target_id);
    let corpus = rebuild(&rc.journals, &articles);
    let after =
        Indicators::from_areas(&corpus, &rc.taxonomy, area_vec(&corpus, &areas), config).unwrap();

    let year = articles[ci].year;
    let target = &articles[ti];
    for source in [
        Source::AllSources,
        Source::journal(target.journal_id.clone()),
    ] {
        for area in [None, areas[&target.id]] {
            let old = before.impact_factor(&source, year, area).unwrap();
            let new = after.impact_factor(&source, year, area).unwrap();
            ensure!(
                new.numerator == old.numerator + 1 && new.denominator == old.denominator,
                "seed {seed}: counts {:?} -> {:?}",
                (old.numerator, old.denominator),
                (new.numerator, new.denominator)
            );
            ensure!(
                new.value >= old.value,
                "seed {seed}: {} -> {}",
                old.value,
                new.value
            );
        }
    }
    Ok(true)
}
