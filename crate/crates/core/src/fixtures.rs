//! Synthetic corpora for tests, demos and benchmarks.
//!
//! Every generator is deterministic for a given seed. Generators count the
//! nodes and edges they emit, so [`Fixture::expected_stats`] is independent of
//! the graph store's own counting.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{
    self, CaseId, CaseNode, CitationEdge, CorpusStats, CourtId, CourtNode, Factor, FactorPassage,
    KnowledgeGraph, OpinionKind, OpinionNode, Record,
};

#[derive(Debug, Clone)]
pub struct Fixture {
    pub records: Vec<Record>,
    pub expected_stats: CorpusStats,
    /// Citation edges planted by the generator, sorted.
    pub citation_edges: Vec<CitationEdge>,
}

impl Fixture {
    /// Loads the records strictly. Panics if the generator produced an
    /// invalid corpus.
    pub fn graph(&self) -> KnowledgeGraph {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        graph::import(buf.as_slice()).expect("fixture corpus is valid")
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

struct CaseSpec<'a> {
    id: &'a str,
    name: &'a str,
    year: i32,
    court: &'a str,
    citation: String,
    cites: Vec<&'a str>,
    opinions: Vec<(OpinionKind, Vec<(Factor, String)>)>,
}

#[derive(Default)]
struct Generator {
    records: Vec<Record>,
    stats: CorpusStats,
    published: BTreeMap<String, (String, String, i32)>,
    edges: BTreeSet<CitationEdge>,
}

impl Generator {
    fn court(&mut self, id: &str, name: &str, parent: Option<&str>) {
        self.stats.court_count += 1;
        self.records.push(Record::Court(CourtNode {
            court_id: id.into(),
            name: name.into(),
            appeals_to: parent.map(CourtId::from),
        }));
    }

    /// Emits the case, its opinions and passages, and CITED edges. Opinion
    /// text is the passages followed by a citation sentence per cited case,
    /// so text-derived edges match the explicit ones.
    fn case(&mut self, spec: CaseSpec<'_>) {
        self.stats.case_count += 1;
        self.stats.year_min = Some(self.stats.year_min.map_or(spec.year, |y| y.min(spec.year)));
        self.stats.year_max = Some(self.stats.year_max.map_or(spec.year, |y| y.max(spec.year)));
        self.records.push(Record::Case(CaseNode {
            case_id: spec.id.into(),
            name: spec.name.into(),
            year: spec.year,
            court_id: spec.court.into(),
            citations: vec![spec.citation.clone()],
        }));
        let cite_sentences: Vec<String> = spec
            .cites
            .iter()
            .map(|target| {
                let (name, cite, year) = &self.published[*target];
                format!("See {name}, {cite} ({year}).")
            })
            .collect();
        for (i, (kind, passages)) in spec.opinions.into_iter().enumerate() {
            let opinion_id = format!("{}-op{}", spec.id, i + 1);
            let mut text: Vec<String> = passages.iter().map(|(_, t)| t.clone()).collect();
            if i == 0 {
                text.extend(cite_sentences.iter().cloned());
            }
            self.stats.opinion_count += 1;
            self.records.push(Record::Opinion(OpinionNode {
                opinion_id: opinion_id.as_str().into(),
                case_id: spec.id.into(),
                opinion_kind: kind,
                full_text: text.join("\n\n"),
            }));
            for (j, (factor, body)) in passages.into_iter().enumerate() {
                self.stats.passage_count += 1;
                self.records.push(Record::Passage(FactorPassage {
                    passage_id: format!("{opinion_id}-p{}", j + 1).into(),
                    opinion_id: opinion_id.as_str().into(),
                    factor,
                    text: body,
                }));
            }
        }
        for target in spec.cites {
            let edge = CitationEdge {
                from_case: spec.id.into(),
                to_case: target.into(),
            };
            if self.edges.insert(edge.clone()) {
                self.stats.citation_count += 1;
                self.records.push(Record::Citation(edge));
            }
        }
        self.published.insert(
            spec.id.to_owned(),
            (spec.name.to_owned(), spec.citation, spec.year),
        );
    }

    fn finish(self) -> Fixture {
        Fixture {
            records: self.records,
            expected_stats: self.stats,
            citation_edges: self.edges.into_iter().collect(),
        }
    }
}

fn federal_courts(g: &mut Generator) {
    g.court("scotus", "Supreme Court of the United States", None);
    g.court("ca2", "Court of Appeals for the Second Circuit", Some("scotus"));
    g.court("ca9", "Court of Appeals for the Ninth Circuit", Some("scotus"));
    g.court("sdny", "District Court for the Southern District of New York", Some("ca2"));
    g.court("cdcal", "District Court for the Central District of California", Some("ca9"));
    g.court("ndcal", "District Court for the Northern District of California", Some("ca9"));
}

fn reporter_for(court: &str) -> &'static str {
    match court {
        "scotus" => "U.S.",
        "ca2" | "ca9" => "F.3d",
        _ => "F. Supp. 2d",
    }
}

/// (id, name, year, court, cited ids, opinions with their passages)
type CaseRow<'a> = (&'a str, &'a str, i32, &'a str, Vec<&'a str>, Vec<(OpinionKind, Vec<(Factor, String)>)>);

/// Ten hand-written cases across a six-court federal hierarchy.
pub fn ten_case() -> Fixture {
    let mut g = Generator::default();
    federal_courts(&mut g);
    let p = |f: Factor, t: &str| (f, t.to_owned());
    let cases: Vec<CaseRow> = vec![
        ("sony", "Sony Corp. v. Universal City Studios", 1984, "scotus", vec![], vec![
            (OpinionKind::Majority, vec![
                p(Factor::Facts, "Consumers used home video recorders to record television broadcasts for later viewing."),
                p(Factor::Purpose, "Private time-shifting of free broadcast television is a noncommercial, nonprofit activity."),
                p(Factor::Market, "Plaintiffs failed to show that time-shifting would cause nonminimal harm to the potential market for the works."),
                p(Factor::Conclusion, "The sale of recording devices does not constitute contributory infringement."),
            ]),
            (OpinionKind::Dissent, vec![
                p(Factor::Conclusion, "Copying an entire work for the convenience of the viewer is not a productive use."),
            ]),
        ]),
        ("harper", "Harper & Row v. Nation Enterprises", 1985, "scotus", vec!["sony"], vec![
            (OpinionKind::Majority, vec![
                p(Factor::Facts, "A magazine published verbatim quotations from an unpublished presidential memoir before its release."),
                p(Factor::Nature, "The unpublished nature of a work is a key, though not necessarily determinative, factor."),
                p(Factor::Amount, "The magazine took the heart of the book, the most powerful passages about the pardon."),
                p(Factor::Market, "The publication caused the cancellation of a serialization contract, an actual effect on the market."),
            ]),
        ]),
        ("campbell", "Campbell v. Acuff-Rose Music, Inc.", 1994, "scotus", vec!["sony", "harper"], vec![
            (OpinionKind::Majority, vec![
                p(Factor::Facts, "A rap group recorded a parody of a rock ballad, copying its opening bass riff and first line."),
                p(Factor::Purpose, "Parody has an obvious claim to transformative value because it comments on the original work."),
                p(Factor::Amount, "A parody must be able to conjure up at least enough of the original to make the object of its critical wit recognizable."),
                p(Factor::Market, "A parody and the original usually serve different market functions, and critical harm is not cognizable market harm."),
            ]),
            (OpinionKind::Concurrence, vec![
                p(Factor::Purpose, "Parody that merely uses a famous song to get attention has a weaker claim to fair use."),
            ]),
        ]),
        ("texaco", "American Geophysical Union v. Texaco Inc.", 1994, "ca2", vec!["sony", "harper"], vec![
            (OpinionKind::Majority, vec![
                p(Factor::Facts, "Company scientists photocopied journal articles to keep in their personal research files."),
                p(Factor::Purpose, "Archival photocopying of entire articles served the same purpose as the originals and was not transformative."),
                p(Factor::Market, "A viable licensing market for photocopies existed through a clearance center."),
            ]),
        ]),
        ("kelly", "Kelly v. Arriba Soft Corp.", 2003, "ca9", vec!["campbell", "sony"], vec![
            (OpinionKind::Majority, vec![
                p(Factor::Facts, "A visual search engine displayed small thumbnail images of photographs found on websites."),
                p(Factor::Purpose, "Thumbnail images in a search engine serve an entirely different function than the original artistic photographs."),
                p(Factor::Market, "Thumbnails do not harm the market for the full-size photographs because they are low resolution."),
            ]),
            (OpinionKind::Appellate, vec![
                p(Factor::Conclusion, "The inline display of full-size images is withdrawn from consideration on rehearing."),
            ]),
        ]),
        ("bill-graham", "Bill Graham Archives v. Dorling Kindersley Ltd.", 2006, "ca2", vec!["campbell", "harper"], vec![
            (OpinionKind::Majority, vec![
                p(Factor::Facts, "A biography of a rock band reproduced concert posters in reduced size along a timeline."),
                p(Factor::Purpose, "The posters were used as historical artifacts, a purpose separate from their original artistic expression."),
                p(Factor::Amount, "The reduced size of the images was consistent with their documentary purpose."),
            ]),
        ]),
        ("perfect10", "Perfect 10, Inc. v. Amazon.com, Inc.", 2007, "ca9", vec!["kelly", "campbell"], vec![
            (OpinionKind::Majority, vec![
                p(Factor::Facts, "A search engine displayed thumbnail versions of copyrighted photographs of models."),
                p(Factor::Purpose, "The significantly transformative nature of a search engine outweighs superseding uses of thumbnails."),
                p(Factor::Market, "Any potential harm to the market for reduced-size images for phones was hypothetical."),
            ]),
        ]),
        ("lenz", "Lenz v. Universal Music Corp.", 2015, "ca9", vec!["campbell", "sony"], vec![
            (OpinionKind::Majority, vec![
                p(Factor::Facts, "A mother posted a short home video of her children dancing to a popular song and received a takedown notice."),
                p(Factor::Conclusion, "A copyright holder must consider fair use before sending a takedown notification."),
            ]),
            (OpinionKind::Dissent, vec![
                p(Factor::Conclusion, "The majority misreads the good faith belief requirement of the takedown statute."),
            ]),
        ]),
        ("authors-guild", "Authors Guild v. Google, Inc.", 2015, "ca2", vec!["campbell", "bill-graham", "texaco"], vec![
            (OpinionKind::Majority, vec![
                p(Factor::Facts, "A search company scanned millions of library books and made snippets available through search."),
                p(Factor::Purpose, "Making a digital copy to provide a search function is a transformative use that augments public knowledge."),
                p(Factor::Amount, "Copying entire books was reasonably necessary to enable full-text search."),
                p(Factor::Market, "Snippet view does not provide a meaningful substitute for the original books."),
            ]),
        ]),
        ("warhol", "Andy Warhol Foundation v. Goldsmith", 2023, "scotus", vec!["campbell", "harper", "authors-guild"], vec![
            (OpinionKind::Majority, vec![
                p(Factor::Facts, "A magazine licensed a silkscreen portrait derived from a photograph of a musician."),
                p(Factor::Purpose, "The licensing use shared substantially the same commercial purpose as the photograph."),
                p(Factor::Conclusion, "The first factor weighs against fair use for the commercial licensing of the silkscreen."),
            ]),
        ]),
    ];
    let mut next_page = 100;
    for (id, name, year, court, cites, opinions) in cases {
        next_page += 37;
        g.case(CaseSpec {
            id,
            name,
            year,
            court,
            citation: format!("{} {} {}", year - 1400 + (next_page % 7), reporter_for(court), next_page),
            cites,
            opinions,
        });
    }
    g.finish()
}

const CAPTION_WORDS: &[&str] = &[
    "Acme", "Beacon", "Cardinal", "Delta", "Empire", "Falcon", "Granite", "Harbor", "Ivory",
    "Juniper", "Keystone", "Lumen", "Meridian", "Northstar", "Orchard", "Pioneer", "Quarry",
    "Redwood", "Summit", "Tandem", "Union", "Vista", "Willow", "Zenith",
];

fn caption(i: usize) -> String {
    let a = CAPTION_WORDS[i % CAPTION_WORDS.len()];
    let b = CAPTION_WORDS[(i * 7 + 3) % CAPTION_WORDS.len()];
    format!("{a} Media {i} v. {b} Records")
}

const FILLER: &[&str] = &[
    "The court considered the record as a whole.",
    "The parties dispute the characterization of the work.",
    "The district court granted summary judgment.",
    "We review the decision de novo.",
    "The statute directs a case-by-case analysis.",
    "No single consideration is dispositive.",
];

fn filler(rng: &mut ChaCha8Rng, sentences: usize) -> String {
    (0..sentences)
        .map(|_| *FILLER.choose(rng).expect("non-empty"))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone)]
pub struct LandmarkFixture {
    pub fixture: Fixture,
    /// The two heavily cited cases.
    pub landmarks: [CaseId; 2],
}

/// 50 cases in which two early Supreme Court "landmarks" are cited by most
/// later cases, while other cases are cited rarely.
pub fn landmark(seed: u64) -> LandmarkFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Generator::default();
    federal_courts(&mut g);
    let lower = ["ca2", "ca9", "sdny", "cdcal", "ndcal"];
    let ids: Vec<String> = (0..50).map(|i| format!("case{i:02}")).collect();
    let names: Vec<String> = (0..50).map(caption).collect();
    for i in 0..50 {
        let (court, year) = if i < 2 {
            ("scotus", 1980 + i as i32)
        } else {
            (lower[rng.random_range(0..lower.len())], 1985 + (i as i32) * 3 / 4)
        };
        let mut cites: Vec<&str> = Vec::new();
        if i >= 2 {
            for landmark in &ids[..2] {
                if rng.random_bool(0.85) {
                    cites.push(landmark);
                }
            }
            for id in &ids[2..i] {
                if rng.random_bool(0.03) {
                    cites.push(id);
                }
            }
        }
        let text = filler(&mut rng, 3);
        g.case(CaseSpec {
            id: &ids[i],
            name: &names[i],
            year,
            court,
            citation: format!("{} {} {}", 100 + i, reporter_for(court), 1000 + 10 * i),
            cites,
            opinions: vec![(OpinionKind::Majority, vec![(Factor::Facts, text)])],
        });
    }
    LandmarkFixture {
        fixture: g.finish(),
        landmarks: [ids[0].as_str().into(), ids[1].as_str().into()],
    }
}

/// Topic vocabularies used by [`anti_correlated`]; each query draws on one.
pub const TOPICS: [[&str; 3]; 20] = [
    ["parody", "lyrics", "ballad"],
    ["thumbnail", "crawler", "indexing"],
    ["silkscreen", "portrait", "photograph"],
    ["software", "interface", "declarations"],
    ["broadcast", "newscast", "clip"],
    ["scanning", "library", "snippets"],
    ["sampling", "beat", "recording"],
    ["biography", "letters", "quotations"],
    ["emulator", "console", "cartridge"],
    ["coursepack", "photocopy", "textbook"],
    ["blueprint", "architectural", "drawing"],
    ["sculpture", "stamp", "memorial"],
    ["poster", "concert", "timeline"],
    ["documentary", "footage", "archive"],
    ["sequel", "novel", "characters"],
    ["timeshift", "recorder", "television"],
    ["tattoo", "design", "athlete"],
    ["lecture", "slides", "classroom"],
    ["mugshot", "aggregator", "website"],
    ["choreography", "dance", "performance"],
];

#[derive(Debug, Clone)]
pub struct AntiCorrelatedFixture {
    pub fixture: Fixture,
    /// One dispute description per topic.
    pub queries: Vec<String>,
    /// High-authority cases whose passages only mention topics sparsely.
    pub authorities: Vec<CaseId>,
}

/// 60 cases where textual overlap with a query and citation authority are
/// anti-correlated by construction.
///
/// Six appellate "authorities" are cited by nearly every other case but
/// discuss each topic only in passing, inside long generic passages. The
/// remaining 54 district cases are almost never cited and each repeats the
/// vocabulary of a single topic.
pub fn anti_correlated(seed: u64) -> AntiCorrelatedFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Generator::default();
    federal_courts(&mut g);
    let ids: Vec<String> = (0..60).map(|i| format!("case{i:02}")).collect();
    let names: Vec<String> = (0..60).map(|i| caption(i + 100)).collect();
    let authorities = 6;
    let districts = ["sdny", "cdcal", "ndcal"];

    for i in 0..60 {
        let (court, year) = if i < authorities {
            (if i < 2 { "scotus" } else if i % 2 == 0 { "ca2" } else { "ca9" }, 1978 + i as i32 * 2)
        } else {
            (districts[i % districts.len()], 1995 + (i as i32 - 6) / 2)
        };
        let mut passages = Vec::new();
        if i < authorities {
            // Each authority touches a handful of topics, one term each.
            let mut topics: Vec<usize> = (0..TOPICS.len()).collect();
            topics.shuffle(&mut rng);
            let touched: Vec<&str> = topics[..8].iter().map(|&t| TOPICS[t][t % 3]).collect();
            passages.push((
                Factor::Purpose,
                format!(
                    "{} The use of {} may be transformative. {}",
                    filler(&mut rng, 4),
                    touched.join(" and "),
                    filler(&mut rng, 4)
                ),
            ));
            passages.push((Factor::Market, filler(&mut rng, 5)));
        } else {
            let topic = &TOPICS[(i - authorities) % TOPICS.len()];
            passages.push((
                Factor::Facts,
                format!(
                    "The dispute concerns {} {} {}. The {} was copied.",
                    topic[0], topic[1], topic[2], topic[0]
                ),
            ));
            passages.push((
                Factor::Purpose,
                format!("The {} and the {} served the same purpose.", topic[1], topic[2]),
            ));
        }
        let mut cites: Vec<&str> = Vec::new();
        if i >= authorities {
            for a in &ids[..authorities] {
                if rng.random_bool(0.9) {
                    cites.push(a);
                }
            }
        } else {
            cites.extend(ids[..i].iter().map(String::as_str));
        }
        g.case(CaseSpec {
            id: &ids[i],
            name: &names[i],
            year,
            court,
            citation: format!("{} {} {}", 200 + i, reporter_for(court), 500 + 7 * i),
            cites,
            opinions: vec![(OpinionKind::Majority, passages)],
        });
    }

    let queries = TOPICS
        .iter()
        .map(|t| {
            format!(
                "A creator received a takedown notice over a video using {} {} and {} from another work.",
                t[0], t[1], t[2]
            )
        })
        .collect();
    AntiCorrelatedFixture {
        fixture: g.finish(),
        queries,
        authorities: ids[..authorities].iter().map(|s| s.as_str().into()).collect(),
    }
}

/// `n` cases with random citation edges from later to earlier cases (a DAG),
/// each present with probability `p`.
pub fn random_dag(seed: u64, n: usize, p: f64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Generator::default();
    g.court("court", "Court", None);
    let ids: Vec<String> = (0..n).map(|i| format!("n{i:03}")).collect();
    for i in 0..n {
        let cites: Vec<&str> = (0..i)
            .filter(|_| rng.random_bool(p))
            .map(|j| ids[j].as_str())
            .collect();
        g.case(CaseSpec {
            id: &ids[i],
            name: &caption(i),
            year: 1990 + (i % 30) as i32,
            court: "court",
            citation: format!("{} F.3d {}", 1 + i, 1 + i),
            cites,
            opinions: vec![(OpinionKind::Majority, vec![(Factor::Facts, format!("Facts of case {i}."))])],
        });
    }
    g.finish()
}

/// Random edge list over `n` nodes for PageRank testing: simple, possibly
/// with dangling and isolated nodes.
pub fn random_edges(rng: &mut impl Rng, n: usize, density: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(density) {
                edges.push((a, b));
            }
        }
    }
    edges
}


/// A citation planted by [`planted_citations`], with canonical fields.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PlantedCitation {
    pub volume: u32,
    pub reporter: String,
    pub page: u32,
    pub year: Option<i32>,
}

#[derive(Debug, Clone)]
pub struct PlantedText {
    pub text: String,
    pub expected: Vec<PlantedCitation>,
}

/// Sentences that contain numbers and abbreviations but no citation.
const DISTRACTORS: &[&str] = &[
    "Section 107 of 17 U.S.C. lists four factors.",
    "The excerpt appears at pp. 12-15 of the record.",
    "Docket No. 13-16106 was filed in 2014.",
    "The band sold 500 copies in 1999.",
    "See id. at 1130.",
    "The video ran for 29 seconds on Jan. 3, 2007.",
    "Plaintiff sought $150,000 in statutory damages.",
    "The photograph was taken in 1981 by a staff photographer.",
];

const PAREN_COURTS: &[&str] = &["", "9th Cir. ", "2d Cir. ", "S.D.N.Y. ", "C.D. Cal. ", "Fed. Cir. "];

/// `count` short texts, each planting zero to three citations among
/// distractor sentences. Reporter spellings are drawn from the default
/// registry's canonical forms and variants.
pub fn planted_citations(seed: u64, count: usize) -> Vec<PlantedText> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let registry = crate::citation::ReporterRegistry::default();
    let forms: Vec<(String, String)> = registry
        .entries()
        .iter()
        .flat_map(|e| {
            std::iter::once(e.canonical.clone())
                .chain(e.variants.iter().cloned())
                .map(|f| (f, e.canonical.clone()))
                .collect::<Vec<_>>()
        })
        .collect();
    (0..count)
        .map(|i| {
            let mut sentences: Vec<String> = Vec::new();
            let mut expected = Vec::new();
            for _ in 0..rng.random_range(1..=2) {
                sentences.push((*DISTRACTORS.choose(&mut rng).expect("non-empty")).to_owned());
            }
            let planted = if i % 10 == 9 { 0 } else { rng.random_range(1..=3) };
            for j in 0..planted {
                let (form, canonical) = forms.choose(&mut rng).expect("non-empty").clone();
                let volume = rng.random_range(1..=999u32);
                let page = rng.random_range(1..=2000u32);
                let year = rng.random_range(1976..=2024);
                let pin = match rng.random_range(0..3) {
                    0 => String::new(),
                    1 => format!(", {}", page + rng.random_range(1..20)),
                    _ => format!(", {}-{}", page + 1, page + 3),
                };
                let with_paren = rng.random_bool(0.8);
                let paren = if with_paren {
                    format!(" ({}{year})", PAREN_COURTS.choose(&mut rng).expect("non-empty"))
                } else {
                    String::new()
                };
                sentences.push(format!(
                    "See {}, {volume} {form} {page}{pin}{paren}.",
                    caption(i * 3 + j)
                ));
                sentences.push((*DISTRACTORS.choose(&mut rng).expect("non-empty")).to_owned());
                expected.push(PlantedCitation {
                    volume,
                    reporter: canonical,
                    page,
                    year: with_paren.then_some(year),
                });
            }
            PlantedText {
                text: sentences.join(" "),
                expected,
            }
        })
        .collect()
}
