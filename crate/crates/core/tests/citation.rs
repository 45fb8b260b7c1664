use std::collections::BTreeSet;
use std::sync::LazyLock;

use precedent_core::citation::{extract_citations, CitationExtractor, ReporterRegistry};
use precedent_core::fixtures::{self, PlantedCitation};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn named_examples() {
    let reg = ReporterRegistry::default();
    let lenz = extract_citations("Lenz v. Universal Music Corp., 801 F.3d 1126 (9th Cir. 2015)", &reg);
    assert_eq!(lenz.len(), 1);
    let c = &lenz[0];
    assert_eq!((c.volume, c.reporter.as_str(), c.page, c.year), (801, "F.3d", 1126, Some(2015)));
    assert_eq!(c.court_hint.as_deref(), Some("9th Cir."));
    assert_eq!(c.case_name_hint.as_deref(), Some("Lenz v. Universal Music Corp."));

    let warhol = extract_citations("Warhol v. Goldsmith, 598 U.S. 508 (2023)", &reg);
    assert_eq!(warhol.len(), 1);
    let c = &warhol[0];
    assert_eq!((c.volume, c.reporter.as_str(), c.page, c.year), (598, "U.S.", 508, Some(2023)));

    assert!(extract_citations("", &reg).is_empty());
}

fn found(ex: &CitationExtractor, text: &str) -> BTreeSet<PlantedCitation> {
    ex.extract(text)
        .into_iter()
        .map(|c| PlantedCitation { volume: c.volume, reporter: c.reporter, page: c.page, year: c.year })
        .collect()
}

#[test]
fn planted_fixture_full_precision_and_recall() {
    let ex = CitationExtractor::default();
    let texts = fixtures::planted_citations(11, 50);
    assert_eq!(texts.len(), 50);
    let (mut tp, mut fp, mut fneg) = (0, 0, 0);
    for t in &texts {
        let expected: BTreeSet<_> = t.expected.iter().cloned().collect();
        let got = found(&ex, &t.text);
        tp += got.intersection(&expected).count();
        fp += got.difference(&expected).count();
        fneg += expected.difference(&got).count();
        assert_eq!(got, expected, "{}", t.text);
    }
    assert!(tp > 50);
    assert_eq!((fp, fneg), (0, 0));
}

fn fuzz_text(rng: &mut ChaCha8Rng) -> String {
    const PIECES: &[&str] = &[
        "801", " ", "F.3d", "U.S.", "(", ")", "9th Cir.", "2015", ",", "\n", "\n\n", "v.", "Lenz", "S. Ct.",
        "é", "§", "–", "\u{a0}", "0", "99999999999", "F. Supp. 2d", "In re", ".", "Fed. App'x", "\t",
    ];
    let len = rng.random_range(0..40);
    (0..len)
        .map(|_| {
            if rng.random_bool(0.2) {
                char::from_u32(rng.random_range(0..0x3000)).unwrap_or('?').to_string()
            } else {
                PIECES[rng.random_range(0..PIECES.len())].to_owned()
            }
        })
        .collect()
}

#[test]
fn ten_thousand_fuzzed_inputs_do_not_panic() {
    let ex = CitationExtractor::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10_000 {
        let text = fuzz_text(&mut rng);
        let a = ex.extract_with_diagnostics(&text);
        assert_eq!(a, ex.extract_with_diagnostics(&text));
        let chars = text.chars().count();
        for c in &a.citations {
            assert!(c.span.start < c.span.end && c.span.end <= chars);
        }
    }
}

static EXTRACTOR: LazyLock<CitationExtractor> = LazyLock::new(CitationExtractor::default);
static PLANTED: LazyLock<Vec<fixtures::PlantedText>> = LazyLock::new(|| fixtures::planted_citations(3, 50));

proptest! {
    #[test]
    fn concatenation_locality(i in 0usize..50, j in 0usize..50) {
        let (a, b) = (&PLANTED[i].text, &PLANTED[j].text);
        let ex = &*EXTRACTOR;
        let joined = format!("{a}\n\n{b}");
        let offset = a.chars().count() + 2;
        let mut expected = ex.extract(a);
        expected.extend(ex.extract(b).into_iter().map(|mut c| {
            c.span = c.span.shifted(offset);
            c
        }));
        prop_assert_eq!(ex.extract(&joined), expected);
    }

    #[test]
    fn arbitrary_text_is_total(text in "\\PC{0,200}") {
        prop_assert_eq!(EXTRACTOR.extract(&text), EXTRACTOR.extract(&text));
    }
}
