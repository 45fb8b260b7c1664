mod common;

use std::collections::BTreeMap;

use common::oracle::fuse_and_sort;
use precedent_core::fixtures;
use precedent_core::graph::{CaseNode, CourtNode, GraphBuilder, KnowledgeGraph, OpinionKind, OpinionNode};
use precedent_core::index::{chunk_graph, ChunkId, Embedder, ReferenceEmbedder, VectorIndex};
use precedent_core::ranking::{AuthorityScores, PageRankConfig};
use precedent_core::rerank::{
    aggregate_text_sim, expand_citations, fuse, select_top_k, CandidateScore, ChunkHit, Weights,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn candidate(id: &str, t: f64, c: f64, k: f64) -> CandidateScore {
    CandidateScore {
        case_id: id.into(),
        opinion_id: id.into(),
        text_sim: t,
        citation: c,
        court: k,
        fused: 0.0,
        best_chunk: ChunkId(format!("{id}#0000")),
        cosine: t,
    }
}

fn random_weights(rng: &mut ChaCha8Rng) -> Weights {
    match rng.random_range(0..4) {
        0 => Weights::STANDARD,
        1 => Weights::STRUCTURED,
        _ => {
            let a: f64 = rng.random();
            let b: f64 = rng.random_range(0.0..=1.0 - a);
            Weights { w_text: a, w_cit: b, w_court: 1.0 - a - b }
        }
    }
}

fn component(rng: &mut ChaCha8Rng) -> f64 {
    // Coarse values make fused ties and citation ties common.
    if rng.random_bool(0.5) {
        f64::from(rng.random_range(0..=4)) / 4.0
    } else {
        rng.random()
    }
}

#[test]
fn thousand_random_instances_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let w = random_weights(&mut rng);
        let n = rng.random_range(1..=40);
        let rows: Vec<(String, f64, f64, f64)> = (0..n)
            .map(|i| (format!("case{i:03}"), component(&mut rng), component(&mut rng), component(&mut rng)))
            .collect();
        let cands = rows.iter().map(|(id, t, c, k)| candidate(id, *t, *c, *k)).collect();
        let got: Vec<(String, f64)> =
            fuse(cands, &w).unwrap().into_iter().map(|c| (c.case_id.0, c.fused)).collect();
        let want = fuse_and_sort(&rows, (w.w_text, w.w_cit, w.w_court));
        assert_eq!(got.len(), want.len());
        for (g, o) in got.iter().zip(&want) {
            assert_eq!(g.0, o.0);
            assert_eq!(g.1.to_bits(), o.1.to_bits());
        }
    }
}

#[test]
fn top_k_is_prefix_and_order_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cands: Vec<CandidateScore> =
        (0..30).map(|i| candidate(&format!("c{i:02}"), component(&mut rng), component(&mut rng), 0.5)).collect();
    let fused = fuse(cands, &Weights::STRUCTURED).unwrap();
    let mut shuffled = fused.clone();
    shuffled.reverse();
    for k in [1, 5, 30, 100] {
        let top = select_top_k(&shuffled, k);
        assert_eq!(top, fused[..k.min(fused.len())].to_vec());
    }
}

#[test]
fn aggregation_matches_group_by_max_on_fifty_cases() {
    let g = fixtures::landmark(3).fixture.graph();
    let e = ReferenceEmbedder::default();
    let index = VectorIndex::build(&e, chunk_graph(&g, 32).0, 2).unwrap();
    let q = e.embed("the court considered the record and the market for the work").unwrap();
    let hits: Vec<ChunkHit> = index
        .search(&q, index.len(), None)
        .unwrap()
        .iter()
        .map(|h| {
            let op = g.opinion(g.passage(h.chunk.passage_id.as_str()).unwrap().opinion_id.as_str()).unwrap();
            ChunkHit { chunk_id: h.chunk.chunk_id.clone(), case_id: op.case_id.clone(), opinion_id: op.opinion_id.clone(), cosine: h.similarity }
        })
        .collect();
    let mut oracle: BTreeMap<String, (f64, String)> = BTreeMap::new();
    for h in &hits {
        let e = oracle.entry(h.case_id.0.clone()).or_insert((f64::NEG_INFINITY, String::new()));
        if h.cosine > e.0 || (h.cosine == e.0 && h.chunk_id.0 < e.1) {
            *e = (h.cosine, h.chunk_id.0.clone());
        }
    }
    let agg = aggregate_text_sim(&hits);
    assert_eq!(agg.len(), 50);
    for (case, m) in &agg {
        let (cos, chunk) = &oracle[case.as_str()];
        assert_eq!(m.cosine, *cos);
        assert_eq!(&m.chunk_id.0, chunk);
    }
}

fn star_graph() -> KnowledgeGraph {
    let mut g = GraphBuilder::new();
    g.add_court(CourtNode { court_id: "top".into(), name: "Top".into(), appeals_to: None }).unwrap();
    g.add_court(CourtNode { court_id: "low".into(), name: "Low".into(), appeals_to: Some("top".into()) }).unwrap();
    for (id, court) in [("s", "low"), ("l", "low"), ("x", "top"), ("y", "low"), ("b", "low"), ("c", "low"), ("d", "low")] {
        g.add_case(CaseNode { case_id: id.into(), name: id.to_uppercase(), year: 2000, court_id: court.into(), citations: vec![] })
            .unwrap();
        g.add_opinion(OpinionNode { opinion_id: format!("{id}-o").into(), case_id: id.into(), opinion_kind: OpinionKind::Majority, full_text: String::new() })
            .unwrap();
    }
    for (a, b) in [("s", "l"), ("s", "x"), ("s", "y"), ("b", "l"), ("c", "l"), ("d", "l")] {
        g.add_citation(&a.into(), &b.into()).unwrap();
    }
    g.freeze().unwrap()
}

#[test]
fn expansion_prefers_most_cited() {
    let g = star_graph();
    let auth = AuthorityScores::compute(&g, &PageRankConfig::default()).unwrap();
    let top_case = auth.citation_rank.iter().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert_eq!(top_case.as_str(), "l");
    let top_k = vec![candidate("s", 1.0, 0.0, 0.0)];
    let w = Weights::new(0.0, 1.0, 0.0).unwrap();
    let exp = expand_citations(&top_k, &g, &auth, &w, 3);
    assert_eq!(exp.len(), 3);
    assert_eq!(exp[0].cited.as_str(), "l");
    assert!(exp.iter().all(|e| e.source.as_str() == "s"));
    assert_eq!(exp.iter().map(|e| e.rank).collect::<Vec<_>>(), [1, 2, 3]);

    // Court-only weighting lifts the case decided by the higher court.
    let w = Weights::new(0.0, 0.0, 1.0).unwrap();
    assert_eq!(expand_citations(&top_k, &g, &auth, &w, 1)[0].cited.as_str(), "x");

    assert!(expand_citations(&top_k, &g, &auth, &Weights::STANDARD, 0).is_empty());
}

#[test]
fn expansion_excludes_top_k_members_and_truncates() {
    let g = star_graph();
    let auth = AuthorityScores::compute(&g, &PageRankConfig::default()).unwrap();
    let top_k = vec![candidate("s", 1.0, 0.0, 0.0), candidate("l", 0.9, 0.0, 0.0)];
    let exp = expand_citations(&top_k, &g, &auth, &Weights::STRUCTURED, 10);
    let cited: Vec<&str> = exp.iter().map(|e| e.cited.as_str()).collect();
    assert!(!cited.contains(&"l"));
    assert_eq!(cited.len(), 2);

    let single = vec![candidate("b", 1.0, 0.0, 0.0)];
    let exp = expand_citations(&single, &g, &auth, &Weights::STANDARD, 3);
    assert_eq!(exp.iter().map(|e| e.cited.as_str()).collect::<Vec<_>>(), ["l"]);
}

#[test]
fn degenerate_weights_follow_cosine_on_fixture() {
    let g = fixtures::ten_case().graph();
    let e = ReferenceEmbedder::default();
    let idx = VectorIndex::build(&e, chunk_graph(&g, 256).0, 2).unwrap();
    let auth = AuthorityScores::compute(&g, &PageRankConfig::default()).unwrap();
    let q = e.embed("search engine thumbnails of photographs").unwrap();
    let hits: Vec<ChunkHit> = idx
        .search(&q, 200, None)
        .unwrap()
        .iter()
        .map(|h| {
            let op = g.opinion(g.passage(h.chunk.passage_id.as_str()).unwrap().opinion_id.as_str()).unwrap();
            ChunkHit { chunk_id: h.chunk.chunk_id.clone(), case_id: op.case_id.clone(), opinion_id: op.opinion_id.clone(), cosine: h.similarity }
        })
        .collect();
    let agg = aggregate_text_sim(&hits);
    let fused = fuse(precedent_core::rerank::candidates(&agg, &g, &auth), &Weights::STANDARD).unwrap();
    let mut by_cos: Vec<(&str, f64, f64)> =
        fused.iter().map(|c| (c.case_id.as_str(), c.cosine, c.citation)).collect();
    by_cos.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.2.total_cmp(&a.2)).then(a.0.cmp(b.0)));
    let ids: Vec<&str> = fused.iter().map(|c| c.case_id.as_str()).collect();
    assert_eq!(ids, by_cos.iter().map(|x| x.0).collect::<Vec<_>>());
}
