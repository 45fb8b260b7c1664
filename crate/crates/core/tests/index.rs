mod common;

use common::oracle::brute_force_top_m;
use precedent_core::fixtures;
use precedent_core::graph::Factor;
use precedent_core::index::{
    chunk_graph, cosine, Chunk, ChunkId, Embedder, EmbeddingVector, IndexError, ReferenceEmbedder, VectorIndex,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reads the vector straight out of the text: comma-separated numbers.
struct LiteralEmbedder(usize);

impl Embedder for LiteralEmbedder {
    fn dimension(&self) -> usize {
        self.0
    }
    fn tag(&self) -> String {
        "literal".into()
    }
    fn embed(&self, text: &str) -> Result<EmbeddingVector, IndexError> {
        let values: Vec<f64> = text.split(',').map(|x| x.parse().map_err(|_| IndexError::Embedder(x.into()))).collect::<Result<_, _>>()?;
        Ok(EmbeddingVector::new(values))
    }
}

fn literal(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        // Small integer grid so exact ties occur regularly.
        let v: Vec<f64> = (0..dim).map(|_| f64::from(rng.random_range(-3i32..=3))).collect();
        if v.iter().any(|x| *x != 0.0) {
            return v;
        }
    }
}

fn chunk(id: String, text: String) -> Chunk {
    Chunk { chunk_id: ChunkId(id), passage_id: "p".into(), factor: Factor::Facts, token_estimate: 1, text }
}

#[test]
fn exact_search_matches_full_scan_on_random_indices() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for round in 0..100 {
        let dim = rng.random_range(2..=16);
        let count = rng.random_range(1..=500);
        let rows: Vec<(String, Vec<f64>)> =
            (0..count).map(|i| (format!("c{i:04}"), random_vector(&mut rng, dim))).collect();
        let e = LiteralEmbedder(dim);
        let chunks = rows.iter().map(|(id, v)| chunk(id.clone(), literal(v))).collect();
        let index = VectorIndex::build(&e, chunks, 4).unwrap();
        let q = random_vector(&mut rng, dim);
        let m = rng.random_range(1..=count + 5);
        let got: Vec<(String, f64)> = index
            .search(&EmbeddingVector::new(q.clone()), m, None)
            .unwrap()
            .iter()
            .map(|h| (h.chunk.chunk_id.0.clone(), h.similarity))
            .collect();
        let want = brute_force_top_m(&rows, &q, m);
        assert_eq!(got.len(), want.len(), "round {round}");
        for (g, w) in got.iter().zip(&want) {
            assert_eq!(g.0, w.0, "round {round}");
            assert!((g.1 - w.1).abs() < 1e-12);
        }
    }
}

#[test]
fn reference_embedder_on_fixture() {
    let g = fixtures::ten_case().graph();
    let (chunks, diags) = chunk_graph(&g, 256);
    assert!(diags.is_empty());
    assert!(chunks.len() >= g.passages().count());
    let e = ReferenceEmbedder::default();
    let index = VectorIndex::build(&e, chunks, 3).unwrap();
    let serial = VectorIndex::build(&e, chunk_graph(&g, 256).0, 1).unwrap();
    assert_eq!(index, serial);
    let q = e.embed("parody commercial purpose").unwrap();
    let hits = index.search(&q, 5, None).unwrap();
    for pair in hits.windows(2) {
        assert!(pair[0].similarity >= pair[1].similarity);
    }
    let top = &hits[0];
    assert_eq!(cosine(&q, index.vector(&top.chunk.chunk_id).unwrap()).unwrap(), top.similarity);
}

proptest! {
    #[test]
    fn reference_cosine_bounds(a in "[a-z ]{0,60}", b in "[a-z ]{0,60}") {
        let e = ReferenceEmbedder::new(128);
        let (va, vb) = (e.embed(&a).unwrap(), e.embed(&b).unwrap());
        let c = cosine(&va, &vb).unwrap();
        prop_assert!((-1.0..=1.0).contains(&c));
        prop_assert!((cosine(&va, &va).unwrap() - 1.0).abs() < 1e-12);
        prop_assert_eq!(c, cosine(&vb, &va).unwrap());
    }
}
