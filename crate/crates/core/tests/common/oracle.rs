//! Independent reference computations used by tests.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

/// Stationary PageRank vector by direct solve of
/// `(I - d·P) x = (1 - d)/n · 1`, where column `j` of `P` spreads node `j`'s
/// mass over its out-links, or uniformly over all nodes when `j` has none.
pub fn pagerank_linear_solve(n: usize, edges: &[(usize, usize)], damping: f64) -> Vec<f64> {
    let mut out: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        out[a].insert(b);
    }
    let mut p = DMatrix::<f64>::zeros(n, n);
    for (j, targets) in out.iter().enumerate() {
        if targets.is_empty() {
            for i in 0..n {
                p[(i, j)] = 1.0 / n as f64;
            }
        } else {
            for &i in targets {
                p[(i, j)] += 1.0 / targets.len() as f64;
            }
        }
    }
    let a = DMatrix::<f64>::identity(n, n) - p * damping;
    let b = DVector::<f64>::from_element(n, (1.0 - damping) / n as f64);
    let x = a.lu().solve(&b).expect("I - dP is nonsingular for d < 1");
    x.iter().copied().collect()
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Weighted sum for every `(id, text, citation, court)` row, ordered by a
/// plain insertion sort: higher fused first, then higher citation, then
/// smaller id.
pub fn fuse_and_sort(rows: &[(String, f64, f64, f64)], w: (f64, f64, f64)) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64, f64)> = Vec::new();
    for (id, t, c, k) in rows {
        let fused = w.0 * t + w.1 * c + w.2 * k;
        let before = |o: &(String, f64, f64)| {
            fused > o.1 || (fused == o.1 && (*c > o.2 || (*c == o.2 && id < &o.0)))
        };
        let pos = out.iter().position(before).unwrap_or(out.len());
        out.insert(pos, (id.clone(), fused, *c));
    }
    out.into_iter().map(|(id, f, _)| (id, f)).collect()
}

/// Top `m` ids by cosine with `query` using a full scan; equal scores go to
/// the smaller id.
pub fn brute_force_top_m(rows: &[(String, Vec<f64>)], query: &[f64], m: usize) -> Vec<(String, f64)> {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let qn = norm(query);
    let mut scored: Vec<(String, f64)> = rows
        .iter()
        .map(|(id, v)| {
            let dot: f64 = v.iter().zip(query).map(|(a, b)| a * b).sum();
            (id.clone(), (dot / (norm(v) * qn)).clamp(-1.0, 1.0))
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(m);
    scored
}
