use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::RankError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DanglingPolicy {
    /// Mass of nodes without out-links is spread evenly over all nodes.
    #[default]
    UniformRedistribute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankConfig {
    pub damping: f64,
    /// Convergence threshold on the L∞ distance between successive iterates.
    pub tolerance: f64,
    pub max_iterations: usize,
    #[serde(default)]
    pub dangling_policy: DanglingPolicy,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tolerance: 1e-9,
            max_iterations: 200,
            dangling_policy: DanglingPolicy::UniformRedistribute,
        }
    }
}

impl PageRankConfig {
    pub fn validate(&self) -> Result<(), RankError> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(RankError::InvalidConfig(format!(
                "damping must lie in (0, 1), got {}",
                self.damping
            )));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(RankError::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(RankError::InvalidConfig("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Outcome of a PageRank run. Scores are indexed like the input nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRank {
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// L∞ distance between the last two iterates.
    pub delta: f64,
}

/// Power iteration state. Each call to [`PowerIteration::step`] produces
/// the next iterate; exposed so callers can inspect every iterate.
#[derive(Debug, Clone)]
pub struct PowerIteration {
    out_links: Vec<Vec<usize>>,
    dangling: Vec<usize>,
    damping: f64,
    current: Vec<f64>,
    next: Vec<f64>,
    iterations: usize,
}

impl PowerIteration {
    /// Duplicate edges are collapsed; self-loops are kept as ordinary links.
    pub fn new(node_count: usize, edges: &[(usize, usize)], damping: f64) -> Result<Self, RankError> {
        if node_count == 0 {
            return Err(RankError::EmptyGraph);
        }
        let mut out: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); node_count];
        for &(from, to) in edges {
            if from >= node_count || to >= node_count {
                return Err(RankError::UnknownNode(from.max(to)));
            }
            out[from].insert(to);
        }
        let out_links: Vec<Vec<usize>> = out.into_iter().map(|s| s.into_iter().collect()).collect();
        let dangling = (0..node_count).filter(|&i| out_links[i].is_empty()).collect();
        let uniform = 1.0 / node_count as f64;
        Ok(Self {
            out_links,
            dangling,
            damping,
            current: vec![uniform; node_count],
            next: vec![0.0; node_count],
            iterations: 0,
        })
    }

    pub fn scores(&self) -> &[f64] {
        &self.current
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Advances one iteration and returns the L∞ change.
    pub fn step(&mut self) -> f64 {
        let n = self.current.len() as f64;
        let d = self.damping;
        let dangling_mass: f64 = self.dangling.iter().map(|&i| self.current[i]).sum();
        let base = (1.0 - d) / n + d * dangling_mass / n;
        self.next.fill(base);
        for (from, targets) in self.out_links.iter().enumerate() {
            if targets.is_empty() {
                continue;
            }
            let share = d * self.current[from] / targets.len() as f64;
            for &to in targets {
                self.next[to] += share;
            }
        }
        let delta = self
            .current
            .iter()
            .zip(&self.next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut self.current, &mut self.next);
        self.iterations += 1;
        delta
    }
}

/// Damped PageRank with uniform teleportation over `node_count` nodes.
///
/// Returns [`RankError::DidNotConverge`] carrying the last iterate when the
/// tolerance is not reached within `max_iterations`.
pub fn pagerank(
    node_count: usize,
    edges: &[(usize, usize)],
    config: &PageRankConfig,
) -> Result<PageRank, RankError> {
    config.validate()?;
    let mut power = PowerIteration::new(node_count, edges, config.damping)?;
    let mut delta = f64::INFINITY;
    while power.iterations() < config.max_iterations {
        delta = power.step();
        if delta <= config.tolerance {
            return Ok(PageRank {
                scores: power.current,
                iterations: power.iterations,
                converged: true,
                delta,
            });
        }
    }
    Err(RankError::DidNotConverge(Box::new(PageRank {
        scores: power.current,
        iterations: power.iterations,
        converged: false,
        delta,
    })))
}
