//! Hierarchical navigable small-world graph over unit vectors.
//!
//! Distance is `1 - <a, b>`. Node levels are drawn from a seeded generator and
//! nodes are inserted in slot order, so construction is fully deterministic.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::HnswParams;
use crate::embedder::dot;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist: f64,
    node: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.node.cmp(&other.node))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct HnswGraph {
    /// `links[node][layer]` for layers `0..=level(node)`.
    pub(crate) links: Vec<Vec<Vec<u32>>>,
    pub(crate) entry: u32,
}

/// Read access to the stored vectors, `dim` components per slot.
pub(crate) struct Vectors<'a> {
    pub data: &'a [f64],
    pub dim: usize,
}

impl Vectors<'_> {
    fn get(&self, node: u32) -> &[f64] {
        let start = node as usize * self.dim;
        &self.data[start..start + self.dim]
    }

    fn dist(&self, q: &[f64], node: u32) -> f64 {
        1.0 - dot(q, self.get(node))
    }

    fn len(&self) -> usize {
        self.data.len() / self.dim.max(1)
    }
}

impl HnswGraph {
    pub(crate) fn top_level(&self) -> usize {
        self.links[self.entry as usize].len() - 1
    }

    pub(crate) fn build(vectors: &Vectors<'_>, params: &HnswParams) -> HnswGraph {
        let count = vectors.len();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let level_mult = 1.0 / (params.m.max(2) as f64).ln();
        let mut graph = HnswGraph {
            links: Vec::with_capacity(count),
            entry: 0,
        };
        let mut visited = Visited::new(count);
        for node in 0..count as u32 {
            let u: f64 = rng.random::<f64>();
            let level = ((-(1.0 - u).ln()) * level_mult).floor() as usize;
            graph.insert(vectors, params, node, level.min(32), &mut visited);
        }
        graph
    }

    fn max_links(params: &HnswParams, layer: usize) -> usize {
        if layer == 0 {
            2 * params.m
        } else {
            params.m
        }
    }

    fn insert(
        &mut self,
        vectors: &Vectors<'_>,
        params: &HnswParams,
        node: u32,
        level: usize,
        visited: &mut Visited,
    ) {
        self.links.push(vec![Vec::new(); level + 1]);
        if node == 0 {
            self.entry = 0;
            return;
        }
        let q = vectors.get(node);
        let top = self.top_level();
        let mut ep = Candidate {
            dist: vectors.dist(q, self.entry),
            node: self.entry,
        };
        for layer in (level + 1..=top).rev() {
            ep = self.greedy(vectors, q, ep, layer);
        }
        let mut entry_points = vec![ep];
        for layer in (0..=level.min(top)).rev() {
            let found = self.search_layer(
                vectors,
                q,
                &entry_points,
                params.ef_construction,
                layer,
                visited,
            );
            let chosen = select_neighbors(vectors, &found, params.m);
            self.links[node as usize][layer] = chosen.iter().map(|c| c.node).collect();
            let cap = Self::max_links(params, layer);
            for c in &chosen {
                let nb = c.node as usize;
                self.links[nb][layer].push(node);
                if self.links[nb][layer].len() > cap {
                    let base = vectors.get(c.node);
                    let mut cands: Vec<Candidate> = self.links[nb][layer]
                        .iter()
                        .map(|&o| Candidate {
                            dist: vectors.dist(base, o),
                            node: o,
                        })
                        .collect();
                    cands.sort();
                    self.links[nb][layer] = select_neighbors(vectors, &cands, cap)
                        .into_iter()
                        .map(|c| c.node)
                        .collect();
                }
            }
            entry_points = found;
        }
        if level > top {
            self.entry = node;
        }
    }

    fn greedy(&self, vectors: &Vectors<'_>, q: &[f64], mut ep: Candidate, layer: usize) -> Candidate {
        loop {
            let mut improved = false;
            for &nb in &self.links[ep.node as usize][layer] {
                let c = Candidate {
                    dist: vectors.dist(q, nb),
                    node: nb,
                };
                if c < ep {
                    ep = c;
                    improved = true;
                }
            }
            if !improved {
                return ep;
            }
        }
    }

    /// Beam search on one layer; returns up to `ef` nodes sorted by distance.
    fn search_layer(
        &self,
        vectors: &Vectors<'_>,
        q: &[f64],
        entry_points: &[Candidate],
        ef: usize,
        layer: usize,
        visited: &mut Visited,
    ) -> Vec<Candidate> {
        visited.reset();
        let mut frontier: BinaryHeap<Reverse<Candidate>> = BinaryHeap::new();
        let mut best: BinaryHeap<Candidate> = BinaryHeap::new();
        for &ep in entry_points {
            if visited.insert(ep.node) {
                frontier.push(Reverse(ep));
                best.push(ep);
            }
        }
        while best.len() > ef {
            best.pop();
        }
        while let Some(Reverse(current)) = frontier.pop() {
            if let Some(worst) = best.peek() {
                if best.len() >= ef && current > *worst {
                    break;
                }
            }
            for &nb in &self.links[current.node as usize][layer] {
                if !visited.insert(nb) {
                    continue;
                }
                let c = Candidate {
                    dist: vectors.dist(q, nb),
                    node: nb,
                };
                if best.len() < ef || c < *best.peek().unwrap() {
                    frontier.push(Reverse(c));
                    best.push(c);
                    if best.len() > ef {
                        best.pop();
                    }
                }
            }
        }
        best.into_sorted_vec()
    }

    /// Approximate nearest neighbours of a unit query, up to `ef` of them.
    pub(crate) fn search(&self, vectors: &Vectors<'_>, q: &[f64], ef: usize) -> Vec<u32> {
        if self.links.is_empty() {
            return Vec::new();
        }
        let mut ep = Candidate {
            dist: vectors.dist(q, self.entry),
            node: self.entry,
        };
        for layer in (1..=self.top_level()).rev() {
            ep = self.greedy(vectors, q, ep, layer);
        }
        let mut visited = Visited::new(self.links.len());
        self.search_layer(vectors, q, &[ep], ef, 0, &mut visited)
            .into_iter()
            .map(|c| c.node)
            .collect()
    }
}

/// Keeps a candidate only if it is closer to the base than to every neighbour
/// already kept, then tops up with the closest discarded candidates.
/// `sorted` must be ordered by distance to the base.
fn select_neighbors(vectors: &Vectors<'_>, sorted: &[Candidate], m: usize) -> Vec<Candidate> {
    let mut kept: Vec<Candidate> = Vec::with_capacity(m);
    let mut discarded = Vec::new();
    for &c in sorted {
        if kept.len() >= m {
            break;
        }
        let v = vectors.get(c.node);
        if kept.iter().all(|k| vectors.dist(v, k.node) > c.dist) {
            kept.push(c);
        } else {
            discarded.push(c);
        }
    }
    for c in discarded {
        if kept.len() >= m {
            break;
        }
        kept.push(c);
    }
    kept
}

struct Visited {
    marks: Vec<u32>,
    epoch: u32,
}

impl Visited {
    fn new(n: usize) -> Self {
        Visited {
            marks: vec![0; n],
            epoch: 0,
        }
    }

    fn reset(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.marks.iter_mut().for_each(|m| *m = 0);
            self.epoch = 1;
        }
    }

    fn insert(&mut self, node: u32) -> bool {
        let slot = &mut self.marks[node as usize];
        if *slot == self.epoch {
            false
        } else {
            *slot = self.epoch;
            true
        }
    }
}
