//! Co-part object discovery: iteratively clusters parts that recur across a
//! batch with similar shapes and similar spatial relations into objects.
//!
//! `discover_objects` is the pairwise iterative algorithm; processing one part
//! at a time, it scans for similar parts anywhere in the batch, compares the
//! adjacency edges incident to both, and registers the local pair whenever the
//! edge directions and the incident neighbors also agree. `brute_force_discover`
//! is the exhaustive construction over every ordered part pair, kept as an
//! independent route for cross-checking partitions on small graphs.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{edge_similarity_gated, PartGraph};

/// Exhaustive search is test-scale only.
pub const BRUTE_FORCE_PART_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryConfig {
    pub epsilon: f64,
    pub rng_seed: u64,
    /// Process parts in ascending id order instead of sampling uniformly.
    pub deterministic_order: bool,
    /// Gate edge similarity on offset magnitude ratio (>= 1 - magnitude_delta).
    pub magnitude_gate: bool,
    pub magnitude_delta: f64,
    /// Abort once this many neighbor edge-pair comparisons have been spent.
    pub comparison_budget: Option<u64>,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            epsilon: 0.99,
            rng_seed: 0,
            deterministic_order: true,
            magnitude_gate: false,
            magnitude_delta: 0.5,
            comparison_budget: None,
        }
    }
}

/// Counters for the tractability bound: `pairwise_comparisons` counts the
/// neighbor edge-pair checks (the M^2 d^2 term), `similarity_checks` the
/// part-feature comparisons (the M^2 term).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiscoveryStats {
    pub pairwise_comparisons: u64,
    pub similarity_checks: u64,
    pub merges: u64,
    pub wall_time: Duration,
}

/// A discovered object: member part ids plus the adjacency edges collected
/// among them. Members always form a connected subgraph under the edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectCluster {
    pub cluster_id: usize,
    pub member_parts: BTreeSet<usize>,
    pub internal_edges: BTreeSet<(usize, usize)>,
}

impl ObjectCluster {
    pub fn is_connected(&self) -> bool {
        let members: Vec<usize> = self.member_parts.iter().copied().collect();
        if members.is_empty() {
            return false;
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![members[0]];
        seen.insert(members[0]);
        while let Some(u) = stack.pop() {
            for &(a, b) in &self.internal_edges {
                let other = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if self.member_parts.contains(&other) && seen.insert(other) {
                    stack.push(other);
                }
            }
        }
        seen.len() == members.len()
    }
}

/// Pairwise part similarities computed once per run so that both discovery
/// routes threshold identical values. Descriptors are normalized up front,
/// turning each pairwise similarity into a plain dot product.
struct SimilarityTable {
    m: usize,
    values: Vec<f64>,
}

impl SimilarityTable {
    fn build(graph: &PartGraph, stats: &mut DiscoveryStats) -> Self {
        let m = graph.parts.len();
        let unit: Vec<Vec<[f64; 2]>> = graph
            .parts
            .iter()
            .map(|p| {
                p.descriptor
                    .iter()
                    .map(|v| {
                        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
                        if n > 0.0 {
                            [v[0] / n, v[1] / n]
                        } else {
                            [0.0, 0.0]
                        }
                    })
                    .collect()
            })
            .collect();
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let (a, b) = (&unit[i], &unit[j]);
                debug_assert_eq!(a.len(), b.len());
                let mut sum = 0.0;
                for (va, vb) in a.iter().zip(b) {
                    sum += va[0] * vb[0] + va[1] * vb[1];
                }
                let s = sum / a.len().max(1) as f64;
                values[i * m + j] = s;
                values[j * m + i] = s;
                stats.similarity_checks += 1;
            }
        }
        SimilarityTable { m, values }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }
}

#[derive(Default)]
struct ClusterData {
    members: Vec<usize>,
    /// Hash-deduplicated while building; sorted only on output.
    edges: std::collections::HashSet<(usize, usize)>,
}

/// Cluster bookkeeping with O(1) membership through the assignment table;
/// slot index is the creation id, merged-away slots become None.
#[derive(Default)]
struct ClusterSet {
    slots: Vec<Option<ClusterData>>,
    assignment: Vec<Option<usize>>,
    merges: u64,
}

impl ClusterSet {
    fn new(m: usize) -> Self {
        ClusterSet {
            slots: Vec::new(),
            assignment: vec![None; m],
            merges: 0,
        }
    }

    fn norm(a: usize, b: usize) -> (usize, usize) {
        (a.min(b), a.max(b))
    }

    /// Registers the discovered relation {i, k} with connecting edge (i, k).
    fn register(&mut self, i: usize, k: usize, graph: &PartGraph) {
        let (ci, ck) = (self.assignment[i], self.assignment[k]);
        match (ci, ck) {
            (None, None) => {
                let slot = self.slots.len();
                let mut data = ClusterData::default();
                data.members.extend([i, k]);
                data.edges.insert(Self::norm(i, k));
                self.assignment[i] = Some(slot);
                self.assignment[k] = Some(slot);
                self.slots.push(Some(data));
            }
            _ => {
                // extend the first existing object: smallest creation id wins
                let target = match (ci, ck) {
                    (Some(a), Some(b)) => a.min(b),
                    (Some(a), None) => a,
                    (None, Some(b)) => b,
                    (None, None) => unreachable!(),
                };
                for p in [i, k] {
                    if self.assignment[p].is_none() {
                        self.assignment[p] = Some(target);
                        self.slots[target].as_mut().expect("live").members.push(p);
                    }
                }
                {
                    let data = self.slots[target].as_mut().expect("live cluster");
                    data.edges.insert(Self::norm(i, k));
                }
                // complete adjacency edges between the new parts and the
                // members already present; scanning the parts' adjacency
                // lists keeps this O(d) per update
                for p in [i, k] {
                    for &y in graph.adjacent_neighbors(p) {
                        if y != p && self.assignment[y] == Some(target) {
                            self.slots[target]
                                .as_mut()
                                .expect("live cluster")
                                .edges
                                .insert(Self::norm(y, p));
                        }
                    }
                }
                // merge any other cluster containing i or k into the target
                for source in [ci, ck].into_iter().flatten() {
                    if source != target && self.slots[source].is_some() {
                        let data = self.slots[source].take().expect("checked");
                        for &p in &data.members {
                            self.assignment[p] = Some(target);
                        }
                        let tgt = self.slots[target].as_mut().expect("live cluster");
                        tgt.members.extend(data.members);
                        tgt.edges.extend(data.edges);
                        self.merges += 1;
                    }
                }
            }
        }
    }

    fn into_clusters(self) -> Vec<ObjectCluster> {
        self.slots
            .into_iter()
            .enumerate()
            .filter_map(|(id, slot)| {
                slot.map(|data| ObjectCluster {
                    cluster_id: id,
                    member_parts: data.members.into_iter().collect(),
                    internal_edges: data.edges.into_iter().collect(),
                })
            })
            .collect()
    }
}

/// Runs the pairwise iterative clustering over the adjacency graph and
/// returns the discovered objects plus instrumentation counters. Parts that
/// end up in no cluster are background.
pub fn discover_objects(
    graph: &PartGraph,
    config: &DiscoveryConfig,
) -> Result<(Vec<ObjectCluster>, DiscoveryStats)> {
    let start = Instant::now();
    let m = graph.parts.len();
    let mut stats = DiscoveryStats::default();
    let sims = SimilarityTable::build(graph, &mut stats);
    let gate = config.magnitude_gate.then_some(config.magnitude_delta);

    let mut order: Vec<usize> = (0..m).collect();
    if !config.deterministic_order {
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        order.shuffle(&mut rng);
    }

    // neighbor lists with offsets, computed once
    let neighborhood: Vec<Vec<(usize, [f64; 2])>> = (0..m)
        .map(|p| {
            graph
                .adjacent_neighbors(p)
                .iter()
                .map(|&q| (q, graph.offset(p, q)))
                .collect()
        })
        .collect();

    let mut clusters = ClusterSet::new(m);
    for &i in &order {
        for j in 0..m {
            if j == i || sims.get(i, j) <= config.epsilon {
                continue;
            }
            for &(k, off_ik) in &neighborhood[i] {
                for &(k2, off_jk2) in &neighborhood[j] {
                    stats.pairwise_comparisons += 1;
                    if let Some(budget) = config.comparison_budget {
                        if stats.pairwise_comparisons > budget {
                            stats.wall_time = start.elapsed();
                            let comparisons = stats.pairwise_comparisons;
                            return Err(Error::BudgetExhausted {
                                comparisons,
                                clusters: clusters.into_clusters(),
                                stats,
                            });
                        }
                    }
                    if edge_similarity_gated(off_ik, off_jk2, gate) > config.epsilon
                        && sims.get(k, k2) > config.epsilon
                    {
                        clusters.register(i, k, graph);
                    }
                }
            }
        }
    }

    stats.merges = clusters.merges;
    stats.wall_time = start.elapsed();
    Ok((clusters.into_clusters(), stats))
}

/// Exhaustive construction: enumerate every ordered part pair and every
/// incident edge pair under the three similarity conditions, then take the
/// connected components of the accumulated relation. Limited to small graphs.
pub fn brute_force_discover(
    graph: &PartGraph,
    config: &DiscoveryConfig,
) -> Result<Vec<ObjectCluster>> {
    let m = graph.parts.len();
    if m > BRUTE_FORCE_PART_LIMIT {
        return Err(Error::TooLarge {
            parts: m,
            limit: BRUTE_FORCE_PART_LIMIT,
        });
    }
    let mut stats = DiscoveryStats::default();
    let sims = SimilarityTable::build(graph, &mut stats);
    let gate = config.magnitude_gate.then_some(config.magnitude_delta);

    let mut relation: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..m {
        for j in 0..m {
            if j == i || sims.get(i, j) <= config.epsilon {
                continue;
            }
            for &k in graph.adjacent_neighbors(i) {
                let off_ik = graph.offset(i, k);
                for &k2 in graph.adjacent_neighbors(j) {
                    let off_jk2 = graph.offset(j, k2);
                    if edge_similarity_gated(off_ik, off_jk2, gate) > config.epsilon
                        && sims.get(k, k2) > config.epsilon
                    {
                        relation.insert((i.min(k), i.max(k)));
                    }
                }
            }
        }
    }

    // connected components of the relation
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in &relation {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut by_root: std::collections::BTreeMap<usize, ObjectCluster> = Default::default();
    for p in 0..m {
        let root = find(&mut parent, p);
        if relation.iter().any(|&(a, b)| a == p || b == p) {
            let next_id = by_root.len();
            by_root
                .entry(root)
                .or_insert_with(|| ObjectCluster {
                    cluster_id: next_id,
                    member_parts: BTreeSet::new(),
                    internal_edges: BTreeSet::new(),
                })
                .member_parts
                .insert(p);
        }
    }
    for &(a, b) in &relation {
        let root = find(&mut parent, a);
        if let Some(c) = by_root.get_mut(&root) {
            c.internal_edges.insert((a, b));
        }
    }
    Ok(by_root.into_values().collect())
}

/// Part-membership partition of a cluster list, ignoring cluster ids.
pub fn partition_of(clusters: &[ObjectCluster]) -> BTreeSet<BTreeSet<usize>> {
    clusters.iter().map(|c| c.member_parts.clone()).collect()
}
