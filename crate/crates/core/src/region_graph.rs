//! Region adjacency graphs and ROI-relative edge weights.
//!
//! Two closed regions are neighbours when their cells in the nearest-region
//! (Voronoi) labelling of the frame touch, so regions separated by removed
//! noise or empty space still connect. Hop distances from an ROI node give
//! binary weights: 1 on edges incident to the ROI, 0 elsewhere. The weight-1
//! neighbours, optionally narrowed by the ROI's direction of motion, are
//! where the ROI is searched for in the next frame.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::noise_filter::RegionSet;
use crate::roi_detect::{Cardinal, CardinalDirection};

#[derive(Debug, Clone, PartialEq)]
pub struct RegionGraph {
    /// Node id -> region centroid `(col, row)`.
    centroids: BTreeMap<u32, (f64, f64)>,
    adjacency: BTreeMap<u32, BTreeSet<u32>>,
}

impl RegionGraph {
    pub fn contains(&self, id: u32) -> bool {
        self.centroids.contains_key(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = u32> + '_ {
        self.centroids.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.centroids.len()
    }

    pub fn centroid(&self, id: u32) -> Option<(f64, f64)> {
        self.centroids.get(&id).copied()
    }

    pub fn neighbours(&self, id: u32) -> impl Iterator<Item = u32> + '_ {
        self.adjacency.get(&id).into_iter().flatten().copied()
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.adjacency.get(&a).is_some_and(|n| n.contains(&b))
    }

    /// Undirected edges as `(low, high)`, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        self.adjacency
            .iter()
            .flat_map(|(&a, n)| n.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }
}

/// Labels every pixel with the closed region owning the nearest region
/// pixel (Euclidean; ties to the lower id). All zeros if the frame has no
/// closed region.
pub fn nearest_region_labels(regions: &RegionSet) -> Vec<u32> {
    let (w, h) = (regions.width as usize, regions.height as usize);
    let closed = regions.closed_lookup();
    let site = |p: usize| {
        let l = regions.labels[p];
        if closed.get(l as usize).copied().unwrap_or(false) {
            l
        } else {
            0
        }
    };

    // per column: nearest site in that column as (dy², label)
    const NONE: (u64, u32) = (u64::MAX, 0);
    let mut col = vec![NONE; w * h];
    for x in 0..w {
        let mut last: Option<(usize, u32)> = None;
        for y in 0..h {
            let l = site(y * w + x);
            if l != 0 {
                last = Some((y, l));
            }
            if let Some((sy, sl)) = last {
                let d = (y - sy) as u64;
                col[y * w + x] = (d * d, sl);
            }
        }
        let mut next: Option<(usize, u32)> = None;
        for y in (0..h).rev() {
            let l = site(y * w + x);
            if l != 0 {
                next = Some((y, l));
            }
            if let Some((sy, sl)) = next {
                let d = (sy - y) as u64;
                let cand = (d * d, sl);
                if cand < col[y * w + x] {
                    col[y * w + x] = cand;
                }
            }
        }
    }

    // per row: combine columns, scanning outwards until dx² alone is worse
    let mut out = vec![0u32; w * h];
    for y in 0..h {
        let row = &col[y * w..(y + 1) * w];
        for x in 0..w {
            let mut best = NONE;
            for off in 0..w {
                let dx2 = (off * off) as u64;
                if dx2 > best.0 {
                    break;
                }
                for xs in [x.checked_sub(off), (off > 0).then_some(x + off).filter(|&v| v < w)].into_iter().flatten() {
                    let (dy2, l) = row[xs];
                    if l != 0 {
                        let cand = (dx2 + dy2, l);
                        if cand < best {
                            best = cand;
                        }
                    }
                }
            }
            out[y * w + x] = best.1;
        }
    }
    out
}

/// Nodes are the closed regions; edges join regions whose nearest-region
/// cells are 4-adjacent somewhere in the frame.
pub fn build_graph(regions: &RegionSet) -> RegionGraph {
    let centroids: BTreeMap<u32, (f64, f64)> = regions.closed().map(|r| (r.id, r.centroid)).collect();
    let mut adjacency: BTreeMap<u32, BTreeSet<u32>> = centroids.keys().map(|&id| (id, BTreeSet::new())).collect();
    if centroids.len() > 1 {
        let (w, h) = (regions.width as usize, regions.height as usize);
        let cells = nearest_region_labels(regions);
        let mut link = |a: u32, b: u32| {
            if a != b {
                adjacency.get_mut(&a).expect("node").insert(b);
                adjacency.get_mut(&b).expect("node").insert(a);
            }
        };
        for y in 0..h {
            for x in 0..w {
                let p = y * w + x;
                if x + 1 < w {
                    link(cells[p], cells[p + 1]);
                }
                if y + 1 < h {
                    link(cells[p], cells[p + w]);
                }
            }
        }
    }
    RegionGraph { centroids, adjacency }
}

/// Hop distances from one ROI node. `None` marks unreachable nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTable {
    pub roi: u32,
    distances: BTreeMap<u32, Option<usize>>,
}

impl NodeTable {
    pub fn distance(&self, id: u32) -> Option<usize> {
        self.distances.get(&id).copied().flatten()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, Option<usize>)> + '_ {
        self.distances.iter().map(|(&k, &v)| (k, v))
    }
}

pub fn node_table(graph: &RegionGraph, roi: u32) -> Result<NodeTable> {
    if !graph.contains(roi) {
        return Err(Error::NodeNotInGraph(roi));
    }
    let mut distances: BTreeMap<u32, Option<usize>> = graph.nodes().map(|n| (n, None)).collect();
    distances.insert(roi, Some(0));
    let mut queue = VecDeque::from([roi]);
    while let Some(n) = queue.pop_front() {
        let d = distances[&n].expect("queued nodes are reached");
        for m in graph.neighbours(n) {
            if distances[&m].is_none() {
                distances.insert(m, Some(d + 1));
                queue.push_back(m);
            }
        }
    }
    Ok(NodeTable { roi, distances })
}

/// A region graph with 0/1 weights relative to `roi`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedRegionGraph {
    pub graph: RegionGraph,
    pub roi: u32,
    weights: BTreeMap<(u32, u32), u8>,
}

impl WeightedRegionGraph {
    pub fn weight(&self, a: u32, b: u32) -> Option<u8> {
        self.weights.get(&(a.min(b), a.max(b))).copied()
    }

    /// All `(low, high, w)` triples, sorted.
    pub fn weighted_edges(&self) -> impl Iterator<Item = (u32, u32, u8)> + '_ {
        self.weights.iter().map(|(&(a, b), &w)| (a, b, w))
    }

    /// Plain-text dump: a `roi` line, one `node id col row` line per node
    /// and one `edge a b w` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("roi {}\n", self.roi);
        for n in self.graph.nodes() {
            let (c, r) = self.graph.centroid(n).expect("node");
            let _ = writeln!(s, "node {n} {c:.2} {r:.2}");
        }
        for (a, b, w) in self.weighted_edges() {
            let _ = writeln!(s, "edge {a} {b} {w}");
        }
        s
    }
}

pub fn assign_weights(graph: &RegionGraph, table: &NodeTable) -> WeightedRegionGraph {
    let roi = table.roi;
    let weights = graph
        .edges()
        .into_iter()
        .map(|(a, b)| {
            let hop = if a == roi {
                table.distance(b)
            } else if b == roi {
                table.distance(a)
            } else {
                None
            };
            ((a, b), u8::from(hop == Some(1)))
        })
        .collect();
    WeightedRegionGraph { graph: graph.clone(), roi, weights }
}

fn lies_towards(from: (f64, f64), to: (f64, f64), c: Cardinal) -> bool {
    let (ux, uy) = c.unit();
    (to.0 - from.0) * f64::from(ux) + (to.1 - from.1) * f64::from(uy) > 0.0
}

/// Weight-1 neighbours of `roi`, narrowed to those whose centroid lies on
/// the side of any cardinal in `direction`. Falls back to the full weight-1
/// set when narrowing leaves nothing.
pub fn candidate_regions(wg: &WeightedRegionGraph, roi: u32, direction: Option<CardinalDirection>) -> BTreeSet<u32> {
    let all: BTreeSet<u32> = wg
        .graph
        .neighbours(roi)
        .filter(|&n| wg.weight(roi, n) == Some(1))
        .collect();
    let (Some(dir), Some(origin)) = (direction, wg.graph.centroid(roi)) else {
        return all;
    };
    let pruned: BTreeSet<u32> = all
        .iter()
        .copied()
        .filter(|&n| {
            let c = wg.graph.centroid(n).expect("neighbour is a node");
            dir.cardinals().any(|card| lies_towards(origin, c, card))
        })
        .collect();
    if pruned.is_empty() {
        all
    } else {
        pruned
    }
}
