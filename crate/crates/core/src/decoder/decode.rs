//! Minimum-weight perfect matching decoding over the syndrome graph.
//!
//! Pair costs are shortest-path lengths in integer weight units. Each defect
//! gets a boundary twin so the boundary can absorb any number of defects:
//! defect-defect edges cost the path length, defect-twin edges the distance
//! to the boundary, and twin-twin edges nothing.

use rayon::prelude::*;

use crate::bits::BitVec;
use crate::decoder::graph::SyndromeGraph;
use crate::decoder::matching::max_weight_matching;
use crate::detectors::DetectionMatrix;
use crate::error::{Error, Result};

/// Integer weight units per unit of log-likelihood.
pub const WEIGHT_SCALE: f64 = 1e6;
const UNREACHABLE: i64 = i64::MAX / 4;
/// Largest defect count accepted by [`Decoder::decode_brute_force`].
pub const BRUTE_FORCE_LIMIT: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeResult {
    /// Predicted `[control, target]` observable flips.
    pub observables: [bool; 2],
    /// Matched node pairs; the second entry is the boundary node for
    /// defects matched to the boundary.
    pub matching: Vec<(usize, usize)>,
    /// Total matching cost in integer weight units.
    pub weight: i64,
}

pub struct Decoder {
    nodes: usize,
    detectors: usize,
    dist: Vec<i64>,
    obs: Vec<u8>,
}

fn obs_bits(o: [bool; 2]) -> u8 {
    o[0] as u8 | (o[1] as u8) << 1
}

impl Decoder {
    pub fn new(graph: &SyndromeGraph) -> Self {
        let nn = graph.node_count();
        let mut dist = vec![UNREACHABLE; nn * nn];
        let mut obs = vec![0u8; nn * nn];
        for i in 0..nn {
            dist[i * nn + i] = 0;
        }
        for e in &graph.edges {
            let w = (e.w * WEIGHT_SCALE).round() as i64;
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                if w < dist[a * nn + b] {
                    dist[a * nn + b] = w;
                    obs[a * nn + b] = obs_bits(e.obs);
                }
            }
        }
        for k in 0..nn {
            for i in 0..nn {
                let dik = dist[i * nn + k];
                if dik >= UNREACHABLE {
                    continue;
                }
                let oik = obs[i * nn + k];
                for j in 0..nn {
                    let cand = dik + dist[k * nn + j];
                    if cand < dist[i * nn + j] {
                        dist[i * nn + j] = cand;
                        obs[i * nn + j] = oik ^ obs[k * nn + j];
                    }
                }
            }
        }
        Self {
            nodes: nn,
            detectors: graph.detector_count,
            dist,
            obs,
        }
    }

    pub fn boundary(&self) -> usize {
        self.detectors
    }

    /// Shortest-path cost between two nodes, if connected.
    pub fn distance(&self, a: usize, b: usize) -> Option<i64> {
        let d = self.dist[a * self.nodes + b];
        (d < UNREACHABLE).then_some(d)
    }

    fn path_obs(&self, a: usize, b: usize) -> u8 {
        self.obs[a * self.nodes + b]
    }

    fn defects(&self, row: &BitVec) -> Result<Vec<usize>> {
        if row.len() != self.detectors {
            return Err(Error::Shape(format!(
                "detector row has {} bits, graph has {} detectors",
                row.len(),
                self.detectors
            )));
        }
        let defects: Vec<usize> = row.iter_ones().collect();
        let b = self.boundary();
        for &d in &defects {
            let reachable = self.distance(d, b).is_some()
                || defects
                    .iter()
                    .any(|&o| o != d && self.distance(d, o).is_some());
            if !reachable {
                return Err(Error::DisconnectedDefect(d));
            }
        }
        Ok(defects)
    }

    fn finish(&self, pairs: Vec<(usize, usize)>) -> DecodeResult {
        let mut o = 0u8;
        let mut weight = 0;
        for &(a, b) in &pairs {
            o ^= self.path_obs(a, b);
            weight += self.dist[a * self.nodes + b];
        }
        DecodeResult {
            observables: [o & 1 == 1, o & 2 == 2],
            matching: pairs,
            weight,
        }
    }

    /// Exact minimum-weight perfect matching of the fired detectors.
    pub fn decode(&self, row: &BitVec) -> Result<DecodeResult> {
        let defects = self.defects(row)?;
        let m = defects.len();
        let b = self.boundary();
        let cost = |i: usize, j: usize| self.distance(defects[i], defects[j]);
        let to_boundary = |i: usize| self.distance(defects[i], b);
        let mut edges = Vec::with_capacity(m * m);
        let mut max_cost = 0;
        for i in 0..m {
            for j in i + 1..m {
                if let Some(c) = cost(i, j) {
                    edges.push((i, j, c));
                    max_cost = max_cost.max(c);
                }
            }
            if let Some(c) = to_boundary(i) {
                edges.push((i, m + i, c));
                max_cost = max_cost.max(c);
            }
            for j in i + 1..m {
                edges.push((m + i, m + j, 0));
            }
        }
        let top = max_cost + 1;
        let weighted: Vec<(usize, usize, i64)> =
            edges.iter().map(|&(i, j, c)| (i, j, top - c)).collect();
        let mate = max_weight_matching(2 * m, &weighted, true);
        let mut pairs = Vec::with_capacity(m);
        for i in 0..m {
            match mate[i] {
                Some(j) if j < m => {
                    if i < j {
                        pairs.push((defects[i], defects[j]));
                    }
                }
                Some(_) => pairs.push((defects[i], b)),
                None => return Err(Error::DisconnectedDefect(defects[i])),
            }
        }
        Ok(self.finish(pairs))
    }

    /// Exhaustive search over all pairings, for at most
    /// [`BRUTE_FORCE_LIMIT`] defects.
    pub fn decode_brute_force(&self, row: &BitVec) -> Result<DecodeResult> {
        let defects = self.defects(row)?;
        if defects.len() > BRUTE_FORCE_LIMIT {
            return Err(Error::TooManyDefects(defects.len(), BRUTE_FORCE_LIMIT));
        }
        let b = self.boundary();
        let mut best: Option<(i64, Vec<(usize, usize)>)> = None;
        let mut current = Vec::new();
        self.pairings(&defects, 0, &mut current, b, &mut best);
        let (_, pairs) = best.ok_or_else(|| Error::DisconnectedDefect(defects[0]))?;
        Ok(self.finish(pairs))
    }

    fn pairings(
        &self,
        rest: &[usize],
        cost: i64,
        current: &mut Vec<(usize, usize)>,
        b: usize,
        best: &mut Option<(i64, Vec<(usize, usize)>)>,
    ) {
        let Some((&a, tail)) = rest.split_first() else {
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                *best = Some((cost, current.clone()));
            }
            return;
        };
        if let Some(c) = self.distance(a, b) {
            current.push((a, b));
            self.pairings(tail, cost + c, current, b, best);
            current.pop();
        }
        for (i, &o) in tail.iter().enumerate() {
            if let Some(c) = self.distance(a, o) {
                let mut remaining = tail.to_vec();
                remaining.remove(i);
                current.push((a, o));
                self.pairings(&remaining, cost + c, current, b, best);
                current.pop();
            }
        }
    }

    /// Predicted observable flips for every shot, decoded in parallel.
    pub fn decode_all(&self, detections: &DetectionMatrix) -> Result<Vec<[bool; 2]>> {
        (0..detections.shots())
            .into_par_iter()
            .map(|s| self.decode(&detections.row(s)).map(|r| r.observables))
            .collect()
    }
}

/// Decodes one detector row against `graph`.
pub fn decode(graph: &SyndromeGraph, row: &BitVec) -> Result<DecodeResult> {
    Decoder::new(graph).decode(row)
}

/// Brute-force reference decoder for at most [`BRUTE_FORCE_LIMIT`] defects.
pub fn decode_brute_force(graph: &SyndromeGraph, row: &BitVec) -> Result<DecodeResult> {
    Decoder::new(graph).decode_brute_force(row)
}
