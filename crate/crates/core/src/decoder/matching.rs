//! Weighted matching graph and syndrome decoding.
//!
//! Each sector's graph has one node per detector and one edge per
//! two-detector DEM entry, weighted -ln(p/(1-p)) and quantized to integers.
//! Decoding pairs the flagged detectors of a sector by exact minimum-weight
//! perfect matching over their pairwise shortest-path distances; the
//! correction is the XOR of edge observable masks along the matched paths.
//! Erased qubits drop their edge weight to zero for the affected shot.

use crate::bits::BitVec;
use crate::decoder::blossom::min_weight_perfect_matching;
use crate::decoder::dem::DetectorErrorModel;
use crate::{Error, Result};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Fixed-point scale for edge weights (exact integer arithmetic downstream).
const WEIGHT_SCALE: f64 = 1_048_576.0;

#[derive(Clone, Debug)]
pub struct MatchEdge {
    pub a: u32,
    pub b: u32,
    pub weight: i64,
    pub observables: u8,
    pub prob: f64,
}

#[derive(Clone, Debug)]
pub struct SectorGraph {
    pub n_nodes: u32,
    pub edges: Vec<MatchEdge>,
    /// Edge ids incident to each node, ascending.
    pub adj: Vec<Vec<u32>>,
    /// Cached all-pairs shortest-path distances (erasure-free decoding).
    dist: Vec<i64>,
    /// Observable mask along the canonical shortest path, same layout.
    mask: Vec<u8>,
}

impl SectorGraph {
    #[inline]
    fn cached(&self, u: u32, v: u32) -> (i64, u8) {
        let n = self.n_nodes as usize;
        let (s, t) = (u.min(v) as usize, u.max(v) as usize);
        (self.dist[s * n + t], self.mask[s * n + t])
    }

    /// Dijkstra from `src` with optional per-edge weight overrides (erasures
    /// set their edge weight to zero). Deterministic: the heap orders ties
    /// by node index and relaxations are strict.
    fn shortest_paths(&self, src: u32, zeroed: Option<&[bool]>) -> (Vec<i64>, Vec<u8>) {
        let n = self.n_nodes as usize;
        let mut dist = vec![i64::MAX; n];
        let mut mask = vec![0u8; n];
        let mut done = vec![false; n];
        let mut heap: BinaryHeap<Reverse<(i64, u32)>> = BinaryHeap::new();
        dist[src as usize] = 0;
        heap.push(Reverse((0, src)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if done[u as usize] {
                continue;
            }
            done[u as usize] = true;
            for &eid in &self.adj[u as usize] {
                let e = &self.edges[eid as usize];
                let w = match zeroed {
                    Some(z) if z[eid as usize] => 0,
                    _ => e.weight,
                };
                let v = if e.a == u { e.b } else { e.a };
                let nd = d + w;
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    mask[v as usize] = mask[u as usize] ^ e.observables;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        (dist, mask)
    }
}

/// The decoder-side graph: one [`SectorGraph`] per sector plus the maps
/// between global detectors, sector-local nodes, and erasable qubit edges.
#[derive(Clone, Debug)]
pub struct MatchingGraph {
    pub n_detectors: u32,
    pub det_sector: Vec<u8>,
    pub det_local: Vec<u32>,
    pub sectors: Vec<SectorGraph>,
    /// Per data qubit: (sector, edge id) of its elementary edge.
    pub qubit_edge: Vec<Option<(u8, u32)>>,
}

/// Detector flips plus the heralded erasure mask for one shot.
#[derive(Clone, Debug)]
pub struct Syndrome {
    pub detectors: BitVec,
    pub erasures: Vec<u32>,
}

/// Predicted observable flips and the total matched weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correction {
    pub observables: u8,
    pub cost: i64,
}

/// Build the per-sector weighted matching graphs from a decomposed DEM.
pub fn dem_to_matching(dem: &DetectorErrorModel) -> Result<MatchingGraph> {
    let n_sectors = dem.det_sector.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut det_local = vec![u32::MAX; dem.n_detectors as usize];
    let mut counts = vec![0u32; n_sectors];
    for (d, &s) in dem.det_sector.iter().enumerate() {
        det_local[d] = counts[s as usize];
        counts[s as usize] += 1;
    }
    // Collect edges, merging parallel edges with equal observable masks.
    let mut edge_index: std::collections::HashMap<(u8, u32, u32, u8), usize> =
        std::collections::HashMap::new();
    let mut raw: Vec<(u8, u32, u32, u8, f64)> = Vec::new();
    for e in &dem.entries {
        match e.detectors.len() {
            2 => {
                let s = dem.det_sector[e.detectors[0] as usize];
                if s != dem.det_sector[e.detectors[1] as usize] {
                    return Err(Error::Dem(format!(
                        "entry spans sectors: D{} D{}",
                        e.detectors[0], e.detectors[1]
                    )));
                }
                let (a, b) = (
                    det_local[e.detectors[0] as usize],
                    det_local[e.detectors[1] as usize],
                );
                let key = (s, a.min(b), a.max(b), e.observables);
                match edge_index.get(&key) {
                    Some(&i) => {
                        let p = &mut raw[i].4;
                        *p = *p * (1.0 - e.prob) + e.prob * (1.0 - *p);
                    }
                    None => {
                        edge_index.insert(key, raw.len());
                        raw.push((s, a.min(b), a.max(b), e.observables, e.prob));
                    }
                }
            }
            1 => {
                return Err(Error::Dem(format!(
                    "size-1 entry at D{} (impossible on the torus)",
                    e.detectors[0]
                )))
            }
            _ => {
                return Err(Error::Dem(format!(
                    "entry with {} detectors reached the matching stage",
                    e.detectors.len()
                )))
            }
        }
    }
    raw.sort_by(|x, y| (x.0, x.1, x.2, x.3).cmp(&(y.0, y.1, y.2, y.3)));

    let mut sectors: Vec<SectorGraph> = counts
        .iter()
        .map(|&n| SectorGraph {
            n_nodes: n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n as usize],
            dist: Vec::new(),
            mask: Vec::new(),
        })
        .collect();
    for (s, a, b, obs, prob) in raw {
        let g = &mut sectors[s as usize];
        let p = prob.clamp(1e-15, 0.5);
        let weight = ((1.0 - p) / p).ln();
        let eid = g.edges.len() as u32;
        g.edges.push(MatchEdge {
            a,
            b,
            weight: (weight * WEIGHT_SCALE).round() as i64,
            observables: obs,
            prob,
        });
        g.adj[a as usize].push(eid);
        g.adj[b as usize].push(eid);
    }
    // Cache all-pairs shortest paths per sector.
    for g in &mut sectors {
        let n = g.n_nodes as usize;
        let mut dist = vec![i64::MAX; n * n];
        let mut mask = vec![0u8; n * n];
        for src in 0..g.n_nodes {
            let (d, m) = g.shortest_paths(src, None);
            dist[src as usize * n..(src as usize + 1) * n].copy_from_slice(&d);
            mask[src as usize * n..(src as usize + 1) * n].copy_from_slice(&m);
        }
        g.dist = dist;
        g.mask = mask;
    }
    // Map each qubit to its elementary edge for erasure handling. A qubit
    // can lack an edge when nothing in the circuit can flip it (e.g. zero
    // delay-line residence); that is only an error if it can be erased.
    let mut qubit_edge = vec![None; dem.elementary.len()];
    for (q, elem) in dem.elementary.iter().enumerate() {
        let Some(elem) = elem else { continue };
        let s = dem.det_sector[elem.detectors[0] as usize];
        let (a, b) = (
            det_local[elem.detectors[0] as usize],
            det_local[elem.detectors[1] as usize],
        );
        let (a, b) = (a.min(b), a.max(b));
        let g = &sectors[s as usize];
        let eid = g
            .edges
            .iter()
            .position(|e| e.a == a && e.b == b && e.observables == elem.observables);
        if let Some(eid) = eid {
            qubit_edge[q] = Some((s, eid as u32));
        }
    }
    for atom in &dem.erasures {
        if qubit_edge.get(atom.qubit as usize).copied().flatten().is_none() {
            return Err(Error::Dem(format!(
                "no matching-graph edge for erasable qubit {}",
                atom.qubit
            )));
        }
    }
    Ok(MatchingGraph {
        n_detectors: dem.n_detectors,
        det_sector: dem.det_sector.clone(),
        det_local,
        sectors,
        qubit_edge,
    })
}

impl MatchingGraph {
    /// Flagged detectors of one sector, as sorted local node ids.
    fn flagged(&self, s: &Syndrome, sector: u8) -> Vec<u32> {
        let mut out = Vec::new();
        for d in s.detectors.ones() {
            if self.det_sector[d as usize] == sector {
                out.push(self.det_local[d as usize]);
            }
        }
        out
    }

    fn erased_edges(&self, s: &Syndrome, sector: u8) -> Option<Vec<bool>> {
        if s.erasures.is_empty() {
            return None;
        }
        let g = &self.sectors[sector as usize];
        let mut z = vec![false; g.edges.len()];
        let mut any = false;
        for &q in &s.erasures {
            if let Some(Some((qs, eid))) = self.qubit_edge.get(q as usize) {
                if *qs == sector {
                    z[*eid as usize] = true;
                    any = true;
                }
            }
        }
        if any {
            Some(z)
        } else {
            None
        }
    }

    /// Decode one sector; returns its observable mask and matched cost.
    fn decode_sector(&self, s: &Syndrome, sector: u8) -> Result<Correction> {
        let flagged = self.flagged(s, sector);
        if flagged.len() % 2 != 0 {
            return Err(Error::Decoder(format!(
                "odd number of flagged detectors ({}) in sector {sector}",
                flagged.len()
            )));
        }
        if flagged.is_empty() {
            return Ok(Correction { observables: 0, cost: 0 });
        }
        let g = &self.sectors[sector as usize];
        let zeroed = self.erased_edges(s, sector);
        let k = flagged.len();
        let (dists, masks) = self.pairwise(g, &flagged, zeroed.as_deref());
        let mut edges = Vec::with_capacity(k * (k - 1) / 2);
        for i in 0..k {
            for j in i + 1..k {
                edges.push((i, j, dists[i * k + j]));
            }
        }
        let pairs = min_weight_perfect_matching(k, &edges);
        let mut observables = 0u8;
        let mut cost = 0i64;
        for (i, j) in pairs {
            observables ^= masks[i * k + j];
            cost += dists[i * k + j];
        }
        Ok(Correction { observables, cost })
    }

    /// Pairwise distances and path masks between flagged nodes.
    fn pairwise(
        &self,
        g: &SectorGraph,
        flagged: &[u32],
        zeroed: Option<&[bool]>,
    ) -> (Vec<i64>, Vec<u8>) {
        let k = flagged.len();
        let mut dists = vec![0i64; k * k];
        let mut masks = vec![0u8; k * k];
        match zeroed {
            None => {
                for i in 0..k {
                    for j in i + 1..k {
                        let (d, m) = g.cached(flagged[i], flagged[j]);
                        dists[i * k + j] = d;
                        dists[j * k + i] = d;
                        masks[i * k + j] = m;
                        masks[j * k + i] = m;
                    }
                }
            }
            Some(z) => {
                // Per-shot reweighting: recompute from each flagged source,
                // from the lower node id so path masks stay canonical.
                for i in 0..k {
                    let (d, m) = g.shortest_paths(flagged[i], Some(z));
                    for j in i + 1..k {
                        dists[i * k + j] = d[flagged[j] as usize];
                        dists[j * k + i] = d[flagged[j] as usize];
                        masks[i * k + j] = m[flagged[j] as usize];
                        masks[j * k + i] = m[flagged[j] as usize];
                    }
                }
            }
        }
        (dists, masks)
    }
}

/// Decode a full syndrome: all sectors independently, XOR of their masks.
pub fn decode(mg: &MatchingGraph, s: &Syndrome) -> Result<Correction> {
    let mut observables = 0u8;
    let mut cost = 0i64;
    for sector in 0..mg.sectors.len() as u8 {
        let c = mg.decode_sector(s, sector)?;
        observables ^= c.observables;
        cost += c.cost;
    }
    Ok(Correction { observables, cost })
}

/// Exact reference decoder: enumerate every pairing of the flagged
/// detectors (at most 10) in lexicographic order, keeping the first
/// strict minimum. Shares the shortest-path machinery with `decode`.
pub fn brute_force_match(mg: &MatchingGraph, s: &Syndrome) -> Result<Correction> {
    let mut observables = 0u8;
    let mut cost = 0i64;
    for sector in 0..mg.sectors.len() as u8 {
        let flagged = mg.flagged(s, sector);
        if flagged.len() % 2 != 0 {
            return Err(Error::Decoder("odd flagged count".into()));
        }
        if flagged.len() > 10 {
            return Err(Error::Decoder(format!(
                "brute-force matcher limited to 10 flips, got {}",
                flagged.len()
            )));
        }
        if flagged.is_empty() {
            continue;
        }
        let g = &mg.sectors[sector as usize];
        let zeroed = mg.erased_edges(s, sector);
        let k = flagged.len();
        let (dists, masks) = mg.pairwise(g, &flagged, zeroed.as_deref());
        let items: Vec<usize> = (0..k).collect();
        let (c, m) = best_pairing(&items, &dists, &masks, k);
        cost += c;
        observables ^= m;
    }
    Ok(Correction { observables, cost })
}

fn best_pairing(items: &[usize], dists: &[i64], masks: &[u8], k: usize) -> (i64, u8) {
    if items.is_empty() {
        return (0, 0);
    }
    let first = items[0];
    let mut best = (i64::MAX, 0u8);
    // Lexicographic pairing order: the partner of the lowest element
    // ascends; strict improvement keeps the earliest minimum.
    for idx in 1..items.len() {
        let second = items[idx];
        let rest: Vec<usize> = items[1..]
            .iter()
            .copied()
            .filter(|&x| x != second)
            .collect();
        let (c, m) = best_pairing(&rest, dists, masks, k);
        let cand = (c + dists[first * k + second], m ^ masks[first * k + second]);
        if cand.0 < best.0 {
            best = cand;
        }
    }
    best
}
