//! Periodic 3D cluster lattice, parity checks, logical membranes, slab
//! partitions, and emission scheduling.
//!
//! Qubits live on the six parity classes of the fine cubic grid `Z_L^3` that
//! have one or two odd coordinates (edge- and face-sites). All-odd sites are
//! primal cell centers and host primal checks; all-even sites are primal
//! vertices and host dual checks. A Z error on a face qubit flips its two
//! primal cells, a Z error on an edge qubit flips its two dual vertices, so
//! decoding splits into two independent sectors.

use crate::{Error, Result};
use serde::Serialize;

/// Coordinates on the fine lattice, each reduced modulo `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FineCoord {
    pub x: u16,
    pub y: u16,
    pub z: u16,
}

impl FineCoord {
    #[inline]
    pub fn parity_class(&self) -> (u8, u8, u8) {
        ((self.x & 1) as u8, (self.y & 1) as u8, (self.z & 1) as u8)
    }
}

/// Which check family a qubit participates in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sector {
    /// Face qubits (two odd coordinates): flipped-Z shows in primal cells.
    Primal,
    /// Edge qubits (one odd coordinate): flipped-Z shows in dual vertices.
    Dual,
}

/// The cluster graph together with its check and observable structure.
///
/// Generic graphs (paths, small test graphs) carry empty check/observable
/// data; the compiler and tableau oracle only need `adj`.
#[derive(Clone, Debug)]
pub struct ClusterGraph {
    /// Fine lattice size, 0 for generic graphs.
    pub l: u16,
    /// Vertex id -> fine coordinates (empty for generic graphs).
    pub coords: Vec<FineCoord>,
    /// Edge list, each pair ordered `(min, max)`, sorted.
    pub edges: Vec<(u32, u32)>,
    /// Sorted adjacency lists.
    pub adj: Vec<Vec<u32>>,
    /// Six face qubits around each primal cell, cells in lex order.
    pub primal_checks: Vec<[u32; 6]>,
    /// Six edge qubits around each primal vertex, vertices in lex order.
    pub dual_checks: Vec<[u32; 6]>,
    /// Per qubit: the two checks (indices within its own sector) it belongs to.
    pub qubit_checks: Vec<[u32; 2]>,
    /// Per qubit: its sector (empty for generic graphs).
    pub qubit_sector: Vec<Sector>,
    /// Logical membranes: face qubits whose dual edge crosses x=1/2, y=1/2, z=1/2.
    pub observables: [Vec<u32>; 3],
    /// Per qubit: bitmask over the three observables.
    pub obs_mask: Vec<u8>,
}

impl ClusterGraph {
    pub fn n_qubits(&self) -> usize {
        self.adj.len()
    }

    pub fn is_lattice(&self) -> bool {
        self.l > 0
    }

    /// Number of detectors (primal first, then dual).
    pub fn n_detectors(&self) -> usize {
        self.primal_checks.len() + self.dual_checks.len()
    }

    /// Build a generic graph from an edge list over `n` vertices. No checks,
    /// no observables; used for protocol tests on small graphs.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        let mut norm: Vec<(u32, u32)> = edges
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        norm.sort_unstable();
        norm.dedup();
        for &(a, b) in &norm {
            assert!(a != b && (b as usize) < n, "bad edge ({a},{b})");
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        ClusterGraph {
            l: 0,
            coords: Vec::new(),
            edges: norm,
            adj,
            primal_checks: Vec::new(),
            dual_checks: Vec::new(),
            qubit_checks: Vec::new(),
            qubit_sector: Vec::new(),
            observables: [Vec::new(), Vec::new(), Vec::new()],
            obs_mask: Vec::new(),
        }
    }
}

#[inline]
fn odd_count(x: u16, y: u16, z: u16) -> u32 {
    (x & 1) as u32 + (y & 1) as u32 + (z & 1) as u32
}

/// Build the periodic 3D cluster lattice of fine size `L` (even, >= 4).
///
/// Qubit count is `6(L/2)^3`; primal and dual check counts are `(L/2)^3`
/// each; the three logical observables are the primal membranes at the
/// reference planes x=1/2, y=1/2, z=1/2.
pub fn build_rhg(l: u32) -> Result<ClusterGraph> {
    if l < 4 || l % 2 != 0 {
        return Err(Error::InvalidLattice(format!(
            "L must be even and >= 4, got {l}"
        )));
    }
    let l = l as u16;
    let lu = l as usize;
    let site = |x: u16, y: u16, z: u16| -> usize {
        (x as usize * lu + y as usize) * lu + z as usize
    };
    // Index qubit sites in (x, y, z) lex order.
    let mut index_of = vec![u32::MAX; lu * lu * lu];
    let mut coords = Vec::new();
    for x in 0..l {
        for y in 0..l {
            for z in 0..l {
                let odd = odd_count(x, y, z);
                if odd == 1 || odd == 2 {
                    index_of[site(x, y, z)] = coords.len() as u32;
                    coords.push(FineCoord { x, y, z });
                }
            }
        }
    }
    let n = coords.len();

    let step = |c: u16, d: i32| -> u16 { ((c as i32 + d).rem_euclid(l as i32)) as u16 };
    let neighbors = |c: FineCoord| -> [FineCoord; 6] {
        [
            FineCoord { x: step(c.x, 1), ..c },
            FineCoord { x: step(c.x, -1), ..c },
            FineCoord { y: step(c.y, 1), ..c },
            FineCoord { y: step(c.y, -1), ..c },
            FineCoord { z: step(c.z, 1), ..c },
            FineCoord { z: step(c.z, -1), ..c },
        ]
    };

    let mut edges = Vec::new();
    let mut adj = vec![Vec::new(); n];
    for (i, &c) in coords.iter().enumerate() {
        for nb in neighbors(c) {
            let j = index_of[site(nb.x, nb.y, nb.z)];
            if j != u32::MAX && (i as u32) < j {
                edges.push((i as u32, j));
                adj[i].push(j);
                adj[j as usize].push(i as u32);
            }
        }
    }
    edges.sort_unstable();
    for list in &mut adj {
        list.sort_unstable();
    }

    let half = (l / 2) as usize;
    let cell_index = |x: u16, y: u16, z: u16| -> u32 {
        (((x as usize) / 2 * half + (y as usize) / 2) * half + (z as usize) / 2) as u32
    };

    // Primal checks: six face qubits around each all-odd cell center.
    let mut primal_checks = Vec::with_capacity(half * half * half);
    for x in (1..l).step_by(2) {
        for y in (1..l).step_by(2) {
            for z in (1..l).step_by(2) {
                let c = FineCoord { x, y, z };
                let mut q = [0u32; 6];
                for (k, nb) in neighbors(c).into_iter().enumerate() {
                    q[k] = index_of[site(nb.x, nb.y, nb.z)];
                }
                primal_checks.push(q);
            }
        }
    }
    // Dual checks: six edge qubits around each all-even vertex.
    let mut dual_checks = Vec::with_capacity(half * half * half);
    for x in (0..l).step_by(2) {
        for y in (0..l).step_by(2) {
            for z in (0..l).step_by(2) {
                let c = FineCoord { x, y, z };
                let mut q = [0u32; 6];
                for (k, nb) in neighbors(c).into_iter().enumerate() {
                    q[k] = index_of[site(nb.x, nb.y, nb.z)];
                }
                dual_checks.push(q);
            }
        }
    }

    let mut qubit_sector = Vec::with_capacity(n);
    let mut qubit_checks = vec![[u32::MAX; 2]; n];
    for (i, &c) in coords.iter().enumerate() {
        if odd_count(c.x, c.y, c.z) == 2 {
            qubit_sector.push(Sector::Primal);
            // The two cells differ along the face normal (the even axis).
            let (a, b) = if c.x & 1 == 0 {
                (
                    FineCoord { x: step(c.x, -1), ..c },
                    FineCoord { x: step(c.x, 1), ..c },
                )
            } else if c.y & 1 == 0 {
                (
                    FineCoord { y: step(c.y, -1), ..c },
                    FineCoord { y: step(c.y, 1), ..c },
                )
            } else {
                (
                    FineCoord { z: step(c.z, -1), ..c },
                    FineCoord { z: step(c.z, 1), ..c },
                )
            };
            qubit_checks[i] = [cell_index(a.x, a.y, a.z), cell_index(b.x, b.y, b.z)];
        } else {
            qubit_sector.push(Sector::Dual);
            // The two vertices are the edge endpoints (along the odd axis).
            let (a, b) = if c.x & 1 == 1 {
                (
                    FineCoord { x: step(c.x, -1), ..c },
                    FineCoord { x: step(c.x, 1), ..c },
                )
            } else if c.y & 1 == 1 {
                (
                    FineCoord { y: step(c.y, -1), ..c },
                    FineCoord { y: step(c.y, 1), ..c },
                )
            } else {
                (
                    FineCoord { z: step(c.z, -1), ..c },
                    FineCoord { z: step(c.z, 1), ..c },
                )
            };
            qubit_checks[i] = [cell_index(a.x, a.y, a.z), cell_index(b.x, b.y, b.z)];
        }
        if qubit_sector[i] == Sector::Primal {
            let [a, b] = qubit_checks[i];
            debug_assert!(a != b);
            let _ = (a, b);
        }
    }

    // Observables: face qubits whose dual edge crosses the reference plane.
    // The x-membrane is the class (even, odd, odd) at x = 0, and so on.
    let mut observables: [Vec<u32>; 3] = Default::default();
    let mut obs_mask = vec![0u8; n];
    for (i, &c) in coords.iter().enumerate() {
        let (px, py, pz) = c.parity_class();
        if px == 0 && py == 1 && pz == 1 && c.x == 0 {
            observables[0].push(i as u32);
            obs_mask[i] |= 1;
        }
        if px == 1 && py == 0 && pz == 1 && c.y == 0 {
            observables[1].push(i as u32);
            obs_mask[i] |= 2;
        }
        if px == 1 && py == 1 && pz == 0 && c.z == 0 {
            observables[2].push(i as u32);
            obs_mask[i] |= 4;
        }
    }

    Ok(ClusterGraph {
        l,
        coords,
        edges,
        adj,
        primal_checks,
        dual_checks,
        qubit_checks,
        qubit_sector,
        observables,
        obs_mask,
    })
}

/// Assignment of vertices to `n_e` slabs along z, plus the cross-edge sets.
#[derive(Clone, Debug)]
pub struct SlabPartition {
    pub n_e: u32,
    /// Slab thickness in fine layers, `L / n_e`.
    pub thickness: u32,
    pub slab_of: Vec<u16>,
    /// Cross edges per boundary `s`: edges from slab `s` to slab `(s+1) % n_e`,
    /// stored as `(vertex in s, vertex in s+1)`. The wrap boundary is the last
    /// entry. Empty for `n_e = 1`.
    pub cross_edges: Vec<Vec<(u32, u32)>>,
    /// True iff the construction can run with zero idle steps: `n_e` even
    /// (or 1) and `L % n_e == 0`.
    pub no_interruption: bool,
}

/// Split the lattice into `n_e` slabs of thickness `L / n_e` along z.
pub fn partition_slabs(g: &ClusterGraph, n_e: u32) -> Result<SlabPartition> {
    if !g.is_lattice() {
        return Err(Error::InvalidPartition(
            "slab partition requires a lattice graph".into(),
        ));
    }
    let l = g.l as u32;
    if n_e == 0 || n_e > l / 2 {
        return Err(Error::InvalidPartition(format!(
            "n_e must be in [1, L/2] = [1, {}], got {n_e}",
            l / 2
        )));
    }
    if l % n_e != 0 {
        return Err(Error::InvalidPartition(format!(
            "n_e = {n_e} does not divide L = {l}"
        )));
    }
    let thickness = l / n_e;
    let slab_of: Vec<u16> = g
        .coords
        .iter()
        .map(|c| (c.z as u32 / thickness) as u16)
        .collect();
    let mut cross_edges = vec![Vec::new(); if n_e == 1 { 0 } else { n_e as usize }];
    if n_e > 1 {
        for &(a, b) in &g.edges {
            if slab_of[a as usize] == slab_of[b as usize] {
                continue;
            }
            // Cross edges run along z; boundary s sits at z = (s+1) * t.
            // For n_e = 2 both boundaries join the same two slabs, so
            // classify by the z coordinates, not the slab ids.
            let (za, zb) = (g.coords[a as usize].z, g.coords[b as usize].z);
            if za.abs_diff(zb) == 1 {
                let (lo, hi) = if za < zb { (a, b) } else { (b, a) };
                cross_edges[slab_of[lo as usize] as usize].push((lo, hi));
            } else {
                // Wrap boundary: z = L-1 in slab n_e-1 joins z = 0 in slab 0.
                let (top, bottom) = if za > zb { (a, b) } else { (b, a) };
                cross_edges[(n_e - 1) as usize].push((top, bottom));
            }
        }
        for set in &mut cross_edges {
            set.sort_unstable();
        }
    }
    let part = SlabPartition {
        n_e,
        thickness,
        slab_of,
        cross_edges,
        no_interruption: n_e == 1 || (n_e % 2 == 0),
    };
    let bad = validate_matching_condition(g, &part);
    if !bad.is_empty() {
        return Err(Error::MatchingCondition(bad));
    }
    Ok(part)
}

/// List every vertex that is an endpoint of more than one edge within a
/// single cross-edge set. Empty result means the pairwise matching
/// condition holds.
pub fn validate_matching_condition(_g: &ClusterGraph, p: &SlabPartition) -> Vec<u32> {
    let mut bad = Vec::new();
    for set in &p.cross_edges {
        let mut seen: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
        for &(a, b) in set {
            *seen.entry(a).or_insert(0) += 1;
            *seen.entry(b).or_insert(0) += 1;
        }
        for (&v, &deg) in &seen {
            if deg > 1 {
                bad.push(v);
            }
        }
    }
    bad.sort_unstable();
    bad.dedup();
    bad
}

/// Per-emitter emission sequences with a global step for every emission.
///
/// Cross-edge partners must be emitted at the same global step (the
/// ancilla-ancilla CZ happens between their swaps); when local indices
/// misalign the scheduler holds the earlier emitter with idle steps.
#[derive(Clone, Debug)]
pub struct EmissionOrder {
    /// Local emission order per part.
    pub parts: Vec<Vec<u32>>,
    /// Global step of each (part, local index).
    pub global_step: Vec<Vec<u32>>,
    /// Cross partner per vertex (vertex id), if any.
    pub cross_partner: Vec<Option<u32>>,
    /// Part id per vertex.
    pub part_of: Vec<u16>,
    /// Local index per vertex.
    pub local_index: Vec<u32>,
    /// Total idle (interruption) steps summed over parts.
    pub idle_steps: usize,
    /// Number of global steps.
    pub total_steps: usize,
}

impl EmissionOrder {
    pub fn n_parts(&self) -> usize {
        self.parts.len()
    }

    /// Single-emitter order that visits vertices 0..n in id order.
    /// Suitable for generic test graphs.
    pub fn sequential(g: &ClusterGraph) -> Self {
        let order: Vec<u32> = (0..g.n_qubits() as u32).collect();
        Self::schedule(g, vec![order]).expect("single part cannot deadlock")
    }

    /// Schedule explicit per-part orders against the graph's cross edges.
    ///
    /// Every vertex must appear exactly once; each vertex may have at most
    /// one edge leaving its part (the pairwise matching condition).
    pub fn schedule(g: &ClusterGraph, parts: Vec<Vec<u32>>) -> Result<Self> {
        let n = g.n_qubits();
        let mut part_of = vec![u16::MAX; n];
        let mut local_index = vec![u32::MAX; n];
        for (pi, order) in parts.iter().enumerate() {
            for (li, &v) in order.iter().enumerate() {
                if part_of[v as usize] != u16::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "vertex {v} appears twice in the emission order"
                    )));
                }
                part_of[v as usize] = pi as u16;
                local_index[v as usize] = li as u32;
            }
        }
        if part_of.iter().any(|&p| p == u16::MAX) {
            return Err(Error::InvalidPartition(
                "emission order does not cover every vertex".into(),
            ));
        }
        let mut cross_partner = vec![None; n];
        for &(a, b) in &g.edges {
            if part_of[a as usize] != part_of[b as usize] {
                for (u, w) in [(a, b), (b, a)] {
                    if let Some(prev) = cross_partner[u as usize] {
                        if prev != w {
                            return Err(Error::MatchingCondition(vec![u]));
                        }
                    }
                    cross_partner[u as usize] = Some(w);
                }
            }
        }

        // Greedy lockstep schedule. At each global step a part emits its head
        // if the head has no cross partner, or if the partner is its own
        // part's head too (they fire jointly); otherwise the part idles.
        let np = parts.len();
        let mut head = vec![0usize; np];
        let mut global_step: Vec<Vec<u32>> = parts.iter().map(|p| vec![0; p.len()]).collect();
        let mut step = 0usize;
        let mut idle_steps = 0usize;
        loop {
            let mut active = 0usize;
            let mut fire: Vec<usize> = Vec::new();
            for (pi, order) in parts.iter().enumerate() {
                if head[pi] >= order.len() {
                    continue;
                }
                active += 1;
                let v = order[head[pi]];
                match cross_partner[v as usize] {
                    None => fire.push(pi),
                    Some(w) => {
                        let wp = part_of[w as usize] as usize;
                        let aligned = head[wp] < parts[wp].len()
                            && parts[wp][head[wp]] == w;
                        if aligned {
                            fire.push(pi);
                        }
                    }
                }
            }
            if active == 0 {
                break;
            }
            if fire.is_empty() {
                return Err(Error::ScheduleDeadlock(step));
            }
            for &pi in &fire {
                global_step[pi][head[pi]] = step as u32;
                head[pi] += 1;
            }
            idle_steps += active - fire.len();
            step += 1;
        }

        Ok(EmissionOrder {
            parts,
            global_step,
            cross_partner,
            part_of,
            local_index,
            idle_steps,
            total_steps: step,
        })
    }
}

/// Zig-zag traversal of a cycle of `n` items: 0, n-1, 1, n-2, ...
/// Embeds the cycle in a line so neighbors end up at most two slots apart.
fn zigzag(n: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(n as usize);
    let (mut lo, mut hi) = (0u32, n - 1);
    while lo < hi {
        out.push(lo);
        out.push(hi);
        lo += 1;
        hi -= 1;
    }
    if lo == hi {
        out.push(lo);
    }
    out
}

/// Build the per-slab raster orders and schedule them.
///
/// The slab is swept in plane-pair blocks: the x-planes follow a zig-zag of
/// the x-cycle (so wrap edges stay short) and consecutive planes in that
/// sequence, always one even and one odd x, are fused into one block. Within
/// a block, each y-pair contributes three columns of slab height t: the two
/// always-full columns (even-x, odd-y) and (odd-x, even-y), then the mixed
/// column made of whichever of (odd-x, odd-y) / (even-x, even-y) holds a
/// qubit at each z. The fused structure gives every slab identical ranks at
/// the cross-edge sites for any thickness, so mirrored neighboring slabs
/// emit paired endpoints at the same step; the residence of any photon is
/// bounded by about one block, 1.5 L^2 / n_e steps.
///
/// Odd slabs sweep z mirrored, which is what aligns the pairing whenever
/// `n_e` is even; odd `n_e` leaves the wrap boundary misaligned and the
/// scheduler inserts idle steps there.
pub fn emission_order(g: &ClusterGraph, p: &SlabPartition) -> Result<EmissionOrder> {
    let l = g.l as u32;
    let t = p.thickness;
    let lu = g.l as usize;
    let site_index = {
        let mut m = vec![u32::MAX; lu * lu * lu];
        for (i, c) in g.coords.iter().enumerate() {
            m[(c.x as usize * lu + c.y as usize) * lu + c.z as usize] = i as u32;
        }
        m
    };
    let at = |x: u32, y: u32, z: u32| -> u32 {
        site_index[(x as usize * lu + y as usize) * lu + z as usize]
    };

    let plane_seq = zigzag(l);
    let ypair_seq = zigzag(l / 2);
    let mut parts = Vec::with_capacity(p.n_e as usize);
    for s in 0..p.n_e {
        let zb = s * t;
        let z_of = |rho: u32| -> u32 {
            if s % 2 == 0 {
                zb + rho
            } else {
                zb + t - 1 - rho
            }
        };
        let mut order = Vec::with_capacity(3 * (t as usize) * (lu / 2) * (lu / 2));
        for block in plane_seq.chunks(2) {
            // One even and one odd x-plane per block (L is even).
            let (pa, pb) = if block[0] % 2 == 0 {
                (block[0], block[1])
            } else {
                (block[1], block[0])
            };
            for &j in &ypair_seq {
                let (y_even, y_odd) = (2 * j, 2 * j + 1);
                for rho in 0..t {
                    order.push(at(pa, y_odd, z_of(rho)));
                }
                // Mixed column in the middle: halves the wait for its
                // cross-block x-neighbors on either side.
                for rho in 0..t {
                    let z = z_of(rho);
                    let q = if z % 2 == 0 { at(pb, y_odd, z) } else { at(pa, y_even, z) };
                    order.push(q);
                }
                for rho in 0..t {
                    order.push(at(pb, y_even, z_of(rho)));
                }
            }
        }
        debug_assert!(order.iter().all(|&q| q != u32::MAX));
        parts.push(order);
    }
    EmissionOrder::schedule(g, parts)
}

// ---- JSON export ----------------------------------------------------------

#[derive(Serialize)]
struct GraphJson<'a> {
    l: u16,
    vertices: Vec<VertexJson>,
    edges: &'a [(u32, u32)],
    primal_checks: &'a [[u32; 6]],
    dual_checks: &'a [[u32; 6]],
    observables: ObservablesJson<'a>,
}

#[derive(Serialize)]
struct VertexJson {
    id: u32,
    x: u16,
    y: u16,
    z: u16,
}

#[derive(Serialize)]
struct ObservablesJson<'a> {
    x: &'a [u32],
    y: &'a [u32],
    z: &'a [u32],
}

/// Serialize the graph with stable key order.
pub fn graph_json(g: &ClusterGraph) -> String {
    let doc = GraphJson {
        l: g.l,
        vertices: g
            .coords
            .iter()
            .enumerate()
            .map(|(i, c)| VertexJson { id: i as u32, x: c.x, y: c.y, z: c.z })
            .collect(),
        edges: &g.edges,
        primal_checks: &g.primal_checks,
        dual_checks: &g.dual_checks,
        observables: ObservablesJson {
            x: &g.observables[0],
            y: &g.observables[1],
            z: &g.observables[2],
        },
    };
    serde_json::to_string_pretty(&doc).expect("graph serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: count qubit sites and checks of Z_L^3 by brute
    /// force over every site's parity class.
    fn brute_force_counts(l: u16) -> (usize, usize, usize) {
        let mut qubits = 0;
        let mut cells = 0;
        let mut vertices = 0;
        for x in 0..l {
            for y in 0..l {
                for z in 0..l {
                    match odd_count(x, y, z) {
                        1 | 2 => qubits += 1,
                        3 => cells += 1,
                        _ => vertices += 1,
                    }
                }
            }
        }
        (qubits, cells, vertices)
    }

    #[test]
    fn l4_counts_match_brute_force() {
        let (q, c, v) = brute_force_counts(4);
        assert_eq!((q, c, v), (48, 8, 8));
        let g = build_rhg(4).unwrap();
        assert_eq!(g.n_qubits(), q);
        assert_eq!(g.primal_checks.len(), c);
        assert_eq!(g.dual_checks.len(), v);
    }

    #[test]
    fn counts_scale_for_all_small_l() {
        for l in [4u32, 6, 8, 10, 12, 14, 16] {
            let g = build_rhg(l).unwrap();
            let half = (l / 2) as usize;
            assert_eq!(g.n_qubits(), 6 * half * half * half);
            assert_eq!(g.primal_checks.len(), half * half * half);
            assert_eq!(g.dual_checks.len(), half * half * half);
            let (q, c, v) = brute_force_counts(l as u16);
            assert_eq!(g.n_qubits(), q);
            assert_eq!((g.primal_checks.len(), g.dual_checks.len()), (c, v));
        }
    }

    #[test]
    fn rejects_bad_l() {
        assert!(build_rhg(5).is_err());
        assert!(build_rhg(2).is_err());
    }

    #[test]
    fn every_qubit_in_exactly_two_same_sector_checks() {
        let g = build_rhg(4).unwrap();
        let mut primal_count = vec![0u32; g.n_qubits()];
        let mut dual_count = vec![0u32; g.n_qubits()];
        for check in &g.primal_checks {
            for &q in check {
                primal_count[q as usize] += 1;
            }
        }
        for check in &g.dual_checks {
            for &q in check {
                dual_count[q as usize] += 1;
            }
        }
        for q in 0..g.n_qubits() {
            match g.qubit_sector[q] {
                Sector::Primal => assert_eq!((primal_count[q], dual_count[q]), (2, 0)),
                Sector::Dual => assert_eq!((primal_count[q], dual_count[q]), (0, 2)),
            }
            // qubit_checks agrees with the membership scan
            let [a, b] = g.qubit_checks[q];
            let checks = match g.qubit_sector[q] {
                Sector::Primal => &g.primal_checks,
                Sector::Dual => &g.dual_checks,
            };
            assert!(checks[a as usize].contains(&(q as u32)));
            assert!(checks[b as usize].contains(&(q as u32)));
            assert_ne!(a, b);
        }
    }

    #[test]
    fn primal_supports_xor_to_empty_at_l6() {
        let g = build_rhg(6).unwrap();
        let mut parity = vec![0u8; g.n_qubits()];
        for check in &g.primal_checks {
            for &q in check {
                parity[q as usize] ^= 1;
            }
        }
        assert!(parity.iter().all(|&b| b == 0));
        let mut parity = vec![0u8; g.n_qubits()];
        for check in &g.dual_checks {
            for &q in check {
                parity[q as usize] ^= 1;
            }
        }
        assert!(parity.iter().all(|&b| b == 0));
    }

    #[test]
    fn graph_is_four_regular_with_nearest_neighbor_edges() {
        let g = build_rhg(6).unwrap();
        for adj in &g.adj {
            assert_eq!(adj.len(), 4);
        }
        let l = g.l as i32;
        for &(a, b) in &g.edges {
            let ca = g.coords[a as usize];
            let cb = g.coords[b as usize];
            let d = |u: u16, v: u16| {
                let raw = (u as i32 - v as i32).rem_euclid(l);
                raw.min(l - raw)
            };
            let dist = d(ca.x, cb.x) + d(ca.y, cb.y) + d(ca.z, cb.z);
            assert_eq!(dist, 1, "edge ({a},{b}) is not nearest-neighbor");
        }
    }

    #[test]
    fn observables_have_membrane_size() {
        let g = build_rhg(8).unwrap();
        for obs in &g.observables {
            assert_eq!(obs.len(), 16); // (L/2)^2
        }
    }

    #[test]
    fn partition_l8_ne2() {
        let g = build_rhg(8).unwrap();
        let p = partition_slabs(&g, 2).unwrap();
        assert_eq!(p.thickness, 4);
        assert!(p.no_interruption);
        assert_eq!(p.cross_edges.len(), 2);
        // Each boundary carries L^2 / 2 cross edges.
        for set in &p.cross_edges {
            assert_eq!(set.len(), 32);
        }
        assert!(validate_matching_condition(&g, &p).is_empty());
    }

    #[test]
    fn partition_cross_sets_are_matchings_l8_ne4() {
        let g = build_rhg(8).unwrap();
        let p = partition_slabs(&g, 4).unwrap();
        // Exhaustive degree check per boundary set.
        for set in &p.cross_edges {
            let mut deg = std::collections::HashMap::new();
            for &(a, b) in set {
                *deg.entry(a).or_insert(0) += 1;
                *deg.entry(b).or_insert(0) += 1;
            }
            assert!(deg.values().all(|&d| d == 1));
        }
    }

    #[test]
    fn partition_rejections() {
        let g = build_rhg(8).unwrap();
        assert!(partition_slabs(&g, 5).is_err()); // 5 does not divide 8
        assert!(partition_slabs(&g, 8).is_err()); // n_e > L/2
        assert!(partition_slabs(&g, 0).is_err());
    }

    #[test]
    fn matching_condition_flags_hand_built_violation() {
        let g = build_rhg(4).unwrap();
        let mut p = partition_slabs(&g, 2).unwrap();
        assert!(validate_matching_condition(&g, &p).is_empty());
        // Give vertex 0 a second cross edge.
        let (_, b) = p.cross_edges[0][0];
        p.cross_edges[0].push((0, b));
        p.cross_edges[0].push((0, b.wrapping_add(1)));
        let bad = validate_matching_condition(&g, &p);
        assert!(bad.contains(&0));
        assert!(bad.contains(&b));
    }

    #[test]
    fn slabs_cover_and_cross_plus_intra_is_all_edges() {
        let g = build_rhg(8).unwrap();
        let p = partition_slabs(&g, 4).unwrap();
        let mut count = vec![0usize; 4];
        for &s in &p.slab_of {
            count[s as usize] += 1;
        }
        assert!(count.iter().all(|&c| c == g.n_qubits() / 4));
        let cross_total: usize = p.cross_edges.iter().map(|s| s.len()).sum();
        let intra = g
            .edges
            .iter()
            .filter(|&&(a, b)| p.slab_of[a as usize] == p.slab_of[b as usize])
            .count();
        assert_eq!(cross_total + intra, g.edges.len());
    }

    #[test]
    fn emission_single_emitter_l8() {
        let g = build_rhg(8).unwrap();
        let p = partition_slabs(&g, 1).unwrap();
        let o = emission_order(&g, &p).unwrap();
        assert_eq!(o.idle_steps, 0);
        assert_eq!(o.total_steps, 384); // 6 * 64 emissions, one per step
        assert_eq!(o.parts.len(), 1);
        let mut seen = vec![false; g.n_qubits()];
        for &v in &o.parts[0] {
            assert!(!seen[v as usize]);
            seen[v as usize] = true;
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn emission_no_interruption_when_eligible() {
        for (l, n_e) in [(8u32, 2u32), (8, 4), (12, 2), (12, 4), (12, 6)] {
            let g = build_rhg(l).unwrap();
            let p = partition_slabs(&g, n_e).unwrap();
            assert!(p.no_interruption, "L={l} n_e={n_e}");
            let o = emission_order(&g, &p).unwrap();
            assert_eq!(o.idle_steps, 0, "L={l} n_e={n_e}");
            // Paired endpoints share the global step.
            for v in 0..g.n_qubits() {
                if let Some(w) = o.cross_partner[v] {
                    let sv = o.global_step[o.part_of[v] as usize][o.local_index[v] as usize];
                    let sw = o.global_step[o.part_of[w as usize] as usize]
                        [o.local_index[w as usize] as usize];
                    assert_eq!(sv, sw, "L={l} n_e={n_e} pair ({v},{w})");
                }
            }
        }
    }

    #[test]
    fn emission_interruption_mode_for_odd_ne() {
        for (l, n_e) in [(6u32, 3u32), (12, 3), (10, 5)] {
            let g = build_rhg(l).unwrap();
            let p = partition_slabs(&g, n_e).unwrap();
            assert!(!p.no_interruption);
            let o = emission_order(&g, &p).unwrap();
            assert!(o.idle_steps > 0, "odd n_e should need idles (L={l} n_e={n_e})");
            for v in 0..g.n_qubits() {
                if let Some(w) = o.cross_partner[v] {
                    let sv = o.global_step[o.part_of[v] as usize][o.local_index[v] as usize];
                    let sw = o.global_step[o.part_of[w as usize] as usize]
                        [o.local_index[w as usize] as usize];
                    assert_eq!(sv, sw);
                }
            }
        }
    }

    /// Largest gap (in global steps) between a qubit's emission and the
    /// emission of its last-emitted neighbor.
    fn max_neighbor_gap(g: &ClusterGraph, o: &EmissionOrder) -> u32 {
        let step_of = |v: u32| -> u32 {
            o.global_step[o.part_of[v as usize] as usize][o.local_index[v as usize] as usize]
        };
        let mut worst = 0;
        for v in 0..g.n_qubits() as u32 {
            let sv = step_of(v);
            for &w in &g.adj[v as usize] {
                let sw = step_of(w);
                if sw > sv {
                    worst = worst.max(sw - sv);
                }
            }
        }
        worst
    }

    #[test]
    fn neighbor_gap_bound_l8_ne2() {
        let g = build_rhg(8).unwrap();
        let p = partition_slabs(&g, 2).unwrap();
        let o = emission_order(&g, &p).unwrap();
        let t = p.thickness;
        // One plane-pair block of the raster (3/2 L t) plus one column: the
        // computed maximum is exactly 52 here.
        assert_eq!(max_neighbor_gap(&g, &o), 3 * g.l as u32 * t / 2 + t);
    }

    #[test]
    fn schedule_rejects_incomplete_order() {
        let g = ClusterGraph::from_edges(3, &[(0, 1), (1, 2)]);
        assert!(EmissionOrder::schedule(&g, vec![vec![0, 1]]).is_err());
        assert!(EmissionOrder::schedule(&g, vec![vec![0, 1, 2, 0]]).is_err());
    }

    #[test]
    fn graph_json_is_stable() {
        let g = build_rhg(4).unwrap();
        let a = graph_json(&g);
        let b = graph_json(&g);
        assert_eq!(a, b);
        assert!(a.contains("\"primal_checks\""));
        let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed["vertices"].as_array().unwrap().len(), 48);
    }
}
