//! Exact maximum-weight matching in general graphs: Edmonds' blossom
//! algorithm in the primal-dual O(n^3) formulation (Galil's survey), ported
//! from the well-known reference implementation by Joris van Rantwijk.
//! All weights and dual variables are integers, so the optimum is exact.
//!
//! The decoder consumes [`min_weight_perfect_matching`], which maximizes
//! transformed weights `C - w` under the maximum-cardinality rule.

const NONE: usize = usize::MAX;

/// Wrapped (cyclic) list indexing for possibly-negative walk positions.
#[inline]
fn at(list: &[usize], j: isize) -> usize {
    let n = list.len() as isize;
    list[(((j % n) + n) % n) as usize]
}

/// Maximum-weight matching over vertices `0..n`. Returns `mate[v]` = partner
/// of `v`, or `usize::MAX` when single. With `max_cardinality`, only
/// maximum-cardinality matchings compete on weight.
pub fn max_weight_matching(
    n: usize,
    edges: &[(usize, usize, i64)],
    max_cardinality: bool,
) -> Vec<usize> {
    if n == 0 || edges.is_empty() {
        return vec![NONE; n];
    }
    Matching::new(n, edges, max_cardinality).run()
}

/// Exact minimum-cost perfect matching on an even vertex set; panics if no
/// perfect matching exists (the decoder always passes complete graphs).
pub fn min_weight_perfect_matching(
    n: usize,
    edges: &[(usize, usize, i64)],
) -> Vec<(usize, usize)> {
    assert!(n % 2 == 0, "perfect matching needs an even vertex count");
    if n == 0 {
        return Vec::new();
    }
    let max_cost = edges.iter().map(|&(_, _, w)| w).max().unwrap_or(0);
    let flipped: Vec<(usize, usize, i64)> =
        edges.iter().map(|&(i, j, w)| (i, j, max_cost + 1 - w)).collect();
    let mate = max_weight_matching(n, &flipped, true);
    let mut out = Vec::with_capacity(n / 2);
    for v in 0..n {
        let m = mate[v];
        assert!(m != NONE, "no perfect matching exists");
        if v < m {
            out.push((v, m));
        }
    }
    out
}

struct Matching<'a> {
    nvertex: usize,
    edges: &'a [(usize, usize, i64)],
    max_cardinality: bool,
    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    mate: Vec<usize>,
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Option<Vec<usize>>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<i64>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

impl<'a> Matching<'a> {
    fn new(nvertex: usize, edges: &'a [(usize, usize, i64)], max_cardinality: bool) -> Self {
        let nedge = edges.len();
        let maxweight = edges.iter().map(|&(_, _, w)| w).max().unwrap().max(0);
        let mut endpoint = Vec::with_capacity(2 * nedge);
        for &(i, j, _) in edges {
            assert!(i != j && i < nvertex && j < nvertex, "bad edge ({i},{j})");
            endpoint.push(i);
            endpoint.push(j);
        }
        let mut neighbend = vec![Vec::new(); nvertex];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            neighbend[i].push(2 * k + 1);
            neighbend[j].push(2 * k);
        }
        let mut dualvar = vec![maxweight; nvertex];
        dualvar.extend(std::iter::repeat(0).take(nvertex));
        Matching {
            nvertex,
            edges,
            max_cardinality,
            endpoint,
            neighbend,
            mate: vec![NONE; nvertex],
            label: vec![0; 2 * nvertex],
            labelend: vec![NONE; 2 * nvertex],
            inblossom: (0..nvertex).collect(),
            blossomparent: vec![NONE; 2 * nvertex],
            blossomchilds: vec![Vec::new(); 2 * nvertex],
            blossombase: (0..nvertex)
                .chain(std::iter::repeat(NONE).take(nvertex))
                .collect(),
            blossomendps: vec![Vec::new(); 2 * nvertex],
            bestedge: vec![NONE; 2 * nvertex],
            blossombestedges: vec![None; 2 * nvertex],
            unusedblossoms: (nvertex..2 * nvertex).collect(),
            dualvar,
            allowedge: vec![false; nedge],
            queue: Vec::new(),
        }
    }

    /// 2 * slack of edge k. Does not work inside blossoms.
    #[inline]
    fn slack(&self, k: usize) -> i64 {
        let (i, j, w) = self.edges[k];
        self.dualvar[i] + self.dualvar[j] - 2 * w
    }

    fn blossom_leaves(&self, b: usize, out: &mut Vec<usize>) {
        if b < self.nvertex {
            out.push(b);
        } else {
            for &t in &self.blossomchilds[b] {
                self.blossom_leaves(t, out);
            }
        }
    }

    /// Label the top-level blossom of `w` with `t`, reached through remote
    /// endpoint `p`; S-labels enqueue the leaves, T-labels pull the mate.
    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            let mut leaves = Vec::new();
            self.blossom_leaves(b, &mut leaves);
            self.queue.extend(leaves);
        } else if t == 2 {
            let base = self.blossombase[b];
            let mb = self.mate[base];
            debug_assert!(mb != NONE);
            self.assign_label(self.endpoint[mb], 1, mb ^ 1);
        }
    }

    /// Trace back from v and w; returns the base of a new blossom, or NONE
    /// if an augmenting path was discovered instead.
    fn scan_blossom(&mut self, v: usize, w: usize) -> usize {
        let mut path = Vec::new();
        let mut base = NONE;
        let mut v = v;
        let mut w = w;
        while v != NONE || w != NONE {
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            debug_assert_eq!(self.label[b], 1);
            path.push(b);
            self.label[b] = 5;
            debug_assert_eq!(self.labelend[b], self.mate[self.blossombase[b]]);
            if self.labelend[b] == NONE {
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                debug_assert_eq!(self.label[b], 2);
                debug_assert!(self.labelend[b] != NONE);
                v = self.endpoint[self.labelend[b]];
            }
            if w != NONE {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    /// Construct a new blossom with the given base around edge `k`.
    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("blossom pool exhausted");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;
        let mut childs: Vec<usize> = Vec::new();
        let mut endps: Vec<usize> = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            childs.push(bv);
            endps.push(self.labelend[bv]);
            debug_assert!(self.labelend[bv] != NONE);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        childs.push(bb);
        childs.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            childs.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            debug_assert!(self.labelend[bw] != NONE);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }
        debug_assert_eq!(self.label[bb], 1);
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0;
        self.blossomchilds[b] = childs;
        self.blossomendps[b] = endps;
        let mut leaves = Vec::new();
        self.blossom_leaves(b, &mut leaves);
        for &lv in &leaves {
            if self.label[self.inblossom[lv]] == 2 {
                self.queue.push(lv);
            }
            self.inblossom[lv] = b;
        }
        // Compute the new blossom's least-slack edges to S-blossoms.
        let mut bestedgeto = vec![NONE; 2 * self.nvertex];
        for bv in self.blossomchilds[b].clone() {
            let nblists: Vec<Vec<usize>> = match self.blossombestedges[bv].take() {
                Some(list) => vec![list],
                None => {
                    let mut lv = Vec::new();
                    self.blossom_leaves(bv, &mut lv);
                    lv.iter()
                        .map(|&v2| self.neighbend[v2].iter().map(|&p| p / 2).collect())
                        .collect()
                }
            };
            for nblist in nblists {
                for k2 in nblist {
                    let (mut i, mut j, _) = self.edges[k2];
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE
                            || self.slack(k2) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k2;
                    }
                }
            }
            self.bestedge[bv] = NONE;
        }
        let best: Vec<usize> = bestedgeto.into_iter().filter(|&k2| k2 != NONE).collect();
        self.bestedge[b] = NONE;
        for &k2 in &best {
            if self.bestedge[b] == NONE || self.slack(k2) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k2;
            }
        }
        self.blossombestedges[b] = Some(best);
    }

    /// Expand (and possibly relabel through) blossom `b`.
    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        for s in self.blossomchilds[b].clone() {
            self.blossomparent[s] = NONE;
            if s < self.nvertex {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s] == 0 {
                self.expand_blossom(s, endstage);
            } else {
                let mut leaves = Vec::new();
                self.blossom_leaves(s, &mut leaves);
                for v in leaves {
                    self.inblossom[v] = s;
                }
            }
        }
        if !endstage && self.label[b] == 2 {
            // The expanding blossom lies on the alternating tree path;
            // relabel the sub-blossoms along the even-length side and leave
            // the rest unlabeled.
            debug_assert!(self.labelend[b] != NONE);
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let childs = self.blossomchilds[b].clone();
            let endps = self.blossomendps[b].clone();
            let len = childs.len() as isize;
            let idx0 = childs.iter().position(|&c| c == entrychild).unwrap() as isize;
            let (mut j, jstep, endptrick): (isize, isize, usize) = if idx0 & 1 == 1 {
                (idx0 - len, 1, 0)
            } else {
                (idx0, -1, 1)
            };
            let mut p = self.labelend[b];
            while j != 0 {
                self.label[self.endpoint[p ^ 1]] = 0;
                let q = at(&endps, j - endptrick as isize) ^ endptrick ^ 1;
                self.label[self.endpoint[q]] = 0;
                self.assign_label(self.endpoint[p ^ 1], 2, p);
                self.allowedge[at(&endps, j - endptrick as isize) / 2] = true;
                j += jstep;
                p = at(&endps, j - endptrick as isize) ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            let bv = at(&childs, j);
            self.label[self.endpoint[p ^ 1]] = 2;
            self.label[bv] = 2;
            self.labelend[self.endpoint[p ^ 1]] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            j += jstep;
            while at(&childs, j) != entrychild {
                let bw = at(&childs, j);
                if self.label[bw] == 1 {
                    j += jstep;
                    continue;
                }
                let mut leaves = Vec::new();
                self.blossom_leaves(bw, &mut leaves);
                let mut labeled = NONE;
                for v2 in leaves {
                    if self.label[v2] != 0 {
                        labeled = v2;
                        break;
                    }
                }
                if labeled != NONE {
                    debug_assert_eq!(self.label[labeled], 2);
                    debug_assert_eq!(self.inblossom[labeled], bw);
                    self.label[labeled] = 0;
                    self.label[self.endpoint[self.mate[self.blossombase[bw]]]] = 0;
                    let le = self.labelend[labeled];
                    self.assign_label(labeled, 2, le);
                }
                j += jstep;
            }
        }
        self.label[b] = 0;
        self.labelend[b] = NONE;
        self.bestedge[b] = NONE;
        self.blossomchilds[b].clear();
        self.blossomendps[b].clear();
        self.blossombase[b] = NONE;
        self.blossombestedges[b] = None;
        self.unusedblossoms.push(b);
    }

    /// Swap matched and unmatched edges through blossom `b` so that `v`
    /// becomes its base.
    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.nvertex {
            self.augment_blossom(t, v);
        }
        let childs = self.blossomchilds[b].clone();
        let endps = self.blossomendps[b].clone();
        let len = childs.len() as isize;
        let i = childs.iter().position(|&c| c == t).unwrap() as isize;
        let (mut j, jstep, endptrick): (isize, isize, usize) = if i & 1 == 1 {
            (i - len, 1, 0)
        } else {
            (i, -1, 1)
        };
        while j != 0 {
            j += jstep;
            let t1 = at(&childs, j);
            let p = at(&endps, j - endptrick as isize) ^ endptrick;
            if t1 >= self.nvertex {
                self.augment_blossom(t1, self.endpoint[p]);
            }
            j += jstep;
            let t2 = at(&childs, j);
            if t2 >= self.nvertex {
                self.augment_blossom(t2, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        let iu = i as usize;
        self.blossomchilds[b].rotate_left(iu);
        self.blossomendps[b].rotate_left(iu);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert_eq!(self.blossombase[b], v);
    }

    /// Augment along the path through edge `k`.
    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (s0, p0) in [(v, 2 * k + 1), (w, 2 * k)] {
            let mut s = s0;
            let mut p = p0;
            loop {
                let bs = self.inblossom[s];
                debug_assert_eq!(self.label[bs], 1);
                debug_assert_eq!(self.labelend[bs], self.mate[self.blossombase[bs]]);
                if bs >= self.nvertex {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                debug_assert_eq!(self.label[bt], 2);
                debug_assert!(self.labelend[bt] != NONE);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                debug_assert_eq!(self.blossombase[bt], t);
                if bt >= self.nvertex {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    fn run(mut self) -> Vec<usize> {
        let nvertex = self.nvertex;
        for _ in 0..nvertex {
            self.label.fill(0);
            self.bestedge.fill(NONE);
            for be in self.blossombestedges[nvertex..].iter_mut() {
                *be = None;
            }
            self.allowedge.fill(false);
            self.queue.clear();
            for v in 0..nvertex {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }
            let mut augmented = false;
            loop {
                'queue_scan: while let Some(v) = self.queue.pop() {
                    debug_assert_eq!(self.label[self.inblossom[v]], 1);
                    for pi in 0..self.neighbend[v].len() {
                        let p = self.neighbend[v][pi];
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = 0;
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= 0 {
                                self.allowedge[k] = true;
                            }
                        }
                        if self.allowedge[k] {
                            let bw = self.inblossom[w];
                            if self.label[bw] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[bw] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base != NONE {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break 'queue_scan;
                                }
                            } else if self.label[w] == 0 {
                                debug_assert_eq!(self.label[bw], 2);
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            let bv = self.inblossom[v];
                            if self.bestedge[bv] == NONE
                                || kslack < self.slack(self.bestedge[bv])
                            {
                                self.bestedge[bv] = k;
                            }
                        } else if self.label[w] == 0
                            && (self.bestedge[w] == NONE
                                || kslack < self.slack(self.bestedge[w]))
                        {
                            self.bestedge[w] = k;
                        }
                    }
                }
                if augmented {
                    break;
                }
                // Primal progress is blocked; compute the dual update.
                let mut deltatype = -1i32;
                let mut delta = 0i64;
                let mut deltaedge = NONE;
                let mut deltablossom = NONE;
                if !self.max_cardinality {
                    deltatype = 1;
                    delta = self.dualvar[..nvertex].iter().copied().min().unwrap().max(0);
                }
                for v in 0..nvertex {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v]);
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * nvertex {
                    if self.blossomparent[b] == NONE
                        && self.label[b] == 1
                        && self.bestedge[b] != NONE
                    {
                        let kslack = self.slack(self.bestedge[b]);
                        debug_assert_eq!(kslack % 2, 0);
                        let d = kslack / 2;
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in nvertex..2 * nvertex {
                    if self.blossombase[b] != NONE
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && (deltatype == -1 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == -1 {
                    debug_assert!(self.max_cardinality);
                    deltatype = 1;
                    delta = self.dualvar[..nvertex].iter().copied().min().unwrap().max(0);
                }
                for v in 0..nvertex {
                    match self.label[self.inblossom[v]] {
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => {}
                    }
                }
                for b in nvertex..2 * nvertex {
                    if self.blossombase[b] != NONE && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            _ => {}
                        }
                    }
                }
                match deltatype {
                    1 => break,
                    2 => {
                        self.allowedge[deltaedge] = true;
                        let (i, j, _) = self.edges[deltaedge];
                        let i = if self.label[self.inblossom[i]] == 0 { j } else { i };
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    4 => self.expand_blossom(deltablossom, false),
                    _ => unreachable!(),
                }
            }
            if !augmented {
                break;
            }
            // End of stage: expand all zero-dual S-blossoms.
            for b in nvertex..2 * nvertex {
                if self.blossomparent[b] == NONE
                    && self.blossombase[b] != NONE
                    && self.label[b] == 1
                    && self.dualvar[b] == 0
                {
                    self.expand_blossom(b, true);
                }
            }
        }
        let mut mate = vec![NONE; nvertex];
        for v in 0..nvertex {
            if self.mate[v] != NONE {
                mate[v] = self.endpoint[self.mate[v]];
            }
        }
        for v in 0..nvertex {
            debug_assert!(mate[v] == NONE || mate[mate[v]] == v);
        }
        mate
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::ShotRng;

    /// Brute-force maximum-weight matching by subset enumeration.
    fn brute_max(n: usize, edges: &[(usize, usize, i64)], max_cardinality: bool) -> (i64, usize) {
        let m = edges.len();
        let mut best_weight = i64::MIN;
        let mut best_card = 0usize;
        for mask in 0u32..(1 << m) {
            let mut used = vec![false; n];
            let mut ok = true;
            let mut weight = 0i64;
            let mut card = 0usize;
            for (k, &(i, j, w)) in edges.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    if used[i] || used[j] {
                        ok = false;
                        break;
                    }
                    used[i] = true;
                    used[j] = true;
                    weight += w;
                    card += 1;
                }
            }
            if !ok {
                continue;
            }
            let better = if max_cardinality {
                card > best_card || (card == best_card && weight > best_weight)
            } else {
                weight > best_weight
            };
            if better {
                best_weight = weight;
                best_card = card;
            }
        }
        (best_weight, best_card)
    }

    fn matching_weight(mate: &[usize], edges: &[(usize, usize, i64)]) -> (i64, usize) {
        let mut weight = 0;
        let mut card = 0;
        for &(i, j, w) in edges {
            if mate[i] == j {
                weight += w;
                card += 1;
            }
        }
        (weight, card)
    }

    #[test]
    fn trivial_and_known_cases() {
        assert_eq!(max_weight_matching(0, &[], false), Vec::<usize>::new());
        let mate = max_weight_matching(2, &[(0, 1, 1)], false);
        assert_eq!(mate, vec![1, 0]);
        // Classic: picking the middle heavy edge beats two light ones.
        let mate = max_weight_matching(4, &[(0, 1, 2), (1, 2, 10), (2, 3, 2)], false);
        assert_eq!(mate[1], 2);
        assert_eq!(mate[0], NONE);
        // Unless maximum cardinality is required.
        let mate = max_weight_matching(4, &[(0, 1, 2), (1, 2, 10), (2, 3, 2)], true);
        assert_eq!(mate[0], 1);
        assert_eq!(mate[2], 3);
    }

    #[test]
    fn known_blossom_cases() {
        // Create a blossom and use it for augmentation (van Rantwijk test 14).
        let edges = [(0, 1, 9), (0, 2, 8), (1, 2, 10), (2, 3, 7)];
        let mate = max_weight_matching(4, &edges, false);
        assert_eq!(mate, vec![1, 0, 3, 2]);
        // Expand a blossom during augmentation (test 16 variant).
        let edges = [
            (0, 1, 8),
            (0, 2, 8),
            (1, 2, 10),
            (1, 3, 12),
            (2, 4, 12),
            (3, 4, 14),
            (3, 5, 12),
        ];
        let mate = max_weight_matching(6, &edges, false);
        let (w, _) = matching_weight(&mate, &edges);
        let (bw, _) = brute_max(6, &edges, false);
        assert_eq!(w, bw);
    }

    #[test]
    fn random_graphs_match_brute_force() {
        let mut rng = ShotRng::new(0xb1055, 0);
        for trial in 0..400 {
            let n = 2 + (rng.index(7) as usize); // 2..8 vertices
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.next_f64() < 0.7 {
                        edges.push((i, j, rng.index(40) as i64 - 8));
                    }
                }
            }
            if edges.is_empty() || edges.len() > 20 {
                continue;
            }
            for maxcard in [false, true] {
                let mate = max_weight_matching(n, &edges, maxcard);
                let (w, c) = matching_weight(&mate, &edges);
                let (bw, bc) = brute_max(n, &edges, maxcard);
                if maxcard {
                    assert_eq!(c, bc, "trial {trial} cardinality");
                    assert_eq!(w, bw, "trial {trial} weight at max cardinality");
                } else {
                    assert_eq!(w, bw, "trial {trial} weight");
                }
            }
        }
    }

    #[test]
    fn random_complete_graphs_perfect_matching() {
        let mut rng = ShotRng::new(0xdec0de, 1);
        for trial in 0..300 {
            let n = 2 * (1 + rng.index(5) as usize); // 2..10, even
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    edges.push((i, j, 1 + rng.index(1_000_000) as i64));
                }
            }
            let pairs = min_weight_perfect_matching(n, &edges);
            assert_eq!(pairs.len(), n / 2, "trial {trial}");
            let cost: i64 = pairs
                .iter()
                .map(|&(i, j)| {
                    edges
                        .iter()
                        .find(|&&(a, b, _)| (a, b) == (i, j) || (a, b) == (j, i))
                        .unwrap()
                        .2
                })
                .sum();
            // Brute force minimum over all perfect pairings.
            let items: Vec<usize> = (0..n).collect();
            let best = brute_min_pairing(&items, &edges);
            assert_eq!(cost, best, "trial {trial}");
        }
    }

    fn brute_min_pairing(items: &[usize], edges: &[(usize, usize, i64)]) -> i64 {
        if items.is_empty() {
            return 0;
        }
        let first = items[0];
        let mut best = i64::MAX;
        for idx in 1..items.len() {
            let second = items[idx];
            let w = edges
                .iter()
                .find(|&&(a, b, _)| (a, b) == (first, second) || (a, b) == (second, first))
                .unwrap()
                .2;
            let rest: Vec<usize> = items
                .iter()
                .copied()
                .filter(|&x| x != first && x != second)
                .collect();
            best = best.min(w + brute_min_pairing(&rest, edges));
        }
        best
    }

    #[test]
    fn larger_instances_have_valid_duals() {
        // Spot-check a bigger complete graph: perfect and no panics.
        let mut rng = ShotRng::new(77, 7);
        let n = 40;
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j, 1 + rng.index(5_000_000) as i64));
            }
        }
        let pairs = min_weight_perfect_matching(n, &edges);
        assert_eq!(pairs.len(), 20);
    }
}
