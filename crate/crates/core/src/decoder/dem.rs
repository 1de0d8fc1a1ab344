//! Detector error model: every elementary fault reduced to (probability,
//! flipped detectors, flipped observables), decomposed to at most two
//! detectors per sector and merged across faults.
//!
//! Any fault in these circuits propagates to a set of Z flips on data-qubit
//! X measurements. Each flipped measurement toggles exactly the two checks
//! of its sector, so a fault's per-sector signature XORs down from those
//! pairs. Signatures of size two or less are kept whole (they become direct
//! matching edges); larger ones split back into the per-qubit elementary
//! pairs they came from.

use crate::circuit::{Circuit, Instruction};
use crate::sim::propagate::{enumerate_fault_effects, PauliTerm, RecordIncidence};
use crate::{Error, Result};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct DemEntry {
    pub prob: f64,
    /// Flipped detectors, ascending; at most two, all in one sector.
    pub detectors: Vec<u32>,
    /// Flipped observables, bit k = observable k.
    pub observables: u8,
}

/// One heralded-loss location: erasing `qubit` flags its elementary edge as
/// known-lost; the replacement state contributes Z with probability 1/2.
#[derive(Clone, Debug)]
pub struct ErasureAtom {
    pub instr: u32,
    pub qubit: u32,
    pub prob: f64,
    pub detectors: Vec<u32>,
    pub observables: u8,
}

/// Elementary single-Z signature of one data qubit.
#[derive(Clone, Copy, Debug)]
pub struct ElementaryQubit {
    pub detectors: [u32; 2],
    pub observables: u8,
}

#[derive(Clone, Debug)]
pub struct DetectorErrorModel {
    /// Decomposed and merged fault classes, in canonical order.
    pub entries: Vec<DemEntry>,
    /// Fault classes with no detector support but a logical effect. Retained
    /// and reported; must stay empty for the lattice circuits.
    pub undetectable: Vec<DemEntry>,
    /// Heralded-loss locations (not part of `entries`; their Z halves are).
    pub erasures: Vec<ErasureAtom>,
    /// Per data qubit, its elementary signature (None for qubits outside
    /// every check, which only happens on generic test circuits).
    pub elementary: Vec<Option<ElementaryQubit>>,
    /// Sector id per detector; sector 0 contains detector 0.
    pub det_sector: Vec<u8>,
    pub n_detectors: u32,
    pub n_observables: u8,
}

/// Union-find sector assignment: detectors sharing a measurement record
/// belong to the same sector.
fn detector_sectors(c: &Circuit, incidence: &RecordIncidence) -> Result<Vec<u8>> {
    let n = c.n_detectors as usize;
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], x: u32) -> u32 {
        let mut root = x;
        while parent[root as usize] != root {
            root = parent[root as usize];
        }
        let mut cur = x;
        while parent[cur as usize] != root {
            let next = parent[cur as usize];
            parent[cur as usize] = root;
            cur = next;
        }
        root
    }
    for dets in &incidence.det_of_record {
        for pair in dets.windows(2) {
            let (a, b) = (find(&mut parent, pair[0]), find(&mut parent, pair[1]));
            if a != b {
                parent[a.max(b) as usize] = a.min(b);
            }
        }
    }
    let mut sector_of_root: BTreeMap<u32, u8> = BTreeMap::new();
    let mut out = vec![0u8; n];
    for d in 0..n as u32 {
        let root = find(&mut parent, d);
        let next = sector_of_root.len() as u8;
        let s = *sector_of_root.entry(root).or_insert(next);
        out[d as usize] = s;
    }
    Ok(out)
}

/// Derive the detector error model of a noisy circuit.
pub fn build_dem(c: &Circuit) -> Result<DetectorErrorModel> {
    let incidence = RecordIncidence::build(c)?;
    let det_sector = detector_sectors(c, &incidence)?;
    let n_sectors = det_sector.iter().copied().max().map_or(0, |m| m as usize + 1);

    // Elementary signature per data qubit.
    let mut elementary: Vec<Option<ElementaryQubit>> = vec![None; c.n_data as usize];
    for q in 0..c.n_data as usize {
        let rec = c.record_of_qubit[q];
        if rec == u32::MAX {
            continue;
        }
        let dets = &incidence.det_of_record[rec as usize];
        match dets.len() {
            0 => {}
            2 => {
                if det_sector[dets[0] as usize] != det_sector[dets[1] as usize] {
                    return Err(Error::Dem(format!(
                        "qubit {q} spans two sectors (detectors {} and {})",
                        dets[0], dets[1]
                    )));
                }
                elementary[q] = Some(ElementaryQubit {
                    detectors: [dets[0], dets[1]],
                    observables: incidence.obs_of_record[rec as usize],
                });
            }
            k => {
                return Err(Error::Dem(format!(
                    "qubit {q} appears in {k} detectors; expected 0 or 2"
                )));
            }
        }
    }

    let faults = enumerate_fault_effects(c)?;
    let mut merged: BTreeMap<(Vec<u32>, u8), f64> = BTreeMap::new();
    let mut undetectable: BTreeMap<(Vec<u32>, u8), f64> = BTreeMap::new();
    let mut erasures = Vec::new();
    let mut combine = |map: &mut BTreeMap<(Vec<u32>, u8), f64>, key: (Vec<u32>, u8), p: f64| {
        let slot = map.entry(key).or_insert(0.0);
        *slot = *slot * (1.0 - p) + p * (1.0 - *slot);
    };

    for fault in &faults {
        // Split the flipped records by sector.
        let mut per_sector: Vec<Vec<u32>> = vec![Vec::new(); n_sectors.max(1)];
        for &r in &fault.record_flips {
            let dets = &incidence.det_of_record[r as usize];
            if dets.is_empty() {
                if incidence.obs_of_record[r as usize] != 0 {
                    return Err(Error::Dem(format!(
                        "record {r} carries an observable but no detectors; fault at instruction {} is undecomposable",
                        fault.instr
                    )));
                }
                continue;
            }
            per_sector[det_sector[dets[0] as usize] as usize].push(r);
        }
        let is_erase = matches!(fault.term, PauliTerm::Erase { .. });
        let prob = if is_erase { fault.prob / 2.0 } else { fault.prob };
        if prob == 0.0 {
            continue;
        }
        for records in &per_sector {
            if records.is_empty() {
                continue;
            }
            // XOR of the member pairs and observable bits.
            let mut sig: Vec<u32> = Vec::with_capacity(2 * records.len());
            let mut obs = 0u8;
            for &r in records {
                sig.extend_from_slice(&incidence.det_of_record[r as usize]);
                obs ^= incidence.obs_of_record[r as usize];
            }
            sig.sort_unstable();
            let mut xor: Vec<u32> = Vec::with_capacity(sig.len());
            let mut i = 0;
            while i < sig.len() {
                let mut j = i;
                while j < sig.len() && sig[j] == sig[i] {
                    j += 1;
                }
                if (j - i) % 2 == 1 {
                    xor.push(sig[i]);
                }
                i = j;
            }
            match xor.len() {
                0 => {
                    if obs != 0 {
                        combine(&mut undetectable, (Vec::new(), obs), prob);
                    }
                }
                1 | 2 => combine(&mut merged, (xor, obs), prob),
                _ => {
                    // Decompose into the per-qubit elementary pieces,
                    // cancelling identical pieces pairwise.
                    let mut pieces: Vec<(Vec<u32>, u8)> = records
                        .iter()
                        .map(|&r| {
                            let mut d = incidence.det_of_record[r as usize].clone();
                            d.sort_unstable();
                            (d, incidence.obs_of_record[r as usize])
                        })
                        .collect();
                    pieces.sort();
                    let mut i = 0;
                    while i < pieces.len() {
                        let mut j = i;
                        while j < pieces.len() && pieces[j] == pieces[i] {
                            j += 1;
                        }
                        if (j - i) % 2 == 1 {
                            combine(&mut merged, pieces[i].clone(), prob);
                        }
                        i = j;
                    }
                }
            }
        }
        if let PauliTerm::Erase { .. } = fault.term {
            let q = match c.instructions[fault.instr as usize] {
                Instruction::HeraldErase(_, q) => q,
                _ => unreachable!("erase term on non-erase instruction"),
            };
            erasures.push(ErasureAtom {
                instr: fault.instr,
                qubit: q,
                prob: fault.prob,
                detectors: fault.detectors.clone(),
                observables: fault.observables,
            });
        }
    }

    let entries = merged
        .into_iter()
        .map(|((detectors, observables), prob)| DemEntry { prob, detectors, observables })
        .collect();
    let undetectable = undetectable
        .into_iter()
        .map(|((detectors, observables), prob)| DemEntry { prob, detectors, observables })
        .collect();
    Ok(DetectorErrorModel {
        entries,
        undetectable,
        erasures,
        elementary,
        det_sector,
        n_detectors: c.n_detectors,
        n_observables: c.n_observables,
    })
}

impl DetectorErrorModel {
    /// Text form: `error(p) D<i> D<j> [Lk]`, one line per entry,
    /// undetectable entries last (no `D` fields).
    pub fn emit(&self) -> String {
        let mut out = String::new();
        for e in self.entries.iter().chain(self.undetectable.iter()) {
            out.push_str(&format!("error({})", e.prob));
            for d in &e.detectors {
                out.push_str(&format!(" D{d}"));
            }
            for k in 0..8 {
                if e.observables >> k & 1 == 1 {
                    out.push_str(&format!(" L{k}"));
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parse the text form. Sector structure is re-derived from the
    /// two-detector entries; erasure atoms and per-qubit data are not part
    /// of the text format.
    pub fn parse(text: &str) -> Result<DetectorErrorModel> {
        let mut entries = Vec::new();
        let mut undetectable = Vec::new();
        let mut n_detectors = 0u32;
        let mut n_observables = 0u8;
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: lineno + 1, msg: msg.to_string() };
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap();
            if !head.starts_with("error(") || !head.ends_with(')') {
                return Err(err("expected error(p)"));
            }
            let prob: f64 = head[6..head.len() - 1].parse().map_err(|_| err("bad probability"))?;
            if !(0.0..=1.0).contains(&prob) {
                return Err(err("probability out of range"));
            }
            let mut detectors = Vec::new();
            let mut observables = 0u8;
            for tok in parts {
                if let Some(d) = tok.strip_prefix('D') {
                    let d: u32 = d.parse().map_err(|_| err("bad detector"))?;
                    detectors.push(d);
                    n_detectors = n_detectors.max(d + 1);
                } else if let Some(k) = tok.strip_prefix('L') {
                    let k: u8 = k.parse().map_err(|_| err("bad observable"))?;
                    observables ^= 1 << k;
                    n_observables = n_observables.max(k + 1);
                } else {
                    return Err(err("expected D<i> or L<k>"));
                }
            }
            detectors.sort_unstable();
            if detectors.is_empty() {
                undetectable.push(DemEntry { prob, detectors, observables });
            } else {
                entries.push(DemEntry { prob, detectors, observables });
            }
        }
        // Re-derive sectors from entry connectivity.
        let n = n_detectors as usize;
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], x: u32) -> u32 {
            let mut root = x;
            while parent[root as usize] != root {
                root = parent[root as usize];
            }
            root
        }
        for e in &entries {
            for pair in e.detectors.windows(2) {
                let (a, b) = (find(&mut parent, pair[0]), find(&mut parent, pair[1]));
                if a != b {
                    parent[a.max(b) as usize] = a.min(b);
                }
            }
        }
        let mut sector_of_root: BTreeMap<u32, u8> = BTreeMap::new();
        let mut det_sector = vec![0u8; n];
        for d in 0..n as u32 {
            let root = find(&mut parent, d);
            let next = sector_of_root.len() as u8;
            det_sector[d as usize] = *sector_of_root.entry(root).or_insert(next);
        }
        Ok(DetectorErrorModel {
            entries,
            undetectable,
            erasures: Vec::new(),
            elementary: Vec::new(),
            det_sector,
            n_detectors,
            n_observables,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile_s1;
    use crate::lattice::{build_rhg, emission_order, partition_slabs};
    use crate::noise::{attach_circuit_noise, attach_dephasing, NoiseSpec};

    fn l4_noisy(p: f64, eta_z: f64) -> Circuit {
        let g = build_rhg(4).unwrap();
        let part = partition_slabs(&g, 1).unwrap();
        let o = emission_order(&g, &part).unwrap();
        let c = compile_s1(&g, &o).unwrap();
        let spec = NoiseSpec { p, eta_z, ..Default::default() };
        let c = attach_circuit_noise(&c, &spec).unwrap();
        attach_dephasing(&c, &spec).unwrap()
    }

    #[test]
    fn single_zerr_gives_two_detector_entry() {
        use crate::circuit::Instruction as I;
        // One data qubit in two detectors, plus a partner qubit per check so
        // parity structure mimics the lattice.
        let c = Circuit::new(vec![
            I::Init0(0),
            I::Init0(1),
            I::Zerr(0.25, 0),
            I::Mx(0),
            I::Mx(1),
            I::Detector(vec![0, 1]),
            I::Detector(vec![0, 1]),
        ])
        .unwrap();
        let dem = build_dem(&c).unwrap();
        assert_eq!(dem.entries.len(), 1);
        assert_eq!(dem.entries[0].detectors, vec![0, 1]);
        assert!((dem.entries[0].prob - 0.25).abs() < 1e-12);
    }

    #[test]
    fn equal_signatures_combine_by_xor_rule() {
        use crate::circuit::Instruction as I;
        let c = Circuit::new(vec![
            I::Init0(0),
            I::Init0(1),
            I::Zerr(0.1, 0),
            I::Zerr(0.2, 0),
            I::Mx(0),
            I::Mx(1),
            I::Detector(vec![0, 1]),
            I::Detector(vec![0, 1]),
        ])
        .unwrap();
        let dem = build_dem(&c).unwrap();
        assert_eq!(dem.entries.len(), 1);
        let expect = 0.1 * 0.8 + 0.2 * 0.9;
        assert!((dem.entries[0].prob - expect).abs() < 1e-12);
    }

    #[test]
    fn lattice_dem_is_fully_decomposed() {
        let c = l4_noisy(1e-3, 0.0);
        let dem = build_dem(&c).unwrap();
        assert!(!dem.entries.is_empty());
        for e in &dem.entries {
            assert!(e.detectors.len() <= 2 && !e.detectors.is_empty());
            // Both detectors of every entry live in one sector.
            if e.detectors.len() == 2 {
                assert_eq!(
                    dem.det_sector[e.detectors[0] as usize],
                    dem.det_sector[e.detectors[1] as usize]
                );
            }
        }
        // Two sectors, primal first.
        assert_eq!(dem.det_sector.iter().copied().max(), Some(1));
        assert_eq!(dem.det_sector[0], 0);
    }

    #[test]
    fn dephasing_only_dem_is_one_entry_per_qubit() {
        // One Z class per qubit. Checked at L=6, measured at protocol end so
        // every qubit has nonzero residence; at L=6 no two qubits share a
        // detector pair, so entries count the data qubits exactly.
        use crate::compiler::{compile_protocol, MeasureMode, Protocol};
        let g = build_rhg(6).unwrap();
        let part = partition_slabs(&g, 1).unwrap();
        let o = emission_order(&g, &part).unwrap();
        let c = compile_protocol(&g, &o, Protocol::S1, MeasureMode::AtEnd).unwrap();
        let spec = NoiseSpec { eta_z: 1e-4, ..Default::default() };
        let noisy = attach_dephasing(&c, &spec).unwrap();
        let dem = build_dem(&noisy).unwrap();
        assert_eq!(dem.entries.len(), g.n_qubits());
        for e in &dem.entries {
            assert_eq!(e.detectors.len(), 2);
        }
    }

    #[test]
    fn dephasing_only_dem_at_l4_merges_degenerate_pairs() {
        // With measure-asap, a few qubits exit with zero residence (no ZERR)
        // and L=4 wraps antipodal dual qubits onto identical signatures:
        // the honest count is 33, not 48.
        let c = l4_noisy(0.0, 1e-4);
        let dem = build_dem(&c).unwrap();
        assert_eq!(dem.entries.len(), 33);
    }

    #[test]
    fn sampling_frequency_matches_enumerated_probability() {
        use crate::sim::frame_sample;
        // Small circuit: empirical detector-flip rate of the single fault
        // class tracks its DEM probability.
        use crate::circuit::Instruction as I;
        let c = Circuit::new(vec![
            I::Init0(0),
            I::Init0(1),
            I::Zerr(0.05, 0),
            I::Mx(0),
            I::Mx(1),
            I::Detector(vec![0, 1]),
            I::Detector(vec![0, 1]),
        ])
        .unwrap();
        let dem = build_dem(&c).unwrap();
        let p = dem.entries[0].prob;
        let shots = 200_000u64;
        let mut hits = 0u64;
        for s in 0..shots {
            if frame_sample(&c, 31337, s).detectors.get(0) {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / shots as f64;
        let sigma = (p * (1.0 - p) / shots as f64).sqrt();
        assert!((p_hat - p).abs() < 4.0 * sigma, "{p_hat} vs {p}");
    }

    #[test]
    fn text_round_trip() {
        let c = l4_noisy(1e-3, 1e-4);
        let dem = build_dem(&c).unwrap();
        let text = dem.emit();
        let parsed = DetectorErrorModel::parse(&text).unwrap();
        assert_eq!(parsed.emit(), text);
        assert_eq!(parsed.entries.len(), dem.entries.len());
        assert_eq!(parsed.det_sector, dem.det_sector);
    }

    #[test]
    fn lattice_has_no_undetectable_entries_at_l4() {
        let c = l4_noisy(1e-3, 1e-4);
        let dem = build_dem(&c).unwrap();
        assert!(
            dem.undetectable.is_empty(),
            "undetectable logical fault classes: {:?}",
            dem.undetectable
        );
    }
}
