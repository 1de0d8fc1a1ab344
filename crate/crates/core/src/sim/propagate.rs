//! Symbolic propagation of single faults to measurement flips.
//!
//! Two routes compute the same thing: [`propagate_fault`] pushes one Pauli
//! forward through the remaining circuit, and [`enumerate_fault_effects`]
//! sweeps the circuit once backward, maintaining per-qubit influence maps
//! (which measurement records an X or Z inserted *here* would flip). The
//! backward sweep costs one pass for all fault locations and feeds the
//! detector error model; the forward route is kept as an independent check.

use crate::bits::BitVec;
use crate::circuit::{Circuit, Instruction};
use crate::{Error, Result};

/// A single elementary fault drawn from a noise instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliTerm {
    /// 1 = X, 2 = Y, 3 = Z on the instruction's single operand.
    Single(u8),
    /// Two-qubit Pauli, encoded `4 * first + second`, value in 1..=15.
    Pair(u8),
    /// Heralded erasure of the instruction's operand. The `z_flip` half is
    /// meaningful in fault logs; as a location it stands for "erased, then
    /// Z with probability 1/2".
    Erase { z_flip: bool },
}

/// Decode a `Pair` code into (first, second) with 0=I, 1=X, 2=Y, 3=Z.
#[inline]
pub fn pauli_pair(code: u8) -> (u8, u8) {
    (code >> 2, code & 3)
}

/// Where one fault lands.
#[derive(Clone, Debug, PartialEq)]
pub struct FaultEffect {
    /// Index of the noise instruction.
    pub instr: u32,
    pub term: PauliTerm,
    /// Probability share: p/3 for DEPOL1 terms, p/15 for DEPOL2 terms, the
    /// raw rate for ZERR, the erasure rate for HERALD_ERASE.
    pub prob: f64,
    /// Flipped data MX records, ascending. For `Erase` these are the flips
    /// of the Z half.
    pub record_flips: Vec<u32>,
    /// Flipped detectors, ascending.
    pub detectors: Vec<u32>,
    /// Flipped observables, as a bitmask.
    pub observables: u8,
}

/// Maps from measurement records to the detectors/observables they enter.
pub struct RecordIncidence {
    pub det_of_record: Vec<Vec<u32>>,
    pub obs_of_record: Vec<u8>,
    /// Data qubit measured by each record, u32::MAX for MZ records.
    pub qubit_of_record: Vec<u32>,
}

impl RecordIncidence {
    pub fn build(c: &Circuit) -> Result<Self> {
        let n = c.n_records as usize;
        let mut det_of_record = vec![Vec::new(); n];
        let mut obs_of_record = vec![0u8; n];
        let mut qubit_of_record = vec![u32::MAX; n];
        let mut rec = 0u32;
        let mut det = 0u32;
        for inst in &c.instructions {
            match *inst {
                Instruction::Mx(q) => {
                    qubit_of_record[rec as usize] = q;
                    rec += 1;
                }
                Instruction::Mz(_) => rec += 1,
                Instruction::Detector(ref recs) => {
                    for &r in recs {
                        if qubit_of_record[r as usize] == u32::MAX {
                            return Err(Error::Dem(format!(
                                "detector {det} references MZ record {r}; ancilla outcomes are discarded"
                            )));
                        }
                        det_of_record[r as usize].push(det);
                    }
                    det += 1;
                }
                Instruction::Observable(k, ref recs) => {
                    for &r in recs {
                        obs_of_record[r as usize] ^= 1 << k;
                    }
                }
                _ => {}
            }
        }
        Ok(RecordIncidence { det_of_record, obs_of_record, qubit_of_record })
    }

    /// Fold record flips into (detectors, observable mask).
    pub fn signature(&self, record_flips: &[u32]) -> (Vec<u32>, u8) {
        let mut dets: Vec<u32> = Vec::new();
        let mut obs = 0u8;
        for &r in record_flips {
            dets.extend_from_slice(&self.det_of_record[r as usize]);
            obs ^= self.obs_of_record[r as usize];
        }
        dets.sort_unstable();
        // XOR semantics: keep detectors hit an odd number of times.
        let mut out = Vec::with_capacity(dets.len());
        let mut i = 0;
        while i < dets.len() {
            let mut j = i;
            while j < dets.len() && dets[j] == dets[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                out.push(dets[i]);
            }
            i = j;
        }
        (out, obs)
    }
}

/// Propagate one fault forward through the circuit; deterministic and
/// independent of the backward sweep.
pub fn propagate_fault(c: &Circuit, instr: u32, term: PauliTerm) -> Result<FaultEffect> {
    let incidence = RecordIncidence::build(c)?;
    let n = c.n_qubits as usize;
    let mut x = vec![false; n];
    let mut z = vec![false; n];
    let mut record_flips = Vec::new();
    let mut rec = 0u32;
    let apply = |x: &mut [bool], z: &mut [bool], q: u32, p: u8| {
        if p == 1 || p == 2 {
            x[q as usize] = !x[q as usize];
        }
        if p == 2 || p == 3 {
            z[q as usize] = !z[q as usize];
        }
    };
    for (idx, inst) in c.instructions.iter().enumerate() {
        if idx as u32 == instr {
            match (term, inst) {
                (PauliTerm::Single(p), Instruction::Depol1(_, q))
                | (PauliTerm::Single(p), Instruction::Zerr(_, q)) => apply(&mut x, &mut z, *q, p),
                (PauliTerm::Pair(code), Instruction::Depol2(_, a, b)) => {
                    let (pa, pb) = pauli_pair(code);
                    apply(&mut x, &mut z, *a, pa);
                    apply(&mut x, &mut z, *b, pb);
                }
                (PauliTerm::Erase { z_flip }, Instruction::HeraldErase(_, q)) => {
                    if z_flip {
                        apply(&mut x, &mut z, *q, 3);
                    }
                }
                _ => {
                    return Err(Error::Dem(format!(
                        "fault term does not match instruction {instr}"
                    )))
                }
            }
        }
        match *inst {
            Instruction::InitP(q) | Instruction::Init0(q) => {
                x[q as usize] = false;
                z[q as usize] = false;
            }
            Instruction::H(q) => {
                let q = q as usize;
                let t = x[q];
                x[q] = z[q];
                z[q] = t;
            }
            Instruction::Cz(a, b) => {
                let (a, b) = (a as usize, b as usize);
                z[a] ^= x[b];
                z[b] ^= x[a];
            }
            Instruction::Cnot(cq, t) => {
                let (cq, t) = (cq as usize, t as usize);
                x[t] ^= x[cq];
                z[cq] ^= z[t];
            }
            Instruction::Mx(q) => {
                if z[q as usize] {
                    record_flips.push(rec);
                }
                rec += 1;
            }
            Instruction::Mz(_) => rec += 1,
            _ => {}
        }
    }
    let (detectors, observables) = incidence.signature(&record_flips);
    let prob = term_prob(&c.instructions[instr as usize], term)?;
    Ok(FaultEffect { instr, term, prob, record_flips, detectors, observables })
}

fn term_prob(inst: &Instruction, term: PauliTerm) -> Result<f64> {
    Ok(match (inst, term) {
        (Instruction::Depol1(p, _), PauliTerm::Single(_)) => p / 3.0,
        (Instruction::Depol2(p, _, _), PauliTerm::Pair(_)) => p / 15.0,
        (Instruction::Zerr(p, _), PauliTerm::Single(3)) => *p,
        (Instruction::HeraldErase(p, _), PauliTerm::Erase { .. }) => *p,
        _ => return Err(Error::Dem("fault term does not match instruction".into())),
    })
}

/// One backward sweep: the effect of every elementary fault location.
///
/// Output order: instruction order, then term order (X, Y, Z for DEPOL1;
/// pair codes 1..=15 for DEPOL2). Erasures appear once each, with the flips
/// their Z half would cause.
pub fn enumerate_fault_effects(c: &Circuit) -> Result<Vec<FaultEffect>> {
    let incidence = RecordIncidence::build(c)?;
    let n = c.n_qubits as usize;
    let n_rec = c.n_records as usize;
    let mut xmap: Vec<BitVec> = (0..n).map(|_| BitVec::zeros(n_rec)).collect();
    let mut zmap: Vec<BitVec> = (0..n).map(|_| BitVec::zeros(n_rec)).collect();

    // Record index of each measurement instruction, precomputed forward.
    let mut rec_at = vec![u32::MAX; c.instructions.len()];
    let mut rec = 0u32;
    for (idx, inst) in c.instructions.iter().enumerate() {
        if matches!(inst, Instruction::Mx(_) | Instruction::Mz(_)) {
            rec_at[idx] = rec;
            rec += 1;
        }
    }

    let mut scratch = BitVec::zeros(n_rec);
    // Collected in reverse; flipped at the end.
    let mut out: Vec<FaultEffect> = Vec::new();
    let emit = |instr: usize,
                    term: PauliTerm,
                    prob: f64,
                    flips: &BitVec,
                    out: &mut Vec<FaultEffect>| {
        let record_flips = flips.ones();
        let (detectors, observables) = incidence.signature(&record_flips);
        out.push(FaultEffect {
            instr: instr as u32,
            term,
            prob,
            record_flips,
            detectors,
            observables,
        });
    };

    for (idx, inst) in c.instructions.iter().enumerate().rev() {
        match *inst {
            Instruction::Mx(q) => {
                // A Z (or Y) just before MX flips this record; X does not.
                let q = q as usize;
                xmap[q].clear();
                zmap[q].clear();
                zmap[q].set(rec_at[idx] as usize, true);
            }
            Instruction::Mz(q) => {
                // Ancilla outcomes are discarded; nothing downstream sees them.
                let q = q as usize;
                xmap[q].clear();
                zmap[q].clear();
            }
            Instruction::InitP(q) | Instruction::Init0(q) => {
                let q = q as usize;
                xmap[q].clear();
                zmap[q].clear();
            }
            Instruction::H(q) => {
                let q = q as usize;
                std::mem::swap(&mut xmap[q], &mut zmap[q]);
            }
            Instruction::Cz(a, b) => {
                // X_a -> X_a Z_b and X_b -> Z_a X_b; Z maps unchanged.
                let (a, b) = (a as usize, b as usize);
                scratch.clear();
                scratch.xor_with(&zmap[b]);
                xmap[a].xor_with(&scratch);
                scratch.clear();
                scratch.xor_with(&zmap[a]);
                xmap[b].xor_with(&scratch);
            }
            Instruction::Cnot(cq, t) => {
                // X_c -> X_c X_t; Z_t -> Z_c Z_t.
                let (cq, t) = (cq as usize, t as usize);
                scratch.clear();
                scratch.xor_with(&xmap[t]);
                xmap[cq].xor_with(&scratch);
                scratch.clear();
                scratch.xor_with(&zmap[cq]);
                zmap[t].xor_with(&scratch);
            }
            Instruction::Depol1(p, q) => {
                if p > 0.0 {
                    let q = q as usize;
                    for pauli in 1u8..=3 {
                        scratch.clear();
                        if pauli == 1 || pauli == 2 {
                            scratch.xor_with(&xmap[q]);
                        }
                        if pauli == 2 || pauli == 3 {
                            scratch.xor_with(&zmap[q]);
                        }
                        emit(idx, PauliTerm::Single(pauli), p / 3.0, &scratch, &mut out);
                    }
                }
            }
            Instruction::Depol2(p, a, b) => {
                if p > 0.0 {
                    let (a, b) = (a as usize, b as usize);
                    for code in 1u8..=15 {
                        let (pa, pb) = pauli_pair(code);
                        scratch.clear();
                        if pa == 1 || pa == 2 {
                            scratch.xor_with(&xmap[a]);
                        }
                        if pa == 2 || pa == 3 {
                            scratch.xor_with(&zmap[a]);
                        }
                        if pb == 1 || pb == 2 {
                            scratch.xor_with(&xmap[b]);
                        }
                        if pb == 2 || pb == 3 {
                            scratch.xor_with(&zmap[b]);
                        }
                        emit(idx, PauliTerm::Pair(code), p / 15.0, &scratch, &mut out);
                    }
                }
            }
            Instruction::Zerr(p, q) => {
                if p > 0.0 {
                    emit(idx, PauliTerm::Single(3), p, &zmap[q as usize], &mut out);
                }
            }
            Instruction::HeraldErase(p, q) => {
                if p > 0.0 {
                    emit(
                        idx,
                        PauliTerm::Erase { z_flip: true },
                        p,
                        &zmap[q as usize],
                        &mut out,
                    );
                }
            }
            _ => {}
        }
    }
    out.reverse();
    Ok(out)
}
