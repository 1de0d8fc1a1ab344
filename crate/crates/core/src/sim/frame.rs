//! Pauli-frame Monte Carlo sampler.
//!
//! Tracks one shot's accumulated Pauli error as X/Z flip bits per qubit,
//! conjugated through each Clifford gate. An MX outcome is flipped by the
//! qubit's Z bit at measurement time, an MZ outcome by its X bit. Noise
//! draws are keyed by `(master seed, shot index, instruction index)`, so
//! shots are order-independent and parallelize trivially.

use crate::bits::BitVec;
use crate::circuit::{Circuit, Instruction};
use crate::rng::{draw, unit_f64};
use crate::sim::propagate::{pauli_pair, PauliTerm};

/// One sampled shot.
#[derive(Clone, Debug)]
pub struct FrameSample {
    /// Detector flip bits, in DETECTOR order.
    pub detectors: BitVec,
    /// Observable flip bits (bit k = observable k).
    pub observables: u8,
    /// Qubits heralded as erased this shot, ascending.
    pub erasures: Vec<u32>,
    /// Raw measurement-record flips.
    pub record_flips: BitVec,
}

/// Reusable frame state.
pub struct FrameSimulator {
    x: Vec<bool>,
    z: Vec<bool>,
}

impl FrameSimulator {
    pub fn new(n_qubits: u32) -> Self {
        FrameSimulator { x: vec![false; n_qubits as usize], z: vec![false; n_qubits as usize] }
    }

    /// Sample one shot. When `fault_log` is given, every fired noise event is
    /// appended as `(instruction index, term)`.
    pub fn sample(
        &mut self,
        c: &Circuit,
        master_seed: u64,
        shot: u64,
        mut fault_log: Option<&mut Vec<(u32, PauliTerm)>>,
    ) -> FrameSample {
        self.x.fill(false);
        self.z.fill(false);
        let mut record_flips = BitVec::zeros(c.n_records as usize);
        let mut detectors = BitVec::zeros(c.n_detectors as usize);
        let mut observables = 0u8;
        let mut erasures = Vec::new();
        let mut rec = 0usize;
        let mut det = 0usize;
        for (idx, inst) in c.instructions.iter().enumerate() {
            match *inst {
                Instruction::InitP(q) | Instruction::Init0(q) => {
                    self.x[q as usize] = false;
                    self.z[q as usize] = false;
                }
                Instruction::H(q) => {
                    let q = q as usize;
                    std::mem::swap(&mut self.x[q], &mut self.z[q]);
                }
                Instruction::Cz(a, b) => {
                    let (a, b) = (a as usize, b as usize);
                    self.z[a] ^= self.x[b];
                    self.z[b] ^= self.x[a];
                }
                Instruction::Cnot(cq, t) => {
                    let (cq, t) = (cq as usize, t as usize);
                    self.x[t] ^= self.x[cq];
                    self.z[cq] ^= self.z[t];
                }
                Instruction::Mx(q) => {
                    if self.z[q as usize] {
                        record_flips.set(rec, true);
                    }
                    rec += 1;
                }
                Instruction::Mz(q) => {
                    if self.x[q as usize] {
                        record_flips.set(rec, true);
                    }
                    rec += 1;
                }
                Instruction::Depol1(p, q) => {
                    if p > 0.0 && unit_f64(draw(master_seed, shot, 2 * idx as u64)) < p {
                        let which = draw(master_seed, shot, 2 * idx as u64 + 1) % 3;
                        self.apply_single(q, which as u8 + 1);
                        if let Some(log) = fault_log.as_deref_mut() {
                            log.push((idx as u32, PauliTerm::Single(which as u8 + 1)));
                        }
                    }
                }
                Instruction::Depol2(p, a, b) => {
                    if p > 0.0 && unit_f64(draw(master_seed, shot, 2 * idx as u64)) < p {
                        let which = (draw(master_seed, shot, 2 * idx as u64 + 1) % 15) as u8 + 1;
                        let (pa, pb) = pauli_pair(which);
                        self.apply_single(a, pa);
                        self.apply_single(b, pb);
                        if let Some(log) = fault_log.as_deref_mut() {
                            log.push((idx as u32, PauliTerm::Pair(which)));
                        }
                    }
                }
                Instruction::Zerr(p, q) => {
                    if p > 0.0 && unit_f64(draw(master_seed, shot, 2 * idx as u64)) < p {
                        self.z[q as usize] = !self.z[q as usize];
                        if let Some(log) = fault_log.as_deref_mut() {
                            log.push((idx as u32, PauliTerm::Single(3)));
                        }
                    }
                }
                Instruction::HeraldErase(p, q) => {
                    if p > 0.0 && unit_f64(draw(master_seed, shot, 2 * idx as u64)) < p {
                        erasures.push(q);
                        // Replacing by I/2 and measuring in X is a fair coin:
                        // realized as Z with probability 1/2.
                        let z_flip = draw(master_seed, shot, 2 * idx as u64 + 1) & 1 == 1;
                        if z_flip {
                            self.z[q as usize] = !self.z[q as usize];
                        }
                        if let Some(log) = fault_log.as_deref_mut() {
                            log.push((idx as u32, PauliTerm::Erase { z_flip }));
                        }
                    }
                }
                Instruction::Detector(ref recs) => {
                    let mut flip = false;
                    for &r in recs {
                        flip ^= record_flips.get(r as usize);
                    }
                    detectors.set(det, flip);
                    det += 1;
                }
                Instruction::Observable(k, ref recs) => {
                    let mut flip = false;
                    for &r in recs {
                        flip ^= record_flips.get(r as usize);
                    }
                    if flip {
                        observables ^= 1 << k;
                    }
                }
                Instruction::Tick => {}
            }
        }
        FrameSample { detectors, observables, erasures, record_flips }
    }

    #[inline]
    fn apply_single(&mut self, q: u32, pauli: u8) {
        // 1 = X, 2 = Y, 3 = Z; 0 = I is a no-op.
        let q = q as usize;
        match pauli {
            1 => self.x[q] = !self.x[q],
            2 => {
                self.x[q] = !self.x[q];
                self.z[q] = !self.z[q];
            }
            3 => self.z[q] = !self.z[q],
            _ => {}
        }
    }
}

/// Sample one shot of a circuit; reproducible in `(seed, shot_index)`.
pub fn frame_sample(c: &Circuit, master_seed: u64, shot: u64) -> FrameSample {
    FrameSimulator::new(c.n_qubits).sample(c, master_seed, shot, None)
}
