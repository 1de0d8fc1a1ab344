//! Stabilizer tableau simulator (destabilizer/stabilizer rows with phase
//! tracking), used as the exact oracle for protocol verification.
//!
//! Random measurement outcomes are resolved by an explicit convention
//! (default +1) so oracle runs are reproducible. Phases are tracked exactly,
//! which is what makes the stabilizer-membership check trustworthy.

use crate::bits::BitVec;
use crate::circuit::{Circuit, Instruction};

/// Result of a single measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureOutcome {
    Deterministic(bool),
    /// Outcome was random; the recorded value is the chosen convention.
    Random(bool),
}

impl MeasureOutcome {
    pub fn value(self) -> bool {
        match self {
            MeasureOutcome::Deterministic(v) | MeasureOutcome::Random(v) => v,
        }
    }
}

/// 2n+1 rows: destabilizers, stabilizers, scratch.
#[derive(Clone)]
pub struct Tableau {
    n: usize,
    xs: Vec<BitVec>,
    zs: Vec<BitVec>,
    /// Phase bit per row: 1 means the row carries sign -1.
    r: BitVec,
}

impl Tableau {
    /// All qubits in |0>.
    pub fn new(n: usize) -> Self {
        let rows = 2 * n + 1;
        let mut t = Tableau {
            n,
            xs: vec![BitVec::zeros(n); rows],
            zs: vec![BitVec::zeros(n); rows],
            r: BitVec::zeros(rows),
        };
        for q in 0..n {
            t.xs[q].set(q, true); // destabilizer X_q
            t.zs[n + q].set(q, true); // stabilizer Z_q
        }
        t
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn h(&mut self, q: u32) {
        let q = q as usize;
        for i in 0..2 * self.n {
            let x = self.xs[i].get(q);
            let z = self.zs[i].get(q);
            if x && z {
                self.r.flip(i);
            }
            self.xs[i].set(q, z);
            self.zs[i].set(q, x);
        }
    }

    pub fn s(&mut self, q: u32) {
        let q = q as usize;
        for i in 0..2 * self.n {
            let x = self.xs[i].get(q);
            let z = self.zs[i].get(q);
            if x && z {
                self.r.flip(i);
            }
            if x {
                self.zs[i].flip(q);
            }
        }
    }

    pub fn x(&mut self, q: u32) {
        let q = q as usize;
        for i in 0..2 * self.n {
            if self.zs[i].get(q) {
                self.r.flip(i);
            }
        }
    }

    pub fn z(&mut self, q: u32) {
        let q = q as usize;
        for i in 0..2 * self.n {
            if self.xs[i].get(q) {
                self.r.flip(i);
            }
        }
    }

    pub fn cnot(&mut self, c: u32, t: u32) {
        let (c, t) = (c as usize, t as usize);
        for i in 0..2 * self.n {
            let xc = self.xs[i].get(c);
            let zc = self.zs[i].get(c);
            let xt = self.xs[i].get(t);
            let zt = self.zs[i].get(t);
            if xc && zt && (xt == zc) {
                self.r.flip(i);
            }
            if xc {
                self.xs[i].flip(t);
            }
            if zt {
                self.zs[i].flip(c);
            }
        }
    }

    pub fn cz(&mut self, a: u32, b: u32) {
        let (a, b) = (a as usize, b as usize);
        for i in 0..2 * self.n {
            let xa = self.xs[i].get(a);
            let za = self.zs[i].get(a);
            let xb = self.xs[i].get(b);
            let zb = self.zs[i].get(b);
            if xa && xb && (za != zb) {
                self.r.flip(i);
            }
            if xa {
                self.zs[i].flip(b);
            }
            if xb {
                self.zs[i].flip(a);
            }
        }
    }

    pub fn swap(&mut self, a: u32, b: u32) {
        let (a, b) = (a as usize, b as usize);
        for i in 0..2 * self.n {
            let (xa, xb) = (self.xs[i].get(a), self.xs[i].get(b));
            self.xs[i].set(a, xb);
            self.xs[i].set(b, xa);
            let (za, zb) = (self.zs[i].get(a), self.zs[i].get(b));
            self.zs[i].set(a, zb);
            self.zs[i].set(b, za);
        }
    }

    /// Phase exponent of multiplying row `i` onto row `h` (Aaronson-Gottesman
    /// rowsum), word-parallel. Leaves row `h` = row_h * row_i.
    fn rowsum(&mut self, h: usize, i: usize) {
        let mut plus: i64 = 0;
        let mut minus: i64 = 0;
        let n_words = self.xs[h].len().div_ceil(64);
        for w in 0..n_words {
            let xi = word(&self.xs[i], w);
            let zi = word(&self.zs[i], w);
            let xh = word(&self.xs[h], w);
            let zh = word(&self.zs[h], w);
            let yi = xi & zi;
            let xi_only = xi & !zi;
            let zi_only = !xi & zi;
            let p = (yi & zh & !xh) | (xi_only & zh & xh) | (zi_only & xh & !zh);
            let m = (yi & xh & !zh) | (xi_only & zh & !xh) | (zi_only & xh & zh);
            plus += p.count_ones() as i64;
            minus += m.count_ones() as i64;
        }
        let total = 2 * (self.r.get(h) as i64) + 2 * (self.r.get(i) as i64) + plus - minus;
        // Products of commuting rows land on 0 or 2 (mod 4). Destabilizer
        // rows may hit odd values; their phases are never read.
        self.r.set(h, total.rem_euclid(4) == 2);
        // xs[h] ^= xs[i]; zs[h] ^= zs[i] (split borrows via index order)
        let (xi_row, zi_row) = (self.xs[i].clone(), self.zs[i].clone());
        self.xs[h].xor_with(&xi_row);
        self.zs[h].xor_with(&zi_row);
    }

    /// Measure Z on qubit `q`. For random outcomes the collapse uses
    /// `random_choice` as the recorded value.
    pub fn measure_z(&mut self, q: u32, random_choice: bool) -> MeasureOutcome {
        let q = q as usize;
        let n = self.n;
        let p = (n..2 * n).find(|&i| self.xs[i].get(q));
        match p {
            Some(p) => {
                for i in 0..2 * n {
                    if i != p && self.xs[i].get(q) {
                        self.rowsum(i, p);
                    }
                }
                // Destabilizer row p-n becomes the old stabilizer row p.
                self.xs[p - n] = self.xs[p].clone();
                self.zs[p - n] = self.zs[p].clone();
                self.r.set(p - n, self.r.get(p));
                self.xs[p].clear();
                self.zs[p].clear();
                self.zs[p].set(q, true);
                self.r.set(p, random_choice);
                MeasureOutcome::Random(random_choice)
            }
            None => {
                // Deterministic: accumulate into the scratch row.
                let scratch = 2 * n;
                self.xs[scratch].clear();
                self.zs[scratch].clear();
                self.r.set(scratch, false);
                for i in 0..n {
                    if self.xs[i].get(q) {
                        self.rowsum(scratch, i + n);
                    }
                }
                MeasureOutcome::Deterministic(self.r.get(scratch))
            }
        }
    }

    pub fn measure_x(&mut self, q: u32, random_choice: bool) -> MeasureOutcome {
        self.h(q);
        let m = self.measure_z(q, random_choice);
        self.h(q);
        m
    }

    /// Measure Z forcing the outcome when it is random; returns Err when the
    /// outcome is deterministic and disagrees with `want`.
    pub fn force_measure_z(&mut self, q: u32, want: bool) -> Result<(), bool> {
        match self.measure_z(q, want) {
            MeasureOutcome::Random(_) => Ok(()),
            MeasureOutcome::Deterministic(v) if v == want => Ok(()),
            MeasureOutcome::Deterministic(v) => Err(v),
        }
    }

    pub fn force_measure_x(&mut self, q: u32, want: bool) -> Result<(), bool> {
        self.h(q);
        let out = self.force_measure_z(q, want);
        self.h(q);
        out
    }

    /// Reset to |0>.
    pub fn reset_zero(&mut self, q: u32) {
        if self.measure_z(q, false).value() {
            self.x(q);
        }
    }

    /// Reset to |+>.
    pub fn reset_plus(&mut self, q: u32) {
        self.reset_zero(q);
        self.h(q);
    }

    /// True iff the Pauli with the given X/Z support and sign (+1 for
    /// `negative = false`) is an element of the stabilizer group.
    pub fn contains_stabilizer(&mut self, x_supp: &[u32], z_supp: &[u32], negative: bool) -> bool {
        let n = self.n;
        let mut px = BitVec::zeros(n);
        let mut pz = BitVec::zeros(n);
        for &q in x_supp {
            px.flip(q as usize);
        }
        for &q in z_supp {
            pz.flip(q as usize);
        }
        // Assemble the candidate product in the scratch row: multiply the
        // stabilizers whose destabilizer partners anticommute with P.
        let scratch = 2 * n;
        self.xs[scratch].clear();
        self.zs[scratch].clear();
        self.r.set(scratch, false);
        for i in 0..n {
            if anticommutes(&self.xs[i], &self.zs[i], &px, &pz) {
                self.rowsum(scratch, i + n);
            }
        }
        self.xs[scratch] == px && self.zs[scratch] == pz && self.r.get(scratch) == negative
    }

    /// Stabilizer rows in canonical (row-reduced) form, for state equality.
    pub fn canonical_stabilizers(&self) -> Vec<(BitVec, BitVec, bool)> {
        let n = self.n;
        let mut t = self.clone();
        let mut pivot_row = n;
        // X block first, then Z block, standard symplectic echelon form.
        for (use_x, q) in (0..n).map(|q| (true, q)).chain((0..n).map(|q| (false, q))) {
            let found = (pivot_row..2 * n).find(|&i| {
                if use_x {
                    t.xs[i].get(q)
                } else {
                    !t.xs[i].get(q) && t.zs[i].get(q)
                }
            });
            let Some(src) = found else { continue };
            t.xs.swap(pivot_row, src);
            t.zs.swap(pivot_row, src);
            let (a, b) = (t.r.get(pivot_row), t.r.get(src));
            t.r.set(pivot_row, b);
            t.r.set(src, a);
            for i in n..2 * n {
                if i != pivot_row {
                    let hit = if use_x { t.xs[i].get(q) } else { t.zs[i].get(q) };
                    if hit {
                        t.rowsum(i, pivot_row);
                    }
                }
            }
            pivot_row += 1;
            if pivot_row == 2 * n {
                break;
            }
        }
        (n..2 * n)
            .map(|i| (t.xs[i].clone(), t.zs[i].clone(), t.r.get(i)))
            .collect()
    }
}

#[inline]
fn word(v: &BitVec, w: usize) -> u64 {
    // BitVec does not expose words; reconstruct via ones() would be slow, so
    // keep a small accessor here instead.
    v.word(w)
}

fn anticommutes(ax: &BitVec, az: &BitVec, bx: &BitVec, bz: &BitVec) -> bool {
    let mut acc = 0u32;
    for w in 0..ax.len().div_ceil(64) {
        acc ^= (ax.word(w) & bz.word(w)).count_ones() & 1;
        acc ^= (az.word(w) & bx.word(w)).count_ones() & 1;
    }
    acc & 1 == 1
}

/// Outcome record of a tableau run.
pub struct TableauRun {
    pub tableau: Tableau,
    /// One entry per measurement record; None when the measurement was
    /// skipped (see `skip_data_mx`).
    pub records: Vec<Option<bool>>,
}

/// Execute a circuit on a fresh tableau, ignoring noise annotations.
///
/// Random measurement outcomes take the +1 convention. With `skip_data_mx`
/// the data-qubit X measurements are not performed (their record slots stay
/// `None`), leaving the final entangled state intact for verification.
pub fn run_circuit(c: &Circuit, skip_data_mx: bool) -> TableauRun {
    let mut t = Tableau::new(c.n_qubits as usize);
    let mut records = Vec::with_capacity(c.n_records as usize);
    for inst in &c.instructions {
        match *inst {
            Instruction::InitP(q) => t.reset_plus(q),
            Instruction::Init0(q) => t.reset_zero(q),
            Instruction::H(q) => t.h(q),
            Instruction::Cz(a, b) => t.cz(a, b),
            Instruction::Cnot(a, b) => t.cnot(a, b),
            Instruction::Mx(q) => {
                if skip_data_mx {
                    records.push(None);
                } else {
                    records.push(Some(t.measure_x(q, false).value()));
                }
            }
            Instruction::Mz(q) => records.push(Some(t.measure_z(q, false).value())),
            _ => {}
        }
    }
    TableauRun { tableau: t, records }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_same_state(a: &Tableau, b: &Tableau) {
        assert_eq!(a.canonical_stabilizers(), b.canonical_stabilizers());
    }

    #[test]
    fn plus_state_stabilizer() {
        let mut t = Tableau::new(1);
        t.reset_plus(0);
        assert!(t.contains_stabilizer(&[0], &[], false));
        assert!(!t.contains_stabilizer(&[0], &[], true));
        assert!(!t.contains_stabilizer(&[], &[0], false));
    }

    #[test]
    fn bell_pair_stabilizers() {
        let mut t = Tableau::new(2);
        t.reset_plus(0);
        t.cnot(0, 1);
        assert!(t.contains_stabilizer(&[0, 1], &[], false));
        assert!(t.contains_stabilizer(&[], &[0, 1], false));
        assert!(!t.contains_stabilizer(&[0], &[], false));
    }

    #[test]
    fn measurement_collapse_and_determinism() {
        let mut t = Tableau::new(1);
        t.reset_plus(0);
        let m = t.measure_z(0, true);
        assert_eq!(m, MeasureOutcome::Random(true));
        // Collapsed: repeat measurement is deterministic.
        assert_eq!(t.measure_z(0, false), MeasureOutcome::Deterministic(true));
        t.x(0);
        assert_eq!(t.measure_z(0, false), MeasureOutcome::Deterministic(false));
    }

    #[test]
    fn minus_state_phase_is_tracked() {
        let mut t = Tableau::new(1);
        t.reset_plus(0);
        t.z(0); // |->
        assert!(t.contains_stabilizer(&[0], &[], true));
        assert_eq!(t.measure_x(0, false), MeasureOutcome::Deterministic(true));
    }

    /// The ancilla-mediated CZ identity: CZ_{i,j} |+>_Q|+>_i|+>_j equals
    /// SWAP_{Q,i} CZ_{Q,j} on the same state.
    #[test]
    fn ancilla_mediated_cz_identity() {
        let mut lhs = Tableau::new(3); // qubits: Q=0, i=1, j=2
        for q in 0..3 {
            lhs.reset_plus(q);
        }
        lhs.cz(1, 2);
        let mut rhs = Tableau::new(3);
        for q in 0..3 {
            rhs.reset_plus(q);
        }
        rhs.cz(0, 2);
        rhs.swap(0, 1);
        assert_same_state(&lhs, &rhs);
    }

    /// The swap-elision identity: CZ_{Q,j} SWAP_{Q,j} |phi>_Q |+>_j equals
    /// H_Q CNOT_{Q,j} |phi>_Q |0>_j, for |phi> in {|0>, |+>, |i>}.
    #[test]
    fn swap_elision_identity() {
        for phi in 0..3 {
            let prep = |t: &mut Tableau| match phi {
                0 => t.reset_zero(0),
                1 => t.reset_plus(0),
                _ => {
                    t.reset_plus(0);
                    t.s(0); // |i> = S|+>
                }
            };
            let mut lhs = Tableau::new(2);
            prep(&mut lhs);
            lhs.reset_plus(1);
            lhs.swap(0, 1);
            lhs.cz(0, 1);
            let mut rhs = Tableau::new(2);
            prep(&mut rhs);
            rhs.reset_zero(1);
            rhs.cnot(0, 1);
            rhs.h(0);
            assert_same_state(&lhs, &rhs);
        }
    }

    #[test]
    fn canonical_form_identifies_equal_states() {
        // Same graph state built two ways: edge order must not matter.
        let mut a = Tableau::new(3);
        let mut b = Tableau::new(3);
        for q in 0..3 {
            a.reset_plus(q);
            b.reset_plus(q);
        }
        a.cz(0, 1);
        a.cz(1, 2);
        b.cz(1, 2);
        b.cz(0, 1);
        assert_same_state(&a, &b);
        b.cz(0, 2);
        assert_ne!(a.canonical_stabilizers(), b.canonical_stabilizers());
    }

    #[test]
    fn force_measure_detects_contradiction() {
        let mut t = Tableau::new(1);
        // |0>: forcing Z = 1 must fail.
        assert!(t.force_measure_z(0, true).is_err());
        assert!(t.force_measure_z(0, false).is_ok());
    }

    #[test]
    fn run_circuit_executes_cluster_stabilizers() {
        // Three-qubit path graph via the single-emitter identity chain,
        // checked against the direct CZ construction.
        use crate::circuit::{Circuit, Instruction as I};
        let c = Circuit::new(vec![
            I::InitP(3),
            I::Init0(0),
            I::Cnot(3, 0),
            I::H(3),
            I::Init0(1),
            I::Cnot(3, 1),
            I::H(3),
            I::Init0(2),
            I::Cnot(3, 2),
            I::H(3),
            I::Cz(3, 2),
        ])
        .unwrap();
        let mut run = run_circuit(&c, true);
        // Path 0-1-2: X0 Z1, Z0 X1 Z2, Z1 X2, ancilla in |+>.
        assert!(run.tableau.contains_stabilizer(&[0], &[1], false));
        assert!(run.tableau.contains_stabilizer(&[1], &[0, 2], false));
        assert!(run.tableau.contains_stabilizer(&[2], &[1], false));
        assert!(run.tableau.contains_stabilizer(&[3], &[], false));
    }
}
