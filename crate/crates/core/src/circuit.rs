//! Timed Clifford circuits with noise annotations and detector definitions,
//! plus the line-oriented text format.
//!
//! Time is measured in ticks: one tick per construction step, delimited by
//! `TICK` instructions. Instructions before the first `TICK` belong to tick
//! 0. `DETECTOR` and `OBSERVABLE` lines carry absolute measurement-record
//! indices (both `MX` and `MZ` consume record slots, in instruction order).

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    /// Initialize a qubit in |+>.
    InitP(u32),
    /// Initialize a qubit in |0>.
    Init0(u32),
    H(u32),
    Cz(u32, u32),
    /// CNOT with the ancilla as control.
    Cnot(u32, u32),
    /// X-basis measurement (data qubits only).
    Mx(u32),
    /// Z-basis measurement (ancillas only).
    Mz(u32),
    Tick,
    /// Single-qubit depolarizing of the given strength.
    Depol1(f64, u32),
    /// Two-qubit depolarizing of the given strength.
    Depol2(f64, u32, u32),
    /// Stochastic Pauli-Z with the given rate.
    Zerr(f64, u32),
    /// Heralded erasure: mark lost and replace by the maximally mixed state.
    HeraldErase(f64, u32),
    /// Parity of the listed measurement records; deterministic without noise.
    Detector(Vec<u32>),
    /// Logical observable: index, then the records whose parity tracks it.
    Observable(u8, Vec<u32>),
}

impl Instruction {
    pub fn is_noise(&self) -> bool {
        matches!(
            self,
            Instruction::Depol1(..)
                | Instruction::Depol2(..)
                | Instruction::Zerr(..)
                | Instruction::HeraldErase(..)
        )
    }
}

/// Compiled circuit plus derived bookkeeping (recomputed after parsing, so
/// text round-trips carry the full structure).
#[derive(Clone, Debug)]
pub struct Circuit {
    pub instructions: Vec<Instruction>,
    pub n_qubits: u32,
    /// Data qubits are ids `0..n_data`; ancillas follow.
    pub n_data: u32,
    pub n_records: u32,
    pub n_detectors: u32,
    pub n_observables: u8,
    pub n_ticks: u32,
    /// Per data qubit: (emission tick, final gate tick).
    pub residence: Vec<(u32, u32)>,
    /// Per data qubit: its MX record index (u32::MAX if never measured).
    pub record_of_qubit: Vec<u32>,
    /// Per data qubit: tick of its MX (u32::MAX if never measured).
    pub mx_tick: Vec<u32>,
}

impl Circuit {
    /// Wrap a raw instruction list, deriving counts, records, and residence.
    pub fn new(instructions: Vec<Instruction>) -> Result<Self> {
        let mut c = Circuit {
            instructions,
            n_qubits: 0,
            n_data: 0,
            n_records: 0,
            n_detectors: 0,
            n_observables: 0,
            n_ticks: 0,
            residence: Vec::new(),
            record_of_qubit: Vec::new(),
            mx_tick: Vec::new(),
        };
        c.rebuild_metadata()?;
        Ok(c)
    }

    fn rebuild_metadata(&mut self) -> Result<()> {
        let mut max_q = 0u32;
        let mut init0: Vec<u32> = Vec::new();
        for inst in &self.instructions {
            match *inst {
                Instruction::InitP(q)
                | Instruction::Init0(q)
                | Instruction::H(q)
                | Instruction::Mx(q)
                | Instruction::Mz(q)
                | Instruction::Depol1(_, q)
                | Instruction::Zerr(_, q)
                | Instruction::HeraldErase(_, q) => max_q = max_q.max(q + 1),
                Instruction::Cz(a, b) | Instruction::Cnot(a, b) | Instruction::Depol2(_, a, b) => {
                    max_q = max_q.max(a + 1).max(b + 1)
                }
                _ => {}
            }
            if let Instruction::Init0(q) = *inst {
                init0.push(q);
            }
        }
        self.n_qubits = max_q;
        // Data qubits are exactly the INIT0 targets and must be a prefix.
        let n_data = init0.len() as u32;
        for &q in &init0 {
            if q >= n_data {
                return Err(Error::Compile(format!(
                    "data qubit ids must precede ancilla ids (INIT0 {q} with {n_data} data qubits)"
                )));
            }
        }
        self.n_data = n_data;

        let nd = n_data as usize;
        let mut emit_tick = vec![u32::MAX; nd];
        let mut last_gate = vec![0u32; nd];
        let mut mx_tick = vec![u32::MAX; nd];
        let mut record_of = vec![u32::MAX; nd];
        let mut tick = 0u32;
        let mut records = 0u32;
        let mut detectors = 0u32;
        let mut observables = 0u8;
        let mut touch = |q: u32, tick: u32, last_gate: &mut Vec<u32>| {
            if (q as usize) < nd {
                last_gate[q as usize] = tick;
            }
        };
        for inst in &self.instructions {
            match *inst {
                Instruction::Tick => tick += 1,
                Instruction::Init0(q) => emit_tick[q as usize] = tick,
                Instruction::H(q) => touch(q, tick, &mut last_gate),
                Instruction::Cz(a, b) | Instruction::Cnot(a, b) => {
                    touch(a, tick, &mut last_gate);
                    touch(b, tick, &mut last_gate);
                }
                Instruction::Mx(q) => {
                    if (q as usize) < nd {
                        mx_tick[q as usize] = tick;
                        record_of[q as usize] = records;
                    }
                    records += 1;
                }
                Instruction::Mz(_) => records += 1,
                Instruction::Detector(_) => detectors += 1,
                Instruction::Observable(k, _) => observables = observables.max(k + 1),
                _ => {}
            }
        }
        self.n_records = records;
        self.n_detectors = detectors;
        self.n_observables = observables;
        self.n_ticks = tick + 1;
        self.residence = emit_tick
            .iter()
            .zip(&last_gate)
            .map(|(&e, &l)| (e, l))
            .collect();
        self.record_of_qubit = record_of;
        self.mx_tick = mx_tick;
        Ok(())
    }

    pub fn is_ancilla(&self, q: u32) -> bool {
        q >= self.n_data
    }

    /// Copy without noise annotations.
    pub fn strip_noise(&self) -> Circuit {
        let kept: Vec<Instruction> = self
            .instructions
            .iter()
            .filter(|i| !i.is_noise())
            .cloned()
            .collect();
        Circuit::new(kept).expect("stripping noise preserves validity")
    }

    /// Check the structural invariants: CNOT control is an ancilla, CZ acts
    /// on (ancilla, data) or (ancilla, ancilla), MX only on data, MZ only on
    /// ancillas, and each data qubit is initialized and measured exactly once.
    pub fn validate(&self) -> Result<()> {
        let nd = self.n_data;
        let mut init_count = vec![0u32; nd as usize];
        let mut mx_count = vec![0u32; nd as usize];
        for (i, inst) in self.instructions.iter().enumerate() {
            let fail = |msg: String| Err(Error::Compile(format!("instruction {i}: {msg}")));
            match *inst {
                Instruction::Cnot(c, t) => {
                    if c < nd {
                        return fail(format!("CNOT control {c} is not an ancilla"));
                    }
                    if t >= nd {
                        return fail(format!("CNOT target {t} is not a data qubit"));
                    }
                }
                Instruction::Cz(a, b) => {
                    if a < nd && b < nd {
                        return fail(format!("CZ {a} {b} acts on two data qubits"));
                    }
                }
                Instruction::Mx(q) => {
                    if q >= nd {
                        return fail(format!("MX on ancilla {q}"));
                    }
                    mx_count[q as usize] += 1;
                }
                Instruction::Mz(q) => {
                    if q < nd {
                        return fail(format!("MZ on data qubit {q}"));
                    }
                }
                Instruction::Init0(q) => init_count[q as usize] += 1,
                _ => {}
            }
        }
        for q in 0..nd as usize {
            if init_count[q] != 1 || mx_count[q] != 1 {
                return Err(Error::Compile(format!(
                    "data qubit {q} has {} INIT0 and {} MX (want exactly 1 of each)",
                    init_count[q], mx_count[q]
                )));
            }
        }
        Ok(())
    }

    // ---- text format -------------------------------------------------------

    /// Emit the canonical text form: one instruction per line, single spaces,
    /// probabilities in shortest round-trip notation. Stable bytes.
    pub fn emit(&self) -> String {
        let mut out = String::with_capacity(self.instructions.len() * 12);
        for inst in &self.instructions {
            match inst {
                Instruction::InitP(q) => out.push_str(&format!("INITP {q}\n")),
                Instruction::Init0(q) => out.push_str(&format!("INIT0 {q}\n")),
                Instruction::H(q) => out.push_str(&format!("H {q}\n")),
                Instruction::Cz(a, b) => out.push_str(&format!("CZ {a} {b}\n")),
                Instruction::Cnot(a, b) => out.push_str(&format!("CNOT {a} {b}\n")),
                Instruction::Mx(q) => out.push_str(&format!("MX {q}\n")),
                Instruction::Mz(q) => out.push_str(&format!("MZ {q}\n")),
                Instruction::Tick => out.push_str("TICK\n"),
                Instruction::Depol1(p, q) => out.push_str(&format!("DEPOL1({p}) {q}\n")),
                Instruction::Depol2(p, a, b) => out.push_str(&format!("DEPOL2({p}) {a} {b}\n")),
                Instruction::Zerr(p, q) => out.push_str(&format!("ZERR({p}) {q}\n")),
                Instruction::HeraldErase(p, q) => {
                    out.push_str(&format!("HERALD_ERASE({p}) {q}\n"))
                }
                Instruction::Detector(recs) => {
                    out.push_str("DETECTOR");
                    for r in recs {
                        out.push_str(&format!(" {r}"));
                    }
                    out.push('\n');
                }
                Instruction::Observable(k, recs) => {
                    out.push_str(&format!("OBSERVABLE {k}"));
                    for r in recs {
                        out.push_str(&format!(" {r}"));
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Parse the text form. `#` starts a comment; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Circuit> {
        let mut instructions = Vec::new();
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
            let args: Vec<&str> = parts.collect();
            let qubit = |s: &str| -> Result<u32> {
                s.parse::<u32>().map_err(|_| err("bad qubit index"))
            };
            let one = |args: &[&str]| -> Result<u32> {
                if args.len() != 1 {
                    return Err(err("expected one operand"));
                }
                qubit(args[0])
            };
            let two = |args: &[&str]| -> Result<(u32, u32)> {
                if args.len() != 2 {
                    return Err(err("expected two operands"));
                }
                Ok((qubit(args[0])?, qubit(args[1])?))
            };
            let (op, rate) = match head.find('(') {
                Some(pos) => {
                    if !head.ends_with(')') {
                        return Err(err("unterminated rate argument"));
                    }
                    let p: f64 = head[pos + 1..head.len() - 1]
                        .parse()
                        .map_err(|_| err("bad rate"))?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(err("rate out of [0, 1]"));
                    }
                    (&head[..pos], p)
                }
                None => (head, 0.0),
            };
            let inst = match op {
                "INITP" => Instruction::InitP(one(&args)?),
                "INIT0" => Instruction::Init0(one(&args)?),
                "H" => Instruction::H(one(&args)?),
                "CZ" => {
                    let (a, b) = two(&args)?;
                    Instruction::Cz(a, b)
                }
                "CNOT" => {
                    let (a, b) = two(&args)?;
                    Instruction::Cnot(a, b)
                }
                "MX" => Instruction::Mx(one(&args)?),
                "MZ" => Instruction::Mz(one(&args)?),
                "TICK" => {
                    if !args.is_empty() {
                        return Err(err("TICK takes no operands"));
                    }
                    Instruction::Tick
                }
                "DEPOL1" => Instruction::Depol1(rate, one(&args)?),
                "DEPOL2" => {
                    let (a, b) = two(&args)?;
                    Instruction::Depol2(rate, a, b)
                }
                "ZERR" => Instruction::Zerr(rate, one(&args)?),
                "HERALD_ERASE" => Instruction::HeraldErase(rate, one(&args)?),
                "DETECTOR" => {
                    let recs: Result<Vec<u32>> = args.iter().map(|s| qubit(s)).collect();
                    Instruction::Detector(recs?)
                }
                "OBSERVABLE" => {
                    if args.is_empty() {
                        return Err(err("OBSERVABLE needs an index"));
                    }
                    let k: u8 = args[0].parse().map_err(|_| err("bad observable index"))?;
                    let recs: Result<Vec<u32>> = args[1..].iter().map(|s| qubit(s)).collect();
                    Instruction::Observable(k, recs?)
                }
                other => return Err(err(&format!("unknown opcode {other}"))),
            };
            instructions.push(inst);
        }
        Circuit::new(instructions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Circuit {
        Circuit::new(vec![
            Instruction::InitP(1),
            Instruction::Depol1(0.001, 1),
            Instruction::Init0(0),
            Instruction::Cnot(1, 0),
            Instruction::Depol2(0.001, 1, 0),
            Instruction::H(1),
            Instruction::Tick,
            Instruction::Cz(1, 0),
            Instruction::Zerr(0.25, 0),
            Instruction::Mx(0),
            Instruction::Mz(1),
            Instruction::Tick,
            Instruction::Detector(vec![0]),
            Instruction::Observable(0, vec![0]),
        ])
        .unwrap()
    }

    #[test]
    fn metadata_is_derived() {
        let c = tiny();
        assert_eq!(c.n_qubits, 2);
        assert_eq!(c.n_data, 1);
        assert_eq!(c.n_records, 2);
        assert_eq!(c.n_detectors, 1);
        assert_eq!(c.n_observables, 1);
        assert_eq!(c.residence[0], (0, 1));
        assert_eq!(c.record_of_qubit[0], 0);
        assert_eq!(c.mx_tick[0], 1);
        c.validate().unwrap();
    }

    #[test]
    fn round_trip_is_byte_stable() {
        let c = tiny();
        let text = c.emit();
        let parsed = Circuit::parse(&text).unwrap();
        assert_eq!(parsed.emit(), text);
        assert_eq!(parsed.instructions, c.instructions);
    }

    #[test]
    fn parser_accepts_comments_and_rejects_junk() {
        let ok = "# header\nINITP 1\n\nINIT0 0 # inline\nCNOT 1 0\nH 1\nMX 0\n";
        let c = Circuit::parse(ok).unwrap();
        assert_eq!(c.instructions.len(), 5);
        assert!(Circuit::parse("WAT 3").is_err());
        assert!(Circuit::parse("DEPOL1(1.5) 0").is_err());
        assert!(Circuit::parse("CZ 0").is_err());
        assert!(Circuit::parse("DEPOL1(0.1").is_err());
    }

    #[test]
    fn validate_catches_role_violations() {
        // CNOT control must be an ancilla.
        let c = Circuit::new(vec![
            Instruction::Init0(0),
            Instruction::Init0(1),
            Instruction::Cnot(0, 1),
            Instruction::Mx(0),
            Instruction::Mx(1),
        ])
        .unwrap();
        assert!(c.validate().is_err());
        // MZ on data rejected.
        let c = Circuit::new(vec![
            Instruction::Init0(0),
            Instruction::Mz(0),
            Instruction::Mx(0),
        ])
        .unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn strip_noise_removes_annotations() {
        let c = tiny();
        let clean = c.strip_noise();
        assert!(clean.instructions.iter().all(|i| !i.is_noise()));
        assert_eq!(clean.n_records, c.n_records);
    }
}
