//! Error models: circuit-level depolarizing noise, delay-line dephasing,
//! and heralded loss.
//!
//! The depolarizing model follows the standard convention: a single-qubit
//! channel of strength `p` after every one-qubit gate and initialization, a
//! two-qubit channel after every two-qubit gate. The CZ between neighboring
//! emitters may carry its own strength `p_e = pe_ratio * p`. Measurement has
//! no separate error parameter; flips enter through the adjacent gate noise.

use crate::circuit::{Circuit, Instruction};
use crate::sim::propagate::{enumerate_fault_effects, FaultEffect};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// How per-qubit loss probabilities are derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    /// Flat `eta_loss * L^2 / n_e` for every data qubit (leading-order
    /// delay-line length, the reported model).
    FlatL2OverNe,
    /// `eta_loss * residence(q)` per qubit, for sensitivity analysis.
    Residence,
}

impl Default for LossMode {
    fn default() -> Self {
        LossMode::FlatL2OverNe
    }
}

/// Noise parameters for one run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Circuit-level depolarizing strength.
    #[serde(default)]
    pub p: f64,
    /// Ratio p_e / p for the emitter-emitter CZ.
    #[serde(default = "one")]
    pub pe_ratio: f64,
    /// Dephasing rate per tick in the delay line.
    #[serde(default)]
    pub eta_z: f64,
    /// Loss rate (per unit length; see `loss_mode`).
    #[serde(default)]
    pub eta_loss: f64,
    #[serde(default)]
    pub loss_mode: LossMode,
}

fn one() -> f64 {
    1.0
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { p: 0.0, pe_ratio: 1.0, eta_z: 0.0, eta_loss: 0.0, loss_mode: LossMode::default() }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !in_unit(self.p) || !in_unit(self.eta_z) || !in_unit(self.eta_loss) {
            return Err(Error::InvalidNoise(format!(
                "rates must lie in [0,1]: p={}, eta_z={}, eta_loss={}",
                self.p, self.eta_z, self.eta_loss
            )));
        }
        if self.pe_ratio < 0.0 || !in_unit(self.p * self.pe_ratio) {
            return Err(Error::InvalidNoise(format!(
                "p_e = p * pe_ratio = {} out of range",
                self.p * self.pe_ratio
            )));
        }
        Ok(())
    }

    /// Attach every enabled noise source to a clean circuit.
    pub fn attach_all(&self, c: &Circuit, l: u32, n_e: u32) -> Result<Circuit> {
        self.validate()?;
        let mut out = attach_circuit_noise(c, self)?;
        if self.eta_z > 0.0 {
            out = attach_dephasing(&out, self)?;
        }
        if self.eta_loss > 0.0 {
            out = attach_loss(&out, self, l, n_e)?;
        }
        Ok(out)
    }
}

/// Depolarizing annotations after every gate and initialization.
pub fn attach_circuit_noise(c: &Circuit, spec: &NoiseSpec) -> Result<Circuit> {
    spec.validate()?;
    let p = spec.p;
    let pe = spec.p * spec.pe_ratio;
    if p == 0.0 && pe == 0.0 {
        return Ok(c.clone());
    }
    let n_data = c.n_data;
    let mut out = Vec::with_capacity(c.instructions.len() * 2);
    for inst in &c.instructions {
        out.push(inst.clone());
        match *inst {
            Instruction::InitP(q) | Instruction::Init0(q) | Instruction::H(q) => {
                if p > 0.0 {
                    out.push(Instruction::Depol1(p, q));
                }
            }
            Instruction::Cnot(a, b) => {
                if p > 0.0 {
                    out.push(Instruction::Depol2(p, a, b));
                }
            }
            Instruction::Cz(a, b) => {
                let rate = if a >= n_data && b >= n_data { pe } else { p };
                if rate > 0.0 {
                    out.push(Instruction::Depol2(rate, a, b));
                }
            }
            _ => {}
        }
    }
    Circuit::new(out)
}

/// Dephasing: ZERR on every emitted, not-yet-measured data qubit at every
/// tick, so the expected Z count per qubit is `eta_z` times its residence.
pub fn attach_dephasing(c: &Circuit, spec: &NoiseSpec) -> Result<Circuit> {
    spec.validate()?;
    if spec.eta_z == 0.0 {
        return Ok(c.clone());
    }
    let nd = c.n_data as usize;
    let mut out = Vec::with_capacity(c.instructions.len() + nd * c.n_ticks as usize);
    let mut tick = 0u32;
    let push_zerr = |out: &mut Vec<Instruction>, tick: u32| {
        for q in 0..nd {
            let (emit, _) = c.residence[q];
            if emit != u32::MAX && emit <= tick && c.mx_tick[q] > tick {
                out.push(Instruction::Zerr(spec.eta_z, q as u32));
            }
        }
    };
    for inst in &c.instructions {
        if matches!(inst, Instruction::Tick) {
            push_zerr(&mut out, tick);
            tick += 1;
        }
        out.push(inst.clone());
    }
    Circuit::new(out)
}

/// Heralded loss: one HERALD_ERASE before each data qubit's MX.
pub fn attach_loss(c: &Circuit, spec: &NoiseSpec, l: u32, n_e: u32) -> Result<Circuit> {
    spec.validate()?;
    if spec.eta_loss == 0.0 {
        return Ok(c.clone());
    }
    let rate_of = |q: u32| -> f64 {
        match spec.loss_mode {
            LossMode::FlatL2OverNe => spec.eta_loss * (l as f64) * (l as f64) / n_e as f64,
            LossMode::Residence => {
                let (emit, last) = c.residence[q as usize];
                spec.eta_loss * (last.saturating_sub(emit)) as f64
            }
        }
    };
    let mut out = Vec::with_capacity(c.instructions.len() + c.n_data as usize);
    for inst in &c.instructions {
        if let Instruction::Mx(q) = *inst {
            let rate = rate_of(q);
            if rate > 1.0 {
                return Err(Error::InvalidNoise(format!(
                    "per-qubit erasure probability {rate} exceeds 1 (qubit {q})"
                )));
            }
            out.push(Instruction::HeraldErase(rate, q));
        }
        out.push(inst.clone());
    }
    Circuit::new(out)
}

/// All elementary fault locations of a noisy circuit, with their
/// probability shares and propagated effects.
pub fn enumerate_faults(c: &Circuit) -> Result<Vec<FaultEffect>> {
    enumerate_fault_effects(c)
}
