//! Exact gate-level reference states. Uses the same basis convention as
//! [`crate::model`]: qubit `k` is bit `k - 1` of the zero-based index.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// Rejects vectors whose squared norm is not 1 within `1e-9`.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.len() < 2 || !amps.len().is_power_of_two() {
            return Err(Error::Shape { expected: amps.len().next_power_of_two().max(2), got: amps.len() });
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::Normalization { norm_sqr });
        }
        Ok(PureState { n: amps.len().trailing_zeros() as usize, amps })
    }

    pub fn basis(n: usize, xi: usize) -> Result<Self> {
        let s = crate::model::BasisIndex::new(xi, n)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[s.raw()] = C64::new(1.0, 0.0);
        Ok(PureState { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    fn mask(&self, q: usize) -> Result<usize> {
        if q == 0 || q > self.n {
            return Err(Error::InvalidQubit { index: q, n: self.n });
        }
        Ok(1 << (q - 1))
    }
}

pub fn apply_hadamard(state: &PureState, q: usize) -> Result<PureState> {
    let m = state.mask(q)?;
    let mut out = state.clone();
    for a in (0..state.amps.len()).filter(|a| a & m == 0) {
        let b = a | m;
        let (x, y) = (state.amps[a], state.amps[b]);
        out.amps[a] = (x + y) * FRAC_1_SQRT_2;
        out.amps[b] = (x - y) * FRAC_1_SQRT_2;
    }
    Ok(out)
}

/// Flips `target` on every basis state whose `control` bits are all 1.
pub fn apply_controlled_not(state: &PureState, controls: &[usize], target: usize) -> Result<PureState> {
    let t = state.mask(target)?;
    let mut cmask = 0;
    for &c in controls {
        let m = state.mask(c)?;
        if m == t || cmask & m != 0 {
            return Err(Error::InvalidGate(format!(
                "controls {controls:?} and target {target} must be distinct"
            )));
        }
        cmask |= m;
    }
    let mut out = state.clone();
    for a in (0..state.amps.len()).filter(|a| a & cmask == cmask && a & t == 0) {
        out.amps.swap(a, a | t);
    }
    Ok(out)
}

pub fn apply_cnot(state: &PureState, control: usize, target: usize) -> Result<PureState> {
    apply_controlled_not(state, &[control], target)
}

pub fn apply_toffoli(state: &PureState, c1: usize, c2: usize, target: usize) -> Result<PureState> {
    apply_controlled_not(state, &[c1, c2], target)
}

pub fn apply_not(state: &PureState, q: usize) -> Result<PureState> {
    apply_controlled_not(state, &[], q)
}

/// `(-1)^{x_q}` phase flip.
pub fn apply_z(state: &PureState, q: usize) -> Result<PureState> {
    let m = state.mask(q)?;
    let mut out = state.clone();
    for (a, amp) in out.amps.iter_mut().enumerate() {
        if a & m != 0 {
            *amp = -*amp;
        }
    }
    Ok(out)
}

/// Teleportation circuit on three qubits: `H_2`, then `CNOT(2 -> 1)`,
/// `CNOT(3 -> 2)`, `H_3`. Qubit 3 carries the state to send, qubit 1 is the
/// receiver.
pub fn teleport_circuit(state: &PureState) -> Result<PureState> {
    if state.n != 3 {
        return Err(Error::InvalidGate(format!("teleportation needs 3 qubits, got {}", state.n)));
    }
    let s = apply_hadamard(state, 2)?;
    let s = apply_cnot(&s, 2, 1)?;
    let s = apply_cnot(&s, 3, 2)?;
    apply_hadamard(&s, 3)
}

/// [`teleport_circuit`] applied to `c1|000> + c2|100>`.
pub fn ideal_teleport(c1: C64, c2: C64) -> Result<PureState> {
    let mut amps = vec![C64::new(0.0, 0.0); 8];
    amps[0] = c1;
    amps[4] = c2;
    teleport_circuit(&PureState::new(amps)?)
}

pub fn ideal_populations(state: &PureState) -> Vec<f64> {
    state.amps.iter().map(|a| a.norm_sqr()).collect()
}
