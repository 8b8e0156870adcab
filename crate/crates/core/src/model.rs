//! Static structure of the spin chain: basis labelling, the diagonal
//! spectrum of the static Hamiltonian, transition frequencies and the
//! matrix elements of `S_k^+ - S_k^-`.
//!
//! Units are dimensionless throughout (`hbar = 1`, frequencies in units of
//! the reference angular frequency). Qubits are numbered `1..=n`; basis
//! states are numbered `1..=2^n` with bit `k - 1` of `index - 1` holding the
//! state of qubit `k`, so the ket `|x_n ... x_1>` lists qubit `n` leftmost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 12;

/// Physical constants of a chain of `n` spins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegisterConfig {
    omega: Vec<f64>,
    rabi: f64,
    j1: f64,
    j2: f64,
    phi: f64,
}

impl RegisterConfig {
    /// Builds a validated register. `omega` holds one Larmor frequency per
    /// qubit; `j1`/`j2` are the first/second-neighbour Ising couplings and
    /// must be zero when the chain is too short to have such a pair.
    pub fn new(omega: Vec<f64>, rabi: f64, j1: f64, j2: f64, phi: f64) -> Result<Self> {
        let n = omega.len();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidConfig(format!(
                "qubit count {n} outside 1..={MAX_QUBITS}"
            )));
        }
        if let Some(w) = omega.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite Larmor frequency {w}")));
        }
        if !(rabi.is_finite() && rabi > 0.0) {
            return Err(Error::InvalidConfig(format!("rabi frequency must be positive, got {rabi}")));
        }
        if !j1.is_finite() || !j2.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidConfig("couplings and phase must be finite".into()));
        }
        if n < 2 && j1 != 0.0 {
            return Err(Error::InvalidConfig("j1 must be 0 for a single qubit".into()));
        }
        if n < 3 && j2 != 0.0 {
            return Err(Error::InvalidConfig(format!("j2 must be 0 for {n} qubit(s)")));
        }
        Ok(RegisterConfig { omega, rabi, j1, j2, phi })
    }

    /// Parameters used for the one-, two- and three-qubit gate runs.
    pub fn standard(n: usize) -> Result<Self> {
        match n {
            1 => Self::new(vec![100.0], 0.1, 0.0, 0.0, 0.0),
            2 => Self::new(vec![100.0, 200.0], 0.1, 2.0, 0.0, 0.0),
            3 => Self::new(vec![100.0, 200.0, 300.0], 0.1, 2.0, 0.25, 0.0),
            _ => Err(Error::InvalidConfig(format!("no default parameters for {n} qubits"))),
        }
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.omega.len()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn j1(&self) -> f64 {
        self.j1
    }

    pub fn j2(&self) -> f64 {
        self.j2
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn with_rabi(mut self, rabi: f64) -> Self {
        self.rabi = rabi;
        self
    }

    /// True when two qubits share a Larmor frequency.
    pub fn has_repeated_larmor(&self) -> bool {
        self.omega
            .iter()
            .enumerate()
            .any(|(a, wa)| self.omega[a + 1..].iter().any(|wb| wa == wb))
    }
}

/// A computational basis state, stored zero-based internally.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisIndex {
    raw: usize,
    n: usize,
}

impl BasisIndex {
    /// From the decimal label `1..=2^n`.
    pub fn new(xi: usize, n: usize) -> Result<Self> {
        let max = 1usize << n;
        if xi == 0 || xi > max {
            return Err(Error::InvalidState { index: xi, max });
        }
        Ok(BasisIndex { raw: xi - 1, n })
    }

    /// From a zero-based index.
    pub fn from_raw(raw: usize, n: usize) -> Self {
        debug_assert!(raw < (1 << n));
        BasisIndex { raw, n }
    }

    /// From digital labels given as `[x_1, x_2, ..., x_n]`.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let n = bits.len();
        let mut raw = 0;
        for (k, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => raw |= 1 << k,
                _ => {
                    return Err(Error::InvalidState { index: b as usize, max: 1 });
                }
            }
        }
        Ok(BasisIndex { raw, n })
    }

    /// Decimal label `1..=2^n`.
    pub fn xi(self) -> usize {
        self.raw + 1
    }

    pub fn raw(self) -> usize {
        self.raw
    }

    pub fn n(self) -> usize {
        self.n
    }

    /// State of qubit `k` (1-based).
    pub fn bit(self, k: usize) -> u8 {
        ((self.raw >> (k - 1)) & 1) as u8
    }

    /// Digital labels `[x_1, ..., x_n]`.
    pub fn bits(self) -> Vec<u8> {
        (1..=self.n).map(|k| self.bit(k)).collect()
    }

    /// Ket label with qubit `n` leftmost, e.g. `|110>`.
    pub fn ket(self) -> String {
        let s: String = (1..=self.n).rev().map(|k| char::from(b'0' + self.bit(k))).collect();
        format!("|{s}>")
    }

    pub fn hamming(self, other: BasisIndex) -> u32 {
        (self.raw ^ other.raw).count_ones()
    }
}

/// `(-1)^b` for a bit value.
#[inline]
fn sign(bit: usize) -> f64 {
    if bit & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Energy of one basis state (raw zero-based index) of the static Hamiltonian.
fn energy_raw(config: &RegisterConfig, raw: usize) -> f64 {
    let n = config.n();
    let bit = |i: usize| (raw >> i) & 1;
    let zeeman: f64 = (0..n).map(|i| config.omega[i] * sign(bit(i))).sum();
    let first: f64 = (0..n.saturating_sub(1)).map(|i| sign(bit(i) + bit(i + 1))).sum();
    let second: f64 = (0..n.saturating_sub(2)).map(|i| sign(bit(i) + bit(i + 2))).sum();
    -0.5 * zeeman + 0.5 * config.j1 * first + 0.5 * config.j2 * second
}

/// Eigenenergy `e_xi` of the static (diagonal) Hamiltonian.
pub fn eigen_energy(config: &RegisterConfig, state: BasisIndex) -> Result<f64> {
    if state.n != config.n() {
        return Err(Error::InvalidState { index: state.xi(), max: config.dim() });
    }
    Ok(energy_raw(config, state.raw))
}

/// The full spectrum, computed once per configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyTable {
    n: usize,
    e: Vec<f64>,
}

impl EnergyTable {
    pub fn new(config: &RegisterConfig) -> Self {
        let e = (0..config.dim()).map(|raw| energy_raw(config, raw)).collect();
        EnergyTable { n: config.n(), e }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.e.len()
    }

    /// Energies indexed by zero-based state.
    pub fn energies(&self) -> &[f64] {
        &self.e
    }

    pub fn energy(&self, state: BasisIndex) -> f64 {
        self.e[state.raw]
    }

    pub fn index(&self, xi: usize) -> Result<BasisIndex> {
        BasisIndex::new(xi, self.n)
    }

    /// Largest `|e_xi - e_eta|` over pairs connected by a single spin flip.
    pub fn max_flip_frequency(&self) -> f64 {
        let mut best = 0.0f64;
        for raw in 0..self.dim() {
            for k in 0..self.n {
                let other = raw ^ (1 << k);
                best = best.max((self.e[raw] - self.e[other]).abs());
            }
        }
        best
    }
}

/// `omega_ij = e_i - e_j`, sign preserved.
pub fn transition_frequency(table: &EnergyTable, i: BasisIndex, j: BasisIndex) -> Result<f64> {
    for s in [i, j] {
        if s.n != table.n {
            return Err(Error::InvalidState { index: s.xi(), max: table.dim() });
        }
    }
    Ok(table.e[i.raw] - table.e[j.raw])
}

/// `<xi| S_k^+ - S_k^- |eta>` in units of `hbar`: `+1` when `eta` has qubit
/// `k` down and `xi` is `eta` with it raised, `-1` for the lowering case and
/// zero otherwise.
pub fn coupling_element(xi: BasisIndex, eta: BasisIndex, k: usize) -> i8 {
    if k == 0 || k > xi.n {
        return 0;
    }
    let mask = 1usize << (k - 1);
    if xi.raw ^ eta.raw != mask {
        return 0;
    }
    if eta.raw & mask == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn standard(n: usize) -> RegisterConfig {
        RegisterConfig::standard(n).unwrap()
    }

    fn idx(xi: usize, n: usize) -> BasisIndex {
        BasisIndex::new(xi, n).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(RegisterConfig::new(vec![], 0.1, 0.0, 0.0, 0.0).is_err());
        assert!(RegisterConfig::new(vec![1.0; 13], 0.1, 0.0, 0.0, 0.0).is_err());
        assert!(RegisterConfig::new(vec![100.0], 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(RegisterConfig::new(vec![f64::NAN], 0.1, 0.0, 0.0, 0.0).is_err());
        assert!(RegisterConfig::new(vec![100.0], 0.1, 1.0, 0.0, 0.0).is_err());
        assert!(RegisterConfig::new(vec![100.0, 200.0], 0.1, 2.0, 0.5, 0.0).is_err());
        assert!(RegisterConfig::new(vec![100.0, 200.0], 0.1, 2.0, 0.0, 0.0).is_ok());
        assert!(standard(3).omega() == [100.0, 200.0, 300.0]);
        assert!(RegisterConfig::standard(4).is_err());
    }

    #[test]
    fn repeated_larmor_detected() {
        let c = RegisterConfig::new(vec![100.0, 100.0], 0.1, 2.0, 0.0, 0.0).unwrap();
        assert!(c.has_repeated_larmor());
        assert!(!standard(3).has_repeated_larmor());
    }

    #[test]
    fn basis_labels() {
        assert_eq!(idx(3, 2).ket(), "|10>");
        assert_eq!(idx(7, 3).ket(), "|110>");
        assert_eq!(idx(1, 3).ket(), "|000>");
        assert_eq!(idx(8, 3).ket(), "|111>");
        assert_eq!(idx(7, 3).bits(), vec![0, 1, 1]);
        assert!(BasisIndex::new(0, 2).is_err());
        assert!(BasisIndex::new(5, 2).is_err());
    }

    #[test]
    fn single_qubit_energies() {
        let c = standard(1);
        assert_eq!(eigen_energy(&c, idx(1, 1)).unwrap(), -50.0);
        assert_eq!(eigen_energy(&c, idx(2, 1)).unwrap(), 50.0);
        assert!(eigen_energy(&c, idx(3, 2)).is_err());
    }

    #[test]
    fn pure_ising_pair() {
        let c = RegisterConfig::new(vec![0.0, 0.0], 0.1, 2.0, 0.0, 0.0).unwrap();
        let e: Vec<f64> = (1..=4).map(|x| eigen_energy(&c, idx(x, 2)).unwrap()).collect();
        assert_eq!(e, vec![1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn three_qubit_energies() {
        let c = standard(3);
        assert_eq!(eigen_energy(&c, idx(7, 3)).unwrap(), 199.875);
        assert_eq!(eigen_energy(&c, idx(8, 3)).unwrap(), 302.125);
        let t = EnergyTable::new(&c);
        assert_eq!(transition_frequency(&t, idx(8, 3), idx(7, 3)).unwrap(), 102.25);
    }

    #[test]
    fn transition_frequencies() {
        let t = EnergyTable::new(&standard(1));
        assert_eq!(transition_frequency(&t, idx(2, 1), idx(1, 1)).unwrap(), 100.0);
        assert_eq!(transition_frequency(&t, idx(2, 1), idx(2, 1)).unwrap(), 0.0);
        assert!(transition_frequency(&t, idx(2, 2), idx(1, 1)).is_err());
    }

    #[test]
    fn coupling_elements() {
        assert_eq!(coupling_element(idx(2, 1), idx(1, 1), 1), 1);
        assert_eq!(coupling_element(idx(1, 1), idx(2, 1), 1), -1);
        assert_eq!(coupling_element(idx(1, 1), idx(1, 1), 1), 0);
        // |00> and |11> differ in two bits
        for k in 1..=2 {
            assert_eq!(coupling_element(idx(1, 2), idx(4, 2), k), 0);
        }
        // wrong qubit
        assert_eq!(coupling_element(idx(2, 2), idx(1, 2), 2), 0);
    }

    #[test]
    fn coupling_sparsity() {
        for n in 1..=4 {
            let dim = 1 << n;
            let mut count = 0;
            for a in 0..dim {
                for k in 1..=n {
                    let nonzero = (0..dim)
                        .filter(|&b| coupling_element(BasisIndex::from_raw(a, n), BasisIndex::from_raw(b, n), k) != 0)
                        .count();
                    assert_eq!(nonzero, 1);
                    count += nonzero;
                }
            }
            assert_eq!(count, n * dim);
        }
    }

    #[test]
    fn uncoupled_spectrum_is_minkowski_sum() {
        let omega = vec![3.0, 17.0, 40.0, 111.0];
        let c = RegisterConfig::new(omega.clone(), 0.1, 0.0, 0.0, 0.0).unwrap();
        let mut spectrum = EnergyTable::new(&c).energies().to_vec();
        let mut sums = vec![0.0];
        for w in &omega {
            sums = sums.iter().flat_map(|s| [s - w / 2.0, s + w / 2.0]).collect();
        }
        spectrum.sort_by(f64::total_cmp);
        sums.sort_by(f64::total_cmp);
        for (a, b) in spectrum.iter().zip(&sums) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn max_flip_frequency_three_qubits() {
        let t = EnergyTable::new(&standard(3));
        assert_eq!(t.max_flip_frequency(), 302.25);
    }

    proptest! {
        #[test]
        fn index_round_trip(n in 1usize..=8, seed in any::<usize>()) {
            let xi = seed % (1 << n) + 1;
            let s = BasisIndex::new(xi, n).unwrap();
            let back = BasisIndex::from_bits(&s.bits()).unwrap();
            prop_assert_eq!(back.xi(), xi);
        }

        #[test]
        fn couplings_sum_to_zero_over_basis(
            omega in proptest::collection::vec(-500.0f64..500.0, 3..=6),
            j1 in -5.0f64..5.0,
            j2 in -5.0f64..5.0,
        ) {
            let with = RegisterConfig::new(omega.clone(), 0.1, j1, j2, 0.0).unwrap();
            let without = RegisterConfig::new(omega, 0.1, 0.0, 0.0, 0.0).unwrap();
            let a: f64 = EnergyTable::new(&with).energies().iter().sum();
            let b: f64 = EnergyTable::new(&without).energies().iter().sum();
            prop_assert!((a - b).abs() < 1e-8);
            prop_assert!(b.abs() < 1e-8);
        }

        #[test]
        fn frequency_antisymmetry(n in 1usize..=5, a in any::<usize>(), b in any::<usize>()) {
            let c = RegisterConfig::new((1..=n).map(|k| 97.0 * k as f64).collect(), 0.1,
                if n > 1 { 2.0 } else { 0.0 }, if n > 2 { 0.25 } else { 0.0 }, 0.0).unwrap();
            let t = EnergyTable::new(&c);
            let i = BasisIndex::from_raw(a % c.dim(), n);
            let j = BasisIndex::from_raw(b % c.dim(), n);
            prop_assert_eq!(
                transition_frequency(&t, i, j).unwrap(),
                -transition_frequency(&t, j, i).unwrap()
            );
        }
    }
}
