//! Time evolution of the interaction-picture amplitudes under resonant rf
//! pulses.
//!
//! Writing `|psi(t)> = sum_eta exp(-i e_eta t) D_eta(t) |eta>`, the
//! amplitudes obey
//!
//! ```text
//! dD_xi/dt = -(rabi cos(theta) / 2) sum_k exp(i w_{xi,eta_k} t) M^k_{xi,eta_k} D_{eta_k}
//!            - i (rabi sin(theta) / 2) (sum_k (-1)^{x_k}) D_xi
//! ```
//!
//! where `eta_k` is `xi` with qubit `k` flipped, `M^k` is
//! [`coupling_element`](crate::model::coupling_element) and `theta` is the
//! instantaneous rf phase. Integration is classical fixed-step RK4 without
//! renormalization; norm drift is reported, never corrected.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics;
use crate::model::{BasisIndex, EnergyTable, RegisterConfig};

/// Per-step phase budget used by [`default_step`].
pub const PHASE_PER_STEP: f64 = 0.1;

/// Interaction-picture amplitudes at time `tau`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
    tau: f64,
}

impl StateVector {
    pub fn new(amps: Vec<C64>, tau: f64) -> Result<Self> {
        if !amps.len().is_power_of_two() || amps.len() < 2 {
            return Err(Error::Shape { expected: amps.len().next_power_of_two().max(2), got: amps.len() });
        }
        Ok(StateVector { amps, tau })
    }

    /// Basis state `xi` (1-based) with unit amplitude.
    pub fn basis(n: usize, xi: usize) -> Result<Self> {
        Self::from_pairs(n, &[(xi, C64::new(1.0, 0.0))])
    }

    /// Sparse construction from `(decimal index, amplitude)` pairs; unlisted
    /// states are zero.
    pub fn from_pairs(n: usize, pairs: &[(usize, C64)]) -> Result<Self> {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        for &(xi, a) in pairs {
            let s = BasisIndex::new(xi, n)?;
            amps[s.raw()] = a;
        }
        Ok(StateVector { amps, tau: 0.0 })
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// How the rf phase `theta` is referenced between pulses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseMode {
    /// `theta = drive * (tau - tau_pulse_start) + phase`.
    #[default]
    Reset,
    /// `theta = drive * tau + phase`.
    Continuous,
}

impl std::str::FromStr for PhaseMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "reset" => Ok(PhaseMode::Reset),
            "continuous" => Ok(PhaseMode::Continuous),
            other => Err(format!("unknown phase mode `{other}` (expected reset|continuous)")),
        }
    }
}

/// Instantaneous rf drive, `theta = freq * (tau - origin) + phase`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drive {
    pub freq: f64,
    pub phase: f64,
    pub origin: f64,
}

impl Drive {
    pub fn new(freq: f64, phase: f64) -> Self {
        Drive { freq, phase, origin: 0.0 }
    }

    #[inline]
    pub fn theta(&self, tau: f64) -> f64 {
        self.freq * (tau - self.origin) + self.phase
    }
}

/// One resonant drive segment `R_ij(m pi / rabi)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pulse {
    i: usize,
    j: usize,
    multiple: f64,
    drive: f64,
    phase: f64,
}

impl Pulse {
    /// Builds a pulse on levels `(i, j)` (decimal labels) lasting
    /// `multiple * pi / rabi`. Pairs that differ in more than one spin are
    /// rejected unless `allow_any_pair` is set.
    pub fn new(
        n: usize,
        i: usize,
        j: usize,
        multiple: f64,
        drive: f64,
        phase: f64,
        allow_any_pair: bool,
    ) -> Result<Self> {
        let a = BasisIndex::new(i, n)?;
        let b = BasisIndex::new(j, n)?;
        if i == j {
            return Err(Error::InvalidPair { i, j, reason: "no self-transition".into() });
        }
        if !allow_any_pair && a.hamming(b) != 1 {
            return Err(Error::InvalidPair {
                i,
                j,
                reason: format!("{} and {} differ in more than one spin", a.ket(), b.ket()),
            });
        }
        if !(multiple.is_finite() && multiple > 0.0) {
            return Err(Error::InvalidPair { i, j, reason: format!("pulse multiple must be > 0, got {multiple}") });
        }
        if !drive.is_finite() || !phase.is_finite() {
            return Err(Error::InvalidPair { i, j, reason: "drive and phase must be finite".into() });
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        Ok(Pulse { i, j, multiple, drive, phase })
    }

    /// Level pair, lower decimal label first.
    pub fn pair(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    /// Duration in units of `pi / rabi`.
    pub fn multiple(&self) -> f64 {
        self.multiple
    }

    pub fn drive(&self) -> f64 {
        self.drive
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn duration(&self, rabi: f64) -> f64 {
        self.multiple * PI / rabi
    }

    /// Other single-flip level pairs whose `|transition frequency|` lies
    /// within `rabi` of this pulse's drive. These are driven alongside the
    /// target pair.
    pub fn collisions(&self, table: &EnergyTable, rabi: f64) -> Vec<(usize, usize)> {
        let e = table.energies();
        let mut out = Vec::new();
        for a in 0..table.dim() {
            for k in 0..table.n() {
                let b = a ^ (1 << k);
                if b < a || (a + 1, b + 1) == (self.i, self.j) {
                    continue;
                }
                if ((e[b] - e[a]).abs() - self.drive).abs() < rabi {
                    out.push((a + 1, b + 1));
                }
            }
        }
        out
    }
}

/// Resonant pulse on `(i, j)` lasting `multiple * pi / rabi`, driven at
/// `|e_i - e_j|` with the register's phase. Logs warnings for pairs that are
/// not single spin flips and for resonance collisions with other pairs.
pub fn plan_pulse(config: &RegisterConfig, table: &EnergyTable, i: usize, j: usize, multiple: f64) -> Result<Pulse> {
    let a = table.index(i)?;
    let b = table.index(j)?;
    if i == j {
        return Err(Error::InvalidPair { i, j, reason: "no self-transition".into() });
    }
    if a.hamming(b) != 1 {
        warn!("pulse R{i},{j}: {} and {} differ in more than one spin", a.ket(), b.ket());
    }
    let drive = (table.energy(a) - table.energy(b)).abs();
    let pulse = Pulse::new(table.n(), i, j, multiple, drive, config.phi(), true)?;
    let hits = pulse.collisions(table, config.rabi());
    if !hits.is_empty() {
        warn!("pulse R{i},{j} at drive {drive} also resonates with level pairs {hits:?}");
    }
    if config.has_repeated_larmor() {
        warn!("register has repeated Larmor frequencies; level pairs may share resonances");
    }
    Ok(pulse)
}

/// Ordered pulses in execution order plus the trace sampling stride.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSequence {
    pub pulses: Vec<Pulse>,
    pub sample_stride: usize,
}

impl PulseSequence {
    pub fn new(pulses: Vec<Pulse>, sample_stride: usize) -> Self {
        PulseSequence { pulses, sample_stride: sample_stride.max(1) }
    }

    pub fn total_duration(&self, rabi: f64) -> f64 {
        self.pulses.iter().map(|p| p.duration(rabi)).sum()
    }

    pub fn max_drive(&self) -> f64 {
        self.pulses.iter().map(|p| p.drive.abs()).fold(0.0, f64::max)
    }
}

/// Sampled populations, total probability and entropy.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries {
    pub taus: Vec<f64>,
    pub probs: Vec<Vec<f64>>,
    pub total: Vec<f64>,
    pub entropy: Vec<f64>,
}

impl TimeSeries {
    pub fn push(&mut self, state: &StateVector) {
        let p = state.populations();
        self.total.push(p.iter().sum());
        self.entropy.push(metrics::shannon(&p));
        self.taus.push(state.tau);
        self.probs.push(p);
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn last_tau(&self) -> Option<f64> {
        self.taus.last().copied()
    }

    /// `max |total - 1|` over all samples.
    pub fn norm_drift(&self) -> f64 {
        self.total.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Collects a sample every `stride` integrator steps.
#[derive(Debug)]
pub struct Sampler {
    stride: usize,
    counter: usize,
    pub series: TimeSeries,
}

impl Sampler {
    pub fn new(stride: usize) -> Self {
        Sampler { stride: stride.max(1), counter: 0, series: TimeSeries::default() }
    }

    fn on_step(&mut self, state: &StateVector) {
        self.counter += 1;
        if self.counter.is_multiple_of(self.stride) {
            self.series.push(state);
        }
    }

    /// Records `state` unless it was the most recent sample.
    pub fn ensure(&mut self, state: &StateVector) {
        if self.series.last_tau() != Some(state.tau) {
            self.series.push(state);
        }
    }
}

/// Step size giving at most [`PHASE_PER_STEP`] radians per step to the
/// fastest phase, `max single-flip |w| + max drive`.
pub fn default_step(table: &EnergyTable, max_drive: f64, rabi: f64) -> f64 {
    let fastest = table.max_flip_frequency() + max_drive.abs();
    PHASE_PER_STEP / fastest.max(rabi)
}

fn check_shape(table: &EnergyTable, len: usize) -> Result<()> {
    if len != table.dim() {
        return Err(Error::Shape { expected: table.dim(), got: len });
    }
    Ok(())
}

/// `rot[s] = exp(i e_s tau)` for every basis state.
fn rotations(table: &EnergyTable, tau: f64, rot: &mut [C64]) {
    for (r, &e) in rot.iter_mut().zip(table.energies()) {
        *r = C64::cis(e * tau);
    }
}

/// Amplitude derivative at a time whose [`rotations`] are `rot`, written
/// into `out`. `scratch` has length `2^n`.
fn rhs_into(
    rabi: f64,
    n: usize,
    rot: &[C64],
    theta: f64,
    amps: &[C64],
    scratch: &mut [C64],
    out: &mut [C64],
) {
    let (sin, cos) = theta.sin_cos();
    let off = -0.5 * rabi * cos;
    let diag = C64::new(0.0, -0.5 * rabi * sin);
    for ((q, r), &d) in scratch.iter_mut().zip(rot).zip(amps) {
        *q = r.conj() * d;
    }
    for (xi, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            let mask = 1usize << k;
            let eta = xi ^ mask;
            if eta & mask == 0 {
                acc += scratch[eta];
            } else {
                acc -= scratch[eta];
            }
        }
        let zsum = n as f64 - 2.0 * xi.count_ones() as f64;
        *o = off * rot[xi] * acc + diag * zsum * amps[xi];
    }
}

/// Right-hand side of the amplitude equations at time `tau`.
pub fn rhs(config: &RegisterConfig, table: &EnergyTable, tau: f64, amps: &[C64], drive: &Drive) -> Result<Vec<C64>> {
    check_shape(table, amps.len())?;
    let mut rot = vec![C64::new(0.0, 0.0); amps.len()];
    let mut scratch = rot.clone();
    let mut out = rot.clone();
    rotations(table, tau, &mut rot);
    rhs_into(config.rabi(), table.n(), &rot, drive.theta(tau), amps, &mut scratch, &mut out);
    Ok(out)
}

/// One classical RK4 step of size `h`.
pub fn rk4_step(config: &RegisterConfig, table: &EnergyTable, state: &StateVector, drive: &Drive, h: f64) -> Result<StateVector> {
    let mut sim = Simulator::new(config, table, h)?;
    let mut next = state.clone();
    sim.step(&mut next, drive, h)?;
    Ok(next)
}

/// Fixed-step RK4 propagator with reusable scratch buffers.
pub struct Simulator<'a> {
    config: &'a RegisterConfig,
    table: &'a EnergyTable,
    step: f64,
    phase_mode: PhaseMode,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
    scratch: Vec<C64>,
    /// Rotations at the start, midpoint and end of the current step.
    rot: [Vec<C64>; 3],
    /// Time at which `rot[0]` is valid.
    rot_tau: Option<f64>,
}

impl<'a> Simulator<'a> {
    pub fn new(config: &'a RegisterConfig, table: &'a EnergyTable, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::validation("step", format!("must be positive, got {step}")));
        }
        if table.n() != config.n() {
            return Err(Error::Shape { expected: config.dim(), got: table.dim() });
        }
        let zero = vec![C64::new(0.0, 0.0); table.dim()];
        Ok(Simulator {
            config,
            table,
            step,
            phase_mode: PhaseMode::Reset,
            k: std::array::from_fn(|_| zero.clone()),
            tmp: zero.clone(),
            scratch: zero.clone(),
            rot: std::array::from_fn(|_| zero.clone()),
            rot_tau: None,
        })
    }

    pub fn with_phase_mode(mut self, mode: PhaseMode) -> Self {
        self.phase_mode = mode;
        self
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }

    pub fn phase_mode(&self) -> PhaseMode {
        self.phase_mode
    }

    /// Advances `state` by `h` in place.
    pub fn step(&mut self, state: &mut StateVector, drive: &Drive, h: f64) -> Result<()> {
        check_shape(self.table, state.amps.len())?;
        let rabi = self.config.rabi();
        let n = self.table.n();
        let t0 = state.tau;
        let t_mid = t0 + 0.5 * h;
        let t1 = t0 + h;

        if self.rot_tau != Some(t0) {
            rotations(self.table, t0, &mut self.rot[0]);
        }
        rotations(self.table, t_mid, &mut self.rot[1]);
        rotations(self.table, t1, &mut self.rot[2]);

        let [k1, k2, k3, k4] = &mut self.k;
        let [r0, r_mid, r1] = &self.rot;
        let tmp = &mut self.tmp;
        let sc = &mut self.scratch;
        let y = &state.amps;

        rhs_into(rabi, n, r0, drive.theta(t0), y, sc, k1);
        for ((t, &a), &d) in tmp.iter_mut().zip(y).zip(k1.iter()) {
            *t = a + d * (0.5 * h);
        }
        let theta_mid = drive.theta(t_mid);
        rhs_into(rabi, n, r_mid, theta_mid, tmp, sc, k2);
        for ((t, &a), &d) in tmp.iter_mut().zip(y).zip(k2.iter()) {
            *t = a + d * (0.5 * h);
        }
        rhs_into(rabi, n, r_mid, theta_mid, tmp, sc, k3);
        for ((t, &a), &d) in tmp.iter_mut().zip(y).zip(k3.iter()) {
            *t = a + d * h;
        }
        rhs_into(rabi, n, r1, drive.theta(t1), tmp, sc, k4);

        let w = h / 6.0;
        for (s, a) in state.amps.iter_mut().enumerate() {
            *a += (k1[s] + (k2[s] + k3[s]) * 2.0 + k4[s]) * w;
        }
        state.tau = t1;
        self.rot.swap(0, 2);
        self.rot_tau = Some(t1);
        if state.amps.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::Blowup { tau: state.tau });
        }
        Ok(())
    }

    /// Integrates `duration` under `drive`, landing exactly on the end time.
    fn integrate(&mut self, state: &mut StateVector, drive: &Drive, duration: f64, mut sink: Option<&mut Sampler>) -> Result<()> {
        if duration <= 0.0 {
            return Ok(());
        }
        let h = self.step;
        let start = state.tau;
        let end = start + duration;
        let steps = ((duration / h) * (1.0 - 1e-12)).ceil().max(1.0) as u64;
        for s in 0..steps {
            let t = start + s as f64 * h;
            let dt = if s + 1 == steps { end - t } else { h };
            self.step(state, drive, dt)?;
            if s + 1 == steps && state.tau != end {
                state.tau = end;
                self.rot_tau = None;
            }
            if let Some(sampler) = sink.as_deref_mut() {
                sampler.on_step(state);
            }
        }
        Ok(())
    }

    /// Advances `state` through one pulse. Absolute `tau` keeps accumulating;
    /// the rf phase is referenced according to the simulator's [`PhaseMode`].
    pub fn integrate_pulse(&mut self, state: &StateVector, pulse: &Pulse, sink: Option<&mut Sampler>) -> Result<StateVector> {
        check_shape(self.table, state.amps.len())?;
        let origin = match self.phase_mode {
            PhaseMode::Reset => state.tau,
            PhaseMode::Continuous => 0.0,
        };
        let drive = Drive { freq: pulse.drive, phase: pulse.phase, origin };
        let mut next = state.clone();
        self.integrate(&mut next, &drive, pulse.duration(self.config.rabi()), sink)?;
        Ok(next)
    }

    /// Runs every pulse in order, sampling every `seq.sample_stride` steps,
    /// at the start, and at each pulse boundary.
    pub fn run_sequence(&mut self, state: &StateVector, seq: &PulseSequence) -> Result<(StateVector, TimeSeries)> {
        if seq.pulses.is_empty() {
            return Err(Error::validation("pulses", "sequence is empty"));
        }
        let mut sampler = Sampler::new(seq.sample_stride);
        sampler.ensure(state);
        let mut current = state.clone();
        for pulse in &seq.pulses {
            current = self.integrate_pulse(&current, pulse, Some(&mut sampler))?;
            sampler.ensure(&current);
        }
        Ok((current, sampler.series))
    }
}
