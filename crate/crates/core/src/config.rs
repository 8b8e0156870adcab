//! Experiment description files and the built-in presets.
//!
//! Files are flat `key = value` lines; `#` starts a comment. Arrays are
//! bracketed, comma separated, and may span several lines:
//!
//! ```text
//! name       = ccnot
//! omega      = [100, 200, 300]        # Larmor frequencies, qubit 1 first
//! rabi       = 0.1
//! j1         = 2
//! j2         = 0.25
//! phi        = 0
//! phase_mode = reset                  # or continuous
//! initial    = [1:0.35355339059327373, 2:0.35355339059327373, 5:0.6123724356957945,
//!               7:0.5, 8:0.35355339059327373]
//! pulses     = [7-8:2]                # level i - level j : multiple of pi/rabi
//! ideal      = ccnot                  # not | cnot | ccnot | teleport | none
//! stride     = 100
//! ```
//!
//! Amplitudes accept complex literals such as `0.5-0.25i`. Pulse multiples
//! accept decimals or fractions (`1/2`). `preset = <name>` loads a built-in
//! experiment; keys after it override the preset's values. Optional keys:
//! `step`, `qubits` (checked against `omega`), `allow_any_pair`, `trace`,
//! `summary`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use num_complex::Complex64 as C64;

use crate::dynamics::PhaseMode;
use crate::error::{Error, Result};
use crate::ideal::{self, PureState};
use crate::model::{BasisIndex, RegisterConfig};

pub const DEFAULT_STRIDE: usize = 100;
const NORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Not,
    Hadamard,
    Cnot,
    Ccnot,
    Teleport,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Not, Preset::Hadamard, Preset::Cnot, Preset::Ccnot, Preset::Teleport];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Not => "not",
            Preset::Hadamard => "hadamard",
            Preset::Cnot => "cnot",
            Preset::Ccnot => "ccnot",
            Preset::Teleport => "teleport",
        }
    }

    /// Teleport pulse list in execution order.
    pub const TELEPORT_PULSES: [(usize, usize, f64); 10] = [
        (1, 3, 1.0),
        (5, 7, 1.0),
        (3, 4, 2.0),
        (7, 8, 2.0),
        (5, 7, 2.0),
        (7, 8, 2.0),
        (1, 5, 1.0),
        (7, 8, 1.0),
        (3, 7, 1.0),
        (2, 6, 1.0),
    ];

    pub fn spec(self) -> ExperimentSpec {
        let r = |x: f64| C64::new(x.sqrt(), 0.0);
        let (n, initial, pulses, ideal) = match self {
            Preset::Not => (1, vec![(1, r(1.0))], vec![PulseSpec::new(1, 2, 2.0)], Some(IdealTarget::Not)),
            Preset::Hadamard => (1, vec![(1, r(1.0))], vec![PulseSpec::new(1, 2, 1.0)], None),
            Preset::Cnot => (
                2,
                vec![(1, r(1.0 / 16.0)), (2, r(2.0 / 16.0)), (3, r(5.0 / 16.0)), (4, r(8.0 / 16.0))],
                vec![PulseSpec::new(3, 4, 2.0)],
                Some(IdealTarget::Cnot),
            ),
            Preset::Ccnot => (
                3,
                vec![
                    (1, r(1.0 / 8.0)),
                    (2, r(1.0 / 8.0)),
                    (5, r(3.0 / 8.0)),
                    (7, r(2.0 / 8.0)),
                    (8, r(1.0 / 8.0)),
                ],
                vec![PulseSpec::new(7, 8, 2.0)],
                Some(IdealTarget::Ccnot),
            ),
            Preset::Teleport => (
                3,
                vec![(1, r(3.0 / 8.0)), (5, r(5.0 / 8.0))],
                Self::TELEPORT_PULSES.iter().map(|&(i, j, m)| PulseSpec::new(i, j, m)).collect(),
                Some(IdealTarget::Teleport),
            ),
        };
        ExperimentSpec {
            name: self.name().to_string(),
            register: RegisterConfig::standard(n).expect("built-in parameters are valid"),
            initial,
            pulses,
            step: None,
            stride: DEFAULT_STRIDE,
            phase_mode: PhaseMode::Reset,
            ideal,
            allow_any_pair: false,
            trace: None,
            summary: None,
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::validation("preset", format!("unknown preset `{s}`")))
    }
}

/// Gate-level reference used to score a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdealTarget {
    /// NOT on qubit 1.
    Not,
    /// CNOT, control 2, target 1.
    Cnot,
    /// Toffoli, controls 3 and 2, target 1.
    Ccnot,
    /// `H_2`, `CNOT(2 -> 1)`, `CNOT(3 -> 2)`, `H_3`.
    Teleport,
}

impl IdealTarget {
    pub fn name(self) -> &'static str {
        match self {
            IdealTarget::Not => "not",
            IdealTarget::Cnot => "cnot",
            IdealTarget::Ccnot => "ccnot",
            IdealTarget::Teleport => "teleport",
        }
    }

    fn min_qubits(self) -> usize {
        match self {
            IdealTarget::Not => 1,
            IdealTarget::Cnot => 2,
            IdealTarget::Ccnot | IdealTarget::Teleport => 3,
        }
    }

    pub fn apply(self, state: &PureState) -> Result<PureState> {
        match self {
            IdealTarget::Not => ideal::apply_not(state, 1),
            IdealTarget::Cnot => ideal::apply_cnot(state, 2, 1),
            IdealTarget::Ccnot => ideal::apply_toffoli(state, 3, 2, 1),
            IdealTarget::Teleport => ideal::teleport_circuit(state),
        }
    }
}

fn parse_ideal(s: &str) -> Option<Option<IdealTarget>> {
    Some(match s {
        "none" => None,
        "not" => Some(IdealTarget::Not),
        "cnot" => Some(IdealTarget::Cnot),
        "ccnot" => Some(IdealTarget::Ccnot),
        "teleport" => Some(IdealTarget::Teleport),
        _ => return None,
    })
}

/// A pulse request by level pair and duration in units of `pi / rabi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSpec {
    pub i: usize,
    pub j: usize,
    pub multiple: f64,
}

impl PulseSpec {
    pub fn new(i: usize, j: usize, multiple: f64) -> Self {
        PulseSpec { i, j, multiple }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub register: RegisterConfig,
    /// `(decimal index, amplitude)`; unlisted states start at zero.
    pub initial: Vec<(usize, C64)>,
    pub pulses: Vec<PulseSpec>,
    /// Integrator step; `None` selects the default rule.
    pub step: Option<f64>,
    pub stride: usize,
    pub phase_mode: PhaseMode,
    pub ideal: Option<IdealTarget>,
    pub allow_any_pair: bool,
    pub trace: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn n(&self) -> usize {
        self.register.n()
    }

    /// Checks indices, pulse list, stride and ideal target, and normalizes
    /// the initial amplitudes (with a warning) when they are off by more
    /// than `1e-9`.
    pub fn validate(&mut self) -> Result<()> {
        let n = self.n();
        if self.pulses.is_empty() {
            return Err(Error::validation("pulses", "sequence is empty"));
        }
        if self.initial.is_empty() {
            return Err(Error::validation("initial", "no amplitudes given"));
        }
        let mut seen = vec![false; 1 << n];
        for &(xi, a) in &self.initial {
            let s = BasisIndex::new(xi, n).map_err(|e| Error::validation("initial", e.to_string()))?;
            if std::mem::replace(&mut seen[s.raw()], true) {
                return Err(Error::validation("initial", format!("state {xi} listed twice")));
            }
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::validation("initial", format!("non-finite amplitude for state {xi}")));
            }
        }
        let norm_sqr: f64 = self.initial.iter().map(|(_, a)| a.norm_sqr()).sum();
        if norm_sqr == 0.0 {
            return Err(Error::validation("initial", "all amplitudes are zero"));
        }
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            warn!("initial amplitudes have norm^2 {norm_sqr}; normalizing");
            let scale = norm_sqr.sqrt();
            for (_, a) in &mut self.initial {
                *a /= scale;
            }
        }
        for p in &self.pulses {
            crate::dynamics::Pulse::new(n, p.i, p.j, p.multiple, 0.0, 0.0, self.allow_any_pair)
                .map_err(|e| Error::validation("pulses", e.to_string()))?;
        }
        if self.stride == 0 {
            return Err(Error::validation("stride", "must be at least 1"));
        }
        if let Some(h) = self.step {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::validation("step", format!("must be positive, got {h}")));
            }
        }
        if let Some(t) = self.ideal {
            if n < t.min_qubits() || (t == IdealTarget::Teleport && n != 3) {
                return Err(Error::validation("ideal", format!("`{}` target does not fit {n} qubit(s)", t.name())));
            }
        }
        Ok(())
    }

    /// Initial state as a dense amplitude vector.
    pub fn initial_amps(&self) -> Vec<C64> {
        let mut amps = vec![C64::new(0.0, 0.0); self.register.dim()];
        for &(xi, a) in &self.initial {
            amps[xi - 1] = a;
        }
        amps
    }

    /// Gate-level reference populations, if the spec names a target.
    pub fn ideal_populations(&self) -> Result<Option<Vec<f64>>> {
        let Some(target) = self.ideal else { return Ok(None) };
        let start = PureState::new(self.initial_amps())?;
        Ok(Some(ideal::ideal_populations(&target.apply(&start)?)))
    }

    /// Renders the spec in the file format; [`parse_spec`] reads it back.
    pub fn describe(&self) -> String {
        let c = &self.register;
        let mut out = String::new();
        let list = |xs: &[f64]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        writeln!(out, "name = {}", self.name).unwrap();
        writeln!(out, "qubits = {}", c.n()).unwrap();
        writeln!(out, "omega = [{}]", list(c.omega())).unwrap();
        writeln!(out, "rabi = {:?}", c.rabi()).unwrap();
        writeln!(out, "j1 = {:?}", c.j1()).unwrap();
        writeln!(out, "j2 = {:?}", c.j2()).unwrap();
        writeln!(out, "phi = {:?}", c.phi()).unwrap();
        let mode = match self.phase_mode {
            PhaseMode::Reset => "reset",
            PhaseMode::Continuous => "continuous",
        };
        writeln!(out, "phase_mode = {mode}").unwrap();
        let init: Vec<String> = self.initial.iter().map(|&(xi, a)| format!("{xi}:{}", fmt_complex(a))).collect();
        writeln!(out, "initial = [{}]", init.join(", ")).unwrap();
        writeln!(out, "pulses = [").unwrap();
        let n = c.n();
        for (k, p) in self.pulses.iter().enumerate() {
            let sep = if k + 1 == self.pulses.len() { "" } else { "," };
            let labels = match (BasisIndex::new(p.i, n), BasisIndex::new(p.j, n)) {
                (Ok(a), Ok(b)) => format!("{} <-> {}", a.ket(), b.ket()),
                _ => "invalid levels".into(),
            };
            writeln!(out, "    {}-{}:{:?}{sep}  # {labels}", p.i, p.j, p.multiple).unwrap();
        }
        writeln!(out, "]").unwrap();
        if let Some(h) = self.step {
            writeln!(out, "step = {h:?}").unwrap();
        }
        writeln!(out, "stride = {}", self.stride).unwrap();
        writeln!(out, "ideal = {}", self.ideal.map_or("none", |t| t.name())).unwrap();
        writeln!(out, "allow_any_pair = {}", self.allow_any_pair).unwrap();
        if let Some(p) = &self.trace {
            writeln!(out, "trace = {}", p.display()).unwrap();
        }
        if let Some(p) = &self.summary {
            writeln!(out, "summary = {}", p.display()).unwrap();
        }
        out
    }
}

fn fmt_complex(a: C64) -> String {
    if a.im == 0.0 {
        format!("{:?}", a.re)
    } else if a.im.is_sign_negative() {
        format!("{:?}-{:?}i", a.re, -a.im)
    } else {
        format!("{:?}+{:?}i", a.re, a.im)
    }
}

/// Splits the text into `(line, key, value)` entries, joining bracketed
/// values that span lines.
fn entries(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    let mut pending: Option<(usize, String, String)> = None;
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some((start, key, mut value)) = pending.take() {
            value.push(' ');
            value.push_str(line);
            if line.contains(']') {
                out.push((start, key, value));
            } else {
                pending = Some((start, key, value));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse { line: line_no, msg: format!("expected `key = value`, got `{line}`") });
        };
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if key.is_empty() {
            return Err(Error::Parse { line: line_no, msg: "missing key".into() });
        }
        if value.starts_with('[') && !value.contains(']') {
            pending = Some((line_no, key, value));
        } else {
            out.push((line_no, key, value));
        }
    }
    if let Some((start, key, _)) = pending {
        return Err(Error::Parse { line: start, msg: format!("unterminated array for `{key}`") });
    }
    Ok(out)
}

fn array_items(line: usize, value: &str) -> Result<Vec<String>> {
    let inner = value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .ok_or_else(|| Error::Parse { line, msg: format!("expected an array literal, got `{value}`") })?;
    Ok(inner.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect())
}

fn parse_num<T: FromStr>(line: usize, key: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("`{key}`: cannot parse `{s}`") })
}

/// Decimal or `a/b`.
fn parse_multiple(line: usize, s: &str) -> Result<f64> {
    match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = parse_num(line, "pulses", a)?;
            let b: f64 = parse_num(line, "pulses", b)?;
            Ok(a / b)
        }
        None => parse_num(line, "pulses", s),
    }
}

fn parse_pulse(line: usize, item: &str) -> Result<PulseSpec> {
    let err = || Error::Parse { line, msg: format!("pulse `{item}` is not of the form `i-j:m`") };
    let (pair, m) = item.split_once(':').ok_or_else(err)?;
    let (i, j) = pair.split_once('-').ok_or_else(err)?;
    Ok(PulseSpec::new(parse_num(line, "pulses", i)?, parse_num(line, "pulses", j)?, parse_multiple(line, m.trim())?))
}

fn parse_bool(line: usize, key: &str, s: &str) -> Result<bool> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse { line, msg: format!("`{key}`: expected true or false, got `{s}`") }),
    }
}

/// Parses and validates an experiment description.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let mut fields: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut base: Option<ExperimentSpec> = None;
    for (line, key, value) in entries(text)? {
        if key == "preset" {
            if base.is_some() || !fields.is_empty() {
                return Err(Error::Parse { line, msg: "`preset` must be the first key".into() });
            }
            base = Some(value.parse::<Preset>()?.spec());
            continue;
        }
        if fields.insert(key.clone(), (line, value)).is_some() {
            return Err(Error::Parse { line, msg: format!("duplicate key `{key}`") });
        }
    }

    let base_register = base.as_ref().map(|b| b.register.clone());
    let mut omega = base_register.as_ref().map(|r| r.omega().to_vec());
    let mut rabi = base_register.as_ref().map(|r| r.rabi());
    let mut j1 = base_register.as_ref().map_or(0.0, |r| r.j1());
    let mut j2 = base_register.as_ref().map_or(0.0, |r| r.j2());
    let mut phi = base_register.as_ref().map_or(0.0, |r| r.phi());
    let mut spec_name = base.as_ref().map_or_else(|| "custom".to_string(), |b| b.name.clone());
    let mut initial = base.as_ref().map(|b| b.initial.clone());
    let mut pulses = base.as_ref().map(|b| b.pulses.clone());
    let mut step = base.as_ref().and_then(|b| b.step);
    let mut stride = base.as_ref().map_or(DEFAULT_STRIDE, |b| b.stride);
    let mut phase_mode = base.as_ref().map_or(PhaseMode::Reset, |b| b.phase_mode);
    let mut ideal = base.as_ref().and_then(|b| b.ideal);
    let mut allow_any_pair = base.as_ref().is_some_and(|b| b.allow_any_pair);
    let mut trace = base.as_ref().and_then(|b| b.trace.clone());
    let mut summary = base.as_ref().and_then(|b| b.summary.clone());
    let mut qubits: Option<(usize, usize)> = None;

    for (key, (line, value)) in &fields {
        let line = *line;
        let v = value.as_str();
        match key.as_str() {
            "name" => spec_name = v.to_string(),
            "qubits" => qubits = Some((line, parse_num(line, key, v)?)),
            "omega" => {
                omega = Some(
                    array_items(line, v)?
                        .iter()
                        .map(|s| parse_num(line, key, s))
                        .collect::<Result<_>>()?,
                )
            }
            "rabi" => rabi = Some(parse_num(line, key, v)?),
            "j1" => j1 = parse_num(line, key, v)?,
            "j2" => j2 = parse_num(line, key, v)?,
            "phi" => phi = parse_num(line, key, v)?,
            "phase_mode" => {
                phase_mode = v.parse().map_err(|msg| Error::Parse { line, msg })?;
            }
            "initial" => {
                let mut pairs = Vec::new();
                for item in array_items(line, v)? {
                    let (xi, amp) = item.split_once(':').ok_or_else(|| Error::Parse {
                        line,
                        msg: format!("initial entry `{item}` is not of the form `index:amplitude`"),
                    })?;
                    pairs.push((parse_num(line, key, xi)?, parse_num::<C64>(line, key, amp)?));
                }
                initial = Some(pairs);
            }
            "pulses" => {
                pulses = Some(array_items(line, v)?.iter().map(|s| parse_pulse(line, s)).collect::<Result<_>>()?)
            }
            "step" => step = Some(parse_num(line, key, v)?),
            "stride" => stride = parse_num(line, key, v)?,
            "ideal" => {
                ideal = parse_ideal(v).ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("unknown ideal target `{v}` (expected not|cnot|ccnot|teleport|none)"),
                })?
            }
            "allow_any_pair" => allow_any_pair = parse_bool(line, key, v)?,
            "trace" => trace = Some(PathBuf::from(v)),
            "summary" => summary = Some(PathBuf::from(v)),
            _ => return Err(Error::Parse { line, msg: format!("unknown key `{key}`") }),
        }
    }

    let omega = omega.ok_or_else(|| Error::validation("omega", "missing"))?;
    let rabi = rabi.ok_or_else(|| Error::validation("rabi", "missing"))?;
    if let Some((line, n)) = qubits {
        if n != omega.len() {
            return Err(Error::Parse { line, msg: format!("`qubits = {n}` but omega has {} entries", omega.len()) });
        }
    }
    let register = RegisterConfig::new(omega, rabi, j1, j2, phi).map_err(|e| {
        let msg = e.to_string();
        let field = ["rabi", "j1", "j2", "phase"]
            .into_iter()
            .find(|k| msg.contains(k))
            .map_or("omega", |k| if k == "phase" { "phi" } else { k });
        Error::validation(field, msg)
    })?;
    let mut spec = ExperimentSpec {
        name: spec_name,
        register,
        initial: initial.ok_or_else(|| Error::validation("initial", "missing"))?,
        pulses: pulses.ok_or_else(|| Error::validation("pulses", "missing"))?,
        step,
        stride,
        phase_mode,
        ideal,
        allow_any_pair,
        trace,
        summary,
    };
    spec.validate()?;
    Ok(spec)
}

/// Reads and parses a spec file.
pub fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_spec(&text)
}
