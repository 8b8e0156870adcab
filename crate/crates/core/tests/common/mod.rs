//! Lab-frame reference integrator used by the integration and acceptance
//! tests. Everything here is rebuilt from the register parameters without
//! going through the library's dynamics module.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

pub struct LabRegister {
    pub omega: Vec<f64>,
    pub rabi: f64,
    pub j1: f64,
    pub j2: f64,
    pub phi: f64,
}

impl LabRegister {
    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    fn spin(raw: usize, k: usize) -> f64 {
        if raw >> k & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Diagonal energies, zero-based raw index.
    pub fn energies(&self) -> Vec<f64> {
        let n = self.n();
        (0..self.dim())
            .map(|raw| {
                let s = |k| Self::spin(raw, k);
                let zeeman: f64 = (0..n).map(|k| -0.5 * self.omega[k] * s(k)).sum();
                let first: f64 = (0..n.saturating_sub(1)).map(|k| 0.5 * self.j1 * s(k) * s(k + 1)).sum();
                let second: f64 = (0..n.saturating_sub(2)).map(|k| 0.5 * self.j2 * s(k) * s(k + 2)).sum();
                zeeman + first + second
            })
            .collect()
    }

    /// Dense lab-frame Hamiltonian at rf phase `theta`, row-major.
    pub fn hamiltonian(&self, energies: &[f64], theta: f64) -> Vec<C64> {
        let dim = self.dim();
        let n = self.n();
        let mut h = vec![C64::new(0.0, 0.0); dim * dim];
        let (sin, cos) = theta.sin_cos();
        for row in 0..dim {
            let z: f64 = (0..n).map(|k| Self::spin(row, k)).sum();
            h[row * dim + row] = C64::new(energies[row] + 0.5 * self.rabi * sin * z, 0.0);
            for k in 0..n {
                let col = row ^ (1 << k);
                // +1 when the partner has spin k down (bit clear)
                let m = Self::spin(col, k);
                h[row * dim + col] = C64::new(0.0, -0.5 * self.rabi * cos * m);
            }
        }
        h
    }
}

/// A pulse between zero-based raw levels `a`, `b` lasting `multiple * pi / rabi`.
#[derive(Clone, Copy)]
pub struct LabPulse {
    pub a: usize,
    pub b: usize,
    pub multiple: f64,
}

pub struct LabResult {
    pub tau: f64,
    pub psi: Vec<C64>,
    /// `psi` with the free phases removed: `exp(i e tau) psi`.
    pub interaction: Vec<C64>,
}

impl LabResult {
    pub fn populations(&self) -> Vec<f64> {
        self.psi.iter().map(|a| a.norm_sqr()).collect()
    }
}

fn derivative(reg: &LabRegister, energies: &[f64], theta: f64, psi: &[C64]) -> Vec<C64> {
    let dim = psi.len();
    let h = reg.hamiltonian(energies, theta);
    (0..dim)
        .map(|r| {
            let acc: C64 = (0..dim).map(|c| h[r * dim + c] * psi[c]).sum();
            -C64::i() * acc
        })
        .collect()
}

fn axpy(y: &[C64], a: f64, x: &[C64]) -> Vec<C64> {
    y.iter().zip(x).map(|(y, x)| y + x * a).collect()
}

/// Integrates `i dpsi/dtau = H psi` through `pulses` with a plain RK4 of at
/// most `h` per step, each pulse driven at its own resonance with the rf
/// phase restarting at the pulse start (or counted from zero if
/// `continuous`).
pub fn lab_run(reg: &LabRegister, initial: &[C64], pulses: &[LabPulse], h: f64, continuous: bool) -> LabResult {
    let e = reg.energies();
    let mut psi = initial.to_vec();
    let mut tau = 0.0;
    for p in pulses {
        let freq = (e[p.a] - e[p.b]).abs();
        let origin = if continuous { 0.0 } else { tau };
        let duration = p.multiple * PI / reg.rabi;
        let steps = (duration / h).ceil() as usize;
        let dt = duration / steps as f64;
        let start = tau;
        for s in 0..steps {
            let t0 = start + s as f64 * dt;
            let theta = |t: f64| freq * (t - origin) + reg.phi;
            let k1 = derivative(reg, &e, theta(t0), &psi);
            let k2 = derivative(reg, &e, theta(t0 + 0.5 * dt), &axpy(&psi, 0.5 * dt, &k1));
            let k3 = derivative(reg, &e, theta(t0 + 0.5 * dt), &axpy(&psi, 0.5 * dt, &k2));
            let k4 = derivative(reg, &e, theta(t0 + dt), &axpy(&psi, dt, &k3));
            for i in 0..psi.len() {
                psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
            }
        }
        tau = start + duration;
    }
    let interaction = psi.iter().zip(&e).map(|(a, &en)| a * C64::cis(en * tau)).collect();
    LabResult { tau, psi, interaction }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
