//! Jaynes-Cummings models with an auxiliary atomic level, sector-projected
//! v-STIRAP photon injection, idealized Fock pumping, and the five-level
//! effective switchable coupling.

use std::sync::Arc;

use ndarray::{array, Array2};
use num_complex::Complex64 as C64;

use crate::dynamics::{propagate, PropagationOptions, Trajectory};
use crate::error::{Error, Result};
use crate::hilbert::{Basis, QuantumState};
use crate::operator::{HermitianOperator, TimeDependentHamiltonian};
use crate::pulse::{cstirap_detunings, real_fn, Envelope, RealFn};
use crate::report::ProtocolReport;

/// Two-level atom {g, e} plus auxiliary lower level b, coupled to a single
/// cavity mode truncated at `n_max` photons.
#[derive(Debug, Clone)]
pub struct CavityAtomSystem {
    /// Bohr splitting of the g-e transition.
    pub epsilon: f64,
    /// Depth of the auxiliary level below g.
    pub epsilon_b: f64,
    pub omega_c: f64,
    pub g: f64,
    pub n_max: usize,
}

impl CavityAtomSystem {
    pub fn new(epsilon: f64, epsilon_b: f64, omega_c: f64, g: f64, n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidParameter(format!(
                "Fock truncation n_max must be at least 2, got {n_max}"
            )));
        }
        Ok(Self { epsilon, epsilon_b, omega_c, g, n_max })
    }

    /// Warnings about parameter regimes outside the model's assumptions.
    pub fn regime_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.g != 0.0 && ((self.epsilon_b - self.omega_c).abs() / self.g.abs()) < 10.0 {
            w.push(format!(
                "|epsilon_b - omega_c| / g = {:.2} < 10: the auxiliary level is not \
                 sufficiently detuned from the cavity",
                (self.epsilon_b - self.omega_c).abs() / self.g.abs()
            ));
        }
        w
    }

    /// Basis of the {g,e} x Fock block: `0g, 0e, 1g, 1e, ...`
    pub fn ge_basis(&self) -> Result<Arc<Basis>> {
        let mut names = Vec::with_capacity(2 * (self.n_max + 1));
        for n in 0..=self.n_max {
            names.push(format!("{n}g"));
            names.push(format!("{n}e"));
        }
        Basis::new(names)
    }

    /// Basis of the full three-level-atom product space:
    /// `0b, 0g, 0e, 1b, 1g, 1e, ...`
    pub fn full_basis(&self) -> Result<Arc<Basis>> {
        let mut names = Vec::with_capacity(3 * (self.n_max + 1));
        for n in 0..=self.n_max {
            names.push(format!("{n}b"));
            names.push(format!("{n}g"));
            names.push(format!("{n}e"));
        }
        Basis::new(names)
    }
}

/// One three-level invariant subspace of the driven model:
/// `{|n b>, |n+1 g>, |n e>}`.
#[derive(Debug, Clone, Copy)]
pub struct SectorIndex {
    pub n: usize,
}

impl SectorIndex {
    pub fn labels(&self) -> [String; 3] {
        [
            format!("{}b", self.n),
            format!("{}g", self.n + 1),
            format!("{}e", self.n),
        ]
    }
}

/// Jaynes-Cummings Hamiltonian on the {g,e} x Fock basis:
/// `eps |e><e| + w_c a^dag a + g (a^dag |g><e| + a |e><g|)`.
pub fn jc_hamiltonian(system: &CavityAtomSystem) -> Result<HermitianOperator> {
    let basis = system.ge_basis()?;
    let d = basis.dim();
    let mut m = Array2::<C64>::zeros((d, d));
    let idx = |n: usize, e: bool| 2 * n + usize::from(e);
    for n in 0..=system.n_max {
        m[[idx(n, false), idx(n, false)]] = C64::new(n as f64 * system.omega_c, 0.0);
        m[[idx(n, true), idx(n, true)]] =
            C64::new(n as f64 * system.omega_c + system.epsilon, 0.0);
    }
    for n in 0..system.n_max {
        // <n+1, g| H |n, e> = g sqrt(n+1)
        let v = C64::new(system.g * ((n + 1) as f64).sqrt(), 0.0);
        m[[idx(n + 1, false), idx(n, true)]] = v;
        m[[idx(n, true), idx(n + 1, false)]] = v;
    }
    HermitianOperator::new(basis, m)
}

/// Full Hamiltonian with the auxiliary level:
/// `-eps_b |b><b| + H_JC + w_c a^dag a (x) |b><b|`.
pub fn jc3_hamiltonian(system: &CavityAtomSystem) -> Result<HermitianOperator> {
    let basis = system.full_basis()?;
    let d = basis.dim();
    let mut m = Array2::<C64>::zeros((d, d));
    let idx = |n: usize, atom: usize| 3 * n + atom; // 0 = b, 1 = g, 2 = e
    for n in 0..=system.n_max {
        m[[idx(n, 0), idx(n, 0)]] =
            C64::new(n as f64 * system.omega_c - system.epsilon_b, 0.0);
        m[[idx(n, 1), idx(n, 1)]] = C64::new(n as f64 * system.omega_c, 0.0);
        m[[idx(n, 2), idx(n, 2)]] =
            C64::new(n as f64 * system.omega_c + system.epsilon, 0.0);
    }
    for n in 0..system.n_max {
        let v = C64::new(system.g * ((n + 1) as f64).sqrt(), 0.0);
        m[[idx(n + 1, 1), idx(n, 2)]] = v;
        m[[idx(n, 2), idx(n + 1, 1)]] = v;
    }
    HermitianOperator::new(basis, m)
}

/// Lab-frame driven model: `jc3 + Wp(t) cos(w_p t) (|b><e| + |e><b|) (x) 1`.
pub fn jc3_driven_lab(
    system: &CavityAtomSystem,
    omega_p: RealFn,
    carrier: f64,
) -> Result<TimeDependentHamiltonian> {
    let h0 = jc3_hamiltonian(system)?;
    let basis = h0.basis().clone();
    let n_max = system.n_max;
    let m0 = h0.matrix().clone();
    Ok(TimeDependentHamiltonian::new(basis, move |t| {
        let mut m = m0.clone();
        let w = C64::new(omega_p(t) * (carrier * t).cos(), 0.0);
        for n in 0..=n_max {
            let b = 3 * n;
            let e = 3 * n + 2;
            m[[b, e]] += w;
            m[[e, b]] += w;
        }
        m
    }))
}

/// Rotating-frame sector Hamiltonian on `{|n b>, |n+1 g>, |n e>}`: the
/// Lambda form with the quantized Stokes leg replaced by `2 g sqrt(n+1)`:
///
/// ```text
/// [ 0        0                  Wp/2      ]
/// [ 0        delta(t)           g sqrt(n+1) ]
/// [ Wp/2     g sqrt(n+1)        delta_p(t) ]
/// ```
pub fn vstirap_sector_hamiltonian(
    system: &CavityAtomSystem,
    sector: SectorIndex,
    omega_p: RealFn,
    delta_p: RealFn,
    delta_s: RealFn,
) -> Result<TimeDependentHamiltonian> {
    if sector.n + 1 > system.n_max {
        return Err(Error::TruncationOverflow(format!(
            "sector n = {} requires n_max >= {}",
            sector.n,
            sector.n + 1
        )));
    }
    let basis = Basis::new(sector.labels())?;
    let gs = system.g * ((sector.n + 1) as f64).sqrt();
    Ok(TimeDependentHamiltonian::new(basis, move |t| {
        let wp = C64::new(omega_p(t) / 2.0, 0.0);
        let gq = C64::new(gs, 0.0);
        let delta = delta_p(t) - delta_s(t);
        array![
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0), wp],
            [C64::new(0.0, 0.0), C64::new(delta, 0.0), gq],
            [wp, gq, C64::new(delta_p(t), 0.0)]
        ]
    }))
}

/// Rotating-frame Hamiltonian over the whole truncated space: the direct sum
/// of all sector blocks. `|0g>` is fully decoupled and the top pair
/// `{|n_max b>, |n_max e>}` keeps its drive coupling without a Stokes
/// partner.
pub fn vstirap_full_hamiltonian(
    system: &CavityAtomSystem,
    omega_p: RealFn,
    delta_p: RealFn,
    delta_s: RealFn,
) -> Result<TimeDependentHamiltonian> {
    let basis = system.full_basis()?;
    let n_max = system.n_max;
    let g = system.g;
    let d = basis.dim();
    Ok(TimeDependentHamiltonian::new(basis, move |t| {
        let mut m = Array2::<C64>::zeros((d, d));
        let wp = C64::new(omega_p(t) / 2.0, 0.0);
        let dp = delta_p(t);
        let delta = dp - delta_s(t);
        let idx = |n: usize, atom: usize| 3 * n + atom;
        for n in 0..=n_max {
            let b = idx(n, 0);
            let e = idx(n, 2);
            // sector-local diagonal: 0 on |n b>, delta on |n+1 g>, delta_p on |n e>
            m[[e, e]] = C64::new(dp, 0.0);
            m[[b, e]] = wp;
            m[[e, b]] = wp;
            if n + 1 <= n_max {
                let gq = idx(n + 1, 1);
                m[[gq, gq]] = C64::new(delta, 0.0);
                let gv = C64::new(g * ((n + 1) as f64).sqrt(), 0.0);
                m[[gq, e]] = gv;
                m[[e, gq]] = gv;
            }
        }
        m
    }))
}

/// Detuning-controlled v-STIRAP configuration. The schedule is the c-STIRAP
/// family with the frequency scale set by the vacuum Stokes coupling
/// `Omega0 = 2 g`.
#[derive(Debug, Clone)]
pub struct VStirapConfig {
    pub sector: SectorIndex,
    /// `Omega0 * T` adiabaticity product for the derived time base.
    pub omega0_t: f64,
    pub h_delta: f64,
    pub kappa_delta: f64,
    pub kappa_p: f64,
    /// tanh switch centers, in units of the pulse width.
    pub tau_frac: f64,
    /// tanh rise time, in units of the pulse width.
    pub tau_ch_frac: f64,
    /// pump center, in units of the pulse width.
    pub t_c_frac: f64,
    /// Run over the whole truncated product space instead of the projected
    /// three-level sector.
    pub full_space: bool,
    pub resolution: usize,
    pub options: PropagationOptions,
}

impl VStirapConfig {
    pub fn fig3_family(sector: usize) -> Self {
        Self {
            sector: SectorIndex { n: sector },
            omega0_t: 40.0,
            h_delta: 10.0,
            kappa_delta: 1.2,
            kappa_p: 1.0,
            tau_frac: 2.0,
            tau_ch_frac: 0.6,
            t_c_frac: 1.5,
            full_space: false,
            resolution: 2000,
            options: PropagationOptions::default(),
        }
    }
}

struct VStirapSchedule {
    omega_p: RealFn,
    delta_p: RealFn,
    delta_s: RealFn,
    t_max: f64,
}

fn vstirap_schedule(system: &CavityAtomSystem, config: &VStirapConfig) -> Result<VStirapSchedule> {
    let omega0 = 2.0 * system.g;
    if omega0 == 0.0 {
        // no Stokes channel at all; keep a finite window so the run is defined
        let width = 1.0;
        return Ok(VStirapSchedule {
            omega_p: real_fn(|_| 0.0),
            delta_p: real_fn(|_| 0.0),
            delta_s: real_fn(|_| 0.0),
            t_max: 3.0 * width,
        });
    }
    let width = config.omega0_t / omega0;
    let tau = config.tau_frac * width;
    let tau_ch = config.tau_ch_frac * width;
    let t_c = config.t_c_frac * width;
    let (ds_env, dp_env) =
        cstirap_detunings(omega0, config.h_delta, config.kappa_delta, tau, tau_ch)?;
    let pump_env =
        Envelope::Gaussian { amplitude: config.kappa_p * omega0, center: t_c, width };
    Ok(VStirapSchedule {
        omega_p: pump_env.as_fn(),
        delta_p: dp_env.as_fn(),
        delta_s: ds_env.as_fn(),
        t_max: 3.0 * width + tau.abs().max(t_c.abs()),
    })
}

fn grid(t_max: f64, resolution: usize) -> Vec<f64> {
    let n = resolution.max(2);
    (0..n)
        .map(|k| -t_max + 2.0 * t_max * k as f64 / (n - 1) as f64)
        .collect()
}

/// Photon-number expectation of a full- or sector-space trajectory state,
/// reading the photon count from each basis label.
fn photon_number(traj: &Trajectory) -> f64 {
    let finals = traj.final_populations();
    traj.basis()
        .labels()
        .iter()
        .zip(finals.iter())
        .map(|(l, p)| {
            let digits: String =
                l.name.chars().take_while(|c| c.is_ascii_digit()).collect();
            digits.parse::<f64>().unwrap_or(0.0) * p
        })
        .sum()
}

/// Vacuum-stimulated Raman passage `|n b> -> |n+1 g>`, injecting one photon.
pub fn run_vstirap(system: &CavityAtomSystem, config: &VStirapConfig) -> Result<ProtocolReport> {
    let sched = vstirap_schedule(system, config)?;
    let sector = config.sector;
    let [start, target, intermediate] = sector.labels();
    let g = grid(sched.t_max, config.resolution);
    let traj = if config.full_space {
        let h = vstirap_full_hamiltonian(
            system,
            sched.omega_p.clone(),
            sched.delta_p.clone(),
            sched.delta_s.clone(),
        )?;
        let psi0 = QuantumState::ket(h.basis().clone(), &start)?;
        propagate(&h, &psi0, &g, &config.options)?
    } else {
        let h = vstirap_sector_hamiltonian(
            system,
            sector,
            sched.omega_p.clone(),
            sched.delta_p.clone(),
            sched.delta_s.clone(),
        )?;
        let psi0 = QuantumState::ket(h.basis().clone(), &start)?;
        propagate(&h, &psi0, &g, &config.options)?
    };
    let mut report = ProtocolReport::new(traj, &target, &intermediate);
    report
        .extras
        .insert("final_photon_number".into(), photon_number(&report.trajectory));
    if config.full_space {
        // population outside the starting sector (plus the decoupled |0g>)
        let sector_labels = sector.labels();
        let leakage: f64 = report
            .trajectory
            .basis()
            .labels()
            .iter()
            .zip(report.trajectory.final_populations())
            .filter(|(l, _)| !sector_labels.contains(&l.name))
            .map(|(_, p)| p)
            .sum();
        report.extras.insert("sector_leakage".into(), leakage);
    }
    report.warnings.extend(system.regime_warnings());
    Ok(report)
}

/// Final photon-number distribution after repeated v-STIRAP cycles with an
/// idealized projective decay `|n g> -> |n b>` between cycles.
#[derive(Debug, Clone)]
pub struct PhotonDistribution {
    pub probabilities: Vec<f64>,
    pub cycle_efficiencies: Vec<f64>,
}

pub fn fock_pumping_cycle(
    system: &CavityAtomSystem,
    cycles: usize,
    config: &VStirapConfig,
) -> Result<PhotonDistribution> {
    if cycles + 1 > system.n_max {
        return Err(Error::TruncationOverflow(format!(
            "{cycles} cycles need n_max >= {}, got {}",
            cycles + 1,
            system.n_max
        )));
    }
    let basis = system.full_basis()?;
    let mut psi = QuantumState::ket(basis.clone(), "0b")?;
    let mut cycle_efficiencies = Vec::with_capacity(cycles);

    for cycle in 0..cycles {
        let sched = vstirap_schedule(system, config)?;
        let h = vstirap_full_hamiltonian(
            system,
            sched.omega_p.clone(),
            sched.delta_p.clone(),
            sched.delta_s.clone(),
        )?;
        let g = grid(sched.t_max, config.resolution);
        let traj = propagate(&h, &psi, &g, &config.options)?;
        let target = format!("{}g", cycle + 1);
        cycle_efficiencies.push(traj.final_population(&target)?);

        // idealized fast decay: move every g-component onto the b level of
        // the same photon number
        let last = traj.final_state();
        let mut amps = last.amplitudes().clone();
        for n in 0..=system.n_max {
            let bi = 3 * n;
            let gi = 3 * n + 1;
            let total = (amps[bi].norm_sqr() + amps[gi].norm_sqr()).sqrt();
            let anchor = if amps[bi].norm() >= amps[gi].norm() { amps[bi] } else { amps[gi] };
            let phase = if anchor.norm() > 0.0 {
                anchor / anchor.norm()
            } else {
                C64::new(1.0, 0.0)
            };
            amps[bi] = phase * total;
            amps[gi] = C64::new(0.0, 0.0);
        }
        psi = QuantumState::normalized(basis.clone(), amps)?;
    }

    let pops = psi.populations();
    let probabilities = (0..=system.n_max)
        .map(|n| pops[3 * n] + pops[3 * n + 1] + pops[3 * n + 2])
        .collect();
    Ok(PhotonDistribution { probabilities, cycle_efficiencies })
}

/// Five-level truncated model on `{|0g>, |0e>, |1b>, |1g>, |1e>}`:
///
/// ```text
/// [ 0      Ws/2   0      0      0    ]
/// [ Ws/2   0      0      g      0    ]
/// [ 0      0      0      Wp1/2  0    ]
/// [ 0      g      Wp1/2  d2     Ws/2 ]
/// [ 0      0      0      Ws/2   d2   ]
/// ```
pub fn five_level_hamiltonian(
    system: &CavityAtomSystem,
    omega_p1: RealFn,
    omega_s: RealFn,
    delta2: f64,
) -> Result<TimeDependentHamiltonian> {
    let basis = Basis::new(["0g", "0e", "1b", "1g", "1e"])?;
    let g = system.g;
    Ok(TimeDependentHamiltonian::new(basis, move |t| {
        let ws = C64::new(omega_s(t) / 2.0, 0.0);
        let wp = C64::new(omega_p1(t) / 2.0, 0.0);
        let gv = C64::new(g, 0.0);
        let z = C64::new(0.0, 0.0);
        let d2 = C64::new(delta2, 0.0);
        array![
            [z, ws, z, z, z],
            [ws, z, z, gv, z],
            [z, z, z, wp, z],
            [z, gv, wp, d2, ws],
            [z, z, z, ws, d2]
        ]
    }))
}

/// Effective couplings of the switchable atom-cavity interaction.
#[derive(Clone)]
pub struct EffectiveCouplings {
    /// Static shift magnitude `g^2 / delta2` of the intermediate level.
    pub s_g: f64,
    /// Drive-induced shift `-Wp1(t)^2 / (4 delta2)` of `|1b>`.
    pub s_p1: RealFn,
    /// Switchable coupling `-g Wp1(t) / (2 delta2)`.
    pub g_tilde: RealFn,
}

/// Adiabatic elimination of the `{|1g>, |1e>}` pair for `delta2 >> g, Wp1`:
/// the upper-left block becomes a Lambda scheme on `{|0g>, |0e>, |1b>}` with
/// the switchable coupling `g_tilde(t)`.
///
/// Level shifts carry the signs fixed by second-order perturbation theory:
/// `|0e>` sits at `-S_g`, `|1b>` at `S_p1(t)`, and `|1g>` at
/// `delta2 + S_g - S_p1(t)`.
pub fn effective_five_level(
    system: &CavityAtomSystem,
    omega_p1: RealFn,
    omega_s: RealFn,
    delta2: f64,
) -> Result<(TimeDependentHamiltonian, EffectiveCouplings)> {
    if delta2 == 0.0 {
        return Err(Error::InvalidParameter(
            "delta2 = 0: the eliminated pair is resonant".into(),
        ));
    }
    let g = system.g;
    let s_g = g * g / delta2;
    let wp1 = omega_p1.clone();
    let s_p1: RealFn = Arc::new(move |t| -wp1(t) * wp1(t) / (4.0 * delta2));
    let wp1 = omega_p1.clone();
    let g_tilde: RealFn = Arc::new(move |t| -g * wp1(t) / (2.0 * delta2));

    let basis = Basis::new(["0g", "0e", "1b", "1g", "1e"])?;
    let sp = s_p1.clone();
    let gt = g_tilde.clone();
    let h = TimeDependentHamiltonian::new(basis, move |t| {
        let ws = C64::new(omega_s(t) / 2.0, 0.0);
        let gv = C64::new(gt(t), 0.0);
        let z = C64::new(0.0, 0.0);
        let sp_t = sp(t);
        array![
            [z, ws, z, z, z],
            [ws, C64::new(-s_g, 0.0), gv, z, z],
            [z, gv, C64::new(sp_t, 0.0), z, z],
            [z, z, z, C64::new(delta2 + s_g - sp_t, 0.0), ws],
            [z, z, z, ws, C64::new(delta2, 0.0)]
        ]
    });
    Ok((h, EffectiveCouplings { s_g, s_p1, g_tilde }))
}

/// Transfer direction for the trigger-field protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferDirection {
    /// `|1b> -> |0g>`: a cavity photon is absorbed into the atom.
    Absorption,
    /// `|0g> -> |1b>`: the atom emits a photon into the cavity.
    Emission,
}

#[derive(Debug, Clone)]
pub struct PhotonAbsorptionConfig {
    pub omega_p1_peak: f64,
    pub delta2: f64,
    /// Target adiabaticity product `max|g_tilde| * T`.
    pub pulse_area: f64,
    pub tau_frac: f64,
    pub direction: TransferDirection,
    /// Cancel `S_p1(t)` by phase modulation of the trigger tone and `S_g` by
    /// a static detuning of the intermediate level.
    pub compensation: bool,
    pub resolution: usize,
    pub options: PropagationOptions,
}

impl PhotonAbsorptionConfig {
    pub fn adiabatic(omega_p1_peak: f64, delta2: f64) -> Self {
        Self {
            omega_p1_peak,
            delta2,
            pulse_area: 15.0,
            tau_frac: 0.6,
            direction: TransferDirection::Absorption,
            compensation: true,
            resolution: 2000,
            options: PropagationOptions::default(),
        }
    }
}

/// STIRAP between `|0g>` and `|1b>` through `|0e>`, with the cavity coupling
/// activated by the trigger field `Wp1(t)`: the full five-level model is
/// propagated, with optional Stark compensation.
pub fn run_photon_absorption_stirap(
    system: &CavityAtomSystem,
    config: &PhotonAbsorptionConfig,
) -> Result<ProtocolReport> {
    let g = system.g;
    let delta2 = config.delta2;
    if delta2 == 0.0 {
        return Err(Error::InvalidParameter("delta2 must be nonzero".into()));
    }
    let g_tilde_peak = (g * config.omega_p1_peak / (2.0 * delta2)).abs();
    if g_tilde_peak == 0.0 && config.omega_p1_peak != 0.0 {
        return Err(Error::InvalidParameter("vanishing effective coupling".into()));
    }
    let width = if g_tilde_peak > 0.0 {
        config.pulse_area / g_tilde_peak
    } else {
        config.pulse_area / (0.1 * delta2.abs()).max(f64::MIN_POSITIVE)
    };
    let tau = config.tau_frac * width;

    // Counterintuitive order for the chosen direction: the leg addressing
    // the initially empty transition comes first.
    let (stokes_center, trigger_center) = match config.direction {
        TransferDirection::Absorption => (-tau, tau),
        TransferDirection::Emission => (tau, -tau),
    };
    // Effective Stokes leg |0g>-|0e> has Rabi frequency Ws; match its peak
    // to the effective pump peak 2*g_tilde_peak.
    let stokes =
        Envelope::Gaussian { amplitude: 2.0 * g_tilde_peak, center: stokes_center, width };
    let trigger =
        Envelope::Gaussian { amplitude: config.omega_p1_peak, center: trigger_center, width };

    let t_max = 3.0 * width + tau;
    let trigger_fn = trigger.as_fn();
    let s_p1 = {
        let f = trigger_fn.clone();
        real_fn(move |t| -f(t) * f(t) / (4.0 * delta2))
    };
    let phase = if config.compensation {
        let sp = s_p1.clone();
        crate::pulse::PhaseModulation::from_derivative(
            real_fn(move |t| -sp(t)),
            -t_max,
            t_max,
        )?
    } else {
        crate::pulse::PhaseModulation::zero()
    };

    let basis = Basis::new(["0g", "0e", "1b", "1g", "1e"])?;
    let stokes_fn = stokes.as_fn();
    let phase_fn = phase.phase_fn();
    let s_g = g * g / delta2;
    let static_comp = if config.compensation { s_g } else { 0.0 };
    let h = TimeDependentHamiltonian::new(basis.clone(), move |t| {
        let ws = C64::new(stokes_fn(t) / 2.0, 0.0);
        let wp = 0.5 * trigger_fn(t) * C64::new(0.0, phase_fn(t)).exp();
        let gv = C64::new(g, 0.0);
        let z = C64::new(0.0, 0.0);
        let d2 = C64::new(delta2, 0.0);
        array![
            [z, ws, z, z, z],
            [ws, C64::new(static_comp, 0.0), z, gv, z],
            [z, z, z, wp, z],
            [z, gv, wp.conj(), d2, ws],
            [z, z, z, ws, d2]
        ]
    });

    let (start, target) = match config.direction {
        TransferDirection::Absorption => ("1b", "0g"),
        TransferDirection::Emission => ("0g", "1b"),
    };
    let psi0 = QuantumState::ket(basis, start)?;
    let g_out = grid(t_max, config.resolution);
    let traj = propagate(&h, &psi0, &g_out, &config.options)?;
    let mut report = ProtocolReport::new(traj, target, "0e");
    report.extras.insert("g_tilde_peak".into(), g_tilde_peak);
    report.extras.insert("pulse_area".into(), g_tilde_peak * width);
    Ok(report)
}
