//! Quantum Rabi model with an auxiliary level: dressed spectra, ground-state
//! photon content, and dynamical detection of ultrastrong coupling by STIRAP
//! through the Rabi ground state.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::dynamics::{propagate, PropagationOptions};
use crate::error::{Error, Result};
use crate::hilbert::{Basis, QuantumState};
use crate::linalg;
use crate::operator::{HermitianOperator, TimeDependentHamiltonian};
use crate::pulse::{Envelope, PhaseModulation, RealFn};
use crate::report::ProtocolReport;

/// Two-level atom in full dipole coupling to a cavity mode, plus the far
/// auxiliary level b at `-epsilon_b`.
#[derive(Debug, Clone)]
pub struct RabiSystem {
    pub epsilon: f64,
    pub epsilon_b: f64,
    pub omega_c: f64,
    pub g: f64,
    pub n_max: usize,
}

impl RabiSystem {
    pub fn new(epsilon: f64, epsilon_b: f64, omega_c: f64, g: f64, n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidParameter(format!(
                "Fock truncation n_max must be at least 2, got {n_max}"
            )));
        }
        Ok(Self { epsilon, epsilon_b, omega_c, g, n_max })
    }

    pub fn regime_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.epsilon_b.abs() / self.omega_c < 3.0 {
            w.push(format!(
                "|epsilon_b| / omega_c = {:.2} < 3: the auxiliary level is not far \
                 detuned from the cavity",
                self.epsilon_b.abs() / self.omega_c
            ));
        }
        w
    }

    fn with_g(&self, g: f64) -> Self {
        Self { g, ..self.clone() }
    }

    fn with_n_max(&self, n_max: usize) -> Self {
        Self { n_max, ..self.clone() }
    }
}

/// Rabi block on the {g,e} x Fock basis (real symmetric):
/// `eps |e><e| + w_c a^dag a + g (a + a^dag)(|g><e| + |e><g|)`.
fn rabi_ge_matrix(system: &RabiSystem) -> Array2<C64> {
    let d = 2 * (system.n_max + 1);
    let mut m = Array2::<C64>::zeros((d, d));
    let idx = |n: usize, e: bool| 2 * n + usize::from(e);
    for n in 0..=system.n_max {
        m[[idx(n, false), idx(n, false)]] = C64::new(n as f64 * system.omega_c, 0.0);
        m[[idx(n, true), idx(n, true)]] =
            C64::new(n as f64 * system.omega_c + system.epsilon, 0.0);
    }
    for n in 0..system.n_max {
        let v = C64::new(system.g * ((n + 1) as f64).sqrt(), 0.0);
        // corotating: <n+1, g| H |n, e>
        m[[idx(n + 1, false), idx(n, true)]] = v;
        m[[idx(n, true), idx(n + 1, false)]] = v;
        // counterrotating: <n+1, e| H |n, g>
        m[[idx(n + 1, true), idx(n, false)]] = v;
        m[[idx(n, false), idx(n + 1, true)]] = v;
    }
    m
}

fn ge_basis(system: &RabiSystem) -> Result<Arc<Basis>> {
    let mut names = Vec::with_capacity(2 * (system.n_max + 1));
    for n in 0..=system.n_max {
        names.push(format!("{n}g"));
        names.push(format!("{n}e"));
    }
    Basis::new(names)
}

/// Full Rabi Hamiltonian including the auxiliary b ladder.
pub fn rabi_hamiltonian(system: &RabiSystem) -> Result<HermitianOperator> {
    let mut names = Vec::with_capacity(3 * (system.n_max + 1));
    for n in 0..=system.n_max {
        names.push(format!("{n}b"));
        names.push(format!("{n}g"));
        names.push(format!("{n}e"));
    }
    let basis = Basis::new(names)?;
    let d = basis.dim();
    let mut m = Array2::<C64>::zeros((d, d));
    let idx = |n: usize, atom: usize| 3 * n + atom; // b, g, e
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
        m[[idx(n + 1, 2), idx(n, 1)]] = v;
        m[[idx(n, 1), idx(n + 1, 2)]] = v;
    }
    HermitianOperator::new(basis, m)
}

/// The Rabi {g,e} block as a labeled operator.
pub fn rabi_ge_hamiltonian(system: &RabiSystem) -> Result<HermitianOperator> {
    HermitianOperator::new(ge_basis(system)?, rabi_ge_matrix(system))
}

/// Eigen data of the {g,e} Rabi block: energies `E_j` and amplitudes
/// `c_{jn} = <n g|Phi_j>`, `d_{jn} = <n e|Phi_j>`.
pub struct RabiDressedStates {
    pub energies: Vec<f64>,
    /// `c[[n, j]] = <n g | Phi_j>`
    pub c: Array2<f64>,
    /// `d[[n, j]] = <n e | Phi_j>`
    pub d: Array2<f64>,
}

pub fn rabi_dressed_states(system: &RabiSystem) -> Result<RabiDressedStates> {
    let m = rabi_ge_matrix(system);
    let (values, vectors) = linalg::eigh(&m)?;
    let n_ph = system.n_max + 1;
    let d_states = 2 * n_ph;
    let mut c = Array2::zeros((n_ph, d_states));
    let mut d = Array2::zeros((n_ph, d_states));
    for j in 0..d_states {
        for n in 0..n_ph {
            c[[n, j]] = vectors[[2 * n, j]].re;
            d[[n, j]] = vectors[[2 * n + 1, j]].re;
        }
    }
    Ok(RabiDressedStates { energies: values.to_vec(), c, d })
}

/// Classification of one level of the full model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelClass {
    /// Unmixed `|n b>` state.
    BLadder(usize),
    /// Eigenstate `|Phi_j>` of the Rabi block.
    Dressed(usize),
}

/// Spectrum of the full model on a grid of coupling strengths.
#[derive(Debug, Clone)]
pub struct DressedSpectrum {
    pub g_values: Vec<f64>,
    /// `energies[k]`: ascending level energies at `g_values[k]`.
    pub energies: Vec<Vec<f64>>,
    pub classes: Vec<Vec<LevelClass>>,
    /// Number of levels reported per grid point.
    pub levels: usize,
}

/// All levels of the full model (b ladder plus Rabi block) sorted ascending.
fn combined_levels(system: &RabiSystem) -> Result<(Vec<f64>, Vec<LevelClass>)> {
    let dressed = rabi_dressed_states(system)?;
    let mut levels: Vec<(f64, LevelClass)> = (0..=system.n_max)
        .map(|n| {
            (
                n as f64 * system.omega_c - system.epsilon_b,
                LevelClass::BLadder(n),
            )
        })
        .collect();
    levels.extend(
        dressed
            .energies
            .iter()
            .enumerate()
            .map(|(j, &e)| (e, LevelClass::Dressed(j))),
    );
    levels.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(levels.into_iter().unzip())
}

/// Dressed spectrum versus coupling, reporting the lowest `levels` states per
/// grid point. Truncation convergence of the reported levels is enforced by
/// re-diagonalizing with `n_max + 5` at the largest coupling.
pub fn spectrum_vs_g(
    system: &RabiSystem,
    g_grid: &[f64],
    levels: usize,
) -> Result<DressedSpectrum> {
    if g_grid.is_empty() {
        return Err(Error::InvalidParameter("empty coupling grid".into()));
    }
    let mut energies = Vec::with_capacity(g_grid.len());
    let mut classes = Vec::with_capacity(g_grid.len());
    for &g in g_grid {
        let (e, c) = combined_levels(&system.with_g(g))?;
        energies.push(e[..levels.min(e.len())].to_vec());
        classes.push(c[..levels.min(c.len())].to_vec());
    }
    let g_worst = g_grid.iter().cloned().fold(0.0, f64::max);
    let (e_ref, _) = combined_levels(&system.with_g(g_worst).with_n_max(system.n_max + 5))?;
    let last = energies
        .iter()
        .zip(g_grid)
        .find(|(_, &g)| g == g_worst)
        .map(|(e, _)| e)
        .expect("grid non-empty");
    for (k, (&a, &b)) in last.iter().zip(e_ref.iter()).enumerate() {
        if (a - b).abs() > 1e-6 * system.omega_c {
            return Err(Error::TruncationOverflow(format!(
                "level {k} changes by {:.2e} when n_max increases by 5; raise n_max",
                (a - b).abs()
            )));
        }
    }
    Ok(DressedSpectrum {
        g_values: g_grid.to_vec(),
        energies,
        classes,
        levels,
    })
}

/// Photon-number-resolved amplitudes of the lowest Rabi eigenstates.
#[derive(Debug, Clone)]
pub struct GroundStateAmplitudes {
    /// `c_{0n} = <n g|Phi_0>`
    pub c0: Vec<f64>,
    /// `d_{0n} = <n e|Phi_0>`
    pub d0: Vec<f64>,
    pub c1m: Vec<f64>,
    pub d1m: Vec<f64>,
    pub c1p: Vec<f64>,
    pub d1p: Vec<f64>,
    pub energies: [f64; 3],
}

pub fn ground_state_amplitudes(system: &RabiSystem) -> Result<GroundStateAmplitudes> {
    let dressed = rabi_dressed_states(system)?;
    let col = |j: usize| -> (Vec<f64>, Vec<f64>) {
        (
            dressed.c.column(j).to_vec(),
            dressed.d.column(j).to_vec(),
        )
    };
    let (c0, d0) = col(0);
    let (c1m, d1m) = col(1);
    let (c1p, d1p) = col(2);
    Ok(GroundStateAmplitudes {
        c0,
        d0,
        c1m,
        d1m,
        c1p,
        d1p,
        energies: [dressed.energies[0], dressed.energies[1], dressed.energies[2]],
    })
}

/// Optimal pump attenuation for the Lambda detection scheme:
/// `kappa_p = c02(g) / c00(g)`.
pub fn optimal_pump_attenuation(system: &RabiSystem) -> Result<f64> {
    let amps = ground_state_amplitudes(system)?;
    Ok(amps.c0[2] / amps.c0[0])
}

/// Dynamical Stark shift of the pump transition caused by the strong Stokes
/// envelope: `S0(t) = |c00 Ws(t)|^2 / [4 (E0 + eps_b - w_s)]`.
pub fn stark_shift_s0(
    system: &RabiSystem,
    stokes_envelope: &Envelope,
    omega_s: f64,
) -> Result<RealFn> {
    let amps = ground_state_amplitudes(system)?;
    let c00 = amps.c0[0];
    let denom = amps.energies[0] + system.epsilon_b - omega_s;
    if denom == 0.0 {
        return Err(Error::ResonanceViolation(
            "Stokes tone resonant with the pump transition".into(),
        ));
    }
    let env = stokes_envelope.clone();
    Ok(Arc::new(move |t| {
        let w = c00 * env.eval(t);
        w * w / (4.0 * denom)
    }))
}

/// Truncated dressed-level workspace for the driven model: the lowest
/// `n_states` levels of the full Hamiltonian, the drive coupling matrices in
/// that basis, and index bookkeeping.
pub struct DressedWorkspace {
    pub basis: Arc<Basis>,
    pub energies: Vec<f64>,
    pub classes: Vec<LevelClass>,
    /// b-g drive couplings: `coupling_bg[[i, j]] = <i| (|b><g| + h.c.) |j>`.
    pub coupling_bg: Array2<f64>,
    /// stray g-e couplings between dressed states.
    pub coupling_ge: Array2<f64>,
    pub idx_0b: usize,
    pub idx_2b: usize,
    pub idx_phi0: usize,
}

impl DressedWorkspace {
    pub fn build(system: &RabiSystem, n_states: usize) -> Result<Self> {
        let dressed = rabi_dressed_states(system)?;
        let (all_e, all_c) = combined_levels(system)?;
        if n_states > all_e.len() {
            return Err(Error::TruncationOverflow(format!(
                "{n_states} retained states exceed the {} available",
                all_e.len()
            )));
        }
        let energies: Vec<f64> = all_e[..n_states].to_vec();
        let classes: Vec<LevelClass> = all_c[..n_states].to_vec();
        let names: Vec<String> = classes
            .iter()
            .map(|c| match c {
                LevelClass::BLadder(n) => format!("{n}b"),
                LevelClass::Dressed(j) => format!("Phi{j}"),
            })
            .collect();
        let basis = Basis::new(names)?;
        let d = n_states;
        let mut coupling_bg = Array2::zeros((d, d));
        let mut coupling_ge = Array2::zeros((d, d));
        let n_ph = system.n_max + 1;
        for i in 0..d {
            for j in 0..d {
                match (classes[i], classes[j]) {
                    (LevelClass::BLadder(n), LevelClass::Dressed(jj)) => {
                        // <n b| (|b><g| + h.c.) |Phi_j> = <n g|Phi_j> = c_{jn}
                        coupling_bg[[i, j]] = dressed.c[[n, jj]];
                    }
                    (LevelClass::Dressed(jj), LevelClass::BLadder(n)) => {
                        coupling_bg[[i, j]] = dressed.c[[n, jj]];
                    }
                    (LevelClass::Dressed(ji), LevelClass::Dressed(jj)) => {
                        // <Phi_i| (|g><e| + |e><g|) x 1 |Phi_j>
                        let mut acc = 0.0;
                        for n in 0..n_ph {
                            acc += dressed.c[[n, ji]] * dressed.d[[n, jj]]
                                + dressed.d[[n, ji]] * dressed.c[[n, jj]];
                        }
                        coupling_ge[[i, j]] = acc;
                    }
                    (LevelClass::BLadder(_), LevelClass::BLadder(_)) => {}
                }
            }
        }
        let find = |name: &str| basis.index_of(name);
        let idx_0b = find("0b")?;
        let idx_2b = find("2b")?;
        let idx_phi0 = classes
            .iter()
            .position(|c| matches!(c, LevelClass::Dressed(0)))
            .ok_or_else(|| {
                Error::TruncationOverflow("Phi0 not among the retained states".into())
            })?;
        Ok(Self {
            basis,
            energies,
            classes,
            coupling_bg,
            coupling_ge,
            idx_0b,
            idx_2b,
            idx_phi0,
        })
    }

    /// Assemble `diag(E) + tone_p(t) (C_bg [+ C_ge]) + tone_s(t) (...)` for
    /// arbitrary scalar tone evaluators (carrier and phase included).
    fn assemble(
        self: &Arc<Self>,
        tone_p: RealFn,
        tone_s: RealFn,
        stray_ge: bool,
    ) -> TimeDependentHamiltonian {
        let ws = self.clone();
        TimeDependentHamiltonian::new(self.basis.clone(), move |t| {
            let d = ws.energies.len();
            let w = tone_p(t) + tone_s(t);
            let mut m = Array2::<C64>::zeros((d, d));
            for r in 0..d {
                for c in 0..d {
                    let mut v = w * ws.coupling_bg[[r, c]];
                    if stray_ge {
                        v += w * ws.coupling_ge[[r, c]];
                    }
                    m[[r, c]] = C64::new(v, 0.0);
                }
                m[[r, r]] += C64::new(ws.energies[r], 0.0);
            }
            m
        })
    }

    /// Second-order level shift of state `a` from both drive tones, summing
    /// over all retained levels and both corotating and counterrotating
    /// denominators, skipping near-resonant legs (those are first-order
    /// couplings, not shifts).
    fn stark_shift_of(
        &self,
        a: usize,
        t: f64,
        envelopes: &[(f64, &Envelope)],
        stray_ge: bool,
        exclusion: f64,
    ) -> f64 {
        let d = self.energies.len();
        let mut s = 0.0;
        for k in 0..d {
            if k == a {
                continue;
            }
            let mut coupling = self.coupling_bg[[a, k]];
            if stray_ge {
                coupling += self.coupling_ge[[a, k]];
            }
            if coupling == 0.0 {
                continue;
            }
            let de = self.energies[a] - self.energies[k];
            for (carrier, env) in envelopes {
                let rabi = env.eval(t) * coupling;
                if rabi == 0.0 {
                    continue;
                }
                for sign in [1.0, -1.0] {
                    let den = de + sign * carrier;
                    if den.abs() < exclusion {
                        continue;
                    }
                    s += rabi * rabi / (4.0 * den);
                }
            }
        }
        s
    }
}

/// Lab-frame control Hamiltonian in the truncated dressed basis: the two-tone
/// field on all `|n b> <-> |Phi_j>` linkages, optionally with the stray
/// `g <-> e` channel.
pub fn usc_control_hamiltonian(
    system: &RabiSystem,
    n_states: usize,
    w_p: Envelope,
    w_s: Envelope,
    omega_p: f64,
    omega_s: f64,
    stray_ge: Option<Envelope>,
) -> Result<TimeDependentHamiltonian> {
    let ws = Arc::new(DressedWorkspace::build(system, n_states)?);
    // drive-only operator: subtract the static diagonal afterwards
    let stray = stray_ge.is_some();
    let wp_env = w_p;
    let ws_env = w_s;
    let tone_p: RealFn = Arc::new(move |t| wp_env.eval(t) * (omega_p * t).cos());
    let tone_s: RealFn = Arc::new(move |t| ws_env.eval(t) * (omega_s * t).cos());
    let ws2 = ws.clone();
    let h = ws.assemble(tone_p, tone_s, stray);
    let basis = h.basis().clone();
    Ok(TimeDependentHamiltonian::new(basis, move |t| {
        let mut m = h.matrix_at(t);
        for r in 0..ws2.energies.len() {
            m[[r, r]] -= C64::new(ws2.energies[r], 0.0);
        }
        m
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compensation {
    None,
    /// Phase-modulate both tones so that each leg tracks the net simulated
    /// Stark shift of its two levels.
    PhaseModulation,
}

#[derive(Debug, Clone)]
pub struct UscStirapConfig {
    /// Number of dressed levels retained for the propagation.
    pub n_states: usize,
    /// Peak effective Rabi frequency of both legs, in units of omega_c.
    pub rabi_peak: f64,
    /// `rabi_peak * width` adiabaticity product.
    pub pulse_area: f64,
    /// Pulse delay in units of the width.
    pub tau_frac: f64,
    /// Common single-photon detuning of both tones.
    pub delta_p: f64,
    /// Independent Stokes detuning; defaults to `delta_p`.
    pub delta_s: Option<f64>,
    /// Include the stray g-e drive channel with the same two-tone field.
    pub stray_ge: bool,
    pub compensation: Compensation,
    /// Take envelope amplitudes and carriers from this reference coupling
    /// instead of the system's own (fixed-field detection scans).
    pub field_from_g: Option<f64>,
    /// Window half-width in pulse widths, counted beyond the pulse delay.
    pub window_frac: f64,
    /// Verify that 10 more retained states leave the efficiency unchanged.
    pub check_truncation: bool,
    pub resolution: usize,
    pub options: PropagationOptions,
}

impl Default for UscStirapConfig {
    fn default() -> Self {
        Self {
            n_states: 19,
            rabi_peak: 1.2e-3,
            pulse_area: 15.0,
            tau_frac: 0.6,
            delta_p: 0.0,
            delta_s: None,
            stray_ge: true,
            compensation: Compensation::None,
            field_from_g: None,
            window_frac: 2.4,
            check_truncation: false,
            resolution: 2000,
            options: PropagationOptions::default(),
        }
    }
}

/// Coherent `|0b> -> |2b>` transfer through the Rabi ground state, driven in
/// the lab frame over the truncated dressed space. The transfer channel only
/// exists when the ground state contains photon pairs, so the efficiency is
/// a dynamical probe of ultrastrong coupling.
pub fn run_usc_stirap(system: &RabiSystem, config: &UscStirapConfig) -> Result<ProtocolReport> {
    let report = run_usc_inner(system, config)?;
    if config.check_truncation {
        let mut larger = config.clone();
        larger.n_states = config.n_states + 10;
        larger.check_truncation = false;
        let bigger = run_usc_inner(system, &larger)?;
        let change = (bigger.transfer_efficiency - report.transfer_efficiency).abs();
        let mut report = report;
        report.extras.insert("truncation_change".into(), change);
        if change > 0.01 {
            report.warnings.push(format!(
                "truncation not converged: efficiency changes by {change:.3} with 10 \
                 more retained states"
            ));
        }
        return Ok(report);
    }
    Ok(report)
}

fn run_usc_inner(system: &RabiSystem, config: &UscStirapConfig) -> Result<ProtocolReport> {
    let ws = Arc::new(DressedWorkspace::build(system, config.n_states)?);

    // Envelope amplitudes and carriers from the reference system (the system
    // itself unless a fixed-field scan pins them elsewhere).
    let reference = match config.field_from_g {
        Some(gref) => system.with_g(gref),
        None => system.clone(),
    };
    let ref_amps = ground_state_amplitudes(&reference)?;
    let (c00, c02, e0_ref) = (ref_amps.c0[0], ref_amps.c0[2], ref_amps.energies[0]);
    if c02 == 0.0 {
        return Err(Error::InvalidParameter(
            "c02 = 0: no transfer channel at zero coupling".into(),
        ));
    }
    let delta_s = config.delta_s.unwrap_or(config.delta_p);
    let omega_p = system.epsilon_b + e0_ref - config.delta_p;
    let omega_s = system.epsilon_b - 2.0 * system.omega_c + e0_ref - delta_s;

    let w_s_peak = config.rabi_peak / c02.abs();
    let w_p_peak = config.rabi_peak / c00.abs();
    let width = config.pulse_area / config.rabi_peak;
    let tau = config.tau_frac * width;
    // counterintuitive: Stokes (target leg) before pump
    let w_s = Envelope::Gaussian { amplitude: w_s_peak, center: -tau, width };
    let w_p = Envelope::Gaussian { amplitude: w_p_peak, center: tau, width };
    let t_max = config.window_frac * width + tau;

    let (phase_p, phase_s) = match config.compensation {
        Compensation::None => (PhaseModulation::zero(), PhaseModulation::zero()),
        Compensation::PhaseModulation => {
            let exclusion = 0.2 * system.omega_c;
            let envelopes = |t: f64, ws_: &DressedWorkspace| {
                let envs = [(omega_p, &w_p), (omega_s, &w_s)];
                let s0 = ws_.stark_shift_of(ws_.idx_0b, t, &envs, config.stray_ge, exclusion);
                let s2 = ws_.stark_shift_of(ws_.idx_2b, t, &envs, config.stray_ge, exclusion);
                let sphi =
                    ws_.stark_shift_of(ws_.idx_phi0, t, &envs, config.stray_ge, exclusion);
                (s0, s2, sphi)
            };
            let wsa = ws.clone();
            let dp: RealFn = Arc::new(move |t| {
                let (s0, _, sphi) = envelopes(t, &wsa);
                sphi - s0
            });
            let wsb = ws.clone();
            let dsn: RealFn = Arc::new(move |t| {
                let (_, s2, sphi) = envelopes(t, &wsb);
                sphi - s2
            });
            (
                PhaseModulation::from_derivative(dp, -t_max, t_max)?,
                PhaseModulation::from_derivative(dsn, -t_max, t_max)?,
            )
        }
    };

    let wp_env = w_p.clone();
    let ws_env = w_s.clone();
    let php = phase_p.phase_fn();
    let phs = phase_s.phase_fn();
    let tone_p: RealFn = Arc::new(move |t| wp_env.eval(t) * (omega_p * t + php(t)).cos());
    let tone_s: RealFn = Arc::new(move |t| ws_env.eval(t) * (omega_s * t + phs(t)).cos());
    let h = ws.assemble(tone_p, tone_s, config.stray_ge);

    let grid: Vec<f64> = {
        let n = config.resolution.max(2);
        (0..n)
            .map(|k| -t_max + 2.0 * t_max * k as f64 / (n - 1) as f64)
            .collect()
    };
    let psi0 = QuantumState::ket(ws.basis.clone(), "0b")?;
    let mut opts = config.options.clone();
    if opts.frame.is_empty() {
        opts.frame = ws.energies.clone();
    }
    let traj = propagate(&h, &psi0, &grid, &opts)?;

    let phi0_name = ws.basis.name(ws.idx_phi0).to_string();
    let mut report = ProtocolReport::new(traj, "2b", &phi0_name);
    report.extras.insert("kappa_p_lambda".into(), c02 / c00);
    report.extras.insert("stokes_peak_amplitude".into(), w_s_peak);
    report.extras.insert("pulse_width".into(), width);
    let s0 = stark_shift_s0(&reference, &w_s, omega_s)?;
    report.extras.insert("s0_peak".into(), s0(-tau).abs());
    report.warnings.extend(system.regime_warnings());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(g: f64) -> RabiSystem {
        RabiSystem::new(1.0, 5.0, 1.0, g, 30).unwrap()
    }

    #[test]
    fn rabi_reduces_to_jc_spectrum_at_zero_coupling() {
        let s = system(0.0);
        let dressed = rabi_dressed_states(&s).unwrap();
        // spectrum must be { n, n + eps }
        let mut expect: Vec<f64> = (0..=s.n_max)
            .flat_map(|n| [n as f64, n as f64 + 1.0])
            .collect();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (v, e) in dressed.energies.iter().zip(expect.iter()) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_commutes_with_rabi_block() {
        let s = system(0.3);
        let m = rabi_ge_matrix(&s);
        let d = m.nrows();
        // parity = (-1)^{n + [atom = e]}
        let parity: Vec<f64> = (0..d)
            .map(|i| {
                let n = i / 2;
                let e = i % 2;
                if (n + e) % 2 == 0 { 1.0 } else { -1.0 }
            })
            .collect();
        let mut comm_max = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let v = (m[[r, c]] * parity[c] - parity[r] * m[[r, c]]).norm();
                comm_max = comm_max.max(v);
            }
        }
        assert!(comm_max < 1e-12);
    }

    #[test]
    fn ground_energy_second_order() {
        // E0 ~ -g^2/(eps + w_c) for small g
        let s = system(0.1);
        let e0 = rabi_dressed_states(&s).unwrap().energies[0];
        let pt = -0.1f64.powi(2) / 2.0;
        assert!((e0 - pt).abs() < 0.1 * pt.abs(), "E0 = {e0}, PT = {pt}");
    }

    #[test]
    fn ground_state_parity_structure() {
        let s = system(0.2);
        let amps = ground_state_amplitudes(&s).unwrap();
        for n in 0..=s.n_max {
            if n % 2 == 1 {
                assert!(amps.c0[n].abs() < 1e-10, "c0[{n}] = {}", amps.c0[n]);
            } else {
                assert!(amps.d0[n].abs() < 1e-10, "d0[{n}] = {}", amps.d0[n]);
            }
        }
        let total: f64 = amps
            .c0
            .iter()
            .zip(amps.d0.iter())
            .map(|(c, d)| c * c + d * d)
            .sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn amplitudes_at_zero_coupling() {
        let s = system(0.0);
        let amps = ground_state_amplitudes(&s).unwrap();
        assert!((amps.c0[0] - 1.0).abs() < 1e-12);
        for n in 1..=s.n_max {
            assert!(amps.c0[n].abs() < 1e-12);
            assert!(amps.d0[n].abs() < 1e-12);
        }
    }

    #[test]
    fn attenuation_monotone_in_coupling() {
        let mut prev = 0.0;
        for g in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5] {
            let k = optimal_pump_attenuation(&system(g)).unwrap();
            assert!(k >= prev, "kappa not monotone at g = {g}");
            prev = k;
        }
    }

    #[test]
    fn spectrum_at_zero_coupling_is_bare() {
        let s = system(0.0);
        let spec = spectrum_vs_g(&s, &[0.0], 8).unwrap();
        // lowest levels: -5 (0b), -4 (1b), -3 (2b), -2 (3b), -1 (4b), 0 (0g & 5b), ...
        let e = &spec.energies[0];
        assert!((e[0] + 5.0).abs() < 1e-12);
        assert!((e[1] + 4.0).abs() < 1e-12);
        assert!((e[2] + 3.0).abs() < 1e-12);
        assert!(matches!(spec.classes[0][0], LevelClass::BLadder(0)));
    }

    #[test]
    fn jc_limit_doublet_splitting() {
        let s = system(0.01);
        let dressed = rabi_dressed_states(&s).unwrap();
        let split = dressed.energies[2] - dressed.energies[1];
        assert!(
            (split - 0.02).abs() < 0.01 * 0.02,
            "doublet splitting {split} vs 2g = 0.02"
        );
    }

    #[test]
    fn usc_nonlinearity_at_half_coupling() {
        let s = system(0.5);
        let dressed = rabi_dressed_states(&s).unwrap();
        let dev_minus = (dressed.energies[1] - (1.0 - 0.5)).abs();
        let dev_plus = (dressed.energies[2] - (1.0 + 0.5)).abs();
        assert!(dev_minus > 0.02 || dev_plus > 0.02);
    }

    #[test]
    fn control_matrix_element_is_c00() {
        let s = system(0.2);
        let amps = ground_state_amplitudes(&s).unwrap();
        let w = Envelope::Constant { amplitude: 0.01 };
        let h = usc_control_hamiltonian(
            &s,
            19,
            w.clone(),
            Envelope::Constant { amplitude: 0.0 },
            0.0, // cos(0) = 1: static field
            0.0,
            None,
        )
        .unwrap();
        let basis = h.basis().clone();
        let m = h.matrix_at(0.0);
        let i0b = basis.index_of("0b").unwrap();
        let iphi0 = basis.index_of("Phi0").unwrap();
        assert!(
            (m[[i0b, iphi0]].re - 0.01 * amps.c0[0]).abs() < 1e-12,
            "element {} vs {}",
            m[[i0b, iphi0]].re,
            0.01 * amps.c0[0]
        );
        // zero drive -> zero operator
        let h0 = usc_control_hamiltonian(
            &s,
            19,
            Envelope::Constant { amplitude: 0.0 },
            Envelope::Constant { amplitude: 0.0 },
            5.0,
            3.0,
            None,
        )
        .unwrap();
        assert!(h0.matrix_at(0.3).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn projected_control_is_lambda_configuration() {
        let s = system(0.2);
        let amps = ground_state_amplitudes(&s).unwrap();
        let h = usc_control_hamiltonian(
            &s,
            19,
            Envelope::Constant { amplitude: 0.02 },
            Envelope::Constant { amplitude: 0.0 },
            0.0,
            0.0,
            None,
        )
        .unwrap();
        let p = h.project_subspace(&["0b", "2b", "Phi0"]).unwrap();
        let m = p.matrix_at(0.0);
        assert!((m[[0, 2]].re - 0.02 * amps.c0[0]).abs() < 1e-12);
        assert!((m[[1, 2]].re - 0.02 * amps.c0[2]).abs() < 1e-12);
        assert_eq!(m[[0, 1]], C64::new(0.0, 0.0));
    }

    #[test]
    fn s0_formula() {
        // c00 ~ 1 at g -> 0; W_s = 0.2, E0 + eps_b - w_s = 2 -> S0 = 0.005
        let s = RabiSystem::new(1.0, 5.0, 1.0, 0.0, 10).unwrap();
        let env = Envelope::Constant { amplitude: 0.2 };
        let omega_s = 0.0 + 5.0 - 2.0; // E0 = 0 at g = 0
        let s0 = stark_shift_s0(&s, &env, omega_s).unwrap();
        assert!((s0(0.0) - 0.005).abs() < 1e-12);
        let z = stark_shift_s0(&s, &Envelope::Constant { amplitude: 0.0 }, omega_s).unwrap();
        assert_eq!(z(0.0), 0.0);
    }
}
