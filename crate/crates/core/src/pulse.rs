//! Drive envelopes, detuning schedules, carrier tones, and slow phase
//! modulation laws.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A real-valued function of time, shareable across workers.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub fn real_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> RealFn {
    Arc::new(f)
}

pub fn constant_fn(value: f64) -> RealFn {
    Arc::new(move |_| value)
}

/// Slowly varying drive envelope shapes.
#[derive(Debug, Clone)]
pub enum Envelope {
    /// `amplitude * exp(-((t - center)/width)^2)`
    Gaussian { amplitude: f64, center: f64, width: f64 },
    /// `height/2 * [tanh((t - tau)/rise) + tanh((t + tau)/rise)]`
    TanhPair { height: f64, tau: f64, rise: f64 },
    Constant { amplitude: f64 },
    /// Linear combination of other envelopes.
    ScaledSum(Vec<(f64, Envelope)>),
}

impl Envelope {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Envelope::Gaussian { amplitude, center, width } => {
                let x = (t - center) / width;
                amplitude * (-x * x).exp()
            }
            Envelope::TanhPair { height, tau, rise } => {
                0.5 * height * (((t - tau) / rise).tanh() + ((t + tau) / rise).tanh())
            }
            Envelope::Constant { amplitude } => *amplitude,
            Envelope::ScaledSum(terms) => {
                terms.iter().map(|(w, e)| w * e.eval(t)).sum()
            }
        }
    }

    /// The declared amplitude parameter; `|eval(t)|` never exceeds this for
    /// the primitive shapes.
    pub fn declared_amplitude(&self) -> f64 {
        match self {
            Envelope::Gaussian { amplitude, .. } => amplitude.abs(),
            Envelope::TanhPair { height, .. } => height.abs(),
            Envelope::Constant { amplitude } => amplitude.abs(),
            Envelope::ScaledSum(terms) => {
                terms.iter().map(|(w, e)| w.abs() * e.declared_amplitude()).sum()
            }
        }
    }

    /// Mirror in time: `e'(t) = e(-t)`.
    pub fn time_reversed(&self) -> Envelope {
        match self {
            Envelope::Gaussian { amplitude, center, width } => Envelope::Gaussian {
                amplitude: *amplitude,
                center: -center,
                width: *width,
            },
            // the tanh pair is odd in t
            Envelope::TanhPair { height, tau, rise } => Envelope::TanhPair {
                height: -height,
                tau: *tau,
                rise: *rise,
            },
            Envelope::Constant { amplitude } => Envelope::Constant { amplitude: *amplitude },
            Envelope::ScaledSum(terms) => Envelope::ScaledSum(
                terms.iter().map(|(w, e)| (*w, e.time_reversed())).collect(),
            ),
        }
    }

    pub fn as_fn(&self) -> RealFn {
        let e = self.clone();
        Arc::new(move |t| e.eval(t))
    }
}

/// A slow phase law `phi(t)` together with its derivative `phidot(t)`,
/// related by `phi(t) = phi(t_start) + integral of phidot`.
#[derive(Clone)]
pub struct PhaseModulation {
    phase: RealFn,
    derivative: RealFn,
}

impl std::fmt::Debug for PhaseModulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhaseModulation").finish()
    }
}

impl PhaseModulation {
    pub fn zero() -> Self {
        Self { phase: constant_fn(0.0), derivative: constant_fn(0.0) }
    }

    /// Build from an explicit pair (caller guarantees consistency).
    pub fn from_parts(phase: RealFn, derivative: RealFn) -> Self {
        Self { phase, derivative }
    }

    /// Build from a derivative law by cumulative Simpson quadrature over
    /// `[t_start, t_end]`, with `phi(t_start) = 0`. Evaluation between table
    /// knots uses cubic Hermite interpolation with the exact derivative.
    pub fn from_derivative(derivative: RealFn, t_start: f64, t_end: f64) -> Result<Self> {
        const POINTS: usize = 20_001;
        Self::from_derivative_resolution(derivative, t_start, t_end, POINTS)
    }

    pub fn from_derivative_resolution(
        derivative: RealFn,
        t_start: f64,
        t_end: f64,
        points: usize,
    ) -> Result<Self> {
        if t_end <= t_start {
            return Err(Error::InvalidParameter(
                "phase window must satisfy t_end > t_start".into(),
            ));
        }
        let n = points.max(3) | 1; // odd count -> even interval number
        let h = (t_end - t_start) / (n - 1) as f64;
        let f: Vec<f64> = (0..n).map(|i| derivative(t_start + i as f64 * h)).collect();
        let mut phi = vec![0.0f64; n];
        for i in (2..n).step_by(2) {
            phi[i] = phi[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
        }
        for i in (1..n).step_by(2) {
            // three-point partial Simpson for the odd knots
            let fim1 = f[i - 1];
            let fi = f[i];
            let fip1 = if i + 1 < n { f[i + 1] } else { 2.0 * fi - fim1 };
            phi[i] = phi[i - 1] + h / 12.0 * (5.0 * fim1 + 8.0 * fi - fip1);
        }
        let table = Arc::new(PhaseTable { t_start, h, phi, f });
        let t = table.clone();
        let phase: RealFn = Arc::new(move |time| t.eval(time));
        Ok(Self { phase, derivative })
    }

    pub fn phase(&self, t: f64) -> f64 {
        (self.phase)(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        (self.derivative)(t)
    }

    pub fn phase_fn(&self) -> RealFn {
        self.phase.clone()
    }

    pub fn derivative_fn(&self) -> RealFn {
        self.derivative.clone()
    }
}

struct PhaseTable {
    t_start: f64,
    h: f64,
    phi: Vec<f64>,
    f: Vec<f64>,
}

impl PhaseTable {
    fn eval(&self, t: f64) -> f64 {
        let n = self.phi.len();
        let x = (t - self.t_start) / self.h;
        if x <= 0.0 {
            // linear continuation outside the table
            return self.phi[0] + (t - self.t_start) * self.f[0];
        }
        let i = (x.floor() as usize).min(n - 2);
        let s = x - i as f64;
        // cubic Hermite on [t_i, t_{i+1}] with exact endpoint derivatives
        let (p0, p1) = (self.phi[i], self.phi[i + 1]);
        let (m0, m1) = (self.f[i] * self.h, self.f[i + 1] * self.h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * p0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * p1
            + (s3 - s2) * m1
    }
}

/// One drive tone: envelope times carrier, optionally phase modulated,
/// addressed to a named transition.
#[derive(Debug, Clone)]
pub struct DriveTone {
    pub envelope: Envelope,
    pub carrier: f64,
    pub phase_mod: Option<PhaseModulation>,
    pub transition: (String, String),
}

impl DriveTone {
    pub fn new(
        envelope: Envelope,
        carrier: f64,
        phase_mod: Option<PhaseModulation>,
        transition: (&str, &str),
    ) -> Result<Self> {
        if carrier < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "carrier frequency must be nonnegative, got {carrier}"
            )));
        }
        Ok(Self {
            envelope,
            carrier,
            phase_mod,
            transition: (transition.0.into(), transition.1.into()),
        })
    }

    /// Instantaneous field value `A(t) cos(w t + phi(t))`.
    pub fn eval(&self, t: f64) -> f64 {
        let phi = self.phase_mod.as_ref().map_or(0.0, |p| p.phase(t));
        self.envelope.eval(t) * (self.carrier * t + phi).cos()
    }
}

/// A set of drive tones plus named detuning functions.
#[derive(Clone, Default)]
pub struct ControlSchedule {
    pub tones: Vec<DriveTone>,
    detunings: BTreeMap<String, RealFn>,
}

impl ControlSchedule {
    pub fn new(tones: Vec<DriveTone>) -> Self {
        Self { tones, detunings: BTreeMap::new() }
    }

    pub fn set_detuning(&mut self, name: &str, f: RealFn) {
        self.detunings.insert(name.into(), f);
    }

    /// Install `deltaure = delta_p - delta_s` from the stored single-photon
    /// detunings, keeping the two-photon consistency exact by construction.
    pub fn derive_two_photon(&mut self) -> Result<()> {
        let dp = self.detuning("delta_p")?;
        let ds = self.detuning("delta_s")?;
        self.detunings
            .insert("delta".into(), Arc::new(move |t| dp(t) - ds(t)));
        Ok(())
    }

    pub fn detuning(&self, name: &str) -> Result<RealFn> {
        self.detunings
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownLabel(format!("detuning `{name}`")))
    }

    pub fn detuning_names(&self) -> impl Iterator<Item = &str> {
        self.detunings.keys().map(|s| s.as_str())
    }
}

/// Eq.-style Gaussian pump/Stokes pair in the counterintuitive order: for
/// `tau > 0` the Stokes envelope peaks at `-tau`, before the pump at `+tau`.
///
/// `pump(t) = kappa_p Omega0 exp(-((t - tau)/width)^2)`,
/// `stokes(t) = Omega0 exp(-((t + tau)/width)^2)`.
pub fn gaussian_pair(
    omega0: f64,
    kappa_p: f64,
    tau: f64,
    width: f64,
) -> Result<(Envelope, Envelope)> {
    if width <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "pulse width must be positive, got {width}"
        )));
    }
    let pump = Envelope::Gaussian { amplitude: kappa_p * omega0, center: tau, width };
    let stokes = Envelope::Gaussian { amplitude: omega0, center: -tau, width };
    Ok((pump, stokes))
}

/// Tanh-pair detuning schedules for detuning-controlled transfer:
/// `delta_s(t) = h_delta Omega0 / 2 * [tanh((t-tau)/tau_ch) + tanh((t+tau)/tau_ch)]`
/// and `delta_p = kappa_delta * delta_s`.
pub fn cstirap_detunings(
    omega0: f64,
    h_delta: f64,
    kappa_delta: f64,
    tau: f64,
    tau_ch: f64,
) -> Result<(Envelope, Envelope)> {
    if tau_ch <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "detuning rise time must be positive, got {tau_ch}"
        )));
    }
    let delta_s = Envelope::TanhPair { height: h_delta * omega0, tau, rise: tau_ch };
    let delta_p = Envelope::ScaledSum(vec![(kappa_delta, delta_s.clone())]);
    Ok((delta_s, delta_p))
}

/// Phase law compensating two drive-induced level shifts:
/// `phidot = 2 S1 - S2`, integrated from `t_start` with `phi(t_start) = 0`.
pub fn phase_from_shifts(
    s1: RealFn,
    s2: RealFn,
    t_start: f64,
    t_end: f64,
) -> Result<PhaseModulation> {
    let derivative: RealFn = Arc::new(move |t| 2.0 * s1(t) - s2(t));
    PhaseModulation::from_derivative(derivative, t_start, t_end)
}

/// Composite Simpson quadrature on a uniform grid with `n` points (`n` odd).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n.max(3) | 1;
    let h = (b - a) / (n - 1) as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n - 1 {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_pair_counterintuitive_peaks() {
        let (pump, stokes) = gaussian_pair(1.0, 1.0, 0.6, 1.0).unwrap();
        // Stokes peaks first (at -tau), pump at +tau
        assert!((stokes.eval(-0.6) - 1.0).abs() < 1e-15);
        assert!((pump.eval(0.6) - 1.0).abs() < 1e-15);
        assert!(stokes.eval(-0.6) > stokes.eval(0.6));
    }

    #[test]
    fn gaussian_pair_zero_pump() {
        let (pump, _) = gaussian_pair(1.0, 0.0, 0.6, 1.0).unwrap();
        for t in [-2.0, 0.0, 2.0] {
            assert_eq!(pump.eval(t), 0.0);
        }
    }

    #[test]
    fn gaussian_pair_rejects_bad_width() {
        assert!(gaussian_pair(1.0, 1.0, 0.6, 0.0).is_err());
    }

    #[test]
    fn gaussian_overlap_positive() {
        let (pump, stokes) = gaussian_pair(1.0, 1.0, 0.6, 1.0).unwrap();
        let overlap = simpson(|t| pump.eval(t) * stokes.eval(t), -10.0, 10.0, 4001);
        assert!(overlap > 0.0);
        // analytic: integral of exp(-((t-tau)/T)^2) exp(-((t+tau)/T)^2)
        //         = T sqrt(pi/2) exp(-2 tau^2 / T^2)
        let expect = (std::f64::consts::PI / 2.0).sqrt() * (-2.0 * 0.36f64).exp();
        assert!((overlap - expect).abs() < 1e-10);
    }

    #[test]
    fn cstirap_detunings_shape() {
        let (ds, dp) = cstirap_detunings(1.0, 10.0, 1.2, 2.0, 0.6).unwrap();
        assert!(ds.eval(0.0).abs() < 1e-15); // odd symmetry
        assert!((ds.eval(1e4) - 10.0).abs() < 1e-12); // asymptote h_delta * Omega0
        assert!((ds.eval(-1e4) + 10.0).abs() < 1e-12);
        for t in [-3.0, -0.5, 0.7, 4.0] {
            let s = ds.eval(t);
            if s.abs() > 1e-12 {
                assert!((dp.eval(t) / s - 1.2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn envelope_bounded_by_declared_amplitude() {
        let e = Envelope::Gaussian { amplitude: 0.7, center: 1.0, width: 2.0 };
        let d = Envelope::TanhPair { height: 3.0, tau: 1.5, rise: 0.4 };
        let mut t = -20.0;
        while t <= 20.0 {
            assert!(e.eval(t).abs() <= e.declared_amplitude() + 1e-15);
            assert!(d.eval(t).abs() <= d.declared_amplitude() + 1e-15);
            t += 0.05;
        }
    }

    #[test]
    fn phase_zero_shifts() {
        let pm = phase_from_shifts(constant_fn(0.0), constant_fn(0.0), -5.0, 5.0).unwrap();
        for t in [-5.0, -1.0, 0.3, 5.0] {
            assert_eq!(pm.phase(t), 0.0);
        }
    }

    #[test]
    fn phase_constant_shifts_linear() {
        // S1 = -0.05, S2 = -0.2 -> phidot = 0.1, phi = 0.1 (t - t_start)
        let pm =
            phase_from_shifts(constant_fn(-0.05), constant_fn(-0.2), -3.0, 7.0).unwrap();
        assert!((pm.derivative(0.0) - 0.1).abs() < 1e-15);
        for t in [-3.0, 0.0, 2.5, 7.0] {
            assert!((pm.phase(t) - 0.1 * (t + 3.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn phase_matches_fine_quadrature_oracle() {
        // Gaussian S1(t); oracle = Simpson at 10x the table resolution
        let s1 = real_fn(|t: f64| -0.05 * (-(t / 3.0) * (t / 3.0)).exp());
        let s2 = constant_fn(0.0);
        let (a, b) = (-10.0, 10.0);
        let pm = PhaseModulation::from_derivative_resolution(
            {
                let s1 = s1.clone();
                let s2 = s2.clone();
                Arc::new(move |t| 2.0 * s1(t) - s2(t))
            },
            a,
            b,
            2001,
        )
        .unwrap();
        for t in [-7.3, -2.0, 0.0, 1.234, 6.7, 10.0] {
            let oracle = simpson(|x| 2.0 * s1(x) - s2(x), a, t, 20001);
            assert!(
                (pm.phase(t) - oracle).abs() < 1e-8,
                "phase mismatch at t={t}: {} vs {}",
                pm.phase(t),
                oracle
            );
        }
    }

    #[test]
    fn phase_derivative_consistency() {
        let pm = PhaseModulation::from_derivative(
            real_fn(|t: f64| 0.3 * (0.7 * t).sin()),
            -8.0,
            8.0,
        )
        .unwrap();
        let eps = 1e-5;
        let max_deriv = 0.3;
        let mut t = -7.9;
        while t < 7.9 {
            let numeric = (pm.phase(t + eps) - pm.phase(t - eps)) / (2.0 * eps);
            assert!((numeric - pm.derivative(t)).abs() < 1e-6 * max_deriv + 1e-9);
            t += 0.37;
        }
    }

    #[test]
    fn schedule_two_photon_consistency() {
        let mut sched = ControlSchedule::new(vec![]);
        sched.set_detuning("delta_p", real_fn(|t: f64| 1.2 * (0.1 * t).tanh()));
        sched.set_detuning("delta_s", real_fn(|t: f64| (0.1 * t).tanh()));
        sched.derive_two_photon().unwrap();
        let dp = sched.detuning("delta_p").unwrap();
        let ds = sched.detuning("delta_s").unwrap();
        let dd = sched.detuning("delta").unwrap();
        for t in [-11.0, 0.0, 3.0, 42.0] {
            assert!((dd(t) - (dp(t) - ds(t))).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_carrier_rejected() {
        let e = Envelope::Constant { amplitude: 1.0 };
        assert!(DriveTone::new(e, -1.0, None, ("0", "2")).is_err());
    }

    #[test]
    fn time_reversal_mirrors_envelopes() {
        let e = Envelope::Gaussian { amplitude: 1.0, center: 2.0, width: 1.0 };
        let r = e.time_reversed();
        for t in [-3.0, 0.0, 1.7] {
            assert!((r.eval(t) - e.eval(-t)).abs() < 1e-15);
        }
        let d = Envelope::TanhPair { height: 10.0, tau: 2.0, rise: 0.6 };
        let rd = d.time_reversed();
        for t in [-3.0, 0.1, 5.0] {
            assert!((rd.eval(t) - d.eval(-t)).abs() < 1e-12);
        }
    }
}
