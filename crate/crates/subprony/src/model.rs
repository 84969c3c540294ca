//! Signal model, sampling schedules, noise injection and sample sources.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sequence::Samples;

/// One damped complex exponential `beta exp(i gamma) exp((psi + i 2 pi omega) t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialTerm<T> {
    /// Amplitude, >= 0.
    pub beta: T,
    /// Phase in radians.
    pub gamma: T,
    /// Damping, 1/time (typically <= 0).
    pub psi: T,
    /// Frequency in cycles/time, in `[0, omega_max)` of the owning model.
    pub omega: T,
}

impl<T: Real> ExponentialTerm<T> {
    pub fn new(beta: T, gamma: T, psi: T, omega: T) -> Self {
        Self {
            beta,
            gamma,
            psi,
            omega,
        }
    }

    /// Complex amplitude `alpha = beta exp(i gamma)`.
    pub fn alpha(&self) -> Complex<T> {
        Complex::from_polar(self.beta, self.gamma)
    }

    /// `exp(phi delta)` with `phi = psi + i 2 pi omega`.
    pub fn lambda(&self, delta: T) -> Complex<T> {
        let two_pi = T::PI() + T::PI();
        Complex::from_polar((self.psi * delta).exp(), two_pi * self.omega * delta)
    }

    fn eval(&self, t: T) -> Complex<T> {
        let two_pi = T::PI() + T::PI();
        Complex::from_polar(self.beta * (self.psi * t).exp(), self.gamma + two_pi * self.omega * t)
    }
}

/// A finite sum of damped complex exponentials with bandwidth `omega_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalModel<T> {
    terms: Vec<ExponentialTerm<T>>,
    omega_max: u32,
}

impl<T: Real> SignalModel<T> {
    pub fn new(terms: Vec<ExponentialTerm<T>>, omega_max: u32) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidModel("at least one term required".into()));
        }
        if omega_max == 0 {
            return Err(Error::InvalidModel("omega_max must be positive".into()));
        }
        let om = T::from_f64_lossy(omega_max as f64);
        for (i, t) in terms.iter().enumerate() {
            if !(t.beta >= T::zero()) {
                return Err(Error::InvalidModel(format!("term {i}: beta must be >= 0")));
            }
            if !(t.omega >= T::zero() && t.omega < om) {
                return Err(Error::InvalidModel(format!(
                    "term {i}: omega must lie in [0, {omega_max})"
                )));
            }
            for v in [t.beta, t.gamma, t.psi, t.omega] {
                if !v.is_finite() {
                    return Err(Error::InvalidModel(format!("term {i}: non-finite field")));
                }
            }
        }
        Ok(Self { terms, omega_max })
    }

    pub fn terms(&self) -> &[ExponentialTerm<T>] {
        &self.terms
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn omega_max(&self) -> u32 {
        self.omega_max
    }

    /// Exact term-by-term evaluation of the model at time `t`.
    pub fn evaluate(&self, t: T) -> Complex<T> {
        let mut acc = Complex::new(T::zero(), T::zero());
        for term in &self.terms {
            acc += term.eval(t);
        }
        acc
    }
}

/// Sampling schedule: base grid `t = j r delta` plus shift batches
/// `t = (j r + k rho) delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingScheme<T> {
    /// Bandwidth Omega (cycles/time).
    pub omega_max: u32,
    /// Time step delta with `delta * omega_max <= 1`.
    pub delta: T,
    /// Decimation factor r > 1.
    pub r: u32,
    /// Shift factor rho, nonzero, coprime with r.
    pub rho: i32,
    /// Base-grid sample count M.
    pub base_samples: usize,
    /// Modeled term budget N (>= expected n), M >= 2N.
    pub term_budget: usize,
    /// Per-shift sample count m.
    pub shift_samples: usize,
    /// Maximum shift index K.
    pub max_shift: usize,
}

pub(crate) fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl<T: Real> SamplingScheme<T> {
    pub fn validate(&self) -> Result<()> {
        if self.r < 2 {
            return Err(Error::InvalidScheme("decimation factor r must exceed 1".into()));
        }
        if self.rho == 0 {
            return Err(Error::InvalidScheme("shift factor rho must be nonzero".into()));
        }
        if gcd_u64(self.r as u64, self.rho.unsigned_abs() as u64) != 1 {
            return Err(Error::NotCoprime {
                r: self.r as i64,
                rho: self.rho as i64,
            });
        }
        if self.term_budget == 0 {
            return Err(Error::InvalidScheme("term budget N must be positive".into()));
        }
        if self.base_samples < 2 * self.term_budget {
            return Err(Error::InvalidScheme(format!(
                "base sample count M={} must be at least 2N={}",
                self.base_samples,
                2 * self.term_budget
            )));
        }
        if self.shift_samples < 2 {
            return Err(Error::InvalidScheme("shift sample count m must be >= 2".into()));
        }
        if self.max_shift == 0 {
            return Err(Error::InvalidScheme("max shift K must be >= 1".into()));
        }
        let prod = self.delta * T::from_f64_lossy(self.omega_max as f64);
        if !(prod <= T::one() + T::epsilon() * T::from_f64_lossy(64.0)) {
            return Err(Error::InvalidScheme(format!(
                "delta * omega_max = {prod} must not exceed 1"
            )));
        }
        Ok(())
    }

    /// Whether `delta = 1/omega_max`, the precondition for frequency
    /// recombination on the integer candidate grid.
    pub fn critical_delta(&self) -> bool {
        let prod = self.delta * T::from_f64_lossy(self.omega_max as f64);
        (prod - T::one()).abs() <= T::from_f64_lossy(1e-9)
    }

    /// Time index of the sample `f_{j r + k rho}`.
    pub fn shifted_index(&self, j: i64, k: i64) -> Result<i64> {
        let index = j * self.r as i64 + k * self.rho as i64;
        if index < 0 {
            return Err(Error::InvalidSchedule { j, k, index });
        }
        Ok(index)
    }
}

/// Noise calibration: standard deviation of circular complex Gaussian noise
/// for a target SNR in dB, with signal power measured as the mean of
/// `|f_j|^2` over the noiseless base grid `j r delta`, `j = 0..M-1`.
pub fn add_noise_calibration<T: Real>(
    model: &SignalModel<T>,
    scheme: &SamplingScheme<T>,
    snr_db: T,
) -> Result<T> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidInput("snr_db must be finite".into()));
    }
    let mut power = T::zero();
    for j in 0..scheme.base_samples {
        let t = T::from_usize_lossy(j) * T::from_f64_lossy(scheme.r as f64) * scheme.delta;
        power += model.evaluate(t).norm_sqr();
    }
    power = power / T::from_usize_lossy(scheme.base_samples);
    if !(power > T::zero()) {
        return Err(Error::InvalidCalibration);
    }
    let ten = T::from_f64_lossy(10.0);
    Ok((power * ten.powf(-snr_db / ten)).sqrt())
}

#[derive(Debug, Clone)]
enum SourceKind<T> {
    Generator {
        model: SignalModel<T>,
        sigma: T,
        seed: u64,
    },
    Trace {
        values: BTreeMap<i64, Complex<T>>,
    },
}

/// An indexed oracle delivering `f_j = phi(j delta)` (+ cached noise) on
/// demand, or replaying a prerecorded trace. Records every index drawn.
#[derive(Debug, Clone)]
pub struct SampleSource<T> {
    kind: SourceKind<T>,
    delta: T,
    cache: BTreeMap<i64, Complex<T>>,
    consumed: BTreeSet<i64>,
}

impl<T: Real> SampleSource<T> {
    /// Noiseless generator.
    pub fn noiseless(model: SignalModel<T>, delta: T) -> Self {
        Self::with_noise(model, delta, T::zero(), 0)
    }

    /// Generator with circular complex Gaussian noise of standard deviation
    /// `sigma`, reproducible from `seed`. Each index's draw is independent
    /// of read order and cached, so a re-read returns the identical value.
    pub fn with_noise(model: SignalModel<T>, delta: T, sigma: T, seed: u64) -> Self {
        Self {
            kind: SourceKind::Generator { model, sigma, seed },
            delta,
            cache: BTreeMap::new(),
            consumed: BTreeSet::new(),
        }
    }

    /// Trace-backed source.
    pub fn from_trace(values: BTreeMap<i64, Complex<T>>, delta: T) -> Self {
        Self {
            kind: SourceKind::Trace { values },
            delta,
            cache: BTreeMap::new(),
            consumed: BTreeSet::new(),
        }
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// Number of distinct indices drawn so far.
    pub fn consumed(&self) -> usize {
        self.consumed.len()
    }

    pub fn consumed_indices(&self) -> impl Iterator<Item = i64> + '_ {
        self.consumed.iter().copied()
    }

    /// The sample `f_j`.
    pub fn sample_index(&mut self, j: i64) -> Result<Complex<T>> {
        if j < 0 {
            return Err(Error::SampleUnavailable { index: j });
        }
        if let Some(v) = self.cache.get(&j) {
            self.consumed.insert(j);
            return Ok(*v);
        }
        let value = match &self.kind {
            SourceKind::Generator { model, sigma, seed } => {
                let t = T::from_f64_lossy(j as f64) * self.delta;
                let mut v = model.evaluate(t);
                if *sigma > T::zero() {
                    v += noise_draw(*seed, j, *sigma);
                }
                v
            }
            SourceKind::Trace { values } => *values
                .get(&j)
                .ok_or(Error::SampleUnavailable { index: j })?,
        };
        self.cache.insert(j, value);
        self.consumed.insert(j);
        Ok(value)
    }

    /// True when this source injects noise (generator mode with sigma > 0).
    pub fn is_noisy(&self) -> bool {
        matches!(&self.kind, SourceKind::Generator { sigma, .. } if *sigma > T::zero())
    }
}

/// One circular complex Gaussian draw for time index `j`, independent of
/// read order: the RNG stream is keyed by the index.
fn noise_draw<T: Real>(seed: u64, j: i64, sigma: T) -> Complex<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j as u64);
    let re: f64 = StandardNormal.sample(&mut rng);
    let im: f64 = StandardNormal.sample(&mut rng);
    let half = sigma * T::from_f64_lossy(std::f64::consts::FRAC_1_SQRT_2);
    Complex::new(half * T::from_f64_lossy(re), half * T::from_f64_lossy(im))
}

impl<T: Real> Samples<T> for SampleSource<T> {
    fn sample(&mut self, index: i64) -> Result<Complex<T>> {
        self.sample_index(index)
    }
}

/// Parse a trace CSV (`index,re,im` with a header line) into a map.
pub fn parse_trace_csv<T: Real>(text: &str) -> Result<BTreeMap<i64, Complex<T>>> {
    let mut values = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("index")) {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(i), Some(re), Some(im)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::InvalidInput(format!(
                "trace line {} is not index,re,im",
                lineno + 1
            )));
        };
        let index: i64 = i
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad trace index on line {}", lineno + 1)))?;
        let re: f64 = re
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad trace value on line {}", lineno + 1)))?;
        let im: f64 = im
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad trace value on line {}", lineno + 1)))?;
        values.insert(index, Complex::new(T::from_f64_lossy(re), T::from_f64_lossy(im)));
    }
    Ok(values)
}

/// Render a trace as CSV with a header line. Values use the shortest
/// round-trip decimal form, so re-reading reproduces them bit-exactly.
pub fn render_trace_csv<T: Real>(values: &BTreeMap<i64, Complex<T>>) -> String {
    let mut out = String::from("index,re,im\n");
    for (i, v) in values {
        out.push_str(&format!("{},{},{}\n", i, v.re, v.im));
    }
    out
}
