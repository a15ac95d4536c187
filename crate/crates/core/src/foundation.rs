//! Conventions, constants and small analytic helpers shared by every module.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{ensure_finite, ensure_positive, Result};

pub use num_complex::Complex64 as C64;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// The fixed Minkowski metric: signature (+, −, −, −), natural units ħ = c = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricConvention;

impl MetricConvention {
    pub const SIGNATURE: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

    pub fn signature(&self) -> [f64; 4] {
        Self::SIGNATURE
    }

    /// Diagonal metric component `g_{μμ}`.
    pub fn g(&self, mu: usize) -> f64 {
        Self::SIGNATURE[mu]
    }
}

/// An event: quantum time plus three space coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FourVector {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FourVector {
    pub const ZERO: FourVector = FourVector { t: 0.0, x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Self { t, x, y, z }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.t, self.x, self.y, self.z]
    }

    /// Component by index, 0 = t, 1..=3 = x, y, z.
    pub fn get(&self, mu: usize) -> f64 {
        self.to_array()[mu]
    }

    pub fn with(mut self, mu: usize, value: f64) -> Self {
        match mu {
            0 => self.t = value,
            1 => self.x = value,
            2 => self.y = value,
            3 => self.z = value,
            _ => panic!("four-vector index {mu} out of range"),
        }
        self
    }

    pub fn space(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector::new(self.t + o.t, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector::new(self.t - o.t, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector::new(-self.t, -self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, s: f64) -> FourVector {
        FourVector::new(self.t * s, self.x * s, self.y * s, self.z * s)
    }
}

/// Energy and three-momentum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FourMomentum {
    pub e: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

impl FourMomentum {
    pub const fn new(e: f64, px: f64, py: f64, pz: f64) -> Self {
        Self { e, px, py, pz }
    }

    /// Onshell momentum with energy `√(p⃗² + m²)`.
    pub fn onshell(px: f64, py: f64, pz: f64, m: f64) -> Self {
        let e = (px * px + py * py + pz * pz + m * m).sqrt();
        Self::new(e, px, py, pz)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.e, self.px, self.py, self.pz]
    }

    pub fn get(&self, mu: usize) -> f64 {
        self.to_array()[mu]
    }

    pub fn space(&self) -> [f64; 3] {
        [self.px, self.py, self.pz]
    }

    pub fn p_squared(&self) -> f64 {
        self.px * self.px + self.py * self.py + self.pz * self.pz
    }

    /// `E² − p⃗²`.
    pub fn square(&self) -> f64 {
        self.e * self.e - self.p_squared()
    }

    pub fn as_vector(self) -> FourVector {
        FourVector::new(self.e, self.px, self.py, self.pz)
    }
}

/// `a·b = a_t b_t − a_x b_x − a_y b_y − a_z b_z`.
pub fn minkowski_dot(a: FourVector, b: FourVector) -> f64 {
    a.t * b.t - a.x * b.x - a.y * b.y - a.z * b.z
}

/// Reference values in SI units, used only for unit conversion helpers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Planck time in seconds.
    pub planck_time: f64,
    /// Planck length in meters.
    pub planck_length: f64,
    /// ħ/(m_e c²) in seconds.
    pub electron_compton_time: f64,
    /// Speed of light in m/s.
    pub speed_of_light: f64,
    /// ħ in eV·s.
    pub hbar_ev_s: f64,
    /// Electron rest energy in eV.
    pub electron_mass_ev: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    planck_time: 5.39e-44,
    planck_length: 1.62e-35,
    electron_compton_time: 1.29e-21,
    speed_of_light: 2.997_924_58e8,
    hbar_ev_s: 6.58e-16,
    electron_mass_ev: 0.511e6,
};

impl PhysicalConstants {
    /// Natural time scale `ħ/(mc²)` in seconds for a rest energy in eV.
    pub fn compton_time(&self, rest_energy_ev: f64) -> Result<f64> {
        ensure_positive("rest energy", rest_energy_ev)?;
        Ok(self.hbar_ev_s / rest_energy_ev)
    }

    /// Converts a length in meters to the light travel time in seconds.
    pub fn light_time(&self, meters: f64) -> f64 {
        meters / self.speed_of_light
    }

    /// Converts a time in seconds to the distance light covers, in meters.
    pub fn light_distance(&self, seconds: f64) -> f64 {
        seconds * self.speed_of_light
    }
}

/// Principal square root with the branch cut on the negative real axis.
///
/// The argument of the result lies in (−π/2, π/2], so both `+0` and `−0`
/// imaginary parts on the negative axis map to `+i√|z|`.
pub fn complex_sqrt(z: C64) -> C64 {
    if z.im == 0.0 {
        if z.re >= 0.0 {
            return C64::new(z.re.sqrt(), 0.0);
        }
        return C64::new(0.0, (-z.re).sqrt());
    }
    z.sqrt()
}

/// Axis tag for the dispersion factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Time,
    Space,
}

/// Complex dispersion growth factor `1 ∓ iτ/(mσ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FFactor {
    pub axis: Axis,
    pub value: C64,
}

impl FFactor {
    pub fn norm_sqr(&self) -> f64 {
        self.value.norm_sqr()
    }
}

/// Time axis gives `1 − iτ/(mσ²)`, space axes give `1 + iτ/(mσ²)`.
pub fn f_factor(axis: Axis, tau: f64, m: f64, sigma2: f64) -> Result<FFactor> {
    ensure_positive("mass", m)?;
    ensure_positive("dispersion", sigma2)?;
    ensure_finite("tau", tau)?;
    let r = tau / (m * sigma2);
    let value = match axis {
        Axis::Time => C64::new(1.0, -r),
        Axis::Space => C64::new(1.0, r),
    };
    Ok(FFactor { axis, value })
}

/// Axis tag of a spacetime index.
pub fn axis_of(mu: usize) -> Axis {
    if mu == 0 {
        Axis::Time
    } else {
        Axis::Space
    }
}
