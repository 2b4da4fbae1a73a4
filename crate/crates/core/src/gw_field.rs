//! GW polarizations, the cavity's mode profile, TT projectors, the input GW
//! noise channel and the field radiated by the cavity.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Detector;
use crate::quad::{integrate, QuadValue, Tolerance};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

fn norm(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn unit(v: Vec3, operation: &str) -> Result<Vec3> {
    let n = norm(v);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::domain(operation, "direction vector must be finite and non-zero"));
    }
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Orthonormal (e1, e2) transverse to the unit vector `n`. Gram-Schmidt against
/// the axis where |n_i| is smallest, lowest index on ties.
pub fn transverse_frame(n: Vec3) -> (Vec3, Vec3) {
    let mut axis = 0;
    for i in 1..3 {
        if n[i].abs() < n[axis].abs() {
            axis = i;
        }
    }
    let mut e1 = [0.0; 3];
    e1[axis] = 1.0;
    let proj = n[axis];
    for i in 0..3 {
        e1[i] -= proj * n[i];
    }
    let l = norm(e1);
    for v in e1.iter_mut() {
        *v /= l;
    }
    (e1, cross(n, e1))
}

/// Symmetric complex 3x3 tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TensorField3 {
    pub c: [[Complex64; 3]; 3],
}

impl TensorField3 {
    pub fn zero() -> Self {
        Self {
            c: [[Complex64::new(0.0, 0.0); 3]; 3],
        }
    }

    pub fn from_real(m: Mat3) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.c[i][j] = Complex64::new(m[i][j], 0.0);
            }
        }
        out
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let mut out = *self;
        for v in out.c.iter_mut().flatten() {
            *v *= k;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        self.c[0][0] + self.c[1][1] + self.c[2][2]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.c.iter().flatten().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `f . v` as a complex vector.
    pub fn dot(&self, v: Vec3) -> [Complex64; 3] {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..3 {
                *o += self.c[i][j] * v[j];
            }
        }
        out
    }

    /// Independent components in the order xx, xy, xz, yy, yz, zz.
    pub fn components(&self) -> [Complex64; 6] {
        let c = &self.c;
        [c[0][0], c[0][1], c[0][2], c[1][1], c[1][2], c[2][2]]
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.c[i][j] - self.c[j][i]).norm());
            }
        }
        worst
    }
}

impl Add for TensorField3 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.c[i][j] += rhs.c[i][j];
            }
        }
        self
    }
}

impl Sub for TensorField3 {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..3 {
            for j in 0..3 {
                self.c[i][j] -= rhs.c[i][j];
            }
        }
        self
    }
}

impl Mul<f64> for TensorField3 {
    type Output = Self;
    fn mul(mut self, k: f64) -> Self {
        for v in self.c.iter_mut().flatten() {
            *v *= k;
        }
        self
    }
}

impl QuadValue for TensorField3 {
    fn zero() -> Self {
        TensorField3::zero()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarizationPair {
    pub tau_plus: Mat3,
    pub tau_cross: Mat3,
}

pub fn polarization_basis(k_hat: Vec3) -> Result<PolarizationPair> {
    let n = unit(k_hat, "polarization_basis")?;
    let (e1, e2) = transverse_frame(n);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut tau_plus = [[0.0; 3]; 3];
    let mut tau_cross = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            tau_plus[i][j] = s * (e1[i] * e1[j] - e2[i] * e2[j]);
            tau_cross[i][j] = s * (e1[i] * e2[j] + e2[i] * e1[j]);
        }
    }
    Ok(PolarizationPair { tau_plus, tau_cross })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveVector {
    pub k: Vec3,
}

impl WaveVector {
    pub fn omega(&self, c: f64) -> f64 {
        c * norm(self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeProfile {
    /// `-i (exp(i k_x L) - 1) / (k_x L)`
    pub prefactor: Complex64,
    pub j_plus: Complex64,
    pub j_cross: Complex64,
}

/// `-i (e^{ix} - 1)/x = e^{ix/2} sin(x/2)/(x/2)`, equal to 1 at x = 0.
pub fn profile_prefactor(x: f64) -> Complex64 {
    let h = 0.5 * x;
    let sinc = if x.abs() < 1e-6 { 1.0 - h * h / 6.0 } else { h.sin() / h };
    Complex64::from_polar(sinc, h)
}

pub fn mode_profile(k: WaveVector, length: f64) -> Result<ModeProfile> {
    let pol = polarization_basis(k.k)?;
    let prefactor = profile_prefactor(k.k[0] * length);
    let norm = (2.0 * PI).powf(-1.5);
    Ok(ModeProfile {
        prefactor,
        j_plus: prefactor * pol.tau_plus[0][0] * norm,
        j_cross: prefactor * pol.tau_cross[0][0] * norm,
    })
}

/// `P f P - P Tr(P f)/2` with `P = I - n n`.
fn tt_project(f: &TensorField3, n: Vec3) -> TensorField3 {
    let mut p = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            p[i][j] = if i == j { 1.0 } else { 0.0 } - n[i] * n[j];
        }
    }
    let mut pf = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                pf[i][j] += f.c[k][j] * p[i][k];
            }
        }
    }
    let tr = pf[0][0] + pf[1][1] + pf[2][2];
    let mut out = TensorField3::zero();
    for i in 0..3 {
        for j in 0..3 {
            let mut v = Complex64::new(0.0, 0.0);
            for k in 0..3 {
                v += pf[i][k] * p[k][j];
            }
            out.c[i][j] = v - tr * (0.5 * p[i][j]);
        }
    }
    out
}

pub fn tt_project_planewave(f: &TensorField3, k_hat: Vec3) -> Result<TensorField3> {
    Ok(tt_project(f, unit(k_hat, "tt_project_planewave")?))
}

pub fn tt_project_radial(f: &TensorField3, x: Vec3) -> Result<TensorField3> {
    Ok(tt_project(f, unit(x, "tt_project_radial")?))
}

/// Commutator and response of the GW noise input seen by the cavity,
/// `[h(t), h(t + tau)] = i hbar c(tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HInputChannel {
    pub length: f64,
    pub c: f64,
    pub m_g: f64,
}

pub fn h_input_channel(det: &Detector) -> HInputChannel {
    HInputChannel {
        length: det.params.length,
        c: det.consts.c,
        m_g: det.couplings.m_g,
    }
}

impl HInputChannel {
    /// Light-crossing time L/c; the commutator vanishes beyond it.
    pub fn support(&self) -> f64 {
        self.length / self.c
    }

    /// First-moment scale: `int tau c(tau) dtau = 2 kappa`.
    pub fn kappa(&self) -> f64 {
        1.0 / (15.0 * PI * self.c.powi(3) * self.m_g)
    }

    /// `c(tau)`. The radial wavenumber integral of `|J|^2 sin(w_k tau)/w_k` is a
    /// Dirichlet integral equal to `pi/(c mu^2 L^2)` when `c|tau| < |mu| L`, so
    /// only the direction cosine `mu = k_x/|k|` is integrated numerically.
    pub fn commutator(&self, tau: f64, tol: Tolerance) -> Result<f64> {
        if tau == 0.0 {
            return Ok(0.0);
        }
        let x = self.c * tau.abs() / self.length;
        if x >= 1.0 {
            return Ok(0.0);
        }
        let f = integrate(
            "h_input_channel",
            |mu: f64| {
                let q = 1.0 - mu * mu;
                q * q / (mu * mu)
            },
            x,
            1.0,
            tol,
        )?;
        Ok(tau.signum() * f / (4.0 * PI * self.c * self.length * self.length * self.m_g))
    }

    /// Imaginary part of the channel's response at angular frequency `omega`
    /// (odd in omega). Its modulus is the symmetrized vacuum density in units of hbar.
    pub fn im_response(&self, omega: f64, tol: Tolerance) -> Result<f64> {
        if omega == 0.0 {
            return Ok(0.0);
        }
        let k0 = omega / self.c;
        let half = 0.5 * k0 * self.length;
        let angular = integrate(
            "h_input_channel response",
            |mu: f64| {
                let q = 1.0 - mu * mu;
                let y = half * mu;
                let sinc = if y.abs() < 1e-6 { 1.0 - y * y / 6.0 } else { y.sin() / y };
                q * q * sinc * sinc
            },
            0.0,
            1.0,
            tol,
        )?;
        Ok(k0 * angular / (8.0 * PI * self.c * self.c * self.m_g))
    }
}

/// `Lambda_ij = P_ix P_jx - P_ij P_xx / 2` for a unit direction `n`.
fn lambda_xx(n: Vec3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    let p = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 } - n[i] * n[j];
    let pxx = p(0, 0);
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = p(i, 0) * p(j, 0) - 0.5 * p(i, j) * pxx;
        }
    }
    out
}

// Lambda is quartic in n, so 12 azimuthal points integrate it exactly.
const AZIMUTH: usize = 12;

/// Azimuthal integral of Lambda over directions with `n . axis = mu`.
fn lambda_ring(mu: f64, axis: Vec3, e1: Vec3, e2: Vec3) -> TensorField3 {
    let s = (1.0 - mu * mu).max(0.0).sqrt();
    let mut acc = [[0.0; 3]; 3];
    for k in 0..AZIMUTH {
        let (sp, cp) = (2.0 * PI * k as f64 / AZIMUTH as f64).sin_cos();
        let n = [
            mu * axis[0] + s * (cp * e1[0] + sp * e2[0]),
            mu * axis[1] + s * (cp * e1[1] + sp * e2[1]),
            mu * axis[2] + s * (cp * e1[2] + sp * e2[2]),
        ];
        let l = lambda_xx(n);
        for i in 0..3 {
            for j in 0..3 {
                acc[i][j] += l[i][j];
            }
        }
    }
    TensorField3::from_real(acc) * (2.0 * PI / AZIMUTH as f64)
}

/// Outgoing-wave field at `y` of a unit xx point source after TT projection in
/// wavevector space, `(1/c^2) int d^3k/(2pi)^3 e^{ik.y} Lambda(k)/(k^2 - (k0 + i0)^2)`.
///
/// The radial integral is rotated onto the imaginary axis. Those pieces cancel
/// between k and -k, leaving a static term and an on-shell hemisphere integral.
pub fn point_kernel(y: Vec3, k0: f64, c: f64, tol: Tolerance) -> Result<TensorField3> {
    let rho = norm(y);
    if !(rho > 0.0) {
        return Err(Error::domain("radiated_field_exact", "field point on the source"));
    }
    let axis = [y[0] / rho, y[1] / rho, y[2] / rho];
    let (e1, e2) = transverse_frame(axis);
    let stat = lambda_ring(0.0, axis, e1, e2) * (PI / (c * c * rho));
    // Split so each piece spans a few wavelengths.
    let pieces = ((k0 * rho / (4.0 * PI)).ceil() as usize).max(1);
    let mut osc = TensorField3::zero();
    for p in 0..pieces {
        let a = p as f64 / pieces as f64;
        let b = (p + 1) as f64 / pieces as f64;
        let part: TensorField3 = integrate(
            "radiated_field_exact",
            |mu: f64| lambda_ring(mu, axis, e1, e2).scale(Complex64::from_polar(1.0, k0 * rho * mu)),
            a,
            b,
            Tolerance {
                abs: tol.rel * 1e-3 * stat.norm(),
                ..tol
            },
        )?;
        osc = osc + part;
    }
    let osc = osc.scale(Complex64::new(0.0, PI * k0 / (c * c)));
    Ok((stat + osc) * (1.0 / (8.0 * PI.powi(3))))
}

/// Exact GW field at `x` per unit of `alpha1_coeff`, including the cavity's
/// extent along x (the mode-profile factor).
pub fn radiated_field_exact(
    omega: f64,
    x: Vec3,
    alpha1_coeff: Complex64,
    det: &Detector,
    tol: Tolerance,
) -> Result<TensorField3> {
    const OP: &str = "radiated_field_exact";
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::domain(OP, "needs Omega > 0"));
    }
    if !x.iter().all(|v| v.is_finite()) || norm(x) == 0.0 {
        return Err(Error::domain(OP, "field point must be finite and non-zero"));
    }
    let len = det.params.length;
    if x[1] == 0.0 && x[2] == 0.0 && (0.0..=len).contains(&x[0]) {
        return Err(Error::domain(
            OP,
            "field point lies on the cavity axis inside the source",
        ));
    }
    let c = det.consts.c;
    let k0 = omega / c;
    let failure = RefCell::new(None);
    let avg = integrate(
        OP,
        |sigma: f64| {
            let y = [x[0] - sigma * len, x[1], x[2]];
            match point_kernel(y, k0, c, tol) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    TensorField3::zero()
                }
            }
        },
        0.0,
        1.0,
        tol,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let pref = det.params.drive() / (2.0 * det.couplings.m_g);
    Ok(avg.scale(alpha1_coeff * pref))
}

/// Integrated stress-energy source `delta_ix delta_jx (w0 abar / c^2) alpha1`.
pub fn stress_energy_source(alpha1: Complex64, det: &Detector) -> TensorField3 {
    let mut t = TensorField3::zero();
    t.c[0][0] = alpha1 * (det.params.drive() / det.consts.c.powi(2));
    t
}

/// Far-zone field `(4G/c^2) TT[source] e^{i Omega r/c} / r`.
pub fn radiated_field_farzone(omega: f64, x: Vec3, source: &TensorField3, det: &Detector) -> Result<TensorField3> {
    let r = norm(x);
    let tt = tt_project_radial(source, x)?;
    let phase = Complex64::from_polar(
        4.0 * det.consts.g / (det.consts.c.powi(2) * r),
        omega * r / det.consts.c,
    );
    Ok(tt.scale(phase))
}
