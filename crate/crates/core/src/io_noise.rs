//! Output field, backaction kernels, squeeze ellipse, homodyne spectra and the
//! quantum Cramer-Rao bound.
//!
//! Vacuum inputs have a symmetrized double-sided density of hbar/2 per optical
//! quadrature. Spectra returned here are in units of hbar.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freq_response::{Channel, QuadratureSolution};
use crate::model::{DerivedCouplings, Detector, PhysicalConstants, SystemParams};

/// `out[j][ch] = delta(j, ch) - sqrt(2 gamma) * sol[j][ch]`.
pub fn input_output(sol: &QuadratureSolution, params: &SystemParams) -> [[Complex64; 4]; 2] {
    let root = (2.0 * params.gamma).sqrt();
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 2];
    for (j, row) in out.iter_mut().enumerate() {
        for (ch, v) in row.iter_mut().enumerate() {
            let direct = if ch == j { 1.0 } else { 0.0 };
            *v = direct - root * sol.coeffs[j][ch];
        }
    }
    out
}

pub fn backaction_kernels(omega: f64, params: &SystemParams, couplings: &DerivedCouplings) -> Result<(f64, f64)> {
    let g = params.gamma;
    let lorentz = g * g + omega * omega;
    let k_pd = if couplings.epsilon_q == 0.0 {
        0.0
    } else if omega == 0.0 {
        return Err(Error::singularity("backaction_kernels", "Omega = 0 with finite mass"));
    } else {
        2.0 * g * couplings.epsilon_q / (omega * omega * lorentz)
    };
    let k_gw = 2.0 * omega * g * couplings.gw_coupling() / lorentz;
    Ok((k_pd, k_gw))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutputRelation {
    pub omega: f64,
    pub beta: f64,
    pub k_pd: f64,
    pub k_gw: f64,
    /// Coefficient of the GW noise input in the outgoing phase quadrature.
    pub gw_noise_coeff: Complex64,
    pub coeffs: [[Complex64; 4]; 2],
    /// Im of the GW channel self-response at this frequency (odd in Omega).
    /// Its modulus is the vacuum density of the GW noise input in units of hbar.
    pub gw_im_response: f64,
}

pub fn output_relation(
    omega: f64,
    sol: &QuadratureSolution,
    det: &Detector,
    gw_im_response: f64,
) -> Result<OutputRelation> {
    let coeffs = input_output(sol, &det.params);
    let (k_pd, k_gw) = backaction_kernels(omega, &det.params, &det.couplings)?;
    Ok(OutputRelation {
        omega,
        beta: (omega / det.params.gamma).atan() + FRAC_PI_2,
        k_pd,
        k_gw,
        gw_noise_coeff: coeffs[1][Channel::GwNoise as usize],
        coeffs,
        gw_im_response,
    })
}

impl OutputRelation {
    /// Readout coefficients of `cos(zeta) a1out + sin(zeta) a2out`.
    pub fn homodyne_row(&self, zeta: f64) -> [Complex64; 4] {
        let (s, c) = zeta.sin_cos();
        let mut row = [Complex64::new(0.0, 0.0); 4];
        for (ch, v) in row.iter_mut().enumerate() {
            *v = self.coeffs[0][ch] * c + self.coeffs[1][ch] * s;
        }
        row
    }

    /// Optical 2x2 block of the output map.
    pub fn optical(&self) -> [[Complex64; 2]; 2] {
        [
            [self.coeffs[0][0], self.coeffs[0][1]],
            [self.coeffs[1][0], self.coeffs[1][1]],
        ]
    }

    /// Spectral commutator matrix of the outgoing quadratures in units of hbar.
    /// Canonical algebra corresponds to `[[0, i], [-i, 0]]`.
    pub fn commutator_matrix(&self, include_gw: bool) -> [[Complex64; 2]; 2] {
        let i = Complex64::new(0.0, 1.0);
        let t = self.optical();
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                // T J T^dagger with J = [[0, 1], [-1, 0]]
                let tjt = t[a][0] * t[b][1].conj() - t[a][1] * t[b][0].conj();
                out[a][b] = i * tjt;
                if include_gw {
                    let g = Channel::GwNoise as usize;
                    out[a][b] += self.coeffs[a][g] * self.coeffs[b][g].conj() * (2.0 * self.gw_im_response);
                }
            }
        }
        out
    }
}

pub fn optical_determinant(rel: &OutputRelation) -> Complex64 {
    let t = rel.optical();
    t[0][0] * t[1][1] - t[0][1] * t[1][0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseEllipse {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

fn rotation(a: f64) -> [[f64; 2]; 2] {
    let (s, c) = a.sin_cos();
    [[c, -s], [s, c]]
}

fn matmul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

impl NoiseEllipse {
    /// Output covariance in units of the vacuum covariance.
    pub fn covariance(&self) -> [[f64; 2]; 2] {
        let r = rotation(self.phi);
        let d = [[(-2.0 * self.r).exp(), 0.0], [0.0, (2.0 * self.r).exp()]];
        let rt = rotation(-self.phi);
        matmul(matmul(r, d), rt)
    }

    /// Real quadrature map R(phi) S(r) R(-(theta + phi)), equal to [[1, 0], [-K, 1]].
    pub fn transfer(&self) -> [[f64; 2]; 2] {
        let d = [[(-self.r).exp(), 0.0], [0.0, self.r.exp()]];
        matmul(matmul(rotation(self.phi), d), rotation(-(self.theta + self.phi)))
    }
}

pub fn squeeze_params(k_pd: f64) -> Result<NoiseEllipse> {
    if !(k_pd >= 0.0) || !k_pd.is_finite() {
        return Err(Error::domain(
            "squeeze_params",
            format!("K_pd must be finite and >= 0, got {k_pd}"),
        ));
    }
    let half = 0.5 * k_pd;
    Ok(NoiseEllipse {
        r: half.asinh(),
        theta: half.atan(),
        // arccot(x) = pi/2 - arctan(x) for x >= 0
        phi: 0.5 * (FRAC_PI_2 - half.atan()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSeries {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Symmetrized homodyne density at angle `zeta`, in units of hbar.
pub fn homodyne_density(rel: &OutputRelation, zeta: f64, include_gw: bool) -> f64 {
    let row = rel.homodyne_row(zeta);
    let mut s = 0.5 * (row[0].norm_sqr() + row[1].norm_sqr());
    if include_gw {
        s += row[Channel::GwNoise as usize].norm_sqr() * rel.gw_im_response.abs();
    }
    s
}

pub fn output_spectrum(rels: &[OutputRelation], zeta: f64, include_gw: bool) -> SpectrumSeries {
    SpectrumSeries {
        grid: rels.iter().map(|r| r.omega).collect(),
        values: rels.iter().map(|r| homodyne_density(r, zeta, include_gw)).collect(),
    }
}

/// Intracavity amplitude-quadrature density in units of hbar.
pub fn alpha1_density(sol: &QuadratureSolution, gw_im_response: f64, include_gw: bool) -> f64 {
    let mut s = 0.5 * (sol.get(0, Channel::Alpha1In).norm_sqr() + sol.get(0, Channel::Alpha2In).norm_sqr());
    if include_gw {
        s += sol.get(0, Channel::GwNoise).norm_sqr() * gw_im_response.abs();
    }
    s
}

/// Lower bound on the strain-estimation noise density given the amplitude
/// quadrature density `s_alpha1` (absolute units, hbar included).
pub fn qcrb_bound(params: &SystemParams, consts: &PhysicalConstants, s_alpha1: f64) -> Result<f64> {
    if !(s_alpha1 > 0.0) {
        return Err(Error::domain(
            "qcrb_bound",
            format!("S_alpha1 must be > 0, got {s_alpha1}"),
        ));
    }
    let drive = params.drive();
    Ok(consts.hbar * consts.hbar / (drive * drive * s_alpha1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freq_response::{laplace_s, solve_tuned};
    use crate::model::Mass;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tuned(gamma: f64, m: Mass) -> SystemParams {
        SystemParams {
            omega0: 3.0,
            alpha_bar: 0.5,
            gamma,
            delta: 0.0,
            m,
            length: 1.0,
        }
    }

    fn det_with(params: SystemParams, eq: f64, egw: f64) -> Detector {
        Detector {
            params,
            consts: PhysicalConstants::unit(),
            couplings: DerivedCouplings {
                epsilon_q: eq,
                epsilon_gw: egw,
                m_g: 1.0,
            },
        }
    }

    fn relation(det: &Detector, omega: f64) -> OutputRelation {
        let sol = solve_tuned(laplace_s(omega), &det.params, &det.couplings).unwrap();
        // Long-wavelength GW response: Im chi = kappa * Omega with lambda^2 kappa = eps_GW.
        let lam = 0.5 * det.params.drive();
        output_relation(omega, &sol, det, det.couplings.epsilon_gw * omega / (lam * lam)).unwrap()
    }

    #[test]
    fn bare_reflection_is_unimodular() {
        let det = det_with(tuned(1.3, Mass::Infinite), 0.0, 0.0);
        for w in [0.01, 0.7, 1.3, 40.0] {
            let rel = relation(&det, w);
            assert!((rel.coeffs[0][0].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn reflection_phase_at_gamma() {
        let det = det_with(tuned(2.0, Mass::Infinite), 0.0, 0.0);
        let rel = relation(&det, 2.0);
        let want = c(0.0, 2.0 * (PI / 4.0 + PI / 2.0)).exp();
        assert!((rel.coeffs[0][0] - want).norm() < 1e-15);
        assert!((rel.beta - 3.0 * PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn phase_output_kernel() {
        let det = det_with(tuned(1.1, Mass::Finite(1.0)), 0.9, 0.02);
        for w in [0.3, 1.1, 5.0] {
            let rel = relation(&det, w);
            let e2b = c(0.0, 2.0 * rel.beta).exp();
            let want = -e2b * c(rel.k_pd, rel.k_gw);
            assert!((rel.coeffs[1][0] - want).norm() < 1e-13 * want.norm());
            // GW noise coefficient of the phase output: -sqrt(gamma/2) w0 abar / (s + gamma)
            let g = -(det.params.gamma / 2.0).sqrt() * det.params.drive() / (laplace_s(w) + det.params.gamma);
            assert!((rel.gw_noise_coeff - g).norm() < 1e-14);
        }
    }

    #[test]
    fn kernel_values() {
        let p = tuned(2.0, Mass::Finite(1.0));
        let k = DerivedCouplings {
            epsilon_q: 0.0,
            epsilon_gw: 0.0,
            m_g: 1.0,
        };
        assert_eq!(backaction_kernels(0.5, &p, &k).unwrap(), (0.0, 0.0));
        // Omega = gamma: K_pd = eps_q / gamma^3, K_GW = b.
        let k = DerivedCouplings {
            epsilon_q: 5.0,
            epsilon_gw: 0.01,
            m_g: 1.0,
        };
        let (kpd, kgw) = backaction_kernels(2.0, &p, &k).unwrap();
        assert!((kpd - 5.0 / 8.0).abs() < 1e-15);
        assert!((kgw + 0.01).abs() < 1e-17);
        assert!(backaction_kernels(0.0, &p, &k).is_err());
    }

    #[test]
    fn gw_kernel_extremum_at_gamma() {
        let p = tuned(1.7, Mass::Infinite);
        let k = DerivedCouplings {
            epsilon_q: 0.0,
            epsilon_gw: 0.03,
            m_g: 1.0,
        };
        let at = |w: f64| backaction_kernels(w, &p, &k).unwrap().1;
        let peak = at(1.7);
        assert!((peak + 0.03).abs() < 1e-15);
        for w in [0.5, 1.0, 1.69, 1.71, 3.0, 10.0] {
            assert!(at(w) > peak);
        }
    }

    #[test]
    fn ellipse_values() {
        let e = squeeze_params(0.0).unwrap();
        assert_eq!((e.r, e.theta), (0.0, 0.0));
        assert!((e.phi - PI / 4.0).abs() < 1e-16);
        let e = squeeze_params(2.0).unwrap();
        assert!((e.r - 0.881_373_587_019_543).abs() < 1e-15);
        assert!((e.theta - PI / 4.0).abs() < 1e-16);
        assert!((e.phi - PI / 8.0).abs() < 1e-16);
        assert!(matches!(squeeze_params(-1.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn vacuum_and_amplitude_spectra() {
        let det = det_with(tuned(1.0, Mass::Infinite), 0.0, 0.0);
        for zeta in [0.0, 0.4, 1.5] {
            assert!((homodyne_density(&relation(&det, 0.8), zeta, true) - 0.5).abs() < 1e-15);
        }
        let det = det_with(tuned(1.0, Mass::Finite(1.0)), 2.3, 0.0);
        assert!((homodyne_density(&relation(&det, 0.8), 0.0, true) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn phase_readout_with_kpd_two() {
        // Pick eps_q so that K_pd = 2 at Omega = gamma = 1.
        let det = det_with(tuned(1.0, Mass::Finite(1.0)), 2.0, 0.0);
        let rel = relation(&det, 1.0);
        assert!((rel.k_pd - 2.0).abs() < 1e-15);
        assert!((homodyne_density(&rel, FRAC_PI_2, true) / 0.5 - 5.0).abs() < 1e-13);
    }

    #[test]
    fn gw_excess_equals_kernel() {
        let det = det_with(tuned(1.0, Mass::Infinite), 0.0, 0.01);
        for w in [0.2, 1.0, 3.0] {
            let rel = relation(&det, w);
            let excess = homodyne_density(&rel, FRAC_PI_2, true) - homodyne_density(&rel, FRAC_PI_2, false);
            assert!((excess - rel.k_gw.abs()).abs() < 1e-15);
        }
    }

    #[test]
    fn qcrb_scaling_and_vacuum_oracle() {
        let consts = PhysicalConstants {
            g: 1.0,
            c: 1.0,
            hbar: 0.3,
        };
        let p = tuned(1.4, Mass::Infinite);
        let k = DerivedCouplings {
            epsilon_q: 0.0,
            epsilon_gw: 0.0,
            m_g: 1.0,
        };
        for w in [-2.0, -0.1, 0.1, 2.0] {
            let sol = solve_tuned(laplace_s(w), &p, &k).unwrap();
            let s1 = alpha1_density(&sol, 0.0, true) * consts.hbar;
            let oracle = (c((2.0 * p.gamma).sqrt(), 0.0) / c(p.gamma, -w)).norm_sqr() * consts.hbar / 2.0;
            assert!((s1 / oracle - 1.0).abs() < 1e-14);
            let b1 = qcrb_bound(&p, &consts, s1).unwrap();
            let p2 = SystemParams {
                alpha_bar: 2.0 * p.alpha_bar,
                ..p
            };
            let b2 = qcrb_bound(&p2, &consts, s1).unwrap();
            assert!((b1 / b2 - 4.0).abs() < 1e-14);
            let sneg = alpha1_density(&solve_tuned(laplace_s(-w), &p, &k).unwrap(), 0.0, true) * consts.hbar;
            assert!((qcrb_bound(&p, &consts, sneg).unwrap() / b1 - 1.0).abs() < 1e-14);
        }
        assert!(qcrb_bound(&p, &consts, 0.0).is_err());
    }

    fn covariance_from_map(rel: &OutputRelation) -> [[f64; 2]; 2] {
        // Symmetrized covariance Re(T T^dagger) in vacuum units.
        let t = rel.optical();
        let mut v = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                v[a][b] = (t[a][0] * t[b][0].conj() + t[a][1] * t[b][1].conj()).re;
            }
        }
        v
    }

    #[test]
    fn ellipse_reproduces_output_covariance() {
        let gamma = 1.0;
        let w = 0.7;
        for kpd in [0.0, 0.1, 1.0, 2.0, 10.0] {
            let eq = kpd * w * w * (gamma * gamma + w * w) / (2.0 * gamma);
            let m = if kpd == 0.0 { Mass::Infinite } else { Mass::Finite(1.0) };
            let det = det_with(tuned(gamma, m), eq, 0.0);
            let rel = relation(&det, w);
            let direct = covariance_from_map(&rel);
            let e = squeeze_params(rel.k_pd).unwrap();
            let v = e.covariance();
            for a in 0..2 {
                for b in 0..2 {
                    assert!((v[a][b] - direct[a][b]).abs() < 1e-10 * (1.0 + kpd * kpd), "{kpd}");
                }
            }
            let t = e.transfer();
            let want = [[1.0, 0.0], [-rel.k_pd, 1.0]];
            for a in 0..2 {
                for b in 0..2 {
                    assert!((t[a][b] - want[a][b]).abs() < 1e-12 * (1.0 + kpd));
                }
            }
            assert!((optical_determinant(&rel).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gw_channel_restores_output_algebra() {
        let det = det_with(tuned(1.0, Mass::Finite(1.0)), 0.4, 0.02);
        for w in [0.1, 1.0, 4.0] {
            let rel = relation(&det, w);
            let open = rel.commutator_matrix(false);
            assert!((open[1][1] - c(2.0 * rel.k_gw, 0.0)).norm() < 1e-14);
            let closed = rel.commutator_matrix(true);
            let canon = [[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(0.0, 0.0)]];
            for a in 0..2 {
                for b in 0..2 {
                    assert!((closed[a][b] - canon[a][b]).norm() < 1e-13, "{a}{b} {}", closed[a][b]);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn ellipse_matches_spectrum_sweep(kpd in 0.0..20.0f64, zeta in -3.2..3.2f64) {
            let gamma = 1.0;
            let w = 1.3;
            let eq = kpd * w * w * (gamma * gamma + w * w) / (2.0 * gamma);
            let det = det_with(tuned(gamma, Mass::Finite(1.0)), eq, 0.0);
            let rel = relation(&det, w);
            let v = squeeze_params(rel.k_pd).unwrap().covariance();
            let (s, c) = zeta.sin_cos();
            let from_ellipse = 0.5 * (c * c * v[0][0] + 2.0 * s * c * v[0][1] + s * s * v[1][1]);
            let direct = homodyne_density(&rel, zeta, false);
            prop_assert!((from_ellipse - direct).abs() <= 1e-10 * direct);
        }

        #[test]
        fn symplectic_without_gw(w in 0.01..50.0f64, eq in 0.0..10.0f64, g in 0.1..5.0f64) {
            let det = det_with(tuned(g, Mass::Finite(1.0)), eq, 0.0);
            let rel = relation(&det, w);
            prop_assert!((optical_determinant(&rel).norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn spectra_even_and_positive(w in 0.01..20.0f64, eq in 0.0..5.0f64, e in 0.0..0.05f64, zeta in 0.0..3.2f64) {
            let det = det_with(tuned(1.0, Mass::Finite(1.0)), eq, e);
            let a = homodyne_density(&relation(&det, w), zeta, true);
            let b = homodyne_density(&relation(&det, -w), zeta, true);
            prop_assert!(a > 0.0);
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn gw_kernel_sign(w in -50.0..50.0f64, e in 0.0..1.0f64) {
            let p = tuned(1.0, Mass::Infinite);
            let k = DerivedCouplings { epsilon_q: 0.0, epsilon_gw: e, m_g: 1.0 };
            let (kpd, kgw) = backaction_kernels(w, &p, &k).unwrap();
            prop_assert!(kpd >= 0.0);
            prop_assert!(kgw * w.signum() <= 0.0);
        }
    }
}
