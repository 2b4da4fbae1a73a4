//! Newtonian-gauge description: the radiation-reaction force corrects the
//! test-mass susceptibility, and no GW field couples to the light.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freq_response::{laplace_s, CavitySolver, FrequencyGrid, QuadratureSolution, SolverRegistry};
use crate::io_noise::input_output;
use crate::model::{Detector, Mass, PhysicalConstants, SystemParams};

/// `8 G m L^2 / (15 c^5)`, the coefficient of the fifth derivative in the reaction force.
pub fn radiation_reaction_coefficient(m: f64, length: f64, consts: &PhysicalConstants) -> f64 {
    8.0 * consts.g / (15.0 * consts.c.powi(5)) * m * length * length
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassSusceptibility {
    pub chi0: Complex64,
    pub delta_chi: Complex64,
}

pub fn mass_susceptibility(omega: f64, m: Mass, length: f64, consts: &PhysicalConstants) -> Result<MassSusceptibility> {
    if omega == 0.0 {
        return Err(Error::singularity("mass_susceptibility", "Omega = 0"));
    }
    let chi0 = match m {
        Mass::Finite(m) => -1.0 / (m * omega * omega),
        Mass::Infinite => 0.0,
    };
    // The inertial mass of chi0 cancels the mass in the reaction force.
    let k = 8.0 * consts.g / (15.0 * consts.c.powi(5));
    Ok(MassSusceptibility {
        chi0: Complex64::new(chi0, 0.0),
        delta_chi: Complex64::new(0.0, k * length * length * omega),
    })
}

/// Same correction assembled before the mass cancels: `-i C Omega^3 chi0`.
pub fn delta_chi_unsimplified(omega: f64, m: f64, length: f64, consts: &PhysicalConstants) -> Complex64 {
    let chi0 = -1.0 / (m * omega * omega);
    Complex64::new(
        0.0,
        -radiation_reaction_coefficient(m, length, consts) * omega.powi(3) * chi0,
    )
}

pub fn newtonian_cavity_solution(
    omega: f64,
    params: &SystemParams,
    consts: &PhysicalConstants,
) -> Result<QuadratureSolution> {
    let sus = mass_susceptibility(omega, params.m, params.length, consts)?;
    let scale = (params.drive() / params.length).powi(2);
    let s = laplace_s(omega);
    let diag = s + params.gamma;
    let lower = params.delta + scale * (sus.chi0 + sus.delta_chi);
    let det = diag * diag + params.delta * lower;
    if det == Complex64::new(0.0, 0.0) {
        return Err(Error::singularity(
            "newtonian_cavity_solution",
            format!("pole at Omega = {omega}"),
        ));
    }
    let root = (2.0 * params.gamma).sqrt();
    let zero = Complex64::new(0.0, 0.0);
    let sol = QuadratureSolution {
        s,
        coeffs: [
            [root * diag / det, -root * params.delta / det, zero, zero],
            [root * lower / det, root * diag / det, zero, zero],
        ],
    };
    if sol.coeffs.iter().flatten().all(|c| c.is_finite()) {
        Ok(sol)
    } else {
        Err(Error::singularity(
            "newtonian_cavity_solution",
            format!("Omega = {omega}"),
        ))
    }
}

/// Newtonian-gauge solver. Works on the real-frequency axis only.
pub struct NewtonianSolver;

impl CavitySolver for NewtonianSolver {
    fn name(&self) -> &'static str {
        "newtonian"
    }

    fn supports(&self, _det: &Detector) -> Result<()> {
        Ok(())
    }

    fn solve(&self, s: Complex64, det: &Detector) -> Result<QuadratureSolution> {
        if s.re != 0.0 {
            return Err(Error::unsupported("newtonian", "needs s on the imaginary axis"));
        }
        newtonian_cavity_solution(-s.im, &det.params, &det.consts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaugePoint {
    pub omega: f64,
    pub newtonian_term: Complex64,
    pub tt_term: Complex64,
    pub backaction_deviation: f64,
    pub transfer_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeReport {
    pub tt_solver: String,
    pub points: Vec<GaugePoint>,
    pub max_backaction_deviation: f64,
    pub max_transfer_deviation: f64,
}

fn relative(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

fn compare_point(omega: f64, det: &Detector, tt: &dyn CavitySolver) -> Result<GaugePoint> {
    let p = &det.params;
    let s = laplace_s(omega);
    let sus = mass_susceptibility(omega, p.m, p.length, &det.consts)?;
    let newtonian_term = (p.drive() / p.length).powi(2) * sus.delta_chi / (p.gamma - Complex64::new(0.0, omega));
    let tt_term = det.couplings.gw_coupling() * s / (s + p.gamma);

    let nt = input_output(&newtonian_cavity_solution(omega, p, &det.consts)?, p);
    let ts = input_output(&tt.solve(s, det)?, p);
    let mut scale: f64 = 0.0;
    let mut diff: f64 = 0.0;
    for j in 0..2 {
        for ch in 0..2 {
            scale = scale.max(ts[j][ch].norm());
            diff = diff.max((nt[j][ch] - ts[j][ch]).norm());
        }
    }
    Ok(GaugePoint {
        omega,
        newtonian_term,
        tt_term,
        backaction_deviation: relative(newtonian_term, tt_term),
        transfer_deviation: if scale == 0.0 { diff } else { diff / scale },
    })
}

/// Compares the two gauges on every grid point: the backaction term alone and
/// the optical output transfer coefficients.
pub fn compare_gauges(grid: &FrequencyGrid, det: &Detector) -> Result<GaugeReport> {
    let registry = SolverRegistry::standard();
    let tt = if !det.params.is_tuned() && !det.params.m.is_infinite() {
        registry.get("general")?
    } else {
        registry.select("auto", det)?
    };
    let points = grid
        .points()
        .par_iter()
        .map(|&w| compare_point(w, det, tt))
        .collect::<Result<Vec<_>>>()?;
    let max_backaction_deviation = points.iter().map(|p| p.backaction_deviation).fold(0.0, f64::max);
    let max_transfer_deviation = points.iter().map(|p| p.transfer_deviation).fold(0.0, f64::max);
    Ok(GaugeReport {
        tt_solver: tt.name().to_string(),
        points,
        max_backaction_deviation,
        max_transfer_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freq_response::solve_tuned;
    use crate::io_noise::backaction_kernels;

    fn consts() -> PhysicalConstants {
        PhysicalConstants {
            g: 0.3,
            c: 1.2,
            hbar: 1.0,
        }
    }

    fn params(delta: f64, m: Mass) -> SystemParams {
        SystemParams {
            omega0: 2.0,
            alpha_bar: 0.6,
            gamma: 1.0,
            delta,
            m,
            length: 0.8,
        }
    }

    #[test]
    fn coefficient_scaling() {
        let k = consts();
        let base = radiation_reaction_coefficient(1.0, 1.0, &k);
        assert!((radiation_reaction_coefficient(2.0, 1.0, &k) / base - 2.0).abs() < 1e-15);
        assert!((radiation_reaction_coefficient(1.0, 2.0, &k) / base - 4.0).abs() < 1e-15);
    }

    #[test]
    fn coefficient_si_value() {
        let k = PhysicalConstants::codata();
        // 8 * 6.6743e-11 * 40 * 4000^2 / (15 * c^5)
        let c5 = 2.421_606_170_851_220_8e42;
        let want = 8.0 * 6.674_30e-11 * 40.0 * 1.6e7 / (15.0 * c5);
        let got = radiation_reaction_coefficient(40.0, 4000.0, &k);
        assert!((got / want - 1.0).abs() < 1e-13);
        assert!((got / 9.41e-45 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn coefficient_reproduces_epsilon_gw() {
        let p = params(0.0, Mass::Finite(3.0));
        let det = Detector::new(p, consts()).unwrap();
        let coef = radiation_reaction_coefficient(3.0, p.length, &det.consts);
        let via = coef * p.drive().powi(2) / (3.0 * p.length * p.length);
        assert!((via / det.couplings.epsilon_gw - 1.0).abs() < 1e-14);
    }

    #[test]
    fn susceptibility_structure() {
        let k = consts();
        let a = mass_susceptibility(0.7, Mass::Finite(1.0), 0.8, &k).unwrap();
        let b = mass_susceptibility(0.7, Mass::Finite(1e6), 0.8, &k).unwrap();
        assert_eq!(a.delta_chi, b.delta_chi);
        assert!(a.chi0.re < 0.0 && a.chi0.im == 0.0);
        assert!(a.delta_chi.re == 0.0);
        let c = mass_susceptibility(1.4, Mass::Finite(1.0), 0.8, &k).unwrap();
        assert!((c.delta_chi / a.delta_chi - 2.0).norm() < 1e-15);
        for m in [1.0, 1e3, 1e6] {
            let u = delta_chi_unsimplified(0.7, m, 0.8, &k);
            assert!((u - a.delta_chi).norm() <= 1e-14 * a.delta_chi.norm());
        }
        assert!(mass_susceptibility(0.0, Mass::Finite(1.0), 1.0, &k).is_err());
    }

    #[test]
    fn bare_limit() {
        let k = PhysicalConstants {
            g: 1e-300,
            c: 1.0,
            hbar: 1.0,
        };
        let p = params(0.0, Mass::Infinite);
        let sol = newtonian_cavity_solution(0.5, &p, &k).unwrap();
        let root = 2f64.sqrt();
        let want = root / Complex64::new(1.0, -0.5);
        assert!((sol.coeffs[0][0] - want).norm() < 1e-15);
        assert!((sol.coeffs[1][1] - want).norm() < 1e-15);
        assert!(sol.coeffs[1][0].norm() < 1e-15);
    }

    #[test]
    fn amplitude_free_of_gravity() {
        let p = params(0.0, Mass::Finite(2.0));
        for w in [0.1, 1.0, 9.0] {
            let sol = newtonian_cavity_solution(w, &p, &consts()).unwrap();
            let want = 2f64.sqrt() / Complex64::new(1.0, -w);
            assert!((sol.coeffs[0][0] - want).norm() < 1e-15);
        }
    }

    #[test]
    fn matches_tt_tuned() {
        let p = params(0.0, Mass::Finite(2.0));
        let det = Detector::new(p, consts()).unwrap();
        for w in [0.05, 0.9, 7.0] {
            let nt = newtonian_cavity_solution(w, &p, &det.consts).unwrap();
            let tt = solve_tuned(laplace_s(w), &p, &det.couplings).unwrap();
            let rel = (nt.coeffs[1][0] - tt.coeffs[1][0]).norm() / tt.coeffs[1][0].norm();
            assert!(rel < 1e-10);
        }
    }

    #[test]
    fn identity_at_gamma() {
        let p = params(0.0, Mass::Infinite);
        let det = Detector::new(p, consts()).unwrap();
        let grid = FrequencyGrid::new(vec![p.gamma]).unwrap();
        let report = compare_gauges(&grid, &det).unwrap();
        let pt = report.points[0];
        let i = Complex64::new(0.0, 1.0);
        let want = -det.couplings.epsilon_gw * (-i * p.gamma) / (p.gamma - i * p.gamma);
        assert!((pt.tt_term - want).norm() < 1e-15 * want.norm());
        assert!((pt.newtonian_term - want).norm() < 1e-14 * want.norm());
    }

    #[test]
    fn log_grid_equivalence_and_mass_independence() {
        let grid = FrequencyGrid::log(1e-2, 1e2, 1000).unwrap();
        let mut devs = Vec::new();
        for m in [Mass::Finite(1.0), Mass::Finite(1e3)] {
            let det = Detector::new(params(0.0, m), consts()).unwrap();
            let r = compare_gauges(&grid, &det).unwrap();
            assert!(r.max_transfer_deviation <= 1e-10, "{}", r.max_transfer_deviation);
            assert!(r.max_backaction_deviation <= 1e-10);
            devs.push(r.max_backaction_deviation);
        }
        assert!(devs.iter().all(|d| *d < 1e-12));
        let det = Detector::new(params(0.4, Mass::Infinite), consts()).unwrap();
        let r = compare_gauges(&grid, &det).unwrap();
        assert_eq!(r.tt_solver, "detuned");
        assert!(r.max_transfer_deviation <= 1e-10);
    }

    #[test]
    fn newtonian_gw_kernel() {
        // The imaginary part of the phase-output kernel is K_GW in both gauges.
        let p = params(0.0, Mass::Finite(2.0));
        let det = Detector::new(p, consts()).unwrap();
        for w in [0.3, 1.0, 3.0] {
            let sol = newtonian_cavity_solution(w, &p, &det.consts).unwrap();
            let out = input_output(&sol, &p);
            let beta = (w / p.gamma).atan() + std::f64::consts::FRAC_PI_2;
            let k = -out[1][0] / Complex64::new(0.0, 2.0 * beta).exp();
            let (kpd, kgw) = backaction_kernels(w, &p, &det.couplings).unwrap();
            assert!((k.re - kpd).abs() < 1e-12 * kpd);
            assert!((k.im - kgw).abs() < 1e-12 * kgw.abs());
        }
    }
}
