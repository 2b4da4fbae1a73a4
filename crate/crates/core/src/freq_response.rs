//! Laplace-domain cavity response: transfer coefficients from every input
//! channel to the intracavity quadratures.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DerivedCouplings, Detector, SystemParams};

/// Input channels, in column order of [`QuadratureSolution::coeffs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Alpha1In = 0,
    Alpha2In = 1,
    Signal = 2,
    GwNoise = 3,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Alpha1In, Channel::Alpha2In, Channel::Signal, Channel::GwNoise];

    pub fn label(&self) -> &'static str {
        match self {
            Channel::Alpha1In => "a1in",
            Channel::Alpha2In => "a2in",
            Channel::Signal => "hs",
            Channel::GwNoise => "hin",
        }
    }
}

/// Laplace variable for a real angular frequency.
pub fn laplace_s(omega: f64) -> Complex64 {
    Complex64::new(0.0, -omega)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyGrid {
    points: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::validation("grid", "no frequency points"));
        }
        if points.iter().any(|w| !w.is_finite()) {
            return Err(Error::validation("grid", "frequencies must be finite"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation("grid", "frequencies must be strictly increasing"));
        }
        Ok(Self { points })
    }

    pub fn linear(min: f64, max: f64, count: usize) -> Result<Self> {
        if count == 1 {
            return Self::new(vec![min]);
        }
        if count == 0 || max <= min {
            return Err(Error::validation("grid", "need count >= 1 and max > min"));
        }
        let step = (max - min) / (count - 1) as f64;
        Self::new((0..count).map(|i| min + step * i as f64).collect())
    }

    pub fn log(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min > 0.0) {
            return Err(Error::validation("grid.min", "log spacing needs min > 0"));
        }
        if count == 1 {
            return Self::new(vec![min]);
        }
        if count == 0 || max <= min {
            return Err(Error::validation("grid", "need count >= 1 and max > min"));
        }
        let (a, b) = (min.ln(), max.ln());
        let step = (b - a) / (count - 1) as f64;
        let mut pts: Vec<f64> = (0..count).map(|i| (a + step * i as f64).exp()).collect();
        pts[0] = min;
        pts[count - 1] = max;
        Self::new(pts)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Coefficients `coeffs[out][channel]` for out in {alpha1, alpha2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSolution {
    pub s: Complex64,
    pub coeffs: [[Complex64; 4]; 2],
}

impl QuadratureSolution {
    pub fn get(&self, out: usize, ch: Channel) -> Complex64 {
        self.coeffs[out][ch as usize]
    }

    fn checked(self, operation: &str) -> Result<Self> {
        if self.coeffs.iter().flatten().all(|c| c.is_finite()) {
            Ok(self)
        } else {
            Err(Error::singularity(operation, format!("s = {}", self.s)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponsePair {
    pub chi1: Complex64,
    pub chi2: Complex64,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn pole_error(operation: &str, s: Complex64) -> Error {
    Error::singularity(operation, format!("pole at s = {s}"))
}

pub fn solve_tuned(s: Complex64, params: &SystemParams, couplings: &DerivedCouplings) -> Result<QuadratureSolution> {
    const OP: &str = "solve_tuned";
    if !params.is_tuned() {
        return Err(Error::unsupported(OP, "Delta != 0; use the detuned solver"));
    }
    if couplings.epsilon_q != 0.0 && s == zero() {
        return Err(pole_error(OP, s));
    }
    let sg = s + params.gamma;
    if sg == zero() {
        return Err(pole_error(OP, s));
    }
    let root = (2.0 * params.gamma).sqrt();
    let lam = 0.5 * params.drive();
    let b = couplings.backaction(s);
    let a1 = root / sg;
    let sig = lam / sg;
    QuadratureSolution {
        s,
        coeffs: [[a1, zero(), zero(), zero()], [b * a1 / sg, root / sg, sig, sig]],
    }
    .checked(OP)
}

pub fn chi_responses(s: Complex64, params: &SystemParams, couplings: &DerivedCouplings) -> Result<ResponsePair> {
    let sg = s + params.gamma;
    let d = sg * sg + params.delta * params.delta + couplings.gw_coupling() * params.delta * s;
    if d == zero() {
        return Err(pole_error("chi_responses", s));
    }
    Ok(ResponsePair {
        chi1: sg / d,
        chi2: params.delta / d,
    })
}

pub fn solve_detuned(s: Complex64, params: &SystemParams, couplings: &DerivedCouplings) -> Result<QuadratureSolution> {
    const OP: &str = "solve_detuned";
    if params.is_tuned() {
        return Err(Error::unsupported(OP, "Delta = 0; use the tuned solver"));
    }
    if !params.m.is_infinite() {
        return Err(Error::unsupported(
            OP,
            "finite test mass with Delta != 0 has no closed form; use the general solver",
        ));
    }
    let ResponsePair { chi1, chi2 } = chi_responses(s, params, couplings)?;
    let root = (2.0 * params.gamma).sqrt();
    let lam = 0.5 * params.drive();
    let mix = 1.0 + couplings.gw_coupling() * s / params.delta;
    QuadratureSolution {
        s,
        coeffs: [
            [root * chi1, -root * chi2, -lam * chi2, -lam * chi2],
            [root * mix * chi2, root * chi1, lam * chi1, lam * chi1],
        ],
    }
    .checked(OP)
}

/// Direct 2x2 solve of the cavity equations with the full backaction term.
/// Covers finite mass with detuning, which has no printed closed form.
pub fn general_solve(s: Complex64, params: &SystemParams, couplings: &DerivedCouplings) -> Result<QuadratureSolution> {
    const OP: &str = "general_solve";
    if couplings.epsilon_q != 0.0 && s == zero() {
        return Err(pole_error(OP, s));
    }
    let sg = s + params.gamma;
    let delta = params.delta;
    let lower = delta + couplings.backaction(s);
    let det = sg * sg + delta * lower;
    if det == zero() {
        return Err(pole_error(OP, s));
    }
    let root = (2.0 * params.gamma).sqrt();
    let lam = 0.5 * params.drive();
    let h1 = -lam * delta / det;
    let h2 = lam * sg / det;
    QuadratureSolution {
        s,
        coeffs: [
            [root * sg / det, -root * delta / det, h1, h1],
            [root * lower / det, root * sg / det, h2, h2],
        ],
    }
    .checked(OP)
}

/// Effective damping and detuning `(gamma~, Delta~)`.
pub fn effective_rates(params: &SystemParams, couplings: &DerivedCouplings) -> (f64, f64) {
    let b = couplings.gw_coupling();
    (
        params.gamma + 0.5 * b * params.delta,
        params.delta - 0.5 * b * params.gamma,
    )
}

/// Both roots of `(s+gamma)^2 + Delta^2 + b Delta s`.
pub fn chi_poles(params: &SystemParams, couplings: &DerivedCouplings) -> [Complex64; 2] {
    let p = 2.0 * params.gamma + couplings.gw_coupling() * params.delta;
    let q = params.gamma * params.gamma + params.delta * params.delta;
    let disc = Complex64::new(0.25 * p * p - q, 0.0).sqrt();
    // Larger-magnitude root first, the other from the product of roots.
    let r1 = -0.5 * p - disc;
    let r1 = if r1.norm() >= (-0.5 * p + disc).norm() {
        r1
    } else {
        -0.5 * p + disc
    };
    let r2 = q / r1;
    let mut roots = [r1, r2];
    roots.sort_by(|a, b| a.im.total_cmp(&b.im));
    roots
}

/// A strategy for producing the intracavity transfer coefficients.
pub trait CavitySolver: Send + Sync {
    fn name(&self) -> &'static str;

    /// Checks that the configuration is within this solver's domain.
    fn supports(&self, det: &Detector) -> Result<()>;

    fn solve(&self, s: Complex64, det: &Detector) -> Result<QuadratureSolution>;
}

pub struct TunedSolver;
pub struct DetunedSolver;
pub struct GeneralSolver;

impl CavitySolver for TunedSolver {
    fn name(&self) -> &'static str {
        "tuned"
    }
    fn supports(&self, det: &Detector) -> Result<()> {
        if det.params.is_tuned() {
            Ok(())
        } else {
            Err(Error::unsupported("tuned", "needs delta = 0"))
        }
    }
    fn solve(&self, s: Complex64, det: &Detector) -> Result<QuadratureSolution> {
        solve_tuned(s, &det.params, &det.couplings)
    }
}

impl CavitySolver for DetunedSolver {
    fn name(&self) -> &'static str {
        "detuned"
    }
    fn supports(&self, det: &Detector) -> Result<()> {
        if det.params.is_tuned() || !det.params.m.is_infinite() {
            Err(Error::unsupported("detuned", "needs delta != 0 and m = \"infinite\""))
        } else {
            Ok(())
        }
    }
    fn solve(&self, s: Complex64, det: &Detector) -> Result<QuadratureSolution> {
        solve_detuned(s, &det.params, &det.couplings)
    }
}

impl CavitySolver for GeneralSolver {
    fn name(&self) -> &'static str {
        "general"
    }
    fn supports(&self, _det: &Detector) -> Result<()> {
        Ok(())
    }
    fn solve(&self, s: Complex64, det: &Detector) -> Result<QuadratureSolution> {
        general_solve(s, &det.params, &det.couplings)
    }
}

/// Name-indexed collection of cavity solvers.
pub struct SolverRegistry {
    solvers: Vec<Box<dyn CavitySolver>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        Self { solvers: Vec::new() }
    }

    /// tuned, detuned, general and newtonian.
    pub fn standard() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(TunedSolver));
        reg.register(Box::new(DetunedSolver));
        reg.register(Box::new(GeneralSolver));
        reg.register(Box::new(crate::gauge::NewtonianSolver));
        reg
    }

    /// Adds a solver, replacing any existing one with the same name.
    pub fn register(&mut self, solver: Box<dyn CavitySolver>) {
        self.solvers.retain(|s| s.name() != solver.name());
        self.solvers.push(solver);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.iter().map(|s| s.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn CavitySolver> {
        self.solvers
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
            .ok_or_else(|| {
                Error::validation(
                    "solver",
                    format!("unknown solver \"{name}\" (known: auto, {})", self.names().join(", ")),
                )
            })
    }

    /// Resolves `name` (or "auto") and checks the solver accepts `det`.
    pub fn select(&self, name: &str, det: &Detector) -> Result<&dyn CavitySolver> {
        let solver = if name == "auto" {
            if det.params.is_tuned() {
                self.get("tuned")?
            } else if det.params.m.is_infinite() {
                self.get("detuned")?
            } else {
                return Err(Error::unsupported(
                    "auto solver",
                    "finite m with delta != 0; choose \"general\" explicitly",
                ));
            }
        } else {
            self.get(name)?
        };
        solver.supports(det)?;
        Ok(solver)
    }
}

/// Evaluates a solver on every grid point. Rows keep grid order.
pub fn solve_grid(solver: &dyn CavitySolver, det: &Detector, grid: &FrequencyGrid) -> Result<Vec<QuadratureSolution>> {
    grid.points()
        .par_iter()
        .map(|&w| solver.solve(laplace_s(w), det))
        .collect()
}
