//! Equal-time commutator of the cavity quadratures, assembled as c-number
//! integrals of the time-domain kernels against the input commutators.
//!
//! Detuned cavity with infinite mass. In the time domain the quadratures obey
//! `a' = M a + sqrt(2 gamma) B a_in + lambda e2 h_in` with
//! `M = [[-gamma, -Delta], [Delta - b gamma, -gamma - b Delta]]` and
//! `B = [[1, 0], [b, 1]]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::freq_response::effective_rates;
use crate::gw_field::{h_input_channel, HInputChannel};
use crate::model::Detector;
use crate::quad::{integrate, Legendre, Tolerance};

/// Sign of the exponent in `1 - e^{2 sigma gamma~ t}`, fixed by comparing with
/// the kernel integral (see `closed_form_exponent_is_decaying`).
pub const EXPONENT_SIGN: f64 = -1.0;

type M2 = [[f64; 2]; 2];

fn mul(a: M2, b: M2) -> M2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn apply(a: M2, v: [f64; 2]) -> [f64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Drift matrix of the detuned cavity and its exponential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Drift {
    pub m: M2,
    pub b: f64,
    pub gamma: f64,
    pub lambda: f64,
}

impl Drift {
    pub fn new(det: &Detector) -> Self {
        let p = &det.params;
        let b = det.couplings.gw_coupling();
        Self {
            m: [[-p.gamma, -p.delta], [p.delta - b * p.gamma, -p.gamma - b * p.delta]],
            b,
            gamma: p.gamma,
            lambda: 0.5 * p.drive(),
        }
    }

    fn half_trace(&self) -> f64 {
        0.5 * (self.m[0][0] + self.m[1][1])
    }

    /// `exp(M u) = e^{h u} [C(u) I + S(u) (M - h I)]` with `h = tr M / 2` and
    /// `q = h^2 - det M` deciding between hyperbolic and circular forms.
    pub fn exp(&self, u: f64) -> M2 {
        let h = self.half_trace();
        let det = self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0];
        let q = h * h - det;
        let z = q * u * u;
        let (c, s) = if z.abs() < 1e-3 {
            (
                1.0 + z / 2.0 + z * z / 24.0 + z * z * z / 720.0,
                u * (1.0 + z / 6.0 + z * z / 120.0 + z * z * z / 5040.0),
            )
        } else if q > 0.0 {
            let r = q.sqrt();
            ((r * u).cosh(), (r * u).sinh() / r)
        } else {
            let r = (-q).sqrt();
            ((r * u).cos(), (r * u).sin() / r)
        };
        let e = (h * u).exp();
        [
            [e * (c + s * (self.m[0][0] - h)), e * s * self.m[0][1]],
            [e * s * self.m[1][0], e * (c + s * (self.m[1][1] - h))],
        ]
    }

    /// `exp(M tau) - exp(-M tau)` without cancellation for small tau.
    pub fn twice_sinh(&self, tau: f64) -> M2 {
        let x = [
            [self.m[0][0] * tau, self.m[0][1] * tau],
            [self.m[1][0] * tau, self.m[1][1] * tau],
        ];
        let size = x.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        if size > 0.1 {
            let a = self.exp(tau);
            let b = self.exp(-tau);
            return [
                [a[0][0] - b[0][0], a[0][1] - b[0][1]],
                [a[1][0] - b[1][0], a[1][1] - b[1][1]],
            ];
        }
        // 2 (X + X^3/3! + ... + X^11/11!)
        let x2 = mul(x, x);
        let mut term = x;
        let mut acc = x;
        for k in 1..6 {
            term = mul(term, x2);
            let f = 1.0 / ((2 * k) as f64 * (2 * k + 1) as f64);
            term = [[term[0][0] * f, term[0][1] * f], [term[1][0] * f, term[1][1] * f]];
            for i in 0..2 {
                for j in 0..2 {
                    acc[i][j] += term[i][j];
                }
            }
        }
        [[2.0 * acc[0][0], 2.0 * acc[0][1]], [2.0 * acc[1][0], 2.0 * acc[1][1]]]
    }

    /// `exp(M v) e2`, the response to a unit GW drive.
    fn gw_column(&self, v: f64) -> [f64; 2] {
        let e = self.exp(v);
        [e[0][1], e[1][1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quadrature {
    Amplitude,
    Phase,
}

impl Quadrature {
    fn index(&self) -> usize {
        match self {
            Quadrature::Amplitude => 0,
            Quadrature::Phase => 1,
        }
    }
}

/// Kernels of one quadrature at time `t` over the input channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorExpansion {
    pub t: f64,
    pub quadrature: Quadrature,
    pub drift: Drift,
    pub include_gw: bool,
}

impl OperatorExpansion {
    /// Coefficients of the initial quadratures a1(0), a2(0).
    pub fn initial(&self) -> [f64; 2] {
        self.drift.exp(self.t)[self.quadrature.index()]
    }

    /// Kernel over (a1_in(tp), a2_in(tp)); zero outside `[0, t]`.
    pub fn optical(&self, tp: f64) -> [f64; 2] {
        if tp < 0.0 || tp > self.t {
            return [0.0, 0.0];
        }
        let d = &self.drift;
        let row = d.exp(self.t - tp)[self.quadrature.index()];
        let root = (2.0 * d.gamma).sqrt();
        [root * (row[0] + d.b * row[1]), root * row[1]]
    }

    /// Kernel over h_in(tp); zero outside `[0, t]` or when GW noise is excluded.
    pub fn gw(&self, tp: f64) -> f64 {
        if !self.include_gw || tp < 0.0 || tp > self.t {
            return 0.0;
        }
        self.drift.lambda * self.drift.gw_column(self.t - tp)[self.quadrature.index()]
    }
}

fn check_domain(det: &Detector, t: f64, operation: &str) -> Result<()> {
    if det.params.is_tuned() || !det.params.m.is_infinite() {
        return Err(Error::unsupported(
            operation,
            "needs a detuned cavity (delta != 0) with m = \"infinite\"",
        ));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::validation("t", format!("must be finite and >= 0, got {t}")));
    }
    Ok(())
}

pub fn time_kernels(t: f64, det: &Detector, include_gw: bool) -> Result<(OperatorExpansion, OperatorExpansion)> {
    check_domain(det, t, "time_kernels")?;
    let drift = Drift::new(det);
    let mk = |quadrature| OperatorExpansion {
        t,
        quadrature,
        drift,
        include_gw,
    };
    Ok((mk(Quadrature::Amplitude), mk(Quadrature::Phase)))
}

/// Contributions to `[a1(t), a2(t)] / (i hbar)` by source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelBreakdown {
    pub initial: f64,
    pub optical: f64,
    pub gw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorResult {
    pub t: f64,
    /// `[a1(t), a2(t)]` in units of hbar.
    pub value: [f64; 2],
    pub breakdown: ChannelBreakdown,
    pub include_gw: bool,
}

impl CommutatorResult {
    /// `|[a1, a2] - i hbar| / hbar`.
    pub fn deviation(&self) -> f64 {
        self.value[0].hypot(self.value[1] - 1.0)
    }
}

fn gw_channel(t: f64, drift: &Drift, channel: &HInputChannel, tol: Tolerance) -> Result<f64> {
    let tmax = channel.support();
    let gl = Legendre::new(8);
    let g = |v: f64| drift.gw_column(v);
    // int_0^t int_0^t g1(v) g2(v') c(v - v') dv dv', organised by tau = v - v' > 0.
    let inner = |tau: f64| -> Result<f64> {
        if tau >= t {
            return Ok(0.0);
        }
        if 2.0 * tau > t {
            let a = gl.integrate(0.0, t - tau, |v| g(v + tau)[0] * g(v)[1]);
            let b = gl.integrate(tau, t, |w| g(w - tau)[0] * g(w)[1]);
            return Ok(a - b);
        }
        let w = drift.twice_sinh(tau);
        let w = [w[0][1], w[1][1]];
        let middle = integrate(
            "commutator (GW channel)",
            |v: f64| g(v)[1] * apply(drift.exp(v), w)[0],
            tau,
            t - tau,
            Tolerance::rel(tol.rel * 1e-2),
        )?;
        let head = gl.integrate(0.0, tau, |v| g(v + tau)[0] * g(v)[1]);
        let tail = gl.integrate(t - tau, t, |w| g(w - tau)[0] * g(w)[1]);
        Ok(middle + head - tail)
    };
    let ctol = Tolerance::rel(tol.rel * 1e-2);
    let mut failure = None;
    let total = integrate(
        "commutator (GW channel)",
        |x: f64| {
            let tau = x * tmax;
            match (channel.commutator(tau, ctol), inner(tau)) {
                (Ok(c), Ok(i)) => c * i * tmax,
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        1.0,
        // values are O(hbar); an absolute floor keeps a small GW share from over-refining
        tol.with_abs(tol.rel * 1e-2 / (drift.lambda * drift.lambda)),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(drift.lambda * drift.lambda * total)
}

pub fn equal_time_commutator(t: f64, det: &Detector, include_gw: bool, tol: Tolerance) -> Result<CommutatorResult> {
    let (k1, k2) = time_kernels(t, det, include_gw)?;
    let n1 = k1.initial();
    let n2 = k2.initial();
    let initial = n1[0] * n2[1] - n1[1] * n2[0];
    let optical = if t == 0.0 {
        0.0
    } else {
        integrate(
            "commutator (optical channel)",
            |tp: f64| {
                let a = k1.optical(tp);
                let b = k2.optical(tp);
                a[0] * b[1] - a[1] * b[0]
            },
            0.0,
            t,
            Tolerance::rel(tol.rel * 1e-2),
        )?
    };
    let gw = if include_gw && t > 0.0 {
        gw_channel(t, &k1.drift, &h_input_channel(det), tol)?
    } else {
        0.0
    };
    Ok(CommutatorResult {
        t,
        value: [0.0, initial + optical + gw],
        breakdown: ChannelBreakdown { initial, optical, gw },
        include_gw,
    })
}

/// `[a1(t), a2(t)]` (units of hbar, as [re, im]) when GW noise is left out,
/// to first order in the coupling: `i[1 - (b Delta / 2 gamma)(1 - e^{2 sigma gamma~ t})]`.
pub fn wrong_commutator_closed_form(t: f64, det: &Detector) -> [f64; 2] {
    let p = &det.params;
    let b = det.couplings.gw_coupling();
    let (g_eff, _) = effective_rates(p, &det.couplings);
    let decay = (EXPONENT_SIGN * 2.0 * g_eff * t).exp();
    [0.0, 1.0 - b * p.delta / (2.0 * p.gamma) * (1.0 - decay)]
}

/// All-orders form `i[gamma/gamma~ + (1 - gamma/gamma~) e^{-2 gamma~ t}]`.
pub fn wrong_commutator_resummed(t: f64, det: &Detector) -> [f64; 2] {
    let (g_eff, _) = effective_rates(&det.params, &det.couplings);
    let ratio = det.params.gamma / g_eff;
    [0.0, ratio + (1.0 - ratio) * (-2.0 * g_eff * t).exp()]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditPoint {
    pub t: f64,
    pub with_gw: CommutatorResult,
    pub without_gw: CommutatorResult,
    pub closed_form: [f64; 2],
    pub resummed: [f64; 2],
    /// `|without_gw - closed_form| / hbar`
    pub closed_form_mismatch: f64,
    /// `|without_gw - resummed| / hbar`
    pub resummed_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub exponent_sign: f64,
    pub points: Vec<AuditPoint>,
    pub max_deviation_with_gw: f64,
    pub max_closed_form_mismatch: f64,
}

pub fn commutator_audit(times: &[f64], det: &Detector, tol: Tolerance) -> Result<AuditReport> {
    let points = times
        .par_iter()
        .map(|&t| {
            let with_gw = equal_time_commutator(t, det, true, tol)?;
            let without_gw = equal_time_commutator(t, det, false, tol)?;
            let closed_form = wrong_commutator_closed_form(t, det);
            let resummed = wrong_commutator_resummed(t, det);
            Ok(AuditPoint {
                t,
                with_gw,
                without_gw,
                closed_form,
                resummed,
                closed_form_mismatch: (without_gw.value[1] - closed_form[1]).abs(),
                resummed_mismatch: (without_gw.value[1] - resummed[1]).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AuditReport {
        exponent_sign: EXPONENT_SIGN,
        max_deviation_with_gw: points.iter().map(|p| p.with_gw.deviation()).fold(0.0, f64::max),
        max_closed_form_mismatch: points.iter().map(|p| p.closed_form_mismatch).fold(0.0, f64::max),
        points,
    })
}
