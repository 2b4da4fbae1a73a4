//! Batch commands behind the `gwprobe` binary. Each command yields a table
//! (CSV rows) and, for report-style commands, a structured JSON report.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::commutator::commutator_audit;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::freq_response::{solve_grid, Channel, SolverRegistry};
use crate::gauge::compare_gauges;
use crate::gw_field::{h_input_channel, radiated_field_exact, radiated_field_farzone, stress_energy_source};
use crate::io_noise::{
    alpha1_density, backaction_kernels, homodyne_density, output_relation, qcrb_bound, squeeze_params,
};
use crate::quad::Tolerance;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Couplings,
    Response,
    Spectrum,
    Squeeze,
    Radiate,
    GaugeCheck,
    Commutator,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Couplings,
        Command::Response,
        Command::Spectrum,
        Command::Squeeze,
        Command::Radiate,
        Command::GaugeCheck,
        Command::Commutator,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Couplings => "couplings",
            Command::Response => "response",
            Command::Spectrum => "spectrum",
            Command::Squeeze => "squeeze",
            Command::Radiate => "radiate",
            Command::GaugeCheck => "gauge-check",
            Command::Commutator => "commutator",
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Command::Couplings | Command::GaugeCheck | Command::Commutator => Format::Json,
            _ => Format::Csv,
        }
    }

    pub fn plottable(&self) -> bool {
        matches!(self, Command::Response | Command::Spectrum)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub table: Table,
    pub report: Option<Value>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Output> {
    match cmd {
        Command::Couplings => couplings(cfg),
        Command::Response => response(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Squeeze => squeeze(cfg),
        Command::Radiate => radiate(cfg),
        Command::GaugeCheck => gauge_check(cfg),
        Command::Commutator => commutator(cfg),
    }
}

fn couplings(cfg: &RunConfig) -> Result<Output> {
    let det = cfg.detector()?;
    let c = det.couplings;
    Ok(Output {
        table: Table {
            columns: vec!["epsilon_q [s^-2]".into(), "epsilon_GW [s]".into(), "M_G [kg]".into()],
            rows: vec![vec![c.epsilon_q, c.epsilon_gw, c.m_g]],
        },
        report: Some(to_value(&c)),
    })
}

fn response(cfg: &RunConfig) -> Result<Output> {
    let det = cfg.detector()?;
    let grid = cfg.grid()?;
    let registry = SolverRegistry::standard();
    let solver = registry.select(&cfg.solver, &det)?;
    let sols = solve_grid(solver, &det, &grid)?;
    let mut columns = vec!["omega [rad/s]".to_string()];
    for out in ["a1", "a2"] {
        for ch in Channel::ALL {
            let unit = match ch {
                Channel::Alpha1In | Channel::Alpha2In => "s^1/2",
                Channel::Signal | Channel::GwNoise => "(J s)^1/2",
            };
            columns.push(format!("re_{out}_{} [{unit}]", ch.label()));
            columns.push(format!("im_{out}_{} [{unit}]", ch.label()));
        }
    }
    let rows = grid
        .points()
        .iter()
        .zip(&sols)
        .map(|(&w, sol)| {
            let mut row = vec![w];
            for out in 0..2 {
                for ch in Channel::ALL {
                    let v = sol.get(out, ch);
                    row.push(v.re);
                    row.push(v.im);
                }
            }
            row
        })
        .collect();
    Ok(Output {
        table: Table { columns, rows },
        report: None,
    })
}

fn spectrum(cfg: &RunConfig) -> Result<Output> {
    let det = cfg.detector()?;
    let grid = cfg.grid()?;
    let registry = SolverRegistry::standard();
    let solver = registry.select(&cfg.solver, &det)?;
    let sols = solve_grid(solver, &det, &grid)?;
    let opts = &cfg.spectrum;
    let channel = h_input_channel(&det);
    let tol = cfg.spectrum_tolerance();
    let hbar = det.consts.hbar;

    let rows = grid
        .points()
        .par_iter()
        .zip(sols.par_iter())
        .map(|(&w, sol)| {
            let gim = if opts.include_gw_noise {
                channel.im_response(w, tol)?
            } else {
                0.0
            };
            let rel = output_relation(w, sol, &det, gim)?;
            let mut row = vec![w];
            for &zeta in &opts.homodyne_angles {
                row.push(hbar * homodyne_density(&rel, zeta, opts.include_gw_noise));
            }
            let s_a1 = hbar * alpha1_density(sol, gim, opts.include_gw_noise);
            row.push(s_a1);
            if opts.qcrb {
                row.push(qcrb_bound(&det.params, &det.consts, s_a1)?);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut columns = vec!["omega [rad/s]".to_string()];
    for zeta in &opts.homodyne_angles {
        columns.push(format!("S_out(zeta={zeta:e}) [J s]"));
    }
    columns.push("S_alpha1 [J s^2]".into());
    if opts.qcrb {
        columns.push("S_h_qcrb [1/Hz]".into());
    }
    Ok(Output {
        table: Table { columns, rows },
        report: None,
    })
}

fn squeeze(cfg: &RunConfig) -> Result<Output> {
    let det = cfg.detector()?;
    let grid = cfg.grid()?;
    let rows = grid
        .points()
        .iter()
        .map(|&w| {
            let (k_pd, k_gw) = backaction_kernels(w, &det.params, &det.couplings)?;
            let e = squeeze_params(k_pd)?;
            Ok(vec![w, k_pd, k_gw, e.r, e.theta, e.phi])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Output {
        table: Table {
            columns: [
                "omega [rad/s]",
                "K_pd [1]",
                "K_GW [1]",
                "r [1]",
                "theta [rad]",
                "phi [rad]",
            ]
            .map(String::from)
            .to_vec(),
            rows,
        },
        report: None,
    })
}

fn radiate(cfg: &RunConfig) -> Result<Output> {
    let det = cfg.detector()?;
    let opts = cfg
        .radiate
        .as_ref()
        .ok_or_else(|| Error::validation("radiate", "this command needs a radiate block"))?;
    let unit = Complex64::new(1.0, 0.0);
    let source = stress_energy_source(unit, &det);
    let tol = Tolerance::rel(opts.tolerance);
    let rows = opts
        .points
        .par_iter()
        .map(|&x| {
            let exact = radiated_field_exact(opts.omega, x, unit, &det, tol)?;
            let far = radiated_field_farzone(opts.omega, x, &source, &det)?;
            let mut row = x.to_vec();
            for v in exact.components().iter().chain(far.components().iter()) {
                row.push(v.re);
                row.push(v.im);
            }
            row.push((exact - far).norm() / far.norm());
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut columns: Vec<String> = ["x [m]", "y [m]", "z [m]"].map(String::from).to_vec();
    for kind in ["exact", "far"] {
        for comp in ["xx", "xy", "xz", "yy", "yz", "zz"] {
            columns.push(format!("re_h{comp}_{kind} [(J s)^-1/2]"));
            columns.push(format!("im_h{comp}_{kind} [(J s)^-1/2]"));
        }
    }
    columns.push("rel_diff [1]".into());
    Ok(Output {
        table: Table { columns, rows },
        report: None,
    })
}

fn gauge_check(cfg: &RunConfig) -> Result<Output> {
    let det = cfg.detector()?;
    let report = compare_gauges(&cfg.grid()?, &det)?;
    let rows = report
        .points
        .iter()
        .map(|p| vec![p.omega, p.backaction_deviation, p.transfer_deviation])
        .collect();
    Ok(Output {
        table: Table {
            columns: ["omega [rad/s]", "backaction_deviation [1]", "transfer_deviation [1]"]
                .map(String::from)
                .to_vec(),
            rows,
        },
        report: Some(to_value(&report)),
    })
}

fn commutator(cfg: &RunConfig) -> Result<Output> {
    let det = cfg.detector()?;
    let opts = cfg
        .commutator
        .as_ref()
        .ok_or_else(|| Error::validation("commutator", "this command needs a commutator block"))?;
    let report = commutator_audit(&opts.times, &det, Tolerance::rel(opts.tolerance))?;
    let rows = report
        .points
        .iter()
        .map(|p| {
            vec![
                p.t,
                p.with_gw.value[1],
                p.with_gw.deviation(),
                p.without_gw.value[1],
                p.closed_form[1],
                p.resummed[1],
                p.closed_form_mismatch,
            ]
        })
        .collect();
    Ok(Output {
        table: Table {
            columns: [
                "t [s]",
                "im_with_gw [hbar]",
                "deviation_with_gw [hbar]",
                "im_without_gw [hbar]",
                "im_closed_form [hbar]",
                "im_resummed [hbar]",
                "closed_form_mismatch [hbar]",
            ]
            .map(String::from)
            .to_vec(),
            rows,
        },
        report: Some(to_value(&report)),
    })
}

pub fn render(cmd: Command, cfg: &RunConfig, out: &Output, format: Format) -> Result<String> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::domain("csv output", e.to_string());
            w.write_record(&out.table.columns).map_err(io)?;
            for row in &out.table.rows {
                w.write_record(row.iter().map(|v| format!("{v:e}"))).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::domain("csv output", e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        Format::Json => {
            let result = out.report.clone().unwrap_or_else(|| to_value(&out.table));
            let doc = json!({
                "engine": "gwprobe",
                "version": VERSION,
                "command": cmd.name(),
                "config": cfg,
                "result": result,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("json output");
            s.push('\n');
            Ok(s)
        }
    }
}

/// Log-log SVG of every non-abscissa column against the first.
pub fn plot_svg(table: &Table) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 40.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let log = |v: f64| if v.abs() > 0.0 { Some(v.abs().log10()) } else { None };
    let series: Vec<Vec<(f64, f64)>> = (1..table.columns.len())
        .map(|j| {
            table
                .rows
                .iter()
                .filter_map(|r| Some((log(r[0])?, log(r[j])?)))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect()
        })
        .collect();
    let all = series.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut svg = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\">\n");
    svg += &format!(
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    svg += &format!(
        "<text x=\"{PAD}\" y=\"{}\" font-size=\"11\">log10 {}: {x0:.2} .. {x1:.2}; log10 |y|: {y0:.2} .. {y1:.2}</text>\n",
        H - 10.0,
        table.columns[0]
    );
    for (j, pts) in series.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        svg += &format!(
            "<polyline fill=\"none\" stroke=\"{}\" points=\"{}\"><title>{}</title></polyline>\n",
            COLORS[j % COLORS.len()],
            path.join(" "),
            table.columns[j + 1]
        );
    }
    svg += "</svg>\n";
    svg
}
