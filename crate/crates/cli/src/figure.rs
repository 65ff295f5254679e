//! Figure data: EPI and EPNI bound columns over a photon grid.

use std::f64::consts::{E, PI};
use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use bcw_core::bounds::{bound_curve, linear_grid, ChannelParams, Method};
use bcw_core::exec::Execution;

pub const COLUMNS: &str =
    "N,epi_lower,epi_lower_clamped,epi_upper,epi_gap_bound,epni_lower,epni_lower_clamped,epni_upper,epni_gap_bound";

/// Default plot range; the figures do not state theirs.
pub const DEFAULT_GRID: (f64, f64, f64) = (0.0, 20.0, 0.1);

/// Parameters of a named figure.
pub fn figure_params(name: &str) -> Result<(ChannelParams, String)> {
    match name {
        "fig1" => Ok((
            ChannelParams::attenuator(0.75, 2.0, 0.91),
            "attenuator lambda=0.75 N_E=2 S_E=0.91".into(),
        )),
        "fig2" => Ok((
            ChannelParams::classical_noise(1.0, 2.0, 15.1f64.ln()),
            "classical-noise t=1 E_f=2 H_f=ln(15.1)".into(),
        )),
        other => bail!("unknown figure {other:?} (expected fig1 or fig2)"),
    }
}

/// CSV text for a figure on the default grid.
pub fn figure_csv(name: &str, exec: Execution) -> Result<String> {
    let (params, desc) = figure_params(name)?;
    let (start, stop, step) = DEFAULT_GRID;
    let grid = linear_grid(start, stop, step)?;
    let epi = bound_curve(&params, &grid, Method::Epi, exec)?;
    let epni = bound_curve(&params, &grid, Method::Epni, exec)?;

    let mut out = String::new();
    writeln!(out, "# bcw {} figure {name}", env!("CARGO_PKG_VERSION"))?;
    writeln!(out, "# spec: {desc}")?;
    match params {
        ChannelParams::Attenuator { env, .. } => {
            writeln!(out, "# check: S_E = {} < g(N_E) passed", env.entropy)?;
        }
        ChannelParams::ClassicalNoise { noise, .. } => {
            writeln!(
                out,
                "# check: e^H_f = {} <= pi e E_f = {} passed",
                noise.entropy.exp(),
                PI * E * noise.energy
            )?;
        }
    }
    writeln!(out, "# grid: N from {start} to {stop} step {step} (default range)")?;
    writeln!(out, "# method: epi and epni; lower bounds raw and clamped at 0")?;
    writeln!(out, "# units: nats")?;
    writeln!(out, "{COLUMNS}")?;
    for (a, b) in epi.iter().zip(&epni) {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            a.n, a.lower, a.lower_clamped, a.upper, a.gap_bound, b.lower, b.lower_clamped, b.upper, b.gap_bound
        )?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureRow {
    pub n: f64,
    /// `[lower, lower_clamped, upper, gap_bound]`
    pub epi: [f64; 4],
    pub epni: [f64; 4],
}

/// Reads [`figure_csv`] output back.
pub fn parse_figure_csv(text: &str) -> Result<Vec<FigureRow>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    if lines.next() != Some(COLUMNS) {
        bail!("not a figure CSV");
    }
    lines
        .map(|l| {
            let v: Vec<f64> = l
                .split(',')
                .map(|x| x.parse::<f64>().with_context(|| format!("bad value {x:?}")))
                .collect::<Result<_>>()?;
            if v.len() != 9 {
                bail!("expected 9 columns in {l:?}");
            }
            Ok(FigureRow {
                n: v[0],
                epi: [v[1], v[2], v[3], v[4]],
                epni: [v[5], v[6], v[7], v[8]],
            })
        })
        .collect()
}
