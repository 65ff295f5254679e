//! Inline and file-based channel specifications.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use bcw_core::channels::{EnvironmentStats, NoiseDensity, NoiseStats, StateSpec};
use bcw_core::Complex64;
use serde::{Deserialize, Serialize};

/// Attenuator environment: a simulable state or bare scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvArg {
    State(StateSpec),
    Stats(EnvironmentStats),
}

/// Noise density: a simulable density or bare scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistArg {
    Density(NoiseDensity),
    Stats(NoiseStats),
}

impl EnvArg {
    pub fn stats(&self) -> Result<EnvironmentStats> {
        Ok(match self {
            EnvArg::State(s) => s.stats()?,
            EnvArg::Stats(s) => *s,
        })
    }

    pub fn state(&self) -> Result<&StateSpec> {
        match self {
            EnvArg::State(s) => Ok(s),
            EnvArg::Stats(_) => bail!("a stats environment has no state to simulate; give a state spec"),
        }
    }
}

impl DistArg {
    pub fn stats(&self) -> Result<NoiseStats> {
        Ok(match self {
            DistArg::Density(d) => d.stats()?,
            DistArg::Stats(s) => *s,
        })
    }

    pub fn density(&self) -> Result<&NoiseDensity> {
        match self {
            DistArg::Density(d) => Ok(d),
            DistArg::Stats(_) => bail!("a stats distribution has no density to simulate; give a density spec"),
        }
    }
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().with_context(|| format!("not a number: {x:?}")))
        .collect()
}

fn split(s: &str) -> (&str, &str) {
    s.split_once(':').unwrap_or((s, ""))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {path}"))
}

/// `thermal:N`, `number:n`, `vacuum`, `coherent:re[,im]`, `superposition:c0,c1,...`,
/// `stats:N_E,S_E`, or a path to a JSON file.
pub fn parse_env(s: &str) -> Result<EnvArg> {
    if Path::new(s).is_file() {
        return read_json(s);
    }
    let (kind, rest) = split(s);
    let env = match kind {
        "vacuum" => EnvArg::State(StateSpec::vacuum()),
        "thermal" => EnvArg::State(StateSpec::Thermal {
            mean_photon: rest
                .parse()
                .with_context(|| format!("thermal needs a mean photon number, got {rest:?}"))?,
        }),
        "number" => EnvArg::State(StateSpec::Number {
            n: rest
                .parse()
                .with_context(|| format!("number needs a photon count, got {rest:?}"))?,
        }),
        "coherent" => {
            let v = numbers(rest)?;
            match v[..] {
                [re] => EnvArg::State(StateSpec::Coherent { re, im: 0.0 }),
                [re, im] => EnvArg::State(StateSpec::Coherent { re, im }),
                _ => bail!("coherent takes re[,im]"),
            }
        }
        "superposition" => EnvArg::State(StateSpec::Superposition {
            coefficients: numbers(rest)?.into_iter().map(|c| Complex64::new(c, 0.0)).collect(),
        }),
        "stats" => match numbers(rest)?[..] {
            [mean_photon, entropy] => EnvArg::Stats(EnvironmentStats { mean_photon, entropy }),
            _ => bail!("stats takes N_E,S_E"),
        },
        _ => bail!("unknown environment spec {s:?} (and no such file)"),
    };
    match &env {
        EnvArg::State(st) => st.validate()?,
        EnvArg::Stats(st) => st.validate()?,
    }
    Ok(env)
}

/// `gaussian:iso[:var]`, `gaussian:vq,vp`, `disc:R`, `stats:E,H`, or a path to a JSON file.
pub fn parse_dist(s: &str) -> Result<DistArg> {
    if Path::new(s).is_file() {
        return read_json(s);
    }
    let (kind, rest) = split(s);
    let dist = match kind {
        "gaussian" => {
            let (shape, var) = split(rest);
            if shape == "iso" {
                let v = if var.is_empty() { 1.0 } else { var.parse()? };
                DistArg::Density(NoiseDensity::isotropic_gaussian(v))
            } else {
                match numbers(rest)?[..] {
                    [vq, vp] => DistArg::Density(NoiseDensity::Gaussian {
                        mean: [0.0, 0.0],
                        cov: [[vq, 0.0], [0.0, vp]],
                    }),
                    _ => bail!("gaussian takes iso[:var] or vq,vp"),
                }
            }
        }
        "disc" | "uniform-disc" => DistArg::Density(NoiseDensity::UniformDisc {
            radius: rest
                .parse()
                .with_context(|| format!("disc needs a radius, got {rest:?}"))?,
        }),
        "stats" => match numbers(rest)?[..] {
            [energy, entropy] => DistArg::Stats(NoiseStats { energy, entropy }),
            _ => bail!("stats takes E_f,H_f"),
        },
        _ => return Err(anyhow!("unknown distribution spec {s:?} (and no such file)")),
    };
    match &dist {
        DistArg::Density(d) => d.validate()?,
        DistArg::Stats(st) => st.validate()?,
    }
    Ok(dist)
}

/// `a`, `a,b,c` or `start:stop:step`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts[..] {
        [start, stop, step] => Ok(bcw_core::bounds::linear_grid(
            start.parse()?,
            stop.parse()?,
            step.parse()?,
        )?),
        [list] => numbers(list),
        _ => bail!("grid must be a value, a comma list or start:stop:step"),
    }
}
