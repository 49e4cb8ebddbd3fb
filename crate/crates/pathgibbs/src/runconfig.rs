//! Plain-text run configuration.
//!
//! The format is `key = value` lines grouped under `[section]` headers, with
//! `#` comments. Keys are dotted (`potential.lj.a`); the section header
//! supplies the first component. Unknown keys are rejected, parsing then
//! serializing then parsing is the identity, and any key can be overridden
//! by an environment variable `PATHGIBBS_<KEY>` with dots replaced by
//! underscores and uppercased (`PATHGIBBS_POTENTIAL_LJ_A`).

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::geom::SimBox;
use crate::ks::{SampleDomain, SigmaSampler};
use crate::langevin::{ConfiningPotential, LangevinSpec, MarkSampler};
use crate::potential::{PathPairPotential, ScalarPotential, SelfPotential, TailPotential};
use crate::sampler::{MoveMix, SamplerConfig};

pub const ENV_PREFIX: &str = "PATHGIBBS_";

/// Source of the regularity constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CSource {
    Value(f64),
    Estimate,
}

/// The resolved configuration of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dimension: usize,
    pub delta: f64,
    pub n_steps: usize,
    pub seed: u64,

    /// Confining potential of the mark diffusion.
    pub confining_kind: String,
    pub confining_p: f64,

    /// Scalar pair potential.
    pub pair_r: f64,
    pub pair_tail: String,
    pub lj_a: f64,
    pub lj_b: f64,
    pub lj_shifted: bool,
    pub a0: f64,
    /// Zero marks instead of Langevin marks (oracle mode).
    pub zero_marks: bool,

    pub self_kind: String,

    pub beta: f64,
    /// Stability constant;負 values mean "derive from the packing bound".
    pub b_phi: f64,
    pub b_phi_auto: bool,
    pub bbar_phi: f64,
    pub c_source: CSource,

    pub z: f64,
    /// Flattened per-axis bounds `lo1, hi1, lo2, hi2, ...`.
    pub box_bounds: Vec<f64>,
    pub birth: f64,
    pub death: f64,
    pub translate: f64,
    pub mark_resample: f64,
    pub n_sweeps: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub translate_step: f64,

    pub ks_depth: usize,
    pub ks_k_max: usize,
    pub ks_budget: usize,

    pub workers: usize,
    pub out: String,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            dimension: 1,
            delta: 0.5,
            n_steps: 64,
            seed: 0,
            confining_kind: "power".into(),
            confining_p: 3.0,
            pair_r: 1.0,
            pair_tail: "none".into(),
            lj_a: 4.0,
            lj_b: 2.0,
            lj_shifted: false,
            a0: 1.0,
            zero_marks: false,
            self_kind: "zero".into(),
            beta: 1.0,
            b_phi: 0.0,
            b_phi_auto: false,
            bbar_phi: 0.0,
            c_source: CSource::Estimate,
            z: 0.1,
            box_bounds: vec![0.0, 8.0],
            birth: 0.35,
            death: 0.35,
            translate: 0.2,
            mark_resample: 0.1,
            n_sweeps: 200_000,
            burn_in: 20_000,
            thinning: 4,
            translate_step: 0.5,
            ks_depth: 4,
            ks_k_max: 3,
            ks_budget: 64,
            workers: 0,
            out: "out".into(),
        }
    }
}

macro_rules! keys {
    ($($key:literal => $setter:expr, $getter:expr;)*) => {
        pub const KNOWN_KEYS: &[&str] = &[$($key),*];

        impl RunConfig {
            fn set_key(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
                match key {
                    $($key => { let f: fn(&mut RunConfig, &str, usize) -> Result<()> = $setter; f(self, value, line) })*
                    _ => Err(Error::UnknownKey(key.to_string())),
                }
            }

            fn get_key(&self, key: &str) -> String {
                match key {
                    $($key => { let f: fn(&RunConfig) -> String = $getter; f(self) })*
                    _ => unreachable!("get_key called with unknown key"),
                }
            }
        }
    };
}

fn p_usize(v: &str, line: usize) -> Result<usize> {
    v.trim().parse().map_err(|e| Error::ConfigParse {
        line,
        msg: format!("bad integer {v:?}: {e}"),
    })
}
fn p_u64(v: &str, line: usize) -> Result<u64> {
    v.trim().parse().map_err(|e| Error::ConfigParse {
        line,
        msg: format!("bad integer {v:?}: {e}"),
    })
}
fn p_f64(v: &str, line: usize) -> Result<f64> {
    v.trim().parse().map_err(|e| Error::ConfigParse {
        line,
        msg: format!("bad float {v:?}: {e}"),
    })
}
fn p_bool(v: &str, line: usize) -> Result<bool> {
    match v.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::ConfigParse {
            line,
            msg: format!("bad bool {other:?}"),
        }),
    }
}

keys! {
    "dimension" => |c, v, l| { c.dimension = p_usize(v, l)?; Ok(()) }, |c| c.dimension.to_string();
    "delta" => |c, v, l| { c.delta = p_f64(v, l)?; Ok(()) }, |c| c.delta.to_string();
    "n_steps" => |c, v, l| { c.n_steps = p_usize(v, l)?; Ok(()) }, |c| c.n_steps.to_string();
    "seed" => |c, v, l| { c.seed = p_u64(v, l)?; Ok(()) }, |c| c.seed.to_string();
    "potential.kind" => |c, v, _| { c.confining_kind = v.trim().to_string(); Ok(()) }, |c| c.confining_kind.clone();
    "potential.p" => |c, v, l| { c.confining_p = p_f64(v, l)?; Ok(()) }, |c| c.confining_p.to_string();
    "potential.R" => |c, v, l| { c.pair_r = p_f64(v, l)?; Ok(()) }, |c| c.pair_r.to_string();
    "potential.tail" => |c, v, _| { c.pair_tail = v.trim().to_string(); Ok(()) }, |c| c.pair_tail.clone();
    "potential.lj.a" => |c, v, l| { c.lj_a = p_f64(v, l)?; Ok(()) }, |c| c.lj_a.to_string();
    "potential.lj.b" => |c, v, l| { c.lj_b = p_f64(v, l)?; Ok(()) }, |c| c.lj_b.to_string();
    "potential.shifted" => |c, v, l| { c.lj_shifted = p_bool(v, l)?; Ok(()) }, |c| c.lj_shifted.to_string();
    "potential.a0" => |c, v, l| { c.a0 = p_f64(v, l)?; Ok(()) }, |c| c.a0.to_string();
    "potential.zero_marks" => |c, v, l| { c.zero_marks = p_bool(v, l)?; Ok(()) }, |c| c.zero_marks.to_string();
    "self_potential.kind" => |c, v, _| { c.self_kind = v.trim().to_string(); Ok(()) }, |c| c.self_kind.clone();
    "constants.beta" => |c, v, l| { c.beta = p_f64(v, l)?; Ok(()) }, |c| c.beta.to_string();
    "constants.B_phi" => |c, v, l| {
        if v.trim() == "auto" { c.b_phi_auto = true; } else { c.b_phi = p_f64(v, l)?; c.b_phi_auto = false; }
        Ok(())
    }, |c| if c.b_phi_auto { "auto".into() } else { c.b_phi.to_string() };
    "constants.Bbar_phi" => |c, v, l| { c.bbar_phi = p_f64(v, l)?; Ok(()) }, |c| c.bbar_phi.to_string();
    "constants.C" => |c, v, l| {
        if v.trim() == "estimate" { c.c_source = CSource::Estimate; } else { c.c_source = CSource::Value(p_f64(v, l)?); }
        Ok(())
    }, |c| match c.c_source { CSource::Estimate => "estimate".into(), CSource::Value(x) => x.to_string() };
    "sampler.z" => |c, v, l| { c.z = p_f64(v, l)?; Ok(()) }, |c| c.z.to_string();
    "sampler.box" => |c, v, l| {
        c.box_bounds = v.split(',').map(|s| p_f64(s, l)).collect::<Result<Vec<_>>>()?;
        Ok(())
    }, |c| c.box_bounds.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    "sampler.birth" => |c, v, l| { c.birth = p_f64(v, l)?; Ok(()) }, |c| c.birth.to_string();
    "sampler.death" => |c, v, l| { c.death = p_f64(v, l)?; Ok(()) }, |c| c.death.to_string();
    "sampler.translate" => |c, v, l| { c.translate = p_f64(v, l)?; Ok(()) }, |c| c.translate.to_string();
    "sampler.mark_resample" => |c, v, l| { c.mark_resample = p_f64(v, l)?; Ok(()) }, |c| c.mark_resample.to_string();
    "sampler.n_sweeps" => |c, v, l| { c.n_sweeps = p_usize(v, l)?; Ok(()) }, |c| c.n_sweeps.to_string();
    "sampler.burn_in" => |c, v, l| { c.burn_in = p_usize(v, l)?; Ok(()) }, |c| c.burn_in.to_string();
    "sampler.thinning" => |c, v, l| { c.thinning = p_usize(v, l)?; Ok(()) }, |c| c.thinning.to_string();
    "sampler.translate_step" => |c, v, l| { c.translate_step = p_f64(v, l)?; Ok(()) }, |c| c.translate_step.to_string();
    "ks.depth" => |c, v, l| { c.ks_depth = p_usize(v, l)?; Ok(()) }, |c| c.ks_depth.to_string();
    "ks.k_max" => |c, v, l| { c.ks_k_max = p_usize(v, l)?; Ok(()) }, |c| c.ks_k_max.to_string();
    "ks.budget" => |c, v, l| { c.ks_budget = p_usize(v, l)?; Ok(()) }, |c| c.ks_budget.to_string();
    "run.workers" => |c, v, l| { c.workers = p_usize(v, l)?; Ok(()) }, |c| c.workers.to_string();
    "run.out" => |c, v, _| { c.out = v.trim().to_string(); Ok(()) }, |c| c.out.clone();
}

impl RunConfig {
    /// Parse from the `[section]` / `key = value` text format.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        let mut seen: HashSet<String> = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_string();
                continue;
            }
            let (key_part, value) = line.split_once('=').ok_or(Error::ConfigParse {
                line: i + 1,
                msg: format!("expected key = value, got {line:?}"),
            })?;
            let key = if section.is_empty() {
                key_part.trim().to_string()
            } else {
                format!("{section}.{}", key_part.trim())
            };
            if !seen.insert(key.clone()) {
                return Err(Error::ConfigParse {
                    line: i + 1,
                    msg: format!("duplicate key {key}"),
                });
            }
            cfg.set_key(&key, value, i + 1)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serialize in canonical section order; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut section = String::new();
        for key in KNOWN_KEYS {
            let (sec, rest) = match key.split_once('.') {
                Some((s, r)) => (s.to_string(), r.to_string()),
                None => (String::new(), key.to_string()),
            };
            if sec != section {
                if !out.is_empty() {
                    out.push('\n');
                }
                out.push_str(&format!("[{sec}]\n"));
                section = sec;
            }
            out.push_str(&format!("{rest} = {}\n", self.get_key(key)));
        }
        out
    }

    /// Apply `PATHGIBBS_*` environment overrides via the supplied lookup.
    pub fn apply_env_overrides(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        for key in KNOWN_KEYS {
            let var = format!("{ENV_PREFIX}{}", key.replace('.', "_").to_uppercase());
            if let Some(value) = lookup(&var) {
                self.set_key(key, &value, 0)?;
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidSpec("dimension must be >= 1".into()));
        }
        match self.confining_kind.as_str() {
            "power" | "zero" => {}
            other => {
                return Err(Error::InvalidSpec(format!(
                    "unknown confining kind {other:?}"
                )))
            }
        }
        match self.pair_tail.as_str() {
            "none" | "lj" => {}
            other => return Err(Error::InvalidSpec(format!("unknown tail {other:?}"))),
        }
        if self.self_kind != "zero" {
            return Err(Error::InvalidSpec(format!(
                "unknown self potential {:?}",
                self.self_kind
            )));
        }
        if self.box_bounds.len() != 2 * self.dimension {
            return Err(Error::InvalidSpec(format!(
                "sampler.box needs {} bounds for dimension {}, got {}",
                2 * self.dimension,
                self.dimension,
                self.box_bounds.len()
            )));
        }
        Ok(())
    }

    pub fn langevin_spec(&self) -> LangevinSpec {
        let potential = match self.confining_kind.as_str() {
            "zero" => ConfiningPotential::Zero,
            _ => ConfiningPotential::power(self.confining_p),
        };
        LangevinSpec {
            dim: self.dimension,
            potential,
            n_steps: self.n_steps,
            delta: self.delta,
        }
    }

    pub fn mark_sampler(&self) -> MarkSampler {
        if self.zero_marks {
            MarkSampler::Zero {
                dim: self.dimension,
                n_steps: self.n_steps,
            }
        } else {
            MarkSampler::Langevin(self.langevin_spec())
        }
    }

    pub fn scalar_potential(&self) -> ScalarPotential {
        let tail = match self.pair_tail.as_str() {
            "lj" => TailPotential::LennardJones {
                a: self.lj_a,
                b: self.lj_b,
                shifted: self.lj_shifted,
            },
            _ => TailPotential::None,
        };
        ScalarPotential {
            hard_core_r: self.pair_r,
            tail,
            a0: self.a0,
        }
    }

    pub fn pair_potential(&self) -> Result<PathPairPotential> {
        PathPairPotential::new(self.scalar_potential())
    }

    pub fn self_potential(&self) -> SelfPotential {
        SelfPotential::ZERO
    }

    pub fn sim_box(&self) -> Result<SimBox> {
        let lo: Vec<f64> = self.box_bounds.iter().step_by(2).copied().collect();
        let hi: Vec<f64> = self.box_bounds.iter().skip(1).step_by(2).copied().collect();
        SimBox::new(lo, hi)
    }

    pub fn sampler_config(&self) -> Result<SamplerConfig> {
        Ok(SamplerConfig {
            sim_box: self.sim_box()?,
            z: self.z,
            beta: self.beta,
            moves: MoveMix {
                birth: self.birth,
                death: self.death,
                translate: self.translate,
                mark_resample: self.mark_resample,
            },
            n_sweeps: self.n_sweeps,
            burn_in: self.burn_in,
            thinning: self.thinning,
            seed: self.seed,
            translate_step: self.translate_step,
        })
    }

    pub fn sigma_sampler(&self, finite_volume: bool) -> Result<SigmaSampler> {
        Ok(SigmaSampler {
            domain: if finite_volume {
                SampleDomain::Box(self.sim_box()?)
            } else {
                SampleDomain::FullSpace
            },
            marks: self.mark_sampler(),
            psi: self.self_potential(),
        })
    }

    /// Stability constant: configured value or the packing bound.
    pub fn resolve_b_phi(&self) -> Result<f64> {
        if self.b_phi_auto {
            crate::potential::stability_constant_bound(&self.scalar_potential(), self.dimension)
        } else {
            Ok(self.b_phi)
        }
    }
}
