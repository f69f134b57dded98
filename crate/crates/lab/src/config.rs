//! Run configuration and its line-oriented `key = value` text form.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use vns_core::ns::step_count;
use vns_core::particles::{DensityProfile, InitialFamily};

use crate::error::{LabError, Result};

/// Velocity law of the initial datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilySpec {
    Maxwellian { sigma: f64 },
    PowerTail { q: f64 },
    UniformBox { half_width: f64 },
}

impl FamilySpec {
    fn parse(s: &str) -> std::result::Result<Self, String> {
        let mut it = s.split_whitespace();
        let name = it.next().ok_or("empty family")?;
        let value: f64 = it
            .next()
            .ok_or_else(|| format!("family `{name}` needs a parameter"))?
            .parse()
            .map_err(|e| format!("family parameter: {e}"))?;
        if it.next().is_some() {
            return Err(format!("trailing tokens in family `{s}`"));
        }
        match name {
            "maxwellian" => Ok(FamilySpec::Maxwellian { sigma: value }),
            "power_tail" => Ok(FamilySpec::PowerTail { q: value }),
            "uniform_box" => Ok(FamilySpec::UniformBox { half_width: value }),
            other => Err(format!("unknown family `{other}`")),
        }
    }

    fn render(&self) -> String {
        match *self {
            FamilySpec::Maxwellian { sigma } => format!("maxwellian {sigma:?}"),
            FamilySpec::PowerTail { q } => format!("power_tail {q:?}"),
            FamilySpec::UniformBox { half_width } => format!("uniform_box {half_width:?}"),
        }
    }
}

/// Perturbation of the second member of a twin pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    /// Size of the velocity jitter, applied in a random direction per
    /// particle.
    pub delta_v: f64,
    /// Wavevector of the divergence-free fluid perturbation.
    pub fluid_mode: [i32; 2],
    pub fluid_amplitude: f64,
}

/// One point of the regularization schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulePoint {
    pub eps: f64,
    pub r_chi: f64,
    /// Overrides the config's `sigma` when present.
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub n_particles: usize,
    pub seed: u64,
    pub t_final: f64,
    pub dt: f64,
    pub nu: f64,
    pub family: FamilySpec,
    /// Amplitude of the `cos 2πx₁` modulation of the initial density.
    pub profile_amplitude: f64,
    pub mass: f64,
    /// Taylor–Green part `a(sin 2πx cos 2πy, −cos 2πx sin 2πy)` of `u₀`.
    pub tg_amplitude: f64,
    /// Shear part `(b sin 2πy, 0)` of `u₀`.
    pub shear_amplitude: f64,
    pub perturbation: Option<Perturbation>,
    pub out_dir: PathBuf,
    pub midpoint_coupling: bool,
    /// Steps between written rows.
    pub cadence: usize,
    /// Random pairs per evaluation of the log-Lipschitz constant.
    pub gamma_pairs: usize,
    pub eps_mollifier: f64,
    pub r_chi: f64,
    pub sigma: f64,
    pub schedule: Vec<SchedulePoint>,
    pub picard_max_iter: usize,
    pub picard_tol: f64,
    pub relaxation: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 64,
            n_particles: 100_000,
            seed: 1,
            t_final: 1.0,
            dt: 1e-3,
            nu: 1.0,
            family: FamilySpec::Maxwellian { sigma: 0.5 },
            profile_amplitude: 0.2,
            mass: 1.0,
            tg_amplitude: 0.5,
            shear_amplitude: 0.25,
            perturbation: None,
            out_dir: PathBuf::from("out"),
            midpoint_coupling: false,
            cadence: 1,
            gamma_pairs: 4096,
            eps_mollifier: vns_core::scheme::DEFAULT_EPS_MOLLIFIER,
            r_chi: vns_core::scheme::DEFAULT_R_CHI,
            sigma: 1.0,
            schedule: [(0.08, 0.25), (0.04, 0.5), (0.02, 1.0), (0.01, 2.0), (0.005, 4.0)]
                .into_iter()
                .map(|(eps, r_chi)| SchedulePoint { eps, r_chi, sigma: None })
                .collect(),
            picard_max_iter: 50,
            picard_tol: 1e-8,
            relaxation: 1.0,
        }
    }
}

/// What a configuration is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Single,
    Twin,
    Scheme,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| format!("`{key}`: {e}"))
}

fn parse_bool(key: &str, v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("`{key}`: expected true or false, got `{v}`")),
    }
}

fn parse_schedule(v: &str) -> std::result::Result<Vec<SchedulePoint>, String> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|item| {
            let parts: Vec<&str> = item.trim().split(':').collect();
            if !(2..=3).contains(&parts.len()) {
                return Err(format!("schedule entry `{}` is not eps:r_chi[:sigma]", item.trim()));
            }
            Ok(SchedulePoint {
                eps: parse_num("schedule", parts[0])?,
                r_chi: parse_num("schedule", parts[1])?,
                sigma: parts.get(2).map(|s| parse_num("schedule", s)).transpose()?,
            })
        })
        .collect()
}

impl RunConfig {
    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        let mut delta_v = None;
        let mut fluid_mode = None;
        let mut fluid_amplitude = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| LabError::Config {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(LabError::Config {
                    line,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            let mut set = |cfg: &mut RunConfig| -> std::result::Result<(), String> {
                match key {
                    "n" => cfg.n = parse_num(key, value)?,
                    "n_particles" => cfg.n_particles = parse_num(key, value)?,
                    "seed" => cfg.seed = parse_num(key, value)?,
                    "t_final" => cfg.t_final = parse_num(key, value)?,
                    "dt" => cfg.dt = parse_num(key, value)?,
                    "nu" => cfg.nu = parse_num(key, value)?,
                    "family" => cfg.family = FamilySpec::parse(value)?,
                    "profile_amplitude" => cfg.profile_amplitude = parse_num(key, value)?,
                    "mass" => cfg.mass = parse_num(key, value)?,
                    "tg_amplitude" => cfg.tg_amplitude = parse_num(key, value)?,
                    "shear_amplitude" => cfg.shear_amplitude = parse_num(key, value)?,
                    "delta_v" => delta_v = Some(parse_num(key, value)?),
                    "fluid_mode" => {
                        let ks: Vec<i32> = value
                            .split_whitespace()
                            .map(|t| parse_num(key, t))
                            .collect::<std::result::Result<_, _>>()?;
                        let [a, b] = ks[..] else {
                            return Err(format!("`{key}` needs two integers"));
                        };
                        fluid_mode = Some([a, b]);
                    }
                    "fluid_amplitude" => fluid_amplitude = Some(parse_num(key, value)?),
                    "out_dir" => cfg.out_dir = PathBuf::from(value),
                    "midpoint_coupling" => cfg.midpoint_coupling = parse_bool(key, value)?,
                    "cadence" => cfg.cadence = parse_num(key, value)?,
                    "gamma_pairs" => cfg.gamma_pairs = parse_num(key, value)?,
                    "eps_mollifier" => cfg.eps_mollifier = parse_num(key, value)?,
                    "r_chi" => cfg.r_chi = parse_num(key, value)?,
                    "sigma" => cfg.sigma = parse_num(key, value)?,
                    "schedule" => cfg.schedule = parse_schedule(value)?,
                    "picard_max_iter" => cfg.picard_max_iter = parse_num(key, value)?,
                    "picard_tol" => cfg.picard_tol = parse_num(key, value)?,
                    "relaxation" => cfg.relaxation = parse_num(key, value)?,
                    other => return Err(format!("unknown key `{other}`")),
                }
                Ok(())
            };
            set(&mut cfg).map_err(|msg| LabError::Config { line, msg })?;
        }
        if delta_v.is_some() || fluid_mode.is_some() || fluid_amplitude.is_some() {
            cfg.perturbation = Some(Perturbation {
                delta_v: delta_v.unwrap_or(0.0),
                fluid_mode: fluid_mode.unwrap_or([1, 0]),
                fluid_amplitude: fluid_amplitude.unwrap_or(0.0),
            });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Every key with its value, in field order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![
            ("n", self.n.to_string()),
            ("n_particles", self.n_particles.to_string()),
            ("seed", self.seed.to_string()),
            ("t_final", format!("{:?}", self.t_final)),
            ("dt", format!("{:?}", self.dt)),
            ("nu", format!("{:?}", self.nu)),
            ("family", self.family.render()),
            ("profile_amplitude", format!("{:?}", self.profile_amplitude)),
            ("mass", format!("{:?}", self.mass)),
            ("tg_amplitude", format!("{:?}", self.tg_amplitude)),
            ("shear_amplitude", format!("{:?}", self.shear_amplitude)),
        ];
        if let Some(p) = &self.perturbation {
            out.push(("delta_v", format!("{:?}", p.delta_v)));
            out.push(("fluid_mode", format!("{} {}", p.fluid_mode[0], p.fluid_mode[1])));
            out.push(("fluid_amplitude", format!("{:?}", p.fluid_amplitude)));
        }
        let schedule = self
            .schedule
            .iter()
            .map(|p| match p.sigma {
                Some(s) => format!("{:?}:{:?}:{:?}", p.eps, p.r_chi, s),
                None => format!("{:?}:{:?}", p.eps, p.r_chi),
            })
            .collect::<Vec<_>>()
            .join(", ");
        out.extend([
            ("out_dir", self.out_dir.display().to_string()),
            ("midpoint_coupling", self.midpoint_coupling.to_string()),
            ("cadence", self.cadence.to_string()),
            ("gamma_pairs", self.gamma_pairs.to_string()),
            ("eps_mollifier", format!("{:?}", self.eps_mollifier)),
            ("r_chi", format!("{:?}", self.r_chi)),
            ("sigma", format!("{:?}", self.sigma)),
            ("schedule", schedule),
            ("picard_max_iter", self.picard_max_iter.to_string()),
            ("picard_tol", format!("{:?}", self.picard_tol)),
            ("relaxation", format!("{:?}", self.relaxation)),
        ]);
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn initial_family(&self) -> InitialFamily {
        let fam = match self.family {
            FamilySpec::Maxwellian { sigma } => InitialFamily::maxwellian(sigma),
            FamilySpec::PowerTail { q } => InitialFamily::power_tail(q),
            FamilySpec::UniformBox { half_width } => InitialFamily::uniform_box(half_width),
        };
        fam.with_profile(DensityProfile::single([1, 0], self.profile_amplitude))
            .with_mass(self.mass)
    }

    pub fn steps(&self) -> Result<usize> {
        Ok(step_count(self.t_final, self.dt)?)
    }

    /// Checks the numeric ranges and that a perturbation is given exactly
    /// when `mode` is a twin run.
    pub fn validate(&self, mode: Mode) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("nu", self.nu),
            ("eps_mollifier", self.eps_mollifier),
            ("r_chi", self.r_chi),
            ("picard_tol", self.picard_tol),
        ];
        for (k, v) in positive {
            if !(v > 0.0) {
                return Err(LabError::invalid(format!("`{k}` must be positive, got {v}")));
            }
        }
        for (k, v) in [("t_final", self.t_final), ("mass", self.mass)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(LabError::invalid(format!("`{k}` must be finite and nonnegative, got {v}")));
            }
        }
        for (k, v) in [("n_particles", self.n_particles), ("cadence", self.cadence), ("gamma_pairs", self.gamma_pairs)] {
            if v == 0 {
                return Err(LabError::invalid(format!("`{k}` must be positive")));
            }
        }
        vns_core::grid::TorusGrid::new(self.n)?;
        self.steps()?;
        self.initial_family().validate()?;
        if !(self.profile_amplitude.abs() <= 1.0) {
            return Err(LabError::invalid("`profile_amplitude` must lie in [-1, 1]"));
        }
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(LabError::invalid("`sigma` must lie in [0, 1]"));
        }
        match (mode, &self.perturbation) {
            (Mode::Twin, None) => {
                return Err(LabError::invalid(
                    "twin runs need a perturbation (`delta_v` and/or `fluid_mode`, `fluid_amplitude`)",
                ))
            }
            (Mode::Twin, Some(p)) => {
                if !(p.delta_v >= 0.0 && p.delta_v.is_finite() && p.fluid_amplitude.is_finite()) {
                    return Err(LabError::invalid("perturbation sizes must be finite, `delta_v` nonnegative"));
                }
                if p.fluid_mode == [0, 0] {
                    return Err(LabError::invalid("`fluid_mode` must be a nonzero wavevector"));
                }
            }
            (_, Some(_)) => {
                return Err(LabError::invalid("perturbation keys are only valid for twin runs"));
            }
            _ => {}
        }
        if mode == Mode::Scheme {
            if self.picard_max_iter == 0 {
                return Err(LabError::invalid("`picard_max_iter` must be positive"));
            }
            if !(self.relaxation > 0.0 && self.relaxation <= 1.0) {
                return Err(LabError::invalid("`relaxation` must lie in (0, 1]"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_over_defaults() {
        let cfg = RunConfig::parse("n = 32\n# comment\nfamily = power_tail 5 # trailing\ndelta_v = 1e-6\n").unwrap();
        assert_eq!(cfg.n, 32);
        assert_eq!(cfg.family, FamilySpec::PowerTail { q: 5.0 });
        assert_eq!(cfg.perturbation.unwrap().delta_v, 1e-6);
        assert_eq!(cfg.dt, 1e-3);
    }

    #[test]
    fn rejects_bad_input() {
        for text in ["n 32", "n = x", "bogus = 1", "n = 8\nn = 8", "family = cauchy 1", "fluid_mode = 1"] {
            assert!(RunConfig::parse(text).is_err(), "{text}");
        }
        let twin = RunConfig::parse("delta_v = 0").unwrap();
        assert!(twin.validate(Mode::Single).is_err());
        assert!(twin.validate(Mode::Twin).is_ok());
        assert!(RunConfig::default().validate(Mode::Twin).is_err());
        assert!(RunConfig::parse("dt = 0.3").unwrap().validate(Mode::Single).is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::parse("fluid_mode = 2 -1\nfluid_amplitude = 0.01\nschedule = 0.1:2, 0.05:inf:0.5").unwrap();
        cfg.t_final = 0.1 + 0.2;
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(cfg.schedule[1].r_chi, f64::INFINITY);
        let empty = RunConfig {
            schedule: vec![],
            ..Default::default()
        };
        assert_eq!(RunConfig::parse(&empty.to_text()).unwrap(), empty);
    }
}
