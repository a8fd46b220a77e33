use crate::error::{BenchError, Result};
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

/// Benchmark family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Spanning tree of a grid densified back to the full grid, with shared
    /// random assignments.
    DensifiedGrid,
    /// Generated instances that sequential planning cannot solve.
    CarpHard,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "densified-grid" => Ok(Suite::DensifiedGrid),
            "carp-hard" => Ok(Suite::CarpHard),
            _ => Err(format!("unknown suite `{s}` (expected densified-grid or carp-hard)")),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::DensifiedGrid => "densified-grid",
            Suite::CarpHard => "carp-hard",
        })
    }
}

/// Planner run in one cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Drrt,
    Carp { attempts: usize },
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "drrt" {
            return Ok(Algorithm::Drrt);
        }
        let attempts = s
            .strip_prefix("carp:")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected drrt or carp:<attempts>)"))?;
        Ok(Algorithm::Carp { attempts })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Drrt => f.write_str("drrt"),
            Algorithm::Carp { attempts } => write!(f, "carp:{attempts}"),
        }
    }
}

/// Everything needed to regenerate and rerun a benchmark.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub suite: Suite,
    /// Grid size for the densified suite.
    pub width: usize,
    pub height: usize,
    /// Number of densification steps; the suite has `density_steps + 1` maps.
    pub density_steps: usize,
    /// Subset of map indices to run (densified suite); `None` runs all.
    pub maps: Option<Vec<usize>>,
    /// Assignments per map (densified) or per agent count (carp-hard).
    pub instances: usize,
    /// Agent counts; the densified suite takes exactly one.
    pub agents: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub delta: f64,
    pub nn_count: usize,
    pub max_iters: usize,
    pub time_limit: Option<Duration>,
    pub connector_attempts: usize,
    /// Horizon override: CARP's planning horizon, drrt's connector horizon.
    pub horizon: Option<u32>,
    pub seed: u64,
    /// Drop wall-clock effects: no time limit and `time_s` recorded as 0,
    /// so records are byte-identical across runs and thread counts.
    pub deterministic: bool,
}

impl ExperimentSpec {
    /// Desk-scale densified-grid suite: 11 maps of a 20x20 grid, 20
    /// assignments of 40 agents.
    pub fn densified_grid() -> Self {
        Self {
            suite: Suite::DensifiedGrid,
            width: 20,
            height: 20,
            density_steps: 10,
            maps: None,
            instances: 20,
            agents: vec![40],
            algorithms: vec![Algorithm::Drrt, Algorithm::Carp { attempts: 1 }, Algorithm::Carp { attempts: 1000 }],
            delta: 4.0,
            nn_count: 5,
            max_iters: 10_000,
            time_limit: Some(Duration::from_secs(60)),
            connector_attempts: drrt_core::carp::CONNECTOR_ATTEMPTS,
            horizon: None,
            seed: 0,
            deterministic: false,
        }
    }

    /// Desk-scale CARP-hard suite: 25 instances each for 10 to 40 agents.
    pub fn carp_hard() -> Self {
        Self {
            suite: Suite::CarpHard,
            instances: 25,
            agents: vec![10, 20, 30, 40],
            algorithms: vec![Algorithm::Drrt, Algorithm::Carp { attempts: 1000 }],
            ..Self::densified_grid()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(BenchError::InvalidSpec(m.to_string()));
        if self.instances == 0 {
            return bad("instances must be positive");
        }
        if self.agents.is_empty() || self.agents.contains(&0) {
            return bad("agent counts must be positive");
        }
        if self.algorithms.is_empty() {
            return bad("at least one algorithm is required");
        }
        if self.nn_count == 0 || self.max_iters == 0 || self.connector_attempts == 0 {
            return bad("nn, max_iters and connector_attempts must be positive");
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad("delta must be finite and non-negative");
        }
        match self.suite {
            Suite::DensifiedGrid => {
                if self.agents.len() != 1 {
                    return bad("the densified-grid suite takes a single agent count");
                }
                if self.width == 0 || self.height == 0 || self.density_steps == 0 {
                    return bad("width, height and density_steps must be positive");
                }
                if self.agents[0] > self.width * self.height {
                    return bad("more agents than grid vertices");
                }
                if let Some(maps) = &self.maps {
                    if maps.is_empty() || maps.iter().any(|&m| m > self.density_steps) {
                        return bad("map indices must lie in 0..=density_steps");
                    }
                }
            }
            Suite::CarpHard => {
                if self.agents.iter().any(|&k| k < 2 || k % 2 != 0) {
                    return bad("carp-hard agent counts must be even and at least 2");
                }
            }
        }
        Ok(())
    }

    /// Map indices run by the densified suite.
    pub fn map_indices(&self) -> Vec<usize> {
        self.maps.clone().unwrap_or_else(|| (0..=self.density_steps).collect())
    }

    /// Parses flat `key = value` text. Blank lines and `#` comments are
    /// ignored; keys not given keep the defaults of the chosen suite.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| BenchError::Config {
                line: i + 1,
                msg: "expected `key = value`".into(),
            })?;
            pairs.push((i + 1, key.trim().to_string(), value.trim().to_string()));
        }
        let suite = match pairs.iter().find(|p| p.1 == "suite") {
            Some((line, _, v)) => v.parse().map_err(|msg| BenchError::Config { line: *line, msg })?,
            None => Suite::DensifiedGrid,
        };
        let mut spec = match suite {
            Suite::DensifiedGrid => Self::densified_grid(),
            Suite::CarpHard => Self::carp_hard(),
        };
        for (line, key, value) in pairs {
            let err = |msg: String| BenchError::Config { line, msg };
            let num = |v: &str| v.parse::<usize>().map_err(|e| err(format!("{key}: {e}")));
            match key.as_str() {
                "suite" => {}
                "width" => spec.width = num(&value)?,
                "height" => spec.height = num(&value)?,
                "density_steps" => spec.density_steps = num(&value)?,
                "maps" => spec.maps = Some(list(&value, |v| num(v))?),
                "instances" => spec.instances = num(&value)?,
                "agents" => spec.agents = list(&value, |v| num(v))?,
                "algorithms" => spec.algorithms = list(&value, |v| v.parse().map_err(err))?,
                "delta" => spec.delta = value.parse().map_err(|e| err(format!("delta: {e}")))?,
                "nn" => spec.nn_count = num(&value)?,
                "max_iters" => spec.max_iters = num(&value)?,
                "time_limit" => {
                    let secs: f64 = value.parse().map_err(|e| err(format!("time_limit: {e}")))?;
                    if !(secs >= 0.0 && secs.is_finite()) {
                        return Err(err("time_limit must be a non-negative number of seconds".into()));
                    }
                    spec.time_limit = (secs > 0.0).then(|| Duration::from_secs_f64(secs));
                }
                "connector_attempts" => spec.connector_attempts = num(&value)?,
                "horizon" => spec.horizon = Some(value.parse().map_err(|e| err(format!("horizon: {e}")))?),
                "seed" => spec.seed = value.parse().map_err(|e| err(format!("seed: {e}")))?,
                "deterministic" => spec.deterministic = value.parse().map_err(|e| err(format!("deterministic: {e}")))?,
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn list<T>(value: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(parse).collect()
}
