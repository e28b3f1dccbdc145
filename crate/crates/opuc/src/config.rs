//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated. Unknown or repeated keys are rejected so that typos cannot
//! silently fall back to defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use opuc_core::supnorm::{DEFAULT_DEGREE_BUDGET, DEFAULT_OVERSAMPLE};
use opuc_core::verblunsky::{Envelope, EnvelopeKind, MultiplierKind, Randomizer, SlowFunction};

use crate::error::{Result, RunError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Supnorm,
    Martingale,
    Moments,
    Lattice,
    Sharpness,
    Oracle,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Supnorm,
        Suite::Martingale,
        Suite::Moments,
        Suite::Lattice,
        Suite::Sharpness,
        Suite::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Supnorm => "supnorm",
            Suite::Martingale => "martingale",
            Suite::Moments => "moments",
            Suite::Lattice => "lattice",
            Suite::Sharpness => "sharpness",
            Suite::Oracle => "oracle",
        }
    }
}

impl FromStr for Suite {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| RunError::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleParams {
    /// Prefix lengths `n` whose parameters are held fixed.
    pub prefixes: Vec<usize>,
    /// Target degrees `j > n`.
    pub targets: Vec<usize>,
    pub trials: usize,
    pub repetitions: usize,
    /// `z = e^{iθ}`.
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentParams {
    pub blocks: Vec<u32>,
    pub orders: Vec<u32>,
    pub trials: usize,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeParams {
    pub blocks: Vec<u32>,
    pub repeats: usize,
    /// `None` uses all `G(k+1)` roots of unity.
    pub theta_count: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SharpnessParams {
    pub levels: u32,
    pub grid: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub envelope: Envelope,
    pub randomizer: Randomizer,
    pub trajectories: usize,
    pub max_degree: usize,
    pub degree_budget: usize,
    pub checkpoints: Vec<usize>,
    pub oversample: usize,
    pub outputs: PathBuf,
    pub suites: Vec<Suite>,
    pub plateau_threshold: Option<f64>,
    /// Also dump the final coefficient vectors of every trajectory.
    pub coefficients: bool,
    pub martingale: MartingaleParams,
    pub moments: MomentParams,
    pub lattice: LatticeParams,
    pub sharpness: SharpnessParams,
    pub oracle_degrees: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            envelope: Envelope::zero(),
            randomizer: Randomizer::uniform_phase(0),
            trajectories: 1,
            max_degree: 1024,
            degree_budget: DEFAULT_DEGREE_BUDGET,
            checkpoints: power_checkpoints(1024),
            oversample: DEFAULT_OVERSAMPLE,
            outputs: PathBuf::from("out"),
            suites: vec![Suite::Supnorm],
            plateau_threshold: None,
            coefficients: false,
            martingale: MartingaleParams {
                prefixes: vec![4, 8],
                targets: vec![32, 64],
                trials: 100_000,
                repetitions: 40,
                theta: 0.7,
            },
            moments: MomentParams {
                blocks: vec![1],
                orders: vec![2, 4],
                trials: 10_000,
                theta: opuc_core::stats::DEFAULT_THETA,
            },
            lattice: LatticeParams {
                blocks: vec![0, 1, 2],
                repeats: opuc_core::stats::DEFAULT_LATTICE_REPEATS,
                theta_count: None,
            },
            sharpness: SharpnessParams {
                levels: 3,
                grid: 1 << 18,
            },
            oracle_degrees: vec![4, 8, 16, 32],
        }
    }
}

/// `1, 2, 4, …` up to `max_degree`, with `max_degree` itself appended.
pub fn power_checkpoints(max_degree: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |d| d.checked_mul(2))
        .take_while(|d| *d <= max_degree)
        .collect();
    if out.last() != Some(&max_degree) && max_degree > 0 {
        out.push(max_degree);
    }
    out
}

fn invalid(msg: impl Into<String>) -> RunError {
    RunError::Config(msg.into())
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| invalid(format!("cannot parse `{raw}` for key `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

struct Entries(BTreeMap<String, String>);

impl Entries {
    fn take(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    fn value<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        self.take(key).map(|raw| parse_value(key, &raw)).transpose()
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>> {
        self.take(key).map(|raw| parse_list(key, &raw)).transpose()
    }

    fn required<T: FromStr>(&mut self, key: &str, context: &str) -> Result<T> {
        self.value(key)?
            .ok_or_else(|| invalid(format!("`{key}` is required for {context}")))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim().to_string();
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(invalid(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        let mut e = Entries(map);
        let mut c = ExperimentConfig::default();

        if let Some(name) = e.take("name") {
            c.name = name;
        }
        c.envelope = parse_envelope(&mut e)?;
        c.randomizer = parse_randomizer(&mut e)?;
        if let Some(v) = e.value("trajectories")? {
            c.trajectories = v;
        }
        if let Some(v) = e.value("max_degree")? {
            c.max_degree = v;
        }
        if let Some(v) = e.value("degree_budget")? {
            c.degree_budget = v;
        }
        c.checkpoints = match e.list("checkpoints")? {
            Some(v) => v,
            None => power_checkpoints(c.max_degree),
        };
        if let Some(v) = e.value("oversample")? {
            c.oversample = v;
        }
        if let Some(v) = e.take("outputs") {
            c.outputs = PathBuf::from(v);
        }
        if let Some(raw) = e.take("suites") {
            c.suites = raw
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect::<Result<_>>()?;
        }
        if let Some(raw) = e.take("plateau_threshold") {
            c.plateau_threshold = match raw.as_str() {
                "none" => None,
                _ => Some(parse_value("plateau_threshold", &raw)?),
            };
        }
        if let Some(v) = e.value("coefficients")? {
            c.coefficients = v;
        }

        let m = &mut c.martingale;
        if let Some(v) = e.list("martingale.prefixes")? {
            m.prefixes = v;
        }
        if let Some(v) = e.list("martingale.targets")? {
            m.targets = v;
        }
        if let Some(v) = e.value("martingale.trials")? {
            m.trials = v;
        }
        if let Some(v) = e.value("martingale.repetitions")? {
            m.repetitions = v;
        }
        if let Some(v) = e.value("martingale.theta")? {
            m.theta = v;
        }

        let m = &mut c.moments;
        if let Some(v) = e.list("moments.blocks")? {
            m.blocks = v;
        }
        if let Some(v) = e.list("moments.orders")? {
            m.orders = v;
        }
        if let Some(v) = e.value("moments.trials")? {
            m.trials = v;
        }
        if let Some(v) = e.value("moments.theta")? {
            m.theta = v;
        }

        if let Some(v) = e.list("lattice.blocks")? {
            c.lattice.blocks = v;
        }
        if let Some(v) = e.value("lattice.repeats")? {
            c.lattice.repeats = v;
        }
        if let Some(raw) = e.take("lattice.theta_count") {
            c.lattice.theta_count = match raw.as_str() {
                "full" => None,
                _ => Some(parse_value("lattice.theta_count", &raw)?),
            };
        }

        if let Some(v) = e.value("sharpness.levels")? {
            c.sharpness.levels = v;
        }
        if let Some(v) = e.value("sharpness.grid")? {
            c.sharpness.grid = v;
        }
        if let Some(v) = e.list("oracle.degrees")? {
            c.oracle_degrees = v;
        }

        if let Some(key) = e.0.keys().next() {
            return Err(invalid(format!("unknown key `{key}`")));
        }
        c.validate()?;
        Ok(c)
    }

    /// Checks the structural invariants; a degree above the budget is a
    /// budget error rather than a configuration error.
    pub fn validate(&self) -> Result<()> {
        if self.trajectories == 0 {
            return Err(invalid("trajectories must be at least 1"));
        }
        if self.checkpoints.is_empty() {
            return Err(invalid("checkpoints must not be empty"));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("checkpoints must be strictly ascending"));
        }
        if self
            .checkpoints
            .last()
            .is_some_and(|d| *d > self.max_degree)
        {
            return Err(invalid("checkpoints must not exceed max_degree"));
        }
        if self.oversample < 8 {
            return Err(invalid("oversample must be at least 8"));
        }
        if self.max_degree > self.degree_budget {
            return Err(RunError::Budget(format!(
                "max_degree {} exceeds the degree budget {}",
                self.max_degree, self.degree_budget
            )));
        }
        if let Some(t) = self.plateau_threshold {
            if !(t.is_finite() && t >= 1.0) {
                return Err(invalid(
                    "plateau_threshold must be a finite number at least 1",
                ));
            }
        }
        let m = &self.martingale;
        if m.repetitions == 0 {
            return Err(invalid("martingale.repetitions must be at least 1"));
        }
        if let (Some(n), Some(j)) = (m.prefixes.iter().max(), m.targets.iter().min()) {
            if n >= j {
                return Err(invalid("every martingale target must exceed every prefix"));
            }
        }
        if self.moments.orders.iter().any(|p| *p != 2 && *p != 4) {
            return Err(invalid("moments.orders may contain only 2 and 4"));
        }
        if self.lattice.theta_count == Some(0) {
            return Err(invalid("lattice.theta_count must be positive"));
        }
        Ok(())
    }

    /// Canonical text form; `parse(to_text())` reproduces the config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("name", self.name.clone());
        match self.envelope.kind() {
            EnvelopeKind::Zero => line("envelope.kind", "zero".into()),
            EnvelopeKind::PowerDecay { exponent, scale } => {
                line("envelope.kind", "power-decay".into());
                line("envelope.exponent", exponent.to_string());
                line("envelope.scale", scale.to_string());
            }
            EnvelopeKind::SparseGeometric { base, epsilon, psi } => {
                line("envelope.kind", "sparse-geometric".into());
                line("envelope.T", base.to_string());
                line("envelope.epsilon", epsilon.to_string());
                line("envelope.psi", psi.name().into());
            }
            EnvelopeKind::Explicit(values) => {
                line("envelope.kind", "explicit".into());
                line("envelope.values", join(values));
            }
        }
        line("randomizer.kind", self.randomizer.kind().name().into());
        if let MultiplierKind::ScaledUniformPhase { radius } = self.randomizer.kind() {
            line("randomizer.radius", radius.to_string());
        }
        line("randomizer.seed", self.randomizer.seed().to_string());
        line("trajectories", self.trajectories.to_string());
        line("max_degree", self.max_degree.to_string());
        line("degree_budget", self.degree_budget.to_string());
        line("checkpoints", join(&self.checkpoints));
        line("oversample", self.oversample.to_string());
        line("outputs", self.outputs.display().to_string());
        line(
            "suites",
            self.suites
                .iter()
                .map(|s| s.name())
                .collect::<Vec<_>>()
                .join(","),
        );
        line(
            "plateau_threshold",
            self.plateau_threshold
                .map_or("none".into(), |t| t.to_string()),
        );
        line("coefficients", self.coefficients.to_string());
        let m = &self.martingale;
        line("martingale.prefixes", join(&m.prefixes));
        line("martingale.targets", join(&m.targets));
        line("martingale.trials", m.trials.to_string());
        line("martingale.repetitions", m.repetitions.to_string());
        line("martingale.theta", m.theta.to_string());
        let m = &self.moments;
        line("moments.blocks", join(&m.blocks));
        line("moments.orders", join(&m.orders));
        line("moments.trials", m.trials.to_string());
        line("moments.theta", m.theta.to_string());
        line("lattice.blocks", join(&self.lattice.blocks));
        line("lattice.repeats", self.lattice.repeats.to_string());
        line(
            "lattice.theta_count",
            self.lattice
                .theta_count
                .map_or("full".into(), |n| n.to_string()),
        );
        line("sharpness.levels", self.sharpness.levels.to_string());
        line("sharpness.grid", self.sharpness.grid.to_string());
        line("oracle.degrees", join(&self.oracle_degrees));
        s
    }

    pub fn has_suite(&self, suite: Suite) -> bool {
        self.suites.contains(&suite)
    }

    pub fn seed(&self) -> u64 {
        self.randomizer.seed()
    }
}

fn parse_envelope(e: &mut Entries) -> Result<Envelope> {
    let kind = match e.take("envelope.kind").as_deref() {
        None | Some("zero") => EnvelopeKind::Zero,
        Some("power-decay") => EnvelopeKind::PowerDecay {
            exponent: e.required("envelope.exponent", "power-decay")?,
            scale: e.required("envelope.scale", "power-decay")?,
        },
        Some("sparse-geometric") => EnvelopeKind::SparseGeometric {
            base: e.required("envelope.T", "sparse-geometric")?,
            epsilon: e.required("envelope.epsilon", "sparse-geometric")?,
            psi: match e.take("envelope.psi") {
                None => SlowFunction::One,
                Some(name) => SlowFunction::from_name(&name)
                    .ok_or_else(|| invalid(format!("unknown slow function `{name}`")))?,
            },
        },
        Some("explicit") => EnvelopeKind::Explicit(
            e.list("envelope.values")?
                .ok_or_else(|| invalid("`envelope.values` is required for explicit"))?,
        ),
        Some(other) => return Err(invalid(format!("unknown envelope kind `{other}`"))),
    };
    Ok(Envelope::new(kind)?)
}

fn parse_randomizer(e: &mut Entries) -> Result<Randomizer> {
    let kind = match e.take("randomizer.kind").as_deref() {
        None | Some("uniform-phase") => MultiplierKind::UniformPhase,
        Some("rademacher") => MultiplierKind::Rademacher,
        Some("scaled-uniform-phase") => MultiplierKind::ScaledUniformPhase {
            radius: e.required("randomizer.radius", "scaled-uniform-phase")?,
        },
        Some(other) => return Err(invalid(format!("unknown randomizer kind `{other}`"))),
    };
    let seed = e.value("randomizer.seed")?.unwrap_or(0);
    Ok(Randomizer::new(kind, seed)?)
}
