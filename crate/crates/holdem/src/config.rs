//! JSON configuration files and the conversions into core types.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use holdem_core::abstraction::profile::{Abstraction, AbstractionProfile};
use holdem_core::agent::AgentConfig;
use holdem_core::blueprint::TrainingConfig;
use holdem_core::game::{Action, Betting, RulesConfig};
use holdem_core::subgame::{ActionClass, Continuation, OpponentModel, RangeTransform};

use crate::error::{Error, Result};
use crate::files;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RulesFile {
    pub starting_stack: u32,
    pub small_blind: u32,
    pub big_blind: u32,
}

impl Default for RulesFile {
    fn default() -> Self {
        let r = RulesConfig::default();
        RulesFile { starting_stack: r.starting_stack, small_blind: r.small_blind, big_blind: r.big_blind }
    }
}

impl RulesFile {
    pub fn rules(&self) -> Result<RulesConfig> {
        let r = RulesConfig { starting_stack: self.starting_stack, small_blind: self.small_blind, big_blind: self.big_blind };
        r.validate()?;
        Ok(r)
    }
}

/// Where bucket maps come from: loaded from `dir` when present, otherwise
/// built from the named profile (and saved to `dir` if one is given).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AbstractionFile {
    pub profile: String,
    pub seed: u64,
    pub dir: Option<PathBuf>,
}

impl Default for AbstractionFile {
    fn default() -> Self {
        AbstractionFile { profile: "desk".into(), seed: 0, dir: None }
    }
}

impl AbstractionFile {
    pub fn load_or_build(&self) -> Result<Abstraction> {
        let profile = AbstractionProfile::by_name(&self.profile)?;
        if let Some(dir) = &self.dir {
            if files::has_abstraction(dir) {
                log::info!("loading bucket maps from {}", dir.display());
                return files::load_abstraction(dir, profile.menu);
            }
        }
        log::info!("building the {} abstraction", profile.name);
        let abs = Abstraction::build(&profile, self.seed)?;
        if let Some(dir) = &self.dir {
            files::save_abstraction(dir, &abs)?;
        }
        Ok(abs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainFile {
    pub abstraction: AbstractionFile,
    pub variant: String,
    pub weighting: String,
    pub iterations: u64,
    pub checkpoint_interval: u64,
    pub seed: u64,
    pub workers: usize,
    pub rules: RulesFile,
    pub store: PathBuf,
    pub checkpoint: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for TrainFile {
    fn default() -> Self {
        let d = TrainingConfig::default();
        TrainFile {
            abstraction: AbstractionFile::default(),
            variant: "external-sampling".into(),
            weighting: "linear".into(),
            iterations: d.iterations,
            checkpoint_interval: d.checkpoint_interval,
            seed: d.seed,
            workers: d.workers,
            rules: RulesFile::default(),
            store: "blueprint.dhbp".into(),
            checkpoint: None,
            report: None,
        }
    }
}

impl TrainFile {
    pub fn training_config(&self) -> Result<TrainingConfig> {
        let cfg = TrainingConfig {
            profile: self.abstraction.profile.clone(),
            variant: self.variant.parse()?,
            weighting: self.weighting.parse()?,
            iterations: self.iterations,
            checkpoint_interval: self.checkpoint_interval,
            seed: self.seed,
            workers: self.workers,
            rules: self.rules.rules()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelFile {
    pub label: String,
    /// identity, sharpen or flatten.
    pub transform: String,
    /// blueprint, fold, call or raise.
    pub continuation: String,
}

impl ModelFile {
    pub fn model(&self) -> Result<OpponentModel> {
        let transform = match self.transform.as_str() {
            "identity" => RangeTransform::Identity,
            "sharpen" => RangeTransform::Sharpen,
            "flatten" => RangeTransform::Flatten,
            t => return Err(Error::Usage(format!("unknown range transform '{t}'"))),
        };
        let continuation = match self.continuation.as_str() {
            "blueprint" => Continuation::Blueprint,
            "fold" => Continuation::Biased(ActionClass::Fold),
            "call" => Continuation::Biased(ActionClass::Call),
            "raise" => Continuation::Biased(ActionClass::Raise),
            c => return Err(Error::Usage(format!("unknown continuation '{c}'"))),
        };
        Ok(OpponentModel::new(&self.label, transform, continuation))
    }
}

fn models(files: &Option<Vec<ModelFile>>) -> Result<Vec<OpponentModel>> {
    match files {
        None => Ok(OpponentModel::default_set()),
        Some(v) => v.iter().map(ModelFile::model).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentFile {
    pub abstraction: AbstractionFile,
    pub store: PathBuf,
    pub budgets: [u64; 4],
    pub models: Option<Vec<ModelFile>>,
    pub seed: u64,
    pub purified: bool,
    pub snap_tolerance: f64,
}

impl Default for AgentFile {
    fn default() -> Self {
        let d = AgentConfig::default();
        AgentFile {
            abstraction: AbstractionFile::default(),
            store: "blueprint.dhbp".into(),
            budgets: d.budgets,
            models: None,
            seed: d.seed,
            purified: d.purified,
            snap_tolerance: d.snap_tolerance,
        }
    }
}

impl AgentFile {
    pub fn agent_config(&self) -> Result<AgentConfig> {
        let cfg = AgentConfig {
            budgets: self.budgets,
            models: models(&self.models)?,
            seed: self.seed,
            purified: self.purified,
            snap_tolerance: self.snap_tolerance,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A single re-solve: the public line leading to the root, the board, and
/// optionally explicit ranges (uniform over live pairs otherwise).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResolveFile {
    pub abstraction: AbstractionFile,
    /// Blueprint for the alternative values; uniform play when absent.
    pub store: Option<PathBuf>,
    pub rules: RulesFile,
    /// Actions in order, e.g. "call", "raise 300", "allin".
    pub actions: Vec<String>,
    pub board: String,
    pub resolver: Option<usize>,
    pub own_range: Option<Vec<f64>>,
    pub opp_range: Option<Vec<f64>>,
    pub models: Option<Vec<ModelFile>>,
    pub safe: bool,
}

impl Default for ResolveFile {
    fn default() -> Self {
        ResolveFile {
            abstraction: AbstractionFile { profile: "tiny".into(), ..AbstractionFile::default() },
            store: None,
            rules: RulesFile::default(),
            actions: Vec::new(),
            board: String::new(),
            resolver: None,
            own_range: None,
            opp_range: None,
            models: None,
            safe: true,
        }
    }
}

impl ResolveFile {
    pub fn models(&self) -> Result<Vec<OpponentModel>> {
        models(&self.models)
    }

    pub fn root(&self) -> Result<Betting> {
        let mut b = Betting::new(self.rules.rules()?)?;
        for a in &self.actions {
            b = b.apply(parse_action(a)?)?;
        }
        Ok(b)
    }
}

/// Parses "fold", "call", "check", "allin" or "raise N" (N the round total).
pub fn parse_action(s: &str) -> Result<Action> {
    let s = s.trim().to_ascii_lowercase();
    let mut parts = s.split(|c: char| c.is_whitespace() || c == ':').filter(|p| !p.is_empty());
    let kind = parts.next().unwrap_or("");
    let amount = parts.next();
    match (kind, amount) {
        ("fold", None) => Ok(Action::Fold),
        ("call" | "check", None) => Ok(Action::Call),
        ("allin" | "all-in", None) => Ok(Action::AllIn),
        ("raise" | "bet", Some(n)) => n.parse().map(Action::RaiseTo).map_err(|_| Error::Usage(format!("bad raise amount in '{s}'"))),
        _ => Err(Error::Usage(format!("cannot parse action '{s}'"))),
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&std::fs::read(path)?)?)
}
