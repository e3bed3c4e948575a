//! Name-addressed registry of experiment strategies.
//!
//! Each experiment kind implements [`Experiment`] and is registered under
//! its config/CLI name; the binary builds its subcommands from whatever is
//! registered, so adding a kind is one `register` call.

use std::collections::BTreeMap;

use crate::config::ExperimentConfig;
use crate::runner::{RunContext, RunOutput};
use crate::ExpError;

/// One experiment kind behind a common interface.
pub trait Experiment: Sync + Send {
    /// Registry/CLI/config name (snake_case).
    fn kind(&self) -> &'static str;

    /// One-line description for `--help` and `list`.
    fn summary(&self) -> &'static str;

    /// The frozen CSV column schema this experiment emits.
    fn csv_header(&self) -> &'static [&'static str];

    /// Check that the config carries everything this kind needs.
    fn validate(&self, cfg: &ExperimentConfig) -> Result<(), ExpError>;

    /// Execute and produce CSV rows plus a JSON summary.
    fn run(&self, cfg: &ExperimentConfig, ctx: &mut RunContext) -> Result<RunOutput, ExpError>;
}

/// Registry keyed by kind name.
pub struct Registry {
    entries: BTreeMap<&'static str, Box<dyn Experiment>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// All built-in experiment kinds.
    pub fn with_builtin() -> Self {
        let mut reg = Self::empty();
        for exp in crate::experiments::builtin() {
            reg.register(exp);
        }
        reg
    }

    pub fn register(&mut self, exp: Box<dyn Experiment>) {
        let kind = exp.kind();
        let prior = self.entries.insert(kind, exp);
        assert!(prior.is_none(), "duplicate experiment kind {kind:?}");
    }

    pub fn get(&self, kind: &str) -> Option<&dyn Experiment> {
        self.entries.get(kind).map(|b| b.as_ref())
    }

    pub fn kinds(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Experiment> + '_ {
        self.entries.values().map(|b| b.as_ref())
    }
}
