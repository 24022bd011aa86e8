//! Lookup tables loaded from a config directory, falling back to the embedded defaults.

use std::path::Path;

use crate::error::{Error, Result};
use crate::paraphrase::{DpConfig, PrepositionLexicon};
use crate::pipeline::Resources;
use crate::subevent::{Inflector, SenseTable};

pub const SENSES_FILE: &str = "senses.tsv";
pub const PARTICIPLES_FILE: &str = "participles.tsv";
pub const PREPOSITIONS_FILE: &str = "prepositions.tsv";

/// Every table the pipeline and the emitters consult.
#[derive(Debug, Clone, Default)]
pub struct Config {
    pub resources: Resources,
    pub prepositions: PrepositionLexicon,
}

fn read_optional(dir: &Path, name: &str) -> Result<Option<(String, String)>> {
    let path = dir.join(name);
    match std::fs::read_to_string(&path) {
        Ok(text) => Ok(Some((text, path.display().to_string()))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(Error::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        }),
    }
}

impl Config {
    /// A file present in `dir` replaces the matching embedded table wholesale.
    pub fn from_dir(dir: &Path) -> Result<Config> {
        let mut cfg = Config::default();
        if let Some((text, src)) = read_optional(dir, SENSES_FILE)? {
            cfg.resources.senses = SenseTable::from_tsv(&text, &src)?;
        }
        if let Some((text, src)) = read_optional(dir, PARTICIPLES_FILE)? {
            cfg.resources.inflector = Inflector::from_tsv(&text, &src)?;
        }
        if let Some((text, src)) = read_optional(dir, PREPOSITIONS_FILE)? {
            cfg.prepositions = PrepositionLexicon::from_tsv(&text, &src)?;
        }
        Ok(cfg)
    }

    /// Emitter settings: cooking or transfer mode, bare or inline style.
    pub fn dp(&self, transfer: bool, inline: bool) -> DpConfig {
        let base = if inline {
            DpConfig::inline()
        } else {
            DpConfig::default()
        };
        let mode = if transfer {
            DpConfig::transfer()
        } else {
            DpConfig::default()
        };
        DpConfig {
            mode: mode.mode,
            max_end_states: mode.max_end_states,
            prepositions: self.prepositions.clone(),
            ..base
        }
    }
}
