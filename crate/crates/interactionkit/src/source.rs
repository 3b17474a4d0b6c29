use std::path::Path;

use anyhow::{bail, Context, Result};
use interactionkit_core::index::{exact_cii, soum_exact_cii};
use interactionkit_core::{Coalition, EstimateMap, Game, IndexKind, SoumGame, TabularGame};

use crate::formats;

/// A game read from disk or generated on the spot.
#[derive(Debug, Clone)]
pub enum GameSource {
    Soum(SoumGame),
    Tabular(TabularGame),
}

impl GameSource {
    /// Files ending in `.soum` hold unanimity terms, anything else a full table.
    pub fn load(path: &Path) -> Result<Self> {
        let is_soum = path.extension().is_some_and(|e| e == "soum");
        let source = if is_soum {
            GameSource::Soum(formats::load_soum(path)?)
        } else {
            GameSource::Tabular(formats::load_tabular(path)?)
        };
        Ok(source)
    }

    pub fn generate(n: usize, terms: usize, seed: u64) -> Result<Self> {
        Ok(GameSource::Soum(SoumGame::generate(n, terms, seed)?))
    }

    pub fn as_soum(&self) -> Option<&SoumGame> {
        match self {
            GameSource::Soum(g) => Some(g),
            GameSource::Tabular(_) => None,
        }
    }

    /// Ground truth: the unanimity closed form when available, enumeration
    /// otherwise.
    pub fn ground_truth(&self, kind: IndexKind, k: usize) -> Result<EstimateMap> {
        match self {
            GameSource::Soum(g) => soum_exact_cii(g, kind, k),
            GameSource::Tabular(g) => exact_cii(g, kind, k),
        }
        .with_context(|| format!("ground truth for {kind} at order {k}"))
    }

    pub fn check_order(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.players() {
            bail!("order {k} outside 1..={}", self.players());
        }
        Ok(())
    }
}

impl Game for GameSource {
    fn players(&self) -> usize {
        match self {
            GameSource::Soum(g) => g.players(),
            GameSource::Tabular(g) => g.players(),
        }
    }

    #[inline]
    fn value(&self, coalition: Coalition) -> f64 {
        match self {
            GameSource::Soum(g) => g.value(coalition),
            GameSource::Tabular(g) => g.value(coalition),
        }
    }
}
