//! Commonsense prior tables standing in for vision-language similarity:
//! target → related object category weights, and target → room type weights.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

/// Default object prior table shipped with the crate.
pub const DEFAULT_OBJECT_PRIORS: &str = include_str!("../../../assets/priors.json");
/// Default room prior table shipped with the crate.
pub const DEFAULT_ROOM_PRIORS: &str = include_str!("../../../assets/room_priors.json");

#[derive(Debug, Error)]
pub enum PriorError {
    #[error("cannot read prior table {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed prior table: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unknown target \"{0}\": not in the prior table and not a scenario category")]
    UnknownTarget(String),
}

type WeightMap = BTreeMap<String, BTreeMap<String, f64>>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PriorTable {
    pub objects: WeightMap,
    pub rooms: WeightMap,
}

impl PriorTable {
    pub fn from_json(objects: &str, rooms: &str) -> Result<Self, PriorError> {
        Ok(Self {
            objects: serde_json::from_str(objects)?,
            rooms: serde_json::from_str(rooms)?,
        })
    }

    pub fn load(objects: impl AsRef<Path>, rooms: impl AsRef<Path>) -> Result<Self, PriorError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|source| PriorError::Io {
                path: p.display().to_string(),
                source,
            })
        };
        Self::from_json(&read(objects.as_ref())?, &read(rooms.as_ref())?)
    }

    /// Resolves the weights for one target. `target` always maps to 1.
    pub fn resolve(&self, target: &str, scenario_has_category: bool) -> Result<TargetPriors, PriorError> {
        let listed = self.objects.get(target);
        if listed.is_none() && !scenario_has_category {
            return Err(PriorError::UnknownTarget(target.to_string()));
        }
        let mut objects = listed.cloned().unwrap_or_default();
        objects.insert(target.to_string(), 1.0);
        Ok(TargetPriors {
            target: target.to_string(),
            objects,
            rooms: self.rooms.get(target).cloned().unwrap_or_default(),
        })
    }
}


/// Priors for one target category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub struct TargetPriors {
    pub target: String,
    pub objects: BTreeMap<String, f64>,
    pub rooms: BTreeMap<String, f64>,
}

impl TargetPriors {
    pub fn object(&self, category: &str) -> f64 {
        self.objects.get(category).copied().unwrap_or(0.0)
    }

    pub fn room(&self, room_type: &str) -> f64 {
        self.rooms.get(room_type).copied().unwrap_or(0.0)
    }
}

pub fn default_priors() -> PriorTable {
    PriorTable::from_json(DEFAULT_OBJECT_PRIORS, DEFAULT_ROOM_PRIORS).expect("bundled prior tables parse")
}
