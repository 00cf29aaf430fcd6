//! Mollifier nets `φ^n = FT(w)/2π` built from the flat profiles, with certified tables.

pub mod contour;
pub mod flat;
mod table;

use serde::{Deserialize, Serialize};

pub use contour::{Profile, Sample};
pub use flat::{index_map_g, moment_order, FlatKind};
pub use table::{
    build_mollifier, moment_ladder, GridSpec, MollifierNet, MollifierTable, MomentCheck, NetStats, TableCertificate,
    TableKey,
};

/// `Pow` uses `h_{g(n)}`, `Der` uses `k_{g(n)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MollifierKind {
    Pow,
    Der,
}

impl MollifierKind {
    pub fn flat(self) -> FlatKind {
        match self {
            Self::Pow => FlatKind::H,
            Self::Der => FlatKind::K,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pow => "pow",
            Self::Der => "der",
        }
    }
}

impl std::fmt::Display for MollifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
