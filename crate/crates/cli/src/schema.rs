use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Deserialize;
use vulnmap_core::ingest::{CveFields, PackageColumns, PlatformAliases, VersionColumns};

/// Input layout overrides read from `--schema`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schema {
    pub packages: PackageColumns,
    pub versions: VersionColumns,
    pub cves: CveFields,
    /// Extra raw-name -> label aliases, merged over the defaults.
    pub aliases: Option<PlatformAliases>,
}

impl Schema {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).with_context(|| format!("{}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("{}: invalid schema", path.display()))
    }

    pub fn aliases(&self) -> PlatformAliases {
        let mut aliases = PlatformAliases::default();
        if let Some(extra) = &self.aliases {
            aliases.extend(extra.clone());
        }
        aliases
    }
}
