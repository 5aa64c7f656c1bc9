use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::catalog::{MinimalTreeCatalog, RootEntry};
use super::MinimalError;

/// Hex SHA-256 over the depth, the formula texts and `S`.
pub fn cache_key(depth: usize, formulas: &[String], s: usize) -> String {
    let payload = serde_json::to_vec(&(depth, formulas, s)).expect("plain data serializes");
    hex::encode(Sha256::digest(&payload))
}

/// Self-describing on-disk form of a catalog and its tables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogCache {
    pub key: String,
    pub depth: usize,
    pub s: usize,
    pub formulas: Vec<String>,
    pub catalog: MinimalTreeCatalog,
    pub root_table: Vec<RootEntry>,
    /// One table per formula in `formulas` after the first.
    pub sat_tables: Vec<Vec<bool>>,
}

impl CatalogCache {
    pub fn new(
        formulas: Vec<String>,
        catalog: MinimalTreeCatalog,
        root_table: Vec<RootEntry>,
        sat_tables: Vec<Vec<bool>>,
    ) -> Self {
        let (depth, s) = (catalog.depth, catalog.s);
        Self {
            key: cache_key(depth, &formulas, s),
            depth,
            s,
            formulas,
            catalog,
            root_table,
            sat_tables,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cache serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MinimalError> {
        let c: Self = serde_json::from_str(text).map_err(|e| MinimalError::Cache(e.to_string()))?;
        if c.key != cache_key(c.depth, &c.formulas, c.s)
            || c.catalog.depth != c.depth
            || c.catalog.s != c.s
        {
            return Err(MinimalError::Cache("key does not match contents".into()));
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<(), MinimalError> {
        std::fs::write(path, self.to_json()).map_err(|e| MinimalError::Cache(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, MinimalError> {
        let text = std::fs::read_to_string(path).map_err(|e| MinimalError::Cache(e.to_string()))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimal::{
        build_root_table, build_sat_table, enumerate_minimal_trees, LabelAlphabet,
    };
    use crate::mso::build_gamma;

    #[test]
    fn round_trip_and_tamper_detection() {
        let cat = enumerate_minimal_trees(2, 2, &LabelAlphabet::full(2).unwrap()).unwrap();
        let roots = build_root_table(&cat, 2).unwrap();
        let sat = build_sat_table(&cat, &build_gamma()).unwrap();
        let c = CatalogCache::new(
            vec!["tau".into(), build_gamma().to_string()],
            cat,
            roots,
            vec![sat],
        );
        let back = CatalogCache::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let mut bad = c.clone();
        bad.s = 3;
        assert!(CatalogCache::from_json(&bad.to_json()).is_err());
        assert_ne!(cache_key(2, &c.formulas, 2), cache_key(3, &c.formulas, 2));
    }
}
