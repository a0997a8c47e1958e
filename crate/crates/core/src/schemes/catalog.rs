use super::order::{gatekeep, OrderFit};
use super::TwoStageScheme;
use crate::error::{Error, Result};
use std::collections::HashSet;
use std::path::Path;

/// The catalog shipped with the crate.
pub const BUNDLED_CATALOG: &str = include_str!("../../data/schemes.json");

/// Named collection of two-stage schemes.
#[derive(Clone, Debug)]
pub struct Catalog {
    schemes: Vec<TwoStageScheme>,
}

impl Catalog {
    /// Parses a catalog and checks the coefficient-list structure only.
    pub fn parse(json: &str) -> Result<Self> {
        let schemes: Vec<TwoStageScheme> = serde_json::from_str(json)?;
        let mut seen = HashSet::new();
        for s in &schemes {
            s.check_structure()?;
            if !seen.insert(s.name.clone()) {
                return Err(Error::Invalid(format!("duplicate scheme name {}", s.name)));
            }
        }
        Ok(Catalog { schemes })
    }

    /// Parses and gate-keeps every entry (consistency and fitted order), so a
    /// mistyped coefficient is caught when the catalog is loaded.
    pub fn parse_validated(json: &str) -> Result<Self> {
        let catalog = Self::parse(json)?;
        catalog.gatekeep()?;
        Ok(catalog)
    }

    pub fn bundled() -> Result<Self> {
        Self::parse_validated(BUNDLED_CATALOG)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::parse_validated(&text)
    }

    pub fn gatekeep(&self) -> Result<Vec<OrderFit>> {
        self.schemes.iter().map(gatekeep).collect()
    }

    pub fn get(&self, name: &str) -> Result<&TwoStageScheme> {
        self.schemes
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::NotFound(format!("scheme {name}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = &TwoStageScheme> {
        self.schemes.iter()
    }

    pub fn names(&self) -> Vec<&str> {
        self.schemes.iter().map(|s| s.name.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.schemes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemes.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.schemes)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::validate_consistency;

    #[test]
    fn bundled_catalog_is_valid() {
        let c = Catalog::bundled().unwrap();
        for name in ["strang", "forest-ruth", "suzuki", "blanes-moan", "complex-triple-jump"] {
            let s = c.get(name).unwrap();
            assert!(validate_consistency(s).unwrap().pass, "{name}");
        }
        assert!(c.get("complex-triple-jump").unwrap().has_complex_coefficients());
    }

    #[test]
    fn missing_name() {
        let c = Catalog::parse(BUNDLED_CATALOG).unwrap();
        assert!(matches!(c.get("bogus-name"), Err(Error::NotFound(_))));
    }

    #[test]
    fn mistyped_coefficient_is_caught() {
        // Break the order-4 conditions while keeping the sums at one.
        let mut s: Vec<TwoStageScheme> = serde_json::from_str(BUNDLED_CATALOG).unwrap();
        let fr = s.iter_mut().find(|s| s.name == "forest-ruth").unwrap();
        fr.b[0].re += 0.01;
        fr.b[1].re -= 0.02;
        fr.b[2].re += 0.01;
        let json = serde_json::to_string(&s).unwrap();
        assert!(Catalog::parse(&json).is_ok());
        assert!(matches!(Catalog::parse_validated(&json), Err(Error::Invalid(_))));
    }

    #[test]
    fn duplicate_names_rejected() {
        let s = TwoStageScheme::strang();
        let json = serde_json::to_string(&vec![s.clone(), s]).unwrap();
        assert!(matches!(Catalog::parse(&json), Err(Error::Invalid(_))));
    }
}
