use std::collections::BTreeMap;
use std::path::Path;

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use super::RoutingError;
use crate::geo::GeoPoint;

/// Case-folds, strips accents and collapses whitespace. Underscores and
/// commas count as whitespace so `17_Winston_Churchill_Street` and
/// `17 Winston Churchill Street,` meet.
pub fn normalize_address(address: &str) -> String {
    let folded: String = address
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .map(|c| if c == '_' || c == ',' { ' ' } else { c })
        .collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Local address lookup table standing in for an online geocoder.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: BTreeMap<String, GeoPoint>,
}

impl Gazetteer {
    /// One `<address>\t<lat>\t<lon>` per line; keys are normalized on load.
    pub fn parse(text: &str) -> Result<Self, RoutingError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let err = |message: &str| RoutingError::Parse {
                line,
                message: message.to_string(),
            };
            let fields: Vec<&str> = raw.split('\t').collect();
            let [addr, lat, lon] = fields[..] else {
                return Err(err("expected `<address>\\t<lat>\\t<lon>`"));
            };
            let p = format!("{lat},{lon}")
                .parse::<GeoPoint>()
                .map_err(|e| err(&e.to_string()))?;
            entries.insert(normalize_address(addr), p);
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, RoutingError> {
        let text = std::fs::read_to_string(path).map_err(|e| RoutingError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn insert(&mut self, address: &str, p: GeoPoint) {
        self.entries.insert(normalize_address(address), p);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn geocode(&self, address: &str) -> Result<GeoPoint, RoutingError> {
        self.entries
            .get(&normalize_address(address))
            .copied()
            .ok_or_else(|| RoutingError::AddressNotFound(address.to_string()))
    }
}
