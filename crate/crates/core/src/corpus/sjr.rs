//! SJR venue-prestige table and A/B/C tiering.
//!
//! Tier thresholds for a year are computed over all venues with an SJR entry
//! for that year: A above mu + 3*sigma, B above mu + sigma, C otherwise.
//! Sigma is the population standard deviation by default (the sample variant
//! is available via [`SigmaMode`]).

use super::CorpusError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// Venue prestige tier with total order A > B > C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VenueTier {
    A,
    B,
    C,
}

impl VenueTier {
    fn rank(self) -> u8 {
        match self {
            VenueTier::A => 2,
            VenueTier::B => 1,
            VenueTier::C => 0,
        }
    }
}

impl PartialOrd for VenueTier {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for VenueTier {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl fmt::Display for VenueTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VenueTier::A => write!(f, "A"),
            VenueTier::B => write!(f, "B"),
            VenueTier::C => write!(f, "C"),
        }
    }
}

/// Which denominator the tiering standard deviation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaMode {
    #[default]
    Population,
    Sample,
}

/// Per-venue, per-year SJR values.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SjrTable {
    entries: BTreeMap<String, BTreeMap<i32, f64>>,
}

impl SjrTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts an entry; at most one per (venue, year), last write wins.
    pub fn insert(&mut self, venue_id: impl Into<String>, year: i32, sjr: f64) {
        self.entries.entry(venue_id.into()).or_default().insert(year, sjr);
    }

    pub fn get(&self, venue_id: &str, year: i32) -> Option<f64> {
        self.entries.get(venue_id).and_then(|m| m.get(&year)).copied()
    }

    /// SJR at `year`, falling back to the venue's nearest earlier year.
    pub fn get_with_fallback(&self, venue_id: &str, year: i32) -> Option<f64> {
        let years = self.entries.get(venue_id)?;
        years.range(..=year).next_back().map(|(_, &v)| v)
    }

    /// Venues holding an entry for `year`, with their values, ascending by id.
    pub fn venues_for_year(&self, year: i32) -> Vec<(&str, f64)> {
        self.entries
            .iter()
            .filter_map(|(venue, years)| years.get(&year).map(|&v| (venue.as_str(), v)))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All years that have at least one entry.
    pub fn years(&self) -> Vec<i32> {
        let mut out: Vec<i32> = self
            .entries
            .values()
            .flat_map(|m| m.keys().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Loads `venue_id,year,sjr` CSV (header required).
    pub fn from_csv(path: &Path) -> Result<Self, CorpusError> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| CorpusError::Io {
            path: path.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::Other, e),
        })?;
        let mut table = SjrTable::new();
        for (idx, row) in reader.records().enumerate() {
            let line = idx + 2;
            let row = row.map_err(|e| CorpusError::MalformedSjrRow {
                line,
                reason: e.to_string(),
            })?;
            if row.len() != 3 {
                return Err(CorpusError::MalformedSjrRow {
                    line,
                    reason: format!("expected 3 fields, got {}", row.len()),
                });
            }
            let venue = row[0].to_string();
            let year: i32 = row[1].parse().map_err(|e| CorpusError::MalformedSjrRow {
                line,
                reason: format!("bad year: {e}"),
            })?;
            let sjr: f64 = row[2].parse().map_err(|e| CorpusError::MalformedSjrRow {
                line,
                reason: format!("bad sjr: {e}"),
            })?;
            if sjr < 0.0 {
                return Err(CorpusError::MalformedSjrRow {
                    line,
                    reason: format!("negative sjr {sjr}"),
                });
            }
            table.insert(venue, year, sjr);
        }
        Ok(table)
    }

    pub fn to_csv(&self, path: &Path) -> Result<(), CorpusError> {
        let mut writer = csv::Writer::from_path(path).map_err(|e| CorpusError::Io {
            path: path.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::Other, e),
        })?;
        let io_err = |e: csv::Error| CorpusError::Io {
            path: path.display().to_string(),
            source: std::io::Error::new(std::io::ErrorKind::Other, e),
        };
        writer
            .write_record(["venue_id", "year", "sjr"])
            .map_err(io_err)?;
        for (venue, years) in &self.entries {
            for (year, sjr) in years {
                writer
                    .write_record([venue.as_str(), &year.to_string(), &format!("{sjr}")])
                    .map_err(io_err)?;
            }
        }
        writer.flush().map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(())
    }
}

fn mean_and_sigma(values: &[f64], mode: SigmaMode) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    let denom = match mode {
        SigmaMode::Population => n,
        SigmaMode::Sample => n - 1.0,
    };
    (mean, (ss / denom).sqrt())
}

fn tier_of(sjr: f64, mean: f64, sigma: f64) -> VenueTier {
    if sjr > mean + 3.0 * sigma {
        VenueTier::A
    } else if sjr > mean + sigma {
        VenueTier::B
    } else {
        VenueTier::C
    }
}

/// Tiers every venue holding an SJR entry for `year` (population sigma).
pub fn tier_venues(
    sjr: &SjrTable,
    year: i32,
) -> Result<BTreeMap<String, VenueTier>, CorpusError> {
    tier_venues_with(sjr, year, SigmaMode::Population)
}

pub fn tier_venues_with(
    sjr: &SjrTable,
    year: i32,
    mode: SigmaMode,
) -> Result<BTreeMap<String, VenueTier>, CorpusError> {
    let venues = sjr.venues_for_year(year);
    if venues.len() < 2 {
        return Err(CorpusError::TooFewVenues {
            year,
            found: venues.len(),
        });
    }
    let values: Vec<f64> = venues.iter().map(|&(_, v)| v).collect();
    let (mean, sigma) = mean_and_sigma(&values, mode);
    Ok(venues
        .into_iter()
        .map(|(venue, value)| (venue.to_string(), tier_of(value, mean, sigma)))
        .collect())
}

/// Precomputed per-year tier thresholds plus the missing-entry fallback:
/// a publication's venue takes the nearest earlier year's SJR when the
/// publication year has no entry, and tier C when the venue is absent
/// entirely or the year has no usable threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VenueTiering {
    table: SjrTable,
    /// year -> (mean, sigma) over venues holding entries that year.
    thresholds: BTreeMap<i32, (f64, f64)>,
}

impl VenueTiering {
    pub fn build(table: SjrTable, mode: SigmaMode) -> Self {
        let mut thresholds = BTreeMap::new();
        for year in table.years() {
            let values: Vec<f64> = table
                .venues_for_year(year)
                .iter()
                .map(|&(_, v)| v)
                .collect();
            if values.len() >= 2 {
                thresholds.insert(year, mean_and_sigma(&values, mode));
            }
        }
        VenueTiering { table, thresholds }
    }

    /// Tier of a venue at a publication year.
    pub fn tier_of(&self, venue_id: &str, year: i32) -> VenueTier {
        let Some(sjr) = self.table.get_with_fallback(venue_id, year) else {
            return VenueTier::C;
        };
        // Thresholds from the publication year, else the nearest earlier
        // year that had a usable distribution.
        let Some((_, &(mean, sigma))) = self.thresholds.range(..=year).next_back() else {
            return VenueTier::C;
        };
        tier_of(sjr, mean, sigma)
    }

    pub fn table(&self) -> &SjrTable {
        &self.table
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_for_year(year: i32, values: &[f64]) -> SjrTable {
        let mut t = SjrTable::new();
        for (i, &v) in values.iter().enumerate() {
            t.insert(format!("v{i}"), year, v);
        }
        t
    }

    #[test]
    fn hand_computed_thresholds() {
        // values {1,2,3,4,10}: mu = 4, population sigma = sqrt(10) ~= 3.162;
        // mu+sigma ~= 7.162, mu+3sigma ~= 13.49: the 10 tiers B, rest C.
        let t = table_for_year(2010, &[1.0, 2.0, 3.0, 4.0, 10.0]);
        let tiers = tier_venues(&t, 2010).unwrap();
        assert_eq!(tiers["v4"], VenueTier::B);
        for v in ["v0", "v1", "v2", "v3"] {
            assert_eq!(tiers[v], VenueTier::C);
        }
        assert!(!tiers.values().any(|&t| t == VenueTier::A));
    }

    #[test]
    fn equal_values_all_c() {
        let t = table_for_year(2010, &[2.5; 6]);
        let tiers = tier_venues(&t, 2010).unwrap();
        assert!(tiers.values().all(|&t| t == VenueTier::C));
    }

    #[test]
    fn outlier_above_three_sigma_is_a() {
        // Ten zeros and one 100: mu = 100/11, sigma = sqrt(82644.6/11/...) —
        // z of the outlier is 3.16 > 3, so it tiers A. (With n = 5 no value
        // can exceed mu+3sigma of the population; n must be at least 11.)
        let t = table_for_year(2010, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 100.0]);
        let tiers = tier_venues(&t, 2010).unwrap();
        assert_eq!(tiers["v10"], VenueTier::A);
        assert_eq!(tiers["v0"], VenueTier::C);
    }

    #[test]
    fn too_few_venues_errors() {
        let t = table_for_year(2010, &[1.0]);
        assert!(matches!(
            tier_venues(&t, 2010),
            Err(CorpusError::TooFewVenues { .. })
        ));
    }

    #[test]
    fn every_venue_gets_exactly_one_tier() {
        let t = table_for_year(2010, &[0.1, 0.4, 1.0, 2.2, 9.0, 9.1, 0.0]);
        let tiers = tier_venues(&t, 2010).unwrap();
        assert_eq!(tiers.len(), 7);
    }

    #[test]
    fn fallback_uses_nearest_earlier_year() {
        // Eleven venues at 1.0 and one at 100: mu = 9.25, sigma ~= 27.4,
        // so 100 > mu+3sigma ~= 91.3 tiers A.
        let mut t = SjrTable::new();
        for i in 0..11 {
            t.insert(format!("v{i:02}"), 2008, 1.0);
        }
        t.insert("vbig", 2008, 100.0);
        // 2010 has no entries at all, so both the venue value and the
        // thresholds fall back to 2008.
        let tiering = VenueTiering::build(t, SigmaMode::Population);
        assert_eq!(tiering.tier_of("vbig", 2010), VenueTier::A);
        assert_eq!(tiering.tier_of("v00", 2010), VenueTier::C);
        assert_eq!(tiering.tier_of("nowhere", 2010), VenueTier::C);
    }

    #[test]
    fn tiering_is_permutation_invariant() {
        let values = [1.0, 2.0, 3.0, 4.0, 10.0, 0.2];
        let mut forward = SjrTable::new();
        let mut backward = SjrTable::new();
        for (i, &v) in values.iter().enumerate() {
            forward.insert(format!("v{i}"), 2010, v);
        }
        for (i, &v) in values.iter().enumerate().rev() {
            backward.insert(format!("v{i}"), 2010, v);
        }
        assert_eq!(
            tier_venues(&forward, 2010).unwrap(),
            tier_venues(&backward, 2010).unwrap()
        );
    }

    #[test]
    fn tier_order_is_total() {
        assert!(VenueTier::A > VenueTier::B);
        assert!(VenueTier::B > VenueTier::C);
    }
}
