//! UTC timestamps with millisecond precision.
//!
//! Every timestamp in the harness serializes as ISO-8601 UTC with exactly
//! three fractional digits (`2026-01-02T03:04:05.678Z`). The fixed width
//! keeps serialized records byte-comparable and lexicographically sortable.

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

const FORMAT: &str = "%Y-%m-%dT%H:%M:%S%.3fZ";

/// A UTC instant truncated to millisecond precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(DateTime<Utc>);

impl Timestamp {
    /// Current wall-clock time, truncated to the millisecond.
    pub fn now() -> Self {
        Self::from_millis(Utc::now().timestamp_millis())
    }

    pub fn from_millis(ms: i64) -> Self {
        Timestamp(DateTime::from_timestamp_millis(ms).expect("timestamp in range"))
    }

    pub fn as_millis(&self) -> i64 {
        self.0.timestamp_millis()
    }

    /// Seconds between two instants (`self - earlier`), fractional.
    pub fn seconds_since(&self, earlier: &Timestamp) -> f64 {
        (self.as_millis() - earlier.as_millis()) as f64 / 1000.0
    }

    /// Compact form safe for file and directory names
    /// (`20260102T030405678Z`).
    pub fn compact(&self) -> String {
        self.0.format("%Y%m%dT%H%M%S%3fZ").to_string()
    }

    pub fn parse(s: &str) -> Result<Self, TimestampError> {
        let naive = NaiveDateTime::parse_from_str(s, FORMAT)
            .map_err(|e| TimestampError::Parse(s.to_string(), e.to_string()))?;
        let parsed = Timestamp(naive.and_utc());
        // %.3f also accepts absent or longer fractions; only the canonical
        // fixed-width form is valid.
        if parsed.to_string() != s {
            return Err(TimestampError::Parse(
                s.to_string(),
                "not in canonical millisecond form".to_string(),
            ));
        }
        Ok(parsed)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.format(FORMAT))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TimestampError {
    #[error("invalid timestamp {0:?}: {1}")]
    Parse(String, String),
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Timestamp::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_is_fixed_width_millis() {
        let t = Timestamp::from_millis(1_735_689_600_123);
        assert_eq!(t.to_string(), "2025-01-01T00:00:00.123Z");
        // zero millis still render three digits
        let t0 = Timestamp::from_millis(1_735_689_600_000);
        assert_eq!(t0.to_string(), "2025-01-01T00:00:00.000Z");
    }

    #[test]
    fn round_trips_through_string() {
        let t = Timestamp::now();
        let back = Timestamp::parse(&t.to_string()).unwrap();
        assert_eq!(t, back);
        assert_eq!(t.to_string(), back.to_string());
    }

    #[test]
    fn rejects_lower_precision() {
        assert!(Timestamp::parse("2025-01-01T00:00:00Z").is_err());
        assert!(Timestamp::parse("not a time").is_err());
    }

    #[test]
    fn seconds_since_is_fractional() {
        let a = Timestamp::from_millis(1_000);
        let b = Timestamp::from_millis(3_500);
        assert_eq!(b.seconds_since(&a), 2.5);
    }

    #[test]
    fn compact_is_filename_safe() {
        let t = Timestamp::from_millis(1_735_689_600_123);
        let c = t.compact();
        assert_eq!(c, "20250101T000000123Z");
        assert!(!c.contains(':') && !c.contains('/'));
    }
}
