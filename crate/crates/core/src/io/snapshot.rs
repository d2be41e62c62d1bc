use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrices::ComparisonMatrices;
use crate::scheduler::PlacementState;
use crate::types::{ModelRef, RatingVector};

const MAGIC: &str = "ARENA-SNAPSHOT v1 sha256=";

/// Everything needed to resume rating and scheduling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub roster: Vec<ModelRef>,
    pub ratings: Option<RatingVector>,
    pub matrices: ComparisonMatrices,
    pub placements: Vec<PlacementState>,
    pub config_fingerprint: String,
    /// Seconds since the Unix epoch.
    pub created_at: i64,
}

impl StateSnapshot {
    pub fn new(matrices: ComparisonMatrices, ratings: Option<RatingVector>) -> Self {
        Self {
            roster: matrices.roster().to_vec(),
            ratings,
            matrices,
            placements: Vec::new(),
            config_fingerprint: String::new(),
            created_at: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let same = |r: &[ModelRef]| r.len() == self.roster.len() && r.iter().zip(&self.roster).all(|(a, b)| a == b);
        if !same(self.matrices.roster()) {
            return Err(Error::RosterMismatch);
        }
        if let Some(r) = &self.ratings {
            if !same(r.roster()) {
                return Err(Error::RosterMismatch);
            }
            r.check()?;
        }
        Ok(())
    }
}

/// Header line with the SHA-256 of the JSON payload, then the payload.
pub fn encode_state(state: &StateSnapshot) -> Result<String> {
    state.validate()?;
    let payload = serde_json::to_string(state)?;
    let digest = hex::encode(Sha256::digest(payload.as_bytes()));
    Ok(format!("{MAGIC}{digest}\n{payload}\n"))
}

pub fn decode_state(text: &str) -> Result<StateSnapshot> {
    let (header, rest) = text
        .split_once('\n')
        .ok_or_else(|| Error::CorruptSnapshot("missing header".into()))?;
    let expected = header
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::CorruptSnapshot("unrecognised header".into()))?;
    let payload = rest
        .strip_suffix('\n')
        .ok_or_else(|| Error::CorruptSnapshot("truncated payload".into()))?;
    let actual = hex::encode(Sha256::digest(payload.as_bytes()));
    if actual != expected {
        return Err(Error::CorruptSnapshot("checksum mismatch".into()));
    }
    let state: StateSnapshot =
        serde_json::from_str(payload).map_err(|e| Error::CorruptSnapshot(format!("payload: {e}")))?;
    state
        .validate()
        .map_err(|e| Error::CorruptSnapshot(format!("inconsistent state: {e}")))?;
    Ok(state)
}

pub fn save_state(path: impl AsRef<Path>, state: &StateSnapshot) -> Result<()> {
    fs::write(path, encode_state(state)?)?;
    Ok(())
}

pub fn load_state(path: impl AsRef<Path>) -> Result<StateSnapshot> {
    let bytes = fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::CorruptSnapshot("not UTF-8".into()))?;
    decode_state(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{numbered_roster, ELO_ALPHA};

    fn sample() -> StateSnapshot {
        let m = ComparisonMatrices::from_wins(numbered_roster(2), vec![0, 3, 1, 0]).unwrap();
        let r = RatingVector::from_scores(numbered_roster(2), vec![1095.424_250_943_932_4, 904.575_749_056_067_6], ELO_ALPHA)
            .unwrap();
        StateSnapshot::new(m, Some(r))
    }

    #[test]
    fn round_trip_is_exact() {
        let s = sample();
        let back = decode_state(&encode_state(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let (a, b) = (s.ratings.unwrap(), back.ratings.unwrap());
        for (x, y) in a.scores().iter().zip(b.scores()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn truncation_and_tampering_are_caught() {
        let text = encode_state(&sample()).unwrap();
        for cut in [0, 10, text.len() / 2, text.len() - 1] {
            assert!(matches!(decode_state(&text[..cut]), Err(Error::CorruptSnapshot(_))), "cut {cut}");
        }
        let tampered = text.replace("\"wins\":[0,3,1,0]", "\"wins\":[0,4,1,0]");
        assert_ne!(tampered, text);
        assert!(matches!(decode_state(&tampered), Err(Error::CorruptSnapshot(_))));
    }

    #[test]
    fn inconsistent_rosters_refused() {
        let mut s = sample();
        s.roster = numbered_roster(3);
        assert!(encode_state(&s).is_err());
    }
}
