//! Battle-log ingestion and rating-state snapshots.

mod battle_log;
mod snapshot;

pub use battle_log::{
    ingest, ingest_reader, write_battle_log, BattleLogLine, Ingested, Rejection, Timestamp, SCHEMA_VERSION,
};
pub use snapshot::{decode_state, encode_state, load_state, save_state, StateSnapshot};
