//! Wire format of every record the binary prints.
//!
//! Field order in these structs is the byte order on the wire
//! (serde_json keeps declaration order), and all group elements are
//! pre-rendered to exact strings by the caller. Golden-file tests
//! depend on both.

use serde::Serialize;

#[derive(Serialize)]
pub struct RepRecord {
    pub terms: Vec<String>,
    pub target: String,
}

#[derive(Serialize)]
pub struct CountRecord {
    pub count: u64,
}

#[derive(Serialize)]
pub struct CensusRecord {
    pub target: String,
    pub schedule: Vec<u32>,
    pub counts: Vec<u64>,
}

#[derive(Serialize)]
pub struct GapRecord {
    pub gap: [String; 2],
    pub query: [String; 2],
    pub resolution: u32,
    pub fattening: String,
    pub net_size: usize,
}

#[derive(Serialize)]
pub struct NotFoundRecord {
    pub outcome: &'static str,
    pub k_max: u32,
}

#[derive(Serialize)]
pub struct NetRecord {
    pub points: Vec<String>,
}

#[derive(Serialize)]
pub struct AccumRecord {
    pub point: String,
    pub samples: usize,
    pub depth: u32,
}

#[derive(Serialize)]
pub struct NoneFoundRecord {
    pub outcome: &'static str,
    pub samples: usize,
}

#[derive(Serialize)]
pub struct TraceTermRecord {
    pub value: String,
    pub terms: Vec<String>,
}

#[derive(Serialize)]
pub struct TraceSummaryRecord {
    pub point: String,
    pub requested: usize,
    pub emitted: usize,
    pub outcome: &'static str,
}

#[derive(Serialize)]
pub struct IntervalCensusRecord {
    pub point: String,
    pub eta: String,
    pub side: &'static str,
    pub schedule: Vec<u32>,
    pub counts: Vec<u64>,
}

#[derive(Serialize)]
pub struct ValidateRecord {
    pub set: String,
    pub depth: u32,
    pub outcome: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
}
