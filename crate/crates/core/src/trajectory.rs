use serde::Serialize;

use crate::measure::CrowdMeasure;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub measure: CrowdMeasure,
}

/// Time-stamped solver output. `notes` collects run-time adjustments such as
/// step reductions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub dt: f64,
    pub steps: usize,
    pub notes: Vec<String>,
}

impl Trajectory {
    pub fn first(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory has at least one snapshot")
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}
