//! Self-contained analysis report for one tally.

use serde::Serialize;

use crate::bounds::{bounds_report, nosignalling_deltas, BoundsReport, NoSignallingReport};
use crate::error::Result;
use crate::statistics::{bell1964_statistic, chsh_statistic, Bell1964, ChshSummary, ThreeSettingTally};
use crate::trial_model::TallyTable;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub tool_version: &'static str,
    /// SHA-256 of the input file, hex encoded.
    pub input_digest: Option<String>,
    pub seed: Option<u64>,
}

impl Metadata {
    pub fn new(input_digest: Option<String>, seed: Option<u64>) -> Self {
        Self { tool: "bellkit", tool_version: TOOL_VERSION, input_digest, seed }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AnalyzeOptions {
    /// Requested no-signalling accuracy.
    pub epsilon: Option<f64>,
    /// Requested violation magnitude Δ for the bounds; 0 when absent.
    pub delta: Option<f64>,
    pub bell1964: Option<ThreeSettingTally>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub tally: TallyTable,
    pub chsh: ChshSummary,
    pub nosignalling: NoSignallingReport,
    pub bounds: BoundsReport,
    pub bell1964: Option<Bell1964>,
    pub metadata: Metadata,
}

impl AnalysisReport {
    pub fn violated(&self) -> bool {
        self.chsh.violated
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn analyze(t: &TallyTable, opts: &AnalyzeOptions, metadata: Metadata) -> Result<AnalysisReport> {
    let chsh = chsh_statistic(t)?;
    let mut nosignalling = nosignalling_deltas(t)?;
    if let Some(eps) = opts.epsilon {
        nosignalling = nosignalling.with_requested(eps)?;
    }
    let bounds = bounds_report(t, opts.delta, opts.epsilon)?;
    let bell1964 = opts.bell1964.as_ref().map(bell1964_statistic).transpose()?;
    Ok(AnalysisReport { tally: *t, chsh, nosignalling, bounds, bell1964, metadata })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_recomputes_from_embedded_tally() {
        let t = TallyTable::uniform(100, [50, 60, 55, 45]);
        let opts = AnalyzeOptions { epsilon: Some(0.01), ..Default::default() };
        let r = analyze(&t, &opts, Metadata::new(None, Some(3))).unwrap();
        let again = analyze(&r.tally, &opts, r.metadata.clone()).unwrap();
        assert_eq!(r, again);
        assert!(!r.nosignalling.requested.as_ref().unwrap().pass);

        let v: serde_json::Value = serde_json::from_str(&r.to_json_pretty()).unwrap();
        assert_eq!(v["chsh"]["S"], 0.4);
        assert_eq!(v["chsh"]["S_exact"], "2/5");
        assert_eq!(v["nosignalling"]["epsilon_achieved_exact"], "3/40");
        assert_eq!(v["metadata"]["seed"], 3);
        assert_eq!(v["bell1964"], serde_json::Value::Null);
    }
}
