//! Tallies, statistics and necessary-condition checks for two-station,
//! two-setting Bell tests, plus trial generators and an exhaustive checker.

pub mod bounds;
pub mod error;
pub mod exact;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod simulate;
pub mod statistics;
pub mod trial_model;

pub use bounds::{
    bounds_report, delta_small, epsilon_floor, min_trials, nosignalling_deltas, required_skew,
    violation_possible, BoundsReport, EpsilonCheck, NoSignallingReport, PairDelta, PairLabel,
};
pub use error::{Error, Result};
pub use oracle::{
    enumerate_uniform_tallies, verify_necessary_conditions, Condition, Counterexample,
    CounterexampleReport,
};
pub use report::{analyze, AnalysisReport, AnalyzeOptions, Metadata};
pub use simulate::{
    run_experiment, sample_lhv_trial, sample_quantum_trial, simulate_tally, Model, SettingScheme,
    SimulationConfig, TrialStream,
};
pub use statistics::{
    bell1964_statistic, chsh_from_sprime, chsh_statistic, correlation_coefficient, skew, sprime,
    uniform_prob_s, Bell1964, ChshSummary, SPrime, Skew, ThreeSettingTally,
};
pub use trial_model::{
    merge_tallies, parse_trial_line, read_trials, tally_from_reader, tally_from_trials,
    validate_tally, Setting, TallyTable, TallyValidation, TrialFormat, TrialRecord,
};
