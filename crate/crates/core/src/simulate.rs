//! Trial generators for an entangled pair and for a deterministic local
//! hidden-variable model.
//!
//! Quantum convention: P(o1·o2 = +1) = cos²(Δθ/2), so E(θa, θb) = cos(θa − θb)
//! and the angles θa ∈ {0, π/2}, θb ∈ {π/4, −π/4} give S = 2√2.
//!
//! Hidden-variable model: a shared λ uniform on [0, 2π); each station answers
//! sign(cos(θ − λ)) with sign(0) = +1. Its correlation is the sawtooth
//! E(Δθ) = 1 − 2|Δθ|/π for |Δθ| ≤ π (wrapped), which stays inside S ≤ 2.
//!
//! Per trial the generator first draws the settings (one `u32` in uniform
//! random mode, nothing in round-robin mode), then the model's randomness.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{substream, BLOCK_TRIALS};
use crate::trial_model::{merge_tallies, Setting, TallyTable, TrialRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Quantum,
    Lhv,
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum" => Ok(Model::Quantum),
            "lhv" => Ok(Model::Lhv),
            other => Err(Error::Config(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingScheme {
    /// Each trial draws (s1, s2) uniformly from the four cells.
    #[default]
    UniformRandom,
    /// Trial `i` uses cell `i mod 4` in the order 00, 01, 10, 11.
    RoundRobin,
}

impl FromStr for SettingScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" | "uniform_random" | "uniform-random" => Ok(SettingScheme::UniformRandom),
            "round-robin" | "round_robin" => Ok(SettingScheme::RoundRobin),
            other => Err(Error::Config(format!("unknown setting scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub model: Model,
    pub theta_a0: f64,
    pub theta_a1: f64,
    pub theta_b0: f64,
    pub theta_b1: f64,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub setting_scheme: SettingScheme,
    /// Negate station 2's outcome, turning the perfectly correlated
    /// convention into the perfectly anti-correlated one.
    #[serde(default)]
    pub flip_station2: bool,
}

impl SimulationConfig {
    /// θa ∈ {0, π/2}, θb ∈ {π/4, −π/4}.
    pub fn chsh_optimal(model: Model, trials: u64, seed: u64) -> Self {
        Self {
            model,
            theta_a0: 0.0,
            theta_a1: PI / 2.0,
            theta_b0: PI / 4.0,
            theta_b1: -PI / 4.0,
            trials,
            seed,
            setting_scheme: SettingScheme::UniformRandom,
            flip_station2: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let angles = [self.theta_a0, self.theta_a1, self.theta_b0, self.theta_b1];
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Config("measurement angles must be finite".into()));
        }
        if self.setting_scheme == SettingScheme::RoundRobin && !self.trials.is_multiple_of(4) {
            return Err(Error::Config(format!(
                "round-robin settings need a trial count divisible by 4, got {}",
                self.trials
            )));
        }
        Ok(())
    }

    pub fn station1_angle(&self, s1: u8) -> f64 {
        if s1 == 0 { self.theta_a0 } else { self.theta_a1 }
    }

    pub fn station2_angle(&self, s2: u8) -> f64 {
        if s2 == 0 { self.theta_b0 } else { self.theta_b1 }
    }

    pub fn angle_difference(&self, setting: Setting) -> f64 {
        let (s1, s2) = setting.bits();
        self.station1_angle(s1) - self.station2_angle(s2)
    }

    /// Model correlation E for each cell, honoring `flip_station2`.
    pub fn expected_correlations(&self) -> [f64; 4] {
        let sign = if self.flip_station2 { -1.0 } else { 1.0 };
        Setting::ALL.map(|s| sign * expected_correlation(self.model, self.angle_difference(s)))
    }

    pub fn expected_chsh(&self) -> f64 {
        let [e00, e01, e10, e11] = self.expected_correlations();
        e00 + e01 + e10 - e11
    }
}

/// cos²(Δθ/2)
pub fn quantum_correlation_probability(delta_theta: f64) -> f64 {
    let c = (delta_theta / 2.0).cos();
    c * c
}

/// Sawtooth correlation 1 − (2/π)·w with w the angle wrapped into [0, π].
pub fn lhv_correlation(delta_theta: f64) -> f64 {
    let m = delta_theta.abs().rem_euclid(TAU);
    let w = m.min(TAU - m);
    1.0 - 2.0 * w / PI
}

pub fn expected_correlation(model: Model, delta_theta: f64) -> f64 {
    match model {
        Model::Quantum => delta_theta.cos(),
        Model::Lhv => lhv_correlation(delta_theta),
    }
}

fn draw_setting(scheme: SettingScheme, index: u64, rng: &mut ChaCha8Rng) -> Setting {
    match scheme {
        SettingScheme::UniformRandom => {
            let r: u32 = rng.random();
            Setting::from_bits((r & 1) as u8, ((r >> 1) & 1) as u8)
        }
        SettingScheme::RoundRobin => Setting::ALL[(index % 4) as usize],
    }
}

fn sign(x: f64) -> i8 {
    if x >= 0.0 { 1 } else { -1 }
}

fn finish(cfg: &SimulationConfig, setting: Setting, o1: i8, o2: i8) -> TrialRecord {
    let o2 = if cfg.flip_station2 { -o2 } else { o2 };
    TrialRecord::from_parts(setting, o1, o2)
}

/// One entangled-pair trial; `index` is the trial's position in the run.
pub fn sample_quantum_trial(cfg: &SimulationConfig, index: u64, rng: &mut ChaCha8Rng) -> TrialRecord {
    let setting = draw_setting(cfg.setting_scheme, index, rng);
    let p_corr = quantum_correlation_probability(cfg.angle_difference(setting));
    let o1: i8 = if rng.random::<bool>() { 1 } else { -1 };
    let u: f64 = rng.random();
    let o2 = if u < p_corr { o1 } else { -o1 };
    finish(cfg, setting, o1, o2)
}

/// One hidden-variable trial; `index` is the trial's position in the run.
pub fn sample_lhv_trial(cfg: &SimulationConfig, index: u64, rng: &mut ChaCha8Rng) -> TrialRecord {
    let setting = draw_setting(cfg.setting_scheme, index, rng);
    let (s1, s2) = setting.bits();
    let lambda = rng.random::<f64>() * TAU;
    let o1 = sign((cfg.station1_angle(s1) - lambda).cos());
    let o2 = sign((cfg.station2_angle(s2) - lambda).cos());
    finish(cfg, setting, o1, o2)
}

pub fn sample_trial(cfg: &SimulationConfig, index: u64, rng: &mut ChaCha8Rng) -> TrialRecord {
    match cfg.model {
        Model::Quantum => sample_quantum_trial(cfg, index, rng),
        Model::Lhv => sample_lhv_trial(cfg, index, rng),
    }
}

/// The ordered trial sequence of a run.
pub struct TrialStream {
    cfg: SimulationConfig,
    index: u64,
    rng: ChaCha8Rng,
}

impl TrialStream {
    pub fn new(cfg: &SimulationConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg: *cfg, index: 0, rng: substream(cfg.seed, 0) })
    }
}

impl Iterator for TrialStream {
    type Item = TrialRecord;

    fn next(&mut self) -> Option<TrialRecord> {
        if self.index >= self.cfg.trials {
            return None;
        }
        if self.index > 0 && self.index.is_multiple_of(BLOCK_TRIALS) {
            self.rng = substream(self.cfg.seed, self.index / BLOCK_TRIALS);
        }
        let t = sample_trial(&self.cfg, self.index, &mut self.rng);
        self.index += 1;
        Some(t)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.cfg.trials - self.index) as usize;
        (left, Some(left))
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub trials: Vec<TrialRecord>,
    pub tally: TallyTable,
}

/// Materializes the whole run.
pub fn run_experiment(cfg: &SimulationConfig) -> Result<Experiment> {
    let mut tally = TallyTable::default();
    let trials: Vec<_> = TrialStream::new(cfg)?.inspect(|t| tally.record(t)).collect();
    Ok(Experiment { trials, tally })
}

fn tally_blocks(cfg: &SimulationConfig, blocks: std::ops::Range<u64>) -> TallyTable {
    let mut tally = TallyTable::default();
    for block in blocks {
        let mut rng = substream(cfg.seed, block);
        let start = block * BLOCK_TRIALS;
        let end = (start + BLOCK_TRIALS).min(cfg.trials);
        for index in start..end {
            tally.record(&sample_trial(cfg, index, &mut rng));
        }
    }
    tally
}

/// Tallies a run on `shards` threads. The result does not depend on `shards`.
pub fn simulate_tally(cfg: &SimulationConfig, shards: usize) -> Result<TallyTable> {
    cfg.validate()?;
    let blocks = cfg.trials.div_ceil(BLOCK_TRIALS);
    let shards = (shards.max(1) as u64).min(blocks);
    let per_shard = blocks.div_ceil(shards);
    let parts: Vec<TallyTable> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..shards)
            .map(|k| {
                let lo = k * per_shard;
                let hi = ((k + 1) * per_shard).min(blocks);
                scope.spawn(move || tally_blocks(cfg, lo..hi))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("shard panicked")).collect()
    });
    parts.iter().try_fold(TallyTable::default(), |acc, t| merge_tallies(&acc, t))
}
