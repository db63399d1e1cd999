//! Exhaustive check of the violation and no-signalling necessary conditions
//! over every uniform-settings tally of a given size.
//!
//! For each tally with a = b = c = d = k and Δ = S − 2:
//!
//! * `sigma_ge_1`: S > 2 ⇒ σ ≥ 1
//! * `sigma_gt_NDelta_24`: S > 2 ⇒ σ > NΔ/24
//! * `eps_gt_Delta_12`: S > 2 ⇒ ε_achieved > Δ/12
//! * `sprime_bounds`: S′_min ≤ S′ ≤ S′_max
//! * `uniformity_no_violation`: σ = 0 ⇒ S ≤ 2
//!
//! All comparisons are exact.

use std::time::Instant;

use num_traits::Zero;
use serde::Serialize;

use crate::bounds::nosignalling_deltas;
use crate::error::{Error, Result};
use crate::exact::{int, Rational};
use crate::statistics::{chsh_exact, skew, sprime};
use crate::trial_model::TallyTable;

pub const DEFAULT_CAP: u128 = 100_000_000;

type SliceResult = Result<(u64, Vec<Counterexample>)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Condition {
    #[serde(rename = "sigma_ge_1")]
    SigmaGe1,
    #[serde(rename = "sigma_gt_NDelta_24")]
    SigmaGtNDelta24,
    #[serde(rename = "eps_gt_Delta_12")]
    EpsGtDelta12,
    #[serde(rename = "sprime_bounds")]
    SprimeBounds,
    #[serde(rename = "uniformity_no_violation")]
    UniformityNoViolation,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::SigmaGe1,
        Condition::SigmaGtNDelta24,
        Condition::EpsGtDelta12,
        Condition::SprimeBounds,
        Condition::UniformityNoViolation,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub tally: TallyTable,
    pub condition: Condition,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub checked: u64,
    pub counterexamples: Vec<Counterexample>,
    pub elapsed_seconds: f64,
}

impl CounterexampleReport {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

fn domain_size(n_per_setting: u64) -> u128 {
    let side = n_per_setting as u128 + 1;
    side.saturating_mul(side).saturating_mul(side).saturating_mul(side)
}

fn check_domain(n_per_setting: u64, cap: u128) -> Result<()> {
    if n_per_setting == 0 {
        return Err(Error::Config("n_per_setting must be at least 1".into()));
    }
    let requested = domain_size(n_per_setting);
    if requested > cap {
        return Err(Error::EnumerationCap { requested, cap });
    }
    Ok(())
}

/// All tallies with `n_per_setting` trials per cell, correlated counts in
/// lexicographic order (n00 slowest).
pub fn enumerate_uniform_tallies(n_per_setting: u64) -> Result<impl Iterator<Item = TallyTable>> {
    enumerate_uniform_tallies_capped(n_per_setting, DEFAULT_CAP)
}

pub fn enumerate_uniform_tallies_capped(
    n_per_setting: u64,
    cap: u128,
) -> Result<impl Iterator<Item = TallyTable>> {
    check_domain(n_per_setting, cap)?;
    Ok((0..=n_per_setting).flat_map(move |n00| with_first(n_per_setting, n00)))
}

fn with_first(k: u64, n00: u64) -> impl Iterator<Item = TallyTable> {
    (0..=k).flat_map(move |n01| {
        (0..=k).flat_map(move |n10| (0..=k).map(move |n11| TallyTable::uniform(k, [n00, n01, n10, n11])))
    })
}

/// Conditions failed by one uniform tally.
pub fn failed_conditions(t: &TallyTable) -> Result<Vec<Condition>> {
    let mut failed = Vec::new();
    let s = chsh_exact(t)?;
    let excess = &s - int(2);
    let violated = excess > Rational::zero();
    let sk = skew(t);
    let sp = sprime(t);
    let n = int(t.total());

    if violated {
        if sk.sigma < 1 {
            failed.push(Condition::SigmaGe1);
        }
        if int(sk.sigma) * int(24) <= &n * &excess {
            failed.push(Condition::SigmaGtNDelta24);
        }
        let eps = nosignalling_deltas(t)?.epsilon_achieved_exact;
        if eps * int(12) <= excess {
            failed.push(Condition::EpsGtDelta12);
        }
    }
    if !(sp.s_prime_min <= sp.s_prime && sp.s_prime <= sp.s_prime_max) {
        failed.push(Condition::SprimeBounds);
    }
    if sk.sigma == 0 && violated {
        failed.push(Condition::UniformityNoViolation);
    }
    Ok(failed)
}

pub fn verify_necessary_conditions(n_per_setting: u64) -> Result<CounterexampleReport> {
    verify_necessary_conditions_with(n_per_setting, DEFAULT_CAP, default_workers())
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Splits the outermost count across `workers` threads; counterexamples are
/// reported in enumeration order regardless of `workers`.
pub fn verify_necessary_conditions_with(
    n_per_setting: u64,
    cap: u128,
    workers: usize,
) -> Result<CounterexampleReport> {
    check_domain(n_per_setting, cap)?;
    let start = Instant::now();
    let k = n_per_setting;
    let workers = (workers.max(1) as u64).min(k + 1);

    let run_slice = |first: u64| -> SliceResult {
        let mut checked = 0;
        let mut found = Vec::new();
        for t in with_first(k, first) {
            checked += 1;
            for condition in failed_conditions(&t)? {
                found.push(Counterexample { tally: t, condition });
            }
        }
        Ok((checked, found))
    };

    let mut slices: Vec<(u64, SliceResult)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let run_slice = &run_slice;
                scope.spawn(move || {
                    (w..=k)
                        .step_by(workers as usize)
                        .map(|first| (first, run_slice(first)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("oracle worker panicked"))
            .collect()
    });
    slices.sort_by_key(|(first, _)| *first);

    let mut checked = 0;
    let mut counterexamples = Vec::new();
    for (_, slice) in slices {
        let (c, found) = slice?;
        checked += c;
        counterexamples.extend(found);
    }
    Ok(CounterexampleReport {
        checked,
        counterexamples,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_sizes_and_order() {
        assert_eq!(enumerate_uniform_tallies(1).unwrap().count(), 16);
        assert_eq!(enumerate_uniform_tallies(4).unwrap().count(), 625);
        let mut it = enumerate_uniform_tallies(3).unwrap();
        assert_eq!(it.next().unwrap(), TallyTable::uniform(3, [0; 4]));
        assert_eq!(it.next().unwrap(), TallyTable::uniform(3, [0, 0, 0, 1]));
        assert_eq!(it.last().unwrap(), TallyTable::uniform(3, [3; 4]));
    }

    #[test]
    fn enumeration_cap() {
        assert!(matches!(
            enumerate_uniform_tallies(100_000_000),
            Err(Error::EnumerationCap { .. })
        ));
        assert!(enumerate_uniform_tallies_capped(4, 624).is_err());
        assert!(enumerate_uniform_tallies_capped(4, 625).is_ok());
        assert!(enumerate_uniform_tallies(0).is_err());
        assert!(verify_necessary_conditions(u64::MAX).is_err());
    }

    #[test]
    fn small_domains_have_no_counterexamples() {
        for (k, expect) in [(1, 16), (4, 625), (6, 2401)] {
            let r = verify_necessary_conditions(k).unwrap();
            assert_eq!(r.checked, expect);
            assert!(r.holds(), "{:?}", r.counterexamples);
        }
    }

    #[test]
    fn worker_count_does_not_change_report() {
        let a = verify_necessary_conditions_with(5, DEFAULT_CAP, 1).unwrap();
        let b = verify_necessary_conditions_with(5, DEFAULT_CAP, 4).unwrap();
        assert_eq!(a.checked, b.checked);
        assert_eq!(a.counterexamples, b.counterexamples);
    }

    #[test]
    fn detects_a_planted_failure() {
        // Non-uniform tally with σ = 0 and S > 2 is outside the domain, but the
        // checker must still flag it.
        let t = TallyTable::from_counts([1, 1, 1, 4], [1, 1, 1, 1]);
        let failed = failed_conditions(&t).unwrap();
        assert!(failed.contains(&Condition::SigmaGe1));
        assert!(failed.contains(&Condition::UniformityNoViolation));
    }
}
