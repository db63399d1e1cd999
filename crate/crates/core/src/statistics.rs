//! Correlation coefficients and CHSH test statistics.
//!
//! Float results are rounded once from exact rational values, so identical
//! quantities computed along different algebraic routes compare equal.
//! Count statistics (σ, S′ and its bounds) are exact integers, and the
//! violation flag is decided in exact arithmetic.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, int, ratio, Rational};
use crate::trial_model::{require_complete, Setting, TallyTable};

/// Range of the four correlated counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Skew {
    pub sigma: u64,
    pub n_max: u64,
    pub n_min: u64,
}

/// S′ = n00 + n01 + n10 − n11 with the bounds implied by the skew alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SPrime {
    pub s_prime: i128,
    pub s_prime_max: i128,
    pub s_prime_min: i128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshSummary {
    pub e00: f64,
    pub e01: f64,
    pub e10: f64,
    pub e11: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "S_exact", with = "exact::serde_rational")]
    pub s_exact: Rational,
    pub sigma: u64,
    pub n_max: u64,
    pub n_min: u64,
    pub s_prime: i128,
    pub s_prime_max: i128,
    pub s_prime_min: i128,
    /// S > 2, strictly.
    pub violated: bool,
    /// Δ = max(0, S − 2).
    pub violation_magnitude: f64,
}

impl ChshSummary {
    pub fn correlations(&self) -> [f64; 4] {
        [self.e00, self.e01, self.e10, self.e11]
    }

    /// E00 + E01 + E10 − E11 evaluated in floating point from the rounded
    /// coefficients.
    pub fn e_sum(&self) -> f64 {
        self.e00 + self.e01 + self.e10 - self.e11
    }
}

/// E = 2·corr/trials − 1.
pub fn correlation_coefficient(corr_count: u64, trial_count: u64) -> Result<f64> {
    if trial_count == 0 {
        return Err(Error::Config("correlation coefficient of an empty cell".into()));
    }
    if corr_count > trial_count {
        return Err(Error::CountExceedsTrials { corr: corr_count, trials: trial_count });
    }
    Ok(2.0 * corr_count as f64 / trial_count as f64 - 1.0)
}

/// Exact S = 2(n00/a + n01/b + n10/c − n11/d − 1). Cells must be nonempty.
pub fn chsh_exact(t: &TallyTable) -> Result<Rational> {
    require_complete(t)?;
    let p = |s: Setting| ratio(t.corr(s), t.trials(s));
    let inner = p(Setting::S00) + p(Setting::S01) + p(Setting::S10) - p(Setting::S11) - Rational::one();
    Ok(int(2) * inner)
}

pub fn chsh_statistic(t: &TallyTable) -> Result<ChshSummary> {
    let s_exact = chsh_exact(t)?;
    let e = |s: Setting| correlation_coefficient(t.corr(s), t.trials(s));
    let two = int(2);
    let excess = &s_exact - &two;
    let violated = excess > Rational::zero();
    let Skew { sigma, n_max, n_min } = skew(t);
    let sp = sprime(t);
    Ok(ChshSummary {
        e00: e(Setting::S00)?,
        e01: e(Setting::S01)?,
        e10: e(Setting::S10)?,
        e11: e(Setting::S11)?,
        s: exact::to_f64(&s_exact),
        violation_magnitude: if violated { exact::to_f64(&excess) } else { 0.0 },
        s_exact,
        sigma,
        n_max,
        n_min,
        s_prime: sp.s_prime,
        s_prime_max: sp.s_prime_max,
        s_prime_min: sp.s_prime_min,
        violated,
    })
}

/// S when every setting has the same correlation probability `p`.
pub fn uniform_prob_s(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    Ok(2.0 * (2.0 * p - 1.0))
}

pub fn skew(t: &TallyTable) -> Skew {
    let n = t.corr_counts();
    let n_max = *n.iter().max().unwrap();
    let n_min = *n.iter().min().unwrap();
    Skew { sigma: n_max - n_min, n_max, n_min }
}

pub fn sprime(t: &TallyTable) -> SPrime {
    let [n00, n01, n10, n11] = t.corr_counts().map(i128::from);
    let Skew { sigma, n_min, .. } = skew(t);
    let (sigma, n_min) = (sigma as i128, n_min as i128);
    SPrime {
        s_prime: n00 + n01 + n10 - n11,
        s_prime_max: 2 * n_min + 3 * sigma,
        s_prime_min: 2 * n_min - sigma,
    }
}

/// Exact (8/N)(S′ − N/4), valid under uniform settings a = b = c = d = N/4.
pub fn chsh_from_sprime_exact(s_prime: i128, n: u64) -> Result<Rational> {
    if n == 0 || !n.is_multiple_of(4) {
        return Err(Error::NotUniform(n));
    }
    Ok(ratio(8, n) * (int(s_prime) - int(n / 4)))
}

pub fn chsh_from_sprime(s_prime: i128, n: u64) -> Result<f64> {
    chsh_from_sprime_exact(s_prime, n).map(|s| exact::to_f64(&s))
}

/// Counts for Bell's original three-setting inequality.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeSettingTally {
    pub trials_ac: u64,
    pub trials_ba: u64,
    pub trials_bc: u64,
    pub corr_ac: u64,
    pub corr_ba: u64,
    pub corr_bc: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bell1964 {
    /// E_ac − E_ba − E_bc; local realism bounds this by 1.
    pub b_corr: f64,
    /// n_ac/N_ac − n_ba/N_ba − n_bc/N_bc; local realism bounds this by 0.
    pub b_frac: f64,
    #[serde(with = "exact::serde_rational")]
    pub b_frac_exact: Rational,
    pub violated: bool,
}

pub fn bell1964_statistic(t: &ThreeSettingTally) -> Result<Bell1964> {
    let cells = [
        (t.corr_ac, t.trials_ac),
        (t.corr_ba, t.trials_ba),
        (t.corr_bc, t.trials_bc),
    ];
    for &(corr, trials) in &cells {
        if trials == 0 {
            return Err(Error::Config("three-setting tally has an empty setting pair".into()));
        }
        if corr > trials {
            return Err(Error::CountExceedsTrials { corr, trials });
        }
    }
    let [ac, ba, bc] = cells.map(|(n, m)| ratio(n, m));
    let b_frac = ac - ba - bc;
    let b_corr = int(2) * &b_frac + Rational::one();
    Ok(Bell1964 {
        b_corr: exact::to_f64(&b_corr),
        b_frac: exact::to_f64(&b_frac),
        violated: b_frac > Rational::zero(),
        b_frac_exact: b_frac,
    })
}
