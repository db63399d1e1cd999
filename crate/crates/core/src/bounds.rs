//! Necessary conditions for a CHSH violation and the no-signalling analysis.
//!
//! With uniform settings (a = b = c = d = N/4) a violation S > 2 + Δ needs
//! S′ > N/2 + δ with δ = NΔ/8, and since S′ ≤ 2·n_min + 3σ and n_min ≤ N/4
//! this forces σ > NΔ/24. No-signalling accuracy ε requires σ < εN/2, so the
//! achievable ε is bounded below by Δ/12 whatever N is.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, int, ratio, Rational};
use crate::statistics::skew;
use crate::trial_model::{require_complete, Setting, TallyTable};

/// Whether 2·n_min + 3σ > N/2 + δ. Necessary, not sufficient, for a violation
/// of magnitude δ (in count units) under uniform settings.
pub fn violation_possible(n_min: u64, sigma: u64, n: u64, delta_small: &Rational) -> bool {
    let lhs = int(2) * int(n_min) + int(3) * int(sigma);
    lhs > ratio(n, 2) + delta_small
}

/// δ = NΔ/8: the excess of S′ over N/2 corresponding to S = 2 + Δ.
pub fn delta_small(n: u64, delta: f64) -> Result<Rational> {
    Ok(int(n) * exact::nonneg_delta(delta)? / int(8))
}

/// NΔ/24, a strict lower bound on σ for any violation by Δ.
pub fn required_skew(n: u64, delta: f64) -> Result<Rational> {
    Ok(int(n) * exact::nonneg_delta(delta)? / int(24))
}

/// Δ/12, a strict lower bound on the achievable no-signalling accuracy.
pub fn epsilon_floor(delta: f64) -> Result<f64> {
    exact::nonneg_delta(delta)?;
    Ok(delta / 12.0)
}

/// Smallest integer N with N > 2/ε.
///
/// The quotient is taken in floating point so that decimal inputs behave as
/// written: `min_trials(0.01)` is 201 even though the binary value of 0.01
/// is slightly above one hundredth.
pub fn min_trials(epsilon: f64) -> Result<u64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    let q = (2.0 / epsilon).floor();
    if q >= u64::MAX as f64 {
        return Err(Error::Config(format!("epsilon {epsilon} needs more than 2^64 trials")));
    }
    Ok(q as u64 + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDelta {
    pub alpha: char,
    pub beta: char,
    /// (α·n_β − β·n_α) / (α·(α+β))
    pub value: f64,
    #[serde(with = "exact::serde_rational")]
    pub exact: Rational,
    /// True for the four pairs that share a setting at one station:
    /// (a,b), (c,d), (a,c), (b,d).
    pub physical: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairLabel {
    pub alpha: char,
    pub beta: char,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonCheck {
    pub epsilon: f64,
    pub pass: bool,
    pub pairs_failing: Vec<PairLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoSignallingReport {
    pub deltas: Vec<PairDelta>,
    /// Infimum of the ε values for which every pair meets the strict
    /// criterion. Not itself admissible unless it is zero.
    pub epsilon_achieved: f64,
    #[serde(with = "exact::serde_rational")]
    pub epsilon_achieved_exact: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub requested: Option<EpsilonCheck>,
    #[serde(skip)]
    tally: TallyTable,
}

impl NoSignallingReport {
    /// Unordered pairs with |α·n_β − β·n_α| / (α+β) ≥ ε·min(α,β).
    pub fn pairs_failing(&self, epsilon: f64) -> Result<Vec<PairLabel>> {
        let eps = match exact::from_f64(epsilon) {
            Some(e) if e > Rational::zero() => e,
            _ => return Err(Error::NonPositiveEpsilon(epsilon)),
        };
        let mut out = Vec::new();
        for (i, &x) in Setting::ALL.iter().enumerate() {
            for &y in &Setting::ALL[i + 1..] {
                if pair_criterion(&self.tally, x, y) >= eps {
                    out.push(PairLabel { alpha: x.count_label(), beta: y.count_label() });
                }
            }
        }
        Ok(out)
    }

    pub fn check(&self, epsilon: f64) -> Result<EpsilonCheck> {
        let pairs_failing = self.pairs_failing(epsilon)?;
        Ok(EpsilonCheck { epsilon, pass: pairs_failing.is_empty(), pairs_failing })
    }

    pub fn with_requested(mut self, epsilon: f64) -> Result<Self> {
        self.requested = Some(self.check(epsilon)?);
        Ok(self)
    }
}

fn cross(t: &TallyTable, x: Setting, y: Setting) -> Rational {
    // α·n_β − β·n_α with α = trials(x), β = trials(y)
    int(t.trials(x)) * int(t.corr(y)) - int(t.trials(y)) * int(t.corr(x))
}

/// |α·n_β − β·n_α| / ((α+β)·min(α,β)); the pair meets the criterion at ε
/// iff this is strictly below ε. Symmetric in the pair.
fn pair_criterion(t: &TallyTable, x: Setting, y: Setting) -> Rational {
    let (alpha, beta) = (t.trials(x), t.trials(y));
    let den = (int(alpha) + int(beta)) * int(alpha.min(beta));
    cross(t, x, y).abs() / den
}

fn is_physical(x: Setting, y: Setting) -> bool {
    let ((x1, x2), (y1, y2)) = (x.bits(), y.bits());
    x1 == y1 || x2 == y2
}

pub fn nosignalling_deltas(t: &TallyTable) -> Result<NoSignallingReport> {
    require_complete(t)?;
    let mut deltas = Vec::with_capacity(12);
    for x in Setting::ALL {
        for y in Setting::ALL {
            if x == y {
                continue;
            }
            let alpha = t.trials(x);
            let value = cross(t, x, y) / (int(alpha) * (int(alpha) + int(t.trials(y))));
            deltas.push(PairDelta {
                alpha: x.count_label(),
                beta: y.count_label(),
                value: exact::to_f64(&value),
                exact: value,
                physical: is_physical(x, y),
            });
        }
    }
    let mut eps = Rational::zero();
    for (i, &x) in Setting::ALL.iter().enumerate() {
        for &y in &Setting::ALL[i + 1..] {
            let c = pair_criterion(t, x, y);
            if c > eps {
                eps = c;
            }
        }
    }
    Ok(NoSignallingReport {
        deltas,
        epsilon_achieved: exact::to_f64(&eps),
        epsilon_achieved_exact: eps,
        requested: None,
        tally: *t,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    /// Violation magnitude Δ the bounds are evaluated for.
    pub delta: f64,
    pub delta_small: f64,
    #[serde(with = "exact::serde_rational")]
    pub delta_small_exact: Rational,
    /// σ must be strictly greater than this.
    pub required_skew: f64,
    #[serde(with = "exact::serde_rational")]
    pub required_skew_exact: Rational,
    pub sigma: u64,
    pub skew_sufficient: bool,
    /// 2·n_min + 3σ > N/2 + δ.
    pub violation_possible: bool,
    pub epsilon_floor: f64,
    /// Smallest N > 2/ε for the requested ε, when one was given.
    pub min_trials: Option<u64>,
    /// The bounds are derived for a = b = c = d; flagged when the tally differs.
    pub uniform_settings: bool,
}

/// Evaluates the necessary conditions for `t` at a requested violation
/// magnitude; with no `delta` the bounds are those for any violation (Δ = 0).
pub fn bounds_report(t: &TallyTable, delta: Option<f64>, epsilon: Option<f64>) -> Result<BoundsReport> {
    let delta = delta.unwrap_or(0.0);
    let n = u64::try_from(t.total()).map_err(|_| Error::Overflow)?;
    let sk = skew(t);
    let ds = delta_small(n, delta)?;
    let rs = required_skew(n, delta)?;
    Ok(BoundsReport {
        delta,
        delta_small: exact::to_f64(&ds),
        required_skew: exact::to_f64(&rs),
        sigma: sk.sigma,
        skew_sufficient: int(sk.sigma) > rs,
        violation_possible: violation_possible(sk.n_min, sk.sigma, n, &ds),
        delta_small_exact: ds,
        required_skew_exact: rs,
        epsilon_floor: epsilon_floor(delta)?,
        min_trials: epsilon.map(min_trials).transpose()?,
        uniform_settings: t.is_uniform(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statistics::chsh_statistic;

    const QUANTUM_EXCESS: f64 = 2.0 * std::f64::consts::SQRT_2 - 2.0;

    #[test]
    fn violation_possible_examples() {
        let zero = Rational::zero();
        assert!(violation_possible(0, 4, 16, &zero));
        assert!(!violation_possible(2, 0, 16, &zero));
        assert!(!violation_possible(4, 0, 16, &zero));
        // 2·1 + 3·2 = 8 vs 16/2 + 1/2
        assert!(!violation_possible(1, 2, 16, &ratio(1, 2)));
        assert!(violation_possible(1, 2, 15, &ratio(1, 4)));
    }

    #[test]
    fn required_skew_examples() {
        assert_eq!(required_skew(24, 1.0).unwrap(), int(1));
        assert_eq!(required_skew(16, 0.0).unwrap(), int(0));
        let r = exact::to_f64(&required_skew(8, 0.828).unwrap());
        assert!((r - 0.276).abs() < 1e-15, "{r}");
        assert!(required_skew(8, -0.5).is_err());
    }

    #[test]
    fn required_skew_is_a_third_of_delta_small() {
        for (n, d) in [(24, 1.0), (8, 0.828), (1000, QUANTUM_EXCESS), (7, 1e-9)] {
            assert_eq!(required_skew(n, d).unwrap() * int(3), delta_small(n, d).unwrap());
        }
    }

    #[test]
    fn nosignalling_worked_pair() {
        // a = b = 100, n_a = 50, n_b = 60: (100·60 − 100·50) / (100·200)
        let t = TallyTable::from_counts([100, 100, 100, 100], [50, 60, 50, 50]);
        let r = nosignalling_deltas(&t).unwrap();
        assert_eq!(r.deltas.len(), 12);
        let ab = r.deltas.iter().find(|d| d.alpha == 'a' && d.beta == 'b').unwrap();
        assert_eq!(ab.exact, ratio(1, 20));
        assert_eq!(ab.value, 0.05);
        assert!(ab.physical);
        let ba = r.deltas.iter().find(|d| d.alpha == 'b' && d.beta == 'a').unwrap();
        assert_eq!(ba.exact, ratio(-1, 20));
        let ad = r.deltas.iter().find(|d| d.alpha == 'a' && d.beta == 'd').unwrap();
        assert!(!ad.physical);
        assert_eq!(r.deltas.iter().filter(|d| d.physical).count(), 8);
    }

    #[test]
    fn nosignalling_equal_cells_are_zero() {
        let r = nosignalling_deltas(&TallyTable::uniform(7, [3; 4])).unwrap();
        assert!(r.deltas.iter().all(|d| d.exact.is_zero()));
        assert_eq!(r.epsilon_achieved, 0.0);
        // ε achieved = 0 is admissible for every positive ε
        assert!(r.check(1e-12).unwrap().pass);
    }

    #[test]
    fn nosignalling_uniform_reduction() {
        let t = TallyTable::uniform(100, [50, 60, 55, 45]);
        let r = nosignalling_deltas(&t).unwrap();
        // 2σ/N = 30/400
        assert_eq!(r.epsilon_achieved_exact, ratio(3, 40));
        assert_eq!(r.epsilon_achieved, 0.075);

        let check = r.check(0.01).unwrap();
        assert!(!check.pass);
        assert!(!check.pairs_failing.is_empty());
        // strict criterion: the infimum itself fails only the extreme pair
        let at_inf = r.check(0.075).unwrap();
        assert_eq!(at_inf.pairs_failing, vec![PairLabel { alpha: 'b', beta: 'd' }]);
        assert!(r.check(0.0751).unwrap().pass);
        assert!(r.check(0.0).is_err());
    }

    #[test]
    fn nosignalling_unbalanced_cells() {
        // deltas divide by α, the criterion by min(α, β)
        let t = TallyTable::from_counts([10, 30, 20, 40], [5, 20, 10, 20]);
        let r = nosignalling_deltas(&t).unwrap();
        let ab = r.deltas.iter().find(|d| d.alpha == 'a' && d.beta == 'b').unwrap();
        let ba = r.deltas.iter().find(|d| d.alpha == 'b' && d.beta == 'a').unwrap();
        // (10·20 − 30·5) / (10·40) = 1/8 ; (30·5 − 10·20) / (30·40) = −1/24
        assert_eq!(ab.exact, ratio(1, 8));
        assert_eq!(ba.exact, ratio(-1, 24));
        // criterion for (a,b): 50 / (40 · 10) = 1/8, the largest pair
        assert_eq!(r.epsilon_achieved_exact, ratio(1, 8));
    }

    #[test]
    fn nosignalling_rejects_empty_cell() {
        let t = TallyTable::from_counts([1, 1, 1, 0], [0; 4]);
        assert_eq!(nosignalling_deltas(&t).unwrap_err(), Error::EmptyCell(Setting::S11));
    }

    #[test]
    fn min_trials_examples() {
        assert_eq!(min_trials(0.01).unwrap(), 201);
        assert_eq!(min_trials(2.0).unwrap(), 2);
        assert_eq!(min_trials(0.5).unwrap(), 5);
        assert_eq!(min_trials(0.3).unwrap(), 7);
        assert!(min_trials(0.0).is_err());
        assert!(min_trials(-1.0).is_err());
        assert!(min_trials(f64::NAN).is_err());
        assert!(min_trials(1e-300).is_err());
    }

    #[test]
    fn epsilon_floor_examples() {
        assert_eq!(epsilon_floor(0.0).unwrap(), 0.0);
        assert!((epsilon_floor(0.828427).unwrap() - 0.069036).abs() < 5e-7);
        assert!((epsilon_floor(1.2).unwrap() - 0.1).abs() < 1e-16);
        assert!(epsilon_floor(-1.0).is_err());
    }

    #[test]
    fn bounds_report_examples() {
        let t = TallyTable::uniform(4, [4, 4, 4, 0]);
        let b = bounds_report(&t, None, Some(0.5)).unwrap();
        assert_eq!(b.delta, 0.0);
        assert!(b.violation_possible);
        assert!(b.skew_sufficient);
        assert_eq!(b.min_trials, Some(5));
        assert!(b.uniform_settings);

        // S = 4 here, so Δ = 2 is achieved exactly: δ = 4, NΔ/24 = 4/3. The
        // strict S′_max > N/2 + δ fails (12 vs 12) since S′ is not above it.
        let b = bounds_report(&t, Some(2.0), None).unwrap();
        assert_eq!(b.delta_small_exact, int(4));
        assert_eq!(b.required_skew_exact, ratio(4, 3));
        assert!(b.skew_sufficient);
        assert!(!b.violation_possible);
        assert!(bounds_report(&t, Some(1.5), None).unwrap().violation_possible);

        let t = TallyTable::uniform(4, [2; 4]);
        let b = bounds_report(&t, None, None).unwrap();
        assert_eq!(chsh_statistic(&t).unwrap().s, 0.0);
        assert!(!b.violation_possible);
        assert!(!b.skew_sufficient);
        assert_eq!(b.min_trials, None);
        assert!(bounds_report(&t, Some(-1.0), None).is_err());
    }
}
