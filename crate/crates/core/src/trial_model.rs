//! Trials, tallies and their text formats.
//!
//! A trial is two setting bits and two ±1 outcomes. A trial is *correlated*
//! when `o1 * o2 == +1`. Tallies aggregate trials into the eight counts of a
//! CHSH run: trials per setting cell (`a`, `b`, `c`, `d` for `00`, `01`,
//! `10`, `11`) and correlated results per cell (`n00` .. `n11`).

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the four setting cells of a two-station, two-setting experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Setting {
    #[serde(rename = "00")]
    S00,
    #[serde(rename = "01")]
    S01,
    #[serde(rename = "10")]
    S10,
    #[serde(rename = "11")]
    S11,
}

impl Setting {
    pub const ALL: [Setting; 4] = [Setting::S00, Setting::S01, Setting::S10, Setting::S11];

    pub fn from_bits(s1: u8, s2: u8) -> Setting {
        match (s1 & 1, s2 & 1) {
            (0, 0) => Setting::S00,
            (0, 1) => Setting::S01,
            (1, 0) => Setting::S10,
            _ => Setting::S11,
        }
    }

    pub fn bits(self) -> (u8, u8) {
        match self {
            Setting::S00 => (0, 0),
            Setting::S01 => (0, 1),
            Setting::S10 => (1, 0),
            Setting::S11 => (1, 1),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Letter naming the cell's trial count: `a`, `b`, `c` or `d`.
    pub fn count_label(self) -> char {
        ['a', 'b', 'c', 'd'][self.index()]
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (s1, s2) = self.bits();
        write!(f, "{s1}{s2}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrialRecord {
    s1: u8,
    s2: u8,
    o1: i8,
    o2: i8,
}

impl TrialRecord {
    pub fn new(s1: u8, s2: u8, o1: i8, o2: i8) -> Result<Self> {
        check_domain(0, s1 as i64, o1 as i64, s2 as i64, o2 as i64)?;
        Ok(Self { s1, s2, o1, o2 })
    }

    pub(crate) fn from_parts(setting: Setting, o1: i8, o2: i8) -> Self {
        let (s1, s2) = setting.bits();
        Self { s1, s2, o1, o2 }
    }

    pub fn s1(&self) -> u8 {
        self.s1
    }
    pub fn s2(&self) -> u8 {
        self.s2
    }
    pub fn o1(&self) -> i8 {
        self.o1
    }
    pub fn o2(&self) -> i8 {
        self.o2
    }

    pub fn setting(&self) -> Setting {
        Setting::from_bits(self.s1, self.s2)
    }

    pub fn is_correlated(&self) -> bool {
        self.o1 * self.o2 == 1
    }

    pub fn to_jsonl(&self) -> String {
        format!(
            "{{\"s1\":{},\"s2\":{},\"o1\":{},\"o2\":{}}}",
            self.s1, self.s2, self.o1, self.o2
        )
    }

    pub fn to_csv(&self) -> String {
        format!("{},{},{},{}", self.s1, self.s2, self.o1, self.o2)
    }

    pub fn to_line(&self, format: TrialFormat) -> String {
        match format {
            TrialFormat::Jsonl => self.to_jsonl(),
            TrialFormat::Csv => self.to_csv(),
        }
    }
}

fn check_domain(line: usize, s1: i64, o1: i64, s2: i64, o2: i64) -> Result<()> {
    for (field, v) in [("s1", s1), ("s2", s2)] {
        if v != 0 && v != 1 {
            return Err(Error::OutOfDomain { line, field, value: v });
        }
    }
    for (field, v) in [("o1", o1), ("o2", o2)] {
        if v != 1 && v != -1 {
            return Err(Error::OutOfDomain { line, field, value: v });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialFormat {
    Jsonl,
    Csv,
}

impl FromStr for TrialFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(TrialFormat::Jsonl),
            "csv" => Ok(TrialFormat::Csv),
            other => Err(Error::Config(format!("unknown trial format `{other}`"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrial {
    s1: i64,
    s2: i64,
    o1: i64,
    o2: i64,
}

/// Parses one trial. `line_no` is 1-based and only used in error messages.
pub fn parse_trial_line(line: &str, format: TrialFormat, line_no: usize) -> Result<TrialRecord> {
    let malformed = |msg: String| Error::Malformed { line: line_no, msg };
    let raw = match format {
        TrialFormat::Jsonl => serde_json::from_str::<RawTrial>(line.trim())
            .map_err(|e| malformed(e.to_string()))?,
        TrialFormat::Csv => {
            let fields: Vec<&str> = line.trim().split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(malformed(format!("expected 4 fields, found {}", fields.len())));
            }
            let mut v = [0i64; 4];
            for (slot, f) in v.iter_mut().zip(&fields) {
                *slot = f
                    .parse()
                    .map_err(|_| malformed(format!("`{f}` is not an integer")))?;
            }
            RawTrial { s1: v[0], s2: v[1], o1: v[2], o2: v[3] }
        }
    };
    check_domain(line_no, raw.s1, raw.o1, raw.s2, raw.o2)?;
    Ok(TrialRecord {
        s1: raw.s1 as u8,
        s2: raw.s2 as u8,
        o1: raw.o1 as i8,
        o2: raw.o2 as i8,
    })
}

/// Reads every trial from `reader`. Blank lines are skipped; with `header`
/// the first line is discarded unread.
pub fn read_trials<R: BufRead>(reader: R, format: TrialFormat, header: bool) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for_each_trial(reader, format, header, |t| out.push(t))?;
    Ok(out)
}

/// Streams trials into a tally without materializing them.
pub fn tally_from_reader<R: BufRead>(reader: R, format: TrialFormat, header: bool) -> Result<TallyTable> {
    let mut tally = TallyTable::default();
    for_each_trial(reader, format, header, |t| tally.record(&t))?;
    Ok(tally)
}

fn for_each_trial<R: BufRead>(
    reader: R,
    format: TrialFormat,
    header: bool,
    mut f: impl FnMut(TrialRecord),
) -> Result<()> {
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Malformed { line: line_no, msg: e.to_string() })?;
        if header && i == 0 {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        f(parse_trial_line(&line, format, line_no)?);
    }
    Ok(())
}

/// Trial and correlated-result counts per setting cell.
///
/// Fields are public so that out-of-range values can be represented and
/// reported by [`validate_tally`]; statistics reject invalid tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TallyTable {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub n00: u64,
    pub n01: u64,
    pub n10: u64,
    pub n11: u64,
}

impl TallyTable {
    /// Builds a tally from per-cell trial and correlated counts, in
    /// `00, 01, 10, 11` order.
    pub fn from_counts(trials: [u64; 4], corr: [u64; 4]) -> Self {
        Self {
            a: trials[0],
            b: trials[1],
            c: trials[2],
            d: trials[3],
            n00: corr[0],
            n01: corr[1],
            n10: corr[2],
            n11: corr[3],
        }
    }

    /// Equal trial count `per_setting` in every cell.
    pub fn uniform(per_setting: u64, corr: [u64; 4]) -> Self {
        Self::from_counts([per_setting; 4], corr)
    }

    pub fn trials(&self, s: Setting) -> u64 {
        self.trial_counts()[s.index()]
    }

    pub fn corr(&self, s: Setting) -> u64 {
        self.corr_counts()[s.index()]
    }

    pub fn anti_corr(&self, s: Setting) -> u64 {
        self.trials(s).saturating_sub(self.corr(s))
    }

    pub fn trial_counts(&self) -> [u64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn corr_counts(&self) -> [u64; 4] {
        [self.n00, self.n01, self.n10, self.n11]
    }

    /// N = a + b + c + d, widened so that it cannot overflow.
    pub fn total(&self) -> u128 {
        self.trial_counts().iter().map(|&x| x as u128).sum()
    }

    pub fn is_uniform(&self) -> bool {
        self.a == self.b && self.b == self.c && self.c == self.d
    }

    pub fn record(&mut self, trial: &TrialRecord) {
        let corr = trial.is_correlated() as u64;
        match trial.setting() {
            Setting::S00 => {
                self.a += 1;
                self.n00 += corr;
            }
            Setting::S01 => {
                self.b += 1;
                self.n01 += corr;
            }
            Setting::S10 => {
                self.c += 1;
                self.n10 += corr;
            }
            Setting::S11 => {
                self.d += 1;
                self.n11 += corr;
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tally serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Malformed { line: e.line(), msg: e.to_string() })
    }
}

pub fn tally_from_trials<'a, I>(trials: I) -> TallyTable
where
    I: IntoIterator<Item = &'a TrialRecord>,
{
    let mut t = TallyTable::default();
    for trial in trials {
        t.record(trial);
    }
    t
}

pub fn merge_tallies(t1: &TallyTable, t2: &TallyTable) -> Result<TallyTable> {
    let add = |x: u64, y: u64| x.checked_add(y).ok_or(Error::Overflow);
    Ok(TallyTable {
        a: add(t1.a, t2.a)?,
        b: add(t1.b, t2.b)?,
        c: add(t1.c, t2.c)?,
        d: add(t1.d, t2.d)?,
        n00: add(t1.n00, t2.n00)?,
        n01: add(t1.n01, t2.n01)?,
        n10: add(t1.n10, t2.n10)?,
        n11: add(t1.n11, t2.n11)?,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellProblem {
    pub setting: Setting,
    pub corr: u64,
    pub trials: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationStatus {
    Valid,
    ValidWithWarnings,
    Invalid,
}

/// Outcome of [`validate_tally`]: bound violations (`n > trials`) and
/// empty cells, which leave E undefined for that setting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TallyValidation {
    pub status: ValidationStatus,
    pub violations: Vec<CellProblem>,
    pub empty_cells: Vec<Setting>,
}

impl TallyValidation {
    pub fn is_valid(&self) -> bool {
        self.status != ValidationStatus::Invalid
    }
}

pub fn validate_tally(t: &TallyTable) -> TallyValidation {
    let mut violations = Vec::new();
    let mut empty_cells = Vec::new();
    for s in Setting::ALL {
        let (trials, corr) = (t.trials(s), t.corr(s));
        if corr > trials {
            violations.push(CellProblem { setting: s, corr, trials });
        }
        if trials == 0 {
            empty_cells.push(s);
        }
    }
    let status = if !violations.is_empty() {
        ValidationStatus::Invalid
    } else if !empty_cells.is_empty() {
        ValidationStatus::ValidWithWarnings
    } else {
        ValidationStatus::Valid
    };
    TallyValidation { status, violations, empty_cells }
}

/// Fails on the first bound violation or empty cell.
pub(crate) fn require_complete(t: &TallyTable) -> Result<()> {
    for s in Setting::ALL {
        let (trials, corr) = (t.trials(s), t.corr(s));
        if trials == 0 {
            return Err(Error::EmptyCell(s));
        }
        if corr > trials {
            return Err(Error::CountExceedsTrials { corr, trials });
        }
    }
    Ok(())
}
