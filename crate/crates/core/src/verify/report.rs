use std::cmp::Ordering;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Parameters outside the hypotheses of the bound being checked.
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// Whether the measured value should sit below or above the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub sigma: f64,
    pub t: Option<f64>,
    pub y0: Option<f64>,
    pub driver: String,
}

impl ParamPoint {
    pub fn new(sigma: f64, driver: impl Into<String>) -> Self {
        ParamPoint {
            sigma,
            t: None,
            y0: None,
            driver: driver.into(),
        }
    }

    pub fn at_t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn at_y0(mut self, y0: f64) -> Self {
        self.y0 = Some(y0);
        self
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        let opt = |v: Option<f64>| v.unwrap_or(f64::NEG_INFINITY);
        self.driver
            .cmp(&other.driver)
            .then(self.sigma.total_cmp(&other.sigma))
            .then(opt(self.t).total_cmp(&opt(other.t)))
            .then(opt(self.y0).total_cmp(&opt(other.y0)))
    }
}

impl fmt::Display for ParamPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} σ={}", self.driver, self.sigma)?;
        if let Some(t) = self.t {
            write!(f, " t={t}")?;
        }
        if let Some(y) = self.y0 {
            write!(f, " y={y}")?;
        }
        Ok(())
    }
}

/// One checked inequality at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub check: String,
    pub point: ParamPoint,
    pub measured: f64,
    pub bound: Option<f64>,
    pub sense: Sense,
    /// Signed distance to the bound, positive when satisfied.
    pub margin: Option<f64>,
    pub slack: f64,
    pub status: Status,
    pub runtime_ms: f64,
}

impl CheckEntry {
    /// Passes iff `margin ≥ −slack`; a NaN measurement fails.
    pub fn judged(
        check: impl Into<String>,
        point: ParamPoint,
        sense: Sense,
        measured: f64,
        bound: f64,
        slack: f64,
    ) -> Self {
        let margin = match sense {
            Sense::AtMost => bound - measured,
            Sense::AtLeast => measured - bound,
        };
        CheckEntry {
            check: check.into(),
            point,
            measured,
            bound: Some(bound),
            sense,
            margin: Some(margin),
            slack,
            status: if margin >= -slack {
                Status::Pass
            } else {
                Status::Fail
            },
            runtime_ms: 0.0,
        }
    }

    pub fn at_most(
        check: impl Into<String>,
        point: ParamPoint,
        measured: f64,
        bound: f64,
        slack: f64,
    ) -> Self {
        Self::judged(check, point, Sense::AtMost, measured, bound, slack)
    }

    pub fn at_least(
        check: impl Into<String>,
        point: ParamPoint,
        measured: f64,
        bound: f64,
        slack: f64,
    ) -> Self {
        Self::judged(check, point, Sense::AtLeast, measured, bound, slack)
    }

    /// Record a measurement without judging it.
    pub fn inconclusive(
        check: impl Into<String>,
        point: ParamPoint,
        sense: Sense,
        measured: f64,
        bound: Option<f64>,
    ) -> Self {
        let margin = bound.map(|b| match sense {
            Sense::AtMost => b - measured,
            Sense::AtLeast => measured - b,
        });
        CheckEntry {
            check: check.into(),
            point,
            measured,
            bound,
            sense,
            margin,
            slack: 0.0,
            status: Status::Inconclusive,
            runtime_ms: 0.0,
        }
    }

    pub fn with_runtime(mut self, ms: f64) -> Self {
        self.runtime_ms = ms;
        self
    }
}

/// Entries of one or more checks, sorted by check name and parameter point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VerificationReport {
    pub entries: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn new(mut entries: Vec<CheckEntry>) -> Self {
        sort_entries(&mut entries);
        VerificationReport { entries }
    }

    pub fn merge(reports: impl IntoIterator<Item = VerificationReport>) -> Self {
        Self::new(reports.into_iter().flat_map(|r| r.entries).collect())
    }

    /// No entry failed. Inconclusive entries do not count against the report.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }

    pub fn count(&self, status: Status) -> usize {
        self.entries.iter().filter(|e| e.status == status).count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn with_check<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a CheckEntry> {
        self.entries
            .iter()
            .filter(move |e| e.check.starts_with(prefix))
    }

    /// Copy with all runtimes zeroed; everything else is reproducible.
    pub fn without_runtime(&self) -> Self {
        let mut r = self.clone();
        for e in &mut r.entries {
            e.runtime_ms = 0.0;
        }
        r
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.entries)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(VerificationReport::new(serde_json::from_str(text)?))
    }

    /// CSV summary, one row per entry.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "check",
            "driver",
            "sigma",
            "t",
            "y0",
            "measured",
            "bound",
            "margin",
            "slack",
            "status",
            "runtime_ms",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        for e in &self.entries {
            w.write_record(&[
                e.check.clone(),
                e.point.driver.clone(),
                format!("{}", e.point.sigma),
                opt(e.point.t),
                opt(e.point.y0),
                format!("{:e}", e.measured),
                opt(e.bound),
                opt(e.margin),
                format!("{:e}", e.slack),
                e.status.to_string(),
                format!("{:.3}", e.runtime_ms),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-check pass/fail/inconclusive counts, in check-name order.
    pub fn summary(&self) -> Vec<(String, usize, usize, usize)> {
        let mut out: Vec<(String, usize, usize, usize)> = Vec::new();
        for e in &self.entries {
            if out.last().is_none_or(|l| l.0 != e.check) {
                out.push((e.check.clone(), 0, 0, 0));
            }
            let row = out.last_mut().expect("row pushed above");
            match e.status {
                Status::Pass => row.1 += 1,
                Status::Fail => row.2 += 1,
                Status::Inconclusive => row.3 += 1,
            }
        }
        out
    }
}

fn sort_entries(entries: &mut [CheckEntry]) {
    entries.sort_by(|a, b| {
        a.check
            .cmp(&b.check)
            .then_with(|| a.point.cmp_key(&b.point))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt() -> ParamPoint {
        ParamPoint::new(1.0, "zero").at_t(1.0)
    }

    #[test]
    fn judging() {
        assert_eq!(
            CheckEntry::at_most("a", pt(), 1.0, 1.0, 0.0).status,
            Status::Pass
        );
        assert_eq!(
            CheckEntry::at_most("a", pt(), 1.05, 1.0, 0.1).status,
            Status::Pass
        );
        assert_eq!(
            CheckEntry::at_most("a", pt(), 1.2, 1.0, 0.1).status,
            Status::Fail
        );
        assert_eq!(
            CheckEntry::at_least("a", pt(), 0.5, 1.0, 0.1).status,
            Status::Fail
        );
        assert_eq!(
            CheckEntry::at_least("a", pt(), f64::NAN, 1.0, 0.1).status,
            Status::Fail
        );
        let e = CheckEntry::at_least("a", pt(), 2.0, 1.0, 0.0);
        assert_eq!(e.margin, Some(1.0));
    }

    #[test]
    fn aggregate_and_order() {
        let r = VerificationReport::new(vec![
            CheckEntry::at_most("b", pt(), 0.0, 1.0, 0.0),
            CheckEntry::inconclusive("a", pt(), Sense::AtMost, 3.0, None),
            CheckEntry::at_most("a", ParamPoint::new(0.5, "zero"), 0.0, 1.0, 0.0),
        ]);
        assert!(r.passed());
        assert_eq!(r.entries[0].point.sigma, 0.5);
        assert_eq!(r.count(Status::Inconclusive), 1);
        assert_eq!(r.summary()[0], ("a".to_string(), 1, 0, 1));

        let mut bad = r.clone();
        bad.entries
            .push(CheckEntry::at_most("c", pt(), 2.0, 1.0, 0.0));
        assert!(!bad.passed());
        assert_eq!(bad.failures().count(), 1);
    }

    #[test]
    fn json_round_trip() {
        let r = VerificationReport::new(vec![
            CheckEntry::at_most("a", pt().at_y0(1e-3), 0.25, 1.0, 1e-3).with_runtime(1.5),
            CheckEntry::inconclusive("b", pt(), Sense::AtLeast, 0.9, None),
        ]);
        let text = r.to_json().unwrap();
        assert!(text.trim_start().starts_with('['));
        let back = VerificationReport::from_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.without_runtime().entries[0].runtime_ms, 0.0);
    }

    #[test]
    fn csv_summary() {
        let r = VerificationReport::new(vec![CheckEntry::at_most("a", pt(), 0.25, 1.0, 0.0)]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "check,driver,sigma,t,y0,measured,bound,margin,slack,status,runtime_ms\n"
        ));
        assert!(text.contains(",pass,"));
    }
}
