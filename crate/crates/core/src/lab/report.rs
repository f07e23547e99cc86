//! Scaling reports: data rows, checks with verdicts, least-squares slopes and
//! the CSV form they round-trip through.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares fit of `log2 value` against `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest deviation of a point from the fitted line, in `log2` units.
    pub residual: f64,
}

/// Needs at least four rows, all values positive.
pub fn fit_slope(rows: &[(f64, f64)]) -> Result<SlopeFit> {
    if rows.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "a slope fit needs at least 4 rows, got {}",
            rows.len()
        )));
    }
    if let Some(&(x, v)) = rows.iter().find(|(x, v)| !(*v > 0.0) || !v.is_finite() || !x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "cannot fit log2 of value {v} at x = {x}"
        )));
    }
    let m = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.log2()).collect();
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - xm).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all x values coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(SlopeFit {
        slope,
        intercept,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Fitted `log2` slope against `x`.
    Slope,
    /// Largest over smallest value.
    Spread,
    Min,
    Max,
    LastOverFirst,
    /// A number computed outside the rows.
    Value,
}

/// Which column a statistic reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Ratio,
    Numerator,
    Denominator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `observed <= predicted + tolerance`
    AtMost,
    /// `observed >= predicted - tolerance`
    AtLeast,
    /// `|observed - predicted| <= tolerance`
    Within,
    /// `observed > predicted`
    Greater,
    /// Reported without a verdict.
    Info,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Na,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataRow {
    pub x: f64,
    pub numerator: f64,
    pub denominator: f64,
}

impl DataRow {
    pub fn ratio(&self) -> f64 {
        self.numerator / self.denominator
    }

    fn get(&self, target: Target) -> f64 {
        match target {
            Target::Ratio => self.ratio(),
            Target::Numerator => self.numerator,
            Target::Denominator => self.denominator,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub statistic: Statistic,
    pub target: Target,
    pub observed: f64,
    pub predicted: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub intercept: Option<f64>,
    pub residual: Option<f64>,
}

impl Check {
    pub fn verdict(&self) -> Verdict {
        let (o, p, t) = (self.observed, self.predicted, self.tolerance);
        if self.comparison == Comparison::Info {
            return Verdict::Na;
        }
        let ok = match self.comparison {
            Comparison::AtMost => o <= p + t,
            Comparison::AtLeast => o >= p - t,
            Comparison::Within => (o - p).abs() <= t,
            Comparison::Greater => o > p,
            Comparison::Info => unreachable!(),
        };
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Rows of `(x, numerator, denominator)` for one experiment, exponent and
/// family, with the checks evaluated on them.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub n: usize,
    pub p: Option<f64>,
    pub s: Option<f64>,
    pub family: String,
    pub rows: Vec<DataRow>,
    pub checks: Vec<Check>,
}

fn statistic(rows: &[DataRow], statistic: Statistic, target: Target) -> (f64, Option<f64>, Option<f64>) {
    let vals: Vec<f64> = rows.iter().map(|r| r.get(target)).collect();
    let nan = (f64::NAN, None, None);
    if vals.is_empty() {
        return nan;
    }
    match statistic {
        Statistic::Slope => {
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| r.x).zip(vals).collect();
            match fit_slope(&pts) {
                Ok(fit) => (fit.slope, Some(fit.intercept), Some(fit.residual)),
                Err(_) => nan,
            }
        }
        Statistic::Spread => {
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if lo > 0.0 {
                (hi / lo, None, None)
            } else {
                nan
            }
        }
        Statistic::Min => (vals.iter().cloned().fold(f64::INFINITY, f64::min), None, None),
        Statistic::Max => (vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max), None, None),
        Statistic::LastOverFirst => (vals[vals.len() - 1] / vals[0], None, None),
        Statistic::Value => nan,
    }
}

impl Report {
    pub fn new(experiment: &str, n: usize, p: Option<f64>, s: Option<f64>, family: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            n,
            p,
            s,
            family: family.to_string(),
            rows: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, x: f64, numerator: f64, denominator: f64) {
        self.rows.push(DataRow {
            x,
            numerator,
            denominator,
        });
    }

    /// Adds a check whose observed value is computed from the rows.
    pub fn check(
        &mut self,
        name: &str,
        stat: Statistic,
        target: Target,
        predicted: f64,
        tolerance: f64,
        comparison: Comparison,
    ) {
        let (observed, intercept, residual) = statistic(&self.rows, stat, target);
        self.checks.push(Check {
            name: name.to_string(),
            statistic: stat,
            target,
            observed,
            predicted,
            tolerance,
            comparison,
            intercept,
            residual,
        });
    }

    /// Adds a check on a value computed elsewhere.
    pub fn check_value(
        &mut self,
        name: &str,
        observed: f64,
        predicted: f64,
        tolerance: f64,
        comparison: Comparison,
    ) {
        self.checks.push(Check {
            name: name.to_string(),
            statistic: Statistic::Value,
            target: Target::Ratio,
            observed,
            predicted,
            tolerance,
            comparison,
            intercept: None,
            residual: None,
        });
    }

    /// True when no check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict() != Verdict::Fail)
    }

    /// The same report with every row-derived statistic recomputed.
    pub fn refit(&self) -> Report {
        let mut out = self.clone();
        for c in &mut out.checks {
            if c.statistic != Statistic::Value {
                let (o, i, r) = statistic(&self.rows, c.statistic, c.target);
                c.observed = o;
                c.intercept = i;
                c.residual = r;
            }
        }
        out
    }

    /// `<experiment>_<n>_<p>_<s>`, with `na` for absent exponents.
    pub fn file_stem(&self) -> String {
        let f = |v: Option<f64>| v.map_or("na".to_string(), |x| format!("{}", x + 0.0));
        format!("{}_{}_{}_{}", self.experiment, self.n, f(self.p), f(self.s))
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let primary = self.checks.first();
        for r in &self.rows {
            w.serialize(self.record(Record {
                record: "data".into(),
                x: Some(r.x),
                numerator: Some(r.numerator),
                denominator: Some(r.denominator),
                ratio: Some(r.ratio()),
                observed: primary.map(|c| c.observed),
                predicted: primary.map(|c| c.predicted),
                ..Record::default()
            }))
            .map_err(csv_error)?;
        }
        for c in &self.checks {
            w.serialize(self.record(Record {
                record: "check".into(),
                check: Some(c.name.clone()),
                statistic: Some(c.statistic),
                target: Some(c.target),
                observed: Some(c.observed),
                predicted: Some(c.predicted),
                tolerance: Some(c.tolerance),
                comparison: Some(c.comparison),
                verdict: Some(c.verdict()),
                intercept: c.intercept,
                residual: c.residual,
                ..Record::default()
            }))
            .map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
    }

    fn record(&self, mut r: Record) -> Record {
        r.experiment = self.experiment.clone();
        r.n = self.n;
        r.p = self.p;
        r.s = self.s;
        r.family = self.family.clone();
        r
    }

    pub fn from_csv(text: &str) -> Result<Report> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let mut report: Option<Report> = None;
        for rec in rd.deserialize::<Record>() {
            let rec = rec.map_err(csv_error)?;
            let rep = report.get_or_insert_with(|| {
                Report::new(&rec.experiment, rec.n, rec.p, rec.s, &rec.family)
            });
            if rec.experiment != rep.experiment || rec.n != rep.n || rec.family != rep.family {
                return Err(Error::Format("a CSV file holds exactly one report".into()));
            }
            let missing = |what: &str| Error::Format(format!("{} row without {what}", rec.record));
            match rec.record.as_str() {
                "data" => rep.push(
                    rec.x.ok_or_else(|| missing("x"))?,
                    rec.numerator.ok_or_else(|| missing("numerator"))?,
                    rec.denominator.ok_or_else(|| missing("denominator"))?,
                ),
                "check" => rep.checks.push(Check {
                    name: rec.check.clone().ok_or_else(|| missing("check"))?,
                    statistic: rec.statistic.ok_or_else(|| missing("statistic"))?,
                    target: rec.target.ok_or_else(|| missing("target"))?,
                    observed: rec.observed.ok_or_else(|| missing("observed"))?,
                    predicted: rec.predicted.ok_or_else(|| missing("predicted"))?,
                    tolerance: rec.tolerance.ok_or_else(|| missing("tolerance"))?,
                    comparison: rec.comparison.ok_or_else(|| missing("comparison"))?,
                    intercept: rec.intercept,
                    residual: rec.residual,
                }),
                other => return Err(Error::Format(format!("unknown record kind {other:?}"))),
            }
        }
        report.ok_or_else(|| Error::Format("empty report".into()))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// One CSV line; data rows leave the check columns empty and vice versa.
#[derive(Debug, Default, Serialize, Deserialize)]
struct Record {
    record: String,
    experiment: String,
    n: usize,
    p: Option<f64>,
    s: Option<f64>,
    family: String,
    x: Option<f64>,
    numerator: Option<f64>,
    denominator: Option<f64>,
    ratio: Option<f64>,
    check: Option<String>,
    statistic: Option<Statistic>,
    target: Option<Target>,
    observed: Option<f64>,
    predicted: Option<f64>,
    tolerance: Option<f64>,
    comparison: Option<Comparison>,
    verdict: Option<Verdict>,
    intercept: Option<f64>,
    residual: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_powers_fit_exactly() {
        let rows: Vec<(f64, f64)> = (3..9).map(|k| (k as f64, (k as f64).exp2())).collect();
        let fit = fit_slope(&rows).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-14);
        assert!(fit.residual < 1e-13);
        let flat: Vec<(f64, f64)> = (0..5).map(|k| (k as f64, 3.0)).collect();
        assert!(fit_slope(&flat).unwrap().slope.abs() < 1e-15);
    }

    #[test]
    fn noisy_half_power_fits_within_two_hundredths() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let rows: Vec<(f64, f64)> = (3..9)
                .map(|k| {
                    let noise = 1.0 + rng.gen_range(-0.01..0.01);
                    (k as f64, 1.7 * (0.5 * k as f64).exp2() * noise)
                })
                .collect();
            assert!((fit_slope(&rows).unwrap().slope - 0.5).abs() < 0.02);
        }
    }

    #[test]
    fn degenerate_fits_are_errors() {
        assert!(fit_slope(&[(1.0, 1.0), (2.0, 2.0), (3.0, 4.0)]).is_err());
        assert!(fit_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 4.0), (4.0, 8.0)]).is_err());
        assert!(fit_slope(&[(1.0, 1.0), (1.0, 2.0), (1.0, 4.0), (1.0, 8.0)]).is_err());
    }

    fn sample() -> Report {
        let mut r = Report::new("demo", 2, Some(1.25), Some(0.6), "packets");
        for k in 3..8 {
            r.push(k as f64, (0.3 * k as f64).exp2(), 1.0 / 3.0);
        }
        r.check("slope", Statistic::Slope, Target::Ratio, 0.25, 0.1, Comparison::Within);
        r.check("spread", Statistic::Spread, Target::Numerator, 2.0, 0.0, Comparison::AtMost);
        r.check_value("extra", 0.1, 0.0, 0.0, Comparison::Info);
        r
    }

    #[test]
    fn verdicts_follow_the_comparisons() {
        let r = sample();
        assert_eq!(r.checks[0].verdict(), Verdict::Pass);
        assert_eq!(r.checks[1].verdict(), Verdict::Fail);
        assert_eq!(r.checks[2].verdict(), Verdict::Na);
        assert!(!r.passed());
        let mut c = r.checks[0].clone();
        c.observed = f64::NAN;
        assert_eq!(c.verdict(), Verdict::Fail);
    }

    #[test]
    fn csv_roundtrip_is_lossless() {
        let r = sample();
        let text = r.to_csv().unwrap();
        let back = Report::from_csv(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_csv().unwrap(), text);
        assert_eq!(back.refit(), r);
        assert_eq!(r.file_stem(), "demo_2_1.25_0.6");
        assert!(text.starts_with("record,experiment,n,p,s,family,x,"));
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(Report::from_csv("").is_err());
        let text = sample().to_csv().unwrap().replace("data,demo", "bogus,demo");
        assert!(Report::from_csv(&text).is_err());
    }

    proptest! {
        #[test]
        fn slope_recovers_linear_logs(a in -3.0f64..3.0, b in -5.0f64..5.0) {
            let rows: Vec<(f64, f64)> = (0..6).map(|k| (k as f64, (a * k as f64 + b).exp2())).collect();
            let fit = fit_slope(&rows).unwrap();
            prop_assert!((fit.slope - a).abs() < 1e-10);
            prop_assert!((fit.intercept - b).abs() < 1e-10);
        }
    }
}
