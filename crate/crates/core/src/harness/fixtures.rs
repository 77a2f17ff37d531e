//! Reference confusion matrices shipped with the crate and the check that
//! the metrics module reproduces their published accuracies.
//!
//! Published values are decimal strings and comparisons are exact rational
//! arithmetic, so values lying exactly on the tolerance boundary (such as
//! 1530/1600 = 0.95625 against 0.9563) are decided without float noise.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{accuracy, binary_collapse, ConfusionMatrix4};

pub const REFERENCE_FIXTURES: &str = include_str!("../../fixtures/published_confusion_matrices.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureFile {
    pub version: u32,
    pub tolerance: String,
    pub matrices: Vec<FixtureMatrix>,
    #[serde(default)]
    pub accuracy_drops_pct: Vec<FixtureDrop>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureMatrix {
    pub model: String,
    pub environment: String,
    pub accuracy: String,
    pub binary_accuracy_pct: String,
    pub counts: [[u64; 4]; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureDrop {
    pub model: String,
    pub drop: String,
}

/// Exact non-negative rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Ratio {
    num: i128,
    den: i128,
}

impl Ratio {
    fn new(num: i128, den: i128) -> Self {
        Self { num, den }
    }

    fn sub(self, o: Ratio) -> Ratio {
        Ratio::new(self.num * o.den - o.num * self.den, self.den * o.den)
    }

    fn abs_le(self, tol: Ratio) -> bool {
        self.num.abs() * tol.den <= tol.num * self.den
    }

    fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn parse_decimal(s: &str) -> Result<Ratio> {
    let bad = || Error::InvalidInput(format!("not a plain decimal: {s:?}"));
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if frac.len() > 18 {
        return Err(bad());
    }
    let den = 10i128.pow(frac.len() as u32);
    let digits = format!("{int}{frac}");
    let num: i128 = digits.parse().map_err(|_| bad())?;
    Ok(Ratio::new(num, den))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureCheck {
    pub model: String,
    pub environment: String,
    pub metric: String,
    pub numerator: u64,
    pub denominator: u64,
    pub computed: f64,
    pub published: String,
    pub abs_diff: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureReport {
    pub tolerance: String,
    pub checks: Vec<FixtureCheck>,
}

impl FixtureReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

impl fmt::Display for FixtureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let frac = if c.denominator == 0 {
                String::new()
            } else {
                format!("{}/{}", c.numerator, c.denominator)
            };
            writeln!(
                f,
                "{} {:<14} env {:<3} {:<16} {:>11} = {:.6}  published {:<6} |diff| {:.2e}",
                if c.pass { "PASS" } else { "FAIL" },
                c.model,
                c.environment,
                c.metric,
                frac,
                c.computed,
                c.published,
                c.abs_diff
            )?;
        }
        write!(
            f,
            "{} of {} checks pass (tolerance {})",
            self.checks.len() - self.failures(),
            self.checks.len(),
            self.tolerance
        )
    }
}

pub fn load_fixtures(json: &str) -> Result<FixtureFile> {
    let f: FixtureFile = serde_json::from_str(json).map_err(|e| Error::json("fixture file", e))?;
    if f.version != 1 {
        return Err(Error::InvalidInput(format!("fixture version {} unsupported", f.version)));
    }
    Ok(f)
}

/// Checks the shipped fixtures.
pub fn verify_fixtures() -> Result<FixtureReport> {
    verify_fixture_file(&load_fixtures(REFERENCE_FIXTURES)?)
}

pub fn verify_fixture_file(file: &FixtureFile) -> Result<FixtureReport> {
    let tol = parse_decimal(&file.tolerance)?;
    let mut checks = Vec::new();
    for m in &file.matrices {
        let cm = ConfusionMatrix4::from_counts(m.counts);
        let total = cm.total();
        if total == 0 {
            return Err(Error::InvalidInput(format!("{} {} has no samples", m.model, m.environment)));
        }
        let pct = parse_decimal(&m.binary_accuracy_pct)?;
        let cases = [
            ("accuracy", cm.trace(), accuracy(&cm), parse_decimal(&m.accuracy)?, m.accuracy.clone()),
            (
                "binary_accuracy",
                cm.binary_agreement(),
                binary_collapse(&cm),
                Ratio::new(pct.num, pct.den * 100),
                format!("{}%", m.binary_accuracy_pct),
            ),
        ];
        for (metric, num, computed, published, shown) in cases {
            let exact = Ratio::new(i128::from(num), i128::from(total));
            let diff = exact.sub(published);
            checks.push(FixtureCheck {
                model: m.model.clone(),
                environment: m.environment.clone(),
                metric: metric.into(),
                numerator: num,
                denominator: total,
                computed,
                published: shown,
                abs_diff: diff.to_f64().abs(),
                pass: diff.abs_le(tol),
            });
        }
    }
    // drops are differences of two rounded accuracies, so they carry twice the tolerance
    let drop_tol = Ratio::new(tol.num * 2, tol.den);
    for d in &file.accuracy_drops_pct {
        let find = |env: &str| {
            file.matrices
                .iter()
                .find(|m| m.model == d.model && m.environment == env)
                .map(|m| ConfusionMatrix4::from_counts(m.counts))
                .ok_or_else(|| Error::InvalidInput(format!("no {env} matrix for {}", d.model)))
        };
        let (a, b) = (find("A")?, find("B")?);
        let exact = Ratio::new(
            i128::from(a.trace()) * i128::from(b.total()) - i128::from(b.trace()) * i128::from(a.total()),
            i128::from(a.total()) * i128::from(b.total()),
        );
        let p = parse_decimal(&d.drop)?;
        let diff = exact.sub(Ratio::new(p.num, p.den * 100));
        checks.push(FixtureCheck {
            model: d.model.clone(),
            environment: "A-B".into(),
            metric: "accuracy_drop".into(),
            numerator: 0,
            denominator: 0,
            computed: exact.to_f64(),
            published: {
                let places = d.drop.split_once('.').map_or(0, |(_, f)| f.len()) + 2;
                format!("{:.*}", places, p.to_f64() / 100.0)
            },
            abs_diff: diff.to_f64().abs(),
            pass: diff.abs_le(drop_tol),
        });
    }
    Ok(FixtureReport {
        tolerance: file.tolerance.clone(),
        checks,
    })
}
