use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use super::config::{Builder, Expected};
use crate::optuple::{Predicates, RegularityReport, Tolerances};
use crate::wold::{Dims, PureClassification, Residuals};

/// JSON formatter that prints every float with 17 significant digits.
#[derive(Debug, Default, Clone, Copy)]
pub struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, FullPrecision);
    value.serialize(&mut ser).expect("report serialization");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

#[derive(Debug, Clone, Serialize)]
pub struct Parameters {
    pub builder: Builder,
    pub m: usize,
    pub max_degree: Option<usize>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularitySection {
    #[serde(flatten)]
    pub report: RegularityReport,
    /// How the sampled radii relate to the unquantified neighbourhood of 0.
    pub radius_note: &'static str,
}

pub const RADIUS_NOTE: &str =
    "codimensions sampled at fixed fractions of 1/||L||; no neighbourhood radius is certified";

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub parameters: Parameters,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicates: Option<Predicates>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Residuals>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dims: Option<Dims>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regularity: Option<RegularitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<PureClassification>,
    pub gram_degree: Option<usize>,
    pub verdict: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
    pub matches: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    pub reports: Vec<ScenarioReport>,
}

impl ScenarioReport {
    pub fn text_line(&self) -> String {
        let status = if self.matches { "ok" } else { "MISMATCH" };
        let verdict = self.verdict.as_deref().unwrap_or("error");
        let mut line = format!("{}: {verdict} [{status}]", self.scenario);
        if let Some(e) = &self.expected {
            line.push_str(&format!(" expected {}", e.verdict_str()));
        }
        if let (Some(d), Some(r)) = (&self.dims, &self.residuals) {
            line.push_str(&format!(
                " | dim H_inf={} orbit={} d={} | identity={:.3e} reducing={:.3e} coisometry={:.3e} gram={:.3e}",
                d.h_inf, d.orbit, d.total, r.identity, r.reducing, r.coisometry, r.gram
            ));
        }
        if let Some(reg) = &self.regularity {
            let v = serde_json::to_value(reg.report.verdict).ok();
            line.push_str(&format!(" | regularity={}", v.as_ref().and_then(|v| v.as_str()).unwrap_or("?")));
        }
        if let Some(e) = &self.error {
            line.push_str(&format!(" | error: {e}"));
        }
        line
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(to_json(&0.1f64), "1.0000000000000001e-1");
        assert_eq!(to_json(&1.0f64), "1.0000000000000000e0");
        assert_eq!(to_json(&f64::NAN), "null");
        assert_eq!(to_json(&vec![2.5f64, -3e-12]), "[2.5000000000000000e0,-3.0000000000000001e-12]");
        let back: Vec<f64> = serde_json::from_str(&to_json(&vec![0.1f64, 1e300, 5e-324])).unwrap();
        assert_eq!(back, vec![0.1, 1e300, 5e-324]);
    }
}
