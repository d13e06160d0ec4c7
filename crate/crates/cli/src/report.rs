//! The report every command emits, with JSON and CSV writers.

use std::time::Instant;

use invgen::engine::BoundCheck;
use invgen::frac::{fraction_string, to_f64};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u32>,
    pub name: String,
    pub target: Value,
    pub measured: Value,
    pub pass: bool,
}

impl Check {
    /// Passes iff the two values are equal.
    pub fn equal(name: impl Into<String>, target: Value, measured: Value) -> Self {
        let pass = target == measured;
        Check {
            criterion: None,
            name: name.into(),
            target,
            measured,
            pass,
        }
    }

    /// Passes iff `holds`, which the caller computes from `measured`.
    pub fn holds(name: impl Into<String>, target: &str, measured: Value, holds: bool) -> Self {
        Check {
            criterion: None,
            name: name.into(),
            target: Value::from(target),
            measured,
            pass: holds,
        }
    }

    pub fn from_bound(b: &BoundCheck) -> Self {
        let target = json!({"lower": b.lower, "upper": b.upper, "ci95": b.ci95});
        Check {
            criterion: None,
            name: b.name.clone(),
            target,
            measured: json!({"value": b.measured, "slack": b.slack}),
            pass: b.pass,
        }
    }

    pub fn criterion(mut self, n: u32) -> Self {
        self.criterion = Some(n);
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub version: &'static str,
    pub runtime_ms: u128,
}

/// Rows for CSV output when a command has a natural table.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub provenance: Provenance,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl ExperimentReport {
    pub fn new(command: impl Into<String>, inputs: Value) -> Self {
        ExperimentReport {
            command: command.into(),
            inputs,
            results: Value::Object(Map::new()),
            checks: Vec::new(),
            provenance: Provenance {
                seed: None,
                version: env!("CARGO_PKG_VERSION"),
                runtime_ms: 0,
            },
            table: None,
        }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        if let Value::Object(map) = &mut self.results {
            map.insert(key.to_string(), value);
        }
    }

    /// Stores an exact value as `key: "p/q"` next to `key_float`.
    pub fn set_fraction(&mut self, key: &str, q: &BigRational) {
        self.set(key, Value::from(fraction_string(q)));
        self.set(&format!("{key}_float"), json!(to_f64(q)));
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn finish(&mut self, started: Instant) {
        self.provenance.runtime_ms = started.elapsed().as_millis();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The command's table if it has one, otherwise one row per check.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.table {
            Some(t) => {
                w.write_record(&t.header).expect("in-memory write");
                for row in &t.rows {
                    w.write_record(row).expect("in-memory write");
                }
            }
            None => {
                w.write_record(["criterion", "name", "target", "measured", "pass"])
                    .expect("in-memory write");
                for c in &self.checks {
                    w.write_record([
                        c.criterion.map(|n| n.to_string()).unwrap_or_default(),
                        c.name.clone(),
                        compact(&c.target),
                        compact(&c.measured),
                        c.pass.to_string(),
                    ])
                    .expect("in-memory write");
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn fraction_json(q: &BigRational) -> Value {
    json!({"fraction": fraction_string(q), "float": to_f64(q)})
}

#[cfg(test)]
mod tests {
    use super::*;
    use invgen::frac::ratio;

    #[test]
    fn fractions_carry_string_and_float() {
        let mut r = ExperimentReport::new("x", json!({}));
        r.set_fraction("alpha", &ratio(3, 2));
        assert_eq!(r.results["alpha"], "3/2");
        assert_eq!(r.results["alpha_float"], 1.5);
        assert_eq!(fraction_json(&ratio(4, 2))["fraction"], "2/1");
    }

    #[test]
    fn pass_is_derived() {
        assert!(Check::equal("a", json!("1/3"), json!("1/3")).pass);
        assert!(!Check::equal("a", json!("1/3"), json!("2/3")).pass);
        let mut r = ExperimentReport::new("x", json!({}));
        assert!(r.all_pass());
        r.checks.push(Check::holds("b", "> 0", json!(-1), false));
        assert!(!r.all_pass());
    }

    #[test]
    fn json_round_trips() {
        let mut r = ExperimentReport::new("cheb", json!({"spec": "A5"}));
        r.set_fraction("exact", &ratio(91, 22));
        r.checks
            .push(Check::equal("c", json!(1), json!(1)).criterion(4));
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["results"]["exact"], "91/22");
        assert_eq!(v["checks"][0]["criterion"], 4);
        assert_eq!(v["provenance"]["version"], env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn csv_quotes_fields() {
        let mut r = ExperimentReport::new("x", json!({}));
        r.checks
            .push(Check::holds("a, b", "x", json!({"k": 1}), true));
        let csv = r.to_csv();
        assert!(csv.starts_with("criterion,name,target,measured,pass\n"));
        assert!(csv.contains("\"a, b\""));
    }
}
