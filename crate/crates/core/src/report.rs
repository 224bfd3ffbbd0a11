//! Verification reports: one record per checked identity, emitted as JSON
//! with sorted keys and checks ordered by id.

use serde_json::{json, Map, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Pass,
    Fail,
    Skipped(String),
}

impl Status {
    fn to_json(&self) -> Value {
        match self {
            Status::Pass => json!("pass"),
            Status::Fail => json!("fail"),
            Status::Skipped(why) => json!({ "skipped": why }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckRecord {
    pub id: String,
    /// The identity being checked, as a formula.
    pub anchor: String,
    pub params: Value,
    pub status: Status,
    pub lhs: Option<String>,
    pub rhs: Option<String>,
    pub discrepancy: Option<f64>,
    pub note: Option<String>,
    pub elapsed_ms: f64,
}

impl CheckRecord {
    pub fn new(id: &str, anchor: &str, params: Value) -> CheckRecord {
        CheckRecord {
            id: id.into(),
            anchor: anchor.into(),
            params,
            status: Status::Pass,
            lhs: None,
            rhs: None,
            discrepancy: None,
            note: None,
            elapsed_ms: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self, timings: bool) -> Value {
        let mut m = Map::new();
        m.insert("id".into(), json!(self.id));
        m.insert("anchor".into(), json!(self.anchor));
        m.insert("params".into(), self.params.clone());
        m.insert("status".into(), self.status.to_json());
        for (k, v) in [("lhs", &self.lhs), ("rhs", &self.rhs), ("note", &self.note)] {
            if let Some(v) = v {
                m.insert(k.into(), json!(v));
            }
        }
        if let Some(d) = self.discrepancy {
            m.insert("discrepancy".into(), json!(d));
        }
        if timings {
            m.insert(
                "elapsed_ms".into(),
                json!((self.elapsed_ms * 1000.0).round() / 1000.0),
            );
        }
        Value::Object(m)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub params: Value,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn summary(&self) -> Summary {
        let mut s = Summary::default();
        for c in &self.checks {
            match c.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Skipped(_) => s.skipped += 1,
            }
        }
        s
    }

    pub fn ok(&self) -> bool {
        self.summary().fail == 0
    }

    pub fn to_json(&self, timings: bool) -> Value {
        let mut checks = self.checks.clone();
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        let s = self.summary();
        json!({
            "suite": self.suite,
            "seed": self.seed,
            "params": self.params,
            "checks": checks.iter().map(|c| c.to_json(timings)).collect::<Vec<_>>(),
            "summary": {"pass": s.pass, "fail": s.fail, "skipped": s.skipped},
        })
    }

    /// Pretty JSON with a trailing newline.
    pub fn render(&self, timings: bool) -> String {
        let mut s =
            serde_json::to_string_pretty(&self.to_json(timings)).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_sorted_and_timings_optional() {
        let mut a = CheckRecord::new("b.two", "x = x", json!({}));
        a.elapsed_ms = 3.0;
        let mut b = CheckRecord::new("a.one", "y = y", json!({"n": 1}));
        b.status = Status::Skipped("not applicable".into());
        let r = VerificationReport {
            suite: "t".into(),
            seed: 7,
            params: json!({}),
            checks: vec![a, b],
        };
        let v = r.to_json(false);
        assert_eq!(v["checks"][0]["id"], "a.one");
        assert_eq!(v["checks"][0]["status"]["skipped"], "not applicable");
        assert!(v["checks"][1].get("elapsed_ms").is_none());
        assert_eq!(r.to_json(true)["checks"][1]["elapsed_ms"], 3.0);
        assert!(r.ok());
        assert_eq!(r.render(false), r.render(false));
    }
}
