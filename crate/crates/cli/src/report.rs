use std::io::Write;

use serde_json::{json, Map, Value};

use reset_search::model::ExpectedTime;

pub const SCHEMA: u64 = 1;

/// Versioned JSON report: command, echoed parameters, results.
pub struct RunReport {
    body: Map<String, Value>,
}

impl RunReport {
    pub fn new(command: &str, parameters: Value) -> Self {
        let mut body = Map::new();
        body.insert("schema".into(), json!(SCHEMA));
        body.insert("command".into(), json!(command));
        body.insert("parameters".into(), parameters);
        Self { body }
    }

    pub fn insert(&mut self, key: &str, value: Value) {
        self.body.insert(key.into(), value);
    }

    pub fn set_wall_time(&mut self, seconds: f64) {
        self.body.insert("wall_time_s".into(), json!(seconds));
    }

    pub fn print(&self, pretty: bool) -> std::io::Result<()> {
        let value = Value::Object(self.body.clone());
        let mut out = std::io::stdout().lock();
        if pretty {
            let mut rows = Vec::new();
            flatten("", &value, &mut rows);
            let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
            for (k, v) in rows {
                writeln!(out, "{k:<width$}  {v}")?;
            }
        } else {
            writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("serializable"))?;
        }
        out.flush()
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// `{"value": x, "divergent": false}` or `{"value": null, "divergent": true}`.
pub fn expected(e: ExpectedTime<f64>) -> Value {
    match e {
        ExpectedTime::Finite(v) => json!({ "value": v, "divergent": false }),
        ExpectedTime::Divergent => json!({ "value": null, "divergent": true }),
    }
}
