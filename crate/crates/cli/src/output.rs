use std::time::Instant;

use dimwit_core::linalg::{Complex64, ComplexMatrix, Party};
use dimwit_core::scenario::QuantumModel;
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u64 = 1;

/// Human-readable value with at least 12 significant digits.
pub fn fmt_value(v: f64) -> String {
    let v = v + 0.0;
    if v == 0.0 || v.abs() >= 0.1 {
        format!("{v:.12}")
    } else {
        format!("{v:.11e}")
    }
}

/// Run metadata attached to every machine-readable output.
pub struct Manifest {
    command: Vec<String>,
    seed: Option<u64>,
    config: Value,
    started: Instant,
}

impl Manifest {
    pub fn start(seed: Option<u64>, config: Value) -> Self {
        Self {
            command: std::env::args().skip(1).collect(),
            seed,
            config,
            started: Instant::now(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "seed": self.seed,
            "config": self.config,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_clock_seconds": self.started.elapsed().as_secs_f64(),
        })
    }

    /// `{"schema": 1, "<key>": payload, "manifest": {...}}`.
    pub fn wrap(&self, key: &str, payload: Value) -> Value {
        let mut doc = serde_json::Map::new();
        doc.insert("schema".into(), json!(SCHEMA_VERSION));
        doc.insert(key.into(), payload);
        doc.insert("manifest".into(), self.to_json());
        Value::Object(doc)
    }
}

pub fn print_json(doc: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(doc).expect("JSON values serialize")
    );
}

fn complex(c: &Complex64) -> Value {
    json!([c.re, c.im])
}

fn matrix(m: &ComplexMatrix) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| Value::Array((0..m.cols()).map(|j| complex(&m[(i, j)])).collect()))
        .collect();
    Value::Array(rows)
}

/// State amplitudes as `[re, im]` pairs and POVMs as nested matrices.
pub fn model_json(m: &QuantumModel) -> Value {
    let povms = |p: Party| -> Value {
        m.povms(p)
            .iter()
            .map(|povm| povm.iter().map(matrix).collect::<Vec<_>>())
            .collect()
    };
    json!({
        "dim_a": m.dim_a(),
        "dim_b": m.dim_b(),
        "state": m.state().iter().map(complex).collect::<Vec<_>>(),
        "povms_a": povms(Party::A),
        "povms_b": povms(Party::B),
    })
}
