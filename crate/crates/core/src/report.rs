//! Bound curves and the provenance of the constants that produced them.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    /// Derived by this library from other inputs.
    Computed,
    /// Built-in constant for a named model.
    Preset,
    UserSupplied,
    /// Closed-form value for a built-in model.
    Analytic,
    /// Conservative substitute used when no analytic value is available.
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Input {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: u64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<u64>,
}

impl CurvePoint {
    pub fn new(n: u64, value: f64) -> Self {
        Self { n, value, log_value: None, exact: None, j: None }
    }

    pub fn exact(n: u64, value: f64, exact: String) -> Self {
        Self { exact: Some(exact), ..Self::new(n, value) }
    }

    pub fn log(n: u64, log_value: f64) -> Self {
        Self { log_value: Some(log_value), ..Self::new(n, log_value.exp()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub n: u64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: String,
    pub inputs: Vec<Input>,
    pub curve: Vec<CurvePoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crossing: Option<Crossing>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            inputs: Vec::new(),
            curve: Vec::new(),
            threshold: None,
            crossing: None,
            notes: Vec::new(),
        }
    }

    pub fn input(mut self, name: &str, value: f64, source: Source) -> Self {
        self.inputs.push(Input { name: name.to_string(), value, exact: None, source });
        self
    }

    pub fn exact_input(mut self, name: &str, value: f64, exact: String, source: Source) -> Self {
        self.inputs.push(Input { name: name.to_string(), value, exact: Some(exact), source });
        self
    }

    pub fn get_input(&self, name: &str) -> Option<&Input> {
        self.inputs.iter().find(|i| i.name == name)
    }

    /// CSV with columns `n,value` (plus `j` when any point carries one), 17 significant digits.
    pub fn to_csv(&self) -> String {
        let with_j = self.curve.iter().any(|p| p.j.is_some());
        let mut out = String::from(if with_j { "n,value,j\n" } else { "n,value\n" });
        for p in &self.curve {
            out.push_str(&format!("{},{:.16e}", p.n, p.value));
            if with_j {
                out.push_str(&format!(",{}", p.j.map(|j| j.to_string()).unwrap_or_default()));
            }
            out.push('\n');
        }
        out
    }
}
