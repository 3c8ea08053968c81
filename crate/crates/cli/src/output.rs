//! Output rows and serialization: CSV, JSON and markdown with
//! round-half-even display rounding.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Simulation,
    Upper,
    Lower,
    Ekera,
    Error,
}

impl Method {
    fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Simulation => "simulation",
            Method::Upper => "upper",
            Method::Lower => "lower",
            Method::Ekera => "ekera",
            Method::Error => "error",
        }
    }
}

/// One method evaluated on one `(r, M)` cell. `value` is the raw method
/// output; rounding happens only at serialization. A cell that could not be
/// evaluated carries no value and an error message (also echoed to stderr).
#[derive(Debug, Clone, Serialize)]
pub struct OutputRow {
    pub method: Method,
    pub r: u64,
    #[serde(rename = "M")]
    pub tolerance: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl OutputRow {
    pub fn value(method: Method, r: u64, tolerance: u64, value: f64) -> Self {
        OutputRow { method, r, tolerance, value: Some(value), stderr: None, error: None }
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = Some(stderr);
        self
    }

    pub fn error(method: Method, r: u64, tolerance: u64, message: String) -> Self {
        OutputRow { method, r, tolerance, value: None, stderr: None, error: Some(message) }
    }
}

/// One sample of the perturbed kernel curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(format!("unknown format '{other}' (expected csv, json or markdown)")),
        }
    }
}

/// Round half to even at `decimals` places.
pub fn round_half_even(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (x * scale).round_ties_even() / scale
}

fn display(x: f64, decimals: u32) -> String {
    format!("{:.*}", decimals as usize, round_half_even(x, decimals))
}

/// Render method rows in the requested format. CSV and markdown apply the
/// display rounding; JSON carries raw doubles.
pub fn render_rows(rows: &[OutputRow], format: Format, with_stderr: bool, decimals: u32) -> String {
    match format {
        Format::Json => {
            let mut out = serde_json::to_string_pretty(rows).expect("rows serialize");
            out.push('\n');
            out
        }
        Format::Csv => {
            let mut out = String::new();
            out.push_str(if with_stderr { "method,r,M,value,stderr\n" } else { "method,r,M,value\n" });
            for row in rows {
                let value = row.value.map(|v| display(v, decimals)).unwrap_or_default();
                out.push_str(&format!("{},{},{},{value}", row.method.as_str(), row.r, row.tolerance));
                if with_stderr {
                    let se = row.stderr.map(|v| display(v, decimals)).unwrap_or_default();
                    out.push_str(&format!(",{se}"));
                }
                out.push('\n');
            }
            out
        }
        Format::Markdown => {
            let mut out = String::new();
            if with_stderr {
                out.push_str("| method | r | M | value | stderr |\n|---|---|---|---|---|\n");
            } else {
                out.push_str("| method | r | M | value |\n|---|---|---|---|\n");
            }
            for row in rows {
                let value = row.value.map(|v| display(v, decimals)).unwrap_or_default();
                out.push_str(&format!(
                    "| {} | {} | {} | {value} |",
                    row.method.as_str(),
                    row.r,
                    row.tolerance
                ));
                if with_stderr {
                    let se = row.stderr.map(|v| display(v, decimals)).unwrap_or_default();
                    out.push_str(&format!(" {se} |"));
                }
                out.push('\n');
            }
            out
        }
    }
}

/// Render curve series: one `(epsilon, x, h)` record per sample.
pub fn render_curves(series: &[(f64, Vec<CurvePoint>)], format: Format, decimals: u32) -> String {
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Series<'a> {
                epsilon: f64,
                points: &'a [CurvePoint],
            }
            let wrapped: Vec<Series> =
                series.iter().map(|(eps, pts)| Series { epsilon: *eps, points: pts }).collect();
            let mut out = serde_json::to_string_pretty(&wrapped).expect("curves serialize");
            out.push('\n');
            out
        }
        Format::Csv => {
            let mut out = String::from("epsilon,x,h\n");
            for (eps, points) in series {
                for p in points {
                    out.push_str(&format!(
                        "{eps},{},{}\n",
                        display(p.x, decimals.max(6)),
                        display(p.h, decimals.max(6))
                    ));
                }
            }
            out
        }
        Format::Markdown => {
            let mut out = String::from("| epsilon | x | h |\n|---|---|---|\n");
            for (eps, points) in series {
                for p in points {
                    out.push_str(&format!(
                        "| {eps} | {} | {} |\n",
                        display(p.x, decimals.max(6)),
                        display(p.h, decimals.max(6))
                    ));
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_half_even() {
        assert_eq!(round_half_even(0.6635, 3), 0.664);
        assert_eq!(round_half_even(0.0625, 3), 0.062);
        assert_eq!(round_half_even(0.0635, 3), 0.064);
        assert_eq!(display(0.66350063, 3), "0.664");
        assert_eq!(display(0.9301672, 3), "0.930");
    }

    #[test]
    fn csv_schema() {
        let rows = vec![
            OutputRow::value(Method::Exact, 15, 32, 0.9301672666),
            OutputRow::error(Method::Upper, 4, 32, "nope".into()),
        ];
        let csv = render_rows(&rows, Format::Csv, false, 3);
        assert_eq!(csv, "method,r,M,value\nexact,15,32,0.930\nupper,4,32,\n");
        let with_se = render_rows(&rows, Format::Csv, true, 3);
        assert!(with_se.starts_with("method,r,M,value,stderr\n"));
    }

    #[test]
    fn json_mirrors_field_names() {
        let rows = vec![OutputRow::value(Method::Simulation, 63, 32, 0.982).with_stderr(0.0006)];
        let json = render_rows(&rows, Format::Json, true, 3);
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed[0]["method"], "simulation");
        assert_eq!(parsed[0]["r"], 63);
        assert_eq!(parsed[0]["M"], 32);
        assert!(parsed[0]["value"].as_f64().unwrap() > 0.9);
        assert!(parsed[0]["stderr"].as_f64().unwrap() > 0.0);
    }
}
