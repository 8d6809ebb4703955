//! Output records and their JSON / CSV rendering. Floats are written with 17
//! significant digits so they parse back to the same bits.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Int(u64),
    Float(f64),
    Bool(bool),
    Null,
}

impl Cell {
    fn json(&self) -> String {
        match self {
            Cell::Str(s) => serde_json::to_string(s).expect("strings always serialize"),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => format_float(*v),
            Cell::Float(_) | Cell::Null => "null".into(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn opt_float(v: Option<f64>) -> Cell {
    v.map_or(Cell::Null, Cell::Float)
}

pub trait Record {
    fn cells(&self) -> Vec<(&'static str, Cell)>;
}

fn json_object(cells: &[(&'static str, Cell)], indent: &str) -> String {
    let body: Vec<String> = cells
        .iter()
        .map(|(k, v)| format!("{indent}  \"{k}\": {}", v.json()))
        .collect();
    format!("{{\n{}\n{indent}}}", body.join(",\n"))
}

/// One record renders as an object, several as an array.
pub fn to_json<R: Record>(records: &[R]) -> String {
    if let [only] = records {
        return json_object(&only.cells(), "") + "\n";
    }
    let items: Vec<String> = records
        .iter()
        .map(|r| format!("  {}", json_object(&r.cells(), "  ")))
        .collect();
    format!("[\n{}\n]\n", items.join(",\n"))
}

pub fn to_csv<R: Record>(records: &[R]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = records.first() {
        let header: Vec<&str> = first.cells().iter().map(|(k, _)| *k).collect();
        w.write_record(&header).expect("in-memory write");
    }
    for r in records {
        let row: Vec<String> = r.cells().iter().map(|(_, v)| v.csv()).collect();
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Result of the `ci` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub family: String,
    pub m: usize,
    pub direction: String,
    pub n1: usize,
    pub n2: usize,
    pub c_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub t_n: f64,
    pub xi0: f64,
    pub n_boot: usize,
    pub seed: u64,
    pub boundary_flag: bool,
    /// Only filled in with `--timing`, so default output is reproducible.
    pub runtime_ms: Option<f64>,
}

impl Record for ReportRecord {
    fn cells(&self) -> Vec<(&'static str, Cell)> {
        vec![
            ("family", Cell::Str(self.family.clone())),
            ("m", Cell::Int(self.m as u64)),
            ("direction", Cell::Str(self.direction.clone())),
            ("n1", Cell::Int(self.n1 as u64)),
            ("n2", Cell::Int(self.n2 as u64)),
            ("c_hat", Cell::Float(self.c_hat)),
            ("ci_lo", Cell::Float(self.ci_lo)),
            ("ci_hi", Cell::Float(self.ci_hi)),
            ("t_n", Cell::Float(self.t_n)),
            ("xi0", Cell::Float(self.xi0)),
            ("n_boot", Cell::Int(self.n_boot as u64)),
            ("seed", Cell::Int(self.seed)),
            ("boundary_flag", Cell::Bool(self.boundary_flag)),
            ("runtime_ms", opt_float(self.runtime_ms)),
        ]
    }
}

/// Result of the `estimate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub family: String,
    pub m: usize,
    pub direction: String,
    pub scheme: String,
    pub n1: usize,
    pub n2: usize,
    pub c_hat: f64,
    pub pos_area: f64,
    pub neg_area: f64,
    /// `n₁n₂ / (n₁ + n₂)`
    pub t_big: f64,
    pub lambda_hat: f64,
    pub grid: usize,
    pub domain_lo: f64,
    pub domain_hi: f64,
}

impl Record for EstimateRecord {
    fn cells(&self) -> Vec<(&'static str, Cell)> {
        vec![
            ("family", Cell::Str(self.family.clone())),
            ("m", Cell::Int(self.m as u64)),
            ("direction", Cell::Str(self.direction.clone())),
            ("scheme", Cell::Str(self.scheme.clone())),
            ("n1", Cell::Int(self.n1 as u64)),
            ("n2", Cell::Int(self.n2 as u64)),
            ("c_hat", Cell::Float(self.c_hat)),
            ("pos_area", Cell::Float(self.pos_area)),
            ("neg_area", Cell::Float(self.neg_area)),
            ("t_big", Cell::Float(self.t_big)),
            ("lambda_hat", Cell::Float(self.lambda_hat)),
            ("grid", Cell::Int(self.grid as u64)),
            ("domain_lo", Cell::Float(self.domain_lo)),
            ("domain_hi", Cell::Float(self.domain_hi)),
        ]
    }
}

/// One row of the simulation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub preset: String,
    pub scheme: String,
    pub n1: usize,
    pub n2: usize,
    pub true_c: f64,
    pub mean: f64,
    pub bias: f64,
    pub se: f64,
    pub rmse: f64,
    pub t_n: f64,
    pub cr: f64,
    pub reps: usize,
    pub boot: usize,
    pub seed: u64,
    pub runtime_ms: Option<f64>,
}

impl Record for SimulationRecord {
    fn cells(&self) -> Vec<(&'static str, Cell)> {
        vec![
            ("preset", Cell::Str(self.preset.clone())),
            ("scheme", Cell::Str(self.scheme.clone())),
            ("n1", Cell::Int(self.n1 as u64)),
            ("n2", Cell::Int(self.n2 as u64)),
            ("true_c", Cell::Float(self.true_c)),
            ("mean", Cell::Float(self.mean)),
            ("bias", Cell::Float(self.bias)),
            ("se", Cell::Float(self.se)),
            ("rmse", Cell::Float(self.rmse)),
            ("t_n", Cell::Float(self.t_n)),
            ("cr", Cell::Float(self.cr)),
            ("reps", Cell::Int(self.reps as u64)),
            ("boot", Cell::Int(self.boot as u64)),
            ("seed", Cell::Int(self.seed)),
            ("runtime_ms", opt_float(self.runtime_ms)),
        ]
    }
}

/// Coverage of one tuning candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningRecord {
    pub t_n: f64,
    pub coverage: f64,
    pub selected: bool,
    pub pseudo_true: f64,
}

impl Record for TuningRecord {
    fn cells(&self) -> Vec<(&'static str, Cell)> {
        vec![
            ("t_n", Cell::Float(self.t_n)),
            ("coverage", Cell::Float(self.coverage)),
            ("selected", Cell::Bool(self.selected)),
            ("pseudo_true", Cell::Float(self.pseudo_true)),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasuresRecord {
    pub group: String,
    pub n: usize,
    pub mu: f64,
    pub w_p: f64,
    pub j_p: f64,
    pub preference: String,
}

impl Record for MeasuresRecord {
    fn cells(&self) -> Vec<(&'static str, Cell)> {
        vec![
            ("group", Cell::Str(self.group.clone())),
            ("n", Cell::Int(self.n as u64)),
            ("mu", Cell::Float(self.mu)),
            ("w_p", Cell::Float(self.w_p)),
            ("j_p", Cell::Float(self.j_p)),
            ("preference", Cell::Str(self.preference.clone())),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_record() -> ReportRecord {
        ReportRecord {
            family: "lorenz".into(),
            m: 2,
            direction: "up".into(),
            n1: 10,
            n2: 12,
            c_hat: 0.1 + 0.2,
            ci_lo: 1.0 / 3.0,
            ci_hi: 0.9999999999999999,
            t_n: 0.001,
            xi0: 0.001,
            n_boot: 1000,
            seed: u64::MAX,
            boundary_flag: false,
            runtime_ms: None,
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let rec = sample_record();
        let text = to_json(std::slice::from_ref(&rec));
        let back: ReportRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rec);
        assert_eq!(back.c_hat.to_bits(), rec.c_hat.to_bits());
    }

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(format_float(0.1 + 0.2), "3.0000000000000004e-1");
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_has_header_and_rows() {
        let text = to_csv(&[sample_record(), sample_record()]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("family,m,direction,n1,n2,c_hat"));
        assert!(lines[1].ends_with(",false,"));
    }
}
