//! CSV ingestion.
//!
//! Accepted layouts:
//! - matched pairs: one file with two columns (`x1,x2`)
//! - independent samples: one file with `group,value` (group 1 or 2), or two
//!   single-column files
//!
//! A first row with no numeric field is a header. Row numbers in errors are
//! 1-based file lines, header included.

use std::fs::File;
use std::path::{Path, PathBuf};

use almostdom::{PairedSample, Sample, SamplingScheme, TwoSampleData};

use crate::CliError;

fn read_rows(path: &Path) -> Result<Vec<(usize, Vec<String>)>, CliError> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::FileNotFound(path.to_path_buf()),
        _ => CliError::Io(path.to_path_buf(), e),
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Csv(path.to_path_buf(), e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        rows.push((i + 1, record.iter().map(str::to_string).collect()));
    }
    if let Some((_, first)) = rows.first() {
        if first.iter().all(|f| f.parse::<f64>().is_err()) {
            rows.remove(0);
        }
    }
    if rows.is_empty() {
        return Err(CliError::EmptyInput(path.to_path_buf()));
    }
    Ok(rows)
}

fn parse_field(row: usize, col: usize, fields: &[String]) -> Result<f64, CliError> {
    let raw = fields.get(col - 1).ok_or(CliError::ParseError {
        row,
        col,
        reason: "missing field".into(),
    })?;
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::ParseError {
            row,
            col,
            reason: format!("'{raw}' is not a finite number"),
        }),
    }
}

fn check_width(row: usize, fields: &[String], width: usize) -> Result<(), CliError> {
    if fields.len() != width {
        return Err(CliError::ParseError {
            row,
            col: fields.len().min(width) + 1,
            reason: format!("expected {width} columns, found {}", fields.len()),
        });
    }
    Ok(())
}

fn nonneg(row: usize, v: f64, required: bool) -> Result<f64, CliError> {
    if required && v < 0.0 {
        return Err(CliError::NegativeValue { row });
    }
    Ok(v)
}

/// Reads the data set for `scheme` from one or two files. With
/// `require_nonnegative` any negative value is rejected with its row.
pub fn load_csv(
    paths: &[PathBuf],
    scheme: SamplingScheme,
    require_nonnegative: bool,
) -> Result<TwoSampleData, CliError> {
    match (scheme, paths) {
        (SamplingScheme::MatchedPairs, [path]) => {
            let mut pairs = Vec::new();
            for (row, fields) in read_rows(path)? {
                check_width(row, &fields, 2)?;
                let a = nonneg(row, parse_field(row, 1, &fields)?, require_nonnegative)?;
                let b = nonneg(row, parse_field(row, 2, &fields)?, require_nonnegative)?;
                pairs.push((a, b));
            }
            log::info!("{}: {} pairs", path.display(), pairs.len());
            Ok(TwoSampleData::Matched(PairedSample::new(pairs)?))
        }
        (SamplingScheme::MatchedPairs, _) => Err(CliError::Usage(
            "matched pairs are read from a single two-column file".into(),
        )),
        (SamplingScheme::Independent, [path]) => {
            let (mut first, mut second) = (Vec::new(), Vec::new());
            for (row, fields) in read_rows(path)? {
                check_width(row, &fields, 2)?;
                let value = nonneg(row, parse_field(row, 2, &fields)?, require_nonnegative)?;
                match fields[0].as_str() {
                    "1" => first.push(value),
                    "2" => second.push(value),
                    other => {
                        return Err(CliError::ParseError {
                            row,
                            col: 1,
                            reason: format!("group must be 1 or 2, got '{other}'"),
                        })
                    }
                }
            }
            if first.is_empty() || second.is_empty() {
                return Err(CliError::Usage(format!(
                    "{} needs rows for both groups (found {} and {})",
                    path.display(),
                    first.len(),
                    second.len()
                )));
            }
            log::info!("{}: {} + {} observations", path.display(), first.len(), second.len());
            Ok(TwoSampleData::independent(
                Sample::with_label(first, "1")?,
                Sample::with_label(second, "2")?,
            ))
        }
        (SamplingScheme::Independent, [a, b]) => {
            let read = |path: &Path| -> Result<Vec<f64>, CliError> {
                read_rows(path)?
                    .into_iter()
                    .map(|(row, fields)| {
                        check_width(row, &fields, 1)?;
                        nonneg(row, parse_field(row, 1, &fields)?, require_nonnegative)
                    })
                    .collect()
            };
            let first = read(a)?;
            let second = read(b)?;
            log::info!("{} + {} observations", first.len(), second.len());
            Ok(TwoSampleData::independent(
                Sample::with_label(first, a.display().to_string())?,
                Sample::with_label(second, b.display().to_string())?,
            ))
        }
        (SamplingScheme::Independent, _) => Err(CliError::Usage(
            "independent samples need one group,value file or two single-column files".into(),
        )),
    }
}

/// Reads the samples for `measures`. A file whose header starts with `group`
/// holds `group,value` rows and gives one sample per group; any other file
/// gives one sample per column, named by its header or by column number.
pub fn load_groups(paths: &[PathBuf]) -> Result<Vec<(String, Vec<f64>)>, CliError> {
    let mut out = Vec::new();
    for path in paths {
        let rows = read_rows(path)?;
        let header = read_header(path)?;
        if header.first().is_some_and(|h| h.eq_ignore_ascii_case("group")) {
            let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
            for (row, fields) in rows {
                check_width(row, &fields, 2)?;
                let v = parse_field(row, 2, &fields)?;
                match groups.iter_mut().find(|(g, _)| *g == fields[0]) {
                    Some((_, vals)) => vals.push(v),
                    None => groups.push((fields[0].clone(), vec![v])),
                }
            }
            out.extend(groups);
            continue;
        }
        let width = rows[0].1.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); width];
        for (row, fields) in &rows {
            check_width(*row, fields, width)?;
            for (col, values) in columns.iter_mut().enumerate() {
                values.push(parse_field(*row, col + 1, fields)?);
            }
        }
        for (col, values) in columns.into_iter().enumerate() {
            let name = match header.get(col) {
                Some(h) => h.clone(),
                None if width == 1 => path.display().to_string(),
                None => format!("{}:{}", path.display(), col + 1),
            };
            out.push((name, values));
        }
    }
    Ok(out)
}

/// Header fields if the first non-blank row is a header, else empty.
fn read_header(path: &Path) -> Result<Vec<String>, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Csv(path.to_path_buf(), e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if record.iter().all(|f| f.parse::<f64>().is_err()) {
            return Ok(record.iter().map(str::to_string).collect());
        }
        break;
    }
    Ok(Vec::new())
}
