//! CSV datasets and JSON model files.
//!
//! Reals are written with Rust's shortest round-trip formatting, so every
//! value read back is bit-identical to the one written.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Result, SvddError};
use crate::kernel::KernelParams;
use crate::model::{ScoreOutcome, SvddModel};
use crate::sampling::TrainTrace;

pub const MODEL_FORMAT: &str = "svdd-model";
pub const MODEL_VERSION: u32 = 1;

/// Features plus the optional trailing `label` column.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: DataMatrix,
    pub labels: Option<Vec<bool>>,
    pub header: Option<Vec<String>>,
}

fn parse_label(cell: &str) -> Option<bool> {
    match cell.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "1.0" => Some(true),
        "0" | "false" | "0.0" => Some(false),
        _ => None,
    }
}

/// Read a numeric CSV. With `has_header`, a last column named `label`
/// is parsed as booleans (`0/1/true/false`) instead of a feature.
pub fn read_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let file = File::open(path.as_ref())?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));

    let header: Option<Vec<String>> = if has_header {
        let h = reader.headers()?;
        if h.is_empty() {
            return Err(SvddError::input("CSV file is empty"));
        }
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };
    let label_col = header
        .as_ref()
        .filter(|h| h.last().is_some_and(|c| c.eq_ignore_ascii_case("label")))
        .map(|h| h.len() - 1);

    let mut width = header.as_ref().map(Vec::len);
    let mut values = Vec::new();
    let mut labels = label_col.map(|_| Vec::new());
    let mut n_rows = 0;
    let first_data_row = usize::from(has_header) + 1;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = first_data_row + i;
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(SvddError::Parse {
                row,
                column: record.len().min(w) + 1,
                message: format!("expected {w} fields, found {}", record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            if Some(j) == label_col {
                let v = parse_label(cell).ok_or_else(|| SvddError::Parse {
                    row,
                    column: j + 1,
                    message: format!("invalid label {cell:?}"),
                })?;
                labels.as_mut().expect("label column").push(v);
            } else {
                let v: f64 = cell.parse().map_err(|_| SvddError::Parse {
                    row,
                    column: j + 1,
                    message: format!("non-numeric value {cell:?}"),
                })?;
                values.push(v);
            }
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(SvddError::input("CSV file has no data rows"));
    }
    let n_cols = width.unwrap_or(0) - usize::from(label_col.is_some());
    if n_cols == 0 {
        return Err(SvddError::input("CSV file has no feature columns"));
    }
    Ok(Dataset {
        features: DataMatrix::from_flat(n_rows, n_cols, values)?,
        labels,
        header,
    })
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v}")
}

/// Rectangular table writer: header plus rows of preformatted cells.
pub fn write_table<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Write a matrix, optionally followed by a `label` column of 0/1.
pub fn write_csv(
    path: impl AsRef<Path>,
    data: &DataMatrix,
    column_names: Option<&[&str]>,
    labels: Option<&[bool]>,
) -> Result<()> {
    if let Some(l) = labels {
        if l.len() != data.n_rows() {
            return Err(SvddError::input("label count differs from row count"));
        }
    }
    let default_names: Vec<String> = (0..data.n_cols()).map(|j| format!("x{}", j + 1)).collect();
    let mut header: Vec<&str> = match column_names {
        Some(names) if names.len() == data.n_cols() => names.to_vec(),
        Some(_) => return Err(SvddError::input("column name count differs from column count")),
        None => default_names.iter().map(String::as_str).collect(),
    };
    if labels.is_some() {
        header.push("label");
    }
    let rows = data.rows().enumerate().map(|(i, r)| {
        let mut cells: Vec<String> = r.iter().map(|&v| format_real(v)).collect();
        if let Some(l) = labels {
            cells.push(if l[i] { "1" } else { "0" }.to_string());
        }
        cells
    });
    write_table(create(path.as_ref())?, &header, rows)
}

pub fn write_scores(path: impl AsRef<Path>, scores: &[ScoreOutcome]) -> Result<()> {
    let rows = scores.iter().map(|s| {
        vec![
            format_real(s.dist_squared),
            if s.is_outlier { "1" } else { "0" }.to_string(),
        ]
    });
    write_table(create(path.as_ref())?, &["dist_squared", "is_outlier"], rows)
}

/// Per-iteration trace; `center_norm_delta` is NaN on the first row.
pub fn write_trace(path: impl AsRef<Path>, trace: &TrainTrace) -> Result<()> {
    let rows = trace.records.iter().map(|r| {
        vec![
            r.iteration.to_string(),
            format_real(r.r_squared),
            format_real(r.center_delta.unwrap_or(f64::NAN)),
            r.master_set_size.to_string(),
        ]
    });
    write_table(
        create(path.as_ref())?,
        &["iteration", "r_squared", "center_norm_delta", "master_set_size"],
        rows,
    )
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    dimension: usize,
    nsv: usize,
    bandwidth: f64,
    penalty: f64,
    outlier_fraction: f64,
    r_squared: f64,
    self_term: f64,
    center: Vec<f64>,
    support_vectors: Vec<f64>,
    alpha: Vec<f64>,
    training_n: usize,
    threshold_fallback: bool,
}

pub fn model_to_json(model: &SvddModel) -> Result<String> {
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        dimension: model.dimension(),
        nsv: model.n_support_vectors(),
        bandwidth: model.params().bandwidth(),
        penalty: model.penalty(),
        outlier_fraction: model.outlier_fraction(),
        r_squared: model.r_squared(),
        self_term: model.self_term(),
        center: model.center().to_vec(),
        support_vectors: model.support_vectors().as_flat().to_vec(),
        alpha: model.sv_alpha().to_vec(),
        training_n: model.training_n(),
        threshold_fallback: model.threshold_fallback(),
    };
    serde_json::to_string_pretty(&file).map_err(|e| SvddError::Load(e.to_string()))
}

pub fn model_from_json(text: &str) -> Result<SvddModel> {
    let load = |m: String| SvddError::Load(m);
    let f: ModelFile = serde_json::from_str(text).map_err(|e| load(e.to_string()))?;
    if f.format != MODEL_FORMAT {
        return Err(load(format!("unknown format {:?}", f.format)));
    }
    if f.version != MODEL_VERSION {
        return Err(load(format!("unsupported version {} (expected {MODEL_VERSION})", f.version)));
    }
    if f.dimension == 0 || f.support_vectors.len() != f.nsv * f.dimension {
        return Err(load(format!(
            "support vector block holds {} values, expected {} x {}",
            f.support_vectors.len(),
            f.nsv,
            f.dimension
        )));
    }
    let svs = DataMatrix::from_flat(f.nsv, f.dimension, f.support_vectors).map_err(|e| load(e.to_string()))?;
    let params = KernelParams::new(f.bandwidth).map_err(|e| load(e.to_string()))?;
    SvddModel::from_parts(
        svs,
        f.alpha,
        params,
        f.penalty,
        f.outlier_fraction,
        f.r_squared,
        f.self_term,
        f.center,
        f.training_n,
        f.threshold_fallback,
    )
    .map_err(|e| load(e.to_string()))
}

pub fn write_model(model: &SvddModel, path: impl AsRef<Path>) -> Result<()> {
    let mut w = create(path.as_ref())?;
    w.write_all(model_to_json(model)?.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_model(path: impl AsRef<Path>) -> Result<SvddModel> {
    model_from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SolverConfig;
    use crate::trainer::train_full;
    use proptest::prelude::*;

    fn temp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn plain_two_by_two() {
        let f = temp_file("1,2\n3.5,-4\n");
        let d = read_csv(f.path(), false).unwrap();
        assert_eq!(d.features, DataMatrix::from_rows(&[[1.0, 2.0], [3.5, -4.0]]).unwrap());
        assert!(d.labels.is_none());
    }

    #[test]
    fn label_column() {
        let f = temp_file("x,y,label\n0,0,1\n1,1,0\n2,2,true\n");
        let d = read_csv(f.path(), true).unwrap();
        assert_eq!(d.features.n_cols(), 2);
        assert_eq!(d.labels, Some(vec![true, false, true]));
    }

    #[test]
    fn empty_inputs() {
        let f = temp_file("");
        assert!(matches!(read_csv(f.path(), false), Err(SvddError::Input(_))));
        assert!(matches!(read_csv(f.path(), true), Err(SvddError::Input(_))));
        let f = temp_file("x,y\n");
        assert!(matches!(read_csv(f.path(), true), Err(SvddError::Input(_))));
    }

    #[test]
    fn parse_error_locations() {
        let f = temp_file("x,y\n1,2\n3,abc\n");
        match read_csv(f.path(), true) {
            Err(SvddError::Parse { row, column, .. }) => assert_eq!((row, column), (3, 2)),
            other => panic!("unexpected {other:?}"),
        }
        let f = temp_file("1,2\n3\n");
        assert!(matches!(read_csv(f.path(), false), Err(SvddError::Parse { row: 2, .. })));
        let f = temp_file("x,label\n1,maybe\n");
        assert!(matches!(read_csv(f.path(), true), Err(SvddError::Parse { row: 2, column: 2, .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(read_csv("/nonexistent/file.csv", true), Err(SvddError::Io(_))));
    }

    fn trained() -> SvddModel {
        let rows: Vec<[f64; 2]> = (0..40)
            .map(|i| {
                let t = i as f64 * 0.7;
                [t.cos() * (1.0 + 0.1 * t.sin()), 0.5 * t.sin()]
            })
            .collect();
        let data = DataMatrix::from_rows(&rows).unwrap();
        train_full(&data, KernelParams::new(0.7).unwrap(), 0.05, &SolverConfig::default())
            .unwrap()
            .model
    }

    #[test]
    fn model_round_trip_scores_bitwise() {
        let m = trained();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        write_model(&m, &p).unwrap();
        let back = read_model(&p).unwrap();
        assert_eq!(back, m);
        for i in 0..100 {
            let z = [(i as f64 * 0.37).sin() * 2.0, (i as f64 * 0.11).cos() * 2.0];
            let (a, b) = (m.score(&z).unwrap(), back.score(&z).unwrap());
            assert_eq!(a.dist_squared.to_bits(), b.dist_squared.to_bits());
            assert_eq!(a.is_outlier, b.is_outlier);
        }
    }

    #[test]
    fn truncated_and_mismatched_files() {
        let text = model_to_json(&trained()).unwrap();
        for cut in [0, 1, text.len() / 3, text.len() / 2, text.len() - 2] {
            assert!(matches!(model_from_json(&text[..cut]), Err(SvddError::Load(_))), "cut {cut}");
        }
        let bumped = text.replace("\"version\": 1", "\"version\": 99");
        assert!(matches!(model_from_json(&bumped), Err(SvddError::Load(_))));
        let short = text.replace("\"nsv\": ", "\"nsv\": 1");
        assert!(matches!(model_from_json(&short), Err(SvddError::Load(_))));
    }

    #[test]
    fn hand_written_single_point_model() {
        let text = r#"{"format":"svdd-model","version":1,"dimension":2,"nsv":1,
            "bandwidth":1,"penalty":1,"outlier_fraction":1,"r_squared":0,"self_term":1,
            "center":[3,4],"support_vectors":[3,4],"alpha":[1],"training_n":1,
            "threshold_fallback":false}"#;
        let m = model_from_json(text).unwrap();
        let s = m.score(&[3.0, 4.0]).unwrap();
        assert_eq!(s.dist_squared, 0.0);
        assert!(s.is_inside());
        assert!(m.score(&[3.0, 4.5]).unwrap().is_outlier);
    }

    #[test]
    fn invariant_violation_on_load() {
        let text = r#"{"format":"svdd-model","version":1,"dimension":1,"nsv":1,
            "bandwidth":1,"penalty":1,"outlier_fraction":1,"r_squared":0,"self_term":1,
            "center":[0],"support_vectors":[0],"alpha":[0.5],"training_n":1,
            "threshold_fallback":false}"#;
        assert!(matches!(model_from_json(text), Err(SvddError::Load(_))));
    }

    #[test]
    fn trace_file_is_readable() {
        use crate::sampling::{IterationRecord, TrainStatus};
        let trace = TrainTrace {
            records: vec![
                IterationRecord { iteration: 1, r_squared: 0.5, center: vec![0.0], center_delta: None, master_set_size: 3, streak: 0 },
                IterationRecord { iteration: 2, r_squared: 0.25, center: vec![0.1], center_delta: Some(0.1), master_set_size: 4, streak: 0 },
            ],
            status: TrainStatus::MaxIter,
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_trace(&p, &trace).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("iteration,r_squared,center_norm_delta,master_set_size\n"));
        let d = read_csv(&p, true).unwrap();
        assert_eq!(d.features.n_rows(), 2);
        assert!(d.features.row(0)[2].is_nan());
        assert_eq!(d.features.row(1)[1], 0.25);
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(
            rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 3), 1..20),
            labels in prop::collection::vec(any::<bool>(), 20),
        ) {
            let data = DataMatrix::from_rows(&rows).unwrap();
            let labels = &labels[..rows.len()];
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("d.csv");
            write_csv(&p, &data, None, Some(labels)).unwrap();
            let back = read_csv(&p, true).unwrap();
            let bits = |m: &DataMatrix| m.as_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back.features), bits(&data));
            prop_assert_eq!(back.labels.as_deref(), Some(labels));
        }
    }
}
