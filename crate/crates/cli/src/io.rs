//! CSV and JSON files: writers for every artifact, readers for the inputs.

use std::fs;
use std::path::{Path, PathBuf};

use memristim_core::crossbar::MeasuredCurve;
use memristim_core::dr::{LesionType, Sample, FEATURE_DIM, FEATURE_NAMES};
use memristim_core::SCHEMA_VERSION;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Text of a float that parses back to the same value.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Where a command writes its files.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutDir { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> CliResult<()> {
        let p = self.path(name);
        fs::write(&p, text).map_err(|e| CliError::io(&p, e))
    }

    /// CSV with a header row.
    pub fn write_csv<R, I>(&self, name: &str, header: &[&str], rows: I) -> CliResult<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let p = self.path(name);
        let mut w = csv::Writer::from_path(&p).map_err(|e| CliError::io(&p, e))?;
        w.write_record(header).map_err(|e| CliError::io(&p, e))?;
        for r in rows {
            w.write_record(r).map_err(|e| CliError::io(&p, e))?;
        }
        w.flush().map_err(|e| CliError::io(&p, e))
    }

    /// Pretty JSON tagged with the schema version and the command name.
    pub fn write_report<T: Serialize>(&self, name: &str, command: &str, body: &T) -> CliResult<()> {
        #[derive(Serialize)]
        struct Envelope<'a, T> {
            schema_version: u32,
            command: &'a str,
            #[serde(flatten)]
            body: &'a T,
        }
        self.write_json(name, &Envelope { schema_version: SCHEMA_VERSION, command, body })
    }

    /// Pretty JSON of `value` as is.
    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
        text.push('\n');
        self.write_text(name, &text)
    }
}

fn open_csv(path: &Path) -> CliResult<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| CliError::io(path, e))
}

/// Column positions of `names` in the header, which must contain all of them.
fn columns(path: &Path, headers: &csv::StringRecord, names: &[&str]) -> CliResult<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            headers
                .iter()
                .position(|h| h == *n)
                .ok_or_else(|| CliError::Runtime(format!("{}: missing column `{n}`", path.display())))
        })
        .collect()
}

fn field(rec: &csv::StringRecord, col: usize) -> &str {
    rec.get(col).unwrap_or("")
}

fn parse_f64(path: &Path, row: usize, s: &str) -> CliResult<f64> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Runtime(format!("{}: row {row}: `{s}` is not a finite number", path.display())))
}

fn parse_usize(path: &Path, row: usize, s: &str) -> CliResult<usize> {
    s.parse()
        .map_err(|_| CliError::Runtime(format!("{}: row {row}: `{s}` is not a non-negative integer", path.display())))
}

fn parse_label(path: &Path, row: usize, s: &str) -> CliResult<bool> {
    match s {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        _ => Err(CliError::Runtime(format!("{}: row {row}: label `{s}` is not 0/1", path.display()))),
    }
}

fn parse_type(path: &Path, row: usize, s: &str) -> CliResult<LesionType> {
    s.parse().map_err(|e| CliError::Runtime(format!("{}: row {row}: {e}", path.display())))
}

fn records(path: &Path) -> CliResult<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut r = open_csv(path)?;
    let headers = r.headers().map_err(|e| CliError::io(path, e))?.clone();
    let rows = r.records().collect::<Result<Vec<_>, _>>().map_err(|e| CliError::io(path, e))?;
    Ok((headers, rows))
}

/// `t_s,temp_C` temperature profile.
pub fn read_profile(path: &Path) -> CliResult<Vec<(f64, f64)>> {
    let (headers, rows) = records(path)?;
    let c = columns(path, &headers, &["t_s", "temp_C"])?;
    rows.iter()
        .enumerate()
        .map(|(k, r)| Ok((parse_f64(path, k + 1, field(r, c[0]))?, parse_f64(path, k + 1, field(r, c[1]))?)))
        .collect()
}

/// `pulse_index,conductance_S` update curve: the potentiation block, then
/// the depression block starting where `pulse_index` returns to 0.
pub fn read_curve(path: &Path) -> CliResult<MeasuredCurve> {
    let (headers, rows) = records(path)?;
    let c = columns(path, &headers, &["pulse_index", "conductance_S"])?;
    let mut blocks: Vec<Vec<f64>> = Vec::new();
    for (k, r) in rows.iter().enumerate() {
        let idx = parse_usize(path, k + 1, field(r, c[0]))?;
        let g = parse_f64(path, k + 1, field(r, c[1]))?;
        if idx == 0 || blocks.is_empty() {
            blocks.push(Vec::new());
        }
        blocks.last_mut().expect("a block exists").push(g);
    }
    match <[Vec<f64>; 2]>::try_from(blocks) {
        Ok([potentiation, depression]) => Ok(MeasuredCurve { potentiation, depression }),
        Err(b) => Err(CliError::Runtime(format!(
            "{}: expected a potentiation and a depression block (pulse_index restarting at 0), found {}",
            path.display(),
            b.len()
        ))),
    }
}

pub fn feature_header() -> Vec<&'static str> {
    let mut h = vec!["id", "label", "lesion_type"];
    h.extend(FEATURE_NAMES);
    h
}

/// One row per sample: `id,label,lesion_type,<features>`.
pub fn feature_rows(samples: &[Sample]) -> impl Iterator<Item = Vec<String>> + '_ {
    samples.iter().enumerate().map(|(k, s)| {
        let mut r = vec![k.to_string(), u8::from(s.label).to_string(), s.lesion_type.name().to_string()];
        r.extend(s.features.iter().map(|&v| num(v)));
        r
    })
}

pub fn read_features(path: &Path) -> CliResult<Vec<Sample>> {
    let (headers, rows) = records(path)?;
    let c = columns(path, &headers, &["label", "lesion_type"])?;
    let fc = columns(path, &headers, &FEATURE_NAMES)?;
    debug_assert_eq!(fc.len(), FEATURE_DIM);
    rows.iter()
        .enumerate()
        .map(|(k, r)| {
            let features = fc.iter().map(|&j| parse_f64(path, k + 1, field(r, j))).collect::<CliResult<_>>()?;
            Ok(Sample {
                features,
                label: parse_label(path, k + 1, field(r, c[0]))?,
                lesion_type: parse_type(path, k + 1, field(r, c[1]))?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    /// Image path, resolved against the manifest's directory.
    pub image: PathBuf,
    pub candidate_id: usize,
    pub label: bool,
    pub lesion_type: LesionType,
}

pub const MANIFEST_HEADER: [&str; 4] = ["image", "candidate_id", "label", "lesion_type"];

pub fn read_manifest(path: &Path) -> CliResult<Vec<ManifestRow>> {
    let (headers, rows) = records(path)?;
    let c = columns(path, &headers, &MANIFEST_HEADER)?;
    let base = path.parent().unwrap_or(Path::new(""));
    rows.iter()
        .enumerate()
        .map(|(k, r)| {
            Ok(ManifestRow {
                image: base.join(field(r, c[0])),
                candidate_id: parse_usize(path, k + 1, field(r, c[1]))?,
                label: parse_label(path, k + 1, field(r, c[2]))?,
                lesion_type: parse_type(path, k + 1, field(r, c[3]))?,
            })
        })
        .collect()
}
