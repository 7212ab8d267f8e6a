use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Serialize, Serializer};

use crate::model::Resolved;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub struct Sink(Box<dyn Write>);

impl Sink {
    pub fn open(path: &Option<PathBuf>) -> Result<Self, CliError> {
        Ok(Sink(match path {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
                CliError::Usage(format!("cannot create {}: {e}", p.display()))
            })?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        }))
    }

    pub fn write_str(&mut self, s: &str) -> Result<(), CliError> {
        self.0.write_all(s.as_bytes())?;
        self.0.flush()?;
        Ok(())
    }

    pub fn write_line(&mut self, s: &str) -> Result<(), CliError> {
        self.write_str(s)?;
        self.write_str("\n")
    }
}

// JSON cannot hold -inf (the log of a zero probability)
fn finite_or_string<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str(&v.to_string())
    }
}

// set-partition counts are integers; print them as such while exact
fn count<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if *v < 9.0e15 {
        s.serialize_u64(*v as u64)
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Debug, Serialize)]
pub struct EppfRow {
    pub shape: String,
    pub blocks: usize,
    /// Number of set partitions with this shape.
    #[serde(serialize_with = "count")]
    pub multiplicity: f64,
    pub probability: f64,
    #[serde(serialize_with = "finite_or_string")]
    pub log_probability: f64,
}

#[derive(Serialize)]
struct EppfDocument<'a> {
    model: &'a str,
    alpha: f64,
    params: &'a BTreeMap<String, f64>,
    n: usize,
    total: f64,
    rows: &'a [EppfRow],
}

#[derive(Debug, Serialize)]
pub struct SampleRow {
    pub index: usize,
    pub partition: String,
    pub shape: String,
}

#[derive(Debug, Serialize)]
pub struct HistogramRow {
    pub shape: String,
    pub count: u64,
    pub frequency: f64,
    /// Model probability of the shape.
    pub expected: f64,
}

fn write_csv<T: Serialize>(sink: &mut Sink, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(&mut sink.0);
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn write_eppf(sink: &mut Sink, format: Format, resolved: &Resolved, n: usize, total: f64, rows: &[EppfRow]) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(sink, rows),
        Format::Json => {
            let model = resolved.model();
            sink.write_line(&to_json(&EppfDocument {
                model: model.label(),
                alpha: model.alpha(),
                params: model.params(),
                n,
                total,
                rows,
            })?)
        }
    }
}

pub fn write_samples(sink: &mut Sink, format: Format, rows: &[SampleRow]) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(sink, rows),
        Format::Json => sink.write_line(&to_json(rows)?),
    }
}

pub fn write_histogram(sink: &mut Sink, format: Format, rows: &[HistogramRow]) -> Result<(), CliError> {
    match format {
        Format::Csv => write_csv(sink, rows),
        Format::Json => sink.write_line(&to_json(rows)?),
    }
}
