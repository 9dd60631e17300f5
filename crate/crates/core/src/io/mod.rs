//! CSV persistence of interfaces, walks and reference tables.
//!
//! Every file has a mandatory header, LF line endings and floats written as
//! the shortest decimal that round-trips.

pub mod records;

use crate::error::{Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::marker::PhantomData;
use std::path::Path;

pub use records::*;

/// A row type bound to one file name and column list.
pub trait Schema: Serialize + DeserializeOwned {
    const FILE: &'static str;
    const COLUMNS: &'static [&'static str];
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

pub struct CsvWriter<T: Schema, W: Write> {
    inner: csv::Writer<W>,
    _row: PhantomData<T>,
}

impl<T: Schema, W: Write> CsvWriter<T, W> {
    pub fn new(sink: W) -> Result<Self> {
        let mut inner =
            csv::WriterBuilder::new().has_headers(false).terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
        inner.write_record(T::COLUMNS).map_err(|e| Error::Io(e.to_string()))?;
        Ok(Self { inner, _row: PhantomData })
    }

    pub fn write(&mut self, row: &T) -> Result<()> {
        self.inner.serialize(row).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush().map_err(|e| Error::Io(e.to_string()))?;
        self.inner.into_inner().map_err(|e| Error::Io(e.to_string()))
    }
}

pub fn create_csv<T: Schema>(path: &Path) -> Result<CsvWriter<T, BufWriter<File>>> {
    CsvWriter::new(BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?))
}

pub fn write_csv<'a, T: Schema + 'a>(path: &Path, rows: impl IntoIterator<Item = &'a T>) -> Result<()> {
    let mut w = create_csv::<T>(path)?;
    for r in rows {
        w.write(r)?;
    }
    w.finish()?;
    Ok(())
}

/// Streaming reader; rows are decoded one at a time.
pub struct CsvRows<T: Schema, R: Read> {
    inner: csv::DeserializeRecordsIntoIter<R, T>,
    file: String,
}

impl<T: Schema, R: Read> CsvRows<T, R> {
    pub fn new(source: R, file: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
        let header = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
        let mismatch = |column: &str, message: String| Error::SchemaMismatch {
            file: file.to_string(),
            row: 1,
            column: column.to_string(),
            message,
        };
        for (k, want) in T::COLUMNS.iter().enumerate() {
            match header.get(k) {
                Some(got) if got == *want => {}
                Some(got) if header.iter().any(|h| h == *want) => {
                    return Err(mismatch(want, format!("expected at position {}, found `{got}` there", k + 1)))
                }
                _ => return Err(mismatch(want, "missing column".into())),
            }
        }
        if let Some(extra) = header.get(T::COLUMNS.len()) {
            return Err(mismatch(extra, "unexpected column".into()));
        }
        Ok(Self { inner: rdr.into_deserialize(), file: file.to_string() })
    }

    fn locate(&self, e: csv::Error) -> Error {
        let file = self.file.clone();
        match e.into_kind() {
            csv::ErrorKind::Deserialize { pos, err } => {
                let column = err
                    .field()
                    .and_then(|f| T::COLUMNS.get(f as usize))
                    .map_or_else(|| "?".to_string(), |c| c.to_string());
                Error::SchemaMismatch {
                    file,
                    row: pos.map_or(0, |p| p.line()),
                    column,
                    message: err.kind().to_string(),
                }
            }
            csv::ErrorKind::UnequalLengths { pos, expected_len, len } => Error::SchemaMismatch {
                file,
                row: pos.map_or(0, |p| p.line()),
                column: T::COLUMNS.get(len.min(expected_len) as usize).unwrap_or(&"?").to_string(),
                message: format!("{len} fields, expected {expected_len}"),
            },
            other => Error::Io(format!("{file}: {other:?}")),
        }
    }
}

impl<T: Schema, R: Read> Iterator for CsvRows<T, R> {
    type Item = Result<T>;

    fn next(&mut self) -> Option<Result<T>> {
        self.inner.next().map(|r| r.map_err(|e| self.locate(e)))
    }
}

pub fn open_csv<T: Schema>(path: &Path) -> Result<CsvRows<T, BufReader<File>>> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    CsvRows::new(BufReader::new(f), &path.display().to_string())
}

pub fn read_csv<T: Schema>(path: &Path) -> Result<Vec<T>> {
    open_csv(path)?.collect()
}

/// Groups consecutive rows sharing a key.
pub struct GroupBy<I: Iterator, K, F> {
    rows: std::iter::Peekable<I>,
    key: F,
    _k: PhantomData<K>,
}

impl<T, I, K, F> Iterator for GroupBy<I, K, F>
where
    I: Iterator<Item = Result<T>>,
    K: PartialEq,
    F: Fn(&T) -> K,
{
    type Item = Result<(K, Vec<T>)>;

    fn next(&mut self) -> Option<Self::Item> {
        let first = match self.rows.next()? {
            Ok(r) => r,
            Err(e) => return Some(Err(e)),
        };
        let k = (self.key)(&first);
        let mut group = vec![first];
        while let Some(Ok(r)) = self.rows.peek() {
            if (self.key)(r) != k {
                break;
            }
            group.push(self.rows.next().unwrap().unwrap());
        }
        if let Some(Err(_)) = self.rows.peek() {
            if let Some(Err(e)) = self.rows.next() {
                return Some(Err(e));
            }
        }
        Some(Ok((k, group)))
    }
}

pub fn group_by<T, I, K, F>(rows: I, key: F) -> GroupBy<I, K, F>
where
    I: Iterator<Item = Result<T>>,
    F: Fn(&T) -> K,
{
    GroupBy { rows: rows.peekable(), key, _k: PhantomData }
}
