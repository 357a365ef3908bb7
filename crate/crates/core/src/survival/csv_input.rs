//! CSV ingestion: header `time,status,u1,...,up`, `.` decimal separator,
//! optionally gzip-compressed.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;

use super::dataset::{IngestOptions, Record, SurvivalDataset};
use crate::error::{Error, Result};

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// Reads a dataset from a CSV file, transparently decompressing gzip input.
pub fn read_csv_path(path: impl AsRef<Path>, options: IngestOptions) -> Result<SurvivalDataset> {
    let mut file = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 2];
    let read = file.read(&mut magic)?;
    let head = std::io::Cursor::new(magic[..read].to_vec());
    let stream = head.chain(file);
    if read == 2 && magic == GZIP_MAGIC {
        read_csv(MultiGzDecoder::new(stream), options)
    } else {
        read_csv(stream, options)
    }
}

/// Reads a dataset from uncompressed CSV text.
pub fn read_csv<R: Read>(reader: R, options: IngestOptions) -> Result<SurvivalDataset> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = csv.headers()?.clone();
    if header.len() < 3
        || !header[0].eq_ignore_ascii_case("time")
        || !header[1].eq_ignore_ascii_case("status")
    {
        return Err(Error::BadHeader(header.iter().collect::<Vec<_>>().join(",")));
    }
    let names: Vec<String> = header.iter().skip(2).map(str::to_owned).collect();

    let mut records = Vec::new();
    for (index, row) in csv.records().enumerate() {
        let row = row?;
        let line = index + 1;
        if row.len() != header.len() {
            return Err(Error::RaggedRow {
                row: line,
                expected: header.len(),
                found: row.len(),
            });
        }
        let time = parse_finite(&row[0], line, "time")?;
        let status = parse_status(&row[1], line)?;
        let predictors = names
            .iter()
            .enumerate()
            .map(|(k, name)| parse_finite(&row[k + 2], line, name))
            .collect::<Result<Vec<_>>>()?;
        records.push(Record {
            time,
            status,
            predictors,
        });
    }
    SurvivalDataset::ingest(&records, names, options)
}

fn parse_finite(field: &str, row: usize, column: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::NonFinite {
            row,
            column: column.to_owned(),
            value: field.to_owned(),
        }),
    }
}

fn parse_status(field: &str, row: usize) -> Result<u8> {
    match field.parse::<f64>() {
        Ok(v) if v == 0.0 => Ok(0),
        Ok(v) if v == 1.0 => Ok(1),
        _ => Err(Error::InvalidStatus {
            row,
            value: field.to_owned(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use flate2::write::GzEncoder;
    use flate2::Compression;

    use super::*;
    use crate::survival::TauRule;

    const TOY: &str = "time,status,a,b\n1.0,1,0.5,2\n2.0,0,1.5,1\n3.5,1,2.5,7\n";

    fn raw() -> IngestOptions {
        IngestOptions {
            tau_rule: TauRule::MaxObserved,
            standardize: false,
        }
    }

    #[test]
    fn reads_plain_csv() {
        let data = read_csv(TOY.as_bytes(), raw()).unwrap();
        assert_eq!(data.n(), 3);
        assert_eq!(data.p(), 2);
        assert_eq!(data.names(), ["a", "b"]);
        assert_eq!(data.column(1), [2.0, 1.0, 7.0]);
        assert!(!data.observation(1).delta);
    }

    #[test]
    fn reads_gzip_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("toy.csv.gz");
        let mut encoder = GzEncoder::new(Vec::new(), Compression::default());
        encoder.write_all(TOY.as_bytes()).unwrap();
        std::fs::write(&path, encoder.finish().unwrap()).unwrap();
        let data = read_csv_path(&path, raw()).unwrap();
        assert_eq!(data.n(), 3);
        assert_eq!(data.column(0), [0.5, 1.5, 2.5]);
    }

    #[test]
    fn malformed_status_reports_row() {
        let text = "time,status,a\n1,1,0\n2,2,1\n";
        match read_csv(text.as_bytes(), raw()) {
            Err(Error::InvalidStatus { row, value }) => {
                assert_eq!(row, 2);
                assert_eq!(value, "2");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_header_and_nan() {
        assert!(matches!(
            read_csv("t,s,a\n1,1,0\n".as_bytes(), raw()),
            Err(Error::BadHeader(_))
        ));
        assert!(matches!(
            read_csv("time,status,a\n1,1,NaN\n2,1,1\n".as_bytes(), raw()),
            Err(Error::NonFinite { row: 1, .. })
        ));
    }
}
