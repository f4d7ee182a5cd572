//! Clinical and long-format ratings CSV files.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::cohort::{CohortTable, NStage, PatientRecord, TStage, Treatment, MAX_RATING};
use crate::error::{Error, Result};
use crate::symptom::{Symptom, TIMEPOINT_COUNT};

pub const CLINICAL_HEADER: [&str; 6] = ["patient_id", "treatment", "t_stage", "n_stage", "age", "dose"];
pub const RATINGS_HEADER: [&str; 4] = ["patient_id", "symptom", "timepoint", "rating"];

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_cohort(clinical_path: &Path, ratings_path: &Path) -> Result<CohortTable> {
    let provenance = format!("{} + {}", clinical_path.display(), ratings_path.display());
    read_cohort(
        open(clinical_path)?,
        &clinical_path.display().to_string(),
        open(ratings_path)?,
        &ratings_path.display().to_string(),
        provenance,
    )
}

fn malformed(file: &str, row: u64, message: impl Into<String>) -> Error {
    Error::MalformedRow {
        file: file.to_string(),
        row,
        message: message.into(),
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

/// Reads records and checks the header. Returns `None` for a zero-byte input.
fn records<R: Read>(
    input: R,
    file: &str,
    header: &[&str],
) -> Result<Option<Vec<(u64, csv::StringRecord)>>> {
    let mut rdr = reader(input);
    let mut rows = Vec::new();
    for result in rdr.records() {
        let record = result.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line());
            malformed(file, row, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push((line, record));
    }
    let Some((line, first)) = rows.first() else {
        return Ok(None);
    };
    if first.iter().ne(header.iter().copied()) {
        return Err(malformed(
            file,
            *line,
            format!("expected header `{}`", header.join(",")),
        ));
    }
    for (line, record) in &rows[1..] {
        if record.len() != header.len() {
            return Err(malformed(
                file,
                *line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
    }
    rows.remove(0);
    Ok(Some(rows))
}

fn optional_number(field: &str, file: &str, row: u64, name: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(malformed(file, row, format!("{name} `{field}` is not a number"))),
    }
}

/// Parses a cohort from the two CSV streams.
pub fn read_cohort<C: Read, R: Read>(
    clinical: C,
    clinical_name: &str,
    ratings: R,
    ratings_name: &str,
    provenance: impl Into<String>,
) -> Result<CohortTable> {
    let clinical_rows = records(clinical, clinical_name, &CLINICAL_HEADER)?.unwrap_or_default();
    let mut patients = Vec::with_capacity(clinical_rows.len());
    let mut index: HashMap<String, usize> = HashMap::new();
    for (row, rec) in clinical_rows {
        let id = &rec[0];
        if id.is_empty() {
            return Err(malformed(clinical_name, row, "empty patient_id"));
        }
        let treatment: Treatment = rec[1]
            .parse()
            .map_err(|e: String| malformed(clinical_name, row, e))?;
        let t_stage = TStage::parse_field(&rec[2])
            .ok_or_else(|| malformed(clinical_name, row, format!("unknown t_stage `{}`", &rec[2])))?;
        let n_stage = NStage::parse_field(&rec[3])
            .ok_or_else(|| malformed(clinical_name, row, format!("unknown n_stage `{}`", &rec[3])))?;
        let age = optional_number(&rec[4], clinical_name, row, "age")?;
        let dose = optional_number(&rec[5], clinical_name, row, "dose")?;
        if index.insert(id.to_string(), patients.len()).is_some() {
            return Err(malformed(
                clinical_name,
                row,
                format!("duplicate patient_id `{id}`"),
            ));
        }
        let mut p = PatientRecord::new(id, treatment);
        p.t_stage = t_stage;
        p.n_stage = n_stage;
        p.age = age;
        p.dose = dose;
        patients.push(p);
    }

    let ratings_rows = records(ratings, ratings_name, &RATINGS_HEADER)?.unwrap_or_default();
    for (row, rec) in ratings_rows {
        let id = &rec[0];
        let &slot = index.get(id).ok_or_else(|| Error::UnknownPatient {
            file: ratings_name.to_string(),
            row,
            patient_id: id.to_string(),
        })?;
        let symptom: Symptom = rec[1].parse()?;
        let timepoint: usize = rec[2]
            .parse()
            .ok()
            .filter(|t| *t < TIMEPOINT_COUNT)
            .ok_or_else(|| {
                malformed(
                    ratings_name,
                    row,
                    format!("timepoint `{}` is not an integer in 0..=11", &rec[2]),
                )
            })?;
        let value = &rec[3];
        let rating: i64 = value.parse().map_err(|_| {
            malformed(ratings_name, row, format!("rating `{value}` is not an integer"))
        })?;
        if !(0..=i64::from(MAX_RATING)).contains(&rating) {
            return Err(Error::RatingOutOfRange {
                file: ratings_name.to_string(),
                row,
                value: value.to_string(),
            });
        }
        let matrix = &mut patients[slot].ratings;
        if matrix.get(symptom, timepoint).is_some() {
            return Err(Error::DuplicateRating {
                file: ratings_name.to_string(),
                row,
                patient_id: id.to_string(),
                symptom: symptom.name().to_string(),
                timepoint,
            });
        }
        matrix.set(symptom, timepoint, Some(rating as u8));
    }

    CohortTable::new(patients, provenance)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io {
        path: "<csv writer>".into(),
        source: e.into(),
    }
}

fn number_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes both files into writers, sorted by patient id, then symptom, then timepoint.
pub fn write_cohort_to<C: Write, R: Write>(cohort: &CohortTable, clinical: C, ratings: R) -> Result<()> {
    let mut order: Vec<&PatientRecord> = cohort.patients.iter().collect();
    order.sort_by(|a, b| a.patient_id.cmp(&b.patient_id));

    let mut cw = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(clinical);
    cw.write_record(CLINICAL_HEADER).map_err(csv_error)?;
    for p in &order {
        cw.write_record([
            p.patient_id.as_str(),
            p.treatment.label(),
            p.t_stage.csv_field(),
            p.n_stage.csv_field(),
            &number_field(p.age),
            &number_field(p.dose),
        ])
        .map_err(csv_error)?;
    }
    cw.flush().map_err(|e| csv_error(e.into()))?;

    let mut rw = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(ratings);
    rw.write_record(RATINGS_HEADER).map_err(csv_error)?;
    for p in &order {
        for (symptom, timepoint, rating) in p.ratings.present() {
            rw.write_record([
                p.patient_id.as_str(),
                symptom.name(),
                &timepoint.to_string(),
                &rating.to_string(),
            ])
            .map_err(csv_error)?;
        }
    }
    rw.flush().map_err(|e| csv_error(e.into()))?;
    Ok(())
}

/// Writes `clinical.csv` and `ratings.csv` into `dir`, creating it if needed.
pub fn write_cohort(cohort: &CohortTable, dir: &Path) -> Result<()> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let clinical_path = dir.join("clinical.csv");
    let ratings_path = dir.join("ratings.csv");
    let clinical = File::create(&clinical_path).map_err(io_err(&clinical_path))?;
    let ratings = File::create(&ratings_path).map_err(io_err(&ratings_path))?;
    write_cohort_to(
        cohort,
        std::io::BufWriter::new(clinical),
        std::io::BufWriter::new(ratings),
    )
}
