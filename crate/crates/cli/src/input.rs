// SPDX-License-Identifier: Apache-2.0

//! CSV inputs: roster, long-form evaluations and instructor grades.
//!
//! Every file is UTF-8 CSV with a header row.
//!
//! ```text
//! roster.csv        id,name
//! evaluations.csv   evaluator,evaluatee,score
//! grades.csv        id,grade
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use peer_eval::{EvaluationMatrix, InstructorWeights};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Student {
    pub id: String,
    pub name: String,
}

/// Students in matrix index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Roster {
    students: Vec<Student>,
    index: HashMap<String, usize>,
}

impl Roster {
    pub fn new(students: Vec<Student>) -> Result<Self> {
        let mut index = HashMap::with_capacity(students.len());
        for (i, s) in students.iter().enumerate() {
            if s.id.is_empty() {
                return Err(CliError::Roster(format!("empty id for student {}", i + 1)));
            }
            if index.insert(s.id.clone(), i).is_some() {
                return Err(CliError::Roster(format!("duplicate id `{}`", s.id)));
            }
        }
        Ok(Self { students, index })
    }

    pub fn from_ids<S: AsRef<str>>(ids: &[S]) -> Result<Self> {
        Self::new(
            ids.iter()
                .map(|id| Student {
                    id: id.as_ref().to_string(),
                    name: id.as_ref().to_string(),
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.students.len()
    }

    pub fn is_empty(&self) -> bool {
        self.students.is_empty()
    }

    pub fn students(&self) -> &[Student] {
        &self.students
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.students[i].id
    }
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(reader(file))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(r)
}

fn csv_error(path: &Path, err: csv::Error) -> CliError {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    match err.into_kind() {
        csv::ErrorKind::Io(e) => CliError::io(path, e),
        other => CliError::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Records with their 1-based line numbers, each checked for `width` fields.
fn records(path: &Path, width: usize) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut rdr = open(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != width {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        out.push((line, rec));
    }
    Ok(out)
}

fn parse_number(path: &Path, line: u64, field: &str, what: &str) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{what} `{field}` is not a finite number"),
        }),
    }
}

pub fn load_roster(path: &Path) -> Result<Roster> {
    let students = records(path, 2)?
        .into_iter()
        .map(|(_, r)| Student {
            id: r[0].to_string(),
            name: r[1].to_string(),
        })
        .collect();
    Roster::new(students)
}

/// Read long-form evaluations into a square matrix in roster order.
///
/// Evaluators with no rows about teammates are returned in the missing set;
/// their column is left at zero. Self-evaluation cells are optional.
pub fn load_evaluations(
    path: &Path,
    roster: &Roster,
) -> Result<(EvaluationMatrix, BTreeSet<usize>)> {
    let n = roster.len();
    let mut cells: Vec<Option<f64>> = vec![None; n * n];
    let resolve = |line: u64, id: &str| {
        roster.index_of(id).ok_or_else(|| CliError::UnknownStudent {
            path: path.to_path_buf(),
            line,
            id: id.to_string(),
        })
    };

    for (line, rec) in records(path, 3)? {
        let j = resolve(line, &rec[0])?;
        let i = resolve(line, &rec[1])?;
        let score = parse_number(path, line, &rec[2], "score")?;
        if score < 0.0 {
            return Err(CliError::NegativeScore {
                evaluator: rec[0].to_string(),
                evaluatee: rec[1].to_string(),
            });
        }
        let cell = &mut cells[i * n + j];
        if cell.is_some() {
            return Err(CliError::DuplicateCell {
                evaluator: rec[0].to_string(),
                evaluatee: rec[1].to_string(),
            });
        }
        *cell = Some(score);
    }

    let mut missing = BTreeSet::new();
    for j in 0..n {
        let reported: Vec<usize> = (0..n)
            .filter(|&i| i != j && cells[i * n + j].is_some())
            .collect();
        if reported.is_empty() {
            missing.insert(j);
        } else if reported.len() < n - 1 {
            let absent = (0..n)
                .find(|&i| i != j && cells[i * n + j].is_none())
                .unwrap();
            return Err(CliError::IncompleteSubmission {
                evaluator: roster.id(j).to_string(),
                evaluatee: roster.id(absent).to_string(),
            });
        }
    }

    let rows = (0..n)
        .map(|i| (0..n).map(|j| cells[i * n + j].unwrap_or(0.0)).collect())
        .collect();
    Ok((EvaluationMatrix::from_rows(rows)?, missing))
}

/// Instructor grades in roster order. Students absent from the file get 0
/// when `missing_as_zero` is set and are an error otherwise.
pub fn load_instructor_grades(
    path: &Path,
    roster: &Roster,
    missing_as_zero: bool,
) -> Result<InstructorWeights> {
    let n = roster.len();
    let mut grades: Vec<Option<f64>> = vec![None; n];
    for (line, rec) in records(path, 2)? {
        let i = roster
            .index_of(&rec[0])
            .ok_or_else(|| CliError::UnknownStudent {
                path: path.to_path_buf(),
                line,
                id: rec[0].to_string(),
            })?;
        let grade = parse_number(path, line, &rec[1], "grade")?;
        if grade < 0.0 {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("negative grade {grade} for `{}`", &rec[0]),
            });
        }
        if grades[i].replace(grade).is_some() {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("second grade for `{}`", &rec[0]),
            });
        }
    }
    let values = grades
        .into_iter()
        .enumerate()
        .map(|(i, g)| match g {
            Some(g) => Ok(g),
            None if missing_as_zero => Ok(0.0),
            None => Err(CliError::MissingGrade {
                id: roster.id(i).to_string(),
            }),
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(InstructorWeights::new(values)?)
}

/// Write `a` in the long form read by [`load_evaluations`]. Columns of
/// students who did not submit are left out so they read back as missing.
/// Scores are written with full round-trip precision.
pub fn write_evaluations<W: Write>(out: W, a: &EvaluationMatrix, roster: &Roster) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| CliError::Invalid(format!("writing evaluations: {e}"));
    wtr.write_record(["evaluator", "evaluatee", "score"])
        .map_err(to_err)?;
    for j in (0..a.n()).filter(|&j| a.is_submitted(j)) {
        for i in 0..a.n() {
            wtr.write_record([roster.id(j), roster.id(i), &a.get(i, j).to_string()])
                .map_err(to_err)?;
        }
    }
    wtr.flush()
        .map_err(|e| CliError::Invalid(format!("writing evaluations: {e}")))?;
    Ok(())
}
