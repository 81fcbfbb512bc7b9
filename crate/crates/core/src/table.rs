//! Stratified 2×2 count data.
//!
//! Each stratum is laid out as
//!
//! ```text
//!              mentioned   not mentioned
//!   in G           a             b
//!   not in G       c             d
//! ```
//!
//! so `a + c` is the number of mentioned items and `b + d` the number of
//! items not mentioned in that stratum.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four cell counts of one stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Counts {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl Counts {
    pub const fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Counts { a, b, c, d }
    }

    pub fn n(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    /// Column total of mentioned items, `a + c`.
    pub fn mentioned(&self) -> u64 {
        self.a + self.c
    }

    /// Column total of items not mentioned, `b + d`.
    pub fn not_mentioned(&self) -> u64 {
        self.b + self.d
    }

    /// Swaps `b` and `c`, exchanging the roles of rows and columns.
    pub fn transpose(&self) -> Self {
        Counts::new(self.a, self.c, self.b, self.d)
    }

    pub(crate) fn as_f64(&self) -> [f64; 4] {
        [self.a as f64, self.b as f64, self.c as f64, self.d as f64]
    }
}

/// Anything that carries the cells of a single 2×2 stratum.
///
/// Estimators are generic over this trait so the simulation can work on bare
/// [`Counts`] while user-facing code passes labelled [`StratumTable`]s.
pub trait TwoByTwo {
    fn cells(&self) -> Counts;

    fn label(&self) -> Option<&str> {
        None
    }
}

impl TwoByTwo for Counts {
    fn cells(&self) -> Counts {
        *self
    }
}

/// Human-readable reference to a stratum for diagnostics.
pub(crate) fn stratum_name<T: TwoByTwo>(t: &T, index: usize) -> String {
    match t.label() {
        Some(l) => format!("`{l}`"),
        None => format!("#{}", index + 1),
    }
}

/// One labelled stratum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumTable {
    pub label: String,
    #[serde(flatten)]
    pub counts: Counts,
}

impl StratumTable {
    /// Builds a stratum, rejecting an all-zero table.
    pub fn new(label: impl Into<String>, a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        let label = label.into();
        let counts = Counts::new(a, b, c, d);
        if counts.n() == 0 {
            return Err(Error::InvalidStratum {
                label,
                message: "all four counts are zero".into(),
            });
        }
        Ok(StratumTable { label, counts })
    }

    pub fn a(&self) -> u64 {
        self.counts.a
    }
    pub fn b(&self) -> u64 {
        self.counts.b
    }
    pub fn c(&self) -> u64 {
        self.counts.c
    }
    pub fn d(&self) -> u64 {
        self.counts.d
    }
    pub fn n(&self) -> u64 {
        self.counts.n()
    }

    pub fn transpose(&self) -> Self {
        StratumTable {
            label: self.label.clone(),
            counts: self.counts.transpose(),
        }
    }

    /// The cross-table view: group G row plus world (column total) row.
    pub fn to_cross_table(&self) -> CrossTableRow {
        CrossTableRow {
            label: self.label.clone(),
            g_mentioned: self.a(),
            g_not_mentioned: self.b(),
            world_mentioned: self.counts.mentioned(),
            world_not_mentioned: self.counts.not_mentioned(),
        }
    }
}

impl TwoByTwo for StratumTable {
    fn cells(&self) -> Counts {
        self.counts
    }

    fn label(&self) -> Option<&str> {
        Some(&self.label)
    }
}

/// A stratum given as group-G counts plus world totals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossTableRow {
    pub label: String,
    pub g_mentioned: u64,
    pub g_not_mentioned: u64,
    pub world_mentioned: u64,
    pub world_not_mentioned: u64,
}

/// Converts a cross-table row into a contingency table by subtracting the
/// group counts from the world totals.
pub fn from_cross_table(row: &CrossTableRow) -> Result<StratumTable> {
    let c = row
        .world_mentioned
        .checked_sub(row.g_mentioned)
        .ok_or_else(|| Error::InvalidStratum {
            label: row.label.clone(),
            message: format!(
                "world_mentioned ({}) < g_mentioned ({})",
                row.world_mentioned, row.g_mentioned
            ),
        })?;
    let d = row
        .world_not_mentioned
        .checked_sub(row.g_not_mentioned)
        .ok_or_else(|| Error::InvalidStratum {
            label: row.label.clone(),
            message: format!(
                "world_not_mentioned ({}) < g_not_mentioned ({})",
                row.world_not_mentioned, row.g_not_mentioned
            ),
        })?;
    StratumTable::new(
        row.label.clone(),
        row.g_mentioned,
        row.g_not_mentioned,
        c,
        d,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    /// `a + c = 0`
    NoMentionedArticles,
    /// `b + d = 0`
    NoUnmentionedArticles,
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExclusionReason::NoMentionedArticles => "no mentioned articles",
            ExclusionReason::NoUnmentionedArticles => "no unmentioned articles",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedStratum {
    pub table: StratumTable,
    pub reason: ExclusionReason,
}

/// Ordered strata with unique labels, plus any strata set aside by
/// [`filter_informative`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StratifiedDataset {
    strata: Vec<StratumTable>,
    excluded: Vec<ExcludedStratum>,
}

impl StratifiedDataset {
    pub fn new(strata: Vec<StratumTable>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(strata.len());
        for t in &strata {
            if !seen.insert(t.label.as_str()) {
                return Err(Error::DuplicateLabel(t.label.clone()));
            }
        }
        Ok(StratifiedDataset {
            strata,
            excluded: Vec::new(),
        })
    }

    pub fn strata(&self) -> &[StratumTable] {
        &self.strata
    }

    pub fn excluded(&self) -> &[ExcludedStratum] {
        &self.excluded
    }

    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    /// Swaps `b` and `c` in every stratum.
    pub fn transpose(&self) -> Self {
        StratifiedDataset {
            strata: self.strata.iter().map(StratumTable::transpose).collect(),
            excluded: self
                .excluded
                .iter()
                .map(|e| ExcludedStratum {
                    table: e.table.transpose(),
                    reason: e.reason,
                })
                .collect(),
        }
    }

    /// Serializes the retained strata in the canonical CSV layout.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for t in &self.strata {
            w.write_record([
                t.label.clone(),
                t.a().to_string(),
                t.b().to_string(),
                t.c().to_string(),
                t.d().to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

pub const CSV_HEADER: [&str; 5] = ["stratum", "a", "b", "c", "d"];

/// Parses `stratum,a,b,c,d` CSV text. Strata keep file order and are not
/// filtered.
pub fn parse_csv(text: &str) -> Result<StratifiedDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(Error::EmptyBody),
        Some(r) => r.map_err(csv_error)?,
    };
    let header_line = header.position().map_or(1, |p| p.line());
    let names: Vec<&str> = header.iter().collect();
    if names != CSV_HEADER {
        return Err(Error::Csv {
            line: header_line,
            field: None,
            message: format!(
                "expected header `{}`, found `{}`",
                CSV_HEADER.join(","),
                names.join(",")
            ),
        });
    }

    let mut strata = Vec::new();
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != CSV_HEADER.len() {
            return Err(Error::Csv {
                line,
                field: None,
                message: format!("expected 5 fields, found {}", record.len()),
            });
        }
        let label = &record[0];
        if label.is_empty() {
            return Err(Error::Csv {
                line,
                field: Some("stratum"),
                message: "empty stratum label".into(),
            });
        }
        let mut cells = [0u64; 4];
        for (slot, (raw, name)) in cells
            .iter_mut()
            .zip(record.iter().skip(1).zip(CSV_HEADER[1..].iter()))
        {
            *slot = parse_count(raw).map_err(|message| Error::Csv {
                line,
                field: Some(name),
                message,
            })?;
        }
        let [a, b, c, d] = cells;
        let table = StratumTable::new(label, a, b, c, d).map_err(|e| Error::Csv {
            line,
            field: None,
            message: e.to_string(),
        })?;
        strata.push(table);
    }
    if strata.is_empty() {
        return Err(Error::EmptyBody);
    }
    StratifiedDataset::new(strata)
}

fn parse_count(raw: &str) -> std::result::Result<u64, String> {
    match raw.parse::<i128>() {
        Ok(v) if v < 0 => Err(format!("negative count {v}")),
        Ok(v) => u64::try_from(v).map_err(|_| format!("count {v} out of range")),
        Err(_) => Err(format!("`{raw}` is not a non-negative integer")),
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Csv {
        line,
        field: None,
        message: e.to_string(),
    }
}

#[derive(Deserialize)]
struct JsonStratum {
    stratum: String,
    a: u64,
    b: u64,
    c: u64,
    d: u64,
}

/// Parses a JSON array of `{"stratum", "a", "b", "c", "d"}` objects.
pub fn parse_json(text: &str) -> Result<StratifiedDataset> {
    let rows: Vec<JsonStratum> =
        serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
    if rows.is_empty() {
        return Err(Error::EmptyBody);
    }
    let strata = rows
        .into_iter()
        .map(|r| StratumTable::new(r.stratum, r.a, r.b, r.c, r.d))
        .collect::<Result<Vec<_>>>()?;
    StratifiedDataset::new(strata)
}

/// Moves strata with a zero column total into the excluded list.
///
/// Strata with a zero row total are kept; they contribute zero weight.
pub fn filter_informative(ds: StratifiedDataset) -> Result<StratifiedDataset> {
    let StratifiedDataset {
        strata,
        mut excluded,
    } = ds;
    let mut kept = Vec::with_capacity(strata.len());
    for t in strata {
        if t.counts.mentioned() == 0 {
            excluded.push(ExcludedStratum {
                table: t,
                reason: ExclusionReason::NoMentionedArticles,
            });
        } else if t.counts.not_mentioned() == 0 {
            excluded.push(ExcludedStratum {
                table: t,
                reason: ExclusionReason::NoUnmentionedArticles,
            });
        } else {
            kept.push(t);
        }
    }
    if kept.is_empty() {
        return Err(Error::NoInformativeStrata);
    }
    Ok(StratifiedDataset {
        strata: kept,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL_WORLD: &str =
        "stratum,a,b,c,d\ncat1,26,7,18,13\ncat2,15,7,15,9\ncat3,3,3,13,9\ncat4,0,10,0,10\n";

    #[test]
    fn parses_small_world_csv() {
        let ds = parse_csv(SMALL_WORLD).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.strata()[0].counts, Counts::new(26, 7, 18, 13));
        assert_eq!(ds.strata()[3].counts, Counts::new(0, 10, 0, 10));
        assert!(ds.excluded().is_empty());
    }

    #[test]
    fn crlf_and_whitespace() {
        let ds = parse_csv("stratum,a,b,c,d\r\n x , 1, 2,3 ,4\r\n").unwrap();
        assert_eq!(ds.strata()[0].label, "x");
        assert_eq!(ds.strata()[0].counts, Counts::new(1, 2, 3, 4));
    }

    #[test]
    fn header_only_is_empty_body() {
        assert_eq!(parse_csv("stratum,a,b,c,d\n"), Err(Error::EmptyBody));
        assert_eq!(parse_csv(""), Err(Error::EmptyBody));
    }

    #[test]
    fn negative_count_names_line_and_field() {
        let err = parse_csv("stratum,a,b,c,d\ncat1,26,7,-1,13\n").unwrap_err();
        match &err {
            Error::Csv { line, field, .. } => {
                assert_eq!(*line, 2);
                assert_eq!(*field, Some("c"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("field c"), "{msg}");
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(matches!(
            parse_csv("stratum,a,b,c,d\nx,1.5,1,1,1\n"),
            Err(Error::Csv {
                field: Some("a"),
                ..
            })
        ));
        assert!(matches!(
            parse_csv("stratum,a,b,c,d\nx,1,1,1\n"),
            Err(Error::Csv { line: 2, .. })
        ));
        assert!(matches!(
            parse_csv("label,a,b,c,d\nx,1,1,1,1\n"),
            Err(Error::Csv { line: 1, .. })
        ));
        assert!(matches!(
            parse_csv("stratum,a,b,c,d\nx,0,0,0,0\n"),
            Err(Error::Csv { line: 2, .. })
        ));
        assert_eq!(
            parse_csv("stratum,a,b,c,d\nx,1,1,1,1\ny,1,1,1,1\nx,2,2,2,2\n"),
            Err(Error::DuplicateLabel("x".into()))
        );
    }

    #[test]
    fn json_matches_csv() {
        let json = r#"[
            {"stratum": "cat1", "a": 26, "b": 7, "c": 18, "d": 13},
            {"stratum": "cat2", "a": 15, "b": 7, "c": 15, "d": 9},
            {"stratum": "cat3", "a": 3, "b": 3, "c": 13, "d": 9},
            {"stratum": "cat4", "a": 0, "b": 10, "c": 0, "d": 10}
        ]"#;
        assert_eq!(parse_json(json).unwrap(), parse_csv(SMALL_WORLD).unwrap());
    }

    #[test]
    fn json_errors() {
        assert_eq!(parse_json("[]"), Err(Error::EmptyBody));
        let err = parse_json(r#"[{"stratum": "x", "a": 1, "b": 1, "c": 1}]"#).unwrap_err();
        assert!(err.to_string().contains("`d`"), "{err}");
        assert!(matches!(
            parse_json(r#"[{"stratum": "x", "a": -1, "b": 1, "c": 1, "d": 1}]"#),
            Err(Error::Json(_))
        ));
        assert!(matches!(
            parse_json(
                r#"[{"stratum": "x", "a": 1, "b": 1, "c": 1, "d": 1},
                           {"stratum": "x", "a": 1, "b": 1, "c": 1, "d": 1}]"#
            ),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn cross_table_conversion() {
        let row = CrossTableRow {
            label: "s".into(),
            g_mentioned: 26,
            g_not_mentioned: 7,
            world_mentioned: 44,
            world_not_mentioned: 20,
        };
        assert_eq!(
            from_cross_table(&row).unwrap().counts,
            Counts::new(26, 7, 18, 13)
        );

        let empty_g = CrossTableRow {
            label: "s".into(),
            g_mentioned: 0,
            g_not_mentioned: 0,
            world_mentioned: 5,
            world_not_mentioned: 5,
        };
        assert_eq!(
            from_cross_table(&empty_g).unwrap().counts,
            Counts::new(0, 0, 5, 5)
        );

        let bad = CrossTableRow {
            label: "s".into(),
            g_mentioned: 10,
            g_not_mentioned: 0,
            world_mentioned: 9,
            world_not_mentioned: 0,
        };
        let err = from_cross_table(&bad).unwrap_err();
        assert!(err.to_string().contains("world_mentioned"), "{err}");
    }

    #[test]
    fn filtering() {
        let ds = filter_informative(parse_csv(SMALL_WORLD).unwrap()).unwrap();
        let labels: Vec<_> = ds.strata().iter().map(|t| t.label.as_str()).collect();
        assert_eq!(labels, ["cat1", "cat2", "cat3"]);
        assert_eq!(ds.excluded().len(), 1);
        assert_eq!(ds.excluded()[0].table.label, "cat4");
        assert_eq!(ds.excluded()[0].reason.to_string(), "no mentioned articles");

        let single =
            StratifiedDataset::new(vec![StratumTable::new("s", 5, 5, 5, 5).unwrap()]).unwrap();
        let kept = filter_informative(single.clone()).unwrap();
        assert_eq!(kept, single);

        let dead =
            StratifiedDataset::new(vec![StratumTable::new("s", 0, 10, 0, 10).unwrap()]).unwrap();
        assert_eq!(filter_informative(dead), Err(Error::NoInformativeStrata));

        let no_unmentioned =
            StratifiedDataset::new(vec![StratumTable::new("s", 3, 0, 4, 0).unwrap()]).unwrap();
        assert_eq!(
            filter_informative(no_unmentioned),
            Err(Error::NoInformativeStrata)
        );
    }

    #[test]
    fn zero_row_total_is_retained() {
        let ds = StratifiedDataset::new(vec![
            StratumTable::new("g-empty", 0, 0, 4, 6).unwrap(),
            StratumTable::new("s", 2, 3, 4, 6).unwrap(),
        ])
        .unwrap();
        assert_eq!(filter_informative(ds).unwrap().len(), 2);
    }
}
