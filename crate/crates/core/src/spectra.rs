//! Band metadata, match-up records and CSV ingestion.
//!
//! A match-up table pairs a ten-band surface-reflectance spectrum with the
//! in-situ measurements taken at the same station within a day of the
//! satellite overpass. Tables are always kept sorted by `(date, station_id)`.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// One of the ten Sentinel-2 bands retained after preprocessing.
///
/// B8 (overlaps B8A), B9 (water vapour) and B10 (cirrus) carry no water
/// surface information and have no variant. Declaration order is the band
/// order used for "consecutive" triples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BandId {
    B1,
    B2,
    B3,
    B4,
    B5,
    B6,
    B7,
    B8A,
    B11,
    B12,
}

impl BandId {
    pub const COUNT: usize = 10;

    pub const ALL: [BandId; Self::COUNT] = [
        BandId::B1,
        BandId::B2,
        BandId::B3,
        BandId::B4,
        BandId::B5,
        BandId::B6,
        BandId::B7,
        BandId::B8A,
        BandId::B11,
        BandId::B12,
    ];

    /// Nominal central wavelength in nanometres.
    pub const fn central_wavelength_nm(self) -> f64 {
        match self {
            BandId::B1 => 443.0,
            BandId::B2 => 490.0,
            BandId::B3 => 560.0,
            BandId::B4 => 665.0,
            BandId::B5 => 705.0,
            BandId::B6 => 740.0,
            BandId::B7 => 783.0,
            BandId::B8A => 865.0,
            BandId::B11 => 1610.0,
            BandId::B12 => 2190.0,
        }
    }

    /// Position in [`BandId::ALL`].
    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn name(self) -> &'static str {
        match self {
            BandId::B1 => "B1",
            BandId::B2 => "B2",
            BandId::B3 => "B3",
            BandId::B4 => "B4",
            BandId::B5 => "B5",
            BandId::B6 => "B6",
            BandId::B7 => "B7",
            BandId::B8A => "B8A",
            BandId::B11 => "B11",
            BandId::B12 => "B12",
        }
    }

    pub fn from_name(name: &str) -> Option<BandId> {
        BandId::ALL.into_iter().find(|b| b.name() == name)
    }

    /// The band following `self` in retained-band order.
    pub fn next(self) -> Option<BandId> {
        BandId::ALL.get(self.index() + 1).copied()
    }

    /// Sentinel-2 band tokens that exist on the sensor but were dropped.
    pub fn is_excluded_name(name: &str) -> bool {
        matches!(name, "B8" | "B9" | "B10")
    }
}

impl fmt::Display for BandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Water-quality parameter measured in situ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParameterId {
    #[serde(rename = "chla")]
    ChlA,
    #[serde(rename = "ss")]
    SS,
    #[serde(rename = "turbidity")]
    Turbidity,
}

impl ParameterId {
    pub const ALL: [ParameterId; 3] = [ParameterId::ChlA, ParameterId::SS, ParameterId::Turbidity];

    /// Column name in the match-up CSV.
    pub const fn column(self) -> &'static str {
        match self {
            ParameterId::ChlA => "chla",
            ParameterId::SS => "ss",
            ParameterId::Turbidity => "turbidity",
        }
    }

    pub const fn units(self) -> &'static str {
        match self {
            ParameterId::ChlA => "ug/L",
            ParameterId::SS => "mg/L",
            ParameterId::Turbidity => "NTU",
        }
    }

    pub const fn label(self) -> &'static str {
        match self {
            ParameterId::ChlA => "Chl-a",
            ParameterId::SS => "SS",
            ParameterId::Turbidity => "Turbidity",
        }
    }

    const fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ParameterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for ParameterId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "chla" | "chl-a" | "chl_a" => Ok(ParameterId::ChlA),
            "ss" => Ok(ParameterId::SS),
            "turbidity" => Ok(ParameterId::Turbidity),
            other => Err(format!("unknown parameter `{other}` (expected chla, ss or turbidity)")),
        }
    }
}

/// Surface reflectance for every retained band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    reflectance: [f64; BandId::COUNT],
}

impl Spectrum {
    /// Builds a spectrum from values in [`BandId::ALL`] order. Every value must be finite.
    pub fn new(reflectance: [f64; BandId::COUNT]) -> Result<Self, BandId> {
        if let Some(band) = BandId::ALL.into_iter().find(|b| !reflectance[b.index()].is_finite()) {
            return Err(band);
        }
        Ok(Spectrum { reflectance })
    }

    /// A spectrum with the same reflectance in every band.
    pub fn uniform(value: f64) -> Self {
        Spectrum::new([value; BandId::COUNT]).expect("finite reflectance")
    }

    pub fn get(&self, band: BandId) -> f64 {
        self.reflectance[band.index()]
    }

    pub fn values(&self) -> &[f64; BandId::COUNT] {
        &self.reflectance
    }
}

/// How ingestion treats negative reflectance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum NegativePolicy {
    /// Values below `-tolerance` are rejected; values in `[-tolerance, 0)` become 0.
    ClampNearZero { tolerance: f64 },
    /// Every negative value is rejected.
    Reject,
    /// Negative values pass through unchanged.
    Allow,
}

impl Default for NegativePolicy {
    fn default() -> Self {
        NegativePolicy::ClampNearZero { tolerance: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestPolicy {
    #[serde(default)]
    pub negative: NegativePolicy,
}

impl IngestPolicy {
    fn apply(&self, value: f64) -> Result<f64, String> {
        if value >= 0.0 {
            return Ok(value);
        }
        match self.negative {
            NegativePolicy::Allow => Ok(value),
            NegativePolicy::Reject => Err(format!("negative reflectance {value}")),
            NegativePolicy::ClampNearZero { tolerance } => {
                if value >= -tolerance {
                    Ok(0.0)
                } else {
                    Err(format!("reflectance {value} below -{tolerance}"))
                }
            }
        }
    }
}

/// Station/day pairing of a spectrum with in-situ measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchupRecord {
    pub station_id: String,
    pub date: NaiveDate,
    pub lon: f64,
    pub lat: f64,
    pub spectrum: Spectrum,
    targets: [Option<f64>; 3],
}

impl MatchupRecord {
    /// Fails when no target is present.
    pub fn new(
        station_id: impl Into<String>,
        date: NaiveDate,
        (lon, lat): (f64, f64),
        spectrum: Spectrum,
        targets: [Option<f64>; 3],
    ) -> Result<Self, String> {
        if targets.iter().all(Option::is_none) {
            return Err("record has no target value".into());
        }
        if let Some(t) = targets.iter().flatten().find(|t| !t.is_finite()) {
            return Err(format!("non-finite target value {t}"));
        }
        Ok(MatchupRecord { station_id: station_id.into(), date, lon, lat, spectrum, targets })
    }

    pub fn target(&self, parameter: ParameterId) -> Option<f64> {
        self.targets[parameter.index()]
    }

    pub fn targets(&self) -> &[Option<f64>; 3] {
        &self.targets
    }

    pub fn year(&self) -> i32 {
        self.date.year()
    }

    fn sort_key(&self) -> (NaiveDate, &str) {
        (self.date, self.station_id.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// Hex SHA-256 of the source bytes.
    pub digest: String,
    pub row_count: usize,
}

/// Match-up records sorted ascending by date, ties by station id.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchupTable {
    records: Vec<MatchupRecord>,
    pub provenance: Provenance,
}

pub const CSV_HEADER: [&str; 17] = [
    "station_id", "date", "lon", "lat", "B1", "B2", "B3", "B4", "B5", "B6", "B7", "B8A", "B11", "B12",
    "chla", "ss", "turbidity",
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error: missing column `{0}`")]
    MissingColumn(String),
    #[error("schema error: duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SplitError {
    #[error("boundary year {boundary} outside table span {first}..={last}")]
    OutOfSpan { boundary: i32, first: i32, last: i32 },
    #[error("empty training partition: no records before {0}")]
    EmptyTrain(i32),
    #[error("empty validation partition: no records in or after {0}")]
    EmptyValidation(i32),
    #[error("cannot split an empty table")]
    EmptyTable,
}

impl MatchupTable {
    /// Sorts `records` into canonical order.
    pub fn from_records(mut records: Vec<MatchupRecord>, digest: String) -> Self {
        records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let row_count = records.len();
        MatchupTable { records, provenance: Provenance { digest, row_count } }
    }

    pub fn records(&self) -> &[MatchupRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn year_span(&self) -> Option<(i32, i32)> {
        let first = self.records.first()?.year();
        let last = self.records.last()?.year();
        Some((first, last))
    }

    /// Records satisfying `keep`, in order, with the same source digest.
    pub fn filtered(&self, mut keep: impl FnMut(&MatchupRecord) -> bool) -> MatchupTable {
        let records: Vec<_> = self.records.iter().filter(|r| keep(r)).cloned().collect();
        let row_count = records.len();
        MatchupTable {
            records,
            provenance: Provenance { digest: self.provenance.digest.clone(), row_count },
        }
    }

    /// Canonical CSV serialization. Re-ingesting the output reproduces the records exactly.
    pub fn to_csv(&self) -> String {
        let mut out = CSV_HEADER.join(",");
        out.push('\n');
        for r in &self.records {
            let mut fields = vec![
                csv_escape(&r.station_id),
                r.date.format("%Y-%m-%d").to_string(),
                r.lon.to_string(),
                r.lat.to_string(),
            ];
            fields.extend(r.spectrum.values().iter().map(f64::to_string));
            fields.extend(r.targets.iter().map(|t| t.map(|v| v.to_string()).unwrap_or_default()));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// SHA-256 of the canonical CSV form; equal for tables with equal records.
    pub fn content_digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv().as_bytes()))
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}

pub(crate) fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Reads and validates a match-up CSV file.
pub fn ingest_matchup_table(path: &Path, policy: &IngestPolicy) -> Result<MatchupTable, IngestError> {
    let bytes = std::fs::read(path)
        .map_err(|source| IngestError::Io { path: path.display().to_string(), source })?;
    parse_matchup_csv(&bytes, policy)
}

/// Parses match-up CSV bytes. The provenance digest covers exactly `bytes`.
pub fn parse_matchup_csv(bytes: &[u8], policy: &IngestPolicy) -> Result<MatchupTable, IngestError> {
    let digest = hex::encode(Sha256::digest(bytes));
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(bytes);

    let headers = reader
        .headers()
        .map_err(|e| IngestError::Schema(e.to_string()))?
        .clone();
    let mut columns: HashMap<&str, usize> = HashMap::new();
    for (i, name) in headers.iter().enumerate() {
        let name = name.trim();
        if columns.insert(name, i).is_some() {
            return Err(IngestError::DuplicateColumn(name.to_string()));
        }
    }
    let mut index = [0usize; CSV_HEADER.len()];
    for (slot, name) in index.iter_mut().zip(CSV_HEADER) {
        *slot = *columns.get(name).ok_or_else(|| IngestError::MissingColumn(name.to_string()))?;
    }

    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            IngestError::Row { line, message: e.to_string() }
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let row_err = |message: String| IngestError::Row { line, message };
        let cell = |k: usize| row.get(index[k]).unwrap_or("").trim();

        let station_id = cell(0);
        if station_id.is_empty() {
            return Err(row_err("empty station_id".into()));
        }
        let date = NaiveDate::parse_from_str(cell(1), "%Y-%m-%d")
            .map_err(|e| row_err(format!("unparseable date `{}`: {e}", cell(1))))?;
        let coord = |k: usize, name: &str| -> Result<f64, IngestError> {
            let v: f64 = cell(k)
                .parse()
                .map_err(|_| row_err(format!("unparseable {name} `{}`", cell(k))))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(row_err(format!("non-finite {name}")))
            }
        };
        let lon = coord(2, "lon")?;
        let lat = coord(3, "lat")?;

        let mut reflectance = [0.0; BandId::COUNT];
        for band in BandId::ALL {
            let raw = cell(4 + band.index());
            let v: f64 = raw
                .parse()
                .map_err(|_| row_err(format!("unparseable reflectance `{raw}` in {band}")))?;
            if !v.is_finite() {
                return Err(row_err(format!("non-finite reflectance in {band}")));
            }
            reflectance[band.index()] =
                policy.apply(v).map_err(|m| row_err(format!("{band}: {m}")))?;
        }
        let spectrum = Spectrum::new(reflectance).expect("checked finite");

        let mut targets = [None; 3];
        for p in ParameterId::ALL {
            let raw = cell(14 + p.index());
            if raw.is_empty() {
                continue;
            }
            let v: f64 = raw
                .parse()
                .map_err(|_| row_err(format!("unparseable {} `{raw}`", p.column())))?;
            if !v.is_finite() {
                return Err(row_err(format!("non-finite {}", p.column())));
            }
            targets[p.index()] = Some(v);
        }
        let record = MatchupRecord::new(station_id, date, (lon, lat), spectrum, targets).map_err(row_err)?;
        records.push(record);
    }
    Ok(MatchupTable::from_records(records, digest))
}

/// Splits into records before `boundary_year` (training) and from it onwards (validation).
pub fn split_by_year(
    table: &MatchupTable,
    boundary_year: i32,
) -> Result<(MatchupTable, MatchupTable), SplitError> {
    let (first, last) = table.year_span().ok_or(SplitError::EmptyTable)?;
    if boundary_year < first || boundary_year > last + 1 {
        return Err(SplitError::OutOfSpan { boundary: boundary_year, first, last });
    }
    let train = table.filtered(|r| r.year() < boundary_year);
    let validation = table.filtered(|r| r.year() >= boundary_year);
    if train.is_empty() {
        return Err(SplitError::EmptyTrain(boundary_year));
    }
    if validation.is_empty() {
        return Err(SplitError::EmptyValidation(boundary_year));
    }
    Ok((train, validation))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(station: &str, date: &str, b: f64, chla: &str) -> String {
        let bands = vec![b.to_string(); 10].join(",");
        format!("{station},{date},114.1,22.3,{bands},{chla},,\n")
    }

    fn csv(rows: &[String]) -> Vec<u8> {
        let mut s = CSV_HEADER.join(",");
        s.push('\n');
        for r in rows {
            s.push_str(r);
        }
        s.into_bytes()
    }

    #[test]
    fn wavelengths_are_nominal() {
        let nm: Vec<f64> = BandId::ALL.iter().map(|b| b.central_wavelength_nm()).collect();
        assert_eq!(nm, [443.0, 490.0, 560.0, 665.0, 705.0, 740.0, 783.0, 865.0, 1610.0, 2190.0]);
        assert!(nm.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(BandId::ALL.len(), 10);
        for b in ["B8", "B9", "B10"] {
            assert!(BandId::from_name(b).is_none());
            assert!(BandId::is_excluded_name(b));
        }
    }

    #[test]
    fn sorts_rows_by_date() {
        let bytes = csv(&[
            row("S2", "2019-03-01", 0.02, "1.5"),
            row("S1", "2017-05-10", 0.02, "2"),
            row("S3", "2018-01-01", 0.02, "3"),
        ]);
        let t = parse_matchup_csv(&bytes, &IngestPolicy::default()).unwrap();
        let dates: Vec<_> = t.records().iter().map(|r| r.date.to_string()).collect();
        assert_eq!(dates, ["2017-05-10", "2018-01-01", "2019-03-01"]);
        assert_eq!(t.provenance.row_count, 3);
        assert_eq!(t.provenance.digest.len(), 64);
    }

    #[test]
    fn ties_break_on_station() {
        let bytes = csv(&[row("WM2", "2019-03-01", 0.02, "1"), row("DM1", "2019-03-01", 0.02, "2")]);
        let t = parse_matchup_csv(&bytes, &IngestPolicy::default()).unwrap();
        assert_eq!(t.records()[0].station_id, "DM1");
    }

    #[test]
    fn missing_band_column_is_named() {
        let text = "station_id,date,lon,lat,B1,B2,B3,B4,B5,B6,B7,B11,B12,chla,ss,turbidity\n";
        let err = parse_matchup_csv(text.as_bytes(), &IngestPolicy::default()).unwrap_err();
        assert!(matches!(&err, IngestError::MissingColumn(c) if c == "B8A"), "{err}");
        assert!(err.to_string().contains("B8A"));
    }

    #[test]
    fn duplicate_column_is_named() {
        let text = "station_id,date,lon,lat,B1,B2,B3,B3,B4,B5,B6,B7,B8A,B11,B12,chla,ss,turbidity\n";
        let err = parse_matchup_csv(text.as_bytes(), &IngestPolicy::default()).unwrap_err();
        assert!(matches!(&err, IngestError::DuplicateColumn(c) if c == "B3"));
    }

    #[test]
    fn bad_date_reports_line() {
        let bytes = csv(&[row("S1", "2019-03-01", 0.02, "1"), row("S1", "2019/03/02", 0.02, "1")]);
        match parse_matchup_csv(&bytes, &IngestPolicy::default()).unwrap_err() {
            IngestError::Row { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("date"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn non_finite_reflectance_rejected() {
        let bytes = csv(&[row("S1", "2019-03-01", f64::NAN, "1")]);
        let err = parse_matchup_csv(&bytes, &IngestPolicy::default()).unwrap_err();
        assert!(matches!(err, IngestError::Row { line: 2, .. }));
    }

    #[test]
    fn negative_policy() {
        let near = csv(&[row("S1", "2019-03-01", -0.005, "1")]);
        let t = parse_matchup_csv(&near, &IngestPolicy::default()).unwrap();
        assert_eq!(t.records()[0].spectrum.get(BandId::B5), 0.0);

        let far = csv(&[row("S1", "2019-03-01", -0.05, "1")]);
        assert!(parse_matchup_csv(&far, &IngestPolicy::default()).is_err());

        let allow = IngestPolicy { negative: NegativePolicy::Allow };
        let t = parse_matchup_csv(&far, &allow).unwrap();
        assert_eq!(t.records()[0].spectrum.get(BandId::B1), -0.05);

        let strict = IngestPolicy { negative: NegativePolicy::Reject };
        assert!(parse_matchup_csv(&near, &strict).is_err());
    }

    #[test]
    fn record_needs_a_target() {
        let bytes = csv(&[row("S1", "2019-03-01", 0.02, "")]);
        let err = parse_matchup_csv(&bytes, &IngestPolicy::default()).unwrap_err();
        assert!(err.to_string().contains("no target"));
    }

    #[test]
    fn split_counts_by_year() {
        let rows: Vec<_> = ["2016-01-01", "2017-01-01", "2018-01-01", "2020-01-01", "2020-06-01"]
            .iter()
            .map(|d| row("S", d, 0.02, "1"))
            .collect();
        let t = parse_matchup_csv(&csv(&rows), &IngestPolicy::default()).unwrap();
        let (train, val) = split_by_year(&t, 2020).unwrap();
        assert_eq!((train.len(), val.len()), (3, 2));
        assert!(train.records().iter().all(|r| r.year() < 2020));
        assert!(val.records().iter().all(|r| r.year() >= 2020));
    }

    #[test]
    fn split_rejects_empty_side() {
        let rows: Vec<_> = ["2019-01-01", "2019-06-01"].iter().map(|d| row("S", d, 0.02, "1")).collect();
        let t = parse_matchup_csv(&csv(&rows), &IngestPolicy::default()).unwrap();
        assert_eq!(split_by_year(&t, 2020).unwrap_err(), SplitError::EmptyValidation(2020));
        assert_eq!(split_by_year(&t, 2019).unwrap_err(), SplitError::EmptyTrain(2019));
        assert!(matches!(split_by_year(&t, 2030), Err(SplitError::OutOfSpan { .. })));
    }

    #[test]
    fn csv_round_trip_is_digest_equal() {
        let bytes = csv(&[
            row("\"S,1\"", "2019-03-01", 0.0123456789, "1.25"),
            row("S2", "2018-03-01", -0.001, "0.1"),
        ]);
        let t = parse_matchup_csv(&bytes, &IngestPolicy::default()).unwrap();
        let again = parse_matchup_csv(t.to_csv().as_bytes(), &IngestPolicy::default()).unwrap();
        assert_eq!(t.records(), again.records());
        assert_eq!(t.content_digest(), again.content_digest());
    }
}
