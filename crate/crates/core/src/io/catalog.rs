//! Bundled benchmark of dielectric microwave losses measured in integrated
//! parallel-plate geometries.
//!
//! Cells keep the notation of the source table: `a ± b` for a value with
//! uncertainty, `a–b` for a reported range, `≤ a` for an upper bound,
//! `F × …` for a loss quoted only as a multiple of the unknown filling
//! factor, a trailing `*` for values estimated from other reported data and
//! `†` for data judged not comparable. Parsing is lossless: rendering the
//! parsed catalog reproduces the bundled file byte for byte.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::IoError;

/// The bundled transcription.
pub const CATALOG_CSV: &str = include_str!("../../data/dielectric_loss_catalog.csv");

const HEADER: [&str; 9] = [
    "material",
    "reference",
    "deposition",
    "crystallinity",
    "geometry",
    "delta_lp_1e-5",
    "f_delta0_1e-5",
    "q_max_1e5",
    "area_1e5_um2",
];

/// A decimal number that remembers how it was written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decimal {
    pub value: f64,
    pub text: String,
}

impl Decimal {
    fn parse(s: &str) -> Option<Self> {
        let text = s.trim();
        let value = text.parse::<f64>().ok()?;
        Some(Self {
            value,
            text: text.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CatalogValue {
    Value { value: Decimal, uncertainty: Option<Decimal> },
    Range { low: Decimal, high: Decimal },
    UpperBound { bound: Decimal },
    /// Reported only as F × (inner).
    FillingScaled { inner: Box<CatalogValue> },
    /// † in the table.
    NotComparable,
}

impl CatalogValue {
    /// Upper end of the reported value in table units; `None` when the value
    /// is not comparable or depends on an unknown filling factor.
    pub fn upper(&self) -> Option<f64> {
        match self {
            CatalogValue::Value { value, .. } => Some(value.value),
            CatalogValue::Range { high, .. } => Some(high.value),
            CatalogValue::UpperBound { bound } => Some(bound.value),
            CatalogValue::FillingScaled { .. } | CatalogValue::NotComparable => None,
        }
    }

    /// Central value: the value itself or the midpoint of a range.
    pub fn central(&self) -> Option<f64> {
        match self {
            CatalogValue::Value { value, .. } => Some(value.value),
            CatalogValue::Range { low, high } => Some(0.5 * (low.value + high.value)),
            CatalogValue::UpperBound { bound } => Some(bound.value),
            CatalogValue::FillingScaled { .. } | CatalogValue::NotComparable => None,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if s == "†" {
            return Some(CatalogValue::NotComparable);
        }
        if let Some(rest) = s.strip_prefix("F × ") {
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .unwrap_or(rest);
            return Some(CatalogValue::FillingScaled {
                inner: Box::new(Self::parse(inner)?),
            });
        }
        if let Some(rest) = s.strip_prefix("≤ ") {
            return Some(CatalogValue::UpperBound {
                bound: Decimal::parse(rest)?,
            });
        }
        if let Some((v, u)) = s.split_once(" ± ") {
            return Some(CatalogValue::Value {
                value: Decimal::parse(v)?,
                uncertainty: Some(Decimal::parse(u)?),
            });
        }
        if let Some((lo, hi)) = s.split_once('–') {
            let (low, high) = (Decimal::parse(lo)?, Decimal::parse(hi)?);
            if low.value > high.value {
                return None;
            }
            return Some(CatalogValue::Range { low, high });
        }
        Some(CatalogValue::Value {
            value: Decimal::parse(s)?,
            uncertainty: None,
        })
    }
}

impl fmt::Display for CatalogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogValue::Value { value, uncertainty: None } => write!(f, "{}", value.text),
            CatalogValue::Value {
                value,
                uncertainty: Some(u),
            } => write!(f, "{} ± {}", value.text, u.text),
            CatalogValue::Range { low, high } => write!(f, "{}–{}", low.text, high.text),
            CatalogValue::UpperBound { bound } => write!(f, "≤ {}", bound.text),
            CatalogValue::FillingScaled { inner } => match inner.as_ref() {
                CatalogValue::Range { .. } => write!(f, "F × ({inner})"),
                _ => write!(f, "F × {inner}"),
            },
            CatalogValue::NotComparable => f.write_str("†"),
        }
    }
}

/// One table cell: a value plus the table's "estimated" asterisk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogCell {
    pub value: CatalogValue,
    pub estimated: bool,
}

impl CatalogCell {
    fn parse(s: &str) -> Option<Option<Self>> {
        let s = s.trim();
        if s.is_empty() {
            return Some(None);
        }
        let (body, estimated) = match s.strip_suffix('*') {
            Some(b) => (b, true),
            None => (s, false),
        };
        Some(Some(Self {
            value: CatalogValue::parse(body)?,
            estimated,
        }))
    }
}

impl fmt::Display for CatalogCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.value, if self.estimated { "*" } else { "" })
    }
}

/// One row of the benchmark table. Loss columns are in units of 10⁻⁵, Q_max in
/// 10⁵ and the device footprint in 10⁵ µm².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub material: String,
    pub reference: String,
    pub deposition: String,
    pub crystallinity: String,
    pub geometry: String,
    pub delta_lp: Option<CatalogCell>,
    pub f_delta0: Option<CatalogCell>,
    pub q_max: Option<CatalogCell>,
    pub area: Option<CatalogCell>,
}

impl CatalogEntry {
    fn cells(&self) -> [&Option<CatalogCell>; 4] {
        [&self.delta_lp, &self.f_delta0, &self.q_max, &self.area]
    }

    /// Any cell is an estimate (asterisk).
    pub fn estimated_flag(&self) -> bool {
        self.cells().iter().any(|c| c.as_ref().is_some_and(|c| c.estimated))
    }

    /// Any cell is marked not comparable (dagger).
    pub fn incomparable_flag(&self) -> bool {
        self.cells()
            .iter()
            .any(|c| matches!(c, Some(CatalogCell { value: CatalogValue::NotComparable, .. })))
    }

    /// Low-power loss as a plain number (upper end of a range), if comparable.
    pub fn delta_lp_upper(&self) -> Option<f64> {
        self.delta_lp.as_ref()?.value.upper().map(|v| v * 1e-5)
    }

    fn check(&self, row: usize) -> Result<(), IoError> {
        let has_loss = [&self.delta_lp, &self.f_delta0, &self.q_max]
            .iter()
            .any(|c| c.is_some());
        if !has_loss && !self.incomparable_flag() {
            return Err(IoError::Parse {
                line: row + 1,
                message: "catalog row carries no loss figure".into(),
            });
        }
        Ok(())
    }

    fn record(&self) -> [String; 9] {
        let cell = |c: &Option<CatalogCell>| c.as_ref().map(|c| c.to_string()).unwrap_or_default();
        [
            self.material.clone(),
            self.reference.clone(),
            self.deposition.clone(),
            self.crystallinity.clone(),
            self.geometry.clone(),
            cell(&self.delta_lp),
            cell(&self.f_delta0),
            cell(&self.q_max),
            cell(&self.area),
        ]
    }
}

/// Parses a catalog in the bundled CSV layout.
pub fn parse_catalog(text: &str) -> Result<Vec<CatalogEntry>, IoError> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| IoError::MissingHeader(e.to_string()))?;
    if headers.iter().ne(HEADER) {
        return Err(IoError::MissingHeader(headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut out = Vec::new();
    for (idx, rec) in reader.records().enumerate() {
        let line = idx + 2;
        let rec = rec.map_err(|e| IoError::Parse {
            line,
            message: e.to_string(),
        })?;
        let cell = |k: usize| {
            CatalogCell::parse(&rec[k]).ok_or_else(|| IoError::Parse {
                line,
                message: format!("cannot read {} cell {:?}", HEADER[k], &rec[k]),
            })
        };
        let entry = CatalogEntry {
            material: rec[0].to_string(),
            reference: rec[1].to_string(),
            deposition: rec[2].to_string(),
            crystallinity: rec[3].to_string(),
            geometry: rec[4].to_string(),
            delta_lp: cell(5)?,
            f_delta0: cell(6)?,
            q_max: cell(7)?,
            area: cell(8)?,
        };
        entry.check(idx + 1)?;
        out.push(entry);
    }
    Ok(out)
}

/// Renders entries in the bundled CSV layout.
pub fn render_catalog(entries: &[CatalogEntry]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for e in entries {
        w.write_record(e.record()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// The bundled catalog, in table order.
pub fn catalog() -> &'static [CatalogEntry] {
    static CATALOG: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    CATALOG.get_or_init(|| parse_catalog(CATALOG_CSV).expect("bundled catalog is well formed"))
}

/// Case-, spacing- and subscript-insensitive form used for matching, so that
/// `Al2O3`, `al₂o₃` and `Al₂O₃` compare equal.
fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
        .map(|c| match c {
            '₀'..='₉' => char::from_digit(c as u32 - '₀' as u32, 10).expect("digit"),
            'ₓ' => 'x',
            other => other,
        })
        .flat_map(char::to_lowercase)
        .collect()
}

/// Conjunctive filter. Text fields match as normalised substrings except
/// `reference` and `crystallinity`, which must match exactly (after
/// normalisation). `max_delta_lp` is a plain loss (not ×10⁻⁵); rows pass only
/// when their whole reported δ_LP lies at or below it, so not-comparable and
/// filling-factor-scaled rows never pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CatalogFilter {
    pub material: Option<String>,
    pub reference: Option<String>,
    pub deposition: Option<String>,
    pub crystallinity: Option<String>,
    pub geometry: Option<String>,
    pub max_delta_lp: Option<f64>,
}

impl CatalogFilter {
    pub fn matches(&self, e: &CatalogEntry) -> bool {
        let contains = |want: &Option<String>, have: &str| {
            want.as_ref().is_none_or(|w| normalize(have).contains(&normalize(w)))
        };
        let equals = |want: &Option<String>, have: &str| {
            want.as_ref().is_none_or(|w| normalize(have) == normalize(w))
        };
        contains(&self.material, &e.material)
            && equals(&self.reference, &e.reference)
            && contains(&self.deposition, &e.deposition)
            && equals(&self.crystallinity, &e.crystallinity)
            && contains(&self.geometry, &e.geometry)
            && self
                .max_delta_lp
                .is_none_or(|max| e.delta_lp_upper().is_some_and(|v| v <= max))
    }
}

/// Filters the bundled catalog, preserving table order.
pub fn catalog_query(filter: &CatalogFilter) -> Vec<CatalogEntry> {
    catalog().iter().filter(|e| filter.matches(e)).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_grammar() {
        let c = CatalogCell::parse("2.3–4.3*").unwrap().unwrap();
        assert!(c.estimated);
        assert!(matches!(c.value, CatalogValue::Range { .. }));
        let c = CatalogCell::parse("F × (2.2–2.5)").unwrap().unwrap();
        assert_eq!(c.to_string(), "F × (2.2–2.5)");
        assert_eq!(c.value.upper(), None);
        let c = CatalogCell::parse("≤ 0.047").unwrap().unwrap();
        assert_eq!(c.value.upper(), Some(0.047));
        let c = CatalogCell::parse("2.0").unwrap().unwrap();
        assert_eq!(c.to_string(), "2.0");
        assert!(CatalogCell::parse("5–3").is_none());
        assert!(CatalogCell::parse("abc").is_none());
        assert_eq!(CatalogCell::parse("").unwrap(), None);
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize("γ-Al₂O₃"), normalize("γ-al2o3"));
        assert_eq!(normalize("SiNₓ:H"), "sinx:h");
    }

    #[test]
    fn dump_is_byte_exact() {
        assert_eq!(render_catalog(catalog()), CATALOG_CSV);
    }

    #[test]
    fn impossible_filter_is_empty() {
        let f = CatalogFilter {
            max_delta_lp: Some(0.0),
            ..CatalogFilter::default()
        };
        assert!(catalog_query(&f).is_empty());
    }

    #[test]
    fn row_without_loss_rejected() {
        let text = format!("{}\nX,1,PLD,amorphous,LEPPC,,,,3\n", HEADER.join(","));
        assert!(matches!(parse_catalog(&text), Err(IoError::Parse { line: 2, .. })));
    }
}
