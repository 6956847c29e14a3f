//! CSV ingestion: price series and single data columns.

use std::io::Read;
use std::path::Path;

use crate::error::{CliError, Result};

pub const DEFAULT_PRICE_COLUMN: &str = "price";

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    timestamps: Option<Vec<String>>,
    prices: Vec<f64>,
}

impl PriceSeries {
    /// Prices must be finite and positive. Errors name the offending row
    /// (1-based, counting data rows only).
    pub fn new(timestamps: Option<Vec<String>>, prices: Vec<f64>) -> Result<Self> {
        if let Some(ts) = &timestamps {
            if ts.len() != prices.len() {
                return Err(CliError::usage("timestamps and prices differ in length"));
            }
        }
        if let Some(i) = prices.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(CliError::usage(format!(
                "row {}: price must be positive and finite, got {}",
                i + 1,
                prices[i]
            )));
        }
        Ok(Self { timestamps, prices })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

/// `log(x_{t+1} / x_t)` for consecutive prices.
pub fn log_returns(s: &PriceSeries) -> Result<Vec<f64>> {
    if s.len() < 2 {
        return Err(CliError::usage("need at least two prices for returns"));
    }
    Ok(s.prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

struct Table {
    headers: Vec<String>,
    rows: Vec<(u64, csv::StringRecord)>,
}

fn read_table<R: Read>(reader: R, source: &str) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| input_err(source, e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| input_err(source, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec));
    }
    Ok(Table { headers, rows })
}

fn input_err(source: &str, message: String) -> CliError {
    CliError::Input {
        path: source.to_owned(),
        message,
    }
}

fn column_index(t: &Table, name: Option<&str>, source: &str) -> Result<usize> {
    match name {
        Some(name) => t.headers.iter().position(|h| h == name).ok_or_else(|| {
            input_err(
                source,
                format!("no column named '{name}' (columns: {})", t.headers.join(", ")),
            )
        }),
        None if t.headers.len() == 1 => Ok(0),
        None => Err(input_err(
            source,
            format!(
                "several columns present, choose one with --column ({})",
                t.headers.join(", ")
            ),
        )),
    }
}

fn parse_cells(t: &Table, col: usize, source: &str) -> Result<Vec<f64>> {
    t.rows
        .iter()
        .enumerate()
        .map(|(i, (line, rec))| {
            let cell = rec.get(col).unwrap_or("");
            cell.parse::<f64>().map_err(|_| {
                input_err(
                    source,
                    format!("row {} (line {line}): cannot parse '{cell}' as a number", i + 1),
                )
            })
        })
        .collect()
}

/// Reads one numeric column. With `column = None` the file must have exactly
/// one column.
pub fn read_column_from<R: Read>(reader: R, column: Option<&str>, source: &str) -> Result<Vec<f64>> {
    let t = read_table(reader, source)?;
    let col = column_index(&t, column, source)?;
    let values = parse_cells(&t, col, source)?;
    if values.is_empty() {
        return Err(input_err(source, "no data rows".into()));
    }
    Ok(values)
}

pub fn read_column(path: &Path, column: Option<&str>) -> Result<Vec<f64>> {
    let f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_column_from(f, column, &path.display().to_string())
}

/// Reads a price series; `time_column` optionally labels the rows.
pub fn read_prices_from<R: Read>(
    reader: R,
    price_column: &str,
    time_column: Option<&str>,
    source: &str,
) -> Result<PriceSeries> {
    let t = read_table(reader, source)?;
    let col = column_index(&t, Some(price_column), source)?;
    let prices = parse_cells(&t, col, source)?;
    let timestamps = match time_column {
        Some(name) => {
            let tc = column_index(&t, Some(name), source)?;
            Some(
                t.rows
                    .iter()
                    .map(|(_, r)| r.get(tc).unwrap_or("").to_owned())
                    .collect(),
            )
        }
        None => None,
    };
    PriceSeries::new(timestamps, prices).map_err(|e| input_err(source, e.to_string()))
}

pub fn read_prices(path: &Path, price_column: &str, time_column: Option<&str>) -> Result<PriceSeries> {
    let f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_prices_from(f, price_column, time_column, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(p: &[f64]) -> PriceSeries {
        PriceSeries::new(None, p.to_vec()).unwrap()
    }

    #[test]
    fn returns_of_simple_series() {
        let e = std::f64::consts::E;
        assert_eq!(log_returns(&series(&[1.0, e])).unwrap(), vec![1.0]);
        assert_eq!(log_returns(&series(&[4.0; 5])).unwrap(), vec![0.0; 4]);
        assert!(log_returns(&series(&[4.0])).is_err());
    }

    #[test]
    fn non_positive_price_names_row() {
        let err = PriceSeries::new(None, vec![1.0, 2.0, 0.0]).unwrap_err();
        assert!(err.to_string().contains("row 3"), "{err}");
        let csv = "date,price\n2001-01-01,1.5\n2001-01-02,-2\n";
        let err = read_prices_from(csv.as_bytes(), "price", None, "mem").unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn reads_named_price_column_with_labels() {
        let csv = "date, price ,volume\n2001-01-01, 1.5,10\n2001-01-02,1.25,11\n";
        let s = read_prices_from(csv.as_bytes(), "price", Some("date"), "mem").unwrap();
        assert_eq!(s.prices(), &[1.5, 1.25]);
        assert_eq!(s.timestamps().unwrap()[1], "2001-01-02");
        assert!(read_prices_from(csv.as_bytes(), "close", None, "mem").is_err());
    }

    #[test]
    fn column_selection() {
        assert_eq!(read_column_from("x\n1\n2.5\n".as_bytes(), None, "m").unwrap(), vec![1.0, 2.5]);
        let two = "a,b\n1,2\n3,4\n";
        assert!(read_column_from(two.as_bytes(), None, "m").is_err());
        assert_eq!(read_column_from(two.as_bytes(), Some("b"), "m").unwrap(), vec![2.0, 4.0]);
        let bad = "x\n1\nfoo\n";
        let err = read_column_from(bad.as_bytes(), None, "m").unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        assert!(read_column_from("x\n".as_bytes(), None, "m").is_err());
    }

    proptest::proptest! {
        #[test]
        fn returns_telescope(prices in proptest::collection::vec(1e-3..1e3f64, 2..60)) {
            let r = log_returns(&series(&prices)).unwrap();
            proptest::prop_assert_eq!(r.len(), prices.len() - 1);
            let total: f64 = r.iter().sum();
            let expected = (prices[prices.len() - 1] / prices[0]).ln();
            proptest::prop_assert!((total - expected).abs() < 1e-11);
        }
    }
}
