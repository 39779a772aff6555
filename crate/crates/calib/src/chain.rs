use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{CalibError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quote {
    /// VIX strike in decimals (0.25, not 25).
    pub strike: f64,
    pub iv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSlice {
    /// Maturity in years.
    #[serde(rename = "T")]
    pub t: f64,
    /// VIX futures level in decimals.
    pub future: f64,
    /// Sorted by strike.
    pub quotes: Vec<Quote>,
}

impl MarketSlice {
    pub fn log_strikes(&self) -> Vec<f64> {
        self.quotes.iter().map(|q| q.strike.ln()).collect()
    }

    pub fn ivs(&self) -> Vec<f64> {
        self.quotes.iter().map(|q| q.iv).collect()
    }
}

/// Quotes grouped by maturity, shortest first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MarketChain {
    pub slices: Vec<MarketSlice>,
}

impl MarketChain {
    pub fn quote_count(&self) -> usize {
        self.slices.iter().map(|s| s.quotes.len()).sum()
    }

    /// Rows in the CSV layout read by [`parse_chain`].
    pub fn to_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.slices {
            for q in &s.quotes {
                w.serialize(Row {
                    maturity_years: s.t,
                    future: s.future,
                    strike: q.strike,
                    iv: q.iv,
                })?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    maturity_years: f64,
    future: f64,
    strike: f64,
    iv: f64,
}

/// Read a chain from CSV with header `maturity_years,future,strike,iv`.
///
/// Returns the chain and any warnings (re-sorting, duplicate quotes,
/// inconsistent futures within a maturity). Duplicated (T, strike) pairs keep
/// the last row.
pub fn parse_chain<R: Read>(input: R) -> Result<(MarketChain, Vec<String>)> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut warnings = Vec::new();
    let mut rows: Vec<(u64, Row)> = Vec::new();
    let headers = rdr.headers()?.clone();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CalibError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            msg: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let row: Row = rec.deserialize(Some(&headers)).map_err(|e| CalibError::Parse {
            line,
            msg: e.to_string(),
        })?;
        for (name, v) in [("maturity_years", row.maturity_years), ("future", row.future), ("strike", row.strike), ("iv", row.iv)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CalibError::Parse {
                    line,
                    msg: format!("{name} must be positive and finite, got {v}"),
                });
            }
        }
        rows.push((line, row));
    }
    if rows.is_empty() {
        return Err(CalibError::EmptyChain);
    }
    if rows.windows(2).any(|w| w[1].1.maturity_years < w[0].1.maturity_years) {
        warnings.push("maturities not sorted; re-sorted".to_string());
    }

    // Keyed on bit patterns: exact duplicates only.
    let mut by_t: BTreeMap<u64, (f64, Vec<(u64, f64)>, BTreeMap<u64, Quote>)> = BTreeMap::new();
    for (line, r) in rows {
        let e = by_t
            .entry(r.maturity_years.to_bits())
            .or_insert_with(|| (r.maturity_years, Vec::new(), BTreeMap::new()));
        e.1.push((line, r.future));
        let q = Quote {
            strike: r.strike,
            iv: r.iv,
        };
        if e.2.insert(r.strike.to_bits(), q).is_some() {
            warnings.push(format!(
                "line {line}: duplicate quote (T={}, strike={}); keeping the last",
                r.maturity_years, r.strike
            ));
        }
    }
    let slices = by_t
        .into_values()
        .map(|(t, futures, quotes)| {
            let (_, future) = *futures.last().expect("non-empty group");
            if futures.iter().any(|(_, f)| *f != future) {
                warnings.push(format!("T={t}: inconsistent futures levels; using {future}"));
            }
            let mut quotes: Vec<Quote> = quotes.into_values().collect();
            quotes.sort_by(|a, b| a.strike.total_cmp(&b.strike));
            MarketSlice { t, future, quotes }
        })
        .collect();
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok((MarketChain { slices }, warnings))
}

pub fn load_chain(path: impl AsRef<Path>) -> Result<(MarketChain, Vec<String>)> {
    let f = std::fs::File::open(path.as_ref())?;
    parse_chain(f)
}
