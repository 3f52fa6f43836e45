//! Historical price input.
//!
//! One record per line, `timestamp,price`. The timestamp is either an
//! integer epoch (kept in whatever unit the file uses) or an ISO-8601 date
//! or date-time (converted to epoch milliseconds, UTC unless an offset is
//! given). A first line whose price field is not a number is a header.
//! Blank lines are skipped. A file must use one timestamp style throughout.

use std::io::BufRead;

use chrono::{DateTime, NaiveDate, NaiveDateTime};

use super::{BlockDriver, BlockRecord};
use crate::cfmm::InvariantCurve;
use crate::engine::PoolState;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One observed true price.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceObservation<F> {
    pub timestamp: i64,
    pub price: F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stamp {
    Epoch,
    Iso,
}

fn parse_timestamp(field: &str) -> Option<(i64, Stamp)> {
    if let Ok(n) = field.parse::<i64>() {
        return Some((n, Stamp::Epoch));
    }
    if let Ok(t) = DateTime::parse_from_rfc3339(field) {
        return Some((t.timestamp_millis(), Stamp::Iso));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(field, fmt) {
            return Some((t.and_utc().timestamp_millis(), Stamp::Iso));
        }
    }
    NaiveDate::parse_from_str(field, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|t| (t.and_utc().timestamp_millis(), Stamp::Iso))
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads a `timestamp,price` series, checking that prices are positive and
/// timestamps strictly increase. Errors carry 1-based line numbers.
pub fn parse_price_csv<F: Scalar, R: BufRead>(reader: R) -> Result<Vec<PriceObservation<F>>> {
    let mut out: Vec<PriceObservation<F>> = Vec::new();
    let mut style = None;
    let mut seen_record = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| parse_error(line_no, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(parse_error(
                line_no,
                format!("expected 2 fields `timestamp,price`, found {}", fields.len()),
            ));
        }
        let price = fields[1].parse::<f64>();
        if !seen_record && price.is_err() && parse_timestamp(fields[0]).is_none() {
            seen_record = true;
            continue; // header
        }
        seen_record = true;
        let price = price.map_err(|_| parse_error(line_no, format!("invalid price `{}`", fields[1])))?;
        if !(price > 0.0) || !price.is_finite() {
            return Err(parse_error(line_no, format!("price must be positive, got {price}")));
        }
        let (timestamp, this_style) = parse_timestamp(fields[0])
            .ok_or_else(|| parse_error(line_no, format!("invalid timestamp `{}`", fields[0])))?;
        match style {
            None => style = Some(this_style),
            Some(s) if s != this_style => {
                return Err(parse_error(line_no, "mixed epoch and ISO-8601 timestamps"));
            }
            _ => {}
        }
        if let Some(prev) = out.last() {
            if timestamp <= prev.timestamp {
                return Err(Error::NonMonotoneTimestamp {
                    line: line_no,
                    timestamp,
                });
            }
        }
        out.push(PriceObservation {
            timestamp,
            price: F::lit(price),
        });
    }
    Ok(out)
}

/// Drives `pool` with one block per observation, each observation being
/// that block's true price.
pub fn replay_historical<F: Scalar, C: InvariantCurve<F>>(
    prices: &[PriceObservation<F>],
    pool: PoolState<F, C>,
) -> Result<Vec<BlockRecord<F>>> {
    for (i, pair) in prices.windows(2).enumerate() {
        if pair[1].timestamp <= pair[0].timestamp {
            return Err(Error::NonMonotoneTimestamp {
                line: i + 2,
                timestamp: pair[1].timestamp,
            });
        }
    }
    if let Some((i, bad)) = prices.iter().enumerate().find(|(_, o)| !(o.price > F::zero())) {
        return Err(parse_error(i + 1, format!("price must be positive, got {}", bad.price)));
    }
    let mut driver = BlockDriver::new(pool);
    prices.iter().map(|o| driver.advance(o.price.ln())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfmm::G3m;
    use crate::dynamics::seed_pool;

    fn parse(text: &str) -> Result<Vec<PriceObservation<f64>>> {
        parse_price_csv(text.as_bytes())
    }

    #[test]
    fn header_and_epoch_rows() {
        let rows = parse("timestamp,price\n1,2000.5\n2,2001\n\n3,1999.25\n").unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2].timestamp, 3);
        assert_eq!(rows[2].price, 1999.25);
        assert_eq!(parse("1,2\n2,3").unwrap().len(), 2);
    }

    #[test]
    fn iso_rows() {
        let rows = parse("2025-05-01T00:00:00Z,1800\n2025-05-01T00:01:00Z,1801\n2025-05-02,1802").unwrap();
        assert_eq!(rows[1].timestamp - rows[0].timestamp, 60_000);
        let rows = parse("2025-05-01 00:00:00,1\n2025-05-01 00:00:12.5,1").unwrap();
        assert_eq!(rows[1].timestamp - rows[0].timestamp, 12_500);
    }

    #[test]
    fn errors_cite_line_numbers() {
        let mut text = String::from("timestamp,price\n");
        for i in 1..16 {
            text.push_str(&format!("{i},100\n"));
        }
        text.push_str("16,abc\n");
        match parse(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 17),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse("1,100\n1,100"),
            Err(Error::NonMonotoneTimestamp { line: 2, .. })
        ));
        assert!(matches!(parse("1,100\n2,-3"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse("1,100,3"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse("1,100\n2025-05-01,100"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse("x,100"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn constant_series_has_no_lvr() {
        let prices: Vec<_> = (0..100)
            .map(|t| PriceObservation {
                timestamp: t,
                price: 2500.0,
            })
            .collect();
        let pool = seed_pool(G3m::new(0.5).unwrap(), 0.5, 1, 1000.0, 2500f64.ln()).unwrap();
        let records = replay_historical(&prices, pool).unwrap();
        assert_eq!(records.len(), 100);
        assert!(records.iter().all(|r| r.lvr == 0.0));
    }

    #[test]
    fn single_jump_decays_geometrically() {
        let lambda = 0.5;
        let prices: Vec<_> = (0..40)
            .map(|t| PriceObservation {
                timestamp: t,
                price: if t < 5 { 100.0 } else { 100.0 * 0.02f64.exp() },
            })
            .collect();
        let pool = seed_pool(G3m::new(0.5).unwrap(), lambda, 1, 10.0, 100f64.ln()).unwrap();
        let records = replay_historical(&prices, pool).unwrap();
        let gaps: Vec<f64> = records[5..].iter().map(|r| r.top_gap).collect();
        assert!((gaps[0] - 0.02).abs() < 1e-12);
        for w in gaps.windows(2).take(20) {
            assert!((w[1] - (1.0 - lambda) * w[0]).abs() <= w[0] * w[0] / 8.0 + 1e-15);
        }
        assert!(gaps[20].abs() < 0.02 * 0.6f64.powi(20));
    }

    #[test]
    fn replay_rejects_unordered_input() {
        let pool = seed_pool(G3m::new(0.5).unwrap(), 0.5, 1, 1000.0, 0.0).unwrap();
        let prices = [
            PriceObservation {
                timestamp: 5,
                price: 1.0,
            },
            PriceObservation {
                timestamp: 4,
                price: 1.0,
            },
        ];
        assert!(replay_historical(&prices, pool).is_err());
    }
}
