//! CSV helpers shared by the result types.

use crate::error::{invalid, Result};
use std::io::Write;

/// Shortest decimal string that parses back to the same f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Writes a header row followed by numeric rows.
pub fn write_csv<I>(out: impl Write, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let io = |e: csv::Error| invalid(format!("csv export failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt_f64(x))).map_err(io)?;
    }
    w.flush().map_err(|e| invalid(format!("csv export failed: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0, 1e-300, 2.0f64.sqrt(), -5.196152422706632, 1e22] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a", "b"], vec![vec![1.0, 0.5], vec![2.0, 1e-20]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1.0,0.5\n2.0,1e-20\n");
    }
}
