use super::json::format_f64;
use super::CliError;

/// A CSV export: one header row and string cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Failure(format!("csv export failed: {e}"));
        w.write_record(&self.headers).map_err(fail)?;
        for r in &self.rows {
            w.write_record(r).map_err(fail)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Failure(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Failure(e.to_string()))
    }
}

/// A float cell with 17 significant digits; non-finite values keep their names.
pub fn cell(v: f64) -> String {
    if v.is_finite() {
        format_f64(v)
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_header_and_rows() {
        let mut t = Table::new(&["n", "value"]);
        t.push(vec!["1".into(), cell(0.25)]);
        t.push(vec!["2".into(), cell(f64::NEG_INFINITY)]);
        assert_eq!(t.to_csv().unwrap(), "n,value\n1,2.5000000000000000e-1\n2,-inf\n");
    }
}
