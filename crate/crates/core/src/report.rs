//! Text output shared by the library tables and the CLI: comma-separated,
//! header row, `.` decimals, LF line endings, 12 significant digits.

/// Formats `v` with 12 significant digits in scientific notation.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        // avoid "-0e0"
        return "0.00000000000e0".to_string();
    }
    format!("{v:.11e}")
}

/// Rounds `v` to 12 significant digits.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    fmt_num(v).parse().unwrap_or(v)
}

/// A rectangular table rendered as CSV.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_numbers(&mut self, values: &[f64]) {
        self.push_raw(values.iter().map(|v| fmt_num(*v)).collect());
    }

    pub fn push_raw(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "row width must match header");
        self.rows.push(cells);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_num(-12345.678901234), "-1.23456789012e4");
        assert_eq!(fmt_num(-0.0), "0.00000000000e0");
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(["x", "y"]);
        t.push_numbers(&[0.5, 2.0]);
        assert_eq!(t.to_csv(), "x,y\n5.00000000000e-1,2.00000000000e0\n");
    }
}
