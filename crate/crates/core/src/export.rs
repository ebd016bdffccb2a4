//! Plain-text number formatting shared by the CSV writers.

/// Twelve significant digits in scientific notation. Deterministic across
/// platforms, `.` decimal separator.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Joins already formatted fields into one `\n`-terminated CSV line.
pub fn csv_line<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut line = String::new();
    for (k, f) in fields.into_iter().enumerate() {
        if k > 0 {
            line.push(',');
        }
        line.push_str(f.as_ref());
    }
    line.push('\n');
    line
}
