use std::io::Write;

use crate::config::Format;
use crate::sweep::ResultRow;

pub const CSV_HEADER: [&str; 11] = [
    "experiment",
    "gamma",
    "lambda",
    "n_sites",
    "delta",
    "mu",
    "nu",
    "g",
    "t",
    "value",
    "flag",
];

/// 17 significant digits, scientific notation.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

fn csv_record(row: &ResultRow) -> [String; 11] {
    [
        row.experiment.to_string(),
        opt(row.gamma),
        opt(row.lambda),
        row.n_sites.map(|n| n.to_string()).unwrap_or_default(),
        opt(row.delta),
        opt(row.mu),
        opt(row.nu),
        opt(row.g),
        opt(row.t),
        format_number(row.value),
        row.flag.clone(),
    ]
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(csv_record(row))?;
    }
    w.flush()
}

pub fn write_json<W: Write>(rows: &[ResultRow], mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)
}

pub fn write_rows<W: Write>(rows: &[ResultRow], format: Format, out: W) -> std::io::Result<()> {
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(rows, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            experiment: "le_time_lambda",
            gamma: Some(1.0),
            lambda: Some(0.1),
            n_sites: Some(100),
            delta: Some(0.05),
            mu: None,
            nu: None,
            g: None,
            t: Some(0.0),
            value: 1.0 / 3.0,
            flag: String::new(),
        }
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s
                .split('e')
                .next()
                .unwrap()
                .trim_start_matches('-')
                .replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
        assert_eq!(format_number(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&[row()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "le_time_lambda,1.0000000000000000e0,1.0000000000000001e-1,100,5.0000000000000003e-2,,,,0.0000000000000000e0,3.3333333333333331e-1,"
        );
    }

    #[test]
    fn json_is_array_of_rows() {
        let mut r = row();
        r.value = f64::NAN;
        let mut buf = Vec::new();
        write_json(&[r.clone(), row()], &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), 2);
        assert_eq!(arr[0]["n_sites"], 100);
        assert!(arr[0]["value"].is_null());
        assert!(arr[0]["mu"].is_null());
        assert_eq!(arr[1]["experiment"], "le_time_lambda");
    }
}
