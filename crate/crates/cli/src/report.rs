//! Per-DMU report rows and their CSV form.

use std::io::Write;

use rgm_core::data::Dataset;
use rgm_core::measures::{FglResult, MaxRgmResult, Side};
use serde::{Deserialize, Serialize};

/// Rounds the shortest decimal form of `v` half away from zero.
pub fn round_half_away(v: f64, decimals: usize) -> String {
    let text = format!("{}", v.abs());
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    let mut digits: Vec<u8> = int_part
        .bytes()
        .chain(
            frac_part
                .bytes()
                .chain(std::iter::repeat(b'0'))
                .take(decimals),
        )
        .collect();
    let round_up = frac_part
        .as_bytes()
        .get(decimals)
        .is_some_and(|d| *d >= b'5');
    if round_up {
        let mut k = digits.len();
        loop {
            if k == 0 {
                digits.insert(0, b'1');
                break;
            }
            k -= 1;
            if digits[k] == b'9' {
                digits[k] = b'0';
            } else {
                digits[k] += 1;
                break;
            }
        }
    }
    let split = digits.len() - decimals;
    let mut out = String::from_utf8(digits[..split].to_vec()).expect("ascii digits");
    if decimals > 0 {
        out.push('.');
        out.push_str(std::str::from_utf8(&digits[split..]).expect("ascii digits"));
    }
    let is_zero = out.bytes().all(|b| b == b'0' || b == b'.');
    if v.is_sign_negative() && !is_zero {
        out.insert(0, '-');
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub enum Precision {
    Display,
    Full,
}

impl Precision {
    fn fmt(self, v: f64, decimals: usize) -> String {
        match self {
            Precision::Display => round_half_away(v, decimals),
            Precision::Full => format!("{v}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dmu: usize,
    pub name: String,
    pub score_maxrgm: String,
    pub side: String,
    pub target_coordinate: String,
    pub target_value: String,
    pub score_fgl: String,
    pub zero_input_target: String,
    /// Annotation or the reason a unit has no score.
    pub note: String,
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Input => "input",
        Side::Output => "output",
        Side::Efficient => "efficient",
    }
}

impl ReportRow {
    pub fn new(dataset: &Dataset, id: usize) -> Self {
        Self {
            dmu: id,
            name: dataset.dmu(id).map(|d| d.name.clone()).unwrap_or_default(),
            ..Self::default()
        }
    }

    pub fn with_max_rgm(
        mut self,
        dataset: &Dataset,
        res: &MaxRgmResult,
        precision: Precision,
    ) -> Self {
        self.score_maxrgm = precision.fmt(res.score, 3);
        self.side = side_name(res.side).to_owned();
        if let Some(k) = res.coordinate {
            let (label, value) = match res.side {
                Side::Input => (&dataset.input_labels()[k], res.target_x[k]),
                _ => (&dataset.output_labels()[k], res.target_y[k]),
            };
            self.target_coordinate = label.clone();
            self.target_value = precision.fmt(value, 1);
        }
        self
    }

    pub fn with_fgl(mut self, res: &FglResult, precision: Precision) -> Self {
        self.score_fgl = precision.fmt(res.score, 3);
        self.zero_input_target = res.zero_input_target.to_string();
        if let Some(a) = &res.annotation {
            self.note = a.clone();
        }
        self
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[ReportRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
