use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::SweepResult;

pub const CSV_HEADER: [&str; 9] =
    ["n", "k", "trial", "seed", "rate_bits", "pa_star_dbm", "d01_nats", "iterations", "converged"];

const SIG_DIGITS: usize = 12;

/// `%.12g`: 12 significant digits, trailing zeros dropped, exponent form
/// outside `1e-4 <= |x| < 1e12`.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Let the exponent formatter do the rounding, then read the exponent back.
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Writes the header and one record per row, in `(n, k, trial)` order.
pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut rows: Vec<_> = result.rows.iter().collect();
    rows.sort_by_key(|r| (r.n, r.k, r.trial));
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            format_sig(r.rate_bits),
            format_sig(r.pa_star_dbm),
            format_sig(r.d01_nats),
            r.iterations.to_string(),
            r.converged.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(result, std::io::BufWriter::new(file))
}
