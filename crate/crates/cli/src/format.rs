use std::io::Write;

use slp_core::sim::SweepResult;

/// `printf("%.{digits}g")`: shortest of fixed or scientific notation with
/// trailing zeros removed.
pub fn general(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let precision = digits.max(1) - 1;
    let sci = format!("{x:.precision$e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (precision as i32 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv_header(users: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["precoder", "gamma_db", "xi", "delta", "epsilon", "avg_power_dbw", "ser_avg"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((1..=users).map(|k| format!("ser_user_{k}")));
    cols.extend(["eta", "infeasible_rate", "blocks", "slots", "seed"].iter().map(|s| s.to_string()));
    cols
}

pub fn write_csv<W: Write>(out: W, result: &SweepResult) -> csv::Result<()> {
    let cfg = &result.config;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(cfg.users))?;
    let g = |x: f64| general(x, 9);
    for row in &result.rows {
        let mut fields = vec![
            row.precoder.name().to_string(),
            g(row.gamma_db),
            g(cfg.xi),
            g(cfg.delta),
            g(cfg.epsilon),
            g(row.avg_power_dbw),
            g(row.ser_avg),
        ];
        fields.extend(row.ser_user.iter().map(|&s| g(s)));
        fields.extend([
            g(row.eta),
            g(row.infeasible_rate),
            cfg.blocks.to_string(),
            cfg.slots.to_string(),
            cfg.seed.to_string(),
        ]);
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}
