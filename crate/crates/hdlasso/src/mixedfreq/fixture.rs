//! Synthetic mixed-frequency fixture: a quarterly target whose growth
//! loads on the first monthly observation of its own quarter, plus two
//! irrelevant daily series. Month-1 information is genuinely predictive,
//! so nowcast protocols should beat pure forecasts on this panel, while
//! the daily noise exercises trimming, weekly aggregation, and the
//! penalized fit's robustness to irrelevant columns.

use std::fs;
use std::io::Write as IoWrite;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{SeriesSpec, Transformation};
use crate::error::Result;
use crate::rng::stream_rng;

fn month_after(year: i32, month: u32) -> (i32, u32) {
    if month == 12 {
        (year + 1, 1)
    } else {
        (year, month + 1)
    }
}

/// Writes `gdp.csv`, `payroll.csv`, `tbill.csv`, and `wilshire.csv` into
/// `dir` and returns the matching series specs (target first). The panel
/// proper starts at 2000Q1; everything is seeded and byte-stable.
pub fn write_fixture(dir: &Path, seed: u64, quarters: usize) -> Result<Vec<SeriesSpec>> {
    fs::create_dir_all(dir)?;
    let months = 3 * quarters + 1; // December 1999 feeds the differencing

    let mut rng_u = stream_rng(seed, &[0xF1]);
    let mut rng_e = stream_rng(seed, &[0xF2]);
    let mut rng_d = stream_rng(seed, &[0xF3]);
    let mut rng_w = stream_rng(seed, &[0xF4]);

    // monthly signal: the series' post-differencing values
    let u: Vec<f64> =
        (0..months).map(|_| 0.8 * rng_u.sample::<f64, _>(StandardNormal)).collect();

    // quarterly growth: AR(1) plus a load on month 1 of the same quarter
    let mut growth = Vec::with_capacity(quarters + 1);
    growth.push(0.0); // 1999Q4 lead-in
    for q in 0..quarters {
        let month1 = 1 + 3 * q; // index into u: December is 0
        let prev = *growth.last().unwrap();
        let eps: f64 = rng_e.sample(StandardNormal);
        growth.push(0.4 * prev + 1.5 * u[month1] + 0.15 * eps);
    }

    // gdp.csv: raw levels whose log differences equal `growth[1..]`
    let mut gdp = String::from("date,value\n");
    let mut level = 100.0f64;
    let (mut year, mut quarter) = (1999i32, 4u8);
    for g in &growth {
        level *= g.exp();
        let month = 1 + (quarter as u32 - 1) * 3;
        gdp.push_str(&format!("{year}-{month:02}-01,{level:.12e}\n"));
        if quarter == 4 {
            year += 1;
            quarter = 1;
        } else {
            quarter += 1;
        }
    }
    fs::File::create(dir.join("gdp.csv"))?.write_all(gdp.as_bytes())?;

    // payroll.csv: raw levels whose first differences equal `u[1..]`
    let mut payroll = String::from("date,value\n");
    let mut cum = 0.0f64;
    let (mut py, mut pm) = (1999i32, 12u32);
    for value in &u {
        cum += value;
        payroll.push_str(&format!("{py}-{pm:02}-15,{cum:.12e}\n"));
        (py, pm) = month_after(py, pm);
    }
    fs::File::create(dir.join("payroll.csv"))?.write_all(payroll.as_bytes())?;

    // tbill.csv: 18 trading days per month (two beyond the 16-day
    // budget), differenced noise
    let mut tbill = String::from("date,value\n");
    let mut cum_d = 0.0f64;
    let (mut dy, mut dm) = (1999i32, 12u32);
    for _ in 0..months {
        for day in 1..=18u32 {
            cum_d += 0.5 * rng_d.sample::<f64, _>(StandardNormal);
            tbill.push_str(&format!("{dy}-{dm:02}-{day:02},{cum_d:.12e}\n"));
        }
        (dy, dm) = month_after(dy, dm);
    }
    fs::File::create(dir.join("tbill.csv"))?.write_all(tbill.as_bytes())?;

    // wilshire.csv: 16 trading days per month aggregated to 4-day means,
    // untransformed noise
    let mut wilshire = String::from("date,value\n");
    let (mut wy, mut wm) = (1999i32, 12u32);
    for _ in 0..months {
        for day in 1..=16u32 {
            let v: f64 = rng_w.sample(StandardNormal);
            wilshire.push_str(&format!("{wy}-{wm:02}-{day:02},{v:.12e}\n"));
        }
        (wy, wm) = month_after(wy, wm);
    }
    fs::File::create(dir.join("wilshire.csv"))?.write_all(wilshire.as_bytes())?;

    Ok(vec![
        SeriesSpec::quarterly("gdp", dir.join("gdp.csv"), Transformation::LogDiff),
        SeriesSpec::monthly("payroll", dir.join("payroll.csv"), Transformation::Diff),
        SeriesSpec::daily("tbill", dir.join("tbill.csv"), Transformation::Diff, 16, false),
        SeriesSpec::daily("wilshire", dir.join("wilshire.csv"), Transformation::None, 16, true),
    ])
}
