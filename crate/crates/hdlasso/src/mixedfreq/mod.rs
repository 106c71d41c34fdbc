//! Mixed-frequency panels and the forecasting vs. nowcasting protocols.
//!
//! A quarterly target is predicted from monthly and daily covariates.
//! Each covariate series contributes a fixed number `m` of observations
//! per quarter (3 for monthly data, `3 * days_per_month` for trimmed
//! daily data), so the observation `b` steps before the end of quarter
//! `i` has absolute index `i*m - b`, counting from 1. Forecast mode uses
//! only data through the end of quarter `i-1`; the two nowcast modes add
//! the target quarter's first one or two months of high-frequency data.
//!
//! Every design column carries a stamp describing which observation it
//! reads relative to the target quarter; [`audit_no_lookahead`] replays
//! the stamps against the protocol's information boundary.

mod fixture;
mod ingest;
mod rolling;

pub use fixture::write_fixture;
pub use ingest::{ingest_csv, IngestLog};
pub use rolling::{
    rolling_evaluation, select_orders, EstimatorSummary, NowcastEstimator, OriginScore,
    RollingOptions, RollingResult,
};

use std::fmt;
use std::ops::Range;
use std::path::PathBuf;

use chrono::{Datelike, NaiveDate};
use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Sampling frequency of one input series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frequency {
    Quarterly,
    Monthly,
    Daily,
}

impl Frequency {
    pub fn as_str(self) -> &'static str {
        match self {
            Frequency::Quarterly => "quarterly",
            Frequency::Monthly => "monthly",
            Frequency::Daily => "daily",
        }
    }
}

/// Pointwise transformation applied after trimming, before alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transformation {
    #[default]
    None,
    /// First difference; consumes the first observation.
    Diff,
    /// First difference of the natural logarithm; requires positive
    /// inputs and consumes the first observation.
    LogDiff,
}

impl Transformation {
    pub fn as_str(self) -> &'static str {
        match self {
            Transformation::None => "none",
            Transformation::Diff => "diff",
            Transformation::LogDiff => "logdiff",
        }
    }

    /// Number of leading observations the transformation consumes.
    pub fn consumed(self) -> usize {
        match self {
            Transformation::None => 0,
            Transformation::Diff | Transformation::LogDiff => 1,
        }
    }
}

/// Description of one input series: where it lives, how often it is
/// observed, and how it is preprocessed.
#[derive(Debug, Clone)]
pub struct SeriesSpec {
    pub name: String,
    pub file: PathBuf,
    pub frequency: Frequency,
    pub transformation: Transformation,
    /// Daily series only: trading days retained per month (the rest of
    /// the month is discarded).
    pub days_per_month: Option<usize>,
    /// Daily series only: replace the retained days by non-overlapping
    /// 4-day means before transformation.
    pub weekly_mean: bool,
}

impl SeriesSpec {
    pub fn quarterly(name: &str, file: impl Into<PathBuf>, tf: Transformation) -> Self {
        Self {
            name: name.into(),
            file: file.into(),
            frequency: Frequency::Quarterly,
            transformation: tf,
            days_per_month: None,
            weekly_mean: false,
        }
    }

    pub fn monthly(name: &str, file: impl Into<PathBuf>, tf: Transformation) -> Self {
        Self {
            name: name.into(),
            file: file.into(),
            frequency: Frequency::Monthly,
            transformation: tf,
            days_per_month: None,
            weekly_mean: false,
        }
    }

    pub fn daily(
        name: &str,
        file: impl Into<PathBuf>,
        tf: Transformation,
        days_per_month: usize,
        weekly_mean: bool,
    ) -> Self {
        Self {
            name: name.into(),
            file: file.into(),
            frequency: Frequency::Daily,
            transformation: tf,
            days_per_month: Some(days_per_month),
            weekly_mean,
        }
    }

    /// Observations contributed per quarter after trimming and optional
    /// weekly aggregation. Must be divisible by 3 so that every
    /// observation belongs to a unique month of the quarter.
    pub fn per_quarter(&self) -> Result<usize> {
        let m = match self.frequency {
            Frequency::Quarterly => 1,
            Frequency::Monthly => {
                if self.days_per_month.is_some() {
                    return Err(Error::InvalidInput(format!(
                        "series {}: days_per_month applies only to daily data",
                        self.name
                    )));
                }
                3
            }
            Frequency::Daily => {
                let days = self.days_per_month.ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "series {}: daily data needs days_per_month",
                        self.name
                    ))
                })?;
                if days == 0 {
                    return Err(Error::InvalidInput(format!(
                        "series {}: days_per_month must be positive",
                        self.name
                    )));
                }
                if self.weekly_mean {
                    if days % 4 != 0 {
                        return Err(Error::InvalidInput(format!(
                            "series {}: weekly means need days_per_month divisible by 4, got {days}",
                            self.name
                        )));
                    }
                    3 * days / 4
                } else {
                    3 * days
                }
            }
        };
        Ok(m)
    }
}

/// Calendar quarter, ordered chronologically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuarterId {
    pub year: i32,
    /// 1-based quarter within the year.
    pub quarter: u8,
}

impl QuarterId {
    pub fn new(year: i32, quarter: u8) -> Result<Self> {
        if !(1..=4).contains(&quarter) {
            return Err(Error::InvalidInput(format!("quarter must be 1..=4, got {quarter}")));
        }
        Ok(Self { year, quarter })
    }

    pub fn from_date(date: NaiveDate) -> Self {
        Self { year: date.year(), quarter: ((date.month0() / 3) + 1) as u8 }
    }

    pub fn next(self) -> Self {
        if self.quarter == 4 {
            Self { year: self.year + 1, quarter: 1 }
        } else {
            Self { year: self.year, quarter: self.quarter + 1 }
        }
    }

    /// 1-based month of the year this date falls in within the quarter:
    /// 0, 1, or 2.
    pub fn month_within(self, date: NaiveDate) -> usize {
        (date.month0() % 3) as usize
    }
}

impl fmt::Display for QuarterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.quarter)
    }
}

/// One covariate series aligned onto the panel's quarter range.
#[derive(Debug, Clone)]
pub struct PanelSeries {
    pub name: String,
    /// Observations per quarter.
    pub m: usize,
    values: Vec<f64>,
}

impl PanelSeries {
    pub fn new(name: String, m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 || m % 3 != 0 {
            return Err(Error::InvalidInput(format!(
                "series {name}: per-quarter count must be a positive multiple of 3, got {m}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("series {name}")));
        }
        Ok(Self { name, m, values })
    }

    /// Month of the quarter (0, 1, 2) a within-quarter position belongs to.
    pub fn month_of_position(&self, pos: usize) -> usize {
        pos / (self.m / 3)
    }
}

/// Aligned mixed-frequency panel: one quarterly target plus covariate
/// blocks with fixed per-quarter counts.
#[derive(Debug, Clone)]
pub struct MixedFreqPanel {
    target_name: String,
    quarters: Vec<QuarterId>,
    y: Vec<f64>,
    series: Vec<PanelSeries>,
}

impl MixedFreqPanel {
    pub fn new(
        target_name: String,
        quarters: Vec<QuarterId>,
        y: Vec<f64>,
        series: Vec<PanelSeries>,
    ) -> Result<Self> {
        if quarters.is_empty() {
            return Err(Error::InvalidInput("panel needs at least one quarter".into()));
        }
        if y.len() != quarters.len() {
            return Err(Error::InvalidInput(format!(
                "{} target values for {} quarters",
                y.len(),
                quarters.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("target {target_name}")));
        }
        for w in quarters.windows(2) {
            if w[1] != w[0].next() {
                return Err(Error::InvalidInput(format!(
                    "quarters must be consecutive; {} follows {}",
                    w[1], w[0]
                )));
            }
        }
        for s in &series {
            if s.values.len() != quarters.len() * s.m {
                return Err(Error::InvalidInput(format!(
                    "series {}: {} values cannot cover {} quarters at {} per quarter",
                    s.name,
                    s.values.len(),
                    quarters.len(),
                    s.m
                )));
            }
        }
        Ok(Self { target_name, quarters, y, series })
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn quarters(&self) -> &[QuarterId] {
        &self.quarters
    }

    pub fn len(&self) -> usize {
        self.quarters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quarters.is_empty()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n_series(&self) -> usize {
        self.series.len()
    }

    pub fn series(&self, l: usize) -> &PanelSeries {
        &self.series[l]
    }

    /// Observation `z_{l,t}` with `t` counted from 1, so quarter `i`
    /// (1-based) covers indices `(i-1)*m + 1 ..= i*m`.
    pub fn z(&self, l: usize, t: usize) -> f64 {
        self.series[l].values[t - 1]
    }

    /// Availability of each within-quarter position under a mode: the
    /// first `months` months of the quarter are observed. Monotone by
    /// construction: positions are ordered by month.
    pub fn availability(&self, mode: NowcastMode) -> Vec<Vec<bool>> {
        self.series
            .iter()
            .map(|s| {
                (0..s.m).map(|pos| s.month_of_position(pos) < mode.months_available()).collect()
            })
            .collect()
    }
}

/// How much of the target quarter's high-frequency data the predictor
/// may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NowcastMode {
    Forecast,
    Nowcast1,
    Nowcast2,
}

impl NowcastMode {
    /// Months of the target quarter exposed to the design.
    pub fn months_available(self) -> usize {
        match self {
            NowcastMode::Forecast => 0,
            NowcastMode::Nowcast1 => 1,
            NowcastMode::Nowcast2 => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NowcastMode::Forecast => "forecast",
            NowcastMode::Nowcast1 => "nowcast1",
            NowcastMode::Nowcast2 => "nowcast2",
        }
    }
}

/// Information protocol for one prediction exercise.
#[derive(Debug, Clone)]
pub struct NowcastProtocol {
    pub mode: NowcastMode,
    /// Autoregressive lags of the target.
    pub ar_order: usize,
    /// End-of-previous-quarter lags per series: entry `l` includes
    /// `z_{l,(i-1)m - b}` for `b = 0..lag_budget[l]`. Zero excludes the
    /// series' backward lags entirely; a conventional lag order `B_l`
    /// corresponds to an entry of `B_l + 1`.
    pub lag_budget: Vec<usize>,
}

impl NowcastProtocol {
    pub fn new(mode: NowcastMode, ar_order: usize, lag_budget: Vec<usize>) -> Self {
        Self { mode, ar_order, lag_budget }
    }

    fn validate(&self, panel: &MixedFreqPanel) -> Result<()> {
        if self.lag_budget.len() != panel.n_series() {
            return Err(Error::InvalidInput(format!(
                "{} lag budgets for {} series",
                self.lag_budget.len(),
                panel.n_series()
            )));
        }
        if self.ar_order == 0 && self.lag_budget.iter().all(|&b| b == 0) {
            if self.mode == NowcastMode::Forecast {
                return Err(Error::InvalidInput(
                    "forecast protocol with no lags has an empty design".into(),
                ));
            }
        }
        Ok(())
    }
}

/// What one design column reads, relative to a row's target quarter `i`
/// (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// `y_{i-k}`, `k >= 1`.
    ArLag { k: usize },
    /// `z_{l,(i-1)m - b}`: `b` steps before the end of quarter `i-1`.
    PrevQuarter { series: usize, b: usize },
    /// `z_{l,(i-1)m + pos + 1}`: position `pos` inside quarter `i`.
    WithinQuarter { series: usize, pos: usize },
}

/// Column metadata used for audits and reports.
#[derive(Debug, Clone)]
pub struct FeatureStamp {
    pub label: String,
    pub kind: FeatureKind,
}

/// A training window plus the origin row, all built under one protocol.
#[derive(Debug, Clone)]
pub struct NowcastDesign {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    /// Panel index of each training row's target quarter.
    pub rows: Vec<usize>,
    /// Regressors of the quarter being predicted.
    pub origin_x: Vec<f64>,
    /// Panel index of the predicted quarter.
    pub origin: usize,
    pub columns: Vec<FeatureStamp>,
    /// Column indices holding the autoregressive lags.
    pub ar_columns: Vec<usize>,
    /// Contiguous column range per series (possibly empty).
    pub series_columns: Vec<Range<usize>>,
}

impl NowcastDesign {
    pub fn n_train(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }
}

/// Value a stamp reads for target quarter `i` (1-based), as an absolute
/// index: `Ok(Left)` = target index, `Ok(Right)` = (series, hf index).
fn stamp_address(kind: FeatureKind, i: usize, panel: &MixedFreqPanel) -> (Option<usize>, Option<(usize, usize)>) {
    match kind {
        FeatureKind::ArLag { k } => (Some(i - k), None),
        FeatureKind::PrevQuarter { series, b } => {
            let m = panel.series(series).m;
            (None, Some((series, (i - 1) * m - b)))
        }
        FeatureKind::WithinQuarter { series, pos } => {
            let m = panel.series(series).m;
            (None, Some((series, (i - 1) * m + pos + 1)))
        }
    }
}

/// Builds the regression design for predicting the quarter at panel
/// index `origin` (0-based) under the protocol. Training rows cover
/// every earlier quarter with sufficient history; the origin row is
/// returned separately since its target is the value being predicted.
pub fn build_design(
    panel: &MixedFreqPanel,
    protocol: &NowcastProtocol,
    origin: usize,
) -> Result<NowcastDesign> {
    protocol.validate(panel)?;
    if origin >= panel.len() {
        return Err(Error::InvalidInput(format!(
            "origin index {origin} outside the {}-quarter panel",
            panel.len()
        )));
    }

    // Earliest 1-based target quarter with full history: AR lags need
    // i - a >= 1; a lag budget L needs (i-1)m - (L-1) >= 1.
    let mut i_min = protocol.ar_order + 1;
    for (l, &budget) in protocol.lag_budget.iter().enumerate() {
        if budget == 0 {
            continue;
        }
        let m = panel.series(l).m;
        let quarters_back = budget.div_ceil(m);
        i_min = i_min.max(1 + quarters_back);
    }
    let io = origin + 1;
    if io < i_min.max(2) {
        return Err(Error::InvalidInput(format!(
            "origin {} needs history back to quarter index {i_min}, but the panel starts there",
            panel.quarters()[origin]
        )));
    }
    if i_min > origin {
        return Err(Error::InvalidInput(format!(
            "no training rows: first usable target is quarter index {i_min}, origin is {io}"
        )));
    }

    let months = protocol.mode.months_available();
    let mut columns = Vec::new();
    let mut ar_columns = Vec::new();
    for k in 1..=protocol.ar_order {
        ar_columns.push(columns.len());
        columns.push(FeatureStamp { label: format!("y_lag{k}"), kind: FeatureKind::ArLag { k } });
    }
    let mut series_columns = Vec::new();
    for (l, &budget) in protocol.lag_budget.iter().enumerate() {
        let start = columns.len();
        let s = panel.series(l);
        for b in 0..budget {
            columns.push(FeatureStamp {
                label: format!("{}_end_lag{b}", s.name),
                kind: FeatureKind::PrevQuarter { series: l, b },
            });
        }
        let per_month = s.m / 3;
        for pos in 0..months * per_month {
            columns.push(FeatureStamp {
                label: format!("{}_m{}_pos{}", s.name, s.month_of_position(pos) + 1, pos % per_month),
                kind: FeatureKind::WithinQuarter { series: l, pos },
            });
        }
        series_columns.push(start..columns.len());
    }

    let targets: Vec<usize> = (i_min..io).collect();
    let mut x = Array2::zeros((targets.len(), columns.len()));
    let mut y = Array1::zeros(targets.len());
    let fill = |i: usize, row: &mut dyn FnMut(usize, f64)| {
        for (j, stamp) in columns.iter().enumerate() {
            let v = match stamp_address(stamp.kind, i, panel) {
                (Some(t), None) => panel.y()[t - 1],
                (None, Some((l, t))) => panel.z(l, t),
                _ => unreachable!(),
            };
            row(j, v);
        }
    };
    for (r, &i) in targets.iter().enumerate() {
        fill(i, &mut |j, v| x[[r, j]] = v);
        y[r] = panel.y()[i - 1];
    }
    let mut origin_x = vec![0.0; columns.len()];
    fill(io, &mut |j, v| origin_x[j] = v);

    Ok(NowcastDesign {
        x,
        y,
        rows: targets.iter().map(|&i| i - 1).collect(),
        origin_x,
        origin,
        columns,
        ar_columns,
        series_columns,
    })
}

/// Replays every design cell against the protocol's information
/// boundary and returns the number of (row, column) pairs checked.
///
/// The boundary for target quarter `i` is the end of quarter `i-1` plus
/// the exposed months of quarter `i`: target values through `i-1`, and
/// series `l` through `(i-1)*m_l + months*(m_l/3)`.
pub fn audit_no_lookahead(
    design: &NowcastDesign,
    panel: &MixedFreqPanel,
    protocol: &NowcastProtocol,
) -> Result<usize> {
    let months = protocol.mode.months_available();
    let mut checked = 0usize;
    let mut rows: Vec<usize> = design.rows.clone();
    rows.push(design.origin);
    for &row in &rows {
        let i = row + 1;
        for stamp in &design.columns {
            match stamp_address(stamp.kind, i, panel) {
                (Some(t), None) => {
                    if t > i - 1 {
                        return Err(Error::InvalidInput(format!(
                            "column {} reads target index {t} past boundary {} for quarter {}",
                            stamp.label,
                            i - 1,
                            panel.quarters()[row]
                        )));
                    }
                }
                (None, Some((l, t))) => {
                    let m = panel.series(l).m;
                    let boundary = (i - 1) * m + months * (m / 3);
                    if t == 0 || t > boundary {
                        return Err(Error::InvalidInput(format!(
                            "column {} reads {}[{t}] past boundary {boundary} for quarter {}",
                            stamp.label,
                            panel.series(l).name,
                            panel.quarters()[row]
                        )));
                    }
                }
                _ => unreachable!(),
            }
            checked += 1;
        }
    }
    Ok(checked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel_one_monthly(quarters: usize) -> MixedFreqPanel {
        let y: Vec<f64> = (0..quarters).map(|i| i as f64).collect();
        let z: Vec<f64> = (0..quarters * 3).map(|t| 100.0 + t as f64).collect();
        let mut q = vec![QuarterId::new(2000, 1).unwrap()];
        while q.len() < quarters {
            q.push(q.last().unwrap().next());
        }
        MixedFreqPanel::new(
            "y".into(),
            q,
            y,
            vec![PanelSeries::new("z1".into(), 3, z).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn lag_addressing_matches_hand_indexing() {
        // z_{1,t} = 100 + (t-1). For target quarter i=2, the end-of-quarter-1
        // lags z_{3*1 - b} for b in {0,1,2} are indices 3,2,1.
        let panel = panel_one_monthly(8);
        let protocol = NowcastProtocol::new(NowcastMode::Forecast, 1, vec![3]);
        let design = build_design(&panel, &protocol, 4).unwrap();
        // training row with target quarter i=2 is the first row
        assert_eq!(design.rows[0], 1);
        let row = design.x.row(0);
        assert_eq!(row[0], panel.y()[0]);
        assert_eq!(row[1], 102.0); // z_{1,3}
        assert_eq!(row[2], 101.0); // z_{1,2}
        assert_eq!(row[3], 100.0); // z_{1,1}
    }

    #[test]
    fn nowcast_sets_nest_and_differ_by_month_two() {
        let panel = panel_one_monthly(8);
        let origin = 6;
        let base = NowcastProtocol::new(NowcastMode::Forecast, 1, vec![3]);
        let n1 = NowcastProtocol::new(NowcastMode::Nowcast1, 1, vec![3]);
        let n2 = NowcastProtocol::new(NowcastMode::Nowcast2, 1, vec![3]);
        let d0 = build_design(&panel, &base, origin).unwrap();
        let d1 = build_design(&panel, &n1, origin).unwrap();
        let d2 = build_design(&panel, &n2, origin).unwrap();
        assert_eq!(d1.n_columns(), d0.n_columns() + 1);
        assert_eq!(d2.n_columns(), d1.n_columns() + 1);
        // the extra nowcast2 column is exactly the month-2 observation
        let extra: Vec<&FeatureStamp> = d2
            .columns
            .iter()
            .filter(|c| !d1.columns.iter().any(|c1| c1.kind == c.kind))
            .collect();
        assert_eq!(extra.len(), 1);
        assert_eq!(extra[0].kind, FeatureKind::WithinQuarter { series: 0, pos: 1 });
        // i = origin+1 = 7: month-1 value of quarter 7 is z_{18+1}=z_19
        let j = d1.columns.len() - 1;
        assert_eq!(d1.origin_x[j], 100.0 + 18.0);
    }

    #[test]
    fn audits_pass_on_constructed_designs() {
        let panel = panel_one_monthly(10);
        for mode in [NowcastMode::Forecast, NowcastMode::Nowcast1, NowcastMode::Nowcast2] {
            let protocol = NowcastProtocol::new(mode, 2, vec![6]);
            let design = build_design(&panel, &protocol, 8).unwrap();
            let checked = audit_no_lookahead(&design, &panel, &protocol).unwrap();
            assert_eq!(checked, (design.n_train() + 1) * design.n_columns());
        }
    }

    #[test]
    fn audit_rejects_a_lookahead_stamp() {
        let panel = panel_one_monthly(8);
        let protocol = NowcastProtocol::new(NowcastMode::Forecast, 1, vec![3]);
        let mut design = build_design(&panel, &protocol, 5).unwrap();
        design.columns[1] = FeatureStamp {
            label: "peek".into(),
            kind: FeatureKind::WithinQuarter { series: 0, pos: 0 },
        };
        assert!(audit_no_lookahead(&design, &panel, &protocol).is_err());
    }

    #[test]
    fn ar_only_design_has_lagged_target_column() {
        let panel = panel_one_monthly(8);
        let protocol = NowcastProtocol::new(NowcastMode::Forecast, 1, vec![0]);
        let design = build_design(&panel, &protocol, 6).unwrap();
        assert_eq!(design.n_columns(), 1);
        assert_eq!(design.columns[0].kind, FeatureKind::ArLag { k: 1 });
        for (r, &row) in design.rows.iter().enumerate() {
            assert_eq!(design.x[[r, 0]], panel.y()[row - 1]);
        }
    }

    #[test]
    fn availability_mask_is_monotone_within_quarters() {
        let panel = MixedFreqPanel::new(
            "y".into(),
            vec![QuarterId::new(2001, 1).unwrap()],
            vec![0.0],
            vec![PanelSeries::new("d".into(), 48, vec![0.0; 48]).unwrap()],
        )
        .unwrap();
        for mode in [NowcastMode::Forecast, NowcastMode::Nowcast1, NowcastMode::Nowcast2] {
            let mask = &panel.availability(mode)[0];
            assert_eq!(mask.len(), 48);
            for w in mask.windows(2) {
                assert!(w[0] >= w[1], "mask must not re-enable later positions");
            }
            assert_eq!(mask.iter().filter(|&&a| a).count(), mode.months_available() * 16);
        }
    }

    #[test]
    fn insufficient_history_is_an_error() {
        let panel = panel_one_monthly(4);
        let protocol = NowcastProtocol::new(NowcastMode::Forecast, 3, vec![0]);
        assert!(build_design(&panel, &protocol, 3).is_err());
    }

    #[test]
    fn per_quarter_counts_follow_frequency_rules() {
        let m = SeriesSpec::monthly("m", "m.csv", Transformation::Diff);
        assert_eq!(m.per_quarter().unwrap(), 3);
        let d = SeriesSpec::daily("d", "d.csv", Transformation::None, 16, false);
        assert_eq!(d.per_quarter().unwrap(), 48);
        let w = SeriesSpec::daily("w", "w.csv", Transformation::None, 16, true);
        assert_eq!(w.per_quarter().unwrap(), 12);
        let bad = SeriesSpec::daily("b", "b.csv", Transformation::None, 15, true);
        assert!(bad.per_quarter().is_err());
    }
}
