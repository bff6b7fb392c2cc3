//! Tabulated closed-form statistics for a list of sample sizes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::papr_math::*;
use crate::quadrature::QuadratureSpec;
use crate::scalar::to_db;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileEntry {
    pub p: f64,
    pub papr: f64,
    pub papr_db: f64,
    pub cf: f64,
}

/// Relative errors in percent, `(approx − exact) / exact × 100`, plus the
/// dB offsets of the two older mean-PAPR formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeErrors {
    pub cf_gumbel_pct: Option<f64>,
    pub cf_bound_pct: f64,
    pub papr_gumbel_pct: Option<f64>,
    pub dunsmore_pct: Option<f64>,
    pub keysight_pct: f64,
    pub dunsmore_db: Option<f64>,
    pub keysight_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub n: u64,
    /// `H_n`.
    pub mean_papr: f64,
    pub theory_papr_db: f64,
    pub mean_papr_gumbel: Option<f64>,
    pub mean_cf: f64,
    pub mean_cf_bound: f64,
    pub mean_cf_gumbel: Option<f64>,
    pub mean_cf_sum: Option<f64>,
    pub dunsmore: Option<f64>,
    pub keysight: f64,
    pub quantiles: Vec<QuantileEntry>,
    pub relative_errors: Option<RelativeErrors>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsTable {
    pub quantile_levels: Vec<f64>,
    pub rows: Vec<StatsRow>,
}

fn pct(approx: f64, exact: f64) -> f64 {
    (approx - exact) / exact * 100.0
}

pub fn stats_row(n: u64, quantiles: &[f64], rel_err: bool, q: &QuadratureSpec<f64>) -> Result<StatsRow> {
    let m = PaprModel::new(n)?;
    let h: f64 = mean_papr(m);
    let mean_cf: f64 = mean_cf_integral(m, q)?;
    let bound: f64 = mean_cf_bound(m);
    let papr_gumbel = mean_papr_gumbel::<f64>(m).ok();
    let cf_gumbel = mean_cf_gumbel::<f64>(m).ok();
    let dunsmore = prior_mean_papr_dunsmore::<f64>(m).ok();
    let keysight: f64 = prior_mean_papr_keysight(m);
    let quantiles = quantiles
        .iter()
        .map(|&p| {
            let papr: f64 = papr_quantile(p, m)?;
            Ok(QuantileEntry {
                p,
                papr,
                papr_db: to_db(papr),
                cf: cf_quantile(p, m)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let relative_errors = rel_err.then(|| RelativeErrors {
        cf_gumbel_pct: cf_gumbel.map(|v| pct(v, mean_cf)),
        cf_bound_pct: pct(bound, mean_cf),
        papr_gumbel_pct: papr_gumbel.map(|v| pct(v, h)),
        dunsmore_pct: dunsmore.map(|v| pct(v, h)),
        keysight_pct: pct(keysight, h),
        dunsmore_db: dunsmore.map(|v| to_db(v / h)),
        keysight_db: to_db(keysight / h),
    });
    Ok(StatsRow {
        n,
        mean_papr: h,
        theory_papr_db: to_db(h),
        mean_papr_gumbel: papr_gumbel,
        mean_cf,
        mean_cf_bound: bound,
        mean_cf_gumbel: cf_gumbel,
        mean_cf_sum: mean_cf_sum::<f64>(m).ok(),
        dunsmore,
        keysight,
        quantiles,
        relative_errors,
    })
}

pub fn build_stats_table(ns: &[u64], quantiles: &[f64], rel_err: bool, q: &QuadratureSpec<f64>) -> Result<StatsTable> {
    Ok(StatsTable {
        quantile_levels: quantiles.to_vec(),
        rows: ns
            .iter()
            .map(|&n| stats_row(n, quantiles, rel_err, q))
            .collect::<Result<_>>()?,
    })
}

/// `count` sample sizes spaced evenly in log10 between `lo` and `hi`,
/// rounded to integers with duplicates removed.
pub fn log_spaced_sizes(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    if count <= 1 || lo >= hi {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).log10(), (hi as f64).log10());
    let mut out: Vec<u64> = (0..count)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64).round() as u64)
        .collect();
    out.dedup();
    out
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

impl StatsTable {
    pub(crate) fn write_csv(&self, out: &mut String) {
        let with_rel = self.rows.iter().any(|r| r.relative_errors.is_some());
        out.push_str(
            "n,mean_papr,theory_papr_db,mean_papr_gumbel,mean_cf,mean_cf_bound,mean_cf_gumbel,mean_cf_sum,dunsmore,keysight",
        );
        for p in &self.quantile_levels {
            let _ = write!(out, ",papr_q{p},papr_db_q{p},cf_q{p}");
        }
        if with_rel {
            out.push_str(
                ",cf_gumbel_rel_err_pct,cf_bound_rel_err_pct,papr_gumbel_rel_err_pct,dunsmore_rel_err_pct,keysight_rel_err_pct,dunsmore_db,keysight_db",
            );
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.n,
                cell(Some(r.mean_papr)),
                cell(Some(r.theory_papr_db)),
                cell(r.mean_papr_gumbel),
                cell(Some(r.mean_cf)),
                cell(Some(r.mean_cf_bound)),
                cell(r.mean_cf_gumbel),
                cell(r.mean_cf_sum),
                cell(r.dunsmore),
                cell(Some(r.keysight)),
            );
            for qe in &r.quantiles {
                let _ = write!(out, ",{},{},{}", cell(Some(qe.papr)), cell(Some(qe.papr_db)), cell(Some(qe.cf)));
            }
            if with_rel {
                match &r.relative_errors {
                    Some(e) => {
                        let _ = write!(
                            out,
                            ",{},{},{},{},{},{},{}",
                            cell(e.cf_gumbel_pct),
                            cell(Some(e.cf_bound_pct)),
                            cell(e.papr_gumbel_pct),
                            cell(e.dunsmore_pct),
                            cell(Some(e.keysight_pct)),
                            cell(e.dunsmore_db),
                            cell(Some(e.keysight_db)),
                        );
                    }
                    None => out.push_str(",,,,,,,"),
                }
            }
            out.push('\n');
        }
    }
}
