//! K-group log-rank test.

use std::collections::BTreeMap;

use super::gamma::chi2_sf;
use crate::error::{Error, Result};

/// One subject: follow-up time, whether the event was observed, and the
/// cluster it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalRecord {
    pub time: f64,
    pub event: bool,
    pub group: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRank {
    pub chi2: f64,
    pub p: f64,
    /// Rank of the variance matrix of the first `groups - 1` O−E scores
    /// (equals `groups - 1` unless a group never contributes risk).
    pub df: usize,
}

const PIVOT_TOL: f64 = 1e-12;

/// Quadratic form `bᵀ V⁻ b` for a positive semi-definite `V`, using a
/// pivot-skipping Cholesky factorisation. Returns the form and the rank.
fn psd_quadratic_form(mut v: Vec<Vec<f64>>, b: &[f64]) -> (f64, usize) {
    let m = b.len();
    let scale = (0..m).map(|i| v[i][i]).fold(0.0, f64::max);
    let tol = PIVOT_TOL * scale.max(f64::MIN_POSITIVE);
    let mut y = b.to_vec();
    let mut form = 0.0;
    let mut rank = 0;
    for p in 0..m {
        let piv = v[p][p];
        if piv <= tol {
            continue;
        }
        rank += 1;
        form += y[p] * y[p] / piv;
        let pivot_row = v[p].clone();
        for i in (p + 1)..m {
            let f = v[i][p] / piv;
            if f == 0.0 {
                continue;
            }
            y[i] -= f * y[p];
            for (vij, vpj) in v[i][p + 1..].iter_mut().zip(&pivot_row[p + 1..]) {
                *vij -= f * vpj;
            }
        }
    }
    (form, rank)
}

/// Log-rank comparison of the survival experience of the groups present in
/// `records`. The p-value is the chi-square upper tail.
pub fn logrank_test(records: &[SurvivalRecord]) -> Result<LogRank> {
    if let Some(r) = records.iter().find(|r| !r.time.is_finite() || r.time < 0.0) {
        return Err(Error::input(format!("invalid survival time {}", r.time)));
    }
    // dense group index in label order
    let groups: BTreeMap<usize, usize> = records
        .iter()
        .map(|r| r.group)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, g)| (g, i))
        .collect();
    let g = groups.len();
    if g < 2 {
        return Err(Error::input("log-rank test needs at least 2 groups"));
    }
    if !records.iter().any(|r| r.event) {
        return Ok(LogRank {
            chi2: 0.0,
            p: 1.0,
            df: g - 1,
        });
    }

    let mut sorted: Vec<(f64, bool, usize)> = records
        .iter()
        .map(|r| (r.time, r.event, groups[&r.group]))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut at_risk = vec![0.0_f64; g];
    for &(_, _, grp) in &sorted {
        at_risk[grp] += 1.0;
    }
    let mut o_minus_e = vec![0.0; g];
    let mut var = vec![vec![0.0; g]; g];
    let mut deaths = vec![0.0; g];
    let mut leaving = vec![0.0; g];

    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        deaths.iter_mut().for_each(|x| *x = 0.0);
        leaving.iter_mut().for_each(|x| *x = 0.0);
        while i < sorted.len() && sorted[i].0 == t {
            let (_, event, grp) = sorted[i];
            if event {
                deaths[grp] += 1.0;
            }
            leaving[grp] += 1.0;
            i += 1;
        }
        let d: f64 = deaths.iter().sum();
        let n: f64 = at_risk.iter().sum();
        if d > 0.0 {
            for a in 0..g {
                o_minus_e[a] += deaths[a] - d * at_risk[a] / n;
            }
            if n > 1.0 {
                let f = d * (n - d) / (n - 1.0) / n;
                for a in 0..g {
                    for b in 0..g {
                        let delta = if a == b { 1.0 } else { 0.0 };
                        var[a][b] += f * at_risk[a] * (delta - at_risk[b] / n);
                    }
                }
            }
        }
        for a in 0..g {
            at_risk[a] -= leaving[a];
        }
    }

    let reduced: Vec<Vec<f64>> = var[..g - 1].iter().map(|r| r[..g - 1].to_vec()).collect();
    let (chi2, df) = psd_quadratic_form(reduced, &o_minus_e[..g - 1]);
    if df == 0 {
        return Ok(LogRank {
            chi2: 0.0,
            p: 1.0,
            df,
        });
    }
    let chi2 = chi2.max(0.0);
    Ok(LogRank {
        chi2,
        p: chi2_sf(chi2, df as f64),
        df,
    })
}
