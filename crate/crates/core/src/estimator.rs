//! Monte Carlo estimation of spanning probabilities and threshold scaling.
//!
//! All randomness is common-random-number coupled: each trial draws one
//! uniform per cell, keyed by (seed, extents, trial, cell) — never by p —
//! and a cell is occupied iff its uniform falls below p. Spanning
//! indicators are therefore *exactly* nondecreasing in p sample by sample,
//! which is what makes stochastic bisection on p trustworthy. Trial
//! results are accumulated as integers, so estimates are bit-identical
//! regardless of thread count or scheduling.
//!
//! Lengths follow the box convention: scale L means the box [0,L], i.e.
//! L+1 sites per axis.

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;

use crate::bounds::{f_scaling, ScalingForm};
use crate::error::{Error, Result};
use crate::lattice::{Dims, Lattice, NeighborhoodSpec};
use crate::rng::{mix64, Stream};

/// Two-sided 95% normal quantile used for Wilson intervals.
const Z95: f64 = 1.96;

/// Probe-count multiplier cap for threshold bisection.
const PROBE_CAP: u64 = 32;

/// Wilson score interval for `successes` out of `trials` at 95%.
/// Always contains the point estimate.
pub fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (((center - half).max(0.0)), ((center + half).min(1.0)))
}

/// One spanning-probability estimate at a fixed lattice shape and density.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanEstimate {
    pub dims: Dims,
    pub p: f64,
    pub spec: NeighborhoodSpec,
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// Stream of per-trial fill randomness for one lattice shape. Excludes p
/// by construction.
fn shape_stream(dims: &Dims, seed: u64) -> Stream {
    Stream::new(seed)
        .substream(dims.extent(0) as u64)
        .substream(dims.extent(1) as u64)
        .substream(dims.extent(2) as u64)
}

/// Estimate the probability that a random fill at density p is internally
/// spanned, from independent trials with a Wilson 95% interval.
pub fn estimate_spanning(
    dims: Dims,
    p: f64,
    spec: &NeighborhoodSpec,
    trials: u64,
    seed: u64,
) -> Result<SpanEstimate> {
    if trials < 1 {
        return Err(Error::BadParameter("trials must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadProbability { value: p, expected: "[0, 1]" });
    }
    spec.check_rank(&dims)?;

    let base = shape_stream(&dims, seed);
    let successes: u64 = (0..trials)
        .into_par_iter()
        .fold(
            || (0u64, Lattice::empty(dims)),
            |(mut acc, mut lat), trial| {
                lat.refill(p, base.substream(trial));
                acc += crate::dynamics::is_internally_spanned(&lat, spec)
                    .expect("rank checked above") as u64;
                (acc, lat)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(|| 0, |a, b| a + b);

    let p_hat = successes as f64 / trials as f64;
    let (ci_low, ci_high) = wilson(successes, trials);
    Ok(SpanEstimate {
        dims,
        p,
        spec: spec.clone(),
        trials,
        successes,
        p_hat,
        ci_low,
        ci_high,
        seed,
    })
}

/// Bisect for the density where the spanning probability of the [0,L]^d
/// box crosses `target`. Probes reuse the same trial randomness at every
/// density (monotone coupling), and a probe whose interval straddles the
/// target doubles its trial count, up to 32× `trials_per_probe`, before
/// committing to a side by point estimate. Returns the bracket midpoint
/// once the bracket is no wider than `tol`.
pub fn threshold_p(
    l: usize,
    spec: &NeighborhoodSpec,
    target: f64,
    tol: f64,
    trials_per_probe: u64,
    seed: u64,
) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::BadParameter(format!("target must be in (0,1), got {target}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::BadParameter(format!("tol must be in (0,1), got {tol}")));
    }
    if trials_per_probe < 1 {
        return Err(Error::BadParameter("trials_per_probe must be >= 1".into()));
    }
    let dims = Dims::cube(spec.rank(), l + 1)?;
    spec.check_rank(&dims)?;

    // p_hat(0) = 0 and p_hat(1) = 1, so [0,1] always brackets the target
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let mut n = trials_per_probe;
        loop {
            let est = estimate_spanning(dims, mid, spec, n, seed)?;
            if est.ci_low > target {
                hi = mid;
                break;
            }
            if est.ci_high < target {
                lo = mid;
                break;
            }
            if n < trials_per_probe.saturating_mul(PROBE_CAP) {
                n = n.saturating_mul(2);
                continue;
            }
            // undecidable at the probe budget: commit by point estimate
            if est.p_hat >= target {
                hi = mid;
            } else {
                lo = mid;
            }
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One sweep row: box scale and the estimate taken there.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub l: usize,
    pub estimate: SpanEstimate,
}

/// A grid of estimates with reproducibility metadata.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub spec: NeighborhoodSpec,
    pub rows: Vec<SweepRow>,
    pub seed: u64,
    /// Unix seconds; taken from SOURCE_DATE_EPOCH (0 when unset) so that
    /// identical inputs re-emit identical bytes.
    pub timestamp: u64,
    /// Content hash of the inputs, as a git-style hex string.
    pub revision: String,
}

/// How to choose the density at each box scale.
#[derive(Clone, Copy, Debug)]
pub enum SweepPlan<'a> {
    /// Estimate at every density in the list.
    Grid { ps: &'a [f64] },
    /// Bisect for the density where spanning probability crosses `target`.
    Threshold { target: f64, tol: f64 },
}

fn source_epoch() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()).unwrap_or(0)
}

fn content_revision(spec: &NeighborhoodSpec, seed: u64, trials: u64, rows: &[SweepRow]) -> String {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    let mut absorb = |v: u64| h = mix64(h ^ v);
    for i in 0..spec.rank() {
        absorb(spec.radius(i) as u64);
    }
    absorb(seed);
    absorb(trials);
    for row in rows {
        absorb(row.l as u64);
        absorb(row.estimate.p.to_bits());
        absorb(row.estimate.successes);
    }
    format!("{h:016x}")
}

fn check_no_duplicate_keys(rows: &[SweepRow]) -> Result<()> {
    let mut keys = BTreeSet::new();
    for row in rows {
        if !keys.insert((row.l, row.estimate.p.to_bits())) {
            return Err(Error::BadParameter(format!(
                "duplicate sweep key (L = {}, p = {})",
                row.l, row.estimate.p
            )));
        }
    }
    Ok(())
}

/// Sweep a grid of box scales. Grid points run in parallel; output order
/// and content depend only on the inputs.
pub fn sweep(
    ls: &[usize],
    plan: SweepPlan<'_>,
    spec: &NeighborhoodSpec,
    trials: u64,
    seed: u64,
) -> Result<SweepResult> {
    if ls.is_empty() {
        return Err(Error::BadParameter("sweep needs at least one box scale".into()));
    }
    if let SweepPlan::Grid { ps } = plan {
        if ps.is_empty() {
            return Err(Error::BadParameter("sweep needs at least one density".into()));
        }
    }

    let points: Vec<(usize, Option<f64>)> = match plan {
        SweepPlan::Grid { ps } => {
            ls.iter().flat_map(|&l| ps.iter().map(move |&p| (l, Some(p)))).collect()
        }
        SweepPlan::Threshold { .. } => ls.iter().map(|&l| (l, None)).collect(),
    };

    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(l, p)| -> Result<SweepRow> {
            let dims = Dims::cube(spec.rank(), l + 1)?;
            let p = match (p, plan) {
                (Some(p), _) => p,
                (None, SweepPlan::Threshold { target, tol }) => {
                    threshold_p(l, spec, target, tol, trials, seed)?
                }
                (None, SweepPlan::Grid { .. }) => unreachable!("grid points carry densities"),
            };
            Ok(SweepRow { l, estimate: estimate_spanning(dims, p, spec, trials, seed)? })
        })
        .collect::<Result<_>>()?;

    check_no_duplicate_keys(&rows)?;
    let revision = content_revision(spec, seed, trials, &rows);
    Ok(SweepResult { spec: spec.clone(), rows, seed, timestamp: source_epoch(), revision })
}

impl SweepResult {
    /// Combine two sweeps over the same model; keys must be disjoint.
    /// Rows are canonically reordered, so merging is associative and
    /// commutative up to metadata.
    pub fn merge(mut self, other: SweepResult) -> Result<SweepResult> {
        if self.spec != other.spec {
            return Err(Error::BadParameter(format!(
                "cannot merge sweeps of {} and {}",
                self.spec, other.spec
            )));
        }
        self.rows.extend(other.rows);
        self.rows
            .sort_by(|a, b| (a.l, a.estimate.p.to_bits()).cmp(&(b.l, b.estimate.p.to_bits())));
        check_no_duplicate_keys(&self.rows)?;
        let trials = self.rows.first().map_or(0, |r| r.estimate.trials);
        self.revision = content_revision(&self.spec, self.seed, trials, &self.rows);
        Ok(self)
    }

    /// Rows as CSV with a fixed header, one line per row, emitted
    /// incrementally.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "L,p,trials,successes,p_hat,ci_low,ci_high,seed")?;
        for row in &self.rows {
            let e = &row.estimate;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                row.l, e.p, e.trials, e.successes, e.p_hat, e.ci_low, e.ci_high, e.seed
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    /// Sidecar metadata describing this sweep.
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "spec": self.spec.to_string(),
            "seed": self.seed,
            "timestamp": self.timestamp,
            "revision": self.revision,
            "rows": self.rows.len(),
        })
    }

    /// Parse rows previously written by [`SweepResult::write_csv`]. The
    /// model is not stored in the CSV, so the caller supplies it.
    pub fn from_csv(text: &str, spec: &NeighborhoodSpec) -> Result<SweepResult> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        if header.trim() != "L,p,trials,successes,p_hat,ci_low,ci_high,seed" {
            return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
        }
        let mut rows = Vec::new();
        for (no, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 8 {
                return Err(Error::Parse(format!(
                    "row {}: expected 8 fields, got {}",
                    no + 2,
                    fields.len()
                )));
            }
            let bad = |what: &str| Error::Parse(format!("row {}: bad {what}", no + 2));
            let l: usize = fields[0].trim().parse().map_err(|_| bad("L"))?;
            rows.push(SweepRow {
                l,
                estimate: SpanEstimate {
                    dims: Dims::cube(spec.rank(), l + 1)?,
                    p: fields[1].trim().parse().map_err(|_| bad("p"))?,
                    spec: *spec,
                    trials: fields[2].trim().parse().map_err(|_| bad("trials"))?,
                    successes: fields[3].trim().parse().map_err(|_| bad("successes"))?,
                    p_hat: fields[4].trim().parse().map_err(|_| bad("p_hat"))?,
                    ci_low: fields[5].trim().parse().map_err(|_| bad("ci_low"))?,
                    ci_high: fields[6].trim().parse().map_err(|_| bad("ci_high"))?,
                    seed: fields[7].trim().parse().map_err(|_| bad("seed"))?,
                },
            });
        }
        check_no_duplicate_keys(&rows)?;
        let (seed, trials) = rows
            .first()
            .map_or((0, 0), |r| (r.estimate.seed, r.estimate.trials));
        let revision = content_revision(spec, seed, trials, &rows);
        Ok(SweepResult { spec: *spec, rows, seed, timestamp: source_epoch(), revision })
    }
}

/// A least-squares line through threshold data on scaling-form axes.
#[derive(Clone, Copy, Debug)]
pub struct ScalingFit {
    pub form: ScalingForm,
    /// Fitted constant multiplying the scaling function.
    pub slope: f64,
    pub intercept: f64,
    /// Euclidean norm of the fit residuals.
    pub residual: f64,
    /// Range of the regressor f(1/p) over the data.
    pub x_range: (f64, f64),
    pub points: usize,
}

/// Fit ln L (2D) or ln ln L (3D) against the model's scaling function of
/// 1/p by least squares.
pub fn fit_scaling(sweep: &SweepResult, form: ScalingForm) -> Result<ScalingFit> {
    let (a, b) = (sweep.spec.radius(0), sweep.spec.radius(1));
    if ScalingForm::of(a, b) != form {
        return Err(Error::BadParameter(format!(
            "form {form} does not match the sweep's model {}",
            sweep.spec
        )));
    }
    if sweep.rows.len() < 3 {
        return Err(Error::BadParameter(format!(
            "scaling fit needs >= 3 rows, got {}",
            sweep.rows.len()
        )));
    }
    let deep = sweep.spec.rank() == 3;

    let mut xs = Vec::with_capacity(sweep.rows.len());
    let mut ys = Vec::with_capacity(sweep.rows.len());
    for row in &sweep.rows {
        if deep && row.l < 2 {
            return Err(Error::BadParameter(format!(
                "3D fits need box scale >= 2, got {}",
                row.l
            )));
        }
        xs.push(f_scaling(a, b, row.estimate.p)?);
        let ln_l = (row.l as f64).ln();
        ys.push(if deep { ln_l.ln() } else { ln_l });
    }

    let n = xs.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / n;
    let y_bar = ys.iter().sum::<f64>() / n;
    let var: f64 = xs.iter().map(|x| (x - x_bar).powi(2)).sum();
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_bar) * (y - y_bar)).sum();
    if var < 1e-12 * n * x_bar.powi(2).max(1.0) {
        return Err(Error::DegenerateFit(format!(
            "regressor is constant (all densities equal?): variance {var:e}"
        )));
    }
    let slope = cov / var;
    let intercept = y_bar - slope * x_bar;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum::<f64>()
        .sqrt();
    let x_min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(ScalingFit { form, slope, intercept, residual, x_range: (x_min, x_max), points: xs.len() })
}
