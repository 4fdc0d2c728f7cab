//! Synthetic operating points and the linear nadir surrogate.
//!
//! Sampling scheme (this crate's own): each snapshot draws a commitment with
//! unit on-probability growing with capacity, a demand level inside the
//! profile range minus a RES draw, a proportional-loading dispatch and
//! reserves as random fractions of headroom. Every committed unit then
//! yields one outage point, labelled with the closed-form nadir.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freq::{nadir_exact, NadirOutcome, OutageContext};
use crate::sysmodel::CaseInput;

/// Share of the dataset used for fitting.
pub const TRAIN_FRACTION: f64 = 0.7;

/// Labels are clipped here; insecure points also take this value.
pub const LABEL_CAP_HZ: f64 = 6.0;

const MAX_RETRIES: usize = 1000;

/// One labelled outage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    #[serde(rename = "lost_mw")]
    pub lost_power: f64,
    #[serde(rename = "inertia_mws")]
    pub inertia: f64,
    #[serde(rename = "reserve_mw")]
    pub reserve: f64,
    #[serde(rename = "demand_mw")]
    pub demand: f64,
    #[serde(rename = "nadir_hz")]
    pub label_nadir: f64,
}

impl SamplePoint {
    pub fn secure(&self, threshold: f64) -> bool {
        self.label_nadir <= threshold
    }

    pub fn features(&self) -> [f64; 4] {
        [1.0, self.lost_power, self.inertia, self.reserve]
    }
}

/// `a0 + a1 p + a2 H + a3 r`, in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NadirModel {
    pub alpha: [f64; 4],
    pub threshold: f64,
    /// Held-out agreement with the labels, in [0, 1].
    pub score: f64,
    pub seed: u64,
    pub train_fraction: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    alpha0: f64,
    alpha1: f64,
    alpha2: f64,
    alpha3: f64,
    threshold_hz: f64,
    score: f64,
    seed: u64,
    #[serde(default = "default_train_fraction")]
    train_fraction: f64,
}

fn default_train_fraction() -> f64 {
    TRAIN_FRACTION
}

impl NadirModel {
    pub fn predict(&self, p: &SamplePoint) -> f64 {
        self.alpha.iter().zip(p.features()).map(|(a, x)| a * x).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let [alpha0, alpha1, alpha2, alpha3] = self.alpha;
        Ok(serde_json::to_string_pretty(&ModelFile {
            alpha0,
            alpha1,
            alpha2,
            alpha3,
            threshold_hz: self.threshold,
            score: self.score,
            seed: self.seed,
            train_fraction: self.train_fraction,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(text)?;
        let model = NadirModel {
            alpha: [f.alpha0, f.alpha1, f.alpha2, f.alpha3],
            threshold: f.threshold_hz,
            score: f.score,
            seed: f.seed,
            train_fraction: f.train_fraction,
        };
        if !(model.threshold > 0.0) || !(0.0..=1.0).contains(&model.score) {
            return Err(Error::Learn("model file has an invalid threshold or score".into()));
        }
        if model.alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::Learn("model file has non-finite coefficients".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Closed-form label, clipped to [`LABEL_CAP_HZ`].
fn label(ctx: &OutageContext, case: &CaseInput) -> f64 {
    match nadir_exact(ctx, &case.params) {
        NadirOutcome::Arrested(v) => v.min(LABEL_CAP_HZ),
        NadirOutcome::Insecure => LABEL_CAP_HZ,
    }
}

/// Whether the outage satisfies the RoCoF and quasi-steady-state limits,
/// which every nadir-constrained schedule also carries.
fn within_rocof_qss(ctx: &OutageContext, case: &CaseInput) -> bool {
    let p = &case.params;
    ctx.lost_power <= 2.0 * p.rocof_limit / p.f0 * ctx.inertia
        && ctx.reserve >= ctx.lost_power - p.damping * ctx.demand * p.qss_limit
}

/// Splits `net` over units with limits `(p_min, p_max)`: every unit gets
/// `p_min` plus a share of the rest proportional to `weight * (p_max - p_min)`,
/// saturating units at `p_max` and passing their excess on.
fn load_proportionally(limits: &[(f64, f64)], weights: &[f64], net: f64) -> Vec<f64> {
    let mut out: Vec<f64> = limits.iter().map(|l| l.0).collect();
    let mut rest = net - out.iter().sum::<f64>();
    let mut open: Vec<usize> = (0..limits.len()).collect();
    while rest > 1e-12 && !open.is_empty() {
        let total: f64 = open.iter().map(|&i| weights[i].max(1e-9) * (limits[i].1 - limits[i].0)).sum();
        let mut next = Vec::new();
        let mut given = 0.0;
        for &i in &open {
            let share = rest * weights[i].max(1e-9) * (limits[i].1 - limits[i].0) / total;
            let room = limits[i].1 - out[i];
            if share >= room {
                out[i] = limits[i].1;
                given += room;
            } else {
                out[i] += share;
                given += share;
                next.push(i);
            }
        }
        rest -= given;
        if next.len() == open.len() {
            break;
        }
        open = next;
    }
    out
}

fn snapshot_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Outage points of one random operating snapshot.
fn snapshot(case: &CaseInput, seed: u64, index: u64) -> Result<Vec<SamplePoint>> {
    let mut rng = snapshot_rng(seed, index);
    let units = &case.units;
    let biggest = units.iter().map(|u| u.p_max).fold(0.0, f64::max);
    let (d_lo, d_hi) = (case.demand_samples.min(), case.demand_samples.max());
    let res_hi = case.res_samples.max().max(0.0);
    for _ in 0..MAX_RETRIES {
        let on: Vec<bool> = units
            .iter()
            .map(|u| rng.gen_bool((0.35 + 0.6 * u.p_max / biggest).min(1.0)))
            .collect();
        let demand = rng.gen_range(d_lo..=d_hi);
        let net = demand - rng.gen_range(0.0..=res_hi);
        let committed: Vec<usize> = (0..units.len()).filter(|&i| on[i]).collect();
        let lo: f64 = committed.iter().map(|&i| units[i].p_min).sum();
        let hi: f64 = committed.iter().map(|&i| units[i].p_max).sum();
        if committed.len() < 2 || net < lo || net > hi {
            continue;
        }
        let weights: Vec<f64> = committed.iter().map(|_| rng.gen::<f64>()).collect();
        let dispatch = load_proportionally(
            &committed.iter().map(|&i| (units[i].p_min, units[i].p_max)).collect::<Vec<_>>(),
            &weights,
            net,
        );
        let reserve: Vec<f64> = committed
            .iter()
            .zip(&dispatch)
            .map(|(&i, p)| rng.gen::<f64>() * (units[i].p_max - p))
            .collect();
        let total_hm: f64 = committed.iter().map(|&i| units[i].stored_energy()).sum();
        let total_r: f64 = reserve.iter().sum();
        let mut points = Vec::with_capacity(committed.len());
        for (k, &l) in committed.iter().enumerate() {
            let ctx = OutageContext {
                lost_unit: l,
                hour: 0,
                inertia: total_hm - units[l].stored_energy(),
                lost_power: dispatch[k],
                reserve: total_r - reserve[k],
                demand,
            };
            if ctx.inertia <= 0.0 || !within_rocof_qss(&ctx, case) {
                continue;
            }
            points.push(SamplePoint {
                lost_power: ctx.lost_power,
                inertia: ctx.inertia,
                reserve: ctx.reserve,
                demand,
                label_nadir: label(&ctx, case),
            });
        }
        return Ok(points);
    }
    Err(Error::Learn(format!(
        "snapshot {index}: no feasible draw after {MAX_RETRIES} attempts"
    )))
}

/// Exactly `n_samples` labelled points; fully determined by `(case, n_samples, seed)`.
pub fn generate_dataset(case: &CaseInput, n_samples: usize, seed: u64) -> Result<Vec<SamplePoint>> {
    let mut out = Vec::with_capacity(n_samples);
    let mut next = 0u64;
    while out.len() < n_samples {
        let batch = (n_samples - out.len()) as u64;
        let chunks = (next..next + batch)
            .into_par_iter()
            .map(|k| snapshot(case, seed, k))
            .collect::<Result<Vec<_>>>()?;
        next += batch;
        let before = out.len();
        out.extend(chunks.into_iter().flatten());
        if out.len() == before {
            return Err(Error::Learn(
                "no outage passes the RoCoF and QSS limits; the unit fleet cannot produce secure samples".into(),
            ));
        }
    }
    out.truncate(n_samples);
    Ok(out)
}

/// Stratified split by the label's side of `threshold`.
pub fn split_dataset(data: &[SamplePoint], threshold: f64, seed: u64) -> (Vec<SamplePoint>, Vec<SamplePoint>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut secure, mut insecure): (Vec<_>, Vec<_>) = data.iter().copied().partition(|p| p.secure(threshold));
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [&mut secure, &mut insecure] {
        class.shuffle(&mut rng);
        let cut = (class.len() as f64 * TRAIN_FRACTION).round() as usize;
        train.extend_from_slice(&class[..cut]);
        test.extend_from_slice(&class[cut..]);
    }
    (train, test)
}

/// Least-squares coefficients of `label ~ 1 + p + H + r`.
pub fn least_squares(points: &[SamplePoint]) -> Result<[f64; 4]> {
    if points.len() < 4 {
        return Err(Error::Learn(format!(
            "{} training points; at least 4 are needed, generate more samples",
            points.len()
        )));
    }
    // columns scaled to unit max so the rank test is meaningful
    let mut scale = [1.0f64; 4];
    for p in points {
        for (s, x) in scale.iter_mut().zip(p.features()) {
            *s = s.max(x.abs());
        }
    }
    let a = DMatrix::from_fn(points.len(), 4, |r, c| points[r].features()[c] / scale[c]);
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.label_nadir));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        return Err(Error::Learn(
            "design matrix is rank deficient; generate more varied samples".into(),
        ));
    }
    let x = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::Learn(format!("least squares failed: {e}")))?;
    Ok([x[0] / scale[0], x[1] / scale[1], x[2] / scale[2], x[3] / scale[3]])
}

/// Fraction of points where the surrogate and the label agree on the side of `threshold`.
pub fn score(model: &NadirModel, test: &[SamplePoint], threshold: f64) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::Learn("empty test set".into()));
    }
    let agree = test
        .iter()
        .filter(|p| (model.predict(p) <= threshold) == p.secure(threshold))
        .count();
    Ok(agree as f64 / test.len() as f64)
}

/// How the regression is fitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Regress only on training points whose label lies in
    /// `[lo * threshold, hi * threshold]`, when enough of them exist.
    pub band: Option<(f64, f64)>,
    /// Raise `a0` until no insecure training point is predicted secure.
    pub conservative: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            band: Some((0.5, 2.0)),
            conservative: true,
        }
    }
}

impl FitOptions {
    /// Plain least squares on the whole training split.
    pub fn plain() -> Self {
        Self {
            band: None,
            conservative: false,
        }
    }
}

/// Fewest in-band points for a banded fit; below this the whole split is used.
const MIN_BAND_POINTS: usize = 50;

/// Fits on the training split and scores on the held-out split, with the
/// default [`FitOptions`].
pub fn fit_linear(data: &[SamplePoint], threshold: f64, seed: u64) -> Result<NadirModel> {
    fit_linear_with(data, threshold, seed, FitOptions::default())
}

pub fn fit_linear_with(data: &[SamplePoint], threshold: f64, seed: u64, opts: FitOptions) -> Result<NadirModel> {
    if !(threshold > 0.0) {
        return Err(Error::Learn(format!("threshold must be positive (got {threshold})")));
    }
    let (train, test) = split_dataset(data, threshold, seed);
    let banded: Vec<SamplePoint> = match opts.band {
        Some((lo, hi)) => train
            .iter()
            .filter(|p| (lo * threshold..=hi * threshold).contains(&p.label_nadir))
            .copied()
            .collect(),
        None => Vec::new(),
    };
    let mut alpha = match least_squares(&banded) {
        Ok(a) if banded.len() >= MIN_BAND_POINTS => a,
        _ => least_squares(&train)?,
    };
    if opts.conservative {
        let probe = NadirModel {
            alpha,
            threshold,
            score: 0.0,
            seed,
            train_fraction: TRAIN_FRACTION,
        };
        let lift = train
            .iter()
            .filter(|p| !p.secure(threshold))
            .map(|p| threshold - probe.predict(p))
            .fold(f64::NEG_INFINITY, f64::max);
        if lift >= 0.0 {
            // strictly above the threshold afterwards
            alpha[0] += lift + 1e-9 * threshold.max(1.0);
        }
    }
    let mut model = NadirModel {
        alpha,
        threshold,
        score: 0.0,
        seed,
        train_fraction: TRAIN_FRACTION,
    };
    model.score = score(&model, &test, threshold)?;
    Ok(model)
}

pub fn write_dataset_csv(path: impl AsRef<Path>, data: &[SamplePoint]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for p in data {
        w.serialize(p)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_dataset_csv(path: impl AsRef<Path>) -> Result<Vec<SamplePoint>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
