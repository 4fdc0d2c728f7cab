//! Bernstein-form polynomials on hourly segments.
//!
//! A [`BernsteinSegment`] of degree `n` lives on the hour `[t, t+1)` and is
//! parameterised by the local time `tau` in `[0, 1]`. Its `n + 1` coefficients
//! bound the curve (convex hull property) and interpolate it at both ends,
//! which is what lets the scheduling model impose limits coefficient-wise.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Working degree of power, reserve, demand and RES trajectories.
pub const WORKING_DEGREE: usize = 3;

/// Binomial coefficient as a float. Exact for every degree used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    acc.round()
}

/// The Bernstein basis function `C(n,b) tau^b (1-tau)^(n-b)`.
pub fn basis_eval(b: usize, n: usize, tau: f64) -> Result<f64> {
    if b > n {
        return Err(Error::Domain(format!("basis index {b} exceeds degree {n}")));
    }
    check_tau(tau)?;
    Ok(binomial(n, b) * tau.powi(b as i32) * (1.0 - tau).powi((n - b) as i32))
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::Domain(format!("tau = {tau} outside [0, 1]")))
    }
}

/// A polynomial on one hourly interval, stored by its Bernstein coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinSegment {
    coeffs: Vec<f64>,
    hour: usize,
}

impl BernsteinSegment {
    /// Segment on hour `hour` with the given control values.
    pub fn new(hour: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("a segment needs at least one coefficient".into()));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite coefficient {bad}")));
        }
        Ok(Self { coeffs, hour })
    }

    /// Constant segment of the given degree.
    pub fn constant(hour: usize, degree: usize, value: f64) -> Result<Self> {
        Self::new(hour, vec![value; degree + 1])
    }

    pub fn zero(hour: usize, degree: usize) -> Self {
        Self {
            coeffs: vec![0.0; degree + 1],
            hour,
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Index of the hour this segment covers.
    pub fn hour(&self) -> usize {
        self.hour
    }

    pub fn first(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn last(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    /// Value at local time `tau`.
    pub fn eval(&self, tau: f64) -> Result<f64> {
        check_tau(tau)?;
        Ok(self.value_at(tau))
    }

    /// de Casteljau evaluation; `tau` is assumed to lie in `[0, 1]`.
    pub(crate) fn value_at(&self, tau: f64) -> f64 {
        let n = self.degree();
        if n == 0 {
            return self.coeffs[0];
        }
        let mut work = self.coeffs.clone();
        let s = 1.0 - tau;
        for level in 1..=n {
            for b in 0..=(n - level) {
                work[b] = s * work[b] + tau * work[b + 1];
            }
        }
        work[0]
    }

    /// Derivative with respect to `tau` (per hour for an hourly span).
    ///
    /// A degree-0 segment yields the degree-0 zero segment.
    pub fn derivative(&self) -> Self {
        let n = self.degree();
        if n == 0 {
            return Self::zero(self.hour, 0);
        }
        let coeffs = self
            .coeffs
            .windows(2)
            .map(|w| n as f64 * (w[1] - w[0]))
            .collect();
        Self {
            coeffs,
            hour: self.hour,
        }
    }

    /// Equivalent segment of a higher degree.
    pub fn elevate(&self, target_degree: usize) -> Result<Self> {
        let n = self.degree();
        if target_degree < n {
            return Err(Error::Domain(format!(
                "cannot elevate degree {n} down to {target_degree}"
            )));
        }
        let mut coeffs = self.coeffs.clone();
        for cur in n..target_degree {
            // one step: degree cur -> cur + 1
            let m = (cur + 1) as f64;
            let mut next = Vec::with_capacity(cur + 2);
            next.push(coeffs[0]);
            for b in 1..=cur {
                let w = b as f64 / m;
                next.push(w * coeffs[b - 1] + (1.0 - w) * coeffs[b]);
            }
            next.push(coeffs[cur]);
            coeffs = next;
        }
        Ok(Self {
            coeffs,
            hour: self.hour,
        })
    }

    fn same_span(&self, other: &Self) -> Result<()> {
        if self.hour == other.hour {
            Ok(())
        } else {
            Err(Error::SpanMismatch {
                left: self.hour,
                right: other.hour,
            })
        }
    }

    /// Product of two segments on the same hour; degree is the sum of degrees.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same_span(other)?;
        let n = self.degree();
        let m = other.degree();
        let coeffs = (0..=n + m)
            .map(|k| {
                let lo = k.saturating_sub(m);
                let hi = n.min(k);
                let denom = binomial(n + m, k);
                (lo..=hi)
                    .map(|j| {
                        binomial(n, j) * binomial(m, k - j) / denom
                            * self.coeffs[j]
                            * other.coeffs[k - j]
                    })
                    .sum()
            })
            .collect();
        Ok(Self {
            coeffs,
            hour: self.hour,
        })
    }

    fn combine(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_span(other)?;
        let degree = self.degree().max(other.degree());
        let a = self.elevate(degree)?;
        let b = other.elevate(degree)?;
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| op(*x, *y))
            .collect();
        Ok(Self {
            coeffs,
            hour: self.hour,
        })
    }

    /// Sum, elevating the lower-degree operand first.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |x, y| x + y)
    }

    /// Difference, elevating the lower-degree operand first.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |x, y| x - y)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            hour: self.hour,
        }
    }

    /// `(min coefficient, max coefficient)`; the curve never leaves this range.
    pub fn coeff_bounds(&self) -> (f64, f64) {
        self.coeffs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
                (lo.min(c), hi.max(c))
            })
    }

    /// Exact integral over the one-hour span (MWh when coefficients are MW).
    pub fn integral(&self) -> f64 {
        self.integral_over(1.0)
    }

    /// Exact integral when the span has length `dt`.
    pub fn integral_over(&self, dt: f64) -> f64 {
        dt * self.coeffs.iter().sum::<f64>() / self.coeffs.len() as f64
    }
}

/// Fixed start of a fitted segment, used to chain hourly fits continuously.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitAnchor {
    /// Value at `tau = 0`.
    pub value: f64,
    /// Derivative at `tau = 0` (per hour); `None` leaves the slope free.
    pub slope: Option<f64>,
}

/// Least-squares fit of `samples = [(tau, value)]` by a degree-`degree` segment.
///
/// With an anchor, the first coefficient (and, if the slope is given, the
/// second) are fixed and eliminated from the normal equations.
pub fn fit_segment(
    hour: usize,
    samples: &[(f64, f64)],
    degree: usize,
    anchor: Option<FitAnchor>,
) -> Result<BernsteinSegment> {
    let fit_err = |reason: String| Error::Fit {
        hour: Some(hour),
        reason,
    };
    if samples.len() < degree + 1 {
        return Err(fit_err(format!(
            "underdetermined: {} samples for degree {degree}",
            samples.len()
        )));
    }
    for &(tau, v) in samples {
        check_tau(tau).map_err(|e| fit_err(e.to_string()))?;
        if !v.is_finite() {
            return Err(fit_err(format!("non-finite sample value {v}")));
        }
    }

    let mut fixed = vec![None; degree + 1];
    if let Some(a) = anchor {
        fixed[0] = Some(a.value);
        if let Some(slope) = a.slope {
            if degree == 0 {
                return Err(fit_err("slope anchor needs degree >= 1".into()));
            }
            fixed[1] = Some(a.value + slope / degree as f64);
        }
    }
    let free: Vec<usize> = (0..=degree).filter(|b| fixed[*b].is_none()).collect();

    // Rank of the free basis columns equals the number of distinct usable taus.
    let mut taus: Vec<f64> = samples
        .iter()
        .map(|s| s.0)
        .filter(|&t| anchor.is_none() || t > 0.0)
        .collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    if taus.len() < free.len() {
        return Err(fit_err(format!(
            "rank deficient: {} distinct sample times for {} free coefficients",
            taus.len(),
            free.len()
        )));
    }

    let mut coeffs: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
    if !free.is_empty() {
        let rows = samples.len();
        let mut a = DMatrix::<f64>::zeros(rows, free.len());
        let mut y = DVector::<f64>::zeros(rows);
        for (r, &(tau, v)) in samples.iter().enumerate() {
            let mut rhs = v;
            for b in 0..=degree {
                let basis = basis_eval(b, degree, tau)?;
                match fixed[b] {
                    Some(c) => rhs -= c * basis,
                    None => {
                        let col = free.iter().position(|f| *f == b).unwrap();
                        a[(r, col)] = basis;
                    }
                }
            }
            y[r] = rhs;
        }
        // SVD keeps the accuracy that normal equations would square away
        let sol = a
            .svd(true, true)
            .solve(&y, 0.0)
            .map_err(|e| fit_err(format!("least squares failed: {e}")))?;
        for (k, &b) in free.iter().enumerate() {
            coeffs[b] = sol[k];
        }
    }
    BernsteinSegment::new(hour, coeffs).map_err(|e| fit_err(e.to_string()))
}

/// Hour-contiguous sequence of segments covering a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseBernstein {
    segments: Vec<BernsteinSegment>,
}

impl PiecewiseBernstein {
    /// Segments must cover hours `0, 1, ...` in order.
    pub fn new(segments: Vec<BernsteinSegment>) -> Result<Self> {
        for (t, s) in segments.iter().enumerate() {
            if s.hour() != t {
                return Err(Error::Domain(format!(
                    "segment {t} covers hour {} (expected {t})",
                    s.hour()
                )));
            }
        }
        Ok(Self { segments })
    }

    /// Builds segments from per-hour coefficient lists.
    pub fn from_coeffs(per_hour: Vec<Vec<f64>>) -> Result<Self> {
        let segments = per_hour
            .into_iter()
            .enumerate()
            .map(|(t, c)| BernsteinSegment::new(t, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { segments })
    }

    pub fn zeros(horizon: usize, degree: usize) -> Self {
        Self {
            segments: (0..horizon).map(|t| BernsteinSegment::zero(t, degree)).collect(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.segments.len()
    }

    pub fn segments(&self) -> &[BernsteinSegment] {
        &self.segments
    }

    pub fn segment(&self, hour: usize) -> &BernsteinSegment {
        &self.segments[hour]
    }

    /// Value at absolute time `time` hours; the horizon end maps to the last segment.
    pub fn eval_time(&self, time: f64) -> Result<f64> {
        let horizon = self.horizon() as f64;
        if !(0.0..=horizon).contains(&time) {
            return Err(Error::Domain(format!("time {time} outside [0, {horizon}]")));
        }
        let hour = (time.floor() as usize).min(self.horizon() - 1);
        self.segments[hour].eval(time - hour as f64)
    }

    /// Value jump at each internal boundary `t` (index `t - 1`, for t >= 1).
    pub fn c0_residuals(&self) -> Vec<f64> {
        self.segments
            .windows(2)
            .map(|w| w[1].first() - w[0].last())
            .collect()
    }

    /// Derivative jump (per hour) at each internal boundary.
    pub fn c1_residuals(&self) -> Vec<f64> {
        self.segments
            .windows(2)
            .map(|w| start_slope(&w[1]) - end_slope(&w[0]))
            .collect()
    }

    pub fn is_c0_continuous(&self, tol: f64) -> bool {
        self.c0_residuals().iter().all(|r| r.abs() <= tol)
    }

    pub fn is_c1_continuous(&self, tol: f64) -> bool {
        self.c1_residuals().iter().all(|r| r.abs() <= tol)
    }
}

/// Derivative at `tau = 0`.
pub fn start_slope(seg: &BernsteinSegment) -> f64 {
    let c = seg.coeffs();
    if c.len() < 2 {
        0.0
    } else {
        seg.degree() as f64 * (c[1] - c[0])
    }
}

/// Derivative at `tau = 1`.
pub fn end_slope(seg: &BernsteinSegment) -> f64 {
    let c = seg.coeffs();
    let n = c.len();
    if n < 2 {
        0.0
    } else {
        seg.degree() as f64 * (c[n - 1] - c[n - 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(c: &[f64]) -> BernsteinSegment {
        BernsteinSegment::new(0, c.to_vec()).unwrap()
    }

    #[test]
    fn basis_values() {
        assert_eq!(basis_eval(0, 3, 0.0).unwrap(), 1.0);
        assert!((basis_eval(1, 3, 0.5).unwrap() - 0.375).abs() < 1e-15);
        let sum: f64 = (0..=3).map(|b| basis_eval(b, 3, 0.7).unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn basis_domain_errors() {
        assert!(basis_eval(4, 3, 0.5).is_err());
        assert!(basis_eval(1, 3, -0.1).is_err());
        assert!(basis_eval(1, 3, 1.5).is_err());
    }

    #[test]
    fn eval_examples() {
        let c = 2.5;
        for tau in [0.0, 0.3, 1.0] {
            assert!((seg(&[c, c, c, c]).eval(tau).unwrap() - c).abs() < 1e-15);
        }
        assert!((seg(&[0.0, 1.0, 2.0, 3.0]).eval(0.5).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(seg(&[1.0, 5.0, 2.0, 4.0]).eval(0.0).unwrap(), 1.0);
        assert_eq!(seg(&[1.0, 5.0, 2.0, 4.0]).eval(1.0).unwrap(), 4.0);
        assert!(seg(&[1.0]).eval(1.01).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(seg(&[0.0, 1.0, 2.0, 3.0]).derivative().coeffs(), &[3.0, 3.0, 3.0]);
        assert_eq!(seg(&[4.0; 4]).derivative().coeffs(), &[0.0, 0.0, 0.0]);
        let d0 = seg(&[7.0]).derivative();
        assert_eq!(d0.degree(), 0);
        assert_eq!(d0.coeffs(), &[0.0]);
    }

    #[test]
    fn elevate_examples() {
        assert_eq!(seg(&[0.0, 1.0]).elevate(2).unwrap().coeffs(), &[0.0, 0.5, 1.0]);
        assert_eq!(seg(&[3.0, 3.0]).elevate(2).unwrap().coeffs(), &[3.0, 3.0, 3.0]);
        assert!(seg(&[0.0, 1.0, 2.0]).elevate(1).is_err());
    }

    #[test]
    fn multiply_examples() {
        let sq = seg(&[0.0, 1.0]).multiply(&seg(&[0.0, 1.0])).unwrap();
        assert_eq!(sq.coeffs(), &[0.0, 0.0, 1.0]);
        let p = seg(&[1.0, -2.0, 0.5, 4.0]);
        let prod = seg(&[2.0; 4]).multiply(&p).unwrap();
        let expected = p.scale(2.0).elevate(6).unwrap();
        for (a, b) in prod.coeffs().iter().zip(expected.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
        let other_hour = BernsteinSegment::new(3, vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            p.multiply(&other_hour),
            Err(Error::SpanMismatch { left: 0, right: 3 })
        ));
    }

    #[test]
    fn add_sub_examples() {
        let s = seg(&[1.0, 2.0, 3.0, 4.0]).add(&seg(&[1.0; 4])).unwrap();
        assert_eq!(s.coeffs(), &[2.0, 3.0, 4.0, 5.0]);
        let p = seg(&[1.0, 5.0, 2.0, 4.0]);
        assert!(p.sub(&p).unwrap().coeffs().iter().all(|c| *c == 0.0));
        // tau + tau^2
        let mixed = seg(&[0.0, 1.0]).add(&seg(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(mixed.coeffs(), &[0.0, 0.5, 2.0]);
        for k in 0..=10 {
            let tau = k as f64 / 10.0;
            assert!((mixed.eval(tau).unwrap() - (tau + tau * tau)).abs() < 1e-14);
        }
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(seg(&[1.0, 5.0, 2.0, 4.0]).coeff_bounds(), (1.0, 5.0));
        assert_eq!(seg(&[2.0; 4]).coeff_bounds(), (2.0, 2.0));
        let lin = seg(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(lin.coeff_bounds(), (0.0, 3.0));
        assert_eq!(lin.eval(0.0).unwrap(), 0.0);
        assert_eq!(lin.eval(1.0).unwrap(), 3.0);
        let p = seg(&[1.0, 5.0, 2.0, 4.0]);
        for k in 0..1000 {
            let v = p.eval(k as f64 / 999.0).unwrap();
            assert!((1.0..=5.0).contains(&v));
        }
    }

    #[test]
    fn integral_examples() {
        assert!((seg(&[2.0, 4.0, 4.0, 2.0]).integral() - 3.0).abs() < 1e-15);
        assert_eq!(seg(&[0.0; 4]).integral(), 0.0);
        assert!((seg(&[0.0, 0.0, 0.0, 4.0]).integral() - 1.0).abs() < 1e-15);
    }

    fn grid(n: usize, f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..=n)
            .map(|k| {
                let tau = k as f64 / n as f64;
                (tau, f(tau))
            })
            .collect()
    }

    #[test]
    fn fit_exact_cubic() {
        let s = fit_segment(0, &grid(12, |t| 3.0 * t.powi(3)), 3, None).unwrap();
        for (c, e) in s.coeffs().iter().zip([0.0, 0.0, 0.0, 3.0]) {
            assert!((c - e).abs() < 1e-9, "{:?}", s.coeffs());
        }
    }

    #[test]
    fn fit_constant() {
        let s = fit_segment(0, &grid(12, |_| 7.0), 3, None).unwrap();
        for c in s.coeffs() {
            assert!((c - 7.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fit_with_anchor_keeps_start() {
        let anchor = FitAnchor {
            value: 1.0,
            slope: Some(0.6),
        };
        let s = fit_segment(2, &grid(12, |t| 1.0 + 0.6 * t + t * t), 3, Some(anchor)).unwrap();
        assert_eq!(s.coeffs()[0], 1.0);
        assert!((start_slope(&s) - 0.6).abs() < 1e-12);
        // target is exactly cubic, so the anchored fit is still exact
        for k in 0..=20 {
            let tau = k as f64 / 20.0;
            assert!((s.eval(tau).unwrap() - (1.0 + 0.6 * tau + tau * tau)).abs() < 1e-9);
        }
    }

    #[test]
    fn fit_errors() {
        let err = fit_segment(4, &grid(2, |t| t), 3, None).unwrap_err();
        assert!(matches!(err, Error::Fit { hour: Some(4), .. }));
        // enough samples but only two distinct times
        let dup = vec![(0.0, 1.0), (0.0, 1.0), (1.0, 2.0), (1.0, 2.0)];
        let err = fit_segment(5, &dup, 3, None).unwrap_err();
        assert!(err.to_string().contains("hour 5"), "{err}");
        assert!(err.to_string().contains("rank deficient"));
    }

    #[test]
    fn piecewise_residuals() {
        let pw = PiecewiseBernstein::from_coeffs(vec![
            vec![0.0, 1.0, 2.0, 3.0],
            vec![3.0, 4.0, 4.0, 4.0],
        ])
        .unwrap();
        assert_eq!(pw.c0_residuals(), vec![0.0]);
        assert_eq!(pw.c1_residuals(), vec![0.0]);
        assert!((pw.eval_time(1.0).unwrap() - 3.0).abs() < 1e-15);
        assert!((pw.eval_time(2.0).unwrap() - 4.0).abs() < 1e-15);
        assert!(pw.eval_time(2.5).is_err());
        let bad = vec![BernsteinSegment::zero(1, 3)];
        assert!(PiecewiseBernstein::new(bad).is_err());
    }
}
