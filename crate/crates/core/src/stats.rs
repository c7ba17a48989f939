//! Empirical distributions and the hypothesis tests used by the experiments.
//!
//! All p-values are asymptotic; sample sizes in this crate are at least in
//! the thousands.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Sorted sample with an optional right-censoring point.
///
/// Censored observations are known only to exceed `t_max`; they count in
/// the total `n` but never enter the sorted values.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
    censored: usize,
    t_max: Option<f64>,
}

impl EmpiricalCdf {
    /// Panics on NaN values.
    pub fn new(mut values: Vec<f64>) -> Self {
        assert!(values.iter().all(|v| !v.is_nan()), "NaN in sample");
        values.sort_by(f64::total_cmp);
        EmpiricalCdf {
            sorted: values,
            censored: 0,
            t_max: None,
        }
    }

    /// Sample right-censored at `t_max`: values above it are moved into the
    /// censored count.
    pub fn with_censoring(values: Vec<f64>, censored: usize, t_max: f64) -> Self {
        let mut e = Self::new(values);
        let keep = e.sorted.partition_point(|&v| v <= t_max);
        let extra = e.sorted.len() - keep;
        e.sorted.truncate(keep);
        e.censored = censored + extra;
        e.t_max = Some(t_max);
        e
    }

    pub fn n(&self) -> usize {
        self.sorted.len() + self.censored
    }

    pub fn censored(&self) -> usize {
        self.censored
    }

    pub fn t_max(&self) -> Option<f64> {
        self.t_max
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of the sample `≤ x`. Above `t_max` this is a lower bound.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.n() == 0 {
            return 0.0;
        }
        self.sorted.partition_point(|&v| v <= x) as f64 / self.n() as f64
    }

    pub fn is_empty(&self) -> bool {
        self.n() == 0
    }
}

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub n: usize,
    pub m: Option<usize>,
    pub p_value: f64,
    pub alpha: f64,
    pub pass: bool,
}

impl TestReport {
    fn new(test: &str, statistic: f64, n: usize, m: Option<usize>, p_value: f64, alpha: f64) -> Self {
        TestReport {
            test: test.to_string(),
            statistic,
            n,
            m,
            p_value,
            alpha,
            pass: p_value >= alpha,
        }
    }
}

/// Kolmogorov survival function `P(K > λ)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn kuiper_q(lambda: f64) -> f64 {
    if lambda < 0.4 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k2l2 = (k * k) as f64 * lambda * lambda;
        let term = (4.0 * k2l2 - 1.0) * (-2.0 * k2l2).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn stephens(n_eff: f64, d: f64) -> f64 {
    let r = n_eff.sqrt();
    (r + 0.12 + 0.11 / r) * d
}

/// One-sided gaps `(D⁺, D⁻)` between the sample and `cdf`, including the
/// gap at the censoring point.
fn one_sample_gaps<F: Fn(f64) -> f64>(sample: &EmpiricalCdf, cdf: &F) -> (f64, f64) {
    let n = sample.n() as f64;
    let mut d_plus: f64 = 0.0;
    let mut d_minus: f64 = 0.0;
    for (i, &x) in sample.sorted.iter().enumerate() {
        let f = cdf(x);
        d_plus = d_plus.max((i + 1) as f64 / n - f);
        d_minus = d_minus.max(f - i as f64 / n);
    }
    if let Some(t) = sample.t_max {
        // Just below t_max the ECDF is flat at the uncensored fraction.
        let f = cdf(t);
        let ecdf = sample.sorted.len() as f64 / n;
        d_plus = d_plus.max(ecdf - f);
        d_minus = d_minus.max(f - ecdf);
    }
    (d_plus, d_minus)
}

/// One-sample Kolmogorov–Smirnov test against a continuous reference CDF.
///
/// For a censored sample the supremum runs up to `t_max`; an excess of
/// censored mass over the reference tail shows up as the gap at `t_max`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &EmpiricalCdf, cdf: F, alpha: f64) -> Result<TestReport> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let (dp, dm) = one_sample_gaps(sample, &cdf);
    let d = dp.max(dm);
    let p = kolmogorov_q(stephens(sample.n() as f64, d));
    Ok(TestReport::new("ks_one_sample", d, sample.n(), None, p, alpha))
}

/// Two-sample Kolmogorov–Smirnov test. Censored observations act as
/// values beyond every uncensored one.
pub fn ks_two_sample(a: &EmpiricalCdf, b: &EmpiricalCdf, alpha: f64) -> Result<TestReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let (n, m) = (a.n() as f64, b.n() as f64);
    let (xs, ys) = (&a.sorted, &b.sorted);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() || j < ys.len() {
        let x = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = n * m / (n + m);
    let p = kolmogorov_q(stephens(ne, d));
    Ok(TestReport::new("ks_two_sample", d, a.n(), Some(b.n()), p, alpha))
}

/// Kuiper test `V = D⁺ + D⁻` against a reference CDF; the natural test for
/// circular data, where it does not depend on the choice of origin.
pub fn kuiper<F: Fn(f64) -> f64>(sample: &EmpiricalCdf, cdf: F, alpha: f64) -> Result<TestReport> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let (dp, dm) = one_sample_gaps(sample, &cdf);
    let v = dp + dm;
    let r = (sample.n() as f64).sqrt();
    let p = kuiper_q((r + 0.155 + 0.24 / r) * v);
    Ok(TestReport::new("kuiper", v, sample.n(), None, p, alpha))
}

/// Two-dimensional two-sample KS statistic (quadrant form) evaluated on a
/// `grid × grid` lattice of pooled marginal quantiles. The p-value uses the
/// Fasano–Franceschini approximation with the pooled correlation.
pub fn ks_2d_two_sample(a: &[(f64, f64)], b: &[(f64, f64)], grid: usize, alpha: f64) -> Result<TestReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    if grid < 2 {
        return Err(Error::InvalidParam("2d KS grid needs at least 2 points".into()));
    }
    let quantiles = |pick: fn(&(f64, f64)) -> f64| {
        let mut v: Vec<f64> = a.iter().chain(b.iter()).map(pick).collect();
        v.sort_by(f64::total_cmp);
        (1..grid)
            .map(|k| v[(k * (v.len() - 1)) / grid])
            .collect::<Vec<f64>>()
    };
    let xq = quantiles(|p| p.0);
    let yq = quantiles(|p| p.1);
    let cells = |pts: &[(f64, f64)]| {
        let g = grid;
        let mut c = vec![0usize; g * g];
        for &(x, y) in pts {
            let i = xq.partition_point(|&q| q < x);
            let j = yq.partition_point(|&q| q < y);
            c[i * g + j] += 1;
        }
        // Inclusive prefix sums: cum[i][j] = #{x-bin ≤ i, y-bin ≤ j}.
        let mut cum = vec![0usize; g * g];
        for i in 0..g {
            let mut row = 0;
            for j in 0..g {
                row += c[i * g + j];
                cum[i * g + j] = row + if i > 0 { cum[(i - 1) * g + j] } else { 0 };
            }
        }
        cum
    };
    let (ca, cb) = (cells(a), cells(b));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let g = grid;
    let mut d: f64 = 0.0;
    for i in 0..g - 1 {
        for j in 0..g - 1 {
            let q = |cum: &[usize], total: f64| {
                let ll = cum[i * g + j] as f64;
                let l = cum[i * g + g - 1] as f64;
                let lo = cum[(g - 1) * g + j] as f64;
                [ll, l - ll, lo - ll, total - l - lo + ll].map(|v| v / total)
            };
            let (qa, qb) = (q(&ca, n), q(&cb, m));
            for k in 0..4 {
                d = d.max((qa[k] - qb[k]).abs());
            }
        }
    }
    let r = pooled_correlation(a, b);
    let ne = n * m / (n + m);
    let sq = ne.sqrt();
    let lambda = sq * d / (1.0 + (1.0 - r * r).max(0.0).sqrt() * (0.25 - 0.75 / sq));
    let p = kolmogorov_q(lambda);
    Ok(TestReport::new("ks_2d_two_sample", d, a.len(), Some(b.len()), p, alpha))
}

fn pooled_correlation(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let all = a.iter().chain(b.iter());
    let n = (a.len() + b.len()) as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(x, y) in all.clone() {
        sx += x;
        sy += y;
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut cxy, mut cxx, mut cyy) = (0.0, 0.0, 0.0);
    for &(x, y) in all {
        cxy += (x - mx) * (y - my);
        cxx += (x - mx) * (x - mx);
        cyy += (y - my) * (y - my);
    }
    if cxx == 0.0 || cyy == 0.0 {
        0.0
    } else {
        cxy / (cxx * cyy).sqrt()
    }
}

/// Rectangular partition `xs × ys` by cell edges.
#[derive(Debug, Clone)]
pub struct Partition2d {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Partition2d {
    pub fn uniform(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Self {
        let edges = |(lo, hi): (f64, f64), k: usize| (0..=k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect();
        Partition2d {
            xs: edges(x, nx),
            ys: edges(y, ny),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |e: &[f64]| e.len() >= 2 && e.windows(2).all(|w| w[1] > w[0]);
        if ok(&self.xs) && ok(&self.ys) {
            Ok(())
        } else {
            Err(Error::DegeneratePartition("edges must be strictly increasing, at least one cell per axis".into()))
        }
    }

    fn locate(edges: &[f64], v: f64) -> Option<usize> {
        if v < edges[0] || v >= edges[edges.len() - 1] {
            return None;
        }
        Some(edges.partition_point(|&e| e <= v) - 1)
    }
}

/// Pearson chi-square goodness of fit on a rectangular partition.
///
/// `cell_mass(x0, x1, y0, y1)` gives the reference probability of a cell.
/// Cells are visited row-major and consecutive cells are merged until the
/// expected count reaches 5; mass outside the partition forms one extra
/// cell.
pub fn chi_square_2d<M>(samples: &[(f64, f64)], cell_mass: M, partition: &Partition2d, alpha: f64) -> Result<TestReport>
where
    M: Fn(f64, f64, f64, f64) -> f64,
{
    partition.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let (nx, ny) = (partition.xs.len() - 1, partition.ys.len() - 1);
    let mut observed = vec![0usize; nx * ny];
    let mut outside = 0usize;
    for &(x, y) in samples {
        match (Partition2d::locate(&partition.xs, x), Partition2d::locate(&partition.ys, y)) {
            (Some(i), Some(j)) => observed[i * ny + j] += 1,
            _ => outside += 1,
        }
    }
    let n = samples.len() as f64;
    let mut expected = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            let p = cell_mass(partition.xs[i], partition.xs[i + 1], partition.ys[j], partition.ys[j + 1]);
            expected.push(p * n);
        }
    }
    let inside: f64 = expected.iter().sum();
    let mut groups: Vec<(f64, f64)> = Vec::new();
    let (mut acc_e, mut acc_o) = (0.0, 0.0);
    for (e, &o) in expected.iter().zip(&observed) {
        acc_e += e;
        acc_o += o as f64;
        if acc_e >= 5.0 {
            groups.push((acc_o, acc_e));
            acc_e = 0.0;
            acc_o = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        match groups.last_mut() {
            Some(last) => {
                last.0 += acc_o;
                last.1 += acc_e;
            }
            None => groups.push((acc_o, acc_e)),
        }
    }
    let out_e = (n - inside).max(0.0);
    if out_e >= 5.0 {
        groups.push((outside as f64, out_e));
    } else if outside > 0 || out_e > 0.0 {
        if let Some(last) = groups.last_mut() {
            last.0 += outside as f64;
            last.1 += out_e;
        }
    }
    if groups.len() < 2 {
        return Err(Error::DegeneratePartition(format!(
            "only {} cell(s) with expected count >= 5",
            groups.len()
        )));
    }
    let stat: f64 = groups
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e) * (o - e) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .sum();
    let df = (groups.len() - 1) as f64;
    let dist = ChiSquared::new(df).map_err(|e| Error::InvalidParam(e.to_string()))?;
    let p = if stat.is_finite() { 1.0 - dist.cdf(stat) } else { 0.0 };
    Ok(TestReport::new("chi_square_2d", stat, samples.len(), Some(groups.len()), p, alpha))
}

/// Per-cell detail of [`memory_two_test`].
#[derive(Debug, Clone, Serialize)]
pub struct MemoryCell {
    pub u_bin: usize,
    pub v_bin: usize,
    pub count: usize,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MemoryTestReport {
    pub report: TestReport,
    pub cells: Vec<MemoryCell>,
    /// Cells skipped for having fewer than `min_count` chains.
    pub underpopulated: usize,
}

/// Conditional-independence test of the memory-two property.
///
/// Each item holds the first four segments of a path. Paths are binned by
/// quantiles of `(Ŝ₃·Ŝ₂, Ŝ₂·Ŝ₁)` into `bins × bins` cells; inside each cell
/// the paths are split at the median of `‖S₁‖` and the two halves' `‖S₄‖`
/// samples are compared by two-sample KS. The joint verdict is Bonferroni
/// corrected over the populated cells.
pub fn memory_two_test(segments: &[[Vec2; 4]], bins: usize, min_count: usize, alpha: f64) -> Result<MemoryTestReport> {
    if segments.is_empty() {
        return Err(Error::EmptySample);
    }
    if bins == 0 {
        return Err(Error::DegeneratePartition("memory test needs at least one bin".into()));
    }
    let unit = |v: &Vec2| v / v.norm();
    let keys: Vec<(f64, f64)> = segments
        .iter()
        .map(|s| (unit(&s[2]).dot(&unit(&s[1])), unit(&s[1]).dot(&unit(&s[0]))))
        .collect();
    let edges = |pick: fn(&(f64, f64)) -> f64| {
        let mut v: Vec<f64> = keys.iter().map(pick).collect();
        v.sort_by(f64::total_cmp);
        (1..bins).map(|k| v[k * v.len() / bins]).collect::<Vec<f64>>()
    };
    let ue = edges(|k| k.0);
    let ve = edges(|k| k.1);
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); bins * bins];
    for (idx, k) in keys.iter().enumerate() {
        let i = ue.partition_point(|&e| e <= k.0);
        let j = ve.partition_point(|&e| e <= k.1);
        cells[i * bins + j].push(idx);
    }
    let mut out = Vec::new();
    let mut underpopulated = 0;
    for (c, members) in cells.iter().enumerate() {
        if members.len() < min_count {
            underpopulated += 1;
            continue;
        }
        let mut by_first: Vec<(f64, f64)> = members
            .iter()
            .map(|&i| (segments[i][0].norm(), segments[i][3].norm()))
            .collect();
        by_first.sort_by(|a, b| a.0.total_cmp(&b.0));
        let half = by_first.len() / 2;
        let lo = EmpiricalCdf::new(by_first[..half].iter().map(|p| p.1).collect());
        let hi = EmpiricalCdf::new(by_first[half..].iter().map(|p| p.1).collect());
        let r = ks_two_sample(&lo, &hi, alpha)?;
        out.push(MemoryCell {
            u_bin: c / bins,
            v_bin: c % bins,
            count: members.len(),
            statistic: r.statistic,
            p_value: r.p_value,
        });
    }
    if out.is_empty() {
        return Err(Error::DegeneratePartition(format!(
            "no cell reaches {min_count} paths ({} paths, {} cells)",
            segments.len(),
            bins * bins
        )));
    }
    let k = out.len() as f64;
    let min_p = out.iter().map(|c| c.p_value).fold(1.0, f64::min);
    let max_d = out.iter().map(|c| c.statistic).fold(0.0, f64::max);
    let report = TestReport::new("memory_two", max_d, segments.len(), Some(out.len()), (min_p * k).min(1.0), alpha);
    Ok(MemoryTestReport {
        report,
        cells: out,
        underpopulated,
    })
}

/// Binomial proportion with its standard error.
pub fn proportion(hits: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// A Monte Carlo probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub p: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_hits(hits: usize, n: usize) -> Self {
        let (p, stderr) = proportion(hits, n);
        Estimate { p, stderr, n }
    }

    /// `|p − other.p|` in units of the combined standard error.
    pub fn z_distance(&self, other: &Estimate) -> f64 {
        let se = (self.stderr.powi(2) + other.stderr.powi(2)).sqrt();
        let d = (self.p - other.p).abs();
        if se > 0.0 {
            d / se
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}
