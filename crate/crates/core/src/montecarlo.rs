//! Monte Carlo estimates of outage, SINR cdfs, ergodic rates and the
//! FD-over-HD gain.
//!
//! Trial `i` draws from `RngStream::new(seed, i)`, so an estimate depends
//! only on `(scenario, n, seed)`. Trials run in fixed-size blocks on a rayon
//! pool and the block summaries are merged in block order, which keeps the
//! result bit-identical for every worker count.

use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::geometry::{RngStream, StreamLabel, TopologySample, TopologySampler};
use crate::model::{dl_sinr, hd_instant_rates, ul_sinr, FadingDraw, HdCondition, Link, Scenario};
use crate::{Error, Result};

/// Trials per work unit.
const BLOCK: u64 = 4096;

/// Monte Carlo estimate of a mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithCI {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub std_err: f64,
    pub trials: u64,
    /// Trials whose cell held no DL user.
    pub empty_trials: u64,
}

impl EstimateWithCI {
    fn from_moments(n: u64, mean: f64, m2: f64, empty_trials: u64) -> Self {
        let var = if n > 1 { (m2 / (n - 1) as f64).max(0.0) } else { 0.0 };
        EstimateWithCI { mean, std_err: (var / n as f64).sqrt(), trials: n, empty_trials }
    }

    fn from_count(hits: u64, n: u64, empty_trials: u64) -> Self {
        let p = hits as f64 / n as f64;
        // Sum of squared deviations of a 0/1 sample.
        let m2 = hits as f64 * (1.0 - p) * (1.0 - p) + (n - hits) as f64 * p * p;
        Self::from_moments(n, p, m2, empty_trials)
    }
}

/// Which system an ergodic-rate estimate simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateMode {
    Fd,
    HdRc,
    HdAc,
}

impl RateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RateMode::Fd => "FD",
            RateMode::HdRc => "HD_RC",
            RateMode::HdAc => "HD_AC",
        }
    }
}

impl From<HdCondition> for RateMode {
    fn from(c: HdCondition) -> Self {
        match c {
            HdCondition::Rc => RateMode::HdRc,
            HdCondition::Ac => RateMode::HdAc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimates {
    pub dl: EstimateWithCI,
    pub ul: EstimateWithCI,
    pub sum: EstimateWithCI,
}

/// Running means and co-moments of a small vector statistic.
#[derive(Debug, Clone, PartialEq)]
struct Moments {
    n: u64,
    empty: u64,
    mean: Vec<f64>,
    /// Row-major `Σ (x_i − x̄)(x_j − x̄)`.
    comoment: Vec<f64>,
}

impl Moments {
    fn new(k: usize) -> Self {
        assert!(k <= 4, "at most four jointly tracked statistics");
        Moments { n: 0, empty: 0, mean: vec![0.0; k], comoment: vec![0.0; k * k] }
    }

    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn push(&mut self, x: &[f64], empty: bool) {
        let k = self.dim();
        self.n += 1;
        self.empty += u64::from(empty);
        let inv = 1.0 / self.n as f64;
        let mut before = [0.0; 4];
        for j in 0..k {
            before[j] = x[j] - self.mean[j];
            self.mean[j] += before[j] * inv;
        }
        for a in 0..k {
            let after = x[a] - self.mean[a];
            for b in 0..k {
                self.comoment[a * k + b] += after * before[b];
            }
        }
    }

    /// Chan et al. pairwise combination.
    fn merge(&mut self, o: &Moments) {
        if o.n == 0 {
            return;
        }
        let k = self.dim();
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        let delta: Vec<f64> = (0..k).map(|j| o.mean[j] - self.mean[j]).collect();
        for a in 0..k {
            for b in 0..k {
                self.comoment[a * k + b] += o.comoment[a * k + b] + delta[a] * delta[b] * na * nb / n;
            }
        }
        for j in 0..k {
            self.mean[j] += delta[j] * nb / n;
        }
        self.n += o.n;
        self.empty += o.empty;
    }

    fn estimate(&self, j: usize) -> EstimateWithCI {
        EstimateWithCI::from_moments(self.n, self.mean[j], self.comoment[j * self.dim() + j], self.empty)
    }

    fn covariance(&self, a: usize, b: usize) -> f64 {
        if self.n > 1 {
            self.comoment[a * self.dim() + b] / (self.n - 1) as f64
        } else {
            0.0
        }
    }
}

/// Hit counts below each grid point.
#[derive(Debug, Clone, PartialEq)]
struct Counts {
    n: u64,
    empty: u64,
    below: Vec<u64>,
}

/// Simulation driver; `threads = None` uses rayon's default pool size.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MonteCarlo {
    pub threads: Option<usize>,
}

impl MonteCarlo {
    pub fn with_threads(threads: usize) -> Self {
        MonteCarlo { threads: Some(threads) }
    }

    /// Runs `block(start, len)` over `[0, n)` and folds the results in order.
    fn run<T, F, M>(&self, n: u64, block: F, mut fold: M) -> Result<()>
    where
        T: Send,
        F: Fn(u64, u64) -> Result<T> + Sync,
        M: FnMut(T),
    {
        if n == 0 {
            return Err(Error::Validation { field: "trials", reason: "must be at least 1".into() });
        }
        let starts: Vec<u64> = (0..n.div_ceil(BLOCK)).map(|b| b * BLOCK).collect();
        let work =
            || -> Result<Vec<T>> { starts.par_iter().map(|&start| block(start, BLOCK.min(n - start))).collect() };
        let parts = match self.threads {
            None => work()?,
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::domain(format!("thread pool: {e}")))?
                .install(work)?,
        };
        parts.into_iter().for_each(&mut fold);
        Ok(())
    }

    /// Fraction of trials with link SINR below `gamma_th`; empty cells are
    /// outages.
    pub fn estimate_outage(
        &self,
        s: &Scenario,
        gamma_th: f64,
        link: Link,
        n: u64,
        seed: u64,
    ) -> Result<EstimateWithCI> {
        let curve = self.empirical_cdf(s, &[gamma_th], link, n, seed)?;
        Ok(curve[0])
    }

    /// Empirical SINR cdf at every grid point from one pass over the trials.
    /// The points share trials and are therefore correlated.
    pub fn estimate_cdf_curve(
        &self,
        s: &Scenario,
        z_grid: &[f64],
        link: Link,
        n: u64,
        seed: u64,
    ) -> Result<Vec<(f64, EstimateWithCI)>> {
        if z_grid.iter().any(|z| z.is_nan()) || z_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation { field: "z_grid", reason: "must be strictly increasing".into() });
        }
        let est = self.empirical_cdf(s, z_grid, link, n, seed)?;
        Ok(z_grid.iter().copied().zip(est).collect())
    }

    fn empirical_cdf(&self, s: &Scenario, grid: &[f64], link: Link, n: u64, seed: u64) -> Result<Vec<EstimateWithCI>> {
        let sampler = TopologySampler::new(s)?;
        check_link(s, link)?;
        let mut total = Counts { n: 0, empty: 0, below: vec![0; grid.len()] };
        self.run(
            n,
            |start, len| {
                let mut c = Counts { n: len, empty: 0, below: vec![0; grid.len()] };
                for i in start..start + len {
                    let stream = RngStream::new(seed, i);
                    let t = sampler.sample(&mut stream.rng(StreamLabel::Geometry), false);
                    if t.empty {
                        c.empty += 1;
                        c.below.iter_mut().for_each(|b| *b += 1);
                        continue;
                    }
                    let f = FadingDraw::sample(&mut stream.rng(StreamLabel::FadingFd), s.sigma_li);
                    let sinr = link_sinr(s, link, &t, &f)?;
                    for (b, &z) in c.below.iter_mut().zip(grid) {
                        *b += u64::from(sinr < z);
                    }
                }
                Ok(c)
            },
            |c| {
                total.n += c.n;
                total.empty += c.empty;
                total.below.iter_mut().zip(&c.below).for_each(|(a, b)| *a += b);
            },
        )?;
        Ok(total.below.iter().map(|&b| EstimateWithCI::from_count(b, total.n, total.empty)).collect())
    }

    /// Ergodic DL, UL and sum rates in bit/s/Hz; empty cells contribute 0.
    pub fn estimate_rates(&self, s: &Scenario, mode: RateMode, n: u64, seed: u64) -> Result<RateEstimates> {
        let sampler = TopologySampler::new(s)?;
        if mode == RateMode::Fd {
            check_link(s, Link::Dl)?;
        }
        let m = self.moments(n, 3, |start, len, acc| {
            for i in start..start + len {
                let stream = RngStream::new(seed, i);
                let t = sampler.sample(&mut stream.rng(StreamLabel::Geometry), false);
                if t.empty {
                    acc.push(&[0.0; 3], true);
                    continue;
                }
                let (dl, ul) = match mode {
                    RateMode::Fd => {
                        fd_rates(s, &t, &FadingDraw::sample(&mut stream.rng(StreamLabel::FadingFd), s.sigma_li))?
                    }
                    RateMode::HdRc | RateMode::HdAc => {
                        let f = FadingDraw::sample(&mut stream.rng(StreamLabel::FadingHd), s.sigma_li);
                        let cond = if mode == RateMode::HdRc { HdCondition::Rc } else { HdCondition::Ac };
                        hd_instant_rates(s, &t, &f, cond)?
                    }
                };
                acc.push(&[dl, ul, dl + ul], false);
            }
            Ok(())
        })?;
        Ok(RateEstimates { dl: m.estimate(0), ul: m.estimate(1), sum: m.estimate(2) })
    }

    /// Ergodic FD rate of a single link. Unlike [`Self::estimate_rates`]
    /// the uplink alone is defined when `d = 0`.
    pub fn estimate_link_rate(&self, s: &Scenario, link: Link, n: u64, seed: u64) -> Result<EstimateWithCI> {
        let sampler = TopologySampler::new(s)?;
        check_link(s, link)?;
        let m = self.moments(n, 1, |start, len, acc| {
            for i in start..start + len {
                let stream = RngStream::new(seed, i);
                let t = sampler.sample(&mut stream.rng(StreamLabel::Geometry), false);
                if t.empty {
                    acc.push(&[0.0], true);
                    continue;
                }
                let f = FadingDraw::sample(&mut stream.rng(StreamLabel::FadingFd), s.sigma_li);
                acc.push(&[log2_1p(link_sinr(s, link, &t, &f)?)], false);
            }
            Ok(())
        })?;
        Ok(m.estimate(0))
    }

    /// `(R_FD − R_HD)/R_FD` from FD and HD sum rates simulated on common
    /// topologies with independent fading. The standard error follows from
    /// the delta method for a ratio of means.
    pub fn estimate_gain(&self, s: &Scenario, condition: HdCondition, n: u64, seed: u64) -> Result<EstimateWithCI> {
        let sampler = TopologySampler::new(s)?;
        check_link(s, Link::Dl)?;
        let m = self.moments(n, 2, |start, len, acc| {
            for i in start..start + len {
                let stream = RngStream::new(seed, i);
                let t = sampler.sample(&mut stream.rng(StreamLabel::Geometry), false);
                if t.empty {
                    acc.push(&[0.0, 0.0], true);
                    continue;
                }
                let ff = FadingDraw::sample(&mut stream.rng(StreamLabel::FadingFd), s.sigma_li);
                let fh = FadingDraw::sample(&mut stream.rng(StreamLabel::FadingHd), s.sigma_li);
                let (fd_dl, fd_ul) = fd_rates(s, &t, &ff)?;
                let (hd_dl, hd_ul) = hd_instant_rates(s, &t, &fh, condition)?;
                acc.push(&[fd_dl + fd_ul, hd_dl + hd_ul], false);
            }
            Ok(())
        })?;
        ratio_gain(&m)
    }

    fn moments<F>(&self, n: u64, k: usize, block: F) -> Result<Moments>
    where
        F: Fn(u64, u64, &mut Moments) -> Result<()> + Sync,
    {
        let mut total = Moments::new(k);
        self.run(
            n,
            |start, len| {
                let mut acc = Moments::new(k);
                block(start, len, &mut acc)?;
                Ok(acc)
            },
            |part| total.merge(&part),
        )?;
        Ok(total)
    }
}

fn ratio_gain(m: &Moments) -> Result<EstimateWithCI> {
    let fd = m.estimate(0);
    if !(fd.mean.abs() > 3.0 * fd.std_err) {
        return Err(Error::Unstable(format!(
            "FD sum rate {} is within 3 standard errors ({}) of zero",
            fd.mean, fd.std_err
        )));
    }
    let hd_mean = m.mean[1];
    let r = hd_mean / fd.mean;
    let var = m.covariance(1, 1) - 2.0 * r * m.covariance(0, 1) + r * r * m.covariance(0, 0);
    let std_err = (var.max(0.0) / m.n as f64).sqrt() / fd.mean.abs();
    Ok(EstimateWithCI { mean: 1.0 - r, std_err, trials: m.n, empty_trials: m.empty })
}

fn check_link(s: &Scenario, link: Link) -> Result<()> {
    if link == Link::Dl && s.d_pair == 0.0 {
        return Err(Error::domain("DL SINR is undefined when the UL user sits on the DL user (d = 0)"));
    }
    Ok(())
}

fn link_sinr(s: &Scenario, link: Link, t: &TopologySample, f: &FadingDraw) -> Result<f64> {
    match link {
        Link::Dl => dl_sinr(s, t, f),
        Link::Ul => ul_sinr(s, t, f),
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

fn fd_rates(s: &Scenario, t: &TopologySample, f: &FadingDraw) -> Result<(f64, f64)> {
    Ok((log2_1p(dl_sinr(s, t, f)?), log2_1p(ul_sinr(s, t, f)?)))
}

/// [`MonteCarlo::estimate_outage`] on the default pool.
pub fn estimate_outage(s: &Scenario, gamma_th: f64, link: Link, n: u64, seed: u64) -> Result<EstimateWithCI> {
    MonteCarlo::default().estimate_outage(s, gamma_th, link, n, seed)
}

/// [`MonteCarlo::estimate_cdf_curve`] on the default pool.
pub fn estimate_cdf_curve(
    s: &Scenario,
    z_grid: &[f64],
    link: Link,
    n: u64,
    seed: u64,
) -> Result<Vec<(f64, EstimateWithCI)>> {
    MonteCarlo::default().estimate_cdf_curve(s, z_grid, link, n, seed)
}

/// [`MonteCarlo::estimate_rates`] on the default pool.
pub fn estimate_rates(s: &Scenario, mode: RateMode, n: u64, seed: u64) -> Result<RateEstimates> {
    MonteCarlo::default().estimate_rates(s, mode, n, seed)
}

/// [`MonteCarlo::estimate_gain`] on the default pool.
pub fn estimate_gain(s: &Scenario, condition: HdCondition, n: u64, seed: u64) -> Result<EstimateWithCI> {
    MonteCarlo::default().estimate_gain(s, condition, n, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{cdf_dl_general, EvalOptions};
    use crate::model::{HdPowerPolicy, ScenarioConfig};

    fn scenario(f: impl FnOnce(&mut ScenarioConfig)) -> Scenario {
        let mut c = ScenarioConfig::default();
        f(&mut c);
        c.validate().unwrap()
    }

    #[test]
    fn extreme_thresholds() {
        let s = scenario(|_| {});
        for link in [Link::Dl, Link::Ul] {
            assert!(estimate_outage(&s, 1e-12, link, 20_000, 1).unwrap().mean < 1e-3);
            assert!(estimate_outage(&s, 1e12, link, 20_000, 1).unwrap().mean > 0.999);
        }
        let curve = estimate_cdf_curve(&s, &[0.0], Link::Ul, 1000, 1).unwrap();
        assert_eq!(curve[0].1.mean, 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = scenario(|_| {});
        assert!(estimate_outage(&s, 1.0, Link::Dl, 0, 1).is_err());
        assert!(estimate_cdf_curve(&s, &[1.0, 1.0], Link::Dl, 10, 1).is_err());
        let zero_d = scenario(|c| c.d_pair = 0.0);
        assert!(estimate_rates(&zero_d, RateMode::Fd, 10, 1).is_err());
        assert!(MonteCarlo::default().estimate_link_rate(&zero_d, Link::Ul, 10, 1).is_ok());
    }

    #[test]
    fn identical_for_any_worker_count() {
        let s = scenario(|_| {});
        let n = 3 * BLOCK + 17;
        let one = MonteCarlo::with_threads(1).estimate_rates(&s, RateMode::Fd, n, 9).unwrap();
        let three = MonteCarlo::with_threads(3).estimate_rates(&s, RateMode::Fd, n, 9).unwrap();
        assert_eq!(one, three);
        let grid = [0.1, 1.0, 10.0];
        let a = MonteCarlo::with_threads(1).estimate_cdf_curve(&s, &grid, Link::Dl, n, 9).unwrap();
        let b = MonteCarlo::with_threads(4).estimate_cdf_curve(&s, &grid, Link::Dl, n, 9).unwrap();
        assert_eq!(a, b);
        let g1 = MonteCarlo::with_threads(1).estimate_gain(&s, HdCondition::Ac, n, 9).unwrap();
        let g2 = MonteCarlo::with_threads(2).estimate_gain(&s, HdCondition::Ac, n, 9).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn block_merge_matches_single_pass() {
        let xs: Vec<[f64; 2]> = (0..1000).map(|i| [(i as f64).sin(), (i as f64 * 0.3).cos() + 2.0]).collect();
        let mut whole = Moments::new(2);
        xs.iter().for_each(|x| whole.push(x, false));
        let mut merged = Moments::new(2);
        for chunk in xs.chunks(77) {
            let mut part = Moments::new(2);
            chunk.iter().for_each(|x| part.push(x, false));
            merged.merge(&part);
        }
        for (a, b) in whole.mean.iter().zip(&merged.mean).chain(whole.comoment.iter().zip(&merged.comoment)) {
            assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn empty_fraction_is_void_probability() {
        // One expected user per cell.
        let s = scenario(|c| c.lambda_d = 1.0 / (std::f64::consts::PI * c.r_cell * c.r_cell));
        let n = 100_000;
        let e = estimate_outage(&s, 1.0, Link::Dl, n, 4).unwrap();
        let p = (-1.0f64).exp();
        let frac = e.empty_trials as f64 / n as f64;
        assert!((frac - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt(), "{frac}");
        let r = estimate_rates(&s, RateMode::HdRc, n, 4).unwrap();
        assert_eq!(r.sum.empty_trials, e.empty_trials);
    }

    #[test]
    fn std_err_scales_with_trials() {
        let s = scenario(|_| {});
        let a = MonteCarlo::default().estimate_link_rate(&s, Link::Ul, 50_000, 2).unwrap();
        let b = MonteCarlo::default().estimate_link_rate(&s, Link::Ul, 100_000, 3).unwrap();
        let ratio = b.std_err / a.std_err;
        assert!((ratio * 2f64.sqrt() - 1.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn silent_transmitters_have_zero_rate() {
        let s = scenario(|c| {
            c.p_ap_db = f64::NEG_INFINITY;
            c.p_ul_db = f64::NEG_INFINITY;
        });
        for mode in [RateMode::Fd, RateMode::HdRc, RateMode::HdAc] {
            let r = estimate_rates(&s, mode, 5000, 1).unwrap();
            assert_eq!((r.dl.mean, r.ul.mean, r.sum.mean), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn equal_columns_give_zero_gain() {
        let mut m = Moments::new(2);
        for i in 0..500 {
            let x = 1.0 + (i as f64 * 0.7).sin();
            m.push(&[x, x], false);
        }
        let g = ratio_gain(&m).unwrap();
        assert!(g.mean.abs() < 1e-12 && g.std_err < 1e-9);
        assert!(matches!(ratio_gain(&Moments::new(2)), Err(Error::Unstable(_))));
    }

    #[test]
    fn gain_sign_follows_loopback_level() {
        let low = scenario(|c| {
            c.sigma_li = 0.01;
            c.hd_power_policy = HdPowerPolicy::Power;
        });
        let high = scenario(|c| {
            c.sigma_li = 10f64.powf(0.5);
            c.hd_power_policy = HdPowerPolicy::Power;
        });
        let g_low = estimate_gain(&low, HdCondition::Ac, 50_000, 5).unwrap();
        let g_high = estimate_gain(&high, HdCondition::Ac, 50_000, 5).unwrap();
        assert!(g_low.mean > 3.0 * g_low.std_err, "{g_low:?}");
        assert!(g_high.mean < -3.0 * g_high.std_err, "{g_high:?}");
    }

    #[test]
    fn outage_matches_analytic_cdf() {
        let s = scenario(|c| c.gamma_th_db = 3.0);
        let e = estimate_outage(&s, s.gamma_th, Link::Dl, 100_000, 11).unwrap();
        let a = cdf_dl_general(s.gamma_th, &s, EvalOptions::default()).unwrap().value;
        assert!((e.mean - a).abs() < 3.0 * e.std_err, "{} vs {a}", e.mean);
    }

    #[test]
    fn intervals_cover_the_analytic_value() {
        let s = scenario(|_| {});
        let a = cdf_dl_general(1.0, &s, EvalOptions::default()).unwrap().value;
        let covered = (0..100)
            .filter(|&seed| {
                let e = estimate_outage(&s, 1.0, Link::Dl, 2000, 1000 + seed).unwrap();
                (e.mean - a).abs() <= 2.0 * e.std_err
            })
            .count();
        assert!(covered >= 90, "{covered}");
    }
}
