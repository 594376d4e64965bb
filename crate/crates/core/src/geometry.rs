//! Poisson topologies in the cell disk, user selection and bipolar UL
//! placement, plus per-trial random streams.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::model::{Scenario, Selection};
use crate::{Error, Result};

/// Independent random streams used within a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamLabel {
    Geometry,
    FadingFd,
    FadingHd,
}

impl StreamLabel {
    fn salt(self) -> u64 {
        match self {
            StreamLabel::Geometry => 0x6765_6f6d,
            StreamLabel::FadingFd => 0x6664_6661,
            StreamLabel::FadingHd => 0x6864_6661,
        }
    }
}

/// Identifies the random numbers of one trial: the same pair always gives
/// the same sequence, whichever worker runs it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        RngStream { master_seed, stream_index }
    }

    /// A ChaCha8 generator keyed by `(master_seed, label)`, positioned on
    /// stream `stream_index`.
    pub fn rng(&self, label: StreamLabel) -> ChaCha8Rng {
        let mut state = self.master_seed ^ label.salt().rotate_left(32);
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// One spatial realization.
#[derive(Debug, Clone, PartialEq)]
pub struct TopologySample {
    /// DL user positions; filled only when requested.
    pub dl_points: Vec<[f64; 2]>,
    pub n_points: usize,
    /// AP to selected DL user (NaN when empty).
    pub r_sel: f64,
    /// Pairing angle in `[0, 2π)`.
    pub theta: f64,
    /// UL user to AP (NaN when empty).
    pub dist_ul_ap: f64,
    /// UL user to DL user, always the pairing distance.
    pub dist_ul_dl: f64,
    pub empty: bool,
}

/// Samples topologies for a fixed scenario; the Poisson law is built once.
#[derive(Debug, Clone)]
pub struct TopologySampler {
    r_cell: f64,
    d_pair: f64,
    selection: Selection,
    count: Poisson<f64>,
}

impl TopologySampler {
    pub fn new(s: &Scenario) -> Result<Self> {
        let count =
            Poisson::new(s.mean_users()).map_err(|e| Error::domain(format!("Poisson mean {}: {e}", s.mean_users())))?;
        Ok(TopologySampler { r_cell: s.r_cell, d_pair: s.d_pair, selection: s.selection, count })
    }

    /// Draw order: user count, θ, the RUS index, radii, then point angles.
    /// With `keep_points = false` only what the selected distance needs is
    /// drawn; the returned distances are identical either way.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, keep_points: bool) -> TopologySample {
        let n = self.count.sample(rng) as usize;
        let theta = rng.random::<f64>() * TAU;
        if n == 0 {
            return TopologySample {
                dl_points: Vec::new(),
                n_points: 0,
                r_sel: f64::NAN,
                theta,
                dist_ul_ap: f64::NAN,
                dist_ul_dl: self.d_pair,
                empty: true,
            };
        }
        let pick = match self.selection {
            Selection::Rus => rng.random_range(0..n),
            Selection::Nus => 0,
        };

        let mut dl_points = Vec::new();
        let r_sel = if keep_points {
            let radii: Vec<f64> = (0..n).map(|_| self.r_cell * rng.random::<f64>().sqrt()).collect();
            dl_points = radii
                .iter()
                .map(|&r| {
                    let phi = rng.random::<f64>() * TAU;
                    [r * phi.cos(), r * phi.sin()]
                })
                .collect();
            match self.selection {
                Selection::Nus => radii.iter().copied().fold(f64::INFINITY, f64::min),
                Selection::Rus => radii[pick],
            }
        } else {
            let u = match self.selection {
                Selection::Nus => (0..n).map(|_| rng.random::<f64>()).fold(f64::INFINITY, f64::min),
                Selection::Rus => (0..=pick).map(|_| rng.random::<f64>()).last().unwrap_or(0.0),
            };
            self.r_cell * u.sqrt()
        };

        TopologySample {
            dl_points,
            n_points: n,
            r_sel,
            theta,
            dist_ul_ap: ul_distance_to_ap(r_sel, self.d_pair, theta),
            dist_ul_dl: self.d_pair,
            empty: false,
        }
    }
}

/// Convenience wrapper drawing from the geometry stream of `rng`.
pub fn sample_topology(s: &Scenario, rng: RngStream) -> Result<TopologySample> {
    let sampler = TopologySampler::new(s)?;
    Ok(sampler.sample(&mut rng.rng(StreamLabel::Geometry), true))
}

/// Density of the nearest-user distance, `2πλ r e^{−λπr²}`.
pub fn nearest_distance_pdf(r: f64, lambda_d: f64) -> Result<f64> {
    if !(r >= 0.0) || !(lambda_d > 0.0) {
        return Err(Error::domain(format!("nearest-distance pdf needs r >= 0 and lambda > 0, got r={r}")));
    }
    Ok(2.0 * PI * lambda_d * r * (-lambda_d * PI * r * r).exp())
}

/// `1 − e^{−λπr²}`.
pub fn nearest_distance_cdf(r: f64, lambda_d: f64) -> f64 {
    -(-lambda_d * PI * r * r).exp_m1()
}

/// `sqrt(r² + d² − 2rd cos θ)`, evaluated as `sqrt((r−d)² + 4rd sin²(θ/2))`
/// so the collinear case is exact.
pub fn ul_distance_to_ap(r: f64, d: f64, theta: f64) -> f64 {
    let h = (0.5 * theta).sin();
    ((r - d) * (r - d) + 4.0 * r * d * h * h).sqrt()
}
