//! Two-soliton runs and local-maximum tracking.

use serde::{Deserialize, Serialize};

use super::spectral::{FieldState, RunOutput, SimulationGrid, Simulator};
use crate::error::{Error, Result};
use crate::interaction::ScatteringSetup;
use crate::model::{DerivedConstants, ModelParameters};
use crate::profile::ProfileSolution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub x: f64,
    pub amplitude: f64,
}

/// Local maxima above `threshold` on a periodic uniform grid, refined by a
/// parabola through the three points around each one. Sorted by position.
pub fn local_maxima(x: &[f64], u: &[f64], threshold: f64) -> Vec<Peak> {
    let n = u.len();
    if n < 3 {
        return Vec::new();
    }
    let dx = x[1] - x[0];
    let mut peaks = Vec::new();
    for i in 0..n {
        let (l, c, r) = (u[(i + n - 1) % n], u[i], u[(i + 1) % n]);
        if c <= threshold || c <= l || c < r {
            continue;
        }
        let curv = l - 2.0 * c + r;
        let delta = if curv < 0.0 { 0.5 * (l - r) / curv } else { 0.0 };
        peaks.push(Peak { x: x[i] + delta * dx, amplitude: c - 0.25 * (l - r) * delta });
    }
    peaks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub times: Vec<f64>,
    pub peaks: Vec<Vec<Peak>>,
    pub initial_amplitudes: (f64, f64),
    /// Smaller then larger wave, at the first and last snapshot.
    pub pre: Vec<Peak>,
    pub post: Vec<Peak>,
    pub pre_speeds: Option<(f64, f64)>,
    pub post_speeds: Option<(f64, f64)>,
    /// Final position minus the free-flight position `x_i⁰ + V_i t`, per wave.
    pub post_offsets: Option<(f64, f64)>,
    /// `max_i |A_i^post − A_i^pre| / A_i^pre`
    pub amplitude_defect: Option<f64>,
}

impl TrackRecord {
    pub fn two_peaks_before_and_after(&self) -> bool {
        self.pre.len() == 2 && self.post.len() == 2
    }
}

fn wrap(d: f64, length: f64) -> f64 {
    d - length * (d / length).round()
}

/// Sum of the two wave profiles placed at `x0` on the periodic grid.
pub fn two_soliton_initial_data(
    derived: &DerivedConstants,
    params: &ModelParameters,
    setup: &ScatteringSetup,
    profiles: (&ProfileSolution, &ProfileSolution),
    grid: &SimulationGrid,
) -> Vec<f64> {
    let k = derived.beta / params.epsilon;
    grid.x()
        .iter()
        .map(|&x| {
            profiles.0.wave.amplitude * profiles.0.omega(k * wrap(x - setup.x0.0, grid.length))
                + profiles.1.wave.amplitude * profiles.1.omega(k * wrap(x - setup.x0.1, grid.length))
        })
        .collect()
}

fn check_layout(
    derived: &DerivedConstants,
    params: &ModelParameters,
    setup: &ScatteringSetup,
    profiles: (&ProfileSolution, &ProfileSolution),
    grid: &SimulationGrid,
) -> Result<()> {
    let mut problems = Vec::new();
    let k = derived.beta / params.epsilon;
    let slowest_decay = profiles.0.tail_decay.min(profiles.1.tail_decay);
    let fastest_decay = profiles.0.tail_decay.max(profiles.1.tail_decay);
    let sep = wrap(setup.x0.0 - setup.x0.1, grid.length).abs();
    if sep * k * slowest_decay < 15.0 {
        problems.push(format!("initial separation {sep} is under 15 decay lengths"));
    }
    let reach = profiles.0.support_radius(1e-10).max(profiles.1.support_radius(1e-10)) / k;
    if grid.length - sep < 2.0 * reach {
        problems.push(format!("period {} too short: periodic images exceed 1e-10", grid.length));
    }
    let bound = params.epsilon / (8.0 * derived.beta * fastest_decay);
    if grid.spacing() > bound {
        problems.push(format!("grid spacing {} exceeds the resolution bound {bound}", grid.spacing()));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::Domain(problems))
    }
}

/// Simulates the superposed initial data to `grid.t_final` and tracks
/// maxima above `0.2 A₁`.
pub fn run_two_soliton(
    params: &ModelParameters,
    derived: &DerivedConstants,
    setup: &ScatteringSetup,
    profiles: (&ProfileSolution, &ProfileSolution),
    grid: &SimulationGrid,
    snapshot_every: usize,
) -> Result<(RunOutput, TrackRecord)> {
    check_layout(derived, params, setup, profiles, grid)?;
    let sim = Simulator::new(grid, params)?;
    let u = two_soliton_initial_data(derived, params, setup, profiles, grid);
    let out = sim.run(&FieldState { t: 0.0, u }, snapshot_every, 10)?;
    let amps = (profiles.0.wave.amplitude, profiles.1.wave.amplitude);
    let track = track_peaks(&out.snapshots, grid, setup, amps);
    Ok((out, track))
}

/// Builds the track record from snapshots. The two peaks are identified by
/// amplitude: the smaller is wave 1.
pub fn track_peaks(snapshots: &[FieldState], grid: &SimulationGrid, setup: &ScatteringSetup, amps: (f64, f64)) -> TrackRecord {
    let x = grid.x();
    let threshold = 0.2 * amps.0;
    let peaks: Vec<Vec<Peak>> = snapshots.iter().map(|s| local_maxima(&x, &s.u, threshold)).collect();
    let times: Vec<f64> = snapshots.iter().map(|s| s.t).collect();
    let ordered = |p: &[Peak]| -> Vec<Peak> {
        let mut v = p.to_vec();
        v.sort_by(|a, b| a.amplitude.total_cmp(&b.amplitude));
        v
    };
    let pre = ordered(&peaks[0]);
    let post = ordered(&peaks[peaks.len() - 1]);
    let span = (snapshots.len() / 10).max(2);
    let pre_speeds = fit_speeds(&times[..span.min(times.len())], &peaks[..span.min(peaks.len())], grid.length);
    let tail = peaks.len().saturating_sub(span);
    let post_speeds = fit_speeds(&times[tail..], &peaks[tail..], grid.length);
    let (post_offsets, amplitude_defect) = if post.len() == 2 && pre.len() == 2 {
        let t = times[times.len() - 1];
        let v = (setup.waves.0.velocity, setup.waves.1.velocity);
        let offs = (wrap(post[0].x - setup.x0.0 - v.0 * t, grid.length), wrap(post[1].x - setup.x0.1 - v.1 * t, grid.length));
        let defect = ((post[0].amplitude - pre[0].amplitude) / pre[0].amplitude)
            .abs()
            .max(((post[1].amplitude - pre[1].amplitude) / pre[1].amplitude).abs());
        (Some(offs), Some(defect))
    } else {
        (None, None)
    };
    TrackRecord { times, peaks, initial_amplitudes: amps, pre, post, pre_speeds, post_speeds, post_offsets, amplitude_defect }
}

/// Least-squares speeds of the smaller and larger peak over a window in
/// which exactly two peaks are present throughout.
fn fit_speeds(times: &[f64], peaks: &[Vec<Peak>], length: f64) -> Option<(f64, f64)> {
    if times.len() < 2 || peaks.iter().any(|p| p.len() != 2) {
        return None;
    }
    let fit = |which: usize| -> f64 {
        let mut pos = Vec::with_capacity(times.len());
        let mut prev: Option<f64> = None;
        for p in peaks {
            let mut v = p.clone();
            v.sort_by(|a, b| a.amplitude.total_cmp(&b.amplitude));
            let x = v[which].x;
            let x = match prev {
                Some(q) => q + wrap(x - q, length),
                None => x,
            };
            prev = Some(x);
            pos.push(x);
        }
        slope(times, &pos).unwrap_or(f64::NAN)
    };
    Some((fit(0), fit(1)))
}

/// Least-squares speed of the tallest peak, unwrapped across the period.
/// `None` if some snapshot has no peak.
pub fn tallest_peak_speed(times: &[f64], peaks: &[Vec<Peak>], length: f64) -> Option<f64> {
    let mut pos = Vec::with_capacity(times.len());
    for p in peaks {
        let x = p.iter().max_by(|a, b| a.amplitude.total_cmp(&b.amplitude))?.x;
        pos.push(match pos.last() {
            Some(&q) => q + wrap(x - q, length),
            None => x,
        });
    }
    slope(times, &pos)
}

fn slope(times: &[f64], pos: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let n = times.len() as f64;
    let (mt, mx) = (times.iter().sum::<f64>() / n, pos.iter().sum::<f64>() / n);
    let num: f64 = times.iter().zip(pos).map(|(t, x)| (t - mt) * (x - mx)).sum();
    let den: f64 = times.iter().map(|t| (t - mt) * (t - mt)).sum();
    Some(num / den)
}
