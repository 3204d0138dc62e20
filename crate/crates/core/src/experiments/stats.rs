use serde::{Deserialize, Serialize};

use crate::integrator::{Fate, State, TrajectoryResult};

/// Exit kinematics of one recrossing trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecrossRecord {
    pub traj_id: usize,
    pub y0: f64,
    /// Direction of the exit momentum from the `+x` axis, in `[0°, 360°)`.
    pub theta_deg: f64,
    /// `180° − θ`: deviation from a horizontal (`−x`) exit.
    pub theta_dev_deg: f64,
    /// `(p_x,exit − p_x,0) / p_x,0`; NaN when `p_x,0 = 0`.
    pub rel_dpx: f64,
    /// `p_y,exit − p_y,0`.
    pub abs_dpy: f64,
    /// `(|p|_exit − |p|_0) / |p|_0`; NaN when `|p|_0 = 0`.
    pub rel_dp_total: f64,
    pub t_exit: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecrossStats {
    pub records: Vec<RecrossRecord>,
}

fn relative(new: f64, old: f64) -> f64 {
    if old == 0.0 {
        f64::NAN
    } else {
        (new - old) / old
    }
}

impl RecrossStats {
    pub fn collect(initial: &[State], results: &[TrajectoryResult]) -> Self {
        let records = initial
            .iter()
            .zip(results)
            .enumerate()
            .filter(|(_, (_, r))| r.fate == Fate::Recross)
            .map(|(traj_id, (s0, r))| {
                let e = &r.exit_state;
                let theta_deg = e.py.atan2(e.px).to_degrees().rem_euclid(360.0);
                RecrossRecord {
                    traj_id,
                    y0: s0.y,
                    theta_deg,
                    theta_dev_deg: 180.0 - theta_deg,
                    rel_dpx: relative(e.px, s0.px),
                    abs_dpy: e.py - s0.py,
                    rel_dp_total: relative(e.px.hypot(e.py), s0.px.hypot(s0.py)),
                    t_exit: r.elapsed,
                }
            })
            .collect();
        RecrossStats { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Histogram of `θ_dev` with bins centred on multiples of the bin width, so
/// the central bin is `[−w/2, w/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleHistogram {
    pub bin_width_deg: f64,
    /// `(lower edge, upper edge, count)` in ascending order.
    pub bins: Vec<(f64, f64, usize)>,
    /// Index into `bins` of the most populated bin; ties go to the bin
    /// closest to 0°.
    pub modal: Option<usize>,
    pub fraction_within_30: f64,
    pub total: usize,
}

impl AngleHistogram {
    pub fn modal_contains(&self, angle: f64) -> bool {
        self.modal
            .map(|i| self.bins[i].0 <= angle && angle < self.bins[i].1)
            .unwrap_or(false)
    }
}

pub fn angle_histogram(stats: &RecrossStats, bin_width_deg: f64) -> AngleHistogram {
    assert!(bin_width_deg > 0.0, "bin width must be positive");
    let half_bins = (90.0 / bin_width_deg).round() as i64;
    let mut counts = vec![0usize; (2 * half_bins + 1) as usize];
    let mut within = 0usize;
    for r in &stats.records {
        let k = (r.theta_dev_deg / bin_width_deg).round() as i64;
        let k = k.clamp(-half_bins, half_bins);
        counts[(k + half_bins) as usize] += 1;
        if r.theta_dev_deg.abs() <= 30.0 {
            within += 1;
        }
    }
    let bins: Vec<(f64, f64, usize)> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let centre = (i as i64 - half_bins) as f64 * bin_width_deg;
            (centre - 0.5 * bin_width_deg, centre + 0.5 * bin_width_deg, c)
        })
        .collect();
    let total = stats.records.len();
    let modal = (total > 0).then(|| {
        (0..bins.len())
            .max_by_key(|&i| (bins[i].2, std::cmp::Reverse((i as i64 - half_bins).abs()), std::cmp::Reverse(i)))
            .expect("non-empty bins")
    });
    AngleHistogram {
        bin_width_deg,
        bins,
        modal,
        fraction_within_30: if total > 0 { within as f64 / total as f64 } else { 0.0 },
        total,
    }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(theta_dev: f64) -> RecrossRecord {
        RecrossRecord {
            traj_id: 0,
            y0: 0.0,
            theta_deg: 180.0 - theta_dev,
            theta_dev_deg: theta_dev,
            rel_dpx: -2.0,
            abs_dpy: 0.0,
            rel_dp_total: 0.0,
            t_exit: 1.0,
        }
    }

    #[test]
    fn empty_histogram() {
        let h = angle_histogram(&RecrossStats::default(), 10.0);
        assert_eq!(h.total, 0);
        assert!(h.modal.is_none());
        assert!(h.bins.iter().all(|b| b.2 == 0));
    }

    #[test]
    fn single_record() {
        let stats = RecrossStats { records: vec![record(12.0)] };
        let h = angle_histogram(&stats, 10.0);
        let nonzero: Vec<_> = h.bins.iter().filter(|b| b.2 > 0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].2, 1);
        assert_eq!((nonzero[0].0, nonzero[0].1), (5.0, 15.0));
    }

    #[test]
    fn counts_sum_and_mode() {
        let stats = RecrossStats {
            records: [-3.0, 2.0, 4.9, 40.0, -88.0, 89.9].into_iter().map(record).collect(),
        };
        let h = angle_histogram(&stats, 10.0);
        assert_eq!(h.bins.iter().map(|b| b.2).sum::<usize>(), 6);
        assert!(h.modal_contains(0.0));
        assert!((h.fraction_within_30 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spearman_monotone() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&xs, &[0.1, 0.5, 0.7, 9.0]) - 1.0).abs() < 1e-15);
        assert!((spearman(&xs, &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
    }
}
