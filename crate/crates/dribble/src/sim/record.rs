//! Per-step trajectory rows and episode metrics.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub ball_px: f64,
    pub ball_py: f64,
    pub ball_vx: f64,
    pub ball_vy: f64,
    pub robot_px: f64,
    pub robot_py: f64,
    pub robot_yaw: f64,
    pub cmd_x: f64,
    pub cmd_y: f64,
    pub vref_x: f64,
    pub vref_y: f64,
    pub est_px: f64,
    pub est_py: f64,
    pub est_vx: f64,
    pub est_vy: f64,
    pub reward_base: f64,
    pub reward_shaped: f64,
}

impl TrajectoryRow {
    pub fn ball_distance(&self) -> f64 {
        (self.ball_px - self.robot_px).hypot(self.ball_py - self.robot_py)
    }

    pub fn ball_speed(&self) -> f64 {
        self.ball_vx.hypot(self.ball_vy)
    }

    pub fn tracking_error(&self) -> f64 {
        (self.ball_vx - self.cmd_x).hypot(self.ball_vy - self.cmd_y)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub rows: Vec<TrajectoryRow>,
    /// Body velocity per row, kept out of the CSV.
    pub robot_velocity: Vec<[f64; 2]>,
}

impl TrajectoryRecord {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub ate: f64,
    pub success: bool,
    pub time_to_stop: Option<f64>,
    pub max_ball_dist: f64,
    pub seed: u64,
}

/// Ball–robot separation beyond which an episode fails, metres.
pub const LOSS_DISTANCE: f64 = 0.5;
pub const STOP_SPEED: f64 = 0.05;
pub const STOP_HOLD: f64 = 1.0;

/// Mean of ‖ball velocity − command‖ over all rows.
pub fn ate(record: &TrajectoryRecord) -> Result<f64> {
    if record.rows.is_empty() {
        return Err(Error::InvalidInput("ATE of an empty record".into()));
    }
    Ok(record.rows.iter().map(TrajectoryRow::tracking_error).sum::<f64>() / record.rows.len() as f64)
}

/// First time at or after `stop` from which the ball stays slower than
/// `STOP_SPEED` for `STOP_HOLD` seconds.
pub fn time_to_stop(record: &TrajectoryRecord, stop: f64, dt: f64) -> Option<f64> {
    let need = (STOP_HOLD / dt).round() as usize;
    let mut start: Option<(usize, f64)> = None;
    for (i, row) in record.rows.iter().enumerate().filter(|(_, r)| r.t >= stop - 1e-9) {
        if row.ball_speed() < STOP_SPEED {
            let (first, t) = *start.get_or_insert((i, row.t));
            if i - first >= need {
                return Some(t - stop);
            }
        } else {
            start = None;
        }
    }
    None
}

pub fn metrics(record: &TrajectoryRecord, stop: Option<f64>, dt: f64, seed: u64) -> Result<Metrics> {
    let max_ball_dist = record.rows.iter().map(TrajectoryRow::ball_distance).fold(0.0, f64::max);
    Ok(Metrics {
        ate: ate(record)?,
        success: max_ball_dist <= LOSS_DISTANCE,
        time_to_stop: stop.and_then(|s| time_to_stop(record, s, dt)),
        max_ball_dist,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(errors: &[f64]) -> TrajectoryRecord {
        let rows = errors
            .iter()
            .enumerate()
            .map(|(i, e)| TrajectoryRow {
                t: i as f64 * 0.02,
                ball_px: 0.0,
                ball_py: 0.0,
                ball_vx: 1.0 + e,
                ball_vy: 0.0,
                robot_px: 0.0,
                robot_py: 0.0,
                robot_yaw: 0.0,
                cmd_x: 1.0,
                cmd_y: 0.0,
                vref_x: 0.0,
                vref_y: 0.0,
                est_px: 0.0,
                est_py: 0.0,
                est_vx: 0.0,
                est_vy: 0.0,
                reward_base: 0.0,
                reward_shaped: 0.0,
            })
            .collect();
        TrajectoryRecord { rows, robot_velocity: vec![] }
    }

    #[test]
    fn ate_examples() {
        assert_eq!(ate(&rec(&[0.0; 10])).unwrap(), 0.0);
        assert!((ate(&rec(&[0.1; 10])).unwrap() - 0.1).abs() < 1e-12);
        let halves: Vec<f64> = (0..10).map(|i| if i < 5 { 0.0 } else { 0.2 }).collect();
        assert!((ate(&rec(&halves)).unwrap() - 0.1).abs() < 1e-12);
        assert!(ate(&TrajectoryRecord::default()).is_err());
    }

    #[test]
    fn stop_time_needs_a_full_second() {
        let mut r = rec(&[0.0; 200]);
        for (i, row) in r.rows.iter_mut().enumerate() {
            row.ball_vx = if i < 120 { 1.0 } else { 0.01 };
        }
        let t = time_to_stop(&r, 1.0, 0.02).unwrap();
        assert!((t - 1.4).abs() < 1e-9);
        r.rows.truncate(160);
        assert_eq!(time_to_stop(&r, 1.0, 0.02), None);
    }
}
