//! Constant-velocity Kalman filter over `x = [p, ṗ]` with five optional
//! measurement slots. Absent slots drop their rows from `H` and `R`.

use nalgebra::{DMatrix, DVector, Matrix4, SMatrix, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perception::{viewing_angle_position, BoundingBox, CameraModel};
use crate::Vec2;

pub const SLOT_COUNT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    AngleCam1,
    AngleCam2,
    CenterCam1,
    CenterCam2,
    Velocity,
}

impl Slot {
    pub const ALL: [Slot; SLOT_COUNT] = [Slot::AngleCam1, Slot::AngleCam2, Slot::CenterCam1, Slot::CenterCam2, Slot::Velocity];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Offset of the observed block within the state vector.
    fn state_offset(self) -> usize {
        match self {
            Slot::Velocity => 2,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeasurementSet {
    slots: [Option<Vec2>; SLOT_COUNT],
}

impl MeasurementSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with(mut self, slot: Slot, value: Vec2) -> Self {
        self.set(slot, Some(value));
        self
    }

    pub fn set(&mut self, slot: Slot, value: Option<Vec2>) {
        self.slots[slot.index()] = value;
    }

    pub fn get(&self, slot: Slot) -> Option<Vec2> {
        self.slots[slot.index()]
    }

    pub fn is_empty(&self) -> bool {
        self.slots.iter().all(Option::is_none)
    }

    pub fn present(&self) -> impl Iterator<Item = (Slot, Vec2)> + '_ {
        Slot::ALL.into_iter().filter_map(|s| self.get(s).map(|v| (s, v)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub q: Matrix4<f64>,
    pub r: SMatrix<f64, 10, 10>,
}

impl NoiseConfig {
    pub fn from_diagonals(q: [f64; 4], r: [f64; 10]) -> Result<Self> {
        if q.iter().chain(r.iter()).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("noise variances must be finite and non-negative".into()));
        }
        Ok(Self { q: Matrix4::from_diagonal(&Vector4::from(q)), r: SMatrix::<f64, 10, 10>::from_diagonal(&SMatrix::<f64, 10, 1>::from(r)) })
    }

    /// Copy with one slot's 2×2 block of `R` multiplied by `factor`.
    pub fn scale_slot(&self, slot: Slot, factor: f64) -> Self {
        let mut out = *self;
        let i = 2 * slot.index();
        let scaled = out.r.fixed_view::<2, 2>(i, i) * factor;
        out.r.fixed_view_mut::<2, 2>(i, i).copy_from(&scaled);
        out
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let mut r = [0.01; 10];
        r[8] = 0.1;
        r[9] = 0.1;
        Self::from_diagonals([0.01, 0.01, 0.2, 0.2], r).expect("default noise is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseDiagonals {
    pub q: [f64; 4],
    pub r: [f64; 10],
}

impl Default for NoiseDiagonals {
    fn default() -> Self {
        let n = NoiseConfig::default();
        Self { q: std::array::from_fn(|i| n.q[(i, i)]), r: std::array::from_fn(|i| n.r[(i, i)]) }
    }
}

impl TryFrom<NoiseDiagonals> for NoiseConfig {
    type Error = Error;

    fn try_from(d: NoiseDiagonals) -> Result<Self> {
        Self::from_diagonals(d.q, d.r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    pub x: Vector4<f64>,
    pub p: Matrix4<f64>,
}

impl FilterState {
    pub fn new(position: Vec2, velocity: Vec2, p: Matrix4<f64>) -> Self {
        Self { x: Vector4::new(position.x, position.y, velocity.x, velocity.y), p }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x[0], self.x[1])
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.x[2], self.x[3])
    }
}

/// Initial covariance diagonal.
pub const P0: f64 = 0.01;

/// Starts the filter at the viewing-angle position of the more confident
/// detection, at rest. `to_world` maps body-ground coordinates to the world.
pub fn init(
    detections: [Option<&BoundingBox>; 2],
    cams: [&CameraModel; 2],
    ball_diameter: f64,
    to_world: impl Fn(Vec2) -> Vec2,
) -> Result<FilterState> {
    let (b, cam) = detections
        .into_iter()
        .zip(cams)
        .filter_map(|(d, c)| d.map(|d| (d, c)))
        // ties keep the first camera
        .reduce(|a, b| if b.0.confidence > a.0.confidence { b } else { a })
        .ok_or(Error::CannotInitialize)?;
    let p = viewing_angle_position(b, cam, ball_diameter)?;
    Ok(FilterState::new(to_world(Vec2::new(p.x, p.y)), Vec2::zeros(), Matrix4::identity() * P0))
}

pub fn transition(dt: f64) -> Matrix4<f64> {
    let mut f = Matrix4::identity();
    f[(0, 2)] = dt;
    f[(1, 3)] = dt;
    f
}

pub fn predict(state: &FilterState, dt: f64, noise: &NoiseConfig) -> Result<FilterState> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("dt must be non-negative, got {dt}")));
    }
    let f = transition(dt);
    Ok(FilterState { x: f * state.x, p: f * state.p * f.transpose() + noise.q })
}

pub fn update(state: &FilterState, meas: &MeasurementSet, noise: &NoiseConfig) -> Result<FilterState> {
    if meas.is_empty() {
        return Ok(*state);
    }
    let rows: Vec<(Slot, Vec2)> = meas.present().collect();
    let m = 2 * rows.len();
    let mut h = DMatrix::<f64>::zeros(m, 4);
    let mut r = DMatrix::<f64>::zeros(m, m);
    let mut z = DVector::<f64>::zeros(m);
    for (k, (slot, value)) in rows.iter().enumerate() {
        let (row, off, src) = (2 * k, slot.state_offset(), 2 * slot.index());
        h[(row, off)] = 1.0;
        h[(row + 1, off + 1)] = 1.0;
        z[row] = value.x;
        z[row + 1] = value.y;
        for (j, (other, _)) in rows.iter().enumerate() {
            let col = 2 * other.index();
            r.view_mut((row, 2 * j), (2, 2)).copy_from(&noise.r.fixed_view::<2, 2>(src, col));
        }
    }
    let p = DMatrix::from_column_slice(4, 4, state.p.as_slice());
    let x = DVector::from_column_slice(state.x.as_slice());
    let s = &h * &p * h.transpose() + &r;
    let s_inv = s.clone().cholesky().ok_or(Error::FilterDegenerate)?.inverse();
    if !s_inv.iter().all(|v| v.is_finite()) {
        return Err(Error::FilterDegenerate);
    }
    let k = &p * h.transpose() * s_inv;
    let x_new = &x + &k * (z - &h * &x);
    let ikh = DMatrix::<f64>::identity(4, 4) - &k * &h;
    let joseph = &ikh * &p * ikh.transpose() + &k * &r * k.transpose();
    let p_new = Matrix4::from_fn(|i, j| 0.5 * (joseph[(i, j)] + joseph[(j, i)]));
    Ok(FilterState { x: Vector4::from_column_slice(x_new.as_slice()), p: p_new })
}

pub fn step(state: &FilterState, dt: f64, meas: &MeasurementSet, noise: &NoiseConfig) -> Result<FilterState> {
    update(&predict(state, dt, noise)?, meas, noise)
}
