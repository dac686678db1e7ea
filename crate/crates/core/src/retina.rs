//! Developing a retina → LGN map from traveling retinal waves.
//!
//! World pixels sit on a regular grid inside the unit square. Retinal cells
//! sit at seeded random positions and see the world through a blurred,
//! row-stochastic transmission `P`: `r = P · p`. Each LGN unit owns one grid
//! position and reads `l_j = Σ_i w_ij r_i / Σ_i w_ij`. Training shows moving
//! Gaussian blobs and applies the winner-takes-all Hebbian rule among the
//! LGN units nearest to the blob, so each unit settles on the retinal cells
//! that see its pixel.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::hebbian::{self, ColumnNorm, HebbianConfig, LrSchedule, TrainState, TIE_TOLERANCE};
use crate::linalg::{dot4, Matrix};
use crate::math;
use crate::rng;
use crate::{Error, Result};

/// Grid, retinal mosaic, transmission and LGN weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RetinaWorld {
    pub grid: (usize, usize),
    /// `(y, x)` in the unit square.
    pub positions: Vec<[f64; 2]>,
    /// `cells × pixels`, rows sum to 1.
    pub transmission: Matrix,
    lgn: TrainState,
    pub blur_sigma: f64,
    pub seed: u64,
}

/// Centre of pixel `j` in the unit square.
pub fn pixel_center(grid: (usize, usize), j: usize) -> [f64; 2] {
    let (r, c) = (j / grid.1, j % grid.1);
    [(r as f64 + 0.5) / grid.0 as f64, (c as f64 + 0.5) / grid.1 as f64]
}

/// Row-stochastic Gaussian blur from `positions` onto pixel centres. Uses
/// a shifted exponent so `σ → 0` becomes one-hot on the nearest pixel.
pub fn transmission_matrix(grid: (usize, usize), positions: &[[f64; 2]], blur_sigma: f64) -> Result<Matrix> {
    if !(blur_sigma >= 0.0) || !blur_sigma.is_finite() {
        return Err(Error::InvalidValue { what: "blur sigma", value: blur_sigma });
    }
    let np = grid.0 * grid.1;
    let centers: Vec<[f64; 2]> = (0..np).map(|j| pixel_center(grid, j)).collect();
    let mut p = Matrix::zeros(positions.len(), np);
    let mut d2 = vec![0.0; np];
    for (i, pos) in positions.iter().enumerate() {
        for (d, c) in d2.iter_mut().zip(&centers) {
            *d = (pos[0] - c[0]) * (pos[0] - c[0]) + (pos[1] - c[1]) * (pos[1] - c[1]);
        }
        let row = p.row_mut(i);
        let nearest = (0..np).min_by(|&a, &b| d2[a].total_cmp(&d2[b])).unwrap_or(0);
        if blur_sigma == 0.0 {
            row[nearest] = 1.0;
            continue;
        }
        let s = 2.0 * blur_sigma * blur_sigma;
        let dmin = d2[nearest];
        let mut sum = 0.0;
        for (v, d) in row.iter_mut().zip(&d2) {
            *v = math::exp(-(d - dmin) / s);
            sum += *v;
        }
        row.iter_mut().for_each(|v| *v /= sum);
    }
    Ok(p)
}

impl RetinaWorld {
    /// Seeded random mosaic of `n_cells` over a `grid` world. LGN weights
    /// start uniform-random with unit column sums.
    pub fn build(grid: (usize, usize), n_cells: usize, blur_sigma: f64, seed: u64) -> Result<Self> {
        if grid.0 == 0 || grid.1 == 0 || n_cells == 0 {
            return Err(Error::InvalidArgument("world needs a non-empty grid and at least one cell"));
        }
        let mut r = rng::stream(seed, rng::WORLD);
        let positions: Vec<[f64; 2]> = (0..n_cells).map(|_| [r.random::<f64>(), r.random::<f64>()]).collect();
        let transmission = transmission_matrix(grid, &positions, blur_sigma)?;
        let mut init = Matrix::zeros(grid.0 * grid.1, n_cells);
        let mut wr = rng::stream(seed, rng::INIT);
        for j in 0..init.rows() {
            let row = init.row_mut(j);
            row.iter_mut().for_each(|v| *v = wr.random_range(f64::MIN_POSITIVE..1.0));
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
        }
        let lgn = TrainState::from_units(init, 0.0, seed)?;
        Ok(RetinaWorld { grid, positions, transmission, lgn, blur_sigma, seed })
    }

    /// Rebuilds a world from stored cell positions and LGN state; the
    /// transmission is recomputed.
    pub fn from_parts(
        grid: (usize, usize),
        positions: Vec<[f64; 2]>,
        blur_sigma: f64,
        seed: u64,
        lgn: TrainState,
    ) -> Result<Self> {
        if lgn.n_inputs() != positions.len() || lgn.n_units() != grid.0 * grid.1 {
            return Err(Error::DimensionMismatch {
                what: "LGN unit count",
                expected: grid.0 * grid.1,
                found: lgn.n_units(),
            });
        }
        let transmission = transmission_matrix(grid, &positions, blur_sigma)?;
        Ok(RetinaWorld { grid, positions, transmission, lgn, blur_sigma, seed })
    }

    pub fn n_cells(&self) -> usize {
        self.positions.len()
    }

    pub fn n_pixels(&self) -> usize {
        self.grid.0 * self.grid.1
    }

    /// `w_ij` as `cells × pixels`.
    pub fn lgn_weights(&self) -> Matrix {
        self.lgn.weights()
    }

    pub fn lgn_state(&self) -> &TrainState {
        &self.lgn
    }

    /// Replaces the LGN weights (`cells × pixels`).
    pub fn set_lgn_weights(&mut self, w: &Matrix) -> Result<()> {
        if w.rows() != self.n_cells() || w.cols() != self.n_pixels() {
            return Err(Error::DimensionMismatch {
                what: "LGN weight rows",
                expected: self.n_cells(),
                found: w.rows(),
            });
        }
        self.lgn = TrainState::from_weights(w, self.lgn.lambda, self.seed)?;
        Ok(())
    }

    /// Retinal responses `P · image`.
    pub fn retina_response(&self, image: &[f64]) -> Result<Vec<f64>> {
        self.transmission.mul_vec(image)
    }

    /// LGN readout for retinal responses `r`, one value per grid position.
    pub fn lgn_readout(&self, r: &[f64]) -> Result<Vec<f64>> {
        let (resp, _) = hebbian::hebbian_response(&self.lgn, r)?;
        Ok(resp)
    }

    /// `image` through transmission and LGN readout.
    pub fn perceive(&self, image: &[f64]) -> Result<Vec<f64>> {
        self.lgn_readout(&self.retina_response(image)?)
    }
}

/// See [`RetinaWorld::build`].
pub fn build_world(grid: (usize, usize), n_cells: usize, blur_sigma: f64, seed: u64) -> Result<RetinaWorld> {
    RetinaWorld::build(grid, n_cells, blur_sigma, seed)
}

/// Blob width and speed in pixels, and a frame cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    pub sigma: f64,
    pub speed: f64,
    pub max_frames: usize,
}

impl Default for WaveParams {
    fn default() -> Self {
        WaveParams { sigma: 0.5, speed: 1.0, max_frames: 256 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetinalWave {
    /// Row-major pixel images, values in `[0, 1]`.
    pub frames: Vec<Vec<f64>>,
    /// Blob centre per frame, `(row, col)` in pixel units.
    pub centers: Vec<[f64; 2]>,
    /// Direction of travel in radians.
    pub direction: f64,
    pub params: WaveParams,
}

/// Gaussian blob image centred at `c` (pixel units; pixel `(r, c)` has its
/// centre at `(r + 0.5, c + 0.5)`).
pub fn blob(grid: (usize, usize), c: [f64; 2], sigma: f64) -> Vec<f64> {
    let s = 2.0 * sigma * sigma;
    let mut f = Vec::with_capacity(grid.0 * grid.1);
    for r in 0..grid.0 {
        for col in 0..grid.1 {
            let dy = r as f64 + 0.5 - c[0];
            let dx = col as f64 + 0.5 - c[1];
            let v = if s > 0.0 { math::exp(-(dy * dy + dx * dx) / s) } else { f64::from(dy == 0.0 && dx == 0.0) };
            f.push(v.clamp(0.0, 1.0));
        }
    }
    f
}

fn inside(grid: (usize, usize), c: [f64; 2]) -> bool {
    c[0] >= 0.0 && c[0] <= grid.0 as f64 && c[1] >= 0.0 && c[1] <= grid.1 as f64
}

/// One wave: a blob moving in a straight line, in a random direction,
/// through a random point of the grid. Only frames whose centre lies on the
/// grid are kept. With `speed = 0` the blob stands still for `max_frames`
/// frames.
pub fn generate_wave(grid: (usize, usize), params: &WaveParams, r: &mut rng::Rng) -> Result<RetinalWave> {
    if !(params.sigma >= 0.0) || !(params.speed >= 0.0) || !params.speed.is_finite() {
        return Err(Error::InvalidArgument("wave sigma and speed must be non-negative"));
    }
    let (gr, gc) = (grid.0 as f64, grid.1 as f64);
    let through = [r.random::<f64>() * gr, r.random::<f64>() * gc];
    let direction = r.random::<f64>() * math::TAU;
    let d = [math::sin(direction), math::cos(direction)];
    let mut centers = Vec::new();
    if params.speed == 0.0 {
        centers.resize(params.max_frames, through);
    } else {
        let reach = math::hypot(gr, gc);
        let n = math::ceil(reach / params.speed) as i64;
        for t in -n..=n {
            let c = [through[0] + d[0] * params.speed * t as f64, through[1] + d[1] * params.speed * t as f64];
            if inside(grid, c) {
                centers.push(c);
                if centers.len() == params.max_frames {
                    break;
                }
            }
        }
    }
    let frames = centers.iter().map(|&c| blob(grid, c, params.sigma)).collect();
    Ok(RetinalWave { frames, centers, direction, params: *params })
}

/// One Hebbian update per frame, or one per wave on the frame average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateMode {
    #[default]
    PerFrame,
    PerWave,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DevelopConfig {
    /// Decays linearly over waves.
    pub lr: LrSchedule,
    pub lambda: f64,
    /// Number of LGN units nearest the blob centre that compete.
    pub candidates: usize,
    pub mode: UpdateMode,
    pub wave: WaveParams,
}

impl Default for DevelopConfig {
    fn default() -> Self {
        DevelopConfig {
            lr: LrSchedule { start: 1.0, end: 0.05 },
            lambda: HebbianConfig::default().lambda,
            candidates: 1,
            mode: UpdateMode::PerFrame,
            wave: WaveParams::default(),
        }
    }
}

/// Straight-line reconstruction quality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineScore {
    pub mse: f64,
    pub correlation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub waves: usize,
    pub score: LineScore,
}

fn nearest_units(grid: (usize, usize), c: [f64; 2], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = (0..grid.0 * grid.1)
        .map(|j| {
            let dy = (j / grid.1) as f64 + 0.5 - c[0];
            let dx = (j % grid.1) as f64 + 0.5 - c[1];
            (dy * dy + dx * dx, j)
        })
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, j)| j).collect()
}

fn update(world: &mut RetinaWorld, r: &[f64], center: [f64; 2], lr: f64, k: usize) -> Result<()> {
    let cand = nearest_units(world.grid, center, k);
    let mut resp = vec![0.0; world.n_pixels()];
    let mut ys = Vec::with_capacity(cand.len());
    for &q in &cand {
        let w = world.lgn.unit(q);
        let sum: f64 = w.iter().sum();
        if !(sum.abs() > 0.0) {
            return Err(Error::DegenerateNormalization { column: Some(q), sum, abs_sum: 0.0 });
        }
        resp[q] = dot4(w, r) / sum;
        ys.push(resp[q]);
    }
    let winner = cand[math::argmax_tol(&ys, TIE_TOLERANCE).unwrap_or(0)];
    hebbian::update_units(&mut world.lgn, r, lr, &resp, winner, Some(&cand))
}

/// Trains the LGN weights on `n_waves` seeded waves. `checkpoints` lists
/// wave counts after which the straight-line score is recorded.
pub fn develop(
    world: &mut RetinaWorld,
    n_waves: usize,
    cfg: &DevelopConfig,
    seed: u64,
    checkpoints: &[usize],
) -> Result<Vec<Checkpoint>> {
    if cfg.candidates == 0 {
        return Err(Error::InvalidArgument("at least one candidate unit must compete"));
    }
    world.lgn.lambda = cfg.lambda;
    world.lgn.column_norm = ColumnNorm::Simplex;
    let mut waves = rng::stream(seed, rng::WAVES);
    let mut out = Vec::new();
    for w in 0..n_waves {
        let lr = cfg.lr.at(w, n_waves);
        let wave = generate_wave(world.grid, &cfg.wave, &mut waves)?;
        let at = |e: Error| e.at_sample(w);
        match cfg.mode {
            UpdateMode::PerFrame => {
                for (f, c) in wave.frames.iter().zip(&wave.centers) {
                    let r = world.retina_response(f)?;
                    update(world, &r, *c, lr, cfg.candidates).map_err(at)?;
                }
            }
            UpdateMode::PerWave if !wave.frames.is_empty() => {
                let n = wave.frames.len() as f64;
                let mut mean = vec![0.0; world.n_pixels()];
                let mut c = [0.0; 2];
                for (f, fc) in wave.frames.iter().zip(&wave.centers) {
                    mean.iter_mut().zip(f).for_each(|(m, v)| *m += v / n);
                    c[0] += fc[0] / n;
                    c[1] += fc[1] / n;
                }
                let r = world.retina_response(&mean)?;
                update(world, &r, c, lr, cfg.candidates).map_err(at)?;
            }
            UpdateMode::PerWave => {}
        }
        if checkpoints.contains(&(w + 1)) {
            out.push(Checkpoint { waves: w + 1, score: evaluate_straight_line(world)? });
        }
    }
    world.lgn.epoch += n_waves;
    Ok(out)
}

/// Horizontal and vertical lines every third row and column, plus both
/// diagonals.
pub fn straight_lines(grid: (usize, usize)) -> Vec<Vec<f64>> {
    let (rows, cols) = grid;
    let mut out = Vec::new();
    for k in (2..rows).step_by(3) {
        let mut a = vec![0.0; rows * cols];
        a[k * cols..(k + 1) * cols].iter_mut().for_each(|v| *v = 1.0);
        out.push(a);
    }
    for k in (2..cols).step_by(3) {
        let mut a = vec![0.0; rows * cols];
        (0..rows).for_each(|r| a[r * cols + k] = 1.0);
        out.push(a);
    }
    let n = rows.max(cols);
    let along = |t: usize, len: usize| if n == 1 { 0 } else { (t * (len - 1) + (n - 1) / 2) / (n - 1) };
    let mut diag = vec![0.0; rows * cols];
    let mut anti = vec![0.0; rows * cols];
    for t in 0..n {
        let (r, c) = (along(t, rows), along(t, cols));
        diag[r * cols + c] = 1.0;
        anti[r * cols + (cols - 1 - c)] = 1.0;
    }
    out.push(diag);
    out.push(anti);
    out
}

/// Pearson correlation; 0 when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / math::sqrt(saa * sbb)
    }
}

/// Mean MSE and mean correlation between each straight-line image and its
/// LGN reconstruction.
pub fn evaluate_straight_line(world: &RetinaWorld) -> Result<LineScore> {
    let lines = straight_lines(world.grid);
    let (mut mse, mut corr) = (0.0, 0.0);
    for p in &lines {
        let l = world.perceive(p)?;
        mse += l.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / p.len() as f64;
        corr += pearson(&l, p);
    }
    let n = lines.len() as f64;
    Ok(LineScore { mse: mse / n, correlation: corr / n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_stochastic() {
        let w = build_world((6, 5), 40, 0.05, 1).unwrap();
        for i in 0..w.n_cells() {
            assert!((w.transmission.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!(w.positions.iter().all(|p| (0.0..1.0).contains(&p[0]) && (0.0..1.0).contains(&p[1])));
        let r = w.retina_response(&[0.3; 30]).unwrap();
        assert!(r.iter().all(|v| (v - 0.3).abs() < 1e-9));
    }

    #[test]
    fn zero_blur_is_one_hot_nearest() {
        let pos = [[0.1, 0.1], [0.9, 0.6]];
        for s in [0.0, 1e-6] {
            let p = transmission_matrix((2, 2), &pos, s).unwrap();
            assert_eq!(p.row(0), &[1.0, 0.0, 0.0, 0.0]);
            assert_eq!(p.row(1), &[0.0, 0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn world_is_deterministic() {
        assert_eq!(build_world((4, 4), 16, 0.1, 3).unwrap(), build_world((4, 4), 16, 0.1, 3).unwrap());
        assert_ne!(build_world((4, 4), 16, 0.1, 3).unwrap(), build_world((4, 4), 16, 0.1, 4).unwrap());
    }

    #[test]
    fn still_wave_repeats_frames() {
        let mut r = rng::stream(0, rng::WAVES);
        let p = WaveParams { speed: 0.0, max_frames: 5, ..Default::default() };
        let w = generate_wave((8, 8), &p, &mut r).unwrap();
        assert_eq!(w.frames.len(), 5);
        assert!(w.frames.windows(2).all(|f| f[0] == f[1]));
    }

    #[test]
    fn blob_peaks_at_its_pixel() {
        let f = blob((5, 7), [2.5, 4.5], 0.8);
        assert_eq!(math::argmax(&f), Some(2 * 7 + 4));
        assert_eq!(f[2 * 7 + 4], 1.0);
        assert!(f.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn moving_wave_stays_on_grid() {
        let mut r = rng::stream(5, rng::WAVES);
        for _ in 0..20 {
            let w = generate_wave((10, 10), &WaveParams::default(), &mut r).unwrap();
            assert!(!w.frames.is_empty());
            assert!(w.centers.iter().all(|&c| inside((10, 10), c)));
            for p in w.centers.windows(2) {
                assert!((math::hypot(p[1][0] - p[0][0], p[1][1] - p[0][1]) - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_waves_change_nothing() {
        let mut w = build_world((4, 4), 16, 0.05, 2).unwrap();
        let before = w.clone();
        let cps = develop(&mut w, 0, &DevelopConfig::default(), 1, &[]).unwrap();
        assert!(cps.is_empty());
        assert_eq!(w.lgn_weights(), before.lgn_weights());
    }

    #[test]
    fn toy_world_learns_the_map() {
        let mut w = build_world((4, 4), 16, 0.02, 7).unwrap();
        let before = evaluate_straight_line(&w).unwrap();
        let cps = develop(&mut w, 400, &DevelopConfig::default(), 3, &[100, 200, 300, 400]).unwrap();
        assert_eq!(cps.len(), 4);
        assert!(cps[3].score.correlation > before.correlation + 0.3, "{before:?} {cps:?}");
    }

    #[test]
    fn pearson_edge_cases() {
        assert_eq!(pearson(&[1.0, 1.0], &[0.0, 1.0]), 0.0);
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn line_set_shape() {
        let l = straight_lines((16, 16));
        assert_eq!(l.len(), 5 + 5 + 2);
        assert!(l.iter().all(|img| img.iter().sum::<f64>() == 16.0));
        let d = &l[10];
        assert!((0..16).all(|t| d[t * 16 + t] == 1.0));
    }
}
