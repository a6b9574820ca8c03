//! Synthetic ground truths, sampling and empirical covariance.
//!
//! Three precision-matrix families are generated: a tridiagonal chain, a
//! sparse Gram matrix `UᵀU` with ±1 entries, and the Laplacian of a Delaunay
//! graph on random points in the unit square. Each is made positive definite
//! by adding `max(−1.2·λ_min, 0.1)·I`.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`; generators read stream 0 and sampling reads stream 1 of
//! the same seed. Normal variates use the Box–Muller transform so streams
//! are reproducible from the seed alone.

pub mod delaunay;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{cholesky, eig_default_max_iter, eig_extremes, LinalgError, SymMatrix, EIG_TOL};

/// Off-diagonal density targeted by the random family.
pub const DEFAULT_RANDOM_DENSITY: f64 = 0.005;

/// Relative band around the target density accepted by the bisection.
pub const DENSITY_BAND: f64 = 0.2;

const DENSITY_ROUNDS: usize = 40;

const SAMPLING_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("{kind} generator needs n >= {min}, got {n}")]
    TooSmall { kind: GraphKind, n: usize, min: usize },
    #[error("target density must lie in (0, 1), got {0}")]
    InvalidDensity(f64),
    #[error("could not reach off-diagonal density {target} within {rounds} bisection rounds (last {last})")]
    DensityUnreachable { target: f64, rounds: usize, last: f64 },
    #[error("shifted ground truth is not positive definite")]
    NotPositiveDefinite,
    #[error("variable {index} has variance {value:e}")]
    ZeroVariance { index: usize, value: f64 },
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Chain,
    Random,
    Planar,
}

impl GraphKind {
    pub const ALL: [GraphKind; 3] = [GraphKind::Chain, GraphKind::Random, GraphKind::Planar];

    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Chain => "chain",
            GraphKind::Random => "random",
            GraphKind::Planar => "planar",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "chain" => Ok(GraphKind::Chain),
            "random" => Ok(GraphKind::Random),
            "planar" => Ok(GraphKind::Planar),
            other => Err(format!("unknown graph kind '{other}' (chain, random, planar)")),
        }
    }
}

/// Shifted, positive definite ground-truth precision.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub precision: SymMatrix,
    pub kind: GraphKind,
    pub shift: f64,
    pub seed: u64,
}

impl GroundTruth {
    pub fn generate(kind: GraphKind, n: usize, seed: u64) -> Result<Self, GenError> {
        let raw = match kind {
            GraphKind::Chain => gen_chain(n)?,
            GraphKind::Random => gen_random(n, DEFAULT_RANDOM_DENSITY, seed)?.matrix,
            GraphKind::Planar => gen_planar(n, seed)?,
        };
        let (precision, shift) = spd_shift(&raw)?;
        if cholesky(&precision).is_err() {
            return Err(GenError::NotPositiveDefinite);
        }
        Ok(Self {
            precision,
            kind,
            shift,
            seed,
        })
    }
}

/// `m` samples of dimension `n`, row-major (one sample per row).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub n: usize,
    pub m: usize,
    pub samples: Vec<f64>,
    pub seed: u64,
}

impl SampleSet {
    pub fn row(&self, k: usize) -> &[f64] {
        &self.samples[k * self.n..(k + 1) * self.n]
    }
}

/// Tridiagonal chain: unit diagonal, `−0.5` on the first off-diagonals.
pub fn gen_chain(n: usize) -> Result<SymMatrix, GenError> {
    if n < 2 {
        return Err(GenError::TooSmall {
            kind: GraphKind::Chain,
            n,
            min: 2,
        });
    }
    Ok(SymMatrix::from_fn(n, |i, j| match j - i {
        0 => 1.0,
        1 => -0.5,
        _ => 0.0,
    }))
}

/// Random sparse Gram matrix and how it was tuned.
#[derive(Debug, Clone)]
pub struct RandomStructure {
    /// `UᵀU` with off-diagonals clamped to `[−1, 1]`, before the shift.
    pub matrix: SymMatrix,
    /// Entry probability of `U` selected by the bisection.
    pub u_density: f64,
    /// Achieved off-diagonal nonzero fraction.
    pub offdiag_density: f64,
    /// Off-diagonal entries whose magnitude was clamped to 1 (each pair
    /// counted once per triangle, i.e. both mirrored entries count).
    pub clamped: usize,
}

/// `UᵀU` for a sparse `U` with ±1 entries, clamping off-diagonals to
/// `[−1, 1]`, with the density of `U` bisected until the off-diagonal
/// nonzero fraction is within 20% of `target_density`.
///
/// Every candidate density reuses the same uniform draws, so the support of
/// `U` grows monotonically with the density.
pub fn gen_random(n: usize, target_density: f64, seed: u64) -> Result<RandomStructure, GenError> {
    if n < 2 {
        return Err(GenError::TooSmall {
            kind: GraphKind::Random,
            n,
            min: 2,
        });
    }
    if !(target_density > 0.0 && target_density < 1.0) {
        return Err(GenError::InvalidDensity(target_density));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(f64, f64)> = (0..n * n)
        .map(|_| {
            let u: f64 = rng.random();
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            (u, sign)
        })
        .collect();

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut last = 0.0;
    for _ in 0..DENSITY_ROUNDS {
        let p = 0.5 * (lo + hi);
        let candidate = gram_from_draws(n, &draws, p);
        last = candidate.offdiag_density;
        if (last - target_density).abs() <= DENSITY_BAND * target_density {
            return Ok(candidate);
        }
        if last < target_density {
            lo = p;
        } else {
            hi = p;
        }
    }
    Err(GenError::DensityUnreachable {
        target: target_density,
        rounds: DENSITY_ROUNDS,
        last,
    })
}

fn gram_from_draws(n: usize, draws: &[(f64, f64)], p: f64) -> RandomStructure {
    // rows of U as (column, ±1) lists
    let rows: Vec<Vec<(usize, f64)>> = draws
        .chunks(n)
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, (u, _))| *u < p)
                .map(|(c, &(_, s))| (c, s))
                .collect()
        })
        .collect();
    gram_from_rows(n, &rows, p)
}

fn gram_from_rows(n: usize, rows: &[Vec<(usize, f64)>], p: f64) -> RandomStructure {
    let mut g = vec![0.0; n * n];
    for row in rows {
        for &(i, si) in row {
            for &(j, sj) in row {
                g[i * n + j] += si * sj;
            }
        }
    }
    let mut clamped = 0;
    let mut nnz = 0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let v = &mut g[i * n + j];
            if v.abs() > 1.0 {
                *v = v.signum();
                clamped += 1;
            }
            if *v != 0.0 {
                nnz += 1;
            }
        }
    }
    RandomStructure {
        matrix: SymMatrix::from_row_major(n, g).expect("Gram matrix is symmetric"),
        u_density: p,
        offdiag_density: nnz as f64 / (n * (n - 1)) as f64,
        clamped,
    }
}

/// `n` i.i.d. uniform points in the unit square.
pub fn planar_points(n: usize, seed: u64) -> Vec<delaunay::Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
}

/// Graph Laplacian: `−1` per edge, vertex degree on the diagonal.
pub fn laplacian(n: usize, edges: &[(usize, usize)]) -> SymMatrix {
    let mut l = SymMatrix::zeros(n);
    for &(i, j) in edges {
        l.set(i, j, -1.0);
    }
    for i in 0..n {
        let degree = l.row(i).iter().filter(|&&v| v != 0.0).count();
        l.set(i, i, degree as f64);
    }
    l
}

/// Laplacian of the Delaunay graph on [`planar_points`].
pub fn gen_planar(n: usize, seed: u64) -> Result<SymMatrix, GenError> {
    if n < 3 {
        return Err(GenError::TooSmall {
            kind: GraphKind::Planar,
            n,
            min: 3,
        });
    }
    let tri = delaunay::triangulate(&planar_points(n, seed));
    Ok(laplacian(n, &tri.edges()))
}

/// `m + max(−1.2·λ_min(m), 0.1)·I`.
pub fn spd_shift(m: &SymMatrix) -> Result<(SymMatrix, f64), GenError> {
    let e = eig_extremes(m, EIG_TOL, eig_default_max_iter(m.n()))?;
    let shift = (-1.2 * e.min).max(0.1);
    Ok((m.add_diag(shift), shift))
}

/// Box–Muller normal generator; the second variate of each pair is cached.
struct BoxMuller {
    cached: Option<f64>,
}

impl BoxMuller {
    fn sample(&mut self, rng: &mut ChaCha8Rng) -> f64 {
        if let Some(z) = self.cached.take() {
            return z;
        }
        let u1 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.cached = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Zero-mean Gaussian samples with the given precision `P = L·Lᵀ`:
/// `y = L⁻ᵀ·z` with `z ~ N(0, I)`, so `cov(y) = P⁻¹`.
pub fn sample_mvn(precision: &SymMatrix, m: usize, seed: u64) -> Result<SampleSet, GenError> {
    if m == 0 {
        return Err(GenError::NoSamples);
    }
    let factor = cholesky(precision).map_err(|_| GenError::NotPositiveDefinite)?;
    let n = precision.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SAMPLING_STREAM);
    let mut normal = BoxMuller { cached: None };
    let mut samples = Vec::with_capacity(m * n);
    for _ in 0..m {
        let z: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        samples.extend(factor.solve_upper(&z));
    }
    Ok(SampleSet { n, m, samples, seed })
}

/// `S = (1/m)·Σ (yᵢ − ȳ)(yᵢ − ȳ)ᵀ`.
pub fn empirical_cov(samples: &SampleSet) -> Result<SymMatrix, GenError> {
    let (n, m) = (samples.n, samples.m);
    if m == 0 {
        return Err(GenError::NoSamples);
    }
    let mut mean = vec![0.0; n];
    for k in 0..m {
        mean.iter_mut().zip(samples.row(k)).for_each(|(a, y)| *a += y);
    }
    mean.iter_mut().for_each(|a| *a /= m as f64);

    let mut upper = vec![0.0; n * n];
    let mut centered = vec![0.0; n];
    for k in 0..m {
        centered
            .iter_mut()
            .zip(samples.row(k).iter().zip(&mean))
            .for_each(|(c, (y, mu))| *c = y - mu);
        for i in 0..n {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            let row = &mut upper[i * n + i..(i + 1) * n];
            row.iter_mut().zip(&centered[i..]).for_each(|(s, cj)| *s += ci * cj);
        }
    }
    let inv_m = 1.0 / m as f64;
    Ok(SymMatrix::from_fn(n, |i, j| upper[i * n + j] * inv_m))
}

/// Rescales a covariance to unit diagonal (correlation matrix).
pub fn standardize(s: &SymMatrix) -> Result<SymMatrix, GenError> {
    let d = s.diag();
    if let Some((index, &value)) = d.iter().enumerate().find(|(_, &v)| !(v > 1e-12)) {
        return Err(GenError::ZeroVariance { index, value });
    }
    let scale: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    Ok(SymMatrix::from_fn(s.n(), |i, j| {
        if i == j {
            1.0
        } else {
            s.get(i, j) * scale[i] * scale[j]
        }
    }))
}
