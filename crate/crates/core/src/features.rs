//! Observation encoders producing sparse binary feature vectors.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A binary feature vector given by its active indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseFeatures {
    active: Vec<usize>,
    dim: usize,
}

impl SparseFeatures {
    /// `active` must be strictly increasing and below `dim`.
    pub fn new(active: Vec<usize>, dim: usize) -> Result<Self> {
        if active.windows(2).any(|w| w[0] >= w[1]) || active.last().is_some_and(|&i| i >= dim) {
            return Err(Error::Usage(format!("invalid active set {active:?} for dimension {dim}")));
        }
        Ok(Self { active, dim })
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `w . x` for a dense weight vector.
    #[inline]
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.active.iter().map(|&i| w[i]).sum()
    }
}

pub fn one_hot(state: usize, n_states: usize) -> Result<SparseFeatures> {
    if state >= n_states {
        return Err(Error::Usage(format!("state {state} out of range for {n_states} states")));
    }
    Ok(SparseFeatures { active: vec![state], dim: n_states })
}

/// Grid tile coding with a fixed asymmetric stagger.
///
/// Tiling `t` is displaced in dimension `d` by `((t (2d + 1)) mod n) / n` of
/// a tile width, where `n` is the number of tilings. Along the first
/// dimension this is the uniform stagger `t / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TileCoderDocument", into = "TileCoderDocument")]
pub struct TileCoderConfig {
    n_tilings: usize,
    tiles_per_dim: Vec<usize>,
    input_ranges: Vec<(f64, f64)>,
    /// `[tiling][dim]` displacement in normalised input units.
    offsets: Vec<Vec<f64>>,
    tiles_per_tiling: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TileCoderDocument {
    n_tilings: usize,
    tiles_per_dim: Vec<usize>,
    input_ranges: Vec<(f64, f64)>,
}

impl TryFrom<TileCoderDocument> for TileCoderConfig {
    type Error = Error;

    fn try_from(d: TileCoderDocument) -> Result<Self> {
        TileCoderConfig::new(d.n_tilings, d.tiles_per_dim, d.input_ranges)
    }
}

impl From<TileCoderConfig> for TileCoderDocument {
    fn from(c: TileCoderConfig) -> Self {
        TileCoderDocument { n_tilings: c.n_tilings, tiles_per_dim: c.tiles_per_dim, input_ranges: c.input_ranges }
    }
}

impl TileCoderConfig {
    /// A single entry in `tiles_per_dim` applies to every input dimension.
    pub fn new(n_tilings: usize, tiles_per_dim: Vec<usize>, input_ranges: Vec<(f64, f64)>) -> Result<Self> {
        let dims = input_ranges.len();
        let tiles_per_dim = match tiles_per_dim.as_slice() {
            [k] => vec![*k; dims],
            _ => tiles_per_dim,
        };
        if n_tilings == 0 || dims == 0 || tiles_per_dim.len() != dims || tiles_per_dim.contains(&0) {
            return Err(Error::Config(format!(
                "tile coder needs positive tilings and one positive tile count per dimension \
                 (got {n_tilings} tilings, {tiles_per_dim:?} tiles for {dims} dimensions)"
            )));
        }
        if let Some(d) = input_ranges.iter().position(|(lo, hi)| !(lo < hi)) {
            return Err(Error::Config(format!("input range {d} must have low < high")));
        }
        let offsets = (0..n_tilings)
            .map(|t| {
                tiles_per_dim
                    .iter()
                    .enumerate()
                    .map(|(d, &k)| ((t * (2 * d + 1)) % n_tilings) as f64 / (n_tilings * k) as f64)
                    .collect()
            })
            .collect();
        let tiles_per_tiling = tiles_per_dim.iter().product();
        Ok(Self { n_tilings, tiles_per_dim, input_ranges, offsets, tiles_per_tiling })
    }

    pub fn n_tilings(&self) -> usize {
        self.n_tilings
    }

    pub fn n_dims(&self) -> usize {
        self.input_ranges.len()
    }

    pub fn tiles_per_dim(&self) -> &[usize] {
        &self.tiles_per_dim
    }

    /// Width of one tile along dimension `d`, in input units.
    pub fn tile_width(&self, d: usize) -> f64 {
        let (lo, hi) = self.input_ranges[d];
        (hi - lo) / self.tiles_per_dim[d] as f64
    }

    pub fn offsets(&self) -> &[Vec<f64>] {
        &self.offsets
    }

    /// Total feature count, `n_tilings * prod(tiles_per_dim)`.
    pub fn total_dim(&self) -> usize {
        self.n_tilings * self.tiles_per_tiling
    }
}

/// Encodes `x` with exactly one active tile per tiling. Inputs outside the
/// configured ranges are clamped first.
pub fn tile_encode(cfg: &TileCoderConfig, x: &[f64]) -> Result<SparseFeatures> {
    if x.len() != cfg.n_dims() {
        return Err(Error::Usage(format!("expected {} inputs, got {}", cfg.n_dims(), x.len())));
    }
    let unit: Vec<f64> = x
        .iter()
        .zip(&cfg.input_ranges)
        .map(|(v, (lo, hi))| (v.clamp(*lo, *hi) - lo) / (hi - lo))
        .collect();
    let active = cfg
        .offsets
        .iter()
        .enumerate()
        .map(|(t, offsets)| {
            let mut index = 0;
            for ((u, off), &k) in unit.iter().zip(offsets).zip(&cfg.tiles_per_dim) {
                let tile = (((u + off) * k as f64).floor() as usize).min(k - 1);
                index = index * k + tile;
            }
            t * cfg.tiles_per_tiling + index
        })
        .collect();
    Ok(SparseFeatures { active, dim: cfg.total_dim() })
}
