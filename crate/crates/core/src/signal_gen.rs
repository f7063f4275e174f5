//! Synthetic data: Gaussian unit-norm dictionaries, the three sparsity
//! classes (homogeneous, random, hybrid), row-sparse signals and noise at a
//! prescribed SNR.
//!
//! Every generator is a pure function of its parameters and a `u64` seed.
//! Independent streams are derived with [`derive_seed`].

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{Dictionary, MeasurementSet};

const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

/// Total support size shared by every sparsity class.
pub const SUPPORT_SIZE: usize = 10;

/// SplitMix64 finalizer applied to a seed combined with a stream index.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        ^ stream
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0x632B_E59B_D9B4_E019);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SparsityClass {
    /// Two blocks of length 5.
    Homogeneous,
    /// Ten isolated components placed uniformly at random.
    Random,
    /// Blocks of lengths 4 and 3 plus three isolated components.
    Hybrid,
}

impl SparsityClass {
    pub const ALL: [SparsityClass; 3] = [
        SparsityClass::Homogeneous,
        SparsityClass::Random,
        SparsityClass::Hybrid,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            SparsityClass::Homogeneous => "homogeneous",
            SparsityClass::Random => "random",
            SparsityClass::Hybrid => "hybrid",
        }
    }

    pub fn block_lengths(&self) -> &'static [usize] {
        match self {
            SparsityClass::Homogeneous => &[5, 5],
            SparsityClass::Random => &[1; 10],
            SparsityClass::Hybrid => &[4, 3, 1, 1, 1],
        }
    }
}

impl fmt::Display for SparsityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.tag())
    }
}

impl FromStr for SparsityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "homogeneous" => Ok(SparsityClass::Homogeneous),
            "random" => Ok(SparsityClass::Random),
            "hybrid" => Ok(SparsityClass::Hybrid),
            other => Err(Error::InvalidInput(format!(
                "unknown sparsity class '{other}'"
            ))),
        }
    }
}

/// Disjoint blocks `(start, length)` sorted by start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    blocks: Vec<(usize, usize)>,
    n: usize,
}

impl SparsityPattern {
    pub fn new(mut blocks: Vec<(usize, usize)>, n: usize) -> Result<Self> {
        blocks.sort_unstable();
        for &(start, len) in &blocks {
            if len == 0 || start + len > n {
                return Err(Error::InvalidInput(format!(
                    "block ({start}, {len}) out of range for N = {n}"
                )));
            }
        }
        for w in blocks.windows(2) {
            if w[0].0 + w[0].1 > w[1].0 {
                return Err(Error::InvalidInput(format!(
                    "blocks {:?} and {:?} overlap",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { blocks, n })
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Sorted support indices.
    pub fn support(&self) -> Vec<usize> {
        self.blocks.iter().flat_map(|&(s, l)| s..s + l).collect()
    }

    pub fn support_size(&self) -> usize {
        self.blocks.iter().map(|b| b.1).sum()
    }
}

/// Row-sparse signal ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// N × L.
    pub x: DMatrix<f64>,
    pub support: Vec<usize>,
    pub pattern: SparsityPattern,
}

/// i.i.d. standard normal entries, columns scaled to unit norm.
pub fn gen_dictionary(m: usize, n: usize, seed: u64) -> Result<Dictionary> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput(
            "dictionary dimensions must be positive".into(),
        ));
    }
    let mut rng = rng(seed);
    let mut a = DMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
    for mut col in a.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        } else {
            // probability zero, but keep the unit-norm contract
            col[0] = 1.0;
        }
    }
    Dictionary::new(a)
}

/// Places the class's blocks uniformly at random among the admissible
/// placements. Homogeneous and hybrid blocks never touch each other; the
/// random class draws ten distinct indices.
pub fn gen_pattern(class: SparsityClass, n: usize, seed: u64) -> Result<SparsityPattern> {
    if n < 20 {
        return Err(Error::InvalidInput(format!("need N >= 20, got {n}")));
    }
    let mut rng = rng(seed);
    if class == SparsityClass::Random {
        let idx = rand::seq::index::sample(&mut rng, n, SUPPORT_SIZE);
        let blocks = idx.into_iter().map(|i| (i, 1)).collect();
        return SparsityPattern::new(blocks, n);
    }
    let lengths = class.block_lengths();
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let mut blocks: Vec<(usize, usize)> = lengths
            .iter()
            .map(|&len| (rng.random_range(0..=n - len), len))
            .collect();
        blocks.sort_unstable();
        // at least one zero row between consecutive blocks
        if blocks.windows(2).all(|w| w[0].0 + w[0].1 < w[1].0) {
            return SparsityPattern::new(blocks, n);
        }
    }
    Err(Error::Placement {
        lengths: lengths.to_vec(),
        n,
        attempts: MAX_PLACEMENT_ATTEMPTS,
    })
}

/// Support rows drawn i.i.d. `N(0, 1/K)`, shared across all `l` snapshots.
pub fn gen_signals(
    pattern: &SparsityPattern,
    l: usize,
    k: usize,
    seed: u64,
) -> Result<GroundTruth> {
    if l == 0 {
        return Err(Error::InvalidInput("need at least one snapshot".into()));
    }
    if k != pattern.support_size() {
        return Err(Error::InvalidInput(format!(
            "K = {k} but the pattern has {} support rows",
            pattern.support_size()
        )));
    }
    let mut rng = rng(seed);
    let normal = Normal::new(0.0, (1.0 / k as f64).sqrt()).expect("positive variance");
    let support = pattern.support();
    let mut x = DMatrix::zeros(pattern.n(), l);
    for &i in &support {
        for j in 0..l {
            x[(i, j)] = normal.sample(&mut rng);
        }
    }
    Ok(GroundTruth {
        x,
        support,
        pattern: pattern.clone(),
    })
}

/// Per-component noise variance giving `snr_db` in expectation:
/// `λ = E‖Ax‖² / (M·10^{snr/10})` with `E‖Ax‖² = Σ_{i∈supp}‖aᵢ‖²/K`.
pub fn noise_variance_for(a: &Dictionary, support: &[usize], snr_db: f64) -> Result<f64> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidInput(format!(
            "SNR must be finite, got {snr_db}"
        )));
    }
    if support.is_empty() {
        return Err(Error::InvalidInput(
            "empty support has no signal power".into(),
        ));
    }
    let k = support.len() as f64;
    let norms = a.column_norms();
    let power: f64 = support.iter().map(|&i| norms[i] * norms[i]).sum::<f64>() / k;
    Ok(power / (a.rows() as f64 * 10f64.powf(snr_db / 10.0)))
}

/// `Y = AX + N` with i.i.d. `N(0, λ)` noise and λ from [`noise_variance_for`].
pub fn add_noise(
    a: &Dictionary,
    truth: &GroundTruth,
    snr_db: f64,
    seed: u64,
) -> Result<MeasurementSet> {
    if truth.x.nrows() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "signal has {} rows, dictionary has {} columns",
            truth.x.nrows(),
            a.cols()
        )));
    }
    let lambda = noise_variance_for(a, &truth.support, snr_db)?;
    let mut rng = rng(seed);
    let normal = Normal::new(0.0, lambda.sqrt()).expect("positive variance");
    let noise = DMatrix::from_fn(a.rows(), truth.x.ncols(), |_, _| normal.sample(&mut rng));
    MeasurementSet::new(a.matrix() * &truth.x + noise, lambda)
}

/// Everything one Monte Carlo trial needs.
#[derive(Debug, Clone)]
pub struct Trial {
    pub dictionary: Dictionary,
    pub truth: GroundTruth,
    pub measurements: MeasurementSet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSpec {
    pub class: SparsityClass,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub k: usize,
    pub snr_db: f64,
}

impl TrialSpec {
    /// The reference setup: N = 150, M = 20, L = 5, K = 10.
    pub fn reference(class: SparsityClass, snr_db: f64) -> Self {
        Self {
            class,
            n: 150,
            m: 20,
            l: 5,
            k: SUPPORT_SIZE,
            snr_db,
        }
    }

    /// Draws a full trial. The dictionary, pattern and signal depend only on
    /// `data_seed`; the noise only on `noise_seed`.
    pub fn generate(&self, data_seed: u64, noise_seed: u64) -> Result<Trial> {
        let dictionary = gen_dictionary(self.m, self.n, derive_seed(data_seed, 1))?;
        self.generate_with(dictionary, data_seed, noise_seed)
    }

    /// Same as [`TrialSpec::generate`] with a caller-supplied dictionary.
    pub fn generate_with(
        &self,
        dictionary: Dictionary,
        data_seed: u64,
        noise_seed: u64,
    ) -> Result<Trial> {
        let pattern = gen_pattern(self.class, self.n, derive_seed(data_seed, 2))?;
        let truth = gen_signals(&pattern, self.l, self.k, derive_seed(data_seed, 3))?;
        let measurements = add_noise(&dictionary, &truth, self.snr_db, noise_seed)?;
        Ok(Trial {
            dictionary,
            truth,
            measurements,
        })
    }
}
