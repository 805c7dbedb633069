//! Operator families at finite truncation.
//!
//! Each family describes an operator on `ℓ²` (or a synthetic finite one) and
//! yields its leading `m x m` block. The entrywise families (Seidman, Du) are
//! nested: `truncate(m')` is the leading block of `truncate(m)` for `m' ≤ m`.
//!
//! Truncation error:
//!
//! * Seidman: exact on `span{e¹…eᵐ}` columns; `T*T` loses the tail
//!   `Σ_{k>m} (α_k β_k)²` in its `(1,1)` coupling, `O(m⁻³)`.
//! * Du: `e` is cut at `m` and not renormalized, so `‖ẽ‖² = 1 − 4⁻ᵐ` and the
//!   truncated `I − ẽẽᵀ` is a projector only up to `O(4⁻ᵐ)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{complete_orthonormal, householder_qr, DenseMatrix, DenseVector, LinalgError, Subspace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GalleryError {
    #[error("truncation size must be at least 1")]
    EmptyTruncation,
    #[error("{what} needs dimension {needed} but truncation is {m}")]
    DimensionOverflow {
        what: &'static str,
        needed: usize,
        m: usize,
    },
    #[error("invalid singular system: {0}")]
    InvalidSingularSystem(String),
    #[error("unknown operator family {0:?}; known: identity, seidman, du, best-lpa, random")]
    UnknownFamily(String),
    #[error("invalid truncation rule {0:?}; expected \"auto\", \"factor:<k>\" or \"fixed:<m>\"")]
    InvalidTruncationRule(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `α_k` of Seidman's operator, 1-based: `1/k` for odd `k`, `1/k³` for even.
pub fn seidman_alpha(k: usize) -> f64 {
    let kf = k as f64;
    if k % 2 == 1 {
        1.0 / kf
    } else {
        1.0 / (kf * kf * kf)
    }
}

/// `β_k` of Seidman's operator, 1-based: `0` for `k = 1`, `1/k` after.
pub fn seidman_beta(k: usize) -> f64 {
    if k == 1 {
        0.0
    } else {
        1.0 / k as f64
    }
}

/// Leading `m x m` block of `Tx = Σ (α_k ξ_k + β_k ξ_1) eᵏ`.
///
/// Diagonal `α_k`; the first column carries the `β_k` coupling to `ξ_1`.
pub fn seidman(m: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m, m, |i, j| {
        let k = i + 1;
        let mut v = if i == j { seidman_alpha(k) } else { 0.0 };
        if j == 0 {
            v += seidman_beta(k);
        }
        v
    })
}

/// Leading `m x m` block of `Tx = x − ⟨x, e⟩e`: entries `δ_ij − 3/2^{i+j}` (1-based).
pub fn du(m: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m, m, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - 3.0 * 2f64.powi(-((i + j + 2) as i32))
    })
}

/// `e` cut at `m`: entries `√3 / 2ᵏ`, not renormalized.
pub fn du_vector_e(m: usize) -> DenseVector {
    let r3 = 3f64.sqrt();
    DenseVector::from_vec((1..=m).map(|k| r3 * 2f64.powi(-(k as i32))).collect())
}

/// The right-hand side `y_k = (2ᵏ − 1)√3 / 4ᵏ` for which `Tₙ†y` stays bounded
/// but does not converge weakly to `T†y`.
pub fn du_bad_y(m: usize) -> DenseVector {
    let r3 = 3f64.sqrt();
    DenseVector::from_vec(
        (1..=m)
            .map(|k| {
                let k = k as i32;
                // (2ᵏ − 1)/4ᵏ = 2⁻ᵏ − 4⁻ᵏ, both exact powers of two.
                r3 * (2f64.powi(-k) - 4f64.powi(-k))
            })
            .collect(),
    )
}

/// Positive singular values (nonincreasing, with multiplicity) plus the
/// dimension of the kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSystem {
    sigmas: Vec<f64>,
    kernel_dim: usize,
}

impl SingularSystem {
    pub fn new(sigmas: Vec<f64>, kernel_dim: usize) -> Result<Self, GalleryError> {
        if sigmas.is_empty() {
            return Err(GalleryError::InvalidSingularSystem("no singular values".into()));
        }
        if let Some(s) = sigmas.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(GalleryError::InvalidSingularSystem(format!(
                "singular value {s} is not positive and finite"
            )));
        }
        if sigmas.windows(2).any(|w| w[1] > w[0]) {
            return Err(GalleryError::InvalidSingularSystem(
                "singular values must be nonincreasing".into(),
            ));
        }
        Ok(Self { sigmas, kernel_dim })
    }

    /// `σ_k = 1/k²` for `k = 1..=count`.
    pub fn inverse_squares(count: usize, kernel_dim: usize) -> Result<Self, GalleryError> {
        Self::new(
            (1..=count).map(|k| 1.0 / (k * k) as f64).collect(),
            kernel_dim,
        )
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    /// Dimension of the domain, `len(σ) + kernel_dim`.
    pub fn domain_dim(&self) -> usize {
        self.sigmas.len() + self.kernel_dim
    }
}

/// `K = U·diag(σ, 0)·Vᵀ` together with its singular vectors.
#[derive(Clone, Debug)]
pub struct SingularSystemOperator {
    /// `m x (len(σ) + kernel_dim)`.
    pub matrix: DenseMatrix,
    /// Right singular vectors `v_k` as columns.
    pub v_basis: DenseMatrix,
    /// Left singular vectors `u_k = K v_k / σ_k` as columns.
    pub u_basis: DenseMatrix,
    /// Orthonormal basis of the planted kernel.
    pub kernel: Subspace,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-distributed orthogonal matrix: QR of a standard-normal matrix with
/// the diagonal of R made positive.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    householder_qr(&gaussian_matrix(n, n, rng)).0
}

/// Orthonormal `rows x cols` frame (`cols ≤ rows`), first columns of a Haar orthogonal matrix.
pub fn random_frame(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix {
    let (q, _) = householder_qr(&gaussian_matrix(rows, cols, rng));
    q.columns(0..cols)
}

/// Builds `K: ℝ^{len(σ)+kernel_dim} → ℝᵐ` from a singular system with
/// random orthogonal singular vectors. `V` depends only on `seed` and the
/// domain dimension, so `Xₙ` built from it is the same for every `m`.
pub fn from_singular_system(
    sys: &SingularSystem,
    m: usize,
    seed: u64,
) -> Result<SingularSystemOperator, GalleryError> {
    let r = sys.sigmas.len();
    let cols = sys.domain_dim();
    if cols > m {
        return Err(GalleryError::DimensionOverflow {
            what: "singular system",
            needed: cols,
            m,
        });
    }
    let v = random_orthogonal(cols, &mut rng_for(seed, 0));
    let u = random_frame(m, r, &mut rng_for(seed, 1));
    let v_basis = v.columns(0..r);
    let scaled = DenseMatrix::from_fn(m, r, |i, k| u.get(i, k) * sys.sigmas[k]);
    let matrix = scaled.matmul(&v_basis.transpose());
    let kernel = Subspace::new(v.columns(r..cols))?;
    Ok(SingularSystemOperator {
        matrix,
        v_basis,
        u_basis: u,
        kernel,
    })
}

/// A random operator with a planted kernel.
#[derive(Clone, Debug)]
pub struct PlantedKernelOperator {
    pub matrix: DenseMatrix,
    pub kernel: Subspace,
}

/// Smallest nonzero singular value of the random finite-kernel operators.
pub const RANDOM_SIGMA_MIN: f64 = 0.1;
const RANDOM_SIGMA_MAX: f64 = 1.0;

/// `m x m` operator with exactly `kernel_dim` null directions and nonzero
/// singular values drawn uniformly from `[0.1, 1]`.
///
/// With `support = Some(s)` the kernel lies inside `span{e¹…eˢ}`.
pub fn random_finite_kernel_planted(
    m: usize,
    kernel_dim: usize,
    support: Option<usize>,
    seed: u64,
) -> Result<PlantedKernelOperator, GalleryError> {
    if m == 0 {
        return Err(GalleryError::EmptyTruncation);
    }
    if kernel_dim >= m {
        return Err(GalleryError::DimensionOverflow {
            what: "random_finite_kernel kernel (needs kernel_dim < m)",
            needed: kernel_dim + 1,
            m,
        });
    }
    let support = support.unwrap_or(m);
    if support < kernel_dim || support > m {
        return Err(GalleryError::DimensionOverflow {
            what: "random_finite_kernel kernel support",
            needed: support.max(kernel_dim),
            m,
        });
    }
    let mut rng = rng_for(seed, 0);
    let local = random_frame(support, kernel_dim, &mut rng);
    let kernel_basis =
        DenseMatrix::from_fn(m, kernel_dim, |i, j| if i < support { local.get(i, j) } else { 0.0 });
    let complement = complete_orthonormal(&kernel_basis).columns(kernel_dim..m);
    let rank = m - kernel_dim;
    let mix = random_orthogonal(rank, &mut rng);
    let row_space = complement.matmul(&mix);
    let left = random_frame(m, rank, &mut rng);
    let sigmas: Vec<f64> = (0..rank)
        .map(|_| rng.random_range(RANDOM_SIGMA_MIN..=RANDOM_SIGMA_MAX))
        .collect();
    let scaled = DenseMatrix::from_fn(m, rank, |i, k| left.get(i, k) * sigmas[k]);
    Ok(PlantedKernelOperator {
        matrix: scaled.matmul(&row_space.transpose()),
        kernel: Subspace::new(kernel_basis)?,
    })
}

pub fn random_finite_kernel(m: usize, kernel_dim: usize, seed: u64) -> Result<DenseMatrix, GalleryError> {
    Ok(random_finite_kernel_planted(m, kernel_dim, None, seed)?.matrix)
}

/// `I + strength·S` with `S = (G − Gᵀ)/2` for a standard-normal `G`.
/// The symmetric part is `I`, so `⟨Tu, u⟩ = ‖u‖²`.
pub fn identity_plus_skew(m: usize, strength: f64, seed: u64) -> DenseMatrix {
    let g = gaussian_matrix(m, m, &mut rng_for(seed, 0));
    DenseMatrix::from_fn(m, m, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta + strength * 0.5 * (g.get(i, j) - g.get(j, i))
    })
}

/// `I + strength·N` with `N` the nilpotent upper shift.
pub fn identity_plus_shift(m: usize, strength: f64) -> DenseMatrix {
    DenseMatrix::from_fn(m, m, |i, j| {
        if i == j {
            1.0
        } else if j == i + 1 {
            strength
        } else {
            0.0
        }
    })
}

/// How the ambient truncation `m` is chosen for subspace index `n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Truncation {
    /// `m = max(4n, n + 32)`.
    #[default]
    Auto,
    /// `m = k·n`.
    Factor(usize),
    /// The same `m` for every `n`.
    Fixed(usize),
}

impl Truncation {
    pub fn m_for(self, n: usize) -> usize {
        match self {
            Truncation::Auto => (4 * n).max(n + 32),
            Truncation::Factor(k) => k * n,
            Truncation::Fixed(m) => m,
        }
    }
}

impl FromStr for Truncation {
    type Err = GalleryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GalleryError::InvalidTruncationRule(s.to_string());
        let s = s.trim();
        if s == "auto" {
            return Ok(Truncation::Auto);
        }
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let value: usize = value.trim().parse().map_err(|_| bad())?;
        if value == 0 {
            return Err(bad());
        }
        match kind.trim() {
            "factor" => Ok(Truncation::Factor(value)),
            "fixed" => Ok(Truncation::Fixed(value)),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for Truncation {
    type Error = GalleryError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Truncation> for String {
    fn from(t: Truncation) -> Self {
        t.to_string()
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truncation::Auto => write!(f, "auto"),
            Truncation::Factor(k) => write!(f, "factor:{k}"),
            Truncation::Fixed(m) => write!(f, "fixed:{m}"),
        }
    }
}

/// An operator family addressable by name.
#[derive(Clone, Debug)]
pub enum OperatorFamily {
    Identity,
    Seidman,
    Du,
    /// Best LPA: `Xₙ = N(K) + span{v₁…vₙ}` from a singular system.
    BestLpa { system: SingularSystem, seed: u64 },
    /// Random operator with a planted finite kernel, regenerated at each `m`
    /// from the same seed.
    Random {
        kernel_dim: usize,
        kernel_support: Option<usize>,
        seed: u64,
    },
    /// A fixed matrix; `truncate` ignores `m` beyond checking it.
    Explicit { name: String, matrix: DenseMatrix },
}

/// One line of the `gallery` listing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub parameters: &'static str,
    pub provenance: &'static str,
}

pub const CATALOG: &[GalleryEntry] = &[
    GalleryEntry {
        name: "identity",
        parameters: "(none)",
        provenance: "T = I; every LPA converges with theta_n = 0",
    },
    GalleryEntry {
        name: "seidman",
        parameters: "(none)",
        provenance: "Seidman's compact injective operator, alpha_j = 1/j (odd) or 1/j^3 (even), beta_j = 1/j (j > 1) coupled to xi_1; kernel approximable, sup theta_n = pi/2",
    },
    GalleryEntry {
        name: "du",
        parameters: "(none)",
        provenance: "Du's projection T x = x - <x, e> e with e_k = sqrt(3)/2^k; theta_n = 0 but N(T) ∩ X_n = {0}",
    },
    GalleryEntry {
        name: "best-lpa",
        parameters: "sigmas: [f64] (or sigma_count for 1/k^2), kernel_dim, seed",
        provenance: "singular system K v_k = sigma_k u_k with X_n = N(K) + span{v_1..v_n}; theta_n = 0 and K_n^+ = P_{X_n} K^+",
    },
    GalleryEntry {
        name: "random",
        parameters: "kernel_dim, kernel_support (optional), seed",
        provenance: "random operator with planted finite kernel, nonzero singular values in [0.1, 1]",
    },
];

impl OperatorFamily {
    /// Family with default parameters for a bare name.
    pub fn by_name(name: &str) -> Result<Self, GalleryError> {
        match name {
            "identity" => Ok(Self::Identity),
            "seidman" => Ok(Self::Seidman),
            "du" => Ok(Self::Du),
            "best-lpa" => Ok(Self::BestLpa {
                system: SingularSystem::inverse_squares(12, 2)?,
                seed: 0,
            }),
            "random" => Ok(Self::Random {
                kernel_dim: 2,
                kernel_support: None,
                seed: 0,
            }),
            other => Err(GalleryError::UnknownFamily(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Identity => "identity",
            Self::Seidman => "seidman",
            Self::Du => "du",
            Self::BestLpa { .. } => "best-lpa",
            Self::Random { .. } => "random",
            Self::Explicit { name, .. } => name,
        }
    }

    pub fn kernel_dim_hint(&self) -> Option<usize> {
        match self {
            Self::Identity | Self::Seidman => Some(0),
            Self::Du => Some(1),
            Self::BestLpa { system, .. } => Some(system.kernel_dim),
            Self::Random { kernel_dim, .. } => Some(*kernel_dim),
            Self::Explicit { .. } => None,
        }
    }

    pub fn notes(&self) -> &'static str {
        match self {
            Self::Identity => "exact at every truncation",
            Self::Seidman => "exact on span{e1..em}; T*T misses the O(m^-3) tail of the e1 coupling",
            Self::Du => "e truncated, not renormalized: |e|^2 = 1 - 4^-m, truncated T is a projector up to O(4^-m)",
            Self::BestLpa { .. } => "finite singular system; no truncation error",
            Self::Random { .. } => "finite synthetic operator; no truncation error",
            Self::Explicit { .. } => "fixed matrix",
        }
    }

    /// The truncated operator at ambient size `m`. For `BestLpa` the result
    /// is `m x (len(σ) + kernel_dim)`; all others are `m x m`.
    pub fn truncate(&self, m: usize) -> Result<DenseMatrix, GalleryError> {
        if m == 0 {
            return Err(GalleryError::EmptyTruncation);
        }
        match self {
            Self::Identity => Ok(DenseMatrix::identity(m)),
            Self::Seidman => Ok(seidman(m)),
            Self::Du => Ok(du(m)),
            Self::BestLpa { system, seed } => Ok(from_singular_system(system, m, *seed)?.matrix),
            Self::Random {
                kernel_dim,
                kernel_support,
                seed,
            } => Ok(random_finite_kernel_planted(m, *kernel_dim, *kernel_support, *seed)?.matrix),
            Self::Explicit { matrix, .. } => {
                if matrix.rows() != m {
                    return Err(GalleryError::DimensionOverflow {
                        what: "explicit operator (rows must equal m)",
                        needed: matrix.rows(),
                        m,
                    });
                }
                Ok(matrix.clone())
            }
        }
    }

    /// The subspace `Xₙ` at truncation `m`: coordinate `span{e¹…eⁿ}` except for
    /// `BestLpa`, where it is `N(K) + span{v₁…vₙ}`.
    pub fn subspace(&self, n: usize, m: usize) -> Result<Subspace, GalleryError> {
        match self {
            Self::BestLpa { system, seed } => {
                if n > system.sigmas.len() {
                    return Err(GalleryError::DimensionOverflow {
                        what: "best-lpa subspace index (n <= number of singular values)",
                        needed: n,
                        m: system.sigmas.len(),
                    });
                }
                let op = from_singular_system(system, m, *seed)?;
                let basis = op.kernel.basis().hstack(&op.v_basis.columns(0..n))?;
                Ok(Subspace::new(basis)?)
            }
            Self::Explicit { matrix, .. } => coordinate(matrix.cols(), n),
            _ => coordinate(m, n),
        }
    }
}

fn coordinate(ambient: usize, n: usize) -> Result<Subspace, GalleryError> {
    if n > ambient {
        return Err(GalleryError::DimensionOverflow {
            what: "coordinate subspace",
            needed: n,
            m: ambient,
        });
    }
    Ok(Subspace::coordinate(ambient, n))
}
