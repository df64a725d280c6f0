//! Dense operator algebra on chains of n-level sites.
//!
//! Sites are numbered `1..=L` and site 1 is the most significant tensor
//! factor, so a basis index `i` of the full space decomposes as
//! `i = d_1 n^(L-1) + d_2 n^(L-2) + ... + d_L`. Generator indices are
//! 0-based (`alpha = 0` is the first generator).

use nalgebra::DMatrix;

use crate::error::invalid;
use crate::{CMatrix, Result, C64};

/// The `n^2 - 1` traceless Hermitian SU(n) generators, normalized so that
/// `Tr[σ_α σ_β] = 2 δ_αβ` on a single site.
///
/// Families are ordered symmetric, antisymmetric, diagonal (generalized
/// Gell-Mann). For `n = 2` this is `(σx, σy, σz)`.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    levels: usize,
    matrices: Vec<CMatrix>,
}

impl GeneratorSet {
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn get(&self, alpha: usize) -> Option<&CMatrix> {
        self.matrices.get(alpha)
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    /// Weighted sum `Σ_α coeff[α] σ_α` on one site.
    pub fn combine(&self, coeffs: &[f64]) -> CMatrix {
        let n = self.levels;
        let mut out = CMatrix::zeros(n, n);
        for (c, m) in coeffs.iter().zip(&self.matrices) {
            if *c != 0.0 {
                out += m * C64::from(*c);
            }
        }
        out
    }
}

/// Builds the generalized Gell-Mann generators for `n` levels.
pub fn build_generators(n: usize) -> Result<GeneratorSet> {
    if n < 2 {
        return Err(invalid(format!("generators need n >= 2, got {n}")));
    }
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let mut matrices = Vec::with_capacity(n * n - 1);

    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(j, k)] = one;
            m[(k, j)] = one;
            matrices.push(m);
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = CMatrix::zeros(n, n);
            m[(j, k)] = -i;
            m[(k, j)] = i;
            matrices.push(m);
        }
    }
    for l in 1..n {
        let scale = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(n, n);
        for d in 0..l {
            m[(d, d)] = C64::from(scale);
        }
        m[(l, l)] = C64::from(-(l as f64) * scale);
        matrices.push(m);
    }

    Ok(GeneratorSet { levels: n, matrices })
}

/// A Hermitian operator on the full space of an `L`-site chain.
#[derive(Clone, Debug)]
pub struct ChainOperator {
    sites: usize,
    levels: usize,
    matrix: CMatrix,
}

impl ChainOperator {
    pub fn new(sites: usize, levels: usize, matrix: CMatrix) -> Result<Self> {
        let dim = full_dim(levels, sites)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(invalid(format!(
                "matrix is {}x{}, expected {dim}x{dim} for n={levels}, L={sites}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(ChainOperator { sites, levels, matrix })
    }

    pub fn zeros(sites: usize, levels: usize) -> Result<Self> {
        let dim = full_dim(levels, sites)?;
        Ok(ChainOperator { sites, levels, matrix: CMatrix::zeros(dim, dim) })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &ChainOperator) -> C64 {
        trace_of_product(&self.matrix, &other.matrix)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    pub(crate) fn add_assign(&mut self, other: &ChainOperator) {
        self.matrix += &other.matrix;
    }
}

impl std::ops::Add for &ChainOperator {
    type Output = ChainOperator;

    fn add(self, rhs: &ChainOperator) -> ChainOperator {
        ChainOperator {
            sites: self.sites,
            levels: self.levels,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

pub(crate) fn full_dim(levels: usize, sites: usize) -> Result<usize> {
    if levels < 2 {
        return Err(invalid(format!("need n >= 2 levels per site, got {levels}")));
    }
    if sites == 0 {
        return Err(invalid("chain needs at least one site"));
    }
    u32::try_from(sites)
        .ok()
        .and_then(|s| levels.checked_pow(s))
        .ok_or_else(|| invalid(format!("n^L overflows for n={levels}, L={sites}")))
}

/// Periodic successor of a 1-based site.
pub fn successor(site: usize, sites: usize) -> usize {
    site % sites + 1
}

fn check_site(site: usize, sites: usize) -> Result<()> {
    if site == 0 || site > sites {
        return Err(invalid(format!("site {site} outside 1..={sites}")));
    }
    Ok(())
}

/// Embeds a single-site operator at `site` (1-based) into the full space.
pub fn embed_one_site(op: &CMatrix, site: usize, sites: usize, levels: usize) -> Result<ChainOperator> {
    check_site(site, sites)?;
    if op.nrows() != levels || op.ncols() != levels {
        return Err(invalid("single-site operator has wrong dimension"));
    }
    let dim = full_dim(levels, sites)?;
    let stride = levels.pow((sites - site) as u32);
    let mut out = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        let digit = (row / stride) % levels;
        let base = row - digit * stride;
        for d in 0..levels {
            let v = op[(digit, d)];
            if v != C64::default() {
                out[(row, base + d * stride)] += v;
            }
        }
    }
    ChainOperator::new(sites, levels, out)
}

/// Embeds a two-site operator acting on `(site_a, site_b)` into the full
/// space. `op` is indexed as `op[(a*n + b, a'*n + b')]`. The sites need not
/// be adjacent in the basis ordering.
pub fn embed_two_site(
    op: &CMatrix,
    site_a: usize,
    site_b: usize,
    sites: usize,
    levels: usize,
) -> Result<ChainOperator> {
    check_site(site_a, sites)?;
    check_site(site_b, sites)?;
    if site_a == site_b {
        return Err(invalid("two-site operator needs two distinct sites"));
    }
    let n = levels;
    if op.nrows() != n * n || op.ncols() != n * n {
        return Err(invalid("two-site operator has wrong dimension"));
    }
    let dim = full_dim(levels, sites)?;
    let stride_a = n.pow((sites - site_a) as u32);
    let stride_b = n.pow((sites - site_b) as u32);
    let mut out = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        let da = (row / stride_a) % n;
        let db = (row / stride_b) % n;
        let base = row - da * stride_a - db * stride_b;
        let r = da * n + db;
        for ca in 0..n {
            for cb in 0..n {
                let v = op[(r, ca * n + cb)];
                if v != C64::default() {
                    out[(row, base + ca * stride_a + cb * stride_b)] += v;
                }
            }
        }
    }
    ChainOperator::new(sites, levels, out)
}

/// `σ_alpha(site)` on an `L`-site chain.
pub fn embed_single(gens: &GeneratorSet, alpha: usize, site: usize, sites: usize) -> Result<ChainOperator> {
    let sigma = gens
        .get(alpha)
        .ok_or_else(|| invalid(format!("generator index {alpha} out of range 0..{}", gens.len())))?;
    embed_one_site(sigma, site, sites, gens.levels())
}

/// `σ_alpha(site) σ_beta(site + 1)` with periodic wraparound.
pub fn embed_pair(
    gens: &GeneratorSet,
    alpha: usize,
    beta: usize,
    site: usize,
    sites: usize,
) -> Result<ChainOperator> {
    check_site(site, sites)?;
    let (sa, sb) = match (gens.get(alpha), gens.get(beta)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(invalid(format!("generator index out of range 0..{}", gens.len()))),
    };
    let next = successor(site, sites);
    if next == site {
        return Err(invalid("pair embedding needs at least two sites"));
    }
    embed_two_site(&sa.kronecker(sb), site, next, sites, gens.levels())
}

/// Reduced matrix on the contiguous block of sites `keep` (1-based,
/// ascending, consecutive). All other sites are traced out.
pub fn partial_trace(matrix: &CMatrix, levels: usize, sites: usize, keep: &[usize]) -> Result<CMatrix> {
    let dim = full_dim(levels, sites)?;
    if matrix.nrows() != dim || matrix.ncols() != dim {
        return Err(invalid("matrix dimension does not match n^L"));
    }
    let (&first, &last) = match (keep.first(), keep.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(invalid("partial trace needs a nonempty keep set")),
    };
    for &s in keep {
        check_site(s, sites)?;
    }
    if keep.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(crate::Error::Unsupported(format!(
            "partial trace over non-contiguous keep set {keep:?}"
        )));
    }
    let left = levels.pow((first - 1) as u32);
    let mid = levels.pow((last - first + 1) as u32);
    let right = levels.pow((sites - last) as u32);

    let mut out = CMatrix::zeros(mid, mid);
    for l in 0..left {
        for r in 0..right {
            let offset = l * mid * right + r;
            for m1 in 0..mid {
                let row = offset + m1 * right;
                for m2 in 0..mid {
                    out[(m1, m2)] += matrix[(row, offset + m2 * right)];
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of a list of square factors, first factor most
/// significant.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// `Tr(a · b)` in `O(dim^2)`.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut acc = C64::default();
    for c in 0..a.ncols() {
        for r in 0..a.nrows() {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

/// `max |M - M^†|` relative to `max(1, max |M|)`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let mut worst = 0.0_f64;
    for c in 0..m.ncols() {
        for r in 0..=c.min(m.nrows().saturating_sub(1)) {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst / scale
}

/// `a · b` for dense complex matrices, assembled from four real products
/// (real GEMM is considerably faster than the generic complex kernel).
pub fn complex_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "complex_product: inner dimensions differ");
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, C64::new)
}

/// `a^† · b`.
pub fn adjoint_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    complex_product(&a.adjoint(), b)
}

/// Promotes a real matrix to complex.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(C64::from)
}
