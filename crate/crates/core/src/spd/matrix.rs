//! Validated Hermitian and positive definite matrices with an eigendecomposition
//! cache, and the functional calculus built on top of it.
//!
//! Every matrix function goes through the unitary eigendecomposition
//! `A = U diag(λ) U*`, so `f(A) = U diag(f(λ)) U*`. Results of spectral maps keep
//! the eigenvectors they were built from, which makes chains such as
//! `A.sqrt().log()` cost a single decomposition.

use std::sync::{Arc, OnceLock};

use nalgebra::{Complex, DMatrix, Schur, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Default relative tolerance for the Hermitian check on external input.
pub const DEFAULT_HERM_TOL: f64 = 1e-10;

/// Spectral decomposition of a Hermitian matrix. Eigenvalues ascend.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    fn compute(m: &CMatrix) -> Eigh {
        let n = m.nrows();
        let dec = SymmetricEigen::new(m.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| dec.eigenvalues[a].total_cmp(&dec.eigenvalues[b]));
        let values = order.iter().map(|&i| dec.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| dec.eigenvectors[(r, order[c])]);
        Eigh { values, vectors }
    }

    /// `U diag(f(λ)) U*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let fl = C64::from(f(lambda));
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fl);
        }
        hermitian_part(&(scaled * self.vectors.adjoint()))
    }

    pub(crate) fn mapped(&self, f: impl Fn(f64) -> f64) -> Eigh {
        let n = self.values.len();
        let raw: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
        Eigh { values: order.iter().map(|&i| raw[i]).collect(), vectors: CMatrix::from_fn(n, n, |r, c| self.vectors[(r, order[c])]) }
    }
}

/// `(M + M*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain("matrix has non-finite entries".into()))
    }
}

/// Hermitian matrix; the spectrum may have any sign.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    mat: CMatrix,
    eig: OnceLock<Arc<Eigh>>,
}

impl HermitianMatrix {
    /// Accepts `raw` when `max|M - M*| <= herm_tol * max|M|` and stores `(M + M*)/2`.
    pub fn new(raw: CMatrix, herm_tol: f64) -> Result<Self> {
        check_square(&raw)?;
        check_finite(&raw)?;
        let asymmetry = max_abs(&(&raw - raw.adjoint()));
        let tolerance = herm_tol * max_abs(&raw);
        if asymmetry > tolerance {
            return Err(Error::NotHermitian { asymmetry, tolerance });
        }
        Ok(Self::from_computed(raw))
    }

    /// Symmetrizes the output of an internal computation without the asymmetry check.
    pub(crate) fn from_computed(raw: CMatrix) -> Self {
        HermitianMatrix { mat: hermitian_part(&raw), eig: OnceLock::new() }
    }

    fn from_eigh(eigh: Eigh) -> Self {
        let mat = eigh.map(|l| l);
        let cell = OnceLock::new();
        let _ = cell.set(Arc::new(eigh));
        HermitianMatrix { mat, eig: cell }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_computed(CMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn eigh(&self) -> &Eigh {
        self.eig.get_or_init(|| Arc::new(Eigh::compute(&self.mat)))
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigh().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("nonempty")
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn exp(&self) -> Result<SpdMatrix> {
        SpdMatrix::from_eigh(self.eigh().mapped(f64::exp))
    }

    pub fn scaled(&self, alpha: f64) -> HermitianMatrix {
        Self::from_computed(self.mat.map(|z| z * alpha))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }
}

impl std::ops::Add<&HermitianMatrix> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix::from_computed(&self.mat + &rhs.mat)
    }
}

impl std::ops::Sub<&HermitianMatrix> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix::from_computed(&self.mat - &rhs.mat)
    }
}

/// Hermitian positive definite matrix. The smallest computed eigenvalue is
/// strictly positive; no epsilon floor is applied.
#[derive(Debug, Clone)]
pub struct SpdMatrix(HermitianMatrix);

impl AsRef<HermitianMatrix> for SpdMatrix {
    fn as_ref(&self) -> &HermitianMatrix {
        &self.0
    }
}

impl AsRef<HermitianMatrix> for HermitianMatrix {
    fn as_ref(&self) -> &HermitianMatrix {
        self
    }
}

/// Validates `raw` as a Hermitian positive definite matrix. See [`SpdMatrix::new`].
pub fn validate_spd(raw: &CMatrix, herm_tol: f64) -> Result<SpdMatrix> {
    SpdMatrix::new(raw.clone(), herm_tol)
}

impl SpdMatrix {
    pub fn new(raw: CMatrix, herm_tol: f64) -> Result<Self> {
        Self::from_hermitian(HermitianMatrix::new(raw, herm_tol)?)
    }

    pub fn from_hermitian(h: HermitianMatrix) -> Result<Self> {
        let min_eigenvalue = h.min_eigenvalue();
        if min_eigenvalue > 0.0 {
            Ok(SpdMatrix(h))
        } else {
            Err(Error::NotPositiveDefinite { min_eigenvalue })
        }
    }

    /// Symmetrizes and checks positivity of an internally computed matrix.
    pub(crate) fn from_computed(raw: CMatrix) -> Result<Self> {
        check_finite(&raw)?;
        Self::from_hermitian(HermitianMatrix::from_computed(raw))
    }

    pub(crate) fn from_eigh(eigh: Eigh) -> Result<Self> {
        let min = eigh.values[0];
        if !(min > 0.0) || !eigh.values.iter().all(|v| v.is_finite()) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        Ok(SpdMatrix(HermitianMatrix::from_eigh(eigh)))
    }

    /// Builds `U diag(values) U*` for a unitary `U`.
    pub fn from_spectrum(vectors: CMatrix, values: &[f64]) -> Result<Self> {
        if vectors.nrows() != values.len() || vectors.ncols() != values.len() {
            return Err(Error::DimensionMismatch { expected: values.len(), found: vectors.nrows() });
        }
        Self::from_computed(Eigh { values: values.to_vec(), vectors }.map(|l| l))
    }

    pub fn identity(n: usize) -> Self {
        SpdMatrix::from_diagonal(&vec![1.0; n]).expect("identity is positive definite")
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_computed(CMatrix::from_fn(n, n, |i, j| if i == j { C64::from(diag[i]) } else { C64::from(0.0) }))
    }

    /// Real symmetric input given row-major.
    pub fn from_real_rows(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        let raw = CMatrix::from_fn(n, n, |i, j| C64::from(data[i * n + j]));
        Self::new(raw, DEFAULT_HERM_TOL)
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.0.matrix()
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0.into_matrix()
    }

    pub fn eigh(&self) -> &Eigh {
        self.0.eigh()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        self.0.eigenvalues()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.min_eigenvalue()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.0.max_eigenvalue()
    }

    pub fn condition_number(&self) -> f64 {
        self.max_eigenvalue() / self.min_eigenvalue()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    pub fn log_det(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.ln()).sum()
    }

    pub fn det(&self) -> f64 {
        self.log_det().exp()
    }

    pub fn powf(&self, p: f64) -> SpdMatrix {
        if p == 1.0 {
            return self.clone();
        }
        SpdMatrix::from_eigh(self.eigh().mapped(|l| l.powf(p))).expect("powers of a positive spectrum are positive")
    }

    pub fn sqrt(&self) -> SpdMatrix {
        SpdMatrix::from_eigh(self.eigh().mapped(f64::sqrt)).expect("positive spectrum")
    }

    pub fn inv_sqrt(&self) -> SpdMatrix {
        SpdMatrix::from_eigh(self.eigh().mapped(|l| 1.0 / l.sqrt())).expect("positive spectrum")
    }

    pub fn inverse(&self) -> SpdMatrix {
        SpdMatrix::from_eigh(self.eigh().mapped(|l| 1.0 / l)).expect("positive spectrum")
    }

    pub fn log(&self) -> HermitianMatrix {
        HermitianMatrix::from_eigh(self.eigh().mapped(f64::ln))
    }

    /// `X A X*`.
    pub fn congruence(&self, x: &CMatrix) -> Result<SpdMatrix> {
        if x.nrows() != self.dim() || x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.nrows() });
        }
        SpdMatrix::from_computed(x * self.matrix() * x.adjoint())
    }

    /// `S A S` for Hermitian `S`, as used by whitening `A^{-1/2} B A^{-1/2}`.
    pub fn sandwich(&self, outer: &SpdMatrix) -> Result<SpdMatrix> {
        ensure_same_dim(self, outer)?;
        SpdMatrix::from_computed(outer.matrix() * self.matrix() * outer.matrix())
    }

    pub fn scaled(&self, alpha: f64) -> Result<SpdMatrix> {
        if !(alpha > 0.0) {
            return Err(Error::BadParameter(format!("scale factor {alpha} must be positive")));
        }
        SpdMatrix::from_eigh(self.eigh().mapped(|l| l * alpha))
    }

    pub fn apply(&self, f: MatrixFunction) -> Result<FunctionValue> {
        hermitian_function(self, f)
    }
}

pub(crate) fn ensure_same_dim(a: &SpdMatrix, b: &SpdMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// Scalar functions lifted to Hermitian matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFunction {
    Power(f64),
    Log,
    Exp,
    Sqrt,
}

/// Result of [`hermitian_function`]: positive definite when the function maps the
/// spectrum into `(0, ∞)`.
#[derive(Debug, Clone)]
pub enum FunctionValue {
    Spd(SpdMatrix),
    Hermitian(HermitianMatrix),
}

impl FunctionValue {
    pub fn matrix(&self) -> &CMatrix {
        match self {
            FunctionValue::Spd(s) => s.matrix(),
            FunctionValue::Hermitian(h) => h.matrix(),
        }
    }

    pub fn into_spd(self) -> Option<SpdMatrix> {
        match self {
            FunctionValue::Spd(s) => Some(s),
            FunctionValue::Hermitian(_) => None,
        }
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        match self {
            FunctionValue::Spd(s) => s.into_hermitian(),
            FunctionValue::Hermitian(h) => h,
        }
    }
}

pub fn hermitian_function(a: impl AsRef<HermitianMatrix>, f: MatrixFunction) -> Result<FunctionValue> {
    let h = a.as_ref();
    if let MatrixFunction::Exp = f {
        return Ok(FunctionValue::Spd(h.exp()?));
    }
    if !h.is_positive_definite() {
        return Err(Error::Domain(format!("{f:?} requires a positive definite argument (smallest eigenvalue {:.3e})", h.min_eigenvalue())));
    }
    let spd = SpdMatrix(h.clone());
    Ok(match f {
        MatrixFunction::Power(p) => FunctionValue::Spd(spd.powf(p)),
        MatrixFunction::Sqrt => FunctionValue::Spd(spd.sqrt()),
        MatrixFunction::Log => FunctionValue::Hermitian(spd.log()),
        MatrixFunction::Exp => unreachable!(),
    })
}

/// Square matrix with no structure assumed, e.g. `(AB)^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralMatrix(CMatrix);

impl GeneralMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        Ok(GeneralMatrix(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> GeneralMatrix {
        GeneralMatrix(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Eigenvalues from the complex Schur form, unordered.
    pub fn eigenvalues(&self) -> Vec<C64> {
        let (_, t) = Schur::new(self.0.clone()).unpack();
        t.diagonal().iter().copied().collect()
    }
}

/// `(AB)^{1/2}` with positive spectrum, via `A^{1/2} (A^{1/2} B A^{1/2})^{1/2} A^{-1/2}`.
pub fn product_sqrt(a: &SpdMatrix, b: &SpdMatrix) -> Result<GeneralMatrix> {
    ensure_same_dim(a, b)?;
    let a_half = a.sqrt();
    let inner = b.sandwich(&a_half)?.sqrt();
    Ok(GeneralMatrix(a_half.matrix() * inner.matrix() * a.inv_sqrt().matrix()))
}
