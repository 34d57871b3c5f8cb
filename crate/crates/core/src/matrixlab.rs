//! Dense complex-matrix realizations of class members.
//!
//! Everything here is finite-dimensional and dense: operators are `n x n`
//! Hermitian matrices, bases are unitary matrices whose columns realize an
//! apartment, subspaces carry orthonormal generator columns. Validation
//! happens at construction so that downstream code can assume
//! self-adjointness and unitarity within the configured tolerances.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::{fabs, Scalar};
use crate::spectra::{ClassSpec, LabeledPartition, SymmetryPerm};
use crate::tol::ToleranceConfig;

pub type CMat<T> = DMatrix<Complex<T>>;

/// Largest entry modulus.
pub fn max_norm<T: Scalar>(m: &CMat<T>) -> T {
    let mut best = T::zero();
    for c in m.iter() {
        let v = c.norm();
        if v > best {
            best = v;
        }
    }
    best
}

/// Largest off-diagonal entry modulus.
pub fn max_offdiag<T: Scalar>(m: &CMat<T>) -> T {
    let mut best = T::zero();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j {
                let v = m[(i, j)].norm();
                if v > best {
                    best = v;
                }
            }
        }
    }
    best
}

/// Entrywise conjugation in the standard coordinates.
pub fn conj_matrix<T: Scalar>(m: &CMat<T>) -> CMat<T> {
    m.map(|c| c.conj())
}

/// A validated self-adjoint matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T: Scalar> {
    mat: CMat<T>,
}

impl<T: Scalar> HermitianOperator<T> {
    pub fn new(mat: CMat<T>, tol: T) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let deviation = max_norm(&(&mat - mat.adjoint()));
        if deviation > tol {
            return Err(Error::NotSelfAdjoint {
                deviation: deviation.to_f64_lossy(),
            });
        }
        Ok(HermitianOperator { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat<T> {
        self.mat
    }
}

/// A validated unitary matrix whose columns realize an apartment.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis<T: Scalar> {
    cols: CMat<T>,
}

impl<T: Scalar> Basis<T> {
    pub fn new(cols: CMat<T>, tol: T) -> Result<Self> {
        if cols.nrows() != cols.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix is not square",
                cols.nrows(),
                cols.ncols()
            )));
        }
        let n = cols.nrows();
        let gram = cols.adjoint() * &cols;
        let deviation = max_norm(&(gram - CMat::<T>::identity(n, n)));
        if deviation > tol {
            return Err(Error::NotUnitary {
                deviation: deviation.to_f64_lossy(),
            });
        }
        Ok(Basis { cols })
    }

    pub fn standard(n: usize) -> Self {
        Basis {
            cols: CMat::<T>::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.cols.nrows()
    }

    pub fn columns(&self) -> &CMat<T> {
        &self.cols
    }

    pub fn column(&self, b: usize) -> DVector<Complex<T>> {
        self.cols.column(b).into_owned()
    }

    /// Replace columns `i` and `j` by a rotation of the plane they span.
    /// The result realizes a different apartment that still contains every
    /// operator whose partition fuses `i` and `j`.
    pub fn rotated_pair(&self, i: usize, j: usize, angle: T, tol: T) -> Result<Basis<T>> {
        if i == j {
            return Err(Error::IdenticalIndices);
        }
        let (c, s) = (num_traits::Float::cos(angle), num_traits::Float::sin(angle));
        let mut cols = self.cols.clone();
        let vi = self.column(i);
        let vj = self.column(j);
        let c = Complex::new(c, T::zero());
        let s = Complex::new(s, T::zero());
        cols.set_column(i, &(&vi * c + &vj * s));
        cols.set_column(j, &(&vi * -s + &vj * c));
        Basis::new(cols, tol)
    }
}

/// A subspace given by orthonormal generator columns.
#[derive(Clone, Debug)]
pub struct Subspace<T: Scalar> {
    gens: CMat<T>,
}

impl<T: Scalar> Subspace<T> {
    pub fn new(gens: CMat<T>, tol: T) -> Result<Self> {
        if gens.ncols() == 0 || gens.ncols() > gens.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} generators in ambient dimension {}",
                gens.ncols(),
                gens.nrows()
            )));
        }
        let d = gens.ncols();
        let gram = gens.adjoint() * &gens;
        let deviation = max_norm(&(gram - CMat::<T>::identity(d, d)));
        if deviation > tol {
            return Err(Error::NotOrthonormal {
                deviation: deviation.to_f64_lossy(),
            });
        }
        Ok(Subspace { gens })
    }

    pub fn from_basis_columns(basis: &Basis<T>, indices: &[usize], tol: T) -> Result<Self> {
        let gens = basis.columns().select_columns(indices);
        Subspace::new(gens, tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.gens.nrows()
    }

    pub fn dim(&self) -> usize {
        self.gens.ncols()
    }

    pub fn projector(&self) -> CMat<T> {
        &self.gens * self.gens.adjoint()
    }
}

fn validate_partition<T: Scalar>(p: &LabeledPartition, spec: &ClassSpec<T>) -> Result<()> {
    LabeledPartition::new(p.slot_of().to_vec(), spec).map(|_| ())
}

/// Realize a labeled partition as an operator in the apartment of `basis`.
pub fn build_operator<T: Scalar>(
    basis: &Basis<T>,
    p: &LabeledPartition,
    spec: &ClassSpec<T>,
    tol: &ToleranceConfig<T>,
) -> Result<HermitianOperator<T>> {
    validate_partition(p, spec)?;
    if basis.dim() != spec.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "basis dimension {} vs ambient dimension {}",
            basis.dim(),
            spec.ambient_dim()
        )));
    }
    let n = basis.dim();
    let mut mat = CMat::<T>::zeros(n, n);
    let blocks = p.blocks(spec.slot_count());
    for (slot, indices) in blocks.iter().enumerate().skip(1) {
        let v = basis.columns().select_columns(indices);
        let alpha = Complex::new(spec.alpha(slot), T::zero());
        mat += (&v * v.adjoint()) * alpha;
    }
    HermitianOperator::new(mat, tol.construction)
}

/// Max-norm of the commutator `AB - BA`.
pub fn commutator_norm<T: Scalar>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(
            "commutator of operators of different dimensions".into(),
        ));
    }
    let ab = a.matrix() * b.matrix();
    let ba = b.matrix() * a.matrix();
    Ok(max_norm(&(ab - ba)))
}

/// Numeric orthogonality: both products vanish.
pub fn is_orthogonal_numeric<T: Scalar>(
    a: &HermitianOperator<T>,
    b: &HermitianOperator<T>,
    tol: T,
) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(
            "orthogonality of operators of different dimensions".into(),
        ));
    }
    let ab = max_norm(&(a.matrix() * b.matrix()));
    let ba = max_norm(&(b.matrix() * a.matrix()));
    Ok(ab <= tol && ba <= tol)
}

/// Compatibility of two subspaces: their orthogonal projections commute.
pub fn subspace_compatible<T: Scalar>(x: &Subspace<T>, y: &Subspace<T>, tol: T) -> Result<bool> {
    if x.ambient_dim() != y.ambient_dim() {
        return Err(Error::DimensionMismatch(
            "subspaces of different ambient dimensions".into(),
        ));
    }
    let px = x.projector();
    let py = y.projector();
    let comm = &px * &py - &py * &px;
    Ok(max_norm(&comm) <= tol)
}

/// Recover the labeled partition of an operator relative to a basis.
///
/// Every basis column must be an eigenvector within `tol`, every Rayleigh
/// quotient must match a slot eigenvalue (zero included) within `tol`, and
/// the resulting block sizes must match the multiplicities.
pub fn recover_partition<T: Scalar>(
    a: &HermitianOperator<T>,
    basis: &Basis<T>,
    spec: &ClassSpec<T>,
    tol: T,
) -> Result<LabeledPartition> {
    let n = spec.ambient_dim();
    if a.dim() != n || basis.dim() != n {
        return Err(Error::DimensionMismatch(
            "operator, basis and spec dimensions disagree".into(),
        ));
    }
    let mut slot_of = Vec::with_capacity(n);
    for b in 0..n {
        let v = basis.cols.column(b);
        let w = a.matrix() * v;
        let rayleigh = v.dotc(&w);
        if fabs(rayleigh.im) > tol {
            return Err(Error::NotInApartment {
                column: b,
                detail: format!(
                    "Rayleigh quotient has imaginary part {:.3e}",
                    rayleigh.im.to_f64_lossy()
                ),
            });
        }
        let lambda = rayleigh.re;
        let mut residual = T::zero();
        for i in 0..n {
            let r = (w[i] - v[i] * Complex::new(lambda, T::zero())).norm();
            if r > residual {
                residual = r;
            }
        }
        if residual > tol {
            return Err(Error::NotInApartment {
                column: b,
                detail: format!("eigenvector residual {:.3e}", residual.to_f64_lossy()),
            });
        }
        slot_of.push(match_slot(lambda, spec, tol)?);
    }
    LabeledPartition::new(slot_of, spec)
}

/// Match a numeric eigenvalue to a slot (0 for the kernel).
pub fn match_slot<T: Scalar>(lambda: T, spec: &ClassSpec<T>, tol: T) -> Result<usize> {
    let mut best: Option<(usize, T)> = None;
    for slot in 0..spec.slot_count() {
        let gap = fabs(lambda - spec.alpha(slot));
        if best.is_none_or(|(_, g)| gap < g) {
            best = Some((slot, gap));
        }
    }
    match best {
        Some((slot, gap)) if gap <= tol => Ok(slot),
        _ => Err(Error::EigenvalueMismatch {
            value: lambda.to_f64_lossy(),
            tol: tol.to_f64_lossy(),
        }),
    }
}

/// Conjugate an operator: `U A U*`, with the entrywise conjugate of `A`
/// taken first when `antiunitary` is set.
pub fn conjugate<T: Scalar>(
    a: &HermitianOperator<T>,
    u: &Basis<T>,
    antiunitary: bool,
    tol: &ToleranceConfig<T>,
) -> Result<HermitianOperator<T>> {
    if a.dim() != u.dim() {
        return Err(Error::DimensionMismatch(
            "operator and unitary of different dimensions".into(),
        ));
    }
    let core = if antiunitary {
        conj_matrix(a.matrix())
    } else {
        a.matrix().clone()
    };
    let mat = u.columns() * core * u.columns().adjoint();
    // Conjugation preserves self-adjointness up to rounding; symmetrize the
    // dust so construction stays within the strict tolerance.
    let mat = (&mat + mat.adjoint()) * Complex::new(T::from_f64_lossy(0.5), T::zero());
    HermitianOperator::new(mat, tol.construction)
}

fn gaussian<T: Scalar, R: Rng>(rng: &mut R) -> T {
    let x: f64 = StandardNormal.sample(rng);
    T::from_f64_lossy(x)
}

fn gaussian_complex<T: Scalar, R: Rng>(rng: &mut R) -> Complex<T> {
    Complex::new(gaussian(rng), gaussian(rng))
}

/// Haar-style random unitary: QR of a complex Gaussian matrix with the
/// diagonal of R used to fix column phases.
pub fn random_unitary<T: Scalar, R: Rng>(n: usize, rng: &mut R, tol: T) -> Result<Basis<T>> {
    let g = CMat::<T>::from_fn(n, n, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > T::zero() {
            d / Complex::new(d.norm(), T::zero())
        } else {
            Complex::new(T::one(), T::zero())
        };
        let col = q.column(k) * phase;
        q.set_column(k, &col);
    }
    Basis::new(q, tol)
}

/// Deterministic seeded variant of [`random_unitary`].
pub fn random_unitary_seeded<T: Scalar>(n: usize, seed: u64, tol: T) -> Result<Basis<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_unitary(n, &mut rng, tol)
}

/// Common eigenbasis of a family of mutually commuting operators, obtained
/// by diagonalizing a random real combination and validating that every
/// operator is diagonal in the result. Retries with fresh coefficients a few
/// times before giving up.
pub fn joint_eigenbasis<T: Scalar>(
    ops: &[HermitianOperator<T>],
    seed: u64,
    tol: &ToleranceConfig<T>,
) -> Result<Basis<T>> {
    let first = ops.first().ok_or(Error::EmptySubset)?;
    let n = first.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = T::zero();
    for _attempt in 0..4 {
        let mut m = CMat::<T>::zeros(n, n);
        for op in ops {
            if op.dim() != n {
                return Err(Error::DimensionMismatch(
                    "family members of different dimensions".into(),
                ));
            }
            let c = Complex::new(gaussian::<T, _>(&mut rng), T::zero());
            m += op.matrix() * c;
        }
        let m = (&m + m.adjoint()) * Complex::new(T::from_f64_lossy(0.5), T::zero());
        let eig = nalgebra::SymmetricEigen::new(m);
        let q = eig.eigenvectors;
        let mut ok = true;
        for op in ops {
            let d = q.adjoint() * op.matrix() * &q;
            let off = max_offdiag(&d);
            if off > tol.predicate {
                if off > worst {
                    worst = off;
                }
                ok = false;
                break;
            }
        }
        if ok {
            return Basis::new(q, tol.unitarity);
        }
    }
    Err(Error::Numerical(format!(
        "no common eigenbasis found (worst off-diagonal {:.3e}); the family may not commute",
        worst.to_f64_lossy()
    )))
}

/// Spectral application of a slot symmetry to a class member given only its
/// matrix: eigenspaces are recovered numerically, then reassembled with the
/// permuted eigenvalue assignment.
pub fn apply_symmetry_numeric<T: Scalar>(
    a: &HermitianOperator<T>,
    delta: &SymmetryPerm,
    spec: &ClassSpec<T>,
    tol: &ToleranceConfig<T>,
) -> Result<HermitianOperator<T>> {
    let n = spec.ambient_dim();
    if a.dim() != n {
        return Err(Error::DimensionMismatch(
            "operator does not match the spec's ambient dimension".into(),
        ));
    }
    if delta.slot_count() != spec.slot_count() {
        return Err(Error::NotASymmetry);
    }
    let eig = nalgebra::SymmetricEigen::new(a.matrix().clone());
    let mut counts = vec![0usize; spec.slot_count()];
    // Realized members sit within construction error of the spec values, but
    // callers may pass operators produced by longer numeric pipelines, so
    // the matching tolerance is the (looser) predicate one.
    for j in 0..n {
        let slot = match_slot(eig.eigenvalues[j], spec, tol.predicate)?;
        counts[slot] += 1;
    }
    for (slot, &got) in counts.iter().enumerate() {
        if got != spec.multiplicity(slot) {
            return Err(Error::BlockSizeMismatch {
                slot,
                got,
                expected: spec.multiplicity(slot),
            });
        }
    }
    // The iterative eigensolver can return eigenvectors that fail to
    // diagonalize members with repeated eigenvalues, so the slot projections
    // are built from the operator itself: on a class member,
    // prod_{t != s} (A - alpha_t) / (alpha_s - alpha_t) is exactly the
    // projection onto the slot-s eigenspace.
    let mut projections = Vec::with_capacity(spec.slot_count());
    for s in 0..spec.slot_count() {
        let mut p = CMat::<T>::identity(n, n);
        for t in 0..spec.slot_count() {
            if t == s {
                continue;
            }
            let mut factor = a.matrix().clone();
            let shift = Complex::new(spec.alpha(t), T::zero());
            for i in 0..n {
                factor[(i, i)] -= shift;
            }
            p = p * factor * Complex::new(T::one() / (spec.alpha(s) - spec.alpha(t)), T::zero());
        }
        projections.push(p);
    }
    let mut mat = CMat::<T>::zeros(n, n);
    for slot in 1..spec.slot_count() {
        let source = delta.apply_slot(slot);
        let alpha = Complex::new(spec.alpha(slot), T::zero());
        mat += &projections[source] * alpha;
    }
    let mat = (&mat + mat.adjoint()) * Complex::new(T::from_f64_lossy(0.5), T::zero());
    HermitianOperator::new(mat, tol.construction)
}
