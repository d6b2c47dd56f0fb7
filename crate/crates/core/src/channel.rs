//! Unitary operator bases and the Kraus / χ-matrix representations of a
//! channel.
//!
//! The χ-matrix is taken with respect to an orthogonal unitary basis
//! `{E_m}` with `Tr(E_m E_n†) = d δ_mn` and `E_0 = 𝟙`:
//! `ℰ(ρ) = Σ_mn χ_mn E_m ρ E_n†`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};

pub const TRACE_TOL: f64 = 1e-9;

/// Weyl-Heisenberg basis `E_{(a,b)} = X^a Z^b` in dimension `D`,
/// flat index `m = a·D + b`.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<CMatrix>,
}

pub fn weyl_basis(dim: usize) -> Result<OperatorBasis> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    let omega = |k: usize| linalg::root_of_unity((k % dim) as u32, dim as u32);
    let elements = (0..dim * dim)
        .map(|m| {
            let (a, b) = (m / dim, m % dim);
            let mut e = CMatrix::zeros(dim, dim);
            for c in 0..dim {
                e[((c + a) % dim, c)] = if b == 0 { ONE } else { omega(b * c) };
            }
            e
        })
        .collect();
    Ok(OperatorBasis { dim, elements })
}

impl OperatorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, m: usize) -> &CMatrix {
        &self.elements[m]
    }

    /// `(a, b)` label of flat index `m`.
    pub fn label(&self, m: usize) -> (usize, usize) {
        (m / self.dim, m % self.dim)
    }

    pub fn index(&self, a: usize, b: usize) -> usize {
        a * self.dim + b
    }
}

/// Product basis `E_i = ⊗_a E_{i_a}`; flat index is mixed-radix in
/// `D_a²` with factor 0 most significant.
#[derive(Debug, Clone)]
pub struct ProductOperatorBasis {
    factors: Vec<OperatorBasis>,
    dim: usize,
    elements: Vec<CMatrix>,
}

impl ProductOperatorBasis {
    pub fn new(factors: Vec<OperatorBasis>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyFactors);
        }
        let radices: Vec<usize> = factors.iter().map(OperatorBasis::len).collect();
        let total: usize = radices.iter().product();
        let elements = (0..total)
            .map(|i| {
                let digits = linalg::unflatten(i, &radices);
                linalg::kron_all(digits.iter().zip(&factors).map(|(&k, f)| f.element(k)))
            })
            .collect();
        let dim = factors.iter().map(OperatorBasis::dim).product();
        Ok(Self { factors, dim, elements })
    }

    /// Weyl basis on each subsystem.
    pub fn weyl(factor_dims: &[usize]) -> Result<Self> {
        Self::new(factor_dims.iter().map(|&d| weyl_basis(d)).collect::<Result<_>>()?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn factors(&self) -> &[OperatorBasis] {
        &self.factors
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        self.factors.iter().map(OperatorBasis::dim).collect()
    }

    fn radices(&self) -> Vec<usize> {
        self.factors.iter().map(OperatorBasis::len).collect()
    }

    pub fn flatten(&self, multi: &[usize]) -> usize {
        linalg::flatten(multi, &self.radices())
    }

    pub fn unflatten(&self, i: usize) -> Vec<usize> {
        linalg::unflatten(i, &self.radices())
    }

    pub fn element(&self, i: usize) -> &CMatrix {
        &self.elements[i]
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, len: self.len() })
        }
    }
}

impl From<OperatorBasis> for ProductOperatorBasis {
    fn from(b: OperatorBasis) -> Self {
        let dim = b.dim;
        let elements = b.elements.clone();
        Self { factors: vec![b], dim, elements }
    }
}

/// A channel in operator-sum form `ρ ↦ Σ_k A_k ρ A_k†`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<CMatrix>,
}

impl KrausChannel {
    /// Validates shapes and trace preservation (`‖Σ A_k†A_k − 𝟙‖_max ≤ 1e-9`).
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let dim = kraus.first().map(|k| k.nrows()).ok_or_else(|| Error::Malformed("no Kraus operators".into()))?;
        for k in &kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: k.nrows().max(k.ncols()) });
            }
        }
        let ch = Self { dim, kraus };
        let deviation = ch.trace_deviation();
        if deviation > TRACE_TOL {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, kraus: vec![linalg::identity(dim)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn trace_deviation(&self) -> f64 {
        let sum = self.kraus.iter().fold(CMatrix::zeros(self.dim, self.dim), |acc, k| acc + k.adjoint() * k);
        linalg::max_abs_diff(&sum, &linalg::identity(self.dim))
    }

    fn check_dim(&self, m: &CMatrix) -> Result<()> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: m.nrows() });
        }
        Ok(())
    }

    /// `Σ_k A_k ρ A_k†`; `ρ` may be any square matrix of the right size.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        self.check_dim(rho)?;
        Ok(self.apply_unchecked(rho))
    }

    pub(crate) fn apply_unchecked(&self, rho: &CMatrix) -> CMatrix {
        self.kraus
            .iter()
            .fold(CMatrix::zeros(self.dim, self.dim), |acc, k| acc + k * rho * k.adjoint())
    }

    /// `ℰ(E_i† ρ E_j)`.
    pub fn modified_apply(&self, basis: &ProductOperatorBasis, i: usize, j: usize, rho: &CMatrix) -> Result<CMatrix> {
        self.check_dim(rho)?;
        if basis.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: basis.dim() });
        }
        basis.check_index(i)?;
        basis.check_index(j)?;
        Ok(self.apply_unchecked(&(basis.element(i).adjoint() * rho * basis.element(j))))
    }

    pub fn to_file(&self) -> ChannelFile {
        ChannelFile { dim: self.dim, kraus: self.kraus.iter().map(matrix_to_rows).collect() }
    }

    pub fn from_file(file: &ChannelFile) -> Result<Self> {
        let kraus = file.kraus.iter().map(|m| rows_to_matrix(m, file.dim)).collect::<Result<Vec<_>>>()?;
        let ch = Self::new(kraus)?;
        if ch.dim != file.dim {
            return Err(Error::DimensionMismatch { expected: file.dim, got: ch.dim });
        }
        Ok(ch)
    }
}

/// `χ_mn = Σ_k a_km a*_kn` with `a_km = Tr(E_m† A_k)/d`.
pub fn kraus_to_chi(ch: &KrausChannel, basis: &ProductOperatorBasis) -> Result<ChiMatrix> {
    if basis.dim() != ch.dim() {
        return Err(Error::DimensionMismatch { expected: ch.dim(), got: basis.dim() });
    }
    let d = ch.dim() as f64;
    let n = basis.len();
    let coeffs = CMatrix::from_fn(ch.kraus().len(), n, |k, m| {
        linalg::trace_product(&basis.element(m).adjoint(), &ch.kraus()[k]) / d
    });
    let chi = coeffs.transpose() * coeffs.map(|z| z.conj());
    Ok(ChiMatrix { factor_dims: basis.factor_dims(), chi })
}

/// χ-matrix of a channel in a fixed product operator basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiMatrix {
    pub factor_dims: Vec<usize>,
    pub chi: CMatrix,
}

impl ChiMatrix {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.chi[(i, j)]
    }

    pub fn dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// `Σ_mn χ_mn E_m ρ E_n†`.
    pub fn apply(&self, basis: &ProductOperatorBasis, rho: &CMatrix) -> CMatrix {
        let d = basis.dim();
        let n = basis.len();
        let mut out = CMatrix::zeros(d, d);
        for m in 0..n {
            let mut inner = CMatrix::zeros(d, d);
            for k in 0..n {
                let c = self.chi[(m, k)];
                if c != ZERO {
                    inner += basis.element(k).adjoint() * c;
                }
            }
            out += basis.element(m) * rho * inner;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.chi)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        linalg::max_abs_diff(&self.chi, &self.chi.adjoint())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.chi + self.chi.adjoint()).scale(0.5);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `‖Σ_mn χ_mn E_n† E_m − 𝟙‖_max`.
    pub fn trace_condition_deviation(&self, basis: &ProductOperatorBasis) -> f64 {
        let d = basis.dim();
        let mut sum = CMatrix::zeros(d, d);
        for n in 0..basis.len() {
            let mut inner = CMatrix::zeros(d, d);
            for m in 0..basis.len() {
                let c = self.chi[(m, n)];
                if c != ZERO {
                    inner += basis.element(m) * c;
                }
            }
            sum += basis.element(n).adjoint() * inner;
        }
        linalg::max_abs_diff(&sum, &linalg::identity(d))
    }

    /// Hermitian within 1e-9, PSD down to −1e-9, trace condition within 1e-8.
    pub fn check_invariants(&self, basis: &ProductOperatorBasis) -> Result<()> {
        let herm = self.hermiticity_deviation();
        if herm > 1e-9 {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let min_eigenvalue = self.min_eigenvalue();
        if min_eigenvalue < -1e-9 {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        let deviation = self.trace_condition_deviation(basis);
        if deviation > 1e-8 {
            return Err(Error::NotTracePreserving { deviation });
        }
        Ok(())
    }

    pub fn to_file(&self) -> ChiFile {
        ChiFile { factor_dims: self.factor_dims.clone(), chi: matrix_to_rows(&self.chi), basis: "weyl".into() }
    }
}

/// Named channel families.
#[derive(Debug, Clone, PartialEq)]
pub enum StandardChannel {
    Identity,
    /// `ρ ↦ (1 − λ)ρ + λ 𝟙/D`, `λ ∈ [0, 1]`.
    Depolarizing(f64),
    /// Unitary channel given by element `k` of the single-factor Weyl basis.
    WeylUnitary(usize),
    Unitary(CMatrix),
    RandomUnitary { seed: u64 },
    /// Rank-`rank` channel from a seeded random Stinespring isometry.
    RandomCptp { rank: usize, seed: u64 },
}

impl StandardChannel {
    pub fn build(&self, dim: usize) -> Result<KrausChannel> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        match self {
            StandardChannel::Identity => Ok(KrausChannel::identity(dim)),
            StandardChannel::Depolarizing(lambda) => depolarizing(dim, *lambda),
            StandardChannel::WeylUnitary(k) => {
                let basis = weyl_basis(dim)?;
                if *k >= basis.len() {
                    return Err(Error::IndexOutOfRange { index: *k, len: basis.len() });
                }
                Ok(KrausChannel { dim, kraus: vec![basis.element(*k).clone()] })
            }
            StandardChannel::Unitary(u) => {
                if u.nrows() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: u.nrows() });
                }
                KrausChannel::new(vec![u.clone()])
            }
            StandardChannel::RandomUnitary { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                KrausChannel::new(vec![linalg::haar_unitary(&mut rng, dim)])
            }
            StandardChannel::RandomCptp { rank, seed } => {
                if *rank == 0 {
                    return Err(Error::InvalidParameter("rank must be at least 1".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let v = linalg::random_isometry(&mut rng, rank * dim, dim);
                let kraus = (0..*rank).map(|k| v.rows(k * dim, dim).into_owned()).collect();
                KrausChannel::new(kraus)
            }
        }
    }
}

fn depolarizing(dim: usize, lambda: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("depolarizing strength {lambda} outside [0, 1]")));
    }
    if lambda == 0.0 {
        return Ok(KrausChannel::identity(dim));
    }
    // Weyl twirl: (1/D²) Σ_m E_m ρ E_m† = Tr(ρ) 𝟙/D
    let basis = weyl_basis(dim)?;
    let d2 = (dim * dim) as f64;
    let mut kraus = vec![linalg::identity(dim) * Complex64::from((1.0 - lambda + lambda / d2).sqrt())];
    let w = Complex64::from(lambda.sqrt() / dim as f64);
    kraus.extend((1..basis.len()).map(|m| basis.element(m) * w));
    KrausChannel::new(kraus)
}

/// Grammar: `name[:param[,param]]`, e.g. `identity`, `depolarizing:0.3`,
/// `unitary:4`, `random_unitary:11`, `random_cptp:3,7`.
impl FromStr for StandardChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n, p.split(',').map(str::trim).collect::<Vec<_>>()),
            None => (s, Vec::new()),
        };
        let bad = |what: &str| Error::InvalidParameter(format!("{what} in channel '{s}'"));
        let num = |k: usize| -> Result<u64> { params.get(k).ok_or_else(|| bad("missing parameter"))?.parse().map_err(|_| bad("bad integer")) };
        let arity = |n: usize| if params.len() == n { Ok(()) } else { Err(bad("wrong parameter count")) };
        match name.trim() {
            "identity" | "id" => arity(0).map(|_| StandardChannel::Identity),
            "depolarizing" | "depol" => {
                arity(1)?;
                let l: f64 = params[0].parse().map_err(|_| bad("bad strength"))?;
                Ok(StandardChannel::Depolarizing(l))
            }
            "unitary" | "weyl" => {
                arity(1)?;
                Ok(StandardChannel::WeylUnitary(num(0)? as usize))
            }
            "random_unitary" => {
                arity(1)?;
                Ok(StandardChannel::RandomUnitary { seed: num(0)? })
            }
            "random_cptp" => {
                arity(2)?;
                Ok(StandardChannel::RandomCptp { rank: num(0)? as usize, seed: num(1)? })
            }
            other => Err(Error::UnknownChannel(other.to_string())),
        }
    }
}

impl fmt::Display for StandardChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StandardChannel::Identity => write!(f, "identity"),
            StandardChannel::Depolarizing(l) => write!(f, "depolarizing:{l}"),
            StandardChannel::WeylUnitary(k) => write!(f, "unitary:{k}"),
            StandardChannel::Unitary(_) => write!(f, "unitary(matrix)"),
            StandardChannel::RandomUnitary { seed } => write!(f, "random_unitary:{seed}"),
            StandardChannel::RandomCptp { rank, seed } => write!(f, "random_cptp:{rank},{seed}"),
        }
    }
}

pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_rows(m: &CMatrix) -> MatrixRows {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

pub fn rows_to_matrix(rows: &MatrixRows, dim: usize) -> Result<CMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Malformed(format!("expected a {dim}x{dim} matrix")));
    }
    Ok(CMatrix::from_fn(dim, dim, |r, c| Complex64::new(rows[r][c][0], rows[r][c][1])))
}

/// Channel file: `{dim, kraus: [matrix…]}`, entries `[re, im]`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim: usize,
    pub kraus: Vec<MatrixRows>,
}

/// χ export: `{factor_dims, chi, basis: "weyl"}`. Row and column `i` of
/// `chi` address the product element whose mixed-radix digits (factor 0
/// most significant, radix `D_a²`) are the Weyl labels `a·D_a + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiFile {
    pub factor_dims: Vec<usize>,
    pub chi: MatrixRows,
    pub basis: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_rhos(d: usize, count: usize, seed: u64) -> Vec<CMatrix> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| linalg::random_density(&mut rng, d)).collect()
    }

    #[test]
    fn weyl_basis_axioms() {
        for d in [2, 3, 4, 5, 6] {
            let b = weyl_basis(d).unwrap();
            assert_eq!(b.len(), d * d);
            assert_eq!(b.element(0), &linalg::identity(d));
            for m in 0..b.len() {
                let e = b.element(m);
                assert!(linalg::max_abs_diff(&(e * e.adjoint()), &linalg::identity(d)) <= 1e-10);
                for n in 0..b.len() {
                    let want = if m == n { d as f64 } else { 0.0 };
                    assert!((linalg::trace_product(e, &b.element(n).adjoint()) - want).norm() <= 1e-10);
                }
            }
        }
        assert!(weyl_basis(1).is_err());
    }

    #[test]
    fn qubit_weyl_is_pauli() {
        let b = weyl_basis(2).unwrap();
        let x = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let z = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        assert_eq!(b.element(b.index(1, 0)), &x);
        assert_eq!(b.element(b.index(0, 1)), &z);
        assert_eq!(b.element(b.index(1, 1)), &(&x * &z));
    }

    #[test]
    fn product_basis_flattening() {
        let pb = ProductOperatorBasis::weyl(&[2, 3]).unwrap();
        assert_eq!(pb.len(), 36);
        for i in 0..pb.len() {
            let multi = pb.unflatten(i);
            assert_eq!(pb.flatten(&multi), i);
            let want = linalg::kron(pb.factors()[0].element(multi[0]), pb.factors()[1].element(multi[1]));
            assert_eq!(pb.element(i), &want);
        }
        assert_eq!(pb.unflatten(9 + 2), vec![1, 2]);
    }

    #[test]
    fn identity_and_unitary_channels() {
        let d = 3;
        let rhos = random_rhos(d, 5, 1);
        let id = KrausChannel::identity(d);
        let basis: ProductOperatorBasis = weyl_basis(d).unwrap().into();
        for rho in &rhos {
            assert!(linalg::max_abs_diff(&id.apply(rho).unwrap(), rho) < 1e-15);
            let i = 5;
            let got = id.modified_apply(&basis, i, i, rho).unwrap();
            let e = basis.element(i);
            assert!(linalg::max_abs_diff(&got, &(e.adjoint() * rho * e)) < 1e-14);
            assert!(linalg::max_abs_diff(&id.modified_apply(&basis, 0, 0, rho).unwrap(), rho) < 1e-15);
        }
        let u = StandardChannel::RandomUnitary { seed: 4 }.build(d).unwrap();
        let uu = &u.kraus()[0];
        for rho in &rhos {
            assert!(linalg::max_abs_diff(&u.apply(rho).unwrap(), &(uu * rho * uu.adjoint())) < 1e-14);
        }
    }

    #[test]
    fn modified_apply_qubit_flip() {
        let basis: ProductOperatorBasis = weyl_basis(2).unwrap().into();
        let id = KrausChannel::identity(2);
        let x = basis.factors()[0].index(1, 0);
        let got = id.modified_apply(&basis, x, 0, &linalg::matrix_unit(2, 0, 0)).unwrap();
        assert_eq!(got, linalg::matrix_unit(2, 1, 0));
        assert!(matches!(id.modified_apply(&basis, 4, 0, &linalg::identity(2)), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn depolarizing_family() {
        for d in [2, 3, 6] {
            let rhos = random_rhos(d, 3, 2);
            let full = StandardChannel::Depolarizing(1.0).build(d).unwrap();
            let half = StandardChannel::Depolarizing(0.3).build(d).unwrap();
            let mixed = linalg::identity(d) / Complex64::from(d as f64);
            for rho in &rhos {
                assert!(linalg::max_abs_diff(&full.apply(rho).unwrap(), &mixed) < 1e-12);
                let want = rho * Complex64::from(0.7) + &mixed * Complex64::from(0.3);
                assert!(linalg::max_abs_diff(&half.apply(rho).unwrap(), &want) < 1e-12);
            }
            assert_eq!(StandardChannel::Depolarizing(0.0).build(d).unwrap().kraus().len(), 1);
        }
        assert!(StandardChannel::Depolarizing(1.2).build(2).is_err());
    }

    #[test]
    fn random_cptp_is_trace_preserving() {
        let ch = StandardChannel::RandomCptp { rank: 3, seed: 7 }.build(4).unwrap();
        assert_eq!(ch.kraus().len(), 3);
        assert!(ch.trace_deviation() <= 1e-9);
    }

    #[test]
    fn non_trace_preserving_rejected() {
        let k = linalg::identity(2) * Complex64::from(0.9);
        assert!(matches!(KrausChannel::new(vec![k]), Err(Error::NotTracePreserving { .. })));
    }

    #[test]
    fn chi_examples() {
        let d = 3;
        let basis: ProductOperatorBasis = weyl_basis(d).unwrap().into();
        let chi = kraus_to_chi(&KrausChannel::identity(d), &basis).unwrap();
        assert!((chi.get(0, 0) - ONE).norm() < 1e-15);
        assert!((chi.trace() - ONE).norm() < 1e-15);

        let dep = kraus_to_chi(&StandardChannel::Depolarizing(1.0).build(d).unwrap(), &basis).unwrap();
        let want = linalg::identity(d * d) / Complex64::from((d * d) as f64);
        assert!(linalg::max_abs_diff(&dep.chi, &want) < 1e-12);

        let k = 7;
        let u = kraus_to_chi(&StandardChannel::WeylUnitary(k).build(d).unwrap(), &basis).unwrap();
        let mut want = CMatrix::zeros(d * d, d * d);
        want[(k, k)] = ONE;
        assert!(linalg::max_abs_diff(&u.chi, &want) < 1e-12);
    }

    #[test]
    fn chi_round_trip_reproduces_channel() {
        for (d, dims) in [(2, vec![2]), (3, vec![3]), (4, vec![4]), (6, vec![2, 3])] {
            let basis = ProductOperatorBasis::weyl(&dims).unwrap();
            let ch = StandardChannel::RandomCptp { rank: 2, seed: d as u64 }.build(d).unwrap();
            let chi = kraus_to_chi(&ch, &basis).unwrap();
            chi.check_invariants(&basis).unwrap();
            assert!((chi.trace() - ONE).norm() < 1e-9);
            for rho in random_rhos(d, 50, 9) {
                assert!(linalg::max_abs_diff(&chi.apply(&basis, &rho), &ch.apply(&rho).unwrap()) <= 1e-9);
            }
        }
    }

    #[test]
    fn channel_file_round_trip() {
        let ch = StandardChannel::RandomCptp { rank: 2, seed: 1 }.build(3).unwrap();
        let json = serde_json::to_string(&ch.to_file()).unwrap();
        let back = KrausChannel::from_file(&serde_json::from_str(&json).unwrap()).unwrap();
        for (a, b) in ch.kraus().iter().zip(back.kraus()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn shorthand_parsing() {
        assert_eq!("identity".parse::<StandardChannel>().unwrap(), StandardChannel::Identity);
        assert_eq!("depolarizing:0.3".parse::<StandardChannel>().unwrap(), StandardChannel::Depolarizing(0.3));
        assert_eq!(
            "random_cptp:3,7".parse::<StandardChannel>().unwrap(),
            StandardChannel::RandomCptp { rank: 3, seed: 7 }
        );
        assert!(matches!("amplitude_damping:0.1".parse::<StandardChannel>(), Err(Error::UnknownChannel(_))));
        assert!("depolarizing".parse::<StandardChannel>().is_err());
        let s = StandardChannel::RandomCptp { rank: 2, seed: 5 };
        assert_eq!(s.to_string().parse::<StandardChannel>().unwrap(), s);
    }
}
