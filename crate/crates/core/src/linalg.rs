//! Small dense complex linear algebra used throughout the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `exp(2πi t/den)`, exact at multiples of a quarter turn.
pub fn root_of_unity(t: u32, den: u32) -> Complex64 {
    let t = t % den;
    // exact values for the quarter turns used by the characteristic-2 construction
    if (4 * t).is_multiple_of(den) {
        match 4 * t / den {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::from_polar(1.0, std::f64::consts::TAU * t as f64 / den as f64)
    }
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all<'a, I: IntoIterator<Item = &'a CMatrix>>(factors: I) -> CMatrix {
    factors
        .into_iter()
        .fold(CMatrix::from_element(1, 1, ONE), |acc, f| acc.kronecker(f))
}

pub fn kron_vectors<'a, I: IntoIterator<Item = &'a CVector>>(factors: I) -> CVector {
    factors
        .into_iter()
        .fold(CVector::from_element(1, ONE), |acc, f| acc.kronecker(f))
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Matrix unit `|row><col|`.
pub fn matrix_unit(d: usize, row: usize, col: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(row, col)] = ONE;
    m
}

pub fn basis_vector(d: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[k] = ONE;
    v
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// Random Hermitian matrix: a Ginibre draw, Hermitized.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    (&g + g.adjoint()).scale(0.5)
}

/// Random density matrix `G G† / Tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d, d);
    let rho = &g * g.adjoint();
    let t = trace(&rho);
    rho / t
}

/// Matrix with orthonormal columns drawn from the Haar measure on the
/// Stiefel manifold (QR of a Ginibre matrix with the R-diagonal phases
/// removed).
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let qr = ginibre(rng, rows, cols).qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..cols {
        let diag = r[(c, c)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { ONE };
        for row in 0..rows {
            q[(row, c)] *= phase;
        }
    }
    q
}

pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    random_isometry(rng, d, d)
}

/// Mixed-radix digits of `index`, most significant first.
pub fn unflatten(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for (slot, &r) in digits.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    digits
}

/// Inverse of [`unflatten`].
pub fn flatten(digits: &[usize], radices: &[usize]) -> usize {
    digits
        .iter()
        .zip(radices)
        .fold(0, |acc, (&d, &r)| acc * r + d)
}

/// For `b` acting on `⊗_a H_a` (factor 0 most significant), returns
/// `𝟙^(mask) ⊗ Tr_mask(b)` re-embedded in the original factor order:
/// subsystems with their bit set in `mask` are traced out and replaced by
/// the identity.
pub fn replace_with_identity(b: &CMatrix, dims: &[usize], mask: u32) -> CMatrix {
    let d: usize = dims.iter().product();
    let traced: Vec<usize> = (0..dims.len()).filter(|&a| mask >> a & 1 == 1).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&a| dims[a]).collect();
    let traced_size: usize = traced_dims.iter().product();
    let mut out = CMatrix::zeros(d, d);
    for row in 0..d {
        let rd = unflatten(row, dims);
        for col in 0..d {
            let cd = unflatten(col, dims);
            if traced.iter().any(|&a| rd[a] != cd[a]) {
                continue;
            }
            let mut acc = ZERO;
            let mut r2 = rd.clone();
            let mut c2 = cd.clone();
            for k in 0..traced_size {
                let kd = unflatten(k, &traced_dims);
                for (&a, &v) in traced.iter().zip(&kd) {
                    r2[a] = v;
                    c2[a] = v;
                }
                acc += b[(flatten(&r2, dims), flatten(&c2, dims))];
            }
            out[(row, col)] = acc;
        }
    }
    out
}
