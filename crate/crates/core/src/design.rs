//! Maximal sets of mutually unbiased bases and the state 2-designs built
//! from them.
//!
//! Three families are supported:
//!
//! * uniform designs from a complete MUB set in prime-power dimension,
//! * tensor products of such designs (not 2-designs themselves, but usable
//!   through the reduced-fidelity correction),
//! * projected non-uniform designs: a complete MUB set in a prime-power
//!   dimension `D > d`, cut down to the first `d` computational levels and
//!   reweighted.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dimension::prime_power;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::linalg::{self, CMatrix, CVector};

pub use crate::dimension::smallest_prime_power_above;

pub const STRUCTURE_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-9;

/// A complete set of `D + 1` mutually unbiased bases in prime-power dimension `D`.
///
/// Basis 0 is the computational basis. For `M >= 1` the amplitudes are
/// `<j|ψ^M_k> = exp(2πi · phase(M, j, k) / phase_denominator) / √D`.
#[derive(Debug, Clone)]
pub struct MubSet {
    dim: usize,
    /// `bases[M]` holds the states of basis `M` as columns.
    bases: Vec<CMatrix>,
    phase_denominator: u32,
    /// `phase_table[M - 1][j][k]`.
    phase_table: Vec<Vec<Vec<u32>>>,
}

/// Builds the complete MUB set in dimension `dim = p^n`.
pub fn build_mub(dim: usize) -> Result<MubSet> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    let (p, n) = prime_power(dim).ok_or(Error::NotPrimePower(dim))?;
    let field = FieldSpec::new(p, n)?;
    let elements = FieldElement::all(&field);

    let (den, phase_table) = if p == 2 {
        (4, char2_phases(&field, &elements))
    } else {
        (p, odd_phases(&elements))
    };

    let norm = 1.0 / (dim as f64).sqrt();
    let mut bases = Vec::with_capacity(dim + 1);
    bases.push(linalg::identity(dim));
    for table in &phase_table {
        bases.push(CMatrix::from_fn(dim, dim, |j, k| linalg::root_of_unity(table[j][k], den) * norm));
    }

    let set = MubSet { dim, bases, phase_denominator: den, phase_table };
    set.validate(STRUCTURE_TOL)?;
    Ok(set)
}

/// Odd characteristic: `<j|ψ^{m}_k> ∝ ω_p^{tr(m j² + k j)}` over GF(p^n).
fn odd_phases(elements: &[FieldElement]) -> Vec<Vec<Vec<u32>>> {
    elements
        .iter()
        .map(|m| {
            elements
                .iter()
                .map(|j| {
                    let mj2 = &(m * j) * j;
                    elements.iter().map(|k| (&mj2 + &(k * j)).trace()).collect()
                })
                .collect()
        })
        .collect()
}

/// Characteristic 2: `<j|ψ^{x}_k> ∝ i^{j·S_x·j} (-1)^{k·j}`, where `j`, `k` are
/// bit vectors, `S_x[a][b] = tr(x e_a e_b)` is the trace form in the
/// polynomial basis, and the quadratic form is evaluated over the integers
/// mod 4.
fn char2_phases(field: &std::sync::Arc<FieldSpec>, elements: &[FieldElement]) -> Vec<Vec<Vec<u32>>> {
    let n = field.degree() as usize;
    let dim = field.order();
    let monomials: Vec<FieldElement> = (0..n).map(|a| FieldElement::from_index(field, 1 << a)).collect();
    elements
        .iter()
        .map(|x| {
            let form: Vec<Vec<u32>> = (0..n)
                .map(|a| (0..n).map(|b| (&(x * &monomials[a]) * &monomials[b]).trace()).collect())
                .collect();
            (0..dim)
                .map(|j| {
                    let bits: Vec<u32> = (0..n).map(|a| (j >> a & 1) as u32).collect();
                    let mut q = 0u32;
                    for a in 0..n {
                        for b in 0..n {
                            q += bits[a] * form[a][b] * bits[b];
                        }
                    }
                    (0..dim)
                        .map(|k| (q + 2 * ((k & j).count_ones() % 2)) % 4)
                        .collect()
                })
                .collect()
        })
        .collect()
}

impl MubSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_bases(&self) -> usize {
        self.bases.len()
    }

    pub fn basis(&self, m: usize) -> &CMatrix {
        &self.bases[m]
    }

    pub fn state(&self, basis: usize, index: usize) -> CVector {
        self.bases[basis].column(index).into_owned()
    }

    pub fn phase_denominator(&self) -> u32 {
        self.phase_denominator
    }

    /// `α^M_{jk}` in radians, for `M >= 1`.
    pub fn phase(&self, basis: usize, j: usize, k: usize) -> f64 {
        assert!(basis >= 1, "basis 0 is the computational basis and carries no phase table");
        TAU * self.phase_table[basis - 1][j][k] as f64 / self.phase_denominator as f64
    }

    pub fn phase_exponent(&self, basis: usize, j: usize, k: usize) -> u32 {
        self.phase_table[basis - 1][j][k]
    }

    /// Largest deviation from orthonormality within a basis and from
    /// `|<ψ^J_l|ψ^K_m>|² = 1/D` across bases.
    pub fn max_deviation(&self) -> (f64, f64) {
        let inv = 1.0 / self.dim as f64;
        let mut ortho: f64 = 0.0;
        let mut unbiased: f64 = 0.0;
        for (jb, b) in self.bases.iter().enumerate() {
            let g = b.adjoint() * b;
            ortho = ortho.max(linalg::max_abs_diff(&g, &linalg::identity(self.dim)));
            for c in &self.bases[jb + 1..] {
                let overlap = b.adjoint() * c;
                for z in overlap.iter() {
                    unbiased = unbiased.max((z.norm_sqr() - inv).abs());
                }
            }
        }
        (ortho, unbiased)
    }

    fn validate(&self, tol: f64) -> Result<()> {
        if self.bases.len() != self.dim + 1 {
            return Err(Error::MubValidation(format!("expected {} bases, built {}", self.dim + 1, self.bases.len())));
        }
        let (ortho, unbiased) = self.max_deviation();
        if ortho > tol || unbiased > tol {
            return Err(Error::MubValidation(format!(
                "dimension {}: orthonormality deviation {ortho:.3e}, unbiasedness deviation {unbiased:.3e}",
                self.dim
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "uniform-MUB")]
    UniformMub,
    #[serde(rename = "tensor")]
    Tensor,
    #[serde(rename = "projected")]
    Projected,
}

/// Which basis a design state was taken from, and its position in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurvivalTag {
    pub basis: usize,
    pub index: usize,
}

/// A finite set of pure states with sampling probabilities.
///
/// Tensor designs keep their factors so per-subsystem survival projectors
/// can be recovered; every state of a tensor design is the Kronecker
/// product of one state from each factor, enumerated with factor 0 most
/// significant.
#[derive(Debug, Clone)]
pub struct WeightedDesign {
    scheme: Scheme,
    dim: usize,
    factor_dims: Vec<usize>,
    states: Vec<CVector>,
    probabilities: Vec<f64>,
    tags: Vec<Vec<SurvivalTag>>,
    factors: Vec<WeightedDesign>,
    factor_indices: Vec<Vec<usize>>,
}

/// Uniform design over all `D(D + 1)` states of a MUB set, basis-major.
pub fn mub_to_design(mub: &MubSet) -> WeightedDesign {
    let d = mub.dim();
    let count = d * (d + 1);
    let mut states = Vec::with_capacity(count);
    let mut tags = Vec::with_capacity(count);
    for basis in 0..mub.num_bases() {
        for index in 0..d {
            states.push(mub.state(basis, index));
            tags.push(vec![SurvivalTag { basis, index }]);
        }
    }
    let probabilities = vec![1.0 / count as f64; count];
    WeightedDesign::single(Scheme::UniformMub, d, states, probabilities, tags)
}

/// Product design `X_1 ⊗ … ⊗ X_N`.
pub fn tensor_design(factors: &[WeightedDesign]) -> Result<WeightedDesign> {
    match factors {
        [] => Err(Error::EmptyFactors),
        [single] => Ok(single.clone()),
        _ => {
            let flat: Vec<WeightedDesign> = factors
                .iter()
                .flat_map(|f| if f.factors.is_empty() { vec![f.clone()] } else { f.factors.clone() })
                .collect();
            let sizes: Vec<usize> = flat.iter().map(|f| f.len()).collect();
            let total: usize = sizes.iter().product();
            let mut states = Vec::with_capacity(total);
            let mut probabilities = Vec::with_capacity(total);
            let mut tags = Vec::with_capacity(total);
            let mut factor_indices = Vec::with_capacity(total);
            for s in 0..total {
                let idx = linalg::unflatten(s, &sizes);
                states.push(linalg::kron_vectors(idx.iter().zip(&flat).map(|(&k, f)| &f.states[k])));
                probabilities.push(idx.iter().zip(&flat).map(|(&k, f)| f.probabilities[k]).product());
                tags.push(idx.iter().zip(&flat).map(|(&k, f)| f.tags[k][0]).collect());
                factor_indices.push(idx);
            }
            Ok(WeightedDesign {
                scheme: Scheme::Tensor,
                dim: flat.iter().map(|f| f.dim).product(),
                factor_dims: flat.iter().map(|f| f.dim).collect(),
                states,
                probabilities,
                tags,
                factors: flat,
                factor_indices,
            })
        }
    }
}

/// Non-uniform 2-design in dimension `dim` projected from the complete MUB
/// set in prime-power dimension `big > dim`.
///
/// The first `dim` states are the computational basis with weight `1/Z`;
/// they are followed by the `big²` projections of the non-computational
/// bases, basis-major, each with weight `dim²/(Z·big²)`, where
/// `Z = dim(dim + 1)`.
pub fn projected_design(dim: usize, big: usize) -> Result<WeightedDesign> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    if prime_power(big).is_none() {
        return Err(Error::NotPrimePower(big));
    }
    if big <= dim {
        return Err(Error::DimensionOrder { dim, big });
    }
    let mub = build_mub(big)?;
    let z = (dim * (dim + 1)) as f64;
    let heavy = 1.0 / z;
    let light = (dim * dim) as f64 / (z * (big * big) as f64);
    let norm = 1.0 / (dim as f64).sqrt();

    let mut states = Vec::with_capacity(dim + big * big);
    let mut probabilities = Vec::with_capacity(dim + big * big);
    let mut tags = Vec::with_capacity(dim + big * big);
    for j in 0..dim {
        states.push(linalg::basis_vector(dim, j));
        probabilities.push(heavy);
        tags.push(vec![SurvivalTag { basis: 0, index: j }]);
    }
    for basis in 1..=big {
        for j in 0..big {
            let den = mub.phase_denominator();
            states.push(CVector::from_fn(dim, |k, _| linalg::root_of_unity(mub.phase_exponent(basis, k, j), den) * norm));
            probabilities.push(light);
            tags.push(vec![SurvivalTag { basis, index: j }]);
        }
    }
    Ok(WeightedDesign::single(Scheme::Projected, dim, states, probabilities, tags))
}

/// Outcome of comparing a design average against the Haar value of
/// `E[<φ|A|φ><φ|B|φ>]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignReport {
    pub scheme: Scheme,
    pub dim: usize,
    pub trials: usize,
    pub max_deviation: f64,
    /// Tensor designs are not 2-designs; their deviation is reported but
    /// carries no pass/fail meaning.
    pub exempt: bool,
}

impl DesignReport {
    pub fn passed(&self) -> bool {
        self.exempt || self.max_deviation <= IDENTITY_TOL
    }
}

pub fn verify_design(design: &WeightedDesign, trials: usize, seed: u64) -> DesignReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = design.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let a = linalg::random_hermitian(&mut rng, d);
        let b = linalg::random_hermitian(&mut rng, d);
        let haar = (linalg::trace(&a) * linalg::trace(&b) + linalg::trace_product(&a, &b)) / (d * (d + 1)) as f64;
        worst = worst.max((design.quadratic_average(&a, &b) - haar).norm());
    }
    DesignReport {
        scheme: design.scheme(),
        dim: d,
        trials,
        max_deviation: worst,
        exempt: design.scheme() == Scheme::Tensor,
    }
}

impl WeightedDesign {
    fn single(
        scheme: Scheme,
        dim: usize,
        states: Vec<CVector>,
        probabilities: Vec<f64>,
        tags: Vec<Vec<SurvivalTag>>,
    ) -> Self {
        let factor_indices = (0..states.len()).map(|k| vec![k]).collect();
        Self { scheme, dim, factor_dims: vec![dim], states, probabilities, tags, factors: Vec::new(), factor_indices }
    }

    /// Builds a single-factor design from explicit states and weights.
    /// Probabilities must sum to 1 and states must be normalized (1e-12).
    pub fn from_states(scheme: Scheme, states: Vec<CVector>, probabilities: Vec<f64>) -> Result<Self> {
        let dim = states.first().map(|s| s.len()).ok_or(Error::EmptyFactors)?;
        if states.len() != probabilities.len() {
            return Err(Error::Malformed("one probability per state required".into()));
        }
        if let Some(s) = states.iter().find(|s| s.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: s.len() });
        }
        if states.iter().any(|s| (s.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::Malformed("design states must have unit norm".into()));
        }
        if (probabilities.iter().sum::<f64>() - 1.0).abs() > 1e-12 || probabilities.iter().any(|&p| p < 0.0) {
            return Err(Error::Malformed("probabilities must be nonnegative and sum to 1".into()));
        }
        let tags = (0..states.len()).map(|k| vec![SurvivalTag { basis: 0, index: k }]).collect();
        Ok(Self::single(scheme, dim, states, probabilities, tags))
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn num_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[CVector] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &CVector {
        &self.states[k]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn survival_tags(&self, k: usize) -> &[SurvivalTag] {
        &self.tags[k]
    }

    /// The single-factor designs a tensor design was built from
    /// (empty for single-factor designs).
    pub fn factors(&self) -> &[WeightedDesign] {
        &self.factors
    }

    /// Per-factor component of state `k`; for single-factor designs this
    /// is the state itself.
    pub fn factor_state(&self, k: usize, factor: usize) -> &CVector {
        if self.factors.is_empty() {
            assert_eq!(factor, 0, "single-factor design");
            &self.states[k]
        } else {
            &self.factors[factor].states[self.factor_indices[k][factor]]
        }
    }

    /// `Σ_φ p_φ <φ|A|φ><φ|B|φ>`.
    pub fn quadratic_average(&self, a: &CMatrix, b: &CMatrix) -> Complex64 {
        self.states
            .iter()
            .zip(&self.probabilities)
            .map(|(v, &p)| {
                let va = v.dotc(&(a * v));
                let vb = v.dotc(&(b * v));
                va * vb * p
            })
            .sum()
    }

    pub fn to_file(&self) -> DesignFile {
        DesignFile {
            scheme: self.scheme,
            d: self.dim,
            factor_dims: self.factor_dims.clone(),
            states: self.states.iter().map(|s| s.iter().map(|z| [z.re, z.im]).collect()).collect(),
            probabilities: self.probabilities.clone(),
            survival_meta: self
                .tags
                .iter()
                .map(|t| match t.as_slice() {
                    [single] if self.factors.is_empty() => SurvivalMeta::Single([single.basis, single.index]),
                    many => SurvivalMeta::PerFactor(many.iter().map(|t| [t.basis, t.index]).collect()),
                })
                .collect(),
        }
    }
}

/// JSON form of a design. Amplitudes are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignFile {
    pub scheme: Scheme,
    pub d: usize,
    pub factor_dims: Vec<usize>,
    pub states: Vec<Vec<[f64; 2]>>,
    pub probabilities: Vec<f64>,
    pub survival_meta: Vec<SurvivalMeta>,
}

/// `[basis, index]` for single-factor designs, one such pair per factor
/// for tensor designs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SurvivalMeta {
    Single([usize; 2]),
    PerFactor(Vec<[usize; 2]>),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_mub_matches_textbook_bases() {
        let m = build_mub(2).unwrap();
        assert_eq!(m.num_bases(), 3);
        let h = 1.0 / 2f64.sqrt();
        let plus = CVector::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)]);
        let plus_i = CVector::from_vec(vec![Complex64::new(h, 0.0), Complex64::new(0.0, h)]);
        // basis 1 holds {|+>, |->} and basis 2 holds {|+i>, |-i>}, up to order
        let contains = |basis: usize, v: &CVector| (0..2).any(|k| (m.state(basis, k) - v).norm() < 1e-12);
        assert!(contains(1, &plus) || contains(2, &plus));
        assert!(contains(1, &plus_i) || contains(2, &plus_i));
        assert_eq!(m.basis(0), &linalg::identity(2));
    }

    #[test]
    fn mub_validity_for_supported_dims() {
        for d in [2, 3, 4, 5, 7, 8, 9, 11, 13, 16] {
            let m = build_mub(d).unwrap();
            assert_eq!(m.num_bases(), d + 1);
            let (o, u) = m.max_deviation();
            assert!(o <= STRUCTURE_TOL && u <= STRUCTURE_TOL, "d={d}: {o:e} {u:e}");
        }
    }

    #[test]
    fn mub_phase_expansion_matches_states() {
        let m = build_mub(9).unwrap();
        for basis in 1..=9 {
            for k in 0..9 {
                let v = m.state(basis, k);
                for j in 0..9 {
                    let want = Complex64::from_polar(1.0 / 3.0, m.phase(basis, j, k));
                    assert!((v[j] - want).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn mub_errors() {
        assert_eq!(build_mub(6).unwrap_err(), Error::NotPrimePower(6));
        assert_eq!(build_mub(1).unwrap_err(), Error::DimensionTooSmall(1));
        assert_eq!(build_mub(12).unwrap_err(), Error::NotPrimePower(12));
    }

    #[test]
    fn uniform_design_sizes() {
        let x2 = mub_to_design(&build_mub(2).unwrap());
        assert_eq!(x2.len(), 6);
        assert!(x2.probabilities().iter().all(|&p| (p - 1.0 / 6.0).abs() < 1e-15));
        let x3 = mub_to_design(&build_mub(3).unwrap());
        assert_eq!(x3.len(), 12);
        assert!(x3.probabilities().iter().all(|&p| (p - 1.0 / 12.0).abs() < 1e-15));
        assert_eq!(x3.survival_tags(5), &[SurvivalTag { basis: 1, index: 2 }]);
    }

    #[test]
    fn qubit_design_average_of_ground_projector() {
        // (1² + 0² + 4·(1/2)²)/6 = 1/3 = (1 + 1)/(2·3)
        let x = mub_to_design(&build_mub(2).unwrap());
        let p0 = linalg::matrix_unit(2, 0, 0);
        let avg = x.quadratic_average(&p0, &p0);
        assert!((avg.re - 1.0 / 3.0).abs() < 1e-15 && avg.im.abs() < 1e-15);
    }

    #[test]
    fn tensor_design_sizes() {
        let x2 = mub_to_design(&build_mub(2).unwrap());
        let x3 = mub_to_design(&build_mub(3).unwrap());
        let x4 = mub_to_design(&build_mub(4).unwrap());
        let t = tensor_design(&[x2.clone(), x3.clone()]).unwrap();
        assert_eq!((t.len(), t.dim()), (72, 6));
        assert!(t.probabilities().iter().all(|&p| (p - 1.0 / 72.0).abs() < 1e-15));
        assert_eq!(t.factor_dims(), &[2, 3]);
        assert_eq!(t.survival_tags(13), &[SurvivalTag { basis: 0, index: 1 }, SurvivalTag { basis: 0, index: 1 }]);
        let t2 = tensor_design(&[x4, x3.clone()]).unwrap();
        assert_eq!((t2.len(), t2.dim()), (240, 12));
        let single = tensor_design(std::slice::from_ref(&x3)).unwrap();
        assert_eq!(single.states(), x3.states());
        assert_eq!(single.scheme(), Scheme::UniformMub);
        assert_eq!(tensor_design(&[]).unwrap_err(), Error::EmptyFactors);
        // each product state is the kron of its factor components
        let k = 41;
        let v = t.factor_state(k, 0).kronecker(t.factor_state(k, 1));
        assert!((v - t.state(k)).norm() < 1e-15);
    }

    #[test]
    fn projected_design_weights() {
        let x = projected_design(6, 7).unwrap();
        assert_eq!(x.len(), 6 + 49);
        let heavy = x.probabilities().iter().filter(|&&p| (p - 1.0 / 42.0).abs() < 1e-15).count();
        let light = x.probabilities().iter().filter(|&&p| (p - 36.0 / (49.0 * 42.0)).abs() < 1e-15).count();
        assert_eq!((heavy, light), (6, 49));
        assert!((x.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(x.states().iter().all(|s| (s.norm() - 1.0).abs() < 1e-12));
        assert_eq!(projected_design(6, 5).unwrap_err(), Error::DimensionOrder { dim: 6, big: 5 });
        assert_eq!(projected_design(6, 6).unwrap_err(), Error::NotPrimePower(6));
    }

    #[test]
    fn design_identity_checks() {
        let r = verify_design(&mub_to_design(&build_mub(3).unwrap()), 100, 1);
        assert!(r.max_deviation <= IDENTITY_TOL && r.passed());
        let r = verify_design(&projected_design(6, 7).unwrap(), 100, 2);
        assert!(r.max_deviation <= IDENTITY_TOL);
        let x2 = mub_to_design(&build_mub(2).unwrap());
        let x3 = mub_to_design(&build_mub(3).unwrap());
        let r = verify_design(&tensor_design(&[x2, x3]).unwrap(), 10, 3);
        assert!(r.exempt && r.passed());
        assert!(r.max_deviation > IDENTITY_TOL);
    }

    #[test]
    fn design_file_shape() {
        let x2 = mub_to_design(&build_mub(2).unwrap());
        let x3 = mub_to_design(&build_mub(3).unwrap());
        let f = tensor_design(&[x2.clone(), x3]).unwrap().to_file();
        let json = serde_json::to_value(&f).unwrap();
        assert_eq!(json["scheme"], "tensor");
        assert_eq!(json["states"][0].as_array().unwrap().len(), 6);
        assert_eq!(json["survival_meta"][0], serde_json::json!([[0, 0], [0, 0]]));
        let single = serde_json::to_value(x2.to_file()).unwrap();
        assert_eq!(single["scheme"], "uniform-MUB");
        assert_eq!(single["survival_meta"][3], serde_json::json!([1, 1]));
        let back: DesignFile = serde_json::from_value(json).unwrap();
        assert_eq!(back, f);
    }
}
