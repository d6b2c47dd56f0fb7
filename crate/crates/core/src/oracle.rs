//! Brute-force ground truth.
//!
//! Everything here is computed by exhaustive summation over design states
//! or by direct reconstruction from the channel's action; nothing is
//! sampled. These are the reference values the estimator is checked
//! against, and they are also used to confirm the closed-form averaging
//! identities the estimator relies on.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{ChiMatrix, KrausChannel, ProductOperatorBasis, StandardChannel};
use crate::design::{self, build_mub, mub_to_design, projected_design, tensor_design, WeightedDesign, IDENTITY_TOL};
use crate::dimension::{prime_power, smallest_prime_power_above, DimensionFactorization};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ZERO};

/// `(Tr A Tr B + Tr[AB]) / (d(d+1))`, the Haar average of `<ψ|A|ψ><ψ|B|ψ>`.
pub fn haar_quadratic_average(a: &CMatrix, b: &CMatrix) -> Result<Complex64> {
    let d = a.nrows();
    if a.ncols() != d || b.nrows() != d || b.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: b.nrows() });
    }
    Ok((linalg::trace(a) * linalg::trace(b) + linalg::trace_product(a, b)) / (d * (d + 1)) as f64)
}

/// An input state `ρ = w Σ_s |v_s><v_s|` with the channel's Kraus operators
/// pulled back onto each `v_s`, so that `Tr[ρ ℰ(E_i† ρ E_j)]` costs only
/// vector work per index pair.
struct MixedInput {
    weight: f64,
    vectors: Vec<CVector>,
    /// `pulled[t][k] = A_k† v_t`.
    pulled: Vec<Vec<CVector>>,
}

impl MixedInput {
    fn new(ch: &KrausChannel, vectors: Vec<CVector>) -> Self {
        let weight = 1.0 / vectors.len() as f64;
        let pulled = vectors.iter().map(|v| ch.kraus().iter().map(|a| a.adjoint() * v).collect()).collect();
        Self { weight, vectors, pulled }
    }

    /// `Tr[ρ ℰ(E_i† ρ E_j)]` given `E_i†` and `E_j†`.
    fn survival(&self, ei_dag: &CMatrix, ej_dag: &CMatrix) -> Complex64 {
        let mut acc = ZERO;
        for v in &self.vectors {
            let u = ei_dag * v;
            let w = ej_dag * v;
            for rows in &self.pulled {
                for r in rows {
                    acc += r.dotc(&u) * r.dotc(&w).conj();
                }
            }
        }
        acc * (self.weight * self.weight)
    }
}

/// Weighted collection of inputs whose average survival is one fidelity.
struct FidelityTerm {
    scale: f64,
    inputs: Vec<(f64, MixedInput)>,
}

impl FidelityTerm {
    fn value(&self, ei_dag: &CMatrix, ej_dag: &CMatrix) -> Complex64 {
        self.inputs.iter().map(|(p, input)| input.survival(ei_dag, ej_dag) * *p).sum::<Complex64>() * self.scale
    }
}

fn pure_term(ch: &KrausChannel, design: &WeightedDesign) -> FidelityTerm {
    FidelityTerm {
        scale: 1.0,
        inputs: design
            .states()
            .iter()
            .zip(design.probabilities())
            .map(|(s, &p)| (p, MixedInput::new(ch, vec![s.clone()])))
            .collect(),
    }
}

/// Reduced term for survival pattern `mask` (bit `a` set ⇔ subsystem `a`
/// is fed a design state and read out; the rest are maximally mixed and
/// ignored). The average is scaled by `∏_{m_a=0} D_a`, which turns
/// `Tr[ρ ℰ(ρ)]` into the survival probability of the read-out subsystems.
fn reduced_term(ch: &KrausChannel, factors: &[WeightedDesign], mask: u32) -> FidelityTerm {
    let dims: Vec<usize> = factors.iter().map(WeightedDesign::dim).collect();
    let kept: Vec<usize> = (0..factors.len()).filter(|&a| mask >> a & 1 == 1).collect();
    let mixed: Vec<usize> = (0..factors.len()).filter(|&a| mask >> a & 1 == 0).collect();
    let kept_sizes: Vec<usize> = kept.iter().map(|&a| factors[a].len()).collect();
    let mixed_dims: Vec<usize> = mixed.iter().map(|&a| dims[a]).collect();
    let mixed_size: usize = mixed_dims.iter().product();

    let mut inputs = Vec::new();
    for s in 0..kept_sizes.iter().product::<usize>() {
        let pick = linalg::unflatten(s, &kept_sizes);
        let prob: f64 = pick.iter().zip(&kept).map(|(&k, &a)| factors[a].probabilities()[k]).product();
        let vectors = (0..mixed_size)
            .map(|l| {
                let levels = linalg::unflatten(l, &mixed_dims);
                let parts: Vec<CVector> = (0..factors.len())
                    .map(|a| match kept.iter().position(|&x| x == a) {
                        Some(pos) => factors[a].state(pick[pos]).clone(),
                        None => {
                            let pos = mixed.iter().position(|&x| x == a).unwrap();
                            linalg::basis_vector(dims[a], levels[pos])
                        }
                    })
                    .collect();
                linalg::kron_vectors(parts.iter())
            })
            .collect();
        inputs.push((prob, MixedInput::new(ch, vectors)));
    }
    FidelityTerm { scale: mixed_size as f64, inputs }
}

fn check_pair(ch: &KrausChannel, basis: &ProductOperatorBasis, i: usize, j: usize) -> Result<()> {
    if basis.dim() != ch.dim() {
        return Err(Error::DimensionMismatch { expected: ch.dim(), got: basis.dim() });
    }
    basis.check_index(i)?;
    basis.check_index(j)
}

/// `Σ_φ p_φ Tr[P_φ ℰ(E_i† P_φ E_j)]` over every state of `design`.
pub fn exact_mean_fidelity(
    ch: &KrausChannel,
    basis: &ProductOperatorBasis,
    i: usize,
    j: usize,
    design: &WeightedDesign,
) -> Result<Complex64> {
    check_pair(ch, basis, i, j)?;
    if design.dim() != ch.dim() {
        return Err(Error::DimensionMismatch { expected: ch.dim(), got: design.dim() });
    }
    Ok(pure_term(ch, design).value(&basis.element(i).adjoint(), &basis.element(j).adjoint()))
}

/// Reduced mean survival fidelity `F̄_m̄` for the pattern `pattern`
/// (`true` = design state on that subsystem, `false` = maximally mixed),
/// one design per factor.
pub fn exact_reduced_fidelity(
    ch: &KrausChannel,
    basis: &ProductOperatorBasis,
    i: usize,
    j: usize,
    pattern: &[bool],
    factors: &[WeightedDesign],
) -> Result<Complex64> {
    check_pair(ch, basis, i, j)?;
    if pattern.len() != factors.len() {
        return Err(Error::LengthMismatch { expected: factors.len(), got: pattern.len() });
    }
    let d: usize = factors.iter().map(WeightedDesign::dim).product();
    if d != ch.dim() {
        return Err(Error::DimensionMismatch { expected: ch.dim(), got: d });
    }
    if pattern.iter().all(|&m| !m) {
        return Err(Error::InvalidParameter("reduced fidelity undefined for the all-mixed pattern".into()));
    }
    let ei = basis.element(i).adjoint();
    let ej = basis.element(j).adjoint();
    if pattern.iter().all(|&m| m) {
        return Ok(pure_term(ch, &tensor_design(factors)?).value(&ei, &ej));
    }
    let mask = pattern.iter().enumerate().fold(0u32, |acc, (a, &m)| acc | (m as u32) << a);
    Ok(reduced_term(ch, factors, mask).value(&ei, &ej))
}

/// Precomputed fidelity terms for one channel, for evaluating many
/// `(i, j)` pairs.
pub struct FidelityTable<'a> {
    basis: &'a ProductOperatorBasis,
    factor_dims: Vec<usize>,
    full: FidelityTerm,
    /// `(mask, term)` for every pattern other than all-zeros and all-ones.
    reduced: Vec<(u32, FidelityTerm)>,
}

impl<'a> FidelityTable<'a> {
    /// Mean-fidelity table for a single-factor 2-design.
    pub fn single(ch: &KrausChannel, basis: &'a ProductOperatorBasis, design: &WeightedDesign) -> Result<Self> {
        if design.dim() != ch.dim() || basis.dim() != ch.dim() {
            return Err(Error::DimensionMismatch { expected: ch.dim(), got: design.dim() });
        }
        Ok(Self { basis, factor_dims: vec![design.dim()], full: pure_term(ch, design), reduced: Vec::new() })
    }

    /// Mean and all reduced fidelity tables for a product of designs.
    pub fn tensor(ch: &KrausChannel, basis: &'a ProductOperatorBasis, factors: &[WeightedDesign]) -> Result<Self> {
        let product = tensor_design(factors)?;
        if product.dim() != ch.dim() || basis.dim() != ch.dim() {
            return Err(Error::DimensionMismatch { expected: ch.dim(), got: product.dim() });
        }
        let n = factors.len() as u32;
        let all = (1u32 << n) - 1;
        let reduced = (1..all).map(|mask| (mask, reduced_term(ch, factors, mask))).collect();
        Ok(Self {
            basis,
            factor_dims: factors.iter().map(WeightedDesign::dim).collect(),
            full: pure_term(ch, &product),
            reduced,
        })
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    /// `F̄(ℰ_j^i)` and, for tensor tables, every `(mask, F̄_m̄)`.
    pub fn fidelities(&self, i: usize, j: usize) -> Result<(Complex64, Vec<(u32, Complex64)>)> {
        self.basis.check_index(i)?;
        self.basis.check_index(j)?;
        let ei = self.basis.element(i).adjoint();
        let ej = self.basis.element(j).adjoint();
        let full = self.full.value(&ei, &ej);
        let reduced = self.reduced.iter().map(|(m, t)| (*m, t.value(&ei, &ej))).collect();
        Ok((full, reduced))
    }

    /// χ^i_j recombined from the exact fidelities.
    pub fn chi_element(&self, i: usize, j: usize) -> Result<Complex64> {
        let (full, reduced) = self.fidelities(i, j)?;
        Ok(combine_fidelities(&self.factor_dims, i == j, full, &reduced))
    }
}

/// General recombination:
/// `χ = F̄_⊗ ∏(D_a+1)/d + (2^N − 3)δ/d − Σ_{m̄∉{0̄,1̄}} F̄_m̄ ∏_{m_a=1}(D_a+1)/d`.
/// With `N = 1` this is the single-design inversion `((d+1)F̄ − δ)/d`.
pub fn combine_fidelities(factor_dims: &[usize], diagonal: bool, full: Complex64, reduced: &[(u32, Complex64)]) -> Complex64 {
    let d: usize = factor_dims.iter().product();
    let df = d as f64;
    let n = factor_dims.len() as i32;
    let weight = |mask: u32| -> f64 {
        factor_dims.iter().enumerate().filter(|(a, _)| mask >> a & 1 == 1).map(|(_, &da)| (da + 1) as f64).product()
    };
    let all = (1u32 << n) - 1;
    let delta = if diagonal { 1.0 } else { 0.0 };
    let mut chi = full * weight(all) / df + Complex64::from(((1i64 << n) - 3) as f64 * delta / df);
    for (mask, f) in reduced {
        chi -= f * weight(*mask) / df;
    }
    chi
}

/// Bipartite recombination written out term by term.
pub fn combine_bipartite(dims: [usize; 2], diagonal: bool, full: Complex64, f1: Complex64, f2: Complex64) -> Complex64 {
    let [d1, d2] = dims.map(|x| x as f64);
    let d = d1 * d2;
    let delta = if diagonal { 1.0 } else { 0.0 };
    full * ((1.0 + d1) * (1.0 + d2) / d) + delta / d - f1 * ((1.0 + d1) / d) - f2 * ((1.0 + d2) / d)
}

/// χ-matrix rebuilt from the channel's action on matrix units.
///
/// The Choi matrix `Λ[(a,c),(b,e)] = <a|ℰ(|c><e|)|b>` equals `V χ V†` where
/// column `m` of `V` is `E_m` flattened row-major; `χ = G⁻¹ V†ΛV G⁻¹` with
/// Gram matrix `G = V†V`. No Kraus coefficients are used.
pub fn exact_chi(ch: &KrausChannel, basis: &ProductOperatorBasis) -> Result<ChiMatrix> {
    let d = ch.dim();
    if basis.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: basis.dim() });
    }
    let n = d * d;
    let mut choi = CMatrix::zeros(n, n);
    for c in 0..d {
        for e in 0..d {
            let out = ch.apply(&linalg::matrix_unit(d, c, e))?;
            for a in 0..d {
                for b in 0..d {
                    choi[(a * d + c, b * d + e)] = out[(a, b)];
                }
            }
        }
    }
    let v = CMatrix::from_fn(n, basis.len(), |row, m| basis.element(m)[(row / d, row % d)]);
    let vh = v.adjoint();
    let gram = &vh * &v;
    let projected = &vh * choi * &v;
    let lu = gram.lu();
    let left = lu.solve(&projected).ok_or(Error::SingularBasis)?;
    let chi = lu.solve(&left.adjoint()).ok_or(Error::SingularBasis)?.adjoint();
    Ok(ChiMatrix { factor_dims: basis.factor_dims(), chi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IdentityName {
    /// Uniform MUB design reproduces the Haar quadratic average.
    Eq3,
    /// Bipartite tensor-design average with its two local correction terms.
    Eq8,
    /// Haar average recovered from the bipartite tensor-design average.
    Eq9,
    /// N-partite tensor-design average as a sum over traced subsets.
    Eq10,
    /// Haar mean survival of the modified channel equals `(dχ + δ)/(d + 1)`.
    Eq12,
    /// Bipartite χ recombination from tensor-design fidelities.
    Eq13,
    /// N-partite χ recombination from tensor-design fidelities.
    ChiFidN,
    /// Projected design reproduces the Haar quadratic average.
    NonUniform2Design,
    /// Closed form of the reduced fidelity over subsystem 1.
    AppendixAF1,
}

impl IdentityName {
    pub const ALL: [IdentityName; 9] = [
        IdentityName::Eq3,
        IdentityName::Eq8,
        IdentityName::Eq9,
        IdentityName::Eq10,
        IdentityName::Eq12,
        IdentityName::Eq13,
        IdentityName::ChiFidN,
        IdentityName::NonUniform2Design,
        IdentityName::AppendixAF1,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            IdentityName::Eq3 => "eq3",
            IdentityName::Eq8 => "eq8",
            IdentityName::Eq9 => "eq9",
            IdentityName::Eq10 => "eq10",
            IdentityName::Eq12 => "eq12",
            IdentityName::Eq13 => "eq13",
            IdentityName::ChiFidN => "chifidN",
            IdentityName::NonUniform2Design => "nonuniform2design",
            IdentityName::AppendixAF1 => "appendixA-F1",
        }
    }

    /// Dimension used when none is given.
    pub fn default_dim(&self) -> usize {
        match self {
            IdentityName::Eq3 => 5,
            IdentityName::Eq10 | IdentityName::ChiFidN => 30,
            _ => 6,
        }
    }

    /// Trial count used when none is given.
    pub fn default_trials(&self) -> usize {
        match self {
            IdentityName::Eq12 | IdentityName::Eq13 | IdentityName::AppendixAF1 => 20,
            IdentityName::ChiFidN => 2,
            _ => 100,
        }
    }
}

impl fmt::Display for IdentityName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        IdentityName::ALL
            .into_iter()
            .find(|n| n.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownIdentity(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub max_deviation: f64,
    pub passed: bool,
}

/// Index pairs examined per random channel in the χ identities.
const PAIRS_PER_CHANNEL: usize = 30;

fn factor_designs(dims: &[usize]) -> Result<Vec<WeightedDesign>> {
    dims.iter().map(|&d| Ok(mub_to_design(&build_mub(d)?))).collect()
}

fn not_applicable(name: IdentityName, reason: String) -> Error {
    Error::IdentityNotApplicable { name: name.to_string(), reason }
}

fn bipartite_dims(name: IdentityName, dim: usize) -> Result<[usize; 2]> {
    let dims = DimensionFactorization::new(dim)?.subsystem_dims();
    match dims.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(not_applicable(name, format!("d = {dim} (needs exactly two distinct prime factors)"))),
    }
}

fn random_channel(rng: &mut ChaCha8Rng, dim: usize) -> Result<KrausChannel> {
    let rank = rng.random_range(1..=3);
    StandardChannel::RandomCptp { rank, seed: rng.random() }.build(dim)
}

fn sample_pairs(rng: &mut ChaCha8Rng, len: usize) -> Vec<(usize, usize)> {
    let mut pairs = vec![(0, 0)];
    pairs.extend((1..PAIRS_PER_CHANNEL).map(|_| {
        let i = rng.random_range(0..len);
        // a third of the sample on the diagonal, where the δ terms matter
        let j = if rng.random_bool(1.0 / 3.0) { i } else { rng.random_range(0..len) };
        (i, j)
    }));
    pairs
}

/// Evaluates both sides of a named identity on `trials` random instances
/// and reports the largest absolute deviation.
///
/// `big` selects the embedding dimension for `nonuniform2design` (default:
/// the smallest prime power above `dim`).
pub fn check_identity(
    name: IdentityName,
    dim: usize,
    big: Option<usize>,
    trials: usize,
    seed: u64,
) -> Result<IdentityReport> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut note = |x: f64| worst = worst.max(x);
    let haar = |a: &CMatrix, b: &CMatrix| haar_quadratic_average(a, b).expect("square operands");

    let dims_reported = match name {
        IdentityName::Eq3 => {
            if prime_power(dim).is_none() {
                return Err(not_applicable(name, format!("d = {dim} (needs a prime power)")));
            }
            let x = mub_to_design(&build_mub(dim)?);
            for _ in 0..trials {
                let a = linalg::random_hermitian(&mut rng, dim);
                let b = linalg::random_hermitian(&mut rng, dim);
                note((x.quadratic_average(&a, &b) - haar(&a, &b)).norm());
            }
            vec![dim]
        }
        IdentityName::Eq8 | IdentityName::Eq9 => {
            let [d1, d2] = bipartite_dims(name, dim)?;
            let x = tensor_design(&factor_designs(&[d1, d2])?)?;
            let df = dim as f64;
            for _ in 0..trials {
                let a = linalg::random_hermitian(&mut rng, dim);
                let b = linalg::random_hermitian(&mut rng, dim);
                let local = linalg::trace_product(&a, &linalg::replace_with_identity(&b, &[d1, d2], 0b01))
                    + linalg::trace_product(&a, &linalg::replace_with_identity(&b, &[d1, d2], 0b10));
                let avg = x.quadratic_average(&a, &b);
                let (d1f, d2f) = (d1 as f64, d2 as f64);
                if name == IdentityName::Eq8 {
                    let rhs = (linalg::trace(&a) * linalg::trace(&b) + linalg::trace_product(&a, &b) + local)
                        / (df * (d1f + 1.0) * (d2f + 1.0));
                    note((avg - rhs).norm());
                } else {
                    let rhs = avg * ((d1f + 1.0) * (d2f + 1.0) / (df + 1.0)) - local / (df * (df + 1.0));
                    note((haar(&a, &b) - rhs).norm());
                }
            }
            vec![d1, d2]
        }
        IdentityName::Eq10 => {
            let dims = DimensionFactorization::new(dim)?.subsystem_dims();
            let x = tensor_design(&factor_designs(&dims)?)?;
            let denom = dim as f64 * dims.iter().map(|&da| (da + 1) as f64).product::<f64>();
            for _ in 0..trials {
                let a = linalg::random_hermitian(&mut rng, dim);
                let b = linalg::random_hermitian(&mut rng, dim);
                let rhs: Complex64 = (0..1u32 << dims.len())
                    .map(|mask| linalg::trace_product(&a, &linalg::replace_with_identity(&b, &dims, mask)))
                    .sum::<Complex64>()
                    / denom;
                note((x.quadratic_average(&a, &b) - rhs).norm());
            }
            dims
        }
        IdentityName::Eq12 => {
            let dims = DimensionFactorization::new(dim)?.subsystem_dims();
            let basis = ProductOperatorBasis::weyl(&dims)?;
            let df = dim as f64;
            for _ in 0..trials {
                let ch = random_channel(&mut rng, dim)?;
                let chi = exact_chi(&ch, &basis)?;
                for (i, j) in sample_pairs(&mut rng, basis.len()) {
                    let ei = basis.element(i).adjoint();
                    let ej = basis.element(j);
                    // Haar average of Tr[P A_k E_i† P E_j A_k†], term by term
                    let lhs: Complex64 =
                        ch.kraus().iter().map(|a| haar(&(a * &ei), &(ej * a.adjoint()))).sum();
                    let delta = if i == j { 1.0 } else { 0.0 };
                    let rhs = (chi.get(i, j) * df + delta) / (df + 1.0);
                    note((lhs - rhs).norm());
                }
            }
            dims
        }
        IdentityName::Eq13 | IdentityName::ChiFidN | IdentityName::AppendixAF1 => {
            let dims = if name == IdentityName::ChiFidN {
                DimensionFactorization::new(dim)?.subsystem_dims()
            } else {
                bipartite_dims(name, dim)?.to_vec()
            };
            let factors = factor_designs(&dims)?;
            let basis = ProductOperatorBasis::weyl(&dims)?;
            for _ in 0..trials {
                let ch = random_channel(&mut rng, dim)?;
                let chi = exact_chi(&ch, &basis)?;
                let table = FidelityTable::tensor(&ch, &basis, &factors)?;
                for (i, j) in sample_pairs(&mut rng, basis.len()) {
                    let (full, reduced) = table.fidelities(i, j)?;
                    let lookup = |mask: u32| reduced.iter().find(|(m, _)| *m == mask).unwrap().1;
                    let deviation = match name {
                        IdentityName::Eq13 => {
                            let got = combine_bipartite([dims[0], dims[1]], i == j, full, lookup(0b01), lookup(0b10));
                            (got - chi.get(i, j)).norm()
                        }
                        IdentityName::ChiFidN => {
                            (combine_fidelities(&dims, i == j, full, &reduced) - chi.get(i, j)).norm()
                        }
                        _ => (lookup(0b01) - reduced_fidelity_closed_form(&chi, &basis, i, j)).norm(),
                    };
                    note(deviation);
                }
            }
            dims
        }
        IdentityName::NonUniform2Design => {
            let big = big.unwrap_or_else(|| smallest_prime_power_above(dim));
            let x = projected_design(dim, big)?;
            let report = design::verify_design(&x, trials, rng.random());
            note(report.max_deviation);
            vec![dim, big]
        }
    };

    Ok(IdentityReport {
        identity: name.to_string(),
        dims: dims_reported,
        trials,
        max_deviation: worst,
        passed: worst <= IDENTITY_TOL,
    })
}

/// Reduced fidelity over subsystem 1 of a bipartite system from χ:
/// `Σ_{μ₂ν₂} χ^{i₁μ₂}_{j₁ν₂} Tr[E_{μ₂} E_{i₂}† E_{j₂} E_{ν₂}†] D₁/(D₂(D₁+1)) + δ/(D₁+1)`.
pub fn reduced_fidelity_closed_form(chi: &ChiMatrix, basis: &ProductOperatorBasis, i: usize, j: usize) -> Complex64 {
    let sys2 = &basis.factors()[1];
    let (d1, d2) = (basis.factors()[0].dim() as f64, sys2.dim() as f64);
    let [i1, i2]: [usize; 2] = basis.unflatten(i).try_into().expect("bipartite basis");
    let [j1, j2]: [usize; 2] = basis.unflatten(j).try_into().expect("bipartite basis");
    let middle = sys2.element(i2).adjoint() * sys2.element(j2);
    let mut acc = ZERO;
    for mu in 0..sys2.len() {
        let left = sys2.element(mu) * &middle;
        for nu in 0..sys2.len() {
            let c = chi.get(basis.flatten(&[i1, mu]), basis.flatten(&[j1, nu]));
            if c != ZERO {
                acc += c * linalg::trace_product(&left, &sys2.element(nu).adjoint());
            }
        }
    }
    let delta = if i == j { 1.0 } else { 0.0 };
    acc * (d1 / (d2 * (d1 + 1.0))) + delta / (d1 + 1.0)
}
