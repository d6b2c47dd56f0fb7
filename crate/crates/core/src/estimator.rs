//! Simulation of the selective tomography circuits and recombination of
//! their outcome counts into χ-matrix estimates.
//!
//! Each shot prepares `(|0>⊗E_i†|ψ> + |1>⊗E_j†|ψ>)/√2`, sends the system
//! through the channel, measures the ancilla in the X (real part) or Y
//! (imaginary part) basis and checks per subsystem whether the input state
//! survived. The ancilla sign is oriented so that
//! `E[sign · 1(r̄ = 1̄)] = Re/Im Tr[P_ψ ℰ(E_i† P_ψ E_j)]`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{KrausChannel, ProductOperatorBasis};
use crate::design::{build_mub, mub_to_design, projected_design, tensor_design, SurvivalTag, WeightedDesign};
use crate::dimension::{prime_power, smallest_prime_power_above, DimensionFactorization};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::oracle::{combine_fidelities, FidelityTable};

pub use crate::dimension::omega;

/// Probabilities below this are treated as roundoff when building outcome
/// distributions.
pub const PROBABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorScheme {
    #[serde(rename = "primepower")]
    PrimePower,
    #[serde(rename = "tensor")]
    Tensor,
    #[serde(rename = "projected")]
    Projected,
}

impl EstimatorScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorScheme::PrimePower => "primepower",
            EstimatorScheme::Tensor => "tensor",
            EstimatorScheme::Projected => "projected",
        }
    }

    /// Prime-power dimensions use the complete MUB set, everything else the
    /// tensor product of MUB sets.
    pub fn default_for(dim: usize) -> Self {
        if prime_power(dim).is_some() {
            EstimatorScheme::PrimePower
        } else {
            EstimatorScheme::Tensor
        }
    }
}

impl fmt::Display for EstimatorScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "primepower" | "prime-power" | "mub" => Ok(EstimatorScheme::PrimePower),
            "tensor" => Ok(EstimatorScheme::Tensor),
            "projected" => Ok(EstimatorScheme::Projected),
            _ => Err(Error::InvalidParameter(format!("unknown scheme `{s}` (expected primepower, tensor or projected)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    MonteCarlo,
    Exact,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "montecarlo" | "mc" => Ok(Mode::MonteCarlo),
            "exact" => Ok(Mode::Exact),
            _ => Err(Error::InvalidParameter(format!("unknown mode `{s}` (expected montecarlo or exact)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Re,
    Im,
}

/// One shot: the ancilla sign and which subsystems survived.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShotOutcome {
    pub ancilla: i8,
    pub survival: Vec<bool>,
}

impl ShotOutcome {
    fn from_code(code: usize, factors: usize) -> Self {
        Self {
            ancilla: if code >> factors & 1 == 1 { -1 } else { 1 },
            survival: (0..factors).map(|a| code >> a & 1 == 1).collect(),
        }
    }
}

fn pattern_bits(r: &[bool]) -> usize {
    r.iter().enumerate().fold(0, |acc, (a, &x)| acc | (x as usize) << a)
}

/// Shot counts `M_{±r̄}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    factors: usize,
    plus: Vec<u64>,
    minus: Vec<u64>,
}

impl CountTable {
    pub fn new(factors: usize) -> Self {
        Self { factors, plus: vec![0; 1 << factors], minus: vec![0; 1 << factors] }
    }

    pub fn factors(&self) -> usize {
        self.factors
    }

    pub fn record(&mut self, outcome: &ShotOutcome) -> Result<()> {
        if outcome.survival.len() != self.factors {
            return Err(Error::LengthMismatch { expected: self.factors, got: outcome.survival.len() });
        }
        self.add(outcome.ancilla, pattern_bits(&outcome.survival), 1);
        Ok(())
    }

    /// Adds `n` shots with sign `sign` and survival pattern `bits`
    /// (bit `a` set ⇔ `r_a = 1`).
    pub fn add(&mut self, sign: i8, bits: usize, n: u64) {
        if sign < 0 {
            self.minus[bits] += n;
        } else {
            self.plus[bits] += n;
        }
    }

    fn add_code(&mut self, code: usize) {
        let mask = (1 << self.factors) - 1;
        if code >> self.factors & 1 == 1 {
            self.minus[code & mask] += 1;
        } else {
            self.plus[code & mask] += 1;
        }
    }

    pub fn merge(mut self, other: &CountTable) -> Self {
        for (a, b) in self.plus.iter_mut().zip(&other.plus) {
            *a += b;
        }
        for (a, b) in self.minus.iter_mut().zip(&other.minus) {
            *a += b;
        }
        self
    }

    pub fn count(&self, sign: i8, survival: &[bool]) -> u64 {
        let bits = pattern_bits(survival);
        if sign < 0 {
            self.minus[bits]
        } else {
            self.plus[bits]
        }
    }

    /// Total shots `M`.
    pub fn total(&self) -> u64 {
        self.plus.iter().chain(&self.minus).sum()
    }

    /// Counts keyed `"+r₁…r_N"` / `"-r₁…r_N"`.
    pub fn to_map(&self) -> BTreeMap<String, u64> {
        let mut out = BTreeMap::new();
        for bits in 0..1usize << self.factors {
            let r: String = (0..self.factors).map(|a| if bits >> a & 1 == 1 { '1' } else { '0' }).collect();
            out.insert(format!("+{r}"), self.plus[bits]);
            out.insert(format!("-{r}"), self.minus[bits]);
        }
        out
    }
}

/// Weight `C_r̄` of survival pattern `r̄` in the count estimator.
pub fn coefficient_c(r: &[bool], factor_dims: &[usize]) -> Result<f64> {
    if r.len() != factor_dims.len() {
        return Err(Error::LengthMismatch { expected: factor_dims.len(), got: r.len() });
    }
    Ok(coefficient_bits(pattern_bits(r), factor_dims))
}

fn coefficient_bits(r: usize, factor_dims: &[usize]) -> f64 {
    let all = (1usize << factor_dims.len()) - 1;
    if r == 0 {
        return 0.0;
    }
    let d: usize = factor_dims.iter().product();
    let weight = |m: usize| -> f64 {
        factor_dims.iter().enumerate().filter(|(a, _)| m >> a & 1 == 1).map(|(_, &da)| (da + 1) as f64).product()
    };
    let mut c = if r == all { weight(all) } else { 0.0 };
    for m in (1..all).filter(|&m| m & r == m) {
        c -= weight(m);
    }
    c / d as f64
}

/// `(1/M) Σ_r̄ C_r̄ (M_{+r̄} − M_{−r̄})`.
pub fn combine_counts(t: &CountTable, factor_dims: &[usize]) -> Result<f64> {
    if t.factors != factor_dims.len() {
        return Err(Error::LengthMismatch { expected: factor_dims.len(), got: t.factors });
    }
    let m = t.total();
    if m == 0 {
        return Err(Error::ZeroShots);
    }
    let sum: f64 = (0..1usize << t.factors)
        .map(|r| coefficient_bits(r, factor_dims) * (t.plus[r] as f64 - t.minus[r] as f64))
        .sum();
    Ok(sum / m as f64)
}

/// Constant `(2^N − 3)/d` that the count sum omits; it contributes to the
/// real part of diagonal elements only.
pub fn diagonal_offset(factor_dims: &[usize]) -> f64 {
    let d: usize = factor_dims.iter().product();
    ((1i64 << factor_dims.len()) - 3) as f64 / d as f64
}

/// χ̂ from the real-part counts and (off the diagonal) the imaginary-part counts.
pub fn estimate_from_counts(re: &CountTable, im: Option<&CountTable>, factor_dims: &[usize], diagonal: bool) -> Result<Complex64> {
    let mut real = combine_counts(re, factor_dims)?;
    if diagonal {
        real += diagonal_offset(factor_dims);
    }
    let imag = match im {
        Some(t) => combine_counts(t, factor_dims)?,
        None => 0.0,
    };
    Ok(Complex64::new(real, imag))
}

/// Inverse-CDF sampler over a design's state probabilities.
#[derive(Debug, Clone)]
pub struct DesignSampler {
    cumulative: Vec<f64>,
}

impl DesignSampler {
    pub fn new(design: &WeightedDesign) -> Self {
        let mut acc = 0.0;
        let cumulative = design
            .probabilities()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty design");
        let u = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SampledInput<'a> {
    pub index: usize,
    pub state: &'a CVector,
    pub survival_meta: &'a [SurvivalTag],
}

/// Draws a design state with its probability.
pub fn sample_input<'a, R: Rng + ?Sized>(design: &'a WeightedDesign, rng: &mut R) -> SampledInput<'a> {
    let index = DesignSampler::new(design).sample(rng);
    SampledInput { index, state: design.state(index), survival_meta: design.survival_tags(index) }
}

/// Per-input outcome distributions for both ancilla measurements.
struct Branches {
    /// `Tr[Π_r̄ (σ₀₀ + σ₁₁)] / 4` indexed by pattern bits.
    population: Vec<f64>,
    /// `Tr[Π_r̄ σ₀₁] / 2`.
    coherence: Vec<Complex64>,
}

fn branches(ch: &KrausChannel, basis: &ProductOperatorBasis, i: usize, j: usize, design: &WeightedDesign, k: usize) -> Branches {
    let v = design.state(k);
    let u = basis.element(i).adjoint() * v;
    let w = basis.element(j).adjoint() * v;
    let d = design.dim();
    let mut pop = CMatrix::zeros(d, d);
    let mut coh = CMatrix::zeros(d, d);
    for a in ch.kraus() {
        let au = a * &u;
        let aw = a * &w;
        pop += &au * au.adjoint() + &aw * aw.adjoint();
        coh += &au * aw.adjoint();
    }
    let n = design.num_factors();
    let projectors: Vec<CMatrix> = (0..n).map(|a| linalg::projector(design.factor_state(k, a))).collect();
    let dims = design.factor_dims();
    let mut population = Vec::with_capacity(1 << n);
    let mut coherence = Vec::with_capacity(1 << n);
    for bits in 0..1usize << n {
        let parts: Vec<CMatrix> = (0..n)
            .map(|a| if bits >> a & 1 == 1 { projectors[a].clone() } else { linalg::identity(dims[a]) - &projectors[a] })
            .collect();
        let pi = linalg::kron_all(parts.iter());
        population.push(linalg::trace_product(&pi, &pop).re / 4.0);
        coherence.push(linalg::trace_product(&pi, &coh) / 2.0);
    }
    Branches { population, coherence }
}

impl Branches {
    /// Distribution over codes `sign_bit << N | pattern_bits`, sign bit set
    /// for the `−1` ancilla result.
    fn distribution(&self, part: Part) -> Vec<f64> {
        let n = self.population.len();
        let mut out = vec![0.0; 2 * n];
        for r in 0..n {
            let c = match part {
                Part::Re => self.coherence[r].re,
                Part::Im => self.coherence[r].im,
            };
            debug_assert!(self.population[r] - c.abs() >= -PROBABILITY_TOL);
            out[r] = (self.population[r] + c).max(0.0);
            out[n + r] = (self.population[r] - c).max(0.0);
        }
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|p| *p /= total);
        out
    }
}

fn check_shot_inputs(ch: &KrausChannel, basis: &ProductOperatorBasis, i: usize, j: usize, design: &WeightedDesign, k: usize) -> Result<()> {
    if ch.dim() != design.dim() {
        return Err(Error::DimensionMismatch { expected: design.dim(), got: ch.dim() });
    }
    if basis.dim() != design.dim() {
        return Err(Error::DimensionMismatch { expected: design.dim(), got: basis.dim() });
    }
    basis.check_index(i)?;
    basis.check_index(j)?;
    if k >= design.len() {
        return Err(Error::IndexOutOfRange { index: k, len: design.len() });
    }
    Ok(())
}

/// Exact distribution of `(sign, r̄)` for input state `k` of `design`,
/// indexed by `sign_bit << N | pattern_bits` (sign bit set for `−1`,
/// bit `a` of the pattern set when subsystem `a` survived).
pub fn outcome_distribution(
    ch: &KrausChannel,
    basis: &ProductOperatorBasis,
    i: usize,
    j: usize,
    design: &WeightedDesign,
    k: usize,
    part: Part,
) -> Result<Vec<f64>> {
    check_shot_inputs(ch, basis, i, j, design, k)?;
    Ok(branches(ch, basis, i, j, design, k).distribution(part))
}

fn draw<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let u = rng.random::<f64>() * cumulative[cumulative.len() - 1];
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

fn cumulate(p: Vec<f64>) -> Vec<f64> {
    let mut acc = 0.0;
    p.into_iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

/// One shot of the circuit with design input `k`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_shot<R: Rng + ?Sized>(
    ch: &KrausChannel,
    basis: &ProductOperatorBasis,
    i: usize,
    j: usize,
    design: &WeightedDesign,
    k: usize,
    part: Part,
    rng: &mut R,
) -> Result<ShotOutcome> {
    let dist = outcome_distribution(ch, basis, i, j, design, k, part)?;
    Ok(ShotOutcome::from_code(draw(&cumulate(dist), rng), design.num_factors()))
}

/// Generator for shot `shot` of part `part`. The key depends only on the
/// root seed and the part, the stream on the shot index, so every shot is
/// reproducible independently of evaluation order.
pub fn shot_rng(seed: u64, part: Part, shot: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8] = match part {
        Part::Re => 1,
        Part::Im => 2,
    };
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(shot);
    rng
}

/// Mixes a root seed with two labels (splitmix64 finalizer).
pub fn derive_seed(root: u64, a: u64, b: u64) -> u64 {
    let mut z = root ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hoeffding shot bound for a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShotBound {
    /// `ln(2/p) / (2ε²)`, complete or projected MUB design.
    SingleDesign,
    /// `2(1 − 1/d)² ln(2/p) / ε²`, bipartite tensor design.
    Bipartite { dim: usize },
    /// `2·4^N ln(2/p) / ε²`, N-partite tensor design.
    General { factors: usize },
}

impl ShotBound {
    pub fn for_scheme(scheme: EstimatorScheme, dim: Option<usize>, factors: Option<usize>) -> Result<Self> {
        match scheme {
            EstimatorScheme::PrimePower | EstimatorScheme::Projected => Ok(ShotBound::SingleDesign),
            EstimatorScheme::Tensor => {
                let n = match (dim, factors) {
                    (Some(d), _) => omega(d)?,
                    (None, Some(n)) if n >= 1 => n,
                    _ => return Err(Error::InvalidParameter("tensor bound needs the dimension or the factor count".into())),
                };
                match (n, dim) {
                    (2, Some(dim)) => Ok(ShotBound::Bipartite { dim }),
                    _ => Ok(ShotBound::General { factors: n }),
                }
            }
        }
    }

    /// `M ε² / ln(2/p)`.
    fn factor(&self) -> f64 {
        match *self {
            ShotBound::SingleDesign => 0.5,
            ShotBound::Bipartite { dim } => {
                let a = 1.0 - 1.0 / dim as f64;
                2.0 * a * a
            }
            ShotBound::General { factors } => 2.0 * 4f64.powi(factors as i32),
        }
    }

    pub fn formula(&self) -> String {
        match *self {
            ShotBound::SingleDesign => "ceil(ln(2/p) / (2 eps^2))".to_string(),
            ShotBound::Bipartite { dim } => format!("ceil(2 (1 - 1/{dim})^2 ln(2/p) / eps^2)"),
            ShotBound::General { factors } => format!("ceil(2 * 4^{factors} ln(2/p) / eps^2)"),
        }
    }
}

fn check_failure(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Shots needed for error `epsilon` with failure probability `p`.
pub fn plan_shots(epsilon: f64, p: f64, bound: ShotBound) -> Result<u64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    check_failure(p)?;
    Ok((bound.factor() * (2.0 / p).ln() / (epsilon * epsilon)).ceil() as u64)
}

/// Error radius guaranteed by `shots` shots at failure probability `p`.
pub fn epsilon_for_shots(shots: u64, p: f64, bound: ShotBound) -> Result<f64> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    check_failure(p)?;
    Ok((bound.factor() * (2.0 / p).ln() / shots as f64).sqrt())
}

/// Scheme, design and operator basis for estimating χ in dimension `d`.
///
/// χ is always expressed in the Weyl product basis over the prime-power
/// subsystems of `d`, whichever design supplies the inputs.
#[derive(Debug, Clone)]
pub struct Protocol {
    scheme: EstimatorScheme,
    big: Option<usize>,
    basis: ProductOperatorBasis,
    design: WeightedDesign,
    factor_designs: Vec<WeightedDesign>,
}

impl Protocol {
    /// `big` is the embedding dimension of the projected scheme (default:
    /// the smallest prime power above `dim`); other schemes reject it.
    pub fn new(scheme: EstimatorScheme, dim: usize, big: Option<usize>) -> Result<Self> {
        let subsystems = DimensionFactorization::new(dim)?.subsystem_dims();
        if big.is_some() && scheme != EstimatorScheme::Projected {
            return Err(Error::IncompatibleScheme(format!("the {scheme} scheme takes no embedding dimension")));
        }
        let (design, factor_designs) = match scheme {
            EstimatorScheme::PrimePower => {
                if prime_power(dim).is_none() {
                    return Err(Error::IncompatibleScheme(format!("{dim} is not a prime power")));
                }
                (mub_to_design(&build_mub(dim)?), Vec::new())
            }
            EstimatorScheme::Tensor => {
                let factors: Vec<WeightedDesign> =
                    subsystems.iter().map(|&da| Ok(mub_to_design(&build_mub(da)?))).collect::<Result<_>>()?;
                (tensor_design(&factors)?, factors)
            }
            EstimatorScheme::Projected => {
                let big = big.unwrap_or_else(|| smallest_prime_power_above(dim));
                (projected_design(dim, big)?, Vec::new())
            }
        };
        let big = match scheme {
            EstimatorScheme::Projected => Some(big.unwrap_or_else(|| smallest_prime_power_above(dim))),
            _ => None,
        };
        Ok(Self { scheme, big, basis: ProductOperatorBasis::weyl(&subsystems)?, design, factor_designs })
    }

    pub fn scheme(&self) -> EstimatorScheme {
        self.scheme
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn big_dim(&self) -> Option<usize> {
        self.big
    }

    pub fn basis(&self) -> &ProductOperatorBasis {
        &self.basis
    }

    pub fn design(&self) -> &WeightedDesign {
        &self.design
    }

    /// Dimensions of the subsystems whose survival is read out.
    pub fn survival_dims(&self) -> &[usize] {
        self.design.factor_dims()
    }

    pub fn shot_bound(&self) -> ShotBound {
        ShotBound::for_scheme(self.scheme, Some(self.dim()), None).expect("dimension validated at construction")
    }

    fn check_channel(&self, ch: &KrausChannel) -> Result<()> {
        if ch.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: ch.dim() });
        }
        Ok(())
    }

    /// Exhaustive fidelity table for noiseless estimates.
    pub fn fidelity_table<'a>(&'a self, ch: &KrausChannel) -> Result<FidelityTable<'a>> {
        self.check_channel(ch)?;
        match self.scheme {
            EstimatorScheme::Tensor => FidelityTable::tensor(ch, &self.basis, &self.factor_designs),
            _ => FidelityTable::single(ch, &self.basis, &self.design),
        }
    }

    /// Precomputes outcome distributions of every design input for `(i, j)`.
    pub fn simulator<'a>(&'a self, ch: &KrausChannel, i: usize, j: usize) -> Result<ShotSimulator<'a>> {
        self.check_channel(ch)?;
        self.basis.check_index(i)?;
        self.basis.check_index(j)?;
        let diagonal = i == j;
        let per_state: Vec<(Vec<f64>, Option<Vec<f64>>)> = (0..self.design.len())
            .into_par_iter()
            .map(|k| {
                let b = branches(ch, &self.basis, i, j, &self.design, k);
                let re = cumulate(b.distribution(Part::Re));
                let im = (!diagonal).then(|| cumulate(b.distribution(Part::Im)));
                (re, im)
            })
            .collect();
        let (re, im): (Vec<_>, Vec<_>) = per_state.into_iter().unzip();
        Ok(ShotSimulator {
            protocol: self,
            i,
            j,
            sampler: DesignSampler::new(&self.design),
            re,
            im: if diagonal { None } else { Some(im.into_iter().map(Option::unwrap).collect()) },
        })
    }

    fn result(&self, i: usize, j: usize, estimate: Complex64, opts: &EstimateOptions) -> EstimateResult {
        EstimateResult {
            scheme: self.scheme,
            d: self.dim(),
            big_dim: self.big,
            factor_dims: self.basis.factor_dims(),
            i,
            j,
            estimate: [estimate.re, estimate.im],
            shots: 0,
            epsilon_bound: None,
            confidence: opts.confidence,
            seed: opts.seed,
            mode: opts.mode,
            counts: BTreeMap::new(),
            counts_im: None,
        }
    }

    /// Estimates every requested element, sharing precomputation across pairs.
    pub fn estimate_elements(&self, ch: &KrausChannel, pairs: &[(usize, usize)], opts: &EstimateOptions) -> Result<Vec<EstimateResult>> {
        check_failure(1.0 - opts.confidence)?;
        match opts.mode {
            Mode::Exact => {
                let table = self.fidelity_table(ch)?;
                pairs
                    .iter()
                    .map(|&(i, j)| Ok(self.result(i, j, table.chi_element(i, j)?, opts)))
                    .collect()
            }
            Mode::MonteCarlo => pairs
                .iter()
                .map(|&(i, j)| self.simulator(ch, i, j)?.estimate(opts.shots, opts.confidence, opts.seed))
                .collect(),
        }
    }
}

/// Noiseless χ^i_j from exact fidelities, recombined by the scheme's rule.
pub fn exact_estimate(table: &FidelityTable<'_>, i: usize, j: usize) -> Result<Complex64> {
    let (full, reduced) = table.fidelities(i, j)?;
    Ok(combine_fidelities(table.factor_dims(), i == j, full, &reduced))
}

/// Cached outcome distributions for one `(i, j)`.
pub struct ShotSimulator<'a> {
    protocol: &'a Protocol,
    i: usize,
    j: usize,
    sampler: DesignSampler,
    re: Vec<Vec<f64>>,
    im: Option<Vec<Vec<f64>>>,
}

impl ShotSimulator<'_> {
    /// Runs `shots` shots of one part in parallel.
    pub fn run_part(&self, part: Part, shots: u64, seed: u64) -> CountTable {
        let n = self.protocol.design.num_factors();
        let dists = match part {
            Part::Re => &self.re,
            Part::Im => self.im.as_ref().unwrap_or(&self.re),
        };
        (0..shots)
            .into_par_iter()
            .fold(
                || CountTable::new(n),
                |mut t, s| {
                    let mut rng = shot_rng(seed, part, s);
                    let k = self.sampler.sample(&mut rng);
                    t.add_code(draw(&dists[k], &mut rng));
                    t
                },
            )
            .reduce(|| CountTable::new(n), |a, b| a.merge(&b))
    }

    /// Monte Carlo estimate with `shots` total shots, split evenly between
    /// the real and imaginary parts off the diagonal.
    pub fn estimate(&self, shots: u64, confidence: f64, seed: u64) -> Result<EstimateResult> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let p = 1.0 - confidence;
        check_failure(p)?;
        let protocol = self.protocol;
        let dims = protocol.survival_dims();
        let diagonal = self.im.is_none();
        let (re_shots, im_shots) = if diagonal { (shots, 0) } else { (shots - shots / 2, shots / 2) };
        if !diagonal && im_shots == 0 {
            return Err(Error::ZeroShots);
        }
        let re = self.run_part(Part::Re, re_shots, seed);
        let im = (!diagonal).then(|| self.run_part(Part::Im, im_shots, seed));
        let value = estimate_from_counts(&re, im.as_ref(), dims, diagonal)?;
        let per_part = if diagonal { re_shots } else { im_shots };
        let opts = EstimateOptions { shots, confidence, seed, mode: Mode::MonteCarlo };
        let mut out = protocol.result(self.i, self.j, value, &opts);
        out.shots = shots;
        out.epsilon_bound = Some(epsilon_for_shots(per_part, p, protocol.shot_bound())?);
        out.counts = re.to_map();
        out.counts_im = im.map(|t| t.to_map());
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    pub shots: u64,
    /// `1 − p`.
    pub confidence: f64,
    pub seed: u64,
    pub mode: Mode,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { shots: 1000, confidence: 0.95, seed: 0, mode: Mode::MonteCarlo }
    }
}

/// One estimated χ element.
///
/// `epsilon_bound` is the Hoeffding radius of each estimated part at the
/// stated confidence; exact-mode results carry none. `counts` holds the
/// real-part shots, `counts_im` the imaginary-part shots off the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub scheme: EstimatorScheme,
    pub d: usize,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none", default)]
    pub big_dim: Option<usize>,
    pub factor_dims: Vec<usize>,
    pub i: usize,
    pub j: usize,
    pub estimate: [f64; 2],
    pub shots: u64,
    pub epsilon_bound: Option<f64>,
    pub confidence: f64,
    pub seed: u64,
    pub mode: Mode,
    pub counts: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counts_im: Option<BTreeMap<String, u64>>,
}

impl EstimateResult {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.estimate[0], self.estimate[1])
    }
}

/// Single-element convenience wrapper around [`Protocol`].
pub fn estimate_chi_element(
    ch: &KrausChannel,
    scheme: EstimatorScheme,
    big: Option<usize>,
    i: usize,
    j: usize,
    opts: &EstimateOptions,
) -> Result<EstimateResult> {
    let protocol = Protocol::new(scheme, ch.dim(), big)?;
    Ok(protocol.estimate_elements(ch, &[(i, j)], opts)?.remove(0))
}
