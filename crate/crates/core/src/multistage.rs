//! Applying splitting schemes to sums of an arbitrary number of operators.
//!
//! A two-stage scheme `(a, b)` is rewritten as coefficients `(c, d)` for
//!
//! ```text
//! (prod_{k=1..L} e^{A_k c_1 h}) (prod_{k=L..1} e^{A_k d_1 h}) ... (prod_{k=L..1} e^{A_k d_q h})
//! ```
//!
//! with `c_1 = a_1`, `d_i = b_i - c_i`, `c_{i+1} = a_{i+1} - d_i`.

use crate::error::{Error, Result};
use crate::linalg::{is_hermitian, matmul, power, random_hermitian, CMatrix, HermitianEigen};
use crate::schemes::{fit_order, require_consistent, OrderFit, TwoStageScheme};
use crate::tolerance;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Generator prefactor of the evolution: `exp(-i H t)` or `exp(-H t)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    Imaginary,
}

impl Direction {
    pub fn prefactor(self) -> Complex64 {
        match self {
            Direction::Forward => Complex64::new(0.0, -1.0),
            Direction::Imaginary => Complex64::new(-1.0, 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiStageScheme {
    pub name: String,
    pub order_n: u32,
    pub c: Vec<Complex64>,
    pub d: Vec<Complex64>,
    pub source_scheme: String,
}

impl MultiStageScheme {
    pub fn q(&self) -> usize {
        self.c.len()
    }

    /// |sum(c + d) - 1|
    pub fn consistency_residual(&self) -> f64 {
        (self.c.iter().chain(&self.d).sum::<Complex64>() - 1.0).norm()
    }

    /// The scheme with its exponential sequence reversed: `c'_i = d_{q+1-i}`,
    /// `d'_i = c_{q+1-i}`.
    pub fn reversed(&self) -> Self {
        MultiStageScheme {
            name: format!("{}-reversed", self.name),
            order_n: self.order_n,
            c: self.d.iter().rev().copied().collect(),
            d: self.c.iter().rev().copied().collect(),
            source_scheme: self.source_scheme.clone(),
        }
    }

    /// True when reversing the sequence reproduces it bit for bit.
    pub fn is_self_reversed(&self) -> bool {
        let r = self.reversed();
        r.c == self.c && r.d == self.d
    }

    /// Recovers the two-stage coefficients: `a_1 = c_1`, `b_i = c_i + d_i`,
    /// `a_{i+1} = d_i + c_{i+1}`, `a_{q+1} = d_q`.
    pub fn to_two_stage(&self) -> TwoStageScheme {
        let q = self.q();
        let mut a = Vec::with_capacity(q + 1);
        let mut b = Vec::with_capacity(q);
        a.push(self.c[0]);
        for i in 0..q {
            b.push(self.c[i] + self.d[i]);
            a.push(if i + 1 < q { self.d[i] + self.c[i + 1] } else { self.d[i] });
        }
        TwoStageScheme::new(self.source_scheme.clone(), self.order_n, a, b)
    }

    /// Ordered `(stage index, coefficient)` list of one step on `stages` operators.
    pub fn factor_sequence(&self, stages: usize) -> Vec<(usize, Complex64)> {
        let mut seq = Vec::with_capacity(2 * stages * self.q());
        for (&c, &d) in self.c.iter().zip(&self.d) {
            seq.extend((0..stages).map(|k| (k, c)));
            seq.extend((0..stages).rev().map(|k| (k, d)));
        }
        seq
    }
}

pub fn to_multistage(scheme: &TwoStageScheme) -> Result<MultiStageScheme> {
    require_consistent(scheme)?;
    let q = scheme.q();
    let mut c = Vec::with_capacity(q);
    let mut d = Vec::with_capacity(q);
    for i in 0..q {
        let ci = if i == 0 { scheme.a[0] } else { scheme.a[i] - d[i - 1] };
        c.push(ci);
        d.push(scheme.b[i] - ci);
    }
    let ms = MultiStageScheme {
        name: scheme.name.clone(),
        order_n: scheme.order_n,
        c,
        d,
        source_scheme: scheme.name.clone(),
    };
    debug_assert!(ms.consistency_residual() < 10.0 * tolerance::CONSISTENCY);
    Ok(ms)
}

/// A Hamiltonian given as an ordered list of Hermitian parts.
#[derive(Clone, Debug)]
pub struct OperatorSplit {
    pub dim: usize,
    pub parts: Vec<CMatrix>,
    pub total: CMatrix,
}

impl OperatorSplit {
    pub fn new(parts: Vec<CMatrix>) -> Result<Self> {
        let dim = parts.first().map(|p| p.nrows()).ok_or_else(|| Error::Invalid("no parts".into()))?;
        let mut total = CMatrix::zeros(dim, dim);
        for p in &parts {
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.nrows().max(p.ncols()),
                });
            }
            let scale = p.iter().map(|x| x.norm()).fold(1.0, f64::max);
            if !is_hermitian(p, tolerance::HERMITIAN * scale) {
                return Err(Error::Invalid("operator part is not Hermitian".into()));
            }
            total += p;
        }
        Ok(OperatorSplit { dim, parts, total })
    }

    pub fn stages(&self) -> usize {
        self.parts.len()
    }

    /// Random Hermitian parts with unit spectral norm.
    pub fn random(stages: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parts = (0..stages).map(|_| random_hermitian(&mut rng, dim)).collect();
        Self::new(parts).expect("random parts are Hermitian")
    }

    pub fn prepare(&self) -> Result<PreparedSplit> {
        PreparedSplit::new(self)
    }
}

/// Source of `exp(z A_k)` for the stages of a split.
pub trait StageExponentials: Sync {
    fn dim(&self) -> usize;
    fn stages(&self) -> usize;
    fn stage_exp(&self, stage: usize, z: Complex64) -> CMatrix;
}

/// Split with cached eigendecompositions of each part.
#[derive(Clone, Debug)]
pub struct PreparedSplit {
    dim: usize,
    eig: Vec<HermitianEigen>,
}

impl PreparedSplit {
    pub fn new(split: &OperatorSplit) -> Result<Self> {
        Ok(PreparedSplit {
            dim: split.dim,
            eig: split.parts.iter().map(HermitianEigen::new).collect::<Result<_>>()?,
        })
    }

    pub fn from_parts(parts: &[CMatrix]) -> Result<Self> {
        Self::new(&OperatorSplit::new(parts.to_vec())?)
    }
}

impl StageExponentials for PreparedSplit {
    fn dim(&self) -> usize {
        self.dim
    }

    fn stages(&self) -> usize {
        self.eig.len()
    }

    fn stage_exp(&self, stage: usize, z: Complex64) -> CMatrix {
        self.eig[stage].exp(z)
    }
}

/// Per-call memo of `exp(z A_k)`; coefficients repeat within and across steps.
struct ExpCache<'a, S: StageExponentials + ?Sized> {
    ops: &'a S,
    map: HashMap<(usize, u64, u64), CMatrix>,
}

impl<'a, S: StageExponentials + ?Sized> ExpCache<'a, S> {
    fn new(ops: &'a S) -> Self {
        ExpCache { ops, map: HashMap::new() }
    }

    fn get(&mut self, stage: usize, z: Complex64) -> &CMatrix {
        let ops = self.ops;
        self.map
            .entry((stage, z.re.to_bits(), z.im.to_bits()))
            .or_insert_with(|| ops.stage_exp(stage, z))
    }
}

fn compose<S: StageExponentials + ?Sized>(
    cache: &mut ExpCache<'_, S>,
    factors: &[(usize, Complex64)],
    h: f64,
    direction: Direction,
) -> CMatrix {
    let pre = direction.prefactor() * h;
    let mut acc: Option<CMatrix> = None;
    for &(stage, coeff) in factors {
        let e = cache.get(stage, pre * coeff);
        acc = Some(match acc {
            None => e.clone(),
            Some(m) => matmul(&m, e),
        });
    }
    acc.unwrap_or_else(|| crate::linalg::identity(cache.ops.dim()))
}

fn check_h(h: f64) -> Result<()> {
    if h == 0.0 || !h.is_finite() {
        return Err(Error::Range(format!("step size must be finite and non-zero, got {h}")));
    }
    Ok(())
}

/// One step of a two-operator scheme:
/// `e^{A a_1 h} e^{B b_1 h} ... e^{B b_q h} e^{A a_{q+1} h}` with the
/// direction prefactor folded into each exponent.
pub fn apply_two_stage(
    a: &CMatrix,
    b: &CMatrix,
    scheme: &TwoStageScheme,
    h: f64,
    direction: Direction,
) -> Result<CMatrix> {
    scheme.check_structure()?;
    check_h(h)?;
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    let ops = PreparedSplit::from_parts(&[a.clone(), b.clone()])?;
    Ok(apply_two_stage_prepared(&ops, scheme, h, direction))
}

/// [`apply_two_stage`] on a prepared two-part split.
pub fn apply_two_stage_prepared<S: StageExponentials + ?Sized>(
    ops: &S,
    scheme: &TwoStageScheme,
    h: f64,
    direction: Direction,
) -> CMatrix {
    let q = scheme.q();
    let mut factors = Vec::with_capacity(2 * q + 1);
    for i in 0..q {
        factors.push((0, scheme.a[i]));
        factors.push((1, scheme.b[i]));
    }
    factors.push((0, scheme.a[q]));
    compose(&mut ExpCache::new(ops), &factors, h, direction)
}

/// One step of the multi-stage decomposition.
pub fn apply_multistage(split: &OperatorSplit, ms: &MultiStageScheme, h: f64, direction: Direction) -> Result<CMatrix> {
    check_h(h)?;
    let ops = split.prepare()?;
    Ok(apply_multistage_prepared(&ops, ms, h, direction))
}

pub fn apply_multistage_prepared<S: StageExponentials + ?Sized>(
    ops: &S,
    ms: &MultiStageScheme,
    h: f64,
    direction: Direction,
) -> CMatrix {
    compose(&mut ExpCache::new(ops), &ms.factor_sequence(ops.stages()), h, direction)
}

/// `steps` consecutive applications. With `alternate_reversal`, every second
/// step uses the reversed coefficient sequence, which symmetrizes an
/// odd-order scheme into the next even order.
pub fn evolve(
    split: &OperatorSplit,
    ms: &MultiStageScheme,
    h: f64,
    steps: usize,
    alternate_reversal: bool,
    direction: Direction,
) -> Result<CMatrix> {
    check_h(h)?;
    let ops = split.prepare()?;
    evolve_prepared(&ops, ms, h, steps, alternate_reversal, direction)
}

pub fn evolve_prepared<S: StageExponentials + ?Sized>(
    ops: &S,
    ms: &MultiStageScheme,
    h: f64,
    steps: usize,
    alternate_reversal: bool,
    direction: Direction,
) -> Result<CMatrix> {
    if steps == 0 {
        return Err(Error::Range("steps must be at least 1".into()));
    }
    check_h(h)?;
    let mut cache = ExpCache::new(ops);
    let forward = compose(&mut cache, &ms.factor_sequence(ops.stages()), h, direction);
    if !alternate_reversal || ms.is_self_reversed() {
        return Ok(power(&forward, steps));
    }
    let backward = compose(&mut cache, &ms.reversed().factor_sequence(ops.stages()), h, direction);
    // Step 1 is forward, step 2 reversed, ...; later steps act from the left.
    let pair = matmul(&backward, &forward);
    let mut u = power(&pair, steps / 2);
    if steps % 2 == 1 {
        u = matmul(&forward, &u);
    }
    Ok(u)
}

/// Fitted global order of the `stages`-operator decomposition on random
/// Hermitian parts of dimension `dim`, real time `t = 1`.
pub fn multistage_order(
    ms: &MultiStageScheme,
    stages: usize,
    dim: usize,
    h_grid: &[f64],
    seed: u64,
    alternate_reversal: bool,
) -> Result<OrderFit> {
    let split = OperatorSplit::random(stages, dim, seed);
    order_on_split(&split.prepare()?, &split.total, ms, h_grid, 1.0, alternate_reversal)
}

/// Fitted global order on a given split at total time `t`.
pub fn order_on_split<S: StageExponentials + ?Sized>(
    ops: &S,
    total: &CMatrix,
    ms: &MultiStageScheme,
    h_grid: &[f64],
    t: f64,
    alternate_reversal: bool,
) -> Result<OrderFit> {
    let exact = HermitianEigen::new(total)?.exp(Direction::Forward.prefactor() * t);
    let mut grid = h_grid.to_vec();
    if alternate_reversal {
        // Keep the step count even so forward/reversed pairs are complete.
        grid = grid.iter().map(|&h| t / (2.0 * (t / (2.0 * h)).round().max(1.0))).collect();
    }
    fit_order(&grid, t, &exact, |h, steps| {
        evolve_prepared(ops, ms, h, steps, alternate_reversal, Direction::Forward)
    })
}
