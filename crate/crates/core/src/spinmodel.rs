//! Heisenberg XXZ chain `H = J sum_bonds (X X + Y Y + Delta Z Z)` with Pauli
//! matrices, split into three groups of mutually commuting bonds.

use crate::error::{Error, Result};
use crate::linalg::{frobenius_distance, CMatrix, HermitianEigen};
use crate::multistage::{Direction, OperatorSplit, PreparedSplit, StageExponentials};
use crate::tolerance;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Number of operator groups in the split.
pub const STAGES: usize = 3;

/// Above this dimension stage exponentials are built bond by bond.
pub const LIFTED_THRESHOLD: usize = 512;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

fn default_coupling() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XxzConfig {
    #[serde(alias = "L")]
    pub sites: usize,
    #[serde(alias = "delta")]
    pub anisotropy: f64,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default = "default_coupling")]
    pub coupling: f64,
}

impl XxzConfig {
    pub fn new(sites: usize, anisotropy: f64, boundary: Boundary) -> Self {
        XxzConfig {
            sites,
            anisotropy,
            boundary,
            coupling: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        1usize.checked_shl(self.sites as u32).unwrap_or(usize::MAX)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::Invalid(format!("need at least 2 sites, got {}", self.sites)));
        }
        if self.boundary == Boundary::Periodic && self.sites < 3 {
            return Err(Error::Invalid("a periodic chain needs at least 3 sites".into()));
        }
        if !self.anisotropy.is_finite() || !self.coupling.is_finite() {
            return Err(Error::Invalid("anisotropy and coupling must be finite".into()));
        }
        if self.sites > 20 || self.dim() > tolerance::MAX_DENSE_DIM {
            return Err(Error::Capacity(format!(
                "L = {} gives dimension 2^{} > {}",
                self.sites,
                self.sites,
                tolerance::MAX_DENSE_DIM
            )));
        }
        Ok(())
    }

    /// Nearest-neighbour bonds `(i, j)` in chain order.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut b: Vec<_> = (0..self.sites - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic {
            b.push((self.sites - 1, 0));
        }
        b
    }

    /// Bonds partitioned into three groups, none of which contains two bonds
    /// sharing a site. Bond `i` takes colour `i mod 3` unless that clashes
    /// with an already coloured neighbour (only possible across the periodic
    /// seam), in which case it takes the smallest free colour.
    pub fn bond_groups(&self) -> Vec<Vec<(usize, usize)>> {
        let bonds = self.bonds();
        let mut colour: Vec<usize> = Vec::with_capacity(bonds.len());
        for (i, &(a, b)) in bonds.iter().enumerate() {
            let clash = |c: usize| {
                bonds[..i]
                    .iter()
                    .zip(&colour)
                    .any(|(&(x, y), &cc)| cc == c && (x == a || x == b || y == a || y == b))
            };
            let c = if !clash(i % STAGES) {
                i % STAGES
            } else {
                (0..STAGES).find(|&c| !clash(c)).expect("a chain bond has at most two neighbours")
            };
            colour.push(c);
        }
        let mut groups = vec![Vec::new(); STAGES];
        for (bond, c) in bonds.into_iter().zip(colour) {
            groups[c].push(bond);
        }
        for g in &mut groups {
            g.sort_by_key(|&(a, b)| (a.min(b), a.max(b)));
        }
        groups
    }
}

/// Bit of site `i` in a basis index; site 0 is the most significant bit.
fn bit(state: usize, site: usize, sites: usize) -> usize {
    (state >> (sites - 1 - site)) & 1
}

fn add_bond(m: &mut CMatrix, cfg: &XxzConfig, (i, j): (usize, usize)) {
    let l = cfg.sites;
    let mask = (1 << (l - 1 - i)) | (1 << (l - 1 - j));
    for s in 0..m.nrows() {
        let aligned = bit(s, i, l) == bit(s, j, l);
        m[(s, s)] += Complex64::new(cfg.coupling * cfg.anisotropy * if aligned { 1.0 } else { -1.0 }, 0.0);
        if !aligned {
            m[(s ^ mask, s)] += Complex64::new(2.0 * cfg.coupling, 0.0);
        }
    }
}

/// The dense operator of a single bond `(i, j)` on the full chain.
pub fn bond_term(cfg: &XxzConfig, bond: (usize, usize)) -> Result<CMatrix> {
    cfg.validate()?;
    if bond.0 >= cfg.sites || bond.1 >= cfg.sites || bond.0 == bond.1 {
        return Err(Error::Range(format!("bond {bond:?} on {} sites", cfg.sites)));
    }
    let mut m = CMatrix::zeros(cfg.dim(), cfg.dim());
    add_bond(&mut m, cfg, bond);
    Ok(m)
}

/// The three dense parts of the split; their sum is `H`.
pub fn build_xxz(cfg: &XxzConfig) -> Result<OperatorSplit> {
    cfg.validate()?;
    let dim = cfg.dim();
    let parts = cfg
        .bond_groups()
        .iter()
        .map(|group| {
            let mut m = CMatrix::zeros(dim, dim);
            for &b in group {
                add_bond(&mut m, cfg, b);
            }
            m
        })
        .collect();
    OperatorSplit::new(parts)
}

/// Stage exponentials formed as products of two-site bond exponentials.
/// Exact because bonds within a group commute.
#[derive(Clone, Debug)]
pub struct LiftedBonds {
    cfg: XxzConfig,
    groups: Vec<Vec<(usize, usize)>>,
}

impl LiftedBonds {
    pub fn new(cfg: &XxzConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(LiftedBonds {
            cfg: cfg.clone(),
            groups: cfg.bond_groups(),
        })
    }

    /// Left-multiplies `m` by `exp(z h_b)` for bond `(i, j)`.
    fn apply_bond(&self, m: &mut CMatrix, (i, j): (usize, usize), z: Complex64) {
        let (l, jc, delta) = (self.cfg.sites, self.cfg.coupling, self.cfg.anisotropy);
        let diag = (z * jc * delta).exp();
        let off_scale = (-z * jc * delta).exp();
        let (ch, sh) = ((2.0 * z * jc).cosh() * off_scale, (2.0 * z * jc).sinh() * off_scale);
        let (bi, bj) = (1usize << (l - 1 - i), 1usize << (l - 1 - j));
        for s in 0..m.nrows() {
            let (si, sj) = (s & bi != 0, s & bj != 0);
            if si == sj {
                m.row_mut(s).iter_mut().for_each(|x| *x *= diag);
            } else if si {
                // Visit each anti-aligned pair once, from the (1, 0) member.
                let t = s ^ bi ^ bj;
                let rs = m.row(s).clone_owned();
                let rt = m.row(t).clone_owned();
                m.set_row(s, &(&rs * ch + &rt * sh));
                m.set_row(t, &(&rs * sh + &rt * ch));
            }
        }
    }
}

impl StageExponentials for LiftedBonds {
    fn dim(&self) -> usize {
        self.cfg.dim()
    }

    fn stages(&self) -> usize {
        STAGES
    }

    fn stage_exp(&self, stage: usize, z: Complex64) -> CMatrix {
        let mut m = crate::linalg::identity(self.dim());
        // Bonds commute within a group, so their order does not matter.
        for &b in self.groups[stage].iter().rev() {
            self.apply_bond(&mut m, b, z);
        }
        m
    }
}

/// Stage exponentials for the XXZ split by whichever path suits the size.
#[derive(Clone, Debug)]
pub enum XxzStages {
    Dense(PreparedSplit),
    Lifted(LiftedBonds),
}

impl XxzStages {
    pub fn new(cfg: &XxzConfig, split: &OperatorSplit) -> Result<Self> {
        if cfg.dim() > LIFTED_THRESHOLD {
            Ok(XxzStages::Lifted(LiftedBonds::new(cfg)?))
        } else {
            Ok(XxzStages::Dense(split.prepare()?))
        }
    }
}

impl StageExponentials for XxzStages {
    fn dim(&self) -> usize {
        match self {
            XxzStages::Dense(p) => p.dim(),
            XxzStages::Lifted(l) => l.dim(),
        }
    }

    fn stages(&self) -> usize {
        STAGES
    }

    fn stage_exp(&self, stage: usize, z: Complex64) -> CMatrix {
        match self {
            XxzStages::Dense(p) => p.stage_exp(stage, z),
            XxzStages::Lifted(l) => l.stage_exp(stage, z),
        }
    }
}

/// `exp(s H t)` by full diagonalization, `s` the direction prefactor.
pub fn exact_evolution(h: &CMatrix, t: f64, direction: Direction) -> Result<CMatrix> {
    Ok(HermitianEigen::new(h)?.exp(direction.prefactor() * t))
}

/// Sorted eigenvalues of `H`.
pub fn spectrum(h: &CMatrix) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = HermitianEigen::new(h)?.values.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionError {
    /// Frobenius norm of `U_approx - U_exact`.
    pub value: f64,
    pub t: f64,
    pub method: String,
}

impl EvolutionError {
    pub fn new(method: impl Into<String>, t: f64, approx: &CMatrix, exact: &CMatrix) -> Result<Self> {
        Ok(EvolutionError {
            value: frobenius_error(approx, exact)?,
            t,
            method: method.into(),
        })
    }
}

/// `sqrt(sum |U_approx - U_exact|^2)`.
pub fn frobenius_error(approx: &CMatrix, exact: &CMatrix) -> Result<f64> {
    frobenius_distance(approx, exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, identity, matmul};
    use crate::multistage::{evolve_prepared, to_multistage};
    use crate::schemes::TwoStageScheme;

    #[test]
    fn two_site_spectrum() {
        for delta in [0.0, 1.0, -0.7, 2.5] {
            let split = build_xxz(&XxzConfig::new(2, delta, Boundary::Open)).unwrap();
            let ev = spectrum(&split.total).unwrap();
            let mut want = vec![delta, delta, 2.0 - delta, -2.0 - delta];
            want.sort_by(f64::total_cmp);
            for (a, b) in ev.iter().zip(&want) {
                assert!((a - b).abs() < 1e-13, "{delta}: {ev:?}");
            }
            assert_eq!(split.parts[1], CMatrix::zeros(4, 4));
            assert_eq!(split.parts[2], CMatrix::zeros(4, 4));
        }
    }

    #[test]
    fn periodic_nine_sites_coloring() {
        let cfg = XxzConfig::new(9, 1.0, Boundary::Periodic);
        let groups = cfg.bond_groups();
        assert!(groups.iter().all(|g| g.len() == 3));
        for g in &groups {
            for (n, &(a, b)) in g.iter().enumerate() {
                for &(c, d) in &g[n + 1..] {
                    assert!(a != c && a != d && b != c && b != d);
                }
            }
        }
    }

    #[test]
    fn periodic_even_chain_gets_proper_coloring() {
        for l in 3..=10 {
            let groups = XxzConfig::new(l, 1.0, Boundary::Periodic).bond_groups();
            assert_eq!(groups.iter().map(Vec::len).sum::<usize>(), l);
            for g in &groups {
                let mut seen = vec![false; l];
                for &(a, b) in g {
                    assert!(!seen[a] && !seen[b], "L={l}: {groups:?}");
                    seen[a] = true;
                    seen[b] = true;
                }
            }
        }
    }

    #[test]
    fn capacity_and_validation() {
        assert!(matches!(build_xxz(&XxzConfig::new(13, 1.0, Boundary::Open)), Err(Error::Capacity(_))));
        assert!(matches!(build_xxz(&XxzConfig::new(1, 1.0, Boundary::Open)), Err(Error::Invalid(_))));
        assert!(matches!(build_xxz(&XxzConfig::new(2, 1.0, Boundary::Periodic)), Err(Error::Invalid(_))));
    }

    #[test]
    fn bonds_in_a_group_commute() {
        let cfg = XxzConfig::new(7, 0.6, Boundary::Periodic);
        for group in cfg.bond_groups() {
            let terms: Vec<CMatrix> = group
                .iter()
                .map(|&b| {
                    let mut m = CMatrix::zeros(cfg.dim(), cfg.dim());
                    add_bond(&mut m, &cfg, b);
                    m
                })
                .collect();
            for a in &terms {
                for b in &terms {
                    assert!(commutator(a, b).iter().all(|z| z.norm() < 1e-13));
                }
            }
        }
    }

    #[test]
    fn exact_evolution_basics() {
        let h = build_xxz(&XxzConfig::new(3, 0.5, Boundary::Open)).unwrap().total;
        assert!(frobenius_distance(&exact_evolution(&h, 0.0, Direction::Forward).unwrap(), &identity(8)).unwrap() < 1e-14);
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.5, 0.0),
            Complex64::new(-0.25, 0.0),
        ]));
        let u = exact_evolution(&d, 2.0, Direction::Forward).unwrap();
        assert!((u[(0, 0)] - Complex64::new(0.0, -3.0).exp()).norm() < 1e-15);
        assert!((u[(1, 1)] - Complex64::new(0.0, 0.5).exp()).norm() < 1e-15);
    }

    #[test]
    fn exact_matches_taylor_series_for_two_sites() {
        let h = build_xxz(&XxzConfig::new(2, 1.0, Boundary::Open)).unwrap().total;
        let u = exact_evolution(&h, 1.0, Direction::Forward).unwrap();
        // The spectrum is {1, 1, 1, -3}; 18 terms would leave a remainder near
        // 3^19/19! ~ 1e-8, so the reference sum runs to 40 terms.
        let z = &h * Complex64::new(0.0, -1.0);
        let mut term = identity(4);
        let mut sum = identity(4);
        for i in 1..40 {
            term = matmul(&z, &term) / Complex64::new(i as f64, 0.0);
            sum += &term;
        }
        assert!(frobenius_distance(&u, &sum).unwrap() < 1e-12);
    }

    #[test]
    fn lifted_path_agrees_with_dense() {
        for (l, bc) in [(6, Boundary::Open), (7, Boundary::Periodic), (10, Boundary::Open)] {
            let cfg = XxzConfig::new(l, 0.8, bc);
            let split = build_xxz(&cfg).unwrap();
            let lifted = LiftedBonds::new(&cfg).unwrap();
            let dense = split.prepare().unwrap();
            let z = Complex64::new(0.0, -0.37);
            for stage in 0..STAGES {
                let a = lifted.stage_exp(stage, z);
                let b = dense.stage_exp(stage, z);
                assert!(frobenius_distance(&a, &b).unwrap() < 1e-11, "L={l} stage {stage}");
            }
        }
    }

    #[test]
    fn strang_error_ratio_near_four() {
        let cfg = XxzConfig::new(6, 1.0, Boundary::Open);
        let split = build_xxz(&cfg).unwrap();
        let exact = exact_evolution(&split.total, 1.0, Direction::Forward).unwrap();
        let stages = XxzStages::new(&cfg, &split).unwrap();
        let ms = to_multistage(&TwoStageScheme::strang()).unwrap();
        let err = |h: f64, steps| {
            let u = evolve_prepared(&stages, &ms, h, steps, false, Direction::Forward).unwrap();
            frobenius_error(&u, &exact).unwrap()
        };
        let ratio = err(0.1, 10) / err(0.05, 20);
        assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_error(&identity(2), &identity(2)).unwrap(), 0.0);
        let mut a = identity(2);
        a[(1, 1)] += Complex64::new(1e-3, 0.0);
        assert!((frobenius_error(&a, &identity(2)).unwrap() - 1e-3).abs() < 1e-15);
    }
}
