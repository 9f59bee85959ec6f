//! Intersection-number engine on the flag-type models of the
//! supersingular components: the ℓ-monomial calculus for genus 3 and 4,
//! the Chern-class expansion of the Hodge bundle, the relation system
//! over ℚ(p), the linear solve for the five degree-4 intersection
//! numbers, and the assemblies of f₃(p), f₄(p) and the section
//! self-intersection.
//!
//! Classes live on a tower  model → threefold → surface → point.  The
//! generators ℓ₀, ℓ₁, ℓ₂ are the first Chern classes of the successive
//! quotient sheaves; ℓ₁ and ℓ₂ are pullbacks, which is where all the
//! monomial vanishing comes from.

use crate::exactpoly::{rint, FactoredPPoly, PPoly, Rat, RatFn};
use num_traits::One;
use std::collections::BTreeMap;
use std::fmt;

/// Exponent triple `(a, b, c)` for `ℓ₀^a ℓ₁^b ℓ₂^c`.
pub type Mono = (u8, u8, u8);

/// The five degree-4 monomials that survive on the genus-4 model, in the
/// fixed order used by every relation row and solution vector.
pub const G4_UNKNOWNS: [Mono; 5] = [(3, 1, 0), (3, 0, 1), (1, 3, 0), (1, 2, 1), (1, 1, 2)];

pub fn mono_name(m: Mono) -> String {
    let mut s = String::new();
    for (i, e) in [m.0, m.1, m.2].into_iter().enumerate() {
        if e > 0 {
            s.push_str(&format!("l{i}"));
            if e > 1 {
                s.push_str(&format!("^{e}"));
            }
        }
    }
    if s.is_empty() {
        s.push('1');
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlagModel {
    GenusThree,
    GenusFour,
}

impl FlagModel {
    fn top_degree(self) -> u8 {
        match self {
            FlagModel::GenusThree => 2,
            FlagModel::GenusFour => 4,
        }
    }

    /// Monomials that vanish identically because ℓ₁, ℓ₂ are pullbacks
    /// from lower-dimensional spaces; these may be purged at any degree.
    fn purged(self, m: Mono) -> bool {
        let (a, b, c) = m;
        let deg = a + b + c;
        if deg > self.top_degree() {
            return true;
        }
        match self {
            // ℓ₁ is a curve class, so ℓ₁² = 0, and there is no ℓ₂.
            FlagModel::GenusThree => b >= 2 || c > 0,
            // ℓ₂ comes from a surface (ℓ₂³ = 0) and ℓ₁, ℓ₂ from a
            // threefold (their degree-4 monomials vanish).
            FlagModel::GenusFour => c >= 3 || b + c >= 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlagError {
    #[error("cannot combine classes from different models")]
    ModelMismatch,
    #[error("series inversion needs constant term 1")]
    NotAUnitSeries,
    #[error("degree-4 part contains a non-survivor monomial {0} after reduction")]
    NonSurvivor(String),
    #[error("relation system has rank {0}, expected 5; transcription bug")]
    SingularSystem(usize),
    #[error("products against the exceptional-support class are not defined")]
    ExceptionalProduct,
    #[error("derived value is not a polynomial: {0}")]
    NotPolynomial(String),
    #[error("class is not of the expected shape: {0}")]
    UnexpectedShape(String),
    #[error("mismatch with the expected factored form; intermediate trace: {0}")]
    Mismatch(String),
}

/// Element of the graded ℓ-calculus with coefficients in ℚ(p).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EllClass {
    model: FlagModel,
    terms: BTreeMap<Mono, RatFn>,
}

impl EllClass {
    pub fn zero(model: FlagModel) -> Self {
        EllClass {
            model,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(model: FlagModel) -> Self {
        EllClass::term(model, (0, 0, 0), RatFn::one())
    }

    pub fn term(model: FlagModel, m: Mono, c: RatFn) -> Self {
        let mut out = EllClass::zero(model);
        out.insert(m, c);
        out
    }

    /// The generator `ℓ_i`.
    pub fn ell(model: FlagModel, i: u8) -> Self {
        let m = match i {
            0 => (1, 0, 0),
            1 => (0, 1, 0),
            2 => (0, 0, 1),
            _ => panic!("no generator l{i}"),
        };
        EllClass::term(model, m, RatFn::one())
    }

    pub fn model(&self) -> FlagModel {
        self.model
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mono, &RatFn)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn coeff(&self, m: Mono) -> RatFn {
        self.terms.get(&m).cloned().unwrap_or_else(RatFn::zero)
    }

    fn insert(&mut self, m: Mono, c: RatFn) {
        if c.is_zero() || self.model.purged(m) {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(RatFn::zero);
        *entry += &c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &EllClass) -> Result<EllClass, FlagError> {
        if self.model != other.model {
            return Err(FlagError::ModelMismatch);
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(*m, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &EllClass) -> Result<EllClass, FlagError> {
        self.add(&other.scale(&RatFn::from_int(-1)))
    }

    pub fn scale(&self, c: &RatFn) -> EllClass {
        if c.is_zero() {
            return EllClass::zero(self.model);
        }
        EllClass {
            model: self.model,
            terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect(),
        }
    }

    pub fn mul(&self, other: &EllClass) -> Result<EllClass, FlagError> {
        if self.model != other.model {
            return Err(FlagError::ModelMismatch);
        }
        let mut out = EllClass::zero(self.model);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = (ma.0 + mb.0, ma.1 + mb.1, ma.2 + mb.2);
                out.insert(m, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<EllClass, FlagError> {
        let mut acc = EllClass::one(self.model);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Multiplicative inverse as a truncated power series; the constant
    /// term must be 1.
    pub fn inverse_series(&self) -> Result<EllClass, FlagError> {
        if self.coeff((0, 0, 0)) != RatFn::one() {
            return Err(FlagError::NotAUnitSeries);
        }
        let u = self.sub(&EllClass::one(self.model))?;
        let mut acc = EllClass::one(self.model);
        let mut upow = EllClass::one(self.model);
        for k in 1..=self.model.top_degree() as u32 {
            upow = upow.mul(&u)?;
            let signed = if k % 2 == 0 {
                upow.clone()
            } else {
                upow.scale(&RatFn::from_int(-1))
            };
            acc = acc.add(&signed)?;
        }
        Ok(acc)
    }

    pub fn graded_part(&self, degree: u8) -> EllClass {
        EllClass {
            model: self.model,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.0 + m.1 + m.2 == degree)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }
}

impl fmt::Display for EllClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c}) {}", mono_name(*m))?;
        }
        Ok(())
    }
}

fn p_rf() -> RatFn {
    RatFn::var()
}

fn rf_poly(poly: PPoly) -> RatFn {
    RatFn::from_poly(poly)
}

/// `c₂(Q₁) = (ℓ₀² + ℓ₁² - ℓ₂²)/2` on the genus-4 model.
pub fn c2_q1() -> EllClass {
    let model = FlagModel::GenusFour;
    let half = RatFn::from_rat(Rat::new(1.into(), 2.into()));
    let l0 = EllClass::ell(model, 0);
    let l1 = EllClass::ell(model, 1);
    let l2 = EllClass::ell(model, 2);
    l0.pow(2)
        .unwrap()
        .add(&l1.pow(2).unwrap())
        .unwrap()
        .sub(&l2.pow(2).unwrap())
        .unwrap()
        .scale(&half)
}

/// Total Chern class of the Hodge bundle on the genus-4 model, graded
/// parts 0..4:
/// `(1-ℓ₂)(1+pℓ₁+p²c₂)(1+pℓ₀) / [(1-pℓ₂)(1+ℓ₁+c₂)(1+ℓ₀)]`
/// with `c₂ = c₂(Q₁)` substituted.
pub fn chern_hodge_g4() -> EllClass {
    let model = FlagModel::GenusFour;
    let p = p_rf();
    let p2 = &p * &p;
    let one = EllClass::one(model);
    let l0 = EllClass::ell(model, 0);
    let l1 = EllClass::ell(model, 1);
    let l2 = EllClass::ell(model, 2);
    let c2 = c2_q1();

    let num = one
        .sub(&l2)
        .unwrap()
        .mul(
            &one.add(&l1.scale(&p))
                .unwrap()
                .add(&c2.scale(&p2))
                .unwrap(),
        )
        .unwrap()
        .mul(&one.add(&l0.scale(&p)).unwrap())
        .unwrap();

    let den_inv = one
        .sub(&l2.scale(&p))
        .unwrap()
        .inverse_series()
        .unwrap()
        .mul(
            &one.add(&l1)
                .unwrap()
                .add(&c2)
                .unwrap()
                .inverse_series()
                .unwrap(),
        )
        .unwrap()
        .mul(&one.add(&l0).unwrap().inverse_series().unwrap())
        .unwrap();

    num.mul(&den_inv).unwrap()
}

/// Deletes every degree-4 monomial that vanishes on the genus-4 model,
/// leaving only the five [`G4_UNKNOWNS`]. Lower-degree terms pass
/// through.
pub fn vanishing_reduce(c: &EllClass) -> EllClass {
    assert_eq!(c.model, FlagModel::GenusFour);
    EllClass {
        model: c.model,
        terms: c
            .terms
            .iter()
            .filter(|(m, _)| m.0 + m.1 + m.2 < 4 || G4_UNKNOWNS.contains(m))
            .map(|(m, c)| (*m, c.clone()))
            .collect(),
    }
}

/// Reads a degree-4 class as a coefficient row over the five unknowns.
pub fn to_row(c: &EllClass) -> Result<[RatFn; 5], FlagError> {
    let reduced = vanishing_reduce(c);
    for (m, _) in reduced.terms() {
        if !G4_UNKNOWNS.contains(&m) {
            return Err(FlagError::NonSurvivor(mono_name(m)));
        }
    }
    Ok(G4_UNKNOWNS.map(|m| reduced.coeff(m)))
}

/// One linear relation among the five degree-4 intersection numbers.
#[derive(Debug, Clone)]
pub struct RelationRow {
    pub provenance: String,
    pub coeffs: [RatFn; 5],
    pub rhs: RatFn,
}

impl RelationRow {
    pub fn eval(&self, values: &[RatFn; 5]) -> RatFn {
        eval_row(&self.coeffs, values)
    }

    pub fn is_satisfied_by(&self, values: &[RatFn; 5]) -> bool {
        self.eval(values) == self.rhs
    }
}

/// The full (deliberately overdetermined) relation system on the genus-4
/// model.
#[derive(Debug, Clone)]
pub struct RelationSystem {
    pub unknowns: [Mono; 5],
    pub rows: Vec<RelationRow>,
}

fn scale_row(row: &[RatFn; 5], s: &RatFn) -> [RatFn; 5] {
    core::array::from_fn(|i| &row[i] * s)
}

fn add_rows(a: &[RatFn; 5], b: &[RatFn; 5]) -> [RatFn; 5] {
    core::array::from_fn(|i| &a[i] + &b[i])
}

fn eval_row(row: &[RatFn; 5], values: &[RatFn; 5]) -> RatFn {
    let mut acc = RatFn::zero();
    for (c, v) in row.iter().zip(values) {
        acc += &(c * v);
    }
    acc
}

/// The class `p ℓ₁ - (p²+1) ℓ₂` of the closure of the horizontal
/// degeneracy divisor on the threefold, together with an opaque marker
/// for its exceptional-support part.
#[derive(Debug, Clone)]
pub struct DpsiClass {
    principal: EllClass,
    has_exceptional_support: bool,
}

impl DpsiClass {
    /// The monomial part `p ℓ₁ - (p²+1) ℓ₂`; the exceptional part has no
    /// expansion.
    pub fn principal_part(&self) -> &EllClass {
        &self.principal
    }

    pub fn has_exceptional_support(&self) -> bool {
        self.has_exceptional_support
    }

    /// Product with a general class is undefined while the exceptional
    /// marker is present.
    pub fn mul_full(&self, _other: &EllClass) -> Result<EllClass, FlagError> {
        Err(FlagError::ExceptionalProduct)
    }

    /// Product with `c₂(Q₁)`, which annihilates the exceptional part, so
    /// only the principal part contributes.
    pub fn mul_c2q1(&self) -> EllClass {
        c2_q1().mul(&self.principal).unwrap()
    }
}

/// The class of the closure of the horizontal degeneracy divisor:
/// `p ℓ₁ - (p²+1) ℓ₂` plus a class supported on the exceptional fibres.
pub fn dpsi_class() -> DpsiClass {
    let model = FlagModel::GenusFour;
    let p = p_rf();
    let p2p1 = rf_poly(PPoly::p_power_plus(2, 1));
    let principal = EllClass::ell(model, 1)
        .scale(&p)
        .sub(&EllClass::ell(model, 2).scale(&p2p1))
        .unwrap();
    DpsiClass {
        principal,
        has_exceptional_support: true,
    }
}

/// Builds the relation system from the Chern-class machinery. Every row
/// is normalized to the integral form in which it is usually displayed.
pub fn relation_system_g4() -> RelationSystem {
    let model = FlagModel::GenusFour;
    let p = p_rf();
    let one = EllClass::one(model);
    let l0 = EllClass::ell(model, 0);
    let l1 = EllClass::ell(model, 1);
    let l2 = EllClass::ell(model, 2);
    let c2 = c2_q1();

    let mut rows = Vec::new();

    // The top Chern class of the Hodge bundle vanishes on the open
    // moduli space; its expansion gives a degree-4 relation directly on
    // the model. Normalized by -2/(p-1)².
    let lambda4 = chern_hodge_g4().graded_part(4);
    let scale = &RatFn::from_int(-2) * &rf_poly(PPoly::p_power_plus(1, -1).pow(2)).recip().unwrap();
    rows.push(RelationRow {
        provenance: "vanishing of the top Chern class of the Hodge bundle".into(),
        coeffs: scale_row(&to_row(&lambda4).unwrap(), &scale),
        rhs: RatFn::zero(),
    });

    // The rank-2 kernel sheaf of Lie → Q₁ on the threefold has zero
    // third Chern class; lifted to the model by ℓ₀ and doubled to clear
    // the half-integral c₂.
    let c_a = one
        .sub(&l2)
        .unwrap()
        .mul(&one.sub(&l2.scale(&p)).unwrap().inverse_series().unwrap())
        .unwrap()
        .mul(
            &one.add(&l1)
                .unwrap()
                .add(&c2)
                .unwrap()
                .inverse_series()
                .unwrap(),
        )
        .unwrap();
    let c3a_row = to_row(&c_a.graded_part(3).mul(&l0).unwrap()).unwrap();
    rows.push(RelationRow {
        provenance: "third Chern class of the rank-2 kernel sheaf vanishes, lifted by l0".into(),
        coeffs: scale_row(&c3a_row, &RatFn::from_int(2)),
        rhs: RatFn::zero(),
    });

    // On a hyperplane of the base surface avoiding its small-field
    // points, the relative flag sheaf is a line bundle, so its second
    // Chern class vanishes; multiplied by ℓ₂ (the hyperplane class) and
    // lifted by ℓ₀. Normalized by -2/p.
    let p2 = &p * &p;
    let c_l = one
        .sub(&l2.scale(&p))
        .unwrap()
        .mul(&one.sub(&l2.scale(&p2)).unwrap().inverse_series().unwrap())
        .unwrap()
        .mul(&one.sub(&l2).unwrap().inverse_series().unwrap())
        .unwrap()
        .mul(
            &one.add(&l1.scale(&p))
                .unwrap()
                .add(&c2.scale(&p2))
                .unwrap()
                .inverse_series()
                .unwrap(),
        )
        .unwrap();
    let c2l_row = to_row(&c_l.graded_part(2).mul(&l2).unwrap().mul(&l0).unwrap()).unwrap();
    let scale = &RatFn::from_int(-2) * &p.recip().unwrap();
    rows.push(RelationRow {
        provenance: "second Chern class of the relative flag line bundle on a generic hyperplane"
            .into(),
        coeffs: scale_row(&c2l_row, &scale),
        rhs: RatFn::zero(),
    });

    // c₂(Q₁) annihilates the horizontal degeneracy divisor class and its
    // exceptional part: (ℓ₀²+ℓ₁²-ℓ₂²)(pℓ₁-(p²+1)ℓ₂) = 0, lifted by ℓ₀.
    // The doubling clears the 1/2 in c₂.
    let final_stone = dpsi_class()
        .mul_c2q1()
        .scale(&RatFn::from_int(2))
        .mul(&l0)
        .unwrap();
    rows.push(RelationRow {
        provenance: "the tautological c2 annihilates the horizontal degeneracy divisor".into(),
        coeffs: to_row(&final_stone).unwrap(),
        rhs: RatFn::zero(),
    });

    // Fiber degree: ℓ₀ℓ₁ℓ₂² = p²(p²+1). The hyperplane square on the
    // base surface is p²+1 points; each pulls back to p times a fibre on
    // which ℓ₁ has degree p, and ℓ₀ has degree 1 on the ruling.
    rows.push(RelationRow {
        provenance: "fiber degree of l1 l2^2 through the inseparable fibration".into(),
        coeffs: [
            RatFn::zero(),
            RatFn::zero(),
            RatFn::zero(),
            RatFn::zero(),
            RatFn::one(),
        ],
        rhs: rf_poly(&PPoly::monomial(Rat::one(), 2) * &PPoly::p_power_plus(2, 1)),
    });

    // Redundant combination row: p·(third-Chern row) + (p-1)·(hyperplane
    // row); keeping it makes the system overdetermined on purpose.
    let combo = add_rows(
        &scale_row(&rows[1].coeffs, &p),
        &scale_row(&rows[2].coeffs, &rf_poly(PPoly::p_power_plus(1, -1))),
    );
    rows.push(RelationRow {
        provenance: "combination isolating l0^3 l1 against l0 l1 l2^2".into(),
        coeffs: combo,
        rhs: RatFn::zero(),
    });

    RelationSystem {
        unknowns: G4_UNKNOWNS,
        rows,
    }
}

/// Gaussian elimination over ℚ(p) on an augmented matrix. Returns the
/// rank of the coefficient block, one solution vector per rhs column
/// when that rank equals the number of unknowns, and a consistency flag.
#[allow(clippy::needless_range_loop)] // reads the pivot row while writing others
fn eliminate(rows: &[Vec<RatFn>], n_unknowns: usize) -> (usize, Option<Vec<Vec<RatFn>>>, bool) {
    let mut m: Vec<Vec<RatFn>> = rows.to_vec();
    let n_rows = m.len();
    let width = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut pivot_cols = Vec::new();
    for col in 0..n_unknowns {
        let Some(pivot) = (rank..n_rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let inv = m[rank][col].recip().unwrap();
        for c in 0..width {
            m[rank][c] = &m[rank][c] * &inv;
        }
        for r in 0..n_rows {
            if r != rank && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..width {
                    let sub = &m[rank][c] * &factor;
                    m[r][c] = &m[r][c] - &sub;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == n_rows {
            break;
        }
    }
    let consistent = m.iter().all(|row| {
        row[..n_unknowns].iter().any(|c| !c.is_zero())
            || row[n_unknowns..].iter().all(RatFn::is_zero)
    });
    if rank < n_unknowns || !consistent {
        return (rank, None, consistent);
    }
    let n_rhs = width - n_unknowns;
    let mut solutions = vec![vec![RatFn::zero(); n_unknowns]; n_rhs];
    for (r, col) in pivot_cols.iter().enumerate() {
        for (k, solution) in solutions.iter_mut().enumerate() {
            solution[*col] = m[r][n_unknowns + k].clone();
        }
    }
    (rank, Some(solutions), consistent)
}

/// Solves the relation system; the solution must be unique and must
/// satisfy every row of the overdetermined system.
pub fn solve_g4(system: &RelationSystem) -> Result<[RatFn; 5], FlagError> {
    let rows: Vec<Vec<RatFn>> = system
        .rows
        .iter()
        .map(|r| {
            let mut v: Vec<RatFn> = r.coeffs.to_vec();
            v.push(r.rhs.clone());
            v
        })
        .collect();
    let (rank, solutions, _) = eliminate(&rows, 5);
    let Some(solutions) = solutions else {
        return Err(FlagError::SingularSystem(rank));
    };
    let values: [RatFn; 5] = solutions[0].clone().try_into().unwrap();
    for row in &system.rows {
        if !row.is_satisfied_by(&values) {
            return Err(FlagError::SingularSystem(rank));
        }
    }
    Ok(values)
}

/// The solved degree vector `p(p²+1)·[p²-p+1, -(p²-p+1), -(p-1)²,
/// p²-p+1, p]` in closed form, for display and cross-checks.
pub fn expected_degrees() -> [PPoly; 5] {
    let base = &PPoly::var() * &PPoly::p_power_plus(2, 1);
    let q = PPoly::from_coeffs(vec![rint(1), rint(-1), rint(1)]);
    let sq = PPoly::p_power_plus(1, -1).pow(2);
    [
        &base * &q,
        -&(&base * &q),
        -&(&base * &sq),
        &base * &q,
        &base * &PPoly::var(),
    ]
}

/// Affine expression `constant + x_coeff·x` in the distinguished unknown
/// `x = deg(ℓ₀ℓ₁²ℓ₂)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineInX {
    pub constant: RatFn,
    pub x_coeff: RatFn,
}

/// Solves the system without the degeneracy-divisor row, leaving one
/// degree of freedom; each unknown comes out affine in
/// `x = deg(ℓ₀ℓ₁²ℓ₂)`.
pub fn solve_one_unknown(system: &RelationSystem) -> Result<[AffineInX; 5], FlagError> {
    // Drop the row coming from the degeneracy divisor and move the
    // ℓ₀ℓ₁²ℓ₂ column (index 3) to the right-hand side.
    let keep: Vec<&RelationRow> = system
        .rows
        .iter()
        .filter(|r| !r.provenance.contains("degeneracy divisor"))
        .collect();
    let reduced: Vec<Vec<RatFn>> = keep
        .iter()
        .map(|r| {
            vec![
                r.coeffs[0].clone(),
                r.coeffs[1].clone(),
                r.coeffs[2].clone(),
                r.coeffs[4].clone(),
                r.rhs.clone(),
                &RatFn::zero() - &r.coeffs[3],
            ]
        })
        .collect();
    let (rank, solutions, _) = eliminate(&reduced, 4);
    let Some(solutions) = solutions else {
        return Err(FlagError::SingularSystem(rank));
    };
    let place = |i: usize| AffineInX {
        constant: solutions[0][i].clone(),
        x_coeff: solutions[1][i].clone(),
    };
    Ok([
        place(0),
        place(1),
        place(2),
        AffineInX {
            constant: RatFn::zero(),
            x_coeff: RatFn::one(),
        },
        place(3),
    ])
}

/// Full derivation of the genus-4 coefficient, with all intermediates
/// kept for reporting.
#[derive(Debug, Clone)]
pub struct F4Derivation {
    pub solved: [RatFn; 5],
    pub lambda31_row: [RatFn; 5],
    pub deg_on_model: PPoly,
    pub deg_on_component: PPoly,
    pub f4: PPoly,
    pub f4_factored: FactoredPPoly,
    pub matches_closed_form: bool,
    pub component_deg_matches: bool,
}

/// Closed-form coefficient `(p-1)³(p³-1)(p⁴-1)(p⁶-1)`.
pub fn f4_closed_form() -> FactoredPPoly {
    FactoredPPoly::one()
        .with_factor(PPoly::p_power_plus(1, -1), 3)
        .with_factor(PPoly::p_power_plus(3, -1), 1)
        .with_factor(PPoly::p_power_plus(4, -1), 1)
        .with_factor(PPoly::p_power_plus(6, -1), 1)
}

/// `deg(λ₃λ₁)` on one component: `(p-1)⁴(p²+p+1)(p²+1)`.
pub fn component_deg_closed_form() -> FactoredPPoly {
    FactoredPPoly::one()
        .with_factor(PPoly::p_power_plus(1, -1), 4)
        .with_factor(PPoly::from_coeffs(vec![rint(1), rint(1), rint(1)]), 1)
        .with_factor(PPoly::p_power_plus(2, 1), 1)
}

/// Derives f₄(p): expands `λ₃λ₁` from the Hodge Chern class, reduces,
/// substitutes the solved degrees, divides by the degree p of the map
/// from the model to the component, and multiplies by the stacky
/// component count divided by v(4).
pub fn f4() -> Result<F4Derivation, FlagError> {
    let system = relation_system_g4();
    let solved = solve_g4(&system)?;
    let chern = chern_hodge_g4();
    let lambda31 = chern.graded_part(3).mul(&chern.graded_part(1)).unwrap();
    let lambda31_row = to_row(&lambda31)?;
    let on_model = eval_row(&lambda31_row, &solved);
    let deg_on_model = on_model
        .to_poly()
        .ok_or_else(|| FlagError::NotPolynomial(on_model.to_string()))?;
    let over_p = &on_model * &p_rf().recip().unwrap();
    let deg_on_component = over_p
        .to_poly()
        .ok_or_else(|| FlagError::NotPolynomial(over_p.to_string()))?;

    // Stacky component count over v(4): (p²-1)(p⁶-1).
    let comps = &PPoly::p_power_plus(2, -1) * &PPoly::p_power_plus(6, -1);
    let f4 = &deg_on_component * &comps;
    let f4_factored = f4_closed_form();
    let matches_closed_form = f4 == f4_factored.expand();
    let component_deg_matches = deg_on_component == component_deg_closed_form().expand();
    let derivation = F4Derivation {
        solved,
        lambda31_row,
        deg_on_model,
        deg_on_component,
        f4,
        f4_factored,
        matches_closed_form,
        component_deg_matches,
    };
    if !matches_closed_form {
        return Err(FlagError::Mismatch(format!(
            "f4 = {}, expected {}; deg on model = {}, row = [{}]",
            derivation.f4,
            derivation.f4_factored,
            derivation.deg_on_model,
            derivation
                .lambda31_row
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(", "),
        )));
    }
    Ok(derivation)
}

/// Everything the genus-3 chain produces.
#[derive(Debug, Clone)]
pub struct G3Chain {
    pub lambda1: EllClass,
    pub lambda2: EllClass,
    /// `λ₁² - 2λ₂` before anything is imposed on ℓ₀²; a nonzero multiple
    /// of ℓ₀² alone, which forces ℓ₀² = 0.
    pub square_defect: EllClass,
    pub ell0_sq_coeff: RatFn,
    pub deg_lambda2: FactoredPPoly,
    pub f3: FactoredPPoly,
    pub f3_matches: bool,
    pub section_class: EllClass,
    pub section_self_intersection: PPoly,
}

/// Closed-form coefficient `(p-1)²(p³-1)(p⁴-1)`.
pub fn f3_closed_form() -> FactoredPPoly {
    FactoredPPoly::one()
        .with_factor(PPoly::p_power_plus(1, -1), 2)
        .with_factor(PPoly::p_power_plus(3, -1), 1)
        .with_factor(PPoly::p_power_plus(4, -1), 1)
}

/// Runs the genus-3 derivation: Chern expansion on the ruled surface
/// over the degree-(p+1) plane curve, ℓ₀² = 0 derived from λ₁² = 2λ₂,
/// the degree of λ₂, the class coefficient f₃, and the section class
/// with its self-intersection.
pub fn g3_chain() -> Result<G3Chain, FlagError> {
    let model = FlagModel::GenusThree;
    let p = p_rf();
    let one = EllClass::one(model);
    let l0 = EllClass::ell(model, 0);
    let l1 = EllClass::ell(model, 1);

    // c(E) = (1-ℓ₁)(1+pℓ₀) / [(1-pℓ₁)(1+ℓ₀)]; ℓ₁² = 0 is built into the
    // calculus (curve class).
    let chern = one
        .sub(&l1)
        .unwrap()
        .mul(&one.add(&l0.scale(&p)).unwrap())
        .unwrap()
        .mul(&one.sub(&l1.scale(&p)).unwrap().inverse_series().unwrap())
        .unwrap()
        .mul(&one.add(&l0).unwrap().inverse_series().unwrap())
        .unwrap();
    let lambda1 = chern.graded_part(1);
    let lambda2 = chern.graded_part(2);

    // λ₁² - 2λ₂ must come out as a multiple of ℓ₀² alone; that multiple
    // being a unit forces deg ℓ₀² = 0 on the surface.
    let square_defect = lambda1.pow(2)?.sub(&lambda2.scale(&RatFn::from_int(2)))?;
    for (m, _) in square_defect.terms() {
        if m != (2, 0, 0) {
            return Err(FlagError::UnexpectedShape(square_defect.to_string()));
        }
    }
    let ell0_sq_coeff = square_defect.coeff((2, 0, 0));
    if ell0_sq_coeff.is_zero() {
        return Err(FlagError::UnexpectedShape(square_defect.to_string()));
    }

    // Degree map: deg(ℓ₀ℓ₁) = p+1 (plane-curve degree paired with the
    // ruling), deg(ℓ₀²) = 0 as just derived, ℓ₁² is already gone.
    let deg = |class: &EllClass| -> RatFn {
        let mut acc = RatFn::zero();
        for (m, c) in class.terms() {
            match m {
                (1, 1, 0) => acc += &(c * &rf_poly(PPoly::p_power_plus(1, 1))),
                (2, 0, 0) => {}
                _ => panic!("not a top-degree surface monomial: {}", mono_name(m)),
            }
        }
        acc
    };

    let deg_l2 = deg(&lambda2);
    let deg_lambda2 = FactoredPPoly::one()
        .with_factor(PPoly::p_power_plus(1, 1), 1)
        .with_factor(PPoly::p_power_plus(1, -1), 2);
    if deg_l2.to_poly() != Some(deg_lambda2.expand()) {
        return Err(FlagError::Mismatch(format!(
            "deg λ2 = {deg_l2}, expected {deg_lambda2}"
        )));
    }

    // f₃ = deg(λ₂) · N₃/v(3), with N₃/v(3) = (p-1)(p²+1)(p³-1).
    let f3 = deg_lambda2
        .clone()
        .with_factor(PPoly::p_power_plus(1, -1), 1)
        .with_factor(PPoly::p_power_plus(2, 1), 1)
        .with_factor(PPoly::p_power_plus(3, -1), 1);
    let f3_matches = f3.expand() == f3_closed_form().expand();
    if !f3_matches {
        return Err(FlagError::Mismatch(format!(
            "f3 = {f3}, expected {}",
            f3_closed_form()
        )));
    }

    // Section class S = ℓ₀ - ℓ₁ with S² = -2(p+1).
    let section_class = l0.sub(&l1)?;
    let s_sq = deg(&section_class.pow(2)?);
    let section_self_intersection = s_sq
        .to_poly()
        .ok_or_else(|| FlagError::NotPolynomial(s_sq.to_string()))?;

    Ok(G3Chain {
        lambda1,
        lambda2,
        square_defect,
        ell0_sq_coeff,
        deg_lambda2,
        f3,
        f3_matches,
        section_class,
        section_self_intersection,
    })
}

/// One combination of the five degrees evaluated at the solution.
#[derive(Debug, Clone)]
pub struct CrosscheckEntry {
    pub name: String,
    pub row: [RatFn; 5],
    pub value: RatFn,
}

/// Pairwise comparison of two combinations.
#[derive(Debug, Clone)]
pub struct PairVerdict {
    pub left: String,
    pub right: String,
    pub values_agree: bool,
    pub rows_equal: bool,
    pub rows_proportional: Option<RatFn>,
    pub difference_in_relation_span: bool,
}

#[derive(Debug, Clone)]
pub struct CrosscheckReport {
    pub entries: Vec<CrosscheckEntry>,
    pub pairs: Vec<PairVerdict>,
    /// `p(p-1)⁴(p²+p+1)(p²+1)`, the model-level value the coefficient
    /// assembly needs.
    pub reference_value: PPoly,
    pub matches_reference: Vec<bool>,
}

fn row_proportionality(a: &[RatFn; 5], b: &[RatFn; 5]) -> Option<RatFn> {
    let idx = (0..5).find(|&i| !b[i].is_zero())?;
    if a[idx].is_zero() {
        return None;
    }
    let ratio = &a[idx] * &b[idx].recip().ok()?;
    for i in 0..5 {
        if &b[i] * &ratio != a[i] {
            return None;
        }
    }
    Some(ratio)
}

fn in_span_of_homogeneous_rows(rows: &[&RelationRow], candidate: &[RatFn; 5]) -> bool {
    let base: Vec<Vec<RatFn>> = rows.iter().map(|r| r.coeffs.to_vec()).collect();
    let (base_rank, _, _) = eliminate(&base, 5);
    let mut extended = base;
    extended.push(candidate.to_vec());
    let (ext_rank, _, _) = eliminate(&extended, 5);
    ext_rank == base_rank
}

/// Evaluates the two printed degree-4 combinations for `deg(λ₃λ₁)` and
/// the direct expansion, reports pairwise agreement, and tests whether
/// each pairwise difference lies in the span of the homogeneous
/// relations. Disagreement is a reported finding, never an error.
pub fn crosscheck_printed_g4() -> Result<CrosscheckReport, FlagError> {
    let system = relation_system_g4();
    let solved = solve_g4(&system)?;

    let half_p14 = &RatFn::from_rat(Rat::new(1.into(), 2.into()))
        * &rf_poly(PPoly::p_power_plus(1, -1).pow(4));
    // Combination (a): ½(p-1)⁴ (ℓ₀³ℓ₁ + ℓ₀³ℓ₂ + ℓ₀ℓ₁³ + 3ℓ₀ℓ₁²ℓ₂ +
    // 3ℓ₀ℓ₁ℓ₂²).
    let row_a = [
        half_p14.clone(),
        half_p14.clone(),
        half_p14.clone(),
        &half_p14 * &RatFn::from_int(3),
        &half_p14 * &RatFn::from_int(3),
    ];

    // Combination (b): (p²-3p+1)ℓ₀³ℓ₁ + (2p²-2p+2)ℓ₀³ℓ₂ + (p²-3p+1)ℓ₀ℓ₁³
    // + 4(p-1)²ℓ₀ℓ₁²ℓ₂ + (5p²-7p+5)ℓ₀ℓ₁ℓ₂².
    let row_b = [
        rf_poly(PPoly::from_coeffs(vec![rint(1), rint(-3), rint(1)])),
        rf_poly(PPoly::from_coeffs(vec![rint(2), rint(-2), rint(2)])),
        rf_poly(PPoly::from_coeffs(vec![rint(1), rint(-3), rint(1)])),
        rf_poly(PPoly::p_power_plus(1, -1).pow(2).scale(&rint(4))),
        rf_poly(PPoly::from_coeffs(vec![rint(5), rint(-7), rint(5)])),
    ];

    // Combination (c): λ₃λ₁ straight from the Chern class.
    let chern = chern_hodge_g4();
    let row_c = to_row(&chern.graded_part(3).mul(&chern.graded_part(1)).unwrap())?;

    let entries = vec![
        CrosscheckEntry {
            name: "half-(p-1)^4 combination".into(),
            value: eval_row(&row_a, &solved),
            row: row_a,
        },
        CrosscheckEntry {
            name: "final-assembly combination".into(),
            value: eval_row(&row_b, &solved),
            row: row_b,
        },
        CrosscheckEntry {
            name: "direct lambda3*lambda1 expansion".into(),
            value: eval_row(&row_c, &solved),
            row: row_c,
        },
    ];

    let homogeneous: Vec<&RelationRow> = system.rows.iter().filter(|r| r.rhs.is_zero()).collect();

    let mut pairs = Vec::new();
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            let a = &entries[i];
            let b = &entries[j];
            let diff: [RatFn; 5] = core::array::from_fn(|k| &a.row[k] - &b.row[k]);
            pairs.push(PairVerdict {
                left: a.name.clone(),
                right: b.name.clone(),
                values_agree: a.value == b.value,
                rows_equal: a.row == b.row,
                rows_proportional: row_proportionality(&a.row, &b.row),
                difference_in_relation_span: in_span_of_homogeneous_rows(&homogeneous, &diff),
            });
        }
    }

    let reference_value = &(&PPoly::var() * &PPoly::p_power_plus(1, -1).pow(4))
        * &(&PPoly::from_coeffs(vec![rint(1), rint(1), rint(1)]) * &PPoly::p_power_plus(2, 1));
    let matches_reference = entries
        .iter()
        .map(|e| e.value.to_poly() == Some(reference_value.clone()))
        .collect();

    Ok(CrosscheckReport {
        entries,
        pairs,
        reference_value,
        matches_reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::rat;

    fn rf_const(n: i64) -> RatFn {
        RatFn::from_int(n)
    }

    fn pp(k: usize, a: i64) -> PPoly {
        PPoly::p_power_plus(k, a)
    }

    #[test]
    fn chern_degree_zero_and_one() {
        let c = chern_hodge_g4();
        assert_eq!(c.graded_part(0), EllClass::one(FlagModel::GenusFour));
        // λ1 = (p-1)(l0+l1+l2).
        let l1 = c.graded_part(1);
        let pm1 = rf_poly(pp(1, -1));
        for m in [(1, 0, 0), (0, 1, 0), (0, 0, 1)] {
            assert_eq!(l1.coeff(m), pm1);
        }
        assert_eq!(l1.terms().count(), 3);
    }

    #[test]
    fn lambda1_squared_is_twice_lambda2() {
        // With c2(Q1) substituted, λ1² - 2λ2 vanishes identically.
        let c = chern_hodge_g4();
        let l1 = c.graded_part(1);
        let l2 = c.graded_part(2);
        let defect = l1.pow(2).unwrap().sub(&l2.scale(&rf_const(2))).unwrap();
        assert!(defect.is_zero(), "nonzero defect: {defect}");
    }

    #[test]
    fn vanishing_reduce_examples() {
        let m = FlagModel::GenusFour;
        // ℓ2^4 is purged by the calculus itself.
        let c = EllClass::ell(m, 2).pow(4).unwrap();
        assert!(vanishing_reduce(&c).is_zero());
        // ℓ0²ℓ1ℓ2 is stored but dies under reduction.
        let c = EllClass::term(m, (2, 1, 1), RatFn::one());
        assert!(!c.is_zero());
        assert!(vanishing_reduce(&c).is_zero());
        // ℓ0ℓ1²ℓ2 survives unchanged.
        let c = EllClass::term(m, (1, 2, 1), RatFn::one());
        assert_eq!(vanishing_reduce(&c), c);
    }

    #[test]
    fn relation_rows_match_printed_forms() {
        let system = relation_system_g4();
        let p = rf_poly(PPoly::var());
        let p2p1 = rf_poly(pp(2, 1));
        let pm1 = rf_poly(pp(1, -1));
        let q = rf_poly(PPoly::from_coeffs(vec![rint(1), rint(-1), rint(1)]));

        // p ℓ0³ℓ1 - (p²+1) ℓ0³ℓ2 + p ℓ0ℓ1³ - (p-1)² ℓ0ℓ1²ℓ2 -
        // (2p²-p+2) ℓ0ℓ1ℓ2².
        let expected0 = [
            p.clone(),
            &RatFn::zero() - &p2p1,
            p.clone(),
            &RatFn::zero() - &rf_poly(pp(1, -1).pow(2)),
            &RatFn::zero() - &rf_poly(PPoly::from_coeffs(vec![rint(2), rint(-1), rint(2)])),
        ];
        assert_eq!(system.rows[0].coeffs, expected0);

        // 2 ℓ0³ℓ1 - (p-1) ℓ0³ℓ2 + (p-1) ℓ0ℓ1²ℓ2 - 2(p²-p+1) ℓ0ℓ1ℓ2².
        let expected1 = [
            rf_const(2),
            &RatFn::zero() - &pm1,
            RatFn::zero(),
            pm1.clone(),
            &rf_const(-2) * &q,
        ];
        assert_eq!(system.rows[1].coeffs, expected1);

        // p ℓ0³ℓ2 - p ℓ0ℓ1²ℓ2 + 2(p²-p+1) ℓ0ℓ1ℓ2².
        let expected2 = [
            RatFn::zero(),
            p.clone(),
            RatFn::zero(),
            &RatFn::zero() - &p,
            &rf_const(2) * &q,
        ];
        assert_eq!(system.rows[2].coeffs, expected2);

        // p ℓ0³ℓ1 - (p²+1) ℓ0³ℓ2 + p ℓ0ℓ1³ - (p²+1) ℓ0ℓ1²ℓ2 - p ℓ0ℓ1ℓ2².
        let expected3 = [
            p.clone(),
            &RatFn::zero() - &p2p1,
            p.clone(),
            &RatFn::zero() - &p2p1,
            &RatFn::zero() - &p,
        ];
        assert_eq!(system.rows[3].coeffs, expected3);

        // 2p ℓ0³ℓ1 - 2(p²-p+1) ℓ0ℓ1ℓ2².
        let expected5 = [
            &rf_const(2) * &p,
            RatFn::zero(),
            RatFn::zero(),
            RatFn::zero(),
            &rf_const(-2) * &q,
        ];
        assert_eq!(system.rows[5].coeffs, expected5);
    }

    #[test]
    fn solve_matches_expected_vector() {
        let system = relation_system_g4();
        let solved = solve_g4(&system).unwrap();
        let expected = expected_degrees();
        for (i, (got, want)) in solved.iter().zip(expected.iter()).enumerate() {
            assert_eq!(got.to_poly().as_ref(), Some(want), "unknown {i}");
        }
        // Substituting back annihilates every row, including the lifted
        // degeneracy-divisor row.
        for row in &system.rows {
            assert!(row.is_satisfied_by(&solved), "{}", row.provenance);
        }
    }

    #[test]
    fn one_unknown_solution_matches_printed_vector() {
        let system = relation_system_g4();
        let affine = solve_one_unknown(&system).unwrap();
        let base = &PPoly::var() * &pp(2, 1); // p(p²+1)
        let q = PPoly::from_coeffs(vec![rint(1), rint(-1), rint(1)]);

        // ℓ0³ℓ1 = p(p²+1)(p²-p+1), no x.
        assert_eq!(affine[0].constant.to_poly(), Some(&base * &q));
        assert!(affine[0].x_coeff.is_zero());

        // ℓ0³ℓ2 = x - 2p(p²+1)(p²-p+1).
        assert_eq!(affine[1].x_coeff, RatFn::one());
        assert_eq!(
            affine[1].constant.to_poly(),
            Some((&base * &q).scale(&rint(-2)))
        );

        // ℓ0ℓ1³ = 2(p-1+1/p)x - (p²+1)²(2p²-3p+2).
        let two_q_over_p =
            &(&rf_const(2) * &rf_poly(q)) * &rf_poly(PPoly::var()).recip().unwrap();
        assert_eq!(affine[2].x_coeff, two_q_over_p);
        let c = -&(&pp(2, 1).pow(2) * &PPoly::from_coeffs(vec![rint(2), rint(-3), rint(2)]));
        assert_eq!(affine[2].constant.to_poly(), Some(c));

        // ℓ0ℓ1²ℓ2 = x.
        assert_eq!(affine[3].x_coeff, RatFn::one());
        assert!(affine[3].constant.is_zero());

        // ℓ0ℓ1ℓ2² = p²(p²+1).
        assert!(affine[4].x_coeff.is_zero());
        assert_eq!(
            affine[4].constant.to_poly(),
            Some(&PPoly::monomial(Rat::one(), 2) * &pp(2, 1))
        );
    }

    #[test]
    fn f4_derivation() {
        let d = f4().unwrap();
        assert!(d.matches_closed_form);
        assert!(d.component_deg_matches);
        assert_eq!(d.f4, f4_closed_form().expand());
        assert_eq!(d.f4_factored.eval_int(2), rat(6615, 1)); // 1*7*15*63
        // ℓ0ℓ1³ = -p(p²+1)(p-1)² and ℓ0ℓ1ℓ2² = p²(p²+1) at the solution.
        assert_eq!(
            d.solved[2].to_poly(),
            Some(-&(&(&PPoly::var() * &pp(2, 1)) * &pp(1, -1).pow(2)))
        );
        assert_eq!(
            d.solved[4].to_poly(),
            Some(&PPoly::monomial(Rat::one(), 2) * &pp(2, 1))
        );
    }

    #[test]
    fn factoring_identity_behind_f4() {
        // (p-1)⁴(p²+p+1)(p²+1) (p²-1)(p⁶-1) = (p-1)³(p³-1)(p⁴-1)(p⁶-1).
        let lhs = &component_deg_closed_form().expand() * &(&pp(2, -1) * &pp(6, -1));
        assert_eq!(lhs, f4_closed_form().expand());
    }

    #[test]
    fn positivity_of_solved_degree() {
        // Solved ℓ0ℓ1²ℓ2 exceeds p(p²+1)(p-1)² for every integer p >= 2.
        let solved = solve_g4(&relation_system_g4()).unwrap();
        let bound = &(&PPoly::var() * &pp(2, 1)) * &pp(1, -1).pow(2);
        for p0 in 2..=50 {
            let v = solved[3].eval(&rint(p0)).unwrap();
            assert!(v > bound.eval_int(p0), "p = {p0}");
        }
    }

    #[test]
    fn g3_chain_examples() {
        let chain = g3_chain().unwrap();
        // λ1 = (p-1)(l0+l1).
        let pm1 = rf_poly(pp(1, -1));
        assert_eq!(chain.lambda1.coeff((1, 0, 0)), pm1);
        assert_eq!(chain.lambda1.coeff((0, 1, 0)), pm1);
        // λ1²-2λ2 is a nonzero multiple of l0² (here (p²-1) l0²), which
        // derives ℓ0² = 0 rather than imposing it.
        assert_eq!(chain.ell0_sq_coeff, rf_poly(pp(2, -1)));
        // deg λ2 = (p+1)(p-1)².
        assert_eq!(chain.deg_lambda2.expand(), &pp(1, 1) * &pp(1, -1).pow(2));
        // f3 matches (p-1)²(p³-1)(p⁴-1); value at p=3 is 4*26*80.
        assert!(chain.f3_matches);
        assert_eq!(chain.f3.eval_int(3), rat(4 * 26 * 80, 1));
        // S = l0 - l1 and S² = -2(p+1).
        assert_eq!(chain.section_class.coeff((1, 0, 0)), RatFn::one());
        assert_eq!(chain.section_class.coeff((0, 1, 0)), rf_const(-1));
        assert_eq!(chain.section_self_intersection, pp(1, 1).scale(&rint(-2)));
    }

    #[test]
    fn dpsi_examples() {
        let d = dpsi_class();
        // Coefficient of ℓ1 is p; of ℓ2 is -(p²+1).
        assert_eq!(d.principal_part().coeff((0, 1, 0)), rf_poly(PPoly::var()));
        assert_eq!(
            d.principal_part().coeff((0, 0, 1)),
            &RatFn::zero() - &rf_poly(pp(2, 1))
        );
        // Products with the exceptional marker are rejected.
        assert!(matches!(
            d.mul_full(&EllClass::one(FlagModel::GenusFour)),
            Err(FlagError::ExceptionalProduct)
        ));
        // c2(Q1) annihilates e, and the principal product, lifted by l0,
        // vanishes at the solved degrees.
        let system = relation_system_g4();
        let solved = solve_g4(&system).unwrap();
        let lifted = d
            .mul_c2q1()
            .mul(&EllClass::ell(FlagModel::GenusFour, 0))
            .unwrap();
        let row = to_row(&lifted).unwrap();
        assert!(eval_row(&row, &solved).is_zero());
    }

    #[test]
    fn crosscheck_report_shape() {
        let report = crosscheck_printed_g4().unwrap();
        assert_eq!(report.entries.len(), 3);
        assert_eq!(report.pairs.len(), 3);
        // The half-(p-1)^4 combination and the direct expansion agree in
        // value and their difference lies in the relation span.
        let pair_ac = report
            .pairs
            .iter()
            .find(|p| p.left.contains("half") && p.right.contains("direct"))
            .unwrap();
        assert!(pair_ac.values_agree);
        assert!(pair_ac.difference_in_relation_span);
        // The final-assembly combination as printed disagrees in value
        // with both, and the differences are not in the relation span.
        let pair_ab = report
            .pairs
            .iter()
            .find(|p| p.left.contains("half") && p.right.contains("final"))
            .unwrap();
        assert!(!pair_ab.values_agree);
        assert!(!pair_ab.difference_in_relation_span);
        // But it is proportional to the direct expansion by 2/(p-1)².
        let pair_bc = report
            .pairs
            .iter()
            .find(|p| p.left.contains("final") && p.right.contains("direct"))
            .unwrap();
        assert!(!pair_bc.values_agree);
        let ratio = pair_bc.rows_proportional.clone().unwrap();
        let half_sq = &RatFn::from_rat(rat(1, 2)) * &rf_poly(pp(1, -1).pow(2));
        assert_eq!(&ratio * &half_sq, RatFn::one());
        // Reference value p(p-1)⁴(p²+p+1)(p²+1) is matched by (a), (c).
        assert_eq!(report.matches_reference, vec![true, false, true]);
    }
}
