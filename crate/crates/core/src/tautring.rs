//! The tautological ring `R_g` in its square-free λ-monomial basis.
//!
//! Monomials are encoded as bitmasks over the index set `{1..g}`, so the
//! full basis of `R_g` has exactly `2^g` elements and squares are detected
//! in O(1). Arbitrary λ-polynomials are brought to the basis by rewriting
//! each square `λ_i^2` through the even-degree components of the defining
//! relation `(1+λ_1+..+λ_g)(1-λ_1+..+(-1)^g λ_g) = 1`.

use crate::exactpoly::{proportionality_v, Rat};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TautError {
    #[error("lambda index {index} out of range for genus {genus}")]
    IndexOutOfRange { index: usize, genus: u32 },
    #[error("genus mismatch: {0} vs {1}")]
    GenusMismatch(u32, u32),
    #[error("class is not homogeneous of degree {expected}")]
    WrongDegree { expected: u32 },
}

/// Bitmask of a square-free monomial: bit `i-1` set means `λ_i` divides it.
pub type Mask = u32;

/// Sum of the indices in a mask, i.e. the grading of the monomial.
pub fn mask_degree(mask: Mask) -> u32 {
    (1..=32u32)
        .filter(|i| mask & (1 << (i - 1)) != 0)
        .sum()
}

/// Top socle degree `g(g+1)/2` of `R_g`.
pub fn socle_codim(g: u32) -> u32 {
    g * (g + 1) / 2
}

/// All basis masks of `R_g` of the given degree.
pub fn basis_of_degree(g: u32, degree: u32) -> Vec<Mask> {
    (0..(1u32 << g))
        .filter(|&m| mask_degree(m) == degree)
        .collect()
}

/// Which square gets rewritten first when several are present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewriteOrder {
    LowestIndexFirst,
    HighestIndexFirst,
}

/// Element of `R_g`: a rational combination of square-free λ-monomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TautClass {
    g: u32,
    terms: BTreeMap<Mask, Rat>,
}

impl TautClass {
    pub fn zero(g: u32) -> Self {
        TautClass {
            g,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(g: u32) -> Self {
        TautClass::monomial(g, 0, Rat::from_integer(1.into()))
    }

    /// A single square-free monomial with the given coefficient.
    pub fn monomial(g: u32, mask: Mask, coeff: Rat) -> Self {
        assert!(mask < (1 << g), "monomial mask exceeds genus");
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(mask, coeff);
        }
        TautClass { g, terms }
    }

    /// `λ_i` as a class.
    pub fn lambda(g: u32, i: u32) -> Result<Self, TautError> {
        if i == 0 || i > g {
            return Err(TautError::IndexOutOfRange {
                index: i as usize,
                genus: g,
            });
        }
        Ok(TautClass::monomial(
            g,
            1 << (i - 1),
            Rat::from_integer(1.into()),
        ))
    }

    pub fn genus(&self) -> u32 {
        self.g
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Mask, &Rat)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn coeff(&self, mask: Mask) -> Rat {
        self.terms.get(&mask).cloned().unwrap_or_else(Rat::zero)
    }

    fn insert(&mut self, mask: Mask, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(mask).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn add(&self, other: &TautClass) -> Result<TautClass, TautError> {
        if self.g != other.g {
            return Err(TautError::GenusMismatch(self.g, other.g));
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(*m, c.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rat) -> TautClass {
        if c.is_zero() {
            return TautClass::zero(self.g);
        }
        TautClass {
            g: self.g,
            terms: self.terms.iter().map(|(m, a)| (*m, a * c)).collect(),
        }
    }

    /// Ring multiplication; the result is reduced to the square-free basis.
    pub fn mul(&self, other: &TautClass) -> Result<TautClass, TautError> {
        if self.g != other.g {
            return Err(TautError::GenusMismatch(self.g, other.g));
        }
        let mut expr = LambdaExpr::new(self.g);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mut exps = vec![0u32; self.g as usize];
                for i in 0..self.g {
                    exps[i as usize] =
                        ((ma >> i) & 1) + ((mb >> i) & 1);
                }
                expr.push(ca * cb, exps)?;
            }
        }
        reduce_expr(&expr, RewriteOrder::LowestIndexFirst)
    }

    /// Splits into homogeneous pieces keyed by degree.
    pub fn graded_parts(&self) -> BTreeMap<u32, TautClass> {
        let mut parts: BTreeMap<u32, TautClass> = BTreeMap::new();
        for (m, c) in &self.terms {
            parts
                .entry(mask_degree(*m))
                .or_insert_with(|| TautClass::zero(self.g))
                .insert(*m, c.clone());
        }
        parts
    }

    pub fn is_homogeneous_of(&self, degree: u32) -> bool {
        self.terms.keys().all(|m| mask_degree(*m) == degree)
    }

    /// Degree of a top-codimension class: the coefficient of the socle
    /// monomial `λ_1..λ_g` times `v(g)`.
    pub fn socle_degree(&self) -> Result<Rat, TautError> {
        let top = socle_codim(self.g);
        if !self.is_homogeneous_of(top) {
            return Err(TautError::WrongDegree { expected: top });
        }
        let full: Mask = (1 << self.g) - 1;
        Ok(self.coeff(full) * proportionality_v(self.g))
    }

    /// Passes to `R_g/(λ_g)`: drops every monomial containing `λ_g`.
    pub fn quotient_open(&self) -> TautClass {
        if self.g == 0 {
            return self.clone();
        }
        let top_bit = 1 << (self.g - 1);
        TautClass {
            g: self.g,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| *m & top_bit == 0)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Reinterprets a `λ_g`-free class as an element of `R_{g-1}`.
    pub fn to_lower_genus(&self) -> Result<TautClass, TautError> {
        let top_bit = 1 << (self.g - 1);
        if self.terms.keys().any(|m| m & top_bit != 0) {
            return Err(TautError::IndexOutOfRange {
                index: self.g as usize,
                genus: self.g - 1,
            });
        }
        Ok(TautClass {
            g: self.g - 1,
            terms: self.terms.clone(),
        })
    }
}

impl fmt::Display for TautClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if first {
                first = false;
            } else {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            for i in 1..=self.g {
                if m & (1 << (i - 1)) != 0 {
                    write!(f, "*L{i}")?;
                }
            }
        }
        Ok(())
    }
}

/// A formal polynomial in `λ_1..λ_g` with arbitrary exponents, the input
/// side of `reduce`.
#[derive(Debug, Clone)]
pub struct LambdaExpr {
    g: u32,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl LambdaExpr {
    pub fn new(g: u32) -> Self {
        LambdaExpr {
            g,
            terms: BTreeMap::new(),
        }
    }

    /// Adds `coeff * λ_1^{exps[0]} .. λ_g^{exps[g-1]}`.
    pub fn push(&mut self, coeff: Rat, exps: Vec<u32>) -> Result<(), TautError> {
        if exps.len() > self.g as usize {
            return Err(TautError::IndexOutOfRange {
                index: exps.len(),
                genus: self.g,
            });
        }
        let mut key = exps;
        key.resize(self.g as usize, 0);
        if coeff.is_zero() {
            return Ok(());
        }
        let entry = self.terms.entry(key).or_insert_with(Rat::zero);
        *entry += coeff;
        Ok(())
    }

    /// Convenience: a single power `λ_i^e`.
    pub fn power(g: u32, i: u32, e: u32) -> Result<Self, TautError> {
        if i == 0 || i > g {
            return Err(TautError::IndexOutOfRange {
                index: i as usize,
                genus: g,
            });
        }
        let mut expr = LambdaExpr::new(g);
        let mut exps = vec![0u32; g as usize];
        exps[(i - 1) as usize] = e;
        expr.push(Rat::from_integer(1.into()), exps)?;
        Ok(expr)
    }
}

/// Precomputed expansions of the squares `λ_i^2` in the square-free basis.
///
/// The rule for `λ_i^2` is `2 Σ_{k=1}^{i} (-1)^{k-1} λ_{i-k} λ_{i+k}` with
/// `λ_0 = 1` and `λ_j = 0` for `j > g`, read off from the degree-2i
/// component of the defining relation.
#[derive(Debug, Clone)]
pub struct RewriteTable {
    g: u32,
    square_rules: Vec<TautClass>,
}

impl RewriteTable {
    pub fn new(g: u32) -> Self {
        let mut square_rules = Vec::with_capacity(g as usize);
        for i in 1..=g {
            let mut rule = TautClass::zero(g);
            for k in 1..=i {
                let hi = i + k;
                if hi > g {
                    continue;
                }
                let mut mask: Mask = 1 << (hi - 1);
                if i > k {
                    mask |= 1 << (i - k - 1);
                }
                let sign = if k % 2 == 1 { 2 } else { -2 };
                rule.insert(mask, Rat::from_integer(sign.into()));
            }
            square_rules.push(rule);
        }
        RewriteTable { g, square_rules }
    }

    pub fn genus(&self) -> u32 {
        self.g
    }

    /// The expansion of `λ_i^2`.
    pub fn square_rule(&self, i: u32) -> &TautClass {
        &self.square_rules[(i - 1) as usize]
    }
}

/// Reduces a formal λ-polynomial to the square-free basis of `R_g`.
pub fn reduce(g: u32, expr: &LambdaExpr) -> Result<TautClass, TautError> {
    reduce_with_order(g, expr, RewriteOrder::LowestIndexFirst)
}

/// Reduction with an explicit rewrite order; the result must not depend on
/// the order (tested, not assumed — see the confluence tests).
pub fn reduce_with_order(
    g: u32,
    expr: &LambdaExpr,
    order: RewriteOrder,
) -> Result<TautClass, TautError> {
    if expr.g != g {
        return Err(TautError::GenusMismatch(expr.g, g));
    }
    reduce_expr(expr, order)
}

fn reduce_expr(expr: &LambdaExpr, order: RewriteOrder) -> Result<TautClass, TautError> {
    let g = expr.g;
    let table = RewriteTable::new(g);
    let mut out = TautClass::zero(g);
    // Worklist keyed by exponent vector; coefficients merge as they meet,
    // which keeps the intermediate expression small.
    let mut work: BTreeMap<Vec<u32>, Rat> = expr.terms.clone();
    while let Some((exps, coeff)) = pop_term(&mut work) {
        if coeff.is_zero() {
            continue;
        }
        let square_at = find_square(&exps, order);
        match square_at {
            None => {
                let mut mask: Mask = 0;
                for (idx, e) in exps.iter().enumerate() {
                    if *e == 1 {
                        mask |= 1 << idx;
                    }
                }
                out.insert(mask, coeff);
            }
            Some(idx) => {
                let i = idx as u32 + 1;
                let mut rest = exps.clone();
                rest[idx] -= 2;
                for (rule_mask, rule_coeff) in table.square_rule(i).terms() {
                    let mut next = rest.clone();
                    for j in 0..g {
                        if rule_mask & (1 << j) != 0 {
                            next[j as usize] += 1;
                        }
                    }
                    let c = &coeff * rule_coeff;
                    // Zero coefficients are skipped when popped.
                    let entry = work.entry(next).or_insert_with(Rat::zero);
                    *entry += c;
                }
            }
        }
    }
    Ok(out)
}

fn pop_term(work: &mut BTreeMap<Vec<u32>, Rat>) -> Option<(Vec<u32>, Rat)> {
    let key = work.keys().next().cloned()?;
    let coeff = work.remove(&key)?;
    Some((key, coeff))
}

fn find_square(exps: &[u32], order: RewriteOrder) -> Option<usize> {
    match order {
        RewriteOrder::LowestIndexFirst => exps.iter().position(|e| *e >= 2),
        RewriteOrder::HighestIndexFirst => exps.iter().rposition(|e| *e >= 2),
    }
}

/// The Gorenstein pairing matrix of `R_g` between degrees `n` and
/// `top - n`, with entries `socle_degree(a*b)`.
pub fn pairing_matrix(g: u32, n: u32) -> Result<Vec<Vec<Rat>>, TautError> {
    let top = socle_codim(g);
    if n > top {
        return Err(TautError::WrongDegree { expected: top });
    }
    let rows = basis_of_degree(g, n);
    let cols = basis_of_degree(g, top - n);
    let mut matrix = Vec::with_capacity(rows.len());
    for r in &rows {
        let a = TautClass::monomial(g, *r, Rat::from_integer(1.into()));
        let mut row = Vec::with_capacity(cols.len());
        for c in &cols {
            let b = TautClass::monomial(g, *c, Rat::from_integer(1.into()));
            let prod = a.mul(&b)?;
            // Products of complementary-degree monomials are honest
            // top-degree classes, so the socle pairing applies.
            row.push(prod.socle_degree()?);
        }
        matrix.push(row);
    }
    Ok(matrix)
}

/// Rank of a rational matrix by Gaussian elimination.
#[allow(clippy::needless_range_loop)] // reads the pivot row while writing others
pub fn matrix_rank(mut m: Vec<Vec<Rat>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        let Some(pivot) = (row..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, pivot);
        let inv = m[row][col].clone().recip();
        for c in col..cols {
            m[row][c] = &m[row][c] * &inv;
        }
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..cols {
                    let sub = &m[row][c] * &factor;
                    m[r][c] = &m[r][c] - &sub;
                }
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// Checks that every graded piece of the Gorenstein pairing of `R_g` is
/// square and nonsingular.
pub fn gorenstein_nonsingular(g: u32) -> Result<bool, TautError> {
    let top = socle_codim(g);
    for n in 0..=top {
        let m = pairing_matrix(g, n)?;
        let rows = m.len();
        let cols = m.first().map_or(0, Vec::len);
        if rows != cols || matrix_rank(m) != rows {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::{rat, rint};
    use proptest::prelude::*;

    fn lam(g: u32, i: u32) -> TautClass {
        TautClass::lambda(g, i).unwrap()
    }

    #[test]
    fn basis_count_is_two_to_g() {
        for g in 1..=6 {
            let count: usize = (0..=socle_codim(g))
                .map(|d| basis_of_degree(g, d).len())
                .sum();
            assert_eq!(count, 1 << g);
        }
    }

    #[test]
    fn square_rules_match_hand_expansion() {
        // λ1^2 = 2λ2 in R_2.
        let r2 = RewriteTable::new(2);
        assert_eq!(r2.square_rule(1), &lam(2, 2).scale(&rint(2)));
        // λ2^2 = 2λ1λ3 - 2λ4 in R_4, the degree-4 component of the
        // defining relation expanded by hand.
        let r4 = RewriteTable::new(4);
        let expected = TautClass::monomial(4, 0b101, rint(2))
            .add(&TautClass::monomial(4, 0b1000, rint(-2)))
            .unwrap();
        assert_eq!(r4.square_rule(2), &expected);
        // λ3^2 = 0 in R_3: every product in the rule overflows the genus.
        let r3 = RewriteTable::new(3);
        assert!(r3.square_rule(3).is_zero());
    }

    #[test]
    fn reduce_examples() {
        // g=2: λ1^2 -> 2λ2.
        let e = LambdaExpr::power(2, 1, 2).unwrap();
        assert_eq!(reduce(2, &e).unwrap(), lam(2, 2).scale(&rint(2)));

        // g=4: λ2^2 -> 2λ1λ3 - 2λ4.
        let e = LambdaExpr::power(4, 2, 2).unwrap();
        let expected = TautClass::monomial(4, 0b101, rint(2))
            .add(&TautClass::monomial(4, 0b1000, rint(-2)))
            .unwrap();
        assert_eq!(reduce(4, &e).unwrap(), expected);

        // g=3: λ1^4 -> 8λ1λ3 (λ4 = 0 there).
        let e = LambdaExpr::power(3, 1, 4).unwrap();
        assert_eq!(
            reduce(3, &e).unwrap(),
            TautClass::monomial(3, 0b101, rint(8))
        );

        // Index out of range is rejected.
        assert!(LambdaExpr::power(3, 4, 1).is_err());
    }

    #[test]
    fn mul_examples() {
        // λ1 * λ1 = 2λ2 in R_2.
        let prod = lam(2, 1).mul(&lam(2, 1)).unwrap();
        assert_eq!(prod, lam(2, 2).scale(&rint(2)));

        // λ1λ2λ3 * λ4 = λ1λ2λ3λ4 in R_4.
        let abc = TautClass::monomial(4, 0b0111, rint(1));
        let prod = abc.mul(&lam(4, 4)).unwrap();
        assert_eq!(prod, TautClass::monomial(4, 0b1111, rint(1)));

        // Genus mismatch is an error.
        assert!(lam(2, 1).mul(&lam(3, 1)).is_err());
    }

    #[test]
    fn prop_14_1_identity_in_open_quotient() {
        // λ3λ1 * λ1^2 vs (1/8) λ1^4 * λ1^2 agree in R_4/(λ4).
        let l31 = TautClass::monomial(4, 0b101, rint(1));
        let l1sq = reduce(4, &LambdaExpr::power(4, 1, 2).unwrap()).unwrap();
        let lhs = l31.mul(&l1sq).unwrap().quotient_open();
        let l1_6 = reduce(4, &LambdaExpr::power(4, 1, 6).unwrap()).unwrap();
        let rhs = l1_6.scale(&rat(1, 8)).quotient_open();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn socle_degree_examples() {
        // deg(λ1λ2λ3) = v(3).
        let c = TautClass::monomial(3, 0b111, rint(1));
        assert_eq!(c.socle_degree().unwrap(), rat(1, 2903040));

        // Zero class pairs to zero.
        assert_eq!(TautClass::zero(4).socle_degree().unwrap(), rint(0));

        // λ1^6 in R_3 reduces to 16 λ1λ2λ3, so its degree is 16 v(3);
        // both rewrite orders must agree on it.
        let e = LambdaExpr::power(3, 1, 6).unwrap();
        let lo = reduce_with_order(3, &e, RewriteOrder::LowestIndexFirst).unwrap();
        let hi = reduce_with_order(3, &e, RewriteOrder::HighestIndexFirst).unwrap();
        assert_eq!(lo, hi);
        assert_eq!(lo.socle_degree().unwrap(), rat(16, 2903040));
        assert_eq!(lo.socle_degree().unwrap(), rat(1, 181440));

        // Wrong degree is rejected.
        assert!(lam(3, 1).socle_degree().is_err());
    }

    #[test]
    fn quotient_examples() {
        let full = TautClass::monomial(4, 0b1111, rint(1));
        assert!(full.quotient_open().is_zero());

        let l31 = TautClass::monomial(4, 0b101, rint(1));
        assert_eq!(l31.quotient_open(), l31);

        // reduce(λ1^4) = 8λ1λ3 - 8λ4 in R_4; the quotient keeps 8λ1λ3.
        let e = LambdaExpr::power(4, 1, 4).unwrap();
        let red = reduce(4, &e).unwrap();
        let expected = TautClass::monomial(4, 0b101, rint(8))
            .add(&TautClass::monomial(4, 0b1000, rint(-8)))
            .unwrap();
        assert_eq!(red, expected);
        assert_eq!(
            red.quotient_open(),
            TautClass::monomial(4, 0b101, rint(8))
        );
    }

    #[test]
    fn gorenstein_pairing_small_genera() {
        for g in 1..=4 {
            assert!(gorenstein_nonsingular(g).unwrap(), "genus {g}");
        }
    }

    fn arb_expr(g: u32) -> impl Strategy<Value = LambdaExpr> {
        let max_exp = 3u32;
        prop::collection::vec(
            (
                -6i64..=6,
                prop::collection::vec(0..=max_exp, g as usize),
            ),
            1..5,
        )
        .prop_map(move |terms| {
            let mut expr = LambdaExpr::new(g);
            for (c, exps) in terms {
                expr.push(rint(c), exps).unwrap();
            }
            expr
        })
    }

    fn arb_class(g: u32) -> impl Strategy<Value = TautClass> {
        arb_expr(g).prop_map(move |e| reduce(g, &e).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

        #[test]
        fn confluence_under_rewrite_order(e in (1u32..=5).prop_flat_map(arb_expr)) {
            let lo = reduce_with_order(e.g, &e, RewriteOrder::LowestIndexFirst).unwrap();
            let hi = reduce_with_order(e.g, &e, RewriteOrder::HighestIndexFirst).unwrap();
            prop_assert_eq!(lo, hi);
        }

        #[test]
        fn associativity(
            (a, b, c) in (1u32..=5).prop_flat_map(|g| (arb_class(g), arb_class(g), arb_class(g))),
        ) {
            let left = a.mul(&b).unwrap().mul(&c).unwrap();
            let right = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn commutativity_and_bilinearity(
            (a, b, c) in (1u32..=5).prop_flat_map(|g| (arb_class(g), arb_class(g), arb_class(g))),
        ) {
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
            let lhs = a.add(&b).unwrap().mul(&c).unwrap();
            let rhs = a.mul(&c).unwrap().add(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn quotient_open_is_ring_hom(
            (a, b) in (2u32..=5).prop_flat_map(|g| (arb_class(g), arb_class(g))),
        ) {
            let lhs = a.mul(&b).unwrap().quotient_open().to_lower_genus().unwrap();
            let rhs = a
                .quotient_open()
                .to_lower_genus()
                .unwrap()
                .mul(&b.quotient_open().to_lower_genus().unwrap())
                .unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
