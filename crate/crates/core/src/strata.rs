//! Closed-form stratum data: supersingular cycle classes, component
//! counts, Ekedahl–Oort classes, superspecial masses, and the counting
//! consistency identities for genus 3 and 4.
//!
//! Counts are kept in the stacky (mass) normalization throughout, i.e.
//! each object is weighted by the inverse of its automorphism group.

use crate::exactpoly::{proportionality_v, ExactError, FactoredPPoly, PPoly, Rat, RatFn};
use crate::tautring::TautClass;
use num_traits::One;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrataError {
    #[error("genus {0} out of range for this formula")]
    GenusOutOfRange(u32),
    #[error("p-rank {f} out of range for genus {g}")]
    PRankOutOfRange { g: u32, f: u32 },
    #[error("genus must be even, got {0}")]
    GenusNotEven(u32),
    #[error("counting identity '{0}' failed to expand equal; this signals an implementation bug")]
    IdentityFailed(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A stratum class: a factored polynomial coefficient in `p` times a
/// single square-free λ-monomial.
#[derive(Debug, Clone)]
pub struct StratumClass {
    pub g: u32,
    pub coefficient: FactoredPPoly,
    pub monomial: TautClass,
}

impl StratumClass {
    /// Codimension of the stratum, i.e. the degree of the monomial.
    pub fn codim(&self) -> u32 {
        self.monomial
            .terms()
            .map(|(m, _)| crate::tautring::mask_degree(m))
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for StratumClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} * {}", self.coefficient, self.monomial)
    }
}

/// A named pair of factored polynomials claimed equal after expansion.
#[derive(Debug, Clone)]
pub struct CountIdentity {
    pub name: String,
    pub lhs: FactoredPPoly,
    pub rhs: FactoredPPoly,
}

impl CountIdentity {
    pub fn holds(&self) -> bool {
        self.lhs.expand() == self.rhs.expand()
    }

    pub fn holds_at(&self, p0: i64) -> bool {
        self.lhs.eval_int(p0) == self.rhs.eval_int(p0)
    }
}

fn single_monomial(g: u32, indices: &[u32]) -> TautClass {
    let mut mask = 0u32;
    for i in indices {
        mask |= 1 << (i - 1);
    }
    TautClass::monomial(g, mask, Rat::one())
}

/// The monomial carrying the supersingular class:
/// `λ_g λ_{g-2} .. λ_1` for odd `g`, `λ_g λ_{g-2} .. λ_2` for even `g`.
pub fn ss_class_shape(g: u32) -> Result<TautClass, StrataError> {
    if g == 0 {
        return Err(StrataError::GenusOutOfRange(g));
    }
    let indices: Vec<u32> = (1..=g).rev().step_by(2).collect();
    Ok(single_monomial(g, &indices))
}

/// The supersingular cycle class for `g <= 4`.
///
/// The coefficient is only known in closed form up to genus 4; larger
/// genera are deliberately rejected rather than extrapolated.
pub fn ss_class(g: u32) -> Result<StratumClass, StrataError> {
    let coefficient = match g {
        1 => FactoredPPoly::one().with_factor(PPoly::p_power_plus(1, -1), 1),
        2 => FactoredPPoly::one()
            .with_factor(PPoly::p_power_plus(1, -1), 1)
            .with_factor(PPoly::p_power_plus(2, -1), 1),
        3 => FactoredPPoly::one()
            .with_factor(PPoly::p_power_plus(1, -1), 2)
            .with_factor(PPoly::p_power_plus(3, -1), 1)
            .with_factor(PPoly::p_power_plus(4, -1), 1),
        4 => FactoredPPoly::one()
            .with_factor(PPoly::p_power_plus(1, -1), 3)
            .with_factor(PPoly::p_power_plus(3, -1), 1)
            .with_factor(PPoly::p_power_plus(4, -1), 1)
            .with_factor(PPoly::p_power_plus(6, -1), 1),
        _ => return Err(StrataError::GenusOutOfRange(g)),
    };
    Ok(StratumClass {
        g,
        coefficient,
        monomial: ss_class_shape(g)?,
    })
}

/// Class of the closed locus of p-rank at most `f`:
/// `(p-1)(p^2-1)..(p^{g-f}-1) λ_{g-f}`.
pub fn eo_prank_class(g: u32, f: u32) -> Result<StratumClass, StrataError> {
    if g == 0 || f > g {
        return Err(StrataError::PRankOutOfRange { g, f });
    }
    let codim = g - f;
    let mut coefficient = FactoredPPoly::one();
    for i in 1..=codim {
        coefficient = coefficient.with_factor(PPoly::p_power_plus(i as usize, -1), 1);
    }
    let monomial = if codim == 0 {
        TautClass::one(g)
    } else {
        single_monomial(g, &[codim])
    };
    Ok(StratumClass {
        g,
        coefficient,
        monomial,
    })
}

/// Class of the closed Ekedahl–Oort stratum indexed by [3,2] on the
/// genus-3 space: `(p-1)^2 (p^6-1) λ_2 λ_3`.
pub fn eo_class_32() -> StratumClass {
    StratumClass {
        g: 3,
        coefficient: FactoredPPoly::one()
            .with_factor(PPoly::p_power_plus(1, -1), 2)
            .with_factor(PPoly::p_power_plus(6, -1), 1),
        monomial: single_monomial(3, &[2, 3]),
    }
}

fn sign_power(i: u32) -> i64 {
    if i.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Superspecial mass `(p-1)(p^2+1)..(p^g+(-1)^g) v(g)`, with `v(g)`
/// carried as the rational scalar of the factored form.
pub fn superspecial_mass(g: u32) -> FactoredPPoly {
    let mut out = FactoredPPoly::new(proportionality_v(g));
    for i in 1..=g {
        out = out.with_factor(PPoly::p_power_plus(i as usize, sign_power(i)), 1);
    }
    out
}

/// Stacky number of irreducible components of the supersingular locus:
/// the superspecial mass for odd `g`, and
/// `(p^2-1)(p^6-1)..(p^{2g-2}-1) v(g)` for even `g`.
pub fn component_count_n(g: u32) -> FactoredPPoly {
    if g % 2 == 1 {
        return superspecial_mass(g);
    }
    let mut out = FactoredPPoly::new(proportionality_v(g));
    for i in 1..=g / 2 {
        out = out.with_factor(PPoly::p_power_plus((4 * i - 2) as usize, -1), 1);
    }
    out
}

/// The even-genus correction factor
/// `(p+1)(p^3+1)..(p^{g-1}+1) / (p^2+1)(p^4+1)..(p^g+1)`
/// relating the superspecial mass to the component count.
pub fn correction_factor(g: u32) -> Result<RatFn, StrataError> {
    let (num, den) = correction_factor_parts(g)?;
    Ok(RatFn::new(num.expand(), den.expand())?)
}

/// Numerator and denominator of the correction factor in factored form.
pub fn correction_factor_parts(g: u32) -> Result<(FactoredPPoly, FactoredPPoly), StrataError> {
    if g == 0 || !g.is_multiple_of(2) {
        return Err(StrataError::GenusNotEven(g));
    }
    let mut num = FactoredPPoly::one();
    let mut den = FactoredPPoly::one();
    for i in 1..=g / 2 {
        num = num.with_factor(PPoly::p_power_plus((2 * i - 1) as usize, 1), 1);
        den = den.with_factor(PPoly::p_power_plus((2 * i) as usize, 1), 1);
    }
    Ok((num, den))
}

fn pplus(k: usize) -> PPoly {
    PPoly::p_power_plus(k, 1)
}

/// The counting consistency identities for genus 3 or 4, each verified
/// by exact expansion on construction. A failing identity is a hard
/// error: it can only mean the transcription or the expander is wrong.
pub fn consistency_identities(g: u32) -> Result<Vec<CountIdentity>, StrataError> {
    let mut identities = Vec::new();
    match g {
        3 => {
            // m_{3,2} = (p-1)(p^6-1) v(3), the stacky number of
            // components of the [3,2] stratum, derived from its class.
            let m32 = FactoredPPoly::new(proportionality_v(3))
                .with_factor(PPoly::p_power_plus(1, -1), 1)
                .with_factor(PPoly::p_power_plus(6, -1), 1);
            let superspecial = superspecial_mass(3);

            // m_{3,2} (p-1) = deg([V(3,2)] λ1): the [3,2] monomial pairs
            // against λ1 with socle coefficient 1.
            let via_class = {
                let cls = eo_class_32();
                let l1 = TautClass::lambda(3, 1).unwrap();
                let socle = cls.monomial.mul(&l1).unwrap().socle_degree().unwrap();
                cls.coefficient.scale(&socle)
            };
            identities.push(CountIdentity {
                name: "m_{3,2} (p-1) = deg([V(3,2)] l1)".into(),
                lhs: m32.clone().with_factor(PPoly::p_power_plus(1, -1), 1),
                rhs: via_class,
            });

            // Each [3,2]-component carries p^2+1 superspecial points while
            // each superspecial point lies on p^3+1 of them.
            identities.push(CountIdentity {
                name: "m_{3,2} (p^2+1) = Sigma_3 (p^3+1)".into(),
                lhs: m32.with_factor(pplus(2), 1),
                rhs: superspecial.clone().with_factor(pplus(3), 1),
            });

            // Superspecial points counted through the smooth models.
            identities.push(CountIdentity {
                name: "N_3 (p^3+1)(p^2+1) = Sigma_3 (p^2+1)(p^3+1)".into(),
                lhs: component_count_n(3)
                    .with_factor(pplus(3), 1)
                    .with_factor(pplus(2), 1),
                rhs: superspecial
                    .with_factor(pplus(2), 1)
                    .with_factor(pplus(3), 1),
            });
        }
        4 => {
            let sigma4 = superspecial_mass(4);
            let n4 = component_count_n(4);

            // Superspecial points counted through the disjoint smooth
            // models against the incidence multiplicities.
            identities.push(CountIdentity {
                name: "N_4 (p^2+1)^3(p^3+1)(p^4+1) = Sigma_4 (p+1)(p^2+1)^2(p^3+1)^2".into(),
                lhs: n4
                    .clone()
                    .with_factor(pplus(2), 3)
                    .with_factor(pplus(3), 1)
                    .with_factor(pplus(4), 1),
                rhs: sigma4
                    .clone()
                    .with_factor(pplus(1), 1)
                    .with_factor(pplus(2), 2)
                    .with_factor(pplus(3), 2),
            });

            // Rational point bookkeeping on the smooth model: it is a
            // P^1-bundle whose rational points assemble from the loci of
            // the first kind.
            let model_points = FactoredPPoly::one()
                .with_factor(pplus(2), 3)
                .with_factor(pplus(3), 1)
                .with_factor(pplus(4), 1);
            let first_kind = FactoredPPoly::one()
                .with_factor(pplus(2), 2)
                .with_factor(pplus(3), 1);
            identities.push(CountIdentity {
                name: "#F0(F_{p^2}) = (p^2+1)(p^4+1) #G0(F_{p^2})".into(),
                lhs: model_points,
                rhs: first_kind
                    .with_factor(pplus(2), 1)
                    .with_factor(pplus(4), 1),
            });

            identities.push(mass_correction_identity(4)?);
        }
        _ => return Err(StrataError::GenusOutOfRange(g)),
    }

    for identity in &identities {
        if !identity.holds() {
            return Err(StrataError::IdentityFailed(identity.name.clone()));
        }
    }
    Ok(identities)
}

/// `superspecial_mass(g) * correction_factor(g) = N_g`, cleared of
/// denominators, for even `g`.
pub fn mass_correction_identity(g: u32) -> Result<CountIdentity, StrataError> {
    let (num, den) = correction_factor_parts(g)?;
    Ok(CountIdentity {
        name: format!("Sigma_{g} * correction = N_{g}"),
        lhs: superspecial_mass(g).mul(&num),
        rhs: component_count_n(g).mul(&den),
    })
}
