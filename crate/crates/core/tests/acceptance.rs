//! Acceptance suite: one test per release criterion, each printing a
//! single pass/fail line. Everything is exact arithmetic; the only
//! tolerances are the stated runtime ceilings.

use std::time::{Duration, Instant};
use supersing_core::dieudonne::{
    newton_slopes, random_gamma, ss_criterion_check, verify_eq4, WittCtx,
};
use supersing_core::exactpoly::{proportionality_v, rat, PPoly};
use supersing_core::finitefield::{
    count_f2_surface, count_fermat_curve, count_g1_surface, count_isotropic,
    jacobian_rank_samples, FormKind,
};
use supersing_core::flagcalc;
use supersing_core::strata;
use supersing_core::tautring;

struct Criterion {
    name: &'static str,
    started: Instant,
    limit: Duration,
}

impl Criterion {
    fn start(name: &'static str, limit: Duration) -> Criterion {
        Criterion {
            name,
            started: Instant::now(),
            limit,
        }
    }

    fn finish(self) {
        let elapsed = self.started.elapsed();
        assert!(
            elapsed < self.limit,
            "{}: over the runtime ceiling ({elapsed:?} >= {:?})",
            self.name,
            self.limit
        );
        println!("ACCEPTANCE {}: pass ({elapsed:?})", self.name);
    }
}

#[test]
fn criterion_1_f4_identity() {
    let c = Criterion::start("1 f4 identity", Duration::from_secs(1));
    let system = flagcalc::relation_system_g4();
    let solved = flagcalc::solve_g4(&system).expect("unique solution");
    let expected = flagcalc::expected_degrees();
    for (got, want) in solved.iter().zip(&expected) {
        assert_eq!(got.to_poly().as_ref(), Some(want));
    }
    let derivation = flagcalc::f4().expect("derivation");
    assert!(derivation.matches_closed_form);
    assert_eq!(derivation.f4, flagcalc::f4_closed_form().expand());
    c.finish();
}

#[test]
fn criterion_2_f3_identity() {
    let c = Criterion::start("2 f3 identity", Duration::from_secs(1));
    let chain = flagcalc::g3_chain().expect("derivation");
    // ℓ0² = 0 comes from λ1² = 2λ2: the defect is a nonzero multiple of
    // ℓ0² alone, not an imposed relation.
    assert!(!chain.ell0_sq_coeff.is_zero());
    assert_eq!(
        chain.square_defect.terms().map(|(m, _)| m).collect::<Vec<_>>(),
        vec![(2, 0, 0)]
    );
    assert_eq!(
        chain.deg_lambda2.expand(),
        &PPoly::p_power_plus(1, 1) * &PPoly::p_power_plus(1, -1).pow(2)
    );
    assert_eq!(
        chain.section_self_intersection,
        PPoly::p_power_plus(1, 1).scale(&rat(-2, 1))
    );
    assert!(chain.f3_matches);
    assert_eq!(chain.f3.expand(), flagcalc::f3_closed_form().expand());
    c.finish();
}

#[test]
fn criterion_3_tautological_ring() {
    let c = Criterion::start("3 tautological ring", Duration::from_secs(10));
    for g in 1..=6u32 {
        let count: usize = (0..=tautring::socle_codim(g))
            .map(|d| tautring::basis_of_degree(g, d).len())
            .sum();
        assert_eq!(count, 1 << g, "basis of genus {g}");
    }
    for g in 1..=5u32 {
        assert!(
            tautring::gorenstein_nonsingular(g).expect("pairing computes"),
            "Gorenstein pairing singular at genus {g}"
        );
    }
    let table = [
        (0u32, rat(1, 1)),
        (1, rat(1, 24)),
        (2, rat(1, 5760)),
        (3, rat(1, 2903040)),
        (4, rat(1, 1393459200)),
    ];
    for (g, want) in table {
        assert_eq!(proportionality_v(g), want, "v({g})");
    }
    c.finish();
}

#[test]
fn criterion_4_point_counts() {
    let c = Criterion::start("4 point counts", Duration::from_secs(60));
    for (p, p3) in [(2u32, 8u64), (3, 27)] {
        let q = (p as u64) * (p as u64);
        assert_eq!(count_fermat_curve(p).unwrap(), p3 + 1);
        let f2 = count_f2_surface(p).unwrap();
        assert_eq!(f2, (q + 1) * (q * q + 1));
        assert_eq!(count_g1_surface(p).unwrap(), (q + 1) * (p3 + 1));
        assert_eq!(
            count_isotropic(FormKind::HermitianFrobP, 4, 2, p).unwrap(),
            (p as u64 + 1) * (p3 + 1)
        );
        assert_eq!(
            count_isotropic(FormKind::HermitianFrobP2, 4, 1, p).unwrap(),
            f2
        );
    }
    c.finish();
}

#[test]
fn criterion_5_counting_identities() {
    let c = Criterion::start("5 counting identities", Duration::from_secs(1));
    for g in [3u32, 4] {
        for identity in strata::consistency_identities(g).expect("identities build") {
            assert!(identity.holds(), "{}", identity.name);
        }
    }
    for g in [2u32, 4] {
        let identity = strata::mass_correction_identity(g).unwrap();
        assert!(identity.holds(), "{}", identity.name);
    }
    c.finish();
}

#[test]
fn criterion_6_jacobian_smoothness() {
    let c = Criterion::start("6 Jacobian smoothness", Duration::from_secs(30));
    for p in [2u32, 3] {
        let report = jacobian_rank_samples(p, 100, 20260810).expect("sampling runs");
        assert!(
            report.all_rank_four(),
            "p = {p}: {:?}",
            report.failures
        );
    }
    c.finish();
}

#[test]
fn criterion_7_dieudonne_properties() {
    let c = Criterion::start("7 dieudonne properties", Duration::from_secs(300));
    // Small genus: every normal-form module has all slopes 1/2.
    for g in [1u32, 2] {
        let ctx = WittCtx::new(2, 4, 2 * g + 4).unwrap();
        for seed in 0..20 {
            let form = random_gamma(&ctx, g, seed, false).unwrap();
            let profile = newton_slopes(&ctx, &form, 2).unwrap();
            assert!(profile.is_all_half(), "g={g} seed={seed}: {profile}");
            let eq4 = verify_eq4(&ctx, &form).unwrap();
            assert!(eq4.pass && eq4.residual_valuation >= 2 * g + 4 - 2 * g);
        }
    }
    // Genus 3 and 4: the sufficient criterion forces slope 1/2, and a
    // random module is rejected at least 90% of the time (threshold
    // calibrated on these exact seeds and frozen).
    for g in [3u32, 4] {
        let n = 2 * g + 4;
        let ctx = WittCtx::new(2, 4, n).unwrap();
        let mut rejected = 0u32;
        for seed in 0..50 {
            let patterned = random_gamma(&ctx, g, seed, true).unwrap();
            assert!(ss_criterion_check(&ctx, &patterned));
            let profile = newton_slopes(&ctx, &patterned, 2).unwrap();
            assert!(profile.is_all_half(), "g={g} seed={seed}: {profile}");
            let eq4 = verify_eq4(&ctx, &patterned).unwrap();
            assert!(eq4.pass && eq4.residual_valuation >= n - 2 * g);

            let generic = random_gamma(&ctx, g, 10_000 + seed, false).unwrap();
            let profile = newton_slopes(&ctx, &generic, 2).unwrap();
            if !profile.is_all_half() {
                rejected += 1;
            }
            // One-directional implication only: the criterion is
            // sufficient, never claimed necessary.
            if ss_criterion_check(&ctx, &generic) {
                assert!(profile.is_all_half());
            }
            let eq4 = verify_eq4(&ctx, &generic).unwrap();
            assert!(eq4.pass && eq4.residual_valuation >= n - 2 * g);
        }
        assert!(rejected * 10 >= 50 * 9, "g={g}: rejected {rejected}/50");
    }
    c.finish();
}

#[test]
fn criterion_8_crosscheck_finding() {
    let c = Criterion::start("8 crosscheck finding", Duration::from_secs(10));
    let report = flagcalc::crosscheck_printed_g4().expect("crosscheck runs");
    assert_eq!(report.entries.len(), 3);
    assert_eq!(report.pairs.len(), 3);
    // The acceptance condition is a definite verdict per pair: both a
    // value comparison and an ideal-membership answer. Whether the
    // pairs agree is a reported finding, not a requirement.
    for pair in &report.pairs {
        let _ = pair.values_agree;
        let _ = pair.difference_in_relation_span;
        assert!(!pair.left.is_empty() && !pair.right.is_empty());
    }
    // The membership verdict must be consistent with the values: a
    // difference inside the relation ideal forces equal values.
    for pair in &report.pairs {
        if pair.difference_in_relation_span {
            assert!(pair.values_agree);
        }
    }
    c.finish();
}
