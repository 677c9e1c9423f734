mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use frametk::fixtures::{self, Ambient};
use frametk::gabor::half_lattice_reference;
use frametk::group::{FgaGroup, GroupPoint, IndexedFamilyMap, ReferenceSystem};
use frametk::linalg::{bessel_bound, Label, VectorFamily};
use frametk::localization::*;
use frametk::{CMatrix, Complex64, Error};
use proptest::prelude::*;

fn pt(c: &[i64]) -> GroupPoint {
    GroupPoint::new(c.to_vec())
}

fn identity_map(amb: &Ambient) -> IndexedFamilyMap {
    IndexedFamilyMap::on_integers(amb.indices().iter().copied(), |i| i)
}

/// `f_i = sum_m 2^{-|m - i|} e_m` inside the ambient window.
fn geometric_translates(amb: &Ambient, idx: &[i64]) -> VectorFamily {
    let terms: Vec<Vec<(i64, Complex64)>> = idx
        .iter()
        .map(|&i| amb.indices().iter().map(|&m| (m, Complex64::from(0.5f64.powi((m - i).abs() as i32)))).collect())
        .collect();
    amb.combinations(&terms, idx.iter().map(|&i| Label::from(i)).collect()).unwrap()
}

#[test]
fn orthonormal_identity_envelope_is_a_point_mass() {
    let amb = Ambient::range(-20, 20);
    let g = fixtures::natural_reference(&amb);
    let rep = envelope_from_map(&amb.full_basis(), &identity_map(&amb), &g, 1).unwrap();
    assert_eq!(rep.envelope.support(), vec![pt(&[0])]);
    assert_eq!(rep.envelope.get(&pt(&[0])), 1.0);
    assert!(rep.minimal);
    for r in 1..5 {
        assert_eq!(rep.envelope.tail(r), 0.0);
    }
    assert_eq!(rep.p_summable_verdict, Verdict::Supported);
    let selfrep = self_localization_check(&g, 1).unwrap();
    assert_eq!(selfrep.envelope.support(), vec![pt(&[0])]);
}

#[test]
fn t4_is_not_localized_along_a_line() {
    let amb = Ambient::range(-1024, 1024);
    let g = fixtures::natural_reference(&amb);
    let ns: Vec<i64> = (-512..=512).collect();
    let f = fixtures::t4_family(&amb, &ns).unwrap();
    let map = IndexedFamilyMap::on_integers(ns.iter().copied(), |n| n);
    let rep = envelope_from_map(&f, &map, &g, 1).unwrap();
    let ones = rep.envelope.values.values().filter(|v| **v >= 1.0).count();
    assert!(ones > 500, "{ones} offsets carry a unit coefficient");
    assert_eq!(rep.p_summable_verdict, Verdict::Unsupported, "{}", rep.diagnostics);
}

#[test]
fn t4_is_localized_on_the_plane() {
    let (amb, g) = fixtures::z2_reference(512);
    let ns: Vec<i64> = (-256..=256).filter(|&n| n != 0).collect();
    let f = fixtures::t4_family(&amb, &ns).unwrap();
    let rep = envelope_from_map(&f, &fixtures::t4_map(&ns), &g, 1).unwrap();
    let support: BTreeSet<_> = rep.envelope.support().into_iter().collect();
    assert_eq!(support, [pt(&[0, 0]), pt(&[0, 1])].into_iter().collect());
    assert_eq!(rep.p_summable_verdict, Verdict::Supported, "{}", rep.diagnostics);
    let (_, free) = envelope_index_free(&f, &g, 1).unwrap();
    assert_eq!(free.envelope.support().len(), 2);
    assert_eq!(free.envelope.get(&pt(&[0, 0])), 1.0);
    assert_eq!(free.envelope.get(&pt(&[0, 1])), 1.0);
}

#[test]
fn index_free_single_vector() {
    let amb = Ambient::range(-10, 10);
    let g = fixtures::natural_reference(&amb);
    let (centres, rep) = envelope_index_free(&amb.basis(&[5]).unwrap(), &g, 1).unwrap();
    assert_eq!(centres.centers, vec![(Label::from(5i64), pt(&[5]))]);
    assert_eq!(rep.envelope.support(), vec![pt(&[0])]);
}

#[test]
fn index_free_ties_go_to_the_smallest_point() {
    let amb = Ambient::range(-10, 10);
    let g = fixtures::natural_reference(&amb);
    let f = amb
        .combinations(&[vec![(3, c(1.0, 0.0)), (-2, c(0.0, 1.0))]], vec![Label::from("f")])
        .unwrap();
    let (centres, rep) = envelope_index_free(&f, &g, 1).unwrap();
    assert_eq!(centres.centers[0].1, pt(&[-2]));
    assert_eq!(rep.envelope.support(), vec![pt(&[0]), pt(&[5])]);
}

#[test]
fn index_free_translates_recover_the_profile() {
    let amb = Ambient::range(-60, 60);
    let g = fixtures::natural_reference(&amb);
    let idx: Vec<i64> = (-20..=20).collect();
    let f = geometric_translates(&amb, &idx);
    let (centres, rep) = envelope_index_free(&f, &g, 1).unwrap();
    for (l, p) in &centres.centers {
        assert_eq!(p.coords[0].to_string(), l.0);
    }
    for k in -40..=40 {
        assert!((rep.envelope.get(&pt(&[k])) - 0.5f64.powi(k.abs() as i32)).abs() < 1e-15, "k = {k}");
    }
}

#[test]
fn index_free_rejects_a_null_row() {
    let amb = Ambient::range(-3, 3);
    let g = fixtures::natural_reference(&amb);
    let f = VectorFamily::from_matrix(CMatrix::zeros(7, 1)).unwrap();
    assert!(matches!(envelope_index_free(&f, &g, 1), Err(Error::ZeroVector(_))));
}

#[test]
fn exactly_localized_family_has_no_tail() {
    let amb = Ambient::range(-16, 16);
    let g = fixtures::natural_reference(&amb);
    let tails = tail_operator_norms(&amb.full_basis(), &identity_map(&amb), &g, &[0, 1, 2, 5]).unwrap();
    assert!(tails.iter().all(|t| t.norm == 0.0 && t.fiber_bound == 1));
}

#[test]
fn geometric_tail_meets_its_schur_bound() {
    let amb = Ambient::range(-48, 48);
    let g = fixtures::natural_reference(&amb);
    let idx: Vec<i64> = (-24..=24).collect();
    let f = geometric_translates(&amb, &idx);
    let map = IndexedFamilyMap::on_integers(idx.iter().copied(), |i| i);
    for t in tail_operator_norms(&f, &map, &g, &(0..12).collect::<Vec<_>>()).unwrap() {
        let frozen = 2f64.powi(1 - t.radius as i32);
        assert!(t.schur_bound <= frozen + 1e-12);
        assert!(t.norm <= t.schur_bound + 1e-12, "R = {}: {} > {}", t.radius, t.norm, t.schur_bound);
    }
}

#[test]
fn truncation_extremes() {
    let s = fixtures::localized_system(5, 16, 3, 0.4);
    let dual = &s.reference.family;
    let full = truncate_family(&s.family, &s.map, &s.reference, dual, 1000).unwrap();
    assert!(analysis_gap_norm(&s.family, &full).unwrap() < 1e-9);
    let t0 = truncate_family(&s.family, &s.map, &s.reference, dual, 0).unwrap();
    let amb = Ambient::range(-19, 19);
    for (j, l) in s.family.labels().iter().enumerate() {
        let i: i64 = l.0.parse().unwrap();
        let row = amb.row(i).unwrap();
        for r in 0..t0.dimension() {
            let want = if r == row { s.family.matrix()[(r, j)] } else { Complex64::from(0.0) };
            assert_eq!(t0.matrix()[(r, j)], want);
        }
    }
    assert_eq!(analysis_gap_norm(&s.family, &s.family).unwrap(), 0.0);
}

#[test]
fn truncation_rejects_a_bad_dual() {
    let s = fixtures::localized_system(5, 8, 2, 0.4);
    let bad = s.reference.family.scaled(Complex64::from(0.5));
    assert!(matches!(
        truncate_family(&s.family, &s.map, &s.reference, &bad, 2),
        Err(Error::InvalidDual { .. })
    ));
    let other = VectorFamily::from_matrix(CMatrix::identity(3, 2)).unwrap();
    assert!(matches!(analysis_gap_norm(&s.family, &other), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn truncation_meets_the_per_vector_threshold() {
    // With decay q and band b, ||f_i - f_iQ||^2 = sum_{Q < |k| <= b} |c_ik|^2 <= 2 sum_{k > Q} q^{2k}.
    let (q, band) = (0.3, 8);
    let s = fixtures::localized_system(11, 32, band, q);
    let tr = Truncator::new(&s.family, &s.map, &s.reference, &s.reference.family).unwrap();
    for r in 0..band as u64 {
        let t = tr.truncate(r).unwrap();
        let bound = (2.0 * (r as i32 + 1..=band as i32).map(|k| q.powi(2 * k)).sum::<f64>()).sqrt();
        for j in 0..t.len() {
            let d = (s.family.vector(j) - t.vector(j)).norm();
            assert!(d <= bound + 1e-12, "R = {r}: {d} > {bound}");
        }
    }
}

#[test]
fn gabor_reference_is_self_localized() {
    let g = half_lattice_reference(64, 4).unwrap();
    let rep = self_localization_check(&g, 1).unwrap();
    assert_eq!(rep.p_summable_verdict, Verdict::Supported, "{}", rep.diagnostics);
    let shells = &rep.decay.shell_maxima;
    assert!(shells[shells.len() - 1] < 1e-3 * shells[0], "{shells:?}");
}

#[test]
fn dense_random_family_is_not_self_localized() {
    let mut r = rng(4);
    let n = 256;
    let fam = random_family(&mut r, n, n);
    let pts = (0..n as i64).map(|i| pt(&[i - n as i64 / 2])).collect();
    let g = ReferenceSystem::new(FgaGroup::lattice(1), fam, pts).unwrap();
    let rep = self_localization_check(&g, 1).unwrap();
    assert_eq!(rep.p_summable_verdict, Verdict::Unsupported, "{}", rep.diagnostics);
}

#[test]
fn bounded_shift_keeps_a_widened_envelope_valid() {
    let s = fixtures::localized_system(2, 40, 5, 0.5);
    let env = envelope_from_map(&s.family, &s.map, &s.reference, 1).unwrap().envelope;
    let shift = 3;
    let b = IndexedFamilyMap::on_integers(-40..=40, |i| i + if i % 2 == 0 { shift } else { -shift });
    let widened = |k: i64| (-shift..=shift).map(|t| env.get(&pt(&[k - t]))).fold(0.0, f64::max);
    let coeffs = frametk::linalg::cross_coefficients(&s.family, &s.reference.family).unwrap();
    for (i, l) in s.family.labels().iter().enumerate() {
        let bi = b.point(l).unwrap().coords[0];
        for (n, p) in s.reference.points.iter().enumerate() {
            assert!(coeffs[(i, n)].norm() <= widened(bi - p.coords[0]) + 1e-15);
        }
    }
}

#[test]
fn envelope_exports() {
    let amb = Ambient::range(-4, 4);
    let idx: Vec<i64> = (-2..=2).collect();
    let rep = envelope_from_map(
        &geometric_translates(&amb, &idx),
        &IndexedFamilyMap::on_integers(idx.iter().copied(), |i| i),
        &fixtures::natural_reference(&amb),
        2,
    )
    .unwrap();
    let csv = frametk::io::envelope_to_csv(&rep.envelope).unwrap();
    assert_eq!(csv.lines().next(), Some("k_0,value"));
    assert_eq!(csv.lines().count(), 1 + rep.envelope.values.len());
    let back: LocalizationReport = serde_json::from_str(&frametk::io::to_json(&rep).unwrap()).unwrap();
    assert_eq!(back, rep);
}

#[test]
fn envelope_tail_sums_by_hand() {
    let values: BTreeMap<GroupPoint, f64> = [(pt(&[0]), 1.0), (pt(&[-1]), 0.5), (pt(&[2]), 0.25), (pt(&[3]), 0.0)].into();
    let env = Envelope::new(FgaGroup::lattice(1), values, 1);
    assert_eq!(env.tail_sums, vec![0.75, 0.25, 0.0]);
    assert_eq!(env.reach(), 2);
    assert_eq!(env.norm_p(), 1.75);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn envelope_dominates_and_tails_shrink(seed in 0u64..10_000, band in 1i64..6, decay in 0.1f64..0.9) {
        let s = fixtures::localized_system(seed, 12, band, decay);
        let rep = envelope_from_map(&s.family, &s.map, &s.reference, 1).unwrap();
        let coeffs = frametk::linalg::cross_coefficients(&s.family, &s.reference.family).unwrap();
        for (i, l) in s.family.labels().iter().enumerate() {
            let ai = s.map.point(l).unwrap().coords[0];
            for (n, p) in s.reference.points.iter().enumerate() {
                prop_assert!(coeffs[(i, n)].norm() <= rep.envelope.get(&pt(&[ai - p.coords[0]])));
            }
        }
        prop_assert!(rep.envelope.tail_sums.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(rep.envelope.values.values().all(|v| *v >= 0.0));
    }

    #[test]
    fn schur_and_gap_chain(seed in 0u64..10_000, band in 1i64..6, decay in 0.1f64..0.9) {
        let s = fixtures::localized_system(seed, 10, band, decay);
        let dual = &s.reference.family;
        let radii: Vec<u64> = (0..=band as u64 + 1).collect();
        let tails = tail_operator_norms(&s.family, &s.map, &s.reference, &radii).unwrap();
        let tr = Truncator::new(&s.family, &s.map, &s.reference, dual).unwrap();
        let dual_bessel = bessel_bound(dual).unwrap().sqrt();
        let mut last = f64::INFINITY;
        for t in &tails {
            prop_assert!(t.norm <= t.schur_bound * (1.0 + 1e-12) + 1e-12);
            let gap = tr.gap(t.radius).unwrap();
            prop_assert!(gap <= t.norm * dual_bessel * (1.0 + 1e-9) + 1e-12);
            prop_assert!(gap <= last * (1.0 + 1e-9) + 1e-12);
            last = gap;
        }
    }
}
