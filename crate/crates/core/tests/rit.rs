mod common;

use std::collections::BTreeSet;

use common::*;
use frametk::fixtures::{self, Ambient};
use frametk::group::{FgaGroup, GroupBox, GroupPoint, IndexedFamilyMap, ReferenceSystem};
use frametk::linalg::{riesz_bounds, Label, VectorFamily};
use frametk::localization::Envelope;
use frametk::rit::*;
use frametk::rit::Strategy;
use frametk::{CMatrix, CVector, Complex64, Error};
use proptest::prelude::*;

fn lambda_min(f: &VectorFamily) -> f64 {
    riesz_bounds(f).unwrap().lower
}

fn unit_columns(mut m: CMatrix) -> VectorFamily {
    for mut c in m.column_iter_mut() {
        let s = c.norm();
        c /= Complex64::from(s);
    }
    VectorFamily::from_matrix(m).unwrap()
}

fn point_mass() -> Envelope {
    Envelope::new(FgaGroup::lattice(1), [(GroupPoint::new(vec![0]), 1.0)].into(), 1)
}

fn geometric_envelope(q: f64, reach: u64) -> Envelope {
    Envelope::from_fn(FgaGroup::lattice(1), reach, 1, |k| q.powi(k.coords[0].abs() as i32)).unwrap()
}

fn inputs<'a>(envelope: &'a Envelope, curve: &'a CCurve, eps: f64, delta: f64) -> ParamInputs<'a> {
    ParamInputs {
        case: ReferenceCase::RieszBasis,
        epsilon: eps,
        delta,
        c_curve: curve,
        ref_lower: 1.0,
        ref_upper: 1.0,
        u: 1.0,
        t_norm: 1.5,
        envelope,
        fiber_bound: 1,
        dims: 1,
        density_lower: 1.0,
        dual_bessel: 1.0,
        measured_gap: None,
        dual_envelope: None,
        b_prime: None,
        max_spacing: 4001,
        preferred_spacing: 1000,
        policy: BorderPolicy::Strict,
    }
}

#[test]
fn orthonormal_basis_selects_everything() {
    for eps in [0.1, 0.5, 0.9] {
        let res = finite_rit_select(&VectorFamily::standard_basis(24), &SelectorConfig::new(eps, 0.5)).unwrap();
        assert_eq!(res.positions, (0..24).collect::<Vec<_>>());
        assert!((res.achieved_lower - 1.0).abs() < 1e-12);
        assert_eq!(res.size_ratio, 1.0);
        assert!((res.t_norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn duplicated_basis_is_tight() {
    for n in [4, 16, 40] {
        let f = fixtures::duplicated_basis(n);
        for strategy in [Strategy::Barrier, Strategy::Greedy] {
            let res = finite_rit_select(&f, &SelectorConfig::new(0.5, 0.5).with_strategy(strategy)).unwrap();
            let rows: BTreeSet<usize> = res.positions.iter().map(|p| p / 2).collect();
            assert_eq!(rows.len(), res.positions.len(), "{strategy:?} picked a duplicate pair");
            assert!(res.size_ratio >= 0.25 && res.size_ratio <= 0.5 + 1.0 / (2.0 * n as f64));
            assert!((res.t_norm * res.t_norm - 2.0).abs() < 1e-12);
            assert!(lambda_min(&f.subfamily(&res.positions)) > 0.0);
        }
    }
    let f = fixtures::duplicated_basis(5);
    let frontier = pareto_frontier(&f).unwrap();
    assert!((frontier[5] - 1.0).abs() < 1e-12);
    assert!(frontier[6..].iter().all(|v| *v <= 1e-12));
}

#[test]
fn selector_is_under_the_oracle_frontier() {
    let mut r = rng(66);
    for _ in 0..30 {
        let f = unit_columns(random_matrix(&mut r, 10, 10));
        let frontier = pareto_frontier(&f).unwrap();
        for strategy in [Strategy::Barrier, Strategy::Greedy, Strategy::ExhaustiveOracle] {
            let res = match finite_rit_select(&f, &SelectorConfig::new(0.5, 0.5).with_strategy(strategy)) {
                Ok(res) => res,
                Err(Error::SelectionFailed { .. }) if strategy == Strategy::Greedy => continue,
                Err(e) => panic!("{strategy:?}: {e}"),
            };
            let lam = lambda_min(&f.subfamily(&res.positions));
            assert!(lam <= frontier[res.positions.len()] + 1e-9);
            assert!(lam >= res.certified_bound * (1.0 - 1e-9));
            assert!(res.size_ratio >= 0.5 / (res.t_norm * res.t_norm) - 1e-9);
        }
    }
}

#[test]
fn exhaustive_oracle_respects_its_cap() {
    let mut r = rng(1);
    let f = unit_columns(random_matrix(&mut r, 13, 13));
    let err = finite_rit_select(&f, &SelectorConfig::new(0.5, 0.5).with_strategy(Strategy::ExhaustiveOracle));
    assert!(matches!(err, Err(Error::InvalidParameter(_))));
}

#[test]
fn selection_failure_is_reported() {
    // Columns e_i + 0.2 e_{i+1}: the size target forces neighbours, whose Gram has lambda_min near 0.81.
    let mut m = CMatrix::zeros(9, 8);
    for i in 0..8 {
        m[(i, i)] = Complex64::from(1.0);
        m[(i + 1, i)] = Complex64::from(0.2);
    }
    let f = unit_columns(m);
    let cfg = SelectorConfig {
        c_curve: CCurve::Constant { value: 0.99 },
        ..SelectorConfig::new(0.1, 0.5)
    };
    match finite_rit_select(&f, &cfg) {
        Err(Error::SelectionFailed { best_lower, .. }) => assert!(best_lower < 0.99),
        other => panic!("expected a reported failure, got {other:?}"),
    }
    assert!(matches!(finite_rit_select(&f, &SelectorConfig::new(1.0, 0.5)), Err(Error::InvalidParameter(_))));
}

#[test]
fn normalization_examples() {
    let id = VectorFamily::standard_basis(5);
    let (s, scales) = normalize_columns(&id).unwrap();
    assert_eq!(s, id);
    assert!(scales.iter().all(|x| *x == 1.0));

    let mut r = rng(3);
    let f = unit_columns(random_matrix(&mut r, 6, 9));
    let (s, _) = normalize_columns(&f.scaled(Complex64::from(3.0))).unwrap();
    let norm = |v: &VectorFamily| frametk::linalg::bessel_bound(v).unwrap().sqrt();
    assert!((norm(&s) - norm(&f)).abs() < 1e-12);
    assert!((norm(&f.scaled(Complex64::from(3.0))) / 3.0 - norm(&s)).abs() < 1e-12);

    let mut m = random_matrix(&mut r, 6, 9);
    for j in 0..9 {
        let s = m.column(j).norm();
        let scale = 0.5 + j as f64 / 4.0;
        m.column_mut(j).scale_mut(scale / s);
    }
    let f = VectorFamily::from_matrix(m).unwrap();
    let (s, scales) = normalize_columns(&f).unwrap();
    let u = scales.iter().copied().fold(f64::INFINITY, f64::min);
    assert!((u - 0.5).abs() < 1e-12);
    assert!(norm(&s) <= norm(&f) / u + 1e-12);

    let mut z = CMatrix::identity(3, 3);
    z.column_mut(1).fill(Complex64::from(0.0));
    assert!(matches!(normalize_columns(&VectorFamily::from_matrix(z).unwrap()), Err(Error::ZeroVector(_))));
}

#[test]
fn smoothing_examples() {
    let flat = smooth_c_curve(&CCurve::Constant { value: 0.3 }, 0.05).unwrap();
    for j in 1..100 {
        assert!((flat.eval(j as f64 / 100.0) - 0.3).abs() < 1e-12);
    }
    let step = CCurve::Table { eps: vec![0.4, 0.4 + 1e-12], values: vec![0.1, 0.5] };
    let zeta = 0.2;
    let s = smooth_c_curve(&step, zeta).unwrap();
    let mut prev = 0.0;
    for j in 0..=1000 {
        let e = j as f64 / 1000.0;
        let v = s.eval(e);
        assert!(v >= prev - 1e-12);
        if j > 0 {
            assert!(v - prev <= 0.4 / zeta * 1e-3 + 1e-2, "jump {} at {e}", v - prev);
        }
        assert!(v <= step.eval(e) + 1e-12);
        prev = v;
    }
    smooth_c_curve(&CCurve::Barrier, 0.1).unwrap().validate(1000).unwrap();
    assert!(matches!(smooth_c_curve(&CCurve::Barrier, 0.0), Err(Error::InvalidParameter(_))));
}

#[test]
fn parameter_examples() {
    let curve = CCurve::Constant { value: 0.5 };
    let env = point_mass();
    let p = derive_parameters(&inputs(&env, &curve, 0.5, 0.8)).unwrap();
    assert!(p.alpha <= 0.1 + 1e-15);
    assert_eq!(p.q, 1);
    assert_eq!(p.gap_at_q, 0.0);
    assert!(p.p > p.q && p.all_certified());
    assert!(p.c_epsilon * (1.0 - p.delta) <= p.c_epsilon_prime * (1.0 - p.delta / 2.0) + 1e-15);

    let geo = geometric_envelope(0.5, 400);
    let p = derive_parameters(&inputs(&geo, &CCurve::Barrier, 0.5, 0.5)).unwrap();
    assert!(p.inequalities.iter().all(|i| i.holds && i.slack >= 0.0), "{:?}", p.inequalities);
    let e1 = p.epsilon_prime;
    let a = p.alpha;
    assert!((1.0 - e1) * (1.0 - a).powi(2) / (1.0 + a).powi(2) >= 1.0 - 0.5 - 1e-12);
    assert!(p.gap_at_q <= p.thresholds.tau);
}

#[test]
fn tight_frame_parameters_space_the_blocks() {
    let env = geometric_envelope(0.5, 400);
    let dual = geometric_envelope(0.25, 400);
    let inp = ParamInputs {
        case: ReferenceCase::TightFrame,
        dual_envelope: Some(&dual),
        b_prime: Some(1.0),
        ..inputs(&env, &CCurve::Barrier, 0.5, 0.5)
    };
    let p = derive_parameters(&inp).unwrap();
    let r1 = p.r_prime.unwrap();
    assert_eq!(p.w, 2 * p.p + r1);
    assert!(p.all_certified(), "{:?}", p.inequalities);
    let missing = ParamInputs { dual_envelope: None, ..inp.clone() };
    assert!(derive_parameters(&missing).is_err());
}

#[test]
fn small_window_names_the_binding_constraint() {
    let env = geometric_envelope(0.9, 400);
    let inp = ParamInputs { max_spacing: 5, preferred_spacing: 5, ..inputs(&env, &CCurve::Barrier, 0.5, 0.5) };
    match derive_parameters(&inp) {
        Err(Error::Infeasible { constraint, .. }) => assert!(!constraint.is_empty()),
        other => panic!("expected infeasibility, got {other:?}"),
    }
}

#[test]
fn case_a_orthonormal_identity() {
    let amb = Ambient::range(-64, 64);
    let g = fixtures::natural_reference(&amb);
    let f = amb.full_basis();
    let map = IndexedFamilyMap::on_integers(amb.indices().iter().copied(), |i| i);
    let problem = BlockwiseProblem { family: &f, map: &map, reference: &g, dual: &g.family, window: GroupBox::new(GroupPoint::new(vec![0]), 64) };
    let res = blockwise_select_case_a(&problem, &BlockwiseConfig::new(0.5, 0.5)).unwrap();
    let b = res.blockwise.as_ref().unwrap();
    assert!((res.achieved_lower - 1.0).abs() < 1e-12);
    // Only the border trim of width Q separates the ratio from 1.
    let p = res.params.as_ref().unwrap();
    let kept = (2 * (p.p - p.q) + 1) as f64 / (2 * p.p + 1) as f64;
    assert!((b.density_ratio - kept).abs() < 1e-12, "{} vs {kept}", b.density_ratio);
    assert!(b.density_ratio >= 1.0 - 2.0 * p.q as f64 / (2 * p.p + 1) as f64 - 1e-12);
    let ctx = VerifyContext::from_result(&res, CCurve::Barrier).unwrap();
    assert!(verify_conclusions(&res, &f, &ctx).unwrap().pass);
}

/// `f_i = e_{floor(i/2)}` on `|i| <= 2 h`; the basis vector `e_m` sits at `2m`.
fn interleaved_duplicates(h: i64) -> (VectorFamily, IndexedFamilyMap, ReferenceSystem) {
    let amb = Ambient::range(-h, h);
    let idx: Vec<i64> = (-2 * h..=2 * h + 1).collect();
    let terms: Vec<_> = idx.iter().map(|&i| vec![(i.div_euclid(2), Complex64::from(1.0))]).collect();
    let f = amb.combinations(&terms, idx.iter().map(|&i| Label::from(i)).collect()).unwrap();
    let pts = amb.indices().iter().map(|&m| GroupPoint::new(vec![2 * m])).collect();
    let g = ReferenceSystem::new(FgaGroup::lattice(1), amb.full_basis(), pts).unwrap();
    (f, IndexedFamilyMap::on_integers(idx.iter().copied(), |i| i), g)
}

#[test]
fn case_a_interleaved_duplicates() {
    let (f, map, g) = interleaved_duplicates(128);
    let problem = BlockwiseProblem { family: &f, map: &map, reference: &g, dual: &g.family, window: GroupBox::new(GroupPoint::new(vec![0]), 256) };
    let eps = 0.5;
    let res = blockwise_select_case_a(&problem, &BlockwiseConfig::new(eps, 0.5)).unwrap();
    let rows: BTreeSet<i64> = res.selected.iter().map(|l| l.0.parse::<i64>().unwrap().div_euclid(2)).collect();
    assert_eq!(rows.len(), res.selected.len());
    let b = res.blockwise.as_ref().unwrap();
    assert!((b.b_f - 2.0).abs() < 1e-9);
    assert!(b.density_ratio >= (1.0 - eps) / 2.0 - 1e-9, "{}", b.density_ratio);
    let lam = lambda_min(&f.subfamily(&res.positions));
    assert!((lam - res.achieved_lower).abs() < 1e-9 && lam > 0.0);
}

#[test]
fn case_a_localized_chain_and_union_bound() {
    let s = fixtures::localized_system(17, 256, 8, 0.1);
    let problem = BlockwiseProblem { family: &s.family, map: &s.map, reference: &s.reference, dual: &s.reference.family, window: s.window.clone() };
    let res = blockwise_select_case_a(&problem, &BlockwiseConfig::new(0.5, 0.9)).unwrap();
    let p = res.params.as_ref().unwrap();
    let b = res.blockwise.as_ref().unwrap();
    let lam = lambda_min(&s.family.subfamily(&res.positions));
    assert!(lam >= b.chain_bound - 1e-9, "{lam} vs {}", b.chain_bound);
    let block_min = res.per_block.iter().map(|r| r.trimmed_lower).fold(f64::INFINITY, f64::min);
    assert!(b.truncated_lower >= (b.ref_lower / b.ref_upper) * block_min - 1e-9);
    assert!(p.inequalities.iter().all(|i| i.holds));
    let again = blockwise_select_case_a(&problem, &BlockwiseConfig::new(0.5, 0.9)).unwrap();
    assert_eq!(again.selected, res.selected);
}

#[test]
fn case_b_with_orthonormal_reference_matches_case_a() {
    let s = fixtures::localized_system(4, 128, 4, 0.1);
    let problem = BlockwiseProblem { family: &s.family, map: &s.map, reference: &s.reference, dual: &s.reference.family, window: s.window.clone() };
    let cfg = BlockwiseConfig::new(0.5, 0.9);
    let b = blockwise_select_case_b(&problem, &cfg).unwrap();
    assert_eq!(b.params.as_ref().unwrap().r_prime, Some(1));
    let summary = b.blockwise.as_ref().unwrap();
    assert_eq!(summary.ref_lower, summary.ref_upper);
    if let Some(ct) = &summary.cross_term {
        assert!(ct.measured_ratio <= 1e-12);
    }
    let ctx = VerifyContext::from_result(&b, CCurve::Barrier).unwrap();
    assert!(verify_conclusions(&b, &s.family, &ctx).unwrap().pass);
}

/// `e_m` at `2m` together with the Haar pairs `(e_2k +- e_2k+1)/sqrt 2` at `4k+1`, `4k+3`.
fn two_bases(h: i64) -> (Ambient, ReferenceSystem) {
    let amb = Ambient::range(-2 * h, 2 * h + 1);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (mut terms, mut labels, mut pts) = (Vec::new(), Vec::new(), Vec::new());
    for &m in amb.indices() {
        terms.push(vec![(m, Complex64::from(1.0))]);
        labels.push(Label::from(format!("e{m}")));
        pts.push(GroupPoint::new(vec![2 * m]));
    }
    for k in -h..=h {
        for (sign, off, tag) in [(1.0, 1, "p"), (-1.0, 3, "m")] {
            terms.push(vec![(2 * k, Complex64::from(r)), (2 * k + 1, Complex64::from(sign * r))]);
            labels.push(Label::from(format!("h{tag}{k}")));
            pts.push(GroupPoint::new(vec![4 * k + off]));
        }
    }
    let fam = amb.combinations(&terms, labels).unwrap();
    (amb.clone(), ReferenceSystem::new(FgaGroup::lattice(1), fam, pts).unwrap())
}

#[test]
fn case_b_redundant_tight_reference() {
    let h = 64;
    let (amb, g) = two_bases(h);
    let dual = g.family.scaled(Complex64::from(0.5));
    let idx: Vec<i64> = (-2 * h + 2..=2 * h - 2).collect();
    let terms: Vec<_> = idx
        .iter()
        .map(|&i| vec![(i, Complex64::from(1.0)), (i + 1, Complex64::from(0.05)), (i - 1, c(0.0, 0.05))])
        .collect();
    let f = amb.combinations(&terms, idx.iter().map(|&i| Label::from(i)).collect()).unwrap();
    let map = IndexedFamilyMap::on_integers(idx.iter().copied(), |i| 2 * i);
    let problem = BlockwiseProblem { family: &f, map: &map, reference: &g, dual: &dual, window: GroupBox::new(GroupPoint::new(vec![0]), 4 * h as u64) };
    let cfg = BlockwiseConfig { policy: BorderPolicy::Measured, ..BlockwiseConfig::new(0.5, 0.9) };
    let res = blockwise_select_case_b(&problem, &cfg).unwrap();
    let s = res.blockwise.as_ref().unwrap();
    assert_eq!(s.ref_lower, s.ref_upper);
    assert!((s.b_prime.unwrap() - 2.0).abs() < 1e-9);
    let ct = s.cross_term.as_ref().unwrap();
    assert!(ct.measured_ratio < 0.9 / 8.0, "{}", ct.measured_ratio);
    let lam = lambda_min(&f.subfamily(&res.positions));
    assert!(lam >= (1.0 - 0.9) * CCurve::Barrier.eval(0.5) * res.u * res.u - 1e-9);
}

#[test]
fn cross_term_trivial_cases() {
    let env = geometric_envelope(0.5, 10);
    let inp = CrossTermInputs { dual_envelope: &env, r_prime: 2, fiber_bound: 1, q: 1, dims: 1, b_prime: 1.0, t_norm: 1.0, c_value: 0.5, u: 1.0 };
    let ortho: Vec<CVector> = (0..4).map(|i| e(8, 2 * i)).collect();
    assert_eq!(cross_term_bound(&ortho, &inp).actual, 0.0);
    let single = [random_vector(&mut rng(0), 8)];
    let ct = cross_term_bound(&single, &inp);
    assert_eq!(ct.actual, 0.0);
    assert!(ct.bound >= 0.0);
}

#[test]
fn cross_term_bound_on_localized_blocks() {
    // Blocks are combinations of dual vectors g~_n = sum_m q^{|m-n|} e_m centred at
    // k in (2P + R') Z and supported on B_Q(k); the Riesz lower bound of the dual plays c.
    let (q_decay, q, p, r1) = (0.25f64, 1i64, 2i64, 2u64);
    let w = 2 * p + r1 as i64;
    let amb = Ambient::range(-80, 80);
    let idx: Vec<i64> = amb.indices().to_vec();
    let terms: Vec<_> = idx
        .iter()
        .map(|&n| idx.iter().map(|&m| (m, Complex64::from(q_decay.powi((m - n).abs() as i32)))).collect())
        .collect();
    let dual = amb.combinations(&terms, idx.iter().map(|&i| Label::from(i)).collect()).unwrap();
    let gram = frametk::linalg::gram(&dual).unwrap();
    let lower = riesz_bounds(&dual).unwrap().lower;
    let upper = riesz_bounds(&dual).unwrap().upper;
    let mut envelope = std::collections::BTreeMap::new();
    for d in -40i64..=40 {
        let v = (0..idx.len())
            .filter(|&i| (i as i64 + d) >= 0 && ((i as i64 + d) as usize) < idx.len())
            .map(|i| gram.entries()[(i, (i as i64 + d) as usize)].norm())
            .fold(0.0, f64::max);
        envelope.insert(GroupPoint::new(vec![d]), v);
    }
    let env = Envelope::new(FgaGroup::lattice(1), envelope, 1);
    let inp = CrossTermInputs { dual_envelope: &env, r_prime: r1, fiber_bound: 1, q: q as u64, dims: 1, b_prime: upper, t_norm: 1.0, c_value: lower, u: 1.0 };
    let mut r = rng(77);
    let centres: Vec<i64> = (-6..=6).map(|t| t * w).collect();
    for _ in 0..100 {
        let blocks: Vec<CVector> = centres
            .iter()
            .map(|&k| {
                let mut x = CVector::zeros(dual.dimension());
                for n in k - q..=k + q {
                    let pos = dual.position(&Label::from(n)).unwrap();
                    x += dual.vector(pos) * crand(&mut r);
                }
                x
            })
            .collect();
        let ct = cross_term_bound(&blocks, &inp);
        assert!(ct.actual <= ct.bound * (1.0 + 1e-12), "{} > {}", ct.actual, ct.bound);
    }
}

#[test]
fn verification_examples() {
    let f = VectorFamily::standard_basis(12);
    let res = finite_rit_select(&f, &SelectorConfig::new(0.5, 0.5)).unwrap();
    let ctx = VerifyContext::finite(&res, 0.5, CCurve::Barrier);
    let rep = verify_conclusions(&res, &f, &ctx).unwrap();
    assert!(rep.pass);
    let size = rep.clause("size_ratio").unwrap();
    assert_eq!((size.value, size.threshold), (1.0, 0.5));

    // Orthonormal reference with unit columns: the size clause reads (1 - eps) / ||T||^2.
    let dup = fixtures::duplicated_basis(10);
    let res = finite_rit_select(&dup, &SelectorConfig::new(0.5, 0.5)).unwrap();
    let ctx = VerifyContext::finite(&res, 0.5, CCurve::Barrier);
    let rep = verify_conclusions(&res, &dup, &ctx).unwrap();
    assert!((rep.clause("size_ratio").unwrap().threshold - 0.25).abs() < 1e-12);
    assert!(rep.pass);

    let mut corrupted = res.clone();
    let first = corrupted.positions[0];
    let twin = first ^ 1;
    corrupted.selected.push(dup.label(twin).clone());
    let rep = verify_conclusions(&corrupted, &dup, &ctx).unwrap();
    assert!(!rep.clause("riesz_lower").unwrap().pass);
    assert!(!rep.pass);
}

#[test]
fn selection_result_serializes() {
    let f = fixtures::duplicated_basis(6);
    let res = finite_rit_select(&f, &SelectorConfig::new(0.5, 0.5)).unwrap();
    let back: SelectionResult = serde_json::from_str(&frametk::io::to_json(&res).unwrap()).unwrap();
    assert_eq!(back, res);
    let row = frametk::io::selection_summary_csv(&[("dup".to_string(), &res)]).unwrap();
    assert_eq!(row.lines().count(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn selections_certify_themselves(f in family_strategy(8, 12), eps in 0.1f64..0.9) {
        prop_assume!(f.min_norm() > 1e-3);
        if let Ok(res) = finite_rit_select(&f, &SelectorConfig::new(eps, 0.5)) {
            let lam = lambda_min(&f.subfamily(&res.positions));
            prop_assert!((lam - res.achieved_lower).abs() <= 1e-9 * lam.abs().max(1.0));
            prop_assert!(res.size_ratio >= (1.0 - eps) * res.u * res.u / (res.t_norm * res.t_norm) - 1e-9);
            prop_assert!(lam >= res.certified_bound * (1.0 - 1e-9));
            let ctx = VerifyContext::finite(&res, eps, CCurve::Barrier);
            prop_assert!(verify_conclusions(&res, &f, &ctx).unwrap().pass);
            // Interlacing: dropping a member never lowers lambda_min.
            for drop in 0..res.positions.len().min(3) {
                let mut rest = res.positions.clone();
                rest.remove(drop);
                if !rest.is_empty() {
                    prop_assert!(lambda_min(&f.subfamily(&rest)) >= lam - 1e-9);
                }
            }
            let again = finite_rit_select(&f, &SelectorConfig::new(eps, 0.5)).unwrap();
            prop_assert_eq!(again.positions, res.positions);
        }
    }

    #[test]
    fn duplicated_basis_ceiling(n in 2usize..24, eps in 0.05f64..0.95) {
        let f = fixtures::duplicated_basis(n);
        let res = finite_rit_select(&f, &SelectorConfig::new(eps, 0.5)).unwrap();
        prop_assert!(res.positions.len() <= n);
        prop_assert!(res.achieved_lower > 0.0);
    }

    #[test]
    fn recorded_inequalities_hold(q in 0.05f64..0.6, eps in 0.2f64..0.8, delta in 0.2f64..0.95) {
        let env = geometric_envelope(q, 300);
        if let Ok(p) = derive_parameters(&inputs(&env, &CCurve::Barrier, eps, delta)) {
            for i in &p.inequalities {
                prop_assert!(i.holds && i.slack >= 0.0, "{} fails: {} vs {}", i.name, i.lhs, i.rhs);
            }
            prop_assert!(p.alpha <= delta / 8.0 + 1e-15);
            prop_assert!(p.p > p.q);
        }
    }
}
