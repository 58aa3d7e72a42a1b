//! Randomized invariants across the layers.

use afc_core::bicomplex::seeded::{random_row_sdr, Shape};
use afc_core::bicomplex::{check_sdr_relations, check_theorem};
use afc_core::calculus::{self as calc, NablaDefinition, PartitionProfile, Settings};
use afc_core::chain::{compare_homology, tensor_product};
use afc_core::chain_functor::ChainFunctor;
use afc_core::functor::{cross_effect, cross_effect_dim_by_inclusion_exclusion, decomposition_total, Functor1, FunctorExpr, Term, Unary};
use afc_core::{ChainComplex, Field, Matrix, TruncationWindow};
use proptest::prelude::*;

fn field() -> impl Strategy<Value = Field> {
    prop_oneof![Just(Field::F2), Just(Field::Prime(3)), Just(Field::Prime(5)), Just(Field::Rational)]
}

fn matrix(max: usize) -> impl Strategy<Value = Matrix> {
    (field(), 0..=max, 0..=max).prop_flat_map(|(f, r, c)| proptest::collection::vec(-3i64..=3, r * c).prop_map(move |v| Matrix::from_i64(f, r, c, &v)))
}

/// Closed unary terms without quotient atoms.
fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![Just(Term::var(0)), (0usize..=2).prop_map(Term::constant)];
    leaf.prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::sum(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::tensor(a, b)),
            (inner.clone(), inner).prop_map(|(h, a)| Term::compose(h, vec![a])),
        ]
    })
}

fn unary_expr() -> impl Strategy<Value = FunctorExpr> {
    term().prop_map(|t| FunctorExpr::new(1, t).expect("unary term"))
}

fn small_degree(e: &FunctorExpr) -> bool {
    e.eval_obj(&[2]).is_ok_and(|d| d <= 16)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_nullity(m in matrix(5)) {
        prop_assert_eq!(m.rank() + m.kernel_basis().cols(), m.cols());
        prop_assert!(m.mul(&m.kernel_basis()).is_zero());
        prop_assert_eq!(m.transpose().rank(), m.rank());
        prop_assert_eq!(m.image_basis().cols(), m.rank());
    }

    #[test]
    fn inverse_is_two_sided(m in matrix(4)) {
        if let Ok(inv) = m.inverse() {
            prop_assert!(m.mul(&inv).is_identity());
            prop_assert!(inv.mul(&m).is_identity());
        } else {
            prop_assert!(!m.is_square() || m.rank() < m.rows());
        }
    }

    #[test]
    fn solve_finds_preimages(m in matrix(4), seed in proptest::collection::vec(-2i64..=2, 4)) {
        let x = Matrix::from_i64(m.field(), m.cols(), 1, &seed[..m.cols()]);
        let b = m.mul(&x);
        let y = m.solve(&b).expect("b lies in the image");
        prop_assert_eq!(m.mul(&y), b);
    }

    #[test]
    fn split_idempotent_reconstructs(m in matrix(4)) {
        // the projection onto the image along a complement
        if m.cols() > 0 && m.rows() > 0 {
            let img = m.image_basis();
            let e = img.mul(&img.left_inverse().expect("independent columns"));
            let s = e.split_idempotent().expect("idempotent");
            prop_assert_eq!(s.dim(), m.rank());
            prop_assert_eq!(s.idempotent(), e);
        }
    }

    #[test]
    fn euler_characteristic_is_preserved(m in matrix(4)) {
        let c = ChainComplex::new(m.field(), TruncationWindow::bounded(1), vec![m.rows(), m.cols()], vec![m.clone()]).unwrap();
        let h = c.homology_dims().unwrap();
        prop_assert_eq!(h[0] as i64 - h[1] as i64, m.rows() as i64 - m.cols() as i64);
        prop_assert_eq!(h[0], m.rows() - m.rank());
    }

    #[test]
    fn kunneth_for_tensor_products(a in matrix(3), b in proptest::collection::vec(-3i64..=3, 9)) {
        let f = a.field();
        let bm = Matrix::from_i64(f, 3, 3, &b);
        let c = ChainComplex::new(f, TruncationWindow::bounded(1), vec![a.rows(), a.cols()], vec![a.clone()]).unwrap();
        let d = ChainComplex::new(f, TruncationWindow::bounded(1), vec![3, 3], vec![bm]).unwrap();
        let t = tensor_product(&c, &d);
        let (hc, hd) = (c.homology_dims().unwrap(), d.homology_dims().unwrap());
        let ht = t.homology_dims().unwrap();
        prop_assert!(!ht.is_empty());
        for k in 0..ht.len() {
            let expected: usize = (0..=k).filter(|&i| i <= 1 && k - i <= 1).map(|i| hc[i] * hd[k - i]).sum();
            prop_assert_eq!(ht[k], expected, "degree {}", k);
        }
    }

    #[test]
    fn cross_effect_audits(e in unary_expr(), args in proptest::collection::vec(0usize..=2, 1..=3)) {
        prop_assume!(small_degree(&e));
        let f = Unary::new(&e, Field::F2).unwrap();
        prop_assert_eq!(decomposition_total(&f, &args), f.obj(args.iter().sum()));
        prop_assert_eq!(cross_effect(&f, &args).unwrap().dim() as i64, cross_effect_dim_by_inclusion_exclusion(&f, &args));
    }

    #[test]
    fn normal_form_matches_evaluation(e in unary_expr(), d in 0usize..=3) {
        prop_assume!(small_degree(&e));
        let f = ChainFunctor::from_expr(&e, Field::F2, 2).unwrap();
        let c = f.eval_obj(&[d]).unwrap();
        prop_assert_eq!(c.dim(0), e.eval_obj(&[d]).unwrap());
        prop_assert_eq!(c.dim(1), 0);
    }

    #[test]
    fn nabla_definitions_agree_on_random_functors(e in unary_expr()) {
        prop_assume!(small_degree(&e));
        let s = Settings::new(3);
        let f = ChainFunctor::from_expr(&e, Field::F2, 3).unwrap();
        let a = calc::nabla(&f, NablaDefinition::ViaSum, s).unwrap();
        let b = calc::nabla(&f, NablaDefinition::ViaKernel, s).unwrap();
        prop_assert!(calc::compare(&a, &b, &calc::grid(2, 1)).unwrap().verdict.is_pass());
    }

    #[test]
    fn seeded_row_sdrs_pass_the_exact_audit(seed in any::<u64>(), rows in 1usize..=3, row_len in 1usize..=4, max_dim in 1usize..=2, q in any::<bool>()) {
        let field = if q { Field::Rational } else { Field::F2 };
        let r = random_row_sdr(seed, field, Shape { rows, row_len, max_dim });
        prop_assert!(r.validate().is_pass());
        prop_assert!(check_sdr_relations(&r).is_pass());
        prop_assert!(check_theorem(&r).is_pass());
    }

    #[test]
    fn comparing_a_complex_with_itself_passes(m in matrix(3)) {
        let c = ChainComplex::new(m.field(), TruncationWindow::bounded(1), vec![m.rows(), m.cols()], vec![m]).unwrap();
        prop_assert!(compare_homology(&c, &c).unwrap().verdict().is_pass());
    }

    #[test]
    fn partition_profiles_are_consistent(sizes in proptest::collection::vec(1usize..=3, 1..=4)) {
        let n: usize = sizes.iter().sum();
        let mut counts = vec![0; n];
        for &k in &sizes {
            counts[k - 1] += 1;
        }
        let p = PartitionProfile::new(n, counts).unwrap();
        prop_assert_eq!(p.n(), n);
        // a set partition with these block sizes has this profile
        let mut next = 0;
        let blocks: Vec<Vec<usize>> = sizes.iter().map(|&k| { next += k; (next - k..next).collect() }).collect();
        prop_assert_eq!(&PartitionProfile::of(&blocks), &p);
        let counts = calc::profile_counts(n);
        prop_assert_eq!(counts.get(&p).copied(), Some(calc::partition_multiplicity(&p)));
    }
}

#[test]
fn set_partition_counts_are_bell_numbers() {
    let bell = [1usize, 1, 2, 5, 15, 52, 203];
    for (n, &b) in bell.iter().enumerate().skip(1) {
        assert_eq!(calc::set_partitions(n).len(), b);
    }
}
