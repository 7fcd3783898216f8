use std::collections::BTreeSet;

use fbm_lift_core::tree::*;
use proptest::prelude::*;

/// Random labelled tree on `1..=max_n` vertices: vertex `k` hangs below a
/// uniformly chosen earlier vertex.
fn arb_tree(max_n: usize, max_label: usize) -> impl Strategy<Value = DecoratedTree> {
    (1..=max_n).prop_flat_map(move |n| {
        let parents: Vec<BoxedStrategy<Option<usize>>> = (0..n)
            .map(|k| if k == 0 { Just(None).boxed() } else { (0..k).prop_map(Some).boxed() })
            .collect();
        (parents, prop::collection::vec(1..=max_label, n))
            .prop_map(|(p, l)| DecoratedTree::from_parent_indices(&p, &l).unwrap())
    })
}

fn ancestors(parents: &[Option<usize>], mut v: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    while let Some(p) = parents[v] {
        out.insert(p);
        v = p;
    }
    out
}

/// Every subset of non-root vertices with no ancestor relation inside it.
fn brute_force_antichains(tree: &DecoratedTree) -> BTreeSet<Vec<usize>> {
    let n = tree.len();
    let parents = tree.parent_indices();
    let anc: Vec<BTreeSet<usize>> = (0..n).map(|v| ancestors(parents, v)).collect();
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << (n - 1)) {
        let members: Vec<usize> = (1..n).filter(|&v| mask & (1 << (v - 1)) != 0).collect();
        let ok = members
            .iter()
            .all(|&a| members.iter().all(|&b| a == b || !anc[b].contains(&a)));
        if ok {
            out.insert(members.iter().map(|&v| tree.ids()[v]).collect());
        }
    }
    out
}

/// `Π_v |subtree(v)|`: with `Γ(u) = u` in every component the tree integral
/// over `[s, t]` is `(t − s)^n / T!`.
fn tree_factorial(tree: &DecoratedTree) -> f64 {
    (0..tree.len()).map(|v| tree.subtree(v).len() as f64).product()
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn wavy_path() -> PolynomialPath {
    PolynomialPath::new(vec![
        vec![0.1, 1.0, -0.5, 0.3],
        vec![-0.2, 0.4, 0.9],
        vec![0.0, -1.1, 0.2, 0.05, 0.1],
    ])
}

#[test]
fn chain_and_cherry_integrals_against_closed_forms() {
    let id = PolynomialPath::identity(3);
    let chain = DecoratedTree::chain(&[1, 2, 3]).unwrap();
    let cherry = DecoratedTree::parse("[1[2][3]]").unwrap();
    let (s, t) = (0.3, 1.7);
    let h: f64 = t - s;
    assert!((tree_integral(&DecoratedForest::new(vec![chain]), &id, s, t).unwrap() - h.powi(3) / 6.0).abs() < 1e-13);
    assert!((tree_integral(&DecoratedForest::new(vec![cherry]), &id, s, t).unwrap() - h.powi(3) / 3.0).abs() < 1e-13);
}

#[test]
fn fubini_permutations_of_four_integrate_to_the_chain() {
    let path = TrigPath::standard(4);
    let integ = TreeIntegrator::new(24);
    let chain = DecoratedTree::chain(&[1, 2, 3, 4]).unwrap();
    let target = integ.tree(&chain, &path, -0.2, 0.9).unwrap();
    let mut perm = [1usize, 2, 3, 4];
    let mut count = 0;
    loop {
        let sum = fubini_expand(&perm).unwrap();
        let v = sum.evaluate(&path, -0.2, 0.9, &integ).unwrap();
        assert!((v - target).abs() < 1e-10, "{perm:?}: {v} vs {target}");
        count += 1;
        // next lexicographic permutation
        let Some(i) = (0..3).rev().find(|&i| perm[i] < perm[i + 1]) else { break };
        let j = (i + 1..4).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    assert_eq!(count, 24);
}

#[test]
fn fubini_rejects_non_permutations() {
    assert!(fubini_expand(&[1, 1, 2]).is_err());
    assert!(fubini_expand(&[0, 1]).is_err());
    assert!(fubini_expand(&[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cuts_are_exactly_the_antichains(tree in arb_tree(7, 3)) {
        let got: BTreeSet<Vec<usize>> = enumerate_admissible_cuts(&tree).into_iter().map(|c| c.cut_vertices).collect();
        prop_assert_eq!(got, brute_force_antichains(&tree));
    }

    #[test]
    fn splitting_conserves_vertices(tree in arb_tree(7, 3)) {
        for cut in enumerate_admissible_cuts(&tree) {
            let (left, right) = split_cut(&tree, &cut).unwrap();
            prop_assert_eq!(left.len() + right.vertex_count(), tree.len());
            prop_assert_eq!(left.ids()[0], tree.ids()[0]);
            prop_assert_eq!(right.trees.len(), cut.cut_vertices.len());
            let mut ids: Vec<usize> = left.ids().to_vec();
            ids.extend(right.trees.iter().flat_map(|t| t.ids().iter().copied()));
            prop_assert_eq!(sorted(ids), tree.ids().to_vec());
            let mut labels = left.labels().to_vec();
            labels.extend(right.labels());
            prop_assert_eq!(sorted(labels), sorted(tree.labels().to_vec()));
            let roots: Vec<usize> = right.trees.iter().map(|t| t.ids()[0]).collect();
            prop_assert_eq!(sorted(roots), cut.cut_vertices.clone());
        }
    }

    #[test]
    fn bracket_round_trip(tree in arb_tree(7, 12)) {
        let back = DecoratedTree::parse(&tree.to_bracket()).unwrap();
        prop_assert_eq!(&back, &tree);
        prop_assert_eq!(back.canonical(), tree.canonical());
    }

    #[test]
    fn forests_ignore_tree_order(a in arb_tree(4, 3), b in arb_tree(4, 3), c in arb_tree(4, 3)) {
        let f = DecoratedForest::new(vec![a.clone(), b.clone(), c.clone()]);
        let g = DecoratedForest::new(vec![c, a, b]);
        prop_assert_eq!(f.canonical(), g.canonical());
        prop_assert_eq!(&f, &g);
        let reparsed = DecoratedForest::parse(&f.to_bracket()).unwrap();
        prop_assert_eq!(&reparsed, &f);
    }

    #[test]
    fn identity_path_gives_the_tree_factorial(tree in arb_tree(6, 3), s in -1.0f64..1.0, h in 0.1f64..2.0) {
        let path = PolynomialPath::identity(3);
        let v = TreeIntegrator::new(8).tree(&tree, &path, s, s + h).unwrap();
        let exact = h.powi(tree.len() as i32) / tree_factorial(&tree);
        prop_assert!((v - exact).abs() < 1e-12 * (1.0 + exact), "{} vs {}", v, exact);
    }
}

proptest! {
    // nested quadrature on up to five levels is slow, fewer cases
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chen_relation_on_random_trees(tree in arb_tree(5, 3), s in -1.0f64..0.0, u in 0.0f64..0.5, t in 0.5f64..1.2) {
        let r = check_tree_chen(&tree, &wavy_path(), s, u, t, &TreeIntegrator::new(16)).unwrap();
        prop_assert!(r < 1e-10, "{}", r);
        let r = check_tree_chen(&tree, &TrigPath::standard(3), s, u, t, &TreeIntegrator::new(24)).unwrap();
        prop_assert!(r < 1e-10, "{}", r);
    }

    #[test]
    fn skeleton_decomposition_on_random_trees(tree in arb_tree(5, 3), u in 0.0f64..0.5, t in 0.5f64..1.2) {
        let r = check_skeleton_decomposition(&tree, &TrigPath::standard(3), -2.0, u, t, &TreeIntegrator::new(32)).unwrap();
        prop_assert!(r < 1e-10, "{}", r);
    }

    #[test]
    fn shuffle_relation_on_random_words(
        w1 in prop::collection::vec(1usize..=3, 1..4),
        w2 in prop::collection::vec(1usize..=3, 1..4),
    ) {
        prop_assert_eq!(shuffles(&w1, &w2).len() as u64, binomial(w1.len() + w2.len(), w1.len()));
        let r = check_shuffle(&w1, &w2, &TrigPath::standard(3), 0.1, 0.8, &TreeIntegrator::new(12)).unwrap();
        prop_assert!(r < 1e-11, "{}", r);
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}
