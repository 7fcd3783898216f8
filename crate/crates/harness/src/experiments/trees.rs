//! Tree-algebra identities on smooth paths, and agreement of the per-vertex
//! cut rule with the hand-written order-3 domains.

use std::collections::BTreeSet;

use anyhow::Context;
use fbm_lift_core::order3::{in_cut_domain_forest, reference_forests};
use fbm_lift_core::special::gauss_legendre;
use fbm_lift_core::tree::{
    check_skeleton_decomposition, check_tree_chen, enumerate_admissible_cuts, fubini_expand, DecoratedTree,
    PolynomialPath, SmoothPath, TreeIntegrator, TrigPath,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::identities::permutations3;
use crate::config::ExperimentConfig;
use crate::report::Report;

const IDENTITY_TOL: f64 = 1e-8;

/// Every parent vector `p` with `p[0] = None` and `p[k] < k`: each rooted tree
/// shape on `n` vertices appears (several times, once per increasing labelling).
pub fn increasing_parent_vectors(n: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = vec![vec![None]];
    for k in 1..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |parent| {
                    let mut q = p.clone();
                    q.push(Some(parent));
                    q
                })
            })
            .collect();
    }
    out
}

/// Antichains by brute force: all nonempty subsets of non-root vertices with
/// no member an ancestor of another, as sorted id lists.
fn brute_force_cuts(tree: &DecoratedTree) -> BTreeSet<Vec<usize>> {
    let n = tree.len();
    let parents = tree.parent_indices();
    let above = |a: usize, mut b: usize| -> bool {
        // a is a strict ancestor of b
        while let Some(p) = parents[b] {
            if p == a {
                return true;
            }
            b = p;
        }
        false
    };
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << (n - 1)) {
        let members: Vec<usize> = (1..n).filter(|v| mask & (1 << (v - 1)) != 0).collect();
        let ok = members
            .iter()
            .all(|&a| members.iter().all(|&b| a == b || (!above(a, b) && !above(b, a))));
        if ok {
            let mut ids: Vec<usize> = members.iter().map(|&v| tree.ids()[v]).collect();
            ids.sort_unstable();
            out.insert(ids);
        }
    }
    out
}

fn label_assignments(n: usize, alphabet: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|l: Vec<usize>| {
                (1..=alphabet).map(move |a| {
                    let mut m = l.clone();
                    m.push(a);
                    m
                })
            })
            .collect();
    }
    out
}

/// A polynomial path with distinct, non-trivial components.
pub fn test_polynomial(d: usize) -> PolynomialPath {
    PolynomialPath::new(
        (0..d)
            .map(|c| {
                let c = c as f64;
                vec![0.1 * c, 1.0 - 0.2 * c, 0.3 + 0.25 * c, -0.4 + 0.1 * c]
            })
            .collect(),
    )
}

/// `∫_s^t dΓ₁(u₁) ∫_s^{u₁} dΓ₂(u₂) (Γ₃(u₂) − Γ₃(s))` by nested Gauss–Legendre,
/// written out without the tree machinery.
pub fn direct_triple_integral<P: SmoothPath + ?Sized>(path: &P, s: f64, t: f64, nodes: usize) -> f64 {
    let (x, w) = gauss_legendre(nodes);
    let map = |a: f64, b: f64, k: usize| (0.5 * (b - a) * x[k] + 0.5 * (a + b), 0.5 * (b - a) * w[k]);
    let g3 = |u: f64| path.value(2, u) - path.value(2, s);
    let inner = |u1: f64| -> f64 {
        (0..nodes)
            .map(|k| {
                let (u2, wk) = map(s, u1, k);
                wk * path.derivative(1, u2) * g3(u2)
            })
            .sum()
    };
    (0..nodes)
        .map(|k| {
            let (u1, wk) = map(s, t, k);
            wk * path.derivative(0, u1) * inner(u1)
        })
        .sum()
}

/// Hand-written normal-ordered cut domains for the five reference forests,
/// with `xi[k]` the frequency of the vertex in position `k + 1`.
pub fn explicit_domain(index: usize, xi: &[f64; 3], c: f64) -> bool {
    let [x1, x2, x3] = *xi;
    let ordered = x1.abs() <= x2.abs() && x2.abs() <= x3.abs();
    ordered
        && match index {
            0 => (x2 + x3).abs() > c * x3.abs() && (x1 + x2 + x3).abs() > c * x3.abs(),
            1 => (x1 + x3).abs() > c * x3.abs(),
            2 => (x1 + x2 + x3).abs() > c * x3.abs(),
            3 => (x1 + x2).abs() > c * x2.abs(),
            4 => (x1 + x2 + x3).abs() > c * x3.abs(),
            _ => panic!("five reference forests"),
        }
}

/// A random normal-ordered triple. Magnitudes are `m·e^{-|g|·scale}` with a
/// random scale so that near-equal magnitudes, and with random signs near
/// cancellations at every threshold, are common.
pub fn random_ordered_triple(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let scale = [0.01, 0.1, 0.5, 1.0, 3.0][rng.random_range(0..5)];
    let m = 10f64.powf(rng.random_range(-3.0..3.0));
    let mut xi = [0.0; 3];
    for x in &mut xi {
        let g: f64 = rng.random_range(0.0..1.0);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        *x = sign * m * (-g * scale).exp();
    }
    xi.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    xi
}

pub fn tree_identities(cfg: &ExperimentConfig) -> anyhow::Result<Report> {
    let mut r = Report::new("tree_identities", cfg.seed(), &["case_id", "residual"]);

    // Admissible cuts versus the brute-force antichain filter.
    let mut mismatches = 0usize;
    let mut trees_checked = 0usize;
    for n in 1..=5 {
        for parents in increasing_parent_vectors(n) {
            for labels in label_assignments(n, 2) {
                let tree = DecoratedTree::from_parent_indices(&parents, &labels)?;
                let got: BTreeSet<Vec<usize>> =
                    enumerate_admissible_cuts(&tree).into_iter().map(|c| c.cut_vertices).collect();
                if got != brute_force_cuts(&tree) {
                    mismatches += 1;
                }
                trees_checked += 1;
            }
        }
    }
    r.row(vec![format!("cut_enumeration;trees={trees_checked}").into(), (mismatches as f64).into()]);
    r.check("cut enumeration mismatches == 0 (all labelled trees, <= 5 vertices)", mismatches.to_string(), mismatches == 0);

    let cherry = DecoratedTree::parse("[1[2][3]]")?;
    let cuts: Vec<Vec<usize>> = enumerate_admissible_cuts(&cherry).into_iter().map(|c| c.cut_vertices).collect();
    let expected = vec![vec![2], vec![3], vec![2, 3]];
    r.row(vec!["cherry_cuts".into(), if cuts == expected { 0.0 } else { 1.0 }.into()]);
    r.check("cherry cut set == {2},{3},{2,3}", format!("{cuts:?}"), cuts == expected);

    // Tree Chen and skeleton decomposition on smooth paths.
    let mut trees: Vec<DecoratedTree> = Vec::new();
    for forest in reference_forests() {
        trees.extend(forest.trees.iter().filter(|t| t.len() > 1).cloned());
    }
    for n in 2..=4 {
        for parents in increasing_parent_vectors(n) {
            let labels: Vec<usize> = (1..=n).collect();
            trees.push(DecoratedTree::from_parent_indices(&parents, &labels)?);
        }
    }
    let mut seen = BTreeSet::new();
    trees.retain(|t| seen.insert(t.canonical()));
    let integ = TreeIntegrator::default();
    let poly = test_polynomial(4);
    let trig = TrigPath::standard(4);
    let paths: [(&str, &dyn SmoothPath); 2] = [("poly", &poly), ("trig", &trig)];
    let (mut w_chen, mut w_sk): (f64, f64) = (0.0, 0.0);
    for tree in &trees {
        for (pname, path) in paths {
            for (s, u, t) in [(-0.3, 0.2, 0.9), (0.0, 0.5, 1.0), (0.4, 1.3, 2.0)] {
                let scale = integ.tree(tree, path, s, t)?.abs().max(1.0);
                let res = check_tree_chen(tree, path, s, u, t, &integ).context("tree Chen")? / scale;
                w_chen = w_chen.max(res);
                r.row(vec![format!("tree_chen;{};{pname};s={s};u={u};t={t}", tree.to_bracket()).into(), res.into()]);
                for base in [-1.0, 0.0, u - 0.7] {
                    let res = check_skeleton_decomposition(tree, path, base, u, t, &integ).context("skeleton")? / scale;
                    w_sk = w_sk.max(res);
                    r.row(vec![
                        format!("skeleton;{};{pname};base={base};u={u};t={t}", tree.to_bracket()).into(),
                        res.into(),
                    ]);
                }
            }
        }
    }
    r.note(format!("tree identities on {} distinct trees", trees.len()));
    r.check(format!("max tree Chen residual <= {IDENTITY_TOL:e}"), format!("{w_chen:.3e}"), w_chen <= IDENTITY_TOL);
    r.check(format!("max skeleton residual <= {IDENTITY_TOL:e}"), format!("{w_sk:.3e}"), w_sk <= IDENTITY_TOL);

    // Every ordering's signed forests reproduce the direct triple integral.
    let mut w_comp: f64 = 0.0;
    for (pname, path) in paths {
        for (s, t) in [(0.0, 1.0), (-0.5, 1.5)] {
            let direct = direct_triple_integral(path, s, t, 48);
            for sigma in permutations3() {
                let e = fubini_expand(&sigma)?;
                let v = e.evaluate(path, s, t, &integ)?;
                let res = (v - direct).abs() / direct.abs().max(1.0);
                w_comp = w_comp.max(res);
                r.row(vec![
                    format!("completeness;sigma={}{}{};{pname};s={s};t={t}", sigma[0], sigma[1], sigma[2]).into(),
                    res.into(),
                ]);
            }
        }
    }
    r.check(format!("max completeness residual <= {IDENTITY_TOL:e}"), format!("{w_comp:.3e}"), w_comp <= IDENTITY_TOL);

    // Per-vertex cut rule versus the explicit domains.
    let c = cfg.c_reg_prime.unwrap_or(0.5);
    let samples = cfg.realizations.unwrap_or(100_000);
    let mut total = 0usize;
    for (k, forest) in reference_forests().iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed().wrapping_add(k as u64));
        let (mut disagree, mut inside) = (0usize, 0usize);
        for _ in 0..samples {
            let xi = random_ordered_triple(&mut rng);
            let general = in_cut_domain_forest(forest, &xi, c);
            if general != explicit_domain(k, &xi, c) {
                disagree += 1;
            }
            inside += general as usize;
        }
        total += disagree;
        r.note(format!(
            "cut domain {}: {inside}/{samples} tuples inside, {disagree} disagreements",
            forest.to_bracket()
        ));
        r.row(vec![format!("cut_domain;{};c={c};n={samples}", forest.to_bracket()).into(), (disagree as f64).into()]);
    }
    r.check("cut-domain disagreements == 0", total.to_string(), total == 0);
    Ok(r)
}
