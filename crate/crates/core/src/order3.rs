//! Third-order skeleton kernels, per-tree cut Fourier domains, skeleton
//! variances and the regularized third-order iterated integral.
//!
//! Frequencies attached to a tree are indexed by vertex position: the vertex
//! with id `k` carries `ξ[k-1]`. Normal ordering means `|ξ[0]| ≤ |ξ[1]| ≤ ...`,
//! so the highest frequencies sit on the innermost integrals.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::levy::check_c_reg;
use crate::special::{cis, phase_increment};
use crate::spectral::{reduce_rows, DomainPredicate, Execution, FrequencyGrid, ModelParams, SpectralNoiseField};
use crate::tree::{enumerate_admissible_cuts, fubini_expand, DecoratedForest, DecoratedTree};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `S_v = Σ_{w ≥ v} ξ_w` for every vertex, as `(id, S_v)` in vertex order.
pub fn subtree_sums(tree: &DecoratedTree, xi: &[f64]) -> Result<Vec<(usize, f64)>> {
    if xi.len() != tree.len() {
        return Err(Error::invalid("one frequency per vertex required"));
    }
    Ok((0..tree.len())
        .map(|v| (tree.ids()[v], tree.subtree(v).iter().map(|&w| xi[w]).sum()))
        .collect())
}

fn normal_ordered(xi: &[f64]) -> bool {
    xi.windows(2).all(|w| w[0].abs() <= w[1].abs())
}

/// Per-vertex cut rule on one tree whose frequencies are `xi[k]` for the
/// vertex at position `k`: every vertex with at least two vertices above or
/// at it needs `|S_v| > c · max_{w ≥ v} |ξ_w|`.
fn tree_rule(tree: &DecoratedTree, xi_of: impl Fn(usize) -> f64, c: f64) -> bool {
    (0..tree.len()).all(|v| {
        let sub = tree.subtree(v);
        if sub.len() < 2 {
            return true;
        }
        let sum: f64 = sub.iter().map(|&w| xi_of(w)).sum();
        let max = sub.iter().map(|&w| xi_of(w).abs()).fold(0.0, f64::max);
        sum.abs() > c * max
    })
}

/// The cut domain of a tree: normal ordering plus the per-vertex rule.
pub fn in_cut_domain_tree(tree: &DecoratedTree, xi: &[f64], c_reg_prime: f64) -> bool {
    xi.len() == tree.len() && normal_ordered(xi) && tree_rule(tree, |w| xi[w], c_reg_prime)
}

/// The cut domain of a forest with ids `1..=n`: normal ordering of `xi`
/// (indexed by `id − 1`) and the per-vertex rule on every component.
pub fn in_cut_domain_forest(forest: &DecoratedForest, xi: &[f64], c_reg_prime: f64) -> bool {
    xi.len() == forest.vertex_count()
        && normal_ordered(xi)
        && forest.trees.iter().all(|t| {
            let ids = t.ids();
            ids.iter().all(|&id| id >= 1 && id <= xi.len()) && tree_rule(t, |w| xi[ids[w] - 1], c_reg_prime)
        })
}

/// [`DomainPredicate`] form of [`in_cut_domain_forest`].
#[derive(Debug, Clone)]
pub struct CutDomainTree {
    pub forest: DecoratedForest,
    pub c_reg_prime: f64,
}

impl CutDomainTree {
    pub fn new(forest: DecoratedForest, c_reg_prime: f64) -> Result<Self> {
        check_c_reg("c_reg_prime", c_reg_prime)?;
        let mut ids: Vec<usize> = forest.trees.iter().flat_map(|t| t.ids().iter().copied()).collect();
        ids.sort_unstable();
        if ids.iter().enumerate().any(|(k, &id)| id != k + 1) {
            return Err(Error::InvalidTree("cut domains need vertex ids 1..=n".into()));
        }
        Ok(CutDomainTree { forest, c_reg_prime })
    }
}

impl DomainPredicate for CutDomainTree {
    fn arity(&self) -> usize {
        self.forest.vertex_count()
    }
    fn accepts(&self, xi: &[f64]) -> bool {
        in_cut_domain_forest(&self.forest, xi, self.c_reg_prime)
    }
}

/// `e^{it S_root} / Π_v (i S_v)`.
pub fn skeleton_kernel_eval(tree: &DecoratedTree, t: f64, xi: &[f64]) -> Result<Complex64> {
    let sums = subtree_sums(tree, xi)?;
    let mut den = Complex64::new(1.0, 0.0);
    for &(id, s) in &sums {
        if s == 0.0 {
            return Err(Error::VanishingSubtreeSum { vertex: id });
        }
        den *= I * s;
    }
    Ok(cis(t * sums[0].1) / den)
}

/// Vertex sets are bitmasks over the three frequency positions.
type Mask = u8;

/// A tree of the expansion compiled for fast evaluation.
#[derive(Debug, Clone)]
struct TreePlan {
    mask: Mask,
    root: usize,
    /// `(vertex, mask of its subtree)` for every member, root first.
    subtrees: Vec<(usize, Mask)>,
    /// Admissible cuts as (root part, upper branches).
    cuts: Vec<(TreePlan, Vec<TreePlan>)>,
}

impl TreePlan {
    /// `tree` must carry ids `position + 1`.
    fn compile(tree: &DecoratedTree) -> TreePlan {
        let pos = |k: usize| tree.ids()[k] - 1;
        let mask_of = |ks: &[usize]| ks.iter().fold(0u8, |m, &k| m | (1 << pos(k)));
        let subtrees = (0..tree.len())
            .map(|v| (pos(v), mask_of(&tree.subtree(v))))
            .collect();
        let cuts = enumerate_admissible_cuts(tree)
            .iter()
            .map(|cut| {
                let (left, right) = crate::tree::split_cut(tree, cut).expect("enumerated cuts are admissible");
                (
                    TreePlan::compile(&left),
                    right.trees.iter().map(TreePlan::compile).collect(),
                )
            })
            .collect();
        TreePlan {
            mask: mask_of(&(0..tree.len()).collect::<Vec<_>>()),
            root: pos(0),
            subtrees,
            cuts,
        }
    }

    fn size(&self) -> usize {
        self.subtrees.len()
    }
}

#[inline]
fn mask_sum(xi: &[f64; 3], m: Mask) -> f64 {
    (0..3).filter(|k| m & (1 << k) != 0).map(|k| xi[k]).sum()
}

#[inline]
fn mask_max(xi: &[f64; 3], m: Mask) -> f64 {
    (0..3).filter(|k| m & (1 << k) != 0).map(|k| xi[k].abs()).fold(0.0, f64::max)
}

/// Cut constants by tree size: two-vertex trees use `c_reg` (they are the
/// second-order objects), larger trees `c_reg_prime`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutConstants {
    pub c_reg: f64,
    pub c_reg_prime: f64,
}

impl CutConstants {
    fn for_size(&self, n: usize) -> f64 {
        if n <= 2 {
            self.c_reg
        } else {
            self.c_reg_prime
        }
    }
}

impl TreePlan {
    fn accepted(&self, xi: &[f64; 3], c: &CutConstants) -> bool {
        let n = self.size();
        if n < 2 {
            return true;
        }
        let cv = c.for_size(n);
        self.subtrees
            .iter()
            .filter(|(_, m)| m.count_ones() >= 2)
            .all(|&(_, m)| mask_sum(xi, m).abs() > cv * mask_max(xi, m))
    }

    /// Regularized skeleton `χ_T · e^{iu S_root} / Π_v (i S_v)`.
    fn reg_skeleton(&self, xi: &[f64; 3], u: f64, c: &CutConstants) -> Complex64 {
        if !self.accepted(xi, c) {
            return Complex64::new(0.0, 0.0);
        }
        let mut den = Complex64::new(1.0, 0.0);
        for &(_, m) in &self.subtrees {
            den *= I * mask_sum(xi, m);
        }
        cis(u * mask_sum(xi, self.mask)) / den
    }

    /// Kernel of the regularized tree integral over `[u, t]`: the skeleton
    /// increment minus the cut terms, recursively.
    fn reg_integral(&self, xi: &[f64; 3], t: f64, u: f64, c: &CutConstants) -> Complex64 {
        if self.size() == 1 {
            return phase_increment(t, u, xi[self.root]);
        }
        let mut k = Complex64::new(0.0, 0.0);
        if self.accepted(xi, c) {
            let mut den = Complex64::new(1.0, 0.0);
            for &(_, m) in &self.subtrees[1..] {
                den *= I * mask_sum(xi, m);
            }
            k = phase_increment(t, u, mask_sum(xi, self.mask)) / den;
        }
        for (left, right) in &self.cuts {
            let mut r = left.reg_integral(xi, t, u, c);
            for branch in right {
                r *= branch.reg_skeleton(xi, u, c);
            }
            k -= r;
        }
        k
    }
}

/// The signed forests of one integration order, compiled.
#[derive(Debug, Clone)]
struct ExpansionPlan {
    /// Slot (0-based) integrated at each position.
    slots: [usize; 3],
    terms: Vec<(f64, Vec<TreePlan>)>,
}

/// Regularized third-order kernel: for every ordering of the three
/// frequencies, the Fubini expansion into signed forests with each forest
/// integral replaced by its regularized skeleton recursion.
#[derive(Debug, Clone)]
pub struct Order3Kernel {
    constants: CutConstants,
    plans: Vec<ExpansionPlan>,
}

const PERMUTATIONS: [[usize; 3]; 6] = [[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]];

impl Order3Kernel {
    pub fn new(c_reg: f64, c_reg_prime: f64) -> Result<Self> {
        check_c_reg("c_reg", c_reg)?;
        check_c_reg("c_reg_prime", c_reg_prime)?;
        let plans = PERMUTATIONS
            .iter()
            .map(|sigma| {
                let expansion = fubini_expand(sigma).expect("fixed permutations are valid");
                ExpansionPlan {
                    slots: [sigma[0] - 1, sigma[1] - 1, sigma[2] - 1],
                    terms: expansion
                        .terms
                        .iter()
                        .map(|(sign, forest)| (f64::from(*sign), forest.trees.iter().map(TreePlan::compile).collect()))
                        .collect(),
                }
            })
            .collect();
        Ok(Order3Kernel {
            constants: CutConstants { c_reg, c_reg_prime },
            plans,
        })
    }

    pub fn constants(&self) -> CutConstants {
        self.constants
    }

    /// Kernel at frequencies given per slot of
    /// `∫_s^t dB(1) ∫_s^{u1} dB(2) ∫_s^{u2} dB(3)`. The ordering is by `key`
    /// (ties broken by slot), normally the bin index of each frequency.
    pub fn eval_keyed(&self, t: f64, s: f64, xi: [f64; 3], key: [usize; 3]) -> Complex64 {
        let mut order = [0usize, 1, 2];
        order.sort_by_key(|&k| (key[k], k));
        let plan = self
            .plans
            .iter()
            .find(|p| p.slots == order)
            .expect("every ordering has a plan");
        let pos = [xi[order[0]], xi[order[1]], xi[order[2]]];
        let mut total = Complex64::new(0.0, 0.0);
        for (sign, forest) in &plan.terms {
            let mut prod = Complex64::new(*sign, 0.0);
            for tree in forest {
                prod *= tree.reg_integral(&pos, t, s, &self.constants);
            }
            total += prod;
        }
        total
    }

    /// [`eval_keyed`](Self::eval_keyed) ordering by `|ξ|`, ties by slot.
    pub fn eval(&self, t: f64, s: f64, xi: [f64; 3]) -> Complex64 {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| xi[a].abs().total_cmp(&xi[b].abs()).then(a.cmp(&b)));
        let mut key = [0usize; 3];
        for (rank, &k) in order.iter().enumerate() {
            key[k] = rank;
        }
        self.eval_keyed(t, s, xi, key)
    }
}

/// One-shot form of [`Order3Kernel::eval`].
pub fn order3_kernel_regularized(t: f64, s: f64, xi: [f64; 3], c_reg: f64, c_reg_prime: f64) -> Result<Complex64> {
    Ok(Order3Kernel::new(c_reg, c_reg_prime)?.eval(t, s, xi))
}

/// A node of the three-slot noise sum: signed frequency, bin and sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotNode {
    pub xi: f64,
    pub bin: usize,
    pub positive: bool,
}

/// `A³ Σ φ(ξ1)φ(ξ2)φ(ξ3) K(nodes) Z_{c1}(n1) Z_{c2}(n2) Z_{c3}(n3)` over
/// signed nodes, as twice the real part of the half with `ξ1 > 0`.
pub fn order3_noise_sum<K>(
    params: &ModelParams,
    noise: &SpectralNoiseField,
    components: [usize; 3],
    kernel: K,
) -> Result<f64>
where
    K: Fn([SlotNode; 3]) -> Result<Complex64> + Sync,
{
    let needed = components.iter().max().unwrap() + 1;
    noise.check(noise.grid(), needed)?;
    let bins = &noise.grid().bins;
    let n = bins.len();
    let signed: Vec<SlotNode> = (0..n)
        .rev()
        .map(|k| SlotNode {
            xi: -bins[k].center,
            bin: k,
            positive: false,
        })
        .chain((0..n).map(|k| SlotNode {
            xi: bins[k].center,
            bin: k,
            positive: true,
        }))
        .collect();
    let weighted = |c: usize| -> Vec<Complex64> {
        signed
            .iter()
            .map(|nd| noise.at(c, nd.bin, nd.positive) * params.spectral_weight(nd.xi))
            .collect()
    };
    let (z1, z2, z3) = (weighted(components[0]), weighted(components[1]), weighted(components[2]));
    let sum = reduce_rows(n, Execution::default(), |r| {
        let a = n + r;
        let mut row = Complex64::new(0.0, 0.0);
        for b in 0..2 * n {
            let mut inner = Complex64::new(0.0, 0.0);
            for c in 0..2 * n {
                inner += kernel([signed[a], signed[b], signed[c]])? * z3[c];
            }
            row += inner * z2[b];
        }
        Ok(row * z1[a])
    })?;
    let amp = params.amplitude();
    Ok(2.0 * amp * amp * amp * sum.re)
}

/// `𝓡B³_ts(c1, c2, c3)` on the noise: the sum over all orderings of the
/// regularized forest integrals from [`Order3Kernel`]. `components` are
/// 0-based noise indices.
#[allow(clippy::too_many_arguments)]
pub fn regularized_integral_order3(
    params: &ModelParams,
    c_reg: f64,
    c_reg_prime: f64,
    grid: &FrequencyGrid,
    noise: &SpectralNoiseField,
    s: f64,
    t: f64,
    components: [usize; 3],
) -> Result<f64> {
    if params.eps.is_nan() || params.eps <= 0.0 {
        return Err(Error::OutOfRange {
            name: "eps",
            value: params.eps,
            range: "(0, inf) for sampling",
        });
    }
    noise.check(grid, components.iter().max().unwrap() + 1)?;
    let kernel = Order3Kernel::new(c_reg, c_reg_prime)?;
    order3_noise_sum(params, noise, components, |n| {
        Ok(kernel.eval_keyed(t, s, [n[0].xi, n[1].xi, n[2].xi], [n[0].bin, n[1].bin, n[2].bin]))
    })
}

/// `Σ f(ξ) Π w` over normal-ordered signed tuples `|ξ_1| ≤ ... ≤ |ξ_n|`
/// (n = 2 or 3) of bin centres. Tuples with tied bins are weighted by
/// `1 / Π m!` for tie multiplicities `m`, the share of the tied cell lying in
/// the ordered region. The last frequency is taken positive and the result
/// doubled, so `f` must be invariant under the global sign flip.
pub fn quad_normal_ordered<F>(grid: &FrequencyGrid, arity: usize, exec: Execution, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if !(2..=3).contains(&arity) {
        return Err(Error::invalid("normal-ordered quadrature supports arity 2 or 3"));
    }
    let bins = &grid.bins;
    let n = bins.len();
    let total = reduce_rows(n, exec, |k| {
        let bk = bins[k];
        let mut row = 0.0;
        let mut visit = |xi: &[f64], w: f64| -> Result<()> {
            let v = f(xi);
            if !v.is_finite() {
                return Err(Error::NonFiniteKernel { node: xi.to_vec() });
            }
            row += v * w;
            Ok(())
        };
        if arity == 2 {
            for (i, bi) in bins[..=k].iter().enumerate() {
                let w = bi.width * if i == k { 0.5 } else { 1.0 };
                for s1 in [-1.0, 1.0] {
                    visit(&[s1 * bi.center, bk.center], w)?;
                }
            }
        } else {
            for j in 0..=k {
                for i in 0..=j {
                    let tie = match (i == j, j == k) {
                        (true, true) => 1.0 / 6.0,
                        (true, false) | (false, true) => 0.5,
                        (false, false) => 1.0,
                    };
                    let w = bins[i].width * bins[j].width * tie;
                    for s1 in [-1.0, 1.0] {
                        for s2 in [-1.0, 1.0] {
                            visit(&[s1 * bins[i].center, s2 * bins[j].center, bk.center], w)?;
                        }
                    }
                }
            }
        }
        Ok(row * bk.width)
    })?;
    Ok(2.0 * total)
}

/// `E|δ𝓡Sk I_T|²_ts` for a tree with 2 or 3 vertices and distinct labels:
/// the normal-ordered quadrature of
/// `A^{2n} |P(t,s,S_root)|² Π_{v≠root} |S_v|^{-2} Π ρ(ξ)` over the cut domain,
/// `ρ(ξ) = e^{-2ε|ξ|}|ξ|^{1-2α}`.
pub fn variance_skeleton_regularized(
    tree: &DecoratedTree,
    params: &ModelParams,
    c_reg_prime: f64,
    grid: &FrequencyGrid,
    s: f64,
    t: f64,
) -> Result<f64> {
    skeleton_variance(tree, params, c_reg_prime, grid, s, t, |xi| {
        xi.iter().map(|&x| params.spectral_density(x)).product()
    })
}

/// `E|δ𝓡Sk I_T^ε − δ𝓡Sk I_T^η|²_ts`: as [`variance_skeleton_regularized`]
/// with the smoothing factor replaced by `(e^{-ε Σ|ξ|} − e^{-η Σ|ξ|})²`.
#[allow(clippy::too_many_arguments)]
pub fn variance_skeleton_rate(
    tree: &DecoratedTree,
    params: &ModelParams,
    eps_eta: (f64, f64),
    c_reg_prime: f64,
    grid: &FrequencyGrid,
    s: f64,
    t: f64,
) -> Result<f64> {
    let (eps, eta) = eps_eta;
    if !(eps > 0.0 && eta > 0.0) {
        return Err(Error::invalid("rate needs eps, eta > 0"));
    }
    let power = 1.0 - 2.0 * params.alpha;
    skeleton_variance(tree, params, c_reg_prime, grid, s, t, |xi| {
        let l1: f64 = xi.iter().map(|x| x.abs()).sum();
        let dw = libm::exp(-eps * l1) - libm::exp(-eta * l1);
        xi.iter().map(|&x| libm::pow(x.abs(), power)).product::<f64>() * dw * dw
    })
}

fn skeleton_variance<W>(
    tree: &DecoratedTree,
    params: &ModelParams,
    c_reg_prime: f64,
    grid: &FrequencyGrid,
    s: f64,
    t: f64,
    weight: W,
) -> Result<f64>
where
    W: Fn(&[f64]) -> f64 + Sync,
{
    check_c_reg("c_reg_prime", c_reg_prime)?;
    let n = tree.len();
    if !(2..=3).contains(&n) {
        return Err(Error::InvalidTree("skeleton variance needs 2 or 3 vertices".into()));
    }
    let masks: Vec<Vec<usize>> = (0..n).map(|v| tree.subtree(v)).collect();
    let v = quad_normal_ordered(grid, n, Execution::default(), |xi| {
        if !in_cut_domain_tree(tree, xi, c_reg_prime) {
            return 0.0;
        }
        let sum = |v: usize| masks[v].iter().map(|&w| xi[w]).sum::<f64>();
        let mut den = 1.0;
        for v in 1..n {
            let sv = sum(v);
            den *= sv * sv;
        }
        phase_increment(t, s, sum(0)).norm_sqr() / den * weight(xi)
    })?;
    let a2 = params.amplitude() * params.amplitude();
    Ok(libm::pow(a2, n as f64) * v)
}

/// The five forests of the orderings 123, 213 and 231, in the order `T1`, `T2,1`,
/// `T2,2`, `T3,1`, `T3,2`, as produced by [`fubini_expand`].
pub fn reference_forests() -> Vec<DecoratedForest> {
    let mut out = Vec::new();
    for sigma in [[1, 2, 3], [2, 1, 3], [2, 3, 1]] {
        for (_, f) in fubini_expand(&sigma).expect("valid permutation").terms {
            out.push(f);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subtree_sum_examples() {
        let chain = DecoratedTree::chain(&[1, 2, 3]).unwrap();
        let sums = subtree_sums(&chain, &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(sums, vec![(1, 7.0), (2, 6.0), (3, 4.0)]);
        let cherry = DecoratedTree::parse("[1[2][3]]").unwrap();
        let sums = subtree_sums(&cherry, &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(sums, vec![(1, 7.0), (2, 2.0), (3, 4.0)]);
        assert_eq!(subtree_sums(&DecoratedTree::singleton(1), &[0.3]).unwrap(), vec![(1, 0.3)]);
    }

    #[test]
    fn chain_cut_examples() {
        let chain = DecoratedTree::chain(&[1, 2, 3]).unwrap();
        assert!(in_cut_domain_tree(&chain, &[0.1, 0.5, 1.0], 0.5));
        assert!(!in_cut_domain_tree(&chain, &[0.1, -1.0, 1.0], 0.5));
        assert!(!in_cut_domain_tree(&chain, &[1.0, 0.5, 2.0], 0.5));
    }

    #[test]
    fn skeleton_examples() {
        let chain = DecoratedTree::chain(&[1, 2, 3]).unwrap();
        let v = skeleton_kernel_eval(&chain, 0.0, &[1.0, 1.0, 1.0]).unwrap();
        assert!((v - Complex64::new(0.0, 1.0 / 6.0)).norm() < 1e-15);
        let err = skeleton_kernel_eval(&chain, 0.0, &[1.0, -1.0, 1.0]);
        assert_eq!(err, Err(Error::VanishingSubtreeSum { vertex: 2 }));
    }

    #[test]
    fn reference_forest_shapes() {
        let f: Vec<String> = reference_forests().iter().map(|f| f.to_bracket()).collect();
        assert_eq!(f, ["[1[2[3]]]", "[2[3]][1]", "[2[1][3]]", "[2[3]][1]", "[2[3][1]]"]);
    }

    #[test]
    fn normal_ordered_weights_cover_the_cube() {
        // constant integrand: the ordered region is 1/n! of the signed cube
        let g = crate::spectral::build_grid(1.0, 7, crate::spectral::GridScheme::Linear).unwrap();
        let v2 = quad_normal_ordered(&g, 2, Execution::Serial, |_| 1.0).unwrap();
        assert!((v2 - 4.0 / 2.0).abs() < 1e-14);
        let v3 = quad_normal_ordered(&g, 3, Execution::Serial, |_| 1.0).unwrap();
        assert!((v3 - 8.0 / 6.0).abs() < 1e-14);
    }
}
