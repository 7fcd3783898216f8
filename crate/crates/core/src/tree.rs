//! Decorated rooted trees and forests, admissible cuts, tree iterated
//! integrals of smooth paths and the Fubini expansion of iterated integrals
//! into signed forests.
//!
//! Trees are written in bracket notation: `[1[2][3]]` is a root labelled 1
//! with two children labelled 2 and 3; a forest is the concatenation of its
//! trees, e.g. `[2[3]][1]`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::special::gauss_legendre;

/// A rooted tree whose vertices carry component labels.
///
/// Vertices are stored root first; every vertex's parent appears before it,
/// and vertex ids increase along the stored order. Equality and hashing
/// ignore ids and compare the labelled shape only.
#[derive(Debug, Clone)]
pub struct DecoratedTree {
    ids: Vec<usize>,
    parents: Vec<Option<usize>>,
    labels: Vec<usize>,
}

impl DecoratedTree {
    /// `parents[k]` is the id of the parent of vertex `ids[k]` (`None` for the
    /// root, which must come first).
    pub fn new(ids: Vec<usize>, parents: Vec<Option<usize>>, labels: Vec<usize>) -> Result<Self> {
        let n = ids.len();
        if n == 0 || parents.len() != n || labels.len() != n {
            return Err(Error::InvalidTree(
                "ids, parents and labels must be nonempty and of equal length".into(),
            ));
        }
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTree("vertex ids must be strictly increasing".into()));
        }
        if parents[0].is_some() {
            return Err(Error::InvalidTree("the first vertex must be the root".into()));
        }
        let mut index_parents = Vec::with_capacity(n);
        index_parents.push(None);
        for k in 1..n {
            let pid = parents[k].ok_or_else(|| {
                Error::InvalidTree(format!("vertex {} has no parent but is not the root", ids[k]))
            })?;
            let p = ids[..k].iter().position(|&id| id == pid).ok_or_else(|| {
                Error::InvalidTree(format!("parent {pid} of vertex {} must precede it", ids[k]))
            })?;
            index_parents.push(Some(p));
        }
        Ok(DecoratedTree {
            ids,
            parents: index_parents,
            labels,
        })
    }

    /// Tree with ids `1..=n` from parent indices (0-based, each smaller than
    /// the vertex's own index).
    pub fn from_parent_indices(parents: &[Option<usize>], labels: &[usize]) -> Result<Self> {
        let ids: Vec<usize> = (1..=parents.len()).collect();
        let pids = parents.iter().map(|p| p.map(|i| i + 1)).collect();
        DecoratedTree::new(ids, pids, labels.to_vec())
    }

    pub fn singleton(label: usize) -> Self {
        DecoratedTree {
            ids: vec![1],
            parents: vec![None],
            labels: vec![label],
        }
    }

    /// Linear tree: the first label is the root.
    pub fn chain(labels: &[usize]) -> Result<Self> {
        let parents: Vec<Option<usize>> = (0..labels.len()).map(|k| k.checked_sub(1)).collect();
        DecoratedTree::from_parent_indices(&parents, labels)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Parent index of the vertex at `index`.
    pub fn parent(&self, index: usize) -> Option<usize> {
        self.parents[index]
    }

    pub fn parent_indices(&self) -> &[Option<usize>] {
        &self.parents
    }

    pub fn index_of(&self, id: usize) -> Option<usize> {
        self.ids.iter().position(|&v| v == id)
    }

    pub fn children(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        (index + 1..self.len()).filter(move |&k| self.parents[k] == Some(index))
    }

    /// Whether `a` lies on the path from `b` down to the root (strictly).
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let mut cur = self.parents[b];
        while let Some(p) = cur {
            if p == a {
                return true;
            }
            cur = self.parents[p];
        }
        false
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        a == b || self.is_ancestor(a, b) || self.is_ancestor(b, a)
    }

    /// Indices of `index` and all its descendants, ascending.
    pub fn subtree(&self, index: usize) -> Vec<usize> {
        (index..self.len())
            .filter(|&k| k == index || self.is_ancestor(index, k))
            .collect()
    }

    /// The tree spanned by a set of indices closed under taking parents
    /// (except for its own root). Ids are preserved.
    fn restrict(&self, indices: &[usize]) -> DecoratedTree {
        let ids: Vec<usize> = indices.iter().map(|&k| self.ids[k]).collect();
        let parents = indices
            .iter()
            .enumerate()
            .map(|(pos, &k)| {
                if pos == 0 {
                    None
                } else {
                    self.parents[k].map(|p| indices.iter().position(|&q| q == p).unwrap())
                }
            })
            .collect();
        let labels = indices.iter().map(|&k| self.labels[k]).collect();
        DecoratedTree {
            ids,
            parents,
            labels,
        }
    }

    fn write_bracket(&self, index: usize, sorted: bool, out: &mut String) {
        out.push('[');
        out.push_str(&self.labels[index].to_string());
        if sorted {
            let mut kids: Vec<String> = self
                .children(index)
                .map(|c| {
                    let mut s = String::new();
                    self.write_bracket(c, true, &mut s);
                    s
                })
                .collect();
            kids.sort();
            for k in kids {
                out.push_str(&k);
            }
        } else {
            for c in self.children(index).collect::<Vec<_>>() {
                self.write_bracket(c, false, out);
            }
        }
        out.push(']');
    }

    /// Bracket string with children in vertex order.
    pub fn to_bracket(&self) -> String {
        let mut s = String::new();
        self.write_bracket(0, false, &mut s);
        s
    }

    /// Bracket string with children sorted; equal for isomorphic trees.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        self.write_bracket(0, true, &mut s);
        s
    }

    /// Parses a single tree; ids are assigned in preorder from 1.
    pub fn parse(text: &str) -> Result<Self> {
        let forest = DecoratedForest::parse(text)?;
        let mut trees = forest.trees;
        if trees.len() != 1 {
            return Err(Error::InvalidTree(format!("expected one tree in {text:?}")));
        }
        Ok(trees.remove(0))
    }
}

impl PartialEq for DecoratedTree {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for DecoratedTree {}

impl Hash for DecoratedTree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical().hash(state);
    }
}

impl fmt::Display for DecoratedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bracket())
    }
}

/// Commutative product of trees.
#[derive(Debug, Clone, Default)]
pub struct DecoratedForest {
    pub trees: Vec<DecoratedTree>,
}

impl DecoratedForest {
    pub fn new(trees: Vec<DecoratedTree>) -> Self {
        DecoratedForest { trees }
    }

    pub fn vertex_count(&self) -> usize {
        self.trees.iter().map(DecoratedTree::len).sum()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.trees.iter().flat_map(|t| t.labels().iter().copied()).collect()
    }

    pub fn to_bracket(&self) -> String {
        self.trees.iter().map(DecoratedTree::to_bracket).collect()
    }

    pub fn canonical(&self) -> String {
        let mut parts: Vec<String> = self.trees.iter().map(DecoratedTree::canonical).collect();
        parts.sort();
        parts.concat()
    }

    /// Parses a concatenation of bracket trees. Ids run in preorder from 1
    /// across the whole forest.
    pub fn parse(text: &str) -> Result<Self> {
        let bytes: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let mut next_id = 1;
        let mut trees = Vec::new();
        while pos < bytes.len() {
            let mut ids = Vec::new();
            let mut parents = Vec::new();
            let mut labels = Vec::new();
            parse_vertex(&bytes, &mut pos, None, &mut next_id, &mut ids, &mut parents, &mut labels)?;
            trees.push(DecoratedTree::new(ids, parents, labels)?);
        }
        if trees.is_empty() {
            return Err(Error::InvalidTree("empty forest".into()));
        }
        Ok(DecoratedForest { trees })
    }
}

fn parse_vertex(
    text: &[char],
    pos: &mut usize,
    parent: Option<usize>,
    next_id: &mut usize,
    ids: &mut Vec<usize>,
    parents: &mut Vec<Option<usize>>,
    labels: &mut Vec<usize>,
) -> Result<()> {
    let err = |msg: &str, at: usize| Error::InvalidTree(format!("{msg} at position {at}"));
    if text.get(*pos) != Some(&'[') {
        return Err(err("expected '['", *pos));
    }
    *pos += 1;
    let start = *pos;
    while text.get(*pos).is_some_and(|c| c.is_ascii_digit()) {
        *pos += 1;
    }
    if start == *pos {
        return Err(err("expected a label", start));
    }
    let label: String = text[start..*pos].iter().collect();
    let label = label.parse().map_err(|_| err("label out of range", start))?;
    let id = *next_id;
    *next_id += 1;
    ids.push(id);
    parents.push(parent);
    labels.push(label);
    while text.get(*pos) == Some(&'[') {
        parse_vertex(text, pos, Some(id), next_id, ids, parents, labels)?;
    }
    if text.get(*pos) != Some(&']') {
        return Err(err("expected ']'", *pos));
    }
    *pos += 1;
    Ok(())
}

impl PartialEq for DecoratedForest {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for DecoratedForest {}

impl Hash for DecoratedForest {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical().hash(state);
    }
}

impl fmt::Display for DecoratedForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bracket())
    }
}

/// A nonempty set of pairwise incomparable non-root vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdmissibleCut {
    pub cut_vertices: Vec<usize>,
}

impl AdmissibleCut {
    pub fn new(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        AdmissibleCut { cut_vertices: ids }
    }

    fn indices(&self, tree: &DecoratedTree) -> Result<Vec<usize>> {
        if self.cut_vertices.is_empty() {
            return Err(Error::InadmissibleCut("empty cut".into()));
        }
        let idx = self
            .cut_vertices
            .iter()
            .map(|&id| match tree.index_of(id) {
                Some(0) => Err(Error::InadmissibleCut(format!("{id} is the root"))),
                Some(k) => Ok(k),
                None => Err(Error::InadmissibleCut(format!("{id} is not a vertex"))),
            })
            .collect::<Result<Vec<_>>>()?;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                if tree.comparable(i, j) {
                    return Err(Error::InadmissibleCut(format!(
                        "{} and {} lie on a common branch",
                        tree.ids[i], tree.ids[j]
                    )));
                }
            }
        }
        Ok(idx)
    }
}

/// All nonempty antichains of non-root vertices, ordered by size then ids.
pub fn enumerate_admissible_cuts(tree: &DecoratedTree) -> Vec<AdmissibleCut> {
    fn extend(tree: &DecoratedTree, from: usize, chosen: &mut Vec<usize>, out: &mut Vec<AdmissibleCut>) {
        for v in from..tree.len() {
            if chosen.iter().all(|&c| !tree.comparable(c, v)) {
                chosen.push(v);
                out.push(AdmissibleCut::new(chosen.iter().map(|&k| tree.ids[k]).collect()));
                extend(tree, v + 1, chosen, out);
                chosen.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(tree, 1, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| {
        a.cut_vertices
            .len()
            .cmp(&b.cut_vertices.len())
            .then_with(|| a.cut_vertices.cmp(&b.cut_vertices))
    });
    out
}

/// Splits `tree` along `cut` into the part containing the root and the forest
/// of branches above (and including) the cut vertices. Ids and labels are
/// preserved.
pub fn split_cut(tree: &DecoratedTree, cut: &AdmissibleCut) -> Result<(DecoratedTree, DecoratedForest)> {
    let idx = cut.indices(tree)?;
    let mut removed = BTreeSet::new();
    let mut right = Vec::with_capacity(idx.len());
    for &v in &idx {
        let sub = tree.subtree(v);
        removed.extend(sub.iter().copied());
        right.push(tree.restrict(&sub));
    }
    let keep: Vec<usize> = (0..tree.len()).filter(|k| !removed.contains(k)).collect();
    Ok((tree.restrict(&keep), DecoratedForest::new(right)))
}

/// A `d`-component path with a continuous derivative.
pub trait SmoothPath {
    fn dim(&self) -> usize;
    fn value(&self, component: usize, t: f64) -> f64;
    fn derivative(&self, component: usize, t: f64) -> f64;
}

/// Polynomial components, coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPath {
    pub coeffs: Vec<Vec<f64>>,
}

impl PolynomialPath {
    pub fn new(coeffs: Vec<Vec<f64>>) -> Self {
        PolynomialPath { coeffs }
    }

    /// `Γ(u) = (u, ..., u)` in `d` components.
    pub fn identity(d: usize) -> Self {
        PolynomialPath::new(vec![vec![0.0, 1.0]; d])
    }
}

impl SmoothPath for PolynomialPath {
    fn dim(&self) -> usize {
        self.coeffs.len()
    }

    fn value(&self, c: usize, t: f64) -> f64 {
        self.coeffs[c].iter().rev().fold(0.0, |acc, a| acc * t + a)
    }

    fn derivative(&self, c: usize, t: f64) -> f64 {
        let p = &self.coeffs[c];
        (1..p.len()).rev().fold(0.0, |acc, k| acc * t + k as f64 * p[k])
    }
}

/// Components `Σ_m a_m sin(ω_m t + φ_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPath {
    /// Per component, a list of `(amplitude, frequency, phase)`.
    pub modes: Vec<Vec<(f64, f64, f64)>>,
}

impl TrigPath {
    pub fn new(modes: Vec<Vec<(f64, f64, f64)>>) -> Self {
        TrigPath { modes }
    }

    /// A fixed `d`-component test path with incommensurate frequencies.
    pub fn standard(d: usize) -> Self {
        let modes = (0..d)
            .map(|c| {
                let c = c as f64;
                vec![(1.0, 1.0 + 0.7 * c, 0.3 * c), (0.4, 2.3 + 0.5 * c, 1.1 - 0.2 * c)]
            })
            .collect();
        TrigPath::new(modes)
    }
}

impl SmoothPath for TrigPath {
    fn dim(&self) -> usize {
        self.modes.len()
    }

    fn value(&self, c: usize, t: f64) -> f64 {
        self.modes[c].iter().map(|&(a, w, p)| a * libm::sin(w * t + p)).sum()
    }

    fn derivative(&self, c: usize, t: f64) -> f64 {
        self.modes[c].iter().map(|&(a, w, p)| a * w * libm::cos(w * t + p)).sum()
    }
}

/// Nested Gauss–Legendre quadrature for tree iterated integrals.
#[derive(Debug, Clone)]
pub struct TreeIntegrator {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for TreeIntegrator {
    fn default() -> Self {
        TreeIntegrator::new(64)
    }
}

impl TreeIntegrator {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n.max(1));
        TreeIntegrator { nodes, weights }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn vertex<P: SmoothPath + ?Sized>(&self, tree: &DecoratedTree, v: usize, path: &P, s: f64, upper: f64) -> f64 {
        let c = tree.labels[v] - 1;
        let kids: Vec<usize> = tree.children(v).collect();
        if kids.is_empty() {
            return path.value(c, upper) - path.value(c, s);
        }
        let half = 0.5 * (upper - s);
        let mid = 0.5 * (upper + s);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let u = mid + half * x;
            let inner: f64 = kids.iter().map(|&k| self.vertex(tree, k, path, s, u)).product();
            acc += w * path.derivative(c, u) * inner;
        }
        acc * half
    }

    pub fn tree<P: SmoothPath + ?Sized>(&self, tree: &DecoratedTree, path: &P, s: f64, t: f64) -> Result<f64> {
        if let Some(&l) = tree.labels.iter().find(|&&l| l == 0 || l > path.dim()) {
            return Err(Error::InvalidTree(format!(
                "label {l} outside the path components 1..={}",
                path.dim()
            )));
        }
        let v = self.vertex(tree, 0, path, s, t);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteKernel { node: vec![s, t] })
        }
    }

    pub fn forest<P: SmoothPath + ?Sized>(&self, forest: &DecoratedForest, path: &P, s: f64, t: f64) -> Result<f64> {
        forest.trees.iter().try_fold(1.0, |acc, tr| Ok(acc * self.tree(tr, path, s, t)?))
    }
}

/// `[I_F(Γ)]_ts`, the product of the tree iterated integrals of the forest's
/// components, with the default 64-node rule.
pub fn tree_integral<P: SmoothPath + ?Sized>(forest: &DecoratedForest, path: &P, s: f64, t: f64) -> Result<f64> {
    TreeIntegrator::default().forest(forest, path, s, t)
}

/// `|[δI_T]_tus − Σ_cuts [I_L]_tu [I_R]_us|` with `[δI]_tus = I_ts − I_tu − I_us`.
pub fn check_tree_chen<P: SmoothPath + ?Sized>(
    tree: &DecoratedTree,
    path: &P,
    s: f64,
    u: f64,
    t: f64,
    integrator: &TreeIntegrator,
) -> Result<f64> {
    let delta = integrator.tree(tree, path, s, t)? - integrator.tree(tree, path, s, u)? - integrator.tree(tree, path, u, t)?;
    let mut cuts = 0.0;
    for cut in enumerate_admissible_cuts(tree) {
        let (left, right) = split_cut(tree, &cut)?;
        cuts += integrator.tree(&left, path, u, t)? * integrator.forest(&right, path, s, u)?;
    }
    Ok((delta - cuts).abs())
}

/// Residual of `[I_T]_tu = Sk_t − Sk_u − Σ_cuts [I_L]_tu [Sk_R]_u` where the
/// skeleton is replaced by the finite-base integral `Sk_x = [I]_{x,base}`.
pub fn check_skeleton_decomposition<P: SmoothPath + ?Sized>(
    tree: &DecoratedTree,
    path: &P,
    base: f64,
    u: f64,
    t: f64,
    integrator: &TreeIntegrator,
) -> Result<f64> {
    let direct = integrator.tree(tree, path, u, t)?;
    let mut rhs = integrator.tree(tree, path, base, t)? - integrator.tree(tree, path, base, u)?;
    for cut in enumerate_admissible_cuts(tree) {
        let (left, right) = split_cut(tree, &cut)?;
        rhs -= integrator.tree(&left, path, u, t)? * integrator.forest(&right, path, base, u)?;
    }
    Ok((direct - rhs).abs())
}

/// Signed linear combination of forests.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SignedForestSum {
    pub terms: Vec<(i8, DecoratedForest)>,
}

impl SignedForestSum {
    pub fn evaluate<P: SmoothPath + ?Sized>(&self, path: &P, s: f64, t: f64, integrator: &TreeIntegrator) -> Result<f64> {
        self.terms.iter().try_fold(0.0, |acc, (sign, f)| {
            Ok(acc + f64::from(*sign) * integrator.forest(f, path, s, t)?)
        })
    }

    pub fn to_bracket(&self) -> String {
        let mut out = String::new();
        for (k, (sign, forest)) in self.terms.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            out.push(if *sign > 0 { '+' } else { '-' });
            out.push_str(&forest.to_bracket());
        }
        out
    }
}

impl fmt::Display for SignedForestSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bracket())
    }
}

fn check_permutation(sigma: &[usize]) -> Result<()> {
    let n = sigma.len();
    let mut seen = vec![false; n + 1];
    for &k in sigma {
        if k == 0 || k > n || seen[k] {
            return Err(Error::invalid(format!("{sigma:?} is not a permutation of 1..={n}")));
        }
        seen[k] = true;
    }
    if n == 0 {
        return Err(Error::invalid("empty permutation"));
    }
    Ok(())
}

/// Rewrites `∫_s^t dΓ(1) ∫_s^{u_1} dΓ(2) ... ∫_s^{u_{n-1}} dΓ(n)` with the
/// variables integrated in the order `sigma` (outermost first) as a signed
/// sum of forests.
///
/// Each variable's range `(lower, upper)`, set by the variables already
/// integrated, is split as `∫_s^{upper} − ∫_s^{lower}`. Vertex `j` (id
/// `j + 1`) is the variable integrated at position `j` and carries label
/// `sigma[j]`; its parent is the variable bounding it from above in the
/// chosen term, or none when the bound is `t`.
pub fn fubini_expand(sigma: &[usize]) -> Result<SignedForestSum> {
    check_permutation(sigma)?;
    let mut partial: Vec<(i8, Vec<Option<usize>>)> = vec![(1, Vec::new())];
    for (j, &k) in sigma.iter().enumerate() {
        let outer = &sigma[..j];
        let upper = outer
            .iter()
            .enumerate()
            .filter(|(_, &m)| m < k)
            .max_by_key(|(_, &m)| m)
            .map(|(pos, _)| pos);
        let lower = outer
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > k)
            .min_by_key(|(_, &m)| m)
            .map(|(pos, _)| pos);
        let mut next = Vec::with_capacity(partial.len() * 2);
        for (sign, parents) in &partial {
            let mut a = parents.clone();
            a.push(upper);
            next.push((*sign, a));
            if let Some(low) = lower {
                let mut b = parents.clone();
                b.push(Some(low));
                next.push((-*sign, b));
            }
        }
        partial = next;
    }
    let terms = partial
        .into_iter()
        .map(|(sign, parents)| (sign, forest_from_parents(&parents, sigma)))
        .collect();
    Ok(SignedForestSum { terms })
}

/// Splits a parent array over positions `0..n` (parents precede children)
/// into trees; vertex `j` gets id `j + 1` and label `labels[j]`.
pub(crate) fn forest_from_parents(parents: &[Option<usize>], labels: &[usize]) -> DecoratedForest {
    let root_of = |mut v: usize| {
        while let Some(p) = parents[v] {
            v = p;
        }
        v
    };
    let trees = (0..parents.len())
        .filter(|&r| parents[r].is_none())
        .map(|r| {
            let members: Vec<usize> = (0..parents.len()).filter(|&v| root_of(v) == r).collect();
            DecoratedTree {
                ids: members.iter().map(|&v| v + 1).collect(),
                parents: members
                    .iter()
                    .map(|&v| parents[v].map(|p| members.iter().position(|&q| q == p).unwrap()))
                    .collect(),
                labels: members.iter().map(|&v| labels[v]).collect(),
            }
        })
        .collect();
    DecoratedForest::new(trees)
}

/// All interleavings of two words that keep each word's internal order.
pub fn shuffles(a: &[usize], b: &[usize]) -> Vec<Vec<usize>> {
    if a.is_empty() {
        return vec![b.to_vec()];
    }
    if b.is_empty() {
        return vec![a.to_vec()];
    }
    let mut out = Vec::new();
    for mut w in shuffles(&a[1..], b) {
        w.insert(0, a[0]);
        out.push(w);
    }
    for mut w in shuffles(a, &b[1..]) {
        w.insert(0, b[0]);
        out.push(w);
    }
    out
}

/// `|I(w1) I(w2) − Σ_{w ∈ w1 ⧢ w2} I(w)|` for linear-tree integrals of words
/// of component labels (1-based).
pub fn check_shuffle<P: SmoothPath + ?Sized>(
    w1: &[usize],
    w2: &[usize],
    path: &P,
    s: f64,
    t: f64,
    integrator: &TreeIntegrator,
) -> Result<f64> {
    if w1.is_empty() || w2.is_empty() {
        return Err(Error::invalid("shuffle needs two nonempty words"));
    }
    let word = |w: &[usize]| -> Result<f64> { integrator.tree(&DecoratedTree::chain(w)?, path, s, t) };
    let product = word(w1)? * word(w2)?;
    let mut sum = 0.0;
    for w in shuffles(w1, w2) {
        sum += word(&w)?;
    }
    Ok((product - sum).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cherry() -> DecoratedTree {
        DecoratedTree::parse("[1[2][3]]").unwrap()
    }

    #[test]
    fn bracket_round_trip() {
        let t = DecoratedTree::parse("[1[2[4]][3]]").unwrap();
        assert_eq!(t.ids(), &[1, 2, 3, 4]);
        assert_eq!(t.to_bracket(), "[1[2[4]][3]]");
        assert_eq!(t.canonical(), "[1[2[4]][3]]");
        assert_eq!(DecoratedTree::parse("[1[3][2[4]]]").unwrap(), t);
        assert!(DecoratedTree::parse("[1[2]").is_err());
        assert!(DecoratedTree::parse("[1][2]").is_err());
        assert_eq!(DecoratedForest::parse("[2[3]][1]").unwrap().vertex_count(), 3);
    }

    #[test]
    fn construction_is_validated() {
        assert!(DecoratedTree::new(vec![1, 2], vec![None, Some(3)], vec![1, 1]).is_err());
        assert!(DecoratedTree::new(vec![2, 1], vec![None, Some(2)], vec![1, 1]).is_err());
        assert!(DecoratedTree::new(vec![1, 2], vec![None, None], vec![1, 1]).is_err());
    }

    #[test]
    fn cherry_cuts() {
        let cuts = enumerate_admissible_cuts(&cherry());
        let ids: Vec<_> = cuts.iter().map(|c| c.cut_vertices.clone()).collect();
        assert_eq!(ids, vec![vec![2], vec![3], vec![2, 3]]);
        assert!(enumerate_admissible_cuts(&DecoratedTree::singleton(1)).is_empty());
        let chain = DecoratedTree::chain(&[1, 2, 3]).unwrap();
        let ids: Vec<_> = enumerate_admissible_cuts(&chain).into_iter().map(|c| c.cut_vertices).collect();
        assert_eq!(ids, vec![vec![2], vec![3]]);
    }

    #[test]
    fn split_examples() {
        let chain = DecoratedTree::chain(&[1, 2]).unwrap();
        let (l, r) = split_cut(&chain, &AdmissibleCut::new(vec![2])).unwrap();
        assert_eq!(l, DecoratedTree::singleton(1));
        assert_eq!(r, DecoratedForest::new(vec![DecoratedTree::singleton(2)]));
        let (l, r) = split_cut(&cherry(), &AdmissibleCut::new(vec![2, 3])).unwrap();
        assert_eq!(l.to_bracket(), "[1]");
        assert_eq!(r.to_bracket(), "[2][3]");
        assert_eq!(r.trees[1].ids(), &[3]);
        let bad = split_cut(&DecoratedTree::chain(&[1, 2, 3]).unwrap(), &AdmissibleCut::new(vec![2, 3]));
        assert!(matches!(bad, Err(Error::InadmissibleCut(_))));
        assert!(split_cut(&chain, &AdmissibleCut::new(vec![1])).is_err());
    }

    #[test]
    fn hand_computed_integrals() {
        let path = PolynomialPath::identity(3);
        let f = |s: &str| tree_integral(&DecoratedForest::parse(s).unwrap(), &path, 0.0, 1.0).unwrap();
        assert!((f("[1[2]]") - 0.5).abs() < 1e-14);
        assert!((f("[1[2[3]]]") - 1.0 / 6.0).abs() < 1e-14);
        assert!((f("[1[2][3]]") - 1.0 / 3.0).abs() < 1e-14);
        let trig = TrigPath::standard(2);
        let v = tree_integral(&DecoratedForest::parse("[2]").unwrap(), &trig, 0.3, 1.1).unwrap();
        assert!((v - (trig.value(1, 1.1) - trig.value(1, 0.3))).abs() < 1e-15);
    }

    #[test]
    fn fubini_reference_permutations() {
        let id = fubini_expand(&[1, 2, 3]).unwrap();
        assert_eq!(id.to_bracket(), "+[1[2[3]]]");
        let e2 = fubini_expand(&[2, 1, 3]).unwrap();
        assert_eq!(e2.to_bracket(), "+[2[3]][1] -[2[1][3]]");
        let e3 = fubini_expand(&[2, 3, 1]).unwrap();
        assert_eq!(e3.to_bracket(), "+[2[3]][1] -[2[3][1]]");
        assert_eq!(e3.terms[0].1.trees[0].ids(), &[1, 2]);
        assert_eq!(e2.terms[0].1.trees[0].ids(), &[1, 3]);
        assert!(fubini_expand(&[1, 1, 2]).is_err());
    }

    #[test]
    fn shuffle_words() {
        assert_eq!(shuffles(&[1], &[2, 3]).len(), 3);
        assert_eq!(shuffles(&[1, 2], &[3, 4]).len(), 6);
        let path = PolynomialPath::identity(3);
        let integ = TreeIntegrator::default();
        assert!(check_shuffle(&[1], &[2, 3], &path, 0.0, 1.0, &integ).unwrap() < 1e-15);
    }
}
