//! Newick ingestion and the depth/MRCA structure that every distance
//! transform is computed from.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NewickError {
    #[error("unbalanced parentheses at byte {offset}")]
    UnbalancedParentheses { offset: usize },
    #[error("duplicate leaf label {label:?} at byte {offset}")]
    DuplicateLeafLabel { label: String, offset: usize },
    #[error("negative branch length at byte {offset}")]
    NegativeBranchLength { offset: usize },
    #[error("empty tree at byte {offset}")]
    EmptyTree { offset: usize },
    #[error("missing branch length at byte {offset}")]
    MissingBranchLength { offset: usize },
    #[error("invalid branch length {text:?} at byte {offset}")]
    InvalidBranchLength { text: String, offset: usize },
    #[error("empty leaf label at byte {offset}")]
    EmptyLabel { offset: usize },
    #[error("expected ';' at byte {offset}")]
    MissingSemicolon { offset: usize },
    #[error("unexpected character {found:?} at byte {offset}")]
    UnexpectedCharacter { found: char, offset: usize },
    #[error("tree has {0} tips, at least 2 are required")]
    TooFewTips(usize),
    #[error("unknown tip {0:?}")]
    UnknownTip(String),
    #[error("relabelling maps two tips onto {0:?}")]
    DuplicateAfterRelabel(String),
    #[error("tree has zero depth; distances cannot be normalized")]
    ZeroDepth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Leaf label. Internal labels are discarded at parse time.
    pub label: Option<String>,
    /// Length of the edge leading to this node; 0 for the root.
    pub branch_length: f64,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Rooted tree with branch lengths. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyloTree {
    nodes: Vec<Node>,
    root: usize,
}

impl PhyloTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Leaf node ids in left-to-right (pre-order) order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            if node.is_leaf() {
                out.push(n);
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
        out
    }

    pub fn leaf_labels(&self) -> Vec<&str> {
        self.leaves()
            .into_iter()
            .map(|n| self.nodes[n].label.as_deref().unwrap_or(""))
            .collect()
    }

    pub fn n_tips(&self) -> usize {
        self.leaves().len()
    }

    fn leaf_by_label(&self, label: &str) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| n.is_leaf() && n.label.as_deref() == Some(label))
    }

    /// Root-to-node path lengths, indexed by node id.
    pub fn node_depths(&self) -> Vec<f64> {
        let mut depth = vec![0.0; self.nodes.len()];
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            for &c in &self.nodes[n].children {
                depth[c] = depth[n] + self.nodes[c].branch_length;
                stack.push(c);
            }
        }
        depth
    }

    /// Maximum root-to-tip depth, in original units.
    pub fn total_depth(&self) -> f64 {
        let depth = self.node_depths();
        self.leaves()
            .into_iter()
            .map(|n| depth[n])
            .fold(0.0, f64::max)
    }

    /// Sum of branch lengths on the path between two tips, in original units.
    pub fn patristic_distance(&self, a: &str, b: &str) -> Result<f64, NewickError> {
        let na = self
            .leaf_by_label(a)
            .ok_or_else(|| NewickError::UnknownTip(a.to_string()))?;
        let nb = self
            .leaf_by_label(b)
            .ok_or_else(|| NewickError::UnknownTip(b.to_string()))?;
        let ancestors_a: Vec<usize> = self.ancestors(na).collect();
        let on_a: HashSet<usize> = ancestors_a.iter().copied().collect();
        let mut dist_b = 0.0;
        let mut cur = nb;
        while !on_a.contains(&cur) {
            dist_b += self.nodes[cur].branch_length;
            cur = self.nodes[cur].parent.expect("walked past root");
        }
        let mrca = cur;
        let mut dist_a = 0.0;
        for n in ancestors_a {
            if n == mrca {
                break;
            }
            dist_a += self.nodes[n].branch_length;
        }
        Ok(dist_a + dist_b)
    }

    /// `node` and all of its ancestors, bottom-up.
    fn ancestors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(Some(node), move |&n| self.nodes[n].parent)
    }

    /// Restrict the tree to `tips`, suppressing unary internal nodes.
    /// Patristic distances between the retained tips are unchanged.
    pub fn prune_to<S: AsRef<str>>(&self, tips: &[S]) -> Result<PhyloTree, NewickError> {
        let mut keep_leaf = HashSet::new();
        for t in tips {
            let t = t.as_ref();
            let id = self
                .leaf_by_label(t)
                .ok_or_else(|| NewickError::UnknownTip(t.to_string()))?;
            keep_leaf.insert(id);
        }
        if keep_leaf.len() < 2 {
            return Err(NewickError::TooFewTips(keep_leaf.len()));
        }

        // Mark nodes with at least one retained leaf below them.
        let mut alive = vec![false; self.nodes.len()];
        for &leaf in &keep_leaf {
            for a in self.ancestors(leaf) {
                if alive[a] {
                    break;
                }
                alive[a] = true;
            }
        }

        let mut out = Vec::new();
        // Walk down from the root through unary chains.
        let mut start = self.root;
        loop {
            let live: Vec<usize> = self.nodes[start]
                .children
                .iter()
                .copied()
                .filter(|&c| alive[c])
                .collect();
            if live.len() == 1 && !self.nodes[start].is_leaf() {
                start = live[0];
            } else {
                break;
            }
        }
        self.copy_pruned(start, None, 0.0, &alive, &mut out);
        Ok(PhyloTree {
            nodes: out,
            root: 0,
        })
    }

    fn copy_pruned(
        &self,
        node: usize,
        parent: Option<usize>,
        length: f64,
        alive: &[bool],
        out: &mut Vec<Node>,
    ) {
        let id = out.len();
        out.push(Node {
            parent,
            children: Vec::new(),
            label: self.nodes[node].label.clone(),
            branch_length: if parent.is_some() { length } else { 0.0 },
        });
        for &c in &self.nodes[node].children {
            if !alive[c] {
                continue;
            }
            // Collapse unary chains below `c`.
            let mut target = c;
            let mut acc = self.nodes[c].branch_length;
            loop {
                let live: Vec<usize> = self.nodes[target]
                    .children
                    .iter()
                    .copied()
                    .filter(|&g| alive[g])
                    .collect();
                if live.len() == 1 {
                    target = live[0];
                    acc += self.nodes[target].branch_length;
                } else {
                    break;
                }
            }
            let child_id = out.len();
            out[id].children.push(child_id);
            self.copy_pruned(target, Some(id), acc, alive, out);
        }
        if !out[id].children.is_empty() {
            out[id].label = None;
        }
    }

    /// Rename tips through `mapping`; tips absent from the mapping keep
    /// their label. Mapping two tips onto one label is an error, so
    /// collapsing subspecies means pruning to one representative first.
    pub fn relabel(&self, mapping: &HashMap<String, String>) -> Result<PhyloTree, NewickError> {
        self.relabel_with(|l| mapping.get(l).cloned().unwrap_or_else(|| l.to_string()))
    }

    pub fn relabel_with<F: Fn(&str) -> String>(&self, f: F) -> Result<PhyloTree, NewickError> {
        let mut nodes = self.nodes.clone();
        let mut seen = HashSet::new();
        for node in nodes.iter_mut().filter(|n| n.is_leaf()) {
            let new = f(node.label.as_deref().unwrap_or(""));
            if new.is_empty() {
                return Err(NewickError::EmptyLabel { offset: 0 });
            }
            if !seen.insert(new.clone()) {
                return Err(NewickError::DuplicateAfterRelabel(new));
            }
            node.label = Some(new);
        }
        Ok(PhyloTree {
            nodes,
            root: self.root,
        })
    }

    /// Serialize to Newick with 12 significant digits on branch lengths.
    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        self.write_node(self.root, &mut out);
        out.push(';');
        out
    }

    fn write_node(&self, n: usize, out: &mut String) {
        let node = &self.nodes[n];
        if !node.is_leaf() {
            out.push('(');
            for (k, &c) in node.children.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                self.write_node(c, out);
            }
            out.push(')');
        } else {
            write_label(node.label.as_deref().unwrap_or(""), out);
        }
        if node.parent.is_some() {
            out.push(':');
            out.push_str(&format_significant(node.branch_length, 12));
        }
    }

    /// Random ultrametric tree with `n` tips under the Kingman coalescent,
    /// tips labelled `t1..tn`.
    pub fn random_coalescent<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PhyloTree, NewickError> {
        if n < 2 {
            return Err(NewickError::TooFewTips(n));
        }
        let mut nodes: Vec<Node> = (0..n)
            .map(|i| Node {
                parent: None,
                children: Vec::new(),
                label: Some(format!("t{}", i + 1)),
                branch_length: 0.0,
            })
            .collect();
        // Heights measured from the present.
        let mut height = vec![0.0; n];
        let mut active: Vec<usize> = (0..n).collect();
        let mut t = 0.0;
        while active.len() > 1 {
            let k = active.len() as f64;
            let rate = k * (k - 1.0) / 2.0;
            let u: f64 = rng.random::<f64>();
            t += -(1.0 - u).ln() / rate;
            let a = active.swap_remove(rng.random_range(0..active.len()));
            let b = active.swap_remove(rng.random_range(0..active.len()));
            let id = nodes.len();
            nodes.push(Node {
                parent: None,
                children: vec![a, b],
                label: None,
                branch_length: 0.0,
            });
            height.push(t);
            for c in [a, b] {
                nodes[c].parent = Some(id);
                nodes[c].branch_length = t - height[c];
            }
            active.push(id);
        }
        let root = active[0];
        Ok(PhyloTree { nodes, root })
    }
}

fn write_label(label: &str, out: &mut String) {
    let needs_quote = label
        .chars()
        .any(|c| c.is_whitespace() || "():;,[]'\"".contains(c));
    if needs_quote {
        out.push('\'');
        out.push_str(&label.replace('\'', "''"));
        out.push('\'');
    } else {
        out.push_str(label);
    }
}

/// Format `x` with `digits` significant digits, trimming trailing zeros.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let mut s = format!("{x:.decimals$}");
        if s.contains('.') {
            while s.ends_with('0') {
                s.pop();
            }
            if s.ends_with('.') {
                s.pop();
            }
        }
        s
    } else {
        format!("{:.*e}", digits - 1, x)
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    nodes: Vec<Node>,
    leaf_labels: HashSet<String>,
}

/// Parse a single Newick statement terminated by `;`.
pub fn parse_newick(text: &str) -> Result<PhyloTree, NewickError> {
    let mut p = Parser {
        src: text,
        bytes: text.as_bytes(),
        pos: 0,
        nodes: Vec::new(),
        leaf_labels: HashSet::new(),
    };
    p.skip_ws();
    if p.pos >= p.bytes.len() || p.peek() == Some(b';') {
        return Err(NewickError::EmptyTree { offset: p.pos });
    }
    let root = p.subtree(None)?;
    p.skip_ws();
    // Root edge length is optional and ignored.
    if p.peek() == Some(b':') {
        p.pos += 1;
        p.length()?;
    }
    p.skip_ws();
    match p.peek() {
        Some(b';') => p.pos += 1,
        Some(b')') => return Err(NewickError::UnbalancedParentheses { offset: p.pos }),
        Some(_) => {
            return Err(NewickError::UnexpectedCharacter {
                found: p.current_char(),
                offset: p.pos,
            })
        }
        None => return Err(NewickError::MissingSemicolon { offset: p.pos }),
    }
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(NewickError::UnexpectedCharacter {
            found: p.current_char(),
            offset: p.pos,
        });
    }
    let tree = PhyloTree {
        nodes: p.nodes,
        root,
    };
    let tips = tree.n_tips();
    if tips < 2 {
        return Err(NewickError::TooFewTips(tips));
    }
    Ok(tree)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn current_char(&self) -> char {
        self.src[self.pos..].chars().next().unwrap_or('\0')
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(b) if b.is_ascii_whitespace() => self.pos += 1,
                Some(b'[') => {
                    // Comment; unterminated comments run to end of input.
                    while let Some(b) = self.peek() {
                        self.pos += 1;
                        if b == b']' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    fn subtree(&mut self, parent: Option<usize>) -> Result<usize, NewickError> {
        self.skip_ws();
        let id = self.nodes.len();
        self.nodes.push(Node {
            parent,
            children: Vec::new(),
            label: None,
            branch_length: 0.0,
        });
        if self.peek() == Some(b'(') {
            let open = self.pos;
            self.pos += 1;
            loop {
                let child = self.subtree(Some(id))?;
                self.nodes[id].children.push(child);
                self.skip_ws();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    None | Some(b';') => {
                        return Err(NewickError::UnbalancedParentheses { offset: open })
                    }
                    Some(_) => {
                        return Err(NewickError::UnexpectedCharacter {
                            found: self.current_char(),
                            offset: self.pos,
                        })
                    }
                }
            }
            // Internal label, discarded.
            self.skip_ws();
            self.label()?;
        } else {
            let start = self.pos;
            let label = self.label()?;
            if label.is_empty() {
                return match self.peek() {
                    Some(b')') => Err(NewickError::UnbalancedParentheses { offset: self.pos }),
                    Some(b',') | Some(b':') => Err(NewickError::EmptyLabel { offset: start }),
                    None | Some(b';') => Err(NewickError::EmptyTree { offset: start }),
                    Some(_) => Err(NewickError::UnexpectedCharacter {
                        found: self.current_char(),
                        offset: self.pos,
                    }),
                };
            }
            if !self.leaf_labels.insert(label.clone()) {
                return Err(NewickError::DuplicateLeafLabel {
                    label,
                    offset: start,
                });
            }
            self.nodes[id].label = Some(label);
        }
        if parent.is_some() {
            self.skip_ws();
            if self.peek() != Some(b':') {
                return Err(NewickError::MissingBranchLength { offset: self.pos });
            }
            self.pos += 1;
            self.nodes[id].branch_length = self.length()?;
        }
        Ok(id)
    }

    fn label(&mut self) -> Result<String, NewickError> {
        self.skip_ws();
        if self.peek() == Some(b'\'') {
            let open = self.pos;
            self.pos += 1;
            let mut out = String::new();
            loop {
                let Some(b) = self.peek() else {
                    return Err(NewickError::UnexpectedCharacter {
                        found: '\'',
                        offset: open,
                    });
                };
                if b == b'\'' {
                    if self.bytes.get(self.pos + 1) == Some(&b'\'') {
                        out.push('\'');
                        self.pos += 2;
                        continue;
                    }
                    self.pos += 1;
                    return Ok(out);
                }
                let c = self.current_char();
                out.push(c);
                self.pos += c.len_utf8();
            }
        }
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b"():;,[".contains(&b) || b.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn length(&mut self) -> Result<f64, NewickError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_digit() || b"+-.eE".contains(&b) {
                self.pos += 1;
            } else {
                break;
            }
        }
        let text = &self.src[start..self.pos];
        if text.is_empty() {
            return Err(NewickError::MissingBranchLength { offset: start });
        }
        let value: f64 = text.parse().map_err(|_| NewickError::InvalidBranchLength {
            text: text.to_string(),
            offset: start,
        })?;
        if !value.is_finite() {
            return Err(NewickError::InvalidBranchLength {
                text: text.to_string(),
                offset: start,
            });
        }
        if value < 0.0 {
            return Err(NewickError::NegativeBranchLength { offset: start });
        }
        Ok(value)
    }
}

/// Normalized tip and MRCA depths for every pair of tips.
///
/// Depths are divided by the maximum root-to-tip depth, so the deepest tip
/// sits at 1. The pairwise distance decomposes through the MRCA `k` as
/// `T_hi = (t_h - t_k) + (t_i - t_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMrcaDepths {
    labels: Vec<String>,
    tip_depth: Vec<f64>,
    /// Row-major `n x n`; the diagonal holds the tip depth.
    mrca_depth: Vec<f64>,
    tree_depth_original: f64,
    /// Per tip: normalized branch lengths from the tip up to the root.
    root_paths: Vec<Vec<f64>>,
    /// Row-major `n x n`: number of branches on the tip-to-MRCA segment of
    /// the row tip. Used by transforms that act on individual branches.
    branches_to_mrca: Vec<u32>,
}

/// Compute normalized depths for every pair of tips of `tree`.
pub fn pairwise_depths(tree: &PhyloTree) -> Result<PairwiseMrcaDepths, NewickError> {
    let leaves = tree.leaves();
    let n = leaves.len();
    if n < 2 {
        return Err(NewickError::TooFewTips(n));
    }
    let depth = tree.node_depths();
    let total = leaves.iter().map(|&l| depth[l]).fold(0.0, f64::max);
    if total <= 0.0 {
        return Err(NewickError::ZeroDepth);
    }
    let nodes = tree.nodes();

    let mut tip_index = vec![usize::MAX; nodes.len()];
    for (k, &l) in leaves.iter().enumerate() {
        tip_index[l] = k;
    }

    let mut mrca_depth = vec![0.0; n * n];
    let mut mrca_node = vec![0usize; n * n];
    for (k, &l) in leaves.iter().enumerate() {
        mrca_depth[k * n + k] = depth[l] / total;
        mrca_node[k * n + k] = l;
    }
    // Post-order: pairs split across two child subtrees meet at this node.
    let mut below: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    let mut order = Vec::with_capacity(nodes.len());
    let mut stack = vec![tree.root()];
    while let Some(v) = stack.pop() {
        order.push(v);
        stack.extend(&nodes[v].children);
    }
    for &v in order.iter().rev() {
        if nodes[v].is_leaf() {
            below[v] = vec![tip_index[v]];
            continue;
        }
        let d = depth[v] / total;
        let mut merged: Vec<usize> = Vec::new();
        for &c in &nodes[v].children {
            let sub = std::mem::take(&mut below[c]);
            for &a in &merged {
                for &b in &sub {
                    mrca_depth[a * n + b] = d;
                    mrca_depth[b * n + a] = d;
                    mrca_node[a * n + b] = v;
                    mrca_node[b * n + a] = v;
                }
            }
            merged.extend(sub);
        }
        below[v] = merged;
    }

    let mut root_paths = Vec::with_capacity(n);
    let mut path_nodes = Vec::with_capacity(n);
    for &l in &leaves {
        let ids: Vec<usize> = tree.ancestors(l).collect();
        let lens: Vec<f64> = ids
            .iter()
            .filter(|&&a| nodes[a].parent.is_some())
            .map(|&a| nodes[a].branch_length / total)
            .collect();
        root_paths.push(lens);
        path_nodes.push(ids);
    }
    let mut branches_to_mrca = vec![0u32; n * n];
    for a in 0..n {
        for b in 0..n {
            let m = mrca_node[a * n + b];
            let steps = path_nodes[a].iter().position(|&x| x == m).unwrap_or(0);
            branches_to_mrca[a * n + b] = steps as u32;
        }
    }

    Ok(PairwiseMrcaDepths {
        labels: leaves
            .iter()
            .map(|&l| nodes[l].label.clone().unwrap_or_default())
            .collect(),
        tip_depth: leaves.iter().map(|&l| depth[l] / total).collect(),
        mrca_depth,
        tree_depth_original: total,
        root_paths,
        branches_to_mrca,
    })
}

impl PairwiseMrcaDepths {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn tip_depth(&self, h: usize) -> f64 {
        self.tip_depth[h]
    }

    pub fn mrca_depth(&self, h: usize, i: usize) -> f64 {
        self.mrca_depth[h * self.len() + i]
    }

    /// Normalized patristic distance `T_hi`.
    pub fn distance(&self, h: usize, i: usize) -> f64 {
        if h == i {
            return 0.0;
        }
        let k = self.mrca_depth(h, i);
        (self.tip_depth[h] - k) + (self.tip_depth[i] - k)
    }

    /// The normalization constant, in the tree's original units.
    pub fn tree_depth_original(&self) -> f64 {
        self.tree_depth_original
    }

    /// Normalized branch lengths on the path from tip `h` up to its MRCA
    /// with `i`.
    pub fn branches_to_mrca(&self, h: usize, i: usize) -> &[f64] {
        let steps = self.branches_to_mrca[h * self.len() + i] as usize;
        &self.root_paths[h][..steps]
    }

    /// Mean normalized distance over unordered pairs.
    pub fn mean_distance(&self) -> f64 {
        let n = self.len();
        let mut sum = 0.0;
        for h in 0..n {
            for i in h + 1..n {
                sum += self.distance(h, i);
            }
        }
        sum / (n * (n - 1) / 2) as f64
    }

    /// Reorder/restrict to `labels`, keeping the original normalization.
    pub fn select<S: AsRef<str>>(&self, labels: &[S]) -> Result<PairwiseMrcaDepths, NewickError> {
        let idx: Vec<usize> = labels
            .iter()
            .map(|l| {
                self.index_of(l.as_ref())
                    .ok_or_else(|| NewickError::UnknownTip(l.as_ref().to_string()))
            })
            .collect::<Result<_, _>>()?;
        let n_old = self.len();
        let n = idx.len();
        let mut mrca_depth = vec![0.0; n * n];
        let mut branches = vec![0u32; n * n];
        for (a, &oa) in idx.iter().enumerate() {
            for (b, &ob) in idx.iter().enumerate() {
                mrca_depth[a * n + b] = self.mrca_depth[oa * n_old + ob];
                branches[a * n + b] = self.branches_to_mrca[oa * n_old + ob];
            }
        }
        Ok(PairwiseMrcaDepths {
            labels: idx.iter().map(|&o| self.labels[o].clone()).collect(),
            tip_depth: idx.iter().map(|&o| self.tip_depth[o]).collect(),
            mrca_depth,
            tree_depth_original: self.tree_depth_original,
            root_paths: idx.iter().map(|&o| self.root_paths[o].clone()).collect(),
            branches_to_mrca: branches,
        })
    }

    /// Square distance matrix in normalized units, as text (debugging aid).
    pub fn describe(&self) -> String {
        let mut s = String::new();
        for h in 0..self.len() {
            for i in 0..self.len() {
                let _ = write!(s, "{:.4} ", self.distance(h, i));
            }
            s.push('\n');
        }
        s
    }
}
