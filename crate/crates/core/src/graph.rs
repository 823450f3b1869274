//! Structural analysis of causal graphs: topological ordering, junction
//! census, d-separation, confounder listing and graph-vs-graph scoring.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{read_text, CausalGraph, VariableKind};

/// Topological order of the variable names. Ties are resolved by declaration
/// order, so the result is deterministic.
pub fn validate_dag(g: &CausalGraph) -> Result<Vec<String>> {
    Ok(topological_indices(g)?.into_iter().map(|i| g.name(i).to_string()).collect())
}

pub(crate) fn topological_indices(g: &CausalGraph) -> Result<Vec<usize>> {
    let n = g.len();
    let mut indegree: Vec<usize> = (0..n).map(|i| g.parents(i).len()).collect();
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in g.children(v) {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    Err(Error::Cycle(find_cycle(g, &indegree)))
}

/// Walks parent links among the nodes left over by Kahn's algorithm until a
/// node repeats. Every leftover node has a leftover parent.
fn find_cycle(g: &CausalGraph, indegree: &[usize]) -> Vec<String> {
    let start = (0..g.len()).find(|&i| indegree[i] > 0).expect("a cycle leaves nodes behind");
    let mut seen: HashMap<usize, usize> = HashMap::new();
    let mut walk = Vec::new();
    let mut v = start;
    loop {
        if let Some(&pos) = seen.get(&v) {
            let mut cycle: Vec<String> = walk[pos..].iter().rev().map(|&i| g.name(i).to_string()).collect();
            cycle.push(cycle[0].clone());
            return cycle;
        }
        seen.insert(v, walk.len());
        walk.push(v);
        v = *g.parents(v).iter().find(|&&p| indegree[p] > 0).expect("leftover node has leftover parent");
    }
}

/// Every chain, fork and collider of the graph as name triples `(A, B, C)`
/// with `B` the middle node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JunctionCensus {
    pub chains: Vec<(String, String, String)>,
    pub forks: Vec<(String, String, String)>,
    pub colliders: Vec<(String, String, String)>,
    pub has_chain: bool,
    pub has_fork: bool,
    pub has_collider: bool,
}

/// Chains keep their direction (`A -> B -> C`); forks and colliders are
/// listed once per endpoint pair with the endpoints in lexicographic order.
pub fn junction_census(g: &CausalGraph) -> JunctionCensus {
    let triple = |a: usize, b: usize, c: usize| (g.name(a).to_string(), g.name(b).to_string(), g.name(c).to_string());
    let ordered = |a: usize, b: usize, c: usize| {
        if g.name(a) <= g.name(c) {
            triple(a, b, c)
        } else {
            triple(c, b, a)
        }
    };
    let mut chains = Vec::new();
    let mut forks = Vec::new();
    let mut colliders = Vec::new();
    for b in 0..g.len() {
        for &a in g.parents(b) {
            for &c in g.children(b) {
                if a != c {
                    chains.push(triple(a, b, c));
                }
            }
        }
        let kids = g.children(b);
        for (i, &a) in kids.iter().enumerate() {
            for &c in &kids[i + 1..] {
                forks.push(ordered(a, b, c));
            }
        }
        let pas = g.parents(b);
        for (i, &a) in pas.iter().enumerate() {
            for &c in &pas[i + 1..] {
                colliders.push(ordered(a, b, c));
            }
        }
    }
    chains.sort();
    forks.sort();
    colliders.sort();
    JunctionCensus {
        has_chain: !chains.is_empty(),
        has_fork: !forks.is_empty(),
        has_collider: !colliders.is_empty(),
        chains,
        forks,
        colliders,
    }
}

fn resolve_query(g: &CausalGraph, x: &str, y: &str, given: &[&str]) -> Result<(usize, usize, Vec<usize>)> {
    let xi = g.index_of(x)?;
    let yi = g.index_of(y)?;
    if xi == yi {
        return Err(Error::Invalid(format!("d-separation query needs two distinct variables, got {x} twice")));
    }
    let mut z = Vec::with_capacity(given.len());
    for name in given {
        let i = g.index_of(name)?;
        if i == xi || i == yi {
            return Err(Error::Invalid(format!("{name} cannot be both queried and conditioned on")));
        }
        z.push(i);
    }
    Ok((xi, yi, z))
}

/// Whether `x` and `y` are d-separated by `given`.
pub fn d_separated(g: &CausalGraph, x: &str, y: &str, given: &[&str]) -> Result<bool> {
    let (xi, yi, z) = resolve_query(g, x, y, given)?;
    Ok(d_separated_idx(g, xi, yi, &z))
}

/// Reachability ("Bayes ball") over (node, direction) states. A trail enters
/// a node either from a child (`up`) or from a parent (`down`).
pub(crate) fn d_separated_idx(g: &CausalGraph, x: usize, y: usize, given: &[usize]) -> bool {
    let n = g.len();
    let mut in_z = vec![false; n];
    for &v in given {
        in_z[v] = true;
    }
    // Ancestors of the conditioning set, the set itself included.
    let mut anc = in_z.clone();
    let mut stack: Vec<usize> = given.to_vec();
    while let Some(v) = stack.pop() {
        for &p in g.parents(v) {
            if !anc[p] {
                anc[p] = true;
                stack.push(p);
            }
        }
    }
    let mut visited = vec![[false; 2]; n];
    const UP: usize = 0;
    const DOWN: usize = 1;
    let mut queue = VecDeque::from([(x, UP)]);
    while let Some((v, dir)) = queue.pop_front() {
        if visited[v][dir] {
            continue;
        }
        visited[v][dir] = true;
        if v == y && !in_z[v] {
            return false;
        }
        if dir == UP && !in_z[v] {
            queue.extend(g.parents(v).iter().map(|&p| (p, UP)));
            queue.extend(g.children(v).iter().map(|&c| (c, DOWN)));
        } else if dir == DOWN {
            if !in_z[v] {
                queue.extend(g.children(v).iter().map(|&c| (c, DOWN)));
            }
            if anc[v] {
                queue.extend(g.parents(v).iter().map(|&p| (p, UP)));
            }
        }
    }
    true
}

/// One conditional independence statement `x ⫫ y | given`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Independence {
    pub x: String,
    pub y: String,
    pub given: Vec<String>,
}

/// All d-separations among observed variables with conditioning sets of at
/// most `max_conditioning` observed variables. Ordered by `x`, `y`,
/// conditioning-set size, then conditioning names.
pub fn implied_independencies(g: &CausalGraph, max_conditioning: usize) -> Vec<Independence> {
    let mut observed: Vec<usize> = (0..g.len()).filter(|&i| g.variables()[i].observed).collect();
    observed.sort_by(|&a, &b| g.name(a).cmp(g.name(b)));
    let mut out = Vec::new();
    for (ia, &a) in observed.iter().enumerate() {
        for &b in &observed[ia + 1..] {
            let rest: Vec<usize> = observed.iter().copied().filter(|&v| v != a && v != b).collect();
            for size in 0..=max_conditioning.min(rest.len()) {
                for_each_subset(&rest, size, &mut |subset| {
                    if d_separated_idx(g, a, b, subset) {
                        out.push(Independence {
                            x: g.name(a).to_string(),
                            y: g.name(b).to_string(),
                            given: subset.iter().map(|&v| g.name(v).to_string()).collect(),
                        });
                    }
                });
            }
        }
    }
    out
}

/// Calls `f` on every `size`-subset of `items` in lexicographic position order.
pub(crate) fn for_each_subset(items: &[usize], size: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(items: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == size {
            f(cur);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < size - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, size, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(items, size, 0, &mut Vec::with_capacity(size), f);
}

fn reachable_from(g: &CausalGraph, start: usize, skip: Option<usize>) -> Vec<bool> {
    let mut seen = vec![false; g.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(v) = stack.pop() {
        for &c in g.children(v) {
            if Some(c) != skip && !seen[c] {
                seen[c] = true;
                stack.push(c);
            }
        }
    }
    seen
}

/// A confounded edge: `confounder` has a directed path into `cause` and an
/// independent directed path into `effect` that avoids `cause`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Confounding {
    pub confounder: String,
    pub cause: String,
    pub effect: String,
}

pub fn find_confounders(g: &CausalGraph) -> Vec<Confounding> {
    let mut out = Vec::new();
    for z in 0..g.len() {
        let reach = reachable_from(g, z, None);
        for (x, y) in g.edges() {
            if z == x || z == y || !reach[x] {
                continue;
            }
            if reachable_from(g, z, Some(x))[y] {
                out.push(Confounding {
                    confounder: g.name(z).to_string(),
                    cause: g.name(x).to_string(),
                    effect: g.name(y).to_string(),
                });
            }
        }
    }
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesiderataReport {
    pub has_chain: bool,
    pub has_fork: bool,
    pub has_collider: bool,
    pub variable_count: usize,
    pub has_numeric: bool,
    pub has_categorical: bool,
    pub confounded_edges: Vec<Confounding>,
    /// All three junction types present and at least one confounded edge.
    pub satisfied: bool,
}

pub fn desiderata_report(g: &CausalGraph) -> DesiderataReport {
    let census = junction_census(g);
    let confounded_edges = find_confounders(g);
    let kinds: Vec<VariableKind> = g.variables().iter().map(|v| v.kind).collect();
    let satisfied = census.has_chain && census.has_fork && census.has_collider && !confounded_edges.is_empty();
    DesiderataReport {
        has_chain: census.has_chain,
        has_fork: census.has_fork,
        has_collider: census.has_collider,
        variable_count: g.len(),
        has_numeric: kinds.contains(&VariableKind::Numeric),
        has_categorical: kinds.contains(&VariableKind::Categorical),
        confounded_edges,
        satisfied,
    }
}

/// Scores for ordered variable pairs, used for AUC.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeScores {
    scores: BTreeMap<(String, String), f64>,
}

impl EdgeScores {
    pub fn new(entries: impl IntoIterator<Item = (String, String, f64)>) -> Result<Self> {
        let mut scores = BTreeMap::new();
        for (a, b, s) in entries {
            if !s.is_finite() {
                return Err(Error::NonFinite { column: "score".into(), row: scores.len() + 1 });
            }
            if a == b {
                return Err(Error::Shape(format!("score for diagonal pair {a} -> {b}")));
            }
            if scores.insert((a.clone(), b.clone()), s).is_some() {
                return Err(Error::DuplicateName(format!("{a} -> {b}")));
            }
        }
        Ok(EdgeScores { scores })
    }

    pub fn get(&self, cause: &str, effect: &str) -> Option<f64> {
        self.scores.get(&(cause.to_string(), effect.to_string())).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// CSV with header `cause,effect,score`.
    pub fn parse_csv(text: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Row {
            cause: String,
            effect: String,
            score: f64,
        }
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for rec in reader.deserialize() {
            let r: Row = rec.map_err(|e| Error::Parse(format!("edge scores: {e}")))?;
            rows.push((r.cause, r.effect, r.score));
        }
        EdgeScores::new(rows)
    }
}

pub fn load_edge_scores(path: impl AsRef<Path>) -> Result<EdgeScores> {
    EdgeScores::parse_csv(&read_text(path.as_ref())?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphComparison {
    pub shd: usize,
    pub tpr: f64,
    pub auc: Option<f64>,
    pub missing: Vec<(String, String)>,
    pub extra: Vec<(String, String)>,
    /// True edges predicted with the opposite orientation, in truth orientation.
    pub reversed: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

/// Structural Hamming distance (a reversal counts once), true positive rate
/// and, when scores are given, the Mann–Whitney AUC of true edges against all
/// other ordered pairs.
pub fn compare_graphs(truth: &CausalGraph, predicted: &CausalGraph, scores: Option<&EdgeScores>) -> Result<GraphComparison> {
    let names_t: BTreeSet<&str> = truth.variables().iter().map(|v| v.name.as_str()).collect();
    let names_p: BTreeSet<&str> = predicted.variables().iter().map(|v| v.name.as_str()).collect();
    if names_t != names_p {
        return Err(Error::Shape("truth and predicted graphs have different variable sets".into()));
    }
    let t: BTreeSet<(String, String)> = truth.edge_names().into_iter().collect();
    let p: BTreeSet<(String, String)> = predicted.edge_names().into_iter().collect();
    let flip = |(a, b): &(String, String)| (b.clone(), a.clone());

    let mut missing = Vec::new();
    let mut reversed = Vec::new();
    let mut correct = 0usize;
    for e in &t {
        if p.contains(e) {
            correct += 1;
        } else if p.contains(&flip(e)) {
            reversed.push(e.clone());
        } else {
            missing.push(e.clone());
        }
    }
    let extra: Vec<_> = p.iter().filter(|e| !t.contains(e) && !t.contains(&flip(e))).cloned().collect();

    let mut warnings = Vec::new();
    let tpr = if t.is_empty() {
        let msg = "true graph has no edges; TPR defined as 1.0".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
        1.0
    } else {
        correct as f64 / t.len() as f64
    };

    let auc = match scores {
        None => None,
        Some(s) => edge_auc(truth, &t, s, &mut warnings)?,
    };

    Ok(GraphComparison { shd: missing.len() + extra.len() + reversed.len(), tpr, auc, missing, extra, reversed, warnings })
}

fn edge_auc(
    truth: &CausalGraph,
    edges: &BTreeSet<(String, String)>,
    scores: &EdgeScores,
    warnings: &mut Vec<String>,
) -> Result<Option<f64>> {
    let n = truth.len();
    if scores.len() != n * (n - 1) {
        return Err(Error::Shape(format!(
            "edge score table has {} rows, expected {} ordered pairs",
            scores.len(),
            n * (n - 1)
        )));
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for a in truth.variables() {
        for b in truth.variables() {
            if a.name == b.name {
                continue;
            }
            let s = scores
                .get(&a.name, &b.name)
                .ok_or_else(|| Error::Shape(format!("no score for {} -> {}", a.name, b.name)))?;
            if edges.contains(&(a.name.clone(), b.name.clone())) {
                pos.push(s);
            } else {
                neg.push(s);
            }
        }
    }
    if pos.is_empty() || neg.is_empty() {
        let msg = "AUC undefined without both edge and non-edge pairs".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
        return Ok(None);
    }
    Ok(Some(mann_whitney_auc(&pos, &neg)))
}

/// Probability that a positive outranks a negative, ties counting half.
pub fn mann_whitney_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut credit = 0.0;
    for &p in pos {
        for &q in neg {
            if p > q {
                credit += 1.0;
            } else if p == q {
                credit += 0.5;
            }
        }
    }
    credit / (pos.len() * neg.len()) as f64
}
