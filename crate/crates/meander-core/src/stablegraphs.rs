//! Stable graphs with per-vertex leg counts, their automorphisms, the
//! polynomials `P_Γ`, the ζ-transform and the resulting Masur–Veech volumes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::correlators::CorrelatorError;
use crate::exactval::{factorial, int, zeta_even, ExactError, PiValue, Rational};
use crate::volpoly::{n_poly, EdgePolynomial, Slot};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unstable or out-of-regime (g,n) = ({g},{n}); need 2g+n >= 4")]
    Unstable { g: u32, n: u32 },
    #[error(transparent)]
    Correlator(#[from] CorrelatorError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("even edge exponent {0} in P_Gamma")]
    EvenExponent(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub genus: u32,
    pub legs: u32,
}

/// Connected multigraph; `adj[i][i]` counts loops at `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StableGraph {
    pub vertices: Vec<Vertex>,
    pub adj: Vec<Vec<u32>>,
}

impl StableGraph {
    pub fn single_vertex(genus: u32, legs: u32) -> Self {
        StableGraph { vertices: vec![Vertex { genus, legs }], adj: vec![vec![0]] }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> u32 {
        let v = self.num_vertices();
        (0..v).map(|i| (i..v).map(|j| self.adj[i][j]).sum::<u32>()).sum()
    }

    /// `n_v`: legs plus edge ends, loops counted twice.
    pub fn valence(&self, i: usize) -> u32 {
        let ends: u32 = self.adj[i].iter().sum::<u32>() + self.adj[i][i];
        self.vertices[i].legs + ends
    }

    pub fn betti(&self) -> u32 {
        self.num_edges() + 1 - self.num_vertices() as u32
    }

    pub fn genus(&self) -> u32 {
        self.vertices.iter().map(|v| v.genus).sum::<u32>() + self.betti()
    }

    pub fn legs(&self) -> u32 {
        self.vertices.iter().map(|v| v.legs).sum()
    }

    pub fn is_connected(&self) -> bool {
        let v = self.num_vertices();
        let mut seen = vec![false; v];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for (j, s) in seen.iter_mut().enumerate() {
                if !*s && self.adj[i][j] > 0 {
                    *s = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_stable(&self) -> bool {
        (0..self.num_vertices()).all(|i| 2 * self.vertices[i].genus + self.valence(i) > 2)
    }

    fn invariant(&self, i: usize) -> (Vertex, u32, u32, Vec<(Vertex, u32)>) {
        let mut nb: Vec<(Vertex, u32)> = (0..self.num_vertices())
            .filter(|&j| j != i && self.adj[i][j] > 0)
            .map(|j| (self.vertices[j], self.adj[i][j]))
            .collect();
        nb.sort();
        (self.vertices[i], self.adj[i][i], self.valence(i), nb)
    }

    /// Vertices grouped into blocks of equal invariant, blocks in sorted order.
    fn blocks(&self) -> Vec<Vec<usize>> {
        let mut order: Vec<usize> = (0..self.num_vertices()).collect();
        let inv: Vec<_> = order.iter().map(|&i| self.invariant(i)).collect();
        order.sort_by(|&a, &b| inv[a].cmp(&inv[b]));
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for i in order {
            match blocks.last_mut() {
                Some(b) if inv[b[0]] == inv[i] => b.push(i),
                _ => blocks.push(vec![i]),
            }
        }
        blocks
    }

    /// Calls `f` on every vertex ordering compatible with the invariant blocks.
    fn for_each_ordering(&self, mut f: impl FnMut(&[usize])) {
        fn rec(blocks: &[Vec<usize>], prefix: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
            let Some((first, rest)) = blocks.split_first() else {
                f(prefix);
                return;
            };
            let mut block = first.clone();
            permute(&mut block, 0, &mut |p| {
                let len = prefix.len();
                prefix.extend_from_slice(p);
                rec(rest, prefix, f);
                prefix.truncate(len);
            });
        }
        rec(&self.blocks(), &mut Vec::new(), &mut f);
    }

    fn encode(&self, order: &[usize]) -> Vec<u32> {
        let mut code = Vec::with_capacity(order.len() * (order.len() + 1) / 2);
        for (a, &i) in order.iter().enumerate() {
            for &j in &order[a..] {
                code.push(self.adj[i][j]);
            }
        }
        code
    }

    fn reorder(&self, order: &[usize]) -> StableGraph {
        StableGraph {
            vertices: order.iter().map(|&i| self.vertices[i]).collect(),
            adj: order.iter().map(|&i| order.iter().map(|&j| self.adj[i][j]).collect()).collect(),
        }
    }

    /// Representative with the lexicographically minimal adjacency encoding.
    pub fn canonical(&self) -> StableGraph {
        let mut best: Option<(Vec<u32>, Vec<usize>)> = None;
        self.for_each_ordering(|order| {
            let code = self.encode(order);
            if best.as_ref().is_none_or(|(b, _)| code < *b) {
                best = Some((code, order.to_vec()));
            }
        });
        self.reorder(&best.expect("at least one ordering").1)
    }

    pub fn canonical_string(&self) -> String {
        self.canonical().to_string()
    }

    /// Vertex permutations preserving decorations and adjacency.
    pub fn vertex_automorphisms(&self) -> u64 {
        let v = self.num_vertices();
        let identity: Vec<usize> = self.blocks().concat();
        let base = self.encode(&identity);
        let mut count = 0;
        self.for_each_ordering(|order| {
            if self.encode(order) == base && (0..v).all(|a| self.vertices[order[a]] == self.vertices[identity[a]]) {
                count += 1;
            }
        });
        count
    }

    /// `|Aut Γ|` including multi-edge permutations and loop flips.
    pub fn aut_order(&self) -> BigInt {
        let v = self.num_vertices();
        let mut edge_part = BigInt::one();
        for i in 0..v {
            for j in i..v {
                let m = self.adj[i][j] as u64;
                edge_part *= factorial(m);
                if i == j {
                    edge_part <<= m as usize;
                }
            }
        }
        edge_part * self.vertex_automorphisms()
    }

    /// Number of ways to distribute `n` labelled legs with these counts.
    pub fn leg_multiplicity(&self) -> BigInt {
        let den = self.vertices.iter().fold(BigInt::one(), |acc, v| acc * factorial(v.legs as u64));
        factorial(self.legs() as u64) / den
    }

    /// Edges as vertex pairs `(i, j)`, `i <= j`, one entry per edge.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let v = self.num_vertices();
        let mut out = Vec::new();
        for i in 0..v {
            for j in i..v {
                for _ in 0..self.adj[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    fn degenerations(&self) -> Vec<StableGraph> {
        let mut out = Vec::new();
        let nv = self.num_vertices();
        for v in 0..nv {
            let Vertex { genus, legs } = self.vertices[v];
            if genus >= 1 {
                let mut h = self.clone();
                h.vertices[v].genus -= 1;
                h.adj[v][v] += 1;
                out.push(h);
            }
            let neighbours: Vec<usize> = (0..nv).filter(|&w| w != v && self.adj[v][w] > 0).collect();
            let loops = self.adj[v][v];
            for g1 in 0..=genus {
                for l1 in 0..=legs {
                    let mut choice = vec![0u32; neighbours.len()];
                    loop {
                        for a in 0..=loops {
                            for b in 0..=loops - a {
                                let c = loops - a - b;
                                let mut h = self.clone();
                                h.vertices[v] = Vertex { genus: g1, legs: l1 };
                                h.vertices.push(Vertex { genus: genus - g1, legs: legs - l1 });
                                h.adj.iter_mut().for_each(|row| row.push(0));
                                h.adj.push(vec![0; nv + 1]);
                                for (k, &w) in neighbours.iter().enumerate() {
                                    let m = self.adj[v][w];
                                    h.adj[v][w] = choice[k];
                                    h.adj[w][v] = choice[k];
                                    h.adj[nv][w] = m - choice[k];
                                    h.adj[w][nv] = m - choice[k];
                                }
                                h.adj[v][v] = a;
                                h.adj[nv][nv] = b;
                                h.adj[v][nv] = 1 + c;
                                h.adj[nv][v] = 1 + c;
                                if h.is_stable() {
                                    out.push(h);
                                }
                            }
                        }
                        // Odometer over the split of each bundle of parallel edges.
                        let mut k = 0;
                        while k < choice.len() {
                            if choice[k] < self.adj[v][neighbours[k]] {
                                choice[k] += 1;
                                break;
                            }
                            choice[k] = 0;
                            k += 1;
                        }
                        if k == choice.len() {
                            break;
                        }
                    }
                }
            }
        }
        out
    }
}

fn permute(items: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}

impl fmt::Display for StableGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verts: Vec<String> = self.vertices.iter().map(|v| format!("g{}l{}", v.genus, v.legs)).collect();
        let edges: Vec<String> = self.edge_list().iter().map(|(i, j)| format!("{i}-{j}")).collect();
        write!(f, "[{}|{}]", verts.join(","), edges.join(","))
    }
}

fn check_regime(g: u32, n: u32) -> Result<(), GraphError> {
    if 2 * g + n < 4 {
        return Err(GraphError::Unstable { g, n });
    }
    Ok(())
}

/// One canonical representative per isomorphism class, ordered by edge
/// count and then by canonical string.
pub fn enumerate_stable_graphs(g: u32, n: u32) -> Result<Vec<StableGraph>, GraphError> {
    check_regime(g, n)?;
    Ok(enumerate_unchecked(g, n, 3 * g + n - 3))
}

/// Stable graphs with exactly `edges` edges.
pub fn stable_graphs_with_edges(g: u32, n: u32, edges: u32) -> Result<Vec<StableGraph>, GraphError> {
    check_regime(g, n)?;
    Ok(enumerate_unchecked(g, n, edges).into_iter().filter(|s| s.num_edges() == edges).collect())
}

fn enumerate_unchecked(g: u32, n: u32, max_edges: u32) -> Vec<StableGraph> {
    let mut level = vec![StableGraph::single_vertex(g, n)];
    let mut all = level.clone();
    for _ in 0..max_edges {
        let mut next: BTreeMap<String, StableGraph> = BTreeMap::new();
        for h in level.iter().flat_map(|s| s.degenerations()) {
            let c = h.canonical();
            next.entry(c.to_string()).or_insert(c);
        }
        level = next.into_values().collect();
        all.extend(level.iter().cloned());
    }
    all
}

/// Data of one term of the volume sum.
#[derive(Clone, Debug)]
pub struct GraphContribution {
    pub graph: StableGraph,
    pub canonical: String,
    pub aut: BigInt,
    pub leg_multiplicity: BigInt,
    /// `P_Γ` in the edge variables, prefactor and `1/|Aut|` included.
    pub polynomial: EdgePolynomial,
    /// `Z(P_Γ)` times the leg multiplicity.
    pub value: PiValue,
}

/// `P_Γ` for a graph of type `(g, n)`.
pub fn p_gamma(graph: &StableGraph, g: u32, n: u32) -> Result<EdgePolynomial, GraphError> {
    let edges = graph.edge_list();
    let nvars = edges.len();
    let mut poly = EdgePolynomial::constant(nvars, Rational::one());
    for (v, vert) in graph.vertices.iter().enumerate() {
        let mut slots = vec![Slot::Zero; vert.legs as usize];
        for (e, &(i, j)) in edges.iter().enumerate() {
            if i == v {
                slots.push(Slot::Var(e));
            }
            if j == v {
                slots.push(Slot::Var(e));
            }
        }
        let vp = n_poly(vert.genus, slots.len())?;
        poly = poly.mul(&vp.eval_edges(&slots, nvars));
    }
    let (gi, ni) = (g as i64, n as i64);
    let pre = int(BigInt::one() << (6 * gi - 5 + 2 * ni) as usize) * int(factorial((4 * gi - 4 + ni) as u64))
        / int(factorial((6 * gi - 7 + 2 * ni) as u64))
        / int(BigInt::one() << (graph.num_vertices() - 1))
        / int(graph.aut_order());
    Ok(poly.times_all_vars().scale(&pre))
}

/// `Z(∏ b_i^{m_i}) = ∏ m_i! ζ(m_i + 1)`, extended linearly.
pub fn zeta_transform(poly: &EdgePolynomial, pi_exp: i64) -> Result<PiValue, GraphError> {
    let mut total = PiValue::zero(pi_exp);
    for (exps, c) in &poly.terms {
        let mut term = PiValue::rational(c.clone());
        for &m in exps {
            if m % 2 == 0 {
                return Err(GraphError::EvenExponent(m));
            }
            term = term.mul(&zeta_even(m + 1)?.scale(&int(factorial(m as u64))));
        }
        total = total.checked_add(&term)?;
    }
    Ok(total)
}

pub fn contribution(graph: &StableGraph, g: u32, n: u32) -> Result<GraphContribution, GraphError> {
    let polynomial = p_gamma(graph, g, n)?;
    let mult = graph.leg_multiplicity();
    let value = zeta_transform(&polynomial, 6 * g as i64 - 6 + 2 * n as i64)?.scale(&int(mult.clone()));
    Ok(GraphContribution {
        graph: graph.clone(),
        canonical: graph.to_string(),
        aut: graph.aut_order(),
        leg_multiplicity: mult,
        polynomial,
        value,
    })
}

/// Every term of the volume sum, in enumeration order.
pub fn contributions(g: u32, n: u32) -> Result<Vec<GraphContribution>, GraphError> {
    enumerate_stable_graphs(g, n)?.par_iter().map(|s| contribution(s, g, n)).collect()
}

pub fn sum_values(parts: &[GraphContribution], pi_exp: i64) -> Result<PiValue, GraphError> {
    parts.iter().try_fold(PiValue::zero(pi_exp), |acc, c| Ok(acc.checked_add(&c.value)?))
}

/// `Vol Q_{g,n}` as the full stable-graph sum.
pub fn masur_veech_volume(g: u32, n: u32) -> Result<PiValue, GraphError> {
    sum_values(&contributions(g, n)?, 6 * g as i64 - 6 + 2 * n as i64)
}

/// `Σ_{|E(Γ)|=1} Vol(Γ) / ζ(6g-6+2n)`.
pub fn one_edge_cyl1(g: u32, n: u32) -> Result<Rational, GraphError> {
    let d = 6 * g as i64 - 6 + 2 * n as i64;
    let parts: Vec<GraphContribution> =
        stable_graphs_with_edges(g, n, 1)?.iter().map(|s| contribution(s, g, n)).collect::<Result<_, _>>()?;
    let total = sum_values(&parts, d)?;
    let z = zeta_even(d as u32)?;
    let q = total.checked_div(&z)?;
    debug_assert_eq!(q.pi_exp, 0);
    Ok(q.coeff)
}

/// Exhaustive generator over all decorated adjacency matrices; used only to
/// cross-check [`enumerate_stable_graphs`] on small cases.
pub fn brute_force_census(g: u32, n: u32) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let max_v = (2 * g + n - 2) as usize;
    let max_e = 3 * g + n - 3;
    for v in 1..=max_v {
        let mut decos = Vec::new();
        decorations(v, g, n, &mut Vec::new(), &mut decos);
        let slots: Vec<(usize, usize)> = (0..v).flat_map(|i| (i..v).map(move |j| (i, j))).collect();
        for deco in &decos {
            let mut counts = vec![0u32; slots.len()];
            fill(&slots, 0, max_e, &mut counts, &mut |counts| {
                let mut adj = vec![vec![0; v]; v];
                for (&(i, j), &c) in slots.iter().zip(counts) {
                    adj[i][j] = c;
                    adj[j][i] = c;
                }
                let s = StableGraph { vertices: deco.clone(), adj };
                if s.is_connected() && s.is_stable() && s.genus() == g {
                    out.insert(s.canonical_string());
                }
            });
        }
    }
    out
}

fn decorations(v: usize, g: u32, n: u32, cur: &mut Vec<Vertex>, out: &mut Vec<Vec<Vertex>>) {
    if cur.len() == v {
        if cur.iter().map(|x| x.legs).sum::<u32>() == n && cur.iter().map(|x| x.genus).sum::<u32>() <= g {
            out.push(cur.clone());
        }
        return;
    }
    for genus in 0..=g {
        for legs in 0..=n {
            cur.push(Vertex { genus, legs });
            decorations(v, g, n, cur, out);
            cur.pop();
        }
    }
}

fn fill(slots: &[(usize, usize)], k: usize, budget: u32, counts: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
    if k == slots.len() {
        f(counts);
        return;
    }
    for c in 0..=budget {
        counts[k] = c;
        fill(slots, k + 1, budget - c, counts, f);
    }
    counts[k] = 0;
}
