//! Chain-level analyses: path decomposition, irreducibility and periodicity,
//! the absolute-convergence check (reachability plus a maximizing
//! Bellman-Ford with a certified cycle witness), the stationary
//! distribution, the exact effective-weight comparison, and the
//! almost-sure-convergence check built from them.

use super::{ChainError, Decision, Distribution, PathFin, Sign, Verdict, Wdtmc, Witness};
use crate::exact::{log_linear_sign, Rat, RatMatrix};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

/// Result of decomposing a finite path: a simple spine plus simple cycles
/// whose edge multisets partition the path's edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub spine: PathFin,
    pub cycles: Vec<PathFin>,
}

/// Exact comparison of the effective-weight product against 1, with a float
/// view of the log for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveWeight {
    pub cmp: Ordering,
    pub float_log: f64,
}

/// Bit budget for the integer-exponent product route of the
/// effective-weight comparison; beyond it the log-enclosure route takes
/// over.
const PRODUCT_BIT_BUDGET: u128 = 1_000_000;

impl Wdtmc {
    /// Splits `path` into a simple spine and simple cycles by removing each
    /// cycle as soon as it closes. The weight identity
    /// `W(path) = W(spine) * prod W(cycle)` holds exactly.
    pub fn decompose_path(&self, path: &PathFin) -> Result<Decomposition, ChainError> {
        self.check_path(path.states())?;
        let mut stack: Vec<usize> = Vec::new();
        let mut pos: HashMap<usize, usize> = HashMap::new();
        let mut cycles = Vec::new();
        for &s in path.states() {
            if let Some(&p) = pos.get(&s) {
                let mut cyc = stack[p..].to_vec();
                cyc.push(s);
                for t in stack.drain(p + 1..) {
                    pos.remove(&t);
                }
                cycles.push(PathFin::new(cyc));
            } else {
                pos.insert(s, stack.len());
                stack.push(s);
            }
        }
        Ok(Decomposition {
            spine: PathFin::new(stack),
            cycles,
        })
    }

    /// Strongly connected components, each sorted ascending; the list is
    /// ordered by smallest member.
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        let n = self.num_states();
        // Kosaraju: forward post-order, then reverse-graph sweeps.
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for root in 0..n {
            if seen[root] {
                continue;
            }
            // iterative DFS with explicit expansion state
            let mut stack = vec![(root, 0usize)];
            seen[root] = true;
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                let succs = &self.out[v];
                if *next < succs.len() {
                    let w = self.edges[succs[*next]].dst;
                    *next += 1;
                    if !seen[w] {
                        seen[w] = true;
                        stack.push((w, 0));
                    }
                } else {
                    order.push(v);
                    stack.pop();
                }
            }
        }
        let mut rev = vec![Vec::new(); n];
        for e in &self.edges {
            rev[e.dst].push(e.src);
        }
        let mut comp = vec![usize::MAX; n];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for &root in order.iter().rev() {
            if comp[root] != usize::MAX {
                continue;
            }
            let id = comps.len();
            let mut members = vec![root];
            comp[root] = id;
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                for &w in &rev[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members);
        }
        comps.sort_by_key(|c| c[0]);
        comps
    }

    /// True iff the edge graph is one strongly connected component.
    pub fn is_irreducible(&self) -> bool {
        self.sccs().len() == 1
    }

    /// True iff every strongly connected component has cycle-length gcd 1,
    /// computed from breadth-first levels. A component with no internal
    /// edge has no cycles at all, which the periodicity definition makes
    /// vacuously periodic, so such chains report `false`.
    pub fn is_aperiodic(&self) -> bool {
        for scc in self.sccs() {
            let members: BTreeSet<usize> = scc.iter().copied().collect();
            let mut level: HashMap<usize, i64> = HashMap::new();
            level.insert(scc[0], 0);
            let mut queue = std::collections::VecDeque::from([scc[0]]);
            while let Some(v) = queue.pop_front() {
                for e in self.outgoing(v) {
                    if members.contains(&e.dst) && !level.contains_key(&e.dst) {
                        level.insert(e.dst, level[&v] + 1);
                        queue.push_back(e.dst);
                    }
                }
            }
            let mut g: u64 = 0;
            let mut internal_edges = false;
            for &v in &scc {
                for e in self.outgoing(v) {
                    if members.contains(&e.dst) {
                        internal_edges = true;
                        let diff = level[&v] + 1 - level[&e.dst];
                        g = g.gcd(&diff.unsigned_abs());
                    }
                }
            }
            if !internal_edges || g != 1 {
                return false;
            }
        }
        true
    }

    /// Absolute-convergence check: not convergent iff an infinite-weight
    /// edge or a cycle with exact product greater than 1 is reachable from
    /// the initial state. The cycle search is a maximizing Bellman-Ford on
    /// the reachable subgraph; a returned witness is re-verified so its
    /// product genuinely exceeds 1.
    pub fn check_absolute(&self) -> Verdict {
        let reach = self.reachable(self.initial).expect("initial index valid");
        for e in &self.edges {
            if reach.contains(&e.src) && e.weight.is_infinite() {
                return Verdict {
                    decision: Decision::NotConvergent,
                    witness: Witness::InfiniteEdge {
                        src: e.src,
                        dst: e.dst,
                    },
                };
            }
        }
        if let Some(cycle) = self.positive_cycle(&reach) {
            let w = self.path_weight(&cycle).expect("witness is a path");
            assert_eq!(w.cmp_one(), Ordering::Greater, "witness must exceed 1");
            return Verdict {
                decision: Decision::NotConvergent,
                witness: Witness::PositiveCycle(cycle),
            };
        }
        Verdict {
            decision: Decision::Convergent,
            witness: Witness::None,
        }
    }

    /// Maximizing multiplicative Bellman-Ford restricted to `reach`:
    /// relaxes with exact products round by round (only out-edges of states
    /// improved in the previous round need work), and on an n-th-round
    /// improvement walks the predecessor graph into the pumping cycle.
    fn positive_cycle(&self, reach: &BTreeSet<usize>) -> Option<PathFin> {
        let n = reach.len();
        let mut best: HashMap<usize, Rat> = HashMap::new();
        let mut pred: HashMap<usize, usize> = HashMap::new();
        best.insert(self.initial, Rat::one());

        fn ratio(e: &super::Edge) -> &Rat {
            e.weight
                .as_finite()
                .expect("no infinite edges at this point")
        }

        let mut dirty: BTreeSet<usize> = BTreeSet::from([self.initial]);
        for _ in 1..n {
            if dirty.is_empty() {
                break;
            }
            let mut next_dirty = BTreeSet::new();
            for &src in &dirty {
                let b = best[&src].clone();
                for e in self.outgoing(src) {
                    debug_assert!(reach.contains(&e.dst));
                    let cand = &b * ratio(e);
                    if best.get(&e.dst).is_none_or(|cur| cand > *cur) {
                        best.insert(e.dst, cand);
                        pred.insert(e.dst, src);
                        next_dirty.insert(e.dst);
                    }
                }
            }
            dirty = next_dirty;
        }
        if dirty.is_empty() {
            return None;
        }
        // detection pass: any further improvement proves a pumping cycle
        let mut any_improving = false;
        for e in &self.edges {
            if !reach.contains(&e.src) {
                continue;
            }
            let Some(b) = best.get(&e.src).cloned() else {
                continue;
            };
            let cand = &b * ratio(e);
            if best.get(&e.dst).is_none_or(|cur| cand > *cur) {
                any_improving = true;
                pred.insert(e.dst, e.src);
                if let Some(cycle) = extract_pred_cycle(&pred, e.dst, n) {
                    let w = self.path_weight(&cycle).expect("pred edges exist");
                    if w.cmp_one() == Ordering::Greater {
                        return Some(cycle);
                    }
                }
            }
        }
        assert!(
            !any_improving,
            "an improving edge after n-1 rounds implies a positive predecessor cycle"
        );
        None
    }

    /// Unique stationary distribution of a finite irreducible chain, solved
    /// exactly from the balance equations plus normalization. The residual
    /// is verified inside the solver; masses of an irreducible chain are
    /// strictly positive.
    pub fn stationary_distribution(&self) -> Result<Distribution, ChainError> {
        if !self.is_irreducible() {
            return Err(ChainError::NotIrreducible);
        }
        let n = self.num_states();
        let mut a = RatMatrix::zero(n + 1, n);
        for j in 0..n {
            *a.get_mut(j, j) = -Rat::one();
        }
        for e in &self.edges {
            let cell = a.get_mut(e.dst, e.src);
            *cell = &*cell + &e.prob;
        }
        for j in 0..n {
            *a.get_mut(n, j) = Rat::one();
        }
        let mut b = vec![Rat::zero(); n + 1];
        b[n] = Rat::one();
        let mass = crate::exact::solve_linear(&a, &b)?;
        debug_assert!(mass.iter().all(|m| m.is_positive()));
        Distribution::new(mass)
    }

    /// Exact comparison of `prod_e ratio_e^(rho(src)*prob)` against 1 — the
    /// multiplicative form of the effective weight — plus its float log.
    ///
    /// Uses integer exponents over the common denominator while the
    /// intermediate product stays under the bit budget, then exact
    /// log-enclosure arithmetic.
    pub fn effective_weight(&self, rho: &Distribution) -> Result<EffectiveWeight, ChainError> {
        let mut terms: Vec<(Rat, Rat)> = Vec::with_capacity(self.edges.len());
        let mut float_log = 0.0f64;
        for e in &self.edges {
            let Some(ratio) = e.weight.as_finite() else {
                return Err(ChainError::InfiniteEdgePresent(
                    self.states[e.src].clone(),
                    self.states[e.dst].clone(),
                ));
            };
            let mass = rho.mass(e.src) * &e.prob;
            if mass.is_zero() || ratio.is_one() {
                continue;
            }
            float_log += mass.to_f64() * ratio.ln_f64();
            terms.push((mass, ratio.clone()));
        }
        let cmp = if let Some(cmp) = integer_exponent_cmp(&terms) {
            cmp
        } else {
            log_linear_sign(&terms).ok_or(ChainError::IndeterminateEffectiveWeight)?
        };
        Ok(EffectiveWeight { cmp, float_log })
    }

    /// Almost-sure-convergence check. Order of business: a reachable
    /// infinite edge decides immediately; otherwise the reachable subchain
    /// must be irreducible and aperiodic (the hypotheses under which the
    /// stationary distribution is the limiting one), and the sign of the
    /// effective weight decides, with "exactly zero" counting as
    /// convergent.
    pub fn check_almost_sure(&self) -> Result<Verdict, ChainError> {
        let reach = self.reachable(self.initial)?;
        for e in &self.edges {
            if reach.contains(&e.src) && e.weight.is_infinite() {
                return Ok(Verdict {
                    decision: Decision::NotConvergent,
                    witness: Witness::InfiniteEdge {
                        src: e.src,
                        dst: e.dst,
                    },
                });
            }
        }
        let (sub, _back) = self.restrict(&reach);
        if !sub.is_irreducible() {
            return Err(ChainError::NotIrreducible);
        }
        if !sub.is_aperiodic() {
            return Err(ChainError::NotAperiodic);
        }
        let rho = sub.stationary_distribution()?;
        let ew = sub.effective_weight(&rho)?;
        let decision = if ew.cmp == Ordering::Greater {
            Decision::NotConvergent
        } else {
            Decision::Convergent
        };
        Ok(Verdict {
            decision,
            witness: Witness::EffectiveWeight {
                sign: Sign::from_cmp_one(ew.cmp),
                cmp: ew.cmp,
                float_log: ew.float_log,
            },
        })
    }

    /// Subchain induced by `keep` (which must be closed under outgoing
    /// edges and contain the initial state). Returns the subchain and the
    /// map from new indices back to original ones.
    pub fn restrict(&self, keep: &BTreeSet<usize>) -> (Wdtmc, Vec<usize>) {
        let back: Vec<usize> = keep.iter().copied().collect();
        let fwd: HashMap<usize, usize> = back
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let states = back.iter().map(|&i| self.states[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| keep.contains(&e.src))
            .map(|e| super::Edge {
                src: fwd[&e.src],
                dst: fwd[&e.dst],
                prob: e.prob.clone(),
                weight: e.weight.clone(),
            })
            .collect();
        let initial = fwd[&self.initial];
        let sub = Wdtmc::new(states, edges, initial).expect("restriction preserves structure");
        (sub, back)
    }

    /// For n = 1..n_max, the maximum over state pairs of
    /// `|P^n(x,y) - rho*(y)|`, computed exactly and rendered as floats.
    /// Requires an irreducible, aperiodic chain.
    pub fn convergence_rate_probe(&self, n_max: usize) -> Result<Vec<(usize, f64)>, ChainError> {
        if !self.is_irreducible() {
            return Err(ChainError::NotIrreducible);
        }
        if !self.is_aperiodic() {
            return Err(ChainError::NotAperiodic);
        }
        let rho = self.stationary_distribution()?;
        let p = self.transition_matrix();
        let n = self.num_states();
        let mut m = p.clone();
        let mut out = Vec::with_capacity(n_max);
        for step in 1..=n_max {
            let mut dev = Rat::zero();
            for x in 0..n {
                for y in 0..n {
                    let d = (m.get(x, y) - rho.mass(y)).abs();
                    dev = dev.max(d);
                }
            }
            out.push((step, dev.to_f64()));
            if step < n_max {
                m = m.mul(&p).expect("square");
            }
        }
        Ok(out)
    }
}

/// Walks `steps` predecessor links from `start`, then extracts the cycle
/// the walk is guaranteed to sit in.
fn extract_pred_cycle(pred: &HashMap<usize, usize>, start: usize, steps: usize) -> Option<PathFin> {
    let mut x = start;
    for _ in 0..steps {
        x = *pred.get(&x)?;
    }
    let mut rev = vec![x];
    let mut y = *pred.get(&x)?;
    while y != x {
        rev.push(y);
        y = *pred.get(&y)?;
    }
    rev.push(x);
    rev.reverse();
    Some(PathFin::new(rev))
}

/// Spec-primary route: compare `prod r_i^(L * c_i)` with 1 using integer
/// exponents over the common denominator `L`, provided the intermediate
/// product stays under the bit budget. `None` means "too large, use logs".
fn integer_exponent_cmp(terms: &[(Rat, Rat)]) -> Option<Ordering> {
    let mut l = BigInt::one();
    for (c, _) in terms {
        l = l.lcm(c.denom());
        if l.bits() > 64 {
            return None;
        }
    }
    let mut estimate: u128 = 0;
    let mut exps: Vec<(u32, bool, Rat)> = Vec::with_capacity(terms.len());
    for (c, r) in terms {
        let k = (&l / c.denom()) * c.numer();
        let negative = k < BigInt::zero();
        let k = k.magnitude().to_u32()?;
        let bits = r.numer().bits().max(r.denom().bits()) as u128;
        estimate += k as u128 * bits;
        if estimate > PRODUCT_BIT_BUDGET {
            return None;
        }
        exps.push((k, negative, r.clone()));
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for (k, negative, r) in exps {
        if k == 0 {
            continue;
        }
        let (up, down) = if negative {
            (r.denom().pow(k), r.numer().pow(k))
        } else {
            (r.numer().pow(k), r.denom().pow(k))
        };
        num *= up;
        den *= down;
    }
    Some(num.cmp(&den))
}

#[cfg(test)]
mod tests {
    use super::super::tests::chain;
    use super::*;
    use crate::exact::Scale;
    use num_integer::Integer;

    #[test]
    fn decompose_simple_path_is_identity() {
        let c = chain(
            &["s1", "s2", "s3"],
            &[
                (0, 1, (1, 1), Some((1, 1))),
                (1, 2, (1, 1), Some((1, 1))),
                (2, 2, (1, 1), Some((1, 1))),
            ],
            0,
        );
        let d = c.decompose_path(&PathFin::of(&[0, 1, 2])).unwrap();
        assert_eq!(d.spine, PathFin::of(&[0, 1, 2]));
        assert!(d.cycles.is_empty());
    }

    #[test]
    fn decompose_pops_cycles_as_encountered() {
        // stack-walk oracle: s1,s2,s1,s3 -> spine (s1,s3), cycles {(s1,s2,s1)}
        let c = chain(
            &["s1", "s2", "s3"],
            &[
                (0, 1, (1, 2), Some((2, 1))),
                (0, 2, (1, 2), Some((1, 2))),
                (1, 0, (1, 1), Some((3, 1))),
                (2, 2, (1, 1), Some((1, 1))),
            ],
            0,
        );
        let d = c.decompose_path(&PathFin::of(&[0, 1, 0, 2])).unwrap();
        assert_eq!(d.spine, PathFin::of(&[0, 2]));
        assert_eq!(d.cycles, vec![PathFin::of(&[0, 1, 0])]);
    }

    #[test]
    fn decompose_repeated_self_loop() {
        let c = chain(&["s1"], &[(0, 0, (1, 1), Some((2, 1)))], 0);
        let d = c.decompose_path(&PathFin::of(&[0, 0, 0])).unwrap();
        assert_eq!(d.spine, PathFin::of(&[0]));
        assert_eq!(d.cycles, vec![PathFin::of(&[0, 0]), PathFin::of(&[0, 0])]);
        // weight identity: 2*2 = 1 * 2 * 2
        let total = c.path_weight(&PathFin::of(&[0, 0, 0])).unwrap();
        assert_eq!(total, Scale::Finite(Rat::of(4, 1)));
    }

    #[test]
    fn irreducibility_examples() {
        let two_cycle = chain(
            &["s1", "s2"],
            &[(0, 1, (1, 1), Some((1, 1))), (1, 0, (1, 1), Some((1, 1)))],
            0,
        );
        assert!(two_cycle.is_irreducible());
        let absorbing = chain(
            &["s1", "s2"],
            &[(0, 1, (1, 1), Some((1, 1))), (1, 1, (1, 1), Some((1, 1)))],
            0,
        );
        assert!(!absorbing.is_irreducible());
    }

    #[test]
    fn irreducibility_matches_pairwise_reachability_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        for _ in 0..30 {
            let n = 8;
            let mut edges = Vec::new();
            for s in 0..n {
                let mut dsts: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
                if dsts.is_empty() {
                    dsts.push((s + 1) % n);
                }
                dsts.dedup();
                let k = dsts.len() as i64;
                for d in dsts {
                    edges.push(super::super::Edge {
                        src: s,
                        dst: d,
                        prob: Rat::of(1, k),
                        weight: Scale::one(),
                    });
                }
            }
            let c = Wdtmc::new((0..n).map(|i| format!("s{i}")).collect(), edges, 0).unwrap();
            let oracle = (0..n).all(|a| {
                let r = c.reachable(a).unwrap();
                (0..n).all(|b| r.contains(&b))
            });
            assert_eq!(c.is_irreducible(), oracle);
        }
    }

    #[test]
    fn aperiodicity_examples() {
        let lazy = chain(
            &["s1", "s2"],
            &[
                (0, 0, (1, 2), Some((1, 1))),
                (0, 1, (1, 2), Some((1, 1))),
                (1, 0, (1, 1), Some((1, 1))),
            ],
            0,
        );
        assert!(lazy.is_aperiodic());
        let two_cycle = chain(
            &["s1", "s2"],
            &[(0, 1, (1, 1), Some((1, 1))), (1, 0, (1, 1), Some((1, 1)))],
            0,
        );
        assert!(!two_cycle.is_aperiodic());
    }

    #[test]
    fn aperiodicity_three_cycle_with_chord() {
        // cycle-length oracle: lengths {3, 2} occur, gcd 1
        let c = chain(
            &["a", "b", "c"],
            &[
                (0, 1, (1, 1), Some((1, 1))),
                (1, 2, (1, 2), Some((1, 1))),
                (1, 0, (1, 2), Some((1, 1))),
                (2, 0, (1, 1), Some((1, 1))),
            ],
            0,
        );
        let mut lengths = BTreeSet::new();
        // enumerate cycle lengths up to 6 through state 0 by walking products
        fn walk(c: &Wdtmc, at: usize, depth: usize, lengths: &mut BTreeSet<usize>) {
            if depth > 6 {
                return;
            }
            for e in c.outgoing(at) {
                if e.dst == 0 {
                    lengths.insert(depth + 1);
                } else {
                    walk(c, e.dst, depth + 1, lengths);
                }
            }
        }
        walk(&c, 0, 0, &mut lengths);
        let g = lengths.iter().fold(0usize, |acc, &l| acc.gcd(&l));
        assert_eq!(g, 1);
        assert!(c.is_aperiodic());
    }

    #[test]
    fn check_absolute_zero_weight_loop_is_convergent() {
        let c = chain(&["s"], &[(0, 0, (1, 1), Some((1, 1)))], 0);
        let v = c.check_absolute();
        assert_eq!(v.decision, Decision::Convergent);
        assert_eq!(v.witness, Witness::None);
    }

    #[test]
    fn check_absolute_expanding_loop_has_cycle_witness() {
        let c = chain(&["s"], &[(0, 0, (1, 1), Some((2, 1)))], 0);
        let v = c.check_absolute();
        assert_eq!(v.decision, Decision::NotConvergent);
        assert_eq!(v.witness, Witness::PositiveCycle(PathFin::of(&[0, 0])));
    }

    #[test]
    fn check_absolute_infinite_edge_reachability_flip() {
        // s_init -> s1 finite, s1 has an infinite self-loop
        let c = chain(
            &["init", "s1"],
            &[(0, 1, (1, 1), Some((1, 2))), (1, 1, (1, 1), None)],
            0,
        );
        let v = c.check_absolute();
        assert_eq!(v.decision, Decision::NotConvergent);
        assert_eq!(v.witness, Witness::InfiniteEdge { src: 1, dst: 1 });

        // same chain, s1 unreachable: initial keeps a lazy loop instead
        let c = chain(
            &["init", "s1"],
            &[(0, 0, (1, 1), Some((1, 2))), (1, 1, (1, 1), None)],
            0,
        );
        assert_eq!(c.check_absolute().decision, Decision::Convergent);
    }

    #[test]
    fn stationary_symmetric_two_state() {
        let c = chain(
            &["s1", "s2"],
            &[
                (0, 0, (1, 2), Some((1, 1))),
                (0, 1, (1, 2), Some((1, 1))),
                (1, 0, (1, 2), Some((1, 1))),
                (1, 1, (1, 2), Some((1, 1))),
            ],
            0,
        );
        let rho = c.stationary_distribution().unwrap();
        assert_eq!(rho.masses(), &[Rat::of(1, 2), Rat::of(1, 2)]);
    }

    #[test]
    fn stationary_asymmetric_two_state() {
        // balance-equation hand oracle: rho = (1/3, 2/3)
        let c = chain(
            &["s1", "s2"],
            &[
                (0, 0, (1, 2), Some((1, 1))),
                (0, 1, (1, 2), Some((1, 1))),
                (1, 0, (1, 4), Some((1, 1))),
                (1, 1, (3, 4), Some((1, 1))),
            ],
            0,
        );
        let rho = c.stationary_distribution().unwrap();
        assert_eq!(rho.masses(), &[Rat::of(1, 3), Rat::of(2, 3)]);
        // residual rho*P - rho is exactly zero
        let p = c.transition_matrix();
        for j in 0..2 {
            let mut acc = Rat::zero();
            for i in 0..2 {
                acc = &acc + &(rho.mass(i) * p.get(i, j));
            }
            assert_eq!(acc, *rho.mass(j));
        }
    }

    #[test]
    fn stationary_requires_irreducibility() {
        let c = chain(
            &["s1", "s2"],
            &[(0, 1, (1, 1), Some((1, 1))), (1, 1, (1, 1), Some((1, 1)))],
            0,
        );
        assert!(matches!(
            c.stationary_distribution(),
            Err(ChainError::NotIrreducible)
        ));
    }

    /// Miniature of the "absolutely no, almost-surely yes"
    /// regime: self-loop scale 4 breaks absolute convergence while the
    /// stationary-weighted product is (1/2)^(1/6) < 1.
    fn half_pow_sixth_chain() -> Wdtmc {
        chain(
            &["s1", "s2"],
            &[
                (0, 0, (1, 2), Some((4, 1))),
                (0, 1, (1, 2), Some((1, 4))),
                (1, 1, (3, 4), Some((1, 1))),
                (1, 0, (1, 4), Some((1, 2))),
            ],
            0,
        )
    }

    #[test]
    fn effective_weight_all_ones_is_equal() {
        let c = chain(
            &["s1", "s2"],
            &[
                (0, 1, (1, 1), Some((1, 1))),
                (1, 0, (1, 2), Some((1, 1))),
                (1, 1, (1, 2), Some((1, 1))),
            ],
            0,
        );
        let rho = c.stationary_distribution().unwrap();
        let ew = c.effective_weight(&rho).unwrap();
        assert_eq!(ew.cmp, Ordering::Equal);
        assert_eq!(ew.float_log, 0.0);
    }

    #[test]
    fn effective_weight_hand_oracle() {
        // edge masses (1/6, 1/6, 1/2, 1/6) with common denominator L = 6:
        // integer-exponent product 4 * (1/4) * 1^3 * (1/2) = 1/2 < 1
        let c = half_pow_sixth_chain();
        let rho = c.stationary_distribution().unwrap();
        assert_eq!(rho.masses(), &[Rat::of(1, 3), Rat::of(2, 3)]);
        let ew = c.effective_weight(&rho).unwrap();
        assert_eq!(ew.cmp, Ordering::Less);
        let expected = (0.5f64).ln() / 6.0;
        assert!((ew.float_log - expected).abs() < 1e-12);

        // flipping the last scale to 2 gives 4 * (1/4) * 2 = 2 > 1
        let c2 = chain(
            &["s1", "s2"],
            &[
                (0, 0, (1, 2), Some((4, 1))),
                (0, 1, (1, 2), Some((1, 4))),
                (1, 1, (3, 4), Some((1, 1))),
                (1, 0, (1, 4), Some((2, 1))),
            ],
            0,
        );
        let rho2 = c2.stationary_distribution().unwrap();
        let ew2 = c2.effective_weight(&rho2).unwrap();
        assert_eq!(ew2.cmp, Ordering::Greater);
    }

    #[test]
    fn effective_weight_rejects_infinite_edges() {
        let c = chain(&["s1"], &[(0, 0, (1, 1), None)], 0);
        let rho = Distribution::new(vec![Rat::one()]).unwrap();
        assert!(matches!(
            c.effective_weight(&rho),
            Err(ChainError::InfiniteEdgePresent(_, _))
        ));
    }

    #[test]
    fn almost_sure_on_the_miniature_regime() {
        let c = half_pow_sixth_chain();
        // absolute says no: the scale-4 self-loop is a positive cycle
        assert_eq!(c.check_absolute().decision, Decision::NotConvergent);
        // almost-sure says yes: effective weight below zero
        let v = c.check_almost_sure().unwrap();
        assert_eq!(v.decision, Decision::Convergent);
        match v.witness {
            Witness::EffectiveWeight { sign, cmp, .. } => {
                assert_eq!(sign, Sign::Neg);
                assert_eq!(cmp, Ordering::Less);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn almost_sure_zero_effective_weight_is_convergent() {
        let c = chain(
            &["s1", "s2"],
            &[
                (0, 0, (1, 2), Some((1, 1))),
                (0, 1, (1, 2), Some((1, 1))),
                (1, 0, (1, 2), Some((1, 1))),
                (1, 1, (1, 2), Some((1, 1))),
            ],
            0,
        );
        let v = c.check_almost_sure().unwrap();
        assert_eq!(v.decision, Decision::Convergent);
        assert!(matches!(
            v.witness,
            Witness::EffectiveWeight {
                sign: Sign::Zero,
                ..
            }
        ));
    }

    #[test]
    fn almost_sure_reports_hypothesis_failures() {
        let absorbing = chain(
            &["s1", "s2"],
            &[(0, 1, (1, 1), Some((1, 1))), (1, 1, (1, 1), Some((1, 1)))],
            0,
        );
        // the reachable restriction from s1 still includes both states
        assert!(matches!(
            absorbing.check_almost_sure(),
            Err(ChainError::NotIrreducible)
        ));
        let periodic = chain(
            &["s1", "s2"],
            &[(0, 1, (1, 1), Some((1, 1))), (1, 0, (1, 1), Some((1, 1)))],
            0,
        );
        assert!(matches!(
            periodic.check_almost_sure(),
            Err(ChainError::NotAperiodic)
        ));
        // but an unreachable second component is fine
        let with_island = chain(
            &["s1", "island"],
            &[(0, 0, (1, 1), Some((1, 2))), (1, 1, (1, 1), Some((3, 1)))],
            0,
        );
        assert_eq!(
            with_island.check_almost_sure().unwrap().decision,
            Decision::Convergent
        );
    }

    #[test]
    fn almost_sure_infinite_edge_short_circuits_hypotheses() {
        // the infinite self-loop makes the chain reducible, but the verdict
        // must come from the infinite edge, not a precondition error
        let c = chain(
            &["init", "s1"],
            &[(0, 1, (1, 1), Some((1, 2))), (1, 1, (1, 1), None)],
            0,
        );
        let v = c.check_almost_sure().unwrap();
        assert_eq!(v.decision, Decision::NotConvergent);
        assert_eq!(v.witness, Witness::InfiniteEdge { src: 1, dst: 1 });
    }

    #[test]
    fn probe_single_state_has_zero_deviation() {
        let c = chain(&["s"], &[(0, 0, (1, 1), Some((1, 1)))], 0);
        for (_, dev) in c.convergence_rate_probe(8).unwrap() {
            assert_eq!(dev, 0.0);
        }
    }

    #[test]
    fn probe_fair_lazy_two_state_is_exact_at_n1() {
        // P is already rank-one doubly stochastic: P^1 rows equal rho*
        let c = chain(
            &["s1", "s2"],
            &[
                (0, 0, (1, 2), Some((1, 1))),
                (0, 1, (1, 2), Some((1, 1))),
                (1, 0, (1, 2), Some((1, 1))),
                (1, 1, (1, 2), Some((1, 1))),
            ],
            0,
        );
        let probe = c.convergence_rate_probe(4).unwrap();
        assert!(probe.iter().all(|&(_, dev)| dev == 0.0));
    }

    #[test]
    fn probe_requires_hypotheses() {
        let periodic = chain(
            &["s1", "s2"],
            &[(0, 1, (1, 1), Some((1, 1))), (1, 0, (1, 1), Some((1, 1)))],
            0,
        );
        assert!(matches!(
            periodic.convergence_rate_probe(4),
            Err(ChainError::NotAperiodic)
        ));
    }
}
