use std::collections::{BTreeSet, HashMap, VecDeque};
use std::hash::Hash;

/// Edge label: `None` is an ε-edge.
pub type Label<L> = Option<L>;

/// Nondeterministic automaton with ε-edges. States are dense indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa<L> {
    edges: Vec<Vec<(Label<L>, usize)>>,
    initial: BTreeSet<usize>,
    finals: BTreeSet<usize>,
}

impl<L> Default for Nfa<L> {
    fn default() -> Self {
        Nfa {
            edges: Vec::new(),
            initial: BTreeSet::new(),
            finals: BTreeSet::new(),
        }
    }
}

impl<L: Clone + Eq + Hash + Ord> Nfa<L> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Automaton accepting exactly the empty word.
    pub fn epsilon() -> Self {
        let mut n = Nfa::new();
        let q = n.add_state();
        n.set_initial(q);
        n.set_final(q);
        n
    }

    /// Automaton accepting exactly `word`.
    pub fn word(word: &[L]) -> Self {
        let mut n = Nfa::new();
        let mut q = n.add_state();
        n.set_initial(q);
        for a in word {
            let r = n.add_state();
            n.add_edge(q, Some(a.clone()), r);
            q = r;
        }
        n.set_final(q);
        n
    }

    pub fn add_state(&mut self) -> usize {
        self.edges.push(Vec::new());
        self.edges.len() - 1
    }

    pub fn add_states(&mut self, n: usize) -> usize {
        let first = self.edges.len();
        self.edges.resize_with(first + n, Vec::new);
        first
    }

    /// Adds an edge unless it is already present. Returns whether it was new.
    pub fn add_edge(&mut self, from: usize, label: Label<L>, to: usize) -> bool {
        assert!(from < self.edges.len() && to < self.edges.len());
        if self.edges[from].iter().any(|(l, t)| *t == to && *l == label) {
            return false;
        }
        self.edges[from].push((label, to));
        true
    }

    pub fn set_initial(&mut self, q: usize) {
        self.initial.insert(q);
    }

    pub fn set_final(&mut self, q: usize) {
        self.finals.insert(q);
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn initial(&self) -> &BTreeSet<usize> {
        &self.initial
    }

    pub fn finals(&self) -> &BTreeSet<usize> {
        &self.finals
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals.contains(&q)
    }

    pub fn out(&self, q: usize) -> &[(Label<L>, usize)] {
        &self.edges[q]
    }

    /// All edges `(from, label, to)`, grouped by source state.
    pub fn edges(&self) -> impl Iterator<Item = (usize, &Label<L>, usize)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(q, out)| out.iter().map(move |(l, t)| (q, l, *t)))
    }

    pub fn eps_closure(&self, seeds: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        let mut stack: Vec<usize> = Vec::new();
        for q in seeds {
            if seen.insert(q) {
                stack.push(q);
            }
        }
        while let Some(q) = stack.pop() {
            for (l, t) in &self.edges[q] {
                if l.is_none() && seen.insert(*t) {
                    stack.push(*t);
                }
            }
        }
        seen
    }

    /// States reachable from `set` by one `a`-edge followed by ε-edges. `set`
    /// should already be ε-closed.
    pub fn step(&self, set: &BTreeSet<usize>, a: &L) -> BTreeSet<usize> {
        let targets = set.iter().flat_map(|&q| {
            self.edges[q]
                .iter()
                .filter(move |(l, _)| l.as_ref() == Some(a))
                .map(|(_, t)| *t)
        });
        self.eps_closure(targets.collect::<Vec<_>>())
    }

    /// States reached from `from` after reading `word` (ε-closed).
    pub fn run(&self, from: impl IntoIterator<Item = usize>, word: &[L]) -> BTreeSet<usize> {
        let mut cur = self.eps_closure(from);
        for a in word {
            if cur.is_empty() {
                break;
            }
            cur = self.step(&cur, a);
        }
        cur
    }

    pub fn accepts(&self, word: &[L]) -> bool {
        self.run(self.initial.iter().copied(), word)
            .iter()
            .any(|q| self.finals.contains(q))
    }

    fn reachable_from(&self, seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<usize> = Vec::new();
        for q in seeds {
            if !seen[q] {
                seen[q] = true;
                stack.push(q);
            }
        }
        while let Some(q) = stack.pop() {
            for (_, t) in &self.edges[q] {
                if !seen[*t] {
                    seen[*t] = true;
                    stack.push(*t);
                }
            }
        }
        seen
    }

    fn coreachable(&self) -> Vec<bool> {
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); self.num_states()];
        for (q, _, t) in self.edges() {
            rev[t].push(q);
        }
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<usize> = Vec::new();
        for &q in &self.finals {
            seen[q] = true;
            stack.push(q);
        }
        while let Some(q) = stack.pop() {
            for &s in &rev[q] {
                if !seen[s] {
                    seen[s] = true;
                    stack.push(s);
                }
            }
        }
        seen
    }

    pub fn is_empty(&self) -> bool {
        let reach = self.reachable_from(self.initial.iter().copied());
        !self.finals.iter().any(|&q| reach[q])
    }

    /// Keeps only states that are both reachable and co-reachable. Returns
    /// the trimmed automaton and the old-to-new state map.
    pub fn trim_with_map(&self) -> (Nfa<L>, Vec<Option<usize>>) {
        let reach = self.reachable_from(self.initial.iter().copied());
        let co = self.coreachable();
        let mut map = vec![None; self.num_states()];
        let mut out = Nfa::new();
        for q in 0..self.num_states() {
            if reach[q] && co[q] {
                map[q] = Some(out.add_state());
            }
        }
        for (q, l, t) in self.edges() {
            if let (Some(a), Some(b)) = (map[q], map[t]) {
                out.add_edge(a, l.clone(), b);
            }
        }
        for &q in &self.initial {
            if let Some(a) = map[q] {
                out.set_initial(a);
            }
        }
        for &q in &self.finals {
            if let Some(a) = map[q] {
                out.set_final(a);
            }
        }
        (out, map)
    }

    pub fn trim(&self) -> Nfa<L> {
        self.trim_with_map().0
    }

    /// Equivalent automaton without ε-edges on the same state set.
    pub fn remove_epsilons(&self) -> Nfa<L> {
        let mut out = Nfa::new();
        out.add_states(self.num_states());
        for q in 0..self.num_states() {
            let closure = self.eps_closure([q]);
            for &r in &closure {
                if self.finals.contains(&r) {
                    out.set_final(q);
                }
                for (l, t) in &self.edges[r] {
                    if l.is_some() {
                        out.add_edge(q, l.clone(), *t);
                    }
                }
            }
        }
        for &q in &self.initial {
            out.set_initial(q);
        }
        out
    }

    pub fn has_epsilons(&self) -> bool {
        self.edges().any(|(_, l, _)| l.is_none())
    }

    /// Relabels edges; `f` returning `None` turns an edge into an ε-edge.
    pub fn map_labels<M: Clone + Eq + Hash + Ord>(&self, mut f: impl FnMut(&L) -> Option<M>) -> Nfa<M> {
        let mut out = Nfa::new();
        out.add_states(self.num_states());
        for (q, l, t) in self.edges() {
            out.add_edge(q, l.as_ref().and_then(&mut f), t);
        }
        out.initial = self.initial.clone();
        out.finals = self.finals.clone();
        out
    }

    /// Copies `other` into `self`; returns the offset of its states.
    pub fn embed(&mut self, other: &Nfa<L>) -> usize {
        let off = self.add_states(other.num_states());
        for (q, l, t) in other.edges() {
            self.add_edge(q + off, l.clone(), t + off);
        }
        off
    }

    pub fn union(&self, other: &Nfa<L>) -> Nfa<L> {
        let mut out = self.clone();
        let off = out.embed(other);
        for &q in &other.initial {
            out.set_initial(q + off);
        }
        for &q in &other.finals {
            out.set_final(q + off);
        }
        out
    }

    /// Reversed language.
    pub fn reverse(&self) -> Nfa<L> {
        let mut out = Nfa::new();
        out.add_states(self.num_states());
        for (q, l, t) in self.edges() {
            out.add_edge(t, l.clone(), q);
        }
        out.initial = self.finals.clone();
        out.finals = self.initial.clone();
        out
    }

    /// Synchronous product; ε-edges of either side move that side alone.
    pub fn intersect(&self, other: &Nfa<L>) -> Nfa<L> {
        self.product_with(other, |a, b| (a == b).then(|| a.clone())).0
    }

    /// General product: `combine` decides whether two labelled edges move
    /// together and with which label. Only reachable pairs are built.
    /// Returns the product and the pair for each of its states.
    pub fn product_with<M, N: Clone + Eq + Hash + Ord>(
        &self,
        other: &Nfa<M>,
        mut combine: impl FnMut(&L, &M) -> Option<N>,
    ) -> (Nfa<N>, Vec<(usize, usize)>)
    where
        M: Clone + Eq + Hash + Ord,
    {
        let mut out: Nfa<N> = Nfa::new();
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
        let mut intern = |pair: (usize, usize),
                          out: &mut Nfa<N>,
                          queue: &mut VecDeque<(usize, usize)>,
                          pairs: &mut Vec<(usize, usize)>| {
            *index.entry(pair).or_insert_with(|| {
                queue.push_back(pair);
                pairs.push(pair);
                out.add_state()
            })
        };
        for &a in &self.initial {
            for &b in other.initial() {
                let q = intern((a, b), &mut out, &mut queue, &mut pairs);
                out.set_initial(q);
            }
        }
        while let Some((a, b)) = queue.pop_front() {
            let q = intern((a, b), &mut out, &mut queue, &mut pairs);
            if self.finals.contains(&a) && other.finals().contains(&b) {
                out.set_final(q);
            }
            for (la, ta) in &self.edges[a] {
                match la {
                    None => {
                        let r = intern((*ta, b), &mut out, &mut queue, &mut pairs);
                        out.add_edge(q, None, r);
                    }
                    Some(x) => {
                        for (lb, tb) in other.out(b) {
                            if let Some(y) = lb {
                                if let Some(z) = combine(x, y) {
                                    let r = intern((*ta, *tb), &mut out, &mut queue, &mut pairs);
                                    out.add_edge(q, Some(z), r);
                                }
                            }
                        }
                    }
                }
            }
            for (lb, tb) in other.out(b) {
                if lb.is_none() {
                    let r = intern((a, *tb), &mut out, &mut queue, &mut pairs);
                    out.add_edge(q, None, r);
                }
            }
        }
        (out, pairs)
    }

    /// A shortest accepted word, if any.
    pub fn shortest_word(&self) -> Option<Vec<L>> {
        let mut prev: Vec<Option<(usize, Label<L>)>> = vec![None; self.num_states()];
        let mut seen = vec![false; self.num_states()];
        // 0-1 BFS: ε-edges cost nothing
        let mut deque: VecDeque<usize> = VecDeque::new();
        let mut dist = vec![usize::MAX; self.num_states()];
        for &q in &self.initial {
            dist[q] = 0;
            deque.push_back(q);
        }
        while let Some(q) = deque.pop_front() {
            if seen[q] {
                continue;
            }
            seen[q] = true;
            if self.finals.contains(&q) {
                let mut word = Vec::new();
                let mut cur = q;
                while let Some((p, l)) = prev[cur].clone() {
                    if let Some(a) = l {
                        word.push(a);
                    }
                    cur = p;
                }
                word.reverse();
                return Some(word);
            }
            for (l, t) in &self.edges[q] {
                let w = usize::from(l.is_some());
                if dist[q] + w < dist[*t] {
                    dist[*t] = dist[q] + w;
                    prev[*t] = Some((q, l.clone()));
                    if w == 0 {
                        deque.push_front(*t);
                    } else {
                        deque.push_back(*t);
                    }
                }
            }
        }
        None
    }

    /// Every accepted word of length at most `max_len`, sorted.
    pub fn words_up_to(&self, max_len: usize) -> BTreeSet<Vec<L>> {
        let mut out = BTreeSet::new();
        let start = self.eps_closure(self.initial.iter().copied());
        let mut layer: Vec<(Vec<L>, BTreeSet<usize>)> = vec![(Vec::new(), start)];
        for len in 0..=max_len {
            let mut next_layer = Vec::new();
            for (w, set) in &layer {
                if set.iter().any(|q| self.finals.contains(q)) {
                    out.insert(w.clone());
                }
                if len == max_len {
                    continue;
                }
                let labels: BTreeSet<&L> = set
                    .iter()
                    .flat_map(|&q| self.edges[q].iter().filter_map(|(l, _)| l.as_ref()))
                    .collect();
                for a in labels {
                    let next = self.step(set, a);
                    if !next.is_empty() {
                        let mut w2 = w.clone();
                        w2.push(a.clone());
                        next_layer.push((w2, next));
                    }
                }
            }
            layer = next_layer;
        }
        out
    }

    /// Merges states that have the same finality and the same outgoing
    /// edges, until nothing changes. Language-preserving.
    pub fn merge_equivalent(&self) -> Nfa<L> {
        let tags = vec![(); self.num_states()];
        self.merge_equivalent_tagged(&tags).0
    }

    /// Like [`Nfa::merge_equivalent`], but only merges states with equal
    /// tags; returns the tag of each merged state.
    pub fn merge_equivalent_tagged<T: Clone + Eq + Hash>(&self, tags: &[T]) -> (Nfa<L>, Vec<T>) {
        let mut cur = self.clone();
        let mut tags = tags.to_vec();
        loop {
            let mut sig: HashMap<(T, bool, Vec<(Label<L>, usize)>), usize> = HashMap::new();
            let mut class = vec![0usize; cur.num_states()];
            let mut new_tags: Vec<T> = Vec::new();
            for q in 0..cur.num_states() {
                let mut out = cur.edges[q].clone();
                out.sort();
                out.dedup();
                let n = sig.len();
                class[q] = *sig
                    .entry((tags[q].clone(), cur.finals.contains(&q), out))
                    .or_insert_with(|| {
                        new_tags.push(tags[q].clone());
                        n
                    });
            }
            if sig.len() == cur.num_states() {
                return (cur, tags);
            }
            tags = new_tags;
            let mut next = Nfa::new();
            next.add_states(sig.len());
            for (q, l, t) in cur.edges() {
                next.add_edge(class[q], l.clone(), class[t]);
            }
            for &q in &cur.initial {
                next.set_initial(class[q]);
            }
            for &q in &cur.finals {
                next.set_final(class[q]);
            }
            cur = next;
        }
    }
}
