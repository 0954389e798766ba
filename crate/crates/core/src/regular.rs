//! Classical finite automata over variable-free expressions: Thompson NFAs,
//! subset-construction DFAs, and the emptiness/overlap searches the
//! ambiguity checks are built on.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::mre::Mre;

/// Thompson NFA with a single start and a single accepting state.
#[derive(Debug, Clone)]
struct Nfa {
    eps: Vec<Vec<usize>>,
    chars: Vec<Vec<(char, usize)>>,
    start: usize,
    accept: usize,
}

impl Nfa {
    fn new() -> Self {
        Nfa { eps: Vec::new(), chars: Vec::new(), start: 0, accept: 0 }
    }

    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.chars.push(Vec::new());
        self.eps.len() - 1
    }

    /// Returns (start, accept) of the fragment. Panics on variables: callers
    /// approximate them away first.
    fn build(&mut self, r: &Mre) -> (usize, usize) {
        match r {
            Mre::Epsilon => {
                let s = self.state();
                (s, s)
            }
            Mre::Const(c) => {
                let (s, t) = (self.state(), self.state());
                self.chars[s].push((*c, t));
                (s, t)
            }
            Mre::Var(x) | Mre::Bind(x, _, _) => panic!("variable `{x}` in a classical regex"),
            Mre::Star(inner) => {
                let s = self.state();
                let (i, f) = self.build(inner);
                self.eps[s].push(i);
                self.eps[f].push(s);
                (s, s)
            }
            Mre::Alt(l, r) => {
                let (s, t) = (self.state(), self.state());
                let (il, fl) = self.build(l);
                let (ir, fr) = self.build(r);
                self.eps[s].extend([il, ir]);
                self.eps[fl].push(t);
                self.eps[fr].push(t);
                (s, t)
            }
            Mre::Concat(l, r) => {
                let (il, fl) = self.build(l);
                let (ir, fr) = self.build(r);
                self.eps[fl].push(ir);
                (il, fr)
            }
        }
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut todo: Vec<usize> = set.iter().copied().collect();
        while let Some(q) = todo.pop() {
            for &n in &self.eps[q] {
                if set.insert(n) {
                    todo.push(n);
                }
            }
        }
    }
}

/// A complete DFA over an explicit alphabet. State 0 is the start state.
#[derive(Debug, Clone)]
pub struct Dfa {
    pub alphabet: Vec<char>,
    /// `delta[q][a]` is the successor of `q` on `alphabet[a]`.
    pub delta: Vec<Vec<usize>>,
    pub accepting: Vec<bool>,
}

impl Dfa {
    /// Builds the DFA of a variable-free expression. Characters of `r`
    /// outside `alphabet` are added to it.
    pub fn from_mre(r: &Mre, alphabet: &BTreeSet<char>) -> Dfa {
        let mut sigma = alphabet.clone();
        sigma.extend(r.alphabet());
        let alphabet: Vec<char> = sigma.into_iter().collect();
        let index: HashMap<char, usize> = alphabet.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let mut nfa = Nfa::new();
        let (s, f) = nfa.build(r);
        nfa.start = s;
        nfa.accept = f;

        let mut start = BTreeSet::from([nfa.start]);
        nfa.closure(&mut start);
        let mut ids: HashMap<BTreeSet<usize>, usize> = HashMap::from([(start.clone(), 0)]);
        let mut sets = vec![start];
        let mut delta: Vec<Vec<usize>> = Vec::new();
        let mut i = 0;
        while i < sets.len() {
            let mut row = vec![BTreeSet::new(); alphabet.len()];
            for &q in &sets[i] {
                for &(c, t) in &nfa.chars[q] {
                    row[index[&c]].insert(t);
                }
            }
            let mut targets = Vec::with_capacity(alphabet.len());
            for mut next in row {
                nfa.closure(&mut next);
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        sets.push(next.clone());
                        ids.insert(next, sets.len() - 1);
                        sets.len() - 1
                    }
                };
                targets.push(id);
            }
            delta.push(targets);
            i += 1;
        }
        let accepting = sets.iter().map(|s| s.contains(&nfa.accept)).collect();
        Dfa { alphabet, delta, accepting }
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    #[cfg(test)]
    pub fn is_empty(&self) -> bool {
        self.shortest().is_none()
    }

    fn symbol(&self, c: char) -> Option<usize> {
        self.alphabet.binary_search(&c).ok()
    }

    #[cfg(test)]
    pub fn run(&self, from: usize, s: &str) -> Option<usize> {
        s.chars().try_fold(from, |q, c| self.symbol(c).map(|a| self.delta[q][a]))
    }

    #[cfg(test)]
    pub fn accepts(&self, s: &str) -> bool {
        self.run(0, s).is_some_and(|q| self.accepting[q])
    }

    /// States from which some accepting state is reachable.
    pub fn live(&self) -> Vec<bool> {
        let mut live = self.accepting.clone();
        let mut changed = true;
        while changed {
            changed = false;
            for q in 0..self.len() {
                if !live[q] && self.delta[q].iter().any(|&t| live[t]) {
                    live[q] = true;
                    changed = true;
                }
            }
        }
        live
    }

    /// Byte length of the longest prefix of `s` that can still be extended
    /// to a string in the language.
    pub fn viable_prefix(&self, s: &str) -> usize {
        let live = self.live();
        let mut q = 0;
        if !live[q] {
            return 0;
        }
        for (i, c) in s.char_indices() {
            match self.symbol(c).map(|a| self.delta[q][a]) {
                Some(t) if live[t] => q = t,
                _ => return i,
            }
        }
        s.len()
    }

    #[cfg(test)]
    pub fn shortest(&self) -> Option<String> {
        let starts = [0];
        bfs(&starts, |q| self.accepting[*q], |q| {
            self.delta[*q].iter().enumerate().map(|(a, &t)| (self.alphabet[a], t)).collect()
        })
    }
}

/// Breadth-first search returning the label of a shortest path from one of
/// `starts` to a node satisfying `goal`.
fn bfs<N, G, S>(starts: &[N], goal: G, succ: S) -> Option<String>
where
    N: Clone + Eq + std::hash::Hash,
    G: Fn(&N) -> bool,
    S: Fn(&N) -> Vec<(char, N)>,
{
    let mut parent: HashMap<N, Option<(N, char)>> = HashMap::new();
    let mut queue = VecDeque::new();
    for s in starts {
        if parent.insert(s.clone(), None).is_none() {
            queue.push_back(s.clone());
        }
    }
    while let Some(n) = queue.pop_front() {
        if goal(&n) {
            let mut out = Vec::new();
            let mut cur = n;
            while let Some(Some((p, c))) = parent.get(&cur) {
                out.push(*c);
                cur = p.clone();
            }
            out.reverse();
            return Some(out.into_iter().collect());
        }
        for (c, t) in succ(&n) {
            if !parent.contains_key(&t) {
                parent.insert(t.clone(), Some((n.clone(), c)));
                queue.push_back(t);
            }
        }
    }
    None
}

fn joint_alphabet(a: &Mre, b: &Mre) -> BTreeSet<char> {
    let mut sigma = a.alphabet();
    sigma.extend(b.alphabet());
    sigma
}

/// A shortest string in both languages, if any.
pub fn intersection_witness(a: &Mre, b: &Mre) -> Option<String> {
    let sigma = joint_alphabet(a, b);
    let (da, db) = (Dfa::from_mre(a, &sigma), Dfa::from_mre(b, &sigma));
    bfs(&[(0usize, 0usize)], |&(p, q)| da.accepting[p] && db.accepting[q], |&(p, q)| {
        (0..da.alphabet.len()).map(|i| (da.alphabet[i], (da.delta[p][i], db.delta[q][i]))).collect()
    })
}

/// Pairs of states `(p, q)` from which one string leads both to acceptance.
fn jointly_live(d: &Dfa) -> Vec<Vec<bool>> {
    let n = d.len();
    let mut rev: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; d.alphabet.len()];
    for q in 0..n {
        for (a, &t) in d.delta[q].iter().enumerate() {
            rev[a][t].push(q);
        }
    }
    let mut good = vec![vec![false; n]; n];
    let mut todo = Vec::new();
    let finals: Vec<usize> = (0..n).filter(|&q| d.accepting[q]).collect();
    for &p in &finals {
        for &q in &finals {
            good[p][q] = true;
            todo.push((p, q));
        }
    }
    while let Some((p, q)) = todo.pop() {
        for r in &rev {
            for &pp in &r[p] {
                for &qq in &r[q] {
                    if !good[pp][qq] {
                        good[pp][qq] = true;
                        todo.push((pp, qq));
                    }
                }
            }
        }
    }
    good
}

/// A non-empty `x` with `u, ux ∈ L(a)` and `xv, v ∈ L(b)` for some `u, v`:
/// exactly the strings that let a concatenation split two ways.
pub fn concat_overlap(a: &Mre, b: &Mre) -> Option<String> {
    let sigma = joint_alphabet(a, b);
    let (da, db) = (Dfa::from_mre(a, &sigma), Dfa::from_mre(b, &sigma));
    let good = jointly_live(&db);
    let reachable = reachable(&da);
    let starts: Vec<(usize, usize, bool)> =
        (0..da.len()).filter(|&q| da.accepting[q] && reachable[q]).map(|q| (q, 0, false)).collect();
    bfs(&starts, |&(p, q, moved)| moved && da.accepting[p] && good[q][0], |&(p, q, _)| {
        (0..da.alphabet.len()).map(|i| (da.alphabet[i], (da.delta[p][i], db.delta[q][i], true))).collect()
    })
}

fn reachable(d: &Dfa) -> Vec<bool> {
    let mut seen = vec![false; d.len()];
    let mut todo = vec![0];
    seen[0] = true;
    while let Some(q) = todo.pop() {
        for &t in &d.delta[q] {
            if !seen[t] {
                seen[t] = true;
                todo.push(t);
            }
        }
    }
    seen
}

pub fn nullable(r: &Mre) -> bool {
    match r {
        Mre::Epsilon | Mre::Star(_) => true,
        Mre::Const(_) | Mre::Var(_) => false,
        Mre::Alt(l, r) => nullable(l) || nullable(r),
        Mre::Concat(l, r) => nullable(l) && nullable(r),
        Mre::Bind(_, _, b) => nullable(b),
    }
}
