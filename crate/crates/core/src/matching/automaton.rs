use super::{MatchResult, Witness};
use crate::symbolic::{Symbol, SymbolSeq};

const NONE: u32 = u32::MAX;

/// Alphabets up to this size use a dense transition table.
const DENSE_MAX_ALPHABET: usize = 32;

#[derive(Debug, Clone)]
enum Transitions {
    /// `table[state * width + symbol]`.
    Dense { width: usize, table: Vec<u32> },
    /// Per-state edge lists sorted by symbol.
    Sparse(Vec<Vec<(Symbol, u32)>>),
}

impl Transitions {
    fn new(alphabet: usize, capacity: usize) -> Self {
        if alphabet <= DENSE_MAX_ALPHABET {
            Transitions::Dense {
                width: alphabet,
                table: Vec::with_capacity(capacity * alphabet),
            }
        } else {
            Transitions::Sparse(Vec::with_capacity(capacity))
        }
    }

    fn push_state(&mut self) {
        match self {
            Transitions::Dense { width, table } => table.extend(std::iter::repeat_n(NONE, *width)),
            Transitions::Sparse(v) => v.push(Vec::new()),
        }
    }

    fn copy_state(&mut self, from: usize) {
        match self {
            Transitions::Dense { width, table } => {
                let w = *width;
                table.extend_from_within(from * w..(from + 1) * w);
            }
            Transitions::Sparse(v) => {
                let edges = v[from].clone();
                v.push(edges);
            }
        }
    }

    #[inline]
    fn get(&self, state: usize, c: Symbol) -> u32 {
        match self {
            Transitions::Dense { width, table } => table[state * width + c as usize],
            Transitions::Sparse(v) => match v[state].binary_search_by_key(&c, |e| e.0) {
                Ok(i) => v[state][i].1,
                Err(_) => NONE,
            },
        }
    }

    #[inline]
    fn set(&mut self, state: usize, c: Symbol, to: u32) {
        match self {
            Transitions::Dense { width, table } => table[state * *width + c as usize] = to,
            Transitions::Sparse(v) => match v[state].binary_search_by_key(&c, |e| e.0) {
                Ok(i) => v[state][i].1 = to,
                Err(i) => v[state].insert(i, (c, to)),
            },
        }
    }
}

/// Suffix automaton (DAWG) of a single sequence.
///
/// Every substring of the indexed text corresponds to a path from the root.
/// Each state also stores the end position of the first occurrence of its
/// strings, which is enough to recover match witnesses.
#[derive(Debug, Clone)]
pub struct SuffixAutomaton {
    len: Vec<u32>,
    link: Vec<u32>,
    first_end: Vec<u32>,
    next: Transitions,
    last: u32,
}

impl SuffixAutomaton {
    pub fn new(text: &SymbolSeq) -> Self {
        let cap = 2 * text.len() + 1;
        let mut sa = SuffixAutomaton {
            len: Vec::with_capacity(cap),
            link: Vec::with_capacity(cap),
            first_end: Vec::with_capacity(cap),
            next: Transitions::new(text.alphabet().size(), cap),
            last: 0,
        };
        sa.add_state(0, NONE, 0);
        for (i, &c) in text.as_slice().iter().enumerate() {
            sa.extend(c, i as u32);
        }
        sa
    }

    fn add_state(&mut self, len: u32, link: u32, first_end: u32) -> u32 {
        self.len.push(len);
        self.link.push(link);
        self.first_end.push(first_end);
        self.next.push_state();
        (self.len.len() - 1) as u32
    }

    fn extend(&mut self, c: Symbol, pos: u32) {
        let cur = self.add_state(self.len[self.last as usize] + 1, NONE, pos);
        let mut p = self.last;
        while p != NONE && self.next.get(p as usize, c) == NONE {
            self.next.set(p as usize, c, cur);
            p = self.link[p as usize];
        }
        if p == NONE {
            self.link[cur as usize] = 0;
        } else {
            let q = self.next.get(p as usize, c);
            if self.len[p as usize] + 1 == self.len[q as usize] {
                self.link[cur as usize] = q;
            } else {
                let clone = self.len.len() as u32;
                self.len.push(self.len[p as usize] + 1);
                self.link.push(self.link[q as usize]);
                self.first_end.push(self.first_end[q as usize]);
                self.next.copy_state(q as usize);
                while p != NONE && self.next.get(p as usize, c) == q {
                    self.next.set(p as usize, c, clone);
                    p = self.link[p as usize];
                }
                self.link[q as usize] = clone;
                self.link[cur as usize] = clone;
            }
        }
        self.last = cur;
    }

    /// Number of states, at most `2 |text| - 1` for texts longer than one symbol.
    pub fn num_states(&self) -> usize {
        self.len.len()
    }

    /// Whether `pattern` occurs in the indexed text.
    pub fn contains(&self, pattern: &[Symbol]) -> bool {
        let mut v = 0u32;
        for &c in pattern {
            if c as usize >= self.alphabet_hint() {
                return false;
            }
            v = self.next.get(v as usize, c);
            if v == NONE {
                return false;
            }
        }
        true
    }

    fn alphabet_hint(&self) -> usize {
        match &self.next {
            Transitions::Dense { width, .. } => *width,
            Transitions::Sparse(_) => usize::MAX,
        }
    }

    /// Streams `other` through the automaton, tracking the longest suffix of
    /// each prefix of `other` that occurs in the indexed text.
    pub fn longest_common_substring(&self, other: &[Symbol]) -> MatchResult {
        let limit = self.alphabet_hint();
        let mut v = 0u32;
        let mut l = 0u32;
        let mut best = MatchResult::NONE;
        for (j, &c) in other.iter().enumerate() {
            if c as usize >= limit {
                v = 0;
                l = 0;
                continue;
            }
            while v != 0 && self.next.get(v as usize, c) == NONE {
                v = self.link[v as usize];
                l = self.len[v as usize];
            }
            let t = self.next.get(v as usize, c);
            if t != NONE {
                v = t;
                l += 1;
            } else {
                v = 0;
                l = 0;
            }
            let len = l as usize;
            if len == 0 || len < best.value {
                continue;
            }
            let cand = Witness {
                x_start: self.first_end[v as usize] as usize + 1 - len,
                y_start: j + 1 - len,
                len,
            };
            let better = match best.witness {
                _ if len > best.value => true,
                Some(w) => (cand.x_start, cand.y_start) < (w.x_start, w.y_start),
                None => true,
            };
            if better {
                best = MatchResult {
                    value: len,
                    witness: Some(cand),
                };
            }
        }
        best
    }
}
