//! Cardinality and weighted-sum encodings.

use super::formula::{Bit, Cnf, Lit};

/// Sets up to this size use the pairwise at-most-one encoding.
const PAIRWISE_LIMIT: usize = 6;

pub fn at_most_one(cnf: &mut Cnf, lits: &[Lit]) {
    if lits.len() <= PAIRWISE_LIMIT {
        for (i, &a) in lits.iter().enumerate() {
            for &b in &lits[i + 1..] {
                cnf.add_clause(vec![!a, !b]);
            }
        }
        return;
    }
    // sequential ladder: s[i] <=> some of lits[..=i] is true
    let n = lits.len();
    let s: Vec<Lit> = (0..n - 1).map(|_| cnf.new_var()).collect();
    cnf.add_clause(vec![!lits[0], s[0]]);
    for i in 1..n - 1 {
        cnf.add_clause(vec![!lits[i], s[i]]);
        cnf.add_clause(vec![!s[i - 1], s[i]]);
        cnf.add_clause(vec![!lits[i], !s[i - 1]]);
    }
    cnf.add_clause(vec![!lits[n - 1], !s[n - 2]]);
}

pub fn exactly_one(cnf: &mut Cnf, lits: &[Lit]) {
    cnf.add_clause(lits.to_vec());
    at_most_one(cnf, lits);
}

/// Totalizer over unit-weight inputs with both-direction output semantics:
/// output `v` (1-based) is true iff at least `v` inputs are true.
#[derive(Debug, Clone)]
pub struct Totalizer {
    outputs: Vec<Lit>,
}

impl Totalizer {
    pub fn build(cnf: &mut Cnf, inputs: &[Lit]) -> Self {
        Self {
            outputs: Self::node(cnf, inputs),
        }
    }

    fn node(cnf: &mut Cnf, inputs: &[Lit]) -> Vec<Lit> {
        if inputs.len() <= 1 {
            return inputs.to_vec();
        }
        let (left, right) = inputs.split_at(inputs.len() / 2);
        let a = Self::node(cnf, left);
        let b = Self::node(cnf, right);
        let out: Vec<Lit> = (0..a.len() + b.len()).map(|_| cnf.new_var()).collect();
        // bit(v, k): "at least k of v"; k = 0 is true, k > len is false
        let bit = |v: &[Lit], k: usize| -> Bit {
            if k == 0 {
                Bit::True
            } else if k > v.len() {
                Bit::False
            } else {
                Bit::Lit(v[k - 1])
            }
        };
        for i in 0..=a.len() {
            for j in 0..=b.len() {
                if i + j >= 1 {
                    cnf.add_bits(&[!bit(&a, i), !bit(&b, j), Bit::Lit(out[i + j - 1])]);
                }
                if i + j < out.len() {
                    cnf.add_bits(&[bit(&a, i + 1), bit(&b, j + 1), Bit::Lit(!out[i + j])]);
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Bit meaning "sum >= k".
    pub fn at_least(&self, k: i64) -> Bit {
        if k <= 0 {
            Bit::True
        } else if k as usize > self.outputs.len() {
            Bit::False
        } else {
            Bit::Lit(self.outputs[k as usize - 1])
        }
    }
}

/// Sequential weighted counter: after processing all items, register `j`
/// is true iff the weighted sum of true items is at least `j`.
#[derive(Debug, Clone)]
pub struct WeightedCounter {
    registers: Vec<Lit>,
}

impl WeightedCounter {
    pub fn build(cnf: &mut Cnf, items: &[(Lit, u64)]) -> Self {
        // prev[j - 1] <=> prefix sum >= j, for j in 1..=prefix total
        let mut prev: Vec<Lit> = Vec::new();
        for &(x, w) in items {
            assert!(w > 0, "weights must be positive");
            let width = prev.len() + w as usize;
            let reg = |v: &[Lit], j: i64| -> Bit {
                if j <= 0 {
                    Bit::True
                } else if j as usize > v.len() {
                    Bit::False
                } else {
                    Bit::Lit(v[j as usize - 1])
                }
            };
            let next: Vec<Lit> = (0..width).map(|_| cnf.new_var()).collect();
            for j in 1..=width as i64 {
                let s = Bit::Lit(next[j as usize - 1]);
                let keep = reg(&prev, j);
                let carry = reg(&prev, j - w as i64);
                let x = Bit::Lit(x);
                cnf.add_bits(&[!keep, s]);
                cnf.add_bits(&[!x, !carry, s]);
                cnf.add_bits(&[!s, keep, x]);
                cnf.add_bits(&[!s, keep, carry]);
            }
            prev = next;
        }
        Self { registers: prev }
    }

    pub fn max_sum(&self) -> usize {
        self.registers.len()
    }

    /// Bit meaning "sum >= k".
    pub fn at_least(&self, k: i64) -> Bit {
        if k <= 0 {
            Bit::True
        } else if k as usize > self.registers.len() {
            Bit::False
        } else {
            Bit::Lit(self.registers[k as usize - 1])
        }
    }
}
