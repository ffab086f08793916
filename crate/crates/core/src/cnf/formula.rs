use std::fmt;
use std::ops::Not;

/// A DIMACS literal: positive or negative variable id (ids start at 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(i32);

impl Lit {
    pub fn positive(var: u32) -> Self {
        debug_assert!(var >= 1);
        Lit(var as i32)
    }

    pub fn from_dimacs(value: i32) -> Self {
        assert!(value != 0, "0 is not a literal");
        Lit(value)
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A literal or a constant, so encoders can fold known truth values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bit {
    True,
    False,
    Lit(Lit),
}

impl Bit {
    pub fn constant(value: bool) -> Self {
        if value {
            Bit::True
        } else {
            Bit::False
        }
    }
}

impl From<Lit> for Bit {
    fn from(lit: Lit) -> Self {
        Bit::Lit(lit)
    }
}

impl Not for Bit {
    type Output = Bit;

    fn not(self) -> Bit {
        match self {
            Bit::True => Bit::False,
            Bit::False => Bit::True,
            Bit::Lit(l) => Bit::Lit(!l),
        }
    }
}

/// Clause list over densely numbered variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_clauses(num_vars: u32, clauses: Vec<Vec<Lit>>) -> Self {
        debug_assert!(clauses.iter().flatten().all(|l| l.var() <= num_vars));
        Self { num_vars, clauses }
    }

    pub fn new_var(&mut self) -> Lit {
        self.num_vars += 1;
        Lit::positive(self.num_vars)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn add_clause(&mut self, clause: Vec<Lit>) {
        debug_assert!(clause.iter().all(|l| l.var() <= self.num_vars));
        self.clauses.push(clause);
    }

    /// Adds a clause over possibly-constant bits: satisfied clauses vanish and
    /// false bits are dropped. All-false input yields the empty clause.
    pub fn add_bits(&mut self, bits: &[Bit]) {
        let mut clause = Vec::with_capacity(bits.len());
        for b in bits {
            match b {
                Bit::True => return,
                Bit::False => {}
                Bit::Lit(l) => clause.push(*l),
            }
        }
        self.add_clause(clause);
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(Vec::is_empty)
    }
}

/// Truth values indexed by variable id; index 0 is unused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(num_vars: u32) -> Self {
        Self(vec![false; num_vars as usize + 1])
    }

    pub fn from_lits(num_vars: u32, lits: impl IntoIterator<Item = Lit>) -> Self {
        let mut a = Self::new(num_vars);
        for l in lits {
            if l.var() <= num_vars {
                a.0[l.var() as usize] = l.is_positive();
            }
        }
        a
    }

    pub fn num_vars(&self) -> u32 {
        (self.0.len() - 1) as u32
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.0[var as usize] = value;
    }

    pub fn value(&self, var: u32) -> bool {
        self.0[var as usize]
    }

    pub fn lit(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }

    pub fn satisfies(&self, cnf: &Cnf) -> bool {
        cnf.num_vars() <= self.num_vars()
            && cnf.clauses().iter().all(|c| c.iter().any(|&l| self.lit(l)))
    }
}
