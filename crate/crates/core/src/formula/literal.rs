use std::fmt;
use std::ops::Not;

/// A propositional variable, numbered from 1 as in QDIMACS.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(u32);

impl Var {
    /// Panics if `number` is 0; there is no variable 0.
    pub fn new(number: u32) -> Var {
        assert!(number >= 1, "variable numbers start at 1");
        Var(number)
    }

    /// Variable with zero-based index `index`.
    pub fn from_index(index: usize) -> Var {
        Var(index as u32 + 1)
    }

    /// The one-based QDIMACS number.
    pub fn number(self) -> u32 {
        self.0
    }

    /// Zero-based index, convenient for per-variable tables.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    pub fn lit(self, positive: bool) -> Lit {
        Lit::new(self, positive)
    }

    pub fn positive(self) -> Lit {
        Lit::new(self, true)
    }

    pub fn negative(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A literal: a variable or its negation.
///
/// Internally a literal is stored as its *literal index*: the positive literal of variable `v`
/// maps to `2(v-1)` and the negative literal to `2(v-1)+1`. The same index is used for the rows of
/// the literal/clause adjacency structure.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(2 * (var.0 - 1) + u32::from(!positive))
    }

    pub fn from_index(index: usize) -> Lit {
        Lit(index as u32)
    }

    /// Signed QDIMACS encoding; `None` for 0.
    pub fn from_dimacs(number: i32) -> Option<Lit> {
        if number == 0 {
            return None;
        }
        Some(Lit::new(Var(number.unsigned_abs()), number > 0))
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var().number() as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn var(self) -> Var {
        Var(self.0 / 2 + 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn is_negative(self) -> bool {
        !self.is_positive()
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Truth value of this literal under a value for its variable.
    pub fn eval(self, var_value: bool) -> bool {
        var_value == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}
