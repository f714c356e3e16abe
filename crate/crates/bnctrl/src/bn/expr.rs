//! Boolean predictor expressions.

use std::collections::BTreeSet;
use std::fmt;

use super::state::{NetworkState, PartialAssignment};

/// Propositional formula over node indices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BoolExpr {
    Const(bool),
    Var(usize),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn not(e: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    #[inline]
    pub fn eval(&self, s: &NetworkState) -> bool {
        match self {
            BoolExpr::Const(v) => *v,
            BoolExpr::Var(i) => s.get(*i),
            BoolExpr::Not(e) => !e.eval(s),
            BoolExpr::And(a, b) => a.eval(s) && b.eval(s),
            BoolExpr::Or(a, b) => a.eval(s) || b.eval(s),
        }
    }

    /// Evaluate with an arbitrary variable lookup.
    pub fn eval_with(&self, lookup: &mut impl FnMut(usize) -> bool) -> bool {
        match self {
            BoolExpr::Const(v) => *v,
            BoolExpr::Var(i) => lookup(*i),
            BoolExpr::Not(e) => !e.eval_with(lookup),
            BoolExpr::And(a, b) => a.eval_with(lookup) && b.eval_with(lookup),
            BoolExpr::Or(a, b) => a.eval_with(lookup) || b.eval_with(lookup),
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Var(i) => {
                out.insert(*i);
            }
            BoolExpr::Not(e) => e.collect_vars(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Substitute pinned variables by constants, folding what becomes
    /// decidable. Unpinned structure is preserved as written.
    pub fn substitute(&self, pins: &PartialAssignment) -> BoolExpr {
        match self {
            BoolExpr::Const(v) => BoolExpr::Const(*v),
            BoolExpr::Var(i) => match pins.pin_of(*i) {
                Some(v) => BoolExpr::Const(v),
                None => BoolExpr::Var(*i),
            },
            BoolExpr::Not(e) => match e.substitute(pins) {
                BoolExpr::Const(v) => BoolExpr::Const(!v),
                e => BoolExpr::not(e),
            },
            BoolExpr::And(a, b) => match (a.substitute(pins), b.substitute(pins)) {
                (BoolExpr::Const(false), _) | (_, BoolExpr::Const(false)) => {
                    BoolExpr::Const(false)
                }
                (BoolExpr::Const(true), e) | (e, BoolExpr::Const(true)) => e,
                (a, b) => BoolExpr::and(a, b),
            },
            BoolExpr::Or(a, b) => match (a.substitute(pins), b.substitute(pins)) {
                (BoolExpr::Const(true), _) | (_, BoolExpr::Const(true)) => BoolExpr::Const(true),
                (BoolExpr::Const(false), e) | (e, BoolExpr::Const(false)) => e,
                (a, b) => BoolExpr::or(a, b),
            },
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            BoolExpr::Or(..) => 0,
            BoolExpr::And(..) => 1,
            BoolExpr::Not(..) => 2,
            BoolExpr::Const(_) | BoolExpr::Var(_) => 3,
        }
    }

    /// Render with node names, inserting parentheses only where precedence
    /// requires them.
    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, names: &[String]) -> fmt::Result {
        match self {
            BoolExpr::Const(v) => write!(f, "{}", if *v { 1 } else { 0 }),
            BoolExpr::Var(i) => f.write_str(&names[*i]),
            BoolExpr::Not(e) => {
                f.write_str("!")?;
                e.write_child(f, names, self.precedence())
            }
            BoolExpr::And(a, b) => {
                a.write_child(f, names, self.precedence())?;
                f.write_str(" & ")?;
                b.write_child(f, names, self.precedence())
            }
            BoolExpr::Or(a, b) => {
                a.write_child(f, names, self.precedence())?;
                f.write_str(" | ")?;
                b.write_child(f, names, self.precedence())
            }
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, names: &[String], parent: u8) -> fmt::Result {
        if self.precedence() < parent {
            f.write_str("(")?;
            self.write(f, names)?;
            f.write_str(")")
        } else {
            self.write(f, names)
        }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a BoolExpr,
    names: &'a [String],
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.write(f, self.names)
    }
}
