//! Exact polynomial and rational-function arithmetic over QQ and ZZ/p.

pub mod coeff;
pub mod gcd;
pub mod parse;
pub mod polynomial;
pub mod rational;
pub mod vars;

pub(crate) use parse as render;

pub use coeff::{is_prime, Coefficient, Domain, Rat, MAX_PRIME};
pub use gcd::{gcd, gcd_many};
pub use parse::{parse, parse_in, parse_rational, render_rational, render_with};
pub use parse::render as render_poly;
pub use polynomial::{Monomial, Polynomial, Term};
pub use rational::{rat_simplify, reduce_factored, RationalFunction};
pub use vars::{sym_name, tri_index, SymRoles, VarTable};
