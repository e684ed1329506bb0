//! Exact rational linear programming.
//!
//! LPs in the form `min { c^T x | A x = b, x >= l }` are solved by a
//! floating-point simplex whose answers are corrected by iterative
//! refinement and checked in exact rational arithmetic. When the float
//! solver cannot deliver, the working precision is increased along the
//! ladder 64, 192, 288, 432, 648, 972 bits.
//!
//! ```
//! use exactlp::{solve_exact, RationalLp, SolveConfig, SparseRationalMatrix};
//! use exactlp::rational::parse_rational;
//!
//! // min x s.t. 3x = 1, x >= 0
//! let q = |s| parse_rational(s).unwrap();
//! let a = SparseRationalMatrix::from_dense(&[vec![q("3")]]);
//! let lp = RationalLp::new(a, vec![q("1")], vec![q("1")], vec![q("0")]).unwrap();
//! let result = solve_exact(&lp, &SolveConfig::default());
//! assert_eq!(result.objective(), Some(&q("1/3")));
//! ```

pub mod auxiliary;
pub mod batch;
pub mod boost;
pub mod corpus;
pub mod error;
pub mod float;
pub mod general;
pub mod io;
pub mod lu;
pub mod rational;
pub mod refine;
pub mod scalar;
pub mod simplex;
pub mod verify;

pub use boost::{solve_exact, ExactResult, FailureReason, Mode, Outcome, SolveConfig, SolveStats};
pub use rational::{PrimalDualSolution, Rational, RationalLp, SparseRationalMatrix};
pub use simplex::Basis;
pub use verify::Certificate;
