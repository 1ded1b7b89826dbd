//! Exact differential algebra on jet spaces and inverse problems on
//! conservation laws.

pub mod context;
pub mod error;
pub mod evolution;
pub mod expr;
pub mod families;
pub mod format;
pub mod integrate;
pub mod jet;
pub mod ode;
pub mod operator;
pub mod parse;
pub mod poly;
pub mod ratfunc;
pub mod var;
pub mod vorticity;
pub mod wronskian;

pub use context::{FunctionKind, FunctionSymbol, JetContext};
pub use error::{Error, Result};
pub use evolution::{ConstructedEvolution, EvolutionEquation};
pub use expr::{ArithOp, Expression};
pub use jet::{Characteristic, ConservedCurrent};
pub use ode::OrderReport;
pub use operator::TotalOperator;
pub use poly::{Mono, Poly};
pub use ratfunc::RatFunc;
pub use var::{KernelKind, MultiIndex, Var};
pub use vorticity::{ClosureData, EnergyDecomposition, EnergyReport, VorticityReport};
