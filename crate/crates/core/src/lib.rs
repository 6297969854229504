//! Gauge (Henstock-Kurzweil) integration on bricks in R^n.
//!
//! Integrals are limits of Riemann sums over tagged divisions that are fine with
//! respect to a gauge. The adaptive driver refines a sequence of gauges and stops when
//! successive sums stabilise.

pub mod brick;
pub mod corpus;
pub mod division;
pub mod gauge;
pub mod integrate;
pub mod propcheck;
pub mod quadrature;
pub mod sum;
pub mod variation;

pub use brick::{validate_division, Brick, BrickError, Point, TaggedBrick, TaggedDivision, Violation};
pub use division::{cousin_bisect, one_dim_chain, BuilderConfig, DivisionError, TagRule};
pub use gauge::{is_fine, CountablePoints, Gauge, GaugeError};
