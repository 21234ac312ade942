//! The Kostlan-Shub-Smale ensemble.

mod multi_index;
mod sphere;
mod system;

pub use multi_index::{graded_lex, monomial_count, Form, MultiIndex};
pub use sphere::{covariance, PairFrame, SpherePoint};
pub use system::{compensated_horner, System};
