//! Exact arithmetic for the multiplicative group `alpha^Z * beta^Z` inside the
//! p-adic numbers, viewed as a pair of p-valued groups `(G, H, V)` with
//! `H = alpha^Z` and `V(g) = v_p(g - 1) - k`.
//!
//! The crate provides:
//!
//! * exact p-adic primitives (valuations of rationals, a truncated p-adic
//!   logarithm with precision tracking, n-th power tests, the `p^{v_p(x)}`
//!   representative map) in [`padic`];
//! * the concrete standard model and its valuation/congruence/residue
//!   operations in [`group`];
//! * a finite-scale auditor for the pair-of-valued-groups axioms in [`audit`];
//! * a formula language (AST, parser, pretty printer, normal forms) in
//!   [`formula`];
//! * a decision procedure for the supported first-order fragment built on
//!   congruence combination and ultrametric ball consistency in [`qe`];
//! * a bounded enumerator for Mann equations `a_1 x_1 + ... + a_n x_n = 1`
//!   in [`mann`];
//! * the discrete-case (positive valuation) definable maps and an
//!   arithmetic-to-group-language compiler in [`interpret`].
//!
//! All group computations are exact: elements are exponent pairs and their
//! realizations are arbitrary-precision rationals. The `parallel` feature
//! (default) parallelizes the embarrassingly parallel scans (witness search,
//! Mann enumeration, audit checks) with rayon; disabling it yields the same
//! results sequentially.

pub mod audit {}
pub mod config;
pub mod error;
pub(crate) mod exec;
pub mod formula;
pub mod group;
pub mod interpret {}
pub mod mann;
pub mod padic;
pub mod qe;
pub(crate) mod rational;

pub use config::Config;
pub use error::{Error, Result};
pub use group::{GroupElement, Val};
