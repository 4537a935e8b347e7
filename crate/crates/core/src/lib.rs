//! Synthetic tumor-growth cohorts from the logistic growth map and a nested
//! three-phase feed-forward classifier that separates persistently benign
//! growths from ones that drift into chaotic, metastasizing dynamics.
//!
//! Module map:
//! - [`dynamics`]: logistic map, regime analysis, gene-activity growth rate,
//!   the discretized maturity-structure transcription.
//! - [`synthesis`]: seeded cohorts, counter-examples, splits, features, CSV I/O.
//! - [`neural`]: from-scratch multilayer perceptron with SSE backpropagation.
//! - [`nested`]: three chained networks and the novelty-detector training mode.
//! - [`evaluation`]: Bayes posterior oracle, expected SSE, metrics.
//! - [`cli`]: the `tumornet` command-line front end.

pub mod cli;
pub mod dynamics;
pub mod evaluation;
pub mod fsio;
pub mod nested;
pub mod neural;
pub mod numfmt;
pub mod seed;
pub mod synthesis;
