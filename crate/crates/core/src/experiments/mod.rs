//! Monte Carlo orchestration, statistics, and fitting.
