//! Real-valued learning under the cutoff loss.
//!
//! The crate models hypothesis classes `X -> [0, 1]` judged by the cutoff
//! loss `1{|h(x) - y| > gamma}`, the combinatorial dimensions that govern
//! them, learners built by aggregating interpolators, the hard distributions
//! that separate those learners, and Monte Carlo machinery to measure
//! expected loss. Every label, mass and loss is an exact [`Rational`].

pub mod adversaries;
pub mod budget;
pub mod class;
pub mod combinatorics;
pub mod dims;
pub mod distribution;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod hypothesis;
pub mod learners;
pub mod loss;
pub mod mc;
pub mod partial;
pub mod predictor;
pub mod rational;
pub mod rng;

pub use budget::Budget;
pub use class::{HypothesisClass, SplitVariant};
pub use distribution::FiniteDistribution;
pub use domain::{LabeledExample, Point, TrainingSequence};
pub use error::{Error, Result};
pub use hypothesis::{Hypothesis, ZeroOn};
pub use predictor::{Predict, Predictor};
pub use rational::Rational;
pub use rng::Seed;
