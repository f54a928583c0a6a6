//! Computable topology over budgeted names.
//!
//! Words and codecs live in [`words`], budgeted names and the dovetailing scheduler in
//! [`names`], exact ball predicates and certified image containment in [`decision`],
//! Euclidean space and its maps in [`euclid`], abstract computable spaces in [`espace`],
//! atlases and manifolds in [`manifold`], concrete examples in [`gallery`] and the
//! embedding into Euclidean space in [`embed`].

pub mod decision;
pub mod embed;
pub mod enumerate;
pub mod error;
pub mod espace;
pub mod euclid;
pub mod gallery;
pub mod interval;
pub mod manifold;
pub mod names;
pub mod rational;
pub mod selftest;
pub mod words;

pub use error::{Error, Result};
pub use espace::{Space, SpaceRef};
pub use names::{Discipline, Name, SemiDecision, Stamped, Translator};
pub use rational::Q;
pub use words::{Flavor, FsCode, Word, WordStream};
