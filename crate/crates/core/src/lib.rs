//! Probabilistic-threshold indexes over uncertain strings.
//!
//! An uncertain string assigns a probability distribution over characters to
//! every position. The indexes here answer threshold queries over such
//! strings: "where does `p` occur with probability at least `tau`?"
//!
//! * [`qindex::SubstringIndex`] reports every starting position of a
//!   deterministic pattern whose occurrence probability meets the threshold.
//! * [`listing::ListingIndex`] reports the documents of a collection whose
//!   relevance for a pattern meets the threshold.
//! * [`approx::LinkIndex`] answers the substring problem with an additive
//!   error `epsilon`.
//!
//! All three are built over the same transformation: the uncertain string is
//! rewritten into a deterministic text of concatenated maximal factors
//! ([`factorize`]), which is then indexed with a suffix array, a suffix tree
//! view and range-maximum structures ([`textcore`]). A construction-time
//! floor `tau_min` bounds the transformed size; queries below the floor are
//! rejected.
//!
//! [`oracle`] holds brute-force reference answers that never touch the index
//! code paths, and [`datagen`] produces seeded synthetic inputs.

pub mod approx;
pub mod container;
pub mod datagen;
pub mod error;
pub mod factorize;
pub mod listing;
pub mod model;
pub mod oracle;
pub mod qindex;
pub mod textcore;
pub mod ust;
pub mod verify;

pub use approx::{Link, LinkIndex, RawLink, TreePoint};
pub use container::IndexContainer;
pub use datagen::GenConfig;
pub use error::{Error, Result};
pub use factorize::{MaximalFactor, TransformConfig, TransformedText};
pub use listing::{ListingIndex, Metric};
pub use model::{
    Correlation, DocumentCollection, PositionDistribution, Symbol, UncertainString, Violation,
    PROB_EPS,
};
pub use qindex::{IndexConfig, QueryStats, SubstringIndex};
pub use textcore::{RmqIndex, SuffixArrayIndex, TreeView};
