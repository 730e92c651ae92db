//! Card decks built on finite projective planes of prime order, and the
//! solitaire of laying out the affine cards in an `n × n` grid so that every
//! line of the plane becomes a line of cells.

pub mod deck_io;
pub mod error;
pub mod grid;
pub mod plane;
pub mod recovery;
pub mod session;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{third_position, Grid, GridPos, Move, RuleViolation, Slope};
pub use plane::{
    common_images, generate_plane, relabel_shuffle, remove_image_set, verify_plane, Card, CardId, Deck, ImageId,
    Order, VerificationReport,
};
