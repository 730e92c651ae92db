use thiserror::Error;

use crate::plane::{CardId, ImageId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("order {0} is not prime")]
    NotPrime(u32),
    #[error("order {0} is outside the supported range 2..=31")]
    OrderOutOfRange(u32),
    #[error("order {0} has no middle index; the solver needs an odd prime order")]
    EvenOrder(u32),
    #[error("unknown image {0}")]
    UnknownImage(ImageId),
    #[error("unknown card {0}")]
    UnknownCard(CardId),
    #[error("card {card} lists image {image} more than once")]
    DuplicateImage { card: CardId, image: ImageId },
    #[error("card {0} appears more than once")]
    DuplicateCard(CardId),
    #[error("cannot compare card {0} with itself")]
    SameCard(CardId),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid move: {0}")]
    InvalidMove(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("deck shape not supported: {0}")]
    DeckShape(String),
    #[error("recovery failed: {0}")]
    Recovery(String),
    #[error("solver stage {stage} failed: {message}")]
    Solver { stage: &'static str, message: String },
    #[error("{0}")]
    Game(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
