//! Projective planes of prime order, represented as card decks.
//!
//! Cards are points and images are lines. The canonical plane of order `n`
//! is built from the affine plane over the integers mod `n` plus a line at
//! infinity:
//!
//! * affine card `(x, y)` has id `x*n + y`; slope card `m` has id `n² + m`;
//!   the vertical slope card has id `n² + n`.
//! * sloped line `(m, b)` has id `m*n + b` and holds `{(x, m*x + b)}` plus
//!   slope card `m`; vertical line `c` has id `n² + c` and holds `{(c, y)}`
//!   plus the vertical slope card; the line at infinity has id `n² + n`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_ORDER: u32 = 2;
pub const MAX_ORDER: u32 = 31;

/// A prime plane order in `MIN_ORDER..=MAX_ORDER`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Order(u32);

impl Order {
    pub fn new(n: u32) -> Result<Self> {
        if !(MIN_ORDER..=MAX_ORDER).contains(&n) {
            return Err(Error::OrderOutOfRange(n));
        }
        if !is_prime(n) {
            return Err(Error::NotPrime(n));
        }
        Ok(Order(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn n(self) -> usize {
        self.0 as usize
    }

    /// Number of cards (and of images) in a complete deck: `n² + n + 1`.
    pub fn plane_size(self) -> usize {
        let n = self.n();
        n * n + n + 1
    }

    /// Images per card and cards per image: `n + 1`.
    pub fn line_size(self) -> usize {
        self.n() + 1
    }

    /// The middle grid index `(n - 1) / 2`, defined for odd orders.
    pub fn middle(self) -> Result<usize> {
        if self.0.is_multiple_of(2) {
            return Err(Error::EvenOrder(self.0));
        }
        Ok((self.n() - 1) / 2)
    }
}

impl TryFrom<u32> for Order {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        Order::new(n)
    }
}

impl From<Order> for u32 {
    fn from(order: Order) -> u32 {
        order.0
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub(crate) fn is_prime(n: u32) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ImageId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CardId(pub u32);

impl fmt::Display for ImageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for CardId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A card: an id and its images, kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Card {
    pub id: CardId,
    images: Vec<ImageId>,
}

impl Card {
    pub fn new(id: CardId, images: impl IntoIterator<Item = ImageId>) -> Result<Self> {
        let mut images: Vec<ImageId> = images.into_iter().collect();
        images.sort_unstable();
        if let Some(w) = images.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateImage { card: id, image: w[0] });
        }
        Ok(Card { id, images })
    }

    pub fn images(&self) -> &[ImageId] {
        &self.images
    }

    pub fn contains(&self, image: ImageId) -> bool {
        self.images.binary_search(&image).is_ok()
    }

    /// Sorted intersection with another card's images, without the identity check.
    pub(crate) fn shared_with(&self, other: &Card) -> Vec<ImageId> {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.images.len() && j < other.images.len() {
            match self.images[i].cmp(&other.images[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(self.images[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }

    /// The single shared image, if the cards share exactly one.
    pub(crate) fn unique_shared(&self, other: &Card) -> Option<ImageId> {
        let mut found = None;
        let (mut i, mut j) = (0, 0);
        while i < self.images.len() && j < other.images.len() {
            match self.images[i].cmp(&other.images[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if found.is_some() {
                        return None;
                    }
                    found = Some(self.images[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        found
    }
}

/// Images shared by two distinct cards. Returned as-is (possibly empty or
/// with several entries) so verification can see malformed decks.
pub fn common_images(a: &Card, b: &Card) -> Result<Vec<ImageId>> {
    if a.id == b.id {
        return Err(Error::SameCard(a.id));
    }
    Ok(a.shared_with(b))
}

/// A collection of cards of a declared order. May be partial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deck {
    pub order: Order,
    pub cards: Vec<Card>,
    pub image_names: BTreeMap<ImageId, String>,
}

impl Deck {
    pub fn new(order: Order, cards: Vec<Card>) -> Self {
        Deck { order, cards, image_names: BTreeMap::new() }
    }

    pub fn card(&self, id: CardId) -> Option<&Card> {
        self.cards.iter().find(|c| c.id == id)
    }

    /// Every image id that appears on at least one card.
    pub fn images(&self) -> BTreeSet<ImageId> {
        self.cards.iter().flat_map(|c| c.images().iter().copied()).collect()
    }

    pub fn cards_with(&self, image: ImageId) -> impl Iterator<Item = &Card> {
        self.cards.iter().filter(move |c| c.contains(image))
    }

    /// Removes the listed cards, returning them in the order given.
    pub fn remove_cards(&mut self, ids: &[CardId]) -> Result<Vec<Card>> {
        let mut removed = Vec::with_capacity(ids.len());
        for &id in ids {
            let pos = self.cards.iter().position(|c| c.id == id).ok_or(Error::UnknownCard(id))?;
            removed.push(self.cards.remove(pos));
        }
        Ok(removed)
    }
}

/// Builds the canonical deck of the given order (see module docs for ids).
pub fn generate_plane(order: Order) -> Deck {
    let n = order.get();
    let nn = n * n;
    let mut cards = Vec::with_capacity(order.plane_size());
    for x in 0..n {
        for y in 0..n {
            let mut images: Vec<ImageId> =
                (0..n).map(|m| ImageId(m * n + (y + n * n - m * x % n) % n)).collect();
            images.push(ImageId(nn + x));
            cards.push(Card::new(CardId(x * n + y), images).expect("canonical card"));
        }
    }
    for m in 0..n {
        let mut images: Vec<ImageId> = (0..n).map(|b| ImageId(m * n + b)).collect();
        images.push(ImageId(nn + n));
        cards.push(Card::new(CardId(nn + m), images).expect("canonical card"));
    }
    let images = (0..=n).map(|c| ImageId(nn + c));
    cards.push(Card::new(CardId(nn + n), images).expect("canonical card"));
    Deck::new(order, cards)
}

/// Descriptive names for the canonical deck's images.
pub fn canonical_image_names(order: Order) -> BTreeMap<ImageId, String> {
    let n = order.get();
    let nn = n * n;
    let mut names = BTreeMap::new();
    for m in 0..n {
        for b in 0..n {
            names.insert(ImageId(m * n + b), format!("slope {m} offset {b}"));
        }
    }
    for c in 0..n {
        names.insert(ImageId(nn + c), format!("vertical {c}"));
    }
    names.insert(ImageId(nn + n), "infinity".to_string());
    names
}

/// One failed plane axiom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum PlaneViolation {
    CardCount { expected: usize, found: usize },
    ImageCount { expected: usize, found: usize },
    ImagesPerCard { card: CardId, expected: usize, found: usize },
    CardsPerImage { image: ImageId, expected: usize, found: usize },
    CardPairIntersection { first: CardId, second: CardId, shared: usize },
    ImagePairCooccurrence { first: ImageId, second: ImageId, cards: usize },
}

impl fmt::Display for PlaneViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaneViolation::CardCount { expected, found } => {
                write!(f, "card count {found}, expected {expected}")
            }
            PlaneViolation::ImageCount { expected, found } => {
                write!(f, "image count {found}, expected {expected}")
            }
            PlaneViolation::ImagesPerCard { card, expected, found } => {
                write!(f, "card {card} has {found} images, expected {expected}")
            }
            PlaneViolation::CardsPerImage { image, expected, found } => {
                write!(f, "image {image} appears on {found} cards, expected {expected}")
            }
            PlaneViolation::CardPairIntersection { first, second, shared } => {
                write!(f, "cards {first} and {second} share {shared} images, expected 1")
            }
            PlaneViolation::ImagePairCooccurrence { first, second, cards } => {
                write!(f, "images {first} and {second} co-occur on {cards} cards, expected 1")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub order: Order,
    pub card_count: usize,
    pub image_count: usize,
    pub violations: Vec<PlaneViolation>,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    /// Violations of the cards-per-image axiom, keyed by the observed frequency.
    pub fn frequency_violations(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for v in &self.violations {
            if let PlaneViolation::CardsPerImage { found, .. } = v {
                *out.entry(*found).or_insert(0) += 1;
            }
        }
        out
    }
}

/// Checks all six plane axioms and reports every failure.
pub fn verify_plane(deck: &Deck) -> VerificationReport {
    let order = deck.order;
    let expected_size = order.plane_size();
    let line = order.line_size();
    let mut violations = Vec::new();

    let images: Vec<ImageId> = deck.images().into_iter().collect();
    let dense: HashMap<ImageId, usize> = images.iter().enumerate().map(|(i, &img)| (img, i)).collect();

    if deck.cards.len() != expected_size {
        violations.push(PlaneViolation::CardCount { expected: expected_size, found: deck.cards.len() });
    }
    if images.len() != expected_size {
        violations.push(PlaneViolation::ImageCount { expected: expected_size, found: images.len() });
    }
    for card in &deck.cards {
        if card.images().len() != line {
            violations.push(PlaneViolation::ImagesPerCard {
                card: card.id,
                expected: line,
                found: card.images().len(),
            });
        }
    }

    let mut freq = vec![0usize; images.len()];
    let mut cooccur = vec![0usize; images.len() * images.len()];
    for card in &deck.cards {
        let idx: Vec<usize> = card.images().iter().map(|img| dense[img]).collect();
        for (k, &a) in idx.iter().enumerate() {
            freq[a] += 1;
            for &b in &idx[k + 1..] {
                cooccur[a * images.len() + b] += 1;
            }
        }
    }
    for (i, &f) in freq.iter().enumerate() {
        if f != line {
            violations.push(PlaneViolation::CardsPerImage { image: images[i], expected: line, found: f });
        }
    }

    for (i, a) in deck.cards.iter().enumerate() {
        for b in &deck.cards[i + 1..] {
            let shared = a.shared_with(b).len();
            if shared != 1 {
                violations.push(PlaneViolation::CardPairIntersection { first: a.id, second: b.id, shared });
            }
        }
    }

    for a in 0..images.len() {
        for b in a + 1..images.len() {
            let cards = cooccur[a * images.len() + b];
            if cards != 1 {
                violations.push(PlaneViolation::ImagePairCooccurrence {
                    first: images[a],
                    second: images[b],
                    cards,
                });
            }
        }
    }

    VerificationReport { order, card_count: deck.cards.len(), image_count: images.len(), violations }
}

/// Relabels images with a seed-derived permutation of `0..k` (k = number of
/// distinct images), shuffles the cards, and renumbers cards by their new
/// position. Deterministic per seed.
pub fn relabel_shuffle(deck: &Deck, seed: u64) -> Deck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images: Vec<ImageId> = deck.images().into_iter().collect();
    let mut targets: Vec<u32> = (0..images.len() as u32).collect();
    targets.shuffle(&mut rng);
    let relabel: HashMap<ImageId, ImageId> =
        images.iter().zip(&targets).map(|(&old, &new)| (old, ImageId(new))).collect();

    let mut order: Vec<usize> = (0..deck.cards.len()).collect();
    order.shuffle(&mut rng);
    let cards = order
        .iter()
        .enumerate()
        .map(|(new_id, &old)| {
            let images = deck.cards[old].images().iter().map(|img| relabel[img]);
            Card::new(CardId(new_id as u32), images).expect("relabeling is injective")
        })
        .collect();
    let image_names = deck
        .image_names
        .iter()
        .filter_map(|(img, name)| relabel.get(img).map(|&new| (new, name.clone())))
        .collect();
    Deck { order: deck.order, cards, image_names }
}

/// Splits a deck into the cards without `image` (the affine cards) and the
/// cards carrying it (the infinity cards).
pub fn remove_image_set(deck: &Deck, image: ImageId) -> Result<(Vec<Card>, Vec<Card>)> {
    let (infinity, affine): (Vec<Card>, Vec<Card>) = deck.cards.iter().cloned().partition(|c| c.contains(image));
    if infinity.is_empty() {
        return Err(Error::UnknownImage(image));
    }
    Ok((affine, infinity))
}
