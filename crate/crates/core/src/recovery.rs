//! Rebuilding the two cards missing from an otherwise complete deck.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::plane::{Card, CardId, Deck, ImageId, Order};

/// Per-image occurrence counts across a (possibly partial) deck.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    pub order: Order,
    pub freq: BTreeMap<ImageId, usize>,
}

impl Census {
    /// Adds zero entries for images of `universe` absent from the deck.
    pub fn with_universe(mut self, universe: &BTreeSet<ImageId>) -> Self {
        for &img in universe {
            self.freq.entry(img).or_insert(0);
        }
        self
    }

    pub fn total(&self) -> usize {
        self.freq.values().sum()
    }

    pub fn images_at(&self, count: usize) -> Vec<ImageId> {
        self.freq.iter().filter(|(_, &f)| f == count).map(|(&img, _)| img).collect()
    }

    /// Frequency → number of images with that frequency.
    pub fn histogram(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for &f in self.freq.values() {
            *out.entry(f).or_insert(0) += 1;
        }
        out
    }
}

pub fn image_census(deck: &Deck) -> Census {
    let mut freq = BTreeMap::new();
    for card in &deck.cards {
        for &img in card.images() {
            *freq.entry(img).or_insert(0) += 1;
        }
    }
    Census { order: deck.order, freq }
}

/// Collects every image id from the cards of one fully present image set.
/// Those `n+1` cards pairwise share only that image, so together they show
/// `(n+1)·n + 1` distinct images.
pub fn enumerate_image_universe(deck: &Deck) -> Result<BTreeSet<ImageId>> {
    let census = image_census(deck);
    let full = census
        .images_at(deck.order.line_size())
        .into_iter()
        .next()
        .ok_or_else(|| Error::Recovery("no image appears on a full set of cards".into()))?;
    Ok(deck.cards_with(full).flat_map(|c| c.images().iter().copied()).collect())
}

/// Reconstructs the two missing cards of a deck that is a projective plane
/// minus exactly two cards.
///
/// The image missing twice goes on both new cards. The lowest-id image
/// missing once is the anchor for the first card; every other once-missing
/// image joins the anchor's card unless it already co-occurs with the anchor
/// somewhere in the deck, in which case it goes on the second card.
pub fn reconstruct_missing_cards(deck: &Deck) -> Result<(Card, Card)> {
    let order = deck.order;
    let n = order.n();
    let expected_cards = order.plane_size() - 2;
    if deck.cards.len() != expected_cards {
        return Err(Error::Recovery(format!(
            "deck has {} cards; exactly {expected_cards} expected for two missing",
            deck.cards.len()
        )));
    }
    let universe = enumerate_image_universe(deck)?;
    if universe.len() != order.plane_size() {
        return Err(Error::Recovery(format!(
            "found {} distinct images, expected {}",
            universe.len(),
            order.plane_size()
        )));
    }
    let census = image_census(deck).with_universe(&universe);

    let doubly = census.images_at(n - 1);
    let [shared] = doubly[..] else {
        return Err(Error::Recovery(format!("expected one image missing twice, found {}", doubly.len())));
    };
    let singly = census.images_at(n);
    if singly.len() != 2 * n {
        return Err(Error::Recovery(format!("expected {} images missing once, found {}", 2 * n, singly.len())));
    }
    let complete = census.images_at(n + 1).len();
    if complete + singly.len() + 1 != universe.len() {
        return Err(Error::Recovery("census has images outside the expected frequencies".into()));
    }

    let anchor = singly[0];
    let mut first = vec![shared, anchor];
    let mut second = vec![shared];
    for &img in &singly[1..] {
        let meets_anchor = deck.cards.iter().any(|c| c.contains(anchor) && c.contains(img));
        if meets_anchor {
            second.push(img);
        } else {
            first.push(img);
        }
    }
    if first.len() != n + 1 || second.len() != n + 1 {
        return Err(Error::Recovery(format!(
            "co-occurrence split gave cards of {} and {} images",
            first.len(),
            second.len()
        )));
    }

    let next_id = deck.cards.iter().map(|c| c.id.0 + 1).max().unwrap_or(0);
    Ok((Card::new(CardId(next_id), first)?, Card::new(CardId(next_id + 1), second)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::{generate_plane, verify_plane};

    fn deck_without(n: u32, ids: &[u32]) -> Deck {
        let mut deck = generate_plane(Order::new(n).unwrap());
        deck.remove_cards(&ids.iter().map(|&i| CardId(i)).collect::<Vec<_>>()).unwrap();
        deck
    }

    #[test]
    fn census_of_complete_deck() {
        let census = image_census(&generate_plane(Order::new(7).unwrap()));
        assert_eq!(census.histogram(), BTreeMap::from([(8, 57)]));
        assert_eq!(census.total(), 57 * 8);
    }

    #[test]
    fn census_after_two_deletions() {
        let census = image_census(&deck_without(7, &[5, 30]));
        assert_eq!(census.histogram(), BTreeMap::from([(6, 1), (7, 14), (8, 42)]));

        let census = image_census(&deck_without(3, &[0, 4]));
        assert_eq!(census.freq[&ImageId(3)], 2);
        assert_eq!(census.histogram(), BTreeMap::from([(2, 1), (3, 6), (4, 6)]));
        assert_eq!(census.total(), 11 * 4);
    }

    #[test]
    fn universe() {
        assert_eq!(enumerate_image_universe(&generate_plane(Order::new(7).unwrap())).unwrap().len(), 57);
        assert_eq!(enumerate_image_universe(&generate_plane(Order::new(3).unwrap())).unwrap().len(), 13);
        assert_eq!(enumerate_image_universe(&deck_without(7, &[0, 1])).unwrap().len(), 57);
    }

    #[test]
    fn n3_worked_example() {
        let (a, b) = reconstruct_missing_cards(&deck_without(3, &[0, 4])).unwrap();
        let ids = |c: &Card| c.images().iter().map(|i| i.0).collect::<Vec<_>>();
        assert_eq!(ids(&a), vec![0, 3, 6, 9]);
        assert_eq!(ids(&b), vec![1, 3, 8, 10]);
    }

    #[test]
    fn completed_deck_verifies() {
        let mut deck = deck_without(7, &[12, 51]);
        let (a, b) = reconstruct_missing_cards(&deck).unwrap();
        deck.cards.push(a);
        deck.cards.push(b);
        assert!(verify_plane(&deck).is_clean());
    }

    #[test]
    fn rejects_wrong_shapes() {
        assert!(reconstruct_missing_cards(&generate_plane(Order::new(7).unwrap())).is_err());
        assert!(reconstruct_missing_cards(&deck_without(7, &[1, 2, 3])).is_err());
    }
}
