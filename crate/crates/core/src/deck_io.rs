//! Text formats for decks and grids. Blank lines and lines starting with
//! `#` are ignored by both parsers.
//!
//! ```text
//! spotit-deck 1 order=3
//! image 0 sun
//! card 0: 0,3,6,9
//! ```
//!
//! ```text
//! spotit-grid 1 order=3
//! 0,1,2
//! 3,4,5
//! 6,7,8
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::plane::{Card, CardId, Deck, ImageId, Order};

pub const FORMAT_VERSION: u32 = 1;
const DECK_MAGIC: &str = "spotit-deck";
const GRID_MAGIC: &str = "spotit-grid";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Cards in id order, images ascending, names first.
pub fn serialize_deck(deck: &Deck) -> String {
    let mut out = String::new();
    writeln!(out, "{DECK_MAGIC} {FORMAT_VERSION} order={}", deck.order).unwrap();
    for (id, name) in &deck.image_names {
        writeln!(out, "image {id} {name}").unwrap();
    }
    let mut cards: Vec<&Card> = deck.cards.iter().collect();
    cards.sort_by_key(|c| c.id);
    for card in cards {
        let images: Vec<String> = card.images().iter().map(|i| i.0.to_string()).collect();
        writeln!(out, "card {}: {}", card.id, images.join(",")).unwrap();
    }
    out
}

fn parse_header(line: Option<&str>, magic: &str) -> Result<Order> {
    let line = line.ok_or_else(|| parse_err(1, "empty document"))?;
    let mut parts = line.split(' ');
    if parts.next() != Some(magic) {
        return Err(parse_err(1, format!("expected `{magic}` header")));
    }
    let version = parts.next().ok_or_else(|| parse_err(1, "missing format version"))?;
    let version: u32 = version.parse().map_err(|_| parse_err(1, format!("bad version `{version}`")))?;
    if version != FORMAT_VERSION {
        return Err(parse_err(1, format!("unknown format version {version}")));
    }
    let order = parts
        .next()
        .and_then(|p| p.strip_prefix("order="))
        .ok_or_else(|| parse_err(1, "missing `order=<n>`"))?;
    if parts.next().is_some() {
        return Err(parse_err(1, "trailing header fields"));
    }
    let n: u32 = order.parse().map_err(|_| parse_err(1, format!("bad order `{order}`")))?;
    Order::new(n).map_err(|e| parse_err(1, e.to_string()))
}

fn parse_u32(field: &str, what: &str, line: usize) -> Result<u32> {
    field.parse().map_err(|_| parse_err(line, format!("bad {what} `{field}`")))
}

/// Parses a deck document. Structural problems are errors; plane axioms are
/// not checked.
pub fn parse_deck(text: &str) -> Result<Deck> {
    let mut lines = text.lines();
    let order = parse_header(lines.next(), DECK_MAGIC)?;
    let mut cards = Vec::new();
    let mut seen = HashSet::new();
    let mut image_names = BTreeMap::new();
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("image ") {
            let (id, name) = rest.split_once(' ').ok_or_else(|| parse_err(lineno, "image line needs a name"))?;
            let id = ImageId(parse_u32(id, "image id", lineno)?);
            if image_names.insert(id, name.to_string()).is_some() {
                return Err(parse_err(lineno, format!("image {id} named twice")));
            }
        } else if let Some(rest) = line.strip_prefix("card ") {
            let (id, list) = rest.split_once(": ").ok_or_else(|| parse_err(lineno, "expected `card <id>: <images>`"))?;
            let id = CardId(parse_u32(id, "card id", lineno)?);
            if !seen.insert(id) {
                return Err(parse_err(lineno, format!("duplicate card id {id}")));
            }
            let images = list
                .split(',')
                .map(|f| parse_u32(f, "image id", lineno).map(ImageId))
                .collect::<Result<Vec<_>>>()?;
            let strictly_ascending = images.windows(2).all(|w| w[0] < w[1]);
            let card = Card::new(id, images).map_err(|e| parse_err(lineno, e.to_string()))?;
            if !strictly_ascending {
                return Err(parse_err(lineno, "image ids must be strictly ascending"));
            }
            cards.push(card);
        } else {
            return Err(parse_err(lineno, format!("unrecognized line `{line}`")));
        }
    }
    Ok(Deck { order, cards, image_names })
}

pub fn serialize_grid(grid: &Grid) -> String {
    let mut out = String::new();
    writeln!(out, "{GRID_MAGIC} {FORMAT_VERSION} order={}", grid.order()).unwrap();
    let n = grid.order().n();
    for r in 0..n {
        let row: Vec<String> = (0..n).map(|c| grid.card_at(r, c).id.to_string()).collect();
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

/// Parses a grid document into card ids, row-major.
pub fn parse_grid_ids(text: &str) -> Result<(Order, Vec<CardId>)> {
    let mut lines = text.lines();
    let order = parse_header(lines.next(), GRID_MAGIC)?;
    let n = order.n();
    let mut ids = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| parse_u32(f, "card id", lineno).map(CardId))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != n {
            return Err(parse_err(lineno, format!("row has {} cards, expected {n}", row.len())));
        }
        ids.extend(row);
        rows += 1;
    }
    if rows != n {
        return Err(parse_err(rows + 1, format!("grid has {rows} rows, expected {n}")));
    }
    Ok((order, ids))
}

/// Parses a grid and resolves its card ids against `deck`.
pub fn parse_grid(text: &str, deck: &Deck) -> Result<Grid> {
    let (order, ids) = parse_grid_ids(text)?;
    if order != deck.order {
        return Err(parse_err(1, format!("grid order {order} does not match deck order {}", deck.order)));
    }
    let cards = ids
        .iter()
        .map(|&id| deck.card(id).cloned().ok_or(Error::UnknownCard(id)))
        .collect::<Result<Vec<_>>>()?;
    Grid::from_cards(order, cards)
}
