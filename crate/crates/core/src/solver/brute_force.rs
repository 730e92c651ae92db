//! Exhaustive placement search, used as an oracle for tiny orders.
//!
//! Solutions are counted up to translation on the torus: the lowest-id
//! affine card is pinned to `(0, 0)`. Every solution translates to exactly
//! one pinned solution, see [`normalize_translation`].

use crate::error::{Error, Result};
use crate::grid::{third_position, Grid, GridPos};
use crate::plane::{remove_image_set, Card, Deck};

pub const MAX_BRUTE_FORCE_ORDER: u32 = 3;

/// All pinned arrangements of the affine cards (infinity = lowest image id)
/// that satisfy the placement rule. A deck whose affine part is not `n²`
/// distinct cards yields no solutions.
pub fn brute_force_solve(deck: &Deck) -> Result<Vec<Grid>> {
    let order = deck.order;
    if order.get() > MAX_BRUTE_FORCE_ORDER {
        return Err(Error::Solver {
            stage: "brute force",
            message: format!("order {order} is too large for exhaustive search"),
        });
    }
    let n = order.n();
    let Some(infinity) = deck.images().into_iter().next() else {
        return Ok(Vec::new());
    };
    let (mut affine, _) = remove_image_set(deck, infinity)?;
    if affine.len() != n * n {
        return Ok(Vec::new());
    }
    affine.sort_by_key(|c| c.id);

    let positions: Vec<GridPos> = (0..n * n).map(|t| GridPos { row: t / n, col: t % n }).collect();
    let mut placed: Vec<usize> = vec![0];
    let mut used = vec![false; affine.len()];
    used[0] = true;
    let mut out = Vec::new();
    search(&affine, &positions, &mut placed, &mut used, &mut out, deck);
    Ok(out
        .into_iter()
        .filter_map(|cells| Grid::from_cards(order, cells.iter().map(|&i| affine[i].clone()).collect()).ok())
        .collect())
}

/// Checks every rule instance whose three cells are all placed and one of
/// which is the newest cell.
fn consistent(affine: &[Card], positions: &[GridPos], placed: &[usize], deck: &Deck) -> bool {
    let order = deck.order;
    let n = order.n();
    let last = placed.len() - 1;
    let index = |p: GridPos| p.row * n + p.col;
    for a in 0..placed.len() {
        for b in 0..placed.len() {
            if a == b {
                continue;
            }
            let third = index(third_position(order, positions[a], positions[b]).unwrap());
            if third > last || (a != last && b != last && third != last) {
                continue;
            }
            let shared = affine[placed[a]].shared_with(&affine[placed[b]]);
            if shared.len() != 1 || !affine[placed[third]].contains(shared[0]) {
                return false;
            }
        }
    }
    true
}

fn search(
    affine: &[Card],
    positions: &[GridPos],
    placed: &mut Vec<usize>,
    used: &mut [bool],
    out: &mut Vec<Vec<usize>>,
    deck: &Deck,
) {
    if placed.len() == positions.len() {
        out.push(placed.clone());
        return;
    }
    for card in 0..affine.len() {
        if used[card] {
            continue;
        }
        placed.push(card);
        if consistent(affine, positions, placed, deck) {
            used[card] = true;
            search(affine, positions, placed, used, out, deck);
            used[card] = false;
        }
        placed.pop();
    }
}

/// Translates `grid` so the lowest-id card sits at `(0, 0)`.
pub fn normalize_translation(grid: &Grid) -> Grid {
    let n = grid.order().n();
    let ids = grid.card_ids();
    let min = ids.iter().enumerate().min_by_key(|(_, id)| **id).map(|(t, _)| t).unwrap_or(0);
    let (r, c) = (min / n, min % n);
    grid.translated(n - r, n - c)
}
