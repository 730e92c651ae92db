//! The toroidal `n × n` grid of affine cards, the placement rule, and moves.
//!
//! Positions are `(row, col)` with row 0 at the top, both taken mod `n`.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plane::{Card, CardId, ImageId, Order};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridPos {
    pub row: usize,
    pub col: usize,
}

impl GridPos {
    /// Reduces both components mod `n`.
    pub fn new(order: Order, row: i64, col: i64) -> Self {
        let n = order.n() as i64;
        GridPos { row: row.rem_euclid(n) as usize, col: col.rem_euclid(n) as usize }
    }
}

impl fmt::Display for GridPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Where the common image of the cards at `p1` and `p2 = p1 + (h, k)` must
/// also appear: `p1 + 2·(h, k)` mod `n`.
pub fn third_position(order: Order, p1: GridPos, p2: GridPos) -> Result<GridPos> {
    if p1 == p2 {
        return Err(Error::InvalidGrid(format!("third position needs two distinct cells, got {p1} twice")));
    }
    let (r1, c1, r2, c2) = (p1.row as i64, p1.col as i64, p2.row as i64, p2.col as i64);
    Ok(GridPos::new(order, 2 * r2 - r1, 2 * c2 - c1))
}

/// Direction of an image's line of cells. `Finite(s)` means the cells are
/// `{(r0 + s·c, c)}`, so a row has slope 0 and the main diagonal slope 1;
/// `Vertical` is a single column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slope {
    Finite(u32),
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Move {
    SwapRows { i: usize, j: usize },
    SwapCols { i: usize, j: usize },
    /// Rows `i, j` and columns `i, j` together.
    PairedSwap { i: usize, j: usize },
    /// A paired swap plus its mirror image about the centre.
    BalancedSwap { i: usize, j: usize },
}

impl Move {
    pub fn indices(self) -> (usize, usize) {
        match self {
            Move::SwapRows { i, j }
            | Move::SwapCols { i, j }
            | Move::PairedSwap { i, j }
            | Move::BalancedSwap { i, j } => (i, j),
        }
    }

    pub fn validate(self, order: Order) -> Result<()> {
        let (i, j) = self.indices();
        let n = order.n();
        if i >= n || j >= n {
            return Err(Error::InvalidMove(format!("{self}: index out of range for order {n}")));
        }
        if i == j {
            return Err(Error::InvalidMove(format!("{self}: indices must differ")));
        }
        // mirroring a swap with the middle index gives a 3-cycle, not a balanced move
        if let Move::BalancedSwap { .. } = self {
            if n % 2 == 1 && (i == n / 2 || j == n / 2) {
                return Err(Error::InvalidMove(format!("{self}: balanced swaps cannot move the middle index")));
            }
        }
        Ok(())
    }

    pub fn is_paired(self) -> bool {
        matches!(self, Move::PairedSwap { .. } | Move::BalancedSwap { .. })
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::SwapRows { i, j } => write!(f, "swap rows {i},{j}"),
            Move::SwapCols { i, j } => write!(f, "swap cols {i},{j}"),
            Move::PairedSwap { i, j } => write!(f, "paired swap {i},{j}"),
            Move::BalancedSwap { i, j } => write!(f, "balanced swap {i},{j}"),
        }
    }
}

/// A failed placement-rule instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleViolation {
    pub first: GridPos,
    pub second: GridPos,
    pub third: GridPos,
    /// Images shared by the first two cards (one, for a sound deck).
    pub shared: Vec<ImageId>,
    pub third_card: CardId,
    pub third_images: Vec<ImageId>,
}

/// A full `n × n` arrangement of distinct cards. Moves permute cell indices
/// over a shared card table, so cloning and permuting are cheap.
#[derive(Debug, Clone)]
pub struct Grid {
    order: Order,
    cards: Arc<[Card]>,
    cells: Vec<u32>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.card_ids() == other.card_ids()
    }
}

impl Eq for Grid {}

impl Grid {
    /// Builds a grid from `n²` cards listed row by row.
    pub fn from_cards(order: Order, cards: Vec<Card>) -> Result<Self> {
        let n = order.n();
        if cards.len() != n * n {
            return Err(Error::InvalidGrid(format!("{} cards for a {n}x{n} grid", cards.len())));
        }
        let mut seen = HashSet::new();
        for card in &cards {
            if !seen.insert(card.id) {
                return Err(Error::DuplicateCard(card.id));
            }
        }
        let cells = (0..cards.len() as u32).collect();
        Ok(Grid { order, cards: cards.into(), cells })
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn card_at(&self, row: usize, col: usize) -> &Card {
        let n = self.order.n();
        &self.cards[self.cells[row * n + col] as usize]
    }

    pub fn card(&self, pos: GridPos) -> &Card {
        self.card_at(pos.row, pos.col)
    }

    /// Card ids row by row.
    pub fn card_ids(&self) -> Vec<CardId> {
        self.cells.iter().map(|&c| self.cards[c as usize].id).collect()
    }

    pub fn rows(&self) -> Vec<Vec<&Card>> {
        let n = self.order.n();
        (0..n).map(|r| (0..n).map(|c| self.card_at(r, c)).collect()).collect()
    }

    /// `result(r, c) = self(rows[r], cols[c])`.
    pub fn permuted(&self, rows: &[usize], cols: &[usize]) -> Grid {
        let n = self.order.n();
        let mut cells = Vec::with_capacity(n * n);
        for &r in rows {
            for &c in cols {
                cells.push(self.cells[r * n + c]);
            }
        }
        Grid { order: self.order, cards: Arc::clone(&self.cards), cells }
    }

    /// Same grid with every cell moved by `(dr, dc)` on the torus.
    pub fn translated(&self, dr: usize, dc: usize) -> Grid {
        let n = self.order.n();
        let rows: Vec<usize> = (0..n).map(|r| (r + n - dr % n) % n).collect();
        let cols: Vec<usize> = (0..n).map(|c| (c + n - dc % n) % n).collect();
        self.permuted(&rows, &cols)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        let n = self.order.n();
        for c in 0..n {
            self.cells.swap(i * n + c, j * n + c);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        let n = self.order.n();
        for r in 0..n {
            self.cells.swap(r * n + i, r * n + j);
        }
    }

    fn paired(&mut self, i: usize, j: usize) {
        self.swap_rows(i, j);
        self.swap_cols(i, j);
    }

    pub fn apply_move(&self, mv: Move) -> Result<Grid> {
        let mut next = self.clone();
        next.apply_in_place(mv)?;
        Ok(next)
    }

    pub fn apply_in_place(&mut self, mv: Move) -> Result<()> {
        mv.validate(self.order)?;
        let n = self.order.n();
        match mv {
            Move::SwapRows { i, j } => self.swap_rows(i, j),
            Move::SwapCols { i, j } => self.swap_cols(i, j),
            Move::PairedSwap { i, j } => self.paired(i, j),
            Move::BalancedSwap { i, j } => {
                self.paired(i, j);
                let (mi, mj) = (n - 1 - i, n - 1 - j);
                let same_pair = (mi == i && mj == j) || (mi == j && mj == i);
                if !same_pair {
                    self.paired(mi, mj);
                }
            }
        }
        Ok(())
    }

    /// Cells holding `image`, row-major.
    pub fn image_positions(&self, image: ImageId) -> Vec<GridPos> {
        let n = self.order.n();
        let mut out = Vec::new();
        for row in 0..n {
            for col in 0..n {
                if self.card_at(row, col).contains(image) {
                    out.push(GridPos { row, col });
                }
            }
        }
        out
    }

    pub fn slope_of_image(&self, image: ImageId) -> Option<Slope> {
        let n = self.order.n();
        let positions = self.image_positions(image);
        if positions.len() != n {
            return None;
        }
        if positions.iter().all(|p| p.col == positions[0].col) {
            return Some(Slope::Vertical);
        }
        let mut row_of_col = vec![usize::MAX; n];
        for p in &positions {
            if row_of_col[p.col] != usize::MAX {
                return None;
            }
            row_of_col[p.col] = p.row;
        }
        let slope = (row_of_col[1] + n - row_of_col[0]) % n;
        let fits = (0..n).all(|c| row_of_col[c] == (row_of_col[0] + slope * c) % n);
        fits.then_some(Slope::Finite(slope as u32))
    }

    /// The one image common to all listed cells, if there is exactly one.
    pub fn common_image(&self, cells: impl IntoIterator<Item = GridPos>) -> Option<ImageId> {
        let mut iter = cells.into_iter();
        let first = self.card(iter.next()?);
        let mut candidates: Vec<ImageId> = first.images().to_vec();
        for pos in iter {
            let card = self.card(pos);
            candidates.retain(|&img| card.contains(img));
            if candidates.is_empty() {
                return None;
            }
        }
        match candidates[..] {
            [only] => Some(only),
            _ => None,
        }
    }

    pub fn row_image(&self, row: usize) -> Option<ImageId> {
        self.common_image((0..self.order.n()).map(|col| GridPos { row, col }))
    }

    pub fn col_image(&self, col: usize) -> Option<ImageId> {
        self.common_image((0..self.order.n()).map(|row| GridPos { row, col }))
    }

    pub fn diagonal_image(&self) -> Option<ImageId> {
        self.common_image((0..self.order.n()).map(|i| GridPos { row: i, col: i }))
    }

    pub fn counterdiagonal_image(&self) -> Option<ImageId> {
        let n = self.order.n();
        self.common_image((0..n).map(|i| GridPos { row: i, col: n - 1 - i }))
    }

    fn all_positions(&self) -> Vec<GridPos> {
        let n = self.order.n();
        (0..n).flat_map(|row| (0..n).map(move |col| GridPos { row, col })).collect()
    }

    /// Checks the placement rule for every unordered pair of cells, in both
    /// orientations, and reports each failure.
    pub fn rule_check(&self) -> Vec<RuleViolation> {
        let positions = self.all_positions();
        let mut out = Vec::new();
        for (k, &p1) in positions.iter().enumerate() {
            for &p2 in &positions[k + 1..] {
                let (a, b) = (self.card(p1), self.card(p2));
                let shared = a.shared_with(b);
                let mut thirds = vec![third_position(self.order, p1, p2).unwrap()];
                let back = third_position(self.order, p2, p1).unwrap();
                if back != thirds[0] {
                    thirds.push(back);
                }
                for third in thirds {
                    let card = self.card(third);
                    let ok = shared.len() == 1 && card.contains(shared[0]);
                    if !ok {
                        out.push(RuleViolation {
                            first: p1,
                            second: p2,
                            third,
                            shared: shared.clone(),
                            third_card: card.id,
                            third_images: card.images().to_vec(),
                        });
                    }
                }
            }
        }
        out
    }

    /// `rule_check().is_empty()`, stopping at the first failure.
    pub fn rule_holds(&self) -> bool {
        let positions = self.all_positions();
        for (k, &p1) in positions.iter().enumerate() {
            for &p2 in &positions[k + 1..] {
                let Some(img) = self.card(p1).unique_shared(self.card(p2)) else {
                    return false;
                };
                let forward = third_position(self.order, p1, p2).unwrap();
                let back = third_position(self.order, p2, p1).unwrap();
                if !self.card(forward).contains(img) || !self.card(back).contains(img) {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::generate_plane;
    use proptest::prelude::*;

    fn order(n: u32) -> Order {
        Order::new(n).unwrap()
    }

    /// Cell (r, c) holds canonical affine card (r, c).
    pub(crate) fn canonical_grid(n: u32) -> Grid {
        let deck = generate_plane(order(n));
        let nn = (n * n) as usize;
        Grid::from_cards(order(n), deck.cards[..nn].to_vec()).unwrap()
    }

    fn p(row: usize, col: usize) -> GridPos {
        GridPos { row, col }
    }

    #[test]
    fn third_position_examples() {
        assert_eq!(third_position(order(7), p(1, 2), p(3, 3)).unwrap(), p(5, 4));
        assert_eq!(third_position(order(7), p(6, 6), p(0, 0)).unwrap(), p(1, 1));
        assert_eq!(third_position(order(3), p(0, 0), p(1, 1)).unwrap(), p(2, 2));
        assert!(third_position(order(3), p(1, 1), p(1, 1)).is_err());
    }

    #[test]
    fn canonical_grids_are_solved() {
        for n in [3, 5, 7] {
            let grid = canonical_grid(n);
            assert!(grid.rule_check().is_empty());
            assert!(grid.rule_holds());
            for i in 0..n as usize {
                assert!(grid.row_image(i).is_some());
                assert!(grid.col_image(i).is_some());
            }
        }
    }

    #[test]
    fn swapping_two_cards_breaks_the_rule() {
        let grid = canonical_grid(5);
        let mut cards: Vec<Card> = grid.rows().into_iter().flatten().cloned().collect();
        cards.swap(3, 17);
        let broken = Grid::from_cards(order(5), cards).unwrap();
        assert!(!broken.rule_check().is_empty());
        assert!(!broken.rule_holds());
    }

    #[test]
    fn positions_and_slopes_n3() {
        let grid = canonical_grid(3);
        assert_eq!(grid.image_positions(ImageId(3)), vec![p(0, 0), p(1, 1), p(2, 2)]);
        assert_eq!(grid.image_positions(ImageId(12)), vec![]);
        // row 0 is the vertical line x = 0, id 9
        assert_eq!(grid.row_image(0), Some(ImageId(9)));
        assert_eq!(grid.slope_of_image(ImageId(9)), Some(Slope::Finite(0)));
        assert_eq!(grid.col_image(0), Some(ImageId(0)));
        assert_eq!(grid.slope_of_image(ImageId(0)), Some(Slope::Vertical));
        assert_eq!(grid.diagonal_image(), Some(ImageId(3)));
        assert_eq!(grid.slope_of_image(ImageId(3)), Some(Slope::Finite(1)));
        assert_eq!(grid.counterdiagonal_image(), Some(ImageId(8)));
        assert_eq!(grid.slope_of_image(ImageId(8)), Some(Slope::Finite(2)));
    }

    #[test]
    fn solved_grid_has_all_slopes() {
        let n = 7;
        let grid = canonical_grid(n);
        let deck = generate_plane(order(n));
        let mut slopes = HashSet::new();
        for img in deck.images() {
            if let Some(s) = grid.slope_of_image(img) {
                assert_eq!(grid.image_positions(img).len(), 7);
                slopes.insert(s);
            }
        }
        assert_eq!(slopes.len(), 8);
    }

    #[test]
    fn move_validation() {
        let grid = canonical_grid(3);
        assert!(grid.apply_move(Move::SwapRows { i: 1, j: 1 }).is_err());
        assert!(grid.apply_move(Move::SwapCols { i: 0, j: 3 }).is_err());
        assert!(canonical_grid(7).apply_move(Move::BalancedSwap { i: 3, j: 0 }).is_err());
    }

    #[test]
    fn balanced_swap_skips_self_mirror() {
        let grid = canonical_grid(7);
        let once = grid.apply_move(Move::BalancedSwap { i: 2, j: 4 }).unwrap();
        let paired = grid.apply_move(Move::PairedSwap { i: 2, j: 4 }).unwrap();
        assert_eq!(once, paired);
        let mirrored = grid
            .apply_move(Move::PairedSwap { i: 0, j: 1 })
            .unwrap()
            .apply_move(Move::PairedSwap { i: 6, j: 5 })
            .unwrap();
        assert_eq!(grid.apply_move(Move::BalancedSwap { i: 0, j: 1 }).unwrap(), mirrored);
    }

    fn any_move(n: usize) -> impl Strategy<Value = Move> {
        (0..4usize, 0..n, 1..n).prop_map(move |(kind, i, d)| {
            let j = (i + d) % n;
            let touches_middle = i == n / 2 || j == n / 2;
            match kind {
                3 if touches_middle => Move::PairedSwap { i, j },
                0 => Move::SwapRows { i, j },
                1 => Move::SwapCols { i, j },
                2 => Move::PairedSwap { i, j },
                _ => Move::BalancedSwap { i, j },
            }
        })
    }

    proptest! {
        #[test]
        fn moves_are_involutions(moves in prop::collection::vec(any_move(7), 1..20)) {
            let grid = canonical_grid(7);
            let mut g = grid.clone();
            for &m in &moves {
                g.apply_in_place(m).unwrap();
            }
            let mut sorted_ids = g.card_ids();
            sorted_ids.sort();
            let mut original = grid.card_ids();
            original.sort();
            prop_assert_eq!(sorted_ids, original);
            for &m in moves.iter().rev() {
                g.apply_in_place(m).unwrap();
            }
            prop_assert_eq!(g, grid);
        }

        #[test]
        fn paired_moves_keep_diagonal(moves in prop::collection::vec(any_move(7), 1..20)) {
            let grid = canonical_grid(7);
            let diag = grid.diagonal_image();
            let mut g = grid.clone();
            for m in moves.into_iter().filter(|m| m.is_paired()) {
                g.apply_in_place(m).unwrap();
                prop_assert_eq!(g.diagonal_image(), diag);
            }
        }

        #[test]
        fn balanced_moves_keep_both_diagonals(moves in prop::collection::vec(any_move(7), 1..20)) {
            let grid = canonical_grid(7);
            let (diag, anti) = (grid.diagonal_image(), grid.counterdiagonal_image());
            let mut g = grid.clone();
            for m in moves.into_iter().filter(|m| matches!(m, Move::BalancedSwap { .. })) {
                g.apply_in_place(m).unwrap();
                prop_assert_eq!(g.diagonal_image(), diag);
                prop_assert_eq!(g.counterdiagonal_image(), anti);
            }
        }
    }
}
