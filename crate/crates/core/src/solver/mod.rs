//! The staged solution of the grid solitaire.
//!
//! 1. pick an infinity image and split off its cards;
//! 2. lay out the affine cards with one infinity card indexing rows and
//!    another indexing columns;
//! 3. permute columns until one image runs down the main diagonal;
//! 4. find the counterdiagonal image on the middle card and, with paired
//!    row/column swaps, nest its pairs into mirror pairs;
//! 5. search the remaining level permutations and flips for a solution.

mod brute_force;
mod counting;
mod pairing;

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridPos, Move};
use crate::plane::{remove_image_set, Card, CardId, Deck, ImageId, Order};
use crate::recovery::image_census;

pub use brute_force::{brute_force_solve, normalize_translation};
pub use counting::{
    count_paired_orbit, count_residual, counts_report, residual_group_size, setup_count, CountsReport, OrbitCount,
    MAX_ORBIT_ORDER, MAX_RESIDUAL_ORDER,
};
pub use pairing::{enumerate_pairings, Pairing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Diagonal,
    Counterdiagonal,
    Finish,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Diagonal => "diagonal",
            Stage::Counterdiagonal => "counterdiagonal",
            Stage::Finish => "finish",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoggedMove {
    pub stage: Stage,
    #[serde(rename = "move")]
    pub mv: Move,
}

/// Moves in application order, each tagged with the stage that emitted it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveLog {
    pub entries: Vec<LoggedMove>,
}

impl MoveLog {
    fn push(&mut self, stage: Stage, mv: Move) {
        self.entries.push(LoggedMove { stage, mv });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn moves(&self) -> impl Iterator<Item = Move> + '_ {
        self.entries.iter().map(|e| e.mv)
    }

    pub fn extend(&mut self, other: MoveLog) {
        self.entries.extend(other.entries);
    }

    pub fn replay(&self, start: &Grid) -> Result<Grid> {
        let mut grid = start.clone();
        for mv in self.moves() {
            grid.apply_in_place(mv)?;
        }
        Ok(grid)
    }
}

fn stage_err(stage: &'static str, message: impl Into<String>) -> Error {
    Error::Solver { stage, message: message.into() }
}

/// Lowest image id for a complete deck; the image missing from both cards
/// for a deck that lacks exactly two.
pub fn choose_infinity(deck: &Deck) -> Result<ImageId> {
    let order = deck.order;
    let census = image_census(deck);
    let full = order.plane_size();
    let complete = deck.cards.len() == full
        && census.freq.len() == full
        && census.freq.values().all(|&f| f == order.line_size());
    if complete {
        return Ok(*census.freq.keys().next().expect("complete deck has images"));
    }
    if deck.cards.len() == full - 2 {
        if let [doubly] = census.images_at(order.n() - 1)[..] {
            return Ok(doubly);
        }
    }
    Err(Error::DeckShape(format!(
        "{} cards is neither a complete deck nor one missing two cards with a single doubly-missing image",
        deck.cards.len()
    )))
}

/// The infinity image and the two infinity cards that index rows and columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisChoice {
    pub infinity: ImageId,
    pub row_card: Card,
    pub col_card: Card,
}

impl AxisChoice {
    pub fn new(infinity: ImageId, row_card: Card, col_card: Card) -> Result<Self> {
        if row_card.id == col_card.id {
            return Err(Error::DeckShape("row and column axis cards must differ".into()));
        }
        for card in [&row_card, &col_card] {
            if !card.contains(infinity) {
                return Err(Error::DeckShape(format!("card {} does not carry infinity image {infinity}", card.id)));
            }
        }
        Ok(AxisChoice { infinity, row_card, col_card })
    }

    /// The two lowest-id infinity cards.
    pub fn default_for(infinity: ImageId, infinity_cards: &[Card]) -> Result<Self> {
        let mut cards: Vec<&Card> = infinity_cards.iter().collect();
        cards.sort_by_key(|c| c.id);
        match cards[..] {
            [row, col, ..] => AxisChoice::new(infinity, row.clone(), col.clone()),
            _ => Err(Error::DeckShape("fewer than two infinity cards".into())),
        }
    }

    fn axis_images(&self, card: &Card) -> Vec<ImageId> {
        card.images().iter().copied().filter(|&img| img != self.infinity).collect()
    }

    pub fn row_images(&self) -> Vec<ImageId> {
        self.axis_images(&self.row_card)
    }

    pub fn col_images(&self) -> Vec<ImageId> {
        self.axis_images(&self.col_card)
    }
}

/// Cell `(r, c)` gets the card carrying the `r`-th row image and the `c`-th
/// column image (axis images ascending).
pub fn initial_grid(order: Order, affine: &[Card], axes: &AxisChoice) -> Result<Grid> {
    let n = order.n();
    let (rows, cols) = (axes.row_images(), axes.col_images());
    if rows.len() != n || cols.len() != n {
        return Err(stage_err("setup", format!("axis cards need {n} images besides infinity")));
    }
    let mut cells = Vec::with_capacity(n * n);
    for &r in &rows {
        for &c in &cols {
            let mut hits = affine.iter().filter(|card| card.contains(r) && card.contains(c));
            match (hits.next(), hits.next()) {
                (Some(card), None) => cells.push(card.clone()),
                _ => return Err(stage_err("setup", format!("no unique card carries images {r} and {c}"))),
            }
        }
    }
    Grid::from_cards(order, cells)
}

fn is_transversal(grid: &Grid, image: ImageId) -> bool {
    let n = grid.order().n();
    let positions = grid.image_positions(image);
    positions.len() == n
        && positions.iter().map(|p| p.row).all_unique()
        && positions.iter().map(|p| p.col).all_unique()
}

fn require_axes(grid: &Grid, stage: &'static str) -> Result<()> {
    let n = grid.order().n();
    if (0..n).all(|i| grid.row_image(i).is_some() && grid.col_image(i).is_some()) {
        Ok(())
    } else {
        Err(stage_err(stage, "every row and column needs a common image"))
    }
}

/// Permutes columns until one image occupies exactly the main diagonal.
///
/// Keeps an existing diagonal image; otherwise takes the lowest-id image on
/// the `(0, 0)` card that is neither its row nor its column image.
pub fn diagonalize(grid: &Grid) -> Result<(Grid, MoveLog)> {
    require_axes(grid, "diagonal")?;
    let mut log = MoveLog::default();
    if grid.diagonal_image().is_some() {
        return Ok((grid.clone(), log));
    }
    let n = grid.order().n();
    let (row0, col0) = (grid.row_image(0), grid.col_image(0));
    let diag = grid
        .card_at(0, 0)
        .images()
        .iter()
        .copied()
        .filter(|&img| Some(img) != row0 && Some(img) != col0)
        .find(|&img| is_transversal(grid, img))
        .ok_or_else(|| stage_err("diagonal", "no transversal image on the corner card"))?;

    let mut out = grid.clone();
    for r in 0..n {
        let c = (0..n).find(|&c| out.card_at(r, c).contains(diag)).expect("transversal meets every row");
        if c != r {
            let mv = Move::SwapCols { i: r, j: c };
            out.apply_in_place(mv)?;
            log.push(Stage::Diagonal, mv);
        }
    }
    debug_assert_eq!(out.diagonal_image(), Some(diag));
    Ok((out, log))
}

/// Images on the middle card other than its row, column and diagonal image.
pub fn counterdiagonal_candidates(grid: &Grid) -> Result<Vec<ImageId>> {
    let h = grid.order().middle()?;
    let diag = grid.diagonal_image().ok_or_else(|| stage_err("counterdiagonal", "no diagonal image"))?;
    let (row, col) = (grid.row_image(h), grid.col_image(h));
    Ok(grid
        .card_at(h, h)
        .images()
        .iter()
        .copied()
        .filter(|&img| img != diag && Some(img) != row && Some(img) != col)
        .collect())
}

/// Pairing induced by an image whose positions are closed under transpose,
/// or `None` if they are not.
pub fn symmetric_pairing(grid: &Grid, image: ImageId) -> Option<Pairing> {
    let positions = grid.image_positions(image);
    let symmetric = positions.iter().all(|p| grid.card(GridPos { row: p.col, col: p.row }).contains(image));
    symmetric.then(|| Pairing::new(positions.iter().filter(|p| p.row < p.col).map(|p| (p.row, p.col))))
}

/// Finds the unique candidate image whose cells are symmetric about the main
/// diagonal, and the pairing of indices it induces.
pub fn find_counterdiagonal(grid: &Grid) -> Result<(ImageId, Pairing)> {
    let n = grid.order().n();
    let candidates = counterdiagonal_candidates(grid)?;
    let hits: Vec<(ImageId, Pairing)> = candidates
        .into_iter()
        .filter_map(|img| symmetric_pairing(grid, img).map(|p| (img, p)))
        .filter(|(_, p)| p.pairs.len() == (n - 1) / 2)
        .collect();
    match &hits[..] {
        [one] => Ok(one.clone()),
        _ => Err(stage_err(
            "counterdiagonal",
            format!("expected one transpose-symmetric candidate, found {}", hits.len()),
        )),
    }
}

/// Paired swaps that move each pair of `pairing` onto a mirror pair
/// `{k, n-1-k}`, outermost level first. The diagonal is untouched.
pub fn nest_squares(grid: &Grid, pairing: &Pairing) -> Result<(Grid, MoveLog)> {
    let order = grid.order();
    let n = order.n();
    let h = order.middle()?;
    let mut partner: Vec<usize> = (0..n).collect();
    for &(a, b) in &pairing.pairs {
        partner[a] = b;
        partner[b] = a;
    }
    let covers = (0..n).all(|i| (i == h) == (partner[i] == i)) && pairing.pairs.len() == (n - 1) / 2;
    if !covers {
        return Err(stage_err("counterdiagonal", format!("{pairing} is not a matching of the non-middle indices")));
    }
    let mut out = grid.clone();
    let mut log = MoveLog::default();
    for k in 0..h {
        let target = n - 1 - k;
        let j = partner[k];
        if j == target {
            continue;
        }
        let mv = Move::PairedSwap { i: j, j: target };
        out.apply_in_place(mv)?;
        log.push(Stage::Counterdiagonal, mv);
        let t = partner[target];
        partner[target] = k;
        partner[k] = target;
        partner[j] = t;
        partner[t] = j;
    }
    Ok((out, log))
}

/// One element of the residual group: new level `k` takes old level
/// `levels[k]`, reversed when `flips[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrangement {
    pub levels: Vec<usize>,
    pub flips: Vec<bool>,
}

impl Arrangement {
    /// `source[i]` is the old index that ends up at index `i`.
    pub fn source(&self, n: usize) -> Vec<usize> {
        let mut src: Vec<usize> = (0..n).collect();
        for (k, (&l, &flip)) in self.levels.iter().zip(&self.flips).enumerate() {
            let (near, far) = if flip { (n - 1 - l, l) } else { (l, n - 1 - l) };
            src[k] = near;
            src[n - 1 - k] = far;
        }
        src
    }

    pub fn is_identity(&self) -> bool {
        self.levels.iter().enumerate().all(|(k, &l)| k == l) && !self.flips.iter().any(|&f| f)
    }

    /// True when the innermost level stays in place, unflipped.
    pub fn fixes_innermost(&self) -> bool {
        let h = self.levels.len();
        h == 0 || (self.levels[h - 1] == h - 1 && !self.flips[h - 1])
    }
}

/// Every level permutation (lexicographic) times every flip mask.
pub fn residual_arrangements(order: Order) -> Result<Vec<Arrangement>> {
    let h = order.middle()?;
    let mut out = Vec::new();
    for levels in (0..h).permutations(h) {
        for mask in 0u32..(1 << h) {
            let flips = (0..h).map(|k| mask & (1 << k) != 0).collect();
            out.push(Arrangement { levels: levels.clone(), flips });
        }
    }
    Ok(out)
}

/// Balanced swaps realizing `arrangement`, fixing levels outermost first.
pub fn realize_arrangement(n: usize, arrangement: &Arrangement) -> MoveLog {
    let src = arrangement.source(n);
    let h = (n - 1) / 2;
    let mut at: Vec<usize> = (0..n).collect();
    let mut log = MoveLog::default();
    for k in 0..h {
        let p = at.iter().position(|&x| x == src[k]).expect("permutation");
        let level = p.min(n - 1 - p);
        if level != k {
            log.push(Stage::Finish, Move::BalancedSwap { i: k, j: level });
            at.swap(k, level);
            at.swap(n - 1 - k, n - 1 - level);
        }
        if at[k] != src[k] {
            log.push(Stage::Finish, Move::BalancedSwap { i: k, j: n - 1 - k });
            at.swap(k, n - 1 - k);
        }
    }
    debug_assert_eq!(at, src);
    log
}

fn require_both_diagonals(grid: &Grid) -> Result<()> {
    grid.order().middle()?;
    if grid.diagonal_image().is_none() || grid.counterdiagonal_image().is_none() {
        return Err(stage_err("finish", "diagonal and counterdiagonal images must both be set"));
    }
    Ok(())
}

/// Searches the residual group level by level, innermost first, for an
/// arrangement satisfying the placement rule. A partial arrangement is kept
/// only while every pair of cells inside the levels placed so far sends its
/// shared image to the third cell, when that cell is placed too. The branch
/// that keeps the innermost level fixed and unflipped is tried first (it
/// holds exactly one solution), so recomputing from any state on the way
/// to that solution targets the same grid.
pub fn finish(grid: &Grid) -> Result<(Grid, MoveLog)> {
    require_both_diagonals(grid)?;
    let n = grid.order().n();
    let h = grid.order().middle()?;
    let mut search = ResidualSearch {
        grid,
        n,
        src: (0..n).collect(),
        arrangement: Arrangement { levels: vec![0; h], flips: vec![false; h] },
        used: vec![false; h],
    };
    if !search.place(h) {
        return Err(stage_err("finish", "no arrangement in the residual group satisfies the placement rule"));
    }
    let arrangement = search.arrangement;
    let src = arrangement.source(n);
    let candidate = grid.permuted(&src, &src);
    if !candidate.rule_holds() {
        return Err(stage_err("finish", "residual search produced a grid that fails the placement rule"));
    }
    let log = realize_arrangement(n, &arrangement);
    debug_assert_eq!(log.replay(grid).as_ref(), Ok(&candidate));
    Ok((candidate, log))
}

struct ResidualSearch<'a> {
    grid: &'a Grid,
    n: usize,
    /// `src[i]` for the placed band of indices; identity elsewhere.
    src: Vec<usize>,
    arrangement: Arrangement,
    used: Vec<bool>,
}

impl ResidualSearch<'_> {
    /// Fills levels `0..remaining`, the highest (innermost) first.
    fn place(&mut self, remaining: usize) -> bool {
        let Some(k) = remaining.checked_sub(1) else { return true };
        let h = self.used.len();
        let mut choices: Vec<(usize, bool)> =
            (0..h).filter(|&l| !self.used[l]).flat_map(|l| [(l, false), (l, true)]).collect();
        if k == h - 1 {
            choices.sort_by_key(|&(l, flip)| (l, flip) != (k, false));
        }
        let far = self.n - 1 - k;
        for (level, flip) in choices {
            let (near_src, far_src) = if flip { (self.n - 1 - level, level) } else { (level, self.n - 1 - level) };
            self.src[k] = near_src;
            self.src[far] = far_src;
            self.arrangement.levels[k] = level;
            self.arrangement.flips[k] = flip;
            self.used[level] = true;
            if self.band_consistent(k) && self.place(k) {
                return true;
            }
            self.used[level] = false;
        }
        self.src[k] = k;
        self.src[far] = far;
        false
    }

    /// Rule check restricted to triples inside the band `k..=n-1-k` that
    /// touch the newly placed rows or columns `k` and `n-1-k`.
    fn band_consistent(&self, k: usize) -> bool {
        let n = self.n;
        let far = n - 1 - k;
        let inside = |i: usize| (k..=far).contains(&i);
        let fresh = |r: usize, c: usize| r == k || r == far || c == k || c == far;
        let card = |r: usize, c: usize| self.grid.card_at(self.src[r], self.src[c]);
        let third = |a: usize, b: usize| (2 * b + n - a) % n;
        for r1 in k..=far {
            for c1 in k..=far {
                for r2 in k..=far {
                    let r3 = third(r1, r2);
                    if !inside(r3) {
                        continue;
                    }
                    for c2 in k..=far {
                        let c3 = third(c1, c2);
                        if (r1, c1) == (r2, c2) || !inside(c3) {
                            continue;
                        }
                        if !(fresh(r1, c1) || fresh(r2, c2) || fresh(r3, c3)) {
                            continue;
                        }
                        match card(r1, c1).unique_shared(card(r2, c2)) {
                            Some(img) if card(r3, c3).contains(img) => {}
                            _ => return false,
                        }
                    }
                }
            }
        }
        true
    }
}

/// Everything the solver saw on the way to a solution.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub infinity: ImageId,
    pub row_card: CardId,
    pub col_card: CardId,
    pub diagonal_image: ImageId,
    pub counterdiagonal_image: ImageId,
    /// The pairing found before nesting.
    pub pairing: Pairing,
    pub initial: Grid,
    pub stages: Vec<(Stage, Grid)>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub grid: Grid,
    /// Replays from `trace.initial` to `grid`.
    pub log: MoveLog,
    pub trace: SolveTrace,
}

/// Runs every stage from a deck (complete, or missing two cards) to a solved grid.
pub fn solve(deck: &Deck) -> Result<Solution> {
    let order = deck.order;
    order.middle()?;
    let infinity = choose_infinity(deck)?;
    let (affine, infinity_cards) = remove_image_set(deck, infinity)?;
    let axes = AxisChoice::default_for(infinity, &infinity_cards)?;
    solve_from_axes(order, &affine, &axes)
}

/// The stages after the infinity image and axis cards are fixed.
pub fn solve_from_axes(order: Order, affine: &[Card], axes: &AxisChoice) -> Result<Solution> {
    let initial = initial_grid(order, affine, axes)?;
    let (diagonal, mut log) = diagonalize(&initial)?;
    let diagonal_image = diagonal.diagonal_image().expect("diagonalized");
    let (counterdiagonal_image, pairing) = find_counterdiagonal(&diagonal)?;
    let (nested, nest_log) = nest_squares(&diagonal, &pairing)?;
    log.extend(nest_log);
    let (solved, finish_log) = finish(&nested)?;
    log.extend(finish_log);
    if !solved.rule_check().is_empty() {
        return Err(stage_err("finish", "result fails the placement rule"));
    }
    let trace = SolveTrace {
        infinity: axes.infinity,
        row_card: axes.row_card.id,
        col_card: axes.col_card.id,
        diagonal_image,
        counterdiagonal_image,
        pairing,
        initial,
        stages: vec![(Stage::Diagonal, diagonal), (Stage::Counterdiagonal, nested), (Stage::Finish, solved.clone())],
    };
    Ok(Solution { grid: solved, log, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::{generate_plane, relabel_shuffle};
    use proptest::prelude::*;

    fn order(n: u32) -> Order {
        Order::new(n).unwrap()
    }

    fn canonical_grid(n: u32) -> Grid {
        let deck = generate_plane(order(n));
        let nn = (n * n) as usize;
        Grid::from_cards(order(n), deck.cards[..nn].to_vec()).unwrap()
    }

    fn diagonalized(n: u32, seed: u64) -> Grid {
        let deck = relabel_shuffle(&generate_plane(order(n)), seed);
        let infinity = choose_infinity(&deck).unwrap();
        let (affine, inf) = remove_image_set(&deck, infinity).unwrap();
        let axes = AxisChoice::default_for(infinity, &inf).unwrap();
        diagonalize(&initial_grid(order(n), &affine, &axes).unwrap()).unwrap().0
    }

    #[test]
    fn choose_infinity_rules() {
        let deck = generate_plane(order(7));
        assert_eq!(choose_infinity(&deck).unwrap(), ImageId(0));
        let mut partial = deck.clone();
        partial.remove_cards(&[CardId(0), CardId(8)]).unwrap();
        assert_eq!(choose_infinity(&partial).unwrap(), ImageId(7));
        partial.remove_cards(&[CardId(9)]).unwrap();
        assert!(choose_infinity(&partial).is_err());
        let shuffled = relabel_shuffle(&deck, 5);
        assert_eq!(choose_infinity(&shuffled).unwrap(), ImageId(0));
    }

    #[test]
    fn initial_grid_n3() {
        let deck = generate_plane(order(3));
        let (affine, inf) = remove_image_set(&deck, ImageId(12)).unwrap();
        let axes = AxisChoice::default_for(ImageId(12), &inf).unwrap();
        assert_eq!(axes.row_card.id, CardId(9));
        let grid = initial_grid(order(3), &affine, &axes).unwrap();
        for i in 0..3 {
            assert!(grid.row_image(i).is_some());
            assert!(grid.col_image(i).is_some());
        }
        // rows follow slope-0 lines 0,1,2, columns slope-1 lines 3,4,5
        assert_eq!(grid.row_image(1), Some(ImageId(1)));
        assert_eq!(grid.col_image(2), Some(ImageId(5)));
    }

    #[test]
    fn axis_choice_validation() {
        let deck = generate_plane(order(3));
        let c9 = deck.card(CardId(9)).unwrap().clone();
        let c0 = deck.card(CardId(0)).unwrap().clone();
        assert!(AxisChoice::new(ImageId(12), c9.clone(), c9.clone()).is_err());
        assert!(AxisChoice::new(ImageId(12), c9, c0).is_err());
    }

    #[test]
    fn diagonalize_fixed_point_and_canonical() {
        let grid = canonical_grid(3);
        let (out, log) = diagonalize(&grid).unwrap();
        assert!(log.is_empty());
        assert_eq!(out, grid);
        assert_eq!(out.diagonal_image(), Some(ImageId(3)));
    }

    #[test]
    fn counterdiagonal_on_canonical_n3() {
        let grid = canonical_grid(3);
        assert_eq!(counterdiagonal_candidates(&grid).unwrap(), vec![ImageId(8)]);
        let (img, pairing) = find_counterdiagonal(&grid).unwrap();
        assert_eq!(img, ImageId(8));
        assert_eq!(pairing, Pairing::new([(0, 2)]));
    }

    #[test]
    fn counterdiagonal_pool_n7() {
        for seed in 0..20 {
            let grid = diagonalized(7, seed);
            assert_eq!(counterdiagonal_candidates(&grid).unwrap().len(), 5);
            assert!(find_counterdiagonal(&grid).is_ok());
        }
    }

    #[test]
    fn nest_every_pairing_n7() {
        // scramble a nested grid into each of the 15 pairing patterns, then renest
        let base = canonical_grid(7);
        let (img, p0) = find_counterdiagonal(&base).unwrap();
        assert!(p0.is_nested(7));
        let non_middle = [0usize, 1, 2, 4, 5, 6];
        let mut seen = std::collections::BTreeSet::new();
        for perm in non_middle.iter().copied().permutations(6) {
            let mut src: Vec<usize> = (0..7).collect();
            for (k, &v) in non_middle.iter().zip(&perm) {
                src[*k] = v;
            }
            let grid = base.permuted(&src, &src);
            let (_, pairing) = find_counterdiagonal(&grid).unwrap();
            if !seen.insert(pairing.clone()) {
                continue;
            }
            let (nested, log) = nest_squares(&grid, &pairing).unwrap();
            assert!(log.moves().all(|m| matches!(m, Move::PairedSwap { .. })));
            assert_eq!(nested.counterdiagonal_image(), Some(img));
            assert_eq!(nested.diagonal_image(), grid.diagonal_image());
        }
        assert_eq!(seen.len(), 15);
    }

    #[test]
    fn nest_already_nested_is_empty() {
        let grid = canonical_grid(7);
        let (_, pairing) = find_counterdiagonal(&grid).unwrap();
        let (out, log) = nest_squares(&grid, &pairing).unwrap();
        assert!(log.is_empty());
        assert_eq!(out, grid);
    }

    #[test]
    fn residual_sizes() {
        assert_eq!(residual_arrangements(order(7)).unwrap().len(), 48);
        assert_eq!(residual_arrangements(order(3)).unwrap().len(), 2);
        assert_eq!(residual_arrangements(order(5)).unwrap().len(), 8);
    }

    #[test]
    fn realized_moves_match_permutation() {
        let grid = canonical_grid(7);
        for arrangement in residual_arrangements(order(7)).unwrap() {
            let src = arrangement.source(7);
            let log = realize_arrangement(7, &arrangement);
            assert!(log.moves().all(|m| matches!(m, Move::BalancedSwap { .. })));
            assert_eq!(log.replay(&grid).unwrap(), grid.permuted(&src, &src));
            assert_eq!(log.is_empty(), arrangement.is_identity());
        }
    }

    #[test]
    fn finish_matches_exhaustive_search() {
        // the first solution in the old full enumeration order: innermost
        // level fixed first, then lexicographic
        for seed in 0..20 {
            for n in [5, 7, 11] {
                let deck = relabel_shuffle(&generate_plane(order(n)), seed);
                let grid = {
                    let infinity = choose_infinity(&deck).unwrap();
                    let (affine, inf) = remove_image_set(&deck, infinity).unwrap();
                    let axes = AxisChoice::default_for(infinity, &inf).unwrap();
                    let (diag, _) = diagonalize(&initial_grid(order(n), &affine, &axes).unwrap()).unwrap();
                    let (_, pairing) = find_counterdiagonal(&diag).unwrap();
                    nest_squares(&diag, &pairing).unwrap().0
                };
                let mut all = residual_arrangements(order(n)).unwrap();
                all.sort_by_key(|a| !a.fixes_innermost());
                let expected = all
                    .iter()
                    .map(|a| grid.permuted(&a.source(n as usize), &a.source(n as usize)))
                    .find(|g| g.rule_holds())
                    .unwrap();
                assert_eq!(finish(&grid).unwrap().0, expected, "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn finish_scales_to_order_31() {
        let sol = solve(&relabel_shuffle(&generate_plane(order(31)), 3)).unwrap();
        assert!(sol.grid.rule_holds());
    }

    #[test]
    fn finish_on_solved_grid_is_identity() {
        let grid = canonical_grid(5);
        let (out, log) = finish(&grid).unwrap();
        assert!(log.is_empty());
        assert_eq!(out, grid);
    }

    #[test]
    fn solve_small_orders() {
        for n in [3, 5, 7] {
            let deck = generate_plane(order(n));
            let sol = solve(&deck).unwrap();
            assert!(sol.grid.rule_check().is_empty());
            assert_eq!(sol.log.replay(&sol.trace.initial).unwrap(), sol.grid);
        }
        assert!(matches!(solve(&generate_plane(order(2))), Err(Error::EvenOrder(2))));
    }

    #[test]
    fn stage_predicates_hold_after_every_move() {
        let deck = relabel_shuffle(&generate_plane(order(7)), 11);
        let sol = solve(&deck).unwrap();
        let mut grid = sol.trace.initial.clone();
        let rows: Vec<_> = (0..7).map(|i| grid.row_image(i)).collect();
        let mut diag = None;
        let mut anti = None;
        for entry in &sol.log.entries {
            grid.apply_in_place(entry.mv).unwrap();
            let mut now: Vec<_> = (0..7).map(|i| grid.row_image(i)).collect();
            let mut before = rows.clone();
            now.sort();
            before.sort();
            assert_eq!(now, before);
            match entry.stage {
                Stage::Diagonal => {}
                Stage::Counterdiagonal => {
                    diag.get_or_insert(grid.diagonal_image().unwrap());
                    assert_eq!(grid.diagonal_image(), diag);
                }
                Stage::Finish => {
                    anti.get_or_insert(grid.counterdiagonal_image().unwrap());
                    assert_eq!(grid.counterdiagonal_image(), anti);
                    assert!(grid.diagonal_image().is_some());
                }
            }
        }
    }

    #[test]
    fn solve_with_two_missing() {
        let mut deck = relabel_shuffle(&generate_plane(order(7)), 3);
        deck.remove_cards(&[CardId(1), CardId(2)]).unwrap();
        let sol = solve(&deck).unwrap();
        assert!(sol.grid.rule_check().is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn diagonal_is_transversal_of_corner(seed in any::<u64>()) {
            let deck = relabel_shuffle(&generate_plane(order(5)), seed);
            let infinity = choose_infinity(&deck).unwrap();
            let (affine, inf) = remove_image_set(&deck, infinity).unwrap();
            let axes = AxisChoice::default_for(infinity, &inf).unwrap();
            let grid = initial_grid(order(5), &affine, &axes).unwrap();
            let (out, log) = diagonalize(&grid).unwrap();
            let d = out.diagonal_image().unwrap();
            prop_assert!(out.card_at(0, 0).contains(d));
            prop_assert_ne!(Some(d), out.row_image(0));
            prop_assert_ne!(Some(d), out.col_image(0));
            let only_swaps = log.moves().all(|m| matches!(m, Move::SwapCols { .. } | Move::SwapRows { .. }));
            prop_assert!(only_swaps);
        }

        #[test]
        fn paired_swaps_keep_counterdiagonal_choice(seed in any::<u64>(), swaps in prop::collection::vec((0usize..7, 1usize..7), 0..100)) {
            let grid = diagonalized(7, seed);
            let (img, _) = find_counterdiagonal(&grid).unwrap();
            let mut g = grid.clone();
            for (i, d) in swaps {
                let j = (i + d) % 7;
                if i == 3 || j == 3 {
                    continue;
                }
                g.apply_in_place(Move::PairedSwap { i, j }).unwrap();
            }
            prop_assert_eq!(find_counterdiagonal(&g).unwrap().0, img);
        }
    }
}
