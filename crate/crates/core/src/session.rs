//! A single-player game session: pick the infinity image, pick the axis
//! cards, then arrange the grid with row and column swaps.
//!
//! A session is fully determined by its [`GameConfig`] and the list of
//! accepted actions; [`replay`] rebuilds it from those.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridPos, Move};
use crate::plane::{generate_plane, relabel_shuffle, remove_image_set, Card, CardId, Deck, ImageId, Order};
use crate::solver::{
    choose_infinity, diagonalize, find_counterdiagonal, finish, initial_grid, nest_squares, AxisChoice, Pairing,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub order: u32,
    pub seed: u64,
    /// Cards withheld from the deck: 0 or 2.
    #[serde(default)]
    pub missing: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GamePhase {
    ChooseInfinity,
    ChooseAxes,
    Arrange,
    Solved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LockTarget {
    Diagonal,
    Counterdiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    ChooseInfinity { image: ImageId },
    ChooseAxes { row_card: CardId, col_card: CardId },
    Move {
        #[serde(rename = "move")]
        mv: Move,
    },
    SetGuided { guided: bool },
    Lock { target: LockTarget },
    Restart,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Locks {
    pub diagonal: Option<ImageId>,
    pub counterdiagonal: Option<ImageId>,
}

/// Stage predicates the grid has satisfied at some point since entering
/// the arrange phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reached {
    pub diagonal: bool,
    pub counterdiagonal: bool,
}

#[derive(Debug, Clone)]
pub struct GameState {
    pub id: String,
    pub config: GameConfig,
    pub deck: Deck,
    pub phase: GamePhase,
    pub infinity: Option<ImageId>,
    pub axes: Option<AxisChoice>,
    /// Grid as first laid out on entering the arrange phase.
    pub entry_grid: Option<Grid>,
    pub grid: Option<Grid>,
    /// Moves applied since `entry_grid`.
    pub history: Vec<Move>,
    pub guided: bool,
    pub locks: Locks,
    pub reached: Reached,
    /// Every accepted action, in order.
    pub actions: Vec<Action>,
}

fn game_err(message: impl Into<String>) -> Error {
    Error::Game(message.into())
}

impl GameState {
    pub fn order(&self) -> Order {
        self.deck.order
    }

    fn grid_ref(&self) -> Result<&Grid> {
        self.grid.as_ref().ok_or_else(|| game_err("no grid before the arrange phase"))
    }

    pub fn infinity_cards(&self) -> Vec<&Card> {
        match self.infinity {
            Some(img) => self.deck.cards_with(img).collect(),
            None => Vec::new(),
        }
    }
}

/// Seeded deck: the canonical plane relabeled and shuffled, minus `missing`
/// seed-chosen cards.
pub fn new_game(id: impl Into<String>, config: GameConfig) -> Result<GameState> {
    let order = Order::new(config.order)?;
    order.middle()?;
    if order.get() < 3 {
        return Err(game_err("games need an odd prime order of at least 3"));
    }
    if config.missing != 0 && config.missing != 2 {
        return Err(game_err(format!("missing must be 0 or 2, got {}", config.missing)));
    }
    let mut deck = relabel_shuffle(&generate_plane(order), config.seed);
    if config.missing == 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_cafe);
        let mut picks: Vec<CardId> = sample(&mut rng, deck.cards.len(), 2).iter().map(|i| deck.cards[i].id).collect();
        picks.sort();
        deck.remove_cards(&picks)?;
    }
    Ok(GameState {
        id: id.into(),
        config,
        deck,
        phase: GamePhase::ChooseInfinity,
        infinity: None,
        axes: None,
        entry_grid: None,
        grid: None,
        history: Vec::new(),
        guided: true,
        locks: Locks::default(),
        reached: Reached::default(),
        actions: Vec::new(),
    })
}

fn check_move_allowed(state: &GameState, mv: Move) -> Result<()> {
    if !state.guided {
        return Ok(());
    }
    if state.locks.counterdiagonal.is_some() && !matches!(mv, Move::BalancedSwap { .. }) {
        return Err(game_err("guided mode: counterdiagonal is locked, only balanced swaps are allowed"));
    }
    if state.locks.diagonal.is_some() && !mv.is_paired() {
        return Err(game_err("guided mode: diagonal is locked, only paired or balanced swaps are allowed"));
    }
    Ok(())
}

fn note_progress(state: &mut GameState) {
    let Some(grid) = &state.grid else { return };
    let diagonal = grid.diagonal_image().is_some();
    state.reached.diagonal |= diagonal;
    state.reached.counterdiagonal |= diagonal && grid.counterdiagonal_image().is_some();
    if grid.rule_holds() {
        state.phase = GamePhase::Solved;
    }
}

/// Applies one player action, returning the next state.
pub fn apply_player_action(state: &GameState, action: Action) -> Result<GameState> {
    let mut next = state.clone();
    match (state.phase, action) {
        (_, Action::Restart) => {
            next.phase = GamePhase::ChooseInfinity;
            next.infinity = None;
            next.axes = None;
            next.entry_grid = None;
            next.grid = None;
            next.history.clear();
            next.locks = Locks::default();
            next.reached = Reached::default();
        }
        (_, Action::SetGuided { guided }) => {
            next.guided = guided;
            if !guided {
                next.locks = Locks::default();
            }
        }
        (GamePhase::ChooseInfinity, Action::ChooseInfinity { image }) => {
            let (_, infinity_cards) = remove_image_set(&state.deck, image)?;
            if infinity_cards.len() < 2 {
                return Err(game_err(format!("image {image} is on fewer than two cards")));
            }
            next.infinity = Some(image);
            next.phase = GamePhase::ChooseAxes;
        }
        (GamePhase::ChooseAxes, Action::ChooseAxes { row_card, col_card }) => {
            let infinity = state.infinity.expect("infinity chosen");
            let lookup = |id: CardId| state.deck.card(id).cloned().ok_or(Error::UnknownCard(id));
            let (row, col) = (lookup(row_card)?, lookup(col_card)?);
            for card in [&row, &col] {
                if !card.contains(infinity) {
                    return Err(game_err(format!("card {} is not an infinity card", card.id)));
                }
            }
            let axes = AxisChoice::new(infinity, row, col)?;
            let (affine, _) = remove_image_set(&state.deck, infinity)?;
            let grid = initial_grid(state.order(), &affine, &axes)?;
            next.axes = Some(axes);
            next.entry_grid = Some(grid.clone());
            next.grid = Some(grid);
            next.phase = GamePhase::Arrange;
            note_progress(&mut next);
        }
        (GamePhase::Arrange, Action::Move { mv }) => {
            check_move_allowed(state, mv)?;
            let grid = state.grid_ref()?.apply_move(mv)?;
            next.grid = Some(grid);
            next.history.push(mv);
            note_progress(&mut next);
        }
        (GamePhase::Arrange, Action::Lock { target }) => {
            if !state.guided {
                return Err(game_err("locks are only available in guided mode"));
            }
            let grid = state.grid_ref()?;
            match target {
                LockTarget::Diagonal => {
                    let img = grid.diagonal_image().ok_or_else(|| game_err("no image fills the diagonal"))?;
                    next.locks.diagonal = Some(img);
                }
                LockTarget::Counterdiagonal => {
                    if state.locks.diagonal.is_none() {
                        return Err(game_err("lock the diagonal first"));
                    }
                    let img =
                        grid.counterdiagonal_image().ok_or_else(|| game_err("no image fills the counterdiagonal"))?;
                    next.locks.counterdiagonal = Some(img);
                }
            }
        }
        (phase, action) => {
            return Err(game_err(format!("action {action:?} is not allowed in phase {phase:?}")));
        }
    }
    next.actions.push(action);
    Ok(next)
}

/// Rebuilds a session from its configuration and action log.
pub fn replay(id: impl Into<String>, config: GameConfig, actions: &[Action]) -> Result<GameState> {
    let mut state = new_game(id, config)?;
    for &action in actions {
        state = apply_player_action(&state, action)?;
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hint {
    pub stage: String,
    pub narration: String,
    /// Always legal in the current phase and mode.
    pub suggested: Option<Action>,
    pub highlight: Option<ImageId>,
}

/// Suggests the next step, recomputed from the current state.
pub fn hint(state: &GameState) -> Result<Hint> {
    match state.phase {
        GamePhase::ChooseInfinity => {
            let image = choose_infinity(&state.deck)?;
            let narration = if state.config.missing == 2 {
                format!("Image {image} appears one short of the others twice over; both missing cards carry it. Remove its cards.")
            } else {
                format!("Any image can serve as infinity. Try image {image} and set its cards aside.")
            };
            Ok(Hint {
                stage: "infinity".into(),
                narration,
                suggested: Some(Action::ChooseInfinity { image }),
                highlight: Some(image),
            })
        }
        GamePhase::ChooseAxes => {
            let infinity = state.infinity.expect("infinity chosen");
            let cards: Vec<Card> = state.infinity_cards().into_iter().cloned().collect();
            let axes = AxisChoice::default_for(infinity, &cards)?;
            Ok(Hint {
                stage: "axes".into(),
                narration: format!(
                    "Each infinity card holds one family of parallel images. Let card {} index the rows and card {} the columns.",
                    axes.row_card.id, axes.col_card.id
                ),
                suggested: Some(Action::ChooseAxes { row_card: axes.row_card.id, col_card: axes.col_card.id }),
                highlight: None,
            })
        }
        GamePhase::Solved => Ok(Hint {
            stage: "solved".into(),
            narration: "Solved: every pair of cards shares its image with the card completing their line.".into(),
            suggested: None,
            highlight: None,
        }),
        GamePhase::Arrange => arrange_hint(state),
    }
}

fn arrange_hint(state: &GameState) -> Result<Hint> {
    let grid = state.grid_ref()?;
    let move_hint = |stage: &str, narration: String, mv: Option<Move>, highlight: Option<ImageId>| Hint {
        stage: stage.into(),
        narration,
        suggested: mv.map(|mv| Action::Move { mv }),
        highlight,
    };

    let Some(diag) = grid.diagonal_image() else {
        let (_, log) = diagonalize(grid)?;
        let mut narration = String::new();
        if state.reached.diagonal {
            narration.push_str("The diagonal was complete earlier and has been broken. ");
        }
        narration.push_str("Swap columns until one image from the top-left card runs down the main diagonal.");
        let first = log.moves().next();
        return Ok(move_hint("diagonal", narration, first, None));
    };

    let Some(anti) = grid.counterdiagonal_image() else {
        let (image, pairing) = find_counterdiagonal(grid).map_err(|e| {
            game_err(format!("the diagonal holds image {diag} but no counterdiagonal candidate is symmetric: {e}"))
        })?;
        let (_, log) = nest_squares(grid, &pairing)?;
        let mut narration = String::new();
        if state.reached.counterdiagonal {
            narration.push_str("The counterdiagonal was complete earlier and has been broken. ");
        }
        narration.push_str(&format!(
            "Image {image} on the middle card is the counterdiagonal: its cells mirror across the diagonal, pairing indices {pairing}. Swap rows and matching columns to nest the squares."
        ));
        let first = log.moves().next();
        return Ok(move_hint("counterdiagonal", narration, first, Some(image)));
    };

    let (_, log) = finish(grid)?;
    let narration = format!(
        "Diagonal {diag} and counterdiagonal {anti} are set. Keep the middle square fixed and propagate the counterdiagonal family outward with balanced swaps."
    );
    let first = log.moves().next();
    Ok(move_hint("finish", narration, first, Some(anti)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProgressReport {
    pub phase: GamePhase,
    pub row_images: Vec<Option<ImageId>>,
    pub col_images: Vec<Option<ImageId>>,
    pub diagonal: Option<ImageId>,
    pub counterdiagonal: Option<ImageId>,
    pub violations: usize,
    /// The interlaced-squares pattern, once the diagonal is set.
    pub pairing: Option<Pairing>,
    pub pairing_image: Option<ImageId>,
}

pub fn check(state: &GameState) -> Result<ProgressReport> {
    let grid = state.grid_ref()?;
    let n = state.order().n();
    let detected = grid.diagonal_image().and_then(|_| find_counterdiagonal(grid).ok());
    Ok(ProgressReport {
        phase: state.phase,
        row_images: (0..n).map(|r| grid.row_image(r)).collect(),
        col_images: (0..n).map(|c| grid.col_image(c)).collect(),
        diagonal: grid.diagonal_image(),
        counterdiagonal: grid.counterdiagonal_image(),
        violations: grid.rule_check().len(),
        pairing_image: detected.as_ref().map(|(img, _)| *img),
        pairing: detected.map(|(_, p)| p),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CardView {
    pub id: CardId,
    pub images: Vec<ImageId>,
}

impl From<&Card> for CardView {
    fn from(card: &Card) -> Self {
        CardView { id: card.id, images: card.images().to_vec() }
    }
}

/// Wire view of a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GameView {
    pub id: String,
    pub order: u32,
    pub seed: u64,
    pub missing: u8,
    pub phase: GamePhase,
    pub guided: bool,
    pub locks: Locks,
    pub infinity: Option<ImageId>,
    pub row_card: Option<CardId>,
    pub col_card: Option<CardId>,
    /// Loose cards: the whole deck before the grid exists, none after.
    pub cards: Vec<CardView>,
    pub infinity_cards: Vec<CardView>,
    pub image_names: BTreeMap<ImageId, String>,
    pub grid: Option<Vec<Vec<CardView>>>,
    pub image_positions: BTreeMap<ImageId, Vec<GridPos>>,
    pub history: Vec<Move>,
    pub action_count: usize,
}

impl GameView {
    pub fn of(state: &GameState) -> Self {
        let grid = state.grid.as_ref();
        let mut image_positions: BTreeMap<ImageId, Vec<GridPos>> = BTreeMap::new();
        if let Some(grid) = grid {
            for (r, row) in grid.rows().iter().enumerate() {
                for (c, card) in row.iter().enumerate() {
                    for &img in card.images() {
                        image_positions.entry(img).or_default().push(GridPos { row: r, col: c });
                    }
                }
            }
        }
        let mut cards: Vec<CardView> =
            if grid.is_none() { state.deck.cards.iter().map(CardView::from).collect() } else { Vec::new() };
        cards.sort_by_key(|c| c.id);
        GameView {
            id: state.id.clone(),
            order: state.config.order,
            seed: state.config.seed,
            missing: state.config.missing,
            phase: state.phase,
            guided: state.guided,
            locks: state.locks,
            infinity: state.infinity,
            row_card: state.axes.as_ref().map(|a| a.row_card.id),
            col_card: state.axes.as_ref().map(|a| a.col_card.id),
            cards,
            infinity_cards: state.infinity_cards().into_iter().map(CardView::from).collect(),
            image_names: state.deck.image_names.clone(),
            grid: grid.map(|g| g.rows().into_iter().map(|row| row.into_iter().map(CardView::from).collect()).collect()),
            image_positions,
            history: state.history.clone(),
            action_count: state.actions.len(),
        }
    }
}
