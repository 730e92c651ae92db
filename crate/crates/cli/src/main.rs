//! `spotit`: command-line front end for decks, grids, the solver and the
//! session service. Decks and grids stream over stdin/stdout in the text
//! formats of `spotit_core::deck_io`.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use spotit_core::deck_io::{parse_deck, parse_grid, serialize_deck, serialize_grid};
use spotit_core::plane::canonical_image_names;
use spotit_core::recovery::reconstruct_missing_cards;
use spotit_core::solver::{counts_report, solve, Stage, MAX_ORBIT_ORDER, MAX_RESIDUAL_ORDER};
use spotit_core::{generate_plane, relabel_shuffle, remove_image_set, verify_plane, CardId, Grid, Order, Slope};
use spotit_service::config::{parse_origins, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "spotit", version, about = "Finite projective plane decks and the grid solitaire")]
struct Cli {
    #[command(flatten)]
    io: Io,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Io {
    /// Read input from this file instead of stdin.
    #[arg(long, short, global = true)]
    input: Option<PathBuf>,
    /// Write output to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the canonical deck of a prime order.
    Gen {
        #[arg(long)]
        order: u32,
        /// Include descriptive image names.
        #[arg(long)]
        names: bool,
    },
    /// Relabel images and shuffle cards with a seed.
    Shuffle {
        #[arg(long)]
        seed: u64,
    },
    /// Check the plane axioms; exits nonzero unless the deck is clean.
    Verify,
    /// Rebuild the two cards missing from a deck.
    Recover,
    /// Remove cards from a deck by id.
    RemoveCards {
        /// Comma-separated card ids.
        #[arg(long, value_delimiter = ',', required = true)]
        ids: Vec<u32>,
    },
    /// Arrange a deck's affine cards into a solved grid.
    Solve {
        /// Append stage-by-stage grids and the move log as comments.
        #[arg(long)]
        trace: bool,
    },
    /// Check a grid against the placement rule; exits nonzero on violations.
    VerifyGrid {
        /// Deck the grid's card ids refer to.
        #[arg(long)]
        deck: PathBuf,
    },
    /// Compute the setup, orbit, pairing and residual counts.
    Counts {
        #[arg(long)]
        order: u32,
    },
    /// Solve the canonical deck and list every image's line.
    Demo {
        #[arg(long, default_value_t = 3)]
        order: u32,
    },
    /// Run the HTTP session service.
    Serve {
        /// Listen address (default: SPOTIT_ADDR or 127.0.0.1:8080).
        #[arg(long)]
        addr: Option<std::net::SocketAddr>,
        /// Directory for persisted sessions (default: SPOTIT_STORE, else memory only).
        #[arg(long)]
        store: Option<PathBuf>,
        /// Comma-separated browser origins allowed by CORS (default: SPOTIT_CORS).
        #[arg(long)]
        cors: Option<String>,
    },
}

/// Text to emit and whether the command succeeded.
struct Output {
    text: String,
    ok: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, ok: true }
    }
}

fn read_input(io: &Io) -> Result<String> {
    match &io.input {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())),
        None => {
            let mut text = String::new();
            std::io::stdin().read_to_string(&mut text).context("reading stdin")?;
            Ok(text)
        }
    }
}

fn read_deck(io: &Io) -> Result<spotit_core::Deck> {
    Ok(parse_deck(&read_input(io)?)?)
}

fn order(n: u32) -> Result<Order> {
    Ok(Order::new(n)?)
}

fn run(cli: &Cli) -> Result<Output> {
    let io = &cli.io;
    match &cli.command {
        Command::Gen { order: n, names } => {
            let order = order(*n)?;
            let mut deck = generate_plane(order);
            if *names {
                deck.image_names = canonical_image_names(order);
            }
            Ok(Output::ok(serialize_deck(&deck)))
        }
        Command::Shuffle { seed } => Ok(Output::ok(serialize_deck(&relabel_shuffle(&read_deck(io)?, *seed)))),
        Command::Verify => verify(&read_deck(io)?),
        Command::Recover => recover(&read_deck(io)?),
        Command::RemoveCards { ids } => {
            let mut deck = read_deck(io)?;
            let ids: Vec<CardId> = ids.iter().copied().map(CardId).collect();
            deck.remove_cards(&ids)?;
            Ok(Output::ok(serialize_deck(&deck)))
        }
        Command::Solve { trace } => solve_cmd(&read_deck(io)?, *trace),
        Command::VerifyGrid { deck } => {
            let deck_text =
                std::fs::read_to_string(deck).with_context(|| format!("reading {}", deck.display()))?;
            let deck = parse_deck(&deck_text)?;
            verify_grid(&parse_grid(&read_input(io)?, &deck)?)
        }
        Command::Counts { order: n } => counts(order(*n)?),
        Command::Demo { order: n } => demo(order(*n)?),
        Command::Serve { .. } => unreachable!("serve is dispatched before run"),
    }
}

fn verify(deck: &spotit_core::Deck) -> Result<Output> {
    let report = verify_plane(deck);
    let mut text = String::new();
    writeln!(text, "order {}: {} cards, {} images", report.order, report.card_count, report.image_count)?;
    if report.is_clean() {
        writeln!(text, "clean: all plane axioms hold")?;
    } else {
        writeln!(text, "{} violation(s):", report.violations.len())?;
        for v in &report.violations {
            writeln!(text, "  {v}")?;
        }
    }
    Ok(Output { text, ok: report.is_clean() })
}

fn recover(deck: &spotit_core::Deck) -> Result<Output> {
    let (a, b) = reconstruct_missing_cards(deck)?;
    let recovered = [a.id, b.id];
    let mut completed = deck.clone();
    completed.cards.extend([a, b]);
    let mut text = String::new();
    for line in serialize_deck(&completed).lines() {
        let flagged = recovered.iter().any(|id| line.starts_with(&format!("card {id}:")));
        if flagged {
            writeln!(text, "# recovered")?;
        }
        writeln!(text, "{line}")?;
    }
    Ok(Output::ok(text))
}

fn grid_comment(out: &mut String, grid: &Grid) -> std::fmt::Result {
    for line in serialize_grid(grid).lines().skip(1) {
        writeln!(out, "#   {line}")?;
    }
    Ok(())
}

fn solve_cmd(deck: &spotit_core::Deck, trace: bool) -> Result<Output> {
    let solution = solve(deck)?;
    let mut text = serialize_grid(&solution.grid);
    if trace {
        let t = &solution.trace;
        writeln!(text, "# infinity image {}; row card {}; column card {}", t.infinity, t.row_card, t.col_card)?;
        writeln!(text, "# initial grid")?;
        grid_comment(&mut text, &t.initial)?;
        for (stage, grid) in &t.stages {
            let detail = match stage {
                Stage::Diagonal => format!("diagonal image {}", t.diagonal_image),
                Stage::Counterdiagonal => {
                    format!("counterdiagonal image {}, pairing {}", t.counterdiagonal_image, t.pairing)
                }
                Stage::Finish => "all lines in place".to_string(),
            };
            writeln!(text, "# stage {stage}: {detail}")?;
            for entry in solution.log.entries.iter().filter(|e| e.stage == *stage) {
                writeln!(text, "#   move: {}", entry.mv)?;
            }
            grid_comment(&mut text, grid)?;
        }
        writeln!(text, "# {} moves", solution.log.len())?;
    }
    Ok(Output::ok(text))
}

fn verify_grid(grid: &Grid) -> Result<Output> {
    let violations = grid.rule_check();
    let mut text = String::new();
    if violations.is_empty() {
        writeln!(text, "solved: every pair of cards and its third card share an image")?;
    } else {
        writeln!(text, "{} violation(s):", violations.len())?;
        for v in &violations {
            writeln!(
                text,
                "  cards at {} and {} share image {}; card {} at {} lacks it",
                v.first,
                v.second,
                v.shared.iter().map(ToString::to_string).collect::<Vec<_>>().join(","),
                v.third_card,
                v.third
            )?;
        }
    }
    Ok(Output { text, ok: violations.is_empty() })
}

fn counts(order: Order) -> Result<Output> {
    let report = counts_report(order)?;
    let n = order.get() as u128;
    let fact: u128 = (1..=n).product();
    let mut text = String::new();
    writeln!(text, "order                {}", report.order)?;
    writeln!(
        text,
        "setup count          {}·{}·{}·{n}!·{n}! = {}",
        n * n + n + 1,
        n + 1,
        n,
        report.setup_count
    )?;
    debug_assert_eq!(report.setup_count, (n * n + n + 1) * (n + 1) * n * fact * fact);
    match &report.orbit {
        Some(orbit) => {
            writeln!(text, "paired orbit         {}", orbit.orbit_size)?;
            writeln!(text, "orbit solutions      {}", orbit.solutions)?;
            let sizes: std::collections::BTreeSet<usize> = orbit.by_pairing.values().copied().collect();
            let sizes: Vec<String> = sizes.iter().map(usize::to_string).collect();
            writeln!(text, "orbit by pairing     {} classes of {}", orbit.by_pairing.len(), sizes.join("/"))?;
        }
        None => writeln!(text, "paired orbit         not enumerated above order {MAX_ORBIT_ORDER}")?,
    }
    writeln!(text, "pairings             {}", report.pairings)?;
    writeln!(text, "residual size        {}", report.residual_size)?;
    match report.residual_solutions {
        Some(found) => writeln!(text, "residual solutions   {found}")?,
        None => writeln!(text, "residual solutions   not enumerated above order {MAX_RESIDUAL_ORDER}")?,
    }
    Ok(Output::ok(text))
}

fn demo(order: Order) -> Result<Output> {
    let mut deck = generate_plane(order);
    deck.image_names = canonical_image_names(order);
    let solution = solve(&deck)?;
    let grid = &solution.grid;
    let infinity = solution.trace.infinity;
    let mut text = serialize_grid(grid);
    writeln!(text, "# {} images, each on one line:", deck.images().len())?;
    for img in deck.images() {
        let name = deck.image_names.get(&img).map(String::as_str).unwrap_or("");
        if img == infinity {
            let (_, set_aside) = remove_image_set(&deck, img)?;
            let ids: Vec<String> = set_aside.iter().map(|c| c.id.to_string()).collect();
            writeln!(text, "# image {img:>3} ({name}): the line at infinity, cards {} set aside", ids.join(","))?;
            continue;
        }
        let cells: Vec<String> = grid.image_positions(img).iter().map(ToString::to_string).collect();
        let slope = match grid.slope_of_image(img) {
            Some(Slope::Finite(s)) => format!("slope {s}"),
            Some(Slope::Vertical) => "vertical".to_string(),
            None => "NOT A LINE".to_string(),
        };
        writeln!(text, "# image {img:>3} ({name}): {slope}, cells {}", cells.join(" "))?;
    }
    Ok(Output { ok: grid.rule_check().is_empty(), text })
}

fn serve(addr: Option<std::net::SocketAddr>, store: Option<PathBuf>, cors: Option<String>) -> Result<()> {
    let mut config = ServiceConfig::from_env().map_err(anyhow::Error::msg)?;
    if let Some(addr) = addr {
        config.listen = addr;
    }
    if store.is_some() {
        config.store = store;
    }
    if let Some(cors) = cors {
        config.cors_origins = parse_origins(&cors);
    }
    let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
    runtime.block_on(spotit_service::serve(config)).map_err(anyhow::Error::msg)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Serve { addr, store, cors } => serve(*addr, store.clone(), cors.clone()).map(|_| None),
        _ => run(&cli).map(Some),
    };
    let output = match result {
        Ok(Some(output)) => output,
        Ok(None) => return ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::FAILURE;
        }
    };
    let written = match &cli.io.output {
        Some(path) => std::fs::write(path, &output.text).with_context(|| format!("writing {}", path.display())),
        None => std::io::stdout().write_all(output.text.as_bytes()).context("writing stdout"),
    };
    if let Err(err) = written {
        eprintln!("error: {err:#}");
        return ExitCode::FAILURE;
    }
    if output.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
