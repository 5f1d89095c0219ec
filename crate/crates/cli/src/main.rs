use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hues_core::colorlab::{render_stimulus, Board};
use hues_core::exec::Execution;
use hues_core::game::{new_game, GameConfig, Phase, PlayerSpec};
use hues_core::harness::{
    export_diagram, ingest_human_responses, run_experiment, EvaluationReport, ExperimentConfig, HarnessError, WordList,
    DEFAULT_CONCURRENCY,
};
use hues_core::providers::{provider_from_spec, MockProvider, SimilarityProvider, DEFAULT_TOP_K};
use hues_core::stats::DEFAULT_ALPHA;
use hues_server::{AppState, SessionStore};

#[derive(Parser)]
#[command(name = "hues", version, about = "Human/model color alignment harness built on the Hues & Cues board")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Board measurement files.
    #[command(subcommand)]
    Board(BoardCmd),
    /// Evaluate a provider against human responses, word by word.
    Eval(EvalArgs),
    /// Turn a report into plot-ready board/diagram point sets.
    ExportDiagram {
        #[arg(long)]
        report: PathBuf,
        /// Output prefix; defaults to the report path without extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API used by the player UI.
    Serve {
        #[arg(long)]
        board: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        sessions: PathBuf,
        /// Provider for play mode (URL or mock:<anchors.json>).
        #[arg(long)]
        provider: Option<String>,
        /// Default word list for new collection sessions.
        #[arg(long)]
        words: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Play one leader turn in the terminal against model players.
    Play {
        #[arg(long)]
        board: PathBuf,
        #[arg(long)]
        provider: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        models: usize,
        /// Write the JSON transcript here when the game ends.
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BoardCmd {
    /// Check a `row,col,x,y,Y` CSV for a complete, valid 16×30 board.
    Validate { csv: PathBuf },
    /// Write the synthetic reference board (not real measurements).
    Synth {
        #[arg(long)]
        out: PathBuf,
    },
    /// Render every cell as a flat PNG stimulus named by its label.
    Stimuli {
        #[arg(long)]
        board: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 224)]
        size: u32,
    },
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    board: PathBuf,
    /// One word per line; defaults to the built-in 34-word list.
    #[arg(long)]
    words: Option<PathBuf>,
    /// `http(s)://host:port` or `mock:<anchors.json>`.
    #[arg(long)]
    provider: String,
    /// JSON-lines human responses.
    #[arg(long)]
    humans: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    top_k: usize,
    /// Report path; JSON goes here and CSV next to it.
    #[arg(long)]
    out: PathBuf,
    /// Prompt template with one `{}` placeholder, sent to remote providers.
    #[arg(long)]
    template: Option<String>,
    /// Weight model points by similarity inside the test, not only in the mean.
    #[arg(long)]
    weighted_test: bool,
    #[arg(long, default_value_t = DEFAULT_CONCURRENCY)]
    concurrency: usize,
    /// Evaluate words one at a time.
    #[arg(long)]
    sequential: bool,
    /// Add a permutation p-value with this many shuffles per word.
    #[arg(long)]
    permutations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    permutation_seed: u64,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Board(cmd) => board_cmd(cmd),
        Command::Eval(args) => eval(args),
        Command::ExportDiagram { report, out } => export(&report, out),
        Command::Serve { board, port, sessions, provider, words, host } => {
            serve(&board, &host, port, &sessions, provider.as_deref(), words.as_deref())
        }
        Command::Play { board, provider, seed, models, transcript } => {
            play(&board, &provider, seed, models, transcript.as_deref())
        }
    }
}

fn load_board(path: &Path) -> Result<Board> {
    Board::load_path(path).with_context(|| format!("loading board {}", path.display()))
}

fn load_words(path: Option<&Path>) -> Result<WordList> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(WordList::parse(&text)?)
        }
        None => Ok(WordList::reference()),
    }
}

fn board_cmd(cmd: BoardCmd) -> Result<()> {
    match cmd {
        BoardCmd::Validate { csv } => {
            let board = load_board(&csv)?;
            println!("ok: {} cells (16x30), {} gamut-clipped", board.cells().len(), board.clipped_count());
        }
        BoardCmd::Synth { out } => {
            Board::synthetic().write_csv(BufWriter::new(File::create(&out)?))?;
            println!("wrote synthetic board to {}", out.display());
        }
        BoardCmd::Stimuli { board, out, size } => {
            let board = load_board(&board)?;
            fs::create_dir_all(&out)?;
            for cell in board.cells() {
                let img = render_stimulus(cell, size, size)?;
                img.save(out.join(format!("{}.png", cell.label())))?;
            }
            println!("wrote {} stimuli to {}", board.cells().len(), out.display());
        }
    }
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let board = load_board(&args.board)?;
    let words = load_words(args.words.as_deref())?;
    let humans_file = File::open(&args.humans).with_context(|| format!("opening {}", args.humans.display()))?;
    let humans = ingest_human_responses(BufReader::new(humans_file))?;
    let provider = provider_from_spec(&args.provider, args.template.clone())?;
    let cfg = ExperimentConfig {
        alpha: args.alpha,
        top_k: args.top_k,
        concurrency: args.concurrency,
        weighted_test: args.weighted_test,
        permutations: args.permutations,
        permutation_seed: args.permutation_seed,
        execution: if args.sequential { Execution::Sequential } else { Execution::default() },
    };

    let json_path = args.out.with_extension("json");
    match run_experiment(&board, &words, &provider, &humans, &cfg) {
        Ok(report) => {
            fs::write(&json_path, report.to_json())?;
            report.write_csv(File::create(args.out.with_extension("csv"))?)?;
            print!("{}", report.render_table());
            Ok(())
        }
        Err(HarnessError::Provider { word, source, partial }) => {
            let partial_path = args.out.with_extension("partial.json");
            fs::write(&partial_path, partial.to_json())?;
            bail!(
                "provider failed on {word:?}: {source}; {} word(s) done, partial report in {}",
                partial.words.len(),
                partial_path.display()
            )
        }
        Err(e) => Err(e.into()),
    }
}

fn export(report_path: &Path, out: Option<PathBuf>) -> Result<()> {
    let text = fs::read_to_string(report_path).with_context(|| format!("reading {}", report_path.display()))?;
    let report = EvaluationReport::from_json(&text)?;
    let data = export_diagram(&report)?;
    let prefix = out.unwrap_or_else(|| report_path.with_extension(""));
    let json = prefix.with_extension("diagram.json");
    let csv = prefix.with_extension("diagram.csv");
    fs::write(&json, data.to_json())?;
    data.write_csv(File::create(&csv)?)?;
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(())
}

fn serve(
    board: &Path,
    host: &str,
    port: u16,
    sessions: &Path,
    provider: Option<&str>,
    words: Option<&Path>,
) -> Result<()> {
    let board = load_board(board)?;
    let provider: Arc<dyn SimilarityProvider> = match provider {
        Some(spec) => Arc::from(provider_from_spec(spec, None)?),
        None => {
            eprintln!("note: no --provider given; play mode uses a mock that anchors every clue at A1");
            Arc::new(MockProvider::default())
        }
    };
    let store = SessionStore::open(sessions)?;
    let state = AppState::new(board, provider, store).with_default_words(load_words(words)?);
    let addr: SocketAddr = format!("{host}:{port}").parse().context("bad --host/--port")?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = hues_server::bind(addr).await?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        hues_server::serve(listener, state).await?;
        anyhow::Ok(())
    })
}

fn prompt(input: &mut impl BufRead, msg: &str) -> Result<Option<String>> {
    print!("{msg}");
    io::stdout().flush()?;
    let mut line = String::new();
    if input.read_line(&mut line)? == 0 {
        return Ok(None);
    }
    Ok(Some(line.trim().to_string()))
}

fn play(board: &Path, provider: &str, seed: u64, models: usize, transcript: Option<&Path>) -> Result<()> {
    let board = load_board(board)?;
    let provider = provider_from_spec(provider, None)?;
    let mut players = vec![PlayerSpec::human("you")];
    players.extend((1..=models).map(|i| PlayerSpec::model(format!("model-{i}"))));
    let mut game = new_game(&players, "you", seed, GameConfig::default())?;
    let target = board.cell(game.target);
    println!("You lead. Target card: {} {}", game.target, target.srgb);

    let stdin = io::stdin();
    let mut input = stdin.lock();
    while game.phase != Phase::Scored {
        let msg = match game.phase {
            Phase::AwaitingClue1 => "Round 1 clue (one word): ",
            _ => "Round 2 clue (up to two words): ",
        };
        let Some(clue) = prompt(&mut input, msg)? else { bail!("input closed before the game finished") };
        if let Err(e) = game.submit_clue(&clue) {
            println!("  {e}");
            continue;
        }
        game.play_model_round(&board, &provider, DEFAULT_TOP_K)?;
        for m in game.markers.iter().filter(|m| Some(m.round) == game.clues.last().map(|c| c.round)) {
            let d = m.pos().chebyshev(&game.target);
            println!("  {} → {} {} (distance {d})", m.player, m.pos(), board.cell(m.pos()).srgb);
        }
        if game.ready_to_score() {
            let sheet = game.score_round()?;
            println!("Leader scores {}", sheet.leader_points);
            for (p, pts) in &sheet.players {
                println!("  {p}: {pts}");
            }
        }
    }
    if let Some(path) = transcript {
        fs::write(path, game.transcript_json())?;
    }
    Ok(())
}
