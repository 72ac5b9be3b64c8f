use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::net::TcpListener;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};

use holdem::config::{read_json, AgentFile, ResolveFile, RulesFile, TrainFile};
use holdem::error::{Error, Result};
use holdem::files;
use holdem::report::{log_stats, read_match_log, write_audit_tsv, write_match_log, write_report_csv, LoggedHand};
use holdem::server::{serve, ServeConfig};
use holdem_core::abstraction::profile::{Abstraction, AbstractionProfile};
use holdem_core::abstraction::menu::{betting_actions, translate};
use holdem_core::agent::{Agent, AlwaysCall, AlwaysFold, Player, RandomPlayer};
use holdem_core::arena::{run_match, MatchStats};
use holdem_core::blueprint::{train, StrategyStore};
use holdem_core::cards::{cards_mask, pair_cards, parse_cards, NUM_PAIRS};
use holdem_core::cfr::{solve_tree, ExploitSample, Policy, SolveReport, Solver};
use holdem_core::fixtures::make_fixture;
use holdem_core::game::{Betting, RulesConfig};
use holdem_core::hunl::AbstractHunl;
use holdem_core::subgame::hunl::{alt_values, HunlSpec, PolicyView, Subgame};
use holdem_core::subgame::Range;
use holdem_core::tree::ActionSeq;

#[derive(Parser)]
#[command(name = "holdem", version, about = "Heads-up no-limit hold'em solver and agent")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run CFR on kuhn, leduc or an abstract hold'em game.
    Solve {
        #[arg(long)]
        game: String,
        #[arg(long, default_value = "vanilla")]
        variant: String,
        #[arg(long, default_value = "linear")]
        weighting: String,
        #[arg(long, default_value_t = 10_000)]
        iters: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exploitability samples to take (small games only).
        #[arg(long, default_value_t = 10)]
        samples: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Train a blueprint from a JSON config.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Solve one subgame from a JSON spec and audit it.
    Resolve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        iters: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        audit: Option<PathBuf>,
    },
    /// Serve the agent over TCP.
    Play {
        /// Blueprint store; overrides the one named in the config.
        #[arg(long)]
        store: PathBuf,
        /// Agent JSON config (abstraction, budgets, models).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:7878")]
        listen: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 600)]
        timeout_secs: u64,
    },
    /// Play two players against each other.
    Match {
        /// Two of: call, fold, random, or a path to an agent JSON config.
        #[arg(long, value_delimiter = ',', required = true)]
        agents: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        hands: u64,
        #[arg(long)]
        duplicate: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Summarize a match log.
    Stats {
        #[arg(long)]
        log: PathBuf,
    },
}

fn print_stats(s: &MatchStats) {
    println!("hands {}  chips {}  {:.1} mbb/h  (se {:.1})", s.hands, s.total_chips, s.mbb_per_hand, s.std_error);
}

fn solve(game: &str, variant: &str, weighting: &str, iters: u64, seed: u64, samples: u64, report: Option<PathBuf>) -> Result<()> {
    let variant = variant.parse()?;
    let weighting = weighting.parse()?;
    let start = Instant::now();
    let rep = if game == "hunl-abstract" {
        let abs = Abstraction::build(&AbstractionProfile::tiny(), seed)?;
        let g = AbstractHunl::new(&abs, RulesConfig::default())?;
        let mut solver = Solver::new(&g, Default::default(), variant, weighting, seed);
        solver.run(iters)?;
        println!("{} infosets", solver.table().len());
        SolveReport { iterations: iters, elapsed_ms: start.elapsed().as_millis() as u64, ..SolveReport::default() }
    } else {
        let tree = make_fixture(game)?;
        let marks: Vec<u64> = (1..=samples).map(|i| iters * i / samples.max(1)).collect();
        let (_, mut rep) = solve_tree(&tree, variant, weighting, iters, seed, &marks)?;
        rep.elapsed_ms = start.elapsed().as_millis() as u64;
        for ExploitSample { iteration, exploitability, .. } in &rep.samples {
            println!("{iteration:>10}  {exploitability:.6e}");
        }
        rep
    };
    if let Some(path) = report {
        write_report_csv(File::create(path)?, &rep)?;
    }
    Ok(())
}

fn train_cmd(config: PathBuf, resume: Option<PathBuf>) -> Result<()> {
    let file: TrainFile = read_json(&config)?;
    let cfg = file.training_config()?;
    let abs = file.abstraction.load_or_build()?;
    let resume = resume.map(|p| files::load_checkpoint(&p)).transpose()?;
    let start = Instant::now();
    let (store, mut report) = train(&cfg, &abs, resume, |ck| {
        log::info!("checkpoint at iteration {}", ck.header.iterations);
        match &file.checkpoint {
            Some(p) => files::save_checkpoint(p, ck).map_err(|_| holdem_core::Error::InvalidConfig("checkpoint write failed")),
            None => Ok(()),
        }
    })?;
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    files::save_store(&file.store, &store)?;
    println!("{} iterations, {} infosets -> {}", store.header.iterations, store.policy.len(), file.store.display());
    if let Some(p) = &file.report {
        write_report_csv(File::create(p)?, &report)?;
    }
    Ok(())
}

/// Abstract line for `actions`, each mapped to its likeliest menu neighbour.
fn abstract_line(root_rules: RulesConfig, actions: &[String], abs: &Abstraction) -> Result<ActionSeq> {
    let mut b = Betting::new(root_rules)?;
    let mut seq = ActionSeq::EMPTY;
    for s in actions {
        let a = holdem::config::parse_action(s)?;
        let t = translate(&b, a, &abs.menu)?;
        let best = t.iter().fold(t[0], |x, y| if y.1 > x.1 { *y } else { x }).0;
        seq = seq.push(best);
        b = b.apply(a)?;
    }
    Ok(seq)
}

fn live_range(board: u64, given: &Option<Vec<f64>>) -> Result<Range> {
    let w = match given {
        Some(w) if w.len() == NUM_PAIRS => w.clone(),
        Some(_) => return Err(Error::Usage(format!("ranges need {NUM_PAIRS} weights"))),
        None => (0..NUM_PAIRS)
            .map(|p| {
                let (a, b) = pair_cards(p);
                if (a.mask() | b.mask()) & board == 0 { 1.0 } else { 0.0 }
            })
            .collect(),
    };
    Ok(Range::from_weights(w)?)
}

fn resolve_cmd(spec: PathBuf, iters: u64, seed: u64, audit: Option<PathBuf>) -> Result<()> {
    let file: ResolveFile = read_json(&spec)?;
    let abs = file.abstraction.load_or_build()?;
    let root = file.root()?;
    let board = parse_cards(&file.board)?;
    let mask = cards_mask(&board);
    let resolver = file.resolver.unwrap_or_else(|| root.to_act());
    let own = live_range(mask, &file.own_range)?;
    let opp = live_range(mask, &file.opp_range)?;
    let store = file.store.as_ref().map(|p| files::load_store(p)).transpose()?;
    let empty = Policy::new();
    let policy = match &store {
        Some(s) => {
            s.header.check(&abs)?;
            &s.policy
        }
        None => &empty,
    };
    let alt = if file.safe {
        let view = PolicyView { policy, prefix: abstract_line(file.rules.rules()?, &file.actions, &abs)? };
        Some(alt_values(&abs, root, &[], view, &board, resolver, &own, seed)?)
    } else {
        None
    };
    let spec = HunlSpec { root, board, resolver, own_range: own, opp_range: opp, alt, budget: iters, models: file.models()? };
    let start = Instant::now();
    let solved = Subgame::new(spec, &abs, seed)?.solve(seed)?;
    println!("{} iterations in {} ms; min margin {:.4}", solved.iterations, start.elapsed().as_millis(), solved.min_margin());
    let acts = betting_actions(&root, &abs.menu)?;
    println!("root actions: {}", acts.iter().map(|a| a.label.to_string()).collect::<Vec<_>>().join(" "));
    if let Some(p) = audit {
        write_audit_tsv(BufWriter::new(File::create(p)?), &solved.audit)?;
    }
    Ok(())
}

struct Loaded {
    file: AgentFile,
    abs: Abstraction,
    store: StrategyStore,
}

fn load_agent(path: &PathBuf) -> Result<Loaded> {
    load_agent_file(read_json(path)?)
}

fn load_agent_file(file: AgentFile) -> Result<Loaded> {
    file.agent_config()?;
    let abs = file.abstraction.load_or_build()?;
    let store = files::load_store(&file.store)?;
    store.header.check(&abs)?;
    Ok(Loaded { file, abs, store })
}

fn play_cmd(store: PathBuf, config: Option<PathBuf>, listen: String, seed: u64, timeout_secs: u64) -> Result<()> {
    let file: AgentFile = match config {
        Some(p) => read_json(&p)?,
        None => AgentFile::default(),
    };
    let l = load_agent_file(AgentFile { store, ..file })?;
    let cfg = l.file.agent_config()?;
    let listener = TcpListener::bind(&listen)?;
    println!("listening on {}", listener.local_addr()?);
    let serve_cfg = ServeConfig {
        rules: RulesFile::default().rules()?,
        seed,
        read_timeout: (timeout_secs > 0).then(|| Duration::from_secs(timeout_secs)),
        max_connections: None,
    };
    serve(listener, &serve_cfg, |id| {
        let c = holdem_core::agent::AgentConfig { seed: cfg.seed ^ id, ..cfg.clone() };
        Agent::new(c, &l.abs, &l.store).expect("validated agent config")
    })?;
    Ok(())
}

enum Spec {
    Call,
    Fold,
    Random,
    Agent(Loaded),
}

fn match_cmd(agents: Vec<String>, hands: u64, duplicate: bool, seed: u64, log: Option<PathBuf>) -> Result<()> {
    let specs = agents
        .iter()
        .map(|a| {
            Ok(match a.as_str() {
                "call" => Spec::Call,
                "fold" => Spec::Fold,
                "random" => Spec::Random,
                path => Spec::Agent(load_agent(&PathBuf::from(path))?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut players: Vec<Box<dyn Player + '_>> = Vec::new();
    for s in &specs {
        players.push(match s {
            Spec::Call => Box::new(AlwaysCall),
            Spec::Fold => Box::new(AlwaysFold),
            Spec::Random => Box::new(RandomPlayer::new(rng.gen())),
            Spec::Agent(l) => Box::new(Agent::new(l.file.agent_config()?, &l.abs, &l.store)?),
        });
    }
    let [a, b] = &mut players[..] else { return Err(Error::Usage("--agents needs exactly two players".into())) };
    let rules = RulesConfig::default();
    let r = run_match(a.as_mut(), b.as_mut(), hands, seed, duplicate, rules)?;
    if r.violations != [0, 0] {
        println!("protocol violations: {:?}", r.violations);
    }
    print_stats(&r.stats);
    if let Some(p) = log {
        let logged: Vec<_> = r.records.iter().map(|h| LoggedHand::new(h, duplicate, rules.big_blind)).collect();
        write_match_log(BufWriter::new(File::create(p)?), &logged)?;
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Solve { game, variant, weighting, iters, seed, samples, report } => solve(&game, &variant, &weighting, iters, seed, samples, report),
        Cmd::Train { config, resume } => train_cmd(config, resume),
        Cmd::Resolve { spec, iters, seed, audit } => resolve_cmd(spec, iters, seed, audit),
        Cmd::Play { store, config, listen, seed, timeout_secs } => play_cmd(store, config, listen, seed, timeout_secs),
        Cmd::Match { agents, hands, duplicate, seed, log } => match_cmd(agents, hands, duplicate, seed, log),
        Cmd::Stats { log } => File::open(&log).map_err(Error::from).and_then(|f| read_match_log(BufReader::new(f))).and_then(|h| log_stats(&h)).map(|s| print_stats(&s)),
    };
    if let Err(e) = r {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
