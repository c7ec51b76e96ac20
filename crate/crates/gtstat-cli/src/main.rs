//! `gtstat`: betting-score ledgers, Kelly competitions, and description
//! ranges from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error
//! (non-unimodal likelihood or unbounded payoff).

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use gtstat::classical;
use gtstat::describe::{self, Cutoffs, DescriptionRange, FormulaMode, FunctionalSpec};
use gtstat::families::{self, Dataset, FamilySpec, ParamPoint, Record};
use gtstat::kelly::{compete, kelly_payoff, Competitor};
use gtstat::ledger::append_record;
use gtstat::sim::ville_frequency;
use gtstat::{Error, Forecast, Ledger, LedgerRecord, Outcome, PayoffSpec, SimConfig};

#[derive(Parser)]
#[command(
    name = "gtstat",
    version,
    about = "Betting-score ledgers, Kelly competitions, and description ranges"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a family to data and print description ranges per cutoff
    Describe(DescribeArgs),
    /// Record and replay betting sessions in an append-only ledger file
    #[command(subcommand)]
    Ledger(LedgerCommand),
    /// Run a Kelly competition between two forecasters over a dataset
    Compete(CompeteArgs),
    /// Estimate the threshold-crossing frequency under a known truth
    VilleSim(VilleArgs),
    /// Recompute the built-in worked examples
    #[command(subcommand)]
    Reproduce(ReproduceCommand),
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with header `label,y` or `y`
    #[arg(long, value_name = "CSV")]
    data: Option<PathBuf>,
    /// Normal summary as N,mean,sd
    #[arg(long, value_name = "N,MEAN,SD")]
    summary: Option<String>,
    /// Binomial summary as trials,successes
    #[arg(long, value_name = "TRIALS,SUCCESSES")]
    binomial: Option<String>,
}

#[derive(Args)]
struct DescribeArgs {
    /// Family: bernoulli | normal | cells:a,b,... | discrete:a,b,...
    #[arg(long)]
    family: String,
    #[command(flatten)]
    data: DataArgs,
    /// L cutoffs, best first (default 0.5,0.2,0.0667; ranges use C = 1/L)
    #[arg(long, value_name = "A,B,C")]
    cutoffs: Option<String>,
    /// Target functional: component:i | diff:i,j | oddsratio:i,j
    #[arg(long, value_name = "SPEC")]
    functional: Option<String>,
    /// Normal-mean range formula
    #[arg(long, value_enum, default_value_t = ModeArg::Derived)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
}

#[derive(Subcommand)]
enum LedgerCommand {
    /// Start a new session
    Open {
        #[arg(long, value_name = "PATH")]
        ledger: PathBuf,
        #[arg(long)]
        session: String,
    },
    /// Bet all capital on an event at its forecast probability
    BetEvent {
        #[arg(long, value_name = "PATH")]
        ledger: PathBuf,
        #[arg(long)]
        session: String,
        /// Forecast probability of the event
        #[arg(long)]
        alpha: f64,
        /// Whether the event happened
        #[arg(long, action = ArgAction::Set)]
        happened: bool,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Bet a payoff table against a distribution forecast over labels
    BetTable {
        #[arg(long, value_name = "PATH")]
        ledger: PathBuf,
        #[arg(long)]
        session: String,
        /// Forecast probabilities, e.g. a:0.5,b:0.5
        #[arg(long, value_name = "L:P,...")]
        forecast: String,
        /// Payoff factors, e.g. a:1.5,b:0.5 (expected value must be 1)
        #[arg(long, value_name = "L:F,...")]
        factors: String,
        /// Observed label
        #[arg(long)]
        outcome: String,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Bet the ratio of a numerator model to the forecast model
    BetRatio {
        #[arg(long, value_name = "PATH")]
        ledger: PathBuf,
        #[arg(long)]
        session: String,
        /// Family: bernoulli | normal | cells:a,b,... | discrete:a,b,...
        #[arg(long)]
        family: String,
        /// Forecast (denominator) parameters, comma separated
        #[arg(long, value_name = "THETA")]
        den: String,
        /// Bettor (numerator) parameters, comma separated
        #[arg(long, value_name = "THETA")]
        num: String,
        /// Stake fraction in [0, 1]
        #[arg(long, default_value_t = 1.0)]
        fraction: f64,
        /// Observed value (numeric families, and 0/1 for cells)
        #[arg(long, value_name = "Y")]
        outcome_y: Option<f64>,
        /// Observed label (cells and discrete families)
        #[arg(long, value_name = "LABEL")]
        outcome_label: Option<String>,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Print a session's evidence, running maximum, and dynamic p-value
    Report {
        #[arg(long, value_name = "PATH")]
        ledger: PathBuf,
        #[arg(long)]
        session: String,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Close a session, fixing its final score
    Close {
        #[arg(long, value_name = "PATH")]
        ledger: PathBuf,
        #[arg(long)]
        session: String,
    },
    /// Average the final scores of all closed sessions
    Aggregate {
        #[arg(long, value_name = "PATH")]
        ledger: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
}

#[derive(Args)]
struct CompeteArgs {
    /// Family: bernoulli | normal | cells:a,b,... | discrete:a,b,...
    #[arg(long)]
    family: String,
    /// Denominator (priced) parameters, comma separated
    #[arg(long, value_name = "THETA")]
    den: String,
    /// Numerator (betting) parameters, comma separated
    #[arg(long, value_name = "THETA")]
    num: String,
    /// Numerator's stake fraction in [0, 1]
    #[arg(long, default_value_t = 1.0)]
    fraction: f64,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
}

#[derive(Args)]
struct VilleArgs {
    /// Family: bernoulli | normal | cells:a,b,... | discrete:a,b,...
    #[arg(long, default_value = "bernoulli")]
    family: String,
    /// True parameters generating the data
    #[arg(long, value_name = "THETA")]
    truth: String,
    /// Bettor's parameters
    #[arg(long, value_name = "THETA")]
    bettor: String,
    /// Bettor's stake fraction in [0, 1]
    #[arg(long, default_value_t = 1.0)]
    fraction: f64,
    /// Rounds per path
    #[arg(long)]
    horizon: u64,
    /// Capital level whose crossing is counted
    #[arg(long)]
    threshold: f64,
    #[arg(long)]
    paths: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
}

#[derive(Subcommand)]
enum ReproduceCommand {
    /// Description ranges for 70 successes in 100 trials
    Binomial,
    /// Error bounds for the wage survey mean, in months
    FourierTable1,
    /// Description ranges for the wage survey mean
    FourierTable2 {
        #[arg(long, value_enum, default_value_t = ModeArg::Paper)]
        mode: ModeArg,
    },
    /// The 2x2 positive-response survey: MLE, pooled SE, difference range
    Survey,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Half-width s sqrt((2C)^(1/N) - 1), as printed in the reference table
    #[value(name = "paper", alias = "published")]
    Paper,
    /// Half-width s sqrt(C^(2/N) - 1), what the profile inequality yields
    Derived,
}

impl From<ModeArg> for FormulaMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Paper => FormulaMode::Published,
            ModeArg::Derived => FormulaMode::Derived,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Text,
    Records,
}

/// Published reference values the `reproduce` commands print alongside the
/// recomputed numbers.
mod published {
    /// 70 successes in 100 trials.
    pub const BINOMIAL: (u64, u64) = (100, 70);
    /// Binomial description ranges as printed, per C.
    pub const BINOMIAL_RANGES: [(f64, (f64, f64)); 3] = [
        (2.0, (0.64, 0.76)),
        (5.0, (0.61, 0.78)),
        (15.0, (0.59, 0.80)),
    ];
    /// Wage survey summary: N, mean, standard deviation (yearly, in francs).
    pub const WAGES: (u64, f64, f64) = (505, 33.31, 7.642);
    /// Error bounds in months at shrinking tail probabilities.
    pub const WAGE_MONTHS: [(f64, f64); 5] = [
        (0.5, 2.7528),
        (0.05, 7.9932),
        (0.005, 11.4516),
        (0.0005, 14.2044),
        (0.00005, 16.5480),
    ];
    /// Mean description ranges as printed, per C.
    pub const WAGE_RANGES: [(f64, (f64, f64)); 3] = [
        (2.0, (32.9, 33.7)),
        (5.0, (32.8, 33.8)),
        (15.0, (32.7, 33.9)),
    ];
    /// Positive responses by cell: label, successes, trials.
    pub const SURVEY: [(&str, u64, u64); 4] = [
        ("bf", 8, 10),
        ("bm", 12, 20),
        ("wf", 20, 50),
        ("wm", 20, 120),
    ];
    /// Published qualitative reading of the bf-bm difference range at C = 2.
    pub const SURVEY_CLAIM: &str = "a little more than 0 to about 0.4";
}

enum CliError {
    Usage(String),
    Data(String),
    Lib(Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Lib(Error::NonUnimodal(_)) | CliError::Lib(Error::UnboundedPayoff(_)) => 3,
            CliError::Lib(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(message) | CliError::Data(message) => f.write_str(message),
            CliError::Lib(error) => write!(f, "{error}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        CliError::Lib(error)
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error) => {
            // Help and version requests arrive here too; only real parse
            // failures are usage errors.
            let code = if error.use_stderr() { 1 } else { 0 };
            let _ = error.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(error.code())
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Describe(args) => run_describe(args),
        Command::Ledger(command) => run_ledger(command),
        Command::Compete(args) => run_compete(args),
        Command::VilleSim(args) => run_ville(args),
        Command::Reproduce(command) => run_reproduce(command),
    }
}

// ---- describe ----

fn run_describe(args: DescribeArgs) -> CliResult {
    let family = parse_family(&args.family)?;
    let data = load_dataset(&family, &args.data)?;
    let cutoffs = match &args.cutoffs {
        Some(text) => parse_cutoffs(text)?,
        None => Cutoffs::default(),
    };
    let functional = args
        .functional
        .as_deref()
        .map(parse_functional)
        .transpose()?;
    let fit = families::mle(&family, &data)?;

    let targets: Vec<FunctionalSpec> = match (&functional, &family) {
        (Some(h), _) => vec![*h],
        (None, FamilySpec::BernoulliConstant) | (None, FamilySpec::NormalMeanVar) => {
            vec![FunctionalSpec::Component { i: 0 }]
        }
        // No functional named: describe every component.
        (None, _) => (0..family.param_len())
            .map(|i| FunctionalSpec::Component { i })
            .collect(),
    };

    let mut ranges: Vec<(&'static str, f64, DescriptionRange<f64>)> = Vec::new();
    for target in &targets {
        for (grade, cutoff) in cutoffs.graded() {
            let c = cutoff.recip();
            let range = match &family {
                FamilySpec::BernoulliConstant => describe::range_1d(&family, &data, c)?,
                FamilySpec::NormalMeanVar => {
                    if !matches!(target, FunctionalSpec::Component { i: 0 }) {
                        return Err(CliError::Usage(
                            "the normal family only supports --functional component:0 \
                             (the mean)"
                                .into(),
                        ));
                    }
                    describe::normal_mean_range(&data, c, args.mode.into())?
                }
                _ => describe::functional_range(&family, &data, *target, c)?,
            };
            ranges.push((grade.label(), cutoff, range));
        }
    }

    match args.emit {
        Emit::Text => {
            println!("family {}", family_display(&family));
            println!("mle: {}", theta_display(&family, &fit.theta.values));
            if matches!(family, FamilySpec::NormalMeanVar) {
                println!("formula mode: {}", FormulaMode::from(args.mode));
            }
            println!("{:<14} {:>8} {:>6} {:>10} {:>10}", "target", "cutoff", "C", "lo", "hi");
            for (grade, cutoff, range) in &ranges {
                println!(
                    "{:<14} {:>8} {:>6} {:>10.4} {:>10.4}{}   [{}]",
                    range.target.to_string(),
                    format!("{cutoff:.4}"),
                    format!("{:.1}", range.cutoff),
                    range.lo,
                    range.hi,
                    boundary_note(range),
                    grade,
                );
            }
        }
        Emit::Records => {
            emit_record(&serde_json::json!({
                "record": "fit",
                "family": family,
                "theta": fit.theta.values,
                "boundary": fit.boundary,
            }))?;
            for (grade, _, range) in &ranges {
                let mut value = serde_json::to_value(range).map_err(Error::from)?;
                value["record"] = "range".into();
                value["grade"] = (*grade).into();
                emit_record(&value)?;
            }
        }
    }
    Ok(())
}

fn boundary_note(range: &DescriptionRange<f64>) -> &'static str {
    match (range.lo_at_boundary, range.hi_at_boundary) {
        (true, true) => " (both ends at domain boundary)",
        (true, false) => " (lo at domain boundary)",
        (false, true) => " (hi at domain boundary)",
        (false, false) => "",
    }
}

// ---- ledger ----

fn run_ledger(command: LedgerCommand) -> CliResult {
    match command {
        LedgerCommand::Open { ledger, session } => {
            let mut book = load_ledger_or_empty(&ledger)?;
            book.open_session(&session)?;
            append_record(&ledger, &LedgerRecord::open(&session))?;
            verify_replay(&ledger)?;
            println!("opened session {session:?} in {}", ledger.display());
            Ok(())
        }
        LedgerCommand::BetEvent {
            ledger,
            session,
            alpha,
            happened,
            emit,
        } => {
            let mut book = load_ledger(&ledger)?;
            let round = book
                .session_mut(&session)?
                .bet_event(alpha, happened)?
                .clone();
            finish_bet(&ledger, &session, book, round, emit)
        }
        LedgerCommand::BetTable {
            ledger,
            session,
            forecast,
            factors,
            outcome,
            emit,
        } => {
            let forecast = Forecast::Distribution {
                probabilities: parse_kv_list(&forecast)?,
            };
            let payoff = PayoffSpec::Table {
                factors: parse_kv_list(&factors)?,
            };
            let outcome = Outcome::Label { label: outcome };
            let mut book = load_ledger(&ledger)?;
            let round = book
                .session_mut(&session)?
                .bet_payoff(forecast, payoff, outcome)?
                .clone();
            finish_bet(&ledger, &session, book, round, emit)
        }
        LedgerCommand::BetRatio {
            ledger,
            session,
            family,
            den,
            num,
            fraction,
            outcome_y,
            outcome_label,
            emit,
        } => {
            let family = parse_family(&family)?;
            let den = Competitor::new(family.clone(), parse_theta(&den)?, 1.0)?;
            let num = Competitor::new(family.clone(), parse_theta(&num)?, fraction)?;
            let payoff = kelly_payoff(&den, &num)?;
            let record = match (outcome_label, outcome_y) {
                (None, Some(y)) => Record::numeric(y),
                (Some(label), Some(y)) => Record::labeled(label, y),
                (Some(label), None) => Record::outcome(label),
                (None, None) => {
                    return Err(CliError::Usage(
                        "provide --outcome-y, --outcome-label, or both".into(),
                    ))
                }
            };
            let forecast = Forecast::Model {
                family,
                theta: den.theta,
            };
            let outcome = Outcome::Observation { record };
            let mut book = load_ledger(&ledger)?;
            let round = book
                .session_mut(&session)?
                .bet_payoff(forecast, payoff, outcome)?
                .clone();
            finish_bet(&ledger, &session, book, round, emit)
        }
        LedgerCommand::Report {
            ledger,
            session,
            emit,
        } => {
            let book = load_ledger(&ledger)?;
            let found = book.session(&session)?;
            let report = found.report();
            match emit {
                Emit::Text => {
                    println!("session {session:?}: {} rounds", found.rounds.len());
                    println!("  evidence (current capital) {:.6}", report.evidence);
                    println!("  running maximum            {:.6}", report.running_max);
                    println!("  dynamic p-value            {:.6}", report.dynamic_p);
                }
                Emit::Records => emit_record(&serde_json::json!({
                    "record": "report",
                    "session_id": session,
                    "evidence": report.evidence,
                    "running_max": report.running_max,
                    "dynamic_p": report.dynamic_p,
                }))?,
            }
            Ok(())
        }
        LedgerCommand::Close { ledger, session } => {
            let mut book = load_ledger(&ledger)?;
            let handle = book.session_mut(&session)?;
            handle.close()?;
            let line = LedgerRecord::close(handle);
            append_record(&ledger, &line)?;
            verify_replay(&ledger)?;
            println!(
                "closed session {session:?}: final score {:.6}",
                book.session(&session)?.final_score()?
            );
            Ok(())
        }
        LedgerCommand::Aggregate { ledger, emit } => {
            let book = load_ledger(&ledger)?;
            let mean = book.aggregate_all()?;
            match emit {
                Emit::Text => println!(
                    "{} session(s): mean final score {:.6}",
                    book.sessions.len(),
                    mean
                ),
                Emit::Records => emit_record(&serde_json::json!({
                    "record": "aggregate",
                    "sessions": book.sessions.len(),
                    "mean_final_score": mean,
                }))?,
            }
            Ok(())
        }
    }
}

/// Appends the settled round, then re-reads the whole file so a corrupt or
/// diverging ledger is caught at the moment it is written, not later.
fn finish_bet(
    path: &Path,
    session: &str,
    book: Ledger,
    round: gtstat::BetRound,
    emit: Emit,
) -> CliResult {
    let line = LedgerRecord::round(session, &round);
    append_record(path, &line)?;
    verify_replay(path)?;
    let report = book.session(session)?.report();
    match emit {
        Emit::Text => {
            println!(
                "session {session:?} round {}: factor {:.6}, capital {:.6}",
                round.t, round.factor, round.capital_after
            );
            println!(
                "  running maximum {:.6}, dynamic p-value {:.6}",
                report.running_max, report.dynamic_p
            );
        }
        Emit::Records => {
            emit_record(&serde_json::to_value(&line).map_err(Error::from)?)?;
        }
    }
    Ok(())
}

fn load_ledger(path: &Path) -> CliResult<Ledger> {
    if !path.exists() {
        return Err(CliError::Data(format!(
            "ledger file {} does not exist; run `gtstat ledger open` first",
            path.display()
        )));
    }
    Ok(Ledger::load_path(path)?)
}

fn load_ledger_or_empty(path: &Path) -> CliResult<Ledger> {
    if path.exists() {
        Ok(Ledger::load_path(path)?)
    } else {
        Ok(Ledger::new())
    }
}

fn verify_replay(path: &Path) -> CliResult {
    Ledger::load_path(path)?;
    Ok(())
}

// ---- compete ----

fn run_compete(args: CompeteArgs) -> CliResult {
    let family = parse_family(&args.family)?;
    let data = load_dataset(&family, &args.data)?;
    let den = Competitor::new(family.clone(), parse_theta(&args.den)?, 1.0)?;
    let num = Competitor::new(family.clone(), parse_theta(&args.num)?, args.fraction)?;
    let outcome = compete(&den, &num, &data)?;
    match args.emit {
        Emit::Text => {
            println!(
                "kelly competition over {}: numerator {} at fraction {} vs denominator {}",
                family_display(&family),
                theta_display(&family, &num.theta.values),
                args.fraction,
                theta_display(&family, &den.theta.values),
            );
            println!("  log capital   {:.6}", outcome.log_capital);
            println!("  final capital {:.6e}", outcome.final_capital);
            if outcome.overflowed {
                println!("  (final capital clipped at the float maximum)");
            }
        }
        Emit::Records => emit_record(&serde_json::json!({
            "record": "competition",
            "log_capital": outcome.log_capital,
            "final_capital": outcome.final_capital,
            "overflowed": outcome.overflowed,
        }))?,
    }
    Ok(())
}

// ---- ville-sim ----

fn run_ville(args: VilleArgs) -> CliResult {
    let family = parse_family(&args.family)?;
    let config = SimConfig {
        truth: (family.clone(), parse_theta(&args.truth)?),
        bettor: Competitor::new(family, parse_theta(&args.bettor)?, args.fraction)?,
        horizon: args.horizon,
        threshold: args.threshold,
        paths: args.paths,
        seed: args.seed,
    };
    let report = ville_frequency(&config)?;
    match args.emit {
        Emit::Text => {
            println!(
                "threshold-crossing simulation: {} paths of {} rounds, threshold {}",
                args.paths, args.horizon, args.threshold
            );
            println!(
                "  frequency          {:.6} (se {:.6}), bound 1/threshold = {:.6}",
                report.frequency,
                report.standard_error,
                1.0 / args.threshold
            );
            println!(
                "  mean final capital {:.6} (se {:.6})",
                report.mean_final_capital, report.final_capital_se
            );
        }
        Emit::Records => emit_record(&serde_json::json!({
            "record": "ville_report",
            "frequency": report.frequency,
            "standard_error": report.standard_error,
            "mean_final_capital": report.mean_final_capital,
            "final_capital_se": report.final_capital_se,
        }))?,
    }
    Ok(())
}

// ---- reproduce ----

fn run_reproduce(command: ReproduceCommand) -> CliResult {
    match command {
        ReproduceCommand::Binomial => reproduce_binomial(),
        ReproduceCommand::FourierTable1 => reproduce_fourier_months(),
        ReproduceCommand::FourierTable2 { mode } => reproduce_fourier_ranges(mode.into()),
        ReproduceCommand::Survey => reproduce_survey(),
    }
}

fn reproduce_binomial() -> CliResult {
    let (trials, successes) = published::BINOMIAL;
    let family = FamilySpec::BernoulliConstant;
    let data = Dataset::binomial_summary(trials, successes)?;
    println!("binomial description ranges: {successes} successes in {trials} trials");
    println!(
        "{:<6} {:>4}  {:<20} {}",
        "grade", "C", "solver", "published"
    );
    for (grade, (c, printed)) in ["good", "fair", "poor"]
        .iter()
        .zip(published::BINOMIAL_RANGES)
    {
        let range = describe::range_1d(&family, &data, c)?;
        println!(
            "{:<6} {:>4}  ({:.4}, {:.4})     ({:.2}, {:.2})",
            grade, c, range.lo, range.hi, printed.0, printed.1
        );
    }
    Ok(())
}

fn reproduce_fourier_months() -> CliResult {
    let (n, mean, sd) = published::WAGES;
    println!("error bounds for the mean yearly wage (N = {n}, mean {mean}, sd {sd})");
    println!(
        "{:<12} {:>8} {:>8} {:>9} {:>10}",
        "probability", "score", "z", "months", "published"
    );
    for (p, printed) in published::WAGE_MONTHS {
        let bound = classical::normal_error_bound(p, sd, n)?;
        let z = classical::inverse_normal_cdf(1.0 - p / 2.0)?;
        println!(
            "{:<12} {:>8} {:>8.4} {:>9.4} {:>10.4}",
            p,
            format!("{:.0}", 1.0 / p),
            z,
            bound.months(),
            printed
        );
    }
    Ok(())
}

fn reproduce_fourier_ranges(mode: FormulaMode) -> CliResult {
    let (n, mean, sd) = published::WAGES;
    let data = Dataset::normal_summary(n, mean, sd)?;
    println!("description ranges for the mean yearly wage (N = {n}, mean {mean}, sd {sd})");
    println!("formula mode: {mode}");
    println!(
        "{:<6} {:>4} {:>10} {:>10}  {}",
        "grade", "C", "lo", "hi", "published table"
    );
    for (grade, (c, printed)) in ["good", "fair", "poor"].iter().zip(published::WAGE_RANGES) {
        let range = describe::normal_mean_range(&data, c, mode)?;
        println!(
            "{:<6} {:>4} {:>10.4} {:>10.4}  ({:.1}, {:.1})",
            grade, c, range.lo, range.hi, printed.0, printed.1
        );
    }
    Ok(())
}

fn reproduce_survey() -> CliResult {
    let family = FamilySpec::product_bernoulli(published::SURVEY.map(|(label, _, _)| label))?;
    let data = Dataset::bernoulli_cells(
        &published::SURVEY.map(|(label, successes, trials)| (label, successes, trials)),
    )?;
    let fit = families::mle(&family, &data)?;

    let cells: Vec<String> = published::SURVEY
        .iter()
        .map(|(label, successes, trials)| format!("{label} {successes}/{trials}"))
        .collect();
    println!("survey cells (successes/trials): {}", cells.join(", "));
    println!("mle: {}", theta_display(&family, &fit.theta.values));

    let (_, bf_s, bf_t) = published::SURVEY[0];
    let (_, bm_s, bm_t) = published::SURVEY[1];
    let se = classical::two_prop_pooled_se::<f64>(bf_s, bf_t, bm_s, bm_t)?;
    println!("pooled standard error of the bf-bm difference: {se:.4}");

    let h = FunctionalSpec::Difference { i: 0, j: 1 };
    let range = describe::functional_range(&family, &data, h, 2.0)?;
    println!(
        "description range of {} at C = 2: ({:.4}, {:.4})",
        h, range.lo, range.hi
    );
    println!("note: published reading of this range: {}.", published::SURVEY_CLAIM);
    println!(
        "note: measured lower endpoint {:.4} sits just below 0; measured upper endpoint {:.4}.",
        range.lo, range.hi
    );
    Ok(())
}

// ---- parsing helpers ----

fn parse_family(text: &str) -> CliResult<FamilySpec> {
    if text == "bernoulli" {
        return Ok(FamilySpec::BernoulliConstant);
    }
    if text == "normal" {
        return Ok(FamilySpec::NormalMeanVar);
    }
    if let Some(labels) = text.strip_prefix("cells:") {
        return Ok(FamilySpec::product_bernoulli(labels.split(','))?);
    }
    if let Some(labels) = text.strip_prefix("discrete:") {
        return Ok(FamilySpec::finite_discrete(labels.split(','))?);
    }
    Err(CliError::Usage(format!(
        "unknown family {text:?}; expected bernoulli, normal, cells:a,b,... or discrete:a,b,..."
    )))
}

fn parse_theta(text: &str) -> CliResult<ParamPoint<f64>> {
    let values = parse_f64_list(text, "parameter")?;
    Ok(ParamPoint::new(values))
}

fn parse_f64_list(text: &str, what: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad {what} value {part:?}")))
        })
        .collect()
}

fn parse_cutoffs(text: &str) -> CliResult<Cutoffs<f64>> {
    let values = parse_f64_list(text, "cutoff")?;
    if values.len() != 3 {
        return Err(CliError::Usage(format!(
            "--cutoffs needs exactly three values, got {}",
            values.len()
        )));
    }
    Ok(Cutoffs::new(values[0], values[1], values[2])?)
}

fn parse_functional(text: &str) -> CliResult<FunctionalSpec> {
    let (kind, indices) = text.split_once(':').ok_or_else(|| {
        CliError::Usage(format!(
            "bad functional {text:?}; expected component:i, diff:i,j or oddsratio:i,j"
        ))
    })?;
    let parts: Vec<usize> = indices
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad functional index {part:?}")))
        })
        .collect::<CliResult<_>>()?;
    match (kind, parts.as_slice()) {
        ("component", [i]) => Ok(FunctionalSpec::Component { i: *i }),
        ("diff", [i, j]) => Ok(FunctionalSpec::Difference { i: *i, j: *j }),
        ("oddsratio", [i, j]) => Ok(FunctionalSpec::OddsRatio { i: *i, j: *j }),
        _ => Err(CliError::Usage(format!(
            "bad functional {text:?}; expected component:i, diff:i,j or oddsratio:i,j"
        ))),
    }
}

fn parse_kv_list(text: &str) -> CliResult<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for part in text.split(',') {
        let (label, value) = part.split_once(':').ok_or_else(|| {
            CliError::Usage(format!("bad entry {part:?}; expected label:value"))
        })?;
        let value = value
            .trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("bad value in {part:?}")))?;
        if map.insert(label.trim().to_string(), value).is_some() {
            return Err(CliError::Usage(format!("label {label:?} given twice")));
        }
    }
    Ok(map)
}

fn load_dataset(family: &FamilySpec, args: &DataArgs) -> CliResult<Dataset<f64>> {
    let sources =
        args.data.is_some() as u8 + args.summary.is_some() as u8 + args.binomial.is_some() as u8;
    if sources != 1 {
        return Err(CliError::Usage(
            "provide exactly one of --data, --summary, --binomial".into(),
        ));
    }
    if let Some(path) = &args.data {
        return Dataset::from_csv_path(path)
            .map_err(|error| CliError::Data(format!("{}: {error}", path.display())));
    }
    if let Some(text) = &args.summary {
        if !matches!(family, FamilySpec::NormalMeanVar) {
            return Err(CliError::Usage(
                "--summary N,mean,sd only fits the normal family".into(),
            ));
        }
        let parts = parse_f64_list(text, "summary")?;
        if parts.len() != 3 || parts[0].fract() != 0.0 || parts[0] < 1.0 {
            return Err(CliError::Usage(
                "--summary needs N,mean,sd with integer N >= 1".into(),
            ));
        }
        return Ok(Dataset::normal_summary(parts[0] as u64, parts[1], parts[2])?);
    }
    let text = args.binomial.as_ref().expect("one source is set");
    if !matches!(family, FamilySpec::BernoulliConstant) {
        return Err(CliError::Usage(
            "--binomial trials,successes only fits the bernoulli family".into(),
        ));
    }
    let parts: Vec<u64> = text
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| CliError::Usage(format!("bad count {part:?}")))
        })
        .collect::<CliResult<_>>()?;
    if parts.len() != 2 {
        return Err(CliError::Usage("--binomial needs trials,successes".into()));
    }
    Ok(Dataset::binomial_summary(parts[0], parts[1])?)
}

// ---- printing helpers ----

fn family_display(family: &FamilySpec) -> String {
    match family.labels() {
        Some(labels) => format!("{} [{}]", family.kind_name(), labels.join(", ")),
        None => family.kind_name().to_string(),
    }
}

fn theta_display(family: &FamilySpec, values: &[f64]) -> String {
    let rendered: Vec<String> = match family.labels() {
        Some(labels) => labels
            .iter()
            .zip(values)
            .map(|(label, value)| format!("{label} {value:.4}"))
            .collect(),
        None => values.iter().map(|value| format!("{value:.4}")).collect(),
    };
    format!("({})", rendered.join(", "))
}

fn emit_record(value: &serde_json::Value) -> CliResult {
    println!("{}", serde_json::to_string(value).map_err(Error::from)?);
    Ok(())
}
