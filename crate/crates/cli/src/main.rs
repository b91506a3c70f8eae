use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cipherbent_cli::bundle::{commit, format_bundle, parse_bundle, ChallengeBundle};
use cipherbent_cli::{exit, is_text_keystream_path, load_keystream_bytes};
use cipherbent_core::attack::{
    binomial_lower_tail, binomial_upper_tail, decision_threshold, format_report_kv, format_report_text,
    parse_report_kv, recover_full_key, recover_register, required_keystream, target_bias, AttackParams,
    AttackReport, FullKeyOptions, ReportStatus, ScanMethod, ScanOptions, DEFAULT_P_MISS, DEFAULT_WORK_BUDGET,
};
use cipherbent_core::boolfun::{analyze, parse_anf};
use cipherbent_core::combiner::{
    decode_key, encode_key, encode_keystream, encode_keystream_text, format_combiner_spec, keygen, keystream,
    load_combiner_spec, CombinerSpec, Key, Keystream,
};
use cipherbent_core::nlfsr::{
    find_toy_max_period_specs, format_register_file, parse_register_file, period, RegisterState,
    DEFAULT_SEARCH_BUDGET,
};
use cipherbent_core::Error;

/// Workbench for NLFSR combiner ciphers: keystream generation, Boolean
/// function analysis, correlation attacks and key-recovery challenges.
#[derive(Parser)]
#[command(name = "cipherbent", version)]
struct Cli {
    /// Worker threads for scans (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More diagnostics on stderr (repeatable).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,
    /// Only errors on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Properties of a Boolean function given in ANF.
    Analyze {
        file: PathBuf,
        /// Variable count (default: highest index + 1).
        #[arg(long)]
        n_vars: Option<usize>,
    },
    /// Generates keystream from a combiner spec and key.
    Keystream(KeystreamArgs),
    /// Keystream length needed for a correlation attack.
    CalcN(CalcNArgs),
    /// Runs a correlation attack against a keystream file.
    Attack(AttackArgs),
    /// Creates, solves and checks key-recovery challenges.
    #[command(subcommand)]
    Challenge(ChallengeCommand),
    /// Searches for maximum-period toy registers.
    FindToyRegisters(FindToyArgs),
    /// Measures the cycle length of a register from a start state.
    Period(PeriodArgs),
}

#[derive(Args)]
struct KeystreamArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Key as hex.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    key: Option<String>,
    /// Draw a random key (seeded by --seed, or a fresh logged seed).
    #[arg(long)]
    random: bool,
    #[arg(long, requires = "random")]
    seed: Option<u64>,
    /// Number of keystream bits.
    #[arg(short)]
    n: usize,
    #[arg(short, long)]
    out: PathBuf,
    /// Write the `01` text form (also chosen by a `.txt` extension).
    #[arg(long)]
    text: bool,
}

#[derive(Args)]
struct CalcNArgs {
    /// Correlation probability.
    #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
    p: Option<f64>,
    /// Candidate bits.
    #[arg(long = "L", alias = "l", requires = "p")]
    l: Option<usize>,
    /// Combiner spec; p comes from its Walsh spectrum.
    #[arg(long, requires = "registers")]
    spec: Option<PathBuf>,
    /// Register names forming the mask, comma separated.
    #[arg(long, value_delimiter = ',')]
    registers: Vec<String>,
    /// False-alarm probability (default 2^-L).
    #[arg(long)]
    p_f: Option<f64>,
    /// Miss probability.
    #[arg(long, default_value_t = DEFAULT_P_MISS)]
    p_m: f64,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, default_value = "phase")]
    method: ScanMethod,
    /// Per-register false-alarm probability (default 2^-L).
    #[arg(long)]
    p_f: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_P_MISS)]
    p_m: f64,
    /// Cap on candidate states per scan.
    #[arg(long, default_value_t = DEFAULT_WORK_BUDGET)]
    budget: u64,
    /// Also write the report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Aligned plain text instead of key=value lines on stdout.
    #[arg(long)]
    text: bool,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    keystream: PathBuf,
    /// Bit length of a binary keystream file (default: 8 per byte).
    #[arg(long)]
    bits: Option<usize>,
    /// Keystream bits to use (default: all).
    #[arg(short)]
    n: Option<usize>,
    /// Registers to attack jointly, comma separated.
    #[arg(long, value_delimiter = ',', required_unless_present = "full", conflicts_with = "full")]
    registers: Vec<String>,
    /// Recover the whole key, register by register.
    #[arg(long)]
    full: bool,
    #[command(flatten)]
    scan: ScanArgs,
}

#[derive(Subcommand)]
enum ChallengeCommand {
    /// Draws a key and writes a challenge bundle plus the secret key file.
    Make(MakeArgs),
    /// Attacks a bundle and reports the recovered key.
    Solve {
        bundle: PathBuf,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Checks a key against a bundle's commitment and keystream.
    Verify {
        bundle: PathBuf,
        #[arg(long, conflicts_with = "report", required_unless_present = "report")]
        key: Option<String>,
        /// A solve report carrying `key.0`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MakeArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Keystream bits to publish.
    #[arg(short)]
    n: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// File stem (default: the combiner name).
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct FindToyArgs {
    /// Lengths as a list (6,7,8) or a range (6..13, inclusive).
    #[arg(long, default_value = "6..13")]
    lengths: String,
    #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
    budget: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output register file (default: stdout).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PeriodArgs {
    /// Register parameter file.
    #[arg(long)]
    registers: PathBuf,
    /// Register name (default: the only register in the file).
    #[arg(long)]
    name: Option<String>,
    /// Start state as hex, bit i = cell x_i (default 1).
    #[arg(long, default_value = "1")]
    state: String,
    /// Lift the length guard.
    #[arg(long)]
    allow_long: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit::code_for(&e),
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: exit::IO,
        message: format!("{}: {e}", path.display()),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn write_file(path: &Path, data: impl AsRef<[u8]>) -> CmdResult {
    fs::write(path, data).map_err(|e| io_failure(path, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet {
        log::LevelFilter::Error
    } else {
        match cli.verbose {
            0 => log::LevelFilter::Info,
            1 => log::LevelFilter::Debug,
            _ => log::LevelFilter::Trace,
        }
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .format_target(false)
        .init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Analyze { file, n_vars } => cmd_analyze(&file, n_vars),
        Command::Keystream(a) => cmd_keystream(a),
        Command::CalcN(a) => cmd_calc_n(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Challenge(ChallengeCommand::Make(a)) => cmd_make(a),
        Command::Challenge(ChallengeCommand::Solve { bundle, scan }) => cmd_solve(&bundle, &scan),
        Command::Challenge(ChallengeCommand::Verify { bundle, key, report }) => {
            cmd_verify(&bundle, key, report.as_deref())
        }
        Command::FindToyRegisters(a) => cmd_find_toy(a),
        Command::Period(a) => cmd_period(a),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn cmd_analyze(file: &Path, n_vars: Option<usize>) -> CmdResult {
    let parsed = parse_anf(&read_text(file)?, n_vars)?;
    for m in &parsed.cancelled {
        log::warn!("monomial {m} appears an even number of times and cancels");
    }
    let r = analyze(&parsed.poly)?;
    let mut out = String::new();
    let _ = writeln!(out, "n={}", r.n_vars);
    let _ = writeln!(out, "monomials={}", parsed.poly.len());
    let _ = writeln!(out, "degree={}", r.degree);
    let _ = writeln!(out, "weight={}", r.weight);
    let _ = writeln!(out, "nonlinearity={}", r.nonlinearity);
    match r.bent {
        Some(b) => {
            let _ = writeln!(out, "bent={b}");
        }
        None => {
            let _ = writeln!(out, "bent=n/a");
        }
    }
    match r.algebraic_immunity {
        Some(ai) => {
            let _ = writeln!(out, "algebraic_immunity={ai}");
        }
        None => {
            let _ = writeln!(out, "algebraic_immunity=n/a");
        }
    }
    let _ = writeln!(out, "walsh_min={}", r.walsh_min);
    let _ = writeln!(out, "walsh_max={}", r.walsh_max);
    let max_abs = r.walsh_min.unsigned_abs().max(r.walsh_max.unsigned_abs());
    let best = 0.5 + f64::from(max_abs) / 2f64.powi(r.n_vars as i32 + 1);
    let _ = writeln!(out, "best_affine_p={best}");
    for (i, p) in r.single_var_p.iter().enumerate() {
        let _ = writeln!(out, "p.x{i}={p}");
    }
    if r.bent == Some(false) && r.n_vars % 2 == 0 && !parsed.cancelled.is_empty() {
        log::warn!("not bent; the cancelled terms suggest a transcription error");
    }
    print!("{out}");
    Ok(())
}

fn write_keystream(path: &Path, z: &Keystream, text: bool) -> CmdResult {
    if text || is_text_keystream_path(path) {
        write_file(path, encode_keystream_text(z))
    } else {
        write_file(path, encode_keystream(z))
    }
}

fn cmd_keystream(a: KeystreamArgs) -> CmdResult {
    let spec = load_combiner_spec(&a.spec)?;
    let (key, seed) = match a.key {
        Some(hex) => (decode_key(&hex, &spec)?, None),
        None => {
            let seed = a.seed.unwrap_or_else(|| rand::thread_rng().gen());
            log::info!("random key from seed {seed}");
            (keygen(&spec, &mut ChaCha8Rng::seed_from_u64(seed)), Some(seed))
        }
    };
    let z = keystream(&spec, &key, a.n)?;
    write_keystream(&a.out, &z, a.text)?;
    println!("spec={}", spec.name());
    println!("key={}", encode_key(&key));
    if let Some(s) = seed {
        println!("seed={s}");
    }
    println!("n={}", a.n);
    println!("out={}", a.out.display());
    Ok(())
}

fn resolve_targets(spec: &CombinerSpec, names: &[String]) -> Result<Vec<usize>, Failure> {
    names
        .iter()
        .map(|n| {
            spec.register_index(n).ok_or_else(|| {
                Error::Validation(format!("spec `{}` has no register `{n}`", spec.name())).into()
            })
        })
        .collect()
}

fn cmd_calc_n(a: CalcNArgs) -> CmdResult {
    let (p, l) = match (&a.spec, a.p) {
        (Some(path), _) => {
            let spec = load_combiner_spec(path)?;
            let targets = resolve_targets(&spec, &a.registers)?;
            let (p, _) = target_bias(&spec, &targets)?;
            (p, targets.iter().map(|&i| spec.registers()[i].length()).sum())
        }
        (None, Some(p)) => {
            let l = a.l.ok_or_else(|| Failure {
                code: exit::USAGE,
                message: "--L is required with --p".into(),
            })?;
            (p, l)
        }
        (None, None) => unreachable!("clap requires --p or --spec"),
    };
    let n = required_keystream(p, l)?;
    let mut params = AttackParams::new(p, l, n as usize)?.with_p_m(a.p_m)?;
    if let Some(p_f) = a.p_f {
        params = params.with_p_f(p_f)?;
    }
    let t = decision_threshold(&params)?;
    println!("p={p}");
    println!("L={l}");
    println!("n={n}");
    println!("p_f={}", params.p_f);
    println!("p_m={}", params.p_m);
    println!("threshold={t}");
    println!("exact_p_f={}", binomial_upper_tail(params.n, t, 0.5));
    println!("exact_p_m={}", binomial_lower_tail(params.n, t, params.p));
    Ok(())
}

fn emit_report(report: &AttackReport, scan: &ScanArgs) -> CmdResult {
    let kv = format_report_kv(report);
    if let Some(path) = &scan.report {
        write_file(path, &kv)?;
    }
    if scan.text {
        print!("{}", format_report_text(report));
    } else {
        print!("{kv}");
    }
    Ok(())
}

fn scan_options(scan: &ScanArgs) -> ScanOptions {
    ScanOptions {
        method: scan.method,
        budget: scan.budget,
        ..ScanOptions::default()
    }
}

/// Runs a whole-key recovery and reports it; miss and infeasibility still
/// produce a report before the error exit.
fn run_full(spec: &CombinerSpec, z: &Keystream, n: usize, scan: &ScanArgs, extra: &[(&str, String)]) -> CmdResult {
    let mut opts = FullKeyOptions::new(n);
    opts.p_f = scan.p_f;
    opts.p_m = scan.p_m;
    opts.scan = scan_options(scan);
    let result = recover_full_key(spec, z, &opts);
    let (mut report, failure) = match result {
        Ok(res) => (AttackReport::from_full(spec, &res), None),
        Err(e) => match status_for(&e) {
            Some(status) => (AttackReport::failure(spec, "full", status, &e.to_string()), Some(e)),
            None => return Err(e.into()),
        },
    };
    for (k, v) in extra {
        report.push(*k, v);
    }
    emit_report(&report, scan)?;
    failure.map_or(Ok(()), |e| Err(e.into()))
}

fn status_for(e: &Error) -> Option<ReportStatus> {
    match e {
        Error::Miss(_) => Some(ReportStatus::Miss),
        Error::Infeasible(_) => Some(ReportStatus::Infeasible),
        _ => None,
    }
}

fn load_keystream(path: &Path, declared: Option<usize>) -> Result<Keystream, Failure> {
    let bytes = fs::read(path).map_err(|e| io_failure(path, e))?;
    Ok(load_keystream_bytes(&bytes, declared, is_text_keystream_path(path))?)
}

fn cmd_attack(a: AttackArgs) -> CmdResult {
    let spec = load_combiner_spec(&a.spec)?;
    let z = load_keystream(&a.keystream, a.bits)?;
    let n = a.n.unwrap_or(z.len());
    if n > z.len() {
        return Err(Error::Domain(format!("keystream file holds {} bits, N = {n} requested", z.len())).into());
    }
    if a.full {
        return run_full(&spec, &z, n, &a.scan, &[]);
    }
    let targets = resolve_targets(&spec, &a.registers)?;
    let mut params = AttackParams::for_targets(&spec, &targets, n)?.with_p_m(a.scan.p_m)?;
    if let Some(p_f) = a.scan.p_f {
        params = params.with_p_f(p_f)?;
    }
    match recover_register(&spec, &targets, &z, &params, &scan_options(&a.scan)) {
        Ok(list) => {
            let report = AttackReport::from_scan(&spec, &list);
            emit_report(&report, &a.scan)?;
            if list.entries.is_empty() {
                return Err(Failure {
                    code: exit::MISS,
                    message: format!("no candidate reached the threshold {}", list.threshold),
                });
            }
            Ok(())
        }
        Err(e) => match status_for(&e) {
            Some(status) => {
                emit_report(&AttackReport::failure(&spec, "register", status, &e.to_string()), &a.scan)?;
                Err(e.into())
            }
            None => Err(e.into()),
        },
    }
}

fn attack_requirement(spec: &CombinerSpec) -> Result<u64, Error> {
    let mut need = 0;
    for i in 0..spec.registers().len() {
        let (p, _) = target_bias(spec, &[i])?;
        need = need.max(required_keystream(p, spec.registers()[i].length())?);
    }
    Ok(need)
}

fn cmd_make(a: MakeArgs) -> CmdResult {
    let spec = load_combiner_spec(&a.spec)?;
    let name = a.name.unwrap_or_else(|| spec.name().to_string());
    let seed = a.seed.unwrap_or_else(|| rand::thread_rng().gen());
    log::info!("challenge seed {seed}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key = keygen(&spec, &mut rng);
    let salt: [u8; 16] = rng.gen();
    let z = keystream(&spec, &key, a.n)?;
    match attack_requirement(&spec) {
        Ok(need) if (a.n as u64) < need => log::warn!(
            "N = {} is below the {need} bits the correlation attack needs; the challenge may be unsolvable by it",
            a.n
        ),
        Ok(_) => {}
        Err(e) => log::warn!("attack requirement unavailable: {e}"),
    }
    fs::create_dir_all(&a.out).map_err(|e| io_failure(&a.out, e))?;
    let reg_file = format!("{name}.reg");
    let spec_file = format!("{name}.cbs");
    let bits_file = format!("{name}.bits");
    write_file(&a.out.join(&reg_file), format_register_file(spec.registers()))?;
    write_file(&a.out.join(&spec_file), format_combiner_spec(&spec, &[&reg_file]))?;
    write_file(&a.out.join(&bits_file), encode_keystream(&z))?;
    let key_hex = encode_key(&key);
    let bundle = ChallengeBundle {
        name: name.clone(),
        spec: spec_file,
        keystream: bits_file,
        n: a.n,
        salt: salt.to_vec(),
        commitment: commit(&salt, &key_hex),
    };
    let bundle_path = a.out.join(format!("{name}.bundle"));
    write_file(&bundle_path, format_bundle(&bundle))?;
    let key_path = a.out.join(format!("{name}.key"));
    write_file(&key_path, format!("key={key_hex}\nseed={seed}\n"))?;
    println!("bundle={}", bundle_path.display());
    println!("secret={}", key_path.display());
    println!("n={}", a.n);
    Ok(())
}

struct LoadedBundle {
    bundle: ChallengeBundle,
    spec: CombinerSpec,
    keystream: Keystream,
}

fn load_bundle(path: &Path) -> Result<LoadedBundle, Failure> {
    let bundle = parse_bundle(&read_text(path)?)?;
    let dir = path.parent().unwrap_or(Path::new(""));
    let spec = load_combiner_spec(&dir.join(&bundle.spec))?;
    let keystream = load_keystream(&dir.join(&bundle.keystream), Some(bundle.n))?;
    Ok(LoadedBundle {
        bundle,
        spec,
        keystream,
    })
}

fn cmd_solve(path: &Path, scan: &ScanArgs) -> CmdResult {
    let b = load_bundle(path)?;
    let extra = [("bundle", b.bundle.name.clone())];
    run_full(&b.spec, &b.keystream, b.bundle.n, scan, &extra)
}

fn cmd_verify(path: &Path, key: Option<String>, report: Option<&Path>) -> CmdResult {
    let b = load_bundle(path)?;
    let key_hex = match (key, report) {
        (Some(k), _) => k,
        (None, Some(r)) => {
            let rep = parse_report_kv(&read_text(r)?)?;
            rep.get("key.0")
                .ok_or_else(|| Failure {
                    code: exit::VERIFICATION,
                    message: format!("report {} carries no key", r.display()),
                })?
                .to_string()
        }
        (None, None) => unreachable!("clap requires --key or --report"),
    };
    let key: Key = decode_key(&key_hex, &b.spec)?;
    let committed = b.bundle.verify_commitment(&encode_key(&key));
    let regenerated = keystream(&b.spec, &key, b.bundle.n)? == b.keystream;
    println!("commitment={}", if committed { "ok" } else { "mismatch" });
    println!("keystream={}", if regenerated { "ok" } else { "mismatch" });
    println!("verified={}", committed && regenerated);
    if committed && regenerated {
        Ok(())
    } else {
        Err(Failure {
            code: exit::VERIFICATION,
            message: "key does not match the challenge".into(),
        })
    }
}

fn parse_lengths(s: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure {
        code: exit::USAGE,
        message: format!("bad length list `{s}`"),
    };
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn cmd_find_toy(a: FindToyArgs) -> CmdResult {
    let lengths = parse_lengths(&a.lengths)?;
    let specs = find_toy_max_period_specs(&lengths, a.budget, a.seed)?;
    let mut text = format!(
        "# Maximum-period toy registers, seed {}. Each was checked to cycle\n# through all 2^L - 1 nonzero states.\n",
        a.seed
    );
    text.push_str(&format_register_file(&specs));
    match &a.out {
        Some(path) => {
            write_file(path, &text)?;
            for s in &specs {
                println!("register={} length={} monomials={}", s.name(), s.length(), s.feedback().len());
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_period(a: PeriodArgs) -> CmdResult {
    let specs = parse_register_file(&read_text(&a.registers)?)?;
    let spec = match &a.name {
        Some(n) => specs.iter().find(|s| s.name() == n).ok_or_else(|| {
            Failure::from(Error::Validation(format!("no register `{n}` in {}", a.registers.display())))
        })?,
        None if specs.len() == 1 => &specs[0],
        None => {
            return Err(Failure {
                code: exit::USAGE,
                message: "the file holds several registers; pick one with --name".into(),
            })
        }
    };
    let digits = a.state.trim().trim_start_matches("0x");
    let bits = u64::from_str_radix(digits, 16).map_err(|_| {
        Failure::from(Error::Parse {
            line: None,
            message: format!("bad state `{}`", a.state),
        })
    })?;
    if spec.length() < 64 && bits >> spec.length() != 0 {
        return Err(Error::Domain(format!("state {:#x} wider than {} cells", bits, spec.length())).into());
    }
    let start = RegisterState::new(spec.length(), bits)?;
    let t = std::time::Instant::now();
    let p = period(spec, start, a.allow_long)?;
    let full = spec.length() < 64 && p == (1u64 << spec.length()) - 1;
    println!("register={}", spec.name());
    println!("length={}", spec.length());
    println!("start={bits:x}");
    println!("period={p}");
    println!("max_period={full}");
    println!("wall_ms={}", t.elapsed().as_millis());
    Ok(())
}
