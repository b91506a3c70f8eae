use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cipherbent_cli::exit;
use cipherbent_core::combiner::{decode_key, load_combiner_spec};
use cipherbent_core::wordalg::catalog::word_keystream;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cipherbent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(o: &Output, key: &str) -> Option<String> {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
}

fn code(o: &Output) -> u8 {
    o.status.code().expect("exited normally") as u8
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TOY_KEY: &str = "daefa327b39110f6";
const TOY_FIRST_64: &str = "1011111011011000100010011000001001101000101100110110111001100111";

#[test]
fn analyze_corrected_combiner() {
    let o = run(&["analyze", s(&data("bent6.anf"))]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    assert_eq!(field(&o, "bent").as_deref(), Some("true"));
    assert_eq!(field(&o, "nonlinearity").as_deref(), Some("28"));
    assert_eq!(field(&o, "degree").as_deref(), Some("2"));
    assert_eq!(field(&o, "weight").as_deref(), Some("28"));
    assert_eq!(field(&o, "best_affine_p").as_deref(), Some("0.5625"));
    assert_eq!(field(&o, "p.x4").as_deref(), Some("0.5625"));
}

#[test]
fn analyze_printed_combiner_warns() {
    let o = run(&["analyze", s(&data("printed_combiner.anf"))]);
    assert_eq!(code(&o), exit::OK);
    assert_eq!(field(&o, "bent").as_deref(), Some("false"));
    assert_eq!(field(&o, "monomials").as_deref(), Some("1"));
    let err = stderr(&o);
    assert!(err.contains("x0x3") && err.contains("cancels"), "{err}");
}

#[test]
fn analyze_empty_file_is_zero_function() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("zero.anf");
    fs::write(&f, "# nothing\n").unwrap();
    let o = run(&["analyze", s(&f), "--n-vars", "4"]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    assert_eq!(field(&o, "weight").as_deref(), Some("0"));
    assert_eq!(field(&o, "bent").as_deref(), Some("false"));
}

#[test]
fn analyze_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.anf");
    fs::write(&f, "x0 y1\n").unwrap();
    assert_eq!(code(&run(&["analyze", s(&f)])), exit::PARSE);
    assert_eq!(code(&run(&["analyze", s(&dir.path().join("missing"))])), exit::IO);
}

#[test]
fn keystream_fixture_and_word_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z.txt");
    let o = run(&["keystream", "--spec", s(&data("toy6.cbs")), "--key", TOY_KEY, "-n", "64", "-o", s(&out)]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let bits = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(bits, TOY_FIRST_64);

    let spec = load_combiner_spec(&data("toy6.cbs")).unwrap();
    let key = decode_key(TOY_KEY, &spec).unwrap();
    let word = word_keystream(&spec, &key, 64).unwrap();
    assert_eq!(word.bits().to_text(), TOY_FIRST_64);
}

#[test]
fn keystream_zero_length_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.bits");
    let b = dir.path().join("b.bits");
    let spec = data("toy6.cbs");
    let o = run(&["keystream", "--spec", s(&spec), "--random", "--seed", "9", "-n", "0", "-o", s(&a)]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    assert!(fs::read(&a).unwrap().is_empty());

    let o1 = run(&["keystream", "--spec", s(&spec), "--random", "--seed", "9", "-n", "3001", "-o", s(&a)]);
    let o2 = run(&["keystream", "--spec", s(&spec), "--random", "--seed", "9", "-n", "3001", "-o", s(&b)]);
    assert_eq!(field(&o1, "key"), field(&o2, "key"));
    assert_eq!(field(&o1, "seed").as_deref(), Some("9"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(fs::read(&a).unwrap().len(), 376);
}

#[test]
fn keystream_rejects_wrong_key_length() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "keystream", "--spec", s(&data("toy6.cbs")), "--key", "abcd", "-n", "8", "-o",
        s(&dir.path().join("z.bits")),
    ]);
    assert_eq!(code(&o), exit::PARSE);
}

#[test]
fn calc_n_values() {
    let o = run(&["calc-n", "--p", "0.5625", "--L", "33"]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    assert_eq!(field(&o, "n").as_deref(), Some("7887"));
    let o = run(&["calc-n", "--p", "0.5625", "--l", "27"]);
    assert_eq!(field(&o, "n").as_deref(), Some("6823"));
    assert_eq!(code(&run(&["calc-n", "--p", "0.5", "--L", "10"])), exit::VALIDATION);
    assert_eq!(code(&run(&["calc-n", "--p", "0.7"])), exit::USAGE);
}

#[test]
fn calc_n_from_spec_matches_explicit_p() {
    let spec = data("cipherbent6.cbs");
    let from_spec = run(&["calc-n", "--spec", s(&spec), "--registers", "S27"]);
    let explicit = run(&["calc-n", "--p", "0.5625", "--L", "27"]);
    assert_eq!(code(&from_spec), exit::OK, "{}", stderr(&from_spec));
    assert_eq!(stdout(&from_spec), stdout(&explicit));

    let joint = run(&["calc-n", "--spec", s(&spec), "--registers", "S27,S31"]);
    assert_eq!(field(&joint, "p").as_deref(), Some("0.4375"));
    assert_eq!(field(&joint, "L").as_deref(), Some("58"));

    // A bent combiner leaves no mask unbiased.
    let pair = run(&["calc-n", "--spec", s(&spec), "--registers", "S27,S28"]);
    assert_eq!(code(&pair), exit::OK);
    assert!(matches!(field(&pair, "p").as_deref(), Some("0.5625" | "0.4375")));
    let unknown = run(&["calc-n", "--spec", s(&spec), "--registers", "Q1"]);
    assert_eq!(code(&unknown), exit::VALIDATION);
}

fn toy_keystream(dir: &Path, n: usize) -> PathBuf {
    let out = dir.join("z.bits");
    let o = run(&[
        "keystream", "--spec", s(&data("toy6.cbs")), "--key", TOY_KEY, "-n", &n.to_string(), "-o", s(&out),
    ]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    out
}

#[test]
fn attack_recovers_register() {
    let dir = tempfile::tempdir().unwrap();
    let z = toy_keystream(dir.path(), 5000);
    let spec = load_combiner_spec(&data("toy6.cbs")).unwrap();
    let key = decode_key(TOY_KEY, &spec).unwrap();
    let t13 = format!("{:x}", key.states()[5].bits());
    let report = dir.path().join("r.kv");
    let o = run(&[
        "attack", "--spec", s(&data("toy6.cbs")), "--keystream", s(&z), "--bits", "5000", "--registers", "T13",
        "--report", s(&report),
    ]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    assert_eq!(field(&o, "status").as_deref(), Some("success"));
    let top = field(&o, "candidate.0").unwrap();
    assert_eq!(top.split(' ').next(), Some(t13.as_str()));
    assert_eq!(fs::read_to_string(&report).unwrap(), stdout(&o));
    for k in ["candidates_scanned", "register_clocks", "bit_comparisons", "threshold", "exact_p_f"] {
        assert!(field(&o, k).is_some(), "missing {k}");
    }
}

#[test]
fn attack_methods_agree_on_cli() {
    let dir = tempfile::tempdir().unwrap();
    let z = toy_keystream(dir.path(), 4000);
    let list = |m: &str| {
        let o = run(&[
            "attack", "--spec", s(&data("toy6.cbs")), "--keystream", s(&z), "--registers", "T8,T9", "--method",
            m, "-q",
        ]);
        assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
        stdout(&o).lines().filter(|l| l.starts_with("candidate.")).map(str::to_string).collect::<Vec<_>>()
    };
    let phase = list("phase");
    assert!(!phase.is_empty());
    assert_eq!(phase, list("naive"));
    assert_eq!(phase, list("bitsliced"));
}

#[test]
fn attack_on_truncated_keystream_fails() {
    let dir = tempfile::tempdir().unwrap();
    let z = toy_keystream(dir.path(), 800);
    let o = run(&["attack", "--spec", s(&data("toy6.cbs")), "--keystream", s(&z), "-n", "5000", "--registers", "T8"]);
    assert_eq!(code(&o), exit::VALIDATION);
    let o = run(&["attack", "--spec", s(&data("toy6.cbs")), "--keystream", s(&z), "--bits", "900", "--full"]);
    assert_eq!(code(&o), exit::PARSE);
}

#[test]
fn attack_with_too_little_keystream_reports_failure() {
    let dir = tempfile::tempdir().unwrap();
    let z = toy_keystream(dir.path(), 6);
    let o = run(&["attack", "--spec", s(&data("toy6.cbs")), "--keystream", s(&z), "--full", "-q"]);
    assert_eq!(code(&o), exit::INFEASIBLE, "{}", stderr(&o));
    assert_eq!(field(&o, "status").as_deref(), Some("infeasible"));
}

#[test]
fn challenge_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ch");
    let o = run(&[
        "challenge", "make", "--spec", s(&data("toy6.cbs")), "-n", "5000", "--out", s(&out), "--seed", "21",
    ]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    assert!(!stderr(&o).contains("below"), "{}", stderr(&o));
    for ext in ["reg", "cbs", "bits", "bundle", "key"] {
        assert!(out.join(format!("toy6.{ext}")).exists(), "{ext}");
    }
    let bundle = out.join("toy6.bundle");
    let secret = fs::read_to_string(out.join("toy6.key")).unwrap();
    let key = secret.lines().find_map(|l| l.strip_prefix("key=")).unwrap().to_string();

    let report = dir.path().join("solve.kv");
    let o = run(&["challenge", "solve", s(&bundle), "--report", s(&report), "-q"]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    assert_eq!(field(&o, "key.0").as_deref(), Some(key.as_str()));
    assert_eq!(field(&o, "keys").as_deref(), Some("1"));

    let o = run(&["challenge", "verify", s(&bundle), "--report", s(&report)]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    assert_eq!(field(&o, "verified").as_deref(), Some("true"));
    let o = run(&["challenge", "verify", s(&bundle), "--key", &key]);
    assert_eq!(code(&o), exit::OK);

    // The directory is self-contained: it still works after a move.
    let moved = dir.path().join("moved");
    fs::rename(&out, &moved).unwrap();
    let o = run(&["challenge", "verify", s(&moved.join("toy6.bundle")), "--key", &key]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
}

#[test]
fn challenge_verify_rejects_wrong_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["challenge", "make", "--spec", s(&data("toy6.cbs")), "-n", "300", "--out", s(dir.path()), "--seed", "4"]);
    assert_eq!(code(&o), exit::OK);
    let secret = fs::read_to_string(dir.path().join("toy6.key")).unwrap();
    let key = secret.lines().find_map(|l| l.strip_prefix("key=")).unwrap();
    // Flip one bit of the first register, keeping the padding bit clear.
    let mut bytes = hex::decode(key).unwrap();
    bytes[0] ^= 0x80;
    if bytes[0] == 0 {
        bytes[0] ^= 0x40;
    }
    let wrong = hex::encode(&bytes);
    let o = run(&["challenge", "verify", s(&dir.path().join("toy6.bundle")), "--key", &wrong]);
    assert_eq!(code(&o), exit::VERIFICATION, "{}", stderr(&o));
    assert_eq!(field(&o, "commitment").as_deref(), Some("mismatch"));
    assert_eq!(field(&o, "verified").as_deref(), Some("false"));
}

#[test]
fn challenge_make_warns_on_short_keystream() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["challenge", "make", "--spec", s(&data("toy6.cbs")), "-n", "300", "--out", s(dir.path()), "--seed", "4"]);
    assert_eq!(code(&o), exit::OK);
    assert!(stderr(&o).contains("below"), "{}", stderr(&o));
}

#[test]
fn challenge_bundle_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["challenge", "make", "--spec", s(&data("toy6.cbs")), "-n", "300", "--out", s(dir.path()), "--seed", "4"]);
    assert_eq!(code(&o), exit::OK);
    let bundle = dir.path().join("toy6.bundle");
    let text = fs::read_to_string(&bundle).unwrap();
    fs::write(&bundle, text.replace("format=", "format=x")).unwrap();
    assert_eq!(code(&run(&["challenge", "solve", s(&bundle)])), exit::PARSE);
}

#[test]
fn find_toy_registers_and_period() {
    let dir = tempfile::tempdir().unwrap();
    let reg = dir.path().join("toy.reg");
    let o = run(&["find-toy-registers", "--lengths", "6,9,11", "-o", s(&reg)]);
    assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
    for (name, full) in [("T6", 63u64), ("T9", 511), ("T11", 2047)] {
        let o = run(&["period", "--registers", s(&reg), "--name", name]);
        assert_eq!(code(&o), exit::OK, "{}", stderr(&o));
        assert_eq!(field(&o, "period"), Some(full.to_string()));
        assert_eq!(field(&o, "max_period").as_deref(), Some("true"));
    }
    assert_eq!(code(&run(&["find-toy-registers", "--lengths", "40"])), exit::CAPACITY);
}

#[test]
fn shipped_toy_registers_are_max_period() {
    for l in 6..=13u32 {
        let name = format!("T{l}");
        let o = run(&["period", "--registers", s(&data("toy.reg")), "--name", &name]);
        assert_eq!(field(&o, "period"), Some(((1u64 << l) - 1).to_string()), "{name}");
    }
}

#[test]
fn period_guards() {
    let dir = tempfile::tempdir().unwrap();
    let reg = dir.path().join("long.reg");
    fs::write(&reg, "register R40 40\nx0\nx3\n").unwrap();
    let o = run(&["period", "--registers", s(&reg)]);
    assert_eq!(code(&o), exit::CAPACITY, "{}", stderr(&o));
    let o = run(&["period", "--registers", s(&data("toy.reg")), "--name", "T6", "--state", "0"]);
    assert_eq!(code(&o), exit::VALIDATION, "{}", stderr(&o));
    let o = run(&["period", "--registers", s(&data("toy.reg")), "--name", "T6", "--state", "ff"]);
    assert_eq!(code(&o), exit::VALIDATION, "{}", stderr(&o));
    let o = run(&["period", "--registers", s(&data("toy.reg"))]);
    assert_eq!(code(&o), exit::USAGE);
}
