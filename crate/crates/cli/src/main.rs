use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankone::analysis::{
    ab_law_checks, classify, classify_totally, good_density, insert_ones, propagate_goodness, shift_pair, CandidatePair,
    Total, Verdict,
};
use rankone::inverseiso::{check_non_isomorphism, decide_inverse_isomorphic, Basis, InverseError, Status};
use rankone::params::{
    check_sufficient_conditions, check_partially_bounded, normalize, parse_spec, stage_table, CheckMode, SufficientReport,
    ParameterSpec, PartialBoundedness, PartialBoundednessCertificate, VerifiedMode,
};
use rankone::registry;
use rankone::tower::{NameWindow, Tower, TowerPoint};
use rankone::words::{build_word, LazyWord, Word, WordError};
use serde_json::{json, Value};

const OK: u8 = 0;
const NEGATIVE: u8 = 1;
const INPUT: u8 = 2;
const INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "rankone", version, about = "Exact tools for rank-one cutting-and-stacking transformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Registry name or path to a spec file.
    #[arg(long, default_value = "chacon")]
    spec: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print w_n, or one letter of it with --at.
    Word {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        /// Index into w_n; accepts forms like 10^9.
        #[arg(long)]
        at: Option<String>,
        /// Materialize at most this many letters; longer words are streamed.
        #[arg(long, default_value_t = rankone::words::DEFAULT_CAP)]
        cap: u64,
    },
    /// Partial boundedness certificate and the sufficient-condition report.
    Check {
        #[command(flatten)]
        common: Common,
        /// Last stage of the numeric fallback.
        #[arg(long, default_value_t = 64)]
        horizon: usize,
    },
    /// Trace T (or its inverse) from a point n:j:p/q.
    Orbit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long)]
        inverse: bool,
    },
    /// Name window of a point over a:b (half-open).
    Name {
        #[command(flatten)]
        common: Common,
        /// Point n:j:p/q; sampled from C_n with --seed when omitted.
        #[arg(long)]
        point: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Classify occurrences of w_n in x by their images in y.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kappa: Option<usize>,
        /// Stage for the totally good/bad classification.
        #[arg(long)]
        m: Option<usize>,
        /// `word:M`, a literal 0/1 string, or `@path`.
        #[arg(long, default_value = "word:4")]
        x: String,
        /// `shift:L`, `insert:POS:COUNT`, a literal 0/1 string, or `@path`.
        #[arg(long, default_value = "shift:0")]
        y: String,
        /// Name index of the first letter of literal windows.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        anchor: i64,
    },
    /// Isomorphism with the inverse, or non-isomorphism against a second spec.
    Inverse {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        against: Option<String>,
        /// Cycle periods searched before giving up.
        #[arg(long, default_value_t = rankone::inverseiso::DEFAULT_HORIZON_PERIODS)]
        horizon: usize,
    },
}

struct Outcome {
    code: u8,
    text: String,
    json: Value,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match &cli.command {
        Command::Word { common, .. }
        | Command::Check { common, .. }
        | Command::Orbit { common, .. }
        | Command::Name { common, .. }
        | Command::Analyze { common, .. }
        | Command::Inverse { common, .. } => common.format,
    };
    match run(cli.command) {
        Ok(Some(out)) => {
            match format {
                Format::Text => println!("{}", out.text),
                Format::Json => println!("{}", out.json),
            }
            ExitCode::from(out.code)
        }
        Ok(None) => ExitCode::from(OK),
        Err(e) => {
            match format {
                Format::Text => eprintln!("error: {e:#}"),
                Format::Json => println!("{}", json!({ "error": format!("{e:#}") })),
            }
            ExitCode::from(INPUT)
        }
    }
}

fn load_spec(source: &str) -> Result<ParameterSpec> {
    if let Some(spec) = registry::lookup(source) {
        return Ok(spec);
    }
    let path = Path::new(source);
    if !path.exists() {
        bail!("unknown spec {source:?}; registry names are {}", registry::NAMES.join(", "));
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {source}"))?;
    Ok(parse_spec(&text)?)
}

fn load_normalized(source: &str) -> Result<ParameterSpec> {
    Ok(normalize(&load_spec(source)?)?)
}

/// Decimal integers, optionally written `b^e`.
fn parse_big(s: &str) -> Result<BigUint> {
    match s.split_once('^') {
        Some((b, e)) => Ok(b.trim().parse::<BigUint>()?.pow(e.trim().parse::<u32>()?)),
        None => Ok(s.trim().parse::<BigUint>()?),
    }
}

fn parse_window(s: &str) -> Result<(i64, i64)> {
    let (a, b) = s.split_once(':').ok_or_else(|| anyhow!("window must be a:b, got {s:?}"))?;
    let (a, b) = (a.trim().parse::<i64>()?, b.trim().parse::<i64>()?);
    if a > b {
        bail!("window start {a} exceeds end {b}");
    }
    Ok((a, b))
}

fn run(command: Command) -> Result<Option<Outcome>> {
    match command {
        Command::Word { common, n, at, cap } => cmd_word(&common, n, at.as_deref(), cap),
        Command::Check { common, horizon } => cmd_check(&common, horizon).map(Some),
        Command::Orbit { common, point, steps, inverse } => cmd_orbit(&common, &point, steps, inverse).map(Some),
        Command::Name { common, point, window, n, seed } => {
            cmd_name(&common, point.as_deref(), &window, n, seed).map(Some)
        }
        Command::Analyze { common, n, kappa, m, x, y, anchor } => {
            cmd_analyze(&common, n, kappa, m, &x, &y, anchor).map(Some)
        }
        Command::Inverse { common, against, horizon } => cmd_inverse(&common, against.as_deref(), horizon).map(Some),
    }
}

fn cmd_word(common: &Common, n: usize, at: Option<&str>, cap: u64) -> Result<Option<Outcome>> {
    let spec = load_normalized(&common.spec)?;
    if let Some(at) = at {
        let j = parse_big(at)?;
        let lazy = LazyWord::new(&spec, n)?;
        let addr = lazy.letter_at(n, &j)?;
        let letter = addr.letter();
        return Ok(Some(Outcome {
            code: OK,
            text: letter.to_string(),
            json: json!({ "stage": n, "index": j.to_string(), "letter": letter }),
        }));
    }
    match build_word(&spec, n, cap) {
        Ok(w) => {
            let text = w.letters.to_string();
            Ok(Some(Outcome {
                code: OK,
                json: json!({ "stage": n, "length": w.len(), "word": text }),
                text,
            }))
        }
        Err(WordError::CapExceeded { .. }) if common.format == Format::Text => {
            stream_word(&spec, n)?;
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

/// Write w_n to stdout without materializing it.
fn stream_word(spec: &ParameterSpec, n: usize) -> Result<()> {
    let table = stage_table(spec, n + 1);
    let mut out = BufWriter::new(io::stdout().lock());
    fn emit(table: &[rankone::params::ConcreteStage], n: usize, out: &mut impl Write) -> io::Result<()> {
        if n == 0 {
            return out.write_all(b"0");
        }
        let st = &table[n - 1];
        emit(table, n - 1, out)?;
        for s in &st.spacers {
            let mut left = s.clone();
            let chunk = BigUint::from(1u32 << 16);
            let ones = [b'1'; 1 << 16];
            while left > BigUint::default() {
                let take = if left > chunk { 1usize << 16 } else { usize::try_from(&left).expect("below chunk") };
                out.write_all(&ones[..take])?;
                left -= take;
            }
            emit(table, n - 1, out)?;
        }
        Ok(())
    }
    emit(&table, n, &mut out)?;
    writeln!(out)?;
    Ok(out.flush()?)
}

fn mode_json(mode: &VerifiedMode) -> Value {
    match mode {
        VerifiedMode::Symbolic => json!({ "kind": "symbolic" }),
        VerifiedMode::NumericUpTo(m) => json!({ "kind": "numeric", "up_to": m }),
    }
}

fn mode_text(mode: &VerifiedMode) -> String {
    match mode {
        VerifiedMode::Symbolic => "symbolic".into(),
        VerifiedMode::NumericUpTo(m) => format!("numeric up to stage {m}"),
    }
}

fn certificate_json(c: &PartialBoundednessCertificate) -> Value {
    json!({
        "cut_bound": c.cut_bound,
        "spread_bound": c.spread_bound.to_string(),
        "threshold": c.threshold,
        "mode": mode_json(&c.mode),
    })
}

fn cmd_check(common: &Common, horizon: usize) -> Result<Outcome> {
    let raw = load_spec(&common.spec)?;
    let spec = normalize(&raw)?;
    let mut result = check_partially_bounded(&spec, CheckMode::Symbolic)?;
    let mut fallback = None;
    if let PartialBoundedness::FallBackToNumeric { reason } = &result {
        fallback = Some(reason.clone());
        result = check_partially_bounded(&spec, CheckMode::NumericUpTo(horizon))?;
    }
    let lemma = (!raw.is_normalized()).then(|| check_sufficient_conditions(&raw));
    let lemma_json = match &lemma {
        None => json!({ "status": "not_applicable", "reason": "the conditions concern raw presentations" }),
        Some(lemma) => match lemma {
        SufficientReport::Holds { cut_bound, spacer_bound, threshold } => json!({
            "status": "holds", "cut_bound": cut_bound, "spacer_bound": spacer_bound.to_string(), "threshold": threshold,
        }),
        SufficientReport::Fails { reason } => json!({ "status": "fails", "reason": reason }),
        SufficientReport::Undecided { reason } => json!({ "status": "undecided", "reason": reason }),
        },
    };
    let lemma_text = match &lemma {
        None => "sufficient conditions: not applicable to a normalized presentation".to_string(),
        Some(lemma) => match lemma {
        SufficientReport::Holds { cut_bound, spacer_bound, threshold } => {
            format!("sufficient conditions: hold (cuts <= {cut_bound}, spacers < {spacer_bound}, from stage {threshold})")
        }
        SufficientReport::Fails { reason } => format!("sufficient conditions: fail ({reason})"),
        SufficientReport::Undecided { reason } => format!("sufficient conditions: undecided ({reason})"),
        },
    };
    let (code, text, verdict) = match &result {
        PartialBoundedness::Certified(c) => (
            OK,
            format!(
                "partially bounded: R={} S={} N={} ({})",
                c.cut_bound,
                c.spread_bound,
                c.threshold,
                mode_text(&c.mode)
            ),
            json!({ "status": "certified", "certificate": certificate_json(c) }),
        ),
        PartialBoundedness::Refuted(r) => (
            NEGATIVE,
            format!("not partially bounded: {r}"),
            json!({
                "status": "refuted",
                "condition": r.condition, "stage": r.stage, "i": r.i, "j": r.j, "detail": r.detail,
            }),
        ),
        PartialBoundedness::FallBackToNumeric { reason } => (
            INCONCLUSIVE,
            format!("undecided: {reason}"),
            json!({ "status": "undecided", "reason": reason }),
        ),
    };
    Ok(Outcome {
        code,
        text: format!("spec: {}\n{text}\n{lemma_text}", spec.name),
        json: json!({
            "spec": spec.name,
            "partial_boundedness": verdict,
            "symbolic_fallback": fallback,
            "sufficient_conditions": lemma_json,
        }),
    })
}

fn cmd_orbit(common: &Common, point: &str, steps: usize, inverse: bool) -> Result<Outcome> {
    let spec = load_normalized(&common.spec)?;
    let tower = Tower::new(&spec)?;
    let mut p: TowerPoint = point.parse()?;
    tower.validate(&p)?;
    let mut trace = vec![p.clone()];
    for _ in 0..steps {
        p = if inverse { tower.apply_t_inverse(&p)? } else { tower.apply_t(&p)? };
        trace.push(p.clone());
    }
    let lines: Vec<String> = trace.iter().map(|q| q.to_string()).collect();
    Ok(Outcome {
        code: OK,
        json: json!({ "spec": spec.name, "inverse": inverse, "orbit": lines }),
        text: lines.join("\n"),
    })
}

fn cmd_name(common: &Common, point: Option<&str>, window: &str, n: usize, seed: u64) -> Result<Outcome> {
    let spec = load_normalized(&common.spec)?;
    let tower = Tower::new(&spec)?;
    let (a, b) = parse_window(window)?;
    let p = match point {
        Some(s) => s.parse::<TowerPoint>()?,
        None => tower.sample_point(n, &mut ChaCha8Rng::seed_from_u64(seed)),
    };
    let w = tower.name_window(&p, a, b)?;
    Ok(Outcome {
        code: OK,
        text: format!("point: {p}\n{w}"),
        json: json!({ "point": p.to_string(), "anchor": w.anchor, "letters": w.letters.to_string() }),
    })
}

fn literal_window(source: &str, anchor: i64) -> Result<Option<NameWindow>> {
    let text = match source.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None if source.chars().all(|c| c == '0' || c == '1') => source.to_string(),
        None => return Ok(None),
    };
    let word: Word = text.trim().parse()?;
    Ok(Some(NameWindow::from_word(anchor, word)))
}

fn build_pair_windows(spec: &ParameterSpec, x: &str, y: &str, anchor: i64) -> Result<(NameWindow, NameWindow)> {
    let base = if let Some(m) = x.strip_prefix("word:") {
        let m: usize = m.parse()?;
        NameWindow::from_word(anchor, build_word(spec, m, rankone::words::DEFAULT_CAP)?.letters)
    } else {
        literal_window(x, anchor)?.ok_or_else(|| anyhow!("unrecognised x source {x:?}"))?
    };
    if let Some(ell) = y.strip_prefix("shift:") {
        let ell: usize = ell.parse()?;
        if ell >= base.len() {
            bail!("shift {ell} leaves no overlap with a window of length {}", base.len());
        }
        return Ok(shift_pair(&base.letters, 0, base.len() - ell, ell, base.anchor));
    }
    if let Some(rest) = y.strip_prefix("insert:") {
        let (pos, count) = rest.split_once(':').ok_or_else(|| anyhow!("insert source is insert:POS:COUNT"))?;
        let (pos, count): (usize, usize) = (pos.parse()?, count.parse()?);
        if pos > base.len() || count > base.len() - pos {
            bail!("insertion {pos}:{count} does not fit a window of length {}", base.len());
        }
        let y = insert_ones(&base, pos, count);
        return Ok((base, y));
    }
    let y = literal_window(y, anchor)?.ok_or_else(|| anyhow!("unrecognised y source {y:?}"))?;
    Ok((base, y))
}

fn ratio_text(r: &Option<BigRational>) -> String {
    r.as_ref().map_or_else(|| "undefined".into(), |r| r.to_string())
}

fn cmd_analyze(
    common: &Common,
    n: usize,
    kappa: Option<usize>,
    m: Option<usize>,
    x: &str,
    y: &str,
    anchor: i64,
) -> Result<Outcome> {
    let spec = load_normalized(&common.spec)?;
    let cert = match check_partially_bounded(&spec, CheckMode::Symbolic)? {
        PartialBoundedness::Certified(c) => c,
        PartialBoundedness::FallBackToNumeric { .. } => check_partially_bounded(&spec, CheckMode::NumericUpTo(64))?
            .certificate()
            .cloned()
            .ok_or_else(|| anyhow!("spec is not partially bounded"))?,
        PartialBoundedness::Refuted(r) => bail!("spec is not partially bounded: {r}"),
    };
    let (xw, yw) = build_pair_windows(&spec, x, y, anchor)?;
    let pair = match kappa {
        Some(k) => CandidatePair::with_kappa(&spec, &cert, xw, yw, n, k)?,
        None => CandidatePair::new(&spec, &cert, xw, yw, n)?,
    };
    let records = classify(&pair)?;
    let count = |v: Verdict| records.iter().filter(|r| r.verdict == v).count();
    let density = good_density(&pair, &records);
    let ab = ab_law_checks(&pair, &records);
    let ab_violations: Vec<i64> = ab.iter().filter(|c| !c.agrees()).map(|c| c.index).collect();
    let seed = records.iter().find(|r| r.verdict == Verdict::Good && r.rho.is_some()).map(|r| r.index);
    let propagation = seed.map(|s| propagate_goodness(&pair, &records, s));
    let (prop_text, prop_json) = match &propagation {
        None => ("no good occurrence to seed from".to_string(), Value::Null),
        Some(Ok(ell)) => (format!("alignment: ell = {ell}"), json!({ "ell": ell })),
        Some(Err(e)) => (format!("propagation stopped: {e}"), json!({ "error": e.to_string() })),
    };
    let mut text = vec![
        format!("kappa = {}, n = {}", pair.kappa, pair.n),
        format!(
            "occurrences: {} (good {}, bad {}, indeterminate {})",
            records.len(),
            count(Verdict::Good),
            count(Verdict::Bad),
            count(Verdict::Indeterminate)
        ),
        format!(
            "good density: {} (threshold {}, {})",
            ratio_text(&density.ratio),
            density.threshold,
            if density.exceeds_threshold() { "above" } else { "not above" }
        ),
        format!("a=b law: {} checks, {} disagreements", ab.len(), ab_violations.len()),
        prop_text,
    ];
    let mut totals_json = Value::Null;
    if let Some(m) = m {
        let totals = classify_totally(&pair, &records, m)?;
        let tc = |v: Total| totals.iter().filter(|t| t.verdict == v).count();
        text.push(format!(
            "stage {m} occurrences: {} (totally good {}, totally bad {}, mixed {}, indeterminate {})",
            totals.len(),
            tc(Total::TotallyGood),
            tc(Total::TotallyBad),
            tc(Total::Mixed),
            tc(Total::Indeterminate)
        ));
        totals_json = json!({
            "stage": m,
            "totally_good": tc(Total::TotallyGood),
            "totally_bad": tc(Total::TotallyBad),
            "mixed": tc(Total::Mixed),
            "indeterminate": tc(Total::Indeterminate),
        });
    }
    let occurrences: Vec<Value> = records
        .iter()
        .map(|r| json!({ "index": r.index, "verdict": r.verdict.as_str(), "rho": r.rho }))
        .collect();
    Ok(Outcome {
        code: OK,
        text: text.join("\n"),
        json: json!({
            "spec": spec.name,
            "kappa": pair.kappa,
            "n": pair.n,
            "occurrences": occurrences,
            "density": {
                "good": density.good,
                "resolved": density.resolved,
                "ratio": density.ratio.as_ref().map(|r| r.to_string()),
                "threshold": density.threshold.to_string(),
                "exceeds_threshold": density.exceeds_threshold(),
            },
            "ab_law": { "checks": ab.len(), "disagreements": ab_violations },
            "propagation": prop_json,
            "totals": totals_json,
        }),
    })
}

fn basis_json(b: &Basis) -> Value {
    match b {
        Basis::Symbolic => json!({ "kind": "symbolic" }),
        Basis::NumericUpTo(m) => json!({ "kind": "numeric", "up_to": m }),
        Basis::Horizon(m) => json!({ "kind": "horizon", "up_to": m }),
        Basis::ReversedTwin => json!({ "kind": "reversed_twin" }),
    }
}

fn status_json(s: &Status) -> Value {
    match s {
        Status::Holds(b) => json!({ "status": "holds", "basis": basis_json(b) }),
        Status::Fails { stage, detail } => json!({ "status": "fails", "stage": stage, "detail": detail }),
        Status::Unknown(reason) => json!({ "status": "unknown", "reason": reason }),
    }
}

fn status_text(s: &Status) -> String {
    match s {
        Status::Holds(Basis::Symbolic) => "holds (symbolic)".into(),
        Status::Holds(Basis::NumericUpTo(m)) => format!("holds (checked to stage {m})"),
        Status::Holds(Basis::Horizon(m)) => format!("holds (blocks recur through stage {m})"),
        Status::Holds(Basis::ReversedTwin) => "holds (reversed twin, tuples never palindromic)".into(),
        Status::Fails { stage: Some(n), detail } => format!("fails at stage {n}: {detail}"),
        Status::Fails { stage: None, detail } => format!("fails: {detail}"),
        Status::Unknown(reason) => format!("not established: {reason}"),
    }
}

fn inverse_error(e: InverseError) -> Result<Outcome> {
    match e {
        InverseError::Inconclusive(reason) => Ok(Outcome {
            code: INCONCLUSIVE,
            text: format!("inconclusive: {reason}"),
            json: json!({ "status": "inconclusive", "reason": reason }),
        }),
        InverseError::NotCertified(reason) => Ok(Outcome {
            code: NEGATIVE,
            text: format!("not certified partially bounded: {reason}"),
            json: json!({ "status": "not_certified", "reason": reason }),
        }),
        other => Err(other.into()),
    }
}

fn cmd_inverse(common: &Common, against: Option<&str>, horizon: usize) -> Result<Outcome> {
    let a = load_spec(&common.spec)?;
    let Some(against) = against else {
        return match decide_inverse_isomorphic(&a, horizon) {
            Ok(v) => {
                let text = if v.isomorphic_to_inverse {
                    format!("true: spacer tuples are palindromic from stage {}", v.n.unwrap_or_default())
                } else {
                    format!("false: cycle positions {:?} are never eventually palindromic", v.never_palindromic)
                };
                Ok(Outcome {
                    code: if v.isomorphic_to_inverse { OK } else { NEGATIVE },
                    text,
                    json: json!({
                        "spec": a.name,
                        "isomorphic_to_inverse": v.isomorphic_to_inverse,
                        "n": v.n,
                        "never_palindromic": v.never_palindromic,
                        "certificate": certificate_json(&v.certificate),
                    }),
                })
            }
            Err(e) => inverse_error(e),
        };
    };
    let b = load_spec(against)?;
    let report = match check_non_isomorphism(&a, &b, horizon) {
        Ok(r) => r,
        Err(e) => return inverse_error(e),
    };
    let labels = ["commensurable parameters", "common spread bound", "spacers dominate heights", "incompatible groupings"];
    let mut text = vec![format!(
        "{} vs {}: {}",
        a.name,
        b.name,
        if report.criteria_met { "criteria met, not isomorphic" } else { "criteria not established" }
    )];
    for (label, s) in labels.iter().zip(&report.conditions) {
        text.push(format!("  {label}: {}", status_text(s)));
    }
    if let Some(first) = report.blocks.first() {
        let g = &first.grouping_a;
        text.push(format!(
            "  witness: stages {}..{} merged, q = {}, t = {}, t' = {}",
            g.from,
            g.from + g.count,
            g.q,
            g.t,
            first.t_prime
        ));
        text.push(format!("  incompatible blocks found: {}", report.blocks.len()));
    }
    let blocks: Vec<Value> = report
        .blocks
        .iter()
        .map(|blk| {
            json!({
                "from": blk.grouping_a.from,
                "count": blk.grouping_a.count,
                "q": blk.grouping_a.q.to_string(),
                "t": blk.grouping_a.t.0.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                "t_prime": blk.t_prime.0.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    let failed = report.conditions.iter().any(|s| matches!(s, Status::Fails { .. }));
    let code = if report.criteria_met {
        OK
    } else if failed {
        NEGATIVE
    } else {
        INCONCLUSIVE
    };
    Ok(Outcome {
        code,
        text: text.join("\n"),
        json: json!({
            "spec": a.name,
            "against": b.name,
            "criteria_met": report.criteria_met,
            "conditions": report.conditions.iter().map(status_json).collect::<Vec<_>>(),
            "spread_bound": report.spread_bound.as_ref().map(|s| s.to_string()),
            "from_stage": report.from_stage,
            "q_bound": report.q_bound.as_ref().map(|q| q.to_string()),
            "witnesses": blocks,
        }),
    })
}
