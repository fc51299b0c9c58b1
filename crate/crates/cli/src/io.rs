//! CSV loaders for option chains and price series, and the writers every
//! command shares.
//!
//! Files may start with `# key=value` comment lines. In a chain file the keys
//! `S0`, `r`, `q` and `T` describe the market and a default maturity; other
//! keys are ignored, so metadata written by this tool reads back cleanly.

use crate::error::{CliError, Result};
use levyq::calib::{OptionChain, OptionQuote};
use levyq::filter::LogReturnSeries;
use levyq::models::MarketEnv;
use levyq::pricing::OptionKind;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// Key/value metadata emitted ahead of every output.
pub type Meta = BTreeMap<String, String>;

/// Shortest text that parses back to the same `f64`; exponent form outside
/// [1e-4, 1e15).
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// `key=value` pairs from the leading `#` lines, keys lowercased.
pub fn sidecar(text: &str) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for line in text.lines().map(str::trim).filter(|l| l.starts_with('#')) {
        for item in line.trim_start_matches('#').split([',', ' ', '\t']) {
            if let Some((k, v)) = item.split_once('=') {
                out.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
            }
        }
    }
    out
}

/// Market environment from sidecar keys; `None` when `S0` is absent.
pub fn sidecar_env(side: &BTreeMap<String, String>, path: &Path) -> Result<Option<MarketEnv<f64>>> {
    let num = |k: &str| -> Result<Option<f64>> {
        side.get(k)
            .map(|v| v.parse::<f64>().map_err(|_| CliError::data(path, format!("sidecar {k}='{v}' is not a number"))))
            .transpose()
    };
    let Some(s0) = num("s0")? else { return Ok(None) };
    let env = MarketEnv { s0, r: num("r")?.unwrap_or(0.0), q: num("q")?.unwrap_or(0.0) };
    env.validate()?;
    Ok(Some(env))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes())
}

fn column(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers.iter().position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)))
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

/// Reads a chain CSV with header `strike,maturity,mid[,bid,ask,weight,kind]`.
/// `maturity` may be omitted when the sidecar carries `T`; `price` is accepted
/// for `mid`. `env` overrides the sidecar market. Every bad row is reported.
pub fn load_option_chain(path: &Path, env: Option<MarketEnv<f64>>) -> Result<OptionChain<f64>> {
    let text = read_text(path)?;
    let side = sidecar(&text);
    let env = match env {
        Some(e) => e,
        None => sidecar_env(&side, path)?
            .ok_or_else(|| CliError::data(path, "no market environment: add '# S0=..., r=..., q=...' or pass --env"))?,
    };
    let default_t = match side.get("t") {
        Some(v) => Some(v.parse::<f64>().map_err(|_| CliError::data(path, format!("sidecar T='{v}' is not a number")))?),
        None => None,
    };

    let mut rdr = reader(&text);
    let headers = rdr.headers().map_err(|e| CliError::data(path, e.to_string()))?.clone();
    let need = |names: &[&str]| {
        column(&headers, names).ok_or_else(|| CliError::data(path, format!("missing column '{}'", names[0])))
    };
    let c_strike = need(&["strike"])?;
    let c_mid = need(&["mid", "price"])?;
    let c_t = column(&headers, &["maturity"]);
    if c_t.is_none() && default_t.is_none() {
        return Err(CliError::data(path, "missing column 'maturity' and no sidecar T"));
    }
    let (c_bid, c_ask) = (column(&headers, &["bid"]), column(&headers, &["ask"]));
    let (c_w, c_kind) = (column(&headers, &["weight"]), column(&headers, &["kind"]));

    let mut quotes = Vec::new();
    let mut errors = Vec::new();
    for rec in rdr.records() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                errors.push(e.to_string());
                continue;
            }
        };
        let line = line_of(&rec);
        match parse_quote(&rec, c_strike, c_mid, c_t, default_t, c_bid, c_ask, c_w, c_kind) {
            Ok(q) => quotes.push(q),
            Err(m) => errors.push(format!("line {line}: {m}")),
        }
    }
    if quotes.is_empty() && errors.is_empty() {
        errors.push("no quotes".into());
    }
    if !errors.is_empty() {
        return Err(CliError::data(path, errors.join("; ")));
    }
    Ok(OptionChain::new(quotes, env)?)
}

#[allow(clippy::too_many_arguments)]
fn parse_quote(
    rec: &csv::StringRecord,
    c_strike: usize,
    c_mid: usize,
    c_t: Option<usize>,
    default_t: Option<f64>,
    c_bid: Option<usize>,
    c_ask: Option<usize>,
    c_w: Option<usize>,
    c_kind: Option<usize>,
) -> std::result::Result<OptionQuote<f64>, String> {
    let field = |c: usize, name: &str| -> std::result::Result<Option<f64>, String> {
        let s = rec.get(c).unwrap_or("");
        if s.is_empty() {
            return Ok(None);
        }
        s.parse::<f64>().map(Some).map_err(|_| format!("{name} '{s}' is not a number"))
    };
    let strike = field(c_strike, "strike")?.ok_or("strike is empty")?;
    let mid = field(c_mid, "mid")?.ok_or("mid is empty")?;
    let maturity = match c_t {
        Some(c) => field(c, "maturity")?.or(default_t),
        None => default_t,
    }
    .ok_or("maturity is empty")?;
    let bid = c_bid.map(|c| field(c, "bid")).transpose()?.flatten();
    let ask = c_ask.map(|c| field(c, "ask")).transpose()?.flatten();
    let weight = c_w.map(|c| field(c, "weight")).transpose()?.flatten();
    let kind = match c_kind.and_then(|c| rec.get(c)).filter(|s| !s.is_empty()) {
        Some(s) => s.parse::<OptionKind>().map_err(|e| e.to_string())?,
        None => OptionKind::Call,
    };

    let mut problems = Vec::new();
    if !(strike > 0.0) {
        problems.push(format!("strike {strike} must be positive"));
    }
    if !(maturity > 0.0) {
        problems.push(format!("maturity {maturity} must be positive"));
    }
    if !mid.is_finite() || mid < 0.0 {
        problems.push(format!("mid {mid} must be finite and nonnegative"));
    }
    if let (Some(b), Some(a)) = (bid, ask) {
        if b > a {
            problems.push(format!("bid {b} > ask {a}"));
        }
    }
    if bid.is_some_and(|b| b > mid) || ask.is_some_and(|a| a < mid) {
        problems.push("mid outside [bid, ask]".into());
    }
    if weight.is_some_and(|w| !(w >= 0.0)) {
        problems.push("weight must be nonnegative".into());
    }
    if !problems.is_empty() {
        return Err(problems.join(", "));
    }
    Ok(OptionQuote { strike, maturity, mid, bid, ask, weight, kind })
}

/// Reads a `time,price[,log_price]` series. Times must increase with a
/// uniform step (1e-9 relative); `dt`, when given, must match that step.
/// A `log_price` column is used verbatim, so written series reload exactly.
pub fn load_price_series(path: &Path, dt: Option<f64>) -> Result<LogReturnSeries<f64>> {
    let text = read_text(path)?;
    let mut rdr = reader(&text);
    let headers = rdr.headers().map_err(|e| CliError::data(path, e.to_string()))?.clone();
    let c_time = column(&headers, &["time"]).ok_or_else(|| CliError::data(path, "missing column 'time'"))?;
    let c_price = column(&headers, &["price"]).ok_or_else(|| CliError::data(path, "missing column 'price'"))?;
    let c_log = column(&headers, &["log_price"]);

    let mut times = Vec::new();
    let mut logs = Vec::new();
    let mut errors = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::data(path, e.to_string()))?;
        let line = line_of(&rec);
        let num = |c: usize| rec.get(c).unwrap_or("").parse::<f64>();
        let (t, p) = match (num(c_time), num(c_price)) {
            (Ok(t), Ok(p)) => (t, p),
            _ => {
                errors.push(format!("line {line}: time and price must be numbers"));
                continue;
            }
        };
        if !(p > 0.0) || !p.is_finite() {
            errors.push(format!("line {line}: price {p} must be positive"));
            continue;
        }
        let lp = match c_log.map(num) {
            Some(Ok(v)) => v,
            Some(Err(_)) => {
                errors.push(format!("line {line}: log_price is not a number"));
                continue;
            }
            None => p.ln(),
        };
        times.push(t);
        logs.push(lp);
    }
    if !errors.is_empty() {
        return Err(CliError::data(path, errors.join("; ")));
    }
    if times.len() < 3 {
        return Err(CliError::data(path, format!("need at least 3 observations, got {}", times.len())));
    }
    let step = times[1] - times[0];
    for (i, w) in times.windows(2).enumerate() {
        let d = w[1] - w[0];
        if !(d > 0.0) {
            return Err(CliError::data(path, format!("times must increase (rows {} and {})", i + 1, i + 2)));
        }
        if (d - step).abs() > 1e-9 * step {
            return Err(CliError::data(path, format!("nonuniform spacing at row {}: {d} vs {step}", i + 2)));
        }
    }
    let inferred = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let dt = match dt {
        Some(d) if (d - inferred).abs() > 1e-9 * inferred => {
            return Err(CliError::data(path, format!("dt {d} does not match the time column step {inferred}")));
        }
        Some(d) => d,
        None => inferred,
    };
    Ok(LogReturnSeries::new(logs, dt)?)
}

/// `# key=value` header lines.
pub fn meta_header(meta: &Meta) -> String {
    meta.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
}

/// CSV text with a metadata header; cells are written as given.
pub fn csv_text(meta: &Meta, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).expect("write to memory");
    for r in rows {
        w.write_record(r).expect("write to memory");
    }
    let body = String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8");
    meta_header(meta) + &body
}

#[derive(Serialize)]
struct WithMeta<'a, T: Serialize> {
    meta: &'a Meta,
    #[serde(flatten)]
    body: &'a T,
}

pub fn json_text<T: Serialize>(meta: &Meta, body: &T) -> String {
    let mut s = serde_json::to_string_pretty(&WithMeta { meta, body }).expect("outputs serialize");
    s.push('\n');
    s
}

/// Writes to `out`, or stdout when `None`.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            use std::io::Write;
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

/// A chain as CSV that [`load_option_chain`] reads back.
pub fn chain_csv(chain: &OptionChain<f64>, meta: &Meta) -> String {
    let mut meta = meta.clone();
    meta.insert("S0".into(), fmt_f64(chain.env.s0));
    meta.insert("r".into(), fmt_f64(chain.env.r));
    meta.insert("q".into(), fmt_f64(chain.env.q));
    let opt = |v: Option<f64>| v.map_or(String::new(), fmt_f64);
    let rows: Vec<Vec<String>> = chain
        .quotes
        .iter()
        .map(|q| {
            vec![
                fmt_f64(q.strike),
                fmt_f64(q.maturity),
                fmt_f64(q.mid),
                opt(q.bid),
                opt(q.ask),
                opt(q.weight),
                q.kind.to_string(),
            ]
        })
        .collect();
    csv_text(&meta, &["strike", "maturity", "mid", "bid", "ask", "weight", "kind"], &rows)
}

/// A series as CSV that [`load_price_series`] reads back bit for bit.
pub fn series_csv(series: &LogReturnSeries<f64>, meta: &Meta) -> String {
    let rows: Vec<Vec<String>> = series
        .log_prices
        .iter()
        .enumerate()
        .map(|(i, &z)| vec![fmt_f64(i as f64 * series.dt), fmt_f64(z.exp()), fmt_f64(z)])
        .collect();
    csv_text(meta, &["time", "price", "log_price"], &rows)
}
