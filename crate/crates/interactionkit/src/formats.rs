//! Text formats.
//!
//! Tabular game: a first line `n=<players>`, then `<bitstring>,<value>`
//! for every one of the `2^n` coalitions in any order. Bit strings list
//! player 0 first. SOUM file: the same header followed by one
//! `<bitstring>,<coefficient>` line per unanimity term.
//!
//! Estimate maps: a first line `n=<n>,k=<k>,kind=<kind>`, then one
//! `<bitstring>,<score>` line per interaction set in ascending bit order.
//!
//! Reals are written in the shortest form that parses back to the same
//! `f64`, so every dump/load pair is lossless.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use interactionkit_core::{Coalition, EstimateMap, Game, IndexKind, SoumGame, TabularGame, MAX_PLAYERS};

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// Non-empty lines with their 1-based line numbers.
fn lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l.trim().to_string())).context("read error"))
        .filter(|l| !matches!(l, Ok((_, s)) if s.is_empty()))
}

fn parse_n(line: Option<Result<(usize, String)>>) -> Result<usize> {
    let (_, line) = line.context("empty file")??;
    let value = line.strip_prefix("n=").with_context(|| format!("malformed header {line:?}, expected n=<players>"))?;
    let n: usize = value.trim().parse().with_context(|| format!("malformed header {line:?}"))?;
    ensure!((1..=MAX_PLAYERS).contains(&n), "player count {n} outside 1..={MAX_PLAYERS}");
    Ok(n)
}

fn parse_row(no: usize, line: &str, n: usize) -> Result<(Coalition, f64)> {
    let (bits, value) = line.split_once(',').with_context(|| format!("line {no}: expected <bitstring>,<value>"))?;
    let (set, len) = Coalition::parse_bitstring(bits.trim()).with_context(|| format!("line {no}: bad bit string"))?;
    ensure!(len == n, "line {no}: bit string has {len} players, header says {n}");
    let value: f64 = value.trim().parse().with_context(|| format!("line {no}: unparsable real {value:?}"))?;
    ensure!(value.is_finite(), "line {no}: non-finite value");
    Ok((set, value))
}

pub fn read_tabular<R: BufRead>(reader: R) -> Result<TabularGame> {
    let mut it = lines(reader);
    let n = parse_n(it.next())?;
    ensure!(n <= TabularGame::MAX_PLAYERS, "tabular games support at most {} players", TabularGame::MAX_PLAYERS);
    let size = 1usize << n;
    let mut values = vec![f64::NAN; size];
    let mut seen = vec![false; size];
    let mut rows = 0;
    for line in it {
        let (no, line) = line?;
        let (set, v) = parse_row(no, &line, n)?;
        let i = set.bits() as usize;
        ensure!(!seen[i], "line {no}: duplicate coalition {}", set.to_bitstring(n));
        seen[i] = true;
        values[i] = v;
        rows += 1;
    }
    if rows != size {
        bail!("incomplete table: {rows} of {size} coalitions");
    }
    Ok(TabularGame::new(n, values)?)
}

pub fn load_tabular(path: &Path) -> Result<TabularGame> {
    read_tabular(open(path)?).with_context(|| format!("in {}", path.display()))
}

/// Writes every coalition value of `game` in ascending bit order.
pub fn write_tabular<W: Write, G: Game + ?Sized>(mut w: W, game: &G) -> Result<()> {
    let n = game.players();
    ensure!(n <= TabularGame::MAX_PLAYERS, "tabular games support at most {} players", TabularGame::MAX_PLAYERS);
    writeln!(w, "n={n}")?;
    for bits in 0..1u64 << n {
        let set = Coalition::from_bits_unchecked(bits);
        writeln!(w, "{},{}", set.to_bitstring(n), game.value(set))?;
    }
    w.flush()?;
    Ok(())
}

pub fn dump_tabular<G: Game + ?Sized>(path: &Path, game: &G) -> Result<()> {
    write_tabular(create(path)?, game)
}

pub fn read_soum<R: BufRead>(reader: R) -> Result<SoumGame> {
    let mut it = lines(reader);
    let n = parse_n(it.next())?;
    let mut terms = Vec::new();
    for line in it {
        let (no, line) = line?;
        terms.push(parse_row(no, &line, n)?);
    }
    Ok(SoumGame::new(n, terms)?)
}

pub fn load_soum(path: &Path) -> Result<SoumGame> {
    read_soum(open(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn write_soum<W: Write>(mut w: W, game: &SoumGame) -> Result<()> {
    let n = game.players();
    writeln!(w, "n={n}")?;
    for &(set, c) in game.terms() {
        writeln!(w, "{},{}", set.to_bitstring(n), c)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_soum(path: &Path, game: &SoumGame) -> Result<()> {
    write_soum(create(path)?, game)
}

pub fn write_estimates<W: Write>(mut w: W, map: &EstimateMap) -> Result<()> {
    let n = map.n();
    writeln!(w, "n={n},k={},kind={}", map.order(), map.kind())?;
    for (key, score) in map.iter() {
        writeln!(w, "{},{}", key.to_bitstring(n), score)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_estimates(path: &Path, map: &EstimateMap) -> Result<()> {
    write_estimates(create(path)?, map)
}

pub fn read_estimates<R: BufRead>(reader: R) -> Result<EstimateMap> {
    let mut it = lines(reader);
    let (_, header) = it.next().context("empty file")??;
    let mut n = None;
    let mut k = None;
    let mut kind = None;
    for field in header.split(',') {
        match field.trim().split_once('=') {
            Some(("n", v)) => n = Some(v.parse::<usize>()?),
            Some(("k", v)) => k = Some(v.parse::<usize>()?),
            Some(("kind", v)) => kind = Some(v.parse::<IndexKind>()?),
            _ => bail!("malformed header {header:?}, expected n=<n>,k=<k>,kind=<kind>"),
        }
    }
    let (Some(n), Some(k), Some(kind)) = (n, k, kind) else {
        bail!("malformed header {header:?}, expected n=<n>,k=<k>,kind=<kind>");
    };
    let mut map = EstimateMap::zeros(n, k, kind)?;
    let keys: Vec<Coalition> = map.keys().collect();
    let mut rows = 0;
    for line in it {
        let (no, line) = line?;
        let (set, v) = parse_row(no, &line, n)?;
        ensure!(rows < keys.len() && keys[rows] == set, "line {no}: expected key {}", keys.get(rows).map_or("<end>".into(), |k| k.to_bitstring(n)));
        map.scores_mut()[rows] = v;
        rows += 1;
    }
    ensure!(rows == keys.len(), "incomplete map: {rows} of {} rows", keys.len());
    Ok(map)
}

pub fn load_estimates(path: &Path) -> Result<EstimateMap> {
    read_estimates(open(path)?).with_context(|| format!("in {}", path.display()))
}

/// A `key,value` record.
pub fn write_record<W: Write>(mut w: W, fields: &[(&str, String)]) -> Result<()> {
    writeln!(w, "key,value")?;
    for (k, v) in fields {
        writeln!(w, "{k},{v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_record(path: &Path, fields: &[(&str, String)]) -> Result<()> {
    write_record(create(path)?, fields)
}
