//! Text formats for coverings and verification reports, and atomic writes.
//!
//! Both formats are a magic line followed by `key = value` lines in a fixed
//! order. Covering files end with a `centers` line and one row of
//! space-separated coordinates per center, 17 significant digits each.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::capgeom::{SphereSpec, SurfacePoint};
use crate::construct::{Covering, Provenance};
use crate::error::{Error, Result};
use crate::verify::{VerificationMode, VerificationReport};

pub const COVERING_MAGIC: &str = "spherecover-covering";
pub const REPORT_MAGIC: &str = "spherecover-report";
pub const FORMAT_VERSION: u32 = 1;

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        line,
        message: message.into(),
    }
}

pub fn covering_to_string(cov: &Covering) -> String {
    let s = cov.sphere();
    let mut out = String::new();
    let _ = writeln!(out, "{COVERING_MAGIC}");
    let _ = writeln!(out, "format_version = {FORMAT_VERSION}");
    let _ = writeln!(out, "n = {}", s.n());
    let _ = writeln!(out, "r = {:?}", s.r());
    let _ = writeln!(out, "half_chord = {:?}", cov.half_chord());
    let _ = writeln!(out, "mode = {}", cov.provenance.mode);
    let _ = writeln!(out, "seed = {}", cov.provenance.seed);
    for p in &cov.provenance.parents {
        let _ = writeln!(out, "parent = {p}");
    }
    let _ = writeln!(out, "center_count = {}", cov.len());
    let _ = writeln!(out, "centers");
    for c in cov.centers() {
        let row: Vec<String> = c.coords().iter().map(|x| format!("{x:.16e}")).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Reads `key = value` header lines until `stop` (exclusive) or the end.
struct Header<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Header<'a> {
    fn new(text: &'a str, magic: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == magic => Ok(Header { lines, last: 1 }),
            Some((_, l)) => Err(format_err(1, format!("expected '{magic}', found '{l}'"))),
            None => Err(format_err(1, "empty input")),
        }
    }

    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.lines.by_ref() {
            self.last = i + 1;
            let t = l.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Some((i + 1, t));
            }
        }
        None
    }

    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (line, text) = self
            .next_line()
            .ok_or_else(|| format_err(self.last, format!("missing field '{key}'")))?;
        match text.split_once('=') {
            Some((k, v)) if k.trim() == key => Ok((line, v.trim())),
            _ => Err(format_err(line, format!("expected '{key} = ...', found '{text}'"))),
        }
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let (line, v) = self.field(key)?;
        v.parse()
            .map_err(|e| format_err(line, format!("bad value for '{key}': {e}")))
    }
}

fn check_version(h: &mut Header) -> Result<()> {
    let line = h.last + 1;
    let v: u32 = h.parse("format_version")?;
    if v != FORMAT_VERSION {
        return Err(format_err(line, format!("unsupported format_version {v}")));
    }
    Ok(())
}

pub fn parse_covering(text: &str) -> Result<Covering> {
    let mut h = Header::new(text, COVERING_MAGIC)?;
    check_version(&mut h)?;
    let n: usize = h.parse("n")?;
    let r: f64 = h.parse("r")?;
    let sphere = SphereSpec::new(n, r).map_err(|e| format_err(h.last, e.to_string()))?;
    let half_chord: f64 = h.parse("half_chord")?;
    let mode = h.field("mode")?.1.to_string();
    let seed: u64 = h.parse("seed")?;
    let mut prov = Provenance::new(mode, seed);
    let count: usize = loop {
        let (line, text) = h
            .next_line()
            .ok_or_else(|| format_err(h.last, "missing field 'center_count'"))?;
        match text.split_once('=').map(|(k, v)| (k.trim(), v.trim())) {
            Some(("parent", v)) => prov.parents.push(v.to_string()),
            Some(("center_count", v)) => {
                break v
                    .parse()
                    .map_err(|e| format_err(line, format!("bad center_count: {e}")))?
            }
            _ => return Err(format_err(line, format!("unexpected line '{text}'"))),
        }
    };
    match h.next_line() {
        Some((_, "centers")) => {}
        Some((line, t)) => return Err(format_err(line, format!("expected 'centers', found '{t}'"))),
        None => return Err(format_err(h.last, "missing 'centers' line")),
    }
    let mut centers = Vec::with_capacity(count);
    while let Some((line, t)) = h.next_line() {
        let coords = t
            .split_whitespace()
            .map(|x| x.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| format_err(line, format!("bad coordinate: {e}")))?;
        let p = SurfacePoint::on_sphere(sphere, coords).map_err(|e| format_err(line, e.to_string()))?;
        centers.push(p);
    }
    if centers.len() != count {
        return Err(format_err(
            h.last,
            format!("center_count is {count} but {} rows follow", centers.len()),
        ));
    }
    Covering::new(sphere, half_chord, centers, prov).map_err(|e| format_err(h.last, e.to_string()))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:?}"))
}

pub fn report_to_string(rep: &VerificationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{REPORT_MAGIC}");
    let _ = writeln!(out, "format_version = {FORMAT_VERSION}");
    let _ = writeln!(out, "mode = {}", rep.mode);
    let _ = writeln!(out, "samples_or_net_size = {}", rep.samples_or_net_size);
    let _ = writeln!(out, "uncovered_count = {}", rep.uncovered_count);
    let _ = writeln!(out, "uncovered_fraction_estimate = {:?}", rep.uncovered_fraction_estimate);
    let _ = writeln!(out, "ci_lower = {:?}", rep.confidence_interval.0);
    let _ = writeln!(out, "ci_upper = {:?}", rep.confidence_interval.1);
    let _ = writeln!(out, "margin = {}", opt(rep.margin));
    let _ = writeln!(out, "margin_required = {}", opt(rep.margin_required));
    let _ = writeln!(out, "density = {}", opt(rep.density));
    let _ = writeln!(out, "threshold = {:?}", rep.threshold);
    let _ = writeln!(out, "passed = {}", rep.passed);
    out
}

fn parse_opt(h: &mut Header, key: &str) -> Result<Option<f64>> {
    let (line, v) = h.field(key)?;
    if v == "none" {
        return Ok(None);
    }
    v.parse()
        .map(Some)
        .map_err(|e| format_err(line, format!("bad value for '{key}': {e}")))
}

pub fn parse_report(text: &str) -> Result<VerificationReport> {
    let mut h = Header::new(text, REPORT_MAGIC)?;
    check_version(&mut h)?;
    let (line, m) = h.field("mode")?;
    let mode: VerificationMode = m.parse().map_err(|e: Error| format_err(line, e.to_string()))?;
    let rep = VerificationReport {
        mode,
        samples_or_net_size: h.parse("samples_or_net_size")?,
        uncovered_count: h.parse("uncovered_count")?,
        uncovered_fraction_estimate: h.parse("uncovered_fraction_estimate")?,
        confidence_interval: (h.parse("ci_lower")?, h.parse("ci_upper")?),
        margin: parse_opt(&mut h, "margin")?,
        margin_required: parse_opt(&mut h, "margin_required")?,
        density: parse_opt(&mut h, "density")?,
        threshold: h.parse("threshold")?,
        passed: h.parse("passed")?,
    };
    if let Some((line, t)) = h.next_line() {
        return Err(format_err(line, format!("unexpected trailing line '{t}'")));
    }
    if rep.passed != (rep.uncovered_fraction_estimate <= rep.threshold) {
        return Err(format_err(h.last, "passed disagrees with estimate and threshold"));
    }
    Ok(rep)
}

/// Writes `contents` to a temporary file next to `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn save_covering(path: &Path, cov: &Covering) -> Result<()> {
    write_atomic(path, covering_to_string(cov).as_bytes())
}

pub fn load_covering(path: &Path) -> Result<Covering> {
    parse_covering(&std::fs::read_to_string(path)?)
}

pub fn save_report(path: &Path, rep: &VerificationReport) -> Result<()> {
    write_atomic(path, report_to_string(rep).as_bytes())
}

pub fn load_report(path: &Path) -> Result<VerificationReport> {
    parse_report(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::random_base_covering;
    use crate::rng::SeededRng;
    use crate::verify::verify_monte_carlo;

    fn fixture() -> Covering {
        let s = SphereSpec::new(2, 1.5).unwrap();
        let mut c = random_base_covering(&s, 1.4, 1e-3, &mut SeededRng::new(1)).unwrap();
        c.provenance.parents.push("base/seed=3".into());
        c
    }

    #[test]
    fn covering_round_trip_is_exact() {
        let c = fixture();
        let text = covering_to_string(&c);
        let back = parse_covering(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(covering_to_string(&back), text);
    }

    #[test]
    fn report_round_trip() {
        let rep = verify_monte_carlo(&fixture(), 1000, &mut SeededRng::new(2)).unwrap();
        let text = report_to_string(&rep);
        assert_eq!(parse_report(&text).unwrap(), rep);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = covering_to_string(&fixture());
        let bad = text.replacen("n = 2", "n = two", 1);
        assert!(matches!(parse_covering(&bad), Err(Error::Format { line: 3, .. })));
        let lines: Vec<&str> = text.lines().collect();
        let truncated = lines[..lines.len() - 1].join("\n");
        assert!(matches!(parse_covering(&truncated), Err(Error::Format { .. })));
        let off = text.replacen("centers\n", "centers\n9.0 0.0 0.0\n", 1);
        assert!(matches!(parse_covering(&off), Err(Error::Format { line: 11, .. })));
        assert!(matches!(parse_covering("nonsense"), Err(Error::Format { line: 1, .. })));
        assert!(parse_covering(&text.replacen("format_version = 1", "format_version = 9", 1)).is_err());
    }

    #[test]
    fn atomic_save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cov.txt");
        let c = fixture();
        save_covering(&path, &c).unwrap();
        save_covering(&path, &c).unwrap();
        assert_eq!(load_covering(&path).unwrap(), c);
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
