//! Parameter tables, config files and flag merging.
//!
//! Every subcommand owns a table of keys. The same key is accepted as a
//! `--key value` flag and as a `key = value` line in a config file, either
//! before any section, under `[general]`, or under a section named after the
//! subcommand. Flags override the file.

use std::collections::BTreeMap;
use std::fmt;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Float,
    Count,
    Choice(&'static [&'static str]),
    Text,
}

#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub key: &'static str,
    pub kind: Kind,
    /// `None` marks a required key.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn p(key: &'static str, kind: Kind, default: Option<&'static str>, help: &'static str) -> Param {
    Param { key, kind, default, help }
}

const F: Kind = Kind::Float;
const N: Kind = Kind::Count;

const OUT: Param = p("out", Kind::Text, None, "output CSV path; parameters go to <out>.params");

const EXPERIMENT: &[Param] = &[
    p("m", F, Some("1"), "mass"),
    p("p-bar", F, Some("0.1"), "mean momentum"),
    p("sigma1-hat", F, Some("0.01"), "momentum width of the beam"),
    p("sigma0", F, Some("30"), "initial width in quantum time"),
    p("l-gate", F, Some("1"), "source to gate distance"),
    p("l-detector", F, Some("2000"), "source to detector distance"),
    p("gate-center", F, Some("10.5"), "gate center in laboratory time"),
    p("gate-width", F, Some("1"), "gate width"),
    p("delta-t", F, Some("1500"), "half separation of the two sources"),
    p("delta-phi", F, Some("0"), "relative phase of the two sources"),
    p("tau-s", F, Some("0"), "laboratory start time"),
    p("points", N, Some("2001"), "samples of the arrival offset"),
    p("min", F, Some("auto"), "first arrival offset, or auto"),
    p("max", F, Some("auto"), "last arrival offset, or auto"),
];

pub const COMMANDS: &[(&str, &str)] = &[
    ("kernel", "sample a closed-form propagator on a 2D grid"),
    ("pathint", "propagate a Gaussian through the sliced path integral"),
    ("evolve", "evolve a Gaussian with the grid Schrodinger solver"),
    ("slit", "arrival density behind a single gate in time"),
    ("doubleslit", "arrival density from two sources separated in time"),
    ("lindner", "attosecond double slit with a bound-state width in time"),
    ("fields", "corrections in slowly varying magnetic or electric fields"),
    ("abtime", "Aharonov-Bohm phase in time"),
    ("wavelet", "Morlet analysis of a sampled signal"),
];

pub fn table(cmd: &str) -> Vec<Param> {
    let mut v = vec![OUT];
    match cmd {
        "kernel" => v.extend_from_slice(&[
            p("kind", Kind::Choice(&["free", "electric", "magnetic", "potential"]), Some("free"), "kernel family"),
            p("m", F, Some("1"), "mass"),
            p("tau", F, Some("1"), "laboratory time interval"),
            p("alpha", F, Some("0"), "eE/m for the electric kernel"),
            p("omega", F, Some("0"), "Larmor frequency for the magnetic kernel"),
            p("charge", F, Some("1"), "charge for the constant potential"),
            p("phi", F, Some("0"), "constant scalar potential"),
            p("ax", F, Some("0"), "constant vector potential along x"),
            p("t0", F, Some("0"), "source time"),
            p("x0", F, Some("0"), "source x"),
            p("y0", F, Some("0"), "source y (magnetic)"),
            p("t-min", F, Some("-3"), "first t sample"),
            p("t-max", F, Some("3"), "last t sample"),
            p("t-n", N, Some("61"), "t samples"),
            p("x-min", F, Some("-3"), "first x sample"),
            p("x-max", F, Some("3"), "last x sample"),
            p("x-n", N, Some("61"), "x samples"),
            p("y-min", F, Some("-3"), "first y sample (magnetic)"),
            p("y-max", F, Some("3"), "last y sample (magnetic)"),
            p("y-n", N, Some("61"), "y samples (magnetic)"),
        ]),
        "pathint" => v.extend_from_slice(&[
            p("slices", N, Some("16"), "number of time slices"),
            p("dims", Kind::Choice(&["1", "2"]), Some("1"), "1 for time only, 2 for time and x"),
            p("m", F, Some("1"), "mass"),
            p("tau", F, Some("1"), "laboratory time interval"),
            p("energy", F, Some("1"), "central energy of the packet"),
            p("px", F, Some("0"), "central momentum along x"),
            p("sigma2-t", F, Some("1"), "initial time dispersion"),
            p("sigma2-x", F, Some("1"), "initial space dispersion"),
            p("charge", F, Some("1"), "charge"),
            p("phi", F, Some("0"), "constant scalar potential"),
        ]),
        "evolve" => v.extend_from_slice(&[
            p("field", Kind::Choice(&["free", "scalar", "electric"]), Some("free"), "external field"),
            p("m", F, Some("1"), "mass"),
            p("tau", F, Some("1"), "laboratory time interval"),
            p("samples", N, Some("1"), "snapshots after equal lab-time intervals"),
            p("steps", N, Some("200"), "minimum integrator steps per interval"),
            p("energy", F, Some("1"), "central energy of the packet"),
            p("px", F, Some("0"), "central momentum along x"),
            p("sigma2-t", F, Some("1"), "initial time dispersion"),
            p("sigma2-x", F, Some("1"), "initial space dispersion"),
            p("charge", F, Some("1"), "charge"),
            p("phi", F, Some("0"), "constant scalar potential (scalar)"),
            p("efield", F, Some("0"), "uniform electric field along x (electric)"),
            p("t-min", F, Some("-8"), "first t grid point"),
            p("t-max", F, Some("8"), "last t grid point"),
            p("t-n", N, Some("161"), "t grid points"),
            p("x-min", F, Some("-8"), "first x grid point"),
            p("x-max", F, Some("8"), "last x grid point"),
            p("x-n", N, Some("161"), "x grid points"),
        ]),
        "slit" => {
            v.push(p("mode", Kind::Choice(&["single", "free"]), Some("single"), "gated or free beam"));
            v.push(p("theory", Kind::Choice(&["sqt", "tq"]), Some("tq"), "ordinary theory or quantum time"));
            v.extend_from_slice(EXPERIMENT);
        }
        "doubleslit" => {
            v.push(p("theory", Kind::Choice(&["sqt", "tq"]), Some("tq"), "ordinary theory or quantum time"));
            v.extend_from_slice(EXPERIMENT);
        }
        "lindner" => v.extend_from_slice(&[
            p("sigma-a", F, Some("auto"), "bound-state width in time, or auto from the radius"),
            p("radius-pm", F, Some("106"), "atomic radius in picometers, used when sigma-a is auto"),
            p("sigma-bar-d", F, Some("10"), "ordinary arrival width, in attoseconds when sigma-a is auto"),
            p("f-bar", F, Some("0.5"), "ordinary fringe frequency"),
            p("phi-bar", F, Some("0"), "fringe offset"),
            p("delta-t", F, Some("25"), "half separation of the two humps"),
            p("points", N, Some("2001"), "samples of the arrival offset"),
        ]),
        "fields" => v.extend_from_slice(&[
            p("kind", Kind::Choice(&["larmor", "electric"]), Some("larmor"), "field correction"),
            p("m", F, Some("1"), "mass"),
            p("charge", F, Some("1"), "charge"),
            p("b0", F, Some("1"), "magnetic field at t = 0"),
            p("b1", F, Some("0"), "first derivative of the magnetic field"),
            p("b2", F, Some("0"), "second derivative of the magnetic field"),
            p("e0", F, Some("1"), "electric field at t = 0"),
            p("e1", F, Some("0"), "first derivative of the electric field"),
            p("e2", F, Some("0"), "second derivative of the electric field"),
            p("mean-t", F, Some("0"), "mean relative time"),
            p("mean-t2", F, Some("0.5"), "mean square relative time (electric)"),
            p("sigma0", F, Some("1"), "time width sigma0 (larmor)"),
            p("mean-r2", F, Some("0"), "transverse mean square radius (electric)"),
            p("tau-min", F, Some("0"), "first laboratory time"),
            p("tau-max", F, Some("10"), "last laboratory time"),
            p("points", N, Some("101"), "laboratory time samples"),
        ]),
        "abtime" => v.extend_from_slice(&[
            p("v", F, Some("1"), "potential on the shifted arm"),
            p("dtau", F, Some("1"), "interval the potential is on"),
            p("gamma", F, Some("1"), "Lorentz factor"),
            p("charge", F, Some("1"), "charge"),
        ]),
        "wavelet" => v.extend_from_slice(&[
            p("input", Kind::Text, Some(""), "CSV with columns t,re,im on a uniform grid; empty for a test signal"),
            p("center", F, Some("0"), "test signal center"),
            p("width", F, Some("1"), "test signal width"),
            p("k", F, Some("1"), "test signal carrier frequency"),
            p("origin", F, Some("-10"), "test signal first sample"),
            p("step", F, Some("0.02"), "test signal sample step"),
            p("n", N, Some("1001"), "test signal samples"),
            p("s-min", F, Some("0.03"), "smallest scale"),
            p("s-max", F, Some("100000"), "largest scale"),
            p("per-decade", N, Some("16"), "scales per decade"),
            p("d-step", F, Some("0.25"), "displacement step in units of the scale"),
            p("cutoff", F, Some("9"), "envelope cutoff in units of the scale"),
            p("reconstruct", Kind::Choice(&["no", "yes"]), Some("no"), "also synthesize the signal back and report the error"),
        ]),
        _ => {}
    }
    v
}

/// Resolved string values for one subcommand.
#[derive(Debug, Clone)]
pub struct Values {
    pub cmd: String,
    map: BTreeMap<&'static str, String>,
    order: Vec<&'static str>,
}

impl Values {
    pub fn resolve(cmd: &str, file: Option<&str>, flags: &[(&'static str, String)]) -> Result<Self, CliError> {
        let params = table(cmd);
        let mut map = BTreeMap::new();
        for q in &params {
            if let Some(d) = q.default {
                map.insert(q.key, d.to_string());
            }
        }
        if let Some(text) = file {
            for (k, v) in parse_config(text, cmd)? {
                let q = params.iter().find(|q| q.key == k).expect("checked by parse_config");
                map.insert(q.key, v);
            }
        }
        for (k, v) in flags {
            map.insert(k, v.clone());
        }
        for q in &params {
            if !map.contains_key(q.key) {
                return Err(CliError::Usage(format!("missing required --{}", q.key)));
            }
        }
        let vals = Self { cmd: cmd.to_string(), map, order: params.iter().map(|q| q.key).collect() };
        for q in &params {
            vals.check(q)?;
        }
        Ok(vals)
    }

    fn check(&self, q: &Param) -> Result<(), CliError> {
        let raw = &self.map[q.key];
        match q.kind {
            Kind::Float if raw == "auto" && q.default == Some("auto") => Ok(()),
            Kind::Float => self.f64(q.key).map(|_| ()),
            Kind::Count => self.usize(q.key).map(|_| ()),
            Kind::Choice(opts) if opts.contains(&raw.as_str()) => Ok(()),
            Kind::Choice(opts) => Err(CliError::Config(format!("{} must be one of {}, got {raw}", q.key, opts.join("|")))),
            Kind::Text => Ok(()),
        }
    }

    pub fn str(&self, key: &str) -> &str {
        &self.map[key]
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let raw = self.str(key);
        raw.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Config(format!("{key} must be a finite number, got {raw}")))
    }

    /// `None` for `auto`.
    pub fn auto_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        if self.str(key) == "auto" {
            Ok(None)
        } else {
            self.f64(key).map(Some)
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        let raw = self.str(key);
        raw.trim().parse::<usize>().map_err(|_| CliError::Config(format!("{key} must be a non-negative integer, got {raw}")))
    }

    /// All keys in table order, for the parameters record.
    pub fn pairs(&self) -> impl Iterator<Item = (&'static str, &str)> + '_ {
        self.order.iter().map(|k| (*k, self.map[k].as_str()))
    }
}

#[derive(Debug, PartialEq)]
struct Line<'a> {
    number: usize,
    section: &'a str,
    key: &'a str,
    value: &'a str,
}

impl fmt::Display for Line<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}", self.number)
    }
}

/// Key/value pairs that apply to `cmd`. Every section and key is checked,
/// including those for other subcommands.
pub fn parse_config(text: &str, cmd: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut section = "general";
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if name != "general" && !COMMANDS.iter().any(|(c, _)| *c == name) {
                return Err(CliError::Config(format!("config line {}: unknown section [{name}]", i + 1)));
            }
            section = name;
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("config line {}: expected key = value", i + 1)));
        };
        // flag spelling and underscore spelling name the same key
        let key = k.trim().replace('_', "-");
        let l = Line { number: i + 1, section, key: &key, value: v.trim() };
        let known = if l.section == "general" {
            table(cmd).iter().any(|q| q.key == l.key) || COMMANDS.iter().any(|(c, _)| table(c).iter().any(|q| q.key == l.key))
        } else {
            table(l.section).iter().any(|q| q.key == l.key)
        };
        if !known {
            return Err(CliError::Config(format!("config {l}: unknown key {} in [{}]", l.key, l.section)));
        }
        let applies = l.section == cmd || (l.section == "general" && table(cmd).iter().any(|q| q.key == l.key));
        if applies {
            out.push((l.key.to_string(), l.value.to_string()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_overrides() {
        let text = "m = 2\n[slit]\nsigma0 = 0.5 # narrow\n[abtime]\nv = 3\n";
        let v = Values::resolve("slit", Some(text), &[("sigma0", "0.25".into()), ("out", "x.csv".into())]).unwrap();
        assert_eq!(v.f64("m").unwrap(), 2.0);
        assert_eq!(v.f64("sigma0").unwrap(), 0.25);
        assert_eq!(v.str("theory"), "tq");
    }

    #[test]
    fn underscore_keys() {
        let got = parse_config("[slit]\ngate_center = 11\ngate-width = 2\n", "slit").unwrap();
        assert_eq!(got, vec![("gate-center".to_string(), "11".to_string()), ("gate-width".to_string(), "2".to_string())]);
    }

    #[test]
    fn unknown_keys_and_sections() {
        assert!(matches!(parse_config("[slit]\nbogus = 1\n", "slit"), Err(CliError::Config(_))));
        assert!(matches!(parse_config("[nope]\n", "slit"), Err(CliError::Config(_))));
        assert!(matches!(parse_config("[abtime]\nsigma0 = 1\n", "slit"), Err(CliError::Config(_))));
        assert!(matches!(parse_config("just words\n", "slit"), Err(CliError::Config(_))));
    }

    #[test]
    fn missing_and_bad_values() {
        assert!(matches!(Values::resolve("abtime", None, &[]), Err(CliError::Usage(_))));
        let bad = [("out", "a".to_string()), ("gamma", "fast".to_string())];
        assert!(matches!(Values::resolve("abtime", None, &bad), Err(CliError::Config(_))));
        let bad = [("out", "a".to_string()), ("theory", "both".to_string())];
        assert!(matches!(Values::resolve("slit", None, &bad), Err(CliError::Config(_))));
    }
}
