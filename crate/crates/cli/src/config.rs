//! Sweep configurations: TOML files, built-in recipes and `key=value`
//! overrides, merged in that order and checked before anything runs.
//!
//! ```toml
//! name = "my-sweep"
//! recipe = "fig4"        # optional base
//! seed = 1
//!
//! [sweep]
//! axis = "nex"           # or "gtint"
//! min = 1
//! max = 60
//! steps = 60
//! spacing = "linear"     # or "log"
//! methods = ["direct", "spectral"]
//! windows = ["inf", "N=20", "t=5", "N=20;t=5"]
//!
//! [params]
//! gt_int = "pi/sqrt(2)"  # number or expression
//! nbar = 0.1
//! p = 0
//! eta_e = 1
//! eta_g = 1
//!
//! [monte_carlo]
//! trajectories = 10000
//!
//! [plot]
//! title = "..."
//! columns = ["Q_e", "Q_g"]
//! q_f_scale = 0.1
//! ```

use std::path::Path;

use micromaser::oracle::MIN_TRAJECTORIES;
use micromaser::stats::SOLVABLE_GT;
use micromaser::{Method, PumpConfig, Windows};
use toml::{Table, Value};

use crate::error::{nearest, CliError, Result};
use crate::expr;
use crate::recipes;

/// Every accepted key, by section; the empty section is the top level.
pub const KEYS: &[(&str, &[&str])] = &[
    ("", &["name", "recipe", "seed", "jobs"]),
    (
        "sweep",
        &["axis", "min", "max", "steps", "spacing", "methods", "windows"],
    ),
    ("params", &["gt_int", "n_ex", "nbar", "p", "eta_e", "eta_g"]),
    ("monte_carlo", &["trajectories"]),
    ("plot", &["title", "columns", "q_f_scale"]),
];

/// CSV data columns, in file order after the axis column.
pub const COLUMNS: [&str; 7] = ["Q_e", "Q_g", "Qt_e", "Qt_g", "Q_f", "mean_Ne", "mean_Ng"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    NEx,
    GtInt,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::NEx => "N_ex",
            Axis::GtInt => "gt_int",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// One sweep: an axis, the fixed parameters, and what to compute at each
/// point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub spacing: Spacing,
    pub gt_int: f64,
    pub n_ex: f64,
    pub nbar: f64,
    pub p: f64,
    pub eta_e: f64,
    pub eta_g: f64,
    pub methods: Vec<Method>,
    pub windows: Vec<Windows>,
}

impl SweepSpec {
    /// Axis values in order; the end points are exact.
    pub fn points(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == self.steps - 1 {
                    return self.max;
                }
                let f = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + f * (self.max - self.min),
                    Spacing::Log => self.min * (self.max / self.min).powf(f),
                }
            })
            .collect()
    }

    /// Pump configuration at axis value `x`.
    pub fn pump(&self, x: f64) -> PumpConfig {
        let (gt, n_ex) = match self.axis {
            Axis::NEx => (self.gt_int, x),
            Axis::GtInt => (x, self.n_ex),
        };
        PumpConfig::new(gt, self.nbar, self.p, n_ex).with_efficiencies(self.eta_e, self.eta_g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub columns: Vec<String>,
    pub q_f_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub name: String,
    pub sweep: SweepSpec,
    pub plot: PlotSpec,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub trajectories: usize,
}

/// Parses a window label: `inf`, `N=20`, `t=5` or `N=20;t=5`.
pub fn parse_windows(label: &str) -> std::result::Result<Windows, String> {
    let label = label.trim();
    let mut w = Windows::ASYMPTOTIC;
    if label == "inf" {
        return Ok(w);
    }
    for part in label.split(';') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("window `{part}` is not `N=…`, `t=…` or `inf`"))?;
        match k.trim() {
            "N" => {
                let n: usize = v.trim().parse().map_err(|_| format!("N = `{v}` is not a count"))?;
                if n == 0 || w.atoms.is_some() {
                    return Err(format!("bad atom window in `{label}`"));
                }
                w.atoms = Some(n);
            }
            "t" => {
                let t = expr::eval(v)?;
                if !(t > 0.0 && t.is_finite()) || w.time.is_some() {
                    return Err(format!("bad time window in `{label}`"));
                }
                w.time = Some(t);
            }
            other => return Err(format!("unknown window kind `{other}`")),
        }
    }
    Ok(w)
}

fn all_keys() -> Vec<String> {
    KEYS.iter()
        .flat_map(|(s, ks)| {
            ks.iter().map(move |k| {
                if s.is_empty() {
                    k.to_string()
                } else {
                    format!("{s}.{k}")
                }
            })
        })
        .collect()
}

/// Rejects unknown sections and keys, naming the closest valid one.
pub fn check_keys(table: &Table) -> Result<()> {
    let known = all_keys();
    for (k, v) in table {
        let section = KEYS.iter().find(|(s, _)| !s.is_empty() && *s == k.as_str());
        match (section, v) {
            (Some((s, keys)), Value::Table(inner)) => {
                for ik in inner.keys() {
                    if !keys.contains(&ik.as_str()) {
                        let full = format!("{s}.{ik}");
                        return Err(CliError::UnknownKey {
                            suggestion: nearest(&full, known.iter().map(String::as_str)),
                            key: full,
                        });
                    }
                }
            }
            (Some((s, _)), _) => {
                return Err(CliError::BadValue {
                    key: s.to_string(),
                    reason: "must be a section".into(),
                })
            }
            (None, _) if KEYS[0].1.contains(&k.as_str()) => {}
            (None, _) => {
                return Err(CliError::UnknownKey {
                    key: k.clone(),
                    suggestion: nearest(k, known.iter().map(String::as_str)),
                })
            }
        }
    }
    Ok(())
}

/// Overlays `top` on `base`, section by section.
pub fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Applies `key=value`; `key` is `section.key` or a key name that occurs
/// in one section only. The value is read as TOML, or as a bare string.
pub fn apply_set(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| CliError::BadValue {
        key: assignment.to_string(),
        reason: "expected key=value".into(),
    })?;
    let key = key.trim();
    let (section, name) = match key.split_once('.') {
        Some((s, k)) => (s.to_string(), k.to_string()),
        None => {
            let owners: Vec<&str> = KEYS
                .iter()
                .filter(|(_, ks)| ks.contains(&key))
                .map(|(s, _)| *s)
                .collect();
            match owners.as_slice() {
                [s] => (s.to_string(), key.to_string()),
                _ => {
                    // bare names are matched against bare names, then qualified
                    let names = KEYS.iter().flat_map(|(_, ks)| ks.iter().copied());
                    let suggestion = nearest(key, names).map(|n| {
                        let full = all_keys()
                            .into_iter()
                            .filter(|k| k.rsplit('.').next() == Some(n.as_str()));
                        full.min_by_key(String::len).unwrap_or(n)
                    });
                    return Err(CliError::UnknownKey {
                        key: key.to_string(),
                        suggestion,
                    });
                }
            }
        }
    };
    let value = toml::from_str::<Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.trim().to_string()));
    let mut patch = Table::new();
    if section.is_empty() {
        patch.insert(name, value);
    } else {
        let mut inner = Table::new();
        inner.insert(name, value);
        patch.insert(section, Value::Table(inner));
    }
    check_keys(&patch)?;
    merge(table, patch);
    Ok(())
}

/// Reads a configuration file into a table.
pub fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    text.parse::<Table>().map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// File, then recipe underneath it, then overrides on top.
pub fn load(path: Option<&Path>, recipe: Option<&str>, sets: &[String]) -> Result<Config> {
    let file = match path {
        Some(p) => read_table(p)?,
        None => Table::new(),
    };
    check_keys(&file)?;
    let recipe = recipe
        .map(str::to_string)
        .or_else(|| file.get("recipe").and_then(|v| v.as_str()).map(String::from));
    let mut table = match recipe {
        Some(name) => recipes::table(&name)?,
        None => Table::new(),
    };
    merge(&mut table, file);
    for s in sets {
        apply_set(&mut table, s)?;
    }
    Config::from_table(&table)
}

struct Reader<'a> {
    table: &'a Table,
}

impl Reader<'_> {
    fn get(&self, section: &str, key: &str) -> Option<&Value> {
        if section.is_empty() {
            self.table.get(key)
        } else {
            self.table.get(section)?.as_table()?.get(key)
        }
    }

    fn path(section: &str, key: &str) -> String {
        if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        }
    }

    fn bad(section: &str, key: &str, reason: impl Into<String>) -> CliError {
        CliError::BadValue {
            key: Self::path(section, key),
            reason: reason.into(),
        }
    }

    fn number(&self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::String(s)) => expr::eval(s).map(Some).map_err(|e| Self::bad(section, key, e)),
            Some(_) => Err(Self::bad(section, key, "expected a number")),
        }
    }

    fn required(&self, section: &str, key: &str) -> Result<f64> {
        self.number(section, key)?
            .ok_or_else(|| CliError::Missing(Self::path(section, key)))
    }

    fn count(&self, section: &str, key: &str) -> Result<Option<u64>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(Self::bad(section, key, "expected a non-negative integer")),
        }
    }

    fn string(&self, section: &str, key: &str) -> Result<Option<String>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(Self::bad(section, key, "expected a string")),
        }
    }

    fn strings(&self, section: &str, key: &str) -> Result<Option<Vec<String>>> {
        match self.get(section, key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(String::from)
                        .ok_or_else(|| Self::bad(section, key, "expected strings"))
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(Value::String(s)) => Ok(Some(s.split(',').map(|x| x.trim().to_string()).collect())),
            Some(_) => Err(Self::bad(section, key, "expected a list of strings")),
        }
    }
}

impl Config {
    pub fn from_table(table: &Table) -> Result<Self> {
        check_keys(table)?;
        let r = Reader { table };
        let name = r.string("", "name")?.unwrap_or_else(|| "sweep".into());
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Reader::bad("", "name", "use letters, digits, `_` or `-`"));
        }
        let axis = match r.string("sweep", "axis")?.as_deref() {
            Some("nex") => Axis::NEx,
            Some("gtint") => Axis::GtInt,
            Some(other) => {
                return Err(Reader::bad(
                    "sweep",
                    "axis",
                    format!("`{other}` is not `nex` or `gtint`"),
                ))
            }
            None => return Err(CliError::Missing("sweep.axis".into())),
        };
        let spacing = match r.string("sweep", "spacing")?.as_deref() {
            None | Some("linear") => Spacing::Linear,
            Some("log") => Spacing::Log,
            Some(other) => {
                return Err(Reader::bad(
                    "sweep",
                    "spacing",
                    format!("`{other}` is not `linear` or `log`"),
                ))
            }
        };
        let steps = r
            .count("sweep", "steps")?
            .ok_or_else(|| CliError::Missing("sweep.steps".into()))? as usize;
        let methods = r
            .strings("sweep", "methods")?
            .unwrap_or_else(|| vec!["direct".into()])
            .iter()
            .map(|m| {
                Method::parse(m).ok_or_else(|| {
                    let names = Method::ALL.map(Method::as_str);
                    Reader::bad(
                        "sweep",
                        "methods",
                        match nearest(m, names) {
                            Some(s) => format!("unknown method `{m}` (did you mean `{s}`?)"),
                            None => format!("unknown method `{m}`"),
                        },
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let windows = r
            .strings("sweep", "windows")?
            .unwrap_or_else(|| vec!["inf".into()])
            .iter()
            .map(|w| parse_windows(w).map_err(|e| Reader::bad("sweep", "windows", e)))
            .collect::<Result<Vec<_>>>()?;
        let (gt_int, n_ex) = match axis {
            Axis::NEx => (r.required("params", "gt_int")?, f64::NAN),
            Axis::GtInt => (f64::NAN, r.required("params", "n_ex")?),
        };
        let columns = r
            .strings("plot", "columns")?
            .unwrap_or_else(|| COLUMNS[..5].iter().map(|s| s.to_string()).collect());
        for c in &columns {
            if !COLUMNS.contains(&c.as_str()) {
                return Err(Reader::bad(
                    "plot",
                    "columns",
                    match nearest(c, COLUMNS) {
                        Some(s) => format!("unknown column `{c}` (did you mean `{s}`?)"),
                        None => format!("unknown column `{c}`"),
                    },
                ));
            }
        }
        let config = Self {
            sweep: SweepSpec {
                axis,
                min: r.required("sweep", "min")?,
                max: r.required("sweep", "max")?,
                steps,
                spacing,
                gt_int,
                n_ex,
                nbar: r.number("params", "nbar")?.unwrap_or(0.0),
                p: r.number("params", "p")?.unwrap_or(0.0),
                eta_e: r.number("params", "eta_e")?.unwrap_or(1.0),
                eta_g: r.number("params", "eta_g")?.unwrap_or(1.0),
                methods,
                windows,
            },
            plot: PlotSpec {
                title: r.string("plot", "title")?.unwrap_or_else(|| name.clone()),
                columns,
                q_f_scale: r.number("plot", "q_f_scale")?.unwrap_or(1.0),
            },
            seed: r.count("", "seed")?.unwrap_or(0),
            jobs: r.count("", "jobs")?.map(|j| j as usize),
            trajectories: r.count("monte_carlo", "trajectories")?.unwrap_or(10_000) as usize,
            name,
        };
        config.validate()?;
        Ok(config)
    }

    /// Checks everything that can be checked without solving anything.
    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        if !(s.min < s.max) || !s.min.is_finite() || !s.max.is_finite() {
            return Err(CliError::Inconsistent(format!(
                "sweep.min = {} must be below sweep.max = {}",
                s.min, s.max
            )));
        }
        if s.steps < 2 {
            return Err(CliError::Inconsistent("sweep.steps must be at least 2".into()));
        }
        if s.spacing == Spacing::Log && s.min <= 0.0 {
            return Err(CliError::Inconsistent("a log axis needs sweep.min > 0".into()));
        }
        if s.methods.is_empty() || s.windows.is_empty() {
            return Err(CliError::Inconsistent(
                "sweep.methods and sweep.windows must not be empty".into(),
            ));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Inconsistent("jobs must be at least 1".into()));
        }
        for x in s.points() {
            s.pump(x).validate()?;
        }
        if s.methods.contains(&Method::ClosedForm) {
            let solvable = match s.axis {
                Axis::NEx => (s.gt_int - SOLVABLE_GT).abs() <= 1e-12 && s.nbar == 0.0,
                Axis::GtInt => false,
            };
            if !solvable {
                return Err(CliError::Inconsistent(
                    "closed_form needs an N_ex sweep at gt_int = pi/sqrt(2) and nbar = 0".into(),
                ));
            }
            if s.windows.iter().any(|w| !w.is_asymptotic()) {
                return Err(CliError::Inconsistent(
                    "closed_form only covers the `inf` window".into(),
                ));
            }
        }
        if s.methods.contains(&Method::MonteCarlo) {
            if s.windows.iter().any(|w| w.atoms.is_none() || w.time.is_none()) {
                return Err(CliError::Inconsistent(
                    "monte_carlo needs finite windows of both kinds, such as `N=20;t=5`".into(),
                ));
            }
            if self.trajectories < MIN_TRAJECTORIES {
                return Err(CliError::Inconsistent(format!(
                    "monte_carlo.trajectories must be at least {MIN_TRAJECTORIES}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(src: &str) -> Table {
        src.parse().unwrap()
    }

    const BASE: &str = r#"
        [sweep]
        axis = "nex"
        min = 0.1
        max = 10
        steps = 5
        spacing = "log"
        [params]
        gt_int = "pi/sqrt(2)"
    "#;

    #[test]
    fn parses_a_minimal_sweep() {
        let c = Config::from_table(&table(BASE)).unwrap();
        assert_eq!(c.sweep.gt_int, SOLVABLE_GT);
        assert_eq!(c.sweep.methods, vec![Method::Direct]);
        assert_eq!(c.sweep.windows, vec![Windows::ASYMPTOTIC]);
        let pts = c.sweep.points();
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0], 0.1);
        assert_eq!(pts[4], 10.0);
        assert!((pts[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_get_suggestions() {
        let mut t = table(BASE);
        t["params"]
            .as_table_mut()
            .unwrap()
            .insert("nbr".into(), Value::Float(0.1));
        match Config::from_table(&t) {
            Err(CliError::UnknownKey { key, suggestion }) => {
                assert_eq!(key, "params.nbr");
                assert_eq!(suggestion.as_deref(), Some("params.nbar"));
            }
            other => panic!("{other:?}"),
        }
        let mut t = table(BASE);
        t.insert("sed".into(), Value::Integer(1));
        let err = Config::from_table(&t).unwrap_err().to_string();
        assert!(err.contains("`sed`") && err.contains("`seed`"), "{err}");
    }

    #[test]
    fn overrides() {
        let mut t = table(BASE);
        apply_set(&mut t, "nbar=0.1").unwrap();
        apply_set(&mut t, "sweep.steps = 7").unwrap();
        apply_set(&mut t, "windows=[\"N=20;t=5\", \"inf\"]").unwrap();
        let c = Config::from_table(&t).unwrap();
        assert_eq!(c.sweep.nbar, 0.1);
        assert_eq!(c.sweep.steps, 7);
        assert_eq!(
            c.sweep.windows[0],
            Windows {
                atoms: Some(20),
                time: Some(5.0)
            }
        );
        assert!(apply_set(&mut t, "stepz=3").is_err());
        assert!(apply_set(&mut t, "novalue").is_err());
    }

    #[test]
    fn rejects_inconsistent_sets() {
        let mut t = table(BASE);
        apply_set(&mut t, "p=1.5").unwrap();
        assert!(matches!(Config::from_table(&t), Err(CliError::Core(_))));
        let mut t = table(BASE);
        apply_set(&mut t, "nbar=0.1").unwrap();
        apply_set(&mut t, "methods=[\"closed_form\"]").unwrap();
        assert!(matches!(Config::from_table(&t), Err(CliError::Inconsistent(_))));
        let mut t = table(BASE);
        apply_set(&mut t, "methods=[\"monte_carlo\"]").unwrap();
        assert!(matches!(Config::from_table(&t), Err(CliError::Inconsistent(_))));
        let mut t = table(BASE);
        apply_set(&mut t, "methods=[\"spectal\"]").unwrap();
        let err = Config::from_table(&t).unwrap_err().to_string();
        assert!(err.contains("spectral"), "{err}");
        let mut t = table(BASE);
        apply_set(&mut t, "min=20").unwrap();
        assert!(Config::from_table(&t).is_err());
    }

    #[test]
    fn window_labels_round_trip() {
        for label in ["inf", "N=20", "t=5", "N=20;t=5"] {
            assert_eq!(parse_windows(label).unwrap().label(), label);
        }
        assert!(parse_windows("N=0").is_err());
        assert!(parse_windows("x=3").is_err());
        assert!(parse_windows("N=2;N=3").is_err());
    }
}
